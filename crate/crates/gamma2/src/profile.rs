//! Heteroclinic transition profile and the scalar constants built from it.
//!
//! The profile solves `z' = sqrt(W(z))`, `z(0) = c` on the real line. For
//! quadratic wells (`q = 1`) it approaches the wells exponentially; for
//! subquadratic wells (`q < 1`) it reaches them at finite times `t_a < 0 < t_b`
//! and is constant beyond.

use crate::error::{Error, Result};
use crate::interp::{hermite5, hermite5_deriv, locate};
use crate::ode::{solve_scalar, EventSpec};
use crate::potential::Potential;
use crate::quad;

/// Threshold on the distance to a well at which the ODE integration stops and
/// the analytic continuation takes over.
const WELL_STOP: f64 = 1e-13;

/// Exponential decay diagnostics for `q = 1` profiles.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DecayData {
    /// Tightest lower bracketing constant of `W / (b-s)^{1+q}` on the upper half well.
    pub c1: f64,
    /// Tightest upper bracketing constant.
    pub c2: f64,
    /// Linearized decay rate `sqrt(W''(a)/2)` used for the lower tail.
    pub rate_a: f64,
    /// Linearized decay rate `sqrt(W''(b)/2)` used for the upper tail.
    pub rate_b: f64,
}

/// Tabulated monotone transition profile with analytic tails.
#[derive(Debug, Clone)]
pub struct Profile {
    t: Vec<f64>,
    z: Vec<f64>,
    dz: Vec<f64>,
    d2z: Vec<f64>,
    wells: crate::potential::WellData,
    /// Finite support `(t_a, t_b)` when `q < 1`.
    pub support: Option<(f64, f64)>,
    /// Decay data when `q = 1`.
    pub decay: Option<DecayData>,
    pub potential_ref: String,
    /// Solver tolerance the tabulation was produced with.
    pub tol: f64,
}

impl Profile {
    pub fn z(&self, t: f64) -> f64 {
        let (lo, hi) = (self.t[0], *self.t.last().unwrap());
        if t < lo {
            return self.lower_tail(t);
        }
        if t > hi {
            return self.upper_tail(t);
        }
        let i = locate(&self.t, t);
        hermite5(
            self.t[i],
            self.t[i + 1],
            (self.z[i], self.z[i + 1]),
            (self.dz[i], self.dz[i + 1]),
            (self.d2z[i], self.d2z[i + 1]),
            t,
        )
    }

    pub fn dz(&self, t: f64) -> f64 {
        let (lo, hi) = (self.t[0], *self.t.last().unwrap());
        if t < lo || t > hi {
            // derivative of the analytic tails
            match (self.support, self.decay) {
                (Some(_), _) => return 0.0,
                (_, Some(d)) => {
                    if t < lo {
                        let omega = self.z[0] - self.wells.a;
                        return omega * d.rate_a * (d.rate_a * (t - lo)).exp();
                    } else {
                        let omega = self.wells.b - *self.z.last().unwrap();
                        return omega * d.rate_b * (-d.rate_b * (t - hi)).exp();
                    }
                }
                _ => return 0.0,
            }
        }
        let i = locate(&self.t, t);
        hermite5_deriv(
            self.t[i],
            self.t[i + 1],
            (self.z[i], self.z[i + 1]),
            (self.dz[i], self.dz[i + 1]),
            (self.d2z[i], self.d2z[i + 1]),
            t,
        )
    }

    fn lower_tail(&self, t: f64) -> f64 {
        let lo = self.t[0];
        match (self.support, self.decay) {
            (Some((t_a, _)), _) => {
                if t <= t_a {
                    self.wells.a
                } else {
                    // local power model between the support endpoint and the tabulation
                    let wd = self.wells;
                    let k = ((1.0 - wd.q) / 2.0) * (wd.ell / (wd.q * (1.0 + wd.q))).sqrt();
                    wd.a + (k * (t - t_a)).max(0.0).powf(2.0 / (1.0 - wd.q))
                }
            }
            (_, Some(d)) => {
                let omega = self.z[0] - self.wells.a;
                self.wells.a + omega * (d.rate_a * (t - lo)).exp()
            }
            _ => self.z[0],
        }
    }

    fn upper_tail(&self, t: f64) -> f64 {
        let hi = *self.t.last().unwrap();
        match (self.support, self.decay) {
            (Some((_, t_b)), _) => {
                if t >= t_b {
                    self.wells.b
                } else {
                    let wd = self.wells;
                    let k = ((1.0 - wd.q) / 2.0) * (wd.ell / (wd.q * (1.0 + wd.q))).sqrt();
                    wd.b - (k * (t_b - t)).max(0.0).powf(2.0 / (1.0 - wd.q))
                }
            }
            (_, Some(d)) => {
                let omega = self.wells.b - *self.z.last().unwrap();
                self.wells.b - omega * (-d.rate_b * (t - hi)).exp()
            }
            _ => *self.z.last().unwrap(),
        }
    }

    /// Tabulation nodes (t, z, z').
    pub fn nodes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.t, &self.z, &self.dz)
    }

    /// Extent of the tabulated (non-analytic) part.
    pub fn tab_range(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().unwrap())
    }

    pub fn wells(&self) -> crate::potential::WellData {
        self.wells
    }

    /// Export the tabulation as CSV rows `t,z,dz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,z,dz\n");
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.t[i], self.z[i], self.dz[i]
            ));
        }
        out
    }
}

/// Scalar constants attached to a profile.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ProfileConstants {
    pub c_w: f64,
    pub c_sym: f64,
    pub quadrature_error: f64,
}

/// Solve the profile Cauchy problem by adaptive Runge-Kutta with event
/// detection at the wells.
///
/// Tabulates on `[-horizon, horizon]` or up to the points where `z` comes
/// within `1e-13` of a well, whichever is hit first. For `q < 1` the finite
/// support endpoints are recovered by adding the remaining local-model travel
/// time past the event.
pub fn solve_profile(p: &Potential, horizon: f64, tol: f64) -> Result<Profile> {
    assert!(horizon > 0.0);
    assert!(tol > 1e-14 && tol < 1e-4, "tol must lie in (1e-14, 1e-4)");
    let wells = p.wells();
    let (a, b, c, q, ell) = (wells.a, wells.b, wells.c, wells.q, wells.ell);

    let rhs = |z: f64| {
        if z <= a || z >= b {
            0.0
        } else {
            p.eval(z).max(0.0).sqrt()
        }
    };

    // For q < 1 the right-hand side is not Lipschitz at the wells and the
    // embedded error estimate degrades there; the Runge-Kutta leg stops at a
    // tame distance and the remaining stretch down to the 1e-13 event value is
    // tabulated through the inverse travel-time integral t(z) = int dz/sqrt(W),
    // desingularized by u = (well gap)^{(1-q)/2}.
    let rk_stop = if q < 1.0 { 1e-4 * (b - a) } else { WELL_STOP };

    let max_step = (0.025 * (tol / 1e-11).powf(0.2)).clamp(0.004, 0.05);
    let up_event = EventSpec { g: &|z: f64| z - (b - rk_stop), direction: 1 };
    let mut fwd = solve_scalar(rhs, c, 0.0, horizon, tol, tol * 1e-2, max_step, Some(up_event))?;

    // backward: w(t) = z(-t) solves w' = -sqrt(W(w)); integrate forward in t.
    let rhs_b = |z: f64| -rhs(z);
    let dn_event = EventSpec { g: &|z: f64| z - (a + rk_stop), direction: -1 };
    let mut bwd = solve_scalar(rhs_b, c, 0.0, horizon, tol, tol * 1e-2, max_step, Some(dn_event))?;

    if q < 1.0 {
        extend_by_travel_time(p, &mut fwd, b, 1.0);
        extend_by_travel_time(p, &mut bwd, a, -1.0);
    }

    // merge: reversed backward part (negated times), then forward part
    let mut t = Vec::with_capacity(fwd.t.len() + bwd.t.len() - 1);
    let mut z = Vec::with_capacity(t.capacity());
    for i in (1..bwd.t.len()).rev() {
        t.push(-bwd.t[i]);
        z.push(bwd.y[i]);
    }
    t.extend_from_slice(&fwd.t);
    z.extend_from_slice(&fwd.y);

    let dz: Vec<f64> = z.iter().map(|&zi| rhs(zi)).collect();
    let d2z: Vec<f64> = z
        .iter()
        .map(|&zi| if zi <= a || zi >= b { 0.0 } else { 0.5 * p.deriv(zi) })
        .collect();

    let (support, decay) = if q < 1.0 {
        // remaining travel time from the event point to the well under the
        // local model W = ell/(q(1+q)) |s - well|^{1+q}
        let k = (q * (1.0 + q) / ell).sqrt() * 2.0 / (1.0 - q);
        let t_b = match fwd.event {
            Some(_) => {
                let ze = *fwd.y.last().unwrap();
                fwd.t.last().unwrap() + k * (b - ze).powf((1.0 - q) / 2.0)
            }
            None => horizon,
        };
        let t_a = match bwd.event {
            Some(_) => {
                let ze = *bwd.y.last().unwrap();
                -(bwd.t.last().unwrap() + k * (ze - a).powf((1.0 - q) / 2.0))
            }
            None => -horizon,
        };
        (Some((t_a, t_b)), None)
    } else {
        // tightest bracketing constants of W/(b-s)^2 on [(a+b)/2, b]; the
        // endpoint value is the analytic limit ell/(q(1+q))
        let mut lo = ell / (q * (1.0 + q));
        let mut hi = lo;
        for i in 0..400 {
            let s = 0.5 * (a + b) + (b - 0.5 * (a + b)) * i as f64 / 400.0;
            let r = p.eval(s) / (b - s).powf(1.0 + q);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let d = DecayData {
            c1: lo.sqrt(),
            c2: hi.sqrt(),
            rate_a: (p.deriv2(a) / 2.0).sqrt(),
            rate_b: (p.deriv2(b) / 2.0).sqrt(),
        };
        (None, Some(d))
    };

    Ok(Profile {
        t,
        z,
        dz,
        d2z,
        wells,
        support,
        decay,
        potential_ref: p.name().to_string(),
        tol,
    })
}

/// Continue a profile leg from the Runge-Kutta stop down to the 1e-13 well
/// threshold by accumulating exact travel times `dt = dz / sqrt(W)`.
///
/// The substitution `u = gap^{(1-q)/2}` makes the integrand bounded, so each
/// increment is quadrature-accurate even though `sqrt(W)` degenerates.
fn extend_by_travel_time(p: &Potential, sol: &mut crate::ode::ScalarSolution, well: f64, side: f64) {
    if sol.event.is_none() {
        return;
    }
    let q = p.wells().q;
    let gamma = 2.0 / (1.0 - q);
    let mut t_cur = *sol.t.last().unwrap();
    let mut gap = (well - *sol.y.last().unwrap()) * side;
    let ratio = 10f64.sqrt();
    while gap > WELL_STOP * 1.0001 {
        let gap_next = (gap / ratio).max(WELL_STOP);
        let u1 = gap.powf((1.0 - q) / 2.0);
        let u2 = gap_next.powf((1.0 - q) / 2.0);
        let dt = quad::integrate(
            |u| {
                let z = well - side * u.powf(gamma);
                gamma * u.powf(gamma - 1.0) / p.eval(z).max(f64::MIN_POSITIVE).sqrt()
            },
            u2,
            u1,
            1e-15,
            1e-13,
        )
        .value;
        t_cur += dt;
        gap = gap_next;
        sol.t.push(t_cur);
        sol.y.push(well - side * gap);
    }
    sol.event = Some((t_cur, well - side * gap));
}

/// `c_W = int_a^b sqrt(W)`, by adaptive Gauss-Kronrod with panel seeds at the
/// wells where the integrand has algebraic behavior.
pub fn compute_cw(p: &Potential, tol: f64) -> quad::QuadResult {
    let wells = p.wells();
    let (a, b) = (wells.a, wells.b);
    if a == b {
        return quad::QuadResult { value: 0.0, abs_error: 0.0, panels: 0 };
    }
    let width = b - a;
    let mut splits = Vec::new();
    for k in 1..=8 {
        let d = width * 0.25_f64.powi(k);
        splits.push(a + d);
        splits.push(b - d);
    }
    quad::integrate_with_splits(|s| p.eval(s).max(0.0).sqrt(), a, b, &splits, tol, 0.0)
}

/// `c_sym = int_R W(z(t)) t dt` over the tabulated profile, with the
/// exponential tails past the tabulation added in closed form from the
/// linearized decay (they are negligible when the tabulation reached the
/// 1e-13 well threshold).
pub fn compute_csym(prof: &Profile, p: &Potential, tol: f64) -> quad::QuadResult {
    let (lo, hi) = prof.tab_range();
    // each side integrated independently so symmetric integrands cancel to
    // quadrature accuracy rather than through adaptive panel placement
    let left = quad::integrate(|t| p.eval(prof.z(t)) * t, lo, 0.0, tol / 4.0, 0.0);
    let right = quad::integrate(|t| p.eval(prof.z(t)) * t, 0.0, hi, tol / 4.0, 0.0);
    let mut value = left.value + right.value;
    let mut err = left.abs_error + right.abs_error;
    if let Some(d) = prof.decay {
        // int_{hi}^inf W(z) t dt with W(z) ~ (ell/2) omega^2 e^{-2 rate (t-hi)}
        let wells = prof.wells();
        let ob = wells.b - prof.z(hi);
        let tail_hi = 0.5 * wells.ell * ob * ob * (hi / (2.0 * d.rate_b) + 1.0 / (4.0 * d.rate_b * d.rate_b));
        let oa = prof.z(lo) - wells.a;
        let tail_lo = 0.5 * wells.ell * oa * oa * (lo / (2.0 * d.rate_a) - 1.0 / (4.0 * d.rate_a * d.rate_a));
        value += tail_hi + tail_lo;
        err += (tail_hi.abs() + tail_lo.abs()) * 1e-2;
    }
    quad::QuadResult { value, abs_error: err, panels: left.panels + right.panels }
}

/// `int_R (z(t - tau) - sgn_{a,b}(t)) dt` evaluated by quadrature over the
/// tabulation plus closed-form tails.
pub fn shift_integral(prof: &Profile, tau: f64) -> f64 {
    let wells = prof.wells();
    let (a, b) = (wells.a, wells.b);
    let (lo, hi) = prof.tab_range();
    // substitute u = t - tau: int_{-inf}^{-tau} (z(u) - a) du + int_{-tau}^{inf} (z(u) - b) du
    let split = (-tau).clamp(lo, hi);
    let low_part = quad::integrate(|u| prof.z(u) - a, lo, split, 1e-12, 0.0).value;
    let high_part = quad::integrate(|u| prof.z(u) - b, split, hi, 1e-12, 0.0).value;
    // correction when -tau falls outside the tabulated range: the integrands
    // swap over [-tau, lo] (resp. [hi, -tau]) and the difference is exactly
    // the constant a - b (resp. b - a)
    let mid_correction = if -tau < lo {
        (a - b) * (lo - (-tau))
    } else if -tau > hi {
        (b - a) * ((-tau) - hi)
    } else {
        0.0
    };
    let tails = match (prof.support, prof.decay) {
        (Some(_), _) => 0.0,
        (_, Some(d)) => {
            let oa = prof.z(lo) - a;
            let ob = b - prof.z(hi);
            oa / d.rate_a - ob / d.rate_b
        }
        _ => 0.0,
    };
    low_part + high_part + mid_correction + tails
}

/// Root-find `tau` in `eta_t0 * int (z(t - tau) - sgn_{a,b}) dt = rhs`,
/// bracketing over ten decay widths; the residual of the returned root is
/// checked against 1e-10.
pub fn solve_tau_with_multiplier(prof: &Profile, eta_t0: f64, rhs: f64) -> Result<f64> {
    assert!(eta_t0 > 0.0);
    let (lo, hi) = prof.tab_range();
    let width = match prof.support {
        Some((ta, tb)) => tb - ta,
        None => hi - lo,
    };
    let f = |tau: f64| eta_t0 * shift_integral(prof, tau) - rhs;
    let br = 10.0 * width;
    let tau = crate::rootfind::brent(f, -br, br, 1e-14).map_err(|_| Error::NoBracket {
        what: "solve_tau",
        lo: -br,
        hi: br,
    })?;
    let resid = f(tau).abs();
    if resid > 1e-10 {
        return Err(Error::NoConvergence { iterations: 0, residual: resid });
    }
    Ok(tau)
}

/// Solve for the transition-shift constant `tau`.
///
/// For `q = 1` solves
/// `eta_t0 * int (z(t - tau) - sgn_{a,b}) dt = lambda0 * total_eta / W''(a)`
/// with `lambda0 = 2 c_W (n-1) kappa * perimeter / ((b-a) eta_t0)`; for
/// `q < 1` solves `int (z(t - tau) - sgn_{a,b}) dt = 0`. In the n-dimensional
/// reading `eta_t0 = perimeter` and `total_eta = 1`.
pub fn solve_tau(
    prof: &Profile,
    p: &Potential,
    eta_t0: f64,
    perimeter: f64,
    kappa: f64,
    n: u32,
    total_eta: f64,
) -> Result<f64> {
    let wells = prof.wells();
    let rhs = if wells.q < 1.0 {
        0.0
    } else {
        let wpp_a = p.deriv2(wells.a);
        assert!(
            wpp_a.is_finite() && wpp_a > 0.0,
            "q = 1 requires finite positive W''(a)"
        );
        let cw = compute_cw(p, 1e-12).value;
        let lam0 = 2.0 * cw * (n as f64 - 1.0) * kappa * perimeter / ((wells.b - wells.a) * eta_t0);
        lam0 * total_eta / wpp_a
    };
    solve_tau_with_multiplier(prof, eta_t0, rhs)
}

/// Constants record for a profile/potential pair.
pub fn profile_constants(prof: &Profile, p: &Potential, tol: f64) -> ProfileConstants {
    let cw = compute_cw(p, tol);
    let cs = compute_csym(prof, p, tol);
    ProfileConstants {
        c_w: cw.value,
        c_sym: cs.value,
        quadrature_error: cw.abs_error.max(cs.abs_error),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn quartic_profile() -> Profile {
        solve_profile(&Potential::quartic(), 40.0, 1e-12).unwrap()
    }

    #[test]
    fn quartic_profile_matches_tanh() {
        let prof = quartic_profile();
        let s2 = 2.0_f64.sqrt();
        assert!((prof.z(0.0) - 0.0).abs() < 1e-15, "z(0) = c exactly");
        assert!((prof.z(s2) - 1.0_f64.tanh()).abs() < 1e-8);
        for t in [-5.0, -1.3, 0.4, 2.7, 8.0, 25.0] {
            assert!(
                (prof.z(t) - (t / s2).tanh()).abs() < 1e-8,
                "z({t}) = {} vs {}",
                prof.z(t),
                (t / s2).tanh()
            );
        }
    }

    #[test]
    fn profile_is_monotone_and_bounded() {
        for p in [Potential::quartic(), Potential::subquadratic(0.5).unwrap(), Potential::skewed(0.3).unwrap()] {
            let prof = solve_profile(&p, 40.0, 1e-11).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=10_000 {
                let t = -30.0 + 60.0 * i as f64 / 10_000.0;
                let z = prof.z(t);
                assert!(z >= prev - 1e-12, "monotonicity at t={t} for {}", p.name());
                assert!(z >= p.wells().a - 1e-12 && z <= p.wells().b + 1e-12);
                prev = z;
            }
        }
    }

    #[test]
    fn first_integral_residual_small() {
        // max |(z')^2 - W(z)| < 10 * tol over the tabulation
        let tol = 1e-11;
        for p in [Potential::quartic(), Potential::subquadratic(0.5).unwrap()] {
            let prof = solve_profile(&p, 40.0, tol).unwrap();
            let (lo, hi) = prof.tab_range();
            let mut worst = 0.0_f64;
            for i in 0..=4000 {
                let t = lo + (hi - lo) * i as f64 / 4000.0;
                let r = (prof.dz(t).powi(2) - p.eval(prof.z(t))).abs();
                worst = worst.max(r);
            }
            assert!(worst < 10.0 * tol, "{}: residual {worst}", p.name());
        }
    }

    #[test]
    fn pointwise_ode_residual_below_tol() {
        let tol = 1e-11;
        let p = Potential::quartic();
        let prof = solve_profile(&p, 40.0, tol).unwrap();
        let (lo, hi) = prof.tab_range();
        let mut worst = 0.0_f64;
        for i in 0..=4000 {
            let t = lo + (hi - lo) * i as f64 / 4000.0;
            worst = worst.max((prof.dz(t) - p.eval(prof.z(t)).max(0.0).sqrt()).abs());
        }
        assert!(worst < tol, "residual {worst}");
    }

    #[test]
    fn subquadratic_reaches_wells_in_finite_time() {
        let p = Potential::subquadratic(0.5).unwrap();
        let prof = solve_profile(&p, 40.0, 1e-12).unwrap();
        let (t_a, t_b) = prof.support.expect("finite support");
        assert!(t_a < 0.0 && t_b > 0.0);
        assert_eq!(prof.z(t_b + 0.1), 1.0);
        assert_eq!(prof.z(t_b + 5.0), 1.0);
        assert_eq!(prof.z(t_a - 0.1), -1.0);
        assert!(prof.z(t_b - 0.2) < 1.0);
        // oracle: t_b = sqrt(1.5) * int_0^1 (1-z^2)^{-3/4} dz; substituting
        // z = 1 - u^4 gives 1 - z^2 = u^4 (2 - u^4) and the smooth integrand
        // 4 (2 - u^4)^{-3/4}
        let integrand = |u: f64| 4.0 * (2.0 - u * u * u * u).powf(-0.75);
        let oracle = 1.5_f64.sqrt() * crate::quad::integrate(integrand, 0.0, 1.0, 1e-13, 0.0).value;
        assert!(
            (t_b - oracle).abs() < 1e-6,
            "t_b = {t_b} vs oracle {oracle}"
        );
    }

    #[test]
    fn decay_bracketing_for_quartic() {
        let prof = quartic_profile();
        let d = prof.decay.expect("decay data");
        // c1 = sqrt(min (1+s)^2/2) = sqrt(1/2), c2 = sqrt(2) on [0, 1]
        assert!((d.c1 - 0.5_f64.sqrt()).abs() < 1e-3);
        assert!((d.c2 - 2.0_f64.sqrt()).abs() < 1e-3);
        assert!((d.rate_b - 2.0_f64.sqrt()).abs() < 1e-12);
        let b = 1.0;
        let z1 = prof.z(1.0);
        for t in [1.5, 3.0, 6.0, 10.0] {
            let gap = b - prof.z(t);
            let lo = (b - z1) * (-d.c2 * (t - 1.0)).exp();
            let hi = (b - z1) * (-d.c1 * (t - 1.0)).exp();
            assert!(gap >= lo * (1.0 - 1e-9) && gap <= hi * (1.0 + 1e-9), "t = {t}");
        }
    }

    #[test]
    fn cw_quartic_closed_form() {
        let r = compute_cw(&Potential::quartic(), 1e-12);
        let exact = 2.0 * 2.0_f64.sqrt() / 3.0;
        assert!((r.value - exact).abs() < 1e-10, "cw = {} vs {}", r.value, exact);
    }

    #[test]
    fn cw_degenerate_interval_is_zero() {
        let p = Potential::from_fns(
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
            crate::potential::WellData { a: 0.3, b: 0.3, c: 0.3, q: 1.0, ell: 1.0 },
            "degenerate",
        );
        assert_eq!(compute_cw(&p, 1e-12).value, 0.0);
    }

    #[test]
    fn cw_subquadratic_vs_midpoint_oracle() {
        // brute force: 10^6-panel midpoint rule
        let p = Potential::subquadratic(0.5).unwrap();
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s = -1.0 + (i as f64 + 0.5) * h;
            acc += p.eval(s).sqrt();
        }
        acc *= h;
        let r = compute_cw(&p, 1e-12);
        assert!((r.value - acc).abs() < 1e-8, "{} vs oracle {}", r.value, acc);
    }

    #[test]
    fn csym_vanishes_for_symmetric_potentials() {
        for p in [Potential::quartic(), Potential::subquadratic(0.5).unwrap()] {
            let prof = solve_profile(&p, 40.0, 1e-12).unwrap();
            let r = compute_csym(&prof, &p, 1e-11);
            assert!(r.value.abs() < 1e-10, "{}: csym = {}", p.name(), r.value);
        }
    }

    #[test]
    fn csym_skewed_vs_tabulation_oracle() {
        let p = Potential::skewed(0.3).unwrap();
        let prof = solve_profile(&p, 40.0, 1e-12).unwrap();
        let r = compute_csym(&prof, &p, 1e-11);
        // midpoint rule over the tabulated profile
        let (lo, hi) = prof.tab_range();
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let t = lo + (i as f64 + 0.5) * h;
            acc += p.eval(prof.z(t)) * t;
        }
        acc *= h;
        assert!((r.value - acc).abs() < 1e-6, "{} vs oracle {}", r.value, acc);
        assert!(r.value.abs() > 0.05, "skewed csym should be visibly nonzero");
    }

    #[test]
    fn csym_identity_route_agrees() {
        // change of variables + integration by parts turns csym into
        // int_c^b (int_s^b sqrtW)/sqrtW - int_a^c (int_a^s sqrtW)/sqrtW
        let p = Potential::skewed(0.3).unwrap();
        let wells = p.wells();
        let sw = |s: f64| p.eval(s).max(0.0).sqrt();
        let upper = |s: f64| quad::integrate(sw, s, wells.b, 1e-12, 0.0).value / sw(s);
        let lower = |s: f64| quad::integrate(sw, wells.a, s, 1e-12, 0.0).value / sw(s);
        let t1 = quad::integrate(upper, wells.c, wells.b - 1e-9, 1e-10, 0.0).value;
        let t2 = quad::integrate(lower, wells.a + 1e-9, wells.c, 1e-10, 0.0).value;
        let prof = solve_profile(&p, 40.0, 1e-12).unwrap();
        let r = compute_csym(&prof, &p, 1e-11);
        assert!((r.value - (t1 - t2)).abs() < 1e-6, "{} vs identity {}", r.value, t1 - t2);
    }

    #[test]
    fn shift_integral_linearity_and_values() {
        let prof = quartic_profile();
        let s0 = shift_integral(&prof, 0.0);
        assert!(s0.abs() < 1e-10, "symmetric base integral {s0}");
        // linearity: S(tau) - S(0) = -tau (b - a), five deterministic taus
        for tau in [-1.7, -0.3, 0.41, 1.0, 2.9] {
            let s = shift_integral(&prof, tau);
            assert!((s - (s0 - tau * 2.0)).abs() < 1e-8, "tau = {tau}");
        }
        assert!((shift_integral(&prof, 1.0) + 2.0).abs() < 1e-8);
    }

    #[test]
    fn solve_tau_symmetric_cases() {
        // q < 1 symmetric: tau = 0
        let p = Potential::subquadratic(0.5).unwrap();
        let prof = solve_profile(&p, 40.0, 1e-12).unwrap();
        let tau = solve_tau(&prof, &p, 1.0, 1.0, 1.0, 2, 1.0).unwrap();
        assert!(tau.abs() < 1e-10, "tau = {tau}");

        // quartic, n = 2, kappa = 1, P = 1: tau = -sqrt(2)/12
        let pq = Potential::quartic();
        let profq = quartic_profile();
        let tau = solve_tau(&profq, &pq, 1.0, 1.0, 1.0, 2, 1.0).unwrap();
        let expected = -2.0_f64.sqrt() / 12.0;
        assert!((tau - expected).abs() < 1e-8, "tau = {tau} vs {expected}");
        // residual of the defining equation
        let lam = 2.0 * (2.0 * 2.0_f64.sqrt() / 3.0) / 2.0;
        let resid = shift_integral(&profq, tau) - lam / 4.0;
        assert!(resid.abs() < 1e-10);
    }

    #[test]
    fn cw_invariance_under_change_of_variables() {
        // int sqrt(W(z)) z' dt over the tabulation equals int_a^b sqrt(W)
        let p = Potential::quartic();
        let prof = quartic_profile();
        let (lo, hi) = prof.tab_range();
        let r = quad::integrate(
            |t| p.eval(prof.z(t)).max(0.0).sqrt() * prof.dz(t),
            lo,
            hi,
            1e-12,
            0.0,
        );
        let cw = compute_cw(&p, 1e-12);
        assert!((r.value - cw.value).abs() < 1e-8, "{} vs {}", r.value, cw.value);
    }
}
