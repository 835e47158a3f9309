//! Double-well potentials and hypothesis validation.
//!
//! A [`Potential`] packages the energy density `W`, its derivatives and the
//! well data `(a, b, c, q, ell)`:
//!
//! * `a < b` are the two zeros of `W`,
//! * `c` is the central zero of `W'`,
//! * `q` in `(0, 1]` is the well exponent: `W''(s)/|s-a|^(q-1) -> ell` as
//!   `s -> a`, and the same limit holds at `b`.
//!
//! `q = 1` means quadratic wells (`ell = W''(a)`); `q < 1` means subquadratic
//! wells with `W''` blowing up at the wells, in which case transition profiles
//! have finite support.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rootfind;

/// Distance to a well below which `deriv2` reports the singular marker for
/// subquadratic potentials.
pub const SINGULAR_WELL_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WellData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q: f64,
    pub ell: f64,
}

#[derive(Clone)]
enum Form {
    Quartic,
    Subquadratic {
        q: f64,
    },
    Skewed {
        p: f64,
    },
    Custom {
        w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        wp: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        wpp: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    Table {
        w: crate::interp::Pchip,
        wp: crate::interp::Pchip,
    },
}

/// Immutable double-well potential; cheap to clone, safe to share across threads.
#[derive(Clone)]
pub struct Potential {
    form: Form,
    wells: WellData,
    name: String,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("wells", &self.wells)
            .finish()
    }
}

impl Potential {
    /// `W(s) = (1 - s^2)^2 / 2`, the classical quartic with wells at -1, 1.
    pub fn quartic() -> Self {
        Potential {
            form: Form::Quartic,
            wells: WellData { a: -1.0, b: 1.0, c: 0.0, q: 1.0, ell: 4.0 },
            name: "quartic".into(),
        }
    }

    /// `W_q(s) = |1 - s^2|^(1+q) / (1+q)`, symmetric wells at -1, 1 with
    /// exponent `q`; `ell = q * 2^(1+q)`. At `q = 1` this is the quartic.
    pub fn subquadratic(q: f64) -> Result<Self> {
        if !(0.0 < q && q <= 1.0) {
            return Err(Error::InvalidPotential(format!("q = {q} outside (0, 1]")));
        }
        Ok(Potential {
            form: Form::Subquadratic { q },
            wells: WellData { a: -1.0, b: 1.0, c: 0.0, q, ell: q * 2.0_f64.powf(1.0 + q) },
            name: format!("subquadratic(q={q})"),
        })
    }

    /// `W(s) = (1 - s^2)^2 (1 + p sin(pi s)) / 2` for `|p| < 1`: asymmetric
    /// about the midpoint of the wells while keeping `W''(-1) = W''(1) = 4`.
    pub fn skewed(p: f64) -> Result<Self> {
        if p.abs() >= 1.0 {
            return Err(Error::InvalidPotential(format!("skew p = {p} outside (-1, 1)")));
        }
        let wp = move |s: f64| {
            let u = 1.0 - s * s;
            -2.0 * s * u * (1.0 + p * (std::f64::consts::PI * s).sin())
                + 0.5 * u * u * p * std::f64::consts::PI * (std::f64::consts::PI * s).cos()
        };
        let c = rootfind::bisect_secant(wp, -0.9, 0.9, 1e-12)?;
        Ok(Potential {
            form: Form::Skewed { p },
            wells: WellData { a: -1.0, b: 1.0, c, q: 1.0, ell: 4.0 },
            name: format!("skewed(p={p})"),
        })
    }

    /// Potential from closures plus claimed well data (validation decides
    /// whether the claim holds).
    pub fn from_fns(
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        wp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        wpp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        wells: WellData,
        name: &str,
    ) -> Self {
        Potential {
            form: Form::Custom { w: Arc::new(w), wp: Arc::new(wp), wpp: Arc::new(wpp) },
            wells,
            name: name.into(),
        }
    }

    /// Tabulated potential: samples `(s, W, W')` interpolated by monotone cubics,
    /// with well data supplied by the caller (`ell` estimated when NaN).
    pub fn from_table(s: Vec<f64>, w: Vec<f64>, wp: Vec<f64>, mut wells: WellData) -> Result<Self> {
        if s.len() < 4 || s.len() != w.len() || s.len() != wp.len() {
            return Err(Error::InvalidPotential("table needs >= 4 aligned samples".into()));
        }
        let w_interp = crate::interp::Pchip::new(s.clone(), w);
        let wp_interp = crate::interp::Pchip::new(s, wp);
        if wells.ell.is_nan() {
            // one-sided estimate of W''/|s-a|^{q-1} near the lower well
            let d = 1e-3;
            wells.ell = wp_interp.deriv(wells.a + d) * d.powf(1.0 - wells.q);
        }
        Ok(Potential {
            form: Form::Table { w: w_interp, wp: wp_interp },
            wells,
            name: "table".into(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn wells(&self) -> WellData {
        self.wells
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.form {
            Form::Quartic => {
                let u = 1.0 - s * s;
                0.5 * u * u
            }
            Form::Subquadratic { q } => (1.0 - s * s).abs().powf(1.0 + q) / (1.0 + q),
            Form::Skewed { p } => {
                let u = 1.0 - s * s;
                0.5 * u * u * (1.0 + p * (std::f64::consts::PI * s).sin())
            }
            Form::Custom { w, .. } => w(s),
            Form::Table { w, .. } => w.eval(s),
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match &self.form {
            Form::Quartic => -2.0 * s * (1.0 - s * s),
            Form::Subquadratic { q } => {
                let u = 1.0 - s * s;
                -2.0 * s * u.abs().powf(*q) * u.signum()
            }
            Form::Skewed { p } => {
                let pi = std::f64::consts::PI;
                let u = 1.0 - s * s;
                -2.0 * s * u * (1.0 + p * (pi * s).sin()) + 0.5 * u * u * p * pi * (pi * s).cos()
            }
            Form::Custom { wp, .. } => wp(s),
            Form::Table { wp, .. } => wp.eval(s),
        }
    }

    /// Second derivative of `W`. For `q < 1` the curvature diverges at the
    /// wells; within [`SINGULAR_WELL_RADIUS`] of a well this returns NaN as the
    /// singular marker and callers must fall back on `(q, ell)`.
    pub fn deriv2(&self, s: f64) -> f64 {
        if self.wells.q < 1.0
            && ((s - self.wells.a).abs() <= SINGULAR_WELL_RADIUS
                || (s - self.wells.b).abs() <= SINGULAR_WELL_RADIUS)
        {
            return f64::NAN;
        }
        match &self.form {
            Form::Quartic => -2.0 + 6.0 * s * s,
            Form::Subquadratic { q } => {
                let u = 1.0 - s * s;
                -2.0 * u.abs().powf(*q) * u.signum() + 4.0 * q * s * s * u.abs().powf(q - 1.0)
            }
            Form::Skewed { p } => {
                let pi = std::f64::consts::PI;
                let u = 1.0 - s * s;
                (-2.0 + 6.0 * s * s) * (1.0 + p * (pi * s).sin())
                    - 4.0 * s * u * p * pi * (pi * s).cos()
                    - 0.5 * u * u * p * pi * pi * (pi * s).sin()
            }
            Form::Custom { wpp, .. } => wpp(s),
            Form::Table { wp, .. } => wp.deriv(s),
        }
    }

    /// `W''` at the wells when finite (`q = 1`), i.e. `ell`.
    pub fn well_curvature(&self) -> Option<f64> {
        if self.wells.q == 1.0 {
            Some(self.wells.ell)
        } else {
            None
        }
    }
}

/// Confirm and return the well data: `c` re-derived by bracketed root-finding
/// of `W'` on `(a, b)` (bisection + secant polish to 1e-12).
pub fn well_data(p: &Potential) -> Result<WellData> {
    let mut wells = p.wells();
    let margin = 1e-6 * (wells.b - wells.a);
    let c = rootfind::bisect_secant(|s| p.deriv(s), wells.a + margin, wells.b - margin, 1e-12)?;
    if (c - wells.c).abs() > 1e-6 * (wells.b - wells.a) {
        return Err(Error::InvalidPotential(format!(
            "stored central zero {} disagrees with root-found {}",
            wells.c, c
        )));
    }
    wells.c = c;
    Ok(wells)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub measured: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub potential: String,
    pub checks: Vec<HypothesisCheck>,
    pub warnings: Vec<String>,
    /// Zeros of `W'` located by bracketed root-finding.
    pub wprime_zeros: Vec<f64>,
    /// One-sided estimates of `ell` at the two wells.
    pub ell_estimates: (f64, f64),
    /// `(L, S)` with `W(s) >= L |s|` observed for `|s| > S`.
    pub linear_growth: (f64, f64),
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Check the standing hypotheses on a sample grid.
///
/// Verifies, with measured quantities in the report:
/// * `W` finite on the grid (hard error otherwise),
/// * `W(a) = W(b) = 0` and `W > 0` elsewhere,
/// * `W'` has exactly 3 zeros `a < c < b` with `W''(c) < 0`,
/// * one-sided limits `W''(s) |s - well|^(1-q) -> ell` agree at both wells,
/// * `|W'|` bounded away from zero for large `|s|`,
/// * linear growth `W(s) >= L |s|` for large `|s|`.
pub fn validate_potential(p: &Potential, n_samples: usize, tol: f64) -> Result<ValidationReport> {
    assert!(n_samples >= 100, "n_samples must be >= 100");
    let wells = p.wells();
    let (a, b, q) = (wells.a, wells.b, wells.q);
    let width = b - a;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();

    // finiteness on a wide grid
    let lo = a - 1.5 * width;
    let hi = b + 1.5 * width;
    for i in 0..=n_samples {
        let s = lo + (hi - lo) * i as f64 / n_samples as f64;
        let v = p.eval(s);
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation { at: s });
        }
    }

    // precisely two zeros: W(a) = W(b) = 0, W > 0 elsewhere
    let mut zero_defect: f64 = p.eval(a).abs().max(p.eval(b).abs());
    let mut min_interior = f64::INFINITY;
    for i in 0..=n_samples {
        let s = lo + (hi - lo) * i as f64 / n_samples as f64;
        if (s - a).abs() > 0.02 * width && (s - b).abs() > 0.02 * width {
            min_interior = min_interior.min(p.eval(s));
        }
    }
    zero_defect = zero_defect.max(0.0);
    checks.push(HypothesisCheck {
        name: "has precisely two zeros at a < b".into(),
        passed: zero_defect <= tol && min_interior > tol,
        measured: format!("|W(wells)| <= {zero_defect:.3e}, min W away from wells = {min_interior:.3e}"),
    });

    // W' has exactly 3 zeros, W''(c) < 0
    let zeros = rootfind::scan_roots(|s| p.deriv(s), a - 0.25 * width, b + 0.25 * width,
                                     (4 * n_samples).max(2000), 1e-13);
    let three = zeros.len() == 3;
    let curvature_c = if three { p.deriv2(zeros[1]) } else { f64::NAN };
    checks.push(HypothesisCheck {
        name: "W' has exactly 3 zeros with W''(c) < 0".into(),
        passed: three
            && (zeros[0] - a).abs() < 1e-6 * width
            && (zeros[2] - b).abs() < 1e-6 * width
            && curvature_c < 0.0,
        measured: format!("zeros = {zeros:?}, W''(c) = {curvature_c:.6}"),
    });

    // one-sided ell estimates: W''(s) |s - well|^{1-q} as the well is approached
    let ell_at = |well: f64, side: f64| -> f64 {
        let mut est = f64::NAN;
        for k in 2..=6 {
            let d = 10f64.powi(-k) * width / 2.0;
            let s = well + side * d;
            let w2 = p.deriv2(s);
            if w2.is_finite() {
                est = w2 * d.powf(1.0 - q);
            }
        }
        est
    };
    let ell_a = ell_at(a, 1.0);
    let ell_b = ell_at(b, -1.0);
    let ell_ok = (ell_a - wells.ell).abs() <= 0.05 * wells.ell.abs()
        && (ell_b - wells.ell).abs() <= 0.05 * wells.ell.abs();
    checks.push(HypothesisCheck {
        name: "equal well limits of W''/|s-well|^(q-1)".into(),
        passed: ell_ok,
        measured: format!("ell_hat(a) = {ell_a:.6}, ell_hat(b) = {ell_b:.6}, stored = {:.6}", wells.ell),
    });

    // |W'| bounded away from zero for large |s|
    let mut min_wp: f64 = f64::INFINITY;
    for i in 0..=n_samples {
        let s = hi + 2.0 * width * i as f64 / n_samples as f64;
        min_wp = min_wp.min(p.deriv(s).abs());
        let s = lo - 2.0 * width * i as f64 / n_samples as f64;
        min_wp = min_wp.min(p.deriv(s).abs());
    }
    checks.push(HypothesisCheck {
        name: "|W'| bounded below at infinity".into(),
        passed: min_wp > tol,
        measured: format!("min |W'| on far samples = {min_wp:.3e}"),
    });

    // linear growth W(s) >= L|s| outside [lo, hi]
    let s_hat = hi.abs().max(lo.abs());
    let mut l_hat = f64::INFINITY;
    for i in 0..=n_samples {
        let s = s_hat + 3.0 * width * i as f64 / n_samples as f64;
        l_hat = l_hat.min(p.eval(s) / s.abs());
        l_hat = l_hat.min(p.eval(-s) / s.abs());
    }
    checks.push(HypothesisCheck {
        name: "linear growth W(s) >= L|s| for large |s|".into(),
        passed: l_hat > tol,
        measured: format!("L_hat = {l_hat:.3e} beyond |s| = {s_hat:.3}"),
    });

    if matches!(p.form, Form::Table { .. }) {
        warnings.push(
            "tabulated potential: interpolant is C^1 only; quantities needing W'' near the wells \
             use (q, ell) instead"
                .into(),
        );
    }

    Ok(ValidationReport {
        potential: p.name.clone(),
        checks,
        warnings,
        wprime_zeros: zeros,
        ell_estimates: (ell_a, ell_b),
        linear_growth: (l_hat, s_hat),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_validates_with_expected_data() {
        let p = Potential::quartic();
        let r = validate_potential(&p, 400, 1e-9).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
        assert!((r.wprime_zeros[0] + 1.0).abs() < 1e-10);
        assert!(r.wprime_zeros[1].abs() < 1e-10);
        assert!((r.wprime_zeros[2] - 1.0).abs() < 1e-10);
        // ell_hat ~ 4 from one-sided limits
        assert!((r.ell_estimates.0 - 4.0).abs() < 0.05);
        assert!((r.ell_estimates.1 - 4.0).abs() < 0.05);
    }

    #[test]
    fn quartic_pointwise_values() {
        let p = Potential::quartic();
        assert!((p.eval(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.deriv2(1.0), 4.0);
        assert_eq!(p.deriv2(-1.0), 4.0);
    }

    #[test]
    fn single_well_fails_two_zero_check() {
        let p = Potential::from_fns(
            |s| s * s,
            |s| 2.0 * s,
            |_| 2.0,
            WellData { a: -1.0, b: 1.0, c: 0.0, q: 1.0, ell: 2.0 },
            "single-well",
        );
        let r = validate_potential(&p, 200, 1e-9).unwrap();
        assert!(!r.passed());
        let zero_check = &r.checks[0];
        assert!(zero_check.name.contains("two zeros"));
        assert!(!zero_check.passed);
    }

    #[test]
    fn well_data_confirms_central_zero() {
        let p = Potential::skewed(0.3).unwrap();
        let wd = well_data(&p).unwrap();
        assert!(p.deriv(wd.c).abs() < 1e-10);
        assert!(wd.a < wd.c && wd.c < wd.b);
        // symmetric potential: c is the midpoint
        let ps = Potential::subquadratic(0.7).unwrap();
        let wds = well_data(&ps).unwrap();
        assert!((wds.c - 0.0).abs() < 1e-10);
    }

    #[test]
    fn subquadratic_reports_singular_curvature_at_wells() {
        let p = Potential::subquadratic(0.5).unwrap();
        assert!(p.deriv2(1.0).is_nan());
        assert!(p.deriv2(-1.0).is_nan());
        assert!(p.deriv2(0.5).is_finite());
        let r = validate_potential(&p, 400, 1e-9).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
    }

    #[test]
    fn skewed_validates() {
        let p = Potential::skewed(0.3).unwrap();
        let r = validate_potential(&p, 400, 1e-9).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
    }

    #[test]
    fn finite_difference_matches_deriv2_for_q1() {
        // relative 1e-4 agreement at the well for quadratic-well potentials
        for p in [Potential::quartic(), Potential::skewed(0.25).unwrap()] {
            let h = 1e-5;
            let a = p.wells().a;
            let fd = (p.deriv(a + h) - p.deriv(a - h)) / (2.0 * h);
            let an = p.deriv2(a);
            assert!((fd - an).abs() / an.abs() < 1e-4, "{} vs {}", fd, an);
        }
    }

    #[test]
    fn well_limit_ratio_approaches_analytic_value() {
        // W(s)/|s-b|^{1+q} -> ell/(q(1+q)), sampled monotonically
        for p in [Potential::quartic(), Potential::subquadratic(0.5).unwrap()] {
            let wells = p.wells();
            let target = wells.ell / (wells.q * (1.0 + wells.q));
            let mut prev_gap = f64::INFINITY;
            for k in 2..=6 {
                let s = wells.b - 10f64.powi(-k);
                let ratio = p.eval(s) / (wells.b - s).powf(1.0 + wells.q);
                let gap = (ratio - target).abs() / target;
                assert!(gap <= prev_gap + 1e-12, "non-monotone approach at k={k}");
                prev_gap = gap;
            }
            assert!(prev_gap < 0.05, "final gap {prev_gap}");
        }
    }

    #[test]
    fn nonnegative_on_dense_grid() {
        for p in [
            Potential::quartic(),
            Potential::subquadratic(0.3).unwrap(),
            Potential::subquadratic(0.7).unwrap(),
            Potential::skewed(0.3).unwrap(),
        ] {
            for i in 0..=2000 {
                let s = -3.0 + 6.0 * i as f64 / 2000.0;
                let w = p.eval(s);
                assert!(w >= 0.0, "{} at {}", p.name(), s);
                if w < 1e-9 {
                    let near_well =
                        (s - p.wells().a).abs() < 1e-3 || (s - p.wells().b).abs() < 1e-3;
                    assert!(near_well, "W ~ 0 away from wells at s = {s}");
                }
            }
        }
    }
}
