//! Isoperimetric profiles, the smoothed touching minorant `I*`, the volume
//! function `V' = I*(V)`, rearranged domains, and weight functions `eta`.
//!
//! The weight that drives the 1D reduction comes from one of three sources:
//! the rearranged-domain composition `I* o V`, analytic level-set areas of
//! canonical sets, or user-supplied tables.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interp::{hermite5, hermite5_deriv, locate, pchip_slopes, Pchip};
use crate::ode::{solve_scalar, EventSpec};
use crate::quad;

/// Measure of the unit ball in `R^k`.
pub fn unit_ball_measure(k: u32) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        k => unit_ball_measure(k - 2) * 2.0 * std::f64::consts::PI / k as f64,
    }
}

/// Exact or fitted power behavior `f(v) = c v^p` valid on `(0, v_max)`.
#[derive(Debug, Clone, Copy)]
pub struct TailModel {
    pub c: f64,
    pub p: f64,
    pub v_max: f64,
}

/// Anything usable as the right-hand side of the volume Cauchy problem:
/// symmetric about 1/2, positive on (0, 1), power-law near 0.
pub trait VolumeRate: Send + Sync {
    fn eval(&self, v: f64) -> f64;
    fn deriv(&self, v: f64) -> f64;
    fn tail_model(&self) -> TailModel;
    fn ambient_dimension(&self) -> u32;
}

// ---------------------------------------------------------------------------
// Isoperimetric profiles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum IsoSource {
    /// Unit square in the plane: `I(v) = min(sqrt(pi v), 1)` for `v <= 1/2`.
    Square,
    /// Symmetrized monotone-cubic table on `v <= 1/2`.
    Table(Pchip),
}

/// Isoperimetric profile of a domain of unit measure.
#[derive(Debug, Clone)]
pub struct IsoProfile {
    source: IsoSource,
    n: u32,
    kinks: Vec<f64>,
}

/// The unit square: flat cuts compete with corner quarter-disks, giving
/// `I(v) = min(sqrt(pi v), 1)` with a kink at `v = 1/pi`.
pub fn square_iso_profile() -> IsoProfile {
    IsoProfile {
        source: IsoSource::Square,
        n: 2,
        kinks: vec![1.0 / std::f64::consts::PI, 1.0 - 1.0 / std::f64::consts::PI],
    }
}

impl IsoProfile {
    /// Profile from a sampled table `(v, I(v))` on `(0, 1/2]`; symmetrized and
    /// interpolated by monotone cubics.
    pub fn from_table(mut v: Vec<f64>, mut i: Vec<f64>, n: u32) -> Result<Self> {
        if v.len() < 4 || v.len() != i.len() {
            return Err(Error::Config("iso profile table needs >= 4 aligned samples".into()));
        }
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        v = idx.iter().map(|&k| v[k]).collect();
        i = idx.iter().map(|&k| i[k]).collect();
        if v[0] <= 0.0 || *v.last().unwrap() > 0.5 + 1e-12 {
            return Err(Error::Config("iso profile samples must lie in (0, 1/2]".into()));
        }
        Ok(IsoProfile { source: IsoSource::Table(Pchip::new(v, i)), n, kinks: vec![] })
    }

    pub fn ambient_dimension(&self) -> u32 {
        self.n
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn is_kink(&self, v: f64) -> bool {
        self.kinks.iter().any(|k| (k - v).abs() < 1e-9)
    }

    pub fn eval(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        let vv = v.min(1.0 - v);
        match &self.source {
            IsoSource::Square => (std::f64::consts::PI * vv).sqrt().min(1.0),
            IsoSource::Table(p) => {
                let lo = p.knots()[0];
                if vv < lo {
                    // extend by the measured power toward 0
                    let tm = VolumeRate::tail_model(self);
                    tm.c * vv.powf(tm.p)
                } else {
                    p.eval(vv)
                }
            }
        }
    }

    /// Two-sided derivative; NaN at a kink.
    pub fn deriv(&self, v: f64) -> f64 {
        if self.is_kink(v) {
            return f64::NAN;
        }
        let (lo, hi) = self.one_sided_derivs(v);
        0.5 * (lo + hi)
    }

    /// Left and right derivatives (equal away from kinks).
    pub fn one_sided_derivs(&self, v: f64) -> (f64, f64) {
        let side = |x: f64| -> f64 {
            let folded = x.min(1.0 - x);
            let sign = if x <= 0.5 { 1.0 } else { -1.0 };
            sign * match &self.source {
                IsoSource::Square => {
                    if folded < 1.0 / std::f64::consts::PI {
                        0.5 * (std::f64::consts::PI / folded.max(1e-300)).sqrt()
                    } else {
                        0.0
                    }
                }
                IsoSource::Table(p) => p.deriv(folded),
            }
        };
        let h = 1e-9;
        (side(v - h), side(v + h))
    }
}

impl VolumeRate for IsoProfile {
    fn eval(&self, v: f64) -> f64 {
        IsoProfile::eval(self, v)
    }
    fn deriv(&self, v: f64) -> f64 {
        let (l, r) = self.one_sided_derivs(v);
        0.5 * (l + r)
    }
    fn tail_model(&self) -> TailModel {
        match &self.source {
            IsoSource::Square => TailModel {
                c: std::f64::consts::PI.sqrt(),
                p: 0.5,
                v_max: 1.0 / std::f64::consts::PI,
            },
            IsoSource::Table(t) => {
                let v0 = t.knots()[0];
                let v1 = t.knots()[1];
                let p = (t.values()[1] / t.values()[0]).ln() / (v1 / v0).ln();
                TailModel { c: t.values()[0] / v0.powf(p), p, v_max: v0 }
            }
        }
    }
    fn ambient_dimension(&self) -> u32 {
        self.n
    }
}

// ---------------------------------------------------------------------------
// Modified profile I*
// ---------------------------------------------------------------------------

/// Piecewise bridge: knots with values and slopes, rendered as quintic
/// Hermite spans with zero end curvatures.
#[derive(Debug, Clone)]
struct BridgePiece {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
}

impl BridgePiece {
    fn eval(&self, v: f64) -> f64 {
        let i = locate(&self.x, v);
        hermite5(
            self.x[i],
            self.x[i + 1],
            (self.y[i], self.y[i + 1]),
            (self.s[i], self.s[i + 1]),
            (0.0, 0.0),
            v,
        )
    }
    fn deriv(&self, v: f64) -> f64 {
        let i = locate(&self.x, v);
        hermite5_deriv(
            self.x[i],
            self.x[i + 1],
            (self.y[i], self.y[i + 1]),
            (self.s[i], self.s[i + 1]),
            (0.0, 0.0),
            v,
        )
    }
}

/// Smooth positive minorant of an isoperimetric profile touching it to first
/// order at the pinned volume, with an exact power tail near 0 and symmetric
/// about 1/2.
#[derive(Debug, Clone)]
pub struct ModifiedIsoProfile {
    base: IsoProfile,
    pub v_m: f64,
    pub beta: f64,
    /// Taylor-defect constant; the local formula subtracts `2 c0 |v - v_m|^{1+beta}`.
    pub c0: f64,
    /// Tail constant: `I*(v) = c0_tail v^{(n-1)/n}` on `(0, delta_tail)`.
    pub c0_tail: f64,
    pub delta_tail: f64,
    /// Half-width of the local formula region around the folded pin.
    pub r: f64,
    /// Folded pin `min(v_m, 1 - v_m)`.
    vm_fold: f64,
    i_vm: f64,
    ip_vm: f64,
    left: BridgePiece,
    right: Option<BridgePiece>,
}

impl ModifiedIsoProfile {
    fn local(&self, v: f64) -> f64 {
        self.i_vm + self.ip_vm * (v - self.vm_fold)
            - 2.0 * self.c0 * (v - self.vm_fold).abs().powf(1.0 + self.beta)
    }

    fn local_deriv(&self, v: f64) -> f64 {
        let d = v - self.vm_fold;
        self.ip_vm - 2.0 * self.c0 * (1.0 + self.beta) * d.abs().powf(self.beta) * d.signum()
    }

    pub fn eval(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        let folded = v.min(1.0 - v);
        if folded <= 0.0 {
            return 0.0;
        }
        if folded < self.delta_tail {
            let p = (self.base.n as f64 - 1.0) / self.base.n as f64;
            self.c0_tail * folded.powf(p)
        } else if folded < self.vm_fold - self.r {
            self.left.eval(folded)
        } else if folded <= (self.vm_fold + self.r).min(0.5) {
            self.local(folded)
        } else if let Some(rb) = &self.right {
            rb.eval(folded)
        } else {
            self.local(folded)
        }
    }

    pub fn deriv(&self, v: f64) -> f64 {
        let folded = v.min(1.0 - v);
        let sign = if v <= 0.5 { 1.0 } else { -1.0 };
        let d = if folded <= 0.0 {
            f64::INFINITY
        } else if folded < self.delta_tail {
            let p = (self.base.n as f64 - 1.0) / self.base.n as f64;
            p * self.c0_tail * folded.powf(p - 1.0)
        } else if folded < self.vm_fold - self.r {
            self.left.deriv(folded)
        } else if folded <= (self.vm_fold + self.r).min(0.5) {
            self.local_deriv(folded)
        } else if let Some(rb) = &self.right {
            rb.deriv(folded)
        } else {
            self.local_deriv(folded)
        };
        sign * d
    }

    pub fn base(&self) -> &IsoProfile {
        &self.base
    }
}

impl VolumeRate for ModifiedIsoProfile {
    fn eval(&self, v: f64) -> f64 {
        ModifiedIsoProfile::eval(self, v)
    }
    fn deriv(&self, v: f64) -> f64 {
        ModifiedIsoProfile::deriv(self, v)
    }
    fn tail_model(&self) -> TailModel {
        TailModel {
            c: self.c0_tail,
            p: (self.base.n as f64 - 1.0) / self.base.n as f64,
            v_max: self.delta_tail,
        }
    }
    fn ambient_dimension(&self) -> u32 {
        self.base.n
    }
}

/// Build a piecewise bridge through safe knots strictly below `I`, matching
/// the end values/slopes; interior slopes come from Fritsch-Carlson limiting
/// and every span is grid-checked.
#[allow(clippy::too_many_arguments)]
fn build_bridge(
    base: &IsoProfile,
    x0: f64,
    y0: f64,
    s0: f64,
    x1: f64,
    y1: f64,
    s1: f64,
    margin: f64,
    require_monotone: bool,
) -> Result<BridgePiece> {
    // knots with at most ~12% spacing growth
    let mut x = vec![x0];
    let mut t = x0;
    while t * 1.12 < x1 {
        t *= 1.12;
        x.push(t);
    }
    if x.len() > 1 && (x1 - *x.last().unwrap()) < 0.3 * (x[x.len() - 1] - x[x.len() - 2]) {
        x.pop();
    }
    x.push(x1);

    let m = x.len();
    let mut y = vec![0.0; m];
    y[0] = y0;
    y[m - 1] = y1;
    for i in 1..m - 1 {
        // hug (1 - margin) I, but keep between the endpoint levels so the
        // shape stays simple
        let cap = (1.0 - margin) * base.eval(x[i]);
        let lin = y0 + (y1 - y0) * (x[i] - x0) / (x1 - x0);
        y[i] = cap.min(lin.max(y0.min(y1)));
        if require_monotone {
            y[i] = y[i].max(y[i - 1]);
        }
    }
    let mut s = pchip_slopes(&x, &y);
    s[0] = s0;
    s[m - 1] = s1;

    let piece = BridgePiece { x, y, s };
    // grid verification: positive, below I, monotone if required
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=800 {
        let v = x0 + (x1 - x0) * k as f64 / 800.0;
        let bval = piece.eval(v);
        let iv = base.eval(v);
        if !bval.is_finite() || bval <= 0.0 {
            return Err(Error::ProfileConstruction(format!("bridge non-positive at v = {v}")));
        }
        if bval > iv + 1e-13 && k != 0 && k != 800 {
            return Err(Error::ProfileConstruction(format!(
                "bridge exceeds I at v = {v} ({bval} > {iv})"
            )));
        }
        if require_monotone && bval < prev - 1e-12 {
            return Err(Error::ProfileConstruction(format!("bridge not monotone at v = {v}")));
        }
        prev = bval;
    }
    Ok(piece)
}

/// Construct the modified profile `I*` pinned at `v_m`.
///
/// `c0` and `delta_tail` may be given explicitly; otherwise `c0` is twice the
/// smallest sampled Taylor constant (floored away from zero for locally flat
/// profiles) and `delta_tail` is chosen as a fraction of the gap below the
/// local region, retried smaller until the bridge assembly verifies
/// `0 < I* <= I` on a dense grid.
pub fn build_modified_profile(
    base: &IsoProfile,
    v_m: f64,
    beta: f64,
    c0: Option<f64>,
    delta_tail: Option<f64>,
) -> Result<ModifiedIsoProfile> {
    assert!(v_m > 0.0 && v_m < 1.0);
    assert!(beta > 0.0 && beta <= 1.0);
    if base.is_kink(v_m) {
        let (dl, dr) = base.one_sided_derivs(v_m);
        eprintln!(
            "KinkAtMass: I not differentiable at v_m = {v_m}; one-sided derivative interval \
             [{:.6}, {:.6}]",
            dr.min(dl),
            dr.max(dl)
        );
        return Err(Error::KinkAtMass { v_m });
    }
    let vm_fold = v_m.min(1.0 - v_m);
    let i_vm = base.eval(vm_fold);
    let ip_vm = {
        let (l, r) = base.one_sided_derivs(vm_fold);
        0.5 * (l + r)
    };

    // Taylor-defect constant on a sampled neighborhood, doubled and floored
    let c0_use = match c0 {
        Some(c) => c,
        None => {
            let h0 = (0.05_f64).min(0.5 * vm_fold).min(0.5 * (0.5 - vm_fold).max(0.02));
            let mut worst = 0.0_f64;
            for k in 1..=200 {
                let h = h0 * k as f64 / 200.0;
                for sgn in [-1.0, 1.0] {
                    let v = vm_fold + sgn * h;
                    if v > 0.0 && v < 1.0 {
                        let defect = (base.eval(v) - i_vm - ip_vm * sgn * h).abs();
                        worst = worst.max(defect / h.powf(1.0 + beta));
                    }
                }
            }
            (2.0 * worst).max(0.05 * i_vm)
        }
    };

    // largest local radius keeping the formula within [I(v_m)/4, I]
    let mut r = (0.8 * vm_fold).min(0.25);
    if vm_fold < 0.5 {
        r = r.min(0.9 * (0.5 - vm_fold));
    }
    let local = |v: f64| {
        i_vm + ip_vm * (v - vm_fold) - 2.0 * c0_use * (v - vm_fold).abs().powf(1.0 + beta)
    };
    loop {
        let mut ok = true;
        for k in 0..=200 {
            let v = vm_fold - r + 2.0 * r * k as f64 / 200.0;
            if v <= 0.0 || v >= 1.0 {
                ok = false;
                break;
            }
            let l = local(v);
            if l > base.eval(v) + 1e-13 || l < i_vm / 4.0 {
                ok = false;
                break;
            }
        }
        if ok {
            break;
        }
        r *= 0.8;
        if r < 1e-5 {
            return Err(Error::ProfileConstruction(
                "no admissible local radius around v_m".into(),
            ));
        }
    }

    let p = (base.n as f64 - 1.0) / base.n as f64;
    let local_deriv_at = |v: f64| {
        let d = v - vm_fold;
        ip_vm - 2.0 * c0_use * (1.0 + beta) * d.abs().powf(beta) * d.signum()
    };

    // tail + left bridge, retrying smaller tails on failure
    let delta_candidates: Vec<f64> = match delta_tail {
        Some(d) => vec![d],
        None => vec![0.5, 0.35, 0.2, 0.1]
            .into_iter()
            .map(|f| f * (vm_fold - r))
            .collect(),
    };
    let mut built = None;
    let mut last_err = String::new();
    'outer: for delta in delta_candidates {
        if delta <= 0.0 || delta >= vm_fold - r {
            continue;
        }
        for margin in [0.05, 0.12, 0.25] {
            // tail constant: stay below I with a safety factor
            let mut ratio_min = f64::INFINITY;
            for k in 1..=400 {
                let v = delta * k as f64 / 400.0;
                ratio_min = ratio_min.min(base.eval(v) / v.powf(p));
            }
            let c0_tail = (1.0 - margin) * ratio_min;
            let y_d = c0_tail * delta.powf(p);
            let s_d = p * c0_tail * delta.powf(p - 1.0);
            match build_bridge(
                base,
                delta,
                y_d,
                s_d,
                vm_fold - r,
                local(vm_fold - r),
                local_deriv_at(vm_fold - r),
                margin,
                true,
            ) {
                Ok(left) => {
                    built = Some((delta, c0_tail, left));
                    break 'outer;
                }
                Err(e) => last_err = e.to_string(),
            }
        }
    }
    let (delta, c0_tail, left) =
        built.ok_or(Error::ProfileConstruction(format!("left bridge failed: {last_err}")))?;

    // right bridge from the local region to the symmetry midpoint
    let right = if vm_fold + r < 0.5 - 1e-12 {
        let x0 = vm_fold + r;
        let mut min_i = f64::INFINITY;
        for k in 0..=400 {
            let v = x0 + (0.5 - x0) * k as f64 / 400.0;
            min_i = min_i.min(base.eval(v));
        }
        let mut piece = None;
        let mut perr = String::new();
        for margin in [0.02, 0.05, 0.12, 0.25] {
            let y_half = ((1.0 - margin) * min_i).max(i_vm / 4.0).min(local(x0));
            match build_bridge(
                base,
                x0,
                local(x0),
                local_deriv_at(x0),
                0.5,
                y_half,
                0.0,
                margin,
                false,
            ) {
                Ok(b) => {
                    piece = Some(b);
                    break;
                }
                Err(e) => perr = e.to_string(),
            }
        }
        Some(piece.ok_or(Error::ProfileConstruction(format!("right bridge failed: {perr}")))?)
    } else {
        None
    };

    Ok(ModifiedIsoProfile {
        base: base.clone(),
        v_m,
        beta,
        c0: c0_use,
        c0_tail,
        delta_tail: delta,
        r,
        vm_fold,
        i_vm,
        ip_vm,
        left,
        right,
    })
}

// ---------------------------------------------------------------------------
// Volume function and rearranged domain
// ---------------------------------------------------------------------------

/// Solution of `V' = I*(V)`, `V(0) = 1/2`, with the exact separable solution
/// substituted inside the power-tail region.
#[derive(Debug, Clone)]
pub struct RearrangedDomain {
    t: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
    d2v: Vec<f64>,
    /// Half-width: `V(-T) = 0`, `V(T) = 1`.
    pub half_width: f64,
    /// |t| above which the closed-form tail solution is used.
    t_tail: f64,
    tail: TailModel,
    pub n: u32,
    pub alpha_nm1: f64,
}

impl RearrangedDomain {
    pub fn volume(&self, t: f64) -> f64 {
        let tt = self.half_width;
        if t <= -tt {
            return 0.0;
        }
        if t >= tt {
            return 1.0;
        }
        if t < -self.t_tail {
            // V' = c V^p separates to V = [c (1-p) (t + T)]^{1/(1-p)}
            let base = self.tail.c * (1.0 - self.tail.p) * (t + tt);
            return base.max(0.0).powf(1.0 / (1.0 - self.tail.p));
        }
        if t > self.t_tail {
            let base = self.tail.c * (1.0 - self.tail.p) * (tt - t);
            return 1.0 - base.max(0.0).powf(1.0 / (1.0 - self.tail.p));
        }
        let i = locate(&self.t, t);
        hermite5(
            self.t[i],
            self.t[i + 1],
            (self.v[i], self.v[i + 1]),
            (self.dv[i], self.dv[i + 1]),
            (self.d2v[i], self.d2v[i + 1]),
            t,
        )
    }

    /// Time at which the volume reaches `v`.
    pub fn time_of_volume(&self, v: f64) -> f64 {
        assert!((0.0..=1.0).contains(&v));
        let tt = self.half_width;
        crate::rootfind::brent(|t| self.volume(t) - v, -tt, tt, 1e-14).unwrap_or(0.0)
    }

    /// Slice radius of the rearranged solid of revolution.
    pub fn radius(&self, t: f64, istar: &dyn VolumeRate) -> f64 {
        (istar.eval(self.volume(t)) / self.alpha_nm1).powf(1.0 / (self.n as f64 - 1.0))
    }

    pub fn to_csv(&self, istar: &dyn VolumeRate) -> String {
        let mut out = String::from("t,V,r,eta\n");
        let mut row = |t: f64| {
            let v = self.volume(t);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t,
                v,
                self.radius(t, istar),
                istar.eval(v)
            ));
        };
        // sampled closed-form lower tail, tabulated middle, mirrored upper tail
        let tails = 40;
        for k in 0..tails {
            row(-self.half_width + (self.t[0] + self.half_width) * k as f64 / tails as f64);
        }
        for i in 0..self.t.len() {
            row(self.t[i]);
        }
        let hi = *self.t.last().unwrap();
        for k in 1..=tails {
            row(hi + (self.half_width - hi) * k as f64 / tails as f64);
        }
        out
    }
}

/// Integrate the volume Cauchy problem.
///
/// The Runge-Kutta legs stop where `V` enters the power-tail region of the
/// profile; the remaining travel time to `V = 0` (resp. 1) is the closed-form
/// separable solution, so `T` carries quadrature-level accuracy. A
/// `NonIntegrableTail` error signals a measured tail exponent `>= 1`.
pub fn solve_volume_function(istar: &dyn VolumeRate, tol: f64) -> Result<RearrangedDomain> {
    let tail = istar.tail_model();
    if tail.p >= 1.0 {
        return Err(Error::NonIntegrableTail { exponent: tail.p });
    }
    let v_stop = (0.9 * tail.v_max).min(0.45);

    let up = EventSpec { g: &|v: f64| v - (1.0 - v_stop), direction: 1 };
    let fwd = solve_scalar(
        |v| istar.eval(v.clamp(0.0, 1.0)),
        0.5,
        0.0,
        1e6,
        tol,
        tol * 1e-2,
        0.01,
        Some(up),
    )?;
    let dn = EventSpec { g: &|v: f64| v - v_stop, direction: -1 };
    let bwd = solve_scalar(
        |v| -istar.eval(v.clamp(0.0, 1.0)),
        0.5,
        0.0,
        1e6,
        tol,
        tol * 1e-2,
        0.01,
        Some(dn),
    )?;

    let (te_f, ve_f) = fwd
        .event
        .ok_or(Error::ProfileConstruction("volume ODE never reached the upper tail".into()))?;
    let (te_b, ve_b) = bwd
        .event
        .ok_or(Error::ProfileConstruction("volume ODE never reached the lower tail".into()))?;

    // closed-form time through the pure power region, plus quadrature for any
    // stretch between the stop value and the exact-power region
    let remaining = |v_from: f64| -> f64 {
        let inside = v_from.min(tail.v_max);
        let mut t = inside.powf(1.0 - tail.p) / ((1.0 - tail.p) * tail.c);
        if v_from > inside {
            t += quad::integrate(|v| 1.0 / istar.eval(v), inside, v_from, 1e-13, 1e-12).value;
        }
        t
    };
    let t_minus = te_b + remaining(ve_b);
    let t_plus = te_f + remaining(1.0 - ve_f);
    if (t_plus - t_minus).abs() > 1e-7 * t_plus.abs().max(1.0) {
        return Err(Error::ProfileConstruction(format!(
            "volume function asymmetric: T- = {t_minus}, T+ = {t_plus}"
        )));
    }
    let half_width = 0.5 * (t_plus + t_minus);

    // merge tabulation (backward leg mirrored)
    let mut t = Vec::with_capacity(fwd.t.len() + bwd.t.len() - 1);
    let mut v = Vec::with_capacity(fwd.t.len() + bwd.t.len() - 1);
    for i in (1..bwd.t.len()).rev() {
        t.push(-bwd.t[i]);
        v.push(bwd.y[i]);
    }
    t.extend_from_slice(&fwd.t);
    v.extend_from_slice(&fwd.y);
    let dv: Vec<f64> = v.iter().map(|&vi| istar.eval(vi)).collect();
    let d2v: Vec<f64> = v.iter().map(|&vi| istar.deriv(vi) * istar.eval(vi)).collect();

    let t_tail = te_b.min(te_f);
    let n = istar.ambient_dimension();
    Ok(RearrangedDomain {
        t,
        v,
        dv,
        d2v,
        half_width,
        t_tail,
        tail,
        n,
        alpha_nm1: unit_ball_measure(n - 1),
    })
}

/// `(volume, relative perimeter)` of the slice `{y_n < t}` of the rearranged
/// domain.
pub fn perimeter_volume_pair(
    dom: &RearrangedDomain,
    istar: &dyn VolumeRate,
    t: f64,
) -> (f64, f64) {
    let v = dom.volume(t);
    (v, istar.eval(v))
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

/// Canonical sets with analytic level-set areas `eta(t) = H^{n-1}({d_E = t})`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum CanonicalSet {
    /// `{x_1 < s}` in the unit square.
    VerticalStrip { s: f64 },
    /// Quarter disk of radius `r` at a corner of the unit square.
    QuarterDisk { r: f64 },
    /// Disk of radius `r < 1/2` centered in the unit square.
    CenteredDisk { r: f64 },
    /// Ball of radius `r < 1` centered in the unit ball of `R^n`.
    CenteredBall { r: f64, n: u32 },
}

impl CanonicalSet {
    pub fn dimension(&self) -> u32 {
        match self {
            CanonicalSet::CenteredBall { n, .. } => *n,
            _ => 2,
        }
    }

    /// Relative perimeter `P(E; Omega)`.
    pub fn perimeter(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            CanonicalSet::VerticalStrip { .. } => 1.0,
            CanonicalSet::QuarterDisk { r } => PI * r / 2.0,
            CanonicalSet::CenteredDisk { r } => 2.0 * PI * r,
            CanonicalSet::CenteredBall { r, n } => {
                *n as f64 * unit_ball_measure(*n) * r.powi(*n as i32 - 1)
            }
        }
    }

    /// Mean curvature of the interface (outward convention; 0 for flat cuts).
    pub fn curvature(&self) -> f64 {
        match self {
            CanonicalSet::VerticalStrip { .. } => 0.0,
            CanonicalSet::QuarterDisk { r }
            | CanonicalSet::CenteredDisk { r }
            | CanonicalSet::CenteredBall { r, .. } => 1.0 / r,
        }
    }
}

#[derive(Debug, Clone)]
enum WeightSource {
    Rearranged { dom: Arc<RearrangedDomain>, istar: Arc<ModifiedIsoProfile> },
    LevelSet(CanonicalSet),
    Uniform { value: f64 },
    Affine { a0: f64, a1: f64 },
    Table(Pchip),
}

/// Measured endpoint behavior of a weight: exponents `n1`, `n2`, the
/// bracketing constants `d1..d4`, the logarithmic-derivative bound `d5` and
/// the window `t*` the brackets were measured on.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct WeightTails {
    pub n1: u32,
    pub n2: u32,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub t_star: f64,
}

/// Positive weight on an interval, with derivative, total mass and quadrature
/// split hints.
#[derive(Debug, Clone)]
pub struct Weight {
    source: WeightSource,
    pub t_lo: f64,
    pub t_hi: f64,
    total: f64,
    splits: Vec<f64>,
    pub tails: WeightTails,
}

impl Weight {
    pub fn eval(&self, t: f64) -> f64 {
        use std::f64::consts::PI;
        if t < self.t_lo || t > self.t_hi {
            return 0.0;
        }
        match &self.source {
            WeightSource::Rearranged { dom, istar } => istar.eval(dom.volume(t)),
            WeightSource::Uniform { value } => *value,
            WeightSource::Affine { a0, a1 } => a0 + a1 * t,
            WeightSource::Table(p) => p.eval(t),
            WeightSource::LevelSet(set) => match set {
                CanonicalSet::VerticalStrip { .. } => 1.0,
                CanonicalSet::QuarterDisk { r } => {
                    let rr = r + t;
                    if rr <= 0.0 {
                        0.0
                    } else if rr <= 1.0 {
                        PI * rr / 2.0
                    } else {
                        (rr * (PI / 2.0 - 2.0 * (1.0 / rr).acos())).max(0.0)
                    }
                }
                CanonicalSet::CenteredDisk { r } => {
                    let rr = r + t;
                    if rr <= 0.0 {
                        0.0
                    } else if rr <= 0.5 {
                        2.0 * PI * rr
                    } else {
                        (rr * (2.0 * PI - 8.0 * (0.5 / rr).acos())).max(0.0)
                    }
                }
                CanonicalSet::CenteredBall { r, n } => {
                    let rr = r + t;
                    if rr <= 0.0 {
                        0.0
                    } else {
                        *n as f64 * unit_ball_measure(*n) * rr.powi(*n as i32 - 1)
                    }
                }
            },
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        use std::f64::consts::PI;
        match &self.source {
            WeightSource::Rearranged { dom, istar } => {
                let v = dom.volume(t);
                istar.deriv(v) * istar.eval(v)
            }
            WeightSource::Uniform { .. } => 0.0,
            WeightSource::Affine { a1, .. } => *a1,
            WeightSource::Table(p) => p.deriv(t),
            WeightSource::LevelSet(set) => match set {
                CanonicalSet::VerticalStrip { .. } => 0.0,
                CanonicalSet::QuarterDisk { r } => {
                    let rr = r + t;
                    if rr <= 1.0 {
                        PI / 2.0
                    } else {
                        PI / 2.0 - 2.0 * (1.0 / rr).acos() - 2.0 / (rr * rr - 1.0).sqrt()
                    }
                }
                CanonicalSet::CenteredDisk { r } => {
                    let rr = r + t;
                    if rr <= 0.5 {
                        2.0 * PI
                    } else {
                        2.0 * PI - 8.0 * (0.5 / rr).acos() - 8.0 / (4.0 * rr * rr - 1.0).sqrt()
                    }
                }
                CanonicalSet::CenteredBall { r, n } => {
                    let rr = r + t;
                    *n as f64 * (*n as f64 - 1.0) * unit_ball_measure(*n) * rr.powi(*n as i32 - 2)
                }
            },
        }
    }

    /// Total mass `int eta dt`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Interior kink locations to seed quadratures with.
    pub fn splits(&self) -> &[f64] {
        &self.splits
    }

    /// Integrate `f(t) eta(t)` over `[lo, hi]` with the weight's split hints.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, tol: f64) -> f64 {
        let lo = lo.max(self.t_lo);
        let hi = hi.min(self.t_hi);
        quad::integrate_with_splits(|t| f(t) * self.eval(t), lo, hi, &self.splits, tol, 0.0).value
    }

    /// Uniform weight on `(t_lo, t_hi)`.
    pub fn uniform(value: f64, t_lo: f64, t_hi: f64) -> Self {
        let mut w = Weight {
            source: WeightSource::Uniform { value },
            t_lo,
            t_hi,
            total: value * (t_hi - t_lo),
            splits: vec![],
            tails: WeightTails {
                n1: 1,
                n2: 1,
                d1: value,
                d2: value,
                d3: value,
                d4: value,
                d5: 0.0,
                t_star: 0.25 * (t_hi - t_lo),
            },
        };
        w.tails = measure_tails(&w);
        w
    }

    /// Affine weight `a0 + a1 t` on `(t_lo, t_hi)`; must stay nonnegative.
    pub fn affine(a0: f64, a1: f64, t_lo: f64, t_hi: f64) -> Result<Self> {
        let at = |t: f64| a0 + a1 * t;
        if at(t_lo) < 0.0 || at(t_hi) < 0.0 {
            return Err(Error::HypothesisViolation(
                "affine weight negative on the interval".into(),
            ));
        }
        let total = 0.5 * (at(t_lo) + at(t_hi)) * (t_hi - t_lo);
        let mut w = Weight {
            source: WeightSource::Affine { a0, a1 },
            t_lo,
            t_hi,
            total,
            splits: vec![],
            tails: WeightTails {
                n1: 1,
                n2: 1,
                d1: 1.0,
                d2: 1.0,
                d3: 1.0,
                d4: 1.0,
                d5: 0.0,
                t_star: 0.25 * (t_hi - t_lo),
            },
        };
        w.tails = measure_tails(&w);
        Ok(w)
    }

    /// Weight from a sampled table, monotone-cubic interpolated.
    pub fn from_table(t: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if t.len() < 4 || t.len() != eta.len() {
            return Err(Error::Config("weight table needs >= 4 aligned samples".into()));
        }
        if eta.iter().any(|&e| e < 0.0) {
            return Err(Error::HypothesisViolation("weight table has negative entries".into()));
        }
        let t_lo = t[0];
        let t_hi = *t.last().unwrap();
        let p = Pchip::new(t, eta);
        let total = quad::integrate(|x| p.eval(x), t_lo, t_hi, 1e-12, 1e-12).value;
        let mut w = Weight {
            source: WeightSource::Table(p),
            t_lo,
            t_hi,
            total,
            splits: vec![],
            tails: WeightTails {
                n1: 1,
                n2: 1,
                d1: 1.0,
                d2: 1.0,
                d3: 1.0,
                d4: 1.0,
                d5: 0.0,
                t_star: 0.0,
            },
        };
        w.tails = measure_tails(&w);
        Ok(w)
    }
}

/// Estimate the endpoint exponents and bracketing constants of a weight.
fn measure_tails(w: &Weight) -> WeightTails {
    let len = w.t_hi - w.t_lo;
    let t_star = 0.1 * len;
    let exp_at = |from_lo: bool| -> u32 {
        let base = if from_lo { w.t_lo } else { w.t_hi };
        let sgn = if from_lo { 1.0 } else { -1.0 };
        let w1 = w.eval(base + sgn * 1e-4 * len);
        let w2 = w.eval(base + sgn * 2e-4 * len);
        if w1 <= 0.0 || w2 <= 0.0 {
            return 1;
        }
        let p = (w2 / w1).ln() / 2.0_f64.ln();
        (p.round().max(0.0) as u32) + 1
    };
    let n1 = exp_at(true);
    let n2 = exp_at(false);
    let bracket = |from_lo: bool, n: u32| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for k in 1..=64 {
            let d = t_star * k as f64 / 64.0;
            let t = if from_lo { w.t_lo + d } else { w.t_hi - d };
            let r = w.eval(t) / d.powi(n as i32 - 1);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    };
    let (d1, d2) = bracket(true, n1);
    let (d3, d4) = bracket(false, n2);
    let mut d5 = 0.0_f64;
    for k in 1..200 {
        let t = w.t_lo + len * k as f64 / 200.0;
        let e = w.eval(t);
        if e > 0.0 {
            d5 = d5.max(w.deriv(t).abs() * (w.t_hi - t).min(t - w.t_lo) / e);
        }
    }
    WeightTails { n1, n2, d1, d2, d3, d4, d5, t_star }
}

/// Weight `eta = I*(V)` from a rearranged domain.
///
/// Verifies the measured tails carry the expected exponent `n` at both ends
/// (a `HypothesisViolation` otherwise) and that the total mass is 1.
pub fn rearranged_weight(
    dom: Arc<RearrangedDomain>,
    istar: Arc<ModifiedIsoProfile>,
) -> Result<Weight> {
    let tt = dom.half_width;
    let n = dom.n;
    let mut w = Weight {
        source: WeightSource::Rearranged { dom, istar },
        t_lo: -tt,
        t_hi: tt,
        total: 1.0,
        splits: vec![],
        tails: WeightTails {
            n1: n,
            n2: n,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
            d4: 0.0,
            d5: 0.0,
            t_star: 0.0,
        },
    };
    // int eta dt = int V' dt = V(T) - V(-T) = 1 exactly; verified by quadrature
    let check = quad::integrate(|t| w.eval(t), -tt, tt, 1e-9, 0.0).value;
    if (check - 1.0).abs() > 1e-6 {
        return Err(Error::HypothesisViolation(format!("int eta dt = {check}, expected 1")));
    }
    w.total = 1.0;
    w.tails = measure_tails(&w);
    if w.tails.n1 != n || w.tails.n2 != n {
        return Err(Error::HypothesisViolation(format!(
            "measured tail exponents ({}, {}) differ from the ambient dimension {n}",
            w.tails.n1, w.tails.n2
        )));
    }
    if w.tails.d1 <= 0.0 || w.tails.d3 <= 0.0 {
        return Err(Error::HypothesisViolation("degenerate tail bracketing constants".into()));
    }
    Ok(w)
}

/// Analytic level-set weight `eta(t) = H^{n-1}({d_E = t})` of a canonical set.
pub fn levelset_weight(set: CanonicalSet) -> Result<Weight> {
    let (t_lo, t_hi, total, splits) = match set {
        CanonicalSet::VerticalStrip { s } => {
            if !(0.0 < s && s < 1.0) {
                return Err(Error::UnsupportedSet);
            }
            (-s, 1.0 - s, 1.0, vec![])
        }
        CanonicalSet::QuarterDisk { r } => {
            if !(0.0 < r && r <= 1.0) {
                return Err(Error::UnsupportedSet);
            }
            (-r, 2.0_f64.sqrt() - r, 1.0, vec![1.0 - r])
        }
        CanonicalSet::CenteredDisk { r } => {
            if !(0.0 < r && r < 0.5) {
                return Err(Error::UnsupportedSet);
            }
            (-r, 0.5 * 2.0_f64.sqrt() - r, 1.0, vec![0.5 - r])
        }
        CanonicalSet::CenteredBall { r, n } => {
            if !(0.0 < r && r < 1.0) || !(2..=7).contains(&n) {
                return Err(Error::UnsupportedSet);
            }
            (-r, 1.0 - r, unit_ball_measure(n), vec![])
        }
    };
    let mut w = Weight {
        source: WeightSource::LevelSet(set),
        t_lo,
        t_hi,
        total,
        splits,
        tails: WeightTails {
            n1: 1,
            n2: 1,
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            d4: 1.0,
            d5: 0.0,
            t_star: 0.0,
        },
    };
    w.tails = measure_tails(&w);
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_profile_golden_values() {
        let iso = square_iso_profile();
        // bisecting straight cut
        assert_eq!(iso.eval(0.5), 1.0);
        // kink where the quarter-disk arc sqrt(pi v) meets the straight cut
        assert!(iso.is_kink(1.0 / PI));
        let (dl, dr) = iso.one_sided_derivs(1.0 / PI);
        assert!(dl > 1.0 && dr.abs() < 1e-9, "one-sided derivs {dl}, {dr}");
        // complement symmetry
        assert!((iso.eval(0.1) - iso.eval(0.9)).abs() < 1e-15);
        // oracle: corner quarter-disk of volume v has perimeter sqrt(pi v);
        // straight cuts cost 1; I is their lower envelope
        for k in 1..50 {
            let v = 0.5 * k as f64 / 50.0;
            let disk = (PI * v).sqrt();
            assert!((iso.eval(v) - disk.min(1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn modified_profile_touches_and_stays_below() {
        let iso = square_iso_profile();
        let istar = build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap();
        // pinning
        assert!((istar.eval(0.4) - 1.0).abs() < 1e-14);
        assert!(istar.deriv(0.4).abs() < 1e-12);
        // positivity, minorant property, symmetry on a dense grid
        for k in 1..2000 {
            let v = k as f64 / 2000.0;
            let s = istar.eval(v);
            assert!(s > 0.0, "I* <= 0 at {v}");
            assert!(s <= iso.eval(v) + 1e-12, "I* above I at {v}: {s} vs {}", iso.eval(v));
            assert!((s - istar.eval(1.0 - v)).abs() < 1e-12, "symmetry at {v}");
        }
        // touching only near v_m and 1 - v_m
        for k in 1..2000 {
            let v = k as f64 / 2000.0;
            if (v - 0.4).abs() > 1e-4 && (v - 0.6).abs() > 1e-4 {
                assert!(iso.eval(v) - istar.eval(v) > 1e-10, "unexpected touching at {v}");
            }
        }
        // exact power tail
        let d = istar.delta_tail;
        let got = istar.eval(d / 2.0);
        let expect = istar.c0_tail * (d / 2.0_f64).sqrt();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn modified_profile_flat_branch_values() {
        // square pinned on the flat branch: I*(0.4) = 1, (I*)'(0.4) = 0
        let iso = square_iso_profile();
        let istar = build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap();
        assert!((istar.eval(0.4) - iso.eval(0.4)).abs() < 1e-14);
        assert!((istar.deriv(0.4) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn modified_profile_is_c1_across_joints() {
        let iso = square_iso_profile();
        let istar = build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap();
        let joints = [
            istar.delta_tail,
            0.4 - istar.r,
            0.4 + istar.r,
            0.5,
            0.6 - istar.r,
            1.0 - istar.delta_tail,
        ];
        for j in joints {
            let h = 1e-7;
            let dl = (istar.eval(j) - istar.eval(j - h)) / h;
            let dr = (istar.eval(j + h) - istar.eval(j)) / h;
            assert!((dl - dr).abs() < 1e-4, "kink at joint {j}: {dl} vs {dr}");
        }
    }

    #[test]
    fn kink_at_mass_rejected() {
        let iso = square_iso_profile();
        let err = build_modified_profile(&iso, 1.0 / PI, 1.0, None, None).unwrap_err();
        assert!(matches!(err, Error::KinkAtMass { .. }));
    }

    #[test]
    fn square_half_width_with_raw_profile() {
        // cross-check: volume ODE driven by I itself gives T = 1/2 + 1/pi
        let iso = square_iso_profile();
        let dom = solve_volume_function(&iso, 1e-12).unwrap();
        let expect = 0.5 + 1.0 / PI;
        assert!(
            (dom.half_width - expect).abs() < 1e-6,
            "T = {} vs {}",
            dom.half_width,
            expect
        );
        assert!((dom.volume(0.0) - 0.5).abs() < 1e-12);
        assert_eq!(dom.volume(-dom.half_width), 0.0);
        assert_eq!(dom.volume(dom.half_width), 1.0);
    }

    #[test]
    fn pure_power_volume_closed_form() {
        // I*(v) = c sqrt(v) on (0, 1/2]: V(t) = (sqrt(1/2) + c t / 2)^2 for t <= 0
        struct Power {
            c: f64,
        }
        impl VolumeRate for Power {
            fn eval(&self, v: f64) -> f64 {
                let vv = v.clamp(0.0, 1.0);
                self.c * vv.min(1.0 - vv).max(0.0).sqrt()
            }
            fn deriv(&self, v: f64) -> f64 {
                let vv = v.min(1.0 - v).max(1e-300);
                let sign = if v <= 0.5 { 1.0 } else { -1.0 };
                sign * 0.5 * self.c / vv.sqrt()
            }
            fn tail_model(&self) -> TailModel {
                TailModel { c: self.c, p: 0.5, v_max: 0.5 }
            }
            fn ambient_dimension(&self) -> u32 {
                2
            }
        }
        let c = 1.3;
        let dom = solve_volume_function(&Power { c }, 1e-12).unwrap();
        let t_expect = 2.0_f64.sqrt() / c;
        assert!((dom.half_width - t_expect).abs() < 1e-10, "T = {}", dom.half_width);
        for t in [-0.9 * t_expect, -0.5 * t_expect, -0.1, 0.0] {
            let expect = (0.5_f64.sqrt() + c * t / 2.0).powi(2);
            assert!((dom.volume(t) - expect).abs() < 1e-10, "V({t})");
        }
    }

    #[test]
    fn volume_ode_consistency_with_quadrature() {
        // T = int_0^{1/2} dv / I*(v): closed-form tail plus quadrature
        let iso = square_iso_profile();
        let istar = build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap();
        let dom = solve_volume_function(&istar, 1e-12).unwrap();
        let d = istar.delta_tail;
        let t_tail = d.powf(0.5) / (0.5 * istar.c0_tail);
        let t_mid = quad::integrate(|v| 1.0 / istar.eval(v), d, 0.5, 1e-13, 0.0).value;
        assert!(
            (dom.half_width - (t_tail + t_mid)).abs() < 1e-8,
            "ODE T = {} vs quadrature {}",
            dom.half_width,
            t_tail + t_mid
        );
        // monotone volume on compact subintervals
        let mut prev = dom.volume(-0.99 * dom.half_width);
        for k in 1..500 {
            let t = -0.99 * dom.half_width + 1.98 * dom.half_width * k as f64 / 500.0;
            let v = dom.volume(t);
            assert!(v > prev, "V not strictly increasing at {t}");
            prev = v;
        }
    }

    #[test]
    fn rearranged_weight_mass_and_derivative_identity() {
        let iso = square_iso_profile();
        let istar = Arc::new(build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap());
        let dom = Arc::new(solve_volume_function(istar.as_ref(), 1e-12).unwrap());
        let w = rearranged_weight(dom.clone(), istar.clone()).unwrap();
        // int eta = 1
        let total = quad::integrate(|t| w.eval(t), w.t_lo, w.t_hi, 1e-10, 0.0).value;
        assert!((total - 1.0).abs() < 1e-7, "total {total}");
        // eta(t0) = I*(v_m) and eta'(t0) = (I*)'(v_m) I*(v_m) at V(t0) = v_m
        let t0 = dom.time_of_volume(0.4);
        assert!((w.eval(t0) - istar.eval(0.4)).abs() < 1e-9);
        let expect = istar.deriv(0.4) * istar.eval(0.4);
        assert!((w.deriv(t0) - expect).abs() < 1e-9);
        // slice identity alpha_{n-1} r^{n-1} = I*(V)
        for t in [-0.7, -0.2, 0.3, 0.8] {
            let r = dom.radius(t, istar.as_ref());
            assert!((dom.alpha_nm1 * r - istar.eval(dom.volume(t))).abs() < 1e-12);
        }
        let (v_pair, p_pair) = perimeter_volume_pair(&dom, istar.as_ref(), 0.0);
        assert!((v_pair - 0.5).abs() < 1e-12);
        assert!((p_pair - istar.eval(0.5)).abs() < 1e-12);
        // d/dt volume = perimeter: the ODE itself
        let h = 1e-6;
        for t in [-0.5, 0.1, 0.6] {
            let dv = (dom.volume(t + h) - dom.volume(t - h)) / (2.0 * h);
            assert!((dv - istar.eval(dom.volume(t))).abs() < 1e-7);
        }
    }

    #[test]
    fn levelset_weights_match_geometry() {
        // strip: flat interface, parallel level sets
        let w = levelset_weight(CanonicalSet::VerticalStrip { s: 0.5 }).unwrap();
        assert_eq!(w.eval(0.0), 1.0);
        assert_eq!(w.deriv(0.0), 0.0);
        assert!((w.total() - 1.0).abs() < 1e-12);

        // quarter disk: concentric quarter-circle arcs, eta(t) = pi (r + t)/2
        let set = CanonicalSet::QuarterDisk { r: 0.5 };
        let w = levelset_weight(set).unwrap();
        assert!((w.eval(0.0) - PI * 0.25).abs() < 1e-14);
        assert!((w.deriv(0.0) - PI / 2.0).abs() < 1e-14);
        assert!((w.deriv(0.0) - set.curvature() * set.perimeter()).abs() < 1e-14);
        // total mass is the area of the square
        let total =
            quad::integrate_with_splits(|t| w.eval(t), w.t_lo, w.t_hi, w.splits(), 1e-12, 0.0)
                .value;
        assert!((total - 1.0).abs() < 1e-9, "total {total}");

        // centered disk: concentric circles, eta'(0)/eta(0) = 1/r
        let set = CanonicalSet::CenteredDisk { r: 0.25 };
        let w = levelset_weight(set).unwrap();
        assert!((w.eval(0.0) - 2.0 * PI * 0.25).abs() < 1e-14);
        assert!((w.deriv(0.0) / w.eval(0.0) - 4.0).abs() < 1e-12);
        let total =
            quad::integrate_with_splits(|t| w.eval(t), w.t_lo, w.t_hi, w.splits(), 1e-12, 0.0)
                .value;
        assert!((total - 1.0).abs() < 1e-9, "total {total}");

        // centered ball in the unit ball, n = 3
        let set = CanonicalSet::CenteredBall { r: 0.5, n: 3 };
        let w = levelset_weight(set).unwrap();
        assert!((w.eval(0.0) - 4.0 * PI * 0.25).abs() < 1e-14);
        assert!((w.deriv(0.0) - 2.0 * 2.0 * (4.0 * PI * 0.25)).abs() < 1e-12);
        let total = quad::integrate(|t| w.eval(t), w.t_lo, w.t_hi, 1e-12, 0.0).value;
        assert!((total - 4.0 * PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn levelset_derivative_identity_all_sets() {
        for set in [
            CanonicalSet::VerticalStrip { s: 0.3 },
            CanonicalSet::QuarterDisk { r: 0.4 },
            CanonicalSet::CenteredDisk { r: 0.3 },
            CanonicalSet::CenteredBall { r: 0.6, n: 2 },
            CanonicalSet::CenteredBall { r: 0.4, n: 3 },
        ] {
            let w = levelset_weight(set).unwrap();
            let n = set.dimension() as f64;
            assert!((w.eval(0.0) - set.perimeter()).abs() < 1e-12, "{set:?} eta(0)");
            assert!(
                (w.deriv(0.0) - (n - 1.0) * set.curvature() * set.perimeter()).abs() < 1e-12,
                "{set:?} eta'(0)"
            );
        }
    }

    #[test]
    fn unsupported_set_rejected() {
        assert!(matches!(
            levelset_weight(CanonicalSet::CenteredDisk { r: 0.7 }),
            Err(Error::UnsupportedSet)
        ));
    }

    #[test]
    fn weight_tail_bounds_hold_on_independent_grid() {
        let iso = square_iso_profile();
        let istar = Arc::new(build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap());
        let dom = Arc::new(solve_volume_function(istar.as_ref(), 1e-12).unwrap());
        let w = rearranged_weight(dom, istar).unwrap();
        let tails = w.tails;
        let tt = w.t_hi;
        // bracketing near the lower end on a grid finer than the measured one
        for k in 1..=300 {
            let d = tails.t_star * k as f64 / 300.0;
            let eta = w.eval(w.t_lo + d);
            let lo = tails.d1 * d.powi(tails.n1 as i32 - 1);
            let hi = tails.d2 * d.powi(tails.n1 as i32 - 1);
            assert!(eta >= lo * 0.98 && eta <= hi * 1.02, "bracket fails at d = {d}");
        }
        // logarithmic-derivative bound with the measured d5
        for k in 1..400 {
            let t = w.t_lo + 2.0 * tt * k as f64 / 400.0;
            let eta = w.eval(t);
            if eta > 1e-12 {
                let bound = 1.02 * tails.d5 * eta / (tt - t).min(t + tt);
                assert!(w.deriv(t).abs() <= bound + 1e-12, "eta' bound fails at t = {t}");
            }
        }
    }

    #[test]
    fn affine_weight_tails() {
        // eta = 1 + t on (-1, 1): vanishes linearly at -1, positive at +1
        let w = Weight::affine(1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(w.tails.n1, 2);
        assert_eq!(w.tails.n2, 1);
        assert!((w.total() - 2.0).abs() < 1e-14);
    }
}
