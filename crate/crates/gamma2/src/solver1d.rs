//! Discretization and constrained minimization of the weighted 1D energy
//!
//! ```text
//! G_eps(v) = int (W(v) + eps^2 (v')^2) eta dt,    int v eta dt = m,
//! ```
//!
//! near the sharp interface `v0 = sgn_{a,b}(t - t0)`.
//!
//! The grid is graded: uniform spacing `sigma * eps` across the transition
//! layer, geometric coarsening outward, and spacing floored proportionally to
//! the distance from the endpoints where the weight degenerates. The energy
//! uses mass-lumped well terms and exact cell integrals of `eta`, so its
//! gradient and Hessian are analytic and the mass constraint is a plain dot
//! product against the node masses.
//!
//! The constraint is eliminated by projecting steps onto `{w : <w, mass> = 0}`;
//! the multiplier is recovered from the unprojected gradient, with the sign
//! convention of the Euler-Lagrange form
//! `2 eps^2 (v' eta)' - W'(v) eta = eps lambda eta`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::isoperimetry::Weight;
use crate::potential::Potential;
use crate::profile::{compute_cw, Profile};
use crate::rootfind;

/// Graded node set spanning the weight interval.
#[derive(Debug, Clone)]
pub struct Grid1D {
    pub nodes: Vec<f64>,
    pub t0: f64,
    pub fine_spacing: f64,
    /// Half-width of the uniformly fine region around `t0`.
    pub layer_halfwidth: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GridOpts {
    /// Fine spacing as a fraction of eps (must be <= 0.1 to resolve the layer).
    pub fine_spacing_factor: f64,
    /// Geometric coarsening ratio away from the layer.
    pub growth: f64,
    /// Layer half-width in units of `eps |log eps|`.
    pub layer_factor: f64,
}

impl Default for GridOpts {
    fn default() -> Self {
        GridOpts { fine_spacing_factor: 0.1, growth: 1.1, layer_factor: 20.0 }
    }
}

impl GridOpts {
    /// Fine factor shrinking like `0.3 sqrt(eps)`: keeps the discrete-energy
    /// defect `O(sigma^2 / eps)` uniformly small along an eps-sweep.
    pub fn sweep_default(eps: f64) -> Self {
        GridOpts { fine_spacing_factor: (0.3 * eps.sqrt()).min(0.1), ..GridOpts::default() }
    }
}

/// Build the graded grid for one `(weight, t0, eps)` problem.
pub fn build_grid(weight: &Weight, t0: f64, eps: f64, opts: &GridOpts) -> Result<Grid1D> {
    if opts.fine_spacing_factor > 0.1 + 1e-12 {
        return Err(Error::UnresolvedEpsilon { eps, spacing: opts.fine_spacing_factor * eps });
    }
    let (lo, hi) = (weight.t_lo, weight.t_hi);
    assert!(t0 > lo && t0 < hi);
    let hf = opts.fine_spacing_factor * eps;
    let layer = (opts.layer_factor * eps * eps.ln().abs()).min(0.45 * (hi - lo));
    let h_max = 0.02 * (hi - lo);

    // endpoint cells never shrink below this: the weight is integrated there
    // by its local power moment, so extreme refinement buys nothing and only
    // floors the optimality residual at eps_mach * 2 eps^2 / h^2
    let h_stop = 1e-4 * (hi - lo);
    let side = |dir: f64, end: f64| -> Vec<f64> {
        let mut pts = Vec::new();
        let mut t = t0;
        while (end - t) * dir > 0.0 && (t - t0).abs() < layer {
            t += dir * hf;
            if (end - t) * dir <= h_stop {
                break;
            }
            pts.push(t);
        }
        let mut h = hf;
        loop {
            let dist = (end - t) * dir;
            if dist <= 2.0 * h_stop {
                break;
            }
            h = (h * opts.growth).min(h_max);
            let h_eff = h.min((0.3 * dist).max(h_stop));
            t += dir * h_eff;
            if (end - t) * dir <= h_stop {
                break;
            }
            pts.push(t);
        }
        pts.push(end);
        pts
    };

    let right = side(1.0, hi);
    let left = side(-1.0, lo);
    let mut nodes: Vec<f64> = left.into_iter().rev().collect();
    nodes.push(t0);
    nodes.extend(right);
    // weight kinks must be grid points for the cell quadrature to be clean
    for &s in weight.splits() {
        if s > lo && s < hi {
            nodes.push(s);
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    Ok(Grid1D { nodes, t0, fine_spacing: hf, layer_halfwidth: layer })
}

/// Discretized 1D state with mass bookkeeping.
#[derive(Debug, Clone)]
pub struct Field1D {
    pub grid: Arc<Grid1D>,
    pub values: Vec<f64>,
    /// `int v eta dt` under the discrete node masses.
    pub mass: f64,
    /// `int W(v) eta dt` component of the energy.
    pub energy_bulk: f64,
    /// `int eps^2 (v')^2 eta dt` component.
    pub energy_grad: f64,
}

impl Field1D {
    pub fn energy(&self) -> f64 {
        self.energy_bulk + self.energy_grad
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,v\n");
        for (t, v) in self.grid.nodes.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e},{v:.16e}\n"));
        }
        out
    }
}

/// Assembled discrete functional: node masses, cell weight integrals and the
/// machinery for energy/gradient/Hessian evaluations.
pub struct DiscreteEnergy {
    pub grid: Arc<Grid1D>,
    pub eps: f64,
    potential: Potential,
    /// node masses `w_i = int phi_i eta`
    pub node_mass: Vec<f64>,
    /// cell integrals `q_c = int_cell eta`
    cell_eta: Vec<f64>,
    cell_h: Vec<f64>,
}

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Assemble the discrete energy on a grid.
///
/// Cell integrals of `eta` use 3-point Gauss; the first and last cells switch
/// to the exact local power-law moment when the weight degenerates there with
/// exponent >= 2, where polynomial quadrature would misrepresent `eta`.
pub fn assemble_energy(
    grid: Arc<Grid1D>,
    weight: &Weight,
    potential: &Potential,
    eps: f64,
) -> Result<DiscreteEnergy> {
    if grid.fine_spacing > eps / 10.0 + 1e-15 {
        return Err(Error::UnresolvedEpsilon { eps, spacing: grid.fine_spacing });
    }
    let nodes = &grid.nodes;
    let nc = nodes.len() - 1;
    let mut cell_eta = vec![0.0; nc];
    let mut cell_eta_left = vec![0.0; nc];
    let mut cell_h = vec![0.0; nc];
    for c in 0..nc {
        let (x0, x1) = (nodes[c], nodes[c + 1]);
        let h = x1 - x0;
        cell_h[c] = h;
        let mut q = 0.0;
        let mut q_left = 0.0;
        for k in 0..3 {
            let t = 0.5 * (x0 + x1) + 0.5 * h * GL3_X[k];
            let e = weight.eval(t);
            q += 0.5 * h * GL3_W[k] * e;
            q_left += 0.5 * h * GL3_W[k] * e * (x1 - t) / h;
        }
        cell_eta[c] = q;
        cell_eta_left[c] = q_left;
    }
    // endpoint cells: exact power moments when the weight degenerates with
    // exponent >= 2 there. With eta ~ D s^p (s the distance to the endpoint):
    // int eta = D h^{p+1}/(p+1), and the hat on the interior node carries
    // D h^{p+1}/(p+2).
    if weight.tails.n1 >= 2 {
        let h = cell_h[0];
        let e1 = weight.eval(nodes[1]);
        let em = weight.eval(nodes[0] + 0.5 * h);
        let p = if em > 0.0 && e1 > 0.0 { (e1 / em).ln() / 2f64.ln() } else { 1.0 };
        cell_eta[0] = e1 * h / (p + 1.0);
        // phi_left vanishes at the interior node: it carries the remainder
        cell_eta_left[0] = e1 * h * (1.0 / (p + 1.0) - 1.0 / (p + 2.0));
    }
    if weight.tails.n2 >= 2 {
        let c = nc - 1;
        let h = cell_h[c];
        let e0 = weight.eval(nodes[c]);
        let em = weight.eval(nodes[c + 1] - 0.5 * h);
        let p = if em > 0.0 && e0 > 0.0 { (e0 / em).ln() / 2f64.ln() } else { 1.0 };
        // eta ~ D (x1 - t)^p with D = e0 / h^p: the left hat (x1 - t)/h
        // carries D h^{p+1}/(p+2)
        cell_eta[c] = e0 * h / (p + 1.0);
        cell_eta_left[c] = e0 * h / (p + 2.0);
    }

    let n = nodes.len();
    let mut node_mass = vec![0.0; n];
    for c in 0..nc {
        node_mass[c] += cell_eta_left[c];
        node_mass[c + 1] += cell_eta[c] - cell_eta_left[c];
    }
    Ok(DiscreteEnergy { grid, eps, potential: potential.clone(), node_mass, cell_eta, cell_h })
}

impl DiscreteEnergy {
    pub fn len(&self) -> usize {
        self.grid.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.nodes.is_empty()
    }

    pub fn mass(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.node_mass).map(|(a, b)| a * b).sum()
    }

    /// Split energy `(int W(v) eta, int eps^2 (v')^2 eta)`.
    pub fn energy_parts(&self, v: &[f64]) -> (f64, f64) {
        let mut bulk = 0.0;
        for (vi, wi) in v.iter().zip(&self.node_mass) {
            bulk += self.potential.eval(*vi) * wi;
        }
        let mut grad = 0.0;
        for c in 0..self.cell_h.len() {
            let dv = (v[c + 1] - v[c]) / self.cell_h[c];
            grad += dv * dv * self.cell_eta[c];
        }
        (bulk, self.eps * self.eps * grad)
    }

    pub fn energy(&self, v: &[f64]) -> f64 {
        let (b, g) = self.energy_parts(v);
        b + g
    }

    pub fn gradient(&self, v: &[f64], out: &mut [f64]) {
        for ((o, vi), wi) in out.iter_mut().zip(v).zip(&self.node_mass) {
            *o = self.potential.deriv(*vi) * wi;
        }
        let e2 = 2.0 * self.eps * self.eps;
        for c in 0..self.cell_h.len() {
            let flux = e2 * (v[c + 1] - v[c]) * self.cell_eta[c] / (self.cell_h[c] * self.cell_h[c]);
            out[c] -= flux;
            out[c + 1] += flux;
        }
    }

    /// Tridiagonal Hessian `(diag, off)`; a NaN well curvature (subquadratic
    /// potentials evaluated exactly at a well) falls back on the `(q, ell)`
    /// local-model magnitude.
    pub fn hessian(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let wd = self.potential.wells();
        let mut diag: Vec<f64> = v
            .iter()
            .zip(&self.node_mass)
            .map(|(&vi, &wi)| {
                let mut d2 = self.potential.deriv2(vi);
                if !d2.is_finite() {
                    let gap = (vi - wd.a).abs().min((vi - wd.b).abs()).max(1e-12);
                    d2 = wd.ell * gap.powf(wd.q - 1.0);
                }
                d2 * wi
            })
            .collect();
        let e2 = 2.0 * self.eps * self.eps;
        let mut off = vec![0.0; self.cell_h.len()];
        for c in 0..self.cell_h.len() {
            let k = e2 * self.cell_eta[c] / (self.cell_h[c] * self.cell_h[c]);
            diag[c] += k;
            diag[c + 1] += k;
            off[c] = -k;
        }
        (diag, off)
    }

    /// Wrap nodal values into a bookkept field.
    pub fn field(&self, values: Vec<f64>) -> Field1D {
        let (b, g) = self.energy_parts(&values);
        Field1D {
            grid: self.grid.clone(),
            mass: self.mass(&values),
            energy_bulk: b,
            energy_grad: g,
            values,
        }
    }
}

/// Unique interface position `t0` with `int sgn_{a,b}(t - t0) eta dt = m`.
pub fn reference_interface(weight: &Weight, potential: &Potential, m: f64) -> Result<f64> {
    let wd = potential.wells();
    let total = weight.total();
    let (lo, hi) = (wd.a * total, wd.b * total);
    if !(m > lo && m < hi) {
        return Err(Error::MassOutOfRange { m, lo, hi });
    }
    // int sgn(t - t0) eta = b total - (b - a) int_{t_lo}^{t0} eta: decreasing in t0
    let f = |t0: f64| {
        let below = weight.integrate_against(|_| 1.0, weight.t_lo, t0, 1e-13);
        wd.b * total - (wd.b - wd.a) * below - m
    };
    let t0 = rootfind::brent(f, weight.t_lo, weight.t_hi, 1e-14)?;
    debug_assert!(f(t0).abs() < 1e-10);
    Ok(t0)
}

/// Recovery field `v(t) = z((t - t0 - eps tau)/eps) - lambda0 eps / W''(a)`
/// (no vertical shift for subquadratic wells), with `tau` solving the mass
/// constraint.
#[derive(Debug, Clone)]
pub struct RecoveryField {
    pub profile: Arc<Profile>,
    pub t0: f64,
    pub eps: f64,
    pub tau: f64,
    pub shift: f64,
    pub lambda0: f64,
}

impl RecoveryField {
    pub fn eval(&self, t: f64) -> f64 {
        self.profile.z((t - self.t0 - self.eps * self.tau) / self.eps) - self.shift
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.profile.dz((t - self.t0 - self.eps * self.tau) / self.eps) / self.eps
    }
}

/// Continuum mass of a recovery candidate under the weight.
fn recovery_mass(weight: &Weight, rf: &RecoveryField) -> f64 {
    let lo = weight.t_lo;
    let hi = weight.t_hi;
    let mut splits: Vec<f64> = weight.splits().to_vec();
    let width = 40.0 * rf.eps * (1.0 + rf.tau.abs());
    splits.push(rf.t0 - width);
    splits.push(rf.t0 + width);
    splits.push(rf.t0);
    crate::quad::integrate_with_splits(|t| rf.eval(t) * weight.eval(t), lo, hi, &splits, 1e-13, 0.0)
        .value
}

/// Build the recovery sequence for one eps, root-finding the transition shift
/// `tau_eps` so the mass constraint holds to 1e-12.
pub fn recovery_sequence(
    prof: Arc<Profile>,
    potential: &Potential,
    weight: &Weight,
    t0: f64,
    eps: f64,
    m: f64,
) -> Result<RecoveryField> {
    let wd = potential.wells();
    let cw = compute_cw(potential, 1e-12).value;
    let lambda0 = 2.0 * weight.deriv(t0) * cw / ((wd.b - wd.a) * weight.eval(t0));
    let shift = if wd.q == 1.0 { lambda0 * eps / potential.deriv2(wd.a) } else { 0.0 };
    let make = |tau: f64| RecoveryField { profile: prof.clone(), t0, eps, tau, shift, lambda0 };
    let f = |tau: f64| recovery_mass(weight, &make(tau)) - m;
    let tau = rootfind::brent(f, -5.0, 5.0, 1e-15)
        .map_err(|_| Error::NoBracket { what: "recovery tau", lo: -5.0, hi: 5.0 })?;
    let rf = make(tau);
    let resid = (recovery_mass(weight, &rf) - m).abs();
    if resid > 1e-10 * (1.0 + m.abs()) {
        return Err(Error::NoConvergence { iterations: 0, residual: resid });
    }
    Ok(rf)
}

/// Result of a localized minimization.
#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub field: Field1D,
    pub lambda_eps: f64,
    /// Max-norm optimality defect of the discrete Euler-Lagrange system.
    pub el_residual: f64,
    pub iterations: usize,
    /// Perturbed well roots `(a_eps, c_eps, b_eps)` of `W' + eps lambda`.
    pub well_roots: (f64, f64, f64),
    /// Multiplier re-derived from the pointwise EL identity on bulk nodes.
    pub lambda_el_average: f64,
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOpts {
    pub tol: f64,
    pub max_iter: usize,
    /// Locality radius; `None` uses `(b-a) eta(t0) r / 4` with `r` the distance
    /// from `t0` to the nearer endpoint.
    pub delta_loc: Option<f64>,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts { tol: 1e-9, max_iter: 120, delta_loc: None }
    }
}

fn solve_tridiag(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    c[0] = off[0] / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Minimize the localized functional on the affine mass manifold by projected
/// Newton with a Levenberg fallback and Armijo line search.
///
/// Starts from `v_init` (normally the recovery sequence), keeps the mass exact
/// at every iterate, rejects iterates leaving the locality ball, and finishes
/// when the projected optimality residual drops under `opts.tol` in max norm.
pub fn minimize_localized(
    energy: &DiscreteEnergy,
    weight: &Weight,
    potential: &Potential,
    m: f64,
    v_init: &[f64],
    opts: &SolveOpts,
) -> Result<MinimizerResult> {
    let n = energy.len();
    assert_eq!(v_init.len(), n);
    let wd = potential.wells();
    let w = &energy.node_mass;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let t0 = energy.grid.t0;

    let delta_loc = opts.delta_loc.unwrap_or_else(|| {
        let r = (weight.t_hi - t0).min(t0 - weight.t_lo);
        (wd.b - wd.a) * weight.eval(t0) * r / 4.0
    });
    let v0_at = |t: f64| if t <= t0 { wd.a } else { wd.b };
    let locality = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&energy.grid.nodes)
            .zip(w)
            .map(|((&vi, &ti), &wi)| (vi - v0_at(ti)).abs() * wi)
            .sum()
    };

    let mut v = v_init.to_vec();
    // exact discrete mass via a constant shift
    let wsum: f64 = w.iter().sum();
    let defect = (m - energy.mass(&v)) / wsum;
    for vi in v.iter_mut() {
        *vi += defect;
    }
    let d_init = locality(&v);
    if d_init > delta_loc {
        return Err(Error::LeftLocalityBall { distance: d_init, delta: delta_loc });
    }

    let mut g = vec![0.0; n];
    let mut energy_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..opts.max_iter {
        iterations = it;
        let e_cur = energy.energy(&v);
        energy_history.push(e_cur);
        energy.gradient(&v, &mut g);
        let mu = g.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / ww;
        let resid = g
            .iter()
            .zip(w)
            .map(|(gi, wi)| (gi / wi.max(1e-300) - mu).abs())
            .fold(0.0_f64, f64::max);
        if resid < opts.tol {
            converged = true;
            break;
        }

        let (diag, off) = energy.hessian(&v);
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut shift = 0.0_f64;
        let mut stepped = false;
        for _try in 0..40 {
            let diag_s: Vec<f64> = if shift == 0.0 {
                diag.clone()
            } else {
                diag.iter().zip(w).map(|(d, wi)| d + shift * wi).collect()
            };
            let x1 = solve_tridiag(&diag_s, &off, &neg_g);
            let x2 = solve_tridiag(&diag_s, &off, w);
            if let (Some(x1), Some(x2)) = (x1, x2) {
                let nu = w.iter().zip(&x1).map(|(a, b)| a * b).sum::<f64>()
                    / w.iter().zip(&x2).map(|(a, b)| a * b).sum::<f64>();
                let dv: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a - nu * b).collect();
                let slope: f64 = g.iter().zip(&dv).map(|(a, b)| a * b).sum();
                if slope < 0.0 {
                    // near the optimum the predicted decrease sinks below the
                    // energy evaluation noise; take the plain Newton step there
                    if -slope < 1e-14 * (1.0 + e_cur.abs()) {
                        v = v.iter().zip(&dv).map(|(a, b)| a + b).collect();
                        stepped = true;
                        break;
                    }
                    let mut alpha = 1.0;
                    for _ls in 0..50 {
                        let vn: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + alpha * b).collect();
                        if energy.energy(&vn) <= e_cur + 1e-4 * alpha * slope {
                            v = vn;
                            stepped = true;
                            break;
                        }
                        alpha *= 0.5;
                    }
                }
            }
            if stepped {
                break;
            }
            shift = if shift == 0.0 { 1.0 } else { shift * 10.0 };
        }
        if !stepped {
            return Err(Error::NoConvergence { iterations: it, residual: resid });
        }
        let defect = (m - energy.mass(&v)) / wsum;
        for vi in v.iter_mut() {
            *vi += defect;
        }
        let dist = locality(&v);
        if dist > delta_loc {
            return Err(Error::LeftLocalityBall { distance: dist, delta: delta_loc });
        }
    }

    energy.gradient(&v, &mut g);
    let mu = g.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / ww;
    let el_residual = g
        .iter()
        .zip(w)
        .map(|(gi, wi)| (gi / wi.max(1e-300) - mu).abs())
        .fold(0.0_f64, f64::max);
    if !converged && el_residual > opts.tol {
        return Err(Error::NoConvergence { iterations, residual: el_residual });
    }

    // EL sign convention: 2 eps^2 (v' eta)' - W'(v) eta = eps lambda eta,
    // while the KKT multiplier satisfies grad = mu * w, so lambda = -mu/eps
    let lambda_eps = -mu / energy.eps;

    // independent multiplier route: pointwise EL identity averaged over bulk
    // nodes, from central differences of the converged field
    let lambda_el_average = {
        let nodes = &energy.grid.nodes;
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 1..n - 1 {
            if (nodes[i] - t0).abs() < 30.0 * energy.eps {
                continue;
            }
            let e = weight.eval(nodes[i]);
            if e < 1e-6 {
                continue;
            }
            let hp = nodes[i + 1] - nodes[i];
            let hm = nodes[i] - nodes[i - 1];
            let vp_f = (v[i + 1] - v[i]) / hp;
            let vp_b = (v[i] - v[i - 1]) / hm;
            let eta_f = weight.eval(0.5 * (nodes[i + 1] + nodes[i]));
            let eta_b = weight.eval(0.5 * (nodes[i] + nodes[i - 1]));
            let div = (vp_f * eta_f - vp_b * eta_b) / (0.5 * (hp + hm));
            let el = 2.0 * energy.eps * energy.eps * div - potential.deriv(v[i]) * e;
            acc += el / (energy.eps * e);
            count += 1;
        }
        if count > 0 {
            acc / count as f64
        } else {
            f64::NAN
        }
    };

    let (a_eps, c_eps, b_eps) = well_roots(potential, energy.eps * lambda_eps)?;
    let slack = 1e-10 * (wd.b - wd.a);
    for &vi in &v {
        if vi < a_eps - slack || vi > b_eps + slack {
            return Err(Error::NoConvergence {
                iterations,
                residual: (vi - a_eps).abs().min((vi - b_eps).abs()),
            });
        }
    }

    Ok(MinimizerResult {
        field: energy.field(v),
        lambda_eps,
        el_residual,
        iterations,
        well_roots: (a_eps, c_eps, b_eps),
        lambda_el_average,
        energy_history,
    })
}

/// The three perturbed well roots of `W' + eps_lambda`.
///
/// First-order forms: `a_eps = a - lambda |lambda|^{1/q-1} (q/ell)^{1/q} eps^{1/q}`
/// and `c_eps = c - lambda eps / W''(c)`.
pub fn well_roots(potential: &Potential, eps_lambda: f64) -> Result<(f64, f64, f64)> {
    let wd = potential.wells();
    let width = wd.b - wd.a;
    if eps_lambda == 0.0 {
        return Ok((wd.a, wd.c, wd.b));
    }
    // smallness guard: |eps lambda| at most half the minimum |W'| away from
    // the critical points
    let mut w0 = f64::INFINITY;
    for k in 0..400 {
        let s = wd.a - 0.5 * width + 2.0 * width * k as f64 / 400.0;
        let far = (s - wd.a).abs() > 0.05 * width
            && (s - wd.b).abs() > 0.05 * width
            && (s - wd.c).abs() > 0.05 * width;
        if far {
            w0 = w0.min(potential.deriv(s).abs());
        }
    }
    assert!(
        eps_lambda.abs() <= w0 / 2.0,
        "eps*lambda = {eps_lambda} above the smallness threshold {}",
        w0 / 2.0
    );

    let f = |s: f64| potential.deriv(s) + eps_lambda;
    let windows = [
        (wd.a - 0.45 * width, wd.a + 0.45 * (wd.c - wd.a)),
        (wd.c - 0.45 * (wd.c - wd.a), wd.c + 0.45 * (wd.b - wd.c)),
        (wd.b - 0.45 * (wd.b - wd.c), wd.b + 0.45 * width),
    ];
    let mut roots = Vec::new();
    for (lo, hi) in windows {
        let found = rootfind::scan_roots(f, lo, hi, 600, 1e-14);
        if found.len() != 1 {
            return Err(Error::RootCountChanged { found: found.len() });
        }
        roots.push(found[0]);
    }
    Ok((roots[0], roots[1], roots[2]))
}
