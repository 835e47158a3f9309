//! Monotone rearrangement of 2-D grid functions onto the weighted interval.
//!
//! A sampled function on the unit square is rearranged through its value
//! distribution: the decreasing function `g(t)` is the largest value whose
//! super-level measure exceeds `V(t)`, and `f(t) = g(-t)` is the increasing
//! counterpart. Cell samples all carry the same measure, so the exact
//! rearrangement is the sorted sample vector read against the volume
//! function, and the measure-theoretic contracts (equimeasurability, L1
//! contraction, truncation commutation, preservation of `int W(u)`) hold
//! exactly in that representation.
//!
//! Sobolev-level quantities (the Polya-Szego comparison) need a derivative,
//! which a step function does not have. There the samples are first refined
//! bilinearly (the piecewise-linear reading of the grid data) and the
//! quantile is averaged over windows in volume, which converges to the
//! continuum rearrangement at grid resolution; inequalities are then checked
//! with a slack of `(max |grad u| + 1) * cell diameter`.

use std::sync::Arc;

use rand::Rng;

use crate::isoperimetry::RearrangedDomain;
use crate::potential::Potential;

/// Scalar samples at the cell centers of a uniform grid over the unit square.
#[derive(Debug, Clone)]
pub struct GridFunction {
    n: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * n);
        assert!(values.iter().all(|v| v.is_finite()), "grid values must be finite");
        GridFunction { n, values }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 + 0.5) * h;
                let y = (j as f64 + 0.5) * h;
                values.push(f(x, y));
            }
        }
        GridFunction::from_values(n, values)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_measure(&self) -> f64 {
        1.0 / (self.n * self.n) as f64
    }

    pub fn cell_diameter(&self) -> f64 {
        2.0_f64.sqrt() / self.n as f64
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Central-difference gradient (second-order one-sided at the boundary).
    pub fn gradient(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let h = 1.0 / n as f64;
        let mut gx = vec![0.0; n * n];
        let mut gy = vec![0.0; n * n];
        let d = |m: f64, c: f64, p: f64, edge: i8| -> f64 {
            match edge {
                0 => (p - m) / (2.0 * h),
                -1 => (-3.0 * c + 4.0 * p - m) / (2.0 * h),
                _ => (3.0 * c - 4.0 * m + p) / (2.0 * h),
            }
        };
        for i in 0..n {
            for j in 0..n {
                gx[i * n + j] = if i == 0 {
                    d(self.at(i + 2, j), self.at(i, j), self.at(i + 1, j), -1)
                } else if i == n - 1 {
                    d(self.at(i - 1, j), self.at(i, j), self.at(i - 2, j), 1)
                } else {
                    d(self.at(i - 1, j), self.at(i, j), self.at(i + 1, j), 0)
                };
                gy[i * n + j] = if j == 0 {
                    d(self.at(i, j + 2), self.at(i, j), self.at(i, j + 1), -1)
                } else if j == n - 1 {
                    d(self.at(i, j - 1), self.at(i, j), self.at(i, j - 2), 1)
                } else {
                    d(self.at(i, j - 1), self.at(i, j), self.at(i, j + 1), 0)
                };
            }
        }
        (gx, gy)
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_measure()
    }

    /// `int |grad u|^2 dx` by the central-difference gradient.
    pub fn dirichlet_energy(&self) -> f64 {
        let (gx, gy) = self.gradient();
        gx.iter().zip(&gy).map(|(a, b)| a * a + b * b).sum::<f64>() * self.cell_measure()
    }

    /// Max of `|grad u|` over cells.
    pub fn max_gradient(&self) -> f64 {
        let (gx, gy) = self.gradient();
        gx.iter()
            .zip(&gy)
            .map(|(a, b)| (a * a + b * b).sqrt())
            .fold(0.0_f64, f64::max)
    }

    /// Bilinear refinement to `(n k)^2` cell centers: the piecewise-linear
    /// reading of the samples, used before Sobolev-level rearrangements.
    pub fn subsample(&self, k: usize) -> GridFunction {
        let n = self.n;
        let nf = n * k;
        let interp = |x: f64, a: &dyn Fn(usize) -> f64| -> f64 {
            let t = x * n as f64 - 0.5;
            let i = (t.floor().max(0.0) as usize).min(n - 2);
            let w = (t - i as f64).clamp(0.0, 1.0);
            a(i) * (1.0 - w) + a(i + 1) * w
        };
        let mut values = Vec::with_capacity(nf * nf);
        let hf = 1.0 / nf as f64;
        for i in 0..nf {
            let x = (i as f64 + 0.5) * hf;
            for j in 0..nf {
                let y = (j as f64 + 0.5) * hf;
                let v = interp(x, &|ii| interp(y, &|jj| self.at(ii, jj)));
                values.push(v);
            }
        }
        GridFunction { n: nf, values }
    }

    /// Parse a CSV matrix (rows of comma-separated floats).
    pub fn from_csv(text: &str) -> crate::error::Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| crate::error::Error::Config(format!("bad CSV row: {e}")))?);
        }
        let n = rows.len();
        if n < 2 || rows.iter().any(|r| r.len() != n) {
            return Err(crate::error::Error::Config("CSV matrix must be square".into()));
        }
        Ok(GridFunction::from_values(n, rows.into_iter().flatten().collect()))
    }
}

/// Seeded random smooth field: a handful of cosine modes with decaying
/// amplitudes, the workhorse of the property suites.
pub fn random_smooth_field<R: Rng>(n: usize, modes: usize, rng: &mut R) -> GridFunction {
    let mut terms = Vec::new();
    for _ in 0..modes {
        let kx = rng.gen_range(0..4) as f64;
        let ky = rng.gen_range(0..4) as f64;
        let amp = rng.gen_range(-1.0..1.0) / (1.0 + kx + ky);
        let p1 = rng.gen_range(0.0..std::f64::consts::TAU);
        let p2 = rng.gen_range(0.0..std::f64::consts::TAU);
        terms.push((kx, ky, amp, p1, p2));
    }
    GridFunction::from_fn(n, |x, y| {
        terms
            .iter()
            .map(|(kx, ky, amp, p1, p2)| {
                amp * (std::f64::consts::PI * kx * x + p1).cos()
                    * (std::f64::consts::PI * ky * y + p2).cos()
            })
            .sum()
    })
}

/// Right-continuous non-increasing step function `rho(s) = measure{u > s}`.
#[derive(Debug, Clone)]
pub struct DistributionFn {
    sorted: Vec<f64>,
    cell: f64,
}

impl DistributionFn {
    pub fn eval(&self, s: f64) -> f64 {
        // count of strictly larger samples
        let idx = self.sorted.partition_point(|&x| x <= s);
        (self.sorted.len() - idx) as f64 * self.cell
    }
}

/// The distribution function of a grid sample.
pub fn distribution_function(u: &GridFunction) -> DistributionFn {
    let mut sorted = u.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DistributionFn { sorted, cell: u.cell_measure() }
}

/// Rearranged representation: sorted sample values read against the volume
/// function of the rearranged domain.
#[derive(Debug, Clone)]
pub struct Rearranged1D {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    /// Measure of one sample slot (1/M).
    pub cell: f64,
    pub domain: Arc<RearrangedDomain>,
}

impl Rearranged1D {
    /// Decreasing, left-continuous `g(t) = sup{s : rho(s) > V(t)}`.
    pub fn g(&self, t: f64) -> f64 {
        let v = self.domain.volume(t);
        self.quantile_desc(v)
    }

    /// Increasing counterpart `f(t) = g(-t)`.
    pub fn f(&self, t: f64) -> f64 {
        self.g(-t)
    }

    /// `sup{s : rho(s) > v}`: the descending quantile, left-continuous with
    /// ties resolved toward the larger value.
    pub fn quantile_desc(&self, v: f64) -> f64 {
        let m = self.sorted.len();
        let k = ((v * m as f64).floor() as usize).min(m - 1);
        self.sorted[m - 1 - k]
    }

    /// Ascending quantile on `(k/M, (k+1)/M]` slots; `f(t)` equals this at
    /// `V(t)` by the symmetry `V(-t) = 1 - V(t)`.
    pub fn quantile_asc(&self, v: f64) -> f64 {
        let m = self.sorted.len();
        let k = ((v * m as f64).ceil() as usize).max(1).min(m) - 1;
        self.sorted[k]
    }

    /// Mean of the ascending quantile over a volume window (exact from
    /// prefix sums, fractional slots interpolated).
    pub fn window_mean(&self, v_lo: f64, v_hi: f64) -> f64 {
        debug_assert!(v_hi >= v_lo);
        (self.prefix_at(v_hi) - self.prefix_at(v_lo)) / (v_hi - v_lo).max(1e-300)
    }

    fn prefix_at(&self, v: f64) -> f64 {
        let m = self.sorted.len();
        let x = (v.clamp(0.0, 1.0)) * m as f64;
        let k = (x.floor() as usize).min(m - 1);
        self.prefix[k] + (x - k as f64) * self.sorted[k] / m as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// `int f eta dt` over the whole interval (equals the plain mean).
    pub fn weighted_integral(&self) -> f64 {
        *self.prefix.last().unwrap() + self.sorted.last().unwrap() / self.sorted.len() as f64
    }

    /// Export sampled rows `t, f, eta` on a uniform grid.
    pub fn to_csv(&self, eta: impl Fn(f64) -> f64, samples: usize) -> String {
        let tt = self.domain.half_width;
        let mut out = String::from("t,f,eta\n");
        for k in 0..=samples {
            let t = -tt + 2.0 * tt * k as f64 / samples as f64;
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, self.f(t), eta(t)));
        }
        out
    }
}

/// Rearrange a grid function against a rearranged domain.
pub fn rearrange(u: &GridFunction, dom: Arc<RearrangedDomain>) -> Rearranged1D {
    let mut sorted = u.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len();
    let mut prefix = vec![0.0; m];
    let mut acc = 0.0;
    for (k, s) in sorted.iter().enumerate() {
        prefix[k] = acc;
        acc += s / m as f64;
    }
    Rearranged1D { sorted, prefix, cell: u.cell_measure(), domain: dom }
}

/// L1 contraction pair: `(||f_1 - f_2||_{L1_eta}, ||u_1 - u_2||_{L1})`.
///
/// The left side reduces exactly to the slot-wise distance of the sorted
/// sample vectors because both rearrangements share the volume breakpoints.
pub fn check_contraction(
    u1: &GridFunction,
    u2: &GridFunction,
    dom: &Arc<RearrangedDomain>,
) -> (f64, f64) {
    assert_eq!(u1.n, u2.n, "contraction check needs a shared grid");
    let r1 = rearrange(u1, dom.clone());
    let r2 = rearrange(u2, dom.clone());
    let lhs: f64 = r1
        .sorted
        .iter()
        .zip(&r2.sorted)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * u1.cell_measure();
    let rhs: f64 = u1
        .values
        .iter()
        .zip(&u2.values)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * u1.cell_measure();
    (lhs, rhs)
}

/// Does truncation commute with rearrangement? Exact in the step
/// representation: truncating a sorted vector is sorting the truncated one.
pub fn check_truncation(u: &GridFunction, s1: f64, s2: f64, dom: &Arc<RearrangedDomain>) -> bool {
    assert!(s1 < s2);
    let tr = |s: f64| s.max(s1).min(s2);
    let truncated = GridFunction::from_values(u.n, u.values.iter().map(|&v| tr(v)).collect());
    let r_then_t = rearrange(u, dom.clone());
    let t_then_r = rearrange(&truncated, dom.clone());
    r_then_t
        .sorted
        .iter()
        .zip(&t_then_r.sorted)
        .all(|(a, b)| (tr(*a) - b).abs() <= 1e-14)
}

/// Result of the weighted energy comparison.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EnergyPair {
    /// `int_Omega W(u) + eps^2 |grad u|^2 dx` on the 2-D grid.
    pub lhs: f64,
    /// `int_I (W(f) + eps^2 (f')^2) eta dt` for the rearranged profile.
    pub rhs: f64,
    /// `int_Omega u dx`.
    pub mass_2d: f64,
    /// `int_I f eta dt`.
    pub mass_1d: f64,
    /// Discretization slack `(max |grad u| + 1) * cell diameter`.
    pub slack: f64,
}

/// Both sides of the rearrangement energy inequality
/// `int (W(f) + eps^2 (f')^2) eta dt <= int W(u) + eps^2 |grad u|^2 dx`,
/// together with the mass identity pair.
///
/// The rearranged side refines the samples bilinearly (factor `subsample`),
/// averages the quantile over `windows` volume slots, and integrates with the
/// exact cell masses `Delta V`.
pub fn rearranged_energy_pair(
    u: &GridFunction,
    eps: f64,
    potential: &Potential,
    dom: &Arc<RearrangedDomain>,
    subsample: usize,
    windows: usize,
) -> EnergyPair {
    let (gx, gy) = u.gradient();
    let w_part: f64 = u.values.iter().map(|&v| potential.eval(v)).sum::<f64>() * u.cell_measure();
    let g_part: f64 =
        gx.iter().zip(&gy).map(|(a, b)| a * a + b * b).sum::<f64>() * u.cell_measure();
    let lhs = w_part + eps * eps * g_part;

    let fine = u.subsample(subsample);
    let r = rearrange(&fine, dom.clone());
    let tt = dom.half_width;
    let m1 = windows;
    // window edges uniform in t; V at the edges gives the exact cell masses
    let mut v_edges = Vec::with_capacity(m1 + 1);
    for j in 0..=m1 {
        let t = -tt + 2.0 * tt * j as f64 / m1 as f64;
        v_edges.push(dom.volume(t));
    }
    let tc: Vec<f64> = (0..m1)
        .map(|j| -tt + 2.0 * tt * (j as f64 + 0.5) / m1 as f64)
        .collect();
    let f: Vec<f64> = (0..m1).map(|j| r.window_mean(v_edges[j], v_edges[j + 1])).collect();
    let mut rhs = 0.0;
    for j in 0..m1 {
        let dv = v_edges[j + 1] - v_edges[j];
        // centered derivative on the uniform t-centers
        let fp = if j == 0 {
            (f[1] - f[0]) / (tc[1] - tc[0])
        } else if j == m1 - 1 {
            (f[m1 - 1] - f[m1 - 2]) / (tc[m1 - 1] - tc[m1 - 2])
        } else {
            (f[j + 1] - f[j - 1]) / (tc[j + 1] - tc[j - 1])
        };
        rhs += (potential.eval(f[j]) + eps * eps * fp * fp) * dv;
    }

    let mass_2d = u.integral();
    let mass_1d = r.weighted_integral();
    let slack = (u.max_gradient() + 1.0) * u.cell_diameter();
    EnergyPair { lhs, rhs, mass_2d, mass_1d, slack }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoperimetry::{
        build_modified_profile, solve_volume_function, square_iso_profile, TailModel, VolumeRate,
    };
    use rand::SeedableRng;

    fn square_domain() -> Arc<RearrangedDomain> {
        let iso = square_iso_profile();
        let istar = build_modified_profile(&iso, 0.4, 1.0, None, None).unwrap();
        Arc::new(solve_volume_function(&istar, 1e-11).unwrap())
    }

    /// Uniform slab weight: eta = 1 on (-1/2, 1/2).
    struct Slab;
    impl VolumeRate for Slab {
        fn eval(&self, v: f64) -> f64 {
            if (0.0..=1.0).contains(&v) {
                1.0
            } else {
                0.0
            }
        }
        fn deriv(&self, _: f64) -> f64 {
            0.0
        }
        fn tail_model(&self) -> TailModel {
            TailModel { c: 1.0, p: 0.0, v_max: 0.25 }
        }
        fn ambient_dimension(&self) -> u32 {
            2
        }
    }

    #[test]
    fn distribution_function_examples() {
        // constant function
        let u = GridFunction::from_fn(16, |_, _| 3.0);
        let rho = distribution_function(&u);
        assert_eq!(rho.eval(2.9), 1.0);
        assert_eq!(rho.eval(3.0), 0.0);
        // indicator of the left half, height 1
        let u = GridFunction::from_fn(16, |x, _| if x < 0.5 { 1.0 } else { 0.0 });
        let rho = distribution_function(&u);
        assert_eq!(rho.eval(-0.1), 1.0);
        assert!((rho.eval(0.5) - 0.5).abs() < 1e-12);
        assert_eq!(rho.eval(1.0), 0.0);
        // monotone at sampled pairs
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let u = random_smooth_field(32, 6, &mut rng);
        let rho = distribution_function(&u);
        let mut prev = f64::INFINITY;
        for k in 0..100 {
            let s = -2.0 + 4.0 * k as f64 / 99.0;
            let r = rho.eval(s);
            assert!(r <= prev + 1e-15);
            prev = r;
        }
    }

    #[test]
    fn rearrange_constant_and_two_valued() {
        let dom = square_domain();
        // constant: g identically the constant
        let u = GridFunction::from_fn(16, |_, _| 0.7);
        let r = rearrange(&u, dom.clone());
        for t in [-0.9, -0.3, 0.0, 0.5, 0.9] {
            assert_eq!(r.g(t), 0.7);
            assert_eq!(r.f(t), 0.7);
        }
        // two-valued: f jumps from low to high at the t with V(t) = measure{u = low}
        let frac = 0.25;
        let u = GridFunction::from_fn(32, |x, _| if x < frac { -1.0 } else { 1.0 });
        let r = rearrange(&u, dom.clone());
        let t_jump = dom.time_of_volume(frac);
        assert_eq!(r.f(t_jump - 1e-9), -1.0);
        assert_eq!(r.f(t_jump + 1e-9), 1.0);
    }

    #[test]
    fn monotone_rearrangement_recovers_linear_profile() {
        // u(x) = x1 with the slab weight: f(t) = t + 1/2 up to grid resolution
        let dom = Arc::new(solve_volume_function(&Slab, 1e-12).unwrap());
        assert!((dom.half_width - 0.5).abs() < 1e-9);
        let u = GridFunction::from_fn(64, |x, _| x);
        let r = rearrange(&u, dom.clone());
        for k in 1..50 {
            let t = -0.5 + k as f64 / 50.0;
            assert!((r.f(t) - (t + 0.5)).abs() < 1.5 / 64.0, "f({t}) = {}", r.f(t));
        }
    }

    #[test]
    fn equimeasurability_and_w_preservation() {
        let dom = square_domain();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let u = random_smooth_field(64, 6, &mut rng);
        let r = rearrange(&u, dom.clone());
        let rho = distribution_function(&u);
        // eta-measure{f > s} equals measure{u > s} within one cell
        for k in 0..50 {
            let s = -1.5 + 3.0 * k as f64 / 49.0;
            let count = r.sorted.partition_point(|&x| x <= s);
            let eta_measure = (r.sorted.len() - count) as f64 * r.cell;
            assert!((eta_measure - rho.eval(s)).abs() <= r.cell + 1e-15);
        }
        // int W(u) dx = int W(f) eta dt exactly in the step representation
        let p = Potential::quartic();
        let w_2d: f64 = u.values().iter().map(|&v| p.eval(v)).sum::<f64>() * u.cell_measure();
        let w_1d: f64 = r.sorted.iter().map(|&v| p.eval(v)).sum::<f64>() * r.cell;
        assert!((w_2d - w_1d).abs() < 1e-12);
    }

    #[test]
    fn contraction_cases() {
        let dom = square_domain();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u1 = random_smooth_field(32, 6, &mut rng);
        // identical inputs
        let (lhs, rhs) = check_contraction(&u1, &u1, &dom);
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
        // constant offset: rearrangement commutes with constants
        let u2 = GridFunction::from_values(
            u1.size(),
            u1.values().iter().map(|&v| v + 0.37).collect(),
        );
        let (lhs, rhs) = check_contraction(&u1, &u2, &dom);
        assert!((lhs - 0.37).abs() < 1e-12);
        assert!((rhs - 0.37).abs() < 1e-12);
        // random pairs: never expansive
        for _ in 0..20 {
            let a = random_smooth_field(32, 5, &mut rng);
            let b = random_smooth_field(32, 5, &mut rng);
            let (lhs, rhs) = check_contraction(&a, &b, &dom);
            assert!(lhs <= rhs + 1e-12, "contraction violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn truncation_commutes() {
        let dom = square_domain();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        // trivial range
        let u = random_smooth_field(32, 6, &mut rng);
        assert!(check_truncation(&u, -100.0, 100.0, &dom));
        // two-valued with an interior cut
        let w = GridFunction::from_fn(32, |x, _| if x < 0.5 { -1.0 } else { 1.0 });
        assert!(check_truncation(&w, -0.5, 0.5, &dom));
        // random cuts on random fields
        for _ in 0..20 {
            let u = random_smooth_field(32, 6, &mut rng);
            let s1 = rng.gen_range(-1.0..0.0);
            let s2 = rng.gen_range(0.0..1.0_f64).max(s1 + 1e-3);
            assert!(check_truncation(&u, s1, s2, &dom));
        }
    }

    #[test]
    fn monotone_map_property() {
        // u1 <= u2 pointwise implies f_{u1} <= f_{u2} pointwise
        let dom = square_domain();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let u1 = random_smooth_field(24, 5, &mut rng);
            let bump = GridFunction::from_fn(24, |x, y| {
                0.3 * ((2.0 * x - 1.0).powi(2) + y).abs()
            });
            let u2 = GridFunction::from_values(
                24,
                u1.values().iter().zip(bump.values()).map(|(a, b)| a + b).collect(),
            );
            let r1 = rearrange(&u1, dom.clone());
            let r2 = rearrange(&u2, dom.clone());
            for (a, b) in r1.values().iter().zip(r2.values()) {
                assert!(a <= b, "order not preserved");
            }
        }
    }

    #[test]
    fn csv_matrix_round_trip() {
        let u = GridFunction::from_fn(4, |x, y| x + 10.0 * y);
        let mut text = String::new();
        for i in 0..4 {
            let row: Vec<String> =
                (0..4).map(|j| format!("{:.17e}", u.values()[i * 4 + j])).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let parsed = GridFunction::from_csv(&text).unwrap();
        assert_eq!(parsed.size(), 4);
        for (a, b) in parsed.values().iter().zip(u.values()) {
            assert_eq!(a, b);
        }
        assert!(GridFunction::from_csv("1.0,2.0\n3.0\n").is_err());
    }

    #[test]
    fn energy_pair_constant_field() {
        let dom = square_domain();
        let p = Potential::quartic();
        let u = GridFunction::from_fn(32, |_, _| 0.3);
        let pair = rearranged_energy_pair(&u, 0.1, &p, &dom, 4, 256);
        let expect = p.eval(0.3);
        assert!((pair.lhs - expect).abs() < 1e-12);
        assert!((pair.rhs - expect).abs() < 1e-10);
        assert!((pair.mass_2d - 0.3).abs() < 1e-12);
        assert!((pair.mass_1d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn energy_pair_slab_equality_case() {
        // u = tanh((x1 - 1/2)/(sqrt2 eps)) with the slab weight: both sides
        // reduce to the same 1D integral
        let dom = Arc::new(solve_volume_function(&Slab, 1e-12).unwrap());
        let p = Potential::quartic();
        let eps = 0.1;
        let u = GridFunction::from_fn(128, |x, _| ((x - 0.5) / (2.0_f64.sqrt() * eps)).tanh());
        let pair = rearranged_energy_pair(&u, eps, &p, &dom, 8, 512);
        assert!(
            (pair.lhs - pair.rhs).abs() < 0.02 * pair.lhs.abs().max(0.1),
            "equality case: lhs {} vs rhs {}",
            pair.lhs,
            pair.rhs
        );
        assert!((pair.mass_2d - pair.mass_1d).abs() < pair.slack);
    }

    #[test]
    fn polya_szego_on_random_fields() {
        let dom = square_domain();
        let p = Potential::quartic();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..25 {
            let u = random_smooth_field(64, 6, &mut rng);
            let pair = rearranged_energy_pair(&u, 0.1, &p, &dom, 8, 400);
            assert!(
                pair.rhs <= pair.lhs + pair.slack,
                "PS violated: rhs {} lhs {} slack {}",
                pair.rhs,
                pair.lhs,
                pair.slack
            );
        }
    }
}
