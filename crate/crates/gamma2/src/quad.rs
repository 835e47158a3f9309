//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss rule drives a global
//! adaptive bisection. Callers pass explicit split points where the integrand
//! has kinks or boundary layers (well singularities, support endpoints,
//! interface locations); the subdivision then refines wherever the error
//! estimate concentrates.

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (non-negative half).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// 7-point Gauss weights for the even-indexed Kronrod abscissae.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of one panel evaluation: Kronrod value and error estimate.
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();

    let mut fv = [0.0_f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

/// Integrate `f` over `[a, b]`, refining until the summed error estimate
/// drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadResult {
    integrate_with_splits(f, a, b, &[], abs_tol, rel_tol)
}

/// Same as [`integrate`], seeding the subdivision at the given interior points.
pub fn integrate_with_splits<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, abs_error: 0.0, panels: 0 };
    }
    let mut edges: Vec<f64> = vec![a];
    let mut interior: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|s| *s > a.min(b) && *s < a.max(b))
        .collect();
    interior.sort_by(|x, y| x.partial_cmp(y).unwrap());
    interior.dedup();
    if a <= b {
        edges.extend(interior);
    } else {
        edges.extend(interior.into_iter().rev());
    }
    edges.push(b);

    // (neg_error, value, lo, hi) max-heap keyed on error
    let mut heap: std::collections::BinaryHeap<Panel> = std::collections::BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for win in edges.windows(2) {
        let (v, e) = qk15(&f, win[0], win[1]);
        total += v;
        total_err += e;
        heap.push(Panel { err: e, value: v, lo: win[0], hi: win[1] });
    }

    let mut panels = edges.len() - 1;
    const MAX_PANELS: usize = 4000;
    while total_err > abs_tol.max(rel_tol * total.abs()) && panels < MAX_PANELS {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo.min(worst.hi) || mid >= worst.lo.max(worst.hi) {
            // interval exhausted at machine precision
            total_err -= worst.err;
            total_err += 50.0 * f64::EPSILON * worst.value.abs();
            continue;
        }
        let (v1, e1) = qk15(&f, worst.lo, mid);
        let (v2, e2) = qk15(&f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { err: e1, value: v1, lo: worst.lo, hi: mid });
        heap.push(Panel { err: e2, value: v2, lo: mid, hi: worst.hi });
        panels += 1;
    }

    QuadResult { value: total, abs_error: total_err, panels }
}

struct Panel {
    err: f64,
    value: f64,
    lo: f64,
    hi: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}
