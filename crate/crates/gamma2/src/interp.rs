//! Piecewise interpolants: monotone cubic (PCHIP) and quintic Hermite.

/// Index of the interval containing `x` in a sorted knot vector.
pub fn locate(knots: &[f64], x: f64) -> usize {
    if x <= knots[0] {
        return 0;
    }
    if x >= knots[knots.len() - 1] {
        return knots.len() - 2;
    }
    match knots.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(knots.len() - 2),
        Err(i) => i - 1,
    }
}

/// Fritsch-Carlson slopes for shape-preserving cubic interpolation.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2);
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Cubic Hermite evaluation on one interval.
pub fn hermite3(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let u = (x - x0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    y0 * (2.0 * u3 - 3.0 * u2 + 1.0)
        + d0 * h * (u3 - 2.0 * u2 + u)
        + y1 * (-2.0 * u3 + 3.0 * u2)
        + d1 * h * (u3 - u2)
}

/// Derivative of [`hermite3`].
pub fn hermite3_deriv(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let u = (x - x0) / h;
    let u2 = u * u;
    (y0 * (6.0 * u2 - 6.0 * u)
        + d0 * h * (3.0 * u2 - 4.0 * u + 1.0)
        + y1 * (-6.0 * u2 + 6.0 * u)
        + d1 * h * (3.0 * u2 - 2.0 * u))
        / h
}

/// Quintic Hermite on one interval from values, first and second derivatives.
pub fn hermite5(
    x0: f64,
    x1: f64,
    y: (f64, f64),
    dy: (f64, f64),
    d2y: (f64, f64),
    x: f64,
) -> f64 {
    let h = x1 - x0;
    let u = (x - x0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let h00 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h10 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h20 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
    let h01 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let h11 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h21 = 0.5 * (u3 - 2.0 * u4 + u5);
    y.0 * h00 + dy.0 * h * h10 + d2y.0 * h * h * h20 + y.1 * h01 + dy.1 * h * h11 + d2y.1 * h * h * h21
}

/// Derivative of [`hermite5`].
pub fn hermite5_deriv(
    x0: f64,
    x1: f64,
    y: (f64, f64),
    dy: (f64, f64),
    d2y: (f64, f64),
    x: f64,
) -> f64 {
    let h = x1 - x0;
    let u = (x - x0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let dh00 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    let dh10 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    let dh20 = 0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4);
    let dh01 = 30.0 * u2 - 60.0 * u3 + 30.0 * u4;
    let dh11 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    let dh21 = 0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4);
    (y.0 * dh00
        + dy.0 * h * dh10
        + d2y.0 * h * h * dh20
        + y.1 * dh01
        + dy.1 * h * dh11
        + d2y.1 * h * h * dh21)
        / h
}

/// Shape-preserving cubic interpolant over tabulated data.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.windows(2).all(|w| w[1] > w[0]), "knots must be strictly increasing");
        let d = pchip_slopes(&x, &y);
        Pchip { x, y, d }
    }

    /// Override the end slopes (clamped variant), re-limited for monotone safety.
    pub fn with_end_slopes(x: Vec<f64>, y: Vec<f64>, d_lo: f64, d_hi: f64) -> Self {
        let mut p = Pchip::new(x, y);
        let n = p.x.len();
        p.d[0] = d_lo;
        p.d[n - 1] = d_hi;
        p
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = locate(&self.x, x);
        hermite3(self.x[i], self.x[i + 1], self.y[i], self.y[i + 1], self.d[i], self.d[i + 1], x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = locate(&self.x, x);
        hermite3_deriv(self.x[i], self.x[i + 1], self.y[i], self.y[i + 1], self.d[i], self.d[i + 1], x)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}
