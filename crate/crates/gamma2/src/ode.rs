//! Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) for scalar autonomous
//! problems, with event detection on the dense output.

use crate::error::{Error, Result};

/// Tabulated solution of `y' = f(y)`.
#[derive(Debug, Clone)]
pub struct ScalarSolution {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// `f(y)` at each accepted node.
    pub dy: Vec<f64>,
    /// Event time and value, when an event terminated the integration.
    pub event: Option<(f64, f64)>,
}

pub struct EventSpec<'a> {
    /// Event function of the state; a zero crossing stops the integration.
    pub g: &'a dyn Fn(f64) -> f64,
    /// +1: trigger on increasing crossings, -1: decreasing, 0: any.
    pub direction: i8,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integrate `y' = f(y)` from `t0` to `t_end` (requires `t_end > t0`).
#[allow(clippy::too_many_arguments)]
pub fn solve_scalar<F: Fn(f64) -> f64>(
    f: F,
    y0: f64,
    t0: f64,
    t_end: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
    event: Option<EventSpec<'_>>,
) -> Result<ScalarSolution> {
    assert!(t_end > t0);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(y);
    let mut h = max_step.min(0.01 * (t_end - t0));

    let mut out = ScalarSolution { t: vec![t], y: vec![y], dy: vec![k1], event: None };
    let mut g_prev = event.as_ref().map(|e| (e.g)(y));

    while t < t_end {
        h = h.min(t_end - t).min(max_step);
        if h < 1e-14 {
            return Err(Error::StiffnessFailure { at: t });
        }
        let k2 = f(y + h * A21 * k1);
        let k3 = f(y + h * (A31 * k1 + A32 * k2));
        let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(y5);
        let y4 = y + h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

        let sc = atol + rtol * y.abs().max(y5.abs());
        let err = ((y5 - y4) / sc).abs();

        if err <= 1.0 || h <= 1e-13 {
            // accepted
            let (t_new, y_new, k_new) = (t + h, y5, k7);
            if let (Some(ev), Some(gp)) = (event.as_ref(), g_prev) {
                let gn = (ev.g)(y_new);
                let crossed = match ev.direction {
                    1 => gp < 0.0 && gn >= 0.0,
                    -1 => gp > 0.0 && gn <= 0.0,
                    _ => gp.signum() != gn.signum(),
                };
                if crossed {
                    // locate on the cubic Hermite dense output of this step
                    let dense = |tt: f64| {
                        crate::interp::hermite3(t, t_new, y, y_new, k1, k_new, tt)
                    };
                    let te = crate::rootfind::brent(
                        |tt| (ev.g)(dense(tt)),
                        t,
                        t_new,
                        1e-15 * (1.0 + t_new.abs()),
                    )
                    .unwrap_or(t_new);
                    let ye = dense(te);
                    out.t.push(te);
                    out.y.push(ye);
                    out.dy.push(f(ye));
                    out.event = Some((te, ye));
                    return Ok(out);
                }
                g_prev = Some(gn);
            }
            t = t_new;
            y = y_new;
            k1 = k_new;
            out.t.push(t);
            out.y.push(y);
            out.dy.push(k1);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sol = solve_scalar(|y| y, 1.0, 0.0, 2.0, 1e-12, 1e-14, 0.1, None).unwrap();
        let yf = *sol.y.last().unwrap();
        assert!((yf - 2.0_f64.exp()).abs() < 1e-9, "got {yf}");
    }

    #[test]
    fn logistic_event_stop() {
        // y' = y(1-y), event at y = 0.9 from y0 = 0.1: t* = ln(81)
        let ev = EventSpec { g: &|y: f64| y - 0.9, direction: 1 };
        let sol = solve_scalar(|y| y * (1.0 - y), 0.1, 0.0, 50.0, 1e-12, 1e-14, 0.1, Some(ev))
            .unwrap();
        let (te, ye) = sol.event.expect("event");
        assert!((ye - 0.9).abs() < 1e-10);
        assert!((te - 81.0_f64.ln()).abs() < 1e-8, "te = {te}");
    }

    #[test]
    fn tanh_profile_forward() {
        // z' = (1-z^2)/sqrt(2), z(0)=0 -> z = tanh(t/sqrt2)
        let s2 = 2.0_f64.sqrt();
        let sol = solve_scalar(|z| (1.0 - z * z) / s2, 0.0, 0.0, 3.0, 1e-12, 1e-14, 0.05, None)
            .unwrap();
        for (t, z) in sol.t.iter().zip(&sol.y) {
            assert!((z - (t / s2).tanh()).abs() < 1e-10);
        }
    }
}
