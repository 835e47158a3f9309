//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a bracketing interval.
///
/// `fa` and `fb` must have opposite signs; converges to `|x1 - x0| < xtol`
/// or an exact zero.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { what: "brent", lo: a, hi: b });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;

    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };

        let lo = (3.0 * a + b) / 4.0;
        let between = (s > lo.min(b)) && (s < lo.max(b));
        let big_step = if mflag {
            (s - b).abs() >= (b - c).abs() / 2.0
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0
        };
        let tiny = if mflag {
            (b - c).abs() < xtol
        } else {
            (c - d).abs() < xtol
        };
        if !between || big_step || tiny {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }

        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Bisection to a coarse interval followed by a secant polish, accurate to
/// `xtol` in the abscissa. Used to pin the central well of `W'`.
pub fn bisect_secant<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { what: "bisect", lo: a, hi: b });
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // secant polish inside the final bracket
    let mut x0 = lo;
    let mut x1 = hi;
    let mut f0 = f(x0);
    let mut f1 = f(x1);
    for _ in 0..60 {
        if (x1 - x0).abs() < xtol || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        let x2 = x2.clamp(lo.min(hi), lo.max(hi));
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
        if f1 == 0.0 {
            break;
        }
    }
    Ok(x1)
}

/// Scan `[lo, hi]` on `n` points and return the roots located by sign changes,
/// each polished by Brent.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, xtol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = f(lo);
    if prev_f == 0.0 {
        roots.push(lo);
    }
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev_f != 0.0 && prev_f.signum() != fx.signum() {
            if let Ok(r) = brent(&f, prev_x, x, xtol) {
                roots.push(r);
            }
        }
        prev_x = x;
        prev_f = fx;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 10.0 * xtol);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2.0_f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn no_bracket_is_an_error() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn scan_finds_all_three() {
        // W' of the quartic: -2s(1-s^2), zeros at -1, 0, 1
        let roots = scan_roots(|s: f64| -2.0 * s * (1.0 - s * s), -2.0, 2.0, 400, 1e-13);
        assert_eq!(roots.len(), 3);
        assert!((roots[0] + 1.0).abs() < 1e-11);
        assert!(roots[1].abs() < 1e-11);
        assert!((roots[2] - 1.0).abs() < 1e-11);
    }
}
