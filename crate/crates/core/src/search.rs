//! One-dimensional maximization and root finding.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` or after `max_iter`
/// reductions. The best point seen, including both ends, is returned.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::invalid("golden search", "needs lo <= hi and tol > 0"));
    }
    let mut best = Maximum {
        x: lo,
        value: f(lo)?,
        evaluations: 1,
        converged: false,
    };
    let consider = |x: f64, v: f64, best: &mut Maximum| {
        best.evaluations += 1;
        if v > best.value {
            best.x = x;
            best.value = v;
        }
    };
    let v_hi = f(hi)?;
    consider(hi, v_hi, &mut best);

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    consider(c, fc, &mut best);
    let mut fd = f(d)?;
    consider(d, fd, &mut best);
    for _ in 0..max_iter {
        if b - a <= tol {
            best.converged = true;
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            consider(d, fd, &mut best);
        }
    }
    if b - a <= tol {
        best.converged = true;
    }
    Ok(best)
}

/// Brent's method for a root of `f` in `[a, b]`, given `f(a)` and `f(b)`
/// of opposite sign (or one of them zero).
pub fn brent_root<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::invalid("root bracket", "end values must differ in sign"));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_a_parabola_peak() {
        let m = golden_max(|x| Ok(-(x - 0.3) * (x - 0.3)), -1.0, 2.0, 1e-9, 200).unwrap();
        assert!(m.converged);
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn golden_keeps_the_better_endpoint() {
        let m = golden_max(Ok, 0.0, 1.0, 1e-6, 200).unwrap();
        assert_eq!(m.x, 1.0);
        let m = golden_max(|x| Ok(-x), 0.0, 1.0, 1e-6, 200).unwrap();
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn golden_reports_exhausted_budget() {
        let m = golden_max(|x| Ok(-x * x), -1.0, 1.0, 1e-12, 5).unwrap();
        assert!(!m.converged);
    }

    #[test]
    fn brent_solves_transcendental_equations() {
        let r = brent_root(|x| Ok(x.cos() - x), 0.0, 1.0, 1e-14, 100).unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-13);
        let r = brent_root(|x| Ok(x * x * x - 2.0), 0.0, 5.0, 1e-14, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
        assert!(brent_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 100).is_err());
        assert_eq!(brent_root(Ok, 0.0, 1.0, 1e-12, 100).unwrap(), 0.0);
    }
}
