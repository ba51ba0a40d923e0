//! Scalar root bracketing, Brent's method and golden-section minimization.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("f({a}) = {fa} and f({b}) = {fb} do not bracket a root")]
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("no sign change found on [{from}, {to}]")]
    NoSignChange { from: f64, to: f64 },
    #[error("function evaluation failed at x = {x}: {message}")]
    Evaluation { x: f64, message: String },
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

/// Brent's method on a bracketing interval. Converges to `|b - a| <= xtol + rtol |x|`.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, rtol: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(RootError::NotBracketed { a, b, fa, fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol + rtol * b.abs());
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
        fb = f(b);
    }
    Err(RootError::NoConvergence { iterations: 200 })
}

/// Walks `[from, to]` in steps of `step` and returns the first interval on which `f`
/// changes sign (or hits zero exactly).
pub fn first_sign_change<F>(mut f: F, from: f64, to: f64, step: f64) -> Result<(f64, f64), RootError>
where
    F: FnMut(f64) -> f64,
{
    let mut x0 = from;
    let mut f0 = f(x0);
    while x0 < to {
        let x1 = (x0 + step).min(to);
        let f1 = f(x1);
        if f0 == 0.0 || f0.signum() != f1.signum() || f1 == 0.0 {
            return Ok((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    Err(RootError::NoSignChange { from, to })
}

/// Golden-section search for a minimum of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section_min<F>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (mut xm, mut fm) = if fc < fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let fx = f(x);
        if fx < fm {
            xm = x;
            fm = fx;
        }
    }
    (xm, fm)
}
