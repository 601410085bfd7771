//! Bracketed scalar root-finding.
//!
//! Brent's method: bisection safety with inverse-quadratic/secant speed.
//! Every root located in this crate comes with a guaranteed sign-change
//! bracket, so an open method (plain Newton) is never needed and the
//! bracket invariant makes failure modes explicit.

use crate::error::{Error, Result};

/// Convergence controls for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct RootTol {
    /// Relative x-tolerance; iteration stops when the bracket is this small
    /// relative to the current iterate.
    pub rel: f64,
    /// Absolute x-tolerance floor (guards brackets straddling 0).
    pub abs: f64,
    /// Iteration ceiling.
    pub max_iter: usize,
}

impl Default for RootTol {
    fn default() -> Self {
        // Tight enough that turning points are pinned essentially to
        // machine precision. The generous iteration ceiling covers roots
        // approaching 0, where the absolute floor forces extra bisections.
        RootTol { rel: 1e-15, abs: 1e-300, max_iter: 1500 }
    }
}

/// Finds a root of `f` in `[a, b]`, which must bracket a sign change
/// (`f(a)·f(b) ≤ 0`).
///
/// Returns the abscissa; the residual `f(root)` is whatever the tolerance
/// left, typically a few ulps of the local scale.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: RootTol) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::BracketFailure(format!(
            "non-finite endpoint values f({a:e}) = {fa:e}, f({b:e}) = {fb:e}"
        )));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{a:e}, {b:e}]: f(a) = {fa:e}, f(b) = {fb:e}"
        )));
    }

    // Invariant: b is the best iterate, a the previous one, c the last
    // iterate with f(c) of opposite sign to f(b).
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = b - a;

    for _ in 0..tol.max_iter {
        if fb.abs() > fc.abs() {
            // Swap so b stays closest to the root.
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.rel * b.abs()).max(tol.abs);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant if a == c).
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min(e.abs() * q.abs()) {
                // Interpolation accepted.
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::BracketFailure(format!("non-finite value f({b:e}) = {fb:e}")));
        }
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(Error::BracketFailure(format!(
        "no convergence within {} iterations (bracket [{:e}, {:e}])",
        tol.max_iter,
        b.min(c),
        b.max(c)
    )))
}

/// Expands `hi` geometrically from `lo` until `f` changes sign, then hands
/// the bracket to [`brent`]. `f(lo)` fixes the reference sign.
pub fn brent_expanding<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    mut hi: f64,
    growth: f64,
    max_expand: usize,
    tol: RootTol,
) -> Result<f64> {
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let mut prev = lo;
    for _ in 0..max_expand {
        let fhi = f(hi);
        if fhi == 0.0 {
            return Ok(hi);
        }
        if fhi.is_finite() && flo.signum() != fhi.signum() {
            return brent(f, prev, hi, tol);
        }
        prev = hi;
        hi *= growth;
    }
    Err(Error::BracketFailure(format!(
        "no sign change found expanding from {lo:e} up to {hi:e}"
    )))
}
