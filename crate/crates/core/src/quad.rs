//! Quadrature kernels.
//!
//! Three integrators cover the crate's needs:
//!
//! * [`gauss_legendre`] nodes/weights (computed once per order by Newton
//!   iteration on the Legendre recurrence, then cached) driving
//!   [`integrate_adaptive`], which doubles the order until two successive
//!   estimates agree to the requested relative tolerance — the workhorse
//!   for desingularized period integrals;
//! * [`trapezoid_periodic`], spectrally accurate for smooth periodic
//!   integrands sampled uniformly over one period;
//! * [`adaptive_simpson`], an independent method used by cross-checks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// One Gauss–Legendre rule: paired `(node, weight)` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Applies the rule to `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        half * sum
    }
}

fn compute_rule(order: usize) -> GaussRule {
    assert!(order >= 2, "Gauss–Legendre order must be at least 2");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in ± pairs; compute the non-negative half.
    // Legendre recurrence for (P_n(x), P_{n-1}(x)).
    let legendre_pair = |x: f64| {
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        (p1, p0)
    };
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, pn1) = legendre_pair(x);
            let dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(0.5) {
                break;
            }
        }
        // Re-evaluate the derivative at the converged abscissa for the weight.
        let (pn, pn1) = legendre_pair(x);
        let dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Returns the cached Gauss–Legendre rule of the given order.
pub fn gauss_legendre(order: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(order).or_insert_with(|| Arc::new(compute_rule(order))).clone()
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    /// Converged integral estimate.
    pub value: f64,
    /// Last inter-order difference, an (over)estimate of the error.
    pub error_estimate: f64,
    /// Order at which the doubling sequence stopped.
    pub order: usize,
}

/// Integrates `f` over `[a, b]` by Gauss–Legendre rules of doubling order
/// (`start_order`, 2·`start_order`, …, `max_order`), stopping when two
/// successive estimates agree to `rel_tol` relative to the result's scale.
///
/// Floating-point noise puts a floor under the inter-order agreement of
/// near-singular integrands; when the agreement stops improving (two
/// consecutive rises) or the order ceiling is hit, the best estimate seen
/// is still returned as long as its error estimate stays within `rel_cap`,
/// and the achieved estimate is reported either way.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    rel_cap: f64,
    start_order: usize,
    max_order: usize,
) -> Result<QuadResult> {
    let mut order = start_order.max(2);
    let mut prev = gauss_legendre(order).integrate(&mut f, a, b);
    let mut best: Option<QuadResult> = None;
    let mut prev_err = f64::INFINITY;
    let mut rises = 0u32;
    while order < max_order {
        order *= 2;
        let next = gauss_legendre(order).integrate(&mut f, a, b);
        let err = (next - prev).abs();
        let scale = next.abs().max(prev.abs()).max(f64::MIN_POSITIVE);
        if err <= rel_tol * scale {
            return Ok(QuadResult { value: next, error_estimate: err, order });
        }
        if best.as_ref().is_none_or(|b| err < b.error_estimate) {
            best = Some(QuadResult { value: next, error_estimate: err, order });
        }
        if err > prev_err {
            rises += 1;
            if rises >= 2 {
                break;
            }
        } else {
            rises = 0;
        }
        prev_err = err;
        prev = next;
    }
    let best = best.ok_or(Error::AccuracyNotReached { estimate: f64::INFINITY, tolerance: rel_tol })?;
    let scale = best.value.abs().max(f64::MIN_POSITIVE);
    if best.error_estimate <= rel_cap * scale {
        Ok(best)
    } else {
        Err(Error::AccuracyNotReached {
            estimate: best.error_estimate / scale,
            tolerance: rel_tol,
        })
    }
}

/// Trapezoid sum for a periodic function sampled uniformly on `[0, period)`
/// (the right endpoint is the wrap-around of the left and must not be
/// duplicated in `samples`). For smooth periodic integrands this converges
/// geometrically in the sample count.
pub fn trapezoid_periodic(samples: &[f64], period: f64) -> f64 {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    mean * period
}

/// Adaptive Simpson integration: an independent cross-check method.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: FnMut(f64) -> f64>(
        f: &mut F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::AccuracyNotReached { estimate: delta.abs(), tolerance: tol });
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, 60)
}
