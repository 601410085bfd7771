//! Symplectic orbit integration, inversion of the period map, and the
//! bifurcation values of the constant-solution branch.
//!
//! The phase-plane systems here are conservative, x″ + φ(x) = 0 with energy
//! ½v² + G(x), so the integrator of choice is a fixed-step composition
//! scheme that preserves a nearby Hamiltonian exactly: energy drift stays
//! bounded over arbitrarily many periods instead of accumulating secularly,
//! and orbit closure after one minimal period becomes a sharp consistency
//! test between the integrator and the period quadrature.

use crate::error::{Error, Result};
use crate::period::period;
use crate::potential::{derive_params, ModelParams, PotentialSystem};
use crate::rootfind::{brent, RootTol};
use serde::Serialize;

/// Default closure tolerance after one minimal period.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-8;

/// Default fraction of `c_max` used as the upper search bound when
/// inverting the period map. The period map is bounded on the admissible
/// interval (no homoclinic divergence — the boundary equilibrium is
/// degenerate), so the top of the range carries genuinely distinct
/// solutions and the cutoff is kept close to 1.
pub const DEFAULT_ENERGY_CUTOFF: f64 = 0.999_999;

/// One phase-space sample along an orbit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitSample {
    /// Time.
    pub t: f64,
    /// Position.
    pub x: f64,
    /// Velocity.
    pub v: f64,
}

/// A closed orbit at energy `c`, sampled over one minimal period.
#[derive(Debug, Clone, Serialize)]
pub struct Orbit {
    /// Energy level.
    #[serde(rename = "c")]
    pub energy: f64,
    /// Minimal period (from the period quadrature, not the integrator).
    #[serde(rename = "T")]
    pub period: f64,
    /// `steps + 1` samples covering [0, T]; first starts at the right
    /// turning point (b, 0).
    pub samples: Vec<OrbitSample>,
    /// max |½v² + G(x) − c| over the samples.
    pub energy_drift: f64,
    /// Phase-space distance between the first and last sample.
    pub closure: f64,
}

/// One step of the velocity-Verlet (leapfrog) map with step `dt`.
#[inline]
fn leapfrog<S: PotentialSystem>(sys: &S, x: &mut f64, v: &mut f64, dt: f64) {
    *v -= 0.5 * dt * sys.phi(*x);
    *x += dt * *v;
    *v -= 0.5 * dt * sys.phi(*x);
}

/// One step of the order-4 triple-jump composition of the leapfrog map:
/// substep weights w₁, w₀ = 1 − 2w₁ with w₁ = 1/(2 − 2^{1/3}).
///
/// Exposed as the low-level stepping primitive so callers can drive
/// trajectories over arbitrary horizons (several periods, drift studies)
/// with the same symplectic map used internally.
#[inline]
pub fn composed_step<S: PotentialSystem>(sys: &S, x: &mut f64, v: &mut f64, dt: f64) {
    let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    let w0 = 1.0 - 2.0 * w1;
    leapfrog(sys, x, v, w1 * dt);
    leapfrog(sys, x, v, w0 * dt);
    leapfrog(sys, x, v, w1 * dt);
}

/// Integrates one minimal period of the orbit at energy `c`, starting from
/// the right turning point (b, 0), with `steps` fixed steps of the order-4
/// composition scheme. Errors with [`Error::NonClosure`] when the final
/// state misses the initial one by more than `closure_tol`.
pub fn integrate_orbit<S: PotentialSystem>(
    sys: &S,
    c: f64,
    steps: usize,
    closure_tol: f64,
) -> Result<Orbit> {
    if steps < 4 {
        return Err(Error::InvalidParameter(format!(
            "orbit integration needs at least 4 steps per period, got {steps}"
        )));
    }
    let sample = period(sys, c, 1e-12)?;
    let t_period = sample.period;
    let dt = t_period / steps as f64;

    let (mut x, mut v) = (sample.turning.b, 0.0);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut drift = 0.0f64;
    samples.push(OrbitSample { t: 0.0, x, v });
    for i in 1..=steps {
        composed_step(sys, &mut x, &mut v, dt);
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::PositivityViolation(format!(
                "orbit left the positive half-line at step {i} (x = {x:e})"
            )));
        }
        drift = drift.max((0.5 * v * v + sys.potential(x) - c).abs());
        samples.push(OrbitSample { t: i as f64 * dt, x, v });
    }

    let first = samples[0];
    let last = samples[steps];
    let closure = ((last.x - first.x).powi(2) + (last.v - first.v).powi(2)).sqrt();
    if closure > closure_tol {
        return Err(Error::NonClosure { distance: closure, tolerance: closure_tol });
    }
    Ok(Orbit { energy: c, period: t_period, samples, energy_drift: drift, closure })
}

/// Like [`integrate_orbit`], but doubles the step count (up to 256× the
/// hint) until the orbit closes to `closure_tol`. Near the top of the
/// energy range the restoring force has an unbounded derivative at the
/// inner turning point, and the step count a fixed budget needs there is
/// not knowable in advance.
pub fn integrate_orbit_auto<S: PotentialSystem>(
    sys: &S,
    c: f64,
    steps_hint: usize,
    closure_tol: f64,
) -> Result<Orbit> {
    let mut steps = steps_hint;
    let mut last_err = None;
    while steps <= steps_hint.saturating_mul(256) {
        match integrate_orbit(sys, c, steps, closure_tol) {
            Ok(orbit) => return Ok(orbit),
            Err(e @ Error::NonClosure { .. }) => last_err = Some(e),
            Err(other) => return Err(other),
        }
        steps *= 2;
    }
    Err(last_err.expect("loop ran at least once"))
}

/// Inverts the period map: finds the energy whose minimal period equals
/// `t_target`, searching `(0, cutoff·c_max]`.
///
/// The map's direction is detected rather than assumed — it rises for
/// n ≥ 5 but *falls* for n = 3 — and targets outside the attained range
/// are reported with that range. For isochronous systems (n = 4) the
/// inversion is ill-posed and errors unconditionally.
pub fn energy_for_period<S: PotentialSystem>(
    sys: &S,
    t_target: f64,
    cutoff: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "energy cutoff must lie in (0, 1), got {cutoff}"
        )));
    }
    if !(t_target.is_finite() && t_target > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target period must be positive and finite, got {t_target}"
        )));
    }
    if sys.isochronous() {
        return Err(Error::Isochronous { target: t_target });
    }

    // Small-amplitude limit 2π/√(φ′(center)) — the period's one-sided
    // boundary value at c → 0⁺.
    let t_limit = std::f64::consts::TAU / sys.phi_prime(sys.center()).sqrt();
    let mut c_lo = sys.energy_max() * 1e-12;
    let c_hi = sys.energy_max() * cutoff;
    let mut t_lo = period(sys, c_lo, rel_tol)?.period;
    let t_hi = period(sys, c_hi, rel_tol)?.period;

    if t_hi >= t_limit {
        // Increasing map.
        if t_target <= t_limit {
            return Err(Error::TargetBelowMinimum { target: t_target, limit: t_limit });
        }
        if t_target > t_hi {
            return Err(Error::TargetUnattainable { target: t_target, lo: t_limit, hi: t_hi });
        }
        // Targets barely above the limit sit below T(c_lo): walk the lower
        // bracket down until it straddles.
        while t_lo > t_target {
            c_lo *= 1e-3;
            if c_lo < 1e-280 {
                return Err(Error::TargetBelowMinimum { target: t_target, limit: t_limit });
            }
            t_lo = period(sys, c_lo, rel_tol)?.period;
        }
    } else {
        // Decreasing map: attained range is [T(c_hi), T(c_lo)) ⊂ (t_hi, t_limit).
        if t_target >= t_limit || t_target < t_hi {
            return Err(Error::TargetUnattainable { target: t_target, lo: t_hi, hi: t_limit });
        }
        while t_lo < t_target {
            c_lo *= 1e-3;
            if c_lo < 1e-280 {
                return Err(Error::TargetUnattainable {
                    target: t_target,
                    lo: t_hi,
                    hi: t_limit,
                });
            }
            t_lo = period(sys, c_lo, rel_tol)?.period;
        }
    }

    // Monotone on the bracket: solve T(c) = t_target.
    let first_failure = std::cell::RefCell::new(None);
    let objective = |cc: f64| match period(sys, cc, rel_tol) {
        Ok(s) => s.period - t_target,
        Err(e) => {
            first_failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let root = brent(objective, c_lo, c_hi, RootTol::default());
    if let Some(e) = first_failure.into_inner() {
        return Err(e);
    }
    let c = root?;

    let achieved = period(sys, c, rel_tol)?.period;
    let miss = (achieved - t_target).abs();
    if miss > 1e-9 {
        return Err(Error::AccuracyNotReached { estimate: miss, tolerance: 1e-9 });
    }
    Ok(c)
}

/// A branch point of the constant-solution family: at circle length `T_k`
/// a branch of nonconstant periodic solutions detaches from the constant
/// solution `u_k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BifurcationPoint {
    /// Branch index.
    pub k: u32,
    /// Circle length at the branch point, 2πk/√C.
    #[serde(rename = "T_k")]
    pub t_k: f64,
    /// The constant solution value (α for the physical system).
    pub u_k: f64,
}

/// The bifurcation values T_k = 2πk/√C, k = 1..k_max, each paired with the
/// constant solution α. The linearization of the physical system at α has
/// φ′(α) = C regardless of n, so the thresholds carry no n-dependence.
pub fn bifurcation_points(params: &ModelParams, k_max: u32) -> Result<Vec<BifurcationPoint>> {
    let derived = derive_params(params)?;
    Ok((1..=k_max)
        .map(|k| BifurcationPoint {
            k,
            t_k: std::f64::consts::TAU * f64::from(k) / params.c.sqrt(),
            u_k: derived.alpha,
        })
        .collect())
}
