//! The metric census: for a circle length T, the translation-classes of
//! periodic warping functions, each class one warped metric.
//!
//! A class is either the constant solution (always present) or, for each
//! divisor index j ≥ 1 whose target T/j exceeds the bifurcation threshold,
//! the orbit whose minimal period is exactly T/j — when the period map
//! actually attains that target. The map is bounded on the admissible
//! energy interval (the boundary equilibrium is degenerate, not
//! hyperbolic), so targets beyond its range are reported as `unrealized`
//! rather than silently dropped, and the count reflects what is actually
//! realized.

use crate::error::{Error, Result};
use crate::orbit::{
    energy_for_period, integrate_orbit_auto, DEFAULT_CLOSURE_TOL, DEFAULT_ENERGY_CUTOFF,
};
use crate::period::period;
use crate::potential::{derive_params, raw_system, ModelParams, PotentialSystem};
use crate::profile::{SolutionProfile, MIN_SEGMENTS};
use crate::ricci::{
    harmonic_residual, ode_residual, parallelism_test, ParallelVerdict, DEFAULT_PARALLEL_TOL,
};
use rayon::prelude::*;
use serde::Serialize;

/// Tunable tolerances and resolutions for census construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CensusOptions {
    /// Orbit-closure tolerance after one minimal period (and the match
    /// tolerance for isochronous targets).
    pub closure_tol: f64,
    /// Threshold for the parallel-Ricci verdict.
    pub parallel_tol: f64,
    /// Fraction of c_max bounding the energy search.
    pub energy_cutoff: f64,
    /// Relative tolerance handed to the period quadrature.
    pub quad_rel_tol: f64,
    /// Grid segments per circle length for verification profiles and
    /// integration steps per minimal period for orbits.
    pub samples: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            closure_tol: DEFAULT_CLOSURE_TOL,
            parallel_tol: DEFAULT_PARALLEL_TOL,
            energy_cutoff: DEFAULT_ENERGY_CUTOFF,
            quad_rel_tol: 1e-10,
            samples: 4096,
        }
    }
}

impl CensusOptions {
    /// Rejects out-of-range tolerances.
    pub fn validate(&self) -> Result<()> {
        if !(self.closure_tol > 0.0 && self.closure_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "closure tolerance must be positive, got {}",
                self.closure_tol
            )));
        }
        if !(self.parallel_tol > 0.0 && self.parallel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "parallelism threshold must be positive, got {}",
                self.parallel_tol
            )));
        }
        if !(self.energy_cutoff > 0.0 && self.energy_cutoff < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "energy cutoff must lie in (0, 1), got {}",
                self.energy_cutoff
            )));
        }
        if !(self.quad_rel_tol > 0.0 && self.quad_rel_tol <= 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance must lie in (0, 1e-2], got {}",
                self.quad_rel_tol
            )));
        }
        if self.samples < MIN_SEGMENTS {
            return Err(Error::InvalidParameter(format!(
                "census needs at least {MIN_SEGMENTS} samples, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Which solution family a census row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// The constant (zero-amplitude) solution. Always present; parallel
    /// Ricci tensor.
    Constant,
    /// A genuinely oscillating family with minimal period T/j. Counted.
    Nonconstant,
    /// T/j sits exactly on the bifurcation threshold: the would-be family
    /// has zero amplitude and coincides with the constant. Listed, not
    /// counted.
    Degenerate,
    /// T/j exceeds the threshold but the period map never attains it (the
    /// map is bounded). Listed with the attainable range, not counted.
    Unrealized,
}

/// Residuals and verdicts re-verifying one census family.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FamilyVerification {
    /// Phase-space distance after re-integrating one minimal period.
    pub closure: f64,
    /// Energy drift along that orbit.
    pub energy_drift: f64,
    /// Sup of the Codazzi residual along the profile (harmonic curvature).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codazzi_residual: Option<f64>,
    /// ODE residual with stored (closed) derivatives.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_closure_residual: Option<f64>,
    /// ODE residual with finite-difference second derivatives.
    pub ode_fd_residual: f64,
    /// Grid size the finite-difference residual (and the profile residuals
    /// generally) were measured on. Exceeds the requested sample count when
    /// the verification grid had to be densified to resolve the residual;
    /// re-solving with this sample count reproduces the numbers exactly.
    pub fd_samples: usize,
    /// Parallel-Ricci verdict along the profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<ParallelVerdict>,
    /// Sup norm behind the verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel_sup: Option<f64>,
}

/// One translation-class of solutions.
#[derive(Debug, Clone, Serialize)]
pub struct Family {
    /// Class of the family.
    pub kind: FamilyKind,
    /// Divisor index (minimal period T/j); absent for the constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    /// Energy in normalized units (the physical energy is α²β²·c); 0 for
    /// zero-amplitude families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Minimal period actually realized.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_period: Option<f64>,
    /// Verification residuals (present for realized families).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<FamilyVerification>,
    /// Human-readable context: why unrealized, representative-energy
    /// remarks, and similar.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Which system family the census enumerates.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum CensusModel {
    /// Warped metrics with harmonic curvature: the physical-variable
    /// warping ODE for the given parameters.
    Warped {
        /// Geometric inputs.
        params: ModelParams,
    },
    /// Constant-scalar-curvature (pseudo-cylindric) conformal family.
    Yamabe {
        /// Dimension.
        n: u32,
    },
}

/// The census result.
#[derive(Debug, Clone, Serialize)]
pub struct MetricCensus {
    /// Circle length.
    #[serde(rename = "T")]
    pub circle_length: f64,
    /// System enumerated.
    pub model: CensusModel,
    /// Bifurcation threshold: the minimal circle length admitting
    /// nonconstant solutions (2π/√C here; 2π/√(n−2) for the conformal
    /// family).
    pub threshold: f64,
    /// 1 (constant) + number of verified nonconstant families.
    pub count: usize,
    /// All families, constant first, then ascending j (including
    /// degenerate markers and unrealized targets).
    pub families: Vec<Family>,
    /// Pre-scan results and per-family warnings.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// Enumerates the divisor indices j with T/j strictly above the threshold,
/// plus the index (if any) sitting on the threshold to within 1e−12 of an
/// integer ratio — the zero-amplitude boundary case.
pub(crate) fn divisor_plan(t: f64, threshold: f64) -> Result<(Vec<u32>, Option<u32>)> {
    let ratio = t / threshold;
    if ratio > 1e4 {
        return Err(Error::InvalidParameter(format!(
            "circle length {t} spans {ratio:.1} thresholds; refusing to enumerate more than 10000 families"
        )));
    }
    let rounded = ratio.round();
    let degenerate =
        if rounded >= 1.0 && (ratio - rounded).abs() < 1e-12 { Some(rounded as u32) } else { None };
    let mut admissible = Vec::new();
    let mut j = 1u32;
    while t / f64::from(j) > threshold {
        if Some(j) != degenerate {
            admissible.push(j);
        }
        j += 1;
    }
    Ok((admissible, degenerate))
}

/// Builds the zero-amplitude boundary marker row.
pub(crate) fn degenerate_family(j: u32, threshold: f64) -> Family {
    Family {
        kind: FamilyKind::Degenerate,
        j: Some(j),
        c: Some(0.0),
        minimal_period: Some(threshold),
        verification: None,
        note: Some(
            "T/j equals the bifurcation threshold: the family has zero amplitude and \
             coincides with the constant solution; listed, not counted"
                .into(),
        ),
    }
}

/// Builds an unrealized-target row from the solver error.
pub(crate) fn unrealized_family(j: u32, target: f64, why: &Error) -> Family {
    Family {
        kind: FamilyKind::Unrealized,
        j: Some(j),
        c: None,
        minimal_period: None,
        verification: None,
        note: Some(format!("target minimal period {target} not realized: {why}")),
    }
}

/// Assembles the census envelope: count = 1 + verified nonconstant rows.
pub(crate) fn assemble_census(
    circle_length: f64,
    model: CensusModel,
    threshold: f64,
    families: Vec<Family>,
    diagnostics: Vec<String>,
) -> MetricCensus {
    let count = 1 + families
        .iter()
        .filter(|f| f.kind == FamilyKind::Nonconstant && f.verification.is_some())
        .count();
    MetricCensus { circle_length, model, threshold, count, families, diagnostics }
}

/// Scans the period map over the admissible interval: returns the attained
/// periods (on a log-spaced energy grid) and a monotonicity diagnostic
/// line.
pub(crate) fn period_range_scan<S: PotentialSystem>(
    sys: &S,
    opts: &CensusOptions,
) -> Result<(Vec<f64>, String)> {
    let c_max = sys.energy_max();
    let (lo, hi) = (c_max * 1e-8, c_max * opts.energy_cutoff);
    let count = 17;
    let energies: Vec<f64> = (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect();
    let mut periods = Vec::with_capacity(count);
    for &c in &energies {
        periods.push(period(sys, c, opts.quad_rel_tol)?.period);
    }
    let increasing = periods.windows(2).all(|w| w[1] > w[0]);
    let decreasing = periods.windows(2).all(|w| w[1] < w[0]);
    let direction = if sys.isochronous() {
        "constant (isochronous)"
    } else if increasing {
        "strictly increasing"
    } else if decreasing {
        "strictly decreasing"
    } else {
        "NOT monotone on the scan grid"
    };
    let t_min = periods.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = periods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let line = format!(
        "period map pre-scan ({count} energies up to {}·c_max): {direction}; attained periods in [{t_min}, {t_max}]",
        opts.energy_cutoff
    );
    Ok((periods, line))
}

/// Full verification of one realized family of the warped-metric system.
fn verify_family(
    params: &ModelParams,
    c_phys: f64,
    circle_length: f64,
    opts: &CensusOptions,
) -> Result<(FamilyVerification, f64)> {
    let sys = raw_system(params)?;
    let derived = derive_params(params)?;
    let c_norm = c_phys / (derived.alpha * derived.alpha * derived.beta * derived.beta);
    let orbit = integrate_orbit_auto(&sys, c_phys, opts.samples, opts.closure_tol)?;
    // The finite-difference residual is limited by the stored sample spacing
    // (O(dt²·sup|h⁗|), and h⁗ grows without bound as the inner turning point
    // approaches the degenerate boundary h = 0). Densify the verification
    // grid until the residual is resolution-independent or stops improving.
    let mut fd_samples = opts.samples;
    let mut profile = SolutionProfile::from_energy(params, c_norm, circle_length, fd_samples)?;
    let mut ode = ode_residual(&profile)?;
    let mut candidate = fd_samples;
    while ode.finite_difference > 1e-6 && candidate < opts.samples.saturating_mul(16) {
        candidate *= 2;
        let denser = SolutionProfile::from_energy(params, c_norm, circle_length, candidate)?;
        let denser_ode = ode_residual(&denser)?;
        if denser_ode.finite_difference >= ode.finite_difference {
            break;
        }
        profile = denser;
        ode = denser_ode;
        fd_samples = candidate;
    }
    let codazzi = harmonic_residual(&profile)?;
    let par = parallelism_test(&profile, opts.parallel_tol)?;
    Ok((
        FamilyVerification {
            closure: orbit.closure,
            energy_drift: orbit.energy_drift,
            codazzi_residual: Some(codazzi),
            ode_closure_residual: Some(ode.closure),
            ode_fd_residual: ode.finite_difference,
            fd_samples,
            parallel: Some(par.verdict),
            parallel_sup: Some(par.sup_norm),
        },
        orbit.period,
    ))
}

/// The constant family h ≡ α with its (trivial) verification.
fn constant_family(params: &ModelParams, circle_length: f64, opts: &CensusOptions) -> Result<Family> {
    let derived = derive_params(params)?;
    let profile = SolutionProfile::constant(params, circle_length, opts.samples.min(1024))?;
    let codazzi = harmonic_residual(&profile)?;
    let ode = ode_residual(&profile)?;
    let par = parallelism_test(&profile, opts.parallel_tol)?;
    Ok(Family {
        kind: FamilyKind::Constant,
        j: None,
        c: Some(0.0),
        minimal_period: None,
        verification: Some(FamilyVerification {
            closure: 0.0,
            energy_drift: 0.0,
            codazzi_residual: Some(codazzi),
            ode_closure_residual: Some(ode.closure),
            ode_fd_residual: ode.finite_difference,
            fd_samples: opts.samples,
            parallel: Some(par.verdict),
            parallel_sup: Some(par.sup_norm),
        }),
        note: Some(format!("constant warping h ≡ α = {}", derived.alpha)),
    })
}

/// Resolves one divisor index into a census row. Solver failures become
/// `unrealized` rows; verification failures are flagged in the note.
fn solve_family(
    params: &ModelParams,
    circle_length: f64,
    j: u32,
    threshold: f64,
    opts: &CensusOptions,
) -> Family {
    let target = circle_length / f64::from(j);
    let sys = match raw_system(params) {
        Ok(s) => s,
        Err(e) => return unrealized_family(j, target, &e),
    };
    let scale = {
        let d = derive_params(params).expect("validated above");
        d.alpha * d.alpha * d.beta * d.beta
    };

    if sys.isochronous() {
        // Every energy realizes exactly the threshold period. A divisor
        // whose target matches it (to the closure tolerance) names a whole
        // continuum of solutions; report one representative energy.
        if (target - threshold).abs() < opts.closure_tol {
            let c_phys = sys.energy_max() * 0.5;
            return match verify_family(params, c_phys, circle_length, opts) {
                Ok((verification, minimal_period)) => Family {
                    kind: FamilyKind::Nonconstant,
                    j: Some(j),
                    c: Some(c_phys / scale),
                    minimal_period: Some(minimal_period),
                    verification: Some(verification),
                    note: Some(
                        "isochronous continuum: every admissible energy has this minimal \
                         period; one representative energy shown"
                            .into(),
                    ),
                },
                Err(e) => unrealized_family(j, target, &e),
            };
        }
        return unrealized_family(
            j,
            target,
            &Error::Isochronous { target },
        );
    }

    match energy_for_period(&sys, target, opts.energy_cutoff, opts.quad_rel_tol) {
        Ok(c_phys) => match verify_family(params, c_phys, circle_length, opts) {
            Ok((verification, minimal_period)) => Family {
                kind: FamilyKind::Nonconstant,
                j: Some(j),
                c: Some(c_phys / scale),
                minimal_period: Some(minimal_period),
                verification: Some(verification),
                note: None,
            },
            Err(e) => Family {
                kind: FamilyKind::Nonconstant,
                j: Some(j),
                c: Some(c_phys / scale),
                minimal_period: None,
                verification: None,
                note: Some(format!("energy found but verification failed: {e}")),
            },
        },
        Err(e) => unrealized_family(j, target, &e),
    }
}

/// Enumerates the warped-metric census for circle length `t`.
pub fn census(params: &ModelParams, t: f64, opts: &CensusOptions) -> Result<MetricCensus> {
    opts.validate()?;
    params.validate()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "circle length must be positive and finite, got {t}"
        )));
    }
    let derived = derive_params(params)?;
    let threshold = derived.t_min;
    let (admissible, degenerate) = divisor_plan(t, threshold)?;

    let mut diagnostics = Vec::new();
    let sys = raw_system(params)?;
    let (_, scan_line) = period_range_scan(&sys, opts)?;
    diagnostics.push(scan_line);

    let mut families = vec![constant_family(params, t, opts)?];
    let mut solved: Vec<Family> = admissible
        .par_iter()
        .map(|&j| solve_family(params, t, j, threshold, opts))
        .collect();
    if let Some(k) = degenerate {
        solved.push(degenerate_family(k, threshold));
    }
    solved.sort_by_key(|f| f.j.unwrap_or(0));
    for f in &solved {
        if let Some(note) = &f.note {
            if f.kind == FamilyKind::Unrealized {
                diagnostics.push(format!("j = {}: {note}", f.j.unwrap_or(0)));
            }
        }
    }
    families.extend(solved);

    Ok(assemble_census(t, CensusModel::Warped { params: *params }, threshold, families, diagnostics))
}
