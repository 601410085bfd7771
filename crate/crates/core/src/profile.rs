//! Sampled periodic solutions of the warping ODE, with the derivative
//! chains the curvature formulas consume.
//!
//! A profile stores one circle length T of a solution h > 0 on a closed
//! uniform grid t₀ = 0, …, t_m = T (the endpoint sample duplicates the
//! start up to the periodicity defect), together with h′, h″, h‴ and the
//! warping exponent chain q = (4/n)·ln h, for which e^q = h^{4/n}.
//!
//! Derivatives come from one of three sources, chosen by constructor:
//! closed through the ODE itself (solutions produced in-house), supplied
//! analytically (closed-form oracles and perturbation studies), or
//! recomputed by periodic finite differences (externally supplied time
//! series, where nothing else is available).

use crate::error::{Error, Result};
use crate::orbit::composed_step;
use crate::period::turning_points;
use crate::potential::{derive_params, raw_system, ModelParams, PotentialSystem};
use serde::Serialize;

/// Fewest grid segments a profile may have: enough for the five-point
/// periodic stencils and a meaningful periodicity check.
pub const MIN_SEGMENTS: usize = 16;

/// A T-periodic solution sampled on a closed uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionProfile {
    /// Geometric inputs the solution belongs to.
    pub params: ModelParams,
    /// Circle length covered by the grid (j minimal periods for the j-th
    /// census family).
    #[serde(rename = "T")]
    pub period: f64,
    /// Sample times 0 = t₀ < … < t_m = T.
    pub t: Vec<f64>,
    /// Warping function values, all > 0.
    pub h: Vec<f64>,
    /// First derivative h′.
    pub h1: Vec<f64>,
    /// Second derivative h″.
    pub h2: Vec<f64>,
    /// Third derivative h‴.
    pub h3: Vec<f64>,
    /// Warping exponent q = (4/n)·ln h.
    pub q: Vec<f64>,
    /// q′ = (4/n)·h′/h.
    pub q1: Vec<f64>,
    /// q″ = (4/n)·(h″/h − (h′/h)²).
    pub q2: Vec<f64>,
    /// q‴ = (4/n)·(h‴/h − 3h′h″/h² + 2(h′/h)³).
    pub q3: Vec<f64>,
    /// max(|h(T) − h(0)|, |h′(T) − h′(0)|): how far the stored grid is from
    /// an exactly periodic function.
    pub periodicity_defect: f64,
}

/// Computes the q-chain from the h-chain at one sample.
fn q_chain_at(n: f64, h: f64, h1: f64, h2: f64, h3: f64) -> (f64, f64, f64, f64) {
    let s = 4.0 / n;
    let r1 = h1 / h;
    let r2 = h2 / h;
    let r3 = h3 / h;
    (s * h.ln(), s * r1, s * (r2 - r1 * r1), s * (r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1))
}

/// h″ and h‴ closed through the ODE:
/// h″ = (nR/(4(n−1)))·h^{1−4/n} − (n/4)C·h, and differentiating once,
/// h‴ = (1−4/n)(nR/(4(n−1)))·h^{−4/n}·h′ − (n/4)C·h′.
fn ode_closure(params: &ModelParams, h: f64, h1: f64) -> (f64, f64) {
    let n = f64::from(params.n);
    let k = n * params.scal / (4.0 * (n - 1.0));
    let e = 1.0 - 4.0 / n;
    let spring = 0.25 * n * params.c;
    let h2 = k * h.powf(e) - spring * h;
    let h3 = e * k * h.powf(e - 1.0) * h1 - spring * h1;
    (h2, h3)
}

impl SolutionProfile {
    /// Number of stored samples (including the duplicated endpoint).
    pub fn len(&self) -> usize {
        self.t.len()
    }

    /// True when the profile holds no samples (never for validated ones).
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Number of uniform grid segments m = len − 1.
    pub fn segments(&self) -> usize {
        self.t.len() - 1
    }

    /// Peak-to-peak amplitude of h.
    pub fn amplitude(&self) -> f64 {
        let lo = self.h.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Largest |h′| over the grid.
    pub fn max_abs_h1(&self) -> f64 {
        self.h1.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Builds the constant profile h ≡ α.
    pub fn constant(params: &ModelParams, t_total: f64, count: usize) -> Result<Self> {
        let derived = derive_params(params)?;
        Self::from_closures(params, t_total, count, |_| [derived.alpha, 0.0, 0.0, 0.0])
    }

    /// Integrates the physical-variable ODE at normalized energy `c_norm`
    /// over total time `t_total` (one circle length; j minimal periods for
    /// census family j) with `count` fixed steps of the order-4 symplectic
    /// composition, starting at the right turning point. Derivatives are
    /// closed through the ODE.
    pub fn from_energy(
        params: &ModelParams,
        c_norm: f64,
        t_total: f64,
        count: usize,
    ) -> Result<Self> {
        check_segments(count)?;
        if !(t_total.is_finite() && t_total > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "profile needs a positive circle length, got {t_total}"
            )));
        }
        let sys = raw_system(params)?;
        let c_phys = sys.energy_from_normalized(c_norm);
        sys.check_energy(c_phys)?;
        let tp = turning_points(&sys, c_phys)?;

        // Integrate with `refine` substeps per stored sample, doubling the
        // refinement until the wrap defect stops being integration-limited.
        // Near the top of the energy range the force derivative blows up at
        // the inner turning point and a fixed budget cannot be sized in
        // advance.
        let mut refine = 1usize;
        let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        while refine <= 256 {
            let dt = t_total / (count * refine) as f64;
            let (mut x, mut v) = (tp.b, 0.0);
            let mut h = Vec::with_capacity(count + 1);
            let mut h1 = Vec::with_capacity(count + 1);
            h.push(x);
            h1.push(v);
            'outer: for i in 1..=count {
                for _ in 0..refine {
                    composed_step(&sys, &mut x, &mut v, dt);
                    if x <= 0.0 || !x.is_finite() {
                        if best.is_some() {
                            break 'outer;
                        }
                        return Err(Error::PositivityViolation(format!(
                            "profile integration left the positive half-line at sample {i} (h = {x:e})"
                        )));
                    }
                }
                h.push(x);
                h1.push(v);
            }
            if h.len() == count + 1 {
                let defect = (h[count] - h[0]).abs().max((h1[count] - h1[0]).abs());
                let improved = best.as_ref().map_or(true, |(_, _, d)| defect < *d);
                if improved {
                    best = Some((h, h1, defect));
                }
                if defect < 1e-9 || !improved {
                    break;
                }
            }
            refine *= 2;
        }
        let (h, h1, _) = best.expect("at least one refinement level ran to completion");
        let t = uniform_grid(t_total, count);
        Self::assemble_from_ode(params, t_total, t, h, h1)
    }

    /// Builds a profile from an analytic description: `chain(t)` returns
    /// [h, h′, h″, h‴] at time t. Used for closed-form oracles and for
    /// perturbation studies where the derivative bookkeeping must follow
    /// the perturbed function, not the ODE.
    pub fn from_closures(
        params: &ModelParams,
        t_total: f64,
        count: usize,
        chain: impl Fn(f64) -> [f64; 4],
    ) -> Result<Self> {
        check_segments(count)?;
        params.validate()?;
        if !(t_total.is_finite() && t_total > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "profile needs a positive circle length, got {t_total}"
            )));
        }
        let t = uniform_grid(t_total, count);
        let mut cols: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(count + 1));
        for &ti in &t {
            let values = chain(ti);
            for (col, value) in cols.iter_mut().zip(values) {
                col.push(value);
            }
        }
        let [h, h1, h2, h3] = cols;
        Self::assemble(params, t_total, t, h, h1, h2, h3)
    }

    /// Builds a profile from a bare periodic time series (t, h) on a
    /// closed uniform grid (first and last samples one period apart);
    /// h′, h″, h‴ are recomputed by periodic central finite differences.
    pub fn from_time_series(params: &ModelParams, t: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        params.validate()?;
        let t_total = check_grid(&t, &h)?;
        let m = t.len() - 1;
        let dt = t_total / m as f64;
        let at = |i: isize| h[(i.rem_euclid(m as isize)) as usize];
        let mut h1 = Vec::with_capacity(m + 1);
        let mut h2 = Vec::with_capacity(m + 1);
        let mut h3 = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let i = i as isize;
            h1.push((at(i + 1) - at(i - 1)) / (2.0 * dt));
            h2.push((at(i + 1) - 2.0 * at(i) + at(i - 1)) / (dt * dt));
            h3.push((at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2))
                / (2.0 * dt * dt * dt));
        }
        Self::assemble(params, t_total, t, h, h1, h2, h3)
    }

    /// Builds a profile from externally supplied value *and* derivative
    /// columns on a closed uniform grid.
    pub fn from_columns(
        params: &ModelParams,
        t: Vec<f64>,
        h: Vec<f64>,
        h1: Vec<f64>,
        h2: Vec<f64>,
        h3: Vec<f64>,
    ) -> Result<Self> {
        params.validate()?;
        let t_total = check_grid(&t, &h)?;
        for (name, col) in [("h1", &h1), ("h2", &h2), ("h3", &h3)] {
            if col.len() != t.len() {
                return Err(Error::InvalidProfile(format!(
                    "column {name} has {} entries, expected {}",
                    col.len(),
                    t.len()
                )));
            }
        }
        Self::assemble(params, t_total, t, h, h1, h2, h3)
    }

    fn assemble_from_ode(
        params: &ModelParams,
        t_total: f64,
        t: Vec<f64>,
        h: Vec<f64>,
        h1: Vec<f64>,
    ) -> Result<Self> {
        let (mut h2, mut h3) = (Vec::with_capacity(h.len()), Vec::with_capacity(h.len()));
        for (&hi, &h1i) in h.iter().zip(&h1) {
            let (a, b) = ode_closure(params, hi, h1i);
            h2.push(a);
            h3.push(b);
        }
        Self::assemble(params, t_total, t, h, h1, h2, h3)
    }

    fn assemble(
        params: &ModelParams,
        t_total: f64,
        t: Vec<f64>,
        h: Vec<f64>,
        h1: Vec<f64>,
        h2: Vec<f64>,
        h3: Vec<f64>,
    ) -> Result<Self> {
        let n = f64::from(params.n);
        for (i, &hi) in h.iter().enumerate() {
            if !(hi.is_finite() && hi > 0.0) {
                return Err(Error::PositivityViolation(format!(
                    "h must be positive at every sample; h[{i}] = {hi:e}"
                )));
            }
        }
        let m = t.len() - 1;
        let mut q = Vec::with_capacity(m + 1);
        let mut q1 = Vec::with_capacity(m + 1);
        let mut q2 = Vec::with_capacity(m + 1);
        let mut q3 = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let (a, b, c, d) = q_chain_at(n, h[i], h1[i], h2[i], h3[i]);
            q.push(a);
            q1.push(b);
            q2.push(c);
            q3.push(d);
        }
        let periodicity_defect = (h[m] - h[0]).abs().max((h1[m] - h1[0]).abs());
        Ok(SolutionProfile {
            params: *params,
            period: t_total,
            t,
            h,
            h1,
            h2,
            h3,
            q,
            q1,
            q2,
            q3,
            periodicity_defect,
        })
    }

    /// Enforces the structural invariants: positivity (already guaranteed
    /// by construction), e^q = h^{4/n} to 1e−12, and periodicity of the
    /// stored grid to `tol` (1e−8 for census profiles).
    pub fn validate(&self, tol: f64) -> Result<()> {
        let s = 4.0 / f64::from(self.params.n);
        for i in 0..self.len() {
            let defect = (self.q[i].exp() - self.h[i].powf(s)).abs();
            if defect > 1e-12 * self.h[i].powf(s).max(1.0) {
                return Err(Error::InvalidProfile(format!(
                    "warping exponent inconsistent at sample {i}: |e^q − h^(4/n)| = {defect:e}"
                )));
            }
        }
        if self.periodicity_defect > tol {
            return Err(Error::InvalidProfile(format!(
                "profile is not periodic: wrap defect {:e} exceeds {tol:e}",
                self.periodicity_defect
            )));
        }
        Ok(())
    }
}

fn check_segments(count: usize) -> Result<()> {
    if count < MIN_SEGMENTS {
        return Err(Error::InvalidParameter(format!(
            "profile needs at least {MIN_SEGMENTS} grid segments, got {count}"
        )));
    }
    Ok(())
}

fn uniform_grid(t_total: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| t_total * i as f64 / count as f64).collect()
}

/// Validates an externally supplied closed uniform grid and returns its
/// total length T.
pub(crate) fn check_grid(t: &[f64], h: &[f64]) -> Result<f64> {
    if t.len() != h.len() {
        return Err(Error::InvalidProfile(format!(
            "t and h columns differ in length: {} vs {}",
            t.len(),
            h.len()
        )));
    }
    if t.len() < MIN_SEGMENTS + 1 {
        return Err(Error::InvalidProfile(format!(
            "profile needs at least {} samples on a closed grid, got {}",
            MIN_SEGMENTS + 1,
            t.len()
        )));
    }
    let m = t.len() - 1;
    let t_total = t[m] - t[0];
    if !(t_total.is_finite() && t_total > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "grid must advance in time: t runs from {} to {}",
            t[0], t[m]
        )));
    }
    let dt = t_total / m as f64;
    for (i, &ti) in t.iter().enumerate() {
        if (ti - t[0] - i as f64 * dt).abs() > 1e-9 * t_total {
            return Err(Error::InvalidProfile(format!(
                "grid is not uniform at sample {i}: t = {ti}, expected {}",
                t[0] + i as f64 * dt
            )));
        }
    }
    Ok(t_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn linear_params() -> ModelParams {
        ModelParams::new(4, 3.0, 1.0).unwrap()
    }

    #[test]
    fn constant_profile_is_flat() {
        let params = ModelParams::new(5, 16.0, 1.0).unwrap();
        let p = SolutionProfile::constant(&params, 7.0, 64).unwrap();
        p.validate(1e-8).unwrap();
        let alpha = 4f64.powf(1.25);
        for i in 0..p.len() {
            assert_abs_diff_eq!(p.h[i], alpha, epsilon = 1e-14);
            assert_eq!(p.h1[i], 0.0);
            assert_eq!(p.h2[i], 0.0);
            assert_eq!(p.h3[i], 0.0);
            assert_abs_diff_eq!(p.q[i], 0.8 * alpha.ln(), epsilon = 1e-14);
        }
        assert_eq!(p.amplitude(), 0.0);
    }

    #[test]
    fn linear_case_matches_closed_form() {
        // n=4, R=3, C=1: α = β = 1 and the ODE is h″ = 1 − h, so starting
        // at the right turning point h(t) = 1 + √(2c)·cos t.
        let params = linear_params();
        let c = 0.125f64;
        let amp = (2.0 * c).sqrt();
        let p = SolutionProfile::from_energy(&params, c, std::f64::consts::TAU, 4096).unwrap();
        p.validate(1e-8).unwrap();
        for (i, &ti) in p.t.iter().enumerate() {
            assert_abs_diff_eq!(p.h[i], 1.0 + amp * ti.cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(p.h1[i], -amp * ti.sin(), epsilon = 1e-8);
            assert_abs_diff_eq!(p.h2[i], -amp * ti.cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(p.h3[i], amp * ti.sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn nonconstant_profile_has_motion_and_symmetry() {
        let params = ModelParams::new(5, 16.0, 1.0).unwrap();
        // One minimal period at a moderate normalized energy: T_phys =
        // T_norm/β.
        let sys = raw_system(&params).unwrap();
        let c_phys = sys.energy_from_normalized(0.2);
        let t_phys = crate::period::period(&sys, c_phys, 1e-12).unwrap().period;
        let p = SolutionProfile::from_energy(&params, 0.2, t_phys, 4096).unwrap();
        p.validate(1e-8).unwrap();
        assert!(p.max_abs_h1() > 0.1);
        // Even about the starting maximum: h(T − s) = h(s).
        let m = p.segments();
        for i in 0..=m {
            assert_abs_diff_eq!(p.h[i], p.h[m - i], epsilon = 1e-8);
        }
    }

    #[test]
    fn finite_difference_chain_converges() {
        // FD derivatives from a bare (t, h) series reproduce the analytic
        // chain to the stencil's truncation order.
        let params = linear_params();
        let m = 4096;
        let t: Vec<f64> = (0..=m).map(|i| std::f64::consts::TAU * i as f64 / m as f64).collect();
        let h: Vec<f64> = t.iter().map(|&ti| 1.0 + 0.5 * ti.cos()).collect();
        let p = SolutionProfile::from_time_series(&params, t, h).unwrap();
        p.validate(1e-8).unwrap();
        for (i, &ti) in p.t.iter().enumerate() {
            assert_abs_diff_eq!(p.h1[i], -0.5 * ti.sin(), epsilon = 1e-6);
            assert_abs_diff_eq!(p.h2[i], -0.5 * ti.cos(), epsilon = 1e-5);
            assert_abs_diff_eq!(p.h3[i], 0.5 * ti.sin(), epsilon = 1e-4);
        }
    }

    #[test]
    fn q_chain_matches_log_derivatives() {
        // Independent check of the q-chain algebra: finite-difference the
        // sampled q itself and compare with the stored q1, q2.
        let params = ModelParams::new(6, 10.0, 1.0).unwrap();
        let sys = raw_system(&params).unwrap();
        let c_phys = sys.energy_from_normalized(0.15);
        let t_phys = crate::period::period(&sys, c_phys, 1e-12).unwrap().period;
        let m = 8192;
        let p = SolutionProfile::from_energy(&params, 0.15, t_phys, m).unwrap();
        let dt = t_phys / m as f64;
        let wrap = |i: isize| p.q[(i.rem_euclid(m as isize)) as usize];
        for i in (0..m).step_by(97) {
            let ii = i as isize;
            let fd1 = (wrap(ii + 1) - wrap(ii - 1)) / (2.0 * dt);
            let fd2 = (wrap(ii + 1) - 2.0 * wrap(ii) + wrap(ii - 1)) / (dt * dt);
            assert_abs_diff_eq!(p.q1[i], fd1, epsilon = 1e-6);
            assert_abs_diff_eq!(p.q2[i], fd2, epsilon = 1e-5);
        }
    }

    #[test]
    fn grid_validation_rejects_malformed_input() {
        let params = linear_params();
        // Non-uniform grid.
        let mut t: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        t[5] += 0.01;
        let h = vec![1.0; 33];
        assert!(matches!(
            SolutionProfile::from_time_series(&params, t, h),
            Err(Error::InvalidProfile(_))
        ));
        // Nonpositive h.
        let t: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let mut h = vec![1.0; 33];
        h[7] = -0.2;
        assert!(matches!(
            SolutionProfile::from_time_series(&params, t, h),
            Err(Error::PositivityViolation(_))
        ));
        // Too short.
        let t: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let h = vec![1.0; 5];
        assert!(matches!(
            SolutionProfile::from_time_series(&params, t, h),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn aperiodic_profile_fails_validation() {
        let params = linear_params();
        // A quarter period of the closed-form solution is not periodic.
        let p = SolutionProfile::from_closures(&params, std::f64::consts::FRAC_PI_2, 64, |t| {
            [1.0 + 0.5 * t.cos(), -0.5 * t.sin(), -0.5 * t.cos(), 0.5 * t.sin()]
        })
        .unwrap();
        assert!(matches!(p.validate(1e-8), Err(Error::InvalidProfile(_))));
    }
}
