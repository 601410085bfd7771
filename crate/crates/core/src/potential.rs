//! Model parameters and the one-dimensional potential systems whose
//! periodic orbits generate warped metrics with harmonic curvature.
//!
//! The warping function h of a metric `dt² + h^{4/n}(t) g₀` on a circle
//! times an (n−1)-dimensional Einstein fiber of scalar curvature R obeys
//!
//! ```text
//! h'' − (nR / (4(n−1))) · h^{1−4/n} = −(n/4) C h                     (raw)
//! ```
//!
//! Rescaling `h(t) = α f(βt)` with [`DerivedParams::alpha`] and
//! [`DerivedParams::beta`] removes every constant:
//!
//! ```text
//! f'' − f^{1−4/n} + f = 0                                     (normalized)
//! ```
//!
//! Both are Newtonian systems `x'' + φ(x) = 0` with a conserved energy
//! `E = x'²/2 + G(x)`, `G' = φ`, normalized so G vanishes at the center
//! equilibrium. Orbits are the level sets `E = c`, closed for
//! `0 < c < G(0⁺)`; the boundary value `G(0⁺)` is finite because the
//! barrier term `x^{2−4/n}` stays integrable down to x = 0.
//!
//! # Accuracy near the center
//!
//! `G(x) − c` near the center is a difference of O(1) terms that almost
//! cancel; for small-amplitude orbits (c as small as 1e−10) direct
//! evaluation loses every significant digit. Within |x/center − 1| ≤ 1/2
//! the potential is therefore evaluated through the exact expansion
//!
//! ```text
//! G(center(1+x)) ∝ x² − (2/p) Σ_{k≥2} C(p,k) xᵏ,    p = 2 − 4/n,
//! ```
//!
//! whose leading cancellation is performed symbolically. The restoring
//! function uses `x − expm1(e·log1p(x))` for the same reason.

use serde::Serialize;

use crate::error::{Error, Result};

/// Geometric input data for the raw family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Total dimension n ≥ 3; the fiber has dimension n − 1.
    pub n: u32,
    /// Scalar curvature R > 0 of the Einstein fiber.
    #[serde(rename = "R")]
    pub scal: f64,
    /// The constant C > 0 of the linear term in the warping equation.
    #[serde(rename = "C")]
    pub c: f64,
}

impl ModelParams {
    /// Validating constructor.
    pub fn new(n: u32, scal: f64, c: f64) -> Result<Self> {
        let p = ModelParams { n, scal, c };
        p.validate()?;
        Ok(p)
    }

    /// Checks the admissibility constraints n ≥ 3, R > 0, C > 0.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be at least 3, got {}",
                self.n
            )));
        }
        if !(self.scal.is_finite() && self.scal > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fiber scalar curvature R must be positive and finite, got {}",
                self.scal
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "constant C must be positive and finite, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Constants derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Amplitude scale: the constant solution is h ≡ α, with
    /// α = (R / ((n−1)C))^{n/4}.
    pub alpha: f64,
    /// Time scale β = √(nC/4); h(t) = α f(βt) maps raw to normalized.
    pub beta: f64,
    /// Small-amplitude limit of the physical period: 2π/√C. Nonconstant
    /// solutions of period T exist only for T above this threshold.
    #[serde(rename = "T_min")]
    pub t_min: f64,
    /// Boundary energy of the normalized system, c₀ = 1/(n−2); closed
    /// orbits fill 0 < c < c₀.
    pub c0: f64,
    /// Slope of the raw restoring function at α. Equals C for every n, so
    /// the linearized period 2π/√(φ'(α)) is 2π/√C independent of n.
    pub phi_prime_alpha: f64,
}

/// Computes the derived constants for a parameter set.
pub fn derive_params(params: &ModelParams) -> Result<DerivedParams> {
    params.validate()?;
    let n = f64::from(params.n);
    let alpha = (params.scal / ((n - 1.0) * params.c)).powf(n / 4.0);
    let beta = (n * params.c / 4.0).sqrt();
    Ok(DerivedParams {
        alpha,
        beta,
        t_min: std::f64::consts::TAU / params.c.sqrt(),
        c0: 1.0 / (n - 2.0),
        phi_prime_alpha: params.c,
    })
}

/// A Newtonian system `x'' + φ(x) = 0` on the positive half-line with a
/// potential well around a center equilibrium.
pub trait PotentialSystem: Sync {
    /// Restoring function φ; positive right of the center, negative left.
    fn phi(&self, x: f64) -> f64;

    /// Derivative φ'(x).
    fn phi_prime(&self, x: f64) -> f64;

    /// Potential energy G with G(center) = 0 and G' = φ.
    fn potential(&self, x: f64) -> f64;

    /// G evaluated at `center + t` with `t` given directly.
    ///
    /// Small-amplitude orbits live at offsets |t| ~ 1e−5 and below, where
    /// forming `center + t` first would round at the scale of the center
    /// rather than of t and destroy the gap `c − G`. Implementations with
    /// a series expansion around the center should override this to
    /// consume `t` exactly as given.
    fn potential_at_offset(&self, t: f64) -> f64 {
        self.potential(self.center() + t)
    }

    /// The center equilibrium.
    fn center(&self) -> f64;

    /// Supremum G(0⁺) of energies of closed orbits.
    fn energy_max(&self) -> f64;

    /// True when the restoring force is linear, so every orbit shares one
    /// period and the period map carries no information.
    fn isochronous(&self) -> bool {
        false
    }

    /// Validates that `c` lies in the open admissible interval.
    fn check_energy(&self, c: f64) -> Result<()> {
        if c.is_finite() && c > 0.0 && c < self.energy_max() {
            Ok(())
        } else {
            Err(Error::EnergyOutOfRange { energy: c, max: self.energy_max() })
        }
    }

    /// Validates that `x` lies in the open domain (0, ∞).
    fn check_domain(&self, x: f64) -> Result<()> {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(Error::PositivityViolation(format!(
                "potential evaluated at x = {x}, outside (0, ∞)"
            )))
        }
    }
}

/// Tail of the binomial series: Σ_{k≥2} C(p,k) xᵏ, converging for |x| < 1.
/// Consecutive coefficients obey C(p,k+1) = C(p,k)(p−k)/(k+1).
pub(crate) fn binom_tail(p: f64, x: f64) -> f64 {
    let mut coeff = 0.5 * p * (p - 1.0);
    let mut power = x * x;
    let mut sum = 0.0;
    for k in 2..400u32 {
        let term = coeff * power;
        sum += term;
        if term.abs() <= 1e-20 * sum.abs().max(1e-300) {
            break;
        }
        coeff *= (p - f64::from(k)) / f64::from(k + 1);
        power *= x;
    }
    sum
}

/// `f − f^e` evaluated as `x − expm1(e·log1p(x))` with `x = f − 1`,
/// accurate through the near-total cancellation at f = 1.
pub(crate) fn one_minus_power_gap(x: f64, e: f64) -> f64 {
    x - f64::exp_m1(e * f64::ln_1p(x))
}

/// The normalized system `f'' − f^{1−4/n} + f = 0`.
///
/// φ(f) = f − f^{1−4/n}, center f = 1, and
/// G(f) = f²/2 − (n/(2(n−2))) f^{2−4/n} + 1/(n−2), with G(0⁺) = 1/(n−2).
/// For n = 4 the restoring force is exactly linear: φ(f) = f − 1.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedSystem {
    n: u32,
    /// Exponent e = 1 − 4/n of the barrier term in φ.
    e: f64,
    /// Exponent p = 2 − 4/n of the barrier term in G.
    p: f64,
    /// Coefficient m = n/(2(n−2)) of the barrier term in G (m·p = 1).
    m: f64,
    /// Boundary energy 1/(n−2).
    cmax: f64,
}

/// Constructs the normalized system for dimension `n ≥ 3`.
pub fn normalized_system(n: u32) -> Result<NormalizedSystem> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "dimension n must be at least 3, got {n}"
        )));
    }
    let nf = f64::from(n);
    Ok(NormalizedSystem {
        n,
        e: 1.0 - 4.0 / nf,
        p: 2.0 - 4.0 / nf,
        m: nf / (2.0 * (nf - 2.0)),
        cmax: 1.0 / (nf - 2.0),
    })
}

impl NormalizedSystem {
    /// Dimension parameter n.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Period of infinitesimal orbits: 2π/√(φ'(1)) = π√n.
    pub fn limit_period(&self) -> f64 {
        std::f64::consts::PI * f64::from(self.n).sqrt()
    }
}

impl PotentialSystem for NormalizedSystem {
    fn phi(&self, x: f64) -> f64 {
        let t = x - 1.0;
        if t.abs() <= 0.5 {
            one_minus_power_gap(t, self.e)
        } else {
            x - x.powf(self.e)
        }
    }

    fn phi_prime(&self, x: f64) -> f64 {
        1.0 - self.e * x.powf(self.e - 1.0)
    }

    fn potential(&self, x: f64) -> f64 {
        self.potential_at_offset(x - 1.0)
    }

    fn potential_at_offset(&self, t: f64) -> f64 {
        if t.abs() <= 0.5 {
            // G(1+t) = t²/2 − m·Σ_{k≥2} C(p,k) tᵏ exactly (m·p = 1 kills
            // the linear term, the constant terms cancel by construction).
            0.5 * t * t - self.m * binom_tail(self.p, t)
        } else {
            let x = 1.0 + t;
            0.5 * x * x - self.m * x.powf(self.p) + self.cmax
        }
    }

    fn center(&self) -> f64 {
        1.0
    }

    fn energy_max(&self) -> f64 {
        self.cmax
    }

    fn isochronous(&self) -> bool {
        self.n == 4
    }
}

/// The raw system for h, carrying the physical constants.
///
/// φ(h) = (n/4)C·h − (nR/(4(n−1)))·h^{1−4/n}, center h = α. Orbits
/// correspond to normalized orbits through h(t) = α f(βt); energies scale
/// by α²β².
#[derive(Debug, Clone, Copy)]
pub struct RawSystem {
    params: ModelParams,
    derived: DerivedParams,
    /// Barrier coefficient A = nR/(4(n−1)).
    a: f64,
    /// (n/4)C, the linear coefficient.
    lin: f64,
    /// Exponents as in the normalized system.
    e: f64,
    p: f64,
    /// Energy scale (n/8)Cα² of the expansion around α.
    scale: f64,
    /// Additive constant making G(α) = 0 in the direct branch.
    offset: f64,
}

/// Constructs the raw system from validated model parameters.
pub fn raw_system(params: &ModelParams) -> Result<RawSystem> {
    let derived = derive_params(params)?;
    let n = f64::from(params.n);
    let a = n * params.scal / (4.0 * (n - 1.0));
    let lin = n * params.c / 4.0;
    let e = 1.0 - 4.0 / n;
    let p = 2.0 - 4.0 / n;
    let scale = 0.125 * n * params.c * derived.alpha * derived.alpha;
    let offset = scale * (1.0 - 2.0 / p);
    Ok(RawSystem { params: *params, derived, a, lin, e, p, scale, offset })
}

impl RawSystem {
    /// The parameters this system was built from.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// The derived constants.
    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    /// Energy of the raw orbit corresponding to a normalized orbit of
    /// energy `c_norm`: the substitution h = α f(βt) scales energies by
    /// α²β².
    pub fn energy_from_normalized(&self, c_norm: f64) -> f64 {
        let ab = self.derived.alpha * self.derived.beta;
        ab * ab * c_norm
    }
}

impl PotentialSystem for RawSystem {
    fn phi(&self, x: f64) -> f64 {
        let t = x / self.derived.alpha - 1.0;
        if t.abs() <= 0.5 {
            // (n/4)Cα [f − f^e] with f = x/α, using A·α^e = (n/4)C·α.
            self.lin * self.derived.alpha * one_minus_power_gap(t, self.e)
        } else {
            self.lin * x - self.a * x.powf(self.e)
        }
    }

    fn phi_prime(&self, x: f64) -> f64 {
        self.lin - self.a * self.e * x.powf(self.e - 1.0)
    }

    fn potential(&self, x: f64) -> f64 {
        let t = x / self.derived.alpha - 1.0;
        if t.abs() <= 0.5 {
            self.scale * (t * t - (2.0 / self.p) * binom_tail(self.p, t))
        } else {
            self.lin * 0.5 * x * x - (self.a / self.p) * x.powf(self.p) - self.offset
        }
    }

    fn potential_at_offset(&self, t: f64) -> f64 {
        let s = t / self.derived.alpha;
        if s.abs() <= 0.5 {
            self.scale * (s * s - (2.0 / self.p) * binom_tail(self.p, s))
        } else {
            self.potential(self.derived.alpha + t)
        }
    }

    fn center(&self) -> f64 {
        self.derived.alpha
    }

    fn energy_max(&self) -> f64 {
        // G(0⁺) = −offset = (n/8)Cα² (2/p − 1) = nCα²/(4(n−2)).
        -self.offset
    }

    fn isochronous(&self) -> bool {
        self.params.n == 4
    }
}
