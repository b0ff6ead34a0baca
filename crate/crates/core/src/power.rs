//! Asymptotic power of the SS and FLM tests under the lag-one elliptical
//! alternative, and their asymptotic relative efficiency.
//!
//! Gamma-function ratios are evaluated in log space; `Γ(p/2)` overflows
//! for `p` beyond a few hundred.

use crate::error::{invalid, Error, Result};
use crate::special::{ln_gamma, normal_cdf, normal_upper_quantile};

/// Distribution family of `ε_t` (identity scatter).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "dist", rename_all = "snake_case"))]
pub enum AreInput {
    Normal,
    /// Multivariate t with `v > 2` degrees of freedom.
    StudentT { v: f64 },
    /// `(1 − v) N(0, I) + v N(0, σ² I)` with `v ∈ (0, 1)`, `σ > 0`.
    MixtureNormal { v: f64, sigma: f64 },
}

impl AreInput {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AreInput::Normal => Ok(()),
            AreInput::StudentT { v } => {
                if v.is_finite() && v > 2.0 {
                    Ok(())
                } else {
                    Err(Error::UndefinedMoment("multivariate t needs v > 2 for a finite second moment"))
                }
            }
            AreInput::MixtureNormal { v, sigma } => {
                if !(v > 0.0 && v < 1.0) {
                    return Err(invalid(alloc::format!("mixture weight must lie in (0, 1), got {v}")));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(invalid(alloc::format!("mixture scale must be positive, got {sigma}")));
                }
                Ok(())
            }
        }
    }
}

/// Finite-`p` moments of the radial variable `r_t = ‖ε_t‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialMoments {
    /// `E(r⁻¹)`.
    pub inv_mean: f64,
    /// `E(r²)`.
    pub second_moment: f64,
    /// `c₁ = E(r) E(r⁻¹)`.
    pub c1: f64,
}

/// `ln Γ((p−1)/2) − ln Γ(p/2)`.
fn ln_inv_chi_ratio(p: f64) -> f64 {
    ln_gamma(0.5 * (p - 1.0)) - ln_gamma(0.5 * p)
}

/// `E(χ_p)`.
pub fn chi_mean(p: f64) -> f64 {
    core::f64::consts::SQRT_2 * libm::exp(ln_gamma(0.5 * (p + 1.0)) - ln_gamma(0.5 * p))
}

/// `E(1/χ_p)`, finite for `p > 1`.
pub fn chi_inverse_mean(p: f64) -> f64 {
    libm::exp(ln_inv_chi_ratio(p)) / core::f64::consts::SQRT_2
}

/// `c₁` of a `χ_p` radial law.
pub fn chi_c1(p: f64) -> f64 {
    libm::exp(ln_gamma(0.5 * (p + 1.0)) + ln_gamma(0.5 * (p - 1.0)) - 2.0 * ln_gamma(0.5 * p))
}

/// `E(√w) E(1/√w)` for `w ~ χ²_v`, the factor a t-type radial adds to `c₁`.
pub fn chi_square_root_c1(v: f64) -> f64 {
    libm::exp(ln_gamma(0.5 * (v + 1.0)) + ln_gamma(0.5 * (v - 1.0)) - 2.0 * ln_gamma(0.5 * v))
}

/// Closed-form radial moments for dimension `p ≥ 2`.
///
/// The mixture `E(r⁻¹)` follows the published closed form as printed;
/// `c₁` is always computed from the exact radial law of the family.
pub fn radial_moments(dist: AreInput, p: usize) -> Result<RadialMoments> {
    dist.validate()?;
    if p < 2 {
        return Err(invalid("radial moments need p >= 2"));
    }
    let pf = p as f64;
    let gamma_ratio = libm::exp(ln_inv_chi_ratio(pf));
    let moments = match dist {
        AreInput::Normal => RadialMoments {
            inv_mean: chi_inverse_mean(pf),
            second_moment: pf,
            c1: chi_c1(pf),
        },
        AreInput::StudentT { v } => {
            let lead = libm::exp(ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v)) / libm::sqrt(v);
            RadialMoments {
                inv_mean: lead * gamma_ratio,
                second_moment: pf * v / (v - 2.0),
                c1: chi_c1(pf) * chi_square_root_c1(v),
            }
        }
        AreInput::MixtureNormal { v, sigma } => {
            let lead = (v + (1.0 - v) / sigma) * libm::sqrt(v + (1.0 - v) * sigma * sigma)
                / core::f64::consts::SQRT_2;
            RadialMoments {
                inv_mean: lead * gamma_ratio,
                second_moment: pf * (1.0 - v + v * sigma * sigma),
                c1: chi_c1(pf) * ((1.0 - v) + v * sigma) * ((1.0 - v) + v / sigma),
            }
        }
    };
    Ok(moments)
}

/// `ARE(SS, FLM) = lim_{p→∞} E²(r⁻¹) E(r²)` in closed form.
pub fn are_ss_flm(dist: AreInput) -> Result<f64> {
    dist.validate()?;
    Ok(match dist {
        AreInput::Normal => 1.0,
        AreInput::StudentT { v } => {
            let ratio = libm::exp(ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v));
            2.0 / (v - 2.0) * ratio * ratio
        }
        AreInput::MixtureNormal { v, sigma } => {
            let w = v * (1.0 - v);
            let a = sigma - 1.0 / sigma;
            let b = 1.0 - 1.0 / sigma;
            (1.0 + w * a * a) / (1.0 + w * b * b)
        }
    })
}

/// Inputs of the asymptotic power functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerInput {
    pub n: usize,
    /// `c₁ = E(r) E(r⁻¹) ≥ 1`.
    pub c1: f64,
    /// `tr(Σ₀ Σ₁)`.
    pub tr_s0s1: f64,
    /// `tr(Σ₀²)`, must be positive.
    pub tr_s0sq: f64,
    pub alpha: f64,
    /// `E²(r) / E(r²)`, the FLM counterpart of `c₁²`.
    pub moment_ratio: f64,
}

impl PowerInput {
    /// `n tr(Σ₀Σ₁) / (√2 tr(Σ₀²))`.
    fn base_shift(&self) -> Result<f64> {
        if !(self.tr_s0sq > 0.0) {
            return Err(invalid("tr(Σ0²) must be positive"));
        }
        Ok(self.n as f64 * self.tr_s0s1 / (core::f64::consts::SQRT_2 * self.tr_s0sq))
    }
}

/// `β_S = Φ(−z_α + c₁² n tr(Σ₀Σ₁) / (√2 tr(Σ₀²)))`.
pub fn power_ss(input: &PowerInput) -> Result<f64> {
    let z = normal_upper_quantile(input.alpha)?;
    Ok(normal_cdf(-z + input.c1 * input.c1 * input.base_shift()?))
}

/// `β_FLM`, with `E²(r)/E(r²)` in place of `c₁²`.
pub fn power_flm(input: &PowerInput) -> Result<f64> {
    let z = normal_upper_quantile(input.alpha)?;
    Ok(normal_cdf(-z + input.moment_ratio * input.base_shift()?))
}
