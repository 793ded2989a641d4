//! Physical and dimensionless parameters, Terzaghi scaling and the
//! elasticity tensors of the shell model.

use nalgebra::{Matrix2, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

/// Dimensional material and geometric data (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Shear modulus μ [Pa].
    pub mu: f64,
    /// First Lamé parameter λ [Pa].
    pub lambda: f64,
    /// Effective stress coefficient α.
    pub alpha: f64,
    /// Inverse Biot modulus β_G [1/Pa].
    pub beta_g: f64,
    /// Permeability k [m²].
    pub permeability: f64,
    /// Fluid viscosity η [Pa s].
    pub viscosity: f64,
    /// Midsurface length L [m].
    pub length: f64,
    /// Thickness ℓ [m].
    pub thickness: f64,
    /// Characteristic displacement U [m].
    #[serde(default = "one")]
    pub displacement_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl MaterialParams {
    /// Collects every violated invariant.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let positive = [
            ("mu", self.mu),
            ("permeability", self.permeability),
            ("viscosity", self.viscosity),
            ("thickness", self.thickness),
            ("length", self.length),
            ("displacement_scale", self.displacement_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("material.{name} must be positive and finite (got {v})"));
            }
        }
        for (name, v) in [("lambda", self.lambda), ("alpha", self.alpha), ("beta_g", self.beta_g)] {
            if !(v >= 0.0 && v.is_finite()) {
                errs.push(format!("material.{name} must be nonnegative and finite (got {v})"));
            }
        }
        if self.alpha == 0.0 && self.beta_g == 0.0 {
            errs.push(
                "material.alpha and material.beta_g are both zero: the pressure equation loses \
                 its time derivative (storage coefficient vanishes)"
                    .into(),
            );
        }
        if self.thickness > 0.0 && self.length > 0.0 && self.thickness >= self.length {
            errs.push(format!(
                "material.thickness ({}) must be much smaller than material.length ({})",
                self.thickness, self.length
            ));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ShellError::Config(errs))
        }
    }
}

/// Scaled parameters; stresses are scaled by μ and time by the Terzaghi time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// λ̃ = λ/μ.
    pub lambda_ratio: f64,
    /// μ̃, the shear modulus in stress units; 1 under the standard scaling.
    pub mu_ratio: f64,
    pub alpha: f64,
    /// β = β_G μ.
    pub beta: f64,
    /// ε = ℓ/L.
    pub epsilon: f64,
    /// T = η ℓ² / (k μ) [s].
    pub terzaghi_time: f64,
    /// P = U μ / L [Pa].
    pub pressure_scale: f64,
    /// β̄ = β + α²/(λ̃ + 2μ̃).
    pub beta_bar: f64,
}

impl DimensionlessParams {
    /// Builds the block directly from dimensionless data (no physical units).
    pub fn from_ratios(lambda_ratio: f64, alpha: f64, beta: f64) -> Self {
        DimensionlessParams {
            lambda_ratio,
            mu_ratio: 1.0,
            alpha,
            beta,
            epsilon: f64::NAN,
            terzaghi_time: 1.0,
            pressure_scale: 1.0,
            beta_bar: beta + alpha * alpha / (lambda_ratio + 2.0),
        }
    }

    pub fn with_mu_ratio(mut self, mu_ratio: f64) -> Self {
        self.mu_ratio = mu_ratio;
        self.beta_bar = self.beta + self.alpha * self.alpha / (self.lambda_ratio + 2.0 * mu_ratio);
        self
    }
}

pub fn nondimensionalize(p: &MaterialParams) -> Result<DimensionlessParams> {
    p.validate()?;
    let lambda_ratio = p.lambda / p.mu;
    let beta = p.beta_g * p.mu;
    Ok(DimensionlessParams {
        lambda_ratio,
        mu_ratio: 1.0,
        alpha: p.alpha,
        beta,
        epsilon: p.thickness / p.length,
        terzaghi_time: p.viscosity * p.thickness * p.thickness / (p.permeability * p.mu),
        pressure_scale: p.displacement_scale * p.mu / p.length,
        beta_bar: beta + p.alpha * p.alpha / (lambda_ratio + 2.0),
    })
}

/// Inverse of [`nondimensionalize`] given the reference quantities it
/// divides out (μ, L, η).
pub fn redimensionalize(dp: &DimensionlessParams, mu: f64, length: f64, viscosity: f64) -> MaterialParams {
    let thickness = dp.epsilon * length;
    MaterialParams {
        mu,
        lambda: dp.lambda_ratio * mu,
        alpha: dp.alpha,
        beta_g: dp.beta / mu,
        permeability: viscosity * thickness * thickness / (dp.terzaghi_time * mu),
        viscosity,
        length,
        thickness,
        displacement_scale: dp.pressure_scale * length / mu,
    }
}

/// Coefficients entering the discrete model. One set of formulas serves the
/// dimensionless scaling `(μ̃, λ̃, α, β, 1, 1)` and the dimensional one
/// `(μ, λ, α, β_G, k/η, ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficients {
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// β or β_G.
    pub storage: f64,
    /// 1 or k/η.
    pub mobility: f64,
    /// 1 or ℓ; the thickness coordinate ranges over `[-thickness/2, thickness/2]`.
    pub thickness: f64,
}

impl ModelCoefficients {
    pub fn dimensionless(dp: &DimensionlessParams) -> Self {
        ModelCoefficients {
            mu: dp.mu_ratio,
            lambda: dp.lambda_ratio,
            alpha: dp.alpha,
            storage: dp.beta,
            mobility: 1.0,
            thickness: 1.0,
        }
    }

    pub fn dimensional(p: &MaterialParams) -> Self {
        ModelCoefficients {
            mu: p.mu,
            lambda: p.lambda,
            alpha: p.alpha,
            storage: p.beta_g,
            mobility: p.permeability / p.viscosity,
            thickness: p.thickness,
        }
    }

    /// Storage coefficient of the limit pressure equation.
    pub fn beta_bar(&self) -> f64 {
        self.storage + self.alpha * self.alpha / (self.lambda + 2.0 * self.mu)
    }

    /// `2μλ/(λ+2μ)`, the trace coefficient of the shell tensor.
    pub fn trace_coefficient(&self) -> f64 {
        2.0 * self.mu * self.lambda / (self.lambda + 2.0 * self.mu)
    }

    /// `2μα/(λ+2μ)`, the pressure-moment coupling coefficient.
    pub fn coupling(&self) -> f64 {
        2.0 * self.mu * self.alpha / (self.lambda + 2.0 * self.mu)
    }

    /// `4μ(λ+μ)/(λ+2μ)`, the uniaxial bending coefficient.
    pub fn uniaxial(&self) -> f64 {
        4.0 * self.mu * (self.lambda + self.mu) / (self.lambda + 2.0 * self.mu)
    }

    /// `thickness³ / 12`.
    pub fn bending_scale(&self) -> f64 {
        self.thickness.powi(3) / 12.0
    }

    pub fn shell_tensor_apply(&self, e: &Matrix2<f64>) -> Matrix2<f64> {
        Matrix2::identity() * (self.trace_coefficient() * e.trace()) + e * (2.0 * self.mu)
    }

    pub fn full_tensor_apply(&self, e: &Matrix3<f64>) -> Matrix3<f64> {
        Matrix3::identity() * (self.lambda * e.trace()) + e * (2.0 * self.mu)
    }
}

/// `𝒞̃E = 2μ̃ λ̃/(λ̃+2μ̃) tr(E) I + 2μ̃ E`.
pub fn shell_tensor_apply(e: &Matrix2<f64>, dp: &DimensionlessParams) -> Matrix2<f64> {
    ModelCoefficients::dimensionless(dp).shell_tensor_apply(e)
}

/// `𝒞E = λ̃ tr(E) I + 2μ̃ E`.
pub fn full_tensor_apply(e: &Matrix3<f64>, dp: &DimensionlessParams) -> Matrix3<f64> {
    ModelCoefficients::dimensionless(dp).full_tensor_apply(e)
}
