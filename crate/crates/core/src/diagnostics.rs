//! Post-processing: limit strain and stress, bending moments, contact forces
//! and the discrete energy balance.

use nalgebra::{Matrix2, Matrix3};
use serde::Serialize;

use crate::error::{Result, ShellError};
use crate::geometry::GeometryPoint;
use crate::material::ModelCoefficients;
use crate::solver::{metric_trace, CoupledSystem, ShellState, StepRecord};
use crate::strain::SymTensor2;

/// Limit strain in the contravariant frame: `-z ρ` in the tangential block
/// and `α/(λ+2μ) π + z λ/(λ+2μ) A^c:ρ` in the normal entry.
pub fn limit_strain(rho: &SymTensor2, acon: &Matrix2<f64>, pressure: f64, z3: f64, c: &ModelCoefficients) -> Matrix3<f64> {
    let denom = c.lambda + 2.0 * c.mu;
    let mut g = Matrix3::zeros();
    let r = rho.to_matrix();
    for a in 0..2 {
        for b in 0..2 {
            g[(a, b)] = -z3 * r[(a, b)];
        }
    }
    g[(2, 2)] = c.alpha / denom * pressure + z3 * c.lambda / denom * metric_trace(acon, rho);
    g
}

/// Limit stress `Q̃ᵀ σ Q̃` in closed form:
/// `-c_α π A^c - z [c_λ (A^c:ρ) I + 2μ A^c ρ] A^c` in the tangential block,
/// zero elsewhere.
pub fn limit_stress(rho: &SymTensor2, acon: &Matrix2<f64>, pressure: f64, z3: f64, c: &ModelCoefficients) -> Matrix3<f64> {
    let r = rho.to_matrix();
    let tr = metric_trace(acon, rho);
    let block = -acon * (c.coupling() * pressure)
        - (Matrix2::identity() * (c.trace_coefficient() * tr) + acon * r * (2.0 * c.mu)) * acon * z3;
    let mut s = Matrix3::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(&block);
    s
}

/// Same stress through the three-dimensional tensor:
/// `Q̃ᵀ [𝒞(Q̃ γ Q̃ᵀ) − α π I] Q̃`.
pub fn stress_via_full_tensor(strain: &Matrix3<f64>, g: &GeometryPoint, pressure: f64, c: &ModelCoefficients) -> Matrix3<f64> {
    let q = g.contravariant_frame();
    let e = q * strain * q.transpose();
    let sigma = c.full_tensor_apply(&e) - Matrix3::identity() * (c.alpha * pressure);
    q.transpose() * sigma * q
}

/// Cartesian stress from its contravariant-frame representation.
pub fn stress_to_cartesian(local: &Matrix3<f64>, g: &GeometryPoint) -> Matrix3<f64> {
    // Q̃⁻¹ = [a_1 a_2 a_3]ᵀ.
    let qinv = g.covariant_frame().transpose();
    qinv.transpose() * local * qinv
}

/// Contact couples `(ℓ³/12) 𝒞̃(A^c ρ) A^c + c_α (∫ z p dz) A^c`.
pub fn bending_moment(rho: &SymTensor2, acon: &Matrix2<f64>, pressure_moment: f64, c: &ModelCoefficients) -> SymTensor2 {
    let m = c.shell_tensor_apply(&(acon * rho.to_matrix())) * acon * c.bending_scale() + acon * (c.coupling() * pressure_moment);
    SymTensor2::from_matrix(&m)
}

/// Pressure at thickness coordinate `z` (linear interpolation of the grid).
pub fn pressure_at(sys: &CoupledSystem, state: &ShellState, node: usize, z: f64) -> f64 {
    let nodes = &sys.grid.nodes;
    let nz = nodes.len();
    let col = &state.pressure[node * nz..(node + 1) * nz];
    let k = nodes.partition_point(|r| *r <= z).clamp(1, nz - 1);
    let s = (z - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
    col[k - 1] * (1.0 - s) + col[k] * s
}

/// Limit stress at a node of an assembled system; `z3` is relative to the
/// thickness, in `[-1/2, 1/2]`.
pub fn stress_at_node(sys: &CoupledSystem, state: &ShellState, node: usize, z3: f64) -> Matrix3<f64> {
    let g = &sys.nodes[node].geometry;
    let rho = sys.bending_strain_at(&state.u, node);
    let z = z3 * sys.coefficients.thickness;
    limit_stress(&rho, &g.metric_con, pressure_at(sys, state, node, z), z, &sys.coefficients)
}

pub fn moment_at_node(sys: &CoupledSystem, state: &ShellState, node: usize) -> SymTensor2 {
    let g = &sys.nodes[node].geometry;
    let rho = sys.bending_strain_at(&state.u, node);
    let m = sys.moments(&state.pressure)[node];
    bending_moment(&rho, &g.metric_con, m, &sys.coefficients)
}

/// Multipliers enforcing the inextensibility constraint.
pub fn contact_forces(state: &ShellState) -> Result<&[SymTensor2]> {
    state.multipliers.as_deref().ok_or_else(|| {
        ShellError::UnavailableOutput(
            "contact forces are only computed by the multiplier backend; the reduced backend \
             satisfies the constraint exactly and carries no multipliers"
                .into(),
        )
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub elastic_energy: f64,
    pub pressure_energy: f64,
    pub dissipation: f64,
    pub work: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub rows: Vec<EnergyRow>,
    pub max_abs_residual: f64,
    pub cumulative_residual: f64,
    pub min_dissipation: f64,
    /// Largest `|work|` over the steps.
    pub peak_power: f64,
}

pub fn energy_balance(records: &[StepRecord]) -> EnergyReport {
    let rows: Vec<EnergyRow> = records
        .iter()
        .map(|r| EnergyRow {
            t: r.t,
            elastic_energy: r.elastic_energy,
            pressure_energy: r.pressure_energy,
            dissipation: r.dissipation,
            work: r.work,
            residual: r.residual,
        })
        .collect();
    let steps = records.iter().skip(1);
    EnergyReport {
        max_abs_residual: steps.clone().fold(0.0, |a, r| a.max(r.residual.abs())),
        cumulative_residual: steps.clone().map(|r| r.residual).sum(),
        min_dissipation: steps.clone().fold(f64::INFINITY, |a, r| a.min(r.dissipation)),
        peak_power: steps.fold(0.0, |a, r| a.max(r.work.abs())),
        rows,
    }
}
