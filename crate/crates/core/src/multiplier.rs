//! Constrained backend for general charts: the inextensibility constraint
//! γ(u) = 0 is imposed at every quadrature point of an unconstrained
//! three-component space. The discrete flexural space is the null space of
//! the constraint matrix; the multipliers (contact forces) are recovered by
//! least squares from the unconstrained residual.
//!
//! Pointwise enforcement is exact for plates and converges (with an O(h²)
//! locking error in the energy) on cylinders. On charts whose inextensible
//! fields have non-polynomial coefficients, e.g. corrugated surfaces, the
//! discrete null space is empty and assembly is refused.

use nalgebra::DMatrix;

use crate::basis::{ClampedEdges, FlexuralBasis, RawShellBasis};
use crate::error::{Result, ShellError};
use crate::geometry::{geometry_at, Chart};
use crate::loads::LoadProgram;
use crate::material::ModelCoefficients;
use crate::par::Execution;
use crate::quadrature::OmegaQuadrature;
use crate::solver::{assemble, CoupledSystem};
use crate::strain::membrane_strain;

/// Relative singular-value threshold defining the discrete null space.
pub const NULLSPACE_TOLERANCE: f64 = 1e-9;

/// Weighted constraint matrix: row `3q + c` holds `W_q m_c γ_c(φ_i)(y_q)`
/// with `(γ_11, γ_12, γ_22)` and `m = (1, 2, 1)`, so that `nᵀ B v` is the
/// discrete `∫ n : γ(v) √a`.
pub fn constraint_matrix(
    chart: &dyn Chart,
    basis: &dyn FlexuralBasis,
    quadrature: &OmegaQuadrature,
    exec: Execution,
) -> Result<DMatrix<f64>> {
    let rows: Vec<Result<Vec<(usize, [f64; 3])>>> = exec.map(quadrature.len(), |q| {
        let p = quadrature.points[q];
        let g = geometry_at(chart, p.y)?;
        let w = p.weight * g.sqrt_a;
        Ok(basis
            .jets(p.y)
            .into_iter()
            .map(|(i, j)| {
                let s = membrane_strain(&j, &g);
                (i, [w * s.t11, 2.0 * w * s.t12, w * s.t22])
            })
            .collect())
    });
    let mut b = DMatrix::zeros(3 * quadrature.len(), basis.dimension());
    for (q, r) in rows.into_iter().enumerate() {
        for (i, v) in r? {
            for c in 0..3 {
                b[(3 * q + c, i)] += v[c];
            }
        }
    }
    Ok(b)
}

/// Orthonormal basis of `{v : B v = 0}` (up to the relative tolerance).
pub fn nullspace(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.ncols();
    let padded = if b.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, b.nrows()).copy_from(b);
        p
    } else {
        b.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= NULLSPACE_TOLERANCE * smax)
        .collect();
    let mut z = DMatrix::zeros(n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        z.set_column(j, &vt.row(k).transpose());
    }
    z
}

/// Assembles the constrained system on a general chart.
#[allow(clippy::too_many_arguments)]
pub fn assemble_constrained(
    chart: &dyn Chart,
    elements: [usize; 2],
    clamped: ClampedEdges,
    quadrature: &OmegaQuadrature,
    coefficients: ModelCoefficients,
    thickness_nodes: usize,
    loads: &LoadProgram,
    exec: Execution,
) -> Result<CoupledSystem> {
    let raw = RawShellBasis::new(chart.domain(), elements, clamped)?;
    let b = constraint_matrix(chart, &raw, quadrature, exec)?;
    let z = nullspace(&b);
    if z.ncols() == 0 {
        return Err(ShellError::TrivialFlexuralSpace(format!(
            "no discrete inextensible displacement satisfies the clamping on the {} chart; \
             either the shell is outside the flexural regime, or its inextensible fields are not \
             piecewise polynomial in the chart coordinates and pointwise enforcement locks",
            chart.name()
        )));
    }
    let residual = (&b * &z).amax();
    let bt = b.transpose();
    let smax = bt.clone().svd(false, false).singular_values.amax();
    let pinv = bt
        .pseudo_inverse(NULLSPACE_TOLERANCE * smax)
        .map_err(|e| ShellError::SingularSystem {
            context: format!("constraint pseudo-inverse: {e}"),
            condition: f64::INFINITY,
        })?;
    let sys = assemble(chart, &raw, quadrature, coefficients, thickness_nodes, loads, exec)?;
    Ok(sys.project(z, pinv, residual))
}
