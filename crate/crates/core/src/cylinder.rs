//! Closed-form specialization to a cylindrical panel of radius R, axial
//! length L and angular extent d, clamped along the generatrices θ = 0, d.
//!
//! Inextensible displacements reduce to two functions of θ (see
//! [`CylinderReducedBasis`]); with `U = v_z'' + v_z` and `W = w'' + w` the
//! bending strains are `ρ_11 = 0`, `ρ_12 = -U'/R`, `ρ_22 = -(z/R) U'' + W'`,
//! and the z-integrals of the energy are done analytically.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::basis::{CylinderReducedBasis, FlexuralBasis};
use crate::error::{Result, ShellError};
use crate::geometry::{CylinderChart, GeometryPoint, Rect};
use crate::hermite::Derivs;
use crate::loads::LoadProgram;
use crate::material::ModelCoefficients;
use crate::par::Execution;
use crate::quadrature::{composite_gauss, OmegaQuadrature};
use crate::solver::{assemble, simulate, CoupledSystem, History, NodeData, SimulationOptions, ThicknessGrid};
use crate::strain::DisplacementJet;

/// Gauss points per element along θ.
pub const ANGULAR_POINTS: usize = 7;
/// Gauss points across the axial length (exact for the z² moments).
pub const AXIAL_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderConfig {
    pub radius: f64,
    pub length: f64,
    /// Angular extent d.
    pub angle: f64,
}

impl CylinderConfig {
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.radius > 0.0) {
            errs.push(format!("cylinder radius must be positive (got {})", self.radius));
        }
        if !(self.length > 0.0) {
            errs.push(format!("cylinder length must be positive (got {})", self.length));
        }
        if !(self.angle > 0.0) {
            errs.push(format!("cylinder angle d must be positive (got {})", self.angle));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if !errs.is_empty() {
            return Err(ShellError::Config(errs));
        }
        if self.angle >= 2.0 * PI - 1e-12 {
            return Err(full_cylinder_error(self.angle));
        }
        Ok(())
    }

    pub fn rect(&self) -> Rect {
        Rect::new([-0.5 * self.length, 0.0], [0.5 * self.length, self.angle])
    }

    pub fn chart(&self) -> CylinderChart {
        CylinderChart {
            radius: self.radius,
            length: self.length,
            angle: self.angle,
        }
    }

    pub fn quadrature(&self, elements: usize) -> OmegaQuadrature {
        OmegaQuadrature::tensor(self.rect(), [1, elements], [AXIAL_POINTS, ANGULAR_POINTS])
    }

    pub fn basis(&self, elements: usize) -> Result<CylinderReducedBasis> {
        self.validate()?;
        if elements < 2 {
            return Err(ShellError::TrivialFlexuralSpace(format!(
                "cylinder mesh with {elements} element(s) has no interior Hermite nodes"
            )));
        }
        CylinderReducedBasis::new(self.radius, self.length, self.angle, elements)
    }
}

pub fn full_cylinder_error(angle: f64) -> ShellError {
    ShellError::TrivialFlexuralSpace(format!(
        "angular extent d = {angle} reaches 2π: the full cylinder clamped on its generatrices admits \
         no nonzero inextensible displacement, so it behaves as the generalized membrane shell and \
         lies outside the flexural model (0 < d < 2π required)"
    ))
}

/// Geometry of the cylinder written out in closed form.
pub fn cylinder_geometry_point(radius: f64, y: [f64; 2]) -> GeometryPoint {
    let r = radius;
    let (s, c) = y[1].sin_cos();
    let a1 = Vector3::new(0.0, 0.0, 1.0);
    let a2 = Vector3::new(-r * s, r * c, 0.0);
    let a3 = Vector3::new(-c, -s, 0.0);
    GeometryPoint {
        y,
        position: Vector3::new(r * c, r * s, y[0]),
        covariant_basis: [a1, a2, a3],
        contravariant_basis: [a1, a2 / (r * r), a3],
        metric_cov: Matrix2::new(1.0, 0.0, 0.0, r * r),
        metric_con: Matrix2::new(1.0, 0.0, 0.0, 1.0 / (r * r)),
        sqrt_a: r,
        curvature_cov: Matrix2::new(0.0, 0.0, 0.0, r),
        curvature_mixed: Matrix2::new(0.0, 0.0, 0.0, 1.0 / r),
        christoffel: [Matrix2::zeros(); 2],
        curvature_partial: [[[0.0; 2]; 2]; 2],
        curvature_cov_derivative: [[[0.0; 2]; 2]; 2],
    }
}

/// `(U, U', U'')` from the derivatives of an axial profile.
fn axial_combination(f: &Derivs) -> [f64; 3] {
    [f[2] + f[0], f[3] + f[1], f[4] + f[2]]
}

/// `W'` from the derivatives of an angular profile.
fn angular_combination(g: &Derivs) -> f64 {
    g[3] + g[1]
}

/// Assembles the reduced system from the separated one-dimensional forms.
pub fn assemble_closed_form(
    cfg: &CylinderConfig,
    basis: &CylinderReducedBasis,
    quadrature: &OmegaQuadrature,
    coefficients: ModelCoefficients,
    thickness_nodes: usize,
    loads: &LoadProgram,
) -> Result<CoupledSystem> {
    cfg.validate()?;
    let (r, l) = (cfg.radius, cfg.length);
    let n_ax = basis.axial_dimension();
    let dim = basis.dimension();
    let elements = basis.axial.elements;
    let expected = cfg.quadrature(elements);
    if expected.points != quadrature.points {
        return Err(ShellError::QuadratureMismatch(
            "closed-form cylinder assembly requires the standard cylinder quadrature".into(),
        ));
    }
    let grid = ThicknessGrid::new(thickness_nodes, coefficients.thickness)?;
    let scale = coefficients.bending_scale();
    let ce = coefficients.uniaxial();
    let mu = coefficients.mu;

    // Stiffness: one-dimensional integrals over θ.
    let mut k = DMatrix::zeros(dim, dim);
    for (th, w) in composite_gauss(0.0, cfg.angle, elements, ANGULAR_POINTS) {
        let ax: Vec<(usize, [f64; 3])> = basis
            .axial
            .eval(th)
            .into_iter()
            .map(|(i, f)| (i, axial_combination(&f)))
            .collect();
        for (i, ui) in &ax {
            for (j, uj) in &ax {
                k[(*i, *j)] += scale
                    * w
                    * (ce * l.powi(3) / (12.0 * r.powi(5)) * ui[2] * uj[2]
                        + 4.0 * mu * l / r.powi(3) * ui[1] * uj[1]);
            }
        }
        let an: Vec<(usize, f64)> = basis
            .angular
            .eval(th)
            .into_iter()
            .map(|(i, g)| (n_ax + i, angular_combination(&g)))
            .collect();
        for (i, wi) in &an {
            for (j, wj) in &an {
                k[(*i, *j)] += scale * w * ce * l / r.powi(3) * wi * wj;
            }
        }
    }

    // Node rows and loads.
    let n_nodes = quadrature.len();
    let mut trace = DMatrix::zeros(n_nodes, dim);
    let mut rho = [0, 1, 2].map(|_| DMatrix::zeros(n_nodes, dim));
    let mut displacement = [0, 1, 2].map(|_| DMatrix::zeros(n_nodes, dim));
    let mut traction_loads = vec![DVector::zeros(dim); loads.traction.len()];
    let mut nodes = Vec::with_capacity(n_nodes);
    for (q, p) in quadrature.points.iter().enumerate() {
        let (z, th) = (p.y[0], p.y[1]);
        // Covariant traction components mapped to (P_z, P_θ, P_r).
        let mut pz = vec![0.0; loads.traction.len()];
        let mut pth = vec![0.0; loads.traction.len()];
        let mut pr = vec![0.0; loads.traction.len()];
        for (t, term) in loads.traction.iter().enumerate() {
            let v = term.profile.value(p.y);
            match term.component {
                1 => pz[t] = v,
                2 => pth[t] = r * v,
                _ => pr[t] = -v,
            }
        }
        for (i, f) in basis.axial.eval(th) {
            let [_, u1, u2] = axial_combination(&f);
            let r22 = -(z / r) * u2;
            rho[1][(q, i)] = -u1 / r;
            rho[2][(q, i)] = r22;
            trace[(q, i)] = r22 / (r * r);
            displacement[0][(q, i)] = f[0];
            displacement[1][(q, i)] = -z * f[1];
            displacement[2][(q, i)] = -(z / r) * f[2];
            for t in 0..loads.traction.len() {
                traction_loads[t][i] += p.weight * (r * pz[t] * f[0] - pth[t] * z * f[1] + pr[t] * z * f[2]);
            }
        }
        for (i, g) in basis.angular.eval(th) {
            let j = n_ax + i;
            let w1 = angular_combination(&g);
            rho[2][(q, j)] = w1;
            trace[(q, j)] = w1 / (r * r);
            displacement[1][(q, j)] = r * g[0];
            displacement[2][(q, j)] = g[1];
            for t in 0..loads.traction.len() {
                traction_loads[t][j] += p.weight * (r * pth[t] * g[0] - r * pr[t] * g[1]);
            }
        }
        nodes.push(NodeData {
            weight: p.weight * r,
            geometry: cylinder_geometry_point(r, p.y),
        });
    }
    Ok(CoupledSystem {
        nodes,
        stiffness: k,
        trace,
        rho,
        displacement,
        traction_loads,
        loads: loads.clone(),
        coefficients,
        grid,
        constraint: None,
    })
}

/// Reduced displacement `(v_z, w_θ)` as Hermite coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDisplacement {
    pub axial: Vec<f64>,
    pub angular: Vec<f64>,
}

impl ReducedDisplacement {
    pub fn from_coefficients(basis: &CylinderReducedBasis, u: &[f64]) -> Self {
        let (a, w) = basis.split(u);
        ReducedDisplacement {
            axial: a.to_vec(),
            angular: w.to_vec(),
        }
    }
}

/// Covariant midsurface displacement `(v_z, R v_θ, -v_r)` and its
/// derivatives at `(z, θ)`.
pub fn reconstruct_displacement(basis: &CylinderReducedBasis, rd: &ReducedDisplacement, y: [f64; 2]) -> DisplacementJet {
    let f = basis.axial.evaluate(&rd.axial, y[1]);
    let g = basis.angular.evaluate(&rd.angular, y[1]);
    crate::basis::reduced_jet(basis.radius, y[0], &f, &g)
}

/// Physical components `(v_z, v_θ, v_r)` from the covariant ones.
pub fn physical_components(radius: f64, v: &[f64; 3]) -> [f64; 3] {
    [v[0], v[1] / radius, -v[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderAssembler {
    /// Separated one-dimensional forms.
    #[default]
    ClosedForm,
    /// General pointwise assembler with the cylinder chart.
    General,
}

/// Assembles the cylindrical panel with either assembler.
pub fn assemble_cylinder(
    cfg: &CylinderConfig,
    elements: usize,
    coefficients: ModelCoefficients,
    thickness_nodes: usize,
    loads: &LoadProgram,
    assembler: CylinderAssembler,
    exec: Execution,
) -> Result<(CylinderReducedBasis, CoupledSystem)> {
    let basis = cfg.basis(elements)?;
    let quad = cfg.quadrature(elements);
    let sys = match assembler {
        CylinderAssembler::ClosedForm => {
            assemble_closed_form(cfg, &basis, &quad, coefficients, thickness_nodes, loads)?
        }
        CylinderAssembler::General => assemble(
            &cfg.chart(),
            &basis,
            &quad,
            coefficients,
            thickness_nodes,
            loads,
            exec,
        )?,
    };
    Ok((basis, sys))
}

/// Assembles and runs a cylinder scenario.
pub fn run_cylinder_scenario(
    cfg: &CylinderConfig,
    elements: usize,
    coefficients: ModelCoefficients,
    thickness_nodes: usize,
    loads: &LoadProgram,
    assembler: CylinderAssembler,
    opts: &SimulationOptions,
) -> Result<(CoupledSystem, History)> {
    let (_, sys) = assemble_cylinder(cfg, elements, coefficients, thickness_nodes, loads, assembler, opts.exec)?;
    let history = simulate(&sys, opts)?;
    Ok((sys, history))
}
