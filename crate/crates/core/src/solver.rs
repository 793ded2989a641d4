//! Assembly and time stepping of the coupled flexural / thickness-pressure
//! system.
//!
//! Discrete unknowns: flexural coefficients `u` and, at every in-plane node
//! (a quadrature point of ω), P1 pressure values on the thickness grid.
//! With `W_n` the node weight (quadrature weight times √a), `T[n, i]` the
//! trace `A^c : ρ(φ_i)` at node n and `s_k = ∫ r φ_k dr`, the equations are
//!
//! ```text
//! K u + c_α Tᵀ W m(π) = F(t),                 m_n(π) = sᵀ π_n
//! β̄ M π̇_n − c_α (T u̇)_n s + mob D π_n = V_n(t) (e_bottom − e_top)
//! ```
//!
//! Each step eliminates the pressure node by node (every node shares the
//! same thickness matrices), solves the flexural Schur complement and then
//! recovers the pressure.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::FlexuralBasis;
use crate::error::{Result, ShellError};
use crate::geometry::{geometry_at, Chart, GeometryPoint};
use crate::loads::LoadProgram;
use crate::material::ModelCoefficients;
use crate::par::Execution;
use crate::quadrature::OmegaQuadrature;
use crate::strain::{bending_strain, SymTensor2};
use crate::tridiag::{SymTridiagonal, TridiagonalFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    ImplicitEuler,
    CrankNicolson,
}

/// Uniform P1 grid across the thickness `[-h/2, h/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessGrid {
    pub thickness: f64,
    pub nodes: Vec<f64>,
    /// Consistent mass matrix.
    pub mass: DMatrix<f64>,
    /// Stiffness `∫ φ_k' φ_l'`.
    pub stiffness: DMatrix<f64>,
    /// `∫ r φ_k dr`.
    pub moment: DVector<f64>,
    /// `∫ φ_k dr`.
    pub mean: DVector<f64>,
    /// Banded copies of `mass` and `stiffness`.
    pub mass_band: SymTridiagonal,
    pub stiffness_band: SymTridiagonal,
}

impl ThicknessGrid {
    pub const MIN_NODES: usize = 3;

    pub fn new(n: usize, thickness: f64) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(ShellError::Config(vec![format!(
                "thickness grid needs at least {} nodes (got {n})",
                Self::MIN_NODES
            )]));
        }
        let h = thickness / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n)
            .map(|k| {
                // Mirror the upper half so the grid is exactly symmetric.
                let r = -0.5 * thickness + k as f64 * h;
                if 2 * k + 1 > n {
                    0.5 * thickness - (n - 1 - k) as f64 * h
                } else {
                    r
                }
            })
            .collect();
        let mut mass = DMatrix::zeros(n, n);
        let mut stiffness = DMatrix::zeros(n, n);
        let mut moment = DVector::zeros(n);
        let mut mean = DVector::zeros(n);
        for e in 0..n - 1 {
            let (a, b) = (nodes[e], nodes[e + 1]);
            let he = b - a;
            mass[(e, e)] += he / 3.0;
            mass[(e + 1, e + 1)] += he / 3.0;
            mass[(e, e + 1)] += he / 6.0;
            mass[(e + 1, e)] += he / 6.0;
            stiffness[(e, e)] += 1.0 / he;
            stiffness[(e + 1, e + 1)] += 1.0 / he;
            stiffness[(e, e + 1)] -= 1.0 / he;
            stiffness[(e + 1, e)] -= 1.0 / he;
            moment[e] += he * (2.0 * a + b) / 6.0;
            moment[e + 1] += he * (a + 2.0 * b) / 6.0;
            mean[e] += 0.5 * he;
            mean[e + 1] += 0.5 * he;
        }
        Ok(ThicknessGrid {
            thickness,
            nodes,
            mass_band: SymTridiagonal::from_dense(&mass),
            stiffness_band: SymTridiagonal::from_dense(&stiffness),
            mass,
            stiffness,
            moment,
            mean,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One in-plane node of the pressure grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeData {
    /// Quadrature weight times area element.
    pub weight: f64,
    pub geometry: GeometryPoint,
}

/// Data kept by the multiplier backend to recover contact forces.
#[derive(Debug, Clone)]
pub struct ConstraintData {
    /// Columns span the discrete inextensible space inside the raw space.
    pub nullspace: DMatrix<f64>,
    pub raw_stiffness: DMatrix<f64>,
    pub raw_trace: DMatrix<f64>,
    pub raw_traction_loads: Vec<DVector<f64>>,
    /// Pseudo-inverse of the transposed constraint matrix.
    pub multiplier_map: DMatrix<f64>,
    /// `max |B Z|`, the constraint residual of the projected basis.
    pub constraint_residual: f64,
}

/// Assembled discrete system.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub nodes: Vec<NodeData>,
    /// Bending stiffness `K`.
    pub stiffness: DMatrix<f64>,
    /// `T[n, i] = A^c : ρ(φ_i)` at node n.
    pub trace: DMatrix<f64>,
    /// `ρ_11, ρ_12, ρ_22` of every basis function at every node.
    pub rho: [DMatrix<f64>; 3],
    /// Covariant displacement components of every basis function.
    pub displacement: [DMatrix<f64>; 3],
    /// One load vector per traction term (before the time factor).
    pub traction_loads: Vec<DVector<f64>>,
    pub loads: LoadProgram,
    pub coefficients: ModelCoefficients,
    pub grid: ThicknessGrid,
    pub constraint: Option<ConstraintData>,
}

/// Per-node output of the general assembler.
struct NodeRows {
    geometry: GeometryPoint,
    weight: f64,
    idx: Vec<usize>,
    rho: Vec<SymTensor2>,
    disp: Vec<[f64; 3]>,
    trace: Vec<f64>,
    /// Dense local stiffness, row-major over `idx`.
    local_k: Vec<f64>,
}

/// `tr(A^c X A^c Y)` for symmetric X, Y.
pub fn metric_pairing(acon: &nalgebra::Matrix2<f64>, x: &SymTensor2, y: &SymTensor2) -> f64 {
    (acon * x.to_matrix() * acon * y.to_matrix()).trace()
}

/// `A^c : X`.
pub fn metric_trace(acon: &nalgebra::Matrix2<f64>, x: &SymTensor2) -> f64 {
    (acon * x.to_matrix()).trace()
}

/// Bending energy density pairing `𝒞̃(A^c ρ_a) : ρ_b A^c` without the
/// thickness factor.
pub fn bending_density(c: &ModelCoefficients, acon: &nalgebra::Matrix2<f64>, a: &SymTensor2, b: &SymTensor2) -> f64 {
    c.trace_coefficient() * metric_trace(acon, a) * metric_trace(acon, b)
        + 2.0 * c.mu * metric_pairing(acon, a, b)
}

fn rect_close(a: &crate::geometry::Rect, b: &crate::geometry::Rect) -> bool {
    let tol = 1e-12 * a.diameter().max(1.0);
    (0..2).all(|i| (a.lo[i] - b.lo[i]).abs() <= tol && (a.hi[i] - b.hi[i]).abs() <= tol)
}

/// General assembler: evaluates geometry, strains and loads pointwise at
/// the quadrature points for any chart and basis.
pub fn assemble(
    chart: &dyn Chart,
    basis: &dyn FlexuralBasis,
    quadrature: &OmegaQuadrature,
    coefficients: ModelCoefficients,
    thickness_nodes: usize,
    loads: &LoadProgram,
    exec: Execution,
) -> Result<CoupledSystem> {
    if !rect_close(&quadrature.rect, &basis.domain()) || !rect_close(&chart.domain(), &basis.domain()) {
        return Err(ShellError::QuadratureMismatch(format!(
            "quadrature rectangle {:?}, basis domain {:?} and chart domain {:?} differ",
            quadrature.rect,
            basis.domain(),
            chart.domain()
        )));
    }
    let grid = ThicknessGrid::new(thickness_nodes, coefficients.thickness)?;
    let dim = basis.dimension();
    let scale = coefficients.bending_scale();
    let rows: Vec<Result<NodeRows>> = exec.map(quadrature.len(), |q| {
        let p = quadrature.points[q];
        let g = geometry_at(chart, p.y)?;
        let jets = basis.jets(p.y);
        let idx: Vec<usize> = jets.iter().map(|(i, _)| *i).collect();
        let rho: Vec<SymTensor2> = jets.iter().map(|(_, j)| bending_strain(j, &g)).collect();
        let disp: Vec<[f64; 3]> = jets.iter().map(|(_, j)| j.v).collect();
        let trace: Vec<f64> = rho.iter().map(|r| metric_trace(&g.metric_con, r)).collect();
        let w = p.weight * g.sqrt_a;
        let n = idx.len();
        let mut local_k = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let v = w * scale * bending_density(&coefficients, &g.metric_con, &rho[a], &rho[b]);
                local_k[a * n + b] = v;
                local_k[b * n + a] = v;
            }
        }
        Ok(NodeRows {
            geometry: g,
            weight: w,
            idx,
            rho,
            disp,
            trace,
            local_k,
        })
    });
    let n_nodes = quadrature.len();
    let mut stiffness = DMatrix::zeros(dim, dim);
    let mut trace = DMatrix::zeros(n_nodes, dim);
    let mut rho = [0, 1, 2].map(|_| DMatrix::zeros(n_nodes, dim));
    let mut displacement = [0, 1, 2].map(|_| DMatrix::zeros(n_nodes, dim));
    let mut traction_loads = vec![DVector::zeros(dim); loads.traction.len()];
    let mut nodes = Vec::with_capacity(n_nodes);
    for (q, r) in rows.into_iter().enumerate() {
        let r = r?;
        let n = r.idx.len();
        for a in 0..n {
            let i = r.idx[a];
            for b in 0..n {
                stiffness[(i, r.idx[b])] += r.local_k[a * n + b];
            }
            trace[(q, i)] += r.trace[a];
            rho[0][(q, i)] += r.rho[a].t11;
            rho[1][(q, i)] += r.rho[a].t12;
            rho[2][(q, i)] += r.rho[a].t22;
            for c in 0..3 {
                displacement[c][(q, i)] += r.disp[a][c];
            }
            for (k, term) in loads.traction.iter().enumerate() {
                let c = term.component - 1;
                traction_loads[k][i] += r.weight * term.profile.value(r.geometry.y) * r.disp[a][c];
            }
        }
        nodes.push(NodeData {
            weight: r.weight,
            geometry: r.geometry,
        });
    }
    Ok(CoupledSystem {
        nodes,
        stiffness,
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

impl CoupledSystem {
    pub fn dimension(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn thickness_len(&self) -> usize {
        self.grid.len()
    }

    /// Traction load vector at time t.
    pub fn traction_vector(&self, t: f64) -> DVector<f64> {
        let mut f = DVector::zeros(self.dimension());
        for (term, v) in self.loads.traction.iter().zip(&self.traction_loads) {
            let s = term.series.value(t);
            if s != 0.0 {
                f.axpy(s, v, 1.0);
            }
        }
        f
    }

    /// Normal flux at every node.
    pub fn flux_values(&self, t: f64) -> Vec<f64> {
        self.nodes.iter().map(|n| self.loads.flux_at(n.geometry.y, t)).collect()
    }

    fn column<'a>(&self, pressure: &'a [f64], n: usize) -> &'a [f64] {
        let nz = self.grid.len();
        &pressure[n * nz..(n + 1) * nz]
    }

    /// `∫ r π dr` per node.
    pub fn moments(&self, pressure: &[f64]) -> Vec<f64> {
        (0..self.node_count())
            .map(|n| dot(self.grid.moment.as_slice(), self.column(pressure, n)))
            .collect()
    }

    /// `∫ π dr` per node.
    pub fn thickness_means(&self, pressure: &[f64]) -> Vec<f64> {
        (0..self.node_count())
            .map(|n| dot(self.grid.mean.as_slice(), self.column(pressure, n)))
            .collect()
    }

    /// Coupling load `c_α Tᵀ W m`.
    pub fn coupling_load(&self, moments: &[f64]) -> DVector<f64> {
        let c = self.coefficients.coupling();
        let wm = DVector::from_iterator(
            self.node_count(),
            self.nodes.iter().zip(moments).map(|(n, m)| c * n.weight * m),
        );
        self.trace.tr_mul(&wm)
    }

    /// Pressure-equation source `c_α W_n (T δu)_n s_k` of a displacement
    /// increment, laid out like the pressure vector.
    pub fn coupling_source(&self, du: &DVector<f64>) -> Vec<f64> {
        let c = self.coefficients.coupling();
        let tau = &self.trace * du;
        let nz = self.grid.len();
        let mut out = vec![0.0; self.node_count() * nz];
        for n in 0..self.node_count() {
            for k in 0..nz {
                out[n * nz + k] = c * self.nodes[n].weight * tau[n] * self.grid.moment[k];
            }
        }
        out
    }

    pub fn bending_strain_at(&self, u: &DVector<f64>, n: usize) -> SymTensor2 {
        let r = |c: usize| self.rho[c].row(n).transpose().dot(u);
        SymTensor2::new(r(0), r(1), r(2))
    }

    pub fn displacement_at(&self, u: &DVector<f64>, n: usize) -> [f64; 3] {
        [0, 1, 2].map(|c| self.displacement[c].row(n).transpose().dot(u))
    }

    pub fn elastic_energy(&self, u: &DVector<f64>) -> f64 {
        0.5 * u.dot(&(&self.stiffness * u))
    }

    pub fn pressure_energy(&self, pressure: &[f64]) -> f64 {
        let bb = self.coefficients.beta_bar();
        let m = &self.grid.mass_band;
        (0..self.node_count())
            .map(|n| 0.5 * self.nodes[n].weight * bb * m.quadratic(self.column(pressure, n)))
            .sum()
    }

    pub fn dissipation(&self, pressure: &[f64]) -> f64 {
        let mob = self.coefficients.mobility;
        let d = &self.grid.stiffness_band;
        (0..self.node_count())
            .map(|n| self.nodes[n].weight * mob * d.quadratic(self.column(pressure, n)))
            .sum()
    }

    /// Flux work rate `Σ W_n V_n (π_bottom − π_top)`.
    pub fn flux_power(&self, flux: &[f64], pressure: &[f64]) -> f64 {
        let nz = self.grid.len();
        (0..self.node_count())
            .map(|n| {
                let col = self.column(pressure, n);
                self.nodes[n].weight * flux[n] * (col[0] - col[nz - 1])
            })
            .sum()
    }

    /// Restricts the system to the span of `nullspace` (columns in the raw
    /// coefficient space) and keeps what is needed for the multipliers.
    pub fn project(self, nullspace: DMatrix<f64>, multiplier_map: DMatrix<f64>, constraint_residual: f64) -> Self {
        let z = &nullspace;
        let stiffness = z.transpose() * &self.stiffness * z;
        let trace = &self.trace * z;
        let rho = [0, 1, 2].map(|c| &self.rho[c] * z);
        let displacement = [0, 1, 2].map(|c| &self.displacement[c] * z);
        let traction_loads = self.traction_loads.iter().map(|f| z.tr_mul(f)).collect();
        CoupledSystem {
            nodes: self.nodes,
            stiffness,
            trace,
            rho,
            displacement,
            traction_loads,
            loads: self.loads,
            coefficients: self.coefficients,
            grid: self.grid,
            constraint: Some(ConstraintData {
                raw_stiffness: self.stiffness,
                raw_trace: self.trace,
                raw_traction_loads: self.traction_loads,
                multiplier_map,
                constraint_residual,
                nullspace,
            }),
        }
    }

    /// Contact forces `(n_11, n_12, n_22)` per node, or `None` without a
    /// constraint backend.
    pub fn multipliers(&self, u: &DVector<f64>, pressure: &[f64], t: f64) -> Option<Vec<SymTensor2>> {
        let cd = self.constraint.as_ref()?;
        let mut f = DVector::zeros(cd.raw_stiffness.nrows());
        for (term, v) in self.loads.traction.iter().zip(&cd.raw_traction_loads) {
            f.axpy(term.series.value(t), v, 1.0);
        }
        let raw_u = &cd.nullspace * u;
        let c = self.coefficients.coupling();
        let wm = DVector::from_iterator(
            self.node_count(),
            self.nodes.iter().zip(self.moments(pressure)).map(|(n, m)| c * n.weight * m),
        );
        let r = f - &cd.raw_stiffness * raw_u - cd.raw_trace.tr_mul(&wm);
        let n = &cd.multiplier_map * r;
        Some((0..self.node_count()).map(|q| SymTensor2::new(n[3 * q], n[3 * q + 1], n[3 * q + 2])).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Condition number estimate of a symmetric matrix from its spectrum.
pub fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn spd_factor(m: &DMatrix<f64>, context: &str) -> Result<Cholesky<f64, Dyn>> {
    if m.nrows() == 0 {
        return Err(ShellError::TrivialFlexuralSpace(format!(
            "{context}: the discrete flexural space has dimension 0"
        )));
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if !(min > 1e-13 * max) {
        return Err(ShellError::SingularSystem {
            context: context.to_string(),
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
        });
    }
    Cholesky::new(m.clone()).ok_or_else(|| ShellError::SingularSystem {
        context: context.to_string(),
        condition: max / min,
    })
}

/// Shell state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellState {
    pub t: f64,
    pub u: DVector<f64>,
    /// Node-major: `pressure[n * N_z + k]`.
    pub pressure: Vec<f64>,
    pub multipliers: Option<Vec<SymTensor2>>,
}

/// Energy bookkeeping for one step (or the initial state, with zero rates).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub elastic_energy: f64,
    pub pressure_energy: f64,
    /// `F(t) · u`.
    pub load_potential: f64,
    pub dissipation: f64,
    pub work: f64,
    /// `ΔE + dt (dissipation − work)`.
    pub residual: f64,
    pub max_thickness_mean: f64,
}

impl StepRecord {
    pub fn total_energy(&self) -> f64 {
        self.elastic_energy + self.pressure_energy - self.load_potential
    }
}

/// Fixed-step integrator for one assembled system.
pub struct Stepper<'a> {
    sys: &'a CoupledSystem,
    pub dt: f64,
    pub integrator: Integrator,
    exec: Execution,
    thickness_factor: TridiagonalFactor,
    /// `β̄ M`.
    mass_bar: SymTridiagonal,
    /// `mob D`.
    diffusion: SymTridiagonal,
    /// `A_z⁻¹ s`.
    z: DVector<f64>,
    kappa: f64,
    schur: Cholesky<f64, Dyn>,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a CoupledSystem, dt: f64, integrator: Integrator, exec: Execution) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ShellError::InvalidParameter(format!("time step must be positive (got {dt})")));
        }
        let c = &sys.coefficients;
        let theta = match integrator {
            Integrator::ImplicitEuler => 1.0,
            Integrator::CrankNicolson => 0.5,
        };
        let mass_bar = sys.grid.mass_band.combine(c.beta_bar(), &sys.grid.mass_band, 0.0);
        let diffusion = sys.grid.stiffness_band.combine(c.mobility, &sys.grid.stiffness_band, 0.0);
        let az = mass_bar.combine(1.0, &diffusion, theta * dt);
        let thickness_factor = TridiagonalFactor::new(&az)
            .filter(|f| f.min_pivot() > 1e-13 * az.diag.iter().fold(0.0f64, |m, d| m.max(d.abs())))
            .ok_or_else(|| ShellError::SingularSystem {
                context: "thickness pressure matrix".into(),
                condition: f64::INFINITY,
            })?;
        let mut z = sys.grid.moment.clone();
        thickness_factor.solve(z.as_mut_slice());
        let kappa = sys.grid.moment.dot(&z);
        let ca = c.coupling();
        let mut schur = sys.stiffness.clone();
        for n in 0..sys.node_count() {
            let w = ca * ca * kappa * sys.nodes[n].weight;
            let row = sys.trace.row(n);
            schur.ger(w, &row.transpose(), &row.transpose(), 1.0);
        }
        let schur = spd_factor(&schur, "flexural Schur complement")?;
        Ok(Stepper {
            sys,
            dt,
            integrator,
            exec,
            thickness_factor,
            mass_bar,
            diffusion,
            z,
            kappa,
            schur,
        })
    }

    /// State at t = 0: given initial pressure (zero by default) and the
    /// static flexural solution `K u = F(0) − C π(0)`.
    pub fn initial_state(&self, pressure: Option<Vec<f64>>) -> Result<(ShellState, StepRecord)> {
        let sys = self.sys;
        let pressure = pressure.unwrap_or_else(|| vec![0.0; sys.node_count() * sys.grid.len()]);
        let f0 = sys.traction_vector(0.0);
        let rhs = &f0 - sys.coupling_load(&sys.moments(&pressure));
        let u = if rhs.iter().all(|v| *v == 0.0) {
            DVector::zeros(sys.dimension())
        } else {
            let k = Cholesky::new(sys.stiffness.clone()).ok_or_else(|| {
                ShellError::NotPositiveDefinite(
                    "bending stiffness could not be factored; check the chart and clamped edges".into(),
                )
            })?;
            k.solve(&rhs)
        };
        let multipliers = sys.multipliers(&u, &pressure, 0.0);
        let record = StepRecord {
            t: 0.0,
            elastic_energy: sys.elastic_energy(&u),
            pressure_energy: sys.pressure_energy(&pressure),
            load_potential: f0.dot(&u),
            max_thickness_mean: max_abs(&sys.thickness_means(&pressure)),
            ..Default::default()
        };
        Ok((
            ShellState {
                t: 0.0,
                u,
                pressure,
                multipliers,
            },
            record,
        ))
    }

    /// Advances one step and returns the new state with its energy record.
    pub fn step(&self, state: &ShellState, previous: &StepRecord) -> Result<(ShellState, StepRecord)> {
        let sys = self.sys;
        let dt = self.dt;
        let nz = sys.grid.len();
        let nn = sys.node_count();
        let t1 = state.t + dt;
        let ca = sys.coefficients.coupling();
        let f0 = sys.traction_vector(state.t);
        let f1 = sys.traction_vector(t1);
        let v0 = sys.flux_values(state.t);
        let v1 = sys.flux_values(t1);
        let forcing: Vec<f64> = match self.integrator {
            Integrator::ImplicitEuler => v1.clone(),
            Integrator::CrankNicolson => v0.iter().zip(&v1).map(|(a, b)| 0.5 * (a + b)).collect(),
        };

        // Node-local eliminations y_n = A_z⁻¹ h_n.
        let ys: Vec<Vec<f64>> = self.exec.map(nn, |n| {
            let p = &state.pressure[n * nz..(n + 1) * nz];
            let mut h = vec![0.0; nz];
            self.mass_bar.mul_add(p, 1.0, &mut h);
            if self.integrator == Integrator::CrankNicolson {
                self.diffusion.mul_add(p, -0.5 * dt, &mut h);
            }
            h[0] += dt * forcing[n];
            h[nz - 1] -= dt * forcing[n];
            self.thickness_factor.solve(&mut h);
            h
        });
        let tau0 = &sys.trace * &state.u;
        let effective: Vec<f64> = (0..nn)
            .map(|n| dot(sys.grid.moment.as_slice(), &ys[n]) - ca * self.kappa * tau0[n])
            .collect();
        let rhs = &f1 - sys.coupling_load(&effective);
        let u1 = self.schur.solve(&rhs);
        let tau1 = &sys.trace * &u1;
        let mut pressure = vec![0.0; nn * nz];
        self.exec.for_each_chunk(&mut pressure, nz, |n, col| {
            let shift = ca * (tau1[n] - tau0[n]);
            for k in 0..nz {
                col[k] = ys[n][k] + shift * self.z[k];
            }
        });

        let (diss, work) = match self.integrator {
            Integrator::ImplicitEuler => (
                sys.dissipation(&pressure),
                -(&f1 - &f0).dot(&state.u) / dt + sys.flux_power(&v1, &pressure),
            ),
            Integrator::CrankNicolson => {
                let mid: Vec<f64> = pressure.iter().zip(&state.pressure).map(|(a, b)| 0.5 * (a + b)).collect();
                let umid = (&u1 + &state.u) * 0.5;
                (
                    sys.dissipation(&mid),
                    -(&f1 - &f0).dot(&umid) / dt + sys.flux_power(&forcing, &mid),
                )
            }
        };
        let mut record = StepRecord {
            t: t1,
            elastic_energy: sys.elastic_energy(&u1),
            pressure_energy: sys.pressure_energy(&pressure),
            load_potential: f1.dot(&u1),
            dissipation: diss,
            work,
            residual: 0.0,
            max_thickness_mean: max_abs(&sys.thickness_means(&pressure)),
        };
        record.residual = record.total_energy() - previous.total_energy() + dt * (diss - work);
        let multipliers = sys.multipliers(&u1, &pressure, t1);
        Ok((
            ShellState {
                t: t1,
                u: u1,
                pressure,
                multipliers,
            },
            record,
        ))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub exec: Execution,
    /// Keep every `snapshot_every`-th state (the initial and final states
    /// are always kept).
    pub snapshot_every: usize,
}

impl SimulationOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SimulationOptions {
            dt,
            t_end,
            integrator: Integrator::ImplicitEuler,
            exec: Execution::Parallel,
            snapshot_every: usize::MAX,
        }
    }

    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Trajectory of a run.
#[derive(Debug, Clone)]
pub struct History {
    /// Record 0 is the initial state.
    pub records: Vec<StepRecord>,
    /// Flexural coefficients at every time level.
    pub displacements: Vec<DVector<f64>>,
    pub snapshots: Vec<ShellState>,
    pub final_state: ShellState,
}

/// Runs `steps()` steps from the zero-pressure initial state, calling
/// `observe` after every step.
pub fn simulate_with<F>(sys: &CoupledSystem, opts: &SimulationOptions, mut observe: F) -> Result<History>
where
    F: FnMut(&ShellState, &StepRecord),
{
    let stepper = Stepper::new(sys, opts.dt, opts.integrator, opts.exec)?;
    let (mut state, mut record) = stepper.initial_state(None)?;
    observe(&state, &record);
    let mut records = vec![record];
    let mut displacements = vec![state.u.clone()];
    let mut snapshots = vec![state.clone()];
    let n = opts.steps();
    for k in 1..=n {
        let (s, r) = stepper.step(&state, &record)?;
        state = s;
        record = r;
        observe(&state, &record);
        records.push(record);
        displacements.push(state.u.clone());
        if k == n || (opts.snapshot_every > 0 && k % opts.snapshot_every == 0) {
            snapshots.push(state.clone());
        }
    }
    Ok(History {
        records,
        displacements,
        snapshots,
        final_state: state,
    })
}

pub fn simulate(sys: &CoupledSystem, opts: &SimulationOptions) -> Result<History> {
    simulate_with(sys, opts, |_, _| {})
}
