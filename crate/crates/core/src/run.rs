//! Scenario orchestration and result export.
//!
//! A run writes into the output directory:
//! - `manifest.json`: echoed configuration, derived dimensionless parameters,
//!   discretization sizes, energy summary, oracle report and code version;
//! - `timeseries.csv`: one row per time level (see [`TIMESERIES_HEADER`]);
//! - `energy.csv`: the discrete energy balance, one row per time level;
//! - `snapshots/pressure_NNNNNN.csv` and `snapshots/flexure_NNNNNN.csv`
//!   every `output.cadence` steps (NNNNNN is the step index);
//! - `snapshots/contact_NNNNNN.csv` with the same cadence when the
//!   multiplier backend is active.
//!
//! Numbers are written with `{:.12e}`, which is locale independent, and every
//! reduction runs in a fixed order, so identical configurations give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use crate::basis::PlateBasis;
use crate::config::{Backend, Overrides, RunConfig};
use crate::cylinder::{assemble_cylinder, CylinderConfig};
use crate::diagnostics::{contact_forces, energy_balance, moment_at_node, stress_at_node, EnergyReport};
use crate::error::{Result, ShellError};
use crate::geometry::{build_chart, ChartSpec, PlateChart};
use crate::material::DimensionlessParams;
use crate::multiplier::assemble_constrained;
use crate::par::Execution;
use crate::quadrature::OmegaQuadrature;
use crate::solver::{assemble, simulate_with, CoupledSystem, History, ShellState, SimulationOptions};
use crate::spectral::{compare_with_solver, OracleReport};

pub const TIMESERIES_HEADER: &str = "t,elastic_energy,pressure_energy,load_potential,total_energy,work,dissipation,residual,max_thickness_mean,max_displacement";
pub const ENERGY_HEADER: &str = "t,elastic_energy,pressure_energy,dissipation,work,residual";
pub const PRESSURE_HEADER: &str = "node,y1,y2,z3,pressure,stress_11,stress_12,stress_22";
pub const FLEXURE_HEADER: &str = "node,y1,y2,v1,v2,v3,x1,x2,x3,moment_11,moment_12,moment_22";
pub const CONTACT_HEADER: &str = "node,y1,y2,n_11,n_12,n_22";

/// Assembles the coupled system described by a validated configuration.
pub fn build_system(cfg: &RunConfig, exec: Execution) -> Result<(CoupledSystem, DimensionlessParams)> {
    let dp = cfg.material.dimensionless()?;
    let coeffs = cfg.material.coefficients()?;
    let d = &cfg.discretization;
    let elements = d.elements.pair();
    let q = d.quadrature_order;
    let sys = match (&cfg.chart, d.backend) {
        (ChartSpec::Cylinder { radius, length, angle }, Backend::Reduced) => {
            let cyl = CylinderConfig {
                radius: *radius,
                length: *length,
                angle: *angle,
            };
            assemble_cylinder(&cyl, d.elements.angular(), coeffs, d.thickness_nodes, &cfg.loads, d.assembler, exec)?.1
        }
        (ChartSpec::Plate { .. }, Backend::Reduced) => {
            let chart = build_chart(&cfg.chart)?;
            let rect = chart.domain();
            let basis = PlateBasis::new(rect, elements, cfg.boundary)?;
            let quad = OmegaQuadrature::tensor(rect, elements, [q, q]);
            assemble(&PlateChart { rect }, &basis, &quad, coeffs, d.thickness_nodes, &cfg.loads, exec)?
        }
        (_, Backend::Reduced) => {
            return Err(ShellError::InvalidParameter(
                "the reduced backend is available for plate and cylinder charts only".into(),
            ))
        }
        (spec, Backend::Multiplier) => {
            if let ChartSpec::Cylinder { angle, .. } = spec {
                if *angle >= 2.0 * std::f64::consts::PI - 1e-12 {
                    return Err(crate::cylinder::full_cylinder_error(*angle));
                }
            }
            let chart = build_chart(spec)?;
            let quad = OmegaQuadrature::tensor(chart.domain(), elements, [q, q]);
            assemble_constrained(
                chart.as_ref(),
                elements,
                cfg.boundary,
                &quad,
                coeffs,
                d.thickness_nodes,
                &cfg.loads,
                exec,
            )?
        }
    };
    Ok((sys, dp))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySummary {
    pub max_abs_residual: f64,
    pub cumulative_residual: f64,
    pub min_dissipation: f64,
    pub peak_power: f64,
    /// `5 dt · peak_power`, the per-step tolerance on the residual.
    pub residual_bound: f64,
}

impl EnergySummary {
    fn new(r: &EnergyReport, dt: f64) -> Self {
        EnergySummary {
            max_abs_residual: r.max_abs_residual,
            cumulative_residual: r.cumulative_residual,
            min_dissipation: r.min_dissipation,
            peak_power: r.peak_power,
            residual_bound: 5.0 * dt * r.peak_power,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub flexural_dofs: usize,
    pub nodes: usize,
    pub thickness_nodes: usize,
    pub energy: EnergySummary,
    pub oracle: Option<OracleReport>,
    /// Largest pointwise constraint violation (multiplier backend only).
    pub constraint_residual: Option<f64>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

/// Loads, overrides, validates and runs a configuration file.
pub fn run_file(path: &Path, overrides: &Overrides, exec: Execution) -> Result<RunSummary> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(overrides);
    cfg.validate()?;
    run(&cfg, exec)
}

/// Runs a validated configuration and writes every artifact.
pub fn run(cfg: &RunConfig, exec: Execution) -> Result<RunSummary> {
    let (sys, dp) = build_system(cfg, exec)?;
    info!(
        "assembled {} flexural dofs, {} in-plane nodes x {} thickness nodes",
        sys.dimension(),
        sys.node_count(),
        sys.grid.len()
    );
    let d = &cfg.discretization;
    let opts = SimulationOptions {
        dt: d.dt,
        t_end: d.t_end,
        integrator: d.integrator,
        exec,
        snapshot_every: cfg.output.cadence,
    };
    let steps = opts.steps();
    let report_every = (steps / 10).max(1);
    let mut k = 0usize;
    let history = simulate_with(&sys, &opts, |_, r| {
        if k > 0 && k.is_multiple_of(report_every) {
            info!("step {k}/{steps}: t = {:.4e}, energy residual = {:.3e}", r.t, r.residual);
        }
        k += 1;
    })?;

    let oracle = if cfg.oracle.check {
        let rep = compare_with_solver(&sys, &history, cfg.oracle.modes, exec)?;
        info!(
            "spectral oracle (J = {}): relative L2 pressure error {:.3e}, moment error {:.3e}",
            rep.modes, rep.pressure_relative_l2, rep.moment_relative_max
        );
        Some(rep)
    } else {
        None
    };

    let energy = energy_balance(&history.records);
    let summary_energy = EnergySummary::new(&energy, d.dt);
    if summary_energy.max_abs_residual > summary_energy.residual_bound && summary_energy.peak_power > 0.0 {
        warn!(
            "energy residual {:.3e} exceeds 5 dt peak power = {:.3e}",
            summary_energy.max_abs_residual, summary_energy.residual_bound
        );
    }

    let out = &cfg.output.dir;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;
    let mut files = Vec::new();

    let p = out.join("timeseries.csv");
    export_timeseries(&sys, &history, &p)?;
    files.push(p);
    let p = out.join("energy.csv");
    export_energy(&energy, &p)?;
    files.push(p);
    for state in &history.snapshots {
        let step = (state.t / d.dt).round() as usize;
        let p = snaps.join(format!("pressure_{step:06}.csv"));
        export_pressure_snapshot(&sys, state, &p)?;
        files.push(p);
        let p = snaps.join(format!("flexure_{step:06}.csv"));
        export_flexure_snapshot(&sys, state, &p)?;
        files.push(p);
        if state.multipliers.is_some() {
            let p = snaps.join(format!("contact_{step:06}.csv"));
            export_contact_snapshot(&sys, state, &p)?;
            files.push(p);
        }
    }

    let summary = RunSummary {
        steps,
        flexural_dofs: sys.dimension(),
        nodes: sys.node_count(),
        thickness_nodes: sys.grid.len(),
        energy: summary_energy,
        oracle,
        constraint_residual: sys.constraint.as_ref().map(|c| c.constraint_residual),
        files: Vec::new(),
    };
    let p = out.join("manifest.json");
    write_manifest(cfg, &dp, &summary, &p)?;
    files.push(p);
    info!("wrote {} files to {}", files.len(), out.display());
    Ok(RunSummary { files, ..summary })
}

fn write_manifest(cfg: &RunConfig, dp: &DimensionlessParams, summary: &RunSummary, path: &Path) -> Result<()> {
    let mut echo = serde_json::to_value(cfg).map_err(|e| ShellError::Parse(e.to_string()))?;
    // The output location does not affect results; leaving it out keeps
    // manifests of identical runs identical.
    if let Some(o) = echo.get_mut("output").and_then(|o| o.as_object_mut()) {
        o.remove("dir");
    }
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": echo,
        "dimensionless": dp,
        "run": summary,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| ShellError::Parse(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| {
        ShellError::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))
    })
}

fn push_row(s: &mut String, prefix: Option<usize>, values: &[f64]) {
    let mut first = true;
    if let Some(n) = prefix {
        let _ = write!(s, "{n}");
        first = false;
    }
    for v in values {
        if !first {
            s.push(',');
        }
        let _ = write!(s, "{v:.12e}");
        first = false;
    }
    s.push('\n');
}

fn max_displacement(sys: &CoupledSystem, u: &nalgebra::DVector<f64>) -> f64 {
    (0..sys.node_count())
        .map(|n| {
            let v = sys.displacement_at(u, n);
            let a = &sys.nodes[n].geometry.contravariant_basis;
            (a[0] * v[0] + a[1] * v[1] + a[2] * v[2]).norm()
        })
        .fold(0.0, f64::max)
}

/// One row per time level; the header is [`TIMESERIES_HEADER`].
pub fn export_timeseries(sys: &CoupledSystem, history: &History, path: &Path) -> Result<()> {
    if history.records.is_empty() {
        return Err(ShellError::UnavailableOutput("empty history".into()));
    }
    let mut s = String::from(TIMESERIES_HEADER);
    s.push('\n');
    for (r, u) in history.records.iter().zip(&history.displacements) {
        push_row(
            &mut s,
            None,
            &[
                r.t,
                r.elastic_energy,
                r.pressure_energy,
                r.load_potential,
                r.total_energy(),
                r.work,
                r.dissipation,
                r.residual,
                r.max_thickness_mean,
                max_displacement(sys, u),
            ],
        );
    }
    write_file(path, &s)
}

pub fn export_energy(report: &EnergyReport, path: &Path) -> Result<()> {
    let mut s = String::from(ENERGY_HEADER);
    s.push('\n');
    for r in &report.rows {
        push_row(&mut s, None, &[r.t, r.elastic_energy, r.pressure_energy, r.dissipation, r.work, r.residual]);
    }
    write_file(path, &s)
}

/// Pressure and the in-plane limit stress (components in the local
/// contravariant frame) at every node of the thickness grid.
pub fn export_pressure_snapshot(sys: &CoupledSystem, state: &ShellState, path: &Path) -> Result<()> {
    let nz = sys.grid.len();
    let h = sys.coefficients.thickness;
    let mut s = String::from(PRESSURE_HEADER);
    s.push('\n');
    for (n, node) in sys.nodes.iter().enumerate() {
        let y = node.geometry.y;
        for (k, z) in sys.grid.nodes.iter().enumerate() {
            let sigma = stress_at_node(sys, state, n, z / h);
            push_row(
                &mut s,
                Some(n),
                &[
                    y[0],
                    y[1],
                    z / h,
                    state.pressure[n * nz + k],
                    sigma[(0, 0)],
                    sigma[(0, 1)],
                    sigma[(1, 1)],
                ],
            );
        }
    }
    write_file(path, &s)
}

/// Displacement (covariant components and Cartesian vector) and bending
/// moment at every in-plane node.
pub fn export_flexure_snapshot(sys: &CoupledSystem, state: &ShellState, path: &Path) -> Result<()> {
    let mut s = String::from(FLEXURE_HEADER);
    s.push('\n');
    for (n, node) in sys.nodes.iter().enumerate() {
        let g = &node.geometry;
        let v = sys.displacement_at(&state.u, n);
        let a = &g.contravariant_basis;
        let x = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
        let m = moment_at_node(sys, state, n);
        push_row(
            &mut s,
            Some(n),
            &[g.y[0], g.y[1], v[0], v[1], v[2], x[0], x[1], x[2], m.t11, m.t12, m.t22],
        );
    }
    write_file(path, &s)
}

/// Contact forces (the inextensibility multipliers) at every in-plane node.
pub fn export_contact_snapshot(sys: &CoupledSystem, state: &ShellState, path: &Path) -> Result<()> {
    let n = contact_forces(state)?;
    let mut s = String::from(CONTACT_HEADER);
    s.push('\n');
    for (k, (node, t)) in sys.nodes.iter().zip(n).enumerate() {
        let y = node.geometry.y;
        push_row(&mut s, Some(k), &[y[0], y[1], t.t11, t.t12, t.t22]);
    }
    write_file(path, &s)
}
