//! Run configuration: TOML grammar, file resolution and exhaustive validation.
//!
//! All lengths in `[chart]` and all times in `[discretization]` are
//! dimensionless (lengths in units of the midsurface length L, times in units
//! of the Terzaghi time T). The `[material]` section may be given either as
//! dimensionless ratios or as SI data, from which the ratios are derived.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::ClampedEdges;
use crate::cylinder::{full_cylinder_error, CylinderAssembler};
use crate::error::{Result, ShellError};
use crate::geometry::ChartSpec;
use crate::loads::LoadProgram;
use crate::material::{nondimensionalize, DimensionlessParams, MaterialParams, ModelCoefficients};
use crate::solver::Integrator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub chart: ChartSpec,
    pub material: MaterialConfig,
    pub discretization: Discretization,
    #[serde(default)]
    pub boundary: ClampedEdges,
    #[serde(default)]
    pub loads: LoadProgram,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scaling", rename_all = "snake_case")]
pub enum MaterialConfig {
    Dimensionless {
        lambda_ratio: f64,
        alpha: f64,
        beta: f64,
        #[serde(default = "one")]
        mu_ratio: f64,
    },
    Dimensional(MaterialParams),
}

fn one() -> f64 {
    1.0
}

impl MaterialConfig {
    pub fn validation_errors(&self) -> Vec<String> {
        match self {
            MaterialConfig::Dimensional(p) => p.validation_errors(),
            MaterialConfig::Dimensionless {
                lambda_ratio,
                alpha,
                beta,
                mu_ratio,
            } => {
                let mut errs = Vec::new();
                if !(*mu_ratio > 0.0 && mu_ratio.is_finite()) {
                    errs.push(format!("material.mu_ratio must be positive (got {mu_ratio})"));
                }
                for (name, v) in [("lambda_ratio", lambda_ratio), ("alpha", alpha), ("beta", beta)] {
                    if !(*v >= 0.0 && v.is_finite()) {
                        errs.push(format!("material.{name} must be nonnegative and finite (got {v})"));
                    }
                }
                if *alpha == 0.0 && *beta == 0.0 {
                    errs.push(
                        "material.alpha and material.beta are both zero: the pressure equation loses \
                         its time derivative (storage coefficient vanishes)"
                            .into(),
                    );
                }
                errs
            }
        }
    }

    pub fn dimensionless(&self) -> Result<DimensionlessParams> {
        let errs = self.validation_errors();
        if !errs.is_empty() {
            return Err(ShellError::Config(errs));
        }
        match self {
            MaterialConfig::Dimensional(p) => nondimensionalize(p),
            MaterialConfig::Dimensionless {
                lambda_ratio,
                alpha,
                beta,
                mu_ratio,
            } => Ok(DimensionlessParams::from_ratios(*lambda_ratio, *alpha, *beta).with_mu_ratio(*mu_ratio)),
        }
    }

    pub fn coefficients(&self) -> Result<ModelCoefficients> {
        Ok(ModelCoefficients::dimensionless(&self.dimensionless()?))
    }
}

/// Mesh size: one number for both directions or one per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Elements {
    Uniform(usize),
    PerDirection([usize; 2]),
}

impl Elements {
    pub fn pair(&self) -> [usize; 2] {
        match *self {
            Elements::Uniform(n) => [n, n],
            Elements::PerDirection(p) => p,
        }
    }

    /// Angular element count of the cylinder reduction.
    pub fn angular(&self) -> usize {
        self.pair()[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Inextensible displacements built into the basis (plate, cylinder).
    #[default]
    Reduced,
    /// Constraint γ(v) = 0 imposed by multipliers on a raw space (any chart).
    Multiplier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub elements: Elements,
    #[serde(default = "default_thickness_nodes")]
    pub thickness_nodes: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub assembler: CylinderAssembler,
    /// Gauss points per element and direction for general charts.
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
}

fn default_thickness_nodes() -> usize {
    64
}

fn default_quadrature_order() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
    /// Write a snapshot every `cadence` steps.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

fn default_cadence() -> usize {
    10
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_output_dir(),
            cadence: default_cadence(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub check: bool,
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    200
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            check: false,
            modes: default_modes(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub oracle_check: bool,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ShellError::Parse(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ShellError::Config(vec![format!("cannot read config {}: {e}", path.display())]))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ChartSpec::Tabulated { path } = &mut self.chart {
            fix(path);
        }
        for t in &mut self.loads.traction {
            if let crate::loads::TimeSeries::File { path } = &mut t.series {
                fix(path);
            }
        }
        for f in &mut self.loads.flux {
            if let crate::loads::TimeSeries::File { path } = &mut f.series {
                fix(path);
            }
        }
        fix(&mut self.output.dir);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.output_dir {
            self.output.dir = d.clone();
        }
        if o.oracle_check {
            self.oracle.check = true;
        }
        if let Some(dt) = o.dt {
            self.discretization.dt = dt;
        }
        if let Some(t) = o.t_end {
            self.discretization.t_end = t;
        }
    }

    /// Every violated invariant, in section order. Load series files are
    /// read here so that missing files are reported with everything else.
    pub fn validation_errors(&mut self) -> Vec<String> {
        let mut errs = Vec::new();
        match &self.chart {
            ChartSpec::Cylinder { radius, length, angle } => {
                let cyl = crate::cylinder::CylinderConfig {
                    radius: *radius,
                    length: *length,
                    angle: *angle,
                };
                errs.extend(cyl.validation_errors().into_iter().map(|e| format!("chart: {e}")));
                if *angle >= 2.0 * PI - 1e-12 {
                    errs.push(format!("chart: {}", full_cylinder_error(*angle)));
                }
            }
            ChartSpec::Tabulated { path } if !path.is_file() => {
                errs.push(format!("chart: tabulated chart file {} does not exist", path.display()));
            }
            ChartSpec::Plate { extent } | ChartSpec::Wavy { extent, .. }
                if !(extent[0][1] > extent[0][0] && extent[1][1] > extent[1][0]) =>
            {
                errs.push(format!("chart: extent {extent:?} is not a nondegenerate rectangle"));
            }
            _ => {}
        }
        errs.extend(self.material.validation_errors());

        let d = &self.discretization;
        if !(d.dt > 0.0 && d.dt.is_finite()) {
            errs.push(format!("discretization.dt must be positive (got {})", d.dt));
        }
        if !(d.t_end >= d.dt) {
            errs.push(format!(
                "discretization.t_end ({}) must be at least dt ({})",
                d.t_end, d.dt
            ));
        }
        if d.thickness_nodes < 3 {
            errs.push(format!(
                "discretization.thickness_nodes must be at least 3 (got {})",
                d.thickness_nodes
            ));
        }
        if d.quadrature_order < 2 {
            errs.push(format!(
                "discretization.quadrature_order must be at least 2 (got {})",
                d.quadrature_order
            ));
        }
        let [n1, n2] = d.elements.pair();
        let is_cylinder = matches!(self.chart, ChartSpec::Cylinder { .. });
        match (d.backend, is_cylinder) {
            (Backend::Reduced, true) if n2 < 2 => {
                errs.push(format!("discretization.elements: the cylinder needs at least 2 angular elements (got {n2})"));
            }
            (_, _) if n1 == 0 || n2 == 0 => {
                errs.push("discretization.elements must be positive".into());
            }
            _ => {}
        }
        if d.backend == Backend::Reduced
            && matches!(self.chart, ChartSpec::Wavy { .. } | ChartSpec::Tabulated { .. })
        {
            errs.push(
                "discretization.backend = \"reduced\" is available for plate and cylinder charts only; \
                 use backend = \"multiplier\" for general charts"
                    .into(),
            );
        }
        if is_cylinder && d.backend == Backend::Reduced && self.boundary != ClampedEdges::default() {
            errs.push("boundary: the cylinder reduction is clamped on both generatrices; partial clamping needs backend = \"multiplier\"".into());
        }
        if !self.boundary.any() {
            errs.push("boundary: at least one edge must be clamped".into());
        }

        for t in &mut self.loads.traction {
            if let Err(e) = t.series.resolve(Path::new("")) {
                errs.push(e.to_string());
            }
        }
        for f in &mut self.loads.flux {
            if let Err(e) = f.series.resolve(Path::new("")) {
                errs.push(e.to_string());
            }
        }
        errs.extend(self.loads.validation_errors());

        if self.output.cadence < 1 {
            errs.push("output.cadence must be at least 1".into());
        }
        if self.oracle.modes < 1 {
            errs.push("oracle.modes must be at least 1".into());
        }
        errs
    }

    pub fn validate(&mut self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ShellError::Config(errs))
        }
    }
}
