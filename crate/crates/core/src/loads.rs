//! Time-dependent surface tractions and normal flux.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

/// Scalar time function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeSeries {
    #[default]
    Zero,
    /// `slope * t`.
    Ramp { slope: f64 },
    /// `amplitude * sin(omega * t)`.
    Sine { amplitude: f64, omega: f64 },
    Constant { value: f64 },
    /// Linear interpolation between samples, held constant outside.
    Samples { times: Vec<f64>, values: Vec<f64> },
    /// CSV file with columns `t, value`; resolved into `Samples` on load.
    File { path: PathBuf },
}

impl TimeSeries {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeSeries::Zero | TimeSeries::File { .. } => 0.0,
            TimeSeries::Ramp { slope } => slope * t,
            TimeSeries::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
            TimeSeries::Constant { value } => *value,
            TimeSeries::Samples { times, values } => interpolate(times, values, t),
        }
    }

    /// Replaces a `File` series by its samples (paths relative to `base`).
    pub fn resolve(&mut self, base: &Path) -> Result<()> {
        if let TimeSeries::File { path } = self {
            let full = if path.is_absolute() { path.clone() } else { base.join(&*path) };
            let text = std::fs::read_to_string(&full).map_err(|e| {
                ShellError::Config(vec![format!("cannot read load series {}: {e}", full.display())])
            })?;
            let (times, values) = parse_series_csv(&text)?;
            *self = TimeSeries::Samples { times, values };
        }
        Ok(())
    }

    pub fn validation_errors(&self, what: &str) -> Vec<String> {
        let mut errs = Vec::new();
        if let TimeSeries::Samples { times, values } = self {
            if times.is_empty() || times.len() != values.len() {
                errs.push(format!("{what}: samples need equal, nonzero numbers of times and values"));
            } else if times.windows(2).any(|w| !(w[1] > w[0])) {
                errs.push(format!("{what}: sample times must be strictly increasing"));
            }
        }
        errs
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if times.is_empty() {
        return 0.0;
    }
    if t <= times[0] {
        return values[0];
    }
    let k = times.partition_point(|s| *s <= t);
    if k >= times.len() {
        return *values.last().unwrap();
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let s = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - s) + values[k] * s
}

/// Parses `t, value` rows; a non-numeric first row is taken as a header.
pub fn parse_series_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() >= 2 => {
                times.push(v[0]);
                values.push(v[1]);
            }
            Err(_) if times.is_empty() && ln == 0 => continue,
            _ => {
                return Err(ShellError::Parse(format!(
                    "load series line {}: expected `t, value`",
                    ln + 1
                )))
            }
        }
    }
    Ok((times, values))
}

/// Spatial profile `c0 + c1 y1 + c2 y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineProfile {
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
}

impl Default for AffineProfile {
    fn default() -> Self {
        AffineProfile {
            c0: 1.0,
            c1: 0.0,
            c2: 0.0,
        }
    }
}

impl AffineProfile {
    pub fn value(&self, y: [f64; 2]) -> f64 {
        self.c0 + self.c1 * y[0] + self.c2 * y[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    Upper,
    Lower,
}

/// One covariant component of a face traction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionTerm {
    pub face: Face,
    /// Component index 1, 2 or 3.
    pub component: usize,
    #[serde(default)]
    pub profile: AffineProfile,
    pub series: TimeSeries,
}

/// Normal flux term `V(y, t) = profile(y) series(t)`, the same on both faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxTerm {
    #[serde(default)]
    pub profile: AffineProfile,
    pub series: TimeSeries,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProgram {
    #[serde(default)]
    pub traction: Vec<TractionTerm>,
    #[serde(default)]
    pub flux: Vec<FluxTerm>,
    /// Permits loads that do not vanish at t = 0.
    #[serde(default)]
    pub allow_nonzero_initial: bool,
}

impl LoadProgram {
    pub fn zero() -> Self {
        LoadProgram::default()
    }

    pub fn ramp_flux(slope: f64) -> Self {
        LoadProgram {
            flux: vec![FluxTerm {
                profile: AffineProfile::default(),
                series: TimeSeries::Ramp { slope },
            }],
            ..Default::default()
        }
    }

    pub fn resolve_files(&mut self, base: &Path) -> Result<()> {
        for t in &mut self.traction {
            t.series.resolve(base)?;
        }
        for f in &mut self.flux {
            f.series.resolve(base)?;
        }
        Ok(())
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (i, t) in self.traction.iter().enumerate() {
            let what = format!("loads.traction[{i}]");
            if !(1..=3).contains(&t.component) {
                errs.push(format!("{what}: component must be 1, 2 or 3 (got {})", t.component));
            }
            errs.extend(t.series.validation_errors(&what));
            if !self.allow_nonzero_initial && t.series.value(0.0) != 0.0 {
                errs.push(format!(
                    "{what}: traction must vanish at t = 0 (set loads.allow_nonzero_initial to override)"
                ));
            }
        }
        for (i, f) in self.flux.iter().enumerate() {
            let what = format!("loads.flux[{i}]");
            errs.extend(f.series.validation_errors(&what));
            if !self.allow_nonzero_initial && f.series.value(0.0) != 0.0 {
                errs.push(format!(
                    "{what}: flux must vanish at t = 0 (set loads.allow_nonzero_initial to override)"
                ));
            }
        }
        errs
    }

    pub fn flux_at(&self, y: [f64; 2], t: f64) -> f64 {
        self.flux.iter().map(|f| f.profile.value(y) * f.series.value(t)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.traction.iter().all(|t| matches!(t.series, TimeSeries::Zero))
            && self.flux.iter().all(|f| matches!(f.series, TimeSeries::Zero))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_interpolation() {
        let s = TimeSeries::Samples {
            times: vec![0.0, 1.0, 3.0],
            values: vec![0.0, 2.0, 0.0],
        };
        assert_eq!(s.value(0.5), 1.0);
        assert_eq!(s.value(2.0), 1.0);
        assert_eq!(s.value(5.0), 0.0);
    }

    #[test]
    fn csv_with_header() {
        let (t, v) = parse_series_csv("t,value\n0,0\n0.5, 1.5\n").unwrap();
        assert_eq!(t, vec![0.0, 0.5]);
        assert_eq!(v, vec![0.0, 1.5]);
        assert!(parse_series_csv("0,0\nx,y\n").is_err());
    }

    #[test]
    fn initial_compatibility() {
        let mut p = LoadProgram::zero();
        p.flux.push(FluxTerm {
            profile: AffineProfile::default(),
            series: TimeSeries::Constant { value: 1.0 },
        });
        assert_eq!(p.validation_errors().len(), 1);
        p.allow_nonzero_initial = true;
        assert!(p.validation_errors().is_empty());
    }
}
