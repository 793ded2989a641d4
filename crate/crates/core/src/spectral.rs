//! Separation-of-variables solution of the thickness pressure problem with
//! zero initial pressure:
//!
//! ```text
//! π(t, z) = -V z - 4/(β̄π²) Σ_j (-1)^j/(2j-1)² I_j(t) sin((2j-1)π z)
//! ∫ z π dz = -V/12 + 8/(π⁴β̄) Σ_j I_j(t)/(2j-1)⁴
//! I_j(t) = ∫_0^t exp(-π²(2j-1)²(t-τ)/β̄) ∂_τ g(τ) dτ,   g = β̄ V + c_α A^c:ρ(u)
//! ```
//!
//! The convolutions are advanced exactly for piecewise-linear `g`.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Result, ShellError};
use crate::material::ModelCoefficients;
use crate::par::Execution;
use crate::solver::{CoupledSystem, History};

/// Per-mode exponential accumulators for one in-plane point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSeries {
    pub beta_bar: f64,
    /// Decay rates `π²(2j-1)²/β̄`.
    decay: Vec<f64>,
    acc: Vec<f64>,
    t: f64,
    g: f64,
    v: f64,
    exec: Execution,
}

impl SpectralSeries {
    pub fn new(modes: usize, beta_bar: f64) -> Result<Self> {
        if modes == 0 {
            return Err(ShellError::InvalidParameter("spectral series needs at least one mode".into()));
        }
        if !(beta_bar > 0.0) {
            return Err(ShellError::InvalidParameter(format!(
                "spectral series needs a positive storage coefficient (got {beta_bar})"
            )));
        }
        let decay = (1..=modes)
            .map(|j| {
                let k = (2 * j - 1) as f64;
                PI * PI * k * k / beta_bar
            })
            .collect();
        Ok(SpectralSeries {
            beta_bar,
            decay,
            acc: vec![0.0; modes],
            t: 0.0,
            g: 0.0,
            v: 0.0,
            exec: Execution::Sequential,
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn modes(&self) -> usize {
        self.decay.len()
    }

    /// Starts the history at `(t0, v0, g0)`; nonzero initial data violate
    /// the zero-initial-pressure assumption and are reported.
    pub fn start(&mut self, t0: f64, v0: f64, g0: f64) {
        if v0 != 0.0 {
            log::warn!("spectral oracle: V(0) = {v0} is nonzero; the series assumes zero initial data");
        }
        self.t = t0;
        self.v = v0;
        self.g = g0;
        self.acc.iter_mut().for_each(|a| *a = 0.0);
    }

    /// Appends a sample of the flux `v` and drive `g` at time `t`.
    pub fn push(&mut self, t: f64, v: f64, g: f64) {
        let dt = t - self.t;
        if dt <= 0.0 {
            self.v = v;
            self.g = g;
            return;
        }
        let rate = (g - self.g) / dt;
        let decay = &self.decay;
        let acc = &self.acc;
        self.acc = self.exec.map(decay.len(), |j| {
            let x = decay[j] * dt;
            (-x).exp() * acc[j] - rate * (-x).exp_m1() / decay[j]
        });
        self.t = t;
        self.v = v;
        self.g = g;
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn pressure(&self, z3: f64) -> f64 {
        let terms = self.exec.map(self.modes(), |j| {
            let k = (2 * j + 1) as f64;
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            sign / (k * k) * self.acc[j] * (k * PI * z3).sin()
        });
        -self.v * z3 - 4.0 / (self.beta_bar * PI * PI) * terms.iter().sum::<f64>()
    }

    pub fn moment(&self) -> f64 {
        let terms = self.exec.map(self.modes(), |j| {
            let k = (2 * j + 1) as f64;
            self.acc[j] / k.powi(4)
        });
        -self.v / 12.0 + 8.0 / (PI.powi(4) * self.beta_bar) * terms.iter().sum::<f64>()
    }
}

/// Source `g = β̄ V + c_α A^c:ρ(u)` driving the series.
pub fn drive(coefficients: &ModelCoefficients, flux: f64, trace: f64) -> f64 {
    coefficients.beta_bar() * flux + coefficients.coupling() * trace
}

/// Truncated kernel sum `(8/π⁴) Σ_{j ≤ J} (2j-1)^{-4}`, which tends to 1/12.
pub fn kernel_normalization(modes: usize) -> f64 {
    let s: f64 = (1..=modes).rev().map(|j| ((2 * j - 1) as f64).powi(-4)).sum();
    8.0 / PI.powi(4) * s
}

fn build_series(times: &[f64], flux: &[f64], drive: &[f64], modes: usize, beta_bar: f64) -> Result<SpectralSeries> {
    if times.is_empty() || times.len() != flux.len() || times.len() != drive.len() {
        return Err(ShellError::InvalidParameter(
            "spectral histories need equal, nonzero lengths".into(),
        ));
    }
    let mut s = SpectralSeries::new(modes, beta_bar)?;
    s.start(times[0], flux[0], drive[0]);
    for k in 1..times.len() {
        s.push(times[k], flux[k], drive[k]);
    }
    Ok(s)
}

/// Pressure at `z3` and the final time of sampled histories of the flux
/// and of the strain trace `A^c:ρ(u)`.
pub fn spectral_pressure(
    times: &[f64],
    flux: &[f64],
    trace: &[f64],
    coefficients: &ModelCoefficients,
    z3: f64,
    modes: usize,
) -> Result<f64> {
    let g: Vec<f64> = flux.iter().zip(trace).map(|(v, t)| drive(coefficients, *v, *t)).collect();
    Ok(build_series(times, flux, &g, modes, coefficients.beta_bar())?.pressure(z3))
}

/// Thickness moment `∫ z π dz` at the final time.
pub fn spectral_moment(
    times: &[f64],
    flux: &[f64],
    trace: &[f64],
    coefficients: &ModelCoefficients,
    modes: usize,
) -> Result<f64> {
    let g: Vec<f64> = flux.iter().zip(trace).map(|(v, t)| drive(coefficients, *v, *t)).collect();
    Ok(build_series(times, flux, &g, modes, coefficients.beta_bar())?.moment())
}

/// Solver-versus-series comparison at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub t: f64,
    pub modes: usize,
    /// Relative L²(Ω) error of the pressure.
    pub pressure_relative_l2: f64,
    /// Max over nodes of the moment error relative to the max moment.
    pub moment_relative_max: f64,
}

/// Runs the series at every node along the solver's flux and strain-trace
/// histories and compares with the final pressure.
pub fn compare_with_solver(sys: &CoupledSystem, history: &History, modes: usize, exec: Execution) -> Result<OracleReport> {
    let c = &sys.coefficients;
    if (c.thickness - 1.0).abs() > 1e-14 || (c.mobility - 1.0).abs() > 1e-14 {
        return Err(ShellError::UnavailableOutput(
            "the spectral oracle is formulated for the dimensionless scaling (unit thickness and mobility)".into(),
        ));
    }
    let times: Vec<f64> = history.records.iter().map(|r| r.t).collect();
    let traces: Vec<DVector<f64>> = history.displacements.iter().map(|u| &sys.trace * u).collect();
    let fluxes: Vec<Vec<f64>> = times.iter().map(|t| sys.flux_values(*t)).collect();
    let nz = sys.grid.len();
    let last = &history.final_state;
    let per_node: Vec<Result<(f64, f64, f64, f64)>> = exec.map(sys.node_count(), |n| {
        let v: Vec<f64> = fluxes.iter().map(|f| f[n]).collect();
        let tr: Vec<f64> = traces.iter().map(|t| t[n]).collect();
        let g: Vec<f64> = v.iter().zip(&tr).map(|(a, b)| drive(c, *a, *b)).collect();
        let s = build_series(&times, &v, &g, modes, c.beta_bar())?;
        let exact = DVector::from_iterator(nz, sys.grid.nodes.iter().map(|z| s.pressure(*z)));
        let num = DVector::from_column_slice(&last.pressure[n * nz..(n + 1) * nz]);
        let e = &num - &exact;
        let w = sys.nodes[n].weight;
        let err2 = w * e.dot(&(&sys.grid.mass * &e));
        let ref2 = w * exact.dot(&(&sys.grid.mass * &exact));
        let m_num = sys.grid.moment.dot(&num);
        Ok((err2, ref2, (m_num - s.moment()).abs(), s.moment().abs()))
    });
    let (mut e2, mut r2, mut me, mut mr) = (0.0, 0.0, 0.0f64, 0.0f64);
    for r in per_node {
        let (a, b, c, d) = r?;
        e2 += a;
        r2 += b;
        me = me.max(c);
        mr = mr.max(d);
    }
    Ok(OracleReport {
        t: last.t,
        modes,
        pressure_relative_l2: if r2 > 0.0 { (e2 / r2).sqrt() } else { e2.sqrt() },
        moment_relative_max: if mr > 0.0 { me / mr } else { me },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_converges_to_one_twelfth() {
        assert!((kernel_normalization(100) - 1.0 / 12.0).abs() < 1e-8);
        assert!(kernel_normalization(1) < 1.0 / 12.0);
    }

    #[test]
    fn zero_data_gives_zero() {
        let mut s = SpectralSeries::new(50, 1.3).unwrap();
        s.start(0.0, 0.0, 0.0);
        s.push(1.0, 0.0, 0.0);
        assert_eq!(s.pressure(0.3), 0.0);
        assert_eq!(s.moment(), 0.0);
    }

    #[test]
    fn pressure_is_odd() {
        let mut s = SpectralSeries::new(80, 0.7).unwrap();
        s.start(0.0, 0.0, 0.0);
        for k in 1..=20 {
            let t = k as f64 * 0.05;
            s.push(t, t.sin(), 0.7 * t.sin() + 0.3 * t * t);
        }
        for z in [0.1, 0.25, 0.49] {
            assert!((s.pressure(z) + s.pressure(-z)).abs() < 1e-14);
        }
    }

    #[test]
    fn steady_flux_relaxes_to_linear_profile() {
        // Once V stops changing the memory terms decay and π → -V z.
        let mut s = SpectralSeries::new(400, 1.0).unwrap();
        s.start(0.0, 0.0, 0.0);
        s.push(0.1, 1.0, 1.0);
        s.push(20.0, 1.0, 1.0);
        assert!((s.moment() + 1.0 / 12.0).abs() < 1e-12);
        assert!((s.pressure(0.3) + 0.3).abs() < 1e-12);
    }
}
