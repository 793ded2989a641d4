//! Midsurface differential geometry: covariant/contravariant bases, first and
//! second fundamental forms, Christoffel symbols and the covariant derivative
//! of the curvature tensor, evaluated pointwise from a chart `X: ω → R³`.
//!
//! Index convention: Greek indices run over {0, 1} in code (1, 2 in the usual
//! notation); the normal is index 2 of the extended bases.

use std::path::Path;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

/// Relative threshold on `sqrt(a) / scale²` below which a chart is degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

/// Smallest step used for third derivatives in finite-difference charts,
/// relative to the chart length scale.
pub const THIRD_DERIVATIVE_STEP_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Rect { lo, hi }
    }

    pub fn width(&self, dir: usize) -> f64 {
        self.hi[dir] - self.lo[dir]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }

    pub fn diameter(&self) -> f64 {
        self.width(0).hypot(self.width(1))
    }

    /// `n x n` points strictly inside the rectangle.
    pub fn interior_grid(&self, n: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let s = (i as f64 + 0.5) / n as f64;
                let t = (j as f64 + 0.5) / n as f64;
                pts.push([
                    self.lo[0] + s * self.width(0),
                    self.lo[1] + t * self.width(1),
                ]);
            }
        }
        pts
    }
}

/// Position and partial derivatives of a chart at one parameter point.
///
/// `d[a] = ∂_a X`, `dd[a][b] = ∂_b ∂_a X`, `ddd[a][b][c] = ∂_c ∂_b ∂_a X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartJet {
    pub x: Vector3<f64>,
    pub d: [Vector3<f64>; 2],
    pub dd: [[Vector3<f64>; 2]; 2],
    pub ddd: [[[Vector3<f64>; 2]; 2]; 2],
}

pub trait Chart: Send + Sync {
    fn domain(&self) -> Rect;
    fn position(&self, y: [f64; 2]) -> Vector3<f64>;
    fn jet(&self, y: [f64; 2]) -> ChartJet;

    fn length_scale(&self) -> f64 {
        self.domain().diameter()
    }

    fn name(&self) -> &str;
}

/// Flat chart `X(y) = (y1, y2, 0)`.
#[derive(Debug, Clone)]
pub struct PlateChart {
    pub rect: Rect,
}

impl Chart for PlateChart {
    fn domain(&self) -> Rect {
        self.rect
    }

    fn position(&self, y: [f64; 2]) -> Vector3<f64> {
        Vector3::new(y[0], y[1], 0.0)
    }

    fn jet(&self, y: [f64; 2]) -> ChartJet {
        let z = Vector3::zeros();
        ChartJet {
            x: self.position(y),
            d: [Vector3::x(), Vector3::y()],
            dd: [[z; 2]; 2],
            ddd: [[[z; 2]; 2]; 2],
        }
    }

    fn name(&self) -> &str {
        "plate"
    }
}

/// Cylindrical panel `X(z, θ) = (R cos θ, R sin θ, z)` on
/// `(-L/2, L/2) x (0, d)`.
#[derive(Debug, Clone)]
pub struct CylinderChart {
    pub radius: f64,
    pub length: f64,
    pub angle: f64,
}

impl Chart for CylinderChart {
    fn domain(&self) -> Rect {
        Rect::new([-0.5 * self.length, 0.0], [0.5 * self.length, self.angle])
    }

    fn position(&self, y: [f64; 2]) -> Vector3<f64> {
        let r = self.radius;
        Vector3::new(r * y[1].cos(), r * y[1].sin(), y[0])
    }

    fn jet(&self, y: [f64; 2]) -> ChartJet {
        let r = self.radius;
        let (s, c) = y[1].sin_cos();
        let z = Vector3::zeros();
        // Only θ-derivatives of the circle survive.
        let t1 = Vector3::new(-r * s, r * c, 0.0);
        let t2 = Vector3::new(-r * c, -r * s, 0.0);
        let t3 = Vector3::new(r * s, -r * c, 0.0);
        ChartJet {
            x: self.position(y),
            d: [Vector3::z(), t1],
            dd: [[z, z], [z, t2]],
            ddd: [[[z, z], [z, z]], [[z, z], [z, t3]]],
        }
    }

    fn length_scale(&self) -> f64 {
        self.length.max(self.radius * self.angle)
    }

    fn name(&self) -> &str {
        "cylinder"
    }
}

/// Sum of `amplitude * sin(k1 y1 + k2 y2 + phase)` terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigSum {
    pub terms: Vec<TrigTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub wavenumber: [f64; 2],
    #[serde(default)]
    pub phase: f64,
}

impl TrigSum {
    /// Value and derivatives up to third order.
    fn jet(&self, y: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2], [[[f64; 2]; 2]; 2]) {
        let mut v = 0.0;
        let mut d = [0.0; 2];
        let mut dd = [[0.0; 2]; 2];
        let mut ddd = [[[0.0; 2]; 2]; 2];
        for t in &self.terms {
            let k = t.wavenumber;
            let arg = k[0] * y[0] + k[1] * y[1] + t.phase;
            let (s, c) = arg.sin_cos();
            let a = t.amplitude;
            v += a * s;
            for i in 0..2 {
                d[i] += a * k[i] * c;
                for j in 0..2 {
                    dd[i][j] -= a * k[i] * k[j] * s;
                    for l in 0..2 {
                        ddd[i][j][l] -= a * k[i] * k[j] * k[l] * c;
                    }
                }
            }
        }
        (v, d, dd, ddd)
    }
}

/// Smooth analytic chart `X(y) = (y1 + f1(y), y2 + f2(y), f3(y))` with
/// trigonometric perturbations; derivatives are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavyChart {
    pub rect: Rect,
    pub components: [TrigSum; 3],
}

impl Chart for WavyChart {
    fn domain(&self) -> Rect {
        self.rect
    }

    fn position(&self, y: [f64; 2]) -> Vector3<f64> {
        self.jet(y).x
    }

    fn jet(&self, y: [f64; 2]) -> ChartJet {
        let mut jet = ChartJet {
            x: Vector3::new(y[0], y[1], 0.0),
            d: [Vector3::x(), Vector3::y()],
            dd: [[Vector3::zeros(); 2]; 2],
            ddd: [[[Vector3::zeros(); 2]; 2]; 2],
        };
        for (comp, f) in self.components.iter().enumerate() {
            let (v, d, dd, ddd) = f.jet(y);
            jet.x[comp] += v;
            for a in 0..2 {
                jet.d[a][comp] += d[a];
                for b in 0..2 {
                    jet.dd[a][b][comp] += dd[a][b];
                    for c in 0..2 {
                        jet.ddd[a][b][c][comp] += ddd[a][b][c];
                    }
                }
            }
        }
        jet
    }

    fn name(&self) -> &str {
        "wavy"
    }
}

/// Chart given only by a position closure; derivatives by central
/// differences with step `step` (third derivatives use at least
/// `THIRD_DERIVATIVE_STEP_FLOOR * length_scale`).
pub struct FiniteDifferenceChart<F> {
    map: F,
    rect: Rect,
    step: f64,
    label: String,
}

impl<F> FiniteDifferenceChart<F>
where
    F: Fn([f64; 2]) -> Vector3<f64> + Send + Sync,
{
    pub fn new(label: impl Into<String>, rect: Rect, step: f64, map: F) -> Self {
        FiniteDifferenceChart {
            map,
            rect,
            step,
            label: label.into(),
        }
    }

    fn eval(&self, y: [f64; 2], da: [f64; 2]) -> Vector3<f64> {
        (self.map)([y[0] + da[0], y[1] + da[1]])
    }

    fn second(&self, y: [f64; 2], a: usize, b: usize, h: f64) -> Vector3<f64> {
        let e = |i: usize, s: f64| {
            let mut v = [0.0; 2];
            v[i] = s;
            v
        };
        if a == b {
            (self.eval(y, e(a, h)) - 2.0 * self.eval(y, [0.0; 2]) + self.eval(y, e(a, -h))) / (h * h)
        } else {
            let pp = self.eval(y, [h, h]);
            let pm = self.eval(y, [h, -h]);
            let mp = self.eval(y, [-h, h]);
            let mm = self.eval(y, [-h, -h]);
            (pp - pm - mp + mm) / (4.0 * h * h)
        }
    }

    fn third(&self, y: [f64; 2], idx: [usize; 3], h: f64) -> Vector3<f64> {
        let n1 = idx.iter().filter(|&&i| i == 0).count();
        let pure_dir = match n1 {
            3 => Some(0),
            0 => Some(1),
            _ => None,
        };
        if let Some(a) = pure_dir {
            let mut e = [0.0; 2];
            e[a] = h;
            let f = |s: f64| self.eval(y, [e[0] * s, e[1] * s]);
            (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h * h * h)
        } else {
            // Two derivatives along `twice`, one along `once`.
            let (twice, once) = if n1 == 2 { (0, 1) } else { (1, 0) };
            let mut e = [0.0; 2];
            e[once] = h;
            let yp = [y[0] + e[0], y[1] + e[1]];
            let ym = [y[0] - e[0], y[1] - e[1]];
            (self.second(yp, twice, twice, h) - self.second(ym, twice, twice, h)) / (2.0 * h)
        }
    }
}

impl<F> Chart for FiniteDifferenceChart<F>
where
    F: Fn([f64; 2]) -> Vector3<f64> + Send + Sync,
{
    fn domain(&self) -> Rect {
        self.rect
    }

    fn position(&self, y: [f64; 2]) -> Vector3<f64> {
        (self.map)(y)
    }

    fn jet(&self, y: [f64; 2]) -> ChartJet {
        let h = self.step;
        let h3 = h.max(THIRD_DERIVATIVE_STEP_FLOOR * self.length_scale());
        let d = [
            (self.eval(y, [h, 0.0]) - self.eval(y, [-h, 0.0])) / (2.0 * h),
            (self.eval(y, [0.0, h]) - self.eval(y, [0.0, -h])) / (2.0 * h),
        ];
        let mut dd = [[Vector3::zeros(); 2]; 2];
        let mut ddd = [[[Vector3::zeros(); 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                dd[a][b] = self.second(y, a, b, h);
                for c in 0..2 {
                    ddd[a][b][c] = self.third(y, [a, b, c], h3);
                }
            }
        }
        ChartJet {
            x: (self.map)(y),
            d,
            dd,
            ddd,
        }
    }

    fn name(&self) -> &str {
        &self.label
    }
}

/// Chart tabulated on a rectangular grid (rows `y1 y2 X1 X2 X3`), evaluated
/// by local tensor-product Lagrange interpolation whose derivatives are
/// taken exactly.
#[derive(Debug, Clone)]
pub struct TabulatedChart {
    y1: Vec<f64>,
    y2: Vec<f64>,
    /// `values[j * n1 + i]` is X at `(y1[i], y2[j])`.
    values: Vec<Vector3<f64>>,
    stencil: usize,
}

impl TabulatedChart {
    pub const MAX_STENCIL: usize = 6;

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<[f64; 5]> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| ShellError::Parse(format!("line {}: {e}", ln + 1)))?;
            if vals.len() != 5 {
                return Err(ShellError::Parse(format!(
                    "line {}: expected 5 columns (y1 y2 X1 X2 X3), found {}",
                    ln + 1,
                    vals.len()
                )));
            }
            rows.push([vals[0], vals[1], vals[2], vals[3], vals[4]]);
        }
        let unique = |col: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            v.sort_by(|a, b| a.total_cmp(b));
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
            v
        };
        let y1 = unique(0);
        let y2 = unique(1);
        let (n1, n2) = (y1.len(), y2.len());
        if n1 < 4 || n2 < 4 {
            return Err(ShellError::Parse(format!(
                "tabulated chart needs at least 4x4 grid points, found {n1}x{n2}"
            )));
        }
        if rows.len() != n1 * n2 {
            return Err(ShellError::Parse(format!(
                "tabulated chart is not a complete rectangular grid: {} rows for {n1}x{n2} grid",
                rows.len()
            )));
        }
        let locate = |grid: &[f64], x: f64| {
            grid.iter()
                .position(|g| (g - x).abs() <= 1e-12 * (1.0 + x.abs()))
                .expect("coordinate taken from the same rows")
        };
        let mut values = vec![Vector3::from_element(f64::NAN); n1 * n2];
        for r in &rows {
            let i = locate(&y1, r[0]);
            let j = locate(&y2, r[1]);
            values[j * n1 + i] = Vector3::new(r[2], r[3], r[4]);
        }
        if values.iter().any(|v| v[0].is_nan()) {
            return Err(ShellError::Parse("duplicate grid rows in tabulated chart".into()));
        }
        Ok(TabulatedChart {
            stencil: Self::MAX_STENCIL.min(n1).min(n2),
            y1,
            y2,
            values,
        })
    }

    /// Stencil start index and Lagrange weights with derivatives 0..=3.
    fn weights(&self, grid: &[f64], x: f64) -> (usize, Vec<[f64; 4]>) {
        let s = self.stencil;
        let n = grid.len();
        let cell = grid.partition_point(|g| *g <= x).saturating_sub(1).min(n - 2);
        let start = (cell + 1).saturating_sub(s / 2).min(n - s);
        let nodes = &grid[start..start + s];
        (start, lagrange_derivatives(nodes, x))
    }
}

/// Values and first three derivatives of the Lagrange basis on `nodes` at `x`.
fn lagrange_derivatives(nodes: &[f64], x: f64) -> Vec<[f64; 4]> {
    let s = nodes.len();
    let c = nodes[s / 2];
    let scale = (nodes[s - 1] - nodes[0]).abs().max(f64::MIN_POSITIVE);
    let t = (x - c) / scale;
    let tn: Vec<f64> = nodes.iter().map(|v| (v - c) / scale).collect();
    let mut out = Vec::with_capacity(s);
    for j in 0..s {
        // Build coefficients of prod_{m != j} (t - t_m) / (t_j - t_m).
        let mut coef = vec![1.0];
        let mut denom = 1.0;
        for m in 0..s {
            if m == j {
                continue;
            }
            let mut next = vec![0.0; coef.len() + 1];
            for (k, &ck) in coef.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * tn[m];
            }
            coef = next;
            denom *= tn[j] - tn[m];
        }
        let mut d = [0.0; 4];
        for (order, slot) in d.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in (order..coef.len()).rev() {
                let mut f = 1.0;
                for q in 0..order {
                    f *= (k - q) as f64;
                }
                acc = acc * t + coef[k] * f;
            }
            // Horner above accumulates powers t^(k-order).
            *slot = acc / denom / scale.powi(order as i32);
        }
        out.push(d);
    }
    out
}

impl Chart for TabulatedChart {
    fn domain(&self) -> Rect {
        Rect::new(
            [self.y1[0], self.y2[0]],
            [*self.y1.last().unwrap(), *self.y2.last().unwrap()],
        )
    }

    fn position(&self, y: [f64; 2]) -> Vector3<f64> {
        self.jet(y).x
    }

    fn jet(&self, y: [f64; 2]) -> ChartJet {
        let (s1, w1) = self.weights(&self.y1, y[0]);
        let (s2, w2) = self.weights(&self.y2, y[1]);
        let n1 = self.y1.len();
        let mut jet = ChartJet {
            x: Vector3::zeros(),
            d: [Vector3::zeros(); 2],
            dd: [[Vector3::zeros(); 2]; 2],
            ddd: [[[Vector3::zeros(); 2]; 2]; 2],
        };
        for (jj, b) in w2.iter().enumerate() {
            for (ii, a) in w1.iter().enumerate() {
                let v = self.values[(s2 + jj) * n1 + s1 + ii];
                // Derivative multi-index counts (n along y1, m along y2).
                let w = |n: usize, m: usize| a[n] * b[m];
                jet.x += v * w(0, 0);
                jet.d[0] += v * w(1, 0);
                jet.d[1] += v * w(0, 1);
                for p in 0..2 {
                    for q in 0..2 {
                        let n = (p == 0) as usize + (q == 0) as usize;
                        jet.dd[p][q] += v * w(n, 2 - n);
                        for r in 0..2 {
                            let n = (p == 0) as usize + (q == 0) as usize + (r == 0) as usize;
                            jet.ddd[p][q][r] += v * w(n, 3 - n);
                        }
                    }
                }
            }
        }
        jet
    }

    fn name(&self) -> &str {
        "tabulated"
    }
}

/// Geometric quantities at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryPoint {
    pub y: [f64; 2],
    pub position: Vector3<f64>,
    /// `a_1, a_2, a_3`.
    pub covariant_basis: [Vector3<f64>; 3],
    /// `a^1, a^2, a^3` (with `a^3 = a_3`).
    pub contravariant_basis: [Vector3<f64>; 3],
    /// `a_{αβ}`.
    pub metric_cov: Matrix2<f64>,
    /// `a^{αβ}`.
    pub metric_con: Matrix2<f64>,
    pub sqrt_a: f64,
    /// `b_{αβ}`.
    pub curvature_cov: Matrix2<f64>,
    /// Entry `(β, α)` holds `b^β_α`.
    pub curvature_mixed: Matrix2<f64>,
    /// `christoffel[κ][(α, β)] = Γ^κ_{αβ}`.
    pub christoffel: [Matrix2<f64>; 2],
    /// `curvature_derivative[κ][β][α] = ∂_α b^κ_β`.
    pub curvature_partial: [[[f64; 2]; 2]; 2],
    /// `curvature_cov_derivative[κ][β][α] = b^κ_β|_α`.
    pub curvature_cov_derivative: [[[f64; 2]; 2]; 2],
}

impl GeometryPoint {
    /// `b^κ_β`.
    #[inline]
    pub fn b_mixed(&self, kappa: usize, beta: usize) -> f64 {
        self.curvature_mixed[(kappa, beta)]
    }

    /// `Q = [a^1 a^2 a^3]` as columns.
    pub fn contravariant_frame(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&self.contravariant_basis)
    }

    pub fn covariant_frame(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&self.covariant_basis)
    }
}

/// Derivatives of the unit normal and of the contravariant tangent vectors:
/// `(∂_β a_3, ∂_β a^κ)` indexed `[β]` and `[κ][β]`.
pub fn basis_derivatives(jet: &ChartJet) -> ([Vector3<f64>; 2], [[Vector3<f64>; 2]; 2]) {
    let (a1, a2) = (jet.d[0], jet.d[1]);
    let cross = a1.cross(&a2);
    let norm = cross.norm();
    let n = cross / norm;
    let proj = Matrix3::identity() - n * n.transpose();
    let dn = [0, 1].map(|b| proj * (jet.dd[0][b].cross(&a2) + a1.cross(&jet.dd[1][b])) / norm);

    let acov = metric_from(&jet.d);
    let acon = acov.try_inverse().unwrap_or_else(Matrix2::zeros);
    let dacov = [0, 1].map(|g| d_metric(jet, g));
    let mut ddual = [[Vector3::zeros(); 2]; 2];
    for g in 0..2 {
        let dacon = -acon * dacov[g] * acon;
        for k in 0..2 {
            let mut v = Vector3::zeros();
            for l in 0..2 {
                v += dacon[(k, l)] * jet.d[l] + acon[(k, l)] * jet.dd[l][g];
            }
            ddual[k][g] = v;
        }
    }
    (dn, ddual)
}

fn metric_from(d: &[Vector3<f64>; 2]) -> Matrix2<f64> {
    Matrix2::new(d[0].dot(&d[0]), d[0].dot(&d[1]), d[1].dot(&d[0]), d[1].dot(&d[1]))
}

/// `∂_γ a_{αβ}`.
fn d_metric(jet: &ChartJet, g: usize) -> Matrix2<f64> {
    Matrix2::from_fn(|a, b| jet.dd[a][g].dot(&jet.d[b]) + jet.d[a].dot(&jet.dd[b][g]))
}

/// Full geometry at `y`; errors if the area element degenerates.
pub fn geometry_at(chart: &dyn Chart, y: [f64; 2]) -> Result<GeometryPoint> {
    let jet = chart.jet(y);
    geometry_from_jet(&jet, y, chart.length_scale())
}

pub fn geometry_from_jet(jet: &ChartJet, y: [f64; 2], scale: f64) -> Result<GeometryPoint> {
    let (a1, a2) = (jet.d[0], jet.d[1]);
    let metric_cov = metric_from(&jet.d);
    let det = metric_cov.determinant();
    let sqrt_a = det.max(0.0).sqrt();
    if !(sqrt_a >= DEGENERACY_TOLERANCE * scale * scale) {
        return Err(ShellError::DegenerateChart {
            y1: y[0],
            y2: y[1],
            sqrt_a,
        });
    }
    let metric_con = Matrix2::new(
        metric_cov[(1, 1)],
        -metric_cov[(0, 1)],
        -metric_cov[(1, 0)],
        metric_cov[(0, 0)],
    ) / det;
    let a3 = a1.cross(&a2) / sqrt_a;
    let dual = [0, 1].map(|k| metric_con[(k, 0)] * a1 + metric_con[(k, 1)] * a2);

    let curvature_cov = Matrix2::from_fn(|a, b| a3.dot(&jet.dd[a][b]));
    let curvature_mixed = metric_con * curvature_cov;
    let christoffel = [0, 1].map(|k| Matrix2::from_fn(|a, b| dual[k].dot(&jet.dd[a][b])));

    let (dn, _) = basis_derivatives(jet);
    let mut curvature_partial = [[[0.0; 2]; 2]; 2];
    for g in 0..2 {
        let dacov = d_metric(jet, g);
        let dacon = -metric_con * dacov * metric_con;
        let dbcov = Matrix2::from_fn(|l, b| dn[g].dot(&jet.dd[l][b]) + a3.dot(&jet.ddd[l][b][g]));
        let dbmixed = dacon * curvature_cov + metric_con * dbcov;
        for k in 0..2 {
            for b in 0..2 {
                curvature_partial[k][b][g] = dbmixed[(k, b)];
            }
        }
    }
    let mut curvature_cov_derivative = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for b in 0..2 {
            for a in 0..2 {
                let mut v = curvature_partial[k][b][a];
                for t in 0..2 {
                    v += christoffel[k][(a, t)] * curvature_mixed[(t, b)]
                        - christoffel[t][(b, a)] * curvature_mixed[(k, t)];
                }
                curvature_cov_derivative[k][b][a] = v;
            }
        }
    }

    Ok(GeometryPoint {
        y,
        position: jet.x,
        covariant_basis: [a1, a2, a3],
        contravariant_basis: [dual[0], dual[1], a3],
        metric_cov,
        metric_con,
        sqrt_a,
        curvature_cov,
        curvature_mixed,
        christoffel,
        curvature_partial,
        curvature_cov_derivative,
    })
}

/// `(A_c, A^c, sqrt(a))`.
pub fn fundamental_forms(chart: &dyn Chart, y: [f64; 2]) -> Result<(Matrix2<f64>, Matrix2<f64>, f64)> {
    let g = geometry_at(chart, y)?;
    Ok((g.metric_cov, g.metric_con, g.sqrt_a))
}

/// `(B_c, B_mixed)` with `B_mixed[(β, α)] = b^β_α`.
pub fn curvature(chart: &dyn Chart, y: [f64; 2]) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let g = geometry_at(chart, y)?;
    Ok((g.curvature_cov, g.curvature_mixed))
}

/// `Γ^κ_{αβ}` for κ = 1, 2 and `Γ^3_{αβ} = b_{αβ}`.
pub fn christoffel(chart: &dyn Chart, y: [f64; 2]) -> Result<[Matrix2<f64>; 3]> {
    let g = geometry_at(chart, y)?;
    Ok([g.christoffel[0], g.christoffel[1], g.curvature_cov])
}

/// `b^κ_β|_α` indexed `[κ][β][α]`.
pub fn curvature_cov_derivative(chart: &dyn Chart, y: [f64; 2]) -> Result<[[[f64; 2]; 2]; 2]> {
    Ok(geometry_at(chart, y)?.curvature_cov_derivative)
}

/// Second defining formula for the curvature, `b_{αβ} = -∂_β a_3 · a_α`.
pub fn curvature_via_normal_derivative(jet: &ChartJet) -> Matrix2<f64> {
    let (dn, _) = basis_derivatives(jet);
    Matrix2::from_fn(|a, b| -dn[b].dot(&jet.d[a]))
}

/// Second defining formula for the Christoffel symbols,
/// `Γ^κ_{αβ} = -∂_β a^κ · a_α`.
pub fn christoffel_via_dual_derivative(jet: &ChartJet) -> [Matrix2<f64>; 2] {
    let (_, ddual) = basis_derivatives(jet);
    [0, 1].map(|k| Matrix2::from_fn(|a, b| -ddual[k][b].dot(&jet.d[a])))
}

/// Chart description as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartSpec {
    Plate {
        #[serde(default = "unit_extent")]
        extent: [[f64; 2]; 2],
    },
    Cylinder {
        radius: f64,
        length: f64,
        /// Angular extent `d`.
        angle: f64,
    },
    Wavy {
        extent: [[f64; 2]; 2],
        components: [TrigSum; 3],
    },
    Tabulated {
        path: std::path::PathBuf,
    },
}

fn unit_extent() -> [[f64; 2]; 2] {
    [[0.0, 1.0], [0.0, 1.0]]
}

fn rect_from_extent(e: &[[f64; 2]; 2]) -> Rect {
    Rect::new([e[0][0], e[1][0]], [e[0][1], e[1][1]])
}

/// Points per direction of the grid used to check chart regularity.
pub const RANK_CHECK_GRID: usize = 9;

/// Builds a chart and checks that its Jacobian has rank 2 on a sample grid.
pub fn build_chart(spec: &ChartSpec) -> Result<Box<dyn Chart>> {
    let chart: Box<dyn Chart> = match spec {
        ChartSpec::Plate { extent } => {
            check_extent(extent)?;
            Box::new(PlateChart {
                rect: rect_from_extent(extent),
            })
        }
        ChartSpec::Cylinder {
            radius,
            length,
            angle,
        } => {
            if !(*radius > 0.0) || !(*length > 0.0) || !(*angle > 0.0) {
                return Err(ShellError::InvalidParameter(format!(
                    "cylinder needs R > 0, L > 0, d > 0 (got R={radius}, L={length}, d={angle})"
                )));
            }
            Box::new(CylinderChart {
                radius: *radius,
                length: *length,
                angle: *angle,
            })
        }
        ChartSpec::Wavy { extent, components } => {
            check_extent(extent)?;
            Box::new(WavyChart {
                rect: rect_from_extent(extent),
                components: components.clone(),
            })
        }
        ChartSpec::Tabulated { path } => Box::new(TabulatedChart::from_path(path)?),
    };
    check_rank(chart.as_ref())?;
    Ok(chart)
}

fn check_extent(e: &[[f64; 2]; 2]) -> Result<()> {
    if !(e[0][1] > e[0][0]) || !(e[1][1] > e[1][0]) {
        return Err(ShellError::InvalidParameter(format!(
            "chart extent must satisfy lo < hi in both directions, got {e:?}"
        )));
    }
    Ok(())
}

/// Errors with the first sample location where `sqrt(a)` degenerates.
pub fn check_rank(chart: &dyn Chart) -> Result<()> {
    let rect = chart.domain();
    let n = RANK_CHECK_GRID;
    for j in 0..n {
        for i in 0..n {
            let y = [
                rect.lo[0] + rect.width(0) * i as f64 / (n - 1) as f64,
                rect.lo[1] + rect.width(1) * j as f64 / (n - 1) as f64,
            ];
            geometry_at(chart, y)?;
        }
    }
    Ok(())
}
