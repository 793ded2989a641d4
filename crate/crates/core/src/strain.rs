//! Membrane strain γ(v), bending strain ρ(v) and covariant divergences of
//! surface tensor fields. Displacements are given by covariant components
//! `(v_1, v_2, v_3)` with the derivatives each operator needs.

use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{geometry_at, Chart, GeometryPoint};

/// Pointwise values of a midsurface displacement and the derivatives used by
/// the strain operators: first derivatives of all components and second
/// derivatives of the normal component.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DisplacementJet {
    pub v: [f64; 3],
    /// `dv[i][a] = ∂_a v_i`.
    pub dv: [[f64; 2]; 3],
    /// `ddv3[a][b] = ∂_a ∂_b v_3`.
    pub ddv3: [[f64; 2]; 2],
}

impl DisplacementJet {
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.v.iter_mut().for_each(|x| *x *= s);
        out.dv.iter_mut().flatten().for_each(|x| *x *= s);
        out.ddv3.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        for i in 0..3 {
            self.v[i] += s * other.v[i];
            for a in 0..2 {
                self.dv[i][a] += s * other.dv[i][a];
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                self.ddv3[a][b] += s * other.ddv3[a][b];
            }
        }
    }
}

/// Symmetric 2x2 surface tensor `(t11, t12, t22)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 {
        t11: 0.0,
        t12: 0.0,
        t22: 0.0,
    };

    pub fn new(t11: f64, t12: f64, t22: f64) -> Self {
        SymTensor2 { t11, t12, t22 }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => self.t11,
            (1, 1) => self.t22,
            _ => self.t12,
        }
    }

    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.t11, self.t12, self.t12, self.t22)
    }

    /// Symmetric part of `m`.
    pub fn from_matrix(m: &Matrix2<f64>) -> Self {
        SymTensor2::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    pub fn max_abs(&self) -> f64 {
        self.t11.abs().max(self.t12.abs()).max(self.t22.abs())
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.t11 + o.t11, self.t12 + o.t12, self.t22 + o.t22)
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.t11 - o.t11, self.t12 - o.t12, self.t22 - o.t22)
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        SymTensor2::new(self.t11 * s, self.t12 * s, self.t22 * s)
    }
}

pub fn membrane_strain(v: &DisplacementJet, g: &GeometryPoint) -> SymTensor2 {
    let c = |a: usize, b: usize| {
        let mut s = 0.5 * (v.dv[b][a] + v.dv[a][b]) - g.curvature_cov[(a, b)] * v.v[2];
        for k in 0..2 {
            s -= g.christoffel[k][(a, b)] * v.v[k];
        }
        s
    };
    SymTensor2::new(c(0, 0), c(0, 1), c(1, 1))
}

/// One entry `ρ_{αβ}` evaluated in the written index order, without
/// symmetrizing; `ρ_{12}` and `ρ_{21}` agree whenever the geometry does.
pub fn bending_strain_entry(v: &DisplacementJet, g: &GeometryPoint, a: usize, b: usize) -> f64 {
    // Covariant derivative of the tangential part, v_{κ|α}.
    let tang = |al: usize, k: usize| {
        let mut s = v.dv[k][al];
        for t in 0..2 {
            s -= g.christoffel[t][(al, k)] * v.v[t];
        }
        s
    };
    let mut r = v.ddv3[a][b];
    for k in 0..2 {
        r -= g.christoffel[k][(a, b)] * v.dv[2][k];
        r += g.b_mixed(k, b) * tang(a, k);
        r += g.b_mixed(k, a) * tang(b, k);
        r += g.curvature_cov_derivative[k][a][b] * v.v[k];
        r -= g.b_mixed(k, a) * g.curvature_cov[(k, b)] * v.v[2];
    }
    r
}

pub fn bending_strain(v: &DisplacementJet, g: &GeometryPoint) -> SymTensor2 {
    SymTensor2::new(
        bending_strain_entry(v, g, 0, 0),
        bending_strain_entry(v, g, 0, 1),
        bending_strain_entry(v, g, 1, 1),
    )
}

/// Value and first partial derivatives of a tensor field at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TensorJet {
    pub n: SymTensor2,
    /// `dn[γ] = ∂_γ n`.
    pub dn: [SymTensor2; 2],
}

/// First covariant divergence `(n_{αβ}|_β)_α` from pointwise data.
pub fn divergence_from_jet(t: &TensorJet, g: &GeometryPoint) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (a, slot) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for b in 0..2 {
            s += t.dn[b].get(a, b);
            for k in 0..2 {
                s += g.christoffel[a][(b, k)] * t.n.get(k, b);
                s += g.christoffel[b][(b, k)] * t.n.get(a, k);
            }
        }
        *slot = s;
    }
    out
}

/// First and second covariant divergences of a smooth tensor field given as
/// a closure; derivatives of the field and of the first divergence are taken
/// by central differences with step `h`.
pub fn covariant_divergence<F>(
    field: F,
    chart: &dyn Chart,
    y: [f64; 2],
    h: f64,
) -> Result<([f64; 2], f64)>
where
    F: Fn([f64; 2]) -> SymTensor2,
{
    let first = |p: [f64; 2]| -> Result<[f64; 2]> {
        let g = geometry_at(chart, p)?;
        let jet = TensorJet {
            n: field(p),
            dn: [0, 1].map(|c| {
                let mut pp = p;
                let mut pm = p;
                pp[c] += h;
                pm[c] -= h;
                (field(pp) - field(pm)) * (0.5 / h)
            }),
        };
        Ok(divergence_from_jet(&jet, &g))
    };
    let g = geometry_at(chart, y)?;
    let div = first(y)?;
    let mut second = 0.0;
    for a in 0..2 {
        let mut yp = y;
        let mut ym = y;
        yp[a] += h;
        ym[a] -= h;
        second += (first(yp)?[a] - first(ym)?[a]) / (2.0 * h);
        for k in 0..2 {
            second += g.christoffel[k][(a, k)] * div[a];
        }
    }
    Ok((div, second))
}

/// Residual of the differential equilibrium equations for contact forces
/// `n` and couples `m` under surface load `p` (covariant components):
/// the two tangential rows and the normal row.
pub fn equilibrium_residual<N, M>(
    n: N,
    m: M,
    load: [f64; 3],
    chart: &dyn Chart,
    y: [f64; 2],
    h: f64,
) -> Result<[f64; 3]>
where
    N: Fn([f64; 2]) -> SymTensor2,
    M: Fn([f64; 2]) -> SymTensor2,
{
    let g = geometry_at(chart, y)?;
    // n_{αβ} + Σ_κ b^α_κ m_{κβ}; this field is not symmetric in general, so
    // it is differentiated componentwise.
    let aug = |p: [f64; 2]| -> Result<Matrix2<f64>> {
        let gp = geometry_at(chart, p)?;
        let nm = n(p).to_matrix();
        let mm = m(p).to_matrix();
        Ok(nm + gp.curvature_mixed * mm)
    };
    let aug0 = aug(y)?;
    let mut d_aug = [Matrix2::zeros(); 2];
    for (c, slot) in d_aug.iter_mut().enumerate() {
        let mut pp = y;
        let mut pm = y;
        pp[c] += h;
        pm[c] -= h;
        *slot = (aug(pp)? - aug(pm)?) / (2.0 * h);
    }
    let mut aug_div = [0.0; 2];
    for (a, slot) in aug_div.iter_mut().enumerate() {
        let mut s = 0.0;
        for b in 0..2 {
            s += d_aug[b][(a, b)];
            for k in 0..2 {
                s += g.christoffel[a][(b, k)] * aug0[(k, b)];
                s += g.christoffel[b][(b, k)] * aug0[(a, k)];
            }
        }
        *slot = s;
    }
    let (m_div, m_div2) = covariant_divergence(&m, chart, y, h)?;
    let nn = n(y);
    let mm = m(y);
    let mut res = [0.0; 3];
    for a in 0..2 {
        let mut s = -aug_div[a];
        for k in 0..2 {
            s -= g.b_mixed(a, k) * m_div[k];
        }
        res[a] = s - load[a];
    }
    let mut s = m_div2;
    for a in 0..2 {
        for b in 0..2 {
            let mut bb = 0.0;
            for k in 0..2 {
                bb += g.b_mixed(k, a) * g.curvature_cov[(k, b)];
            }
            s -= bb * mm.get(a, b) + g.curvature_cov[(a, b)] * nn.get(a, b);
        }
    }
    res[2] = s - load[2];
    Ok(res)
}
