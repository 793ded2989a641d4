//! Discrete displacement spaces. Each basis reports, at a parameter point,
//! the jets of the basis functions that do not vanish there.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};
use crate::geometry::Rect;
use crate::hermite::HermiteSpace;
use crate::strain::DisplacementJet;

pub trait FlexuralBasis: Send + Sync {
    fn dimension(&self) -> usize;
    fn domain(&self) -> Rect;
    /// `(index, jet)` for the basis functions supported near `y`.
    fn jets(&self, y: [f64; 2]) -> Vec<(usize, DisplacementJet)>;
    fn name(&self) -> &str;
}

/// Which edges of the parameter rectangle are clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampedEdges {
    #[serde(default = "yes")]
    pub y1_lo: bool,
    #[serde(default = "yes")]
    pub y1_hi: bool,
    #[serde(default = "yes")]
    pub y2_lo: bool,
    #[serde(default = "yes")]
    pub y2_hi: bool,
}

fn yes() -> bool {
    true
}

impl Default for ClampedEdges {
    fn default() -> Self {
        ClampedEdges {
            y1_lo: true,
            y1_hi: true,
            y2_lo: true,
            y2_hi: true,
        }
    }
}

impl ClampedEdges {
    /// Clamp orders per end for a field whose clamped trace removes `n`
    /// leading derivatives.
    fn orders(&self, n: usize) -> [[usize; 2]; 2] {
        let o = |b: bool| if b { n } else { 0 };
        [[o(self.y1_lo), o(self.y1_hi)], [o(self.y2_lo), o(self.y2_hi)]]
    }

    pub fn any(&self) -> bool {
        self.y1_lo || self.y1_hi || self.y2_lo || self.y2_hi
    }
}

/// Tensor-product (Bogner–Fox–Schmit) bicubic scalar space.
#[derive(Debug, Clone)]
struct BicubicSpace {
    s: [HermiteSpace; 2],
}

impl BicubicSpace {
    fn new(rect: Rect, elements: [usize; 2], clamp: [[usize; 2]; 2]) -> Result<Self> {
        Ok(BicubicSpace {
            s: [
                HermiteSpace::new(rect.lo[0], rect.hi[0], elements[0], 2, clamp[0])?,
                HermiteSpace::new(rect.lo[1], rect.hi[1], elements[1], 2, clamp[1])?,
            ],
        })
    }

    fn dimension(&self) -> usize {
        self.s[0].dimension() * self.s[1].dimension()
    }

    /// `(index, value, gradient, hessian)`.
    fn eval(&self, y: [f64; 2]) -> Vec<(usize, f64, [f64; 2], [[f64; 2]; 2])> {
        let d1 = self.s[0].dimension();
        let e1 = self.s[0].eval(y[0]);
        let e2 = self.s[1].eval(y[1]);
        let mut out = Vec::with_capacity(e1.len() * e2.len());
        for (j, b) in &e2 {
            for (i, a) in &e1 {
                out.push((
                    j * d1 + i,
                    a[0] * b[0],
                    [a[1] * b[0], a[0] * b[1]],
                    [[a[2] * b[0], a[1] * b[1]], [a[1] * b[1], a[0] * b[2]]],
                ));
            }
        }
        out
    }
}

/// Flat-plate flexural space: `v = (0, 0, v_3)` with `v_3` bicubic and
/// clamped (value and normal slope) on the declared edges.
#[derive(Debug, Clone)]
pub struct PlateBasis {
    rect: Rect,
    space: BicubicSpace,
}

impl PlateBasis {
    pub fn new(rect: Rect, elements: [usize; 2], clamped: ClampedEdges) -> Result<Self> {
        Ok(PlateBasis {
            rect,
            space: BicubicSpace::new(rect, elements, clamped.orders(2))?,
        })
    }
}

impl FlexuralBasis for PlateBasis {
    fn dimension(&self) -> usize {
        self.space.dimension()
    }

    fn domain(&self) -> Rect {
        self.rect
    }

    fn jets(&self, y: [f64; 2]) -> Vec<(usize, DisplacementJet)> {
        self.space
            .eval(y)
            .into_iter()
            .map(|(i, v, g, hess)| {
                (
                    i,
                    DisplacementJet {
                        v: [0.0, 0.0, v],
                        dv: [[0.0; 2], [0.0; 2], g],
                        ddv3: hess,
                    },
                )
            })
            .collect()
    }

    fn name(&self) -> &str {
        "plate"
    }
}

/// Unconstrained three-component space (bicubic in every component) used by
/// the multiplier backend; tangential components are clamped in value,
/// the normal component in value and normal slope.
#[derive(Debug, Clone)]
pub struct RawShellBasis {
    rect: Rect,
    comps: [BicubicSpace; 3],
    offsets: [usize; 3],
}

impl RawShellBasis {
    pub fn new(rect: Rect, elements: [usize; 2], clamped: ClampedEdges) -> Result<Self> {
        let tang = BicubicSpace::new(rect, elements, clamped.orders(1))?;
        let normal = BicubicSpace::new(rect, elements, clamped.orders(2))?;
        let n_t = tang.dimension();
        Ok(RawShellBasis {
            rect,
            offsets: [0, n_t, 2 * n_t],
            comps: [tang.clone(), tang, normal],
        })
    }
}

impl FlexuralBasis for RawShellBasis {
    fn dimension(&self) -> usize {
        self.offsets[2] + self.comps[2].dimension()
    }

    fn domain(&self) -> Rect {
        self.rect
    }

    fn jets(&self, y: [f64; 2]) -> Vec<(usize, DisplacementJet)> {
        let mut out = Vec::new();
        for c in 0..3 {
            for (i, v, g, hess) in self.comps[c].eval(y) {
                let mut jet = DisplacementJet::default();
                jet.v[c] = v;
                jet.dv[c] = g;
                if c == 2 {
                    jet.ddv3 = hess;
                }
                out.push((self.offsets[c] + i, jet));
            }
        }
        out
    }

    fn name(&self) -> &str {
        "raw-shell"
    }
}

/// Septic Hermite order (C³) used for the axial displacement of the
/// cylindrical panel.
pub const AXIAL_ORDER: usize = 4;
/// Quintic Hermite order (C²) used for the angular field `w_θ`.
pub const ANGULAR_ORDER: usize = 3;

/// Inextensible displacements of a cylindrical panel clamped along the
/// generatrices `θ = 0, d`:
/// `v_1 = v_z(θ)`, `v_2 = -z v_z'(θ) + R w(θ)`, `v_3 = -(z/R) v_z''(θ) + w'(θ)`.
/// Indices `0..n_z` address `v_z`, the rest `w`.
#[derive(Debug, Clone)]
pub struct CylinderReducedBasis {
    pub radius: f64,
    pub length: f64,
    pub angle: f64,
    pub axial: HermiteSpace,
    pub angular: HermiteSpace,
}

impl CylinderReducedBasis {
    pub fn new(radius: f64, length: f64, angle: f64, elements: usize) -> Result<Self> {
        let axial = HermiteSpace::new(0.0, angle, elements, AXIAL_ORDER, [AXIAL_ORDER; 2])?;
        let angular = HermiteSpace::new(0.0, angle, elements, ANGULAR_ORDER, [ANGULAR_ORDER; 2])?;
        if axial.dimension() + angular.dimension() == 0 {
            return Err(ShellError::TrivialFlexuralSpace(
                "cylinder mesh needs at least two elements in θ".into(),
            ));
        }
        Ok(CylinderReducedBasis {
            radius,
            length,
            angle,
            axial,
            angular,
        })
    }

    pub fn rect(&self) -> Rect {
        Rect::new([-0.5 * self.length, 0.0], [0.5 * self.length, self.angle])
    }

    pub fn axial_dimension(&self) -> usize {
        self.axial.dimension()
    }

    /// Splits a coefficient vector into `(v_z, w)` parts.
    pub fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        u.split_at(self.axial.dimension())
    }
}

/// Jet of the reconstructed displacement for an axial profile with
/// derivatives `f = (v_z, v_z', ..., v_z'''')` and angular profile
/// `g = (w, w', w'', w''')` at `(z, θ)`.
pub fn reduced_jet(radius: f64, z: f64, f: &[f64; 5], g: &[f64; 5]) -> DisplacementJet {
    let r = radius;
    DisplacementJet {
        v: [f[0], -z * f[1] + r * g[0], -(z / r) * f[2] + g[1]],
        dv: [
            [0.0, f[1]],
            [-f[1], -z * f[2] + r * g[1]],
            [-f[2] / r, -(z / r) * f[3] + g[2]],
        ],
        ddv3: [[0.0, -f[3] / r], [-f[3] / r, -(z / r) * f[4] + g[3]]],
    }
}

impl FlexuralBasis for CylinderReducedBasis {
    fn dimension(&self) -> usize {
        self.axial.dimension() + self.angular.dimension()
    }

    fn domain(&self) -> Rect {
        self.rect()
    }

    fn jets(&self, y: [f64; 2]) -> Vec<(usize, DisplacementJet)> {
        let (z, th) = (y[0], y[1]);
        let zero = [0.0; 5];
        let n_ax = self.axial.dimension();
        let mut out: Vec<_> = self
            .axial
            .eval(th)
            .into_iter()
            .map(|(i, d)| (i, reduced_jet(self.radius, z, &d, &zero)))
            .collect();
        out.extend(
            self.angular
                .eval(th)
                .into_iter()
                .map(|(i, d)| (n_ax + i, reduced_jet(self.radius, z, &zero, &d))),
        );
        out
    }

    fn name(&self) -> &str {
        "cylinder-reduced"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geometry_at, CylinderChart};
    use crate::strain::membrane_strain;

    #[test]
    fn plate_dimension_counts_interior_dofs() {
        let rect = Rect::new([0.0, 0.0], [1.0, 1.0]);
        let b = PlateBasis::new(rect, [3, 2], ClampedEdges::default()).unwrap();
        // Per direction: 2 DOFs at each of the interior nodes.
        assert_eq!(b.dimension(), 4 * 2);
    }

    #[test]
    fn reduced_basis_is_inextensible() {
        let (r, l, d) = (1.3, 2.0, 2.5);
        let basis = CylinderReducedBasis::new(r, l, d, 5).unwrap();
        let chart = CylinderChart {
            radius: r,
            length: l,
            angle: d,
        };
        for y in [[0.3, 0.41], [-0.9, 1.7], [0.0, 2.3]] {
            let g = geometry_at(&chart, y).unwrap();
            for (_, jet) in basis.jets(y) {
                assert!(membrane_strain(&jet, &g).max_abs() < 1e-10);
            }
        }
    }
}
