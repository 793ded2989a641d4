//! One-dimensional Hermite finite elements of arbitrary continuity.
//!
//! An element of order `m` carries the derivatives `0..m` at both end nodes,
//! is a polynomial of degree `2m - 1` and yields a `C^{m-1}` global space:
//! `m = 2` cubic, `m = 3` quintic, `m = 4` septic.

use nalgebra::DMatrix;

use crate::error::{Result, ShellError};

/// Highest derivative returned by [`HermiteSpace::eval`].
pub const MAX_DERIV: usize = 4;

pub type Derivs = [f64; MAX_DERIV + 1];

/// Reference shape functions on `[0, 1]` as monomial coefficients.
#[derive(Debug, Clone)]
struct ReferenceElement {
    /// `coef[s][p]`: coefficient of `ξ^p` in shape function `s`; shape
    /// `s = node * order + k` interpolates the k-th derivative at `node`.
    coef: Vec<Vec<f64>>,
}

impl ReferenceElement {
    fn new(order: usize) -> Self {
        let n = 2 * order;
        // Row (node, k) of the confluent Vandermonde matrix: k-th derivative
        // of each monomial at ξ = node.
        let mut v = DMatrix::<f64>::zeros(n, n);
        for node in 0..2 {
            let xi = node as f64;
            for k in 0..order {
                for p in k..n {
                    let fall: f64 = (0..k).map(|q| (p - q) as f64).product();
                    v[(node * order + k, p)] = fall * xi.powi((p - k) as i32);
                }
            }
        }
        let inv = v.try_inverse().expect("confluent Vandermonde matrix is invertible");
        let coef = (0..n).map(|s| (0..n).map(|p| inv[(p, s)]).collect()).collect();
        ReferenceElement { coef }
    }

    /// Derivatives `0..=MAX_DERIV` of shape `s` at `ξ`.
    fn eval(&self, s: usize, xi: f64) -> Derivs {
        let c = &self.coef[s];
        let mut out = [0.0; MAX_DERIV + 1];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in (r..c.len()).rev() {
                let fall: f64 = (0..r).map(|q| (p - q) as f64).product();
                acc = acc * xi + c[p] * fall;
            }
            *slot = acc;
        }
        out
    }
}

/// Hermite space on a uniform mesh of `[a, b]` with clamped ends.
///
/// `clamp[e]` is the number of leading derivative DOFs (value, slope, ...)
/// removed at end `e` (0 = left, 1 = right).
#[derive(Debug, Clone)]
pub struct HermiteSpace {
    pub a: f64,
    pub b: f64,
    pub elements: usize,
    pub order: usize,
    pub clamp: [usize; 2],
    reference: ReferenceElement,
    /// Global DOF `node * order + k` to free index.
    free: Vec<Option<usize>>,
    dim: usize,
}

impl HermiteSpace {
    pub fn new(a: f64, b: f64, elements: usize, order: usize, clamp: [usize; 2]) -> Result<Self> {
        if elements == 0 || !(b > a) {
            return Err(ShellError::InvalidParameter(format!(
                "Hermite mesh needs at least one element on a nonempty interval (got {elements} on [{a}, {b}])"
            )));
        }
        if order == 0 || clamp.iter().any(|&c| c > order) {
            return Err(ShellError::InvalidParameter(format!(
                "clamp orders {clamp:?} exceed element order {order}"
            )));
        }
        let nodes = elements + 1;
        let mut free = vec![None; nodes * order];
        let mut dim = 0;
        for node in 0..nodes {
            for k in 0..order {
                let clamped = (node == 0 && k < clamp[0]) || (node == elements && k < clamp[1]);
                if !clamped {
                    free[node * order + k] = Some(dim);
                    dim += 1;
                }
            }
        }
        Ok(HermiteSpace {
            a,
            b,
            elements,
            order,
            clamp,
            reference: ReferenceElement::new(order),
            free,
            dim,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.elements as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    /// Element containing `x` (right-closed at the last element).
    pub fn element_of(&self, x: f64) -> usize {
        let e = ((x - self.a) / self.h()).floor();
        (e.max(0.0) as usize).min(self.elements - 1)
    }

    /// Free basis functions nonzero near `x`, with derivatives `0..=4`.
    pub fn eval(&self, x: f64) -> Vec<(usize, Derivs)> {
        let e = self.element_of(x);
        let h = self.h();
        let xi = (x - self.node(e)) / h;
        let mut out = Vec::with_capacity(2 * self.order);
        for node in 0..2 {
            for k in 0..self.order {
                let Some(idx) = self.free[(e + node) * self.order + k] else {
                    continue;
                };
                let r = self.reference.eval(node * self.order + k, xi);
                let mut d = [0.0; MAX_DERIV + 1];
                for (j, slot) in d.iter_mut().enumerate() {
                    *slot = r[j] * h.powi(k as i32 - j as i32);
                }
                out.push((idx, d));
            }
        }
        out
    }

    /// Coefficients interpolating a function from its derivatives at the
    /// nodes; `derivs(x)` must return at least `order` values.
    pub fn interpolate<F>(&self, derivs: F) -> Vec<f64>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let mut c = vec![0.0; self.dim];
        for node in 0..=self.elements {
            let d = derivs(self.node(node));
            for k in 0..self.order {
                if let Some(idx) = self.free[node * self.order + k] {
                    c[idx] = d[k];
                }
            }
        }
        c
    }

    /// Derivatives of `Σ c_i φ_i` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> Derivs {
        let mut out = [0.0; MAX_DERIV + 1];
        for (i, d) in self.eval(x) {
            for j in 0..=MAX_DERIV {
                out[j] += coeffs[i] * d[j];
            }
        }
        out
    }
}
