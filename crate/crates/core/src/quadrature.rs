//! Gauss–Legendre rules and tensor-product quadrature over the parameter
//! rectangle. The quadrature points double as the in-plane nodes of the
//! pressure grid.

use serde::{Deserialize, Serialize};

use crate::geometry::Rect;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss rule on [a, b] with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        for (x, w) in xs.iter().zip(&ws) {
            out.push((x0 + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadPoint {
    pub y: [f64; 2],
    /// Parameter-space weight (the area element is applied separately).
    pub weight: f64,
}

/// Tensor-product Gauss quadrature on a rectangle split into
/// `elements[0] x elements[1]` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaQuadrature {
    pub rect: Rect,
    pub elements: [usize; 2],
    pub orders: [usize; 2],
    pub points: Vec<QuadPoint>,
}

impl OmegaQuadrature {
    /// Points are ordered cell by cell (y1 cells fastest), and inside a cell
    /// with the y1 Gauss index fastest.
    pub fn tensor(rect: Rect, elements: [usize; 2], orders: [usize; 2]) -> Self {
        let (x1, w1) = gauss_legendre(orders[0]);
        let (x2, w2) = gauss_legendre(orders[1]);
        let h1 = rect.width(0) / elements[0] as f64;
        let h2 = rect.width(1) / elements[1] as f64;
        let mut points = Vec::with_capacity(elements[0] * elements[1] * orders[0] * orders[1]);
        for e2 in 0..elements[1] {
            for e1 in 0..elements[0] {
                let a1 = rect.lo[0] + e1 as f64 * h1;
                let a2 = rect.lo[1] + e2 as f64 * h2;
                for (g2, wb) in x2.iter().zip(&w2) {
                    for (g1, wa) in x1.iter().zip(&w1) {
                        points.push(QuadPoint {
                            y: [a1 + 0.5 * h1 * (g1 + 1.0), a2 + 0.5 * h2 * (g2 + 1.0)],
                            weight: 0.25 * h1 * h2 * wa * wb,
                        });
                    }
                }
            }
        }
        OmegaQuadrature {
            rect,
            elements,
            orders,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the point closest to `y`.
    pub fn nearest(&self, y: [f64; 2]) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p.y[0] - y[0]).powi(2) + (p.y[1] - y[1]).powi(2);
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}
