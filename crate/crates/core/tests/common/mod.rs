#![allow(dead_code)]

use std::f64::consts::PI;

use poroshell::geometry::{Rect, TrigSum, TrigTerm, WavyChart};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small smooth perturbation of the unit square; regular for the
/// amplitudes drawn here.
pub fn random_wavy_chart(rng: &mut ChaCha8Rng) -> WavyChart {
    let mut sum = || TrigSum {
        terms: (0..2)
            .map(|_| TrigTerm {
                amplitude: rng.random_range(-0.06..0.06),
                wavenumber: [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
                phase: rng.random_range(0.0..2.0 * PI),
            })
            .collect(),
    };
    WavyChart {
        rect: Rect::new([0.0, 0.0], [1.0, 1.0]),
        components: [sum(), sum(), sum()],
    }
}

/// Bivariate cubic `Σ c[i][j] x^i y^j`.
#[derive(Debug, Clone)]
pub struct Poly2 {
    pub c: [[f64; 4]; 4],
}

impl Poly2 {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut c = [[0.0; 4]; 4];
        for row in &mut c {
            for v in row.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        Poly2 { c }
    }

    /// `∂x^a ∂y^b` at `(x, y)`.
    pub fn d(&self, a: u32, b: u32, x: f64, y: f64) -> f64 {
        let fall = |n: u32, k: u32| -> f64 { (0..k).map(|i| (n - i) as f64).product() };
        let mut s = 0.0;
        for i in a..4 {
            for j in b..4 {
                s += self.c[i as usize][j as usize]
                    * fall(i, a)
                    * fall(j, b)
                    * x.powi((i - a) as i32)
                    * y.powi((j - b) as i32);
            }
        }
        s
    }
}

/// `max |a - b| / max(|b|, floor)` over paired slices.
pub fn rel_diff(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = b.iter().fold(floor, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
