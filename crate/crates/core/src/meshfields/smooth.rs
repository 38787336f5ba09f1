use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SpaceTimeGrid;

/// Finite cosine series on the unit square,
/// `Σ c_{kl} cos(kπs) cos(lπr)`, evaluated in normalized coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothField {
    modes: usize,
    coeffs: Vec<f64>,
}

impl SmoothField {
    pub fn zero() -> Self {
        Self {
            modes: 0,
            coeffs: Vec::new(),
        }
    }

    /// Coefficients uniform in `[−1, 1]`, damped by `1/(1+k+l)`.
    pub fn random(rng: &mut impl Rng, modes: usize) -> Self {
        let coeffs = (0..modes * modes)
            .map(|kl| {
                let (k, l) = (kl / modes, kl % modes);
                rng.gen_range(-1.0..1.0) / (1 + k + l) as f64
            })
            .collect();
        Self { modes, coeffs }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.coeffs.iter_mut().for_each(|v| *v *= c);
        self
    }

    /// Value at normalized coordinates `(s, r) ∈ [0,1]²`.
    pub fn eval(&self, s: f64, r: f64) -> f64 {
        use std::f64::consts::PI;
        let mut v = 0.0;
        for k in 0..self.modes {
            let ck = (PI * k as f64 * s).cos();
            for l in 0..self.modes {
                v += self.coeffs[k * self.modes + l] * ck * (PI * l as f64 * r).cos();
            }
        }
        v
    }

    /// Value at a physical point of the rectangle of `grid`.
    pub fn at(&self, grid: &SpaceTimeGrid, x: f64, y: f64) -> f64 {
        self.eval((x - grid.x0) / grid.lx, (y - grid.y0) / grid.ly)
    }

    /// Nodal values on the spatial part of `grid`.
    pub fn sample(&self, grid: &SpaceTimeGrid) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.space_len());
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                out.push(self.at(grid, grid.x(i), grid.y(j)));
            }
        }
        out
    }
}
