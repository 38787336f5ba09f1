use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonincreasing, right-continuous step function on `[1, ∞)` with compact
/// support, stored as its downward jumps.
///
/// `h(τ) = Σ_{b_k > τ} s_k`, so `h(b_k)` already excludes the jump at `b_k`
/// and `h(τ) = 0` past the last breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StieltjesFn {
    breakpoints: Vec<f64>,
    jumps: Vec<f64>,
}

impl StieltjesFn {
    /// `breakpoints` strictly increasing and `> 1`; `jumps` nonnegative.
    pub fn new(breakpoints: Vec<f64>, jumps: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != jumps.len() {
            return Err(Error::shape("one jump per breakpoint"));
        }
        if breakpoints.iter().any(|b| !(*b > 1.0 && b.is_finite())) {
            return Err(Error::domain("breakpoints must be finite and > 1"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("breakpoints must be strictly increasing"));
        }
        if jumps.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::domain("jumps must be finite and >= 0"));
        }
        Ok(Self { breakpoints, jumps })
    }

    /// From the values taken on `[1, b₀)`, `[b₀, b₁)`, …; the last value must be 0.
    pub fn from_values(head: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() || values.last().is_some_and(|v| *v != 0.0) {
            return Err(Error::domain("values must follow the breakpoints and end at 0"));
        }
        let mut prev = head;
        let mut jumps = Vec::with_capacity(values.len());
        for v in &values {
            jumps.push(prev - v);
            prev = *v;
        }
        Self::new(breakpoints, jumps)
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            jumps: Vec::new(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Largest breakpoint, or 1 for the zero function.
    pub fn support_max(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(1.0)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.breakpoints
            .iter()
            .zip(&self.jumps)
            .filter(|(b, _)| **b > tau)
            .map(|(_, s)| s)
            .sum()
    }

    /// `−∫_{(lower, ∞)} τ^γ dh(τ)`, the sum of `s_k b_k^γ` over `b_k > lower`.
    pub fn integral(&self, gamma: f64, lower: f64) -> f64 {
        self.breakpoints
            .iter()
            .zip(&self.jumps)
            .filter(|(b, _)| **b > lower)
            .map(|(b, s)| s * b.powf(gamma))
            .sum()
    }
}
