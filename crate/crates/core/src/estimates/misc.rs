use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Γ(m/2)` for a positive integer `m`, by the recurrence `Γ(x+1) = xΓ(x)`
/// from `Γ(1) = 1` or `Γ(1/2) = √π`.
pub fn gamma_half_integer(twice: u32) -> Result<f64> {
    if twice == 0 {
        return Err(Error::domain("Gamma has a pole at 0"));
    }
    let (mut x, mut g) = if twice % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5, std::f64::consts::PI.sqrt())
    };
    let target = f64::from(twice) / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    Ok(g)
}

/// Constant `S_{2n/(n+2)}` of the local Poincaré–Sobolev inequality.
///
/// The factor `(n−2)^{(n−2)/(2n)}` is taken as 1 at `n = 2`.
pub fn poincare_sobolev_constant(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    let nf = f64::from(n);
    let zero_pow = if n == 2 {
        1.0
    } else {
        (nf - 2.0).powf((nf - 2.0) / (2.0 * nf))
    };
    let ratio = gamma_half_integer(2 * n)? / gamma_half_integer(n)?;
    Ok(std::f64::consts::PI.powf(-0.5)
        * nf.powf((2.0 - 3.0 * nf) / (2.0 * nf))
        * zero_pow
        * ratio.powf(1.0 / nf))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marcinkiewicz {
    pub constant: f64,
    /// Interpolation weight with `1/p = α/q + (1−α)/r`.
    pub alpha: f64,
}

/// Constant of the Marcinkiewicz interpolation theorem for an operator of
/// weak types `(q,q)` and `(r,r)` with bounds `T1`, `T2`.
pub fn marcinkiewicz_constant(p: f64, q: f64, r: f64, t1: f64, t2: f64) -> Result<Marcinkiewicz> {
    if !(1.0 <= q && q < p && p < r && r.is_finite()) {
        return Err(Error::domain(format!(
            "need 1 <= q < p < r < inf, got q={q}, p={p}, r={r}"
        )));
    }
    if !(t1 > 0.0 && t2 > 0.0 && t1.is_finite() && t2.is_finite()) {
        return Err(Error::domain("operator bounds must be positive"));
    }
    let alpha = (1.0 / p - 1.0 / r) / (1.0 / q - 1.0 / r);
    let constant =
        2.0 * (p / (p - q) + p / (r - p)).powf(1.0 / p) * t1.powf(alpha) * t2.powf(1.0 - alpha);
    Ok(Marcinkiewicz { constant, alpha })
}
