//! Steady-state higher integrability and the contraction data for the
//! linear (`ℓ = 2`) steady problem.

use serde::{Deserialize, Serialize};

use super::{EllipticityData, FreeParameters};
use crate::error::{Error, Result};

/// Explicit cover of `Ω` used by the steady bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyCover {
    pub n_cover: u32,
    pub r_lo: f64,
}

/// Norms entering the steady bound, plus the trace constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SteadyNorms {
    /// `‖∇u‖_{2,Ω}`.
    pub grad_u_2: f64,
    /// `‖ℱ‖_{2+ε,Ω}`.
    pub f_norm: f64,
    /// `‖ℋ‖_{2+ε,Γ}`.
    pub h_norm: f64,
    /// `K_{2n/(n+1)}`, used only for the `ℋ` multiplier.
    pub k_trace: f64,
}

/// Pointwise weights: `ℱ = √((fvec·|𝐟|)² + (f·|f|)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMultipliers {
    pub fvec: f64,
    /// Zero when `ν₀ = 0` (the source vanishes).
    pub f: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyBounds {
    pub upsilon_s: f64,
    /// Bound on `‖∇u‖_{2+ε,Ω}^{2+ε}`.
    pub rhs_cotam1: f64,
    pub f_mult: FieldMultipliers,
    /// `ℋ = h_mult·|h|`.
    pub h_mult: f64,
}

/// `υ` of the steady estimate.
fn steady_upsilon(ed: &EllipticityData, nu0: f64, n: u32) -> f64 {
    let nf = f64::from(n);
    let (a, ah) = (ed.a_lo, ed.a_hi);
    let root = ((4.0 * ah / a).powi(2) + (4.0 + nu0) / a).sqrt();
    (8f64.powf(nf) + 1.0) * 2f64.powf(6.0 * nf) * (root + 1.0).powi(2)
}

pub fn steady_state_bounds(
    ed: &EllipticityData,
    fp: &FreeParameters,
    n: u32,
    cover: &SteadyCover,
    eps: f64,
    norms: &SteadyNorms,
) -> Result<SteadyBounds> {
    ed.validate()?;
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    if !(fp.nu0 >= 0.0 && fp.nu0.is_finite()) {
        return Err(Error::param(format!("nu0 must be >= 0, got {}", fp.nu0)));
    }
    if cover.n_cover == 0 || !(cover.r_lo > 0.0 && cover.r_lo.is_finite()) {
        return Err(Error::param("cover needs N >= 1 and r_lo > 0"));
    }
    if !(norms.k_trace > 0.0 && norms.k_trace.is_finite()) {
        return Err(Error::domain(format!("k_trace must be > 0, got {}", norms.k_trace)));
    }
    for v in [norms.grad_u_2, norms.f_norm, norms.h_norm] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::domain("steady norms must be finite and >= 0"));
        }
    }
    let nf = f64::from(n);
    let ups = steady_upsilon(ed, fp.nu0, n);
    let den = 4.0 - (nf + 2.0) * (ups - 1.0) * eps;
    if !(eps > 0.0 && eps < 1.0 / (ups - 1.0) && den > 0.0) {
        return Err(Error::param(format!(
            "eps = {eps} must lie in (0, {}) with 4 - (n+2)(upsilon-1)eps > 0",
            1.0 / (ups - 1.0)
        )));
    }
    let q = 2.0 + eps;
    let grow = ups * (4.0 + (nf + 2.0) * eps);
    let bracket = (8.0 / cover.r_lo.powf(nf)).powf(eps / 2.0) * 4.0 * norms.grad_u_2.powf(q)
        + (2f64.powf(2.0 + 1.5 * eps) + grow) * norms.f_norm.powf(q)
        + (4.0 + grow) * norms.h_norm.powf(q);
    let rhs = 2f64.powf(nf * (1.0 + eps / 2.0)) * f64::from(cover.n_cover) / den * bracket;

    let a = ed.a_lo;
    let f_mult = FieldMultipliers {
        fvec: (a.recip() * (2.0 / a + 2.0)).sqrt(),
        f: if fp.nu0 > 0.0 {
            (a * fp.nu0).recip().sqrt()
        } else {
            0.0
        },
    };
    let h_mult = 2.0 * (2.0 + 2f64.powf(-1.0 / nf) * a).sqrt() / a * norms.k_trace;
    Ok(SteadyBounds {
        upsilon_s: ups,
        rhs_cotam1: rhs,
        f_mult,
        h_mult,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionData {
    /// Relaxation `t = a_#/(a^#)²`.
    pub t: f64,
    pub kappa_c: f64,
    /// Lipschitz constant of the fixed-point map.
    pub q_factor: f64,
    /// Multiplier of the data in the `W^{1,p}` + trace bound.
    pub el2_mult: f64,
    /// Componentwise norm-equivalence constant; known only for `n = 2`.
    pub necas_c: Option<f64>,
}

/// `ϰ = max{√((a^#)² − a_#²), |a^# − a_# b_#/a^#|}`.
pub fn contraction_kappa(ed: &EllipticityData) -> f64 {
    let (a, ah, b) = (ed.a_lo, ed.a_hi, ed.b_lo);
    (ah * ah - a * a).sqrt().max((ah - a * b / ah).abs())
}

pub fn contraction_data(ed: &EllipticityData, mp: f64, p: f64, n: u32) -> Result<ContractionData> {
    ed.validate()?;
    if ed.ell != 2.0 {
        return Err(Error::param(format!("the contraction needs ell = 2, got {}", ed.ell)));
    }
    if !(mp > 0.0 && mp.is_finite()) {
        return Err(Error::domain(format!("need Mp > 0, got {mp}")));
    }
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("need p >= 2, got {p}")));
    }
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    let (a, ah, b) = (ed.a_lo, ed.a_hi, ed.b_lo);
    let kappa = contraction_kappa(ed);
    if ah / mp <= kappa {
        return Err(Error::infeasible(format!(
            "a_hi/Mp = {} does not exceed kappa = {kappa}",
            ah / mp
        )));
    }
    let ratio = a / ah;
    let q = mp * (1.0 - ratio * ratio).sqrt().max((1.0 - a * b / (ah * ah)).abs());
    Ok(ContractionData {
        t: a / (ah * ah),
        kappa_c: kappa,
        q_factor: q,
        el2_mult: mp * a / (ah - kappa * mp),
        necas_c: (n == 2).then(|| 2f64.powf(0.5 - 1.0 / p)),
    })
}
