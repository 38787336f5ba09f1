//! Localized estimates: Caccioppoli, Gehring constants, admissible gains,
//! local higher integrability and the covering constant.

use serde::{Deserialize, Serialize};

use super::misc::poincare_sobolev_constant;
use super::{nu_quotient, CubeKind, EllipticityData, FreeParameters};
use crate::error::{Error, Result};

/// Local norms on the larger cube `Q_R`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliNorms {
    /// `‖η(u − U)‖_{2,Q_R}`.
    pub eta_u_minus_u: f64,
    pub f: f64,
    pub fvec: f64,
    /// `‖h‖_{2,Σ_R}`.
    pub h: f64,
}

/// Weight `a_#(1 − ν₁ − ν₂)` of the gradient term on the left.
pub fn caccioppoli_lhs_factor(ed: &EllipticityData, fp: &FreeParameters) -> Result<f64> {
    ed.validate()?;
    if fp.nu1 + fp.nu2 >= 1.0 {
        return Err(Error::param(format!(
            "need nu1 + nu2 < 1, got {}",
            fp.nu1 + fp.nu2
        )));
    }
    Ok(ed.a_lo * (1.0 - fp.nu1 - fp.nu2))
}

/// Right-hand side of the Caccioppoli inequality on `Q_r ⊂ Q_R`.
pub fn caccioppoli_rhs(
    ed: &EllipticityData,
    fp: &FreeParameters,
    r_big: f64,
    r: f64,
    k_trace: f64,
    norms: &CaccioppoliNorms,
) -> Result<f64> {
    ed.validate()?;
    if !(r > 0.0 && r < r_big && r_big.is_finite()) {
        return Err(Error::param(format!("need 0 < r < R, got r={r}, R={r_big}")));
    }
    let gap = r_big - r;
    if gap * gap > 2.0 {
        return Err(Error::param(format!("need (R-r)^2 <= 2, got {}", gap * gap)));
    }
    if fp.nu1 + fp.nu2 >= 1.0 {
        return Err(Error::param(format!(
            "need nu1 + nu2 < 1, got {}",
            fp.nu1 + fp.nu2
        )));
    }
    if !(k_trace > 0.0 && k_trace.is_finite()) {
        return Err(Error::domain(format!("k_trace must be > 0, got {k_trace}")));
    }
    for v in [norms.eta_u_minus_u, norms.f, norms.fvec, norms.h] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::domain("local norms must be finite and >= 0"));
        }
    }
    let (a, ah) = (ed.a_lo, ed.a_hi);
    let lead = (2.0 * ah * ah / a + 2.0 + fp.nu0 + 1.5 * fp.nu2) * 2.0 / (gap * gap)
        * norms.eta_u_minus_u.powi(2);
    let f = nu_quotient(norms.f.powi(2), fp.nu0, "source term")?;
    let fvec = if norms.fvec == 0.0 {
        0.0
    } else {
        let q = nu_quotient(1.0, fp.nu1, "flux term")?;
        (q / a + 2.0) * norms.fvec.powi(2)
    };
    let h = if norms.h == 0.0 {
        0.0
    } else {
        let q = nu_quotient(1.0, fp.nu2, "boundary term")?;
        2.0 * r_big * k_trace * k_trace * q * (1.0 / a + 2.0) * norms.h.powi(2)
    };
    Ok(lead + f + fvec + h)
}

/// Hypothesis constant `B` of the reverse Hölder inequality for
/// `Φ = |∇u|^{2n/(n+2)}`.
pub fn gehring_b(ed: &EllipticityData, nu0: f64, n: u32, kind: CubeKind) -> Result<f64> {
    ed.validate()?;
    if !(nu0 >= 0.0 && nu0.is_finite()) {
        return Err(Error::param(format!("nu0 must be >= 0, got {nu0}")));
    }
    let s = poincare_sobolev_constant(n)?;
    let nf = f64::from(n);
    let (a, ah) = (ed.a_lo, ed.a_hi);
    let four_s = (4.0 * s).powi(2);
    Ok(match kind {
        CubeKind::Interior => {
            2f64.powf(2.0 * (2.0 - 1.0 / nf)) / a * (2.0 * ah * ah / a + 2.0 + nu0) * four_s
        }
        CubeKind::Boundary => {
            2f64.powf(5.0 - 2.0 / nf) / a * (2.0 * ah * ah / a + 19.0 / 8.0 + nu0) * four_s
        }
    })
}

/// Exponents of the reverse Hölder hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GehringExponents {
    pub p: f64,
    pub m1: f64,
    pub m2: f64,
    pub r: f64,
    pub l1: f64,
    pub l2: f64,
    pub s: f64,
    pub d: f64,
    pub n: u32,
}

impl GehringExponents {
    /// The choice used for gradients: `p = (n+2)/n`, all data exponents 2.
    pub fn gradient_reverse_holder(n: u32) -> Self {
        let nf = f64::from(n);
        Self {
            p: (nf + 2.0) / nf,
            m1: 2.0,
            m2: 2.0,
            r: 2.0,
            l1: 2.0,
            l2: 2.0,
            s: 2.0,
            d: (nf + 2.0) / nf,
            n,
        }
    }

    fn check_m(&self) -> Result<()> {
        let n = f64::from(self.n);
        let ordered = self.r >= self.m2 && self.m2 >= self.m1 && self.m1 >= 1.0;
        if !ordered || n / self.m1 + 2.0 / self.m2 < (n + 2.0) / self.r {
            return Err(Error::param(format!(
                "F-exponents violate n/m1 + 2/m2 >= (n+2)/r, r >= m2 >= m1 >= 1: m1={}, m2={}, r={}",
                self.m1, self.m2, self.r
            )));
        }
        Ok(())
    }

    fn check_l(&self) -> Result<()> {
        let n = f64::from(self.n);
        let ordered = self.s >= self.l2 && self.l2 >= self.l1 && self.l1 >= 1.0;
        if !ordered || (n - 1.0) / self.l1 + 2.0 / self.l2 < (n + 1.0) / self.s {
            return Err(Error::param(format!(
                "G-exponents violate (n-1)/l1 + 2/l2 >= (n+1)/s, s >= l2 >= l1 >= 1: l1={}, l2={}, s={}",
                self.l1, self.l2, self.s
            )));
        }
        Ok(())
    }

    fn check_d(&self) -> Result<()> {
        let n = f64::from(self.n);
        if n * self.d < n + 2.0 {
            return Err(Error::param(format!("phi-exponent violates nd >= n+2: d={}", self.d)));
        }
        Ok(())
    }
}

/// Which terms enter the bracket of `υ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonVariant {
    /// Boundary cubes, all data terms.
    General,
    /// Boundary cubes, `φ = 0`.
    NoPhi,
    /// Interior cubes, all data terms.
    Interior,
    /// Interior cubes, `φ = 0`.
    InteriorNoPhi,
}

/// The Gehring constant `υ`.
pub fn gehring_upsilon(b: f64, ge: &GehringExponents, variant: UpsilonVariant) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("B must be > 0, got {b}")));
    }
    if !(ge.p > 1.0 && ge.p.is_finite()) {
        return Err(Error::domain(format!("need p > 1, got {}", ge.p)));
    }
    if ge.n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {}", ge.n)));
    }
    ge.check_m()?;
    let (with_g, with_phi) = match variant {
        UpsilonVariant::General => (true, true),
        UpsilonVariant::NoPhi => (true, false),
        UpsilonVariant::Interior => (false, true),
        UpsilonVariant::InteriorNoPhi => (false, false),
    };
    if with_g {
        ge.check_l()?;
    }
    if with_phi {
        ge.check_d()?;
    }
    let n = f64::from(ge.n);
    let p = ge.p;
    let two_n2 = 2f64.powf(n + 2.0);
    let mut bracket = two_n2 * (two_n2 * b).powf(1.0 / p)
        + 3.0 * (p - 1.0) / p
        + 2f64.powf((n / ge.m1 + 1.0 / ge.m2) * ge.r / p);
    if with_g {
        bracket += 2f64.powf(((n - 1.0) / ge.l1 + 1.0 / ge.l2) * ge.s / p);
    }
    if with_phi {
        bracket += 2f64.powf(n * ge.d / p);
    }
    bracket += 2f64.powf(2.0 * n + 3.0);
    Ok((4f64.powf(n) + 1.0) * bracket.powf(p))
}

/// Which upper limit determines an admissible interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cap {
    Delta,
    Upsilon,
    Both,
}

/// `[0, sup)` or `[0, sup]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleInterval {
    pub sup: f64,
    /// True when `sup` itself belongs to the interval (only the `δ` cap binds).
    pub closed: bool,
    pub cap: Cap,
}

impl AdmissibleInterval {
    pub fn contains(&self, eps: f64) -> bool {
        eps >= 0.0 && (eps < self.sup || (self.closed && eps == self.sup))
    }
}

fn intersect(delta: f64, upsilon_cap: f64) -> AdmissibleInterval {
    if delta < upsilon_cap {
        AdmissibleInterval {
            sup: delta,
            closed: true,
            cap: Cap::Delta,
        }
    } else if delta > upsilon_cap {
        AdmissibleInterval {
            sup: upsilon_cap,
            closed: false,
            cap: Cap::Upsilon,
        }
    } else {
        AdmissibleInterval {
            sup: delta,
            closed: false,
            cap: Cap::Both,
        }
    }
}

fn check_cap_inputs(delta: f64, upsilon: f64) -> Result<()> {
    if !(upsilon > 1.0 && upsilon.is_finite()) {
        return Err(Error::domain(format!("need upsilon > 1, got {upsilon}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param(format!("need delta > 0, got {delta}")));
    }
    Ok(())
}

/// Gains `ε` for which `Φ ∈ L^{p+ε}`: `[0, δ] ∩ [0, (p−1)/(υ−1))`.
pub fn epsilon_admissible(delta: f64, p: f64, upsilon: f64) -> Result<AdmissibleInterval> {
    check_cap_inputs(delta, upsilon)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("need p > 1, got {p}")));
    }
    Ok(intersect(delta, (p - 1.0) / (upsilon - 1.0)))
}

/// Gains `ε` for which `∇u ∈ L^{2+ε}`: `[0, δ] ∩ [0, 4/((n+2)(υ−1)))`.
pub fn gradient_epsilon_admissible(delta: f64, n: u32, upsilon: f64) -> Result<AdmissibleInterval> {
    check_cap_inputs(delta, upsilon)?;
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    Ok(intersect(delta, 4.0 / ((f64::from(n) + 2.0) * (upsilon - 1.0))))
}

/// Largest radius for a local higher-integrability estimate.
///
/// `reach` is `dist(x, ∂Ω)/√n` for interior cubes and `R₀` for boundary cubes.
pub fn interior_radius_cap(n: u32, t_final: f64, reach: f64) -> Result<f64> {
    let s = poincare_sobolev_constant(n)?;
    Ok(t_final.sqrt().min(reach).min(1.0 / (4.0 * s)))
}

/// Local norms entering the higher-integrability bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalGradientNorms {
    /// `‖∇u‖_{2,Q_R}`.
    pub grad_u: f64,
    /// `‖𝐟‖_{2+ε,Q_R}`.
    pub fvec: f64,
    /// `‖f‖_{2+ε,Q_R}`.
    pub f: f64,
    /// `‖h‖_{2+ε,Σ_R}`.
    pub h: f64,
}

/// Bound on `‖∇u‖_{2+ε,Q_{βR}}` from the local higher-integrability estimate.
#[allow(clippy::too_many_arguments)]
pub fn higher_integrability_rhs(
    kind: CubeKind,
    ed: &EllipticityData,
    fp: &FreeParameters,
    r_big: f64,
    eps: f64,
    n: u32,
    upsilon: f64,
    norms: &LocalGradientNorms,
    k_trace: f64,
) -> Result<f64> {
    ed.validate()?;
    fp.validate()?;
    let interval = gradient_epsilon_admissible(fp.delta, n, upsilon)?;
    if !interval.contains(eps) {
        return Err(Error::param(format!(
            "eps = {eps} is outside the admissible range [0, {}{}",
            interval.sup,
            if interval.closed { "]" } else { ")" }
        )));
    }
    let s = poincare_sobolev_constant(n)?;
    if !(r_big > 0.0 && r_big < 1.0 / (4.0 * s)) {
        return Err(Error::param(format!(
            "need 0 < R < 1/(4S) = {}, got {r_big}",
            1.0 / (4.0 * s)
        )));
    }
    if !(k_trace > 0.0 && k_trace.is_finite()) {
        return Err(Error::domain(format!("k_trace must be > 0, got {k_trace}")));
    }
    for v in [norms.grad_u, norms.fvec, norms.f, norms.h] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::domain("local norms must be finite and >= 0"));
        }
    }
    let nf = f64::from(n);
    let a = ed.a_lo;
    let inv = 1.0 / (2.0 + eps);
    let den = 4.0 - (nf + 2.0) * (upsilon - 1.0) * eps;
    let w0 = (2.0 * nf * fp.beta.powf(-eps * (nf + 2.0) / 2.0) / den).powf(inv);
    let w1 = (2.0 * (4.0 + eps) / (nf * (2.0 + eps) * r_big.powf(eps * (nf + 2.0) / 2.0))).powf(inv);
    let ups_term = upsilon * (4.0 + eps * (nf + 2.0)) / (2.0 * nf);
    let w2 = (2f64.powf(1.0 + eps * (nf + 1.0) / 2.0) * eps / (nf * (2.0 + eps)) + ups_term).powf(inv);
    let f_sqrt = if norms.f == 0.0 {
        0.0
    } else if fp.nu0 > 0.0 {
        norms.f / fp.nu0.sqrt()
    } else {
        return Err(Error::param(
            "source term: Young parameter is zero but the matching datum is not",
        ));
    };
    let data = match kind {
        CubeKind::Interior => {
            w2 * (2.0 * (1.0 + a).sqrt() / a * norms.fvec + (2.0 / a).sqrt() * f_sqrt)
        }
        CubeKind::Boundary => {
            let root = (2.0 * (1.0 + a)).sqrt();
            let w3 = (2f64.powf(1.0 + eps * nf / 2.0) * eps
                / (nf * (2.0 + eps) * r_big.powf(eps / 2.0))
                + ups_term)
                .powf(inv);
            w2 * (2.0 * root / a * norms.fvec + 2.0 / a.sqrt() * f_sqrt)
                + w3 * 4.0 / a * root * k_trace * norms.h
        }
    };
    Ok(w0 * (w1 * norms.grad_u + data))
}

/// Covering constant `C(n)`.
pub fn covering_constant(n: u32, fp: &FreeParameters, eps: f64, upsilon: f64) -> Result<f64> {
    fp.validate()?;
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::param(format!("need eps >= 0, got {eps}")));
    }
    let nf = f64::from(n);
    let den = 4.0 - (nf + 2.0) * (upsilon - 1.0) * eps;
    if !(den > 0.0) {
        return Err(Error::param(format!(
            "4 - (n+2)(upsilon-1)eps = {den} is not positive; eps too large for upsilon = {upsilon}"
        )));
    }
    let inner = 2.0 * nf * fp.beta.powf(-eps * (nf + 2.0) / 2.0) / den;
    Ok(f64::from(fp.cover_n)
        * 2f64.powf(fp.cn)
        * fp.cover_r.powf(-(nf + 2.0) / 2.0)
        * inner.powf(1.0 / (2.0 + eps)))
}
