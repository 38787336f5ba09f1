//! Global energy bounds, the gradient bound `ℳ` and the linear `W^{1,p}` bound.

use serde::{Deserialize, Serialize};

use super::local::{covering_constant, gehring_b, gehring_upsilon, gradient_epsilon_admissible};
use super::{
    nu_quotient, CubeKind, DataNorms, EllipticityData, EnergyVariant, FreeParameters,
    GehringExponents, UpsilonVariant,
};
use crate::error::{Error, Result};

/// Exponent, horizon, dimension and variant of a global bound evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySetting {
    pub p: f64,
    pub n: u32,
    pub t_final: f64,
    pub variant: EnergyVariant,
}

impl EnergySetting {
    pub fn new(p: f64, n: u32, t_final: f64) -> Self {
        Self {
            p,
            n,
            t_final,
            variant: EnergyVariant::Standard,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return Err(Error::domain(format!("need p >= 2, got {}", self.p)));
        }
        if self.n < 2 {
            return Err(Error::domain(format!("need n >= 2, got {}", self.n)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::domain(format!("need T > 0, got {}", self.t_final)));
        }
        Ok(())
    }
}

/// Outputs of the global theorem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainBounds {
    /// `𝒢(a_#, b_#, p)`.
    pub g: f64,
    /// `ℰ(a_#, b_#, p)`.
    pub e: f64,
    /// `ℳ(a_#, b_#)`; `None` when `ε = p − 2` is outside the admissible range.
    pub m: Option<f64>,
    /// Exponential growth rate `κ`.
    pub kappa: f64,
    /// Boundary `υ` used inside `ℳ`.
    pub upsilon: f64,
    /// Supremum of admissible gradient gains `ε` for that `υ`.
    pub eps_cap: f64,
    /// `C(n)` at `ε = p − 2`, when admissible.
    pub cover_constant: Option<f64>,
}

/// `κ` for the given variant.
pub fn growth_exponent(p: f64, nu0: f64, variant: EnergyVariant) -> f64 {
    let s = nu0.powf(1.0 / (p - 1.0));
    match variant {
        EnergyVariant::Standard => p - 2.0 + (p - 1.0) * s,
        EnergyVariant::BZero => (p - 1.0) * (1.0 + s),
    }
}

/// `𝒢(a_#, b_#, p)`.
pub fn energy_functional(
    p: f64,
    n: u32,
    ed: &EllipticityData,
    nu0: f64,
    dn: &DataNorms,
    variant: EnergyVariant,
) -> Result<f64> {
    ed.validate()?;
    dn.validate()?;
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("need p >= 2, got {p}")));
    }
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    if variant == EnergyVariant::Standard && ed.b_lo <= 0.0 {
        return Err(Error::param(
            "b_lo = 0 requires the b_zero variant of the energy bound",
        ));
    }
    let u0 = dn.u0_p.powf(p);
    let f = nu_quotient(dn.f_p.powf(p), nu0, "source term")?;
    let fvec = ((p - 1.0) / ed.a_lo).powf(p / 2.0) * dn.fvec_p.powf(p);
    let h = if dn.h_mixed == 0.0 {
        0.0
    } else {
        match variant {
            EnergyVariant::Standard => {
                let ell = ed.ell;
                p * (ell - 1.0) / ((ell + p - 2.0) * ed.b_lo.powf((p - 1.0) / (ell - 1.0)))
                    * dn.h_mixed
            }
            EnergyVariant::BZero => {
                if dn.omega_vol <= 0.0 {
                    return Err(Error::domain("omega_vol must be > 0 for the b_zero variant"));
                }
                let young = (p * p / (2.0 * ed.a_lo * (p - 1.0))).powf(1.0 / (p - 1.0)) + 1.0;
                (p - 1.0)
                    * young
                    * dn.k_trace.powf(2.0 / (p - 1.0))
                    * dn.omega_vol.powf(1.0 / ((p - 1.0) * f64::from(n)))
                    * dn.h_mixed
            }
        }
    };
    Ok(u0 + f + fvec + h)
}

/// `ℰ = 𝒢(1 + κT e^{κT})`.
pub fn energy_bound(g: f64, kappa: f64, t: f64) -> f64 {
    let kt = kappa * t;
    g * (1.0 + kt * kt.exp())
}

/// `𝒢`, `ℰ`, `κ` and `ℳ` for exponent `p`.
///
/// `norms_p` are the data norms in `L^p`; `norms_2` the same data in `L²`,
/// needed because `ℳ` contains `ℰ(a_#, b_#, 2)`.
pub fn theorem_main_bounds(
    setting: &EnergySetting,
    ed: &EllipticityData,
    fp: &FreeParameters,
    norms_p: &DataNorms,
    norms_2: &DataNorms,
) -> Result<MainBounds> {
    setting.validate()?;
    fp.validate()?;
    let p = setting.p;
    let g = energy_functional(p, setting.n, ed, fp.nu0, norms_p, setting.variant)?;
    let kappa = growth_exponent(p, fp.nu0, setting.variant);
    let e = energy_bound(g, kappa, setting.t_final);

    let n = setting.n;
    let b = gehring_b(ed, fp.nu0, n, CubeKind::Boundary)?;
    let ge = GehringExponents::gradient_reverse_holder(n);
    let upsilon = gehring_upsilon(b, &ge, UpsilonVariant::NoPhi)?;
    let interval = gradient_epsilon_admissible(fp.delta, n, upsilon)?;
    let eps = p - 2.0;
    let (m, cover_constant) = if interval.contains(eps) {
        let c = covering_constant(n, fp, eps, upsilon)?;
        let g2 = energy_functional(2.0, n, ed, fp.nu0, norms_2, setting.variant)?;
        let k2 = growth_exponent(2.0, fp.nu0, setting.variant);
        let e2 = energy_bound(g2, k2, setting.t_final);
        let a = ed.a_lo;
        let root = (1.0 + a).sqrt();
        let f_term = if norms_p.f_p == 0.0 {
            0.0
        } else if fp.nu0 > 0.0 {
            norms_p.f_p / fp.nu0.sqrt()
        } else {
            return Err(Error::param(
                "source term: Young parameter is zero but the matching datum is not",
            ));
        };
        let data = root * norms_p.fvec_p + f_term + root * norms_p.k_trace * norms_p.h_p;
        let m = c * ((e2 / a).sqrt() + (1.0 + upsilon).powf(1.0 / p) / a * data);
        (Some(m), Some(c))
    } else {
        (None, None)
    };
    Ok(MainBounds {
        g,
        e,
        m,
        kappa,
        upsilon,
        eps_cap: interval.sup,
        cover_constant,
    })
}

/// Golden-section search for the `ν₀ ∈ [10⁻⁶, 10³]` minimizing `𝒢·e^{κT}`,
/// carried out in `log₁₀ ν₀`. Returns `(ν₀, 𝒢·e^{κT})`.
pub fn optimize_nu0(
    setting: &EnergySetting,
    ed: &EllipticityData,
    dn: &DataNorms,
) -> Result<(f64, f64)> {
    setting.validate()?;
    let objective = |lg: f64| -> Result<f64> {
        let nu0 = 10f64.powf(lg);
        let g = energy_functional(setting.p, setting.n, ed, nu0, dn, setting.variant)?;
        let kappa = growth_exponent(setting.p, nu0, setting.variant);
        Ok(g * (kappa * setting.t_final).exp())
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-6.0f64, 3.0f64);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while hi - lo > 1e-10 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    // The endpoints are candidates too: the objective may be monotone.
    let mut best = (x, objective(x)?);
    for end in [-6.0, 3.0] {
        let v = objective(end)?;
        if v < best.1 {
            best = (end, v);
        }
    }
    Ok((10f64.powf(best.0), best.1))
}

/// Pieces of the energy bound when the source is estimated through the
/// dual Sobolev constant `S_{p'}` instead of the plain `L^p` pairing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevFTerm {
    /// Replacement for the `‖f‖ᵖ/ν₀` term of `𝒢`.
    pub g_term: f64,
    /// Fraction `ν₀^{1/p}/2` of the gradient energy consumed by the source.
    pub grad_weight: f64,
    /// Contribution of the source to the growth rate.
    pub growth: f64,
}

pub fn sobolev_f_term(p: f64, nu0: f64, s_dual: f64, f_norm: f64) -> Result<SobolevFTerm> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("need p >= 2, got {p}")));
    }
    if !(s_dual >= 0.0 && f_norm >= 0.0) {
        return Err(Error::domain("S_dual and the source norm must be >= 0"));
    }
    if f_norm == 0.0 {
        return Ok(SobolevFTerm {
            g_term: 0.0,
            grad_weight: 0.0,
            growth: 0.0,
        });
    }
    if nu0 <= 0.0 {
        return Err(Error::param(
            "source term: Young parameter is zero but the matching datum is not",
        ));
    }
    let g_term = (1.0 + (p - 1.0).powf(p)) / (p * nu0) * s_dual.powf(p) * f_norm.powf(p);
    let second = if p == 2.0 {
        0.0
    } else {
        (p - 2.0) * nu0.powf(1.0 / (p - 2.0)) / (2.0 * p)
    };
    Ok(SobolevFTerm {
        g_term,
        grad_weight: nu0.powf(1.0 / p) / 2.0,
        growth: (p - 1.0) * nu0.powf(1.0 / (p - 1.0)) / p + second,
    })
}

/// Data norms of the linear problem, in the norms the `W^{1,p}` bound uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearRhs {
    pub fvec: f64,
    pub f: f64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearW1p {
    pub lambda_p: f64,
    pub grad_bound: f64,
    pub trace_bound: f64,
}

/// `Λ_p` and the perturbation bounds for the linear (`ℓ = 2`) problem.
///
/// `Λ_p` is `ℳ(1,1) + ℰ(1,1,p)` evaluated with identity ellipticity and unit
/// data norms; `geometry` supplies `|Ω|` and the trace constant.
pub fn linear_w1p(
    setting: &EnergySetting,
    ed: &EllipticityData,
    fp: &FreeParameters,
    geometry: &DataNorms,
    rhs: &LinearRhs,
) -> Result<LinearW1p> {
    ed.validate()?;
    if ed.ell != 2.0 {
        return Err(Error::param(format!("the linear bound needs ell = 2, got {}", ed.ell)));
    }
    if ed.a_lo > 1.0 || ed.b_lo > 1.0 {
        return Err(Error::param("the perturbation bound needs a_lo <= 1 and b_lo <= 1"));
    }
    for v in [rhs.fvec, rhs.f, rhs.h] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::domain("linear data norms must be finite and >= 0"));
        }
    }
    let unit = geometry.unit_data();
    let unit_ed = EllipticityData::unit();
    let mb = theorem_main_bounds(setting, &unit_ed, fp, &unit, &unit)?;
    let m = mb.m.ok_or_else(|| {
        Error::infeasible(format!(
            "eps = p - 2 = {} is outside the admissible range [0, {})",
            setting.p - 2.0,
            mb.eps_cap
        ))
    })?;
    let lambda = m + mb.e;
    let grad_den = 1.0 - lambda * (1.0 - ed.a_lo);
    let trace_den = 1.0 - lambda * (1.0 - ed.b_lo);
    if grad_den <= 0.0 || trace_den <= 0.0 {
        return Err(Error::infeasible(format!(
            "perturbation too large: 1 - Lambda(1 - a_lo) = {grad_den}, 1 - Lambda(1 - b_lo) = {trace_den}"
        )));
    }
    let sum = rhs.fvec + rhs.f + rhs.h;
    Ok(LinearW1p {
        lambda_p: lambda,
        grad_bound: lambda * sum / grad_den,
        trace_bound: lambda * sum / trace_den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_norms() -> DataNorms {
        DataNorms {
            u0_p: 1.0,
            f_p: 1.0,
            fvec_p: 1.0,
            h_mixed: 1.0,
            h_p: 1.0,
            omega_vol: 1.0,
            k_trace: 1.0,
            s_dual: 0.0,
        }
    }

    #[test]
    fn g_at_unit_data_is_four() {
        let g = energy_functional(2.0, 2, &EllipticityData::unit(), 1.0, &unit_norms(), EnergyVariant::Standard)
            .unwrap();
        assert!((g - 4.0).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_data_only_initial_value() {
        let dn = DataNorms {
            u0_p: 1.0,
            k_trace: 1.0,
            omega_vol: 1.0,
            ..Default::default()
        };
        let mut fp = FreeParameters::defaults(2).with_data_support(false, false, false);
        fp.eps = 0.0;
        for p in [2.0, 2.5, 3.0] {
            let s = EnergySetting::new(p, 2, 1.3);
            let mb = theorem_main_bounds(&s, &EllipticityData::unit(), &fp, &dn, &dn).unwrap();
            assert!((mb.g - 1.0).abs() < 1e-14);
            assert!((mb.kappa - (p - 2.0)).abs() < 1e-14);
            if p == 2.0 {
                assert_eq!(mb.e, mb.g);
            }
        }
    }

    #[test]
    fn zero_problem_gives_zero_bounds() {
        let dn = DataNorms {
            k_trace: 1.0,
            omega_vol: 1.0,
            ..Default::default()
        };
        let fp = FreeParameters::defaults(2).with_data_support(false, false, false);
        let mb = theorem_main_bounds(&EnergySetting::new(2.0, 2, 1.0), &EllipticityData::unit(), &fp, &dn, &dn)
            .unwrap();
        assert_eq!(mb.g, 0.0);
        assert_eq!(mb.e, 0.0);
        assert_eq!(mb.m, Some(0.0));
    }

    #[test]
    fn standard_variant_rejects_zero_b() {
        let ed = EllipticityData::new(1.0, 1.0, 0.0, 1.0, 2.0).unwrap();
        let err = energy_functional(2.0, 2, &ed, 1.0, &unit_norms(), EnergyVariant::Standard).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
        assert!(energy_functional(2.0, 2, &ed, 1.0, &unit_norms(), EnergyVariant::BZero).is_ok());
    }

    #[test]
    fn zero_nu_with_nonzero_source_is_rejected() {
        let err = energy_functional(2.0, 2, &EllipticityData::unit(), 0.0, &unit_norms(), EnergyVariant::Standard)
            .unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn e_dominates_g() {
        let s = EnergySetting::new(2.5, 2, 0.7);
        let mb = theorem_main_bounds(&s, &EllipticityData::unit(), &FreeParameters::defaults(2), &unit_norms(), &unit_norms())
            .unwrap();
        assert!(mb.e > mb.g);
    }

    #[test]
    fn m_unavailable_far_above_two() {
        let s = EnergySetting::new(3.0, 2, 1.0);
        let mb = theorem_main_bounds(&s, &EllipticityData::unit(), &FreeParameters::defaults(2), &unit_norms(), &unit_norms())
            .unwrap();
        assert!(mb.m.is_none());
    }

    #[test]
    fn linear_bound_unit_ellipticity() {
        let s = EnergySetting::new(2.0, 2, 1.0);
        let geo = unit_norms();
        let fp = FreeParameters::defaults(2);
        let rhs = LinearRhs { fvec: 0.5, f: 0.25, h: 1.0 };
        let lw = linear_w1p(&s, &EllipticityData::unit(), &fp, &geo, &rhs).unwrap();
        assert!((lw.grad_bound - lw.lambda_p * 1.75).abs() < 1e-9 * lw.grad_bound);

        let a = 1.0 - 1.0 / (2.0 * lw.lambda_p);
        let ed = EllipticityData::new(a, 1.0, a, 1.0, 2.0).unwrap();
        let half = linear_w1p(&s, &ed, &fp, &geo, &rhs).unwrap();
        // 1 - a is formed with cancellation since Λ is large.
        let tol = 1e-15 * lw.lambda_p;
        assert!((half.grad_bound / lw.grad_bound - 2.0).abs() < tol);
        assert!((half.trace_bound / lw.trace_bound - 2.0).abs() < tol);

        let zero = linear_w1p(&s, &EllipticityData::unit(), &fp, &geo, &LinearRhs::default()).unwrap();
        assert_eq!(zero.grad_bound, 0.0);
        assert_eq!(zero.trace_bound, 0.0);
    }

    #[test]
    fn linear_bound_infeasible_for_small_a() {
        let s = EnergySetting::new(2.0, 2, 1.0);
        let ed = EllipticityData::new(0.01, 1.0, 1.0, 1.0, 2.0).unwrap();
        let err = linear_w1p(&s, &ed, &FreeParameters::defaults(2), &unit_norms(), &LinearRhs::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn optimizer_beats_grid() {
        let s = EnergySetting::new(2.5, 2, 1.0);
        let ed = EllipticityData::unit();
        let dn = unit_norms();
        let (nu, best) = optimize_nu0(&s, &ed, &dn).unwrap();
        assert!(nu > 1e-6 && nu < 1e3);
        for k in 0..=90 {
            let lg = -6.0 + 0.1 * f64::from(k);
            let v = 10f64.powf(lg);
            let g = energy_functional(2.5, 2, &ed, v, &dn, EnergyVariant::Standard).unwrap();
            let obj = g * growth_exponent(2.5, v, EnergyVariant::Standard).exp();
            assert!(best <= obj * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sobolev_term_vanishes_without_source() {
        let t = sobolev_f_term(2.0, 0.0, 3.0, 0.0).unwrap();
        assert_eq!(t.g_term, 0.0);
        let t = sobolev_f_term(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((t.g_term - 1.0).abs() < 1e-15);
        assert!((t.growth - 0.5).abs() < 1e-15);
    }
}
