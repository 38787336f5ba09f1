//! Closed-form evaluation of the explicit a-priori constants.
//!
//! Every function in this module is a pure function of its arguments. The
//! inputs are grouped into a few records:
//!
//! * [`EllipticityData`]: the structural constants `a_#`, `a^#`, `b_#`, `b^#`
//!   and the boundary growth exponent `ℓ`,
//! * [`FreeParameters`]: the Young/covering parameters the bounds are free in,
//! * [`DataNorms`]: the norms of the data the bounds depend on.
//!
//! A data norm that is zero forces the matching Young parameter `ν` to zero;
//! the corresponding quotient term (for instance `‖f‖ᵖ/ν₀`) is then defined
//! to be zero. A zero `ν` paired with a nonzero datum is rejected.

mod energy;
mod local;
mod misc;
mod steady;

pub use energy::{
    energy_bound, energy_functional, growth_exponent, linear_w1p, optimize_nu0, sobolev_f_term,
    theorem_main_bounds, EnergySetting, LinearRhs, LinearW1p, MainBounds, SobolevFTerm,
};
pub use local::{
    caccioppoli_lhs_factor, caccioppoli_rhs, covering_constant, epsilon_admissible, gehring_b,
    gehring_upsilon, gradient_epsilon_admissible, higher_integrability_rhs, interior_radius_cap,
    AdmissibleInterval, CaccioppoliNorms, Cap, GehringExponents, LocalGradientNorms,
    UpsilonVariant,
};
pub use misc::{gamma_half_integer, marcinkiewicz_constant, poincare_sobolev_constant, Marcinkiewicz};
pub use steady::{
    contraction_data, contraction_kappa, steady_state_bounds, ContractionData, FieldMultipliers,
    SteadyBounds, SteadyCover, SteadyNorms,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural constants of the coefficient matrix and the boundary law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityData {
    /// Uniform ellipticity constant `a_#`.
    pub a_lo: f64,
    /// `‖A‖_∞`.
    pub a_hi: f64,
    /// Lower growth constant `b_#` of the boundary law.
    pub b_lo: f64,
    /// `‖γ₁‖_∞`, the upper growth constant of the boundary law.
    pub b_hi: f64,
    /// Growth exponent `ℓ ≥ 2`.
    pub ell: f64,
}

impl EllipticityData {
    pub fn new(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64, ell: f64) -> Result<Self> {
        let ed = Self {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
            ell,
        };
        ed.validate()?;
        Ok(ed)
    }

    /// Identity matrix, unit linear boundary law.
    pub fn unit() -> Self {
        Self {
            a_lo: 1.0,
            a_hi: 1.0,
            b_lo: 1.0,
            b_hi: 1.0,
            ell: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a_lo, self.a_hi, self.b_lo, self.b_hi, self.ell]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("ellipticity data must be finite"));
        }
        if !(self.a_lo > 0.0 && self.a_lo <= self.a_hi) {
            return Err(Error::domain(format!(
                "need 0 < a_lo <= a_hi, got a_lo={}, a_hi={}",
                self.a_lo, self.a_hi
            )));
        }
        if !(self.b_lo >= 0.0 && self.b_lo <= self.b_hi) {
            return Err(Error::domain(format!(
                "need 0 <= b_lo <= b_hi, got b_lo={}, b_hi={}",
                self.b_lo, self.b_hi
            )));
        }
        if self.ell < 2.0 {
            return Err(Error::domain(format!("need ell >= 2, got {}", self.ell)));
        }
        Ok(())
    }
}

/// Scalars the bounds are free in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeParameters {
    /// Young parameter attached to the source `f`.
    pub nu0: f64,
    /// Young parameter attached to the flux datum `𝐟`.
    pub nu1: f64,
    /// Young parameter attached to the boundary datum `h`.
    pub nu2: f64,
    /// Integrability gain `ε`.
    pub eps: f64,
    /// Extra integrability `δ` of the data.
    pub delta: f64,
    /// Relative distance `β ∈ (0,1)` of the inner set to the cube boundary.
    pub beta: f64,
    /// Number `N` of disjoint cube families in the cover.
    pub cover_n: u32,
    /// Minimal cube side `r_#` of the cover.
    pub cover_r: f64,
    /// Value of the degree-one polynomial `c(n)`.
    pub cn: f64,
}

impl FreeParameters {
    /// Defaults for dimension `n`: `ν₀ = 1`, `ν₁ = 1/2`, `ν₂ = 1/4`,
    /// `N = 2ⁿ + 1`, `c(n) = n + 1`.
    pub fn defaults(n: u32) -> Self {
        Self {
            nu0: 1.0,
            nu1: 0.5,
            nu2: 0.25,
            eps: 0.0,
            delta: 1.0,
            beta: 0.5,
            cover_n: 2u32.pow(n) + 1,
            cover_r: 0.25,
            cn: f64::from(n) + 1.0,
        }
    }

    /// Zeroes each `ν` whose datum vanishes identically.
    pub fn with_data_support(mut self, f_nonzero: bool, fvec_nonzero: bool, h_nonzero: bool) -> Self {
        if !f_nonzero {
            self.nu0 = 0.0;
        }
        if !fvec_nonzero {
            self.nu1 = 0.0;
        }
        if !h_nonzero {
            self.nu2 = 0.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nu0", self.nu0), ("nu1", self.nu1), ("nu2", self.nu2), ("eps", self.eps)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param(format!("delta must be > 0, got {}", self.delta)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::param(format!("beta must lie in (0,1), got {}", self.beta)));
        }
        if self.cover_n == 0 {
            return Err(Error::param("cover_n must be >= 1"));
        }
        if !(self.cover_r > 0.0 && self.cover_r.is_finite()) {
            return Err(Error::param(format!("cover_r must be > 0, got {}", self.cover_r)));
        }
        if !(self.cn > 0.0 && self.cn.is_finite()) {
            return Err(Error::param(format!("c(n) must be > 0, got {}", self.cn)));
        }
        Ok(())
    }
}

/// Norms of the data entering the global bounds.
///
/// `h_mixed` is the boundary integral that appears in the energy functional:
/// `∫_Σ |h|^{(ℓ+p-2)/(ℓ-1)}` for the standard variant and `‖h‖_{p',Σ}^{p'}`
/// for the `b_# = 0` variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DataNorms {
    pub u0_p: f64,
    pub f_p: f64,
    pub fvec_p: f64,
    pub h_mixed: f64,
    pub h_p: f64,
    pub omega_vol: f64,
    pub k_trace: f64,
    pub s_dual: f64,
}

impl DataNorms {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("u0_p", self.u0_p),
            ("f_p", self.f_p),
            ("fvec_p", self.fvec_p),
            ("h_mixed", self.h_mixed),
            ("h_p", self.h_p),
            ("omega_vol", self.omega_vol),
            ("s_dual", self.s_dual),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.k_trace > 0.0 && self.k_trace.is_finite()) {
            return Err(Error::domain(format!("k_trace must be > 0, got {}", self.k_trace)));
        }
        Ok(())
    }

    /// Unit data norms, keeping the geometric constants of `self`.
    pub fn unit_data(&self) -> Self {
        Self {
            u0_p: 1.0,
            f_p: 1.0,
            fvec_p: 1.0,
            h_mixed: 1.0,
            h_p: 1.0,
            ..*self
        }
    }
}

/// Which form of the global energy bound to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyVariant {
    Standard,
    /// Boundary law without a positive lower growth constant.
    BZero,
}

/// Location class of a localized estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeKind {
    Interior,
    Boundary,
}

/// `value/ν` with the zero-datum convention.
pub(crate) fn nu_quotient(value: f64, nu: f64, what: &str) -> Result<f64> {
    if value == 0.0 {
        Ok(0.0)
    } else if nu > 0.0 {
        Ok(value / nu)
    } else {
        Err(Error::param(format!(
            "{what}: Young parameter is zero but the matching datum is not"
        )))
    }
}
