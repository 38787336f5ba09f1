//! Extended-precision re-evaluation of the closed-form constants.
//!
//! Every formula here is written out again from the displayed expressions,
//! without calling into `hireg_core::estimates`, and evaluated in 128-bit
//! binary floating point. [`run`] draws random valid inputs, evaluates both
//! sides and records the worst relative disagreement per operation.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use hireg_core::estimates::{
    caccioppoli_lhs_factor, caccioppoli_rhs, contraction_data, contraction_kappa, covering_constant,
    energy_bound, energy_functional, epsilon_admissible, gamma_half_integer, gehring_b,
    gehring_upsilon, gradient_epsilon_admissible, growth_exponent, higher_integrability_rhs,
    interior_radius_cap, linear_w1p, marcinkiewicz_constant, optimize_nu0,
    poincare_sobolev_constant, sobolev_f_term, steady_state_bounds, theorem_main_bounds,
    CaccioppoliNorms, CubeKind, DataNorms, EllipticityData, EnergySetting, EnergyVariant,
    FreeParameters, GehringExponents, LinearRhs, LocalGradientNorms, SteadyCover, SteadyNorms,
    UpsilonVariant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CC: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
    static POINCARE: RefCell<HashMap<u32, R>> = RefCell::new(HashMap::new());
    static LN2: R = r(2.0).ln();
}

#[derive(Clone, Debug)]
pub struct R(BigFloat);

pub fn r(x: f64) -> R {
    R(BigFloat::from_f64(x, PREC))
}

impl R {
    pub fn pi() -> R {
        CC.with(|c| R(c.borrow_mut().pi(PREC, RM)))
    }

    /// Natural log for `self > 0`: one Halley step on `e^y = x` from the
    /// `f64` estimate, which triples the 53 correct bits.
    pub fn ln(&self) -> R {
        let y0 = r(self.to_f64().ln());
        let ey = y0.exp();
        y0 + 2.0 * (self.clone() - ey.clone()) / (self.clone() + ey)
    }

    pub fn exp(&self) -> R {
        CC.with(|c| R(self.0.exp(PREC, RM, &mut c.borrow_mut())))
    }

    pub fn sqrt(&self) -> R {
        R(self.0.sqrt(PREC, RM))
    }

    /// `self^y` for `self ≥ 0`; `0^y = 0` for `y > 0`.
    pub fn pow(&self, y: R) -> R {
        if self.0.is_zero() {
            return r(0.0);
        }
        let yf = y.to_f64();
        if yf.fract() == 0.0 && yf.abs() <= 64.0 && y.0.fract().is_zero() {
            let k = R(self.0.powi(yf.abs() as usize, PREC, RM));
            return if yf < 0.0 { 1.0 / k } else { k };
        }
        if self.to_f64() == 2.0 && self.0.cmp(&BigFloat::from_f64(2.0, PREC)) == Some(0) {
            return (y * LN2.with(R::clone)).exp();
        }
        (y * self.ln()).exp()
    }

    pub fn powf(&self, y: f64) -> R {
        self.pow(r(y))
    }

    pub fn abs(&self) -> R {
        R(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn max(self, o: R) -> R {
        if self.0.cmp(&o.0).unwrap_or(0) >= 0 {
            self
        } else {
            o
        }
    }

    pub fn min(self, o: R) -> R {
        if self.0.cmp(&o.0).unwrap_or(0) <= 0 {
            self
        } else {
            o
        }
    }

    /// Nearest `f64`, within one ulp; the mantissa is read as `0.m × 2^e`.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        let words = self.0.mantissa_digits().expect("finite value");
        let bits = std::mem::size_of_val(&words[0]) as i32 * 8;
        let mut m = 0.0;
        for (j, w) in words.iter().rev().take(3).enumerate() {
            m += *w as f64 * 2f64.powi(-bits * (j as i32 + 1));
        }
        let e = self.0.exponent().expect("finite value") as i32;
        let v = m * 2f64.powi(e);
        if self.0.is_negative() {
            -v
        } else {
            v
        }
    }

    pub fn to_decimal(&self) -> String {
        CC.with(|c| self.0.format(Radix::Dec, RM, &mut c.borrow_mut()))
            .expect("format")
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for R {
            type Output = R;
            fn $m(self, o: R) -> R {
                R(self.0.$m(&o.0, PREC, RM))
            }
        }
        impl $tr<f64> for R {
            type Output = R;
            fn $m(self, o: f64) -> R {
                self.$m(r(o))
            }
        }
        impl $tr<R> for f64 {
            type Output = R;
            fn $m(self, o: R) -> R {
                r(self).$m(o)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for R {
    type Output = R;
    fn neg(self) -> R {
        R(self.0.neg())
    }
}

fn int(k: u32) -> R {
    r(f64::from(k))
}

fn two_pow(e: R) -> R {
    r(2.0).pow(e)
}

fn factorial(k: u32) -> R {
    (1..=k).fold(r(1.0), |acc, i| acc * int(i))
}

// ---------------------------------------------------------------- formulas

/// `Γ(twice/2)`: `(k−1)!` at integers, `(2k)!√π/(4ᵏk!)` at `k + ½`.
pub fn gamma(twice: u32) -> R {
    if twice % 2 == 0 {
        factorial(twice / 2 - 1)
    } else {
        let k = (twice - 1) / 2;
        factorial(2 * k) * R::pi().sqrt() / (r(4.0).pow(int(k)) * factorial(k))
    }
}

pub fn poincare(n: u32) -> R {
    if let Some(v) = POINCARE.with(|m| m.borrow().get(&n).cloned()) {
        return v;
    }
    let v = poincare_uncached(n);
    POINCARE.with(|m| m.borrow_mut().insert(n, v.clone()));
    v
}

fn poincare_uncached(n: u32) -> R {
    let nn = int(n);
    let middle = if n == 2 {
        r(1.0)
    } else {
        (nn.clone() - 2.0).pow((nn.clone() - 2.0) / (2.0 * nn.clone()))
    };
    1.0 / R::pi().sqrt()
        * nn.pow((2.0 - 3.0 * nn.clone()) / (2.0 * nn.clone()))
        * middle
        * (gamma(2 * n) / gamma(n)).pow(1.0 / nn)
}

pub fn kappa(p: f64, nu0: f64, variant: EnergyVariant) -> R {
    let p = r(p);
    let root = r(nu0).pow(1.0 / (p.clone() - 1.0));
    match variant {
        EnergyVariant::Standard => p.clone() - 2.0 + (p - 1.0) * root,
        EnergyVariant::BZero => (p - 1.0) * (1.0 + root),
    }
}

pub fn g_functional(p: f64, n: u32, ed: &EllipticityData, nu0: f64, dn: &DataNorms, variant: EnergyVariant) -> R {
    let pr = r(p);
    let a = r(ed.a_lo);
    let f_term = if dn.f_p == 0.0 {
        r(0.0)
    } else {
        r(dn.f_p).pow(pr.clone()) / nu0
    };
    let flux = ((pr.clone() - 1.0) / a.clone()).pow(pr.clone() / 2.0) * r(dn.fvec_p).pow(pr.clone());
    let h = match variant {
        EnergyVariant::Standard => {
            let ell = r(ed.ell);
            pr.clone() * (ell.clone() - 1.0)
                / ((ell.clone() + pr.clone() - 2.0) * r(ed.b_lo).pow((pr.clone() - 1.0) / (ell - 1.0)))
                * dn.h_mixed
        }
        EnergyVariant::BZero => {
            let pm1 = pr.clone() - 1.0;
            let young = (pr.clone() * pr.clone() / (2.0 * a * pm1.clone())).pow(1.0 / pm1.clone()) + 1.0;
            pm1.clone()
                * young
                * r(dn.k_trace).pow(2.0 / pm1.clone())
                * r(dn.omega_vol).pow(1.0 / (pm1 * int(n)))
                * dn.h_mixed
        }
    };
    r(dn.u0_p).pow(pr) + f_term + flux + h
}

pub fn e_of(g: R, kappa: R, t: f64) -> R {
    let kt = kappa * t;
    g * (1.0 + kt.clone() * kt.exp())
}

pub fn b_const(ed: &EllipticityData, nu0: f64, n: u32, kind: CubeKind) -> R {
    let (a, ah, nn) = (r(ed.a_lo), r(ed.a_hi), int(n));
    let four_s = (4.0 * poincare(n)).pow(r(2.0));
    let core = 2.0 * ah.clone() * ah / a.clone() + nu0;
    match kind {
        CubeKind::Interior => two_pow(2.0 * (2.0 - 1.0 / nn)) / a * (core + 2.0) * four_s,
        CubeKind::Boundary => two_pow(5.0 - 2.0 / nn) / a * (core + r(19.0) / 8.0) * four_s,
    }
}

pub fn upsilon(b: f64, ge: &GehringExponents, variant: UpsilonVariant) -> R {
    let (nn, p) = (int(ge.n), r(ge.p));
    let p_dual = p.clone() / (p.clone() - 1.0);
    let lead = two_pow(nn.clone() + 2.0) * (two_pow(nn.clone() + 2.0) * b).pow(1.0 / p.clone());
    let m_term = two_pow((nn.clone() / ge.m1 + 1.0 / r(ge.m2)) * ge.r / p.clone());
    let l_term = two_pow(((nn.clone() - 1.0) / ge.l1 + 1.0 / r(ge.l2)) * ge.s / p.clone());
    let d_term = two_pow(nn.clone() * ge.d / p.clone());
    let tail = two_pow(2.0 * nn.clone() + 3.0);
    let mut bracket = lead + 3.0 / p_dual + m_term + tail;
    if matches!(variant, UpsilonVariant::General | UpsilonVariant::NoPhi) {
        bracket = bracket + l_term;
    }
    if matches!(variant, UpsilonVariant::General | UpsilonVariant::Interior) {
        bracket = bracket + d_term;
    }
    (r(4.0).pow(nn) + 1.0) * bracket.pow(p)
}

pub fn eps_cap(delta: f64, p: f64, ups: f64) -> R {
    r(delta).min((r(p) - 1.0) / (r(ups) - 1.0))
}

pub fn gradient_eps_cap(delta: f64, n: u32, ups: f64) -> R {
    r(delta).min(4.0 / ((int(n) + 2.0) * (r(ups) - 1.0)))
}

pub fn cover_c(n: u32, fp: &FreeParameters, eps: f64, ups: f64) -> R {
    let nn = int(n);
    let e = r(eps);
    let inner = 2.0 * nn.clone() * r(fp.beta).pow(-e.clone() * (nn.clone() + 2.0) / 2.0)
        / (4.0 - (nn.clone() + 2.0) * (r(ups) - 1.0) * e.clone());
    int(fp.cover_n) * two_pow(r(fp.cn)) * r(fp.cover_r).pow(-(nn + 2.0) / 2.0) * inner.pow(1.0 / (2.0 + e))
}

pub struct Main {
    pub g: R,
    pub e: R,
    pub kappa: R,
    pub upsilon: R,
    pub cap: R,
    pub m: Option<R>,
}

fn gradient_exponents(n: u32) -> GehringExponents {
    let q = (f64::from(n) + 2.0) / f64::from(n);
    GehringExponents {
        p: q,
        m1: 2.0,
        m2: 2.0,
        r: 2.0,
        l1: 2.0,
        l2: 2.0,
        s: 2.0,
        d: q,
        n,
    }
}

/// Admissible gradient gain used by `ℳ`.
pub fn m_gain_cap(ed: &EllipticityData, fp: &FreeParameters, n: u32) -> f64 {
    let b = b_const(ed, fp.nu0, n, CubeKind::Boundary).to_f64();
    let ups = upsilon(b, &gradient_exponents(n), UpsilonVariant::NoPhi);
    gradient_eps_cap(fp.delta, n, ups.to_f64()).to_f64()
}

pub fn main_bounds(
    s: &EnergySetting,
    ed: &EllipticityData,
    fp: &FreeParameters,
    np: &DataNorms,
    n2: &DataNorms,
) -> Main {
    let g = g_functional(s.p, s.n, ed, fp.nu0, np, s.variant);
    let k = kappa(s.p, fp.nu0, s.variant);
    let e = e_of(g.clone(), k.clone(), s.t_final);
    let b = b_const(ed, fp.nu0, s.n, CubeKind::Boundary).to_f64();
    let ups = upsilon(b, &gradient_exponents(s.n), UpsilonVariant::NoPhi);
    let cap = gradient_eps_cap(fp.delta, s.n, ups.to_f64());
    let eps = s.p - 2.0;
    let open = fp.delta >= cap.to_f64();
    let inside = eps < cap.to_f64() || (!open && eps == cap.to_f64());
    let m = inside.then(|| {
        let c = cover_c(s.n, fp, eps, ups.to_f64());
        let e2 = e_of(
            g_functional(2.0, s.n, ed, fp.nu0, n2, s.variant),
            kappa(2.0, fp.nu0, s.variant),
            s.t_final,
        );
        let a = r(ed.a_lo);
        let root = (1.0 + a.clone()).sqrt();
        let f = if np.f_p == 0.0 {
            r(0.0)
        } else {
            r(np.f_p) / r(fp.nu0).sqrt()
        };
        let data = root.clone() * np.fvec_p + f + root * np.k_trace * np.h_p;
        c * ((e2 / a.clone()).sqrt() + (1.0 + ups.clone()).pow(1.0 / r(s.p)) / a * data)
    });
    Main {
        g,
        e,
        kappa: k,
        upsilon: ups,
        cap,
        m,
    }
}

pub fn cacc_lhs(ed: &EllipticityData, fp: &FreeParameters) -> R {
    r(ed.a_lo) * (1.0 - (r(fp.nu1) + fp.nu2))
}

pub fn cacc_rhs(ed: &EllipticityData, fp: &FreeParameters, rb: f64, rs: f64, k: f64, nm: &CaccioppoliNorms) -> R {
    let (a, ah) = (r(ed.a_lo), r(ed.a_hi));
    let gap = r(rb) - rs;
    let sq = |v: f64| r(v) * v;
    let lead = (2.0 * ah.clone() * ah / a.clone() + 2.0 + fp.nu0 + 3.0 * r(fp.nu2) / 2.0) * 2.0
        / (gap.clone() * gap)
        * sq(nm.eta_u_minus_u);
    let f = if nm.f == 0.0 { r(0.0) } else { sq(nm.f) / fp.nu0 };
    let fv = if nm.fvec == 0.0 {
        r(0.0)
    } else {
        (1.0 / (a.clone() * fp.nu1) + 2.0) * sq(nm.fvec)
    };
    let h = if nm.h == 0.0 {
        r(0.0)
    } else {
        2.0 * r(rb) * sq(k) / fp.nu2 * (1.0 / a + 2.0) * sq(nm.h)
    };
    lead + f + fv + h
}

#[allow(clippy::too_many_arguments)]
pub fn hi_rhs(
    kind: CubeKind,
    ed: &EllipticityData,
    fp: &FreeParameters,
    rb: f64,
    eps: f64,
    n: u32,
    ups: f64,
    nm: &LocalGradientNorms,
    k: f64,
) -> R {
    let (nn, e, a, u, rr) = (int(n), r(eps), r(ed.a_lo), r(ups), r(rb));
    let inv = 1.0 / (2.0 + e.clone());
    let front = (2.0 * nn.clone() * r(fp.beta).pow(-e.clone() * (nn.clone() + 2.0) / 2.0)
        / (4.0 - (nn.clone() + 2.0) * (u.clone() - 1.0) * e.clone()))
    .pow(inv.clone());
    let grad_w = (2.0 * (4.0 + e.clone())
        / (nn.clone() * (2.0 + e.clone()) * rr.pow(e.clone() * (nn.clone() + 2.0) / 2.0)))
    .pow(inv.clone());
    let ups_part = u * (4.0 + e.clone() * (nn.clone() + 2.0)) / (2.0 * nn.clone());
    let data_w = (two_pow(1.0 + e.clone() * (nn.clone() + 1.0) / 2.0) * e.clone() / (nn.clone() * (2.0 + e.clone()))
        + ups_part.clone())
    .pow(inv.clone());
    let f_over = if nm.f == 0.0 {
        r(0.0)
    } else {
        r(nm.f) / r(fp.nu0).sqrt()
    };
    let data = match kind {
        CubeKind::Interior => {
            data_w
                * (2.0 * (1.0 + a.clone()).sqrt() / a.clone() * nm.fvec
                    + (2.0 / a.clone()).sqrt() * f_over)
        }
        CubeKind::Boundary => {
            let root = (2.0 * (1.0 + a.clone())).sqrt();
            let h_w = (two_pow(1.0 + e.clone() * nn.clone() / 2.0) * e.clone()
                / (nn.clone() * (2.0 + e.clone()) * rr.pow(e / 2.0))
                + ups_part)
                .pow(inv);
            data_w * (2.0 * root.clone() / a.clone() * nm.fvec + 2.0 / a.clone().sqrt() * f_over)
                + h_w * 4.0 / a * root * k * nm.h
        }
    };
    front * (grad_w * nm.grad_u + data)
}

pub fn radius_cap(n: u32, t: f64, reach: f64) -> R {
    r(t).sqrt().min(r(reach)).min(1.0 / (4.0 * poincare(n)))
}

/// `(constant, α)` with `α` solving `1/p = α/q + (1−α)/r`.
pub fn marcinkiewicz(p: f64, q: f64, rr: f64, t1: f64, t2: f64) -> (R, R) {
    let (p, q, rr) = (r(p), r(q), r(rr));
    let alpha = (1.0 / p.clone() - 1.0 / rr.clone()) / (1.0 / q.clone() - 1.0 / rr.clone());
    let c = 2.0
        * (p.clone() / (p.clone() - q) + p.clone() / (rr - p.clone())).pow(1.0 / p)
        * r(t1).pow(alpha.clone())
        * r(t2).pow(1.0 - alpha.clone());
    (c, alpha)
}

pub struct Steady {
    pub upsilon: R,
    pub rhs: R,
    pub fvec_mult: R,
    pub f_mult: R,
    pub h_mult: R,
}

pub fn steady(ed: &EllipticityData, nu0: f64, n: u32, cover: &SteadyCover, eps: f64, nm: &SteadyNorms) -> Steady {
    let (a, ah, nn, e) = (r(ed.a_lo), r(ed.a_hi), int(n), r(eps));
    let ups = (r(8.0).pow(nn.clone()) + 1.0)
        * two_pow(6.0 * nn.clone())
        * (((4.0 * ah / a.clone()).pow(r(2.0)) + (4.0 + r(nu0)) / a.clone()).sqrt() + 1.0).pow(r(2.0));
    let q = 2.0 + e.clone();
    let growth = ups.clone() * (4.0 + (nn.clone() + 2.0) * e.clone());
    let bracket = (8.0 / r(cover.r_lo).pow(nn.clone())).pow(e.clone() / 2.0) * 4.0 * r(nm.grad_u_2).pow(q.clone())
        + (two_pow(2.0 + 3.0 * e.clone() / 2.0) + growth.clone()) * r(nm.f_norm).pow(q.clone())
        + (4.0 + growth) * r(nm.h_norm).pow(q);
    let rhs = two_pow(nn.clone() * (1.0 + e.clone() / 2.0)) * int(cover.n_cover)
        / (4.0 - (nn.clone() + 2.0) * (ups.clone() - 1.0) * e)
        * bracket;
    Steady {
        upsilon: ups,
        rhs,
        fvec_mult: (r(1.0) / a.clone() * (2.0 / a.clone() + 2.0)).sqrt(),
        f_mult: if nu0 > 0.0 {
            (r(1.0) / (a.clone() * nu0)).sqrt()
        } else {
            r(0.0)
        },
        h_mult: 2.0 * (2.0 + two_pow(-1.0 / nn) * a.clone()).sqrt() / a * nm.k_trace,
    }
}

pub struct Contraction {
    pub t: R,
    pub kappa: R,
    pub q: R,
    pub el2: R,
    pub necas: R,
}

pub fn contraction(ed: &EllipticityData, mp: f64, p: f64) -> Contraction {
    let (a, ah, b, mp) = (r(ed.a_lo), r(ed.a_hi), r(ed.b_lo), r(mp));
    let kap = (ah.clone() * ah.clone() - a.clone() * a.clone())
        .sqrt()
        .max((ah.clone() - a.clone() * b.clone() / ah.clone()).abs());
    let ratio = a.clone() / ah.clone();
    let q = mp.clone()
        * (1.0 - ratio.clone() * ratio)
            .sqrt()
            .max((1.0 - a.clone() * b / (ah.clone() * ah.clone())).abs());
    Contraction {
        t: a.clone() / (ah.clone() * ah.clone()),
        el2: mp.clone() * a / (ah - kap.clone() * mp),
        kappa: kap,
        q,
        necas: two_pow(0.5 - 1.0 / r(p)),
    }
}

pub fn sobolev_term(p: f64, nu0: f64, s: f64, f: f64) -> (R, R, R) {
    let (pr, nu) = (r(p), r(nu0));
    let g = (1.0 + (pr.clone() - 1.0).pow(pr.clone())) / (pr.clone() * nu.clone())
        * r(s).pow(pr.clone())
        * r(f).pow(pr.clone());
    let w = nu.pow(1.0 / pr.clone()) / 2.0;
    let mut growth = (pr.clone() - 1.0) * nu.pow(1.0 / (pr.clone() - 1.0)) / pr.clone();
    if p > 2.0 {
        growth = growth + (pr.clone() - 2.0) * nu.pow(1.0 / (pr.clone() - 2.0)) / (2.0 * pr);
    }
    (g, w, growth)
}

// ------------------------------------------------------------- comparison

pub struct Check {
    pub name: &'static str,
    pub samples: usize,
    pub max_rel: f64,
    pub elapsed: std::time::Duration,
}

struct Tally {
    name: &'static str,
    samples: usize,
    max_rel: f64,
    start: std::time::Instant,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            max_rel: 0.0,
            start: std::time::Instant::now(),
        }
    }

    fn cmp(&mut self, got: f64, want: &R, what: &str) {
        let w = want.to_f64();
        assert!(got.is_finite(), "{}: {what} not finite ({got})", self.name);
        let err = if w == 0.0 { got.abs() } else { ((got - w) / w).abs() };
        if err > self.max_rel {
            self.max_rel = err;
        }
        if err > 1e-10 {
            eprintln!("{}: {what} library {got:e} vs oracle {w:e} (rel {err:e})", self.name);
        }
    }

    fn done(self) -> Check {
        Check {
            name: self.name,
            samples: self.samples,
            max_rel: self.max_rel,
            elapsed: self.start.elapsed(),
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn ellipticity(rng: &mut ChaCha8Rng) -> EllipticityData {
    let a_lo = rng.gen_range(0.2..2.0);
    let b_lo = rng.gen_range(0.1..2.0);
    EllipticityData::new(
        a_lo,
        a_lo * rng.gen_range(1.0..3.0),
        b_lo,
        b_lo * rng.gen_range(1.0..2.0),
        rng.gen_range(2.0..6.0),
    )
    .expect("valid ellipticity")
}

fn free(rng: &mut ChaCha8Rng) -> FreeParameters {
    FreeParameters {
        nu0: log_uniform(rng, 1e-3, 10.0),
        nu1: rng.gen_range(0.01..0.45),
        nu2: rng.gen_range(0.01..0.45),
        eps: 0.0,
        delta: rng.gen_range(0.1..2.0),
        beta: rng.gen_range(0.1..0.9),
        cover_n: rng.gen_range(1..20),
        cover_r: rng.gen_range(0.05..1.0),
        cn: rng.gen_range(1.0..5.0),
    }
}

fn norms(rng: &mut ChaCha8Rng) -> DataNorms {
    DataNorms {
        u0_p: log_uniform(rng, 1e-2, 10.0),
        f_p: log_uniform(rng, 1e-2, 10.0),
        fvec_p: log_uniform(rng, 1e-2, 10.0),
        h_mixed: log_uniform(rng, 1e-2, 10.0),
        h_p: log_uniform(rng, 1e-2, 10.0),
        omega_vol: rng.gen_range(0.1..5.0),
        k_trace: rng.gen_range(0.5..3.0),
        s_dual: rng.gen_range(0.0..2.0),
    }
}

fn variant(rng: &mut ChaCha8Rng) -> EnergyVariant {
    if rng.gen_bool(0.5) {
        EnergyVariant::Standard
    } else {
        EnergyVariant::BZero
    }
}

fn kind(rng: &mut ChaCha8Rng) -> CubeKind {
    if rng.gen_bool(0.5) {
        CubeKind::Interior
    } else {
        CubeKind::Boundary
    }
}

fn exponents(rng: &mut ChaCha8Rng) -> GehringExponents {
    let n = rng.gen_range(2..4u32);
    let nf = f64::from(n);
    let m1: f64 = rng.gen_range(1.0..3.0);
    let m2: f64 = m1 + rng.gen_range(0.0..2.0);
    let r_exp = m2.max((nf + 2.0) / (nf / m1 + 2.0 / m2)) * rng.gen_range(1.0..1.5);
    let l1: f64 = rng.gen_range(1.0..3.0);
    let l2: f64 = l1 + rng.gen_range(0.0..2.0);
    let s = l2.max((nf + 1.0) / ((nf - 1.0) / l1 + 2.0 / l2)) * rng.gen_range(1.0..1.5);
    GehringExponents {
        p: rng.gen_range(1.05..4.0),
        m1,
        m2,
        r: r_exp,
        l1,
        l2,
        s,
        d: (nf + 2.0) / nf * rng.gen_range(1.0..2.0),
        n,
    }
}

const UPSILON_VARIANTS: [UpsilonVariant; 4] = [
    UpsilonVariant::General,
    UpsilonVariant::NoPhi,
    UpsilonVariant::Interior,
    UpsilonVariant::InteriorNoPhi,
];

type Section = fn(&mut ChaCha8Rng, usize) -> Check;

/// Compares every closed-form operation on `samples` random inputs each.
/// Each section draws from its own stream derived from `seed`.
pub fn run(seed: u64, samples: usize) -> Vec<Check> {
    let sections: Vec<Section> = vec![
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("gamma_half_integer");
            for _ in 0..samples {
                let twice = rng.gen_range(1..61u32);
                t.cmp(gamma_half_integer(twice).unwrap(), &gamma(twice), "value");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("poincare_sobolev_constant");
            for _ in 0..samples {
                let n = rng.gen_range(2..31u32);
                t.cmp(poincare_sobolev_constant(n).unwrap(), &poincare(n), "value");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("growth_exponent");
            for _ in 0..samples {
                let (p, nu0, v) = (rng.gen_range(2.0..6.0), log_uniform(rng, 1e-4, 10.0), variant(rng));
                t.cmp(growth_exponent(p, nu0, v), &kappa(p, nu0, v), "kappa");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("energy_functional");
            for _ in 0..samples {
                let (p, n, ed, nu0, dn, v) = (
                    rng.gen_range(2.0..6.0),
                    rng.gen_range(2..4u32),
                    ellipticity(rng),
                    log_uniform(rng, 1e-3, 10.0),
                    norms(rng),
                    variant(rng),
                );
                let got = energy_functional(p, n, &ed, nu0, &dn, v).unwrap();
                t.cmp(got, &g_functional(p, n, &ed, nu0, &dn, v), "G");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("energy_bound");
            for _ in 0..samples {
                let (g, k, tf) = (log_uniform(rng, 1e-2, 1e3), rng.gen_range(0.0..10.0), rng.gen_range(0.01..2.0));
                t.cmp(energy_bound(g, k, tf), &e_of(r(g), r(k), tf), "E");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("theorem_main_bounds");
            let mut with_m = 0;
            for i in 0..samples {
                let n = rng.gen_range(2..4u32);
                let ed = ellipticity(rng);
                let fp = free(rng);
                let v = variant(rng);
                let (np, n2) = (norms(rng), norms(rng));
                let tf = rng.gen_range(0.05..2.0);
                // Half the draws put p − 2 inside the admissible gain so ℳ exists.
                let p = if i % 2 == 0 {
                    2.0 + rng.gen_range(0.0..0.5) * m_gain_cap(&ed, &fp, n)
                } else {
                    rng.gen_range(2.0..5.0)
                };
                let s = EnergySetting { p, n, t_final: tf, variant: v };
                let got = theorem_main_bounds(&s, &ed, &fp, &np, &n2).unwrap();
                let want = main_bounds(&s, &ed, &fp, &np, &n2);
                t.cmp(got.g, &want.g, "G");
                t.cmp(got.e, &want.e, "E");
                t.cmp(got.kappa, &want.kappa, "kappa");
                t.cmp(got.upsilon, &want.upsilon, "upsilon");
                t.cmp(got.eps_cap, &want.cap, "eps_cap");
                match (got.m, &want.m) {
                    (Some(m), Some(w)) => {
                        t.cmp(m, w, "M");
                        with_m += 1;
                    }
                    (None, None) => {}
                    (g, w) => panic!("M availability differs: library {g:?}, oracle {:?}", w.as_ref().map(R::to_f64)),
                }
                t.samples += 1;
            }
            assert!(with_m >= samples / 2, "only {with_m} draws produced M");
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("optimize_nu0");
            for _ in 0..samples {
                let s = EnergySetting {
                    p: rng.gen_range(2.0..5.0),
                    n: 2,
                    t_final: rng.gen_range(0.1..2.0),
                    variant: variant(rng),
                };
                let (ed, dn) = (ellipticity(rng), norms(rng));
                let (nu, val) = optimize_nu0(&s, &ed, &dn).unwrap();
                let want = g_functional(s.p, s.n, &ed, nu, &dn, s.variant) * (kappa(s.p, nu, s.variant) * s.t_final).exp();
                t.cmp(val, &want, "objective");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("caccioppoli");
            for _ in 0..samples {
                let ed = ellipticity(rng);
                let fp = free(rng);
                let rb = rng.gen_range(0.01..1.4);
                let rs = rb * rng.gen_range(0.05..0.95);
                let k = rng.gen_range(0.5..3.0);
                let nm = CaccioppoliNorms {
                    eta_u_minus_u: log_uniform(rng, 1e-3, 10.0),
                    f: log_uniform(rng, 1e-3, 10.0),
                    fvec: log_uniform(rng, 1e-3, 10.0),
                    h: log_uniform(rng, 1e-3, 10.0),
                };
                t.cmp(caccioppoli_lhs_factor(&ed, &fp).unwrap(), &cacc_lhs(&ed, &fp), "lhs factor");
                t.cmp(caccioppoli_rhs(&ed, &fp, rb, rs, k, &nm).unwrap(), &cacc_rhs(&ed, &fp, rb, rs, k, &nm), "rhs");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("gehring_b");
            for _ in 0..samples {
                let (ed, nu0, n, kd) = (ellipticity(rng), log_uniform(rng, 1e-3, 10.0), rng.gen_range(2..6u32), kind(rng));
                t.cmp(gehring_b(&ed, nu0, n, kd).unwrap(), &b_const(&ed, nu0, n, kd), "B");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("gehring_upsilon");
            for i in 0..samples {
                let ge = exponents(rng);
                let b = log_uniform(rng, 1e-2, 1e4);
                let v = UPSILON_VARIANTS[i % 4];
                t.cmp(gehring_upsilon(b, &ge, v).unwrap(), &upsilon(b, &ge, v), "upsilon");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("epsilon_admissible");
            for _ in 0..samples {
                let (delta, p, ups, n) = (
                    log_uniform(rng, 1e-4, 10.0),
                    rng.gen_range(1.01..5.0),
                    log_uniform(rng, 1.001, 1e6),
                    rng.gen_range(2..6u32),
                );
                t.cmp(epsilon_admissible(delta, p, ups).unwrap().sup, &eps_cap(delta, p, ups), "sup");
                t.cmp(gradient_epsilon_admissible(delta, n, ups).unwrap().sup, &gradient_eps_cap(delta, n, ups), "gradient sup");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("covering_constant");
            for _ in 0..samples {
                let (n, fp, ups) = (rng.gen_range(2..4u32), free(rng), log_uniform(rng, 1.5, 1e6));
                let eps = rng.gen_range(0.0..0.9) * 4.0 / ((f64::from(n) + 2.0) * (ups - 1.0));
                t.cmp(covering_constant(n, &fp, eps, ups).unwrap(), &cover_c(n, &fp, eps, ups), "C(n)");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("higher_integrability_rhs");
            for _ in 0..samples {
                let (n, ed, fp, kd) = (rng.gen_range(2..4u32), ellipticity(rng), free(rng), kind(rng));
                let ups = log_uniform(rng, 2.0, 1e6);
                let cap = fp.delta.min(4.0 / ((f64::from(n) + 2.0) * (ups - 1.0)));
                let eps = rng.gen_range(0.0..0.9) * cap;
                let rb = rng.gen_range(0.01..0.99) / (4.0 * poincare(n).to_f64());
                let k = rng.gen_range(0.5..3.0);
                let nm = LocalGradientNorms {
                    grad_u: log_uniform(rng, 1e-3, 10.0),
                    fvec: log_uniform(rng, 1e-3, 10.0),
                    f: log_uniform(rng, 1e-3, 10.0),
                    h: log_uniform(rng, 1e-3, 10.0),
                };
                let got = higher_integrability_rhs(kd, &ed, &fp, rb, eps, n, ups, &nm, k).unwrap();
                t.cmp(got, &hi_rhs(kd, &ed, &fp, rb, eps, n, ups, &nm, k), "rhs");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("interior_radius_cap");
            for _ in 0..samples {
                let (n, tf, reach) = (rng.gen_range(2..6u32), rng.gen_range(1e-3..4.0), rng.gen_range(1e-3..2.0));
                t.cmp(interior_radius_cap(n, tf, reach).unwrap(), &radius_cap(n, tf, reach), "cap");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("marcinkiewicz_constant");
            for _ in 0..samples {
                let q = rng.gen_range(1.0..3.0);
                let p = q + rng.gen_range(0.05..3.0);
                let rr = p + rng.gen_range(0.05..5.0);
                let (t1, t2) = (log_uniform(rng, 1e-2, 1e2), log_uniform(rng, 1e-2, 1e2));
                let got = marcinkiewicz_constant(p, q, rr, t1, t2).unwrap();
                let (c, alpha) = marcinkiewicz(p, q, rr, t1, t2);
                t.cmp(got.constant, &c, "constant");
                t.cmp(got.alpha, &alpha, "alpha");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("steady_state_bounds");
            for _ in 0..samples {
                let (n, ed, fp) = (rng.gen_range(2..4u32), ellipticity(rng), free(rng));
                let cover = SteadyCover {
                    n_cover: rng.gen_range(1..20),
                    r_lo: rng.gen_range(0.05..1.0),
                };
                let nm = SteadyNorms {
                    grad_u_2: log_uniform(rng, 1e-3, 10.0),
                    f_norm: log_uniform(rng, 1e-3, 10.0),
                    h_norm: log_uniform(rng, 1e-3, 10.0),
                    k_trace: rng.gen_range(0.5..3.0),
                };
                let probe = steady(&ed, fp.nu0, n, &cover, 0.0, &nm).upsilon.to_f64();
                let nf = f64::from(n);
                let eps = rng.gen_range(0.01..0.9) * (1.0 / (probe - 1.0)).min(4.0 / ((nf + 2.0) * (probe - 1.0)));
                let got = steady_state_bounds(&ed, &fp, n, &cover, eps, &nm).unwrap();
                let want = steady(&ed, fp.nu0, n, &cover, eps, &nm);
                t.cmp(got.upsilon_s, &want.upsilon, "upsilon_s");
                t.cmp(got.rhs_cotam1, &want.rhs, "rhs");
                t.cmp(got.f_mult.fvec, &want.fvec_mult, "flux multiplier");
                t.cmp(got.f_mult.f, &want.f_mult, "source multiplier");
                t.cmp(got.h_mult, &want.h_mult, "boundary multiplier");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("contraction_data");
            for _ in 0..samples {
                let ah = rng.gen_range(0.5..3.0);
                let a = ah * rng.gen_range(0.5..1.0);
                let b = rng.gen_range(0.1..2.0);
                let ed = EllipticityData::new(a, ah, b, b * rng.gen_range(1.0..2.0), 2.0).unwrap();
                let kap = contraction_kappa(&ed);
                // Feasible M_p: a^#/M_p > ϰ.
                let mp = if kap > 0.0 {
                    ah / kap * rng.gen_range(0.05..0.95)
                } else {
                    rng.gen_range(0.5..3.0)
                };
                let p = rng.gen_range(2.0..5.0);
                let got = contraction_data(&ed, mp, p, 2).unwrap();
                let want = contraction(&ed, mp, p);
                t.cmp(kap, &want.kappa, "kappa");
                t.cmp(got.kappa_c, &want.kappa, "kappa_c");
                t.cmp(got.t, &want.t, "t");
                t.cmp(got.q_factor, &want.q, "q");
                t.cmp(got.el2_mult, &want.el2, "el2");
                t.cmp(got.necas_c.expect("n = 2"), &want.necas, "necas");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("linear_w1p");
            for _ in 0..samples {
                let fp = free(rng);
                let geo = norms(rng);
                let unit_ed = EllipticityData::unit();
                let tf = rng.gen_range(0.05..2.0);
                let p = 2.0 + rng.gen_range(0.0..0.5) * m_gain_cap(&unit_ed, &fp, 2);
                let s = EnergySetting::new(p, 2, tf);
                let unit = geo.unit_data();
                let mb = main_bounds(&s, &unit_ed, &fp, &unit, &unit);
                let lambda = mb.m.expect("admissible") + mb.e;
                let lam = lambda.to_f64();
                let a = 1.0 - rng.gen_range(0.0..0.5) / lam;
                let b = 1.0 - rng.gen_range(0.0..0.5) / lam;
                let ed = EllipticityData::new(a, 1.0, b, 1.0, 2.0).unwrap();
                let rhs = LinearRhs {
                    fvec: rng.gen_range(0.0..5.0),
                    f: rng.gen_range(0.0..5.0),
                    h: rng.gen_range(0.0..5.0),
                };
                let got = linear_w1p(&s, &ed, &fp, &geo, &rhs).unwrap();
                let sum = r(rhs.fvec) + rhs.f + rhs.h;
                t.cmp(got.lambda_p, &lambda, "Lambda_p");
                t.cmp(
                    got.grad_bound,
                    &(lambda.clone() * sum.clone() / (1.0 - lambda.clone() * (1.0 - r(a)))),
                    "grad bound",
                );
                t.cmp(got.trace_bound, &(lambda.clone() * sum / (1.0 - lambda * (1.0 - r(b)))), "trace bound");
                t.samples += 1;
            }
            t.done()
        },
        |rng: &mut ChaCha8Rng, samples: usize| -> Check {
            let mut t = Tally::new("sobolev_f_term");
            for i in 0..samples {
                let p = if i % 10 == 0 { 2.0 } else { rng.gen_range(2.05..5.0) };
                let (nu0, s, f) = (log_uniform(rng, 1e-2, 2.0), rng.gen_range(0.01..2.0), log_uniform(rng, 1e-2, 10.0));
                let got = sobolev_f_term(p, nu0, s, f).unwrap();
                let (g, w, growth) = sobolev_term(p, nu0, s, f);
                t.cmp(got.g_term, &g, "g_term");
                t.cmp(got.grad_weight, &w, "grad weight");
                t.cmp(got.growth, &growth, "growth");
                t.samples += 1;
            }
            t.done()
        },
    ];
    sections
        .into_iter()
        .enumerate()
        .map(|(i, section)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            section(&mut rng, samples)
        })
        .collect()
}
