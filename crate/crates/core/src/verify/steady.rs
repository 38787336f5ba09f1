use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EstimateReport;
use crate::elliptic::{solve_contraction, solve_monotone, RobinOperator, SteadyInstance};
use crate::error::{Error, Result};
use crate::estimates::{contraction_data, steady_state_bounds, FreeParameters, SteadyCover, SteadyNorms};
use crate::fem::{assemble_stiffness, CoefficientField};
use crate::meshfields::{lp_norm, q1_gradient_lp, GridFunction, Region, SmoothField, SpaceTimeGrid, TimeRule};
use crate::parabolic::SolverOptions;

/// Settings of the steady checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyCheck {
    /// Exponent of the `W^{1,p}` + trace bound.
    pub p: f64,
    /// Estimated norm of the inverse Robin-Laplacian at exponent `p`.
    pub mp: f64,
    /// Dual Sobolev constant for the source term; 0 when unknown, in which
    /// case the bound is informational for nonzero sources.
    pub s_dual: f64,
    pub k_trace: f64,
    pub cover: SteadyCover,
    pub tol: f64,
    pub max_iter: usize,
    pub opts: SolverOptions,
}

impl SteadyCheck {
    pub fn new(mp: f64, k_trace: f64) -> Self {
        Self {
            p: 2.0,
            mp,
            s_dual: 0.0,
            k_trace,
            cover: SteadyCover { n_cover: 5, r_lo: 0.25 },
            tol: 0.02,
            max_iter: 2000,
            opts: SolverOptions::default(),
        }
    }
}

fn space_norm(grid: &SpaceTimeGrid, v: Vec<f64>, p: f64, region: Region) -> Result<f64> {
    lp_norm(&GridFunction::space(*grid, v)?, p, region, None)
}

/// The steady higher-integrability bound and, for `ℓ = 2`, the
/// `W^{1,p}` + trace bound and the observed contraction rate.
///
/// An infeasible contraction yields informational reports with an infinite
/// right-hand side instead of an error.
pub fn verify_steady(inst: &SteadyInstance, fp: &FreeParameters, check: &SteadyCheck) -> Result<Vec<EstimateReport>> {
    inst.validate()?;
    let g = inst.grid;
    let ed = inst.ellipticity()?;
    let u = solve_monotone(inst, &check.opts)?;

    // First pass for υ and the multipliers, second with the actual norms.
    let probe = SteadyNorms {
        k_trace: check.k_trace,
        ..SteadyNorms::default()
    };
    let ups = steady_state_bounds(&ed, fp, 2, &check.cover, 1e-12, &probe)?.upsilon_s;
    let eps = 1.0 / (2.0 * (ups - 1.0));
    let sb = steady_state_bounds(&ed, fp, 2, &check.cover, eps, &probe)?;
    let q = 2.0 + eps;
    let fvec: Vec<f64> = inst
        .fvec_x
        .values()
        .iter()
        .zip(inst.fvec_y.values())
        .map(|(a, b)| a.hypot(*b))
        .collect();
    let big_f: Vec<f64> = fvec
        .iter()
        .zip(inst.f.values())
        .map(|(v, f)| (sb.f_mult.fvec * v).hypot(sb.f_mult.f * f))
        .collect();
    let big_h: Vec<f64> = inst.h.values().iter().map(|h| sb.h_mult * h.abs()).collect();
    let norms = SteadyNorms {
        grad_u_2: q1_gradient_lp(&u, 2.0, TimeRule::Trapezoid)?,
        f_norm: space_norm(&g, big_f, q, Region::Interior)?,
        h_norm: space_norm(&g, big_h, q, Region::GammaTrace)?,
        k_trace: check.k_trace,
    };
    let sb = steady_state_bounds(&ed, fp, 2, &check.cover, eps, &norms)?;
    let lhs = q1_gradient_lp(&u, q, TimeRule::Trapezoid)?.powf(q);
    let mut out = vec![EstimateReport::new("steady.higher_integrability", lhs, sb.rhs_cotam1, check.tol)
        .param("eps", eps)
        .param("upsilon", ups)
        .param("ell", ed.ell)];
    if ed.ell != 2.0 {
        return Ok(out);
    }

    let cd = match contraction_data(&ed, check.mp, check.p, 2) {
        Ok(cd) => cd,
        Err(Error::Infeasible(msg)) => {
            for name in ["steady.w1p_bound", "steady.contraction_rate"] {
                out.push(
                    EstimateReport::new(name, 0.0, f64::INFINITY, check.tol)
                        .informational()
                        .param("feasible", false)
                        .param("reason", msg.replace([',', ';', '='], " ")),
                );
            }
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let robin = RobinOperator::new(&g)?;
    let p = check.p;
    let f_exp = 2.0 * p / (p + 2.0);
    let f_norm = lp_norm(&inst.f, f_exp, Region::Interior, None)?;
    let data = space_norm(&g, fvec, p, Region::Interior)?
        + check.s_dual * f_norm
        + lp_norm(&inst.h, 2.0, Region::GammaTrace, None)?;
    let mut el2 = EstimateReport::new("steady.w1p_bound", robin.norm(u.values(), p), cd.el2_mult * data, check.tol)
        .param("p", p)
        .param("mp", check.mp)
        .param("mult", cd.el2_mult);
    if f_norm > 0.0 && check.s_dual == 0.0 {
        el2 = el2.informational().param("source_constant", "unknown");
    }
    out.push(el2);

    let (v, trace) = solve_contraction(inst, &ed, check.mp, &check.opts, check.max_iter)?;
    let diff: Vec<f64> = v.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
    out.push(
        EstimateReport::new("steady.contraction_rate", trace.tail_ratio().unwrap_or(0.0), cd.q_factor + 0.05, 0.0)
            .param("q", cd.q_factor)
            .param("iterations", trace.iterations())
            .param("distance_to_monotone", robin.norm(&diff, 2.0)),
    );
    Ok(out)
}

/// `‖(−Δ^R)⁻¹(−Δ^R − L)u‖ ≤ M_p((1−a)‖∇u‖₂ + (1−b)‖u‖_{2,Γ})` for random
/// `A` with eigenvalues in `[a, 1]`, `β ∈ [b, 1]` and smooth `u`, at `p = 2`.
/// Informational: `mp` is an estimate.
pub fn perturbation_check(
    grid: &SpaceTimeGrid,
    a: f64,
    b: f64,
    mp: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    if !(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0) {
        return Err(Error::param(format!("need a, b in (0, 1], got a={a}, b={b}")));
    }
    let robin = RobinOperator::new(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (l1, l2, th) = (rng.gen_range(a..=1.0), rng.gen_range(a..=1.0), rng.gen_range(0.0..std::f64::consts::PI));
        let (c, s) = (th.cos(), th.sin());
        let coef = CoefficientField::constant(grid, [l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c])?;
        let beta = rng.gen_range(b..=1.0);
        let u = SmoothField::random(&mut rng, 4).sample(grid);
        let ka = assemble_stiffness(grid, &coef)?;
        let mut rhs = robin.matrix.mul(&u);
        for ((r, k), (w, ui)) in rhs.iter_mut().zip(ka.mul(&u)).zip(robin.gamma_w.iter().zip(&u)) {
            *r -= k + w * beta * ui;
        }
        let mut x = vec![0.0; u.len()];
        robin.solve(&rhs, &mut x, 1e-12)?;
        let grad = robin.laplace.form(&u, &u).max(0.0).sqrt();
        let bound = mp * ((1.0 - a) * grad + (1.0 - b) * robin.trace_l2(&u));
        out.push(
            EstimateReport::new("steady.perturbation", robin.norm(&x, 2.0), bound, 0.02)
                .informational()
                .param("a", a)
                .param("b", b)
                .param("mp", mp),
        );
    }
    Ok(out)
}
