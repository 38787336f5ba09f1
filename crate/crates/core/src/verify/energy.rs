use serde::{Deserialize, Serialize};

use super::{data_norms, variant_data_norms, weighted_gradient_slice, CoverSpec, EstimateReport};
use crate::error::{Error, Result};
use crate::estimates::{
    energy_bound, energy_functional, gehring_b, gehring_upsilon, gradient_epsilon_admissible,
    growth_exponent, theorem_main_bounds, CubeKind, EnergySetting, EnergyVariant,
    FreeParameters, GehringExponents, UpsilonVariant,
};
use crate::meshfields::{
    ess_sup_lp, lp_norm_rule, q1_gradient_lp, time_weights, GridFunction, Region, TimeRule,
};
use crate::parabolic::ProblemInstance;

/// Settings shared by the global checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub p: f64,
    pub tol: f64,
    /// Trace constant used in the bounds.
    pub k_trace: f64,
    /// Time quadrature for space-time integrals of `u` and of the data.
    pub rule: TimeRule,
}

impl EnergyCheck {
    pub fn new(p: f64, k_trace: f64) -> Self {
        Self {
            p,
            tol: 0.02,
            k_trace,
            rule: TimeRule::RightEndpoint,
        }
    }
}

fn check_solution(inst: &ProblemInstance, u: &GridFunction) -> Result<()> {
    inst.validate()?;
    if !u.is_time_dependent() || u.grid() != &inst.grid {
        return Err(Error::shape("u must be a space-time function on the instance grid"));
    }
    Ok(())
}

/// The sup-in-time bound, the dissipation bound and the bound on the
/// boundary integral of `|u|^{ℓ+p−2}`. With `b_# = 0` the alternative energy
/// functional is used and the boundary bound is skipped.
pub fn verify_energy(
    inst: &ProblemInstance,
    u: &GridFunction,
    fp: &FreeParameters,
    check: &EnergyCheck,
) -> Result<Vec<EstimateReport>> {
    check_solution(inst, u)?;
    let p = check.p;
    let ed = inst.ellipticity()?;
    let t_final = inst.grid.t_final;
    let variant = if ed.b_lo > 0.0 {
        EnergyVariant::Standard
    } else {
        EnergyVariant::BZero
    };
    let norms = variant_data_norms(inst, p, check.k_trace, check.rule, variant)?;
    let g = energy_functional(p, 2, &ed, fp.nu0, &norms, variant)?;
    let kappa = growth_exponent(p, fp.nu0, variant);
    let e = energy_bound(g, kappa, t_final);

    let sup = ess_sup_lp(u, p)?.powf(p);
    let tw = time_weights(&inst.grid, check.rule);
    let grad: f64 = (0..u.n_levels())
        .filter(|&k| tw[k] != 0.0)
        .map(|k| tw[k] * weighted_gradient_slice(&inst.grid, u.slice(k), p))
        .sum();
    let q = ed.ell + p - 2.0;
    let trace = if inst.grid.gamma.is_empty() {
        0.0
    } else {
        lp_norm_rule(u, q, Region::GammaTrace, None, check.rule)?.powf(q)
    };
    let tag = |r: EstimateReport| {
        r.param("p", p)
            .param("ell", ed.ell)
            .param("nu0", fp.nu0)
            .param("variant", if variant == EnergyVariant::Standard { "standard" } else { "b_zero" })
    };
    let mut out = vec![
        tag(EstimateReport::new("energy.sup_norm", sup, g * (kappa * t_final).exp(), check.tol)),
        tag(EstimateReport::new(
            "energy.dissipation",
            ed.a_lo * grad + ed.b_lo * trace,
            e,
            check.tol,
        )),
    ];
    if variant == EnergyVariant::Standard {
        out.push(tag(EstimateReport::new("energy.boundary_trace", trace, e / ed.b_lo, check.tol)));
    }
    Ok(out)
}

/// Upper end of the admissible `ε` range for the global gradient bound.
pub fn gradient_eps_cap(inst: &ProblemInstance, fp: &FreeParameters) -> Result<f64> {
    let ed = inst.ellipticity()?;
    let b = gehring_b(&ed, fp.nu0, 2, CubeKind::Boundary)?;
    let ups = gehring_upsilon(b, &GehringExponents::gradient_reverse_holder(2), UpsilonVariant::NoPhi)?;
    Ok(gradient_epsilon_admissible(fp.delta, 2, ups)?.sup)
}

/// `‖∇u‖_{p,Q_T} ≤ ℳ`, with the covering parameters taken from `cover`.
/// Passing requires margin ≤ 1 (no tolerance).
pub fn verify_gradient_bound(
    inst: &ProblemInstance,
    u: &GridFunction,
    fp: &FreeParameters,
    cover: &CoverSpec,
    check: &EnergyCheck,
) -> Result<EstimateReport> {
    check_solution(inst, u)?;
    let ed = inst.ellipticity()?;
    if ed.b_lo <= 0.0 {
        return Err(Error::param("the gradient bound is checked with b_lo > 0 only"));
    }
    let cubes = cover.cubes(&inst.grid)?;
    let fp = FreeParameters {
        cover_n: cover.n_overlap,
        cover_r: cover.radius,
        beta: cover.beta,
        ..*fp
    };
    let p = check.p;
    let norms_p = data_norms(inst, p, check.k_trace, check.rule)?;
    let norms_2 = data_norms(inst, 2.0, check.k_trace, check.rule)?;
    let setting = EnergySetting::new(p, 2, inst.grid.t_final);
    let mb = theorem_main_bounds(&setting, &ed, &fp, &norms_p, &norms_2)?;
    let m = mb.m.ok_or_else(|| {
        Error::infeasible(format!(
            "eps = {} lies outside the admissible range (cap {})",
            p - 2.0,
            mb.eps_cap
        ))
    })?;
    let lhs = q1_gradient_lp(u, p, check.rule)?;
    Ok(EstimateReport::new("gradient_bound", lhs, m, 0.0)
        .param("p", p)
        .param("ell", ed.ell)
        .param("upsilon", mb.upsilon)
        .param("cover_radius", cover.radius)
        .param("cover_n", cover.n_overlap)
        .param("cubes", cubes.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::CoefficientField;
    use crate::meshfields::SpaceTimeGrid;
    use crate::parabolic::{solve, BoundaryLaw, SolverOptions};

    fn exp_instance(n: usize, nt: usize) -> ProblemInstance {
        let g = SpaceTimeGrid::unit_square(n, 1.0, nt).unwrap();
        let mut inst = ProblemInstance::homogeneous(g, CoefficientField::identity(&g), BoundaryLaw::constant(&g, 2.0, 1.0));
        inst.u0 = GridFunction::space_from_fn(g, |_, _| 1.0).unwrap();
        inst.f = GridFunction::space_time_from_fn(g, |_, _, t| -(-t).exp()).unwrap();
        inst.h = GridFunction::space_time_from_fn(g, |_, _, t| (-t).exp()).unwrap();
        inst
    }

    #[test]
    fn zero_instance_has_zero_margins() {
        let g = SpaceTimeGrid::unit_square(4, 0.5, 4).unwrap();
        let inst = ProblemInstance::homogeneous(g, CoefficientField::identity(&g), BoundaryLaw::constant(&g, 3.0, 1.0));
        let u = solve(&inst, &SolverOptions::default()).unwrap();
        let fp = FreeParameters::defaults(2).with_data_support(false, false, false);
        let reps = verify_energy(&inst, &u, &fp, &EnergyCheck::new(2.0, 2.0)).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().all(|r| r.pass && r.margin == 0.0));
        let cover = CoverSpec::new(0.25, 5, 0.5).unwrap();
        let r = verify_gradient_bound(&inst, &u, &fp, &cover, &EnergyCheck::new(2.0, 2.0)).unwrap();
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn exponential_instance_passes() {
        let inst = exp_instance(4, 32);
        let u = solve(&inst, &SolverOptions::default()).unwrap();
        let fp = FreeParameters::defaults(2).with_data_support(true, false, true);
        for p in [2.0, 3.0] {
            for r in verify_energy(&inst, &u, &fp, &EnergyCheck::new(p, 2.0)).unwrap() {
                assert!(r.pass && r.margin > 0.0 && r.margin <= 1.0, "{r:?}");
            }
        }
        let cap = gradient_eps_cap(&inst, &fp).unwrap();
        let eps = (0.01f64).min(cap / 2.0);
        let cover = CoverSpec::new(0.25, 5, 0.5).unwrap();
        let r = verify_gradient_bound(&inst, &u, &fp, &cover, &EnergyCheck::new(2.0 + eps, 2.0)).unwrap();
        assert!(r.pass && r.margin < 1.0);
    }

    #[test]
    fn too_large_eps_is_infeasible() {
        let inst = exp_instance(4, 4);
        let u = solve(&inst, &SolverOptions::default()).unwrap();
        let fp = FreeParameters::defaults(2).with_data_support(true, false, true);
        let cover = CoverSpec::new(0.25, 5, 0.5).unwrap();
        let r = verify_gradient_bound(&inst, &u, &fp, &cover, &EnergyCheck::new(2.5, 2.0));
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
