use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::gradient_eps_cap;
use super::{
    data_support, gehring_spot_check, perturbation_check, trace_constant_estimate,
    verify_caccioppoli, verify_energy, verify_gradient_bound, verify_poincare, verify_steady,
    verify_stieltjes, CoverSpec, CubeChoice, EnergyCheck, EstimateReport, SteadyCheck,
};
use crate::elliptic::{estimate_mp, SteadyInstance};
use crate::error::Result;
use crate::estimates::FreeParameters;
use crate::fem::CoefficientField;
use crate::meshfields::{Edge, EdgeSet, GridFunction, SmoothField, SpaceTimeGrid};
use crate::parabolic::{solve, BoundaryLaw, ProblemInstance, SolverOptions};

/// Knobs for drawing random instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeOptions {
    /// Cosine modes per axis of each random field.
    pub modes: usize,
    pub ells: Vec<f64>,
    pub t_final: f64,
    /// Amplitude of the data fields.
    pub data_scale: f64,
}

impl Default for RecipeOptions {
    fn default() -> Self {
        Self {
            modes: 3,
            ells: vec![2.0, 3.0, 5.0],
            t_final: 0.5,
            data_scale: 1.0,
        }
    }
}

/// Resolution-independent description of a random smooth instance on the
/// unit square. `build` samples it on any grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecipe {
    pub t_final: f64,
    pub ell: f64,
    pub gamma: EdgeSet,
    pub u0: SmoothField,
    pub f: SmoothField,
    pub fvec: [SmoothField; 2],
    pub h: SmoothField,
    /// Eigenvalue and angle fields of `A`.
    pub coef: [SmoothField; 3],
    pub beta: SmoothField,
    /// Eigenvalues are `centre ± spread·sin(·)`.
    pub eig_range: (f64, f64),
    pub beta_range: (f64, f64),
}

fn random_gamma(rng: &mut ChaCha8Rng) -> EdgeSet {
    loop {
        let mut s = EdgeSet::empty();
        for e in Edge::ALL {
            if rng.gen_bool(0.6) {
                s = s.with(e);
            }
        }
        if !s.is_empty() {
            return s;
        }
    }
}

impl InstanceRecipe {
    /// `A` with eigenvalues in about `[0.5, 1.5]`, `β ∈ [0.5, 2]`.
    pub fn random(rng: &mut ChaCha8Rng, opts: &RecipeOptions) -> Self {
        let m = opts.modes;
        let mut field = |c: f64| SmoothField::random(rng, m).scaled(c);
        let (u0, f, fx, fy, h) = (
            field(opts.data_scale),
            field(opts.data_scale),
            field(opts.data_scale),
            field(opts.data_scale),
            field(opts.data_scale),
        );
        let coef = [field(1.0), field(1.0), field(1.0)];
        let beta = field(1.0);
        let ell = opts.ells[rng.gen_range(0..opts.ells.len())];
        Self {
            t_final: opts.t_final,
            ell,
            gamma: random_gamma(rng),
            u0,
            f,
            fvec: [fx, fy],
            h,
            coef,
            beta,
            eig_range: (1.0, 0.5),
            beta_range: (1.25, 0.75),
        }
    }

    /// Linear (`ℓ = 2`) steady recipe inside the contraction's feasible
    /// range: eigenvalues of `A` in `[0.95, 1]`, `β ∈ [0.8, 1]`.
    pub fn random_steady(rng: &mut ChaCha8Rng, modes: usize) -> Self {
        let mut r = Self::random(
            rng,
            &RecipeOptions {
                modes,
                ells: vec![2.0],
                t_final: 1.0,
                data_scale: 1.0,
            },
        );
        r.eig_range = (0.975, 0.025);
        r.beta_range = (0.9, 0.1);
        r
    }

    fn coefficient(&self, grid: &SpaceTimeGrid) -> Result<CoefficientField> {
        let (c, s) = self.eig_range;
        CoefficientField::from_fn(grid, |x, y| {
            let l1 = c + s * self.coef[0].at(grid, x, y).sin();
            let l2 = c + s * self.coef[1].at(grid, x, y).sin();
            let th = std::f64::consts::PI * self.coef[2].at(grid, x, y);
            let (co, si) = (th.cos(), th.sin());
            [l1 * co * co + l2 * si * si, (l1 - l2) * co * si, l1 * si * si + l2 * co * co]
        })
    }

    fn law(&self, grid: &SpaceTimeGrid) -> Result<BoundaryLaw> {
        let (c, s) = self.beta_range;
        BoundaryLaw::from_fn(grid, self.ell, |x, y| c + s * self.beta.at(grid, x, y).sin())
    }

    /// Sample on the unit square with `n × n` cells and `nt` steps. Sources
    /// are modulated in time by `1 + sin(2πt/T)/2`.
    pub fn build(&self, n: usize, nt: usize) -> Result<ProblemInstance> {
        let grid = SpaceTimeGrid::new(1.0, 1.0, n, n, self.t_final, nt, self.gamma)?;
        let mut inst = ProblemInstance::homogeneous(grid, self.coefficient(&grid)?, self.law(&grid)?);
        let period = self.t_final;
        let in_time = |s: &SmoothField| {
            GridFunction::space_time_from_fn(grid, |x, y, t| {
                s.at(&grid, x, y) * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * t / period).sin())
            })
        };
        inst.u0 = GridFunction::space(grid, self.u0.sample(&grid))?;
        inst.f = in_time(&self.f)?;
        inst.fvec_x = in_time(&self.fvec[0])?;
        inst.fvec_y = in_time(&self.fvec[1])?;
        inst.h = in_time(&self.h)?;
        Ok(inst)
    }

    pub fn build_steady(&self, n: usize) -> Result<SteadyInstance> {
        let grid = SpaceTimeGrid::new(1.0, 1.0, n, n, 1.0, 1, self.gamma)?;
        let mut inst = SteadyInstance::homogeneous(grid, self.coefficient(&grid)?, self.law(&grid)?);
        let sample = |s: &SmoothField| GridFunction::space(grid, s.sample(&grid));
        inst.f = sample(&self.f)?;
        inst.fvec_x = sample(&self.fvec[0])?;
        inst.fvec_y = sample(&self.fvec[1])?;
        inst.h = sample(&self.h)?;
        Ok(inst)
    }
}

/// Everything a verification campaign runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub seed: u64,
    pub instances: usize,
    pub grid_n: usize,
    pub nt: usize,
    pub recipe: RecipeOptions,
    /// Exponents of the energy checks.
    pub p_values: Vec<f64>,
    pub cubes: CubeChoice,
    /// Grid of the local checks, which need `dt` small against `R²`.
    pub local_grid_n: usize,
    pub local_nt: usize,
    pub local_t_final: f64,
    pub cover_radius: f64,
    pub energy_tol: f64,
    pub local_tol: f64,
    pub stieltjes_trials: usize,
    pub poincare_trials: usize,
    pub gehring_trials: usize,
    pub steady_instances: usize,
    pub steady_grid_n: usize,
    pub solver: SolverOptions,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 4,
            grid_n: 16,
            nt: 16,
            recipe: RecipeOptions::default(),
            p_values: vec![2.0, 3.0],
            cubes: CubeChoice { interior: 5, boundary: 5 },
            local_grid_n: 16,
            local_nt: 128,
            local_t_final: 0.25,
            cover_radius: 0.25,
            energy_tol: 0.02,
            local_tol: 0.05,
            stieltjes_trials: 200,
            poincare_trials: 100,
            gehring_trials: 2,
            steady_instances: 4,
            steady_grid_n: 12,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub reports: Vec<EstimateReport>,
    /// Trace constant used by every bound (a sampled lower estimate).
    pub k_trace: f64,
    pub mp: f64,
}

/// Counts of one report group.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub checked: usize,
    pub passed: usize,
    pub informational: usize,
    pub max_margin: f64,
}

impl CampaignOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.informational || r.pass)
    }

    /// Per-name counts, in first-appearance order.
    pub fn summary(&self) -> Vec<GroupSummary> {
        let mut out: Vec<GroupSummary> = Vec::new();
        for r in &self.reports {
            let i = match out.iter().position(|g| g.name == r.name) {
                Some(i) => i,
                None => {
                    out.push(GroupSummary {
                        name: r.name.clone(),
                        ..GroupSummary::default()
                    });
                    out.len() - 1
                }
            };
            let g = &mut out[i];
            if r.informational {
                g.informational += 1;
            } else {
                g.checked += 1;
                g.passed += usize::from(r.pass);
                g.max_margin = g.max_margin.max(r.margin);
            }
        }
        out
    }
}

/// Seed of the `index`-th task of a campaign.
pub(crate) fn task_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ index
}

/// Checks for one random time-dependent instance.
pub fn instance_reports(
    recipe: &InstanceRecipe,
    cfg: &CampaignConfig,
    k_trace: f64,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    let inst = recipe.build(cfg.grid_n, cfg.nt)?;
    let u = solve(&inst, &cfg.solver)?;
    let (f, fv, h) = data_support(&inst);
    let fp = FreeParameters::defaults(2).with_data_support(f, fv, h);
    let mut out = Vec::new();
    for &p in &cfg.p_values {
        let check = EnergyCheck {
            tol: cfg.energy_tol,
            ..EnergyCheck::new(p, k_trace)
        };
        out.extend(verify_energy(&inst, &u, &fp, &check)?);
    }
    if inst.ellipticity()?.b_lo > 0.0 {
        let eps = 0.01f64.min(gradient_eps_cap(&inst, &fp)? / 2.0);
        let cover = CoverSpec::new(cfg.cover_radius, fp.cover_n, fp.beta)?;
        out.push(verify_gradient_bound(&inst, &u, &fp, &cover, &EnergyCheck::new(2.0 + eps, k_trace))?);
    }
    if cfg.cubes.interior + cfg.cubes.boundary > 0 {
        let local = InstanceRecipe {
            t_final: cfg.local_t_final,
            ..recipe.clone()
        }
        .build(cfg.local_grid_n, cfg.local_nt)?;
        let v = solve(&local, &cfg.solver)?;
        let cubes = cfg.cubes.draw(&local.grid, seed)?;
        out.extend(verify_caccioppoli(&local, &v, &cubes, &fp, k_trace, cfg.local_tol)?);
    }
    Ok(out)
}

/// Runs every check. Instances are processed in parallel and the reports
/// are concatenated in instance order, so the output only depends on `cfg`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutcome> {
    let probe = SpaceTimeGrid::new(1.0, 1.0, cfg.grid_n, cfg.grid_n, 1.0, 1, EdgeSet::all())?;
    let k_trace = trace_constant_estimate(&probe, 16, cfg.seed)?;
    let parabolic: Vec<Vec<EstimateReport>> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let seed = task_seed(cfg.seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let recipe = InstanceRecipe::random(&mut rng, &cfg.recipe);
            let reps = instance_reports(&recipe, cfg, k_trace, seed)?;
            Ok(reps
                .into_iter()
                .map(|r| r.param("instance", i).param("ell", recipe.ell))
                .collect())
        })
        .collect::<Result<_>>()?;

    let steady_grid = SpaceTimeGrid::new(1.0, 1.0, cfg.steady_grid_n, cfg.steady_grid_n, 1.0, 1, EdgeSet::all())?;
    let mp = estimate_mp(&steady_grid, 2.0, 16, cfg.seed)?;
    let steady: Vec<Vec<EstimateReport>> = (0..cfg.steady_instances)
        .into_par_iter()
        .map(|i| {
            let seed = task_seed(cfg.seed ^ 0x5EED, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut recipe = InstanceRecipe::random_steady(&mut rng, cfg.recipe.modes);
            recipe.gamma = EdgeSet::all();
            let inst = recipe.build_steady(cfg.steady_grid_n)?;
            let (f, fv, h) = (
                inst.f.max_abs() > 0.0,
                inst.fvec_x.max_abs() > 0.0 || inst.fvec_y.max_abs() > 0.0,
                inst.h.max_abs() > 0.0,
            );
            let fp = FreeParameters::defaults(2).with_data_support(f, fv, h);
            let check = SteadyCheck {
                opts: cfg.solver,
                ..SteadyCheck::new(mp, k_trace)
            };
            Ok(verify_steady(&inst, &fp, &check)?
                .into_iter()
                .map(|r| r.param("instance", i))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut reports: Vec<EstimateReport> = parabolic.into_iter().flatten().collect();
    reports.extend(steady.into_iter().flatten());
    reports.extend(perturbation_check(&steady_grid, 0.9, 0.8, mp, 4, cfg.seed)?);
    reports.extend(verify_stieltjes(cfg.stieltjes_trials, cfg.seed)?);
    reports.extend(verify_poincare(2, cfg.poincare_trials, cfg.seed)?);
    reports.extend(gehring_spot_check(cfg.gehring_trials, cfg.seed)?);
    Ok(CampaignOutcome { reports, k_trace, mp })
}
