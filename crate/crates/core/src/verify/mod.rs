//! Executable checks of the explicit bounds on solved and synthetic
//! instances. Every check produces [`EstimateReport`]s.

mod campaign;
mod energy;
mod local;
mod steady;

pub use campaign::{
    instance_reports, run_campaign, CampaignConfig, CampaignOutcome, GroupSummary,
    InstanceRecipe, RecipeOptions,
};
pub use energy::{gradient_eps_cap, verify_energy, verify_gradient_bound, EnergyCheck};
pub use local::{
    gehring_spot_check, verify_caccioppoli, verify_poincare, verify_stieltjes, CubeChoice,
};
pub use steady::{perturbation_check, verify_steady, SteadyCheck};

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{DataNorms, EnergyVariant};
use crate::meshfields::{
    lp_norm, lp_norm_rule, q1_gradient_slice_lp, Edge, GridFunction, ParabolicCube, Region,
    SmoothField, SpaceTimeGrid, TimeRule, GAUSS3,
};
use crate::parabolic::{expand_in_time, ProblemInstance};

pub const REPORT_HEADER: &str = "# estimate-report v1";
const REPORT_COLUMNS: &str = "name,lhs,rhs,margin,tol,pass,informational,params";

/// One checked inequality `lhs ≤ rhs·(1 + tol)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs`, 0 when both vanish.
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
    /// Recorded for information only; excluded from pass/fail summaries.
    pub informational: bool,
    /// Ordered `key=value` pairs.
    pub params: Vec<(String, String)>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = if lhs == 0.0 && rhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tol,
            pass: lhs <= rhs * (1.0 + tol),
            informational: false,
            params: Vec::new(),
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn param(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Whether `pass` agrees with the stored numbers.
    pub fn is_consistent(&self) -> bool {
        self.pass == (self.lhs <= self.rhs * (1.0 + self.tol)) && self.margin >= 0.0
    }
}

pub fn reports_to_csv(reports: &[EstimateReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{REPORT_HEADER}");
    let _ = writeln!(s, "{REPORT_COLUMNS}");
    for r in reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.name,
            r.lhs,
            r.rhs,
            r.margin,
            r.tol,
            r.pass,
            r.informational,
            params.join(";")
        );
    }
    s
}

pub fn reports_from_csv(text: &str) -> Result<Vec<EstimateReport>> {
    let perr = |line: usize, message: &str| Error::Parse {
        line: line + 1,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == REPORT_HEADER => {}
        _ => return Err(perr(0, "missing report header")),
    }
    match lines.next() {
        Some((_, l)) if l.trim() == REPORT_COLUMNS => {}
        _ => return Err(perr(1, "missing column line")),
    }
    let mut out = Vec::new();
    for (ln, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.splitn(8, ',').collect();
        if f.len() != 8 {
            return Err(perr(ln, "report rows need 8 fields"));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| perr(ln, "bad number"));
        let flag = |k: usize| f[k].parse::<bool>().map_err(|_| perr(ln, "bad flag"));
        let mut params = Vec::new();
        for kv in f[7].split(';').filter(|s| !s.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| perr(ln, "params must be key=value"))?;
            params.push((k.to_string(), v.to_string()));
        }
        out.push(EstimateReport {
            name: f[0].to_string(),
            lhs: num(1)?,
            rhs: num(2)?,
            margin: num(3)?,
            tol: num(4)?,
            pass: flag(5)?,
            informational: flag(6)?,
            params,
        });
    }
    Ok(out)
}

/// Uniform cover of `Ω̄ × [0,T]` by parabolic cubes of radius `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub radius: f64,
    /// Claimed overlap bound `N`.
    pub n_overlap: u32,
    /// Relative distance `β` of the inner set to the cube boundary.
    pub beta: f64,
}

impl CoverSpec {
    pub fn new(radius: f64, n_overlap: u32, beta: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("cover radius must be > 0, got {radius}")));
        }
        if n_overlap == 0 {
            return Err(Error::param("overlap bound must be >= 1"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::param(format!("beta must lie in (0, 1), got {beta}")));
        }
        Ok(Self {
            radius,
            n_overlap,
            beta,
        })
    }

    /// Cubes on the lattice of spacing `2r` in space and `2r²` in time,
    /// starting at the lower corner. Coverage and the overlap bound are
    /// checked by counting, for every space-time node, the cubes whose
    /// half-open box `[c − r, c + r) × [t − r², t + r²)` contains it.
    pub fn cubes(&self, grid: &SpaceTimeGrid) -> Result<Vec<ParabolicCube>> {
        let r = self.radius;
        let count = |len: f64, half: f64| (len / (2.0 * half)).floor() as usize + 1;
        let (cx, cy, ct) = (count(grid.lx, r), count(grid.ly, r), count(grid.t_final, r * r));
        let mut cubes = Vec::with_capacity(cx * cy * ct);
        for k in 0..ct {
            for j in 0..cy {
                for i in 0..cx {
                    cubes.push(ParabolicCube::new(
                        grid.x0 + r * (2 * i + 1) as f64,
                        grid.y0 + r * (2 * j + 1) as f64,
                        grid.t0 + r * r * (2 * k + 1) as f64,
                        r,
                    ));
                }
            }
        }
        let inside = |c: &ParabolicCube, x: f64, y: f64, t: f64| {
            x >= c.center[0] - r
                && x < c.center[0] + r
                && y >= c.center[1] - r
                && y < c.center[1] + r
                && t >= c.t - r * r
                && t < c.t + r * r
        };
        for k in 0..=grid.nt {
            for j in 0..=grid.ny {
                for i in 0..=grid.nx {
                    let (x, y, t) = (grid.x(i), grid.y(j), grid.t(k));
                    let hits = cubes.iter().filter(|c| inside(c, x, y, t)).count();
                    if hits == 0 {
                        return Err(Error::domain(format!("cover misses the node ({x}, {y}, {t})")));
                    }
                    if hits > self.n_overlap as usize {
                        return Err(Error::domain(format!(
                            "{hits} cubes overlap at ({x}, {y}, {t}), above N = {}",
                            self.n_overlap
                        )));
                    }
                }
            }
        }
        Ok(cubes)
    }
}

/// Norms of the instance data at exponent `p`, with time integrals taken by
/// `rule`. `h_mixed` is `∫_Σ |h|^{(ℓ+p−2)/(ℓ−1)}`.
pub fn data_norms(inst: &ProblemInstance, p: f64, k_trace: f64, rule: TimeRule) -> Result<DataNorms> {
    let g = &inst.grid;
    let ex = |d: &GridFunction| expand_in_time(d, g);
    let f = ex(&inst.f)?;
    let fvec = ex(&inst.fvec_x)?.zip_with(&ex(&inst.fvec_y)?, f64::hypot)?;
    let h = ex(&inst.h)?;
    let ell = inst.law.ell;
    let q = (ell + p - 2.0) / (ell - 1.0);
    let trace = |p: f64| -> Result<f64> {
        if g.gamma.is_empty() {
            Ok(0.0)
        } else {
            lp_norm_rule(&h, p, Region::GammaTrace, None, rule)
        }
    };
    let h_mixed = trace(q)?.powf(q);
    Ok(DataNorms {
        u0_p: lp_norm(&inst.u0, p, Region::Interior, None)?,
        f_p: lp_norm_rule(&f, p, Region::Interior, None, rule)?,
        fvec_p: lp_norm_rule(&fvec, p, Region::Interior, None, rule)?,
        h_mixed,
        h_p: trace(p)?,
        omega_vol: g.area(),
        k_trace,
        s_dual: 0.0,
    })
}

/// [`data_norms`] with `h_mixed` replaced by `‖h‖_{p',Σ}^{p'}` for the
/// `b_# = 0` variant.
pub fn variant_data_norms(
    inst: &ProblemInstance,
    p: f64,
    k_trace: f64,
    rule: TimeRule,
    variant: EnergyVariant,
) -> Result<DataNorms> {
    let mut norms = data_norms(inst, p, k_trace, rule)?;
    if variant == EnergyVariant::BZero {
        let pd = p / (p - 1.0);
        let h = expand_in_time(&inst.h, &inst.grid)?;
        norms.h_mixed = if inst.grid.gamma.is_empty() {
            0.0
        } else {
            lp_norm_rule(&h, pd, Region::GammaTrace, None, rule)?.powf(pd)
        };
    }
    Ok(norms)
}

/// Whether each datum vanishes identically: `(f, 𝐟, h)`.
pub fn data_support(inst: &ProblemInstance) -> (bool, bool, bool) {
    let nz = |g: &GridFunction| g.values().iter().any(|v| *v != 0.0);
    (
        nz(&inst.f),
        nz(&inst.fvec_x) || nz(&inst.fvec_y),
        // Only the values on Γ matter for h.
        {
            let g = &inst.grid;
            let levels = inst.h.n_levels();
            (0..levels).any(|k| {
                let s = inst.h.slice(k);
                (0..=g.ny).any(|j| (0..=g.nx).any(|i| g.on_gamma(i, j) && s[g.idx(i, j)] != 0.0))
            })
        },
    )
}

/// `∫_Ω |u_h|^{p−2}|∇u_h|²` for the bilinear interpolant of one slice.
pub fn weighted_gradient_slice(grid: &SpaceTimeGrid, slice: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return q1_gradient_slice_lp(grid, slice, 2.0);
    }
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut total = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let u00 = slice[grid.idx(i, j)];
            let u10 = slice[grid.idx(i + 1, j)];
            let u01 = slice[grid.idx(i, j + 1)];
            let u11 = slice[grid.idx(i + 1, j + 1)];
            let mut cell = 0.0;
            for &(xi, wx) in &GAUSS3 {
                for &(eta, wy) in &GAUSS3 {
                    let u = u00 * (1.0 - xi) * (1.0 - eta) + u10 * xi * (1.0 - eta) + u01 * (1.0 - xi) * eta + u11 * xi * eta;
                    let dx = ((u10 - u00) * (1.0 - eta) + (u11 - u01) * eta) / hx;
                    let dy = ((u01 - u00) * (1.0 - xi) + (u11 - u10) * xi) / hy;
                    cell += wx * wy * u.abs().powf(p - 2.0) * (dx * dx + dy * dy);
                }
            }
            total += cell * hx * hy;
        }
    }
    total
}

/// Largest observed `‖v‖_{2,Γ}/(‖v‖_{4/3,Ω} + ‖∇v‖_{4/3,Ω})` over constants,
/// boundary layers and random smooth fields. This is a lower bound for the
/// trace constant of the rectangle, not a certified value.
pub fn trace_constant_estimate(grid: &SpaceTimeGrid, samples: usize, seed: u64) -> Result<f64> {
    if grid.gamma.is_empty() {
        return Err(Error::domain("the trace constant needs a nonempty Γ"));
    }
    let g = grid.with_time(0.0, 1.0, 1);
    let q = 4.0 / 3.0;
    let ratio = |v: Vec<f64>| -> Result<f64> {
        let u = GridFunction::space(g, v)?;
        let tr = lp_norm(&u, 2.0, Region::GammaTrace, None)?;
        let den = lp_norm(&u, q, Region::Interior, None)? + q1_gradient_slice_lp(&g, u.values(), q).powf(1.0 / q);
        Ok(if den > 0.0 { tr / den } else { 0.0 })
    };
    let mut best = ratio(vec![1.0; g.space_len()])?;
    for e in g.gamma.iter() {
        for k in [1.0, 2.0, 4.0, 8.0] {
            let layer = GridFunction::space_from_fn(g, |x, y| {
                let d = match e {
                    Edge::Left => x - g.x0,
                    Edge::Right => g.x0 + g.lx - x,
                    Edge::Bottom => y - g.y0,
                    Edge::Top => g.y0 + g.ly - y,
                };
                (-k * d).exp()
            })?;
            best = best.max(ratio(layer.into_values())?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        best = best.max(ratio(SmoothField::random(&mut rng, 4).sample(&g))?);
    }
    Ok(best)
}
