//! Run configuration.
//!
//! The file format is flat `key = value` text grouped under `[section]`
//! headers. `#` starts a comment that runs to the end of the line. Blank
//! lines are ignored, keys are unique within a section and unknown sections
//! or keys are errors. Every key is optional.
//!
//! ```text
//! [run]         command seed out
//! [domain]      lx ly nx ny t_final nt gamma
//! [problem]     a11 a12 a22 ell beta u0 f fx fy h exact
//! [parameters]  nu0 nu1 nu2 eps delta beta cover_n cover_r cn p variant
//!               k_trace mp s_dual auto_support
//! [solver]      newton_tol newton_max linear_tol damping method max_iter
//! [verify]      instances grid_n nt p_values ells t_final modes data_scale
//!               interior_cubes boundary_cubes local_grid_n local_nt
//!               local_t_final cover_radius energy_tol local_tol
//!               stieltjes_trials poincare_trials gehring_trials
//!               steady_instances steady_grid_n
//! [sweep]       kind from to points meshes p
//! ```
//!
//! Coefficients `a11 a12 a22` and `beta` are expressions in `x, y`; the data
//! `f fx fy h` and the optional exact solution may also use `t`. Lists are
//! comma separated.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use hireg_core::estimates::{EnergyVariant, FreeParameters};
use hireg_core::fem::CoefficientField;
use hireg_core::meshfields::{EdgeSet, GridFunction, SpaceTimeGrid};
use hireg_core::parabolic::{BoundaryLaw, ProblemInstance, SolverOptions};
use hireg_core::elliptic::SteadyInstance;
use hireg_core::verify::{CampaignConfig, CubeChoice};

use crate::error::CliError;
use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Constants,
    Solve,
    SolveSteady,
    Verify,
    Sweep,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constants" => Ok(Command::Constants),
            "solve" => Ok(Command::Solve),
            "solve-steady" => Ok(Command::SolveSteady),
            "verify" => Ok(Command::Verify),
            "sweep" => Ok(Command::Sweep),
            _ => Err(format!("unknown command '{s}'")),
        }
    }
}

/// An expression together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub src: String,
    pub expr: Expr,
}

impl Field {
    pub fn new(src: &str) -> Result<Self, crate::expr::ParseError> {
        Ok(Self {
            src: src.trim().to_string(),
            expr: Expr::parse(src)?,
        })
    }

    fn constant(v: f64) -> Self {
        Self {
            src: v.to_string(),
            expr: Expr::Num(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSpec {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub t_final: f64,
    pub nt: usize,
    pub gamma: EdgeSet,
}

impl DomainSpec {
    pub fn grid(&self) -> Result<SpaceTimeGrid, CliError> {
        Ok(SpaceTimeGrid::new(self.lx, self.ly, self.nx, self.ny, self.t_final, self.nt, self.gamma)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub a: [Field; 3],
    pub ell: f64,
    pub beta: Field,
    pub u0: Field,
    pub f: Field,
    pub fx: Field,
    pub fy: Field,
    pub h: Field,
    pub exact: Option<Field>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSpec {
    pub fp: FreeParameters,
    /// Exponent of the global bounds.
    pub p: f64,
    pub variant: EnergyVariant,
    /// Trace constant; estimated on the grid when absent.
    pub k_trace: Option<f64>,
    /// Norm of the inverse Robin-Laplacian; estimated when absent.
    pub mp: Option<f64>,
    pub s_dual: f64,
    /// Zero each Young parameter whose datum vanishes.
    pub auto_support: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyMethod {
    Monotone,
    Contraction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Nu0,
    Mesh,
    EpsCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub kind: Option<SweepKind>,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub meshes: Vec<usize>,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub out: PathBuf,
    pub domain: DomainSpec,
    pub problem: ProblemSpec,
    pub params: ParamSpec,
    pub solver: SolverOptions,
    pub method: SteadyMethod,
    pub max_iter: usize,
    pub verify: CampaignConfig,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            out: PathBuf::from("out"),
            domain: DomainSpec {
                lx: 1.0,
                ly: 1.0,
                nx: 16,
                ny: 16,
                t_final: 1.0,
                nt: 16,
                gamma: EdgeSet::all(),
            },
            problem: ProblemSpec {
                a: [Field::constant(1.0), Field::constant(0.0), Field::constant(1.0)],
                ell: 2.0,
                beta: Field::constant(1.0),
                u0: Field::constant(0.0),
                f: Field::constant(0.0),
                fx: Field::constant(0.0),
                fy: Field::constant(0.0),
                h: Field::constant(0.0),
                exact: None,
            },
            params: ParamSpec {
                fp: FreeParameters::defaults(2),
                p: 2.0,
                variant: EnergyVariant::Standard,
                k_trace: None,
                mp: None,
                s_dual: 0.0,
                auto_support: true,
            },
            solver: SolverOptions::default(),
            method: SteadyMethod::Monotone,
            max_iter: 2000,
            verify: CampaignConfig::default(),
            sweep: SweepSpec {
                kind: None,
                from: 1e-3,
                to: 1e2,
                points: 41,
                meshes: vec![8, 16, 32],
                p: 2.0,
            },
        }
    }
}

/// One `key = value` entry with its line number.
#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

/// Sections of the raw file; entries are removed as they are consumed.
struct Raw {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        message: message.into(),
    }
}

const SECTIONS: [&str; 7] = ["run", "domain", "problem", "parameters", "solver", "verify", "sweep"];

impl Raw {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(parse_err(line, format!("unknown section [{name}]")));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            let sec = current
                .as_ref()
                .ok_or_else(|| parse_err(line, "key outside of any section"))?;
            let map = sections.entry(sec.clone()).or_default();
            if map.contains_key(k) {
                return Err(parse_err(line, format!("duplicate key '{k}' in [{sec}]")));
            }
            map.insert(
                k.to_string(),
                Entry {
                    value: v.to_string(),
                    line,
                },
            );
        }
        Ok(Self { sections })
    }

    fn take(&mut self, sec: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(sec).and_then(|m| m.remove(key))
    }

    fn get<T: FromStr>(&mut self, sec: &str, key: &str, slot: &mut T) -> Result<(), CliError> {
        if let Some(e) = self.take(sec, key) {
            *slot = e
                .value
                .parse()
                .map_err(|_| parse_err(e.line, format!("[{sec}] {key}: cannot parse '{}'", e.value)))?;
        }
        Ok(())
    }

    fn get_opt<T: FromStr>(&mut self, sec: &str, key: &str, slot: &mut Option<T>) -> Result<(), CliError> {
        if let Some(e) = self.take(sec, key) {
            let v = e
                .value
                .parse()
                .map_err(|_| parse_err(e.line, format!("[{sec}] {key}: cannot parse '{}'", e.value)))?;
            *slot = Some(v);
        }
        Ok(())
    }

    fn get_list<T: FromStr>(&mut self, sec: &str, key: &str, slot: &mut Vec<T>) -> Result<(), CliError> {
        if let Some(e) = self.take(sec, key) {
            *slot = e
                .value
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| parse_err(e.line, format!("[{sec}] {key}: cannot parse list '{}'", e.value)))?;
        }
        Ok(())
    }

    fn get_field(&mut self, sec: &str, key: &str, slot: &mut Field) -> Result<(), CliError> {
        if let Some(e) = self.take(sec, key) {
            *slot = Field::new(&e.value)
                .map_err(|err| parse_err(e.line, format!("[{sec}] {key}: {err}")))?;
        }
        Ok(())
    }

    fn get_with<T>(
        &mut self,
        sec: &str,
        key: &str,
        slot: &mut T,
        f: impl Fn(&str) -> Option<T>,
    ) -> Result<(), CliError> {
        if let Some(e) = self.take(sec, key) {
            *slot = f(&e.value).ok_or_else(|| parse_err(e.line, format!("[{sec}] {key}: invalid value '{}'", e.value)))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        for (sec, map) in self.sections {
            if let Some((k, e)) = map.into_iter().min_by_key(|(_, e)| e.line) {
                return Err(parse_err(e.line, format!("unknown key '{k}' in [{sec}]")));
            }
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = Raw::parse(text)?;
        let mut c = RunConfig::default();

        raw.get_opt("run", "command", &mut c.command)?;
        raw.get("run", "seed", &mut c.seed)?;
        raw.get("run", "out", &mut c.out)?;

        let d = &mut c.domain;
        raw.get("domain", "lx", &mut d.lx)?;
        raw.get("domain", "ly", &mut d.ly)?;
        raw.get("domain", "nx", &mut d.nx)?;
        d.ny = d.nx;
        raw.get("domain", "ny", &mut d.ny)?;
        raw.get("domain", "t_final", &mut d.t_final)?;
        raw.get("domain", "nt", &mut d.nt)?;
        raw.get_with("domain", "gamma", &mut d.gamma, EdgeSet::parse)?;

        let pr = &mut c.problem;
        for (k, slot) in ["a11", "a12", "a22"].into_iter().zip(pr.a.iter_mut()) {
            raw.get_field("problem", k, slot)?;
        }
        raw.get("problem", "ell", &mut pr.ell)?;
        raw.get_field("problem", "beta", &mut pr.beta)?;
        raw.get_field("problem", "u0", &mut pr.u0)?;
        raw.get_field("problem", "f", &mut pr.f)?;
        raw.get_field("problem", "fx", &mut pr.fx)?;
        raw.get_field("problem", "fy", &mut pr.fy)?;
        raw.get_field("problem", "h", &mut pr.h)?;
        if let Some(e) = raw.take("problem", "exact") {
            pr.exact = Some(Field::new(&e.value).map_err(|err| parse_err(e.line, format!("[problem] exact: {err}")))?);
        }

        let pa = &mut c.params;
        let fp = &mut pa.fp;
        raw.get("parameters", "nu0", &mut fp.nu0)?;
        raw.get("parameters", "nu1", &mut fp.nu1)?;
        raw.get("parameters", "nu2", &mut fp.nu2)?;
        raw.get("parameters", "eps", &mut fp.eps)?;
        raw.get("parameters", "delta", &mut fp.delta)?;
        raw.get("parameters", "beta", &mut fp.beta)?;
        raw.get("parameters", "cover_n", &mut fp.cover_n)?;
        raw.get("parameters", "cover_r", &mut fp.cover_r)?;
        raw.get("parameters", "cn", &mut fp.cn)?;
        raw.get("parameters", "p", &mut pa.p)?;
        raw.get_with("parameters", "variant", &mut pa.variant, parse_variant)?;
        raw.get_opt("parameters", "k_trace", &mut pa.k_trace)?;
        raw.get_opt("parameters", "mp", &mut pa.mp)?;
        raw.get("parameters", "s_dual", &mut pa.s_dual)?;
        raw.get("parameters", "auto_support", &mut pa.auto_support)?;

        let so = &mut c.solver;
        raw.get("solver", "newton_tol", &mut so.newton_tol)?;
        raw.get("solver", "newton_max", &mut so.newton_max)?;
        raw.get("solver", "linear_tol", &mut so.linear_tol)?;
        raw.get("solver", "damping", &mut so.damping)?;
        raw.get_with("solver", "method", &mut c.method, |s| match s {
            "monotone" => Some(SteadyMethod::Monotone),
            "contraction" => Some(SteadyMethod::Contraction),
            _ => None,
        })?;
        raw.get("solver", "max_iter", &mut c.max_iter)?;

        let v = &mut c.verify;
        raw.get("verify", "instances", &mut v.instances)?;
        raw.get("verify", "grid_n", &mut v.grid_n)?;
        raw.get("verify", "nt", &mut v.nt)?;
        raw.get_list("verify", "p_values", &mut v.p_values)?;
        raw.get_list("verify", "ells", &mut v.recipe.ells)?;
        raw.get("verify", "t_final", &mut v.recipe.t_final)?;
        raw.get("verify", "modes", &mut v.recipe.modes)?;
        raw.get("verify", "data_scale", &mut v.recipe.data_scale)?;
        let mut cubes: CubeChoice = v.cubes;
        raw.get("verify", "interior_cubes", &mut cubes.interior)?;
        raw.get("verify", "boundary_cubes", &mut cubes.boundary)?;
        v.cubes = cubes;
        raw.get("verify", "local_grid_n", &mut v.local_grid_n)?;
        raw.get("verify", "local_nt", &mut v.local_nt)?;
        raw.get("verify", "local_t_final", &mut v.local_t_final)?;
        raw.get("verify", "cover_radius", &mut v.cover_radius)?;
        raw.get("verify", "energy_tol", &mut v.energy_tol)?;
        raw.get("verify", "local_tol", &mut v.local_tol)?;
        raw.get("verify", "stieltjes_trials", &mut v.stieltjes_trials)?;
        raw.get("verify", "poincare_trials", &mut v.poincare_trials)?;
        raw.get("verify", "gehring_trials", &mut v.gehring_trials)?;
        raw.get("verify", "steady_instances", &mut v.steady_instances)?;
        raw.get("verify", "steady_grid_n", &mut v.steady_grid_n)?;

        let sw = &mut c.sweep;
        raw.get_with("sweep", "kind", &mut sw.kind, |s| {
            Some(Some(match s {
                "nu0" => SweepKind::Nu0,
                "mesh" => SweepKind::Mesh,
                "eps_cap" => SweepKind::EpsCap,
                _ => return None,
            }))
        })?;
        raw.get("sweep", "from", &mut sw.from)?;
        raw.get("sweep", "to", &mut sw.to)?;
        raw.get("sweep", "points", &mut sw.points)?;
        raw.get_list("sweep", "meshes", &mut sw.meshes)?;
        raw.get("sweep", "p", &mut sw.p)?;

        raw.finish()?;
        c.verify.seed = c.seed;
        c.verify.solver = c.solver;
        Ok(c)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.verify.seed = seed;
    }

    /// Pass tolerance of the solver-dependent checks.
    pub fn set_tol(&mut self, tol: f64) {
        self.verify.energy_tol = tol;
        self.verify.local_tol = tol;
    }

    /// The configured time-dependent problem. Every expression is checked
    /// for finite values on the grid.
    pub fn instance(&self) -> Result<ProblemInstance, CliError> {
        self.instance_on(&self.domain.grid()?)
    }

    pub fn instance_on(&self, grid: &SpaceTimeGrid) -> Result<ProblemInstance, CliError> {
        let pr = &self.problem;
        let g = *grid;
        let coef = coefficients(pr, &g)?;
        sample("beta", &pr.beta, &g, false)?;
        let law = BoundaryLaw::from_fn(&g, pr.ell, |x, y| pr.beta.expr.eval(x, y, 0.0))?;
        let mut inst = ProblemInstance::homogeneous(g, coef, law);
        inst.u0 = sample("u0", &pr.u0, &g, false)?;
        inst.f = sample("f", &pr.f, &g, true)?;
        inst.fvec_x = sample("fx", &pr.fx, &g, true)?;
        inst.fvec_y = sample("fy", &pr.fy, &g, true)?;
        inst.h = sample("h", &pr.h, &g, true)?;
        Ok(inst)
    }

    /// The steady problem: data evaluated at `t = 0`.
    pub fn steady_instance(&self) -> Result<SteadyInstance, CliError> {
        let pr = &self.problem;
        let g = self.domain.grid()?;
        let coef = coefficients(pr, &g)?;
        sample("beta", &pr.beta, &g, false)?;
        let law = BoundaryLaw::from_fn(&g, pr.ell, |x, y| pr.beta.expr.eval(x, y, 0.0))?;
        let mut inst = SteadyInstance::homogeneous(g, coef, law);
        inst.f = sample("f", &pr.f, &g, false)?;
        inst.fvec_x = sample("fx", &pr.fx, &g, false)?;
        inst.fvec_y = sample("fy", &pr.fy, &g, false)?;
        inst.h = sample("h", &pr.h, &g, false)?;
        Ok(inst)
    }
}

fn parse_variant(s: &str) -> Option<EnergyVariant> {
    match s {
        "standard" => Some(EnergyVariant::Standard),
        "b_zero" => Some(EnergyVariant::BZero),
        _ => None,
    }
}

pub fn variant_name(v: EnergyVariant) -> &'static str {
    match v {
        EnergyVariant::Standard => "standard",
        EnergyVariant::BZero => "b_zero",
    }
}

fn coefficients(pr: &ProblemSpec, g: &SpaceTimeGrid) -> Result<CoefficientField, CliError> {
    // Probe for non-finite values first so the message names the expression.
    for (name, a) in ["a11", "a12", "a22"].iter().zip(&pr.a) {
        sample(name, a, g, false)?;
    }
    Ok(CoefficientField::from_fn(g, |x, y| {
        [pr.a[0].expr.eval(x, y, 0.0), pr.a[1].expr.eval(x, y, 0.0), pr.a[2].expr.eval(x, y, 0.0)]
    })?)
}

fn sample(name: &str, field: &Field, g: &SpaceTimeGrid, timed: bool) -> Result<GridFunction, CliError> {
    let e = &field.expr;
    // The grid constructors reject non-finite values with a domain error;
    // catch them here so the message names the expression.
    let bad = std::cell::Cell::new(false);
    let eval = |x, y, t| {
        let v = e.eval(x, y, t);
        if v.is_finite() {
            v
        } else {
            bad.set(true);
            0.0
        }
    };
    let gf = if timed && e.uses_time() {
        GridFunction::space_time_from_fn(*g, eval)?
    } else {
        GridFunction::space_from_fn(*g, |x, y| eval(x, y, 0.0))?
    };
    if bad.get() {
        return Err(CliError::Usage(format!("expression '{name}' is not finite on the grid")));
    }
    Ok(gf)
}
