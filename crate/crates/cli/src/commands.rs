//! The five commands. Each writes its files under `cfg.out` and returns
//! their paths.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hireg_core::elliptic::{estimate_mp, solve_contraction, solve_monotone, steady_residual};
use hireg_core::estimates::{
    caccioppoli_lhs_factor, contraction_data, energy_functional,
    epsilon_admissible, gehring_b, gehring_upsilon, gradient_epsilon_admissible, growth_exponent,
    interior_radius_cap, linear_w1p, marcinkiewicz_constant, optimize_nu0,
    poincare_sobolev_constant, sobolev_f_term, steady_state_bounds, theorem_main_bounds, CubeKind,
    EllipticityData, EnergySetting, EnergyVariant, FreeParameters, GehringExponents, LinearRhs,
    SteadyCover, SteadyNorms, UpsilonVariant,
};
use hireg_core::meshfields::{space_weights, write_csv, EdgeSet, GridFunction, SpaceTimeGrid, TimeRule};
use hireg_core::parabolic::{solve_with_stats, weak_residual, ProblemInstance};
use hireg_core::verify::{
    data_support, reports_to_csv, run_campaign, trace_constant_estimate, variant_data_norms,
    verify_energy, EnergyCheck,
};
use hireg_core::Error as CoreError;

use crate::config::{variant_name, Command, RunConfig, SteadyMethod, SweepKind};
use crate::error::CliError;

pub const CONSTANTS_HEADER: &str = "# constants v1";
pub const SUMMARY_HEADER: &str = "# run-summary v1";
pub const SWEEP_HEADER: &str = "# sweep v1";

/// Time rule of every space-time norm the commands evaluate.
const RULE: TimeRule = TimeRule::RightEndpoint;

pub fn execute(cfg: &RunConfig, command: Command) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CoreError::io(&cfg.out, e))?;
    match command {
        Command::Constants => cmd_constants(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::SolveSteady => cmd_solve_steady(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sweep => cmd_sweep(cfg),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CoreError::io(&path, e))?;
    Ok(path)
}

/// Trace constant from the config, else estimated on the spatial grid with
/// all four sides in `Γ`.
fn k_trace(cfg: &RunConfig, grid: &SpaceTimeGrid) -> Result<f64, CliError> {
    match cfg.params.k_trace {
        Some(k) => Ok(k),
        None => {
            let probe = SpaceTimeGrid { gamma: EdgeSet::all(), ..*grid };
            Ok(trace_constant_estimate(&probe, 16, cfg.seed)?)
        }
    }
}

fn mp(cfg: &RunConfig, grid: &SpaceTimeGrid) -> Result<f64, CliError> {
    match cfg.params.mp {
        Some(m) => Ok(m),
        None => Ok(estimate_mp(grid, 2.0, 16, cfg.seed)?),
    }
}

fn free_parameters(cfg: &RunConfig, inst: &ProblemInstance) -> Result<FreeParameters, CliError> {
    let mut fp = cfg.params.fp;
    if cfg.params.auto_support {
        let (f, fv, h) = data_support(inst);
        fp = fp.with_data_support(f, fv, h);
    }
    fp.validate()?;
    Ok(fp)
}

/// One row of the constants table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantRow {
    pub name: String,
    pub value: String,
    pub group: String,
}

struct Table(Vec<ConstantRow>);

impl Table {
    fn add(&mut self, group: &str, name: &str, value: impl std::fmt::Display) {
        self.0.push(ConstantRow {
            name: name.to_string(),
            value: value.to_string(),
            group: group.to_string(),
        });
    }
}

pub fn constants_to_csv(rows: &[ConstantRow]) -> String {
    let mut s = format!("{CONSTANTS_HEADER}\nname,value,group\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.name, r.value, r.group);
    }
    s
}

pub fn constants_from_csv(text: &str) -> Result<Vec<ConstantRow>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(CONSTANTS_HEADER) || lines.next() != Some("name,value,group") {
        return Err(CliError::Usage("not a constants table".into()));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let mut it = l.split(',');
            match (it.next(), it.next(), it.next(), it.next()) {
                (Some(n), Some(v), Some(g), None) => Ok(ConstantRow {
                    name: n.into(),
                    value: v.into(),
                    group: g.into(),
                }),
                _ => Err(CliError::Config {
                    line: i + 3,
                    message: "expected name,value,group".into(),
                }),
            }
        })
        .collect()
}

/// Free parameters, `p` and variant recorded in a constants table.
pub fn parameters_from_constants(rows: &[ConstantRow]) -> Result<(FreeParameters, f64, EnergyVariant), CliError> {
    let get = |name: &str| -> Result<&str, CliError> {
        rows.iter()
            .find(|r| r.group == "input" && r.name == name)
            .map(|r| r.value.as_str())
            .ok_or_else(|| CliError::Usage(format!("missing input row '{name}'")))
    };
    let num = |name: &str| -> Result<f64, CliError> {
        get(name)?.parse().map_err(|_| CliError::Usage(format!("bad value for '{name}'")))
    };
    let fp = FreeParameters {
        nu0: num("nu0")?,
        nu1: num("nu1")?,
        nu2: num("nu2")?,
        eps: num("eps")?,
        delta: num("delta")?,
        beta: num("beta")?,
        cover_n: get("cover_n")?.parse().map_err(|_| CliError::Usage("bad value for 'cover_n'".into()))?,
        cover_r: num("cover_r")?,
        cn: num("cn")?,
    };
    let variant = match get("variant")? {
        "standard" => EnergyVariant::Standard,
        "b_zero" => EnergyVariant::BZero,
        v => return Err(CliError::Usage(format!("unknown variant '{v}'"))),
    };
    Ok((fp, num("p")?, variant))
}

/// Tabulates the constants for the configured instance and parameters.
pub fn constants_table(cfg: &RunConfig) -> Result<Vec<ConstantRow>, CliError> {
    let inst = cfg.instance()?;
    let grid = inst.grid;
    let ed = inst.ellipticity()?;
    let fp = free_parameters(cfg, &inst)?;
    let (p, variant) = (cfg.params.p, cfg.params.variant);
    let k = k_trace(cfg, &grid)?;
    let mut t = Table(Vec::new());

    for (name, v) in [
        ("nu0", fp.nu0),
        ("nu1", fp.nu1),
        ("nu2", fp.nu2),
        ("eps", fp.eps),
        ("delta", fp.delta),
        ("beta", fp.beta),
        ("cover_r", fp.cover_r),
        ("cn", fp.cn),
        ("p", p),
        ("k_trace", k),
    ] {
        t.add("input", name, v);
    }
    t.add("input", "cover_n", fp.cover_n);
    t.add("input", "variant", variant_name(variant));

    t.add("structure", "a_lo", ed.a_lo);
    t.add("structure", "a_hi", ed.a_hi);
    t.add("structure", "b_lo", ed.b_lo);
    t.add("structure", "b_hi", ed.b_hi);
    t.add("structure", "ell", ed.ell);

    let np = variant_data_norms(&inst, p, k, RULE, variant)?;
    let n2 = variant_data_norms(&inst, 2.0, k, RULE, variant)?;
    t.add("data", "u0_p", np.u0_p);
    t.add("data", "f_p", np.f_p);
    t.add("data", "fvec_p", np.fvec_p);
    t.add("data", "h_mixed", np.h_mixed);
    t.add("data", "h_p", np.h_p);
    t.add("data", "omega_vol", np.omega_vol);

    let setting = EnergySetting {
        variant,
        ..EnergySetting::new(p, 2, grid.t_final)
    };
    let mb = theorem_main_bounds(&setting, &ed, &fp, &np, &n2)?;
    t.add("energy", "energy.G", mb.g);
    t.add("energy", "energy.kappa", mb.kappa);
    t.add("energy", "energy.E", mb.e);
    t.add("energy", "energy.sup_bound", mb.g * (mb.kappa * grid.t_final).exp());
    let (nu_opt, val_opt) = optimize_nu0(&setting, &ed, &np)?;
    t.add("energy", "energy.optimal_nu0", nu_opt);
    t.add("energy", "energy.optimal_sup_bound", val_opt);
    if cfg.params.s_dual > 0.0 {
        let st = sobolev_f_term(p, fp.nu0, cfg.params.s_dual, np.f_p)?;
        t.add("energy", "energy.sobolev_source_term", st.g_term);
        t.add("energy", "energy.sobolev_gradient_weight", st.grad_weight);
        t.add("energy", "energy.sobolev_growth", st.growth);
    }

    t.add("gradient", "gradient.upsilon", mb.upsilon);
    t.add("gradient", "gradient.eps_cap", mb.eps_cap);
    t.add("gradient", "gradient.admissible", u8::from(mb.m.is_some()));
    if let (Some(m), Some(c)) = (mb.m, mb.cover_constant) {
        t.add("gradient", "gradient.M", m);
        t.add("gradient", "gradient.cover_constant", c);
    }

    let ge = GehringExponents::gradient_reverse_holder(2);
    let b_int = gehring_b(&ed, fp.nu0, 2, CubeKind::Interior)?;
    let b_bnd = gehring_b(&ed, fp.nu0, 2, CubeKind::Boundary)?;
    t.add("gehring", "gehring.B_interior", b_int);
    t.add("gehring", "gehring.B_boundary", b_bnd);
    for (name, b, v) in [
        ("gehring.upsilon_general", b_bnd, UpsilonVariant::General),
        ("gehring.upsilon_no_phi", b_bnd, UpsilonVariant::NoPhi),
        ("gehring.upsilon_interior", b_int, UpsilonVariant::Interior),
        ("gehring.upsilon_interior_no_phi", b_int, UpsilonVariant::InteriorNoPhi),
    ] {
        let ups = gehring_upsilon(b, &ge, v)?;
        t.add("gehring", name, ups);
        let tag = name.trim_start_matches("gehring.upsilon_");
        t.add("gehring", &format!("gehring.eps_cap_{tag}"), epsilon_admissible(fp.delta, ge.p, ups)?.sup);
        t.add(
            "gehring",
            &format!("gehring.gradient_eps_cap_{tag}"),
            gradient_epsilon_admissible(fp.delta, 2, ups)?.sup,
        );
    }

    if fp.nu1 + fp.nu2 < 1.0 {
        t.add("local", "caccioppoli.lhs_factor", caccioppoli_lhs_factor(&ed, &fp)?);
    }
    let reach = 0.5 * grid.lx.min(grid.ly) / 2f64.sqrt();
    t.add("local", "local.radius_cap", interior_radius_cap(2, grid.t_final, reach)?);

    t.add("sobolev", "poincare_sobolev.n2", poincare_sobolev_constant(2)?);
    t.add("sobolev", "poincare_sobolev.n3", poincare_sobolev_constant(3)?);
    let mk = marcinkiewicz_constant(2.0, 1.0, 3.0, 1.0, 1.0)?;
    t.add("interpolation", "marcinkiewicz.q1_r3_p2", mk.constant);
    t.add("interpolation", "marcinkiewicz.alpha", mk.alpha);

    steady_rows(cfg, &mut t, &ed, &fp, &grid, &np)?;
    Ok(t.0)
}

fn steady_rows(
    cfg: &RunConfig,
    t: &mut Table,
    ed: &EllipticityData,
    fp: &FreeParameters,
    grid: &SpaceTimeGrid,
    np: &hireg_core::estimates::DataNorms,
) -> Result<(), CliError> {
    let cover = SteadyCover {
        n_cover: fp.cover_n,
        r_lo: fp.cover_r,
    };
    let probe = SteadyNorms {
        k_trace: np.k_trace,
        ..SteadyNorms::default()
    };
    let sb = steady_state_bounds(ed, fp, 2, &cover, 1e-12, &probe)?;
    t.add("steady", "steady.upsilon", sb.upsilon_s);
    if ed.ell != 2.0 || ed.b_lo <= 0.0 {
        return Ok(());
    }
    let m = mp(cfg, grid)?;
    t.add("steady", "steady.mp", m);
    match contraction_data(ed, m, 2.0, 2) {
        Ok(cd) => {
            t.add("steady", "contraction.feasible", 1);
            t.add("steady", "contraction.t", cd.t);
            t.add("steady", "contraction.kappa", cd.kappa_c);
            t.add("steady", "contraction.q", cd.q_factor);
            t.add("steady", "contraction.w1p_multiplier", cd.el2_mult);
            if let Some(c) = cd.necas_c {
                t.add("steady", "contraction.norm_equivalence", c);
            }
        }
        Err(CoreError::Infeasible(_)) => t.add("steady", "contraction.feasible", 0),
        Err(e) => return Err(e.into()),
    }
    if ed.a_lo <= 1.0 && ed.b_lo <= 1.0 {
        let setting = EnergySetting::new(cfg.params.p, 2, grid.t_final);
        let rhs = LinearRhs {
            fvec: np.fvec_p,
            f: np.f_p,
            h: np.h_p,
        };
        // The bound is built from unit data, so every Young parameter is used.
        match linear_w1p(&setting, ed, &cfg.params.fp, np, &rhs) {
            Ok(lw) => {
                t.add("steady", "linear.feasible", 1);
                t.add("steady", "linear.lambda_p", lw.lambda_p);
                t.add("steady", "linear.gradient_bound", lw.grad_bound);
                t.add("steady", "linear.trace_bound", lw.trace_bound);
            }
            Err(CoreError::Infeasible(_)) => t.add("steady", "linear.feasible", 0),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn cmd_constants(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let rows = constants_table(cfg)?;
    Ok(vec![write(&cfg.out, "constants.csv", &constants_to_csv(&rows))?])
}

fn summary_csv(rows: &[(&str, String)]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\nkey,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

/// `(max nodal error, lumped L² error)` of `slice` against `exact` at time `t`.
fn errors_against(grid: &SpaceTimeGrid, slice: &[f64], exact: &crate::expr::Expr, t: f64) -> (f64, f64) {
    let w = space_weights(grid);
    let (mut max, mut l2) = (0.0f64, 0.0);
    for j in 0..=grid.ny {
        for i in 0..=grid.nx {
            let k = grid.idx(i, j);
            let d = slice[k] - exact.eval(grid.x(i), grid.y(j), t);
            max = max.max(d.abs());
            l2 += w[k] * d * d;
        }
    }
    (max, l2.sqrt())
}

fn cmd_solve(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let inst = cfg.instance()?;
    let (u, stats) = solve_with_stats(&inst, &cfg.solver)?;
    let res = weak_residual(&inst, &u)?;
    let sol = cfg.out.join("solution.csv");
    write_csv(&sol, &u)?;
    let mut rows = vec![
        ("command", "solve".to_string()),
        ("steps", inst.grid.nt.to_string()),
        ("newton_iterations", stats.newton_iterations.iter().sum::<usize>().to_string()),
        ("max_newton_iterations", stats.newton_iterations.iter().max().copied().unwrap_or(0).to_string()),
        ("max_residual", stats.max_residual.to_string()),
        ("weak_residual", res.to_string()),
        ("newton_tol", cfg.solver.newton_tol.to_string()),
    ];
    if let Some(ex) = &cfg.problem.exact {
        let g = inst.grid;
        let (max, l2) = errors_against(&g, u.slice(g.nt), &ex.expr, g.t_final);
        rows.push(("final_max_error", max.to_string()));
        rows.push(("final_l2_error", l2.to_string()));
    }
    let summary = write(&cfg.out, "solve_summary.csv", &summary_csv(&rows))?;
    Ok(vec![sol, summary])
}

fn cmd_solve_steady(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let inst = cfg.steady_instance()?;
    let mut rows = vec![("command", "solve-steady".to_string())];
    let u: GridFunction = match cfg.method {
        SteadyMethod::Monotone => {
            rows.push(("method", "monotone".into()));
            solve_monotone(&inst, &cfg.solver)?
        }
        SteadyMethod::Contraction => {
            let ed = inst.ellipticity()?;
            let m = mp(cfg, &inst.grid)?;
            let (u, trace) = solve_contraction(&inst, &ed, m, &cfg.solver, cfg.max_iter)?;
            rows.push(("method", "contraction".into()));
            rows.push(("mp", m.to_string()));
            rows.push(("iterations", trace.iterations().to_string()));
            rows.push(("tail_ratio", trace.tail_ratio().map_or("none".into(), |r| r.to_string())));
            u
        }
    };
    rows.push(("residual", steady_residual(&inst, &u)?.to_string()));
    rows.push(("newton_tol", cfg.solver.newton_tol.to_string()));
    if let Some(ex) = &cfg.problem.exact {
        let (max, l2) = errors_against(&inst.grid, u.values(), &ex.expr, 0.0);
        rows.push(("max_error", max.to_string()));
        rows.push(("l2_error", l2.to_string()));
    }
    let sol = cfg.out.join("steady_solution.csv");
    write_csv(&sol, &u)?;
    let summary = write(&cfg.out, "steady_summary.csv", &summary_csv(&rows))?;
    Ok(vec![sol, summary])
}

fn cmd_verify(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let outcome = run_campaign(&cfg.verify)?;
    let report = write(&cfg.out, "report.csv", &reports_to_csv(&outcome.reports))?;
    let groups = serde_json::to_value(outcome.summary()).map_err(|e| CliError::Usage(e.to_string()))?;
    let failed: Vec<&str> = outcome
        .reports
        .iter()
        .filter(|r| !r.informational && !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    let doc = serde_json::json!({
        "format": "estimate-summary v1",
        "seed": cfg.verify.seed,
        "reports": outcome.reports.len(),
        "failed": failed.len(),
        "all_pass": outcome.all_pass(),
        "k_trace": outcome.k_trace,
        "mp": outcome.mp,
        "groups": groups,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Usage(e.to_string()))? + "\n";
    let summary = write(&cfg.out, "summary.json", &text)?;
    Ok(vec![report, summary])
}

/// `points` log-spaced values in `[from, to]`.
fn log_range(from: f64, to: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(from > 0.0 && to > from && to.is_finite()) || points < 2 {
        return Err(CliError::Usage(format!(
            "empty sweep range: need 0 < from < to and points >= 2, got from={from}, to={to}, points={points}"
        )));
    }
    let (a, b) = (from.ln(), to.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

fn series(kind: &str, columns: &str, data: &[(f64, f64)], extra: Option<String>) -> String {
    let mut s = format!("{SWEEP_HEADER} {kind}\n");
    if let Some(e) = extra {
        let _ = writeln!(s, "# {e}");
    }
    let _ = writeln!(s, "{columns}");
    for (x, y) in data {
        let _ = writeln!(s, "{x},{y}");
    }
    s
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sw = &cfg.sweep;
    let kind = sw
        .kind
        .ok_or_else(|| CliError::Usage("[sweep] kind must be one of nu0, mesh, eps_cap".into()))?;
    match kind {
        SweepKind::Nu0 => {
            let xs = log_range(sw.from, sw.to, sw.points)?;
            let inst = cfg.instance()?;
            let ed = inst.ellipticity()?;
            let k = k_trace(cfg, &inst.grid)?;
            let (p, variant, t_final) = (sw.p, cfg.params.variant, inst.grid.t_final);
            let dn = variant_data_norms(&inst, p, k, RULE, variant)?;
            let data = xs
                .iter()
                .map(|&nu0| {
                    let g = energy_functional(p, 2, &ed, nu0, &dn, variant)?;
                    Ok((nu0, g * (growth_exponent(p, nu0, variant) * t_final).exp()))
                })
                .collect::<Result<Vec<_>, CoreError>>()?;
            let setting = EnergySetting {
                variant,
                ..EnergySetting::new(p, 2, t_final)
            };
            let (nu_opt, v_opt) = optimize_nu0(&setting, &ed, &dn)?;
            let text = series("nu0", "nu0,sup_bound", &data, Some(format!("optimum nu0={nu_opt} sup_bound={v_opt}")));
            Ok(vec![write(&cfg.out, "sweep_nu0.csv", &text)?])
        }
        SweepKind::EpsCap => {
            let xs = log_range(sw.from, sw.to, sw.points)?;
            let ge = GehringExponents::gradient_reverse_holder(2);
            let data = xs
                .iter()
                .map(|&b| {
                    let ups = gehring_upsilon(b, &ge, UpsilonVariant::NoPhi)?;
                    Ok((ups, gradient_epsilon_admissible(cfg.params.fp.delta, 2, ups)?.sup))
                })
                .collect::<Result<Vec<_>, CoreError>>()?;
            let text = series("eps_cap", "upsilon,eps_cap", &data, None);
            Ok(vec![write(&cfg.out, "sweep_eps_cap.csv", &text)?])
        }
        SweepKind::Mesh => mesh_sweep(cfg),
    }
}

/// Energy margins of the configured instance on each mesh of `[sweep] meshes`.
fn mesh_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let sw = &cfg.sweep;
    if sw.meshes.is_empty() || sw.meshes.contains(&0) {
        return Err(CliError::Usage("empty sweep range: [sweep] meshes needs positive sizes".into()));
    }
    let d = cfg.domain;
    let mut k = None;
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for &n in &sw.meshes {
        let ny = (n * d.ny).div_ceil(d.nx).max(1);
        let nt = (n * d.nt).div_ceil(d.nx).max(1);
        let grid = SpaceTimeGrid::new(d.lx, d.ly, n, ny, d.t_final, nt, d.gamma)?;
        let inst = cfg.instance_on(&grid)?;
        let kt = match k {
            Some(v) => v,
            None => *k.insert(k_trace(cfg, &grid)?),
        };
        let fp = free_parameters(cfg, &inst)?;
        let (u, _) = solve_with_stats(&inst, &cfg.solver)?;
        let check = EnergyCheck {
            tol: cfg.verify.energy_tol,
            ..EnergyCheck::new(sw.p, kt)
        };
        let h = grid.hx().max(grid.hy());
        for r in verify_energy(&inst, &u, &fp, &check)? {
            match curves.iter_mut().find(|(name, _)| *name == r.name) {
                Some((_, c)) => c.push((h, r.margin)),
                None => curves.push((r.name.clone(), vec![(h, r.margin)])),
            }
        }
    }
    curves
        .iter()
        .map(|(name, data)| {
            let text = series(&format!("mesh {name}"), "h,margin", data, None);
            write(&cfg.out, &format!("sweep_mesh_{name}.csv"), &text)
        })
        .collect()
}

/// Reads a two-column sweep file back.
pub fn read_series(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    if !text.starts_with(SWEEP_HEADER) {
        return Err(CliError::Usage("not a sweep file".into()));
    }
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').ok_or_else(|| CliError::Usage(format!("bad row '{l}'")))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{s}'")));
            Ok((num(a)?, num(b)?))
        })
        .collect()
}
