use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EstimateReport;
use crate::error::{Error, Result};
use crate::estimates::{
    caccioppoli_lhs_factor, caccioppoli_rhs, epsilon_admissible, gehring_upsilon,
    poincare_sobolev_constant, CaccioppoliNorms, FreeParameters, GehringExponents,
    UpsilonVariant,
};
use crate::meshfields::{
    cube_restrict, lp_norm, q1_gradient_lp, q1_gradient_slice_lp, space_integral, space_weights,
    time_reflect, weighted_mean_u, Edge, EdgeSet, GridFunction, ParabolicCube, Region,
    SmoothField, SpaceTimeGrid, StieltjesFn, TimeRule,
};
use crate::parabolic::{expand_in_time, ProblemInstance};

/// How many random cubes of each branch to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeChoice {
    /// Cubes whose closure stays at least one cell away from `Γ`.
    pub interior: usize,
    /// Cubes whose closure meets `Γ`.
    pub boundary: usize,
}

impl CubeChoice {
    /// Random node-centred cubes with radius `m·h` (`h = min(hx, hy)`,
    /// `m ∈ {2, 4}`), `R² < T` and `(R/2)² ≥ dt` so the inner cube holds at
    /// least two time levels.
    pub fn draw(&self, grid: &SpaceTimeGrid, seed: u64) -> Result<Vec<ParabolicCube>> {
        let h = grid.hx().min(grid.hy());
        let radii: Vec<f64> = [2.0, 4.0]
            .iter()
            .map(|m| m * h)
            .filter(|r| {
                r * r < grid.t_final
                    && r * r >= 4.0 * grid.dt() * (1.0 - 1e-9)
                    && 2.0 * r + 2.0 * h <= grid.lx.min(grid.ly)
            })
            .collect();
        if radii.is_empty() {
            return Err(Error::domain("grid too coarse or horizon too short for local cubes"));
        }
        if self.boundary > 0 && grid.gamma.is_empty() {
            return Err(Error::domain("boundary cubes need a nonempty Γ"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.interior + self.boundary);
        let node = |rng: &mut ChaCha8Rng, lo: f64, hi: f64, origin: f64, step: f64, n: usize| {
            let a = ((lo - origin) / step).ceil().max(0.0) as usize;
            let b = (((hi - origin) / step).floor() as usize).min(n);
            (a <= b).then(|| origin + step * rng.gen_range(a..=b) as f64)
        };
        let time = |rng: &mut ChaCha8Rng| grid.t(rng.gen_range(0..=grid.nt));
        let mut attempts = 0;
        while out.len() < self.interior {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::domain("no interior cube fits on this grid"));
            }
            let r = radii[rng.gen_range(0..radii.len())];
            let margin = |e: Edge| if grid.gamma.contains(e) { r + h } else { 0.0 };
            let x = node(&mut rng, grid.x0 + margin(Edge::Left), grid.x0 + grid.lx - margin(Edge::Right), grid.x0, grid.hx(), grid.nx);
            let y = node(&mut rng, grid.y0 + margin(Edge::Bottom), grid.y0 + grid.ly - margin(Edge::Top), grid.y0, grid.hy(), grid.ny);
            if let (Some(x), Some(y)) = (x, y) {
                let t = time(&mut rng);
                out.push(ParabolicCube::new(x, y, t, r));
            }
        }
        let edges: Vec<Edge> = grid.gamma.iter().collect();
        while out.len() < self.interior + self.boundary {
            let r = radii[rng.gen_range(0..radii.len())];
            let e = edges[rng.gen_range(0..edges.len())];
            let d = rng.gen_range(0..=((r / h).round() as usize)) as f64;
            let along_x = node(&mut rng, grid.x0, grid.x0 + grid.lx, grid.x0, grid.hx(), grid.nx).unwrap_or(grid.x0);
            let along_y = node(&mut rng, grid.y0, grid.y0 + grid.ly, grid.y0, grid.hy(), grid.ny).unwrap_or(grid.y0);
            let (x, y) = match e {
                Edge::Left => (grid.x0 + d * grid.hx(), along_y),
                Edge::Right => (grid.x0 + grid.lx - d * grid.hx(), along_y),
                Edge::Bottom => (along_x, grid.y0 + d * grid.hy()),
                Edge::Top => (along_x, grid.y0 + grid.ly - d * grid.hy()),
            };
            let t = time(&mut rng);
            out.push(ParabolicCube::new(x, y, t, r));
        }
        Ok(out)
    }
}

/// Whether `U` may be the weighted mean on this cube: the closure must stay
/// one cell away from every side in `Γ`, so the cutoff vanishes there.
fn is_interior(grid: &SpaceTimeGrid, c: &ParabolicCube) -> bool {
    let tol = 1e-9 * grid.hx().min(grid.hy());
    let r = c.radius;
    grid.gamma.iter().all(|e| match e {
        Edge::Left => c.center[0] - r - grid.x0 >= grid.hx() - tol,
        Edge::Right => grid.x0 + grid.lx - c.center[0] - r >= grid.hx() - tol,
        Edge::Bottom => c.center[1] - r - grid.y0 >= grid.hy() - tol,
        Edge::Top => grid.y0 + grid.ly - c.center[1] - r >= grid.hy() - tol,
    })
}

/// Piecewise-linear cutoff, 1 on `Q_r`, 0 outside `Q_R`.
fn cutoff(grid: &SpaceTimeGrid, c: &ParabolicCube, r: f64) -> Result<GridFunction> {
    let big = c.radius;
    GridFunction::space_from_fn(*grid, |x, y| {
        let ax = ((big - (x - c.center[0]).abs()) / (big - r)).clamp(0.0, 1.0);
        let ay = ((big - (y - c.center[1]).abs()) / (big - r)).clamp(0.0, 1.0);
        ax.min(ay)
    })
}

fn restricted_norm(g: &GridFunction, c: &ParabolicCube, region: Region) -> Result<f64> {
    let sub = cube_restrict(g, c)?;
    if region == Region::GammaTrace && sub.grid().gamma.is_empty() {
        return Ok(0.0);
    }
    lp_norm(&sub, 2.0, region, None)
}

/// Local energy inequality on each cube, with the inner radius `r = R/2`
/// and the even time reflection of `u` and of the data.
pub fn verify_caccioppoli(
    inst: &ProblemInstance,
    u: &GridFunction,
    cubes: &[ParabolicCube],
    fp: &FreeParameters,
    k_trace: f64,
    tol: f64,
) -> Result<Vec<EstimateReport>> {
    inst.validate()?;
    let g = inst.grid;
    if !u.is_time_dependent() || u.grid() != &g {
        return Err(Error::shape("u must be a space-time function on the instance grid"));
    }
    let ed = inst.ellipticity()?;
    let lhs_factor = caccioppoli_lhs_factor(&ed, fp)?;
    let ur = time_reflect(u)?;
    let rg = *ur.grid();
    let reflect = |d: &GridFunction| expand_in_time(d, &g).and_then(|e| time_reflect(&e));
    let fr = reflect(&inst.f)?;
    let fvr = reflect(&inst.fvec_magnitude()?)?;
    let hr = reflect(&inst.h)?;
    let sw = space_weights(&g);
    let tol_x = 1e-9 * g.hx().min(g.hy());

    let mut out = Vec::with_capacity(cubes.len());
    for c in cubes {
        let big = c.radius;
        let inside = c.center[0] >= g.x0 - tol_x
            && c.center[0] <= g.x0 + g.lx + tol_x
            && c.center[1] >= g.y0 - tol_x
            && c.center[1] <= g.y0 + g.ly + tol_x
            && c.t >= g.t0 - 1e-12
            && c.t <= g.t0 + g.t_final + 1e-12;
        if !(big > 0.0 && big * big < g.t_final) || !inside {
            return Err(Error::param(format!(
                "cube at ({}, {}, {}) with R = {big} needs R^2 < T and a center in the closed cylinder",
                c.center[0], c.center[1], c.t
            )));
        }
        let r = big / 2.0;
        let eta = cutoff(&g, c, r)?;
        let interior = is_interior(&g, c);
        let mean = if interior {
            weighted_mean_u(&ur, &eta)?
        } else {
            vec![0.0; ur.n_levels()]
        };
        let mut w = Vec::with_capacity(ur.values().len());
        for (k, m) in mean.iter().enumerate() {
            w.extend(ur.slice(k).iter().zip(eta.values()).map(|(v, e)| e * (v - m)));
        }
        let w = GridFunction::space_time(rg, w)?;
        let dt = rg.dt();
        let sup = (0..w.n_levels())
            .filter(|&k| (rg.t(k) - c.t).abs() <= big * big + 1e-9 * dt)
            .map(|k| sw.iter().zip(w.slice(k)).map(|(a, b)| a * b * b).sum::<f64>())
            .fold(0.0, f64::max);
        let grad = q1_gradient_lp(&cube_restrict(&ur, &c.with_radius(r))?, 2.0, TimeRule::Trapezoid)?;
        let norms = CaccioppoliNorms {
            eta_u_minus_u: restricted_norm(&w, c, Region::Interior)?,
            f: restricted_norm(&fr, c, Region::Interior)?,
            fvec: restricted_norm(&fvr, c, Region::Interior)?,
            h: restricted_norm(&hr, c, Region::GammaTrace)?,
        };
        let rhs = caccioppoli_rhs(&ed, fp, big, r, k_trace, &norms)?;
        out.push(
            EstimateReport::new("caccioppoli", sup + lhs_factor * grad * grad, rhs, tol)
                .param("branch", if interior { "interior" } else { "boundary" })
                .param("x", c.center[0])
                .param("y", c.center[1])
                .param("t", c.t)
                .param("R", big)
                .param("r", r),
        );
    }
    Ok(out)
}

/// Gap `ε` used in the local Poincaré check.
const POINCARE_EPS: f64 = 0.5;

/// Local Poincaré inequality `‖u‖₂ ≤ S/(1−ε)·‖∇u‖_{2n/(n+2)}` on a square
/// `Q_R` with `R = 0.9·ε/(2S)`, for zero-mean random fields. The constant
/// function is recorded as an informational counterexample. Only `n = 2`.
pub fn verify_poincare(n: u32, trials: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    if n != 2 {
        return Err(Error::domain(format!("the Poincaré check is implemented for n = 2 only, got {n}")));
    }
    let s = poincare_sobolev_constant(n)?;
    let radius = 0.9 * POINCARE_EPS / (2.0 * s);
    let k = s / (1.0 - POINCARE_EPS);
    let g = SpaceTimeGrid::new(2.0 * radius, 2.0 * radius, 32, 32, 1.0, 1, EdgeSet::empty())?;
    let tol = 0.02;
    let check = |name: &str, v: Vec<f64>| -> Result<EstimateReport> {
        let grad = q1_gradient_slice_lp(&g, &v, 1.0);
        let u = GridFunction::space(g, v)?;
        Ok(EstimateReport::new(name, lp_norm(&u, 2.0, Region::Interior, None)?, k * grad, tol)
            .param("n", n)
            .param("R", radius)
            .param("eps", POINCARE_EPS))
    };
    let mut out = vec![check("poincare.zero", vec![0.0; g.space_len()])?];
    let cos = GridFunction::space_from_fn(g, |x, _| (std::f64::consts::PI * x / g.lx).cos())?;
    out.push(check("poincare.cos_witness", cos.into_values())?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut v = SmoothField::random(&mut rng, 4).sample(&g);
        let mean = space_integral(&g, &v) / g.area();
        v.iter_mut().for_each(|x| *x -= mean);
        out.push(check("poincare.zero_mean", v)?);
    }
    out.push(check("poincare.constant_witness", vec![1.0; g.space_len()])?.informational());
    Ok(out)
}

fn random_step(rng: &mut ChaCha8Rng, max_breaks: usize) -> Result<StieltjesFn> {
    let count = rng.gen_range(1..=max_breaks);
    let mut b: Vec<f64> = (0..count).map(|_| 1.0 + rng.gen_range(1e-3..=9.0)).collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    let s = (0..b.len()).map(|_| rng.gen_range(0.01..=1.0)).collect();
    StieltjesFn::new(b, s)
}

/// Randomized check of the moment lemma for nonincreasing step functions.
///
/// The smallest `a` satisfying the hypothesis is computed on `{1}`, the
/// breakpoints and the geometric grid `1.05^k`. Between consecutive
/// breakpoints the hypothesis ratio decreases in `ι`, so the maximum over
/// that grid is the exact supremum.
pub fn verify_stieltjes(trials: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let h = random_step(&mut rng, 6)?;
        let m0 = rng.gen_range(0..=3);
        let hs: Vec<(StieltjesFn, f64)> = (0..m0)
            .map(|_| Ok((random_step(&mut rng, 4)?, rng.gen_range(1.0..=3.0))))
            .collect::<Result<_>>()?;
        let q = rng.gen_range(0.1..4.0);

        let mut iotas = vec![1.0];
        iotas.extend_from_slice(h.breakpoints());
        for (hi, _) in &hs {
            iotas.extend_from_slice(hi.breakpoints());
        }
        let top = h.support_max();
        let mut g = 1.05;
        while g < top {
            iotas.push(g);
            g *= 1.05;
        }
        let mut a_min: f64 = 0.0;
        for &iota in &iotas {
            let lhs = h.integral(q, iota);
            let den = iota.powf(q) * h.eval(iota) + hs.iter().map(|(hi, b)| hi.eval(iota).powf(*b)).sum::<f64>();
            if lhs > 0.0 {
                a_min = a_min.max(lhs / den);
            }
        }
        let a = a_min.max(1.0 + 1e-6);
        let upper = a * q / (a - 1.0);
        let gamma = q + rng.gen_range(0.0..0.99) * (upper - q);
        let den = a * q - (a - 1.0) * gamma;
        let tail: f64 = hs
            .iter()
            .map(|(hi, b)| hi.eval(1.0).powf(b - 1.0) * hi.integral(gamma - q, 1.0))
            .sum();
        let rhs = q / den * h.integral(q, 1.0) + a * gamma / den * tail;
        out.push(
            EstimateReport::new("stieltjes", h.integral(gamma, 1.0), rhs, 1e-9)
                .param("q", q)
                .param("a", a)
                .param("gamma", gamma)
                .param("m0", m0),
        );
    }
    Ok(out)
}

/// Piecewise constant nonnegative function on a box split into `CELLS³` cells.
struct CellField {
    lo: [f64; 3],
    width: [f64; 3],
    values: Vec<f64>,
}

const CELLS: usize = 9;

impl CellField {
    fn overlaps(&self, axis: usize, a: f64, b: f64) -> [f64; CELLS] {
        let mut o = [0.0; CELLS];
        for (c, slot) in o.iter_mut().enumerate() {
            let l = self.lo[axis] + c as f64 * self.width[axis];
            *slot = (b.min(l + self.width[axis]) - a.max(l)).max(0.0);
        }
        o
    }

    /// `∫ Φ^power` over the box `[lo, hi]`, intersected with the support.
    fn integral(&self, lo: [f64; 3], hi: [f64; 3], power: f64) -> f64 {
        let (ox, oy, ot) = (
            self.overlaps(0, lo[0], hi[0]),
            self.overlaps(1, lo[1], hi[1]),
            self.overlaps(2, lo[2], hi[2]),
        );
        let mut total = 0.0;
        for (k, wt) in ot.iter().enumerate().filter(|(_, w)| **w > 0.0) {
            for (j, wy) in oy.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                for (i, wx) in ox.iter().enumerate().filter(|(_, w)| **w > 0.0) {
                    total += wx * wy * wt * self.values[(k * CELLS + j) * CELLS + i].powf(power);
                }
            }
        }
        total
    }
}

fn cube_box(x: f64, y: f64, t: f64, r: f64) -> ([f64; 3], [f64; 3]) {
    ([x - r, y - r, t - r * r], [x + r, y + r, t + r * r])
}

/// Higher-integrability spot check in `n = 2` on `Q⁺_{R₀}` with `R₀ = 1`,
/// `z₀ = 0` and a random piecewise constant `Φ`, with `F = G = φ = 0`.
///
/// `B` is the largest hypothesis ratio (with `α = 1/2`) over the admissible
/// cubes whose center and radius lie on the lattice of the cells, so it is a
/// lower estimate of the best constant. `ε` is half the admissible cap, and
/// the conclusion is checked on `ω = Q_{R₀/2}` (`β = 1/2`).
pub fn gehring_spot_check(trials: usize, seed: u64) -> Result<Vec<EstimateReport>> {
    let n = 2.0;
    let (r0, beta, alpha) = (1.0f64, 0.5f64, 0.5f64);
    let ge = GehringExponents::gradient_reverse_holder(2);
    let p = ge.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = r0 / CELLS as f64;
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let phi = CellField {
            lo: [-r0, 0.0, -r0 * r0],
            width: [2.0 * r0 / CELLS as f64, r0 / CELLS as f64, 2.0 * r0 * r0 / CELLS as f64],
            values: (0..CELLS * CELLS * CELLS).map(|_| (2.0 * rng.gen_range(-1.0..1.0f64)).exp()).collect(),
        };
        let mut b = 0.0f64;
        let inner = 1.0 - 1e-12;
        for ri in 1..=CELLS {
            let r = ri as f64 * step;
            for ti in 1..2 * CELLS {
                let t = -r0 * r0 + ti as f64 * r0 * r0 / CELLS as f64;
                if t.abs() + r * r >= inner * r0 * r0 {
                    continue;
                }
                for yi in 1..2 * CELLS {
                    let y = -r0 + yi as f64 * step;
                    if y.abs() + r >= inner * r0 || y.abs() >= r {
                        continue;
                    }
                    for xi in 1..2 * CELLS {
                        let x = -r0 + xi as f64 * step;
                        if x.abs() + r >= inner * r0 {
                            continue;
                        }
                        let scale = r.powf(n + 2.0);
                        let (lo, hi) = cube_box(x, y, t, alpha * r);
                        let top = phi.integral(lo, hi, p) / scale;
                        let (lo, hi) = cube_box(x, y, t, r);
                        let mean = phi.integral(lo, hi, 1.0) / scale;
                        if mean > 0.0 {
                            b = b.max(top / mean.powf(p));
                        }
                    }
                }
            }
        }
        let upsilon = gehring_upsilon(b, &ge, UpsilonVariant::NoPhi)?;
        let eps = epsilon_admissible(1.0, p, upsilon)?.sup / 2.0;
        let (lo, hi) = cube_box(0.0, 0.0, 0.0, (1.0 - beta) * r0);
        let lhs = phi.integral(lo, hi, p + eps);
        let (lo, hi) = cube_box(0.0, 0.0, 0.0, r0);
        let norm_p = phi.integral(lo, hi, p).powf(1.0 / p);
        let rhs = beta.powf(-(n + 2.0) * (1.0 + eps / p)) / (p - 1.0 - (upsilon - 1.0) * eps)
            * (p - 1.0)
            / r0.powf((n + 2.0) * eps / p)
            * norm_p.powf(p + eps);
        out.push(
            EstimateReport::new("gehring.higher_integrability", lhs, rhs, 1e-9)
                .param("B", b)
                .param("upsilon", upsilon)
                .param("eps", eps),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::CoefficientField;
    use crate::parabolic::{solve, BoundaryLaw, SolverOptions};

    #[test]
    fn poincare_campaign_and_witnesses() {
        let reps = verify_poincare(2, 20, 1).unwrap();
        let graded: Vec<_> = reps.iter().filter(|r| !r.informational).collect();
        assert!(graded.iter().all(|r| r.pass), "{graded:?}");
        let w = reps.iter().find(|r| r.name == "poincare.constant_witness").unwrap();
        assert!(w.informational && !w.pass && w.margin.is_infinite());
        assert_eq!(reps[0].margin, 0.0);
        assert!(verify_poincare(3, 1, 1).is_err());
    }

    #[test]
    fn single_atom_stieltjes_is_tight() {
        // one jump, no H: both sides equal b^γ when a is exact.
        let h = StieltjesFn::new(vec![3.0], vec![0.5]).unwrap();
        let q = 1.5;
        let a = h.integral(q, 1.0) / (1.0 * h.eval(1.0));
        let gamma = q;
        let rhs = q / (a * q - (a - 1.0) * gamma) * h.integral(q, 1.0);
        assert!((rhs - h.integral(gamma, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn stieltjes_campaign_passes() {
        let reps = verify_stieltjes(200, 7).unwrap();
        assert!(reps.iter().all(|r| r.pass), "{:?}", reps.iter().find(|r| !r.pass));
    }

    #[test]
    fn cell_field_integrates_exactly() {
        let f = CellField {
            lo: [0.0; 3],
            width: [1.0; 3],
            values: vec![2.0; CELLS * CELLS * CELLS],
        };
        assert!((f.integral([0.5, 0.5, 0.5], [2.0, 1.0, 3.0], 2.0) - 4.0 * 1.5 * 0.5 * 2.5).abs() < 1e-12);
        assert_eq!(f.integral([-3.0, 0.0, 0.0], [-1.0, 1.0, 1.0], 1.0), 0.0);
    }

    #[test]
    fn gehring_spot_check_runs() {
        let reps = gehring_spot_check(1, 3).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(reps[0].get("B").unwrap().parse::<f64>().unwrap() > 0.0);
        assert!(reps[0].pass, "{:?}", reps[0]);
    }

    #[test]
    fn caccioppoli_zero_and_smooth() {
        let g = SpaceTimeGrid::unit_square(16, 0.25, 128).unwrap();
        let zero = ProblemInstance::homogeneous(g, CoefficientField::identity(&g), BoundaryLaw::constant(&g, 3.0, 1.0));
        let u = solve(&zero, &SolverOptions::default()).unwrap();
        let fp0 = FreeParameters::defaults(2).with_data_support(false, false, false);
        let cubes = CubeChoice { interior: 3, boundary: 3 }.draw(&g, 5).unwrap();
        let reps = verify_caccioppoli(&zero, &u, &cubes, &fp0, 2.0, 0.05).unwrap();
        assert!(reps.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));

        let mut inst = zero.clone();
        inst.u0 = GridFunction::space_from_fn(g, |x, y| (3.0 * x).sin() + y * y).unwrap();
        inst.h = GridFunction::space_from_fn(g, |x, _| 1.0 + x).unwrap();
        let u = solve(&inst, &SolverOptions::default()).unwrap();
        let fp = FreeParameters::defaults(2).with_data_support(false, false, true);
        let reps = verify_caccioppoli(&inst, &u, &cubes, &fp, 2.0, 0.05).unwrap();
        assert_eq!(reps.iter().filter(|r| r.get("branch") == Some("interior")).count(), 3);
        assert!(reps.iter().all(|r| r.pass && r.margin > 0.0), "{reps:?}");
    }

    #[test]
    fn cube_draw_respects_branches() {
        let g = SpaceTimeGrid::unit_square(16, 0.25, 64).unwrap();
        let cubes = CubeChoice { interior: 10, boundary: 10 }.draw(&g, 2).unwrap();
        let coarse = SpaceTimeGrid::unit_square(16, 0.25, 8).unwrap();
        assert!(CubeChoice { interior: 1, boundary: 0 }.draw(&coarse, 2).is_err());
        assert_eq!(cubes.iter().filter(|c| is_interior(&g, c)).count(), 10);
        let too_long = ParabolicCube::new(0.5, 0.5, 0.1, 0.6);
        let zero = ProblemInstance::homogeneous(g, CoefficientField::identity(&g), BoundaryLaw::constant(&g, 2.0, 1.0));
        let u = solve(&zero, &SolverOptions::default()).unwrap();
        let fp = FreeParameters::defaults(2).with_data_support(false, false, false);
        assert!(verify_caccioppoli(&zero, &u, &[too_long], &fp, 2.0, 0.05).is_err());
    }
}
