//! Implicit Euler / bilinear element solver for
//!
//! ```text
//! ∂ₜu − ∇·(A∇u − 𝐟) = f            in Ω × (0,T)
//! (A∇u − 𝐟)·n = h − β|u|^{ℓ−2}u     on Γ
//! (A∇u − 𝐟)·n = 0                   on ∂Ω \ Γ
//! ```
//!
//! Each time step solves the nonlinear system by Newton's method. The
//! boundary integral is lumped onto the `Γ` nodes, so the nonlinearity is
//! diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::EllipticityData;
use crate::fem::{norm2, pcg, CoefficientField, Csr, Operators};
use crate::meshfields::{GridFunction, SpaceTimeGrid};

/// `b(x, s) = β(x)|s|^{ℓ−2}`, with `β` sampled at the nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLaw {
    pub ell: f64,
    pub beta: Vec<f64>,
}

impl BoundaryLaw {
    pub fn constant(grid: &SpaceTimeGrid, ell: f64, beta: f64) -> Self {
        Self {
            ell,
            beta: vec![beta; grid.space_len()],
        }
    }

    pub fn from_fn(grid: &SpaceTimeGrid, ell: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let beta = GridFunction::space_from_fn(*grid, f)?.into_values();
        Ok(Self { ell, beta })
    }

    /// `(min, max)` of `β` over the `Γ` nodes, `(0, 0)` when `Γ` is empty.
    pub fn range_on_gamma(&self, grid: &SpaceTimeGrid) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                if grid.on_gamma(i, j) {
                    let b = self.beta[grid.idx(i, j)];
                    lo = lo.min(b);
                    hi = hi.max(b);
                }
            }
        }
        if lo.is_infinite() {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    fn validate(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if !(self.ell >= 2.0 && self.ell.is_finite()) {
            return Err(Error::domain(format!("need ell >= 2, got {}", self.ell)));
        }
        if self.beta.len() != grid.space_len() {
            return Err(Error::shape("boundary coefficient does not match the grid"));
        }
        if self.beta.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(Error::domain("boundary coefficient must be finite and >= 0"));
        }
        Ok(())
    }

    /// `b(s)s` at a node.
    pub fn flux(&self, node: usize, s: f64) -> f64 {
        self.beta[node] * self.flux_unit(s)
    }

    /// `|s|^{ℓ−2}s`.
    pub fn flux_unit(&self, s: f64) -> f64 {
        pow_signed(s, self.ell)
    }
}

/// Full description of a time-dependent problem.
///
/// Data fields may be space-only (constant in time) or space-time.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub grid: SpaceTimeGrid,
    pub coef: CoefficientField,
    pub law: BoundaryLaw,
    pub fvec_x: GridFunction,
    pub fvec_y: GridFunction,
    pub f: GridFunction,
    pub h: GridFunction,
    pub u0: GridFunction,
}

impl ProblemInstance {
    /// Zero data and zero initial value.
    pub fn homogeneous(grid: SpaceTimeGrid, coef: CoefficientField, law: BoundaryLaw) -> Self {
        let z = GridFunction::zeros_space(grid);
        Self {
            grid,
            coef,
            law,
            fvec_x: z.clone(),
            fvec_y: z.clone(),
            f: z.clone(),
            h: z.clone(),
            u0: z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.coef.fits(&self.grid) {
            return Err(Error::shape("coefficient field does not match the grid"));
        }
        self.law.validate(&self.grid)?;
        for (name, d) in [
            ("fvec_x", &self.fvec_x),
            ("fvec_y", &self.fvec_y),
            ("f", &self.f),
            ("h", &self.h),
        ] {
            if !d.grid().same_space(&self.grid) {
                return Err(Error::shape(format!("{name} lives on a different mesh")));
            }
            if d.is_time_dependent() && d.grid().nt != self.grid.nt {
                return Err(Error::shape(format!("{name} has a different number of time levels")));
            }
        }
        if self.u0.is_time_dependent() || !self.u0.grid().same_space(&self.grid) {
            return Err(Error::shape("u0 must be a space-only function on the mesh"));
        }
        Ok(())
    }

    /// Structural constants read off the sampled coefficients.
    pub fn ellipticity(&self) -> Result<EllipticityData> {
        let (a_lo, a_hi) = self.coef.eigen_bounds();
        let (b_lo, b_hi) = self.law.range_on_gamma(&self.grid);
        EllipticityData::new(a_lo, a_hi, b_lo, b_hi, self.law.ell)
    }

    /// Space-time view of the flux datum magnitude `|𝐟|`.
    pub fn fvec_magnitude(&self) -> Result<GridFunction> {
        self.fvec_x.zip_with(&self.fvec_y, f64::hypot)
    }
}

pub(crate) fn data_slice(g: &GridFunction, k: usize) -> &[f64] {
    if g.is_time_dependent() {
        g.slice(k)
    } else {
        g.slice(0)
    }
}

/// Expands a possibly time-independent datum to all levels of `grid`.
pub fn expand_in_time(g: &GridFunction, grid: &SpaceTimeGrid) -> Result<GridFunction> {
    if g.is_time_dependent() {
        return Ok(g.clone());
    }
    let slices: Vec<Vec<f64>> = (0..grid.levels()).map(|_| g.values().to_vec()).collect();
    GridFunction::from_slices(*grid, &slices)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Newton stops once the residual is below `newton_tol·(1 + ‖u‖)`.
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Relative tolerance of the inner conjugate-gradient solves.
    pub linear_tol: f64,
    /// Initial Newton step length in `(0, 1]`.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            newton_max: 50,
            linear_tol: 1e-12,
            damping: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(Error::param("solver tolerances must be positive"));
        }
        if self.newton_max == 0 {
            return Err(Error::param("newton_max must be >= 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::param("damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Regularization of `|u|` inside the Newton derivative.
const EPS_REG: f64 = 1e-12;

/// Minimizes `½uᵀSu + Σ cᵢ|uᵢ|^ℓ/ℓ − rhsᵀu` by Newton's method with
/// backtracking; the gradient of that energy is the system residual.
pub(crate) struct NewtonProblem<'a> {
    pub s: &'a Csr,
    pub c: &'a [f64],
    pub ell: f64,
    pub rhs: &'a [f64],
}

pub(crate) struct NewtonOutcome {
    pub iterations: usize,
    pub residual: f64,
}

impl NewtonProblem<'_> {
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.s.mul(u);
        for i in 0..u.len() {
            if self.c[i] != 0.0 {
                r[i] += self.c[i] * pow_signed(u[i], self.ell);
            }
            r[i] -= self.rhs[i];
        }
        r
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.5 * self.s.form(u, u);
        for i in 0..u.len() {
            if self.c[i] != 0.0 {
                e += self.c[i] * u[i].abs().powf(self.ell) / self.ell;
            }
            e -= self.rhs[i] * u[i];
        }
        e
    }

    /// `scale` converts `‖R‖₂` into the reported residual; `norm` measures `u`.
    pub fn solve(
        &self,
        u: &mut [f64],
        opts: &SolverOptions,
        scale: f64,
        norm: impl Fn(&[f64]) -> f64,
    ) -> std::result::Result<NewtonOutcome, NewtonOutcome> {
        let n = u.len();
        let max_cg = 20 * n + 200;
        let mut r = self.residual(u);
        let mut res = norm2(&r) * scale;
        let mut delta = vec![0.0; n];
        let mut shift = vec![0.0; n];
        for it in 0..opts.newton_max {
            if res <= opts.newton_tol * (1.0 + norm(u)) {
                return Ok(NewtonOutcome {
                    iterations: it,
                    residual: res,
                });
            }
            for i in 0..n {
                shift[i] = if self.c[i] != 0.0 {
                    let a = (u[i] * u[i] + EPS_REG * EPS_REG).sqrt();
                    self.c[i] * (self.ell - 1.0) * a.powf(self.ell - 2.0)
                } else {
                    0.0
                };
            }
            let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
            delta.iter_mut().for_each(|d| *d = 0.0);
            if pcg(self.s, Some(&shift), &neg_r, &mut delta, opts.linear_tol, max_cg).is_err() {
                return Err(NewtonOutcome {
                    iterations: it,
                    residual: res,
                });
            }
            let e0 = self.energy(u);
            let slope = crate::fem::dot(&r, &delta);
            let mut alpha = opts.damping;
            let mut trial = vec![0.0; n];
            let mut accepted = false;
            for _ in 0..40 {
                for i in 0..n {
                    trial[i] = u[i] + alpha * delta[i];
                }
                let r_new = self.residual(&trial);
                let res_new = norm2(&r_new) * scale;
                if res_new < res || self.energy(&trial) <= e0 + 1e-4 * alpha * slope {
                    u.copy_from_slice(&trial);
                    r = r_new;
                    res = res_new;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(NewtonOutcome {
                    iterations: it + 1,
                    residual: res,
                });
            }
        }
        if res <= opts.newton_tol * (1.0 + norm(u)) {
            return Ok(NewtonOutcome {
                iterations: opts.newton_max,
                residual: res,
            });
        }
        Err(NewtonOutcome {
            iterations: opts.newton_max,
            residual: res,
        })
    }
}

fn pow_signed(s: f64, ell: f64) -> f64 {
    if ell == 2.0 {
        s
    } else {
        s.abs().powf(ell - 2.0) * s
    }
}

/// Per-step Newton statistics of a solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub newton_iterations: Vec<usize>,
    pub max_residual: f64,
}

pub fn solve(inst: &ProblemInstance, opts: &SolverOptions) -> Result<GridFunction> {
    solve_with_stats(inst, opts).map(|(u, _)| u)
}

struct StepSystem {
    ops: Operators,
    lhs: Csr,
    dt: f64,
}

impl StepSystem {
    fn new(inst: &ProblemInstance) -> Result<Self> {
        let ops = Operators::new(&inst.grid, &inst.coef)?;
        let dt = inst.grid.dt();
        let lhs = ops.mass.combine(1.0, &ops.stiff, dt);
        Ok(Self { ops, lhs, dt })
    }

    fn boundary_coeffs(&self, inst: &ProblemInstance) -> Vec<f64> {
        self.ops
            .gamma_w
            .iter()
            .zip(&inst.law.beta)
            .map(|(w, b)| self.dt * w * b)
            .collect()
    }

    fn rhs(&self, inst: &ProblemInstance, prev: &[f64], k: usize) -> Vec<f64> {
        let load = self.ops.load(
            data_slice(&inst.f, k),
            data_slice(&inst.fvec_x, k),
            data_slice(&inst.fvec_y, k),
            data_slice(&inst.h, k),
        );
        let mut rhs = self.ops.mass.mul(prev);
        for (r, l) in rhs.iter_mut().zip(load) {
            *r += self.dt * l;
        }
        rhs
    }
}

/// Initial level: the `L²` projection of `u₀` onto the element space equals
/// its nodal interpolant here, since `u₀` is given by nodal values.
pub fn solve_with_stats(inst: &ProblemInstance, opts: &SolverOptions) -> Result<(GridFunction, SolveStats)> {
    inst.validate()?;
    opts.validate()?;
    let sys = StepSystem::new(inst)?;
    let c = sys.boundary_coeffs(inst);
    let scale = 1.0 / (inst.grid.hx() * inst.grid.hy()).sqrt();
    let mut slices: Vec<Vec<f64>> = Vec::with_capacity(inst.grid.levels());
    slices.push(inst.u0.values().to_vec());
    let mut stats = SolveStats::default();
    for k in 1..=inst.grid.nt {
        let prev = &slices[k - 1];
        let rhs = sys.rhs(inst, prev, k);
        let problem = NewtonProblem {
            s: &sys.lhs,
            c: &c,
            ell: inst.law.ell,
            rhs: &rhs,
        };
        let mut u = prev.clone();
        match problem.solve(&mut u, opts, scale, |v| sys.ops.l2(v)) {
            Ok(out) => {
                stats.newton_iterations.push(out.iterations);
                stats.max_residual = stats.max_residual.max(out.residual);
            }
            Err(out) => {
                return Err(Error::NewtonNonConvergence {
                    step: k,
                    iterations: out.iterations,
                    residual: out.residual,
                })
            }
        }
        slices.push(u);
    }
    Ok((GridFunction::from_slices(inst.grid, &slices)?, stats))
}

/// Largest per-step residual of the discrete equations at `u`, in the same
/// scaled norm the Newton loop uses. Level 0 is compared with `u₀`.
pub fn weak_residual(inst: &ProblemInstance, u: &GridFunction) -> Result<f64> {
    inst.validate()?;
    if !u.is_time_dependent() || u.grid() != &inst.grid {
        return Err(Error::shape("u must be a space-time function on the instance grid"));
    }
    let sys = StepSystem::new(inst)?;
    let c = sys.boundary_coeffs(inst);
    let diff: Vec<f64> = u.slice(0).iter().zip(inst.u0.values()).map(|(a, b)| a - b).collect();
    let mut worst = sys.ops.residual_measure(&sys.ops.mass.mul(&diff));
    for k in 1..=inst.grid.nt {
        let rhs = sys.rhs(inst, u.slice(k - 1), k);
        let problem = NewtonProblem {
            s: &sys.lhs,
            c: &c,
            ell: inst.law.ell,
            rhs: &rhs,
        };
        let r = problem.residual(u.slice(k));
        worst = worst.max(sys.ops.residual_measure(&r));
    }
    Ok(worst)
}
