//! Steady problem
//!
//! ```text
//! −∇·(A∇u − 𝐟) = f             in Ω
//! (A∇u − 𝐟)·n = h − β|u|^{ℓ−2}u  on Γ
//! (A∇u − 𝐟)·n = 0               on ∂Ω \ Γ
//! ```
//!
//! solved either by Newton's method on the convex energy or, for `ℓ = 2`,
//! by the relaxed fixed-point iteration `u ↦ (−Δ^R)⁻¹(tF + (−Δ^R − tL)u)`
//! where `−Δ^R` is the Robin-Laplacian `∫∇w·∇v + ∫_Γ wv`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{contraction_data, EllipticityData};
use crate::fem::{dot, pcg, CoefficientField, Csr, Operators};
use crate::meshfields::{q1_gradient_slice_lp, GridFunction, SmoothField, SpaceTimeGrid};
use crate::parabolic::{BoundaryLaw, NewtonProblem, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyInstance {
    /// Only the spatial part of the grid is used.
    pub grid: SpaceTimeGrid,
    pub coef: CoefficientField,
    pub law: BoundaryLaw,
    pub fvec_x: GridFunction,
    pub fvec_y: GridFunction,
    pub f: GridFunction,
    pub h: GridFunction,
}

impl SteadyInstance {
    pub fn homogeneous(grid: SpaceTimeGrid, coef: CoefficientField, law: BoundaryLaw) -> Self {
        let z = GridFunction::zeros_space(grid);
        Self {
            grid,
            coef,
            law,
            fvec_x: z.clone(),
            fvec_y: z.clone(),
            f: z.clone(),
            h: z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !self.coef.fits(&self.grid) {
            return Err(Error::shape("coefficient field does not match the grid"));
        }
        if !(self.law.ell >= 2.0 && self.law.ell.is_finite()) {
            return Err(Error::domain(format!("need ell >= 2, got {}", self.law.ell)));
        }
        if self.law.beta.len() != self.grid.space_len() {
            return Err(Error::shape("boundary coefficient does not match the grid"));
        }
        for (name, d) in [
            ("fvec_x", &self.fvec_x),
            ("fvec_y", &self.fvec_y),
            ("f", &self.f),
            ("h", &self.h),
        ] {
            if d.is_time_dependent() || !d.grid().same_space(&self.grid) {
                return Err(Error::shape(format!("{name} must be a space-only function on the mesh")));
            }
        }
        // Without an absorbing boundary the operator has constants in its kernel.
        if self.law.range_on_gamma(&self.grid).1 <= 0.0 {
            return Err(Error::domain("the steady problem needs a nonempty Γ with β > 0 somewhere"));
        }
        Ok(())
    }

    pub fn ellipticity(&self) -> Result<EllipticityData> {
        let (a_lo, a_hi) = self.coef.eigen_bounds();
        let (b_lo, b_hi) = self.law.range_on_gamma(&self.grid);
        EllipticityData::new(a_lo, a_hi, b_lo, b_hi, self.law.ell)
    }

    fn load(&self, ops: &Operators) -> Vec<f64> {
        ops.load(self.f.values(), self.fvec_x.values(), self.fvec_y.values(), self.h.values())
    }

    fn boundary_coeffs(&self, ops: &Operators) -> Vec<f64> {
        ops.gamma_w.iter().zip(&self.law.beta).map(|(w, b)| w * b).collect()
    }
}

fn newton_err(out: crate::parabolic::NewtonOutcome) -> Error {
    Error::NewtonNonConvergence {
        step: 0,
        iterations: out.iterations,
        residual: out.residual,
    }
}

/// Newton's method, started from the solution of the `ℓ = 2` problem.
pub fn solve_monotone(inst: &SteadyInstance, opts: &SolverOptions) -> Result<GridFunction> {
    inst.validate()?;
    opts.validate()?;
    let ops = Operators::new(&inst.grid, &inst.coef)?;
    let c = inst.boundary_coeffs(&ops);
    let rhs = inst.load(&ops);
    let scale = 1.0 / (inst.grid.hx() * inst.grid.hy()).sqrt();
    let mut u = vec![0.0; inst.grid.space_len()];
    let linear = NewtonProblem {
        s: &ops.stiff,
        c: &c,
        ell: 2.0,
        rhs: &rhs,
    };
    linear.solve(&mut u, opts, scale, |v| ops.l2(v)).map_err(newton_err)?;
    if inst.law.ell != 2.0 {
        let full = NewtonProblem {
            s: &ops.stiff,
            c: &c,
            ell: inst.law.ell,
            rhs: &rhs,
        };
        full.solve(&mut u, opts, scale, |v| ops.l2(v)).map_err(newton_err)?;
    }
    GridFunction::space(inst.grid, u)
}

/// Scaled residual of the discrete steady equations at `u`.
pub fn steady_residual(inst: &SteadyInstance, u: &GridFunction) -> Result<f64> {
    inst.validate()?;
    if u.is_time_dependent() || !u.grid().same_space(&inst.grid) {
        return Err(Error::shape("u must be a space-only function on the mesh"));
    }
    let ops = Operators::new(&inst.grid, &inst.coef)?;
    let c = inst.boundary_coeffs(&ops);
    let mut r = ops.stiff.mul(u.values());
    for (i, ri) in r.iter_mut().enumerate() {
        *ri += c[i] * inst.law.flux_unit(u.values()[i]);
    }
    for (ri, fi) in r.iter_mut().zip(inst.load(&ops)) {
        *ri -= fi;
    }
    Ok(ops.residual_measure(&r))
}

/// Robin-Laplacian `∫∇w·∇v + ∫_Γ wv` and the pieces of the norm
/// `‖v‖ = ‖∇v‖_p + ‖v‖_{2,Γ}`.
#[derive(Clone, Debug)]
pub struct RobinOperator {
    pub grid: SpaceTimeGrid,
    pub matrix: Csr,
    pub laplace: Csr,
    pub gamma_w: Vec<f64>,
    pub mass: Csr,
}

impl RobinOperator {
    pub fn new(grid: &SpaceTimeGrid) -> Result<Self> {
        if grid.gamma.is_empty() {
            return Err(Error::domain("the Robin-Laplacian needs a nonempty Γ"));
        }
        let ops = Operators::new(grid, &CoefficientField::identity(grid))?;
        let mut matrix = ops.stiff.clone();
        matrix.add_diagonal(&ops.gamma_w);
        Ok(Self {
            grid: *grid,
            matrix,
            laplace: ops.stiff,
            gamma_w: ops.gamma_w,
            mass: ops.mass,
        })
    }

    pub fn trace_l2(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.gamma_w).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
    }

    /// `‖∇v‖_p + ‖v‖_{2,Γ}`; for `p = 2` the gradient part is exact.
    pub fn norm(&self, v: &[f64], p: f64) -> f64 {
        let g = if p == 2.0 {
            self.laplace.form(v, v).max(0.0).sqrt()
        } else {
            q1_gradient_slice_lp(&self.grid, v, p).powf(1.0 / p)
        };
        g + self.trace_l2(v)
    }

    pub fn solve(&self, rhs: &[f64], x: &mut [f64], tol: f64) -> Result<usize> {
        let max = 20 * rhs.len() + 200;
        pcg(&self.matrix, None, rhs, x, tol, max)
    }
}

/// Diagnostics of a fixed-point run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionTrace {
    /// `‖u_k‖` after each update.
    pub iterate_norms: Vec<f64>,
    /// `‖u_k − u_{k−1}‖` for each update.
    pub diff_norms: Vec<f64>,
    /// `diff_norms[k]/diff_norms[k−1]`.
    pub ratios: Vec<f64>,
}

impl ContractionTrace {
    pub fn iterations(&self) -> usize {
        self.diff_norms.len()
    }

    /// Geometric mean of the ratios over the second half of the run, skipping
    /// steps whose difference is already at rounding level. `None` when no
    /// ratio qualifies.
    pub fn tail_ratio(&self) -> Option<f64> {
        let scale = self.iterate_norms.last().copied().unwrap_or(0.0);
        let floor = 1e-8 * (1.0 + scale);
        let usable: Vec<f64> = self
            .ratios
            .iter()
            .enumerate()
            .filter(|(k, _)| self.diff_norms[k + 1] > floor)
            .map(|(_, r)| *r)
            .collect();
        if usable.is_empty() {
            return None;
        }
        let tail = &usable[usable.len() / 2..];
        Some((tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp())
    }
}

/// Number of consecutive growing steps that count as divergence.
const DIVERGENCE_RUN: usize = 5;

/// The relaxed fixed-point iteration for `ℓ = 2`. `mp` is the (estimated)
/// norm of the inverse Robin-Laplacian used for the feasibility test.
///
/// Stops once the steady residual drops below `newton_tol·(1 + ‖u‖)`;
/// `max_iter` bounds the number of updates.
pub fn solve_contraction(
    inst: &SteadyInstance,
    ed: &EllipticityData,
    mp: f64,
    opts: &SolverOptions,
    max_iter: usize,
) -> Result<(GridFunction, ContractionTrace)> {
    inst.validate()?;
    opts.validate()?;
    if inst.law.ell != 2.0 {
        return Err(Error::param("the fixed-point iteration needs ell = 2"));
    }
    let cd = contraction_data(ed, mp, 2.0, 2)?;
    let t = cd.t;
    let ops = Operators::new(&inst.grid, &inst.coef)?;
    let robin = RobinOperator::new(&inst.grid)?;
    let c = inst.boundary_coeffs(&ops);
    let rhs = inst.load(&ops);
    let mut full = ops.stiff.clone();
    full.add_diagonal(&c);
    // −Δ^R − tL
    let relax = robin.matrix.combine(1.0, &full, -t);

    let n = inst.grid.space_len();
    let mut u = vec![0.0; n];
    let mut trace = ContractionTrace::default();
    let mut growing = 0;
    let residual = |u: &[f64]| {
        let r: Vec<f64> = full.mul(u).iter().zip(&rhs).map(|(a, b)| a - b).collect();
        ops.residual_measure(&r)
    };
    if residual(&u) <= opts.newton_tol {
        return Ok((GridFunction::space(inst.grid, u)?, trace));
    }
    for it in 1..=max_iter {
        let mut b = relax.mul(&u);
        for (bi, fi) in b.iter_mut().zip(&rhs) {
            *bi += t * fi;
        }
        let mut next = u.clone();
        robin.solve(&b, &mut next, opts.linear_tol)?;
        let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let dn = robin.norm(&diff, 2.0);
        trace.iterate_norms.push(robin.norm(&next, 2.0));
        if let Some(prev) = trace.diff_norms.last() {
            let ratio = if *prev > 0.0 { dn / prev } else { 0.0 };
            trace.ratios.push(ratio);
            growing = if ratio > 1.0 { growing + 1 } else { 0 };
            if growing >= DIVERGENCE_RUN || !ratio.is_finite() {
                return Err(Error::Divergence { iterations: it, ratio });
            }
        }
        trace.diff_norms.push(dn);
        u = next;
        if residual(&u) <= opts.newton_tol * (1.0 + ops.l2(&u)) {
            return Ok((GridFunction::space(inst.grid, u)?, trace));
        }
    }
    Err(Error::Divergence {
        iterations: max_iter,
        ratio: trace.ratios.last().copied().unwrap_or(f64::NAN),
    })
}

/// Size of the fixed random test set used for the discrete dual norm.
const DUAL_TESTS: usize = 16;

/// Estimate of `M_p = ‖(−Δ^R)⁻¹‖` from `W^{1,p}`-plus-trace duals to the
/// same norm on the spatial part of `grid`.
///
/// Right-hand sides are random functionals `∫φv + ∫_Γ ψv` with smooth `φ`,
/// `ψ`. Dual norms of those functionals are maximized over a fixed random
/// test set together with the solution itself, so they are underestimated
/// and each ratio is an estimate, not a certified bound, of the true norm.
/// The result is a running maximum, so it never decreases as `samples` grows.
/// For `p = 2` a few power-iteration candidates are tried first.
pub fn estimate_mp(grid: &SpaceTimeGrid, p: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("need p >= 2, got {p}")));
    }
    grid.validate()?;
    let robin = RobinOperator::new(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tests: Vec<(Vec<f64>, f64)> = (0..DUAL_TESTS)
        .map(|_| {
            let w = SmoothField::random(&mut rng, 4).sample(grid);
            let nw = robin.norm(&w, p);
            (w, nw)
        })
        .collect();
    let tol = 1e-12;
    let ratio = |rhs: &[f64]| -> Result<f64> {
        let mut v = vec![0.0; rhs.len()];
        robin.solve(rhs, &mut v, tol)?;
        let nv = robin.norm(&v, p);
        if nv == 0.0 {
            return Ok(0.0);
        }
        // Pairing with v itself gives vᵀRv/‖v‖.
        let mut dual = dot(rhs, &v).abs() / nv;
        for (w, nw) in &tests {
            if *nw > 0.0 {
                dual = dual.max(dot(rhs, w).abs() / nw);
            }
        }
        Ok(if dual > 0.0 { nv / dual } else { 0.0 })
    };
    let mut best = 0.0f64;
    if p == 2.0 {
        let mut f = vec![1.0; grid.space_len()];
        for _ in 0..5 {
            let rhs = robin.mass.mul(&f);
            best = best.max(ratio(&rhs)?);
            let mut v = vec![0.0; rhs.len()];
            robin.solve(&rhs, &mut v, tol)?;
            let s = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if s == 0.0 {
                break;
            }
            f = v.iter().map(|x| x / s).collect();
        }
    }
    for _ in 0..samples {
        let phi = SmoothField::random(&mut rng, 4).sample(grid);
        let psi = SmoothField::random(&mut rng, 4).sample(grid);
        let w_int: f64 = rng.gen_range(0.0..1.0);
        let mut rhs = robin.mass.mul(&phi);
        for ((r, w), s) in rhs.iter_mut().zip(&robin.gamma_w).zip(&psi) {
            *r = w_int * *r + (1.0 - w_int) * w * s;
        }
        best = best.max(ratio(&rhs)?);
    }
    Ok(best)
}
