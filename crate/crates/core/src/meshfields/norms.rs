use serde::{Deserialize, Serialize};

use super::{Edge, EdgeSet, GridFunction, SpaceTimeGrid};
use crate::error::{Error, Result};

/// Where a norm is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// The rectangle itself.
    Interior,
    /// The sides carrying the boundary law.
    GammaTrace,
    /// All four sides.
    FullBoundary,
}

/// Quadrature in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRule {
    Trapezoid,
    /// `dt·Σ_{k≥1}`, the rule implicit Euler is consistent with.
    RightEndpoint,
}

fn trapezoid_1d(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n + 1];
    w[0] = 0.5 * h;
    w[n] = 0.5 * h;
    w
}

/// Tensor trapezoid weights of the rectangle, one per node.
pub fn space_weights(grid: &SpaceTimeGrid) -> Vec<f64> {
    let wx = trapezoid_1d(grid.nx, grid.hx());
    let wy = trapezoid_1d(grid.ny, grid.hy());
    let mut w = Vec::with_capacity(grid.space_len());
    for wyj in &wy {
        for wxi in &wx {
            w.push(wxi * wyj);
        }
    }
    w
}

/// One-dimensional trapezoid weights along the given sides. A corner shared
/// by two selected sides collects both contributions.
pub fn trace_weights(grid: &SpaceTimeGrid, edges: EdgeSet) -> Vec<f64> {
    let mut w = vec![0.0; grid.space_len()];
    let wx = trapezoid_1d(grid.nx, grid.hx());
    let wy = trapezoid_1d(grid.ny, grid.hy());
    for e in edges.iter() {
        match e {
            Edge::Bottom | Edge::Top => {
                let j = if e == Edge::Bottom { 0 } else { grid.ny };
                for (i, wi) in wx.iter().enumerate() {
                    w[grid.idx(i, j)] += wi;
                }
            }
            Edge::Left | Edge::Right => {
                let i = if e == Edge::Left { 0 } else { grid.nx };
                for (j, wj) in wy.iter().enumerate() {
                    w[grid.idx(i, j)] += wj;
                }
            }
        }
    }
    w
}

pub fn time_weights(grid: &SpaceTimeGrid, rule: TimeRule) -> Vec<f64> {
    match rule {
        TimeRule::Trapezoid => trapezoid_1d(grid.nt, grid.dt()),
        TimeRule::RightEndpoint => {
            let mut w = vec![grid.dt(); grid.levels()];
            w[0] = 0.0;
            w
        }
    }
}

fn region_weights(grid: &SpaceTimeGrid, region: Region) -> Result<Vec<f64>> {
    match region {
        Region::Interior => Ok(space_weights(grid)),
        Region::GammaTrace => {
            if grid.gamma.is_empty() {
                return Err(Error::domain("trace on an empty boundary part"));
            }
            Ok(trace_weights(grid, grid.gamma))
        }
        Region::FullBoundary => Ok(trace_weights(grid, EdgeSet::all())),
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("norm exponent must be >= 1, got {p}")));
    }
    Ok(())
}

fn weighted_pow(w: &[f64], v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        w.iter().zip(v).map(|(w, v)| w * v * v).sum()
    } else {
        w.iter().zip(v).map(|(w, v)| w * v.abs().powf(p)).sum()
    }
}

/// `∫ u` over the rectangle for one slice.
pub fn space_integral(grid: &SpaceTimeGrid, slice: &[f64]) -> f64 {
    space_weights(grid).iter().zip(slice).map(|(w, v)| w * v).sum()
}

/// `L^p` norm, or the mixed norm `‖·‖_{l1,l2}` (temporal `l2`-norm of the
/// spatial `l1`-norms), with trapezoidal quadrature in time.
pub fn lp_norm(u: &GridFunction, p: f64, region: Region, mixed: Option<(f64, f64)>) -> Result<f64> {
    lp_norm_rule(u, p, region, mixed, TimeRule::Trapezoid)
}

pub fn lp_norm_rule(
    u: &GridFunction,
    p: f64,
    region: Region,
    mixed: Option<(f64, f64)>,
    rule: TimeRule,
) -> Result<f64> {
    let grid = u.grid();
    let w = region_weights(grid, region)?;
    if !u.is_time_dependent() {
        if mixed.is_some() {
            return Err(Error::shape("mixed norms need a space-time function"));
        }
        check_exponent(p)?;
        return Ok(weighted_pow(&w, u.values(), p).powf(1.0 / p));
    }
    let tw = time_weights(grid, rule);
    match mixed {
        None => {
            check_exponent(p)?;
            let total: f64 = (0..u.n_levels())
                .map(|k| tw[k] * weighted_pow(&w, u.slice(k), p))
                .sum();
            Ok(total.powf(1.0 / p))
        }
        Some((l1, l2)) => {
            check_exponent(l1)?;
            check_exponent(l2)?;
            let total: f64 = (0..u.n_levels())
                .map(|k| tw[k] * weighted_pow(&w, u.slice(k), l1).powf(l2 / l1))
                .sum();
            Ok(total.powf(1.0 / l2))
        }
    }
}

/// Largest spatial `L^p(Ω)` norm over the stored time levels.
///
/// This is a lower bound for the essential supremum of the continuous field.
pub fn ess_sup_lp(u: &GridFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let w = space_weights(u.grid());
    Ok((0..u.n_levels())
        .map(|k| weighted_pow(&w, u.slice(k), p).powf(1.0 / p))
        .fold(0.0, f64::max))
}

/// Two components on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: GridFunction,
    pub y: GridFunction,
}

impl VectorField {
    pub fn magnitude(&self) -> Result<GridFunction> {
        self.x.zip_with(&self.y, f64::hypot)
    }
}

fn diff_line(vals: &[f64], h: f64, out: &mut [f64]) {
    let n = vals.len() - 1;
    if n == 1 {
        let d = (vals[1] - vals[0]) / h;
        out[0] = d;
        out[1] = d;
        return;
    }
    out[0] = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h);
    for i in 1..n {
        out[i] = (vals[i + 1] - vals[i - 1]) / (2.0 * h);
    }
    out[n] = (3.0 * vals[n] - 4.0 * vals[n - 1] + vals[n - 2]) / (2.0 * h);
}

/// Nodal finite-difference gradient: centered inside, second-order one-sided
/// on the sides.
pub fn gradient(u: &GridFunction) -> Result<VectorField> {
    let g = *u.grid();
    let (nx, ny) = (g.nx, g.ny);
    let mut gx = Vec::with_capacity(u.values().len());
    let mut gy = Vec::with_capacity(u.values().len());
    let mut row = vec![0.0; nx + 1];
    let mut col = vec![0.0; ny + 1];
    let mut colv = vec![0.0; ny + 1];
    for k in 0..u.n_levels() {
        let s = u.slice(k);
        let mut sx = vec![0.0; g.space_len()];
        let mut sy = vec![0.0; g.space_len()];
        for j in 0..=ny {
            diff_line(&s[g.idx(0, j)..=g.idx(nx, j)], g.hx(), &mut row);
            sx[g.idx(0, j)..=g.idx(nx, j)].copy_from_slice(&row);
        }
        for i in 0..=nx {
            for (j, c) in colv.iter_mut().enumerate() {
                *c = s[g.idx(i, j)];
            }
            diff_line(&colv, g.hy(), &mut col);
            for (j, c) in col.iter().enumerate() {
                sy[g.idx(i, j)] = *c;
            }
        }
        gx.extend(sx);
        gy.extend(sy);
    }
    let build = |v| {
        if u.is_time_dependent() {
            GridFunction::space_time(g, v)
        } else {
            GridFunction::space(g, v)
        }
    };
    Ok(VectorField {
        x: build(gx)?,
        y: build(gy)?,
    })
}

pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// `∫_Ω |∇u_h|^p` for the bilinear interpolant of one slice, by 3×3 Gauss
/// quadrature per cell (exact for `p = 2`).
pub fn q1_gradient_slice_lp(grid: &SpaceTimeGrid, slice: &[f64], p: f64) -> f64 {
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
                    let dx = ((u10 - u00) * (1.0 - eta) + (u11 - u01) * eta) / hx;
                    let dy = ((u01 - u00) * (1.0 - xi) + (u11 - u10) * xi) / hy;
                    let sq = dx * dx + dy * dy;
                    let v = if p == 2.0 { sq } else { sq.powf(p / 2.0) };
                    cell += wx * wy * v;
                }
            }
            total += cell * hx * hy;
        }
    }
    total
}

/// `‖∇u_h‖_p` over the rectangle (and over time with the given rule).
pub fn q1_gradient_lp(u: &GridFunction, p: f64, rule: TimeRule) -> Result<f64> {
    check_exponent(p)?;
    let g = u.grid();
    if !u.is_time_dependent() {
        return Ok(q1_gradient_slice_lp(g, u.values(), p).powf(1.0 / p));
    }
    let tw = time_weights(g, rule);
    let total: f64 = (0..u.n_levels())
        .filter(|&k| tw[k] != 0.0)
        .map(|k| tw[k] * q1_gradient_slice_lp(g, u.slice(k), p))
        .sum();
    Ok(total.powf(1.0 / p))
}

/// Per-level weighted mean `U(t) = ∫η²u / ∫η²`.
///
/// The support of `η` must stay away from `Γ`: every node within one cell of
/// a `Γ` side has to carry `η = 0`.
pub fn weighted_mean_u(u: &GridFunction, eta: &GridFunction) -> Result<Vec<f64>> {
    let g = u.grid();
    if eta.is_time_dependent() || !g.same_space(eta.grid()) {
        return Err(Error::shape("eta must be a space-only function on the same mesh"));
    }
    let near = |i: usize, j: usize| {
        g.gamma.iter().any(|e| match e {
            Edge::Left => i <= 1,
            Edge::Right => i + 1 >= g.nx,
            Edge::Bottom => j <= 1,
            Edge::Top => j + 1 >= g.ny,
        })
    };
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            if eta.values()[g.idx(i, j)] != 0.0 && near(i, j) {
                return Err(Error::domain("support of eta touches the boundary part carrying the law"));
            }
        }
    }
    let w = space_weights(g);
    let w2: Vec<f64> = w.iter().zip(eta.values()).map(|(w, e)| w * e * e).collect();
    let mass: f64 = w2.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::domain("eta vanishes identically"));
    }
    Ok((0..u.n_levels())
        .map(|k| w2.iter().zip(u.slice(k)).map(|(a, b)| a * b).sum::<f64>() / mass)
        .collect())
}
