//! Uniform rectangle grids in space and time, nodal grid functions and the
//! quadrature-based queries on them.
//!
//! Nodes are ordered row-major: `x` fastest, then `y`, then time level.

mod cube;
mod io;
mod norms;
mod smooth;
mod stieltjes;

pub use cube::{cube_restrict, ParabolicCube};
pub use io::{read_csv, write_csv, CSV_HEADER};
pub use norms::{
    ess_sup_lp, gradient, lp_norm, lp_norm_rule, q1_gradient_lp, q1_gradient_slice_lp,
    space_integral, space_weights, time_weights, trace_weights, weighted_mean_u, Region, TimeRule,
    VectorField,
};
pub use smooth::SmoothField;
pub use stieltjes::StieltjesFn;
pub(crate) use norms::GAUSS3;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of the rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    fn bit(self) -> u8 {
        match self {
            Edge::Left => 1,
            Edge::Right => 2,
            Edge::Bottom => 4,
            Edge::Top => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        }
    }

    pub fn parse(s: &str) -> Option<Edge> {
        Edge::ALL.into_iter().find(|e| e.name() == s.trim())
    }
}

/// Subset of the four sides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSet(u8);

impl EdgeSet {
    pub const fn empty() -> Self {
        EdgeSet(0)
    }

    pub const fn all() -> Self {
        EdgeSet(15)
    }

    pub fn with(mut self, e: Edge) -> Self {
        self.0 |= e.bit();
        self
    }

    pub fn contains(self, e: Edge) -> bool {
        self.0 & e.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Edge> {
        Edge::ALL.into_iter().filter(move |e| self.contains(*e))
    }

    /// Parses a list such as `left, top` (also `all`, `none`).
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s {
            "all" => return Some(Self::all()),
            "none" | "" => return Some(Self::empty()),
            _ => {}
        }
        s.split([',', ';', '|', ' '])
            .filter(|t| !t.is_empty())
            .try_fold(Self::empty(), |acc, t| Edge::parse(t).map(|e| acc.with(e)))
    }

    pub fn to_list(self) -> String {
        if self.is_empty() {
            return "none".into();
        }
        self.iter().map(Edge::name).collect::<Vec<_>>().join(";")
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        iter.into_iter().fold(Self::empty(), Self::with)
    }
}

/// Uniform grid on `[x0, x0+Lx] × [y0, y0+Ly] × [t0, t0+T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub x0: f64,
    pub y0: f64,
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub t0: f64,
    pub t_final: f64,
    pub nt: usize,
    /// Sides carrying the boundary law.
    pub gamma: EdgeSet,
}

impl SpaceTimeGrid {
    /// Grid on `[0,Lx]×[0,Ly]×[0,T]`.
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize, t_final: f64, nt: usize, gamma: EdgeSet) -> Result<Self> {
        let g = Self {
            x0: 0.0,
            y0: 0.0,
            lx,
            ly,
            nx,
            ny,
            t0: 0.0,
            t_final,
            nt,
            gamma,
        };
        g.validate()?;
        Ok(g)
    }

    /// Unit square, `n × n` cells, whole boundary in `Γ`.
    pub fn unit_square(n: usize, t_final: f64, nt: usize) -> Result<Self> {
        Self::new(1.0, 1.0, n, n, t_final, nt, EdgeSet::all())
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nt == 0 {
            return Err(Error::shape("grid needs nx, ny, nt >= 1"));
        }
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.lx) && ok(self.ly) && ok(self.t_final)) {
            return Err(Error::domain("grid extents must be positive and finite"));
        }
        if !(self.x0.is_finite() && self.y0.is_finite() && self.t0.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy()
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt()
    }

    /// Nodes per time level.
    pub fn space_len(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn levels(&self) -> usize {
        self.nt + 1
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Whether node `(i, j)` lies on side `e`.
    pub fn on_edge(&self, i: usize, j: usize, e: Edge) -> bool {
        match e {
            Edge::Left => i == 0,
            Edge::Right => i == self.nx,
            Edge::Bottom => j == 0,
            Edge::Top => j == self.ny,
        }
    }

    pub fn on_gamma(&self, i: usize, j: usize) -> bool {
        self.gamma.iter().any(|e| self.on_edge(i, j, e))
    }

    /// Same spatial mesh with a different time axis.
    pub fn with_time(&self, t0: f64, t_final: f64, nt: usize) -> Self {
        Self {
            t0,
            t_final,
            nt,
            ..*self
        }
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.lx == other.lx
            && self.ly == other.ly
            && self.x0 == other.x0
            && self.y0 == other.y0
    }
}

/// Nodal values on a grid, either on one time level (`space`) or on all
/// `nt + 1` levels (`space_time`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: SpaceTimeGrid,
    time_dependent: bool,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn space(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::build(grid, false, values)
    }

    pub fn space_time(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::build(grid, true, values)
    }

    fn build(grid: SpaceTimeGrid, time_dependent: bool, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        let expect = grid.space_len() * if time_dependent { grid.levels() } else { 1 };
        if values.len() != expect {
            return Err(Error::shape(format!(
                "expected {expect} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("grid function value {v} is not finite")));
        }
        Ok(Self {
            grid,
            time_dependent,
            values,
        })
    }

    pub fn zeros_space(grid: SpaceTimeGrid) -> Self {
        Self {
            grid,
            time_dependent: false,
            values: vec![0.0; grid.space_len()],
        }
    }

    /// Samples `f(x, y)` at the nodes.
    pub fn space_from_fn(grid: SpaceTimeGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut v = Vec::with_capacity(grid.space_len());
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                v.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self::space(grid, v)
    }

    /// Samples `f(x, y, t)` at every node of every level.
    pub fn space_time_from_fn(grid: SpaceTimeGrid, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let mut v = Vec::with_capacity(grid.space_len() * grid.levels());
        for k in 0..=grid.nt {
            let t = grid.t(k);
            for j in 0..=grid.ny {
                for i in 0..=grid.nx {
                    v.push(f(grid.x(i), grid.y(j), t));
                }
            }
        }
        Self::space_time(grid, v)
    }

    /// Stacks per-level slices into a space-time function.
    pub fn from_slices(grid: SpaceTimeGrid, slices: &[Vec<f64>]) -> Result<Self> {
        if slices.len() != grid.levels() {
            return Err(Error::shape(format!(
                "expected {} time levels, got {}",
                grid.levels(),
                slices.len()
            )));
        }
        Self::space_time(grid, slices.concat())
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of stored levels (1 for a space-only function).
    pub fn n_levels(&self) -> usize {
        if self.time_dependent {
            self.grid.levels()
        } else {
            1
        }
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let m = self.grid.space_len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.slice(k)[self.grid.idx(i, j)]
    }

    /// A single level as a space-only function.
    pub fn level(&self, k: usize) -> GridFunction {
        GridFunction {
            grid: self.grid,
            time_dependent: false,
            values: self.slice(k).to_vec(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        Self::build(self.grid, self.time_dependent, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<GridFunction> {
        self.map(|v| c * v)
    }

    /// Pointwise combination of two functions of the same shape.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.grid != other.grid || self.time_dependent != other.time_dependent {
            return Err(Error::shape("grid functions live on different grids"));
        }
        let v = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::build(self.grid, self.time_dependent, v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Even reflection of a space-time function to `(−T, 2T)`:
/// `ũ(t) = u(−t)` for `t ≤ 0` and `ũ(t) = u(2T − t)` for `t ≥ T`.
pub fn time_reflect(u: &GridFunction) -> Result<GridFunction> {
    if !u.is_time_dependent() {
        return Err(Error::shape("time reflection needs a space-time function"));
    }
    let g = u.grid();
    let nt = g.nt;
    let out = g.with_time(g.t0 - g.t_final, 3.0 * g.t_final, 3 * nt);
    let mut values = Vec::with_capacity(out.space_len() * out.levels());
    for kk in 0..=3 * nt {
        let s = kk as isize - nt as isize;
        let k = if s <= 0 {
            (-s) as usize
        } else if (s as usize) < nt {
            s as usize
        } else {
            2 * nt - s as usize
        };
        values.extend_from_slice(u.slice(k));
    }
    GridFunction::space_time(out, values)
}
