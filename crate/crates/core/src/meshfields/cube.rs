use serde::{Deserialize, Serialize};

use super::{Edge, EdgeSet, GridFunction, SpaceTimeGrid};
use crate::error::{Error, Result};

/// `Q_R(x₀, t₀) = {|x − x₀|_∞ < R} × (t₀ − R², t₀ + R²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCube {
    pub center: [f64; 2],
    pub t: f64,
    pub radius: f64,
}

impl ParabolicCube {
    pub fn new(x: f64, y: f64, t: f64, radius: f64) -> Self {
        Self {
            center: [x, y],
            t,
            radius,
        }
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..*self }
    }
}

fn index_range(origin: f64, h: f64, n: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
    let tol = 1e-9 * h;
    let first = ((lo - origin - tol) / h).ceil().max(0.0);
    let last = ((hi - origin + tol) / h).floor().min(n as f64);
    if last < first {
        return None;
    }
    Some((first as usize, last as usize))
}

/// Restriction of `u` to the closed cube (nodes on the cube boundary are
/// kept). A space-only function is restricted in space only.
pub fn cube_restrict(u: &GridFunction, c: &ParabolicCube) -> Result<GridFunction> {
    if !(c.radius > 0.0 && c.radius.is_finite()) {
        return Err(Error::domain(format!("cube radius must be > 0, got {}", c.radius)));
    }
    let g = u.grid();
    let r = c.radius;
    let empty = || Error::shape("cube does not meet the grid in a nondegenerate box");
    let (ilo, ihi) = index_range(g.x0, g.hx(), g.nx, c.center[0] - r, c.center[0] + r).ok_or_else(empty)?;
    let (jlo, jhi) = index_range(g.y0, g.hy(), g.ny, c.center[1] - r, c.center[1] + r).ok_or_else(empty)?;
    if ihi == ilo || jhi == jlo {
        return Err(empty());
    }
    let (klo, khi) = if u.is_time_dependent() {
        let kr = index_range(g.t0, g.dt(), g.nt, c.t - r * r, c.t + r * r).ok_or_else(empty)?;
        if kr.1 == kr.0 {
            return Err(empty());
        }
        kr
    } else {
        (0, 0)
    };
    let mut gamma = EdgeSet::empty();
    for e in g.gamma.iter() {
        let keep = match e {
            Edge::Left => ilo == 0,
            Edge::Right => ihi == g.nx,
            Edge::Bottom => jlo == 0,
            Edge::Top => jhi == g.ny,
        };
        if keep {
            gamma = gamma.with(e);
        }
    }
    let nt = if u.is_time_dependent() { khi - klo } else { g.nt };
    let sub = SpaceTimeGrid {
        x0: g.x(ilo),
        y0: g.y(jlo),
        lx: (ihi - ilo) as f64 * g.hx(),
        ly: (jhi - jlo) as f64 * g.hy(),
        nx: ihi - ilo,
        ny: jhi - jlo,
        t0: if u.is_time_dependent() { g.t(klo) } else { g.t0 },
        t_final: if u.is_time_dependent() { nt as f64 * g.dt() } else { g.t_final },
        nt,
        gamma,
    };
    let mut values = Vec::with_capacity(sub.space_len() * (khi - klo + 1));
    for k in klo..=khi {
        let s = u.slice(k);
        for j in jlo..=jhi {
            values.extend_from_slice(&s[g.idx(ilo, j)..=g.idx(ihi, j)]);
        }
    }
    if u.is_time_dependent() {
        GridFunction::space_time(sub, values)
    } else {
        GridFunction::space(sub, values)
    }
}
