//! Bilinear finite elements on a uniform rectangle mesh.

mod linalg;

pub use linalg::{dot, norm2, pcg, Csr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshfields::{trace_weights, SpaceTimeGrid};

/// Symmetric 2×2 coefficient matrix, constant on each cell, stored as
/// `[a11, a12, a22]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    nx: usize,
    ny: usize,
    cells: Vec<[f64; 3]>,
}

impl CoefficientField {
    pub fn constant(grid: &SpaceTimeGrid, a: [f64; 3]) -> Result<Self> {
        Self::from_fn(grid, |_, _| a)
    }

    pub fn identity(grid: &SpaceTimeGrid) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            cells: vec![[1.0, 0.0, 1.0]; grid.nx * grid.ny],
        }
    }

    /// Samples `A` at the cell centres.
    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64) -> [f64; 3]) -> Result<Self> {
        let mut cells = Vec::with_capacity(grid.nx * grid.ny);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let a = f(grid.x(i) + 0.5 * grid.hx(), grid.y(j) + 0.5 * grid.hy());
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("coefficient is not finite"));
                }
                let (lo, _) = eigen(a);
                if !(lo > 0.0) {
                    return Err(Error::domain(format!(
                        "coefficient is not positive definite in cell ({i}, {j})"
                    )));
                }
                cells.push(a);
            }
        }
        Ok(Self {
            nx: grid.nx,
            ny: grid.ny,
            cells,
        })
    }

    pub fn cells(&self) -> &[[f64; 3]] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> [f64; 3] {
        self.cells[j * self.nx + i]
    }

    pub fn fits(&self, grid: &SpaceTimeGrid) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }

    /// Smallest and largest eigenvalue over all cells.
    pub fn eigen_bounds(&self) -> (f64, f64) {
        self.cells.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), a| {
            let (l, h) = eigen(*a);
            (lo.min(l), hi.max(h))
        })
    }

    /// Checks `a_lo |ξ|² ≤ Aξ·ξ` and `|A| ≤ a_hi` in every cell.
    pub fn check_ellipticity(&self, a_lo: f64, a_hi: f64) -> Result<()> {
        let (lo, hi) = self.eigen_bounds();
        let slack = 1e-12 * a_hi.max(1.0);
        if lo < a_lo - slack || hi > a_hi + slack {
            return Err(Error::domain(format!(
                "coefficient eigenvalues [{lo}, {hi}] leave [{a_lo}, {a_hi}]"
            )));
        }
        Ok(())
    }
}

/// Eigenvalues of a symmetric 2×2 matrix.
pub fn eigen(a: [f64; 3]) -> (f64, f64) {
    let m = 0.5 * (a[0] + a[2]);
    let d = (0.25 * (a[0] - a[2]).powi(2) + a[1] * a[1]).sqrt();
    (m - d, m + d)
}

const G2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

fn shape(xi: f64, eta: f64) -> [f64; 4] {
    [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta]
}

/// Reference derivatives `(∂ξ, ∂η)` of the four shape functions.
fn dshape(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-(1.0 - eta), -(1.0 - xi)],
        [1.0 - eta, -xi],
        [-eta, 1.0 - xi],
        [eta, xi],
    ]
}

struct LocalMatrices {
    mass: [[f64; 4]; 4],
    kxx: [[f64; 4]; 4],
    kxy: [[f64; 4]; 4],
    kyy: [[f64; 4]; 4],
}

fn local_matrices(hx: f64, hy: f64) -> LocalMatrices {
    let mut lm = LocalMatrices {
        mass: [[0.0; 4]; 4],
        kxx: [[0.0; 4]; 4],
        kxy: [[0.0; 4]; 4],
        kyy: [[0.0; 4]; 4],
    };
    let w = 0.25 * hx * hy;
    for &xi in &G2 {
        for &eta in &G2 {
            let n = shape(xi, eta);
            let d = dshape(xi, eta);
            for a in 0..4 {
                for b in 0..4 {
                    lm.mass[a][b] += w * n[a] * n[b];
                    lm.kxx[a][b] += w * d[a][0] * d[b][0] / (hx * hx);
                    lm.kxy[a][b] += w * d[a][0] * d[b][1] / (hx * hy);
                    lm.kyy[a][b] += w * d[a][1] * d[b][1] / (hy * hy);
                }
            }
        }
    }
    lm
}

fn cell_nodes(grid: &SpaceTimeGrid, i: usize, j: usize) -> [usize; 4] {
    [
        grid.idx(i, j),
        grid.idx(i + 1, j),
        grid.idx(i, j + 1),
        grid.idx(i + 1, j + 1),
    ]
}

/// Consistent mass matrix.
pub fn assemble_mass(grid: &SpaceTimeGrid) -> Csr {
    let lm = local_matrices(grid.hx(), grid.hy());
    let mut m = Csr::nine_point(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let nodes = cell_nodes(grid, i, j);
            for a in 0..4 {
                for b in 0..4 {
                    m.add(nodes[a], nodes[b], lm.mass[a][b]);
                }
            }
        }
    }
    m
}

/// Stiffness matrix of `∫ A∇u·∇v`.
pub fn assemble_stiffness(grid: &SpaceTimeGrid, coef: &CoefficientField) -> Result<Csr> {
    if !coef.fits(grid) {
        return Err(Error::shape("coefficient field does not match the grid"));
    }
    let lm = local_matrices(grid.hx(), grid.hy());
    let mut k = Csr::nine_point(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let [a11, a12, a22] = coef.cell(i, j);
            let nodes = cell_nodes(grid, i, j);
            for a in 0..4 {
                for b in 0..4 {
                    let v = a11 * lm.kxx[a][b] + a12 * (lm.kxy[a][b] + lm.kxy[b][a]) + a22 * lm.kyy[a][b];
                    k.add(nodes[a], nodes[b], v);
                }
            }
        }
    }
    Ok(k)
}

/// `∫ 𝐟·∇φ_i` for the bilinear interpolant of `𝐟 = (fx, fy)`.
pub fn flux_load(grid: &SpaceTimeGrid, fx: &[f64], fy: &[f64]) -> Vec<f64> {
    let (hx, hy) = (grid.hx(), grid.hy());
    let w = 0.25 * hx * hy;
    let mut out = vec![0.0; grid.space_len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let nodes = cell_nodes(grid, i, j);
            if nodes.iter().all(|&n| fx[n] == 0.0 && fy[n] == 0.0) {
                continue;
            }
            for &xi in &G2 {
                for &eta in &G2 {
                    let n = shape(xi, eta);
                    let d = dshape(xi, eta);
                    let (mut vx, mut vy) = (0.0, 0.0);
                    for a in 0..4 {
                        vx += n[a] * fx[nodes[a]];
                        vy += n[a] * fy[nodes[a]];
                    }
                    for a in 0..4 {
                        out[nodes[a]] += w * (vx * d[a][0] / hx + vy * d[a][1] / hy);
                    }
                }
            }
        }
    }
    out
}

/// Discrete operators shared by the time-dependent and steady solvers.
#[derive(Clone, Debug)]
pub struct Operators {
    pub grid: SpaceTimeGrid,
    pub mass: Csr,
    pub stiff: Csr,
    /// Lumped (trapezoid) weights of `Γ`, one per node.
    pub gamma_w: Vec<f64>,
}

impl Operators {
    pub fn new(grid: &SpaceTimeGrid, coef: &CoefficientField) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            mass: assemble_mass(grid),
            stiff: assemble_stiffness(grid, coef)?,
            gamma_w: trace_weights(grid, grid.gamma),
        })
    }

    /// `∫ f φ_i + ∫ 𝐟·∇φ_i + ∫_Γ h φ_i`.
    pub fn load(&self, f: &[f64], fx: &[f64], fy: &[f64], h: &[f64]) -> Vec<f64> {
        let mut out = self.mass.mul(f);
        for (o, v) in out.iter_mut().zip(flux_load(&self.grid, fx, fy)) {
            *o += v;
        }
        for ((o, w), hv) in out.iter_mut().zip(&self.gamma_w).zip(h) {
            *o += w * hv;
        }
        out
    }

    /// Residual scale turning a nodal residual vector into an `L²`-like size.
    pub fn residual_measure(&self, r: &[f64]) -> f64 {
        norm2(r) / (self.grid.hx() * self.grid.hy()).sqrt()
    }

    /// Discrete `L²(Ω)` norm `√(uᵀMu)`.
    pub fn l2(&self, u: &[f64]) -> f64 {
        self.mass.form(u, u).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshfields::EdgeSet;

    fn grid(n: usize) -> SpaceTimeGrid {
        SpaceTimeGrid::new(2.0, 1.0, n, n, 1.0, 1, EdgeSet::all()).unwrap()
    }

    #[test]
    fn mass_integrates_products_exactly() {
        let g = grid(4);
        let m = assemble_mass(&g);
        let one = vec![1.0; g.space_len()];
        assert!((m.form(&one, &one) - 2.0).abs() < 1e-14);
        let x: Vec<f64> = (0..=g.ny).flat_map(|_| (0..=g.nx).map(|i| g.x(i))).collect();
        // ∫ x² over [0,2]×[0,1] = 8/3
        assert!((m.form(&x, &x) - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn stiffness_energy_of_linear_field() {
        let g = grid(5);
        let a = [2.0, 0.5, 1.0];
        let k = assemble_stiffness(&g, &CoefficientField::constant(&g, a).unwrap()).unwrap();
        let u: Vec<f64> = (0..=g.ny)
            .flat_map(|j| (0..=g.nx).map(move |i| (i, j)))
            .map(|(i, j)| 3.0 * g.x(i) - g.y(j))
            .collect();
        // ∇u = (3, -1): A∇u·∇u = 2·9 + 2·0.5·(−3) + 1 = 16, area 2.
        assert!((k.form(&u, &u) - 32.0).abs() < 1e-11);
        let one = vec![1.0; g.space_len()];
        assert!(norm2(&k.mul(&one)) < 1e-13);
    }

    #[test]
    fn flux_load_matches_divergence_pairing() {
        // 𝐟 = (1, 0): ∫ 𝐟·∇φ_i summed against u = x gives ∫ 1 = area.
        let g = grid(6);
        let fx = vec![1.0; g.space_len()];
        let fy = vec![0.0; g.space_len()];
        let l = flux_load(&g, &fx, &fy);
        let u: Vec<f64> = (0..=g.ny).flat_map(|_| (0..=g.nx).map(|i| g.x(i))).collect();
        assert!((dot(&l, &u) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn eigen_bounds_and_check() {
        let g = grid(2);
        let c = CoefficientField::constant(&g, [0.8, 0.0, 1.0]).unwrap();
        assert_eq!(c.eigen_bounds(), (0.8, 1.0));
        assert!(c.check_ellipticity(0.8, 1.0).is_ok());
        assert!(c.check_ellipticity(0.9, 1.0).is_err());
        assert!(CoefficientField::constant(&g, [1.0, 2.0, 1.0]).is_err());
    }
}
