use crate::error::{Error, Result};
use crate::meshfields::SpaceTimeGrid;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Zero matrix with the sparsity of bilinear elements on `grid`: every node
    /// couples to itself and its (up to) eight neighbours.
    pub fn nine_point(grid: &SpaceTimeGrid) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let n = grid.space_len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(9 * n);
        row_ptr.push(0);
        for j in 0..=ny {
            for i in 0..=nx {
                for jj in j.saturating_sub(1)..=(j + 1).min(ny) {
                    for ii in i.saturating_sub(1)..=(i + 1).min(nx) {
                        col_idx.push(grid.idx(ii, jj));
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        let nnz = col_idx.len();
        Self {
            n,
            row_ptr,
            col_idx,
            vals: vec![0.0; nnz],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn pos(&self, row: usize, col: usize) -> usize {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => lo + k,
            Err(_) => panic!("entry ({row}, {col}) outside the sparsity pattern"),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self.pos(row, col);
        self.vals[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi]
            .binary_search(&col)
            .map_or(0.0, |k| self.vals[lo + k])
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, di) in d.iter().enumerate() {
            self.add(i, i, *di);
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `αA + βB` for matrices on the same pattern.
    pub fn combine(&self, alpha: f64, other: &Csr, beta: f64) -> Csr {
        assert_eq!(self.col_idx, other.col_idx, "patterns differ");
        Csr {
            vals: self
                .vals
                .iter()
                .zip(&other.vals)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
            ..self.clone()
        }
    }

    /// `xᵀAy`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul(y))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `(A + diag(shift))x = b` by conjugate gradients with Jacobi
/// preconditioning, starting from the given `x`. Stops when
/// `‖b − Ax‖ ≤ tol·‖b‖`. Returns the iteration count.
pub fn pcg(a: &Csr, shift: Option<&[f64]>, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let n = a.dim();
    let apply = |v: &[f64], out: &mut [f64]| {
        a.matvec(v, out);
        if let Some(s) = shift {
            for i in 0..n {
                out[i] += s[i] * v[i];
            }
        }
    };
    let mut diag = a.diagonal();
    if let Some(s) = shift {
        for i in 0..n {
            diag[i] += s[i];
        }
    }
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::LinearSolver("nonpositive diagonal entry".into()));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let target = tol * bnorm;
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if norm2(&r) <= target {
        return Ok(0);
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolver(format!(
                "curvature p'Ap = {pap} is not positive at iteration {it}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= target {
            return Ok(it);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolver(format!(
        "no convergence in {max_iter} iterations (residual {:e}, target {target:e})",
        norm2(&r)
    )))
}
