//! Sparse symmetric storage and a Jacobi-preconditioned conjugate gradient solver.

use nalgebra::{DMatrix, DVector};

use crate::error::SolveError;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; `n x n`.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n} x {n}");
            if last == Some((i, j)) {
                *values.last_mut().expect("entry") += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Self { n, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[p] * x[self.indices[p]];
            }
            y[i] = s;
        }
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// Solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub tolerance: f64,
    /// Iteration cap as a multiple of the dimension.
    pub max_iter_factor: usize,
    /// Dense factorisation is attempted up to this size when CG fails.
    pub dense_fallback: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iter_factor: 10, dense_fallback: 2000 }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `|A x - b| / |b|` recomputed after the solve.
    pub residual: f64,
    pub direct: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG.
pub fn pcg(a: &CsrMatrix, b: &[f64], cfg: &CgConfig) -> Result<(Vec<f64>, usize), SolveError> {
    let n = a.dim();
    if b.len() != n {
        return Err(SolveError::DimensionMismatch { matrix: n, vector: b.len() });
    }
    let diag = a.diagonal();
    if diag.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
        return Err(SolveError::Indefinite);
    }
    let mut x = vec![0.0; n];
    let bn = norm(b);
    if bn == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = (cfg.max_iter_factor * n).max(10);
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(SolveError::Indefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = norm(&r);
        if rn <= cfg.tolerance * bn {
            return Ok((x, it));
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
    a.mul_vec(&x, &mut ap);
    let res: Vec<f64> = ap.iter().zip(b).map(|(a, b)| a - b).collect();
    Err(SolveError::NotConverged { iterations: max_iter, residual: norm(&res) / bn })
}

/// Dense Cholesky solve.
pub fn dense_spd(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let chol = nalgebra::Cholesky::new(a.to_dense()).ok_or(SolveError::Indefinite)?;
    Ok(chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
}

/// CG with a dense fallback for small systems; the residual is re-verified.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], cfg: &CgConfig) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let n = a.dim();
    let (x, iterations, direct) = match pcg(a, b, cfg) {
        Ok((x, it)) => (x, it, false),
        Err(SolveError::DimensionMismatch { matrix, vector }) => {
            return Err(SolveError::DimensionMismatch { matrix, vector })
        }
        Err(e) if n <= cfg.dense_fallback && !matches!(e, SolveError::Indefinite) => (dense_spd(a, b)?, 0, true),
        Err(e) => return Err(e),
    };
    let mut ax = vec![0.0; n];
    a.mul_vec(&x, &mut ax);
    let bn = norm(b);
    let res: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
    let residual = if bn == 0.0 { norm(&res) } else { norm(&res) / bn };
    Ok((x, SolveReport { iterations, residual, direct }))
}
