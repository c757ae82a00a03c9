//! Dense real-symmetric eigensolvers.
//!
//! `sym_eig` reduces to tridiagonal form with Householder reflections and then
//! runs the implicit QL iteration with Wilkinson shifts. `gen_eig` solves
//! `K x = λ B x` for symmetric `K` and positive definite `B` through the
//! Cholesky factor of `B`.

use crate::{Error, Result};

/// Maximum QL iterations spent on any single eigenvalue.
pub const MAX_ITERATIONS: usize = 64;

/// Dense symmetric matrix stored row-major in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` for `i ≤ j`, mirroring the rest.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// From nested rows; only the upper triangle is read.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        Self::from_fn(rows.len(), |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let w = self.get(i, j) + v;
        self.set(i, j, w);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self - sigma * other`.
    pub fn shifted(&self, other: &SymMatrix, sigma: f64) -> SymMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - sigma * b).collect();
        SymMatrix { dim: self.dim, data }
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular factor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[i * self.dim + j]
        }
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.data[i * n..i * n + i];
            y[i] = (y[i] - dot(row, &y[..i])) / self.data[i * n + i];
        }
        y
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.data[k * n + i] * x[k];
            }
            x[i] = s / self.data[i * n + i];
        }
        x
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_fn(self.dim, |i, j| {
            (0..=i.min(j)).map(|k| self.get(i, k) * self.get(j, k)).sum()
        })
    }
}

/// `B = L Lᵀ`.
pub fn cholesky(b: &SymMatrix) -> Result<LowerTriangular> {
    let n = b.dim();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let s = b.get(j, j) - dot(&l[j * n..j * n + j], &l[j * n..j * n + j]);
        if !(s > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = s.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let s = b.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            l[i * n + j] = s / d;
        }
    }
    Ok(LowerTriangular { dim: n, data: l })
}

/// Ascending eigenvalues and matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖K x - λ B x‖₂` for pair `i`; `b = None` means the identity.
    pub fn residual(&self, k: &SymMatrix, b: Option<&SymMatrix>, i: usize) -> f64 {
        let x = &self.vectors[i];
        let kx = k.mul_vec(x);
        let bx = match b {
            Some(b) => b.mul_vec(x),
            None => x.clone(),
        };
        kx.iter()
            .zip(&bx)
            .map(|(a, c)| (a - self.values[i] * c).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

fn normalize_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Householder reduction to tridiagonal form. On return `z` holds the
/// accumulated orthogonal transform (row-major), `d` the diagonal and `e` the
/// subdiagonal with `e[0] = 0`.
fn tridiagonalize(a: &SymMatrix) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut z = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = z[i * n + l];
            } else {
                for k in 0..=l {
                    z[i * n + k] /= scale;
                    h += z[i * n + k] * z[i * n + k];
                }
                let f = z[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i * n + l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    z[j * n + i] = z[i * n + j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[j * n + k] * z[i * n + k];
                    }
                    for k in j + 1..=l {
                        g += z[k * n + j] * z[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * z[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = z[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[j * n + k] -= f * e[k] + g * z[i * n + k];
                    }
                }
            }
        } else {
            e[i] = z[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[i * n + k] * z[k * n + j];
                }
                for k in 0..i {
                    z[k * n + j] -= g * z[k * n + i];
                }
            }
        }
        d[i] = z[i * n + i];
        z[i * n + i] = 1.0;
        for j in 0..i {
            z[j * n + i] = 0.0;
            z[i * n + j] = 0.0;
        }
    }
    (z, d, e)
}

/// Implicit QL on the tridiagonal `(d, e)`, accumulating into `z`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITERATIONS {
                return Err(Error::NoConvergence { iterations: MAX_ITERATIONS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full spectrum of a symmetric matrix, ascending, orthonormal eigenvectors.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: vec![] });
    }
    let (mut z, mut d, mut e) = tridiagonalize(a);
    ql_implicit(&mut d, &mut e, &mut z)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut v: Vec<f64> = (0..n).map(|k| z[k * n + j]).collect();
            normalize_sign(&mut v);
            v
        })
        .collect();
    Ok(EigenDecomposition { values, vectors })
}

/// `K x = λ B x` with `B` positive definite; eigenvectors are `B`-orthonormal.
pub fn gen_eig(k: &SymMatrix, b: &SymMatrix) -> Result<EigenDecomposition> {
    let n = k.dim();
    let l = cholesky(b)?;
    // C = L⁻¹ K L⁻ᵀ, built column by column.
    let mut w = vec![vec![0.0; n]; n];
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| k.get(i, j)).collect();
        w[j] = l.solve_lower(&col);
    }
    // w[j] is column j of L⁻¹K, i.e. row j of K L⁻ᵀ; a second lower solve
    // on each row gives L⁻¹ K L⁻ᵀ.
    let mut full = vec![vec![0.0; n]; n];
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| w[j][i]).collect();
        full[i] = l.solve_lower(&row);
    }
    let c = SymMatrix::from_fn(n, |i, j| 0.5 * (full[i][j] + full[j][i]));
    let mut dec = sym_eig(&c)?;
    for v in dec.vectors.iter_mut() {
        *v = l.solve_upper(v);
        normalize_sign(v);
    }
    Ok(dec)
}

/// Number of eigenvalues of `K x = λ B x` strictly below `sigma`, from the
/// inertia of `K - σ B` (signs of the `LDLᵀ` pivots, no pivoting).
pub fn count_below(k: &SymMatrix, b: &SymMatrix, sigma: f64) -> usize {
    let a = k.shifted(b, sigma);
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut count = 0;
    for j in 0..n {
        let p = m[j][j];
        if p < 0.0 {
            count += 1;
        }
        let p = if p == 0.0 { f64::EPSILON * a.norm() } else { p };
        for i in j + 1..n {
            let f = m[i][j] / p;
            for c in j + 1..n {
                m[i][c] -= f * m[j][c];
            }
        }
    }
    count
}
