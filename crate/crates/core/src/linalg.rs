//! Small dense kernels for symmetric positive definite systems.
//!
//! Matrices are stored row-major in a flat `Vec<f64>`. The dimensions used by
//! the bandit models are small (tens), so everything here is O(n²) or O(n³)
//! straight-line code with no blocking.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `n x n` identity scaled by `s`, row-major.
pub fn scaled_identity(n: usize, s: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = s;
    }
    m
}

/// `a += scale * x xᵀ`.
pub fn add_outer(a: &mut [f64], x: &[f64], scale: f64) {
    let n = x.len();
    debug_assert_eq!(a.len(), n * n);
    for i in 0..n {
        let xi = scale * x[i];
        if xi == 0.0 {
            continue;
        }
        let row = &mut a[i * n..(i + 1) * n];
        for (r, xj) in row.iter_mut().zip(x) {
            *r += xi * xj;
        }
    }
}

pub fn mat_vec(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}

/// Frobenius norm of `a - b` divided by the Frobenius norm of `b`.
pub fn relative_frobenius(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let base: f64 = b.iter().map(|y| y * y).sum();
    (diff / base).sqrt()
}

/// Lower-triangular Cholesky factor `L` of an SPD matrix `A = L Lᵀ`.
///
/// The strict upper triangle of `l` is kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor of `s · I`.
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Cholesky {
            n,
            l: scaled_identity(n, s.sqrt()),
        }
    }

    /// Dense factorization of a row-major SPD matrix.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::invalid(format!(
                "matrix has {} entries, expected {}",
                a.len(),
                n * n
            )));
        }
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Numeric(format!(
                    "matrix is not positive definite (pivot {j} = {d})"
                )));
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major lower factor.
    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// Replaces `L` with the factor of `L Lᵀ + x xᵀ`.
    ///
    /// Givens-style sweep, O(n²). An update can only grow the pivots, so it
    /// cannot fail for a valid factor.
    #[allow(clippy::needless_range_loop)]
    pub fn rank_one_update(&mut self, x: &[f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        let mut w = x.to_vec();
        for j in 0..n {
            let ljj = self.l[j * n + j];
            let wj = w[j];
            if wj == 0.0 {
                continue;
            }
            let r = ljj.hypot(wj);
            let c = r / ljj;
            let s = wj / ljj;
            self.l[j * n + j] = r;
            for i in (j + 1)..n {
                let lij = (self.l[i * n + j] + s * w[i]) / c;
                self.l[i * n + j] = lij;
                w[i] = c * w[i] - s * lij;
            }
        }
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s = dot(row, &z[..i]);
            z[i] = (z[i] - s) / self.l[i * n + i];
        }
        z
    }

    /// Solves `Lᵀ y = z`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_upper(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = z.to_vec();
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// Solves `A y = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `xᵀ A⁻¹ x`, computed as `‖L⁻¹ x‖²`.
    pub fn inv_quad_form(&self, x: &[f64]) -> f64 {
        let z = self.solve_lower(x);
        dot(&z, &z)
    }

    /// Dense `A = L Lᵀ`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k_max = j + 1;
                let s = dot(&self.l[i * n..i * n + k_max], &self.l[j * n..j * n + k_max]);
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        a
    }

    /// Dense `A⁻¹`, column by column.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.n)
            .map(|i| self.l[i * self.n + i])
            .fold(f64::INFINITY, f64::min)
    }
}
