//! Small dense linear algebra: a fixed 4×4 matrix type plus row-major helpers
//! for the 1-, 2- and 4-dimensional Gaussians of the `wigner` module.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

/// A real 4×4 matrix acting on phase points `(x1, x2, y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const fn zeros() -> Self {
        Mat4([[0.0; 4]; 4])
    }

    pub const fn identity() -> Self {
        Mat4([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    #[inline]
    pub fn apply(&self, v: &[f64; 4]) -> [f64; 4] {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2] + a[0][3] * v[3],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2] + a[1][3] * v[3],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2] + a[2][3] * v[3],
            a[3][0] * v[0] + a[3][1] * v[1] + a[3][2] * v[2] + a[3][3] * v[3],
        ]
    }

    pub fn matmul(&self, rhs: &Mat4) -> Mat4 {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        det(&self.to_flat(), 4)
    }

    pub fn inverse(&self) -> Option<Mat4> {
        inverse(&self.to_flat(), 4).map(|f| Mat4::from_flat(&f))
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.0.iter().flatten().copied().collect()
    }

    pub fn from_flat(f: &[f64]) -> Mat4 {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i].copy_from_slice(&f[4 * i..4 * i + 4]);
        }
        m
    }
}

impl Default for Mat4 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        self.matmul(&rhs)
    }
}

pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// LU factorisation with partial pivoting of a row-major `n×n` matrix.
/// Returns the packed factors, the row permutation and its sign, or `None`
/// when a pivot is exactly zero.
fn lu(a: &[f64], n: usize) -> Option<(Vec<f64>, Vec<usize>, f64)> {
    let mut m = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| libm::fabs(m[i * n + k]).total_cmp(&libm::fabs(m[j * n + k])))
            .unwrap_or(k);
        if m[p * n + k] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            m[i * n + k] = f;
            for j in k + 1..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    Some((m, perm, sign))
}

pub fn det(a: &[f64], n: usize) -> f64 {
    match lu(a, n) {
        Some((m, _, sign)) => (0..n).map(|i| m[i * n + i]).product::<f64>() * sign,
        None => 0.0,
    }
}

pub fn inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let (m, perm, _) = lu(a, n)?;
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        // Solve L U x = P e_col.
        let mut x: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= m[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= m[i * n + k] * x[k];
            }
            x[i] /= m[i * n + i];
        }
        for i in 0..n {
            inv[i * n + col] = x[i];
        }
    }
    Some(inv)
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i * n + i] = libm::sqrt(d);
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns the
/// eigenvalues and the eigenvectors stored as columns (row-major).
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let scale: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<f64>() + off;
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = libm::copysign(1.0, tau) / (libm::fabs(tau) + libm::sqrt(1.0 + tau * tau));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i * n + i]).collect(), v)
}
