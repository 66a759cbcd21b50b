//! Small dense linear algebra: exact rational rank and a one-sided Jacobi SVD.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::poly::Rational;

/// Rank of a set of rational row vectors by exact Gaussian elimination.
pub fn rank_exact(rows: &[[Rational; 4]]) -> usize {
    let mut m: Vec<[Rational; 4]> = rows.to_vec();
    let mut rank = 0;
    for col in 0..4 {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let pivot_row = m[rank].clone();
        for r in (rank + 1)..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pivot_row[col];
            for k in col..4 {
                let d = &factor * &pivot_row[k];
                m[r][k] -= d;
            }
        }
        rank += 1;
        if rank == 4 {
            break;
        }
    }
    rank
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0, |a, (p, q)| a.max((p - q).abs()))
    }
}

/// Singular values (descending) and right singular vectors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub sigma: Vec<f64>,
    /// `v[k]` is the right singular vector belonging to `sigma[k]`.
    pub v: Vec<Vec<f64>>,
}

/// One-sided (Hestenes) Jacobi SVD. Accurate to high relative precision in
/// the small singular values, which is what the rank tests need.
pub fn svd(a: &Matrix) -> Svd {
    let (m, n) = (a.rows, a.cols);
    // columns of a, stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[p][i], v[q][i]);
                    v[p][i] = c * x - s * y;
                    v[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .zip(v)
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let (sigma, v) = pairs.into_iter().unzip();
    Svd { sigma, v }
}

/// Singular values of `a`, descending, padded with zeros to `min(rows, cols)`.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows >= a.cols {
        svd(a).sigma
    } else {
        svd(&a.transpose()).sigma
    }
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn rank_relative(a: &Matrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY4: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    core::array::from_fn(|i| core::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn mat4_vec(a: &Mat4, x: &[f64; 4]) -> [f64; 4] {
    core::array::from_fn(|i| (0..4).map(|k| a[i][k] * x[k]).sum())
}

pub fn mat4_transpose_vec(a: &Mat4, x: &[f64; 4]) -> [f64; 4] {
    core::array::from_fn(|i| (0..4).map(|k| a[k][i] * x[k]).sum())
}

pub fn mat4_det(a: &Mat4) -> f64 {
    // Laplace expansion with 2×2 minors of the lower rows
    let m = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let s0 = m(0, 1, 0, 1);
    let s1 = m(0, 1, 0, 2);
    let s2 = m(0, 1, 0, 3);
    let s3 = m(0, 1, 1, 2);
    let s4 = m(0, 1, 1, 3);
    let s5 = m(0, 1, 2, 3);
    let c5 = m(2, 3, 2, 3);
    let c4 = m(2, 3, 1, 3);
    let c3 = m(2, 3, 1, 2);
    let c2 = m(2, 3, 0, 3);
    let c1 = m(2, 3, 0, 2);
    let c0 = m(2, 3, 0, 1);
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

pub fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn exact_rank_detects_dependence() {
        let r = |a: [i64; 4]| a.map(|v| rat(v, 1));
        assert_eq!(rank_exact(&[r([1, 2, 0, 0]), r([2, 4, 0, 0])]), 1);
        assert_eq!(rank_exact(&[r([1, 2, 0, 0]), r([0, 0, 0, 1]), r([1, 2, 0, 1])]), 2);
        assert_eq!(rank_exact(&[r([0, 0, 1, 0]), r([0, 0, 0, 1]), r([1, 0, 0, 0]), r([0, 1, 0, 0])]), 4);
        assert_eq!(rank_exact(&[]), 0);
    }

    #[test]
    fn svd_of_orthonormal_rows_is_one() {
        let m = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ]);
        let s = singular_values(&m);
        assert_eq!(s.len(), 4);
        for x in s {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn svd_recovers_known_values_and_kernel() {
        // diag(3, 2, 1e-9, 0) rotated in the (0,1) plane
        let (c, s) = (0.6, 0.8);
        let m = Matrix::from_rows(&[
            vec![3.0 * c, -3.0 * s, 0.0, 0.0],
            vec![2.0 * s, 2.0 * c, 0.0, 0.0],
            vec![0.0, 0.0, 1e-9, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ]);
        let d = svd(&m);
        assert!((d.sigma[0] - 3.0).abs() < 1e-14);
        assert!((d.sigma[1] - 2.0).abs() < 1e-14);
        assert!((d.sigma[2] - 1e-9).abs() < 1e-22);
        assert_eq!(d.sigma[3], 0.0);
        assert!((d.v[3][3].abs() - 1.0).abs() < 1e-14);
        assert_eq!(rank_relative(&m, 1e-9), 2);
        assert_eq!(rank_relative(&m, 1e-12), 3);
    }

    #[test]
    fn det_matches_cofactor_on_permutation() {
        let p: Mat4 = [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0], [0.0, 0.0, 3.0, 0.0]];
        assert_eq!(mat4_det(&p), 6.0);
        assert_eq!(mat4_det(&IDENTITY4), 1.0);
    }
}
