//! Dense least squares via Householder QR with column pivoting.
//!
//! Rank-deficient systems are completed with a second (unpivoted) QR of the
//! leading trapezoid, giving the minimum-norm solution among all least
//! squares minimisers.

// Index loops mirror the textbook recurrences more clearly than iterators.
#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row slices; every row must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |r| self.get(r, c))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `selfᵀ · v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * vr;
            }
        }
        out
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR factorisation stored compactly: `R` on and above the
/// diagonal, reflector tails below it, scalar factors in `tau`.
struct Qr {
    a: Matrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl Qr {
    fn factor(mut a: Matrix, pivot: bool) -> Self {
        let (m, n) = (a.rows, a.cols);
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..steps {
            if pivot {
                // Exact trailing norms each step; problems here are small.
                let mut best = k;
                let mut best_norm = -1.0;
                for j in k..n {
                    let s: f64 = (k..m).map(|i| a.get(i, j).powi(2)).sum();
                    if s > best_norm {
                        best_norm = s;
                        best = j;
                    }
                }
                a.swap_cols(k, best);
                perm.swap(k, best);
            }

            let norm = (k..m).map(|i| a.get(i, k).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let x0 = a.get(k, k);
            let beta = if x0 >= 0.0 { -norm } else { norm };
            let scale = x0 - beta;
            for i in k + 1..m {
                a.set(i, k, a.get(i, k) / scale);
            }
            tau[k] = (beta - x0) / beta;
            a.set(k, k, beta);

            for j in k + 1..n {
                let mut w = a.get(k, j);
                for i in k + 1..m {
                    w += a.get(i, k) * a.get(i, j);
                }
                w *= tau[k];
                a.set(k, j, a.get(k, j) - w);
                for i in k + 1..m {
                    a.set(i, j, a.get(i, j) - w * a.get(i, k));
                }
            }
        }
        Self { a, tau, perm }
    }

    /// Applies `Qᵀ` to `b` in place.
    fn apply_qt(&self, b: &mut [f64]) {
        let m = self.a.rows;
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let mut w = b[k];
            for i in k + 1..m {
                w += self.a.get(i, k) * b[i];
            }
            w *= t;
            b[k] -= w;
            for i in k + 1..m {
                b[i] -= w * self.a.get(i, k);
            }
        }
    }

    /// Applies `Q` to `b` in place.
    fn apply_q(&self, b: &mut [f64]) {
        let m = self.a.rows;
        for (k, &t) in self.tau.iter().enumerate().rev() {
            if t == 0.0 {
                continue;
            }
            let mut w = b[k];
            for i in k + 1..m {
                w += self.a.get(i, k) * b[i];
            }
            w *= t;
            b[k] -= w;
            for i in k + 1..m {
                b[i] -= w * self.a.get(i, k);
            }
        }
    }

    fn r_diag(&self) -> Vec<f64> {
        (0..self.tau.len()).map(|k| self.a.get(k, k)).collect()
    }
}

/// Outcome of a least squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub coefficients: Vec<f64>,
    /// Numerical rank of the system matrix.
    pub rank: usize,
    /// `|R₀₀| / |R_{r-1,r-1}|` over the numerically nonzero pivots.
    pub condition: f64,
}

/// Minimum-norm least squares solution of `a · x ≈ b`.
///
/// Pivots with `|R_kk| <= rcond · |R_00|` count as zero. Passing `None`
/// uses `max(m, n) · ε`.
pub fn lstsq(a: &Matrix, b: &[f64], rcond: Option<f64>) -> LstsqSolution {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    let (m, n) = (a.rows(), a.cols());
    let rcond = rcond.unwrap_or(m.max(n) as f64 * f64::EPSILON);

    let qr = Qr::factor(a.clone(), true);
    let diag = qr.r_diag();
    let lead = diag.first().map_or(0.0, |d| d.abs());
    let rank = if lead == 0.0 {
        0
    } else {
        diag.iter().take_while(|d| d.abs() > rcond * lead).count()
    };

    let mut x = vec![0.0; n];
    if rank == 0 {
        return LstsqSolution {
            coefficients: x,
            rank,
            condition: f64::INFINITY,
        };
    }
    let condition = lead / diag[rank - 1].abs();

    let mut c = b.to_vec();
    qr.apply_qt(&mut c);
    let c = &c[..rank];

    let z = if rank == n {
        // R z = c, back substitution.
        let mut z = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = c[i];
            for j in i + 1..n {
                s -= qr.a.get(i, j) * z[j];
            }
            z[i] = s / qr.a.get(i, i);
        }
        z
    } else {
        // [R11 R12] = [Lᵀ 0] Q2ᵀ with W = [R11 R12]ᵀ = Q2 [L; 0].
        let mut trap = Matrix::zeros(rank, n);
        for i in 0..rank {
            for j in i..n {
                trap.set(i, j, qr.a.get(i, j));
            }
        }
        let second = Qr::factor(trap.transpose(), false);
        // Lᵀ z1 = c, forward substitution (Lᵀ is lower triangular).
        let mut z = vec![0.0; n];
        for i in 0..rank {
            let mut s = c[i];
            for j in 0..i {
                s -= second.a.get(j, i) * z[j];
            }
            z[i] = s / second.a.get(i, i);
        }
        second.apply_q(&mut z);
        z
    };

    for (j, &p) in qr.perm.iter().enumerate() {
        x[p] = z[j];
    }
    LstsqSolution {
        coefficients: x,
        rank,
        condition,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual_normal(a: &Matrix, b: &[f64], x: &[f64]) -> f64 {
        let ax = a.mul_vec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, p)| b - p).collect();
        a.tr_mul_vec(&r).iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn square_system_solves_exactly() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]);
        let sol = lstsq(&a, &[3.0, 5.0], None);
        assert_eq!(sol.rank, 2);
        assert!((sol.coefficients[0] - 0.8).abs() < 1e-14);
        assert!((sol.coefficients[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn overdetermined_fit_has_orthogonal_residual() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]]);
        let b = [1.0, 2.9, 5.2, 6.8];
        let sol = lstsq(&a, &b, None);
        assert_eq!(sol.rank, 2);
        assert!(residual_normal(&a, &b, &sol.coefficients) < 1e-12);
    }

    #[test]
    fn duplicated_column_splits_weight_evenly() {
        // Columns 1 and 2 are identical; the minimum-norm answer shares the
        // slope equally between them.
        let a = Matrix::from_rows(&[[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 3.0, 3.0]]);
        let b = [3.0, 5.0, 7.0];
        let sol = lstsq(&a, &b, None);
        assert_eq!(sol.rank, 2);
        let x = &sol.coefficients;
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
        assert!((x[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let a = Matrix::zeros(3, 2);
        let sol = lstsq(&a, &[1.0, 2.0, 3.0], None);
        assert_eq!(sol.rank, 0);
        assert_eq!(sol.coefficients, vec![0.0, 0.0]);
    }

    #[test]
    fn underdetermined_system_is_minimum_norm() {
        // x + y = 2 -> minimum norm (1, 1)
        let a = Matrix::from_rows(&[[1.0, 1.0]]);
        let sol = lstsq(&a, &[2.0], None);
        assert_eq!(sol.rank, 1);
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-14);
        assert!((sol.coefficients[1] - 1.0).abs() < 1e-14);
    }
}
