//! Small dense vectors and matrices for ambient dimension at most 4.
//!
//! Surfaces live in `R^{n+1}` with `n <= 3`, so a fixed 4-slot vector with a
//! runtime dimension avoids heap churn in quadrature loops.

use crate::error::{ExigeoError, Result};

/// A vector in `R^d`, `d <= 4`. Unused slots stay zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecN {
    data: [f64; 4],
    dim: usize,
}

impl VecN {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=4).contains(&dim), "VecN supports dimensions 1..=4");
        VecN { data: [0.0; 4], dim }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut out = Self::zeros(v.len());
        out.data[..v.len()].copy_from_slice(v);
        out
    }

    /// Standard basis vector `e_i` of `R^d`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut out = Self::zeros(dim);
        out.data[i] = 1.0;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn get(&self, i: usize) -> f64 {
        debug_assert!(i < self.dim);
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        debug_assert!(i < self.dim);
        self.data[i] = v;
    }

    pub fn dot(&self, other: &VecN) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.data[i] * other.data[i];
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> VecN {
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] *= c;
        }
        out
    }

    pub fn add(&self, other: &VecN) -> VecN {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] += other.data[i];
        }
        out
    }

    pub fn sub(&self, other: &VecN) -> VecN {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] -= other.data[i];
        }
        out
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &VecN) -> VecN {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] += c * other.data[i];
        }
        out
    }

    pub fn normalized(&self) -> Result<VecN> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(ExigeoError::validation("cannot normalize zero or non-finite vector"));
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn dist(&self, other: &VecN) -> f64 {
        self.sub(other).norm()
    }
}

/// Solve the square system `a x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `k x k`; both are consumed as scratch.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], k: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), k * k);
    debug_assert_eq!(b.len(), k);
    for col in 0..k {
        let mut piv = col;
        let mut best = a[col * k + col].abs();
        for row in col + 1..k {
            let v = a[row * k + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < 1e-300 {
            return Err(ExigeoError::numerical("singular linear system"));
        }
        if piv != col {
            for j in 0..k {
                a.swap(col * k + j, piv * k + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * k + col];
        for row in col + 1..k {
            let f = a[row * k + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..k {
                a[row * k + j] -= f * a[col * k + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = b[col];
        for j in col + 1..k {
            s -= a[col * k + j] * x[j];
        }
        x[col] = s / a[col * k + col];
    }
    Ok(x)
}

/// Linear least squares `min |A x - y|` via the normal equations.
/// `rows` holds one design row per observation.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    if m == 0 {
        return Err(ExigeoError::validation("least squares needs at least one sample"));
    }
    let k = rows[0].len();
    if m < k {
        return Err(ExigeoError::validation("least squares is underdetermined"));
    }
    let mut ata = vec![0.0; k * k];
    let mut aty = vec![0.0; k];
    for (row, &yi) in rows.iter().zip(y) {
        debug_assert_eq!(row.len(), k);
        for i in 0..k {
            aty[i] += row[i] * yi;
            for j in 0..k {
                ata[i * k + j] += row[i] * row[j];
            }
        }
    }
    let x = solve_dense(&mut ata, &mut aty, k)
        .map_err(|_| ExigeoError::numerical("ill-conditioned least-squares design"))?;
    let mut max_resid = 0.0f64;
    for (row, &yi) in rows.iter().zip(y) {
        let pred: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        max_resid = max_resid.max((pred - yi).abs());
    }
    Ok((x, max_resid))
}

/// Fit `y = intercept + slope * x` and return `(intercept, slope)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
    let (c, _) = least_squares(&rows, y)?;
    Ok((c[0], c[1]))
}

/// Eigen-decomposition of a symmetric `k x k` matrix by cyclic Jacobi
/// rotations. Returns `(eigenvalues, eigenvectors)` with eigenvectors as
/// columns, ascending eigenvalue order.
pub fn sym_eigen(mat: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(mat.len(), k * k);
    let mut a = mat.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..k {
            for q in p + 1..k {
                off += a[p * k + q] * a[p * k + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for j in 0..k {
                    let ajp = a[j * k + p];
                    let ajq = a[j * k + q];
                    a[j * k + p] = c * ajp - s * ajq;
                    a[j * k + q] = s * ajp + c * ajq;
                }
                for j in 0..k {
                    let apj = a[p * k + j];
                    let aqj = a[q * k + j];
                    a[p * k + j] = c * apj - s * aqj;
                    a[q * k + j] = s * apj + c * aqj;
                }
                for j in 0..k {
                    let vjp = v[j * k + p];
                    let vjq = v[j * k + q];
                    v[j * k + p] = c * vjp - s * vjq;
                    v[j * k + q] = s * vjp + c * vjq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| a[i * k + i].partial_cmp(&a[j * k + j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| a[i * k + i]).collect();
    let mut vecs = vec![0.0; k * k];
    for (new_col, &old_col) in idx.iter().enumerate() {
        for row in 0..k {
            vecs[row * k + new_col] = v[row * k + old_col];
        }
    }
    (vals, vecs)
}

/// Volume of the unit ball in `R^m` via the recursion
/// `omega_m = 2 pi omega_{m-2} / m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI * unit_ball_volume(m - 2) / m as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn solve_small_system() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![5.0, 10.0];
        let x = solve_dense(&mut a, &mut b, 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_of_diagonal_plus_rank_one() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let (vals, vecs) = sym_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        // eigenvector for 1 is (1,-1)/sqrt2
        assert!((vecs[0].abs() - vecs[2].abs()).abs() < 1e-10);
    }

    #[test]
    fn least_squares_exact_fit() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let y = vec![1.0, 3.0, 5.0];
        let (c, r) = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((c[1] - 2.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }
}
