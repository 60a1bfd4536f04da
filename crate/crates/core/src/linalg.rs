//! Dense symmetric-matrix helpers for small covariance matrices.
//!
//! Design covariances here are `K x K` with `K` rarely above 20, so a
//! plain Cholesky factorization and Schur-complement conditioning are all
//! that is needed. Generic over the scalar so the Gaussian mutual
//! information kernels stay scalar-agnostic.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Row-major dense symmetric matrix.
pub type Matrix<T> = Vec<Vec<T>>;

pub fn zeros<T: Real>(n: usize) -> Matrix<T> {
    vec![vec![T::zero(); n]; n]
}

pub fn is_symmetric<T: Real>(a: &Matrix<T>, tol: T) -> bool {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[i][j] - a[j][i]).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Circulant-style covariance: constant diagonal, constant off-diagonal.
pub fn constant_correlation<T: Real>(n: usize, diag: T, rho: T) -> Matrix<T> {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { diag } else { rho };
        }
    }
    m
}

/// Lower-triangular Cholesky factor of a positive semidefinite matrix.
///
/// Zero (or numerically tiny) pivots are accepted and produce a zero
/// column, so exactly singular PSD matrices factor cleanly. A pivot below
/// `-tol` reports the matrix as not PSD. Returns `L` with `A = L L^T`.
pub fn cholesky_psd<T: Real>(a: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    let n = a.len();
    if !is_symmetric(a, tol.max(real(1e-9))) {
        return Err(Error::domain("covariance matrix must be symmetric"));
    }
    let mut l = zeros::<T>(n);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d = d - l[j][k] * l[j][k];
        }
        if d < -tol {
            return Err(Error::domain(format!(
                "covariance is not positive semidefinite (pivot {j} = {d})"
            )));
        }
        if d <= tol {
            // Singular direction: zero column.
            l[j][j] = T::zero();
            continue;
        }
        let root = d.sqrt();
        l[j][j] = root;
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            l[i][j] = s / root;
        }
    }
    Ok(l)
}

/// Solve `L z = b` for lower-triangular `L` (zero pivots => zero component).
fn forward_solve<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut z = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i][k] * z[k];
        }
        z[i] = if l[i][i] > T::zero() { s / l[i][i] } else { T::zero() };
    }
    z
}

/// Solve `L^T x = z`.
fn backward_solve<T: Real>(l: &Matrix<T>, z: &[T]) -> Vec<T> {
    let n = l.len();
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s = s - l[k][i] * x[k];
        }
        x[i] = if l[i][i] > T::zero() { s / l[i][i] } else { T::zero() };
    }
    x
}

/// Principal submatrix on the given index set.
pub fn submatrix<T: Real>(a: &Matrix<T>, rows: &[usize], cols: &[usize]) -> Matrix<T> {
    rows.iter()
        .map(|&i| cols.iter().map(|&j| a[i][j]).collect())
        .collect()
}

/// Conditioning of a zero-mean Gaussian on a subset of coordinates.
///
/// For `x = (x_a, x_b)` jointly Gaussian with covariance blocks
/// `Σ_aa, Σ_ab, Σ_bb`, holds the conditional covariance
/// `Σ_bb - Σ_ba Σ_aa⁻¹ Σ_ab` (the Schur complement) and the regression
/// matrix `Σ_ba Σ_aa⁻¹` mapping `x_a` to the conditional mean of `x_b`.
#[derive(Debug, Clone)]
pub struct GaussianConditioner<T> {
    pub regression: Matrix<T>,
    pub conditional_cov: Matrix<T>,
}

/// Split a covariance over `a ∪ b` into the conditional law of `x_b | x_a`.
///
/// Requires the `a`-block to be strictly positive definite; a singular
/// conditioning block is a degenerate design and is reported as a domain
/// error.
pub fn condition_on<T: Real>(
    cov: &Matrix<T>,
    a_idx: &[usize],
    b_idx: &[usize],
) -> Result<GaussianConditioner<T>> {
    let tol = real::<T>(1e-12) * max_diag(cov).max(T::one());
    let sigma_aa = submatrix(cov, a_idx, a_idx);
    let sigma_ab = submatrix(cov, a_idx, b_idx);
    let sigma_bb = submatrix(cov, b_idx, b_idx);
    let l = cholesky_psd(&sigma_aa, tol)?;
    if (0..a_idx.len()).any(|i| l[i][i] <= T::zero()) {
        return Err(Error::domain(
            "degenerate covariance: conditioning block is singular",
        ));
    }

    // Columns of Σ_aa⁻¹ Σ_ab, solved against the Cholesky factor.
    let na = a_idx.len();
    let nb = b_idx.len();
    let mut inv_ab = vec![vec![T::zero(); nb]; na];
    for col in 0..nb {
        let rhs: Vec<T> = (0..na).map(|r| sigma_ab[r][col]).collect();
        let x = backward_solve(&l, &forward_solve(&l, &rhs));
        for (row, &v) in x.iter().enumerate() {
            inv_ab[row][col] = v;
        }
    }

    // regression[b][a] = (Σ_ba Σ_aa⁻¹)[b][a] = inv_ab[a][b] transposed.
    let regression: Matrix<T> = (0..nb)
        .map(|b| (0..na).map(|a| inv_ab[a][b]).collect())
        .collect();

    // Schur complement Σ_bb - Σ_ba (Σ_aa⁻¹ Σ_ab).
    let mut conditional = sigma_bb;
    for i in 0..nb {
        for j in 0..nb {
            let mut dot = T::zero();
            for a in 0..na {
                dot = dot + sigma_ab[a][i] * inv_ab[a][j];
            }
            conditional[i][j] = conditional[i][j] - dot;
        }
    }
    // Symmetrize away factorization round-off.
    for i in 0..nb {
        for j in (i + 1)..nb {
            let avg = (conditional[i][j] + conditional[j][i]) / real::<T>(2.0);
            conditional[i][j] = avg;
            conditional[j][i] = avg;
        }
    }

    Ok(GaussianConditioner {
        regression,
        conditional_cov: conditional,
    })
}

/// Quadratic form `v^T A v`.
pub fn quadratic_form<T: Real>(a: &Matrix<T>, v: &[T]) -> T {
    let mut acc = T::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate() {
            acc = acc + v[i] * aij * v[j];
        }
    }
    acc
}

pub fn max_diag<T: Real>(a: &Matrix<T>) -> T {
    let mut m = T::zero();
    for (i, row) in a.iter().enumerate() {
        m = m.max(row[i].abs());
    }
    m
}

/// Matrix-vector product `A v` (used for conditional means).
pub fn mat_vec<T: Real>(a: &Matrix<T>, v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(T::zero(), |s, (&aij, &vj)| s + aij * vj))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_na(a: &Matrix<f64>) -> DMatrix<f64> {
        let n = a.len();
        DMatrix::from_fn(n, n, |i, j| a[i][j])
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
        // B B^T + small ridge, guaranteed PD.
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let mut a = zeros::<f64>(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b[i][k] * b[j][k];
                }
                a[i][j] = s + if i == j { 1e-6 } else { 0.0 };
            }
        }
        a
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8usize {
            let a = random_psd(&mut rng, n);
            let l = cholesky_psd(&a, 1e-12).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += l[i][k] * l[j][k];
                    }
                    assert_relative_eq!(s, a[i][j], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn cholesky_accepts_singular_psd() {
        // Rank-1 all-ones matrix.
        let a = constant_correlation(4, 1.0, 1.0);
        let l = cholesky_psd(&a, 1e-12).unwrap();
        let mut s = 0.0;
        for k in 0..4 {
            s += l[3][k] * l[0][k];
        }
        assert_relative_eq!(s, 1.0, epsilon = 1e-9);
        // Zero matrix factors to zero.
        let z = zeros::<f64>(3);
        assert!(cholesky_psd(&z, 1e-12).is_ok());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = constant_correlation(3, 1.0, 0.0);
        a[2][2] = -0.5;
        assert!(cholesky_psd(&a, 1e-12).is_err());
        // Asymmetric input rejected.
        let mut b = constant_correlation(2, 1.0, 0.1);
        b[0][1] = 0.3;
        assert!(cholesky_psd(&b, 1e-12).is_err());
    }

    #[test]
    fn schur_complement_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..7usize);
            let a = random_psd(&mut rng, n);
            let split = rng.gen_range(1..n);
            let a_idx: Vec<usize> = (0..split).collect();
            let b_idx: Vec<usize> = (split..n).collect();
            let cond = condition_on(&a, &a_idx, &b_idx).unwrap();

            let na_full = to_na(&a);
            let saa = na_full.view((0, 0), (split, split)).into_owned();
            let sab = na_full.view((0, split), (split, n - split)).into_owned();
            let sba = sab.transpose();
            let sbb = na_full
                .view((split, split), (n - split, n - split))
                .into_owned();
            let inv = saa.try_inverse().unwrap();
            let want_cov = &sbb - &sba * &inv * &sab;
            let want_reg = &sba * &inv;

            for i in 0..(n - split) {
                for j in 0..(n - split) {
                    assert_relative_eq!(
                        cond.conditional_cov[i][j],
                        want_cov[(i, j)],
                        epsilon = 1e-8
                    );
                }
                for j in 0..split {
                    assert_relative_eq!(cond.regression[i][j], want_reg[(i, j)], epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn condition_on_singular_block_is_domain_error() {
        let a = zeros::<f64>(3);
        assert!(condition_on(&a, &[0], &[1, 2]).is_err());
    }

    #[test]
    fn quadratic_form_small_case() {
        let a = constant_correlation(2, 2.0, 0.5);
        // [1, -1]: 2 - 0.5 - 0.5 + 2 = 3.
        assert_relative_eq!(quadratic_form(&a, &[1.0, -1.0]), 3.0, epsilon = 1e-12);
    }
}
