//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<F> {
    pub values: Vec<F>,
    /// `n x n` row-major; column `j` is the eigenvector for `values[j]`.
    pub vectors: Vec<F>,
    pub n: usize,
    pub sweeps: usize,
}

impl<F: Scalar> SymmetricEigen<F> {
    pub fn vector(&self, j: usize) -> Vec<F> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }
}

pub const MAX_SWEEPS: usize = 100;

/// Decomposes the symmetric `n x n` row-major matrix `a`. Only symmetry of
/// the input is assumed; the lower triangle is mirrored from the upper.
pub fn jacobi_eigen<F: Scalar>(a: &[F], n: usize) -> Result<SymmetricEigen<F>> {
    if a.len() != n * n {
        return Err(Error::Argument(format!("expected {} entries for a {n}x{n} matrix, got {}", n * n, a.len())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("matrix has non-finite entries"));
    }
    let mut m = a.to_vec();
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    let mut v = vec![F::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = F::one();
    }

    let frob2: F = m.iter().map(|&x| x * x).sum();
    let tol = F::epsilon() * F::epsilon() * frob2;
    let two = F::lit(2.0);
    let mut sweeps = 0;
    loop {
        let off: F = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q] * m[p * n + q])
            .sum();
        if off <= tol || off == F::zero() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::numeric(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (off-diagonal {off})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                for k in 0..n {
                    let (kp, kq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * kp - s * kq;
                    v[k * n + q] = s * kp + c * kq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their Jacobi order
    order.sort_by(|&i, &j| m[j * n + j].partial_cmp(&m[i * n + i]).unwrap());
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![F::zero(); n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + dst] = v[i * n + src];
        }
    }
    Ok(SymmetricEigen { values, vectors, n, sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_sorted() {
        let e = jacobi_eigen(&[1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0], 3).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        // [[2,1],[1,2]] has eigenpairs 3 -> (1,1)/sqrt2, 1 -> (1,-1)/sqrt2
        let e = jacobi_eigen::<f64>(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v = e.vector(0);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((v[0] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_matrix_f32() {
        let a: [f32; 9] = [4.0, 1.0, -2.0, 1.0, 2.0, 0.0, -2.0, 0.0, 3.0];
        let e = jacobi_eigen(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let r: f32 = (0..3).map(|k| e.vectors[i * 3 + k] * e.values[k] * e.vectors[j * 3 + k]).sum();
                assert!((r - a[i * 3 + j]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn rejects_nan() {
        assert!(matches!(jacobi_eigen(&[f64::NAN], 1), Err(Error::Numeric { .. })));
    }
}
