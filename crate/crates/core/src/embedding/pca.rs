use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen;
use crate::scalar::Scalar;

/// Principal-component projection onto the top `k` eigenvectors of the
/// training covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PcaModel<F: Scalar> {
    pub m: usize,
    pub k: usize,
    /// Per-variable training mean.
    pub mean: Vec<F>,
    /// `m x k` row-major; column `j` is the `j`-th principal axis.
    pub components: Vec<F>,
    /// Top `k` eigenvalues, descending.
    pub eigenvalues: Vec<F>,
}

/// Sample covariance (divisor `T - 1`) of row-major data, and the column means.
pub fn covariance<F: Scalar>(rows: &[Vec<F>], m: usize) -> (Vec<F>, Vec<F>) {
    let t = F::from_usize_lossy(rows.len());
    let mut mean = vec![F::zero(); m];
    for r in rows {
        for (acc, &v) in mean.iter_mut().zip(r) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= t);
    let mut cov = vec![F::zero(); m * m];
    let mut centered = vec![F::zero(); m];
    for r in rows {
        for j in 0..m {
            centered[j] = r[j] - mean[j];
        }
        for i in 0..m {
            for j in i..m {
                cov[i * m + j] += centered[i] * centered[j];
            }
        }
    }
    let denom = t - F::one();
    for i in 0..m {
        for j in i..m {
            cov[i * m + j] /= denom;
            cov[j * m + i] = cov[i * m + j];
        }
    }
    (cov, mean)
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
pub(crate) fn canonical_sign<F: Scalar>(v: &mut [F]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < F::zero()) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

impl<F: Scalar> PcaModel<F> {
    pub fn fit(rows: &[Vec<F>], k: usize) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.len());
        if rows.len() < 2 {
            return Err(Error::Argument(format!("PCA needs at least 2 rows, got {}", rows.len())));
        }
        if k == 0 || k > m {
            return Err(Error::Argument(format!("PCA dimension k = {k} must lie in 1..={m}")));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Argument("PCA rows have inconsistent widths".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Argument("PCA input contains non-finite values".into()));
        }
        let (cov, mean) = covariance(rows, m);
        let eig = jacobi_eigen(&cov, m)?;
        let mut components = vec![F::zero(); m * k];
        for j in 0..k {
            let mut v = eig.vector(j);
            canonical_sign(&mut v);
            for i in 0..m {
                components[i * k + j] = v[i];
            }
        }
        let eigenvalues = eig.values[..k].iter().map(|&l| l.max(F::zero())).collect();
        Ok(Self {
            m,
            k,
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn component(&self, j: usize) -> Vec<F> {
        (0..self.m).map(|i| self.components[i * self.k + j]).collect()
    }

    /// `Z^T (y - mean)`.
    pub fn embed(&self, y: &[F]) -> Result<Vec<F>> {
        if y.len() != self.m {
            return Err(Error::Argument(format!("PCA expects {} inputs, got {}", self.m, y.len())));
        }
        let mut out = vec![F::zero(); self.k];
        for (i, (&v, &mu)) in y.iter().zip(&self.mean).enumerate() {
            let c = v - mu;
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.components[i * self.k + j] * c;
            }
        }
        Ok(out)
    }

    /// Maps an embedding back to input space: `mean + Z e`.
    pub fn reconstruct(&self, e: &[F]) -> Vec<F> {
        (0..self.m)
            .map(|i| {
                self.mean[i]
                    + (0..self.k)
                        .map(|j| self.components[i * self.k + j] * e[j])
                        .sum::<F>()
            })
            .collect()
    }
}
