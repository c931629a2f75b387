//! Point-forecast accuracy metrics. Percent metrics are scaled by 100.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check<F: Scalar>(actual: &[F], predicted: &[F]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::Argument(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Argument("no forecast pairs to score".into()));
    }
    Ok(())
}

pub fn rmse<F: Scalar>(actual: &[F], predicted: &[F]) -> Result<F> {
    check(actual, predicted)?;
    let sq: F = actual.iter().zip(predicted).map(|(&y, &p)| (y - p) * (y - p)).sum();
    Ok((sq / F::from_usize_lossy(actual.len())).sqrt())
}

pub fn mae<F: Scalar>(actual: &[F], predicted: &[F]) -> Result<F> {
    check(actual, predicted)?;
    let abs: F = actual.iter().zip(predicted).map(|(&y, &p)| (y - p).abs()).sum();
    Ok(abs / F::from_usize_lossy(actual.len()))
}

/// Mean absolute percentage error. Pairs with a zero actual are skipped;
/// returns the metric and the number of skipped pairs.
pub fn mape<F: Scalar>(actual: &[F], predicted: &[F]) -> Result<(F, usize)> {
    check(actual, predicted)?;
    let mut total = F::zero();
    let mut n = 0usize;
    for (&y, &p) in actual.iter().zip(predicted) {
        if y == F::zero() {
            continue;
        }
        total += ((y - p) / y).abs();
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedMetric("mape"));
    }
    Ok((total / F::from_usize_lossy(n) * F::lit(100.0), actual.len() - n))
}

/// Symmetric MAPE with denominator `|y| + |p|`; `0/0` pairs count as 0.
pub fn smape<F: Scalar>(actual: &[F], predicted: &[F]) -> Result<F> {
    check(actual, predicted)?;
    let mut total = F::zero();
    for (&y, &p) in actual.iter().zip(predicted) {
        let den = y.abs() + p.abs();
        if den > F::zero() {
            total += (y - p).abs() / den;
        }
    }
    Ok(total / F::from_usize_lossy(actual.len()) * F::lit(100.0))
}

/// `1 - m_f / m_r`; positive when the forecast beats the reference.
pub fn skill_score<F: Scalar>(m_f: F, m_r: F) -> Result<F> {
    if m_r.partial_cmp(&F::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Argument(format!("reference metric must be positive, got {m_r}")));
    }
    Ok(F::one() - m_f / m_r)
}

/// All metrics for one set of forecast pairs, in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub mae: f64,
    /// `None` when every actual is zero.
    pub mape: Option<f64>,
    pub smape: f64,
    pub n: usize,
    pub mape_skipped: usize,
}

impl MetricReport {
    pub fn compute<F: Scalar>(actual: &[F], predicted: &[F]) -> Result<Self> {
        let (mape, mape_skipped) = match mape(actual, predicted) {
            Ok((m, s)) => (Some(m.as_f64()), s),
            Err(Error::UndefinedMetric(_)) => (None, actual.len()),
            Err(e) => return Err(e),
        };
        Ok(Self {
            rmse: rmse(actual, predicted)?.as_f64(),
            mae: mae(actual, predicted)?.as_f64(),
            mape,
            smape: smape(actual, predicted)?.as_f64(),
            n: actual.len(),
            mape_skipped,
        })
    }

    /// Arithmetic mean of each metric over windows. MAPE averages only the
    /// windows where it is defined.
    pub fn mean(reports: &[MetricReport]) -> Option<Self> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let mapes: Vec<f64> = reports.iter().filter_map(|r| r.mape).collect();
        Some(Self {
            rmse: avg(|r| r.rmse),
            mae: avg(|r| r.mae),
            mape: (!mapes.is_empty()).then(|| mapes.iter().sum::<f64>() / mapes.len() as f64),
            smape: avg(|r| r.smape),
            n: reports.iter().map(|r| r.n).sum(),
            mape_skipped: reports.iter().map(|r| r.mape_skipped).sum(),
        })
    }
}
