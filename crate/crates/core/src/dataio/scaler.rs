use serde::{Deserialize, Serialize};

use super::series::MultivariateSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-variable min-max normalization onto [0, 1].
///
/// Constant variables map to 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MinMaxScaler<F: Scalar> {
    pub names: Vec<String>,
    pub min: Vec<F>,
    pub max: Vec<F>,
}

impl<F: Scalar> MinMaxScaler<F> {
    pub fn fit(series: &MultivariateSeries<F>, variables: &[String]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::Argument("cannot fit a scaler on an empty series".into()));
        }
        let mut min = Vec::with_capacity(variables.len());
        let mut max = Vec::with_capacity(variables.len());
        for name in variables {
            let col = series.column(name)?;
            min.push(col.iter().copied().fold(F::infinity(), F::min));
            max.push(col.iter().copied().fold(F::neg_infinity(), F::max));
        }
        Ok(Self {
            names: variables.to_vec(),
            min,
            max,
        })
    }

    /// Fits on the columns of a row-major matrix.
    pub fn fit_rows(names: &[String], rows: &[Vec<F>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Argument("cannot fit a scaler on an empty matrix".into()));
        }
        let m = names.len();
        let mut min = vec![F::infinity(); m];
        let mut max = vec![F::neg_infinity(); m];
        for r in rows {
            for j in 0..m {
                min[j] = min[j].min(r[j]);
                max[j] = max[j].max(r[j]);
            }
        }
        Ok(Self {
            names: names.to_vec(),
            min,
            max,
        })
    }

    pub fn is_fitted(&self) -> bool {
        !self.names.is_empty()
    }

    fn check_fitted(&self) -> Result<()> {
        if self.is_fitted() {
            Ok(())
        } else {
            Err(Error::State("scaler used before fit".into()))
        }
    }

    #[inline]
    pub fn scale_value(&self, j: usize, v: F) -> F {
        let range = self.max[j] - self.min[j];
        if range > F::zero() {
            (v - self.min[j]) / range
        } else {
            F::zero()
        }
    }

    #[inline]
    pub fn unscale_value(&self, j: usize, v: F) -> F {
        v * (self.max[j] - self.min[j]) + self.min[j]
    }

    /// Scales a vector laid out in the scaler's variable order.
    pub fn apply_row(&self, row: &[F]) -> Result<Vec<F>> {
        self.check_fitted()?;
        if row.len() != self.names.len() {
            return Err(Error::Argument(format!(
                "scaler expects {} values, got {}",
                self.names.len(),
                row.len()
            )));
        }
        Ok(row.iter().enumerate().map(|(j, &v)| self.scale_value(j, v)).collect())
    }

    pub fn apply(&self, series: &MultivariateSeries<F>) -> Result<MultivariateSeries<F>> {
        self.transform(series, |s, j, v| s.scale_value(j, v))
    }

    pub fn invert(&self, series: &MultivariateSeries<F>) -> Result<MultivariateSeries<F>> {
        self.transform(series, |s, j, v| s.unscale_value(j, v))
    }

    fn transform(
        &self,
        series: &MultivariateSeries<F>,
        f: impl Fn(&Self, usize, F) -> F,
    ) -> Result<MultivariateSeries<F>> {
        self.check_fitted()?;
        // column in series -> index in scaler
        let mut map = vec![None; series.width()];
        for (k, name) in self.names.iter().enumerate() {
            let j = series
                .column_index(name)
                .map_err(|_| Error::Schema(format!("scaler variable `{name}` missing from series")))?;
            map[j] = Some(k);
        }
        Ok(series.map_values(|j, v| match map[j] {
            Some(k) => f(self, k, v),
            None => v,
        }))
    }
}
