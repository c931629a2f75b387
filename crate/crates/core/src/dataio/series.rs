use std::ops::Range;

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A time-indexed matrix of `M` named variables stored row-major.
///
/// Missing cells are represented as NaN until the series is passed through
/// [`drop_missing`](super::drop_missing).
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries<F> {
    timestamps: Vec<NaiveDateTime>,
    names: Vec<String>,
    values: Vec<F>,
    target: String,
}

impl<F: Scalar> MultivariateSeries<F> {
    /// Builds a series from row-major values. Timestamps must be strictly
    /// increasing and the target must be one of `names`.
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        names: Vec<String>,
        values: Vec<F>,
        target: impl Into<String>,
    ) -> Result<Self> {
        let target = target.into();
        if !names.contains(&target) {
            return Err(Error::Schema(format!(
                "target `{target}` is not among the variables {names:?}"
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::Schema(format!("duplicate variable `{name}`")));
            }
        }
        if values.len() != timestamps.len() * names.len() {
            return Err(Error::Argument(format!(
                "expected {} values for {} rows x {} variables, got {}",
                timestamps.len() * names.len(),
                timestamps.len(),
                names.len(),
                values.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Argument(format!(
                "timestamps must be strictly increasing (row {} = {}, row {} = {})",
                w,
                timestamps[w],
                w + 1,
                timestamps[w + 1]
            )));
        }
        Ok(Self {
            timestamps,
            names,
            values,
            target,
        })
    }

    /// Builds a series from a list of rows.
    pub fn from_rows(
        timestamps: Vec<NaiveDateTime>,
        names: Vec<String>,
        rows: &[Vec<F>],
        target: impl Into<String>,
    ) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != names.len()) {
            return Err(Error::Argument(format!(
                "row {bad} has {} values, expected {}",
                rows[bad].len(),
                names.len()
            )));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(timestamps, names, values, target)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Number of variables `M`.
    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[F] {
        let m = self.width();
        &self.values[t * m..(t + 1) * m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[F]> + '_ {
        let m = self.width().max(1);
        // chunks_exact on an empty slice yields nothing, which is what we want for T = 0.
        self.values.chunks_exact(m).take(self.len())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema(format!("unknown variable `{name}`")))
    }

    pub fn target_index(&self) -> usize {
        // invariant established in `new`
        self.names.iter().position(|n| *n == self.target).unwrap()
    }

    pub fn column(&self, name: &str) -> Result<Vec<F>> {
        let j = self.column_index(name)?;
        Ok(self.column_at(j))
    }

    pub fn column_at(&self, j: usize) -> Vec<F> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn target_values(&self) -> Vec<F> {
        self.column_at(self.target_index())
    }

    /// Contiguous sub-series over a row range.
    pub fn slice(&self, range: Range<usize>) -> Self {
        let m = self.width();
        Self {
            timestamps: self.timestamps[range.clone()].to_vec(),
            names: self.names.clone(),
            values: self.values[range.start * m..range.end * m].to_vec(),
            target: self.target.clone(),
        }
    }

    /// Projects the series onto the named variables, in the given order.
    /// The target must be among them.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<Vec<_>>>()?;
        let values = self
            .rows()
            .flat_map(|r| idx.iter().map(move |&j| r[j]))
            .collect();
        Self::new(
            self.timestamps.clone(),
            names.to_vec(),
            values,
            self.target.clone(),
        )
    }

    /// Row-major matrix of the named variables.
    pub fn matrix_of(&self, names: &[String]) -> Result<Vec<Vec<F>>> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .rows()
            .map(|r| idx.iter().map(|&j| r[j]).collect())
            .collect())
    }

    /// Variables other than the target, in column order.
    pub fn exogenous_names(&self) -> Vec<String> {
        self.names
            .iter()
            .filter(|n| **n != self.target)
            .cloned()
            .collect()
    }

    pub fn with_target(mut self, target: &str) -> Result<Self> {
        self.column_index(target)?;
        self.target = target.to_string();
        Ok(self)
    }

    /// Replaces every value through `f(column, value)`.
    pub(crate) fn map_values(&self, mut f: impl FnMut(usize, F) -> F) -> Self {
        let m = self.width();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % m, v))
            .collect();
        Self {
            timestamps: self.timestamps.clone(),
            names: self.names.clone(),
            values,
            target: self.target.clone(),
        }
    }

    /// True when no cell is NaN.
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| !v.is_nan())
    }
}
