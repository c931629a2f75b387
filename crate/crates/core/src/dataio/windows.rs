use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::series::MultivariateSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the backtest windows tile the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowLayout {
    /// Contiguous, non-overlapping blocks that jointly cover the series.
    #[default]
    Disjoint,
    /// Blocks of `2T/(n+1)` rows advanced by half a block.
    Overlapping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub window_count: usize,
    #[serde(default)]
    pub layout: WindowLayout,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.75,
            window_count: 30,
            layout: WindowLayout::Disjoint,
        }
    }
}

/// Row ranges of one backtest window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowRange {
    pub index: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Minimum rows per window.
pub const MIN_WINDOW_ROWS: usize = 4;

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Argument(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.window_count == 0 {
            return Err(Error::Argument("window_count must be positive".into()));
        }
        Ok(())
    }

    pub fn ranges(&self, len: usize) -> Result<Vec<WindowRange>> {
        self.validate()?;
        let n = self.window_count;
        if len < n * MIN_WINDOW_ROWS {
            return Err(Error::Argument(format!(
                "series of {len} rows is too short for {n} windows (need at least {})",
                n * MIN_WINDOW_ROWS
            )));
        }
        let bounds: Vec<Range<usize>> = match self.layout {
            WindowLayout::Disjoint => (0..n).map(|i| i * len / n..(i + 1) * len / n).collect(),
            WindowLayout::Overlapping => {
                let width = 2 * len / (n + 1);
                let step = len / (n + 1);
                (0..n).map(|i| i * step..i * step + width).collect()
            }
        };
        Ok(bounds
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                let w = r.len();
                // the small bias keeps e.g. 0.7 * 10 from rounding up to 8
                let train = ((self.train_fraction * w as f64) - 1e-9).ceil() as usize;
                let train = train.clamp(1, w - 1);
                WindowRange {
                    index,
                    train: r.start..r.start + train,
                    test: r.start + train..r.end,
                }
            })
            .collect())
    }
}

/// Splits the series into `(train, test)` pairs.
pub fn make_windows<F: Scalar>(
    series: &MultivariateSeries<F>,
    spec: &SplitSpec,
) -> Result<Vec<(MultivariateSeries<F>, MultivariateSeries<F>)>> {
    Ok(spec
        .ranges(series.len())?
        .into_iter()
        .map(|w| (series.slice(w.train), series.slice(w.test)))
        .collect())
}
