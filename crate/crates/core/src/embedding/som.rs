use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distance fed to the Gaussian neighborhood `alpha * exp(-d^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// `d = ||w_i - w_u||`, distance between the cells' weight vectors.
    #[default]
    WeightSpace,
    /// `d` = Euclidean distance between the cells' grid coordinates.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SomHyperparams {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Side length `L` of every grid dimension.
    pub grid_size: usize,
    pub sigma0: f64,
    /// `alpha` and `sigma` decay to this fraction of their initial value.
    pub final_ratio: f64,
    pub neighborhood: Neighborhood,
    pub seed: u64,
}

impl Default for SomHyperparams {
    fn default() -> Self {
        Self {
            epochs: 70,
            learning_rate: 1e-5,
            grid_size: 20,
            sigma0: 12.5,
            final_ratio: 0.01,
            neighborhood: Neighborhood::WeightSpace,
            seed: 0,
        }
    }
}

/// Upper bound on `L^K * M` weights held by one map.
pub const MAX_SOM_WEIGHTS: usize = 50_000_000;

/// A `K`-dimensional grid of `L^K` cells, each an `M`-vector, stored
/// row-major with the last grid coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SomModel<F: Scalar> {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub cells: Vec<F>,
    pub hyperparams: SomHyperparams,
}

/// `value0 * ratio^(step / total)`: the decayed learning rate or radius at a
/// global training step.
pub fn decay<F: Scalar>(value0: F, ratio: F, step: usize, total: usize) -> F {
    if total == 0 {
        return value0;
    }
    value0 * ratio.powf(F::from_usize_lossy(step) / F::from_usize_lossy(total))
}

/// Gaussian neighborhood weight for squared distance `dist2`.
#[inline]
pub fn neighborhood_weight<F: Scalar>(dist2: F, sigma: F, alpha: F) -> F {
    alpha * (-dist2 / (F::lit(2.0) * sigma * sigma)).exp()
}

impl<F: Scalar> SomModel<F> {
    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.m
    }

    pub fn cell(&self, i: usize) -> &[F] {
        &self.cells[i * self.m..(i + 1) * self.m]
    }

    /// Grid coordinates of linear cell index `i`.
    pub fn coords(&self, mut i: usize) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for d in (0..self.k).rev() {
            c[d] = i % self.l;
            i /= self.l;
        }
        c
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.l + c)
    }

    /// Best-matching cell by Euclidean distance, lowest index on ties.
    pub fn best_matching(&self, y: &[F]) -> usize {
        let mut best = 0;
        let mut best_d = F::infinity();
        for (i, w) in self.cells.chunks_exact(self.m).enumerate() {
            let d: F = w.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Grid coordinates of the best-matching cell.
    pub fn embed(&self, y: &[F]) -> Result<Vec<F>> {
        if y.len() != self.m {
            return Err(Error::Argument(format!("SOM expects {} inputs, got {}", self.m, y.len())));
        }
        Ok(self
            .coords(self.best_matching(y))
            .into_iter()
            .map(F::from_usize_lossy)
            .collect())
    }

    fn validate(rows: &[Vec<F>], k: usize, hp: &SomHyperparams) -> Result<usize> {
        let m = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || m == 0 {
            return Err(Error::Argument("SOM training data is empty".into()));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Argument("SOM rows have inconsistent widths".into()));
        }
        if k == 0 || hp.grid_size < 2 {
            return Err(Error::Argument(format!(
                "SOM needs k >= 1 and grid size >= 2 (k = {k}, L = {})",
                hp.grid_size
            )));
        }
        if !(0.0..=1.0).contains(&hp.learning_rate) {
            return Err(Error::Argument(format!(
                "SOM learning rate must lie in [0, 1], got {}",
                hp.learning_rate
            )));
        }
        if hp.sigma0 <= 0.0 || !(hp.final_ratio > 0.0 && hp.final_ratio <= 1.0) {
            return Err(Error::Argument("SOM sigma0 must be positive and final_ratio in (0, 1]".into()));
        }
        let cells = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(hp.grid_size));
        match cells.and_then(|c| c.checked_mul(m)) {
            Some(w) if w <= MAX_SOM_WEIGHTS => Ok(m),
            _ => Err(Error::Argument(format!(
                "SOM grid {}^{k} x {m} exceeds {MAX_SOM_WEIGHTS} weights",
                hp.grid_size
            ))),
        }
    }

    /// Cells drawn uniformly within each variable's training range.
    pub fn init(rows: &[Vec<F>], k: usize, hp: &SomHyperparams) -> Result<Self> {
        let m = Self::validate(rows, k, hp)?;
        let mut lo = vec![F::infinity(); m];
        let mut hi = vec![F::neg_infinity(); m];
        for r in rows {
            for j in 0..m {
                lo[j] = lo[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        let n = hp.grid_size.pow(k as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        let mut cells = Vec::with_capacity(n * m);
        for _ in 0..n {
            for j in 0..m {
                let u: f64 = rng.random();
                cells.push(lo[j] + (hi[j] - lo[j]) * F::lit(u));
            }
        }
        Ok(Self {
            k,
            l: hp.grid_size,
            m,
            cells,
            hyperparams: hp.clone(),
        })
    }

    /// Online training: for each sample in order, find the best-matching
    /// cell and pull every cell toward the sample by its neighborhood weight.
    /// `alpha` and `sigma` decay geometrically over all `epochs * T` steps.
    pub fn fit(rows: &[Vec<F>], k: usize, hp: &SomHyperparams) -> Result<Self> {
        let mut som = Self::init(rows, k, hp)?;
        som.train(rows)?;
        Ok(som)
    }

    /// Runs the training loop from the current grid using the stored
    /// hyperparameters.
    pub fn train(&mut self, rows: &[Vec<F>]) -> Result<()> {
        if rows.iter().any(|r| r.len() != self.m) {
            return Err(Error::Argument(format!("SOM expects rows of width {}", self.m)));
        }
        let hp = self.hyperparams.clone();
        let som = self;
        let alpha0 = F::lit(hp.learning_rate);
        let sigma0 = F::lit(hp.sigma0);
        let ratio = F::lit(hp.final_ratio);
        let total = hp.epochs * rows.len();
        let n = som.cell_count();
        let m = som.m;
        let mut winner = vec![F::zero(); m];
        let grid: Vec<Vec<F>> = match hp.neighborhood {
            Neighborhood::Grid => (0..n)
                .map(|i| som.coords(i).into_iter().map(F::from_usize_lossy).collect())
                .collect(),
            Neighborhood::WeightSpace => Vec::new(),
        };

        let mut step = 0;
        for _ in 0..hp.epochs {
            for y in rows {
                let alpha = decay(alpha0, ratio, step, total);
                let sigma = decay(sigma0, ratio, step, total);
                step += 1;
                if alpha == F::zero() {
                    continue;
                }
                let u = som.best_matching(y);
                winner.copy_from_slice(som.cell(u));
                for i in 0..n {
                    let dist2: F = match hp.neighborhood {
                        Neighborhood::WeightSpace => som.cells[i * m..(i + 1) * m]
                            .iter()
                            .zip(&winner)
                            .map(|(&a, &b)| (a - b) * (a - b))
                            .sum(),
                        Neighborhood::Grid => grid[i]
                            .iter()
                            .zip(&grid[u])
                            .map(|(&a, &b)| (a - b) * (a - b))
                            .sum(),
                    };
                    let f = neighborhood_weight(dist2, sigma, alpha);
                    for (w, &yj) in som.cells[i * m..(i + 1) * m].iter_mut().zip(y) {
                        *w += f * (yj - *w);
                    }
                }
            }
        }
        if som.cells.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("SOM weights became non-finite"));
        }
        Ok(())
    }
}
