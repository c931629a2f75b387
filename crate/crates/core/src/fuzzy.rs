//! Grid partitioning of a variable's universe of discourse into overlapping
//! triangular fuzzy sets, and fuzzification of crisp vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Triangular fuzzy set. Boundary sets are shoulders: flat at 1 beyond
/// their center on the outer side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FuzzySet<F: Scalar> {
    pub name: String,
    pub lower: F,
    pub center: F,
    pub upper: F,
    #[serde(default)]
    pub left_shoulder: bool,
    #[serde(default)]
    pub right_shoulder: bool,
}

impl<F: Scalar> FuzzySet<F> {
    pub fn triangle(name: impl Into<String>, lower: F, center: F, upper: F) -> Self {
        Self {
            name: name.into(),
            lower,
            center,
            upper,
            left_shoulder: false,
            right_shoulder: false,
        }
    }

    #[inline]
    pub fn membership(&self, x: F) -> F {
        if x == self.center {
            F::one()
        } else if x < self.center {
            if self.left_shoulder {
                F::one()
            } else if x <= self.lower {
                F::zero()
            } else {
                (x - self.lower) / (self.center - self.lower)
            }
        } else if self.right_shoulder {
            F::one()
        } else if x >= self.upper {
            F::zero()
        } else {
            (self.upper - x) / (self.upper - self.center)
        }
    }
}

/// Partitioning parameters shared by every variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    /// Number of fuzzy sets per variable.
    pub kappa: usize,
    /// Relative margin `r` added beyond the observed extrema.
    pub margin: f64,
    /// Fraction of a set's half-support shared with its neighbor; 0.5 puts
    /// each support exactly on the two neighboring centers.
    pub overlap: f64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            kappa: 50,
            margin: 0.1,
            overlap: 0.5,
        }
    }
}

/// Ordered family of fuzzy sets over `[lb, ub]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LinguisticVariable<F: Scalar> {
    pub name: String,
    pub lb: F,
    pub ub: F,
    pub sets: Vec<FuzzySet<F>>,
}

/// Membership grades strictly above zero, per variable, as `(set index, grade)`
/// in ascending set order.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzifiedPoint<F> {
    pub grades: Vec<Vec<(usize, F)>>,
}

impl<F: Scalar> LinguisticVariable<F> {
    /// Builds `kappa` evenly spaced triangular sets over the training range
    /// widened by `margin` on both sides.
    pub fn partition(name: &str, values: &[F], config: &PartitionConfig) -> Result<Self> {
        let kappa = config.kappa;
        if kappa < 2 {
            return Err(Error::Argument(format!("at least 2 fuzzy sets are required, got {kappa}")));
        }
        if !(config.margin > 0.0 && config.margin < 1.0) {
            return Err(Error::Argument(format!("margin must lie in (0, 1), got {}", config.margin)));
        }
        if !(0.0..1.0).contains(&config.overlap) {
            return Err(Error::Argument(format!("overlap must lie in [0, 1), got {}", config.overlap)));
        }
        if values.is_empty() {
            return Err(Error::Argument(format!("no training values for `{name}`")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite training values for `{name}`")));
        }
        let min = values.iter().copied().fold(F::infinity(), F::min);
        let max = values.iter().copied().fold(F::neg_infinity(), F::max);
        if min == max {
            return Err(Error::DegenerateUod {
                variable: name.to_string(),
                value: min.as_f64(),
            });
        }
        let r = F::lit(config.margin);
        // a zero extremum still gets a unit-magnitude margin
        let magnitude = |v: F| if v == F::zero() { F::one() } else { v.abs() };
        let lb = min - r * magnitude(min);
        let ub = max + r * magnitude(max);

        let step = (ub - lb) / F::from_usize_lossy(kappa - 1);
        let half = step / (F::lit(2.0) * (F::one() - F::lit(config.overlap)));
        let centers: Vec<F> = (0..kappa)
            .map(|j| {
                if j == kappa - 1 {
                    ub
                } else {
                    lb + step * F::from_usize_lossy(j)
                }
            })
            .collect();
        let sets = centers
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let first = j == 0;
                let last = j == kappa - 1;
                // with 50% overlap the support ends exactly on the neighbor centers
                let lower = if first {
                    c
                } else if config.overlap == 0.5 {
                    centers[j - 1]
                } else {
                    c - half
                };
                let upper = if last {
                    c
                } else if config.overlap == 0.5 {
                    centers[j + 1]
                } else {
                    c + half
                };
                FuzzySet {
                    name: format!("{name}.A{j}"),
                    lower,
                    center: c,
                    upper,
                    left_shoulder: first,
                    right_shoulder: last,
                }
            })
            .collect();
        Ok(Self {
            name: name.to_string(),
            lb,
            ub,
            sets,
        })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn centers(&self) -> Vec<F> {
        self.sets.iter().map(|s| s.center).collect()
    }

    /// Sets with positive membership at `x`.
    pub fn fuzzify(&self, x: F) -> Vec<(usize, F)> {
        self.sets
            .iter()
            .enumerate()
            .filter_map(|(j, s)| {
                let g = s.membership(x);
                (g > F::zero()).then_some((j, g))
            })
            .collect()
    }

    /// Index of the set with maximum membership at `x`, lowest index on ties.
    pub fn max_membership(&self, x: F) -> usize {
        let mut best = 0;
        let mut best_g = F::neg_infinity();
        for (j, s) in self.sets.iter().enumerate() {
            let g = s.membership(x);
            if g > best_g {
                best_g = g;
                best = j;
            }
        }
        best
    }

    pub fn index_of(&self, set_name: &str) -> Option<usize> {
        self.sets.iter().position(|s| s.name == set_name)
    }
}

/// Fuzzifies one vector against one linguistic variable per component.
pub fn fuzzify<F: Scalar>(vars: &[LinguisticVariable<F>], y: &[F]) -> Result<FuzzifiedPoint<F>> {
    if vars.len() != y.len() {
        return Err(Error::Argument(format!(
            "expected {} values to fuzzify, got {}",
            vars.len(),
            y.len()
        )));
    }
    Ok(FuzzifiedPoint {
        grades: vars.iter().zip(y).map(|(v, &x)| v.fuzzify(x)).collect(),
    })
}
