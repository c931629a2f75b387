//! Weighted multivariate fuzzy time series: first-order rules from the
//! maximum-membership sets at `t` to the target's set at `t + 1`, weighted
//! by relative frequency, and one-step forecasts by activation-weighted
//! rule midpoints.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataio::MultivariateSeries;
use crate::error::{Error, Result};
use crate::fuzzy::{fuzzify, FuzzifiedPoint, LinguisticVariable};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RhsEntry<F: Scalar> {
    /// Index of the target fuzzy set.
    pub set: usize,
    pub count: u64,
    pub weight: F,
}

/// One rule: a set index per input variable, and the weighted target sets
/// observed after that precedent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Rule<F: Scalar> {
    pub lhs: Vec<usize>,
    pub rhs: Vec<RhsEntry<F>>,
}

impl<F: Scalar> Rule<F> {
    pub fn total_count(&self) -> u64 {
        self.rhs.iter().map(|e| e.count).sum()
    }
}

/// A rule that fired for some input, with its activation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiredRule<'a, F: Scalar> {
    pub rule: &'a Rule<F>,
    pub activation: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Forecast<F: Scalar> {
    pub value: F,
    pub fired_rule_count: usize,
    pub fallback_used: bool,
}

/// The trained model: one linguistic variable per input column and rules
/// sorted by precedent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WeightedRuleBase<F: Scalar> {
    pub variables: Vec<LinguisticVariable<F>>,
    /// Position of the target among `variables`.
    pub target_index: usize,
    pub target: String,
    pub rules: Vec<Rule<F>>,
}

/// `sum(w_j * c_j)` over the rule's consequents, in ascending set order.
pub fn rule_midpoint<F: Scalar>(rule: &Rule<F>, target: &LinguisticVariable<F>) -> Result<F> {
    if rule.rhs.is_empty() {
        return Err(Error::State("rule has an empty consequent".into()));
    }
    let mut mp = F::zero();
    for e in &rule.rhs {
        mp += e.weight * target.sets[e.set].center;
    }
    Ok(mp)
}

impl<F: Scalar> WeightedRuleBase<F> {
    /// Induces the rule base from a series whose columns line up with
    /// `variables`. The consequent of each pattern is the target's
    /// maximum-membership set one step later.
    pub fn train(series: &MultivariateSeries<F>, variables: Vec<LinguisticVariable<F>>, target: &str) -> Result<Self> {
        let target_index = series
            .column_index(target)
            .map_err(|_| Error::Schema(format!("target column `{target}` absent from training series")))?;
        if series.len() < 2 {
            return Err(Error::Argument(format!(
                "rule induction needs at least 2 rows, got {}",
                series.len()
            )));
        }
        if variables.len() != series.width() {
            return Err(Error::Argument(format!(
                "{} linguistic variables for {} columns",
                variables.len(),
                series.width()
            )));
        }

        let mut patterns: BTreeMap<Vec<usize>, BTreeMap<usize, u64>> = BTreeMap::new();
        let labels: Vec<Vec<usize>> = series
            .rows()
            .map(|r| variables.iter().zip(r).map(|(v, &x)| v.max_membership(x)).collect())
            .collect();
        for t in 0..labels.len() - 1 {
            let consequent = labels[t + 1][target_index];
            *patterns
                .entry(labels[t].clone())
                .or_default()
                .entry(consequent)
                .or_insert(0) += 1;
        }

        let rules = patterns
            .into_iter()
            .map(|(lhs, counts)| {
                let total = F::lit(counts.values().sum::<u64>() as f64);
                let rhs = counts
                    .into_iter()
                    .map(|(set, count)| RhsEntry {
                        set,
                        count,
                        weight: F::lit(count as f64) / total,
                    })
                    .collect();
                Rule { lhs, rhs }
            })
            .collect();
        Ok(Self {
            variables,
            target_index,
            target: target.to_string(),
            rules,
        })
    }

    pub fn target_variable(&self) -> &LinguisticVariable<F> {
        &self.variables[self.target_index]
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn find(&self, lhs: &[usize]) -> Option<&Rule<F>> {
        self.rules
            .binary_search_by(|r| r.lhs.as_slice().cmp(lhs))
            .ok()
            .map(|i| &self.rules[i])
    }

    /// Rules whose every precedent set is active in `point`, with activation
    /// equal to the minimum of those grades. Results come in ascending
    /// precedent order.
    pub fn match_rules(&self, point: &FuzzifiedPoint<F>) -> Vec<FiredRule<'_, F>> {
        let active = &point.grades;
        if active.len() != self.variables.len() || active.iter().any(|g| g.is_empty()) {
            return Vec::new();
        }
        let mut fired = Vec::new();
        let mut cursor = vec![0usize; active.len()];
        let mut lhs = vec![0usize; active.len()];
        loop {
            let mut activation = F::infinity();
            for (i, &c) in cursor.iter().enumerate() {
                let (set, grade) = active[i][c];
                lhs[i] = set;
                activation = activation.min(grade);
            }
            if let Some(rule) = self.find(&lhs) {
                fired.push(FiredRule { rule, activation });
            }
            // odometer, last variable fastest -> lexicographic order
            let mut i = active.len();
            loop {
                if i == 0 {
                    return fired;
                }
                i -= 1;
                cursor[i] += 1;
                if cursor[i] < active[i].len() {
                    break;
                }
                cursor[i] = 0;
            }
        }
    }

    pub fn midpoint(&self, rule: &Rule<F>) -> Result<F> {
        rule_midpoint(rule, self.target_variable())
    }

    /// Defuzzified one-step forecast from an input vector aligned with
    /// `variables`.
    ///
    /// `y = sum(mu_r * mp_r) / sum(mu_r)` accumulated in ascending precedent
    /// order and clamped into the range of the fired midpoints; a single
    /// fired rule yields its midpoint. With no rule fired, the center of the
    /// target's maximum-membership set at `t` is returned.
    pub fn forecast(&self, y: &[F]) -> Result<Forecast<F>> {
        let point = fuzzify(&self.variables, y)?;
        let fired = self.match_rules(&point);
        if fired.is_empty() {
            let target = self.target_variable();
            let j = target.max_membership(y[self.target_index]);
            return Ok(Forecast {
                value: target.sets[j].center,
                fired_rule_count: 0,
                fallback_used: true,
            });
        }
        let mut num = F::zero();
        let mut den = F::zero();
        let mut lo = F::infinity();
        let mut hi = F::neg_infinity();
        let mut single = F::zero();
        for f in &fired {
            let mp = self.midpoint(f.rule)?;
            num += f.activation * mp;
            den += f.activation;
            lo = lo.min(mp);
            hi = hi.max(mp);
            single = mp;
        }
        let value = if fired.len() == 1 { single } else { (num / den).max(lo).min(hi) };
        Ok(Forecast {
            value,
            fired_rule_count: fired.len(),
            fallback_used: false,
        })
    }

    /// Forecasts `t + 1` from every row `t < T - 1`.
    pub fn forecast_series(&self, series: &MultivariateSeries<F>) -> Result<Vec<Forecast<F>>> {
        if series.is_empty() {
            return Err(Error::Argument("cannot forecast from an empty series".into()));
        }
        if series.width() != self.variables.len() {
            return Err(Error::Schema(format!(
                "series has {} columns, rule base expects {}",
                series.width(),
                self.variables.len()
            )));
        }
        series.rows().take(series.len() - 1).map(|r| self.forecast(r)).collect()
    }

    /// One line per rule, sorted by precedent:
    /// `dim_0.A3 & dim_1.A7 & y.A2 → y.A4 (0.667), y.A5 (0.333)`.
    pub fn to_text(&self) -> String {
        let target = self.target_variable();
        let mut out = String::new();
        for rule in &self.rules {
            let lhs: Vec<&str> = rule
                .lhs
                .iter()
                .zip(&self.variables)
                .map(|(&j, v)| v.sets[j].name.as_str())
                .collect();
            let rhs: Vec<String> = rule
                .rhs
                .iter()
                .map(|e| format!("{} ({:.3})", target.sets[e.set].name, e.weight))
                .collect();
            let _ = writeln!(out, "{} → {}", lhs.join(" & "), rhs.join(", "));
        }
        out
    }
}
