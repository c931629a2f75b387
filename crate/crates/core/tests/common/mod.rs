//! Shared fixtures and reference implementations for the integration tests.
//! Each test target uses a different subset.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use gamma_fts::dataio::MultivariateSeries;
use gamma_fts::embedding::{EmbeddingConfig, EmbeddingModel};
use gamma_fts::fuzzy::{LinguisticVariable, PartitionConfig};
use gamma_fts::wmvfts::WeightedRuleBase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn series_from_rows(names: &[&str], rows: &[Vec<f64>], target: &str) -> MultivariateSeries<f64> {
    let t0 = NaiveDate::from_ymd_opt(2016, 1, 11).unwrap().and_hms_opt(17, 0, 0).unwrap();
    let ts = (0..rows.len()).map(|i| t0 + Duration::minutes(10 * i as i64)).collect();
    MultivariateSeries::from_rows(ts, names.iter().map(|s| s.to_string()).collect(), rows, target).unwrap()
}

/// Smooth synthetic energy-like series: a target driven by a few correlated
/// exogenous signals plus noise.
pub fn synthetic(n: usize, exogenous: usize, seed: u64) -> MultivariateSeries<f64> {
    let mut r = rng(seed);
    let phases: Vec<f64> = (0..exogenous).map(|_| r.random_range(0.0..6.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let x = i as f64;
            let ex: Vec<f64> = phases
                .iter()
                .enumerate()
                .map(|(j, p)| (x * 0.05 * (j + 1) as f64 + p).sin() + 0.05 * r.random_range(-1.0..1.0))
                .collect();
            let y = 80.0 + 30.0 * ex.iter().sum::<f64>() / exogenous.max(1) as f64 + 10.0 * (x * 0.3).sin();
            let mut row = vec![y];
            row.extend(ex);
            row
        })
        .collect();
    let mut names = vec!["load".to_string()];
    names.extend((0..exogenous).map(|j| format!("x{j}")));
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    series_from_rows(&names, &rows, "load")
}

/// Directory holding the real datasets, if present.
pub fn data_dir() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("GAMMA_FTS_DATA_DIR").map(PathBuf::from),
        Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")),
    ];
    candidates.into_iter().flatten().find(|p| p.is_dir())
}

pub fn data_file(name: &str) -> Option<PathBuf> {
    data_dir().map(|d| d.join(name)).filter(|p| p.is_file())
}

// ---------------------------------------------------------------------------
// Brute-force rule model
// ---------------------------------------------------------------------------

/// Plain triangular partition over `[lb, ub]` recomputed from the definition.
pub struct OracleVar {
    pub lb: f64,
    pub ub: f64,
    pub centers: Vec<f64>,
}

impl OracleVar {
    pub fn new(values: &[f64], kappa: usize, r: f64) -> Self {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mag = |v: f64| if v == 0.0 { 1.0 } else { v.abs() };
        let lb = min - r * mag(min);
        let ub = max + r * mag(max);
        let step = (ub - lb) / (kappa - 1) as f64;
        let centers = (0..kappa).map(|j| if j == kappa - 1 { ub } else { lb + step * j as f64 }).collect();
        Self { lb, ub, centers }
    }

    pub fn mu(&self, j: usize, x: f64) -> f64 {
        let c = &self.centers;
        let last = c.len() - 1;
        if x == c[j] {
            return 1.0;
        }
        if x < c[j] {
            if j == 0 {
                return 1.0;
            }
            if x <= c[j - 1] {
                return 0.0;
            }
            return (x - c[j - 1]) / (c[j] - c[j - 1]);
        }
        if j == last {
            return 1.0;
        }
        if x >= c[j + 1] {
            return 0.0;
        }
        (c[j + 1] - x) / (c[j + 1] - c[j])
    }

    pub fn argmax(&self, x: f64) -> usize {
        let mut best = 0;
        for j in 1..self.centers.len() {
            if self.mu(j, x) > self.mu(best, x) {
                best = j;
            }
        }
        best
    }
}

pub struct OracleRule {
    pub lhs: Vec<usize>,
    /// `(set, count, weight)` ascending by set.
    pub rhs: Vec<(usize, u64, f64)>,
}

pub struct OracleModel {
    pub vars: Vec<OracleVar>,
    pub target: usize,
    pub rules: Vec<OracleRule>,
}

#[derive(Debug, PartialEq)]
pub struct OracleForecast {
    pub fired: Vec<(Vec<usize>, f64, f64)>,
    pub value: f64,
    pub fallback: bool,
}

impl OracleModel {
    pub fn train(rows: &[Vec<f64>], target: usize, kappa: usize, r: f64) -> Self {
        let width = rows[0].len();
        let vars: Vec<OracleVar> = (0..width)
            .map(|j| OracleVar::new(&rows.iter().map(|row| row[j]).collect::<Vec<_>>(), kappa, r))
            .collect();
        let label = |row: &Vec<f64>| -> Vec<usize> { row.iter().zip(&vars).map(|(&x, v)| v.argmax(x)).collect() };
        let patterns: Vec<(Vec<usize>, usize)> = (0..rows.len() - 1)
            .map(|t| (label(&rows[t]), vars[target].argmax(rows[t + 1][target])))
            .collect();
        // every distinct precedent, then count its consequents by scanning
        let mut lhs_all: Vec<Vec<usize>> = patterns.iter().map(|p| p.0.clone()).collect();
        lhs_all.sort();
        lhs_all.dedup();
        let rules = lhs_all
            .into_iter()
            .map(|lhs| {
                let total = patterns.iter().filter(|p| p.0 == lhs).count() as u64;
                let rhs = (0..kappa)
                    .filter_map(|set| {
                        let count = patterns.iter().filter(|p| p.0 == lhs && p.1 == set).count() as u64;
                        (count > 0).then(|| (set, count, count as f64 / total as f64))
                    })
                    .collect();
                OracleRule { lhs, rhs }
            })
            .collect();
        Self { vars, target, rules }
    }

    pub fn midpoint(&self, rule: &OracleRule) -> f64 {
        let c = &self.vars[self.target].centers;
        rule.rhs.iter().fold(0.0, |acc, &(set, _, w)| acc + w * c[set])
    }

    /// Scans every rule rather than enumerating active sets.
    pub fn forecast(&self, y: &[f64]) -> OracleForecast {
        let mut fired = Vec::new();
        for rule in &self.rules {
            let act = rule
                .lhs
                .iter()
                .enumerate()
                .map(|(i, &j)| self.vars[i].mu(j, y[i]))
                .fold(f64::INFINITY, f64::min);
            if act > 0.0 {
                fired.push((rule.lhs.clone(), act, self.midpoint(rule)));
            }
        }
        let tv = &self.vars[self.target];
        let value = match fired.len() {
            0 => tv.centers[tv.argmax(y[self.target])],
            1 => fired[0].2,
            _ => {
                let num = fired.iter().fold(0.0, |a, f| a + f.1 * f.2);
                let den = fired.iter().fold(0.0, |a, f| a + f.1);
                let lo = fired.iter().map(|f| f.2).fold(f64::INFINITY, f64::min);
                let hi = fired.iter().map(|f| f.2).fold(f64::NEG_INFINITY, f64::max);
                (num / den).max(lo).min(hi)
            }
        };
        OracleForecast { fallback: fired.is_empty(), fired, value }
    }
}

/// One random small instance: raw series, embedding settings and kappa.
pub struct Instance {
    pub series: MultivariateSeries<f64>,
    pub k: usize,
    pub kappa: usize,
}

pub fn random_instance(r: &mut ChaCha8Rng) -> Instance {
    loop {
        let t = r.random_range(6..=50);
        let m = r.random_range(2..=4);
        let k = r.random_range(1..=2.min(m - 1));
        let kappa = r.random_range(2..=5);
        // coarse grids produce exact ties and values on set centers
        let coarse = r.random_bool(0.3);
        let mut level = vec![0.0; m];
        let rows: Vec<Vec<f64>> = (0..t)
            .map(|_| {
                for v in level.iter_mut() {
                    let step: f64 = r.random_range(-1.0..1.0);
                    *v += if coarse { step.round() } else { step };
                }
                level.clone()
            })
            .collect();
        let names: Vec<String> = (0..m).map(|j| if j == 0 { "y".into() } else { format!("v{j}") }).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let series = series_from_rows(&names, &rows, "y");
        let distinct = (0..m).all(|j| {
            let c = series.column_at(j);
            c.iter().any(|&x| x != c[0])
        });
        if distinct {
            return Instance { series, k, kappa };
        }
    }
}

/// Compares library and oracle on one instance; `Err` describes the first
/// difference.
pub fn check_instance(inst: &Instance) -> Result<usize, String> {
    let s = &inst.series;
    let cut = (s.len() * 3 / 4).max(3);
    let train = s.slice(0..cut);
    let emb = EmbeddingModel::fit(&train, &EmbeddingConfig { k: inst.k, ..EmbeddingConfig::default() })
        .map_err(|e| format!("embedding: {e}"))?;
    let e_train = emb.embed_series(&train).map_err(|e| e.to_string())?;
    let e_all = emb.embed_series(s).map_err(|e| e.to_string())?;
    let cfg = PartitionConfig { kappa: inst.kappa, ..PartitionConfig::default() };
    let vars: Vec<LinguisticVariable<f64>> = match (0..e_train.width())
        .map(|j| LinguisticVariable::partition(&e_train.names()[j], &e_train.column_at(j), &cfg))
        .collect()
    {
        Ok(v) => v,
        // an embedded dimension can collapse on tiny inputs; both sides agree it is unusable
        Err(gamma_fts::Error::DegenerateUod { .. }) => return Ok(0),
        Err(e) => return Err(e.to_string()),
    };
    let rb = WeightedRuleBase::train(&e_train, vars, "y").map_err(|e| e.to_string())?;

    let rows: Vec<Vec<f64>> = e_train.rows().map(<[f64]>::to_vec).collect();
    let oracle = OracleModel::train(&rows, e_train.target_index(), inst.kappa, cfg.margin);

    for (v, o) in rb.variables.iter().zip(&oracle.vars) {
        if v.centers() != o.centers || v.lb != o.lb || v.ub != o.ub {
            return Err("partition differs".into());
        }
    }
    if rb.rules.len() != oracle.rules.len() {
        return Err(format!("{} rules vs {}", rb.rules.len(), oracle.rules.len()));
    }
    for (a, b) in rb.rules.iter().zip(&oracle.rules) {
        let rhs: Vec<(usize, u64, f64)> = a.rhs.iter().map(|e| (e.set, e.count, e.weight)).collect();
        if a.lhs != b.lhs || rhs != b.rhs {
            return Err(format!("rule {:?} differs", a.lhs));
        }
        if rb.midpoint(a).unwrap().to_bits() != oracle.midpoint(b).to_bits() {
            return Err(format!("midpoint of {:?} differs", a.lhs));
        }
    }

    // every embedded row, plus each combination of set centers
    let mut points: Vec<Vec<f64>> = e_all.rows().map(<[f64]>::to_vec).collect();
    let width = oracle.vars.len();
    for j in 0..inst.kappa {
        points.push(oracle.vars.iter().map(|v| v.centers[j.min(v.centers.len() - 1)]).collect());
        points.push(oracle.vars.iter().map(|v| v.centers[inst.kappa - 1 - j]).collect());
    }
    for y in &points {
        debug_assert_eq!(y.len(), width);
        let want = oracle.forecast(y);
        let point = gamma_fts::fuzzy::fuzzify(&rb.variables, y).unwrap();
        let got: Vec<(Vec<usize>, f64, f64)> = rb
            .match_rules(&point)
            .iter()
            .map(|f| (f.rule.lhs.clone(), f.activation, rb.midpoint(f.rule).unwrap()))
            .collect();
        let bits = |v: &[(Vec<usize>, f64, f64)]| -> Vec<(Vec<usize>, u64, u64)> {
            v.iter().map(|(l, a, m)| (l.clone(), a.to_bits(), m.to_bits())).collect()
        };
        if bits(&got) != bits(&want.fired) {
            return Err(format!("fired rules differ at {y:?}"));
        }
        let f = rb.forecast(y).unwrap();
        if f.value.to_bits() != want.value.to_bits() || f.fallback_used != want.fallback {
            return Err(format!("forecast differs at {y:?}: {} vs {}", f.value, want.value));
        }
    }
    Ok(points.len())
}

// ---------------------------------------------------------------------------
// Power iteration
// ---------------------------------------------------------------------------

/// Leading `count` eigenpairs of a symmetric PSD matrix by power iteration
/// with Hotelling deflation.
pub fn power_iteration(a: &[f64], n: usize, count: usize, seed: u64) -> Vec<(f64, Vec<f64>)> {
    let mut m = a.to_vec();
    let mut r = rng(seed);
    let mut out = Vec::new();
    for _ in 0..count {
        let mut v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..200_000 {
            let mut w = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    w[i] += m[i * n + j] * v[j];
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = w;
            lambda = norm;
            if delta < 1e-14 {
                break;
            }
        }
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] -= lambda * v[i] * v[j];
            }
        }
        out.push((lambda, v));
    }
    out
}

/// Random PSD matrix `Q diag(lambda) Q^T` with well separated eigenvalues,
/// returned with its spectrum in descending order.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let b: Vec<f64> = (0..n * n).map(|_| r.random_range(-1.0..1.0)).collect();
    // Gram-Schmidt on the columns of b
    let mut q = vec![0.0; n * n];
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| b[i * n + j]).collect();
        for p in 0..j {
            let dot: f64 = (0..n).map(|i| col[i] * q[i * n + p]).sum();
            (0..n).for_each(|i| col[i] -= dot * q[i * n + p]);
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        (0..n).for_each(|i| q[i * n + j] = col[i] / norm);
    }
    // geometric-ish spectrum with random jitter keeps gaps above ~15%
    let mut lambda: Vec<f64> = (0..n).map(|i| 10.0 * 0.8f64.powi(i as i32) * r.random_range(0.95..1.0)).collect();
    lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (0..n).map(|p| q[i * n + p] * lambda[p] * q[j * n + p]).sum();
        }
    }
    (a, lambda)
}

// ---------------------------------------------------------------------------
// Invariant checks shared by property tests and the acceptance run
// ---------------------------------------------------------------------------

pub fn check_partition_of_unity(values: &[f64], kappa: usize, xs: &[f64]) -> Result<(), String> {
    let v = LinguisticVariable::partition("x", values, &PartitionConfig { kappa, ..PartitionConfig::default() })
        .map_err(|e| e.to_string())?;
    for &x in xs {
        let x = v.lb + (v.ub - v.lb) * x;
        let sum: f64 = v.fuzzify(x).iter().map(|g| g.1).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("grades sum to {sum} at {x}"));
        }
    }
    Ok(())
}

pub fn check_rulebase(series: &MultivariateSeries<f64>, kappa: usize) -> Result<(), String> {
    let cfg = PartitionConfig { kappa, ..PartitionConfig::default() };
    let vars = (0..series.width())
        .map(|j| LinguisticVariable::partition(&series.names()[j], &series.column_at(j), &cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let rb = WeightedRuleBase::train(series, vars, series.target()).map_err(|e| e.to_string())?;
    let mut counts: BTreeMap<&[usize], u64> = BTreeMap::new();
    for rule in &rb.rules {
        let w: f64 = rule.rhs.iter().map(|e| e.weight).sum();
        if (w - 1.0).abs() > 1e-9 {
            return Err(format!("weights of {:?} sum to {w}", rule.lhs));
        }
        counts.insert(&rule.lhs, rule.total_count());
    }
    if counts.values().sum::<u64>() != series.len() as u64 - 1 {
        return Err("pattern count differs from T - 1".into());
    }
    let centers = rb.target_variable().centers();
    let (lo, hi) = (centers[0], centers[centers.len() - 1]);
    for f in rb.forecast_series(series).map_err(|e| e.to_string())? {
        if !(lo <= f.value && f.value <= hi) {
            return Err(format!("forecast {} outside [{lo}, {hi}]", f.value));
        }
    }
    for row in series.rows() {
        let point = gamma_fts::fuzzy::fuzzify(&rb.variables, row).unwrap();
        let fired = rb.match_rules(&point);
        if fired.len() > 1 {
            let mps: Vec<f64> = fired.iter().map(|f| rb.midpoint(f.rule).unwrap()).collect();
            let v = rb.forecast(row).unwrap().value;
            let lo = mps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = mps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(lo <= v && v <= hi) {
                return Err(format!("forecast {v} outside fired midpoints [{lo}, {hi}]"));
            }
        }
    }
    Ok(())
}

pub fn check_pca(rows: &[Vec<f64>]) -> Result<(), String> {
    use gamma_fts::embedding::PcaModel;
    let m = rows[0].len();
    let full = PcaModel::fit(rows, m).map_err(|e| e.to_string())?;
    for a in 0..m {
        for b in 0..m {
            let dot: f64 = full.component(a).iter().zip(full.component(b)).map(|(x, y)| x * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-8 {
                return Err(format!("components {a},{b} have dot {dot}"));
            }
        }
    }
    let mut prev = f64::INFINITY;
    for k in 1..=m {
        let p = PcaModel::fit(rows, k).map_err(|e| e.to_string())?;
        let err: f64 = rows
            .iter()
            .map(|r| {
                let back = p.reconstruct(&p.embed(r).unwrap());
                back.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            })
            .sum();
        if err > prev * (1.0 + 1e-9) + 1e-9 {
            return Err(format!("reconstruction error rose to {err} at K={k}"));
        }
        prev = err;
    }
    Ok(())
}

pub fn check_metrics(actual: &[f64], predicted: &[f64]) -> Result<(), String> {
    use gamma_fts::metrics::{mae, rmse, skill_score, smape};
    let r = rmse(actual, predicted).unwrap();
    let a = mae(actual, predicted).unwrap();
    if r < a * (1.0 - 1e-12) {
        return Err(format!("rmse {r} < mae {a}"));
    }
    let s = smape(actual, predicted).unwrap();
    if !(0.0..=100.0).contains(&s) {
        return Err(format!("smape {s} out of range"));
    }
    if r > 0.0 && skill_score(0.5 * r, r).unwrap() != 0.5 {
        return Err("skill_score(m/2, m) != 0.5".into());
    }
    Ok(())
}
