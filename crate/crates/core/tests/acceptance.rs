//! Acceptance run: one status line per criterion.
//!
//! Criteria that need the real datasets look for them in `$GAMMA_FTS_DATA_DIR`
//! or `<workspace>/data`:
//! `energydata_complete.csv` (appliances energy) and
//! `household_power_consumption.txt` (household power).
//! Without the files those criteria print `NOT RUN`; they are never counted
//! as passed.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use gamma_fts::backtest::{run_on_series, sweep_on_series, ExperimentConfig, ModelKind};
use gamma_fts::dataio::{self, DatasetSchema, MinMaxScaler, WindowLayout};
use gamma_fts::embedding::{som, AeHyperparams, AeModel, SomHyperparams, SomModel};
use gamma_fts::Series;
use rand::Rng;

const AEC_FILE: &str = "energydata_complete.csv";
const HPC_FILE: &str = "household_power_consumption.txt";

enum Status {
    Pass(String),
    Fail(String),
    NotRun(String),
}

fn load_aec() -> Option<Result<Series, String>> {
    let path = common::data_file(AEC_FILE)?;
    Some(dataio::load_csv(&path, &DatasetSchema::aec()).map_err(|e| e.to_string()))
}

fn persistence_rmse(series: &Series, layout: WindowLayout) -> Result<f64, String> {
    let mut c = ExperimentConfig { models: vec![ModelKind::Persistence], ..Default::default() };
    c.split.layout = layout;
    let out = run_on_series(&c, series).map_err(|e| e.to_string())?;
    out.report.models[0].aggregate.as_ref().map(|a| a.rmse).ok_or_else(|| "no scored window".into())
}

fn criterion_1() -> Status {
    let start = Instant::now();
    let Some(aec) = load_aec() else {
        return Status::NotRun(format!("{AEC_FILE} not found"));
    };
    let result = aec.and_then(|s| Ok((persistence_rmse(&s, WindowLayout::Disjoint)?, s)));
    let (rmse, series) = match result {
        Ok(v) => v,
        Err(e) => return Status::Fail(e),
    };
    let secs = start.elapsed().as_secs_f64();
    let target = 64.749;
    let within = (rmse - target).abs() <= 0.05 * target;
    let mut detail = format!("disjoint RMSE {rmse:.3} vs {target} (±5%), {secs:.2} s");
    if let Ok(o) = persistence_rmse(&series, WindowLayout::Overlapping) {
        detail.push_str(&format!("; overlapping RMSE {o:.3}"));
    }
    if within && secs < 30.0 {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn criterion_2() -> Status {
    let (Some(hpc), Some(_)) = (common::data_file(HPC_FILE), common::data_file(AEC_FILE)) else {
        return Status::NotRun(format!("{HPC_FILE} and/or {AEC_FILE} not found"));
    };
    let raw: Series = match dataio::load_csv(&hpc, &DatasetSchema::hpc()) {
        Ok(s) => s,
        Err(e) => return Status::Fail(e.to_string()),
    };
    let (_, removed) = dataio::drop_missing(&raw);
    let aec_rows = match load_aec().unwrap() {
        Ok(s) => s.len(),
        Err(e) => return Status::Fail(e),
    };
    let detail = format!("household rows removed {removed} (want 25979), appliances rows {aec_rows} (want 19735)");
    if removed == 25_979 && aec_rows == 19_735 {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn criterion_3() -> Status {
    let start = Instant::now();
    let Some(aec) = load_aec() else {
        return Status::NotRun(format!("{AEC_FILE} not found"));
    };
    let series = match aec {
        Ok(s) => s,
        Err(e) => return Status::Fail(e),
    };
    let c = ExperimentConfig { models: vec![ModelKind::PcaWmvfts], ..Default::default() };
    let kappas = [10, 20, 30, 40, 50];
    let rmse_of = |r: &gamma_fts::backtest::SweepReport, k, kappa| {
        r.cell(ModelKind::PcaWmvfts, k, kappa).and_then(|c| c.aggregate.as_ref()).map(|a| a.rmse)
    };
    let by_kappa = match sweep_on_series(&c, &series, &[2, 3], &kappas) {
        Ok(r) => r,
        Err(e) => return Status::Fail(e.to_string()),
    };
    let by_k = match sweep_on_series(&c, &series, &[2, 3, 4, 5, 6], &[50]) {
        Ok(r) => r,
        Err(e) => return Status::Fail(e.to_string()),
    };
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs < 600.0;
    let mut detail = String::new();
    for k in [2, 3] {
        let row: Option<Vec<f64>> = kappas.iter().map(|&kappa| rmse_of(&by_kappa, k, kappa)).collect();
        let Some(row) = row else { return Status::Fail(format!("missing cell at K={k}")) };
        ok &= non_increasing(&row);
        detail.push_str(&format!("K={k} over kappa {row:.3?}; "));
    }
    let col: Option<Vec<f64>> = (2..=6).map(|k| rmse_of(&by_k, k, 50)).collect();
    let Some(col) = col else { return Status::Fail("missing cell at kappa=50".into()) };
    ok &= non_increasing(&col);
    detail.push_str(&format!("kappa=50 over K {col:.3?}; {secs:.1} s"));
    if ok {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn criterion_4() -> Status {
    let mut r = common::rng(20_240_601);
    let (mut instances, mut points) = (0, 0);
    for i in 0..300 {
        let inst = common::random_instance(&mut r);
        match common::check_instance(&inst) {
            Ok(0) => {}
            Ok(n) => {
                instances += 1;
                points += n;
            }
            Err(e) => return Status::Fail(format!("instance {i}: {e}")),
        }
    }
    let detail = format!("{instances} instances, {points} forecasts bit-identical");
    if instances >= 200 {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn criterion_5() -> Status {
    let mut r = common::rng(99);
    let mut checks = 0;
    let fail = |name: &str, e: String| Status::Fail(format!("{name}: {e}"));
    for _ in 0..100 {
        let n = r.random_range(2..40);
        let values: Vec<f64> = (0..n).map(|_| r.random_range(-500.0..500.0)).collect();
        let xs: Vec<f64> = (0..50).map(|_| r.random_range(0.0..=1.0)).collect();
        if let Err(e) = common::check_partition_of_unity(&values, r.random_range(2..60), &xs) {
            return fail("partition of unity", e);
        }
        checks += 1;
    }
    for seed in 0..60 {
        let s = common::synthetic(r.random_range(10..200), 2, seed);
        if let Err(e) = common::check_rulebase(&s, r.random_range(2..30)) {
            return fail("rule weights / forecast bounds", e);
        }
        checks += 1;
    }
    for _ in 0..40 {
        let m = r.random_range(2..8);
        let rows: Vec<Vec<f64>> = (0..r.random_range(m + 2..60)).map(|_| (0..m).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
        if let Err(e) = common::check_pca(&rows) {
            return fail("pca", e);
        }
        checks += 1;
    }
    for _ in 0..40 {
        let (a0, ratio, total) = (r.random_range(1e-5..1.0), r.random_range(1e-3..1.0), r.random_range(1..5000));
        let decays: Vec<f64> = (0..=total).map(|t| som::decay(a0, ratio, t, total)).collect();
        if !non_increasing(&decays) {
            return fail("som schedule", format!("a0={a0} ratio={ratio}"));
        }
        checks += 1;
    }
    for seed in 0..10u64 {
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| r.random_range(0.0..1.0)).collect()).collect();
        let (k, l) = (1 + seed as usize % 2, 3 + seed as usize % 4);
        let hp = SomHyperparams { epochs: 2, grid_size: l, learning_rate: 0.3, seed, ..SomHyperparams::default() };
        let model = SomModel::fit(&rows, k, &hp).unwrap();
        for row in &rows {
            if model.embed(row).unwrap().iter().any(|&c| c < 0.0 || c > (l - 1) as f64) {
                return fail("som coordinates", format!("outside [0, {}]", l - 1));
            }
        }
        checks += 1;
    }
    for seed in 0..10u64 {
        let s = common::synthetic(120, 5, seed);
        let names = s.exogenous_names();
        let raw = s.matrix_of(&names).unwrap();
        let scaler = MinMaxScaler::fit_rows(&names, &raw).unwrap();
        let rows: Vec<Vec<f64>> = raw.iter().map(|row| scaler.apply_row(row).unwrap()).collect();
        let hp = AeHyperparams { epochs: 20, hidden: 10, seed, ..AeHyperparams::default() };
        let ae = AeModel::fit(&rows, 2, &hp).unwrap();
        let (first, last) = (ae.loss_history[0], *ae.loss_history.last().unwrap());
        if last > first {
            return fail("autoencoder loss", format!("{first} -> {last}"));
        }
        checks += 1;
    }
    for _ in 0..200 {
        let n = r.random_range(1..50);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..100.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..100.0)).collect();
        if let Err(e) = common::check_metrics(&a, &p) {
            return fail("metrics", e);
        }
        checks += 1;
    }
    Status::Pass(format!("{checks} randomized checks"))
}

fn criterion_6() -> Status {
    let mut r = common::rng(7);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = 2 + case % 29;
        let (a, _) = common::random_psd(&mut r, n);
        let eig = gamma_fts::linalg::jacobi_eigen(&a, n).unwrap();
        for (j, (value, vector)) in common::power_iteration(&a, n, n, case as u64).iter().enumerate() {
            worst = worst.max((eig.values[j] - value).abs());
            let mine = eig.vector(j);
            let sign = if mine.iter().zip(vector).map(|(x, y)| x * y).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for (x, y) in mine.iter().zip(vector) {
                worst = worst.max((x - sign * y).abs());
            }
        }
    }
    let detail = format!("50 matrices up to 30x30, max deviation {worst:.2e}");
    if worst < 1e-6 {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn criterion_7() -> Status {
    let s = common::synthetic(900, 6, 17);
    let mut c = ExperimentConfig::default();
    c.split.window_count = 6;
    c.partition.kappa = 20;
    c.embedding.seed = Some(2024);
    c.embedding.ae.epochs = 5;
    c.embedding.som.epochs = 2;
    c.embedding.som.grid_size = 8;
    c.models = vec![ModelKind::PcaWmvfts, ModelKind::AeWmvfts, ModelKind::SomWmvfts, ModelKind::Persistence];
    let run = || run_on_series(&c, &s).map(|o| serde_json::to_vec_pretty(&o.report).unwrap());
    match (run(), run()) {
        (Ok(a), Ok(b)) if a == b => Status::Pass(format!("two runs, {} identical bytes", a.len())),
        (Ok(_), Ok(_)) => Status::Fail("report JSON differs between runs".into()),
        (Err(e), _) | (_, Err(e)) => Status::Fail(e.to_string()),
    }
}

fn criterion_8() -> Status {
    let s = common::synthetic(300, 3, 1);
    let mut c = ExperimentConfig::default();
    c.split.window_count = 3;
    c.partition.kappa = 10;
    c.dataset.name = Some("aec".into());
    let report = match run_on_series(&c, &s) {
        Ok(o) => o.report,
        Err(e) => return Status::Fail(e.to_string()),
    };
    let find = |model: &str, k: Option<usize>, kappa: Option<usize>| {
        report.reference_targets.iter().find(|t| t.model == model && t.k == k && t.kappa == kappa).map(|t| t.rmse)
    };
    let want = [
        (find("PCA-WMVFTS", Some(2), Some(50)), 5.456),
        (find("Persistence", None, None), 64.749),
        (find("AE-WMVFTS", Some(2), Some(50)), 5.516),
        (find("SOM-WMVFTS", Some(2), Some(50)), 18.292),
    ];
    if want.iter().all(|(got, v)| *got == Some(*v)) {
        Status::Pass(format!(
            "{} published values recorded in the report for comparison only",
            report.reference_targets.len()
        ))
    } else {
        Status::Fail("reference values missing from the report".into())
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    type Criterion = (&'static str, fn() -> Status);
    let criteria: [Criterion; 8] = [
        ("persistence baseline on appliances data", criterion_1),
        ("row counts after loading and cleaning", criterion_2),
        ("PCA-WMVFTS error trend over K and kappa", criterion_3),
        ("rule model equals brute-force enumeration", criterion_4),
        ("invariant suite", criterion_5),
        ("Jacobi eigensolver vs power iteration", criterion_6),
        ("byte-identical reports across runs", criterion_7),
        ("published error values kept as reference targets", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Status::Pass(d) => ("PASS", d),
            Status::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Status::NotRun(d) => ("NOT RUN", d),
        };
        println!("{tag} criterion {}: {name} ({detail})", i + 1);
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
