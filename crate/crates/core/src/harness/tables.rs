use std::path::Path;

use serde::Serialize;

use super::config::{ExperimentConfig, Method, ModelId, Scale};
use super::experiment::{build_problem, run_method, run_metrics, MethodRun};
use crate::rng::{self, Purpose};
use crate::smc::{accepted_count, Problem};
use crate::{Error, Result};

/// One cell group of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub table: u8,
    pub model: ModelId,
    pub repeat: usize,
    /// Column label, e.g. `uniform_n1` or `adaptive`.
    pub label: String,
    pub n_sims: usize,
    pub alpha_accept: f64,
    pub hellinger: f64,
    pub mean_bias: f64,
    pub mode_bias: f64,
    /// Seconds spent choosing weights.
    pub search_seconds: f64,
    pub error: Option<String>,
}

impl TableRow {
    fn failed(table: u8, model: ModelId, repeat: usize, label: &str, cfg: &ExperimentConfig, e: Error) -> Self {
        log::warn!("table {table} {model} repeat {repeat} {label}: {e}");
        Self {
            table,
            model,
            repeat,
            label: label.into(),
            n_sims: cfg.n_sims,
            alpha_accept: cfg.alpha_accept,
            hellinger: f64::NAN,
            mean_bias: f64::NAN,
            mode_bias: f64::NAN,
            search_seconds: f64::NAN,
            error: Some(e.to_string()),
        }
    }
}

/// Seed of replication `repeat` under `root`.
pub fn repeat_seed(root: u64, repeat: usize) -> u64 {
    rng::child_seed(root, Purpose::Repeat, repeat as u64)
}

fn cell(
    table: u8,
    cfg: &ExperimentConfig,
    problem: &Problem,
    repeat: usize,
    label: &str,
) -> (TableRow, Option<MethodRun>) {
    let result = run_method(cfg, problem, cfg.seed).and_then(|run| {
        let m = run_metrics(cfg, problem, &run.run, cfg.seed)?;
        Ok((m, run))
    });
    match result {
        Ok((m, run)) => (
            TableRow {
                table,
                model: cfg.model.id,
                repeat,
                label: label.into(),
                n_sims: cfg.n_sims,
                alpha_accept: cfg.alpha_accept,
                hellinger: m.hellinger,
                mean_bias: m.mean_bias,
                mode_bias: m.mode_bias,
                search_seconds: run.search_time().as_secs_f64(),
                error: None,
            },
            Some(run),
        ),
        Err(e) => (TableRow::failed(table, cfg.model.id, repeat, label, cfg, e), None),
    }
}

/// `α₂ = M/N₂`, nudged up until `⌊α₂N₂⌋ = M`.
pub fn matched_alpha(m: usize, n2: usize) -> Result<f64> {
    if m == 0 || m > n2 {
        return Err(Error::invalid(format!("cannot keep {m} of {n2}")));
    }
    let mut a = m as f64 / n2 as f64;
    while accepted_count(a, n2)? < m {
        a = f64::from_bits(a.to_bits() + 1);
    }
    Ok(a.min(1.0))
}

/// `N₂` such that the extra simulations over all generations take as long
/// as the adaptive run's weight search.
pub fn equal_compute_n(run: &MethodRun, n1: usize) -> usize {
    let generations = run.run.populations.len().max(1) as f64;
    let per_sim = run.run.times.simulate.as_secs_f64() / (n1 as f64 * generations);
    if per_sim <= 0.0 {
        return n1;
    }
    let extra = run.search_time().as_secs_f64() / (per_sim * generations);
    n1 + extra.round() as usize
}

/// Adaptive weights against uniform weights at equal particle counts,
/// with the uniform run given the adaptive search time as extra
/// simulations.
///
/// Columns: `uniform_n1`, `uniform_n2`, `adaptive`.
pub fn reproduce_table1(
    scale: Scale,
    models: &[ModelId],
    repeats: Option<usize>,
    root_seed: u64,
) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for &model in models {
        let base = ExperimentConfig::preset_for(model, scale)?;
        for r in 0..repeats.unwrap_or(base.repeats) {
            let cfg = ExperimentConfig { seed: repeat_seed(root_seed, r), ..base.clone() };
            rows.extend(table1_repeat(&cfg, r)?);
        }
    }
    Ok(rows)
}

/// The three equal-compute cells for one replication of `cfg`.
pub fn table1_repeat(cfg: &ExperimentConfig, repeat: usize) -> Result<Vec<TableRow>> {
    let problem = build_problem(cfg)?;
    let adaptive_cfg = ExperimentConfig { method: Method::Adaptive, ..cfg.clone() };
    let uniform_cfg = ExperimentConfig { method: Method::Uniform, ..cfg.clone() };
    let (adaptive_row, adaptive_run) = cell(1, &adaptive_cfg, &problem, repeat, "adaptive");
    let (uniform1, _) = cell(1, &uniform_cfg, &problem, repeat, "uniform_n1");
    let mut rows = vec![uniform1];
    match adaptive_run {
        Some(run) => {
            let m1 = cfg.accepted()?;
            let n2 = equal_compute_n(&run, cfg.n_sims);
            let cfg2 = ExperimentConfig { n_sims: n2, alpha_accept: matched_alpha(m1, n2)?, ..uniform_cfg };
            log::info!("{} repeat {repeat}: N2 = {n2}, alpha2 = {}", cfg.model.id, cfg2.alpha_accept);
            rows.push(cell(1, &cfg2, &problem, repeat, "uniform_n2").0);
        }
        None => rows.push(TableRow::failed(
            1,
            cfg.model.id,
            repeat,
            "uniform_n2",
            cfg,
            Error::invalid("adaptive run failed"),
        )),
    }
    rows.push(adaptive_row);
    Ok(rows)
}

/// Adaptive weights, subset selection and semi-automatic projection, each
/// as single-generation rejection ABC.
///
/// Columns: `adaptive`, `subset`, `semiauto`.
pub fn reproduce_table2(
    scale: Scale,
    models: &[ModelId],
    repeats: Option<usize>,
    root_seed: u64,
) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for &model in models {
        let base = ExperimentConfig::preset_for(model, scale)?;
        for r in 0..repeats.unwrap_or(base.repeats) {
            let cfg = ExperimentConfig { seed: repeat_seed(root_seed, r), generations: 1, ..base.clone() };
            rows.extend(table2_repeat(&cfg, r)?);
        }
    }
    Ok(rows)
}

pub fn table2_repeat(cfg: &ExperimentConfig, repeat: usize) -> Result<Vec<TableRow>> {
    let problem = build_problem(cfg)?;
    Ok([Method::Adaptive, Method::Subset, Method::Semiauto]
        .into_iter()
        .map(|method| {
            let c = ExperimentConfig { method, ..cfg.clone() };
            cell(2, &c, &problem, repeat, method.as_str()).0
        })
        .collect())
}

/// Per-model, per-column means over replications.
pub fn summarize_rows(rows: &[TableRow]) -> Vec<TableRow> {
    let mut out: Vec<TableRow> = Vec::new();
    for row in rows.iter().filter(|r| r.error.is_none()) {
        if out.iter().any(|o| o.model == row.model && o.label == row.label) {
            continue;
        }
        let group: Vec<&TableRow> =
            rows.iter().filter(|r| r.error.is_none() && r.model == row.model && r.label == row.label).collect();
        let n = group.len() as f64;
        let mean = |f: fn(&TableRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
        out.push(TableRow {
            repeat: group.len(),
            n_sims: (group.iter().map(|r| r.n_sims as f64).sum::<f64>() / n).round() as usize,
            alpha_accept: mean(|r| r.alpha_accept),
            hellinger: mean(|r| r.hellinger),
            mean_bias: mean(|r| r.mean_bias),
            mode_bias: mean(|r| r.mode_bias),
            search_seconds: mean(|r| r.search_seconds),
            ..row.clone()
        });
    }
    out
}

pub fn write_table_csv(path: &Path, rows: &[TableRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record([
        "table",
        "model",
        "repeat",
        "label",
        "n_sims",
        "alpha_accept",
        "hellinger",
        "mean_bias",
        "mode_bias",
        "search_seconds",
        "error",
    ])?;
    for r in rows {
        w.write_record([
            r.table.to_string(),
            r.model.to_string(),
            r.repeat.to_string(),
            r.label.clone(),
            r.n_sims.to_string(),
            r.alpha_accept.to_string(),
            r.hellinger.to_string(),
            r.mean_bias.to_string(),
            r.mode_bias.to_string(),
            r.search_seconds.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Final-generation adaptive weights from repeated runs on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub seeds: Vec<u64>,
    /// One row of `κ` weights per run.
    pub weights: Vec<Vec<f64>>,
    /// Mean weight per summary.
    pub mean: Vec<f64>,
    /// Each run's weights minus that run's mean weight.
    pub centered: Vec<Vec<f64>>,
    pub centered_mean: Vec<f64>,
}

impl ConsistencyReport {
    /// Summary (0-based) with the largest mean-centered weight.
    pub fn argmax_centered(&self) -> usize {
        self.centered_mean.iter().enumerate().fold(0, |b, (i, v)| if *v > self.centered_mean[b] { i } else { b })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(f);
        let kappa = self.mean.len();
        let mut header = vec!["row".to_string()];
        header.extend((1..=kappa).map(|i| format!("w_{i}")));
        w.write_record(&header)?;
        for (i, row) in self.weights.iter().enumerate() {
            let mut rec = vec![format!("run_{}", i + 1)];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        for (label, row) in [("mean", &self.mean), ("centered_mean", &self.centered_mean)] {
            let mut rec = vec![label.to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Run the adaptive method once per seed on the dataset observed under
/// `cfg.seed`.
pub fn consistency_study_with_seeds(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<ConsistencyReport> {
    if seeds.len() < 2 {
        return Err(Error::invalid("consistency study needs at least two runs"));
    }
    let cfg = ExperimentConfig { method: Method::Adaptive, ..cfg.clone() };
    let problem = build_problem(&cfg)?;
    let mut weights = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let run = run_method(&cfg, &problem, s)?;
        let last = run.run.weights.last().ok_or_else(|| Error::invalid("run produced no weights"))?;
        weights.push(last.as_slice().to_vec());
    }
    let kappa = weights[0].len();
    let n = weights.len() as f64;
    let mean: Vec<f64> = (0..kappa).map(|j| weights.iter().map(|w| w[j]).sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| {
            let m = w.iter().sum::<f64>() / kappa as f64;
            w.iter().map(|x| x - m).collect()
        })
        .collect();
    let centered_mean = (0..kappa).map(|j| centered.iter().map(|w| w[j]).sum::<f64>() / n).collect();
    Ok(ConsistencyReport { seeds: seeds.to_vec(), weights, mean, centered, centered_mean })
}

/// `runs` repetitions with seeds derived from `cfg.seed`.
pub fn consistency_study(cfg: &ExperimentConfig, runs: usize) -> Result<ConsistencyReport> {
    let seeds: Vec<u64> = (0..runs).map(|r| repeat_seed(cfg.seed, r)).collect();
    consistency_study_with_seeds(cfg, &seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_alpha_keeps_count() {
        for (m, n2) in [(250, 5600), (25, 5001), (1, 3), (7, 7), (250, 12345)] {
            let a = matched_alpha(m, n2).unwrap();
            assert_eq!(accepted_count(a, n2).unwrap(), m);
        }
    }
}
