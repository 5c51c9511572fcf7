use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::experiment::{build_problem, run_method, run_metrics, MethodRun};
use super::metrics::Metrics;
use crate::baselines::ProjectionMatrix;
use crate::models::Dataset;
use crate::smc::Population;
use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const TIMING: &str = "timing.json";

/// Run description written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub model: String,
    pub method: String,
    pub seed: u64,
    pub config_hash: String,
    pub metric_space: String,
    pub generations: usize,
    /// Failed simulations per generation.
    pub failures: Vec<usize>,
    pub projection: Option<ProjectionMatrix>,
    pub subset: Option<Vec<usize>>,
    pub subset_order: Option<Vec<usize>>,
    /// SHA-256 of every emitted file except this manifest and the timings.
    pub files: BTreeMap<String, String>,
}

/// What `run_experiment` produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub metrics: Metrics,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

pub fn write_particles_csv(path: &Path, pop: &Population) -> Result<()> {
    let mut w = csv_writer(path)?;
    let p = pop.particles().first().map_or(0, |p| p.theta.len());
    let mut header = vec!["particle_id".to_string()];
    header.extend((1..=p).map(|i| format!("theta_{i}")));
    header.push("v".into());
    header.push("distance".into());
    w.write_record(&header)?;
    for (i, part) in pop.particles().iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(part.theta.iter().map(|x| x.to_string()));
        row.push(part.v.to_string());
        row.push(part.distance.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn weight_header(first: &[&str], kappa: usize, last: Option<&str>) -> Vec<String> {
    let mut h: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    h.extend((1..=kappa).map(|i| format!("w_{i}")));
    h.extend(last.map(String::from));
    h
}

fn write_weights_csv(path: &Path, run: &MethodRun) -> Result<()> {
    let mut w = csv_writer(path)?;
    let kappa = run.run.weights.first().map_or(0, |w| w.len());
    w.write_record(weight_header(&["generation"], kappa, None))?;
    for (g, wv) in run.run.weights.iter().enumerate() {
        let mut row = vec![(g + 1).to_string()];
        row.extend(wv.as_slice().iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_trace_csv(path: &Path, run: &MethodRun) -> Result<()> {
    let mut w = csv_writer(path)?;
    let kappa = run.run.weights.first().map_or(0, |w| w.len());
    w.write_record(weight_header(&["generation", "restart"], kappa, Some("L")))?;
    for t in &run.trace {
        let mut row = vec![t.generation.to_string(), t.restart.to_string()];
        row.extend(t.weights.iter().map(|x| x.to_string()));
        row.push(t.value.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Dataset as CSV: `t, species_1..species_s[, z]` per observation, or
/// `index, x` for the toy model's draws.
pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv_writer(path)?;
    match data {
        Dataset::Draws(x) => {
            w.write_record(["index", "x"])?;
            for (i, v) in x.iter().enumerate() {
                w.write_record([i.to_string(), v.to_string()])?;
            }
        }
        Dataset::Trajectory(t) => {
            let mut header = vec!["t".to_string()];
            header.extend((1..=t.species_count()).map(|i| format!("species_{i}")));
            if t.aux.is_some() {
                header.push("z".into());
            }
            w.write_record(&header)?;
            for (time, row) in t.times().iter().zip(t.rows()) {
                let mut rec = vec![time.to_string()];
                rec.extend(row.iter().map(|c| c.to_string()));
                if let Some(z) = t.aux {
                    rec.push(z.to_string());
                }
                w.write_record(&rec)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write a complete run into `dir` atomically: everything goes to a hidden
/// sibling directory that is renamed into place once finished.
fn write_run(
    dir: &Path,
    cfg: &ExperimentConfig,
    observed: &Dataset,
    run: &MethodRun,
    metrics: &Metrics,
) -> Result<Manifest> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    if dir.exists() {
        let empty = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_none();
        if !empty {
            return Err(Error::validation("out_dir", format!("{} exists and is not empty", dir.display())));
        }
        fs::remove_dir(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = tempfile::Builder::new().prefix(".abcweight-").tempdir_in(&parent).map_err(|e| Error::io(&parent, e))?;
    let root = tmp.path();

    let mut names = vec!["config.toml".to_string(), "observed.csv".to_string()];
    cfg.save(root.join("config.toml"))?;
    write_dataset_csv(&root.join("observed.csv"), observed)?;
    for pop in &run.run.populations {
        let name = format!("particles_gen{}.csv", pop.generation());
        write_particles_csv(&root.join(&name), pop)?;
        names.push(name);
    }
    write_weights_csv(&root.join("weights.csv"), run)?;
    write_trace_csv(&root.join("weight_trace.csv"), run)?;
    write_json(&root.join("metrics.json"), metrics)?;
    names.extend(["weights.csv", "weight_trace.csv", "metrics.json"].map(String::from));

    let mut files = BTreeMap::new();
    for n in &names {
        files.insert(n.clone(), sha256_file(&root.join(n))?);
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        model: cfg.model.id.to_string(),
        method: cfg.method.to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash()?,
        metric_space: "log10".into(),
        generations: run.run.populations.len(),
        failures: run.run.failures.clone(),
        projection: run.projection.clone(),
        subset: run.subset.as_ref().map(|s| s.subset.iter().map(|i| i + 1).collect()),
        subset_order: run.subset.as_ref().map(|s| s.order.iter().map(|i| i + 1).collect()),
        files,
    };
    write_json(&root.join(MANIFEST), &manifest)?;
    let t = &run.run.times;
    let timing = serde_json::json!({
        "simulate_seconds": t.simulate.as_secs_f64(),
        "weights_seconds": t.weights.as_secs_f64(),
        "select_seconds": t.select.as_secs_f64(),
        "pilot_seconds": run.pilot.as_secs_f64(),
    });
    let mut f = fs::File::create(root.join(TIMING)).map_err(|e| Error::io(root.join(TIMING), e))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&timing)?).map_err(|e| Error::io(root.join(TIMING), e))?;

    let kept = tmp.keep();
    fs::rename(&kept, dir).map_err(|e| {
        let _ = fs::remove_dir_all(&kept);
        Error::io(dir, e)
    })?;
    Ok(manifest)
}

/// Simulate the observed data, run the configured method, and write all
/// artifacts to `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    let observed = super::experiment::observe(cfg)?;
    let run = run_method(cfg, &problem, cfg.seed)?;
    let metrics = run_metrics(cfg, &problem, &run.run, cfg.seed)?;
    let manifest = write_run(out_dir, cfg, &observed, &run, &metrics)?;
    Ok(RunArtifacts { dir: out_dir.to_path_buf(), manifest, metrics })
}

/// Read a manifest and check every digest it lists.
pub fn verify_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    for (name, digest) in &manifest.files {
        let actual = sha256_file(&dir.join(name))?;
        if &actual != digest {
            return Err(Error::validation(name.clone(), "digest mismatch"));
        }
    }
    Ok(manifest)
}
