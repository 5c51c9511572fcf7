use std::sync::Arc;
use std::time::{Duration, Instant};

use super::config::{ExperimentConfig, Method};
use super::metrics::{compute_metrics, Metrics};
use crate::adapt::{prior_reference, run_adaptive_smc, TraceRow, WeightObjectiveContext};
use crate::baselines::{semiauto_project, subset_select, subset_weights, ProjectionMatrix, SubsetSelection};
use crate::divergence::Estimator;
use crate::models::Dataset;
use crate::rng::{self, Purpose};
use crate::smc::{
    accepted_count, run_abc_smc, GenerationInput, Problem, ScaledWeights, SmcRun, SmcSettings, UniformWeights,
    WeightStrategy,
};
use crate::summaries::{summarize, WeightVector};
use crate::Result;

/// The observed dataset, simulated at `θ*` from the config's seed.
pub fn observe(cfg: &ExperimentConfig) -> Result<Dataset> {
    let model = cfg.model()?;
    let mut r = rng::stream(cfg.seed, Purpose::Observed, 0, 0);
    model.simulate(&cfg.theta_star, &mut r)
}

/// Model, prior and observed summaries for `cfg`.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let model = cfg.model()?;
    let observed = summarize(&model, &observe(cfg)?)?;
    Problem::new(model, cfg.prior_spec()?, observed)
}

/// Output of one inference method.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub run: SmcRun,
    /// Per-restart optimizer results (adaptive only).
    pub trace: Vec<TraceRow>,
    pub projection: Option<ProjectionMatrix>,
    pub subset: Option<SubsetSelection>,
    /// Time spent on a pilot run before inference (semi-automatic only).
    pub pilot: Duration,
}

impl MethodRun {
    /// Time spent choosing weights, including any pilot run.
    pub fn search_time(&self) -> Duration {
        self.run.times.weights + self.pilot
    }
}

/// Subset selection on generation 1's pool, then uniform weights on the
/// chosen subset.
#[derive(Debug, Clone)]
pub struct SubsetWeights {
    pub threshold: f64,
    pub estimator: Estimator,
    pub selection: Option<SubsetSelection>,
    fitted: Option<WeightVector>,
}

impl SubsetWeights {
    pub fn new(threshold: f64, estimator: Estimator) -> Self {
        Self { threshold, estimator, selection: None, fitted: None }
    }
}

impl WeightStrategy for SubsetWeights {
    fn weights(&mut self, input: &GenerationInput<'_>) -> Result<WeightVector> {
        if let Some(w) = &self.fitted {
            return Ok(w.clone());
        }
        let m = accepted_count(input.alpha_accept, input.pool.len())?;
        let xi = prior_reference(input.prior, m, input.seed, input.generation)?;
        let ctx = WeightObjectiveContext::from_pool(input.pool, xi, m, self.estimator)?;
        let mut r = rng::stream(input.seed, Purpose::Baseline, 1, 0);
        let sel = subset_select(&ctx, self.threshold, &mut r)?;
        let w = subset_weights(ctx.kappa(), &sel.subset)?;
        self.selection = Some(sel);
        self.fitted = Some(w.clone());
        Ok(w)
    }
}

/// Fit the semi-automatic projection on a single-generation uniform-weight
/// rejection pilot.
pub fn semiauto_pilot(problem: &Problem, settings: &SmcSettings) -> Result<ProjectionMatrix> {
    let pilot_settings =
        SmcSettings { generations: 1, seed: rng::child_seed(settings.seed, Purpose::Baseline, 0), ..settings.clone() };
    let pilot = run_abc_smc(problem, &pilot_settings, &mut UniformWeights)?;
    let pop = pilot.last();
    let kept: Vec<_> = pop.particles().iter().filter(|p| p.summary.is_some()).collect();
    let thetas: Vec<&[f64]> = kept.iter().map(|p| p.log10_theta.as_slice()).collect();
    let summaries: Vec<&[f64]> = kept.iter().filter_map(|p| p.summary.as_ref().map(|s| s.values())).collect();
    semiauto_project(&thetas, &summaries)
}

/// Run `cfg.method` on `problem` with inference streams from `seed`.
pub fn run_method(cfg: &ExperimentConfig, problem: &Problem, seed: u64) -> Result<MethodRun> {
    let settings = SmcSettings { seed, ..cfg.smc_settings()? };
    let estimator = cfg.estimator.estimator();
    let mut out = MethodRun {
        method: cfg.method,
        run: SmcRun { populations: Vec::new(), weights: Vec::new(), failures: Vec::new(), times: Default::default() },
        trace: Vec::new(),
        projection: None,
        subset: None,
        pilot: Duration::ZERO,
    };
    match cfg.method {
        Method::Adaptive => {
            let (run, trace) = run_adaptive_smc(problem, &settings, cfg.optimizer, estimator, cfg.resample_posterior)?;
            out.run = run;
            out.trace = trace;
        }
        Method::Uniform => out.run = run_abc_smc(problem, &settings, &mut UniformWeights)?,
        Method::Scaled => out.run = run_abc_smc(problem, &settings, &mut ScaledWeights::default())?,
        Method::Subset => {
            let mut strategy = SubsetWeights::new(cfg.baselines.subset_threshold, estimator);
            out.run = run_abc_smc(problem, &settings, &mut strategy)?;
            out.subset = strategy.selection;
        }
        Method::Semiauto => {
            let clock = Instant::now();
            let proj = semiauto_pilot(problem, &settings)?;
            out.pilot = clock.elapsed();
            let projected = problem.clone().with_transform(Arc::new(proj.clone()));
            out.run = run_abc_smc(&projected, &settings, &mut UniformWeights)?;
            out.projection = Some(proj);
        }
    }
    Ok(out)
}

/// Metrics of a run's final population, with the metric stream of `seed`.
pub fn run_metrics(cfg: &ExperimentConfig, problem: &Problem, run: &SmcRun, seed: u64) -> Result<Metrics> {
    let mut r = rng::stream(seed, Purpose::Metric, 0, 0);
    compute_metrics(run.last(), &problem.prior, &cfg.theta_star, cfg.metrics.n_ref, cfg.estimator.k, &mut r)
}
