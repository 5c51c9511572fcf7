//! ABC-SMC with the distance weights supplied per generation by a
//! [`WeightStrategy`].
//!
//! Generation 1 draws `N` candidates from the prior; later generations
//! resample the previous population by importance weight and perturb in
//! log₁₀ space. In every generation the strategy sees the whole candidate
//! pool, returns a weight vector, and the `M = ⌊αN⌋` candidates closest to
//! the observed summaries under that weighting survive.

mod kernel;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rayon::prelude::*;

pub use kernel::{
    importance_weight, ln_importance_weight, perturb, propose, sample_prior, KernelSpec, PriorSpec,
    MAX_PROPOSAL_ATTEMPTS,
};

use crate::baselines::scaled_weights;
use crate::divergence::SampleSet;
use crate::models::Model;
use crate::rng::{self, Purpose};
use crate::summaries::{summarize, weighted_sq, SummaryVector, WeightVector};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Parameters in natural units.
    pub theta: Vec<f64>,
    pub log10_theta: Vec<f64>,
    /// Normalized importance weight.
    pub v: f64,
    /// Unnormalized log importance weight (exactly 0 in generation 1).
    pub ln_raw_weight: f64,
    /// `None` when the simulation failed.
    pub summary: Option<SummaryVector>,
    /// Weighted distance to the observed summaries; `+∞` for failures.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    generation: usize,
    particles: Vec<Particle>,
}

impl Population {
    pub fn new(generation: usize, particles: Vec<Particle>) -> Self {
        Self { generation, particles }
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.v).collect()
    }

    pub fn log10_thetas(&self) -> Result<SampleSet> {
        let rows: Vec<&[f64]> = self.particles.iter().map(|p| p.log10_theta.as_slice()).collect();
        SampleSet::from_rows(&rows)
    }
}

/// `⌊αN⌋`, rejecting proportions that keep nothing.
pub fn accepted_count(alpha: f64, n: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("acceptance proportion must lie in (0, 1], got {alpha}")));
    }
    let m = (alpha * n as f64).floor() as usize;
    if m == 0 {
        return Err(Error::invalid(format!("acceptance proportion {alpha} keeps no particles out of {n}")));
    }
    Ok(m)
}

/// Indices of the `⌊αN⌋` smallest distances, ties going to the smaller
/// index. Returned in increasing index order.
pub fn select_closest(distances: &[f64], alpha: f64) -> Result<Vec<usize>> {
    let m = accepted_count(alpha, distances.len())?;
    Ok(select_m_closest(distances, m))
}

pub(crate) fn select_m_closest(distances: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    let cmp = |a: &usize, b: &usize| distances[*a].total_cmp(&distances[*b]).then(a.cmp(b));
    if m < order.len() {
        order.select_nth_unstable_by(m, cmp);
        order.truncate(m);
    }
    order.sort_unstable();
    order
}

/// Maps raw summaries to the space the distance is computed in.
pub trait SummaryTransform: Send + Sync {
    fn apply(&self, s: &SummaryVector) -> Result<SummaryVector>;
    fn output_len(&self) -> usize;
}

/// The inference problem: model, prior and observed data.
#[derive(Clone)]
pub struct Problem {
    pub model: Model,
    pub prior: PriorSpec,
    /// Summaries of the observed dataset, before any transform.
    pub observed: SummaryVector,
    pub transform: Option<Arc<dyn SummaryTransform>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("model", &self.model)
            .field("prior", &self.prior)
            .field("observed", &self.observed)
            .field("transform", &self.transform.as_ref().map(|t| t.output_len()))
            .finish()
    }
}

impl Problem {
    pub fn new(model: Model, prior: PriorSpec, observed: SummaryVector) -> Result<Self> {
        if prior.dim() != model.param_dim() {
            return Err(Error::DimensionMismatch { expected: model.param_dim(), actual: prior.dim() });
        }
        if observed.len() != model.summary_len() {
            return Err(Error::DimensionMismatch { expected: model.summary_len(), actual: observed.len() });
        }
        Ok(Self { model, prior, observed, transform: None })
    }

    pub fn with_transform(mut self, t: Arc<dyn SummaryTransform>) -> Self {
        self.transform = Some(t);
        self
    }

    /// Length of the summaries the distance sees.
    pub fn kappa(&self) -> usize {
        self.transform.as_ref().map_or(self.model.summary_len(), |t| t.output_len())
    }

    pub fn observed_summary(&self) -> Result<SummaryVector> {
        match &self.transform {
            Some(t) => t.apply(&self.observed),
            None => Ok(self.observed.clone()),
        }
    }

    /// Simulate at `θ` and summarize; `Ok(None)` on a reportable simulation
    /// failure such as hitting the event cap.
    pub fn simulate_summary<R: rand::Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<Option<SummaryVector>> {
        let data = match self.model.simulate(theta, rng) {
            Ok(d) => d,
            Err(Error::EventCapExceeded(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let s = summarize(&self.model, &data)?;
        match &self.transform {
            Some(t) => t.apply(&s).map(Some),
            None => Ok(Some(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcSettings {
    pub n_sims: usize,
    pub alpha_accept: f64,
    pub generations: usize,
    pub kernel: KernelSpec,
    pub seed: u64,
}

impl SmcSettings {
    pub fn accepted(&self) -> Result<usize> {
        accepted_count(self.alpha_accept, self.n_sims)
    }
}

/// All `N` simulated candidates of one generation.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub thetas: Vec<Vec<f64>>,
    pub log10_thetas: SampleSet,
    pub summaries: Vec<Option<SummaryVector>>,
    pub observed: SummaryVector,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn distances(&self, w: &WeightVector) -> Vec<f64> {
        self.summaries
            .iter()
            .map(|s| match s {
                Some(s) => weighted_sq(w.as_slice(), s.values(), self.observed.values()),
                None => f64::INFINITY,
            })
            .collect()
    }

    /// Summaries of the successful simulations as rows.
    pub fn summary_rows(&self) -> Vec<&[f64]> {
        self.summaries.iter().flatten().map(|s| s.values()).collect()
    }
}

/// What a weight strategy gets to look at.
#[derive(Debug)]
pub struct GenerationInput<'a> {
    pub generation: usize,
    pub pool: &'a CandidatePool,
    pub prior: &'a PriorSpec,
    pub alpha_accept: f64,
    pub seed: u64,
    pub previous: Option<&'a WeightVector>,
    /// The previous generation's population, absent in generation 1.
    pub population: Option<&'a Population>,
    pub kernel: &'a KernelSpec,
}

pub trait WeightStrategy {
    fn weights(&mut self, input: &GenerationInput<'_>) -> Result<WeightVector>;
}

/// The same weights every generation.
#[derive(Debug, Clone)]
pub struct FixedWeights(pub WeightVector);

impl WeightStrategy for FixedWeights {
    fn weights(&mut self, _: &GenerationInput<'_>) -> Result<WeightVector> {
        Ok(self.0.clone())
    }
}

/// Uniform weights.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformWeights;

impl WeightStrategy for UniformWeights {
    fn weights(&mut self, input: &GenerationInput<'_>) -> Result<WeightVector> {
        WeightVector::uniform(input.pool.observed.len())
    }
}

/// `1/σ_i` weights from the first generation's prior-predictive pool, held
/// fixed afterwards.
#[derive(Debug, Clone, Default)]
pub struct ScaledWeights {
    fitted: Option<WeightVector>,
}

impl WeightStrategy for ScaledWeights {
    fn weights(&mut self, input: &GenerationInput<'_>) -> Result<WeightVector> {
        if self.fitted.is_none() {
            self.fitted = Some(scaled_weights(&input.pool.summary_rows())?);
        }
        Ok(self.fitted.clone().expect("just set"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub simulate: Duration,
    pub weights: Duration,
    pub select: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.simulate + self.weights + self.select
    }
}

#[derive(Debug, Clone)]
pub struct SmcRun {
    pub populations: Vec<Population>,
    /// Weight vector used in each generation.
    pub weights: Vec<WeightVector>,
    /// Candidates per generation whose simulation failed.
    pub failures: Vec<usize>,
    pub times: PhaseTimes,
}

impl SmcRun {
    pub fn last(&self) -> &Population {
        self.populations.last().expect("runs have at least one generation")
    }
}

/// Simulate generation `generation`'s candidate pool.
pub fn simulate_pool(
    problem: &Problem,
    settings: &SmcSettings,
    generation: usize,
    prev: Option<&Population>,
) -> Result<CandidatePool> {
    let sampler = match prev {
        Some(p) => Some(
            WeightedIndex::new(p.weights()).map_err(|e| Error::invalid(format!("previous population weights: {e}")))?,
        ),
        None => None,
    };
    let one = |i: usize| -> Result<(Vec<f64>, Vec<f64>, Option<SummaryVector>)> {
        let mut rng = rng::stream(settings.seed, Purpose::Candidate, generation as u64, i as u64);
        let log10 = match (prev, &sampler) {
            (Some(p), Some(s)) => propose(p, s, &settings.kernel, &problem.prior, &mut rng)?,
            _ => problem.prior.sample_log10(&mut rng),
        };
        let theta: Vec<f64> =
            log10.iter().zip(problem.prior.bounds()).map(|(x, &(lo, hi))| 10f64.powf(*x).clamp(lo, hi)).collect();
        let s = problem.simulate_summary(&theta, &mut rng)?;
        Ok((theta, log10, s))
    };
    let results: Vec<_> = (0..settings.n_sims).into_par_iter().map(one).collect::<Result<_>>()?;
    let dim = problem.prior.dim();
    let mut thetas = Vec::with_capacity(results.len());
    let mut flat = Vec::with_capacity(results.len() * dim);
    let mut summaries = Vec::with_capacity(results.len());
    for (t, l, s) in results {
        thetas.push(t);
        flat.extend(l);
        summaries.push(s);
    }
    Ok(CandidatePool {
        thetas,
        log10_thetas: SampleSet::from_flat(flat, dim)?,
        summaries,
        observed: problem.observed_summary()?,
    })
}

/// Keep `selected` from the pool, weighting them against `prev`.
pub fn build_population(
    generation: usize,
    pool: &CandidatePool,
    distances: &[f64],
    selected: &[usize],
    prev: Option<&Population>,
    kernel: &KernelSpec,
    prior: &PriorSpec,
) -> Result<Population> {
    let ln_w: Vec<f64> = match prev {
        None => vec![0.0; selected.len()],
        Some(p) => selected
            .par_iter()
            .map(|&i| ln_importance_weight(pool.log10_thetas.row(i), p, kernel, prior))
            .collect::<Result<_>>()?,
    };
    let max = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = ln_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    let particles = selected
        .iter()
        .zip(ln_w.iter().zip(&unnorm))
        .map(|(&i, (&lw, &u))| Particle {
            theta: pool.thetas[i].clone(),
            log10_theta: pool.log10_thetas.row(i).to_vec(),
            v: u / total,
            ln_raw_weight: lw,
            summary: pool.summaries[i].clone(),
            distance: distances[i],
        })
        .collect();
    Ok(Population::new(generation, particles))
}

/// Run ABC-SMC for `settings.generations` generations.
pub fn run_abc_smc(problem: &Problem, settings: &SmcSettings, strategy: &mut dyn WeightStrategy) -> Result<SmcRun> {
    if settings.generations == 0 {
        return Err(Error::invalid("need at least one generation"));
    }
    if settings.kernel.sd().len() != problem.prior.dim() {
        return Err(Error::DimensionMismatch { expected: problem.prior.dim(), actual: settings.kernel.sd().len() });
    }
    let m = settings.accepted()?;
    let mut populations: Vec<Population> = Vec::with_capacity(settings.generations);
    let mut weights: Vec<WeightVector> = Vec::with_capacity(settings.generations);
    let mut failures = Vec::with_capacity(settings.generations);
    let mut times = PhaseTimes::default();

    for generation in 1..=settings.generations {
        let clock = Instant::now();
        let prev = populations.last();
        let pool = simulate_pool(problem, settings, generation, prev)?;
        failures.push(pool.summaries.iter().filter(|s| s.is_none()).count());
        times.simulate += clock.elapsed();

        let clock = Instant::now();
        let input = GenerationInput {
            generation,
            pool: &pool,
            prior: &problem.prior,
            alpha_accept: settings.alpha_accept,
            seed: settings.seed,
            previous: weights.last(),
            population: prev,
            kernel: &settings.kernel,
        };
        let w = strategy.weights(&input)?;
        if w.len() != problem.kappa() {
            return Err(Error::DimensionMismatch { expected: problem.kappa(), actual: w.len() });
        }
        times.weights += clock.elapsed();

        let clock = Instant::now();
        let distances = pool.distances(&w);
        let selected = select_m_closest(&distances, m);
        let pop = build_population(generation, &pool, &distances, &selected, prev, &settings.kernel, &problem.prior)?;
        times.select += clock.elapsed();

        log::debug!(
            "generation {generation}: kept {} of {}, {} failed simulations",
            pop.len(),
            pool.len(),
            failures.last().copied().unwrap_or(0)
        );
        populations.push(pop);
        weights.push(w);
    }
    Ok(SmcRun { populations, weights, failures, times })
}
