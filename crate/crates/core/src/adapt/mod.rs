//! Adaptive choice of ABC distance weights.
//!
//! In each generation the weights are chosen to maximize
//! `L(w) = 1 - D̂_{1/2}(ξ ‖ θ(w))`, the kNN Hellinger estimate between a
//! fresh prior sample `ξ` and the candidates the weighted distance would
//! keep. `L` only changes when the kept set changes, so it is piecewise
//! constant in `w`.

mod objective;
mod optimizer;
mod scan;

use rayon::prelude::*;
use serde::Serialize;

pub use objective::{objective_l, WeightObjectiveContext};
pub use optimizer::{
    optimize_from, optimize_weights, starting_points, OptimizationResult, OptimizerConfig, RestartResult, StartKind,
    LN_ZERO,
};
pub use scan::{plateau_stats, scan_line, ScanPoint, SCAN_STEP};

use crate::baselines::scaled_weights;
use crate::divergence::{Estimator, SampleSet};
use crate::rng::{self, Purpose};
use crate::smc::{
    accepted_count, ln_importance_weight, run_abc_smc, GenerationInput, PriorSpec, Problem, SmcRun, SmcSettings,
    WeightStrategy,
};
use crate::summaries::WeightVector;
use crate::Result;

/// One row of the weight trace: a restart's best point in a generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub generation: usize,
    pub restart: usize,
    pub start: StartKind,
    pub chosen: bool,
    pub weights: Vec<f64>,
    pub value: f64,
}

/// `M` log₁₀ prior draws for generation `generation`.
pub fn prior_reference(prior: &PriorSpec, m: usize, seed: u64, generation: usize) -> Result<SampleSet> {
    let mut r = rng::stream(seed, Purpose::PriorReference, generation as u64, 0);
    let mut flat = Vec::with_capacity(m * prior.dim());
    for _ in 0..m {
        flat.extend(prior.sample_log10(&mut r));
    }
    SampleSet::from_flat(flat, prior.dim())
}

/// Weight strategy that optimizes `L(w)` each generation.
#[derive(Debug, Clone)]
pub struct AdaptiveWeights {
    pub optimizer: OptimizerConfig,
    pub estimator: Estimator,
    /// Resample kept candidates by importance weight inside the objective.
    pub resample: bool,
    pub trace: Vec<TraceRow>,
    /// Objective of the chosen weights per generation.
    pub values: Vec<f64>,
}

impl AdaptiveWeights {
    pub fn new(optimizer: OptimizerConfig, estimator: Estimator) -> Self {
        Self { optimizer, estimator, resample: false, trace: Vec::new(), values: Vec::new() }
    }
}

impl WeightStrategy for AdaptiveWeights {
    fn weights(&mut self, input: &GenerationInput<'_>) -> Result<WeightVector> {
        let m = accepted_count(input.alpha_accept, input.pool.len())?;
        let xi = prior_reference(input.prior, m, input.seed, input.generation)?;
        let mut ctx = WeightObjectiveContext::from_pool(input.pool, xi, m, self.estimator)?;
        if let (true, Some(prev)) = (self.resample, input.population) {
            let ln_w = (0..input.pool.len())
                .into_par_iter()
                .map(|i| ln_importance_weight(input.pool.log10_thetas.row(i), prev, input.kernel, input.prior))
                .collect::<Result<Vec<f64>>>()?;
            ctx = ctx.with_resampling(ln_w)?;
        }
        let scaled = scaled_weights(&input.pool.summary_rows()).ok();
        let mut r = rng::stream(input.seed, Purpose::Optimizer, input.generation as u64, 0);
        let result = optimize_weights(&ctx, &self.optimizer, scaled.as_ref(), input.previous, &mut r)?;
        for (i, rr) in result.restarts.iter().enumerate() {
            self.trace.push(TraceRow {
                generation: input.generation,
                restart: i,
                start: rr.start,
                chosen: i == result.best_restart,
                weights: rr.weights.as_slice().to_vec(),
                value: rr.value,
            });
        }
        log::debug!(
            "generation {}: L(w*) = {:.6} from restart {}",
            input.generation,
            result.value,
            result.best_restart
        );
        self.values.push(result.value);
        Ok(result.weights)
    }
}

/// ABC-SMC with weights re-optimized every generation.
pub fn run_adaptive_smc(
    problem: &Problem,
    settings: &SmcSettings,
    optimizer: OptimizerConfig,
    estimator: Estimator,
    resample: bool,
) -> Result<(SmcRun, Vec<TraceRow>)> {
    let mut strategy = AdaptiveWeights::new(optimizer, estimator);
    strategy.resample = resample;
    let run = run_abc_smc(problem, settings, &mut strategy)?;
    Ok((run, strategy.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::SummaryVector;
    use rand::Rng;

    /// Summary 1 tracks θ exactly, summary 2 is pure noise.
    fn informative_ctx(seed: u64) -> WeightObjectiveContext {
        let mut r = rng::from_seed(seed);
        let n = 600;
        let thetas: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
        let summaries: Vec<Option<SummaryVector>> =
            thetas.iter().map(|t| Some(SummaryVector::new(vec![*t, r.random::<f64>() * 4.0 - 2.0]).unwrap())).collect();
        let prior: Vec<f64> = (0..30).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
        WeightObjectiveContext::new(
            SampleSet::from_values(&prior).unwrap(),
            SampleSet::from_values(&thetas).unwrap(),
            &summaries,
            SummaryVector::new(vec![0.5, 0.0]).unwrap(),
            30,
            Estimator::new(4),
        )
        .unwrap()
    }

    #[test]
    fn informative_summary_wins_on_grid() {
        let ctx = informative_ctx(1);
        let l_signal = objective_l(&WeightVector::new(vec![1.0, 0.0]).unwrap(), &ctx).unwrap();
        let l_noise = objective_l(&WeightVector::new(vec![0.0, 1.0]).unwrap(), &ctx).unwrap();
        assert!(l_signal > l_noise);

        // Grid oracle over the simplex at resolution 0.01.
        let grid: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let a = i as f64 / 100.0;
                (a, objective_l(&WeightVector::new(vec![a, 1.0 - a]).unwrap(), &ctx).unwrap())
            })
            .collect();
        let best = grid.iter().cloned().fold((0.0, f64::NEG_INFINITY), |b, g| if g.1 > b.1 { g } else { b });
        assert!(best.0 > 0.5, "grid argmax at w1 = {}", best.0);

        let opt = OptimizerConfig::default();
        let res = optimize_weights(&ctx, &opt, None, None, &mut rng::from_seed(2)).unwrap();
        assert!(res.weights.as_slice()[0] > res.weights.as_slice()[1]);
        assert!(res.value >= best.1 - 1e-12 || res.value >= l_signal);
    }

    #[test]
    fn optimizer_never_below_uniform() {
        let ctx = informative_ctx(3);
        let uniform = objective_l(&WeightVector::uniform(2).unwrap(), &ctx).unwrap();
        let res = optimize_weights(&ctx, &OptimizerConfig::default(), None, None, &mut rng::from_seed(4)).unwrap();
        assert!(res.value >= uniform);
        for r in &res.restarts {
            assert!(r.value >= r.start_value);
        }
    }

    #[test]
    fn single_summary_is_constant() {
        let mut r = rng::from_seed(5);
        let thetas: Vec<f64> = (0..100).map(|_| r.random::<f64>()).collect();
        let summaries: Vec<_> = thetas.iter().map(|t| Some(SummaryVector::new(vec![*t]).unwrap())).collect();
        let ctx = WeightObjectiveContext::new(
            SampleSet::from_values(&thetas[..20]).unwrap(),
            SampleSet::from_values(&thetas).unwrap(),
            &summaries,
            SummaryVector::new(vec![0.3]).unwrap(),
            20,
            Estimator::new(4),
        )
        .unwrap();
        let res = optimize_weights(&ctx, &OptimizerConfig::default(), None, None, &mut r).unwrap();
        assert_eq!(res.weights.as_slice(), &[1.0]);
        assert_eq!(res.value, objective_l(&WeightVector::uniform(1).unwrap(), &ctx).unwrap());
    }

    #[test]
    fn scale_invariance_of_objective() {
        let ctx = informative_ctx(6);
        let w = [0.3, 0.7];
        let a = ctx.evaluate_raw(&w).unwrap();
        let b = ctx.evaluate_raw(&[0.3 * 17.0, 0.7 * 17.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(ctx.selected_raw(&w), ctx.selected_raw(&[0.6, 1.4]));
    }

    #[test]
    fn objective_is_deterministic() {
        let ctx = informative_ctx(7);
        let w = WeightVector::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(objective_l(&w, &ctx).unwrap().to_bits(), objective_l(&w, &ctx).unwrap().to_bits());
    }

    #[test]
    fn zero_radius_scan_is_flat() {
        let ctx = informative_ctx(8);
        let w = WeightVector::new(vec![0.6, 0.4]).unwrap();
        let pts = scan_line(&w, &ctx, 0.0, 11, &mut rng::from_seed(9)).unwrap();
        let l = objective_l(&w, &ctx).unwrap();
        assert!(pts.iter().all(|p| p.value == Some(l)));
        let (frac, distinct) = plateau_stats(&pts);
        assert_eq!(frac, 1.0);
        assert_eq!(distinct, 1);
    }

    #[test]
    fn restarts_zero_returns_uniform() {
        let ctx = informative_ctx(10);
        let opt = OptimizerConfig { restarts: 0, ..OptimizerConfig::default() };
        let res = optimize_weights(&ctx, &opt, None, None, &mut rng::from_seed(1)).unwrap();
        assert_eq!(res.weights, WeightVector::uniform(2).unwrap());
    }
}
