use crate::divergence::{Estimator, SampleSet};
use crate::smc::{select_m_closest, CandidatePool};
use crate::summaries::{SummaryVector, WeightVector};
use crate::{Error, Result};

/// Everything the weight objective depends on, fixed for one generation's
/// search so that `L(w)` is a deterministic function of `w`.
#[derive(Debug, Clone)]
pub struct WeightObjectiveContext {
    prior_samples: SampleSet,
    /// Within-prior kth-neighbour distances, fixed for the whole search.
    prior_rho: Vec<f64>,
    candidate_thetas: SampleSet,
    /// Squared residuals `(s_ij - s_obs,j)²`, row-major `N × κ`.
    residuals: Vec<f64>,
    failed: Vec<bool>,
    observed: SummaryVector,
    accepted: usize,
    estimator: Estimator,
    /// Per-candidate log importance weights. When present the selected
    /// particles are resampled by weight before estimation.
    resample_weights: Option<Vec<f64>>,
}

impl WeightObjectiveContext {
    pub fn new(
        prior_samples: SampleSet,
        candidate_thetas: SampleSet,
        candidate_summaries: &[Option<SummaryVector>],
        observed: SummaryVector,
        accepted: usize,
        estimator: Estimator,
    ) -> Result<Self> {
        let n = candidate_thetas.len();
        if candidate_summaries.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: candidate_summaries.len() });
        }
        if prior_samples.dim() != candidate_thetas.dim() {
            return Err(Error::DimensionMismatch { expected: candidate_thetas.dim(), actual: prior_samples.dim() });
        }
        if accepted == 0 || accepted > n {
            return Err(Error::invalid(format!("cannot keep {accepted} of {n} candidates")));
        }
        let kappa = observed.len();
        let mut residuals = Vec::with_capacity(n * kappa);
        let mut failed = Vec::with_capacity(n);
        for s in candidate_summaries {
            match s {
                Some(s) => {
                    if s.len() != kappa {
                        return Err(Error::DimensionMismatch { expected: kappa, actual: s.len() });
                    }
                    residuals.extend(s.values().iter().zip(observed.values()).map(|(a, b)| (a - b) * (a - b)));
                    failed.push(false);
                }
                None => {
                    residuals.extend(std::iter::repeat_n(0.0, kappa));
                    failed.push(true);
                }
            }
        }
        let prior_rho = estimator.within_distances(&prior_samples)?;
        Ok(Self {
            prior_samples,
            prior_rho,
            candidate_thetas,
            residuals,
            failed,
            observed,
            accepted,
            estimator,
            resample_weights: None,
        })
    }

    /// Context over a simulated pool, keeping `accepted` candidates.
    pub fn from_pool(
        pool: &CandidatePool,
        prior_samples: SampleSet,
        accepted: usize,
        estimator: Estimator,
    ) -> Result<Self> {
        Self::new(prior_samples, pool.log10_thetas.clone(), &pool.summaries, pool.observed.clone(), accepted, estimator)
    }

    pub fn with_resampling(mut self, ln_weights: Vec<f64>) -> Result<Self> {
        if ln_weights.len() != self.candidate_count() {
            return Err(Error::DimensionMismatch { expected: self.candidate_count(), actual: ln_weights.len() });
        }
        self.resample_weights = Some(ln_weights);
        Ok(self)
    }

    pub fn kappa(&self) -> usize {
        self.observed.len()
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_thetas.len()
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    pub fn prior_samples(&self) -> &SampleSet {
        &self.prior_samples
    }

    pub fn candidate_thetas(&self) -> &SampleSet {
        &self.candidate_thetas
    }

    pub fn observed(&self) -> &SummaryVector {
        &self.observed
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    /// Weighted distance of every candidate under raw (unnormalized) weights.
    pub fn distances_raw(&self, w: &[f64]) -> Vec<f64> {
        let kappa = self.kappa();
        self.residuals
            .chunks_exact(kappa)
            .zip(&self.failed)
            .map(|(r, &failed)| if failed { f64::INFINITY } else { r.iter().zip(w).map(|(r, w)| r * w).sum() })
            .collect()
    }

    /// Candidates kept under weights `w`, in increasing index order.
    pub fn selected(&self, w: &WeightVector) -> Vec<usize> {
        self.selected_raw(w.as_slice())
    }

    pub(crate) fn selected_raw(&self, w: &[f64]) -> Vec<usize> {
        select_m_closest(&self.distances_raw(w), self.accepted)
    }

    fn posterior_sample(&self, selected: &[usize]) -> SampleSet {
        match &self.resample_weights {
            None => self.candidate_thetas.select(selected),
            Some(lw) => {
                let picks = systematic_resample(selected, lw, self.accepted);
                self.candidate_thetas.select(&picks)
            }
        }
    }

    pub(crate) fn evaluate_raw(&self, w: &[f64]) -> Result<f64> {
        let selected = self.selected_raw(w);
        let posterior = self.posterior_sample(&selected);
        self.estimator.hellinger_raw_cached(&self.prior_samples, &self.prior_rho, &posterior)
    }
}

/// Deterministic systematic resampling (offset ½) of `selected` by weight.
fn systematic_resample(selected: &[usize], ln_weights: &[f64], count: usize) -> Vec<usize> {
    let max = selected.iter().map(|&i| ln_weights[i]).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = selected.iter().map(|&i| (ln_weights[i] - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut out = Vec::with_capacity(count);
    let mut cum = 0.0;
    let mut j = 0;
    for s in 0..count {
        let u = (s as f64 + 0.5) / count as f64 * total;
        while j + 1 < w.len() && cum + w[j] < u {
            cum += w[j];
            j += 1;
        }
        out.push(selected[j]);
    }
    out
}

/// `L(w) = 1 - D̂_{1/2}(prior ‖ kept candidates)`, unclamped.
pub fn objective_l(w: &WeightVector, ctx: &WeightObjectiveContext) -> Result<f64> {
    if w.len() != ctx.kappa() {
        return Err(Error::DimensionMismatch { expected: ctx.kappa(), actual: w.len() });
    }
    ctx.evaluate_raw(w.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systematic_resampling_follows_weights() {
        let lw = [0.0, (3.0f64).ln(), f64::NEG_INFINITY, 0.0];
        let picks = systematic_resample(&[0, 1, 3], &lw, 5);
        assert_eq!(picks.len(), 5);
        assert_eq!(picks.iter().filter(|&&i| i == 1).count(), 3);
        assert!(!picks.contains(&2));
    }
}
