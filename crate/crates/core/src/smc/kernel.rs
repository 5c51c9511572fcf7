//! Log-uniform priors and the Gaussian perturbation kernel, both working in
//! log₁₀ parameter coordinates.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Population;
use crate::{Error, Result};

/// Consecutive rejected proposals before giving up.
pub const MAX_PROPOSAL_ATTEMPTS: u64 = 1_000_000;

/// Independent priors, uniform in `log₁₀ θ_i` on `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    bounds: Vec<(f64, f64)>,
}

impl PriorSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("prior has no dimensions"));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::invalid(format!("prior interval {i} must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(Self { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn log10_bounds(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.bounds.iter().map(|&(lo, hi)| (lo.log10(), hi.log10()))
    }

    /// Whether `log₁₀ θ` lies in the support.
    pub fn contains_log10(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.log10_bounds().zip(x).all(|((lo, hi), v)| *v >= lo && *v <= hi)
    }

    /// Log density of `log₁₀ θ`; `-∞` outside the support.
    pub fn ln_density_log10(&self, x: &[f64]) -> f64 {
        if !self.contains_log10(x) {
            return f64::NEG_INFINITY;
        }
        -self.log10_bounds().map(|(lo, hi)| (hi - lo).ln()).sum::<f64>()
    }

    /// A draw in `log₁₀` coordinates.
    pub fn sample_log10<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.log10_bounds().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
    }
}

/// A prior draw in natural units.
pub fn sample_prior<R: Rng + ?Sized>(prior: &PriorSpec, rng: &mut R) -> Vec<f64> {
    let x = prior.sample_log10(rng);
    // Clamp guards against 10^log10(hi) rounding a hair past hi.
    x.iter().zip(prior.bounds()).map(|(v, &(lo, hi))| 10f64.powf(*v).clamp(lo, hi)).collect()
}

/// Independent Gaussian perturbations of `log₁₀ θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    sd: Vec<f64>,
}

impl KernelSpec {
    pub fn new(sd: Vec<f64>) -> Result<Self> {
        if sd.is_empty() || sd.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("kernel standard deviations must be positive and finite"));
        }
        Ok(Self { sd })
    }

    pub fn isotropic(dim: usize, sd: f64) -> Result<Self> {
        Self::new(vec![sd; dim])
    }

    pub fn sd(&self) -> &[f64] {
        &self.sd
    }

    /// `ln K(from, to)` in log₁₀ coordinates.
    pub fn ln_density(&self, from: &[f64], to: &[f64]) -> f64 {
        const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
        self.sd
            .iter()
            .zip(from.iter().zip(to))
            .map(|(s, (a, b))| {
                let z = (b - a) / s;
                -0.5 * z * z - s.ln() - LN_SQRT_2PI
            })
            .sum()
    }
}

/// One kernel step applied to `log₁₀ θ`. Callers retry while the result is
/// outside the prior.
pub fn perturb<R: Rng + ?Sized>(log10_theta: &[f64], kernel: &KernelSpec, rng: &mut R) -> Vec<f64> {
    log10_theta
        .iter()
        .zip(kernel.sd())
        .map(|(x, s)| {
            let n: f64 = StandardNormal.sample(rng);
            x + s * n
        })
        .collect()
}

/// Resample a particle from `prev` by weight and perturb it until the
/// proposal lands inside the prior. Returns `log₁₀ θ`.
pub fn propose<R: Rng + ?Sized>(
    prev: &Population,
    sampler: &rand::distr::weighted::WeightedIndex<f64>,
    kernel: &KernelSpec,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    for _ in 0..MAX_PROPOSAL_ATTEMPTS {
        let parent = &prev.particles()[sampler.sample(rng)];
        let x = perturb(&parent.log10_theta, kernel, rng);
        if prior.contains_log10(&x) {
            return Ok(x);
        }
    }
    Err(Error::ProposalExhausted(MAX_PROPOSAL_ATTEMPTS))
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln v(θ) = ln π(θ) - ln Σ_j v_j K(θ_j, θ)`, all in log₁₀ coordinates.
pub fn ln_importance_weight(
    log10_theta: &[f64],
    prev: &Population,
    kernel: &KernelSpec,
    prior: &PriorSpec,
) -> Result<f64> {
    let denom = log_sum_exp(prev.particles().iter().map(|p| p.v.ln() + kernel.ln_density(&p.log10_theta, log10_theta)));
    if denom == f64::NEG_INFINITY {
        return Err(Error::WeightUnderflow);
    }
    Ok(prior.ln_density_log10(log10_theta) - denom)
}

/// `v(θ) = π(θ) / Σ_j v_j K(θ_j, θ)` for a particle at `log₁₀ θ`.
pub fn importance_weight(
    log10_theta: &[f64],
    prev: &Population,
    kernel: &KernelSpec,
    prior: &PriorSpec,
) -> Result<f64> {
    Ok(ln_importance_weight(log10_theta, prev, kernel, prior)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;
    use crate::smc::Particle;
    use approx::assert_relative_eq;

    fn particle(log10: f64, v: f64) -> Particle {
        Particle {
            theta: vec![10f64.powf(log10)],
            log10_theta: vec![log10],
            v,
            ln_raw_weight: v.ln(),
            summary: None,
            distance: 0.0,
        }
    }

    #[test]
    fn prior_validation() {
        assert!(PriorSpec::new(vec![(10.0, 10.0)]).is_err());
        assert!(PriorSpec::new(vec![(0.0, 10.0)]).is_err());
        assert!(PriorSpec::new(vec![]).is_err());
    }

    #[test]
    fn prior_draws_stay_in_support() {
        let prior = PriorSpec::new(vec![(1.0, 100.0), (1e-4, 1e4)]).unwrap();
        let mut rng = from_seed(1);
        for _ in 0..10_000 {
            let t = sample_prior(&prior, &mut rng);
            assert!((1.0..=100.0).contains(&t[0]));
            assert!((1e-4..=1e4).contains(&t[1]));
        }
    }

    #[test]
    fn prior_log_mean() {
        let prior = PriorSpec::new(vec![(1.0, 100.0)]).unwrap();
        let mut rng = from_seed(2);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_prior(&prior, &mut rng)[0].log10()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn perturbation_spread() {
        let kernel = KernelSpec::isotropic(1, 0.25).unwrap();
        let mut rng = from_seed(3);
        let n = 100_000;
        let steps: Vec<f64> = (0..n).map(|_| perturb(&[0.0], &kernel, &mut rng)[0]).collect();
        let mean = steps.iter().sum::<f64>() / n as f64;
        let sd = (steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((sd - 0.25).abs() < 0.005, "{sd}");

        let tiny = KernelSpec::isotropic(1, 1e-300).unwrap();
        assert_eq!(perturb(&[0.7], &tiny, &mut rng), vec![0.7]);
    }

    #[test]
    fn single_parent_weight() {
        let prior = PriorSpec::new(vec![(1.0, 100.0)]).unwrap();
        let kernel = KernelSpec::isotropic(1, 0.25).unwrap();
        let prev = Population::new(1, vec![particle(1.0, 1.0)]);
        let x = [1.2];
        let expect = prior.ln_density_log10(&x).exp() / kernel.ln_density(&[1.0], &x).exp();
        assert_relative_eq!(importance_weight(&x, &prev, &kernel, &prior).unwrap(), expect, max_relative = 1e-12);

        // Two identical half-weight parents collapse to the same value.
        let twin = Population::new(1, vec![particle(1.0, 0.5), particle(1.0, 0.5)]);
        assert_relative_eq!(importance_weight(&x, &twin, &kernel, &prior).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn underflow_is_reported() {
        let prior = PriorSpec::new(vec![(1e-4, 1e4)]).unwrap();
        let kernel = KernelSpec::isotropic(1, 0.25).unwrap();
        let prev = Population::new(1, vec![particle(-3.0, 0.0)]);
        assert!(matches!(importance_weight(&[3.0], &prev, &kernel, &prior), Err(Error::WeightUnderflow)));
    }

    #[test]
    fn proposals_respect_support() {
        let prior = PriorSpec::new(vec![(1.0, 10.0)]).unwrap();
        let kernel = KernelSpec::isotropic(1, 2.0).unwrap();
        let prev = Population::new(1, vec![particle(0.99, 1.0)]);
        let sampler = rand::distr::weighted::WeightedIndex::new([1.0]).unwrap();
        let mut rng = from_seed(4);
        for _ in 0..1000 {
            let x = propose(&prev, &sampler, &kernel, &prior, &mut rng).unwrap();
            assert!(prior.contains_log10(&x));
        }
    }
}
