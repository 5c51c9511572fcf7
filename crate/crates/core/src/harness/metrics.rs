//! Posterior quality metrics, all computed in log₁₀ parameter space.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::divergence::{Estimator, SampleSet};
use crate::smc::{Population, PriorSpec};
use crate::{Error, Result};

/// Summary of one posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub hellinger: f64,
    pub mean_bias: f64,
    pub mode_bias: f64,
    pub posterior_mean: Vec<f64>,
    pub posterior_mode: Vec<f64>,
    /// Central 90% interval per parameter.
    pub interval_90: Vec<[f64; 2]>,
}

fn check_population(pop: &Population) -> Result<()> {
    if pop.is_empty() {
        return Err(Error::invalid("empty population"));
    }
    Ok(())
}

/// Estimated Hellinger distance between the prior and `pop`, using `n_ref`
/// fresh prior draws and `n_ref` draws resampled from `pop` by weight.
pub fn metric_hellinger_prior_posterior<R: Rng + ?Sized>(
    pop: &Population,
    prior: &PriorSpec,
    n_ref: usize,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    check_population(pop)?;
    let dim = prior.dim();
    let mut flat = Vec::with_capacity(n_ref * dim);
    for _ in 0..n_ref {
        flat.extend(prior.sample_log10(rng));
    }
    let prior_set = SampleSet::from_flat(flat, dim)?;
    let sampler = WeightedIndex::new(pop.weights()).map_err(|e| Error::invalid(format!("population weights: {e}")))?;
    let mut flat = Vec::with_capacity(n_ref * dim);
    for _ in 0..n_ref {
        flat.extend_from_slice(&pop.particles()[sampler.sample(rng)].log10_theta);
    }
    let post = SampleSet::from_flat(flat, dim)?;
    Ok(Estimator::new(k).hellinger(&prior_set, &post)?.value)
}

fn log10_star(theta_star: &[f64]) -> Result<Vec<f64>> {
    theta_star
        .iter()
        .map(|t| {
            if *t > 0.0 && t.is_finite() {
                Ok(t.log10())
            } else {
                Err(Error::invalid(format!("true parameter {t} has no log10")))
            }
        })
        .collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Importance-weighted posterior mean.
pub fn posterior_mean(pop: &Population) -> Vec<f64> {
    let dim = pop.particles()[0].log10_theta.len();
    let mut mean = vec![0.0; dim];
    let mut total = 0.0;
    for p in pop.particles() {
        total += p.v;
        for (m, x) in mean.iter_mut().zip(&p.log10_theta) {
            *m += p.v * x;
        }
    }
    mean.iter().map(|m| m / total).collect()
}

/// Deterministic systematic resample of `pop` to its own size.
fn resample(pop: &Population) -> Vec<&[f64]> {
    let n = pop.len();
    let total: f64 = pop.weights().iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut j = 0;
    let particles = pop.particles();
    for s in 0..n {
        let u = (s as f64 + 0.5) / n as f64 * total;
        while j + 1 < n && cum + particles[j].v < u {
            cum += particles[j].v;
            j += 1;
        }
        out.push(particles[j].log10_theta.as_slice());
    }
    out
}

/// Highest Gaussian-kernel density point among the resampled particles,
/// with a Silverman bandwidth per coordinate.
pub fn posterior_mode(pop: &Population) -> Vec<f64> {
    let pts = resample(pop);
    let n = pts.len();
    let dim = pts[0].len();
    let factor = (4.0 / ((dim as f64 + 2.0) * n as f64)).powf(1.0 / (dim as f64 + 4.0));
    let bw: Vec<f64> = (0..dim)
        .map(|j| {
            let mean = pts.iter().map(|p| p[j]).sum::<f64>() / n as f64;
            let var = pts.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
            let h = var.sqrt() * factor;
            if h > 0.0 {
                h
            } else {
                1.0
            }
        })
        .collect();
    let mut best = 0;
    let mut best_density = f64::NEG_INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let density: f64 = pts
            .iter()
            .map(|q| {
                let z: f64 = p.iter().zip(*q).zip(&bw).map(|((a, b), h)| ((a - b) / h).powi(2)).sum();
                (-0.5 * z).exp()
            })
            .sum();
        if density > best_density {
            best_density = density;
            best = i;
        }
    }
    pts[best].to_vec()
}

/// Distances from `log10 θ*` to the posterior mean and to the posterior mode.
pub fn metric_bias(pop: &Population, theta_star: &[f64]) -> Result<(f64, f64)> {
    check_population(pop)?;
    let star = log10_star(theta_star)?;
    Ok((euclid(&posterior_mean(pop), &star), euclid(&posterior_mode(pop), &star)))
}

/// Weighted quantile of one coordinate.
pub fn weighted_quantile(pop: &Population, coord: usize, q: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = pop.particles().iter().map(|p| (p.log10_theta[coord], p.v)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    for (x, w) in &pts {
        cum += w;
        if cum >= q * total {
            return *x;
        }
    }
    pts.last().map_or(f64::NAN, |p| p.0)
}

/// Central 90% interval of every parameter.
pub fn interval_90(pop: &Population) -> Vec<[f64; 2]> {
    let dim = pop.particles()[0].log10_theta.len();
    (0..dim).map(|j| [weighted_quantile(pop, j, 0.05), weighted_quantile(pop, j, 0.95)]).collect()
}

pub fn compute_metrics<R: Rng + ?Sized>(
    pop: &Population,
    prior: &PriorSpec,
    theta_star: &[f64],
    n_ref: usize,
    k: usize,
    rng: &mut R,
) -> Result<Metrics> {
    let hellinger = metric_hellinger_prior_posterior(pop, prior, n_ref, k, rng)?;
    let star = log10_star(theta_star)?;
    let mean = posterior_mean(pop);
    let mode = posterior_mode(pop);
    Ok(Metrics {
        hellinger,
        mean_bias: euclid(&mean, &star),
        mode_bias: euclid(&mode, &star),
        posterior_mean: mean,
        posterior_mode: mode,
        interval_90: interval_90(pop),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::smc::Particle;

    fn particle(log10: Vec<f64>, v: f64) -> Particle {
        Particle {
            theta: log10.iter().map(|x| 10f64.powf(*x)).collect(),
            log10_theta: log10,
            v,
            ln_raw_weight: 0.0,
            summary: None,
            distance: 0.0,
        }
    }

    #[test]
    fn point_mass_has_no_bias() {
        let pop = Population::new(1, (0..16).map(|_| particle(vec![1.0, -2.0], 0.0625)).collect());
        assert_eq!(metric_bias(&pop, &[10.0, 0.01]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn symmetric_pair_has_zero_mean_bias() {
        let pop = Population::new(1, vec![particle(vec![0.0], 0.5), particle(vec![2.0], 0.5)]);
        let (mean, _) = metric_bias(&pop, &[10.0]).unwrap();
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn row_order_does_not_matter() {
        let mut r = rng::from_seed(1);
        let ps: Vec<Particle> =
            (0..50).map(|_| particle(vec![r.random::<f64>(), r.random::<f64>()], r.random::<f64>() + 0.1)).collect();
        let total: f64 = ps.iter().map(|p| p.v).sum();
        let ps: Vec<Particle> = ps
            .into_iter()
            .map(|mut p| {
                p.v /= total;
                p
            })
            .collect();
        let mut rev = ps.clone();
        rev.reverse();
        let a = Population::new(1, ps);
        let b = Population::new(1, rev);
        let (ma, _) = metric_bias(&a, &[1.0, 1.0]).unwrap();
        let (mb, _) = metric_bias(&b, &[1.0, 1.0]).unwrap();
        assert!((ma - mb).abs() < 1e-12);
        assert_eq!(interval_90(&a), interval_90(&b));
    }

    #[test]
    fn prior_as_posterior_scores_near_zero() {
        let prior = PriorSpec::new(vec![(1e-2, 1e2)]).unwrap();
        for seed in 0..5 {
            let mut r = rng::from_seed(seed);
            let n = 1000;
            let ps: Vec<Particle> = (0..n).map(|_| particle(prior.sample_log10(&mut r), 1.0 / n as f64)).collect();
            let pop = Population::new(1, ps);
            let h = metric_hellinger_prior_posterior(&pop, &prior, 1000, 4, &mut r).unwrap();
            assert!(h <= 0.1, "seed {seed}: {h}");
        }
    }

    /// For a prior of width `W` and a tight cluster, `ρ ≈ kW/2n` and `ν ≈ |x - c|`,
    /// so `D̂ ≈ B √(kW/2n) E|x - c|^{-1/2}`: about 0.117 at `n = 1000`, `k = 4`,
    /// prior `[-4, 4]`, cluster at 0.5, and about 0.053 at `n = 5000`.
    #[test]
    fn concentrated_posterior_scores_near_one() {
        let prior = PriorSpec::new(vec![(1e-4, 1e4)]).unwrap();
        let b = crate::divergence::b_constant(4, 0.5).unwrap();
        let e_inv_sqrt = (4.5f64.sqrt() + 3.5f64.sqrt()) / 4.0;
        for (n_ref, seed) in [(1000, 7), (5000, 8)] {
            let mut r = rng::from_seed(seed);
            let ps: Vec<Particle> =
                (0..200).map(|_| particle(vec![0.5 + 1e-3 * r.random::<f64>()], 1.0 / 200.0)).collect();
            let pop = Population::new(1, ps);
            let h = metric_hellinger_prior_posterior(&pop, &prior, n_ref, 4, &mut r).unwrap();
            let oracle = 1.0 - b * (4.0 * 8.0 / (2.0 * n_ref as f64)).sqrt() * e_inv_sqrt;
            assert!((h - oracle).abs() < 0.03, "n_ref {n_ref}: {h} vs {oracle}");
        }
        let mut r = rng::from_seed(9);
        let pop = Population::new(1, (0..200).map(|_| particle(vec![0.5], 1.0 / 200.0)).collect());
        assert!(metric_hellinger_prior_posterior(&pop, &prior, 5000, 4, &mut r).unwrap() >= 0.9);
    }

    #[test]
    fn interval_brackets_mass() {
        let ps: Vec<Particle> = (0..32).map(|i| particle(vec![i as f64], 1.0 / 32.0)).collect();
        let pop = Population::new(1, ps);
        let [lo, hi] = interval_90(&pop)[0];
        assert_eq!(lo, 1.0);
        assert_eq!(hi, 30.0);
    }
}
