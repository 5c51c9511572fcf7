//! Comparison schemes: uniform and `1/σ` weights, semi-automatic regression
//! projection, and greedy approximate-sufficiency subset selection.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adapt::WeightObjectiveContext;
use crate::smc::SummaryTransform;
use crate::summaries::{SummaryVector, WeightVector};
use crate::{Error, Result};

/// Ridge added to the Gram diagonal when the regression design is rank deficient.
pub const RIDGE_LAMBDA: f64 = 1e-8;

/// Polynomial powers used per summary in the regression design.
pub const POWERS: usize = 4;

/// Equal weights on all `kappa` summaries.
pub fn uniform_weights(kappa: usize) -> Result<WeightVector> {
    WeightVector::uniform(kappa)
}

/// Sample standard deviation with the `n - 1` denominator.
fn sample_sd(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// `w_i ∝ 1/σ_i` over a pilot pool, with zero weight on constant columns.
pub fn scaled_weights(rows: &[&[f64]]) -> Result<WeightVector> {
    if rows.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, available: rows.len(), k: 1 });
    }
    let kappa = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != kappa) {
        return Err(Error::DimensionMismatch { expected: kappa, actual: r.len() });
    }
    let raw: Vec<f64> = (0..kappa)
        .map(|j| {
            let sd = sample_sd(rows.iter().map(move |r| r[j]));
            if sd > 0.0 {
                1.0 / sd
            } else {
                0.0
            }
        })
        .collect();
    if raw.iter().all(|w| *w == 0.0) {
        return Err(Error::invalid("every pilot summary column has zero variance"));
    }
    WeightVector::new(raw)
}

/// Linear regression of each log₁₀ parameter on `[1, s, s², s³, s⁴]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMatrix {
    /// Row per parameter: intercept, then the `s` block, `s²` block and so on.
    pub coefficients: Vec<Vec<f64>>,
    pub kappa: usize,
    /// Whether the ridge fallback was needed.
    pub ridge: bool,
}

fn features(s: &[f64]) -> impl Iterator<Item = f64> + '_ {
    (1..=POWERS as i32).flat_map(move |p| s.iter().map(move |v| v.powi(p)))
}

impl ProjectionMatrix {
    pub fn param_dim(&self) -> usize {
        self.coefficients.len()
    }

    /// Fitted parameter values for one summary vector.
    pub fn project(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.len() != self.kappa {
            return Err(Error::DimensionMismatch { expected: self.kappa, actual: s.len() });
        }
        let x: Vec<f64> = features(s).collect();
        Ok(self.coefficients.iter().map(|c| c[0] + c[1..].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()).collect())
    }
}

impl SummaryTransform for ProjectionMatrix {
    fn apply(&self, s: &SummaryVector) -> Result<SummaryVector> {
        SummaryVector::new(self.project(s.values())?)
    }

    fn output_len(&self) -> usize {
        self.param_dim()
    }
}

/// Least-squares fit of `pilot_thetas` (log₁₀, `M × p`) on polynomial
/// features of `pilot_summaries` (`M × κ`).
///
/// Features are standardized before solving; constant features get a zero
/// coefficient. Coefficients are returned on the raw scale.
pub fn semiauto_project(pilot_thetas: &[&[f64]], pilot_summaries: &[&[f64]]) -> Result<ProjectionMatrix> {
    let m = pilot_thetas.len();
    if m != pilot_summaries.len() {
        return Err(Error::DimensionMismatch { expected: m, actual: pilot_summaries.len() });
    }
    if m < 2 {
        return Err(Error::InsufficientSamples { needed: 2, available: m, k: 1 });
    }
    let p = pilot_thetas[0].len();
    let kappa = pilot_summaries[0].len();
    if pilot_thetas.iter().any(|t| t.len() != p) || pilot_summaries.iter().any(|s| s.len() != kappa) {
        return Err(Error::invalid("ragged pilot matrices"));
    }
    let q = POWERS * kappa;
    let raw = DMatrix::from_fn(m, q, |i, j| {
        let power = (j / kappa + 1) as i32;
        pilot_summaries[i][j % kappa].powi(power)
    });
    let means: Vec<f64> = (0..q).map(|j| raw.column(j).mean()).collect();
    let sds: Vec<f64> = (0..q)
        .map(|j| {
            let sd = sample_sd(raw.column(j).iter().copied());
            if sd.is_finite() && sd > 0.0 {
                sd
            } else {
                0.0
            }
        })
        .collect();
    let x = DMatrix::from_fn(m, q, |i, j| if sds[j] > 0.0 { (raw[(i, j)] - means[j]) / sds[j] } else { 0.0 });

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > smax * 1e-12 * m.max(q) as f64).count();
    let active = sds.iter().filter(|s| **s > 0.0).count();
    let ridge = m <= q + 1 || rank < active;

    let mut coefficients = Vec::with_capacity(p);
    for j in 0..p {
        let y = DVector::from_iterator(m, pilot_thetas.iter().map(|t| t[j]));
        let ymean = y.mean();
        let yc = y.add_scalar(-ymean);
        let beta = if ridge {
            let mut gram = x.transpose() * &x;
            for d in 0..q {
                gram[(d, d)] += RIDGE_LAMBDA;
            }
            let rhs = x.transpose() * &yc;
            gram.lu().solve(&rhs).ok_or_else(|| Error::invalid("ridge system is singular"))?
        } else {
            svd.solve(&yc, smax * 1e-12 * m.max(q) as f64)
                .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?
        };
        let mut row = vec![0.0; 1 + q];
        let mut intercept = ymean;
        for d in 0..q {
            if sds[d] > 0.0 {
                let b = beta[d] / sds[d];
                row[1 + d] = b;
                intercept -= b * means[d];
            }
        }
        row[0] = intercept;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("regression produced non-finite coefficients"));
        }
        coefficients.push(row);
    }
    Ok(ProjectionMatrix { coefficients, kappa, ridge })
}

/// Result of greedy subset selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetSelection {
    /// Kept summary indices (0-based), increasing.
    pub subset: Vec<usize>,
    /// Order in which the summaries were examined.
    pub order: Vec<usize>,
    /// Change in posterior measured when each summary was examined, in `order`.
    pub changes: Vec<f64>,
}

/// Greedy forward selection of summaries whose inclusion moves the
/// rejection posterior by more than `threshold`.
///
/// Summaries are examined in a random order. For each one the `M` closest
/// candidates are selected under uniform weights on the current subset with
/// and without it, and the change is the estimated Hellinger distance
/// between the two selections. Both come from one candidate pool and share
/// draws, which [`Estimator::alpha_divergence_with_twins`](crate::divergence::Estimator::alpha_divergence_with_twins) accounts for.
/// Against the empty subset the comparison is with the prior reference
/// sample. If nothing passes the threshold, the summary with the largest
/// change is kept.
pub fn subset_select<R: Rng + ?Sized>(
    ctx: &WeightObjectiveContext,
    threshold: f64,
    rng: &mut R,
) -> Result<SubsetSelection> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("subset threshold must lie in (0, 1), got {threshold}")));
    }
    let kappa = ctx.kappa();
    let mut order: Vec<usize> = (0..kappa).collect();
    order.shuffle(rng);

    let select = |subset: &[bool]| -> Vec<usize> {
        let w: Vec<f64> = subset.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
        ctx.selected_raw(&w)
    };
    let est = ctx.estimator();
    let change = |with: &[usize], without: Option<&[usize]>| -> Result<f64> {
        let x = ctx.candidate_thetas().select(with);
        let Some(without) = without else {
            return Ok(est.hellinger(ctx.prior_samples(), &x)?.value);
        };
        let y = ctx.candidate_thetas().select(without);
        let twins: Vec<Option<usize>> = with.iter().map(|i| without.binary_search(i).ok()).collect();
        let affinity = est.alpha_divergence_with_twins(&x, &y, 0.5, &twins)?.value;
        Ok((1.0 - affinity).clamp(0.0, 1.0))
    };

    let mut current = vec![false; kappa];
    let mut current_sel: Option<Vec<usize>> = None;
    let mut changes = Vec::with_capacity(kappa);
    for &i in &order {
        let mut trial = current.clone();
        trial[i] = true;
        let sel = select(&trial);
        let c = change(&sel, current_sel.as_deref())?;
        changes.push(c);
        if c > threshold {
            current = trial;
            current_sel = Some(sel);
        }
    }
    if !current.iter().any(|b| *b) {
        let best = changes.iter().enumerate().fold(0, |b, (j, c)| if *c > changes[b] { j } else { b });
        current[order[best]] = true;
    }
    Ok(SubsetSelection { subset: (0..kappa).filter(|i| current[*i]).collect(), order, changes })
}

/// Raw weights selecting `subset` uniformly.
pub fn subset_weights(kappa: usize, subset: &[usize]) -> Result<WeightVector> {
    let mut w = vec![0.0; kappa];
    for &i in subset {
        *w.get_mut(i).ok_or_else(|| Error::invalid(format!("subset index {i} out of range")))? = 1.0;
    }
    WeightVector::new(w)
}
