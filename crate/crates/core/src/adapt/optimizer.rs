//! Multi-start Nelder–Mead over the weight simplex.
//!
//! `L(w)` is piecewise constant, so there is no gradient to follow. Each
//! restart runs Nelder–Mead on `u = ln w` (weights are `exp(u)` normalized),
//! which lets the search move across orders of magnitude in relative
//! weight. Coordinates pushed below [`LN_ZERO`] become exact zeros.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::WeightObjectiveContext;
use crate::summaries::WeightVector;
use crate::{Error, Result};

/// Log-weights at or below this map to a weight of exactly zero.
pub const LN_ZERO: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Number of starting points. Zero skips the search and returns uniform weights.
    pub restarts: usize,
    pub max_evaluations: usize,
    /// Initial simplex edge in natural-log weight units.
    pub simplex_scale: f64,
    /// Minimum relative weight after normalization.
    pub weight_floor: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 6, max_evaluations: 300, simplex_scale: 2.0, weight_floor: 0.0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.simplex_scale > 0.0 && self.simplex_scale.is_finite()) {
            return Err(Error::validation("optimizer.simplex_scale", "must be positive"));
        }
        if !(self.weight_floor >= 0.0 && self.weight_floor < 1.0) {
            return Err(Error::validation("optimizer.weight_floor", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Where a restart began.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Uniform,
    Scaled,
    Previous,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub start: StartKind,
    pub weights: WeightVector,
    pub value: f64,
    /// Objective at the starting point.
    pub start_value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub weights: WeightVector,
    pub value: f64,
    /// Index into `restarts` of the winner.
    pub best_restart: usize,
    pub restarts: Vec<RestartResult>,
}

/// Starting points: uniform, then the optional hints, then Dirichlet(1) draws.
pub fn starting_points<R: Rng + ?Sized>(
    kappa: usize,
    restarts: usize,
    scaled: Option<&WeightVector>,
    previous: Option<&WeightVector>,
    rng: &mut R,
) -> Result<Vec<(StartKind, WeightVector)>> {
    let mut starts = vec![(StartKind::Uniform, WeightVector::uniform(kappa)?)];
    for (kind, hint) in [(StartKind::Scaled, scaled), (StartKind::Previous, previous)] {
        if let Some(w) = hint {
            if w.len() == kappa && !starts.iter().any(|(_, s)| s == w) {
                starts.push((kind, w.clone()));
            }
        }
    }
    starts.truncate(restarts.max(1));
    while starts.len() < restarts {
        let draw: Vec<f64> = (0..kappa).map(|_| Exp1.sample(rng)).collect();
        starts.push((StartKind::Random, WeightVector::new(draw)?));
    }
    Ok(starts)
}

fn to_log(w: &WeightVector) -> Vec<f64> {
    let max = w.as_slice().iter().copied().fold(0.0, f64::max);
    w.as_slice().iter().map(|&x| if x > 0.0 { (x / max).ln().max(LN_ZERO + 1.0) } else { LN_ZERO }).collect()
}

fn to_weights(u: &[f64], floor: f64) -> Vec<f64> {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = u.iter().map(|&x| if x <= LN_ZERO { 0.0 } else { (x - max).exp() }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w.fill(1.0);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    if floor > 0.0 {
        w.iter_mut().for_each(|x| *x = x.max(floor));
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}

struct Search<'a> {
    ctx: &'a WeightObjectiveContext,
    floor: f64,
    evaluations: usize,
    budget: usize,
    best_u: Vec<f64>,
    best: f64,
}

impl Search<'_> {
    /// Returns `-L` (minimized). Failed evaluations count as `+∞`.
    fn eval(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        let value = match self.ctx.evaluate_raw(&to_weights(u, self.floor)) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("weight objective failed: {e}");
                f64::NEG_INFINITY
            }
        };
        if value > self.best {
            self.best = value;
            self.best_u = u.to_vec();
        }
        -value
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

fn nelder_mead(search: &mut Search<'_>, start: &[f64], scale: f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = search.eval(start);
    simplex.push((start.to_vec(), f0));
    for i in 0..n {
        if search.exhausted() {
            return;
        }
        let mut v = start.to_vec();
        // Step away from the zero threshold so the vertex is a real move.
        v[i] = if v[i] <= LN_ZERO { -scale } else { v[i] + scale };
        let f = search.eval(&v);
        simplex.push((v, f));
    }

    while !search.exhausted() {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex
            .iter()
            .skip(1)
            .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (spread == 0.0 || !spread.is_finite()) && size < 1e-3 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let f_worst = simplex[n].1;
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let reflected = lerp(&centroid, &worst, -1.0);
        let f_r = search.eval(&reflected);
        if f_r < f_best {
            let expanded = lerp(&centroid, &worst, -2.0);
            let f_e = search.eval(&expanded);
            simplex[n] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
            continue;
        }
        if f_r < f_second {
            simplex[n] = (reflected, f_r);
            continue;
        }
        let (contracted, f_c) = if f_r < f_worst {
            let c = lerp(&centroid, &reflected, 0.5);
            let f = search.eval(&c);
            (c, f)
        } else {
            let c = lerp(&centroid, &worst, 0.5);
            let f = search.eval(&c);
            (c, f)
        };
        if f_c < f_worst.min(f_r) {
            simplex[n] = (contracted, f_c);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if search.exhausted() {
                return;
            }
            let v = lerp(&best, &vertex.0, 0.5);
            let f = search.eval(&v);
            *vertex = (v, f);
        }
    }
}

fn run_restart(
    ctx: &WeightObjectiveContext,
    opt: &OptimizerConfig,
    kind: StartKind,
    start: &WeightVector,
) -> Result<RestartResult> {
    let u0 = to_log(start);
    let start_value = ctx.evaluate_raw(start.as_slice())?;
    let mut search = Search {
        ctx,
        floor: opt.weight_floor,
        evaluations: 1,
        budget: opt.max_evaluations.max(1),
        best_u: u0.clone(),
        best: start_value,
    };
    if ctx.kappa() > 1 {
        nelder_mead(&mut search, &u0, opt.simplex_scale);
    }
    let (weights, value) = if search.best > start_value {
        (WeightVector::new(to_weights(&search.best_u, opt.weight_floor))?, search.best)
    } else {
        (start.clone(), start_value)
    };
    Ok(RestartResult { start: kind, weights, value, start_value, evaluations: search.evaluations })
}

/// Maximize `L(w)` from each starting point and keep the best result
/// (ties go to the earliest restart).
pub fn optimize_from(
    ctx: &WeightObjectiveContext,
    opt: &OptimizerConfig,
    starts: &[(StartKind, WeightVector)],
) -> Result<OptimizationResult> {
    if starts.is_empty() {
        return Err(Error::invalid("optimizer needs at least one starting point"));
    }
    if opt.restarts == 0 {
        let (kind, w) = &starts[0];
        let value = ctx.evaluate_raw(w.as_slice())?;
        return Ok(OptimizationResult {
            weights: w.clone(),
            value,
            best_restart: 0,
            restarts: vec![RestartResult {
                start: *kind,
                weights: w.clone(),
                value,
                start_value: value,
                evaluations: 1,
            }],
        });
    }
    let outcomes: Vec<Result<RestartResult>> =
        starts.par_iter().map(|(kind, w)| run_restart(ctx, opt, *kind, w)).collect();
    let mut restarts = Vec::with_capacity(outcomes.len());
    for (i, r) in outcomes.into_iter().enumerate() {
        match r {
            Ok(r) => restarts.push(r),
            Err(e) if i > 0 => log::warn!("optimizer restart {i} failed: {e}"),
            Err(e) => return Err(e),
        }
    }
    let mut best_restart = 0;
    for (i, r) in restarts.iter().enumerate() {
        if r.value > restarts[best_restart].value {
            best_restart = i;
        }
    }
    Ok(OptimizationResult {
        weights: restarts[best_restart].weights.clone(),
        value: restarts[best_restart].value,
        best_restart,
        restarts,
    })
}

/// Multi-start maximization of `L(w)` with uniform, 1/σ and Dirichlet starts.
pub fn optimize_weights<R: Rng + ?Sized>(
    ctx: &WeightObjectiveContext,
    opt: &OptimizerConfig,
    scaled: Option<&WeightVector>,
    previous: Option<&WeightVector>,
    rng: &mut R,
) -> Result<OptimizationResult> {
    opt.validate()?;
    let starts = starting_points(ctx.kappa(), opt.restarts, scaled, previous, rng)?;
    optimize_from(ctx, opt, &starts)
}
