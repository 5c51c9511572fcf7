use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::objective::WeightObjectiveContext;
use crate::summaries::WeightVector;
use crate::Result;

/// Step size multiplying `r` along the scan direction.
pub const SCAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub r: f64,
    /// `None` where the line leaves the nonnegative orthant.
    pub value: Option<f64>,
}

/// `L` along `w* + 10⁻⁴ · r · η` for `n_points` values of `r` evenly spaced
/// on `[-radius, radius]`, with `η ~ N(0, I)`.
pub fn scan_line<R: Rng + ?Sized>(
    w_star: &WeightVector,
    ctx: &WeightObjectiveContext,
    radius: f64,
    n_points: usize,
    rng: &mut R,
) -> Result<Vec<ScanPoint>> {
    let eta: Vec<f64> = (0..w_star.len()).map(|_| StandardNormal.sample(rng)).collect();
    let mut out = Vec::with_capacity(n_points);
    for j in 0..n_points {
        let r = if n_points == 1 { 0.0 } else { radius * (2.0 * j as f64 / (n_points - 1) as f64 - 1.0) };
        let w: Vec<f64> = w_star.as_slice().iter().zip(&eta).map(|(w, e)| w + SCAN_STEP * r * e).collect();
        let value =
            if w.iter().any(|x| *x < 0.0) || w.iter().all(|x| *x == 0.0) { None } else { Some(ctx.evaluate_raw(&w)?) };
        out.push(ScanPoint { r, value });
    }
    Ok(out)
}

/// Fraction of consecutive evaluated pairs with bitwise-equal values, and
/// the number of distinct values seen.
pub fn plateau_stats(points: &[ScanPoint]) -> (f64, usize) {
    let vals: Vec<f64> = points.iter().filter_map(|p| p.value).collect();
    let pairs = vals.len().saturating_sub(1);
    let equal = vals.windows(2).filter(|w| w[0].to_bits() == w[1].to_bits()).count();
    let mut distinct: Vec<u64> = vals.iter().map(|v| v.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let frac = if pairs == 0 { 1.0 } else { equal as f64 / pairs as f64 };
    (frac, distinct.len())
}
