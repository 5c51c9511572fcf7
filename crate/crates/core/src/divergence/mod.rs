//! k-nearest-neighbour estimators of α-divergences between two samples.
//!
//! For samples `X` from `p` and `Y` from `q` the estimator of
//! `D_α(p‖q) = ∫ p^α q^(1-α)` is
//!
//! ```text
//! D̂_α = B_{k,α} / n_x · Σ_i ((n_x - 1) ρ_k(i)^e / (n_y ν_k(i)^e))^(1-α)
//! ```
//!
//! where `ρ_k(i)` is the distance from `X_i` to its kth nearest neighbour in
//! `X` (excluding itself), `ν_k(i)` the distance to its kth nearest
//! neighbour in `Y`, and `e` is either the dimension `d` or 1. The
//! Hellinger distance used throughout the crate is `1 - D_{1/2}`.
//!
//! The estimator is asymmetric. Callers put the reference distribution
//! (the prior) first.

mod kdtree;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

pub use kdtree::KdTree;

use crate::{Error, Result};

/// Floor applied to cross-sample neighbour distances so coincident points
/// keep every term finite.
pub const NU_FLOOR: f64 = 1e-12;

/// Estimates with `n_x * n_y` above this evaluate points in parallel.
const PARALLEL_WORK: usize = 1 << 20;

/// An `n × d` matrix of finite points, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl SampleSet {
    pub fn from_flat(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("sample dimension must be at least 1"));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::invalid(format!("{} values do not fill rows of width {d}", data.len())));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample contains non-finite value {bad}")));
        }
        let n = data.len() / d;
        Ok(Self { data, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, d)
    }

    /// One-dimensional sample.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// New set made of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { data, n: indices.len(), d: self.d }
    }
}

/// Squared Euclidean distance. Every neighbour search goes through this so
/// that brute force and the tree agree to the last bit.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// How kth-neighbour distances are found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighbourSearch {
    /// Exhaustive O(n²d) scan.
    #[serde(rename = "brute")]
    BruteForce,
    /// k-d tree over the searched set.
    KdTree,
    /// Brute force for small inputs, the tree otherwise.
    #[default]
    Auto,
}

impl NeighbourSearch {
    fn use_tree(self, n_query: usize, n_target: usize) -> bool {
        match self {
            NeighbourSearch::BruteForce => false,
            NeighbourSearch::KdTree => true,
            NeighbourSearch::Auto => n_target >= 64 && n_query * n_target >= 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub alpha: f64,
    pub k: usize,
    pub n_x: usize,
    pub n_y: usize,
    /// Set when a Hellinger estimate was pulled back into `[0, 1]`.
    pub clamped: bool,
}

/// `B_{k,α} = Γ(k)² / (Γ(k-α+1) Γ(k+α-1))`, evaluated through log-gamma.
pub fn b_constant(k: usize, alpha: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!("neighbour order k must be >= 2, got {k}")));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    let kf = k as f64;
    let lo = kf - alpha + 1.0;
    let hi = kf + alpha - 1.0;
    for arg in [lo, hi] {
        if arg <= 0.0 {
            return Err(Error::GammaDomain(arg));
        }
    }
    let lg = ln_gamma(kf);
    Ok((2.0 * lg - ln_gamma(lo) - ln_gamma(hi)).exp())
}

/// Distance from `query` to its kth nearest neighbour in `set`.
///
/// With `exclude` set, the row at that index is skipped (by index, not by
/// value, so duplicates of the query still count).
fn kth_sq_brute(set: &SampleSet, query: &[f64], k: usize, exclude: Option<usize>) -> f64 {
    // Ascending buffer of the k smallest distances seen so far.
    let mut best = vec![f64::INFINITY; k];
    for j in 0..set.len() {
        if Some(j) == exclude {
            continue;
        }
        let d = sq_dist(query, set.row(j));
        if d < best[k - 1] {
            let mut pos = k - 1;
            while pos > 0 && best[pos - 1] > d {
                best[pos] = best[pos - 1];
                pos -= 1;
            }
            best[pos] = d;
        }
    }
    best[k - 1]
}

/// Euclidean distance from row `query_index` of `set` to its kth nearest
/// neighbour within `set`.
pub fn knn_distance(set: &SampleSet, query_index: usize, k: usize, exclude_self: bool) -> Result<f64> {
    if query_index >= set.len() {
        return Err(Error::invalid(format!("query index {query_index} out of range for {} points", set.len())));
    }
    let eligible = set.len() - usize::from(exclude_self);
    if k == 0 || eligible < k {
        return Err(Error::InsufficientSamples { needed: k + usize::from(exclude_self), available: set.len(), k });
    }
    let exclude = exclude_self.then_some(query_index);
    Ok(kth_sq_brute(set, set.row(query_index), k, exclude).sqrt())
}

/// kth-neighbour distance from an arbitrary point into `set`.
pub fn knn_distance_to(set: &SampleSet, query: &[f64], k: usize) -> Result<f64> {
    if query.len() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), actual: query.len() });
    }
    if k == 0 || set.len() < k {
        return Err(Error::InsufficientSamples { needed: k, available: set.len(), k });
    }
    Ok(kth_sq_brute(set, query, k, None).sqrt())
}

/// Reusable estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimator {
    pub k: usize,
    /// Raise neighbour distances to the sample dimension.
    pub exponent_dim: bool,
    pub search: NeighbourSearch,
}

impl Default for Estimator {
    fn default() -> Self {
        Self { k: 4, exponent_dim: true, search: NeighbourSearch::Auto }
    }
}

impl Estimator {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    /// `(ρ_k(i), ν_k(i))` for every point of `x`.
    pub fn neighbour_distances(&self, x: &SampleSet, y: &SampleSet) -> Result<Vec<(f64, f64)>> {
        self.neighbours(x, y, None)
    }

    fn neighbours(&self, x: &SampleSet, y: &SampleSet, twins: Option<&[Option<usize>]>) -> Result<Vec<(f64, f64)>> {
        let rho = self.within_distances(x)?;
        self.pair_with(x, &rho, y, twins)
    }

    /// `ρ_k(i)` for every point of `x`, for reuse against several `y`.
    pub fn within_distances(&self, x: &SampleSet) -> Result<Vec<f64>> {
        self.check(x, x)?;
        let k = self.k;
        let tree = self.search.use_tree(x.len(), x.len()).then(|| KdTree::new(x));
        let one = |i: usize| {
            let q = x.row(i);
            let d = match &tree {
                Some(t) => t.kth_sq_distance(q, k, Some(i)),
                None => kth_sq_brute(x, q, k, Some(i)),
            };
            d.sqrt()
        };
        Ok(if x.len() * x.len() >= PARALLEL_WORK {
            (0..x.len()).into_par_iter().map(one).collect()
        } else {
            (0..x.len()).map(one).collect()
        })
    }

    fn pair_with(
        &self,
        x: &SampleSet,
        rho: &[f64],
        y: &SampleSet,
        twins: Option<&[Option<usize>]>,
    ) -> Result<Vec<(f64, f64)>> {
        self.check(x, y)?;
        if rho.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), actual: rho.len() });
        }
        if let Some(t) = twins {
            if t.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: x.len(), actual: t.len() });
            }
        }
        let k = self.k;
        let tree = self.search.use_tree(x.len(), y.len()).then(|| KdTree::new(y));
        let one = |i: usize| {
            let q = x.row(i);
            let skip = twins.and_then(|t| t[i]);
            let nu = match &tree {
                Some(t) => t.kth_sq_distance(q, k, skip),
                None => kth_sq_brute(y, q, k, skip),
            };
            (rho[i], nu.sqrt())
        };
        Ok(if x.len() * y.len() >= PARALLEL_WORK {
            (0..x.len()).into_par_iter().map(one).collect()
        } else {
            (0..x.len()).map(one).collect()
        })
    }

    fn check(&self, x: &SampleSet, y: &SampleSet) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(format!("neighbour order k must be >= 2, got {}", self.k)));
        }
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), actual: y.dim() });
        }
        if x.len() < self.k + 1 {
            return Err(Error::InsufficientSamples { needed: self.k + 1, available: x.len(), k: self.k });
        }
        if y.len() < self.k {
            return Err(Error::InsufficientSamples { needed: self.k, available: y.len(), k: self.k });
        }
        Ok(())
    }

    pub fn alpha_divergence(&self, x: &SampleSet, y: &SampleSet, alpha: f64) -> Result<DivergenceEstimate> {
        let pairs = self.neighbours(x, y, None)?;
        self.combine(x, y, alpha, &pairs)
    }

    /// As [`alpha_divergence`](Self::alpha_divergence) for samples that share
    /// draws. `twins[i] = Some(j)` marks `x[i]` and `y[j]` as the same draw:
    /// `ν_k(i)` then skips `y[j]`, and the term for `x[i]` is the plain ratio
    /// `((n_x-1) ρ^e / ((n_y-1) ν^e))^{1-α}` without `B_{k,α}`, since its two
    /// distances come from nearly the same neighbourhood rather than from
    /// independent samples. Identical samples give exactly 1.
    pub fn alpha_divergence_with_twins(
        &self,
        x: &SampleSet,
        y: &SampleSet,
        alpha: f64,
        twins: &[Option<usize>],
    ) -> Result<DivergenceEstimate> {
        let pairs = self.neighbours(x, y, Some(twins))?;
        let b = b_constant(self.k, alpha)?;
        let e = if self.exponent_dim { x.dim() as i32 } else { 1 };
        let n_x = (x.len() - 1) as f64;
        let power = 1.0 - alpha;
        let total: f64 = pairs
            .iter()
            .zip(twins)
            .map(|(&(rho, nu), twin)| {
                let ratio = (rho / nu.max(NU_FLOOR)).powi(e);
                match twin {
                    Some(_) if y.len() > 1 => (n_x / (y.len() - 1) as f64 * ratio).powf(power),
                    _ => b * (n_x / y.len() as f64 * ratio).powf(power),
                }
            })
            .sum();
        Ok(DivergenceEstimate {
            value: total / x.len() as f64,
            alpha,
            k: self.k,
            n_x: x.len(),
            n_y: y.len(),
            clamped: false,
        })
    }

    fn combine(&self, x: &SampleSet, y: &SampleSet, alpha: f64, pairs: &[(f64, f64)]) -> Result<DivergenceEstimate> {
        let b = b_constant(self.k, alpha)?;
        let e = if self.exponent_dim { x.dim() as i32 } else { 1 };
        let scale = (x.len() - 1) as f64 / y.len() as f64;
        let power = 1.0 - alpha;
        // Serial sum in row order keeps the result independent of threading.
        let total: f64 = pairs.iter().map(|&(rho, nu)| (scale * (rho / nu.max(NU_FLOOR)).powi(e)).powf(power)).sum();
        Ok(DivergenceEstimate {
            value: total / x.len() as f64 * b,
            alpha,
            k: self.k,
            n_x: x.len(),
            n_y: y.len(),
            clamped: false,
        })
    }

    /// `1 - D̂_{1/2}` without clamping. This is the weight objective.
    pub fn hellinger_raw(&self, x: &SampleSet, y: &SampleSet) -> Result<f64> {
        Ok(1.0 - self.alpha_divergence(x, y, 0.5)?.value)
    }

    /// [`hellinger_raw`](Self::hellinger_raw) with `ρ` precomputed by
    /// [`within_distances`](Self::within_distances).
    pub fn hellinger_raw_cached(&self, x: &SampleSet, rho: &[f64], y: &SampleSet) -> Result<f64> {
        let pairs = self.pair_with(x, rho, y, None)?;
        Ok(1.0 - self.combine(x, y, 0.5, &pairs)?.value)
    }

    pub fn hellinger(&self, x: &SampleSet, y: &SampleSet) -> Result<DivergenceEstimate> {
        let affinity = self.alpha_divergence(x, y, 0.5)?;
        let raw = 1.0 - affinity.value;
        let value = raw.clamp(0.0, 1.0);
        Ok(DivergenceEstimate { value, clamped: value != raw, ..affinity })
    }
}

/// kNN estimate of `D_α(X‖Y)`.
pub fn estimate_alpha_divergence(
    x: &SampleSet,
    y: &SampleSet,
    k: usize,
    alpha: f64,
    exponent_dim: bool,
) -> Result<DivergenceEstimate> {
    Estimator { k, exponent_dim, search: NeighbourSearch::Auto }.alpha_divergence(x, y, alpha)
}

/// Hellinger distance `1 - D̂_{1/2}(X‖Y)`, clamped to `[0, 1]`.
pub fn estimate_hellinger(x: &SampleSet, y: &SampleSet, k: usize) -> Result<DivergenceEstimate> {
    Estimator::new(k).hellinger(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::from_values(v).unwrap()
    }

    #[test]
    fn shared_draws_with_themselves_give_unit_affinity() {
        let x = set(&[0.3, 1.7, 2.2, 4.0, 5.5, 7.1, 9.0]);
        let own: Vec<_> = (0..x.len()).map(Some).collect();
        let d = Estimator::new(2).alpha_divergence_with_twins(&x, &x, 0.5, &own).unwrap();
        assert_eq!(d.value, 1.0);
    }

    #[test]
    fn no_twins_matches_plain_estimate() {
        let x = set(&[0.0, 1.0, 2.0, 3.5]);
        let y = set(&[0.5, 4.0, 6.0, 7.0, 9.0]);
        let est = Estimator::new(2);
        let plain = est.alpha_divergence(&x, &y, 0.5).unwrap().value;
        let twins = est.alpha_divergence_with_twins(&x, &y, 0.5, &[None; 4]).unwrap().value;
        assert_eq!(plain, twins);
    }

    #[test]
    fn b_constant_values() {
        assert_abs_diff_eq!(b_constant(2, 0.5).unwrap(), 8.0 / (3.0 * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(b_constant(3, 0.5).unwrap(), 4.0 / (1.40625 * PI), epsilon = 1e-12);
        assert_eq!(b_constant(5, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn b_constant_domain_errors() {
        assert!(b_constant(1, 0.5).is_err());
        assert!(matches!(b_constant(2, 4.0), Err(Error::GammaDomain(_))));
        assert!(matches!(b_constant(2, -2.0), Err(Error::GammaDomain(_))));
    }

    #[test]
    fn knn_distance_fixtures() {
        let x = set(&[0.0, 1.0, 3.0]);
        assert_eq!(knn_distance(&x, 0, 2, true).unwrap(), 3.0);
        assert_eq!(knn_distance(&x, 1, 1, true).unwrap(), 1.0);
        let y = set(&[0.0, 1.0, 2.0]);
        assert_eq!(knn_distance_to(&y, &[0.0], 2).unwrap(), 1.0);
        assert!(knn_distance(&x, 0, 3, true).is_err());
        assert_eq!(knn_distance(&x, 0, 3, false).unwrap(), 3.0);
    }

    #[test]
    fn duplicates_count_as_neighbours() {
        let x = set(&[2.0, 2.0, 5.0]);
        assert_eq!(knn_distance(&x, 0, 1, true).unwrap(), 0.0);
    }

    // Hand evaluation of the estimator on three-point sets.
    #[test]
    fn estimator_fixtures() {
        let x = set(&[0.0, 1.0, 2.0]);
        let b = 8.0 / (3.0 * PI);
        let same = ((4.0f64 / 3.0).sqrt() * 2.0 + (2.0f64 / 3.0).sqrt()) / 3.0 * b;
        let got = estimate_alpha_divergence(&x, &x, 2, 0.5, true).unwrap();
        assert_abs_diff_eq!(got.value, same, epsilon = 1e-12);
        // The three terms (4/3)^½, (2/3)^½, (4/3)^½ average to 1.041966, giving 0.884448.
        assert_abs_diff_eq!(got.value, 0.884448, epsilon = 1e-6);

        let y = set(&[10.0, 11.0, 12.0]);
        let far = ((4.0f64 / 33.0).sqrt() + (1.0f64 / 15.0).sqrt() + (4.0f64 / 27.0).sqrt()) / 3.0 * b;
        let got = estimate_alpha_divergence(&x, &y, 2, 0.5, false).unwrap();
        assert_abs_diff_eq!(got.value, far, epsilon = 1e-12);
        assert_abs_diff_eq!(got.value, 0.28046, epsilon = 5e-5);

        let h = estimate_hellinger(&x, &x, 2).unwrap();
        assert_abs_diff_eq!(h.value, 1.0 - same, epsilon = 1e-12);
        assert!(!h.clamped);
        let h = estimate_hellinger(&x, &y, 2).unwrap();
        assert_abs_diff_eq!(h.value, 1.0 - far, epsilon = 1e-12);
    }

    #[test]
    fn hellinger_clamps_negative_raw_values() {
        // Tight pairs: each point's 2nd neighbour in its own set is far away
        // while its 2nd neighbour in the (identical) other set is its twin.
        let x = set(&[0.0, 0.001, 10.0, 10.001, 20.0, 20.001]);
        let h = estimate_hellinger(&x, &x, 2).unwrap();
        let raw = Estimator::new(2).hellinger_raw(&x, &x).unwrap();
        assert!(raw < 0.0);
        assert_eq!(h.value, 0.0);
        assert!(h.clamped);
    }

    #[test]
    fn estimator_errors() {
        let x = set(&[0.0, 1.0, 2.0]);
        let y2 = SampleSet::from_rows(&[[0.0, 1.0], [1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!(matches!(estimate_alpha_divergence(&x, &y2, 2, 0.5, true), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(estimate_alpha_divergence(&x, &x, 3, 0.5, true), Err(Error::InsufficientSamples { .. })));
        assert!(estimate_alpha_divergence(&x, &x, 1, 0.5, true).is_err());
        assert!(SampleSet::from_values(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn unequal_sizes_use_both_counts() {
        let x = set(&[0.0, 1.0, 2.0]);
        let y = set(&[0.0, 1.0, 2.0, 0.5, 1.5]);
        let est = Estimator { k: 2, exponent_dim: true, search: NeighbourSearch::BruteForce };
        let pairs = est.neighbour_distances(&x, &y).unwrap();
        let b = b_constant(2, 0.5).unwrap();
        let manual: f64 = pairs.iter().map(|&(r, n)| (2.0 * r / (5.0 * n)).sqrt()).sum::<f64>() / 3.0 * b;
        assert_abs_diff_eq!(est.alpha_divergence(&x, &y, 0.5).unwrap().value, manual, epsilon = 1e-15);
    }

    #[test]
    fn coincident_cross_points_stay_finite() {
        let x = set(&[0.0, 1.0, 2.0, 3.0]);
        let y = set(&[0.0, 0.0, 1.0, 1.0]);
        let d = estimate_alpha_divergence(&x, &y, 2, 0.5, true).unwrap();
        assert!(d.value.is_finite());
    }

    fn points(n: usize, d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, n * d)
    }

    proptest! {
        #[test]
        fn alpha_one_is_exactly_one(xs in points(12, 2), ys in points(9, 2), k in 2usize..6) {
            let x = SampleSet::from_flat(xs, 2).unwrap();
            let y = SampleSet::from_flat(ys, 2).unwrap();
            let d = estimate_alpha_divergence(&x, &y, k, 1.0, true).unwrap();
            prop_assert_eq!(d.value, 1.0);
        }

        #[test]
        fn rigid_motion_invariance(xs in points(15, 2), ys in points(15, 2), angle in 0.0f64..std::f64::consts::TAU, sx in -10.0f64..10.0, sy in -10.0f64..10.0) {
            let (s, c) = angle.sin_cos();
            let motion = |v: &[f64]| -> Vec<f64> {
                v.chunks(2).flat_map(|p| [c * p[0] - s * p[1] + sx, s * p[0] + c * p[1] + sy]).collect()
            };
            let x = SampleSet::from_flat(xs.clone(), 2).unwrap();
            let y = SampleSet::from_flat(ys.clone(), 2).unwrap();
            let xm = SampleSet::from_flat(motion(&xs), 2).unwrap();
            let ym = SampleSet::from_flat(motion(&ys), 2).unwrap();
            let a = estimate_alpha_divergence(&x, &y, 3, 0.5, true).unwrap().value;
            let b = estimate_alpha_divergence(&xm, &ym, 3, 0.5, true).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
        }

        #[test]
        fn permutation_invariance(xs in points(10, 1), ys in points(10, 1), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut rng = crate::rng::from_seed(seed);
            let mut xp = xs.clone();
            let mut yp = ys.clone();
            xp.shuffle(&mut rng);
            yp.shuffle(&mut rng);
            let a = estimate_hellinger(&set(&xs), &set(&ys), 3).unwrap().value;
            let b = estimate_hellinger(&set(&xp), &set(&yp), 3).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn tree_matches_brute_force_bitwise(xs in points(40, 3), ys in points(30, 3), k in 2usize..6) {
            let x = SampleSet::from_flat(xs, 3).unwrap();
            let y = SampleSet::from_flat(ys, 3).unwrap();
            let brute = Estimator { k, exponent_dim: true, search: NeighbourSearch::BruteForce };
            let tree = Estimator { search: NeighbourSearch::KdTree, ..brute };
            let a = brute.neighbour_distances(&x, &y).unwrap();
            let b = tree.neighbour_distances(&x, &y).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!(p.0.to_bits(), q.0.to_bits());
                prop_assert_eq!(p.1.to_bits(), q.1.to_bits());
            }
        }
    }
}
