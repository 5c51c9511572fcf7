//! Summary vectors and the weighted Euclidean ABC distance
//! `d_w(a, b) = Σ w_i (a_i - b_i)²`.

use serde::{Deserialize, Serialize};

use crate::models::{Dataset, Model};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryVector(Vec<f64>);

impl SummaryVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("summary contains non-finite value {v}")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Nonnegative weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if let Some(w) = raw.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weight vector has no positive entry"));
        }
        Ok(Self(raw.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(kappa: usize) -> Result<Self> {
        Self::new(vec![1.0; kappa])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Map a simulated dataset to its summary vector.
///
/// * toy: the draws, sorted ascending unless the model disables it
/// * death: `A(t_0..t_n)` then `z`
/// * dimerization: the S1, S2 and S3 series concatenated
/// * diffusion: each voxel's series concatenated
pub fn summarize(model: &Model, data: &Dataset) -> Result<SummaryVector> {
    let values = match (model, data) {
        (Model::Toy { draws, sorted }, Dataset::Draws(x)) => {
            if x.len() != *draws {
                return Err(Error::DimensionMismatch { expected: *draws, actual: x.len() });
            }
            let mut v = x.clone();
            if *sorted {
                v.sort_by(f64::total_cmp);
            }
            v
        }
        (Model::Death { schedule, .. }, Dataset::Trajectory(t)) => {
            check_shape(t.len(), schedule.len(), t.species_count(), 1)?;
            let z = t.aux.ok_or_else(|| Error::invalid("death trajectory lacks its noise observation"))?;
            t.series(0).map(|a| a as f64).chain(std::iter::once(z)).collect()
        }
        (Model::Dimerization { schedule, .. }, Dataset::Trajectory(t)) => {
            check_shape(t.len(), schedule.len(), t.species_count(), 3)?;
            (0..3).flat_map(|s| t.series(s)).map(|c| c as f64).collect()
        }
        (Model::Diffusion { voxels, schedule, .. }, Dataset::Trajectory(t)) => {
            check_shape(t.len(), schedule.len(), t.species_count(), *voxels)?;
            (0..*voxels).flat_map(|s| t.series(s)).map(|c| c as f64).collect()
        }
        _ => return Err(Error::invalid(format!("dataset kind does not match the {} model", model.name()))),
    };
    SummaryVector::new(values)
}

fn check_shape(rows: usize, want_rows: usize, species: usize, want_species: usize) -> Result<()> {
    if rows != want_rows {
        return Err(Error::DimensionMismatch { expected: want_rows, actual: rows });
    }
    if species != want_species {
        return Err(Error::DimensionMismatch { expected: want_species, actual: species });
    }
    Ok(())
}

/// `Σ w_i (a_i - b_i)²`.
pub fn weighted_sq_distance(w: &WeightVector, a: &SummaryVector, b: &SummaryVector) -> Result<f64> {
    if a.len() != w.len() || b.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: if a.len() != w.len() { a.len() } else { b.len() },
        });
    }
    Ok(weighted_sq(w.as_slice(), a.values(), b.values()))
}

#[inline]
pub(crate) fn weighted_sq(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y) * (x - y)).sum()
}
