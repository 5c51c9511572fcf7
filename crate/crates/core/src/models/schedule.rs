use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

/// Times at which a trajectory is observed, `t_0 ≤ t_1 ≤ … ≤ t_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSchedule {
    times: Vec<f64>,
    spacing: Spacing,
}

impl ObservationSchedule {
    pub fn new(times: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("observation schedule is empty"));
        }
        if times.iter().any(|t| !t.is_finite()) || times[0] < 0.0 {
            return Err(Error::invalid("observation times must be finite and nonnegative"));
        }
        for w in times.windows(2) {
            let ok = match spacing {
                Spacing::Linear => w[1] >= w[0],
                Spacing::Geometric => w[1] > w[0],
            };
            if !ok {
                return Err(Error::invalid(format!("observation times out of order: {} then {}", w[0], w[1])));
            }
        }
        Ok(Self { times, spacing })
    }

    /// `n + 1` equally spaced times on `[0, final_time]`.
    pub fn linear(n: usize, final_time: f64) -> Result<Self> {
        if n == 0 {
            return Self::new(vec![final_time], Spacing::Linear);
        }
        let times = (0..=n).map(|j| final_time * j as f64 / n as f64).collect();
        Self::new(times, Spacing::Linear)
    }

    /// `t_0 = 0` and `t_j = T g^(n-j)` for `j = 1..=n`, with `g` chosen so
    /// that `t_1 = first_fraction · T`.
    pub fn geometric(n: usize, final_time: f64, first_fraction: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("geometric schedule needs n >= 1"));
        }
        if !(first_fraction > 0.0 && first_fraction < 1.0) && n > 1 {
            return Err(Error::invalid("geometric first fraction must lie in (0, 1)"));
        }
        let mut times = Vec::with_capacity(n + 1);
        times.push(0.0);
        if n == 1 {
            times.push(final_time);
        } else {
            let g = first_fraction.powf(1.0 / (n - 1) as f64);
            times.extend((1..=n).map(|j| final_time * g.powi((n - j) as i32)));
        }
        Self::new(times, Spacing::Geometric)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("schedule is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid() {
        let s = ObservationSchedule::linear(32, 20.0).unwrap();
        assert_eq!(s.len(), 33);
        assert_eq!(s.times()[0], 0.0);
        assert_eq!(s.final_time(), 20.0);
        assert_eq!(s.times()[16], 10.0);
    }

    #[test]
    fn geometric_grid() {
        let s = ObservationSchedule::geometric(16, 100.0, 1e-3).unwrap();
        assert_eq!(s.len(), 17);
        assert_eq!(s.times()[0], 0.0);
        assert!((s.times()[1] - 0.1).abs() < 1e-12);
        assert_eq!(s.final_time(), 100.0);
        let ratios: Vec<f64> = s.times()[1..].windows(2).map(|w| w[1] / w[0]).collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_times() {
        assert!(ObservationSchedule::new(vec![-1.0, 2.0], Spacing::Linear).is_err());
        assert!(ObservationSchedule::new(vec![0.0, 2.0, 1.0], Spacing::Linear).is_err());
        assert!(ObservationSchedule::new(vec![0.0, 1.0, 1.0], Spacing::Geometric).is_err());
        assert!(ObservationSchedule::new(vec![0.0, 1.0, 1.0], Spacing::Linear).is_ok());
    }
}
