//! Generative models: the uniform toy model and three Markov jump processes
//! simulated exactly with the direct method.

mod network;
mod schedule;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub use network::{ssa_simulate, ssa_simulate_observed, Propensity, Reaction, ReactionNetwork, DEFAULT_EVENT_CAP};
pub use schedule::{ObservationSchedule, Spacing};

use crate::{Error, Result};

/// Copy-number observations of a jump process at the schedule times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<u64>,
    species: usize,
    /// Extra scalar observation (the death model's noise channel).
    pub aux: Option<f64>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<u64>, species: usize, aux: Option<f64>) -> Self {
        debug_assert_eq!(times.len() * species, states.len());
        Self { times, states, species, aux }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn species_count(&self) -> usize {
        self.species
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State at observation `j`.
    pub fn row(&self, j: usize) -> &[u64] {
        &self.states[j * self.species..(j + 1) * self.species]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.states.chunks_exact(self.species)
    }

    /// Time series of one species.
    pub fn series(&self, species: usize) -> impl Iterator<Item = u64> + '_ {
        self.rows().map(move |r| r[species])
    }
}

/// `r` independent draws from `Unif[0, θ]`.
pub fn simulate_toy<R: Rng + ?Sized>(theta: f64, r: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::invalid(format!("toy model needs θ > 0, got {theta}")));
    }
    if r == 0 {
        return Err(Error::invalid("toy model needs at least one draw"));
    }
    Ok((0..r).map(|_| rng.random::<f64>() * theta).collect())
}

/// Pure death process from `a0` molecules plus one independent `N(0, σ²)`
/// observation stored in `aux`.
pub fn simulate_death<R: Rng + ?Sized>(
    k: f64,
    sigma: f64,
    a0: u64,
    schedule: &ObservationSchedule,
    event_cap: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise scale must be nonnegative, got {sigma}")));
    }
    let mut traj = ssa_simulate(&ReactionNetwork::death(), &[k], &[a0], schedule, event_cap, rng)?;
    let z = if sigma == 0.0 {
        0.0
    } else {
        let n: f64 = StandardNormal.sample(rng);
        sigma * n
    };
    traj.aux = Some(z);
    Ok(traj)
}

pub fn simulate_dimerization<R: Rng + ?Sized>(
    rates: &[f64; 4],
    initial: &[u64; 3],
    schedule: &ObservationSchedule,
    event_cap: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    ssa_simulate(&ReactionNetwork::dimerization(), rates, initial, schedule, event_cap, rng)
}

/// Initial profile of the diffusion model: `per_voxel` particles in each
/// voxel of the left half.
pub fn diffusion_initial(voxels: usize, per_voxel: u64) -> Vec<u64> {
    (0..voxels).map(|i| if i < voxels / 2 { per_voxel } else { 0 }).collect()
}

pub fn simulate_diffusion<R: Rng + ?Sized>(
    theta: f64,
    voxels: usize,
    per_voxel: u64,
    schedule: &ObservationSchedule,
    event_cap: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    if voxels < 2 || !voxels.is_multiple_of(2) {
        return Err(Error::invalid(format!("voxel count must be even and >= 2, got {voxels}")));
    }
    ssa_simulate(
        &ReactionNetwork::diffusion(voxels),
        &[theta],
        &diffusion_initial(voxels, per_voxel),
        schedule,
        event_cap,
        rng,
    )
}

/// Raw output of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Draws(Vec<f64>),
    Trajectory(Trajectory),
}

/// A fully parameterized generative model, ready to simulate given θ.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Toy { draws: usize, sorted: bool },
    Death { a0: u64, schedule: ObservationSchedule, event_cap: u64 },
    Dimerization { initial: [u64; 3], schedule: ObservationSchedule, event_cap: u64 },
    Diffusion { voxels: usize, per_voxel: u64, schedule: ObservationSchedule, event_cap: u64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Toy { .. } => "toy",
            Model::Death { .. } => "death",
            Model::Dimerization { .. } => "dimerization",
            Model::Diffusion { .. } => "diffusion",
        }
    }

    /// Number of parameters θ.
    pub fn param_dim(&self) -> usize {
        match self {
            Model::Toy { .. } | Model::Diffusion { .. } => 1,
            Model::Death { .. } => 2,
            Model::Dimerization { .. } => 4,
        }
    }

    /// Number of summary statistics κ.
    pub fn summary_len(&self) -> usize {
        match self {
            Model::Toy { draws, .. } => *draws,
            Model::Death { schedule, .. } => schedule.len() + 1,
            Model::Dimerization { schedule, .. } => 3 * schedule.len(),
            Model::Diffusion { voxels, schedule, .. } => voxels * schedule.len(),
        }
    }

    pub fn schedule(&self) -> Option<&ObservationSchedule> {
        match self {
            Model::Toy { .. } => None,
            Model::Death { schedule, .. }
            | Model::Dimerization { schedule, .. }
            | Model::Diffusion { schedule, .. } => Some(schedule),
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<Dataset> {
        if theta.len() != self.param_dim() {
            return Err(Error::DimensionMismatch { expected: self.param_dim(), actual: theta.len() });
        }
        Ok(match self {
            Model::Toy { draws, .. } => Dataset::Draws(simulate_toy(theta[0], *draws, rng)?),
            Model::Death { a0, schedule, event_cap } => {
                Dataset::Trajectory(simulate_death(theta[0], theta[1], *a0, schedule, *event_cap, rng)?)
            }
            Model::Dimerization { initial, schedule, event_cap } => {
                let rates = [theta[0], theta[1], theta[2], theta[3]];
                Dataset::Trajectory(simulate_dimerization(&rates, initial, schedule, *event_cap, rng)?)
            }
            Model::Diffusion { voxels, per_voxel, schedule, event_cap } => {
                Dataset::Trajectory(simulate_diffusion(theta[0], *voxels, *per_voxel, schedule, *event_cap, rng)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    fn death_schedule() -> ObservationSchedule {
        ObservationSchedule::linear(32, 20.0).unwrap()
    }

    #[test]
    fn zero_rate_death_is_constant() {
        let t = simulate_death(0.0, 1.0, 10, &death_schedule(), DEFAULT_EVENT_CAP, &mut from_seed(1)).unwrap();
        assert!(t.series(0).all(|a| a == 10));
        assert_eq!(t.len(), 33);
        assert!(t.aux.is_some());
    }

    #[test]
    fn zero_sigma_gives_exact_zero() {
        let t = simulate_death(0.1, 0.0, 10, &death_schedule(), DEFAULT_EVENT_CAP, &mut from_seed(2)).unwrap();
        assert_eq!(t.aux.unwrap().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn death_paths_are_nonincreasing() {
        let mut rng = from_seed(3);
        for _ in 0..50 {
            let t = simulate_death(0.1, 0.01, 10, &death_schedule(), DEFAULT_EVENT_CAP, &mut rng).unwrap();
            let s: Vec<u64> = t.series(0).collect();
            assert!(s.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(s[0], 10);
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let sched = ObservationSchedule::linear(8, 20.0).unwrap();
        let a = simulate_diffusion(0.1, 8, 10, &sched, DEFAULT_EVENT_CAP, &mut from_seed(9)).unwrap();
        let b = simulate_diffusion(0.1, 8, 10, &sched, DEFAULT_EVENT_CAP, &mut from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diffusion_conserves_particles() {
        let sched = ObservationSchedule::linear(8, 20.0).unwrap();
        let mut rng = from_seed(4);
        for _ in 0..50 {
            let t = simulate_diffusion(0.5, 8, 10, &sched, DEFAULT_EVENT_CAP, &mut rng).unwrap();
            assert!(t.rows().all(|r| r.iter().sum::<u64>() == 40));
        }
        let t = simulate_diffusion(0.0, 8, 10, &sched, DEFAULT_EVENT_CAP, &mut rng).unwrap();
        assert!(t.rows().all(|r| r == [10, 10, 10, 10, 0, 0, 0, 0]));
        assert!(simulate_diffusion(0.1, 7, 10, &sched, DEFAULT_EVENT_CAP, &mut rng).is_err());
    }

    #[test]
    fn dimerization_zero_rates_constant() {
        let sched = ObservationSchedule::geometric(16, 100.0, 1e-3).unwrap();
        let t = simulate_dimerization(&[0.0; 4], &[1000, 0, 0], &sched, DEFAULT_EVENT_CAP, &mut from_seed(5)).unwrap();
        assert!(t.rows().all(|r| r == [1000, 0, 0]));
    }

    #[test]
    fn dimerization_mass_never_increases() {
        let sched = ObservationSchedule::geometric(16, 100.0, 1e-3).unwrap();
        let mut last = i64::MAX;
        let mut ok = true;
        ssa_simulate_observed(
            &ReactionNetwork::dimerization(),
            &[1.0, 0.04, 0.2, 0.5],
            &[1000, 0, 0],
            &sched,
            DEFAULT_EVENT_CAP,
            &mut from_seed(6),
            |_, s| {
                let mass = s[0] + 2 * s[1] + 2 * s[2];
                ok &= mass <= last && s.iter().all(|&c| c >= 0);
                last = mass;
            },
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn dimerization_shape() {
        // Fast loss of S1, slow build-up of S3.
        let sched = ObservationSchedule::geometric(16, 100.0, 1e-3).unwrap();
        let t =
            simulate_dimerization(&[1.0, 0.04, 0.2, 0.5], &[1000, 0, 0], &sched, DEFAULT_EVENT_CAP, &mut from_seed(7))
                .unwrap();
        let s1: Vec<u64> = t.series(0).collect();
        let s3: Vec<u64> = t.series(2).collect();
        assert!(s1[8] < s1[0] / 2);
        assert!(s3[16] > s3[8]);
    }

    #[test]
    fn event_cap_is_enforced() {
        let sched = ObservationSchedule::linear(4, 100.0).unwrap();
        let err = simulate_diffusion(1.0, 8, 10, &sched, 10, &mut from_seed(8)).unwrap_err();
        assert!(matches!(err, Error::EventCapExceeded(10)));
    }

    #[test]
    fn invalid_inputs() {
        let sched = death_schedule();
        assert!(simulate_toy(0.0, 10, &mut from_seed(1)).is_err());
        assert!(simulate_death(-0.1, 0.0, 10, &sched, DEFAULT_EVENT_CAP, &mut from_seed(1)).is_err());
        assert!(simulate_death(0.1, -1.0, 10, &sched, DEFAULT_EVENT_CAP, &mut from_seed(1)).is_err());
        assert!(ssa_simulate(&ReactionNetwork::death(), &[0.1, 0.2], &[10], &sched, 10, &mut from_seed(1)).is_err());
    }

    #[test]
    fn toy_support() {
        let d = simulate_toy(10.0, 10, &mut from_seed(3)).unwrap();
        assert_eq!(d.len(), 10);
        assert!(d.iter().all(|x| (0.0..=10.0).contains(x)));
    }
}
