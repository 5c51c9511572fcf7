//! Mass-action reaction networks and Gillespie's direct method.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{ObservationSchedule, Trajectory};
use crate::{Error, Result};

/// Default cap on events per realization.
pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propensity {
    /// Constant `k`.
    Zeroth,
    /// `k · S`.
    Unary { species: usize },
    /// `k · S (S - 1) / 2` for `S + S → …`.
    BinaryHomodimer { species: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub change: Vec<i64>,
    pub propensity: Propensity,
    pub rate_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species_count: usize,
    reactions: Vec<Reaction>,
    rate_count: usize,
}

impl ReactionNetwork {
    pub fn new(species_count: usize, reactions: Vec<Reaction>) -> Result<Self> {
        let mut rate_count = 0;
        for (i, r) in reactions.iter().enumerate() {
            if r.change.len() != species_count {
                return Err(Error::invalid(format!(
                    "reaction {i} changes {} species, network has {species_count}",
                    r.change.len()
                )));
            }
            match r.propensity {
                Propensity::Unary { species } | Propensity::BinaryHomodimer { species } if species >= species_count => {
                    return Err(Error::invalid(format!("reaction {i} reads unknown species {species}")));
                }
                _ => {}
            }
            rate_count = rate_count.max(r.rate_index + 1);
        }
        Ok(Self { species_count, reactions, rate_count })
    }

    /// `A → ∅` at rate `k·A`.
    pub fn death() -> Self {
        Self::new(1, vec![Reaction { change: vec![-1], propensity: Propensity::Unary { species: 0 }, rate_index: 0 }])
            .expect("static network")
    }

    /// `S1 → ∅`, `S2 → S3`, `S1 + S1 → S2`, `S2 → S1 + S1` with rates `k1..k4`.
    pub fn dimerization() -> Self {
        let r = |change: [i64; 3], propensity, rate_index| Reaction { change: change.to_vec(), propensity, rate_index };
        Self::new(
            3,
            vec![
                r([-1, 0, 0], Propensity::Unary { species: 0 }, 0),
                r([0, -1, 1], Propensity::Unary { species: 1 }, 1),
                r([-2, 1, 0], Propensity::BinaryHomodimer { species: 0 }, 2),
                r([2, -1, 0], Propensity::Unary { species: 1 }, 3),
            ],
        )
        .expect("static network")
    }

    /// Random walk over `voxels` compartments with reflecting ends; every
    /// jump has rate `θ` per particle.
    pub fn diffusion(voxels: usize) -> Self {
        let mut reactions = Vec::with_capacity(2 * voxels.saturating_sub(1));
        for i in 0..voxels.saturating_sub(1) {
            for (from, to) in [(i, i + 1), (i + 1, i)] {
                let mut change = vec![0; voxels];
                change[from] = -1;
                change[to] = 1;
                reactions.push(Reaction { change, propensity: Propensity::Unary { species: from }, rate_index: 0 });
            }
        }
        Self::new(voxels, reactions).expect("static network")
    }

    pub fn species_count(&self) -> usize {
        self.species_count
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn rate_count(&self) -> usize {
        self.rate_count
    }

    fn propensity(&self, reaction: &Reaction, rates: &[f64], state: &[i64]) -> f64 {
        let k = rates[reaction.rate_index];
        match reaction.propensity {
            Propensity::Zeroth => k,
            Propensity::Unary { species } => k * state[species] as f64,
            Propensity::BinaryHomodimer { species } => {
                let s = state[species] as f64;
                k * s * (s - 1.0) / 2.0
            }
        }
    }
}

/// Exact realization of the network, recorded at the schedule times.
pub fn ssa_simulate<R: Rng + ?Sized>(
    network: &ReactionNetwork,
    rates: &[f64],
    initial_state: &[u64],
    schedule: &ObservationSchedule,
    event_cap: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    ssa_simulate_observed(network, rates, initial_state, schedule, event_cap, rng, |_, _| {})
}

/// As [`ssa_simulate`], calling `on_event(time, state)` after every event.
pub fn ssa_simulate_observed<R: Rng + ?Sized>(
    network: &ReactionNetwork,
    rates: &[f64],
    initial_state: &[u64],
    schedule: &ObservationSchedule,
    event_cap: u64,
    rng: &mut R,
    mut on_event: impl FnMut(f64, &[i64]),
) -> Result<Trajectory> {
    if rates.len() != network.rate_count() {
        return Err(Error::DimensionMismatch { expected: network.rate_count(), actual: rates.len() });
    }
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::invalid(format!("reaction rate {r} is negative or not finite")));
    }
    if initial_state.len() != network.species_count() {
        return Err(Error::DimensionMismatch { expected: network.species_count(), actual: initial_state.len() });
    }

    let species = network.species_count();
    let times = schedule.times();
    let mut state: Vec<i64> = initial_state.iter().map(|&s| s as i64).collect();
    let mut states = Vec::with_capacity(times.len() * species);
    let mut props = vec![0.0; network.reactions.len()];
    let mut t = 0.0;
    let mut next_obs = 0;
    let mut events = 0u64;

    let record = |state: &[i64], states: &mut Vec<u64>| states.extend(state.iter().map(|&s| s as u64));

    while next_obs < times.len() {
        let mut total = 0.0;
        for (p, r) in props.iter_mut().zip(&network.reactions) {
            *p = network.propensity(r, rates, &state);
            total += *p;
        }
        if total <= 0.0 {
            while next_obs < times.len() {
                record(&state, &mut states);
                next_obs += 1;
            }
            break;
        }
        let tau: f64 = Exp1.sample(rng);
        let t_next = t + tau / total;
        while next_obs < times.len() && times[next_obs] < t_next {
            record(&state, &mut states);
            next_obs += 1;
        }
        if next_obs == times.len() {
            break;
        }

        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = props.len() - 1;
        for (j, p) in props.iter().enumerate() {
            acc += p;
            if target < acc {
                chosen = j;
                break;
            }
        }
        // Rounding can land on a trailing zero-propensity channel.
        while props[chosen] <= 0.0 {
            chosen -= 1;
        }
        for (s, c) in state.iter_mut().zip(&network.reactions[chosen].change) {
            *s += c;
        }
        t = t_next;
        events += 1;
        if events > event_cap {
            return Err(Error::EventCapExceeded(event_cap));
        }
        on_event(t, &state);
    }

    Ok(Trajectory::new(times.to_vec(), states, species, None))
}
