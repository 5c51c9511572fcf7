use abcweight::models::{simulate_diffusion, simulate_toy, ObservationSchedule, DEFAULT_EVENT_CAP};
use abcweight::rng;

#[test]
fn toy_maximum_follows_power_law_cdf() {
    let (theta, r, n) = (10.0, 10, 100_000);
    let mut g = rng::from_seed(21);
    let mut maxima: Vec<f64> =
        (0..n).map(|_| simulate_toy(theta, r, &mut g).unwrap().into_iter().fold(0.0, f64::max)).collect();
    maxima.sort_by(f64::total_cmp);
    let cdf = |m: f64| (m / theta).powi(r as i32);
    let sup = maxima
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let f = cdf(m);
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    // Dvoretzky–Kiefer–Wolfowitz band at level 0.001.
    let eps = ((2.0f64 / 0.001).ln() / (2.0 * n as f64)).sqrt();
    assert!(sup < eps, "sup |F_n - F| = {sup}, band {eps}");
}

#[test]
fn diffusion_relaxes_to_uniform_profile() {
    let schedule = ObservationSchedule::new(vec![0.0, 200.0], Default::default()).unwrap();
    let paths = 2000;
    let mut g = rng::from_seed(22);
    let mut totals = [0.0f64; 8];
    for _ in 0..paths {
        let t = simulate_diffusion(1.0, 8, 10, &schedule, DEFAULT_EVENT_CAP, &mut g).unwrap();
        for (acc, c) in totals.iter_mut().zip(t.row(1)) {
            *acc += *c as f64;
        }
    }
    // Binomial(40, 1/8) per voxel at equilibrium.
    let se = (40.0 * 0.125 * 0.875 / paths as f64).sqrt();
    for (i, total) in totals.iter().enumerate() {
        let mean = total / paths as f64;
        assert!((mean - 5.0).abs() < 5.0 * se, "voxel {i}: mean {mean}");
    }
}
