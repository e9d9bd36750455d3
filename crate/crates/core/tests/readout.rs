use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kpo_aqc::fock::{FockCutoff, QuantumState};
use kpo_aqc::ising::{ground_states, random_instance, IsingInstance, SpinConfiguration};
use kpo_aqc::readout::{compute_metrics, configuration_probabilities, EnsembleMetrics, RunMetrics, SignProjector};
use kpo_aqc::Error;

/// Harmonic-oscillator eigenfunctions and their derivatives at `x = 0`.
fn origin_values(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; count + 1];
    v[0] = std::f64::consts::PI.powf(-0.25);
    for n in 1..count {
        v[n + 1] = -((n as f64) / (n as f64 + 1.0)).sqrt() * v[n - 1];
    }
    let d = (0..count)
        .map(|n| {
            let down = if n > 0 { (n as f64 / 2.0).sqrt() * v[n - 1] } else { 0.0 };
            down - ((n as f64 + 1.0) / 2.0).sqrt() * v[n + 1]
        })
        .collect();
    v.truncate(count);
    (v, d)
}

/// `∫_0^∞ φ_m φ_n dx` from the Wronskian at the origin.
fn half_line_overlap(m: usize, n: usize, levels: usize) -> f64 {
    if m == n {
        return 0.5;
    }
    let (v, d) = origin_values(levels);
    -(d[m] * v[n] - v[m] * d[n]) / (2.0 * (n as f64 - m as f64))
}

#[test]
fn projector_matches_wronskian_oracle() {
    for levels in [2, 7, 15, 24] {
        let proj = SignProjector::build(FockCutoff::new(levels).unwrap());
        for m in 0..levels {
            for n in 0..levels {
                let want = half_line_overlap(m, n, levels);
                let got = proj.plus(m, n);
                assert!((got - want).abs() < 1e-12, "L={levels} ({m},{n}): {got} vs {want}");
                assert_eq!(
                    proj.entry(1, m, n) + proj.entry(-1, m, n),
                    if m == n { 1.0 } else { 0.0 }
                );
            }
        }
    }
}

fn random_mode(levels: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..levels)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / n).collect()
}

fn mode_plus(psi: &[Complex64], levels: usize) -> f64 {
    let mut p = 0.0;
    for m in 0..levels {
        for n in 0..levels {
            p += (psi[m].conj() * psi[n]).re * half_line_overlap(m, n, levels);
        }
    }
    p
}

#[test]
fn product_states_factorize() {
    let levels = 6;
    let cutoff = FockCutoff::new(levels).unwrap();
    let proj = SignProjector::build(cutoff);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let factors: Vec<_> = (0..3).map(|_| random_mode(levels, &mut rng)).collect();
    let plus: Vec<f64> = factors.iter().map(|f| mode_plus(f, levels)).collect();
    let state = QuantumState::product(&factors, cutoff).unwrap();
    let probs = configuration_probabilities(&state, &proj).unwrap();
    for idx in 0..8 {
        let s = SpinConfiguration::from_index(3, idx);
        let want: f64 = s
            .spins()
            .iter()
            .zip(&plus)
            .map(|(&sg, &p)| if sg == 1 { p } else { 1.0 - p })
            .product();
        assert!((probs.get(&s) - want).abs() < 1e-12, "{s}");
    }
}

#[test]
fn probabilities_sum_to_one_on_entangled_states() {
    let cutoff = FockCutoff::new(5).unwrap();
    let proj = SignProjector::cached(cutoff);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for modes in 1..=4 {
        let dim = 5usize.pow(modes as u32);
        let amps = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut s = QuantumState::from_amplitudes(modes, cutoff, amps).unwrap();
        s.normalize().unwrap();
        let probs = configuration_probabilities(&s, &proj).unwrap();
        assert!((probs.total() - 1.0).abs() < 1e-9);
        assert!(probs.as_slice().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }
}

fn gaussian_tail(mean: f64) -> f64 {
    // ∫_0^∞ exp(-(x - mean)^2) / sqrt(pi) dx by composite Simpson.
    let (a, b, n) = (0.0, mean.abs() + 12.0, 20000);
    let h = (b - a) / n as f64;
    let f = |x: f64| (-(x - mean).powi(2)).exp() / std::f64::consts::PI.sqrt();
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn coherent_states_follow_the_gaussian_tail() {
    let cutoff = FockCutoff::new(30).unwrap();
    let proj = SignProjector::build(cutoff);
    for alpha in [-1.5, -0.3, 0.0, 0.7, 2.0] {
        let s = QuantumState::coherent_product(&[Complex64::new(alpha, 0.0)], cutoff).unwrap();
        let probs = configuration_probabilities(&s, &proj).unwrap();
        let up = probs.get(&SpinConfiguration::new(vec![1]).unwrap());
        let want = gaussian_tail(std::f64::consts::SQRT_2 * alpha);
        assert!((up - want).abs() < 1e-9, "alpha {alpha}: {up} vs {want}");
    }
}

#[test]
fn cat_like_final_states_succeed() {
    let inst = IsingInstance::hard_instance();
    let (optima, _) = ground_states(&inst, 1e-12).unwrap();
    let alpha = 2.0;
    let cutoff = FockCutoff::new(30).unwrap();
    let amps: Vec<Complex64> = optima[0]
        .spins()
        .iter()
        .map(|&s| Complex64::new(alpha * s as f64, 0.0))
        .collect();
    let s = QuantumState::coherent_product(&amps, cutoff).unwrap();
    let m = compute_metrics(&s, &inst, &SignProjector::cached(cutoff)).unwrap();
    let per_mode = gaussian_tail(std::f64::consts::SQRT_2 * alpha);
    assert!((m.success_probability - per_mode.powi(4)).abs() < 1e-9);
    assert!(m.residual_energy > 0.0 && m.residual_energy < 1e-3);
    assert_eq!(m.config_probs.len(), 16);
}

#[test]
fn degenerate_zero_instance_always_succeeds() {
    let inst = IsingInstance::zero(3).unwrap();
    let cutoff = FockCutoff::new(4).unwrap();
    let s = QuantumState::single_photon(3, 1, cutoff).unwrap();
    let m = compute_metrics(&s, &inst, &SignProjector::cached(cutoff)).unwrap();
    assert!((m.success_probability - 1.0).abs() < 1e-12);
    assert_eq!(m.residual_energy, 0.0);
}

#[test]
fn unnormalized_states_are_rejected() {
    let cutoff = FockCutoff::new(4).unwrap();
    let mut s = QuantumState::vacuum(2, cutoff).unwrap();
    s.amplitudes_mut()[0] = Complex64::new(1.1, 0.0);
    let err = configuration_probabilities(&s, &SignProjector::cached(cutoff)).unwrap_err();
    assert!(matches!(err, Error::NotNormalized(_)));
}

#[test]
fn ensemble_averages_runs() {
    let inst = random_instance(2, 1).unwrap();
    let cutoff = FockCutoff::new(6).unwrap();
    let proj = SignProjector::cached(cutoff);
    let runs: Vec<RunMetrics> = [0.3, -0.8]
        .iter()
        .map(|&a| {
            let s =
                QuantumState::coherent_product(&[Complex64::new(a, 0.0), Complex64::new(0.5, 0.0)], cutoff).unwrap();
            compute_metrics(&s, &inst, &proj).unwrap()
        })
        .collect();
    let e = EnsembleMetrics::from_runs(runs.clone(), vec![1, 3]).unwrap();
    let mean_fail = (runs[0].failure_probability + runs[1].failure_probability) / 2.0;
    assert!((e.failure.mean - mean_fail).abs() < 1e-15);
    assert!((e.mean.failure_probability - mean_fail).abs() < 1e-15);
    let half_diff = (runs[0].failure_probability - runs[1].failure_probability).abs() / 2.0;
    assert!((e.failure.std_error - half_diff).abs() < 1e-12);
    assert_eq!(e.mean_jumps, 2.0);
    let total: f64 = e.mean.config_probs.values().sum();
    assert!((total - 1.0).abs() < 1e-12);
}
