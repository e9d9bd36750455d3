#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kpo_aqc::fock::{FockCutoff, QuantumState};
use kpo_aqc::hamiltonian::ScheduleValues;
use kpo_aqc::ising::IsingInstance;

pub fn ladder(levels: usize) -> DMatrix<f64> {
    DMatrix::from_fn(levels, levels, |r, c| if c == r + 1 { (c as f64).sqrt() } else { 0.0 })
}

/// `op` acting on `mode` of `modes`, mode 0 being the most significant factor.
pub fn embed(op: &DMatrix<f64>, mode: usize, modes: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(op.nrows(), op.nrows());
    (0..modes).fold(DMatrix::from_element(1, 1, 1.0), |acc, m| {
        acc.kronecker(if m == mode { op } else { &id })
    })
}

pub fn dense_hamiltonian(inst: &IsingInstance, kerr: f64, v: &ScheduleValues, levels: usize) -> DMatrix<f64> {
    let n = inst.size();
    let a: Vec<_> = (0..n).map(|i| embed(&ladder(levels), i, n)).collect();
    let dim = levels.pow(n as u32);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        let ad = a[i].transpose();
        h += (&ad * &ad * &a[i] * &a[i]) * (kerr / 2.0);
        h += (&ad * &a[i]) * v.detunings[i];
        h -= (&a[i] * &a[i] + &ad * &ad) * (v.pump / 2.0);
        h -= (&a[i] + &ad) * (v.coupling * v.drive * inst.field(i));
        for j in 0..n {
            if j != i {
                h -= (&ad * &a[j]) * (v.coupling * inst.coupling(i, j));
            }
        }
    }
    h
}

pub fn random_state(modes: usize, levels: usize, seed: u64) -> QuantumState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = levels.pow(modes as u32);
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut s = QuantumState::from_amplitudes(modes, FockCutoff::new(levels).unwrap(), amps).unwrap();
    s.normalize().unwrap();
    s
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
