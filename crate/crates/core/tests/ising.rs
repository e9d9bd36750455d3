use proptest::prelude::*;

use kpo_aqc::ising::{
    brute_force_solve, energy_landscape, ground_states, ising_energy, local_minima, random_instance, InstanceDocument,
    IsingInstance, SpinConfiguration, ENUMERATION_BOUND,
};
use kpo_aqc::Error;

/// `-Σ_{i<j} J_ij s_i s_j - Σ_i h_i s_i`.
fn energy(inst: &IsingInstance, s: &[i8]) -> f64 {
    let n = s.len();
    let mut e = 0.0;
    for i in 0..n {
        e -= inst.field(i) * s[i] as f64;
        for j in i + 1..n {
            e -= inst.coupling(i, j) * (s[i] * s[j]) as f64;
        }
    }
    e
}

fn all_configs(n: usize) -> impl Iterator<Item = Vec<i8>> {
    (0..1usize << n).map(move |k| (0..n).map(|b| if k >> (n - 1 - b) & 1 == 0 { 1 } else { -1 }).collect())
}

#[test]
fn brute_force_equals_landscape_minimum_on_fifty_instances() {
    for k in 0..50u64 {
        let n = 2 + (k as usize % 7);
        let inst = random_instance(n, 1000 + k).unwrap();
        let (best, e) = brute_force_solve(&inst).unwrap();
        let rows = energy_landscape(&inst).unwrap();
        let land_min = rows.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
        assert_eq!(e, land_min, "instance {k}");
        let oracle = all_configs(n).map(|s| energy(&inst, &s)).fold(f64::INFINITY, f64::min);
        assert!((e - oracle).abs() < 1e-12);
        assert!((energy(&inst, best.spins()) - e).abs() < 1e-12);
        let at_zero: Vec<_> = rows.iter().filter(|r| r.distance == 0).collect();
        assert_eq!(at_zero.len(), 1);
        assert_eq!(at_zero[0].configuration, best.bits());
    }
}

#[test]
fn hard_instance_has_a_unique_optimum_and_two_local_minima() {
    let inst = IsingInstance::hard_instance();
    let (optima, e) = ground_states(&inst, 1e-9).unwrap();
    assert_eq!(optima.len(), 1);
    let oracle = all_configs(4).map(|s| energy(&inst, &s)).fold(f64::INFINITY, f64::min);
    assert!((e - oracle).abs() < 1e-12);
    let minima = local_minima(&inst).unwrap();
    assert_eq!(minima.len(), 2);
    assert!(minima.contains(&optima[0]));
}

#[test]
fn bundled_instance_values() {
    let inst = IsingInstance::hard_instance();
    assert_eq!(inst.coupling(0, 1), 0.266654);
    assert_eq!(inst.coupling(2, 3), -1.0);
    assert_eq!(inst.coupling(3, 2), -1.0);
    assert_eq!(inst.fields(), &[-0.340697, -0.546404, 0.501731, -0.296651]);
    assert_eq!(inst.max_magnitude(), 1.0);
}

#[test]
fn instance_documents() {
    let doc =
        InstanceDocument::from_json(r#"{"n": 3, "j_upper": [[1, 3, "-0.5"]], "h": ["0.25", "0", "1e-1"]}"#).unwrap();
    let inst = doc.to_instance().unwrap();
    assert_eq!(inst.coupling(0, 2), -0.5);
    assert_eq!(inst.coupling(0, 1), 0.0);
    assert_eq!(inst.field(2), 0.1);
    let back = InstanceDocument::from_json(&InstanceDocument::from_instance(&inst).to_json().unwrap()).unwrap();
    assert_eq!(back.to_instance().unwrap(), inst);

    for bad in [
        r#"{"n": 2, "j_upper": [[0, 1, "1"]], "h": ["0", "0"]}"#,
        r#"{"n": 2, "j_upper": [[1, 1, "1"]], "h": ["0", "0"]}"#,
        r#"{"n": 2, "j_upper": [[1, 3, "1"]], "h": ["0", "0"]}"#,
        r#"{"n": 2, "j_upper": [], "h": ["0"]}"#,
        r#"{"n": 2, "j_upper": [[1, 2, "x"]], "h": ["0", "0"]}"#,
    ] {
        let r = InstanceDocument::from_json(bad).and_then(|d| d.to_instance());
        assert!(
            matches!(r, Err(Error::InvalidInstance(_) | Error::DimensionMismatch { .. })),
            "{bad}"
        );
    }
}

#[test]
fn random_instances_are_normalized_and_seeded() {
    for seed in 0..20 {
        let a = random_instance(5, seed).unwrap();
        assert_eq!(a, random_instance(5, seed).unwrap());
        assert!((a.max_magnitude() - 1.0).abs() < 1e-15);
        assert_ne!(a, random_instance(5, seed + 100).unwrap());
    }
    assert!(random_instance(1, 0).is_err());
}

#[test]
fn enumeration_is_bounded() {
    let inst = IsingInstance::zero(ENUMERATION_BOUND + 1).unwrap();
    assert!(matches!(brute_force_solve(&inst), Err(Error::EnumerationBound { .. })));
    assert!(energy_landscape(&IsingInstance::zero(17).unwrap()).is_err());
}

#[test]
fn energy_rejects_wrong_length() {
    let inst = IsingInstance::hard_instance();
    let s = SpinConfiguration::new(vec![1, -1]).unwrap();
    assert!(ising_energy(&inst, &s).is_err());
    assert!(SpinConfiguration::new(vec![1, 0]).is_err());
}

proptest! {
    #[test]
    fn energy_matches_pairwise_oracle(seed in any::<u64>(), n in 2usize..8, idx in any::<usize>()) {
        let inst = random_instance(n, seed).unwrap();
        let s = SpinConfiguration::from_index(n, idx % (1 << n));
        prop_assert!((ising_energy(&inst, &s).unwrap() - energy(&inst, s.spins())).abs() < 1e-12);
    }

    #[test]
    fn zero_field_energy_is_flip_symmetric(seed in any::<u64>(), idx in 0usize..64) {
        let r = random_instance(6, seed).unwrap();
        let couplings = (0..6).map(|i| (0..6).map(|j| r.coupling(i, j)).collect()).collect();
        let inst = IsingInstance::new(couplings, vec![0.0; 6]).unwrap();
        let s = SpinConfiguration::from_index(6, idx);
        prop_assert_eq!(ising_energy(&inst, &s).unwrap(), ising_energy(&inst, &s.flipped()).unwrap());
    }
}
