//! Ising problem instances and exact enumeration.
//!
//! The energy of a spin configuration `s ∈ {±1}^N` is
//! `E(s) = -1/2 Σ_ij J_ij s_i s_j - Σ_i h_i s_i` with symmetric `J` and
//! zero diagonal.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spin count accepted by [`brute_force_solve`].
pub const ENUMERATION_BOUND: usize = 24;
/// Largest spin count accepted by [`energy_landscape`].
pub const LANDSCAPE_BOUND: usize = 16;

/// The hard four-spin instance with a distant non-global local minimum.
pub const HARD_INSTANCE_JSON: &str = include_str!("../data/hard_instance.json");

#[derive(Clone, Debug, PartialEq)]
pub struct IsingInstance {
    n: usize,
    /// Row-major `n × n`.
    couplings: Vec<f64>,
    fields: Vec<f64>,
}

impl IsingInstance {
    /// Builds an instance from a full coupling matrix, checking symmetry and
    /// the zero diagonal exactly.
    pub fn new(couplings: Vec<Vec<f64>>, fields: Vec<f64>) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return Err(Error::InvalidInstance("no spins".into()));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInstance(format!("coupling matrix must be {n} x {n}")));
        }
        let flat: Vec<f64> = couplings.into_iter().flatten().collect();
        for i in 0..n {
            if flat[i * n + i] != 0.0 {
                return Err(Error::InvalidInstance(format!("J[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if flat[i * n + j] != flat[j * n + i] {
                    return Err(Error::InvalidInstance(format!("J is not symmetric at ({i}, {j})")));
                }
            }
        }
        if flat.iter().chain(&fields).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("non-finite coefficient".into()));
        }
        Ok(IsingInstance {
            n,
            couplings: flat,
            fields,
        })
    }

    /// Builds an instance from upper-triangle entries `(i, j, J_ij)` with
    /// 0-based `i < j`; all other couplings are zero.
    pub fn from_upper(n: usize, upper: &[(usize, usize, f64)], fields: Vec<f64>) -> Result<Self> {
        if fields.len() != n {
            return Err(Error::InvalidInstance(format!(
                "expected {n} fields, got {}",
                fields.len()
            )));
        }
        let mut j = vec![vec![0.0; n]; n];
        for &(a, b, v) in upper {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidInstance(format!("bad coupling index pair ({a}, {b})")));
            }
            j[a][b] = v;
            j[b][a] = v;
        }
        Self::new(j, fields)
    }

    /// All couplings and fields zero.
    pub fn zero(n: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; n]; n], vec![0.0; n])
    }

    pub fn hard_instance() -> Self {
        InstanceDocument::from_json(HARD_INSTANCE_JSON)
            .and_then(|d| d.to_instance())
            .expect("bundled instance is valid")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Largest magnitude among all couplings and fields.
    pub fn max_magnitude(&self) -> f64 {
        self.couplings
            .iter()
            .chain(&self.fields)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Divides every coefficient by [`Self::max_magnitude`].
    pub fn normalized(&self) -> Self {
        let scale = self.max_magnitude();
        if scale == 0.0 {
            return self.clone();
        }
        IsingInstance {
            n: self.n,
            couplings: self.couplings.iter().map(|v| v / scale).collect(),
            fields: self.fields.iter().map(|v| v / scale).collect(),
        }
    }

    pub fn energy(&self, s: &SpinConfiguration) -> Result<f64> {
        ising_energy(self, s)
    }
}

/// A configuration of `±1` spins.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInstance("spins must be +1 or -1".into()));
        }
        Ok(SpinConfiguration(spins))
    }

    /// Configuration number `index` in enumeration order: bit `N-1-i` of
    /// `index` clear means `s_i = +1`. Index 0 is all `+1`, so increasing
    /// index is lexicographic order with `+1` ranked first.
    pub fn from_index(n: usize, index: usize) -> Self {
        SpinConfiguration(
            (0..n)
                .map(|i| if (index >> (n - 1 - i)) & 1 == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s == -1))
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self) -> Self {
        SpinConfiguration(self.0.iter().map(|s| -s).collect())
    }

    pub fn hamming(&self, other: &SpinConfiguration) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// `'0'` for `+1`, `'1'` for `-1`, first spin leftmost.
    pub fn bits(&self) -> String {
        self.0.iter().map(|&s| if s == 1 { '0' } else { '1' }).collect()
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

pub fn ising_energy(inst: &IsingInstance, s: &SpinConfiguration) -> Result<f64> {
    let n = inst.size();
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: s.len(),
        });
    }
    let spins: Vec<f64> = s.spins().iter().map(|&v| f64::from(v)).collect();
    let mut pair = 0.0;
    for i in 0..n {
        for j in 0..n {
            pair += inst.coupling(i, j) * spins[i] * spins[j];
        }
    }
    let field: f64 = (0..n).map(|i| inst.field(i) * spins[i]).sum();
    Ok(-0.5 * pair - field)
}

fn check_bound(n: usize, bound: usize) -> Result<()> {
    if n > bound {
        return Err(Error::EnumerationBound { n, bound });
    }
    Ok(())
}

/// Exhaustive search over all `2^N` configurations. Among exact ties the
/// configuration with the smallest enumeration index wins.
pub fn brute_force_solve(inst: &IsingInstance) -> Result<(SpinConfiguration, f64)> {
    let n = inst.size();
    check_bound(n, ENUMERATION_BOUND)?;
    let mut best = (SpinConfiguration::from_index(n, 0), f64::INFINITY);
    for index in 0..1usize << n {
        let s = SpinConfiguration::from_index(n, index);
        let e = ising_energy(inst, &s)?;
        if e < best.1 {
            best = (s, e);
        }
    }
    Ok(best)
}

/// Every configuration whose energy is within `tol` of the minimum.
pub fn ground_states(inst: &IsingInstance, tol: f64) -> Result<(Vec<SpinConfiguration>, f64)> {
    let n = inst.size();
    check_bound(n, ENUMERATION_BOUND)?;
    let energies: Vec<f64> = (0..1usize << n)
        .map(|i| ising_energy(inst, &SpinConfiguration::from_index(n, i)))
        .collect::<Result<_>>()?;
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let optima = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e - min <= tol)
        .map(|(i, _)| SpinConfiguration::from_index(n, i))
        .collect();
    Ok((optima, min))
}

/// Random instance with couplings and fields uniform on `(-1, 1)`, divided by
/// the largest magnitude among all of them.
pub fn random_instance(n: usize, seed: u64) -> Result<IsingInstance> {
    if n < 2 {
        return Err(Error::InvalidInstance(format!(
            "random instances need at least 2 spins, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let v: f64 = rng.gen_range(-1.0..1.0);
        if v != -1.0 {
            break v;
        }
    };
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            upper.push((i, j, draw()));
        }
    }
    let fields: Vec<f64> = (0..n).map(|_| draw()).collect();
    Ok(IsingInstance::from_upper(n, &upper, fields)?.normalized())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub configuration: String,
    pub distance: usize,
    pub energy: f64,
}

/// All `2^N` configurations with their energy and Hamming distance from the
/// [`brute_force_solve`] minimizer, in enumeration order.
pub fn energy_landscape(inst: &IsingInstance) -> Result<Vec<LandscapeRow>> {
    let n = inst.size();
    check_bound(n, LANDSCAPE_BOUND)?;
    let (optimum, _) = brute_force_solve(inst)?;
    (0..1usize << n)
        .map(|i| {
            let s = SpinConfiguration::from_index(n, i);
            Ok(LandscapeRow {
                configuration: s.bits(),
                distance: s.hamming(&optimum),
                energy: ising_energy(inst, &s)?,
            })
        })
        .collect()
}

/// Configurations whose single-flip neighbours all have strictly higher energy.
pub fn local_minima(inst: &IsingInstance) -> Result<Vec<SpinConfiguration>> {
    let n = inst.size();
    check_bound(n, LANDSCAPE_BOUND)?;
    let energies: Vec<f64> = (0..1usize << n)
        .map(|i| ising_energy(inst, &SpinConfiguration::from_index(n, i)))
        .collect::<Result<_>>()?;
    Ok((0..1usize << n)
        .filter(|&i| (0..n).all(|b| energies[i ^ (1 << b)] > energies[i]))
        .map(|i| SpinConfiguration::from_index(n, i))
        .collect())
}

/// On-disk instance document. Indices are 1-based and coefficients are
/// decimal strings, e.g. `["1", "2", "0.266654"]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub n: usize,
    pub j_upper: Vec<(usize, usize, String)>,
    pub h: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_instance(&self) -> Result<IsingInstance> {
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInstance(format!("bad coefficient {s:?}")))
        };
        let mut upper = Vec::with_capacity(self.j_upper.len());
        for (i, j, v) in &self.j_upper {
            if *i == 0 || *j == 0 || i >= j {
                return Err(Error::InvalidInstance(format!(
                    "j_upper entries need 1 <= i < j, got ({i}, {j})"
                )));
            }
            upper.push((i - 1, j - 1, parse(v)?));
        }
        let fields = self.h.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        IsingInstance::from_upper(self.n, &upper, fields)
    }

    /// Encodes with 17 significant digits so the round trip is exact.
    pub fn from_instance(inst: &IsingInstance) -> Self {
        let n = inst.size();
        let fmt = |v: f64| format!("{v:.17e}");
        let mut j_upper = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let v = inst.coupling(i, j);
                if v != 0.0 {
                    j_upper.push((i + 1, j + 1, fmt(v)));
                }
            }
        }
        InstanceDocument {
            n,
            j_upper,
            h: inst.fields().iter().map(|&v| fmt(v)).collect(),
            name: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(spins: &[i8]) -> SpinConfiguration {
        SpinConfiguration::new(spins.to_vec()).unwrap()
    }

    #[test]
    fn trivial_energies() {
        let zero = IsingInstance::zero(3).unwrap();
        assert_eq!(ising_energy(&zero, &cfg(&[1, -1, 1])).unwrap(), 0.0);

        let pair = IsingInstance::from_upper(2, &[(0, 1, 1.0)], vec![0.0, 0.0]).unwrap();
        assert_eq!(ising_energy(&pair, &cfg(&[1, 1])).unwrap(), -1.0);
        assert!(ising_energy(&pair, &cfg(&[1])).is_err());
    }

    #[test]
    fn hard_instance_all_up_energy() {
        // -(J12 + J13 + J14 + J23 + J24 + J34) - (h1 + h2 + h3 + h4), by hand
        let j_sum: f64 = 0.266654 + 0.886155 + 0.019833 + 0.071362 - 0.446931 - 1.0;
        let h_sum: f64 = -0.340697 - 0.546404 + 0.501731 - 0.296651;
        let expected = -j_sum - h_sum;
        assert!((expected - 0.884948).abs() < 1e-12);
        let inst = IsingInstance::hard_instance();
        let e = ising_energy(&inst, &cfg(&[1, 1, 1, 1])).unwrap();
        assert!((e - expected).abs() < 1e-12, "{e}");
    }

    #[test]
    fn rejects_asymmetric_and_diagonal() {
        assert!(IsingInstance::new(vec![vec![0.0, 1.0], vec![0.5, 0.0]], vec![0.0; 2]).is_err());
        assert!(IsingInstance::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0; 2]).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        let one = IsingInstance::new(vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(brute_force_solve(&one).unwrap(), (cfg(&[1]), -1.0));

        let two = IsingInstance::new(vec![vec![0.0; 2]; 2], vec![1.0, -1.0]).unwrap();
        assert_eq!(brute_force_solve(&two).unwrap(), (cfg(&[1, -1]), -2.0));

        let zero = IsingInstance::zero(3).unwrap();
        assert_eq!(brute_force_solve(&zero).unwrap().0, cfg(&[1, 1, 1]));

        let big = IsingInstance::zero(25).unwrap();
        assert!(matches!(brute_force_solve(&big), Err(Error::EnumerationBound { .. })));
    }

    #[test]
    fn hard_instance_landscape() {
        let inst = IsingInstance::hard_instance();
        let (opt, e_min) = brute_force_solve(&inst).unwrap();
        // Enumerated by hand from the printed coefficients.
        assert_eq!(opt, cfg(&[-1, -1, -1, 1]));
        assert!((e_min - (-2.739988)).abs() < 1e-9, "{e_min}");

        let landscape = energy_landscape(&inst).unwrap();
        assert_eq!(landscape.len(), 16);
        let opt_row = &landscape[opt.index()];
        assert_eq!(opt_row.distance, 0);
        assert_eq!(opt_row.energy, e_min);
        assert_eq!(landscape[opt.flipped().index()].distance, 4);

        let (optima, _) = ground_states(&inst, 1e-9).unwrap();
        assert_eq!(optima.len(), 1);

        let far_minima: Vec<_> = local_minima(&inst)
            .unwrap()
            .into_iter()
            .filter(|s| s.hamming(&opt) >= 2)
            .collect();
        assert!(!far_minima.is_empty());
    }

    #[test]
    fn random_instance_is_deterministic_and_normalized() {
        let a = random_instance(4, 7).unwrap();
        let b = random_instance(4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_instance(4, 8).unwrap());
        assert!((a.max_magnitude() - 1.0).abs() < 1e-15);
        assert!(random_instance(1, 0).is_err());
    }

    #[test]
    fn document_round_trip() {
        let inst = random_instance(5, 3).unwrap();
        let doc = InstanceDocument::from_instance(&inst);
        let back = InstanceDocument::from_json(&doc.to_json().unwrap())
            .unwrap()
            .to_instance()
            .unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn bundled_fixture_is_verbatim() {
        let doc = InstanceDocument::from_json(HARD_INSTANCE_JSON).unwrap();
        assert_eq!(doc.j_upper[0], (1, 2, "0.266654".to_string()));
        assert_eq!(doc.h[3], "-0.296651");
    }

    fn arb_instance() -> impl Strategy<Value = IsingInstance> {
        (2usize..=8, any::<u64>()).prop_map(|(n, seed)| random_instance(n, seed).unwrap())
    }

    proptest! {
        #[test]
        fn global_flip_symmetry(inst in arb_instance(), idx in any::<usize>()) {
            let n = inst.size();
            let s = SpinConfiguration::from_index(n, idx % (1 << n));
            let flipped_fields = IsingInstance::from_upper(
                n,
                &(0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (i, j, inst.coupling(i, j))).collect::<Vec<_>>(),
                inst.fields().iter().map(|h| -h).collect(),
            ).unwrap();
            let e1 = ising_energy(&inst, &s).unwrap();
            let e2 = ising_energy(&flipped_fields, &s.flipped()).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
        }

        #[test]
        fn relabeling_invariance(inst in arb_instance(), idx in any::<usize>(), rot in 1usize..8) {
            let n = inst.size();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let j: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| inst.coupling(perm[a], perm[b])).collect()).collect();
            let h: Vec<f64> = (0..n).map(|a| inst.field(perm[a])).collect();
            let relabeled = IsingInstance::new(j, h).unwrap();
            let s = SpinConfiguration::from_index(n, idx % (1 << n));
            let s_perm = SpinConfiguration::new((0..n).map(|a| s.spins()[perm[a]]).collect()).unwrap();
            let e1 = ising_energy(&inst, &s).unwrap();
            let e2 = ising_energy(&relabeled, &s_perm).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
        }

        #[test]
        fn brute_force_matches_landscape_min(inst in arb_instance()) {
            let (_, e) = brute_force_solve(&inst).unwrap();
            let min = energy_landscape(&inst).unwrap().iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(e, min);
        }
    }
}
