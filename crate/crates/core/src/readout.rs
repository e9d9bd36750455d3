//! Spin readout of oscillator states.
//!
//! Each oscillator is read out by the sign of its quadrature
//! `x = (a + a†)/√2`: a final coherent state `|+α>` maps to `s = +1` and
//! `|-α>` to `s = -1`. In the Fock basis the projector onto `x > 0` has
//! entries `P_mn = ∫_0^∞ ψ_m(x) ψ_n(x) dx` with `ψ_n` the harmonic-oscillator
//! eigenfunctions; `P(-) = I - P(+)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockCutoff, QuantumState};
use crate::ising::{ground_states, ising_energy, IsingInstance, SpinConfiguration};

/// Tolerance on `Σ_s P(s) - 1` for a normalized state.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;
/// Energies within this of the minimum count as optimal.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..(order + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            let prev = if order <= 1 { 1.0 } else { p0 };
            dp = n * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Values `ψ_0(x) .. ψ_(count-1)(x)` of the normalized Hermite functions.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if count > 1 {
        out.push(std::f64::consts::SQRT_2 * x * psi0);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out.truncate(count);
    out
}

/// Projector onto positive quadrature in the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SignProjector {
    levels: usize,
    /// Row-major `levels × levels`.
    plus: Vec<f64>,
}

impl SignProjector {
    /// Off-diagonal entries with odd `m - n` come from composite
    /// Gauss–Legendre quadrature on `[0, X]`, far past the classical turning
    /// point of the highest level. Symmetry fixes the rest exactly: the
    /// diagonal is `1/2` and same-parity off-diagonal entries vanish.
    pub fn build(cutoff: FockCutoff) -> Self {
        let levels = cutoff.levels();
        let x_max = (2.0 * levels as f64 + 1.0).sqrt() + 12.0;
        let panels = 8 * levels.max(8);
        let (nodes, weights) = gauss_legendre(24);
        let width = x_max / panels as f64;
        let mut plus = vec![0.0; levels * levels];
        for p in 0..panels {
            let a = p as f64 * width;
            for (&node, &w) in nodes.iter().zip(&weights) {
                let x = a + 0.5 * width * (node + 1.0);
                let psi = hermite_functions(x, levels);
                let w = 0.5 * width * w;
                for m in 0..levels {
                    for n in (m + 1..levels).step_by(2) {
                        plus[m * levels + n] += w * psi[m] * psi[n];
                    }
                }
            }
        }
        for m in 0..levels {
            plus[m * levels + m] = 0.5;
            for n in (m + 1..levels).step_by(2) {
                plus[n * levels + m] = plus[m * levels + n];
            }
        }
        SignProjector { levels, plus }
    }

    /// Shared projector for a cutoff, built on first use.
    pub fn cached(cutoff: FockCutoff) -> Arc<SignProjector> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SignProjector>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(cutoff.levels())
            .or_insert_with(|| Arc::new(SignProjector::build(cutoff)))
            .clone()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `<m|P(+)|n>`.
    pub fn plus(&self, m: usize, n: usize) -> f64 {
        self.plus[m * self.levels + n]
    }

    /// `<m|P(s)|n>` for `s = ±1`.
    pub fn entry(&self, sign: i8, m: usize, n: usize) -> f64 {
        let p = self.plus(m, n);
        if sign > 0 {
            p
        } else {
            f64::from(u8::from(m == n)) - p
        }
    }

    /// `|(P² - P)_00|`; nonzero only through truncation.
    pub fn vacuum_idempotency_defect(&self) -> f64 {
        let sq: f64 = (0..self.levels).map(|k| self.plus(0, k).powi(2)).sum();
        (sq - self.plus(0, 0)).abs()
    }
}

/// Readout probabilities indexed in spin-configuration enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigurationProbabilities {
    modes: usize,
    probs: Vec<f64>,
}

impl ConfigurationProbabilities {
    pub fn new(modes: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << modes {
            return Err(Error::DimensionMismatch {
                expected: 1 << modes,
                actual: probs.len(),
            });
        }
        Ok(ConfigurationProbabilities { modes, probs })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn get(&self, s: &SpinConfiguration) -> f64 {
        self.probs[s.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpinConfiguration, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (SpinConfiguration::from_index(self.modes, i), p))
    }

    /// Keyed by configuration bit string (`'0'` for `+1`).
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(s, p)| (s.bits(), p)).collect()
    }
}

/// Applies `P(sign)` along `mode` of a complex state vector.
fn project_axis(proj: &SignProjector, sign: i8, x: &[Complex64], stride: usize, out: &mut [Complex64]) {
    let levels = proj.levels();
    let block = levels * stride;
    let mut matrix = vec![0.0; levels * levels];
    for m in 0..levels {
        for n in 0..levels {
            matrix[m * levels + n] = proj.entry(sign, m, n);
        }
    }
    for (xb, ob) in x.chunks_exact(block).zip(out.chunks_exact_mut(block)) {
        ob.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for m in 0..levels {
            let orow = &mut ob[m * stride..(m + 1) * stride];
            for n in 0..levels {
                let c = matrix[m * levels + n];
                if c == 0.0 {
                    continue;
                }
                let xrow = &xb[n * stride..(n + 1) * stride];
                for (o, v) in orow.iter_mut().zip(xrow) {
                    *o += v * c;
                }
            }
        }
    }
}

/// `P(s) = <ψ| ⊗_i P(s_i) |ψ>` for every sign pattern `s`.
pub fn configuration_probabilities(state: &QuantumState, proj: &SignProjector) -> Result<ConfigurationProbabilities> {
    if proj.levels() != state.cutoff().levels() {
        return Err(Error::DimensionMismatch {
            expected: state.cutoff().levels(),
            actual: proj.levels(),
        });
    }
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::NotNormalized(n2));
    }
    let modes = state.modes();
    let layout = state.layout();
    let mut probs = vec![0.0; 1 << modes];
    // Depth-first over modes, one buffer per depth.
    let mut buffers: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); state.dim()]; modes];
    fn recurse(
        depth: usize,
        index: usize,
        src: &[Complex64],
        buffers: &mut [Vec<Complex64>],
        psi: &[Complex64],
        layout: &crate::fock::TensorLayout,
        proj: &SignProjector,
        probs: &mut [f64],
    ) {
        let modes = layout.modes();
        for (bit, sign) in [(0usize, 1i8), (1, -1)] {
            let (head, tail) = buffers.split_at_mut(1);
            project_axis(proj, sign, src, layout.stride(depth), &mut head[0]);
            let next = (index << 1) | bit;
            if depth + 1 == modes {
                probs[next] = psi.iter().zip(head[0].iter()).map(|(a, b)| (a.conj() * b).re).sum();
            } else {
                recurse(depth + 1, next, &head[0], tail, psi, layout, proj, probs);
            }
        }
    }
    recurse(
        0,
        0,
        state.amplitudes(),
        &mut buffers,
        state.amplitudes(),
        layout,
        proj,
        &mut probs,
    );

    let raw_total: f64 = probs.iter().sum();
    if (raw_total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::NotNormalized(raw_total));
    }
    probs.iter_mut().for_each(|p| *p = p.max(0.0));
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    ConfigurationProbabilities::new(modes, probs)
}

/// Readout statistics of one final state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Keyed by configuration bit string (`'0'` for `+1`, first spin leftmost).
    pub config_probs: BTreeMap<String, f64>,
    pub failure_probability: f64,
    pub success_probability: f64,
    pub residual_energy: f64,
}

impl RunMetrics {
    pub fn from_probabilities(probs: &ConfigurationProbabilities, inst: &IsingInstance) -> Result<Self> {
        if probs.modes() != inst.size() {
            return Err(Error::DimensionMismatch {
                expected: inst.size(),
                actual: probs.modes(),
            });
        }
        let (optima, e_min) = ground_states(inst, DEGENERACY_TOLERANCE)?;
        let success: f64 = optima.iter().map(|s| probs.get(s)).sum();
        let mean_energy = probs
            .iter()
            .map(|(s, p)| Ok(p * ising_energy(inst, &s)?))
            .sum::<Result<f64>>()?;
        let success = success.clamp(0.0, 1.0);
        Ok(RunMetrics {
            config_probs: probs.to_map(),
            failure_probability: 1.0 - success,
            success_probability: success,
            residual_energy: mean_energy - e_min,
        })
    }
}

/// Readout of a single state against an instance.
pub fn compute_metrics(state: &QuantumState, inst: &IsingInstance, proj: &SignProjector) -> Result<RunMetrics> {
    let probs = configuration_probabilities(state, proj)?;
    RunMetrics::from_probabilities(&probs, inst)
}

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std_error = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error }
    }
}

/// Trajectory-averaged readout statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMetrics {
    pub trajectories: usize,
    /// Metrics of the averaged readout distribution.
    pub mean: RunMetrics,
    pub success: Estimate,
    pub failure: Estimate,
    pub residual_energy: Estimate,
    pub mean_jumps: f64,
}

impl EnsembleMetrics {
    pub fn from_runs(runs: Vec<RunMetrics>, jumps: Vec<usize>) -> Result<Self> {
        let n = runs.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        }
        let mut config_probs: BTreeMap<String, f64> = BTreeMap::new();
        for r in &runs {
            for (k, v) in &r.config_probs {
                *config_probs.entry(k.clone()).or_default() += v / n as f64;
            }
        }
        let col = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<_>>();
        let success = Estimate::from_samples(&col(|r| r.success_probability));
        let failure = Estimate::from_samples(&col(|r| r.failure_probability));
        let residual_energy = Estimate::from_samples(&col(|r| r.residual_energy));
        Ok(EnsembleMetrics {
            trajectories: n,
            mean: RunMetrics {
                config_probs,
                failure_probability: failure.mean,
                success_probability: success.mean,
                residual_energy: residual_energy.mean,
            },
            success,
            failure,
            residual_energy,
            mean_jumps: jumps.iter().sum::<usize>() as f64 / n as f64,
        })
    }
}
