//! Truncated Fock spaces for a register of bosonic modes.
//!
//! A register of `N` modes, each truncated to `levels` photon-number states,
//! is stored as a dense amplitude vector of length `levels^N`. Basis index
//! layout is mixed-radix with mode 0 slowest:
//!
//! ```text
//! index = n_0 * levels^(N-1) + n_1 * levels^(N-2) + ... + n_(N-1)
//! ```
//!
//! so the last mode is contiguous in memory. Operators are never
//! materialized at full dimension; they act by strided loops over this
//! index.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of retained Fock states per mode (photon numbers `0..levels`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub const DEFAULT_LEVELS: usize = 15;

    pub fn new(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidCutoff(levels));
        }
        Ok(FockCutoff(levels))
    }

    pub fn levels(self) -> usize {
        self.0
    }

    /// Largest representable photon number.
    pub fn max_photons(self) -> usize {
        self.0 - 1
    }
}

impl Default for FockCutoff {
    fn default() -> Self {
        FockCutoff(Self::DEFAULT_LEVELS)
    }
}

impl TryFrom<usize> for FockCutoff {
    type Error = Error;

    fn try_from(levels: usize) -> Result<Self> {
        FockCutoff::new(levels)
    }
}

impl From<FockCutoff> for usize {
    fn from(c: FockCutoff) -> usize {
        c.0
    }
}

/// Index arithmetic for the tensor product of `modes` truncated Fock spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorLayout {
    modes: usize,
    levels: usize,
    dim: usize,
    strides: Vec<usize>,
}

impl TensorLayout {
    pub fn new(modes: usize, cutoff: FockCutoff) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("mode count must be at least 1".into()));
        }
        let levels = cutoff.levels();
        let dim = (0..modes)
            .try_fold(1usize, |acc, _| acc.checked_mul(levels))
            .ok_or_else(|| Error::InvalidParameter(format!("{levels}^{modes} overflows the address space")))?;
        let mut strides = vec![1usize; modes];
        for i in (0..modes.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * levels;
        }
        Ok(TensorLayout {
            modes,
            levels,
            dim,
            strides,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Photon number of `mode` in basis state `index`.
    #[inline]
    pub fn photons(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.levels
    }

    pub fn photon_numbers(&self, index: usize) -> Vec<usize> {
        (0..self.modes).map(|m| self.photons(index, m)).collect()
    }

    pub fn index_of(&self, photons: &[usize]) -> Result<usize> {
        if photons.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                actual: photons.len(),
            });
        }
        let mut index = 0;
        for (mode, &n) in photons.iter().enumerate() {
            if n >= self.levels {
                return Err(Error::InvalidParameter(format!(
                    "photon number {n} exceeds cutoff of {} levels",
                    self.levels
                )));
            }
            index += n * self.strides[mode];
        }
        Ok(index)
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            });
        }
        Ok(())
    }
}

/// Complex amplitude vector over `levels^N` photon-number basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: TensorLayout,
    cutoff: FockCutoff,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Wraps raw amplitudes; the length must be exactly `levels^modes`.
    pub fn from_amplitudes(modes: usize, cutoff: FockCutoff, amplitudes: Vec<Complex64>) -> Result<Self> {
        let layout = TensorLayout::new(modes, cutoff)?;
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                actual: amplitudes.len(),
            });
        }
        Ok(QuantumState {
            layout,
            cutoff,
            amplitudes,
        })
    }

    pub fn zeros(modes: usize, cutoff: FockCutoff) -> Result<Self> {
        let layout = TensorLayout::new(modes, cutoff)?;
        let amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
        Ok(QuantumState {
            layout,
            cutoff,
            amplitudes,
        })
    }

    pub fn basis(modes: usize, cutoff: FockCutoff, photons: &[usize]) -> Result<Self> {
        let mut state = Self::zeros(modes, cutoff)?;
        let index = state.layout.index_of(photons)?;
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// All modes empty.
    pub fn vacuum(modes: usize, cutoff: FockCutoff) -> Result<Self> {
        Self::basis(modes, cutoff, &vec![0; modes])
    }

    /// One photon in `mode`, all other modes empty.
    pub fn single_photon(modes: usize, mode: usize, cutoff: FockCutoff) -> Result<Self> {
        if mode >= modes {
            return Err(Error::ModeOutOfRange { mode, modes });
        }
        let mut photons = vec![0; modes];
        photons[mode] = 1;
        Self::basis(modes, cutoff, &photons)
    }

    /// Product of truncated coherent states `|alpha_0> ⊗ ... ⊗ |alpha_(N-1)>`,
    /// each renormalized after truncation.
    pub fn coherent_product(alphas: &[Complex64], cutoff: FockCutoff) -> Result<Self> {
        let levels = cutoff.levels();
        let factors: Vec<Vec<Complex64>> = alphas
            .iter()
            .map(|&alpha| {
                let mut amps = Vec::with_capacity(levels);
                let mut term = Complex64::new(1.0, 0.0);
                for n in 0..levels {
                    if n > 0 {
                        term = term * alpha / (n as f64).sqrt();
                    }
                    amps.push(term);
                }
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                amps.iter().map(|a| a / norm).collect()
            })
            .collect();
        Self::product(&factors, cutoff)
    }

    /// Tensor product of single-mode amplitude vectors.
    pub fn product(factors: &[Vec<Complex64>], cutoff: FockCutoff) -> Result<Self> {
        let mut state = Self::zeros(factors.len(), cutoff)?;
        for f in factors {
            if f.len() != cutoff.levels() {
                return Err(Error::DimensionMismatch {
                    expected: cutoff.levels(),
                    actual: f.len(),
                });
            }
        }
        let layout = state.layout.clone();
        for (index, amp) in state.amplitudes.iter_mut().enumerate() {
            *amp = factors
                .iter()
                .enumerate()
                .map(|(m, f)| f[layout.photons(index, m)])
                .product();
        }
        Ok(state)
    }

    pub fn modes(&self) -> usize {
        self.layout.modes()
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the squared norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::NotNormalized(n2));
        }
        let scale = 1.0 / n2.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(n2)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn check_same_shape(&self, other: &QuantumState) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    /// Photon-number distribution of one mode.
    pub fn mode_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        self.layout.check_mode(mode)?;
        let mut dist = vec![0.0; self.layout.levels()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            dist[self.layout.photons(index, mode)] += a.norm_sqr();
        }
        let n2 = self.norm_sqr();
        dist.iter_mut().for_each(|p| *p /= n2);
        Ok(dist)
    }

    /// `<a_i† a_i>` for every mode, for the normalized state.
    pub fn mean_photons(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.modes()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (mode, m) in means.iter_mut().enumerate() {
                *m += p * self.layout.photons(index, mode) as f64;
            }
        }
        let n2 = self.norm_sqr();
        means.iter_mut().for_each(|m| *m /= n2);
        means
    }

    /// Population of the highest retained Fock level, maximized over modes.
    /// Values well above zero indicate the cutoff is too small.
    pub fn top_level_leakage(&self) -> f64 {
        (0..self.modes())
            .map(|m| self.mode_distribution(m).map(|d| d[d.len() - 1]).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    /// Expectation of the global photon parity `(-1)^(Σ n_i)`.
    pub fn parity(&self) -> f64 {
        let mut acc = 0.0;
        for (index, a) in self.amplitudes.iter().enumerate() {
            let total: usize = (0..self.modes()).map(|m| self.layout.photons(index, m)).sum();
            let sign = if total % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * a.norm_sqr();
        }
        acc / self.norm_sqr()
    }
}

/// Single-mode operators with banded matrices in the Fock basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeOperator {
    /// `a`
    Annihilate,
    /// `a†`
    Create,
    /// `a† a`
    Number,
    /// `a²`
    AnnihilatePair,
    /// `a†²`
    CreatePair,
    /// `a†² a²`
    Kerr,
    /// `a + a†`
    Quadrature,
}

impl ModeOperator {
    /// Matrix element `<n + offset| op |n>` entries as `(offset, coefficient(n))`
    /// where `n` is the input photon number.
    fn bands(self) -> &'static [(isize, fn(usize) -> f64)] {
        fn lower1(n: usize) -> f64 {
            (n as f64).sqrt()
        }
        fn raise1(n: usize) -> f64 {
            (n as f64 + 1.0).sqrt()
        }
        fn lower2(n: usize) -> f64 {
            ((n * n.saturating_sub(1)) as f64).sqrt()
        }
        fn raise2(n: usize) -> f64 {
            (((n + 1) * (n + 2)) as f64).sqrt()
        }
        fn number(n: usize) -> f64 {
            n as f64
        }
        fn kerr(n: usize) -> f64 {
            (n * n.saturating_sub(1)) as f64
        }
        match self {
            ModeOperator::Annihilate => &[(-1, lower1)],
            ModeOperator::Create => &[(1, raise1)],
            ModeOperator::Number => &[(0, number)],
            ModeOperator::AnnihilatePair => &[(-2, lower2)],
            ModeOperator::CreatePair => &[(2, raise2)],
            ModeOperator::Kerr => &[(0, kerr)],
            ModeOperator::Quadrature => &[(-1, lower1), (1, raise1)],
        }
    }

    /// Dense `levels × levels` truncated matrix, row-major.
    pub fn matrix(self, levels: usize) -> Vec<f64> {
        let mut m = vec![0.0; levels * levels];
        for n in 0..levels {
            for &(offset, coef) in self.bands() {
                let out = n as isize + offset;
                if (0..levels as isize).contains(&out) {
                    m[out as usize * levels + n] = coef(n);
                }
            }
        }
        m
    }
}

/// Applies a single-mode operator to `mode`, leaving the result unnormalized.
/// Amplitude pushed above the cutoff is discarded.
pub fn apply_mode_operator(state: &QuantumState, mode: usize, op: ModeOperator) -> Result<QuantumState> {
    let layout = state.layout();
    layout.check_mode(mode)?;
    let stride = layout.stride(mode) as isize;
    let levels = layout.levels() as isize;
    let mut out = QuantumState::zeros(state.modes(), state.cutoff())?;
    for (index, &amp) in state.amplitudes().iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let n = layout.photons(index, mode);
        for &(offset, coef) in op.bands() {
            let target = n as isize + offset;
            if (0..levels).contains(&target) {
                let j = (index as isize + offset * stride) as usize;
                out.amplitudes[j] += amp * coef(n);
            }
        }
    }
    Ok(out)
}

/// Applies `a_i† a_j` for distinct modes `i`, `j`.
pub fn apply_hopping(state: &QuantumState, i: usize, j: usize) -> Result<QuantumState> {
    let layout = state.layout();
    layout.check_mode(i)?;
    layout.check_mode(j)?;
    if i == j {
        return Err(Error::SameMode(i));
    }
    let levels = layout.levels();
    let (si, sj) = (layout.stride(i), layout.stride(j));
    let mut out = QuantumState::zeros(state.modes(), state.cutoff())?;
    for (index, &amp) in state.amplitudes().iter().enumerate() {
        let ni = layout.photons(index, i);
        let nj = layout.photons(index, j);
        if nj == 0 || ni + 1 >= levels {
            continue;
        }
        let target = index + si - sj;
        out.amplitudes[target] += amp * ((nj as f64) * (ni as f64 + 1.0)).sqrt();
    }
    Ok(out)
}
