//! Time-dependent Hamiltonian of a network of Kerr parametric oscillators.
//!
//! In units `ħ = K = 1` the network Hamiltonian is
//!
//! ```text
//! H(t) = Σ_i [ K/2 a_i†² a_i² + Δ_i(t) a_i† a_i - p(t)/2 (a_i² + a_i†²) ]
//!      + ξ(t) [ -Σ_ij J_ij a_i† a_j - A(t) Σ_i h_i (a_i + a_i†) ]
//! ```
//!
//! with the sinusoidal sweep `p = p_f sin(πt/2T)`, `Δ_i = Δ_i⁰ cos(πt/2T)`,
//! `ξ = ξ_f sin(πt/2T)` and `A = sqrt(p/K)`. Photon loss at rate `κ` adds
//! the anti-Hermitian part `-iκ Σ_i a_i† a_i`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockCutoff, QuantumState, TensorLayout};
use crate::ising::IsingInstance;

/// Physical parameters of the sweep, in units of `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpoParameters {
    pub kerr: f64,
    pub pump_final: f64,
    pub coupling_final: f64,
    /// Initial detuning of every oscillator.
    pub detunings: Vec<f64>,
    pub duration: f64,
    #[serde(default)]
    pub decay_rate: f64,
}

impl KpoParameters {
    /// `p_f = 4K`, `ξ_f = K/4`, `Δ⁰ = K` for every mode, `T = 400/K`, `κ = 0`.
    pub fn defaults(modes: usize) -> Self {
        KpoParameters {
            kerr: 1.0,
            pump_final: 4.0,
            coupling_final: 0.25,
            detunings: vec![1.0; modes],
            duration: 400.0,
            decay_rate: 0.0,
        }
    }

    pub fn with_decay_rate(mut self, kappa: f64) -> Self {
        self.decay_rate = kappa;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn modes(&self) -> usize {
        self.detunings.len()
    }

    /// Final coherent amplitude `sqrt(p_f / K)`.
    pub fn final_amplitude(&self) -> f64 {
        (self.pump_final / self.kerr).sqrt()
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let k = self.kerr;
        if !(k > 0.0 && k.is_finite()) {
            return bad(format!("Kerr coefficient must be positive, got {k}"));
        }
        if !(self.pump_final > k) {
            return bad(format!(
                "final pump {} must exceed the Kerr coefficient {k}",
                self.pump_final
            ));
        }
        if !(self.coupling_final > 0.0 && self.coupling_final < k) {
            return bad(format!("final coupling {} must lie in (0, K)", self.coupling_final));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.decay_rate >= 0.0 && self.decay_rate.is_finite()) {
            return bad(format!("decay rate must be >= 0, got {}", self.decay_rate));
        }
        if self.detunings.len() != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                actual: self.detunings.len(),
            });
        }
        if let Some(d) = self.detunings.iter().find(|&&d| !(d > -k / 2.0) || !d.is_finite()) {
            return bad(format!("initial detuning {d} must exceed -K/2"));
        }
        Ok(())
    }
}

/// Instantaneous control values `(p, Δ, ξ, A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleValues {
    pub pump: f64,
    pub detunings: Vec<f64>,
    pub coupling: f64,
    pub drive: f64,
}

/// Time dependence of the controls over `[0, duration]`.
pub trait Schedule: Sync {
    fn duration(&self) -> f64;

    /// Values at `t`; callers guarantee `0 <= t <= duration`.
    fn values(&self, t: f64) -> ScheduleValues;
}

/// The sinusoidal annealing sweep.
#[derive(Clone, Debug)]
pub struct SinusoidalSchedule {
    params: KpoParameters,
}

impl SinusoidalSchedule {
    pub fn new(params: KpoParameters) -> Self {
        SinusoidalSchedule { params }
    }

    pub fn params(&self) -> &KpoParameters {
        &self.params
    }
}

impl Schedule for SinusoidalSchedule {
    fn duration(&self) -> f64 {
        self.params.duration
    }

    fn values(&self, t: f64) -> ScheduleValues {
        let p = &self.params;
        let phase = FRAC_PI_2 * t / p.duration;
        // Pin the endpoints so the boundary identities are exact.
        let (sin, cos) = if t <= 0.0 {
            (0.0, 1.0)
        } else if t >= p.duration {
            (1.0, 0.0)
        } else {
            phase.sin_cos()
        };
        let pump = p.pump_final * sin;
        ScheduleValues {
            pump,
            detunings: p.detunings.iter().map(|d| d * cos).collect(),
            coupling: p.coupling_final * sin,
            drive: (pump / p.kerr).sqrt(),
        }
    }
}

/// Controls held constant for a fixed duration.
#[derive(Clone, Debug)]
pub struct FrozenSchedule {
    pub values: ScheduleValues,
    pub duration: f64,
}

impl Schedule for FrozenSchedule {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn values(&self, _t: f64) -> ScheduleValues {
        self.values.clone()
    }
}

/// `(p, Δ, ξ, A)` of the sinusoidal sweep at `t`.
pub fn schedule_at(params: &KpoParameters, t: f64) -> Result<ScheduleValues> {
    if !(0.0..=params.duration).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            duration: params.duration,
        });
    }
    Ok(SinusoidalSchedule::new(params.clone()).values(t))
}

/// Matrix-free action of the network Hamiltonian (and its non-Hermitian
/// extension) on register states.
///
/// The trailing modes form contiguous blocks ("planes") whose internal terms
/// use precomputed weight vectors; the leading modes select the plane and
/// contribute scaled copies of neighbouring planes.
#[derive(Clone, Debug)]
pub struct KpoNetwork {
    layout: TensorLayout,
    cutoff: FockCutoff,
    kerr: f64,
    decay_rate: f64,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    sqrt: Vec<f64>,
    /// First mode inside a plane.
    plane_start: usize,
    plane: usize,
    /// Photon numbers of modes `0..plane_start` for each plane.
    prefix_photons: Vec<u8>,
    /// Photon number of each plane mode at each plane offset.
    plane_counts: Vec<Vec<u8>>,
    plane_total: Vec<f64>,
    /// `sqrt(n+1)` for plane mode `q`, zero at the top level.
    lower1: Vec<Vec<f64>>,
    /// `sqrt(n)`, the weight of `a†` read from one level down.
    raise1: Vec<Vec<f64>>,
    /// `sqrt((n+1)(n+2))`, zero in the top two levels.
    lower2: Vec<Vec<f64>>,
    /// `sqrt(n(n-1))`.
    raise2: Vec<Vec<f64>>,
    /// `(q, r, fwd, rev)` for `q < r`: `fwd = sqrt(n_r) sqrt(n_q+1)` weights
    /// `a_r† a_q` and `rev = sqrt(n_q) sqrt(n_r+1)` weights `a_q† a_r`.
    plane_hops: Vec<(usize, usize, Vec<f64>, Vec<f64>)>,
}

/// Smallest number of trailing modes whose block reaches this size.
const MIN_PLANE: usize = 128;

impl KpoNetwork {
    pub fn new(inst: &IsingInstance, kerr: f64, decay_rate: f64, cutoff: FockCutoff) -> Result<Self> {
        Self::with_min_plane(inst, kerr, decay_rate, cutoff, MIN_PLANE)
    }

    pub(crate) fn with_min_plane(
        inst: &IsingInstance,
        kerr: f64,
        decay_rate: f64,
        cutoff: FockCutoff,
        min_plane: usize,
    ) -> Result<Self> {
        let n = inst.size();
        let layout = TensorLayout::new(n, cutoff)?;
        let levels = cutoff.levels();
        if levels > u8::MAX as usize {
            return Err(Error::InvalidCutoff(levels));
        }
        let mut plane_start = n - 1;
        let mut plane = levels;
        while plane < min_plane && plane_start > 0 {
            plane_start -= 1;
            plane *= levels;
        }
        let planes = layout.dim() / plane;
        let mut prefix_photons = Vec::with_capacity(planes * plane_start);
        for b in 0..planes {
            for m in 0..plane_start {
                prefix_photons.push(layout.photons(b * plane, m) as u8);
            }
        }
        let sqrt: Vec<f64> = (0..levels + 2).map(|k| (k as f64).sqrt()).collect();
        let plane_counts: Vec<Vec<u8>> = (plane_start..n)
            .map(|q| (0..plane).map(|i| layout.photons(i, q) as u8).collect())
            .collect();
        let plane_total = (0..plane)
            .map(|i| plane_counts.iter().map(|c| c[i] as f64).sum())
            .collect();
        let weight = |f: &dyn Fn(usize) -> f64, q: usize| -> Vec<f64> {
            plane_counts[q].iter().map(|&k| f(k as usize)).collect()
        };
        let lower1 = (0..n - plane_start)
            .map(|q| weight(&|k| if k + 1 < levels { sqrt[k + 1] } else { 0.0 }, q))
            .collect();
        let raise1 = (0..n - plane_start).map(|q| weight(&|k| sqrt[k], q)).collect();
        let lower2 = (0..n - plane_start)
            .map(|q| weight(&|k| if k + 2 < levels { sqrt[k + 1] * sqrt[k + 2] } else { 0.0 }, q))
            .collect();
        let raise2 = (0..n - plane_start)
            .map(|q| weight(&|k| sqrt[k] * sqrt[k.saturating_sub(1)], q))
            .collect();
        // sqrt(n_a) sqrt(n_b + 1) where a is raised and b lowered.
        let hop_weight = |a: usize, b: usize| -> Vec<f64> {
            (0..plane)
                .map(|i| {
                    let (na, nb) = (plane_counts[a][i] as usize, plane_counts[b][i] as usize);
                    if nb + 1 < levels {
                        sqrt[na] * sqrt[nb + 1]
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let mut plane_hops = Vec::new();
        for q in 0..n - plane_start {
            for r in q + 1..n - plane_start {
                plane_hops.push((q, r, hop_weight(r, q), hop_weight(q, r)));
            }
        }
        let couplings = (0..n * n).map(|k| inst.coupling(k / n, k % n)).collect();
        Ok(KpoNetwork {
            layout,
            cutoff,
            kerr,
            decay_rate,
            couplings,
            fields: inst.fields().to_vec(),
            sqrt,
            plane_start,
            plane,
            prefix_photons,
            plane_counts,
            plane_total,
            lower1,
            raise1,
            lower2,
            raise2,
            plane_hops,
        })
    }

    pub fn from_params(inst: &IsingInstance, params: &KpoParameters, cutoff: FockCutoff) -> Result<Self> {
        params.validate(inst.size())?;
        Self::new(inst, params.kerr, params.decay_rate, cutoff)
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
        self.layout.dim()
    }

    pub fn kerr(&self) -> f64 {
        self.kerr
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    pub fn with_decay_rate(mut self, kappa: f64) -> Self {
        self.decay_rate = kappa;
        self
    }

    /// `H|ψ>` for the given control values (units `ħ = 1`), unnormalized.
    pub fn apply(&self, v: &ScheduleValues, state: &QuantumState) -> Result<QuantumState> {
        self.apply_with(v, false, state)
    }

    /// `H'|ψ> = (H - iκ Σ a†a)|ψ>`.
    pub fn apply_nonhermitian(&self, v: &ScheduleValues, state: &QuantumState) -> Result<QuantumState> {
        self.apply_with(v, true, state)
    }

    fn apply_with(&self, v: &ScheduleValues, include_decay: bool, state: &QuantumState) -> Result<QuantumState> {
        self.check_state(state)?;
        let x = SplitVec::from_state(self, state);
        let mut y = SplitVec::zeros(self);
        self.apply_split(v, include_decay, 0.0, &x, &mut y)?;
        y.to_state(self)
    }

    /// `<ψ|H|ψ>` for a normalized state.
    pub fn expectation(&self, v: &ScheduleValues, state: &QuantumState) -> Result<f64> {
        let h_psi = self.apply(v, state)?;
        Ok(state.inner(&h_psi)?.re)
    }

    pub(crate) fn check_state(&self, state: &QuantumState) -> Result<()> {
        if state.layout() != &self.layout {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            });
        }
        Ok(())
    }
}

/// Per-stage coefficient tables, built once from [`ScheduleValues`].
struct StageTables {
    /// `K/2 n(n-1) + Δ_i n` for each mode.
    onsite: Vec<Vec<f64>>,
    /// `-p/2 sqrt((n+1)(n+2))`, the `|n> <-> |n+2>` element.
    pair: Vec<f64>,
    /// `-ξ A h_i sqrt(n+1)`, the `|n> <-> |n+1>` element for each mode.
    drive: Vec<Vec<f64>>,
    /// `-p/2`.
    pump: f64,
    /// `ξ A`.
    drive_scale: f64,
    /// `-ξ J_ij`.
    hop: Vec<f64>,
    kappa: f64,
}

/// Split real/imaginary storage with a zero margin of one plane on each
/// side, so shifted reads near the ends stay in bounds.
#[derive(Clone, Debug)]
pub(crate) struct SplitVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pad: usize,
}

impl SplitVec {
    pub fn zeros(net: &KpoNetwork) -> Self {
        let len = net.dim() + 2 * net.plane;
        SplitVec {
            re: vec![0.0; len],
            im: vec![0.0; len],
            pad: net.plane,
        }
    }

    pub fn from_state(net: &KpoNetwork, state: &QuantumState) -> Self {
        let mut v = Self::zeros(net);
        let (re, im) = v.interior_mut();
        for ((r, i), a) in re.iter_mut().zip(im.iter_mut()).zip(state.amplitudes()) {
            *r = a.re;
            *i = a.im;
        }
        v
    }

    pub fn to_state(&self, net: &KpoNetwork) -> Result<QuantumState> {
        let (re, im) = self.interior();
        QuantumState::from_amplitudes(net.modes(), net.cutoff(), join(re, im))
    }

    pub fn interior(&self) -> (&[f64], &[f64]) {
        let n = self.re.len() - self.pad;
        (&self.re[self.pad..n], &self.im[self.pad..n])
    }

    pub fn interior_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        let n = self.re.len() - self.pad;
        (&mut self.re[self.pad..n], &mut self.im[self.pad..n])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn scale(&mut self, c: f64) {
        self.re.iter_mut().for_each(|x| *x *= c);
        self.im.iter_mut().for_each(|x| *x *= c);
    }

    /// `Re <self|other>`.
    pub fn real_inner(&self, other: &SplitVec) -> f64 {
        let a: f64 = self.re.iter().zip(&other.re).map(|(x, y)| x * y).sum();
        let b: f64 = self.im.iter().zip(&other.im).map(|(x, y)| x * y).sum();
        a + b
    }
}

/// Elements per register block of the fused kernel.
const CHUNK: usize = 8;

/// `y += c w x` with `w` indexed by plane offset and `x` by `src + offset`.
#[derive(Clone, Copy)]
struct WeightedTerm {
    c: f64,
    weight: usize,
    src: isize,
}

/// `y += c x` read from `src + offset`.
#[derive(Clone, Copy)]
struct ScalarTerm {
    c: f64,
    src: isize,
}

impl KpoNetwork {
    fn tables(&self, v: &ScheduleValues, include_decay: bool) -> Result<StageTables> {
        let n = self.modes();
        if v.detunings.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: v.detunings.len(),
            });
        }
        let levels = self.layout.levels();
        let s = &self.sqrt;
        let onsite = v
            .detunings
            .iter()
            .map(|&d| {
                (0..levels)
                    .map(|k| 0.5 * self.kerr * (k * k.saturating_sub(1)) as f64 + d * k as f64)
                    .collect()
            })
            .collect();
        let pair = (0..levels).map(|k| -0.5 * v.pump * s[k + 1] * s[k + 2]).collect();
        let drive = self
            .fields
            .iter()
            .map(|&h| (0..levels).map(|k| -v.coupling * v.drive * h * s[k + 1]).collect())
            .collect();
        let hop = self.couplings.iter().map(|&j| -v.coupling * j).collect();
        Ok(StageTables {
            onsite,
            pair,
            drive,
            pump: -0.5 * v.pump,
            drive_scale: v.coupling * v.drive,
            hop,
            kappa: if include_decay { self.decay_rate } else { 0.0 },
        })
    }

    /// `y = (H - shift) x`, or `(H' - shift) x` when `include_decay`.
    pub(crate) fn apply_split(
        &self,
        v: &ScheduleValues,
        include_decay: bool,
        shift: f64,
        x: &SplitVec,
        y: &mut SplitVec,
    ) -> Result<()> {
        let len = self.dim() + 2 * self.plane;
        for v in [&x.re, &x.im, &y.re, &y.im] {
            if v.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    actual: v.len(),
                });
            }
        }
        let tab = self.tables(v, include_decay)?;
        self.kernel(&tab, shift, x, y);
        Ok(())
    }

    fn kernel(&self, tab: &StageTables, shift: f64, x: &SplitVec, y: &mut SplitVec) {
        let n = self.modes();
        let levels = self.layout.levels();
        let ps = self.plane_start;
        let len = self.plane;
        let pad = self.plane as isize;
        let sq = &self.sqrt;
        let kappa = tab.kappa;
        let hop = |i: usize, j: usize| tab.hop[i * n + j];
        let stride = |m: usize| self.layout.stride(m) as isize;

        // Diagonal of a plane, less the reference energy.
        let mut plane_diag = vec![-shift; len];
        for (q, counts) in self.plane_counts.iter().enumerate() {
            let onsite = &tab.onsite[ps + q];
            for (d, &k) in plane_diag.iter_mut().zip(counts) {
                *d += onsite[k as usize];
            }
        }
        let loss: Vec<f64> = self.plane_total.iter().map(|&t| kappa * t).collect();

        // Terms inside a plane carry schedule-scaled weights.
        let mut weights: Vec<Vec<f64>> = Vec::new();
        let mut inner: Vec<WeightedTerm> = Vec::new();
        let mut push = |w: Vec<f64>, src: isize, weights: &mut Vec<Vec<f64>>| {
            inner.push(WeightedTerm {
                c: 1.0,
                weight: weights.len(),
                src,
            });
            weights.push(w);
        };
        let scaled = |c: f64, w: &[f64]| w.iter().map(|x| c * x).collect::<Vec<_>>();
        for q in 0..n - ps {
            let s = stride(ps + q);
            push(scaled(tab.pump, &self.lower2[q]), 2 * s, &mut weights);
            push(scaled(tab.pump, &self.raise2[q]), -2 * s, &mut weights);
            let drive = -tab.drive_scale * self.fields[ps + q];
            if drive != 0.0 {
                push(scaled(drive, &self.lower1[q]), s, &mut weights);
                push(scaled(drive, &self.raise1[q]), -s, &mut weights);
            }
        }
        for (q, r, fwd, rev) in &self.plane_hops {
            let h = hop(ps + q, ps + r);
            if h != 0.0 {
                let off = stride(ps + q) - stride(ps + r);
                push(scaled(h, fwd), off, &mut weights);
                push(scaled(h, rev), -off, &mut weights);
            }
        }
        // Cross-plane hops reuse the static ladder weights.
        let lower_base = weights.len();
        weights.extend(self.lower1.iter().cloned());
        let raise_base = weights.len();
        weights.extend(self.raise1.iter().cloned());

        let mut terms: Vec<WeightedTerm> = Vec::new();
        let mut scalars: Vec<ScalarTerm> = Vec::new();
        let (yr_all, yi_all) = y.interior_mut();
        for (b, (yr, yi)) in yr_all
            .chunks_exact_mut(len)
            .zip(yi_all.chunks_exact_mut(len))
            .enumerate()
        {
            let base = pad + (b * len) as isize;
            let photons = &self.prefix_photons[b * ps..(b + 1) * ps];
            terms.clear();
            scalars.clear();
            terms.extend(inner.iter().map(|t| WeightedTerm {
                src: base + t.src,
                ..*t
            }));

            let mut d0 = 0.0;
            let mut nsum = 0.0;
            for (m, &p) in photons.iter().enumerate() {
                d0 += tab.onsite[m][p as usize];
                nsum += p as f64;
                let p = p as usize;
                let sm = stride(m);
                if p + 2 < levels {
                    scalars.push(ScalarTerm {
                        c: tab.pair[p],
                        src: base + 2 * sm,
                    });
                }
                if p >= 2 {
                    scalars.push(ScalarTerm {
                        c: tab.pair[p - 2],
                        src: base - 2 * sm,
                    });
                }
                if self.fields[m] != 0.0 {
                    if p + 1 < levels {
                        scalars.push(ScalarTerm {
                            c: tab.drive[m][p],
                            src: base + sm,
                        });
                    }
                    if p >= 1 {
                        scalars.push(ScalarTerm {
                            c: tab.drive[m][p - 1],
                            src: base - sm,
                        });
                    }
                }
                // a_m† a_q between two prefix modes.
                if p >= 1 {
                    for (q, &pq) in photons.iter().enumerate() {
                        let pq = pq as usize;
                        let h = hop(m, q);
                        if q != m && pq + 1 < levels && h != 0.0 {
                            scalars.push(ScalarTerm {
                                c: h * sq[p] * sq[pq + 1],
                                src: base - sm + stride(q),
                            });
                        }
                    }
                }
                for r in 0..n - ps {
                    let h = hop(m, ps + r);
                    if h == 0.0 {
                        continue;
                    }
                    let sr = stride(ps + r);
                    // a_m† a_r
                    if p >= 1 {
                        terms.push(WeightedTerm {
                            c: h * sq[p],
                            weight: lower_base + r,
                            src: base - sm + sr,
                        });
                    }
                    // a_r† a_m
                    if p + 1 < levels {
                        terms.push(WeightedTerm {
                            c: h * sq[p + 1],
                            weight: raise_base + r,
                            src: base + sm - sr,
                        });
                    }
                }
            }
            let plane = PlaneTerms {
                d0,
                g0: kappa * nsum,
                kappa: kappa != 0.0,
                own: (span(&x.re, base, len), span(&x.im, base, len)),
                diag: &plane_diag,
                loss: &loss,
                scalars: scalars
                    .iter()
                    .map(|s| (s.c, span(&x.re, s.src, len), span(&x.im, s.src, len)))
                    .collect(),
                terms: terms
                    .iter()
                    .map(|t| {
                        (
                            t.c,
                            &weights[t.weight][..],
                            span(&x.re, t.src, len),
                            span(&x.im, t.src, len),
                        )
                    })
                    .collect(),
            };
            let full = len / CHUNK * CHUNK;
            for start in (0..full).step_by(CHUNK) {
                plane.block::<CHUNK>(start, &mut yr[start..start + CHUNK], &mut yi[start..start + CHUNK]);
            }
            for start in full..len {
                plane.block::<1>(start, &mut yr[start..start + 1], &mut yi[start..start + 1]);
            }
        }
    }
}

fn span(v: &[f64], src: isize, len: usize) -> &[f64] {
    let from = src as usize;
    &v[from..from + len]
}

/// One plane of input, pre-sliced per term: `(coefficient, re, im)` for
/// plain terms and `(coefficient, weight, re, im)` for weighted ones.
struct PlaneTerms<'a> {
    d0: f64,
    g0: f64,
    kappa: bool,
    own: (&'a [f64], &'a [f64]),
    diag: &'a [f64],
    loss: &'a [f64],
    scalars: Vec<(f64, &'a [f64], &'a [f64])>,
    terms: Vec<(f64, &'a [f64], &'a [f64], &'a [f64])>,
}

impl PlaneTerms<'_> {
    #[inline(always)]
    fn block<const W: usize>(&self, start: usize, yr: &mut [f64], yi: &mut [f64]) {
        let at = |v: &[f64]| -> [f64; W] { *<&[f64; W]>::try_from(&v[start..start + W]).unwrap() };
        let xr0 = at(self.own.0);
        let xi0 = at(self.own.1);
        let diag = at(self.diag);
        let mut ar = [0.0; W];
        let mut ai = [0.0; W];
        for k in 0..W {
            let d = self.d0 + diag[k];
            ar[k] = d * xr0[k];
            ai[k] = d * xi0[k];
        }
        if self.kappa {
            let loss = at(self.loss);
            for k in 0..W {
                let g = self.g0 + loss[k];
                ar[k] += g * xi0[k];
                ai[k] -= g * xr0[k];
            }
        }
        for &(c, re, im) in &self.scalars {
            let (xr, xi) = (at(re), at(im));
            for k in 0..W {
                ar[k] += c * xr[k];
                ai[k] += c * xi[k];
            }
        }
        for &(c, w, re, im) in &self.terms {
            let (w, xr, xi) = (at(w), at(re), at(im));
            for k in 0..W {
                let cw = c * w[k];
                ar[k] += cw * xr[k];
                ai[k] += cw * xi[k];
            }
        }
        yr.copy_from_slice(&ar);
        yi.copy_from_slice(&ai);
    }
}

fn join(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
}

/// `H(t)|ψ>` for the sinusoidal sweep, on the default-free cutoff of `state`.
pub fn apply_hamiltonian(
    inst: &IsingInstance,
    params: &KpoParameters,
    t: f64,
    state: &QuantumState,
) -> Result<QuantumState> {
    let net = KpoNetwork::from_params(inst, params, state.cutoff())?;
    net.apply(&schedule_at(params, t)?, state)
}

/// `H'(t)|ψ> = (H(t) - iκ Σ a_i† a_i)|ψ>`.
pub fn apply_effective_nonhermitian(
    inst: &IsingInstance,
    params: &KpoParameters,
    t: f64,
    state: &QuantumState,
) -> Result<QuantumState> {
    let net = KpoNetwork::from_params(inst, params, state.cutoff())?;
    net.apply_nonhermitian(&schedule_at(params, t)?, state)
}

/// `<ψ|H(T)|ψ>` at the end of the sweep, without the constant dropped from
/// the factorized form of the final Hamiltonian.
pub fn final_hamiltonian_check(inst: &IsingInstance, params: &KpoParameters, state: &QuantumState) -> Result<f64> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n2));
    }
    let net = KpoNetwork::from_params(inst, params, state.cutoff())?;
    net.expectation(&schedule_at(params, params.duration)?, state)
}
