//! Low-lying spectrum of the network Hamiltonian along the sweep.
//!
//! The full register is too large to diagonalize, so each oscillator is
//! restricted to the `N_e` lowest eigenvectors of its own single-mode term
//! `K/2 a†²a² + Δ a†a - p/2 (a² + a†²)` and the coupling and drive terms are
//! projected into the resulting `N_e^N` product space.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockCutoff;
use crate::hamiltonian::{KpoParameters, Schedule, ScheduleValues, SinusoidalSchedule};
use crate::ising::IsingInstance;

pub const DEFAULT_RETAINED: usize = 6;
pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_LEVELS: usize = 8;

/// Largest reduced dimension handed to the dense eigensolver; bigger
/// problems use block Krylov Rayleigh–Ritz for the lowest pairs.
const DENSE_LIMIT: usize = 600;
/// Reduced dimension above which assembly is refused.
pub const REDUCED_DIM_LIMIT: usize = 1 << 16;

/// Real symmetric eigendecomposition sorted by ascending eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(eig.eigenvectors.nrows(), order.len());
    for (c, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        // Fix the sign so the largest component is positive.
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(c, &v);
    }
    (values, vectors)
}

/// `K/2 a†²a² + Δ a†a - p/2 (a² + a†²)` on `levels` Fock states.
pub fn single_kpo_matrix(kerr: f64, detuning: f64, pump: f64, cutoff: FockCutoff) -> DMatrix<f64> {
    let l = cutoff.levels();
    let mut m = DMatrix::zeros(l, l);
    for n in 0..l {
        let nf = n as f64;
        m[(n, n)] = 0.5 * kerr * nf * (nf - 1.0) + detuning * nf;
        if n + 2 < l {
            let c = -0.5 * pump * ((nf + 1.0) * (nf + 2.0)).sqrt();
            m[(n, n + 2)] = c;
            m[(n + 2, n)] = c;
        }
    }
    m
}

/// Eigenvalues (ascending) and eigenvectors (columns) of one oscillator.
pub fn single_kpo_diagonalize(kerr: f64, detuning: f64, pump: f64, cutoff: FockCutoff) -> (Vec<f64>, DMatrix<f64>) {
    sorted_eigen(single_kpo_matrix(kerr, detuning, pump, cutoff))
}

/// Per-mode low-energy bases at one point of the sweep.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    retained: usize,
    cutoff: FockCutoff,
    pump: f64,
    detunings: Vec<f64>,
    energies: Vec<Vec<f64>>,
    /// `levels × N_e` for each mode.
    vectors: Vec<DMatrix<f64>>,
}

impl ReducedBasis {
    pub fn build(kerr: f64, values: &ScheduleValues, cutoff: FockCutoff, retained: usize) -> Result<Self> {
        if retained == 0 || retained > cutoff.levels() {
            return Err(Error::InvalidParameter(format!(
                "retained states {retained} must lie in 1..={}",
                cutoff.levels()
            )));
        }
        let mut energies = Vec::new();
        let mut vectors = Vec::new();
        for &d in &values.detunings {
            let (e, v) = single_kpo_diagonalize(kerr, d, values.pump, cutoff);
            energies.push(e[..retained].to_vec());
            vectors.push(v.columns(0, retained).clone_owned());
        }
        Ok(ReducedBasis {
            retained,
            cutoff,
            pump: values.pump,
            detunings: values.detunings.clone(),
            energies,
            vectors,
        })
    }

    pub fn retained(&self) -> usize {
        self.retained
    }

    pub fn modes(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.retained.pow(self.modes() as u32)
    }

    pub fn energies(&self, mode: usize) -> &[f64] {
        &self.energies[mode]
    }

    pub fn vectors(&self, mode: usize) -> &DMatrix<f64> {
        &self.vectors[mode]
    }

    /// `V_i^T O V_i` for a single-mode Fock-space operator.
    fn project(&self, mode: usize, op: &DMatrix<f64>) -> DMatrix<f64> {
        self.vectors[mode].transpose() * op * &self.vectors[mode]
    }

    /// Per-mode overlaps `V_i(self)^T V_i(other)`.
    fn overlaps(&self, other: &ReducedBasis) -> Vec<DMatrix<f64>> {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| a.transpose() * b)
            .collect()
    }

    /// Coordinates of a Fock product state in the reduced space.
    pub fn product_state(&self, photons: &[usize]) -> Result<DVector<f64>> {
        if photons.len() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                actual: photons.len(),
            });
        }
        let factors: Vec<Vec<f64>> = photons
            .iter()
            .zip(&self.vectors)
            .map(|(&n, v)| {
                if n >= self.cutoff.levels() {
                    Err(Error::InvalidParameter(format!("photon number {n} exceeds the cutoff")))
                } else {
                    Ok(v.row(n).iter().copied().collect())
                }
            })
            .collect::<Result<_>>()?;
        let ne = self.retained;
        Ok(DVector::from_fn(self.dim(), |idx, _| {
            let mut rest = idx;
            let mut acc = 1.0;
            for f in factors.iter().rev() {
                acc *= f[rest % ne];
                rest /= ne;
            }
            acc
        }))
    }
}

/// `(⊗_i M_i) x` for square per-mode matrices on the mixed-radix layout.
fn kron_apply(factors: &[DMatrix<f64>], x: &DVector<f64>) -> DVector<f64> {
    let ne = factors.first().map_or(1, |m| m.nrows());
    let mut cur = x.clone();
    let dim = cur.len();
    for (mode, m) in factors.iter().enumerate() {
        let stride = ne.pow((factors.len() - 1 - mode) as u32);
        let mut next = DVector::zeros(dim);
        for outer in 0..dim / (ne * stride) {
            let base = outer * ne * stride;
            for r in 0..ne {
                for c in 0..ne {
                    let w = m[(r, c)];
                    if w == 0.0 {
                        continue;
                    }
                    for k in 0..stride {
                        next[base + r * stride + k] += w * cur[base + c * stride + k];
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// The network Hamiltonian at `values` projected onto `basis`.
pub fn reduced_hamiltonian_at(
    inst: &IsingInstance,
    values: &ScheduleValues,
    basis: &ReducedBasis,
) -> Result<DMatrix<f64>> {
    let n = inst.size();
    if basis.modes() != n || values.detunings.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: basis.modes(),
        });
    }
    if basis.pump != values.pump || basis.detunings != values.detunings {
        return Err(Error::InvalidParameter(
            "reduced basis was built at a different point of the sweep".into(),
        ));
    }
    let dim = basis.dim();
    if dim > REDUCED_DIM_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "reduced dimension {dim} exceeds {REDUCED_DIM_LIMIT}"
        )));
    }
    let ne = basis.retained;
    let levels = basis.cutoff.levels();
    let mut lower = DMatrix::zeros(levels, levels);
    for k in 1..levels {
        lower[(k - 1, k)] = (k as f64).sqrt();
    }
    let quad = &lower + lower.transpose();
    let a: Vec<DMatrix<f64>> = (0..n).map(|i| basis.project(i, &lower)).collect();
    let x: Vec<DMatrix<f64>> = (0..n).map(|i| basis.project(i, &quad)).collect();
    let stride = |i: usize| ne.pow((n - 1 - i) as u32);
    let digit = |idx: usize, i: usize| (idx / stride(i)) % ne;

    let mut h = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        h[(idx, idx)] = (0..n).map(|i| basis.energies[i][digit(idx, i)]).sum();
    }
    let scale = values.coupling;
    if scale == 0.0 {
        return Ok(h);
    }
    // Drive: -ξ A h_i (a_i + a_i†).
    for i in 0..n {
        let c = -scale * values.drive * inst.field(i);
        if c == 0.0 {
            continue;
        }
        let s = stride(i);
        for col in 0..dim {
            let ki = digit(col, i);
            let base = col - ki * s;
            for ri in 0..ne {
                h[(base + ri * s, col)] += c * x[i][(ri, ki)];
            }
        }
    }
    // Hopping: -ξ J_ij (a_i† a_j + a_j† a_i) for i < j.
    for i in 0..n {
        for j in i + 1..n {
            let c = -scale * inst.coupling(i, j);
            if c == 0.0 {
                continue;
            }
            let (si, sj) = (stride(i), stride(j));
            let ad_i = a[i].transpose();
            let ad_j = a[j].transpose();
            for col in 0..dim {
                let (ki, kj) = (digit(col, i), digit(col, j));
                let base = col - ki * si - kj * sj;
                for ri in 0..ne {
                    for rj in 0..ne {
                        let w = ad_i[(ri, ki)] * a[j][(rj, kj)] + a[i][(ri, ki)] * ad_j[(rj, kj)];
                        if w != 0.0 {
                            h[(base + ri * si + rj * sj, col)] += c * w;
                        }
                    }
                }
            }
        }
    }
    Ok(h)
}

/// [`reduced_hamiltonian_at`] on the sinusoidal sweep at time `t`.
pub fn reduced_hamiltonian(
    inst: &IsingInstance,
    params: &KpoParameters,
    t: f64,
    basis: &ReducedBasis,
) -> Result<DMatrix<f64>> {
    let values = crate::hamiltonian::schedule_at(params, t)?;
    reduced_hamiltonian_at(inst, &values, basis)
}

/// Orthonormalizes `v` against `basis` (two Gram–Schmidt passes); returns
/// the remaining norm.
fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(v);
            v.axpy(-c, q, 1.0);
        }
    }
    let norm = v.norm();
    if norm > 0.0 {
        *v /= norm;
    }
    norm
}

/// Lowest `count` eigenpairs of a real symmetric matrix.
///
/// Small matrices go to the dense solver. Larger ones use Rayleigh–Ritz on a
/// block Krylov space with full reorthogonalization; the block is wider than
/// `count`, so degenerate levels inside the window are resolved.
pub fn lowest_eigenpairs(h: &DMatrix<f64>, count: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let count = count.min(n);
    if n <= DENSE_LIMIT {
        let (values, vectors) = sorted_eigen(h.clone());
        return (values[..count].to_vec(), vectors.columns(0, count).clone_owned());
    }
    let block = (count + 4).max(10);
    let scale = h.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let tol = 1e-11 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<DVector<f64>> = Vec::new();
    let mut hq: Vec<DVector<f64>> = Vec::new();
    let random_block = |rng: &mut ChaCha8Rng| -> Vec<DVector<f64>> {
        (0..block)
            .map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
            .collect()
    };
    let mut pending = random_block(&mut rng);
    let mut t = DMatrix::zeros(0, 0);
    loop {
        let before = q.len();
        for mut v in pending.drain(..) {
            if q.len() < n && orthogonalize(&mut v, &q) > 1e-10 {
                hq.push(h * &v);
                q.push(v);
            }
        }
        let k = q.len();
        if k == before {
            // The space is invariant under H; continue from fresh directions.
            pending = random_block(&mut rng);
            continue;
        }
        t = t.resize(k, k, 0.0);
        for j in before..k {
            for i in 0..=j {
                let v = q[i].dot(&hq[j]);
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let (theta, s) = sorted_eigen(t.clone());
        let ritz = |j: usize| -> (DVector<f64>, DVector<f64>) {
            let mut x = DVector::zeros(n);
            let mut hx = DVector::zeros(n);
            for i in 0..k {
                x.axpy(s[(i, j)], &q[i], 1.0);
                hx.axpy(s[(i, j)], &hq[i], 1.0);
            }
            (x, hx)
        };
        let converged = k == n
            || (k >= count + block
                && (0..count).all(|j| {
                    let (x, hx) = ritz(j);
                    (hx - x * theta[j]).norm() < tol
                }));
        if converged {
            let mut vectors = DMatrix::zeros(n, count);
            for j in 0..count {
                vectors.set_column(j, &ritz(j).0);
            }
            return (theta[..count].to_vec(), vectors);
        }
        pending = hq[before..].to_vec();
    }
}

/// Smallest recorded `E_1 - E_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub value: f64,
    pub time: f64,
    pub pump: f64,
    pub grid_index: usize,
}

/// One grid point of a spectrum trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub time: f64,
    pub pump: f64,
    pub ground_energy: f64,
    /// `E_k - E_0` for `k = 1..=m`.
    pub gaps: Vec<f64>,
    /// Level followed by adiabatic continuation of the initial state.
    pub tracked_level: usize,
    /// `|<tracked now | tracked before>|` (`|<level | initial>|` at the first point).
    pub tracked_overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub retained: usize,
    pub levels: usize,
    pub points: Vec<SpectrumPoint>,
    pub min_gap: GapRecord,
}

impl SpectrumTrace {
    /// Minimum of `E_1 - E_0` over points with `0 < p < p_max` strictly.
    pub fn interior_min_gap(&self) -> Option<GapRecord> {
        let p_max = self.points.iter().map(|p| p.pump).fold(f64::MIN, f64::max);
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.pump > 0.0 && p.pump < p_max && !p.gaps.is_empty())
            .map(|(i, p)| GapRecord {
                value: p.gaps[0],
                time: p.time,
                pump: p.pump,
                grid_index: i,
            })
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

/// `count` uniform times over `[0, T]`.
pub fn uniform_grid(duration: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    duration
                } else {
                    duration * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Options for [`trace_spectrum`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Reported excitation levels `m`.
    pub levels: usize,
    /// Per-mode retained states `N_e`.
    pub retained: usize,
    pub cutoff: FockCutoff,
    /// Photon numbers of the initial product state that is tracked.
    pub initial_photons: Option<Vec<usize>>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            levels: DEFAULT_LEVELS,
            retained: DEFAULT_RETAINED,
            cutoff: FockCutoff::default(),
            initial_photons: None,
        }
    }
}

struct GridSolution {
    basis: ReducedBasis,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    pump: f64,
}

/// Low-lying levels of the reduced Hamiltonian at each grid time, with the
/// basis rebuilt at every point and the initial state followed by maximal
/// overlap between neighbouring points (ties go to the lower level).
pub fn trace_spectrum(
    inst: &IsingInstance,
    params: &KpoParameters,
    grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<SpectrumTrace> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("spectrum grid is empty".into()));
    }
    params.validate(inst.size())?;
    if let Some(&t) = grid.iter().find(|&&t| !(0.0..=params.duration).contains(&t)) {
        return Err(Error::TimeOutOfRange {
            t,
            duration: params.duration,
        });
    }
    if opts.levels == 0 {
        return Err(Error::InvalidParameter("at least one level is required".into()));
    }
    let schedule = SinusoidalSchedule::new(params.clone());
    let count = opts.levels + 1;
    let solved: Vec<GridSolution> = grid
        .par_iter()
        .map(|&t| {
            let values = schedule.values(t);
            let basis = ReducedBasis::build(params.kerr, &values, opts.cutoff, opts.retained)?;
            let h = reduced_hamiltonian_at(inst, &values, &basis)?;
            let (values_k, vectors) = lowest_eigenpairs(&h, count);
            Ok(GridSolution {
                basis,
                values: values_k,
                vectors,
                pump: values.pump,
            })
        })
        .collect::<Result<_>>()?;

    let initial = opts.initial_photons.clone().unwrap_or_else(|| vec![0; inst.size()]);
    let first = &solved[0];
    let start = first.basis.product_state(&initial)?;
    let pick = |overlaps: Vec<f64>| -> (usize, f64) {
        let mut best = (0, f64::MIN);
        for (k, o) in overlaps.into_iter().enumerate() {
            if o > best.1 + 1e-9 {
                best = (k, o);
            }
        }
        best
    };
    let (mut level, mut overlap) = pick(
        (0..first.vectors.ncols())
            .map(|k| first.vectors.column(k).dot(&start).abs())
            .collect(),
    );

    let mut points = Vec::with_capacity(grid.len());
    for (i, sol) in solved.iter().enumerate() {
        if i > 0 {
            let prev = &solved[i - 1];
            let maps = prev.basis.overlaps(&sol.basis);
            let before = prev.vectors.column(level).clone_owned();
            let moved = kron_apply(&maps.iter().map(|m| m.transpose()).collect::<Vec<_>>(), &before);
            let o = pick(
                (0..sol.vectors.ncols())
                    .map(|k| sol.vectors.column(k).dot(&moved).abs())
                    .collect(),
            );
            level = o.0;
            overlap = o.1;
        }
        let e0 = sol.values[0];
        points.push(SpectrumPoint {
            time: grid[i],
            pump: sol.pump,
            ground_energy: e0,
            gaps: sol.values[1..].iter().map(|e| (e - e0).max(0.0)).collect(),
            tracked_level: level,
            tracked_overlap: overlap,
        });
    }
    let min_gap = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.gaps.is_empty())
        .map(|(i, p)| GapRecord {
            value: p.gaps[0],
            time: p.time,
            pump: p.pump,
            grid_index: i,
        })
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::InvalidParameter("no gaps computed".into()))?;
    Ok(SpectrumTrace {
        retained: opts.retained,
        levels: opts.levels,
        points,
        min_gap,
    })
}
