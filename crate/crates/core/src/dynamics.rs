//! Time integration: closed-system Schrödinger evolution, quantum-jump
//! trajectories for photon loss, and a dense master-equation solver used as
//! a reference for small systems.
//!
//! All integrators are fixed-step fourth-order Runge–Kutta. Photon loss
//! follows `dρ/dt = -i[H, ρ] + κ Σ_i (2 a_i ρ a_i† - a_i†a_i ρ - ρ a_i†a_i)`,
//! so `<a†a>` of a free mode decays as `exp(-2κt)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeOperator, QuantumState};
use crate::hamiltonian::{KpoNetwork, KpoParameters, Schedule, ScheduleValues, SinusoidalSchedule, SplitVec};
use crate::ising::IsingInstance;
use crate::readout::{compute_metrics, EnsembleMetrics, RunMetrics, SignProjector};

/// Norm drift tolerated in a single unrenormalized run before aborting.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorMethod {
    #[default]
    Rk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    /// Time step in units of `1/K`.
    pub dt: f64,
    #[serde(default)]
    pub method: IntegratorMethod,
    /// Rescale the state to unit norm after every closed-system step.
    pub renormalize_each_step: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1.0 / 500.0,
            method: IntegratorMethod::Rk4,
            renormalize_each_step: true,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn without_renormalization(mut self) -> Self {
        self.renormalize_each_step = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    /// Step sizes covering `[0, duration]`: whole steps of `dt`, plus one
    /// shorter final step when `duration` is not a multiple of `dt`.
    pub fn steps(&self, duration: f64) -> StepPlan {
        let ratio = duration / self.dt;
        let rounded = ratio.round();
        if (rounded - ratio).abs() <= 1e-9 * ratio.max(1.0) {
            StepPlan {
                dt: self.dt,
                full_steps: rounded as usize,
                remainder: 0.0,
                duration,
            }
        } else {
            let full = ratio.floor() as usize;
            StepPlan {
                dt: self.dt,
                full_steps: full,
                remainder: duration - full as f64 * self.dt,
                duration,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub full_steps: usize,
    pub remainder: f64,
    pub duration: f64,
}

impl StepPlan {
    pub fn count(&self) -> usize {
        self.full_steps + usize::from(self.remainder > 0.0)
    }

    /// `(t_start, h)` of step `k`.
    fn step(&self, k: usize) -> (f64, f64) {
        if k < self.full_steps {
            let t0 = k as f64 * self.dt;
            let t1 = if k + 1 == self.full_steps && self.remainder == 0.0 {
                self.duration
            } else {
                (k + 1) as f64 * self.dt
            };
            (t0, t1 - t0)
        } else {
            let t0 = self.full_steps as f64 * self.dt;
            (t0, self.duration - t0)
        }
    }
}

/// Scratch buffers for one RK4 stepper.
///
/// Each step integrates `H - E` with `E` the energy of the state at the start
/// of the previous step. The shift only rotates the global phase, but keeps
/// the integrated spectrum near zero, where RK4 loses far less norm.
struct Rk4 {
    y: SplitVec,
    tmp: SplitVec,
    acc: SplitVec,
    reference: f64,
    /// `∫ E dt` removed from the integrated phase so far.
    phase: f64,
}

impl Rk4 {
    fn new(net: &KpoNetwork) -> Self {
        Rk4 {
            y: SplitVec::zeros(net),
            tmp: SplitVec::zeros(net),
            acc: SplitVec::zeros(net),
            reference: 0.0,
            phase: 0.0,
        }
    }

    /// The state with the removed global phase restored.
    fn export(&self, net: &KpoNetwork, psi: &SplitVec) -> Result<QuantumState> {
        let mut state = psi.to_state(net)?;
        let rot = Complex64::from_polar(1.0, -self.phase);
        state.amplitudes_mut().iter_mut().for_each(|a| *a *= rot);
        Ok(state)
    }

    /// One step of `dψ/dt = -i H'(t) ψ`.
    fn step<S: Schedule + ?Sized>(
        &mut self,
        net: &KpoNetwork,
        schedule: &S,
        include_decay: bool,
        t: f64,
        h: f64,
        psi: &mut SplitVec,
    ) -> Result<()> {
        let mid = schedule.values(t + 0.5 * h);
        let stages: [(ScheduleValues, f64, f64); 4] = [
            (schedule.values(t), h / 6.0, 0.5 * h),
            (mid.clone(), h / 3.0, 0.5 * h),
            (mid, h / 3.0, h),
            (schedule.values(t + h), h / 6.0, 0.0),
        ];
        let shift = self.reference;
        self.phase += shift * h;
        let Rk4 {
            y, tmp, acc, reference, ..
        } = self;
        acc.re.copy_from_slice(&psi.re);
        acc.im.copy_from_slice(&psi.im);
        for (stage, (values, weight, next)) in stages.iter().enumerate() {
            let src = if stage == 0 { &*psi } else { &*tmp };
            net.apply_split(values, include_decay, shift, src, y)?;
            if stage == 0 {
                *reference = shift + psi.real_inner(y) / psi.norm_sqr();
            }
            // k = -i y  =>  k_re = y_im, k_im = -y_re
            let (w, nx) = (*weight, *next);
            if stage < 3 {
                let it = acc
                    .re
                    .iter_mut()
                    .zip(acc.im.iter_mut())
                    .zip(tmp.re.iter_mut().zip(tmp.im.iter_mut()));
                for ((((ar, ai), (tr, ti)), (yr, yi)), (pr, pi)) in
                    it.zip(y.re.iter().zip(&y.im)).zip(psi.re.iter().zip(&psi.im))
                {
                    *ar += w * yi;
                    *ai -= w * yr;
                    *tr = pr + nx * yi;
                    *ti = pi - nx * yr;
                }
            } else {
                let it = acc.re.iter_mut().zip(acc.im.iter_mut());
                for ((ar, ai), (yr, yi)) in it.zip(y.re.iter().zip(&y.im)) {
                    *ar += w * yi;
                    *ai -= w * yr;
                }
            }
        }
        std::mem::swap(psi, acc);
        Ok(())
    }
}

/// Snapshot of the (normalized) state at a requested time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub state: QuantumState,
}

fn snapshot_due(checkpoints: &[f64], next: usize, t: f64) -> bool {
    next < checkpoints.len() && t >= checkpoints[next] - 1e-9
}

/// Closed-system evolution under an arbitrary schedule. Snapshots are taken
/// at the first step boundary at or after each checkpoint.
pub fn evolve_with_schedule<S: Schedule + ?Sized>(
    net: &KpoNetwork,
    schedule: &S,
    initial: &QuantumState,
    cfg: &IntegratorConfig,
    checkpoints: &[f64],
) -> Result<(QuantumState, Vec<Snapshot>)> {
    cfg.validate()?;
    net.check_state(initial)?;
    let plan = cfg.steps(schedule.duration());
    let mut psi = SplitVec::from_state(net, initial);
    let norm0 = psi.norm_sqr();
    let mut rk = Rk4::new(net);
    let mut snaps = Vec::new();
    let mut next = 0;
    while snapshot_due(checkpoints, next, 0.0) {
        snaps.push(snapshot(net, &rk, &psi, 0.0)?);
        next += 1;
    }
    for k in 0..plan.count() {
        let (t, h) = plan.step(k);
        rk.step(net, schedule, false, t, h, &mut psi)?;
        let n2 = psi.norm_sqr();
        if !n2.is_finite() || (n2 / norm0 - 1.0).abs() > DIVERGENCE_TOLERANCE {
            return Err(Error::Divergence {
                t: t + h,
                reason: format!("squared norm drifted to {n2:.6e} from {norm0:.6e}"),
            });
        }
        if cfg.renormalize_each_step {
            psi.scale((norm0 / n2).sqrt());
        }
        while snapshot_due(checkpoints, next, t + h) {
            snaps.push(snapshot(net, &rk, &psi, t + h)?);
            next += 1;
        }
    }
    Ok((rk.export(net, &psi)?, snaps))
}

fn snapshot(net: &KpoNetwork, rk: &Rk4, psi: &SplitVec, time: f64) -> Result<Snapshot> {
    let mut state = rk.export(net, psi)?;
    state.normalize()?;
    Ok(Snapshot { time, state })
}

/// Schrödinger evolution over the sinusoidal sweep; the returned state is
/// normalized.
pub fn evolve_schrodinger(
    inst: &IsingInstance,
    params: &KpoParameters,
    initial: &QuantumState,
    cfg: &IntegratorConfig,
) -> Result<QuantumState> {
    if params.decay_rate != 0.0 {
        return Err(Error::InvalidParameter(
            "Schrödinger evolution requires a zero decay rate".into(),
        ));
    }
    let net = KpoNetwork::from_params(inst, params, initial.cutoff())?;
    let schedule = SinusoidalSchedule::new(params.clone());
    let (mut state, _) = evolve_with_schedule(&net, &schedule, initial, cfg, &[])?;
    state.normalize()?;
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub mode: usize,
}

/// One quantum-jump trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub jumps: Vec<JumpEvent>,
    pub final_state: QuantumState,
    pub snapshots: Vec<Snapshot>,
}

/// Quantum-jump (waiting-time) unraveling under an arbitrary schedule.
///
/// The state is propagated with `H' = H - iκ Σ a†a` and kept normalized
/// while the accumulated no-jump probability is tracked separately. A jump
/// fires once that probability drops below a uniform threshold drawn from
/// the trajectory RNG; the jump mode is chosen with weight `<a_i†a_i>`,
/// after which the threshold is redrawn.
pub fn quantum_jump_with_schedule<S: Schedule + ?Sized>(
    net: &KpoNetwork,
    schedule: &S,
    initial: &QuantumState,
    cfg: &IntegratorConfig,
    seed: u64,
    checkpoints: &[f64],
) -> Result<TrajectoryRecord> {
    if net.decay_rate() == 0.0 {
        let (mut final_state, snapshots) = evolve_with_schedule(net, schedule, initial, cfg, checkpoints)?;
        final_state.normalize()?;
        return Ok(TrajectoryRecord {
            seed,
            jumps: Vec::new(),
            final_state,
            snapshots,
        });
    }
    cfg.validate()?;
    net.check_state(initial)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = net.layout().clone();
    let modes = layout.modes();
    let levels = layout.levels();
    let plan = cfg.steps(schedule.duration());
    let mut psi = SplitVec::from_state(net, initial);
    let n0 = psi.norm_sqr();
    if !(n0 > 0.0) {
        return Err(Error::NotNormalized(n0));
    }
    psi.scale(1.0 / n0.sqrt());
    let mut rk = Rk4::new(net);
    let mut jumps = Vec::new();
    let mut survival = 1.0f64;
    let mut threshold: f64 = rng.gen();
    let mut snaps = Vec::new();
    let mut next = 0;
    while snapshot_due(checkpoints, next, 0.0) {
        snaps.push(snapshot(net, &rk, &psi, 0.0)?);
        next += 1;
    }
    let mut weights = vec![0.0; modes];
    let mut scratch = SplitVec::zeros(net);

    for k in 0..plan.count() {
        let (t, h) = plan.step(k);
        rk.step(net, schedule, true, t, h, &mut psi)?;
        let n2 = psi.norm_sqr();
        if !n2.is_finite() || n2 <= 0.0 || n2 > 1.0 + DIVERGENCE_TOLERANCE {
            return Err(Error::Divergence {
                t: t + h,
                reason: format!("squared norm {n2:.6e} after a non-Hermitian step"),
            });
        }
        psi.scale(1.0 / n2.sqrt());
        survival *= n2;
        if survival < threshold {
            weights.iter_mut().for_each(|w| *w = 0.0);
            let (re, im) = psi.interior();
            for (i, (a, b)) in re.iter().zip(im).enumerate() {
                let p = a * a + b * b;
                for (m, w) in weights.iter_mut().enumerate() {
                    *w += p * layout.photons(i, m) as f64;
                }
            }
            let total: f64 = weights.iter().sum();
            if total > 0.0 {
                let mut u = rng.gen::<f64>() * total;
                let mut mode = modes - 1;
                for (m, &w) in weights.iter().enumerate() {
                    if u < w {
                        mode = m;
                        break;
                    }
                    u -= w;
                }
                // psi <- a_mode psi
                let stride = layout.stride(mode);
                let (re, im) = psi.interior();
                let (sr, si) = scratch.interior_mut();
                for i in 0..re.len() {
                    let n = layout.photons(i, mode);
                    if n + 1 < levels {
                        let c = ((n + 1) as f64).sqrt();
                        sr[i] = c * re[i + stride];
                        si[i] = c * im[i + stride];
                    } else {
                        sr[i] = 0.0;
                        si[i] = 0.0;
                    }
                }
                std::mem::swap(&mut psi, &mut scratch);
                let m2 = psi.norm_sqr();
                psi.scale(1.0 / m2.sqrt());
                jumps.push(JumpEvent { time: t + h, mode });
            }
            survival = 1.0;
            threshold = rng.gen();
        }
        while snapshot_due(checkpoints, next, t + h) {
            snaps.push(snapshot(net, &rk, &psi, t + h)?);
            next += 1;
        }
    }
    Ok(TrajectoryRecord {
        seed,
        jumps,
        final_state: rk.export(net, &psi)?,
        snapshots: snaps,
    })
}

/// Quantum-jump trajectory over the sinusoidal sweep.
pub fn evolve_quantum_jump(
    inst: &IsingInstance,
    params: &KpoParameters,
    initial: &QuantumState,
    cfg: &IntegratorConfig,
    seed: u64,
) -> Result<TrajectoryRecord> {
    let net = KpoNetwork::from_params(inst, params, initial.cutoff())?;
    let schedule = SinusoidalSchedule::new(params.clone());
    quantum_jump_with_schedule(&net, &schedule, initial, cfg, seed, &[])
}

/// Seed of item `index` derived from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `n_traj` independent trajectories (seeds derived from `seed`) and
/// aggregates their readout metrics. With `κ = 0` a single deterministic
/// run stands in for every trajectory.
pub fn run_trajectory_ensemble(
    inst: &IsingInstance,
    params: &KpoParameters,
    initial: &QuantumState,
    cfg: &IntegratorConfig,
    n_traj: usize,
    seed: u64,
) -> Result<EnsembleMetrics> {
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    let proj = SignProjector::cached(initial.cutoff());
    if params.decay_rate == 0.0 {
        let state = evolve_schrodinger(inst, params, initial, cfg)?;
        let m = compute_metrics(&state, inst, &proj)?;
        return EnsembleMetrics::from_runs(vec![m; n_traj], vec![0; n_traj]);
    }
    let net = KpoNetwork::from_params(inst, params, initial.cutoff())?;
    let schedule = SinusoidalSchedule::new(params.clone());
    let runs: Vec<(RunMetrics, usize)> = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| {
            let rec = quantum_jump_with_schedule(&net, &schedule, initial, cfg, derive_seed(seed, i), &[])?;
            Ok((compute_metrics(&rec.final_state, inst, &proj)?, rec.jumps.len()))
        })
        .collect::<Result<_>>()?;
    let (metrics, jumps) = runs.into_iter().unzip();
    EnsembleMetrics::from_runs(metrics, jumps)
}

/// Dense reference model for density-matrix evolution.
pub struct DenseMasterModel {
    modes: usize,
    levels: usize,
    kerr: f64,
    decay_rate: f64,
    kerr_term: DMatrix<Complex64>,
    number: Vec<DMatrix<Complex64>>,
    annihilate: Vec<DMatrix<Complex64>>,
    pair: Vec<DMatrix<Complex64>>,
    quadrature: Vec<DMatrix<Complex64>>,
    hopping: DMatrix<Complex64>,
}

/// Largest density matrix (entries) accepted by the dense solver.
pub const DENSE_ENTRY_LIMIT: usize = 4096;

impl DenseMasterModel {
    pub fn new(inst: &IsingInstance, kerr: f64, decay_rate: f64, levels: usize) -> Result<Self> {
        let modes = inst.size();
        let dim = levels
            .checked_pow(modes as u32)
            .filter(|d| d * d <= DENSE_ENTRY_LIMIT)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "dense master equation limited to {DENSE_ENTRY_LIMIT} density-matrix entries"
                ))
            })?;
        let single = |op: ModeOperator| {
            DMatrix::from_row_slice(levels, levels, &op.matrix(levels)).map(|x| Complex64::new(x, 0.0))
        };
        let embed = |op: &DMatrix<Complex64>, mode: usize| {
            let id = DMatrix::<Complex64>::identity(levels, levels);
            (0..modes).fold(DMatrix::<Complex64>::identity(1, 1), |acc, m| {
                acc.kronecker(if m == mode { op } else { &id })
            })
        };
        let annihilate: Vec<_> = (0..modes)
            .map(|m| embed(&single(ModeOperator::Annihilate), m))
            .collect();
        let create: Vec<_> = annihilate.iter().map(|a| a.adjoint()).collect();
        let number: Vec<_> = (0..modes).map(|m| &create[m] * &annihilate[m]).collect();
        let mut kerr_term = DMatrix::zeros(dim, dim);
        let mut hopping = DMatrix::zeros(dim, dim);
        let mut pair = Vec::new();
        let mut quadrature = Vec::new();
        for i in 0..modes {
            let (a, ad) = (&annihilate[i], &create[i]);
            kerr_term += ad * ad * a * a;
            pair.push(a * a + ad * ad);
            quadrature.push((a + ad) * Complex64::new(inst.field(i), 0.0));
            for j in 0..modes {
                if i != j {
                    hopping += (ad * &annihilate[j]) * Complex64::new(inst.coupling(i, j), 0.0);
                }
            }
        }
        Ok(DenseMasterModel {
            modes,
            levels,
            kerr,
            decay_rate,
            kerr_term,
            number,
            annihilate,
            pair,
            quadrature,
            hopping,
        })
    }

    pub fn dim(&self) -> usize {
        self.levels.pow(self.modes as u32)
    }

    pub fn hamiltonian(&self, v: &ScheduleValues) -> DMatrix<Complex64> {
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut h = &self.kerr_term * c(0.5 * self.kerr);
        for i in 0..self.modes {
            h += &self.number[i] * c(v.detunings[i]);
            h -= &self.pair[i] * c(0.5 * v.pump);
            h -= &self.quadrature[i] * c(v.coupling * v.drive);
        }
        h -= &self.hopping * c(v.coupling);
        h
    }

    fn rhs(&self, h: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let minus_i = Complex64::new(0.0, -1.0);
        let h_rho = h * rho;
        let mut out = (&h_rho - h_rho.adjoint()) * minus_i;
        if self.decay_rate != 0.0 {
            let k = Complex64::new(self.decay_rate, 0.0);
            for (a, n) in self.annihilate.iter().zip(&self.number) {
                let n_rho = n * rho;
                out += (a * rho * a.adjoint() * Complex64::new(2.0, 0.0) - &n_rho - n_rho.adjoint()) * k;
            }
        }
        out
    }

    /// RK4 on the density matrix; `rho` must be Hermitian.
    pub fn evolve<S: Schedule + ?Sized>(
        &self,
        schedule: &S,
        rho0: &DMatrix<Complex64>,
        cfg: &IntegratorConfig,
        checkpoints: &[f64],
    ) -> Result<(DMatrix<Complex64>, Vec<(f64, DMatrix<Complex64>)>)> {
        cfg.validate()?;
        let dim = self.dim();
        if rho0.nrows() != dim || rho0.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rho0.nrows(),
            });
        }
        let plan = cfg.steps(schedule.duration());
        let mut rho = rho0.clone();
        let mut snaps = Vec::new();
        let mut next = 0;
        while snapshot_due(checkpoints, next, 0.0) {
            snaps.push((0.0, rho.clone()));
            next += 1;
        }
        let c = |x: f64| Complex64::new(x, 0.0);
        for k in 0..plan.count() {
            let (t, h) = plan.step(k);
            let h0 = self.hamiltonian(&schedule.values(t));
            let hm = self.hamiltonian(&schedule.values(t + 0.5 * h));
            let h1 = self.hamiltonian(&schedule.values(t + h));
            let k1 = self.rhs(&h0, &rho);
            let k2 = self.rhs(&hm, &(&rho + &k1 * c(0.5 * h)));
            let k3 = self.rhs(&hm, &(&rho + &k2 * c(0.5 * h)));
            let k4 = self.rhs(&h1, &(&rho + &k3 * c(h)));
            rho += (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0);
            let tr = rho.trace();
            if !tr.re.is_finite() {
                return Err(Error::Divergence {
                    t: t + h,
                    reason: "density matrix became non-finite".into(),
                });
            }
            while snapshot_due(checkpoints, next, t + h) {
                snaps.push((t + h, rho.clone()));
                next += 1;
            }
        }
        Ok((rho, snaps))
    }

    /// `Tr(ρ Σ_i a_i†a_i)` per mode.
    pub fn mean_photons(&self, rho: &DMatrix<Complex64>) -> Vec<f64> {
        self.number.iter().map(|n| (n * rho).trace().re).collect()
    }
}

/// Master-equation evolution of a density matrix over the sinusoidal sweep.
pub fn dense_master_evolve(
    inst: &IsingInstance,
    params: &KpoParameters,
    levels: usize,
    initial_density: &DMatrix<Complex64>,
    cfg: &IntegratorConfig,
) -> Result<DMatrix<Complex64>> {
    params.validate(inst.size())?;
    let model = DenseMasterModel::new(inst, params.kerr, params.decay_rate, levels)?;
    let schedule = SinusoidalSchedule::new(params.clone());
    Ok(model.evolve(&schedule, initial_density, cfg, &[])?.0)
}

/// `|ψ><ψ|` of a normalized state.
pub fn density_matrix(state: &QuantumState) -> DMatrix<Complex64> {
    let v = nalgebra::DVector::from_column_slice(state.amplitudes());
    &v * v.adjoint()
}

/// `½ Σ |λ_k|` over the eigenvalues of the Hermitian difference.
pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let diff = a - b;
    let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    0.5 * herm.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
}
