//! Protocol selection, the best-of-(N+1) strategy, batches, dissipation
//! sweeps and result documents.
//!
//! Mode labels in documents (`special_mode`, instance indices) are 1-based.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{derive_seed, evolve_schrodinger, run_trajectory_ensemble, IntegratorConfig};
use crate::error::{Error, Result};
use crate::fock::{FockCutoff, QuantumState};
use crate::hamiltonian::KpoParameters;
use crate::ising::{energy_landscape, random_instance, InstanceDocument, IsingInstance, LandscapeRow};
use crate::readout::{compute_metrics, EnsembleMetrics, RunMetrics, SignProjector};
use crate::spectrum::{trace_spectrum, uniform_grid, SpectrumOptions, SpectrumTrace};

/// Smallest ensemble accepted by [`kappa_sweep`].
pub const MIN_SWEEP_TRAJECTORIES: usize = 100;
/// Failure and residual differences below this count as ties in the strategy.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    #[default]
    Ground,
    ExcitedVacuum,
    ExcitedPhoton,
}

impl ProtocolKind {
    pub fn label(self) -> &'static str {
        match self {
            ProtocolKind::Ground => "ground",
            ProtocolKind::ExcitedVacuum => "excited_vacuum",
            ProtocolKind::ExcitedPhoton => "excited_photon",
        }
    }
}

/// Initial detunings and initial state of a sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    /// 1-based index of the oscillator given `special_detuning`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special_mode: Option<usize>,
    /// Defaults to `-K/4` (excited_vacuum) or `+K/4` (excited_photon).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special_detuning: Option<f64>,
    /// Defaults to `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_detuning: Option<f64>,
}

impl ProtocolSpec {
    pub fn ground() -> Self {
        ProtocolSpec::default()
    }

    pub fn excited_vacuum(mode: usize) -> Self {
        ProtocolSpec {
            kind: ProtocolKind::ExcitedVacuum,
            special_mode: Some(mode),
            ..Default::default()
        }
    }

    pub fn excited_photon(mode: usize) -> Self {
        ProtocolSpec {
            kind: ProtocolKind::ExcitedPhoton,
            special_mode: Some(mode),
            ..Default::default()
        }
    }

    pub fn with_special_detuning(mut self, d: f64) -> Self {
        self.special_detuning = Some(d);
        self
    }

    pub fn base(&self, kerr: f64) -> f64 {
        self.base_detuning.unwrap_or(kerr)
    }

    pub fn special(&self, kerr: f64) -> Option<f64> {
        match self.kind {
            ProtocolKind::Ground => None,
            ProtocolKind::ExcitedVacuum => Some(self.special_detuning.unwrap_or(-kerr / 4.0)),
            ProtocolKind::ExcitedPhoton => Some(self.special_detuning.unwrap_or(kerr / 4.0)),
        }
    }

    /// Same spec with every default made explicit.
    pub fn resolved(&self, kerr: f64) -> Self {
        ProtocolSpec {
            kind: self.kind,
            special_mode: self.special_mode,
            special_detuning: self.special(kerr),
            base_detuning: Some(self.base(kerr)),
        }
    }

    /// 0-based index of the special oscillator.
    pub fn special_index(&self) -> Option<usize> {
        self.special_mode.map(|m| m - 1)
    }

    pub fn validate(&self, kerr: f64, modes: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProtocol(msg));
        let base = self.base(kerr);
        if !(base > -kerr / 2.0 && base.is_finite()) {
            return bad(format!("base detuning {base} must exceed -K/2"));
        }
        match (self.kind, self.special_mode) {
            (ProtocolKind::Ground, None) => {
                if self.special_detuning.is_some() {
                    return bad("ground protocol takes no special_detuning".into());
                }
                return Ok(());
            }
            (ProtocolKind::Ground, Some(_)) => return bad("ground protocol takes no special_mode".into()),
            (kind, None) => return bad(format!("{} requires special_mode", kind.label())),
            (_, Some(m)) if m == 0 || m > modes => {
                return bad(format!("special_mode {m} outside 1..={modes}"));
            }
            _ => {}
        }
        let d = self.special(kerr).unwrap_or(f64::NAN);
        match self.kind {
            ProtocolKind::ExcitedVacuum if !(d > -kerr / 2.0 && d < 0.0) => {
                bad(format!("excited_vacuum needs -K/2 < special_detuning < 0, got {d}"))
            }
            ProtocolKind::ExcitedPhoton if !(d > 0.0 && d < base) => bad(format!(
                "excited_photon needs 0 < special_detuning < base_detuning = {base}, got {d}"
            )),
            _ => Ok(()),
        }
    }

    pub fn detunings(&self, kerr: f64, modes: usize) -> Result<Vec<f64>> {
        self.validate(kerr, modes)?;
        let mut out = vec![self.base(kerr); modes];
        if let (Some(i), Some(d)) = (self.special_index(), self.special(kerr)) {
            out[i] = d;
        }
        Ok(out)
    }

    pub fn initial_state(&self, modes: usize, cutoff: FockCutoff) -> Result<QuantumState> {
        match (self.kind, self.special_index()) {
            (ProtocolKind::ExcitedPhoton, Some(i)) => QuantumState::single_photon(modes, i, cutoff),
            _ => QuantumState::vacuum(modes, cutoff),
        }
    }

    /// Photon numbers of the initial product state.
    pub fn initial_photons(&self, modes: usize) -> Vec<usize> {
        let mut n = vec![0; modes];
        if let (ProtocolKind::ExcitedPhoton, Some(i)) = (self.kind, self.special_index()) {
            n[i] = 1;
        }
        n
    }
}

/// Sweep parameters shared by every protocol; detunings come from the
/// [`ProtocolSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    pub kerr: f64,
    pub pump_final: f64,
    pub coupling_final: f64,
    pub duration: f64,
    pub decay_rate: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let d = KpoParameters::defaults(0);
        PhysicsConfig {
            kerr: d.kerr,
            pump_final: d.pump_final,
            coupling_final: d.coupling_final,
            duration: d.duration,
            decay_rate: d.decay_rate,
        }
    }
}

impl PhysicsConfig {
    pub fn with_decay_rate(mut self, kappa: f64) -> Self {
        self.decay_rate = kappa;
        self
    }

    pub fn kpo_parameters(&self, protocol: &ProtocolSpec, modes: usize) -> Result<KpoParameters> {
        let params = KpoParameters {
            kerr: self.kerr,
            pump_final: self.pump_final,
            coupling_final: self.coupling_final,
            detunings: protocol.detunings(self.kerr, modes)?,
            duration: self.duration,
            decay_rate: self.decay_rate,
        };
        params.validate(modes)?;
        Ok(params)
    }
}

/// Where the Ising instance of a run comes from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// The bundled hard four-spin instance.
    #[default]
    Hard,
    Path(PathBuf),
    Inline(InstanceDocument),
    Random {
        n: usize,
        seed: u64,
    },
}

impl InstanceSource {
    pub fn load(&self) -> Result<IsingInstance> {
        match self {
            InstanceSource::Hard => Ok(IsingInstance::hard_instance()),
            InstanceSource::Path(p) => InstanceDocument::load(p)?.to_instance(),
            InstanceSource::Inline(doc) => doc.to_instance(),
            InstanceSource::Random { n, seed } => random_instance(*n, *seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub count: usize,
    pub spins: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig { count: 100, spins: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub kappas: Vec<f64>,
    /// 1-based special oscillator of the excited_vacuum arm.
    pub vacuum_mode: usize,
    /// 1-based special oscillator of the excited_photon arm.
    pub photon_mode: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kappas: vec![0.0, 0.0025, 0.005, 0.0075, 0.01],
            vacuum_mode: 1,
            photon_mode: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectrumConfig {
    pub grid_points: usize,
    pub levels: usize,
    pub retained: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        let d = SpectrumOptions::default();
        SpectrumConfig {
            grid_points: crate::spectrum::DEFAULT_GRID_POINTS,
            levels: d.levels,
            retained: d.retained,
        }
    }
}

/// A run-configuration document. Every field except `instance` has a
/// default; subcommands ignore the sections they do not use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub instance: InstanceSource,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub params: PhysicsConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub cutoff: FockCutoff,
    #[serde(default = "default_trajectories")]
    pub n_traj: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub batch: BatchConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
}

fn default_trajectories() -> usize {
    200
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instance: InstanceSource::Hard,
            protocol: ProtocolSpec::ground(),
            params: PhysicsConfig::default(),
            integrator: IntegratorConfig::default(),
            cutoff: FockCutoff::default(),
            n_traj: default_trajectories(),
            seed: None,
            output: None,
            batch: BatchConfig::default(),
            sweep: SweepConfig::default(),
            spectrum: SpectrumConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a document; relative instance and output paths are taken
    /// relative to the document's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let InstanceSource::Path(p) = &mut cfg.instance {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut cfg.output {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the parts shared by every subcommand against `modes` spins.
    pub fn validate(&self, modes: usize) -> Result<()> {
        self.integrator.validate()?;
        self.params.kpo_parameters(&self.protocol, modes)?;
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
        }
        if self.params.decay_rate > 0.0 && self.seed.is_none() {
            return Err(Error::InvalidParameter(
                "a seed is required when the decay rate is nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Metrics of one protocol on one instance. `ensemble` is present for
/// stochastic runs, whose `metrics` are the trajectory averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: RunMetrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleMetrics>,
}

/// Runs `protocol` on `inst` with the sweep, integrator, cutoff and
/// ensemble settings of `cfg` (its own instance and protocol are ignored).
pub fn evaluate(inst: &IsingInstance, protocol: &ProtocolSpec, cfg: &RunConfig) -> Result<Evaluation> {
    let n = inst.size();
    let params = cfg.params.kpo_parameters(protocol, n)?;
    let initial = protocol.initial_state(n, cfg.cutoff)?;
    if params.decay_rate == 0.0 {
        let state = evolve_schrodinger(inst, &params, &initial, &cfg.integrator)?;
        let metrics = compute_metrics(&state, inst, &SignProjector::cached(cfg.cutoff))?;
        return Ok(Evaluation {
            metrics,
            ensemble: None,
        });
    }
    let seed = cfg
        .seed
        .ok_or_else(|| Error::InvalidParameter("a seed is required when the decay rate is nonzero".into()))?;
    let ens = run_trajectory_ensemble(inst, &params, &initial, &cfg.integrator, cfg.n_traj, seed)?;
    Ok(Evaluation {
        metrics: ens.mean.clone(),
        ensemble: Some(ens),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Per-trajectory seeds derived from `seed`; empty for deterministic runs.
    #[serde(default)]
    pub trajectory_seeds: Vec<u64>,
    pub wall_time_s: f64,
}

impl Provenance {
    fn new(cfg: &RunConfig, stochastic: bool, started: Instant) -> Self {
        let trajectory_seeds = match (stochastic, cfg.seed) {
            (true, Some(s)) => (0..cfg.n_traj as u64).map(|i| derive_seed(s, i)).collect(),
            _ => Vec::new(),
        };
        Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            trajectory_seeds,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }
}

/// Result document of a single protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub protocol: ProtocolSpec,
    pub detunings: Vec<f64>,
    pub result: Evaluation,
    pub provenance: Provenance,
}

pub fn run_protocol(cfg: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    let inst = cfg.instance.load()?;
    cfg.validate(inst.size())?;
    let result = evaluate(&inst, &cfg.protocol, cfg)?;
    Ok(RunReport {
        config: cfg.clone(),
        protocol: cfg.protocol.resolved(cfg.params.kerr),
        detunings: cfg.protocol.detunings(cfg.params.kerr, inst.size())?,
        provenance: Provenance::new(cfg, result.ensemble.is_some(), started),
        result,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyArm {
    pub protocol: ProtocolSpec,
    pub result: Evaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    /// Ground first, then excited_vacuum for modes `1..=N`.
    pub arms: Vec<StrategyArm>,
    /// Index into `arms`.
    pub chosen: usize,
}

impl StrategyOutcome {
    pub fn best(&self) -> &StrategyArm {
        &self.arms[self.chosen]
    }

    pub fn ground(&self) -> &StrategyArm {
        &self.arms[0]
    }
}

/// Lowest failure, then lowest residual energy, then lowest arm index.
fn choose(arms: &[StrategyArm]) -> usize {
    let cmp = |a: f64, b: f64| {
        if (a - b).abs() <= TIE_TOLERANCE {
            Ordering::Equal
        } else {
            a.total_cmp(&b)
        }
    };
    let mut best = 0;
    for (i, arm) in arms.iter().enumerate().skip(1) {
        let (a, b) = (&arm.result.metrics, &arms[best].result.metrics);
        let ord = cmp(a.failure_probability, b.failure_probability).then(cmp(a.residual_energy, b.residual_energy));
        if ord == Ordering::Less {
            best = i;
        }
    }
    best
}

/// The protocols tried by [`best_of_strategy`] on `modes` spins.
pub fn strategy_protocols(modes: usize, cfg: &RunConfig) -> Vec<ProtocolSpec> {
    let vacuum = |m| ProtocolSpec {
        base_detuning: cfg.protocol.base_detuning,
        ..ProtocolSpec::excited_vacuum(m)
    };
    let ground = ProtocolSpec {
        base_detuning: cfg.protocol.base_detuning,
        ..ProtocolSpec::ground()
    };
    std::iter::once(ground).chain((1..=modes).map(vacuum)).collect()
}

/// Ground AQC plus excited_vacuum on every oscillator; stochastic arms share
/// the master seed.
pub fn best_of_strategy(inst: &IsingInstance, cfg: &RunConfig) -> Result<StrategyOutcome> {
    let arms = strategy_protocols(inst.size(), cfg)
        .into_par_iter()
        .map(|protocol| {
            let result = evaluate(inst, &protocol, cfg)?;
            Ok(StrategyArm { protocol, result })
        })
        .collect::<Result<Vec<_>>>()?;
    let chosen = choose(&arms);
    Ok(StrategyOutcome { arms, chosen })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub config: RunConfig,
    pub outcome: StrategyOutcome,
    pub provenance: Provenance,
}

pub fn run_strategy(cfg: &RunConfig) -> Result<StrategyReport> {
    let started = Instant::now();
    let inst = cfg.instance.load()?;
    cfg.validate(inst.size())?;
    let outcome = best_of_strategy(&inst, cfg)?;
    Ok(StrategyReport {
        config: cfg.clone(),
        provenance: Provenance::new(cfg, cfg.params.decay_rate > 0.0, started),
        outcome,
    })
}

/// One instance of a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub index: usize,
    pub instance_seed: u64,
    pub ground_failure: f64,
    pub ground_residual: f64,
    pub strategy_failure: f64,
    pub strategy_residual: f64,
    pub chosen_protocol: ProtocolKind,
    /// 1-based; absent when the ground arm won.
    pub chosen_mode: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub config: RunConfig,
    pub rows: Vec<BatchRow>,
    pub provenance: Provenance,
}

impl BatchReport {
    pub fn max_ground_failure(&self) -> f64 {
        self.rows.iter().map(|r| r.ground_failure).fold(0.0, f64::max)
    }

    pub fn max_strategy_failure(&self) -> f64 {
        self.rows.iter().map(|r| r.strategy_failure).fold(0.0, f64::max)
    }
}

/// `count` random `spins`-spin instances (seed of instance `i` is
/// `derive_seed(seed, i)`), each solved by ground AQC and the strategy.
pub fn batch_random(count: usize, spins: usize, cfg: &RunConfig, seed: u64) -> Result<Vec<BatchRow>> {
    if count == 0 {
        return Err(Error::InvalidParameter("batch count must be at least 1".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|index| {
            let instance_seed = derive_seed(seed, index as u64);
            let inst = random_instance(spins, instance_seed)?;
            let out = best_of_strategy(&inst, cfg)?;
            let (g, b) = (&out.ground().result.metrics, &out.best().result.metrics);
            Ok(BatchRow {
                index,
                instance_seed,
                ground_failure: g.failure_probability,
                ground_residual: g.residual_energy,
                strategy_failure: b.failure_probability,
                strategy_residual: b.residual_energy,
                chosen_protocol: out.best().protocol.kind,
                chosen_mode: out.best().protocol.special_mode,
            })
        })
        .collect()
}

pub fn run_batch(cfg: &RunConfig) -> Result<BatchReport> {
    let started = Instant::now();
    let seed = cfg
        .seed
        .ok_or_else(|| Error::InvalidParameter("batch runs require a seed".into()))?;
    cfg.validate(cfg.batch.spins)?;
    let rows = batch_random(cfg.batch.count, cfg.batch.spins, cfg, seed)?;
    Ok(BatchReport {
        config: cfg.clone(),
        rows,
        provenance: Provenance::new(cfg, cfg.params.decay_rate > 0.0, started),
    })
}

/// One cell of a dissipation sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub protocol: ProtocolKind,
    pub special_mode: Option<usize>,
    pub success: f64,
    pub std_error: f64,
    pub failure: f64,
    pub residual_energy: f64,
    /// 1 for the deterministic `κ = 0` cells.
    pub trajectories: usize,
    pub mean_jumps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: RunConfig,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

impl SweepReport {
    pub fn row(&self, kappa: f64, kind: ProtocolKind) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.kappa == kappa && r.protocol == kind)
    }
}

/// Ground, excited_vacuum and excited_photon at each `κ`. Cells at the same
/// `κ` share the seed `derive_seed(seed, k)` for the `k`-th rate.
pub fn kappa_sweep(
    inst: &IsingInstance,
    cfg: &RunConfig,
    kappas: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if n_traj < MIN_SWEEP_TRAJECTORIES {
        return Err(Error::InvalidParameter(format!(
            "kappa sweep needs at least {MIN_SWEEP_TRAJECTORIES} trajectories, got {n_traj}"
        )));
    }
    if let Some(k) = kappas.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
        return Err(Error::InvalidParameter(format!("decay rate must be >= 0, got {k}")));
    }
    let base = cfg.protocol.base_detuning;
    let protocols = [
        ProtocolSpec {
            base_detuning: base,
            ..ProtocolSpec::ground()
        },
        ProtocolSpec {
            base_detuning: base,
            ..ProtocolSpec::excited_vacuum(cfg.sweep.vacuum_mode)
        },
        ProtocolSpec {
            base_detuning: base,
            ..ProtocolSpec::excited_photon(cfg.sweep.photon_mode)
        },
    ];
    let cells: Vec<(usize, &ProtocolSpec)> = (0..kappas.len())
        .flat_map(|k| protocols.iter().map(move |p| (k, p)))
        .collect();
    cells
        .into_par_iter()
        .map(|(k, protocol)| {
            let kappa = kappas[k];
            let cell = RunConfig {
                params: cfg.params.clone().with_decay_rate(kappa),
                n_traj,
                seed: Some(derive_seed(seed, k as u64)),
                ..cfg.clone()
            };
            let res = evaluate(inst, protocol, &cell)?;
            let (std_error, trajectories, mean_jumps) = match &res.ensemble {
                Some(e) => (e.success.std_error, e.trajectories, e.mean_jumps),
                None => (0.0, 1, 0.0),
            };
            Ok(SweepRow {
                kappa,
                protocol: protocol.kind,
                special_mode: protocol.special_mode,
                success: res.metrics.success_probability,
                std_error,
                failure: res.metrics.failure_probability,
                residual_energy: res.metrics.residual_energy,
                trajectories,
                mean_jumps,
            })
        })
        .collect()
}

pub fn run_kappa_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let started = Instant::now();
    let inst = cfg.instance.load()?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::InvalidParameter("kappa sweeps require a seed".into()))?;
    cfg.validate(inst.size())?;
    let rows = kappa_sweep(&inst, cfg, &cfg.sweep.kappas, cfg.n_traj, seed)?;
    Ok(SweepReport {
        config: cfg.clone(),
        rows,
        provenance: Provenance::new(cfg, true, started),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub config: RunConfig,
    pub trace: SpectrumTrace,
    pub provenance: Provenance,
}

/// Spectrum along the sweep of the configured protocol, tracking its
/// initial state.
pub fn run_spectrum(cfg: &RunConfig) -> Result<SpectrumReport> {
    let started = Instant::now();
    let inst = cfg.instance.load()?;
    cfg.validate(inst.size())?;
    let params = cfg.params.kpo_parameters(&cfg.protocol, inst.size())?;
    let opts = SpectrumOptions {
        levels: cfg.spectrum.levels,
        retained: cfg.spectrum.retained,
        cutoff: cfg.cutoff,
        initial_photons: Some(cfg.protocol.initial_photons(inst.size())),
    };
    let grid = uniform_grid(params.duration, cfg.spectrum.grid_points);
    let trace = trace_spectrum(&inst, &params, &grid, &opts)?;
    Ok(SpectrumReport {
        config: cfg.clone(),
        trace,
        provenance: Provenance::new(cfg, false, started),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub instance: InstanceDocument,
    pub rows: Vec<LandscapeRow>,
    /// Bit strings of the strict local minima.
    pub local_minima: Vec<String>,
}

pub fn run_landscape(cfg: &RunConfig) -> Result<LandscapeReport> {
    let inst = cfg.instance.load()?;
    Ok(LandscapeReport {
        instance: InstanceDocument::from_instance(&inst),
        rows: energy_landscape(&inst)?,
        local_minima: crate::ising::local_minima(&inst)?.iter().map(|s| s.bits()).collect(),
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// A CSV table with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    /// File stem.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(name: &str, header: &[&str]) -> Self {
        CsvTable {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(m: Option<usize>) -> String {
    m.map(|m| m.to_string()).unwrap_or_default()
}

/// A result document with its CSV tables.
pub trait Report: Serialize {
    /// Stem of the JSON file.
    const NAME: &'static str;

    fn tables(&self) -> Vec<CsvTable>;

    /// Writes `<dir>/<NAME>.json` and one CSV per table; returns the paths.
    fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join(format!("{}.json", Self::NAME));
        write_json(&json, self)?;
        let mut paths = vec![json];
        for t in self.tables() {
            let p = dir.join(format!("{}.csv", t.name));
            t.write(&p)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// Columns: `configuration` (bit string, `0` for spin +1), `spins`, `energy`,
/// `probability`.
fn probability_table(name: &str, metrics: &RunMetrics, inst: &IsingInstance) -> CsvTable {
    let mut t = CsvTable::new(name, &["configuration", "spins", "energy", "probability"]);
    for (bits, p) in &metrics.config_probs {
        let spins: Vec<i8> = bits.chars().map(|c| if c == '0' { 1 } else { -1 }).collect();
        let s = crate::ising::SpinConfiguration::new(spins).expect("bit strings hold spins");
        let e = inst.energy(&s).unwrap_or(f64::NAN);
        t.push(vec![bits.clone(), s.to_string(), num(e), num(*p)]);
    }
    t
}

impl Report for RunReport {
    const NAME: &'static str = "solve";

    fn tables(&self) -> Vec<CsvTable> {
        match self.config.instance.load() {
            Ok(inst) => vec![probability_table("solve_probabilities", &self.result.metrics, &inst)],
            Err(_) => Vec::new(),
        }
    }
}

impl Report for StrategyReport {
    const NAME: &'static str = "strategy";

    /// Columns: `arm`, `protocol`, `special_mode`, `failure`,
    /// `residual_energy`, `chosen`.
    fn tables(&self) -> Vec<CsvTable> {
        let mut t = CsvTable::new(
            "strategy_arms",
            &[
                "arm",
                "protocol",
                "special_mode",
                "failure",
                "residual_energy",
                "chosen",
            ],
        );
        for (i, a) in self.outcome.arms.iter().enumerate() {
            let m = &a.result.metrics;
            t.push(vec![
                i.to_string(),
                a.protocol.kind.label().into(),
                opt(a.protocol.special_mode),
                num(m.failure_probability),
                num(m.residual_energy),
                (i == self.outcome.chosen).to_string(),
            ]);
        }
        vec![t]
    }
}

impl Report for BatchReport {
    const NAME: &'static str = "batch";

    /// Columns: `index`, `instance_seed`, `ground_failure`,
    /// `ground_residual`, `strategy_failure`, `strategy_residual`,
    /// `chosen_protocol`, `chosen_mode`.
    fn tables(&self) -> Vec<CsvTable> {
        let mut t = CsvTable::new(
            "batch",
            &[
                "index",
                "instance_seed",
                "ground_failure",
                "ground_residual",
                "strategy_failure",
                "strategy_residual",
                "chosen_protocol",
                "chosen_mode",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.index.to_string(),
                r.instance_seed.to_string(),
                num(r.ground_failure),
                num(r.ground_residual),
                num(r.strategy_failure),
                num(r.strategy_residual),
                r.chosen_protocol.label().into(),
                opt(r.chosen_mode),
            ]);
        }
        vec![t]
    }
}

impl Report for SweepReport {
    const NAME: &'static str = "sweep_kappa";

    /// Columns: `kappa`, `protocol`, `special_mode`, `success`, `std_error`,
    /// `failure`, `residual_energy`, `trajectories`, `mean_jumps`.
    fn tables(&self) -> Vec<CsvTable> {
        let mut t = CsvTable::new(
            "sweep_kappa",
            &[
                "kappa",
                "protocol",
                "special_mode",
                "success",
                "std_error",
                "failure",
                "residual_energy",
                "trajectories",
                "mean_jumps",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                num(r.kappa),
                r.protocol.label().into(),
                opt(r.special_mode),
                num(r.success),
                num(r.std_error),
                num(r.failure),
                num(r.residual_energy),
                r.trajectories.to_string(),
                num(r.mean_jumps),
            ]);
        }
        vec![t]
    }
}

impl Report for SpectrumReport {
    const NAME: &'static str = "spectrum";

    /// Columns: `t`, `p`, `ground_energy`, `gap_1..gap_m`, `tracked_level`,
    /// `tracked_overlap`.
    fn tables(&self) -> Vec<CsvTable> {
        let m = self.trace.levels;
        let gaps: Vec<String> = (1..=m).map(|k| format!("gap_{k}")).collect();
        let mut header = vec!["t", "p", "ground_energy"];
        header.extend(gaps.iter().map(String::as_str));
        header.extend(["tracked_level", "tracked_overlap"]);
        let mut t = CsvTable::new("spectrum", &header);
        for p in &self.trace.points {
            let mut row = vec![num(p.time), num(p.pump), num(p.ground_energy)];
            row.extend(p.gaps.iter().map(|&g| num(g)));
            row.push(p.tracked_level.to_string());
            row.push(num(p.tracked_overlap));
            t.push(row);
        }
        vec![t]
    }
}

impl Report for LandscapeReport {
    const NAME: &'static str = "landscape";

    /// Columns: `config_bits`, `distance`, `energy`.
    fn tables(&self) -> Vec<CsvTable> {
        let mut t = CsvTable::new("landscape", &["config_bits", "distance", "energy"]);
        for r in &self.rows {
            t.push(vec![r.configuration.clone(), r.distance.to_string(), num(r.energy)]);
        }
        vec![t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detunings_follow_the_protocol() {
        assert_eq!(ProtocolSpec::ground().detunings(1.0, 3).unwrap(), vec![1.0; 3]);
        assert_eq!(
            ProtocolSpec::excited_vacuum(2).detunings(1.0, 3).unwrap(),
            vec![1.0, -0.25, 1.0]
        );
        assert_eq!(
            ProtocolSpec::excited_photon(3).detunings(2.0, 3).unwrap(),
            vec![2.0, 2.0, 0.5]
        );
    }

    #[test]
    fn invalid_protocols_are_rejected() {
        let cases = [
            ProtocolSpec::excited_vacuum(1).with_special_detuning(-0.5),
            ProtocolSpec::excited_vacuum(1).with_special_detuning(0.0),
            ProtocolSpec::excited_photon(1).with_special_detuning(1.0),
            ProtocolSpec::excited_photon(1).with_special_detuning(-0.1),
            ProtocolSpec::excited_vacuum(0),
            ProtocolSpec::excited_vacuum(5),
            ProtocolSpec {
                special_mode: None,
                ..ProtocolSpec::excited_photon(1)
            },
            ProtocolSpec {
                special_mode: Some(1),
                ..ProtocolSpec::ground()
            },
        ];
        for p in cases {
            assert!(matches!(p.validate(1.0, 4), Err(Error::InvalidProtocol(_))), "{p:?}");
        }
    }

    #[test]
    fn photon_protocol_starts_with_one_photon() {
        let c = FockCutoff::new(3).unwrap();
        let s = ProtocolSpec::excited_photon(2).initial_state(2, c).unwrap();
        assert_eq!(s.mean_photons(), vec![0.0, 1.0]);
        assert_eq!(ProtocolSpec::excited_photon(2).initial_photons(3), vec![0, 1, 0]);
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_json(r#"{"instance": "hard"}"#).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let cfg = RunConfig::from_json(
            r#"{"instance": {"random": {"n": 3, "seed": 9}},
                "protocol": {"kind": "excited_vacuum", "special_mode": 2},
                "integrator": {"dt": 0.01}}"#,
        )
        .unwrap();
        assert_eq!(cfg.integrator.dt, 0.01);
        assert!(cfg.integrator.renormalize_each_step);
        assert_eq!(cfg.protocol.special_index(), Some(1));
        assert_eq!(cfg.instance.load().unwrap(), random_instance(3, 9).unwrap());
    }

    #[test]
    fn stochastic_runs_need_a_seed() {
        let cfg = RunConfig {
            params: PhysicsConfig::default().with_decay_rate(0.01),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(4), Err(Error::InvalidParameter(_))));
        assert!(RunConfig { seed: Some(1), ..cfg }.validate(4).is_ok());
    }

    fn arm(kind: ProtocolKind, mode: Option<usize>, failure: f64, residual: f64) -> StrategyArm {
        StrategyArm {
            protocol: ProtocolSpec {
                kind,
                special_mode: mode,
                ..Default::default()
            },
            result: Evaluation {
                metrics: RunMetrics {
                    config_probs: Default::default(),
                    failure_probability: failure,
                    success_probability: 1.0 - failure,
                    residual_energy: residual,
                },
                ensemble: None,
            },
        }
    }

    #[test]
    fn selection_breaks_ties_by_residual_then_index() {
        use ProtocolKind::*;
        let arms = vec![
            arm(Ground, None, 0.5, 0.1),
            arm(ExcitedVacuum, Some(1), 0.2, 0.3),
            arm(ExcitedVacuum, Some(2), 0.2, 0.2),
            arm(ExcitedVacuum, Some(3), 0.2, 0.2),
        ];
        assert_eq!(choose(&arms), 2);
        let flat = vec![arm(Ground, None, 0.5, 0.1), arm(ExcitedVacuum, Some(1), 0.5, 0.1)];
        assert_eq!(choose(&flat), 0);
    }
}
