use kpo_aqc::driver::{
    batch_random, best_of_strategy, evaluate, kappa_sweep, read_json, run_landscape, run_protocol, InstanceSource,
    ProtocolKind, ProtocolSpec, Report, RunConfig, RunReport,
};
use kpo_aqc::fock::FockCutoff;
use kpo_aqc::ising::{random_instance, InstanceDocument, IsingInstance};
use kpo_aqc::Error;

fn quick(inst: &IsingInstance) -> RunConfig {
    let mut cfg = RunConfig {
        instance: InstanceSource::Inline(InstanceDocument::from_instance(inst)),
        cutoff: FockCutoff::new(5).unwrap(),
        ..RunConfig::default()
    };
    cfg.params.duration = 8.0;
    cfg.integrator = cfg.integrator.with_dt(0.01);
    cfg
}

#[test]
fn protocol_validation() {
    let k = 1.0;
    assert!(ProtocolSpec::ground().validate(k, 4).is_ok());
    assert!(ProtocolSpec::excited_vacuum(4).validate(k, 4).is_ok());
    assert!(ProtocolSpec::excited_photon(1).validate(k, 4).is_ok());
    for bad in [
        ProtocolSpec::excited_vacuum(0),
        ProtocolSpec::excited_vacuum(5),
        ProtocolSpec::excited_vacuum(2).with_special_detuning(0.1),
        ProtocolSpec::excited_vacuum(2).with_special_detuning(-0.5),
        ProtocolSpec::excited_photon(2).with_special_detuning(-0.1),
        ProtocolSpec::excited_photon(2).with_special_detuning(1.0),
        ProtocolSpec {
            special_mode: Some(1),
            ..ProtocolSpec::ground()
        },
    ] {
        assert!(matches!(bad.validate(k, 4), Err(Error::InvalidProtocol(_))), "{bad:?}");
    }
}

#[test]
fn protocol_defaults() {
    let v = ProtocolSpec::excited_vacuum(2);
    assert_eq!(v.detunings(1.0, 3).unwrap(), vec![1.0, -0.25, 1.0]);
    assert_eq!(v.special_index(), Some(1));
    assert_eq!(v.initial_photons(3), vec![0, 0, 0]);
    let p = ProtocolSpec::excited_photon(3);
    assert_eq!(p.detunings(2.0, 3).unwrap(), vec![2.0, 2.0, 0.5]);
    assert_eq!(p.initial_photons(3), vec![0, 0, 1]);
    let r = p.resolved(1.0);
    assert_eq!(r.special_detuning, Some(0.25));
    assert_eq!(r.base_detuning, Some(1.0));
}

#[test]
fn configs_round_trip_and_validate() {
    let cfg = RunConfig::from_json(
        r#"{"instance": "hard", "protocol": {"kind": "excited_photon", "special_mode": 2},
            "params": {"decay_rate": 0.005}, "seed": 7, "n_traj": 300}"#,
    )
    .unwrap();
    assert_eq!(cfg.protocol.kind, ProtocolKind::ExcitedPhoton);
    assert_eq!(cfg.params.duration, 400.0);
    assert_eq!(cfg.integrator.dt, 0.002);
    assert_eq!(cfg.cutoff.levels(), 15);
    assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    assert!(cfg.validate(4).is_ok());

    let unseeded = RunConfig {
        seed: None,
        ..cfg.clone()
    };
    assert!(unseeded.validate(4).is_err());
    assert!(RunConfig::from_json(r#"{"protocol": {"kind": "sideways"}}"#).is_err());
    assert!(RunConfig::from_json(r#"{"cutoff": 1}"#).is_err());
}

#[test]
fn relative_instance_paths_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let inst = random_instance(3, 2).unwrap();
    std::fs::create_dir(dir.path().join("data")).unwrap();
    std::fs::write(
        dir.path().join("data/i.json"),
        InstanceDocument::from_instance(&inst).to_json().unwrap(),
    )
    .unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"instance": {"path": "data/i.json"}}"#).unwrap();
    let cfg = RunConfig::load(&dir.path().join("run.json")).unwrap();
    assert_eq!(cfg.instance.load().unwrap(), inst);
}

#[test]
fn solve_reports_are_deterministic_and_round_trip() {
    let inst = random_instance(2, 5).unwrap();
    let cfg = RunConfig {
        protocol: ProtocolSpec::excited_vacuum(1),
        ..quick(&inst)
    };
    let a = run_protocol(&cfg).unwrap();
    let b = run_protocol(&cfg).unwrap();
    assert_eq!(a.result, b.result);
    assert_eq!(a.detunings, vec![-0.25, 1.0]);
    assert_eq!(a.protocol.special_detuning, Some(-0.25));
    let total: f64 = a.result.metrics.config_probs.values().sum();
    assert!((total - 1.0).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let paths = a.write_to(dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    let back: RunReport = read_json(&paths[0]).unwrap();
    assert_eq!(back.result, a.result);
    let csv = std::fs::read_to_string(&paths[1]).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "configuration,spins,energy,probability");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn stochastic_runs_depend_only_on_the_seed() {
    let inst = random_instance(2, 6).unwrap();
    let mut cfg = RunConfig {
        protocol: ProtocolSpec::excited_photon(2),
        n_traj: 6,
        seed: Some(3),
        ..quick(&inst)
    };
    cfg.params.decay_rate = 0.05;
    let a = evaluate(&inst, &cfg.protocol, &cfg).unwrap();
    let b = evaluate(&inst, &cfg.protocol, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ensemble.as_ref().unwrap().trajectories, 6);
    cfg.seed = None;
    assert!(evaluate(&inst, &cfg.protocol, &cfg).is_err());
}

#[test]
fn strategy_never_loses_to_ground() {
    for seed in 0..3 {
        let inst = random_instance(3, 40 + seed).unwrap();
        let out = best_of_strategy(&inst, &quick(&inst)).unwrap();
        assert_eq!(out.arms.len(), 4);
        assert_eq!(out.ground().protocol.kind, ProtocolKind::Ground);
        let best = out
            .arms
            .iter()
            .map(|a| a.result.metrics.failure_probability)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.best().result.metrics.failure_probability, best);
        assert!(best <= out.ground().result.metrics.failure_probability);
    }
}

#[test]
fn ties_go_to_the_earliest_arm() {
    let inst = IsingInstance::zero(2).unwrap();
    let out = best_of_strategy(&inst, &quick(&inst)).unwrap();
    assert!(out
        .arms
        .iter()
        .all(|a| a.result.metrics.failure_probability.abs() < 1e-12));
    assert_eq!(out.chosen, 0);
}

#[test]
fn batches_are_reproducible() {
    let cfg = quick(&IsingInstance::zero(2).unwrap());
    let a = batch_random(2, 2, &cfg, 11).unwrap();
    assert_eq!(a, batch_random(2, 2, &cfg, 11).unwrap());
    assert_eq!(a.len(), 2);
    assert_ne!(a[0].instance_seed, a[1].instance_seed);
    for row in &a {
        assert!(row.strategy_failure <= row.ground_failure);
        let inst = random_instance(2, row.instance_seed).unwrap();
        let direct = best_of_strategy(&inst, &cfg).unwrap();
        assert_eq!(direct.best().result.metrics.failure_probability, row.strategy_failure);
    }
}

#[test]
fn sweep_needs_enough_trajectories() {
    let inst = random_instance(2, 1).unwrap();
    let cfg = RunConfig {
        seed: Some(1),
        ..quick(&inst)
    };
    assert!(kappa_sweep(&inst, &cfg, &[0.0, 0.01], 99, 1).is_err());
    assert!(kappa_sweep(&inst, &cfg, &[-0.01], 100, 1).is_err());
}

#[test]
fn closed_sweep_cells_are_deterministic() {
    let inst = random_instance(2, 1).unwrap();
    let cfg = quick(&inst);
    let rows = kappa_sweep(&inst, &cfg, &[0.0], 100, 1).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.trajectories, 1);
        assert!((r.success + r.failure - 1.0).abs() < 1e-12);
    }
    let photon = rows.iter().find(|r| r.protocol == ProtocolKind::ExcitedPhoton).unwrap();
    let direct = evaluate(&inst, &ProtocolSpec::excited_photon(1), &cfg).unwrap();
    assert_eq!(photon.success, direct.metrics.success_probability);
}

#[test]
fn landscape_report_lists_every_configuration() {
    let cfg = RunConfig::default();
    let rep = run_landscape(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 16);
    assert_eq!(rep.local_minima.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let paths = rep.write_to(dir.path()).unwrap();
    let csv = std::fs::read_to_string(&paths[1]).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "config_bits,distance,energy");
}
