use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use kpo_aqc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(kpo_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(kpo_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn hard_instance_brute_force() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(kpo_instance_hard(&mut inst), KpoStatus::Ok);
        assert_eq!(kpo_instance_size(inst), 4);
        let mut spins = [0i8; 4];
        let mut e = 0.0;
        assert_eq!(
            kpo_instance_brute_force(inst, spins.as_mut_ptr(), 4, &mut e),
            KpoStatus::Ok
        );
        let (best, energy) =
            kpo_aqc::ising::brute_force_solve(&kpo_aqc::ising::IsingInstance::hard_instance()).unwrap();
        assert_eq!(spins.as_slice(), best.spins());
        assert_eq!(e, energy);
        let mut short = [0i8; 3];
        assert_eq!(
            kpo_instance_brute_force(inst, short.as_mut_ptr(), 3, &mut e),
            KpoStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 4"));
        kpo_instance_free(inst);
    }
}

#[test]
fn instance_documents_parse_and_reject() {
    unsafe {
        let mut inst = ptr::null_mut();
        let good = CString::new(r#"{"n": 2, "j_upper": [[1, 2, "0.5"]], "h": ["0", "-1"]}"#).unwrap();
        assert_eq!(kpo_instance_from_json(good.as_ptr(), &mut inst), KpoStatus::Ok);
        assert_eq!(kpo_instance_size(inst), 2);
        kpo_instance_free(inst);

        let bad = CString::new(r#"{"n": 2, "j_upper": [[2, 1, "0.5"]], "h": ["0", "0"]}"#).unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(
            kpo_instance_from_json(bad.as_ptr(), &mut other),
            KpoStatus::InvalidConfig
        );
        assert!(other.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(kpo_instance_from_json(ptr::null(), &mut other), KpoStatus::NullPointer);
        let latin1 = [0xffu8, 0];
        assert_eq!(
            kpo_instance_from_json(latin1.as_ptr().cast(), &mut other),
            KpoStatus::InvalidUtf8
        );
    }
}

#[test]
fn random_instances_are_seeded() {
    unsafe {
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(kpo_instance_random(5, 11, &mut a), KpoStatus::Ok);
        assert_eq!(kpo_instance_random(5, 11, &mut b), KpoStatus::Ok);
        let (mut sa, mut sb) = ([0i8; 5], [0i8; 5]);
        let (mut ea, mut eb) = (0.0, 0.0);
        kpo_instance_brute_force(a, sa.as_mut_ptr(), 5, &mut ea);
        kpo_instance_brute_force(b, sb.as_mut_ptr(), 5, &mut eb);
        assert_eq!((sa, ea), (sb, eb));
        kpo_instance_free(a);
        kpo_instance_free(b);
        let mut c = ptr::null_mut();
        assert_eq!(kpo_instance_random(1, 0, &mut c), KpoStatus::InvalidConfig);
    }
}

#[test]
fn short_run_through_handles() {
    let cfg_json = CString::new(r#"{"params": {"duration": 4.0}, "integrator": {"dt": 0.01}, "cutoff": 5}"#).unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(kpo_config_from_json(cfg_json.as_ptr(), &mut cfg), KpoStatus::Ok);
        let mut inst = ptr::null_mut();
        kpo_instance_random(2, 3, &mut inst);
        assert_eq!(kpo_config_set_instance(cfg, inst), KpoStatus::Ok);
        kpo_instance_free(inst);

        let mut report = ptr::null_mut();
        assert_eq!(kpo_run_protocol(cfg, &mut report), KpoStatus::Ok, "{}", last_error());
        let (mut fail, mut succ, mut resid) = (0.0, 0.0, 0.0);
        assert_eq!(
            kpo_report_metrics(report, &mut fail, &mut succ, ptr::null_mut()),
            KpoStatus::Ok
        );
        assert_eq!(
            kpo_report_metrics(report, ptr::null_mut(), ptr::null_mut(), &mut resid),
            KpoStatus::Ok
        );
        assert!((fail + succ - 1.0).abs() < 1e-12);
        assert!(resid >= -1e-12);

        let mut text = ptr::null_mut();
        assert_eq!(kpo_report_to_json(report, &mut text), KpoStatus::Ok);
        let doc: kpo_aqc::driver::RunReport = serde_json::from_str(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        assert_eq!(doc.result.metrics.failure_probability, fail);
        kpo_string_free(text);
        kpo_report_free(report);
        kpo_config_free(cfg);
    }
}

#[test]
fn invalid_protocol_is_a_config_error() {
    let cfg_json = CString::new(r#"{"protocol": {"kind": "excited_vacuum", "special_mode": 9}}"#).unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(kpo_config_from_json(cfg_json.as_ptr(), &mut cfg), KpoStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(kpo_run_protocol(cfg, &mut report), KpoStatus::InvalidConfig);
        assert!(last_error().contains("special_mode"));
        assert!(report.is_null());
        kpo_config_free(cfg);
    }
}

#[test]
fn diverging_run_is_a_numerical_failure() {
    let cfg_json = CString::new(
        r#"{"instance": {"random": {"n": 2, "seed": 1}}, "params": {"duration": 40.0},
            "integrator": {"dt": 4.0, "renormalize_each_step": false}, "cutoff": 6}"#,
    )
    .unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        kpo_config_from_json(cfg_json.as_ptr(), &mut cfg);
        let mut report = ptr::null_mut();
        assert_eq!(kpo_run_protocol(cfg, &mut report), KpoStatus::NumericalFailure);
        kpo_config_free(cfg);
    }
}

#[test]
fn projector_entries() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(kpo_sign_projector_entry(10, 0, 1, &mut v), KpoStatus::Ok);
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert_eq!(kpo_sign_projector_entry(10, 3, 3, &mut v), KpoStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(kpo_sign_projector_entry(10, 10, 0, &mut v), KpoStatus::InvalidConfig);
        assert_eq!(kpo_sign_projector_entry(1, 0, 0, &mut v), KpoStatus::InvalidConfig);
        assert_eq!(
            kpo_sign_projector_entry(4, 0, 0, ptr::null_mut()),
            KpoStatus::NullPointer
        );
    }
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        kpo_instance_free(ptr::null_mut());
        kpo_config_free(ptr::null_mut());
        kpo_report_free(ptr::null_mut());
        kpo_string_free(ptr::null_mut());
        assert_eq!(kpo_instance_size(ptr::null()), 0);
        let mut out = ptr::null_mut();
        assert_eq!(kpo_run_protocol(ptr::null(), &mut out), KpoStatus::NullPointer);
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/kpo_aqc.h")).unwrap();
    for name in [
        "typedef struct KpoInstance KpoInstance;",
        "typedef struct KpoConfig KpoConfig;",
        "typedef struct KpoReport KpoReport;",
        "KPO_STATUS_NUMERICAL_FAILURE = 4",
        "kpo_run_protocol(",
        "kpo_report_to_json(",
        "kpo_instance_brute_force(",
        "kpo_sign_projector_entry(",
        "kpo_last_error(void)",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Directory holding the static library built alongside this test binary.
fn library_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = library_dir().join("libkpo_aqc_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "kpo_aqc.h"
int main(void) {
    KpoInstance *inst = NULL;
    if (kpo_instance_hard(&inst) != KPO_STATUS_OK) return 1;
    int8_t spins[4];
    double e = 0.0;
    if (kpo_instance_brute_force(inst, spins, 4, &e) != KPO_STATUS_OK) return 2;
    kpo_instance_free(inst);
    double p = 0.0;
    if (kpo_sign_projector_entry(8, 2, 2, &p) != KPO_STATUS_OK || p != 0.5) return 3;
    printf("%d %d %d %d %.12f\n", spins[0], spins[1], spins[2], spins[3], e);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("probe");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "probe exited with {:?}", out.status);
    let (best, energy) = kpo_aqc::ising::brute_force_solve(&kpo_aqc::ising::IsingInstance::hard_instance()).unwrap();
    let expected = format!(
        "{} {} {} {} {:.12}\n",
        best.spins()[0],
        best.spins()[1],
        best.spins()[2],
        best.spins()[3],
        energy
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout), expected);
}
