use std::ffi::{CStr, CString};
use std::ptr;

use hrbeam_ffi::*;

const SMALL: &str = r#"{
    "array": {"n_antennas": 3},
    "region": {"intervals": [[-0.2, 0.2]]},
    "total_q": 9,
    "algo": {"outer_grid_l": 5},
    "schemes": ["HR6DMA", "NRA"]
}"#;

fn last_error() -> String {
    let p = hr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(json: &str) -> *mut HrScenario {
    let text = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hr_scenario_from_json(text.as_ptr(), &mut s) }, HrStatus::Ok);
    s
}

#[test]
fn solve_round_trip() {
    let s = scenario(SMALL);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(hr_solve(s, &mut r), HrStatus::Ok);
        assert_eq!(hr_report_scheme_count(r), 2);

        let (mut hr, mut nra) = (0.0, 0.0);
        assert_eq!(hr_report_worst_gain(r, HrScheme::Hr6dma as u32, &mut hr), HrStatus::Ok);
        assert_eq!(hr_report_worst_gain(r, HrScheme::Nra as u32, &mut nra), HrStatus::Ok);
        assert!(hr >= nra * (1.0 - 1e-9) && nra > 0.0, "{hr} {nra}");

        let mut psi = f64::NAN;
        assert_eq!(hr_report_psi_star(r, HrScheme::Hr6dma as u32, &mut psi), HrStatus::Ok);
        assert!(psi.abs() <= std::f64::consts::FRAC_PI_3 + 1e-12);

        let mut phi = [0.0; 3];
        let mut len = 0;
        assert_eq!(hr_report_phi(r, HrScheme::Hr6dma as u32, phi.as_mut_ptr(), 3, &mut len), HrStatus::Ok);
        assert_eq!(len, 3);
        let mut w = [0.0; 6];
        assert_eq!(hr_report_weights(r, HrScheme::Hr6dma as u32, w.as_mut_ptr(), 6, &mut len), HrStatus::Ok);
        assert_eq!(len, 6);

        // The reported gain is the minimum over the sampled region.
        let grid: Vec<f64> = (0..9).map(|i| -0.2 + 0.05 * i as f64).collect();
        let mut worst = f64::INFINITY;
        for theta in grid {
            let mut g = 0.0;
            assert_eq!(hr_beamforming_gain(s, theta, psi, phi.as_ptr(), w.as_ptr(), &mut g), HrStatus::Ok);
            worst = worst.min(g);
        }
        assert!((worst - hr).abs() <= 1e-9 * hr, "{worst} vs {hr}");

        let json = hr_report_to_json(r);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        hr_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["results"].as_array().unwrap().len(), 2);

        hr_report_free(r);
        hr_scenario_free(s);
    }
}

#[test]
fn missing_scheme_and_small_buffer() {
    let s = scenario(SMALL);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(hr_solve(s, &mut r), HrStatus::Ok);
        let mut g = 0.0;
        assert_eq!(hr_report_worst_gain(r, HrScheme::Csar as u32, &mut g), HrStatus::NotFound);
        assert!(last_error().contains("CSAR"));
        assert_eq!(hr_report_worst_gain(r, 42, &mut g), HrStatus::InvalidArgument);

        let mut buf = [0.0; 1];
        let mut len = 0;
        assert_eq!(
            hr_report_phi(r, HrScheme::Nra as u32, buf.as_mut_ptr(), 1, &mut len),
            HrStatus::BufferTooSmall
        );
        assert_eq!(len, 3);
        assert_eq!(hr_report_phi(r, HrScheme::Nra as u32, ptr::null_mut(), 0, &mut len), HrStatus::BufferTooSmall);
        hr_report_free(r);
        hr_scenario_free(s);
    }
}

#[test]
fn bad_input_is_reported() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(hr_scenario_from_json(ptr::null(), &mut s), HrStatus::NullPointer);
        let bad = CString::new("{\"total_q\": ").unwrap();
        assert_eq!(hr_scenario_from_json(bad.as_ptr(), &mut s), HrStatus::ConfigError);
        assert!(last_error().contains("parse"));
        let unknown = CString::new("{\"bogus\": 1}").unwrap();
        assert_eq!(hr_scenario_from_json(unknown.as_ptr(), &mut s), HrStatus::ConfigError);
        assert!(s.is_null());

        let s = hr_scenario_default();
        assert_eq!(hr_scenario_set_total_q(s, 0), HrStatus::ConfigError);
        assert_eq!(hr_scenario_set_region(s, 0.5, -0.5), HrStatus::ConfigError);
        assert_eq!(hr_scenario_set_schemes(s, [9u32].as_ptr(), 1), HrStatus::InvalidArgument);
        assert_eq!(hr_scenario_set_schemes(s, ptr::null(), 0), HrStatus::InvalidArgument);
        assert_eq!(hr_solve(ptr::null(), ptr::null_mut()), HrStatus::NullPointer);
        assert_eq!(hr_report_scheme_count(ptr::null()), 0);
        assert!(hr_report_to_json(ptr::null()).is_null());
        hr_scenario_free(s);
        hr_scenario_free(ptr::null_mut());
        hr_report_free(ptr::null_mut());
        hr_string_free(ptr::null_mut());
    }
}

#[test]
fn setters_drive_the_solve() {
    unsafe {
        let s = hr_scenario_default();
        assert_eq!(hr_scenario_set_region(s, 0.1, 0.3), HrStatus::Ok);
        assert_eq!(hr_scenario_set_total_q(s, 5), HrStatus::Ok);
        let ids = [HrScheme::Csar as u32, HrScheme::Csar as u32];
        assert_eq!(hr_scenario_set_schemes(s, ids.as_ptr(), 2), HrStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(hr_solve(s, &mut r), HrStatus::Ok);
        assert_eq!(hr_report_scheme_count(r), 1);
        let mut g = 0.0;
        assert_eq!(hr_report_worst_gain(r, HrScheme::Csar as u32, &mut g), HrStatus::Ok);
        assert!(g > 0.0);
        hr_report_free(r);
        hr_scenario_free(s);
    }
}

#[test]
fn gain_matches_aligned_array() {
    unsafe {
        let s = hr_scenario_default();
        let phi = [0.0; 10];
        let m = 1.0 / 10f64.sqrt();
        let w: Vec<f64> = (0..10).flat_map(|_| [m, 0.0]).collect();
        let mut g = 0.0;
        assert_eq!(hr_beamforming_gain(s, 0.0, 0.0, phi.as_ptr(), w.as_ptr(), &mut g), HrStatus::Ok);
        // N·g_max with unit-norm weights.
        assert!((g - 40.0).abs() < 1e-9, "{g}");
        hr_scenario_free(s);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(hr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hrbeam.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for item in ["typedef struct HrScenario HrScenario;", "typedef struct HrReport HrReport;", "HR_STATUS_OK = 0", "HR_SCHEME_CSAR = 5"] {
        assert!(header.contains(item), "{item}");
    }
}
