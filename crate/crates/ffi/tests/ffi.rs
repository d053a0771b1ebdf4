use std::ffi::{CStr, CString};
use std::ptr;

use dmcvqkd_ffi::*;

const BENIGN: &str = r#"{"alpha":0.5,"transmittance":0.5,"excess_noise":0.01,"beta":0.95,
    "n":100000000,"m":1000,"k":10000000000,"p_ec":0.9,"delta_ent_mode":"derived"}"#;

fn last_error() -> String {
    let p = dmcvqkd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(json: &str) -> *mut DmcvqkdConfig {
    let json = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { dmcvqkd_config_from_json(json.as_ptr(), &mut cfg) }, DmcvqkdStatus::Ok);
    cfg
}

#[test]
fn keyrate_matches_library() {
    let cfg = config(BENIGN);
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(dmcvqkd_keyrate(cfg, &mut rep), DmcvqkdStatus::Ok);
        let expected = dmcvqkd::workflow::keyrate(&dmcvqkd::config::RunConfig::from_json(BENIGN).unwrap())
            .unwrap()
            .key;
        assert_eq!(dmcvqkd_report_length(rep), expected.l);
        assert_eq!(dmcvqkd_report_feasible(rep), 1);

        let mut t = DmcvqkdKeyTerms::default();
        assert_eq!(dmcvqkd_report_terms(rep, &mut t), DmcvqkdStatus::Ok);
        let audit = t.entropy_term - t.holevo_term - t.leak_ec - t.delta_aep - t.delta_ent;
        assert_eq!(audit, t.l);

        let mut s = ptr::null_mut();
        assert_eq!(dmcvqkd_report_to_csv(rep, &mut s), DmcvqkdStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        assert_eq!(text, dmcvqkd::report::key_report_csv(&expected).unwrap());
        dmcvqkd_string_free(s);
        dmcvqkd_report_free(rep);
        dmcvqkd_config_free(cfg);
    }
}

#[test]
fn config_set_validates() {
    let cfg = config(BENIGN);
    let name = CString::new("transmittance").unwrap();
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(dmcvqkd_config_set(cfg, name.as_ptr(), 1.5), DmcvqkdStatus::Config);
        assert!(last_error().contains("transmittance"));
        // Failed set leaves the handle usable and unchanged.
        assert_eq!(dmcvqkd_config_set(cfg, name.as_ptr(), 0.001), DmcvqkdStatus::Ok);
        assert_eq!(dmcvqkd_keyrate(cfg, &mut rep), DmcvqkdStatus::Ok);
        assert_eq!(dmcvqkd_report_feasible(rep), 0);
        dmcvqkd_report_free(rep);

        let bogus = CString::new("colour").unwrap();
        assert_eq!(dmcvqkd_config_set(cfg, bogus.as_ptr(), 1.0), DmcvqkdStatus::Config);
        dmcvqkd_config_free(cfg);
    }
}

#[test]
fn errors_and_nulls() {
    let json = CString::new(r#"{"alpha":0.5}"#).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(dmcvqkd_config_from_json(json.as_ptr(), &mut cfg), DmcvqkdStatus::Config);
        assert!(cfg.is_null());
        assert!(last_error().contains("transmittance"));
        assert_eq!(dmcvqkd_config_from_json(ptr::null(), &mut cfg), DmcvqkdStatus::NullPointer);
        assert_eq!(dmcvqkd_keyrate(ptr::null(), &mut ptr::null_mut()), DmcvqkdStatus::NullPointer);
        assert!(dmcvqkd_report_length(ptr::null()).is_nan());
        dmcvqkd_config_free(ptr::null_mut());
        dmcvqkd_report_free(ptr::null_mut());
        dmcvqkd_string_free(ptr::null_mut());

        let mut f = 0.0;
        assert_eq!(dmcvqkd_holevo_f(1.0, 1.0, 2.0, &mut f), DmcvqkdStatus::NonPhysical);
    }
}

#[test]
fn bound_helpers() {
    unsafe {
        let mut s = DmcvqkdSpectrum::default();
        assert_eq!(dmcvqkd_symplectic_eigenvalues(1.5, 1.25, 0.5, &mut s), DmcvqkdStatus::Ok);
        assert!(s.nu1 >= s.nu2 && s.nu2 >= 1.0);
        let mut f = 0.0;
        assert_eq!(dmcvqkd_holevo_f(1.5, 1.25, 0.5, &mut f), DmcvqkdStatus::Ok);
        assert_eq!(f, dmcvqkd::holevo_f(1.5, 1.25, 0.5).unwrap());
        let (mut g, mut b) = (0.0, 0.0);
        assert_eq!(dmcvqkd_capacities(1.0, &mut g, &mut b), DmcvqkdStatus::Ok);
        assert!((g - 0.5).abs() < 1e-12 && b < g);
        assert_eq!(dmcvqkd_capacities(-1.0, &mut g, &mut b), DmcvqkdStatus::Domain);
    }
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dmcvqkd.h")).unwrap();
    for sym in [
        "dmcvqkd_config_from_json",
        "dmcvqkd_keyrate",
        "dmcvqkd_last_error_message",
        "typedef struct DmcvqkdConfig DmcvqkdConfig",
        "DMCVQKD_STATUS_NULL_POINTER",
    ] {
        assert!(h.contains(sym), "{sym}");
    }
}
