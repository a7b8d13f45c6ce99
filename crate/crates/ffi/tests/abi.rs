use std::ffi::{CStr, CString};
use std::ptr;

use shockselect::{shock, PotentialModel};
use shockselect_ffi::*;

fn last_error() -> String {
    let p = ss_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cubic(a: f64, b: f64, delta: f64) -> *mut SsModel {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { ss_model_new_cubic(a, b, delta, &mut m) },
        SsStatus::Ok
    );
    assert!(!m.is_null());
    m
}

#[test]
fn shocks_match_the_library() {
    let m = cubic(0.2, 0.4, 0.5);
    let lib = PotentialModel::cubic(0.2, 0.4, 0.5).unwrap();
    let mut s = SsShock::default();
    unsafe {
        assert_eq!(ss_shock(m, SsRule::EqualArea as i32, &mut s), SsStatus::Ok);
        let ea = shock::equal_area_shock(&lib).unwrap();
        assert_eq!(
            (s.u_left, s.u_right, s.phi_s),
            (ea.u_left, ea.u_right, ea.phi_s)
        );
        assert_eq!(
            ss_shock(m, SsRule::ContinuousDiffusivity as i32, &mut s),
            SsStatus::Ok
        );
        let cd = shock::continuous_diffusivity_shock(&lib).unwrap();
        assert_eq!((s.u_left, s.u_right), (cd.u_left, cd.u_right));

        let (mut alpha, mut beta) = (0.0, 0.0);
        assert_eq!(ss_model_zeros(m, &mut alpha, &mut beta), SsStatus::Ok);
        assert!((alpha - 0.2).abs() < 1e-12 && beta > alpha);
        let mut d = f64::NAN;
        assert_eq!(ss_model_diffusivity(m, 0.3, &mut d), SsStatus::Ok);
        assert!((d - (0.3 - 0.2) * (0.3 - 0.4 - 0.5 * 0.09)).abs() < 1e-15);
        assert_eq!(ss_model_potential(m, 1.5, &mut d), SsStatus::Model);
        assert!(last_error().contains("outside"));
        ss_model_free(m);
    }
}

#[test]
fn weight_and_speed() {
    let m = cubic(0.2, 0.4, 0.5);
    unsafe {
        let (mut a, mut r) = (0.0, 1.0);
        let st = ss_solve_weight(
            m,
            SsRule::ContinuousDiffusivity as i32,
            SsWeightFamily::Exponential as i32,
            &mut a,
            &mut r,
        );
        assert_eq!(st, SsStatus::Ok);
        assert!((a.abs() - 3.0757).abs() < 1e-3 && r.abs() < 1e-10);
        let st = ss_solve_weight(
            m,
            SsRule::ContinuousDiffusivity as i32,
            SsWeightFamily::Quadratic as i32,
            &mut a,
            ptr::null_mut(),
        );
        assert_eq!(st, SsStatus::Ok);
        assert!((a - 10.6453).abs() < 1e-3);

        let mut s = SsShock::default();
        assert_eq!(
            ss_shock_for_weight(m, SsWeightFamily::Quadratic as i32, a, &mut s),
            SsStatus::Ok
        );
        let mut cd = SsShock::default();
        ss_shock(m, SsRule::ContinuousDiffusivity as i32, &mut cd);
        assert!((s.u_left - cd.u_left).abs() < 1e-6);

        let mut c = 0.0;
        assert_eq!(
            ss_wave_speed(m, SsRule::ContinuousDiffusivity as i32, 0.5, &mut c),
            SsStatus::Ok
        );
        assert!((c - 0.0232).abs() < 5e-4);
        ss_model_free(m);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(ss_model_new_cubic(0.2, 0.4, 5.0, &mut m), SsStatus::Model);
        assert!(m.is_null());
        assert!(last_error().contains("inadmissible"));
        assert_eq!(
            ss_model_new_cubic(0.2, 0.4, 0.5, ptr::null_mut()),
            SsStatus::NullPointer
        );

        let m = cubic(0.2, 0.4, 0.5);
        let mut s = SsShock::default();
        assert_eq!(ss_shock(m, 42, &mut s), SsStatus::Usage);
        assert_eq!(ss_shock(ptr::null(), 0, &mut s), SsStatus::NullPointer);
        assert_eq!(ss_shock(m, 0, ptr::null_mut()), SsStatus::NullPointer);
        let mut a = 0.0;
        assert_eq!(
            ss_solve_weight(m, SsRule::LowerKnee as i32, 0, &mut a, ptr::null_mut()),
            SsStatus::Model
        );
        assert_eq!(
            ss_solve_weight(m, 1, 7, &mut a, ptr::null_mut()),
            SsStatus::Usage
        );
        // success clears the message
        assert_eq!(ss_shock(m, 0, &mut s), SsStatus::Ok);
        assert!(ss_last_error_message().is_null());
        ss_model_free(m);
        ss_model_free(ptr::null_mut());
    }
}

#[test]
fn polynomial_model_and_simulation() {
    let coeffs = [0.08, -0.6, 1.0];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            ss_model_new_polynomial(coeffs.as_ptr(), coeffs.len(), &mut m),
            SsStatus::Ok
        );
        let cfg = CString::new(
            r#"{"dx": 0.05, "t_end": 2.0, "epsilon": 0.05, "snapshot_times": [0.0, 1.0, 2.0]}"#,
        )
        .unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(ss_simulate(m, 0.5, cfg.as_ptr(), &mut out), SsStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        ss_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["steps"].as_u64().unwrap() > 0);
        assert!(v["final_shock"]["x_s"].is_number());

        let bad = CString::new(r#"{"dx": -1}"#).unwrap();
        assert_eq!(ss_simulate(m, 0.5, bad.as_ptr(), &mut out), SsStatus::Usage);
        let junk = CString::new("not json").unwrap();
        assert_eq!(
            ss_simulate(m, 0.5, junk.as_ptr(), &mut out),
            SsStatus::Usage
        );
        ss_model_free(m);
    }
    let v = unsafe { CStr::from_ptr(ss_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
