use std::ffi::CStr;
use std::ptr;

use deadbeat_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        deadbeat_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn rotation(theta: f64) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    [c, s, -s, c]
}

fn system(a: &[f64], b: &[f64], n: usize, m: usize) -> *mut DeadbeatSystem {
    let mut sys = ptr::null_mut();
    let status = unsafe {
        deadbeat_system_new(
            a.as_ptr(),
            b.as_ptr(),
            n,
            m,
            DeadbeatForm::Factored,
            &mut sys,
        )
    };
    assert_eq!(status, DeadbeatStatus::Ok, "{}", last_error());
    sys
}

#[test]
fn rotation_gain_and_check() {
    let theta = std::f64::consts::FRAC_PI_3;
    let sys = system(&rotation(theta), &[1.0, 0.0], 2, 1);
    unsafe {
        assert_eq!(deadbeat_system_state_dim(sys), 2);
        assert_eq!(deadbeat_system_input_dim(sys), 1);

        let mut report = std::mem::zeroed::<DeadbeatReport>();
        assert_eq!(
            deadbeat_check(sys, ptr::null(), &mut report),
            DeadbeatStatus::Ok
        );
        assert!(report.pbh_pass && report.geometric_pass && !report.has_failing_eigenvalue);
        assert_eq!(report.horizon, 2);

        let (mut k2, mut k, mut resid) = ([0.0; 2], [0.0; 2], -1.0);
        let status = deadbeat_gain(
            sys,
            false,
            ptr::null(),
            k2.as_mut_ptr(),
            k.as_mut_ptr(),
            2,
            &mut resid,
        );
        assert_eq!(status, DeadbeatStatus::Ok);
        assert!((k2[0] - 1.0).abs() < 1e-10);
        assert!((k2[1] + theta.cos() / theta.sin()).abs() < 1e-10);
        assert!((0.0..1e-12).contains(&resid));
        deadbeat_system_free(sys);
    }
}

#[test]
fn error_statuses_and_messages() {
    unsafe {
        let diag = system(&[2.0, 0.0, 0.0, 3.0], &[1.0, 0.0], 2, 1);
        let mut report = std::mem::zeroed::<DeadbeatReport>();
        assert_eq!(
            deadbeat_check(diag, ptr::null(), &mut report),
            DeadbeatStatus::Ok
        );
        assert!(!report.pbh_pass && report.has_failing_eigenvalue);
        assert_eq!((report.failing_re, report.failing_im), (3.0, 0.0));
        assert_eq!(report.horizon, 0);

        let mut k2 = [0.0; 2];
        let status = deadbeat_gain(
            diag,
            true,
            ptr::null(),
            k2.as_mut_ptr(),
            ptr::null_mut(),
            2,
            ptr::null_mut(),
        );
        assert_eq!(status, DeadbeatStatus::Uncontrollable);
        assert!(last_error().contains("not controllable"));

        let mut tracker = ptr::null_mut();
        assert_eq!(
            deadbeat_tracker_new(diag, ptr::null(), &mut tracker),
            DeadbeatStatus::NotControllable
        );
        assert!(tracker.is_null());
        deadbeat_system_free(diag);

        let singular = system(&[0.0, 1.0, 0.0, 0.0], &[0.0, 1.0], 2, 1);
        let status = deadbeat_gain(
            singular,
            false,
            ptr::null(),
            k2.as_mut_ptr(),
            ptr::null_mut(),
            2,
            ptr::null_mut(),
        );
        assert_eq!(status, DeadbeatStatus::SingularA);
        let status = deadbeat_gain(
            singular,
            true,
            ptr::null(),
            k2.as_mut_ptr(),
            ptr::null_mut(),
            2,
            ptr::null_mut(),
        );
        assert_eq!(status, DeadbeatStatus::Ok);
        assert!(last_error().is_empty());
        let status = deadbeat_gain(
            singular,
            true,
            ptr::null(),
            k2.as_mut_ptr(),
            ptr::null_mut(),
            3,
            ptr::null_mut(),
        );
        assert_eq!(status, DeadbeatStatus::InvalidInput);
        deadbeat_system_free(singular);

        let mut sys = ptr::null_mut();
        let status = deadbeat_system_new(
            ptr::null(),
            ptr::null(),
            2,
            1,
            DeadbeatForm::Factored,
            &mut sys,
        );
        assert_eq!(status, DeadbeatStatus::NullPointer);
        assert!(sys.is_null());
        let nan = [f64::NAN, 0.0, 0.0, 1.0];
        let status = deadbeat_system_new(
            nan.as_ptr(),
            [1.0, 0.0].as_ptr(),
            2,
            1,
            DeadbeatForm::Factored,
            &mut sys,
        );
        assert_eq!(status, DeadbeatStatus::InvalidInput);

        let bad_tol = DeadbeatTolerance {
            rank_rel: 5.0,
            residual_rel: 1e-8,
        };
        let rot = system(&rotation(1.0), &[1.0, 0.0], 2, 1);
        assert_eq!(
            deadbeat_check(rot, &bad_tol, &mut report),
            DeadbeatStatus::InvalidInput
        );
        assert_eq!(
            deadbeat_check(ptr::null(), ptr::null(), &mut report),
            DeadbeatStatus::NullPointer
        );
        deadbeat_system_free(rot);

        // Freeing null is a no-op.
        deadbeat_system_free(ptr::null_mut());
        deadbeat_tracker_free(ptr::null_mut());
    }
}

#[test]
fn message_is_truncated_and_terminated() {
    unsafe {
        let mut report = std::mem::zeroed::<DeadbeatReport>();
        deadbeat_check(ptr::null(), ptr::null(), &mut report);
        let full = deadbeat_last_error_message(ptr::null_mut(), 0);
        assert!(full > 4);
        let mut buf = [1 as std::ffi::c_char; 4];
        assert_eq!(deadbeat_last_error_message(buf.as_mut_ptr(), 4), full);
        assert_eq!(buf[3], 0);
    }
}

#[test]
fn tracker_reaches_reference() {
    let sys = system(&rotation(std::f64::consts::FRAC_PI_2), &[1.0, 0.0], 2, 1);
    unsafe {
        let mut tracker = ptr::null_mut();
        assert_eq!(
            deadbeat_tracker_new(sys, ptr::null(), &mut tracker),
            DeadbeatStatus::Ok
        );
        assert_eq!(deadbeat_tracker_horizon(tracker), 2);
        let mut next = [0.0; 2];
        let status = deadbeat_tracker_step(
            tracker,
            [1.0, 1.0].as_ptr(),
            [3.0, 5.0].as_ptr(),
            2,
            next.as_mut_ptr(),
        );
        assert_eq!(status, DeadbeatStatus::Ok);
        assert!((next[0] - 1.0).abs() < 1e-12 && (next[1] + 3.0).abs() < 1e-12);
        let status = deadbeat_tracker_step(
            tracker,
            [1.0].as_ptr(),
            [3.0].as_ptr(),
            1,
            next.as_mut_ptr(),
        );
        assert_eq!(status, DeadbeatStatus::InvalidInput);
        deadbeat_tracker_free(tracker);
        deadbeat_system_free(sys);
    }
}

#[test]
fn demo_entry_points() {
    unsafe {
        let mut out = [0.0; 3];
        let status = deadbeat_demo_step(
            DeadbeatDemo::Homogeneous,
            [0.0; 3].as_ptr(),
            [1.0; 3].as_ptr(),
            out.as_mut_ptr(),
        );
        assert_eq!(status, DeadbeatStatus::Ok);
        assert_eq!(out, [0.0, 2.0, 8.0]);

        assert_eq!(
            deadbeat_demo_f(DeadbeatDemo::Positive, [1.0; 3].as_ptr(), out.as_mut_ptr()),
            DeadbeatStatus::Ok
        );
        assert_eq!(out, [1.0; 3]);

        let mut u = 0.0;
        let status = deadbeat_demo_kappa(
            DeadbeatDemo::Positive,
            [2.0, 1.0, 1.0].as_ptr(),
            [1.0; 3].as_ptr(),
            &mut u,
        );
        assert_eq!(status, DeadbeatStatus::Ok);
        assert!((u - 2f64.powf(-1.0 / 3.0)).abs() < 1e-15);

        let status = deadbeat_demo_step(
            DeadbeatDemo::Positive,
            [1.0, -1.0, 1.0].as_ptr(),
            [1.0; 3].as_ptr(),
            out.as_mut_ptr(),
        );
        assert_eq!(status, DeadbeatStatus::DomainViolation);
    }
}
