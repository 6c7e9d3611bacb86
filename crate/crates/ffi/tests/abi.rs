use std::ffi::{CStr, CString};
use std::ptr;

use pathsig_ffi::*;

fn square() -> *mut PsPath {
    let times = [0.0, 1.0, 2.0, 3.0, 4.0];
    let values = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ps_path_new(times.as_ptr(), values.as_ptr(), 5, 2, &mut p) }, PsStatus::Ok);
    p
}

fn last_error() -> String {
    let m = ps_last_error_message();
    assert!(!m.is_null());
    unsafe { CStr::from_ptr(m) }.to_string_lossy().into_owned()
}

#[test]
fn signature_round_trip() {
    let p = square();
    unsafe {
        assert_eq!((ps_path_len(p), ps_path_channels(p)), (5, 2));
        let mut t = ptr::null_mut();
        assert_eq!(ps_signature(p, 3, &mut t), PsStatus::Ok);
        assert_eq!((ps_tensor_level(t), ps_tensor_alphabet_size(t)), (3, 2));

        let mut c = f64::NAN;
        assert_eq!(ps_tensor_coeff(t, ptr::null(), 0, &mut c), PsStatus::Ok);
        assert_eq!(c, 1.0);
        let w = [1usize, 2];
        // closed unit square: S^{1,2} = 1, S^{2,1} = -1
        assert_eq!(ps_tensor_coeff(t, w.as_ptr(), 2, &mut c), PsStatus::Ok);
        assert!((c - 1.0).abs() < 1e-15);
        let bad = [3usize];
        assert_eq!(ps_tensor_coeff(t, bad.as_ptr(), 1, &mut c), PsStatus::InvalidArgument);

        let mut needed = 0;
        assert_eq!(ps_tensor_grade(t, 2, ptr::null_mut(), 0, &mut needed), PsStatus::BufferTooSmall);
        assert_eq!(needed, 4);
        let mut g = [0.0; 4];
        assert_eq!(ps_tensor_grade(t, 2, g.as_mut_ptr(), 4, &mut needed), PsStatus::Ok);
        assert!((g[1] - 1.0).abs() < 1e-15 && (g[2] + 1.0).abs() < 1e-15);

        let mut s = ptr::null_mut();
        assert_eq!(ps_tensor_to_json(t, &mut s), PsStatus::Ok);
        let json = CStr::from_ptr(s).to_str().unwrap().to_owned();
        ps_string_free(s);
        let back: pathsig::TruncatedTensor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.level(), 3);

        let mut l = ptr::null_mut();
        assert_eq!(ps_log_signature(p, 2, &mut l), PsStatus::Ok);
        assert_eq!(ps_tensor_coeff(l, w.as_ptr(), 2, &mut c), PsStatus::Ok);
        assert!((c - 1.0).abs() < 1e-15);
        ps_tensor_free(l);
        ps_tensor_free(t);
        ps_path_free(p);
    }
}

#[test]
fn areas() {
    let p = square();
    unsafe {
        let mut a = 0.0;
        assert_eq!(ps_signed_area(p, 0, 1, &mut a), PsStatus::Ok);
        assert!((a - 1.0).abs() < 1e-15);
        assert_eq!(ps_signed_area(p, 0, 5, &mut a), PsStatus::InvalidArgument);
        let mut m = [0.0; 4];
        let mut needed = 0;
        assert_eq!(ps_lead_matrix(p, m.as_mut_ptr(), 4, &mut needed), PsStatus::Ok);
        assert_eq!(m, [0.0, a, -a, 0.0]);
        ps_path_free(p);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        let t = [0.0, 0.0];
        let v = [1.0, 2.0];
        assert_eq!(ps_path_new(t.as_ptr(), v.as_ptr(), 2, 1, &mut p), PsStatus::InvalidPath);
        assert!(p.is_null());
        assert!(last_error().contains("increasing"), "{}", last_error());
        assert_eq!(ps_path_new(ptr::null(), v.as_ptr(), 2, 1, &mut p), PsStatus::NullPointer);
        let mut tensor = ptr::null_mut();
        assert_eq!(ps_signature(ptr::null(), 2, &mut tensor), PsStatus::NullPointer);
        assert_eq!(ps_path_len(ptr::null()), 0);
        ps_path_free(ptr::null_mut());
        ps_tensor_free(ptr::null_mut());
        ps_string_free(ptr::null_mut());
    }
}

#[test]
fn csv_input() {
    let text = CString::new("t,a,b\n0,0,0\n1,1,2\n").unwrap();
    let bad = CString::new("t,a\n0,x\n").unwrap();
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ps_path_from_csv(text.as_ptr(), &mut p), PsStatus::Ok);
        assert_eq!(ps_path_channels(p), 2);
        ps_path_free(p);
        assert_eq!(ps_path_from_csv(bad.as_ptr(), &mut p), PsStatus::Parse);
        assert!(last_error().contains("row 1"));
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(ps_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
