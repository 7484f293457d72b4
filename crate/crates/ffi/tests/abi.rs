use std::ffi::CStr;
use std::ptr;

use bernconv_ffi::*;

fn last_error() -> String {
    let p = bc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn table(lambda: f64, depth: u32) -> *mut BcTable {
    let mut t = ptr::null_mut();
    let s = unsafe { bc_table_build(lambda, depth, bc_default_eta(depth), &mut t) };
    assert_eq!(s, BcStatus::Ok);
    assert!(!t.is_null());
    t
}

#[test]
fn counts_match_library() {
    let t = table(0.7, 12);
    let reference = bernconv::HalfSumTable::build(bernconv::Lambda::new(0.7).unwrap(), 12, bernconv::digits::default_eta(12)).unwrap();
    for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
        let mut c = 0;
        assert_eq!(unsafe { bc_table_count_le(t, x, &mut c) }, BcStatus::Ok);
        assert_eq!(c, reference.count_le(x));
        let (mut lo, mut hi) = (0, 0);
        assert_eq!(unsafe { bc_cdf_bounds(t, x, &mut lo, &mut hi) }, BcStatus::Ok);
        assert!(lo <= hi && hi <= 1 << 12);
    }
    unsafe { bc_table_free(t) };
}

#[test]
fn parameter_errors_carry_messages() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { bc_table_build(0.7, 13, 0.0, &mut t) }, BcStatus::InvalidParameter);
    assert!(t.is_null());
    assert!(last_error().contains("depth"));
    assert_eq!(unsafe { bc_table_build(1.5, 12, 0.0, &mut t) }, BcStatus::InvalidParameter);
    assert_eq!(unsafe { bc_table_build(0.7, 12, 0.0, ptr::null_mut()) }, BcStatus::NullPointer);
    assert!(last_error().contains("out"));
}

#[test]
fn envelope_round_trip() {
    let t = table(std::f64::consts::FRAC_1_SQRT_2, 24);
    let mut env = ptr::null_mut();
    assert_eq!(unsafe { bc_envelope_build(t, 0.0, 8, 1.0 / f64::from(1 << 20), &mut env) }, BcStatus::Ok);
    let (mut lo, mut hi) = (0.0, 0.0);
    for i in 0..=8 {
        assert_eq!(unsafe { bc_envelope_bracket(env, i, &mut lo, &mut hi) }, BcStatus::Ok);
        let exact = bernconv::exact::exact_phi_sqrt2(f64::from(i) / 8.0);
        assert!(lo <= exact + 1e-12 && exact <= hi + 1e-12, "i = {i}");
    }
    assert_eq!(unsafe { bc_envelope_bracket(env, 9, &mut lo, &mut hi) }, BcStatus::InvalidParameter);
    let mut cert = std::mem::MaybeUninit::<BcCertificate>::uninit();
    assert_eq!(unsafe { bc_envelope_certify(env, cert.as_mut_ptr()) }, BcStatus::Ok);
    let cert = unsafe { cert.assume_init() };
    assert_eq!(cert.grid, 8);
    assert_eq!(cert.scale, 0.125);
    unsafe {
        bc_envelope_free(env);
        bc_table_free(t);
    }
}

#[test]
fn point_and_interval_checks() {
    let mut c = std::mem::MaybeUninit::<BcCertificate>::uninit();
    assert_eq!(unsafe { bc_check_point(0.6180339887498949, 32, 50, c.as_mut_ptr()) }, BcStatus::Ok);
    let c = unsafe { c.assume_init() };
    assert_eq!(c.verdict, BcVerdict::Refuted);
    assert!(c.has_witness && c.min_margin < 0.0);

    let mut c = std::mem::MaybeUninit::<BcCertificate>::uninit();
    assert_eq!(unsafe { bc_check_interval(0.3, 0.01, 20, 8, c.as_mut_ptr()) }, BcStatus::InvalidParameter);
}

#[test]
fn presets_and_density() {
    let mut l = 0.0;
    assert_eq!(unsafe { bc_preset_lambda(BcPreset::Sqrt2, &mut l) }, BcStatus::Ok);
    assert_eq!(l, std::f64::consts::FRAC_1_SQRT_2);
    assert_eq!(unsafe { bc_preset_lambda(BcPreset::Golden, &mut l) }, BcStatus::Ok);
    assert!((l - 0.618033988749895).abs() < 1e-15);
    assert_eq!(bc_minimal_n(0.8), 4);
    assert_eq!(bc_minimal_n(2.0), 0);

    let mut r = std::mem::MaybeUninit::<BcRychlik>::uninit();
    assert_eq!(unsafe { bc_rychlik_bounds(0.8, 2, 0.1, r.as_mut_ptr()) }, BcStatus::InvalidParameter);
    assert!(last_error().contains("minimal admissible n is 4"));
    assert_eq!(unsafe { bc_sup_density_sqrt2(0, r.as_mut_ptr()) }, BcStatus::Ok);
    let r = unsafe { r.assume_init() };
    assert_eq!(r.n, 3);
    assert!(r.sup_bound.is_finite());
    assert!(r.sup_bound >= 1.0 + std::f64::consts::FRAC_1_SQRT_2);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bernconv.h")).unwrap();
    for name in [
        "bc_last_error",
        "bc_default_eta",
        "bc_preset_lambda",
        "bc_table_build",
        "bc_table_free",
        "bc_table_count_le",
        "bc_cdf_bounds",
        "bc_envelope_build",
        "bc_envelope_free",
        "bc_envelope_bracket",
        "bc_envelope_certify",
        "bc_check_point",
        "bc_check_interval",
        "bc_minimal_n",
        "bc_rychlik_bounds",
        "bc_sup_density",
        "bc_sup_density_sqrt2",
        "typedef struct BcTable BcTable;",
        "BC_STATUS_NULL_POINTER = 6",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
