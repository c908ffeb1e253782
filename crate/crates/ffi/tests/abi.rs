use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ratio_bandits_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { rb_last_error(buf.as_mut_ptr() as *mut _, buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

#[test]
fn scoring_wrappers() {
    let mu = [0.2, 0.5, 0.4];
    let rad = [0.5, 0.1, 0.3];
    let (mut arm, mut alpha) = (0usize, 0.0);
    unsafe {
        assert_eq!(rb_select_arm(0.6, mu.as_ptr(), rad.as_ptr(), 3, &mut arm), RbStatus::Ok);
        assert_eq!(rb_dynamic_alpha(0.6, mu.as_ptr(), rad.as_ptr(), 3, &mut alpha), RbStatus::Ok);
        assert_eq!(rb_select_arm(0.6, ptr::null(), rad.as_ptr(), 3, &mut arm), RbStatus::NullPointer);
        assert!(last_error().contains("mu_hat"));
        assert_eq!(rb_select_arm(0.6, mu.as_ptr(), rad.as_ptr(), 0, &mut arm), RbStatus::InvalidArgument);
    }
    assert_eq!(arm, 2);
    assert!((alpha - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn linear_handle_round_trip() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(rb_linear_new(2, 1.0, 1.0, 1.0, 100.0, &mut h), RbStatus::Ok);
        assert_eq!(rb_linear_update(h, [1.0, 0.0].as_ptr(), 2, 1.0), RbStatus::Ok);
        let actions = [1.0, 0.0, 0.0, 1.0];
        let (mut mu, mut rad) = ([0.0; 2], [0.0; 2]);
        assert_eq!(rb_linear_bounds(h, actions.as_ptr(), 2, 2, mu.as_mut_ptr(), rad.as_mut_ptr()), RbStatus::Ok);
        assert!((mu[0] - 0.5).abs() < 1e-12 && mu[1] == 0.0);
        assert!(rad[0] < rad[1]);
        let mut arm = 9;
        assert_eq!(rb_linear_select(h, 10.0, actions.as_ptr(), 2, 2, &mut arm), RbStatus::Ok);
        assert_eq!(arm, 1);
        rb_linear_free(h);
        assert_eq!(rb_linear_update(ptr::null_mut(), [1.0].as_ptr(), 1, 0.0), RbStatus::NullPointer);
        assert_eq!(rb_linear_new(2, 0.5, 1.0, 1.0, 100.0, &mut h), RbStatus::InvalidArgument);
    }
}

#[test]
fn karm_and_nig_handles() {
    let mut k = ptr::null_mut();
    let mut arm = 0;
    unsafe {
        assert_eq!(rb_karm_new(2, 100, &mut k), RbStatus::Ok);
        assert_eq!(rb_karm_select(k, 0.5, &mut arm), RbStatus::Precondition);
        assert_eq!(rb_karm_update(k, 0, 1.0), RbStatus::Ok);
        assert_eq!(rb_karm_update(k, 1, 0.25), RbStatus::Ok);
        assert_eq!(rb_karm_update(k, 1, 2.0), RbStatus::InvalidArgument);
        assert_eq!(rb_karm_select(k, 0.9, &mut arm), RbStatus::Ok);
        assert_eq!(arm, 0);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(rb_karm_beta(k, 1, &mut a, &mut b), RbStatus::Ok);
        assert_eq!((a, b), (1.25, 1.75));
        let (mut mu, mut rad) = ([0.0; 2], [0.0; 2]);
        assert_eq!(rb_karm_bounds(k, 2, mu.as_mut_ptr(), rad.as_mut_ptr()), RbStatus::Ok);
        assert_eq!(mu, [1.0, 0.25]);
        assert!((rad[0] - (3.0 * 100f64.ln()).sqrt()).abs() < 1e-12);
        rb_karm_free(k);

        let mut n = ptr::null_mut();
        assert_eq!(rb_nig_new_default(2, &mut n), RbStatus::Ok);
        assert_eq!(rb_nig_update(n, [1.0, 0.0].as_ptr(), [1.0].as_ptr(), 1), RbStatus::Ok);
        let (mut mean, mut shape, mut scale) = ([0.0; 2], 0.0, 0.0);
        assert_eq!(rb_nig_state(n, mean.as_mut_ptr(), 2, &mut shape, &mut scale), RbStatus::Ok);
        assert!((mean[0] - 0.2).abs() < 1e-12 && mean[1] == 0.0);
        assert_eq!(shape, 6.5);
        assert!((scale - 6.4).abs() < 1e-12);
        assert_eq!(rb_nig_state(n, mean.as_mut_ptr(), 3, &mut shape, &mut scale), RbStatus::InvalidArgument);
        rb_nig_free(n);
    }
}

#[test]
fn ids_and_simulation() {
    let (mut first, mut second, mut q, mut ratio) = (0, 0, 0.0, 0.0);
    let mut regret = 0.0;
    unsafe {
        let st = rb_ids_distribution(
            [1.0, 0.2].as_ptr(),
            [1.0, 0.01].as_ptr(),
            2,
            &mut first,
            &mut second,
            &mut q,
            &mut ratio,
        );
        assert_eq!(st, RbStatus::Ok);
        assert_eq!(
            rb_run_one(RbEnvKind::LinearContextual as u32, 3, 4, 1.0, 100, RbPolicyKind::Tsucb as u32, 5, 1, 0, &mut regret),
            RbStatus::Ok
        );
        assert!(regret > 0.0);
        let mut again = 0.0;
        rb_run_one(RbEnvKind::LinearContextual as u32, 3, 4, 1.0, 100, RbPolicyKind::Tsucb as u32, 5, 1, 0, &mut again);
        assert_eq!(regret, again);
        assert_eq!(rb_run_one(7, 3, 4, 1.0, 100, 0, 1, 1, 0, &mut regret), RbStatus::InvalidArgument);
        assert_eq!(rb_run_one(0, 0, 1, 0.0, 100, 0, 1, 1, 0, &mut regret), RbStatus::Config);
    }
    let p = |a: usize| if a == first { q } else { 0.0 } + if a == second { 1.0 - q } else { 0.0 };
    assert!(p(0) > 0.2 && p(0) < 0.25);
    assert!((ratio - 0.6203).abs() < 5e-4);
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libratio_bandits_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_is_current_and_compiles() {
    let header = std::fs::read_to_string(crate_dir().join("include/ratio_bandits.h")).unwrap();
    for name in ["rb_select_arm", "rb_linear_new", "rb_karm_select", "rb_nig_update", "rb_ids_distribution", "rb_run_one", "RB_STATUS_PRECONDITION", "RB_POLICY_KIND_IDS"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(crate_dir().join("include/ratio_bandits.h"))
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn c_program_links_against_static_library() {
    let Some(lib) = static_lib() else {
        panic!("static library not found next to the test binary");
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let c = crate_dir();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-O1"])
        .arg("-I")
        .arg(c.join("include"))
        .arg(c.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
