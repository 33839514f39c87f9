use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hetspd_ffi::*;

fn generate(n: usize, b: usize, seed: u64) -> *mut HetspdMatrix {
    let mut m = ptr::null_mut();
    let s = unsafe { hetspd_matrix_generate(n, b, seed, ptr::null(), &mut m) };
    assert_eq!(s, HetspdStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = hetspd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn rhs(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect()
}

#[test]
fn cg_and_cholesky_agree() {
    let a = generate(100, 16, 3);
    let mut cfg = hetspd_config_default();
    cfg.eps = 1e-12;
    cfg.fraction = 0.6;
    let r = rhs(100);
    let mut x_cg = vec![0.0; 100];
    let mut x_ch = vec![0.0; 100];
    let mut st = HetspdStats::default();
    unsafe {
        assert_eq!(hetspd_solve_cg(a, &cfg, r.as_ptr(), 100, x_cg.as_mut_ptr(), &mut st), HetspdStatus::Ok);
        assert!(st.converged);
        assert_eq!(st.scalar_transfers, 2 * st.iterations);
        assert!(st.true_residual <= 2.0 * cfg.eps * st.r0_norm);
        assert_eq!(hetspd_solve_cholesky(a, &cfg, r.as_ptr(), 100, x_ch.as_mut_ptr(), &mut st), HetspdStatus::Ok);
        assert_eq!(st.iterations, 7);
        hetspd_matrix_free(a);
    }
    for (p, q) in x_cg.iter().zip(&x_ch) {
        assert!((p - q).abs() <= 1e-8 * (1.0 + q.abs()), "{p} vs {q}");
    }
}

#[test]
fn factor_reproduces_dense_input() {
    let n = 5;
    let mut dense = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            dense[p * n + q] = if p == q { 4.0 } else { 1.0 / (1 + p + q) as f64 };
        }
    }
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(hetspd_matrix_from_dense(n, 2, dense.as_ptr(), &mut a), HetspdStatus::Ok);
        let mut cfg = hetspd_config_default();
        cfg.block_size = 3;
        let mut l = ptr::null_mut();
        let mut st = HetspdStats::default();
        assert_eq!(hetspd_factorize(a, &cfg, &mut l, &mut st), HetspdStatus::Ok);
        assert_eq!(hetspd_matrix_block_size(l), 3);
        let get = |p, q| {
            let mut v = f64::NAN;
            assert_eq!(hetspd_matrix_element(l, p, q, &mut v), HetspdStatus::Ok);
            v
        };
        for p in 0..n {
            for q in 0..=p {
                let s: f64 = (0..=q).map(|k| get(p, k) * get(q, k)).sum();
                assert!((s - dense[p * n + q]).abs() < 1e-13, "({p},{q})");
            }
        }
        hetspd_matrix_free(l);
        hetspd_matrix_free(a);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let a = generate(8, 4, 1);
    let cfg = hetspd_config_default();
    let r = rhs(8);
    let mut x = vec![0.0; 8];
    unsafe {
        assert_eq!(hetspd_solve_cg(a, &cfg, r.as_ptr(), 7, x.as_mut_ptr(), ptr::null_mut()), HetspdStatus::DimensionError);
        assert!(last_error().contains("length 7"));
        let mut bad = cfg;
        bad.fraction = 2.0;
        assert_eq!(hetspd_solve_cg(a, &bad, r.as_ptr(), 8, x.as_mut_ptr(), ptr::null_mut()), HetspdStatus::ConfigError);
        let mut capped = cfg;
        capped.max_iters = 1;
        capped.eps = 1e-14;
        let mut st = HetspdStats::default();
        assert_eq!(hetspd_solve_cg(a, &capped, r.as_ptr(), 8, x.as_mut_ptr(), &mut st), HetspdStatus::NotConverged);
        assert_eq!(st.iterations, 1);
        assert!(!st.converged);
        assert_eq!(hetspd_solve_cg(ptr::null(), &cfg, r.as_ptr(), 8, x.as_mut_ptr(), ptr::null_mut()), HetspdStatus::NullPointer);
        let mut v = 0.0;
        assert_eq!(hetspd_matrix_element(a, 8, 0, &mut v), HetspdStatus::OutOfRange);
        assert_eq!(hetspd_matrix_size(ptr::null()), 0);
        hetspd_matrix_free(ptr::null_mut());
        hetspd_matrix_free(a);

        let indefinite = [1.0, 2.0, 2.0, 1.0];
        let mut m = ptr::null_mut();
        assert_eq!(hetspd_matrix_from_dense(2, 2, indefinite.as_ptr(), &mut m), HetspdStatus::Ok);
        let mut x2 = [0.0; 2];
        assert_eq!(hetspd_solve_cholesky(m, &cfg, [1.0, 1.0].as_ptr(), 2, x2.as_mut_ptr(), ptr::null_mut()), HetspdStatus::NotSpd);
        hetspd_matrix_free(m);
    }
}

#[test]
fn file_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bspd");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let a = generate(30, 8, 9);
    unsafe {
        assert_eq!(hetspd_matrix_save(a, cpath.as_ptr()), HetspdStatus::Ok);
        let mut b = ptr::null_mut();
        assert_eq!(hetspd_matrix_load(cpath.as_ptr(), &mut b), HetspdStatus::Ok);
        for p in 0..30 {
            for q in 0..=p {
                let (mut u, mut v) = (0.0, 0.0);
                hetspd_matrix_element(a, p, q, &mut u);
                hetspd_matrix_element(b, p, q, &mut v);
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
        hetspd_matrix_free(b);
        hetspd_matrix_free(a);

        let bytes = std::fs::read(&path).unwrap();
        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        std::fs::write(&path, &corrupt).unwrap();
        assert_eq!(hetspd_matrix_load(cpath.as_ptr(), &mut b), HetspdStatus::BadMagic);
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert_eq!(hetspd_matrix_load(cpath.as_ptr(), &mut b), HetspdStatus::TruncatedFile);
        let missing = CString::new(dir.path().join("none").to_str().unwrap()).unwrap();
        assert_eq!(hetspd_matrix_load(missing.as_ptr(), &mut b), HetspdStatus::IoError);
    }
}

#[test]
fn status_names_are_stable() {
    let name = |s| unsafe { CStr::from_ptr(hetspd_status_name(s)) }.to_str().unwrap();
    assert_eq!(name(HetspdStatus::Ok), "ok");
    assert_eq!(name(HetspdStatus::BadMagic), "bad_magic");
    assert_eq!(name(HetspdStatus::NotConverged), "not_converged");
}

fn target_dir() -> PathBuf {
    // Test binaries live in <target>/<profile>/deps.
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libhetspd_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let out = Command::new(&exe).arg(dir.path().join("m.bspd")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
