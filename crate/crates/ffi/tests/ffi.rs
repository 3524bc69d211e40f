use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cmap_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { cmap_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn name(s: CmapStatus) -> &'static str {
    unsafe { CStr::from_ptr(cmap_status_name(s)) }
        .to_str()
        .unwrap()
}

fn radial(r: f64, r0: f64) -> f64 {
    if r <= r0 {
        0.0
    } else {
        (r * r - r0 * r0) / 4.0 - r0 * r0 / 2.0 * (r / r0).ln()
    }
}

#[test]
fn grid_handle_round_trip() {
    let mut g = ptr::null_mut();
    assert_eq!(cmap_grid_new(2, -1.0, 1.0, 33, &mut g), CmapStatus::CMAP_OK);
    unsafe {
        assert_eq!(cmap_grid_len(g), 33 * 33);
        assert_eq!(cmap_grid_h(g), 1.0 / 16.0);
        cmap_grid_free(g);
        assert_eq!(cmap_grid_len(ptr::null()), 0);
        cmap_grid_free(ptr::null_mut());
    }
    let mut bad = ptr::null_mut();
    let s = cmap_grid_new(3, -1.0, 1.0, 33, &mut bad);
    assert_ne!(s, CmapStatus::CMAP_OK);
    assert!(bad.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn obstacle_solve_matches_radial_solution() {
    let n = 65;
    let r0 = 0.5;
    let mut g = ptr::null_mut();
    assert_eq!(cmap_grid_new(2, -1.0, 1.0, n, &mut g), CmapStatus::CMAP_OK);
    let h = unsafe { cmap_grid_h(g) };
    let pts: Vec<(f64, f64)> = (0..n * n)
        .map(|k| (-1.0 + (k % n) as f64 * h, -1.0 + (k / n) as f64 * h))
        .collect();
    let source = vec![1.0; n * n];
    let bc: Vec<f64> = pts.iter().map(|&(x, y)| radial(x.hypot(y), r0)).collect();
    let mut sol = ptr::null_mut();
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (n - 1) as f64).sin());
    let s = unsafe {
        cmap_solve_obstacle(
            g,
            source.as_ptr(),
            bc.as_ptr(),
            n * n,
            1e-10,
            100_000,
            omega,
            &mut sol,
        )
    };
    assert_eq!(s, CmapStatus::CMAP_OK, "{}", last_error());
    let mut w = vec![0.0; n * n];
    let (mut fb, mut it, mut res) = (0usize, 0usize, 0.0f64);
    unsafe {
        assert_eq!(
            cmap_obstacle_w(sol, w.as_mut_ptr(), w.len()),
            CmapStatus::CMAP_OK
        );
        assert_eq!(
            cmap_obstacle_stats(sol, &mut fb, &mut it, &mut res),
            CmapStatus::CMAP_OK
        );
        assert_eq!(
            cmap_obstacle_w(sol, w.as_mut_ptr(), 3),
            CmapStatus::CMAP_GRID_MISMATCH
        );
        cmap_obstacle_free(sol);
        cmap_grid_free(g);
    }
    let err = w
        .iter()
        .zip(&bc)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 10.0 * h * h, "{err:e}");
    assert!(fb > 0 && it > 0);
}

#[test]
fn negative_source_reports_its_code() {
    let mut g = ptr::null_mut();
    cmap_grid_new(2, 0.0, 1.0, 9, &mut g);
    let mut source = vec![1.0; 81];
    source[40] = -1.0;
    let bc = vec![0.0; 81];
    let mut sol = ptr::null_mut();
    let s = unsafe {
        cmap_solve_obstacle(
            g,
            source.as_ptr(),
            bc.as_ptr(),
            81,
            1e-8,
            1000,
            1.5,
            &mut sol,
        )
    };
    assert_eq!(s, CmapStatus::CMAP_NEGATIVE_SOURCE);
    assert_eq!(name(s), "NegativeSource");
    assert!(sol.is_null());
    let s =
        unsafe { cmap_solve_obstacle(g, ptr::null(), bc.as_ptr(), 81, 1e-8, 1000, 1.5, &mut sol) };
    assert_eq!(s, CmapStatus::CMAP_NULL_POINTER);
    unsafe { cmap_grid_free(g) };
}

#[test]
fn global_solution_handles() {
    let kind = CString::new("ellipse").unwrap();
    let mut gs = ptr::null_mut();
    let s = unsafe { cmap_global_new(kind.as_ptr(), 2.0, 1.0, 0.2, 0.0, 1.0, &mut gs) };
    assert_eq!(s, CmapStatus::CMAP_INVALID_CONIC);
    assert_eq!(name(s), "InvalidConic");
    assert!(last_error().contains("conic"));

    let s = unsafe { cmap_global_new(kind.as_ptr(), 0.5, 0.3, 0.2, 0.4, 1.0, &mut gs) };
    assert_eq!(s, CmapStatus::CMAP_OK);
    let (mut delta, mut mu, mut res, mut u) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            cmap_global_stats(gs, 100, &mut delta, &mut mu, &mut res),
            CmapStatus::CMAP_OK
        );
        assert_eq!(cmap_global_eval(gs, 3.0, 2.0, &mut u), CmapStatus::CMAP_OK);
        assert_eq!(
            cmap_global_eval(gs, 0.0, 0.0, ptr::null_mut()),
            CmapStatus::CMAP_NULL_POINTER
        );
        cmap_global_free(gs);
    }
    assert!(delta > 0.0 && mu > 0.0);
    assert!(res <= 1e-10, "{res:e}");
    assert!(u > 0.0);

    let line = CString::new("line").unwrap();
    unsafe {
        assert_eq!(
            cmap_global_new(line.as_ptr(), 0.0, 1.0, 0.0, 0.0, 1.0, &mut gs),
            CmapStatus::CMAP_OK
        );
        cmap_global_stats(gs, 10, &mut delta, &mut mu, &mut res);
        assert!(res.is_nan());
        cmap_global_eval(gs, 0.5, 0.3, &mut u);
        cmap_global_free(gs);
    }
    // the line member's contact set is the x-axis: U = y²/2.
    assert!((u - 0.045).abs() < 1e-12, "{u}");
}

#[test]
fn growth_exponent_of_half_plane_profile() {
    let n = 101;
    let mut g = ptr::null_mut();
    cmap_grid_new(2, -1.0, 1.0, n, &mut g);
    let h = 2.0 / (n - 1) as f64;
    let f: Vec<f64> = (0..n * n)
        .map(|k| {
            let x = -1.0 + (k % n) as f64 * h;
            x.max(0.0).powi(2) / 2.0
        })
        .collect();
    // homogeneous of degree 2, so every ball well above h gives slope 2.
    let scales = [0.8, 0.4, 0.2, 0.1];
    let mut e = 0.0;
    let s = unsafe {
        cmap_growth_exponent(
            g,
            f.as_ptr(),
            f.len(),
            0.0,
            0.0,
            1,
            scales.as_ptr(),
            scales.len(),
            &mut e,
        )
    };
    assert_eq!(s, CmapStatus::CMAP_OK, "{}", last_error());
    assert!((e - 2.0).abs() < 0.1, "{e}");
    unsafe { cmap_grid_free(g) };
}

#[test]
fn run_config_returns_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g.toml");
    std::fs::write(
        &cfg,
        "experiment = \"global2d\"\n[global2d]\nkind = \"parabola\"\n",
    )
    .unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cmap_run_config(path.as_ptr(), &mut out) },
        CmapStatus::CMAP_OK
    );
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { cmap_string_free(out) };
    assert!(text.contains("\"experiment\": \"global2d\""), "{text}");

    std::fs::write(&cfg, "colour = 1\n").unwrap();
    let s = unsafe { cmap_run_config(path.as_ptr(), &mut out) };
    assert_eq!(s, CmapStatus::CMAP_CONFIG_PARSE);
    assert!(last_error().contains("colour"));
}

#[test]
fn errors_are_per_thread() {
    let mut g = ptr::null_mut();
    cmap_grid_new(7, 0.0, 1.0, 3, &mut g);
    let here = last_error();
    let there = std::thread::spawn(last_error).join().unwrap();
    assert!(!here.is_empty());
    assert!(there.is_empty());
}

/// Compiles a small C program against the generated header and the static
/// library, then runs it.
#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libcmap_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "cmap.h"
int main(void) {
    CmapGlobal *gs = NULL;
    if (cmap_global_new("ellipse", 2.0, 1.0, 0.2, 0.0, 1.0, &gs) != CMAP_INVALID_CONIC) return 1;
    if (cmap_global_new("half-plane", 0.0, 1.0, 0.0, 0.0, 1.0, &gs) != CMAP_OK) return 2;
    double u = 0.0;
    if (cmap_global_eval(gs, 0.5, 0.0, &u) != CMAP_OK) return 3;
    cmap_global_free(gs);
    printf("%.6f %s\n", u, cmap_status_name(CMAP_PATH_BLOCKED));
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let cc = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("a C compiler");
    assert!(
        cc.status.success(),
        "{}",
        String::from_utf8_lossy(&cc.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    assert_eq!(
        String::from_utf8(run.stdout).unwrap(),
        "0.125000 PathBlocked\n"
    );
}
