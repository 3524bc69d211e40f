use cmap_core::fields::{partial_at, Grid, ScalarField};
use cmap_core::potential::*;
use cmap_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth_field(seed: u64, n: usize) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grid = Grid::cube(2, -1.0, 1.0, n).unwrap();
    ScalarField::from_fn(grid, move |x, y| {
        c[0] * (1.3 * x).sin()
            + c[1] * (0.7 * y + 0.2).cos()
            + c[2] * x * y
            + c[3] * (x - y).powi(3)
            + c[4] * x
            + c[5]
    })
}

fn lap5(p: &Potential, x: [f64; 2], h: f64) -> f64 {
    let v = |a: f64, b: f64| p.phi([x[0] + a, x[1] + b]).unwrap();
    (v(h, 0.0) + v(-h, 0.0) + v(0.0, h) + v(0.0, -h) - 4.0 * v(0.0, 0.0)) / (h * h)
}

#[test]
fn kernel_quadratic_bound() {
    // Taylor: |G(x,y)| ≤ ½ sup|D²Γ| |x|² with |D²Γ(z)| ≤ 1/(2π|z|²) (2D),
    // 1/(2π|z|³) (3D), and |z| ≥ |y|/2 on the segment.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n, c_max) in [
        (2usize, 1.0 / std::f64::consts::PI),
        (3, 2.0 / std::f64::consts::PI),
    ] {
        let mut fitted: f64 = 0.0;
        for _ in 0..1000 {
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let t = rng.gen_range(0.01..0.5);
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nd = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x: Vec<f64> = dir.iter().map(|d| d / nd * t * ny).collect();
            let nx2: f64 = x.iter().map(|v| v * v).sum();
            let g = kernel_g(&x, &y).unwrap();
            fitted = fitted.max(g.abs() * ny.powi(n as i32) / nx2);
        }
        assert!(
            fitted.is_finite() && fitted > 0.0 && fitted <= c_max,
            "n = {n}: C = {fitted}"
        );
    }
}

#[test]
fn zero_density_gives_zero() {
    let grid = Grid::cube(2, -1.0, 1.0, 41).unwrap();
    let f = ScalarField::zeros(grid);
    let opts = QuadratureOptions {
        cells_per_side: 100,
        subdivision: 4,
    };
    assert_eq!(potential_phi(&f, 0, [0.3, -0.2], opts).unwrap(), 0.0);
}

#[test]
fn normalized_at_origin_for_random_fields() {
    for seed in 0..4 {
        let d = FieldDensity::new(smooth_field(seed, 101), (seed % 2) as usize).unwrap();
        let p = Potential::new(&d, QuadratureOptions::default()).unwrap();
        assert!(p.phi([0.0, 0.0]).unwrap().abs() <= 1e-6);
        let g = p.grad_phi([0.0, 0.0]).unwrap();
        assert!(g[0].abs() <= 1e-6 && g[1].abs() <= 1e-6, "{g:?}");
    }
}

#[test]
fn laplacian_is_point_evaluation() {
    let f = smooth_field(11, 101);
    let h = f.grid.h();
    for axis in 0..2 {
        let d = FieldDensity::new(f.clone(), axis).unwrap();
        let p = Potential::new(&d, QuadratureOptions::default()).unwrap();
        for (i, j) in [(60, 55), (30, 70), (50, 25)] {
            let k = f.grid.index(i, j);
            let x = f.grid.point(k);
            let target = partial_at(&f.grid, &f.values, k, axis);
            for step in [h, 2.5 * h] {
                let err = (lap5(&p, x, step) - target).abs();
                assert!(
                    err <= (1e-4f64).max(10.0 * step * step),
                    "axis {axis} x {x:?} step {step}: {err:e}"
                );
            }
        }
    }
}

#[test]
fn finer_local_subdivision_reaches_smaller_steps() {
    let d = FnDensity {
        f: |y: [f64; 2]| (2.0 * y[0]).sin() * (1.0 + y[1] * y[1]),
        df: |y: [f64; 2]| 2.0 * (2.0 * y[0]).cos() * (1.0 + y[1] * y[1]),
    };
    let p = Potential::new(
        &d,
        QuadratureOptions {
            cells_per_side: 318,
            subdivision: 16,
        },
    )
    .unwrap();
    let h = 0.01;
    for x in [[0.2, 0.1], [-0.4, 0.3], [0.0, -0.5]] {
        let err = (lap5(&p, x, h) - d.derivative(x)).abs();
        assert!(err <= 10.0 * h * h, "{x:?}: {err:e}");
    }
}

#[test]
fn quadrature_converges() {
    let d = FieldDensity::new(smooth_field(3, 201), 0).unwrap();
    let coarse = Potential::new(&d, QuadratureOptions::default()).unwrap();
    let fine = Potential::new(
        &d,
        QuadratureOptions {
            cells_per_side: 636,
            subdivision: 4,
        },
    )
    .unwrap();
    for k in 0..10 {
        let x = [0.07 * k as f64 - 0.3, 0.5 - 0.09 * k as f64];
        let diff = (coarse.phi(x).unwrap() - fine.phi(x).unwrap()).abs();
        assert!(diff <= 1e-5, "{x:?}: {diff:e}");
    }
}

#[test]
fn too_coarse_near_the_rim() {
    let d = FnDensity {
        f: |_: [f64; 2]| 0.0,
        df: |_: [f64; 2]| 1.0,
    };
    let p = Potential::new(
        &d,
        QuadratureOptions {
            cells_per_side: 20,
            subdivision: 4,
        },
    )
    .unwrap();
    assert!(matches!(
        p.phi([0.95, 0.0]),
        Err(Error::QuadratureTooCoarse { .. })
    ));
    assert!(p.phi([0.5, 0.0]).is_ok());
}

/// `f = y_0 (1 + s⁴)^{−1/8}`, `s = |y|/δ`: a smooth version of
/// `y_0 min(1, √(δ/|y|))`, below it everywhere.
fn sqrt_profile(delta: f64) -> impl Density {
    FnDensity {
        f: move |y: [f64; 2]| {
            let s = (y[0] * y[0] + y[1] * y[1]).sqrt() / delta;
            y[0] * (1.0 + s.powi(4)).powf(-0.125)
        },
        df: move |y: [f64; 2]| {
            let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
            if r == 0.0 {
                return 1.0;
            }
            let s = r / delta;
            let m = (1.0 + s.powi(4)).powf(-0.125);
            let dm = -0.5 * s.powi(3) * (1.0 + s.powi(4)).powf(-1.125);
            m + y[0] * y[0] / (r * delta) * dm
        },
    }
}

fn r_grid(delta: f64) -> Vec<f64> {
    (0..8)
        .map(|k| 0.8 / 2f64.powf(0.5 * k as f64))
        .filter(|&r| r > delta)
        .collect()
}

#[test]
fn growth_bound_stable_across_delta() {
    let mut maxima = Vec::new();
    for delta in [0.02, 0.05, 0.1] {
        let m = GrowthModulus::new(GrowthForm::Power { alpha: 0.5 }, delta).unwrap();
        let rep = verify_quad_bound(
            &m,
            &sqrt_profile(delta),
            &r_grid(delta),
            QuadratureOptions::default(),
            8,
        )
        .unwrap();
        assert!(
            rep.max_ratio.is_finite() && rep.max_ratio > 0.0,
            "δ = {delta}: {rep:?}"
        );
        maxima.push(rep.max_ratio);
    }
    let hi = maxima.iter().cloned().fold(0.0, f64::max);
    let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 2.0, "{maxima:?}");
}

#[test]
fn growth_bound_trivial_and_linear() {
    let m = GrowthModulus::new(GrowthForm::Power { alpha: 1.0 }, 0.05).unwrap();
    let zero = FnDensity {
        f: |_: [f64; 2]| 0.0,
        df: |_: [f64; 2]| 0.0,
    };
    let opts = QuadratureOptions {
        cells_per_side: 160,
        subdivision: 4,
    };
    assert_eq!(
        verify_quad_bound(&m, &zero, &[0.5, 0.25], opts, 4)
            .unwrap()
            .max_ratio,
        0.0
    );

    let linear = FnDensity {
        f: |y: [f64; 2]| y[0],
        df: |_: [f64; 2]| 1.0,
    };
    let rep = verify_quad_bound(&m, &linear, &[0.8, 0.4, 0.2, 0.1], opts, 6).unwrap();
    assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0, "{rep:?}");
    // ω ≡ 1 makes the log term r·log(1/r) the dominant part of the bound.
    assert!(m.log_integral(0.05, 0.05 / 0.1) > m.omega(0.5));
}

#[test]
fn hypothesis_is_checked() {
    let m = GrowthModulus::new(GrowthForm::Power { alpha: 0.0 }, 0.05).unwrap();
    // ω(t) = t: allowed sup on B_r is δ, but f = y_0 reaches r.
    let linear = FnDensity {
        f: |y: [f64; 2]| y[0],
        df: |_: [f64; 2]| 1.0,
    };
    let opts = QuadratureOptions {
        cells_per_side: 64,
        subdivision: 4,
    };
    assert!(matches!(
        verify_quad_bound(&m, &linear, &[0.5], opts, 4),
        Err(Error::HypothesisViolated { .. })
    ));
}

#[test]
fn log_constant_modulus() {
    let m = GrowthModulus::new(GrowthForm::LogConstant, 0.05).unwrap();
    let c = 1.0 / 0.05f64.ln().abs();
    assert!((m.omega(0.3) - c).abs() < 1e-15);
    let f = FnDensity {
        f: move |y: [f64; 2]| c * y[1],
        df: |_: [f64; 2]| 0.0,
    };
    let opts = QuadratureOptions {
        cells_per_side: 64,
        subdivision: 4,
    };
    // D_0 f = 0, so Φ vanishes; the growth hypothesis holds with equality.
    assert_eq!(
        verify_quad_bound(&m, &f, &[0.5, 0.25], opts, 4)
            .unwrap()
            .max_ratio,
        0.0
    );
    assert!(GrowthModulus::new(GrowthForm::LogConstant, 1.5).is_err());
}
