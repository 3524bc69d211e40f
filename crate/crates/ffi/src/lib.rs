//! C interface to `cmap-core`.
//!
//! Objects are opaque handles created by `cmap_*_new`/`cmap_solve_*` and
//! released by the matching `cmap_*_free`. Every fallible call returns a
//! [`CmapStatus`]; on failure the message is kept per thread and can be read
//! with [`cmap_last_error_message`]. Output pointers are written only on
//! success. Panics never cross the boundary: they become `CMAP_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cmap_core::fields::{Grid, ScalarField};
use cmap_core::global2d::{
    make_global, schwarz_boundary_residual, GlobalKind, GlobalParams, GlobalSolution2D,
};
use cmap_core::obstacle::{solve_obstacle, Dirichlet, ObstacleSolution, SorOptions};
use cmap_core::regularity::growth_exponent;
use cmap_core::runner::{render_json, run, ExperimentConfig};
use cmap_core::Error;
use num_complex::Complex64;

/// Status codes. Values are stable; new codes are only ever appended.
#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmapStatus {
    CMAP_OK = 0,
    CMAP_NULL_POINTER = 1,
    CMAP_PANIC = 2,
    CMAP_DEGENERATE_POINT = 10,
    CMAP_OUTSIDE_TUBULAR_NEIGHBORHOOD = 11,
    CMAP_NOT_ON_BOUNDARY = 12,
    CMAP_GRID_TOO_SMALL = 13,
    CMAP_GRID_MISMATCH = 14,
    CMAP_NON_CONVERGENCE = 15,
    CMAP_NEGATIVE_SOURCE = 16,
    CMAP_BOUNDARY_DATA_OUTSIDE_TARGET = 17,
    CMAP_EMPTY_SET = 18,
    CMAP_NOT_FREE_BOUNDARY_POINT = 19,
    CMAP_INSUFFICIENT_NODES = 20,
    CMAP_ZERO_COEFFICIENT = 21,
    CMAP_EMPTY_SCALE_WINDOW = 22,
    CMAP_INVALID_CONIC = 23,
    CMAP_BRANCH_CUT = 24,
    CMAP_PATH_BLOCKED = 25,
    CMAP_ORIGIN_SINGULARITY = 26,
    CMAP_KERNEL_SINGULARITY = 27,
    CMAP_QUADRATURE_TOO_COARSE = 28,
    CMAP_HYPOTHESIS_VIOLATED = 29,
    CMAP_INVALID_ARGUMENT = 30,
    CMAP_FIELD_FORMAT = 31,
    CMAP_CONFIG_PARSE = 32,
    CMAP_IO = 33,
}

impl CmapStatus {
    fn from_error(e: &Error) -> Self {
        use CmapStatus::*;
        match e {
            Error::DegeneratePoint => CMAP_DEGENERATE_POINT,
            Error::OutsideTubularNeighborhood { .. } => CMAP_OUTSIDE_TUBULAR_NEIGHBORHOOD,
            Error::NotOnBoundary { .. } => CMAP_NOT_ON_BOUNDARY,
            Error::GridTooSmall { .. } => CMAP_GRID_TOO_SMALL,
            Error::GridMismatch(_) => CMAP_GRID_MISMATCH,
            Error::NonConvergence { .. } => CMAP_NON_CONVERGENCE,
            Error::NegativeSource { .. } => CMAP_NEGATIVE_SOURCE,
            Error::BoundaryDataOutsideTarget { .. } => CMAP_BOUNDARY_DATA_OUTSIDE_TARGET,
            Error::EmptySet => CMAP_EMPTY_SET,
            Error::NotFreeBoundaryPoint => CMAP_NOT_FREE_BOUNDARY_POINT,
            Error::InsufficientNodes { .. } => CMAP_INSUFFICIENT_NODES,
            Error::ZeroCoefficient(_) => CMAP_ZERO_COEFFICIENT,
            Error::EmptyScaleWindow { .. } => CMAP_EMPTY_SCALE_WINDOW,
            Error::InvalidConic(_) => CMAP_INVALID_CONIC,
            Error::BranchCut => CMAP_BRANCH_CUT,
            Error::PathBlocked => CMAP_PATH_BLOCKED,
            Error::OriginSingularity => CMAP_ORIGIN_SINGULARITY,
            Error::KernelSingularity => CMAP_KERNEL_SINGULARITY,
            Error::QuadratureTooCoarse { .. } => CMAP_QUADRATURE_TOO_COARSE,
            Error::HypothesisViolated { .. } => CMAP_HYPOTHESIS_VIOLATED,
            Error::InvalidArgument(_) => CMAP_INVALID_ARGUMENT,
            Error::FieldFormat(_) => CMAP_FIELD_FORMAT,
            Error::ConfigParse(_) => CMAP_CONFIG_PARSE,
            Error::Io(_) => CMAP_IO,
        }
    }
}

/// Uniform 1D or 2D grid.
pub struct CmapGrid(Grid);

/// Result of an obstacle solve.
pub struct CmapObstacle(ObstacleSolution);

/// Two-dimensional global solution.
pub struct CmapGlobal(GlobalSolution2D);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), (CmapStatus, String)>) -> CmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CmapStatus::CMAP_OK,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            CmapStatus::CMAP_PANIC
        }
    }
}

fn core(e: Error) -> (CmapStatus, String) {
    (CmapStatus::from_error(&e), e.to_string())
}

fn null(what: &str) -> (CmapStatus, String) {
    (CmapStatus::CMAP_NULL_POINTER, format!("{what} is null"))
}

unsafe fn slice<'a>(
    p: *const f64,
    len: usize,
    what: &str,
) -> Result<&'a [f64], (CmapStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CmapStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (CmapStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: checked non-null; the caller provides a writable location.
    unsafe { out.write(value) };
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cmap_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static name of a status, e.g. `"InvalidConic"`; never null.
#[no_mangle]
pub extern "C" fn cmap_status_name(status: CmapStatus) -> *const c_char {
    use CmapStatus::*;
    let s: &'static CStr = match status {
        CMAP_OK => c"Ok",
        CMAP_NULL_POINTER => c"NullPointer",
        CMAP_PANIC => c"Panic",
        CMAP_DEGENERATE_POINT => c"DegeneratePoint",
        CMAP_OUTSIDE_TUBULAR_NEIGHBORHOOD => c"OutsideTubularNeighborhood",
        CMAP_NOT_ON_BOUNDARY => c"NotOnBoundary",
        CMAP_GRID_TOO_SMALL => c"GridTooSmall",
        CMAP_GRID_MISMATCH => c"GridMismatch",
        CMAP_NON_CONVERGENCE => c"NonConvergence",
        CMAP_NEGATIVE_SOURCE => c"NegativeSource",
        CMAP_BOUNDARY_DATA_OUTSIDE_TARGET => c"BoundaryDataOutsideTarget",
        CMAP_EMPTY_SET => c"EmptySet",
        CMAP_NOT_FREE_BOUNDARY_POINT => c"NotFreeBoundaryPoint",
        CMAP_INSUFFICIENT_NODES => c"InsufficientNodes",
        CMAP_ZERO_COEFFICIENT => c"ZeroCoefficient",
        CMAP_EMPTY_SCALE_WINDOW => c"EmptyScaleWindow",
        CMAP_INVALID_CONIC => c"InvalidConic",
        CMAP_BRANCH_CUT => c"BranchCut",
        CMAP_PATH_BLOCKED => c"PathBlocked",
        CMAP_ORIGIN_SINGULARITY => c"OriginSingularity",
        CMAP_KERNEL_SINGULARITY => c"KernelSingularity",
        CMAP_QUADRATURE_TOO_COARSE => c"QuadratureTooCoarse",
        CMAP_HYPOTHESIS_VIOLATED => c"HypothesisViolated",
        CMAP_INVALID_ARGUMENT => c"InvalidArgument",
        CMAP_FIELD_FORMAT => c"FieldFormat",
        CMAP_CONFIG_PARSE => c"ConfigParse",
        CMAP_IO => c"Io",
    };
    s.as_ptr()
}

/// Square grid `[lo, hi]^dims` with `n` nodes per axis (`dims` is 1 or 2).
#[no_mangle]
pub extern "C" fn cmap_grid_new(
    dims: usize,
    lo: f64,
    hi: f64,
    n: usize,
    out: *mut *mut CmapGrid,
) -> CmapStatus {
    guard(|| {
        let g = Grid::cube(dims, lo, hi, n).map_err(core)?;
        put(out, Box::into_raw(Box::new(CmapGrid(g))), "out")
    })
}

/// # Safety
/// `grid` must be null or come from [`cmap_grid_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn cmap_grid_free(grid: *mut CmapGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Node count; 0 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn cmap_grid_len(grid: *const CmapGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Spacing; NaN for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn cmap_grid_h(grid: *const CmapGrid) -> f64 {
    grid.as_ref().map_or(f64::NAN, |g| g.0.h())
}

/// Projected SOR for `Δw = g χ{w>0}`, `w ≥ 0`. `g` and `boundary` hold one
/// value per node (x fastest); only the outer ring of `boundary` is used.
/// A run that hits `max_iter` returns `CMAP_NON_CONVERGENCE` and no handle.
///
/// # Safety
/// `grid` must be a live grid handle; `g` and `boundary` must point to
/// `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn cmap_solve_obstacle(
    grid: *const CmapGrid,
    g: *const f64,
    boundary: *const f64,
    len: usize,
    tol: f64,
    max_iter: usize,
    omega: f64,
    out: *mut *mut CmapObstacle,
) -> CmapStatus {
    guard(|| {
        let grid = &handle(grid, "grid")?.0;
        if len != grid.len() {
            return Err(core(Error::GridMismatch(format!(
                "{len} values for {} nodes",
                grid.len()
            ))));
        }
        let g = slice(g, len, "g")?;
        let b = slice(boundary, len, "boundary")?;
        let source = ScalarField::new(grid.clone(), g.to_vec()).map_err(core)?;
        let fixed: Vec<bool> = (0..len).map(|k| grid.is_boundary(k)).collect();
        let values = (0..len)
            .map(|k| if fixed[k] { b[k] } else { 0.0 })
            .collect();
        let bc = Dirichlet { fixed, values };
        let opts = SorOptions {
            tol,
            max_iter,
            omega,
        };
        let sol = solve_obstacle(&source, &bc, &opts)
            .and_then(|s| s.ensure_converged())
            .map_err(core)?;
        put(out, Box::into_raw(Box::new(CmapObstacle(sol))), "out")
    })
}

/// # Safety
/// `sol` must be null or a live obstacle handle.
#[no_mangle]
pub unsafe extern "C" fn cmap_obstacle_free(sol: *mut CmapObstacle) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Copies `w` into `out` (`len` must equal the node count).
///
/// # Safety
/// `sol` must be a live obstacle handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cmap_obstacle_w(
    sol: *const CmapObstacle,
    out: *mut f64,
    len: usize,
) -> CmapStatus {
    guard(|| {
        let w = &handle(sol, "sol")?.0.w.values;
        if len != w.len() {
            return Err(core(Error::GridMismatch(format!(
                "buffer {len} for {} nodes",
                w.len()
            ))));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(w.as_ptr(), out, len);
        Ok(())
    })
}

/// Free-boundary node count, sweep count and complementarity residual.
///
/// # Safety
/// `sol` must be a live obstacle handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmap_obstacle_stats(
    sol: *const CmapObstacle,
    fb_points: *mut usize,
    iterations: *mut usize,
    residual: *mut f64,
) -> CmapStatus {
    guard(|| {
        let s = &handle(sol, "sol")?.0;
        put(fb_points, s.fb_points.len(), "fb_points")?;
        put(iterations, s.iterations, "iterations")?;
        put(residual, s.residual, "residual")
    })
}

/// Global solution of the given kind (`"ellipse"`, `"parabola"`,
/// `"half-plane"`, `"strip"` or `"line"`).
///
/// # Safety
/// `kind` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cmap_global_new(
    kind: *const c_char,
    a: f64,
    alpha: f64,
    beta: f64,
    rotation: f64,
    width: f64,
    out: *mut *mut CmapGlobal,
) -> CmapStatus {
    guard(|| {
        if kind.is_null() {
            return Err(null("kind"));
        }
        let name = CStr::from_ptr(kind)
            .to_str()
            .map_err(|e| core(Error::InvalidArgument(e.to_string())))?;
        let kind = GlobalKind::parse(name).map_err(core)?;
        let gs = make_global(
            kind,
            GlobalParams {
                a,
                alpha,
                beta,
                rotation,
                width,
            },
        )
        .map_err(core)?;
        put(out, Box::into_raw(Box::new(CmapGlobal(gs))), "out")
    })
}

/// # Safety
/// `gs` must be null or a live global-solution handle.
#[no_mangle]
pub unsafe extern "C" fn cmap_global_free(gs: *mut CmapGlobal) {
    if !gs.is_null() {
        drop(Box::from_raw(gs));
    }
}

/// `U(x, y)`.
///
/// # Safety
/// `gs` must be a live global-solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmap_global_eval(
    gs: *const CmapGlobal,
    x: f64,
    y: f64,
    out: *mut f64,
) -> CmapStatus {
    guard(|| {
        let gs = &handle(gs, "gs")?.0;
        let u = gs.evaluate_u_closed(Complex64::new(x, y)).map_err(core)?;
        put(out, u, "out")
    })
}

/// The scale `δ`, the parameter `μ`, and the largest `|S(z) − z̄|` over
/// `samples` free-boundary points (NaN for non-conics, `samples = 0` skips).
///
/// # Safety
/// `gs` must be a live global-solution handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmap_global_stats(
    gs: *const CmapGlobal,
    samples: usize,
    delta: *mut f64,
    mu: *mut f64,
    schwarz_residual: *mut f64,
) -> CmapStatus {
    guard(|| {
        let gs = &handle(gs, "gs")?.0;
        let res = if samples > 0 && gs.kind.is_conic() {
            schwarz_boundary_residual(gs, samples).map_err(core)?
        } else {
            f64::NAN
        };
        put(delta, gs.delta, "delta")?;
        put(mu, gs.mu, "mu")?;
        put(schwarz_residual, res, "schwarz_residual")
    })
}

/// Log-log slope of the degree-`degree` fit residual of a field at `(x, y)`
/// over decreasing `scales` (at least four).
///
/// # Safety
/// `grid` must be a live grid handle; `values` must hold one double per
/// node and `scales` `n_scales` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cmap_growth_exponent(
    grid: *const CmapGrid,
    values: *const f64,
    len: usize,
    x: f64,
    y: f64,
    degree: usize,
    scales: *const f64,
    n_scales: usize,
    out: *mut f64,
) -> CmapStatus {
    guard(|| {
        let grid = &handle(grid, "grid")?.0;
        let f =
            ScalarField::new(grid.clone(), slice(values, len, "values")?.to_vec()).map_err(core)?;
        let scales = slice(scales, n_scales, "scales")?;
        let x0: Vec<f64> = [x, y][..grid.dims()].to_vec();
        let g = growth_exponent(&f, &x0, degree, scales).map_err(core)?;
        put(out, g.exponent, "out")
    })
}

/// Runs the experiment described by the TOML file at `config_path` and
/// returns its JSON report in `*report_json` (free with [`cmap_string_free`]).
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn cmap_run_config(
    config_path: *const c_char,
    report_json: *mut *mut c_char,
) -> CmapStatus {
    guard(|| {
        if config_path.is_null() {
            return Err(null("config_path"));
        }
        let path = CStr::from_ptr(config_path)
            .to_str()
            .map_err(|e| core(Error::InvalidArgument(e.to_string())))?;
        let cfg = ExperimentConfig::load(Path::new(path), None).map_err(core)?;
        let out = run(&cfg).map_err(core)?;
        let text = CString::new(render_json(&out.report))
            .map_err(|e| core(Error::InvalidArgument(e.to_string())))?;
        put(report_json, text.into_raw(), "report_json")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cmap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_names_match_error_kinds() {
        let errors = [
            Error::DegeneratePoint,
            Error::OutsideTubularNeighborhood {
                distance: 1.0,
                halfwidth: 0.5,
            },
            Error::NotOnBoundary { distance: 0.1 },
            Error::GridTooSmall { needed: 3, got: 1 },
            Error::GridMismatch(String::new()),
            Error::NonConvergence {
                iterations: 1,
                last_change: 1.0,
            },
            Error::NegativeSource { node: 0 },
            Error::BoundaryDataOutsideTarget { node: 0 },
            Error::EmptySet,
            Error::NotFreeBoundaryPoint,
            Error::InsufficientNodes {
                needed: 1,
                found: 0,
            },
            Error::ZeroCoefficient(0.0),
            Error::EmptyScaleWindow { lower: 1.0 },
            Error::InvalidConic(String::new()),
            Error::BranchCut,
            Error::PathBlocked,
            Error::OriginSingularity,
            Error::KernelSingularity,
            Error::QuadratureTooCoarse {
                cell: 1.0,
                guard: 0.5,
            },
            Error::HypothesisViolated {
                r: 0.5,
                sup: 1.0,
                bound: 0.5,
            },
            Error::InvalidArgument(String::new()),
            Error::FieldFormat(String::new()),
            Error::ConfigParse(String::new()),
            Error::Io(std::io::Error::other("x")),
        ];
        let mut codes = Vec::new();
        for e in &errors {
            let s = CmapStatus::from_error(e);
            let name = unsafe { CStr::from_ptr(cmap_status_name(s)) };
            assert_eq!(name.to_str().unwrap(), e.kind());
            codes.push(s as i32);
        }
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), errors.len());
    }
}
