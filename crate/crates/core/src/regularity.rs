//! Pointwise regularity diagnostics: local polynomial fits measured in the
//! adimensional C¹ norm, growth exponents, mean oscillation of third
//! differences, the geometric approximation test against global solutions,
//! and the scale scans around singular points.
//!
//! Balls are sets of grid nodes; derivatives of residuals are the grid's
//! central differences, so a residual that is a polynomial of the fitted
//! degree vanishes up to rounding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{partial_at, Grid, ScalarField};
use crate::global2d::{make_global, GlobalKind, GlobalParams, GlobalSolution2D};
use crate::obstacle::{default_slack, masked_min_diameter, ObstacleSolution};
use crate::polynomial::{harmonic_cubic_basis, monomials, Polynomial};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub poly: Polynomial,
    /// `sup |f − p|` over the ball.
    pub residual_sup: f64,
    /// Root mean square of `f − p` over the ball nodes; the quantity the fit
    /// minimizes, hence nonincreasing in the degree.
    pub residual_rms: f64,
    /// `sup |D_h(f − p)|` over the ball.
    pub residual_grad: f64,
    /// `sup (|f − p| + r |D_h(f − p)|)` over the ball.
    pub adimensional_c1: f64,
    pub nodes: usize,
}

/// Residual `d = f − p` on the ball and its one-node ring, then the sup
/// norms over the ball proper. `p` is given pointwise.
struct BallResidual {
    sup: f64,
    grad: f64,
    c1: f64,
}

fn ball_residual(f: &ScalarField, x0: &[f64], r: f64, p: impl Fn([f64; 2]) -> f64) -> BallResidual {
    let grid = &f.grid;
    let ball = grid.ball_nodes(x0, r);
    let mut d = vec![f64::NAN; grid.len()];
    for k in grid.ball_nodes(x0, r + 2.5 * grid.h()) {
        d[k] = f.values[k] - p(grid.point(k));
    }
    let mut out = BallResidual {
        sup: 0.0,
        grad: 0.0,
        c1: 0.0,
    };
    for k in ball {
        let mut g2 = 0.0;
        for axis in 0..grid.dims() {
            g2 += partial_at(grid, &d, k, axis).powi(2);
        }
        let g = g2.sqrt();
        out.sup = out.sup.max(d[k].abs());
        out.grad = out.grad.max(g);
        out.c1 = out.c1.max(d[k].abs() + r * g);
    }
    out
}

/// Least-squares fit over the nodes of `B_r(x0)` in the span of `basis`
/// (coefficient vectors over [`monomials`]`(dims, degree)`), solved in the
/// scaled coordinates `(x − x0)/r`.
fn fit_in_span(
    f: &ScalarField,
    x0: &[f64],
    degree: usize,
    r: f64,
    basis: &[Vec<f64>],
) -> Result<Fit> {
    let grid = &f.grid;
    let dims = grid.dims();
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fit radius {r} must be positive"
        )));
    }
    let nodes = grid.ball_nodes(x0, r);
    let needed = 3 * basis.len();
    if nodes.len() < needed {
        return Err(Error::InsufficientNodes {
            needed,
            found: nodes.len(),
        });
    }
    let mons = monomials(dims, degree);
    let base = [x0[0], if dims == 2 { x0[1] } else { 0.0 }];
    let scaled = |k: usize| {
        let p = grid.point(k);
        (
            (p[0] - base[0]) / r,
            if dims == 2 { (p[1] - base[1]) / r } else { 0.0 },
        )
    };
    let a = DMatrix::from_fn(nodes.len(), basis.len(), |row, col| {
        let (x, y) = scaled(nodes[row]);
        mons.iter()
            .zip(&basis[col])
            .map(|(&(i, j), c)| c * x.powi(i) * y.powi(j))
            .sum()
    });
    let b = DVector::from_iterator(nodes.len(), nodes.iter().map(|&k| f.values[k]));
    let svd = a.svd(true, true);
    let w = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::InvalidArgument(format!("least squares: {e}")))?;
    let mut coeffs = vec![0.0; mons.len()];
    for (col, wc) in basis.iter().zip(w.iter()) {
        for (c, &bc) in coeffs.iter_mut().zip(col) {
            *c += wc * bc;
        }
    }
    for (c, &(i, j)) in coeffs.iter_mut().zip(&mons) {
        *c /= r.powi(i + j);
    }
    let poly = Polynomial::new(dims, degree, base, coeffs)?;
    let res = ball_residual(f, x0, r, |p| poly.eval(&p));
    let ss: f64 = nodes
        .iter()
        .map(|&k| (f.values[k] - poly.eval(&grid.point(k))).powi(2))
        .sum();
    Ok(Fit {
        poly,
        residual_sup: res.sup,
        residual_rms: (ss / nodes.len() as f64).sqrt(),
        residual_grad: res.grad,
        adimensional_c1: res.c1,
        nodes: nodes.len(),
    })
}

fn monomial_basis(dims: usize, degree: usize) -> Vec<Vec<f64>> {
    let n = monomials(dims, degree).len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Least-squares polynomial of degree `degree` (at most 3) over `B_r(x0)`.
pub fn fit_polynomial(f: &ScalarField, x0: &[f64], degree: usize, r: f64) -> Result<Fit> {
    if degree > 3 {
        return Err(Error::InvalidArgument(format!("degree {degree} above 3")));
    }
    fit_in_span(f, x0, degree, r, &monomial_basis(f.grid.dims(), degree))
}

/// Least squares restricted to harmonic polynomials of degree at most 3 (2D).
pub fn fit_harmonic_cubic(f: &ScalarField, x0: &[f64], r: f64) -> Result<Fit> {
    if f.grid.dims() != 2 {
        return Err(Error::InvalidArgument(
            "harmonic cubic fit needs a 2D field".into(),
        ));
    }
    fit_in_span(f, x0, 3, r, &harmonic_cubic_basis())
}

/// Dyadic scales `r_max, r_max/2, …`, `count` of them.
pub fn dyadic_scales(r_max: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| r_max / f64::powi(2.0, k as i32))
        .collect()
}

fn check_decreasing(scales: &[f64]) -> Result<()> {
    if scales.iter().any(|&r| !(r > 0.0 && r.is_finite()))
        || scales.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "scales must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Growth {
    /// Least-squares slope of `log residual_sup` against `log r`;
    /// `+∞` when every residual is at rounding level.
    pub exponent: f64,
    pub stderr: f64,
    /// `(r, residual_sup)` per scale.
    pub residuals: Vec<(f64, f64)>,
}

/// Slope and its standard error for the line through `(x, y)`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Growth exponent of `f − p_r` at `x0`, `p_r` the degree-`degree` fit on
/// each ball `B_r(x0)`, from at least 4 strictly decreasing scales.
///
/// A residual at rounding level (relative `1e−13` to `sup |f|` on the ball)
/// means `f` is itself a polynomial of that degree near `x0`; the exponent is
/// then reported as `+∞` with zero stderr.
pub fn growth_exponent(
    f: &ScalarField,
    x0: &[f64],
    degree: usize,
    scales: &[f64],
) -> Result<Growth> {
    if scales.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 scales, got {}",
            scales.len()
        )));
    }
    check_decreasing(scales)?;
    let mut residuals = Vec::with_capacity(scales.len());
    let mut at_rounding = false;
    for &r in scales {
        let fit = fit_polynomial(f, x0, degree, r)?;
        let scale = f
            .grid
            .ball_nodes(x0, r)
            .iter()
            .map(|&k| f.values[k].abs())
            .fold(0.0, f64::max);
        if fit.residual_sup <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            at_rounding = true;
        }
        residuals.push((r, fit.residual_sup));
    }
    if at_rounding {
        return Ok(Growth {
            exponent: f64::INFINITY,
            stderr: 0.0,
            residuals,
        });
    }
    let lx: Vec<f64> = residuals.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|p| p.1.ln()).collect();
    let (exponent, stderr) = regression_slope(&lx, &ly);
    Ok(Growth {
        exponent,
        stderr,
        residuals,
    })
}

/// All third differences of `f`: `D_xxx` in 1D; `D_xxx, D_xxy, D_xyy, D_yyy`
/// in 2D. Pure directions use the 5-point centered stencil, mixed ones the
/// 3×3 product stencil; `NaN` where the stencil leaves the grid.
pub fn third_differences(f: &ScalarField) -> Result<Vec<ScalarField>> {
    let g = &f.grid;
    let mut out = vec![crate::fields::third_difference(f, 0)?];
    if g.dims() == 1 {
        return Ok(out);
    }
    let nx = g.nx();
    let h3 = g.h().powi(3);
    let v = &f.values;
    let mixed = |along: usize| -> Result<ScalarField> {
        // second difference along `along`, central first difference across.
        let (s2, s1) = if along == 0 { (1, nx) } else { (nx, 1) };
        let vals = (0..g.len())
            .map(|k| {
                let (i, j) = g.ij(k);
                if i == 0 || j == 0 || i + 1 >= g.nx() || j + 1 >= g.ny() {
                    return f64::NAN;
                }
                let d2 = |c: usize| v[c + s2] - 2.0 * v[c] + v[c - s2];
                (d2(k + s1) - d2(k - s1)) / (2.0 * h3)
            })
            .collect();
        ScalarField::new(g.clone(), vals)
    };
    out.push(mixed(0)?);
    out.push(mixed(1)?);
    out.push(crate::fields::third_difference(f, 1)?);
    Ok(out)
}

/// Largest mean oscillation `avg_{B_r(c)} |D³_h f − avg_{B_r(c)} D³_h f|` over
/// the given centers, scales and third-difference components. Stencils that
/// straddle a free boundary are kept.
pub fn bmo_third(f: &ScalarField, centers: &[[f64; 2]], scales: &[f64]) -> Result<f64> {
    let comps = third_differences(f)?;
    let mut best: Option<f64> = None;
    for c in centers {
        for &r in scales {
            let ball = f.grid.ball_nodes(c, r);
            for comp in &comps {
                let vals: Vec<f64> = ball
                    .iter()
                    .map(|&k| comp.values[k])
                    .filter(|v| v.is_finite())
                    .collect();
                if vals.is_empty() {
                    continue;
                }
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let osc = vals.iter().map(|v| (v - mean).abs()).sum::<f64>() / vals.len() as f64;
                best = Some(best.map_or(osc, |b| b.max(osc)));
            }
        }
    }
    best.ok_or(Error::EmptySet)
}

/// A global solution centered at `x0`, with lengths measured in units of the
/// ball radius so that one catalog serves every scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CatalogMember {
    HalfPlane {
        theta: f64,
    },
    Line {
        theta: f64,
    },
    Strip {
        theta: f64,
        width: f64,
    },
    /// Parabola for `a = 0`, ellipse otherwise.
    Conic {
        theta: f64,
        a: f64,
        alpha: f64,
        beta: f64,
    },
}

/// Ellipses below this axis ratio are left to the parabola branch; the
/// closed-form potential is only accurate from here up.
const CATALOG_A_MIN: f64 = 1e-2;
/// Axis ratios above this snap to the disk, for the same reason.
const CATALOG_A_SNAP: f64 = 1.0 - 5e-5;

impl CatalogMember {
    /// The member as a global solution at ball radius `r`.
    pub fn at_scale(&self, r: f64) -> Result<GlobalSolution2D> {
        let p = |rotation: f64| GlobalParams {
            rotation,
            ..GlobalParams::default()
        };
        match *self {
            CatalogMember::HalfPlane { theta } => make_global(GlobalKind::HalfPlane, p(theta)),
            CatalogMember::Line { theta } => make_global(GlobalKind::Line, p(theta)),
            CatalogMember::Strip { theta, width } => make_global(
                GlobalKind::Strip,
                GlobalParams {
                    width: width * r,
                    ..p(theta)
                },
            ),
            CatalogMember::Conic {
                theta,
                a,
                alpha,
                beta,
            } => {
                let kind = if a == 0.0 {
                    GlobalKind::Parabola
                } else {
                    GlobalKind::Ellipse
                };
                make_global(
                    kind,
                    GlobalParams {
                        a,
                        alpha: alpha * r,
                        beta: beta * r,
                        rotation: theta,
                        width: 1.0,
                    },
                )
            }
        }
    }

    /// The same global solution described relative to a ball `factor`
    /// times smaller: lengths in ball units grow by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        match *self {
            CatalogMember::Strip { theta, width } => CatalogMember::Strip {
                theta,
                width: width * factor,
            },
            CatalogMember::Conic {
                theta,
                a,
                alpha,
                beta,
            } => CatalogMember::Conic {
                theta,
                a,
                alpha: alpha * factor,
                beta: beta * factor,
            },
            other => other,
        }
    }

    fn family(&self) -> usize {
        match *self {
            CatalogMember::HalfPlane { .. } => 0,
            CatalogMember::Line { .. } => 1,
            CatalogMember::Strip { .. } => 2,
            CatalogMember::Conic { a, .. } if a == 0.0 => 3,
            CatalogMember::Conic { .. } => 4,
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            CatalogMember::HalfPlane { theta } | CatalogMember::Line { theta } => vec![theta],
            CatalogMember::Strip { theta, width } => vec![theta, width.ln()],
            CatalogMember::Conic {
                theta,
                a,
                alpha,
                beta,
            } if a == 0.0 => vec![theta, alpha.ln(), beta],
            CatalogMember::Conic {
                theta,
                a,
                alpha,
                beta,
            } => vec![theta, a, alpha.ln(), beta],
        }
    }

    fn with_params(&self, q: &[f64]) -> Self {
        match *self {
            CatalogMember::HalfPlane { .. } => CatalogMember::HalfPlane { theta: q[0] },
            CatalogMember::Line { .. } => CatalogMember::Line { theta: q[0] },
            CatalogMember::Strip { .. } => CatalogMember::Strip {
                theta: q[0],
                width: q[1].exp(),
            },
            CatalogMember::Conic { a, .. } if a == 0.0 => CatalogMember::Conic {
                theta: q[0],
                a: 0.0,
                alpha: q[1].exp(),
                beta: q[2],
            },
            CatalogMember::Conic { .. } => {
                let a = q[1].clamp(CATALOG_A_MIN, 1.0);
                let a = if a > CATALOG_A_SNAP { 1.0 } else { a };
                CatalogMember::Conic {
                    theta: q[0],
                    a,
                    alpha: q[2].exp(),
                    beta: q[3],
                }
            }
        }
    }
}

/// Search grid for [`gap_test`]. Conic lengths are in units of the ball
/// radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub angles: usize,
    pub a: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub strip_width: Vec<f64>,
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

impl Default for Catalog {
    /// 36 angles; `a ∈ {0} ∪` 19 log-spaced values in `[1e−2, 1]`;
    /// 20 log-spaced `α ∈ [1e−2, 1e2]`; `β ∈ {0} ∪ ±`10 log-spaced values in
    /// `[1e−2, 1e2]`; 20 log-spaced strip widths in `[1e−2, 1e1]`.
    fn default() -> Self {
        let mut a = vec![0.0];
        a.extend(log_space(CATALOG_A_MIN, 1.0, 19));
        let mut beta = vec![0.0];
        for b in log_space(1e-2, 1e2, 10) {
            beta.push(b);
            beta.push(-b);
        }
        Catalog {
            angles: 36,
            a,
            alpha: log_space(1e-2, 1e2, 20),
            beta,
            strip_width: log_space(1e-2, 1e1, 20),
        }
    }
}

impl Catalog {
    pub fn members(&self) -> Vec<CatalogMember> {
        let thetas: Vec<f64> = (0..self.angles)
            .map(|k| std::f64::consts::TAU * k as f64 / self.angles as f64)
            .collect();
        let mut out = Vec::new();
        for &theta in &thetas {
            out.push(CatalogMember::HalfPlane { theta });
            out.push(CatalogMember::Line { theta });
            out.extend(
                self.strip_width
                    .iter()
                    .map(|&width| CatalogMember::Strip { theta, width }),
            );
        }
        for &theta in &thetas {
            for &a in &self.a {
                for &alpha in &self.alpha {
                    for &beta in &self.beta {
                        out.push(CatalogMember::Conic {
                            theta,
                            a,
                            alpha,
                            beta,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapOptions {
    pub sigma: f64,
    /// `g(x0)` at or below this is treated as zero.
    pub tol_g: f64,
    pub catalog: Catalog,
    /// Ball nodes used to rank catalog members before refinement.
    pub prefilter_nodes: usize,
    /// Best-ranked members of each family (half-plane, line, strip,
    /// parabola, ellipse) refined locally.
    pub keep: usize,
    /// Ball nodes used by the local refinement.
    pub refine_nodes: usize,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            sigma: 0.5,
            tol_g: 1e-6,
            catalog: Catalog::default(),
            prefilter_nodes: 64,
            keep: 8,
            refine_nodes: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRecord {
    pub r: f64,
    pub lambda: f64,
    /// `‖w − g(x0) U‖*` in the adimensional C¹ norm on `B_r(x0)`.
    pub distance: f64,
    pub best: CatalogMember,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapProfile {
    pub g0: f64,
    pub records: Vec<GapRecord>,
}

impl GapProfile {
    pub fn max_lambda(&self) -> f64 {
        self.records.iter().map(|r| r.lambda).fold(0.0, f64::max)
    }
}

/// Evenly strided subset of at most `n` entries, always keeping the last.
fn stride_subset(nodes: &[usize], n: usize) -> Vec<usize> {
    if nodes.len() <= n {
        return nodes.to_vec();
    }
    let step = nodes.len() as f64 / n as f64;
    (0..n)
        .map(|i| nodes[((i as f64 + 0.5) * step) as usize])
        .collect()
}

fn u_at(gs: &GlobalSolution2D, grid: &Grid, k: usize, x0: &[f64]) -> Result<f64> {
    let p = grid.point(k);
    let z = C::new(p[0] - x0[0], p[1] - x0[1]);
    match gs.evaluate_u_closed(z) {
        Err(Error::BranchCut) => gs.evaluate_u_closed(z + C::new(0.0, 1e-13)),
        other => other,
    }
}

/// Least-squares refinement of a member's parameters (Levenberg–Marquardt
/// with forward-difference Jacobians) on residuals `w − g0 U` at `nodes`.
fn refine_member(
    w: &ScalarField,
    g0: f64,
    x0: &[f64],
    r: f64,
    nodes: &[usize],
    start: CatalogMember,
) -> CatalogMember {
    let resid = |m: &CatalogMember| -> Option<DVector<f64>> {
        let gs = m.at_scale(r).ok()?;
        let mut v = DVector::zeros(nodes.len());
        for (i, &k) in nodes.iter().enumerate() {
            v[i] = (w.values[k] - g0 * u_at(&gs, &w.grid, k, x0).ok()?) / (r * r);
        }
        Some(v)
    };
    let mut q = start.params();
    let Some(mut res) = resid(&start) else {
        return start;
    };
    let mut cost = res.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..60 {
        if cost < 1e-30 {
            break;
        }
        let mut jac = DMatrix::zeros(nodes.len(), q.len());
        for c in 0..q.len() {
            let step = 1e-7 * (1.0 + q[c].abs());
            let mut qp = q.clone();
            qp[c] += step;
            let Some(rp) = resid(&start.with_params(&qp)) else {
                return start.with_params(&q);
            };
            jac.set_column(c, &((rp - &res) / step));
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for d in 0..q.len() {
                damped[(d, d)] += lambda * (jtj[(d, d)] + 1e-12);
            }
            let Some(delta) = damped.lu().solve(&(-&jtr)) else {
                break;
            };
            let qn: Vec<f64> = q.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let cand = start.with_params(&qn);
            let qn = cand.params();
            if let Some(rn) = resid(&cand) {
                let cn = rn.norm_squared();
                if cn < cost {
                    let rel = (cost - cn) / cost;
                    q = qn;
                    res = rn;
                    cost = cn;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = rel > 1e-14;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    start.with_params(&q)
}

/// Geometric approximation profile of `w` at `x0`: for each scale `r`, the
/// closest global solution `U` with `U(x0) = 0` in the adimensional C¹ norm,
/// and `λ(r) = ‖w − g0 U‖* / max{r³, g0^{1−σ} r^{2+σ}}` with `g0 = g(x0)`.
///
/// The catalog is ranked on a few ball nodes with early abandoning, and the
/// best `keep` members of each family are refined by least squares before
/// the final distance is taken over the whole ball.
pub fn gap_test(
    w: &ScalarField,
    g: &ScalarField,
    x0: &[f64],
    scales: &[f64],
    opts: &GapOptions,
) -> Result<GapProfile> {
    if w.grid.dims() != 2 || w.grid != g.grid {
        return Err(Error::GridMismatch(
            "gap test needs w and g on the same 2D grid".into(),
        ));
    }
    check_decreasing(scales)?;
    let g0 = g.at(x0);
    if g0 <= opts.tol_g {
        return Err(Error::ZeroCoefficient(g0));
    }
    let members = opts.catalog.members();
    let mut records = Vec::with_capacity(scales.len());
    for &r in scales {
        let ball = w.grid.ball_nodes(x0, r);
        if ball.len() < 16 {
            return Err(Error::InsufficientNodes {
                needed: 16,
                found: ball.len(),
            });
        }
        let probe = stride_subset(&ball, opts.prefilter_nodes);
        // Per family: (sample sup, member), sorted, at most `keep` long.
        let mut best: [Vec<(f64, CatalogMember)>; 5] = Default::default();
        for m in &members {
            let fam = &mut best[m.family()];
            let bound = if fam.len() == opts.keep {
                fam[opts.keep - 1].0
            } else {
                f64::INFINITY
            };
            let Ok(gs) = m.at_scale(r) else { continue };
            let mut sup: f64 = 0.0;
            for &k in &probe {
                let Ok(u) = u_at(&gs, &w.grid, k, x0) else {
                    sup = f64::INFINITY;
                    break;
                };
                sup = sup.max((w.values[k] - g0 * u).abs());
                if sup >= bound {
                    break;
                }
            }
            if sup < bound {
                let pos = fam.partition_point(|b| b.0 <= sup);
                fam.insert(pos, (sup, *m));
                fam.truncate(opts.keep);
            }
        }
        let refine_nodes = stride_subset(&ball, opts.refine_nodes);
        let mut record: Option<GapRecord> = None;
        let denom = (r * r * r).max(g0.powf(1.0 - opts.sigma) * r.powf(2.0 + opts.sigma));
        // Continuation in scale: the previous best member, seen from the
        // smaller ball, is usually off the catalog grid but close to optimal.
        let carried = records
            .last()
            .map(|prev: &GapRecord| prev.best.rescaled(prev.r / r));
        for m in best.iter().flatten().map(|b| b.1).chain(carried) {
            for cand in [m, refine_member(w, g0, x0, r, &refine_nodes, m)] {
                let Ok(gs) = cand.at_scale(r) else { continue };
                let distance = ball_residual(w, x0, r, |p| {
                    let z = C::new(p[0] - x0[0], p[1] - x0[1]);
                    let u = gs
                        .evaluate_u_closed(z)
                        .or_else(|_| gs.evaluate_u_closed(z + C::new(0.0, 1e-13)))
                        .unwrap_or(f64::NAN);
                    g0 * u
                })
                .c1;
                if distance.is_finite() && record.as_ref().is_none_or(|b| distance < b.distance) {
                    record = Some(GapRecord {
                        r,
                        lambda: distance / denom,
                        distance,
                        best: cand,
                    });
                }
            }
        }
        records.push(record.ok_or(Error::EmptySet)?);
    }
    Ok(GapProfile { g0, records })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaleReport {
    /// Harmonic cubic fitted at the largest scale of the window.
    pub q: Polynomial,
    /// `(r, sup_{B_r} |v − Q|)` over the window.
    pub sup: Vec<(f64, f64)>,
    /// `max_r sup_{B_r} |v − Q| / r⁴`.
    pub max_ratio: f64,
    /// `max_r sup_{B_r} |v − Q| / r³`.
    pub max_cubic_ratio: f64,
}

/// Fits a harmonic cubic `Q` to `v` at the largest scale in `(g0, 1)` and
/// reports how fast `v − Q` decays over the scales of that window.
pub fn check_rescale_bound(
    v: &ScalarField,
    x0: &[f64],
    g0: f64,
    scales: &[f64],
) -> Result<RescaleReport> {
    check_decreasing(scales)?;
    let window: Vec<f64> = scales
        .iter()
        .copied()
        .filter(|&r| r > g0 && r < 1.0)
        .collect();
    let Some(&top) = window.first() else {
        return Err(Error::EmptyScaleWindow { lower: g0 });
    };
    let q = fit_harmonic_cubic(v, x0, top)?.poly;
    let sup: Vec<(f64, f64)> = window
        .iter()
        .map(|&r| (r, ball_residual(v, x0, r, |p| q.eval(&p)).sup))
        .collect();
    let max_ratio = sup.iter().map(|&(r, s)| s / r.powi(4)).fold(0.0, f64::max);
    let max_cubic_ratio = sup.iter().map(|&(r, s)| s / r.powi(3)).fold(0.0, f64::max);
    Ok(RescaleReport {
        q,
        sup,
        max_ratio,
        max_cubic_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// First scale where the decay hypothesis fails; 0 when it never does.
    pub r0: f64,
    /// `(r, slack-corrected min diameter)` per scale scanned.
    pub profile: Vec<(f64, f64)>,
    pub node: usize,
}

/// Scans `scales` (decreasing) for `min_diam(contact ∩ B_r(x0)) ≤ λ r^{1+γ}`.
/// Measured widths have the mask thickness `2√2 h` subtracted, as in
/// [`crate::obstacle::classify_point`].
pub fn check_min_diam_decay(
    sol: &ObstacleSolution,
    x0: &[f64],
    gamma: f64,
    lambda: f64,
    scales: &[f64],
) -> Result<DecayReport> {
    check_decreasing(scales)?;
    let node = sol.nearest_fb_point(x0)?;
    let grid = sol.grid();
    let center = grid.point(node);
    let slack = default_slack(grid);
    let mut profile = Vec::with_capacity(scales.len());
    let mut r0 = 0.0;
    for &r in scales {
        let md = (masked_min_diameter(grid, &sol.contact_mask, &center, r) - slack).max(0.0);
        profile.push((r, md));
        if md > lambda * r.powf(1.0 + gamma) {
            r0 = r;
            break;
        }
    }
    Ok(DecayReport { r0, profile, node })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicGrowth {
    /// Quadratic fitted at the smallest scale with enough nodes.
    pub q: Polynomial,
    pub fit_scale: f64,
    /// `(r, sup_{B_r} |v − q| / r³)`.
    pub profile: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

/// `sup_{B_r} |v − q| / r³` over `scales`, with `q` the quadratic fit at the
/// smallest scale whose ball holds at least 3× the coefficient count.
pub fn cubic_growth_check(v: &ScalarField, x0: &[f64], scales: &[f64]) -> Result<CubicGrowth> {
    check_decreasing(scales)?;
    let mut fitted = None;
    for &r in scales.iter().rev() {
        match fit_polynomial(v, x0, 2, r) {
            Ok(fit) => {
                fitted = Some((r, fit.poly));
                break;
            }
            Err(Error::InsufficientNodes { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some((fit_scale, q)) = fitted else {
        let needed = 3 * monomials(v.grid.dims(), 2).len();
        return Err(Error::InsufficientNodes {
            needed,
            found: v.grid.ball_nodes(x0, scales[0]).len(),
        });
    };
    let profile: Vec<(f64, f64)> = scales
        .iter()
        .map(|&r| (r, ball_residual(v, x0, r, |p| q.eval(&p)).sup / r.powi(3)))
        .collect();
    let max_ratio = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(CubicGrowth {
        q,
        fit_scale,
        profile,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> Grid {
        Grid::cube(2, -1.0, 1.0, n).unwrap()
    }

    #[test]
    fn exact_quadratic_and_cubic() {
        let f = ScalarField::from_fn(grid2(41), |x, _| x * x / 2.0);
        let fit = fit_polynomial(&f, &[0.0, 0.0], 2, 0.5).unwrap();
        assert!(fit.residual_sup < 1e-12 && fit.adimensional_c1 < 1e-12);
        assert!((fit.poly.coefficient(2, 0) - 0.5).abs() < 1e-12);
        let f = ScalarField::from_fn(grid2(41), |x, y| x * x * x - y * x);
        assert!(
            fit_polynomial(&f, &[0.1, 0.2], 3, 0.5)
                .unwrap()
                .residual_sup
                < 1e-12
        );
    }

    #[test]
    fn too_few_nodes() {
        let f = ScalarField::from_fn(grid2(11), |x, _| x);
        assert!(matches!(
            fit_polynomial(&f, &[0.0, 0.0], 3, 0.2),
            Err(Error::InsufficientNodes { needed: 30, .. })
        ));
    }

    #[test]
    fn harmonic_fit_ignores_quartic() {
        // Re z⁴ is orthogonal to the harmonic cubics on a disk.
        let f = ScalarField::from_fn(grid2(201), |x, y| {
            x.powi(4) - 6.0 * x * x * y * y + y.powi(4)
        });
        let fit = fit_harmonic_cubic(&f, &[0.0, 0.0], 0.8).unwrap();
        assert!(
            fit.poly.coeffs.iter().all(|c| c.abs() < 1e-3),
            "{:?}",
            fit.poly.coeffs
        );
    }

    #[test]
    fn regression_on_a_line() {
        let (s, e) = regression_slope(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-14 && e < 1e-12);
    }

    #[test]
    fn mixed_third_difference_of_cubic() {
        let f = ScalarField::from_fn(grid2(21), |x, y| x * x * y);
        let d = third_differences(&f).unwrap();
        let k = f.grid.index(10, 10);
        assert!(d[0].values[k].abs() < 1e-9);
        assert!((d[1].values[k] - 2.0).abs() < 1e-9);
        assert!(d[2].values[k].abs() < 1e-9 && d[3].values[k].abs() < 1e-9);
    }

    #[test]
    fn catalog_size() {
        let c = Catalog::default();
        assert_eq!(c.members().len(), 36 * (2 + 20) + 36 * 20 * 20 * 21);
    }
}
