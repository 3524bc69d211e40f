//! Global solutions of `ΔU = χ{U>0}` in the plane through the origin, built
//! from Schwarz functions of their free boundaries.
//!
//! Conic kinds are stored in local coordinates where the free boundary is
//! `a²x² + y² = αx + βy`; world points are `e^{iθ}` times local points.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::obstacle::min_diameter;
use crate::polynomial::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GlobalKind {
    Ellipse,
    Parabola,
    HalfPlane,
    Strip,
    Line,
}

impl GlobalKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ellipse" => Ok(GlobalKind::Ellipse),
            "parabola" => Ok(GlobalKind::Parabola),
            "half-plane" => Ok(GlobalKind::HalfPlane),
            "strip" => Ok(GlobalKind::Strip),
            "line" => Ok(GlobalKind::Line),
            other => Err(Error::InvalidArgument(format!(
                "unknown global solution kind '{other}'"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GlobalKind::Ellipse => "ellipse",
            GlobalKind::Parabola => "parabola",
            GlobalKind::HalfPlane => "half-plane",
            GlobalKind::Strip => "strip",
            GlobalKind::Line => "line",
        }
    }

    pub fn is_conic(self) -> bool {
        matches!(self, GlobalKind::Ellipse | GlobalKind::Parabola)
    }
}

/// Which choice of `δ` and `p` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaCase {
    /// Line, strip or half-plane: `δ = 1`.
    Flat,
    /// `α > 2a²`: the contact set looks like a parabola in the unit ball.
    Parabolic,
    /// `α <= 2a²`: a whole ellipse of size `δ` near the origin.
    Elliptic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalParams {
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rotation: f64,
    /// Strip width.
    pub width: f64,
}

impl Default for GlobalParams {
    fn default() -> Self {
        GlobalParams {
            a: 0.0,
            alpha: 1.0,
            beta: 0.0,
            rotation: 0.0,
            width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution2D {
    pub kind: GlobalKind,
    pub params: GlobalParams,
    pub delta: f64,
    pub mu: f64,
    /// Distance from the origin to the leftmost tip (local frame).
    pub rho_hat: f64,
    pub case: DeltaCase,
    /// World-frame polynomial with `Δp = 1`.
    pub p: Polynomial,
    rot: C,
    zeta: C,
    /// Foci of the ellipse (`a < 1`) or the parabola focus in `focus1`.
    focus1: C,
    focus2: C,
}

/// Ellipses with `a` in this range use the closed-form antiderivative; outside
/// it the closed form loses digits to cancellation.
const CLOSED_FORM_A: (f64, f64) = (1e-2, 1.0 - 5e-5);

pub fn make_global(kind: GlobalKind, params: GlobalParams) -> Result<GlobalSolution2D> {
    let GlobalParams {
        a,
        alpha,
        beta,
        rotation,
        width,
    } = params;
    if !rotation.is_finite() {
        return Err(Error::InvalidArgument("rotation must be finite".into()));
    }
    if kind.is_conic() {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConic(format!(
                "alpha = {alpha} must be positive"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidConic("beta must be finite".into()));
        }
        match kind {
            GlobalKind::Ellipse if !(a > 0.0 && a <= 1.0) => {
                return Err(Error::InvalidConic(format!(
                    "ellipse needs a in (0, 1], got {a}"
                )));
            }
            GlobalKind::Parabola if a != 0.0 => {
                return Err(Error::InvalidConic(format!(
                    "parabola needs a = 0, got {a}"
                )));
            }
            _ => {}
        }
    }
    if kind == GlobalKind::Strip && !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "strip width {width} must be positive"
        )));
    }

    let zeta = C::new(alpha, beta);
    let (mut focus1, mut focus2) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    match kind {
        GlobalKind::Parabola => focus1 = zeta * zeta / (4.0 * alpha),
        GlobalKind::Ellipse if a < 1.0 => {
            let q = ((1.0 - a * a) * (alpha * alpha + a * a * beta * beta)).sqrt();
            // (α − √Q)/(2a²) without cancellation.
            let left = (alpha * alpha - (1.0 - a * a) * beta * beta) / (2.0 * (alpha + q));
            focus1 = C::new(left, beta / 2.0);
            focus2 = C::new((alpha + q) / (2.0 * a * a), beta / 2.0);
        }
        GlobalKind::Ellipse => {
            focus1 = zeta / 2.0;
            focus2 = focus1;
        }
        _ => {}
    }

    let (delta, mu, rho_hat, case, p_local) = delta_and_p_local(kind, a, alpha, beta, width);
    let p = p_local.rotated(rotation)?;
    Ok(GlobalSolution2D {
        kind,
        params,
        delta,
        mu,
        rho_hat,
        case,
        p,
        rot: C::from_polar(1.0, rotation),
        zeta,
        focus1,
        focus2,
    })
}

fn delta_and_p_local(
    kind: GlobalKind,
    a: f64,
    alpha: f64,
    beta: f64,
    width: f64,
) -> (f64, f64, f64, DeltaCase, Polynomial) {
    let half_x2 = Polynomial::quadratic([[0.5, 0.0], [0.0, 0.0]], [0.0; 2], 0.0);
    match kind {
        GlobalKind::HalfPlane => (1.0, 0.5, 0.0, DeltaCase::Flat, half_x2),
        GlobalKind::Strip => (1.0, width.min(1.0) / 2.0, 0.0, DeltaCase::Flat, half_x2),
        GlobalKind::Line => (
            1.0,
            0.0,
            0.0,
            DeltaCase::Flat,
            Polynomial::quadratic([[0.0, 0.0], [0.0, 0.5]], [0.0; 2], 0.0),
        ),
        GlobalKind::Ellipse | GlobalKind::Parabola => {
            let m = if a == 0.0 {
                1.0
            } else {
                (alpha / (2.0 * a * a)).min(1.0)
            };
            let mu2 = beta * beta / 4.0 + alpha * m - a * a * m * m;
            let rho_hat = beta * beta
                / (2.0 * alpha)
                / ((1.0 + a * a * beta * beta / (alpha * alpha)).sqrt() + 1.0);
            let k = (1.0 - a) / (1.0 + a);
            if alpha > 2.0 * a * a {
                let delta = mu2.max(rho_hat / 4.0);
                let p = Polynomial::quadratic(
                    [[a / (2.0 * (1.0 + a)), 0.0], [0.0, 1.0 / (2.0 * (1.0 + a))]],
                    [0.0; 2],
                    0.0,
                );
                (delta, mu2.sqrt(), rho_hat, DeltaCase::Parabolic, p)
            } else {
                let mu = 0.5 * (beta * beta + alpha * alpha / (a * a)).sqrt();
                let (x0, y0) = (alpha / (2.0 * a * a), beta / 2.0);
                let (cx, cy) = ((1.0 - k) / 4.0, (1.0 + k) / 4.0);
                // cx (x − x0)² + cy (y − y0)², shifted so that p(0) = 0.
                let p = Polynomial::quadratic(
                    [[cx, 0.0], [0.0, cy]],
                    [-2.0 * cx * x0, -2.0 * cy * y0],
                    0.0,
                );
                (mu, mu, rho_hat, DeltaCase::Elliptic, p)
            }
        }
    }
}

fn sqrt_p(z: C) -> C {
    z.sqrt()
}

impl GlobalSolution2D {
    fn to_local(&self, z: C) -> C {
        z * self.rot.conj()
    }

    fn from_local(&self, z: C) -> C {
        z * self.rot
    }

    /// Slope of the asymptotic linear part of the Schwarz function.
    pub fn asymptotic_slope(&self) -> f64 {
        (1.0 - self.params.a) / (1.0 + self.params.a)
    }

    fn conic_value(&self, zl: C) -> f64 {
        let GlobalParams { a, alpha, beta, .. } = self.params;
        a * a * zl.re * zl.re + zl.im * zl.im - alpha * zl.re - beta * zl.im
    }

    /// Whether a world point lies in the closed contact set `{U = 0}`.
    pub fn in_contact(&self, z: C) -> bool {
        let zl = self.to_local(z);
        match self.kind {
            GlobalKind::HalfPlane => zl.re <= 0.0,
            GlobalKind::Line => zl.im == 0.0,
            GlobalKind::Strip => zl.re <= 0.0 && zl.re >= -self.params.width,
            _ => self.conic_value(zl) <= 0.0,
        }
    }

    fn on_cut(&self, zl: C) -> bool {
        let tol = 1e-14 * (1.0 + zl.norm());
        let on_axis = (zl.im - self.params.beta / 2.0).abs() <= tol;
        match self.kind {
            GlobalKind::Parabola => on_axis && zl.re >= self.focus1.re - tol,
            GlobalKind::Ellipse => {
                on_axis && zl.re >= self.focus1.re - tol && zl.re <= self.focus2.re + tol
            }
            _ => false,
        }
    }

    fn radical(&self, zl: C) -> C {
        let a = self.params.a;
        if a == 0.0 {
            -2.0 * self.params.alpha.sqrt() * sqrt_p(self.focus1 - zl)
        } else if a == 1.0 {
            2.0 * (zl - self.focus1)
        } else {
            2.0 * a * sqrt_p(zl - self.focus1) * sqrt_p(zl - self.focus2)
        }
    }

    fn schwarz_local(&self, zl: C) -> Result<C> {
        match self.kind {
            GlobalKind::HalfPlane => return Ok(-zl),
            GlobalKind::Line => return Ok(zl),
            GlobalKind::Strip => {
                let w = self.params.width;
                return Ok(if zl.re >= -w / 2.0 {
                    -zl
                } else {
                    -zl - 2.0 * w
                });
            }
            _ => {}
        }
        if self.on_cut(zl) {
            return Err(Error::BranchCut);
        }
        let a = self.params.a;
        let r = self.radical(zl);
        let lin = (1.0 + a * a) * zl - self.zeta;
        let den = lin + r;
        let rel_den = den.norm() / (lin.norm() + r.norm()).max(f64::MIN_POSITIVE);
        let rel_alt = (1.0 - a * a) / (1.0 + a * a);
        if rel_den >= rel_alt {
            if den.norm() == 0.0 {
                return Err(Error::BranchCut);
            }
            Ok(((1.0 - a * a) * zl * zl + 2.0 * self.zeta.conj() * zl) / den)
        } else {
            Ok((lin - r) / (1.0 - a * a))
        }
    }

    /// Schwarz function of the free boundary at a world point.
    pub fn schwarz(&self, z: C) -> Result<C> {
        let zl = self.to_local(z);
        Ok(self.rot.conj() * self.schwarz_local(zl)?)
    }

    /// `(U_x, U_y)`; zero on the contact set.
    pub fn gradient_u(&self, z: C) -> Result<[f64; 2]> {
        if self.in_contact(z) {
            return Ok([0.0, 0.0]);
        }
        let g = (z.conj() - self.schwarz(z)?) / 2.0;
        Ok([g.re, -g.im])
    }

    fn flat_u(&self, zl: C) -> f64 {
        match self.kind {
            GlobalKind::HalfPlane => zl.re.max(0.0).powi(2) / 2.0,
            GlobalKind::Line => zl.im * zl.im / 2.0,
            GlobalKind::Strip => {
                let w = self.params.width;
                if zl.re > 0.0 {
                    zl.re * zl.re / 2.0
                } else if zl.re < -w {
                    (zl.re + w).powi(2) / 2.0
                } else {
                    0.0
                }
            }
            _ => unreachable!(),
        }
    }

    /// Antiderivative of the local Schwarz function, real part only matters.
    fn schwarz_antiderivative(&self, zl: C) -> Option<C> {
        let a = self.params.a;
        let zeta = self.zeta;
        if a == 0.0 {
            let s = sqrt_p(self.focus1 - zl);
            let int_r = 4.0 / 3.0 * self.params.alpha.sqrt() * s * s * s;
            Some(zl * zl / 2.0 - zeta * zl - int_r)
        } else if a == 1.0 {
            Some(zeta.conj() * zl / 2.0 + zeta.norm_sqr() / 4.0 * (zl - self.focus1).ln())
        } else if (CLOSED_FORM_A.0..=CLOSED_FORM_A.1).contains(&a) {
            let zc = (self.focus1 + self.focus2) / 2.0;
            let c = (self.focus2.re - self.focus1.re) / 2.0;
            let w = zl - zc;
            let s = sqrt_p(zl - self.focus1) * sqrt_p(zl - self.focus2);
            let int_r = a * (w * s - c * c * (w + s).ln());
            Some(((1.0 + a * a) * zl * zl / 2.0 - zeta * zl - int_r) / (1.0 - a * a))
        } else {
            None
        }
    }

    /// `U` from the closed-form antiderivative of the Schwarz function,
    /// normalized by `U(0) = 0`. Falls back to [`Self::evaluate_u`] where the
    /// closed form is ill-conditioned.
    pub fn evaluate_u_closed(&self, z: C) -> Result<f64> {
        let zl = self.to_local(z);
        if !self.kind.is_conic() {
            return Ok(self.flat_u(zl));
        }
        if self.conic_value(zl) <= 0.0 {
            return Ok(0.0);
        }
        let (Some(gz), Some(g0)) = (
            self.schwarz_antiderivative(zl),
            self.schwarz_antiderivative(C::new(0.0, 0.0)),
        ) else {
            return self.evaluate_u(z);
        };
        Ok((zl.norm_sqr() / 4.0 - 0.5 * (gz.re - g0.re)).max(0.0))
    }

    /// Nearest point of the free boundary to a local point outside the
    /// contact set.
    fn nearest_boundary_local(&self, zl: C) -> Result<C> {
        let GlobalParams { a, alpha, beta, .. } = self.params;
        if a == 0.0 {
            // (y − β/2)² = α (x + β²/(4α))
            let (x0, y0) = (zl.re + beta * beta / (4.0 * alpha), zl.im - beta / 2.0);
            let sign = if y0 < 0.0 { -1.0 } else { 1.0 };
            let yq = y0.abs();
            let c1 = 1.0 - 2.0 * x0 / alpha;
            let f = |y: f64| 2.0 * y * y * y / (alpha * alpha) + c1 * y - yq;
            let df = |y: f64| 6.0 * y * y / (alpha * alpha) + c1;
            let mut y = yq + (alpha * x0.abs()).sqrt() + 1.0;
            for _ in 0..200 {
                let step = f(y) / df(y);
                y -= step;
                if !(step.abs() > 1e-16 * (1.0 + y.abs())) {
                    break;
                }
            }
            if !y.is_finite() || y < -1e-12 {
                return Err(Error::PathBlocked);
            }
            let y = y.max(0.0) * sign;
            return Ok(C::new(
                y * y / alpha - beta * beta / (4.0 * alpha),
                y + beta / 2.0,
            ));
        }
        let center = C::new(alpha / (2.0 * a * a), beta / 2.0);
        let r = 0.5 * (beta * beta + alpha * alpha / (a * a)).sqrt();
        let (e0, e1) = (r / a, r);
        let d = zl - center;
        let (q0, q1) = nearest_on_ellipse(e0, e1, d.re.abs(), d.im.abs());
        Ok(center + C::new(q0.copysign(d.re), q1.copysign(d.im)))
    }

    /// `U` by integrating `∇U` along the segment from the nearest free-boundary
    /// point, with an `steps`-point composite midpoint rule.
    pub fn evaluate_u_with(&self, z: C, steps: usize) -> Result<f64> {
        let zl = self.to_local(z);
        if !self.kind.is_conic() {
            return Ok(self.flat_u(zl));
        }
        if self.conic_value(zl) <= 0.0 {
            return Ok(0.0);
        }
        let b = self.from_local(self.nearest_boundary_local(zl)?);
        let d = z - b;
        let mut sum = 0.0;
        for k in 0..steps {
            let t = (k as f64 + 0.5) / steps as f64;
            let g = self.gradient_u(b + d * t)?;
            sum += g[0] * d.re + g[1] * d.im;
        }
        Ok((sum / steps as f64).max(0.0))
    }

    /// [`Self::evaluate_u_with`] using 200 steps.
    pub fn evaluate_u(&self, z: C) -> Result<f64> {
        self.evaluate_u_with(z, 200)
    }
}

/// Closest point on the ellipse `x²/e0² + y²/e1² = 1`, `e0 >= e1`, to a point
/// in the closed first quadrant (robust bisection on the Lagrange parameter).
fn nearest_on_ellipse(e0: f64, e1: f64, y0: f64, y1: f64) -> (f64, f64) {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return (y0, y1);
            }
            let r0 = (e0 / e1).powi(2);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = if g < 0.0 {
                0.0
            } else {
                (n0 * n0 + z1 * z1).sqrt() - 1.0
            };
            let mut s = 0.0;
            for _ in 0..1100 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let ratio0 = n0 / (s + r0);
                let ratio1 = z1 / (s + 1.0);
                let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
                if gs > 0.0 {
                    s0 = s;
                } else if gs < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            (r0 * y0 / (s + r0), y1 / (s + 1.0))
        } else {
            (0.0, e1)
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            (e0 * xde0, e1 * (1.0 - xde0 * xde0).max(0.0).sqrt())
        } else {
            (e0, 0.0)
        }
    }
}

/// Free-boundary samples: solves the local conic for `y` at `n` abscissae
/// spread over the part of the curve inside `|x| <= extent`, and rotates them
/// to the world frame.
pub fn boundary_samples(gs: &GlobalSolution2D, n: usize, extent: f64) -> Vec<C> {
    let GlobalParams { a, alpha, beta, .. } = gs.params;
    match gs.kind {
        GlobalKind::HalfPlane => (0..n)
            .map(|k| {
                gs.from_local(C::new(
                    0.0,
                    -extent + 2.0 * extent * k as f64 / (n - 1).max(1) as f64,
                ))
            })
            .collect(),
        GlobalKind::Line | GlobalKind::Strip => (0..n)
            .map(|k| {
                gs.from_local(C::new(
                    -extent + 2.0 * extent * k as f64 / (n - 1).max(1) as f64,
                    0.0,
                ))
            })
            .collect(),
        _ => {
            let xmin = -gs.rho_hat;
            let xmax = if a > 0.0 {
                let right = alpha / (2.0 * a * a)
                    + 0.5 * (beta * beta + alpha * alpha / (a * a)).sqrt() / a;
                right.min(extent)
            } else {
                extent
            };
            let half = n / 2;
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let upper = k < half;
                let idx = if upper { k } else { k - half };
                let count = if upper { half } else { n - half };
                let t = (idx as f64 + 0.5) / count as f64;
                let x = xmin + (xmax - xmin) * t;
                let disc = (beta * beta - 4.0 * (a * a * x * x - alpha * x)).max(0.0);
                let y = if upper {
                    (beta + disc.sqrt()) / 2.0
                } else {
                    (beta - disc.sqrt()) / 2.0
                };
                out.push(gs.from_local(C::new(x, y)));
            }
            out
        }
    }
}

/// Largest `|S(z) − z̄|` over `n` free-boundary samples.
pub fn schwarz_boundary_residual(gs: &GlobalSolution2D, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in boundary_samples(gs, n, 1.0) {
        let s = gs.schwarz(z)?;
        worst = worst.max((s - z.conj()).norm());
    }
    Ok(worst)
}

/// Worst deviation from the target over lattice points `z = step·(i, j)`,
/// `|i|, |j| <= n`, whose whole 3×3 stencil of spacing `h` lies in `{U>0}`.
/// Returns `(max error, stencils used)`.
fn stencil_check(
    gs: &GlobalSolution2D,
    h: f64,
    step: f64,
    n: i64,
    f: impl Fn(&[C; 9]) -> Result<Option<f64>>,
) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for i in -n..=n {
        for j in -n..=n {
            let z = C::new(i as f64 * step, j as f64 * step);
            let st: [C; 9] =
                std::array::from_fn(|k| z + C::new((k / 3) as f64 - 1.0, (k % 3) as f64 - 1.0) * h);
            if st
                .iter()
                .any(|&s| gs.in_contact(s) || gs.on_cut(gs.to_local(s)))
            {
                continue;
            }
            if let Some(e) = f(&st)? {
                worst = worst.max(e);
                used += 1;
            }
        }
    }
    Ok((worst, used))
}

/// `|Δ_h U − 1|` for the reconstructed `U` on a lattice in `{U>0}`, with the
/// compact 9-point Laplacian. Since `Δ²U = 0` where `ΔU = 1`, its `h²` error
/// term vanishes there and what remains is `O(h⁴)`; the 5-point stencil would
/// instead carry `h²/12·(U_xxxx + U_yyyy)`, which is large beside a sharp tip.
pub fn reconstruction_laplacian_error(
    gs: &GlobalSolution2D,
    h: f64,
    step: f64,
    n: i64,
) -> Result<(f64, usize)> {
    stencil_check(gs, h, step, n, |st| {
        let mut u = [0.0; 9];
        for (v, &s) in u.iter_mut().zip(st) {
            *v = gs.evaluate_u(s)?;
        }
        let edges = u[1] + u[3] + u[5] + u[7];
        let corners = u[0] + u[2] + u[6] + u[8];
        Ok(Some(
            ((4.0 * edges + corners - 20.0 * u[4]) / (6.0 * h * h) - 1.0).abs(),
        ))
    })
}

/// Discrete `|∂S/∂z̄|` on a lattice in `{U>0}`: the 8-point trapezoid rule
/// for `(1/2iπh²)∮ S dz` over the circle of radius `h`, which reduces to
/// `Σ S(z + h e_k) e_k / 8h`. Exact (zero) for analytic polynomials of degree
/// at most 6 and equal to 1 for `S = z̄`.
pub fn cauchy_riemann_residual(
    gs: &GlobalSolution2D,
    h: f64,
    step: f64,
    n: i64,
) -> Result<(f64, usize)> {
    stencil_check(gs, h, step, n, |st| {
        let z = st[4];
        let mut acc = C::new(0.0, 0.0);
        for k in 0..8 {
            let e = C::from_polar(1.0, std::f64::consts::FRAC_PI_4 * k as f64);
            let w = z + e * h;
            if gs.in_contact(w) || gs.on_cut(gs.to_local(w)) {
                return Ok(None);
            }
            acc += gs.schwarz(w)? * e;
        }
        Ok(Some((acc / (8.0 * h)).norm()))
    })
}

/// Deterministic sample points of the closed disk `B_r`: about `target`
/// points on a square lattice plus the boundary circle.
pub fn disk_samples(r: f64, target: usize) -> Vec<C> {
    let side = ((target as f64) * 4.0 / std::f64::consts::PI).sqrt().ceil() as i64;
    let h = 2.0 * r / side as f64;
    let mut out = Vec::with_capacity(target + side as usize * 4);
    for i in 0..=side {
        for j in 0..=side {
            let z = C::new(-r + i as f64 * h, -r + j as f64 * h);
            if z.norm() <= r {
                out.push(z);
            }
        }
    }
    let ring = (4 * side) as usize;
    for k in 0..ring {
        out.push(C::from_polar(
            r,
            std::f64::consts::TAU * k as f64 / ring as f64,
        ));
    }
    out
}

/// Per scale `r`: `sup_{B_r} |D(U − p)| / √(δ r)`; returns the largest ratio
/// and the per-scale profile. Points on the branch cut are nudged.
pub fn verify_up(
    gs: &GlobalSolution2D,
    r_grid: &[f64],
    samples_per_ball: usize,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut profile = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if r < gs.delta * (1.0 - 1e-12) || r > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "scale {r} outside [δ, 1] = [{}, 1]",
                gs.delta
            )));
        }
        let mut sup: f64 = 0.0;
        for z in disk_samples(r, samples_per_ball) {
            let du = match gs.gradient_u(z) {
                Ok(g) => g,
                Err(Error::BranchCut) => gs.gradient_u(z + C::new(0.0, 1e-12 * r))?,
                Err(e) => return Err(e),
            };
            let dp = gs.p.gradient(&[z.re, z.im]);
            sup = sup.max(((du[0] - dp[0]).powi(2) + (du[1] - dp[1]).powi(2)).sqrt());
        }
        profile.push((r, sup / (gs.delta * r).sqrt()));
    }
    let max = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((max, profile))
}

/// Which "inside B_δ" alternative holds for an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsideReport {
    /// `min_diam({U=0} ∩ B_δ)`.
    pub contact_min_diam: f64,
    /// Number of connected components of `{U>0} ∩ B_δ`.
    pub components: usize,
    /// Hausdorff distance between the boundaries of the two components
    /// inside `B_δ` (0 unless there are exactly two).
    pub separation: f64,
    /// `min_diam(B_δ \ Ω_i)`, smallest over the two components.
    pub complement_min_diam: f64,
    /// "min-diameter", "two-components" or "none".
    pub case: String,
}

/// Rasterizes `B_δ` with `n × n` cells and checks both alternatives with the
/// constant `c0`.
pub fn inside_delta_check(gs: &GlobalSolution2D, c0: f64, n: usize) -> InsideReport {
    let d = gs.delta;
    let h = 2.0 * d / (n - 1) as f64;
    let idx = |i: usize, j: usize| j * n + i;
    let pt = |i: usize, j: usize| C::new(-d + i as f64 * h, -d + j as f64 * h);
    let inside: Vec<bool> = (0..n * n).map(|k| pt(k % n, k / n).norm() <= d).collect();
    let contact: Vec<bool> = (0..n * n)
        .map(|k| inside[k] && gs.in_contact(pt(k % n, k / n)))
        .collect();

    let contact_pts: Vec<[f64; 2]> = (0..n * n)
        .filter(|&k| contact[k])
        .map(|k| {
            let z = pt(k % n, k / n);
            [z.re, z.im]
        })
        .collect();
    let contact_min_diam = min_diameter(&contact_pts).unwrap_or(0.0);

    // Components of the positive phase (4-connectivity).
    let mut label = vec![usize::MAX; n * n];
    let mut components = 0;
    for start in 0..n * n {
        if !inside[start] || contact[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = components;
        while let Some(k) = stack.pop() {
            let (i, j) = (k % n, k / n);
            let mut push = |ii: usize, jj: usize| {
                let kk = idx(ii, jj);
                if inside[kk] && !contact[kk] && label[kk] == usize::MAX {
                    label[kk] = components;
                    stack.push(kk);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < n {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < n {
                push(i, j + 1);
            }
        }
        components += 1;
    }

    let mut separation = 0.0;
    let mut complement_min_diam = 0.0;
    if components == 2 {
        // Boundary of each component inside B_δ: its cells adjacent to contact.
        let boundary = |c: usize| -> Vec<C> {
            (0..n * n)
                .filter(|&k| {
                    label[k] == c && {
                        let (i, j) = (k % n, k / n);
                        [
                            (i.wrapping_sub(1), j),
                            (i + 1, j),
                            (i, j.wrapping_sub(1)),
                            (i, j + 1),
                        ]
                        .iter()
                        .any(|&(ii, jj)| ii < n && jj < n && contact[idx(ii, jj)])
                    }
                })
                .map(|k| pt(k % n, k / n))
                .collect()
        };
        let (b0, b1) = (boundary(0), boundary(1));
        let directed = |p: &[C], q: &[C]| {
            p.iter()
                .map(|x| {
                    q.iter()
                        .map(|y| (x - y).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        if !b0.is_empty() && !b1.is_empty() {
            separation = directed(&b0, &b1).max(directed(&b1, &b0));
        }
        complement_min_diam = (0..2)
            .map(|c| {
                let pts: Vec<[f64; 2]> = (0..n * n)
                    .filter(|&k| inside[k] && label[k] != c)
                    .map(|k| {
                        let z = pt(k % n, k / n);
                        [z.re, z.im]
                    })
                    .collect();
                min_diameter(&pts).unwrap_or(0.0)
            })
            .fold(f64::INFINITY, f64::min);
    }

    let case = if contact_min_diam >= d / c0 {
        "min-diameter"
    } else if components == 2
        && separation >= gs.mu * d.sqrt() / c0
        && complement_min_diam >= d / c0
    {
        "two-components"
    } else {
        "none"
    };
    InsideReport {
        contact_min_diam,
        components,
        separation,
        complement_min_diam,
        case: case.to_string(),
    }
}

/// Deterministic sweep of conic instances satisfying `μ² < 1/4`.
/// `refine = 1` gives 50 instances; each refinement doubles the resolution
/// of every parameter axis.
pub fn parameter_sweep(refine: usize) -> Vec<GlobalSolution2D> {
    let na = 5 * refine;
    let nal = 5 * refine;
    let nb = 2 * refine;
    let mut out = Vec::with_capacity(na * nal * nb);
    for ia in 0..na {
        let a = ia as f64 / (na - 1) as f64;
        for ial in 0..nal {
            let t = ial as f64 / (nal - 1) as f64;
            let alpha = 0.01 * (20f64).powf(t);
            for ib in 0..nb {
                let beta = 0.05 + 0.3 * ib as f64 / (nb - 1).max(1) as f64;
                let kind = if a == 0.0 {
                    GlobalKind::Parabola
                } else {
                    GlobalKind::Ellipse
                };
                let rotation = 0.37 * (ia + ial + ib) as f64;
                if let Ok(gs) = make_global(
                    kind,
                    GlobalParams {
                        a,
                        alpha,
                        beta,
                        rotation,
                        width: 1.0,
                    },
                ) {
                    out.push(gs);
                }
            }
        }
    }
    out
}

/// Dyadic scales `1, 1/2, …` down to (and including the first below) `δ`,
/// clipped to `[δ, 1]`.
pub fn dyadic_window(delta: f64) -> Vec<f64> {
    let mut r = 1.0;
    let mut out = Vec::new();
    while r > delta {
        out.push(r);
        r /= 2.0;
    }
    if out.last().is_none_or(|&last| last > delta) {
        out.push(delta);
    }
    out
}
