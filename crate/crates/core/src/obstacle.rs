//! Scalar obstacle problem `Δw = g χ{w>0}`, `w >= 0`, solved by projected
//! SOR with red-black ordering, plus contact-set geometry.

use crate::error::{Error, Result};
use crate::fields::{laplacian_at, Grid, ScalarField};

/// Fixed-value nodes. Every grid-boundary node must be fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dirichlet {
    pub fixed: Vec<bool>,
    pub values: Vec<f64>,
}

impl Dirichlet {
    /// Fixes the outer ring of the grid to `f(x, y)`.
    pub fn boundary_ring(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_predicate(grid, |k, _, _| grid.is_boundary(k), f)
    }

    /// Fixes every node for which `fixed(k, x, y)` holds (plus the outer
    /// ring) to `f(x, y)`.
    pub fn from_predicate(
        grid: &Grid,
        fixed: impl Fn(usize, f64, f64) -> bool,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut mask = vec![false; grid.len()];
        let mut values = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            let p = grid.point(k);
            if grid.is_boundary(k) || fixed(k, p[0], p[1]) {
                mask[k] = true;
                values[k] = f(p[0], p[1]);
            }
        }
        Dirichlet {
            fixed: mask,
            values,
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if self.fixed.len() != grid.len() || self.values.len() != grid.len() {
            return Err(Error::GridMismatch("boundary data size".into()));
        }
        if let Some(k) = (0..grid.len()).find(|&k| grid.is_boundary(k) && !self.fixed[k]) {
            return Err(Error::InvalidArgument(format!(
                "grid-boundary node {k} is not fixed"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in (0, 2).
    pub omega: f64,
}

impl Default for SorOptions {
    fn default() -> Self {
        SorOptions {
            tol: 1e-6,
            max_iter: 200_000,
            omega: 1.5,
        }
    }
}

impl SorOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "relaxation {} outside (0, 2)",
                self.omega
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSolution {
    pub w: ScalarField,
    pub contact_mask: Vec<bool>,
    pub fb_points: Vec<usize>,
    /// Largest complementarity violation `min(w, |Δ_h w - g|)` over free nodes.
    pub residual: f64,
    pub iterations: usize,
    /// False when `max_iter` was reached; `w` is then the last iterate.
    pub converged: bool,
    pub last_change: f64,
}

impl ObstacleSolution {
    /// Wraps an already known field (for example a manufactured solution),
    /// with contact threshold `eps_fb`.
    pub fn from_field(w: ScalarField, eps_fb: f64) -> Self {
        let (contact_mask, fb_points) = contact_set(&w, eps_fb);
        ObstacleSolution {
            w,
            contact_mask,
            fb_points,
            residual: 0.0,
            iterations: 0,
            converged: true,
            last_change: 0.0,
        }
    }

    /// Turns an unconverged solve into `Error::NonConvergence`.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                last_change: self.last_change,
            })
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.w.grid
    }

    /// Free-boundary node nearest to `x0`, if one lies within `2h`.
    pub fn nearest_fb_point(&self, x0: &[f64]) -> Result<usize> {
        let g = self.grid();
        let best = self
            .fb_points
            .iter()
            .map(|&k| (k, dist2(&g.point(k), x0, g.dims())))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((k, d2)) if d2.sqrt() <= 2.0 * g.h() * (1.0 + 1e-9) => Ok(k),
            _ => Err(Error::NotFreeBoundaryPoint),
        }
    }
}

fn dist2(p: &[f64; 2], q: &[f64], dims: usize) -> f64 {
    let dx = p[0] - q[0];
    let dy = if dims == 2 { p[1] - q[1] } else { 0.0 };
    dx * dx + dy * dy
}

/// Red-black SOR sweep over free nodes; returns the largest nodal change.
/// With `clamp`, each update is projected onto `w >= 0`.
fn sor_sweep(
    grid: &Grid,
    w: &mut [f64],
    rhs: &[f64],
    fixed: &[bool],
    omega: f64,
    clamp: bool,
) -> f64 {
    let h2 = grid.h() * grid.h();
    let nx = grid.nx();
    let two_d = 2.0 * grid.dims() as f64;
    let mut max_change: f64 = 0.0;
    for color in 0..2 {
        for k in 0..grid.len() {
            if fixed[k] {
                continue;
            }
            let (i, j) = grid.ij(k);
            if (i + j) % 2 != color {
                continue;
            }
            let mut s = w[k - 1] + w[k + 1];
            if grid.dims() == 2 {
                s += w[k - nx] + w[k + nx];
            }
            let gs = (s - h2 * rhs[k]) / two_d;
            let mut new = w[k] + omega * (gs - w[k]);
            if clamp && new < 0.0 {
                new = 0.0;
            }
            max_change = max_change.max((new - w[k]).abs());
            w[k] = new;
        }
    }
    max_change
}

fn complementarity_residual(w: &ScalarField, g: &ScalarField, fixed: &[bool]) -> f64 {
    (0..w.grid.len())
        .filter(|&k| !fixed[k])
        .map(|k| {
            let r = (laplacian_at(w, k) - g.values[k]).abs();
            w.values[k].min(r)
        })
        .fold(0.0, f64::max)
}

/// Projected SOR for `Δw = g χ{w>0}`, `w >= 0`, with Dirichlet data.
///
/// Stops once the largest nodal change in a sweep is at most `tol * h^2` and
/// the complementarity residual is at most `tol`. The initial iterate is the
/// Dirichlet data at fixed nodes and `max(data, 0)`-free zero elsewhere.
pub fn solve_obstacle(
    g: &ScalarField,
    dirichlet: &Dirichlet,
    opts: &SorOptions,
) -> Result<ObstacleSolution> {
    solve_obstacle_from(g, dirichlet, opts, None)
}

/// As [`solve_obstacle`], starting from `initial` at the free nodes.
pub fn solve_obstacle_from(
    g: &ScalarField,
    dirichlet: &Dirichlet,
    opts: &SorOptions,
    initial: Option<&ScalarField>,
) -> Result<ObstacleSolution> {
    opts.validate()?;
    let grid = &g.grid;
    if grid.n().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall {
            needed: 3,
            got: *grid.n().iter().min().unwrap(),
        });
    }
    dirichlet.validate(grid)?;
    if let Some(node) = g.values.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeSource { node });
    }
    if let Some(node) = (0..grid.len()).find(|&k| dirichlet.fixed[k] && dirichlet.values[k] < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "negative boundary value at node {node}"
        )));
    }
    let mut w: Vec<f64> = match initial {
        Some(init) => {
            if init.grid != *grid {
                return Err(Error::GridMismatch("initial iterate".into()));
            }
            init.values.iter().map(|v| v.max(0.0)).collect()
        }
        None => vec![0.0; grid.len()],
    };
    for k in 0..grid.len() {
        if dirichlet.fixed[k] {
            w[k] = dirichlet.values[k];
        }
    }
    let threshold = opts.tol * grid.h() * grid.h();
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        last_change = sor_sweep(grid, &mut w, &g.values, &dirichlet.fixed, opts.omega, true);
        iterations += 1;
        if last_change <= threshold {
            let field = ScalarField {
                grid: grid.clone(),
                values: w.clone(),
            };
            residual = complementarity_residual(&field, g, &dirichlet.fixed);
            if residual <= opts.tol {
                converged = true;
                break;
            }
        }
    }
    let w = ScalarField {
        grid: grid.clone(),
        values: w,
    };
    if !converged {
        residual = complementarity_residual(&w, g, &dirichlet.fixed);
    }
    let eps_fb = grid.h() * grid.h();
    let (contact_mask, fb_points) = contact_set(&w, eps_fb);
    Ok(ObstacleSolution {
        w,
        contact_mask,
        fb_points,
        residual,
        iterations,
        converged,
        last_change,
    })
}

/// Unconstrained SOR for `Δφ = rhs` at free nodes, `φ` fixed elsewhere.
pub fn solve_poisson(
    rhs: &ScalarField,
    dirichlet: &Dirichlet,
    opts: &SorOptions,
) -> Result<(ScalarField, usize)> {
    solve_poisson_from(rhs, dirichlet, opts, 0.0)
}

/// As [`solve_poisson`], with free nodes initialized to `start`.
pub fn solve_poisson_from(
    rhs: &ScalarField,
    dirichlet: &Dirichlet,
    opts: &SorOptions,
    start: f64,
) -> Result<(ScalarField, usize)> {
    opts.validate()?;
    let grid = &rhs.grid;
    dirichlet.validate(grid)?;
    let mut phi: Vec<f64> = (0..grid.len())
        .map(|k| {
            if dirichlet.fixed[k] {
                dirichlet.values[k]
            } else {
                start
            }
        })
        .collect();
    let threshold = opts.tol * grid.h() * grid.h();
    for it in 1..=opts.max_iter {
        let change = sor_sweep(
            grid,
            &mut phi,
            &rhs.values,
            &dirichlet.fixed,
            opts.omega,
            false,
        );
        if change <= threshold {
            return Ok((
                ScalarField {
                    grid: grid.clone(),
                    values: phi,
                },
                it,
            ));
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_change: f64::NAN,
    })
}

/// Over-relaxation factor that is optimal for the model Poisson problem with
/// `n` nodes across the longest axis.
pub fn optimal_omega(n: usize) -> f64 {
    let s = (std::f64::consts::PI / (n.max(3) - 1) as f64).sin();
    2.0 / (1.0 + s)
}

/// Contact mask `{w <= eps_fb}` and the mask nodes that have a non-mask
/// 4-neighbor.
pub fn contact_set(w: &ScalarField, eps_fb: f64) -> (Vec<bool>, Vec<usize>) {
    let grid = &w.grid;
    let mask: Vec<bool> = w.values.iter().map(|&v| v <= eps_fb).collect();
    let fb = (0..grid.len())
        .filter(|&k| mask[k] && grid.neighbors(k).any(|n| !mask[n]))
        .collect();
    (mask, fb)
}

/// Width of the narrowest strip containing the points, sampled over 360
/// directions in `[0, π)`.
pub fn min_diameter(points: &[[f64; 2]]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best = f64::INFINITY;
    for k in 0..360 {
        let t = k as f64 * std::f64::consts::PI / 360.0;
        let (s, c) = t.sin_cos();
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let d = c * p[0] + s * p[1];
                (lo.min(d), hi.max(d))
            });
        best = best.min(hi - lo);
    }
    Ok(best)
}

/// Minimal diameter of `mask ∩ B_r(x0)`; 0 when the intersection is empty.
pub fn masked_min_diameter(grid: &Grid, mask: &[bool], x0: &[f64], r: f64) -> f64 {
    let pts: Vec<[f64; 2]> = grid
        .ball_nodes(x0, r)
        .into_iter()
        .filter(|&k| mask[k])
        .map(|k| grid.point(k))
        .collect();
    min_diameter(&pts).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PointClass {
    Regular,
    Singular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: PointClass,
    /// Smallest tested scale whose width ratio reaches `tau`; `None` encodes 0.
    pub r0: Option<f64>,
    /// `(r, ratio)` per tested scale, in the order given.
    pub profile: Vec<(f64, f64)>,
    /// Free-boundary node the scan was centered on.
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol_g: f64,
    pub tau: f64,
    /// Width subtracted from every measured minimal diameter to account for
    /// the thickness of the thresholded contact mask. `None` uses `2√2 h`.
    pub width_slack: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol_g: 1e-6,
            tau: 0.1,
            width_slack: None,
        }
    }
}

/// Mask thickness `2√2 h` subtracted from measured contact widths.
pub fn default_slack(grid: &Grid) -> f64 {
    2.0 * std::f64::consts::SQRT_2 * grid.h()
}

/// Regular iff `g(x0) > tol_g` and the slack-corrected width ratio
/// `min_diam(contact ∩ B_r(x0)) / r` reaches `tau` on some tested scale.
pub fn classify_point(
    sol: &ObstacleSolution,
    g: &ScalarField,
    x0: &[f64],
    scales: &[f64],
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let node = sol.nearest_fb_point(x0)?;
    let grid = sol.grid();
    let center = grid.point(node);
    let slack = opts.width_slack.unwrap_or_else(|| default_slack(grid));
    let profile: Vec<(f64, f64)> = scales
        .iter()
        .map(|&r| {
            let md = masked_min_diameter(grid, &sol.contact_mask, &center, r);
            (r, (md - slack).max(0.0) / r)
        })
        .collect();
    let max_ratio = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    let r0 = profile
        .iter()
        .filter(|p| p.1 >= opts.tau)
        .map(|p| p.0)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.min(r)))
        });
    let class = if g.values[node] > opts.tol_g && max_ratio >= opts.tau {
        PointClass::Regular
    } else {
        PointClass::Singular
    };
    Ok(Classification {
        class,
        r0,
        profile,
        node,
    })
}

/// Radial solution with unit source and contact disk of radius `r0`.
pub fn radial_solution(r: f64, r0: f64) -> f64 {
    if r <= r0 {
        0.0
    } else {
        (r * r - r0 * r0) / 4.0 - 0.5 * r0 * r0 * (r / r0).ln()
    }
}
