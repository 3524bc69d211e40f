//! Energy-minimizing maps into the closed target, their decomposition
//! `u = V + w ν(V)` and the coefficients of the reduced system.

use crate::error::{Error, Result};
use crate::fields::{laplacian_at, partial_at, Grid, ScalarField, VectorField};
use crate::geometry::TargetManifold;
use crate::obstacle::{
    contact_set, optimal_omega, solve_poisson, solve_poisson_from, Dirichlet, SorOptions,
};

/// Phase threshold for the Euler–Lagrange residual: projected nodes sit on
/// the boundary to rounding error.
pub const CONTACT_EXACT_EPS: f64 = 1e-10;

/// Fixed nodes of a map solve, `m` values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDirichlet {
    pub m: usize,
    pub fixed: Vec<bool>,
    pub values: Vec<f64>,
}

impl MapDirichlet {
    /// Fixes the outer ring (both ends in 1D) to `f(x, y)`.
    pub fn boundary_ring(grid: &Grid, m: usize, f: impl Fn(f64, f64) -> Vec<f64>) -> Self {
        let mut fixed = vec![false; grid.len()];
        let mut values = vec![0.0; grid.len() * m];
        for k in 0..grid.len() {
            if grid.is_boundary(k) {
                fixed[k] = true;
                let p = grid.point(k);
                values[k * m..(k + 1) * m].copy_from_slice(&f(p[0], p[1])[..m]);
            }
        }
        MapDirichlet { m, fixed, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation factor; `None` picks the model-problem optimum.
    pub omega: Option<f64>,
    /// Record the discrete energy after every sweep.
    pub record_energy: bool,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            tol: 1e-8,
            max_iter: 500_000,
            omega: None,
            record_energy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMapSolution {
    pub target: TargetManifold,
    pub u: VectorField,
    /// `Π∘u`; `NaN` where the decomposition is undefined.
    pub v: VectorField,
    /// `ρ∘u`.
    pub w: ScalarField,
    /// `{w <= h²}`.
    pub contact_mask: Vec<bool>,
    pub energy: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
    /// Energy after each sweep when requested.
    pub energy_trace: Vec<f64>,
}

impl ConstraintMapSolution {
    /// Wraps a sampled map, computing `V`, `w`, contact, energy and residual.
    pub fn from_map(target: &TargetManifold, u: VectorField) -> Result<Self> {
        if u.m != target.ambient_dim {
            return Err(Error::GridMismatch(format!(
                "map has {} components, target dimension is {}",
                u.m, target.ambient_dim
            )));
        }
        let grid = u.grid.clone();
        let mut v = VectorField::zeros(grid.clone(), u.m);
        let mut w = ScalarField::zeros(grid.clone());
        for k in 0..grid.len() {
            let p = u.node(k);
            w.values[k] = target.signed_distance(p).unwrap_or(f64::NAN);
            match target.project(p) {
                Ok(d) => v.node_mut(k).copy_from_slice(&d.projected),
                Err(_) => v.node_mut(k).iter_mut().for_each(|x| *x = f64::NAN),
            }
        }
        let h = grid.h();
        let (contact_mask, _) = contact_set(&w, h * h);
        let energy = dirichlet_energy(&u);
        let el_residual = euler_lagrange_residual(target, &u)?.interior_max;
        Ok(ConstraintMapSolution {
            target: *target,
            u,
            v,
            w,
            contact_mask,
            energy,
            el_residual,
            iterations: 0,
            converged: true,
            last_change: 0.0,
            energy_trace: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.u.grid
    }

    pub fn contact_fraction(&self) -> f64 {
        self.contact_mask.iter().filter(|&&c| c).count() as f64 / self.contact_mask.len() as f64
    }

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
}

/// `Σ_edges |Δu|² h^{n-2}`, the discrete `∫|Du|²`.
pub fn dirichlet_energy(u: &VectorField) -> f64 {
    let g = &u.grid;
    let scale = g.h().powi(g.dims() as i32 - 2);
    let mut e = 0.0;
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        let mut edge = |n: usize| {
            e += u
                .node(k)
                .iter()
                .zip(u.node(n))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        };
        if i + 1 < g.nx() {
            edge(k + 1);
        }
        if g.dims() == 2 && j + 1 < g.ny() {
            edge(k + g.nx());
        }
    }
    e * scale
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Projected nonlinear SOR for the Dirichlet energy over maps into
/// `closure(M)`.
///
/// Each free node moves to `Π(u + ω(avg − u))` when that does not increase
/// its local energy `2d|x − avg|²`, and to the exact local minimizer `Π(avg)`
/// otherwise, so the energy is non-increasing sweep by sweep (up to
/// rounding). Stops when the largest nodal change is at most `tol·h²`, or at
/// the rounding level `4ε·max|data|/(2 − ω)` when that is larger.
pub fn minimize_energy(
    target: &TargetManifold,
    dirichlet: &MapDirichlet,
    grid: &Grid,
    opts: &MapOptions,
) -> Result<ConstraintMapSolution> {
    minimize_energy_from(target, dirichlet, grid, opts, None)
}

/// As [`minimize_energy`], starting from `initial` (pushed into `closure(M)`)
/// instead of the harmonic extension of the data.
pub fn minimize_energy_from(
    target: &TargetManifold,
    dirichlet: &MapDirichlet,
    grid: &Grid,
    opts: &MapOptions,
    initial: Option<&VectorField>,
) -> Result<ConstraintMapSolution> {
    let m = target.ambient_dim;
    if dirichlet.m != m
        || dirichlet.fixed.len() != grid.len()
        || dirichlet.values.len() != grid.len() * m
    {
        return Err(Error::GridMismatch("boundary data size".into()));
    }
    if grid.n().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall {
            needed: 3,
            got: *grid.n().iter().min().unwrap(),
        });
    }
    if let Some(k) = (0..grid.len()).find(|&k| grid.is_boundary(k) && !dirichlet.fixed[k]) {
        return Err(Error::InvalidArgument(format!(
            "grid-boundary node {k} is not fixed"
        )));
    }
    for k in (0..grid.len()).filter(|&k| dirichlet.fixed[k]) {
        let rho = target.signed_distance(&dirichlet.values[k * m..(k + 1) * m]);
        if !matches!(rho, Ok(r) if r >= -1e-12) {
            return Err(Error::BoundaryDataOutsideTarget { node: k });
        }
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let omega = opts
        .omega
        .unwrap_or_else(|| optimal_omega(*grid.n().iter().max().unwrap()));
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "relaxation {omega} outside (0, 2)"
        )));
    }

    let mut u = match initial {
        Some(init) => {
            if init.grid != *grid || init.m != m {
                return Err(Error::GridMismatch("initial iterate".into()));
            }
            let mut u = init.values.clone();
            for k in 0..grid.len() {
                let node = &mut u[k * m..(k + 1) * m];
                if dirichlet.fixed[k] {
                    node.copy_from_slice(&dirichlet.values[k * m..(k + 1) * m]);
                } else {
                    target.clamp_to_closure(node);
                }
            }
            u
        }
        None => harmonic_start(target, dirichlet, grid)?,
    };
    // Over-relaxation amplifies rounding by about 1/(2 − ω); changes below
    // that level are noise and cannot be driven lower.
    let scale = dirichlet.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let noise = 4.0 * f64::EPSILON * scale / (2.0 - omega);
    let threshold = (opts.tol * grid.h() * grid.h()).max(noise);
    let nx = grid.nx();
    let mut avg = vec![0.0; m];
    let mut cand = vec![0.0; m];
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut energy_trace = Vec::new();
    while iterations < opts.max_iter {
        let mut max_change: f64 = 0.0;
        for color in 0..2 {
            for k in 0..grid.len() {
                if dirichlet.fixed[k] {
                    continue;
                }
                let (i, j) = grid.ij(k);
                if (i + j) % 2 != color {
                    continue;
                }
                let nbrs: [usize; 4] = [k - 1, k + 1, k.wrapping_sub(nx), k + nx];
                let count = 2 * grid.dims();
                for c in 0..m {
                    avg[c] =
                        nbrs[..count].iter().map(|&n| u[n * m + c]).sum::<f64>() / count as f64;
                }
                let old = &u[k * m..(k + 1) * m];
                for c in 0..m {
                    cand[c] = old[c] + omega * (avg[c] - old[c]);
                }
                target.clamp_to_closure(&mut cand);
                // |cand − avg|² − |old − avg|². Near convergence both sit on
                // ∂M and the difference is below the rounding of |·|², so
                // only gains above that floor count as increases.
                let gain: f64 = (0..m)
                    .map(|c| (cand[c] - old[c]) * (cand[c] + old[c] - 2.0 * avg[c]))
                    .sum();
                let floor = 8.0 * f64::EPSILON * dot(&cand, &cand).max(dot(old, old));
                if gain > floor {
                    cand.copy_from_slice(&avg);
                    target.clamp_to_closure(&mut cand);
                }
                if target.signed_distance(&cand).map_or(true, |r| r < -1e-12) {
                    // Average at the sphere center: keep the current value.
                    continue;
                }
                let change = dist2(&cand, old).sqrt();
                max_change = max_change.max(change);
                u[k * m..(k + 1) * m].copy_from_slice(&cand);
            }
        }
        iterations += 1;
        last_change = max_change;
        if opts.record_energy {
            let field = VectorField::new(grid.clone(), m, u.clone())?;
            energy_trace.push(dirichlet_energy(&field));
        }
        if max_change <= threshold {
            converged = true;
            break;
        }
    }
    let mut sol = ConstraintMapSolution::from_map(target, VectorField::new(grid.clone(), m, u)?)?;
    sol.iterations = iterations;
    sol.converged = converged;
    sol.last_change = last_change;
    sol.energy_trace = energy_trace;
    Ok(sol)
}

/// Componentwise harmonic extension of the fixed values, pushed into
/// `closure(M)`.
fn harmonic_start(
    target: &TargetManifold,
    dirichlet: &MapDirichlet,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let m = dirichlet.m;
    let mut u = vec![0.0; grid.len() * m];
    let rhs = ScalarField::zeros(grid.clone());
    let opts = SorOptions {
        tol: 1e-3,
        max_iter: 100_000,
        omega: optimal_omega(*grid.n().iter().max().unwrap()),
    };
    for c in 0..m {
        let values: Vec<f64> = (0..grid.len())
            .map(|k| dirichlet.values[k * m + c])
            .collect();
        let fixed_vals = (0..grid.len())
            .filter(|&k| dirichlet.fixed[k])
            .map(|k| values[k]);
        let count = dirichlet.fixed.iter().filter(|&&f| f).count().max(1);
        let mean = fixed_vals.sum::<f64>() / count as f64;
        let bc = Dirichlet {
            fixed: dirichlet.fixed.clone(),
            values,
        };
        let (phi, _) = solve_poisson_from(&rhs, &bc, &opts, mean)?;
        for k in 0..grid.len() {
            u[k * m + c] = phi.values[k];
        }
    }
    let fallback: Vec<f64> = {
        let k = dirichlet.fixed.iter().position(|&f| f).unwrap_or(0);
        dirichlet.values[k * m..(k + 1) * m].to_vec()
    };
    for k in 0..grid.len() {
        if dirichlet.fixed[k] {
            u[k * m..(k + 1) * m].copy_from_slice(&dirichlet.values[k * m..(k + 1) * m]);
            continue;
        }
        let node = &mut u[k * m..(k + 1) * m];
        target.clamp_to_closure(node);
        if target.signed_distance(node).map_or(true, |r| r < -1e-12) {
            node.copy_from_slice(&fallback);
        }
    }
    Ok(u)
}

/// `(Du)^τ = DV + w D(ν∘V)`, one m-vector field per grid axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub v: VectorField,
    pub w: ScalarField,
    pub tangential_grad: Vec<VectorField>,
    /// False at nodes outside the tubular neighborhood (values are `NaN`).
    pub valid: Vec<bool>,
}

fn component_partial(f: &VectorField, c: usize, k: usize, axis: usize) -> f64 {
    let g = &f.grid;
    let (i, j) = g.ij(k);
    let (idx, n, stride) = if axis == 0 {
        (i, g.nx(), 1)
    } else {
        (j, g.ny(), g.nx())
    };
    let m = f.m;
    let at = |kk: usize| f.values[kk * m + c];
    let h = g.h();
    if idx > 0 && idx + 1 < n {
        (at(k + stride) - at(k - stride)) / (2.0 * h)
    } else if idx == 0 {
        (-3.0 * at(k) + 4.0 * at(k + stride) - at(k + 2 * stride)) / (2.0 * h)
    } else {
        (3.0 * at(k) - 4.0 * at(k - stride) + at(k - 2 * stride)) / (2.0 * h)
    }
}

/// Splits `u` into `V = Π∘u`, `w = ρ∘u` and the tangential gradient.
/// Fails only when no node lies in the tubular neighborhood.
pub fn decompose_map(target: &TargetManifold, u: &VectorField) -> Result<Decomposition> {
    let grid = &u.grid;
    if grid.n().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall {
            needed: 3,
            got: *grid.n().iter().min().unwrap(),
        });
    }
    let m = u.m;
    let mut v = VectorField::zeros(grid.clone(), m);
    let mut nu = VectorField::zeros(grid.clone(), m);
    let mut w = ScalarField::zeros(grid.clone());
    let mut valid = vec![true; grid.len()];
    let mut last_err = None;
    for k in 0..grid.len() {
        match target.project(u.node(k)) {
            Ok(d) => {
                v.node_mut(k).copy_from_slice(&d.projected);
                nu.node_mut(k).copy_from_slice(&d.normal);
                w.values[k] = d.distance;
            }
            Err(e) => {
                valid[k] = false;
                v.node_mut(k).iter_mut().for_each(|x| *x = f64::NAN);
                nu.node_mut(k).iter_mut().for_each(|x| *x = f64::NAN);
                w.values[k] = f64::NAN;
                last_err = Some(e);
            }
        }
    }
    if !valid.iter().any(|&b| b) {
        return Err(last_err.unwrap_or(Error::EmptySet));
    }
    let tangential_grad = (0..grid.dims())
        .map(|axis| {
            let mut t = VectorField::zeros(grid.clone(), m);
            for k in 0..grid.len() {
                for c in 0..m {
                    t.values[k * m + c] = component_partial(&v, c, k, axis)
                        + w.values[k] * component_partial(&nu, c, k, axis);
                }
            }
            t
        })
        .collect();
    Ok(Decomposition {
        v,
        w,
        tangential_grad,
        valid,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoefficients {
    /// `−ν_V·A_V((Du)^τ, (Du)^τ) = |β(V)(Du)^τ|²`.
    pub g: ScalarField,
    /// `a[i]` holds `a^i = −2 D(ν^i∘V)`, one component per grid axis.
    pub a: Vec<VectorField>,
    pub tangential_grad: Vec<VectorField>,
    /// `h[i] = Hess Π^i(u)((Du)^τ, (Du)^τ)`.
    pub h_terms: Vec<ScalarField>,
    pub decomposition: Decomposition,
}

pub fn coefficients(target: &TargetManifold, u: &VectorField) -> Result<ReducedCoefficients> {
    let dec = decompose_map(target, u)?;
    let grid = &u.grid;
    let m = u.m;
    let dims = grid.dims();
    let mut nu = VectorField::zeros(grid.clone(), m);
    for k in 0..grid.len() {
        let n = if dec.valid[k] {
            target.normal_at(dec.v.node(k))
        } else {
            vec![f64::NAN; m]
        };
        nu.node_mut(k).copy_from_slice(&n);
    }
    let mut g = ScalarField::zeros(grid.clone());
    let mut h_terms: Vec<ScalarField> = (0..m).map(|_| ScalarField::zeros(grid.clone())).collect();
    for k in 0..grid.len() {
        if !dec.valid[k] {
            g.values[k] = f64::NAN;
            h_terms.iter_mut().for_each(|f| f.values[k] = f64::NAN);
            continue;
        }
        let beta = target.shape_operator(dec.v.node(k))?.beta;
        let mut gk = 0.0;
        for t in &dec.tangential_grad {
            let xi = nalgebra::DVector::from_column_slice(t.node(k));
            gk += (&beta * &xi).norm_squared();
            let hess = target.projection_hessian_tangent(u.node(k), t.node(k));
            for (c, hc) in hess.iter().enumerate() {
                h_terms[c].values[k] += hc;
            }
        }
        g.values[k] = gk;
    }
    let a = (0..m)
        .map(|c| {
            let mut f = VectorField::zeros(grid.clone(), dims);
            for k in 0..grid.len() {
                for axis in 0..dims {
                    f.values[k * dims + axis] = -2.0 * component_partial(&nu, c, k, axis);
                }
            }
            f
        })
        .collect();
    Ok(ReducedCoefficients {
        g,
        a,
        tangential_grad: dec.tangential_grad.clone(),
        h_terms,
        decomposition: dec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElResidual {
    /// Max over interior nodes whose stencil lies in a single phase.
    pub interior_max: f64,
    /// Max over interior nodes whose stencil straddles contact and non-contact.
    pub interface_max: f64,
    pub interface_nodes: usize,
}

/// `|Δ_h u − A_u(D_h u, D_h u) χ_contact|` over interior nodes, with contact
/// `{ρ(u) <= 1e-10}`. Nodes whose 5-point stencil mixes phases are reported
/// separately: there the one-sided equations do not hold at grid scale.
pub fn euler_lagrange_residual(target: &TargetManifold, u: &VectorField) -> Result<ElResidual> {
    let grid = &u.grid;
    if grid.n().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall {
            needed: 3,
            got: *grid.n().iter().min().unwrap(),
        });
    }
    let m = u.m;
    let contact: Vec<Option<bool>> = (0..grid.len())
        .map(|k| {
            target
                .signed_distance(u.node(k))
                .ok()
                .map(|r| r <= CONTACT_EXACT_EPS)
        })
        .collect();
    let comps: Vec<ScalarField> = (0..m).map(|c| u.component(c)).collect();
    let mut out = ElResidual {
        interior_max: 0.0,
        interface_max: 0.0,
        interface_nodes: 0,
    };
    for k in (0..grid.len()).filter(|&k| !grid.is_boundary(k)) {
        let Some(phase) = contact[k] else { continue };
        let mixed = grid.neighbors(k).any(|n| contact[n] != Some(phase));
        let lap: Vec<f64> = comps.iter().map(|f| laplacian_at(f, k)).collect();
        let mut forcing = vec![0.0; m];
        if phase {
            let p = u.node(k);
            let boundary = target
                .project(p)
                .map(|d| d.projected)
                .unwrap_or_else(|_| p.to_vec());
            for axis in 0..grid.dims() {
                let xi: Vec<f64> = comps
                    .iter()
                    .map(|f| partial_at(grid, &f.values, k, axis))
                    .collect();
                for (f, a) in forcing
                    .iter_mut()
                    .zip(target.second_fundamental(&boundary, &xi))
                {
                    *f += a;
                }
            }
        }
        let r = lap
            .iter()
            .zip(&forcing)
            .map(|(l, f)| (l - f) * (l - f))
            .sum::<f64>()
            .sqrt();
        if mixed {
            out.interface_nodes += 1;
            out.interface_max = out.interface_max.max(r);
        } else {
            out.interior_max = out.interior_max.max(r);
        }
    }
    Ok(out)
}

/// Closed-form minimizer on `[−1, 1]` into `R² \ B̄₁`:
/// `u = (1, −x)` for `x < 0`, `(cos x, −sin x)` for `x >= 0`.
pub fn example_map(x: f64) -> [f64; 2] {
    if x < 0.0 {
        [1.0, -x]
    } else {
        [x.cos(), -x.sin()]
    }
}

/// Angle of the image map, `V = (cos θ, −sin θ)`.
pub fn example_theta(x: f64) -> f64 {
    if x < 0.0 {
        x.atan()
    } else {
        x
    }
}

/// `θ'''` away from 0.
pub fn example_theta_third(x: f64) -> f64 {
    if x < 0.0 {
        (6.0 * x * x - 2.0) / (1.0 + x * x).powi(3)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactExample {
    pub solution: ConstraintMapSolution,
    pub theta: ScalarField,
    /// `θ'''(0⁻)`.
    pub theta3_left: f64,
    /// `θ'''(0⁺)`.
    pub theta3_right: f64,
    /// Node at `x = 0`.
    pub origin: usize,
}

/// Samples the closed-form example on a 1D grid containing 0.
pub fn exact_example(grid: &Grid) -> Result<ExactExample> {
    if grid.dims() != 1 {
        return Err(Error::InvalidArgument(
            "the example lives on a 1D grid".into(),
        ));
    }
    let origin = grid.nearest_node(&[0.0]);
    if grid.coord(origin, 0).abs() > 1e-12 * grid.h().max(1.0) {
        return Err(Error::InvalidArgument("grid does not contain x = 0".into()));
    }
    let target = TargetManifold::sphere(2);
    let u = VectorField::from_fn(grid.clone(), 2, |x, _| example_map(x).to_vec());
    let theta = ScalarField::from_fn(grid.clone(), |x, _| example_theta(x));
    let solution = ConstraintMapSolution::from_map(&target, u)?;
    Ok(ExactExample {
        solution,
        theta,
        theta3_left: -2.0,
        theta3_right: 0.0,
        origin,
    })
}

/// One-sided third difference at node `k` of a 1D field using nodes
/// `k, k±1, k±2, k±3` on the chosen side.
pub fn one_sided_third_difference(f: &ScalarField, k: usize, forward: bool) -> Result<f64> {
    let n = f.grid.nx();
    let h = f.h();
    let v = &f.values;
    if forward {
        if k + 3 >= n {
            return Err(Error::GridTooSmall {
                needed: k + 4,
                got: n,
            });
        }
        Ok((v[k + 3] - 3.0 * v[k + 2] + 3.0 * v[k + 1] - v[k]) / (h * h * h))
    } else {
        if k < 3 {
            return Err(Error::GridTooSmall {
                needed: 4,
                got: k + 1,
            });
        }
        Ok((v[k] - 3.0 * v[k - 1] + 3.0 * v[k - 2] - v[k - 3]) / (h * h * h))
    }
}

/// Solves `Δφ^i = h^i` in `B_r(center)` with `φ^i = V^i` outside the ball,
/// one field per component of `V`.
pub fn harmonic_corrector(
    v: &VectorField,
    h_terms: &[ScalarField],
    center: &[f64],
    r: f64,
    opts: &SorOptions,
) -> Result<Vec<ScalarField>> {
    let grid = &v.grid;
    if h_terms.len() != v.m {
        return Err(Error::GridMismatch("one source term per component".into()));
    }
    let inside: std::collections::HashSet<usize> = grid.ball_nodes(center, r).into_iter().collect();
    (0..v.m)
        .map(|c| {
            let comp = v.component(c);
            let bc = Dirichlet {
                fixed: (0..grid.len())
                    .map(|k| grid.is_boundary(k) || !inside.contains(&k))
                    .collect(),
                values: comp.values.clone(),
            };
            if let Some(k) = (0..grid.len()).find(|&k| !bc.fixed[k] && !comp.values[k].is_finite())
            {
                return Err(Error::InvalidArgument(format!(
                    "undefined image at node {k}"
                )));
            }
            let rhs = h_terms[c].map(|x| if x.is_finite() { x } else { 0.0 });
            solve_poisson(&rhs, &bc, opts).map(|(phi, _)| phi)
        })
        .collect()
}
