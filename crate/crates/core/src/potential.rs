//! Fundamental solution, the corrected kernel `G(x, y) = Γ(x−y) − Γ(y) +
//! DΓ(y)·x`, and midpoint quadrature of `Φ(x) = ∫_{B₁} G(x, y) D_i f(y) dy`
//! in the plane.
//!
//! Since the last two terms of `G` are affine in `x`, their integrals are
//! accumulated once per density and `Φ(x)` costs one logarithm per cell.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{partial_at, ScalarField};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dims(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "fundamental solution implemented for n = 2, 3, got {n}"
        )))
    }
}

/// `Γ(x)`: `log|x| / 2π` for `n = 2`, `−1 / (4π|x|)` for `n = 3`.
pub fn fundamental(x: &[f64]) -> Result<f64> {
    check_dims(x.len())?;
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::OriginSingularity);
    }
    Ok(if x.len() == 2 {
        r.ln() / (2.0 * PI)
    } else {
        -1.0 / (4.0 * PI * r)
    })
}

/// `DΓ(x) = x / (n ω_n |x|^n)`.
pub fn fundamental_gradient(x: &[f64]) -> Result<Vec<f64>> {
    check_dims(x.len())?;
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::OriginSingularity);
    }
    let c = if x.len() == 2 {
        1.0 / (2.0 * PI * r * r)
    } else {
        1.0 / (4.0 * PI * r * r * r)
    };
    Ok(x.iter().map(|v| c * v).collect())
}

/// `G(x, y) = Γ(x − y) − Γ(y) + DΓ(y)·x`.
pub fn kernel_g(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("x and y differ in dimension".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if norm(y) == 0.0 || norm(&d) == 0.0 {
        check_dims(x.len())?;
        return Err(Error::KernelSingularity);
    }
    let dg = fundamental_gradient(y)?;
    Ok(fundamental(&d)? - fundamental(y)? + dg.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
}

/// `D_x G(x, y) = DΓ(x − y) + DΓ(y)`.
pub fn kernel_g_gradient(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if norm(y) == 0.0 || norm(&d) == 0.0 {
        return Err(Error::KernelSingularity);
    }
    let a = fundamental_gradient(&d)?;
    let b = fundamental_gradient(y)?;
    Ok(a.iter().zip(&b).map(|(p, q)| p + q).collect())
}

/// A function `f` on the unit disk together with the derivative `D_i f` that
/// the potential integrates.
pub trait Density: Sync {
    fn value(&self, y: [f64; 2]) -> f64;
    fn derivative(&self, y: [f64; 2]) -> f64;
}

/// Analytic density from a pair of closures.
pub struct FnDensity<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> Density for FnDensity<F, D>
where
    F: Fn([f64; 2]) -> f64 + Sync,
    D: Fn([f64; 2]) -> f64 + Sync,
{
    fn value(&self, y: [f64; 2]) -> f64 {
        (self.f)(y)
    }
    fn derivative(&self, y: [f64; 2]) -> f64 {
        (self.df)(y)
    }
}

/// Density sampled on a 2D grid covering the unit disk; `D_{h,i} f` is the
/// grid's central difference, and both are interpolated bilinearly.
pub struct FieldDensity {
    f: ScalarField,
    d: Vec<f64>,
}

impl FieldDensity {
    pub fn new(f: ScalarField, axis: usize) -> Result<Self> {
        let g = &f.grid;
        if g.dims() != 2 || axis > 1 {
            return Err(Error::InvalidArgument(
                "density needs a 2D field and axis 0 or 1".into(),
            ));
        }
        let ext = g.extents();
        if ext[0].0 > -1.0 || ext[0].1 < 1.0 || ext[1].0 > -1.0 || ext[1].1 < 1.0 {
            return Err(Error::InvalidArgument(
                "density grid must cover [-1, 1]²".into(),
            ));
        }
        if g.nx() < 3 || g.ny() < 3 {
            return Err(Error::GridTooSmall {
                needed: 3,
                got: g.nx().min(g.ny()),
            });
        }
        let d = (0..g.len())
            .map(|k| partial_at(g, &f.values, k, axis))
            .collect();
        Ok(FieldDensity { f, d })
    }

    fn interpolate(&self, values: &[f64], y: [f64; 2]) -> f64 {
        let g = &self.f.grid;
        let ext = g.extents();
        let h = g.h();
        let cell = |t: f64, n: usize| {
            let s = t / h;
            let i = (s.floor().max(0.0) as usize).min(n - 2);
            (i, s - i as f64)
        };
        let (i, tx) = cell(y[0] - ext[0].0, g.nx());
        let (j, ty) = cell(y[1] - ext[1].0, g.ny());
        let v = |a, b| values[g.index(a, b)];
        (1.0 - ty) * ((1.0 - tx) * v(i, j) + tx * v(i + 1, j))
            + ty * ((1.0 - tx) * v(i, j + 1) + tx * v(i + 1, j + 1))
    }
}

impl Density for FieldDensity {
    fn value(&self, y: [f64; 2]) -> f64 {
        self.interpolate(&self.f.values, y)
    }
    fn derivative(&self, y: [f64; 2]) -> f64 {
        self.interpolate(&self.d, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    /// Cells per side of the square `[−1, 1]²`; cells outside the disk are
    /// dropped and cells crossing the circle are clipped.
    pub cells_per_side: usize,
    /// Subdivision per side of the cells next to `x` and to the origin.
    pub subdivision: usize,
}

impl Default for QuadratureOptions {
    /// 318² ≈ 1.0·10⁵ cells on the square.
    fn default() -> Self {
        QuadratureOptions {
            cells_per_side: 318,
            subdivision: 4,
        }
    }
}

/// Square lattice of quadrature cells over `[−1, 1]²`.
struct Lattice {
    n: usize,
    hq: f64,
}

impl Lattice {
    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let idx = |t: f64| (((t + 1.0) / self.hq).floor().max(0.0) as usize).min(self.n - 1);
        (idx(p[0]), idx(p[1]))
    }

    fn corner(&self, i: usize, j: usize) -> [f64; 2] {
        [-1.0 + i as f64 * self.hq, -1.0 + j as f64 * self.hq]
    }

    /// Midpoint nodes of cell `(i, j)` split `s × s`, clipped to the unit
    /// disk by discarding sub-nodes outside it (boundary cells use at least
    /// 8 × 8 sub-nodes).
    fn nodes(&self, i: usize, j: usize, s: usize, out: &mut Vec<([f64; 2], f64)>) {
        let c = self.corner(i, j);
        let far = {
            let fx = c[0].abs().max((c[0] + self.hq).abs());
            let fy = c[1].abs().max((c[1] + self.hq).abs());
            fx * fx + fy * fy
        };
        let near = {
            let nx = if c[0] <= 0.0 && c[0] + self.hq >= 0.0 {
                0.0
            } else {
                c[0].abs().min((c[0] + self.hq).abs())
            };
            let ny = if c[1] <= 0.0 && c[1] + self.hq >= 0.0 {
                0.0
            } else {
                c[1].abs().min((c[1] + self.hq).abs())
            };
            nx * nx + ny * ny
        };
        if near >= 1.0 {
            return;
        }
        let s = if far > 1.0 { s.max(8) } else { s };
        let hs = self.hq / s as f64;
        for a in 0..s {
            for b in 0..s {
                let y = [c[0] + (a as f64 + 0.5) * hs, c[1] + (b as f64 + 0.5) * hs];
                if y[0] * y[0] + y[1] * y[1] < 1.0 {
                    out.push((y, hs * hs));
                }
            }
        }
    }
}

/// Precomputed quadrature of `Φ` for one density.
pub struct Potential<'a> {
    density: &'a dyn Density,
    lattice: Lattice,
    opts: QuadratureOptions,
    /// Coarse nodes with `w·D_i f`, all cells; cells next to the origin
    /// already refined.
    nodes: Vec<([f64; 2], f64)>,
    /// Cell block (inclusive index ranges) refined around the origin.
    origin_block: ((usize, usize), (usize, usize)),
    /// `Σ w D_i f · (−Γ(y))` and `Σ w D_i f · DΓ(y)`.
    affine: (f64, [f64; 2]),
}

const BAND: usize = 1;

fn block(c: (usize, usize), n: usize) -> ((usize, usize), (usize, usize)) {
    let lo = |v: usize| v.saturating_sub(BAND);
    let hi = |v: usize| (v + BAND).min(n - 1);
    ((lo(c.0), hi(c.0)), (lo(c.1), hi(c.1)))
}

fn in_block(b: &((usize, usize), (usize, usize)), i: usize, j: usize) -> bool {
    i >= b.0 .0 && i <= b.0 .1 && j >= b.1 .0 && j <= b.1 .1
}

fn gamma2(d: [f64; 2]) -> f64 {
    (d[0] * d[0] + d[1] * d[1]).ln() / (4.0 * PI)
}

impl<'a> Potential<'a> {
    pub fn new(density: &'a dyn Density, opts: QuadratureOptions) -> Result<Self> {
        if opts.cells_per_side < 4 || opts.subdivision == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs ≥ 4 cells per side and subdivision ≥ 1".into(),
            ));
        }
        let n = opts.cells_per_side;
        let lattice = Lattice {
            n,
            hq: 2.0 / n as f64,
        };
        // The origin is a lattice vertex for even n; refine the cells on both
        // sides of it.
        let oc = lattice.cell_of([0.0, 0.0]);
        let origin_block = if n.is_multiple_of(2) {
            let (lo, hi) = (oc.0.saturating_sub(1 + BAND), (oc.0 + BAND).min(n - 1));
            ((lo, hi), (lo, hi))
        } else {
            block(oc, n)
        };
        let mut raw = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let s = if in_block(&origin_block, i, j) {
                    opts.subdivision
                } else {
                    1
                };
                lattice.nodes(i, j, s, &mut raw);
            }
        }
        let mut nodes = Vec::with_capacity(raw.len());
        let mut a0 = 0.0;
        let mut a1 = [0.0; 2];
        for (y, w) in raw {
            let wd = w * density.derivative(y);
            let r2 = y[0] * y[0] + y[1] * y[1];
            a0 -= wd * gamma2(y);
            a1[0] += wd * y[0] / (2.0 * PI * r2);
            a1[1] += wd * y[1] / (2.0 * PI * r2);
            nodes.push((y, wd));
        }
        Ok(Potential {
            density,
            lattice,
            opts,
            nodes,
            origin_block,
            affine: (a0, a1),
        })
    }

    pub fn cell_size(&self) -> f64 {
        self.lattice.hq
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn guard(&self, x: [f64; 2]) -> Result<()> {
        let dist = 1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt();
        let cell = self.lattice.hq * std::f64::consts::SQRT_2;
        if !(dist > 0.0) {
            return Err(Error::InvalidArgument(
                "evaluation point must lie inside the unit disk".into(),
            ));
        }
        if cell > dist {
            return Err(Error::QuadratureTooCoarse { cell, guard: dist });
        }
        Ok(())
    }

    /// Coarse nodes of the cells around `x` that still need refining, and
    /// their refined replacements.
    fn local_nodes(&self, x: [f64; 2]) -> (Vec<([f64; 2], f64)>, Vec<([f64; 2], f64)>) {
        let b = block(self.lattice.cell_of(x), self.lattice.n);
        let (mut coarse, mut fine) = (Vec::new(), Vec::new());
        for j in b.1 .0..=b.1 .1 {
            for i in b.0 .0..=b.0 .1 {
                if in_block(&self.origin_block, i, j) {
                    continue;
                }
                self.lattice.nodes(i, j, 1, &mut coarse);
                self.lattice.nodes(i, j, self.opts.subdivision, &mut fine);
            }
        }
        let wd = |v: Vec<([f64; 2], f64)>| {
            v.into_iter()
                .map(|(y, w)| (y, w * self.density.derivative(y)))
                .collect()
        };
        (wd(coarse), wd(fine))
    }

    /// `Φ(x)`.
    pub fn phi(&self, x: [f64; 2]) -> Result<f64> {
        self.guard(x)?;
        let sum = |nodes: &[([f64; 2], f64)]| -> Result<f64> {
            let mut s = 0.0;
            for &(y, wd) in nodes {
                let d = [x[0] - y[0], x[1] - y[1]];
                if d[0] == 0.0 && d[1] == 0.0 {
                    return Err(Error::KernelSingularity);
                }
                s += wd * gamma2(d);
            }
            Ok(s)
        };
        let (coarse, fine) = self.local_nodes(x);
        let main = sum(&self.nodes)? - sum(&coarse)? + sum(&fine)?;
        Ok(main + self.affine.0 + self.affine.1[0] * x[0] + self.affine.1[1] * x[1])
    }

    /// `∇Φ(x)`, same quadrature.
    pub fn grad_phi(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        self.guard(x)?;
        let sum = |nodes: &[([f64; 2], f64)], g: &mut [f64; 2], sign: f64| -> Result<()> {
            for &(y, wd) in nodes {
                let d = [x[0] - y[0], x[1] - y[1]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                if r2 == 0.0 {
                    return Err(Error::KernelSingularity);
                }
                let c = sign * wd / (2.0 * PI * r2);
                g[0] += c * d[0];
                g[1] += c * d[1];
            }
            Ok(())
        };
        let (coarse, fine) = self.local_nodes(x);
        let mut g = [0.0; 2];
        sum(&self.nodes, &mut g, 1.0)?;
        sum(&coarse, &mut g, -1.0)?;
        sum(&fine, &mut g, 1.0)?;
        Ok([g[0] + self.affine.1[0], g[1] + self.affine.1[1]])
    }
}

/// `Φ(x)` for a sampled `f` and axis `i`, with default quadrature.
pub fn potential_phi(
    f: &ScalarField,
    axis: usize,
    x: [f64; 2],
    opts: QuadratureOptions,
) -> Result<f64> {
    let d = FieldDensity::new(f.clone(), axis)?;
    Potential::new(&d, opts)?.phi(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum GrowthForm {
    /// `ω(t) = t^{1 − α}`, `α ∈ [0, 1]`.
    Power { alpha: f64 },
    /// `ω ≡ 1 / |log δ|`.
    LogConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthModulus {
    pub form: GrowthForm,
    pub delta: f64,
}

impl GrowthModulus {
    pub fn new(form: GrowthForm, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "δ = {delta} must lie in (0, 1)"
            )));
        }
        if let GrowthForm::Power { alpha } = form {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidArgument(format!(
                    "exponent α = {alpha} must lie in [0, 1]"
                )));
            }
        }
        Ok(GrowthModulus { form, delta })
    }

    pub fn omega(&self, t: f64) -> f64 {
        match self.form {
            GrowthForm::Power { alpha } => t.powf(1.0 - alpha),
            GrowthForm::LogConstant => 1.0 / self.delta.ln().abs(),
        }
    }

    /// `∫_a^b ω(τ)/τ dτ` by the midpoint rule in `log τ` on 1000 nodes.
    pub fn log_integral(&self, a: f64, b: f64) -> f64 {
        let (la, lb) = (a.ln(), b.ln());
        let n = 1000;
        let step = (lb - la) / n as f64;
        (0..n)
            .map(|k| self.omega((la + (k as f64 + 0.5) * step).exp()))
            .sum::<f64>()
            * step
    }

    /// `r (δ + r ω(δ/r) + r ∫_δ^{δ/r} ω(τ)/τ dτ)`.
    pub fn bound(&self, r: f64) -> f64 {
        let d = self.delta;
        r * (d + r * self.omega(d / r) + r * self.log_integral(d, d / r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadBoundReport {
    pub max_ratio: f64,
    /// `(r, sup_{B_r} |Φ|, ratio)`.
    pub profile: Vec<(f64, f64, f64)>,
}

/// Evaluation points of `B_r`: the center and `rings` circles of
/// `8·k` points each.
pub fn disk_points(r: f64, rings: usize) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]];
    for k in 1..=rings {
        let rho = r * k as f64 / rings as f64;
        let m = 8 * k;
        for a in 0..m {
            let t = 2.0 * PI * (a as f64 + 0.5 * (k % 2) as f64) / m as f64;
            out.push([rho * t.cos(), rho * t.sin()]);
        }
    }
    out
}

/// Ratio of `sup_{B_r} |Φ|` to the growth bound over `r_grid ⊂ (δ, 1)`,
/// after checking `sup_{B_r} |f| ≤ r ω(δ/r)` on each ball.
pub fn verify_quad_bound(
    modulus: &GrowthModulus,
    density: &dyn Density,
    r_grid: &[f64],
    opts: QuadratureOptions,
    rings: usize,
) -> Result<QuadBoundReport> {
    for &r in r_grid {
        if !(r > modulus.delta && r < 1.0) {
            return Err(Error::InvalidArgument(format!("scale {r} outside (δ, 1)")));
        }
    }
    let pot = Potential::new(density, opts)?;
    let mut profile = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let pts = disk_points(r, rings);
        let allowed = r * modulus.omega(modulus.delta / r);
        let sup_f = pts
            .iter()
            .map(|&p| density.value(p).abs())
            .fold(0.0, f64::max);
        if sup_f > allowed * (1.0 + 1e-9) {
            return Err(Error::HypothesisViolated {
                r,
                sup: sup_f,
                bound: allowed,
            });
        }
        let mut sup_phi: f64 = 0.0;
        for p in pts {
            sup_phi = sup_phi.max(pot.phi(p)?.abs());
        }
        profile.push((r, sup_phi, sup_phi / modulus.bound(r)));
    }
    let max_ratio = profile.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(QuadBoundReport { max_ratio, profile })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_values() {
        assert_eq!(fundamental(&[1.0, 0.0]).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((fundamental(&[0.0, e]).unwrap() - 0.159_154_9).abs() < 1e-7);
        assert!((fundamental(&[0.0, 0.0, 1.0]).unwrap() + 0.079_577_5).abs() < 1e-7);
        assert!(matches!(
            fundamental(&[0.0, 0.0]),
            Err(Error::OriginSingularity)
        ));
    }

    #[test]
    fn kernel_normalized_at_origin() {
        for y in [[0.3, -0.2], [-0.7, 0.1]] {
            assert_eq!(kernel_g(&[0.0, 0.0], &y).unwrap(), 0.0);
            let g = kernel_g_gradient(&[0.0, 0.0], &y).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-15));
        }
        assert!(matches!(
            kernel_g(&[0.1, 0.1], &[0.1, 0.1]),
            Err(Error::KernelSingularity)
        ));
        assert!(matches!(
            kernel_g(&[0.1, 0.1], &[0.0, 0.0]),
            Err(Error::KernelSingularity)
        ));
    }

    #[test]
    fn clipped_cells_cover_the_disk() {
        let d = FnDensity {
            f: |_: [f64; 2]| 0.0,
            df: |_: [f64; 2]| 1.0,
        };
        let p = Potential::new(
            &d,
            QuadratureOptions {
                cells_per_side: 64,
                subdivision: 4,
            },
        )
        .unwrap();
        let area: f64 = p.nodes.iter().map(|n| n.1).sum();
        assert!((area - PI).abs() < 2e-3, "{area}");
    }

    #[test]
    fn log_integral_of_constant() {
        let m = GrowthModulus::new(GrowthForm::Power { alpha: 1.0 }, 0.1).unwrap();
        assert!((m.log_integral(0.1, 1.0) - 10f64.ln()).abs() < 1e-12);
    }
}
