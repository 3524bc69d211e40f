//! Uniform grids, scalar and vector fields, finite-difference stencils and
//! the plain-text field file format.
//!
//! Nodes are stored row-major with the x index fastest: node `(i, j)` lives
//! at `j * nx + i`. Vector fields store the components of a node
//! contiguously. Stencil outputs mark nodes where the stencil does not fit
//! with `NaN`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: usize,
    extents: Vec<(f64, f64)>,
    n: Vec<usize>,
    h: f64,
}

impl Grid {
    pub fn new_1d(xmin: f64, xmax: f64, nx: usize) -> Result<Self> {
        Self::new(vec![(xmin, xmax)], vec![nx])
    }

    pub fn new_2d(
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        Self::new(vec![(xmin, xmax), (ymin, ymax)], vec![nx, ny])
    }

    /// Square grid `[a, b]^dims` with `n` points per axis.
    pub fn cube(dims: usize, a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(vec![(a, b); dims], vec![n; dims])
    }

    pub fn new(extents: Vec<(f64, f64)>, n: Vec<usize>) -> Result<Self> {
        let dims = extents.len();
        if !(dims == 1 || dims == 2) || n.len() != dims {
            return Err(Error::InvalidArgument("grids are 1D or 2D".into()));
        }
        for (&(lo, hi), &k) in extents.iter().zip(&n) {
            if k < 2 {
                return Err(Error::GridTooSmall { needed: 2, got: k });
            }
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!("bad extent [{lo}, {hi}]")));
            }
        }
        let spacings: Vec<f64> = extents
            .iter()
            .zip(&n)
            .map(|(&(lo, hi), &k)| (hi - lo) / (k - 1) as f64)
            .collect();
        let h = spacings[0];
        if spacings.iter().any(|s| (s - h).abs() > 1e-14 * h.max(1.0)) {
            return Err(Error::InvalidArgument(format!(
                "unequal spacings {spacings:?}"
            )));
        }
        Ok(Grid {
            dims,
            extents,
            n,
            h,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn nx(&self) -> usize {
        self.n[0]
    }

    pub fn ny(&self) -> usize {
        if self.dims == 2 {
            self.n[1]
        } else {
            1
        }
    }

    pub fn extents(&self) -> &[(f64, f64)] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    /// Per-axis indices of a node.
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n[0], k / self.n[0])
    }

    /// Coordinate of node `k` along `axis`.
    pub fn coord(&self, k: usize, axis: usize) -> f64 {
        let (i, j) = self.ij(k);
        let idx = if axis == 0 { i } else { j };
        self.extents[axis].0 + idx as f64 * self.h
    }

    /// Coordinates of node `k` as a `[x, y]` pair (`y = 0` in 1D).
    pub fn point(&self, k: usize) -> [f64; 2] {
        if self.dims == 1 {
            [self.coord(k, 0), 0.0]
        } else {
            [self.coord(k, 0), self.coord(k, 1)]
        }
    }

    /// Whether the node lies on the outer ring of the grid.
    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = self.ij(k);
        if i == 0 || i + 1 == self.n[0] {
            return true;
        }
        self.dims == 2 && (j == 0 || j + 1 == self.n[1])
    }

    /// 4-neighbors (2-neighbors in 1D) that exist.
    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.ij(k);
        let nx = self.n[0];
        let ny = self.ny();
        let cands = [
            (i > 0).then(|| k - 1),
            (i + 1 < nx).then(|| k + 1),
            (self.dims == 2 && j > 0).then(|| k - nx),
            (self.dims == 2 && j + 1 < ny).then(|| k + nx),
        ];
        cands.into_iter().flatten()
    }

    /// Nearest node to a point (clamped to the grid).
    pub fn nearest_node(&self, p: &[f64]) -> usize {
        let snap = |axis: usize| {
            let t = ((p[axis] - self.extents[axis].0) / self.h).round();
            t.clamp(0.0, (self.n[axis] - 1) as f64) as usize
        };
        if self.dims == 1 {
            snap(0)
        } else {
            self.index(snap(0), snap(1))
        }
    }

    /// Nodes of the closed ball `{x : |x - center| <= r}`.
    pub fn ball_nodes(&self, center: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r * (1.0 + 1e-12);
        let lo_hi = |axis: usize| {
            let lo = ((center[axis] - r - self.extents[axis].0) / self.h)
                .floor()
                .max(0.0) as usize;
            let hi = (((center[axis] + r - self.extents[axis].0) / self.h).ceil() as isize)
                .clamp(0, self.n[axis] as isize - 1) as usize;
            (lo, hi)
        };
        let (i0, i1) = lo_hi(0);
        let (j0, j1) = if self.dims == 2 { lo_hi(1) } else { (0, 0) };
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1.min(self.n[0] - 1) {
                let k = self.index(i, j);
                let p = self.point(k);
                let dx = p[0] - center[0];
                let dy = if self.dims == 2 {
                    p[1] - center[1]
                } else {
                    0.0
                };
                if dx * dx + dy * dy <= r2 {
                    out.push(k);
                }
            }
        }
        out
    }

    fn require_min(&self, needed: usize) -> Result<()> {
        if let Some(&got) = self.n.iter().find(|&&k| k < needed) {
            return Err(Error::GridTooSmall { needed, got });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    /// Number of components per node.
    pub m: usize,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        ScalarField { grid, values }
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let p = grid.point(k);
                f(p[0], p[1])
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ScalarField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Value at the node nearest to `p`.
    pub fn at(&self, p: &[f64]) -> f64 {
        self.values[self.grid.nearest_node(p)]
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        write_field(w, &self.grid, 1, &self.values)
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let (grid, m, values) = read_field(r)?;
        if m != 1 {
            return Err(Error::FieldFormat(format!(
                "expected a scalar field, found m = {m}"
            )));
        }
        Ok(ScalarField { grid, values })
    }
}

impl VectorField {
    pub fn new(grid: Grid, m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * m || m == 0 {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes x {m} components",
                values.len(),
                grid.len()
            )));
        }
        Ok(VectorField { grid, m, values })
    }

    pub fn zeros(grid: Grid, m: usize) -> Self {
        let values = vec![0.0; grid.len() * m];
        VectorField { grid, m, values }
    }

    pub fn from_fn(grid: Grid, m: usize, f: impl Fn(f64, f64) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(grid.len() * m);
        for k in 0..grid.len() {
            let p = grid.point(k);
            let v = f(p[0], p[1]);
            assert_eq!(v.len(), m, "component count");
            values.extend(v);
        }
        VectorField { grid, m, values }
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.values[k * self.m..(k + 1) * self.m]
    }

    pub fn node_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.m..(k + 1) * self.m]
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|k| self.values[k * self.m + c])
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn from_components(components: &[ScalarField]) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptySet)?;
        let m = components.len();
        let n = first.grid.len();
        let mut values = vec![0.0; n * m];
        for (c, f) in components.iter().enumerate() {
            if f.grid != first.grid {
                return Err(Error::GridMismatch("components on different grids".into()));
            }
            for k in 0..n {
                values[k * m + c] = f.values[k];
            }
        }
        Ok(VectorField {
            grid: first.grid.clone(),
            m,
            values,
        })
    }

    /// Linear interpolation onto the grid with `2n − 1` points per axis.
    pub fn refine(&self) -> Result<VectorField> {
        let g = &self.grid;
        let fine = Grid::new(
            g.extents().to_vec(),
            g.n().iter().map(|&n| 2 * n - 1).collect(),
        )?;
        let m = self.m;
        let nx = g.nx();
        let mut values = vec![0.0; fine.len() * m];
        for k in 0..fine.len() {
            let (i, j) = fine.ij(k);
            let is = [i / 2, i.div_ceil(2)];
            let js = if g.dims() == 2 {
                [j / 2, j.div_ceil(2)]
            } else {
                [0, 0]
            };
            let out = &mut values[k * m..(k + 1) * m];
            for &a in &is {
                for &b in &js {
                    let src = self.node(b * nx + a);
                    for c in 0..m {
                        out[c] += 0.25 * src[c];
                    }
                }
            }
        }
        VectorField::new(fine, m, values)
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        write_field(w, &self.grid, self.m, &self.values)
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let (grid, m, values) = read_field(r)?;
        Ok(VectorField { grid, m, values })
    }
}

/// 3-point (1D) or 5-point (2D) Laplacian; the boundary ring is `NaN`.
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    let g = &f.grid;
    g.require_min(3)?;
    let inv_h2 = 1.0 / (g.h() * g.h());
    let nx = g.nx();
    let mut out = vec![f64::NAN; g.len()];
    for (k, o) in out.iter_mut().enumerate() {
        if g.is_boundary(k) {
            continue;
        }
        let v = &f.values;
        let mut s = v[k - 1] + v[k + 1] - 2.0 * v[k];
        if g.dims() == 2 {
            s += v[k - nx] + v[k + nx] - 2.0 * v[k];
        }
        *o = s * inv_h2;
    }
    ScalarField::new(g.clone(), out)
}

/// Discrete Laplacian of `f` at a single interior node.
pub fn laplacian_at(f: &ScalarField, k: usize) -> f64 {
    let g = &f.grid;
    let v = &f.values;
    let nx = g.nx();
    let mut s = v[k - 1] + v[k + 1] - 2.0 * v[k];
    if g.dims() == 2 {
        s += v[k - nx] + v[k + nx] - 2.0 * v[k];
    }
    s / (g.h() * g.h())
}

/// Derivative along `axis` at node `k`: central in the interior, one-sided
/// second order at the grid edge.
pub fn partial_at(grid: &Grid, values: &[f64], k: usize, axis: usize) -> f64 {
    let (i, j) = grid.ij(k);
    let (idx, n, stride) = if axis == 0 {
        (i, grid.nx(), 1)
    } else {
        (j, grid.ny(), grid.nx())
    };
    let h = grid.h();
    if idx > 0 && idx + 1 < n {
        (values[k + stride] - values[k - stride]) / (2.0 * h)
    } else if idx == 0 {
        (-3.0 * values[k] + 4.0 * values[k + stride] - values[k + 2 * stride]) / (2.0 * h)
    } else {
        (3.0 * values[k] - 4.0 * values[k - stride] + values[k - 2 * stride]) / (2.0 * h)
    }
}

/// Gradient with one component per axis.
pub fn gradient(f: &ScalarField) -> Result<VectorField> {
    let g = &f.grid;
    g.require_min(3)?;
    let d = g.dims();
    let mut values = Vec::with_capacity(g.len() * d);
    for k in 0..g.len() {
        for axis in 0..d {
            values.push(partial_at(g, &f.values, k, axis));
        }
    }
    VectorField::new(g.clone(), d, values)
}

/// Centered third difference along `axis`:
/// `(f(x+2h) - 2f(x+h) + 2f(x-h) - f(x-2h)) / (2h^3)`, `NaN` within two
/// nodes of the edge.
pub fn third_difference(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let g = &f.grid;
    if axis >= g.dims() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} on a {}D grid",
            g.dims()
        )));
    }
    let n = g.n()[axis];
    if n < 5 {
        return Err(Error::GridTooSmall { needed: 5, got: n });
    }
    let stride = if axis == 0 { 1 } else { g.nx() };
    let h = g.h();
    let denom = 2.0 * h * h * h;
    let v = &f.values;
    let out = (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let idx = if axis == 0 { i } else { j };
            if idx < 2 || idx + 2 >= n {
                f64::NAN
            } else {
                (v[k + 2 * stride] - 2.0 * v[k + stride] + 2.0 * v[k - stride] - v[k - 2 * stride])
                    / denom
            }
        })
        .collect();
    ScalarField::new(g.clone(), out)
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_field(mut w: impl Write, grid: &Grid, m: usize, values: &[f64]) -> Result<()> {
    let mut header = format!("{} {} {}", grid.dims(), m, grid.nx());
    if grid.dims() == 2 {
        write!(header, " {}", grid.ny()).unwrap();
    }
    for &(lo, hi) in grid.extents() {
        write!(header, " {} {}", fmt17(lo), fmt17(hi)).unwrap();
    }
    let mut buf = String::with_capacity(values.len() * 24 + header.len() + 1);
    buf.push_str(&header);
    buf.push('\n');
    for &v in values {
        buf.push_str(&fmt17(v));
        buf.push('\n');
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

fn read_field(r: impl Read) -> Result<(Grid, usize, Vec<f64>)> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::FieldFormat("empty file".into()))??;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::FieldFormat(format!("bad integer '{s}'")))
    };
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::FieldFormat(format!("bad number '{s}'")))
    };
    let dims = int(tok
        .first()
        .ok_or_else(|| Error::FieldFormat("missing header".into()))?)?;
    let expected = match dims {
        1 => 5,
        2 => 8,
        _ => {
            return Err(Error::FieldFormat(format!(
                "dims must be 1 or 2, got {dims}"
            )))
        }
    };
    if tok.len() != expected {
        return Err(Error::FieldFormat(format!(
            "header has {} tokens, expected {expected}",
            tok.len()
        )));
    }
    let m = int(tok[1])?;
    let grid = if dims == 1 {
        Grid::new_1d(num(tok[3])?, num(tok[4])?, int(tok[2])?)?
    } else {
        Grid::new_2d(
            num(tok[4])?,
            num(tok[5])?,
            num(tok[6])?,
            num(tok[7])?,
            int(tok[2])?,
            int(tok[3])?,
        )?
    };
    let mut values = Vec::with_capacity(grid.len() * m);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(num(t)?);
    }
    if values.len() != grid.len() * m {
        return Err(Error::FieldFormat(format!(
            "expected {} values, found {}",
            grid.len() * m,
            values.len()
        )));
    }
    Ok((grid, m, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(n: usize) -> Grid {
        Grid::cube(2, -1.0, 1.0, n).unwrap()
    }

    #[test]
    fn laplacian_of_quadratic_is_exact() {
        let f = ScalarField::from_fn(unit_box(17), |x, y| x * x + y * y);
        let l = laplacian(&f).unwrap();
        for (k, v) in l.values.iter().enumerate() {
            if f.grid.is_boundary(k) {
                assert!(v.is_nan());
            } else {
                assert!((v - 4.0).abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn laplacian_of_constant_and_cubic() {
        let g = Grid::new_1d(-1.0, 1.0, 33).unwrap();
        let c = ScalarField::from_fn(g.clone(), |_, _| 3.5);
        assert!(laplacian(&c)
            .unwrap()
            .values
            .iter()
            .filter(|v| !v.is_nan())
            .all(|v| *v == 0.0));
        let f = ScalarField::from_fn(g.clone(), |x, _| x * x * x);
        let l = laplacian(&f).unwrap();
        for k in 1..32 {
            assert!((l.values[k] - 6.0 * g.coord(k, 0)).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_linearity_exact_on_dyadic_data() {
        let g = Grid::cube(2, 0.0, 2.0, 9).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x, y| (4.0 * x * x - 3.0 * y).round());
        let h = ScalarField::from_fn(g.clone(), |x, y| (x * y * 8.0).round());
        let sum = f.zip_with(&h, |a, b| a + b).unwrap();
        let lf = laplacian(&f).unwrap();
        let lh = laplacian(&h).unwrap();
        let ls = laplacian(&sum).unwrap();
        for k in 0..g.len() {
            if !g.is_boundary(k) {
                assert_eq!(
                    (lf.values[k] + lh.values[k]).to_bits(),
                    ls.values[k].to_bits()
                );
            }
        }
    }

    #[test]
    fn gradient_examples() {
        let g = Grid::new_1d(-1.0, 1.0, 21).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x, _| x * x);
        let d = gradient(&f).unwrap();
        for k in 0..g.len() {
            assert!((d.values[k] - 2.0 * g.coord(k, 0)).abs() < 1e-12);
        }
        let g = Grid::new_1d(0.0, 1.0, 1001).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x, _| x.sin());
        let d = gradient(&f).unwrap();
        for k in 1..1000 {
            assert!((d.values[k] - g.coord(k, 0).cos()).abs() < 1e-6);
        }
        let c = ScalarField::from_fn(unit_box(5), |_, _| 2.0);
        assert!(gradient(&c).unwrap().values.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn third_difference_examples() {
        let g = Grid::new_1d(-1.0, 1.0, 41).unwrap();
        let cubic =
            third_difference(&ScalarField::from_fn(g.clone(), |x, _| x * x * x), 0).unwrap();
        let quad = third_difference(
            &ScalarField::from_fn(g.clone(), |x, _| 3.0 * x * x - x + 1.0),
            0,
        )
        .unwrap();
        let quartic =
            third_difference(&ScalarField::from_fn(g.clone(), |x, _| x.powi(4)), 0).unwrap();
        for k in 2..39 {
            assert!((cubic.values[k] - 6.0).abs() < 1e-9);
            assert!(quad.values[k].abs() < 1e-9);
            assert!((quartic.values[k] - 24.0 * g.coord(k, 0)).abs() < 1e-9);
        }
        assert!(cubic.values[1].is_nan() && cubic.values[39].is_nan());
    }

    #[test]
    fn small_grids_are_rejected() {
        let g = Grid::new_1d(0.0, 1.0, 2).unwrap();
        let f = ScalarField::zeros(g.clone());
        assert!(matches!(laplacian(&f), Err(Error::GridTooSmall { .. })));
        assert!(matches!(gradient(&f), Err(Error::GridTooSmall { .. })));
        let g = Grid::new_1d(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            third_difference(&ScalarField::zeros(g), 0),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn unequal_spacing_rejected() {
        assert!(Grid::new_2d(0.0, 1.0, 0.0, 1.0, 11, 12).is_err());
        assert!(Grid::new_2d(-1.0, 1.0, 0.0, 1.0, 21, 11).is_ok());
    }

    #[test]
    fn ball_nodes_counts() {
        let g = unit_box(21);
        let nodes = g.ball_nodes(&[0.0, 0.0], 0.1);
        // h = 0.1: center plus four neighbors
        assert_eq!(nodes.len(), 5);
    }

    #[test]
    fn header_and_bad_files() {
        let g = Grid::new_2d(0.0, 1.0, 0.0, 2.0, 3, 5).unwrap();
        let f = VectorField::zeros(g, 2);
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("2 2 3 5 "));
        assert_eq!(text.lines().count(), 1 + 30);
        assert!(ScalarField::read_from("1 1 3 0 1\n1\n2\n".as_bytes()).is_err());
        assert!(ScalarField::read_from("3 1 3 0 1\n".as_bytes()).is_err());
    }

    #[test]
    fn refine_reproduces_bilinear_data() {
        let f = |x: f64, y: f64| vec![1.0 + 2.0 * x - y + 0.5 * x * y, x];
        let coarse = VectorField::from_fn(unit_box(5), 2, f);
        let fine = coarse.refine().unwrap();
        assert_eq!(fine.grid.n(), &[9, 9]);
        for k in 0..fine.grid.len() {
            let p = fine.grid.point(k);
            let e = f(p[0], p[1]);
            for c in 0..2 {
                assert!((fine.node(k)[c] - e[c]).abs() < 1e-14);
            }
        }
        let line = VectorField::from_fn(Grid::new_1d(0.0, 1.0, 3).unwrap(), 1, |x, _| vec![x * x]);
        assert_eq!(
            line.refine().unwrap().values,
            vec![0.0, 0.125, 0.25, 0.625, 1.0]
        );
    }
}
