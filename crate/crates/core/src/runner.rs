//! Configuration-driven experiment runner behind the `cmap` binary.
//!
//! A run reads a TOML config, executes one experiment and writes its
//! artifacts (field files, CSV tables, `report.json`) into the output
//! directory. Reports contain no timings and embed the resolved config, so
//! rerunning a config reproduces them byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constraint_map::{
    coefficients, example_map, example_theta, minimize_energy, one_sided_third_difference,
    ConstraintMapSolution, MapDirichlet, MapOptions,
};
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::geometry::{TargetKind, TargetManifold};
use crate::global2d::{
    inside_delta_check, dyadic_window, make_global, schwarz_boundary_residual, verify_up,
    GlobalKind, GlobalParams,
};
use crate::obstacle::{
    classify_point, masked_min_diameter, radial_solution, solve_obstacle, ClassifyOptions,
    Dirichlet, ObstacleSolution, PointClass, SorOptions,
};
use crate::potential::{
    verify_quad_bound, Density, FnDensity, GrowthForm, GrowthModulus, Potential, QuadratureOptions,
};
use crate::regularity::{cubic_growth_check, gap_test, growth_exponent, GapOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SolveObstacle,
    SolveMap,
    Regularity,
    Global2d,
    Potential,
    ReproduceExample,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SolveObstacle => "solve-obstacle",
            ExperimentKind::SolveMap => "solve-map",
            ExperimentKind::Regularity => "regularity",
            ExperimentKind::Global2d => "global2d",
            ExperimentKind::Potential => "potential",
            ExperimentKind::ReproduceExample => "reproduce-example",
        }
    }
}

/// Uniform grid `[min, max]^dims` with `n` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub dims: usize,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dims: 2,
            min: -1.0,
            max: 1.0,
            n: 129,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSpec {
    pub target: TargetKind,
    pub ambient_dim: usize,
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec {
            target: TargetKind::SphereExteriorComplement,
            ambient_dim: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Solver stopping tolerance (nodal change per sweep is compared to `solver·h²`).
    pub solver: f64,
    pub max_iter: usize,
    pub tol_g: f64,
    pub tau: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: 1e-8,
            max_iter: 500_000,
            tol_g: 1e-6,
            tau: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstacleBoundary {
    /// Radial solution with contact disk of radius `r0`, scaled by `source`.
    Radial,
    /// `source·x²/2`: contact on the line `x = 0`.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleSpec {
    /// Constant source `g`.
    pub source: f64,
    pub boundary: ObstacleBoundary,
    pub r0: f64,
    pub omega: f64,
    /// Point whose nearest free-boundary node anchors the min-diameter profile.
    pub x0: [f64; 2],
}

impl Default for ObstacleSpec {
    fn default() -> Self {
        ObstacleSpec {
            source: 1.0,
            boundary: ObstacleBoundary::Radial,
            r0: 0.25,
            omega: 1.5,
            x0: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapBoundary {
    /// The closed-form example along the direction `(cos angle, sin angle)`.
    Example,
    /// `(3 + x² − y², 2xy)`, which stays away from the target boundary.
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapSpec {
    pub boundary: MapBoundary,
    pub angle: f64,
}

impl Default for MapSpec {
    fn default() -> Self {
        MapSpec {
            boundary: MapBoundary::Example,
            angle: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularitySpec {
    /// Scalar field `w` to analyze.
    pub field: Option<PathBuf>,
    /// CSV of points `x,y` (a header line is allowed).
    pub points: Option<PathBuf>,
    /// Coefficient field `g`; a constant `source` is used when absent.
    pub g_field: Option<PathBuf>,
    pub source: f64,
    /// Scalar field checked for cubic growth (for example a component of `V`).
    pub v_field: Option<PathBuf>,
    pub degree: usize,
    pub sigma: f64,
    pub gap: bool,
}

impl Default for RegularitySpec {
    fn default() -> Self {
        RegularitySpec {
            field: None,
            points: None,
            g_field: None,
            source: 1.0,
            v_field: None,
            degree: 1,
            sigma: 0.5,
            gap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Global2dSpec {
    pub kind: String,
    /// Axis ratio; defaults to 0 for parabolas and 1/2 for ellipses.
    pub a: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub rotation: f64,
    pub width: f64,
    /// Boundary samples for the Schwarz identity.
    pub samples: usize,
    pub verify: bool,
    /// Constant of the inside-`B_δ` alternatives.
    pub c0: f64,
}

impl Default for Global2dSpec {
    fn default() -> Self {
        Global2dSpec {
            kind: "ellipse".into(),
            a: None,
            alpha: 1.0,
            beta: 0.2,
            rotation: 0.0,
            width: 1.0,
            samples: 100,
            verify: false,
            c0: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusKind {
    Power,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    Zero,
    /// `f = y_0`.
    Linear,
    /// `f = y_0 (1 + (|y|/δ)⁴)^{−1/8}`.
    SqrtProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSpec {
    pub modulus: ModulusKind,
    pub alpha: f64,
    pub delta: f64,
    pub density: DensityKind,
    pub cells_per_side: usize,
    pub subdivision: usize,
    pub rings: usize,
    pub check_bound: bool,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        PotentialSpec {
            modulus: ModulusKind::Power,
            alpha: 0.5,
            delta: 0.05,
            density: DensityKind::SqrtProfile,
            cells_per_side: q.cells_per_side,
            subdivision: q.subdivision,
            rings: 8,
            check_bound: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExampleSpec {
    pub h: f64,
    /// Also run the constrained solver at this spacing.
    pub solve: bool,
}

impl Default for ExampleSpec {
    fn default() -> Self {
        ExampleSpec {
            h: 1e-3,
            solve: false,
        }
    }
}

fn default_scales() -> Vec<f64> {
    vec![0.5, 0.25, 0.125, 0.0625]
}

/// A complete experiment description. Sections irrelevant to the chosen
/// experiment are accepted and ignored, but still embedded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Dyadic, strictly decreasing analysis radii.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub obstacle: ObstacleSpec,
    #[serde(default)]
    pub map: MapSpec,
    #[serde(default)]
    pub regularity: RegularitySpec,
    #[serde(default)]
    pub global2d: Global2dSpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub example: ExampleSpec,
}

impl ExperimentConfig {
    /// Defaults for `kind` with every section filled in.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment: kind,
            output_dir: None,
            scales: default_scales(),
            grid: GridSpec::default(),
            target: TargetSpec::default(),
            tolerances: Tolerances::default(),
            obstacle: ObstacleSpec::default(),
            map: MapSpec::default(),
            regularity: RegularitySpec::default(),
            global2d: Global2dSpec::default(),
            potential: PotentialSpec::default(),
            example: ExampleSpec::default(),
        }
    }

    /// Parses TOML text. Unknown keys are rejected. When `kind` is given it
    /// fills in a missing `experiment` key and must agree with a present one.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::ConfigParse(e.to_string().trim_end().to_string())
        })?;
        if let Some(k) = kind {
            match table.get("experiment").and_then(|v| v.as_str()) {
                None => {
                    table.insert("experiment".into(), toml::Value::String(k.name().into()));
                }
                Some(name) if name != k.name() => {
                    return Err(Error::ConfigParse(format!(
                        "config is for '{name}', not '{}'",
                        k.name()
                    )));
                }
                Some(_) => {}
            }
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string().trim_end().to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, kind)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        rebase(&mut cfg.output_dir);
        rebase(&mut cfg.regularity.field);
        rebase(&mut cfg.regularity.points);
        rebase(&mut cfg.regularity.g_field);
        rebase(&mut cfg.regularity.v_field);
        Ok(cfg)
    }

    /// Checks the invariants every experiment relies on.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigParse(m));
        let t = &self.tolerances;
        for (name, v) in [("solver", t.solver), ("tol_g", t.tol_g), ("tau", t.tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} = {v} must be positive"));
            }
        }
        if t.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if self.scales.is_empty() {
            return bad("scales is empty".into());
        }
        if self.scales.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return bad("scales must be positive".into());
        }
        if self
            .scales
            .windows(2)
            .any(|w| (w[0] / w[1] - 2.0).abs() > 1e-9)
        {
            return bad("scales must be dyadic and decreasing (each half the previous)".into());
        }
        let g = &self.grid;
        if !(g.dims == 1 || g.dims == 2) {
            return bad(format!("grid.dims = {} (must be 1 or 2)", g.dims));
        }
        if g.n < 3 || !(g.max > g.min) {
            return bad("grid needs n >= 3 and max > min".into());
        }
        let reg = &self.regularity;
        for p in [&reg.field, &reg.points, &reg.g_field, &reg.v_field]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return bad(format!("referenced file {} does not exist", p.display()));
            }
        }
        if self.experiment == ExperimentKind::Regularity
            && (reg.field.is_none() || reg.points.is_none())
        {
            return bad("regularity needs both a field and a points file".into());
        }
        if matches!(
            self.experiment,
            ExperimentKind::SolveObstacle | ExperimentKind::SolveMap
        ) && self.output_dir.is_none()
        {
            return bad("output_dir is required for solves".into());
        }
        if !(self.example.h > 0.0 && self.example.h <= 0.25) {
            return bad(format!(
                "example.h = {} must lie in (0, 0.25]",
                self.example.h
            ));
        }
        Ok(())
    }

    fn grid(&self) -> Result<Grid> {
        Grid::cube(self.grid.dims, self.grid.min, self.grid.max, self.grid.n)
    }
}

/// Outcome of a run: the report (also written as `report.json`) and the
/// artifact files written, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Value,
    pub files: Vec<String>,
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render_json(v: &Value) -> String {
    // serde_json's default map is ordered by key.
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } })
}

struct Artifacts {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Artifacts {
            dir: dir.map(Path::to_path_buf),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), bytes)?;
            self.files.push(name.to_string());
        }
        Ok(())
    }

    fn field(&mut self, name: &str, f: &ScalarField) -> Result<()> {
        let mut buf = Vec::new();
        f.write_to(&mut buf)?;
        self.write(name, &buf)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Runs one experiment, writing artifacts and `report.json` when an output
/// directory is configured.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut art = Artifacts::new(cfg.output_dir.as_deref())?;
    let results = match cfg.experiment {
        ExperimentKind::SolveObstacle => run_obstacle(cfg, &mut art)?,
        ExperimentKind::SolveMap => run_map(cfg, &mut art)?,
        ExperimentKind::Regularity => run_regularity(cfg, &mut art)?,
        ExperimentKind::Global2d => run_global2d(cfg)?,
        ExperimentKind::Potential => run_potential(cfg, &mut art)?,
        ExperimentKind::ReproduceExample => run_example(cfg, &mut art)?,
    };
    let config = serde_json::to_value(cfg)
        .map_err(|e| Error::InvalidArgument(format!("config serialization: {e}")))?;
    let report = json!({
        "config": config,
        "experiment": cfg.experiment.name(),
        "results": results,
    });
    art.write("report.json", render_json(&report).as_bytes())?;
    Ok(RunOutput {
        report,
        files: art.files,
    })
}

fn run_obstacle(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value> {
    let spec = &cfg.obstacle;
    if cfg.grid.dims != 2 {
        return Err(Error::ConfigParse("solve-obstacle needs a 2D grid".into()));
    }
    if !(spec.source >= 0.0) {
        return Err(Error::NegativeSource { node: 0 });
    }
    let grid = cfg.grid()?;
    let g = ScalarField::from_fn(grid.clone(), |_, _| spec.source);
    let bc = match spec.boundary {
        ObstacleBoundary::Radial => Dirichlet::boundary_ring(&grid, |x, y| {
            spec.source * radial_solution(x.hypot(y), spec.r0)
        }),
        ObstacleBoundary::Quadratic => {
            Dirichlet::boundary_ring(&grid, |x, _| spec.source * x * x / 2.0)
        }
    };
    let opts = SorOptions {
        tol: cfg.tolerances.solver,
        max_iter: cfg.tolerances.max_iter,
        omega: spec.omega,
    };
    let sol = solve_obstacle(&g, &bc, &opts)?.ensure_converged()?;
    art.field("w.field", &sol.w)?;
    let mut profile = Vec::new();
    let mut csv = String::from("r,min_diam\n");
    let nearest = sol.fb_points.iter().copied().min_by(|&a, &b| {
        let d = |k: usize| {
            let p = grid.point(k);
            (p[0] - spec.x0[0]).hypot(p[1] - spec.x0[1])
        };
        d(a).total_cmp(&d(b))
    });
    if let Some(node) = nearest {
        let center = grid.point(node);
        for &r in &cfg.scales {
            let md = masked_min_diameter(&grid, &sol.contact_mask, &center, r);
            let _ = writeln!(csv, "{r:e},{md:e}");
            profile.push(json!({ "r": r, "min_diam": md }));
        }
    }
    art.write("min_diam_profile.csv", csv.as_bytes())?;
    Ok(json!({
        "residual": sol.residual,
        "iterations": sol.iterations,
        "fb_point_count": sol.fb_points.len(),
        "min_diam_center": nearest.map(|k| grid.point(k)),
        "min_diam_profile": profile,
    }))
}

/// Largest `−g` and largest `|a| − 2√g` over contact nodes.
fn contact_diagnostics(target: &TargetManifold, sol: &ConstraintMapSolution) -> Result<(f64, f64)> {
    let coef = coefficients(target, &sol.u)?;
    let mut min_g = f64::INFINITY;
    let mut excess = f64::NEG_INFINITY;
    for k in 0..sol.u.grid.len() {
        let g = coef.g.values[k];
        if !sol.contact_mask[k] || !g.is_finite() {
            continue;
        }
        min_g = min_g.min(g);
        // the bound holds per axis: |a^i| ≤ 2√g for each i.
        for ai in &coef.a {
            let norm = ai.node(k).iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm.is_finite() {
                excess = excess.max(norm - 2.0 * g.max(0.0).sqrt());
            }
        }
    }
    Ok((min_g, excess))
}

fn run_map(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value> {
    let t = &cfg.target;
    let target = TargetManifold::with_kind(t.target, t.ambient_dim);
    let grid = cfg.grid()?;
    let m = t.ambient_dim;
    let (c, s) = (cfg.map.angle.cos(), cfg.map.angle.sin());
    let boundary = |x: f64, y: f64| -> Vec<f64> {
        let mut v = match cfg.map.boundary {
            MapBoundary::Example => example_map(c * x + s * y).to_vec(),
            MapBoundary::Harmonic => vec![3.0 + x * x - y * y, 2.0 * x * y],
        };
        v.resize(m, 0.0);
        v
    };
    let bc = MapDirichlet::boundary_ring(&grid, m, boundary);
    let opts = MapOptions {
        tol: cfg.tolerances.solver,
        max_iter: cfg.tolerances.max_iter,
        ..Default::default()
    };
    let sol = minimize_energy(&target, &bc, &grid, &opts)?.ensure_converged()?;
    for c in 0..m {
        art.field(&format!("u{c}.field"), &sol.u.component(c))?;
        art.field(&format!("V{c}.field"), &sol.v.component(c))?;
    }
    art.field("w.field", &sol.w)?;
    let (min_g, excess) = contact_diagnostics(&target, &sol)?;
    Ok(json!({
        "energy": sol.energy,
        "el_residual": sol.el_residual,
        "contact_fraction": sol.contact_fraction(),
        "iterations": sol.iterations,
        "min_contact_g": finite_or_null(min_g),
        "max_coefficient_excess": finite_or_null(excess),
    }))
}

fn read_field(path: &Path) -> Result<ScalarField> {
    ScalarField::read_from(fs::File::open(path)?)
}

fn read_points(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.parse()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => out.push([v[0], v[1]]),
            Ok(v) if v.len() == 1 => out.push([v[0], 0.0]),
            Err(_) if i == 0 => continue,
            _ => {
                return Err(Error::ConfigParse(format!(
                    "{}:{}: expected 'x,y'",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(out)
}

fn run_regularity(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value> {
    let spec = &cfg.regularity;
    let w = read_field(spec.field.as_deref().expect("validated"))?;
    let points = read_points(spec.points.as_deref().expect("validated"))?;
    let g = match &spec.g_field {
        Some(p) => read_field(p)?,
        None => ScalarField::from_fn(w.grid.clone(), |_, _| spec.source),
    };
    let v = spec.v_field.as_deref().map(read_field).transpose()?;
    let sol = ObstacleSolution::from_field(w.clone(), w.h() * w.h());
    let copts = ClassifyOptions {
        tol_g: cfg.tolerances.tol_g,
        tau: cfg.tolerances.tau,
        width_slack: None,
    };
    let gopts = GapOptions {
        sigma: spec.sigma,
        tol_g: cfg.tolerances.tol_g,
        ..Default::default()
    };
    let point_report = |p: &[f64; 2]| -> Result<Value> {
        let class = classify_point(&sol, &g, p, &cfg.scales, &copts)?;
        let node = w.grid.point(class.node);
        let x0 = &node[..w.grid.dims()];
        let exponent = growth_exponent(&w, x0, spec.degree, &cfg.scales)?.exponent;
        let lambda = if spec.gap && w.grid.dims() == 2 {
            match gap_test(&w, &g, x0, &cfg.scales, &gopts) {
                Ok(prof) => Some(prof.max_lambda()),
                Err(Error::ZeroCoefficient(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let cubic = match &v {
            Some(v) => Some(cubic_growth_check(v, x0, &cfg.scales)?.max_ratio),
            None => None,
        };
        Ok(json!({
            "point": p,
            "node_point": x0,
            "exponent": finite_or_null(exponent),
            "classification": match class.class {
                PointClass::Regular => "regular",
                PointClass::Singular => "singular",
            },
            "r0": class.r0.unwrap_or(0.0),
            "width_profile": class.profile,
            "max_lambda": lambda,
            "max_cubic_ratio": cubic,
        }))
    };
    // Points are independent; `collect` keeps the input order.
    let rows: Vec<Value> = points
        .par_iter()
        .map(|p| {
            point_report(p).unwrap_or_else(
                |e| json!({ "point": p, "error": e.kind(), "message": e.to_string() }),
            )
        })
        .collect();
    let mut csv = String::from("x,y,exponent,classification,r0,max_lambda,max_cubic_ratio,error\n");
    for r in &rows {
        let num = |k: &str| r[k].as_f64();
        // A null exponent on a good row is the +∞ of an exact fit.
        let exp = match (num("exponent"), r.get("error")) {
            (Some(e), _) => format!("{e:e}"),
            (None, None) => "inf".to_string(),
            (None, Some(_)) => String::new(),
        };
        let _ = writeln!(
            csv,
            "{:e},{:e},{exp},{},{},{},{},{}",
            r["point"][0].as_f64().unwrap_or(f64::NAN),
            r["point"][1].as_f64().unwrap_or(f64::NAN),
            r["classification"].as_str().unwrap_or(""),
            fmt_opt(num("r0")),
            fmt_opt(num("max_lambda")),
            fmt_opt(num("max_cubic_ratio")),
            r["error"].as_str().unwrap_or(""),
        );
    }
    art.write("regularity.csv", csv.as_bytes())?;
    Ok(json!({ "points": rows }))
}

fn run_global2d(cfg: &ExperimentConfig) -> Result<Value> {
    let spec = &cfg.global2d;
    let kind = GlobalKind::parse(&spec.kind).map_err(|e| Error::ConfigParse(e.to_string()))?;
    let gs = make_global(
        kind,
        GlobalParams {
            a: spec.a.unwrap_or(if kind == GlobalKind::Ellipse {
                0.5
            } else {
                0.0
            }),
            alpha: spec.alpha,
            beta: spec.beta,
            rotation: spec.rotation,
            width: spec.width,
        },
    )?;
    let mut out = json!({
        "kind": kind.name(),
        "delta": gs.delta,
        "mu": gs.mu,
        "case": gs.case,
    });
    if spec.verify {
        let schwarz = if kind.is_conic() {
            Some(schwarz_boundary_residual(&gs, spec.samples)?)
        } else {
            None
        };
        let (ratio, profile) = verify_up(&gs, &dyadic_window(gs.delta), 10_000)?;
        let inside = inside_delta_check(&gs, spec.c0, 201);
        out["max_schwarz_residual"] = json!(schwarz);
        out["max_Up_ratio"] = json!(ratio);
        out["Up_profile"] = json!(profile);
        out["inside_case"] = json!(inside.case);
        out["inside"] = serde_json::to_value(&inside).unwrap_or(Value::Null);
    }
    Ok(out)
}

fn build_density(spec: &PotentialSpec) -> Box<dyn Density> {
    let delta = spec.delta;
    match spec.density {
        DensityKind::Zero => Box::new(FnDensity {
            f: |_: [f64; 2]| 0.0,
            df: |_: [f64; 2]| 0.0,
        }),
        DensityKind::Linear => Box::new(FnDensity {
            f: |y: [f64; 2]| y[0],
            df: |_: [f64; 2]| 1.0,
        }),
        DensityKind::SqrtProfile => Box::new(FnDensity {
            f: move |y: [f64; 2]| {
                let s = y[0].hypot(y[1]) / delta;
                y[0] * (1.0 + s.powi(4)).powf(-0.125)
            },
            df: move |y: [f64; 2]| {
                let r = y[0].hypot(y[1]);
                if r == 0.0 {
                    return 1.0;
                }
                let s = r / delta;
                let m = (1.0 + s.powi(4)).powf(-0.125);
                let dm = -0.5 * s.powi(3) * (1.0 + s.powi(4)).powf(-1.125);
                m + y[0] * y[0] / (r * delta) * dm
            },
        }),
    }
}

impl Density for Box<dyn Density> {
    fn value(&self, y: [f64; 2]) -> f64 {
        (**self).value(y)
    }
    fn derivative(&self, y: [f64; 2]) -> f64 {
        (**self).derivative(y)
    }
}

/// Radii `0.8·2^{−k/2}`, `k = 0..8`, above `δ`.
pub fn potential_radii(delta: f64) -> Vec<f64> {
    (0..8)
        .map(|k| 0.8 / 2f64.powf(0.5 * k as f64))
        .filter(|&r| r > delta)
        .collect()
}

fn run_potential(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value> {
    let spec = &cfg.potential;
    let opts = QuadratureOptions {
        cells_per_side: spec.cells_per_side,
        subdivision: spec.subdivision,
    };
    let form = match spec.modulus {
        ModulusKind::Power => GrowthForm::Power { alpha: spec.alpha },
        ModulusKind::Log => GrowthForm::LogConstant,
    };
    let modulus = GrowthModulus::new(form, spec.delta)?;
    let density = build_density(spec);
    let p = Potential::new(&density, opts)?;
    let phi0 = p.phi([0.0, 0.0])?;
    let grad0 = p.grad_phi([0.0, 0.0])?;
    let mut out = json!({
        "phi_origin": phi0,
        "grad_phi_origin": grad0,
        "node_count": p.node_count(),
    });
    if spec.check_bound {
        let rep = verify_quad_bound(
            &modulus,
            &density,
            &potential_radii(spec.delta),
            opts,
            spec.rings,
        )?;
        let mut csv = String::from("r,sup_phi,ratio\n");
        for (r, s, q) in &rep.profile {
            let _ = writeln!(csv, "{r:e},{s:e},{q:e}");
        }
        art.write("per_r_profile.csv", csv.as_bytes())?;
        out["max_ratio"] = json!(rep.max_ratio);
        out["per_r_profile"] = rep
            .profile
            .iter()
            .map(|(r, s, q)| json!({ "r": r, "sup_phi": s, "ratio": q }))
            .collect();
    }
    Ok(out)
}

fn run_example(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value> {
    let h = cfg.example.h;
    let n = (2.0 / h).round() as usize + 1;
    if ((n - 1) as f64 * h - 2.0).abs() > 1e-9 {
        return Err(Error::ConfigParse(format!("example.h = {h} must divide 2")));
    }
    let grid = Grid::new_1d(-1.0, 1.0, n)?;
    let origin = grid.nearest_node(&[0.0]);
    let theta = ScalarField::from_fn(grid.clone(), |x, _| example_theta(x));
    let mut out = json!({
        "h": h,
        "nodes": n,
        "theta_third_left": one_sided_third_difference(&theta, origin, false)?,
        "theta_third_right": one_sided_third_difference(&theta, origin, true)?,
    });
    let mut csv = String::from("x,theta\n");
    for k in 0..n {
        let _ = writeln!(csv, "{:e},{:e}", grid.coord(k, 0), theta.values[k]);
    }
    art.write("theta.csv", csv.as_bytes())?;
    if cfg.example.solve {
        let target = TargetManifold::sphere(2);
        let bc = MapDirichlet::boundary_ring(&grid, 2, |x, _| example_map(x).to_vec());
        let opts = MapOptions {
            tol: cfg.tolerances.solver,
            max_iter: cfg.tolerances.max_iter,
            ..Default::default()
        };
        let sol = minimize_energy(&target, &bc, &grid, &opts)?.ensure_converged()?;
        let solved = solved_theta(&sol);
        let err = (0..n)
            .map(|k| {
                let e = example_map(grid.coord(k, 0));
                let u = sol.u.node(k);
                (u[0] - e[0]).hypot(u[1] - e[1])
            })
            .fold(0.0, f64::max);
        out["solver"] = json!({
            "sup_error": err,
            "iterations": sol.iterations,
            "energy": sol.energy,
            "theta_third_left": one_sided_third_difference(&solved, origin, false)?,
            "theta_third_right": one_sided_third_difference(&solved, origin, true)?,
        });
        art.field("theta_solved.field", &solved)?;
    }
    Ok(out)
}

/// Angle `θ` with `V = (cos θ, −sin θ)` of a solved planar map.
pub fn solved_theta(sol: &ConstraintMapSolution) -> ScalarField {
    let grid = sol.u.grid.clone();
    let values = (0..grid.len())
        .map(|k| {
            let u = sol.u.node(k);
            (-u[1]).atan2(u[0])
        })
        .collect();
    ScalarField { grid, values }
}
