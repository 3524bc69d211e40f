//! `cmap`: experiment runner for constraint maps, obstacle problems and the
//! regularity diagnostics. Every subcommand prints its JSON report on stdout;
//! failures print `{"error": {"kind", "message"}}` on stderr and exit with
//! status 2 (configuration or usage) or 1 (anything else).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cmap_core::runner::{
    error_json, render_json, run, DensityKind, ExperimentConfig, ExperimentKind, ModulusKind,
};
use cmap_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cmap",
    version,
    about = "Constraint maps, obstacle problems and regularity diagnostics"
)]
#[command(after_help = "Environment: CMAP_THREADS caps the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// TOML experiment config.
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the scalar obstacle problem; writes w.field, min_diam_profile.csv and report.json.
    SolveObstacle {
        /// TOML config (the `experiment` key may be omitted).
        #[arg(long)]
        config: PathBuf,
    },
    /// Minimize the Dirichlet energy of maps into the closed target; writes u, V, w fields.
    SolveMap {
        /// TOML config (the `experiment` key may be omitted).
        #[arg(long)]
        config: PathBuf,
    },
    /// Per-point regularity report for a scalar field; writes regularity.csv.
    Regularity {
        /// Field file holding w.
        #[arg(long)]
        field: PathBuf,
        /// CSV of points `x,y`.
        #[arg(long)]
        points: PathBuf,
        /// TOML config for scales, tolerances and the output directory.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Coefficient field g (default: the constant `regularity.source`).
        #[arg(long)]
        g_field: Option<PathBuf>,
        /// Field checked for cubic growth.
        #[arg(long)]
        v_field: Option<PathBuf>,
    },
    /// Build a two-dimensional global solution and optionally verify it.
    Global2d {
        /// ellipse, parabola, half-plane, strip or line.
        #[arg(long)]
        kind: String,
        /// Comma-separated `name=value` pairs among a, alpha, beta, rotation, width.
        #[arg(long, default_value = "")]
        params: String,
        /// Check the Schwarz identity, the gradient bound and the inside-δ alternatives.
        #[arg(long)]
        verify: bool,
        /// Also write report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generalized Newtonian potential diagnostics.
    Potential {
        /// Run the growth-bound sweep over radii.
        #[arg(long)]
        check_bound: bool,
        #[arg(long, value_enum, default_value = "power")]
        modulus: Modulus,
        /// Scale δ of the growth modulus.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Exponent of the power modulus `t^(1-alpha)`.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "sqrt-profile")]
        density: Dens,
        /// Quadrature cells per side of the enclosing square.
        #[arg(long)]
        cells: Option<usize>,
        /// Also write report.json and per_r_profile.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the closed-form example and its third differences at 0.
    ReproduceExample {
        /// Grid spacing on [-1, 1]; must divide 2.
        #[arg(long)]
        h: Option<f64>,
        /// Also run the constrained solver at this spacing.
        #[arg(long)]
        solve: bool,
        /// TOML config supplying defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Modulus {
    Power,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dens {
    Zero,
    Linear,
    SqrtProfile,
}

fn load_or_default(path: Option<&PathBuf>, kind: ExperimentKind) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p, Some(kind)),
        None => Ok(ExperimentConfig::new(kind)),
    }
}

fn apply_params(cfg: &mut ExperimentConfig, params: &str) -> Result<()> {
    for pair in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::ConfigParse(format!("expected name=value, got '{pair}'")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::ConfigParse(format!("bad number in '{pair}'")))?;
        let g = &mut cfg.global2d;
        match name.trim() {
            "a" => g.a = Some(v),
            "alpha" => g.alpha = v,
            "beta" => g.beta = v,
            "rotation" => g.rotation = v,
            "width" => g.width = v,
            other => return Err(Error::ConfigParse(format!("unknown parameter '{other}'"))),
        }
    }
    Ok(())
}

fn config_for(command: Command) -> Result<ExperimentConfig> {
    Ok(match command {
        Command::Run { config } => ExperimentConfig::load(&config, None)?,
        Command::SolveObstacle { config } => {
            ExperimentConfig::load(&config, Some(ExperimentKind::SolveObstacle))?
        }
        Command::SolveMap { config } => {
            ExperimentConfig::load(&config, Some(ExperimentKind::SolveMap))?
        }
        Command::Regularity {
            field,
            points,
            config,
            g_field,
            v_field,
        } => {
            let mut cfg = load_or_default(config.as_ref(), ExperimentKind::Regularity)?;
            cfg.regularity.field = Some(field);
            cfg.regularity.points = Some(points);
            if g_field.is_some() {
                cfg.regularity.g_field = g_field;
            }
            if v_field.is_some() {
                cfg.regularity.v_field = v_field;
            }
            cfg
        }
        Command::Global2d {
            kind,
            params,
            verify,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Global2d);
            cfg.global2d.kind = kind;
            cfg.global2d.verify = verify;
            apply_params(&mut cfg, &params)?;
            cfg.output_dir = out;
            cfg
        }
        Command::Potential {
            check_bound,
            modulus,
            delta,
            alpha,
            density,
            cells,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Potential);
            let p = &mut cfg.potential;
            p.check_bound = check_bound;
            p.modulus = match modulus {
                Modulus::Power => ModulusKind::Power,
                Modulus::Log => ModulusKind::Log,
            };
            p.delta = delta;
            p.alpha = alpha;
            p.density = match density {
                Dens::Zero => DensityKind::Zero,
                Dens::Linear => DensityKind::Linear,
                Dens::SqrtProfile => DensityKind::SqrtProfile,
            };
            if let Some(c) = cells {
                p.cells_per_side = c;
            }
            cfg.output_dir = out;
            cfg
        }
        Command::ReproduceExample {
            h,
            solve,
            config,
            out,
        } => {
            let mut cfg = load_or_default(config.as_ref(), ExperimentKind::ReproduceExample)?;
            if let Some(h) = h {
                cfg.example.h = h;
            }
            cfg.example.solve |= solve;
            if out.is_some() {
                cfg.output_dir = out;
            }
            cfg
        }
    })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("CMAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::ConfigParse(format!("CMAP_THREADS = '{raw}' is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn fail(e: &Error) -> ExitCode {
    eprint!("{}", render_json(&error_json(e)));
    match e {
        Error::ConfigParse(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(&Error::ConfigParse(e.kind().to_string()));
        }
    };
    let result = configure_threads()
        .and_then(|()| config_for(cli.command))
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(out) => {
            print!("{}", render_json(&out.report));
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
