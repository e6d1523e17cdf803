use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use hyprep_core::forward::{forward, realize_real, verify};
use hyprep_core::hyperbolicity::{classify, is_hyperbolic, Classification};
use hyprep_core::intersection::intersection_set;
use hyprep_core::invariant::{eigenspace_dim_formula, invariant_dim};
use hyprep_core::numrange::{boundary_sample, curve_sample, DEFAULT_ANGLES};
use hyprep_core::represent::represent;
use hyprep_core::{Config, Error, InvariantForm, ShiftMatrix};

mod render;

#[derive(Parser)]
#[command(name = "hyprep", version, about = "Cyclic weighted shift representations of invariant hyperbolic curves")]
struct Cli {
    /// JSON file with configuration overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a form and test hyperbolicity with respect to (1,0,0).
    Check {
        #[arg(long)]
        input: PathBuf,
    },
    /// Find a shift matrix whose pencil determinant is the form.
    Represent {
        #[arg(long)]
        input: PathBuf,
        /// Also write the shift matrix alone to this file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Final verification tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Invariant coefficients of `det(tI + (u/2)A* + (v/2)A)`.
    Forward {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare a form with the form of a shift matrix.
    Verify {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        shift: PathBuf,
    },
    /// Gauge a shift matrix with real weight product to real weights.
    Realize {
        #[arg(long)]
        input: PathBuf,
    },
    /// Intersection points of the curve with its polar along (1,0,0).
    Points {
        #[arg(long)]
        input: PathBuf,
    },
    /// Support function samples of the numerical range.
    Numrange {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ANGLES)]
        angles: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Real points of the curve in the chart t = 1.
    Curve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ANGLES)]
        angles: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Dimensions of the invariant space and of the degree n-1 eigenspaces.
    Dims {
        #[arg(long)]
        n: usize,
    },
}

/// Failure with its exit code.
enum Fail {
    Verification(String),
    Input(String),
    Numerical(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Verification(_) => 1,
            Fail::Input(_) => 2,
            Fail::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Verification(m) | Fail::Input(m) | Fail::Numerical(m) => m,
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Fail::Input(e.to_string())
        } else {
            Fail::Numerical(e.to_string())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T) -> Result<(), Fail> {
    let text = serde_json::to_string(value).map_err(|e| Fail::Numerical(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn load_config(cli: &Cli) -> Result<Config, Fail> {
    let mut cfg: Config = match &cli.config {
        Some(path) => read_json(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Command::Represent { tol: Some(tol), .. } = cli.command {
        cfg.tol_final = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct CheckReport {
    hyperbolic: bool,
    classification: Option<Classification>,
}

#[derive(Serialize)]
struct DimsReport {
    invariant_dim: usize,
    eigenspace_dims: Vec<usize>,
}

fn run(cli: &Cli) -> Result<(), Fail> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Fail::Input(format!("thread pool: {e}")))?;
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Check { input } => {
            let form: InvariantForm = read_json(input)?;
            let hyperbolic = is_hyperbolic(&form, &cfg);
            let classification = if hyperbolic { Some(classify(&form, &cfg)?) } else { None };
            emit(&CheckReport { hyperbolic, classification })?;
            if !hyperbolic {
                return Err(Fail::Verification("form is not hyperbolic with respect to (1,0,0)".into()));
            }
        }
        Command::Represent { input, output, .. } => {
            let form: InvariantForm = read_json(input)?;
            let rep = represent(&form, &cfg)?;
            if let Some(path) = output {
                let text = serde_json::to_string(&rep.shift).map_err(|e| Fail::Numerical(e.to_string()))?;
                write_file(path, &(text + "\n"))?;
            }
            emit(&rep)?;
        }
        Command::Forward { input } => {
            let w: ShiftMatrix = read_json(input)?;
            emit(&forward(&w)?)?;
        }
        Command::Verify { form, shift } => {
            let form: InvariantForm = read_json(form)?;
            let w: ShiftMatrix = read_json(shift)?;
            let report = verify(&form, &w, &cfg)?;
            emit(&report)?;
            if !report.passes(cfg.tol_final) {
                return Err(Fail::Verification(format!(
                    "max coefficient error {:e} exceeds {:e}",
                    report.max_abs_err, cfg.tol_final
                )));
            }
        }
        Command::Realize { input } => {
            let w: ShiftMatrix = read_json(input)?;
            match realize_real(&w, cfg.tol_final) {
                Ok(r) => emit(&r)?,
                Err(e @ Error::NotDihedral(_)) => return Err(Fail::Verification(e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Points { input } => {
            let form: InvariantForm = read_json(input)?;
            let flips = vec![false; form.n];
            emit(&intersection_set(&form, &flips, &cfg)?)?;
        }
        Command::Numrange { input, angles, csv, svg } => {
            let w: ShiftMatrix = read_json(input)?;
            let sample = boundary_sample(&w, *angles)?;
            if let Some(path) = csv {
                write_file(path, &render::boundary_csv(&sample).map_err(Fail::Numerical)?)?;
            }
            if let Some(path) = svg {
                write_file(path, &render::boundary_svg(&sample))?;
            }
            emit(&sample)?;
        }
        Command::Curve { input, angles, csv, svg } => {
            let form: InvariantForm = read_json(input)?;
            let points = curve_sample(&form, *angles, &cfg)?;
            if let Some(path) = csv {
                write_file(path, &render::curve_csv(&points).map_err(Fail::Numerical)?)?;
            }
            if let Some(path) = svg {
                write_file(path, &render::curve_svg(&points))?;
            }
            emit(&points)?;
        }
        Command::Dims { n } => {
            if *n < 3 {
                return Err(Fail::Input(format!("degree n = {n} is below 3")));
            }
            let eigenspace_dims = (0..*n).map(|ell| eigenspace_dim_formula(*n, ell)).collect();
            emit(&DimsReport { invariant_dim: invariant_dim(*n), eigenspace_dims })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            eprintln!("hyprep: {}", fail.message());
            ExitCode::from(fail.code())
        }
    }
}
