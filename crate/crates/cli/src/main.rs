use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypoheat::app::{self, Artifact, Format, RunConfig};
use hypoheat::oracle::{DiffusionConfig, GridSpec};
use hypoheat::saturation::DerivativeSpec;
use hypoheat::suite::{Profile, Status};
use hypoheat::Error;

/// Heat kernels of homogeneous Hörmander operators `sum X_j^2 - d/dt`.
///
/// Exit status: 0 success, 1 a check failed, 2 usage or input error,
/// 3 numerical non-convergence.
#[derive(Parser)]
#[command(name = "hypoheat", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HH_THREADS")]
    threads: Option<usize>,
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file with tolerances and seeds.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Lift a vector-field system to a Carnot group and verify the identities.
    Lift { system: PathBuf },
    /// Run the verification suite.
    Verify {
        system: PathBuf,
        /// Fewer sample points and paths, same tolerances.
        #[arg(long)]
        quick: bool,
        /// Comma-separated check ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Heat kernel of the lifted group.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// The saturated kernel Gamma(t, x; s, y).
    #[command(subcommand)]
    Gamma(GammaCommand),
    /// Bounded solution of the Cauchy problem with initial datum phi.
    Cauchy {
        system: PathBuf,
        /// one, zero, gauss, or a tabulated datum file.
        #[arg(long)]
        datum: String,
        #[arg(long)]
        t: f64,
        /// Evaluation point; repeat for several.
        #[arg(long, allow_hyphen_values = true)]
        x: Vec<Point>,
        /// Lower corner of an evaluation grid.
        #[arg(long, allow_hyphen_values = true, requires = "hi")]
        lo: Option<Point>,
        #[arg(long, allow_hyphen_values = true, requires = "lo")]
        hi: Option<Point>,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Independent reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum KernelCommand {
    /// gamma(t, g) with g in split coordinates.
    Eval {
        system: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        g: Point,
    },
    /// Check the kernel contract numerically.
    Selftest { system: PathBuf },
}

#[derive(Args)]
struct Pole {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: Point,
    #[arg(long)]
    s: f64,
}

#[derive(Args)]
struct BoxArgs {
    #[arg(long, allow_hyphen_values = true)]
    lo: Point,
    #[arg(long, allow_hyphen_values = true)]
    hi: Point,
    /// Nodes per axis.
    #[arg(long, default_value_t = 41)]
    points: usize,
}

#[derive(Subcommand)]
enum GammaCommand {
    /// One value, or a derivative with --derivative.
    Eval {
        system: PathBuf,
        #[command(flatten)]
        pole: Pole,
        #[arg(long, allow_hyphen_values = true)]
        y: Point,
        /// For example `alpha=1,y=1.2,x=1` (words dot-separated).
        #[arg(long)]
        derivative: Option<String>,
    },
    /// Values on a regular y-grid; CSV columns s, y1..yn, gamma.
    Grid {
        system: PathBuf,
        #[command(flatten)]
        pole: Pole,
        #[command(flatten)]
        grid: BoxArgs,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Monte Carlo histogram of the diffusion generated by sum X_j^2.
    Mc {
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        start: Point,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, allow_hyphen_values = true)]
        lo: Point,
        #[arg(long, allow_hyphen_values = true)]
        hi: Point,
        /// Bins per axis.
        #[arg(long, default_value_t = 5)]
        bins: usize,
    },
    /// Finite-difference solution of the Grushin Cauchy problem.
    Fd {
        #[arg(long)]
        datum: String,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        probe: Vec<Point>,
        #[arg(long, allow_hyphen_values = true, default_value = "-5,-6")]
        lo: Point,
        #[arg(long, allow_hyphen_values = true, default_value = "5,6")]
        hi: Point,
        /// Cells per axis on the coarse grid.
        #[arg(long, value_parser = parse_cells, default_value = "100,120")]
        cells: [usize; 2],
        /// Coarse time step (default: just below the stability limit).
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// Comma-separated coordinates.
#[derive(Clone, Debug)]
struct Point(Vec<f64>);

impl std::str::FromStr for Point {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        text.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}")))
            .collect::<Result<_, _>>()
            .map(Point)
    }
}

fn points(ps: &[Point]) -> Vec<Vec<f64>> {
    ps.iter().map(|p| p.0.clone()).collect()
}

fn parse_cells(text: &str) -> Result<[usize; 2], String> {
    let v: Vec<usize> = text
        .split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected two cell counts".to_string())
}

fn pair(v: &[f64], what: &str) -> hypoheat::Result<[f64; 2]> {
    v.try_into()
        .map_err(|_| Error::InvalidInput(format!("--{what} needs two coordinates")))
}

fn system(path: &Path) -> hypoheat::Result<hypoheat::io::FieldSystem> {
    app::load_system(path)
}

fn run(cli: &Cli, cfg: &RunConfig) -> hypoheat::Result<Artifact> {
    match &cli.command {
        Command::Lift { system: path } => app::lift(&system(path)?),
        Command::Verify { system: path, quick, only } => {
            let mut cfg = *cfg;
            if *quick {
                cfg.suite.profile = Profile::Quick;
            }
            let mut stderr = std::io::stderr();
            app::verify(&system(path)?, &cfg, only, |r, elapsed| {
                let status = match r.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skipped => "skip",
                };
                let metrics: Vec<String> = r
                    .metrics
                    .iter()
                    .map(|m| format!("{}={:.3e}/{:.1e}", m.name, m.value, m.limit))
                    .collect();
                let _ = writeln!(
                    stderr,
                    "{:>2} {:<26} {:<4} {:>8.2}s {} {}",
                    r.id,
                    r.name,
                    status,
                    elapsed.as_secs_f64(),
                    metrics.join(" "),
                    r.detail.as_deref().unwrap_or("")
                );
            })
        }
        Command::Kernel(KernelCommand::Eval { system: path, t, g }) => app::kernel_eval(&system(path)?, cfg, *t, &g.0),
        Command::Kernel(KernelCommand::Selftest { system: path }) => app::kernel_selftest(&system(path)?, cfg),
        Command::Gamma(GammaCommand::Eval {
            system: path,
            pole,
            y,
            derivative,
        }) => {
            let spec = derivative.as_deref().map(DerivativeSpec::parse).transpose()?;
            app::gamma_eval(&system(path)?, cfg, (pole.t, &pole.x.0), (pole.s, &y.0), spec.as_ref())
        }
        Command::Gamma(GammaCommand::Grid { system: path, pole, grid }) => app::gamma_grid(
            &system(path)?,
            cfg,
            (pole.t, &pole.x.0),
            pole.s,
            (&grid.lo.0, &grid.hi.0, grid.points),
        ),
        Command::Cauchy {
            system: path,
            datum,
            t,
            x,
            lo,
            hi,
            points: per_axis,
        } => {
            let mut points = points(x);
            if let (Some(lo), Some(hi)) = (lo, hi) {
                points.extend(app::box_points(&lo.0, &hi.0, *per_axis)?);
            }
            if points.is_empty() {
                return Err(Error::InvalidInput("give --x or --lo/--hi".into()));
            }
            app::cauchy(&system(path)?, cfg, &app::load_datum(datum)?, *t, &points)
        }
        Command::Oracle(OracleCommand::Mc {
            system: path,
            start,
            t0,
            t1,
            dt,
            paths,
            lo,
            hi,
            bins,
        }) => {
            let mc = DiffusionConfig {
                dt: *dt,
                paths: *paths,
                seed: cfg.suite.mc_seed,
                lo: lo.0.clone(),
                hi: hi.0.clone(),
                bins: vec![*bins; lo.0.len()],
            };
            app::oracle_mc(&system(path)?, &mc, &start.0, *t0, *t1)
        }
        Command::Oracle(OracleCommand::Fd {
            datum,
            t,
            probe,
            lo,
            hi,
            cells,
            dt,
        }) => {
            let grid = GridSpec {
                lo: pair(&lo.0, "lo")?,
                hi: pair(&hi.0, "hi")?,
                cells: *cells,
                dt: *dt,
            };
            app::oracle_fd(&grid, &app::load_datum(datum)?, *t, &points(probe))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fail = |e: &Error| {
        eprintln!("error: {e}");
        ExitCode::from(app::exit_code(e))
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => RunConfig::default(),
    };
    let cfg = match cli.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    };
    let format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    let artifact = match run(&cli, &cfg) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let text = match artifact.render(format) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        return fail(&Error::Io(e));
    }
    if artifact.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
