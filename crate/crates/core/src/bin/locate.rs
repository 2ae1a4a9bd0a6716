use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use edm_locate::analysis::build_m;
use edm_locate::face::{exposing_vector, FaceWarning};
use edm_locate::harness::{gauss_newton_oracle, run_experiment, ExperimentId, ExperimentSpec};
use edm_locate::instance::{InstanceFile, Noise};
use edm_locate::recovery::position_error;
use edm_locate::{locate, Error, Instance, Result, SolverConfig, SymMatrix};

#[derive(Parser)]
#[command(name = "locate", version, about = "Single-source localization from range measurements")]
struct Cli {
    /// Seed for every random draw (bench instances, oracle restarts).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format. Only `bench` emits CSV.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exposing vector of the anchor face.
    Expose {
        /// JSON with `r` and `anchors`; `delta` is not needed.
        #[arg(long)]
        anchors: PathBuf,
        /// Also write H as whitespace-separated matrix text.
        #[arg(long)]
        h_text: Option<PathBuf>,
    },
    /// Run the penalty solver and recover the source.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Per-iteration CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Nondegeneracy report at a feasible matrix.
    Certify {
        #[arg(long)]
        instance: PathBuf,
        /// Matrix text for D; defaults to the EDM of the true source.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Batch experiment with one solver row and one oracle row per trial.
    Bench {
        #[arg(long)]
        experiment: ExperimentId,
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Gaussian range noise, standard deviation.
        #[arg(long, conflicts_with = "eta")]
        noise_std: Option<f64>,
        /// Multiplicative uniform noise factor.
        #[arg(long)]
        eta: Option<f64>,
        /// Number of anchors.
        #[arg(long)]
        n: Option<usize>,
        /// e6: source at the origin, inside the anchor hull.
        #[arg(long)]
        inside_hull: bool,
        /// e1: use the fixed published ranges instead of drawing noise.
        #[arg(long)]
        replay: bool,
    },
    /// Multi-start Gauss–Newton on the range residuals.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    rho: Option<f64>,
    /// Relative progress tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
}

impl SolverArgs {
    fn config(&self, default_rank: usize) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.rank.unwrap_or(default_rank));
        if let Some(rho) = self.rho {
            cfg.rho = rho;
        }
        if let Some(tol) = self.tol {
            cfg.f_prog_tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            cfg.max_iter = max_iter;
        }
        cfg
    }
}

#[derive(Serialize)]
struct ExposeSummary {
    n: usize,
    r: usize,
    gale_dim: usize,
    detected_rank: usize,
    rank_gap: f64,
    warnings: Vec<FaceWarning>,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct OracleOutput {
    source: Vec<f64>,
    cost: f64,
    iterations: usize,
    starts_used: usize,
    err: Option<f64>,
}

fn read_instance_file(path: &Path) -> Result<InstanceFile> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    if format == Some(Format::Csv) {
        return Err(Error::InvalidArgument(format!("`{command}` only writes JSON")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Expose { anchors, h_text } => {
            json_only(cli.format, "expose")?;
            let file = read_instance_file(&anchors)?;
            let points = file.anchor_matrix()?;
            let cert = exposing_vector(&points, file.r)?;
            if let Some(path) = h_text {
                fs::write(path, cert.h.to_text())?;
            }
            let summary = ExposeSummary {
                n: points.nrows(),
                r: file.r,
                gale_dim: cert.gale_dim,
                detected_rank: cert.detected_rank,
                rank_gap: cert.rank_gap,
                warnings: cert.warnings.clone(),
                h: cert.h.to_rows(),
            };
            emit(out, &serde_json::to_string_pretty(&summary)?)
        }
        Command::Solve {
            instance,
            solver,
            trace,
        } => {
            json_only(cli.format, "solve")?;
            let instance = Instance::read(&instance)?;
            let cfg = solver.config(instance.r());
            let solution = locate(&instance, &cfg)?;
            if let Some(path) = trace {
                solution.trace.write_csv(BufWriter::new(File::create(path)?))?;
            }
            emit(out, &serde_json::to_string_pretty(&solution.to_file())?)
        }
        Command::Certify { instance, matrix } => {
            json_only(cli.format, "certify")?;
            let instance = Instance::read(&instance)?;
            let d = match matrix {
                Some(path) => SymMatrix::read_text(BufReader::new(File::open(path)?))?,
                None => instance.true_edm().ok_or_else(|| {
                    Error::InvalidArgument(
                        "instance has no true_source; pass --matrix".into(),
                    )
                })?,
            };
            let cert = exposing_vector(instance.anchors(), instance.r())?;
            let report = build_m(&d, &cert.h)?;
            emit(out, &serde_json::to_string_pretty(&report)?)
        }
        Command::Bench {
            experiment,
            trials,
            solver,
            noise_std,
            eta,
            n,
            inside_hull,
            replay,
        } => {
            let mut spec = ExperimentSpec::new(experiment);
            spec.seed = cli.seed;
            spec.inside_hull = inside_hull;
            spec.replay = replay;
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(n) = n {
                spec.n = n;
            }
            if let Some(std) = noise_std {
                spec.noise = Noise::Gaussian { std };
            }
            if let Some(eta) = eta {
                spec.noise = Noise::MultiplicativeUniform { eta };
            }
            let cfg = solver.config(spec.r());
            let run = run_experiment(&spec, &cfg)?;
            for s in &run.summary {
                log::info!(
                    "{}: mean err {:e}, mean time {:e}s, failures {}/{}",
                    s.method,
                    s.mean_err,
                    s.mean_time_s,
                    s.failures,
                    s.trials
                );
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    run.write_csv(&mut buf)?;
                    emit(out, &String::from_utf8_lossy(&buf))
                }
                Format::Json => emit(out, &run.to_json()?),
            }
        }
        Command::Oracle { instance, restarts } => {
            json_only(cli.format, "oracle")?;
            let instance = Instance::read(&instance)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let res = gauss_newton_oracle(&instance, restarts, &mut rng)?;
            let err = match instance.true_source() {
                Some(t) => Some(position_error(&nalgebra::DVector::from_column_slice(&res.source), t)?),
                None => None,
            };
            let output = OracleOutput {
                source: res.source,
                cost: res.cost,
                iterations: res.iterations,
                starts_used: res.starts_used,
                err,
            };
            emit(out, &serde_json::to_string_pretty(&output)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
