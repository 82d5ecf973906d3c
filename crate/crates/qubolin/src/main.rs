use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qubolin::io::{self, ModelKind, QuboEncodingMeta, QuboMeta};
use qubolin::report::{self, SolveKind, TableOptions};
use qubolin::solver::{self, AnnealParams};
use qubolin::{
    build_congruence, build_vanilla, solve_via_congruence, Error, LinalgError, ProblemInstance,
    QuboMatrix, RadixEncoding, ReductionFlags, SolverError,
};

#[derive(Parser)]
#[command(
    name = "qubolin",
    version,
    about = "Build, solve, compare and export QUBO formulations of linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize the Gram matrix and print R, D and the real solution
    Diagonalize {
        /// Problem file (JSON)
        problem: PathBuf,
        /// Override the per-column scaling, e.g. "0.4,0.4" or a single value
        #[arg(long)]
        scale: Option<String>,
    },
    /// Build a QUBO file from a problem
    Build {
        /// Problem file (JSON)
        problem: PathBuf,
        /// Where to write the QUBO
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Vanilla)]
        model: Model,
        /// Annihilation of plus/minus cross terms; "default" follows the
        /// model (off for vanilla, on for congruence)
        #[arg(long, value_enum, default_value_t = Annihilate::Default)]
        annihilate: Annihilate,
        /// Write every upper-triangular entry, zeros included
        #[arg(long)]
        include_zeros: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Solve a QUBO file and print the occurrence table
    Solve {
        /// QUBO file (JSON or coordinate)
        qubo: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        #[command(flatten)]
        anneal: AnnealArgs,
        /// Independent annealing trials (one occurrence column each)
        #[arg(long, default_value_t = 1)]
        trials: u32,
        #[command(flatten)]
        table: TableArgs,
        /// Also write the full table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build both models, solve and anneal them, and print the comparison
    Compare {
        /// Problem file (JSON)
        problem: PathBuf,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[arg(long, default_value_t = 3)]
        trials: u32,
    },
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long, default_value_t = 10_000)]
    reads: u64,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    beta_initial: f64,
    #[arg(long, default_value_t = 20.0)]
    beta_final: f64,
}

impl AnnealArgs {
    fn params(&self) -> AnnealParams {
        AnnealParams {
            num_reads: self.reads,
            sweeps_per_read: self.sweeps,
            beta_initial: self.beta_initial,
            beta_final: self.beta_final,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct TableArgs {
    /// Merge ground-state rows that share the leading variable's pattern
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    collapse: bool,
    /// Cap on displayed rows (ground states always shown)
    #[arg(long, default_value_t = 25)]
    max_rows: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Vanilla,
    Congruence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Annihilate {
    On,
    Off,
    Default,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Coord,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exhaustive,
    Sa,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] Error),
}

impl CliError {
    /// 2 input error, 3 numeric failure, 4 size guard.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::File { .. } => 2,
            CliError::Pipeline(Error::Linalg(LinalgError::NotPsd { .. })) => 3,
            CliError::Pipeline(Error::Solver(SolverError::TooLarge { .. })) => 4,
            CliError::Pipeline(_) => 2,
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Pipeline(e.into())
    }
}

impl From<qubolin::IoError> for CliError {
    fn from(e: qubolin::IoError) -> Self {
        CliError::Pipeline(e.into())
    }
}

impl From<qubolin::QuboError> for CliError {
    fn from(e: qubolin::QuboError) -> Self {
        CliError::Pipeline(e.into())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Pipeline(e.into())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn load_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    let text = read_file(path)?;
    Ok(io::read_problem(&text)?.to_instance()?)
}

fn parse_scale(spec: &str, num_vars: usize) -> Result<Vec<f64>, CliError> {
    let parts: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
    let parts = parts.map_err(|e| {
        CliError::Pipeline(Error::Io(qubolin::IoError::Invalid {
            msg: format!("bad --scale value '{spec}': {e}"),
        }))
    })?;
    if parts.len() == 1 {
        Ok(vec![parts[0]; num_vars])
    } else {
        Ok(parts)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Diagonalize { problem, scale } => cmd_diagonalize(&problem, scale.as_deref()),
        Command::Build {
            problem,
            output,
            model,
            annihilate,
            include_zeros,
            format,
        } => cmd_build(&problem, &output, model, annihilate, include_zeros, format),
        Command::Solve {
            qubo,
            method,
            anneal,
            trials,
            table,
            csv,
        } => cmd_solve(&qubo, method, &anneal, trials, &table, csv.as_deref()),
        Command::Compare {
            problem,
            anneal,
            trials,
        } => cmd_compare(&problem, &anneal, trials),
    }
}

fn cmd_diagonalize(problem: &Path, scale: Option<&str>) -> Result<(), CliError> {
    let mut inst = load_instance(problem)?;
    if let Some(spec) = scale {
        inst.scale = Some(parse_scale(spec, inst.system.num_vars())?);
        inst.explicit_r = None;
    }
    let dec = inst.decomposition()?;
    let (y, x) = solve_via_congruence(&inst.system, &dec)?;
    print!("{}", report::render_diagonalize(&inst.system, &dec, &y, &x));
    Ok(())
}

fn build_model(
    inst: &ProblemInstance,
    model: Model,
    annihilate: Annihilate,
) -> Result<(QuboMatrix, QuboMeta), CliError> {
    let mut flags = match model {
        Model::Vanilla => ReductionFlags::vanilla(),
        Model::Congruence => ReductionFlags::congruence(),
    };
    match annihilate {
        Annihilate::On => flags.annihilate_pm = true,
        Annihilate::Off => flags.annihilate_pm = false,
        Annihilate::Default => {}
    }
    let q = match model {
        Model::Vanilla => build_vanilla(&inst.system, &inst.encoding, flags)?,
        Model::Congruence => {
            let dec = inst.decomposition()?;
            build_congruence(&inst.system, &dec, &inst.encoding, flags)?
        }
    };
    let meta = QuboMeta {
        model: match model {
            Model::Vanilla => ModelKind::Vanilla,
            Model::Congruence => ModelKind::Congruence,
        },
        annihilate_pm: flags.annihilate_pm,
        encoding: Some(QuboEncodingMeta {
            num_vars: inst.encoding.num_vars(),
            low: inst.encoding.low_exp(),
            high: inst.encoding.high_exp(),
        }),
    };
    Ok((q, meta))
}

fn cmd_build(
    problem: &Path,
    output: &Path,
    model: Model,
    annihilate: Annihilate,
    include_zeros: bool,
    format: Format,
) -> Result<(), CliError> {
    let inst = load_instance(problem)?;
    let (q, meta) = build_model(&inst, model, annihilate)?;
    let text = match format {
        Format::Json => io::write_qubo_json(&q, &meta, include_zeros),
        Format::Coord => io::write_qubo_coord(&q, include_zeros),
    };
    write_file(output, &text)?;
    let s = q.sparsity_report();
    let fill = if s.dense_bound > 0 {
        100.0 * s.nnz as f64 / s.dense_bound as f64
    } else {
        0.0
    };
    println!(
        "{} model: {} qubits, nnz {} / bound {} (dense {}, fill {:.1}%), offset {}",
        meta.model,
        q.n(),
        s.nnz,
        s.bound,
        s.dense_bound,
        fill,
        q.offset()
    );
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_solve(
    qubo: &Path,
    method: Method,
    anneal: &AnnealArgs,
    trials: u32,
    table: &TableArgs,
    csv: Option<&Path>,
) -> Result<(), CliError> {
    let text = read_file(qubo)?;
    let (q, meta) = io::read_qubo_any(&text)?;
    let enc = meta
        .as_ref()
        .and_then(|m| m.encoding)
        .and_then(|e| RadixEncoding::new(e.num_vars, e.low, e.high).ok());
    let opts = TableOptions {
        collapse: table.collapse,
        max_rows: table.max_rows,
    };

    let (results, labels, kind) = match method {
        Method::Exhaustive => {
            let result = solver::brute_force_capped(&q, table.max_rows)?;
            (vec![result], vec!["count".to_string()], SolveKind::Exhaustive)
        }
        Method::Sa => {
            let base = anneal.params();
            let mut results = Vec::with_capacity(trials as usize);
            for t in 0..trials.max(1) {
                let params = AnnealParams {
                    seed: base.seed.wrapping_add(u64::from(t)),
                    ..base.clone()
                };
                results.push(solver::simulated_anneal(&q, &params)?);
            }
            let labels = (1..=results.len()).map(|t| format!("run {t}")).collect();
            (results, labels, SolveKind::Sampled)
        }
    };

    print!(
        "{}",
        report::render_solve_report(&results, &labels, enc.as_ref(), kind, &opts)
    );
    if let Some(path) = csv {
        write_file(path, &report::render_csv(&results, &labels, enc.as_ref()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_compare(problem: &Path, anneal: &AnnealArgs, trials: u32) -> Result<(), CliError> {
    let inst = load_instance(problem)?;
    let dec = inst.decomposition()?;
    let report = report::run_compare(
        &inst.system,
        &dec,
        &inst.encoding,
        &anneal.params(),
        trials,
    )
    .map_err(CliError::Pipeline)?;
    print!("{}", report::render_compare(&report));
    Ok(())
}
