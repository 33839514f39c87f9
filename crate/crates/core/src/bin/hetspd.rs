use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use hetspd::bench::{self, Algo, ModeChoice, Row};
use hetspd::format::{load_block_vector, load_matrix, save_matrix, save_vector};
use hetspd::genmat::{generate_rhs, generate_spd, KernelParams};
use hetspd::{BlockVector, BlockedSPDMatrix, SolverConfig, SolverError};

const EXIT_NUMERICAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "hetspd", version, about = "Dense SPD solvers split across two executors")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file with default flag values; command-line flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a kernel matrix and write it as a BSPD1 file
    Gen(GenArgs),
    /// Solve one system and print one CSV row
    Solve(SolveArgs),
    /// Run the cross product of algorithms, sizes, block sizes and fractions
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Diagonal jitter added to the kernel
    #[arg(long, default_value_t = 1e-2)]
    noise: f64,
    /// Kernel length scale (default: median pairwise input distance)
    #[arg(long)]
    length_scale: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    signal_variance: f64,
    /// Input dimension of the generated points
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

impl KernelArgs {
    fn params(&self) -> KernelParams {
        KernelParams {
            signal_variance: self.signal_variance,
            length_scale: self.length_scale,
            noise: self.noise,
            dim: self.dim,
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 32)]
    block_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    /// Also write the matching right-hand side vector
    #[arg(long, value_name = "PATH")]
    rhs_output: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Iterations between residual recomputations (0 disables)
    #[arg(long, default_value_t = 50)]
    recompute_interval: usize,
    #[arg(long, default_value_t = 1)]
    workers_a: usize,
    #[arg(long, default_value_t = 1)]
    workers_b: usize,
    #[arg(long, default_value_t = 1.0)]
    slowdown_a: f64,
    #[arg(long, default_value_t = 1.0)]
    slowdown_b: f64,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Read the matrix from a BSPD1 file instead of generating it
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,
    /// Right-hand side vector file (default: generated from the seed)
    #[arg(long, value_name = "PATH")]
    rhs: Option<PathBuf>,
    /// CSV destination (default: stdout)
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Skip the untimed warmup run
    #[arg(long)]
    no_warmup: bool,
    /// auto, hetero, homo-a or homo-b; auto runs fraction 0 on A alone and 1 on B alone
    #[arg(long, default_value = "auto")]
    mode: ModeChoice,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Args, Debug)]
struct SolveArgs {
    algo: Algo,
    #[arg(long)]
    size: Option<usize>,
    /// Default: the file's block size with --matrix, otherwise 32
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, default_value_t = 0.85)]
    fraction: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated algorithms
    #[arg(long, default_value = "cg,cholesky")]
    algo: String,
    /// Comma-separated sizes (ignored with --matrix)
    #[arg(long)]
    size: Option<String>,
    /// Comma-separated block sizes
    #[arg(long, default_value = "32")]
    block_size: String,
    /// Comma list or start:stop:step
    #[arg(long, default_value = "0:1:0.05")]
    fraction: String,
    /// Also print the fastest fraction per (algo, n, block size) to stderr
    #[arg(long)]
    summary: bool,
    #[command(flatten)]
    run: RunArgs,
}

/// Error plus the exit code it maps to.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE },
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        kind: "usage".into(),
        message: message.into(),
    }
}

fn is_numerical_status(status: &str) -> bool {
    matches!(status, "not_spd" | "singular_block" | "numerical_error" | "not_converged")
}

/// Turns `key=value` lines into flags for `sub`, placed before the user's own
/// flags so that the latter win. Keys the subcommand does not take are skipped.
fn config_args(path: &Path, sub: &str) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    let cmd = Cli::command();
    let sub_cmd = cmd
        .find_subcommand(sub)
        .ok_or_else(|| usage(format!("unknown subcommand {sub:?}")))?;
    let mut known = Vec::new();
    for c in cmd.get_subcommands() {
        known.extend(c.get_arguments().filter_map(|a| a.get_long().map(str::to_string)));
    }
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if !known.contains(&key) {
            return Err(usage(format!("{}:{}: unknown key {key:?}", path.display(), lineno + 1)));
        }
        let Some(arg) = sub_cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        if arg.get_action().takes_values() {
            out.push(format!("--{key}={value}"));
        } else if value.parse::<bool>().map_err(|_| usage(format!("{key}: expected true or false")))? {
            out.push(format!("--{key}"));
        }
    }
    Ok(out)
}

/// Splices config-file flags in right after the subcommand name.
fn expand_argv(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut config = None;
    for (k, a) in argv.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else if a == "--config" {
            config = argv.get(k + 1).map(PathBuf::from);
        }
    }
    let Some(path) = config else { return Ok(argv) };
    let names = ["gen", "solve", "sweep"];
    let Some(pos) = argv.iter().skip(1).position(|a| names.contains(&a.as_str())).map(|p| p + 1) else {
        return Ok(argv);
    };
    let extra = config_args(&path, &argv[pos])?;
    let mut out = argv[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

fn solver_config(run: &RunArgs, block_size: usize, fraction: f64) -> SolverConfig {
    SolverConfig {
        eps: run.eps,
        max_iters: run.max_iters,
        recompute_interval: run.recompute_interval,
        fraction,
        block_size,
        workers_a: run.workers_a,
        workers_b: run.workers_b,
        slowdown_a: run.slowdown_a,
        slowdown_b: run.slowdown_b,
        seed: run.seed,
        mode: run.mode.resolve(fraction),
    }
}

fn rhs_for(run: &RunArgs, n: usize, b: usize) -> Result<BlockVector, Failure> {
    let rhs = match &run.rhs {
        Some(path) => load_block_vector(path, b)?,
        None => BlockVector::from_slice(&generate_rhs(n, run.seed), b)?,
    };
    if rhs.n() != n {
        return Err(usage(format!("right-hand side has {} entries, matrix has n = {n}", rhs.n())));
    }
    Ok(rhs)
}

fn matrix_for(run: &RunArgs, size: Option<usize>, block_size: usize) -> Result<BlockedSPDMatrix, Failure> {
    match (&run.matrix, size) {
        (Some(path), _) => Ok(load_matrix(path)?.reblock(block_size)?),
        (None, Some(n)) => Ok(generate_spd(n, block_size, &run.kernel.params(), run.seed)?),
        (None, None) => Err(usage("either --size or --matrix is required")),
    }
}

fn emit(rows: &[Row], output: Option<&Path>) -> Result<(), Failure> {
    let result = match output {
        Some(path) => {
            let f = File::create(path).map_err(|e| usage(format!("creating {}: {e}", path.display())))?;
            bench::write_rows(f, rows)
        }
        None => bench::write_rows(io::stdout().lock(), rows),
    };
    result.map_err(Failure::from)
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let m = generate_spd(args.size, args.block_size, &args.kernel.params(), args.seed)?;
    save_matrix(&args.output, &m)?;
    if let Some(path) = &args.rhs_output {
        save_vector(path, &generate_rhs(args.size, args.seed))?;
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let run = &args.run;
    let preset = match (&run.matrix, args.block_size) {
        (_, Some(b)) => b,
        (Some(path), None) => load_matrix(path)?.block_size(),
        (None, None) => 32,
    };
    let cfg = solver_config(run, preset, args.fraction);
    cfg.validate()?;
    run.kernel.params().validate()?;
    let a = matrix_for(run, args.size, preset)?;
    let rhs = rhs_for(run, a.n(), preset)?;
    let row = bench::measure(args.algo, &a, &rhs, &cfg, run.reps, !run.no_warmup);
    emit(std::slice::from_ref(&row), run.output.as_deref())?;
    if row.ok() {
        Ok(())
    } else {
        Err(Failure {
            code: if is_numerical_status(&row.status) { EXIT_NUMERICAL } else { EXIT_USAGE },
            message: format!("{} solve failed", row.algo),
            kind: row.status,
        })
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|e| usage(format!("{what} {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(usage(format!("empty {what} list")));
    }
    Ok(items)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let run = &args.run;
    let algos: Vec<Algo> = parse_list(&args.algo, "algorithm")?;
    let blocks: Vec<usize> = parse_list(&args.block_size, "block size")?;
    let fractions = bench::parse_grid(&args.fraction).map_err(usage)?;
    let sizes: Vec<Option<usize>> = match (&run.matrix, &args.size) {
        (Some(_), _) => vec![None],
        (None, Some(s)) => parse_list::<usize>(s, "size")?.into_iter().map(Some).collect(),
        (None, None) => return Err(usage("either --size or --matrix is required")),
    };
    for &f in &fractions {
        solver_config(run, blocks[0], f).validate()?;
    }
    for &b in &blocks {
        solver_config(run, b, 0.5).validate()?;
    }
    run.kernel.params().validate()?;

    let mut rows = Vec::new();
    for &algo in &algos {
        for &size in &sizes {
            for &b in &blocks {
                let a = matrix_for(run, size, b)?;
                let rhs = rhs_for(run, a.n(), b)?;
                for &f in &fractions {
                    let cfg = solver_config(run, b, f);
                    let row = bench::measure(algo, &a, &rhs, &cfg, run.reps, !run.no_warmup);
                    if !row.ok() {
                        eprintln!("{} n={} b={} fraction={}: {}", row.algo, row.n, b, f, row.status);
                    }
                    rows.push(row);
                }
            }
        }
    }
    emit(&rows, run.output.as_deref())?;
    if args.summary {
        let mut err = io::stderr().lock();
        let _ = writeln!(err, "algo,n,block_size,argmin_fraction,runtime_ms_median");
        for (algo, n, b, f, t) in bench::argmin_fractions(&rows) {
            let _ = writeln!(err, "{algo},{n},{b},{f},{t}");
        }
    }
    match rows.iter().find(|r| is_numerical_status(&r.status)) {
        Some(r) => Err(Failure {
            code: EXIT_NUMERICAL,
            kind: r.status.clone(),
            message: "some sweep configurations failed; see the status column".into(),
        }),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv = match expand_argv(std::env::args().collect()) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind, f.message);
            return ExitCode::from(f.code);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind, f.message);
            ExitCode::from(f.code)
        }
    }
}
