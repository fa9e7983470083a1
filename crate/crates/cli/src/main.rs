//! `ghr` — reproducible experiments over the GHR quaternion calculus library.
//!
//! Subcommands: `verify` (rule/identity suite → JSON report), `qlms`
//! (adaptive-filter learning curves → CSV), `optimize` (QGD/Newton traces →
//! CSV), `qls` (least-squares solutions → JSON).
//!
//! Exit codes: 0 success / all checks passed; 1 verification checks failed;
//! 2 invalid configuration or input validation; 3 numerical failure
//! (singular or diverged); 4 I/O failure.
//!
//! Every subcommand accepts `--config file.json` holding any of its
//! parameters under the flag names; explicit flags win on conflict. All
//! randomness flows from one ChaCha generator seeded via `--seed`, so
//! identical configurations produce byte-identical outputs on a platform.
//! `GHR_OUT_DIR`, when set, prefixes relative output paths.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use ghr_calculus::fields::qls_random;
use ghr_calculus::linalg::QVector;
use ghr_calculus::optim::{minimize, Method, OptimizeConfig, Termination};
use ghr_calculus::qlms::{
    generate_system_id, qlms_run, stream_from_csv, stream_to_csv, QlmsRun, QlmsVariant, Sample,
    SignalConfig,
};
use ghr_calculus::qls::QlsProblem;
use ghr_calculus::verify::{all_pass, run_full_suite, VerifyConfig};
use ghr_calculus::Error as CoreError;

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Debug)]
enum CliError {
    ChecksFailed,
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ChecksFailed => EXIT_CHECKS_FAILED,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Singular { .. } => CliError::Numerical(e.to_string()),
            CoreError::NonFiniteEval { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ghr",
    version,
    about = "Quaternion GHR calculus experiments: rule verification, QLMS, optimizers, least squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the calculus rule and identity suite and write a JSON report.
    Verify(VerifyArgs),
    /// Run QLMS system identification and write learning curves.
    Qlms(QlmsArgs),
    /// Minimize a least-squares objective and write the iteration trace.
    Optimize(OptimizeArgs),
    /// Solve a least-squares problem file and write the solution.
    Qls(QlsArgs),
}

/// Read an optional JSON parameter file for a subcommand.
fn load_file_cfg<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", p.display())))
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON file with any of this command's parameters; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Random evaluation points per (field, mu) combination [default: 20].
    #[arg(long)]
    points: Option<usize>,
    /// Random mu draws per field [default: 10].
    #[arg(long)]
    mus: Option<usize>,
    /// Negative control: evaluate the product rule with a flipped sign so
    /// the product checks must fail.
    #[arg(long)]
    inject_fault: bool,
    /// Report path (JSON) [default: verify_report.json].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct VerifyFile {
    seed: Option<u64>,
    points: Option<usize>,
    mus: Option<usize>,
    inject_fault: Option<bool>,
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantArg {
    Ghr,
    Componentwise,
    Conjugate,
}

impl From<VariantArg> for QlmsVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Ghr => QlmsVariant::Ghr,
            VariantArg::Componentwise => QlmsVariant::Componentwise,
            VariantArg::Conjugate => QlmsVariant::Conjugate,
        }
    }
}

#[derive(Args)]
struct QlmsArgs {
    /// JSON file with any of this command's parameters; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Filter length [default: 4].
    #[arg(long)]
    taps: Option<usize>,
    /// Step size [default: 0.02].
    #[arg(long)]
    alpha: Option<f64>,
    /// Stream length when generating [default: 5000].
    #[arg(long)]
    samples: Option<usize>,
    /// Noise standard deviation per real axis [default: 0.01].
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// RNG seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Update-rule derivation [default: ghr].
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Treat alpha as already containing the 1/2 factor of the update.
    #[arg(long)]
    absorb_half: bool,
    /// Read the sample stream from CSV instead of generating one.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Also write the generated sample stream to this CSV path.
    #[arg(long)]
    dump_stream: Option<PathBuf>,
    /// Independent experiment repetitions, fresh stream each [default: 1].
    #[arg(long)]
    repeats: Option<usize>,
    /// Worker threads for repetitions [default: 1].
    #[arg(long)]
    parallel: Option<usize>,
    /// Learning-curve path [default: learning_curve.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct QlmsFile {
    taps: Option<usize>,
    alpha: Option<f64>,
    samples: Option<usize>,
    noise_sigma: Option<f64>,
    seed: Option<u64>,
    variant: Option<VariantArg>,
    absorb_half: Option<bool>,
    input: Option<PathBuf>,
    dump_stream: Option<PathBuf>,
    repeats: Option<usize>,
    parallel: Option<usize>,
    out: Option<PathBuf>,
    json: Option<bool>,
}

/// Fully resolved qlms parameters (flags over file over defaults).
struct QlmsPlan {
    taps: usize,
    alpha: f64,
    samples: usize,
    noise_sigma: f64,
    seed: u64,
    variant: QlmsVariant,
    absorb_half: bool,
    input: Option<PathBuf>,
    dump_stream: Option<PathBuf>,
    repeats: usize,
    parallel: usize,
    out: PathBuf,
    json: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Qgd,
    NewtonFull,
    NewtonApprox,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Qgd => Method::Qgd,
            MethodArg::NewtonFull => Method::NewtonFull,
            MethodArg::NewtonApprox => Method::NewtonApprox,
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    /// JSON file with any of this command's parameters; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Minimization method [default: newton-full].
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Least-squares problem file (JSON {A, b}); omit for a random instance.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Rows of the random instance [default: 8].
    #[arg(long)]
    m: Option<usize>,
    /// Columns of the random instance [default: 4].
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed for the random instance [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Step size for QGD [default: 0.01].
    #[arg(long)]
    alpha: Option<f64>,
    /// Iteration budget [default: 100].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Convergence threshold on the conjugate-gradient norm [default: 1e-8].
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Epsilon added to H_qq* in the approximate Newton method [default: 0].
    #[arg(long)]
    regularization: Option<f64>,
    /// Halve steps while the objective increases.
    #[arg(long)]
    backtracking: bool,
    /// Trace path [default: trace.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptimizeFile {
    method: Option<MethodArg>,
    problem: Option<PathBuf>,
    m: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    alpha: Option<f64>,
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
    regularization: Option<f64>,
    backtracking: Option<bool>,
    out: Option<PathBuf>,
    json: Option<bool>,
}

#[derive(Args)]
struct QlsArgs {
    /// JSON file with any of this command's parameters; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem file (JSON {A, b}).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Solution path (JSON) [default: solution.json].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct QlsFile {
    problem: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Qlms(args) => cmd_qlms(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Qls(args) => cmd_qls(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::ChecksFailed => eprintln!("ghr: verification checks failed"),
                CliError::Config(msg) => eprintln!("ghr: invalid configuration: {msg}"),
                CliError::Numerical(msg) => eprintln!("ghr: numerical failure: {msg}"),
                CliError::Io(msg) => eprintln!("ghr: i/o failure: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}

/// Prefix relative paths with `GHR_OUT_DIR` when set.
fn resolve_out(path: &PathBuf) -> PathBuf {
    if path.is_absolute() {
        return path.clone();
    }
    match std::env::var_os("GHR_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.clone(),
    }
}

fn write_out(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    let full = resolve_out(path);
    fs::write(&full, contents).map_err(|e| CliError::Io(format!("writing {}: {e}", full.display())))
}

fn read_in(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let file: VerifyFile = load_file_cfg(&args.config)?;
    let cfg = VerifyConfig {
        seed: args.seed.or(file.seed).unwrap_or(0),
        points: args.points.or(file.points).unwrap_or(20),
        mus: args.mus.or(file.mus).unwrap_or(10),
        inject_fault: args.inject_fault || file.inject_fault.unwrap_or(false),
    };
    if cfg.points == 0 || cfg.mus == 0 {
        return Err(CliError::Config("points and mus must be positive".into()));
    }
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("verify_report.json"));

    let records = run_full_suite(&cfg);
    let json = serde_json::to_string_pretty(&records)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    write_out(&out, &json)?;
    let failed = records.iter().filter(|r| !r.pass).count();
    println!(
        "verify: {} checks, {} failed (report: {})",
        records.len(),
        failed,
        resolve_out(&out).display()
    );
    if all_pass(&records) {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}

fn qlms_plan(args: QlmsArgs) -> Result<QlmsPlan, CliError> {
    let file: QlmsFile = load_file_cfg(&args.config)?;
    Ok(QlmsPlan {
        taps: args.taps.or(file.taps).unwrap_or(4),
        alpha: args.alpha.or(file.alpha).unwrap_or(0.02),
        samples: args.samples.or(file.samples).unwrap_or(5000),
        noise_sigma: args.noise_sigma.or(file.noise_sigma).unwrap_or(0.01),
        seed: args.seed.or(file.seed).unwrap_or(0),
        variant: args
            .variant
            .or(file.variant)
            .unwrap_or(VariantArg::Ghr)
            .into(),
        absorb_half: args.absorb_half || file.absorb_half.unwrap_or(false),
        input: args.input.or(file.input),
        dump_stream: args.dump_stream.or(file.dump_stream),
        repeats: args.repeats.or(file.repeats).unwrap_or(1),
        parallel: args.parallel.or(file.parallel).unwrap_or(1),
        out: args
            .out
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("learning_curve.csv")),
        json: args.json || file.json.unwrap_or(false),
    })
}

fn qlms_stream(plan: &QlmsPlan, rep_seed: u64) -> Result<(Option<QVector>, Vec<Sample>), CliError> {
    match &plan.input {
        Some(path) => {
            let text = read_in(path)?;
            let samples = stream_from_csv(&text).map_err(CliError::Config)?;
            if samples.is_empty() {
                return Err(CliError::Config("input stream is empty".into()));
            }
            if samples[0].x.len() != plan.taps {
                return Err(CliError::Config(format!(
                    "input stream has {} taps, expected {}",
                    samples[0].x.len(),
                    plan.taps
                )));
            }
            Ok((None, samples))
        }
        None => {
            let mut rng = ChaCha12Rng::seed_from_u64(rep_seed);
            let cfg = SignalConfig {
                taps: plan.taps,
                samples: plan.samples,
                noise_sigma: plan.noise_sigma,
            };
            let (w_true, samples) = generate_system_id(&cfg, &mut rng);
            Ok((Some(w_true), samples))
        }
    }
}

fn run_one_qlms(plan: &QlmsPlan, rep: usize) -> Result<QlmsRun, CliError> {
    let (w_true, samples) = qlms_stream(plan, plan.seed.wrapping_add(rep as u64))?;
    if rep == 0 {
        if let Some(path) = &plan.dump_stream {
            write_out(path, &stream_to_csv(&samples))?;
        }
    }
    let effective_alpha = if plan.absorb_half {
        2.0 * plan.alpha
    } else {
        plan.alpha
    };
    Ok(qlms_run(
        &samples,
        effective_alpha,
        QVector::zeros(plan.taps),
        w_true.as_ref(),
        plan.variant,
    ))
}

fn cmd_qlms(args: QlmsArgs) -> Result<(), CliError> {
    let plan = qlms_plan(args)?;
    if plan.taps == 0 {
        return Err(CliError::Config("taps must be positive".into()));
    }
    if plan.alpha < 0.0 || plan.noise_sigma < 0.0 {
        return Err(CliError::Config(
            "alpha and noise-sigma must be nonnegative".into(),
        ));
    }
    if plan.repeats == 0 || plan.parallel == 0 {
        return Err(CliError::Config(
            "repeats and parallel must be positive".into(),
        ));
    }
    if plan.input.is_some() && plan.repeats > 1 {
        return Err(CliError::Config(
            "repeats > 1 requires generated streams, not --input".into(),
        ));
    }

    // Repetitions are independent experiments with derived seeds; threads
    // only split the repetition list, so output bytes never depend on the
    // worker count.
    let mut runs: Vec<QlmsRun> = Vec::with_capacity(plan.repeats);
    if plan.parallel <= 1 || plan.repeats == 1 {
        for rep in 0..plan.repeats {
            runs.push(run_one_qlms(&plan, rep)?);
        }
    } else {
        let mut results: Vec<Option<Result<QlmsRun, CliError>>> =
            (0..plan.repeats).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunk = plan.repeats.div_ceil(plan.parallel);
            for (w, slot_block) in results.chunks_mut(chunk).enumerate() {
                let plan_ref = &plan;
                scope.spawn(move || {
                    for (off, slot) in slot_block.iter_mut().enumerate() {
                        *slot = Some(run_one_qlms(plan_ref, w * chunk + off));
                    }
                });
            }
        });
        for slot in results {
            runs.push(slot.expect("all repetitions executed")?);
        }
    }

    let diverged = runs.iter().any(|r| r.diverged);
    let text = if plan.json {
        let payload: Vec<serde_json::Value> = runs
            .iter()
            .map(|r| {
                serde_json::json!({
                    "weight_errors": r.weight_errors,
                    "squared_errors": r.squared_errors,
                    "diverged": r.diverged,
                })
            })
            .collect();
        serde_json::to_string_pretty(&payload)
            .map_err(|e| CliError::Io(format!("serializing curves: {e}")))?
    } else {
        let mut s = String::new();
        if plan.repeats == 1 {
            s.push_str("n,weight_error,squared_error\n");
            let run = &runs[0];
            for (n, &se) in run.squared_errors.iter().enumerate() {
                let we = run.weight_errors.get(n).copied().unwrap_or(f64::NAN);
                s.push_str(&format!("{n},{we},{se}\n"));
            }
        } else {
            s.push_str("rep,n,weight_error,squared_error\n");
            for (rep, run) in runs.iter().enumerate() {
                for (n, &se) in run.squared_errors.iter().enumerate() {
                    let we = run.weight_errors.get(n).copied().unwrap_or(f64::NAN);
                    s.push_str(&format!("{rep},{n},{we},{se}\n"));
                }
            }
        }
        s
    };
    write_out(&plan.out, &text)?;
    if diverged {
        eprintln!("qlms: divergence detected (weight norm exceeded 1e6); curve truncated");
    }
    println!(
        "qlms: {} repetition(s), {} samples each (curves: {})",
        runs.len(),
        runs.first().map_or(0, |r| r.squared_errors.len()),
        resolve_out(&plan.out).display()
    );
    Ok(())
}

fn load_problem(path: &PathBuf) -> Result<QlsProblem, CliError> {
    let text = read_in(path)?;
    let parsed: QlsProblem = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
    // re-validate shape invariants the wire format cannot express
    QlsProblem::new(parsed.a, parsed.b).map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let file: OptimizeFile = load_file_cfg(&args.config)?;
    let method: Method = args
        .method
        .or(file.method)
        .unwrap_or(MethodArg::NewtonFull)
        .into();
    let problem_path = args.problem.or(file.problem);
    let m = args.m.or(file.m).unwrap_or(8);
    let n = args.n.or(file.n).unwrap_or(4);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    let json = args.json || file.json.unwrap_or(false);

    let problem = match &problem_path {
        Some(path) => load_problem(path)?,
        None => {
            if n == 0 || m < n {
                return Err(CliError::Config("need m >= n >= 1".into()));
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            qls_random(m, n, &mut rng)
        }
    };
    let field = problem.objective_field();
    let q0 = QVector::zeros(problem.n());
    let config = OptimizeConfig {
        step_size: args.alpha.or(file.alpha).unwrap_or(0.01),
        max_iters: args.max_iters.or(file.max_iters).unwrap_or(100),
        grad_tol: args.grad_tol.or(file.grad_tol).unwrap_or(1e-8),
        hessian_regularization: args.regularization.or(file.regularization).unwrap_or(0.0),
        method,
        backtracking: args.backtracking || file.backtracking.unwrap_or(false),
    };
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let trace = minimize(&field, &q0, &config).map_err(CliError::from)?;

    let text = if json {
        serde_json::to_string_pretty(&trace)
            .map_err(|e| CliError::Io(format!("serializing trace: {e}")))?
    } else {
        trace.to_csv()
    };
    write_out(&out, &text)?;
    println!(
        "optimize: {:?} finished after {} iteration(s): {:?} (trace: {})",
        config.method,
        trace.iterations(),
        trace.termination,
        resolve_out(&out).display()
    );
    match trace.termination {
        Termination::SingularHessian => Err(CliError::Numerical("singular Hessian".into())),
        Termination::Diverged => Err(CliError::Numerical("objective diverged".into())),
        _ => Ok(()),
    }
}

fn cmd_qls(args: QlsArgs) -> Result<(), CliError> {
    let file: QlsFile = load_file_cfg(&args.config)?;
    let problem_path = args
        .problem
        .or(file.problem)
        .ok_or_else(|| CliError::Config("--problem is required".into()))?;
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("solution.json"));

    let problem = load_problem(&problem_path)?;
    let solution = problem.solve().map_err(|e| match e {
        CoreError::Singular { condition } => CliError::Numerical(format!(
            "rank-deficient normal equation (condition estimate {condition:.3e})"
        )),
        other => CliError::Numerical(other.to_string()),
    })?;
    if solution.condition_estimate > 1e8 {
        eprintln!(
            "qls: warning: condition estimate {:.3e}; solution digits are limited",
            solution.condition_estimate
        );
    }
    let json = serde_json::to_string_pretty(&solution)
        .map_err(|e| CliError::Io(format!("serializing solution: {e}")))?;
    write_out(&out, &json)?;
    println!(
        "qls: {}x{} solved, residual norm {:.6e} (solution: {})",
        problem.m(),
        problem.n(),
        solution.residual_norm,
        resolve_out(&out).display()
    );
    Ok(())
}
