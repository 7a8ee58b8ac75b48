//! Command-line entry point: reproducible experiments over the Hermite-basis
//! machinery with bit-stable CSV/JSON outputs.
//!
//! Exit codes: 0 = pass, 2 = assertion failure (a monitored invariant or
//! cross-check failed at runtime), 3 = usage error (bad flags or parameters
//! rejected by a module precondition).

use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use strichartz_core::flows::{
    self, direct_quadrature_oracle, CoeffVector, FlowDirection, FlowError, FlowReport,
    GradientFlowParams, HamiltonianFlowParams,
};
use strichartz_core::hessian::{self, HessianConvention, HessianError};
use strichartz_core::inequality::{self, InequalityError};
use strichartz_core::integrals::{ExponentQ, IntegralsError, LambdaTable};
use strichartz_core::fmt_f64;
use strichartz_core::linalg::Spectrum;
use strichartz_core::qmho::{self, QmhoError};

#[derive(Parser)]
#[command(name = "strichartz", version, about = "Numerical laboratory for the Strichartz functional in the Hermite basis")]
struct Cli {
    /// Cap the worker threads used for table and matrix assembly.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Λ coefficient table (reused untouched if the file already
    /// matches) and write it as versioned JSON.
    Lambda {
        /// Highest Hermite mode in the table.
        #[arg(long)]
        order: usize,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate a flow of the functional and dump the trajectory as CSV.
    Flow {
        #[command(subcommand)]
        kind: FlowKind,
    },
    /// Assemble and diagonalize a Hessian; write the spectrum.
    Hessian {
        #[command(subcommand)]
        target: HessianTarget,
    },
    /// Verify the exact binomial-sum bound (default) or the d-dimensional
    /// column-sum inequality (`column`).
    Inequality {
        /// Largest n for the exact sweep.
        #[arg(long, default_value_t = 10_000)]
        nmax: u64,
        /// Emit per-n margins (as decimal strings) up to this n.
        #[arg(long, default_value_t = 200)]
        margins_up_to: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        mode: Option<InequalityMode>,
    },
    /// The exactly solvable harmonic-oscillator reference model.
    Qmho {
        #[command(subcommand)]
        kind: QmhoKind,
    },
    /// Cross-checks between independent evaluation routes.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
}

#[derive(Subcommand)]
enum FlowKind {
    /// Projected gradient flow on the unit sphere (ascent by default).
    Gradient {
        /// Initial condition: `gaussian`, `mode:m`, `gaussian+noise:eps:seed`,
        /// or a JSON array of [re, im] pairs.
        #[arg(long, default_value = "gaussian")]
        init: String,
        /// Truncation order N (modes 0..=N).
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value = "ascent")]
        direction: Direction,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 20_000)]
        max_steps: usize,
        /// Stop when the gradient norm falls below this.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        record_every: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hamiltonian flow integrated by RK4 with conservation monitoring.
    Hamiltonian {
        #[arg(long, default_value = "gaussian")]
        init: String,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        /// Final time (dt * steps).
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        record_every: usize,
        /// Relative drift allowed in H, P, Q (10x this aborts).
        #[arg(long, default_value_t = 1e-8)]
        conservation_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum HessianTarget {
    /// The 1d block-plus-tail Hessian at Hermite mode m.
    Mode {
        #[arg(long)]
        m: usize,
        /// Diagonal tail cutoff K (> 2m).
        #[arg(long, default_value_t = 400)]
        tail: usize,
        /// Zero-classification tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The d-dimensional Hessian at the Gaussian.
    Gaussian {
        #[arg(long)]
        dim: u32,
        /// Per-coordinate truncation N.
        #[arg(long)]
        nmax: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Convention::Section8)]
        convention: Convention,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Positive-eigenvalue counts and ratio against 2m for a range of modes.
    Ratio {
        #[arg(long, default_value_t = 1)]
        m_min: usize,
        #[arg(long)]
        m_max: usize,
        #[arg(long, default_value_t = 400)]
        tail: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum InequalityMode {
    /// Column-sum checks for every multi-index with |k| <= kmax.
    Column {
        #[arg(long)]
        dim: u32,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum QmhoKind {
    /// Explicit-Euler gradient flow of the Rayleigh quotient.
    Flow {
        /// Comma-separated real coefficients, e.g. `1,0.1,0.1`.
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constrained Hessian entries 4(k-m) at mode m.
    Hessian {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleKind {
    /// Λ-sum numerator against direct space-time quadrature on a battery of
    /// low-mode coefficient vectors.
    Check {
        /// Highest mode of the test vectors.
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Gauss–Hermite size for the spatial integral (0 = automatic).
        #[arg(long, default_value_t = 0)]
        spatial: usize,
        /// Midpoint grid size for the time integral (0 = automatic).
        #[arg(long, default_value_t = 0)]
        time: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Ascent,
    Descent,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Section8,
    CombIneq,
    PaperH,
}

impl From<Convention> for HessianConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Section8 => HessianConvention::Section8,
            Convention::CombIneq => HessianConvention::CombIneq,
            Convention::PaperH => HessianConvention::PaperH,
        }
    }
}

enum Failure {
    Usage(String),
    Assertion(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 3,
            Failure::Assertion(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Assertion(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Assertion(format!("I/O error: {e}"))
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match &e {
            FlowError::ZeroVector
            | FlowError::TableTooSmall { .. }
            | FlowError::BadPreset(_) => Failure::Usage(e.to_string()),
            FlowError::Integrals(inner) => classify_integrals(inner, e.to_string()),
            _ => Failure::Assertion(e.to_string()),
        }
    }
}

fn classify_integrals(e: &IntegralsError, msg: String) -> Failure {
    match e {
        IntegralsError::LambdaOrderCap { .. }
        | IntegralsError::DimensionMismatch(_, _)
        | IntegralsError::ZeroDimension => Failure::Usage(msg),
        _ => Failure::Assertion(msg),
    }
}

impl From<IntegralsError> for Failure {
    fn from(e: IntegralsError) -> Self {
        let msg = e.to_string();
        classify_integrals(&e, msg)
    }
}

impl From<HessianError> for Failure {
    fn from(e: HessianError) -> Self {
        match &e {
            HessianError::TailCutoffTooSmall { .. }
            | HessianError::MatrixTooLarge { .. }
            | HessianError::ModeTooSmall(_)
            | HessianError::RatioUndefinedAtGaussian
            | HessianError::ExcludedIndex(_) => Failure::Usage(e.to_string()),
            _ => Failure::Assertion(e.to_string()),
        }
    }
}

impl From<InequalityError> for Failure {
    fn from(e: InequalityError) -> Self {
        match &e {
            InequalityError::ZeroN => Failure::Usage(e.to_string()),
            InequalityError::Integrals(inner) => classify_integrals(inner, e.to_string()),
            _ => Failure::Assertion(e.to_string()),
        }
    }
}

impl From<QmhoError> for Failure {
    fn from(e: QmhoError) -> Self {
        match &e {
            QmhoError::ZeroVector | QmhoError::CriticalModeDirection(_) => {
                Failure::Usage(e.to_string())
            }
            QmhoError::StepTooLarge { .. } => Failure::Assertion(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    if let Some(threads) = cli.threads {
        // ignore failure: the pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(path, bytes)?;
        }
        None => {
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

/// Loads a Λ table for `order` from `STRICHARTZ_CACHE_DIR` when a valid file
/// is there, otherwise builds it (and caches it, best effort).
fn load_or_build_table(order: usize) -> Result<LambdaTable, Failure> {
    let cache: Option<PathBuf> =
        std::env::var_os("STRICHARTZ_CACHE_DIR").map(PathBuf::from).filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = &cache {
        let path = dir.join(format!("lambda_{order}.json"));
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(table) = LambdaTable::from_json_str(&text) {
                if table.max_order() == order {
                    return Ok(table);
                }
            }
        }
    }
    let table = LambdaTable::build(order)?;
    if let Some(dir) = &cache {
        let _ = fs::create_dir_all(dir);
        if let Ok(mut file) = fs::File::create(dir.join(format!("lambda_{order}.json"))) {
            let _ = table.write_json(&mut file);
        }
    }
    Ok(table)
}

fn table_matches(path: &Path, order: usize) -> bool {
    match fs::read_to_string(path) {
        Ok(text) => {
            LambdaTable::from_json_str(&text).map(|t| t.max_order() == order).unwrap_or(false)
        }
        Err(_) => false,
    }
}

fn spectrum_bytes(
    spectrum: &Spectrum,
    format: Format,
    extra: serde_json::Value,
) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            spectrum.write_csv(&mut buf)?;
            Ok(buf)
        }
        Format::Json => {
            let mut value = spectrum.to_json();
            if let (Some(obj), Some(extra_obj)) = (value.as_object_mut(), extra.as_object()) {
                for (k, v) in extra_obj {
                    obj.insert(k.clone(), v.clone());
                }
            }
            let mut buf = serde_json::to_vec_pretty(&value)
                .map_err(|e| Failure::Assertion(e.to_string()))?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Lambda { order, out } => {
            if table_matches(&out, order) {
                eprintln!("table {} already up to date, reusing", out.display());
                return Ok(());
            }
            let table = LambdaTable::build(order)?;
            let mut buf = Vec::new();
            table.write_json(&mut buf)?;
            write_output(&Some(out), &buf)
        }

        Command::Flow { kind } => run_flow(kind),

        Command::Hessian { target } => run_hessian(target),

        Command::Inequality { nmax, margins_up_to, out, mode } => match mode {
            None => {
                let report = inequality::hessest_check(nmax)?;
                let margins: Vec<serde_json::Value> = (1..=nmax.min(margins_up_to))
                    .map(|n| {
                        serde_json::json!({
                            "n": n,
                            "margin": inequality::hessest_margin(n).to_string(),
                            "equality": report.equalities.contains(&n),
                        })
                    })
                    .collect();
                let value = serde_json::json!({
                    "schema_version": 1,
                    "n_max": report.n_max,
                    "equalities": report.equalities,
                    "violations": report.violations,
                    "key_steps_checked": report.key_steps_checked,
                    "margins": margins,
                });
                let mut buf = serde_json::to_vec_pretty(&value)
                    .map_err(|e| Failure::Assertion(e.to_string()))?;
                buf.push(b'\n');
                write_output(&out, &buf)
            }
            Some(InequalityMode::Column { dim, kmax, out }) => {
                let q = ExponentQ::from_dimension(dim)?;
                let checks = inequality::column_sum_sweep(dim, kmax, q)?;
                let all_hold = checks.iter().all(|c| c.holds);
                let value = serde_json::json!({
                    "schema_version": 1,
                    "dimension": dim,
                    "k_max": kmax,
                    "q": q.q(),
                    "all_hold": all_hold,
                    "checks": checks,
                });
                let mut buf = serde_json::to_vec_pretty(&value)
                    .map_err(|e| Failure::Assertion(e.to_string()))?;
                buf.push(b'\n');
                write_output(&out, &buf)?;
                if all_hold {
                    Ok(())
                } else {
                    Err(Failure::Assertion("a column-sum inequality failed".into()))
                }
            }
        },

        Command::Qmho { kind } => run_qmho(kind),

        Command::Oracle { kind } => run_oracle(kind),
    }
}

fn run_flow(kind: FlowKind) -> Result<(), Failure> {
    match kind {
        FlowKind::Gradient { init, order, direction, step, max_steps, tol, record_every, out } => {
            let alpha0 = CoeffVector::parse_preset(&init, order)?;
            let table = load_or_build_table(order)?;
            let params = GradientFlowParams {
                direction: match direction {
                    Direction::Ascent => FlowDirection::Ascent,
                    Direction::Descent => FlowDirection::Descent,
                },
                initial_step: step,
                residual_tol: tol,
                max_steps,
                record_every: record_every.max(1),
                ..Default::default()
            };
            let report = flows::gradient_flow(&alpha0, &table, &params)?;
            write_flow_csv(&report, &out)?;
            eprintln!(
                "gradient flow: {} rows, converged = {}, final residual = {:.3e}",
                report.rows.len(),
                report.converged,
                report.final_residual
            );
            Ok(())
        }
        FlowKind::Hamiltonian {
            init,
            order,
            dt,
            t,
            record_every,
            conservation_tol,
            out,
        } => {
            if dt <= 0.0 || t <= 0.0 {
                return Err(Failure::Usage("dt and t must be positive".into()));
            }
            let alpha0 = CoeffVector::parse_preset(&init, order)?;
            let table = load_or_build_table(order)?;
            let n_steps = (t / dt).round() as usize;
            let params = HamiltonianFlowParams {
                dt,
                n_steps: n_steps.max(1),
                record_every: record_every.max(1),
                conservation_tol,
            };
            let report = flows::hamiltonian_flow(&alpha0, &table, &params)?;
            write_flow_csv(&report, &out)?;
            if let Some(d) = report.drift {
                eprintln!(
                    "hamiltonian flow: drift H {:.3e}, P {:.3e}, Q {:.3e}",
                    d.h, d.p, d.q
                );
            }
            Ok(())
        }
    }
}

fn write_flow_csv(report: &FlowReport, out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write_output(out, &buf)
}

fn run_hessian(target: HessianTarget) -> Result<(), Failure> {
    match target {
        HessianTarget::Mode { m, tail, tol, format, out } => {
            let spectrum = hessian::spectrum_1d(m, tail, tol)?;
            let gap = spectrum.nearest_negative().map(|v| -v);
            let extra = serde_json::json!({
                "target": "mode",
                "m": m,
                "tail_cutoff": tail,
                "gap": gap,
            });
            let bytes = spectrum_bytes(&spectrum, format, extra)?;
            write_output(&out, &bytes)
        }
        HessianTarget::Gaussian { dim, nmax, tol, convention, format, out } => {
            let conv: HessianConvention = convention.into();
            let (spectrum, gap) = hessian::spectrum_gaussian(dim, nmax, tol, conv)?;
            let extra = serde_json::json!({
                "target": "gaussian",
                "dimension": dim,
                "n_max": nmax,
                "convention": conv.label(),
                "gap": gap,
            });
            let bytes = spectrum_bytes(&spectrum, format, extra)?;
            write_output(&out, &bytes)
        }
        HessianTarget::Ratio { m_min, m_max, tail, out } => {
            if m_min == 0 || m_min > m_max {
                return Err(Failure::Usage("need 1 <= m-min <= m-max".into()));
            }
            let mut buf = Vec::new();
            writeln!(buf, "m,block_positive,tail_positive,ratio")?;
            for m in m_min..=m_max {
                let c = hessian::positive_ratio(m, tail)?;
                writeln!(buf, "{m},{},{},{}", c.block, c.tail, fmt_f64(c.ratio))?;
            }
            write_output(&out, &buf)
        }
    }
}

fn run_qmho(kind: QmhoKind) -> Result<(), Failure> {
    match kind {
        QmhoKind::Flow { init, step, steps, out } => {
            let alpha0: Vec<f64> = init
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Usage(format!("bad --init {init:?}: {e}")))?;
            let traj = qmho::qmho_flow(&alpha0, step, steps)?;
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            write_output(&out, &buf)?;
            eprintln!("qmho flow: final Q = {}", traj.final_q());
            Ok(())
        }
        QmhoKind::Hessian { m, kmax, out } => {
            let mut buf = Vec::new();
            writeln!(buf, "k,entry")?;
            for k in 0..=kmax {
                if k == m {
                    continue;
                }
                let v = qmho::qmho_hessian_diag(m, k)?;
                writeln!(buf, "{k},{}", fmt_f64(v))?;
            }
            write_output(&out, &buf)
        }
    }
}

fn run_oracle(kind: OracleKind) -> Result<(), Failure> {
    match kind {
        OracleKind::Check { order, tol, spatial, time, out } => {
            let table = load_or_build_table(order)?;
            let spatial = if spatial == 0 { 3 * order + 6 } else { spatial };
            let time = if time == 0 { 3 * order + 6 } else { time };

            let mut cases: Vec<(String, CoeffVector)> = (0..=order)
                .map(|m| (format!("mode:{m}"), CoeffVector::basis(m, order)))
                .collect();
            if order >= 1 {
                let inv = 1.0 / 2f64.sqrt();
                let json = format!("[[{inv}, 0.0], [{inv}, 0.0]]");
                cases.push(("(e0+e1)/sqrt(2)".into(), CoeffVector::from_json_pairs(&json)?));
            }
            for seed in [1u64, 2, 3] {
                cases.push((
                    format!("gaussian+noise:0.3:{seed}"),
                    CoeffVector::parse_preset(&format!("gaussian+noise:0.3:{seed}"), order)?,
                ));
            }

            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for (name, alpha) in &cases {
                let lambda_sum = flows::strichartz_numerator(alpha, &table)?;
                let direct = direct_quadrature_oracle(alpha, spatial, time)?;
                let rel = (lambda_sum - direct).abs() / direct.abs().max(1e-300);
                worst = worst.max(rel);
                rows.push(serde_json::json!({
                    "case": name,
                    "lambda_sum": lambda_sum,
                    "direct_quadrature": direct,
                    "relative_deviation": rel,
                }));
            }
            let value = serde_json::json!({
                "schema_version": 1,
                "order": order,
                "spatial_size": spatial,
                "time_size": time,
                "tolerance": tol,
                "worst_relative_deviation": worst,
                "pass": worst < tol,
                "cases": rows,
            });
            let mut buf =
                serde_json::to_vec_pretty(&value).map_err(|e| Failure::Assertion(e.to_string()))?;
            buf.push(b'\n');
            write_output(&out, &buf)?;
            if worst < tol {
                Ok(())
            } else {
                Err(Failure::Assertion(format!(
                    "oracle deviation {worst:e} exceeds tolerance {tol:e}"
                )))
            }
        }
    }
}
