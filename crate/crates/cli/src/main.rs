//! `concatqec`: batch driver for the concatenated-code simulator.
//!
//! Exit codes: 0 success, 1 property violation or numerical failure,
//! 2 usage or configuration error, 3 superoperator budget exceeded.

mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use concatqec::analysis::{self, bound_residual, eps_p_verbatim, parse_rational, threshold_solve_general};
use concatqec::verify::{self, Suite};
use concatqec::{ccp_channel, mc_threshold_scan, overhead, Error};
use serde_json::json;

use crate::config::KeyValues;
use crate::output::{fmt_f64, Output};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn failure(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => 3,
            Error::NoConvergence { .. } | Error::NotIsometry { .. } => 1,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::failure(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Record,
}

#[derive(Debug, Parser)]
#[command(name = "concatqec", version, about = "Concatenated quantum code simulator and analyzer")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Largest primitive-gate error for a target final error.
    Threshold {
        /// Target final error amplitude, e.g. `1/120` or `0.004`.
        #[arg(long)]
        epsilon: String,
        /// Repetition factor; anything but 2 is an extrapolation.
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Also report the linear-regime closed form as printed in the literature.
        #[arg(long)]
        paper_verbatim: bool,
    },
    /// Level-by-level channel contraction of a concatenated procedure.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pauli-frame Monte Carlo threshold scan.
    Mc {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `trials` in the config.
        #[arg(long)]
        trials: Option<u64>,
        /// Overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact resource counts of `CCP_{r,h}`.
    Overhead {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        h: usize,
    },
    /// Residual-error bound of an `l`-qubit, `e`-error-correcting code.
    Bound {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Randomized property suites.
    Verify {
        /// lemmas, bounds, code, counters or all.
        suite: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::failure(format!("thread pool: {e}")))?;
    }
    let out = Output::new(cli.format, cli.out);
    match cli.command {
        Command::Threshold { epsilon, r, paper_verbatim } => threshold(&out, &epsilon, r, paper_verbatim),
        Command::Simulate { config } => simulate(&out, config),
        Command::Mc { config, trials, seed } => mc(&out, config, trials, seed),
        Command::Overhead { r, l, h } => overhead_cmd(&out, r, l, h),
        Command::Bound { l, e, eps } => bound(&out, l, e, eps),
        Command::Verify { suite, trials, seed } => verify_cmd(&out, &suite, trials, seed),
    }
}

fn threshold(out: &Output, epsilon: &str, r: usize, verbatim: bool) -> Result<u8, CliError> {
    let eps = parse_rational(epsilon)?;
    let t = threshold_solve_general(&eps, r)?;
    let mut header = vec!["epsilon", "r", "eps_d", "eps_p", "c", "regime"];
    let mut row = vec![
        t.epsilon.to_string(),
        t.r.to_string(),
        t.eps_d.to_string(),
        t.eps_p.to_string(),
        t.c.to_string(),
        t.regime.name().to_string(),
    ];
    let mut record = json!({
        "epsilon": t.epsilon.to_string(),
        "r": t.r,
        "eps_d": t.eps_d.to_string(),
        "eps_p": t.eps_p.to_string(),
        "c": t.c.to_string(),
        "regime": t.regime.name(),
        "eps_p_float": fmt_f64(analysis::rational_to_f64(&t.eps_p)),
        "extrapolated": r != 2,
    });
    if verbatim {
        let v = eps_p_verbatim(&t.epsilon);
        let c = &v / &t.epsilon;
        let ok = analysis::constraints_hold(2, &t.epsilon, &t.epsilon, &v);
        header.extend(["eps_p_verbatim", "c_verbatim", "verbatim_satisfies_constraints"]);
        row.extend([v.to_string(), c.to_string(), ok.to_string()]);
        record["eps_p_verbatim"] = json!(v.to_string());
        record["c_verbatim"] = json!(c.to_string());
        record["verbatim_satisfies_constraints"] = json!(ok);
    }
    out.emit(&header, &[row], &record)?;
    Ok(0)
}

fn simulate(out: &Output, path: PathBuf) -> Result<u8, CliError> {
    let cfg = config::simulate_config(KeyValues::load(&path)?)?;
    let reports = ccp_channel(&cfg)?;
    let header = ["level", "error_amplitude", "n", "qubits", "parallel_ops", "total_ops"];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|rep| {
            vec![
                rep.level.to_string(),
                fmt_f64(rep.error_amplitude),
                rep.counters.n.to_string(),
                rep.counters.qubits.to_string(),
                rep.counters.parallel_ops.to_string(),
                rep.counters.total_ops.to_string(),
            ]
        })
        .collect();
    let eps_d = cfg.channel.channel_error()?;
    let levels: Vec<_> = reports
        .iter()
        .zip(&rows)
        .map(|(rep, row)| {
            json!({
                "level": rep.level,
                "error_amplitude": row[1],
                "n": row[2],
                "qubits": row[3],
                "parallel_ops": row[4],
                "total_ops": row[5],
                "trace_defect": fmt_f64(rep.channel.trace_defect()),
            })
        })
        .collect();
    let summary = json!({
        "code": cfg.code.name(),
        "r": cfg.repetition,
        "levels": cfg.level,
        "channel": cfg.channel.to_string(),
        "channel_error": fmt_f64(eps_d),
        "noise": cfg.noise.mode().name(),
        "op_error": cfg.noise.op_error().to_string(),
        "extra_wait": cfg.extra_wait.map(|w| w.to_string()),
        "final_error_amplitude": rows.last().map(|r| r[1].clone()),
    });
    let record = json!({ "summary": summary, "levels": levels });
    out.emit(&header, &rows, &record)?;
    out.summary(&summary)?;
    Ok(0)
}

fn mc(out: &Output, path: PathBuf, trials: Option<u64>, seed: Option<u64>) -> Result<u8, CliError> {
    let (code, mut cfg) = config::mc_config(KeyValues::load(&path)?)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if cfg.trials == 0 {
        return Err(CliError::usage("trials must be at least 1"));
    }
    let scan = mc_threshold_scan(&code, &cfg)?;
    let header = ["p", "level", "logical_rate", "ci_low", "ci_high"];
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.p),
                r.level.to_string(),
                fmt_f64(r.logical_rate),
                fmt_f64(r.ci_low),
                fmt_f64(r.ci_high),
            ]
        })
        .collect();
    let summary = json!({
        "code": code.name(),
        "family": cfg.family.name(),
        "gate_error_prob": fmt_f64(cfg.gate_error_prob),
        "r": cfg.r,
        "levels": cfg.levels,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "pseudo_threshold_crossing": scan.crossing.map(fmt_f64),
    });
    let table: Vec<_> = scan
        .rows
        .iter()
        .zip(&rows)
        .map(|(r, row)| {
            json!({
                "p": row[0],
                "level": r.level,
                "logical_rate": row[2],
                "ci_low": row[3],
                "ci_high": row[4],
                "counts": r.estimate.counts,
            })
        })
        .collect();
    let record = json!({ "summary": summary, "rows": table });
    out.emit(&header, &rows, &record)?;
    out.summary(&summary)?;
    Ok(0)
}

fn overhead_cmd(out: &Output, r: usize, l: usize, h: usize) -> Result<u8, CliError> {
    let o = overhead(r, l, h)?;
    let header = ["r", "l", "h", "n", "qubits", "parallel_ops", "total_ops", "delta"];
    let row = vec![
        r.to_string(),
        l.to_string(),
        h.to_string(),
        o.n.to_string(),
        o.qubits.to_string(),
        o.parallel_ops.to_string(),
        o.total_ops.to_string(),
        fmt_f64(o.delta),
    ];
    let record = json!({
        "r": r, "l": l, "h": h,
        "n": row[3], "qubits": row[4], "parallel_ops": row[5], "total_ops": row[6], "delta": row[7],
    });
    out.emit(&header, &[row], &record)?;
    Ok(0)
}

fn bound(out: &Output, l: usize, e: usize, eps: f64) -> Result<u8, CliError> {
    let b = bound_residual(l, e, eps)?;
    let header = ["l", "e", "eps", "exact_sum", "simplified", "simplified_valid"];
    let row = vec![
        l.to_string(),
        e.to_string(),
        fmt_f64(eps),
        fmt_f64(b.exact_sum),
        fmt_f64(b.simplified),
        b.simplified_valid.to_string(),
    ];
    let record = json!({
        "l": l, "e": e, "eps": row[2],
        "exact_sum": row[3], "simplified": row[4], "simplified_valid": b.simplified_valid,
    });
    out.emit(&header, &[row], &record)?;
    Ok(0)
}

fn verify_cmd(out: &Output, suite: &str, trials: usize, seed: u64) -> Result<u8, CliError> {
    let suite: Suite = suite.parse()?;
    if trials == 0 {
        return Err(CliError::usage("trials must be at least 1"));
    }
    let report = verify::run(suite, trials, seed)?;
    let header = ["property", "cases", "violations", "worst_margin", "status"];
    let rows: Vec<Vec<String>> = report
        .properties
        .iter()
        .map(|p| {
            vec![
                p.name.clone(),
                p.cases.to_string(),
                p.violations.to_string(),
                fmt_f64(p.worst_margin),
                if p.passed() { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let record = serde_json::to_value(&report).map_err(|e| CliError::failure(e.to_string()))?;
    out.emit(&header, &rows, &record)?;
    if report.passed() {
        return Ok(0);
    }
    let mut err = std::io::stderr().lock();
    for p in report.properties.iter().filter(|p| !p.passed()) {
        let cx = json!({ "property": p.name, "violations": p.violations, "counterexample": p.counterexample });
        writeln!(err, "violation: {cx}")?;
    }
    Ok(1)
}
