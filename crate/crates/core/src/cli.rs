//! `bbrecog` command line: field-size, sym4, subfield, bench and verify.
//!
//! Exit codes: 0 success, 1 Las Vegas failure, 2 invalid input,
//! 3 verification mismatch.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::is_prime_u64;
use crate::bench;
use crate::blackbox::{BlackBox, OpCounters};
use crate::matgrp::Flavor;
use crate::recog::{
    default_sample_budget, ConstructionResult, RecogConfig, RecogError, Recognizer,
};
use crate::verify::{verify_result, Verdict, DEFAULT_CAP};

/// Environment variable overriding the per-loop retry budget.
pub const RETRY_BUDGET_ENV: &str = "BBRECOG_RETRY_BUDGET";

const EXIT_LAS_VEGAS: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "bbrecog",
    version,
    about = "Sym4 and subfield subgroups in black-box PGL2/PSL2/SL2(q)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Recover k in q = p^k from p and random elements.
    FieldSize(FieldSizeArgs),
    /// Build Sym4 (Alt4 for PSL2 with q = ±3 mod 8, the Q8 normalizer for SL2).
    Sym4(Sym4Args),
    /// Build a subfield subgroup over GF(p^a).
    Subfield(SubfieldArgs),
    /// Operation-count medians over seeded trials.
    Bench(BenchArgs),
    /// Re-check a stored construction result.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    #[arg(long, default_value = "pgl2")]
    pub flavor: Flavor,
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FieldSizeArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub kmax: usize,
    /// Number of random elements; defaults to 16·⌈ln ln p^kmax + 1⌉.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct Sym4Args {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Enumerate the result and compare with the expected group.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SubfieldArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value = "pgl2")]
    pub flavor: Flavor,
    #[arg(long)]
    pub p: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// A report or bare construction result written with --json/--out.
    #[arg(long)]
    pub input: PathBuf,
    /// Largest subgroup that will be enumerated.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// What a command hands back before it is printed.
struct Outcome {
    report: Value,
    text: String,
    code: u8,
}

#[derive(Serialize)]
struct Inputs {
    flavor: Flavor,
    p: u32,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<usize>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kmax: Option<usize>,
}

fn inputs(g: &GroupArgs, a: Option<usize>, kmax: Option<usize>) -> Value {
    serde_json::to_value(Inputs {
        flavor: g.flavor,
        p: g.p,
        k: g.k,
        a,
        seed: g.seed,
        kmax,
    })
    .expect("inputs serialize")
}

fn invalid(msg: impl Into<String>) -> Outcome {
    let msg = msg.into();
    Outcome {
        report: json!({ "error": msg }),
        text: format!("error: {msg}"),
        code: EXIT_INVALID,
    }
}

fn recog_config() -> Result<RecogConfig, String> {
    let mut config = RecogConfig::default();
    if let Ok(v) = std::env::var(RETRY_BUDGET_ENV) {
        config.retry_budget =
            v.parse().ok().filter(|&n: &usize| n > 0).ok_or_else(|| {
                format!("{RETRY_BUDGET_ENV} must be a positive integer, got '{v}'")
            })?;
    }
    Ok(config)
}

fn check_group(g: &GroupArgs) -> Result<(), String> {
    if g.p == 2 || !is_prime_u64(g.p as u64) {
        return Err(format!("--p {} is not an odd prime", g.p));
    }
    if g.k == 0 {
        return Err("--k must be at least 1".into());
    }
    Ok(())
}

fn open_box(g: &GroupArgs) -> Result<BlackBox, String> {
    check_group(g)?;
    BlackBox::new(g.flavor, g.p, g.k, g.seed).map_err(|e| e.to_string())
}

fn verdict_json(v: &Verdict) -> (Value, Value) {
    match v {
        Verdict::Verified(fp) => (json!(true), json!(fp)),
        Verdict::Mismatch { observed, expected } => (
            json!(false),
            json!({ "observed": observed, "expected": expected }),
        ),
        Verdict::Skipped => (json!("skipped"), Value::Null),
    }
}

fn construction_outcome(
    command: &str,
    inputs: Value,
    result: Result<ConstructionResult, RecogError>,
    counters: OpCounters,
    verify: bool,
) -> Outcome {
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            let code = match e {
                RecogError::InvalidSubfieldDegree { .. } | RecogError::UnsupportedFlavor(_) => {
                    EXIT_INVALID
                }
                _ => EXIT_LAS_VEGAS,
            };
            return Outcome {
                report: json!({ "command": command, "inputs": inputs, "error": e.to_string(), "counters": counters }),
                text: format!("{command} failed: {e}"),
                code,
            };
        }
    };
    let verdict = if verify {
        match verify_result(&result, DEFAULT_CAP) {
            Ok(v) => v,
            Err(e) => return invalid(format!("verification could not run: {e}")),
        }
    } else {
        Verdict::Skipped
    };
    let (verified, fp) = verdict_json(&verdict);
    let code = match verdict {
        Verdict::Mismatch { .. } => EXIT_MISMATCH,
        _ => 0,
    };
    let mut text = format!(
        "{} over {}({}^{}): target {} (order {}), {} generators, retries {}\n",
        command,
        result.flavor.name(),
        result.p,
        result.k,
        result.target,
        result.target.order(),
        result.generators.len(),
        result.retries,
    );
    text += &format!(
        "counters: mul {} inv {} eq {} rand {}\n",
        counters.mul, counters.inv, counters.eq, counters.rand
    );
    text += &match &verdict {
        Verdict::Verified(fp) => format!("verified: order {}", fp.order),
        Verdict::Mismatch { observed, .. } => format!(
            "verification MISMATCH: observed order {}",
            observed
                .as_ref()
                .map_or("?".into(), |f| f.order.to_string())
        ),
        Verdict::Skipped => "verified: skipped".into(),
    };
    Outcome {
        report: json!({
            "command": command,
            "inputs": inputs,
            "result": result,
            "verified": verified,
            "fingerprint": fp,
            "counters": counters,
        }),
        text,
        code,
    }
}

fn cmd_field_size(args: &FieldSizeArgs, config: RecogConfig) -> Outcome {
    let g = &args.group;
    let mut bb = match open_box(g) {
        Ok(bb) => bb,
        Err(e) => return invalid(e),
    };
    if args.kmax == 0 {
        return invalid("--kmax must be at least 1");
    }
    let samples = args
        .samples
        .unwrap_or_else(|| default_sample_budget(g.p, args.kmax));
    let found = Recognizer::with_config(&mut bb, config).find_field_size(g.p, args.kmax, samples);
    let counters = bb.counters();
    let inputs = inputs(g, None, Some(args.kmax));
    match found {
        Ok(k) => Outcome {
            report: json!({
                "command": "field-size",
                "inputs": inputs,
                "result": { "recovered_k": k, "true_k": g.k, "matches": k == g.k, "samples": samples },
                "counters": counters,
            }),
            text: format!(
                "recovered_k = {k} (true k = {}, {})\ncounters: mul {} inv {} eq {} rand {}",
                g.k,
                if k == g.k { "match" } else { "MISMATCH" },
                counters.mul,
                counters.inv,
                counters.eq,
                counters.rand
            ),
            code: 0,
        },
        Err(e) => {
            let code = match e {
                RecogError::SampleBudgetTooSmall { .. } => EXIT_INVALID,
                _ => EXIT_LAS_VEGAS,
            };
            Outcome {
                report: json!({ "command": "field-size", "inputs": inputs, "error": e.to_string(), "counters": counters }),
                text: format!("field-size failed: {e}"),
                code,
            }
        }
    }
}

fn cmd_sym4(args: &Sym4Args, config: RecogConfig) -> Outcome {
    let g = &args.group;
    let mut bb = match open_box(g) {
        Ok(bb) => bb,
        Err(e) => return invalid(e),
    };
    let mut rec = Recognizer::with_config(&mut bb, config);
    let result = match g.flavor {
        Flavor::Sl2 => rec.construct_sl2_normalizer(g.p, g.k),
        _ => rec.construct_sym4(g.p, g.k),
    };
    let counters = bb.counters();
    construction_outcome("sym4", inputs(g, None, None), result, counters, args.verify)
}

fn cmd_subfield(args: &SubfieldArgs, config: RecogConfig) -> Outcome {
    let g = &args.group;
    if args.a == 0 || !g.k.is_multiple_of(args.a) {
        return invalid(format!("--a {} does not divide --k {}", args.a, g.k));
    }
    let mut bb = match open_box(g) {
        Ok(bb) => bb,
        Err(e) => return invalid(e),
    };
    let result = Recognizer::with_config(&mut bb, config).construct_subfield(g.p, g.k, args.a);
    let counters = bb.counters();
    construction_outcome(
        "subfield",
        inputs(g, Some(args.a), None),
        result,
        counters,
        args.verify,
    )
}

fn cmd_bench(args: &BenchArgs, config: RecogConfig) -> Outcome {
    for &k in &args.k_list {
        let g = GroupArgs {
            flavor: args.flavor,
            p: args.p,
            k,
            seed: args.seed,
        };
        if let Err(e) = check_group(&g) {
            return invalid(e);
        }
    }
    if args.trials == 0 {
        return invalid("--trials must be at least 1");
    }
    let rows = bench::bench(
        args.flavor,
        args.p,
        &args.k_list,
        args.trials,
        args.seed,
        config,
    );
    let mut text = format!(
        "{:>4} {:>8} {:>12} {:>14} {:>9}\n",
        "k", "trials", "median rand", "median mul", "failures"
    );
    for r in &rows {
        text += &format!(
            "{:>4} {:>8} {:>12} {:>14} {:>9}\n",
            r.k, r.trials, r.total.rand, r.total.mul, r.failures
        );
    }
    let stages: Vec<&String> = rows
        .first()
        .map(|r| r.stages.keys().collect())
        .unwrap_or_default();
    for stage in stages {
        text += &format!("{stage}:");
        for r in &rows {
            if let Some(m) = r.stages.get(stage) {
                text += &format!(" k={} rand {} mul {};", r.k, m.rand, m.mul);
            }
        }
        text.push('\n');
    }
    let failed = rows.iter().any(|r| r.failures > 0);
    Outcome {
        report: json!({
            "command": "bench",
            "inputs": { "flavor": args.flavor, "p": args.p, "k_list": args.k_list, "trials": args.trials, "seed": args.seed },
            "rows": rows,
        }),
        text: text.trim_end().to_string(),
        code: if failed { EXIT_LAS_VEGAS } else { 0 },
    }
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let raw = match fs::read_to_string(&args.input) {
        Ok(s) => s,
        Err(e) => return invalid(format!("cannot read {}: {e}", args.input.display())),
    };
    let value: Value = match serde_json::from_str(&raw) {
        Ok(v) => v,
        Err(e) => return invalid(format!("{} is not JSON: {e}", args.input.display())),
    };
    let body = value.get("result").cloned().unwrap_or(value);
    let result: ConstructionResult = match serde_json::from_value(body) {
        Ok(r) => r,
        // Malformed matrices or fields count as tampering.
        Err(e) => {
            return Outcome {
                report: json!({ "command": "verify", "verified": false, "error": e.to_string() }),
                text: format!("verification MISMATCH: unreadable result ({e})"),
                code: EXIT_MISMATCH,
            }
        }
    };
    let verdict = match verify_result(&result, args.cap) {
        Ok(v) => v,
        Err(e) => return invalid(format!("verification could not run: {e}")),
    };
    let (verified, fp) = verdict_json(&verdict);
    let (text, code) = match &verdict {
        Verdict::Verified(f) => (
            format!("verified: {} of order {}", result.target, f.order),
            0,
        ),
        Verdict::Mismatch { .. } => (
            format!("verification MISMATCH against {}", result.target),
            EXIT_MISMATCH,
        ),
        Verdict::Skipped => (
            format!(
                "verified: skipped ({} exceeds the cap {})",
                result.target.order(),
                args.cap
            ),
            0,
        ),
    };
    Outcome {
        report: json!({
            "command": "verify",
            "inputs": { "input": args.input, "cap": args.cap },
            "target": result.target,
            "verified": verified,
            "fingerprint": fp,
            "counters": OpCounters::default(),
        }),
        text,
        code,
    }
}

/// Runs a parsed command, printing its report; returns the exit code.
pub fn run(cli: Cli) -> u8 {
    let start = Instant::now();
    let (output, outcome) = match recog_config() {
        Err(e) => (None, invalid(e)),
        Ok(config) => match &cli.command {
            Command::FieldSize(a) => (Some(&a.output), cmd_field_size(a, config)),
            Command::Sym4(a) => (Some(&a.output), cmd_sym4(a, config)),
            Command::Subfield(a) => (Some(&a.output), cmd_subfield(a, config)),
            Command::Bench(a) => (Some(&a.output), cmd_bench(a, config)),
            Command::Verify(a) => (Some(&a.output), cmd_verify(a)),
        },
    };
    let mut report = outcome.report;
    if let Value::Object(m) = &mut report {
        if m.get("fingerprint").is_some_and(Value::is_null) {
            m.remove("fingerprint");
        }
        m.insert(
            "wall_time_ms".into(),
            json!(start.elapsed().as_millis() as u64),
        );
    }
    let pretty = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed pipe downstream is not an error worth reporting.
    let _ = if output.is_some_and(|o| o.json) {
        writeln!(io::stdout(), "{pretty}")
    } else if outcome.code == EXIT_INVALID || outcome.code == EXIT_LAS_VEGAS {
        writeln!(io::stderr(), "{}", outcome.text)
    } else {
        writeln!(io::stdout(), "{}", outcome.text)
    };
    if let Some(path) = output.and_then(|o| o.out.as_ref()) {
        if let Err(e) = fs::write(path, format!("{pretty}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_INVALID;
        }
    }
    outcome.code
}

pub fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
