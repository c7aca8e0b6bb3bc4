//! Dispatch from a validated configuration to the library routines, and
//! artifact serialization.
//!
//! Exit code contract: 0 when every verdict passes, 1 when a verdict
//! fails, 2 for configuration or usage errors. Artifacts contain no
//! timestamps or machine identifiers, so a rerun with the same config and
//! seeds is byte-identical at any thread count.

use std::fmt::Write as _;

use asclt_core::{
    check_c2, check_c3, integral_against, lemma1_trace, lemma2_check, lemma3_check, lemma4_check,
    lemma5_ratio, run_experiment, BoundReport, ConditionReport, Error, IntegralResult,
    PairSumMode, INTEGRAL_TOL,
};
use serde::Serialize;

use crate::config::{validate_config, ExperimentConfig, Format};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Runs one configuration end to end and returns the process exit code.
pub fn run_config(cfg: &ExperimentConfig) -> i32 {
    let violations = validate_config(cfg);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("config error: {v}");
        }
        return EXIT_USAGE;
    }

    let outcome = if cfg.threads >= 1 {
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
            Ok(pool) => pool,
            Err(e) => {
                eprintln!("thread pool: {e}");
                return EXIT_USAGE;
            }
        };
        pool.install(|| dispatch(cfg))
    } else {
        dispatch(cfg)
    };

    match outcome {
        Ok(run) => match emit(cfg, &run.artifact) {
            Ok(()) => {
                if run.passed {
                    EXIT_PASS
                } else {
                    EXIT_VERDICT_FAIL
                }
            }
            Err(e) => {
                eprintln!("output: {e}");
                EXIT_USAGE
            }
        },
        Err(Error::Inconsistency(msg)) => {
            // Two routes that must agree did not; that is a failed check,
            // not a usage problem.
            eprintln!("verification failed: {msg}");
            EXIT_VERDICT_FAIL
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

struct RunOutcome {
    artifact: String,
    passed: bool,
}

fn dispatch(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    match cfg.operation.as_str() {
        "check-weights" => check_weights(cfg),
        "simulate" => simulate(cfg),
        "verify:lemma2" => verify_lemma2(cfg),
        "verify:lemma3" => verify_lemma3(cfg),
        "verify:lemma4" => verify_lemma4(cfg),
        "verify:lemma5" => verify_lemma5(cfg),
        "integral" => integral(cfg),
        "sweep" => sweep(cfg),
        other => Err(Error::invalid(format!("unknown operation `{other}`"))),
    }
}

fn parse_all(
    cfg: &ExperimentConfig,
) -> Result<(asclt_core::SequenceModel, asclt_core::WeightScheme, asclt_core::LipschitzFunction), Error>
{
    let model = cfg.parse_model().map_err(Error::invalid)?;
    let scheme = cfg.parse_weights().map_err(Error::invalid)?;
    let f = cfg.parse_function().map_err(Error::invalid)?;
    Ok((model, scheme, f))
}

/// Scan length for the weight checks: `n_max`, capped by a custom table.
fn scan_length(cfg: &ExperimentConfig, scheme: &asclt_core::WeightScheme) -> usize {
    scheme.len_limit().map_or(cfg.n_max, |l| l.min(cfg.n_max))
}

#[derive(Serialize)]
struct WeightCheckArtifact {
    weights: String,
    alpha: f64,
    rho: f64,
    scan_length: usize,
    c2: ConditionReport,
    c3: ConditionReport,
    lemma1: ConditionReport,
}

/// Decade evaluation points up to `n`, ending at `n` itself.
fn decade_grid_to(n: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = std::iter::successors(Some(10usize), |&d| d.checked_mul(10))
        .take_while(|&d| d <= n)
        .collect();
    if grid.last() != Some(&n) {
        grid.push(n);
    }
    grid
}

fn check_weights(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let scheme = cfg.parse_weights().map_err(Error::invalid)?;
    let big_k = scan_length(cfg, &scheme);
    if big_k < 10 {
        return Err(Error::invalid(format!(
            "weight checks need a scan length of at least 10, got {big_k}"
        )));
    }
    let c2 = check_c2(&scheme, cfg.alpha, 64.min(big_k / 2).max(1), big_k)?;
    let c3 = check_c3(&scheme, cfg.rho, big_k)?;
    let lemma1 = lemma1_trace(&scheme, cfg.alpha, &decade_grid_to(big_k))?;
    let passed = c2.verdict.passed() && c3.verdict.passed() && lemma1.verdict.passed();

    let artifact = match cfg.format {
        Format::Json => {
            let a = WeightCheckArtifact {
                weights: cfg.weights.clone(),
                alpha: cfg.alpha,
                rho: cfg.rho,
                scan_length: big_k,
                c2,
                c3,
                lemma1,
            };
            serde_json::to_string_pretty(&a).expect("artifact serializes")
        }
        Format::Csv => concat_csv(&[c2.to_csv(), c3.to_csv(), lemma1.to_csv()]),
    };
    Ok(RunOutcome { artifact, passed })
}

fn simulate(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let (model, scheme, f) = parse_all(cfg)?;
    let trace = run_experiment(
        model,
        &scheme,
        &f,
        cfg.n_max,
        &cfg.resolved_checkpoints(),
        &cfg.resolved_seeds(),
    )?;
    // Headline verdict: the median absolute error strictly decreases
    // across checkpoints.
    let medians: Vec<f64> = trace.summary.iter().map(|s| s.median_abs_error).collect();
    let passed = medians.windows(2).all(|w| w[1] < w[0]);
    let artifact = match cfg.format {
        Format::Json => trace.to_json(),
        Format::Csv => trace.to_csv(),
    };
    Ok(RunOutcome { artifact, passed })
}

fn bound_outcome(cfg: &ExperimentConfig, report: BoundReport) -> RunOutcome {
    let passed = report.verdict.passed();
    let artifact = match cfg.format {
        Format::Json => report.to_json().expect("report serializes"),
        Format::Csv => report.to_csv(),
    };
    RunOutcome { artifact, passed }
}

fn condition_outcome(cfg: &ExperimentConfig, report: ConditionReport) -> RunOutcome {
    let passed = report.verdict.passed();
    let artifact = match cfg.format {
        Format::Json => report.to_json().expect("report serializes"),
        Format::Csv => report.to_csv(),
    };
    RunOutcome { artifact, passed }
}

fn verify_lemma2(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let (model, _, f) = parse_all(cfg)?;
    let seed = cfg.resolved_seeds()[0];
    let report = lemma2_check(model, &f, &cfg.pairs, cfg.beta, cfg.reps, seed, None)?;
    Ok(bound_outcome(cfg, report))
}

fn verify_lemma3(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let (model, scheme, f) = parse_all(cfg)?;
    let seed = cfg.resolved_seeds()[0];
    let report = lemma3_check(
        model, &scheme, &f, cfg.k, cfg.m, cfg.n_max, cfg.p, cfg.beta, cfg.reps, seed, None,
    )?;
    Ok(bound_outcome(cfg, report))
}

fn verify_lemma4(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let (model, scheme, f) = parse_all(cfg)?;
    let seed = cfg.resolved_seeds()[0];
    let report = lemma4_check(
        model,
        &scheme,
        &f,
        &cfg.resolved_n_grid(),
        cfg.p,
        cfg.mu,
        cfg.beta,
        cfg.reps,
        seed,
        None,
    )?;
    Ok(bound_outcome(cfg, report))
}

fn verify_lemma5(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let scheme = cfg.parse_weights().map_err(Error::invalid)?;
    let n = scan_length(cfg, &scheme);
    let report = lemma5_ratio(&scheme, cfg.alpha, cfg.eta, n, PairSumMode::Fast)?;
    Ok(condition_outcome(cfg, report))
}

#[derive(Serialize)]
struct IntegralArtifact {
    function: String,
    model: String,
    result: IntegralResult,
}

fn integral(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let (model, _, f) = parse_all(cfg)?;
    let result = integral_against(&f, model.limit_law(), INTEGRAL_TOL)?;
    let artifact = match cfg.format {
        Format::Json => {
            let a = IntegralArtifact {
                function: cfg.function.clone(),
                model: cfg.model.clone(),
                result,
            };
            serde_json::to_string_pretty(&a).expect("artifact serializes")
        }
        Format::Csv => format!(
            "function,model,value,error_estimate,method\n{},{},{},{},{:?}\n",
            cfg.function, cfg.model, result.value, result.error_estimate, result.method
        ),
    };
    Ok(RunOutcome { artifact, passed: true })
}

fn sweep(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let names: Vec<&String> = cfg.sweep.keys().collect();
    let lists: Vec<&Vec<serde_json::Value>> = cfg.sweep.values().collect();
    for (name, list) in names.iter().zip(&lists) {
        if list.is_empty() {
            return Err(Error::invalid(format!("sweep list for `{name}` is empty")));
        }
    }

    let mut summary = String::new();
    for n in &names {
        let _ = write!(summary, "{n},");
    }
    summary.push_str("verdict\n");

    let mut all_passed = true;
    let total: usize = lists.iter().map(|l| l.len()).product();
    for index in 0..total {
        // Mixed-radix unrank, last axis fastest.
        let mut rem = index;
        let mut values = vec![serde_json::Value::Null; names.len()];
        for axis in (0..names.len()).rev() {
            let len = lists[axis].len();
            values[axis] = lists[axis][rem % len].clone();
            rem /= len;
        }

        let mut point = cfg.clone();
        point.operation = cfg.sweep_operation.clone();
        point.sweep.clear();
        point.out = None;
        for (name, value) in names.iter().zip(&values) {
            apply_sweep_value(&mut point, name, value)?;
        }
        let violations = validate_config(&point);
        if !violations.is_empty() {
            return Err(Error::invalid(format!(
                "sweep point {values:?}: {}",
                violations.join("; ")
            )));
        }

        let outcome = dispatch(&point)?;
        all_passed &= outcome.passed;
        for v in &values {
            let _ = write!(summary, "{},", sweep_cell(v));
        }
        let _ = writeln!(summary, "{}", if outcome.passed { "pass" } else { "fail" });
    }
    Ok(RunOutcome { artifact: summary, passed: all_passed })
}

fn sweep_cell(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn apply_sweep_value(
    cfg: &mut ExperimentConfig,
    name: &str,
    value: &serde_json::Value,
) -> Result<(), Error> {
    let bad = || Error::invalid(format!("sweep value {value} unusable for `{name}`"));
    match name {
        "model" | "weights" | "function" => {
            let s = value.as_str().ok_or_else(bad)?.to_string();
            match name {
                "model" => cfg.model = s,
                "weights" => cfg.weights = s,
                _ => cfg.function = s,
            }
        }
        "alpha" | "beta" | "rho" | "r" | "eta" => {
            let x = value.as_f64().ok_or_else(bad)?;
            match name {
                "alpha" => cfg.alpha = x,
                "beta" => cfg.beta = x,
                "rho" => cfg.rho = x,
                "r" => cfg.r = x,
                _ => cfg.eta = x,
            }
        }
        "n_max" | "reps" => {
            let x = value.as_u64().ok_or_else(bad)? as usize;
            match name {
                "n_max" => cfg.n_max = x,
                _ => cfg.reps = x,
            }
        }
        "mu" | "p" => {
            let x = value.as_u64().ok_or_else(bad)? as u32;
            match name {
                "mu" => cfg.mu = x,
                _ => cfg.p = x,
            }
        }
        "master_seed" => cfg.master_seed = value.as_u64().ok_or_else(bad)?,
        other => {
            return Err(Error::invalid(format!("`{other}` is not sweepable")));
        }
    }
    Ok(())
}

/// Joins per-report CSVs that share a header into one file.
fn concat_csv(parts: &[String]) -> String {
    let mut out = String::new();
    for (i, part) in parts.iter().enumerate() {
        if i == 0 {
            out.push_str(part);
        } else if let Some((_, rows)) = part.split_once('\n') {
            out.push_str(rows);
        }
    }
    out
}

fn emit(cfg: &ExperimentConfig, artifact: &str) -> std::io::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, artifact),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            let written = out.write_all(artifact.as_bytes()).and_then(|()| {
                if artifact.ends_with('\n') {
                    Ok(())
                } else {
                    out.write_all(b"\n")
                }
            });
            match written {
                // A closed reader (e.g. `| head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other,
            }
        }
    }
}
