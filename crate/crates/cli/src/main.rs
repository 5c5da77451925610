//! `hominv`: check, invert and count preimages of homogeneous polynomial maps.

mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hominv::degree::default_starts;
use hominv::hypotheses::default_sample_count;
use hominv::linalg::{norm, sub};
use hominv::{
    check_hypotheses, format_map, mapping_degree, parse_map, ContinuationConfig64, Inverter, MapSpec64, Verdict,
};

use report::{Failure, RoundTripSummary, RunReport, TOOL_VERSION};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "hominv", version, about = "Global inversion of positively homogeneous maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the inversion hypotheses numerically.
    Check(Common),
    /// Invert the map at one or more targets.
    Invert(Common),
    /// Count signed preimages of a single target.
    Degree(Common),
    /// Invert targets and report the residual of f(f^-1(eta)).
    Roundtrip(Common),
}

#[derive(Args)]
struct Common {
    /// Map definition file.
    map: PathBuf,
    /// Write the JSON report to a file, or `-` for standard output.
    #[arg(long, value_name = "PATH")]
    json: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sphere sample count; defaults to 10000 n.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Residual tolerance relative to max(1, |eta|).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Run inversion or degree even if the hypotheses fail or n < 3.
    #[arg(long)]
    force: bool,
    /// Record continuation waypoints.
    #[arg(long)]
    trace: bool,
    /// Comma-separated target vector; repeat for several targets.
    #[arg(long = "target", value_name = "ETA", allow_hyphen_values = true)]
    targets: Vec<String>,
    /// Multistart count for degree; defaults to 64 n.
    #[arg(long)]
    starts: Option<usize>,
    /// Number of seeded random targets for roundtrip when none are given.
    #[arg(long, default_value_t = 100)]
    count: usize,
}

struct Outcome {
    report: RunReport,
    code: u8,
}

fn parse_target(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad target component `{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("target `{s}` has {} components, map has n = {n}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("target `{s}` is not finite"));
    }
    Ok(v)
}

/// Seeded targets with `log10 |η|` uniform on `[-3, 3]`.
fn random_targets(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dirs = hominv::sample_sphere::<f64>(n, count, seed ^ 0x7267_7470);
    let k = dirs.points.len().max(1);
    (0..count)
        .map(|i| {
            let u = (i as f64 + 0.5) / count as f64;
            let r = 10f64.powf(-3.0 + 6.0 * u);
            dirs.points[i % k].iter().map(|x| x * r).collect()
        })
        .collect()
}

fn run(name: &'static str, args: &Common) -> Result<Outcome, String> {
    let mut timing = BTreeMap::new();
    let clock = Instant::now();
    let src = std::fs::read_to_string(&args.map).map_err(|e| format!("{}: {e}", args.map.display()))?;
    let map: MapSpec64 = parse_map(&src).map_err(|e| format!("{}:{}: {e}", args.map.display(), e.position()))?;
    timing.insert("parse", ms(clock));
    let n = map.dim();

    let targets: Vec<Vec<f64>> = args.targets.iter().map(|t| parse_target(t, n)).collect::<Result<_, _>>()?;
    match name {
        "invert" if targets.is_empty() => return Err("invert needs at least one --target".into()),
        "degree" if targets.len() != 1 => return Err("degree needs exactly one --target".into()),
        _ => {}
    }
    if args.tol <= 0.0 || !args.tol.is_finite() {
        return Err("--tol must be positive".into());
    }

    let clock = Instant::now();
    let samples = args.samples.unwrap_or_else(|| default_sample_count(n));
    if samples == 0 {
        return Err("--samples must be positive".into());
    }
    let hypothesis = check_hypotheses(&map, samples, args.seed);
    timing.insert("check", ms(clock));

    let mut report = RunReport {
        tool_version: TOOL_VERSION,
        command: name,
        map_echo: format_map(&map).unwrap_or_default(),
        seed: args.seed,
        forced: args.force,
        hypothesis,
        inversions: Vec::new(),
        degree: None,
        roundtrip: None,
        warnings: Vec::new(),
        failure: None,
        timing_ms: BTreeMap::new(),
    };
    let verdict = report.hypothesis.overall;
    if verdict == Verdict::HypothesesMetButLowDimension {
        report
            .warnings
            .push("hypotheses-met-but-n<3: for n = 2 the map need not be globally invertible".into());
    }

    if name == "check" {
        report.timing_ms = timing;
        let code = if verdict == Verdict::Fail { EXIT_REFUSED } else { EXIT_OK };
        return Ok(Outcome { report, code });
    }

    if verdict != Verdict::Pass {
        if !args.force {
            let why = match verdict {
                Verdict::HypothesesMetButLowDimension => format!("n = {n} < 3; rerun with --force to explore"),
                _ => report.hypothesis.reasons.join("; "),
            };
            report.failure = Some(Failure::from_error(&hominv::Error::Precondition(why), None));
            report.timing_ms = timing;
            return Ok(Outcome {
                report,
                code: EXIT_REFUSED,
            });
        }
        report
            .warnings
            .push("forced run: the inversion hypotheses are not certified for this map".into());
    }

    let cfg = ContinuationConfig64 {
        tol: args.tol,
        force: args.force,
        trace: args.trace,
        ..Default::default()
    };
    let mut code = EXIT_OK;
    let clock = Instant::now();
    if name == "degree" {
        let starts = args.starts.unwrap_or_else(|| default_starts(n));
        match mapping_degree(&map, &targets[0], starts, &cfg, &report.hypothesis) {
            Ok(d) => {
                if d.possible_missed_roots {
                    report
                        .warnings
                        .push("confirmation pass found a different root count; degree may be incomplete".into());
                }
                report.degree = Some(d);
            }
            Err(e) => {
                report.failure = Some(Failure::from_error(&e, Some(&targets[0])));
                code = EXIT_NUMERICAL;
            }
        }
        timing.insert("degree", ms(clock));
    } else {
        let targets = if targets.is_empty() {
            random_targets(n, args.count, args.seed)
        } else {
            targets
        };
        let inverter = match Inverter::new(&map, &report.hypothesis, cfg) {
            Ok(inv) => inv,
            Err(e) => {
                report.failure = Some(Failure::from_error(&e, None));
                report.timing_ms = timing;
                return Ok(Outcome {
                    report,
                    code: EXIT_NUMERICAL,
                });
            }
        };
        let results = inverter.invert_batch(&targets);
        drop(inverter);
        let mut worst = 0.0f64;
        for (eta, r) in targets.iter().zip(results) {
            match r {
                Ok(inv) => {
                    let image = map.eval(&inv.xi).unwrap_or_default();
                    let scale = norm(eta);
                    if scale > 0.0 && image.len() == n {
                        worst = worst.max(norm(&sub(&image, eta)) / scale);
                    }
                    report.inversions.push(inv);
                }
                Err(e) if report.failure.is_none() => {
                    report.failure = Some(Failure::from_error(&e, Some(eta)));
                    code = EXIT_NUMERICAL;
                }
                Err(_) => {}
            }
        }
        if name == "roundtrip" {
            report.roundtrip = Some(RoundTripSummary {
                targets: targets.len(),
                max_relative_residual: worst,
            });
        }
        timing.insert("invert", ms(clock));
    }
    report.timing_ms = timing;
    Ok(Outcome { report, code })
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn emit(out: &Outcome, json: Option<&str>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(&out.report).map_err(|e| e.to_string())? + "\n";
    match json {
        Some("-") => {
            eprint!("{}", out.report.summary());
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
        Some(path) => {
            print!("{}", out.report.summary());
            std::fs::write(path, text).map_err(|e| format!("{path}: {e}"))
        }
        None => {
            print!("{}", out.report.summary());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let (name, args) = match &cli.command {
        Command::Check(a) => ("check", a),
        Command::Invert(a) => ("invert", a),
        Command::Degree(a) => ("degree", a),
        Command::Roundtrip(a) => ("roundtrip", a),
    };
    let outcome = match run(name, args) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(msg) = emit(&outcome, args.json.as_deref()) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    ExitCode::from(outcome.code)
}
