//! `crystalline`: polygons, strata and Artin–Schreier dimensions from JSON input.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 unreadable or invalid
//! input (including usage errors), 3 the input is not a crystal, 4 precision
//! escalation reached its cap, 5 any other error (resource caps, arithmetic
//! limits).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crystalline::artinschreier::{as_dimension, as_stratify, brute_force_as_dimension, corollary3_p_rank};
use crystalline::io::{
    as_instance_from_json, as_stratum_report_to_json, break_points_to_json, crystal_from_json_at, family_from_json_at,
    ordered, polygon_to_json, rational_to_json, stratum_report_to_json, AsInstanceJson, CrystalJson, FamilyJson,
};
use crystalline::polygons::{hodge_polygon, newton_polygon, p_rank};
use crystalline::random::DEFAULT_SEED;
use crystalline::strata::{polygon_svg, scan, verify_step1_identities};
use crystalline::suites::{run_suite, SUITE_NAMES};
use crystalline::{Caps, Error, FieldParams, Rational};

/// Extension degree searched by the brute-force Artin–Schreier oracle.
const ORACLE_MAX_DEGREE: usize = 12;

#[derive(Parser)]
#[command(name = "crystalline", version, about = "Exact computations with F-crystals over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for generated instances.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PrecisionArgs {
    /// Starting precision (default: the one in the input file).
    #[arg(long)]
    precision: Option<u32>,
    /// Largest precision tried when doubling (default: the word limit).
    #[arg(long)]
    precision_cap: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Hodge and Newton polygons, break points and p-rank of one crystal.
    Polygon {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        precision: PrecisionArgs,
    },
    /// Newton, break-point and p-rank strata of a family over closed points.
    Strata {
        #[arg(long)]
        input: PathBuf,
        /// Largest closed-point degree scanned.
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[command(flatten)]
        precision: PrecisionArgs,
        /// Write an SVG of the observed Newton polygons.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Check the break-point reduction identities at the point `a,b`.
        #[arg(long, value_name = "A,B")]
        verify_step1: Option<String>,
    },
    /// Solution dimension of `x = A x^[p]`, or its strata over a family.
    Asdim {
        #[arg(long)]
        input: PathBuf,
        /// Largest closed-point degree, for family input.
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Compare with the brute-force count and the p-rank of the associated crystal.
        #[arg(long)]
        cross_check: bool,
    },
    /// Run the built-in verification suites.
    Verify {
        /// Run only these suites.
        #[arg(long)]
        suite: Vec<String>,
        /// Print the suite names and exit.
        #[arg(long)]
        list: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::ParamMismatch(_)
            | Error::IndexOutOfRange { .. }
            | Error::InvalidSlope { .. } => 2,
            Error::NotACrystal(_) => 3,
            Error::InsufficientPrecision(_) => 4,
            _ => 5,
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure::new(2, format!("--jobs: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult<u8> {
    let caps = caps_from_env()?;
    match &cli.command {
        Command::Polygon { input, precision } => cmd_polygon(cli, input, precision, &caps),
        Command::Strata { input, degree, precision, plot, verify_step1 } => {
            cmd_strata(cli, input, *degree, precision, plot.as_deref(), verify_step1.as_deref(), &caps)
        }
        Command::Asdim { input, degree, cross_check } => cmd_asdim(cli, input, *degree, *cross_check, &caps),
        Command::Verify { suite, list } => cmd_verify(cli, suite, *list),
    }
}

fn caps_from_env() -> CliResult<Caps> {
    match std::env::var("CRYSTALLINE_CAPS") {
        Ok(s) => Caps::default().with_overrides(&s).map_err(|e| Failure::new(2, format!("CRYSTALLINE_CAPS: {e}"))),
        Err(_) => Ok(Caps::default()),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(2, format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

/// Compact JSON plus a newline, to `--output` or stdout.
fn emit(cli: &Cli, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string(value).expect("JSON values serialize");
    text.push('\n');
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::new(5, format!("{}: {e}", path.display()))),
        None => write_stdout(&text),
    }
}

fn write_stdout(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::new(5, format!("stdout: {e}"))),
    }
}

/// Precisions to try: the start, then doubling up to the cap.
fn precision_ladder(p: u64, d: usize, file_m: u32, args: &PrecisionArgs, caps: &Caps) -> CliResult<Vec<u32>> {
    let field = FieldParams::get(p, d)?;
    let mut limit = field.max_precision();
    while limit > 1 && caps.check_modulus(p, limit).is_err() {
        limit -= 1;
    }
    let cap = args.precision_cap.unwrap_or(limit).min(limit);
    let start = args.precision.unwrap_or(file_m);
    if start < file_m {
        return Err(Failure::new(2, format!("--precision {start} is below the input precision {file_m}")));
    }
    if cap < start {
        return Err(Failure::new(2, format!("precision cap {cap} is below the starting precision {start}")));
    }
    let mut ladder = vec![start];
    let mut m = start;
    while m < cap {
        m = (2 * m).min(cap);
        ladder.push(m);
    }
    Ok(ladder)
}

fn cmd_polygon(cli: &Cli, input: &Path, args: &PrecisionArgs, caps: &Caps) -> CliResult<u8> {
    let j: CrystalJson = read_json(input)?;
    let ladder = precision_ladder(j.p, j.d, j.m, args, caps)?;
    let mut last = None;
    for &m in &ladder {
        let c = crystal_from_json_at(&j, m, caps)?;
        match newton_polygon(&c) {
            Ok(np) => {
                let hp = hodge_polygon(&c)?;
                let report = ordered(vec![
                    ("precision", json!(m)),
                    ("hodge", json!(polygon_to_json(&hp))),
                    ("newton", json!(polygon_to_json(&np))),
                    ("break_points", break_points_to_json(&crystalline::polygons::break_points(&np))),
                    ("p_rank", json!(p_rank(&c)?)),
                ]);
                emit(cli, &report)?;
                return Ok(0);
            }
            Err(e @ Error::InsufficientPrecision(_)) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    let e = last.expect("ladder is nonempty");
    Err(Failure::new(4, format!("{e} (tried precisions {ladder:?})")))
}

fn parse_point(s: &str) -> CliResult<(Rational, Rational)> {
    let bad = || Failure::new(2, format!("--verify-step1 expects `a,b` with rational a and b, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: Rational = a.trim().parse().map_err(|_| bad())?;
    let b: Rational = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn cmd_strata(
    cli: &Cli,
    input: &Path,
    degree: usize,
    args: &PrecisionArgs,
    plot: Option<&Path>,
    step1: Option<&str>,
    caps: &Caps,
) -> CliResult<u8> {
    let p0 = step1.map(parse_point).transpose()?;
    let j: FamilyJson = read_json(input)?;
    let ladder = precision_ladder(j.p, j.d, j.m, args, caps)?;
    let mut found = None;
    for &m in &ladder {
        let fam = family_from_json_at(&j, m, caps)?;
        let report = scan(&fam, degree, caps)?;
        let short = report.errors().any(|(_, e)| matches!(e, Error::InsufficientPrecision(_)));
        let done = !short || m == *ladder.last().expect("nonempty");
        found = Some((fam, report, short));
        if done {
            break;
        }
    }
    let (fam, report, short) = found.expect("ladder is nonempty");
    let mut out = stratum_report_to_json(&fam, degree, &report);
    let mut code = if short { 4 } else { 0 };
    if let Some((a, b)) = p0 {
        let r = verify_step1_identities(&fam, (a, b), degree, caps)?;
        out["step1"] = ordered(vec![
            ("point", json!([rational_to_json(a), rational_to_json(b)])),
            ("passed", json!(r.passed)),
            ("checked", json!(r.checked)),
            ("stratum", json!(r.stratum)),
            ("failures", json!(r.failures)),
        ]);
        if !r.passed && code == 0 {
            code = 1;
        }
    }
    if let Some(path) = plot {
        let polygons: Vec<_> = report.newton_strata.keys().cloned().collect();
        let svg = polygon_svg(&polygons, &[])?;
        fs::write(path, svg).map_err(|e| Failure::new(5, format!("{}: {e}", path.display())))?;
    }
    emit(cli, &out)?;
    if short {
        eprintln!("error: some points still lack precision at the cap {}", fam.precision());
    }
    Ok(code)
}

fn cmd_asdim(cli: &Cli, input: &Path, degree: usize, cross_check: bool, caps: &Caps) -> CliResult<u8> {
    let value: Value = read_json(input)?;
    if value.get("vars").is_some() {
        let j: FamilyJson =
            serde_json::from_value(value).map_err(|e| Failure::new(2, format!("{}: {e}", input.display())))?;
        let fam = family_from_json_at(&j, j.m, caps)?;
        let report = as_stratify(&fam, degree, cross_check, caps)?;
        emit(cli, &as_stratum_report_to_json(&report))?;
        return Ok(if report.cross_check_passed() == Some(false) { 1 } else { 0 });
    }
    let j: AsInstanceJson =
        serde_json::from_value(value).map_err(|e| Failure::new(2, format!("{}: {e}", input.display())))?;
    let inst = as_instance_from_json(&j, caps)?;
    let dim = as_dimension(&inst);
    let mut fields = vec![("dimension", json!(dim))];
    let mut code = 0;
    if cross_check {
        let oracle = brute_force_as_dimension(&inst, ORACLE_MAX_DEGREE, caps)?;
        let pr = corollary3_p_rank(&inst)?;
        fields.push(("oracle_dimension", json!(oracle)));
        fields.push(("corollary3_p_rank", json!(pr)));
        if oracle != dim || pr != dim as u64 {
            code = 1;
        }
    }
    emit(cli, &ordered(fields))?;
    Ok(code)
}

fn cmd_verify(cli: &Cli, suites: &[String], list: bool) -> CliResult<u8> {
    if list {
        write_stdout(&SUITE_NAMES.iter().map(|n| format!("{n}\n")).collect::<String>())?;
        return Ok(0);
    }
    let names: Vec<&str> =
        if suites.is_empty() { SUITE_NAMES.to_vec() } else { suites.iter().map(String::as_str).collect() };
    let mut results = Vec::new();
    let mut all = true;
    for name in names {
        let out = run_suite(name, cli.seed).map_err(|e| Failure::new(2, e.to_string()))?;
        all &= out.passed;
        results.push(ordered(vec![
            ("name", json!(out.name)),
            ("passed", json!(out.passed)),
            ("checked", json!(out.checked)),
            ("failed", json!(out.failed)),
            ("details", json!(out.details)),
        ]));
    }
    emit(cli, &ordered(vec![("seed", json!(cli.seed)), ("passed", json!(all)), ("suites", Value::Array(results))]))?;
    Ok(if all { 0 } else { 1 })
}
