use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use zp_wiener::bounds::{binomial, extremal_search, ExtremalResult, SearchConfig, Strategy, EXHAUSTIVE_CAP};
use zp_wiener::dlvp::{continuous_l1, hardy_ratio, shell_concentration_check, vdp_mean, vdp_polynomial};
use zp_wiener::energy::{nk_profile, Summands};
use zp_wiener::scattered::trace_theorem3;
use zp_wiener::spectral::{indicator_spectrum, wiener_norm, wiener_norm_poly, TrigPoly};
use zp_wiener::structure::{best_ap_scan, find_dilate, gap_enumerate, localize, GapDescriptor};
use zp_wiener::suites::{run_suite, SuiteConfig};
use zp_wiener::zp::{parse_int_list, parse_set_file, parse_set_literal};
use zp_wiener::{PrimeContext, Precision, ZpSet};

const SCHEMA: &str = "v1";
const DEFAULT_LOCAL_BUDGET: u64 = 10_000;

#[derive(Parser)]
#[command(name = "zp-wiener", version, about = "Wiener norms, additive energy and structure search in Z_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Odd prime modulus.
    #[arg(short = 'p', long = "prime")]
    p: Option<u64>,
    /// Comma-separated integers, reduced mod p.
    #[arg(long, allow_hyphen_values = true)]
    set: Option<String>,
    /// One integer per line; `#` starts a comment.
    #[arg(long)]
    set_file: Option<PathBuf>,
    /// Seed for randomized procedures; required with json or csv output.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Float64)]
    precision: PrecisionArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrecisionArg {
    Float64,
    Extended,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DomainArg {
    Z,
    Zp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    #[value(name = "local_search", alias = "local-search")]
    LocalSearch,
}

#[derive(Subcommand)]
enum Command {
    /// Wiener norm of a set.
    Norm {
        #[command(flatten)]
        common: Common,
        /// Include every Fourier coefficient.
        #[arg(long)]
        spectrum: bool,
    },
    /// Exact additive energy T_k and the N_k profile.
    Energy {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'k', default_value_t = 2)]
        k: u32,
        #[arg(long, value_enum, default_value_t = DomainArg::Zp)]
        domain: DomainArg,
        /// Include the full N_k profile.
        #[arg(long)]
        profile: bool,
    },
    /// Run a randomized invariant suite.
    Verify {
        /// young, vdp, parseval, scattered, blichfeldt or tk-lower.
        suite: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Trace the medium-size argument on a concrete set.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(short = 'C', long = "c", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        k_override: Option<u32>,
    },
    /// Search for sets of size n with small Wiener norm.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n')]
        n: u64,
        /// Defaults to exhaustive when C(p, n) fits the enumeration cap.
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Candidate evaluations allowed.
        #[arg(long)]
        budget: Option<u64>,
        /// Exhaustive search over sets containing {0, 1} only.
        #[arg(long)]
        orbit_reduction: bool,
    },
    /// Dilate search for generators, or localization of a set into [-m, m].
    Dilate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        generators: Option<String>,
        #[arg(long)]
        targets: Option<String>,
        #[arg(short = 'm')]
        m: Option<u64>,
    },
    /// Enumerate a GAP "x0; x1,...; w1,...", or scan a set for its best progression.
    Gap {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        gap: Option<String>,
        #[arg(long)]
        scan: bool,
        #[arg(long)]
        length: Option<u64>,
    },
    /// De la Vallée-Poussin kernel checks.
    VdpCheck {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n')]
        n: u64,
        /// Also run the shell concentration check on --set at this eta.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Continuous L1 norm of a trigonometric polynomial on [0, 1].
    Quad {
        #[command(flatten)]
        common: Common,
        /// Comma-separated real frequencies.
        #[arg(long, allow_hyphen_values = true)]
        freqs: String,
        /// Real parts of the coefficients (default all 1).
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        /// Imaginary parts of the coefficients (default all 0).
        #[arg(long, allow_hyphen_values = true)]
        coeffs_im: Option<String>,
        /// Report the ratio against the harmonic sum of |c_j|/j.
        #[arg(long)]
        hardy: bool,
    },
}

enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<zp_wiener::Error> for Failure {
    fn from(e: zp_wiener::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// What a command produced: its payload, optional table for CSV, and
/// whether a property violation was found.
struct Output {
    command: &'static str,
    payload: Value,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
    violation: bool,
}

impl Output {
    fn new(command: &'static str, payload: impl Serialize) -> Self {
        Self { command, payload: serde_json::to_value(payload).expect("payload serializes"), table: None, violation: false }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Norm { common, .. }
        | Command::Energy { common, .. }
        | Command::Verify { common, .. }
        | Command::Trace { common, .. }
        | Command::Search { common, .. }
        | Command::Dilate { common, .. }
        | Command::Gap { common, .. }
        | Command::VdpCheck { common, .. }
        | Command::Quad { common, .. } => common,
    }
}

fn run(cmd: Command) -> CliResult<ExitCode> {
    let c = common(&cmd).clone();
    if let Some(t) = c.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| usage(e.to_string()))?;
    }
    let out = match cmd {
        Command::Norm { spectrum, .. } => cmd_norm(&c, spectrum)?,
        Command::Energy { k, domain, profile, .. } => cmd_energy(&c, k, domain, profile)?,
        Command::Verify { suite, trials, .. } => cmd_verify(&c, &suite, trials)?,
        Command::Trace { eps, c: big_c, k_override, .. } => cmd_trace(&c, eps, big_c, k_override)?,
        Command::Search { n, strategy, budget, orbit_reduction, .. } => cmd_search(&c, n, strategy, budget, orbit_reduction)?,
        Command::Dilate { generators, targets, m, .. } => cmd_dilate(&c, generators, targets, m)?,
        Command::Gap { gap, scan, length, .. } => cmd_gap(&c, gap, scan, length)?,
        Command::VdpCheck { n, eta, .. } => cmd_vdp_check(&c, n, eta)?,
        Command::Quad { freqs, coeffs, coeffs_im, hardy, .. } => cmd_quad(&freqs, coeffs, coeffs_im, hardy)?,
    };
    emit(&c, &out)?;
    Ok(if out.violation { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn context(c: &Common) -> CliResult<PrimeContext> {
    let p = c.p.ok_or_else(|| usage("-p <prime> is required"))?;
    let precision = match c.precision {
        PrecisionArg::Float64 => Precision::Float64,
        PrecisionArg::Extended => Precision::Extended,
    };
    Ok(PrimeContext::with_precision(p, precision)?)
}

fn set_source(c: &Common) -> CliResult<Option<String>> {
    match (&c.set, &c.set_file) {
        (Some(_), Some(_)) => Err(usage("pass only one of --set and --set-file")),
        (Some(s), None) => Ok(Some(s.clone())),
        (None, Some(path)) => Ok(Some(fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?)),
        (None, None) => Ok(None),
    }
}

fn load_set(c: &Common, ctx: PrimeContext) -> CliResult<ZpSet> {
    let raw = set_source(c)?.ok_or_else(|| usage("a set is required: pass --set or --set-file"))?;
    Ok(if c.set.is_some() { parse_set_literal(ctx, &raw)? } else { parse_set_file(ctx, &raw)? })
}

fn load_integers(c: &Common) -> CliResult<Vec<i64>> {
    let raw = set_source(c)?.ok_or_else(|| usage("a set is required: pass --set or --set-file"))?;
    if c.set.is_some() {
        return Ok(parse_int_list(&raw)?);
    }
    let mut out = Vec::new();
    for line in raw.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            out.push(line.parse::<i64>().map_err(|e| usage(format!("set file: {line:?}: {e}")))?);
        }
    }
    Ok(out)
}

fn require_seed(c: &Common, what: &str) -> CliResult<u64> {
    match (c.seed, c.format) {
        (Some(s), _) => Ok(s),
        (None, Format::Human) => Ok(0),
        (None, _) => Err(usage(format!("{what} is randomized: pass --seed <N> for reproducible json/csv output"))),
    }
}

fn cmd_norm(c: &Common, spectrum: bool) -> CliResult<Output> {
    let ctx = context(c)?;
    let a = load_set(c, ctx)?;
    let r = wiener_norm(&a);
    let mut payload = json!({ "p": ctx.p(), "set_size": a.len(), "norm": r.norm, "err_bound": r.err_bound });
    if spectrum {
        payload["spectrum"] = serde_json::to_value(indicator_spectrum(&a).entries()).expect("entries serialize");
    }
    Ok(Output::new("norm", payload))
}

fn cmd_energy(c: &Common, k: u32, domain: DomainArg, profile: bool) -> CliResult<Output> {
    let report = match domain {
        DomainArg::Zp => {
            let ctx = context(c)?;
            let a = load_set(c, ctx)?;
            nk_profile(Summands::Residues(&a), k)?
        }
        DomainArg::Z => {
            let v = load_integers(c)?;
            nk_profile(Summands::Integers(&v), k)?
        }
    };
    let max_nk = report.max_nk().to_string();
    let mut payload = serde_json::to_value(&report).expect("report serializes");
    payload["max_nk"] = Value::String(max_nk);
    if !profile {
        payload.as_object_mut().expect("object").remove("profile");
    }
    let mut out = Output::new("energy", payload);
    if profile {
        let rows = report.profile.iter().map(|(x, n)| vec![x.to_string(), n.to_string()]).collect();
        out.table = Some((vec!["x".into(), "n_k".into()], rows));
    }
    Ok(out)
}

fn cmd_verify(c: &Common, suite: &str, trials: usize) -> CliResult<Output> {
    let seed = require_seed(c, "verify")?;
    let cfg = SuiteConfig { primes: c.p.map(|p| vec![p]), trials, seed };
    let report = run_suite(suite, &cfg)?;
    let rows = report
        .checks
        .iter()
        .map(|k| vec![report.suite.clone(), k.name.clone(), k.trials.to_string(), k.failures.to_string(), k.worst.to_string()])
        .collect();
    let violation = !report.passed;
    let mut out = Output::new("verify", &report);
    out.table = Some((["suite", "check", "trials", "failures", "worst"].map(String::from).to_vec(), rows));
    out.violation = violation;
    Ok(out)
}

fn cmd_trace(c: &Common, eps: f64, big_c: f64, k_override: Option<u32>) -> CliResult<Output> {
    let ctx = context(c)?;
    let a = load_set(c, ctx)?;
    Ok(Output::new("trace", trace_theorem3(&a, eps, big_c, k_override)?))
}

fn cmd_search(c: &Common, n: u64, strategy: Option<StrategyArg>, budget: Option<u64>, orbit_reduction: bool) -> CliResult<Output> {
    let ctx = context(c)?;
    let p = ctx.p();
    if n == 0 || n >= p {
        return Err(usage(format!("-n {n} must satisfy 1 <= n < p = {p}")));
    }
    let strategy = match strategy {
        Some(StrategyArg::Exhaustive) => Strategy::Exhaustive,
        Some(StrategyArg::LocalSearch) => Strategy::LocalSearch,
        None if binomial(p, n) <= EXHAUSTIVE_CAP => Strategy::Exhaustive,
        None => Strategy::LocalSearch,
    };
    let seed = if strategy == Strategy::LocalSearch { require_seed(c, "local_search")? } else { c.seed.unwrap_or(0) };
    let budget = budget.unwrap_or(if strategy == Strategy::Exhaustive { EXHAUSTIVE_CAP } else { DEFAULT_LOCAL_BUDGET });
    let r = extremal_search(p, n, &SearchConfig { strategy, seed, budget, orbit_reduction })?;
    let table = (ExtremalResult::CSV_HEADER.map(String::from).to_vec(), vec![r.csv_record()]);
    let mut out = Output::new("search", &r);
    out.table = Some(table);
    Ok(out)
}

fn parse_u64_list(s: &str, what: &str) -> CliResult<Vec<u64>> {
    parse_int_list(s)?
        .into_iter()
        .map(|v| u64::try_from(v).map_err(|_| usage(format!("{what} must be nonnegative, got {v}"))))
        .collect()
}

fn cmd_dilate(c: &Common, generators: Option<String>, targets: Option<String>, m: Option<u64>) -> CliResult<Output> {
    let ctx = context(c)?;
    match (generators, targets, m) {
        (Some(g), Some(t), None) => {
            let gens: Vec<u64> = parse_int_list(&g)?.into_iter().map(|x| ctx.reduce(x)).collect();
            let targets = parse_u64_list(&t, "targets")?;
            let w = find_dilate(&ctx, &gens, &targets)?;
            Ok(Output::new("dilate", json!({ "p": ctx.p(), "generators": gens, "targets": targets, "found": w.is_some(), "witness": w })))
        }
        (None, None, Some(m)) => {
            let a = load_set(c, ctx)?;
            Ok(Output::new("dilate", localize(&a, m)?))
        }
        _ => Err(usage("pass either --generators with --targets, or --set with -m")),
    }
}

fn cmd_gap(c: &Common, gap: Option<String>, scan: bool, length: Option<u64>) -> CliResult<Output> {
    let ctx = context(c)?;
    match (gap, scan) {
        (Some(literal), false) => {
            let g = GapDescriptor::parse(ctx, &literal)?;
            let e = gap_enumerate(&g)?;
            Ok(Output::new("gap", json!({ "gap": g, "proper": e.proper, "size": e.size.to_string(), "members": e.set.to_vec() })))
        }
        (None, true) => {
            let a = load_set(c, ctx)?;
            let len = length.unwrap_or(a.len() as u64);
            Ok(Output::new("gap", best_ap_scan(&a, len)?))
        }
        _ => Err(usage("pass either --gap \"x0; gens; widths\" or --scan with a set")),
    }
}

fn cmd_vdp_check(c: &Common, n: u64, eta: Option<f64>) -> CliResult<Output> {
    let ctx = context(c)?;
    let p = ctx.p();
    let v = vdp_polynomial(n, &ctx)?;
    let kernel_norm = wiener_norm_poly(&v);
    let mut payload = json!({
        "p": p,
        "n": n,
        "value_at_zero": v.evaluate()[0].re,
        "kernel_norm": kernel_norm,
        "kernel_bound": 3.0 * p as f64,
        "kernel_holds": kernel_norm <= 3.0 * p as f64 * (1.0 + 1e-9),
    });
    let mut violation = kernel_norm > 3.0 * p as f64 * (1.0 + 1e-9);
    if set_source(c)?.is_some() {
        let a = load_set(c, ctx)?;
        let f = TrigPoly::new(ctx, a.indicator().into_iter().map(|x| Complex64::new(x, 0.0)).collect())?;
        let lhs = wiener_norm_poly(&vdp_mean(&f, n)?);
        let rhs = 3.0 * wiener_norm_poly(&f);
        let holds = lhs <= rhs * (1.0 + 1e-9);
        violation |= !holds;
        payload["mean"] = json!({ "lhs": lhs, "rhs": rhs, "holds": holds });
        if let Some(eta) = eta {
            payload["shell_concentration"] = serde_json::to_value(shell_concentration_check(&a, n, eta)?).expect("serializes");
        }
    } else if eta.is_some() {
        return Err(usage("--eta needs a set"));
    }
    let mut out = Output::new("vdp-check", payload);
    out.violation = violation;
    Ok(out)
}

fn parse_f64_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| usage(format!("{what}: {t:?}: {e}"))))
        .collect()
}

fn cmd_quad(freqs: &str, coeffs: Option<String>, coeffs_im: Option<String>, hardy: bool) -> CliResult<Output> {
    let b = parse_f64_list(freqs, "freqs")?;
    let re = match coeffs {
        Some(s) => parse_f64_list(&s, "coeffs")?,
        None => vec![1.0; b.len()],
    };
    let im = match coeffs_im {
        Some(s) => parse_f64_list(&s, "coeffs-im")?,
        None => vec![0.0; re.len()],
    };
    if re.len() != b.len() || im.len() != b.len() {
        return Err(usage("freqs, coeffs and coeffs-im must have equal lengths"));
    }
    let c: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
    Ok(if hardy { Output::new("quad", hardy_ratio(&b, &c)?) } else { Output::new("quad", continuous_l1(&b, &c)?) })
}

fn envelope(out: &Output) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), Value::String(SCHEMA.into()));
    map.insert("command".into(), Value::String(out.command.into()));
    match &out.payload {
        Value::Object(fields) => map.extend(fields.clone()),
        other => {
            map.insert("result".into(), other.clone());
        }
    }
    Value::Object(map)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn emit(c: &Common, out: &Output) -> CliResult<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match c.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &envelope(out)).map_err(|e| Failure::Io(e.into()))?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(&mut w);
            let (header, rows) = match &out.table {
                Some(t) => t.clone(),
                None => {
                    let env = envelope(out);
                    let fields = env.as_object().expect("object");
                    (fields.keys().cloned().collect(), vec![fields.values().map(scalar).collect()])
                }
            };
            wr.write_record(&header).map_err(|e| Failure::Io(e.into()))?;
            for row in rows {
                wr.write_record(&row).map_err(|e| Failure::Io(e.into()))?;
            }
            wr.flush()?;
        }
        Format::Human => {
            let env = envelope(out);
            for (k, v) in env.as_object().expect("object") {
                if k == "schema" {
                    continue;
                }
                writeln!(w, "{k:>20}: {}", scalar(v))?;
            }
        }
    }
    Ok(())
}
