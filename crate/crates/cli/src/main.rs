mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use sepgen::counting::{n_etale, CountError};
use sepgen::gencalc::{self, AlgebraSpec, GenError, GenResult, IntegerInterval, NValue, Part, PartResult};
use sepgen::matrix::{generates_full, seeded_pair, shifted_family, MatrixContext, MatrixError};
use sepgen::oracle::OracleError;
use sepgen::verify::{self, Suite, VerifyConfig};
use sepgen::{Count, FieldError, PrimePower};

use config::{Config, Format};

#[derive(Parser)]
#[command(name = "sepgen", version, about = "Numbers of generators of separable algebras over finite fields")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of Galois orbits of g-tuples generating F_{q^n} over F_q.
    Nfield(NfieldArgs),
    /// Minimal number of generators of a separable algebra.
    Gen(GenArgs),
    /// Exhaustive or sampled count of generating matrix tuples.
    CountMatrix(CountArgs),
    /// Multiplicities on which gen takes the lower or upper bracket value.
    Intervals(IntervalArgs),
    /// A random explicit generating pair of M_m(F_{q^n}).
    Pair(PairArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct NfieldArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    g: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    BoundsOnly,
    AllowOracle,
}

impl From<GenMode> for gencalc::Mode {
    fn from(m: GenMode) -> Self {
        match m {
            GenMode::BoundsOnly => gencalc::Mode::BoundsOnly,
            GenMode::AllowOracle => gencalc::Mode::AllowOracle,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// JSON file of the form {"q": 4, "parts": [{"n": 3, "m": 1, "r": 5}]}.
    #[arg(long, conflicts_with_all = ["q", "part"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    q: Option<u64>,
    /// A pure part, `n=N,m=M,r=R`; m and r default to 1.
    #[arg(long = "part", value_parser = parse_part)]
    part: Vec<Part>,
    #[arg(long, value_enum, default_value = "allow-oracle")]
    mode: GenMode,
    /// Include the per-part results.
    #[arg(long)]
    breakdown: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMode {
    Exact,
    Montecarlo,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    g: u64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: CountMode,
}

#[derive(Args)]
struct IntervalArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    g: u64,
    #[arg(long, value_enum, default_value = "allow-oracle")]
    mode: GenMode,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// Corrupt the Möbius function to check that the suites notice.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn parse_part(s: &str) -> Result<Part, String> {
    let mut part = Part { n: 0, m: 1, r: 1 };
    for item in s.split(',') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {item:?}"))?;
        let v: u64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
        match k.trim() {
            "n" => part.n = v,
            "m" => part.m = v,
            "r" => part.r = v,
            other => return Err(format!("unknown key {other:?}")),
        }
    }
    if part.n == 0 {
        return Err("n is required and must be positive".into());
    }
    Ok(part)
}

/// Why a command did not produce a result; each maps to an exit code.
enum Failure {
    Invalid(String),
    Infeasible(String),
    Integrality(String),
    ChecksFailed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::ChecksFailed => 1,
            Failure::Invalid(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Integrality(_) => 4,
        }
    }
}

impl From<CountError> for Failure {
    fn from(e: CountError) -> Self {
        match e {
            CountError::Integrality(_) => Failure::Integrality(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<MatrixError> for Failure {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            MatrixError::Count(c) => c.into(),
            MatrixError::Field(f) => f.into(),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            OracleError::Integrality(_) => Failure::Integrality(e.to_string()),
            OracleError::Count(c) => c.into(),
            OracleError::Matrix(m) => m.into(),
            OracleError::Field(f) => f.into(),
            OracleError::InvalidArgument(_) => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Oracle(o) => o.into(),
            GenError::Count(c) => c.into(),
            GenError::Field(f) => f.into(),
            GenError::Integrality(_) => Failure::Integrality(e.to_string()),
            GenError::Spec(_) => Failure::Invalid(e.to_string()),
        }
    }
}

fn prime_power(q: u64) -> Result<PrimePower, Failure> {
    PrimePower::new(q).map_err(|e| Failure::Invalid(format!("--q: {e}")))
}

fn positive(name: &str, v: u64) -> Result<u64, Failure> {
    if v == 0 {
        return Err(Failure::Invalid(format!("--{name} must be at least 1")));
    }
    Ok(v)
}

fn s(v: impl ToString) -> Value {
    Value::String(v.to_string())
}

fn emit(format: Format, value: &Value) {
    match format {
        Format::Json => println!("{value}"),
        Format::Tsv => {
            let obj = value.as_object().expect("commands emit objects");
            let cell = |v: &Value| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            println!("{}", obj.keys().cloned().collect::<Vec<_>>().join("\t"));
            println!("{}", obj.values().map(cell).collect::<Vec<_>>().join("\t"));
        }
    }
}

fn gen_fields(out: &mut Map<String, Value>, lo: u64, hi: u64) {
    if lo == hi {
        out.insert("status".into(), s("exact"));
        out.insert("gen".into(), s(lo));
    } else {
        out.insert("status".into(), s("bracket"));
        out.insert("lo".into(), s(lo));
        out.insert("hi".into(), s(hi));
    }
}

fn method_value<T: serde::Serialize>(m: T) -> Value {
    serde_json::to_value(m).expect("unit enum")
}

fn gen_json(res: &GenResult, breakdown: bool) -> Value {
    let mut out = Map::new();
    gen_fields(&mut out, res.lo, res.hi);
    out.insert("method".into(), method_value(res.method));
    if breakdown {
        let parts: Vec<Value> = res.parts.iter().map(part_json).collect();
        out.insert("parts".into(), Value::Array(parts));
    }
    Value::Object(out)
}

fn part_json(p: &PartResult) -> Value {
    let mut out = Map::new();
    out.insert("n".into(), s(p.part.n));
    out.insert("m".into(), s(p.part.m));
    out.insert("r".into(), s(p.part.r));
    gen_fields(&mut out, p.lo, p.hi);
    out.insert("method".into(), method_value(p.method));
    Value::Object(out)
}

fn cmd_nfield(a: &NfieldArgs) -> Result<Value, Failure> {
    let q = prime_power(a.q)?;
    positive("n", a.n)?;
    let v: Count = n_etale(q, a.n, a.g)?;
    Ok(json!({ "N": s(v) }))
}

fn cmd_gen(cfg: &Config, a: &GenArgs) -> Result<Value, Failure> {
    let spec = match (&a.spec, a.q) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            AlgebraSpec::from_json(&text)?
        }
        (None, Some(q)) => AlgebraSpec::new(q, &a.part)?,
        (None, None) => return Err(Failure::Invalid("give --spec FILE or --q with --part".into())),
    };
    let res = gencalc::gen_algebra(&spec, a.mode.into(), &cfg.oracle())?;
    Ok(gen_json(&res, a.breakdown))
}

fn fixed(x: f64) -> Value {
    s(format!("{x:.6}"))
}

fn cmd_count_matrix(cfg: &Config, a: &CountArgs) -> Result<Value, Failure> {
    let q = prime_power(a.q)?;
    positive("n", a.n)?;
    positive("m", a.m)?;
    let oracle = cfg.oracle();
    match a.mode {
        CountMode::Exact => {
            let r = oracle.count_matrix(q, a.n, a.m, a.g)?;
            let n = r
                .normalized
                .ok_or_else(|| Failure::Integrality("exhaustive count without a value".into()))?;
            Ok(json!({ "S_g": s(&r.raw_count), "N": s(n), "C": s(&r.divisor) }))
        }
        CountMode::Montecarlo => {
            let r = oracle.estimate_matrix_fraction(q, a.n, a.m, a.g, cfg.samples, cfg.seed)?;
            let e = r.estimate.expect("montecarlo results carry an estimate");
            Ok(json!({
                "C": s(&r.divisor),
                "hits": s(&r.raw_count),
                "samples": s(cfg.samples),
                "seed": s(cfg.seed),
                "fraction": fixed(e.point),
                "lower": fixed(e.lower),
                "upper": fixed(e.upper),
            }))
        }
    }
}

fn interval_json(i: &IntegerInterval) -> Value {
    match i.first_last() {
        Some((a, b)) => json!([s(a), s(b)]),
        None => json!([]),
    }
}

fn n_json(out: &mut Map<String, Value>, key: &str, v: &NValue) {
    match v.exact() {
        Some(x) => {
            out.insert(key.into(), s(x));
        }
        None => {
            out.insert(key.into(), Value::Null);
            out.insert(format!("{key}_range"), json!([s(&v.lower), s(&v.upper)]));
        }
    }
}

fn cmd_intervals(cfg: &Config, a: &IntervalArgs) -> Result<Value, Failure> {
    let q = prime_power(a.q)?;
    positive("n", a.n)?;
    positive("m", a.m)?;
    positive("g", a.g)?;
    let rep = gencalc::intervals(q, a.n, a.m, a.g, a.mode.into(), &cfg.oracle())?;
    let mut out = Map::new();
    out.insert("C".into(), s(&rep.c));
    out.insert("boundary".into(), s(&rep.boundary_floor));
    n_json(&mut out, "N", &rep.n_curr);
    n_json(&mut out, "N_prev", &rep.n_prev);
    out.insert("N_exact".into(), Value::Bool(rep.n_exact()));
    out.insert("N_source".into(), method_value(rep.n_curr.source));
    out.insert("I0".into(), interval_json(&rep.i0));
    out.insert("I1".into(), interval_json(&rep.i1));
    out.insert("I0_exact".into(), Value::Bool(rep.i0.is_exact()));
    out.insert("I1_exact".into(), Value::Bool(rep.i1.is_exact()));
    out.insert("I0_size".into(), s(rep.i0.len()));
    out.insert("I1_size".into(), s(rep.i1.len()));
    let bounds: Vec<Value> = rep
        .size_bounds
        .iter()
        .map(|b| {
            json!({
                "kind": method_value(b.kind),
                "shifted": b.shifted,
                "exponent": s(b.exponent),
                "value": s(&b.value),
                "holds": b.holds,
            })
        })
        .collect();
    out.insert("I1_lower_bounds".into(), Value::Array(bounds));
    Ok(Value::Object(out))
}

fn cmd_pair(cfg: &Config, a: &PairArgs) -> Result<Value, Failure> {
    let q = prime_power(a.q)?;
    positive("n", a.n)?;
    positive("m", a.m)?;
    let ctx = MatrixContext::new(q, a.n, a.m as usize)?;
    let (x, y) = seeded_pair(&ctx, cfg.seed)?;
    let generates = generates_full(&ctx.tuple(vec![x.clone(), y.clone()])?);
    let mut shifted = true;
    for (sx, sy) in shifted_family(&ctx, &x, &y) {
        shifted &= generates_full(&ctx.tuple(vec![sx, sy])?);
    }
    Ok(json!({
        "q": s(a.q),
        "n": s(a.n),
        "m": s(a.m),
        "seed": s(cfg.seed),
        "field": ctx.field().descriptor(),
        "A": x,
        "B": y,
        "generates": generates,
        "shifts_generate": shifted,
    }))
}

fn cmd_verify(cfg: &Config, a: &VerifyArgs) -> Result<(), Failure> {
    let vcfg = VerifyConfig {
        flip_moebius_sign: a.inject_fault,
        ..VerifyConfig::default()
    };
    let checks = verify::run(a.suite, &vcfg, &cfg.oracle());
    let passed = verify::all_passed(&checks);
    match cfg.format {
        Format::Json => {
            println!(
                "{}",
                json!({ "suite": a.suite.name(), "passed": passed, "checks": checks })
            );
        }
        Format::Tsv => {
            println!("suite\tcheck\tresult\tdetail");
            for c in &checks {
                let verdict = if c.passed { "pass" } else { "FAIL" };
                println!("{}\t{}\t{}\t{}", c.suite, c.name, verdict, c.detail);
            }
        }
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.config;
    let result = match &cli.command {
        Command::Nfield(a) => cmd_nfield(a).map(Some),
        Command::Gen(a) => cmd_gen(cfg, a).map(Some),
        Command::CountMatrix(a) => cmd_count_matrix(cfg, a).map(Some),
        Command::Intervals(a) => cmd_intervals(cfg, a).map(Some),
        Command::Pair(a) => cmd_pair(cfg, a).map(Some),
        Command::Verify(a) => cmd_verify(cfg, a).map(|()| None),
    };
    match result {
        Ok(Some(value)) => {
            emit(cfg.format, &value);
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(msg) => eprintln!("sepgen: invalid input: {msg}"),
                Failure::Infeasible(msg) => eprintln!("sepgen: infeasible: {msg}"),
                Failure::Integrality(msg) => eprintln!("sepgen: internal error: {msg}"),
                Failure::ChecksFailed => eprintln!("sepgen: some checks failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
