//! `ckmax`: seeded verification runs over finite atomic lattices.
//!
//! Machine output is one JSON document (stdout or `--output`), a one-line
//! summary goes to stderr. Exit codes: 0 pass, 1 usage error, 2 failed
//! verification, 3 no verdict.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use ckmax_core::acceptance;
use ckmax_core::constants;
use ckmax_core::doc::SpaceDocument;
use ckmax_core::estimates::{
    lower_estimate_const, lower_estimate_search, upper_estimate_const, upper_estimate_search,
};
use ckmax_core::fourier::{centered_offset, dft_operator, hausdorff_young_maximal_check};
use ckmax_core::operators::{
    ck_verify, dual_maximal_verify, triangular_verify, CkConstants, CkOptions, CkReport,
    Filtration, LinearOp, Scalar, Verdict,
};
use ckmax_core::search::rng_for;
use ckmax_core::{AtomicSpace, Index, QuasiNorm, SearchConfig};
use clap::{Args, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "ckmax",
    version,
    about = "Maximal-operator bounds on finite atomic lattices"
)]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "CKMAX_WORKERS", global = true)]
    workers: Option<usize>,
    /// Read the whole run configuration from a JSON file instead.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

/// A config file holds the subcommand name under `command`, its flags in
/// snake_case, and optionally `output`.
fn read_config(path: &PathBuf) -> Run<(Command, Option<PathBuf>)> {
    let err = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
    let text = fs::read_to_string(path).map_err(|e| err(&e))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| err(&e))?;
    let output = match value.as_object_mut().and_then(|m| m.remove("output")) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(err(&format!("output must be a path, got {other}"))),
    };
    let command = serde_json::from_value(value).map_err(|e| err(&e))?;
    Ok((command, output))
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Evaluate the norm of a space document on its vectors.
    Norm(NormArgs),
    /// Two-term (or n-term) lower/upper estimate constant of a norm.
    Estimate(EstimateArgs),
    /// Maximal-inequality constants for given exponents and estimates.
    Constants(ConstantsArgs),
    /// Trial harness for the maximal inequality of one operator.
    Verify(VerifyArgs),
    /// The same harness on the Köthe dual operator.
    DualVerify(DualArgs),
    /// Maximal DFT bounds between Wiener amalgams.
    Fourier(FourierArgs),
    /// The full acceptance battery.
    Suite(SuiteArgs),
}

/// Defaults come from the clap attributes, so config files and flags agree.
macro_rules! clap_defaults {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                let cmd = <$t as Args>::augment_args(clap::Command::new("defaults"));
                <$t as FromArgMatches>::from_arg_matches(&cmd.get_matches_from(["defaults"]))
                    .expect("every flag has a default")
            }
        }
    )*};
}

clap_defaults!(
    NormArgs,
    EstimateArgs,
    ConstantsArgs,
    VerifyArgs,
    DualArgs,
    FourierArgs,
    SuiteArgs
);

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct NormArgs {
    /// Space document (atoms, norm, vectors) as JSON.
    #[arg(long)]
    doc: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Lower,
    Upper,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EstimateArgs {
    #[arg(long)]
    doc: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lower")]
    kind: Kind,
    #[arg(long, default_value = "2")]
    exponent: Index,
    /// Number of disjoint pieces.
    #[arg(long, default_value_t = 2)]
    terms: usize,
    /// Search even when a closed form is known.
    #[arg(long)]
    search: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value = "2")]
    q: Index,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long, default_value_t = 1.0)]
    u: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    /// `ℓ^p → ℓ^q` on uniform atoms.
    Lp,
    /// `L_{p,r} → L_{q,r}` on uniform atoms.
    ClassicalLorentz,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Op {
    Dft,
    Random,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FiltrationKind {
    Prefix,
    Random,
}

/// Flags shared by `verify` and `dual-verify`.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct HarnessArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, value_enum, default_value = "random")]
    op: Op,
    #[arg(long, value_enum, default_value = "prefix")]
    filtration: FiltrationKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    ascents: usize,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Override κ, ℓ and u (all three) instead of deriving them.
    #[arg(long, requires_all = ["ell", "u"])]
    kappa: Option<f64>,
    #[arg(long, requires_all = ["kappa", "u"])]
    ell: Option<f64>,
    #[arg(long, requires_all = ["kappa", "ell"])]
    u: Option<f64>,
}

clap_defaults!(HarnessArgs);

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "lp")]
    family: Family,
    #[arg(long, default_value = "1")]
    p: Index,
    #[arg(long, default_value = "inf")]
    q: Index,
    /// Second Lorentz index.
    #[arg(long, default_value = "1")]
    lorentz_r: Index,
    /// Also run the triangular form on random disjoint part families.
    #[arg(long)]
    triangular: bool,
    #[command(flatten)]
    #[serde(flatten)]
    harness: HarnessArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct DualArgs {
    #[arg(long, default_value = "1")]
    p: Index,
    #[arg(long, default_value = "2")]
    q: Index,
    #[command(flatten)]
    #[serde(flatten)]
    harness: HarnessArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FourierArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1.5)]
    s: f64,
    #[arg(long, default_value_t = 4)]
    blocks: usize,
    /// Index of frequency zero; defaults to n/2.
    #[arg(long)]
    offset: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    ascents: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SuiteArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated criterion ids; all when empty.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Pass,
    Fail,
    NoVerdict,
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::NoVerdict => Status::NoVerdict,
        }
    }
}

impl Status {
    fn exit(self) -> ExitCode {
        ExitCode::from(match self {
            Status::Ok | Status::Pass => 0,
            Status::Fail => 2,
            Status::NoVerdict => 3,
        })
    }
}

struct Outcome {
    status: Status,
    result: Value,
    summary: String,
}

type Run<T> = std::result::Result<T, String>;

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports are plain data")
}

fn load_doc(path: &Option<PathBuf>) -> Run<SpaceDocument> {
    let path = path.as_ref().ok_or("--doc is required")?;
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    SpaceDocument::parse(&text).map_err(|e| e.to_string())
}

fn norm_cmd(a: &NormArgs) -> Run<Outcome> {
    let doc = load_doc(&a.doc)?;
    let loaded = doc.load().map_err(|e| e.to_string())?;
    let norm = loaded.norm.ok_or("the document has no norm")?;
    let values = loaded
        .vectors
        .iter()
        .map(|v| norm.eval(v))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Outcome {
        status: Status::Ok,
        summary: format!("{} vector(s) evaluated", values.len()),
        result: json!({
            "norm": norm.family(),
            "kappa": norm.kappa().ok(),
            "values": values,
        }),
    })
}

fn estimate_cmd(a: &EstimateArgs) -> Run<Outcome> {
    let loaded = load_doc(&a.doc)?.load().map_err(|e| e.to_string())?;
    let norm = loaded.norm.ok_or("the document has no norm")?;
    let cfg = SearchConfig {
        seed: a.seed,
        restarts: a.restarts,
        iterations: a.iterations,
        ..SearchConfig::default()
    };
    let res = match (a.kind, a.search) {
        (Kind::Lower, false) => lower_estimate_const(&norm, a.exponent, a.terms, &cfg),
        (Kind::Upper, false) => upper_estimate_const(&norm, a.exponent, a.terms, &cfg),
        (Kind::Lower, true) => lower_estimate_search(&norm, a.exponent, a.terms, &cfg),
        (Kind::Upper, true) => upper_estimate_search(&norm, a.exponent, a.terms, &cfg),
    }
    .map_err(|e| e.to_string())?;
    Ok(Outcome {
        status: Status::Ok,
        summary: format!(
            "{:?} {}-estimate constant ({} terms): {} ({})",
            a.kind,
            a.exponent,
            a.terms,
            res.value,
            if res.exact {
                "exact"
            } else {
                "searched lower bound"
            }
        ),
        result: to_json(&res),
    })
}

fn constants_cmd(a: &ConstantsArgs) -> Run<Outcome> {
    let rep = constants::report(a.p, a.q, a.kappa, a.ell, a.u).map_err(|e| e.to_string())?;
    let fmt = |v: Option<f64>| v.map_or("-".into(), |g| format!("{g:.6}"));
    Ok(Outcome {
        status: Status::Ok,
        summary: format!(
            "gamma {} classical {} (p = {}, q = {})",
            fmt(rep.gamma),
            fmt(rep.classical),
            rep.p,
            rep.q
        ),
        result: to_json(&rep),
    })
}

fn ck_options(h: &HarnessArgs) -> CkOptions {
    let constants = match (h.kappa, h.ell, h.u) {
        (Some(kappa), Some(ell), Some(u)) => Some(CkConstants { kappa, ell, u }),
        _ => None,
    };
    CkOptions {
        trials: h.trials,
        ascents: h.ascents,
        tolerance: h.tolerance,
        constants,
        search: SearchConfig::with_seed(h.seed),
    }
}

fn filtration(h: &HarnessArgs, size: usize) -> Filtration {
    match h.filtration {
        FiltrationKind::Prefix => Filtration::prefix(size),
        FiltrationKind::Random => Filtration::random(size, &mut rng_for(h.seed, &[0xf1])),
    }
}

fn report_summary<S: Scalar>(what: &str, r: &CkReport<S>) -> String {
    format!(
        "{what}: {:?}, max ratio {:.6} vs bound {:.6} ({} ‖T‖), {} trials, {} violations",
        r.verdict,
        r.max_ratio,
        r.bound,
        if r.op_norm.exact { "exact" } else { "searched" },
        r.trial_count,
        r.violations
    )
}

fn run_verify<S: Scalar>(
    t: &LinearOp<S>,
    dom: &QuasiNorm,
    cod: &QuasiNorm,
    a: &VerifyArgs,
) -> Run<Outcome> {
    let opts = ck_options(&a.harness);
    let filt = filtration(&a.harness, t.cols());
    let report = ck_verify(t, dom, cod, &filt, a.p, a.q, &opts).map_err(|e| e.to_string())?;
    let mut verdict = report.verdict;
    let mut summary = report_summary("maximal", &report);
    let mut result = json!({ "maximal": report });
    if a.triangular {
        let tri = triangular_verify(t, dom, cod, a.p, a.q, &opts).map_err(|e| e.to_string())?;
        verdict = verdict.combine(tri.verdict);
        summary = format!("{summary}; {}", report_summary("triangular", &tri));
        result["triangular"] = to_json(&tri);
    }
    Ok(Outcome {
        status: verdict.into(),
        result,
        summary,
    })
}

fn verify_norms(a: &VerifyArgs) -> Run<(QuasiNorm, QuasiNorm)> {
    let space = AtomicSpace::uniform(a.harness.n);
    match a.family {
        Family::Lp => Ok((QuasiNorm::lp(space.clone(), a.p), QuasiNorm::lp(space, a.q))),
        Family::ClassicalLorentz => {
            let finite = |i: Index, name: &str| {
                i.as_finite()
                    .ok_or_else(|| format!("{name} must be finite for Lorentz spaces"))
            };
            let (p, q) = (finite(a.p, "p")?, finite(a.q, "q")?);
            let mk = |e| {
                QuasiNorm::classical_lorentz(space.clone(), e, a.lorentz_r)
                    .map_err(|e| e.to_string())
            };
            Ok((mk(p)?, mk(q)?))
        }
    }
}

fn verify_cmd(a: &VerifyArgs) -> Run<Outcome> {
    if a.harness.n == 0 {
        return Err("--n must be positive".into());
    }
    let (dom, cod) = verify_norms(a)?;
    let space = AtomicSpace::uniform(a.harness.n);
    match a.harness.op {
        Op::Dft => {
            let t = dft_operator(a.harness.n).map_err(|e| e.to_string())?;
            run_verify(&t, &dom, &cod, a)
        }
        Op::Random => {
            let t: LinearOp<f64> =
                LinearOp::random(space.clone(), space, &mut rng_for(a.harness.seed, &[0xe1]));
            run_verify(&t, &dom, &cod, a)
        }
        Op::Identity => run_verify(&LinearOp::<f64>::identity(space), &dom, &cod, a),
    }
}

fn run_dual<S: Scalar>(t: &LinearOp<S>, a: &DualArgs) -> Run<Outcome> {
    let space = t.domain().clone();
    let (dom, cod) = (QuasiNorm::lp(space.clone(), a.p), QuasiNorm::lp(space, a.q));
    let opts = ck_options(&a.harness);
    let filt = filtration(&a.harness, t.rows());
    let rep =
        dual_maximal_verify(t, &dom, &cod, &filt, a.p, a.q, &opts).map_err(|e| e.to_string())?;
    let mut verdict = rep.report.verdict;
    if rep.dual_norm_consistent == Some(false) || rep.pairing_error > 1e-10 {
        verdict = Verdict::Fail;
    }
    Ok(Outcome {
        status: verdict.into(),
        summary: format!(
            "{}; pairing error {:.1e}",
            report_summary("dual maximal", &rep.report),
            rep.pairing_error
        ),
        result: to_json(&rep),
    })
}

fn dual_cmd(a: &DualArgs) -> Run<Outcome> {
    if a.harness.n == 0 {
        return Err("--n must be positive".into());
    }
    let space = AtomicSpace::uniform(a.harness.n);
    match a.harness.op {
        Op::Dft => run_dual(&dft_operator(a.harness.n).map_err(|e| e.to_string())?, a),
        Op::Random => {
            let t: LinearOp<f64> =
                LinearOp::random(space.clone(), space, &mut rng_for(a.harness.seed, &[0xe1]));
            run_dual(&t, a)
        }
        Op::Identity => run_dual(&LinearOp::<f64>::identity(space), a),
    }
}

fn fourier_cmd(a: &FourierArgs) -> Run<Outcome> {
    let opts = CkOptions {
        trials: a.trials,
        ascents: a.ascents,
        search: SearchConfig::with_seed(a.seed),
        ..CkOptions::default()
    };
    let offset = a.offset.unwrap_or_else(|| centered_offset(a.n));
    let rep = hausdorff_young_maximal_check(a.n, a.r, a.s, a.blocks, offset, &opts)
        .map_err(|e| e.to_string())?;
    let status = if rep.sanity_holds {
        rep.verdict.into()
    } else {
        Status::Fail
    };
    Ok(Outcome {
        status,
        summary: format!(
            "{:?}: prefix margin {:.6}, interval ratio {:.6}, ‖F‖ ≤ {:.6}",
            rep.verdict, rep.margin, rep.interval_max_ratio, rep.op_norm_upper
        ),
        result: to_json(&rep),
    })
}

fn suite_cmd(a: &SuiteArgs) -> Run<Outcome> {
    let ids: Vec<u8> = if a.criteria.is_empty() {
        acceptance::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.criteria.clone()
    };
    let mut results = vec![];
    for id in ids {
        let r = acceptance::run(id, a.seed).ok_or(format!("no criterion {id}"))?;
        eprintln!("{r}");
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    // timings vary between runs, so they stay out of the report
    let criteria: Vec<Value> = results
        .iter()
        .map(|r| json!({ "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail }))
        .collect();
    Ok(Outcome {
        status: if failed == 0 {
            Status::Pass
        } else {
            Status::Fail
        },
        summary: format!(
            "{} of {} criteria passed",
            results.len() - failed,
            results.len()
        ),
        result: json!({ "passed": results.len() - failed, "failed": failed, "criteria": criteria }),
    })
}

fn dispatch(cmd: &Command) -> Run<Outcome> {
    match cmd {
        Command::Norm(a) => norm_cmd(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Constants(a) => constants_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::DualVerify(a) => dual_cmd(a),
        Command::Fourier(a) => fourier_cmd(a),
        Command::Suite(a) => suite_cmd(a),
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, output) = match (&cli.config, cli.command) {
        (Some(_), Some(_)) => return usage("--config replaces the subcommand; give only one"),
        (None, None) => return usage("a subcommand or --config is required (see --help)"),
        (None, Some(c)) => (c, cli.output),
        (Some(path), None) => match read_config(path) {
            Ok((c, out)) => (c, cli.output.or(out)),
            Err(e) => return usage(e),
        },
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
        {
            return usage(e);
        }
    }
    let name = to_json(&command)["command"].clone();
    let out = match dispatch(&command) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": name,
        "config": command,
        "status": out.status,
        "result": out.result,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data");
    text.push('\n');
    match &output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                return usage(format!("{}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    eprintln!("{}", out.summary);
    out.status.exit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_defaults_match_flag_defaults() {
        let from_flags = Cli::try_parse_from(["ckmax", "verify"])
            .unwrap()
            .command
            .unwrap();
        let from_json: Command = serde_json::from_str(r#"{"command": "verify"}"#).unwrap();
        assert_eq!(to_json(&from_flags), to_json(&from_json));
        let v = to_json(&from_json);
        assert_eq!(v["q"], "inf");
        assert_eq!(v["trials"], 200);
    }

    #[test]
    fn unknown_command_in_config_is_rejected() {
        assert!(serde_json::from_str::<Command>(r#"{"command": "plot"}"#).is_err());
    }
}
