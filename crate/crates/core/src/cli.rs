//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 no explanation, 4 verification
//! mismatch.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::assign::{render_entry, GAssignment};
use crate::error::{Error, Result};
use crate::model::{Network, StrictMap, VarId};
use crate::oracle::{check_theorems, gib_map_bruteforce, Caps, CheckOptions, RandomNetSpec};
use crate::search::{gib_map_search, Evidence, Explanation, SearchConfig, TIE_TOLERANCE};
use crate::semantics::exact::rel_eq;
use crate::semantics::{GibTest, DEFAULT_EPS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_EXPLANATION: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gibmap", version, about = "Disjunctive abductive explanations for discrete belief networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and print its search index order.
    Validate {
        #[arg(long)]
        network: PathBuf,
    },
    /// Find the most probable GIB explanation(s) of the evidence.
    Explain(QueryArgs),
    /// Find the best explanation by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Run randomized consistency checks against brute force.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Observed value, as NAME=VALUE; repeatable.
    #[arg(long = "evidence", value_name = "NAME=VALUE")]
    pub evidence: Vec<String>,
    /// JSON object mapping variable names to observed values.
    #[arg(long)]
    pub evidence_file: Option<PathBuf>,
    /// Relaxation of the independence test; 0 demands exact independence.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Relative tolerance for treating two conditionals as equal.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Number of explanations to report.
    #[arg(short, long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Allow expansions to narrow the set of a non-evidence node.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub refine_target: bool,
    /// Log search events to stderr.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Also run the search and fail with exit code 4 if it disagrees.
    #[arg(long)]
    pub diff: bool,
    /// Largest number of candidate assignments to enumerate.
    #[arg(long, default_value_t = 1 << 22)]
    pub max_candidates: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    #[arg(long, default_value_t = 2)]
    pub max_parents: usize,
    #[arg(long, default_value_t = 2)]
    pub min_domain: usize,
    #[arg(long, default_value_t = 3)]
    pub max_domain: usize,
    #[arg(long, default_value_t = 0.5)]
    pub concept_density: f64,
    #[arg(long, default_value_t = 0.6)]
    pub plant_rate: f64,
    /// (variable, assignment) samples per trial.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub refine_target: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Corrupt the product check (harness self-test).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Parses `args` (program name first) and runs the command, writing to `out`
/// and `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_INPUT
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.kind());
            match e {
                Error::AgendaExhausted => EXIT_NO_EXPLANATION,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Validate { network } => validate(&network, out),
        Command::Explain(q) => explain(&q, out, err),
        Command::Oracle(o) => oracle(&o, out, err),
        Command::Check(c) => check(&c, out),
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let net = Network::from_path(path)?;
    let names: Vec<&str> = net.search_order().iter().map(|v| net.name(*v)).collect();
    writeln!(out, "index: {}", names.join(" "))?;
    for w in net.warnings() {
        writeln!(out, "warning: {w}")?;
    }
    Ok(EXIT_OK)
}

fn explain(q: &QueryArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let net = Network::from_path(&q.network)?;
    let evidence = read_evidence(&net, q)?;
    let outcome = gib_map_search(&net, &evidence, &search_config(q))?;
    for w in &outcome.warnings {
        writeln!(err, "warning: {w}")?;
    }
    for e in &outcome.trace {
        writeln!(err, "trace: {e}")?;
    }
    write_explanations(&net, &evidence, &outcome.explanations, q.format, out)?;
    Ok(EXIT_OK)
}

fn oracle(o: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let q = &o.query;
    if q.k != 1 {
        return Err(Error::InvalidArgument("the oracle reports a single explanation; use -k 1".into()));
    }
    if q.delta != 0.0 {
        return Err(Error::InvalidArgument("the oracle supports only delta = 0".into()));
    }
    let net = Network::from_path(&q.network)?;
    let evidence = read_evidence(&net, q)?;
    let caps = Caps { max_candidates: o.max_candidates.into(), ..Caps::default() };
    let truth = gib_map_bruteforce(&net, &evidence, caps)?;
    write_explanations(&net, &evidence, std::slice::from_ref(&truth), q.format, out)?;
    if !o.diff {
        return Ok(EXIT_OK);
    }
    let found = gib_map_search(&net, &evidence, &search_config(q))?;
    let best = &found.explanations[0];
    if best.assignment == truth.assignment && rel_eq(best.probability, truth.probability, TIE_TOLERANCE) {
        Ok(EXIT_OK)
    } else {
        writeln!(
            err,
            "mismatch: search found {} (p={}), enumeration found {} (p={})",
            best.assignment.render(&net),
            format_probability(best.probability),
            truth.assignment.render(&net),
            format_probability(truth.probability)
        )?;
        Ok(EXIT_MISMATCH)
    }
}

fn check(c: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let options = CheckOptions {
        spec: RandomNetSpec {
            node_count: c.nodes,
            max_parents: c.max_parents,
            domain_sizes: c.min_domain..=c.max_domain,
            concept_density: c.concept_density,
            independence_plant_rate: c.plant_rate,
            allow_zeros: false,
            seed: c.seed,
        },
        trials: c.trials,
        samples: c.samples,
        search: SearchConfig { refine_target: c.refine_target, ..SearchConfig::default() },
        inject_fault: c.inject_fault,
        ..CheckOptions::default()
    };
    let report = check_theorems(&options)?;
    match c.format {
        Format::Text => write!(out, "{report}")?,
        Format::Json => out.write_all(report.to_json().as_bytes())?,
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_MISMATCH })
}

fn search_config(q: &QueryArgs) -> SearchConfig {
    SearchConfig { test: GibTest { delta: q.delta, eps: q.eps }, k: q.k, refine_target: q.refine_target, trace: q.trace }
}

/// Merges `--evidence` pairs with the evidence file. A variable given in both
/// places must have the same value.
fn read_evidence(net: &Network, q: &QueryArgs) -> Result<Evidence> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for item in &q.evidence {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("evidence `{item}` is not of the form NAME=VALUE")))?;
        pairs.push((name.trim().to_string(), value.trim().to_string()));
    }
    if let Some(path) = &q.evidence_file {
        let text = std::fs::read_to_string(path)?;
        let file: StrictMap<String> = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        for (name, value) in file.iter() {
            if let Some((_, given)) = pairs.iter().find(|(n, _)| n == name) {
                if given != value {
                    return Err(Error::InvalidArgument(format!(
                        "evidence for `{name}` is `{given}` on the command line but `{value}` in {}",
                        path.display()
                    )));
                }
                continue;
            }
            pairs.push((name.to_string(), value.clone()));
        }
    }
    Evidence::from_pairs(net, pairs)
}

/// Rounds to 12 significant digits.
pub fn round_probability(p: f64) -> f64 {
    format!("{p:.11e}").parse().expect("formatted floats parse")
}

/// Fixed-point rendering of a probability rounded to 12 significant digits.
pub fn format_probability(p: f64) -> String {
    round_probability(p).to_string()
}

/// Entries in output order: evidence variables by search index, then the
/// rest by name.
pub fn ordered_entries(net: &Network, evidence: &Evidence, a: &GAssignment) -> Vec<VarId> {
    let mut observed: Vec<VarId> = a.entries().map(|(v, _)| v).filter(|v| evidence.contains(*v)).collect();
    observed.sort_by_key(|v| net.index_of(*v));
    let mut rest: Vec<VarId> = a.entries().map(|(v, _)| v).filter(|v| !evidence.contains(*v)).collect();
    rest.sort_by(|x, y| net.name(*x).cmp(net.name(*y)));
    observed.extend(rest);
    observed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonOutput {
    pub explanations: Vec<JsonExplanation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonExplanation {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub experimental: bool,
    pub assignment: Vec<JsonEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonEntry {
    pub variable: String,
    pub value: String,
}

pub fn to_json_output(net: &Network, evidence: &Evidence, explanations: &[Explanation]) -> JsonOutput {
    JsonOutput {
        explanations: explanations
            .iter()
            .map(|e| JsonExplanation {
                p: round_probability(e.probability),
                p_bounds: e.bounds.map(|b| [round_probability(b.lo), round_probability(b.hi)]),
                experimental: e.experimental,
                assignment: ordered_entries(net, evidence, &e.assignment)
                    .into_iter()
                    .map(|v| {
                        let line = render_entry(net, v, e.assignment.get(v).expect("listed entries exist"));
                        let value = line.split_once('=').map(|(_, r)| r.to_string()).unwrap_or_default();
                        JsonEntry { variable: net.name(v).to_string(), value }
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn render_text(net: &Network, evidence: &Evidence, explanations: &[Explanation]) -> String {
    let mut s = String::new();
    for (i, e) in explanations.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        s.push_str(&format!("p={}\n", format_probability(e.probability)));
        if let Some(b) = e.bounds {
            s.push_str(&format!(
                "p_bounds=[{},{}] (experimental)\n",
                format_probability(b.lo),
                format_probability(b.hi)
            ));
        }
        for v in ordered_entries(net, evidence, &e.assignment) {
            s.push_str(&render_entry(net, v, e.assignment.get(v).expect("listed entries exist")));
            s.push('\n');
        }
    }
    s
}

pub fn render_json(net: &Network, evidence: &Evidence, explanations: &[Explanation]) -> String {
    serde_json::to_string_pretty(&to_json_output(net, evidence, explanations)).expect("output serializes") + "\n"
}

fn write_explanations(
    net: &Network,
    evidence: &Evidence,
    explanations: &[Explanation],
    format: Format,
    out: &mut dyn Write,
) -> io::Result<()> {
    let text = match format {
        Format::Text => render_text(net, evidence, explanations),
        Format::Json => render_json(net, evidence, explanations),
    };
    out.write_all(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    #[test]
    fn probabilities_render_with_twelve_digits() {
        assert_eq!(format_probability(0.48), "0.48");
        assert_eq!(format_probability(0.6 * 0.8), "0.48");
        assert_eq!(format_probability(0.05 * 0.99), "0.0495");
        assert_eq!(format_probability(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_probability(1.0), "1");
        assert_eq!(format_probability(2.0 / 3.0 * 1e-8), "0.00000000666666666667");
    }

    #[test]
    fn evidence_first_then_names() {
        let tracks = fixtures::tracks();
        let e = Evidence::from_pairs(&tracks, [("at-tracks", "T")]).unwrap();
        let a = GAssignment::parse(&tracks, "method=some-method intend-to-go=t at-tracks=T").unwrap();
        let names: Vec<_> = ordered_entries(&tracks, &e, &a).into_iter().map(|v| tracks.name(v)).collect();
        assert_eq!(names, ["at-tracks", "intend-to-go", "method"]);
    }

    #[test]
    fn json_output_round_trips() {
        let vee = fixtures::vee();
        let e = Evidence::from_pairs(&vee, [("C", "t")]).unwrap();
        let config = SearchConfig { k: 4, test: GibTest::delta(0.5), ..SearchConfig::default() };
        let out = gib_map_search(&vee, &e, &config).unwrap();
        let text = render_json(&vee, &e, &out.explanations);
        let back: JsonOutput = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", text);
    }
}
