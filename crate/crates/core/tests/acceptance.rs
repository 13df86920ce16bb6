//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gibmap::model::fixtures;
use gibmap::oracle::{check_theorems, gib_map_bruteforce, Caps, CheckOptions, RandomNetSpec, Report};
use gibmap::{gib_map_search, Evidence, GAssignment, SearchConfig};

const EXACT: f64 = 1e-12;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn gibmap(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gibmap")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn tracks_structure() -> Outcome {
    let args = ["explain", "--network", &fixture("tracks.json"), "--evidence", "at-tracks=T"];
    let ((code, stdout), cli_time) = timed(|| gibmap(&args));
    let text = String::from_utf8_lossy(&stdout).into_owned();

    let net = fixtures::tracks();
    let evidence = Evidence::from_pairs(&net, [("at-tracks", "T")]).unwrap();
    let (found, lib_time) = timed(|| gib_map_search(&net, &evidence, &SearchConfig::default()));
    let Ok(found) = found else { return outcome(false, "search failed") };
    let best = &found.explanations[0];
    let expected = GAssignment::parse(&net, "at-tracks=T intend-to-go=t method=some-method").unwrap();
    let kidnapped = net.var("kidnapped").unwrap();
    let ok = code == 0
        && text == "p=0.0495\nat-tracks=T\nintend-to-go=t\nmethod=some-method\n"
        && best.assignment == expected
        && best.assignment.get(kidnapped).is_none()
        && (best.probability - 0.0495).abs() <= EXACT
        && cli_time < Duration::from_secs(1);
    outcome(
        ok,
        format!("p={} span={}, cli {:?}, search {:?}", best.probability, best.assignment.render(&net), cli_time, lib_time),
    )
}

fn vee_optimum() -> Outcome {
    let net = fixtures::vee();
    let evidence = Evidence::from_pairs(&net, [("C", "t")]).unwrap();
    let (found, time) = timed(|| gib_map_search(&net, &evidence, &SearchConfig::default()));
    let Ok(found) = found else { return outcome(false, "search failed") };
    let best = &found.explanations[0];
    let truth = gib_map_bruteforce(&net, &evidence, Caps::default()).unwrap();
    let expected = GAssignment::parse(&net, "C=t A=t").unwrap();
    let ok = best.assignment == expected
        && (best.probability - 0.48).abs() <= EXACT
        && truth.assignment == expected
        && (truth.probability - best.probability).abs() <= EXACT
        && time < Duration::from_secs(1);
    outcome(ok, format!("search p={} oracle p={}, {:?}", best.probability, truth.probability, time))
}

fn tallied(report: &Report, ids: &[&str], min_checked: u64) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ids {
        let t = report.tally(id).expect("known check");
        ok &= t.failed == 0 && t.checked >= min_checked;
        parts.push(format!("({id}) {}/{} failed", t.failed, t.checked));
        if let Some(c) = &t.first_counterexample {
            parts.push(format!("first: {c}"));
        }
    }
    outcome(ok, parts.join(", "))
}

fn theorem_options() -> CheckOptions {
    CheckOptions { spec: RandomNetSpec { seed: 42, ..RandomNetSpec::default() }, trials: 100, ..CheckOptions::default() }
}

fn cli_transcript() -> Vec<(i32, Vec<u8>)> {
    let tracks = fixture("tracks.json");
    let vee = fixture("vee.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["explain", "--network", &tracks, "--evidence", "at-tracks=T"],
        vec!["explain", "--network", &tracks, "--evidence", "at-tracks=T", "-k", "5", "--format", "json"],
        vec!["explain", "--network", &vee, "--evidence", "C=t"],
        vec!["oracle", "--network", &vee, "--evidence", "C=t", "--diff"],
        vec!["check", "--trials", "100", "--seed", "42"],
        vec!["check", "--trials", "100", "--seed", "42", "--format", "json"],
    ];
    runs.iter().map(|args| gibmap(args)).collect()
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 TRACKS structural reproduction", tracks_structure()));
    results.push(("2 VEE exact optimum", vee_optimum()));

    let (report, time) = timed(|| check_theorems(&theorem_options()));
    let report = report.expect("theorem options are valid");
    let mut c3 = tallied(&report, &["a", "d"], 100);
    c3.ok &= time < Duration::from_secs(60);
    c3.detail = format!("{}, suite {:?}", c3.detail, time);
    results.push(("3 Bounds from parent rows", c3));
    results.push(("4 Local test equals refinement test", tallied(&report, &["b"], 100)));
    results.push(("5 Product equals joint", tallied(&report, &["c"], 100)));
    results.push(("6 Search optimality", tallied(&report, &["e"], 100)));
    results.push(("7 Singleton-only reduction", tallied(&report, &["g"], 100)));
    results.push(("8 Delta endpoints", tallied(&report, &["i"], 1000)));
    results.push(("9 Hypercube completeness", tallied(&report, &["h"], 100)));

    let first = cli_transcript();
    let second = cli_transcript();
    let codes: Vec<i32> = first.iter().map(|(c, _)| *c).collect();
    let same = first == second;
    results.push((
        "10 Determinism",
        outcome(same && codes.iter().all(|c| *c == 0), format!("{} runs byte-identical: {same}, exit codes {codes:?}", first.len())),
    ));

    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", o.detail);
        failed += usize::from(!o.ok);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
