//! Randomized cross-checks of the local machinery against brute force.

use std::fmt::{self, Write as _};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::random::{random_evidence, random_gassignment, random_permissible, random_proper_subset, random_refinement};
use super::{enumerate_gib_assignments, gib_map_bruteforce, ib_map_bruteforce, maximal_hypercubes_bruteforce, Caps};
use crate::assign::GAssignment;
use crate::error::{Error, Result};
use crate::hypercube::{is_gib_hypercube, maximal_gib_hypercubes};
use crate::model::{Network, VarId};
use crate::search::{gib_map_search, Evidence, Explanation, SearchConfig, TIE_TOLERANCE};
use crate::semantics::exact::{rel_eq, GLOBAL_TOLERANCE};
use crate::semantics::{self, Exact, GibTest};

use super::RandomNetSpec;

/// Relative tolerance for comparing bounds and products against exact sums.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub spec: RandomNetSpec,
    pub trials: usize,
    /// (variable, assignment) samples drawn per trial.
    pub samples: usize,
    /// Refinements drawn per sample for the containment check.
    pub refinements: usize,
    pub search: SearchConfig,
    pub caps: Caps,
    /// Corrupts the product check on purpose, to show the harness notices.
    pub inject_fault: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            spec: RandomNetSpec::default(),
            trials: 100,
            samples: 10,
            refinements: 5,
            search: SearchConfig::default(),
            caps: Caps::default(),
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    Extremes,
    LocalGlobal,
    Product,
    Containment,
    Optimality,
    DeltaAgreement,
    IbReduction,
    Hypercubes,
    DeltaEndpoints,
    OtherTargetMode,
}

const CHECKS: [Check; 10] = [
    Check::Extremes,
    Check::LocalGlobal,
    Check::Product,
    Check::Containment,
    Check::Optimality,
    Check::DeltaAgreement,
    Check::IbReduction,
    Check::Hypercubes,
    Check::DeltaEndpoints,
    Check::OtherTargetMode,
];

impl Check {
    fn id(self) -> &'static str {
        match self {
            Check::Extremes => "a",
            Check::LocalGlobal => "b",
            Check::Product => "c",
            Check::Containment => "d",
            Check::Optimality => "e",
            Check::DeltaAgreement => "f",
            Check::IbReduction => "g",
            Check::Hypercubes => "h",
            Check::DeltaEndpoints => "i",
            Check::OtherTargetMode => "j",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Check::Extremes => "refinement extremes equal local bounds",
            Check::LocalGlobal => "local test agrees with refinement test",
            Check::Product => "product of conditionals equals joint",
            Check::Containment => "sampled refinements stay within bounds",
            Check::Optimality => "search matches brute-force optimum",
            Check::DeltaAgreement => "delta local test agrees with refinement test",
            Check::IbReduction => "search without concepts matches IB optimum",
            Check::Hypercubes => "maximal hypercubes match brute force",
            Check::DeltaEndpoints => "delta endpoints and monotonicity",
            Check::OtherTargetMode => "search in the other target mode matches optimum",
        }
    }

    fn asserted(self) -> bool {
        !matches!(self, Check::DeltaAgreement | Check::OtherTargetMode)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub id: String,
    pub name: String,
    pub asserted: bool,
    pub checked: u64,
    pub failed: u64,
    pub first_counterexample: Option<String>,
}

impl Tally {
    pub fn passed(&self) -> bool {
        !self.asserted || self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<Tally>,
    pub passed: bool,
}

impl Report {
    pub fn tally(&self, id: &str) -> Option<&Tally> {
        self.checks.iter().find(|t| t.id == id)
    }

    pub fn first_failure(&self) -> Option<&Tally> {
        self.checks.iter().find(|t| !t.passed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theorem check: {} trials, seed {}", self.trials, self.seed)?;
        for t in &self.checks {
            let note = if t.asserted { "" } else { " (reported)" };
            writeln!(f, "({}) {}: {} checked, {} failed{}", t.id, t.name, t.checked, t.failed, note)?;
            if let Some(c) = &t.first_counterexample {
                writeln!(f, "    first counterexample: {c}")?;
            }
        }
        writeln!(f, "result: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Per-trial tallies, indexed like [`CHECKS`].
type Tallies = Vec<(u64, u64, Option<String>)>;

struct Trial<'a> {
    index: usize,
    seed: u64,
    net: &'a Network,
    exact: Exact<'a>,
    tallies: Tallies,
}

impl Trial<'_> {
    fn record(&mut self, check: Check, ok: bool, detail: impl FnOnce() -> String) {
        let slot = &mut self.tallies[CHECKS.iter().position(|c| *c == check).expect("known check")];
        slot.0 += 1;
        if !ok {
            slot.1 += 1;
            if slot.2.is_none() {
                slot.2 = Some(format!("trial {} (seed {}): {}", self.index, self.seed, detail()));
            }
        }
    }

}

fn trial_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `options.trials` independent trials on random networks and tallies
/// every check. Trials run in parallel; the merge is by trial index, so the
/// report depends only on the options.
pub fn check_theorems(options: &CheckOptions) -> Result<Report> {
    options.spec.validate()?;
    options.search.validate()?;
    let results: Vec<Result<Tallies>> =
        (0..options.trials).into_par_iter().map(|i| run_trial(options, i)).collect();

    let mut checks: Vec<Tally> = CHECKS
        .iter()
        .map(|c| Tally { id: c.id().into(), name: c.name().into(), asserted: c.asserted(), ..Tally::default() })
        .collect();
    for r in results {
        for (t, (checked, failed, first)) in checks.iter_mut().zip(r?) {
            t.checked += checked;
            t.failed += failed;
            if t.first_counterexample.is_none() {
                t.first_counterexample = first;
            }
        }
    }
    let passed = checks.iter().all(Tally::passed);
    Ok(Report { seed: options.spec.seed, trials: options.trials, checks, passed })
}

fn run_trial(options: &CheckOptions, index: usize) -> Result<Tallies> {
    let seed = trial_seed(options.spec.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = options.spec.generate_with(&mut rng);
    let evidence = random_evidence(&mut rng, &net);
    let mut t = Trial {
        index,
        seed,
        net: &net,
        exact: Exact::new(&net).with_joint_cap(options.caps.max_joint),
        tallies: vec![(0, 0, None); CHECKS.len()],
    };

    for _ in 0..options.samples {
        let (v, a) = sample_query(&mut rng, &net);
        local_bound_checks(&mut t, &mut rng, options, v, &a)?;
        delta_checks(&mut t, &mut rng, v, &a)?;
    }
    product_checks(&mut t, options, &evidence)?;
    search_checks(&mut t, options, &evidence)?;
    hypercube_checks(&mut t, &mut rng);
    Ok(t.tallies)
}

/// A variable (with parents when the network has any) and a random
/// assignment giving it a proper subset.
fn sample_query(rng: &mut impl Rng, net: &Network) -> (VarId, GAssignment) {
    let inner: Vec<VarId> = net.vars().filter(|v| !net.parents(*v).is_empty()).collect();
    let v = if inner.is_empty() { VarId(rng.gen_range(0..net.len() as u32)) } else { inner[rng.gen_range(0..inner.len())] };
    let mut a = random_gassignment(rng, net, 0.4);
    a.insert(v, random_proper_subset(rng, net, v));
    (v, a)
}

fn local_bound_checks(
    t: &mut Trial,
    rng: &mut impl Rng,
    options: &CheckOptions,
    v: VarId,
    a: &GAssignment,
) -> Result<()> {
    let net = t.net;
    let bounds = semantics::local_bounds(t.net, v, a);
    let scan = t.exact.refinement_scan(a, v)?;
    let ok = rel_eq(scan.min, bounds.lo, BOUND_TOLERANCE) && rel_eq(scan.max, bounds.hi, BOUND_TOLERANCE);
    t.record(Check::Extremes, ok, || {
        format!("{} at {}: refinements [{}, {}], local [{}, {}]", a.render(net), net.name(v), scan.min, scan.max, bounds.lo, bounds.hi)
    });

    let local = semantics::gib_holds_local(t.net, a, v, GLOBAL_TOLERANCE);
    let global = t.exact.gib_holds_global(a, v)?;
    t.record(Check::LocalGlobal, local == global, || {
        format!("{} at {}: local {local}, refinements {global}", a.render(net), net.name(v))
    });

    let anc = t.net.ancestors(v).to_vec();
    let given = a.restrict(anc.iter().copied());
    let target = GAssignment::new().with(v, a.set_of(t.net, v));
    let slack = BOUND_TOLERANCE * bounds.hi;
    for _ in 0..options.refinements {
        let b = random_refinement(rng, t.net, &given, &anc);
        match t.exact.cond(&target, &b) {
            Ok(p) => {
                t.record(Check::Containment, bounds.contains(p, slack), || {
                    format!("{} given {}: {p} outside [{}, {}]", target.render(net), b.render(net), bounds.lo, bounds.hi)
                });
            }
            Err(Error::UndefinedConditional) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn delta_checks(t: &mut Trial, rng: &mut impl Rng, v: VarId, a: &GAssignment) -> Result<()> {
    let net = t.net;
    let zero = semantics::delta_gib_holds(t.net, a, v, 0.0);
    let exact = semantics::gib_holds_local(t.net, a, v, 0.0);
    let one = semantics::delta_gib_holds(t.net, a, v, 1.0);
    let (mut d1, mut d2): (f64, f64) = (rng.gen(), rng.gen());
    if d1 > d2 {
        std::mem::swap(&mut d1, &mut d2);
    }
    let monotone = !semantics::delta_gib_holds(t.net, a, v, d1) || semantics::delta_gib_holds(t.net, a, v, d2);
    t.record(Check::DeltaEndpoints, zero == exact && one && monotone, || {
        format!("{} at {}: delta 0 {zero} vs exact {exact}, delta 1 {one}, monotone over [{d1}, {d2}] {monotone}", a.render(net), net.name(v))
    });

    let delta: f64 = rng.gen_range(0.0..0.5);
    let local = semantics::delta_gib_holds(t.net, a, v, delta);
    let global = t.exact.delta_gib_holds_global(a, v, delta)?;
    t.record(Check::DeltaAgreement, local == global, || {
        format!("{} at {} with delta {delta}: local {local}, refinements {global}", a.render(net), net.name(v))
    });
    Ok(())
}

fn product_checks(t: &mut Trial, options: &CheckOptions, evidence: &Evidence) -> Result<()> {
    let net = t.net;
    for a in enumerate_gib_assignments(t.net, evidence, options.caps)? {
        let joint = t.exact.joint(&a)?;
        let product = match semantics::gib_probability(t.net, &a, semantics::DEFAULT_EPS) {
            Ok(p) if options.inject_fault => -p,
            Ok(p) => p,
            Err(_) => f64::NAN,
        };
        t.record(Check::Product, rel_eq(product, joint, BOUND_TOLERANCE), || {
            format!("{}: product {product}, joint {joint}", a.render(net))
        });
    }
    Ok(())
}

fn same_explanation(a: &Result<Explanation>, b: &Result<Explanation>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.assignment == y.assignment && rel_eq(x.probability, y.probability, TIE_TOLERANCE),
        (Err(Error::AgendaExhausted), Err(Error::AgendaExhausted)) => true,
        _ => false,
    }
}

fn describe(net: &Network, r: &Result<Explanation>) -> String {
    match r {
        Ok(e) => format!("{} p={}", e.assignment.render(net), e.probability),
        Err(e) => e.to_string(),
    }
}

/// Separates "no explanation" (a comparable outcome) from real failures.
fn fatal(r: Result<Explanation>) -> Result<Result<Explanation>> {
    match r {
        Err(e) if !matches!(e, Error::AgendaExhausted) => Err(e),
        r => Ok(r),
    }
}

fn first_explanation(net: &Network, evidence: &Evidence, config: &SearchConfig) -> Result<Explanation> {
    gib_map_search(net, evidence, config).map(|mut out| out.explanations.swap_remove(0))
}

fn search_checks(t: &mut Trial, options: &CheckOptions, evidence: &Evidence) -> Result<()> {
    let net = t.net;
    let config = SearchConfig { k: 1, trace: false, ..options.search };
    let truth = fatal(gib_map_bruteforce(net, evidence, options.caps))?;
    let found = first_explanation(net, evidence, &config);
    t.record(Check::Optimality, same_explanation(&found, &truth), || {
        format!("evidence {}: search {}, brute force {}", evidence.to_gassignment(net).render(net), describe(net, &found), describe(net, &truth))
    });

    let other = SearchConfig { refine_target: !config.refine_target, ..config };
    let found = first_explanation(net, evidence, &other);
    t.record(Check::OtherTargetMode, same_explanation(&found, &truth), || {
        format!(
            "evidence {} (refine_target={}): search {}, brute force {}",
            evidence.to_gassignment(net).render(net),
            other.refine_target,
            describe(net, &found),
            describe(net, &truth)
        )
    });

    let plain = net.without_concepts();
    let truth = fatal(ib_map_bruteforce(&plain, evidence, options.caps))?;
    let found = first_explanation(&plain, evidence, &SearchConfig { test: GibTest::default(), ..config });
    t.record(Check::IbReduction, same_explanation(&found, &truth), || {
        format!("evidence {}: search {}, IB brute force {}", evidence.to_gassignment(net).render(net), describe(&plain, &found), describe(&plain, &truth))
    });
    Ok(())
}

fn hypercube_checks(t: &mut Trial, rng: &mut impl Rng) {
    let net = t.net;
    let inner: Vec<VarId> = net.vars().filter(|v| !net.parents(*v).is_empty()).collect();
    if inner.is_empty() {
        return;
    }
    let v = inner[rng.gen_range(0..inner.len())];
    let proper: Vec<_> = net.permissible_sets(v).iter().filter(|s| !s.is_full()).collect();
    let target = proper[rng.gen_range(0..proper.len())].clone();
    let mut constraint = GAssignment::new().with(v, target);
    for p in net.parents(v) {
        if rng.gen_bool(0.5) {
            constraint.insert(*p, random_permissible(rng, net, *p));
        }
    }
    let test = GibTest::default();
    for refine in [false, true] {
        let fast = maximal_gib_hypercubes(net, v, &constraint, test, refine);
        let slow = maximal_hypercubes_bruteforce(net, v, &constraint, test, refine);
        let antichain = fast.iter().all(|h| !fast.iter().any(|o| o != h && h.refines(o)));
        let valid = fast.iter().all(|h| is_gib_hypercube(net, v, &h.to_assignment(net), test).unwrap_or(false));
        t.record(Check::Hypercubes, fast == slow && antichain && valid, || {
            let show = |hs: &[crate::hypercube::GibHypercube]| {
                let mut s = String::new();
                for h in hs {
                    let _ = write!(s, "[{}] ", h.to_assignment(net).render(net));
                }
                s
            };
            format!(
                "{} at {} (refine_target={refine}): enumerated {}, brute force {}",
                constraint.render(net),
                net.name(v),
                show(&fast),
                show(&slow)
            )
        });
    }
}
