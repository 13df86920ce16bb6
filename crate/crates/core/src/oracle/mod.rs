//! Brute-force ground truth for small networks.
//!
//! Everything here works from the joint distribution directly: candidate
//! assignments are enumerated outright and independence is checked against
//! every refinement of the ancestors, without going through the local
//! shortcuts the search relies on.

pub mod check;
pub mod random;

use std::collections::HashMap;

use crate::assign::{CompleteAssignment, GAssignment, ValueSet};
use crate::error::{Error, Result};
use crate::hypercube::GibHypercube;
use crate::model::{Network, VarId};
use crate::search::{tie_key, Evidence, Explanation, TIE_TOLERANCE};
use crate::semantics::exact::{rel_eq, DEFAULT_JOINT_CAP, GLOBAL_TOLERANCE};
use crate::semantics::{self, Exact, GibTest};

pub use check::{check_theorems, CheckOptions, Report};
pub use random::RandomNetSpec;

/// Limits on brute-force work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Upper bound on the number of candidate assignments considered.
    pub max_candidates: u128,
    /// Upper bound on the complete assignments summed per probability.
    pub max_joint: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_candidates: 1 << 22, max_joint: DEFAULT_JOINT_CAP }
    }
}

/// Parents-first variable order.
fn top_down(net: &Network) -> Vec<VarId> {
    net.search_order().iter().rev().copied().collect()
}

fn options_count(options: &[Vec<ValueSet>]) -> u128 {
    options.iter().fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128))
}

/// Depth-first enumeration over per-variable options in parents-first order,
/// rejecting a partial assignment as soon as `accept` fails at the variable
/// just assigned.
fn enumerate_with(
    net: &Network,
    options: &[Vec<ValueSet>],
    caps: Caps,
    mut accept: impl FnMut(&GAssignment, VarId) -> Result<bool>,
) -> Result<Vec<GAssignment>> {
    let size = options_count(options);
    if size > caps.max_candidates {
        return Err(Error::TooLarge { size, cap: caps.max_candidates });
    }
    let order = top_down(net);
    let mut out = Vec::new();
    let mut stack: Vec<(usize, GAssignment)> = vec![(0, GAssignment::new())];
    while let Some((depth, a)) = stack.pop() {
        if depth == order.len() {
            out.push(a);
            continue;
        }
        let v = order[depth];
        for set in options[v.idx()].iter().rev() {
            let b = a.clone().with(v, set.clone());
            if accept(&b, v)? {
                stack.push((depth + 1, b));
            }
        }
    }
    Ok(out)
}

/// All G-assignments built from permissible sets that carry exactly the
/// evidence singletons and satisfy the GIB condition, checked against every
/// refinement of the ancestors, at each properly assigned variable.
pub fn enumerate_gib_assignments(net: &Network, evidence: &Evidence, caps: Caps) -> Result<Vec<GAssignment>> {
    let exact = Exact::new(net).with_joint_cap(caps.max_joint);
    let options = permissible_options(net, evidence);
    let mut memo: HashMap<(VarId, GAssignment), bool> = HashMap::new();
    enumerate_with(net, &options, caps, |a, v| {
        if !a.is_properly_assigned(v) {
            return Ok(true);
        }
        let key = (v, a.restrict(std::iter::once(v).chain(net.ancestors(v).iter().copied())));
        if let Some(ok) = memo.get(&key) {
            return Ok(*ok);
        }
        let ok = exact.gib_holds_global(&key.1, v)?;
        memo.insert(key, ok);
        Ok(ok)
    })
}

fn permissible_options(net: &Network, evidence: &Evidence) -> Vec<Vec<ValueSet>> {
    net.vars()
        .map(|v| match evidence.values().get(v) {
            Some(x) => vec![ValueSet::singleton(net.domain_size(v), x)],
            None => net.permissible_sets(v).to_vec(),
        })
        .collect()
}

/// Picks the most probable assignment; among those within the tie tolerance
/// of the best, the one with the smallest rendering.
fn best_of(net: &Network, exact: &Exact, candidates: Vec<GAssignment>) -> Result<Explanation> {
    let mut scored = Vec::with_capacity(candidates.len());
    for a in candidates {
        let p = exact.joint(&a)?;
        scored.push((p, a));
    }
    let best = scored.iter().map(|(p, _)| *p).fold(0.0, f64::max);
    if best <= 0.0 {
        return Err(Error::AgendaExhausted);
    }
    let bar = best * (1.0 - TIE_TOLERANCE);
    let (p, a) = scored
        .into_iter()
        .filter(|(p, _)| *p >= bar)
        .min_by_key(|(_, a)| tie_key(net, a))
        .expect("the best candidate clears the bar");
    Ok(Explanation { assignment: a.compact(), probability: p, bounds: None, experimental: false })
}

/// The most probable GIB assignment carrying the evidence, by exhaustive
/// enumeration. Probabilities are exact joint sums.
pub fn gib_map_bruteforce(net: &Network, evidence: &Evidence, caps: Caps) -> Result<Explanation> {
    let exact = Exact::new(net).with_joint_cap(caps.max_joint);
    let all = enumerate_gib_assignments(net, evidence, caps)?;
    best_of(net, &exact, all)
}

/// Classical independence check at `v` for a singleton assignment: the
/// probability of v's value is the same under every complete assignment of
/// the unassigned ancestors, the assigned ancestors held at their values.
pub fn ib_holds(exact: &Exact, a: &GAssignment, v: VarId) -> Result<bool> {
    let net = exact.network();
    let Some(target) = a.get(v) else { return Ok(true) };
    let target = GAssignment::new().with(v, target.clone());
    let (assigned, free): (Vec<VarId>, Vec<VarId>) = net.ancestors(v).iter().partition(|w| a.get(**w).is_some());
    let fixed = a.restrict(assigned);
    let mut reference: Option<f64> = None;
    let mut values = vec![0usize; free.len()];
    loop {
        let mut given = fixed.clone();
        for (w, x) in free.iter().zip(&values) {
            given.insert(*w, ValueSet::singleton(net.domain_size(*w), *x));
        }
        match exact.cond(&target, &given) {
            Ok(p) => match reference {
                None => reference = Some(p),
                Some(r) if !rel_eq(r, p, GLOBAL_TOLERANCE) => return Ok(false),
                Some(_) => {}
            },
            Err(Error::UndefinedConditional) => {}
            Err(e) => return Err(e),
        }
        // odometer over the free ancestors
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(true);
            }
            k -= 1;
            values[k] += 1;
            if values[k] < net.domain_size(free[k]) {
                break;
            }
            values[k] = 0;
        }
    }
}

/// The most probable assignment of single values carrying the evidence in
/// which every assigned variable is independent of its unassigned ancestors
/// given its assigned ones.
pub fn ib_map_bruteforce(net: &Network, evidence: &Evidence, caps: Caps) -> Result<Explanation> {
    let exact = Exact::new(net).with_joint_cap(caps.max_joint);
    let options: Vec<Vec<ValueSet>> = net
        .vars()
        .map(|v| {
            let d = net.domain_size(v);
            match evidence.values().get(v) {
                Some(x) => vec![ValueSet::singleton(d, x)],
                None => std::iter::once(ValueSet::full(d)).chain((0..d).map(|x| ValueSet::singleton(d, x))).collect(),
            }
        })
        .collect();
    let mut memo: HashMap<(VarId, GAssignment), bool> = HashMap::new();
    let all = enumerate_with(net, &options, caps, |a, v| {
        if !a.is_properly_assigned(v) {
            return Ok(true);
        }
        let key = (v, a.restrict(std::iter::once(v).chain(net.ancestors(v).iter().copied())));
        if let Some(ok) = memo.get(&key) {
            return Ok(*ok);
        }
        let ok = ib_holds(&exact, &key.1, v)?;
        memo.insert(key, ok);
        Ok(ok)
    })?;
    best_of(net, &exact, all)
}

/// Maximal GIB hypercubes by checking every combination of permissible
/// subsets of the constraint's sets.
pub fn maximal_hypercubes_bruteforce(
    net: &Network,
    v: VarId,
    constraint: &GAssignment,
    test: GibTest,
    refine_target: bool,
) -> Vec<GibHypercube> {
    let within = |w: VarId| -> Vec<ValueSet> {
        let bound = constraint.set_of(net, w);
        net.permissible_sets(w).iter().filter(|s| s.is_subset(&bound)).cloned().collect()
    };
    let targets = if refine_target { within(v) } else { vec![constraint.set_of(net, v)] };
    let parent_options: Vec<Vec<ValueSet>> = net.parents(v).iter().map(|p| within(*p)).collect();

    let mut combos: Vec<Vec<ValueSet>> = vec![Vec::new()];
    for opts in &parent_options {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                opts.iter().map(move |s| {
                    let mut c = c.clone();
                    c.push(s.clone());
                    c
                })
            })
            .collect();
    }
    let mut cubes = Vec::new();
    for target in &targets {
        for parent_sets in &combos {
            let cube = GibHypercube {
                base: v,
                target: target.clone(),
                parent_sets: parent_sets.clone(),
                bounds: semantics::Bounds::ONE,
            };
            let a = cube.to_assignment(net);
            if semantics::holds(net, &a, v, test) {
                let bounds =
                    if a.is_properly_assigned(v) { semantics::local_bounds(net, v, &a) } else { semantics::Bounds::ONE };
                cubes.push(GibHypercube { bounds, ..cube });
            }
        }
    }
    let mut maximal: Vec<GibHypercube> =
        cubes.iter().filter(|h| !cubes.iter().any(|o| o != *h && h.refines(o))).cloned().collect();
    maximal.sort_by(|a, b| (&a.target, &a.parent_sets).cmp(&(&b.target, &b.parent_sets)));
    maximal
}

/// Every complete assignment of all variables consistent with the evidence.
pub fn complete_assignments(net: &Network, evidence: &Evidence) -> Vec<CompleteAssignment> {
    let mut out = vec![CompleteAssignment::new()];
    for v in net.vars() {
        let choices: Vec<usize> = match evidence.values().get(v) {
            Some(x) => vec![x],
            None => (0..net.domain_size(v)).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|c| {
                choices.iter().map(move |x| {
                    let mut c = c.clone();
                    c.set(v, *x);
                    c
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::maximal_gib_hypercubes;
    use crate::model::fixtures;

    fn ev(net: &Network, pairs: &[(&str, &str)]) -> Evidence {
        Evidence::from_pairs(net, pairs.iter().copied()).unwrap()
    }

    fn g(net: &Network, s: &str) -> GAssignment {
        GAssignment::parse(net, s).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let chain = fixtures::chain();
        let all = enumerate_gib_assignments(&chain, &ev(&chain, &[("B", "t")]), Caps::default()).unwrap();
        for s in ["B=t", "B=t A=t", "B=t A=f"] {
            assert!(all.contains(&g(&chain, s)), "{s}");
        }

        let vee = fixtures::vee();
        let all = enumerate_gib_assignments(&vee, &ev(&vee, &[("C", "t")]), Caps::default()).unwrap();
        assert!(all.contains(&g(&vee, "C=t A=t")));
        assert!(!all.contains(&g(&vee, "C=t")));

        let dep = fixtures::dep();
        let all = enumerate_gib_assignments(&dep, &ev(&dep, &[("B", "t")]), Caps::default()).unwrap();
        assert!(!all.contains(&g(&dep, "B=t")));
    }

    #[test]
    fn complete_assignments_are_always_gib() {
        let vee = fixtures::vee();
        let e = ev(&vee, &[("C", "f")]);
        let all = enumerate_gib_assignments(&vee, &e, Caps::default()).unwrap();
        for c in complete_assignments(&vee, &e) {
            assert!(all.contains(&c.to_gassignment(&vee)));
        }
    }

    #[test]
    fn bruteforce_maps() {
        let vee = fixtures::vee();
        let best = gib_map_bruteforce(&vee, &ev(&vee, &[("C", "t")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&vee, "C=t A=t"));
        assert!((best.probability - 0.48).abs() < 1e-12);

        let chain = fixtures::chain();
        let best = gib_map_bruteforce(&chain, &ev(&chain, &[("B", "t")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&chain, "B=t"));
        assert!((best.probability - 0.7).abs() < 1e-12);

        let dep = fixtures::dep();
        let best = gib_map_bruteforce(&dep, &ev(&dep, &[("B", "t")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&dep, "B=t A=t"));
        assert!((best.probability - 0.54).abs() < 1e-12);

        let tracks = fixtures::tracks();
        let best = gib_map_bruteforce(&tracks, &ev(&tracks, &[("at-tracks", "T")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&tracks, "at-tracks=T intend-to-go=t method=some-method"));
        assert!((best.probability - 0.0495).abs() < 1e-12);
    }

    #[test]
    fn masked_concept_optimum() {
        let net = fixtures::masked();
        let best = gib_map_bruteforce(&net, &ev(&net, &[("Z", "z")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&net, "Z=z W=a"));
        assert!((best.probability - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ib_examples() {
        let vee = fixtures::vee();
        let exact = Exact::new(&vee);
        let c = vee.var("C").unwrap();
        assert!(ib_holds(&exact, &g(&vee, "C=t A=t"), c).unwrap());
        assert!(!ib_holds(&exact, &g(&vee, "C=t"), c).unwrap());
        let best = ib_map_bruteforce(&vee, &ev(&vee, &[("C", "t")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&vee, "C=t A=t"));

        // Without the concept the TRACKS explanation has to name a method
        // or the kidnapping.
        let tracks = fixtures::tracks().without_concepts();
        let best = ib_map_bruteforce(&tracks, &ev(&tracks, &[("at-tracks", "T")]), Caps::default()).unwrap();
        assert_eq!(best.assignment, g(&tracks, "at-tracks=T kidnapped=t"));
    }

    #[test]
    fn caps_are_enforced() {
        let tracks = fixtures::tracks();
        let caps = Caps { max_candidates: 100, ..Caps::default() };
        let err = enumerate_gib_assignments(&tracks, &Evidence::default(), caps).unwrap_err();
        assert_eq!(err.kind(), "TooLarge");
    }

    #[test]
    fn hypercube_bruteforce_agrees_on_fixtures() {
        let vee = fixtures::vee();
        let c = vee.var("C").unwrap();
        for constraint in ["C=t", "C=t A=f", "C=f B=t"] {
            for refine in [false, true] {
                let a = g(&vee, constraint);
                let fast = maximal_gib_hypercubes(&vee, c, &a, GibTest::default(), refine);
                let slow = maximal_hypercubes_bruteforce(&vee, c, &a, GibTest::default(), refine);
                assert_eq!(fast, slow, "{constraint} {refine}");
            }
        }
    }
}
