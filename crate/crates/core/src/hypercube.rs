//! G-hypercubes: assignments to a node and its parents drawn from the
//! permissible families, and the search for the maximal ones satisfying the
//! GIB condition under a constraint.

use std::collections::{HashSet, VecDeque};

use crate::assign::{GAssignment, ValueSet};
use crate::error::{Error, Result};
use crate::model::{Network, VarId};
use crate::semantics::{self, Bounds, GibTest};

/// A GIB hypercube based on `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibHypercube {
    pub base: VarId,
    pub target: ValueSet,
    /// One set per parent, in declared parent order.
    pub parent_sets: Vec<ValueSet>,
    /// Local bounds of the target over the hypercube's parent rows.
    pub bounds: Bounds,
}

impl GibHypercube {
    /// The shared conditional P(target | parent rows); the upper bound under
    /// a delta test.
    pub fn conditional(&self) -> f64 {
        self.bounds.hi
    }

    pub fn to_assignment(&self, net: &Network) -> GAssignment {
        let mut a = GAssignment::new().with(self.base, self.target.clone());
        for (p, s) in net.parents(self.base).iter().zip(&self.parent_sets) {
            a.insert(*p, s.clone());
        }
        a
    }

    pub fn refines(&self, other: &GibHypercube) -> bool {
        self.base == other.base
            && self.target.is_subset(&other.target)
            && self.parent_sets.iter().zip(&other.parent_sets).all(|(a, b)| a.is_subset(b))
    }

    fn sort_key(&self) -> (&ValueSet, &[ValueSet]) {
        (&self.target, &self.parent_sets)
    }
}

/// Checks that `h` is a G-hypercube based on `v` (span within v and its
/// parents, permissible sets) and that the test holds at `v`.
pub fn is_gib_hypercube(net: &Network, v: VarId, h: &GAssignment, test: GibTest) -> Result<bool> {
    let parents = net.parents(v);
    for (w, _) in h.entries() {
        if w != v && !parents.contains(&w) {
            return Err(Error::BadSpan { base: net.name(v).to_string(), variable: net.name(w).to_string() });
        }
    }
    for w in std::iter::once(v).chain(parents.iter().copied()) {
        if !net.is_permissible(w, &h.set_of(net, w)) {
            return Err(Error::ImpermissibleSet(net.name(w).to_string()));
        }
    }
    Ok(semantics::holds(net, h, v, test))
}

/// Permissible sets contained in `bound`, with the immediate-refinement
/// (Hasse) structure among them.
struct Family {
    sets: Vec<ValueSet>,
    tops: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl Family {
    fn new(sets: Vec<ValueSet>) -> Family {
        let n = sets.len();
        let strict = |j: usize, i: usize| sets[j].is_strict_subset(&sets[i]);
        let maximal_of = |cands: Vec<usize>| -> Vec<usize> {
            cands.iter().copied().filter(|&j| !cands.iter().any(|&k| strict(j, k))).collect()
        };
        let tops = maximal_of((0..n).collect());
        let children = (0..n).map(|i| maximal_of((0..n).filter(|&j| strict(j, i)).collect())).collect();
        Family { sets, tops, children }
    }
}

fn permissible_within(net: &Network, w: VarId, bound: &ValueSet) -> Vec<ValueSet> {
    net.permissible_sets(w).iter().filter(|s| s.is_subset(bound)).cloned().collect()
}

/// All maximal GIB hypercubes based on `v` that refine `constraint` on `v`
/// and its parents.
///
/// With `refine_target == false` the set at `v` is pinned to the
/// constraint's; otherwise it may be any permissible subset of it and
/// maximality is taken over target and parents jointly. The result is an
/// antichain sorted by (target, parent sets).
///
/// Candidates are explored breadth-first from the least refined ones; a
/// candidate is refined one coordinate at a time only when its own test
/// fails.
pub fn maximal_gib_hypercubes(
    net: &Network,
    v: VarId,
    constraint: &GAssignment,
    test: GibTest,
    refine_target: bool,
) -> Vec<GibHypercube> {
    let parents = net.parents(v);
    let target_bound = constraint.set_of(net, v);
    let mut families = Vec::with_capacity(parents.len() + 1);
    families.push(if refine_target {
        Family::new(permissible_within(net, v, &target_bound))
    } else {
        Family::new(vec![target_bound])
    });
    for p in parents {
        families.push(Family::new(permissible_within(net, *p, &constraint.set_of(net, *p))));
    }
    if families.iter().any(|f| f.sets.is_empty()) {
        return Vec::new();
    }

    let build = |coords: &[usize]| -> GAssignment {
        let mut a = GAssignment::new().with(v, families[0].sets[coords[0]].clone());
        for (k, p) in parents.iter().enumerate() {
            a.insert(*p, families[k + 1].sets[coords[k + 1]].clone());
        }
        a
    };

    let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut start = vec![Vec::new()];
    for f in &families {
        start = start
            .into_iter()
            .flat_map(|prefix| {
                f.tops.iter().map(move |&t| {
                    let mut c = prefix.clone();
                    c.push(t);
                    c
                })
            })
            .collect();
    }
    for c in start {
        if seen.insert(c.clone()) {
            queue.push_back(c);
        }
    }

    let mut passed: Vec<(Vec<usize>, Bounds)> = Vec::new();
    while let Some(coords) = queue.pop_front() {
        let a = build(&coords);
        if semantics::holds(net, &a, v, test) {
            let bounds = if a.is_properly_assigned(v) { semantics::local_bounds(net, v, &a) } else { Bounds::ONE };
            passed.push((coords, bounds));
            continue;
        }
        for (k, f) in families.iter().enumerate() {
            for &child in &f.children[coords[k]] {
                let mut next = coords.clone();
                next[k] = child;
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }

    let cubes: Vec<GibHypercube> = passed
        .into_iter()
        .map(|(coords, bounds)| GibHypercube {
            base: v,
            target: families[0].sets[coords[0]].clone(),
            parent_sets: (1..coords.len()).map(|k| families[k].sets[coords[k]].clone()).collect(),
            bounds,
        })
        .collect();
    let mut maximal: Vec<GibHypercube> = cubes
        .iter()
        .filter(|h| !cubes.iter().any(|o| o != *h && h.refines(o)))
        .cloned()
        .collect();
    maximal.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    maximal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    fn g(net: &Network, s: &str) -> GAssignment {
        GAssignment::parse(net, s).unwrap()
    }

    fn parent_render(net: &Network, h: &GibHypercube) -> String {
        h.to_assignment(net).restrict(net.parents(h.base).iter().copied()).render(net)
    }

    #[test]
    fn membership_examples() {
        let vee = fixtures::vee();
        let c = vee.var("C").unwrap();
        let t = GibTest::exact(0.0);
        assert!(is_gib_hypercube(&vee, c, &g(&vee, "C=t A=t"), t).unwrap());
        assert!(!is_gib_hypercube(&vee, c, &g(&vee, "C=t"), t).unwrap());
        assert!(is_gib_hypercube(&vee, c, &g(&vee, "A=f B=t"), t).unwrap());

        let chain = fixtures::chain();
        let a = chain.var("A").unwrap();
        let err = is_gib_hypercube(&chain, a, &g(&chain, "A=t B=t"), t).unwrap_err();
        assert_eq!(err.kind(), "BadSpan");

        let tracks = fixtures::tracks();
        let m = tracks.var("method").unwrap();
        let err = is_gib_hypercube(&tracks, m, &g(&tracks, "method=m1|m2"), t).unwrap_err();
        assert_eq!(err.kind(), "ImpermissibleSet");
    }

    #[test]
    fn vee_maximal_cubes() {
        let vee = fixtures::vee();
        let c = vee.var("C").unwrap();
        let cubes = maximal_gib_hypercubes(&vee, c, &g(&vee, "C=t"), GibTest::exact(0.0), false);
        let got: Vec<_> = cubes.iter().map(|h| parent_render(&vee, h)).collect();
        assert_eq!(got, ["A=t", "A=f, B=t", "A=f, B=f"]);
        let probs: Vec<_> = cubes.iter().map(GibHypercube::conditional).collect();
        assert_eq!(probs, [0.8, 0.3, 0.5]);

        let cubes = maximal_gib_hypercubes(&vee, c, &g(&vee, "C=t A=f"), GibTest::exact(0.0), false);
        let got: Vec<_> = cubes.iter().map(|h| parent_render(&vee, h)).collect();
        assert_eq!(got, ["A=f, B=t", "A=f, B=f"]);
    }

    #[test]
    fn chain_single_cube() {
        let chain = fixtures::chain();
        let b = chain.var("B").unwrap();
        let cubes = maximal_gib_hypercubes(&chain, b, &g(&chain, "B=t"), GibTest::exact(0.0), false);
        assert_eq!(cubes.len(), 1);
        assert!(cubes[0].parent_sets[0].is_full());
    }

    #[test]
    fn tracks_cubes_at_the_evidence() {
        let tracks = fixtures::tracks();
        let at = tracks.var("at-tracks").unwrap();
        let cubes = maximal_gib_hypercubes(&tracks, at, &g(&tracks, "at-tracks=T"), GibTest::default(), false);
        let got: Vec<_> = cubes.iter().map(|h| parent_render(&tracks, h)).collect();
        assert_eq!(got, ["method=some-method", "kidnapped=t", "kidnapped=f, method=none"]);
        assert_eq!(cubes[2].conditional(), 0.0);
    }

    #[test]
    fn full_target_is_always_gib() {
        let vee = fixtures::vee();
        let c = vee.var("C").unwrap();
        let cubes = maximal_gib_hypercubes(&vee, c, &GAssignment::new(), GibTest::exact(0.0), false);
        assert_eq!(cubes.len(), 1);
        assert!(cubes[0].target.is_full() && cubes[0].parent_sets.iter().all(ValueSet::is_full));
    }
}
