//! Probability computations over G-assignments.
//!
//! The functions in this module only ever read the CPT of a node and the sets
//! its parents receive; everything that needs the joint distribution lives in
//! [`exact`].

pub mod exact;

use crate::assign::{CompleteAssignment, GAssignment, ValueSet};
use crate::error::{Error, Result};
use crate::model::{Network, VarId};

pub use exact::{Exact, RefinementScan};

/// Default relative tolerance for the min = max test.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Extremes of a conditional over the parent rows consistent with an
/// assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const ONE: Bounds = Bounds { lo: 1.0, hi: 1.0 };

    pub fn point(p: f64) -> Bounds {
        Bounds { lo: p, hi: p }
    }

    pub fn contains(&self, p: f64, tol: f64) -> bool {
        p >= self.lo - tol && p <= self.hi + tol
    }
}

/// Which independence test to apply at a node: exact equality up to a
/// relative `eps` when `delta == 0`, the delta-relaxed test otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibTest {
    pub delta: f64,
    pub eps: f64,
}

impl Default for GibTest {
    fn default() -> Self {
        GibTest { delta: 0.0, eps: DEFAULT_EPS }
    }
}

impl GibTest {
    pub fn exact(eps: f64) -> GibTest {
        GibTest { delta: 0.0, eps }
    }

    pub fn delta(delta: f64) -> GibTest {
        GibTest { delta, eps: 0.0 }
    }

    pub fn is_delta(&self) -> bool {
        self.delta > 0.0
    }

    pub fn accepts(&self, b: Bounds) -> bool {
        if self.is_delta() {
            b.lo >= (1.0 - self.delta) * b.hi
        } else {
            b.hi - b.lo <= self.eps * b.hi
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidArgument(format!("delta {} outside [0, 1]", self.delta)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps {} must be a non-negative number", self.eps)));
        }
        Ok(())
    }
}

/// P(v ∈ set | parents = d), read off one CPT row.
pub fn cond_value_set_prob(net: &Network, v: VarId, set: &ValueSet, d: &CompleteAssignment) -> Result<f64> {
    let mut values = Vec::with_capacity(net.parents(v).len());
    for p in net.parents(v) {
        values.push(d.get(*p).ok_or_else(|| Error::SpanMismatch(net.name(*p).to_string()))?);
    }
    let cpt = net.cpt(v);
    Ok(cpt.mass(cpt.row_index(&values), set))
}

/// Result of scanning the parent rows of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalScan {
    pub bounds: Bounds,
    /// CPT rows consulted.
    pub rows: usize,
}

/// Min and max of P(a(v) | D) over complete parent assignments D included
/// in `a`.
pub fn local_bounds(net: &Network, v: VarId, a: &GAssignment) -> Bounds {
    local_scan(net, v, a).bounds
}

pub fn local_scan(net: &Network, v: VarId, a: &GAssignment) -> LocalScan {
    let target = a.set_of(net, v);
    let cpt = net.cpt(v);
    let parents = net.parents(v);
    let sets: Vec<Vec<usize>> = parents.iter().map(|p| a.set_of(net, *p).iter().collect()).collect();
    let mut choice = vec![0usize; parents.len()];
    let mut values: Vec<usize> = sets.iter().map(|s| s[0]).collect();
    let (mut lo, mut hi, mut rows) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    loop {
        let m = cpt.mass(cpt.row_index(&values), &target);
        lo = lo.min(m);
        hi = hi.max(m);
        rows += 1;
        // odometer over the parent sets, last parent fastest
        let mut k = parents.len();
        loop {
            if k == 0 {
                return LocalScan { bounds: Bounds { lo, hi }, rows };
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < sets[k].len() {
                values[k] = sets[k][choice[k]];
                break;
            }
            choice[k] = 0;
            values[k] = sets[k][0];
        }
    }
}

/// Local GIB test at `v`: min and max over the included parent rows agree
/// up to relative `eps`.
pub fn gib_holds_local(net: &Network, a: &GAssignment, v: VarId, eps: f64) -> bool {
    holds(net, a, v, GibTest::exact(eps))
}

/// Local delta-GIB test: min ≥ (1 − delta) · max.
pub fn delta_gib_holds(net: &Network, a: &GAssignment, v: VarId, delta: f64) -> bool {
    if !a.is_properly_assigned(v) {
        return true;
    }
    let b = local_bounds(net, v, a);
    b.lo >= (1.0 - delta) * b.hi
}

/// Applies `test` at `v`. Unrestricted nodes and roots pass vacuously.
pub fn holds(net: &Network, a: &GAssignment, v: VarId, test: GibTest) -> bool {
    if !a.is_properly_assigned(v) || net.parents(v).is_empty() {
        return true;
    }
    test.accepts(local_bounds(net, v, a))
}

/// Probability of a GIB assignment as the product of its local
/// conditionals.
pub fn gib_probability(net: &Network, a: &GAssignment, eps: f64) -> Result<f64> {
    let mut p = 1.0;
    for (v, _) in a.entries() {
        let b = local_bounds(net, v, a);
        if !GibTest::exact(eps).accepts(b) {
            return Err(Error::NotGib(net.name(v).to_string()));
        }
        p *= b.hi;
    }
    Ok(p)
}

/// Bracket on the probability of a delta-GIB assignment: the products of
/// the local minima and maxima.
pub fn delta_prob_bounds(net: &Network, a: &GAssignment, delta: f64) -> Result<Bounds> {
    let (mut lo, mut hi) = (1.0, 1.0);
    for (v, _) in a.entries() {
        let b = local_bounds(net, v, a);
        if b.lo < (1.0 - delta) * b.hi {
            return Err(Error::NotDeltaGib(net.name(v).to_string()));
        }
        lo *= b.lo;
        hi *= b.hi;
    }
    Ok(Bounds { lo, hi })
}

/// CPT rows consulted by a full local GIB check of `a`.
pub fn gib_check_row_scans(net: &Network, a: &GAssignment) -> usize {
    a.entries().map(|(v, _)| local_scan(net, v, a).rows).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    fn g(net: &Network, s: &str) -> GAssignment {
        GAssignment::parse(net, s).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn value_set_conditionals() {
        let vee = fixtures::vee();
        let c = vee.var("C").unwrap();
        let d = CompleteAssignment::parse(&vee, "A=t B=f").unwrap();
        let t = vee.value_set(c, "t").unwrap();
        assert!(close(cond_value_set_prob(&vee, c, &t, &d).unwrap(), 0.8));
        let d = CompleteAssignment::parse(&vee, "A=f B=t").unwrap();
        assert!(close(cond_value_set_prob(&vee, c, &vee.full_set(c), &d).unwrap(), 1.0));
        let short = CompleteAssignment::parse(&vee, "A=f").unwrap();
        assert_eq!(cond_value_set_prob(&vee, c, &t, &short).unwrap_err().kind(), "SpanMismatch");

        let tracks = fixtures::tracks();
        let m = tracks.var("method").unwrap();
        let some = tracks.value_set(m, "some-method").unwrap();
        let d = CompleteAssignment::parse(&tracks, "intend-to-go=t").unwrap();
        // 99 entries of 0.01
        let expected: f64 = (0..99).map(|_| 0.01).sum();
        assert!(close(cond_value_set_prob(&tracks, m, &some, &d).unwrap(), expected));
        assert!(close(expected, 0.99));
    }

    #[test]
    fn bounds_examples() {
        let vee = fixtures::vee();
        let c = vee.var("C").unwrap();
        assert_eq!(local_bounds(&vee, c, &g(&vee, "C=t")), Bounds { lo: 0.3, hi: 0.8 });
        assert_eq!(local_bounds(&vee, c, &g(&vee, "C=t A=t")), Bounds { lo: 0.8, hi: 0.8 });
        let chain = fixtures::chain();
        let b = chain.var("B").unwrap();
        assert_eq!(local_bounds(&chain, b, &g(&chain, "B=t")), Bounds { lo: 0.7, hi: 0.7 });
    }

    #[test]
    fn local_gib_examples() {
        let chain = fixtures::chain();
        let vee = fixtures::vee();
        let (b, c, a) = (chain.var("B").unwrap(), vee.var("C").unwrap(), vee.var("A").unwrap());
        assert!(gib_holds_local(&chain, &g(&chain, "B=t"), b, 0.0));
        assert!(!gib_holds_local(&vee, &g(&vee, "C=t"), c, 0.0));
        assert!(gib_holds_local(&vee, &g(&vee, "C=t A=t"), c, 0.0));
        assert!(gib_holds_local(&vee, &g(&vee, "A=t"), a, 0.0));
        assert!(gib_holds_local(&vee, &g(&vee, "C=t"), a, 0.0));
    }

    #[test]
    fn delta_examples() {
        let dep = fixtures::dep();
        let b = dep.var("B").unwrap();
        let a = g(&dep, "B=t");
        assert!(delta_gib_holds(&dep, &a, b, 0.8));
        assert!(!delta_gib_holds(&dep, &a, b, 0.5));
        assert!(delta_gib_holds(&dep, &a, b, 1.0));
        assert_eq!(delta_gib_holds(&dep, &a, b, 0.0), gib_holds_local(&dep, &a, b, 0.0));
    }

    #[test]
    fn product_probability_examples() {
        let vee = fixtures::vee();
        assert!(close(gib_probability(&vee, &g(&vee, "C=t A=t"), 0.0).unwrap(), 0.48));
        assert_eq!(gib_probability(&vee, &g(&vee, "C=t"), 0.0).unwrap_err().kind(), "NotGib");

        let tracks = fixtures::tracks();
        let m = g(&tracks, "at-tracks=T method=some-method intend-to-go=t");
        let p = gib_probability(&tracks, &m, DEFAULT_EPS).unwrap();
        assert!(close(p, 0.0495), "{p}");

        let chain = fixtures::chain();
        assert!(close(gib_probability(&chain, &g(&chain, "B=t"), 0.0).unwrap(), 0.7));
    }

    #[test]
    fn delta_bracket_examples() {
        let vee = fixtures::vee();
        let a = g(&vee, "C=t A=t");
        let b = delta_prob_bounds(&vee, &a, 0.0).unwrap();
        assert!(close(b.lo, b.hi) && close(b.hi, gib_probability(&vee, &a, 0.0).unwrap()));

        let dep = fixtures::dep();
        assert_eq!(delta_prob_bounds(&dep, &g(&dep, "B=t"), 0.8).unwrap(), Bounds { lo: 0.2, hi: 0.9 });
        assert_eq!(delta_prob_bounds(&dep, &g(&dep, "B=t"), 0.5).unwrap_err().kind(), "NotDeltaGib");
        let b = delta_prob_bounds(&dep, &g(&dep, "B=t A=t"), 0.0).unwrap();
        assert!(close(b.lo, 0.54) && close(b.hi, 0.54));
    }

    #[test]
    fn row_scans_follow_the_span_only() {
        let vee = fixtures::vee();
        // C scans 2 rows (A fixed), A is a root: 1 row
        assert_eq!(gib_check_row_scans(&vee, &g(&vee, "C=t A=t")), 3);
        assert_eq!(gib_check_row_scans(&vee, &g(&vee, "C=t")), 4);
        assert_eq!(gib_check_row_scans(&vee, &GAssignment::new()), 0);
    }
}
