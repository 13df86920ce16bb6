//! Exact probabilities by enumerating complete assignments.
//!
//! Nothing here consults the locality structure of the network beyond the
//! chain rule used to weigh a complete assignment, so these routines serve
//! as the ground truth the local computations are tested against.

use crate::assign::{GAssignment, ValueSet};
use crate::error::{Error, Result};
use crate::model::{Network, VarId};

pub const DEFAULT_JOINT_CAP: u128 = 10_000_000;
pub const DEFAULT_REFINEMENT_CAP: u128 = 1 << 20;
/// Relative tolerance for equality of exact conditionals.
pub const GLOBAL_TOLERANCE: f64 = 1e-12;

/// Enumeration-based inference over a network.
#[derive(Debug, Clone, Copy)]
pub struct Exact<'n> {
    net: &'n Network,
    joint_cap: u128,
    refinement_cap: u128,
}

/// Conditionals P(a(v) | B) for refinements B of `a` over the ancestors of v.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementScan {
    /// P(a(v) | a restricted to the ancestors), when defined.
    pub reference: Option<f64>,
    /// Extremes over every refinement with a defined conditional.
    pub min: f64,
    pub max: f64,
    /// Extremes over complete refinements only.
    pub complete_min: f64,
    pub complete_max: f64,
    /// Number of refinements evaluated with a defined conditional.
    pub defined: u64,
    /// Whether every product-set refinement was visited, or only complete ones.
    pub exhaustive: bool,
}

impl RefinementScan {
    pub fn is_vacuous(&self) -> bool {
        self.defined == 0
    }

    /// Every defined refinement agrees with the reference value.
    pub fn all_equal(&self, tol: f64) -> bool {
        match self.reference {
            None => true,
            Some(r) => rel_eq(self.min, r, tol) && rel_eq(self.max, r, tol),
        }
    }
}

pub fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

impl<'n> Exact<'n> {
    pub fn new(net: &'n Network) -> Self {
        Exact { net, joint_cap: DEFAULT_JOINT_CAP, refinement_cap: DEFAULT_REFINEMENT_CAP }
    }

    pub fn with_joint_cap(mut self, cap: u128) -> Self {
        self.joint_cap = cap;
        self
    }

    pub fn with_refinement_cap(mut self, cap: u128) -> Self {
        self.refinement_cap = cap;
        self
    }

    pub fn network(&self) -> &'n Network {
        self.net
    }

    fn check_cap(&self) -> Result<()> {
        let size = self.net.configuration_count();
        if size > self.joint_cap {
            return Err(Error::TooLarge { size, cap: self.joint_cap });
        }
        Ok(())
    }

    /// Visits every complete assignment included in `a` with non-zero chain
    /// rule weight. `values` is indexed by variable id.
    fn for_each_complete(&self, a: &GAssignment, mut visit: impl FnMut(&[usize], f64)) -> Result<()> {
        self.check_cap()?;
        let net = self.net;
        // parents before children
        let order: Vec<VarId> = net.search_order().iter().rev().copied().collect();
        let sets: Vec<Vec<usize>> = order.iter().map(|v| a.set_of(net, *v).iter().collect()).collect();
        let mut values = vec![0usize; net.len()];
        let mut scratch = Vec::new();

        #[allow(clippy::too_many_arguments)]
        fn walk(
            net: &Network,
            order: &[VarId],
            sets: &[Vec<usize>],
            depth: usize,
            weight: f64,
            values: &mut [usize],
            scratch: &mut Vec<usize>,
            visit: &mut dyn FnMut(&[usize], f64),
        ) {
            if depth == order.len() {
                visit(values, weight);
                return;
            }
            let v = order[depth];
            scratch.clear();
            scratch.extend(net.parents(v).iter().map(|p| values[p.idx()]));
            let cpt = net.cpt(v);
            let row = cpt.row(cpt.row_index(scratch));
            for &x in &sets[depth] {
                let w = weight * row[x];
                if w == 0.0 {
                    continue;
                }
                values[v.idx()] = x;
                walk(net, order, sets, depth + 1, w, values, scratch, visit);
            }
        }

        walk(net, &order, &sets, 0, 1.0, &mut values, &mut scratch, &mut visit);
        Ok(())
    }

    /// P(a): sum of chain-rule products over the complete assignments in `a`.
    pub fn joint(&self, a: &GAssignment) -> Result<f64> {
        let mut total = 0.0;
        self.for_each_complete(a, |_, w| total += w)?;
        Ok(total)
    }

    /// P(target | given) = P(target ⊓ given) / P(given).
    pub fn cond(&self, target: &GAssignment, given: &GAssignment) -> Result<f64> {
        let den = self.joint(given)?;
        if den == 0.0 {
            return Err(Error::UndefinedConditional);
        }
        let num = match target.meet(given, self.net) {
            Ok(m) => self.joint(&m)?,
            Err(Error::EmptyMeet(_)) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(num / den)
    }

    /// Evaluates P(a(v) | B) for the refinements B of `a` restricted to the
    /// ancestors of `v`, skipping those of probability zero.
    ///
    /// Every product of non-empty subsets is visited while their number stays
    /// within the refinement cap. Past the cap only complete refinements are
    /// visited; a ratio of sums always lies between the smallest and largest
    /// ratio of its terms, so the extremes are unchanged.
    pub fn refinement_scan(&self, a: &GAssignment, v: VarId) -> Result<RefinementScan> {
        let net = self.net;
        let anc = net.ancestors(v);
        let target = a.set_of(net, v);
        let sets: Vec<ValueSet> = anc.iter().map(|w| a.set_of(net, *w)).collect();
        let dims: Vec<usize> = sets.iter().map(ValueSet::len).collect();
        let cells: usize = dims.iter().product();

        // position of each value inside its ancestor's set
        let slot: Vec<Vec<usize>> = sets
            .iter()
            .map(|s| {
                let mut m = vec![usize::MAX; s.domain_size()];
                for (k, x) in s.iter().enumerate() {
                    m[x] = k;
                }
                m
            })
            .collect();

        let given = a.restrict(anc.iter().copied());
        let (mut p, mut q) = (vec![0.0; cells], vec![0.0; cells]);
        self.for_each_complete(&given, |values, w| {
            let cell = anc.iter().zip(&slot).zip(&dims).fold(0, |acc, ((w, m), d)| acc * d + m[values[w.idx()]]);
            p[cell] += w;
            if target.contains(values[v.idx()]) {
                q[cell] += w;
            }
        })?;

        let p_tot: f64 = p.iter().sum();
        let q_tot: f64 = q.iter().sum();
        let reference = (p_tot > 0.0).then(|| q_tot / p_tot);

        let mut scan = RefinementScan {
            reference,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            complete_min: f64::INFINITY,
            complete_max: f64::NEG_INFINITY,
            defined: 0,
            exhaustive: false,
        };
        for (pc, qc) in p.iter().zip(&q) {
            if *pc > 0.0 {
                let r = qc / pc;
                scan.complete_min = scan.complete_min.min(r);
                scan.complete_max = scan.complete_max.max(r);
            }
        }

        let count = sets.iter().fold(1u128, |acc, s| acc.saturating_mul(s.subset_count()));
        if count <= self.refinement_cap && dims.iter().all(|d| *d <= 24) {
            scan.exhaustive = true;
            let mut visit = |pb: f64, qb: f64| {
                if pb > 0.0 {
                    let r = qb / pb;
                    scan.min = scan.min.min(r);
                    scan.max = scan.max.max(r);
                    scan.defined += 1;
                }
            };
            contract(&dims, &p, &q, &mut visit);
        } else {
            scan.min = scan.complete_min;
            scan.max = scan.complete_max;
            scan.defined = p.iter().filter(|x| **x > 0.0).count() as u64;
        }
        Ok(scan)
    }

    /// Definition-level GIB check at `v`: every refinement over the ancestors
    /// yields the same conditional for a(v).
    pub fn gib_holds_global(&self, a: &GAssignment, v: VarId) -> Result<bool> {
        if !a.is_properly_assigned(v) {
            return Ok(true);
        }
        Ok(self.refinement_scan(a, v)?.all_equal(GLOBAL_TOLERANCE))
    }

    /// Definition-level delta-GIB check: min over refinements is at least
    /// (1 − delta) times the max.
    pub fn delta_gib_holds_global(&self, a: &GAssignment, v: VarId, delta: f64) -> Result<bool> {
        if !a.is_properly_assigned(v) {
            return Ok(true);
        }
        let s = self.refinement_scan(a, v)?;
        Ok(s.is_vacuous() || s.min >= (1.0 - delta) * s.max)
    }
}

/// Sums `p` and `q` over every product of non-empty index subsets, one axis
/// at a time, and hands each pair of totals to `visit`.
fn contract(dims: &[usize], p: &[f64], q: &[f64], visit: &mut dyn FnMut(f64, f64)) {
    let Some((&d0, rest_dims)) = dims.split_first() else {
        visit(p[0], q[0]);
        return;
    };
    let rest = p.len() / d0;
    let (mut p2, mut q2) = (vec![0.0; rest], vec![0.0; rest]);
    for mask in 1u32..(1 << d0) {
        p2.iter_mut().for_each(|x| *x = 0.0);
        q2.iter_mut().for_each(|x| *x = 0.0);
        for i in (0..d0).filter(|i| mask & (1 << i) != 0) {
            for j in 0..rest {
                p2[j] += p[i * rest + j];
                q2[j] += q[i * rest + j];
            }
        }
        contract(rest_dims, &p2, &q2, visit);
    }
}
