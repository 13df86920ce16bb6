//! Seeded random networks and random queries over them.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assign::{CompleteAssignment, GAssignment, ValueSet};
use crate::error::{Error, Result};
use crate::model::{validate_network, Network, RawConcept, RawNetwork, RawRow, RawVariable, StrictMap, VarId};
use crate::search::Evidence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomNetSpec {
    pub node_count: usize,
    pub max_parents: usize,
    pub domain_sizes: RangeInclusive<usize>,
    /// Probability that a variable with at least three values gets a concept.
    pub concept_density: f64,
    /// Probability that a CPT gets an independence planted into it.
    pub independence_plant_rate: f64,
    /// Allow zero CPT entries (off for theorem runs, which assume positivity).
    pub allow_zeros: bool,
    pub seed: u64,
}

impl Default for RandomNetSpec {
    fn default() -> Self {
        RandomNetSpec {
            node_count: 6,
            max_parents: 2,
            domain_sizes: 2..=3,
            concept_density: 0.5,
            independence_plant_rate: 0.6,
            allow_zeros: false,
            seed: 0,
        }
    }
}

impl RandomNetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.node_count == 0 {
            return bad("node count must be at least 1");
        }
        if self.max_parents >= self.node_count && self.node_count > 1 {
            return bad("max parents must be below the node count");
        }
        if *self.domain_sizes.start() < 2 || self.domain_sizes.is_empty() || *self.domain_sizes.end() > 26 {
            return bad("domain sizes must lie within 2..=26");
        }
        for (name, x) in [("concept density", self.concept_density), ("plant rate", self.independence_plant_rate)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> RandomNetSpec {
        RandomNetSpec { seed, ..self.clone() }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Builds the network these parameters determine.
    pub fn generate(&self) -> Result<Network> {
        self.validate()?;
        let mut rng = self.rng();
        Ok(self.generate_with(&mut rng))
    }

    /// Builds a network drawing from `rng`, so that the same stream can go on
    /// to sample queries.
    pub fn generate_with(&self, rng: &mut impl Rng) -> Network {
        let n = self.node_count;
        let mut vars: Vec<RawVariable> = Vec::with_capacity(n);
        let mut domains: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            let d = rng.gen_range(self.domain_sizes.clone());
            let values: Vec<String> = (0..d).map(|k| ((b'a' + k as u8) as char).to_string()).collect();
            let k = rng.gen_range(0..=self.max_parents.min(i));
            let mut parents: Vec<usize> = rand::seq::index::sample(rng, i.max(1), k).into_vec();
            parents.sort_unstable();

            let mut concepts = Vec::new();
            if d >= 3 && rng.gen_bool(self.concept_density) {
                let size = rng.gen_range(2..d);
                let mut members: Vec<usize> = rand::seq::index::sample(rng, d, size).into_vec();
                members.sort_unstable();
                concepts.push(members);
            }

            let parent_dims: Vec<usize> = parents.iter().map(|p| domains[*p]).collect();
            let mut rows = random_rows(rng, &parent_dims, d, self.allow_zeros);
            if rng.gen_bool(self.independence_plant_rate) {
                plant(rng, &mut rows, &parent_dims, concepts.first().map(Vec::as_slice));
            }

            vars.push(RawVariable {
                name: format!("x{i}"),
                parents: parents.iter().map(|p| format!("x{p}")).collect(),
                concepts: concepts
                    .iter()
                    .enumerate()
                    .map(|(c, m)| RawConcept { name: format!("k{c}"), values: m.iter().map(|x| values[*x].clone()).collect() })
                    .collect(),
                cpt: raw_rows(&rows, &parents, &parent_dims, &vars, &values),
                values,
            });
            domains.push(d);
        }
        validate_network(&RawNetwork { variables: vars }).expect("generated networks are valid")
    }
}

fn random_rows(rng: &mut impl Rng, parent_dims: &[usize], d: usize, allow_zeros: bool) -> Vec<Vec<f64>> {
    let count: usize = parent_dims.iter().product();
    (0..count)
        .map(|_| {
            let mut row: Vec<f64> = (0..d)
                .map(|_| if allow_zeros && rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.05..1.0) })
                .collect();
            if row.iter().all(|x| *x == 0.0) {
                row[rng.gen_range(0..d)] = 1.0;
            }
            normalize(&mut row);
            row
        })
        .collect()
}

fn normalize(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= total);
}

/// Makes the CPT locally constant somewhere: either rows agree across a
/// block of one parent's values, or a concept's mass is the same in every
/// row.
fn plant(rng: &mut impl Rng, rows: &mut [Vec<f64>], parent_dims: &[usize], concept: Option<&[usize]>) {
    if parent_dims.is_empty() {
        return;
    }
    if let Some(members) = concept.filter(|_| rng.gen_bool(0.4)) {
        let mass = rng.gen_range(0.1..0.9);
        for row in rows.iter_mut() {
            let inside: f64 = members.iter().map(|x| row[*x]).sum();
            let outside = 1.0 - inside;
            for (x, p) in row.iter_mut().enumerate() {
                *p = if members.contains(&x) { *p * mass / inside } else { *p * (1.0 - mass) / outside };
            }
        }
        return;
    }
    let axis = rng.gen_range(0..parent_dims.len());
    let dim = parent_dims[axis];
    let size = rng.gen_range(2..=dim);
    let mut block: Vec<usize> = rand::seq::index::sample(rng, dim, size).into_vec();
    block.sort_unstable();
    let stride: usize = parent_dims[axis + 1..].iter().product();
    for r in 0..rows.len() {
        let x = (r / stride) % dim;
        if x == block[0] {
            for &y in &block[1..] {
                let target = r + (y - x) * stride;
                rows[target] = rows[r].clone();
            }
        }
    }
}

fn raw_rows(
    rows: &[Vec<f64>],
    parents: &[usize],
    parent_dims: &[usize],
    vars: &[RawVariable],
    values: &[String],
) -> Vec<RawRow> {
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let mut rest = r;
            let mut given = vec![(String::new(), String::new()); parents.len()];
            for k in (0..parents.len()).rev() {
                let x = rest % parent_dims[k];
                rest /= parent_dims[k];
                let pv = &vars[parents[k]];
                given[k] = (pv.name.clone(), pv.values[x].clone());
            }
            RawRow { given: StrictMap(given), p: StrictMap(values.iter().cloned().zip(row.iter().copied()).collect()) }
        })
        .collect()
}

/// A random non-empty subset of `v`'s domain.
pub fn random_subset(rng: &mut impl Rng, net: &Network, v: VarId) -> ValueSet {
    let d = net.domain_size(v);
    loop {
        let members: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.5)).collect();
        if let Some(s) = ValueSet::from_indices(d, members) {
            return s;
        }
    }
}

/// A random non-empty strict subset of `v`'s domain.
pub fn random_proper_subset(rng: &mut impl Rng, net: &Network, v: VarId) -> ValueSet {
    loop {
        let s = random_subset(rng, net, v);
        if !s.is_full() {
            return s;
        }
    }
}

/// A random G-assignment with arbitrary (not necessarily permissible) sets,
/// each variable left unassigned with probability `p_full`.
pub fn random_gassignment(rng: &mut impl Rng, net: &Network, p_full: f64) -> GAssignment {
    let mut a = GAssignment::new();
    for v in net.vars() {
        if !rng.gen_bool(p_full) {
            a.insert(v, random_subset(rng, net, v));
        }
    }
    a
}

/// A random permissible set for `v` (possibly the full domain).
pub fn random_permissible(rng: &mut impl Rng, net: &Network, v: VarId) -> ValueSet {
    net.permissible_sets(v).choose(rng).expect("families are never empty").clone()
}

/// A random refinement of `a` over the variables in `vars`.
pub fn random_refinement(rng: &mut impl Rng, net: &Network, a: &GAssignment, vars: &[VarId]) -> GAssignment {
    let mut b = a.clone();
    for &w in vars {
        let base = a.set_of(net, w);
        let members: Vec<usize> = base.iter().collect();
        let keep: Vec<usize> = members.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        let keep = if keep.is_empty() { vec![*members.choose(rng).expect("sets are non-empty")] } else { keep };
        b.insert(w, ValueSet::from_indices(base.domain_size(), keep).expect("non-empty"));
    }
    b
}

/// One or two evidence variables with random values, biased towards
/// childless variables.
pub fn random_evidence(rng: &mut impl Rng, net: &Network) -> Evidence {
    let leaves: Vec<VarId> = net.vars().filter(|v| net.children(*v).is_empty()).collect();
    let mut values = CompleteAssignment::new();
    let first = *leaves.choose(rng).expect("a DAG has a childless node");
    values.set(first, rng.gen_range(0..net.domain_size(first)));
    if net.len() > 1 && rng.gen_bool(0.4) {
        let v = VarId(rng.gen_range(0..net.len() as u32));
        if v != first {
            values.set(v, rng.gen_range(0..net.domain_size(v)));
        }
    }
    Evidence::from_assignment(values)
}
