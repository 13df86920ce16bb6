//! Generalized (disjunctive) assignments and their refinement order.
//!
//! A [`GAssignment`] maps variables to non-empty value sets. Variables that
//! are not mentioned are implicitly assigned their full domain, and an entry
//! whose set is the full domain is never stored, so equality and hashing are
//! on the implicit total map.

mod value_set;

use std::collections::BTreeMap;
use std::fmt;

pub use value_set::ValueSet;

use crate::error::{Error, Result};
use crate::model::{Network, VarId};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GAssignment {
    entries: BTreeMap<VarId, ValueSet>,
}

impl GAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `v` to `set`; a full-domain set removes the entry.
    pub fn insert(&mut self, v: VarId, set: ValueSet) {
        if set.is_full() {
            self.entries.remove(&v);
        } else {
            self.entries.insert(v, set);
        }
    }

    pub fn with(mut self, v: VarId, set: ValueSet) -> Self {
        self.insert(v, set);
        self
    }

    /// The stored (proper) set for `v`, or `None` when `v` is unrestricted.
    pub fn get(&self, v: VarId) -> Option<&ValueSet> {
        self.entries.get(&v)
    }

    /// The set assigned to `v`, full domain included.
    pub fn set_of(&self, net: &Network, v: VarId) -> ValueSet {
        self.entries.get(&v).cloned().unwrap_or_else(|| net.full_set(v))
    }

    /// Proper entries in variable order.
    pub fn entries(&self) -> impl Iterator<Item = (VarId, &ValueSet)> {
        self.entries.iter().map(|(v, s)| (*v, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Variables assigned a strict subset of their domain.
    pub fn proper_span(&self) -> Vec<VarId> {
        self.entries.keys().copied().collect()
    }

    pub fn is_properly_assigned(&self, v: VarId) -> bool {
        self.entries.contains_key(&v)
    }

    /// `self ⊆ other`: every set of `self` is contained in the matching set
    /// of `other`.
    pub fn refines(&self, other: &GAssignment) -> bool {
        other.entries.iter().all(|(v, theirs)| match self.entries.get(v) {
            Some(ours) => ours.is_subset(theirs),
            None => false,
        })
    }

    pub fn strictly_refines(&self, other: &GAssignment) -> bool {
        self != other && self.refines(other)
    }

    /// Greatest common refinement: per-variable intersection.
    pub fn meet(&self, other: &GAssignment, net: &Network) -> Result<GAssignment> {
        let mut out = self.clone();
        for (v, theirs) in &other.entries {
            let merged = match self.entries.get(v) {
                Some(ours) => ours.intersect(theirs).ok_or_else(|| Error::EmptyMeet(net.name(*v).to_string()))?,
                None => theirs.clone(),
            };
            out.entries.insert(*v, merged);
        }
        Ok(out)
    }

    /// Drops full-domain entries. Storage is already compact, so this is the
    /// identity on the represented event.
    pub fn compact(&self) -> GAssignment {
        self.clone()
    }

    /// Keeps only the entries for variables in `vars`.
    pub fn restrict<I: IntoIterator<Item = VarId>>(&self, vars: I) -> GAssignment {
        let mut out = GAssignment::new();
        for v in vars {
            if let Some(s) = self.entries.get(&v) {
                out.entries.insert(v, s.clone());
            }
        }
        out
    }

    /// Parses entries of the form `name=val1|val2`, separated by commas or
    /// whitespace. Each alternative is a value label or a concept name.
    pub fn parse(net: &Network, text: &str) -> Result<GAssignment> {
        let mut out = GAssignment::new();
        for item in text.split([',', ' ', '\t', '\n']).filter(|s| !s.is_empty()) {
            let (name, alts) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected name=value, got `{item}`")))?;
            let v = net.var(name)?;
            let mut set: Option<ValueSet> = None;
            for alt in alts.split('|') {
                let s = net.value_set(v, alt)?;
                set = Some(match set {
                    None => s,
                    Some(acc) => union(&acc, &s),
                });
            }
            let set = set.ok_or_else(|| Error::InvalidArgument(format!("no values for `{name}`")))?;
            if out.entries.contains_key(&v) {
                return Err(Error::InvalidArgument(format!("`{name}` assigned twice")));
            }
            out.insert(v, set);
        }
        Ok(out)
    }

    pub fn display<'a>(&'a self, net: &'a Network) -> DisplayAssignment<'a> {
        DisplayAssignment { assignment: self, net }
    }

    /// Canonical single-line rendering, entries in declaration order.
    pub fn render(&self, net: &Network) -> String {
        self.display(net).to_string()
    }
}

fn union(a: &ValueSet, b: &ValueSet) -> ValueSet {
    ValueSet::from_indices(a.domain_size(), a.iter().chain(b.iter())).expect("union of non-empty sets")
}

/// `name=val1|val2`, or `name=concept` when the set is exactly a concept.
pub fn render_entry(net: &Network, v: VarId, set: &ValueSet) -> String {
    let var = net.variable(v);
    match net.concept_name(v, set) {
        Some(c) => format!("{}={c}", var.name),
        None => {
            let labels: Vec<&str> = set.iter().map(|i| var.values[i].as_str()).collect();
            format!("{}={}", var.name, labels.join("|"))
        }
    }
}

pub struct DisplayAssignment<'a> {
    assignment: &'a GAssignment,
    net: &'a Network,
}

impl fmt::Display for DisplayAssignment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, s) in self.assignment.entries() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            f.write_str(&render_entry(self.net, v, s))?;
        }
        if first {
            f.write_str("{}")?;
        }
        Ok(())
    }
}

/// One value per variable of some span.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompleteAssignment {
    values: BTreeMap<VarId, usize>,
}

impl CompleteAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (VarId, usize)>>(pairs: I) -> Self {
        CompleteAssignment { values: pairs.into_iter().collect() }
    }

    /// Parses `name=value` pairs separated by commas or whitespace.
    pub fn parse(net: &Network, text: &str) -> Result<CompleteAssignment> {
        let mut out = CompleteAssignment::new();
        for item in text.split([',', ' ']).filter(|s| !s.is_empty()) {
            let (name, val) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected name=value, got `{item}`")))?;
            let v = net.var(name)?;
            let i = net.value_index(v, val)?;
            if out.values.insert(v, i).is_some() {
                return Err(Error::InvalidArgument(format!("`{name}` assigned twice")));
            }
        }
        Ok(out)
    }

    pub fn set(&mut self, v: VarId, value: usize) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: VarId) -> Option<usize> {
        self.values.get(&v).copied()
    }

    pub fn span(&self) -> impl Iterator<Item = VarId> + '_ {
        self.values.keys().copied()
    }

    /// `self ∈ a`: picks a member of `a`'s set at every properly assigned
    /// variable of `a`.
    pub fn is_included_in(&self, a: &GAssignment, net: &Network) -> Result<bool> {
        for (v, set) in a.entries() {
            let value = self.get(v).ok_or_else(|| Error::SpanMismatch(net.name(v).to_string()))?;
            if !set.contains(value) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The all-singleton G-assignment with the same event.
    pub fn to_gassignment(&self, net: &Network) -> GAssignment {
        let mut g = GAssignment::new();
        for (v, &i) in &self.values {
            g.insert(*v, ValueSet::singleton(net.domain_size(*v), i));
        }
        g
    }
}
