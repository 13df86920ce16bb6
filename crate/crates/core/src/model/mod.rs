//! Discrete belief networks: variables, CPTs, permissible disjunctions and
//! the child-before-ancestor search index.

mod format;
pub mod fixtures;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

pub use format::{RawConcept, RawNetwork, RawRow, RawVariable, StrictMap};

use crate::assign::ValueSet;
use crate::error::{Error, Result};

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Dense variable identifier; the position of the variable in declaration
/// order (zero based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    pub name: String,
    pub values: ValueSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
    pub parents: Vec<VarId>,
    pub concepts: Vec<Concept>,
}

impl Variable {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }
}

/// Conditional probability table stored row-major: one row per complete
/// parent assignment, the first declared parent varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    width: usize,
    strides: Vec<usize>,
    probs: Vec<f64>,
}

impl Cpt {
    pub fn rows(&self) -> usize {
        self.probs.len() / self.width
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.probs[r * self.width..(r + 1) * self.width]
    }

    /// Row index of a complete parent assignment given as value indices in
    /// declared parent order.
    pub fn row_index(&self, parent_values: &[usize]) -> usize {
        debug_assert_eq!(parent_values.len(), self.strides.len());
        parent_values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    /// Probability mass the row puts on `set`.
    pub fn mass(&self, r: usize, set: &ValueSet) -> f64 {
        let row = self.row(r);
        set.iter().map(|i| row[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationWarning {
    /// Some CPT entry is zero, so the positivity assumption behind the
    /// locality results does not hold everywhere.
    ZeroProbabilities { variables: Vec<String> },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::ZeroProbabilities { variables } => write!(
                f,
                "zero probabilities in CPTs of {}; conditionals on zero-probability events are undefined",
                variables.join(", ")
            ),
        }
    }
}

/// A validated, immutable belief network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    by_name: HashMap<String, VarId>,
    /// search_order[k] has index k + 1
    search_order: Vec<VarId>,
    index: Vec<usize>,
    ancestors: Vec<Vec<VarId>>,
    children: Vec<Vec<VarId>>,
    permissible: Vec<Vec<ValueSet>>,
    positive: bool,
    warnings: Vec<ValidationWarning>,
}

impl Network {
    pub fn from_json(text: &str) -> Result<Network> {
        validate_network(&RawNetwork::from_json(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Network> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Network::from_json(&text)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn vars(&self) -> impl ExactSizeIterator<Item = VarId> {
        (0..self.variables.len() as u32).map(VarId)
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.idx()]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.variables[v.idx()].name
    }

    pub fn domain_size(&self, v: VarId) -> usize {
        self.variables[v.idx()].values.len()
    }

    pub fn full_set(&self, v: VarId) -> ValueSet {
        ValueSet::full(self.domain_size(v))
    }

    pub fn var(&self, name: &str) -> Result<VarId> {
        self.by_name.get(name).copied().ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn value_index(&self, v: VarId, label: &str) -> Result<usize> {
        self.variable(v).values.iter().position(|x| x == label).ok_or_else(|| Error::UnknownValue {
            variable: self.name(v).to_string(),
            value: label.to_string(),
        })
    }

    /// Resolves a value label or a concept name to a value set.
    pub fn value_set(&self, v: VarId, label: &str) -> Result<ValueSet> {
        if let Some(c) = self.variable(v).concepts.iter().find(|c| c.name == label) {
            return Ok(c.values.clone());
        }
        Ok(ValueSet::singleton(self.domain_size(v), self.value_index(v, label)?))
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.variables[v.idx()].parents
    }

    pub fn children(&self, v: VarId) -> &[VarId] {
        &self.children[v.idx()]
    }

    /// Transitive closure of the parent relation, in id order.
    pub fn ancestors(&self, v: VarId) -> &[VarId] {
        &self.ancestors[v.idx()]
    }

    /// The permissible disjunctions M_v: singletons, the declared concepts and
    /// the full domain, sorted in value-set order.
    pub fn permissible_sets(&self, v: VarId) -> &[ValueSet] {
        &self.permissible[v.idx()]
    }

    pub fn is_permissible(&self, v: VarId, set: &ValueSet) -> bool {
        self.permissible[v.idx()].binary_search(set).is_ok()
    }

    pub fn cpt(&self, v: VarId) -> &Cpt {
        &self.cpts[v.idx()]
    }

    /// One-based search index; smaller than the index of every ancestor.
    pub fn index_of(&self, v: VarId) -> usize {
        self.index[v.idx()]
    }

    /// Variables sorted by search index.
    pub fn search_order(&self) -> &[VarId] {
        &self.search_order
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn warnings(&self) -> &[ValidationWarning] {
        &self.warnings
    }

    /// Product of all domain sizes (saturating).
    pub fn configuration_count(&self) -> u128 {
        self.variables.iter().fold(1u128, |acc, v| acc.saturating_mul(v.domain_size() as u128))
    }

    /// Concept name whose value set equals `set`, if any.
    pub fn concept_name(&self, v: VarId, set: &ValueSet) -> Option<&str> {
        self.variable(v).concepts.iter().find(|c| &c.values == set).map(|c| c.name.as_str())
    }

    /// Rebuilds the raw description of this network.
    pub fn to_raw(&self) -> RawNetwork {
        let variables = self
            .vars()
            .map(|v| {
                let var = self.variable(v);
                let parents: Vec<String> = var.parents.iter().map(|p| self.name(*p).to_string()).collect();
                let concepts = var
                    .concepts
                    .iter()
                    .map(|c| RawConcept {
                        name: c.name.clone(),
                        values: c.values.iter().map(|i| var.values[i].clone()).collect(),
                    })
                    .collect();
                let cpt = self.cpt(v);
                let cpt = parent_rows(self, v)
                    .map(|(r, pv)| RawRow {
                        given: var
                            .parents
                            .iter()
                            .zip(&pv)
                            .map(|(p, &i)| (self.name(*p).to_string(), self.variable(*p).values[i].clone()))
                            .collect(),
                        p: var.values.iter().cloned().zip(cpt.row(r).iter().copied()).collect(),
                    })
                    .collect();
                RawVariable { name: var.name.clone(), values: var.values.clone(), parents, concepts, cpt }
            })
            .collect();
        RawNetwork { variables }
    }

    /// The same network with every concept removed, so that the permissible
    /// sets are the singletons and the full domain.
    pub fn without_concepts(&self) -> Network {
        let mut raw = self.to_raw();
        for v in &mut raw.variables {
            v.concepts.clear();
        }
        validate_network(&raw).expect("stripping concepts keeps a network valid")
    }
}

/// Iterates over `(row index, parent value indices)` for every complete
/// assignment to the parents of `v`, in row order.
pub fn parent_rows(net: &Network, v: VarId) -> impl Iterator<Item = (usize, Vec<usize>)> + '_ {
    let dims: Vec<usize> = net.parents(v).iter().map(|p| net.domain_size(*p)).collect();
    let total: usize = dims.iter().product();
    (0..total).map(move |r| {
        let mut rest = r;
        let mut values = vec![0; dims.len()];
        for (slot, d) in values.iter_mut().zip(&dims).rev() {
            *slot = rest % d;
            rest /= d;
        }
        (r, values)
    })
}

fn bad_dist(var: &str, reason: impl Into<String>) -> Error {
    Error::BadDistribution { variable: var.to_string(), reason: reason.into() }
}

/// Checks a raw description and builds the immutable [`Network`].
pub fn validate_network(raw: &RawNetwork) -> Result<Network> {
    let n = raw.variables.len();
    if n == 0 {
        return Err(Error::BadVariable { variable: String::new(), reason: "network has no variables".into() });
    }
    if n > u32::MAX as usize {
        return Err(Error::BadVariable { variable: String::new(), reason: "too many variables".into() });
    }

    let mut by_name = HashMap::with_capacity(n);
    for (i, v) in raw.variables.iter().enumerate() {
        if v.name.is_empty() {
            return Err(Error::BadVariable { variable: v.name.clone(), reason: "empty name".into() });
        }
        if by_name.insert(v.name.clone(), VarId(i as u32)).is_some() {
            return Err(Error::DuplicateName(v.name.clone()));
        }
    }

    let mut variables = Vec::with_capacity(n);
    for rv in &raw.variables {
        variables.push(check_variable(rv, &by_name)?);
    }

    let mut children = vec![Vec::new(); n];
    for (i, v) in variables.iter().enumerate() {
        for p in &v.parents {
            children[p.idx()].push(VarId(i as u32));
        }
    }
    let search_order = child_first_order(&variables, &children)?;
    let mut index = vec![0; n];
    for (k, v) in search_order.iter().enumerate() {
        index[v.idx()] = k + 1;
    }
    let ancestors = ancestor_closure(&variables, &search_order);

    let mut cpts = Vec::with_capacity(n);
    let mut zero_vars = Vec::new();
    for (rv, var) in raw.variables.iter().zip(&variables) {
        let cpt = build_cpt(rv, var, &variables)?;
        if cpt.probs.contains(&0.0) {
            zero_vars.push(var.name.clone());
        }
        cpts.push(cpt);
    }

    let permissible = variables
        .iter()
        .map(|v| {
            let d = v.domain_size();
            let mut sets: Vec<ValueSet> = (0..d).map(|i| ValueSet::singleton(d, i)).collect();
            sets.extend(v.concepts.iter().map(|c| c.values.clone()));
            sets.push(ValueSet::full(d));
            sets.sort();
            sets.dedup();
            sets
        })
        .collect();

    let positive = zero_vars.is_empty();
    let mut warnings = Vec::new();
    if !positive {
        warnings.push(ValidationWarning::ZeroProbabilities { variables: zero_vars });
    }

    Ok(Network { variables, cpts, by_name, search_order, index, ancestors, children, permissible, positive, warnings })
}

fn check_variable(rv: &RawVariable, by_name: &HashMap<String, VarId>) -> Result<Variable> {
    let name = &rv.name;
    if rv.values.len() < 2 {
        return Err(Error::BadVariable { variable: name.clone(), reason: "domain needs at least two values".into() });
    }
    let mut labels = HashSet::new();
    for val in &rv.values {
        if val.is_empty() || val.contains(['|', ',', '=']) || val.chars().any(char::is_whitespace) {
            return Err(Error::BadVariable { variable: name.clone(), reason: format!("invalid value label `{val}`") });
        }
        if !labels.insert(val.as_str()) {
            return Err(Error::DuplicateName(format!("{name}.{val}")));
        }
    }

    let mut parents = Vec::with_capacity(rv.parents.len());
    for p in &rv.parents {
        let id = *by_name
            .get(p)
            .ok_or_else(|| Error::UnknownParent { variable: name.clone(), parent: p.clone() })?;
        if p == name {
            return Err(Error::CyclicGraph(name.clone()));
        }
        if parents.contains(&id) {
            return Err(Error::DuplicateName(format!("{name} parent {p}")));
        }
        parents.push(id);
    }

    let d = rv.values.len();
    let mut concepts: Vec<Concept> = Vec::with_capacity(rv.concepts.len());
    for rc in &rv.concepts {
        if labels.contains(rc.name.as_str()) || concepts.iter().any(|c| c.name == rc.name) {
            return Err(Error::DuplicateName(format!("{name}.{}", rc.name)));
        }
        if rc.name.is_empty() || rc.name.contains(['|', ',', '=']) {
            return Err(Error::BadVariable { variable: name.clone(), reason: format!("invalid concept name `{}`", rc.name) });
        }
        let mut idx = Vec::with_capacity(rc.values.len());
        for val in &rc.values {
            let i = rv
                .values
                .iter()
                .position(|x| x == val)
                .ok_or_else(|| Error::UnknownValue { variable: name.clone(), value: val.clone() })?;
            if idx.contains(&i) {
                return Err(Error::DuplicateName(format!("{name}.{}.{val}", rc.name)));
            }
            idx.push(i);
        }
        let values = ValueSet::from_indices(d, idx).ok_or_else(|| Error::BadVariable {
            variable: name.clone(),
            reason: format!("concept `{}` is empty", rc.name),
        })?;
        if values.is_full() {
            return Err(Error::BadVariable {
                variable: name.clone(),
                reason: format!("concept `{}` covers the whole domain", rc.name),
            });
        }
        for other in &concepts {
            let nested = values.is_subset(&other.values) || other.values.is_subset(&values);
            if !nested && !values.is_disjoint(&other.values) {
                return Err(Error::NonLaminarConcepts {
                    variable: name.clone(),
                    first: other.name.clone(),
                    second: rc.name.clone(),
                });
            }
        }
        concepts.push(Concept { name: rc.name.clone(), values });
    }

    Ok(Variable { name: name.clone(), values: rv.values.clone(), parents, concepts })
}

/// Reverse topological order: a variable is placed once all of its children
/// are placed; ties go to the earliest declared variable.
fn child_first_order(variables: &[Variable], children: &[Vec<VarId>]) -> Result<Vec<VarId>> {
    let n = variables.len();
    let mut pending: Vec<usize> = children.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<u32>> =
        (0..n).filter(|&i| pending[i] == 0).map(|i| Reverse(i as u32)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(VarId(i));
        for p in &variables[i as usize].parents {
            pending[p.idx()] -= 1;
            if pending[p.idx()] == 0 {
                ready.push(Reverse(p.0));
            }
        }
    }
    if order.len() < n {
        let stuck: Vec<&str> = (0..n).filter(|&i| pending[i] > 0).map(|i| variables[i].name.as_str()).collect();
        return Err(Error::CyclicGraph(stuck.join(", ")));
    }
    Ok(order)
}

fn ancestor_closure(variables: &[Variable], search_order: &[VarId]) -> Vec<Vec<VarId>> {
    let n = variables.len();
    let mut sets: Vec<Vec<bool>> = vec![Vec::new(); n];
    // Parents come later in the search order, so walk it backwards.
    for v in search_order.iter().rev() {
        let mut mark = vec![false; n];
        for p in &variables[v.idx()].parents {
            mark[p.idx()] = true;
            for (m, a) in mark.iter_mut().zip(&sets[p.idx()]) {
                *m |= *a;
            }
        }
        sets[v.idx()] = mark;
    }
    sets.into_iter()
        .map(|mark| mark.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| VarId(i as u32)).collect())
        .collect()
}

fn build_cpt(rv: &RawVariable, var: &Variable, variables: &[Variable]) -> Result<Cpt> {
    let name = &var.name;
    let width = var.domain_size();
    let dims: Vec<usize> = var.parents.iter().map(|p| variables[p.idx()].domain_size()).collect();
    let mut strides = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let rows: usize = dims.iter().product();
    if rv.cpt.len() != rows {
        return Err(bad_dist(name, format!("expected {rows} rows, found {}", rv.cpt.len())));
    }

    let mut probs = vec![f64::NAN; rows * width];
    let mut seen = vec![false; rows];
    for row in &rv.cpt {
        if row.given.len() != var.parents.len() {
            return Err(bad_dist(name, "row must give exactly one value per parent"));
        }
        let mut r = 0;
        for (k, p) in var.parents.iter().enumerate() {
            let pvar = &variables[p.idx()];
            let label = row
                .given
                .get(&pvar.name)
                .ok_or_else(|| bad_dist(name, format!("row does not give parent `{}`", pvar.name)))?;
            let vi = pvar
                .values
                .iter()
                .position(|x| x == label)
                .ok_or_else(|| Error::UnknownValue { variable: pvar.name.clone(), value: label.clone() })?;
            r += vi * strides[k];
        }
        if std::mem::replace(&mut seen[r], true) {
            return Err(bad_dist(name, "repeated parent assignment"));
        }
        if row.p.len() != width {
            return Err(bad_dist(name, "row must list a probability for every value"));
        }
        let mut sum = 0.0;
        for (label, &p) in row.p.iter() {
            let vi = var
                .values
                .iter()
                .position(|x| x == label)
                .ok_or_else(|| Error::UnknownValue { variable: name.clone(), value: label.to_string() })?;
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(bad_dist(name, format!("probability {p} outside [0, 1]")));
            }
            probs[r * width + vi] = p;
            sum += p;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(bad_dist(name, format!("row sums to {sum}")));
        }
    }
    Ok(Cpt { width, strides, probs })
}
