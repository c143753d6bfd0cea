//! Sparse multilinear polynomials over binary variables.
//!
//! A [`PseudoBooleanPolynomial`] is a map from sorted variable sets to
//! coefficients. Because every variable is binary, `x * x = x`, so a monomial
//! is fully described by the set of variables it touches. The constant term is
//! stored under the empty set.

use std::collections::HashMap;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type VarId = u32;

/// Strictly increasing list of variable ids identifying one monomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(SmallVec<[VarId; 6]>);

impl VarSet {
    pub fn empty() -> Self {
        Self(SmallVec::new())
    }

    /// Sorts and removes repeated ids (`x * x = x`).
    pub fn from_unsorted(vars: &[VarId]) -> Self {
        let mut v: SmallVec<[VarId; 6]> = SmallVec::from_slice(vars);
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Caller guarantees `vars` is strictly increasing.
    pub(crate) fn from_sorted_unchecked(vars: SmallVec<[VarId; 6]>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        Self(vars)
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.binary_search(&var).is_ok()
    }

    /// Sorted merge of two var-sets.
    pub fn union(&self, other: &VarSet) -> VarSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        VarSet(out)
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        self.0.iter().all(|&v| assignment[v as usize])
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl From<&[VarId]> for VarSet {
    fn from(vars: &[VarId]) -> Self {
        VarSet::from_unsorted(vars)
    }
}

/// Multilinear polynomial `f(x) = sum_S c_S prod_{i in S} x_i` over `num_vars`
/// binary variables. Zero coefficients are never stored.
#[derive(Clone, Default)]
pub struct PseudoBooleanPolynomial {
    num_vars: usize,
    terms: FxHashMap<VarSet, f64>,
}

impl PartialEq for PseudoBooleanPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.terms == other.terms
    }
}

impl fmt::Debug for PseudoBooleanPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PseudoBooleanPolynomial")
            .field("num_vars", &self.num_vars)
            .field("terms", &self.sorted_terms())
            .finish()
    }
}

impl PseudoBooleanPolynomial {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: FxHashMap::default(),
        }
    }

    pub fn constant(num_vars: usize, value: f64) -> Self {
        let mut p = Self::new(num_vars);
        p.add_constant(value);
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Grows the variable space; existing ids are unchanged.
    pub fn extend_vars(&mut self, num_vars: usize) {
        assert!(num_vars >= self.num_vars, "cannot shrink a polynomial");
        self.num_vars = num_vars;
    }

    pub fn add_constant(&mut self, value: f64) {
        self.accumulate(VarSet::empty(), value);
    }

    /// Adds `coeff * prod(vars)`. Repeated ids collapse and the ids may come in
    /// any order.
    pub fn add_term(&mut self, vars: &[VarId], coeff: f64) -> Result<()> {
        if let Some(&var) = vars.iter().find(|&&v| v as usize >= self.num_vars) {
            return Err(Error::Range {
                var,
                num_vars: self.num_vars,
            });
        }
        self.accumulate(VarSet::from_unsorted(vars), coeff);
        Ok(())
    }

    /// Adds a term whose var-set is already canonical and in range.
    pub fn add_varset(&mut self, vars: VarSet, coeff: f64) {
        debug_assert!(vars.as_slice().iter().all(|&v| (v as usize) < self.num_vars));
        self.accumulate(vars, coeff);
    }

    fn accumulate(&mut self, vars: VarSet, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(vars) {
            Entry::Occupied(mut e) => {
                let c = e.get() + coeff;
                if c == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = c;
                }
            }
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    pub fn coeff(&self, vars: &[VarId]) -> f64 {
        self.terms
            .get(&VarSet::from_unsorted(vars))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&VarSet::empty()).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Unordered iteration over stored terms.
    pub fn iter(&self) -> impl Iterator<Item = (&VarSet, f64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    /// Terms in lexicographic var-set order.
    pub fn sorted_terms(&self) -> Vec<(&VarSet, f64)> {
        let mut out: Vec<_> = self.iter().collect();
        out.sort_unstable_by(|a, b| a.0.cmp(b.0));
        out
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(VarSet::len).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Number of stored terms with exactly `d` variables.
    pub fn interaction_count(&self, d: usize) -> usize {
        self.terms.keys().filter(|k| k.len() == d).count()
    }

    /// Number of stored terms with at least `d` variables.
    pub fn interaction_count_at_least(&self, d: usize) -> usize {
        self.terms.keys().filter(|k| k.len() >= d).count()
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.fract() == 0.0)
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<f64> {
        self.check_len(assignment.len())?;
        Ok(self.evaluate_unchecked(assignment))
    }

    pub(crate) fn evaluate_unchecked(&self, assignment: &[bool]) -> f64 {
        self.terms
            .iter()
            .filter(|(vars, _)| vars.is_satisfied(assignment))
            .map(|(_, c)| c)
            .sum::<f64>()
            + 0.0
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_vars {
            return Err(Error::Shape(format!(
                "assignment has {len} bits, polynomial has {} variables",
                self.num_vars
            )));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.num_vars != other.num_vars {
            return Err(Error::Shape(format!(
                "cannot multiply polynomials over {} and {} variables",
                self.num_vars, other.num_vars
            )));
        }
        let mut out = Self::new(self.num_vars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.accumulate(a.union(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, 1.0)?;
        Ok(out)
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: f64) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::Shape(format!(
                "cannot add polynomials over {} and {} variables",
                self.num_vars, other.num_vars
            )));
        }
        for (k, &c) in &other.terms {
            self.accumulate(k.clone(), c * factor);
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            self.terms.clear();
            return;
        }
        for c in self.terms.values_mut() {
            *c *= factor;
        }
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.terms
            .keys()
            .filter_map(|k| k.as_slice().last().copied())
            .max()
    }

    pub(crate) fn from_terms(num_vars: usize, terms: FxHashMap<VarSet, f64>) -> Self {
        debug_assert!(terms.values().all(|&c| c != 0.0));
        Self { num_vars, terms }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PolynomialJson::from(self)).expect("polynomial serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolynomialJson::from(self)).expect("polynomial serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PolynomialJson = serde_json::from_str(text)?;
        raw.try_into()
    }

    /// Prefix-tree form for repeated evaluation.
    pub fn compile(&self) -> Evaluator {
        Evaluator::new(self)
    }
}

/// JSON wire form: `{"num_vars": n, "terms": [{"vars": [...], "coeff": c}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub num_vars: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub vars: Vec<VarId>,
    pub coeff: f64,
}

impl From<&PseudoBooleanPolynomial> for PolynomialJson {
    fn from(p: &PseudoBooleanPolynomial) -> Self {
        PolynomialJson {
            num_vars: p.num_vars,
            terms: p
                .sorted_terms()
                .into_iter()
                .map(|(vars, coeff)| TermJson {
                    vars: vars.as_slice().to_vec(),
                    coeff,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for PseudoBooleanPolynomial {
    type Error = Error;

    fn try_from(raw: PolynomialJson) -> Result<Self> {
        let mut p = PseudoBooleanPolynomial::new(raw.num_vars);
        for t in raw.terms {
            if !t.coeff.is_finite() {
                return Err(Error::Parse(format!("non-finite coefficient {}", t.coeff)));
            }
            p.add_term(&t.vars, t.coeff)?;
        }
        Ok(p)
    }
}

/// Bidirectional map between semantic variable names and dense ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableRegistry {
    names: Vec<String>,
    ids: HashMap<String, VarId>,
}

impl VariableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, allocating the next dense id if new.
    pub fn intern(&mut self, name: impl Into<String>) -> VarId {
        let name = name.into();
        if let Some(&id) = self.ids.get(&name) {
            return id;
        }
        let id = self.names.len() as VarId;
        self.ids.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: VarId) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (i as VarId, n.as_str()))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let vars: Vec<_> = self
            .iter()
            .map(|(id, name)| serde_json::json!({"id": id, "name": name}))
            .collect();
        serde_json::Value::Array(vars)
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Entry {
            id: VarId,
            name: String,
        }
        let mut entries: Vec<Entry> = serde_json::from_value(value.clone())?;
        entries.sort_by_key(|e| e.id);
        let mut reg = Self::new();
        for (expected, e) in entries.into_iter().enumerate() {
            if e.id as usize != expected {
                return Err(Error::Parse(format!(
                    "variable ids must be dense, found id {} at position {expected}",
                    e.id
                )));
            }
            if reg.id(&e.name).is_some() {
                return Err(Error::Parse(format!("duplicate variable name {}", e.name)));
            }
            reg.intern(e.name);
        }
        Ok(reg)
    }
}

#[derive(Debug, Clone, Copy)]
struct TrieNode {
    var: VarId,
    coeff: f64,
    first_child: u32,
    child_count: u32,
}

/// Polynomial compiled into a prefix tree over sorted var-sets. Evaluation only
/// descends into branches whose variables are all set, which is much cheaper
/// than a full term scan for high-degree polynomials at random points.
#[derive(Debug, Clone)]
pub struct Evaluator {
    num_vars: usize,
    constant: f64,
    nodes: Vec<TrieNode>,
    root_children: u32,
}

impl Evaluator {
    fn new(poly: &PseudoBooleanPolynomial) -> Self {
        let mut sorted: Vec<(&[VarId], f64)> = poly
            .iter()
            .filter(|(k, _)| !k.is_empty())
            .map(|(k, c)| (k.as_slice(), c))
            .collect();
        sorted.sort_unstable_by(|a, b| a.0.cmp(b.0));

        // Breadth-first layout so each node's children are contiguous.
        let mut nodes: Vec<TrieNode> = Vec::new();
        let mut queue: std::collections::VecDeque<(usize, usize, usize, Option<usize>)> =
            std::collections::VecDeque::new();
        queue.push_back((0, sorted.len(), 0, None));
        let mut root_children = 0;
        while let Some((lo, hi, depth, parent)) = queue.pop_front() {
            let first = nodes.len();
            let mut i = lo;
            // Terms ending at this depth were consumed by the parent.
            while i < hi && sorted[i].0.len() == depth {
                i += 1;
            }
            while i < hi {
                let var = sorted[i].0[depth];
                let mut j = i;
                while j < hi && sorted[j].0[depth] == var {
                    j += 1;
                }
                let coeff = if sorted[i].0.len() == depth + 1 {
                    sorted[i].1
                } else {
                    0.0
                };
                let idx = nodes.len();
                nodes.push(TrieNode {
                    var,
                    coeff,
                    first_child: 0,
                    child_count: 0,
                });
                queue.push_back((i, j, depth + 1, Some(idx)));
                i = j;
            }
            let count = (nodes.len() - first) as u32;
            match parent {
                Some(p) => {
                    nodes[p].first_child = first as u32;
                    nodes[p].child_count = count;
                }
                None => root_children = count,
            }
        }
        Self {
            num_vars: poly.num_vars(),
            constant: poly.constant_term(),
            nodes,
            root_children,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<f64> {
        if assignment.len() != self.num_vars {
            return Err(Error::Shape(format!(
                "assignment has {} bits, polynomial has {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        let mut total = self.constant;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        for idx in 0..self.root_children {
            if assignment[self.nodes[idx as usize].var as usize] {
                stack.push(idx);
            }
        }
        while let Some(idx) = stack.pop() {
            let node = self.nodes[idx as usize];
            total += node.coeff;
            for c in node.first_child..node.first_child + node.child_count {
                if assignment[self.nodes[c as usize].var as usize] {
                    stack.push(c);
                }
            }
        }
        Ok(total + 0.0)
    }
}
