//! Degree reduction from higher-order to quadratic binary polynomials, integer
//! encodings, and qbsolv-format export.
//!
//! Two reducers are provided. Both introduce ancilla variables whose ids follow
//! the original variables, and both preserve minima: for every assignment of
//! the original variables, minimizing the quadratic model over the ancillas
//! gives back the original polynomial's value.
//!
//! - Minimum selection rewrites each monomial of degree `d >= 3` on its own.
//!   A negative monomial uses `x1..xd = max_w w(x1 + .. + xd - (d - 1))`, which
//!   becomes a minimum once multiplied by the negative coefficient. A positive
//!   monomial uses the symmetric-polynomial rewrite
//!   `x1..xd = min_w sum_i w_i (c_i (2i - S1) - 1) + S2` with
//!   `floor((d - 1) / 2)` ancillas, where `S1` and `S2` are the first two
//!   elementary symmetric polynomials of the monomial's variables.
//! - Substitution repeatedly replaces a variable pair `xy` by a fresh `w` in
//!   every high-degree monomial, adding `M * (xy - 2xw - 2yw + 3w)`, which is
//!   zero exactly when `w = xy`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::pbpoly::{PseudoBooleanPolynomial, VarId, VarSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionMethod {
    MinSelection,
    Substitution,
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionMethod::MinSelection => "min-selection",
            ReductionMethod::Substitution => "substitution",
        })
    }
}

impl FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-selection" | "min" => Ok(Self::MinSelection),
            "substitution" | "sub" => Ok(Self::Substitution),
            _ => Err(Error::Parameter(format!("unknown reduction method {s:?}"))),
        }
    }
}

/// What an ancilla variable stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AncillaOrigin {
    /// Substitution ancilla, equal to the product of the pair at the optimum.
    Pair(VarId, VarId),
    /// Minimum-selection ancilla introduced to linearize this monomial.
    Term(VarSet),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyWeight {
    /// `1 + sum |c_S|` over the input polynomial.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub method: ReductionMethod,
    pub original_vars: usize,
    pub ancilla_count: usize,
    pub penalty_weight: Option<f64>,
}

/// Polynomial of degree at most two plus the meaning of its ancillas.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    poly: PseudoBooleanPolynomial,
    original_vars: usize,
    ancillas: BTreeMap<VarId, AncillaOrigin>,
}

impl QuadraticModel {
    fn unchanged(poly: &PseudoBooleanPolynomial) -> Self {
        Self {
            poly: poly.clone(),
            original_vars: poly.num_vars(),
            ancillas: BTreeMap::new(),
        }
    }

    pub fn polynomial(&self) -> &PseudoBooleanPolynomial {
        &self.poly
    }

    pub fn into_polynomial(self) -> PseudoBooleanPolynomial {
        self.poly
    }

    pub fn original_vars(&self) -> usize {
        self.original_vars
    }

    pub fn num_vars(&self) -> usize {
        self.poly.num_vars()
    }

    pub fn ancillas(&self) -> &BTreeMap<VarId, AncillaOrigin> {
        &self.ancillas
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancillas.len()
    }

    /// Drops the ancilla bits of a full assignment.
    pub fn project<'a>(&self, full: &'a [bool]) -> &'a [bool] {
        &full[..self.original_vars]
    }

    /// Extends an assignment of the original variables with ancilla values
    /// that minimize the model for that assignment.
    pub fn complete(&self, original: &[bool]) -> Result<Vec<bool>> {
        if original.len() != self.original_vars {
            return Err(Error::Shape(format!(
                "expected {} original bits, got {}",
                self.original_vars,
                original.len()
            )));
        }
        let mut full = original.to_vec();
        full.resize(self.num_vars(), false);

        // Local field of each min-selection ancilla: the coefficient sum of
        // the terms through it that are active when it is set.
        let mut touching: FxHashMap<VarId, Vec<(&VarSet, f64)>> = FxHashMap::default();
        for (vars, c) in self.poly.iter() {
            for &v in vars.as_slice() {
                if matches!(self.ancillas.get(&v), Some(AncillaOrigin::Term(_))) {
                    touching.entry(v).or_default().push((vars, c));
                }
            }
        }
        for (&w, origin) in &self.ancillas {
            full[w as usize] = match origin {
                AncillaOrigin::Pair(a, b) => full[*a as usize] && full[*b as usize],
                AncillaOrigin::Term(_) => {
                    let field: f64 = touching
                        .get(&w)
                        .map(|ts| {
                            ts.iter()
                                .filter(|(vars, _)| {
                                    vars.as_slice()
                                        .iter()
                                        .all(|&u| u == w || full[u as usize])
                                })
                                .map(|(_, c)| c)
                                .sum()
                        })
                        .unwrap_or(0.0);
                    field < 0.0
                }
            };
        }
        Ok(full)
    }
}

/// Rewrites every monomial of degree three or more by minimum selection.
pub fn reduce_min_selection(poly: &PseudoBooleanPolynomial) -> (QuadraticModel, ReductionReport) {
    let original_vars = poly.num_vars();
    if poly.degree() <= 2 {
        return (
            QuadraticModel::unchanged(poly),
            ReductionReport {
                method: ReductionMethod::MinSelection,
                original_vars,
                ancilla_count: 0,
                penalty_weight: None,
            },
        );
    }

    let mut high: Vec<(&VarSet, f64)> = Vec::new();
    let mut out = PseudoBooleanPolynomial::new(original_vars);
    for (vars, c) in poly.sorted_terms() {
        if vars.len() >= 3 {
            high.push((vars, c));
        } else {
            out.add_varset(vars.clone(), c);
        }
    }

    let ancilla_total: usize = high
        .iter()
        .map(|(vars, c)| if *c < 0.0 { 1 } else { (vars.len() - 1) / 2 })
        .sum();
    out.extend_vars(original_vars + ancilla_total);

    let mut ancillas = BTreeMap::new();
    let mut next = original_vars as VarId;
    for (vars, c) in high {
        let xs = vars.as_slice();
        let d = xs.len();
        if c < 0.0 {
            let w = next;
            next += 1;
            ancillas.insert(w, AncillaOrigin::Term(vars.clone()));
            out.add_varset(VarSet::from_unsorted(&[w]), -c * (d as f64 - 1.0));
            for &x in xs {
                out.add_varset(VarSet::from_unsorted(&[x, w]), c);
            }
        } else {
            for (a, &xa) in xs.iter().enumerate() {
                for &xb in &xs[a + 1..] {
                    out.add_varset(VarSet::from_unsorted(&[xa, xb]), c);
                }
            }
            let nd = (d - 1) / 2;
            for i in 1..=nd {
                let w = next;
                next += 1;
                ancillas.insert(w, AncillaOrigin::Term(vars.clone()));
                let ci = if d % 2 == 1 && i == nd { 1.0 } else { 2.0 };
                out.add_varset(VarSet::from_unsorted(&[w]), c * (ci * 2.0 * i as f64 - 1.0));
                for &x in xs {
                    out.add_varset(VarSet::from_unsorted(&[x, w]), -c * ci);
                }
            }
        }
    }
    debug_assert_eq!(next as usize, original_vars + ancilla_total);

    let report = ReductionReport {
        method: ReductionMethod::MinSelection,
        original_vars,
        ancilla_count: ancillas.len(),
        penalty_weight: None,
    };
    (
        QuadraticModel {
            poly: out,
            original_vars,
            ancillas,
        },
        report,
    )
}

/// Rewrites high-degree monomials by pair substitution. Each round picks the
/// variable pair shared by the most remaining monomials of degree three or
/// more (ties to the lexicographically smallest pair) and replaces it with a
/// fresh ancilla everywhere.
pub fn reduce_substitution(
    poly: &PseudoBooleanPolynomial,
    penalty: PenaltyWeight,
) -> Result<(QuadraticModel, ReductionReport)> {
    let weight = match penalty {
        PenaltyWeight::Fixed(m) if m > 1.0 && m.is_finite() => m,
        PenaltyWeight::Fixed(m) => {
            return Err(Error::Parameter(format!(
                "penalty weight must exceed 1, got {m}"
            )))
        }
        PenaltyWeight::Auto => 1.0 + poly.iter().map(|(_, c)| c.abs()).sum::<f64>(),
    };
    let original_vars = poly.num_vars();
    if poly.degree() <= 2 {
        return Ok((
            QuadraticModel::unchanged(poly),
            ReductionReport {
                method: ReductionMethod::Substitution,
                original_vars,
                ancilla_count: 0,
                penalty_weight: Some(weight),
            },
        ));
    }

    let mut low: Vec<(VarSet, f64)> = Vec::new();
    let mut high: Vec<Option<(SmallVec<[VarId; 6]>, f64)>> = Vec::new();
    for (vars, c) in poly.sorted_terms() {
        if vars.len() >= 3 {
            high.push(Some((SmallVec::from_slice(vars.as_slice()), c)));
        } else {
            low.push((vars.clone(), c));
        }
    }

    let mut pair_count: FxHashMap<(VarId, VarId), usize> = FxHashMap::default();
    let mut queue: BTreeSet<(std::cmp::Reverse<usize>, VarId, VarId)> = BTreeSet::new();
    let mut var_terms: Vec<Vec<usize>> = vec![Vec::new(); original_vars];

    fn bump(
        pair_count: &mut FxHashMap<(VarId, VarId), usize>,
        queue: &mut BTreeSet<(std::cmp::Reverse<usize>, VarId, VarId)>,
        vars: &[VarId],
        up: bool,
    ) {
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                let cnt = pair_count.entry((a, b)).or_insert(0);
                if *cnt > 0 {
                    queue.remove(&(std::cmp::Reverse(*cnt), a, b));
                }
                if up {
                    *cnt += 1;
                } else {
                    *cnt -= 1;
                }
                if *cnt > 0 {
                    queue.insert((std::cmp::Reverse(*cnt), a, b));
                } else {
                    pair_count.remove(&(a, b));
                }
            }
        }
    }

    for (idx, t) in high.iter().enumerate() {
        let (vars, _) = t.as_ref().expect("fresh term");
        bump(&mut pair_count, &mut queue, vars, true);
        for &v in vars.iter() {
            var_terms[v as usize].push(idx);
        }
    }

    let mut ancillas = BTreeMap::new();
    let mut next = original_vars as VarId;
    let mut finished: Vec<(VarSet, f64)> = Vec::new();
    while let Some(&(_, a, b)) = queue.iter().next() {
        let w = next;
        next += 1;
        ancillas.insert(w, AncillaOrigin::Pair(a, b));
        var_terms.push(Vec::new());

        let (scan, other) = if var_terms[a as usize].len() <= var_terms[b as usize].len() {
            (a, b)
        } else {
            (b, a)
        };
        let candidates = std::mem::take(&mut var_terms[scan as usize]);
        let mut keep = Vec::with_capacity(candidates.len());
        for idx in candidates {
            let Some((vars, c)) = high[idx].as_ref() else {
                continue;
            };
            if !vars.contains(&scan) {
                continue;
            }
            if !vars.contains(&other) {
                keep.push(idx);
                continue;
            }
            let c = *c;
            let old = vars.clone();
            bump(&mut pair_count, &mut queue, &old, false);
            let mut new_vars: SmallVec<[VarId; 6]> =
                old.iter().copied().filter(|&v| v != a && v != b).collect();
            // w is the largest id so far, so pushing keeps the set sorted.
            new_vars.push(w);
            if new_vars.len() >= 3 {
                bump(&mut pair_count, &mut queue, &new_vars, true);
                var_terms[w as usize].push(idx);
                high[idx] = Some((new_vars, c));
            } else {
                finished.push((VarSet::from_sorted_unchecked(new_vars), c));
                high[idx] = None;
            }
        }
        var_terms[scan as usize] = keep;
    }
    debug_assert!(high.iter().all(Option::is_none));

    let mut out = PseudoBooleanPolynomial::new(next as usize);
    for (vars, c) in low.into_iter().chain(finished) {
        out.add_varset(vars, c);
    }
    for (&w, origin) in &ancillas {
        let AncillaOrigin::Pair(a, b) = *origin else {
            unreachable!()
        };
        out.add_varset(VarSet::from_unsorted(&[a, b]), weight);
        out.add_varset(VarSet::from_unsorted(&[a, w]), -2.0 * weight);
        out.add_varset(VarSet::from_unsorted(&[b, w]), -2.0 * weight);
        out.add_varset(VarSet::from_unsorted(&[w]), 3.0 * weight);
    }

    let report = ReductionReport {
        method: ReductionMethod::Substitution,
        original_vars,
        ancilla_count: ancillas.len(),
        penalty_weight: Some(weight),
    };
    Ok((
        QuadraticModel {
            poly: out,
            original_vars,
            ancillas,
        },
        report,
    ))
}

pub fn reduce(
    poly: &PseudoBooleanPolynomial,
    method: ReductionMethod,
    penalty: PenaltyWeight,
) -> Result<(QuadraticModel, ReductionReport)> {
    match method {
        ReductionMethod::MinSelection => Ok(reduce_min_selection(poly)),
        ReductionMethod::Substitution => reduce_substitution(poly, penalty),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scheme")]
pub enum EncodingScheme {
    /// Binary expansion with weights `1, 2, .., 2^(M-1), N + 1 - 2^M`.
    Log { max_value: u64 },
    /// `left - right`, covering `{-1, 0, 1}`.
    TernaryPair,
}

/// Integer variable written as `offset + sum_b weights[b] * bit_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerEncoding {
    pub scheme: EncodingScheme,
    pub weights: Vec<i64>,
    pub offset: i64,
}

/// Log encoding for integers `0..=n`: with `2^M <= n < 2^(M+1)`, uses `M + 1`
/// bits weighted `1, 2, .., 2^(M-1), n + 1 - 2^M`.
pub fn encode_integer_log(n: u64) -> Result<IntegerEncoding> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "log encoding needs at least 2, got {n}"
        )));
    }
    let m = 63 - n.leading_zeros() as u64;
    let mut weights: Vec<i64> = (0..m).map(|b| 1i64 << b).collect();
    weights.push((n + 1 - (1 << m)) as i64);
    Ok(IntegerEncoding {
        scheme: EncodingScheme::Log { max_value: n },
        weights,
        offset: 0,
    })
}

pub fn encode_integer_ternary_pair() -> IntegerEncoding {
    IntegerEncoding {
        scheme: EncodingScheme::TernaryPair,
        weights: vec![1, -1],
        offset: 0,
    }
}

impl IntegerEncoding {
    pub fn with_offset(mut self, offset: i64) -> Self {
        self.offset = offset;
        self
    }

    pub fn slots(&self) -> usize {
        self.weights.len()
    }

    pub fn slot_name(&self, slot: usize) -> String {
        match self.scheme {
            EncodingScheme::TernaryPair => ["L", "R"][slot].to_string(),
            EncodingScheme::Log { .. } => format!("b{slot}"),
        }
    }

    pub fn decode(&self, bits: &[bool]) -> i64 {
        debug_assert_eq!(bits.len(), self.slots());
        self.offset
            + self
                .weights
                .iter()
                .zip(bits)
                .filter(|(_, &b)| b)
                .map(|(w, _)| w)
                .sum::<i64>()
    }

    pub fn min_value(&self) -> i64 {
        self.offset + self.weights.iter().filter(|&&w| w < 0).sum::<i64>()
    }

    pub fn max_value(&self) -> i64 {
        self.offset + self.weights.iter().filter(|&&w| w > 0).sum::<i64>()
    }

    /// Lexicographically smallest bit pattern decoding to `value`.
    pub fn encode(&self, value: i64) -> Option<Vec<bool>> {
        let k = self.slots();
        (0u64..1 << k)
            .map(|v| (0..k).map(|b| v >> (k - 1 - b) & 1 == 1).collect::<Vec<_>>())
            .find(|bits| self.decode(bits) == value)
    }
}

impl FromStr for IntegerEncoding {
    type Err = Error;

    /// `ternary`, or `log:N` for integers centered on zero: `log:4` covers
    /// `-2..=2`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "ternary" {
            return Ok(encode_integer_ternary_pair());
        }
        if let Some(n) = s.strip_prefix("log:") {
            let n: u64 = n
                .parse()
                .map_err(|_| Error::Parameter(format!("bad log encoding size {n:?}")))?;
            return Ok(encode_integer_log(n)?.with_offset(-((n / 2) as i64)));
        }
        Err(Error::Parameter(format!("unknown encoding {s:?}")))
    }
}

/// Writes a polynomial of degree at most two in qbsolv format.
pub fn to_qbsolv(poly: &PseudoBooleanPolynomial, comment: &str) -> Result<String> {
    if poly.degree() > 2 {
        return Err(Error::Parameter(format!(
            "qbsolv export needs degree <= 2, polynomial has degree {}",
            poly.degree()
        )));
    }
    let mut entries: Vec<(VarId, VarId, f64)> = poly
        .iter()
        .filter(|(k, _)| !k.is_empty())
        .map(|(k, c)| {
            let s = k.as_slice();
            (s[0], *s.last().unwrap(), c)
        })
        .collect();
    entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let diag = entries.iter().filter(|(i, j, _)| i == j).count();
    let off = entries.len() - diag;

    let mut out = String::new();
    writeln!(out, "c {}", comment.replace('\n', " ")).unwrap();
    writeln!(out, "p qubo 0 {} {diag} {off}", poly.num_vars()).unwrap();
    writeln!(out, "c offset {}", poly.constant_term()).unwrap();
    for (i, j, c) in entries {
        writeln!(out, "{i} {j} {c}").unwrap();
    }
    Ok(out)
}

/// Reads qbsolv text back into a polynomial. Accepts the `c offset` comment
/// written by [`to_qbsolv`].
pub fn parse_qbsolv(text: &str) -> Result<PseudoBooleanPolynomial> {
    let mut poly: Option<PseudoBooleanPolynomial> = None;
    let mut offset = 0.0;
    let mut expected = (0usize, 0usize);
    let mut seen = (0usize, 0usize);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "c" => {
                if fields.get(1) == Some(&"offset") {
                    offset = fields
                        .get(2)
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| bad("bad offset"))?;
                }
            }
            "p" => {
                if fields.len() != 6 || fields[1] != "qubo" {
                    return Err(bad("malformed problem line"));
                }
                let nums: Vec<usize> = fields[3..]
                    .iter()
                    .map(|f| f.parse().map_err(|_| bad("bad count")))
                    .collect::<Result<_>>()?;
                poly = Some(PseudoBooleanPolynomial::new(nums[0]));
                expected = (nums[1], nums[2]);
            }
            _ => {
                let p = poly.as_mut().ok_or_else(|| bad("entry before problem line"))?;
                if fields.len() != 3 {
                    return Err(bad("expected `i j coeff`"));
                }
                let i: VarId = fields[0].parse().map_err(|_| bad("bad node id"))?;
                let j: VarId = fields[1].parse().map_err(|_| bad("bad node id"))?;
                let c: f64 = fields[2].parse().map_err(|_| bad("bad coefficient"))?;
                p.add_term(&[i, j], c)?;
                if i == j {
                    seen.0 += 1;
                } else {
                    seen.1 += 1;
                }
            }
        }
    }
    let mut poly = poly.ok_or_else(|| Error::Parse("missing problem line".into()))?;
    if seen != expected {
        return Err(Error::Parse(format!(
            "problem line announces {expected:?} entries, found {seen:?}"
        )));
    }
    poly.add_constant(offset);
    Ok(poly)
}
