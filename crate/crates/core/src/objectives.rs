//! Binary objectives whose minima are rank-one steps or whole decompositions.
//!
//! Every objective lays its variables out the same way: all `x` components,
//! then all `y`, then all `z`. Inside each block the order is rank, component,
//! encoding slot. Names follow that layout, e.g. `x[0][3].L` in the fixed-rank
//! objective or `y[2]` in the GF(2) step objective.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::pbpoly::{PseudoBooleanPolynomial, VarId, VarSet, VariableRegistry};
use crate::quadratize::{encode_integer_ternary_pair, IntegerEncoding};
use crate::tensor::{Field, MatMulShape, RankOneTriple, Tensor3};

const VECTORS: [char; 3] = ['x', 'y', 'z'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Step,
    Holistic,
}

/// Maps `(vector, rank index, component, slot)` to a variable id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub kind: ObjectiveKind,
    pub field: Field,
    pub shape: MatMulShape,
    pub rank: usize,
    /// `None` means one plain bit per component (GF(2)).
    pub encoding: Option<IntegerEncoding>,
}

impl VariableLayout {
    pub fn slots(&self) -> usize {
        self.encoding.as_ref().map_or(1, IntegerEncoding::slots)
    }

    fn block_len(&self, vector: usize) -> usize {
        self.rank * self.shape.dims()[vector] * self.slots()
    }

    pub fn num_vars(&self) -> usize {
        (0..3).map(|v| self.block_len(v)).sum()
    }

    pub fn var(&self, vector: usize, r: usize, component: usize, slot: usize) -> VarId {
        let base: usize = (0..vector).map(|v| self.block_len(v)).sum();
        let dim = self.shape.dims()[vector];
        (base + (r * dim + component) * self.slots() + slot) as VarId
    }

    pub fn registry(&self) -> VariableRegistry {
        let mut reg = VariableRegistry::new();
        for (v, name) in VECTORS.iter().enumerate() {
            for r in 0..self.rank {
                for c in 0..self.shape.dims()[v] {
                    for s in 0..self.slots() {
                        let mut n = match self.kind {
                            ObjectiveKind::Holistic => format!("{name}[{r}][{c}]"),
                            ObjectiveKind::Step => format!("{name}[{c}]"),
                        };
                        if let Some(e) = &self.encoding {
                            n.push('.');
                            n.push_str(&e.slot_name(s));
                        }
                        let id = reg.intern(n);
                        debug_assert_eq!(id, self.var(v, r, c, s));
                    }
                }
            }
        }
        reg
    }

    /// `offset + sum weight * bit` for one integer component.
    fn linear_form(&self, vector: usize, r: usize, component: usize) -> Vec<Monomial> {
        match &self.encoding {
            None => vec![mono(&[self.var(vector, r, component, 0)], 1)],
            Some(e) => {
                let mut out = Vec::with_capacity(e.slots() + 1);
                if e.offset != 0 {
                    out.push(mono(&[], e.offset));
                }
                for (s, &w) in e.weights.iter().enumerate() {
                    out.push(mono(&[self.var(vector, r, component, s)], w));
                }
                out
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_vars() {
            return Err(Error::Shape(format!(
                "assignment has {len} bits, objective has {} variables",
                self.num_vars()
            )));
        }
        Ok(())
    }

    pub fn decode(&self, assignment: &[bool]) -> Result<Vec<RankOneTriple>> {
        self.check_len(assignment.len())?;
        let slots = self.slots();
        let component = |v: usize, r: usize, c: usize| -> i64 {
            let start = self.var(v, r, c, 0) as usize;
            let bits = &assignment[start..start + slots];
            match &self.encoding {
                None => bits[0] as i64,
                Some(e) => e.decode(bits),
            }
        };
        let dims = self.shape.dims();
        Ok((0..self.rank)
            .map(|r| {
                let vec = |v: usize| (0..dims[v]).map(|c| component(v, r, c)).collect();
                RankOneTriple::new(vec(0), vec(1), vec(2))
            })
            .collect())
    }

    /// Inverse of [`decode`](Self::decode). Components outside the encoding's
    /// range are rejected. Over GF(2) components are reduced mod 2.
    pub fn encode(&self, triples: &[RankOneTriple]) -> Result<Vec<bool>> {
        if triples.len() != self.rank {
            return Err(Error::Shape(format!(
                "expected {} triples, got {}",
                self.rank,
                triples.len()
            )));
        }
        let mut bits = vec![false; self.num_vars()];
        for (r, t) in triples.iter().enumerate() {
            t.check_shape(self.shape)?;
            for (v, vec) in [&t.x, &t.y, &t.z].into_iter().enumerate() {
                for (c, &value) in vec.iter().enumerate() {
                    let start = self.var(v, r, c, 0) as usize;
                    match &self.encoding {
                        None => bits[start] = value.rem_euclid(2) == 1,
                        Some(e) => {
                            let enc = e.encode(value).ok_or_else(|| {
                                Error::Parameter(format!(
                                    "value {value} is outside the encoding range {}..={}",
                                    e.min_value(),
                                    e.max_value()
                                ))
                            })?;
                            bits[start..start + enc.len()].copy_from_slice(&enc);
                        }
                    }
                }
            }
        }
        Ok(bits)
    }
}

type Monomial = (SmallVec<[VarId; 8]>, i64);

fn mono(vars: &[VarId], c: i64) -> Monomial {
    (SmallVec::from_slice(vars), c)
}

fn merge_sorted(a: &[VarId], b: &[VarId]) -> SmallVec<[VarId; 8]> {
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
    out
}

/// Multilinear product, collecting equal monomials.
fn product(a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
    let mut acc: FxHashMap<SmallVec<[VarId; 8]>, i64> = FxHashMap::default();
    for (va, ca) in a {
        for (vb, cb) in b {
            *acc.entry(merge_sorted(va, vb)).or_insert(0) += ca * cb;
        }
    }
    let mut out: Vec<Monomial> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
    out.sort_unstable();
    out
}

fn accumulate(acc: &mut FxHashMap<VarSet, f64>, vars: &[VarId], c: i64) {
    if c != 0 {
        *acc.entry(VarSet::from_sorted_unchecked(SmallVec::from_slice(vars)))
            .or_insert(0.0) += c as f64;
    }
}

fn finish(num_vars: usize, mut acc: FxHashMap<VarSet, f64>) -> PseudoBooleanPolynomial {
    acc.retain(|_, c| *c != 0.0);
    PseudoBooleanPolynomial::from_terms(num_vars, acc)
}

/// `sum_e (c_e + sign * sum_r P_r(e))^2` where `P_r(e)` is the product of the
/// rank-`r` components at entry `e`, expanded over the layout's bits.
fn expand_squared_residuals(
    layout: &VariableLayout,
    constants: &[i64],
    sign: i64,
) -> PseudoBooleanPolynomial {
    let [d0, d1, d2] = layout.shape.dims();
    let forms = |v: usize, len: usize| -> Vec<Vec<Vec<Monomial>>> {
        (0..layout.rank)
            .map(|r| (0..len).map(|c| layout.linear_form(v, r, c)).collect())
            .collect()
    };
    let (fx, fy, fz) = (forms(0, d0), forms(1, d1), forms(2, d2));
    let square = |f: &Vec<Vec<Vec<Monomial>>>| -> Vec<Vec<Vec<Monomial>>> {
        f.iter()
            .map(|per_r| per_r.iter().map(|l| product(l, l)).collect())
            .collect()
    };
    let (sx, sy, sz) = (square(&fx), square(&fy), square(&fz));

    let acc = (0..constants.len())
        .into_par_iter()
        .fold(FxHashMap::default, |mut acc, e| {
            let (a, b, c) = (e / (d1 * d2), (e / d2) % d1, e % d2);
            let t = constants[e];
            accumulate(&mut acc, &[], t * t);
            let prods: Vec<Vec<Monomial>> = (0..layout.rank)
                .map(|r| product(&product(&fx[r][a], &fy[r][b]), &fz[r][c]))
                .collect();
            for r in 0..layout.rank {
                for (v, k) in &prods[r] {
                    accumulate(&mut acc, v, 2 * sign * t * k);
                }
                for (v, k) in product(&product(&sx[r][a], &sy[r][b]), &sz[r][c]) {
                    accumulate(&mut acc, &v, k);
                }
                for s in r + 1..layout.rank {
                    for (vr, kr) in &prods[r] {
                        for (vs, ks) in &prods[s] {
                            accumulate(&mut acc, &merge_sorted(vr, vs), 2 * kr * ks);
                        }
                    }
                }
            }
            acc
        })
        .reduce(FxHashMap::default, |mut a, b| {
            if a.len() < b.len() {
                return merge_into(b, a);
            }
            for (k, v) in b {
                *a.entry(k).or_insert(0.0) += v;
            }
            a
        });
    finish(layout.num_vars(), acc)
}

fn merge_into(
    mut big: FxHashMap<VarSet, f64>,
    small: FxHashMap<VarSet, f64>,
) -> FxHashMap<VarSet, f64> {
    for (k, v) in small {
        *big.entry(k).or_insert(0.0) += v;
    }
    big
}

/// One step of the stepwise search: minimizing it finds a rank-one triple
/// that moves `source` toward `target`.
#[derive(Debug, Clone)]
pub struct StepObjective {
    pub polynomial: PseudoBooleanPolynomial,
    pub registry: VariableRegistry,
    pub layout: VariableLayout,
}

/// Whole fixed-rank decomposition as one objective.
#[derive(Debug, Clone)]
pub struct HolisticObjective {
    pub polynomial: PseudoBooleanPolynomial,
    pub registry: VariableRegistry,
    pub layout: VariableLayout,
}

fn check_pair(target: &Tensor3, source: &Tensor3, field: Field) -> Result<()> {
    for t in [target, source] {
        if t.field() != field {
            return Err(Error::Field(format!(
                "expected {field} tensors, got {}",
                t.field()
            )));
        }
    }
    if target.shape() != source.shape() {
        return Err(Error::Shape(format!(
            "target shape {} differs from source shape {}",
            target.shape(),
            source.shape()
        )));
    }
    Ok(())
}

/// GF(2) step objective: its value at an assignment is the Hamming distance
/// between `target` and `source - x ⊗ y ⊗ z`. Each entry contributes
/// `x_a y_b z_c` where target and source agree and `1 - x_a y_b z_c` where
/// they differ.
pub fn build_step_f2(target: &Tensor3, source: &Tensor3) -> Result<StepObjective> {
    check_pair(target, source, Field::F2)?;
    let layout = VariableLayout {
        kind: ObjectiveKind::Step,
        field: Field::F2,
        shape: target.shape(),
        rank: 1,
        encoding: None,
    };
    let [d0, d1, d2] = layout.shape.dims();
    let mut poly = PseudoBooleanPolynomial::new(layout.num_vars());
    for a in 0..d0 {
        for b in 0..d1 {
            for c in 0..d2 {
                let vars = VarSet::from_unsorted(&[
                    layout.var(0, 0, a, 0),
                    layout.var(1, 0, b, 0),
                    layout.var(2, 0, c, 0),
                ]);
                if (target.get(a, b, c) - source.get(a, b, c)).rem_euclid(2) == 1 {
                    poly.add_constant(1.0);
                    poly.add_varset(vars, -1.0);
                } else {
                    poly.add_varset(vars, 1.0);
                }
            }
        }
    }
    Ok(StepObjective {
        registry: layout.registry(),
        polynomial: poly,
        layout,
    })
}

/// Integer step objective `sum (T - S + x_a y_b z_c)^2` with every component
/// written through `encoding`.
pub fn build_step_real(
    target: &Tensor3,
    source: &Tensor3,
    encoding: IntegerEncoding,
) -> Result<StepObjective> {
    check_pair(target, source, Field::Real)?;
    let layout = VariableLayout {
        kind: ObjectiveKind::Step,
        field: Field::Real,
        shape: target.shape(),
        rank: 1,
        encoding: Some(encoding),
    };
    let diff: Vec<i64> = target
        .data()
        .iter()
        .zip(source.data())
        .map(|(t, s)| t - s)
        .collect();
    Ok(StepObjective {
        polynomial: expand_squared_residuals(&layout, &diff, 1),
        registry: layout.registry(),
        layout,
    })
}

/// Fixed-rank objective `sum (T - sum_r x^r_a y^r_b z^r_c)^2`, zero exactly at
/// assignments decoding to a rank-`rank` decomposition of `target`.
pub fn build_holistic(
    target: &Tensor3,
    rank: usize,
    encoding: Option<IntegerEncoding>,
) -> Result<HolisticObjective> {
    if rank < 1 {
        return Err(Error::Parameter("rank must be at least 1".into()));
    }
    if target.field() != Field::Real {
        return Err(Error::Field(
            "the fixed-rank objective is defined over the integers only".into(),
        ));
    }
    let layout = VariableLayout {
        kind: ObjectiveKind::Holistic,
        field: Field::Real,
        shape: target.shape(),
        rank,
        encoding: Some(encoding.unwrap_or_else(encode_integer_ternary_pair)),
    };
    Ok(HolisticObjective {
        polynomial: expand_squared_residuals(&layout, target.data(), -1),
        registry: layout.registry(),
        layout,
    })
}

#[derive(Serialize, Deserialize)]
struct ObjectiveJson {
    #[serde(flatten)]
    layout: VariableLayout,
    #[serde(flatten)]
    polynomial: crate::pbpoly::PolynomialJson,
    registry: RegistryJson,
}

#[derive(Serialize, Deserialize)]
struct RegistryJson {
    variables: serde_json::Value,
}

fn objective_json(
    poly: &PseudoBooleanPolynomial,
    reg: &VariableRegistry,
    layout: &VariableLayout,
) -> String {
    serde_json::to_string(&ObjectiveJson {
        layout: layout.clone(),
        polynomial: poly.into(),
        registry: RegistryJson {
            variables: reg.to_json_value(),
        },
    })
    .expect("objective serializes")
}

/// Parsed objective of either kind.
#[derive(Debug, Clone)]
pub struct LoadedObjective {
    pub polynomial: PseudoBooleanPolynomial,
    pub registry: VariableRegistry,
    pub layout: VariableLayout,
}

impl LoadedObjective {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ObjectiveJson = serde_json::from_str(text)?;
        raw.layout.shape.validate()?;
        let polynomial: PseudoBooleanPolynomial = raw.polynomial.try_into()?;
        let registry = VariableRegistry::from_json_value(&raw.registry.variables)?;
        if registry != raw.layout.registry() || polynomial.num_vars() != raw.layout.num_vars() {
            return Err(Error::Parse(
                "registry does not match the declared variable layout".into(),
            ));
        }
        Ok(Self {
            polynomial,
            registry,
            layout: raw.layout,
        })
    }
}

macro_rules! objective_common {
    ($t:ty) => {
        impl $t {
            pub fn num_vars(&self) -> usize {
                self.layout.num_vars()
            }

            /// Pbpoly JSON plus the layout and a `registry` block.
            pub fn to_json(&self) -> String {
                objective_json(&self.polynomial, &self.registry, &self.layout)
            }
        }
    };
}
objective_common!(StepObjective);
objective_common!(HolisticObjective);

impl StepObjective {
    pub fn decode(&self, assignment: &[bool]) -> Result<RankOneTriple> {
        Ok(self.layout.decode(assignment)?.remove(0))
    }

    pub fn encode(&self, t: &RankOneTriple) -> Result<Vec<bool>> {
        self.layout.encode(std::slice::from_ref(t))
    }
}

impl HolisticObjective {
    pub fn rank(&self) -> usize {
        self.layout.rank
    }

    pub fn decode(&self, assignment: &[bool]) -> Result<Vec<RankOneTriple>> {
        self.layout.decode(assignment)
    }

    pub fn encode(&self, triples: &[RankOneTriple]) -> Result<Vec<bool>> {
        self.layout.encode(triples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{hamming_distance, rank_one};

    fn shape(n: usize, m: usize, p: usize) -> MatMulShape {
        MatMulShape::new(n, m, p).unwrap()
    }

    #[test]
    fn f2_identical_tensors_give_sum_of_cubics() {
        let s = Tensor3::standard(shape(2, 2, 2), Field::F2);
        let obj = build_step_f2(&s, &s).unwrap();
        assert_eq!(obj.num_vars(), 12);
        assert_eq!(obj.polynomial.num_terms(), 64);
        assert!(obj.polynomial.iter().all(|(k, c)| k.len() == 3 && c == 1.0));
        assert_eq!(obj.polynomial.evaluate(&[false; 12]).unwrap(), 0.0);
    }

    #[test]
    fn f2_zero_target_against_standard() {
        let sh = shape(2, 2, 2);
        let ts = Tensor3::standard(sh, Field::F2);
        let zero = Tensor3::zeros(sh, Field::F2);
        let obj = build_step_f2(&zero, &ts).unwrap();
        assert_eq!(obj.polynomial.constant_term(), 8.0);
        let v = vec![1, 0, 0, 1];
        let t = RankOneTriple::new(v.clone(), v.clone(), v);
        let a = obj.encode(&t).unwrap();
        let expected = hamming_distance(&zero, &ts.subtract(&t).unwrap()).unwrap();
        // both tensors have 8 ones and share the 2 diagonal ones
        assert_eq!(expected, 8 + 8 - 2 * 2);
        assert_eq!(obj.polynomial.evaluate(&a).unwrap(), expected as f64);
    }

    #[test]
    fn field_mismatch_is_rejected() {
        let sh = shape(1, 1, 1);
        let a = Tensor3::zeros(sh, Field::F2);
        let b = Tensor3::zeros(sh, Field::Real);
        assert!(matches!(build_step_f2(&a, &b), Err(Error::Field(_))));
        assert!(matches!(
            build_holistic(&a, 1, None),
            Err(Error::Field(_))
        ));
        assert!(matches!(
            build_holistic(&b, 0, None),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn real_step_cancels_single_entry() {
        let sh = shape(1, 1, 1);
        let t = Tensor3::zeros(sh, Field::Real);
        let s = rank_one(sh, &RankOneTriple::new(vec![1], vec![1], vec![1]), Field::Real).unwrap();
        let obj = build_step_real(&t, &s, encode_integer_ternary_pair()).unwrap();
        let a = obj
            .encode(&RankOneTriple::new(vec![1], vec![1], vec![1]))
            .unwrap();
        assert_eq!(obj.polynomial.evaluate(&a).unwrap(), 0.0);
        let same = build_step_real(&t, &t, encode_integer_ternary_pair()).unwrap();
        assert_eq!(same.polynomial.evaluate(&[false; 6]).unwrap(), 0.0);
    }

    #[test]
    fn holistic_counts_and_zero_assignment() {
        let ts = Tensor3::standard(shape(2, 2, 2), Field::Real);
        let obj = build_holistic(&ts, 7, None).unwrap();
        assert_eq!(obj.num_vars(), 168);
        assert_eq!(obj.polynomial.evaluate(&[false; 168]).unwrap(), 8.0);
        assert_eq!(obj.registry.name(0), Some("x[0][0].L"));
        assert_eq!(obj.registry.name(1), Some("x[0][0].R"));
        assert_eq!(obj.registry.name(56), Some("y[0][0].L"));
    }

    #[test]
    fn ternary_decoding_rules() {
        let ts = Tensor3::standard(shape(1, 1, 1), Field::Real);
        let obj = build_holistic(&ts, 1, None).unwrap();
        let bits = |s: &str| s.chars().map(|c| c == '1').collect::<Vec<_>>();
        let t = obj.decode(&bits("100111")).unwrap();
        assert_eq!(t[0], RankOneTriple::new(vec![1], vec![-1], vec![0]));
        let t = obj.decode(&bits("000000")).unwrap();
        assert_eq!(t[0], RankOneTriple::new(vec![0], vec![0], vec![0]));
    }

    #[test]
    fn encode_decode_round_trip() {
        let sh = shape(2, 2, 2);
        let ts = Tensor3::standard(sh, Field::Real);
        let obj = build_holistic(&ts, 2, None).unwrap();
        let triples = vec![
            RankOneTriple::new(vec![1, 0, -1, 0], vec![0, 1, 1, -1], vec![1, 1, 0, 0]),
            RankOneTriple::new(vec![0, 0, 0, 1], vec![-1, 0, 0, 0], vec![0, 1, 0, -1]),
        ];
        let a = obj.encode(&triples).unwrap();
        assert_eq!(obj.decode(&a).unwrap(), triples);
        let bad = vec![
            RankOneTriple::new(vec![2, 0, 0, 0], vec![0; 4], vec![0; 4]),
            triples[1].clone(),
        ];
        assert!(obj.encode(&bad).is_err());
    }

    #[test]
    fn objective_json_round_trip() {
        let ts = Tensor3::standard(shape(1, 2, 1), Field::Real);
        let obj = build_holistic(&ts, 2, None).unwrap();
        let text = obj.to_json();
        assert!(text.contains("\"registry\":{\"variables\":[{\"id\":0,\"name\":\"x[0][0].L\"}"));
        let back = LoadedObjective::from_json(&text).unwrap();
        assert_eq!(back.polynomial, obj.polynomial);
        assert_eq!(back.layout, obj.layout);
        assert_eq!(PseudoBooleanPolynomial::from_json(&text).unwrap(), obj.polynomial);
    }
}
