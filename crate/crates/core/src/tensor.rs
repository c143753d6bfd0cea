//! Dense 3-way tensors for the matrix-multiplication bilinear map.
//!
//! A tensor for shape `(n, m, p)` has dims `(n*m, m*p, p*n)`. Axis 0 indexes
//! the row-major flattening of the left `n x m` operand, axis 1 the row-major
//! flattening of the right `m x p` operand, and axis 2 the output entry
//! `C[i][k]` at position `k*n + i`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the product of an `n x m` matrix with an `m x p` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatMulShape {
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

impl MatMulShape {
    pub fn new(n: usize, m: usize, p: usize) -> Result<Self> {
        let shape = Self { n, m, p };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.p == 0 {
            return Err(Error::Parameter(format!(
                "matrix dimensions must be positive, got ({}, {}, {})",
                self.n, self.m, self.p
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.n * self.m, self.m * self.p, self.p * self.n]
    }

    pub fn entries(&self) -> usize {
        let [a, b, c] = self.dims();
        a * b * c
    }

    /// `nm + mp + pn`, the number of components in one rank-one triple.
    pub fn triple_len(&self) -> usize {
        self.dims().iter().sum()
    }
}

impl fmt::Display for MatMulShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.p)
    }
}

/// Scalar field of a tensor or decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "F2")]
    F2,
}

impl Field {
    pub fn reduce(self, v: i64) -> i64 {
        match self {
            Field::Real => v,
            Field::F2 => v.rem_euclid(2),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "R",
            Field::F2 => "F2",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" | "real" => Ok(Field::Real),
            "f2" | "gf2" => Ok(Field::F2),
            _ => Err(Error::Parameter(format!("unknown field {s:?}"))),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tensor3 {
    shape: MatMulShape,
    field: Field,
    data: Vec<i64>,
}

impl fmt::Debug for Tensor3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor3")
            .field("shape", &self.shape)
            .field("field", &self.field)
            .field("nonzeros", &self.nonzeros())
            .finish()
    }
}

impl Tensor3 {
    pub fn zeros(shape: MatMulShape, field: Field) -> Self {
        Self {
            shape,
            field,
            data: vec![0; shape.entries()],
        }
    }

    /// The standard multiplication tensor: one unit entry per `(i, j, k)`.
    pub fn standard(shape: MatMulShape, field: Field) -> Self {
        let MatMulShape { n, m, p } = shape;
        let mut t = Self::zeros(shape, field);
        for i in 0..n {
            for j in 0..m {
                for k in 0..p {
                    t.set(i * m + j, j * p + k, k * n + i, 1);
                }
            }
        }
        t
    }

    pub fn shape(&self) -> MatMulShape {
        self.shape
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dims(&self) -> [usize; 3] {
        self.shape.dims()
    }

    fn offset(&self, a: usize, b: usize, c: usize) -> usize {
        let [_, d1, d2] = self.dims();
        (a * d1 + b) * d2 + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> i64 {
        self.data[self.offset(a, b, c)]
    }

    /// Stores `value` reduced into the tensor's field.
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: i64) {
        let o = self.offset(a, b, c);
        self.data[o] = self.field.reduce(value);
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Nonzero entries as `[a, b, c, value]`, in lexicographic index order.
    pub fn nonzeros(&self) -> Vec<[i64; 4]> {
        let [d0, d1, d2] = self.dims();
        let mut out = Vec::new();
        for a in 0..d0 {
            for b in 0..d1 {
                for c in 0..d2 {
                    let v = self.get(a, b, c);
                    if v != 0 {
                        out.push([a as i64, b as i64, c as i64, v]);
                    }
                }
            }
        }
        out
    }

    /// Reinterprets the tensor in `field`, reducing entries mod 2 for GF(2).
    pub fn to_field(&self, field: Field) -> Self {
        Self {
            shape: self.shape,
            field,
            data: self.data.iter().map(|&v| field.reduce(v)).collect(),
        }
    }

    fn check_compatible(&self, other: &Tensor3) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "tensor shapes differ: {} vs {}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    /// Entry-wise `self - rank_one(t)`, reduced mod 2 over GF(2).
    pub fn subtract(&self, t: &RankOneTriple) -> Result<Self> {
        t.check_shape(self.shape)?;
        let mut out = self.clone();
        out.axpy_rank_one(t, -1);
        Ok(out)
    }

    /// Entry-wise `self + rank_one(t)`, reduced mod 2 over GF(2).
    pub fn add_rank_one(&self, t: &RankOneTriple) -> Result<Self> {
        t.check_shape(self.shape)?;
        let mut out = self.clone();
        out.axpy_rank_one(t, 1);
        Ok(out)
    }

    fn axpy_rank_one(&mut self, t: &RankOneTriple, sign: i64) {
        let [_, d1, d2] = self.dims();
        for (a, &xa) in t.x.iter().enumerate() {
            if xa == 0 {
                continue;
            }
            for (b, &yb) in t.y.iter().enumerate() {
                if yb == 0 {
                    continue;
                }
                for (c, &zc) in t.z.iter().enumerate() {
                    if zc == 0 {
                        continue;
                    }
                    let o = (a * d1 + b) * d2 + c;
                    self.data[o] = self.field.reduce(self.data[o] + sign * xa * yb * zc);
                }
            }
        }
    }

    pub fn sub_tensor(&self, other: &Tensor3) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            shape: self.shape,
            field: self.field,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| self.field.reduce(a - b))
                .collect(),
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(TensorJson::from(self)).expect("tensor serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TensorJson::from(self)).expect("tensor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<TensorJson>(text)?.try_into()
    }
}

/// Rank-one tensor `x ⊗ y ⊗ z` with entry `(a, b, c) = x[a] * y[b] * z[c]`.
pub fn rank_one(shape: MatMulShape, t: &RankOneTriple, field: Field) -> Result<Tensor3> {
    Tensor3::zeros(shape, field).add_rank_one(t)
}

/// Sum of absolute entry-wise differences. Over GF(2) this counts the
/// positions where the tensors differ.
pub fn hamming_distance(a: &Tensor3, b: &Tensor3) -> Result<u64> {
    a.check_compatible(b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.abs_diff(*y))
        .sum())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorJson {
    pub shape: MatMulShape,
    pub field: Field,
    pub nonzeros: Vec<[i64; 4]>,
}

impl From<&Tensor3> for TensorJson {
    fn from(t: &Tensor3) -> Self {
        TensorJson {
            shape: t.shape,
            field: t.field,
            nonzeros: t.nonzeros(),
        }
    }
}

impl TryFrom<TensorJson> for Tensor3 {
    type Error = Error;

    fn try_from(raw: TensorJson) -> Result<Self> {
        raw.shape.validate()?;
        let mut t = Tensor3::zeros(raw.shape, raw.field);
        let dims = raw.shape.dims();
        for [a, b, c, v] in raw.nonzeros {
            let idx = [a, b, c];
            if idx
                .iter()
                .zip(dims)
                .any(|(&i, d)| i < 0 || i as usize >= d)
            {
                return Err(Error::Shape(format!(
                    "entry ({a},{b},{c}) outside dims {dims:?}"
                )));
            }
            if raw.field == Field::F2 && !(0..=1).contains(&v) {
                return Err(Error::Field(format!("GF(2) tensor entry {v} is not 0 or 1")));
            }
            t.set(a as usize, b as usize, c as usize, v);
        }
        Ok(t)
    }
}

/// Vectors `(x, y, z)` of lengths `nm`, `mp`, `pn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankOneTriple {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub z: Vec<i64>,
}

impl RankOneTriple {
    pub fn new(x: Vec<i64>, y: Vec<i64>, z: Vec<i64>) -> Self {
        Self { x, y, z }
    }

    pub fn zero(shape: MatMulShape) -> Self {
        let [a, b, c] = shape.dims();
        Self::new(vec![0; a], vec![0; b], vec![0; c])
    }

    /// Unit triple `e_a ⊗ e_b ⊗ e_c`.
    pub fn unit(shape: MatMulShape, a: usize, b: usize, c: usize) -> Self {
        let mut t = Self::zero(shape);
        t.x[a] = 1;
        t.y[b] = 1;
        t.z[c] = 1;
        t
    }

    /// True when the outer product vanishes, i.e. any vector is all zero.
    pub fn is_zero(&self) -> bool {
        [&self.x, &self.y, &self.z]
            .iter()
            .any(|v| v.iter().all(|&e| e == 0))
    }

    pub fn check_shape(&self, shape: MatMulShape) -> Result<()> {
        let dims = shape.dims();
        let lens = [self.x.len(), self.y.len(), self.z.len()];
        if lens != dims {
            return Err(Error::Shape(format!(
                "triple lengths {lens:?} do not match dims {dims:?} of shape {shape}"
            )));
        }
        Ok(())
    }

    pub fn mod2(&self) -> Self {
        let r = |v: &Vec<i64>| v.iter().map(|e| e.rem_euclid(2)).collect();
        Self::new(r(&self.x), r(&self.y), r(&self.z))
    }

    /// Same outer product with the sign flipped.
    pub fn negated(&self) -> Self {
        Self::new(
            self.x.iter().map(|e| -e).collect(),
            self.y.clone(),
            self.z.clone(),
        )
    }

    pub fn is_binary(&self) -> bool {
        [&self.x, &self.y, &self.z]
            .iter()
            .all(|v| v.iter().all(|&e| e == 0 || e == 1))
    }
}

/// Ordered list of rank-one triples whose sum is meant to equal the standard
/// tensor of `shape`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub shape: MatMulShape,
    pub field: Field,
    pub factors: Vec<RankOneTriple>,
}

impl Decomposition {
    pub fn new(shape: MatMulShape, field: Field) -> Self {
        Self {
            shape,
            field,
            factors: Vec::new(),
        }
    }

    pub fn from_factors(
        shape: MatMulShape,
        field: Field,
        factors: Vec<RankOneTriple>,
    ) -> Result<Self> {
        let mut d = Self::new(shape, field);
        for f in factors {
            d.push(f)?;
        }
        Ok(d)
    }

    /// The standard algorithm: one unit triple per `(i, j, k)`.
    pub fn standard(shape: MatMulShape, field: Field) -> Self {
        let MatMulShape { n, m, p } = shape;
        let mut factors = Vec::with_capacity(n * m * p);
        for i in 0..n {
            for j in 0..m {
                for k in 0..p {
                    factors.push(RankOneTriple::unit(shape, i * m + j, j * p + k, k * n + i));
                }
            }
        }
        Self {
            shape,
            field,
            factors,
        }
    }

    pub fn push(&mut self, t: RankOneTriple) -> Result<()> {
        t.check_shape(self.shape)?;
        if t.is_zero() {
            return Err(Error::Parameter(
                "a decomposition cannot contain the zero triple".into(),
            ));
        }
        self.factors.push(t);
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Entry-wise sum of the rank-one tensors, reduced mod 2 over GF(2).
    pub fn sum(&self) -> Result<Tensor3> {
        let mut acc = Tensor3::zeros(self.shape, self.field);
        for f in &self.factors {
            f.check_shape(self.shape)?;
            acc.axpy_rank_one(f, 1);
        }
        Ok(acc)
    }

    pub fn mod2(&self) -> Self {
        Self {
            shape: self.shape,
            field: Field::F2,
            factors: self.factors.iter().map(RankOneTriple::mod2).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Decomposition = serde_json::from_str(text)?;
        raw.shape.validate()?;
        let mut d = Decomposition::new(raw.shape, raw.field);
        for f in raw.factors {
            if raw.field == Field::F2 && !f.is_binary() {
                return Err(Error::Field(
                    "GF(2) decomposition factor has entries outside {0, 1}".into(),
                ));
            }
            d.push(f)?;
        }
        Ok(d)
    }
}
