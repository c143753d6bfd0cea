//! Independent reference computations shared by the integration tests. Only
//! plain arrays and loops here; nothing routes through the crate's tensor
//! arithmetic or decoders.

#![allow(dead_code)]

use matmul_hubo::{MatMulShape, PseudoBooleanPolynomial};
use rand::Rng;

pub fn shape(n: usize, m: usize, p: usize) -> MatMulShape {
    MatMulShape { n, m, p }
}

pub fn dims(s: MatMulShape) -> [usize; 3] {
    [s.n * s.m, s.m * s.p, s.p * s.n]
}

/// Dense standard tensor: entry (i*m+j, j*p+k, k*n+i) is one.
pub fn standard_dense(s: MatMulShape) -> Vec<i64> {
    let [_, d1, d2] = dims(s);
    let mut t = vec![0i64; s.n * s.m * s.m * s.p * s.p * s.n];
    for i in 0..s.n {
        for j in 0..s.m {
            for k in 0..s.p {
                let (a, b, c) = (i * s.m + j, j * s.p + k, k * s.n + i);
                t[(a * d1 + b) * d2 + c] = 1;
            }
        }
    }
    t
}

/// Component values for `count` components starting at bit `start`.
pub fn read_components(bits: &[bool], start: usize, count: usize, weights: &[i64], offset: i64) -> Vec<i64> {
    (0..count)
        .map(|c| {
            let base = start + c * weights.len();
            offset
                + weights
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| bits[base + s])
                    .map(|(_, w)| *w)
                    .sum::<i64>()
        })
        .collect()
}

/// Vectors of a step objective: x block, then y, then z.
pub fn step_vectors(s: MatMulShape, bits: &[bool], weights: &[i64], offset: i64) -> [Vec<i64>; 3] {
    let [d0, d1, d2] = dims(s);
    let k = weights.len();
    [
        read_components(bits, 0, d0, weights, offset),
        read_components(bits, d0 * k, d1, weights, offset),
        read_components(bits, (d0 + d1) * k, d2, weights, offset),
    ]
}

/// Vectors of rank `r` in a fixed-rank objective: all x vectors rank by rank,
/// then all y, then all z.
pub fn holistic_vectors(
    s: MatMulShape,
    rank: usize,
    r: usize,
    bits: &[bool],
    weights: &[i64],
    offset: i64,
) -> [Vec<i64>; 3] {
    let [d0, d1, d2] = dims(s);
    let k = weights.len();
    let xs = 0;
    let ys = rank * d0 * k;
    let zs = ys + rank * d1 * k;
    [
        read_components(bits, xs + r * d0 * k, d0, weights, offset),
        read_components(bits, ys + r * d1 * k, d1, weights, offset),
        read_components(bits, zs + r * d2 * k, d2, weights, offset),
    ]
}

/// Number of entries where `target` and `source - x*y*z` differ mod 2.
pub fn f2_step_oracle(s: MatMulShape, target: &[i64], source: &[i64], v: &[Vec<i64>; 3]) -> i64 {
    let [d0, d1, d2] = dims(s);
    let mut count = 0;
    for a in 0..d0 {
        for b in 0..d1 {
            for c in 0..d2 {
                let e = (a * d1 + b) * d2 + c;
                let after = source[e] - v[0][a] * v[1][b] * v[2][c];
                if (target[e] - after).rem_euclid(2) != 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// `sum (T - S + x*y*z)^2` over all entries.
pub fn real_step_oracle(s: MatMulShape, target: &[i64], source: &[i64], v: &[Vec<i64>; 3]) -> i64 {
    let [d0, d1, d2] = dims(s);
    let mut total = 0;
    for a in 0..d0 {
        for b in 0..d1 {
            for c in 0..d2 {
                let e = (a * d1 + b) * d2 + c;
                let r = target[e] - source[e] + v[0][a] * v[1][b] * v[2][c];
                total += r * r;
            }
        }
    }
    total
}

/// `sum (T - sum_r x_r*y_r*z_r)^2` over all entries.
pub fn holistic_oracle(s: MatMulShape, target: &[i64], vectors: &[[Vec<i64>; 3]]) -> i64 {
    let [d0, d1, d2] = dims(s);
    let mut total = 0;
    for a in 0..d0 {
        for b in 0..d1 {
            for c in 0..d2 {
                let e = (a * d1 + b) * d2 + c;
                let sum: i64 = vectors.iter().map(|v| v[0][a] * v[1][b] * v[2][c]).sum();
                let r = target[e] - sum;
                total += r * r;
            }
        }
    }
    total
}

/// Textbook row-by-column product of an `n x m` and an `m x p` matrix.
pub fn matmul(s: MatMulShape, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut c = vec![0; s.n * s.p];
    for i in 0..s.n {
        for k in 0..s.p {
            c[i * s.p + k] = (0..s.m).map(|j| a[i * s.m + j] * b[j * s.p + k]).sum();
        }
    }
    c
}

/// Product through a list of rank-one triples: each scalar product
/// `(x.a)(y.b)` is spread over `C[i][k]` through `z[k*n+i]`.
pub fn bilinear(s: MatMulShape, factors: &[(Vec<i64>, Vec<i64>, Vec<i64>)], a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut c = vec![0; s.n * s.p];
    for (x, y, z) in factors {
        let l: i64 = x.iter().zip(a).map(|(u, v)| u * v).sum();
        let r: i64 = y.iter().zip(b).map(|(u, v)| u * v).sum();
        for i in 0..s.n {
            for k in 0..s.p {
                c[i * s.p + k] += l * r * z[k * s.n + i];
            }
        }
    }
    c
}

/// Direct term-by-term evaluation.
pub fn eval(poly: &PseudoBooleanPolynomial, bits: &[bool]) -> f64 {
    poly.iter()
        .filter(|(vars, _)| vars.as_slice().iter().all(|&v| bits[v as usize]))
        .map(|(_, c)| c)
        .sum()
}

pub fn bits_of(index: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| index >> i & 1 == 1).collect()
}

/// Minimum and the lexicographically first minimizer by enumeration.
pub fn brute_min(poly: &PseudoBooleanPolynomial) -> (f64, Vec<bool>) {
    let n = poly.num_vars();
    let mut best = (f64::INFINITY, Vec::new());
    for index in 0..1u64 << n {
        let bits = bits_of(index, n);
        let e = eval(poly, &bits);
        if e < best.0 || (e == best.0 && bits_lt(&bits, &best.1)) {
            best = (e, bits);
        }
    }
    best
}

/// Orders assignments as bit strings written variable 0 first.
fn bits_lt(a: &[bool], b: &[bool]) -> bool {
    b.is_empty() || a < b
}

/// Random multilinear polynomial with integer coefficients in `[-5, 5]`.
pub fn random_hubo(rng: &mut impl Rng, num_vars: usize, terms: usize, max_degree: usize) -> PseudoBooleanPolynomial {
    let mut poly = PseudoBooleanPolynomial::new(num_vars);
    for _ in 0..terms {
        let d = rng.random_range(0..=max_degree.min(num_vars));
        let mut vars: Vec<u32> = Vec::new();
        while vars.len() < d {
            let v = rng.random_range(0..num_vars as u32);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let c = rng.random_range(-5..=5) as f64;
        poly.add_term(&vars, c).unwrap();
    }
    poly
}

pub fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}

/// Strassen's seven products in the crate's index convention, from the
/// textbook formulas. Rows of `x` index `A`, rows of `y` index `B`, `z`
/// indexes `C` at `k*n+i`.
pub fn strassen_textbook() -> Vec<(Vec<i64>, Vec<i64>, Vec<i64>)> {
    // A = [a11 a12; a21 a22] -> [0 1 2 3]; B likewise; z order c11 c21 c12 c22.
    vec![
        (vec![1, 0, 0, 1], vec![1, 0, 0, 1], vec![1, 0, 0, 1]),
        (vec![0, 0, 1, 1], vec![1, 0, 0, 0], vec![0, 1, 0, -1]),
        (vec![1, 0, 0, 0], vec![0, 1, 0, -1], vec![0, 0, 1, 1]),
        (vec![0, 0, 0, 1], vec![-1, 0, 1, 0], vec![1, 1, 0, 0]),
        (vec![1, 1, 0, 0], vec![0, 0, 0, 1], vec![-1, 0, 1, 0]),
        (vec![-1, 0, 1, 0], vec![1, 1, 0, 0], vec![0, 0, 0, 1]),
        (vec![0, 1, 0, -1], vec![0, 0, 1, 1], vec![1, 0, 0, 0]),
    ]
}
