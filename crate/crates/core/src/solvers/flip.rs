use crate::pbpoly::{PseudoBooleanPolynomial, VarId};

/// Read-only index of a polynomial for single-bit-flip search: terms in
/// canonical order plus, for each variable, the terms that contain it.
#[derive(Debug)]
pub(crate) struct FlipIndex {
    num_vars: usize,
    constant: f64,
    coeffs: Vec<f64>,
    term_start: Vec<u32>,
    term_vars: Vec<VarId>,
    var_start: Vec<u32>,
    var_terms: Vec<u32>,
}

impl FlipIndex {
    pub fn new(poly: &PseudoBooleanPolynomial) -> Self {
        let terms: Vec<_> = poly
            .sorted_terms()
            .into_iter()
            .filter(|(k, _)| !k.is_empty())
            .collect();
        let mut coeffs = Vec::with_capacity(terms.len());
        let mut term_start = Vec::with_capacity(terms.len() + 1);
        let mut term_vars = Vec::new();
        let mut counts = vec![0u32; poly.num_vars() + 1];
        term_start.push(0);
        for (k, c) in &terms {
            coeffs.push(*c);
            term_vars.extend_from_slice(k.as_slice());
            term_start.push(term_vars.len() as u32);
            for &v in k.as_slice() {
                counts[v as usize + 1] += 1;
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let var_start = counts.clone();
        let mut fill = counts;
        let mut var_terms = vec![0u32; term_vars.len()];
        for (t, (k, _)) in terms.iter().enumerate() {
            for &v in k.as_slice() {
                var_terms[fill[v as usize] as usize] = t as u32;
                fill[v as usize] += 1;
            }
        }
        Self {
            num_vars: poly.num_vars(),
            constant: poly.constant_term(),
            coeffs,
            term_start,
            term_vars,
            var_start,
            var_terms,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn vars_of(&self, t: usize) -> &[VarId] {
        &self.term_vars[self.term_start[t] as usize..self.term_start[t + 1] as usize]
    }

    fn terms_of(&self, v: usize) -> &[u32] {
        &self.var_terms[self.var_start[v] as usize..self.var_start[v + 1] as usize]
    }
}

/// Mutable search state: the assignment, each term's count of unset
/// variables, the current energy, and optionally every variable's flip delta.
#[derive(Debug, Clone)]
pub(crate) struct FlipState<'a> {
    index: &'a FlipIndex,
    bits: Vec<bool>,
    zeros: Vec<u32>,
    energy: f64,
    deltas: Option<Vec<f64>>,
}

impl<'a> FlipState<'a> {
    pub fn new(index: &'a FlipIndex, bits: Vec<bool>, track_deltas: bool) -> Self {
        debug_assert_eq!(bits.len(), index.num_vars);
        let mut zeros = Vec::with_capacity(index.coeffs.len());
        let mut energy = index.constant;
        for t in 0..index.coeffs.len() {
            let z = index.vars_of(t).iter().filter(|&&v| !bits[v as usize]).count() as u32;
            zeros.push(z);
            if z == 0 {
                energy += index.coeffs[t];
            }
        }
        let mut s = Self {
            index,
            bits,
            zeros,
            energy,
            deltas: None,
        };
        if track_deltas {
            let d = (0..index.num_vars).map(|v| s.compute_delta(v)).collect();
            s.deltas = Some(d);
        }
        s
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Contribution of term `t` to the flip delta of `u`, given the current
    /// state.
    fn contribution(&self, t: usize, u: usize) -> f64 {
        let c = self.index.coeffs[t];
        match (self.bits[u], self.zeros[t]) {
            (false, 1) => c,
            (true, 0) => -c,
            _ => 0.0,
        }
    }

    fn compute_delta(&self, v: usize) -> f64 {
        self.index
            .terms_of(v)
            .iter()
            .map(|&t| self.contribution(t as usize, v))
            .sum()
    }

    /// Energy change if `v` were flipped.
    pub fn delta(&self, v: usize) -> f64 {
        match &self.deltas {
            Some(d) => d[v],
            None => self.compute_delta(v),
        }
    }

    pub fn flip(&mut self, v: usize) {
        let index = self.index;
        let tracked = self.deltas.is_some();
        self.energy += self.delta(v);
        let turning_on = !self.bits[v];
        for &t in index.terms_of(v) {
            let t = t as usize;
            if tracked {
                for &u in index.vars_of(t) {
                    let old = self.contribution(t, u as usize);
                    self.deltas.as_mut().unwrap()[u as usize] -= old;
                }
            }
            if turning_on {
                self.zeros[t] -= 1;
            } else {
                self.zeros[t] += 1;
            }
            if tracked {
                // `v` is read with its new value below, so update it first.
                self.bits[v] = turning_on;
                for &u in index.vars_of(t) {
                    let new = self.contribution(t, u as usize);
                    self.deltas.as_mut().unwrap()[u as usize] += new;
                }
                self.bits[v] = !turning_on;
            }
        }
        self.bits[v] = turning_on;
    }
}
