//! C ABI over `matmul_hubo`.
//!
//! Every fallible function returns an [`MhStatus`]. On failure the message is
//! kept per thread and read with [`mh_last_error_message`]. Objects cross the
//! boundary as opaque handles or JSON strings; strings returned by this
//! library are released with [`mh_string_free`], handles with their own
//! `_free` function. Panics are caught and reported as
//! [`MhStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use matmul_hubo::objectives::{build_holistic, build_step_f2, build_step_real};
use matmul_hubo::pipeline::{
    estimate_resources, run_decompositional, strassen_fixture, verify_decomposition,
    DecompositionConfig, HighEnergyPoint,
};
use matmul_hubo::quadratize::{encode_integer_ternary_pair, reduce, to_qbsolv, PenaltyWeight, ReductionMethod};
use matmul_hubo::solvers::{solve, SolverConfig, SolverKind};
use matmul_hubo::{Decomposition, Error, Field, MatMulShape, PseudoBooleanPolynomial, Tensor3};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Range = 3,
    Shape = 4,
    Field = 5,
    Parameter = 6,
    Capacity = 7,
    Stall = 8,
    Parse = 9,
    Json = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhField {
    F2 = 0,
    Real = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhSolverKind {
    Exhaustive = 0,
    Anneal = 1,
    Tabu = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhReduction {
    MinSelection = 0,
    Substitution = 1,
}

/// Solver settings. Temperatures at or below zero and a zero tabu tenure
/// mean "derive from the problem".
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MhSolverConfig {
    pub kind: MhSolverKind,
    pub seed: u64,
    pub restarts: usize,
    pub sweeps: usize,
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub tabu_tenure: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MhResourceEstimate {
    pub step_variables: u64,
    pub holistic_variables: u64,
    pub step_interaction_bound: u64,
    pub holistic_interaction_bound: u64,
    pub step_ancilla_bound: u64,
    pub holistic_ancilla_bound: u64,
}

/// Opaque pseudo-Boolean polynomial.
pub struct MhPolynomial(PseudoBooleanPolynomial);

/// Opaque list of rank-one triples.
pub struct MhDecomposition(Decomposition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Range { .. } => MhStatus::Range,
            Error::Shape(_) => MhStatus::Shape,
            Error::Field(_) => MhStatus::Field,
            Error::Parameter(_) => MhStatus::Parameter,
            Error::Capacity { .. } => MhStatus::Capacity,
            Error::Stall(_) => MhStatus::Stall,
            Error::Parse(_) => MhStatus::Parse,
            Error::Json(_) => MhStatus::Json,
            Error::Io(_) => MhStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            MhStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            MhStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MhStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MhStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(MhStatus::Parse, "output contains a nul byte".into()))
}

fn shape(n: usize, m: usize, p: usize) -> Result<MatMulShape, Failure> {
    Ok(MatMulShape::new(n, m, p)?)
}

fn field(f: MhField) -> Field {
    match f {
        MhField::F2 => Field::F2,
        MhField::Real => Field::Real,
    }
}

fn solver_config(c: &MhSolverConfig) -> SolverConfig {
    let kind = match c.kind {
        MhSolverKind::Exhaustive => SolverKind::Exhaustive,
        MhSolverKind::Anneal => SolverKind::Anneal,
        MhSolverKind::Tabu => SolverKind::Tabu,
    };
    let mut cfg = SolverConfig::new(kind)
        .with_seed(c.seed)
        .with_restarts(c.restarts)
        .with_sweeps(c.sweeps);
    cfg.initial_temperature = (c.initial_temperature > 0.0).then_some(c.initial_temperature);
    cfg.final_temperature = (c.final_temperature > 0.0).then_some(c.final_temperature);
    cfg.tabu_tenure = (c.tabu_tenure > 0).then_some(c.tabu_tenure);
    cfg
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Defaults for `kind`: 8 restarts, 1000 sweeps, derived temperatures.
#[no_mangle]
pub extern "C" fn mh_solver_config_default(kind: MhSolverKind) -> MhSolverConfig {
    let d = SolverConfig::default();
    MhSolverConfig {
        kind,
        seed: d.seed,
        restarts: d.restarts,
        sweeps: d.sweeps,
        initial_temperature: 0.0,
        final_temperature: 0.0,
        tabu_tenure: 0,
    }
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_from_json(json: *const c_char, out: *mut *mut MhPolynomial) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let poly = PseudoBooleanPolynomial::from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(MhPolynomial(poly)));
        Ok(())
    })
}

/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_to_json(poly: *const MhPolynomial, out: *mut *mut c_char) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = into_c_string(borrow(poly, "poly")?.0.to_json())?;
        Ok(())
    })
}

/// qbsolv text of a polynomial of degree at most two.
///
/// # Safety
/// `poly` must be a live handle; `comment` is null or nul-terminated; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_to_qbsolv(
    poly: *const MhPolynomial,
    comment: *const c_char,
    out: *mut *mut c_char,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let comment = if comment.is_null() { "" } else { read_str(comment, "comment")? };
        *out = into_c_string(to_qbsolv(&borrow(poly, "poly")?.0, comment)?)?;
        Ok(())
    })
}

/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_num_vars(poly: *const MhPolynomial, out: *mut usize) -> MhStatus {
    guard(|| {
        *out_ref(out, "out")? = borrow(poly, "poly")?.0.num_vars();
        Ok(())
    })
}

/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_degree(poly: *const MhPolynomial, out: *mut usize) -> MhStatus {
    guard(|| {
        *out_ref(out, "out")? = borrow(poly, "poly")?.0.degree();
        Ok(())
    })
}

/// Value at `bits[0..len]`, one byte per variable, nonzero meaning set.
///
/// # Safety
/// `poly` must be a live handle; `bits` must point to `len` readable bytes;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_evaluate(
    poly: *const MhPolynomial,
    bits: *const u8,
    len: usize,
    out: *mut f64,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let poly = borrow(poly, "poly")?;
        if bits.is_null() && len > 0 {
            return Err(null("bits"));
        }
        let assignment: Vec<bool> = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(bits, len).iter().map(|&b| b != 0).collect()
        };
        *out = poly.0.evaluate(&assignment)?;
        Ok(())
    })
}

/// # Safety
/// `poly` is null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mh_polynomial_free(poly: *mut MhPolynomial) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Fixed-rank objective for the standard `n x m` by `m x p` tensor with
/// ternary component pairs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_build_holistic(
    n: usize,
    m: usize,
    p: usize,
    rank: usize,
    out: *mut *mut MhPolynomial,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let target = Tensor3::standard(shape(n, m, p)?, Field::Real);
        let obj = build_holistic(&target, rank, None)?;
        *out = Box::into_raw(Box::new(MhPolynomial(obj.polynomial)));
        Ok(())
    })
}

/// One-step objective between two tensors given as JSON. Both must share a
/// field; integer steps use ternary component pairs.
///
/// # Safety
/// `target_json` and `source_json` must be nul-terminated; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mh_build_step(
    target_json: *const c_char,
    source_json: *const c_char,
    out: *mut *mut MhPolynomial,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let target = Tensor3::from_json(read_str(target_json, "target_json")?)?;
        let source = Tensor3::from_json(read_str(source_json, "source_json")?)?;
        let obj = match target.field() {
            Field::F2 => build_step_f2(&target, &source)?,
            Field::Real => build_step_real(&target, &source, encode_integer_ternary_pair())?,
        };
        *out = Box::into_raw(Box::new(MhPolynomial(obj.polynomial)));
        Ok(())
    })
}

/// Quadratic model of `poly`: original variables first, ancillas after.
/// Substitution uses the automatic penalty weight.
///
/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_reduce(
    poly: *const MhPolynomial,
    method: MhReduction,
    out: *mut *mut MhPolynomial,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let method = match method {
            MhReduction::MinSelection => ReductionMethod::MinSelection,
            MhReduction::Substitution => ReductionMethod::Substitution,
        };
        let (q, _) = reduce(&borrow(poly, "poly")?.0, method, PenaltyWeight::Auto)?;
        *out = Box::into_raw(Box::new(MhPolynomial(q.into_polynomial())));
        Ok(())
    })
}

/// Minimizes `poly`. The best assignment is written to `assignment[0..len]`
/// as 0/1 bytes; `len` must equal the variable count.
///
/// # Safety
/// `poly` and `config` must be valid; `assignment` must point to `len`
/// writable bytes; `energy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_solve(
    poly: *const MhPolynomial,
    config: *const MhSolverConfig,
    assignment: *mut u8,
    len: usize,
    energy: *mut f64,
) -> MhStatus {
    guard(|| {
        let poly = borrow(poly, "poly")?;
        let config = solver_config(borrow(config, "config")?);
        let energy = out_ref(energy, "energy")?;
        if len != poly.0.num_vars() {
            return Err(Failure(
                MhStatus::Shape,
                format!("buffer holds {len} bits, polynomial has {} variables", poly.0.num_vars()),
            ));
        }
        if assignment.is_null() && len > 0 {
            return Err(null("assignment"));
        }
        let r = solve(&poly.0, &config)?;
        if len > 0 {
            let dst = std::slice::from_raw_parts_mut(assignment, len);
            for (d, &b) in dst.iter_mut().zip(&r.assignment) {
                *d = b as u8;
            }
        }
        *energy = r.energy;
        Ok(())
    })
}

/// # Safety
/// `json` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_decomposition_from_json(
    json: *const c_char,
    out: *mut *mut MhDecomposition,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let d = Decomposition::from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(MhDecomposition(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_decomposition_to_json(d: *const MhDecomposition, out: *mut *mut c_char) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = into_c_string(borrow(d, "decomposition")?.0.to_json())?;
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_decomposition_rank(d: *const MhDecomposition, out: *mut usize) -> MhStatus {
    guard(|| {
        *out_ref(out, "out")? = borrow(d, "decomposition")?.0.rank();
        Ok(())
    })
}

/// # Safety
/// `d` is null or a live handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mh_decomposition_free(d: *mut MhDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Checks the decomposition against direct products: every pair of 0/1
/// matrices when small enough over GF(2), otherwise `trials` random pairs.
///
/// # Safety
/// `d` must be a live handle; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_verify(d: *const MhDecomposition, trials: u64, seed: u64, valid: *mut bool) -> MhStatus {
    guard(|| {
        let valid = out_ref(valid, "valid")?;
        *valid = verify_decomposition(&borrow(d, "decomposition")?.0, trials, seed)?.valid;
        Ok(())
    })
}

/// Stepwise search from a start point given as JSON (`t_high`, `seed`).
/// A stall returns [`MhStatus::Stall`] and leaves `out` untouched.
///
/// # Safety
/// `point_json` must be nul-terminated; `config` must be valid; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_decompose(
    point_json: *const c_char,
    field_tag: MhField,
    config: *const MhSolverConfig,
    max_iter: usize,
    out: *mut *mut MhDecomposition,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let hp = HighEnergyPoint::from_json(read_str(point_json, "point_json")?)?;
        let mut cfg = DecompositionConfig::new(field(field_tag), solver_config(borrow(config, "config")?));
        if max_iter > 0 {
            cfg.max_iter = max_iter;
        }
        let run = run_decompositional(hp.t_high.shape(), &hp, &cfg)?;
        *out = Box::into_raw(Box::new(MhDecomposition(run.decomposition)));
        Ok(())
    })
}

/// The Strassen start point and reference products as JSON.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_strassen_fixture_json(out: *mut *mut c_char) -> MhStatus {
    guard(|| {
        *out_ref(out, "out")? = into_c_string(strassen_fixture().to_json())?;
        Ok(())
    })
}

/// Variable and interaction counts for rank `rank` with `k` bits per
/// component.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mh_estimate_resources(
    n: usize,
    m: usize,
    p: usize,
    rank: u64,
    k: u64,
    field_tag: MhField,
    out: *mut MhResourceEstimate,
) -> MhStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let e = estimate_resources(shape(n, m, p)?, rank, k, field(field_tag))?;
        *out = MhResourceEstimate {
            step_variables: e.step_variables,
            holistic_variables: e.holistic_variables,
            step_interaction_bound: e.step_interaction_bound,
            holistic_interaction_bound: e.holistic_interaction_bound,
            step_ancilla_bound: e.step_ancilla_bound,
            holistic_ancilla_bound: e.holistic_ancilla_bound,
        };
        Ok(())
    })
}
