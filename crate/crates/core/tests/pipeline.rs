mod common;

use common::*;
use matmul_hubo::objectives::build_holistic;
use matmul_hubo::pipeline::{
    estimate_resources, lift_to_real, move_tensors_closer, run_decompositional, run_holistic,
    sample_landscape, sample_neighborhood, strassen_fixture, strassen_reference, verify_decomposition,
    write_csv, DecompositionConfig, HighEnergyPoint, HolisticConfig, StepSolver, CSV_HEADER,
};
use matmul_hubo::quadratize::ReductionMethod;
use matmul_hubo::solvers::{SolverConfig, SolverKind};
use matmul_hubo::tensor::rank_one;
use matmul_hubo::{Decomposition, Error, Field, RankOneTriple, Tensor3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exhaustive() -> SolverConfig {
    SolverConfig::new(SolverKind::Exhaustive)
}

fn triples(d: &Decomposition) -> Vec<(Vec<i64>, Vec<i64>, Vec<i64>)> {
    d.factors.iter().map(|t| (t.x.clone(), t.y.clone(), t.z.clone())).collect()
}

#[test]
fn textbook_strassen_agrees_with_reference() {
    let s = shape(2, 2, 2);
    let reference = strassen_reference();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..200 {
        let a: Vec<i64> = (0..4).map(|_| rng.random_range(-9..=9)).collect();
        let b: Vec<i64> = (0..4).map(|_| rng.random_range(-9..=9)).collect();
        let want = matmul(s, &a, &b);
        assert_eq!(bilinear(s, &strassen_textbook(), &a, &b), want);
        assert_eq!(bilinear(s, &triples(&reference), &a, &b), want);
    }
}

#[test]
fn strassen_fixture_rank_seven_over_f2() {
    let fx = strassen_fixture();
    let s = shape(2, 2, 2);
    let run = run_decompositional(s, &fx.point, &DecompositionConfig::new(Field::F2, exhaustive())).unwrap();
    assert_eq!(run.decomposition.rank(), 7);
    assert_eq!(run.decomposition.sum().unwrap(), Tensor3::standard(s, Field::F2));
    assert_eq!(run.distances(1), vec![8, 4, 0]);
    assert_eq!(run.distances(2), vec![8, 4, 0]);
    let mod2 = |t: &RankOneTriple| t.mod2();
    let mut got: Vec<_> = run.decomposition.factors.iter().map(mod2).collect();
    let mut want: Vec<_> = fx.reference.factors.iter().map(mod2).collect();
    got.sort_by(|a, b| (&a.x, &a.y, &a.z).cmp(&(&b.x, &b.y, &b.z)));
    want.sort_by(|a, b| (&a.x, &a.y, &a.z).cmp(&(&b.x, &b.y, &b.z)));
    assert_eq!(got, want);

    // GF(2) products of every pair of 0/1 matrices.
    for index in 0..256u64 {
        let bits = bits_of(index, 8);
        let a: Vec<i64> = bits[..4].iter().map(|&b| b as i64).collect();
        let b: Vec<i64> = bits[4..].iter().map(|&b| b as i64).collect();
        let got: Vec<i64> = bilinear(s, &triples(&run.decomposition), &a, &b)
            .into_iter()
            .map(|v| v.rem_euclid(2))
            .collect();
        let want: Vec<i64> = matmul(s, &a, &b).into_iter().map(|v| v.rem_euclid(2)).collect();
        assert_eq!(got, want);
    }
    let lifted = lift_to_real(&run.decomposition, &fx.reference).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let a: Vec<i64> = (0..4).map(|_| rng.random_range(-9..=9)).collect();
        let b: Vec<i64> = (0..4).map(|_| rng.random_range(-9..=9)).collect();
        assert_eq!(bilinear(s, &triples(&lifted), &a, &b), matmul(s, &a, &b));
    }
}

#[test]
fn strassen_fixture_over_integers() {
    let fx = strassen_fixture();
    let s = shape(2, 2, 2);
    let run = run_decompositional(s, &fx.point, &DecompositionConfig::new(Field::Real, exhaustive())).unwrap();
    assert_eq!(run.decomposition.rank(), 7);
    assert_eq!(run.decomposition.sum().unwrap(), Tensor3::standard(s, Field::Real));
    assert!(verify_decomposition(&run.decomposition, 1000, 3).unwrap().valid);
}

fn unit_point(s: matmul_hubo::MatMulShape, t_high: Tensor3) -> HighEnergyPoint {
    HighEnergyPoint {
        t_high,
        seed: RankOneTriple::unit(s, 0, 0, 0),
    }
}

#[test]
fn degenerate_point_recovers_standard_terms() {
    for (n, m, p) in [(2, 2, 2), (2, 3, 2)] {
        let s = shape(n, m, p);
        let e = RankOneTriple::unit(s, 0, 0, 0);
        // Integer steps on (2,3,2) have 32 variables, past the enumeration cap.
        let fields: &[Field] = if m == 2 { &[Field::F2, Field::Real] } else { &[Field::F2] };
        for &field in fields {
            let cfg = DecompositionConfig::new(field, exhaustive());
            // Start one unit below the standard tensor: loop 1 has to put the
            // unit back, so the seed and that step are both kept.
            let low = Tensor3::standard(s, field).subtract(&e).unwrap();
            let run = run_decompositional(s, &unit_point(s, low), &cfg).unwrap();
            assert_eq!(run.decomposition.rank(), n * m * p + 2, "{s} {field}");
            assert!(verify_decomposition(&run.decomposition, 200, 0).unwrap().valid);
            // Starting at the standard tensor itself, loop 1 is empty.
            let run = run_decompositional(s, &unit_point(s, Tensor3::standard(s, field)), &cfg).unwrap();
            assert_eq!(run.decomposition.rank(), n * m * p, "{s} {field}");
            assert!(run.distances(1).is_empty());
            assert!(verify_decomposition(&run.decomposition, 200, 0).unwrap().valid);
        }
    }
}

#[test]
fn step_budget_stall_keeps_partial_trace() {
    let s = shape(1, 1, 3);
    let mut t_high = Tensor3::zeros(s, Field::F2);
    t_high.set(0, 0, 0, 1);
    let hp = HighEnergyPoint {
        t_high,
        seed: RankOneTriple::unit(s, 0, 0, 0),
    };
    let mut cfg = DecompositionConfig::new(Field::F2, exhaustive());
    cfg.max_iter = 1;
    match run_decompositional(s, &hp, &cfg) {
        Err(Error::Stall(info)) => {
            assert_eq!(info.loop_index, 1);
            assert_eq!(info.steps.len(), 1);
            assert_eq!(info.partial.rank(), 2);
        }
        other => panic!("expected a stall, got {other:?}"),
    }
}

#[test]
fn zero_seed_is_rejected() {
    let s = shape(2, 2, 2);
    let hp = HighEnergyPoint {
        t_high: Tensor3::standard(s, Field::F2),
        seed: RankOneTriple::zero(s),
    };
    assert!(run_decompositional(s, &hp, &DecompositionConfig::new(Field::F2, exhaustive())).is_err());
}

#[test]
fn move_closer_examples() {
    let s = shape(2, 2, 2);
    let step = StepSolver::new(exhaustive());
    let t = Tensor3::standard(s, Field::F2);
    assert!(move_tensors_closer(&t, &t, Field::F2, &step).unwrap().is_zero());

    let rank1 = RankOneTriple::new(vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, 0, 1]);
    let source = rank_one(s, &rank1, Field::F2).unwrap();
    let zero = Tensor3::zeros(s, Field::F2);
    assert_eq!(move_tensors_closer(&zero, &source, Field::F2, &step).unwrap(), rank1);

    let signed = RankOneTriple::new(vec![1, -1, 0, 1], vec![0, 1, 1, 0], vec![-1, 0, 0, 1]);
    let source = rank_one(s, &signed, Field::Real).unwrap();
    let got = move_tensors_closer(&Tensor3::zeros(s, Field::Real), &source, Field::Real, &step).unwrap();
    assert_eq!(rank_one(s, &got, Field::Real).unwrap(), source);

    // The Strassen start point's first step removes one of the seven
    // products, up to GF(2).
    let fx = strassen_fixture();
    let got = move_tensors_closer(&t, &fx.point.t_high, Field::F2, &step).unwrap();
    assert!(fx.reference.factors.iter().any(|f| f.mod2() == got));
}

#[test]
fn reduced_steps_match_cubic_steps() {
    let fx = strassen_fixture();
    let s = shape(2, 2, 2);
    for method in [ReductionMethod::MinSelection, ReductionMethod::Substitution] {
        let solver = SolverConfig::new(SolverKind::Anneal).with_sweeps(200);
        let mut cfg = DecompositionConfig::new(Field::F2, solver);
        cfg.step.reduction = Some(method);
        let run = run_decompositional(s, &fx.point, &cfg).unwrap();
        assert_eq!(run.decomposition.rank(), 7, "{method}");
        assert_eq!(run.distances(1), vec![8, 4, 0]);
    }
}

#[test]
fn holistic_scalar_product() {
    let s = shape(1, 1, 1);
    let out = run_holistic(s, &HolisticConfig::new(1, exhaustive())).unwrap();
    assert_eq!(out.energy, 0.0);
    let d = out.decomposition.unwrap();
    // Any sign pattern with product one; ties pick the first assignment in
    // bit-string order.
    assert_eq!(d.rank(), 1);
    let f = &d.factors[0];
    assert_eq!(f.x[0] * f.y[0] * f.z[0], 1);
    assert!(out.verification.unwrap().valid);
}

#[test]
fn holistic_warm_start_at_strassen() {
    let s = shape(2, 2, 2);
    for reduction in [None, Some(ReductionMethod::MinSelection)] {
        let mut cfg = HolisticConfig::new(7, SolverConfig::new(SolverKind::Anneal).with_restarts(1).with_sweeps(2));
        cfg.reduction = reduction;
        cfg.warm_start = Some(strassen_reference().factors);
        cfg.solver.initial_temperature = Some(1e-3);
        cfg.solver.final_temperature = Some(1e-4);
        let out = run_holistic(s, &cfg).unwrap();
        assert_eq!(out.energy, 0.0);
        assert!(out.found());
        assert!(out.verification.unwrap().valid);
        assert_eq!(out.num_vars, 168);
    }
}

#[test]
fn holistic_cold_reports_positive_energy() {
    let s = shape(2, 2, 2);
    let cfg = HolisticConfig::new(7, SolverConfig::new(SolverKind::Anneal).with_restarts(1).with_sweeps(20));
    let out = run_holistic(s, &cfg).unwrap();
    assert!(out.energy >= 0.0);
    assert_eq!(out.found(), out.energy == 0.0);
}

#[test]
fn resources_match_built_objectives() {
    for (n, m, p, r) in [(2, 2, 2, 7), (1, 2, 3, 4), (2, 3, 2, 11)] {
        let s = shape(n, m, p);
        let est = estimate_resources(s, r, 2, Field::Real).unwrap();
        let obj = build_holistic(&Tensor3::standard(s, Field::Real), r as usize, None).unwrap();
        assert_eq!(est.holistic_variables, obj.num_vars() as u64);
        assert!(obj.polynomial.interaction_count_at_least(3) as u64 <= est.holistic_interaction_bound);
    }
    let est = estimate_resources(shape(2, 2, 2), 7, 2, Field::Real).unwrap();
    assert_eq!(est.holistic_variables, 168);
}

#[test]
fn landscape_contains_strassen_optimum() {
    let s = shape(2, 2, 2);
    let obj = build_holistic(&Tensor3::standard(s, Field::Real), 7, None).unwrap();
    let optimum = obj.encode(&strassen_reference().factors).unwrap();
    let rows = sample_landscape(&obj.polynomial, 16, 8, 0, std::slice::from_ref(&optimum)).unwrap();
    let inserted: Vec<_> = rows.iter().filter(|r| r.inserted).collect();
    assert_eq!(inserted.len(), 1);
    assert_eq!(inserted[0].energy, 0.0);
    assert!(rows.iter().filter(|r| !r.inserted).all(|r| r.energy > 0.0));
    assert_eq!(rows.len(), 16 * 8 + 1);

    let near = sample_neighborhood(&obj.polynomial, &optimum, 3).unwrap();
    assert_eq!(near.len(), 7);
    assert_eq!(near.iter().filter(|r| r.energy == 0.0 && r.inserted).count(), 1);

    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().count(), rows.len() + 1);
}

#[test]
fn landscape_is_reproducible() {
    let s = shape(1, 2, 2);
    let obj = build_holistic(&Tensor3::standard(s, Field::Real), 4, None).unwrap();
    let a = sample_landscape(&obj.polynomial, 4, 5, 9, &[]).unwrap();
    let b = sample_landscape(&obj.polynomial, 4, 5, 9, &[]).unwrap();
    assert_eq!(a, b);
}
