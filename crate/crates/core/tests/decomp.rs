//! Behaviour of t-CX, t-CUR and the truncated t-SVD baseline.

use tubal::decomp::uniform_slice_count;
use tubal::sampling::leverage_slice_count;
use tubal::*;

fn exact_rank(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Tensor3f64 {
    gen_lowrank(n1, n2, n3, r, 0.0, seed).unwrap().1
}

#[test]
fn cx_with_every_slice_is_exact() {
    let a = exact_rank(12, 9, 3, 2, 1);
    let cx = t_cx(&a, 2, 9, &ProbSpec::uniform(), 5).unwrap();
    assert_eq!(cx.plan.len(), 9);
    assert!(cx.rse <= 1e-10, "rse {}", cx.rse);
    assert_eq!(cx.approx.dims(), a.dims());
}

#[test]
fn cx_captures_exact_rank_span() {
    let a = exact_rank(40, 30, 4, 3, 7);
    let hits = (0..20u64)
        .filter(|&s| t_cx(&a, 3, 25, &ProbSpec::lateral_leverage(3), s).unwrap().rse <= 1e-8)
        .count();
    assert!(hits >= 18, "hits {hits}");
}

#[test]
fn cx_rejects_bad_rank() {
    let a = exact_rank(5, 4, 2, 2, 1);
    assert!(matches!(
        t_cx(&a, 5, 2, &ProbSpec::uniform(), 0),
        Err(TensorError::RankTooLarge { .. })
    ));
    assert!(t_cx(&a, 0, 2, &ProbSpec::uniform(), 0).is_err());
}

#[test]
fn cx_noisy_relative_error_at_corollary_count() {
    let (noisy, _) = gen_lowrank::<f64>(200, 100, 4, 3, 0.1, 31).unwrap();
    let best = rse_frob(&noisy, &truncated_tsvd(&noisy, 3).unwrap()).unwrap();
    let rho = coherence(&truncated_tsvd(&noisy, 3).unwrap(), 3, None).unwrap().rho;
    let c = uniform_slice_count(rho, 0.2, 0.5).min(noisy.n2());
    let hits = (0..20u64)
        .filter(|&s| t_cx(&noisy, 3, c, &ProbSpec::uniform(), s).unwrap().rse <= 1.5 * best)
        .count();
    assert!(hits >= 16, "hits {hits} at c = {c}");
}

#[test]
fn cur_recovers_exact_rank() {
    let a = exact_rank(40, 30, 4, 3, 11);
    let hits = (0..20u64)
        .filter(|&s| t_cur(&a, 3, 15, 15, &ProbSpec::lateral_leverage(3), s).unwrap().rse <= 1e-6)
        .count();
    assert!(hits >= 16, "hits {hits}");
}

#[test]
fn cur_with_full_selection_is_exact() {
    let a = gen_gaussian::<f64>(10, 7, 3, 2);
    let cur = t_cur(&a, 3, 7, 10, &ProbSpec::uniform(), 9).unwrap();
    assert!((&cur.approx - &a).max_abs() <= 1e-10);
    assert_eq!(cur.u_tensor.dims(), (7, 10, 3));
    assert!((&cur.recompose().unwrap() - &cur.approx).max_abs() <= 1e-10);
}

#[test]
fn cur_noisy_relative_error() {
    let (noisy, _) = gen_lowrank::<f64>(200, 100, 4, 3, 0.1, 41).unwrap();
    let l3 = truncated_tsvd(&noisy, 3).unwrap();
    let best = rse_frob(&noisy, &l3).unwrap();
    let rep = coherence(&l3, 3, None).unwrap();
    let c = uniform_slice_count(rep.rho, 0.3, 1.0).min(noisy.n2());
    let rho_c = coherence(&l3, 3, Some(c)).unwrap().rho_c.unwrap();
    let l = uniform_slice_count(rho_c, 0.3, 1.0).min(noisy.n1());
    let hits = (0..20u64)
        .filter(|&s| t_cur(&noisy, 3, c, l, &ProbSpec::uniform(), s).unwrap().rse <= 2.0 * best)
        .count();
    assert!(hits >= 14, "hits {hits} at c = {c}, l = {l}");
}

#[test]
fn truncation_error_is_monotone() {
    let a = gen_gaussian::<f64>(9, 7, 4, 3);
    let errs: Vec<f64> = (1..=7).map(|r| rse_frob(&a, &truncated_tsvd(&a, r).unwrap()).unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{errs:?}");
    assert!(errs[6] <= 1e-12);
    let q = exact_rank(9, 7, 4, 2, 5);
    assert!(rse_frob(&q, &truncated_tsvd(&q, 3).unwrap()).unwrap() <= 1e-10);
}

#[test]
fn projection_beats_other_coefficients_and_cur() {
    let a = gen_gaussian::<f64>(15, 12, 3, 17);
    for seed in 0..5u64 {
        let cur = t_cur(&a, 4, 6, 8, &ProbSpec::norm_a(), seed).unwrap();
        let cx = t_cx(&a, 4, 6, &ProbSpec::norm_a(), seed).unwrap();
        assert_eq!(cx.c_tensor, cur.c_tensor);
        let best = (&a - &cx.approx).frob_norm();
        for y_seed in 0..100u64 {
            let y = gen_gaussian::<f64>(cx.c_tensor.n2(), 12, 3, 1000 + y_seed);
            let other = (&a - &t_product(&cx.c_tensor, &y).unwrap()).frob_norm();
            assert!(best <= other + 1e-10);
        }
        assert!((&a - &cur.approx).frob_norm() >= best - 1e-10);
    }
}

#[test]
fn decompositions_are_reproducible() {
    let a = gen_gaussian::<f64>(20, 15, 3, 8);
    for spec in [ProbSpec::uniform(), ProbSpec::norm_a(), ProbSpec::lateral_leverage(3), ProbSpec::approx_leverage(3)] {
        let x = t_cur(&a, 3, 8, 8, &spec, 4).unwrap();
        let y = t_cur(&a, 3, 8, 8, &spec, 4).unwrap();
        assert_eq!(x.lateral_plan, y.lateral_plan);
        assert_eq!(x.horizontal_plan, y.horizontal_plan);
        assert_eq!(x.approx, y.approx);
        let p = t_cx(&a, 3, 8, &spec, 4).unwrap();
        let q = t_cx(&a, 3, 8, &spec, 4).unwrap();
        assert_eq!(p.approx, q.approx);
    }
}

/// `n × 2 × n3` orthonormal basis whose first frontal slice holds two Hadamard
/// columns scaled by `1/sqrt(n)`; every row carries the same energy.
fn flat_basis(n: usize, n3: usize) -> Tensor3f64 {
    let s = 1.0 / (n as f64).sqrt();
    Tensor3::from_fn(n, 2, n3, |i, j, k| {
        if k > 0 {
            0.0
        } else if (i & (j + 1)).count_ones() % 2 == 0 {
            s
        } else {
            -s
        }
    })
}

#[test]
fn coherence_is_stable_under_slice_sampling() {
    let (n1, n2, n3, r) = (30, 2048, 3, 2);
    let (eps, delta) = (0.5, 0.1);
    let u = t_svd(&gen_gaussian::<f64>(n1, r, n3, 77)).unwrap().u;
    let sigma = Tensor3::from_fn(r, r, n3, |i, j, k| if i == j && k == 0 { [3.0, 2.0][i] } else { 0.0 });
    let v = flat_basis(n2, n3);
    let l = t_product3(&u, &sigma, &t_transpose(&v)).unwrap();
    let (mu0_u, mu0_v) = (mu0(&u), mu0(&v));
    let c = leverage_slice_count(r, 1.0, delta, eps);
    let probs = probs_uniform::<f64>(n2);
    let mut hits = 0;
    for seed in 0..50u64 {
        let plan = draw_plan(&probs, c, seed).unwrap();
        let lc = l.gather_lateral(&plan.indices).unwrap();
        let svd = t_svd(&lc).unwrap().truncate(r).unwrap();
        assert!((mu0(&svd.u) - mu0_u).abs() <= 1e-8, "seed {seed}");
        if mu0(&svd.v) <= mu0_v / (1.0 - eps / 2.0) {
            hits += 1;
        }
    }
    assert!(hits >= 45, "hits {hits}");
}
