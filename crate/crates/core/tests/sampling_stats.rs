//! Monte-Carlo checks of the sampling schemes and randomized products.

use tubal::sampling::leverage_slice_count;
use tubal::tsvd::fourier_singular_values;
use tubal::*;

#[test]
fn inclusion_frequency_matches_bernoulli_rate() {
    let n = 20;
    let c = n / 2;
    let p = probs_uniform::<f64>(n);
    let trials = 10_000;
    let mut counts = vec![0usize; n];
    for seed in 0..trials {
        for i in draw_plan(&p, c, seed).unwrap().indices {
            counts[i] += 1;
        }
    }
    let q = (c as f64 / n as f64).min(1.0);
    let sigma = (trials as f64 * q * (1.0 - q)).sqrt();
    for &k in &counts {
        assert!((k as f64 - trials as f64 * q).abs() <= 3.0 * sigma, "count {k}");
    }
}

#[test]
fn skewed_inclusion_frequency() {
    let p = vec![0.5, 0.3, 0.15, 0.05];
    let c = 2;
    let trials = 10_000;
    let mut counts = [0usize; 4];
    for seed in 0..trials {
        for i in draw_plan(&p, c, 10_000 + seed).unwrap().indices {
            counts[i] += 1;
        }
    }
    for (i, &k) in counts.iter().enumerate() {
        let q = (c as f64 * p[i]).min(1.0);
        let sigma = (trials as f64 * q * (1.0 - q)).sqrt().max(1.0);
        let expected = trials as f64 * q;
        // redraws on empty plans only add selections, so allow for them on the low side
        assert!((k as f64 - expected).abs() <= 3.0 * sigma + 1.0, "index {i} count {k}");
    }
}

#[test]
fn exact_when_every_slice_is_kept() {
    let a = gen_gaussian::<f64>(6, 8, 3, 1);
    let b = gen_gaussian::<f64>(8, 5, 3, 2);
    let (cr, plan) = rt_product(&a, &b, &probs_uniform(8), 8, 3).unwrap();
    assert_eq!(plan.len(), 8);
    let exact = t_product(&a, &b).unwrap();
    assert!((&cr - &exact).max_abs() <= 1e-12 * (1.0 + exact.max_abs()));
    let z = Tensor3::zeros(8, 5, 3);
    let (cz, _) = rt_product(&a, &z, &probs_norm_a(&a, 1.0).unwrap(), 3, 4).unwrap();
    assert_eq!(cz.max_abs(), 0.0);
    assert!(rt_product(&a, &Tensor3::zeros(7, 5, 3), &probs_uniform(8), 3, 4).is_err());
}

#[test]
fn rt_product_is_deterministic() {
    let a = gen_gaussian::<f64>(6, 30, 3, 5);
    let p = probs_norm_a(&a, 1.0).unwrap();
    let at = t_transpose(&a);
    let (x, px) = rt_product(&a, &at, &p, 7, 99).unwrap();
    let (y, py) = rt_product(&a, &at, &p, 7, 99).unwrap();
    assert_eq!(px, py);
    assert_eq!(x, y);
}

fn mean_frobenius_gap(probs: &[f64], a: &Tensor3f64, b: &Tensor3f64, c: usize) -> f64 {
    let exact = t_product(a, b).unwrap();
    (0..200u64)
        .map(|s| (&exact - &rt_product(a, b, probs, c, s).unwrap().0).frob_norm())
        .sum::<f64>()
        / 200.0
}

#[test]
fn frobenius_bound_for_both_families() {
    let a = gen_gaussian::<f64>(50, 40, 4, 21);
    let b = gen_gaussian::<f64>(40, 30, 4, 22);
    let c = 20;
    let bound = a.frob_norm() * b.frob_norm() / (c as f64).sqrt();
    assert!(mean_frobenius_gap(&probs_norm_product(&a, &b, 1.0).unwrap(), &a, &b, c) <= bound);
    assert!(mean_frobenius_gap(&probs_norm_a(&a, 1.0).unwrap(), &a, &b, c) <= bound);
}

/// Orthonormal `2 × n2 × 4` row basis drawn from the t-SVD of a tall Gaussian tensor.
fn orthonormal_rows(n2: usize, seed: u64) -> Tensor3f64 {
    let g = gen_gaussian::<f64>(n2, 2, 4, seed);
    t_transpose(&t_svd(&g).unwrap().u)
}

#[test]
fn spectral_bound_on_gram_product() {
    let (r, eps, delta) = (2, 0.5, 0.1);
    let c = leverage_slice_count(r, 1.0, delta, eps);
    let a = orthonormal_rows(20_000, 3);
    let p = probs_norm_a(&a, 1.0).unwrap();
    let gram = t_product(&a, &t_transpose(&a)).unwrap();
    let scale = fourier_singular_values(&a).unwrap().iter().map(|s| s[0] * s[0]).fold(0.0, f64::max);
    let hits = (0..100u64)
        .filter(|&s| {
            let plan = draw_plan(&p, c, s).unwrap();
            let cs = a.gather_lateral_scaled(&plan.indices, Some(&plan.scales)).unwrap();
            let approx = t_product(&cs, &t_transpose(&cs)).unwrap();
            spectral_norm(&(&gram - &approx)).unwrap() <= eps / 2.0 * scale
        })
        .count();
    assert!(hits as f64 >= 100.0 * ((1.0 - delta) - 0.05), "hits {hits}");
}
