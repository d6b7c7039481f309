//! Seeded synthetic tensors for experiments and tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, TensorError};
use crate::ops::t_product;
use crate::robust::{corrupt_salt_pepper, ObservationMask};
use crate::sampling::rng_from_seed;
use crate::scalar::Scalar;
use crate::tensor::Tensor3;

fn normal_tensor<T: Scalar>(rng: &mut impl Rng, n1: usize, n2: usize, n3: usize) -> Tensor3<T> {
    Tensor3::from_fn(n1, n2, n3, |_, _, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Standard-normal tensor.
pub fn gen_gaussian<T: Scalar>(n1: usize, n2: usize, n3: usize, seed: u64) -> Tensor3<T> {
    normal_tensor(&mut rng_from_seed(seed), n1, n2, n3)
}

/// `clean = A * B` with standard-normal `A: n1×r×n3`, `B: r×n2×n3`, and
/// `noisy = clean + N` where Gaussian `N` has `‖N‖_F = ratio ‖clean‖_F`.
/// Returns `(noisy, clean)`.
pub fn gen_lowrank<T: Scalar>(
    n1: usize,
    n2: usize,
    n3: usize,
    r: usize,
    noise_frob_ratio: f64,
    seed: u64,
) -> Result<(Tensor3<T>, Tensor3<T>)> {
    if r == 0 || r > n1.min(n2) {
        return Err(TensorError::RankTooLarge { rank: r, max: n1.min(n2) });
    }
    if !(noise_frob_ratio >= 0.0) {
        return Err(TensorError::InvalidParameter("noise ratio must be nonnegative".into()));
    }
    let mut rng = rng_from_seed(seed);
    let a = normal_tensor::<T>(&mut rng, n1, r, n3);
    let b = normal_tensor::<T>(&mut rng, r, n2, n3);
    let clean = t_product(&a, &b)?;
    if noise_frob_ratio == 0.0 {
        return Ok((clean.clone(), clean));
    }
    let noise = normal_tensor::<T>(&mut rng, n1, n2, n3);
    let s = T::lit(noise_frob_ratio) * clean.frob_norm() / noise.frob_norm();
    let noisy = clean.zip_map(&noise, |c, e| c + s * e);
    Ok((noisy, clean))
}

/// Sparse tensor whose frontal slices share one support: each entry of the
/// first slice is kept with probability `density`, and every slice draws
/// fresh standard-normal values on that support.
pub fn gen_sparse_replicated<T: Scalar>(n1: usize, n2: usize, n3: usize, density: f64, seed: u64) -> Result<Tensor3<T>> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(TensorError::InvalidParameter(format!("density {density} outside (0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let support: Vec<bool> = (0..n1 * n2).map(|_| rng.random::<f64>() < density).collect();
    let mut data = Vec::with_capacity(n1 * n2 * n3);
    for _ in 0..n3 {
        for &on in &support {
            data.push(if on { T::lit(rng.sample::<f64, _>(StandardNormal)) } else { T::zero() });
        }
    }
    Tensor3::new((n1, n2, n3), data)
}

/// Robust PCA test instance: a rank-`r` product rescaled by `1/sqrt(r n3)`
/// so entries have unit variance, with a `fraction` of entries replaced by
/// `±magnitude`. Returns `(observed, clean, corrupted positions)`.
pub fn gen_rpca_instance<T: Scalar>(
    n1: usize,
    n2: usize,
    n3: usize,
    r: usize,
    fraction: f64,
    magnitude: f64,
    seed: u64,
) -> Result<(Tensor3<T>, Tensor3<T>, ObservationMask)> {
    let (_, clean) = gen_lowrank::<T>(n1, n2, n3, r, 0.0, seed)?;
    let clean = clean.scale(T::one() / T::from_usize(r * n3).expect("size representable").sqrt());
    let (observed, mask) = corrupt_salt_pepper(&clean, fraction, T::lit(magnitude), seed.wrapping_add(1))?;
    Ok((observed, clean, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowrank_noise_ratio() {
        let (noisy, clean) = gen_lowrank::<f64>(8, 6, 3, 2, 0.25, 4).unwrap();
        let ratio = (&noisy - &clean).frob_norm() / clean.frob_norm();
        assert!((ratio - 0.25).abs() < 1e-12);
        let (n0, c0) = gen_lowrank::<f64>(8, 6, 3, 2, 0.0, 4).unwrap();
        assert_eq!(n0, c0);
        assert!(gen_lowrank::<f64>(3, 6, 3, 4, 0.0, 4).is_err());
    }

    #[test]
    fn replicated_support() {
        let x = gen_sparse_replicated::<f64>(10, 12, 4, 0.3, 2).unwrap();
        for i in 0..10 {
            for j in 0..12 {
                let on = x[(i, j, 0)] != 0.0;
                for k in 1..4 {
                    assert_eq!(x[(i, j, k)] != 0.0, on);
                }
            }
        }
        let dense = gen_sparse_replicated::<f64>(5, 5, 2, 1.0, 2).unwrap();
        assert!(dense.data().iter().all(|&v| v != 0.0));
    }
}
