//! Slice sampling: probability distributions over lateral or horizontal
//! slices, seeded Bernoulli and without-replacement selection, and the
//! randomized t-product built on them.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, TensorError};
use crate::linalg::{default_pinv_rtol, slice_svd};
use crate::ops::{check_product_dims, t_product};
use crate::scalar::{cplx, Scalar};
use crate::spectral::{dft3, is_self_conjugate, map_half, CMatrix};
use crate::tensor::Tensor3;

/// Extra draws attempted by [`draw_plan`] when a draw selects nothing.
pub const EMPTY_PLAN_REDRAWS: u64 = 8;

/// Seeded generator used for every random choice in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `stream` of the generator seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbKind {
    Uniform,
    NormProduct,
    NormA,
    LateralLeverage,
    HorizontalLeverage,
    ApproxLeverage,
}

impl ProbKind {
    pub fn is_leverage(self) -> bool {
        matches!(self, Self::LateralLeverage | Self::HorizontalLeverage | Self::ApproxLeverage)
    }
}

/// Which sampling distribution to use. `beta` is the slack factor of the
/// sample-size formulas; the distributions themselves are always the
/// canonical `beta = 1` ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbSpec {
    pub kind: ProbKind,
    pub beta: f64,
    pub rank: Option<usize>,
}

impl ProbSpec {
    pub fn new(kind: ProbKind, beta: f64, rank: Option<usize>) -> Result<Self> {
        let spec = Self { kind, beta, rank };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform() -> Self {
        Self { kind: ProbKind::Uniform, beta: 1.0, rank: None }
    }

    pub fn norm_product() -> Self {
        Self { kind: ProbKind::NormProduct, beta: 1.0, rank: None }
    }

    pub fn norm_a() -> Self {
        Self { kind: ProbKind::NormA, beta: 1.0, rank: None }
    }

    pub fn lateral_leverage(r: usize) -> Self {
        Self { kind: ProbKind::LateralLeverage, beta: 1.0, rank: Some(r) }
    }

    pub fn horizontal_leverage(r: usize) -> Self {
        Self { kind: ProbKind::HorizontalLeverage, beta: 1.0, rank: Some(r) }
    }

    pub fn approx_leverage(r: usize) -> Self {
        Self { kind: ProbKind::ApproxLeverage, beta: 1.0, rank: Some(r) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(TensorError::InvalidParameter(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        match (self.kind.is_leverage(), self.rank) {
            (true, None) => Err(TensorError::InvalidParameter(format!("{:?} needs a rank", self.kind))),
            (true, Some(0)) => Err(TensorError::InvalidParameter("rank must be positive".into())),
            (false, Some(_)) => Err(TensorError::InvalidParameter(format!("{:?} takes no rank", self.kind))),
            _ => Ok(()),
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    ProbSpec::new(ProbKind::Uniform, beta, None).map(|_| ())
}

fn normalize<T: Scalar>(w: Vec<T>, what: &str) -> Result<Vec<T>> {
    let total = w.iter().fold(T::zero(), |a, &b| a + b);
    if !(total > T::zero()) || !total.is_finite_val() {
        return Err(TensorError::DegenerateInput(format!("{what}: all slice weights are zero")));
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Uniform distribution over `n` slices.
pub fn probs_uniform<T: Scalar>(n: usize) -> Vec<T> {
    let p = T::one() / T::from_usize(n).expect("length representable");
    vec![p; n]
}

/// `p_i ∝ ‖A(:, i, :)‖_F · ‖B(i, :, :)‖_F`, the distribution that uses both
/// factors of a product.
pub fn probs_norm_product<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>, beta: f64) -> Result<Vec<T>> {
    check_beta(beta)?;
    if a.n2() != b.n1() {
        return Err(TensorError::DimMismatch { op: "probs_norm_product", left: a.dims(), right: b.dims() });
    }
    let w = a
        .lateral_norms_sq()
        .into_iter()
        .zip(b.horizontal_norms_sq())
        .map(|(x, y)| (x * y).sqrt())
        .collect();
    normalize(w, "probs_norm_product")
}

/// `p_i = ‖A(:, i, :)‖_F² / ‖A‖_F²`.
pub fn probs_norm_a<T: Scalar>(a: &Tensor3<T>, beta: f64) -> Result<Vec<T>> {
    check_beta(beta)?;
    normalize(a.lateral_norms_sq(), "probs_norm_a")
}

/// Squared row norms of the Fourier slices of the first `width` lateral
/// slices of `basis`, divided by `width * n3`, after checking orthonormality.
fn orthonormal_row_scores<T: Scalar>(basis: &Tensor3<T>, width: usize) -> Result<Vec<T>> {
    if width == 0 || width > basis.n2() {
        return Err(TensorError::RankTooLarge { rank: width, max: basis.n2() });
    }
    let idx: Vec<usize> = (0..width).collect();
    let b = basis.gather_lateral(&idx)?;
    let (n, _, n3) = b.dims();
    let bh = dft3(&b);
    let id = CMatrix::<T>::identity(width, width);
    let per_slice = map_half(n3, |k| {
        let s = bh.slice(k);
        let dev = (s.adjoint() * s - &id).iter().fold(T::zero(), |m, z| {
            let a = z.norm_sqr().sqrt();
            if a > m { a } else { m }
        });
        let rows: Vec<T> = (0..n).map(|i| s.row(i).iter().fold(T::zero(), |a, z| a + z.norm_sqr())).collect();
        (dev, rows)
    });
    let mut worst = T::zero();
    let mut scores = vec![T::zero(); n];
    for (k, (dev, rows)) in per_slice.into_iter().enumerate() {
        if dev > worst {
            worst = dev;
        }
        let w = if is_self_conjugate(k, n3) { T::one() } else { T::lit(2.0) };
        for (acc, v) in scores.iter_mut().zip(rows) {
            *acc += w * v;
        }
    }
    if worst > T::tol(1e-8) {
        return Err(TensorError::NotOrthonormal(worst.as_f64()));
    }
    let denom = T::from_usize(width * n3).expect("size representable");
    Ok(scores.into_iter().map(|v| v / denom).collect())
}

/// Leverage probabilities of the lateral slices of a source tensor from the
/// first `r` columns of its right singular tensor `v` (`n2 × ≥r × n3`):
/// `p_i = ‖V̂(i, :, :)‖_F² / (r * n3)`.
pub fn lateral_leverage<T: Scalar>(v: &Tensor3<T>, r: usize, beta: f64) -> Result<Vec<T>> {
    check_beta(beta)?;
    orthonormal_row_scores(v, r)
}

/// Leverage probabilities of horizontal slices from a left basis `u`
/// (`n1 × c × n3`): `p_i = ‖Û(i, :, :)‖_F² / (c * n3)`.
pub fn horizontal_leverage<T: Scalar>(u: &Tensor3<T>, c: usize, beta: f64) -> Result<Vec<T>> {
    check_beta(beta)?;
    orthonormal_row_scores(u, c)
}

/// Randomized estimate of the lateral leverage scores of `x` for rank `r`.
///
/// Each Fourier slice is sketched from the right by a seeded Gaussian matrix
/// with `sketch_cols` columns; the top `r` right singular vectors are then
/// recovered inside the sketched range.
pub fn approx_leverage<T: Scalar>(x: &Tensor3<T>, r: usize, sketch_cols: usize, seed: u64) -> Result<Vec<T>> {
    let (n1, n2, n3) = x.dims();
    if r == 0 || r > n1.min(n2) {
        return Err(TensorError::RankTooLarge { rank: r, max: n1.min(n2) });
    }
    if sketch_cols < r {
        return Err(TensorError::InvalidParameter(format!("sketch_cols {sketch_cols} below rank {r}")));
    }
    let s = sketch_cols.min(n2);
    let xh = dft3(x);
    let per_slice = map_half(n3, |k| -> Result<Vec<T>> {
        let mut rng = rng_stream(seed, k as u64 + 1);
        let omega = DMatrix::<Complex<T>>::from_fn(n1, s, |_, _| {
            let g: f64 = rng.sample(StandardNormal);
            cplx(T::lit(g))
        });
        let xt = xh.slice(k).adjoint();
        let y = &xt * omega;
        let ysvd = slice_svd(k, &y, false)?;
        let rank = ysvd.rank_above(default_pinv_rtol::<T>(n2, s) * ysvd.sigma_max());
        if rank < r {
            return Err(TensorError::SketchRankDeficient { slice: k, rank, wanted: r });
        }
        let q = ysvd.u.columns(0, rank).into_owned();
        let b = q.adjoint() * &xt;
        let bsvd = slice_svd(k, &b, false)?;
        let basis = q * bsvd.u.columns(0, r);
        Ok((0..n2).map(|i| basis.row(i).iter().fold(T::zero(), |a, z| a + z.norm_sqr())).collect())
    });
    let mut scores = vec![T::zero(); n2];
    for (k, rows) in per_slice.into_iter().enumerate() {
        let w = if is_self_conjugate(k, n3) { T::one() } else { T::lit(2.0) };
        for (acc, v) in scores.iter_mut().zip(rows?) {
            *acc += w * v;
        }
    }
    let denom = T::from_usize(r * n3).expect("size representable");
    Ok(scores.into_iter().map(|v| v / denom).collect())
}

/// Indices chosen from a population together with their rescaling factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan<T> {
    pub source_len: usize,
    /// Strictly increasing selected indices.
    pub indices: Vec<usize>,
    pub scales: Vec<T>,
    /// Distribution the plan was drawn from.
    pub probs: Vec<T>,
    /// Seed of the draw that produced the plan.
    pub seed: u64,
}

impl<T: Scalar> SamplingPlan<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Every index of the population, unscaled.
    pub fn full(source_len: usize) -> Self {
        Self {
            source_len,
            indices: (0..source_len).collect(),
            scales: vec![T::one(); source_len],
            probs: probs_uniform(source_len),
            seed: 0,
        }
    }
}

fn check_probs<T: Scalar>(probs: &[T]) -> Result<()> {
    if probs.is_empty() {
        return Err(TensorError::DegenerateInput("empty probability vector".into()));
    }
    if let Some(pos) = probs.iter().position(|p| !p.is_finite_val() || *p < T::zero()) {
        return Err(TensorError::InvalidParameter(format!("probability {pos} is negative or not finite")));
    }
    let total = probs.iter().fold(T::zero(), |a, &b| a + b);
    if (total - T::one()).abs_val() > T::tol(1e-6) {
        return Err(TensorError::InvalidParameter(format!("probabilities sum to {}", total.as_f64())));
    }
    Ok(())
}

fn bernoulli_once<T: Scalar>(probs: &[T], c: f64, seed: u64) -> SamplingPlan<T> {
    let mut rng = rng_from_seed(seed);
    let mut indices = Vec::new();
    let mut scales = Vec::new();
    for (i, p) in probs.iter().enumerate() {
        let q = (c * p.as_f64()).min(1.0);
        let u: f64 = rng.random();
        if u < q {
            indices.push(i);
            scales.push(T::one() / T::lit(q.sqrt()));
        }
    }
    SamplingPlan { source_len: probs.len(), indices, scales, probs: probs.to_vec(), seed }
}

/// Keeps index `i` independently with probability `min(1, c p_i)` and scale
/// `1 / min(1, sqrt(c p_i))`. Uniforms are consumed in index order from the
/// generator seeded with `seed`; an empty draw is retried with `seed + 1`,
/// `seed + 2`, … up to [`EMPTY_PLAN_REDRAWS`] times.
pub fn draw_plan<T: Scalar>(probs: &[T], c: usize, seed: u64) -> Result<SamplingPlan<T>> {
    check_probs(probs)?;
    if c == 0 {
        return Err(TensorError::InvalidParameter("sample count must be at least 1".into()));
    }
    for attempt in 0..=EMPTY_PLAN_REDRAWS {
        let plan = bernoulli_once(probs, c as f64, seed.wrapping_add(attempt));
        if !plan.is_empty() {
            return Ok(plan);
        }
        log::debug!("empty sampling plan for seed {}, redrawing", seed.wrapping_add(attempt));
    }
    Err(TensorError::EmptyPlan { attempts: EMPTY_PLAN_REDRAWS as usize + 1 })
}

/// Draws `c` distinct indices with probability proportional to `probs`,
/// one at a time among those not yet chosen. Scales are all one and the
/// indices are returned in ascending order. Zero-probability indices are
/// never chosen.
pub fn draw_without_replacement<T: Scalar>(probs: &[T], c: usize, seed: u64) -> Result<SamplingPlan<T>> {
    check_probs(probs)?;
    let support = probs.iter().filter(|&&p| p > T::zero()).count();
    if c == 0 || c > support {
        return Err(TensorError::InsufficientSupport { support, requested: c });
    }
    let mut rng = rng_from_seed(seed);
    let mut w: Vec<f64> = probs.iter().map(|p| p.as_f64()).collect();
    let mut indices = Vec::with_capacity(c);
    for _ in 0..c {
        let total: f64 = w.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &wi) in w.iter().enumerate() {
            if wi <= 0.0 {
                continue;
            }
            acc += wi;
            pick = Some(i);
            if target < acc {
                break;
            }
        }
        let i = pick.expect("positive support remains");
        w[i] = 0.0;
        indices.push(i);
    }
    indices.sort_unstable();
    Ok(SamplingPlan { source_len: probs.len(), indices, scales: vec![T::one(); c], probs: probs.to_vec(), seed })
}

/// Randomized t-product `A * B ≈ C * R`, where `C` holds sampled and rescaled
/// lateral slices of `a` and `R` the matching horizontal slices of `b`.
pub fn rt_product<T: Scalar>(
    a: &Tensor3<T>,
    b: &Tensor3<T>,
    probs: &[T],
    c: usize,
    seed: u64,
) -> Result<(Tensor3<T>, SamplingPlan<T>)> {
    check_product_dims("rt_product", a, b)?;
    if probs.len() != a.n2() {
        return Err(TensorError::LengthMismatch { expected: a.n2(), got: probs.len() });
    }
    let plan = draw_plan(probs, c, seed)?;
    let cs = a.gather_lateral_scaled(&plan.indices, Some(&plan.scales))?;
    let rs = b.gather_horizontal_scaled(&plan.indices, Some(&plan.scales))?;
    Ok((t_product(&cs, &rs)?, plan))
}

/// Slice count `48 r ln(4r / (beta delta)) / (beta eps²)` under which a
/// leverage-sampled orthonormal basis stays nearly orthonormal.
pub fn leverage_slice_count(r: usize, beta: f64, delta: f64, eps: f64) -> usize {
    let r = r as f64;
    (48.0 * r * (4.0 * r / (beta * delta)).ln() / (beta * eps * eps)).ceil() as usize
}
