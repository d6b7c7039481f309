//! Slice-based low-rank decompositions (t-CX, t-CUR), the truncated t-SVD
//! baseline, coherence diagnostics and error metrics.

use crate::error::{Result, TensorError};
use crate::ops::{t_product, t_product3, t_transpose};
use crate::sampling::{
    approx_leverage, draw_plan, draw_without_replacement, horizontal_leverage, lateral_leverage, probs_norm_a,
    probs_uniform, ProbKind, ProbSpec, SamplingPlan,
};
use crate::scalar::Scalar;
use crate::spectral::dft3;
use crate::tensor::Tensor3;
use crate::tsvd::{default_pinv_tol, fourier_svd, from_slice_fn, spectral_norm, t_pinv, t_project, t_svd, tubal_rank};

/// Seed offset separating the horizontal draw from the lateral one.
pub(crate) const HORIZONTAL_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct CxResult<T: Scalar> {
    /// Sampled and rescaled lateral slices, `n1 × c' × n3`.
    pub c_tensor: Tensor3<T>,
    /// Projection of the input onto the span of `c_tensor`.
    pub approx: Tensor3<T>,
    pub plan: SamplingPlan<T>,
    pub rse: T,
}

#[derive(Debug, Clone)]
pub struct CurResult<T: Scalar> {
    pub c_tensor: Tensor3<T>,
    pub u_tensor: Tensor3<T>,
    pub r_tensor: Tensor3<T>,
    pub lateral_plan: SamplingPlan<T>,
    pub horizontal_plan: SamplingPlan<T>,
    pub approx: Tensor3<T>,
    pub rse: T,
}

impl<T: Scalar> CurResult<T> {
    /// `C * U * R` from the stored factors.
    pub fn recompose(&self) -> Result<Tensor3<T>> {
        t_product3(&self.c_tensor, &self.u_tensor, &self.r_tensor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport<T> {
    pub mu0_u: T,
    pub mu0_v: T,
    pub mu1: T,
    pub r: usize,
    /// `r μ0(V) / n3`.
    pub rho: T,
    /// `c μ0(U) / n3` when a lateral sample size was given.
    pub rho_c: Option<T>,
}

fn check_rank<T: Scalar>(a: &Tensor3<T>, r: usize) -> Result<()> {
    let max = a.n1().min(a.n2());
    if r == 0 || r > max {
        return Err(TensorError::RankTooLarge { rank: r, max });
    }
    Ok(())
}

/// Best tubal rank-`r` approximation: the top `r` singular triplets of every
/// Fourier slice.
pub fn truncated_tsvd<T: Scalar>(a: &Tensor3<T>, r: usize) -> Result<Tensor3<T>> {
    check_rank(a, r)?;
    let svds = fourier_svd(&dft3(a))?;
    Ok(from_slice_fn(a.n3(), |k| svds[k].reconstruct(r, |s| s)))
}

/// Draws the lateral plan used by both decompositions.
fn lateral_plan<T: Scalar>(a: &Tensor3<T>, r: usize, c: usize, probs: &ProbSpec, seed: u64) -> Result<SamplingPlan<T>> {
    probs.validate()?;
    let rank = probs.rank.unwrap_or(r);
    match probs.kind {
        ProbKind::Uniform => draw_without_replacement(&probs_uniform::<T>(a.n2()), c, seed),
        ProbKind::NormA => draw_plan(&probs_norm_a(a, probs.beta)?, c, seed),
        ProbKind::LateralLeverage => {
            check_rank(a, rank)?;
            let v = t_svd(a)?.v;
            draw_plan(&lateral_leverage(&v, rank, probs.beta)?, c, seed)
        }
        ProbKind::ApproxLeverage => draw_plan(&approx_leverage(a, rank, 4 * rank, seed)?, c, seed),
        kind => Err(TensorError::InvalidParameter(format!("{kind:?} cannot score lateral slices"))),
    }
}

/// Randomized t-CX decomposition `A ≈ C * C† * A` from `c` sampled lateral slices.
///
/// `Uniform` draws `c` distinct slices without replacement; the other kinds
/// use independent Bernoulli selection at rate `c`.
pub fn t_cx<T: Scalar>(a: &Tensor3<T>, r: usize, c: usize, probs: &ProbSpec, seed: u64) -> Result<CxResult<T>> {
    check_rank(a, r)?;
    let plan = lateral_plan(a, r, c, probs, seed)?;
    let c_tensor = a.gather_lateral_scaled(&plan.indices, Some(&plan.scales))?;
    let approx = t_project(&c_tensor, a)?;
    let rse = rse_frob(a, &approx)?;
    Ok(CxResult { c_tensor, approx, plan, rse })
}

/// Horizontal leverage scores from the leading left singular slices of a
/// lateral sample.
pub(crate) fn left_factor_scores<T: Scalar>(c_tensor: &Tensor3<T>, r: usize, beta: f64) -> Result<Vec<T>> {
    let svd = t_svd(c_tensor)?;
    let width = r.min(svd.r);
    horizontal_leverage(&svd.u, width, beta)
}

/// Randomized t-CUR decomposition `A ≈ C * U * R`.
///
/// Lateral slices are drawn as in [`t_cx`]. Horizontal slices are drawn
/// uniformly without replacement for `Uniform`, otherwise by the leverage
/// scores of the top-`r` left singular slices of `C`. `U` is the
/// pseudoinverse of the sampled horizontal slices of `C`.
pub fn t_cur<T: Scalar>(
    a: &Tensor3<T>,
    r: usize,
    c: usize,
    l: usize,
    probs: &ProbSpec,
    seed: u64,
) -> Result<CurResult<T>> {
    check_rank(a, r)?;
    let lateral_plan = lateral_plan(a, r, c, probs, seed)?;
    let c_tensor = a.gather_lateral_scaled(&lateral_plan.indices, Some(&lateral_plan.scales))?;
    let hseed = seed.wrapping_add(HORIZONTAL_SEED_OFFSET);
    let horizontal_plan = match probs.kind {
        ProbKind::Uniform => draw_without_replacement(&probs_uniform::<T>(a.n1()), l, hseed)?,
        _ => draw_plan(&left_factor_scores(&c_tensor, r, probs.beta)?, l, hseed)?,
    };
    let hs = Some(horizontal_plan.scales.as_slice());
    let w = c_tensor.gather_horizontal_scaled(&horizontal_plan.indices, hs)?;
    let r_tensor = a.gather_horizontal_scaled(&horizontal_plan.indices, hs)?;
    let u_tensor = t_pinv(&w, default_pinv_tol(&w))?;
    let approx = t_product3(&c_tensor, &u_tensor, &r_tensor)?;
    let rse = rse_frob(a, &approx)?;
    Ok(CurResult { c_tensor, u_tensor, r_tensor, lateral_plan, horizontal_plan, approx, rse })
}

/// `μ0(B) = (n n3 / r) max_i ‖B(i, :, :)‖_F²` for an `n × r × n3` orthonormal basis.
pub fn mu0<T: Scalar>(basis: &Tensor3<T>) -> T {
    let (n, r, n3) = basis.dims();
    let max = basis.horizontal_norms_sq().into_iter().fold(T::zero(), |m, v| if v > m { v } else { m });
    T::from_usize(n * n3).expect("size representable") / T::from_usize(r).expect("size representable") * max
}

/// `μ1 = (n1 n2 n3² / r) ‖U * V^T‖_∞²` for skinny factors `U`, `V` of width `r`.
pub fn mu1<T: Scalar>(u: &Tensor3<T>, v: &Tensor3<T>) -> Result<T> {
    let (n1, r, n3) = u.dims();
    let n2 = v.n1();
    let m = t_product(u, &t_transpose(v))?.max_abs();
    let scale = T::from_usize(n1 * n2 * n3 * n3).expect("size representable") / T::from_usize(r).expect("size representable");
    Ok(scale * m * m)
}

/// Coherence of the rank-`r` singular subspaces of `l`.
pub fn coherence<T: Scalar>(l: &Tensor3<T>, r: usize, c_opt: Option<usize>) -> Result<CoherenceReport<T>> {
    check_rank(l, r)?;
    let tr = tubal_rank(l, T::tol(1e-10))?;
    if tr < r {
        return Err(TensorError::RankTooLarge { rank: r, max: tr });
    }
    let svd = t_svd(l)?.truncate(r)?;
    let mu0_u = mu0(&svd.u);
    let mu0_v = mu0(&svd.v);
    let mu1 = mu1(&svd.u, &svd.v)?;
    let n3 = T::from_usize(l.n3()).expect("n3 representable");
    let rf = T::from_usize(r).expect("rank representable");
    Ok(CoherenceReport {
        mu0_u,
        mu0_v,
        mu1,
        r,
        rho: rf * mu0_v / n3,
        rho_c: c_opt.map(|c| T::from_usize(c).expect("count representable") * mu0_u / n3),
    })
}

/// Slice count `ρ max(ln ρ, 1) ln(1/δ) / ε²` suggested by the uniform-sampling
/// relative error guarantees, rounded up.
pub fn uniform_slice_count(rho: f64, delta: f64, eps: f64) -> usize {
    (rho * rho.ln().max(1.0) * (1.0 / delta).ln() / (eps * eps)).ceil() as usize
}

fn check_gram_dims<T: Scalar>(op: &'static str, exact: &Tensor3<T>, approx: &Tensor3<T>) -> Result<()> {
    if exact.n2() != approx.n2() || exact.n3() != approx.n3() {
        return Err(TensorError::DimMismatch { op, left: exact.dims(), right: approx.dims() });
    }
    Ok(())
}

fn gram_gap<T: Scalar>(exact: &Tensor3<T>, approx: &Tensor3<T>) -> Result<Tensor3<T>> {
    let g = t_product(&t_transpose(exact), exact)?;
    let h = t_product(&t_transpose(approx), approx)?;
    Ok(&g - &h)
}

/// Relative Frobenius error of a sampled Gram product,
/// `‖U^T * U − Ũ^T * Ũ‖_F / ‖U‖_F²`. `approx` holds rescaled horizontal
/// slices of `exact`, so only the last two dimensions need to agree.
pub fn rfe<T: Scalar>(exact: &Tensor3<T>, approx: &Tensor3<T>) -> Result<T> {
    check_gram_dims("rfe", exact, approx)?;
    let denom = exact.frob_norm_sq();
    if !(denom > T::zero()) {
        return Err(TensorError::DegenerateInput("rfe: zero reference tensor".into()));
    }
    Ok(gram_gap(exact, approx)?.frob_norm() / denom)
}

/// Spectral analogue of [`rfe`], `‖U^T * U − Ũ^T * Ũ‖ / ‖U‖²`.
pub fn rse_spec<T: Scalar>(exact: &Tensor3<T>, approx: &Tensor3<T>) -> Result<T> {
    check_gram_dims("rse_spec", exact, approx)?;
    let s = spectral_norm(exact)?;
    if !(s > T::zero()) {
        return Err(TensorError::DegenerateInput("rse_spec: zero reference tensor".into()));
    }
    Ok(spectral_norm(&gram_gap(exact, approx)?)? / (s * s))
}

/// Relative error `‖X − X̃‖_F / ‖X‖_F`.
pub fn rse_frob<T: Scalar>(exact: &Tensor3<T>, approx: &Tensor3<T>) -> Result<T> {
    if exact.dims() != approx.dims() {
        return Err(TensorError::DimMismatch { op: "rse_frob", left: exact.dims(), right: approx.dims() });
    }
    let denom = exact.frob_norm();
    if !(denom > T::zero()) {
        return Err(TensorError::DegenerateInput("rse_frob: zero reference tensor".into()));
    }
    Ok((exact - approx).frob_norm() / denom)
}
