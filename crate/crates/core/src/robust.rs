//! Tubal robust PCA and tensor completion by ADMM, the singular value
//! thresholding operator, and the CUR-accelerated pipeline that runs the
//! solver on sampled slices only.

use std::time::Instant;

use rand::Rng;

use crate::decomp::{left_factor_scores, HORIZONTAL_SEED_OFFSET};
use crate::error::{Result, TensorError};
use crate::linalg::slice_svd;
use crate::ops::t_product3;
use crate::sampling::{
    approx_leverage, draw_plan, draw_without_replacement, probs_norm_a, probs_uniform, rng_from_seed, SamplingPlan,
};
use crate::scalar::Scalar;
use crate::spectral::{dft3, idft3_unchecked, is_self_conjugate, map_half, SpectralTensor};
use crate::tensor::Tensor3;
use crate::tsvd::{t_pinv_capped, tubal_rank};

/// Solver parameters. `lambda = None` selects `1 / sqrt(max(n1, n2) n3)` for
/// whatever tensor the solver is applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig<T> {
    pub lambda: Option<T>,
    pub rho: T,
    pub mu0: T,
    pub mu_max: T,
    pub eps_abs: T,
    pub max_iters: usize,
    pub time_limit_s: Option<f64>,
}

impl<T: Scalar> Default for AdmmConfig<T> {
    fn default() -> Self {
        Self {
            lambda: None,
            rho: T::lit(1.1),
            mu0: T::lit(1e-3),
            mu_max: T::lit(1e10),
            eps_abs: T::lit(1e-8),
            max_iters: 1000,
            time_limit_s: None,
        }
    }
}

impl<T: Scalar> AdmmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(TensorError::InvalidParameter(what.to_string()));
        if let Some(l) = self.lambda {
            if !(l > T::zero()) || !l.is_finite_val() {
                return bad("lambda must be positive");
            }
        }
        if !(self.rho > T::one()) {
            return bad("rho must exceed 1");
        }
        if !(self.mu0 > T::zero()) || !(self.mu_max >= self.mu0) {
            return bad("need 0 < mu0 <= mu_max");
        }
        if !(self.eps_abs > T::zero()) {
            return bad("eps_abs must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if let Some(t) = self.time_limit_s {
            if !(t > 0.0) {
                return bad("time limit must be positive");
            }
        }
        Ok(())
    }

    /// The regularization weight used on a tensor of the given dimensions.
    pub fn lambda_for(&self, dims: (usize, usize, usize)) -> T {
        self.lambda.unwrap_or_else(|| default_lambda(dims))
    }
}

/// `1 / sqrt(max(n1, n2) n3)`.
pub fn default_lambda<T: Scalar>(dims: (usize, usize, usize)) -> T {
    T::one() / T::from_usize(dims.0.max(dims.1) * dims.2).expect("size representable").sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    TimeLimit,
}

/// One iteration's `(‖ΔL‖_∞, ‖ΔE‖_∞, ‖L + E − X‖_∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals<T> {
    pub dl: T,
    pub de: T,
    pub feasibility: T,
}

#[derive(Debug, Clone)]
pub struct AdmmReport<T: Scalar> {
    pub l_hat: Tensor3<T>,
    pub e_hat: Tensor3<T>,
    pub iters: usize,
    pub residual_history: Vec<Residuals<T>>,
    /// `tnn(L) + λ‖E‖_1` for robust PCA, `tnn(L)` for completion.
    pub objective_history: Vec<T>,
    pub stop_reason: StopReason,
    pub lambda: T,
}

/// Boolean pattern over the entries of a tensor, stored in tensor layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    dims: (usize, usize, usize),
    bits: Vec<bool>,
    count: usize,
}

impl ObservationMask {
    pub fn new(dims: (usize, usize, usize), bits: Vec<bool>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(TensorError::InvalidDims(dims));
        }
        let expected = dims.0 * dims.1 * dims.2;
        if bits.len() != expected {
            return Err(TensorError::LengthMismatch { expected, got: bits.len() });
        }
        let count = bits.iter().filter(|&&b| b).count();
        Ok(Self { dims, bits, count })
    }

    pub fn full(dims: (usize, usize, usize)) -> Result<Self> {
        Self::new(dims, vec![true; dims.0 * dims.1 * dims.2])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.bits[i + self.dims.0 * (j + self.dims.1 * k)]
    }

    pub fn fraction_observed(&self) -> f64 {
        self.count as f64 / self.bits.len() as f64
    }

    /// Zero-fills the entries outside the mask.
    pub fn apply<T: Scalar>(&self, x: &Tensor3<T>) -> Result<Tensor3<T>> {
        self.check(x.dims())?;
        let data = x.data().iter().zip(&self.bits).map(|(&v, &b)| if b { v } else { T::zero() }).collect();
        Tensor3::new(x.dims(), data)
    }

    pub fn gather_lateral(&self, indices: &[usize]) -> Result<Self> {
        let (n1, n2, n3) = self.dims;
        check_indices(indices, n2)?;
        let mut bits = Vec::with_capacity(n1 * indices.len() * n3);
        for k in 0..n3 {
            for &j in indices {
                let start = n1 * (j + n2 * k);
                bits.extend_from_slice(&self.bits[start..start + n1]);
            }
        }
        Self::new((n1, indices.len(), n3), bits)
    }

    pub fn gather_horizontal(&self, indices: &[usize]) -> Result<Self> {
        let (n1, n2, n3) = self.dims;
        check_indices(indices, n1)?;
        let mut bits = Vec::with_capacity(indices.len() * n2 * n3);
        for col in self.bits.chunks_exact(n1) {
            bits.extend(indices.iter().map(|&i| col[i]));
        }
        Self::new((indices.len(), n2, n3), bits)
    }

    fn check(&self, dims: (usize, usize, usize)) -> Result<()> {
        if dims != self.dims {
            return Err(TensorError::DimMismatch { op: "mask", left: self.dims, right: dims });
        }
        Ok(())
    }
}

fn check_indices(indices: &[usize], len: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(TensorError::DegenerateInput("empty slice selection".into()));
    }
    match indices.iter().find(|&&i| i >= len) {
        Some(&index) => Err(TensorError::IndexOutOfRange { index, len }),
        None => Ok(()),
    }
}

/// Singular value thresholding together with the tensor nuclear norm of the result.
fn svt_with_norm<T: Scalar>(m: &Tensor3<T>, tau: T) -> Result<(Tensor3<T>, T)> {
    let n3 = m.n3();
    let mh = dft3(m);
    let half = map_half(n3, |k| {
        let svd = slice_svd(k, mh.slice(k), is_self_conjugate(k, n3))?;
        let keep = svd.rank_above(tau);
        let nuc = svd.s[..keep].iter().fold(T::zero(), |a, &s| a + (s - tau));
        Ok((svd.reconstruct(keep, |s| s - tau), nuc))
    });
    let mut slices = Vec::with_capacity(half.len());
    let mut total = T::zero();
    for (k, item) in half.into_iter().enumerate() {
        let (s, nuc) = item?;
        total += if is_self_conjugate(k, n3) { nuc } else { T::lit(2.0) * nuc };
        slices.push(s);
    }
    let out = idft3_unchecked(&SpectralTensor::from_half(n3, slices));
    Ok((out, total / T::from_usize(n3).expect("n3 representable")))
}

/// Proximal map of `tau * tnn`: every Fourier singular value is shrunk by `tau`.
pub fn t_svt<T: Scalar>(m: &Tensor3<T>, tau: T) -> Result<Tensor3<T>> {
    if tau < T::zero() {
        return Err(TensorError::InvalidParameter("threshold must be nonnegative".into()));
    }
    svt_with_norm(m, tau).map(|(t, _)| t)
}

/// Entrywise `sign(x) max(|x| − tau, 0)`.
pub fn soft_threshold<T: Scalar>(m: &Tensor3<T>, tau: T) -> Tensor3<T> {
    m.map(|v| {
        let a = v.abs_val() - tau;
        if a > T::zero() {
            if v > T::zero() { a } else { -a }
        } else {
            T::zero()
        }
    })
}

/// Which E-update the solver performs.
enum Sparse<'a> {
    L1,
    Unobserved(&'a ObservationMask),
}

fn admm<T: Scalar>(x: &Tensor3<T>, cfg: &AdmmConfig<T>, sparse: Sparse<'_>) -> Result<AdmmReport<T>> {
    cfg.validate()?;
    let lambda = cfg.lambda_for(x.dims());
    let (n1, n2, n3) = x.dims();
    let start = Instant::now();
    let mut l = Tensor3::zeros(n1, n2, n3);
    let mut e = Tensor3::zeros(n1, n2, n3);
    let mut y = Tensor3::zeros(n1, n2, n3);
    let mut mu = cfg.mu0;
    let mut residual_history = Vec::new();
    let mut objective_history = Vec::new();
    let mut stop_reason = StopReason::MaxIters;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        let inv_mu = T::one() / mu;
        let (l_new, nuc) = svt_with_norm(&x.zip_map(&e, |a, b| a - b).zip_map(&y, |a, b| a - b * inv_mu), inv_mu)?;
        let target = x.zip_map(&l_new, |a, b| a - b).zip_map(&y, |a, b| a - b * inv_mu);
        let (e_new, objective) = match sparse {
            Sparse::L1 => {
                let e_new = soft_threshold(&target, lambda * inv_mu);
                let obj = nuc + lambda * e_new.l1_norm();
                (e_new, obj)
            }
            Sparse::Unobserved(mask) => {
                let data = target.data().iter().zip(mask.bits()).map(|(&v, &b)| if b { T::zero() } else { v }).collect();
                (Tensor3::new(x.dims(), data).map_err(|_| TensorError::NumericalDivergence { iter: iters })?, nuc)
            }
        };
        let resid = &(&l_new + &e_new) - x;
        y = y.zip_map(&resid, |a, b| a + mu * b);
        let r = Residuals {
            dl: (&l_new - &l).max_abs(),
            de: (&e_new - &e).max_abs(),
            feasibility: resid.max_abs(),
        };
        if !(r.dl.is_finite_val() && r.de.is_finite_val() && r.feasibility.is_finite_val())
            || !objective.is_finite_val()
            || !y.is_finite()
        {
            return Err(TensorError::NumericalDivergence { iter: iters });
        }
        l = l_new;
        e = e_new;
        residual_history.push(r);
        objective_history.push(objective);
        mu = if cfg.rho * mu < cfg.mu_max { cfg.rho * mu } else { cfg.mu_max };
        if r.dl <= cfg.eps_abs && r.de <= cfg.eps_abs && r.feasibility <= cfg.eps_abs {
            stop_reason = StopReason::Converged;
            break;
        }
        if cfg.time_limit_s.is_some_and(|t| start.elapsed().as_secs_f64() > t) {
            stop_reason = StopReason::TimeLimit;
            break;
        }
    }
    log::debug!("admm stopped after {iters} iterations: {stop_reason:?}");
    Ok(AdmmReport { l_hat: l, e_hat: e, iters, residual_history, objective_history, stop_reason, lambda })
}

/// Robust PCA `min tnn(L) + λ‖E‖_1  s.t.  L + E = X`.
pub fn admm_rpca<T: Scalar>(x: &Tensor3<T>, cfg: &AdmmConfig<T>) -> Result<AdmmReport<T>> {
    admm(x, cfg, Sparse::L1)
}

/// Tensor completion `min tnn(L)  s.t.  P_Ω(L) = P_Ω(X)`. `x_observed` is
/// expected to be zero outside the mask; `E` absorbs the unobserved entries.
pub fn admm_complete<T: Scalar>(
    x_observed: &Tensor3<T>,
    mask: &ObservationMask,
    cfg: &AdmmConfig<T>,
) -> Result<AdmmReport<T>> {
    mask.check(x_observed.dims())?;
    if mask.count() == 0 {
        return Err(TensorError::DegenerateInput("mask observes no entries".into()));
    }
    let x = mask.apply(x_observed)?;
    admm(&x, cfg, Sparse::Unobserved(mask))
}

/// Sets a seeded Bernoulli(`fraction`) subset of entries to `±magnitude`
/// with a fair sign, returning the corrupted tensor and the corrupted positions.
pub fn corrupt_salt_pepper<T: Scalar>(
    x: &Tensor3<T>,
    fraction: f64,
    magnitude: T,
    seed: u64,
) -> Result<(Tensor3<T>, ObservationMask)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(TensorError::InvalidParameter(format!("fraction {fraction} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let mut bits = Vec::with_capacity(x.len());
    let data = x
        .data()
        .iter()
        .map(|&v| {
            let hit = rng.random::<f64>() < fraction;
            bits.push(hit);
            if !hit {
                v
            } else if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    Ok((Tensor3::new(x.dims(), data)?, ObservationMask::new(x.dims(), bits)?))
}

/// Independent seeded Bernoulli(`rate`) observation pattern.
pub fn make_mask(dims: (usize, usize, usize), rate: f64, seed: u64) -> Result<ObservationMask> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(TensorError::InvalidParameter(format!("rate {rate} outside (0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let bits = (0..dims.0 * dims.1 * dims.2).map(|_| rng.random::<f64>() < rate).collect();
    ObservationMask::new(dims, bits)
}

#[derive(Debug, Clone)]
pub enum CurProblem {
    Rpca,
    Complete(ObservationMask),
}

/// How CUR t-NN picks its slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurSampling {
    /// Bernoulli sampling at rates `c` and `l` driven by leverage-type scores.
    Leverage,
    /// `c` lateral and `l` horizontal slices uniformly without replacement.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct CurTnnResult<T: Scalar> {
    pub l_tilde: Tensor3<T>,
    pub c_tilde: Tensor3<T>,
    pub u_tilde: Tensor3<T>,
    pub r_tilde: Tensor3<T>,
    pub lateral_plan: SamplingPlan<T>,
    pub horizontal_plan: SamplingPlan<T>,
    pub c_report: AdmmReport<T>,
    pub r_report: AdmmReport<T>,
    /// Tubal rank of the intersection `W̃`.
    pub intersection_rank: usize,
    /// True when `W̃` has tubal rank below `min(r, c', l')`.
    pub intersection_rank_deficient: bool,
}

impl<T: Scalar> CurTnnResult<T> {
    pub fn iters(&self) -> usize {
        self.c_report.iters + self.r_report.iters
    }
}

/// CUR t-NN with leverage-type sampling; see [`cur_tnn_with`].
pub fn cur_tnn<T: Scalar>(
    x: &Tensor3<T>,
    r: usize,
    c: usize,
    l: usize,
    cfg: &AdmmConfig<T>,
    seed: u64,
    problem: &CurProblem,
) -> Result<CurTnnResult<T>> {
    cur_tnn_with(x, r, c, l, cfg, seed, problem, CurSampling::Leverage)
}

/// CUR t-NN: solve on a lateral sample `C` and a horizontal sample `R`
/// only, then join them as `C̃ * W̃† * R̃` where `W̃` holds the sampled
/// horizontal slices of `C̃`. The full tensor is never decomposed.
///
/// With [`CurSampling::Leverage`], lateral scores are randomized leverage
/// estimates of `x` for robust PCA and squared slice norms of the zero-filled
/// data for completion; horizontal scores come from the top-`r` left
/// singular slices of `C̃`. The sampled slices enter the solver unscaled and
/// `W̃†` keeps at most `r` singular values per Fourier slice.
#[allow(clippy::too_many_arguments)]
pub fn cur_tnn_with<T: Scalar>(
    x: &Tensor3<T>,
    r: usize,
    c: usize,
    l: usize,
    cfg: &AdmmConfig<T>,
    seed: u64,
    problem: &CurProblem,
    sampling: CurSampling,
) -> Result<CurTnnResult<T>> {
    cfg.validate()?;
    let (n1, n2, _) = x.dims();
    if r == 0 || r > n1.min(n2) {
        return Err(TensorError::RankTooLarge { rank: r, max: n1.min(n2) });
    }
    let observed = match problem {
        CurProblem::Rpca => None,
        CurProblem::Complete(mask) => Some(mask.apply(x)?),
    };
    let lateral_plan = match (sampling, &observed) {
        (CurSampling::Uniform, _) => draw_without_replacement(&probs_uniform::<T>(n2), c, seed)?,
        (CurSampling::Leverage, None) => draw_plan(&approx_leverage(x, r, 4 * r, seed)?, c, seed)?,
        (CurSampling::Leverage, Some(xo)) => draw_plan(&probs_norm_a(xo, 1.0)?, c, seed)?,
    };
    let solve = |sub: &Tensor3<T>, mask: Option<ObservationMask>| match mask {
        None => admm_rpca(sub, cfg),
        Some(m) => admm_complete(sub, &m, cfg),
    };
    let sub_mask = |f: &dyn Fn(&ObservationMask) -> Result<ObservationMask>| -> Result<Option<ObservationMask>> {
        match problem {
            CurProblem::Rpca => Ok(None),
            CurProblem::Complete(m) => f(m).map(Some),
        }
    };
    let source = observed.as_ref().unwrap_or(x);

    let c_sub = source.gather_lateral(&lateral_plan.indices)?;
    let c_report = solve(&c_sub, sub_mask(&|m| m.gather_lateral(&lateral_plan.indices))?)?;
    let c_tilde = c_report.l_hat.clone();

    let hseed = seed.wrapping_add(HORIZONTAL_SEED_OFFSET);
    let horizontal_plan = match sampling {
        CurSampling::Uniform => draw_without_replacement(&probs_uniform::<T>(n1), l, hseed)?,
        CurSampling::Leverage => draw_plan(&left_factor_scores(&c_tilde, r, 1.0)?, l, hseed)?,
    };
    let r_sub = source.gather_horizontal(&horizontal_plan.indices)?;
    let r_report = solve(&r_sub, sub_mask(&|m| m.gather_horizontal(&horizontal_plan.indices))?)?;
    let r_tilde = r_report.l_hat.clone();

    let w = c_tilde.gather_horizontal(&horizontal_plan.indices)?;
    let (wl, wc, _) = w.dims();
    let rtol = T::from_usize(wl.max(wc)).expect("size representable") * T::eps();
    let u_tilde = t_pinv_capped(&w, rtol, r)?;
    let intersection_rank = tubal_rank(&w, T::tol(1e-10))?;
    let wanted = r.min(wl).min(wc);
    let intersection_rank_deficient = intersection_rank < wanted;
    if intersection_rank_deficient {
        log::warn!("intersection tensor has tubal rank {intersection_rank}, expected {wanted}");
    }
    let l_tilde = t_product3(&c_tilde, &u_tilde, &r_tilde)?;
    Ok(CurTnnResult {
        l_tilde,
        c_tilde,
        u_tilde,
        r_tilde,
        lateral_plan,
        horizontal_plan,
        c_report,
        r_report,
        intersection_rank,
        intersection_rank_deficient,
    })
}
