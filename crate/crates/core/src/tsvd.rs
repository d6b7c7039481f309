//! Tubal SVD and the quantities derived from it: ranks, norms,
//! pseudoinverse and projection.

use nalgebra::DMatrix;

use crate::error::{Result, TensorError};
use crate::linalg::{default_pinv_rtol, slice_svd, SliceSvd};
use crate::scalar::{cplx, Scalar};
use crate::spectral::{dft3, half_len, idft3_unchecked, is_self_conjugate, map_half, CMatrix, SpectralTensor};
use crate::tensor::Tensor3;

/// Per-slice SVDs of a conjugate symmetric spectrum. Only the independent
/// half is decomposed; the remaining slices are mirrored by conjugation.
pub(crate) fn fourier_svd<T: Scalar>(xh: &SpectralTensor<T>) -> Result<Vec<SliceSvd<T>>> {
    let n3 = xh.dims().2;
    let half = map_half(n3, |k| slice_svd(k, xh.slice(k), is_self_conjugate(k, n3)));
    let mut out: Vec<SliceSvd<T>> = half.into_iter().collect::<Result<_>>()?;
    for k in half_len(n3)..n3 {
        let src = &out[n3 - k];
        let mirrored = SliceSvd {
            u: src.u.map(|z| z.conj()),
            s: src.s.clone(),
            v: src.v.map(|z| z.conj()),
        };
        out.push(mirrored);
    }
    Ok(out)
}

/// Rebuilds a real tensor from per-slice matrices given for every Fourier index.
pub(crate) fn from_slice_fn<T: Scalar>(n3: usize, f: impl Fn(usize) -> CMatrix<T> + Sync) -> Tensor3<T> {
    idft3_unchecked(&SpectralTensor::from_half(n3, map_half(n3, f)))
}

/// Tubal SVD `X = U * S * V^T` with `U: n1×r×n3`, `S: r×r×n3` f-diagonal and
/// `V: n2×r×n3`, where `r` is the retained width.
#[derive(Debug, Clone)]
pub struct TSvd<T: Scalar> {
    pub u: Tensor3<T>,
    pub s: Tensor3<T>,
    pub v: Tensor3<T>,
    pub r: usize,
}

impl<T: Scalar> TSvd<T> {
    /// `U * S * V^T`.
    pub fn reconstruct(&self) -> Tensor3<T> {
        let uh = dft3(&self.u);
        let sh = dft3(&self.s);
        let vh = dft3(&self.v);
        from_slice_fn(self.u.n3(), |k| uh.slice(k) * sh.slice(k) * vh.slice(k).adjoint())
    }

    /// Keeps the leading `width` singular triplets.
    pub fn truncate(&self, width: usize) -> Result<Self> {
        if width == 0 || width > self.r {
            return Err(TensorError::RankTooLarge { rank: width, max: self.r });
        }
        let idx: Vec<usize> = (0..width).collect();
        Ok(Self {
            u: self.u.gather_lateral(&idx)?,
            s: self.s.gather_lateral(&idx)?.gather_horizontal(&idx)?,
            v: self.v.gather_lateral(&idx)?,
            r: width,
        })
    }

    /// Frobenius norms of the singular tubes `S(i, i, :)`.
    pub fn tube_norms(&self) -> Vec<T> {
        (0..self.r)
            .map(|i| {
                (0..self.s.n3())
                    .fold(T::zero(), |acc, k| acc + self.s.get(i, i, k) * self.s.get(i, i, k))
                    .sqrt()
            })
            .collect()
    }
}

/// Full tubal SVD of width `min(n1, n2)`, computed by one complex SVD per
/// Fourier slice.
pub fn t_svd<T: Scalar>(x: &Tensor3<T>) -> Result<TSvd<T>> {
    let (n1, n2, n3) = x.dims();
    let r = n1.min(n2);
    let svds = fourier_svd(&dft3(x))?;
    let u = from_slice_fn(n3, |k| svds[k].u.columns(0, r).into_owned());
    let v = from_slice_fn(n3, |k| svds[k].v.columns(0, r).into_owned());
    let s = from_slice_fn(n3, |k| {
        let mut d = CMatrix::zeros(r, r);
        for i in 0..r {
            d[(i, i)] = cplx(svds[k].s[i]);
        }
        d
    });
    Ok(TSvd { u, s, v, r })
}

/// Singular values of every Fourier slice, each list nonincreasing.
pub fn fourier_singular_values<T: Scalar>(x: &Tensor3<T>) -> Result<Vec<Vec<T>>> {
    Ok(fourier_svd(&dft3(x))?.into_iter().map(|s| s.s).collect())
}

/// Number of singular tubes whose Frobenius norm exceeds `tol * ‖x‖_F`.
pub fn tubal_rank<T: Scalar>(x: &Tensor3<T>, tol: T) -> Result<usize> {
    let sv = fourier_singular_values(x)?;
    let thr = tol * x.frob_norm();
    let n3 = T::from_usize(x.n3()).expect("n3 representable");
    let width = sv[0].len();
    // Parseval: ‖S(i,i,:)‖_F² = (1/n3) Σ_k σ_{i,k}²
    Ok((0..width)
        .filter(|&i| (sv.iter().fold(T::zero(), |a, s| a + s[i] * s[i]) / n3).sqrt() > thr)
        .count())
}

/// Rank of every Fourier slice at the absolute threshold `tol * ‖x‖_F`.
pub fn multi_rank<T: Scalar>(x: &Tensor3<T>, tol: T) -> Result<Vec<usize>> {
    let thr = tol * x.frob_norm();
    Ok(fourier_singular_values(x)?
        .iter()
        .map(|s| s.iter().filter(|&&v| v > thr).count())
        .collect())
}

/// Tensor nuclear norm: average nuclear norm of the Fourier slices.
pub fn tnn<T: Scalar>(x: &Tensor3<T>) -> Result<T> {
    let sv = fourier_singular_values(x)?;
    let total = sv.iter().flatten().fold(T::zero(), |a, &s| a + s);
    Ok(total / T::from_usize(x.n3()).expect("n3 representable"))
}

/// Tensor spectral norm: largest singular value over all Fourier slices.
pub fn spectral_norm<T: Scalar>(x: &Tensor3<T>) -> Result<T> {
    let sv = fourier_singular_values(x)?;
    Ok(sv.iter().map(|s| s[0]).fold(T::zero(), |a, b| if b > a { b } else { a }))
}

/// Default relative cutoff for [`t_pinv`]: `max(n1, n2) * eps`.
pub fn default_pinv_tol<T: Scalar>(x: &Tensor3<T>) -> T {
    default_pinv_rtol(x.n1(), x.n2())
}

/// Moore–Penrose pseudoinverse. Singular values at or below
/// `rtol * σ_max(slice)` are dropped in each Fourier slice.
pub fn t_pinv<T: Scalar>(x: &Tensor3<T>, rtol: T) -> Result<Tensor3<T>> {
    t_pinv_capped(x, rtol, usize::MAX)
}

/// Pseudoinverse of the best rank-`max_rank` approximation in every Fourier slice.
pub fn t_pinv_capped<T: Scalar>(x: &Tensor3<T>, rtol: T, max_rank: usize) -> Result<Tensor3<T>> {
    let svds = fourier_svd(&dft3(x))?;
    Ok(from_slice_fn(x.n3(), |k| svds[k].pinv(rtol * svds[k].sigma_max(), max_rank)))
}

/// Projection of `x` onto the span of the lateral slices of `c`,
/// `Π_C(X) = C * C† * X`.
pub fn t_project<T: Scalar>(c: &Tensor3<T>, x: &Tensor3<T>) -> Result<Tensor3<T>> {
    if c.n1() != x.n1() || c.n3() != x.n3() {
        return Err(TensorError::DimMismatch { op: "t_project", left: c.dims(), right: x.dims() });
    }
    let rtol = default_pinv_rtol::<T>(c.n1(), c.n2());
    let svds = fourier_svd(&dft3(c))?;
    let xh = dft3(x);
    Ok(from_slice_fn(x.n3(), |k| {
        let q = svds[k].u.columns(0, svds[k].rank_above(rtol * svds[k].sigma_max()));
        &q * (q.adjoint() * xh.slice(k))
    }))
}

/// Real matrix view of a tensor with `n3 = 1`.
pub fn as_matrix<T: Scalar>(x: &Tensor3<T>) -> Option<DMatrix<T>> {
    (x.n3() == 1).then(|| x.frontal(0))
}
