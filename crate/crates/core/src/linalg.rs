//! Per-slice dense complex linear algebra on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Result, TensorError};
use crate::scalar::{cplx, Scalar};
use crate::spectral::CMatrix;

/// Thin SVD `A = U diag(s) V^H` of one Fourier slice, singular values
/// sorted in nonincreasing order.
#[derive(Debug, Clone)]
pub(crate) struct SliceSvd<T: Scalar> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

fn max_sweeps(m: usize, n: usize) -> usize {
    200 * (m + n) + 1000
}

fn widen<T: Scalar>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

fn narrow<T: Scalar>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

/// Thin SVD of a Fourier slice. `real` requests the decomposition of the real
/// part only, which keeps self-conjugate slices exactly real.
///
/// The factorization always runs in `f64`: the single precision bidiagonal
/// SVD in nalgebra can return badly wrong factors on rank-deficient input.
pub(crate) fn slice_svd<T: Scalar>(k: usize, a: &CMatrix<T>, real: bool) -> Result<SliceSvd<T>> {
    let (m, n) = a.shape();
    let fail = TensorError::ConvergenceFailure { slice: k };
    let (u, s, v) = if real {
        let re: DMatrix<f64> = a.map(|z| z.re.as_f64());
        let svd = re.try_svd(true, true, f64::EPSILON, max_sweeps(m, n)).ok_or(fail.clone())?;
        let u = svd.u.ok_or(fail.clone())?;
        let vt = svd.v_t.ok_or(fail)?;
        (u.map(|x| cplx(T::lit(x))), svd.singular_values, vt.transpose().map(|x| cplx(T::lit(x))))
    } else {
        let wide: CMatrix<f64> = a.map(widen);
        let svd = wide.try_svd(true, true, f64::EPSILON, max_sweeps(m, n)).ok_or(fail.clone())?;
        let u = svd.u.ok_or(fail.clone())?;
        let vt = svd.v_t.ok_or(fail)?;
        (u.map(narrow), svd.singular_values, vt.adjoint().map(narrow))
    };
    Ok(SliceSvd { u, s: s.iter().map(|&x| T::lit(x)).collect(), v })
}

impl<T: Scalar> SliceSvd<T> {
    pub fn rank_above(&self, threshold: T) -> usize {
        self.s.iter().filter(|&&s| s > threshold).count()
    }

    /// `U_w diag(f(s)) V_w^H` over the leading `width` triplets.
    pub fn reconstruct(&self, width: usize, f: impl Fn(T) -> T) -> CMatrix<T> {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let w = width.min(self.s.len());
        let mut us = self.u.columns(0, w).into_owned();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            let sj = cplx(f(self.s[j]));
            col.iter_mut().for_each(|z| *z *= sj);
        }
        if w == 0 {
            return CMatrix::zeros(m, n);
        }
        &us * self.v.columns(0, w).adjoint()
    }

    /// Moore–Penrose pseudoinverse keeping at most `width` triplets whose
    /// singular values exceed `cutoff`.
    pub fn pinv(&self, cutoff: T, width: usize) -> CMatrix<T> {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let w = self.rank_above(cutoff).min(width);
        if w == 0 {
            return CMatrix::zeros(n, m);
        }
        let mut vs = self.v.columns(0, w).into_owned();
        for (j, mut col) in vs.column_iter_mut().enumerate() {
            let inv = cplx(T::one() / self.s[j]);
            col.iter_mut().for_each(|z| *z *= inv);
        }
        &vs * self.u.columns(0, w).adjoint()
    }

    pub fn sigma_max(&self) -> T {
        self.s.first().copied().unwrap_or_else(T::zero)
    }
}

/// `max(m, n) * eps` relative cutoff used by default for pseudoinverses.
pub(crate) fn default_pinv_rtol<T: Scalar>(m: usize, n: usize) -> T {
    T::from_usize(m.max(n)).expect("dimension representable") * T::eps()
}
