//! Tubal products, transpose and identity.

use crate::error::{Result, TensorError};
use crate::scalar::Scalar;
use crate::spectral::{dft3, idft3_unchecked, map_half, SpectralTensor};
use crate::tensor::Tensor3;

pub(crate) fn check_product_dims<T: Scalar>(
    op: &'static str,
    a: &Tensor3<T>,
    b: &Tensor3<T>,
) -> Result<()> {
    if a.n2() != b.n1() || a.n3() != b.n3() {
        return Err(TensorError::DimMismatch { op, left: a.dims(), right: b.dims() });
    }
    Ok(())
}

/// Slice-wise product of two spectra, `Ĉ_k = Â_k B̂_k`.
pub(crate) fn spectral_product<T: Scalar>(
    a: &SpectralTensor<T>,
    b: &SpectralTensor<T>,
) -> SpectralTensor<T> {
    let n3 = a.dims().2;
    SpectralTensor::from_half(n3, map_half(n3, |k| a.slice(k) * b.slice(k)))
}

/// t-product `A * B` computed slice by slice in the Fourier domain.
pub fn t_product<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>) -> Result<Tensor3<T>> {
    check_product_dims("t_product", a, b)?;
    let prod = spectral_product(&dft3(a), &dft3(b));
    Ok(idft3_unchecked(&prod))
}

/// Chained t-product `A * B * C`.
pub fn t_product3<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>, c: &Tensor3<T>) -> Result<Tensor3<T>> {
    check_product_dims("t_product3", a, b)?;
    if b.n2() != c.n1() || b.n3() != c.n3() {
        return Err(TensorError::DimMismatch { op: "t_product3", left: b.dims(), right: c.dims() });
    }
    let ab = spectral_product(&dft3(a), &dft3(b));
    Ok(idft3_unchecked(&spectral_product(&ab, &dft3(c))))
}

/// Tensor transpose: every frontal slice transposed, slices `1..n3` reversed.
pub fn t_transpose<T: Scalar>(x: &Tensor3<T>) -> Tensor3<T> {
    let n3 = x.n3();
    Tensor3::from_fn(x.n2(), x.n1(), n3, |i, j, k| x.get(j, i, (n3 - k) % n3))
}

/// Identity tensor: first frontal slice is `I_n`, the rest are zero.
///
/// # Panics
/// If `n` or `n3` is zero.
pub fn t_identity<T: Scalar>(n: usize, n3: usize) -> Tensor3<T> {
    Tensor3::from_fn(n, n, n3, |i, j, k| if i == j && k == 0 { T::one() } else { T::zero() })
}
