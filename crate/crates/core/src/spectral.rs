//! Fourier-domain representation: DFT along tubes.
//!
//! The forward transform is unnormalized and the inverse carries `1/n3`,
//! matching the usual `fft`/`ifft` convention. For a real tensor the slices
//! satisfy `X̂_{n3-k} = conj(X̂_k)`, so most per-slice work only needs the
//! first `n3/2 + 1` slices and mirrors the rest.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Result, TensorError};
use crate::scalar::{cabs, cplx, Scalar};
use crate::tensor::Tensor3;

pub type CMatrix<T> = DMatrix<Complex<T>>;

const TUBES_PER_CHUNK: usize = 2048;

/// Stack of `n3` complex `n1 × n2` frontal slices of a transformed tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor<T: Scalar> {
    dims: (usize, usize, usize),
    slices: Vec<CMatrix<T>>,
}

impl<T: Scalar> SpectralTensor<T> {
    /// Wraps spectral slices; all must share one shape.
    pub fn new(slices: Vec<CMatrix<T>>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| TensorError::DegenerateInput("no spectral slices".into()))?;
        let (n1, n2) = first.shape();
        if n1 == 0 || n2 == 0 {
            return Err(TensorError::InvalidDims((n1, n2, slices.len())));
        }
        for s in &slices {
            if s.shape() != (n1, n2) {
                return Err(TensorError::DimMismatch {
                    op: "SpectralTensor::new",
                    left: (n1, n2, 1),
                    right: (s.nrows(), s.ncols(), 1),
                });
            }
        }
        Ok(Self { dims: (n1, n2, slices.len()), slices })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn slice(&self, k: usize) -> &CMatrix<T> {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[CMatrix<T>] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<CMatrix<T>> {
        self.slices
    }

    /// Sum of squared entry magnitudes over all slices.
    pub fn energy(&self) -> T {
        self.slices
            .iter()
            .flat_map(|s| s.iter())
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Largest `|X̂_k - conj(X̂_{n3-k})|` relative to the largest entry magnitude.
    pub fn symmetry_deviation(&self) -> T {
        let n3 = self.dims.2;
        let mut scale = T::zero();
        let mut dev = T::zero();
        for k in 0..n3 {
            let mirror = &self.slices[(n3 - k) % n3];
            for (a, b) in self.slices[k].iter().zip(mirror.iter()) {
                let m = cabs(*a);
                if m > scale {
                    scale = m;
                }
                let d = cabs(*a - b.conj());
                if d > dev {
                    dev = d;
                }
            }
        }
        if scale > T::zero() { dev / scale } else { T::zero() }
    }

    /// Assembles a full spectral tensor from its first `n3/2 + 1` slices.
    pub(crate) fn from_half(n3: usize, half: Vec<CMatrix<T>>) -> Self {
        debug_assert_eq!(half.len(), half_len(n3));
        let (n1, n2) = half[0].shape();
        let mut slices = half;
        for k in slices.len()..n3 {
            let mirrored = slices[n3 - k].map(|z| z.conj());
            slices.push(mirrored);
        }
        Self { dims: (n1, n2, n3), slices }
    }
}

/// Number of slices that determine a conjugate symmetric spectrum.
pub(crate) fn half_len(n3: usize) -> usize {
    n3 / 2 + 1
}

/// Slices equal to their own conjugate for real input (`k = 0`, and `k = n3/2`
/// when `n3` is even); these are real matrices.
pub(crate) fn is_self_conjugate(k: usize, n3: usize) -> bool {
    k == 0 || 2 * k == n3
}

/// Evaluates `f(k)` for the independent Fourier slices in parallel, in order.
pub(crate) fn map_half<R: Send>(n3: usize, f: impl Fn(usize) -> R + Sync) -> Vec<R> {
    (0..half_len(n3)).into_par_iter().map(&f).collect()
}

/// Unnormalized DFT along the third mode.
pub fn dft3<T: Scalar>(x: &Tensor3<T>) -> SpectralTensor<T> {
    let (n1, n2, n3) = x.dims();
    let m = n1 * n2;
    let data = x.data();
    if n3 == 1 {
        let s = CMatrix::from_iterator(n1, n2, data.iter().map(|&v| cplx(v)));
        return SpectralTensor { dims: (n1, n2, 1), slices: vec![s] };
    }
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m * n3];
    for k in 0..n3 {
        for p in 0..m {
            buf[p * n3 + k] = cplx(data[k * m + p]);
        }
    }
    let fft = FftPlanner::<T>::new().plan_fft_forward(n3);
    buf.par_chunks_mut(n3 * TUBES_PER_CHUNK).for_each(|c| fft.process(c));
    let slices = (0..n3)
        .map(|k| CMatrix::from_fn(n1, n2, |i, j| buf[(i + n1 * j) * n3 + k]))
        .collect();
    SpectralTensor { dims: (n1, n2, n3), slices }
}

/// Inverse DFT along the third mode with `1/n3` normalization.
///
/// Fails with [`TensorError::SymmetryViolation`] when the slices are not
/// conjugate symmetric to `1e-8` relative, since the result would not be real.
pub fn idft3<T: Scalar>(xhat: &SpectralTensor<T>) -> Result<Tensor3<T>> {
    let dev = xhat.symmetry_deviation();
    if dev > T::tol(1e-8) {
        return Err(TensorError::SymmetryViolation(dev.as_f64()));
    }
    Ok(idft3_unchecked(xhat))
}

/// Inverse transform for spectra that are symmetric by construction.
pub(crate) fn idft3_unchecked<T: Scalar>(xhat: &SpectralTensor<T>) -> Tensor3<T> {
    let (n1, n2, n3) = xhat.dims;
    let m = n1 * n2;
    if n3 == 1 {
        let data = xhat.slices[0].iter().map(|z| z.re).collect();
        return Tensor3::from_raw((n1, n2, 1), data);
    }
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m * n3];
    for (k, s) in xhat.slices.iter().enumerate() {
        for (p, z) in s.iter().enumerate() {
            buf[p * n3 + k] = *z;
        }
    }
    let ifft = FftPlanner::<T>::new().plan_fft_inverse(n3);
    buf.par_chunks_mut(n3 * TUBES_PER_CHUNK).for_each(|c| ifft.process(c));
    let inv = T::one() / T::from_usize(n3).expect("n3 representable");
    let mut data = vec![T::zero(); m * n3];
    for k in 0..n3 {
        for p in 0..m {
            data[k * m + p] = buf[p * n3 + k].re * inv;
        }
    }
    Tensor3::from_raw((n1, n2, n3), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn two_point_tube() {
        let x = Tensor3::new((1, 1, 2), vec![3.0, 5.0]).unwrap();
        let xh = dft3(&x);
        assert_eq!(xh.slice(0)[(0, 0)], c(8.0, 0.0));
        assert_eq!(xh.slice(1)[(0, 0)], c(-2.0, 0.0));
        assert_eq!(idft3(&xh).unwrap(), x);
    }

    #[test]
    fn matches_direct_dft_sum() {
        let x = Tensor3::from_fn(2, 2, 5, |i, j, k| ((i * 7 + j * 3 + k * k) % 11) as f64 - 4.0);
        let xh = dft3(&x);
        for k in 0..5 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = c(0.0, 0.0);
                    for t in 0..5 {
                        let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / 5.0;
                        acc += c(ang.cos(), ang.sin()) * x[(i, j, t)];
                    }
                    assert!((acc - xh.slice(k)[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let s = SpectralTensor::<f64>::new(vec![CMatrix::zeros(2, 3); 4]).unwrap();
        assert_eq!(idft3(&s).unwrap(), Tensor3::zeros(2, 3, 4));
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let mut slices = vec![CMatrix::<f64>::zeros(1, 1); 3];
        slices[1][(0, 0)] = c(1.0, 1.0);
        let s = SpectralTensor::new(slices).unwrap();
        assert!(matches!(idft3(&s), Err(TensorError::SymmetryViolation(_))));
    }

    #[test]
    fn energy_is_n3_times_frobenius() {
        let x = Tensor3::from_fn(3, 2, 4, |i, j, k| (i as f64 - j as f64) * (k as f64 + 0.5));
        let xh = dft3(&x);
        assert!((xh.energy() - 4.0 * x.frob_norm_sq()).abs() < 1e-10);
        assert!(xh.symmetry_deviation() < 1e-14);
    }
}
