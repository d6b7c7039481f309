//! Dense real third-order tensors.

use std::ops::{Add, Index, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Result, TensorError};
use crate::scalar::Scalar;

/// Dense real `n1 × n2 × n3` tensor.
///
/// Entry `(i, j, k)` lives at flat index `i + n1 * (j + n2 * k)`, so mode 1
/// varies fastest and every frontal slice is a contiguous column-major
/// `n1 × n2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    dims: (usize, usize, usize),
    data: Vec<T>,
}

fn check_dims(dims: (usize, usize, usize)) -> Result<()> {
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(TensorError::InvalidDims(dims));
    }
    Ok(())
}

impl<T: Scalar> Tensor3<T> {
    /// Builds a tensor from flat data, validating length and finiteness.
    pub fn new(dims: (usize, usize, usize), data: Vec<T>) -> Result<Self> {
        check_dims(dims)?;
        let expected = dims.0 * dims.1 * dims.2;
        if data.len() != expected {
            return Err(TensorError::LengthMismatch { expected, got: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite_val()) {
            return Err(TensorError::NonFinite(pos));
        }
        Ok(Self { dims, data })
    }

    /// Internal constructor for data produced by finite arithmetic.
    pub(crate) fn from_raw(dims: (usize, usize, usize), data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), dims.0 * dims.1 * dims.2);
        Self { dims, data }
    }

    /// Zero tensor.
    ///
    /// # Panics
    /// If any dimension is zero.
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        check_dims((n1, n2, n3)).expect("tensor dimensions must be positive");
        Self { dims: (n1, n2, n3), data: vec![T::zero(); n1 * n2 * n3] }
    }

    /// Tensor whose entry `(i, j, k)` is `f(i, j, k)`.
    ///
    /// # Panics
    /// If any dimension is zero.
    pub fn from_fn(n1: usize, n2: usize, n3: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        check_dims((n1, n2, n3)).expect("tensor dimensions must be positive");
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims: (n1, n2, n3), data }
    }

    /// Stacks equally sized real matrices as frontal slices.
    pub fn from_frontal_slices(slices: &[DMatrix<T>]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| TensorError::DegenerateInput("no frontal slices".into()))?;
        let (n1, n2) = first.shape();
        let n3 = slices.len();
        check_dims((n1, n2, n3))?;
        let mut data = Vec::with_capacity(n1 * n2 * n3);
        for s in slices {
            if s.shape() != (n1, n2) {
                return Err(TensorError::DimMismatch {
                    op: "from_frontal_slices",
                    left: (n1, n2, 1),
                    right: (s.nrows(), s.ncols(), 1),
                });
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::new((n1, n2, n3), data)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }
    pub fn n1(&self) -> usize {
        self.dims.0
    }
    pub fn n2(&self) -> usize {
        self.dims.1
    }
    pub fn n3(&self) -> usize {
        self.dims.2
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat entries in `i + n1 * (j + n2 * k)` order.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.flat_index(i, j, k)]
    }

    /// Frontal slice `k` as an `n1 × n2` matrix.
    pub fn frontal(&self, k: usize) -> DMatrix<T> {
        let sz = self.dims.0 * self.dims.1;
        DMatrix::from_column_slice(self.dims.0, self.dims.1, &self.data[k * sz..(k + 1) * sz])
    }

    pub fn frob_norm_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    pub fn frob_norm(&self) -> T {
        self.frob_norm_sq().sqrt()
    }

    /// Entrywise ℓ1 norm.
    pub fn l1_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v.abs_val())
    }

    /// Entrywise maximum magnitude.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| {
            let a = v.abs_val();
            if a > acc { a } else { acc }
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite_val())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { dims: self.dims, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Entrywise combination of two equally shaped tensors.
    ///
    /// # Panics
    /// If the shapes differ.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.dims, other.dims, "zip_map on tensors of different shape");
        Self {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// Lateral slice `X(:, j, :)` as an `n1 × 1 × n3` tensor.
    pub fn lateral(&self, j: usize) -> Result<Self> {
        self.gather_lateral(&[j])
    }

    /// Horizontal slice `X(i, :, :)` as a `1 × n2 × n3` tensor.
    pub fn horizontal(&self, i: usize) -> Result<Self> {
        self.gather_horizontal(&[i])
    }

    /// Lateral slices at `indices`, concatenated in list order.
    pub fn gather_lateral(&self, indices: &[usize]) -> Result<Self> {
        self.gather_lateral_scaled(indices, None)
    }

    /// Horizontal slices at `indices`, concatenated in list order.
    pub fn gather_horizontal(&self, indices: &[usize]) -> Result<Self> {
        self.gather_horizontal_scaled(indices, None)
    }

    /// Lateral gather with an optional per-slice multiplier.
    pub fn gather_lateral_scaled(&self, indices: &[usize], scales: Option<&[T]>) -> Result<Self> {
        let (n1, n2, n3) = self.dims;
        check_selection(indices, scales, n2)?;
        let m = indices.len();
        let mut data = Vec::with_capacity(n1 * m * n3);
        for k in 0..n3 {
            for (t, &j) in indices.iter().enumerate() {
                let s = scales.map_or(T::one(), |s| s[t]);
                let start = n1 * (j + n2 * k);
                data.extend(self.data[start..start + n1].iter().map(|&v| v * s));
            }
        }
        Ok(Self::from_raw((n1, m, n3), data))
    }

    /// Horizontal gather with an optional per-slice multiplier.
    pub fn gather_horizontal_scaled(&self, indices: &[usize], scales: Option<&[T]>) -> Result<Self> {
        let (n1, n2, n3) = self.dims;
        check_selection(indices, scales, n1)?;
        let m = indices.len();
        let mut data = Vec::with_capacity(m * n2 * n3);
        for k in 0..n3 {
            for j in 0..n2 {
                let col = n1 * (j + n2 * k);
                for (t, &i) in indices.iter().enumerate() {
                    let s = scales.map_or(T::one(), |s| s[t]);
                    data.push(self.data[col + i] * s);
                }
            }
        }
        Ok(Self::from_raw((m, n2, n3), data))
    }

    /// Squared Frobenius norm of every lateral slice.
    pub fn lateral_norms_sq(&self) -> Vec<T> {
        let (n1, n2, n3) = self.dims;
        let mut out = vec![T::zero(); n2];
        for k in 0..n3 {
            for (j, o) in out.iter_mut().enumerate() {
                let start = n1 * (j + n2 * k);
                for &v in &self.data[start..start + n1] {
                    *o += v * v;
                }
            }
        }
        out
    }

    /// Squared Frobenius norm of every horizontal slice.
    pub fn horizontal_norms_sq(&self) -> Vec<T> {
        let n1 = self.dims.0;
        let mut out = vec![T::zero(); n1];
        for col in self.data.chunks_exact(n1) {
            for (o, &v) in out.iter_mut().zip(col) {
                *o += v * v;
            }
        }
        out
    }
}

fn check_selection<T>(indices: &[usize], scales: Option<&[T]>, len: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(TensorError::DegenerateInput("empty slice selection".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
        return Err(TensorError::IndexOutOfRange { index: bad, len });
    }
    if let Some(s) = scales {
        if s.len() != indices.len() {
            return Err(TensorError::InvalidParameter(format!(
                "{} scales for {} indices",
                s.len(),
                indices.len()
            )));
        }
    }
    Ok(())
}

impl<T: Scalar> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.data[self.flat_index(i, j, k)]
    }
}

impl<T: Scalar> Add for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn add(self, rhs: Self) -> Tensor3<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn sub(self, rhs: Self) -> Tensor3<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn neg(self) -> Tensor3<T> {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tensor3<f64> {
        Tensor3::from_fn(2, 3, 2, |i, j, k| (i + 10 * j + 100 * k) as f64)
    }

    #[test]
    fn layout_is_mode1_fastest() {
        let x = sample();
        assert_eq!(x.data()[0], 0.0);
        assert_eq!(x.data()[1], 1.0);
        assert_eq!(x.data()[2], 10.0);
        assert_eq!(x.data()[6], 100.0);
        assert_eq!(x[(1, 2, 1)], 121.0);
        assert_eq!(x.frontal(1)[(1, 2)], 121.0);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            Tensor3::<f64>::new((2, 2, 1), vec![0.0; 3]),
            Err(TensorError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Tensor3::<f64>::new((1, 1, 2), vec![0.0, f64::NAN]),
            Err(TensorError::NonFinite(1))
        ));
        assert!(matches!(
            Tensor3::<f64>::new((0, 1, 1), vec![]),
            Err(TensorError::InvalidDims(_))
        ));
    }

    #[test]
    fn gather_all_in_order_is_identity() {
        let x = sample();
        assert_eq!(x.gather_lateral(&[0, 1, 2]).unwrap(), x);
        assert_eq!(x.gather_horizontal(&[0, 1]).unwrap(), x);
    }

    #[test]
    fn gather_lateral_permutes_columns() {
        let x = sample();
        let g = x.gather_lateral(&[2, 0]).unwrap();
        assert_eq!(g.dims(), (2, 2, 2));
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(g[(i, 0, k)], x[(i, 2, k)]);
                assert_eq!(g[(i, 1, k)], x[(i, 0, k)]);
            }
        }
    }

    #[test]
    fn slice_index_out_of_range() {
        let x = sample();
        assert_eq!(x.lateral(3), Err(TensorError::IndexOutOfRange { index: 3, len: 3 }));
        assert_eq!(x.horizontal(2), Err(TensorError::IndexOutOfRange { index: 2, len: 2 }));
        let h = x.horizontal(1).unwrap();
        assert_eq!(h.dims(), (1, 3, 2));
        assert_eq!(h[(0, 2, 1)], 121.0);
    }

    #[test]
    fn slice_norms_sum_to_total() {
        let x = sample();
        let total = x.frob_norm_sq();
        let lat: f64 = x.lateral_norms_sq().iter().sum();
        let hor: f64 = x.horizontal_norms_sq().iter().sum();
        assert!((lat - total).abs() < 1e-9);
        assert!((hor - total).abs() < 1e-9);
    }
}
