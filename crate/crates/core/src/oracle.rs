//! Block-circulant reference paths.
//!
//! These materialize `circ(A)` explicitly and are quadratic in `n3`; they exist
//! to cross-check the Fourier-domain routines.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::ops::check_product_dims;
use crate::scalar::Scalar;
use crate::tensor::Tensor3;

/// The `(n1 n3) × (n2 n3)` block-circulant matrix whose block `(p, q)` is
/// frontal slice `(p - q) mod n3`.
pub fn circ_matrix<T: Scalar>(a: &Tensor3<T>) -> DMatrix<T> {
    let (n1, n2, n3) = a.dims();
    DMatrix::from_fn(n1 * n3, n2 * n3, |r, c| {
        let (p, i) = (r / n1, r % n1);
        let (q, j) = (c / n2, c % n2);
        a.get(i, j, (p + n3 - q) % n3)
    })
}

/// Frontal slices stacked vertically: `(n1 n3) × n2`.
pub fn unfold<T: Scalar>(x: &Tensor3<T>) -> DMatrix<T> {
    let (n1, n2, n3) = x.dims();
    DMatrix::from_fn(n1 * n3, n2, |r, j| x.get(r % n1, j, r / n1))
}

/// Inverse of [`unfold`] for `n3` frontal blocks.
pub fn fold<T: Scalar>(m: &DMatrix<T>, n3: usize) -> Tensor3<T> {
    let n1 = m.nrows() / n3;
    Tensor3::from_fn(n1, m.ncols(), n3, |i, j, k| m[(i + n1 * k, j)])
}

/// `fold(circ(A) · unfold(B))`.
pub fn circ_oracle<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>) -> Result<Tensor3<T>> {
    check_product_dims("circ_oracle", a, b)?;
    Ok(fold(&(circ_matrix(a) * unfold(b)), a.n3()))
}
