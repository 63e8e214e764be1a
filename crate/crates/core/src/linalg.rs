//! Dense Hermitian and general complex helpers on top of nalgebra.

use crate::error::{Error, Result};
use crate::scalar::{cr, czeros, CMat, CVec, Real, C};

/// Hermitian eigendecomposition with eigenvalues sorted descending.
/// Input is symmetrized first.
pub fn herm_eig<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let h = crate::scalar::hermitize(m);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = czeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_eig<T: Real>(m: &CMat<T>) -> T {
    let (v, _) = herm_eig(m);
    v.last().copied().unwrap_or_else(T::zero)
}

pub fn max_eig<T: Real>(m: &CMat<T>) -> T {
    let (v, _) = herm_eig(m);
    v.first().copied().unwrap_or_else(T::zero)
}

/// `f(A)` for Hermitian `A` applied through its eigenvalues.
pub fn herm_fn<T: Real>(m: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
    let (vals, vecs) = herm_eig(m);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let s = cr(f(v));
        for z in scaled.column_mut(k).iter_mut() {
            *z *= s;
        }
    }
    scaled * vecs.adjoint()
}

/// Inverse square root of a Hermitian positive definite matrix.
pub fn inv_sqrt_pd<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    let (vals, _) = herm_eig(m);
    if vals.iter().any(|&v| v <= T::zero()) {
        return Err(Error::Precondition("matrix is not positive definite".into()));
    }
    Ok(herm_fn(m, |v| T::one() / v.sqrt()))
}

/// Solves `A x = b` for Hermitian positive definite `A`.
pub fn chol_solve<T: Real>(a: &CMat<T>, b: &CVec<T>) -> Result<CVec<T>> {
    let chol = crate::scalar::hermitize(a)
        .cholesky()
        .ok_or_else(|| Error::Precondition("Cholesky factorization failed".into()))?;
    Ok(chol.solve(b))
}

/// General inverse via LU.
pub fn inverse<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalConsistency("singular matrix".into()))
}

/// Minimum-norm solution of `Q x = q` for Hermitian PSD `Q`, together with
/// the relative residual `‖Qx − q‖ / (‖q‖ + tiny)`.
pub fn herm_min_norm_solve<T: Real>(q_mat: &CMat<T>, q: &CVec<T>) -> (CVec<T>, T) {
    let (vals, vecs) = herm_eig(q_mat);
    let vmax = vals.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let tol = vmax * T::lit(q_mat.nrows().max(1) as f64) * T::eps() * T::lit(10.0);
    let mut x = CVec::<T>::zeros(q.len());
    for (k, &lam) in vals.iter().enumerate() {
        if lam > tol {
            let col = vecs.column(k);
            let coef = col.dotc(q) / cr(lam);
            x += col * coef;
        }
    }
    let res = (q_mat * &x - q).norm();
    let rel = res / (q.norm() + T::eps() * T::eps());
    (x, rel)
}

/// Thin SVD sorted by descending singular value. Each right singular vector
/// is rotated so that its first non-negligible entry is real positive, and
/// the matching left vector is rotated by the same phase.
pub struct SortedSvd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

pub fn svd_sorted<T: Real>(m: &CMat<T>) -> SortedSvd<T> {
    let svd = m.clone().svd(true, true);
    let u0 = svd.u.expect("left vectors requested");
    let vt0 = svd.v_t.expect("right vectors requested");
    let k = svd.singular_values.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut u = czeros(m.nrows(), k);
    let mut v = czeros(m.ncols(), k);
    let mut s = Vec::with_capacity(k);
    let v0 = vt0.adjoint();
    for (c, &i) in idx.iter().enumerate() {
        s.push(svd.singular_values[i]);
        let mut vc = v0.column(i).clone_owned();
        let mut uc = u0.column(i).clone_owned();
        let scale = vc.iter().fold(T::zero(), |a, z| a.max(crate::scalar::cabs(*z)));
        let thresh = scale * T::lit(1e-12);
        if let Some(z) = vc.iter().find(|z| crate::scalar::cabs(**z) > thresh).copied() {
            let ph = crate::scalar::cis(-crate::scalar::carg(z));
            vc *= ph;
            uc *= ph;
        }
        v.set_column(c, &vc);
        u.set_column(c, &uc);
    }
    SortedSvd { u, s, v }
}

/// Kronecker product.
pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Copies `src` into `dst` at block offset.
pub fn put<T: Real>(dst: &mut CMat<T>, r0: usize, c0: usize, src: &CMat<T>) {
    dst.view_mut((r0, c0), (src.nrows(), src.ncols())).copy_from(src);
}

/// Owned copy of a sub-block.
pub fn block<T: Real>(m: &CMat<T>, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat<T> {
    m.view((r0, c0), (rows, cols)).clone_owned()
}

/// Column-major vectorization.
pub fn vec_of<T: Real>(m: &CMat<T>) -> CVec<T> {
    CVec::<T>::from_iterator(m.len(), m.iter().copied())
}

/// `x^H A x`.
pub fn quad<T: Real>(a: &CMat<T>, x: &CVec<T>) -> C<T> {
    x.dotc(&(a * x))
}
