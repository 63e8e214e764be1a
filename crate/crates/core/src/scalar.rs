//! Scalar abstraction shared by every module.
//!
//! All numerical code is generic over [`Real`], which is implemented for
//! `f32` and `f64`. Complex matrices and vectors use nalgebra's dynamic
//! storage.

use nalgebra::{Complex, DMatrix, DVector};
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type usable by the library.
pub trait Real:
    nalgebra::RealField
    + Copy
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the type cannot represent it,
    /// which does not happen for `f32`/`f64`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

pub type C<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

/// Frobenius norm.
pub fn fro<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Squared Frobenius norm.
pub fn fro2<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Real part of the trace.
pub fn tr_re<T: Real>(m: &CMat<T>) -> T {
    (0..m.nrows().min(m.ncols())).fold(T::zero(), |acc, i| acc + m[(i, i)].re)
}

/// Complex identity-like matrix of the given shape (first `min` diagonal ones).
pub fn ceye<T: Real>(rows: usize, cols: usize) -> CMat<T> {
    CMat::<T>::identity(rows, cols)
}

pub fn czeros<T: Real>(rows: usize, cols: usize) -> CMat<T> {
    CMat::<T>::zeros(rows, cols)
}

/// Diagonal complex matrix from real entries.
pub fn cdiag<T: Real>(d: &[T]) -> CMat<T> {
    let mut m = czeros(d.len(), d.len());
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] = cr(v);
    }
    m
}

/// Replaces `m` by its Hermitian part `(m + m^H)/2`.
pub fn hermitize<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

/// `exp(i ang)`.
#[inline]
pub fn cis<T: Real>(ang: T) -> C<T> {
    Complex::new(ang.cos(), ang.sin())
}

/// Polar construction `r exp(i ang)`.
#[inline]
pub fn polar<T: Real>(r: T, ang: T) -> C<T> {
    Complex::new(r * ang.cos(), r * ang.sin())
}

/// Modulus.
#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

/// Argument in `(-pi, pi]`.
#[inline]
pub fn carg<T: Real>(z: C<T>) -> T {
    z.im.atan2(z.re)
}
