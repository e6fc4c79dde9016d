//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through this trait, with `f32` and `f64` as the two instantiations.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable everywhere in this crate: f32 or f64.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {}

impl<T> Scalar for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {}

/// Shorthand for pulling an `f64` constant into the working scalar type.
#[inline]
pub fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant must convert into the scalar type")
}
