//! Coefficient and data fields evaluated at points in space.

use std::sync::Arc;

use crate::geometry::Vec3;
use crate::scalar::Real;

/// Scalar field on ℝ³, shared between threads.
pub type Field<T> = Arc<dyn Fn(&Vec3<T>) -> T + Send + Sync>;

/// Vector field on ℝ³.
pub type VectorField<T> = Arc<dyn Fn(&Vec3<T>) -> Vec3<T> + Send + Sync>;

pub fn constant<T: Real>(c: T) -> Field<T> {
    Arc::new(move |_| c)
}

pub fn from_fn<T: Real>(f: impl Fn(&Vec3<T>) -> T + Send + Sync + 'static) -> Field<T> {
    Arc::new(f)
}
