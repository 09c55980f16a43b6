//! Quadrature and special-function support.

pub mod quad;
pub mod special;
