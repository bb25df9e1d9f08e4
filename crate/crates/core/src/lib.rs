//! Distance-function wavelet numerics.

pub mod specfun;
pub mod kernels;
pub mod geometry;
pub mod eigensolver;
pub mod hfseries;
pub mod transforms;
pub mod diffusion;
pub mod ridgelets;
