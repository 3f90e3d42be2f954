pub mod criteria;
pub mod error;
pub mod geometry;
pub mod inner;
pub mod jet;
pub mod kernels;
pub mod measure;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
