//! Quadrature and interpolation building blocks.

pub mod chebyshev;
pub mod kronrod;
pub mod laguerre;
pub mod legendre;

pub use chebyshev::Chebyshev;
pub use laguerre::{gauss_laguerre, QuadratureRule};
