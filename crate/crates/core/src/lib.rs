//! Geodesics, Toponogov comparison and Sturm-type tests on warped-product
//! half-planes with totally geodesic boundary.

pub mod error;
pub mod experiment;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod spline;
pub mod sturm;
pub mod testbed;
pub mod tolerance;
pub mod triangle;
pub mod warping;

pub use error::{Error, Result};
pub use warping::{TailTag, WarpingFunction};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model-surfaces.md")]
    mod model_surfaces {}
    #[doc = include_str!("../../../book/src/geodesic-lengths.md")]
    mod geodesic_lengths {}
    #[doc = include_str!("../../../book/src/comparison-triangles.md")]
    mod comparison_triangles {}
    #[doc = include_str!("../../../book/src/gluing.md")]
    mod gluing {}
    #[doc = include_str!("../../../book/src/sturm.md")]
    mod sturm {}
    #[doc = include_str!("../../../book/src/testbeds.md")]
    mod testbeds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
