//! Extended Navier–Stokes systems on a staggered grid of the unit square.
//!
//! The velocity may carry divergence. Its divergence obeys a heat equation,
//! a Stokes lift carries it, and the solenoidal remainder is advanced on its
//! own. The guide in `book/` walks through each module.

pub mod advection;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod galerkin;
pub mod grid;
pub mod heat;
pub mod jl;
pub mod lift;
pub mod linsolve;
pub mod sr;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grid.md")]
    mod grid {}
    #[doc = include_str!("../../../book/src/heat.md")]
    mod heat {}
    #[doc = include_str!("../../../book/src/lifting.md")]
    mod lifting {}
    #[doc = include_str!("../../../book/src/jl.md")]
    mod jl {}
    #[doc = include_str!("../../../book/src/sr.md")]
    mod sr {}
    #[doc = include_str!("../../../book/src/galerkin.md")]
    mod galerkin {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
