//! Desk-scale machinery for hyperbolic line patterns and their waffles:
//! geodesic kernels, line-pattern windows, wall-space cubulation,
//! combinatorialization of boundary matchings, strands and clutching
//! ratios, and the exact arithmetic of groupings over quotient graphs.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod config;
pub mod combinatorialization;
pub mod cubulation;
pub mod groupings;
pub mod hyperbolic;
pub mod patterns;
pub mod strands;

pub use config::Tolerances;
