//! Musielak-Orlicz numerics: Young functions, modulars and Luxemburg norms,
//! numerical convex conjugation, monotone fluxes, truncated Q-Wiener noise,
//! a semi-implicit Euler-Maruyama solver for
//! `du - div A(t,x,grad u) dt = h(u) dW` with Dirichlet boundary, and the
//! energy-identity checks that make the whole construction testable at desk
//! scale.
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm` feature
//! instead of `std` to build without the standard library. All types are
//! immutable after construction and all operations are pure, so everything
//! here can be shared freely across threads.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("muslx-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod fmath;
pub mod grid;
pub mod noise;
pub mod operators;
pub mod orlicz;
pub mod rng;
pub mod solver;
// pub mod verify;

pub use grid::{Domain, GradientField, GridFunction};


pub use orlicz::{ConjugateTable, NFunction, YoungFunction};

