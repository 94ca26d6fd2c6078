//! Finite-difference solver for Boussinesq-Abbott waves interacting with a
//! partially immersed object that moves vertically.
//!
//! The exterior wave field lives on two half-lines. The coupling with the
//! object is carried by a 7-component ODE state [`Theta`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod grid;
pub mod harness;
pub mod helmholtz;
pub mod reference;
pub mod init;
pub mod scalar;
pub mod scheme;
pub mod setup;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PhysicalSetup = setup::PhysicalSetup<f64>;
pub type DepthProfile = setup::DepthProfile<f64>;
pub type Grid = grid::Grid<f64>;
pub type State = state::State<f64>;
pub type Theta = state::Theta<f64>;
pub type HelmholtzWorkspace = helmholtz::HelmholtzWorkspace<f64>;
