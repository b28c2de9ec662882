//! Training and convergence diagnostics for deep linear networks.
//!
//! A deep linear network is a composition of matrix factors
//! `x -> W_N * ... * W_2 * W_1 * x` trained by gradient descent on the
//! squared-distance loss between the end-to-end matrix and a target.
//! Despite the linearity of the end-to-end map, the optimization landscape
//! in factored form is non-convex, and convergence of gradient descent
//! depends on properties of the initialization.
//!
//! This crate implements, from first principles:
//!
//! * dense matrix arithmetic and Jacobi-rotation factorizations
//!   ([`matrix`], [`decomp`]),
//! * network construction, loss/gradient evaluation, and a training loop
//!   with monitors and a divergence guard ([`network`]),
//! * initialization schemes, including a balanced scheme that equalizes
//!   the Gram matrices of consecutive factors ([`init`]),
//! * certificates that turn measurable properties of an initialization
//!   (approximate balancedness, deficiency margin) into step-size bounds
//!   and iteration-count guarantees, plus per-trajectory verification of
//!   the inequalities behind those guarantees ([`theory`]),
//! * the continuous-time gradient flow that the discrete updates track,
//!   with fixed-step integrators and a flow-vs-descent comparator
//!   ([`flow`]),
//! * dataset moments, whitening, and synthetic problem generators
//!   ([`data`]),
//! * experiment drivers: step-size/initialization sweeps, Monte Carlo
//!   probability estimates, and constructions on which gradient descent
//!   provably fails ([`experiments`]).
//!
//! The crate is `no_std` (with `alloc`); all floating-point math routes
//! through `libm` so results are identical across platforms. File formats,
//! plotting, and the command-line driver live in the companion crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod data;
pub mod decomp;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod init;
pub mod matrix;
pub mod network;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use network::{NetSpec, Problem, TrainTrace, WeightStack};
