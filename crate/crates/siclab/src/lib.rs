//! Security analysis of encrypted control loops against least-squares
//! system identification.
//!
//! An adversary that records the input/state samples of a linear plant
//! can estimate the plant matrices by least squares once the samples are
//! deciphered. This crate computes how well such an adversary can do:
//!
//! * [`model`] — plant, noise and feedback-gain types, plus seeded random
//!   stable-plant generation;
//! * [`gramian`] — discrete Lyapunov solver and the two controllability
//!   Gramians whose traces drive the error bound;
//! * [`sysid`] — simulation of the probing attack and the least-squares
//!   estimator, with Monte Carlo averaging;
//! * [`security`] — the identifying-complexity bound `gamma(N)`, the
//!   deciphering-time estimate `tau(N, lambda)`, security verdicts and
//!   minimal-parameter design;
//! * [`experiments`] — deterministic sweep harnesses with CSV emission.
//!
//! All randomness flows from explicit seeds; every public operation is a
//! pure function of its arguments.

pub mod experiments;
pub mod gramian;
pub mod model;
pub mod numfmt;
pub mod security;
pub mod seed;
pub mod sysid;

pub use nalgebra;
