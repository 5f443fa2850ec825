//! Fock-truncated simulation and variational training of bosonic sensor
//! networks that classify quadrature-displacement data.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: truncated Fock-space states, operators and Gaussian gates.
//! - [`circuit`]: echoed conditional displacement (ECD) and qubit rotation
//!   gates, layered into probe and measurement ansätze.
//! - [`tasks`]: labelled displacement ensembles, the forward classification
//!   pipeline and random-unitary noise.
//! - [`analytics`]: closed-form baselines, Helstrom limits, Laguerre analysis,
//!   noise bounds and the symplectic data-transform calculus.
//! - [`train`]: the penalised loss, gradients and the multi-restart optimiser
//!   with threshold sweeps.

pub mod analytics;
pub mod circuit;
pub mod error;
pub mod fock;
pub mod tasks;
pub mod train;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for operators and density matrices.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector used for pure states.
pub type CVector = nalgebra::DVector<C64>;
