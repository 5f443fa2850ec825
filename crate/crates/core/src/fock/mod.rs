//! Truncated Fock-space linear algebra.

pub mod kernel;
pub mod layout;
pub mod linalg;
pub mod operator;
pub mod state;
pub mod wigner;

use serde::{Deserialize, Serialize};

pub use layout::{Subsystem, SubsystemKind, SubsystemLayout};
pub use operator::{
    annihilation, creation, displacement, gaussian_op, momentum, multimode_displacement, number, parity,
    position, GaussianGate, Operator, OperatorKind,
};
pub use state::{QuantumState, StateData};
pub use wigner::{wigner, WignerGrid, WignerSpec};

/// Numerical tolerances used by constructors and checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub unitarity: f64,
    pub norm: f64,
    pub leakage: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-12,
            unitarity: 1e-8,
            norm: 1e-10,
            leakage: 1e-8,
        }
    }
}

/// Default cutoff for a photon budget.
pub fn default_cutoff(n_s: f64) -> usize {
    if n_s <= 2.0 {
        30
    } else if n_s <= 4.0 {
        50
    } else {
        (12.0 * n_s).ceil() as usize + 10
    }
}
