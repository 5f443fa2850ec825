//! Analytic baselines, bounds and the symplectic data-transform calculus.

pub mod baselines;
pub mod special;
pub mod symplectic;

pub use baselines::{
    adaptive_interferometry_error, gaussian_binary_error, generator_covariance, helstrom_binary,
    helstrom_binary_matrices, helstrom_ensemble, helstrom_pure_ensembles, helstrom_squeezed,
    helstrom_squeezed_binary, interferometry_threshold, number_interferometry_error, on_state_error,
    required_fock, simulate_number_interferometry, squeezed_probe, theorem2_bound, threshold_asymptotic,
    BaselineCurve, NumberInterferometer, OnStateOptimum,
};
pub use special::{erfc, gauss_hermite, laguerre, laguerre_smallest_root, standard_normal_rule};
pub use symplectic::{
    lemma1_check, quadrature_covariance, reduce_2d_real_to_1d_complex, transform_distribution,
    transform_energy, EnergyBudget, GaussianProbe, Reduction, SymplecticMap,
};
