//! Gaussian continuous-variable toolkit for parametric down-conversion
//! pumped by `2N` symmetrically tilted plane waves.
//!
//! - [`symplectic`]: covariance matrices, symplectic maps and spectra.
//! - [`pdc`]: closed-form propagator and output covariance of the crystal.
//! - [`entanglement`]: three-mode witness, logarithmic negativity and
//!   localization onto two modes.
//! - [`ode`]: RK4 integration of the coupled-mode equations, used as an
//!   independent check on [`pdc`].

pub mod entanglement;
pub mod error;
pub mod ode;
pub mod pdc;
pub mod symplectic;

pub use entanglement::{
    localization_transform, localize_and_report, log_negativity, threshold_coupling,
    tripartite_witness, Bipartition, LocalizationReport, NegativityReport, WitnessResult,
};
pub use error::{Error, Result};
pub use ode::{integrate, to_quadrature_propagator, ComplexModeMap, OdeSettings};
pub use pdc::{
    bisymmetry_check, build_propagator, output_covariance, propagator_functions,
    squeezing_parameter, BogoliubovPropagator, PdcConfig, PropagatorFunctions, SqueezingParameter,
};
pub use symplectic::{
    congruence, direct_sum, partial_transpose, symplectic_eigenvalues, validate, CovarianceMatrix,
    ModeLayout, SymplecticForm, SymplecticMatrix, Validity,
};
