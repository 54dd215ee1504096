//! Macroscopic envelope machinery: amplitude fields, quadratic source terms,
//! coupling coefficients, envelope evolution and second-order correctors.

mod coupling;
mod evolve;
mod field;
mod second_order;

pub use coupling::{
    compute_k, coupling_coefficients, projected_coupling, projected_velocity, CarrierIndex,
    CouplingCoefficients, MacroMode, MacroSystem,
};
pub use evolve::{evolve, Trajectory};
pub use field::AmplitudeField;
pub use second_order::{second_order_amplitudes, CorrectorPlan, SecondOrderSet};
