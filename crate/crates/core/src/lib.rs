//! Null-controllability toolkit for the heat equation on the strip
//! `(0, 2πL)^{d-1} × ℝ`.
//!
//! Everything is generic over the scalar type; the `*64` and `*32` aliases
//! below pin the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod linalg;
pub mod necessity;
pub mod scalar;
pub mod spectral;
pub mod strip_model;

pub use control::{
    cost_constants, empirical_observability_constant, h_conditions_check, hum_control, lr_synthesize, ControlModel,
    CostReport, HumOptions, LrSchedule, TimeQuadrature,
};
pub use error::{Error, Result};
pub use geometry::{estimate_thickness, reflect_extend, SetDescription, ThicknessCertificate};
pub use heat::{dissipation_check, kernel_cube_series, kernel_strip, HeatState, KernelParams};
pub use necessity::{dirichlet_lower_witness, miller_functional, qn_sequence, thickness_equivalence_probe};
pub use scalar::Scalar;
pub use spectral::{
    empirical_spectral_constant, logvinenko_sereda_bound, theoretical_spectral_constant, BandLimitedField,
    SpectralConstants,
};
pub use strip_model::{build_domain, lattice_below_energy, Boundary, DomainConfig, FrequencyLattice, StripDomain};

pub type StripDomain64 = StripDomain<f64>;
pub type StripDomain32 = StripDomain<f32>;
pub type DomainConfig64 = DomainConfig<f64>;
pub type DomainConfig32 = DomainConfig<f32>;
pub type SetDescription64 = SetDescription<f64>;
pub type SetDescription32 = SetDescription<f32>;
pub type HeatState64 = HeatState<f64>;
pub type HeatState32 = HeatState<f32>;
pub type ControlModel64 = ControlModel<f64>;
pub type ControlModel32 = ControlModel<f32>;
pub type BandLimitedField64 = BandLimitedField<f64>;
pub type BandLimitedField32 = BandLimitedField<f32>;
