//! One-dimensional shallow-water finite-volume schemes over variable
//! bathymetry: Roe and centred fluxes, upwind and hydrostatic-reconstruction
//! source treatments, exact stationary solutions and benchmark diagnostics.
//!
//! `H` is the bottom depth measured downward from a fixed reference, so the
//! free surface is `h - H`.

pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod hydrostatic;
pub mod linalg;
pub mod physics;
pub mod presets;
pub mod solver;
pub mod stationary;
pub mod upwind;

pub use error::{Error, Result};
pub use flux::{FluxKind, OmegaRule};
pub use hydrostatic::{GatePolicy, HrVariant};
pub use physics::{ExtState, PhysConstants, PhysState};
pub use solver::{
    run, BoundaryCondition, Boundaries, Grid, RunReport, SchemeConfig, SchemeId, SimSpec, SimState, StopRule,
};
pub use upwind::{SonicMode, SonicRegularization, UpwindForm};
