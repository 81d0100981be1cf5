//! Fisher-information rates, measurement models and scan rates for in-cavity
//! weak-noise search protocols with Gaussian sources.
//!
//! The library models a microwave cavity that accumulates a faint
//! random-phase drive for a tunable time before readout. It provides
//!
//! * a small Gaussian-state toolbox (states, symplectic operations,
//!   thermal-loss channels, exact single-parameter QFI),
//! * the transient cavity channel and the accumulation gain of the drive,
//! * closed-form information for a vacuum, single-mode-squeezed or
//!   two-mode-squeezed source, numerically stable over the full gain and
//!   time range,
//! * measurement models (homodyne, heterodyne, Bell, nulling receivers with
//!   photon counting) together with photon-number statistics,
//! * waiting-time/gain optimisation and the asymptotic break-even and
//!   saturation predictors,
//! * broadband spectral scan rates for the in-cavity and input-output
//!   protocols.
//!
//! All Fisher quantities are dimensionless, reported in units of (γ_Aτ_A)²
//! with the drive coherence time τ_A = 1; the caller re-attaches physical
//! units at the reporting layer.

pub mod cavity;
pub mod error;
pub mod fisher;
pub mod gaussian;
pub mod numerics;
pub mod optimize;
pub mod receivers;
pub mod scanrate;

pub use cavity::{AxionParams, CavityParams, SourceSpec};
pub use error::{Error, Result};
pub use fisher::FisherPoint;
pub use gaussian::GaussianState;
