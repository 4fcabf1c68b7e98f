//! Downlink multi-user WDM visible-light communication: line-of-sight channel
//! gains, per-user SINR and achievable OOK rate, and exact joint allocation
//! of access points and wavelengths.
//!
//! The model is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`, which the
//! experiment pipeline in [`scenario`] uses throughout.

// `!(x > 0)` is the NaN-rejecting form used in validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod config;
pub mod error;
pub mod io;
pub mod linkbudget;
pub mod optics;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use linkbudget::{Assignment, Link};
pub use optics::Wavelength;
pub use scalar::{Scalar, Vec3};

pub type RoomConfig = optics::RoomConfig<f64>;
pub type Luminaire = optics::Luminaire<f64>;
pub type UserPosition = optics::UserPosition<f64>;
pub type GainMatrix = optics::GainMatrix<f64>;
pub type ReceiverModel = linkbudget::ReceiverModel<f64>;
pub type LinkReport = linkbudget::LinkReport<f64>;
pub type AllocationInstance = allocator::AllocationInstance<f64>;
pub type AllocationSolution = allocator::AllocationSolution<f64>;
pub type ObjectiveWeights = allocator::ObjectiveWeights<f64>;

pub type RoomConfigF32 = optics::RoomConfig<f32>;
pub type ReceiverModelF32 = linkbudget::ReceiverModel<f32>;
pub type LinkReportF32 = linkbudget::LinkReport<f32>;
pub type AllocationInstanceF32 = allocator::AllocationInstance<f32>;
