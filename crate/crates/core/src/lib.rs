//! Dynamic localization of light in periodically curved waveguide arrays.
//!
//! The crate couples three descriptions of the same device:
//!
//! * [`analytics`] — the DL integral, Bessel laws and inverse design;
//! * [`tightbinding`] — nearest-neighbour coupled-mode dynamics;
//! * [`continuum`] — a scalar paraxial beam-propagation model.
//!
//! [`experiments`] wires them into reproducible scenarios and [`cli`] exposes
//! those through the `dynloc` binary.

pub mod analytics;
pub mod cli;
pub mod continuum;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod tightbinding;

pub use error::{Error, Result};
pub use geometry::{ArraySpec, BendingProfile};
