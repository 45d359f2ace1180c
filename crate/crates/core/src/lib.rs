//! Nonlinear seismic response simulation and adaptive neural surrogates.
//!
//! Two ground-truth oracles generate training data:
//!
//! - [`frame`]: a three-storey hysteretic shear frame integrated with HHT-α,
//! - [`rocking`]: a rigid rocking block with restitution impacts.
//!
//! [`ann`] holds a fully connected network that widens and deepens itself
//! while training, and [`pipeline`] turns oracle histories into supervised
//! series, rolls trained networks out autoregressively and times them
//! against the oracles.
//!
//! Batch entry points (many records, many periods) fan out over rayon when
//! the `parallel` feature is on and fall back to plain iteration otherwise.

pub mod ann;
pub mod error;
pub mod frame;
pub mod history;
pub mod parallel;
pub mod pipeline;
pub mod rocking;
pub mod signals;
pub mod svg;

pub use error::{Error, Result};
pub use history::ResponseHistory;

/// Standard gravity used for SI conversions (m/s²).
pub const G_SI: f64 = 9.81;

/// Standard gravity in in/s², consistent with kip·s²/in masses.
pub const G_IN: f64 = 386.1;
