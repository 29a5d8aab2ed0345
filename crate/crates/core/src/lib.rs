//! Voter-model laboratory on the directed configuration model.
//!
//! * [`degree`] — bi-degree sequences, generators and their scalar functionals.
//! * [`dcm`] — uniform stub pairing, connectivity and local-tree diagnostics.
//! * [`theory`] — closed-form predictions for the discordant-edge density.
//! * [`voter`] — exact event-driven voter dynamics.
//! * [`walks`] — pair walks, meeting times, coalescence, stationary law.
//! * [`annealed`] — tree chase experiment, Catalan oracle, annealed walks.
//! * [`stats`] — estimators shared by experiments.
//! * [`harness`] — configuration-driven experiments and SVG output.

// `!(x > 0.0)`-style guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealed;
pub mod dcm;
pub mod degree;
pub mod error;
pub mod harness;
pub mod seed;
pub mod stats;
pub mod theory;
pub mod voter;
pub mod walks;

pub use error::{Error, Result};
