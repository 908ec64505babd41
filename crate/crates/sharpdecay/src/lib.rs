//! Config files, CSV output and the invariant suite for `sharpdecay-core`.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

pub use sharpdecay_core as core;
