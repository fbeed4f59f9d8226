//! Far-field synthesis, direct sampling indicators and support recovery for
//! compactly supported 2D acoustic sources.

pub mod bessel;
pub mod config;
pub mod error;
pub mod expr;
pub mod forward;
pub mod geometry;
pub mod indicators;
pub mod interval;
pub mod io;
pub mod profile;
pub mod quad;
pub mod recover;
pub mod runner;

pub use error::{Error, Result};
