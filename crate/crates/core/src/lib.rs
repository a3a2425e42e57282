//! Simulation toolkit for anonymous multi-party quantum computation with a
//! semi-honest third party.

pub mod analysis;
pub mod apps;
pub mod channel;
pub mod error;
pub mod protocol;
pub mod qudit;
pub mod random;
pub mod swap;

pub use error::{Error, Result};
