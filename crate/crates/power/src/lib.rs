pub mod continuation;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod netfile;
pub mod network;
pub mod powerflow;
pub mod pv;
pub mod three_bus;

pub use error::{Error, Result};
