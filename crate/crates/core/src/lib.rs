//! Reflection positivity toolkit for finite quantum lattice systems.

pub mod bipartition;
pub mod ensembles;
pub mod error;
pub mod groundstate;
pub mod localnet;
pub mod models;
pub mod osrecon;
pub mod pfengine;
pub mod pipeline;
pub mod rpcore;
pub mod staralg;
pub mod tensorlab;

pub use error::{Error, Result};
