//! Group-aware crowd navigation laboratory.

pub mod config;
pub mod env;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod neural;
pub mod plot;
pub mod ppo;
pub mod rng;
pub mod social_force;

pub use error::{Error, Result};
