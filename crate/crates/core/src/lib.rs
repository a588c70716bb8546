pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod holomap;
pub mod numrange;
pub mod output;
pub mod report;
pub mod resolvent;
pub mod semigroup;
pub mod starlike;
pub mod verify;

pub use error::{Error, Result};
