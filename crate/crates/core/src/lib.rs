pub mod error;
pub mod entanglement;
pub mod exact;
pub mod ks;
pub mod numerics;
pub mod perturbation;
pub mod search;
pub mod sweep;
pub mod two_electron;

pub use error::{Error, Result};
