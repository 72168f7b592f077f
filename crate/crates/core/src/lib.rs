//! Entropic measures of nonclassical correlations in bipartite quantum states.

pub mod bloch_analysis;
pub mod demon;
pub mod entanglement;
pub mod entropy;
pub mod error;
pub mod meas;
pub mod measures;
pub mod optim;
pub mod qmat;
pub mod random;
pub mod states;

pub use error::{Error, Result};
