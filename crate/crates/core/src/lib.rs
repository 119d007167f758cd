//! Cluster-expansion engine for classical fluids: density-series coefficients
//! of correlation functions over bicolored Mayer graphs, order-by-order
//! verification of the Ornstein-Zernike equation, and a Percus-Yevick closure
//! solver validated against the truncated series.

pub mod cancellation;
pub mod error;
pub mod expansion;
pub mod exact1d;
pub mod graph;
pub mod integrate;
pub mod mc;
pub mod oz;
pub mod potential;
pub mod py;
pub mod radial;
pub mod reference;
pub mod series;

pub use error::{Error, Result};
