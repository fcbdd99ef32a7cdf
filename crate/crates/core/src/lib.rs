//! Bit-accurate testbed for approximate adders inside a fixed-point CORDIC
//! Golub-Kahan SVD, driven by a range-domain MUSIC estimator on an OFDM
//! radar chain, with a design-space-exploration harness on top.

pub mod adders;
pub mod cli;
pub mod config;
pub mod cordic;
pub mod dse;
pub mod fixed;
pub mod linalg;
pub mod music;
pub mod ofdm;
pub mod svd;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
