//! Meridional-plane solver for the axisymmetric Navier-Stokes-Boussinesq
//! system without swirl, with a harness that evaluates the a priori
//! estimates of the system along computed trajectories.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod flowmap;
pub mod grid;
pub mod initdata;
pub mod interp;
pub mod lpaley;
pub mod oracles;

pub use error::{Error, Result};
