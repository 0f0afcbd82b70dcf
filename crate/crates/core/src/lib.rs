//! Exact, dynamics-free probability engine.
//!
//! * [`ising`]: Boltzmann enumeration over small spin graphs with clamped
//!   evidence, exact fractions where the weights allow it.
//! * [`knowledge`]: geometry-conditional tables, Bayesian reveals of sites and
//!   geometry, and the audit that flags geometry dependence.
//! * [`retro_spin`]: the Lorentzian anomalous-rotation model, its Born-rule and
//!   Bell limits, and the entangled/sequential duality.
//! * [`io`]: document formats and CSV/text renderings used by the CLI.

pub mod error;
pub mod io;
pub mod ising;
pub mod knowledge;
pub mod presets;
pub mod retro_spin;

pub use error::{Error, Result};
