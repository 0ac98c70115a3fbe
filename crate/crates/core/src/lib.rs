#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` deliberately rejects NaN

//! Lindblad, no-jump and hybrid Liouvillians for small open quantum systems:
//! construction, spectra and exceptional points, deterministic evolution, and
//! postselected quantum-jump trajectories.

pub mod evolve;
pub mod lindblad;
pub mod models;
pub mod numerics;
pub mod spectra;
pub mod trajectories;
