//! Elastic small-angle diffraction of a weakly bound two-particle molecule
//! by an N-bar transmission grating, next to the matching point particle.
//!
//! The library evaluates the coherent grating amplitude as the product of
//! a single-bar transition amplitude and the classical grating function.
//! For the molecule the single-bar amplitude folds the bound-state wave
//! function in through a form factor and a marginal-density integral over
//! the bar, which is where break-up suppression of the diffraction peaks
//! and the reappearance of even orders at s = d/2 come from.
//!
//! Modules, bottom up:
//! - [`numerics`]: adaptive Gauss–Kronrod quadrature (tail-truncated radial
//!   and half-period oscillatory front ends) and the exponential integral E1.
//! - [`wavefunction`]: normalized s-state bound-state models of the dimer
//!   and their derived densities.
//! - [`kernels`]: grating function, point-particle and molecular single-bar
//!   amplitudes (fast symmetry-reduced path plus a brute-force 3D oracle),
//!   coherent amplitudes, and the diffraction-regime check.
//! - [`pattern`]: sampled intensity patterns, peak reports, suppression
//!   summaries.
//! - [`config`] / [`cli`]: TOML run configuration and the subcommand
//!   runners behind the `halodiff` binary.

pub mod cli;
pub mod config;
pub mod constants;
pub mod kernels;
pub mod numerics;
pub mod pattern;
pub mod wavefunction;
