//! Gaussian simulation of magnon-mediated photon-phonon two-mode squeezing
//! in a driven cavity-magnomechanical system.
//!
//! The crate follows the linearized description of a microwave cavity coupled
//! to a Kerr magnon mode, itself coupled to a mechanical oscillator. The Kerr
//! nonlinearity of the strongly driven magnon squeezes its fluctuations and
//! thereby mediates an effective two-mode-squeezing interaction between the
//! optical and mechanical quadratures, whose strength is tunable through the
//! magnon detuning and drive. Modules:
//!
//! - [`params`]: laboratory parameters, unit normalization, thermal baths.
//! - [`covariance`]: quadrature bases, covariance states, physicality.
//! - [`linearize`]: classical steady state of the driven system and the
//!   reduction to a quadratic fluctuation model.
//! - [`liouvillian`]: quadrature-flow spectra, level-attraction sweeps, and
//!   numerical extraction of the effective coupling.
//! - [`effective`]: closed-form effective coupling/detuning-shift formulas
//!   and their perturbative underpinnings.
//! - [`dynamics`]: drift/diffusion builders, exact covariance propagation,
//!   steady states, and closed-form variance evolution.
//! - [`entanglement`]: logarithmic negativity and squeezing levels.
//! - [`cli`]: scenario runner behind the `simulate` binary.

pub mod cli;
pub mod covariance;
pub mod cubic;
pub mod dynamics;
pub mod effective;
pub mod eigen;
pub mod entanglement;
pub mod error;
pub mod linearize;
pub mod liouvillian;
pub mod params;

pub use covariance::{Basis, CovarianceState, Mode, Quadrature};
pub use error::{Error, Result};
pub use params::{LinearizedModel, SystemParams};
