//! Quadrature bases and Gaussian covariance states.
//!
//! Quadratures are X = (o + o')/sqrt(2), Y = (o - o')/(i sqrt(2)) so that
//! [X, Y] = i and the vacuum covariance matrix is I/2. Mode order is fixed:
//! photon, phonon, then (in the three-mode basis) magnon, interleaved as
//! [X_a, Y_a, X_b, Y_b, X_m, Y_m].

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Photon,
    Phonon,
    Magnon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    Y,
}

/// The two covariance bases in use: the reduced photon-phonon description and
/// the full photon-phonon-magnon description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Effective,
    Full,
}

impl Basis {
    pub fn n_modes(self) -> usize {
        match self {
            Basis::Effective => 2,
            Basis::Full => 3,
        }
    }

    pub fn dim(self) -> usize {
        2 * self.n_modes()
    }

    pub fn modes(self) -> &'static [Mode] {
        match self {
            Basis::Effective => &[Mode::Photon, Mode::Phonon],
            Basis::Full => &[Mode::Photon, Mode::Phonon, Mode::Magnon],
        }
    }

    /// Row/column of a quadrature in this basis, or None if the mode is not
    /// part of the basis.
    pub fn index_of(self, mode: Mode, quad: Quadrature) -> Option<usize> {
        let mode_pos = self.modes().iter().position(|&m| m == mode)?;
        Some(2 * mode_pos + if quad == Quadrature::X { 0 } else { 1 })
    }

    /// Inverse of [`Basis::index_of`].
    pub fn quadrature_at(self, index: usize) -> Result<(Mode, Quadrature)> {
        if index >= self.dim() {
            return Err(Error::UnsupportedDim(index));
        }
        let mode = self.modes()[index / 2];
        let quad = if index % 2 == 0 { Quadrature::X } else { Quadrature::Y };
        Ok((mode, quad))
    }

    pub fn for_dim(dim: usize) -> Result<Basis> {
        match dim {
            4 => Ok(Basis::Effective),
            6 => Ok(Basis::Full),
            other => Err(Error::UnsupportedDim(other)),
        }
    }
}

/// Symplectic form Sigma for `n_modes` modes in the interleaved ordering:
/// block-diagonal [[0, 1], [-1, 0]] per mode, so [u_i, u_j] = i Sigma_ij.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut s = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        s[(2 * k, 2 * k + 1)] = 1.0;
        s[(2 * k + 1, 2 * k)] = -1.0;
    }
    s
}

/// A covariance matrix tagged with the time it refers to.
///
/// The matrix is symmetrized exactly on construction; inputs with asymmetry
/// beyond rounding noise are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceState {
    time: f64,
    matrix: DMatrix<f64>,
}

impl CovarianceState {
    pub fn new(time: f64, matrix: DMatrix<f64>) -> Result<CovarianceState> {
        let dim = matrix.nrows();
        if !(dim == 4 || dim == 6) || matrix.ncols() != dim {
            return Err(Error::UnsupportedDim(dim.max(matrix.ncols())));
        }
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Domain(format!("state time must be >= 0, got {time}")));
        }
        let scale = matrix.amax().max(1.0);
        if !scale.is_finite() {
            return Err(Error::Domain("covariance matrix has non-finite entries".into()));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1.0e-9 * scale {
            return Err(Error::Domain(format!(
                "covariance matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(CovarianceState { time, matrix: sym })
    }

    /// Vacuum state, V = I/2.
    pub fn vacuum(basis: Basis) -> CovarianceState {
        CovarianceState {
            time: 0.0,
            matrix: DMatrix::identity(basis.dim(), basis.dim()) * 0.5,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis(&self) -> Basis {
        Basis::for_dim(self.dim()).expect("dimension fixed at construction")
    }

    /// Element accessor in the interleaved quadrature ordering.
    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Top-left 4x4 photon-phonon block (identity on the effective basis).
    pub fn photon_phonon_block(&self) -> DMatrix<f64> {
        self.matrix.view((0, 0), (4, 4)).into_owned()
    }

    /// Smallest eigenvalue of the Hermitian matrix V + i Sigma / 2. The state
    /// satisfies the uncertainty relation iff this is >= 0 (up to rounding);
    /// the vacuum sits exactly on the boundary.
    pub fn uncertainty_margin(&self) -> f64 {
        let dim = self.dim();
        let sigma = symplectic_form(dim / 2);
        let mut h = DMatrix::<Complex<f64>>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                h[(i, j)] = Complex::new(self.matrix[(i, j)], 0.5 * sigma[(i, j)]);
            }
        }
        let eig = h.symmetric_eigen();
        eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Physicality at tolerance `tol` (a small negative margin is rounding
    /// noise, not a violation).
    pub fn is_physical(&self, tol: f64) -> bool {
        self.uncertainty_margin() >= -tol
    }
}
