//! Dense eigendecomposition for the small real nonsymmetric matrices that
//! appear as quadrature-flow generators (dimension 4 or 6).
//!
//! Eigenvalues come from the real Schur form; eigenvectors are recovered per
//! eigenvalue as the null direction of (M - lambda I) via a complex SVD,
//! which stays well-behaved near the exceptional points where two branches
//! coalesce. Every returned pair is residual-checked.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: DVector<C64>,
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigenvalues of a real square matrix, in the Schur ordering.
///
/// The QR iteration is run with a bounded sweep count: the +/- paired
/// spectra of quadrature flows can stall its deflation criterion forever.
/// On a stall the matrix is retried under a few orthogonal similarities,
/// which scramble the stalling sparsity pattern without moving the
/// spectrum.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::UnsupportedDim(m.nrows().max(m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("eigenvalue input has non-finite entries".into()));
    }
    let max_sweeps = 200 * m.nrows().max(8);
    if let Some(schur) = m.clone().try_schur(f64::EPSILON, max_sweeps) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    for seed in 1..=3u64 {
        let q = mixing_orthogonal(m.nrows(), seed);
        let rotated = &q * m * q.transpose();
        if let Some(schur) = rotated.try_schur(f64::EPSILON, max_sweeps) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::Singular("eigenvalue QR iteration did not converge".into()))
}

fn mixing_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    // xorshift stream; statistical quality is irrelevant here, the
    // orthogonality comes from the QR factorization.
    let mut s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).max(1);
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s as f64 / u64::MAX as f64) - 0.5
    };
    DMatrix::from_fn(n, n, |_, _| next()).qr().q()
}

fn null_vector(shifted: &DMatrix<C64>) -> Result<DVector<C64>> {
    let n = shifted.nrows();
    let svd = shifted.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Singular("SVD did not produce right singular vectors".into()))?;
    let mut min_idx = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < svd.singular_values[min_idx] {
            min_idx = i;
        }
    }
    // Rows of V^H are conjugated right singular vectors.
    let mut v = DVector::<C64>::zeros(n);
    for j in 0..n {
        v[j] = v_t[(min_idx, j)].conj();
    }
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(Error::Singular("null-space vector collapsed to zero".into()));
    }
    Ok(v / C64::new(norm, 0.0))
}

/// Eigenpairs of a real square matrix with unit-norm eigenvectors.
///
/// Residuals are enforced: ||M v - lambda v|| <= 1e-7 ||M||_F for every pair
/// (typically they land near machine precision; the loose bound only trips on
/// genuinely broken decompositions).
pub fn eigen_pairs(m: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let values = eigenvalues(m)?;
    let mc = to_complex(m);
    let n = m.nrows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    for lambda in values {
        let mut shifted = mc.clone();
        for i in 0..n {
            shifted[(i, i)] -= lambda;
        }
        let mut vector = null_vector(&shifted)?;
        let mut residual = (&mc * &vector - &vector * lambda).norm();
        if residual > 1.0e-9 * scale {
            // One Rayleigh-quotient refinement of the eigenvalue, then redo
            // the null-space extraction.
            let refined = vector.dotc(&(&mc * &vector));
            let mut shifted2 = mc.clone();
            for i in 0..n {
                shifted2[(i, i)] -= refined;
            }
            if let Ok(v2) = null_vector(&shifted2) {
                let r2 = (&mc * &v2 - &v2 * lambda).norm();
                if r2 < residual {
                    vector = v2;
                    residual = r2;
                }
            }
        }
        if residual > 1.0e-7 * scale {
            return Err(Error::Singular(format!(
                "eigenpair residual {residual:.3e} exceeds tolerance at lambda = {lambda}"
            )));
        }
        pairs.push(EigenPair { value: lambda, vector });
    }
    Ok(pairs)
}

/// |<v, w>| for unit vectors; phase-insensitive overlap used for branch
/// matching.
pub fn overlap(v: &DVector<C64>, w: &DVector<C64>) -> f64 {
    v.dotc(w).norm()
}
