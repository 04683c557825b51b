//! Closed-form effective photon-phonon coupling and resonance shift.
//!
//! Adiabatic elimination of the far-detuned squeezed magnon leaves a direct
//! two-mode-squeezing interaction between photon and phonon of strength
//! g_eff, together with a shift delta of the resonance point away from
//! delta_a = -omega_b. Both follow from second-order perturbation theory in
//! the photon-magnon and magnon-phonon couplings; the Fock-state energy
//! shifts epsilon_1, epsilon_2 underlying delta are exposed for testing the
//! derivation (their difference must not depend on the Fock indices).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::LinearizedModel;

fn resonance_denominator(model: &LinearizedModel) -> Result<f64> {
    let ch = model.cosh_2r();
    let denom = model.delta_m * model.delta_m - model.omega_b * model.omega_b * ch * ch;
    if (model.delta_m.abs() - model.omega_b * ch).abs() < 1.0e-9 {
        return Err(Error::Singular(format!(
            "magnon detuning {:.6e} sits on the squeezed-frame resonance omega_b cosh(2r) = {:.6e}",
            model.delta_m,
            model.omega_b * ch
        )));
    }
    Ok(denom)
}

/// Effective two-mode-squeezing strength between photon and phonon.
///
/// Negative for detunings above the squeezed-frame resonance; only |g_eff|
/// enters spectra and variances, the sign fixes the squeezed quadrature pair.
pub fn g_eff_analytic(model: &LinearizedModel) -> Result<f64> {
    model.validate()?;
    let denom = resonance_denominator(model)?;
    let ch = model.cosh_2r();
    let e2r = model.exp_2r();
    Ok(model.g * model.g_mech * ch * (model.omega_b * ch - model.delta_m * e2r) / denom)
}

/// Shift of the optimal cavity detuning: level attraction is centred at
/// delta_a = -omega_b + delta.
pub fn delta_analytic(model: &LinearizedModel) -> Result<f64> {
    model.validate()?;
    let denom = resonance_denominator(model)?;
    let ch = model.cosh_2r();
    let e2r = model.exp_2r();
    let num = 2.0 * model.g_mech * model.g_mech * model.delta_m * e2r * ch
        + model.g * model.g * (model.delta_m - model.omega_b) * ch * ch;
    Ok(num / denom)
}

/// Second-order energy shifts of the dressed Fock states |n, l, k> (photon,
/// magnon, phonon) and the pair coupling between |n, l, k> and
/// |n+1, l, k+1>.
#[derive(Clone, Debug)]
pub struct PerturbationShifts {
    pub n: u32,
    pub l: u32,
    pub k: u32,
    /// Shift entering the |n, l, k> level.
    pub epsilon_1: f64,
    /// Shift entering the |n+1, l, k+1> level.
    pub epsilon_2: f64,
    /// Pair-creation coupling -sqrt((n+1)(k+1)) e^{i theta/2} g_eff.
    pub g_tilde: Complex64,
}

/// Evaluate the second-order shifts at cavity detuning `delta_a`.
///
/// The four virtual-transition terms per shift are hard-coded; epsilon_2 is
/// epsilon_1 with each Fock factor advanced by one photon-phonon pair, so
/// epsilon_1 - epsilon_2 is independent of (n, l, k).
pub fn perturbation_shifts(
    model: &LinearizedModel,
    delta_a: f64,
    n: u32,
    l: u32,
    k: u32,
) -> Result<PerturbationShifts> {
    model.validate()?;
    let dp = model.delta_m_prime;
    let wb = model.omega_b;
    let g2c = model.g * model.g * model.r.cosh() * model.r.cosh();
    let g2s = model.g * model.g * model.r.sinh() * model.r.sinh();
    let ge2 = model.g_mech * model.g_mech * model.exp_2r();
    for (name, d) in [
        ("delta_a - delta_m_prime", delta_a - dp),
        ("delta_a + delta_m_prime", delta_a + dp),
        ("omega_b - delta_m_prime", wb - dp),
        ("omega_b + delta_m_prime", wb + dp),
    ] {
        if d.abs() < 1.0e-12 {
            return Err(Error::Singular(format!(
                "virtual-transition denominator {name} vanishes"
            )));
        }
    }
    let (nf, lf, kf) = (f64::from(n), f64::from(l), f64::from(k));
    let shift = |dn: f64| -> f64 {
        (nf - lf + dn) * g2c / (delta_a - dp) - (nf + lf + 1.0 + dn) * g2s / (delta_a + dp)
            + (kf - lf + dn) * ge2 / (wb - dp)
            - (kf + lf + 1.0 + dn) * ge2 / (wb + dp)
    };
    let epsilon_1 = shift(0.0);
    let epsilon_2 = shift(1.0);
    let g_eff = g_eff_analytic(model)?;
    let g_tilde = -(((nf + 1.0) * (kf + 1.0)).sqrt())
        * Complex64::from_polar(1.0, model.theta / 2.0)
        * g_eff;
    Ok(PerturbationShifts {
        n,
        l,
        k,
        epsilon_1,
        epsilon_2,
        g_tilde,
    })
}

/// Self-consistency report for the resonance shift: the first-order shift A,
/// the quadratic-response coefficient B, the resummed shift A / (1 - B), and
/// the closed form, with their relative gap.
#[derive(Clone, Debug)]
pub struct DeltaConsistency {
    pub first_order: f64,
    pub response: f64,
    pub resummed: f64,
    pub analytic: f64,
    pub relative_gap: f64,
}

/// Compare delta_analytic against the resummed perturbative shift.
///
/// A is epsilon_1 - epsilon_2 evaluated at delta_a = -omega_b (equal to the
/// closed two-term form used here); B is its derivative coefficient in
/// delta_a, so the self-consistent solution of delta = A + B delta is
/// A / (1 - B). The closed form equals A identically, hence the relative gap
/// is |B / (1 - B)| up to rounding.
pub fn delta_consistency(model: &LinearizedModel) -> Result<DeltaConsistency> {
    model.validate()?;
    let dp = model.delta_m_prime;
    let wb = model.omega_b;
    let g2c = model.g * model.g * model.r.cosh() * model.r.cosh();
    let g2s = model.g * model.g * model.r.sinh() * model.r.sinh();
    let ge2 = model.g_mech * model.g_mech * model.exp_2r();
    for (name, d) in [("delta_m_prime + omega_b", dp + wb), ("delta_m_prime - omega_b", dp - wb)] {
        if d.abs() < 1.0e-12 {
            return Err(Error::Singular(format!("resonance denominator {name} vanishes")));
        }
    }
    let first_order = (ge2 + g2c) / (dp + wb) + (ge2 + g2s) / (dp - wb);
    let response = g2c / ((dp + wb) * (dp + wb)) - g2s / ((dp - wb) * (dp - wb));
    if (1.0 - response).abs() < 1.0e-9 {
        return Err(Error::Singular("shift resummation pole: B = 1".into()));
    }
    let resummed = first_order / (1.0 - response);
    let analytic = delta_analytic(model)?;
    let scale = analytic.abs().max(1.0e-300);
    Ok(DeltaConsistency {
        first_order,
        response,
        resummed,
        analytic,
        relative_gap: (resummed - analytic).abs() / scale,
    })
}

/// Adiabaticity diagnostics: each coupling over the smallest detuning gap it
/// must stay below. Ratios above ~0.3 mean the magnon is no longer a mere
/// mediator and the closed forms degrade.
#[derive(Clone, Debug)]
pub struct ValidityRatios {
    pub rotating: f64,
    pub counter_rotating: f64,
    pub magnon_phonon: f64,
    pub flagged: bool,
}

pub fn validity_ratios(model: &LinearizedModel, delta_a: f64) -> ValidityRatios {
    let gap = (model.delta_m_prime - model.omega_b)
        .abs()
        .min((model.delta_m_prime - delta_a).abs())
        .max(f64::MIN_POSITIVE);
    let rotating = (model.g * model.r.cosh() / gap).abs();
    let counter_rotating = (model.g * model.r.sinh() / gap).abs();
    let magnon_phonon = (model.g_mech * model.r.exp() / gap).abs();
    let flagged = rotating > 0.3 || counter_rotating > 0.3 || magnon_phonon > 0.3;
    ValidityRatios {
        rotating,
        counter_rotating,
        magnon_phonon,
        flagged,
    }
}
