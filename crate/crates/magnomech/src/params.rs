//! Physical parameter sets and unit handling.
//!
//! Two levels of description coexist. [`SystemParams`] holds the laboratory
//! quantities of the driven cavity-magnomechanical system: a microwave cavity
//! mode, a Kerr magnon mode coupled to it by a beam-splitter interaction, and
//! a mechanical mode coupled to the magnon dispersively. [`LinearizedModel`]
//! holds the quantities that govern the quadratic fluctuation dynamics after
//! the strong drive has been eliminated: detunings in the drive frame, the
//! squeezing parameter induced by the Kerr shift, and the drive-enhanced
//! couplings. Everything downstream of linearization consumes
//! [`LinearizedModel`] only.
//!
//! Frequencies are angular. Internally all rates are measured in units of the
//! mechanical frequency; [`SystemParams::normalize`] converts absolute inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Mean thermal occupation of a bosonic mode with angular frequency `omega`
/// (rad/s) in equilibrium with a bath at `temperature` (K).
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupation requires a positive mode frequency, got {omega}"
        )));
    }
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupation requires a non-negative temperature, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Laboratory-frame parameters of the driven three-mode system.
///
/// `n_a`, `n_m`, `n_b` are bath occupations (dimensionless); every other
/// field is an angular frequency or rate. With `normalized` set, rates are
/// in units of `omega_b` (so `omega_b == 1`); otherwise they are absolute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity resonance frequency.
    pub omega_a: f64,
    /// Magnon resonance frequency.
    pub omega_m: f64,
    /// Mechanical resonance frequency.
    pub omega_b: f64,
    /// Microwave drive frequency.
    pub omega_d: f64,
    /// Self-Kerr coefficient of the magnon mode.
    pub kerr: f64,
    /// Photon-magnon beam-splitter coupling.
    pub g_ma: f64,
    /// Bare magnomechanical (magnon-phonon) coupling.
    pub g_mb: f64,
    /// Rabi rate of the coherent microwave drive on the cavity.
    pub drive_rabi: f64,
    pub kappa_a: f64,
    pub kappa_m: f64,
    pub kappa_b: f64,
    pub n_a: f64,
    pub n_m: f64,
    pub n_b: f64,
    /// True once rates are expressed in units of `omega_b`.
    pub normalized: bool,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_a", self.omega_a),
            ("omega_m", self.omega_m),
            ("omega_b", self.omega_b),
            ("omega_d", self.omega_d),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be a positive frequency, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("kappa_a", self.kappa_a),
            ("kappa_m", self.kappa_m),
            ("kappa_b", self.kappa_b),
            ("n_a", self.n_a),
            ("n_m", self.n_m),
            ("n_b", self.n_b),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("kerr", self.kerr),
            ("g_ma", self.g_ma),
            ("g_mb", self.g_mb),
            ("drive_rabi", self.drive_rabi),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Rescale every rate to units of the mechanical frequency. Idempotent.
    pub fn normalize(&self) -> Result<SystemParams> {
        self.validate()?;
        if self.normalized {
            return Ok(self.clone());
        }
        let w = self.omega_b;
        Ok(SystemParams {
            omega_a: self.omega_a / w,
            omega_m: self.omega_m / w,
            omega_b: 1.0,
            omega_d: self.omega_d / w,
            kerr: self.kerr / w,
            g_ma: self.g_ma / w,
            g_mb: self.g_mb / w,
            drive_rabi: self.drive_rabi / w,
            kappa_a: self.kappa_a / w,
            kappa_m: self.kappa_m / w,
            kappa_b: self.kappa_b / w,
            n_a: self.n_a,
            n_m: self.n_m,
            n_b: self.n_b,
            normalized: true,
        })
    }

    /// Cavity detuning from the drive.
    pub fn detuning_a(&self) -> f64 {
        self.omega_a - self.omega_d
    }

    /// Bare magnon detuning from the drive (before the Kerr shift).
    pub fn detuning_m(&self) -> f64 {
        self.omega_m - self.omega_d
    }
}

/// Parameters of the quadratic fluctuation model in the drive frame.
///
/// `delta_m` already contains the Kerr shift; `delta_m_prime` is the
/// squeezed-frame magnon detuning `delta_m / cosh(2r)`. `theta` records the
/// physical squeezing phase. Spectra and covariance dynamics are evaluated in
/// the quadrature gauge where `theta = pi` (a local phase rotation of the
/// modes), which leaves eigenvalues, optimized variances, and entanglement
/// unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizedModel {
    /// Cavity detuning in the drive frame.
    pub delta_a: f64,
    /// Kerr-shifted magnon detuning.
    pub delta_m: f64,
    /// Squeezed-frame magnon detuning, `delta_m / cosh(2r)`.
    pub delta_m_prime: f64,
    /// Mechanical frequency (1 in normalized units).
    pub omega_b: f64,
    /// Magnon squeezing parameter from the Kerr shift.
    pub r: f64,
    /// Squeezing phase.
    pub theta: f64,
    /// Magnitude of the Kerr shift term, `|K| = delta_m * tanh(2r) / 2`.
    pub abs_kerr: f64,
    /// Photon-magnon coupling.
    pub g: f64,
    /// Drive-enhanced magnon-phonon coupling magnitude.
    pub g_mech: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_m: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub n_m: f64,
}

impl LinearizedModel {
    /// Build a model directly from detunings and a squeezing parameter,
    /// deriving the dependent fields. `delta_m` is the Kerr-shifted detuning.
    #[allow(clippy::too_many_arguments)]
    pub fn from_squeezing(
        delta_a: f64,
        delta_m: f64,
        omega_b: f64,
        r: f64,
        g: f64,
        g_mech: f64,
        kappa_a: f64,
        kappa_b: f64,
        kappa_m: f64,
        n_a: f64,
        n_b: f64,
        n_m: f64,
    ) -> Result<LinearizedModel> {
        let model = LinearizedModel {
            delta_a,
            delta_m,
            delta_m_prime: delta_m / (2.0 * r).cosh(),
            omega_b,
            r,
            theta: std::f64::consts::PI,
            abs_kerr: delta_m * (2.0 * r).tanh() / 2.0,
            g,
            g_mech,
            kappa_a,
            kappa_b,
            kappa_m,
            n_a,
            n_b,
            n_m,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega_b.is_finite() || self.omega_b <= 0.0 {
            return Err(Error::Domain(format!(
                "omega_b must be a positive frequency, got {}",
                self.omega_b
            )));
        }
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::Domain(format!(
                "squeezing parameter must be non-negative, got {}",
                self.r
            )));
        }
        if self.r > 0.0 && self.delta_m <= 0.0 {
            return Err(Error::Domain(format!(
                "positive squeezing requires a positive magnon detuning, got delta_m = {}",
                self.delta_m
            )));
        }
        for (name, v) in [
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("kappa_m", self.kappa_m),
            ("n_a", self.n_a),
            ("n_b", self.n_b),
            ("n_m", self.n_m),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("delta_a", self.delta_a),
            ("delta_m", self.delta_m),
            ("delta_m_prime", self.delta_m_prime),
            ("theta", self.theta),
            ("abs_kerr", self.abs_kerr),
            ("g", self.g),
            ("g_mech", self.g_mech),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        // Dependent-field consistency: tanh(2r) * delta_m = 2|K| and
        // delta_m_prime * cosh(2r) = delta_m.
        let scale = self.delta_m.abs().max(1.0);
        if ((2.0 * self.r).tanh() * self.delta_m - 2.0 * self.abs_kerr).abs() > 1e-9 * scale {
            return Err(Error::Domain(
                "inconsistent fields: tanh(2r) * delta_m != 2|K|".into(),
            ));
        }
        if (self.delta_m_prime * (2.0 * self.r).cosh() - self.delta_m).abs() > 1e-9 * scale {
            return Err(Error::Domain(
                "inconsistent fields: delta_m_prime * cosh(2r) != delta_m".into(),
            ));
        }
        Ok(())
    }

    /// Squeezing-frame magnon damping, `exp(2r) * kappa_m`.
    pub fn kappa_m_squeezed(&self) -> f64 {
        (2.0 * self.r).exp() * self.kappa_m
    }

    pub fn cosh_2r(&self) -> f64 {
        (2.0 * self.r).cosh()
    }

    pub fn sinh_2r(&self) -> f64 {
        (2.0 * self.r).sinh()
    }

    pub fn exp_2r(&self) -> f64 {
        (2.0 * self.r).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn thermal_occupation_zero_temperature() {
        assert_eq!(thermal_occupation(1.0e8, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn thermal_occupation_unit_exponent() {
        // hbar*omega = k_B*T makes the occupation 1/(e - 1).
        let omega = 1.0e9;
        let t = HBAR * omega / K_BOLTZMANN;
        let n = thermal_occupation(omega, t).unwrap();
        assert_relative_eq!(n, 1.0 / (1.0f64.exp() - 1.0), max_relative = 1e-12);
        assert_relative_eq!(n, 0.581_976_706_869_326_4, max_relative = 1e-12);
    }

    #[test]
    fn thermal_occupation_millikelvin_megahertz() {
        // 20 MHz mechanical mode at 10 mK sits near 10 thermal phonons.
        let omega = 2.0 * std::f64::consts::PI * 20.0e6;
        let n = thermal_occupation(omega, 0.010).unwrap();
        assert!((n - 10.0).abs() / 10.0 < 0.15, "n = {n}");
    }

    #[test]
    fn thermal_occupation_rejects_bad_inputs() {
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
        assert!(thermal_occupation(1.0, -0.1).is_err());
    }

    fn lab_params() -> SystemParams {
        let omega_b = 2.0 * std::f64::consts::PI * 20.0e6;
        SystemParams {
            omega_a: 2.0 * std::f64::consts::PI * 10.0e9,
            omega_m: 2.0 * std::f64::consts::PI * 10.0e9,
            omega_b,
            omega_d: 2.0 * std::f64::consts::PI * 10.0e9 - omega_b,
            kerr: 2.0 * std::f64::consts::PI * 10.0e-9,
            g_ma: 0.1 * omega_b,
            g_mb: 2.0 * std::f64::consts::PI * 0.1,
            drive_rabi: 1.0e14,
            kappa_a: 2.0 * std::f64::consts::PI * 20.0e3,
            kappa_m: 2.0 * std::f64::consts::PI * 200.0e3,
            kappa_b: 2.0 * std::f64::consts::PI * 200.0,
            n_a: 0.0,
            n_m: 0.0,
            n_b: 10.0,
            normalized: false,
        }
    }

    #[test]
    fn normalize_scales_rates_by_mechanical_frequency() {
        let p = lab_params().normalize().unwrap();
        assert!(p.normalized);
        assert_abs_diff_eq!(p.omega_b, 1.0);
        // 2pi*200 Hz against a 2pi*20 MHz mechanical frequency is 1e-5.
        assert_relative_eq!(p.kappa_b, 1.0e-5, max_relative = 1e-12);
        assert_relative_eq!(p.g_ma, 0.1, max_relative = 1e-12);
        assert_abs_diff_eq!(p.n_b, 10.0);
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = lab_params().normalize().unwrap();
        let twice = once.normalize().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn normalize_rejects_nonpositive_frequencies() {
        let mut p = lab_params();
        p.omega_m = 0.0;
        assert!(matches!(p.normalize(), Err(Error::Domain(_))));
        let mut p = lab_params();
        p.omega_b = -1.0;
        assert!(p.normalize().is_err());
    }

    #[test]
    fn detunings_are_frame_differences() {
        let p = lab_params().normalize().unwrap();
        assert_relative_eq!(p.detuning_a(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(p.detuning_m(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn from_squeezing_derives_consistent_fields() {
        let m = LinearizedModel::from_squeezing(
            -1.0, 3.0, 1.0, 0.25, 0.1, 0.1, 1.0e-3, 1.0e-5, 1.0e-2, 0.0, 10.0, 0.0,
        )
        .unwrap();
        assert_relative_eq!(m.delta_m_prime, 3.0 / 0.5f64.cosh(), max_relative = 1e-14);
        assert_relative_eq!(m.abs_kerr, 1.5 * 0.5f64.tanh(), max_relative = 1e-14);
        assert_relative_eq!(m.kappa_m_squeezed(), 1.0e-2 * 0.5f64.exp(), max_relative = 1e-14);
        m.validate().unwrap();
    }

    #[test]
    fn validate_rejects_inconsistent_dependent_fields() {
        let mut m = LinearizedModel::from_squeezing(
            -1.0, 3.0, 1.0, 0.25, 0.1, 0.1, 1.0e-3, 1.0e-5, 1.0e-2, 0.0, 10.0, 0.0,
        )
        .unwrap();
        m.abs_kerr *= 1.1;
        assert!(m.validate().is_err());
    }

    #[test]
    fn validate_rejects_negative_rates() {
        let m = LinearizedModel::from_squeezing(
            -1.0, 3.0, 1.0, 0.25, 0.1, 0.1, -1.0e-3, 1.0e-5, 1.0e-2, 0.0, 10.0, 0.0,
        );
        assert!(m.is_err());
    }
}
