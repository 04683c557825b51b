//! Classical steady state of the driven system and reduction to the
//! quadratic fluctuation model.
//!
//! Eliminating the cavity and phonon means from the steady-state conditions
//! leaves a single complex equation for the magnon amplitude whose modulus
//! squared obeys a real cubic: the Kerr term and the phonon-mediated shift
//! act as one effective nonlinearity. The root continuously connected to the
//! undriven solution (smallest occupation) is selected; nearly degenerate
//! roots mark the edge of the bistable region and are flagged, not rejected.
//!
//! Linearization around that amplitude produces the Kerr-shifted detuning,
//! the squeezing parameter r with tanh(2r) = 2|K| / delta_m, and the
//! drive-enhanced magnomechanical coupling.

use num_complex::Complex64;

use crate::cubic::solve_cubic;
use crate::error::{Error, Result};
use crate::params::{LinearizedModel, SystemParams};

/// Classical operating point of the driven system, in units of omega_b.
#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Cavity amplitude <a>.
    pub mean_photon: Complex64,
    /// Phonon amplitude <b>.
    pub mean_phonon: Complex64,
    /// Magnon amplitude <m> (the selected root).
    pub mean_magnon: Complex64,
    /// All admissible magnon occupations |<m>|^2, ascending.
    pub occupation_roots: Vec<f64>,
    /// Residual modulus of the reduced magnon equation at the selected root.
    pub residual: f64,
    /// Residual tolerance scale |g_ma Omega / (i delta_a + kappa_a)|.
    pub residual_scale: f64,
    /// Two occupation roots nearly coincide: the operating point sits at the
    /// edge of the bistable region.
    pub near_bistability: bool,
}

struct ReducedMagnonEquation {
    /// Coefficient of <m>.
    linear: Complex64,
    /// Constant term.
    drive: Complex64,
    /// Coefficient of <m>|<m>|^2, purely imaginary: 2i K_eff.
    kerr_eff: f64,
}

impl ReducedMagnonEquation {
    fn new(p: &SystemParams) -> ReducedMagnonEquation {
        let denom_a = Complex64::new(p.kappa_a, p.detuning_a());
        let kerr_eff = p.kerr + p.g_mb * p.g_mb * p.omega_b / (p.kappa_b * p.kappa_b + p.omega_b * p.omega_b);
        ReducedMagnonEquation {
            linear: -Complex64::new(p.kappa_m, p.detuning_m()) - p.g_ma * p.g_ma / denom_a,
            drive: -p.g_ma * p.drive_rabi / denom_a,
            kerr_eff,
        }
    }

    fn residual(&self, m: Complex64) -> f64 {
        let x = m.norm_sqr();
        (self.linear * m + Complex64::new(0.0, 2.0 * self.kerr_eff) * m * x + self.drive).norm()
    }

    /// Amplitude consistent with an occupation root x = |<m>|^2.
    fn amplitude_at(&self, x: f64) -> Result<Complex64> {
        let denom = self.linear + Complex64::new(0.0, 2.0 * self.kerr_eff * x);
        if denom.norm() < 1.0e-300 {
            return Err(Error::Singular(
                "magnon response denominator vanished at the selected root".into(),
            ));
        }
        Ok(-self.drive / denom)
    }
}

/// Solve the classical steady state. Parameters are normalized internally;
/// all returned rates refer to units of omega_b (amplitudes are unit-free).
pub fn solve_steady_state(params: &SystemParams) -> Result<SteadyState> {
    let p = params.normalize()?;
    let eq = ReducedMagnonEquation::new(&p);

    // |<m>|^2 obeys x |linear + 2i K_eff x|^2 = |drive|^2, a real cubic.
    let re_l = eq.linear.re;
    let im_l = eq.linear.im;
    let k = eq.kerr_eff;
    let c3 = 4.0 * k * k;
    let c2 = 4.0 * k * im_l;
    let c1 = re_l * re_l + im_l * im_l;
    let c0 = -eq.drive.norm_sqr();
    let solved = solve_cubic(c0, c1, c2, c3);

    let mut roots: Vec<f64> = solved
        .roots
        .iter()
        .copied()
        .filter_map(|x| {
            if x >= 0.0 {
                Some(x)
            } else if x > -1.0e-12 * (1.0 + eq.drive.norm_sqr()) {
                Some(0.0)
            } else {
                None
            }
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    let x_sel = *roots.first().ok_or(Error::InfeasibleDrive)?;

    let mean_magnon = eq.amplitude_at(x_sel)?;
    let residual = eq.residual(mean_magnon);
    let residual_scale = eq.drive.norm();
    if residual > 1.0e-10 * residual_scale.max(1.0e-300) {
        return Err(Error::Singular(format!(
            "steady-state residual {residual:.3e} exceeds 1e-10 of the drive scale {residual_scale:.3e}"
        )));
    }

    let denom_a = Complex64::new(p.kappa_a, p.detuning_a());
    let mean_photon = -(Complex64::i() * (p.g_ma * mean_magnon + p.drive_rabi)) / denom_a;
    let denom_b = Complex64::new(p.kappa_b, p.omega_b);
    let mean_phonon = -(Complex64::i() * p.g_mb * x_sel) / denom_b;

    Ok(SteadyState {
        mean_photon,
        mean_phonon,
        mean_magnon,
        occupation_roots: roots,
        residual,
        residual_scale,
        near_bistability: solved.near_double,
    })
}

/// Dispersive-regime estimate |<m>| ~ g_ma * Omega / |delta_m * delta_a|.
/// Valid when couplings and decay rates are far below the detunings and the
/// Kerr and magnomechanical backactions are weak.
pub fn approx_magnon_amplitude(params: &SystemParams) -> Result<f64> {
    let p = params.normalize()?;
    let da = p.detuning_a();
    let dm = p.detuning_m();
    if da == 0.0 || dm == 0.0 {
        return Err(Error::Domain(
            "dispersive magnon estimate requires non-zero cavity and magnon detunings".into(),
        ));
    }
    Ok((p.g_ma * p.drive_rabi / (dm * da)).abs())
}

fn principal_angle(a: f64) -> f64 {
    // Wrap to (-pi, pi].
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = a % two_pi;
    if x <= -std::f64::consts::PI {
        x += two_pi;
    } else if x > std::f64::consts::PI {
        x -= two_pi;
    }
    x
}

/// Linearize around a magnon amplitude (usually from [`solve_steady_state`],
/// but an externally supplied operating point is accepted and checked).
///
/// The phase bookkeeping requires the Kerr term K = kerr * <m>^2 to satisfy
/// K = |K| e^{i theta} with theta = 2 arg<m>, so that the enhanced coupling
/// inherits the half phase. A negative Kerr coefficient breaks that and is
/// rejected.
pub fn build_linearized(params: &SystemParams, m_ss: Complex64) -> Result<LinearizedModel> {
    let p = params.normalize()?;
    if !m_ss.re.is_finite() || !m_ss.im.is_finite() {
        return Err(Error::Domain("magnon amplitude must be finite".into()));
    }

    let occupation = m_ss.norm_sqr();
    let abs_kerr = p.kerr * occupation;
    let theta = 2.0 * m_ss.arg();
    if abs_kerr != 0.0 {
        let kerr_term = p.kerr * m_ss * m_ss;
        let mismatch = principal_angle(kerr_term.arg() - theta).abs();
        if mismatch > 1.0e-8 {
            return Err(Error::PhaseMismatch(format!(
                "arg(K) deviates from 2 arg<m> by {mismatch:.3e} rad; the |K| e^(i theta) \
                 bookkeeping requires a positive Kerr coefficient"
            )));
        }
    }

    let delta_m_shifted = p.detuning_m() - 2.0 * abs_kerr;
    let r = if abs_kerr == 0.0 {
        0.0
    } else {
        if delta_m_shifted <= 2.0 * abs_kerr {
            return Err(Error::HyperbolicDomain {
                twice_abs_kerr: 2.0 * abs_kerr,
                delta_m: delta_m_shifted,
            });
        }
        0.5 * (2.0 * abs_kerr / delta_m_shifted).atanh()
    };

    let model = LinearizedModel {
        delta_a: p.detuning_a(),
        delta_m: delta_m_shifted,
        delta_m_prime: delta_m_shifted / (2.0 * r).cosh(),
        omega_b: p.omega_b,
        r,
        theta,
        abs_kerr,
        g: p.g_ma,
        g_mech: p.g_mb * m_ss.norm(),
        kappa_a: p.kappa_a,
        kappa_b: p.kappa_b,
        kappa_m: p.kappa_m,
        n_a: p.n_a,
        n_b: p.n_b,
        n_m: p.n_m,
    };
    model.validate()?;
    Ok(model)
}
