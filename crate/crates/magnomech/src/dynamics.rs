//! Covariance dynamics: drift/diffusion construction, exact Lyapunov
//! propagation, closed-form solutions, squeezing variances, and stability.
//!
//! The covariance matrix obeys V' = AV + VA^T + D. Because A and D are
//! constant, each time step is propagated exactly as V(t+h) = F V F^T + Q
//! with F = e^{Ah} and Q the accumulated noise over the step, both read off
//! one block matrix exponential (Van Loan construction). The vacuum-initial
//! photon-phonon model additionally admits closed-form element solutions,
//! from which the shared-quadrature variance, the optimal squeezing angle,
//! its asymptotic variance, and the minimum-variance time follow.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::covariance::{Basis, CovarianceState};
use crate::eigen;
use crate::error::{Error, Result};
use crate::liouvillian;
use crate::params::LinearizedModel;

/// Drift matrix A of the covariance equation of motion.
#[derive(Clone, Debug)]
pub struct DriftMatrix {
    pub a: DMatrix<f64>,
    pub kind: Basis,
}

/// Diagonal diffusion matrix D; entries kappa_o (2 N_o + 1) per quadrature.
#[derive(Clone, Debug)]
pub struct DiffusionMatrix {
    pub d: DMatrix<f64>,
    pub kind: Basis,
}

/// Photon-phonon drift: local damping plus the pair-creation coupling that
/// feeds X_a<->X_b with one sign and Y_a<->Y_b with the other.
pub fn build_drift_effective(g_eff: f64, kappa_a: f64, kappa_b: f64) -> DriftMatrix {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        -kappa_a,  0.0,      g_eff,    0.0,
         0.0,     -kappa_a,  0.0,     -g_eff,
         g_eff,    0.0,     -kappa_b,  0.0,
         0.0,     -g_eff,    0.0,     -kappa_b,
    ]);
    DriftMatrix {
        a,
        kind: Basis::Effective,
    }
}

/// Six-mode drift: coherent generator plus local damping. The magnon decay
/// is enlarged to e^{2r} kappa_m by the squeezing transformation.
pub fn build_drift_full(model: &LinearizedModel, delta_a: f64) -> Result<DriftMatrix> {
    let sup = liouvillian::build_full(model, delta_a)?;
    let mut a = sup.r;
    let km = model.kappa_m_squeezed();
    for (i, rate) in [
        model.kappa_a,
        model.kappa_a,
        model.kappa_b,
        model.kappa_b,
        km,
        km,
    ]
    .into_iter()
    .enumerate()
    {
        a[(i, i)] -= rate;
    }
    Ok(DriftMatrix {
        a,
        kind: Basis::Full,
    })
}

/// Photon-phonon diffusion from explicit rates and occupations.
pub fn build_diffusion_effective(
    kappa_a: f64,
    kappa_b: f64,
    n_a: f64,
    n_b: f64,
) -> DiffusionMatrix {
    let da = kappa_a * (2.0 * n_a + 1.0);
    let db = kappa_b * (2.0 * n_b + 1.0);
    DiffusionMatrix {
        d: DMatrix::from_diagonal(&DVector::from_column_slice(&[da, da, db, db])),
        kind: Basis::Effective,
    }
}

/// Diffusion matrix for either basis; the magnon entries carry the squeezed
/// decay rate e^{2r} kappa_m.
pub fn build_diffusion(kind: Basis, model: &LinearizedModel) -> Result<DiffusionMatrix> {
    model.validate()?;
    match kind {
        Basis::Effective => Ok(build_diffusion_effective(
            model.kappa_a,
            model.kappa_b,
            model.n_a,
            model.n_b,
        )),
        Basis::Full => {
            let da = model.kappa_a * (2.0 * model.n_a + 1.0);
            let db = model.kappa_b * (2.0 * model.n_b + 1.0);
            let dm = model.kappa_m_squeezed() * (2.0 * model.n_m + 1.0);
            Ok(DiffusionMatrix {
                d: DMatrix::from_diagonal(&DVector::from_column_slice(&[da, da, db, db, dm, dm])),
                kind: Basis::Full,
            })
        }
    }
}

/// Exact covariance trajectory at the requested times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CovarianceState>,
}

/// Per-time record of the covariance elements and variances read from a
/// trajectory state at squeezing angle `phi`.
#[derive(Clone, Copy, Debug)]
pub struct VarianceRecord {
    pub t: f64,
    pub v11: f64,
    pub v33: f64,
    pub v13: f64,
    pub delta_x: f64,
    pub delta_x_phi: f64,
}

impl Trajectory {
    /// Covariance elements and variances along the trajectory, with the
    /// rotated-quadrature variance evaluated at angle `phi`.
    pub fn derived(&self, phi: f64) -> Vec<VarianceRecord> {
        self.states
            .iter()
            .map(|s| {
                let b = s.photon_phonon_block();
                VarianceRecord {
                    t: s.time(),
                    v11: b[(0, 0)],
                    v33: b[(2, 2)],
                    v13: b[(0, 2)],
                    delta_x: variance_x(s),
                    delta_x_phi: variance_xphi(s, phi),
                }
            })
            .collect()
    }
}

/// One-step transition pair: F = e^{Ah} and the accumulated noise Q(h),
/// from the exponential of [[A, D], [0, -A^T]].
fn van_loan(
    cache: &mut HashMap<u64, (DMatrix<f64>, DMatrix<f64>)>,
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    h: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    if let Some((f, q)) = cache.get(&h.to_bits()) {
        return (f.clone(), q.clone());
    }
    let n = a.nrows();
    let mut block = DMatrix::<f64>::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(a);
    block.view_mut((0, n), (n, n)).copy_from(d);
    block.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    let e = (block * h).exp();
    let f = e.view((0, 0), (n, n)).into_owned();
    let q_raw = e.view((0, n), (n, n)).into_owned() * f.transpose();
    let q = (&q_raw + q_raw.transpose()) * 0.5;
    cache.insert(h.to_bits(), (f.clone(), q.clone()));
    (f, q)
}

/// Largest ||A|| h evaluated in one exponential. The -A^T block grows like
/// e^{+||A|| h} even for stable drifts; keeping the per-step growth near e^4
/// preserves full precision in the noise integral while the step cache keeps
/// the subdivided walk cheap.
const STEP_NORM_CAP: f64 = 4.0;

/// Advance V by h, halving the step while the block exponential would grow
/// enough to cost precision (or overflow); errors only when the state
/// itself is beyond representable range.
fn step_once(
    cache: &mut HashMap<u64, (DMatrix<f64>, DMatrix<f64>)>,
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    v: &DMatrix<f64>,
    h: f64,
    depth: u32,
) -> Result<DMatrix<f64>> {
    if a.norm() * h > STEP_NORM_CAP && depth < 60 {
        let half = step_once(cache, a, d, v, 0.5 * h, depth + 1)?;
        return step_once(cache, a, d, &half, 0.5 * h, depth + 1);
    }
    let (f, q) = van_loan(cache, a, d, h);
    if f.iter().all(|x| x.is_finite()) && q.iter().all(|x| x.is_finite()) {
        let next = &f * v * f.transpose() + &q;
        let next = (&next + next.transpose()) * 0.5;
        if next.iter().all(|x| x.is_finite()) {
            return Ok(next);
        }
        return Err(Error::Overflow(h));
    }
    if depth >= 60 {
        return Err(Error::Overflow(h));
    }
    let half = step_once(cache, a, d, v, 0.5 * h, depth + 1)?;
    step_once(cache, a, d, &half, 0.5 * h, depth + 1)
}

/// Propagate a covariance state to each requested time, exactly per step.
///
/// Times must be finite, strictly increasing, and start at or after the
/// state's own time stamp. The transition pair (F, Q) is cached per distinct
/// step size, so uniform grids cost a single matrix exponential.
pub fn propagate(
    a: &DriftMatrix,
    d: &DiffusionMatrix,
    v0: &CovarianceState,
    times: &[f64],
) -> Result<Trajectory> {
    if a.kind != d.kind || a.kind != v0.basis() {
        return Err(Error::Domain(format!(
            "drift ({:?}), diffusion ({:?}), and state ({:?}) bases must match",
            a.kind,
            d.kind,
            v0.basis()
        )));
    }
    if times.is_empty() {
        return Err(Error::Domain("at least one output time is required".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("output times must be finite".into()));
    }
    if times[0] < v0.time() {
        return Err(Error::Domain(format!(
            "first output time {} precedes the state time {}",
            times[0],
            v0.time()
        )));
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("output times must be strictly increasing".into()));
        }
    }
    let mut cache = HashMap::new();
    let mut v = v0.matrix().clone();
    let mut t_prev = v0.time();
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let h = t - t_prev;
        if h > 0.0 {
            v = step_once(&mut cache, &a.a, &d.d, &v, h, 0)?;
        }
        states.push(CovarianceState::new(t, v.clone())?);
        t_prev = t;
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// Stationary covariance of a strictly stable drift, from the vectorized
/// linear system (I (x) A + A (x) I) vec(V) = -vec(D).
pub fn steady_state_cm(a: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceState> {
    if a.kind != d.kind {
        return Err(Error::Domain("drift and diffusion bases must match".into()));
    }
    let abscissa = eigen::eigenvalues(&a.a)?
        .into_iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if abscissa >= 0.0 {
        return Err(Error::Unstable(abscissa));
    }
    let n = a.a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let system = eye.kronecker(&a.a) + a.a.kronecker(&eye);
    let rhs = -DVector::from_column_slice(d.d.as_slice());
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("stationary covariance solve failed".into()))?;
    let v = DMatrix::from_column_slice(n, n, sol.as_slice());
    let v = (&v + v.transpose()) * 0.5;
    let residual = (&a.a * &v + &v * a.a.transpose() + &d.d).norm();
    let scale = d.d.norm().max(f64::MIN_POSITIVE);
    if residual > 1.0e-10 * scale {
        return Err(Error::Singular(format!(
            "stationary covariance residual {residual:.3e} exceeds 1e-10 of the noise scale"
        )));
    }
    CovarianceState::new(0.0, v)
}

/// Constants of the vacuum-initial photon-phonon closed-form solution.
///
/// The rate Omega = sqrt(4 g_eff^2 + (kappa_a - kappa_b)^2) and the mixing
/// angle varphi with cos = 2 g_eff / Omega, sin = (kappa_a - kappa_b) /
/// Omega (this quadrant choice reproduces the propagator; at Omega = 0 the
/// convention sin = 0, cos = 1 keeps the solution exact).
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormConstants {
    pub g_eff: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub omega_rate: f64,
    pub sin_varphi: f64,
    pub cos_varphi: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub c_zero: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c: f64,
    /// Constant term of the shared-quadrature variance.
    pub c_asym: f64,
    /// Optimal squeezing angle.
    pub phi_opt: f64,
}

impl ClosedFormConstants {
    pub fn new(g_eff: f64, kappa_a: f64, kappa_b: f64, n_a: f64, n_b: f64) -> Result<Self> {
        for (name, x) in [
            ("g_eff", g_eff),
            ("kappa_a", kappa_a),
            ("kappa_b", kappa_b),
            ("n_a", n_a),
            ("n_b", n_b),
        ] {
            if !x.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite")));
            }
        }
        if kappa_a <= 0.0 || kappa_b <= 0.0 {
            return Err(Error::Domain("decay rates must be positive".into()));
        }
        if n_a < 0.0 || n_b < 0.0 {
            return Err(Error::Domain("thermal occupations must be non-negative".into()));
        }
        let det_gap = kappa_a * kappa_b - g_eff * g_eff;
        if det_gap.abs() < 1.0e-14 {
            return Err(Error::Singular(format!(
                "stationary constants diverge at the stability boundary: kappa_a kappa_b - g_eff^2 = {det_gap:.3e}"
            )));
        }
        let diff = kappa_a - kappa_b;
        let ks = kappa_a + kappa_b;
        let omega_rate = (4.0 * g_eff * g_eff + diff * diff).sqrt();
        let (sin_varphi, cos_varphi) = if omega_rate > 0.0 {
            (diff / omega_rate, 2.0 * g_eff / omega_rate)
        } else {
            (0.0, 1.0)
        };
        let kappa_plus = kappa_a * (2.0 * n_a + 1.0) + kappa_b * (2.0 * n_b + 1.0);
        let kappa_minus = kappa_a * (2.0 * n_a + 1.0) - kappa_b * (2.0 * n_b + 1.0);
        let c_plus = (kappa_plus - sin_varphi * kappa_minus) / (4.0 * (omega_rate - ks)) + 0.25;
        let c_minus = -(kappa_plus + sin_varphi * kappa_minus) / (4.0 * (omega_rate + ks)) + 0.25;
        let c_zero = cos_varphi * kappa_minus / (2.0 * ks);
        let c = g_eff * kappa_a * kappa_b * (n_a + n_b + 1.0) / (det_gap * ks);
        let c_a = n_a + 0.5 + g_eff / kappa_a * c;
        let c_b = n_b + 0.5 + g_eff / kappa_b * c;
        let c_asym = 0.5 * (n_a + n_b + 1.0) * kappa_a * kappa_b * (2.0 * g_eff + ks)
            / (det_gap * ks);
        let phi_opt = optimal_angle(g_eff, kappa_a, kappa_b).phi;
        Ok(ClosedFormConstants {
            g_eff,
            kappa_a,
            kappa_b,
            n_a,
            n_b,
            omega_rate,
            sin_varphi,
            cos_varphi,
            kappa_plus,
            kappa_minus,
            c_plus,
            c_minus,
            c_zero,
            c_a,
            c_b,
            c,
            c_asym,
            phi_opt,
        })
    }

    /// Closed-form covariance elements (V11, V33, V13) at time t.
    pub fn elements(&self, t: f64) -> (f64, f64, f64) {
        let ks = self.kappa_a + self.kappa_b;
        let grow = ((self.omega_rate - ks) * t).exp();
        let relax = (-ks * t).exp();
        let shrink = (-(self.omega_rate + ks) * t).exp();
        let v11 = self.c_plus * (1.0 - self.sin_varphi) * grow
            - self.c_zero * self.cos_varphi * relax
            + self.c_minus * (1.0 + self.sin_varphi) * shrink
            + self.c_a;
        let v33 = self.c_plus * (1.0 + self.sin_varphi) * grow
            + self.c_zero * self.cos_varphi * relax
            + self.c_minus * (1.0 - self.sin_varphi) * shrink
            + self.c_b;
        let v13 = self.c_plus * self.cos_varphi * grow - self.c_zero * self.sin_varphi * relax
            - self.c_minus * self.cos_varphi * shrink
            + self.c;
        (v11, v33, v13)
    }

    /// Shared-quadrature variance at time t.
    pub fn delta_x(&self, t: f64) -> f64 {
        let ks = self.kappa_a + self.kappa_b;
        (1.0 + self.cos_varphi) * self.c_plus * ((self.omega_rate - ks) * t).exp()
            - self.sin_varphi * self.c_zero * (-ks * t).exp()
            + (1.0 - self.cos_varphi) * self.c_minus * (-(self.omega_rate + ks) * t).exp()
            + self.c_asym
    }

    /// Time derivative of the shared-quadrature variance.
    pub fn delta_x_dot(&self, t: f64) -> f64 {
        let ks = self.kappa_a + self.kappa_b;
        (self.omega_rate - ks) * (1.0 + self.cos_varphi) * self.c_plus
            * ((self.omega_rate - ks) * t).exp()
            + ks * self.sin_varphi * self.c_zero * (-ks * t).exp()
            - (self.omega_rate + ks) * (1.0 - self.cos_varphi) * self.c_minus
                * (-(self.omega_rate + ks) * t).exp()
    }
}

/// Closed-form photon-phonon covariance elements from the vacuum state.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormCm {
    pub t: f64,
    pub v11: f64,
    pub v33: f64,
    pub v13: f64,
}

impl ClosedFormCm {
    /// Reconstruct the full 4x4 state using the symmetries V22 = V11,
    /// V44 = V33, V24 = -V13 of the vacuum-initial solution.
    pub fn state(&self) -> Result<CovarianceState> {
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            self.v11,  0.0,       self.v13,  0.0,
            0.0,       self.v11,  0.0,      -self.v13,
            self.v13,  0.0,       self.v33,  0.0,
            0.0,      -self.v13,  0.0,       self.v33,
        ]);
        CovarianceState::new(self.t, m)
    }
}

/// Vacuum-initial closed-form covariance elements at time t.
pub fn cm_closed_form(
    g_eff: f64,
    kappa_a: f64,
    kappa_b: f64,
    n_a: f64,
    n_b: f64,
    t: f64,
) -> Result<ClosedFormCm> {
    let k = ClosedFormConstants::new(g_eff, kappa_a, kappa_b, n_a, n_b)?;
    let (v11, v33, v13) = k.elements(t);
    Ok(ClosedFormCm { t, v11, v33, v13 })
}

/// Variance of the shared quadrature (X_a + X_b)/sqrt(2):
/// (V11 + V33 + 2 V13) / 2 on the photon-phonon block.
pub fn variance_x(v: &CovarianceState) -> f64 {
    let b = v.photon_phonon_block();
    0.5 * (b[(0, 0)] + b[(2, 2)] + 2.0 * b[(0, 2)])
}

/// Variance of the rotated quadrature cos(phi) X_a + sin(phi) X_b.
pub fn variance_xphi(v: &CovarianceState, phi: f64) -> f64 {
    let b = v.photon_phonon_block();
    let (s, c) = phi.sin_cos();
    c * c * b[(0, 0)] + s * s * b[(2, 2)] + 2.0 * s * c * b[(0, 2)]
}

/// Minimum of `variance_xphi` over the angle: the instantaneous best
/// squeezing the cos(phi) X_a + sin(phi) X_b quadrature family offers.
/// For states whose squeezing ellipse wobbles in time (six-mode
/// propagation carries micromotion the resonant picture averages away),
/// this is the faithful per-time observable; any fixed angle oversamples
/// the wobble.
pub fn variance_xphi_optimal(v: &CovarianceState) -> f64 {
    let b = v.photon_phonon_block();
    let mean = 0.5 * (b[(0, 0)] + b[(2, 2)]);
    let half_gap = 0.5 * (b[(0, 0)] - b[(2, 2)]);
    mean - half_gap.hypot(b[(0, 2)])
}

/// Undo the free rotation of the photon (at -omega_b) and phonon (at
/// +omega_b) quadratures so propagated states can be compared element-wise
/// with the resonant effective solution. Symplectic and local, so
/// entanglement measures on the photon-phonon pair are unchanged.
pub fn corotating_frame(state: &CovarianceState, omega_b: f64) -> Result<CovarianceState> {
    let t = state.time();
    let rot = |beta: f64| {
        let (s, c) = beta.sin_cos();
        [[c, s], [-s, c]]
    };
    let n = state.dim();
    let mut s_mat = DMatrix::<f64>::identity(n, n);
    let blocks = [rot(omega_b * t), rot(-omega_b * t)];
    for (k, b) in blocks.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                s_mat[(2 * k + i, 2 * k + j)] = b[i][j];
            }
        }
    }
    let m = &s_mat * state.matrix() * s_mat.transpose();
    CovarianceState::new(t, m)
}

/// Optimal squeezing angle, with a degeneracy flag for the symmetric
/// uncoupled case where every angle is equivalent.
#[derive(Clone, Copy, Debug)]
pub struct OptimalAngle {
    pub phi: f64,
    pub degenerate: bool,
}

/// Angle that cancels the exponentially growing variance component:
/// phi = (varphi - pi/2) / 2, normalized to (-pi/2, pi/2], where
/// varphi = atan2(kappa_a - kappa_b, 2 g_eff). Satisfies
/// tan(2 phi) = 2 g_eff / (kappa_b - kappa_a).
pub fn optimal_angle(g_eff: f64, kappa_a: f64, kappa_b: f64) -> OptimalAngle {
    let diff = kappa_a - kappa_b;
    if g_eff == 0.0 && diff == 0.0 {
        return OptimalAngle {
            phi: PI / 4.0,
            degenerate: true,
        };
    }
    let varphi = diff.atan2(2.0 * g_eff);
    let mut phi = 0.5 * (varphi - PI / 2.0);
    if phi <= -PI / 2.0 {
        phi += PI;
    }
    OptimalAngle {
        phi,
        degenerate: false,
    }
}

/// Closed-form variance of the optimally rotated quadrature:
/// 1/2 + 2 C_-(e^{-(Omega + kappa_a + kappa_b) t} - 1). Monotone in t; the
/// growing component is cancelled by construction.
pub fn variance_xphi_closed(
    g_eff: f64,
    kappa_a: f64,
    kappa_b: f64,
    n_a: f64,
    n_b: f64,
    t: f64,
) -> f64 {
    let diff = kappa_a - kappa_b;
    let ks = kappa_a + kappa_b;
    let omega = (4.0 * g_eff * g_eff + diff * diff).sqrt();
    let sin_varphi = if omega > 0.0 { diff / omega } else { 0.0 };
    let kappa_plus = kappa_a * (2.0 * n_a + 1.0) + kappa_b * (2.0 * n_b + 1.0);
    let kappa_minus = kappa_a * (2.0 * n_a + 1.0) - kappa_b * (2.0 * n_b + 1.0);
    let c_minus = -(kappa_plus + sin_varphi * kappa_minus) / (4.0 * (omega + ks)) + 0.25;
    0.5 + 2.0 * c_minus * ((-(omega + ks) * t).exp() - 1.0)
}

/// Long-time limit of the optimal-angle variance:
/// [Omega kappa_+ + (kappa_a - kappa_b) kappa_-] / [2 Omega (Omega + kappa_a
/// + kappa_b)]. Strictly decreases as |g_eff| grows.
pub fn variance_xphi_asymptotic(
    g_eff: f64,
    kappa_a: f64,
    kappa_b: f64,
    n_a: f64,
    n_b: f64,
) -> Result<f64> {
    let diff = kappa_a - kappa_b;
    let ks = kappa_a + kappa_b;
    let omega = (4.0 * g_eff * g_eff + diff * diff).sqrt();
    if omega == 0.0 {
        return Err(Error::Domain(
            "degenerate: g_eff = 0 with equal decay rates leaves no preferred angle".into(),
        ));
    }
    let kappa_plus = kappa_a * (2.0 * n_a + 1.0) + kappa_b * (2.0 * n_b + 1.0);
    let kappa_minus = kappa_a * (2.0 * n_a + 1.0) - kappa_b * (2.0 * n_b + 1.0);
    Ok((omega * kappa_plus + diff * kappa_minus) / (2.0 * omega * (omega + ks)))
}

/// Stable-regime variance floor report.
#[derive(Clone, Copy, Debug)]
pub struct StableLimit {
    /// Stationary shared-quadrature variance (diverges at the boundary).
    pub c_variance: f64,
    /// Minimum of the stationary variance over g_eff, reached at
    /// g_eff = -kappa_b (meaningful for kappa_a > kappa_b).
    pub c_min: f64,
    pub is_stable: bool,
}

/// Stationary variance constant, its minimum over the coupling, and the
/// stability classification g_eff^2 < kappa_a kappa_b.
pub fn stable_limit(
    kappa_a: f64,
    kappa_b: f64,
    n_a: f64,
    n_b: f64,
    g_eff: f64,
) -> StableLimit {
    let ks = kappa_a + kappa_b;
    let c_variance = 0.5 * (n_a + n_b + 1.0) * kappa_a * kappa_b * (2.0 * g_eff + ks)
        / ((kappa_a * kappa_b - g_eff * g_eff) * ks);
    let c_min = 0.5 * (n_a + n_b + 1.0) * kappa_a / ks;
    StableLimit {
        c_variance,
        c_min,
        is_stable: g_eff * g_eff < kappa_a * kappa_b,
    }
}

/// Minimum of the shared-quadrature variance in the unstable regime.
#[derive(Clone, Copy, Debug)]
pub struct TauResult {
    pub tau: f64,
    pub delta_x_min: f64,
}

/// Time of the interior minimum of the shared-quadrature variance.
///
/// Exists only in the unstable regime with an initially decreasing variance
/// (its initial slope is N_a kappa_a + N_b kappa_b + g_eff); located by
/// doubling a bracket of its derivative's sign change, then bisecting to a
/// relative width of 1e-6.
pub fn find_tau(
    g_eff: f64,
    kappa_a: f64,
    kappa_b: f64,
    n_a: f64,
    n_b: f64,
) -> Result<TauResult> {
    if g_eff * g_eff <= kappa_a * kappa_b {
        return Err(Error::NotApplicable(
            "stable regime: the shared-quadrature variance relaxes monotonically to its stationary value"
                .into(),
        ));
    }
    let k = ClosedFormConstants::new(g_eff, kappa_a, kappa_b, n_a, n_b)?;
    if k.delta_x_dot(0.0) >= 0.0 {
        return Err(Error::NotApplicable(
            "variance is non-decreasing at t = 0; no interior minimum".into(),
        ));
    }
    let mut hi = 1.0f64;
    while k.delta_x_dot(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1.0e12 {
            return Err(Error::NotApplicable(
                "variance derivative never turns positive within the search horizon".into(),
            ));
        }
    }
    let mut lo = 0.0f64;
    let mut iterations = 0;
    while hi - lo > 1.0e-6 * hi && iterations < 500 {
        let mid = 0.5 * (lo + hi);
        if k.delta_x_dot(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let tau = 0.5 * (lo + hi);
    Ok(TauResult {
        tau,
        delta_x_min: k.delta_x(tau),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig4_model() -> LinearizedModel {
        LinearizedModel::from_squeezing(
            -1.0, 3.0, 1.0, 0.25, 0.1, 0.1, 1.0e-3, 1.0e-5, 1.0e-2, 0.0, 10.0, 0.0,
        )
        .unwrap()
    }

    fn fig4_g_eff() -> f64 {
        effective::g_eff_analytic(&fig4_model()).unwrap()
    }

    #[test]
    fn effective_drift_reduces_to_damping() {
        let a = build_drift_effective(0.0, 2.0, 3.0);
        let want = DMatrix::from_diagonal(&DVector::from_column_slice(&[-2.0, -2.0, -3.0, -3.0]));
        assert_relative_eq!(a.a, want, max_relative = 1e-15);
    }

    #[test]
    fn lossless_effective_drift_has_real_pair_spectrum() {
        let a = build_drift_effective(0.07, 0.0, 0.0);
        let mut evs: Vec<f64> = eigen::eigenvalues(&a.a)
            .unwrap()
            .into_iter()
            .map(|e| {
                assert!(e.im.abs() < 1e-12);
                e.re
            })
            .collect();
        evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in evs.iter().zip([-0.07, -0.07, 0.07, 0.07]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn unstable_drift_abscissa_is_half_omega_minus_rates() {
        let g = fig4_g_eff();
        let a = build_drift_effective(g, 1.0e-3, 1.0e-5);
        let abscissa = eigen::eigenvalues(&a.a)
            .unwrap()
            .into_iter()
            .map(|e| e.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let omega = (4.0 * g * g + (1.0e-3 - 1.0e-5f64).powi(2)).sqrt();
        assert!(abscissa > 0.0);
        assert_relative_eq!(abscissa, 0.5 * (omega - 1.01e-3), max_relative = 1e-9);
    }

    #[test]
    fn full_drift_decoupled_damped_rotations() {
        let m = LinearizedModel::from_squeezing(
            -1.0, 3.0, 1.0, 0.0, 0.0, 0.0, 1.0e-3, 1.0e-5, 1.0e-2, 0.0, 0.0, 0.0,
        )
        .unwrap();
        let a = build_drift_full(&m, -1.0).unwrap();
        let evs = eigen::eigenvalues(&a.a).unwrap();
        let mut found = [false; 6];
        for e in &evs {
            for (k, (re, im)) in [
                (-1.0e-3, 1.0),
                (-1.0e-3, -1.0),
                (-1.0e-5, 1.0),
                (-1.0e-5, -1.0),
                (-1.0e-2, 3.0),
                (-1.0e-2, -3.0),
            ]
            .into_iter()
            .enumerate()
            {
                if (e.re - re).abs() < 1e-10 && (e.im - im).abs() < 1e-10 {
                    found[k] = true;
                }
            }
        }
        assert!(found.iter().all(|&f| f), "{evs:?}");
    }

    #[test]
    fn full_drift_magnon_damping_is_squeezed() {
        let m = fig4_model();
        let a = build_drift_full(&m, -1.0).unwrap();
        let want = -0.5f64.exp() * 1.0e-2;
        assert_relative_eq!(a.a[(4, 4)], want, max_relative = 1e-12);
        assert_relative_eq!(a.a[(5, 5)], want, max_relative = 1e-12);
        let trace = -2.0 * (1.0e-3 + 1.0e-5 + 0.5f64.exp() * 1.0e-2);
        assert_relative_eq!(a.a.trace(), trace, max_relative = 1e-12);
    }

    #[test]
    fn diffusion_entries_follow_occupations() {
        let zero = build_diffusion_effective(1.0e-3, 1.0e-5, 0.0, 0.0);
        for (i, want) in [1.0e-3, 1.0e-3, 1.0e-5, 1.0e-5].into_iter().enumerate() {
            assert_relative_eq!(zero.d[(i, i)], want, max_relative = 1e-15);
        }
        let m = fig4_model();
        let eff = build_diffusion(Basis::Effective, &m).unwrap();
        assert_relative_eq!(eff.d[(2, 2)], 21.0 * 1.0e-5, max_relative = 1e-12);
        let full = build_diffusion(Basis::Full, &m).unwrap();
        assert_relative_eq!(full.d[(4, 4)], 0.5f64.exp() * 1.0e-2, max_relative = 1e-12);
        assert_eq!(full.d.nrows(), 6);
        assert!(full.d.iter().enumerate().all(|(k, &x)| x == 0.0 || k % 7 == 0));
    }

    #[test]
    fn frozen_dynamics_keep_the_state() {
        let a = DriftMatrix {
            a: DMatrix::zeros(4, 4),
            kind: Basis::Effective,
        };
        let d = DiffusionMatrix {
            d: DMatrix::zeros(4, 4),
            kind: Basis::Effective,
        };
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let tr = propagate(&a, &d, &v0, &[1.0, 5.0, 100.0]).unwrap();
        for s in &tr.states {
            assert_relative_eq!(*s.matrix(), *v0.matrix(), max_relative = 1e-15);
        }
    }

    #[test]
    fn relaxation_matches_ornstein_uhlenbeck() {
        let (ka, na) = (0.31, 1.7);
        let a = build_drift_effective(0.0, ka, 0.11);
        let d = build_diffusion_effective(ka, 0.11, na, 0.0);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let times: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
        let tr = propagate(&a, &d, &v0, &times).unwrap();
        for s in &tr.states {
            let decay = (-2.0 * ka * s.time()).exp();
            let want = (na + 0.5) * (1.0 - decay) + 0.5 * decay;
            assert_abs_diff_eq!(s.v(0, 0), want, epsilon = 1e-12);
            assert_abs_diff_eq!(s.v(0, 2), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn propagator_matches_closed_form_on_fig4_parameters() {
        let g = fig4_g_eff();
        let (ka, kb, na, nb) = (1.0e-3, 1.0e-5, 0.0, 10.0);
        let a = build_drift_effective(g, ka, kb);
        let d = build_diffusion_effective(ka, kb, na, nb);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let times: Vec<f64> = (1..=60).map(|i| 10.0 * i as f64).collect();
        let tr = propagate(&a, &d, &v0, &times).unwrap();
        for s in &tr.states {
            let cf = cm_closed_form(g, ka, kb, na, nb, s.time()).unwrap();
            assert_abs_diff_eq!(s.v(0, 0), cf.v11, epsilon = 1e-8);
            assert_abs_diff_eq!(s.v(2, 2), cf.v33, epsilon = 1e-8);
            assert_abs_diff_eq!(s.v(0, 2), cf.v13, epsilon = 1e-8);
            assert_abs_diff_eq!(s.v(1, 1), cf.v11, epsilon = 1e-8);
            assert_abs_diff_eq!(s.v(3, 3), cf.v33, epsilon = 1e-8);
            assert_abs_diff_eq!(s.v(1, 3), -cf.v13, epsilon = 1e-8);
        }
    }

    /// Fixed-step fourth-order Runge-Kutta reference for the covariance
    /// equation of motion, independent of the matrix-exponential route.
    fn rk4_reference(
        a: &DMatrix<f64>,
        d: &DMatrix<f64>,
        v0: &DMatrix<f64>,
        t_end: f64,
        steps: usize,
    ) -> DMatrix<f64> {
        let h = t_end / steps as f64;
        let rhs = |v: &DMatrix<f64>| a * v + v * a.transpose() + d;
        let mut v = v0.clone();
        for _ in 0..steps {
            let k1 = rhs(&v);
            let k2 = rhs(&(&v + &k1 * (0.5 * h)));
            let k3 = rhs(&(&v + &k2 * (0.5 * h)));
            let k4 = rhs(&(&v + &k3 * h));
            v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        v
    }

    #[test]
    fn propagator_matches_runge_kutta_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (dim, basis) in [(4, Basis::Effective), (6, Basis::Full)] {
            for shift in [-0.4, 0.03] {
                let raw = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-0.3..0.3));
                let a_mat = raw + DMatrix::<f64>::identity(dim, dim) * shift;
                let noise = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-0.2..0.2));
                let d_mat = (&noise * noise.transpose()) * 0.1;
                let a = DriftMatrix {
                    a: a_mat.clone(),
                    kind: basis,
                };
                let d = DiffusionMatrix {
                    d: d_mat.clone(),
                    kind: basis,
                };
                let v0 = CovarianceState::vacuum(basis);
                let got = propagate(&a, &d, &v0, &[50.0]).unwrap();
                let want = rk4_reference(&a_mat, &d_mat, v0.matrix(), 50.0, 50_000);
                let scale = want.norm().max(1.0);
                assert!(
                    (got.states[0].matrix() - &want).norm() <= 1e-7 * scale,
                    "dim {dim} shift {shift}: gap {}",
                    (got.states[0].matrix() - &want).norm()
                );
            }
        }
    }

    #[test]
    fn propagation_composes_like_a_semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let raw = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-0.5..0.5));
        let a = DriftMatrix {
            a: raw - DMatrix::<f64>::identity(4, 4) * 0.3,
            kind: Basis::Effective,
        };
        let noise = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-0.5..0.5));
        let d = DiffusionMatrix {
            d: &noise * noise.transpose(),
            kind: Basis::Effective,
        };
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let direct = propagate(&a, &d, &v0, &[7.3]).unwrap();
        let stop = propagate(&a, &d, &v0, &[2.9]).unwrap();
        let resumed = propagate(&a, &d, &stop.states[0], &[7.3]).unwrap();
        let gap = (direct.states[0].matrix() - resumed.states[0].matrix()).norm();
        assert!(gap <= 1e-10 * direct.states[0].matrix().norm().max(1.0), "gap {gap}");
    }

    #[test]
    fn long_stable_steps_subdivide_instead_of_overflowing() {
        // kappa t = 800 overflows the anti-stable block of the Van Loan
        // exponential; subdivision must recover the exact relaxation.
        let a = build_drift_effective(0.0, 1.0, 1.0);
        let d = build_diffusion_effective(1.0, 1.0, 0.0, 0.0);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let tr = propagate(&a, &d, &v0, &[800.0]).unwrap();
        assert_relative_eq!(tr.states[0].v(0, 0), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn runaway_growth_is_an_overflow_error() {
        let a = DriftMatrix {
            a: DMatrix::<f64>::identity(4, 4) * 5.0,
            kind: Basis::Effective,
        };
        let d = DiffusionMatrix {
            d: DMatrix::zeros(4, 4),
            kind: Basis::Effective,
        };
        let v0 = CovarianceState::vacuum(Basis::Effective);
        assert!(matches!(
            propagate(&a, &d, &v0, &[200.0]),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn propagate_validates_inputs() {
        let a = build_drift_effective(0.0, 1.0, 1.0);
        let d = build_diffusion_effective(1.0, 1.0, 0.0, 0.0);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        assert!(propagate(&a, &d, &v0, &[]).is_err());
        assert!(propagate(&a, &d, &v0, &[1.0, 1.0]).is_err());
        assert!(propagate(&a, &d, &v0, &[f64::NAN]).is_err());
        let v6 = CovarianceState::vacuum(Basis::Full);
        assert!(propagate(&a, &d, &v6, &[1.0]).is_err());
    }

    #[test]
    fn vacuum_is_the_lossy_fixed_point() {
        let a = build_drift_effective(0.0, 0.4, 0.2);
        let d = build_diffusion_effective(0.4, 0.2, 0.0, 0.0);
        let ss = steady_state_cm(&a, &d).unwrap();
        let half = DMatrix::<f64>::identity(4, 4) * 0.5;
        assert_relative_eq!(*ss.matrix(), half, max_relative = 1e-12);
    }

    #[test]
    fn steady_state_matches_stationary_constants() {
        let (g, ka, kb, na, nb) = (-0.3e-3, 1.0e-3, 1.0e-3, 0.4, 2.0);
        let a = build_drift_effective(g, ka, kb);
        let d = build_diffusion_effective(ka, kb, na, nb);
        let ss = steady_state_cm(&a, &d).unwrap();
        let k = ClosedFormConstants::new(g, ka, kb, na, nb).unwrap();
        assert_relative_eq!(ss.v(0, 0), k.c_a, max_relative = 1e-9);
        assert_relative_eq!(ss.v(2, 2), k.c_b, max_relative = 1e-9);
        assert_relative_eq!(ss.v(0, 2), k.c, max_relative = 1e-9);
        let residual = (&a.a * ss.matrix() + ss.matrix() * a.a.transpose() + &d.d).norm();
        assert!(residual <= 1e-10 * d.d.norm());
    }

    #[test]
    fn unstable_drift_has_no_steady_state() {
        let g = fig4_g_eff();
        let a = build_drift_effective(g, 1.0e-3, 1.0e-5);
        let d = build_diffusion_effective(1.0e-3, 1.0e-5, 0.0, 10.0);
        match steady_state_cm(&a, &d) {
            Err(Error::Unstable(abscissa)) => assert!(abscissa > 0.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn closed_form_starts_at_vacuum_and_stays_there_without_coupling() {
        let cf = cm_closed_form(-0.02, 0.3, 0.04, 1.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(cf.v11, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cf.v33, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cf.v13, 0.0, epsilon = 1e-12);
        for t in [0.0, 1.0, 10.0, 300.0] {
            let free = cm_closed_form(0.0, 0.3, 0.04, 0.0, 0.0, t).unwrap();
            assert_abs_diff_eq!(free.v11, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(free.v33, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(free.v13, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_rejects_the_stability_boundary() {
        assert!(matches!(
            cm_closed_form(1.0e-3, 1.0e-3, 1.0e-3, 0.0, 0.0, 1.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn closed_form_state_reconstruction_is_symmetric() {
        let g = fig4_g_eff();
        let cf = cm_closed_form(g, 1.0e-3, 1.0e-5, 0.0, 10.0, 100.0).unwrap();
        let state = cf.state().unwrap();
        assert_eq!(state.dim(), 4);
        assert_relative_eq!(state.v(1, 1), cf.v11, max_relative = 1e-15);
        assert_relative_eq!(state.v(1, 3), -cf.v13, max_relative = 1e-15);
    }

    #[test]
    fn variances_on_vacuum_are_half_for_any_angle() {
        let v = CovarianceState::vacuum(Basis::Effective);
        assert_abs_diff_eq!(variance_x(&v), 0.5, epsilon = 1e-15);
        for phi in [-1.2, 0.0, 0.3, PI / 4.0, 1.5] {
            assert_abs_diff_eq!(variance_xphi(&v, phi), 0.5, epsilon = 1e-12);
        }
        let v6 = CovarianceState::vacuum(Basis::Full);
        assert_abs_diff_eq!(variance_x(&v6), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn angle_conventions_recover_known_slices() {
        let g = fig4_g_eff();
        let cf = cm_closed_form(g, 1.0e-3, 1.0e-5, 0.0, 10.0, 200.0).unwrap();
        let state = cf.state().unwrap();
        assert_relative_eq!(variance_xphi(&state, PI / 4.0), variance_x(&state), max_relative = 1e-12);
        assert_relative_eq!(variance_xphi(&state, 0.0), cf.v11, max_relative = 1e-12);
    }

    #[test]
    fn optimal_angle_tangent_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let g: f64 = rng.gen_range(-0.5..0.5);
            let ka: f64 = rng.gen_range(1.0e-4..1.0e-1);
            let kb: f64 = rng.gen_range(1.0e-4..1.0e-1);
            let ang = optimal_angle(g, ka, kb);
            if ang.degenerate {
                continue;
            }
            assert!(ang.phi > -PI / 2.0 && ang.phi <= PI / 2.0);
            let lhs = (2.0 * ang.phi).tan();
            let rhs = 2.0 * g / (kb - ka);
            if rhs.abs() < 1.0e6 {
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn optimal_angle_cancels_the_divergent_coefficient() {
        let g = fig4_g_eff();
        let k = ClosedFormConstants::new(g, 1.0e-3, 1.0e-5, 0.0, 10.0).unwrap();
        let varphi = (1.0e-3 - 1.0e-5f64).atan2(2.0 * g);
        let tilde = varphi - 2.0 * k.phi_opt;
        let coefficient = k.c_plus * (1.0 - tilde.sin());
        assert!(coefficient.abs() < 1e-12, "left-over growth {coefficient:.3e}");
    }

    #[test]
    fn equal_rates_make_every_angle_match_the_shared_quadrature() {
        let (g, kappa) = (-0.02, 5.0e-3);
        let ang = optimal_angle(g, kappa, kappa);
        assert!(!ang.degenerate);
        let a = build_drift_effective(g, kappa, kappa);
        let d = build_diffusion_effective(kappa, kappa, 0.3, 0.7);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let times: Vec<f64> = (1..=10).map(|i| 5.0 * i as f64).collect();
        let tr = propagate(&a, &d, &v0, &times).unwrap();
        for s in &tr.states {
            assert_relative_eq!(
                variance_xphi(s, ang.phi),
                variance_x(s),
                max_relative = 1e-9
            );
        }
        let degenerate = optimal_angle(0.0, kappa, kappa);
        assert!(degenerate.degenerate);
        assert_abs_diff_eq!(degenerate.phi, PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn optimal_variance_closed_form_tracks_the_propagator() {
        let g = fig4_g_eff();
        let (ka, kb, na, nb) = (1.0e-3, 1.0e-5, 0.0, 10.0);
        assert_abs_diff_eq!(variance_xphi_closed(g, ka, kb, na, nb, 0.0), 0.5, epsilon = 1e-15);
        let ang = optimal_angle(g, ka, kb);
        let a = build_drift_effective(g, ka, kb);
        let d = build_diffusion_effective(ka, kb, na, nb);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let times: Vec<f64> = (1..=60).map(|i| 10.0 * i as f64).collect();
        let tr = propagate(&a, &d, &v0, &times).unwrap();
        for s in &tr.states {
            let closed = variance_xphi_closed(g, ka, kb, na, nb, s.time());
            assert_abs_diff_eq!(variance_xphi(s, ang.phi), closed, epsilon = 1e-8);
        }
    }

    #[test]
    fn asymptotic_variance_reference_values() {
        let g = fig4_g_eff();
        let v_inf = variance_xphi_asymptotic(g, 1.0e-3, 1.0e-5, 0.0, 10.0).unwrap();
        assert_relative_eq!(v_inf, 0.052468, max_relative = 1e-4);
        let long = variance_xphi_closed(g, 1.0e-3, 1.0e-5, 0.0, 10.0, 5.0e5);
        assert_relative_eq!(long, v_inf, max_relative = 1e-9);
        // Stronger couplings squeeze deeper.
        let m2 = LinearizedModel::from_squeezing(
            -1.0, 3.0, 1.0, 0.25, 0.2, 0.2, 1.0e-3, 1.0e-5, 1.0e-2, 0.0, 10.0, 0.0,
        )
        .unwrap();
        let g2 = effective::g_eff_analytic(&m2).unwrap();
        assert_relative_eq!(g2, -0.0222859, max_relative = 1e-4);
        let v2 = variance_xphi_asymptotic(g2, 1.0e-3, 1.0e-5, 0.0, 10.0).unwrap();
        assert_relative_eq!(v2, 0.0134620, max_relative = 1e-4);
        assert!(v2 < v_inf);
        // No coupling, equal rates: nothing squeezes.
        let trivial = variance_xphi_asymptotic(0.0, 1.0e-3, 1.0e-3, 0.0, 0.0);
        assert!(trivial.is_err());
        let near = variance_xphi_asymptotic(1.0e-9, 1.0e-3, 1.0e-3, 0.0, 0.0).unwrap();
        assert_relative_eq!(near, 0.5, max_relative = 1e-3);
    }

    #[test]
    fn asymptotic_variance_decreases_with_coupling() {
        let mut prev = f64::INFINITY;
        for i in 1..=40 {
            let g = -0.001 * i as f64;
            let v = variance_xphi_asymptotic(g, 1.0e-3, 1.0e-5, 0.0, 10.0).unwrap();
            assert!(v < prev, "not decreasing at g = {g}");
            prev = v;
        }
    }

    #[test]
    fn stable_floor_at_heavily_asymmetric_rates() {
        let lim = stable_limit(1.0e-3, 1.0e-5, 0.0, 0.0, -1.0e-5);
        assert_relative_eq!(lim.c_min, 50.0 / 101.0, max_relative = 1e-12);
        assert!(lim.is_stable);
        // The stationary variance at g_eff = -kappa_b equals the floor.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..50 {
            let kb: f64 = rng.gen_range(1.0e-5..1.0e-3);
            let ka: f64 = kb * rng.gen_range(1.5..200.0);
            let at_min = stable_limit(ka, kb, 0.0, 0.0, -kb);
            assert_relative_eq!(at_min.c_variance, at_min.c_min, max_relative = 1e-12);
            // Dense scan: no stable coupling does better than the floor.
            for i in 0..200 {
                let s = -0.999 + 1.998 * i as f64 / 199.0;
                let g = s * (ka * kb).sqrt();
                let lim = stable_limit(ka, kb, 0.0, 0.0, g);
                assert!(lim.is_stable);
                assert!(lim.c_variance >= at_min.c_min - 1e-12);
            }
        }
    }

    #[test]
    fn minimum_variance_time_on_fig4_parameters() {
        let g = fig4_g_eff();
        let res = find_tau(g, 1.0e-3, 1.0e-5, 0.0, 10.0).unwrap();
        assert!(res.tau > 275.0 && res.tau < 305.0, "tau = {}", res.tau);
        let k = ClosedFormConstants::new(g, 1.0e-3, 1.0e-5, 0.0, 10.0).unwrap();
        assert!(k.delta_x_dot(res.tau).abs() < 1e-10);
        assert_relative_eq!(res.delta_x_min, k.delta_x(res.tau), max_relative = 1e-12);
        assert!(res.delta_x_min < k.delta_x(0.0));
    }

    #[test]
    fn initial_variance_slope_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..50 {
            let g: f64 = rng.gen_range(-0.1..0.1);
            let ka: f64 = rng.gen_range(1.0e-4..1.0e-1);
            let kb: f64 = rng.gen_range(1.0e-4..1.0e-1);
            let na: f64 = rng.gen_range(0.0..5.0);
            let nb: f64 = rng.gen_range(0.0..5.0);
            if (ka * kb - g * g).abs() < 1.0e-12 {
                continue;
            }
            let k = ClosedFormConstants::new(g, ka, kb, na, nb).unwrap();
            let slope = na * ka + nb * kb + g;
            assert_abs_diff_eq!(k.delta_x_dot(0.0), slope, epsilon = 1e-10 * (1.0 + slope.abs()));
        }
    }

    #[test]
    fn minimum_time_requires_instability_and_initial_decrease() {
        assert!(matches!(
            find_tau(-1.0e-5, 1.0e-3, 1.0e-3, 0.0, 0.0),
            Err(Error::NotApplicable(_))
        ));
        // Unstable but thermally swamped: variance grows from the start.
        assert!(matches!(
            find_tau(-2.0e-3, 1.0e-3, 1.0e-3, 10.0, 10.0),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn derived_records_expose_variances() {
        let g = fig4_g_eff();
        let (ka, kb) = (1.0e-3, 1.0e-5);
        let a = build_drift_effective(g, ka, kb);
        let d = build_diffusion_effective(ka, kb, 0.0, 10.0);
        let v0 = CovarianceState::vacuum(Basis::Effective);
        let tr = propagate(&a, &d, &v0, &[50.0, 100.0]).unwrap();
        let phi = optimal_angle(g, ka, kb).phi;
        let recs = tr.derived(phi);
        assert_eq!(recs.len(), 2);
        for (rec, s) in recs.iter().zip(tr.states.iter()) {
            assert_relative_eq!(rec.v11, s.v(0, 0), max_relative = 1e-15);
            assert_relative_eq!(rec.delta_x, variance_x(s), max_relative = 1e-15);
            assert_relative_eq!(rec.delta_x_phi, variance_xphi(s, phi), max_relative = 1e-15);
        }
    }

    #[test]
    fn optimal_phase_variance_bounds_every_fixed_angle() {
        let g = fig4_g_eff();
        let (ka, kb, na, nb) = (1.0e-3, 1.0e-5, 0.0, 10.0);
        let phi_opt = optimal_angle(g, ka, kb).phi;
        for &t in &[0.0, 40.0, 150.0, 600.0] {
            let state = cm_closed_form(g, ka, kb, na, nb, t).unwrap().state().unwrap();
            let best = variance_xphi_optimal(&state);
            for k in 0..24 {
                let phi = -PI / 2.0 + PI * k as f64 / 24.0;
                assert!(
                    best <= variance_xphi(&state, phi) + 1e-14,
                    "optimum beaten at t = {t}, phi = {phi}"
                );
            }
        }
        // Late in the evolution the squeezing direction has settled onto the
        // angle that cancels the growing component.
        let late = cm_closed_form(g, ka, kb, na, nb, 600.0).unwrap().state().unwrap();
        assert_relative_eq!(
            variance_xphi_optimal(&late),
            variance_xphi(&late, phi_opt),
            max_relative = 1e-2
        );
        let vac = CovarianceState::vacuum(Basis::Effective);
        assert_relative_eq!(variance_xphi_optimal(&vac), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn corotating_preserves_entanglement_and_purity_invariants() {
        // A squeezed two-mode block embedded in a six-mode state: rotation
        // must leave symplectic invariants (here: E_N and the determinant)
        // unchanged.
        let s = 0.6f64;
        let (ch, sh) = ((2.0 * s).cosh() / 2.0, (2.0 * s).sinh() / 2.0);
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(6, 6, &[
            ch,  0.0, sh,  0.0, 0.0, 0.0,
            0.0, ch,  0.0, -sh, 0.0, 0.0,
            sh,  0.0, ch,  0.0, 0.0, 0.0,
            0.0, -sh, 0.0, ch,  0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.5, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.5,
        ]);
        let state = CovarianceState::new(7.3, m.clone()).unwrap();
        let rot = corotating_frame(&state, 1.0).unwrap();
        let before = crate::entanglement::logarithmic_negativity(&state).unwrap().e_n;
        let after = crate::entanglement::logarithmic_negativity(&rot).unwrap().e_n;
        assert_abs_diff_eq!(before, after, epsilon = 1e-10);
        assert_abs_diff_eq!(
            rot.matrix().determinant(),
            m.determinant(),
            epsilon = 1e-12
        );
        // At t = 0 the transformation is the identity.
        let id = corotating_frame(&CovarianceState::new(0.0, m.clone()).unwrap(), 1.0).unwrap();
        assert_abs_diff_eq!((id.matrix() - &m).norm(), 0.0, epsilon = 1e-15);
    }
}
