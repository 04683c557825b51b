//! C ABI over the magnomech core: opaque model handles, status codes, and
//! flat-array outputs, so the simulator can be driven from C, Python ctypes,
//! or Julia without a Rust toolchain. The header is generated into
//! `include/magnomech.h` at build time.
//!
//! Conventions:
//! - every fallible call returns an [`MmStatus`]; out-pointers are written
//!   only on [`MmStatus::Ok`];
//! - [`mm_last_error_message`] describes the most recent failure on the
//!   calling thread;
//! - handles from [`mm_model_new`] are released with [`mm_model_free`],
//!   exactly once.

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;

use magnomech::dynamics;
use magnomech::effective;
use magnomech::entanglement;
use magnomech::error::Error;
use magnomech::liouvillian;
use magnomech::{Basis, CovarianceState, LinearizedModel};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmStatus {
    /// Success; out-pointers hold the results.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// The inputs do not describe a valid or physical configuration.
    InvalidParameter = 2,
    /// A numerical routine failed (non-Hurwitz drift, lost precision, ...).
    NumericalFailure = 3,
    /// The quantity is undefined for these parameters (wrong regime).
    NotApplicable = 4,
}

/// Capacity, in doubles, that spectrum output arrays must provide.
pub const MM_SPECTRUM_MAX: usize = 6;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn fail(err: &Error) -> MmStatus {
    set_last_error(err.to_string());
    match err {
        Error::NotApplicable(_) => MmStatus::NotApplicable,
        Error::Singular(_) | Error::Unstable(_) | Error::Overflow(_) | Error::Extraction(_) => {
            MmStatus::NumericalFailure
        }
        _ => MmStatus::InvalidParameter,
    }
}

fn fail_null(what: &str) -> MmStatus {
    set_last_error(format!("{what} must not be null"));
    MmStatus::NullArgument
}

/// Opaque handle to a linearized model of the driven cavity-magnon-mechanics
/// system; create with [`mm_model_new`], release with [`mm_model_free`].
pub struct MmModel {
    model: LinearizedModel,
}

/// Library version as a static UTF-8 string; do not free.
#[no_mangle]
pub extern "C" fn mm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Short static name of a status code; do not free.
#[no_mangle]
pub extern "C" fn mm_status_name(status: MmStatus) -> *const c_char {
    let name: &'static str = match status {
        MmStatus::Ok => "ok\0",
        MmStatus::NullArgument => "null argument\0",
        MmStatus::InvalidParameter => "invalid parameter\0",
        MmStatus::NumericalFailure => "numerical failure\0",
        MmStatus::NotApplicable => "not applicable\0",
    };
    name.as_ptr() as *const c_char
}

/// Message of the most recent failure on the calling thread, or an empty
/// string. Valid until the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn mm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build a model from detunings, the magnon squeezing parameter, couplings,
/// damping rates, and thermal occupations, writing a heap handle to `out`.
///
/// `delta_m` is the Kerr-shifted magnon detuning (must be positive when
/// `r > 0`); rates and occupations must be non-negative. Frequencies are in
/// whatever unit makes `omega_b` the mechanical frequency (1 for normalized
/// spectra).
///
/// # Safety
/// `out` must point to writable storage for one `*mut MmModel`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mm_model_new(
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
    out: *mut *mut MmModel,
) -> MmStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match LinearizedModel::from_squeezing(
        delta_a, delta_m, omega_b, r, g, g_mech, kappa_a, kappa_b, kappa_m, n_a, n_b, n_m,
    ) {
        Ok(model) => {
            *out = Box::into_raw(Box::new(MmModel { model }));
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Release a handle from [`mm_model_new`]; null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer returned by [`mm_model_new`] that has
/// not been freed yet; it is invalid after the call.
#[no_mangle]
pub unsafe extern "C" fn mm_model_free(handle: *mut MmModel) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Effective photon-phonon two-mode-squeezing coupling of the adiabatic
/// model (negative in the squeezing regime).
///
/// # Safety
/// `handle` must be a live handle from [`mm_model_new`]; `out` must point to
/// writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn mm_effective_coupling(handle: *const MmModel, out: *mut f64) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if out.is_null() {
        return fail_null("out");
    }
    match effective::g_eff_analytic(&(*handle).model) {
        Ok(v) => {
            *out = v;
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Magnon-induced shift of the cavity resonance; the squeezing window is
/// centered on `delta_a = -omega_b + shift`.
///
/// # Safety
/// Same contract as [`mm_effective_coupling`].
#[no_mangle]
pub unsafe extern "C" fn mm_detuning_shift(handle: *const MmModel, out: *mut f64) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if out.is_null() {
        return fail_null("out");
    }
    match effective::delta_analytic(&(*handle).model) {
        Ok(v) => {
            *out = v;
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Eigenvalues of the quadrature flow: oscillation frequencies in `re`,
/// attraction/decay parts in `im`, count in `len` (6 for the full three-mode
/// flow, 4 for the effective two-mode flow, unordered).
///
/// # Safety
/// `handle` must be a live handle; `re` and `im` must each point to at least
/// [`MM_SPECTRUM_MAX`] writable doubles and `len` to one writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn mm_spectrum(
    handle: *const MmModel,
    full: bool,
    re: *mut f64,
    im: *mut f64,
    len: *mut usize,
) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if re.is_null() || im.is_null() || len.is_null() {
        return fail_null("output pointer");
    }
    let model = &(*handle).model;
    let values = if full {
        match liouvillian::build_full(model, model.delta_a).and_then(|l| l.eigenvalues_of_l()) {
            Ok(v) => v,
            Err(e) => return fail(&e),
        }
    } else {
        let g_eff = match effective::g_eff_analytic(model) {
            Ok(v) => v,
            Err(e) => return fail(&e),
        };
        liouvillian::eigenvalues_effective_analytic(g_eff, model.delta_a, model.omega_b).to_vec()
    };
    for (k, e) in values.iter().enumerate() {
        *re.add(k) = e.re;
        *im.add(k) = e.im;
    }
    *len = values.len();
    MmStatus::Ok
}

fn evolve_impl(
    model: &LinearizedModel,
    full: bool,
    times: &[f64],
) -> magnomech::Result<(Vec<f64>, Vec<f64>)> {
    let (drift, diffusion, v0) = if full {
        (
            dynamics::build_drift_full(model, model.delta_a)?,
            dynamics::build_diffusion(Basis::Full, model)?,
            CovarianceState::vacuum(Basis::Full),
        )
    } else {
        let g_eff = effective::g_eff_analytic(model)?;
        (
            dynamics::build_drift_effective(g_eff, model.kappa_a, model.kappa_b),
            dynamics::build_diffusion_effective(model.kappa_a, model.kappa_b, model.n_a, model.n_b),
            CovarianceState::vacuum(Basis::Effective),
        )
    };
    let trajectory = dynamics::propagate(&drift, &diffusion, &v0, times)?;
    let mut dx = Vec::with_capacity(times.len());
    let mut en = Vec::with_capacity(times.len());
    for state in &trajectory.states {
        // The three-mode solution carries micromotion at the mechanical
        // frequency; report it in the co-rotating frame, where the
        // phi-optimized variance is the comparable quantity.
        let frame = if full {
            dynamics::corotating_frame(state, model.omega_b)?
        } else {
            state.clone()
        };
        dx.push(dynamics::variance_xphi_optimal(&frame));
        en.push(entanglement::logarithmic_negativity(&frame)?.e_n);
    }
    Ok((dx, en))
}

/// Evolve the vacuum-initial covariance and report, at each requested time,
/// the phi-optimized photon-phonon quadrature variance (`dx_phi`, vacuum is
/// 0.5) and the logarithmic negativity (`e_n`). `full` selects the
/// three-mode model, reported in the frame co-rotating at the mechanical
/// frequency, over the effective two-mode one. Times must be finite and
/// strictly increasing.
///
/// # Safety
/// `handle` must be a live handle; `times` must point to `n` readable
/// doubles; `dx_phi` and `e_n` must each point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mm_evolve(
    handle: *const MmModel,
    full: bool,
    times: *const f64,
    n: usize,
    dx_phi: *mut f64,
    e_n: *mut f64,
) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if times.is_null() {
        return fail_null("times");
    }
    if dx_phi.is_null() || e_n.is_null() {
        return fail_null("output pointer");
    }
    if n == 0 {
        return fail(&Error::Domain("at least one output time is required".into()));
    }
    let slice = std::slice::from_raw_parts(times, n);
    match evolve_impl(&(*handle).model, full, slice) {
        Ok((dx, en)) => {
            for k in 0..n {
                *dx_phi.add(k) = dx[k];
                *e_n.add(k) = en[k];
            }
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

fn steady_impl(model: &LinearizedModel) -> magnomech::Result<(f64, f64)> {
    let g_eff = effective::g_eff_analytic(model)?;
    let drift = dynamics::build_drift_effective(g_eff, model.kappa_a, model.kappa_b);
    let diffusion =
        dynamics::build_diffusion_effective(model.kappa_a, model.kappa_b, model.n_a, model.n_b);
    let ss = dynamics::steady_state_cm(&drift, &diffusion)?;
    let e_n = entanglement::logarithmic_negativity(&ss)?.e_n;
    Ok((dynamics::variance_xphi_optimal(&ss), e_n))
}

/// Stationary phi-optimized variance and logarithmic negativity of the
/// effective model; fails with a numerical status when the coupling is
/// outside the stable regime `g_eff^2 < kappa_a kappa_b`.
///
/// # Safety
/// `handle` must be a live handle; `dx_phi` and `e_n` must each point to one
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn mm_steady_state(
    handle: *const MmModel,
    dx_phi: *mut f64,
    e_n: *mut f64,
) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if dx_phi.is_null() || e_n.is_null() {
        return fail_null("output pointer");
    }
    match steady_impl(&(*handle).model) {
        Ok((dx, en)) => {
            *dx_phi = dx;
            *e_n = en;
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Time of the interior minimum of the shared-quadrature variance in the
/// unstable regime (the proposed measurement window is twice this time);
/// fails as not-applicable in the stable regime.
///
/// # Safety
/// `handle` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn mm_convergence_time(handle: *const MmModel, out: *mut f64) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let model = &(*handle).model;
    let result = effective::g_eff_analytic(model).and_then(|g_eff| {
        dynamics::find_tau(g_eff, model.kappa_a, model.kappa_b, model.n_a, model.n_b)
    });
    match result {
        Ok(tau) => {
            *out = tau.tau;
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Long-time squeezing in the unstable regime: the asymptotic optimal-angle
/// variance (`dx_phi`), the squeezing level below vacuum in decibels (`db`),
/// and the asymptotic logarithmic negativity (`e_n`).
///
/// # Safety
/// `handle` must be a live handle; `dx_phi`, `db`, and `e_n` must each point
/// to one writable double.
#[no_mangle]
pub unsafe extern "C" fn mm_asymptotic_squeezing(
    handle: *const MmModel,
    dx_phi: *mut f64,
    db: *mut f64,
    e_n: *mut f64,
) -> MmStatus {
    if handle.is_null() {
        return fail_null("handle");
    }
    if dx_phi.is_null() || db.is_null() || e_n.is_null() {
        return fail_null("output pointer");
    }
    let model = &(*handle).model;
    let result = effective::g_eff_analytic(model).and_then(|g_eff| {
        let dx = dynamics::variance_xphi_asymptotic(
            g_eff,
            model.kappa_a,
            model.kappa_b,
            model.n_a,
            model.n_b,
        )?;
        let level = entanglement::squeezing_level_db(dx)?;
        let rep = entanglement::logneg_asymptotic(
            g_eff,
            model.kappa_a,
            model.kappa_b,
            model.n_a,
            model.n_b,
        )?;
        Ok((dx, level, rep.e_n))
    });
    match result {
        Ok((dx, level, en)) => {
            *dx_phi = dx;
            *db = level;
            *e_n = en;
            MmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
