//! Scenario execution: turns a resolved configuration into tables, plots,
//! and manifest entries. Pure compute — file writing stays in the driver so
//! failed runs leave nothing behind.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::outputs::{Cell, Table};
use super::svg::{line_plot, Series};
use super::{Resolved, ScenarioName, SweepModel};
use crate::covariance::{Basis, CovarianceState};
use crate::dynamics::{
    build_diffusion, build_diffusion_effective, build_drift_effective, build_drift_full,
    corotating_frame, find_tau, optimal_angle, propagate, stable_limit, steady_state_cm,
    variance_x, variance_xphi_closed, variance_xphi_optimal, ClosedFormConstants,
};
use crate::effective::{delta_analytic, g_eff_analytic};
use crate::entanglement::{
    logarithmic_negativity, logneg_asymptotic, logneg_closed_form, squeezing_level_db,
};
use crate::error::{Error, Result};
use crate::linearize::{build_linearized, solve_steady_state};
use crate::liouvillian::{extract_effective, sweep};
use crate::params::{LinearizedModel, SystemParams};

/// Everything a scenario produces, keyed by output file name.
pub struct RunOutput {
    pub tables: Vec<(String, Table)>,
    pub plots: Vec<(String, String)>,
    /// Scenario-specific entries merged into the run manifest.
    pub manifest: Map<String, Value>,
}

pub fn execute(cfg: &Resolved) -> Result<RunOutput> {
    match cfg.scenario {
        ScenarioName::Spectrum => run_spectrum(cfg),
        ScenarioName::Extract => run_extract(cfg),
        ScenarioName::Dynamics => run_dynamics(cfg),
        ScenarioName::Steady => run_steady(cfg),
        ScenarioName::Linearize => run_linearize(cfg),
        ScenarioName::Sweep2d => run_sweep2d(cfg),
    }
}

/// `count` evenly spaced values over [min, max]; a single point sits at min.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Build the fluctuation model from a flat parameter map. `delta_a` is
/// optional here; sweeps supply it per grid point and dynamics defaults it
/// to the dressed resonance.
pub fn model_from_params(p: &BTreeMap<String, f64>) -> Result<LinearizedModel> {
    let get = |key: &str| -> Result<f64> {
        p.get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("missing model parameter `{key}`")))
    };
    LinearizedModel::from_squeezing(
        p.get("delta_a").copied().unwrap_or(-1.0),
        get("delta_m")?,
        1.0,
        get("r")?,
        get("g")?,
        get("g_mech")?,
        get("kappa_a")?,
        get("kappa_b")?,
        get("kappa_m")?,
        get("n_a")?,
        get("n_b")?,
        get("n_m")?,
    )
}

fn patched(base: &BTreeMap<String, f64>, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
    let mut p = base.clone();
    for (k, v) in extra {
        p.insert((*k).to_string(), *v);
    }
    p
}

fn err_cell(msg: &str) -> Cell {
    Cell::S(msg.to_string())
}

const OK: &str = "ok";

// --- spectrum ---------------------------------------------------------

fn run_spectrum(cfg: &Resolved) -> Result<RunOutput> {
    let grid_spec = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::Config("spectrum needs a detuning grid".into()))?;
    let grid = linspace(grid_spec.min, grid_spec.max, grid_spec.count);
    let model = model_from_params(&cfg.params)?;
    let sw = sweep(&model, &grid)?;

    let mut header: Vec<String> = vec!["delta_a".into()];
    for k in 1..=6 {
        header.push(format!("re_{k}"));
    }
    for k in 1..=6 {
        header.push(format!("im_{k}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&header_refs);
    for (i, &da) in sw.grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![da.into()];
        for k in 0..6 {
            row.push(sw.branches[k][i].re.into());
        }
        for k in 0..6 {
            row.push(sw.branches[k][i].im.into());
        }
        table.push(row);
    }

    let mut plots = Vec::new();
    let make_series = |imag: bool| -> Vec<Series> {
        (0..6)
            .map(|k| Series {
                label: format!("{} E_{}", if imag { "Im" } else { "Re" }, k + 1),
                points: sw
                    .grid
                    .iter()
                    .enumerate()
                    .map(|(i, &da)| {
                        let e = sw.branches[k][i];
                        (da, if imag { e.im } else { e.re })
                    })
                    .collect(),
            })
            .collect()
    };
    plots.push((
        "spectrum_re.svg".to_string(),
        line_plot("Eigenvalue real parts", "delta_a", "Re E", &make_series(false)),
    ));
    plots.push((
        "spectrum_im.svg".to_string(),
        line_plot("Eigenvalue imaginary parts", "delta_a", "Im E", &make_series(true)),
    ));

    let mut manifest = Map::new();
    manifest.insert(
        "pairing".into(),
        match sw.pairing {
            Some((p, q)) => json!([p, q]),
            None => Value::Null,
        },
    );
    manifest.insert("ambiguous_steps".into(), json!(sw.ambiguous_steps));

    Ok(RunOutput {
        tables: vec![("spectrum.csv".to_string(), table)],
        plots,
        manifest,
    })
}

// --- extract ----------------------------------------------------------

struct ExtractRow {
    series: String,
    axis_value: f64,
    g_eff_num: f64,
    g_eff_an: f64,
    delta_num: f64,
    delta_an: f64,
    delta_a_star: f64,
    status: String,
}

fn extract_point(
    params: &BTreeMap<String, f64>,
    grid: &[f64],
    series: &str,
    axis_value: f64,
) -> ExtractRow {
    let nan = f64::NAN;
    let mut row = ExtractRow {
        series: series.to_string(),
        axis_value,
        g_eff_num: nan,
        g_eff_an: nan,
        delta_num: nan,
        delta_an: nan,
        delta_a_star: nan,
        status: OK.to_string(),
    };
    let model = match model_from_params(params) {
        Ok(m) => m,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    if let Ok(v) = g_eff_analytic(&model) {
        row.g_eff_an = v;
    }
    if let Ok(v) = delta_analytic(&model) {
        row.delta_an = v;
    }
    match sweep(&model, grid).and_then(|sw| extract_effective(&sw)) {
        Ok(ex) => {
            row.g_eff_num = ex.g_eff_num;
            row.delta_num = ex.delta_num;
            row.delta_a_star = ex.delta_a_star;
        }
        Err(e) => row.status = e.to_string(),
    }
    row
}

fn run_extract(cfg: &Resolved) -> Result<RunOutput> {
    let grid_spec = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::Config("extract needs a detuning grid".into()))?;
    let axis = cfg
        .axis
        .as_ref()
        .ok_or_else(|| Error::Config("extract needs a swept axis".into()))?;
    let grid = linspace(grid_spec.min, grid_spec.max, grid_spec.count);
    let axis_values = linspace(axis.min, axis.max, axis.count);

    // (series, axis value) jobs, evaluated independently.
    let jobs: Vec<(usize, f64)> = cfg
        .series
        .iter()
        .enumerate()
        .flat_map(|(si, _)| axis_values.iter().map(move |&v| (si, v)))
        .collect();
    let rows: Vec<ExtractRow> = jobs
        .par_iter()
        .map(|&(si, v)| {
            let spec = &cfg.series[si];
            let mut p = cfg.params.clone();
            for (k, val) in &spec.params {
                p.insert(k.clone(), *val);
            }
            p.insert(axis.name.clone(), v);
            extract_point(&p, &grid, &spec.label, v)
        })
        .collect();

    let mut table = Table::new(&[
        "series",
        "axis_value",
        "g_eff_num",
        "g_eff_analytic",
        "delta_num",
        "delta_analytic",
        "delta_a_star",
        "status",
    ]);
    for r in &rows {
        table.push(vec![
            Cell::S(r.series.clone()),
            r.axis_value.into(),
            r.g_eff_num.into(),
            r.g_eff_an.into(),
            r.delta_num.into(),
            r.delta_an.into(),
            r.delta_a_star.into(),
            Cell::S(r.status.clone()),
        ]);
    }

    let mut coupling_series = Vec::new();
    let mut shift_series = Vec::new();
    for spec in &cfg.series {
        let pts = |f: &dyn Fn(&ExtractRow) -> f64| -> Vec<(f64, f64)> {
            rows.iter()
                .filter(|r| r.series == spec.label)
                .map(|r| (r.axis_value, f(r)))
                .collect()
        };
        coupling_series.push(Series {
            label: format!("{} extracted", spec.label),
            points: pts(&|r| r.g_eff_num.abs()),
        });
        coupling_series.push(Series {
            label: format!("{} analytic", spec.label),
            points: pts(&|r| r.g_eff_an.abs()),
        });
        shift_series.push(Series {
            label: format!("{} extracted", spec.label),
            points: pts(&|r| r.delta_num),
        });
        shift_series.push(Series {
            label: format!("{} analytic", spec.label),
            points: pts(&|r| r.delta_an),
        });
    }
    let plots = vec![
        (
            "extraction_coupling.svg".to_string(),
            line_plot("Effective coupling |g_eff|", &axis.name, "|g_eff|", &coupling_series),
        ),
        (
            "extraction_shift.svg".to_string(),
            line_plot("Detuning shift delta", &axis.name, "delta", &shift_series),
        ),
    ];

    let failed = rows.iter().filter(|r| r.status != OK).count();
    let mut manifest = Map::new();
    manifest.insert("points_total".into(), json!(rows.len()));
    manifest.insert("points_failed".into(), json!(failed));

    Ok(RunOutput {
        tables: vec![("extraction.csv".to_string(), table)],
        plots,
        manifest,
    })
}

// --- dynamics ---------------------------------------------------------

fn run_dynamics(cfg: &Resolved) -> Result<RunOutput> {
    let model = model_from_params(&cfg.params)?;
    let g_eff = g_eff_analytic(&model)?;
    let delta = delta_analytic(&model)?;
    // Explicit delta_a wins; otherwise sit at the dressed resonance where
    // the pair interaction is maximal.
    let delta_a_star = cfg
        .params
        .get("delta_a")
        .copied()
        .unwrap_or(-model.omega_b + delta);
    let angle = optimal_angle(g_eff, model.kappa_a, model.kappa_b);
    let times = linspace(0.0, cfg.t_max, cfg.samples);

    let constants =
        ClosedFormConstants::new(g_eff, model.kappa_a, model.kappa_b, model.n_a, model.n_b)?;
    let mut variances = Table::new(&["t", "dX", "dX_phi", "S_db", "E_N"]);
    let mut eff_elements = Vec::with_capacity(times.len());
    for &t in &times {
        let (v11, v33, v13) = constants.elements(t);
        eff_elements.push((v11, v33, v13));
        let dx = constants.delta_x(t);
        let dx_phi = variance_xphi_closed(
            g_eff,
            model.kappa_a,
            model.kappa_b,
            model.n_a,
            model.n_b,
            t,
        );
        let s_db = squeezing_level_db(dx_phi).unwrap_or(f64::NAN);
        let e_n = logneg_closed_form(v11, v33, v13).map_or(f64::NAN, |r| r.e_n);
        variances.push(vec![t.into(), dx.into(), dx_phi.into(), s_db.into(), e_n.into()]);
    }

    // Six-mode propagation from vacuum, then the co-rotating transformation
    // that removes the free +/-omega_b quadrature rotation.
    let drift = build_drift_full(&model, delta_a_star)?;
    let diffusion = build_diffusion(Basis::Full, &model)?;
    let v0 = CovarianceState::vacuum(Basis::Full);
    let traj = propagate(&drift, &diffusion, &v0, &times)?;

    let mut cm_elements = Table::new(&[
        "t",
        "v11_eff",
        "v33_eff",
        "v13_eff",
        "v11_full",
        "v33_full",
        "v13_full",
    ]);
    let mut variances_full = Table::new(&["t", "dX", "dX_phi", "S_db", "E_N"]);
    let mut plot_dx: Vec<(f64, f64)> = Vec::new();
    let mut plot_dxphi: Vec<(f64, f64)> = Vec::new();
    let mut full_rows: Vec<(f64, f64, f64)> = Vec::new();
    for (i, state) in traj.states.iter().enumerate() {
        let t = times[i];
        let rot = corotating_frame(state, model.omega_b)?;
        let (v11, v33, v13) = (rot.v(0, 0), rot.v(2, 2), rot.v(0, 2));
        full_rows.push((v11, v33, v13));
        let (e11, e33, e13) = eff_elements[i];
        cm_elements.push(vec![
            t.into(),
            e11.into(),
            e33.into(),
            e13.into(),
            v11.into(),
            v33.into(),
            v13.into(),
        ]);
        let dx = variance_x(&rot);
        // The six-mode ellipse wobbles around the resonant solution, so the
        // per-time optimum is the comparable quantity, not a fixed angle.
        let dx_phi = variance_xphi_optimal(&rot);
        let s_db = squeezing_level_db(dx_phi).unwrap_or(f64::NAN);
        let e_n = logarithmic_negativity(&rot)?.e_n;
        variances_full.push(vec![t.into(), dx.into(), dx_phi.into(), s_db.into(), e_n.into()]);
        plot_dx.push((t, dx));
        plot_dxphi.push((t, dx_phi));
    }

    let var_series = vec![
        Series {
            label: "dX closed form".into(),
            points: times.iter().map(|&t| (t, constants.delta_x(t))).collect(),
        },
        Series {
            label: "dX_phi closed form".into(),
            points: times
                .iter()
                .map(|&t| {
                    (
                        t,
                        variance_xphi_closed(
                            g_eff,
                            model.kappa_a,
                            model.kappa_b,
                            model.n_a,
                            model.n_b,
                            t,
                        ),
                    )
                })
                .collect(),
        },
        Series {
            label: "dX six-mode".into(),
            points: plot_dx,
        },
        Series {
            label: "dX_phi six-mode".into(),
            points: plot_dxphi,
        },
    ];
    let elem_series = vec![
        Series {
            label: "V11 closed form".into(),
            points: times.iter().zip(&eff_elements).map(|(&t, e)| (t, e.0)).collect(),
        },
        Series {
            label: "V33 closed form".into(),
            points: times.iter().zip(&eff_elements).map(|(&t, e)| (t, e.1)).collect(),
        },
        Series {
            label: "V13 closed form".into(),
            points: times.iter().zip(&eff_elements).map(|(&t, e)| (t, e.2)).collect(),
        },
        Series {
            label: "V11 six-mode".into(),
            points: times.iter().zip(&full_rows).map(|(&t, e)| (t, e.0)).collect(),
        },
        Series {
            label: "V33 six-mode".into(),
            points: times.iter().zip(&full_rows).map(|(&t, e)| (t, e.1)).collect(),
        },
        Series {
            label: "V13 six-mode".into(),
            points: times.iter().zip(&full_rows).map(|(&t, e)| (t, e.2)).collect(),
        },
    ];
    let plots = vec![
        (
            "variances.svg".to_string(),
            line_plot("Quadrature variances", "t", "variance", &var_series),
        ),
        (
            "cm_elements.svg".to_string(),
            line_plot("Covariance elements", "t", "value", &elem_series),
        ),
    ];

    let mut manifest = Map::new();
    manifest.insert("g_eff".into(), json!(g_eff));
    manifest.insert("delta".into(), json!(delta));
    manifest.insert("delta_a_star".into(), json!(delta_a_star));
    manifest.insert("phi_opt".into(), json!(angle.phi));
    manifest.insert("phi_degenerate".into(), json!(angle.degenerate));
    manifest.insert(
        "tau".into(),
        match find_tau(g_eff, model.kappa_a, model.kappa_b, model.n_a, model.n_b) {
            Ok(t) => json!(t.tau),
            Err(_) => Value::Null,
        },
    );

    Ok(RunOutput {
        tables: vec![
            ("variances.csv".to_string(), variances),
            ("variances_full.csv".to_string(), variances_full),
            ("cm_elements.csv".to_string(), cm_elements),
        ],
        plots,
        manifest,
    })
}

// --- steady -----------------------------------------------------------

fn run_steady(cfg: &Resolved) -> Result<RunOutput> {
    let model = model_from_params(&cfg.params)?;
    let g_eff = g_eff_analytic(&model)?;
    let drift = build_drift_effective(g_eff, model.kappa_a, model.kappa_b);
    let diffusion = build_diffusion_effective(model.kappa_a, model.kappa_b, model.n_a, model.n_b);
    let ss = steady_state_cm(&drift, &diffusion)?;
    let angle = optimal_angle(g_eff, model.kappa_a, model.kappa_b);
    let dx = variance_x(&ss);
    let dx_phi = variance_xphi_optimal(&ss);
    let report = logarithmic_negativity(&ss)?;
    let s_db = squeezing_level_db(dx_phi)?;
    let lim = stable_limit(model.kappa_a, model.kappa_b, model.n_a, model.n_b, g_eff);

    let mut table = Table::new(&[
        "g_eff",
        "v11",
        "v33",
        "v13",
        "delta_x",
        "delta_x_phi",
        "e_n",
        "s_db",
        "c_variance",
        "c_min",
    ]);
    table.push(vec![
        g_eff.into(),
        ss.v(0, 0).into(),
        ss.v(2, 2).into(),
        ss.v(0, 2).into(),
        dx.into(),
        dx_phi.into(),
        report.e_n.into(),
        s_db.into(),
        lim.c_variance.into(),
        lim.c_min.into(),
    ]);

    let mut manifest = Map::new();
    manifest.insert("g_eff".into(), json!(g_eff));
    manifest.insert("phi_opt".into(), json!(angle.phi));
    manifest.insert("stable".into(), json!(lim.is_stable));

    Ok(RunOutput {
        tables: vec![("steady.csv".to_string(), table)],
        plots: Vec::new(),
        manifest,
    })
}

// --- linearize --------------------------------------------------------

fn system_params(cfg: &Resolved) -> Result<SystemParams> {
    if let Some(abs) = &cfg.absolute_units {
        let get = |key: &str| -> Result<f64> {
            abs.get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("absolute_units is missing `{key}`")))
        };
        let opt = |key: &str| abs.get(key).copied().unwrap_or(0.0);
        return Ok(SystemParams {
            omega_a: get("omega_a")?,
            omega_m: get("omega_m")?,
            omega_b: get("omega_b")?,
            omega_d: get("omega_d")?,
            kerr: get("kerr")?,
            g_ma: get("g_ma")?,
            g_mb: get("g_mb")?,
            drive_rabi: get("drive_rabi")?,
            kappa_a: get("kappa_a")?,
            kappa_m: get("kappa_m")?,
            kappa_b: get("kappa_b")?,
            n_a: opt("n_a"),
            n_m: opt("n_m"),
            n_b: opt("n_b"),
            normalized: false,
        });
    }
    let get = |key: &str| -> Result<f64> {
        cfg.params.get(key).copied().ok_or_else(|| {
            Error::Config(format!(
                "linearize requires `{key}` in params (in omega_b units) or an absolute_units block"
            ))
        })
    };
    Ok(SystemParams {
        omega_a: get("omega_a")?,
        omega_m: get("omega_m")?,
        omega_b: 1.0,
        omega_d: get("omega_d")?,
        kerr: get("kerr")?,
        g_ma: get("g_ma")?,
        g_mb: get("g_mb")?,
        drive_rabi: get("drive_rabi")?,
        kappa_a: get("kappa_a")?,
        kappa_m: get("kappa_m")?,
        kappa_b: get("kappa_b")?,
        n_a: get("n_a")?,
        n_m: get("n_m")?,
        n_b: get("n_b")?,
        normalized: true,
    })
}

fn run_linearize(cfg: &Resolved) -> Result<RunOutput> {
    let sp = system_params(cfg)?;
    let ss = solve_steady_state(&sp)?;
    let model = build_linearized(&sp, ss.mean_magnon)?;
    let g_eff = g_eff_analytic(&model).unwrap_or(f64::NAN);
    let delta = delta_analytic(&model).unwrap_or(f64::NAN);

    let mut table = Table::new(&[
        "re_mean_photon",
        "im_mean_photon",
        "re_mean_phonon",
        "im_mean_phonon",
        "re_mean_magnon",
        "im_mean_magnon",
        "magnon_occupation",
        "delta_a",
        "delta_m",
        "delta_m_prime",
        "r",
        "theta",
        "abs_kerr",
        "g",
        "g_mech",
        "kappa_a",
        "kappa_b",
        "kappa_m",
        "n_a",
        "n_b",
        "n_m",
        "g_eff",
        "delta",
        "near_bistability",
        "residual",
    ]);
    table.push(vec![
        ss.mean_photon.re.into(),
        ss.mean_photon.im.into(),
        ss.mean_phonon.re.into(),
        ss.mean_phonon.im.into(),
        ss.mean_magnon.re.into(),
        ss.mean_magnon.im.into(),
        ss.mean_magnon.norm_sqr().into(),
        model.delta_a.into(),
        model.delta_m.into(),
        model.delta_m_prime.into(),
        model.r.into(),
        model.theta.into(),
        model.abs_kerr.into(),
        model.g.into(),
        model.g_mech.into(),
        model.kappa_a.into(),
        model.kappa_b.into(),
        model.kappa_m.into(),
        model.n_a.into(),
        model.n_b.into(),
        model.n_m.into(),
        g_eff.into(),
        delta.into(),
        (if ss.near_bistability { 1.0 } else { 0.0 }).into(),
        ss.residual.into(),
    ]);

    let mut manifest = Map::new();
    manifest.insert("occupation_roots".into(), json!(ss.occupation_roots));
    manifest.insert("residual".into(), json!(ss.residual));
    manifest.insert("residual_scale".into(), json!(ss.residual_scale));
    manifest.insert("near_bistability".into(), json!(ss.near_bistability));

    Ok(RunOutput {
        tables: vec![("model.csv".to_string(), table)],
        plots: Vec::new(),
        manifest,
    })
}

// --- sweep2d ----------------------------------------------------------

fn sweep_point_full(params: &BTreeMap<String, f64>) -> (f64, String) {
    let fail = |e: Error| (f64::NAN, e.to_string());
    let model = match model_from_params(params) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let g_eff = match g_eff_analytic(&model) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let delta = match delta_analytic(&model) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let delta_a_star = params
        .get("delta_a")
        .copied()
        .unwrap_or(-model.omega_b + delta);
    let result = (|| -> Result<f64> {
        let drift = build_drift_full(&model, delta_a_star)?;
        let diffusion = build_diffusion(Basis::Full, &model)?;
        // The squeezing window depends only on the coupling magnitude: a
        // positive effective coupling squeezes the conjugate quadrature pair
        // on the same schedule.
        let window = find_tau(
            -g_eff.abs(),
            model.kappa_a,
            model.kappa_b,
            model.n_a,
            model.n_b,
        );
        let state = match window {
            Ok(t) => {
                let v0 = CovarianceState::vacuum(Basis::Full);
                let traj = propagate(&drift, &diffusion, &v0, &[2.0 * t.tau])?;
                traj.states.last().expect("one sample").clone()
            }
            // No transient window means the reduced dynamics relax; score the
            // stationary state of the three-mode model instead.
            Err(Error::NotApplicable(_)) => steady_state_cm(&drift, &diffusion)?,
            Err(e) => return Err(e),
        };
        // E_N is invariant under the local co-rotating transformation, so
        // the state can be scored directly.
        Ok(logarithmic_negativity(&state)?.e_n)
    })();
    match result {
        Ok(e_n) => (e_n, OK.to_string()),
        Err(e) => fail(e),
    }
}

fn sweep_point_effective(params: &BTreeMap<String, f64>) -> (f64, String) {
    let fail = |e: Error| (f64::NAN, e.to_string());
    let model = match model_from_params(params) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let g_eff = match g_eff_analytic(&model) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    if g_eff * g_eff > model.kappa_a * model.kappa_b {
        match logneg_asymptotic(g_eff, model.kappa_a, model.kappa_b, model.n_a, model.n_b) {
            Ok(r) => (r.e_n, OK.to_string()),
            Err(e) => fail(e),
        }
    } else {
        // Stable regime: the asymptote is the stationary state itself.
        let result = (|| -> Result<f64> {
            let drift = build_drift_effective(g_eff, model.kappa_a, model.kappa_b);
            let diffusion =
                build_diffusion_effective(model.kappa_a, model.kappa_b, model.n_a, model.n_b);
            let ss = steady_state_cm(&drift, &diffusion)?;
            Ok(logarithmic_negativity(&ss)?.e_n)
        })();
        match result {
            Ok(e_n) => (e_n, OK.to_string()),
            Err(e) => fail(e),
        }
    }
}

fn run_sweep2d(cfg: &Resolved) -> Result<RunOutput> {
    let axis1 = cfg
        .axis1
        .as_ref()
        .ok_or_else(|| Error::Config("sweep2d needs axis1".into()))?;
    let axis2 = cfg
        .axis2
        .as_ref()
        .ok_or_else(|| Error::Config("sweep2d needs axis2".into()))?;
    let values1 = linspace(axis1.min, axis1.max, axis1.count);
    let values2 = linspace(axis2.min, axis2.max, axis2.count);
    let n2 = values2.len();

    // Row-major over (axis1, axis2); points are independent, so evaluation
    // order is free while output order is fixed by the index.
    let total = values1.len() * n2;
    let points: Vec<(f64, f64, f64, String)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let v1 = values1[idx / n2];
            let v2 = values2[idx % n2];
            let p = patched(
                &cfg.params,
                &[(axis1.name.as_str(), v1), (axis2.name.as_str(), v2)],
            );
            let (e_n, status) = match cfg.model_kind {
                SweepModel::Full => sweep_point_full(&p),
                SweepModel::Effective => sweep_point_effective(&p),
            };
            (v1, v2, e_n, status)
        })
        .collect();

    let mut table = Table::new(&["axis1", "axis2", "e_n", "status"]);
    for (v1, v2, e_n, status) in &points {
        table.push(vec![
            (*v1).into(),
            (*v2).into(),
            (*e_n).into(),
            err_cell(status),
        ]);
    }

    let failed = points.iter().filter(|p| p.3 != OK).count();
    let mut manifest = Map::new();
    manifest.insert("axis1_name".into(), json!(axis1.name));
    manifest.insert("axis2_name".into(), json!(axis2.name));
    manifest.insert(
        "model".into(),
        json!(match cfg.model_kind {
            SweepModel::Full => "full",
            SweepModel::Effective => "effective",
        }),
    );
    manifest.insert("points_total".into(), json!(total));
    manifest.insert("points_failed".into(), json!(failed));

    Ok(RunOutput {
        tables: vec![("sweep.csv".to_string(), table)],
        plots: Vec::new(),
        manifest,
    })
}
