//! Command-line driver: argument parsing, configuration resolution
//! (defaults -> preset -> config file -> --set overrides), scenario
//! execution, and artifact writing.
//!
//! Outputs are deterministic: identical resolved configurations produce
//! byte-identical CSV files regardless of thread count. The manifest is
//! written last, so its presence marks a completed run; on any write
//! failure every file already written is removed.

pub mod outputs;
pub mod scenarios;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use outputs::write_csv;
use scenarios::{execute, RunOutput};

/// Parameters of the fluctuation model, in mechanical-frequency units.
const MODEL_KEYS: [&str; 11] = [
    "delta_a", "delta_m", "r", "g", "g_mech", "kappa_a", "kappa_b", "kappa_m", "n_a", "n_b", "n_m",
];
/// Laboratory-frame keys accepted by the linearize scenario.
const SYSTEM_KEYS: [&str; 7] = [
    "omega_a", "omega_m", "omega_d", "kerr", "g_ma", "g_mb", "drive_rabi",
];
const SHARED_KEYS: [&str; 6] = ["kappa_a", "kappa_m", "kappa_b", "n_a", "n_m", "n_b"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    /// Eigenvalue branches of the six-mode generator over a detuning grid.
    Spectrum,
    /// Effective coupling and shift extracted from the level attraction.
    Extract,
    /// Covariance dynamics: closed form vs six-mode propagation.
    Dynamics,
    /// Entanglement over a two-parameter grid.
    Sweep2d,
    /// Stationary covariance of the effective model.
    Steady,
    /// Steady state and fluctuation model from laboratory parameters.
    Linearize,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Spectrum => "spectrum",
            ScenarioName::Extract => "extract",
            ScenarioName::Dynamics => "dynamics",
            ScenarioName::Sweep2d => "sweep2d",
            ScenarioName::Steady => "steady",
            ScenarioName::Linearize => "linearize",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Fig2,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig3e,
    Fig3f,
    Fig4,
    Fig5a,
    Fig5b,
    None,
}

impl PresetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::Fig2 => "fig2",
            PresetName::Fig3a => "fig3a",
            PresetName::Fig3b => "fig3b",
            PresetName::Fig3c => "fig3c",
            PresetName::Fig3d => "fig3d",
            PresetName::Fig3e => "fig3e",
            PresetName::Fig3f => "fig3f",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5a => "fig5a",
            PresetName::Fig5b => "fig5b",
            PresetName::None => "none",
        }
    }
}

/// Which model scores a sweep2d grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepModel {
    /// Six-mode propagation to t = 2 tau.
    Full,
    /// Closed-form asymptote (stationary state when stable).
    Effective,
}

impl SweepModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepModel::Full => "full",
            SweepModel::Effective => "effective",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub label: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// JSON configuration file: a flat `params` map plus a `scenario` section;
/// `absolute_units` supplies laboratory-frame inputs to `linearize`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    params: BTreeMap<String, f64>,
    scenario: Option<ScenarioSection>,
    absolute_units: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    name: Option<String>,
    t_max: Option<f64>,
    samples: Option<usize>,
    grid: Option<GridSpec>,
    axis: Option<NamedAxis>,
    axis1: Option<NamedAxis>,
    axis2: Option<NamedAxis>,
    series: Option<Vec<SeriesSpec>>,
    model: Option<String>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: ScenarioName,
    pub preset: PresetName,
    pub params: BTreeMap<String, f64>,
    pub absolute_units: Option<BTreeMap<String, f64>>,
    pub t_max: f64,
    pub samples: usize,
    pub grid: Option<GridSpec>,
    pub axis: Option<NamedAxis>,
    pub axis1: Option<NamedAxis>,
    pub axis2: Option<NamedAxis>,
    pub series: Vec<SeriesSpec>,
    pub model_kind: SweepModel,
}

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    version,
    about = "Magnon-mediated photon-phonon squeezing and entanglement simulator"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub scenario: ScenarioName,
    /// Named parameter set; fully determines the physics inputs.
    #[arg(long, value_enum, default_value_t = PresetName::None)]
    pub preset: PresetName,
    /// JSON configuration file applied on top of the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/SVG artifacts and the run manifest.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also emit static SVG line plots.
    #[arg(long)]
    pub svg: bool,
    /// Final overrides, e.g. --set g=0.2 --set t_max=300.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

fn allowed_param_keys(scenario: ScenarioName) -> Vec<&'static str> {
    match scenario {
        ScenarioName::Linearize => SYSTEM_KEYS.iter().chain(SHARED_KEYS.iter()).copied().collect(),
        _ => MODEL_KEYS.to_vec(),
    }
}

fn default_params(scenario: ScenarioName) -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    let shared = [
        ("kappa_a", 1.0e-3),
        ("kappa_b", 1.0e-5),
        ("kappa_m", 1.0e-2),
        ("n_a", 0.0),
        ("n_b", 0.0),
        ("n_m", 0.0),
    ];
    for (k, v) in shared {
        p.insert(k.to_string(), v);
    }
    if scenario != ScenarioName::Linearize {
        for (k, v) in [("delta_m", 3.0), ("r", 0.0), ("g", 0.1), ("g_mech", 0.1)] {
            p.insert(k.to_string(), v);
        }
    }
    p
}

fn set_params(target: &mut BTreeMap<String, f64>, kv: &[(&str, f64)]) {
    for (k, v) in kv {
        target.insert((*k).to_string(), *v);
    }
}

fn r_series() -> Vec<SeriesSpec> {
    vec![
        SeriesSpec {
            label: "r=0".into(),
            params: BTreeMap::from([("r".to_string(), 0.0)]),
        },
        SeriesSpec {
            label: "r=0.25".into(),
            params: BTreeMap::from([("r".to_string(), 0.25)]),
        },
    ]
}

fn preset_scenario(preset: PresetName) -> Option<ScenarioName> {
    match preset {
        PresetName::Fig2 => Some(ScenarioName::Spectrum),
        PresetName::Fig3a
        | PresetName::Fig3b
        | PresetName::Fig3c
        | PresetName::Fig3d
        | PresetName::Fig3e
        | PresetName::Fig3f => Some(ScenarioName::Extract),
        PresetName::Fig4 => Some(ScenarioName::Dynamics),
        PresetName::Fig5a | PresetName::Fig5b => Some(ScenarioName::Sweep2d),
        PresetName::None => None,
    }
}

fn apply_preset(preset: PresetName, r: &mut Resolved) {
    let detuning_window = |count: usize| GridSpec {
        min: -1.2,
        max: -0.8,
        count,
    };
    match preset {
        PresetName::Fig2 => {
            // delta_m = 3, g = G = 0.1, r = 0: the bare level-attraction
            // point sits at delta_a = -1 + 0.0100.
            r.grid = Some(detuning_window(4001));
        }
        PresetName::Fig3a | PresetName::Fig3b => {
            r.axis = Some(NamedAxis {
                name: "g".into(),
                min: 0.02,
                max: 0.3,
                count: 15,
            });
            r.series = r_series();
            r.grid = Some(detuning_window(2001));
        }
        PresetName::Fig3c | PresetName::Fig3d => {
            r.axis = Some(NamedAxis {
                name: "g_mech".into(),
                min: 0.02,
                max: 0.3,
                count: 15,
            });
            r.series = r_series();
            r.grid = Some(detuning_window(2001));
        }
        PresetName::Fig3e | PresetName::Fig3f => {
            r.axis = Some(NamedAxis {
                name: "r".into(),
                min: 0.0,
                max: 0.5,
                count: 11,
            });
            r.series = vec![
                SeriesSpec {
                    label: "delta_m=3".into(),
                    params: BTreeMap::from([("delta_m".to_string(), 3.0)]),
                },
                SeriesSpec {
                    label: "delta_m=0.5".into(),
                    params: BTreeMap::from([("delta_m".to_string(), 0.5)]),
                },
            ];
            r.grid = Some(detuning_window(2001));
        }
        PresetName::Fig4 => {
            set_params(&mut r.params, &[("r", 0.25), ("n_b", 10.0)]);
            r.t_max = 600.0;
            r.samples = 601;
        }
        PresetName::Fig5a => {
            set_params(&mut r.params, &[("r", 0.25), ("n_b", 10.0)]);
            r.model_kind = SweepModel::Full;
            r.axis1 = Some(NamedAxis {
                name: "g".into(),
                min: 0.05,
                max: 0.3,
                count: 20,
            });
            r.axis2 = Some(NamedAxis {
                name: "g_mech".into(),
                min: 0.05,
                max: 0.3,
                count: 20,
            });
        }
        PresetName::Fig5b => {
            set_params(&mut r.params, &[("n_b", 10.0)]);
            // The low-entanglement window near delta_m ~ omega_b only shows up
            // in the three-mode dynamics; the reduced two-mode picture cannot
            // see its own breakdown there.
            r.model_kind = SweepModel::Full;
            r.axis1 = Some(NamedAxis {
                name: "delta_m".into(),
                min: 0.5,
                max: 5.0,
                count: 20,
            });
            r.axis2 = Some(NamedAxis {
                name: "r".into(),
                min: 0.0,
                max: 0.5,
                count: 20,
            });
        }
        PresetName::None => {}
    }
}

fn check_keys(
    map: &BTreeMap<String, f64>,
    allowed: &[&str],
    where_: &str,
) -> Result<()> {
    for (k, v) in map {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!(
                "unknown parameter `{k}` in {where_}; allowed: {}",
                allowed.join(", ")
            )));
        }
        if !v.is_finite() {
            return Err(Error::Config(format!("parameter `{k}` in {where_} must be finite")));
        }
    }
    Ok(())
}

fn apply_file(cfg: &FileConfig, r: &mut Resolved, allowed: &[&str]) -> Result<()> {
    check_keys(&cfg.params, allowed, "config params")?;
    for (k, v) in &cfg.params {
        r.params.insert(k.clone(), *v);
    }
    if let Some(abs) = &cfg.absolute_units {
        if r.scenario != ScenarioName::Linearize {
            return Err(Error::Config(
                "absolute_units applies only to the linearize scenario".into(),
            ));
        }
        let allowed_abs: Vec<&str> = SYSTEM_KEYS
            .iter()
            .chain(SHARED_KEYS.iter())
            .copied()
            .chain(std::iter::once("omega_b"))
            .collect();
        check_keys(abs, &allowed_abs, "absolute_units")?;
        r.absolute_units = Some(abs.clone());
    }
    let Some(sc) = &cfg.scenario else {
        return Ok(());
    };
    if let Some(name) = &sc.name {
        if name != r.scenario.as_str() {
            return Err(Error::Config(format!(
                "config file declares scenario `{name}` but the command line selected `{}`",
                r.scenario.as_str()
            )));
        }
    }
    if let Some(t) = sc.t_max {
        r.t_max = t;
    }
    if let Some(s) = sc.samples {
        r.samples = s;
    }
    if let Some(g) = &sc.grid {
        r.grid = Some(g.clone());
    }
    if let Some(a) = &sc.axis {
        r.axis = Some(a.clone());
    }
    if let Some(a) = &sc.axis1 {
        r.axis1 = Some(a.clone());
    }
    if let Some(a) = &sc.axis2 {
        r.axis2 = Some(a.clone());
    }
    if let Some(series) = &sc.series {
        for s in series {
            check_keys(&s.params, allowed, &format!("series `{}`", s.label))?;
        }
        r.series = series.clone();
    }
    if let Some(m) = &sc.model {
        r.model_kind = match m.as_str() {
            "full" => SweepModel::Full,
            "effective" => SweepModel::Effective,
            other => {
                return Err(Error::Config(format!(
                    "scenario model must be `full` or `effective`, got `{other}`"
                )))
            }
        };
    }
    Ok(())
}

fn apply_set(entries: &[String], r: &mut Resolved, allowed: &[&str]) -> Result<()> {
    for entry in entries {
        let Some((key, value)) = entry.split_once('=') else {
            return Err(Error::Config(format!(
                "--set expects KEY=VALUE, got `{entry}`"
            )));
        };
        match key {
            "t_max" => {
                r.t_max = value
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("cannot parse t_max value `{value}`")))?;
            }
            "samples" => {
                r.samples = value
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("cannot parse samples value `{value}`")))?;
            }
            k if allowed.contains(&k) => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| Error::Config(format!("cannot parse value `{value}` for `{k}`")))?;
                if !v.is_finite() {
                    return Err(Error::Config(format!("`{k}` must be finite")));
                }
                r.params.insert(k.to_string(), v);
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown --set key `{other}`; allowed: t_max, samples, {}",
                    allowed.join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn validate_axis(axis: &NamedAxis, what: &str) -> Result<()> {
    if !MODEL_KEYS.contains(&axis.name.as_str()) {
        return Err(Error::Config(format!(
            "{what} sweeps unknown parameter `{}`",
            axis.name
        )));
    }
    if axis.count == 0 {
        return Err(Error::Config(format!("{what} needs at least one point")));
    }
    if !axis.min.is_finite() || !axis.max.is_finite() {
        return Err(Error::Config(format!("{what} bounds must be finite")));
    }
    Ok(())
}

fn validate(r: &Resolved) -> Result<()> {
    if !(r.t_max > 0.0) || !r.t_max.is_finite() {
        return Err(Error::Config(format!("t_max must be positive, got {}", r.t_max)));
    }
    if r.samples < 2 {
        return Err(Error::Config(format!("samples must be at least 2, got {}", r.samples)));
    }
    if let Some(g) = &r.grid {
        if g.count < 2 {
            return Err(Error::Config(format!(
                "detuning grid needs at least 2 points, got {}",
                g.count
            )));
        }
        if !g.min.is_finite() || !g.max.is_finite() || g.min >= g.max {
            return Err(Error::Config("detuning grid bounds must be finite with min < max".into()));
        }
    }
    if let Some(a) = &r.axis {
        validate_axis(a, "axis")?;
    }
    if let Some(a) = &r.axis1 {
        validate_axis(a, "axis1")?;
    }
    if let Some(a) = &r.axis2 {
        validate_axis(a, "axis2")?;
    }
    if r.series.is_empty() {
        return Err(Error::Config("at least one series is required".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in &r.series {
        if !seen.insert(&s.label) {
            return Err(Error::Config(format!("duplicate series label `{}`", s.label)));
        }
    }
    Ok(())
}

/// Resolve the command line into a complete run configuration:
/// defaults, then preset, then config file, then --set overrides.
pub fn resolve(cli: &Cli) -> Result<Resolved> {
    let allowed = allowed_param_keys(cli.scenario);
    let mut r = Resolved {
        scenario: cli.scenario,
        preset: cli.preset,
        params: default_params(cli.scenario),
        absolute_units: None,
        t_max: 600.0,
        samples: 601,
        grid: None,
        axis: None,
        axis1: None,
        axis2: None,
        series: vec![SeriesSpec {
            label: "base".into(),
            params: BTreeMap::new(),
        }],
        model_kind: SweepModel::Effective,
    };
    // Scenario-level fallbacks so every scenario runs without a config file.
    match cli.scenario {
        ScenarioName::Spectrum | ScenarioName::Extract => {
            r.grid = Some(GridSpec {
                min: -1.2,
                max: -0.8,
                count: 2001,
            });
            if cli.scenario == ScenarioName::Extract {
                r.axis = Some(NamedAxis {
                    name: "g".into(),
                    min: 0.02,
                    max: 0.3,
                    count: 15,
                });
            }
        }
        ScenarioName::Sweep2d => {
            r.axis1 = Some(NamedAxis {
                name: "g".into(),
                min: 0.05,
                max: 0.3,
                count: 20,
            });
            r.axis2 = Some(NamedAxis {
                name: "g_mech".into(),
                min: 0.05,
                max: 0.3,
                count: 20,
            });
        }
        _ => {}
    }

    if cli.preset != PresetName::None {
        let expected = preset_scenario(cli.preset).expect("non-none preset");
        if expected != cli.scenario {
            return Err(Error::Config(format!(
                "preset `{}` belongs to scenario `{}`, not `{}`",
                cli.preset.as_str(),
                expected.as_str(),
                cli.scenario.as_str()
            )));
        }
        apply_preset(cli.preset, &mut r);
    }

    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        let file: FileConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("malformed config file {}: {e}", path.display())))?;
        apply_file(&file, &mut r, &allowed)?;
    }

    apply_set(&cli.set, &mut r, &allowed)?;
    validate(&r)?;
    Ok(r)
}

fn scenario_spec_json(r: &Resolved) -> Value {
    json!({
        "t_max": r.t_max,
        "samples": r.samples,
        "grid": r.grid,
        "axis": r.axis,
        "axis1": r.axis1,
        "axis2": r.axis2,
        "series": r.series,
        "model": r.model_kind.as_str(),
    })
}

/// Write every artifact into `out`, the manifest last. A failure removes
/// everything already written so no partial run is left behind.
fn write_outputs(
    out: &Path,
    emit_svg: bool,
    threads: Option<usize>,
    resolved: &Resolved,
    output: &RunOutput,
) -> Result<()> {
    fs::create_dir_all(out)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        let mut files: Vec<String> = Vec::new();
        for (name, table) in &output.tables {
            let path = out.join(name);
            write_csv(&path, table)?;
            written.push(path);
            files.push(name.clone());
        }
        if emit_svg {
            for (name, text) in &output.plots {
                let path = out.join(name);
                fs::write(&path, text)?;
                written.push(path);
                files.push(name.clone());
            }
        }
        let mut root = Map::new();
        root.insert("artifact_version".into(), json!(env!("CARGO_PKG_VERSION")));
        root.insert("scenario".into(), json!(resolved.scenario.as_str()));
        root.insert("preset".into(), json!(resolved.preset.as_str()));
        root.insert("params".into(), json!(resolved.params));
        root.insert("absolute_units".into(), json!(resolved.absolute_units));
        root.insert("scenario_spec".into(), scenario_spec_json(resolved));
        root.insert("threads".into(), json!(threads));
        root.insert("files".into(), json!(files));
        root.insert("derived".into(), Value::Object(output.manifest.clone()));
        let mut bytes = serde_json::to_vec_pretty(&Value::Object(root))
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        bytes.push(b'\n');
        let manifest_path = out.join("manifest.json");
        fs::write(&manifest_path, bytes)?;
        written.push(manifest_path);
        Ok(())
    })();
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
    }
    result
}

/// Resolve, execute, and write a run.
pub fn run(cli: &Cli) -> Result<()> {
    let resolved = resolve(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
    }
    let output = match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build a {n}-thread pool: {e}")))?;
            pool.install(|| execute(&resolved))?
        }
        None => execute(&resolved)?,
    };
    write_outputs(&cli.out, cli.svg, cli.threads, &resolved, &output)
}

/// Binary entry point returning the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(scenario: ScenarioName, preset: PresetName, set: &[&str]) -> Cli {
        Cli {
            scenario,
            preset,
            config: None,
            out: PathBuf::from("out"),
            threads: None,
            svg: false,
            set: set.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn fig4_preset_pins_every_model_parameter() {
        let r = resolve(&cli(ScenarioName::Dynamics, PresetName::Fig4, &[])).unwrap();
        let p = &r.params;
        assert_eq!(p["delta_m"], 3.0);
        assert_eq!(p["g"], 0.1);
        assert_eq!(p["g_mech"], 0.1);
        assert_eq!(p["r"], 0.25);
        assert_eq!(p["kappa_b"], 1.0e-5);
        assert_eq!(p["kappa_a"], 1.0e-3);
        assert_eq!(p["kappa_m"], 1.0e-2);
        assert_eq!(p["n_a"], 0.0);
        assert_eq!(p["n_m"], 0.0);
        assert_eq!(p["n_b"], 10.0);
        assert!(!p.contains_key("delta_a"));
        assert_eq!(r.t_max, 600.0);
        assert_eq!(r.samples, 601);
    }

    #[test]
    fn fig2_preset_resolves_bare_spectrum_window() {
        let r = resolve(&cli(ScenarioName::Spectrum, PresetName::Fig2, &[])).unwrap();
        assert_eq!(r.params["r"], 0.0);
        assert_eq!(r.params["delta_m"], 3.0);
        let g = r.grid.unwrap();
        assert_eq!((g.min, g.max, g.count), (-1.2, -0.8, 4001));
    }

    #[test]
    fn fig5_presets_sweep_the_full_model_over_different_planes() {
        let a = resolve(&cli(ScenarioName::Sweep2d, PresetName::Fig5a, &[])).unwrap();
        assert_eq!(a.model_kind, SweepModel::Full);
        assert_eq!(a.axis1.as_ref().unwrap().name, "g");
        assert_eq!(a.axis2.as_ref().unwrap().name, "g_mech");
        assert_eq!(a.params["r"], 0.25);
        let b = resolve(&cli(ScenarioName::Sweep2d, PresetName::Fig5b, &[])).unwrap();
        assert_eq!(b.model_kind, SweepModel::Full);
        assert_eq!(b.axis1.as_ref().unwrap().name, "delta_m");
        assert_eq!(b.axis2.as_ref().unwrap().name, "r");
    }

    #[test]
    fn set_overrides_win_over_presets() {
        let r = resolve(&cli(
            ScenarioName::Dynamics,
            PresetName::Fig4,
            &["g=0.2", "t_max=300", "samples=51"],
        ))
        .unwrap();
        assert_eq!(r.params["g"], 0.2);
        assert_eq!(r.t_max, 300.0);
        assert_eq!(r.samples, 51);
    }

    #[test]
    fn unknown_keys_and_mismatches_are_config_errors() {
        let err = resolve(&cli(ScenarioName::Dynamics, PresetName::None, &["bogus=1"]))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = resolve(&cli(ScenarioName::Dynamics, PresetName::Fig2, &[])).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err =
            resolve(&cli(ScenarioName::Dynamics, PresetName::None, &["t_max=-5"])).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        // Lab-frame keys are rejected outside linearize, and vice versa.
        let err = resolve(&cli(ScenarioName::Dynamics, PresetName::None, &["omega_a=5"]))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = resolve(&cli(ScenarioName::Linearize, PresetName::None, &["delta_m=3"]))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn config_file_merges_between_preset_and_set() {
        let dir = std::env::temp_dir().join(format!("mm-cli-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        fs::write(
            &path,
            r#"{
                "params": {"g": 0.15, "n_b": 5.0},
                "scenario": {"name": "dynamics", "t_max": 400.0}
            }"#,
        )
        .unwrap();
        let mut c = cli(ScenarioName::Dynamics, PresetName::Fig4, &["g=0.25"]);
        c.config = Some(path.clone());
        let r = resolve(&c).unwrap();
        assert_eq!(r.params["g"], 0.25, "--set wins over file");
        assert_eq!(r.params["n_b"], 5.0, "file wins over preset");
        assert_eq!(r.t_max, 400.0);
        fs::remove_file(&path).unwrap();

        fs::write(&path, r#"{"scenario": {"name": "steady"}}"#).unwrap();
        let mut c = cli(ScenarioName::Dynamics, PresetName::None, &[]);
        c.config = Some(path.clone());
        assert!(matches!(resolve(&c).unwrap_err(), Error::Config(_)));

        fs::write(&path, "{ not json").unwrap();
        let mut c = cli(ScenarioName::Dynamics, PresetName::None, &[]);
        c.config = Some(path.clone());
        assert!(matches!(resolve(&c).unwrap_err(), Error::Config(_)));
        let _ = fs::remove_file(&path);
        let _ = fs::remove_dir(&dir);
    }

    #[test]
    fn absolute_units_is_linearize_only() {
        let dir = std::env::temp_dir().join(format!("mm-cli-abs-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("abs.json");
        fs::write(
            &path,
            r#"{"absolute_units": {"omega_a": 1.0, "omega_m": 1.0, "omega_b": 0.1,
                "omega_d": 0.9, "kerr": 1e-9, "g_ma": 0.01, "g_mb": 1e-7,
                "drive_rabi": 1e4, "kappa_a": 1e-4, "kappa_m": 1e-3, "kappa_b": 1e-6}}"#,
        )
        .unwrap();
        let mut c = cli(ScenarioName::Dynamics, PresetName::None, &[]);
        c.config = Some(path.clone());
        assert!(matches!(resolve(&c).unwrap_err(), Error::Config(_)));
        let mut c = cli(ScenarioName::Linearize, PresetName::None, &[]);
        c.config = Some(path.clone());
        let r = resolve(&c).unwrap();
        assert!(r.absolute_units.is_some());
        let _ = fs::remove_file(&path);
        let _ = fs::remove_dir(&dir);
    }
}
