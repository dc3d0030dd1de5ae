//! Command-line front end: JSON run configurations, batch execution, and
//! CSV/JSON/SVG emission.
//!
//! Every run is described by a [`RunConfig`] manifest (one JSON file plus
//! flag overrides), executes deterministically for a fixed seed, and writes
//! its single output atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attractive::classify_attractive;
use crate::background::BackgroundSpec;
use crate::characteristics::{
    anomalous_demo, neutrality_report, nonexistence_demo, solve_characteristics, CharOptions,
    InitialDatum, LabelGrid,
};
use crate::coldion::{energy, global_regularity_check, solve_poisson_mb, ColdIonSetup};
use crate::error::{CtError, Result};
use crate::params::{ForceSign, Params, PhasePoint, VerdictLabel};
use crate::phaseplane::{resonance_demo_with, simulate_ws, SimOptions};
use crate::thresholds::{
    breakdown_time_bound, classify_point, closing_condition, domain_endpoints, region_sweep,
    RepulsiveClassifier, SweepGrid, SweepResult,
};

pub mod svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Sweep,
    Simulate,
    Thresholds,
    Resonance,
    Characteristics,
    Coldion,
}

impl std::str::FromStr for Command {
    type Err = CtError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classify" => Ok(Command::Classify),
            "sweep" => Ok(Command::Sweep),
            "simulate" => Ok(Command::Simulate),
            "thresholds" => Ok(Command::Thresholds),
            "resonance" => Ok(Command::Resonance),
            "characteristics" => Ok(Command::Characteristics),
            "coldion" => Ok(Command::Coldion),
            other => Err(CtError::Config(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = CtError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(CtError::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdIonConfig {
    pub l: f64,
    pub n: usize,
    pub nu: f64,
    pub datum: InitialDatum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoKind {
    Anomalous,
    Nonexistence,
}

/// One experiment manifest. Fields are per-command; unknown keys are
/// rejected so typos in manifests fail fast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background: Option<BackgroundSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<PhasePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub datum: Option<InitialDatum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demo: Option<DemoKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coldion: Option<ColdIonConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            params: None,
            background: None,
            point: None,
            grid: None,
            horizon: None,
            tolerance: None,
            epsilon: None,
            phase: None,
            datum: None,
            labels: None,
            c_bar: None,
            demo: None,
            radii: None,
            time: None,
            coldion: None,
            rel_tol: None,
            abs_tol: None,
            out: None,
            format: None,
            jobs: None,
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Json)
    }

    fn require<T: Copy>(&self, field: Option<T>, name: &str) -> Result<T> {
        field.ok_or_else(|| {
            CtError::Config(format!(
                "command '{:?}' requires the '{name}' field",
                self.command
            ))
        })
    }

    fn sim_options(&self) -> SimOptions {
        let mut opts = SimOptions::default();
        if let Some(rel) = self.rel_tol {
            opts.integrator.rel_tol = rel;
        }
        if let Some(abs) = self.abs_tol {
            opts.integrator.abs_tol = abs;
        }
        opts
    }
}

/// Rendered result of one run, before it is written.
#[derive(Debug)]
pub struct RunOutput {
    pub bytes: Vec<u8>,
    pub format: OutputFormat,
}

fn json_payload<T: Serialize>(config: &RunConfig, result: &T) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        config: &'a RunConfig,
        seed: u64,
        result: &'a T,
    }
    let mut out = serde_json::to_vec_pretty(&Envelope {
        config,
        seed: config.seed(),
        result,
    })?;
    out.push(b'\n');
    Ok(out)
}

fn csv_header(config: &RunConfig, command: &str, columns: &str) -> String {
    format!("# ct {command} seed={}\n{columns}\n", config.seed())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Executes the configured command and renders the requested format.
pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    let format = config.format();
    let bytes = match config.command {
        Command::Classify => run_classify(config, format)?,
        Command::Sweep => run_sweep(config, format)?,
        Command::Simulate => run_simulate(config, format)?,
        Command::Thresholds => run_thresholds(config, format)?,
        Command::Resonance => run_resonance(config, format)?,
        Command::Characteristics => run_characteristics(config, format)?,
        Command::Coldion => run_coldion(config, format)?,
    };
    Ok(RunOutput { bytes, format })
}

/// Executes and writes the output to `config.out` (atomically) or stdout.
pub fn run(config: &RunConfig) -> Result<()> {
    let output = execute(config)?;
    match &config.out {
        Some(path) => write_atomic(path, &output.bytes),
        None => {
            std::io::stdout()
                .write_all(&output.bytes)
                .map_err(CtError::Io)?;
            Ok(())
        }
    }
}

/// Writes through a temporary sibling file and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize)]
struct ClassifyResult {
    verdict: crate::params::Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blowup_time: Option<f64>,
}

fn classify_one(config: &RunConfig) -> Result<ClassifyResult> {
    let params = config.require(config.params, "params")?;
    let point = config.require(config.point, "point")?;
    let tol = config.tolerance.unwrap_or(crate::thresholds::DEFAULT_CLASSIFY_TOL);
    let verdict = match params.k {
        ForceSign::Repulsive => classify_point(point, &params, tol)?,
        ForceSign::Attractive => classify_attractive(point, &params, tol)?,
    };
    let bound = if params.k == ForceSign::Repulsive
        && verdict.label == VerdictLabel::Supercritical
    {
        breakdown_time_bound(point, &params)?
    } else {
        None
    };
    let blowup_time = match (&config.background, config.horizon) {
        (Some(bg), Some(horizon)) => {
            let outcome = simulate_ws(point, &params, bg, horizon, &config.sim_options())?;
            outcome.blowup.map(|b| b.t)
        }
        _ => None,
    };
    Ok(ClassifyResult {
        verdict,
        bound,
        blowup_time,
    })
}

fn run_classify(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let result = classify_one(config)?;
    match format {
        OutputFormat::Json => json_payload(config, &result),
        OutputFormat::Csv => {
            let point = config.require(config.point, "point")?;
            let mut out = csv_header(
                config,
                "classify",
                "w0,s0,verdict,margin,case_tag,blowup_time,bound",
            );
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                point.w,
                point.s,
                result.verdict.label,
                result.verdict.margin,
                result.verdict.case_tag,
                fmt_opt(result.blowup_time),
                fmt_opt(result.bound),
            ));
            Ok(out.into_bytes())
        }
        OutputFormat::Svg => Err(CtError::Config(
            "classify has no svg rendering; use csv or json".into(),
        )),
    }
}

fn sweep_csv(config: &RunConfig, sweep: &SweepResult) -> Vec<u8> {
    let mut out = csv_header(
        config,
        "sweep",
        "w0,s0,verdict,margin,case_tag,blowup_time,bound",
    );
    for cell in &sweep.cells {
        out.push_str(&format!(
            "{},{},{},{},{},,{}\n",
            cell.w,
            cell.s,
            cell.verdict.label,
            cell.verdict.margin,
            cell.verdict.case_tag,
            fmt_opt(cell.bound),
        ));
    }
    out.into_bytes()
}

fn run_sweep(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let params = config.require(config.params, "params")?;
    let grid = config.require(config.grid, "grid")?;
    let tol = config.tolerance.unwrap_or(crate::thresholds::DEFAULT_CLASSIFY_TOL);
    let sweep = region_sweep(&grid, &params, tol)?;
    match format {
        OutputFormat::Csv => Ok(sweep_csv(config, &sweep)),
        OutputFormat::Json => json_payload(config, &sweep),
        OutputFormat::Svg => {
            let cls = RepulsiveClassifier::new(params, grid.s_max * 1.01 + 1e-9)?;
            let curves = svg::curve_plots(&cls);
            Ok(svg::emit_svg(Some(&sweep), &curves).into_bytes())
        }
    }
}

#[derive(Serialize)]
struct SimulateResult {
    blowup: Option<crate::phaseplane::Blowup>,
    bound_check: Option<crate::phaseplane::BoundCheck>,
    horizon: f64,
    end_state: (f64, f64),
}

fn run_simulate(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let params = config.require(config.params, "params")?;
    let point = config.require(config.point, "point")?;
    let horizon = config.require(config.horizon, "horizon")?;
    let bg = config
        .background
        .clone()
        .ok_or_else(|| CtError::Config("simulate requires 'background'".into()))?;
    let mut outcome = simulate_ws(point, &params, &bg, horizon, &config.sim_options())?;
    if params.k == ForceSign::Repulsive && outcome.blowup.is_some() {
        if let Some(bound) = breakdown_time_bound(point, &params)? {
            outcome.attach_bound_check(bound);
        }
    }
    match format {
        OutputFormat::Json => {
            let end = outcome.trajectory.last_state();
            let result = SimulateResult {
                blowup: outcome.blowup.clone(),
                bound_check: outcome.bound_check,
                horizon: outcome.horizon,
                end_state: (end[0], end[1]),
            };
            json_payload(config, &result)
        }
        OutputFormat::Csv => {
            let mut out = csv_header(config, "simulate", "t,w,s");
            for i in 0..outcome.trajectory.len() {
                let st = outcome.trajectory.state(i);
                out.push_str(&format!("{},{},{}\n", outcome.trajectory.times()[i], st[0], st[1]));
            }
            Ok(out.into_bytes())
        }
        OutputFormat::Svg => Err(CtError::Config(
            "simulate has no svg rendering; use csv or json".into(),
        )),
    }
}

#[derive(Serialize)]
struct ThresholdsResult {
    closing: crate::thresholds::ClosingReport,
    /// Absent when `nu >= 2 sqrt(c-)` (the lower curve has an unbounded
    /// domain and no anchored companion).
    #[serde(skip_serializing_if = "Option::is_none")]
    supercritical_construction: Option<crate::thresholds::DomainReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subcritical_construction: Option<crate::thresholds::DomainReport>,
}

fn run_thresholds(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let params = config.require(config.params, "params")?;
    let s_cap = config.grid.map(|g| g.s_max * 1.01).unwrap_or(8.0);
    let cls = RepulsiveClassifier::new(params, s_cap)?;
    match format {
        OutputFormat::Csv => {
            let mut out = csv_header(config, "thresholds", "curve,s,g");
            for (label, curve) in cls.curves() {
                for (s, g) in curve.samples() {
                    out.push_str(&format!("{label},{s},{g}\n"));
                }
            }
            Ok(out.into_bytes())
        }
        OutputFormat::Json => {
            let closing = closing_condition(&params);
            let gamma_minus = crate::params::gamma_exponent(params.nu, params.c_minus);
            let sup = match gamma_minus {
                Some(g) => {
                    let s_star = (1.0 + g.exp()) / params.c_minus;
                    Some(domain_endpoints(
                        params.c_minus,
                        params.c_plus,
                        params.nu,
                        s_star,
                    )?)
                }
                None => None,
            };
            let sub = match closing.s_plus {
                Some(sp) if closing.holds && sp > 1.0 / params.c_minus => Some(
                    domain_endpoints(params.c_plus, params.c_minus, params.nu, sp)?,
                ),
                _ => None,
            };
            json_payload(
                config,
                &ThresholdsResult {
                    closing,
                    supercritical_construction: sup,
                    subcritical_construction: sub,
                },
            )
        }
        OutputFormat::Svg => {
            let curves = svg::curve_plots(&cls);
            Ok(svg::emit_svg(None, &curves).into_bytes())
        }
    }
}

#[derive(Serialize)]
struct ResonanceResult {
    epsilon: f64,
    phase: f64,
    horizon: f64,
    blowup: Option<crate::phaseplane::Blowup>,
}

fn run_resonance(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let epsilon = config.epsilon.unwrap_or(0.05);
    let phase = config.phase.unwrap_or(0.0);
    let horizon = config.horizon.unwrap_or(200.0);
    let outcome = resonance_demo_with(epsilon, phase, horizon, &config.sim_options())?;
    match format {
        OutputFormat::Json => json_payload(
            config,
            &ResonanceResult {
                epsilon,
                phase,
                horizon,
                blowup: outcome.blowup.clone(),
            },
        ),
        OutputFormat::Csv => {
            let mut out = csv_header(config, "resonance", "t,w,s");
            for i in 0..outcome.trajectory.len() {
                let st = outcome.trajectory.state(i);
                out.push_str(&format!("{},{},{}\n", outcome.trajectory.times()[i], st[0], st[1]));
            }
            Ok(out.into_bytes())
        }
        OutputFormat::Svg => Err(CtError::Config(
            "resonance has no svg rendering; use csv or json".into(),
        )),
    }
}

#[derive(Serialize)]
struct CharacteristicsResult {
    blowup: Option<crate::characteristics::CharBlowup>,
    neutrality: crate::characteristics::NeutralityReport,
    n_labels: usize,
    horizon: f64,
}

fn run_characteristics(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let c_bar = config.c_bar.unwrap_or(1.0);
    if let Some(demo) = config.demo {
        let radii = config
            .radii
            .clone()
            .unwrap_or_else(|| vec![1e2, 1e3, 1e4, 1e5]);
        let t = config.time.unwrap_or(0.1);
        return match demo {
            DemoKind::Anomalous => {
                let datum = config
                    .datum
                    .clone()
                    .unwrap_or(InitialDatum::AnomalousVelocity { base: c_bar });
                let report = anomalous_demo(&datum, c_bar, t, &radii)?;
                json_payload(config, &report)
            }
            DemoKind::Nonexistence => {
                let report = nonexistence_demo(c_bar, t, &radii)?;
                json_payload(config, &report)
            }
        };
    }

    let datum = config
        .datum
        .clone()
        .ok_or_else(|| CtError::Config("characteristics requires 'datum'".into()))?;
    let labels = config.require(config.labels, "labels")?;
    let horizon = config.require(config.horizon, "horizon")?;
    let params = config.params;
    let (k, nu) = params.map_or((ForceSign::Repulsive, 0.0), |p| (p.k, p.nu));
    let mut opts = CharOptions::default();
    if let Some(rel) = config.rel_tol {
        opts.integrator.rel_tol = rel;
    }
    if let Some(abs) = config.abs_tol {
        opts.integrator.abs_tol = abs;
    }
    let sol = solve_characteristics(&datum, c_bar, k, nu, &labels, horizon, &opts)?;
    match format {
        OutputFormat::Json => {
            let neutrality = neutrality_report(&sol.states, c_bar)?;
            json_payload(
                config,
                &CharacteristicsResult {
                    blowup: sol.blowup,
                    neutrality,
                    n_labels: sol.alphas.len(),
                    horizon,
                },
            )
        }
        OutputFormat::Csv => {
            let state = sol.states.last().unwrap();
            let mut out = csv_header(config, "characteristics", "alpha,x,rho,u,Gamma,E");
            for i in 0..state.alpha.len() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    state.alpha[i], state.x[i], state.rho[i], state.u[i], state.gamma[i], state.e[i]
                ));
            }
            Ok(out.into_bytes())
        }
        OutputFormat::Svg => Err(CtError::Config(
            "characteristics has no svg rendering; use csv or json".into(),
        )),
    }
}

fn run_coldion(config: &RunConfig, format: OutputFormat) -> Result<Vec<u8>> {
    let cfg = config
        .coldion
        .clone()
        .ok_or_else(|| CtError::Config("coldion requires the 'coldion' section".into()))?;
    let setup = ColdIonSetup::from_datum(&cfg.datum, cfg.l, cfg.n, cfg.nu)?;
    match format {
        OutputFormat::Json => {
            let report = global_regularity_check(&setup)?;
            json_payload(config, &report)
        }
        OutputFormat::Csv => {
            let report = energy(&setup)?;
            let phi = solve_poisson_mb(&setup.rho0, setup.l, 1e-10)?;
            let xs = setup.xs();
            let mut out = csv_header(
                config,
                &format!(
                    "coldion H={} c-={} c+={}",
                    report.h, report.c_minus, report.c_plus
                ),
                "x,rho0,u0,phi",
            );
            for i in 0..setup.n() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    xs[i], setup.rho0[i], setup.u0[i], phi[i]
                ));
            }
            Ok(out.into_bytes())
        }
        OutputFormat::Svg => Err(CtError::Config(
            "coldion has no svg rendering; use csv or json".into(),
        )),
    }
}
