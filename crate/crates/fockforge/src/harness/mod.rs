//! Config-driven job runner: load an experiment config, build the requested
//! bases and operators, execute verification suites, and emit a JSON report
//! plus CSV residual tables.
//!
//! Policy split, fixed once: suites checking exact finite-dimensional
//! identities (canonical anticommutation, wrap-mode density commutativity,
//! the worked composite, phase-table identities, closed-form reductions,
//! oracle equivalences with a configured tolerance) are *hard* — a miss
//! fails the run. Series-truncation residuals (canonical-commutator trend,
//! conjecture residuals) never fail the run; they surface as warnings and
//! findings, and the exit status is `0` with warnings. Errors (bad config,
//! impossible sectors) exit nonzero.
//!
//! Reports are deterministic for a fixed `(config, seed)`: no timestamps
//! beyond per-check wall times, ordered maps only, and parallel suite
//! execution merges results by key. `FOCKFORGE_WORKERS` overrides the
//! configured worker count.

mod suites;

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::density_phase::{
    build_phase_hd, ConjugateForm, DensityPhaseContext, FermiParams, PhaseFunctional,
};
use crate::error::{Error, Result};
use crate::fock::{SpinCounts, Statistics};
use crate::lattice::{GridSpec, IntTuple, Spin};

pub use suites::{
    bilinear_algebra_suite, canonical_suite, car_suite, conjecture_suite, lemma_suite,
    phase_hd_suite, recursion_suite, worked_example_suite,
};

/// Which conjugate constructions a suite should exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FormChoice {
    Field,
    Current,
    #[default]
    Both,
}

impl FormChoice {
    pub fn forms(&self) -> Vec<ConjugateForm> {
        match self {
            FormChoice::Field => vec![ConjugateForm::Field],
            FormChoice::Current => vec![ConjugateForm::Current],
            FormChoice::Both => vec![ConjugateForm::Field, ConjugateForm::Current],
        }
    }
}

/// Phase-functional selector in configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PhaseSpec {
    Zero,
    LinearInRho { k_f: f64, mass: f64, n_particles: u32 },
    Custom { u0: Vec<CustomCoefficient> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomCoefficient {
    pub q: IntTuple,
    pub value: f64,
}

impl Default for PhaseSpec {
    fn default() -> Self {
        PhaseSpec::Zero
    }
}

impl PhaseSpec {
    pub fn build(&self, grid: &GridSpec) -> Result<PhaseFunctional> {
        match self {
            PhaseSpec::Zero => Ok(PhaseFunctional::zero()),
            PhaseSpec::LinearInRho { k_f, mass, n_particles } => build_phase_hd(&FermiParams {
                k_f: *k_f,
                mass: *mass,
                n_particles: *n_particles,
                grid: *grid,
            }),
            PhaseSpec::Custom { u0 } => {
                let pairs: Vec<(IntTuple, f64)> = u0.iter().map(|c| (c.q, c.value)).collect();
                PhaseFunctional::custom(grid, &pairs)
            }
        }
    }
}

/// One registered check with its parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CheckSpec {
    CarSuite {
        /// Run on every bundled grid with at most this many modes.
        #[serde(default = "default_car_modes")]
        max_modes: usize,
    },
    WorkedExample {
        #[serde(default = "default_draws")]
        draws: usize,
    },
    Lemma {
        #[serde(default = "default_instances")]
        instances: usize,
        #[serde(default = "default_poly_degree")]
        max_poly_degree: usize,
        #[serde(default = "default_modes")]
        max_modes: usize,
        #[serde(default = "default_amplitude")]
        max_amplitude: f64,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
        #[serde(default = "default_lemma_order")]
        order: u32,
        tolerance: Option<f64>,
    },
    BilinearAlgebra,
    PhaseHd {
        k_f: f64,
        #[serde(default = "default_mass")]
        mass: f64,
        n_particles: u32,
        #[serde(default = "default_phase_nmax")]
        n_max: i32,
        #[serde(default = "default_phase_dim")]
        dim: usize,
        #[serde(default = "default_box_length")]
        box_length: f64,
    },
    Recursion {
        #[serde(default = "default_pairs")]
        pairs: usize,
        tolerance: Option<f64>,
    },
    CanonicalCommutator {
        orders: Vec<u32>,
        #[serde(default)]
        forms: FormChoice,
    },
    Conjecture {
        k_list: Vec<IntTuple>,
        orders: Vec<u32>,
        #[serde(default)]
        forms: FormChoice,
        tolerance: Option<f64>,
    },
}

fn default_car_modes() -> usize {
    8
}
fn default_draws() -> usize {
    3
}
fn default_instances() -> usize {
    100
}
fn default_poly_degree() -> usize {
    6
}
fn default_modes() -> usize {
    5
}
fn default_amplitude() -> f64 {
    0.3
}
fn default_grid_points() -> usize {
    128
}
fn default_lemma_order() -> u32 {
    10
}
fn default_pairs() -> usize {
    20
}
fn default_mass() -> f64 {
    1.0
}
fn default_phase_nmax() -> i32 {
    8
}
fn default_phase_dim() -> usize {
    1
}
fn default_box_length() -> f64 {
    std::f64::consts::TAU
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    pub report_json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleNumbers {
    pub up: u32,
    pub down: u32,
}

/// A complete experiment: one grid and sector, a phase functional, and an
/// ordered list of checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub statistics: Statistics,
    pub particle_numbers: ParticleNumbers,
    #[serde(default = "default_cap")]
    pub boson_cap: u32,
    #[serde(default = "default_spin")]
    pub active_spin: Spin,
    #[serde(default)]
    pub phase: PhaseSpec,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_cap() -> u32 {
    1
}
fn default_spin() -> Spin {
    Spin::Up
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.grid.validate()?;
        for check in &config.checks {
            if let CheckSpec::Conjecture { orders, .. } | CheckSpec::CanonicalCommutator { orders, .. } =
                check
            {
                if orders.is_empty() || orders.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("order lists must be nonempty and ascending".into()));
                }
            }
        }
        Ok(config)
    }

    pub fn counts(&self) -> SpinCounts {
        SpinCounts::new(self.particle_numbers.up, self.particle_numbers.down)
    }

    pub fn build_phase(&self) -> Result<PhaseFunctional> {
        self.phase.build(&self.grid)
    }

    pub fn build_context(&self) -> Result<DensityPhaseContext> {
        DensityPhaseContext::new(
            &self.grid,
            self.statistics,
            self.counts(),
            self.active_spin,
            self.boson_cap,
            self.build_phase()?,
        )
    }
}

/// One CSV-able record: `check, q_or_k, order, residual, flag`.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub check: String,
    pub q_or_k: String,
    pub order: Option<u32>,
    pub residual: f64,
    pub flag: String,
}

impl Row {
    pub fn new(check: &str, q_or_k: impl Into<String>, order: Option<u32>, residual: f64, flag: impl Into<String>) -> Row {
        Row { check: check.into(), q_or_k: q_or_k.into(), order, residual, flag: flag.into() }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: serde_json::Value,
    /// Hard checks fail the run; soft checks only warn.
    pub hard: bool,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub findings: Vec<String>,
    pub rows: Vec<Row>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub hard_failures: usize,
    pub checks_with_warnings: usize,
    pub findings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    /// Deterministic serialization with per-check wall times stripped; two
    /// runs of the same `(config, seed)` agree byte for byte on this.
    pub fn canonical_json(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        strip_key(&mut value, "wall_ms");
        Ok(serde_json::to_string_pretty(&value)?)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "check,q_or_k,order,residual,flag")?;
        for check in &self.checks {
            for row in &check.rows {
                let order = row.order.map(|o| o.to_string()).unwrap_or_default();
                writeln!(w, "{},{},{},{},{}", row.check, row.q_or_k, order, row.residual, row.flag)?;
            }
        }
        Ok(())
    }
}

fn strip_key(value: &mut serde_json::Value, key: &str) {
    match value {
        serde_json::Value::Object(map) => {
            map.remove(key);
            for inner in map.values_mut() {
                strip_key(inner, key);
            }
        }
        serde_json::Value::Array(items) => {
            for inner in items {
                strip_key(inner, key);
            }
        }
        _ => {}
    }
}

/// Exit policy: hard failures are nonzero, residual deviations warn only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    SuccessWithWarnings,
    HardFailure,
}

impl ExitStatus {
    pub fn code(&self) -> i32 {
        match self {
            ExitStatus::Success | ExitStatus::SuccessWithWarnings => 0,
            ExitStatus::HardFailure => 1,
        }
    }
}

/// Worker count: `FOCKFORGE_WORKERS` overrides the config, which overrides
/// the rayon default.
pub fn worker_count(config: &ExperimentConfig) -> Option<usize> {
    if let Ok(env) = std::env::var("FOCKFORGE_WORKERS") {
        if let Ok(n) = env.parse::<usize>() {
            if n > 0 {
                return Some(n);
            }
        }
    }
    config.workers
}

/// Execute every check in declared order and assemble the report.
pub fn run(config: &ExperimentConfig) -> Result<(Report, ExitStatus)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config).unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut checks = Vec::new();
    for spec in &config.checks {
        let started = std::time::Instant::now();
        let mut record = pool.install(|| dispatch(config, spec))?;
        record.wall_ms = started.elapsed().as_millis() as u64;
        checks.push(record);
    }
    let summary = Summary {
        hard_failures: checks.iter().filter(|c| c.hard && !c.passed).count(),
        checks_with_warnings: checks.iter().filter(|c| !c.warnings.is_empty()).count(),
        findings: checks.iter().map(|c| c.findings.len()).sum(),
    };
    let status = if summary.hard_failures > 0 {
        ExitStatus::HardFailure
    } else if summary.checks_with_warnings > 0 {
        ExitStatus::SuccessWithWarnings
    } else {
        ExitStatus::Success
    };
    let report = Report {
        schema_version: 1,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        checks,
        summary,
    };
    if let Some(path) = &config.output.report_json {
        std::fs::write(path, report.canonical_json()?)?;
    }
    if let Some(path) = &config.output.csv {
        let mut file = std::fs::File::create(path)?;
        report.write_csv(&mut file)?;
    }
    Ok((report, status))
}

fn dispatch(config: &ExperimentConfig, spec: &CheckSpec) -> Result<CheckRecord> {
    match spec {
        CheckSpec::CarSuite { max_modes } => car_suite(*max_modes),
        CheckSpec::WorkedExample { draws } => worked_example_suite(config.seed, *draws),
        CheckSpec::Lemma {
            instances,
            max_poly_degree,
            max_modes,
            max_amplitude,
            grid_points,
            order,
            tolerance,
        } => lemma_suite(
            config.seed,
            *instances,
            *max_poly_degree,
            *max_modes,
            *max_amplitude,
            *grid_points,
            *order,
            *tolerance,
        ),
        CheckSpec::BilinearAlgebra => bilinear_algebra_suite(config),
        CheckSpec::PhaseHd => phase_hd_suite(config),
        CheckSpec::Recursion { pairs, tolerance } => recursion_suite(config, *pairs, *tolerance),
        CheckSpec::CanonicalCommutator { orders, forms } => canonical_suite(config, orders, *forms),
        CheckSpec::Conjecture { k_list, orders, forms, tolerance } => {
            conjecture_suite(config, k_list, orders, *forms, *tolerance)
        }
    }
}
