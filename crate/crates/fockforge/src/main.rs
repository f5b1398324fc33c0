//! Thin CLI over the `fockforge` suites. Each subcommand assembles an
//! experiment config and delegates to the library; `run` executes a full
//! JSON config. Exit codes: 0 on success (possibly with warnings on
//! measured residuals), 1 when a hard identity check fails, 2 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fockforge::bilinears::BilinearSpec;
use fockforge::density_phase::PhaseForm;
use fockforge::fock::{build_basis, FockBasis, SpinCounts, Statistics};
use fockforge::harness::{
    self, CheckSpec, ExperimentConfig, ExitStatus, FormChoice, OutputSpec, ParticleNumbers,
    PhaseSpec,
};
use fockforge::lattice::{BoundaryMode, GridSpec, IntTuple, Spin};

#[derive(Parser)]
#[command(name = "fockforge", version, about = "Finite-mode second-quantization engine and density-phase verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Truncate,
    Wrap,
}

impl From<BoundaryArg> for BoundaryMode {
    fn from(value: BoundaryArg) -> BoundaryMode {
        match value {
            BoundaryArg::Truncate => BoundaryMode::Truncate,
            BoundaryArg::Wrap => BoundaryMode::Wrap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsArg {
    Fermi,
    Bose,
}

impl From<StatsArg> for Statistics {
    fn from(value: StatsArg) -> Statistics {
        match value {
            StatsArg::Fermi => Statistics::Fermi,
            StatsArg::Bose => Statistics::Bose,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpinArg {
    Up,
    Down,
}

impl From<SpinArg> for Spin {
    fn from(value: SpinArg) -> Spin {
        match value {
            SpinArg::Up => Spin::Up,
            SpinArg::Down => Spin::Down,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Field,
    Current,
    Both,
}

impl From<FormArg> for FormChoice {
    fn from(value: FormArg) -> FormChoice {
        match value {
            FormArg::Field => FormChoice::Field,
            FormArg::Current => FormChoice::Current,
            FormArg::Both => FormChoice::Both,
        }
    }
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Spatial dimension (1..=3).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Per-axis cutoff n_max.
    #[arg(long, default_value_t = 1)]
    nmax: i32,
    /// Box side length L.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    box_length: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Wrap)]
    boundary: BoundaryArg,
}

impl GridArgs {
    fn build(&self) -> fockforge::Result<GridSpec> {
        GridSpec::new(self.dim, self.box_length, self.nmax, self.boundary.into())
    }
}

#[derive(Args, Clone)]
struct SectorArgs {
    #[arg(long, value_enum, default_value_t = StatsArg::Fermi)]
    stats: StatsArg,
    /// Spin-up particle count.
    #[arg(long, default_value_t = 1)]
    nup: u32,
    /// Spin-down particle count.
    #[arg(long, default_value_t = 0)]
    ndn: u32,
    /// Per-mode occupation cap for bosons.
    #[arg(long, default_value_t = 3)]
    cap: u32,
    #[arg(long, value_enum, default_value_t = SpinArg::Up)]
    active_spin: SpinArg,
}

#[derive(Args, Clone)]
struct PhaseArgs {
    /// Fermi momentum for the high-density phase tables; omit for Φ = 0.
    #[arg(long)]
    kf: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Particle number N in the 1/N normalizations; defaults to nup.
    #[arg(long)]
    n: Option<u32>,
}

impl PhaseArgs {
    fn build(&self, fallback_n: u32) -> PhaseSpec {
        match self.kf {
            Some(k_f) => PhaseSpec::LinearInRho {
                k_f,
                mass: self.mass,
                n_particles: self.n.unwrap_or(fallback_n).max(1),
            },
            None => PhaseSpec::Zero,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportOp {
    Annihilation,
    Creation,
    Density,
    Current,
    DeltaRho,
    DeltaPsi,
    Number,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate a Fock sector: dimension, mode order, state order.
    Basis {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sector: SectorArgs,
        /// Also print the occupation states.
        #[arg(long)]
        states: bool,
        /// Write a JSON manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Randomized Fourier-composition checks against the grid oracle.
    VerifyLemma {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 6)]
        max_poly_degree: usize,
        #[arg(long, default_value_t = 5)]
        max_modes: usize,
        #[arg(long, default_value_t = 0.3)]
        max_amplitude: f64,
        #[arg(long, default_value_t = 128)]
        grid_points: usize,
        #[arg(long, default_value_t = 10)]
        order: u32,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Exact identity suites: anticommutators, the worked composite,
    /// bilinear pairings and the first-quantized current equivalence.
    VerifyAlgebra {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Deviation of [X_q, ρ_k] from the canonical target, per order.
    VerifyCanonical {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        phase: PhaseArgs,
        /// Ascending truncation orders, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4])]
        orders: Vec<u32>,
        #[arg(long, value_enum, default_value_t = FormArg::Both)]
        form: FormArg,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Residual of the reconstructed field against the exact annihilator.
    VerifyConjecture {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        phase: PhaseArgs,
        /// Momentum labels, comma separated (1D components).
        #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1, -1], allow_hyphen_values = true)]
        k: Vec<i32>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4])]
        orders: Vec<u32>,
        #[arg(long, value_enum, default_value_t = FormArg::Current)]
        form: FormArg,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the high-density phase tables U₀/w₁/w₂ with undefined points.
    PhaseHd {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        kf: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// Dump an operator in the JSON-lines sparse triplet format.
    Export {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[arg(long, value_enum)]
        op: ExportOp,
        /// Momentum label (1D component).
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i32,
        #[arg(long, value_enum, default_value_t = SpinArg::Up)]
        spin: SpinArg,
        #[arg(long, default_value_t = 0)]
        component: usize,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the basis manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Execute a full experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the report output path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Override the CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn base_config(grid: GridSpec, sector: &SectorArgs, phase: PhaseSpec, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        grid,
        statistics: sector.stats.into(),
        particle_numbers: ParticleNumbers { up: sector.nup, down: sector.ndn },
        boson_cap: sector.cap,
        active_spin: sector.active_spin.into(),
        phase,
        checks: Vec::new(),
        output: OutputSpec::default(),
        seed,
        workers: None,
    }
}

fn run_and_print(config: &ExperimentConfig) -> fockforge::Result<ExitStatus> {
    let (report, status) = harness::run(config)?;
    for check in &report.checks {
        let verdict = if check.passed {
            if check.warnings.is_empty() { "ok" } else { "ok (warnings)" }
        } else if check.hard {
            "FAILED"
        } else {
            "deviations reported"
        };
        println!("check {:<22} {:>4} rows  {}", check.check, check.rows.len(), verdict);
        for warning in &check.warnings {
            println!("  warning: {warning}");
        }
        for finding in &check.findings {
            println!("  finding: {finding}");
        }
    }
    println!(
        "summary: {} hard failure(s), {} check(s) with warnings, {} finding(s)",
        report.summary.hard_failures, report.summary.checks_with_warnings, report.summary.findings
    );
    Ok(status)
}

fn dispatch(command: Command) -> fockforge::Result<ExitStatus> {
    match command {
        Command::Basis { grid, sector, states, manifest } => {
            let grid = grid.build()?;
            let basis = build_basis(
                &grid,
                sector.stats.into(),
                SpinCounts::new(sector.nup, sector.ndn),
                sector.cap,
            )?;
            println!("dimension {}", basis.dim());
            println!("mode order:");
            for (i, mode) in basis.modes().iter().enumerate() {
                println!("  {i:>3}  n={:?} spin={}", &mode.n[..grid.dim], mode.spin);
            }
            if states {
                println!("state order:");
                for (i, occ) in basis.states().iter().enumerate() {
                    println!("  {i:>3}  {occ:?}");
                }
            }
            if let Some(path) = manifest {
                let mut file = std::fs::File::create(path)?;
                basis.write_manifest(&mut file)?;
            }
            Ok(ExitStatus::Success)
        }
        Command::VerifyLemma {
            seed,
            instances,
            max_poly_degree,
            max_modes,
            max_amplitude,
            grid_points,
            order,
            tolerance,
        } => {
            let report = fockforge::transeries::lemma_random_suite(
                seed,
                instances,
                max_poly_degree,
                max_modes,
                max_amplitude,
                grid_points,
                order,
            )?;
            println!(
                "lemma: {} instances, max |series − oracle| = {:.3e}, {} divergent",
                report.instances, report.max_abs_error, report.diverged_instances
            );
            if report.max_abs_error <= tolerance {
                Ok(ExitStatus::Success)
            } else {
                Ok(ExitStatus::HardFailure)
            }
        }
        Command::VerifyAlgebra { grid, sector, seed } => {
            let grid = grid.build()?;
            let mut config = base_config(grid, &sector, PhaseSpec::Zero, seed);
            config.checks = vec![
                CheckSpec::CarSuite { max_modes: 8 },
                CheckSpec::WorkedExample { draws: 3 },
                CheckSpec::BilinearAlgebra,
            ];
            run_and_print(&config)
        }
        Command::VerifyCanonical { grid, sector, phase, orders, form, report, csv } => {
            let grid = grid.build()?;
            let phase = phase.build(sector.nup);
            let mut config = base_config(grid, &sector, phase, 0);
            config.checks = vec![CheckSpec::CanonicalCommutator { orders, forms: form.into() }];
            config.output = OutputSpec { report_json: report, csv };
            run_and_print(&config)
        }
        Command::VerifyConjecture { grid, sector, phase, k, orders, form, tolerance, report, csv } => {
            let grid = grid.build()?;
            let phase = phase.build(sector.nup);
            let k_list: Vec<IntTuple> = k.into_iter().map(fockforge::lattice::tuple1).collect();
            let mut config = base_config(grid, &sector, phase, 0);
            config.checks =
                vec![CheckSpec::Conjecture { k_list, orders, forms: form.into(), tolerance }];
            config.output = OutputSpec { report_json: report, csv };
            run_and_print(&config)
        }
        Command::PhaseHd { grid, kf, mass, n } => {
            let grid = grid.build()?;
            let phase = fockforge::density_phase::build_phase_hd(&fockforge::density_phase::FermiParams {
                k_f: kf,
                mass,
                n_particles: n,
                grid,
            })?;
            debug_assert_eq!(phase.form(), PhaseForm::LinearInRho);
            println!("{:>12} {:>14} {:>14} {:>14} {:>20}", "q", "w1", "w2", "radicand", "u0");
            for row in phase.rows() {
                let q = format!("{:?}", &row.q[..grid.dim]);
                match row.u0 {
                    Some(u0) => println!(
                        "{q:>12} {:>14.8} {:>14.8} {:>14.8} {u0:>20.8}",
                        row.w1, row.w2, row.radicand
                    ),
                    None => println!(
                        "{q:>12} {:>14.8} {:>14.8} {:>14.8} {:>20}",
                        row.w1,
                        row.w2,
                        row.radicand,
                        format!("undefined ({})", row.undefined_reason.as_deref().unwrap_or("?"))
                    ),
                }
            }
            println!(
                "defined at {} momenta, undefined at {}",
                phase.defined_count(),
                phase.undefined_count()
            );
            Ok(ExitStatus::Success)
        }
        Command::Export { grid, sector, op, k, spin, component, out, manifest } => {
            let grid = grid.build()?;
            let statistics: Statistics = sector.stats.into();
            let counts = SpinCounts::new(sector.nup, sector.ndn);
            let spin: Spin = spin.into();
            let k_tuple = fockforge::lattice::tuple1(k);
            let needs_tower = matches!(op, ExportOp::DeltaPsi);
            let basis = if needs_tower {
                FockBasis::tower(&grid, statistics, counts, spin, sector.cap)?
            } else {
                build_basis(&grid, statistics, counts, sector.cap)?
            };
            let operator = match op {
                ExportOp::Annihilation => fockforge::fock::build_annihilation(
                    &basis,
                    &fockforge::lattice::Mode::new(k_tuple, spin),
                )?,
                ExportOp::Creation => fockforge::fock::build_creation(
                    &basis,
                    &fockforge::lattice::Mode::new(k_tuple, spin),
                )?,
                ExportOp::Density => BilinearSpec::Density { k: k_tuple, spin }.build(&basis)?,
                ExportOp::Current => {
                    BilinearSpec::CurrentComponent { k: k_tuple, spin, component }.build(&basis)?
                }
                ExportOp::DeltaRho => fockforge::bilinears::build_delta_rho(&basis, &k_tuple, spin)?,
                ExportOp::DeltaPsi => fockforge::bilinears::build_delta_psi(&basis, &k_tuple, spin)?,
                ExportOp::Number => fockforge::fock::number_operator(&basis, spin),
            };
            match out {
                Some(path) => {
                    let mut file = std::fs::File::create(path)?;
                    operator.write_jsonl(&mut file)?;
                }
                None => {
                    let mut stdout = std::io::stdout();
                    operator.write_jsonl(&mut stdout)?;
                }
            }
            if let Some(path) = manifest {
                let mut file = std::fs::File::create(path)?;
                basis.write_manifest(&mut file)?;
            }
            Ok(ExitStatus::Success)
        }
        Command::Run { config, report, csv } => {
            let text = std::fs::read_to_string(&config)?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if report.is_some() {
                config.output.report_json = report;
            }
            if csv.is_some() {
                config.output.csv = csv;
            }
            run_and_print(&config)
        }
    }
}
