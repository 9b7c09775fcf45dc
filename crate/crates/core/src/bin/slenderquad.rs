use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slenderquad::cli::{run, Experiment, ExperimentConfig, FiberSpec, ForceSpec};

#[derive(Parser)]
#[command(version, about = "Special quadrature experiments for slender-body theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare L on shifted Legendre polynomials with its eigenvalues.
    EigenTest(Common),
    /// Panel self-convergence of K on a uniform grid.
    KConvergence {
        #[command(flatten)]
        common: Common,
        /// Panels of the reference solution.
        #[arg(long, default_value_t = 128)]
        reference_panels: usize,
        /// Intervals of the uniform comparison grid.
        #[arg(long, default_value_t = 400)]
        uniform_count: usize,
    },
    /// Stokeslet errors on a grid of field points inside a helix.
    FieldTest {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        radial_count: usize,
        #[arg(long, default_value_t = 20)]
        angular_count: usize,
        #[arg(long, default_value_t = 16)]
        z_count: usize,
        /// Spread angles over a full turn instead of a quarter.
        #[arg(long)]
        full_circle: bool,
        #[arg(long, default_value_t = 2.2e-3)]
        min_boundary_distance: f64,
        /// Inner radius as a fraction of the projected helix radius.
        #[arg(long, default_value_t = 0.05)]
        inner_fraction: f64,
        /// Near-panel switch distance in units of the panel length.
        #[arg(long, default_value_t = 1.0)]
        switch_factor: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Comma-separated panel counts.
    #[arg(long, value_delimiter = ',')]
    panels: Option<Vec<usize>>,
    #[arg(long, default_value_t = 16)]
    rule_order: usize,
    /// `helix:kappa,tau,L` or `straight:L`.
    #[arg(long)]
    fiber: Option<String>,
    /// `testf`, `testf-simple`, `legendre:P` or `custom-coeffs:a0,a1,...`.
    #[arg(long)]
    force: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

fn apply(common: Common, experiment: Experiment) -> Result<ExperimentConfig, String> {
    let mut config = ExperimentConfig::new(experiment, common.out);
    if let Some(panels) = common.panels {
        config.panels = panels;
    }
    if let Some(fiber) = common.fiber {
        config.fiber = fiber.parse::<FiberSpec>().map_err(|e| e.to_string())?;
    }
    if let Some(force) = common.force {
        config.force = force.parse::<ForceSpec>().map_err(|e| e.to_string())?;
    }
    config.rule_order = common.rule_order;
    config.epsilon = common.epsilon;
    config.seed = common.seed;
    Ok(config)
}

fn configure(command: Command) -> Result<ExperimentConfig, String> {
    match command {
        Command::EigenTest(common) => apply(common, Experiment::EigenTest),
        Command::KConvergence {
            common,
            reference_panels,
            uniform_count,
        } => {
            let mut config = apply(common, Experiment::KConvergence)?;
            config.reference_panels = reference_panels;
            config.uniform_count = uniform_count;
            Ok(config)
        }
        Command::FieldTest {
            common,
            radial_count,
            angular_count,
            z_count,
            full_circle,
            min_boundary_distance,
            inner_fraction,
            switch_factor,
        } => {
            let mut config = apply(common, Experiment::FieldTest)?;
            let grid = &mut config.field_grid;
            grid.radial_count = radial_count;
            grid.angular_count = angular_count;
            grid.z_count = z_count;
            grid.quarter_circle = !full_circle;
            grid.min_boundary_distance = min_boundary_distance;
            grid.inner_fraction = inner_fraction;
            config.near.switch_factor = switch_factor;
            Ok(config)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match configure(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            let code = report.exit_code();
            match code {
                0 => println!("PASS"),
                2 => println!("FAIL: acceptance threshold not met"),
                _ => println!("FAIL: oracle could not resolve some points"),
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
