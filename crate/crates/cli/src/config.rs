use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use qkur::models::{DqdParams, QubitParams};
use qkur::report::Format;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Through-current, jump unraveling, versus g/gamma.
    Fig1a,
    /// Quantum and classical noise plus coherence versus g/gamma.
    Fig1b,
    /// Charge-difference current, diffusive unraveling, versus g/gamma.
    Fig1c,
    /// Random five-level networks.
    Fig2,
    /// Driven qubit, net emission current, versus omega/kappa.
    QubitJump,
    /// Driven qubit, homodyne current, versus omega/kappa.
    QubitDiffusive,
    /// Run the acceptance suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

/// Defaults give the standard sweeps of each experiment.
#[derive(Debug, Parser)]
#[command(
    name = "qkur",
    version,
    about = "Kinetic uncertainty relations for open quantum systems",
    allow_negative_numbers = true
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Grid points of a sweep.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    /// Smallest g/gamma of the DQD sweeps.
    #[arg(long, default_value_t = 1e-2)]
    pub gmin: f64,
    #[arg(long, default_value_t = 1e2)]
    pub gmax: f64,
    /// Smallest omega/kappa of the qubit sweeps.
    #[arg(long, default_value_t = 1e-2)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 1e2)]
    pub omega_max: f64,
    /// Dephasing rate Gamma/gamma. Defaults to 1 for fig1c and 0 otherwise.
    #[arg(long)]
    pub gamma_dephasing: Option<f64>,
    /// beta_L mu_L = -beta_R mu_R.
    #[arg(long, default_value_t = 7.0)]
    pub bias: f64,
    /// Thermal occupation of the qubit bath.
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    /// Qubit detuning Delta/kappa.
    #[arg(long, default_value_t = 0.0)]
    pub detuning: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Ensemble size of fig2.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => qkur::acceptance::log_grid(self.min, self.max, self.points),
            Spacing::Linear => {
                let step = (self.max - self.min) / (self.points - 1) as f64;
                (0..self.points).map(|i| self.min + step * i as f64).collect()
            }
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub grid: Grid,
    pub dqd: DqdParams,
    pub qubit: QubitParams,
    pub seed: u64,
    pub samples: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn check(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.to_string()))
    }
}

impl TryFrom<Args> for SweepConfig {
    type Error = CliError;

    fn try_from(a: Args) -> Result<Self, CliError> {
        let (min, max) = match a.experiment {
            Experiment::QubitJump | Experiment::QubitDiffusive => (a.omega_min, a.omega_max),
            _ => (a.gmin, a.gmax),
        };
        let sweep = !matches!(a.experiment, Experiment::Fig2 | Experiment::Verify);
        if sweep {
            check(a.points >= 2, "--points must be at least 2")?;
            check(min.is_finite() && max.is_finite() && min < max, "grid minimum must be below its maximum")?;
            check(a.spacing == Spacing::Linear || min > 0.0, "log grids need a positive minimum")?;
        }
        check(a.experiment != Experiment::Fig2 || a.samples >= 1, "--samples must be at least 1")?;
        let dephasing = a.gamma_dephasing.unwrap_or(if a.experiment == Experiment::Fig1c { 1.0 } else { 0.0 });
        let dqd = DqdParams { mu_l: a.bias, mu_r: -a.bias, ..DqdParams::default().with_dephasing(dephasing) };
        let qubit = QubitParams { nbar: a.nbar, detuning: a.detuning, ..QubitParams::default() };
        dqd.validate().map_err(|e| CliError::Config(e.to_string()))?;
        qubit.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(parent) = a.out.as_deref().and_then(|p| p.parent()) {
            check(parent.as_os_str().is_empty() || parent.is_dir(), "output directory does not exist")?;
        }
        Ok(Self {
            experiment: a.experiment,
            grid: Grid { min, max, points: a.points, spacing: a.spacing },
            dqd,
            qubit,
            seed: a.seed,
            samples: a.samples,
            out: a.out,
            format: a.format.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<SweepConfig, CliError> {
        let mut full = vec!["qkur"];
        full.extend_from_slice(args);
        SweepConfig::try_from(Args::try_parse_from(full).unwrap())
    }

    #[test]
    fn experiment_defaults() {
        let c = parse(&["--experiment", "fig1a"]).unwrap();
        assert_eq!(c.grid.values().len(), 50);
        assert_eq!(c.dqd, DqdParams::default());
        assert_eq!(parse(&["--experiment", "fig1c"]).unwrap().dqd.dephasing, 1.0);
        let c = parse(&["--experiment", "fig2"]).unwrap();
        assert_eq!((c.seed, c.samples), (42, 1000));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(parse(&["--experiment", "fig1a", "--points", "1"]).is_err());
        assert!(parse(&["--experiment", "fig1b", "--gmin", "2", "--gmax", "1"]).is_err());
        assert!(parse(&["--experiment", "qubit-jump", "--omega-min", "0"]).is_err());
        assert!(parse(&["--experiment", "fig2", "--samples", "0"]).is_err());
        assert!(parse(&["--experiment", "fig1a", "--gamma-dephasing", "-1"]).is_err());
    }

    #[test]
    fn linear_grid_hits_endpoints() {
        let g = Grid { min: 0.5, max: 2.0, points: 4, spacing: Spacing::Linear };
        assert_eq!(g.values(), vec![0.5, 1.0, 1.5, 2.0]);
    }
}
