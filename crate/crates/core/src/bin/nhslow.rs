use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhslow::bench::commands::{
    run_command, run_config_command, run_preset_command, run_sweep_command, Command,
};
use nhslow::bench::{Axis, Config, Overrides, RunSettings, PRESET_NAMES};
use nhslow::Error;

#[derive(Parser)]
#[command(name = "nhslow", version, about = "Slow non-Hermitian evolution: simulation and state-conversion prediction")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Integrator steps
    #[arg(long)]
    steps: Option<usize>,
    /// Spectral grid points
    #[arg(long)]
    grid: Option<usize>,
    /// End-point window fraction
    #[arg(long)]
    y: Option<f64>,
    /// Reserved; every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    include_lambda1: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            steps: self.steps,
            grid: self.grid,
            y: self.y,
            include_lambda1: self.include_lambda1,
        }
    }

    fn load(&self) -> nhslow::Result<Config> {
        if let Some(seed) = self.seed {
            log::info!("--seed {seed} ignored: runs are deterministic");
        }
        let Some(path) = &self.config else {
            return Err(Error::Config("--config <file> is required".into()));
        };
        let mut cfg = Config::load(path)?;
        cfg.apply(&self.overrides());
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&Config>) -> PathBuf {
        match cfg.and_then(|c| c.outputs.dir.as_ref()) {
            Some(d) if self.out == Path::new("out") => PathBuf::from(d),
            _ => self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagate the Schrödinger equation and project onto the instantaneous eigenbasis
    Simulate(Common),
    /// Zeroth plus first-order adiabatic prediction
    PredictNaive(Common),
    /// Prediction including the first-order response to the fast drive
    PredictAdvanced(Common),
    /// Most-growing and end-point fastest growing classification
    Classify(Common),
    /// Full analysis of a config: all methods, chirality when both_directions is set
    Run(Common),
    /// Built-in scenario
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Cartesian sweep over config parameters
    Sweep {
        /// `dotted.key=v1,v2,...`; repeat for more axes
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cmd: Cmd) -> nhslow::Result<PathBuf> {
    match cmd {
        Cmd::Simulate(c) => single(Command::Simulate, &c),
        Cmd::PredictNaive(c) => single(Command::PredictNaive, &c),
        Cmd::PredictAdvanced(c) => single(Command::PredictAdvanced, &c),
        Cmd::Classify(c) => single(Command::Classify, &c),
        Cmd::Run(c) => {
            let cfg = c.load()?;
            let out = c.out_dir(Some(&cfg));
            run_config_command(&cfg, &out)?;
            Ok(out)
        }
        Cmd::Preset { name, common } => {
            let mut settings = match &common.config {
                Some(_) => common.load()?.settings(),
                None => RunSettings::default(),
            };
            let o = common.overrides();
            settings.steps = o.steps.unwrap_or(settings.steps);
            settings.grid = o.grid.unwrap_or(settings.grid);
            settings.y = o.y.unwrap_or(settings.y);
            settings.include_lambda1 |= o.include_lambda1;
            run_preset_command(&name, &settings, &common.out)?;
            Ok(common.out)
        }
        Cmd::Sweep { axes, common } => {
            let cfg = common.load()?;
            let out = common.out_dir(Some(&cfg));
            let axes = axes.iter().map(|a| a.parse()).collect::<nhslow::Result<Vec<Axis>>>()?;
            run_sweep_command(&serde_json::to_value(&cfg)?, &axes, &out)?;
            Ok(out)
        }
    }
}

fn single(cmd: Command, c: &Common) -> nhslow::Result<PathBuf> {
    let cfg = c.load()?;
    let out = c.out_dir(Some(&cfg));
    run_command(cmd, &cfg, &out)?;
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(out) => {
            println!("wrote {}", out.join("report.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_physics() { 2 } else { 1 })
        }
    }
}
