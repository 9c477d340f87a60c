//! Effective run configuration.
//!
//! Values resolve as flags, then the run config file, then any command
//! config file, then `SERP_AUDIT_SEED` (seed only), then built-in defaults.
//! The resolved config is written next to every output and reproduces the
//! run when passed back with `--run-config`.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serp_audit::analysis::{BootstrapSettings, PeriodBoundaries, ReportSettings, Window};
use serp_audit::collection::{PlanConfig, SimulationConfig};

use crate::args::{Command, NoveltyArgs, ParseArgs, PlanArgs, ReportArgs, SimulateArgs};
use crate::error::CliError;

pub const SEED_ENV: &str = "SERP_AUDIT_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<PeriodBoundaries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_resamples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique_cutoff: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("run config serializes");
        out.push(b'\n');
        out
    }

    fn check_command(&self, command: &Command) -> Result<(), CliError> {
        match &self.command {
            Some(name) if name != command.name() => Err(CliError::Usage(format!(
                "run config is for `{name}`, not `{}`",
                command.name()
            ))),
            _ => Ok(()),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={raw:?} is not an unsigned 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing {flag} (give the flag or set it in --run-config)")))
}

fn load_boundaries(path: &Path) -> Result<PeriodBoundaries, CliError> {
    let boundaries: PeriodBoundaries =
        toml::from_str(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    boundaries
        .validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(boundaries)
}

fn resolve_boundaries(flag: Option<&Path>, base: Option<PeriodBoundaries>) -> Result<PeriodBoundaries, CliError> {
    let boundaries = match flag {
        Some(path) => load_boundaries(path)?,
        None => base.unwrap_or_default(),
    };
    boundaries
        .validate()
        .map_err(|e| CliError::Config(format!("boundaries: {e}")))?;
    Ok(boundaries)
}

fn base(run_config: Option<&Path>, command: &Command) -> Result<RunConfig, CliError> {
    let base = match run_config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    base.check_command(command)?;
    Ok(base)
}

fn command_config(command: &Command) -> RunConfig {
    RunConfig {
        command: Some(command.name().to_string()),
        ..RunConfig::default()
    }
}

pub struct ParseRun {
    /// Needed only when the input is an archive.
    pub profiles: Option<PathBuf>,
    pub input: PathBuf,
    pub output: PathBuf,
    pub expected_count: u32,
    pub effective: RunConfig,
}

pub fn resolve_parse(run_config: Option<&Path>, command: &Command, args: &ParseArgs) -> Result<ParseRun, CliError> {
    let base = base(run_config, command)?;
    let profiles = args.profiles.clone().or(base.profiles);
    let input = required(args.input.clone().or(base.input), "--in")?;
    let output = required(args.out.clone().or(base.output), "--out")?;
    let expected_count = args
        .expected_count
        .or(base.expected_count)
        .unwrap_or(serp_audit::metric::DEFAULT_EXPECTED_COUNT);
    if expected_count == 0 {
        return Err(CliError::Usage("--expected-count must be at least 1".into()));
    }
    let effective = RunConfig {
        profiles: profiles.clone(),
        input: Some(input.clone()),
        output: Some(output.clone()),
        expected_count: Some(expected_count),
        ..command_config(command)
    };
    Ok(ParseRun {
        profiles,
        input,
        output,
        expected_count,
        effective,
    })
}

pub struct NoveltyRun {
    pub input: PathBuf,
    pub output: PathBuf,
    /// `None` keeps each record's own expected count.
    pub expected_count: Option<u32>,
    pub boundaries: PeriodBoundaries,
    pub effective: RunConfig,
}

pub fn resolve_novelty(
    run_config: Option<&Path>,
    command: &Command,
    args: &NoveltyArgs,
) -> Result<NoveltyRun, CliError> {
    let base = base(run_config, command)?;
    let input = required(args.input.clone().or(base.input), "--in")?;
    let output = required(args.out.clone().or(base.output), "--out")?;
    let expected_count = args.expected_count.or(base.expected_count);
    if expected_count == Some(0) {
        return Err(CliError::Usage("--expected-count must be at least 1".into()));
    }
    let boundaries = resolve_boundaries(args.boundaries.as_deref(), base.boundaries)?;
    let effective = RunConfig {
        input: Some(input.clone()),
        output: Some(output.clone()),
        expected_count,
        boundaries: Some(boundaries),
        ..command_config(command)
    };
    Ok(NoveltyRun {
        input,
        output,
        expected_count,
        boundaries,
        effective,
    })
}

pub struct ReportRun {
    pub input: PathBuf,
    pub output: PathBuf,
    pub snapshots: Option<PathBuf>,
    pub settings: ReportSettings,
    pub effective: RunConfig,
}

pub fn resolve_report(run_config: Option<&Path>, command: &Command, args: &ReportArgs) -> Result<ReportRun, CliError> {
    let base = base(run_config, command)?;
    let input = required(args.input.clone().or(base.input), "--in")?;
    let output = required(args.out.clone().or(base.output), "--out")?;
    let snapshots = args.snapshots.clone().or(base.snapshots);
    let boundaries = resolve_boundaries(args.boundaries.as_deref(), base.boundaries)?;

    let window = match (args.window_n, args.window_minutes) {
        (Some(n), _) => Window::Count(n),
        (None, Some(m)) => Window::Minutes(m),
        (None, None) => base.window.unwrap_or_default(),
    };
    match window {
        Window::Count(0) => return Err(CliError::Usage("--window-n must be at least 1".into())),
        Window::Minutes(m) if m <= 0 => return Err(CliError::Usage("--window-minutes must be positive".into())),
        _ => {}
    }

    let defaults = BootstrapSettings::default();
    let resamples = args
        .bootstrap_resamples
        .or(base.bootstrap_resamples)
        .unwrap_or(defaults.resamples);
    let level = args.level.or(base.bootstrap_level).unwrap_or(defaults.level);
    if resamples == 0 {
        return Err(CliError::Usage("--bootstrap must be at least 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::Usage(format!("--level must be in (0, 1), got {level}")));
    }
    let seed = match args.seed.or(base.seed) {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(defaults.seed),
    };
    let unique_cutoff = args.unique_cutoff.or(base.unique_cutoff);

    let settings = ReportSettings {
        boundaries,
        window,
        bootstrap: BootstrapSettings { level, resamples, seed },
        unique_cutoff,
    };
    let effective = RunConfig {
        input: Some(input.clone()),
        output: Some(output.clone()),
        snapshots: snapshots.clone(),
        boundaries: Some(boundaries),
        window: Some(window),
        bootstrap_resamples: Some(resamples),
        bootstrap_level: Some(level),
        seed: Some(seed),
        unique_cutoff,
        ..command_config(command)
    };
    Ok(ReportRun {
        input,
        output,
        snapshots,
        settings,
        effective,
    })
}

pub struct SimulateRun {
    pub simulation: SimulationConfig,
    pub rounds: u64,
    pub seed: u64,
    pub output: PathBuf,
    pub effective: RunConfig,
}

pub fn resolve_simulate(
    run_config: Option<&Path>,
    command: &Command,
    args: &SimulateArgs,
) -> Result<SimulateRun, CliError> {
    let base = base(run_config, command)?;
    let simulation = match &args.config {
        Some(path) => SimulationConfig::from_toml(&read_text(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => required(base.simulation, "--config")?,
    };
    if simulation.streams.is_empty() {
        return Err(CliError::Config("simulation config has no [[stream]] entries".into()));
    }
    let output = required(args.out.clone().or(base.output), "--out")?;
    let rounds = required(args.rounds.or(base.rounds).or(simulation.rounds), "--rounds")?;
    let seed = match args.seed.or(base.seed).or(simulation.seed) {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(0),
    };
    let effective = RunConfig {
        output: Some(output.clone()),
        seed: Some(seed),
        rounds: Some(rounds),
        simulation: Some(simulation.clone()),
        ..command_config(command)
    };
    Ok(SimulateRun {
        simulation,
        rounds,
        seed,
        output,
        effective,
    })
}

pub struct PlanRun {
    pub plan: PlanConfig,
    pub output: PathBuf,
    pub effective: RunConfig,
}

pub fn resolve_plan(run_config: Option<&Path>, command: &Command, args: &PlanArgs) -> Result<PlanRun, CliError> {
    let base = base(run_config, command)?;
    let plan = match &args.config {
        Some(path) => PlanConfig::from_toml(&read_text(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => required(base.plan, "--config")?,
    };
    let output = required(args.out.clone().or(base.output), "--out")?;
    let effective = RunConfig {
        output: Some(output.clone()),
        plan: Some(plan.clone()),
        ..command_config(command)
    };
    Ok(PlanRun {
        plan,
        output,
        effective,
    })
}
