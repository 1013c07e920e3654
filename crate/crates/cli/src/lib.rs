//! Command-line front end: flags, config files, and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use netfeed_core::experiment::{ExperimentSpec, Mode};
use netfeed_core::{Error, EtaPolicy, Result};

/// Cooperative bandits with feedback graphs: grid experiments and checks.
#[derive(Debug, Default, Parser)]
#[command(name = "netfeed", version)]
pub struct Cli {
    /// key=value file; flags given on the command line win
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub arms: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// comma-separated activation probabilities
    #[arg(long)]
    pub q_grid: Option<String>,
    /// comma-separated network edge probabilities
    #[arg(long)]
    pub pnet_grid: Option<String>,
    /// comma-separated feedback-graph edge probabilities
    #[arg(long)]
    pub pfeed_grid: Option<String>,
    #[arg(long)]
    pub n_delay: Option<usize>,
    #[arg(long)]
    pub f_delay: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// fixed:<v>, tuned, doubling or doubling-reset
    #[arg(long)]
    pub eta_policy: Option<EtaPolicy>,
    #[arg(long, conflicts_with = "coop_only")]
    pub baseline_only: bool,
    #[arg(long)]
    pub coop_only: bool,
    /// write every k-th round to the trace files
    #[arg(long)]
    pub trace_stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// run the verification suites instead of an experiment
    #[arg(long)]
    pub verify: bool,
}

/// `(line number, key, value)` for every setting in a `key=value` file.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected key=value, got {line:?}"),
        })?;
        let key = key.trim();
        if !ExperimentSpec::KEYS.contains(&key) {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("unknown key {key:?}"),
            });
        }
        out.push((idx + 1, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Built-in defaults, then the config file, then command-line flags.
pub fn parse_config(cli: &Cli) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    if let Some(path) = &cli.config {
        apply_file(&mut spec, path)?;
    }
    apply_flags(&mut spec, cli)?;
    spec.validate()?;
    Ok(spec)
}

fn apply_file(spec: &mut ExperimentSpec, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for (line, key, value) in parse_config_text(&text)? {
        spec.set(&key, &value).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn apply_flags(spec: &mut ExperimentSpec, cli: &Cli) -> Result<()> {
    let lists = [
        ("q-grid", &cli.q_grid),
        ("pnet-grid", &cli.pnet_grid),
        ("pfeed-grid", &cli.pfeed_grid),
    ];
    for (key, value) in lists {
        if let Some(v) = value {
            spec.set(key, v)?;
        }
    }
    let counts = [
        (&mut spec.agents, cli.agents),
        (&mut spec.arms, cli.arms),
        (&mut spec.horizon, cli.horizon),
        (&mut spec.n_delay, cli.n_delay),
        (&mut spec.f_delay, cli.f_delay),
        (&mut spec.reps, cli.reps),
        (&mut spec.trace_stride, cli.trace_stride),
    ];
    for (field, value) in counts {
        if let Some(v) = value {
            *field = v;
        }
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(policy) = cli.eta_policy {
        spec.eta_policy = policy;
    }
    if cli.baseline_only {
        spec.mode = Mode::BaselineOnly;
    }
    if cli.coop_only {
        spec.mode = Mode::CoopOnly;
    }
    if let Some(out) = &cli.out {
        spec.out = out.clone();
    }
    Ok(())
}
