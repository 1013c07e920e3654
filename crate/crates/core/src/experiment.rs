//! Grid experiments: cooperative runs against the no-communication baseline
//! over activation probabilities and random graph densities.
//!
//! Random inputs are keyed so that cells differing in one parameter share
//! everything else: the network depends only on `p_net`, the feedback graph
//! only on `p_feed`, activations only on `q`, and one loss table serves the
//! whole grid. Within a cell both algorithms see the same losses and
//! activations, and repetitions differ only in the arm draws.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use crate::environment::{sample_activations, stochastic_bernoulli_losses, ActivationSchedule, LossTable};
use crate::error::{Error, Result};
use crate::graph::{erdos_renyi, Graph};
use crate::rng::{substream, Purpose};
use crate::simulator::{run_repetitions, traces_to_csv_strided, EtaPolicy, RegretTrace, SimConfig};

/// Which algorithms a grid runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Both,
    CoopOnly,
    BaselineOnly,
}

impl Mode {
    pub fn coop(self) -> bool {
        self != Mode::BaselineOnly
    }

    pub fn baseline(self) -> bool {
        self != Mode::CoopOnly
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub agents: usize,
    pub arms: usize,
    pub horizon: usize,
    pub q_grid: Vec<f64>,
    pub pnet_grid: Vec<f64>,
    pub pfeed_grid: Vec<f64>,
    pub n_delay: usize,
    pub f_delay: usize,
    pub reps: usize,
    pub seed: u64,
    pub eta_policy: EtaPolicy,
    pub mode: Mode,
    /// Keep every `trace_stride`-th round in the trace files (the last
    /// round is always kept).
    pub trace_stride: usize,
    pub out: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            agents: 20,
            arms: 20,
            horizon: 10_000,
            q_grid: vec![0.05, 0.5, 1.0],
            pnet_grid: vec![0.2, 0.8],
            pfeed_grid: vec![0.2, 0.8],
            n_delay: 1,
            f_delay: 1,
            reps: 20,
            seed: 2022,
            eta_policy: EtaPolicy::default(),
            mode: Mode::Both,
            trace_stride: 1,
            out: PathBuf::from("results"),
        }
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("{key}: {s:?} is not a number")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::InvalidParameter(format!(
            "{key}: expected true or false, got {other:?}"
        ))),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentSpec {
    /// Keys accepted by [`set`](Self::set), same names as the command-line
    /// flags.
    pub const KEYS: [&'static str; 15] = [
        "agents",
        "arms",
        "horizon",
        "q-grid",
        "pnet-grid",
        "pfeed-grid",
        "n-delay",
        "f-delay",
        "reps",
        "seed",
        "eta-policy",
        "baseline-only",
        "coop-only",
        "trace-stride",
        "out",
    ];

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "agents" => self.agents = parse_num(key, value)?,
            "arms" => self.arms = parse_num(key, value)?,
            "horizon" => self.horizon = parse_num(key, value)?,
            "q-grid" => self.q_grid = parse_list(key, value)?,
            "pnet-grid" => self.pnet_grid = parse_list(key, value)?,
            "pfeed-grid" => self.pfeed_grid = parse_list(key, value)?,
            "n-delay" => self.n_delay = parse_num(key, value)?,
            "f-delay" => self.f_delay = parse_num(key, value)?,
            "reps" => self.reps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "eta-policy" => self.eta_policy = value.parse()?,
            "baseline-only" => {
                if parse_bool(key, value)? {
                    self.mode = Mode::BaselineOnly;
                } else if self.mode == Mode::BaselineOnly {
                    self.mode = Mode::Both;
                }
            }
            "coop-only" => {
                if parse_bool(key, value)? {
                    self.mode = Mode::CoopOnly;
                } else if self.mode == Mode::CoopOnly {
                    self.mode = Mode::Both;
                }
            }
            "trace-stride" => self.trace_stride = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            other => return Err(Error::InvalidParameter(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 || self.arms < 2 || self.horizon == 0 {
            return Err(Error::InvalidParameter(
                "need at least one agent, two arms and one round".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        if self.trace_stride == 0 {
            return Err(Error::InvalidParameter("trace-stride must be at least 1".into()));
        }
        for (name, grid) in [
            ("q-grid", &self.q_grid),
            ("pnet-grid", &self.pnet_grid),
            ("pfeed-grid", &self.pfeed_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} is empty")));
            }
            if let Some(&bad) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidParameter(format!("{name}: {bad} outside [0, 1]")));
            }
        }
        if self.q_grid.contains(&0.0) {
            return Err(Error::InvalidParameter("q-grid: q = 0 leaves no active agent".into()));
        }
        Ok(())
    }

    /// The spec as `key=value` lines, readable back through
    /// [`set`](Self::set).
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let lines = [
            ("agents", self.agents.to_string()),
            ("arms", self.arms.to_string()),
            ("horizon", self.horizon.to_string()),
            ("q-grid", join(&self.q_grid)),
            ("pnet-grid", join(&self.pnet_grid)),
            ("pfeed-grid", join(&self.pfeed_grid)),
            ("n-delay", self.n_delay.to_string()),
            ("f-delay", self.f_delay.to_string()),
            ("reps", self.reps.to_string()),
            ("seed", self.seed.to_string()),
            ("eta-policy", self.eta_policy.to_string()),
            ("baseline-only", (self.mode == Mode::BaselineOnly).to_string()),
            ("coop-only", (self.mode == Mode::CoopOnly).to_string()),
            ("trace-stride", self.trace_stride.to_string()),
            ("out", self.out.display().to_string()),
        ];
        for (k, v) in lines {
            writeln!(out, "{k}={v}").expect("writing to a String");
        }
        out
    }

    /// Network for edge probability `p_net`.
    pub fn network(&self, p_net: f64) -> Result<Graph> {
        let mut rng = substream(self.seed, Purpose::CommunicationGraph, &[p_net.to_bits()]);
        erdos_renyi(self.agents, p_net, &mut rng)
    }

    /// Feedback graph for edge probability `p_feed`.
    pub fn feedback(&self, p_feed: f64) -> Result<Graph> {
        let mut rng = substream(self.seed, Purpose::FeedbackGraph, &[p_feed.to_bits()]);
        erdos_renyi(self.arms, p_feed, &mut rng)
    }

    /// The loss table shared by every cell.
    pub fn losses(&self) -> Result<LossTable> {
        let mut rng = substream(self.seed, Purpose::Losses, &[]);
        stochastic_bernoulli_losses(self.arms, self.horizon, &mut rng)
    }

    /// Activations for uniform probability `q`.
    pub fn activations(&self, q: f64) -> Result<ActivationSchedule> {
        let mut rng = substream(self.seed, Purpose::Activations, &[q.to_bits()]);
        sample_activations(&vec![q; self.agents], self.horizon, &mut rng)
    }

    pub fn cell_config(&self, q: f64, p_net: f64, p_feed: f64) -> Result<SimConfig> {
        Ok(SimConfig {
            network: self.network(p_net)?,
            feedback: self.feedback(p_feed)?,
            n: self.n_delay,
            f: self.f_delay,
            q: vec![q; self.agents],
            horizon: self.horizon,
            eta_policy: self.eta_policy,
            seed: self.seed,
            repetitions: self.reps,
        })
    }
}

impl fmt::Display for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_text())
    }
}

/// Mean and sample standard deviation of the final `R_T / Q` over
/// repetitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub reps: usize,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Stats {
        let reps = values.len();
        let mean = values.iter().sum::<f64>() / reps as f64;
        let std = if reps > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stats { mean, std, reps }
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        self.std / (self.reps as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub q: f64,
    pub p_net: f64,
    pub p_feed: f64,
    pub coop: Option<Stats>,
    pub base: Option<Stats>,
}

impl CellSummary {
    /// Directory name of the cell, under the output root.
    pub fn dir_name(&self) -> String {
        format!("q{}_pnet{}_pfeed{}", self.q, self.p_net, self.p_feed)
    }
}

pub const SUMMARY_HEADER: &str = "q,p_net,p_feed,coop_mean,coop_std,base_mean,base_std";

fn finals(traces: &[RegretTrace]) -> Vec<f64> {
    traces.iter().map(RegretTrace::final_avg_regret).collect()
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fmt_stats(s: Option<Stats>) -> String {
    s.map_or_else(|| ",".to_string(), |s| format!("{},{}", s.mean, s.std))
}

/// Runs every cell of the grid, writing `spec.txt`, `summary.csv` and one
/// directory of traces per cell under `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<CellSummary>> {
    run_experiment_with_progress(spec, |_| {})
}

/// As [`run_experiment`], calling `progress` after every cell.
pub fn run_experiment_with_progress(
    spec: &ExperimentSpec,
    mut progress: impl FnMut(&CellSummary),
) -> Result<Vec<CellSummary>> {
    spec.validate()?;
    let root = &spec.out;
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    write(&root.join("spec.txt"), &spec.to_config_text())?;
    let summary_path = root.join("summary.csv");
    write(&summary_path, &format!("{SUMMARY_HEADER}\n"))?;

    let losses = spec.losses()?;
    let mut cells = Vec::new();
    for &q in &spec.q_grid {
        let activations = spec.activations(q)?;
        for &p_net in &spec.pnet_grid {
            for &p_feed in &spec.pfeed_grid {
                let config = spec.cell_config(q, p_net, p_feed)?;
                let mut cell = CellSummary {
                    q,
                    p_net,
                    p_feed,
                    coop: None,
                    base: None,
                };
                let dir = root.join(cell.dir_name());
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                if spec.mode.coop() {
                    let traces = run_repetitions(&config, &losses, &activations)?;
                    write(
                        &dir.join("traces_coop.csv"),
                        &traces_to_csv_strided(&traces, spec.trace_stride),
                    )?;
                    cell.coop = Some(Stats::from_values(&finals(&traces)));
                }
                if spec.mode.baseline() {
                    let traces = run_repetitions(&config.baseline()?, &losses, &activations)?;
                    write(
                        &dir.join("traces_base.csv"),
                        &traces_to_csv_strided(&traces, spec.trace_stride),
                    )?;
                    cell.base = Some(Stats::from_values(&finals(&traces)));
                }
                let line = format!(
                    "{q},{p_net},{p_feed},{},{}\n",
                    fmt_stats(cell.coop),
                    fmt_stats(cell.base)
                );
                let mut file = fs::OpenOptions::new()
                    .append(true)
                    .open(&summary_path)
                    .map_err(|e| Error::io(&summary_path, e))?;
                std::io::Write::write_all(&mut file, line.as_bytes()).map_err(|e| Error::io(&summary_path, e))?;
                progress(&cell);
                cells.push(cell);
            }
        }
    }
    Ok(cells)
}
