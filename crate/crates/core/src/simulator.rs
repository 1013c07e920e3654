//! The round engine.
//!
//! Each round `t`:
//! 1. every agent opens the round and computes its play distribution;
//! 2. active agents draw an arm and are charged its loss;
//! 3. losses of arms at feedback distance `s` from the played arm become
//!    visible to the player `s` rounds later;
//! 4. every agent broadcasts what it observed this round together with its
//!    distribution to its `n`-neighborhood;
//! 5. a message from `u` reaches `v` at the end of round `t + δ_N(u, v)`.
//!
//! Agents then finalize round `t − d`. Messages travel through per-recipient
//! queues, so an agent can only learn what was addressed to it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::agent::{sample_arm, tuned_eta, AgentState, FeedbackMessage, FeedbackView, LearningRate, ObservedLoss};
use crate::environment::{ActivationSchedule, LossTable};
use crate::error::{Error, Result};
use crate::graph::{edgeless, independence_number, Graph, DEFAULT_EXACT_LIMIT};
use crate::rng::{agent_stream, repetition_seed};

/// How the learning rate is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaPolicy {
    Fixed(f64),
    /// Horizon-tuned rate; needs the exact independence number of
    /// `N^n ⊠ F^f`.
    Tuned,
    Doubling {
        reset: bool,
    },
}

impl Default for EtaPolicy {
    fn default() -> Self {
        EtaPolicy::Doubling { reset: false }
    }
}

impl fmt::Display for EtaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaPolicy::Fixed(v) => write!(f, "fixed:{v}"),
            EtaPolicy::Tuned => f.write_str("tuned"),
            EtaPolicy::Doubling { reset: false } => f.write_str("doubling"),
            EtaPolicy::Doubling { reset: true } => f.write_str("doubling-reset"),
        }
    }
}

impl FromStr for EtaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tuned" => Ok(EtaPolicy::Tuned),
            "doubling" => Ok(EtaPolicy::Doubling { reset: false }),
            "doubling-reset" => Ok(EtaPolicy::Doubling { reset: true }),
            other => {
                let value = other
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| *v > 0.0 && v.is_finite())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown eta policy {other:?}, expected fixed:<v>, tuned, doubling or doubling-reset"
                        ))
                    })?;
                Ok(EtaPolicy::Fixed(value))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub network: Graph,
    pub feedback: Graph,
    /// Communication radius `n`.
    pub n: usize,
    /// Feedback radius `f`.
    pub f: usize,
    pub q: Vec<f64>,
    pub horizon: usize,
    pub eta_policy: EtaPolicy,
    pub seed: u64,
    pub repetitions: usize,
}

impl SimConfig {
    /// `d = n + f`.
    pub fn delay(&self) -> usize {
        self.n + self.f
    }

    pub fn agents(&self) -> usize {
        self.network.vertex_count()
    }

    pub fn arms(&self) -> usize {
        self.feedback.vertex_count()
    }

    /// `Q = Σ q(v)`.
    pub fn mass(&self) -> f64 {
        self.q.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.len() != self.agents() {
            return Err(Error::Dimension(format!(
                "{} activation probabilities for {} agents",
                self.q.len(),
                self.agents()
            )));
        }
        if let Some(&bad) = self.q.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(Error::Probability {
                what: "activation probability",
                value: bad,
            });
        }
        if !(self.mass() > 0.0) {
            return Err(Error::InvalidParameter("activation probabilities are all zero".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("need at least one repetition".into()));
        }
        Ok(())
    }

    /// Exact `α(N^n ⊠ F^f)`, or an error when the product is too large for
    /// the exact solver.
    pub fn alpha_product(&self) -> Result<usize> {
        let product = self
            .network
            .power(self.n)
            .strong_product(&self.feedback.power(self.f))?;
        let alpha = independence_number(&product, DEFAULT_EXACT_LIMIT);
        if !alpha.exact {
            return Err(Error::AlphaUnavailable {
                vertex_count: product.vertex_count(),
                limit: DEFAULT_EXACT_LIMIT,
            });
        }
        Ok(alpha.lower)
    }

    /// The learning rate every agent starts from.
    pub fn learning_rate(&self) -> Result<LearningRate> {
        Ok(match self.eta_policy {
            EtaPolicy::Fixed(eta) => LearningRate::Fixed(eta),
            EtaPolicy::Doubling { reset } => LearningRate::Doubling { reset },
            EtaPolicy::Tuned => LearningRate::Fixed(tuned_eta(
                self.arms(),
                self.horizon,
                self.alpha_product()?,
                self.mass(),
                self.delay(),
            )?),
        })
    }

    /// The same configuration on the edgeless network.
    pub fn baseline(&self) -> Result<SimConfig> {
        Ok(SimConfig {
            network: edgeless(self.agents())?,
            ..self.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Check delivery times, diffusion delays and update postponement on
    /// every round.
    pub audit: bool,
    /// Keep every distribution and draw.
    pub record_plays: bool,
}

/// One agent's decision at one round.
#[derive(Clone, Debug, PartialEq)]
pub struct PlayRecord {
    pub t: usize,
    pub agent: usize,
    pub distribution: Vec<f64>,
    pub uniform: f64,
    pub arm: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub checks: u64,
    pub violations: Vec<String>,
}

impl AuditReport {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub active: usize,
    pub incurred_cum: f64,
    pub regret_cum: f64,
    pub avg_regret_cum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    pub mass: f64,
    pub rows: Vec<TraceRow>,
    /// `Σ_t |A_t| ℓ_t(i)` for every arm.
    pub comparator: Vec<f64>,
    /// Loss charged to every agent.
    pub agent_losses: Vec<f64>,
    pub clamp_hits: u64,
    pub plays: Vec<PlayRecord>,
    pub audit: Option<AuditReport>,
}

impl RegretTrace {
    pub fn incurred(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.incurred_cum)
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.regret_cum)
    }

    pub fn final_avg_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.avg_regret_cum)
    }
}

/// `R_T = max_i (incurred − comparator(i))` and `R_T / Q`.
pub fn compute_regret(trace: &RegretTrace, mass: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter(format!("mass Q = {mass} must be positive")));
    }
    let best = trace.comparator.iter().copied().fold(f64::INFINITY, f64::min);
    let best = if best.is_finite() { best } else { 0.0 };
    let regret = trace.incurred() - best;
    Ok((regret, regret / mass))
}

fn check_inputs(config: &SimConfig, losses: &LossTable, activations: &ActivationSchedule) -> Result<()> {
    config.validate()?;
    if losses.rounds() < config.horizon || losses.arms() != config.arms() {
        return Err(Error::Dimension(format!(
            "loss table is {}×{}, need at least {}×{}",
            losses.rounds(),
            losses.arms(),
            config.horizon,
            config.arms()
        )));
    }
    if activations.rounds() < config.horizon || activations.agents() != config.agents() {
        return Err(Error::Dimension(format!(
            "activation schedule covers {} agents over {} rounds, need {} over {}",
            activations.agents(),
            activations.rounds(),
            config.agents(),
            config.horizon
        )));
    }
    if activations.q() != config.q.as_slice() {
        return Err(Error::Dimension("activation schedule drawn from a different q".into()));
    }
    Ok(())
}

pub fn run_simulation(
    config: &SimConfig,
    losses: &LossTable,
    activations: &ActivationSchedule,
    algorithm_seed: u64,
) -> Result<RegretTrace> {
    run_simulation_with(config, losses, activations, algorithm_seed, SimOptions::default())
}

/// Runs the protocol on the edgeless network with the same inputs.
pub fn run_baseline(
    config: &SimConfig,
    losses: &LossTable,
    activations: &ActivationSchedule,
    algorithm_seed: u64,
) -> Result<RegretTrace> {
    run_simulation(&config.baseline()?, losses, activations, algorithm_seed)
}

/// `config.repetitions` runs on shared inputs; repetition `r` uses the
/// algorithm seed `repetition_seed(config.seed, r)`.
pub fn run_repetitions(
    config: &SimConfig,
    losses: &LossTable,
    activations: &ActivationSchedule,
) -> Result<Vec<RegretTrace>> {
    (0..config.repetitions)
        .map(|rep| run_simulation(config, losses, activations, repetition_seed(config.seed, rep)))
        .collect()
}

pub fn run_simulation_with(
    config: &SimConfig,
    losses: &LossTable,
    activations: &ActivationSchedule,
    algorithm_seed: u64,
    options: SimOptions,
) -> Result<RegretTrace> {
    check_inputs(config, losses, activations)?;
    let agents = config.agents();
    let arms = config.arms();
    let (n, f, d) = (config.n, config.f, config.delay());
    let horizon = config.horizon;
    let rate = config.learning_rate()?;
    let view = Arc::new(FeedbackView::new(&config.feedback, f));
    let net = config.network.all_pairs_distances();

    // (recipient, delay) for every sender
    let mut routes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); agents];
    let mut states = Vec::with_capacity(agents);
    for v in 0..agents {
        let mut known = BTreeMap::new();
        for u in 0..agents {
            if let Some(s) = net.get(v, u).filter(|&s| s <= n) {
                known.insert(u, config.q[u]);
                routes[v].push((u, s));
            }
        }
        states.push(AgentState::new(v, &known, view.clone(), d, rate)?);
    }
    let mut draws: Vec<_> = (0..agents).map(|v| agent_stream(algorithm_seed, v)).collect();

    // pending[v][t % (f+1)]: losses v sees at round t
    let mut pending: Vec<Vec<Vec<ObservedLoss>>> = vec![vec![Vec::new(); f + 1]; agents];
    // queues[v][t % (n+1)]: messages delivered to v at the end of round t
    let mut queues: Vec<Vec<Vec<Arc<FeedbackMessage>>>> = vec![vec![Vec::new(); n + 1]; agents];

    let mut audit = options.audit.then(AuditReport::default);
    let mut history: Vec<Option<usize>> = Vec::new();

    let mass = config.mass();
    let mut comparator = vec![0.0; arms];
    let mut agent_losses = vec![0.0; agents];
    let mut incurred = 0.0;
    let mut rows = Vec::with_capacity(horizon);
    let mut plays = Vec::new();

    for t in 1..=horizon {
        let row = losses.row(t);
        let mut active = 0;
        let mut outgoing = Vec::with_capacity(agents);
        for v in 0..agents {
            let state = &mut states[v];
            state.begin_round(t)?;
            if let Some(report) = audit.as_mut() {
                let seen = state.finalized_through();
                report.check(seen == 0 || seen + d < t, || {
                    format!("agent {v} plays round {t} having finalized round {seen} with d = {d}")
                });
            }
            let p = state.play_distribution();
            let u: f64 = draws[v].gen();
            let played = activations.is_active(t, v).then(|| sample_arm(&p, u));
            if let Some(arm) = played {
                active += 1;
                incurred += row[arm];
                agent_losses[v] += row[arm];
                for s in 0..=f {
                    if t + s > horizon {
                        break;
                    }
                    let slot = &mut pending[v][(t + s) % (f + 1)];
                    slot.extend(view.ring(arm, s).iter().map(|&i| ObservedLoss {
                        value: row[i],
                        round: t,
                        arm: i,
                    }));
                }
            }
            if options.record_plays {
                plays.push(PlayRecord {
                    t,
                    agent: v,
                    distribution: p.clone(),
                    uniform: u,
                    arm: played,
                });
            }
            if audit.is_some() {
                history.push(played);
            }
            let observed = std::mem::take(&mut pending[v][t % (f + 1)]);
            outgoing.push(Arc::new(FeedbackMessage::new(t, v, observed, p, played)?));
        }

        if let Some(report) = audit.as_mut() {
            for msg in &outgoing {
                for l in &msg.observed_losses {
                    let source = history[(l.round - 1) * agents + msg.origin_agent];
                    let lag = msg.origin_round - l.round;
                    report.check(source.and_then(|j| view.distance(j, l.arm)) == Some(lag), || {
                        format!(
                            "agent {} saw loss of arm {} from round {} at round {}",
                            msg.origin_agent, l.arm, l.round, msg.origin_round
                        )
                    });
                }
            }
        }

        for (v, msg) in outgoing.into_iter().enumerate() {
            for &(u, s) in &routes[v] {
                queues[u][(t + s) % (n + 1)].push(msg.clone());
            }
        }
        for (v, state) in states.iter_mut().enumerate() {
            for msg in std::mem::take(&mut queues[v][t % (n + 1)]) {
                if let Some(report) = audit.as_mut() {
                    let lag = net.get(msg.origin_agent, v);
                    report.check(lag == Some(t - msg.origin_round), || {
                        format!(
                            "message from agent {} of round {} reached agent {v} at round {t}",
                            msg.origin_agent, msg.origin_round
                        )
                    });
                }
                state.receive(msg)?;
            }
            if t > d {
                state.finalize_round(t - d)?;
            }
        }

        for (c, &l) in comparator.iter_mut().zip(row) {
            *c += active as f64 * l;
        }
        let best = comparator.iter().copied().fold(f64::INFINITY, f64::min);
        let regret = incurred - best;
        rows.push(TraceRow {
            t,
            active,
            incurred_cum: incurred,
            regret_cum: regret,
            avg_regret_cum: regret / mass,
        });
    }

    Ok(RegretTrace {
        mass,
        rows,
        comparator,
        agent_losses,
        clamp_hits: states.iter().map(AgentState::clamp_hits).sum(),
        plays,
        audit,
    })
}

/// CSV with header `rep,t,active,incurred_cum,regret_cum,avg_regret_cum`,
/// one row per repetition and round.
pub fn traces_to_csv(traces: &[RegretTrace]) -> String {
    traces_to_csv_strided(traces, 1)
}

/// As [`traces_to_csv`], keeping rounds divisible by `stride` and the last
/// round of each trace.
pub fn traces_to_csv_strided(traces: &[RegretTrace], stride: usize) -> String {
    use std::fmt::Write as _;
    let stride = stride.max(1);
    let mut out = String::from("rep,t,active,incurred_cum,regret_cum,avg_regret_cum\n");
    for (rep, trace) in traces.iter().enumerate() {
        let last = trace.rows.len();
        for r in trace.rows.iter().filter(|r| r.t % stride == 0 || r.t == last) {
            writeln!(
                out,
                "{rep},{},{},{},{},{}",
                r.t, r.active, r.incurred_cum, r.regret_cum, r.avg_regret_cum
            )
            .expect("writing to a String");
        }
    }
    out
}
