//! Losses, activations, and the hard activation instance.
//!
//! Rounds are numbered from 1 to `T` throughout the crate.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{independence_number, Graph, DEFAULT_EXACT_LIMIT};

/// Oblivious loss sequence: `T` rows of `K` losses in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossTable {
    rounds: usize,
    arms: usize,
    values: Vec<f64>,
    /// Per-arm Bernoulli parameters when the table was drawn stochastically.
    pub means: Option<Vec<f64>>,
    pub optimal_arm: Option<usize>,
}

impl LossTable {
    /// `values` is row-major, one row of `arms` entries per round.
    pub fn new(rounds: usize, arms: usize, values: Vec<f64>) -> Result<Self> {
        if rounds == 0 || arms == 0 {
            return Err(Error::InvalidParameter("loss table needs T ≥ 1 and K ≥ 1".into()));
        }
        if values.len() != rounds * arms {
            return Err(Error::Dimension(format!(
                "{} loss values for {rounds} rounds × {arms} arms",
                values.len()
            )));
        }
        if let Some((k, &v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "loss {v} at round {}, arm {} is outside [0, 1]",
                k / arms + 1,
                k % arms
            )));
        }
        Ok(LossTable {
            rounds,
            arms,
            values,
            means: None,
            optimal_arm: None,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    /// Losses of round `t` (1-based).
    pub fn row(&self, t: usize) -> &[f64] {
        let start = (t - 1) * self.arms;
        &self.values[start..start + self.arms]
    }

    pub fn loss(&self, t: usize, arm: usize) -> f64 {
        self.values[(t - 1) * self.arms + arm]
    }

    /// Cumulative loss of every arm over the whole horizon.
    pub fn arm_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.arms];
        for t in 1..=self.rounds {
            for (acc, &l) in totals.iter_mut().zip(self.row(t)) {
                *acc += l;
            }
        }
        totals
    }

    /// CSV, one row per round, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for t in 1..=self.rounds {
            let row = self.row(t);
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut arms = None;
        let mut rounds = 0;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: idx + 1, message };
            let row: Vec<f64> = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| parse_err(format!("invalid loss {:?}", f.trim())))
                })
                .collect::<Result<_>>()?;
            match arms {
                None => arms = Some(row.len()),
                Some(k) if k != row.len() => {
                    return Err(parse_err(format!("expected {k} values, found {}", row.len())));
                }
                _ => {}
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(parse_err(format!("loss {v} outside [0, 1]")));
            }
            values.extend(row);
            rounds += 1;
        }
        let arms = arms.ok_or(Error::Parse {
            line: 1,
            message: "empty loss table".into(),
        })?;
        LossTable::new(rounds, arms, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LossTable::from_csv(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Bernoulli parameter of the optimal arm: `1/2 − sqrt(K/T)`.
pub fn optimal_arm_mean(arms: usize, rounds: usize) -> f64 {
    0.5 - (arms as f64 / rounds as f64).sqrt()
}

/// Stochastic losses: every arm is Bernoulli(1/2) except one optimal arm,
/// chosen uniformly from `rng`, which is Bernoulli(1/2 − sqrt(K/T)).
///
/// The optimal arm is drawn first; then losses are drawn round by round,
/// arm by arm.
pub fn stochastic_bernoulli_losses<R: Rng + ?Sized>(arms: usize, rounds: usize, rng: &mut R) -> Result<LossTable> {
    if arms < 2 || rounds == 0 {
        return Err(Error::InvalidParameter(format!(
            "stochastic losses need K ≥ 2 and T ≥ 1 (got K = {arms}, T = {rounds})"
        )));
    }
    if 4 * arms > rounds {
        return Err(Error::InvalidParameter(format!(
            "gap sqrt(K/T) exceeds 1/2 for K = {arms}, T = {rounds}; need T ≥ 4K"
        )));
    }
    let optimal = rng.gen_range(0..arms);
    let mut means = vec![0.5; arms];
    means[optimal] = optimal_arm_mean(arms, rounds);
    let mut values = Vec::with_capacity(arms * rounds);
    for _ in 0..rounds {
        for &m in &means {
            values.push(if rng.gen_bool(m) { 1.0 } else { 0.0 });
        }
    }
    let mut table = LossTable::new(rounds, arms, values)?;
    table.means = Some(means);
    table.optimal_arm = Some(optimal);
    Ok(table)
}

/// Realized activations for every round, plus the probabilities they were
/// drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationSchedule {
    agents: usize,
    rounds: usize,
    q: Vec<f64>,
    active: Vec<bool>,
}

fn validate_q(q: &[f64]) -> Result<f64> {
    if q.is_empty() {
        return Err(Error::InvalidParameter("no agents".into()));
    }
    for &v in q {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Probability {
                what: "activation probability",
                value: v,
            });
        }
    }
    let mass: f64 = q.iter().sum();
    if mass <= 0.0 {
        return Err(Error::InvalidParameter("activation probabilities are all zero".into()));
    }
    Ok(mass)
}

impl ActivationSchedule {
    /// Schedule from explicit active sets, one per round. Sets may only
    /// contain agents with positive `q`.
    pub fn from_sets(q: Vec<f64>, sets: &[Vec<usize>]) -> Result<Self> {
        validate_q(&q)?;
        let agents = q.len();
        let mut active = vec![false; agents * sets.len()];
        for (t, set) in sets.iter().enumerate() {
            for &v in set {
                if v >= agents {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        vertex_count: agents,
                    });
                }
                if q[v] == 0.0 {
                    return Err(Error::InvalidParameter(format!("agent {v} has q = 0 but is active")));
                }
                active[t * agents + v] = true;
            }
        }
        Ok(ActivationSchedule {
            agents,
            rounds: sets.len(),
            q,
            active,
        })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `Q = Σ_v q(v)`.
    pub fn mass(&self) -> f64 {
        self.q.iter().sum()
    }

    pub fn is_active(&self, t: usize, v: usize) -> bool {
        self.active[(t - 1) * self.agents + v]
    }

    pub fn active_set(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.active[(t - 1) * self.agents..t * self.agents];
        row.iter().enumerate().filter(|(_, &a)| a).map(|(v, _)| v)
    }

    pub fn active_count(&self, t: usize) -> usize {
        self.active_set(t).count()
    }
}

/// Each agent is active in each round independently with probability
/// `q(v)`. Draws go round by round, agent by agent, one Bernoulli each.
pub fn sample_activations<R: Rng + ?Sized>(q: &[f64], rounds: usize, rng: &mut R) -> Result<ActivationSchedule> {
    validate_q(q)?;
    let agents = q.len();
    let mut active = Vec::with_capacity(agents * rounds);
    for _ in 0..rounds {
        for &p in q {
            active.push(rng.gen_bool(p));
        }
    }
    Ok(ActivationSchedule {
        agents,
        rounds,
        q: q.to_vec(),
        active,
    })
}

/// Activation probabilities of the hard instance: mass `Q` spread evenly over
/// a maximum independent set of the `n`-th power of the network, zero
/// elsewhere. No two supported agents are within network distance `n`.
pub fn lower_bound_instance(network: &Graph, n: usize, mass: f64) -> Result<Vec<f64>> {
    let power = network.power(n);
    let alpha = independence_number(&power, DEFAULT_EXACT_LIMIT);
    if !alpha.exact {
        return Err(Error::AlphaUnavailable {
            vertex_count: power.vertex_count(),
            limit: DEFAULT_EXACT_LIMIT,
        });
    }
    let size = alpha.witness.len();
    if !(mass > 0.0 && mass <= size as f64) {
        return Err(Error::InvalidParameter(format!(
            "target mass {mass} outside (0, {size}]"
        )));
    }
    let mut q = vec![0.0; network.vertex_count()];
    for &v in &alpha.witness {
        q[v] = mass / size as f64;
    }
    Ok(q)
}
