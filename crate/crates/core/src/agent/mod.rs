//! The local learner run by every agent.
//!
//! An [`AgentState`] sees the network only through the messages delivered
//! to it and the activation probabilities of its `n`-neighborhood. It never
//! holds the communication graph, the global activation vector, or another
//! agent's state.
//!
//! Updates are postponed by `d = n + f` rounds: the distribution played at
//! round `t` uses the estimates of rounds `1..=t−d−1` only, so every piece
//! of information about round `s` has arrived before `s` is finalized.

mod doubling;
mod estimator;

use std::collections::{BTreeMap, VecDeque};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

pub use doubling::DoublingController;
pub(crate) use estimator::union_probability;
pub use estimator::{
    estimate_loss, exp_weights, observation_indicator, observation_probability, sample_arm, tuned_eta, FeedbackView,
    LOG_WEIGHT_FLOOR, OBSERVATION_FLOOR,
};

/// A loss value with the round that generated it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservedLoss {
    pub value: f64,
    pub round: usize,
    pub arm: usize,
}

/// What an agent broadcasts at the end of every round: the losses it
/// observed during the round and the distribution it played from.
#[derive(Debug)]
pub struct FeedbackMessage {
    pub origin_round: usize,
    pub origin_agent: usize,
    pub observed_losses: Vec<ObservedLoss>,
    pub play_distribution: Vec<f64>,
    /// Arm played at `origin_round`, `None` if the sender was inactive.
    pub played: Option<usize>,
    reach_mass: OnceLock<Vec<f64>>,
}

impl FeedbackMessage {
    pub fn new(
        origin_round: usize,
        origin_agent: usize,
        observed_losses: Vec<ObservedLoss>,
        play_distribution: Vec<f64>,
        played: Option<usize>,
    ) -> Result<Self> {
        let total: f64 = play_distribution.iter().sum();
        if (total - 1.0).abs() > 1e-9 || play_distribution.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Protocol(format!(
                "agent {origin_agent} sent a distribution summing to {total}"
            )));
        }
        if let Some(arm) = played.filter(|&a| a >= play_distribution.len()) {
            return Err(Error::Protocol(format!(
                "agent {origin_agent} played unknown arm {arm}"
            )));
        }
        for l in &observed_losses {
            if !(0.0..=1.0).contains(&l.value) || l.round > origin_round || l.arm >= play_distribution.len() {
                return Err(Error::Protocol(format!(
                    "agent {origin_agent} sent malformed loss {l:?} at round {origin_round}"
                )));
            }
        }
        Ok(FeedbackMessage {
            origin_round,
            origin_agent,
            observed_losses,
            play_distribution,
            played,
            reach_mass: OnceLock::new(),
        })
    }

    pub fn was_active(&self) -> bool {
        self.played.is_some()
    }

    /// `Σ_{j ∈ N_f(i)} p(j)` for every arm, computed once per message. All
    /// recipients share one [`FeedbackView`].
    fn reach_mass(&self, view: &FeedbackView) -> &[f64] {
        self.reach_mass.get_or_init(|| view.reach_mass(&self.play_distribution))
    }
}

/// How an agent sets its learning rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LearningRate {
    Fixed(f64),
    Doubling { reset: bool },
}

/// Everything received about one generation round.
#[derive(Debug)]
struct RoundInbox {
    round: usize,
    /// Indexed by neighbor slot.
    messages: Vec<Option<Arc<FeedbackMessage>>>,
    /// Indexed by arm.
    losses: Vec<Option<f64>>,
}

impl RoundInbox {
    fn new(round: usize, slots: usize, arms: usize) -> Self {
        RoundInbox {
            round,
            messages: vec![None; slots],
            losses: vec![None; arms],
        }
    }
}

#[derive(Debug)]
pub struct AgentState {
    id: usize,
    view: Arc<FeedbackView>,
    delay: usize,
    /// `N_n(id)`, sorted, with the matching activation probabilities.
    neighbors: Vec<usize>,
    neighbor_q: Vec<f64>,
    own_q: f64,
    own_slot: usize,
    eta: f64,
    cumulative: Vec<f64>,
    current_round: usize,
    finalized_through: usize,
    /// Rounds `finalized_through + 1 ..= current_round`, oldest first.
    inbox: VecDeque<RoundInbox>,
    doubling: Option<DoublingController>,
    clamp_hits: u64,
    b_scratch: Vec<f64>,
    observed_scratch: Vec<bool>,
    estimate_scratch: Vec<f64>,
}

impl AgentState {
    /// `known_neighbor_q` must contain `id` itself and every agent within
    /// network distance `n`, and nothing else. `delay` is `d = n + f`.
    pub fn new(
        id: usize,
        known_neighbor_q: &BTreeMap<usize, f64>,
        view: Arc<FeedbackView>,
        delay: usize,
        rate: LearningRate,
    ) -> Result<Self> {
        let own_slot = known_neighbor_q
            .keys()
            .position(|&u| u == id)
            .ok_or_else(|| Error::InvalidParameter(format!("agent {id} missing from its own neighborhood")))?;
        for &q in known_neighbor_q.values() {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Probability {
                    what: "activation probability",
                    value: q,
                });
            }
        }
        let arms = view.arms();
        let (eta, doubling) = match rate {
            LearningRate::Fixed(eta) if eta > 0.0 && eta.is_finite() => (eta, None),
            LearningRate::Fixed(eta) => {
                return Err(Error::InvalidParameter(format!("learning rate {eta} must be positive")));
            }
            LearningRate::Doubling { reset } => {
                let c = DoublingController::new(arms, reset)?;
                (c.eta(), Some(c))
            }
        };
        Ok(AgentState {
            id,
            delay,
            neighbors: known_neighbor_q.keys().copied().collect(),
            neighbor_q: known_neighbor_q.values().copied().collect(),
            own_q: known_neighbor_q[&id],
            own_slot,
            eta,
            cumulative: vec![0.0; arms],
            current_round: 0,
            finalized_through: 0,
            inbox: VecDeque::new(),
            doubling,
            clamp_hits: 0,
            b_scratch: vec![0.0; arms],
            observed_scratch: vec![false; arms],
            estimate_scratch: vec![0.0; arms],
            view,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Running sums of the loss estimates of every finalized round (since
    /// the last reset in reset mode).
    pub fn cumulative_estimates(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn known_neighbor_q(&self) -> BTreeMap<usize, f64> {
        self.neighbors
            .iter()
            .copied()
            .zip(self.neighbor_q.iter().copied())
            .collect()
    }

    pub fn current_round(&self) -> usize {
        self.current_round
    }

    pub fn finalized_through(&self) -> usize {
        self.finalized_through
    }

    pub fn doubling(&self) -> Option<&DoublingController> {
        self.doubling.as_ref()
    }

    /// Times an observation probability had to be clamped to
    /// [`OBSERVATION_FLOOR`]. Nonzero values indicate a bug.
    pub fn clamp_hits(&self) -> u64 {
        self.clamp_hits
    }

    /// Opens round `t`, which must follow the current round.
    pub fn begin_round(&mut self, t: usize) -> Result<()> {
        if t != self.current_round + 1 {
            return Err(Error::Protocol(format!(
                "agent {} asked to open round {t} after round {}",
                self.id, self.current_round
            )));
        }
        self.current_round = t;
        self.inbox
            .push_back(RoundInbox::new(t, self.neighbors.len(), self.cumulative.len()));
        Ok(())
    }

    /// Distribution for the current round: uniform until something is
    /// finalized, exponential weights over the cumulative estimates after.
    pub fn play_distribution(&self) -> Vec<f64> {
        exp_weights(&self.cumulative, self.eta)
    }

    fn inbox_mut(&mut self, round: usize) -> Result<&mut RoundInbox> {
        let front = self.finalized_through + 1;
        if round < front || round > self.current_round {
            return Err(Error::Protocol(format!(
                "agent {} got information about round {round} outside its window {front}..={}",
                self.id, self.current_round
            )));
        }
        let entry = &mut self.inbox[round - front];
        debug_assert_eq!(entry.round, round);
        Ok(entry)
    }

    /// Stores a delivered message: its distribution and play under the
    /// message's round, and each loss under the round that generated it.
    pub fn receive(&mut self, msg: Arc<FeedbackMessage>) -> Result<()> {
        let slot = self.neighbors.binary_search(&msg.origin_agent).map_err(|_| {
            Error::Protocol(format!(
                "agent {} received a message from non-neighbor {}",
                self.id, msg.origin_agent
            ))
        })?;
        if msg.play_distribution.len() != self.cumulative.len() {
            return Err(Error::Dimension(format!(
                "message from agent {} has {} arms, expected {}",
                msg.origin_agent,
                msg.play_distribution.len(),
                self.cumulative.len()
            )));
        }
        for l in &msg.observed_losses {
            let entry = self.inbox_mut(l.round)?;
            match entry.losses[l.arm] {
                Some(v) if v != l.value => {
                    return Err(Error::Protocol(format!(
                        "conflicting losses {v} and {} for arm {} at round {}",
                        l.value, l.arm, l.round
                    )));
                }
                _ => entry.losses[l.arm] = Some(l.value),
            }
        }
        let id = self.id;
        let entry = self.inbox_mut(msg.origin_round)?;
        if entry.messages[slot].is_some() {
            return Err(Error::Protocol(format!(
                "agent {id} received two messages from agent {} for round {}",
                msg.origin_agent, msg.origin_round
            )));
        }
        entry.messages[slot] = Some(msg);
        Ok(())
    }

    /// Folds the loss estimates of round `s` into the cumulative sums.
    /// Rounds are finalized in order, once each, no earlier than the end of
    /// round `s + d`.
    pub fn finalize_round(&mut self, s: usize) -> Result<()> {
        if s != self.finalized_through + 1 {
            return Err(Error::Protocol(format!(
                "agent {} finalizing round {s} but next pending round is {}",
                self.id,
                self.finalized_through + 1
            )));
        }
        if self.current_round < s + self.delay {
            return Err(Error::Protocol(format!(
                "agent {} finalizing round {s} at round {}, before round {}",
                self.id,
                self.current_round,
                s + self.delay
            )));
        }
        let inbox = self.inbox.pop_front().expect("window holds round s");
        self.finalized_through = s;
        // Agents that never play carry no loss and keep no estimates.
        if self.own_q == 0.0 {
            return Ok(());
        }

        let b = &mut self.b_scratch;
        let observed = &mut self.observed_scratch;
        b.fill(0.0);
        observed.fill(false);
        for (slot, msg) in inbox.messages.iter().enumerate() {
            let msg = msg.as_ref().ok_or_else(|| {
                Error::Protocol(format!(
                    "agent {} has no message from agent {} for round {s}",
                    self.id, self.neighbors[slot]
                ))
            })?;
            let q = self.neighbor_q[slot];
            for (bi, &m) in b.iter_mut().zip(msg.reach_mass(&self.view)) {
                *bi += (1.0 - *bi) * (q * m);
            }
            if let Some(j) = msg.played {
                for &i in self.view.reach(j) {
                    observed[i] = true;
                }
            }
        }
        for bi in b.iter_mut() {
            if *bi < OBSERVATION_FLOOR {
                *bi = OBSERVATION_FLOOR;
                self.clamp_hits += 1;
            }
        }
        for (i, est) in self.estimate_scratch.iter_mut().enumerate() {
            *est = estimate_loss(inbox.losses[i], observed[i], b[i])?;
        }

        if let Some(ctrl) = self.doubling.as_mut() {
            let own = inbox.messages[self.own_slot].as_ref().expect("checked above");
            if ctrl.step(s, self.delay, b, &own.play_distribution)? {
                self.eta = ctrl.eta();
                if ctrl.resets() {
                    self.cumulative.fill(0.0);
                }
            }
        }
        for (c, &e) in self.cumulative.iter_mut().zip(&self.estimate_scratch) {
            *c += e;
        }
        Ok(())
    }
}
