//! Importance weighting and exponential weights.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, Graph};

/// Log-weight floor relative to the leading arm. Keeps every probability
/// strictly positive over long horizons; `e^-460 ≈ 1e-200`.
pub const LOG_WEIGHT_FLOOR: f64 = -460.0;

/// Observation probabilities are clamped here before division.
pub const OBSERVATION_FLOOR: f64 = 1e-300;

/// What an agent knows about the feedback graph `F` and the feedback
/// radius `f`. Shared by all agents.
#[derive(Clone, Debug)]
pub struct FeedbackView {
    radius: usize,
    distances: DistanceMatrix,
    /// `reach[i]`: closed `f`-neighborhood of arm `i`, sorted.
    reach: Vec<Vec<usize>>,
    /// `rings[i][s]`: arms at feedback distance exactly `s ≤ f` from `i`.
    rings: Vec<Vec<Vec<usize>>>,
}

impl FeedbackView {
    pub fn new(feedback: &Graph, radius: usize) -> Self {
        let distances = feedback.all_pairs_distances();
        let k = feedback.vertex_count();
        let mut reach = vec![Vec::new(); k];
        let mut rings = vec![vec![Vec::new(); radius + 1]; k];
        for i in 0..k {
            for j in 0..k {
                if let Some(s) = distances.get(i, j).filter(|&s| s <= radius) {
                    reach[i].push(j);
                    rings[i][s].push(j);
                }
            }
        }
        FeedbackView {
            radius,
            distances,
            reach,
            rings,
        }
    }

    pub fn arms(&self) -> usize {
        self.reach.len()
    }

    /// The feedback radius `f`.
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// `N_f(i)`, closed.
    pub fn reach(&self, arm: usize) -> &[usize] {
        &self.reach[arm]
    }

    /// Arms revealed exactly `s` rounds after `arm` is played.
    pub fn ring(&self, arm: usize, s: usize) -> &[usize] {
        &self.rings[arm][s]
    }

    /// `δ_F(i, j) ≤ f`.
    pub fn within(&self, i: usize, j: usize) -> bool {
        self.distances.within(i, j, self.radius)
    }

    pub fn distance(&self, i: usize, j: usize) -> Option<usize> {
        self.distances.get(i, j)
    }

    /// `m(i) = Σ_{j ∈ N_f(i)} p(j)` for every arm.
    pub fn reach_mass(&self, p: &[f64]) -> Vec<f64> {
        self.reach
            .iter()
            .map(|r| r.iter().fold(0.0, |acc, &j| acc + p[j]))
            .collect()
    }
}

/// `1 − Π(1 − x_u)`, accumulated as `b ← b + (1 − b)·x` so that small
/// values do not cancel and a single term is returned unchanged.
pub(crate) fn union_probability(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |b, x| b + (1.0 - b) * x)
}

/// Probability `b_s(i, v)` that some agent of `v`'s network neighborhood
/// plays an arm within feedback distance `f` of `arm`:
///
/// `b = 1 − Π_{u ∈ N_n(v)} (1 − q(u) Σ_{j ∈ N_f(i)} p_s(j, u))`.
///
/// `known_neighbor_q` lists `N_n(v)` with its activation probabilities; every
/// one of those agents needs an entry in `distributions`.
pub fn observation_probability(
    arm: usize,
    distributions: &BTreeMap<usize, Vec<f64>>,
    known_neighbor_q: &BTreeMap<usize, f64>,
    view: &FeedbackView,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(known_neighbor_q.len());
    for (&u, &q) in known_neighbor_q {
        let p = distributions
            .get(&u)
            .ok_or_else(|| Error::Protocol(format!("missing play distribution of agent {u}")))?;
        if p.len() != view.arms() {
            return Err(Error::Dimension(format!(
                "distribution of agent {u} has {} entries, expected {}",
                p.len(),
                view.arms()
            )));
        }
        terms.push(q * view.reach(arm).iter().fold(0.0, |acc, &j| acc + p[j]));
    }
    Ok(union_probability(terms))
}

/// Event `B_s(i, v)`: some neighbor was active and played an arm within
/// feedback distance `f` of `arm`. `neighbor_plays` yields the arm played
/// by each neighbor, `None` for inactive ones.
pub fn observation_indicator(
    arm: usize,
    neighbor_plays: impl IntoIterator<Item = Option<usize>>,
    view: &FeedbackView,
) -> bool {
    neighbor_plays.into_iter().flatten().any(|j| view.within(arm, j))
}

/// `ℓ̂ = ℓ·B / b`. The loss is only consulted when `observed` is true.
pub fn estimate_loss(loss: Option<f64>, observed: bool, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "observation probability {b} must be positive"
        )));
    }
    if !observed {
        return Ok(0.0);
    }
    let loss = loss.ok_or_else(|| Error::Protocol("observed event without a loss value".into()))?;
    if !(0.0..=1.0).contains(&loss) {
        return Err(Error::InvalidParameter(format!("loss {loss} outside [0, 1]")));
    }
    Ok(loss / b)
}

/// Exponential weights over cumulative loss estimates:
/// `p(i) ∝ exp(−η (L(i) − min L))`, with the exponent floored at
/// [`LOG_WEIGHT_FLOOR`].
pub fn exp_weights(cumulative: &[f64], eta: f64) -> Vec<f64> {
    let lead = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = cumulative
        .iter()
        .map(|&l| (-eta * (l - lead)).max(LOG_WEIGHT_FLOOR).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Inverse-CDF draw: the first arm whose cumulative probability exceeds
/// `u ∈ [0, 1)`. Rounding leftovers go to the last arm.
pub fn sample_arm(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Learning rate tuned for horizon `T`:
/// `η = sqrt(ln K / (T (α/Q + d + 1)))`, with `α` the independence number
/// of `N^n ⊠ F^f`.
pub fn tuned_eta(arms: usize, horizon: usize, alpha_product: usize, mass: f64, delay: usize) -> Result<f64> {
    if arms < 2 {
        return Err(Error::InvalidParameter(format!(
            "tuned learning rate needs K ≥ 2, got {arms}"
        )));
    }
    if horizon == 0 || alpha_product == 0 || !(mass > 0.0) {
        return Err(Error::InvalidParameter(
            "tuned learning rate needs positive T, α and Q".into(),
        ));
    }
    let ratio = alpha_product as f64 / mass + delay as f64 + 1.0;
    Ok(((arms as f64).ln() / (horizon as f64 * ratio)).sqrt())
}
