//! Numerical checks of the graph-theoretic inequalities behind the regret
//! bound, an exact unbiasedness oracle, and the bound itself.
//!
//! Every check evaluates both sides exactly on a small instance, with the
//! independence numbers computed by the exact solver.

use std::fmt::{self, Write as _};

use rand::Rng;

use crate::agent::{union_probability, FeedbackView};
use crate::error::{Error, Result};
use crate::graph::{clique, edgeless, erdos_renyi, independence_number, Graph, DEFAULT_EXACT_LIMIT};
use crate::rng::{substream, Purpose};
use crate::simulator::SimConfig;

/// Slack allowed on every inequality.
pub const TOLERANCE: f64 = 1e-9;

/// Instances per randomized suite.
pub const SUITE_SIZE: usize = 200;

/// Outcomes the unbiasedness oracle is willing to enumerate.
pub const ENUMERATION_LIMIT: usize = 1 << 12;

/// `1 / (1 − e^{−1}) = e / (e − 1)`.
pub fn amgm_constant() -> f64 {
    1.0 / (1.0 - (-1f64).exp())
}

fn exact_alpha(g: &Graph) -> Result<usize> {
    let alpha = independence_number(g, DEFAULT_EXACT_LIMIT);
    if !alpha.exact {
        return Err(Error::AlphaUnavailable {
            vertex_count: g.vertex_count(),
            limit: DEFAULT_EXACT_LIMIT,
        });
    }
    Ok(alpha.lower)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Outcome {
    fn new(lhs: f64, rhs: f64) -> Self {
        Outcome {
            lhs,
            rhs,
            holds: lhs <= rhs + TOLERANCE,
        }
    }
}

/// Agents, arms, activation probabilities and per-agent distributions.
#[derive(Clone, Debug)]
pub struct RatioInstance {
    pub network: Graph,
    pub feedback: Graph,
    pub n: usize,
    pub f: usize,
    pub q: Vec<f64>,
    /// `p[v][i]`.
    pub p: Vec<Vec<f64>>,
}

impl RatioInstance {
    pub fn validate(&self) -> Result<()> {
        let (agents, arms) = (self.network.vertex_count(), self.feedback.vertex_count());
        if self.q.len() != agents || self.p.len() != agents {
            return Err(Error::Dimension(format!(
                "{} q values and {} distributions for {agents} agents",
                self.q.len(),
                self.p.len()
            )));
        }
        for (v, row) in self.p.iter().enumerate() {
            if row.len() != arms {
                return Err(Error::Dimension(format!(
                    "distribution of agent {v} has {} entries",
                    row.len()
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Hypothesis {
                    row: v,
                    col: 0,
                    message: format!("distribution sums to {total}"),
                });
            }
            if let Some(i) = row.iter().position(|&x| !(x > 0.0 && x <= 1.0)) {
                return Err(Error::Hypothesis {
                    row: v,
                    col: i,
                    message: format!("p = {} outside (0, 1]", row[i]),
                });
            }
            if !(self.q[v] > 0.0 && self.q[v] <= 1.0) {
                return Err(Error::Hypothesis {
                    row: v,
                    col: 0,
                    message: format!("q = {} outside (0, 1]", self.q[v]),
                });
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// `Σ_v Σ_i q(v) p(i,v) / b(i,v)` against `(α(N^n ⊠ F^f) + Q) / (1 − e^{−1})`.
pub fn network_ratio_check(inst: &RatioInstance) -> Result<Outcome> {
    inst.validate()?;
    let product = inst
        .network
        .power(inst.n)
        .strong_product(&inst.feedback.power(inst.f))?;
    let alpha = exact_alpha(&product)?;
    let view = FeedbackView::new(&inst.feedback, inst.f);
    let masses: Vec<Vec<f64>> = inst.p.iter().map(|p| view.reach_mass(p)).collect();
    let agents = inst.network.vertex_count();
    let mut lhs = 0.0;
    for v in 0..agents {
        let hood = inst.network.neighborhood(v, inst.n)?;
        for i in 0..view.arms() {
            let b = union_probability(hood.iter().map(|&u| inst.q[u] * masses[u][i]));
            lhs += inst.q[v] * inst.p[v][i] / b;
        }
    }
    Ok(Outcome::new(lhs, amgm_constant() * (alpha as f64 + inst.mass())))
}

/// `Σ_i p(i) / P(i)` against `α_d(G)`, with `P(i)` the mass of the closed
/// `d`-neighborhood of `i`. The outcome's `rhs` is `α_d`.
pub fn mass_ratio_check(g: &Graph, dpow: usize, p: &[f64]) -> Result<Outcome> {
    if p.len() != g.vertex_count() {
        return Err(Error::Dimension(format!(
            "{} weights for {} vertices",
            p.len(),
            g.vertex_count()
        )));
    }
    if let Some(i) = p.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Hypothesis {
            row: i,
            col: 0,
            message: format!("weight {} is negative", p[i]),
        });
    }
    let power = g.power(dpow);
    let mut lhs = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        let mass: f64 = power.closed_neighborhood(i).iter().map(|&j| p[j]).sum();
        if !(mass > 0.0) {
            return Err(Error::Hypothesis {
                row: i,
                col: 0,
                message: "neighborhood mass is zero".into(),
            });
        }
        lhs += pi / mass;
    }
    Ok(Outcome::new(lhs, exact_alpha(&power)? as f64))
}

/// `Σ_v c(v) / C(v)` against `(α_d(G) + Σ c) / (1 − e^{−1})`, where
/// `C(v) = 1 − Π_{w ∈ N_d(v)} (1 − c(w))`.
pub fn union_ratio_check(g: &Graph, dpow: usize, c: &[f64]) -> Result<Outcome> {
    if c.len() != g.vertex_count() {
        return Err(Error::Dimension(format!(
            "{} values for {} vertices",
            c.len(),
            g.vertex_count()
        )));
    }
    if let Some(v) = c.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::Hypothesis {
            row: v,
            col: 0,
            message: format!("c = {} outside [0, 1]", c[v]),
        });
    }
    let power = g.power(dpow);
    let mut lhs = 0.0;
    for (v, &cv) in c.iter().enumerate() {
        if cv == 0.0 {
            continue;
        }
        let denom = union_probability(power.closed_neighborhood(v).iter().map(|&w| c[w]));
        if !(denom > 0.0) {
            return Err(Error::Hypothesis {
                row: v,
                col: 0,
                message: "C(v) is zero".into(),
            });
        }
        lhs += cv / denom;
    }
    let total: f64 = c.iter().sum();
    Ok(Outcome::new(
        lhs,
        amgm_constant() * (exact_alpha(&power)? as f64 + total),
    ))
}

/// The two-graph inequality with a free weight matrix `w[i][v]`, `i` a
/// vertex of `g1` and `v` a vertex of `g2`:
///
/// `Σ w(i,v) / (1 − Π_{u ∈ N(v)} (1 − Σ_{j ∈ N(i)} w(j,u)))`
/// against `(α(g1 ⊠ g2) + Σ w) / (1 − e^{−1})`.
pub fn product_ratio_check(g1: &Graph, g2: &Graph, w: &[Vec<f64>]) -> Result<Outcome> {
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    if w.len() != n1 || w.iter().any(|row| row.len() != n2) {
        return Err(Error::Dimension(format!("weight matrix must be {n1}×{n2}")));
    }
    for (i, row) in w.iter().enumerate() {
        if let Some(u) = row.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Hypothesis {
                row: i,
                col: u,
                message: format!("weight {} is negative", row[u]),
            });
        }
    }
    // s[i][u] = Σ_{j ∈ N(i)} w(j, u)
    let mut s = vec![vec![0.0; n2]; n1];
    for (i, si) in s.iter_mut().enumerate() {
        for j in g1.closed_neighborhood(i) {
            for (acc, &x) in si.iter_mut().zip(&w[j]) {
                *acc += x;
            }
        }
        if let Some(u) = si.iter().position(|&x| x > 1.0) {
            return Err(Error::Hypothesis {
                row: i,
                col: u,
                message: format!("neighborhood weight {} exceeds 1", si[u]),
            });
        }
    }
    let hoods: Vec<Vec<usize>> = (0..n2).map(|v| g2.closed_neighborhood(v)).collect();
    let mut lhs = 0.0;
    for i in 0..n1 {
        for (v, hood) in hoods.iter().enumerate() {
            let denom = union_probability(hood.iter().map(|&u| s[i][u]));
            if !(denom > 0.0) {
                return Err(Error::Hypothesis {
                    row: i,
                    col: v,
                    message: "denominator is zero".into(),
                });
            }
            lhs += w[i][v] / denom;
        }
    }
    let total: f64 = w.iter().flatten().sum();
    let alpha = exact_alpha(&g1.strong_product(g2)?)?;
    Ok(Outcome::new(lhs, amgm_constant() * (alpha as f64 + total)))
}

/// Largest `|E[ℓ̂_s(i,v)] − ℓ_s(i)|` over arms and agents with `q(v) > 0`,
/// computed by enumerating every activation pattern and every draw.
/// `distributions[v]` is what agent `v` plays at round `s`.
pub fn unbiasedness_oracle(config: &SimConfig, distributions: &[Vec<f64>], losses: &[f64]) -> Result<f64> {
    config.validate()?;
    let (agents, arms) = (config.agents(), config.arms());
    if distributions.len() != agents || distributions.iter().any(|p| p.len() != arms) || losses.len() != arms {
        return Err(Error::Dimension(format!(
            "need {agents} distributions over {arms} arms and {arms} losses"
        )));
    }
    // each agent is inactive or plays one of the arms
    let outcomes = (arms + 1)
        .checked_pow(agents as u32)
        .filter(|&o| o <= ENUMERATION_LIMIT)
        .ok_or_else(|| Error::TooLarge(format!("{agents} agents with {arms} arms")))?;

    let view = FeedbackView::new(&config.feedback, config.f);
    let masses: Vec<Vec<f64>> = distributions.iter().map(|p| view.reach_mass(p)).collect();
    let hoods: Vec<Vec<usize>> = (0..agents)
        .map(|v| config.network.neighborhood(v, config.n))
        .collect::<Result<_>>()?;
    let b: Vec<Vec<f64>> = hoods
        .iter()
        .map(|hood| {
            (0..arms)
                .map(|i| union_probability(hood.iter().map(|&u| config.q[u] * masses[u][i])))
                .collect()
        })
        .collect();

    let mut expectation = vec![vec![0.0; arms]; agents];
    let mut plays = vec![None; agents];
    for code in 0..outcomes {
        let mut rest = code;
        let mut prob = 1.0;
        for (v, play) in plays.iter_mut().enumerate() {
            let digit = rest % (arms + 1);
            rest /= arms + 1;
            *play = digit.checked_sub(1);
            prob *= match *play {
                None => 1.0 - config.q[v],
                Some(j) => config.q[v] * distributions[v][j],
            };
        }
        if prob == 0.0 {
            continue;
        }
        for v in 0..agents {
            for i in 0..arms {
                let observed = hoods[v].iter().any(|&u| plays[u].is_some_and(|j| view.within(i, j)));
                if observed {
                    expectation[v][i] += prob * losses[i] / b[v][i];
                }
            }
        }
    }

    let mut worst: f64 = 0.0;
    for v in (0..agents).filter(|&v| config.q[v] > 0.0) {
        for i in 0..arms {
            worst = worst.max((expectation[v][i] - losses[i]).abs());
        }
    }
    Ok(worst)
}

/// Upper bound on the average regret `R_T / Q` for a fixed learning rate:
/// `d + ln K / η + η T ((α/Q + 1) / (1 − e^{−1}) + d)`.
pub fn regret_bound(config: &SimConfig, eta: f64, alpha_product: usize) -> f64 {
    let d = config.delay() as f64;
    let t = config.horizon as f64;
    let ratio = alpha_product as f64 / config.mass();
    d + (config.arms() as f64).ln() / eta + eta * t * ((ratio + 1.0) * amgm_constant() + d)
}

/// Aggregate of one randomized suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckSummary {
    pub check: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// Largest `lhs − rhs` seen, floored at zero.
    pub max_violation: f64,
}

impl CheckSummary {
    fn new(check: &'static str) -> Self {
        CheckSummary {
            check,
            instances: 0,
            failures: 0,
            max_violation: 0.0,
        }
    }

    fn record(&mut self, outcome: Outcome) {
        self.record_gap(outcome.lhs - outcome.rhs, outcome.holds);
    }

    fn record_gap(&mut self, gap: f64, holds: bool) {
        self.instances += 1;
        if !holds {
            self.failures += 1;
        }
        self.max_violation = self.max_violation.max(gap);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckSummary>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckSummary::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,instances,failures,max_violation\n");
        for c in &self.checks {
            writeln!(out, "{},{},{},{}", c.check, c.instances, c.failures, c.max_violation)
                .expect("writing to a String");
        }
        out
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<14} {:>5} instances  {:>3} failures  max violation {:e}  {}",
                c.check,
                c.instances,
                c.failures,
                c.max_violation,
                if c.passed() { "ok" } else { "FAILED" }
            )?;
        }
        write!(
            f,
            "{}",
            if self.passed() {
                "all checks passed"
            } else {
                "some checks FAILED"
            }
        )
    }
}

fn random_graph<R: Rng + ?Sized>(vertices: usize, rng: &mut R) -> Result<Graph> {
    let p = rng.gen_range(0.0..=1.0);
    erdos_renyi(vertices, p, rng)
}

/// Positive probability vector with uneven entries.
fn random_distribution<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let skew = rng.gen_range(0.5..4.0);
    let raw: Vec<f64> = (0..len).map(|_| (1.0 - rng.gen::<f64>()).powf(skew)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Value in `[0, 1]` that hits both endpoints now and then.
fn unit_with_edges<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    match rng.gen_range(0..8) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen(),
    }
}

pub fn network_ratio_suite(seed: u64, instances: usize) -> Result<CheckSummary> {
    let mut rng = substream(seed, Purpose::Verification, &[1]);
    let mut summary = CheckSummary::new("network_ratio");
    for _ in 0..instances {
        let agents = rng.gen_range(1..=5);
        let arms = rng.gen_range(1..=5);
        let inst = RatioInstance {
            network: random_graph(agents, &mut rng)?,
            feedback: random_graph(arms, &mut rng)?,
            n: rng.gen_range(0..=2),
            f: rng.gen_range(0..=2),
            q: (0..agents).map(|_| 1.0 - rng.gen::<f64>()).collect(),
            p: (0..agents).map(|_| random_distribution(arms, &mut rng)).collect(),
        };
        summary.record(network_ratio_check(&inst)?);
    }
    Ok(summary)
}

pub fn mass_ratio_suite(seed: u64, instances: usize) -> Result<CheckSummary> {
    let mut rng = substream(seed, Purpose::Verification, &[3]);
    let mut summary = CheckSummary::new("mass_ratio");
    for _ in 0..instances {
        let nv = rng.gen_range(1..=12);
        let g = random_graph(nv, &mut rng)?;
        let p: Vec<f64> = (0..nv)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen::<f64>() * 10.0
                }
            })
            .collect();
        summary.record(mass_ratio_check(&g, rng.gen_range(1..=3), &p)?);
    }
    Ok(summary)
}

pub fn union_ratio_suite(seed: u64, instances: usize) -> Result<CheckSummary> {
    let mut rng = substream(seed, Purpose::Verification, &[4]);
    let mut summary = CheckSummary::new("union_ratio");
    for _ in 0..instances {
        let nv = rng.gen_range(1..=12);
        let g = random_graph(nv, &mut rng)?;
        let c: Vec<f64> = (0..nv).map(|_| unit_with_edges(&mut rng)).collect();
        summary.record(union_ratio_check(&g, rng.gen_range(1..=3), &c)?);
    }
    Ok(summary)
}

/// Draws a weight matrix and rescales it so every neighborhood column sum
/// is at most one; redraws until every denominator is positive.
fn feasible_weights<R: Rng + ?Sized>(g1: &Graph, g2: &Graph, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    loop {
        let mut w: Vec<Vec<f64>> = (0..n1)
            .map(|_| {
                (0..n2)
                    .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen() })
                    .collect()
            })
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..n1 {
            for u in 0..n2 {
                worst = worst.max(g1.closed_neighborhood(i).iter().map(|&j| w[j][u]).sum());
            }
        }
        if worst == 0.0 {
            continue;
        }
        // keep a safety margin so rounding never pushes a sum over 1
        let scale = rng.gen_range(0.05..=1.0) * (1.0 - 1e-12) / worst;
        for x in w.iter_mut().flatten() {
            *x *= scale;
        }
        match product_ratio_check(g1, g2, &w) {
            Err(Error::Hypothesis { .. }) => continue,
            Err(e) => return Err(e),
            Ok(_) => return Ok(w),
        }
    }
}

pub fn product_ratio_suite(seed: u64, instances: usize) -> Result<CheckSummary> {
    let mut rng = substream(seed, Purpose::Verification, &[6]);
    let mut summary = CheckSummary::new("product_ratio");
    for _ in 0..instances {
        let g1 = random_graph(rng.gen_range(1..=8), &mut rng)?;
        let g2 = random_graph(rng.gen_range(1..=8), &mut rng)?;
        let w = feasible_weights(&g1, &g2, &mut rng)?;
        summary.record(product_ratio_check(&g1, &g2, &w)?);
    }
    Ok(summary)
}

/// The single-graph inequality is the two-graph one with a one-vertex first
/// graph; both evaluations must agree.
pub fn reduction_suite(seed: u64, instances: usize) -> Result<CheckSummary> {
    let mut rng = substream(seed, Purpose::Verification, &[46]);
    let mut summary = CheckSummary::new("union_vs_product");
    let single = edgeless(1)?;
    for _ in 0..instances {
        let nv = rng.gen_range(1..=12);
        let g = random_graph(nv, &mut rng)?;
        // redraw until every denominator of the two-graph form is positive
        let (c, b) = loop {
            let c: Vec<f64> = (0..nv).map(|_| unit_with_edges(&mut rng)).collect();
            match product_ratio_check(&single, &g, std::slice::from_ref(&c)) {
                Err(Error::Hypothesis { .. }) => continue,
                other => break (c, other?),
            }
        };
        let a = union_ratio_check(&g, 1, &c)?;
        let gap = (a.lhs - b.lhs).abs().max((a.rhs - b.rhs).abs());
        summary.record_gap(gap, gap < 1e-12);
    }
    Ok(summary)
}

/// Twenty small instances spanning one to three agents, two or three arms,
/// delays zero and one, and activation probabilities 0.3, 0.5 and 1.
pub fn unbiasedness_battery() -> Result<Vec<(SimConfig, Vec<Vec<f64>>, Vec<f64>)>> {
    const QS: [f64; 3] = [0.3, 0.5, 1.0];
    let mut battery = Vec::with_capacity(20);
    for idx in 0..20 {
        let agents = 1 + idx % 3;
        let arms = 2 + (idx / 3) % 2;
        let network = if idx % 4 < 2 { clique(agents)? } else { path(agents)? };
        let feedback = if idx % 5 < 3 { path(arms)? } else { edgeless(arms)? };
        let q = (0..agents).map(|v| QS[(idx + v) % 3]).collect();
        let distributions = (0..agents)
            .map(|v| {
                let raw: Vec<f64> = (0..arms).map(|i| 1.0 + ((idx + 2 * v + 3 * i) % 5) as f64).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / total).collect()
            })
            .collect();
        let losses = (0..arms).map(|i| ((idx * 7 + i * 3) % 11) as f64 / 10.0).collect();
        let config = SimConfig {
            network,
            feedback,
            n: (idx / 6) % 2,
            f: (idx / 2) % 2,
            q,
            horizon: 1,
            eta_policy: Default::default(),
            seed: 0,
            repetitions: 1,
        };
        battery.push((config, distributions, losses));
    }
    Ok(battery)
}

fn path(nv: usize) -> Result<Graph> {
    let mut g = Graph::new(nv)?;
    for v in 1..nv {
        g.add_edge(v - 1, v)?;
    }
    Ok(g)
}

pub fn unbiasedness_suite() -> Result<CheckSummary> {
    let mut summary = CheckSummary::new("unbiasedness");
    for (config, p, losses) in unbiasedness_battery()? {
        let bias = unbiasedness_oracle(&config, &p, &losses)?;
        summary.record_gap(bias, bias < 1e-12);
    }
    Ok(summary)
}

/// Every randomized suite with `instances` draws each, plus the fixed
/// unbiasedness battery.
pub fn run_verification(seed: u64, instances: usize) -> Result<VerifyReport> {
    Ok(VerifyReport {
        checks: vec![
            network_ratio_suite(seed, instances)?,
            mass_ratio_suite(seed, instances)?,
            union_ratio_suite(seed, instances)?,
            product_ratio_suite(seed, instances)?,
            reduction_suite(seed, instances)?,
            unbiasedness_suite()?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle;

    fn one_agent(arms: usize, q: f64) -> SimConfig {
        SimConfig {
            network: edgeless(1).unwrap(),
            feedback: edgeless(arms).unwrap(),
            n: 0,
            f: 0,
            q: vec![q],
            horizon: 1,
            eta_policy: Default::default(),
            seed: 0,
            repetitions: 1,
        }
    }

    #[test]
    fn constant_value() {
        assert!((amgm_constant() - std::f64::consts::E / (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((2.0 * amgm_constant() - 3.1639).abs() < 1e-4);
    }

    #[test]
    fn network_ratio_single_agent_single_arm() {
        let inst = RatioInstance {
            network: edgeless(1).unwrap(),
            feedback: edgeless(1).unwrap(),
            n: 0,
            f: 0,
            q: vec![1.0],
            p: vec![vec![1.0]],
        };
        let out = network_ratio_check(&inst).unwrap();
        assert_eq!(out.lhs, 1.0);
        assert!((out.rhs - 2.0 * amgm_constant()).abs() < 1e-12);
        assert!(out.holds);
    }

    #[test]
    fn network_ratio_clique_feedback_closed_form() {
        let q = vec![0.3, 0.6, 0.9];
        let inst = RatioInstance {
            network: cycle(3).unwrap(),
            feedback: clique(4).unwrap(),
            n: 1,
            f: 1,
            q: q.clone(),
            p: vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.25; 4], vec![0.7, 0.1, 0.1, 0.1]],
        };
        let none: f64 = q.iter().map(|x| 1.0 - x).product();
        let expected: f64 = q.iter().map(|x| x / (1.0 - none)).sum();
        assert!((network_ratio_check(&inst).unwrap().lhs - expected).abs() < 1e-12);
    }

    #[test]
    fn network_ratio_rejects_bad_instances() {
        let mut inst = RatioInstance {
            network: edgeless(1).unwrap(),
            feedback: edgeless(2).unwrap(),
            n: 0,
            f: 0,
            q: vec![1.0],
            p: vec![vec![0.5, 0.4]],
        };
        assert!(network_ratio_check(&inst).is_err());
        inst.p = vec![vec![1.0, 0.0]];
        assert!(network_ratio_check(&inst).is_err());
        inst.p = vec![vec![0.5, 0.5]];
        inst.q = vec![0.0];
        assert!(network_ratio_check(&inst).is_err());
        // 9 × 9 = 81 > 64
        inst.network = cycle(9).unwrap();
        inst.feedback = cycle(9).unwrap();
        inst.n = 1;
        inst.f = 1;
        inst.q = vec![1.0; 9];
        inst.p = vec![vec![1.0 / 9.0; 9]; 9];
        assert!(matches!(
            network_ratio_check(&inst),
            Err(Error::AlphaUnavailable { .. })
        ));
    }

    #[test]
    fn mass_ratio_tight_cases() {
        let out = mass_ratio_check(&clique(5).unwrap(), 1, &[0.1, 0.5, 0.2, 0.3, 0.9]).unwrap();
        assert!((out.lhs - 1.0).abs() < 1e-12 && out.rhs == 1.0);
        let out = mass_ratio_check(&edgeless(6).unwrap(), 1, &[0.2; 6]).unwrap();
        assert!((out.lhs - 6.0).abs() < 1e-12 && out.rhs == 6.0);
        assert!(mass_ratio_check(&edgeless(2).unwrap(), 1, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn union_ratio_edge_cases() {
        let out = union_ratio_check(&edgeless(1).unwrap(), 1, &[1.0]).unwrap();
        assert_eq!(out.lhs, 1.0);
        assert!((out.rhs - 2.0 * amgm_constant()).abs() < 1e-12);
        let g = cycle(7).unwrap();
        let out = union_ratio_check(&g, 1, &[1.0; 7]).unwrap();
        assert_eq!(out.lhs, 7.0);
        assert!(out.rhs >= (3.0 + 7.0) * 1.58 && out.holds);
        assert!(union_ratio_check(&g, 1, &[1.5; 7]).is_err());
    }

    #[test]
    fn product_ratio_single_vertices_and_violations() {
        let one = edgeless(1).unwrap();
        let out = product_ratio_check(&one, &one, &[vec![1.0]]).unwrap();
        assert_eq!(out.lhs, 1.0);
        assert!((out.rhs - 3.1639).abs() < 1e-4);
        let g = clique(2).unwrap();
        match product_ratio_check(&g, &one, &[vec![0.7], vec![0.6]]) {
            Err(Error::Hypothesis { row, col, .. }) => assert_eq!((row, col), (0, 0)),
            other => panic!("{other:?}"),
        }
        assert!(product_ratio_check(&one, &g, &[vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn oracle_two_outcomes() {
        let bias = unbiasedness_oracle(&one_agent(2, 1.0), &[vec![0.5, 0.5]], &[0.3, 0.9]).unwrap();
        assert!(bias < 1e-12);
    }

    #[test]
    fn oracle_two_adjacent_agents() {
        let mut cfg = one_agent(2, 0.5);
        cfg.network = clique(2).unwrap();
        cfg.n = 1;
        cfg.q = vec![0.5, 0.5];
        let bias = unbiasedness_oracle(&cfg, &[vec![0.5, 0.5], vec![0.2, 0.8]], &[1.0, 0.4]).unwrap();
        assert!(bias < 1e-12);
    }

    #[test]
    fn oracle_size_guard() {
        let mut cfg = one_agent(3, 1.0);
        cfg.network = edgeless(7).unwrap();
        cfg.q = vec![1.0; 7];
        let p = vec![vec![1.0 / 3.0; 3]; 7];
        assert!(matches!(
            unbiasedness_oracle(&cfg, &p, &[0.0; 3]),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn bound_matches_hand_value() {
        let mut cfg = one_agent(2, 1.0);
        cfg.horizon = 100;
        let b = regret_bound(&cfg, 0.0589, 1);
        assert!((b - 30.40).abs() < 0.01, "{b}");
    }

    #[test]
    fn bound_is_convex_in_eta() {
        let mut cfg = one_agent(5, 1.0);
        cfg.horizon = 1000;
        let values: Vec<f64> = (1..200).map(|k| regret_bound(&cfg, k as f64 * 1e-3, 3)).collect();
        let argmin = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap();
        assert!(values[..argmin].windows(2).all(|w| w[0] > w[1]));
        assert!(values[argmin..].windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn battery_covers_requested_ranges() {
        let battery = unbiasedness_battery().unwrap();
        assert_eq!(battery.len(), 20);
        for a in 1..=3 {
            assert!(battery.iter().any(|(c, _, _)| c.agents() == a));
        }
        for k in 2..=3 {
            assert!(battery.iter().any(|(c, _, _)| c.arms() == k));
        }
        for d in 0..=1 {
            assert!(battery.iter().any(|(c, _, _)| c.n == d));
            assert!(battery.iter().any(|(c, _, _)| c.f == d));
        }
        for q in [0.3, 0.5, 1.0] {
            assert!(battery.iter().any(|(c, _, _)| c.q.contains(&q)));
        }
    }

    #[test]
    fn small_suites_pass() {
        let report = run_verification(11, 20).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.to_csv().lines().count(), 7);
    }
}
