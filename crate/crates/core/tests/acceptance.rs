//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! with a failure status if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use netfeed_core::environment::{lower_bound_instance, sample_activations, stochastic_bernoulli_losses};
use netfeed_core::experiment::{run_experiment, CellSummary, ExperimentSpec, Stats};
use netfeed_core::graph::{
    clique, cycle, edgeless, independence_number, is_independent_set, iterated_c5, iterated_c5_product_witness,
    DEFAULT_EXACT_LIMIT,
};
use netfeed_core::rng::{agent_stream, substream, Purpose};
use netfeed_core::simulator::{run_repetitions, run_simulation_with, SimOptions};
use netfeed_core::verify::{
    mass_ratio_suite, network_ratio_suite, product_ratio_suite, regret_bound, unbiasedness_battery,
    unbiasedness_oracle, union_ratio_suite, SUITE_SIZE,
};
use netfeed_core::{EtaPolicy, Graph, LearningRate, Result, SimConfig};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn exact(g: &Graph) -> Option<usize> {
    let a = independence_number(g, DEFAULT_EXACT_LIMIT);
    a.exact.then_some(a.lower)
}

fn graph_oracles() -> Result<Verdict> {
    let start = Instant::now();
    let mut failures = Vec::new();
    for m in 1..=12 {
        if exact(&clique(m)?) != Some(1) {
            failures.push(format!("alpha(K{m})"));
        }
        if exact(&edgeless(m)?) != Some(m) {
            failures.push(format!("alpha(E{m})"));
        }
    }
    let c5 = cycle(5)?;
    if exact(&c5) != Some(2) {
        failures.push("alpha(C5)".into());
    }
    if exact(&c5.strong_product(&c5)?) != Some(5) {
        failures.push("alpha(C5xC5)".into());
    }
    if c5.power(2) != clique(5)? {
        failures.push("C5^2".into());
    }
    let g2 = iterated_c5(2)?;
    if exact(&g2) != Some(4) {
        failures.push("alpha(G2)".into());
    }
    let witness = iterated_c5_product_witness(2)?;
    if witness.len() != 25 || !is_independent_set(&g2.strong_product(&g2)?, &witness)? {
        failures.push("G2xG2 witness".into());
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(10);
    Ok(verdict(
        pass,
        format!("mismatches {failures:?}, {elapsed:.2?} (limit 10s)"),
    ))
}

fn ratio_suites() -> Result<Verdict> {
    let start = Instant::now();
    let seed = 20_220_601;
    let suites = [
        network_ratio_suite(seed, SUITE_SIZE)?,
        mass_ratio_suite(seed, SUITE_SIZE)?,
        union_ratio_suite(seed, SUITE_SIZE)?,
        product_ratio_suite(seed, SUITE_SIZE)?,
    ];
    let elapsed = start.elapsed();
    let summary: Vec<String> = suites
        .iter()
        .map(|s| format!("{} {}/{} ok", s.check, s.instances - s.failures, s.instances))
        .collect();
    let pass = suites.iter().all(|s| s.passed() && s.instances == SUITE_SIZE) && elapsed < Duration::from_secs(60);
    Ok(verdict(
        pass,
        format!("{}, {elapsed:.2?} (limit 60s)", summary.join(", ")),
    ))
}

fn unbiasedness() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let battery = unbiasedness_battery()?;
    for (config, p, losses) in &battery {
        worst = worst.max(unbiasedness_oracle(config, p, losses)?);
    }
    Ok(verdict(
        worst < 1e-12,
        format!("{} instances, max bias {worst:e} (limit 1e-12)", battery.len()),
    ))
}

/// Plain Exp3 with importance weights `ℓ/p` on the played arm.
fn reference_exp3(losses: &[Vec<f64>], eta: f64, seed: u64) -> Vec<(Vec<f64>, f64, usize)> {
    let arms = losses[0].len();
    let mut rng = agent_stream(seed, 0);
    let mut cumulative = vec![0.0; arms];
    let mut out = Vec::new();
    for row in losses {
        let lead = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = cumulative.iter().map(|&l| (-eta * (l - lead)).exp()).collect();
        let mut total = 0.0;
        for x in &w {
            total += x;
        }
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut arm = arms - 1;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                arm = i;
                break;
            }
        }
        cumulative[arm] += row[arm] / p[arm];
        out.push((p, u, arm));
    }
    out
}

fn exp3_reduction() -> Result<Verdict> {
    let (arms, horizon, seed) = (5, 1000, 77);
    let eta = ((arms as f64).ln() / (horizon * arms) as f64).sqrt();
    let config = SimConfig {
        network: edgeless(1)?,
        feedback: edgeless(arms)?,
        n: 0,
        f: 0,
        q: vec![1.0],
        horizon,
        eta_policy: EtaPolicy::Fixed(eta),
        seed,
        repetitions: 1,
    };
    let mut rng = substream(seed, Purpose::Losses, &[]);
    let losses = stochastic_bernoulli_losses(arms, horizon, &mut rng)?;
    let activations = sample_activations(&[1.0], horizon, &mut rng)?;
    let opts = SimOptions {
        audit: false,
        record_plays: true,
    };
    let trace = run_simulation_with(&config, &losses, &activations, seed, opts)?;
    let rows: Vec<Vec<f64>> = (1..=horizon).map(|t| losses.row(t).to_vec()).collect();
    let reference = reference_exp3(&rows, eta, seed);
    let mismatch = trace.plays.iter().zip(&reference).position(|(play, (p, u, arm))| {
        play.distribution.iter().zip(p).any(|(a, b)| a.to_bits() != b.to_bits())
            || play.uniform.to_bits() != u.to_bits()
            || play.arm != Some(*arm)
    });
    let pass = mismatch.is_none() && trace.plays.len() == horizon;
    Ok(verdict(
        pass,
        match mismatch {
            None => format!("{horizon} rounds bit-identical"),
            Some(k) => format!("first divergence at round {}", k + 1),
        },
    ))
}

fn find<'a>(cells: &'a [CellSummary], q: f64, p_net: f64, p_feed: f64) -> &'a CellSummary {
    cells
        .iter()
        .find(|c| c.q == q && c.p_net == p_net && c.p_feed == p_feed)
        .expect("cell present")
}

/// `a ≤ b` up to one pooled standard error.
fn at_most(a: Stats, b: Stats) -> bool {
    a.mean <= b.mean + (a.sem().powi(2) + b.sem().powi(2)).sqrt()
}

fn grid_orderings(dir: &Path) -> Result<Verdict> {
    let start = Instant::now();
    let spec = ExperimentSpec {
        trace_stride: 100,
        out: dir.to_path_buf(),
        ..ExperimentSpec::default()
    };
    let cells = run_experiment(&spec)?;
    let mut failed = Vec::new();
    for c in &cells {
        if !at_most(c.coop.unwrap(), c.base.unwrap()) {
            failed.push(format!("(a) {}", c.dir_name()));
        }
    }
    for &q in &spec.q_grid {
        for &pf in &spec.pfeed_grid {
            let (dense, sparse) = (find(&cells, q, 0.8, pf), find(&cells, q, 0.2, pf));
            if !at_most(dense.coop.unwrap(), sparse.coop.unwrap()) {
                failed.push(format!("(b) q={q} p_feed={pf}"));
            }
        }
        for &pn in &spec.pnet_grid {
            let (dense, sparse) = (find(&cells, q, pn, 0.8), find(&cells, q, pn, 0.2));
            if !at_most(dense.coop.unwrap(), sparse.coop.unwrap()) {
                failed.push(format!("(c) coop q={q} p_net={pn}"));
            }
            if !at_most(dense.base.unwrap(), sparse.base.unwrap()) {
                failed.push(format!("(c) base q={q} p_net={pn}"));
            }
        }
    }
    for &pn in &spec.pnet_grid {
        for &pf in &spec.pfeed_grid {
            let (rare, always) = (find(&cells, 0.05, pn, pf), find(&cells, 1.0, pn, pf));
            if !at_most(always.coop.unwrap(), rare.coop.unwrap()) {
                failed.push(format!("(d) p_net={pn} p_feed={pf}"));
            }
        }
    }
    let table: Vec<String> = cells
        .iter()
        .map(|c| {
            format!(
                "{}: {:.1} vs {:.1}",
                c.dir_name(),
                c.coop.unwrap().mean,
                c.base.unwrap().mean
            )
        })
        .collect();
    println!("    coop vs baseline mean R_T/Q: {}", table.join("; "));
    Ok(verdict(
        failed.is_empty(),
        format!("{} cells, violated {failed:?}, {:.0?}", cells.len(), start.elapsed()),
    ))
}

fn small_configs() -> Result<Vec<SimConfig>> {
    let base = |network: Graph, feedback: Graph, n, f, q: Vec<f64>| SimConfig {
        network,
        feedback,
        n,
        f,
        q,
        horizon: 5000,
        eta_policy: EtaPolicy::Tuned,
        seed: 31,
        repetitions: 20,
    };
    Ok(vec![
        base(edgeless(1)?, edgeless(10)?, 0, 0, vec![1.0]),
        base(cycle(4)?, cycle(8)?, 1, 1, vec![0.5; 4]),
        base(clique(5)?, edgeless(10)?, 1, 0, vec![0.3; 5]),
        base(edgeless(6)?, cycle(10)?, 0, 1, vec![1.0; 6]),
        base(cycle(8)?, clique(8)?, 2, 1, vec![0.2; 8]),
        base(clique(3)?, cycle(5)?, 1, 2, vec![1.0, 0.5, 0.1]),
    ])
}

fn bound_consistency() -> Result<Verdict> {
    let mut worst_ratio: f64 = 0.0;
    let mut pass = true;
    for (k, config) in small_configs()?.iter().enumerate() {
        let mut rng = substream(config.seed, Purpose::Losses, &[k as u64]);
        let losses = stochastic_bernoulli_losses(config.arms(), config.horizon, &mut rng)?;
        let activations = sample_activations(&config.q, config.horizon, &mut rng)?;
        let LearningRate::Fixed(eta) = config.learning_rate()? else {
            unreachable!("tuned policy gives a fixed rate")
        };
        let traces = run_repetitions(config, &losses, &activations)?;
        let mean = traces.iter().map(|t| t.final_avg_regret()).sum::<f64>() / traces.len() as f64;
        let bound = regret_bound(config, eta, config.alpha_product()?);
        worst_ratio = worst_ratio.max(mean / bound);
        pass &= mean <= bound;
    }
    Ok(verdict(
        pass,
        format!("6 configs, largest mean/bound ratio {worst_ratio:.3}"),
    ))
}

fn lower_bound_scaling() -> Result<Verdict> {
    let (arms, horizon, mass) = (10, 5000, 2.0);
    let hard_network = cycle(9)?;
    let hard_q = lower_bound_instance(&hard_network, 1, mass)?;
    let support = hard_q.iter().filter(|&&q| q > 0.0).count();
    let mut rng = substream(5, Purpose::Losses, &[]);
    let losses = stochastic_bernoulli_losses(arms, horizon, &mut rng)?;
    let run = |network: Graph, q: Vec<f64>| -> Result<f64> {
        let config = SimConfig {
            network,
            feedback: edgeless(arms)?,
            n: 1,
            f: 0,
            q,
            horizon,
            eta_policy: EtaPolicy::Doubling { reset: false },
            seed: 5,
            repetitions: 20,
        };
        let mut rng = substream(5, Purpose::Activations, &[]);
        let activations = sample_activations(&config.q, horizon, &mut rng)?;
        let traces = run_repetitions(&config, &losses, &activations)?;
        Ok(traces.iter().map(|t| t.final_regret()).sum::<f64>() / traces.len() as f64)
    };
    let hard = run(hard_network, hard_q)?;
    let easy = run(clique(9)?, vec![mass / 9.0; 9])?;
    Ok(verdict(
        hard > easy,
        format!("Q={mass}, C9 support {support}: mean R_T {hard:.1} vs clique {easy:.1}"),
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn determinism(dir: &Path) -> Result<Verdict> {
    let spec = ExperimentSpec {
        agents: 6,
        arms: 5,
        horizon: 400,
        q_grid: vec![0.5, 1.0],
        pnet_grid: vec![0.5],
        pfeed_grid: vec![0.3],
        reps: 3,
        out: dir.to_path_buf(),
        ..ExperimentSpec::default()
    };
    run_experiment(&spec)?;
    let first = snapshot(dir);
    fs::remove_dir_all(dir).unwrap();
    run_experiment(&spec)?;
    let second = snapshot(dir);
    let bytes: usize = first.values().map(Vec::len).sum();
    Ok(verdict(
        first == second && !first.is_empty(),
        format!("{} files, {bytes} bytes compared", first.len()),
    ))
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let criteria: [(&str, Box<dyn Fn() -> Result<Verdict>>); 8] = [
        ("graph oracles", Box::new(graph_oracles)),
        ("ratio suites", Box::new(ratio_suites)),
        ("unbiasedness", Box::new(unbiasedness)),
        ("exp3 reduction", Box::new(exp3_reduction)),
        (
            "grid orderings",
            Box::new(|| grid_orderings(&scratch.path().join("grid"))),
        ),
        ("regret bound", Box::new(bound_consistency)),
        ("lower-bound scaling", Box::new(lower_bound_scaling)),
        ("determinism", Box::new(|| determinism(&scratch.path().join("det")))),
    ];
    let mut all = true;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        all &= v.pass;
        println!(
            "criterion {} {name}: {} ({})",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
