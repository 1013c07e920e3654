//! Workloads shared by the benchmarks.

use netfeed_core::environment::{sample_activations, stochastic_bernoulli_losses, ActivationSchedule, LossTable};
use netfeed_core::experiment::ExperimentSpec;
use netfeed_core::rng::{substream, Purpose};
use netfeed_core::{EtaPolicy, Result, SimConfig};

/// One cell of the default grid, shortened to `horizon` rounds.
pub fn grid_cell(
    q: f64,
    p_net: f64,
    p_feed: f64,
    horizon: usize,
) -> Result<(SimConfig, LossTable, ActivationSchedule)> {
    let spec = ExperimentSpec {
        horizon,
        ..ExperimentSpec::default()
    };
    let mut config = spec.cell_config(q, p_net, p_feed)?;
    config.eta_policy = EtaPolicy::Doubling { reset: false };
    let mut rng = substream(spec.seed, Purpose::Losses, &[]);
    let losses = stochastic_bernoulli_losses(spec.arms, horizon, &mut rng)?;
    let activations = sample_activations(&config.q, horizon, &mut rng)?;
    Ok((config, losses, activations))
}
