//! Local doubling trick.
//!
//! Phase `r` runs with `η_r = sqrt(ln K / 2^r)`, starting from
//! `r_0 = ⌈log2 ln K⌉`. Each finalized round `t` contributes
//!
//! `X_{r,t} = I{t > t_r + d} (d + Σ_i p_t(i) / b_t(i))`
//!
//! where `t_r` is the first round of the phase. The phase ends at the last
//! round whose running sum of `X` stays within `2^r`; the round that would
//! push the sum past `2^r` opens phase `r + 1`.
//!
//! `X_{r,t}` is only known once round `t` is finalized, `d` rounds after it
//! was played, so the new rate takes effect from the next round played. The
//! indicator zeroes exactly those lagging rounds of the new phase.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DoublingController {
    log_arms: f64,
    reset: bool,
    phase: i32,
    accumulated: f64,
    phase_start: usize,
    starts: Vec<(i32, usize)>,
}

impl DoublingController {
    /// `reset` clears the cumulative estimates at every phase change;
    /// otherwise only the learning rate changes.
    pub fn new(arms: usize, reset: bool) -> Result<Self> {
        if arms < 2 {
            return Err(Error::InvalidParameter(format!(
                "doubling trick needs K ≥ 2, got {arms}"
            )));
        }
        let phase = Self::initial_phase(arms);
        Ok(DoublingController {
            log_arms: (arms as f64).ln(),
            reset,
            phase,
            accumulated: 0.0,
            phase_start: 1,
            starts: vec![(phase, 1)],
        })
    }

    /// `⌈log2 ln K⌉`.
    pub fn initial_phase(arms: usize) -> i32 {
        (arms as f64).ln().log2().ceil() as i32
    }

    pub fn phase(&self) -> i32 {
        self.phase
    }

    pub fn resets(&self) -> bool {
        self.reset
    }

    pub fn eta(&self) -> f64 {
        (self.log_arms / 2f64.powi(self.phase)).sqrt()
    }

    /// First round of the current phase.
    pub fn phase_start(&self) -> usize {
        self.phase_start
    }

    pub fn accumulated(&self) -> f64 {
        self.accumulated
    }

    /// `(phase, first round)` for every phase opened so far.
    pub fn phase_starts(&self) -> &[(i32, usize)] {
        &self.starts
    }

    /// `X_{r,t}` for the current phase.
    pub fn increment(&self, t: usize, delay: usize, b_values: &[f64], p_values: &[f64]) -> Result<f64> {
        if t <= self.phase_start + delay {
            return Ok(0.0);
        }
        let mut ratio = 0.0;
        for (&p, &b) in p_values.iter().zip(b_values) {
            if !(b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "observation probability {b} must be positive"
                )));
            }
            ratio += p / b;
        }
        Ok(delay as f64 + ratio)
    }

    /// Feeds finalized round `t`. Returns `true` when `t` opened a new phase;
    /// the caller then switches to [`eta`](Self::eta) and, in reset mode,
    /// drops its estimates before adding round `t`.
    pub fn step(&mut self, t: usize, delay: usize, b_values: &[f64], p_values: &[f64]) -> Result<bool> {
        if b_values.len() != p_values.len() {
            return Err(Error::Dimension(format!(
                "{} observation probabilities for {} arms",
                b_values.len(),
                p_values.len()
            )));
        }
        let x = self.increment(t, delay, b_values, p_values)?;
        if self.accumulated + x <= 2f64.powi(self.phase) {
            self.accumulated += x;
            return Ok(false);
        }
        self.phase += 1;
        self.phase_start = t;
        self.accumulated = 0.0;
        self.starts.push((self.phase, t));
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_rate_for_twenty_arms() {
        let c = DoublingController::new(20, false).unwrap();
        assert_eq!(c.phase(), 2);
        assert!((c.eta() - (20f64.ln() / 4.0).sqrt()).abs() < 1e-15);
        assert!((c.eta() - 0.8654).abs() < 1e-4);
        assert_eq!(DoublingController::initial_phase(2), 0);
        assert!(DoublingController::new(1, false).is_err());
    }

    #[test]
    fn lagging_rounds_contribute_nothing() {
        let c = DoublingController::new(4, false).unwrap();
        let b = [0.5; 4];
        let p = [0.25; 4];
        for t in 1..=3 {
            assert_eq!(c.increment(t, 2, &b, &p).unwrap(), 0.0);
        }
        assert_eq!(c.increment(4, 2, &b, &p).unwrap(), 2.0 + 2.0);
    }

    #[test]
    fn bandit_phases_last_ceil_two_pow_r_over_k() {
        // one agent, q = 1, no feedback edges, no delays: Σ p/b = K every round
        let k = 20;
        let mut c = DoublingController::new(k, false).unwrap();
        let p = [1.0 / k as f64; 20];
        for t in 1..=5000 {
            c.step(t, 0, &p, &p).unwrap();
        }
        let starts = c.phase_starts();
        assert!(starts.len() > 5);
        for w in starts.windows(2) {
            let ((r, s0), (_, s1)) = (w[0], w[1]);
            let expected = (2f64.powi(r) / k as f64).ceil() as usize;
            assert_eq!(s1 - s0, expected, "phase {r}");
        }
    }

    #[test]
    fn rate_halves_every_two_phases() {
        let mut c = DoublingController::new(8, true).unwrap();
        let eta0 = c.eta();
        let p = [0.125; 8];
        let mut t = 0;
        while c.phase_starts().len() < 3 {
            t += 1;
            c.step(t, 0, &p, &p).unwrap();
        }
        assert!((c.eta() - eta0 / 2.0).abs() < 1e-15);
        assert!(c.resets());
    }

    #[test]
    fn rejects_zero_probability() {
        let c = DoublingController::new(2, false).unwrap();
        assert!(c.increment(5, 0, &[0.0, 1.0], &[0.5, 0.5]).is_err());
    }
}
