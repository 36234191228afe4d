use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Trials per independently seeded stream. Fixed so results do not depend on thread count.
const BLOCK: usize = 4096;

/// Monte Carlo estimate of the left-bath occupation of the biased walk.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkEstimate {
    /// `r1[t]`: fraction of walkers in the left bath at time `t`, for `t = 0..=t_max`.
    pub r1: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

/// Simulate `trials` walkers starting on the leftmost of `m` bulk sites.
/// Each step: left with `tau`, stay with `delta`, right with `sigma`.
pub fn simulate_walk(
    m: usize,
    delta: f64,
    tau: f64,
    sigma: f64,
    t_max: usize,
    trials: usize,
    seed: u64,
) -> Result<WalkEstimate> {
    if m == 0 || trials == 0 {
        return Err(Error::Domain("need m >= 1 and trials >= 1".into()));
    }
    if [delta, tau, sigma].iter().any(|x| !(0.0..=1.0).contains(x))
        || (delta + tau + sigma - 1.0).abs() > 1e-12
    {
        return Err(Error::Domain("walk rates must be probabilities summing to 1".into()));
    }
    let blocks = trials.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let here = BLOCK.min(trials - b * BLOCK);
            // absorbed_left[t]: walkers entering the left bath at step t
            let mut absorbed_left = vec![0u64; t_max + 1];
            for _ in 0..here {
                let mut pos = 1usize;
                for t in 1..=t_max {
                    let u: f64 = rng.gen();
                    if u < tau {
                        pos -= 1;
                    } else if u >= tau + delta {
                        pos += 1;
                    }
                    if pos == 0 {
                        absorbed_left[t] += 1;
                        break;
                    }
                    if pos == m + 1 {
                        break;
                    }
                }
            }
            absorbed_left
        })
        .reduce(
            || vec![0u64; t_max + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut r1 = Vec::with_capacity(t_max + 1);
    let mut cum = 0u64;
    for c in counts {
        cum += c;
        r1.push(cum as f64 / trials as f64);
    }
    Ok(WalkEstimate { r1, trials, seed })
}
