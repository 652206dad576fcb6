//! Ground truth: exact linear scans and seeded Monte-Carlo estimators.

use crate::error::{Error, Result};
use crate::families::universal::derive_seed;
use crate::families::{HashFamily, HashFn};
use crate::par::Execution;
use crate::schemes::{HashSource, SchemeKind, SchemeParams};

pub use crate::sketch::hoeffding_bound;

const COLLISION_STREAM: u64 = 21;
const SCHEME_STREAM: u64 = 22;

/// A Bernoulli frequency with its standard error `sqrt(f(1-f)/trials)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub frequency: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn new(trials: u64, successes: u64) -> Self {
        assert!(trials > 0 && successes <= trials, "{successes} successes in {trials} trials");
        let f = successes as f64 / trials as f64;
        Self {
            trials,
            successes,
            frequency: f,
            stderr: (f * (1.0 - f) / trials as f64).sqrt(),
        }
    }

    /// Standard error at a known mean rather than the observed one.
    pub fn stderr_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn failures(&self) -> McEstimate {
        McEstimate::new(self.trials, self.trials - self.successes)
    }
}

/// Every point within distance `r` of `q` as `(id, distance)`, sorted by
/// distance and then id.
pub fn linear_scan<F: HashFamily>(family: &F, points: &[(u64, F::Point)], q: &F::Point, r: f64) -> Vec<(u64, f64)> {
    let mut hits: Vec<(u64, f64)> = points
        .iter()
        .map(|(id, x)| (*id, family.distance(q, x)))
        .filter(|&(_, d)| d <= r)
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    hits
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    Ok(())
}

/// Frequency of `h(x) = h(y)` over `trials` seeded draws of `h`.
pub fn mc_collision_prob<F: HashFamily>(
    family: &F,
    x: &F::Point,
    y: &F::Point,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    check_trials(trials)?;
    family.check_point(x)?;
    family.check_point(y)?;
    let hits = exec.count_trials(trials, |t| {
        let h = family.sample(derive_seed(seed, COLLISION_STREAM, t));
        h.hash(x) == h.hash(y)
    });
    Ok(McEstimate::new(trials, hits))
}

/// Frequency over independent builds of "some key tuple matches", comparing
/// raw tuples so fingerprint collisions cannot help.
#[allow(clippy::too_many_arguments)]
pub fn mc_scheme_success<F: HashFamily>(
    kind: SchemeKind,
    family: &F,
    params: &SchemeParams,
    x: &F::Point,
    y: &F::Point,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    check_trials(trials)?;
    if params.kind() != kind {
        return Err(Error::invalid(format!("{kind} scheme given {} parameters", params.kind())));
    }
    family.check_point(x)?;
    family.check_point(y)?;
    // surface parameter errors once instead of per trial
    HashSource::build(family.clone(), *params, seed)?;
    let outcomes = exec.map_trials(trials, |t| {
        HashSource::build(family.clone(), *params, derive_seed(seed, SCHEME_STREAM, t))
            .and_then(|s| s.collides_raw(x, y))
    });
    let hits = outcomes.into_iter().try_fold(0u64, |acc, r| r.map(|c| acc + u64::from(c)))?;
    Ok(McEstimate::new(trials, hits))
}

/// Seed of the `t`-th build in [`mc_scheme_success`].
pub fn scheme_trial_seed(seed: u64, t: u64) -> u64 {
    derive_seed(seed, SCHEME_STREAM, t)
}
