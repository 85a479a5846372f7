//! Seeded Monte Carlo over the planner's Markov chain and over fusion
//! outcome distributions.
//!
//! Trial `i` draws from its own ChaCha8 stream `(seed, i)`, so a trial's
//! trajectory does not depend on how trials are scheduled. Tallies are
//! integers merged by addition, which makes parallel and serial runs agree
//! bit for bit.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fusion::OutcomeDistribution;

use super::{step, MoveKind, PlanConfig, PlanError, Step};

/// Moves allowed in one trajectory before giving up.
pub const STEP_LIMIT: u64 = 10_000_000;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn add(&mut self, x: u64) {
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn estimate(&self, n: u64) -> Estimate {
        let n_f = n as f64;
        let mean = self.sum as f64 / n_f;
        if n < 2 {
            return Estimate { mean, stderr: 0.0 };
        }
        // exact integer numerator of the sample variance
        let num = (n as u128) * self.sum_sq - self.sum * self.sum;
        let var = num as f64 / (n_f * (n_f - 1.0));
        Estimate {
            mean,
            stderr: (var / n_f).sqrt(),
        }
    }
}

/// Attempts and outcomes for one fused pair of sizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTally {
    pub attempts: u64,
    pub heralded: u64,
    pub successes: u64,
}

impl PairTally {
    fn merge(self, o: PairTally) -> PairTally {
        PairTally {
            attempts: self.attempts + o.attempts,
            heralded: self.heralded + o.heralded,
            successes: self.successes + o.successes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub left: usize,
    pub right: usize,
    #[serde(flatten)]
    pub tally: PairTally,
    /// Successes per heralded attempt.
    pub success_rate: Estimate,
    /// Heralded attempts per gate application.
    pub herald_rate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Empirical {
    pub trials: u64,
    pub seed: u64,
    pub primitives: Estimate,
    pub rounds: Estimate,
    pub gate_applications: Estimate,
    pub pairs: Vec<PairStats>,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    primitives: Moments,
    rounds: Moments,
    gates: Moments,
    pairs: BTreeMap<(usize, usize), PairTally>,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.primitives = self.primitives.merge(o.primitives);
        self.rounds = self.rounds.merge(o.rounds);
        self.gates = self.gates.merge(o.gates);
        for (k, v) in o.pairs {
            let e = self.pairs.entry(k).or_default();
            *e = e.merge(v);
        }
        self
    }
}

fn pick(rng: &mut ChaCha8Rng, denominator: u64, weights: impl Iterator<Item = u64>) -> usize {
    let mut r = rng.random_range(0..denominator);
    for (i, w) in weights.enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    unreachable!("weights sum to the denominator")
}

fn run_trial(cfg: &PlanConfig, rng: &mut ChaCha8Rng) -> Result<Tally, PlanError> {
    let mut inv: Vec<usize> = Vec::new();
    let (mut primitives, mut rounds, mut gates) = (0u64, 0u64, 0u64);
    let mut pairs: BTreeMap<(usize, usize), PairTally> = BTreeMap::new();
    for _ in 0..STEP_LIMIT {
        match step(cfg, &inv) {
            Step::Done => {
                let mut t = Tally {
                    pairs,
                    ..Tally::default()
                };
                t.primitives.add(primitives);
                t.rounds.add(rounds);
                t.gates.add(gates);
                return Ok(t);
            }
            Step::Blocked => {
                return Err(PlanError::Blocked {
                    policy: cfg.policy,
                    inventory: inv,
                })
            }
            Step::Move {
                pair,
                denominator,
                mut transitions,
            } => {
                let i = pick(rng, denominator, transitions.iter().map(|t| t.weight));
                let t = transitions.swap_remove(i);
                primitives += t.primitives;
                rounds += t.rounds;
                gates += t.gates;
                if let Some(p) = pair {
                    let e = pairs.entry(p).or_default();
                    e.attempts += 1;
                    e.heralded += t.rounds;
                    e.successes += (t.kind == MoveKind::Success) as u64;
                }
                inv = t.next;
            }
        }
    }
    Err(PlanError::StepLimit { limit: STEP_LIMIT })
}

fn rate(k: u64, n: u64) -> Estimate {
    if n == 0 {
        return Estimate { mean: f64::NAN, stderr: f64::NAN };
    }
    let p = k as f64 / n as f64;
    Estimate {
        mean: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

/// Simulates `trials` independent trajectories of the policy.
pub fn monte_carlo(cfg: &PlanConfig, trials: u64, seed: u64) -> Result<Empirical, PlanError> {
    cfg.validate()?;
    if trials == 0 {
        return Err(PlanError::NoTrials);
    }
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &mut trial_rng(seed, i)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let pairs = tally
        .pairs
        .iter()
        .map(|(&(left, right), &t)| PairStats {
            left,
            right,
            tally: t,
            success_rate: rate(t.successes, t.heralded),
            herald_rate: rate(t.heralded, t.attempts),
        })
        .collect();
    Ok(Empirical {
        trials,
        seed,
        primitives: tally.primitives.estimate(trials),
        rounds: tally.rounds.estimate(trials),
        gate_applications: tally.gates.estimate(trials),
        pairs,
    })
}

/// Draws `trials` outcomes from `dist` and counts hits per entry.
///
/// Sampling is exact: each draw is a uniform integer below the common
/// denominator of the entry probabilities.
pub fn sample_outcomes(dist: &OutcomeDistribution, trials: u64, seed: u64) -> Vec<u64> {
    let den = dist
        .entries
        .iter()
        .fold(num_bigint::BigInt::from(1), |acc, e| acc.lcm(e.prob.denom()));
    let weights: Vec<u64> = dist
        .entries
        .iter()
        .map(|e| {
            (e.prob.numer() * (&den / e.prob.denom()))
                .to_u64()
                .expect("probabilities are nonnegative and fit u64")
        })
        .collect();
    let den = den.to_u64().expect("common denominator fits u64");
    assert_eq!(weights.iter().sum::<u64>(), den, "distribution must sum to one");
    (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; weights.len()],
            |mut counts, i| {
                let mut rng = trial_rng(seed, i);
                counts[pick(&mut rng, den, weights.iter().copied())] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; weights.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::fuse2_analytic;
    use crate::planner::{expected_cost, Policy};
    use crate::pswap::GateAccounting;
    use crate::rational::to_f64;

    #[test]
    fn reproducible() {
        let cfg = PlanConfig::new(7, 3);
        let a = monte_carlo(&cfg, 2000, 11).unwrap();
        let b = monte_carlo(&cfg, 2000, 11).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&cfg, 2000, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_trial_replays() {
        let cfg = PlanConfig::new(9, 3);
        let a = monte_carlo(&cfg, 1, 5).unwrap();
        let b = monte_carlo(&cfg, 1, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.primitives.stderr, 0.0);
    }

    #[test]
    fn matches_expected_cost() {
        for (n, m, policy, acc) in [
            (5, 3, Policy::GreedyLargest, GateAccounting::Ideal),
            (7, 3, Policy::GreedyDiscardSingles, GateAccounting::Ideal),
            (5, 3, Policy::OneShot, GateAccounting::Physical),
            (4, 2, Policy::GreedyLargest, GateAccounting::Physical),
        ] {
            let cfg = PlanConfig::new(n, m).with_policy(policy).with_accounting(acc);
            let exact = expected_cost(&cfg).unwrap();
            let mc = monte_carlo(&cfg, 20_000, 3).unwrap();
            for (est, want) in [
                (mc.primitives, &exact.primitives),
                (mc.rounds, &exact.rounds),
                (mc.gate_applications, &exact.gate_applications),
            ] {
                let z = (est.mean - to_f64(want)).abs() / est.stderr.max(1e-12);
                assert!(z < 4.0, "{n} {m} {policy}: {} vs {}", est.mean, want);
            }
        }
    }

    #[test]
    fn outcome_sampling_is_exact_integer_sampling() {
        let d = fuse2_analytic(3, 3).unwrap();
        let counts = sample_outcomes(&d, 50_000, 1);
        assert_eq!(counts.iter().sum::<u64>(), 50_000);
        assert_eq!(counts, sample_outcomes(&d, 50_000, 1));
        let p = counts[1] as f64 / 50_000.0;
        let se = (5.0 / 9.0 * 4.0 / 9.0 / 50_000.0f64).sqrt();
        assert!((p - 5.0 / 9.0).abs() < 4.0 * se);
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(monte_carlo(&PlanConfig::new(5, 3), 0, 1), Err(PlanError::NoTrials));
    }
}
