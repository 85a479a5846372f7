//! Repeat-until-success planning for growing a target W state out of
//! primitive registers, plus the protocol comparison tables.
//!
//! The planner only ever fuses two registers at a time with one partial-swap
//! gate. An inventory is the multiset of W sizes currently held; a policy
//! turns each inventory into a deterministic move (draw a fresh primitive,
//! drop singles, or fuse a pair), and the fusion outcome is random.

pub mod cost;
pub mod montecarlo;
pub mod protocols;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pswap::GateAccounting;

pub use cost::{expected_cost, plan, CostReport, ExpectedCost, PlanSizes};
pub use montecarlo::{monte_carlo, sample_outcomes, Empirical, Estimate, PairStats};
pub use protocols::{compare_protocols, reference_probs, ComparisonRow, ConsistencyIssue, Protocol, ReferenceProbs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("{protocol} takes {expected} register sizes, got {got}")]
    Arity {
        protocol: protocols::Protocol,
        expected: usize,
        got: usize,
    },
    #[error("register sizes must be at least 1")]
    ZeroSize,
    #[error("target W{target} is smaller than the primitive W{primitive}")]
    TargetBelowPrimitive { target: usize, primitive: usize },
    #[error("policy {policy} is blocked at inventory {}: no fusion fits under the target", show(inventory))]
    Blocked { policy: Policy, inventory: Vec<usize> },
    #[error("target is unreachable from inventory {} under policy {policy}", show(inventory))]
    Unreachable { policy: Policy, inventory: Vec<usize> },
    #[error("more than {limit} inventory states; choose a smaller target")]
    StateLimit { limit: usize },
    #[error("a trajectory exceeded {limit} moves")]
    StepLimit { limit: u64 },
    #[error("trials must be at least 1")]
    NoTrials,
}

fn show(inv: &[usize]) -> String {
    if inv.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = inv.iter().map(|n| format!("W{n}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Inventory policies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Fuse the largest register that has a partner not overshooting the
    /// target, with the largest such partner; keep every residual.
    #[default]
    GreedyLargest,
    /// As greedy-largest, but single-photon registers are thrown away.
    GreedyDiscardSingles,
    /// No recycling: any failed fusion discards both inputs.
    OneShot,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::GreedyLargest, Policy::GreedyDiscardSingles, Policy::OneShot];

    pub fn id(self) -> &'static str {
        match self {
            Policy::GreedyLargest => "greedy-largest",
            Policy::GreedyDiscardSingles => "greedy-discard-singles",
            Policy::OneShot => "one-shot",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanConfig {
    pub target: usize,
    pub primitive: usize,
    pub policy: Policy,
    pub accounting: GateAccounting,
}

impl PlanConfig {
    pub fn new(target: usize, primitive: usize) -> Self {
        PlanConfig {
            target,
            primitive,
            policy: Policy::default(),
            accounting: GateAccounting::default(),
        }
    }

    pub fn with_policy(mut self, policy: Policy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_accounting(mut self, accounting: GateAccounting) -> Self {
        self.accounting = accounting;
        self
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.target == 0 || self.primitive == 0 {
            return Err(PlanError::ZeroSize);
        }
        if self.target < self.primitive {
            return Err(PlanError::TargetBelowPrimitive {
                target: self.target,
                primitive: self.primitive,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Draw,
    Discard,
    Success,
    Recycle,
    HeraldFailure,
}

/// One possible result of a move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// Probability numerator over the step's denominator.
    pub weight: u64,
    pub next: Vec<usize>,
    pub kind: MoveKind,
    pub primitives: u64,
    pub gates: u64,
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Done,
    Blocked,
    Move {
        /// The pair being fused, larger first.
        pair: Option<(usize, usize)>,
        denominator: u64,
        transitions: Vec<Transition>,
    },
}

/// Sorted, largest first.
pub fn canonical(mut inv: Vec<usize>) -> Vec<usize> {
    inv.retain(|&n| n > 0);
    inv.sort_unstable_by(|a, b| b.cmp(a));
    inv
}

fn with(rest: &[usize], extra: &[usize]) -> Vec<usize> {
    canonical(rest.iter().chain(extra).copied().collect())
}

fn deterministic(next: Vec<usize>, kind: MoveKind, primitives: u64) -> Step {
    Step::Move {
        pair: None,
        denominator: 1,
        transitions: vec![Transition {
            weight: 1,
            next,
            kind,
            primitives,
            gates: 0,
            rounds: 0,
        }],
    }
}

/// The policy's move from a canonical inventory.
pub fn step(cfg: &PlanConfig, inv: &[usize]) -> Step {
    let (target, m) = (cfg.target, cfg.primitive);
    if inv.contains(&target) {
        return Step::Done;
    }
    if cfg.policy == Policy::GreedyDiscardSingles && inv.contains(&1) {
        let kept: Vec<usize> = inv.iter().copied().filter(|&n| n != 1).collect();
        return deterministic(kept, MoveKind::Discard, 0);
    }
    // largest register with a partner that fits; registers too large for
    // anything on hand stay parked until a small enough partner appears
    let pair = (0..inv.len()).find_map(|i| {
        (i + 1..inv.len())
            .find(|&j| inv[i] + inv[j] - 1 <= target)
            .map(|j| (i, j))
    });
    let Some((i, j)) = pair else {
        // several parked registers: keep one copy of the largest
        let parked = |n: usize| n + m - 1 > target;
        if inv.iter().filter(|&&n| parked(n)).count() > 1 {
            let mut kept = vec![inv[0]];
            kept.extend(inv.iter().copied().filter(|&n| !parked(n)));
            return deterministic(kept, MoveKind::Discard, 0);
        }
        let usable = inv.is_empty() || 2 * m - 1 <= target || inv.iter().any(|&n| n + m - 1 <= target);
        return if usable {
            deterministic(with(inv, &[m]), MoveKind::Draw, 1)
        } else {
            Step::Blocked
        };
    };
    let (l, p) = (inv[i], inv[j]);
    let rest: Vec<usize> = inv
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i && k != j)
        .map(|(_, &n)| n)
        .collect();
    let lp = (l * p) as u64;
    let success = (l + p - 1) as u64;
    let recycle = ((l - 1) * (p - 1)) as u64;
    let keep_residuals = cfg.policy != Policy::OneShot;
    let shrunk = if keep_residuals {
        with(&rest, &[l - 1, p - 1])
    } else {
        canonical(rest.clone())
    };
    let fused = with(&rest, &[l + p - 1]);
    let fire = |weight, next, kind| Transition {
        weight,
        next,
        kind,
        primitives: 0,
        gates: 1,
        rounds: 1,
    };
    let mut transitions = vec![
        fire(success, fused, MoveKind::Success),
        fire(recycle, shrunk.clone(), MoveKind::Recycle),
    ];
    let denominator = match cfg.accounting {
        GateAccounting::Ideal => lp,
        GateAccounting::Physical => {
            // heralds with probability 1/4; otherwise both extracted photons are lost
            transitions.push(Transition {
                weight: 3 * lp,
                next: shrunk,
                kind: MoveKind::HeraldFailure,
                primitives: 0,
                gates: 1,
                rounds: 0,
            });
            4 * lp
        }
    };
    transitions.retain(|t| t.weight > 0);
    Step::Move {
        pair: Some((l, p)),
        denominator,
        transitions,
    }
}
