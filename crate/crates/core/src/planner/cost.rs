//! Exact expected resource cost of a policy.
//!
//! Recycled residuals can return the inventory to a state seen before, so
//! the expectations satisfy a linear system `(I − Q)·x = c` over the
//! reachable transient states rather than a plain recursion. It is solved
//! exactly with sparse Gauss–Jordan elimination over rationals.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::pswap::GateAccounting;
use crate::rational::{self, Rational};

use super::montecarlo::{monte_carlo, Empirical};
use super::protocols::{reference_probs, Protocol, ReferenceProbs};
use super::{step, PlanConfig, PlanError, Policy, Step};

/// Upper limit on enumerated inventory states.
pub const STATE_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCost {
    #[serde(with = "rational::frac")]
    pub primitives: Rational,
    /// Heralded fusion attempts.
    #[serde(with = "rational::frac")]
    pub rounds: Rational,
    /// All gate applications, heralded or not.
    #[serde(with = "rational::frac")]
    pub gate_applications: Rational,
    /// Reachable inventory states, including the finished ones.
    pub states: usize,
}

struct Graph {
    states: Vec<Vec<usize>>,
    steps: Vec<Step>,
    index: HashMap<Vec<usize>, usize>,
}

fn explore(cfg: &PlanConfig) -> Result<Graph, PlanError> {
    let mut g = Graph {
        states: vec![],
        steps: vec![],
        index: HashMap::new(),
    };
    let mut queue = VecDeque::new();
    g.index.insert(vec![], 0);
    g.states.push(vec![]);
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        let s = step(cfg, &g.states[i]);
        match &s {
            Step::Blocked => {
                return Err(PlanError::Blocked {
                    policy: cfg.policy,
                    inventory: g.states[i].clone(),
                })
            }
            Step::Done => {}
            Step::Move { transitions, .. } => {
                for t in transitions {
                    if !g.index.contains_key(&t.next) {
                        if g.states.len() >= STATE_LIMIT {
                            return Err(PlanError::StateLimit { limit: STATE_LIMIT });
                        }
                        g.index.insert(t.next.clone(), g.states.len());
                        g.states.push(t.next.clone());
                        queue.push_back(g.states.len() - 1);
                    }
                }
            }
        }
        debug_assert_eq!(g.steps.len(), i);
        g.steps.push(s);
    }
    Ok(g)
}

/// Fails with the first state (in discovery order) that cannot finish.
fn check_absorbing(cfg: &PlanConfig, g: &Graph) -> Result<(), PlanError> {
    let n = g.states.len();
    let mut preds: Vec<Vec<usize>> = vec![vec![]; n];
    let mut finishes = vec![false; n];
    let mut queue = VecDeque::new();
    for (i, s) in g.steps.iter().enumerate() {
        match s {
            Step::Done => {
                finishes[i] = true;
                queue.push_back(i);
            }
            Step::Move { transitions, .. } => {
                for t in transitions {
                    preds[g.index[&t.next]].push(i);
                }
            }
            Step::Blocked => {}
        }
    }
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if !finishes[i] {
                finishes[i] = true;
                queue.push_back(i);
            }
        }
    }
    match finishes.iter().position(|f| !f) {
        Some(i) => Err(PlanError::Unreachable {
            policy: cfg.policy,
            inventory: g.states[i].clone(),
        }),
        None => Ok(()),
    }
}

type Row = BTreeMap<usize, Rational>;

/// Solves `A x = B` (three right-hand sides) for a nonsingular M-matrix `A`
/// given as sparse rows.
fn solve(mut rows: Vec<Row>, mut rhs: Vec<[Rational; 3]>) -> Vec<[Rational; 3]> {
    let n = rows.len();
    let mut col_rows: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            col_rows[c].insert(r);
        }
    }
    for i in 0..n {
        let pivot = rows[i].get(&i).cloned().expect("diagonal stays positive");
        let inv = pivot.recip();
        for v in rows[i].values_mut() {
            *v *= &inv;
        }
        for v in rhs[i].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[i].clone();
        let pivot_rhs = rhs[i].clone();
        let targets: Vec<usize> = col_rows[i].iter().copied().filter(|&r| r != i).collect();
        for r in targets {
            let Some(factor) = rows[r].remove(&i) else {
                continue;
            };
            col_rows[i].remove(&r);
            for (&c, v) in &pivot_row {
                if c == i {
                    continue;
                }
                let delta = &factor * v;
                let entry = rows[r].entry(c).or_insert_with(Rational::zero);
                *entry -= delta;
                if entry.is_zero() {
                    rows[r].remove(&c);
                    col_rows[c].remove(&r);
                } else {
                    col_rows[c].insert(r);
                }
            }
            for k in 0..3 {
                let delta = &factor * &pivot_rhs[k];
                rhs[r][k] -= delta;
            }
        }
    }
    rhs
}

/// Expected primitives, rounds and gate applications from an empty
/// inventory until the target is held.
pub fn expected_cost(cfg: &PlanConfig) -> Result<ExpectedCost, PlanError> {
    cfg.validate()?;
    let g = explore(cfg)?;
    check_absorbing(cfg, &g)?;

    // transient states get equation indices
    let transient: Vec<usize> = (0..g.states.len())
        .filter(|&i| !matches!(g.steps[i], Step::Done))
        .collect();
    let eq_of: HashMap<usize, usize> = transient.iter().enumerate().map(|(e, &s)| (s, e)).collect();
    if transient.is_empty() {
        return Ok(ExpectedCost {
            primitives: Rational::zero(),
            rounds: Rational::zero(),
            gate_applications: Rational::zero(),
            states: g.states.len(),
        });
    }

    let mut rows = Vec::with_capacity(transient.len());
    let mut rhs = Vec::with_capacity(transient.len());
    for &s in &transient {
        let Step::Move {
            denominator,
            transitions,
            ..
        } = &g.steps[s]
        else {
            unreachable!("transient states move");
        };
        let mut row = Row::new();
        row.insert(eq_of[&s], Rational::one());
        let mut b = [Rational::zero(), Rational::zero(), Rational::zero()];
        for t in transitions {
            let p = rational::ratio(t.weight as i64, *denominator as i64);
            b[0] += &p * rational::int(t.primitives as i64);
            b[1] += &p * rational::int(t.rounds as i64);
            b[2] += &p * rational::int(t.gates as i64);
            let next = g.index[&t.next];
            if let Some(&e) = eq_of.get(&next) {
                let entry = row.entry(e).or_insert_with(Rational::zero);
                *entry -= &p;
                if entry.is_zero() {
                    row.remove(&e);
                }
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    let x = solve(rows, rhs);
    let [primitives, rounds, gate_applications] = x[eq_of[&0]].clone();
    Ok(ExpectedCost {
        primitives,
        rounds,
        gate_applications,
        states: g.states.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSizes {
    pub target: usize,
    pub primitive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub protocol: Protocol,
    pub sizes: PlanSizes,
    pub policy: Policy,
    pub accounting: GateAccounting,
    /// Tabulated probabilities of fusing two primitives.
    pub probs: ReferenceProbs,
    pub cost: ExpectedCost,
    pub empirical: Option<Empirical>,
    pub notes: Vec<String>,
}

/// Analytic report, plus a Monte Carlo section when `trials` is given.
pub fn plan(cfg: &PlanConfig, trials: Option<(u64, u64)>) -> Result<CostReport, PlanError> {
    let cost = expected_cost(cfg)?;
    let empirical = match trials {
        Some((t, seed)) => Some(monte_carlo(cfg, t, seed)?),
        None => None,
    };
    let mut notes = vec![
        "rounds count heralded fusion attempts; gate applications count every attempt".to_string(),
    ];
    if cfg.accounting == GateAccounting::Physical {
        notes.push(
            "each partial-swap heralds with probability 1/4; an unheralded attempt loses both extracted photons, leaving W(n-1) and W(m-1)"
                .to_string(),
        );
    }
    Ok(CostReport {
        protocol: Protocol::Pswap2,
        sizes: PlanSizes {
            target: cfg.target,
            primitive: cfg.primitive,
        },
        policy: cfg.policy,
        accounting: cfg.accounting,
        probs: reference_probs(Protocol::Pswap2, &[cfg.primitive, cfg.primitive])?,
        cost,
        empirical,
        notes,
    })
}
