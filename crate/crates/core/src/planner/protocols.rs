//! Closed-form probabilities of the fusion protocols being compared.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::fusion::{fuse_chain_analytic, OutcomeClass};
use crate::rational::{self, ratio, Rational};

use super::PlanError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "ozdemir-I")]
    OzdemirI,
    #[serde(rename = "fredkin")]
    Fredkin,
    #[serde(rename = "toffoli-cnot")]
    ToffoliCnot,
    #[serde(rename = "pswap-2")]
    Pswap2,
    #[serde(rename = "fredkin-3")]
    Fredkin3,
    #[serde(rename = "pswap-3")]
    Pswap3,
    #[serde(rename = "toffoli-3cnot")]
    Toffoli3Cnot,
    #[serde(rename = "pswap-chain")]
    PswapChain,
}

impl Protocol {
    pub const ALL: [Protocol; 8] = [
        Protocol::OzdemirI,
        Protocol::Fredkin,
        Protocol::ToffoliCnot,
        Protocol::Pswap2,
        Protocol::Fredkin3,
        Protocol::Pswap3,
        Protocol::Toffoli3Cnot,
        Protocol::PswapChain,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Protocol::OzdemirI => "ozdemir-I",
            Protocol::Fredkin => "fredkin",
            Protocol::ToffoliCnot => "toffoli-cnot",
            Protocol::Pswap2 => "pswap-2",
            Protocol::Fredkin3 => "fredkin-3",
            Protocol::Pswap3 => "pswap-3",
            Protocol::Toffoli3Cnot => "toffoli-3cnot",
            Protocol::PswapChain => "pswap-chain",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Protocol::OzdemirI => "with I",
            Protocol::Fredkin => "with 1 Fredkin",
            Protocol::ToffoliCnot => "with 1 Toffoli, 1 CNOT",
            Protocol::Pswap2 => "1 partial-swap",
            Protocol::Fredkin3 => "with 1 Fredkin",
            Protocol::Pswap3 => "2 partial-swaps",
            Protocol::Toffoli3Cnot => "with 1 Toffoli, 3 CNOTs",
            Protocol::PswapChain => "k-1 partial-swaps",
        }
    }

    /// Number of input registers; `None` for any `k ≥ 2`.
    pub fn arity(self) -> Option<usize> {
        match self {
            Protocol::OzdemirI | Protocol::Fredkin | Protocol::ToffoliCnot | Protocol::Pswap2 => Some(2),
            Protocol::Fredkin3 | Protocol::Pswap3 => Some(3),
            Protocol::Toffoli3Cnot => Some(4),
            Protocol::PswapChain => None,
        }
    }

    /// Whether an extra H-polarized ancilla photon is consumed.
    pub fn needs_ancilla(self) -> bool {
        matches!(self, Protocol::Fredkin | Protocol::ToffoliCnot | Protocol::Fredkin3)
    }

    /// Two-qubit-gate count, with Toffoli and Fredkin at five each.
    pub fn gate_cost(self, k: usize) -> usize {
        match self {
            Protocol::OzdemirI => 0,
            Protocol::Fredkin | Protocol::Fredkin3 => 5,
            Protocol::ToffoliCnot => 6,
            Protocol::Toffoli3Cnot => 8,
            Protocol::Pswap2 => 1,
            Protocol::Pswap3 => 2,
            Protocol::PswapChain => k.saturating_sub(1),
        }
    }

    pub fn is_pswap(self) -> bool {
        matches!(self, Protocol::Pswap2 | Protocol::Pswap3 | Protocol::PswapChain)
    }

    /// Size of the W state produced on success (may be ≤ 0 for tiny inputs).
    pub fn achieved_size(self, sizes: &[usize]) -> i64 {
        let sum: i64 = sizes.iter().map(|&n| n as i64).sum();
        let k = sizes.len() as i64;
        match self {
            Protocol::OzdemirI => sum - 2,
            Protocol::Fredkin3 => sum - 3,
            Protocol::Toffoli3Cnot => sum - 4,
            _ => sum - (k - 1),
        }
    }

    /// Protocols compared for `k` registers.
    pub fn for_arity(k: usize) -> Vec<Protocol> {
        match k {
            2 => vec![Protocol::OzdemirI, Protocol::Fredkin, Protocol::ToffoliCnot, Protocol::Pswap2],
            3 => vec![Protocol::Fredkin3, Protocol::Pswap3],
            4 => vec![Protocol::Toffoli3Cnot, Protocol::PswapChain],
            _ => vec![Protocol::PswapChain],
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown protocol {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum ConsistencyIssue {
    Negative { field: String, value: String },
    AboveOne { field: String, value: String },
    /// The listed probabilities do not add up to one.
    SumNotOne { sum: String },
}

impl fmt::Display for ConsistencyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyIssue::Negative { field, value } => write!(f, "{field} = {value} is negative"),
            ConsistencyIssue::AboveOne { field, value } => write!(f, "{field} = {value} exceeds 1"),
            ConsistencyIssue::SumNotOne { sum } => write!(f, "listed probabilities sum to {sum}, not 1"),
        }
    }
}

/// Protocol probabilities as tabulated, with any internal inconsistency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProbs {
    pub protocol: Protocol,
    pub sizes: Vec<usize>,
    pub achieved: i64,
    #[serde(with = "rational::frac")]
    pub success: Rational,
    #[serde(with = "rational::frac_opt")]
    pub recycle: Option<Rational>,
    /// Partial-recycle plus partial-success mass (partial-swap chains of
    /// three or more registers).
    #[serde(with = "rational::frac_opt")]
    pub partial: Option<Rational>,
    #[serde(with = "rational::frac")]
    pub fail: Rational,
    /// `1 − success − Π(n−1)/Πn`, offered next to the printed fail formula
    /// of the Toffoli + 3 CNOT row.
    #[serde(with = "rational::frac_opt")]
    pub fail_corrected: Option<Rational>,
    pub issues: Vec<ConsistencyIssue>,
}

impl ReferenceProbs {
    pub fn is_consistent(&self) -> bool {
        self.issues.is_empty()
    }

    fn check(&mut self) {
        let mut issues = Vec::new();
        let mut fields: Vec<(&str, &Rational)> = vec![("success", &self.success), ("fail", &self.fail)];
        if let Some(r) = &self.recycle {
            fields.push(("recycle", r));
        }
        if let Some(p) = &self.partial {
            fields.push(("partial", p));
        }
        for (name, v) in &fields {
            if **v < Rational::zero() {
                issues.push(ConsistencyIssue::Negative {
                    field: name.to_string(),
                    value: v.to_string(),
                });
            } else if **v > Rational::one() {
                issues.push(ConsistencyIssue::AboveOne {
                    field: name.to_string(),
                    value: v.to_string(),
                });
            }
        }
        let sum: Rational = fields.iter().map(|(_, v)| (*v).clone()).sum();
        if !sum.is_one() {
            issues.push(ConsistencyIssue::SumNotOne { sum: sum.to_string() });
        }
        self.issues = issues;
    }
}

fn q(num: i64, den: usize) -> Rational {
    ratio(num, den as i64)
}

/// Literal evaluation of a protocol's tabulated formulas.
pub fn reference_probs(protocol: Protocol, sizes: &[usize]) -> Result<ReferenceProbs, PlanError> {
    if let Some(k) = protocol.arity() {
        if sizes.len() != k {
            return Err(PlanError::Arity {
                protocol,
                expected: k,
                got: sizes.len(),
            });
        }
    } else if sizes.len() < 2 {
        return Err(PlanError::Arity {
            protocol,
            expected: 2,
            got: sizes.len(),
        });
    }
    if sizes.contains(&0) {
        return Err(PlanError::ZeroSize);
    }
    let s: Vec<i64> = sizes.iter().map(|&n| n as i64).collect();
    let den: usize = sizes.iter().product();
    let mut out = ReferenceProbs {
        protocol,
        sizes: sizes.to_vec(),
        achieved: protocol.achieved_size(sizes),
        success: Rational::zero(),
        recycle: None,
        partial: None,
        fail: Rational::zero(),
        fail_corrected: None,
        issues: vec![],
    };
    match protocol {
        Protocol::OzdemirI => {
            let (m, n) = (s[0], s[1]);
            out.success = q(m + n - 2, den);
            out.recycle = Some(q((m - 1) * (n - 1), den));
            out.fail = q(1, den);
        }
        Protocol::Fredkin | Protocol::ToffoliCnot | Protocol::Pswap2 => {
            let (m, n) = (s[0], s[1]);
            out.success = q(m + n - 1, den);
            out.recycle = Some(q((m - 1) * (n - 1), den));
        }
        Protocol::Fredkin3 => {
            let (m, n, t) = (s[0], s[1], s[2]);
            out.success = q(m + n + t - 3, den);
            out.fail = q((t - 1) * (m + n - 2) + 1, den);
        }
        Protocol::Pswap3 | Protocol::PswapChain => {
            let k = s.len() as i64;
            out.success = q(s.iter().sum::<i64>() - (k - 1), den);
            let all_h: i64 = s.iter().map(|n| n - 1).product();
            out.recycle = Some(q(all_h, den));
            if k >= 3 {
                let d = fuse_chain_analytic(sizes).map_err(|_| PlanError::ZeroSize)?;
                out.partial =
                    Some(d.mass(OutcomeClass::PartialRecycle) + d.mass(OutcomeClass::PartialSuccess));
            }
        }
        Protocol::Toffoli3Cnot => {
            let (m, n, t, z) = (s[0], s[1], s[2], s[3]);
            out.success = q(m + n + t + z - 4, den);
            out.fail = q((5 - m - n - z - t) - (n - 1) * (m - 1) * (t - 1) * (z - 1), den);
            let all_h = q((m - 1) * (n - 1) * (t - 1) * (z - 1), den);
            out.fail_corrected = Some(Rational::one() - &out.success - all_h);
        }
    }
    out.check();
    Ok(out)
}

/// One row of the protocol comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub protocol: Protocol,
    pub description: String,
    pub ancilla: bool,
    pub gate_cost: usize,
    pub applicable: bool,
    pub probs: ReferenceProbs,
}

/// Every protocol defined for `sizes.len()` registers.
pub fn compare_protocols(sizes: &[usize]) -> Result<Vec<ComparisonRow>, PlanError> {
    if sizes.len() < 2 {
        return Err(PlanError::Arity {
            protocol: Protocol::PswapChain,
            expected: 2,
            got: sizes.len(),
        });
    }
    Protocol::for_arity(sizes.len())
        .into_iter()
        .map(|p| {
            let probs = reference_probs(p, sizes)?;
            Ok(ComparisonRow {
                protocol: p,
                description: p.description().to_string(),
                ancilla: p.needs_ancilla(),
                gate_cost: p.gate_cost(sizes.len()),
                applicable: probs.achieved >= 1,
                probs,
            })
        })
        .collect()
}
