//! W states and their fusion with chained partial-swap gates.
//!
//! Register `i` (0-based) owns local modes `"{ns}:1" … "{ns}:{n-1}"` and
//! sends the photon in extraction mode `"{i+1}"` into the gate chain. Gates
//! act on extraction modes (1,2), (2,3), …; every extraction mode except the
//! last is then measured in the H/V basis.

use std::fmt;
use std::sync::OnceLock;

use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::fock::{Mode, ModeLabel, Occupation, PhotonicState, Pol};
use crate::pswap::{
    apply_two_qubit_map, build_pswap_circuit, n_pswap, postselected_map, GateAccounting, PswapError,
    TwoQubitMap,
};
use crate::rational::{self, Rational};
use crate::scalar::Scalar;

/// Default photon budget for dense simulation.
pub const DENSE_BOUND: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("register sizes must be at least 1")]
    ZeroSize,
    #[error("expected {expected} register sizes, got {got}")]
    Arity { expected: String, got: usize },
    #[error(
        "{photons} photons exceed the dense bound of {bound}; the analytic success probability is {}",
        rational::describe(analytic_success)
    )]
    ResourceBound {
        photons: usize,
        bound: usize,
        analytic_success: Rational,
    },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("probability {0} is not rational")]
    Irrational(String),
    #[error(transparent)]
    Gate(#[from] PswapError),
}

fn check_sizes(sizes: &[usize], min_len: usize) -> Result<(), FusionError> {
    if sizes.len() < min_len {
        return Err(FusionError::Arity {
            expected: format!("at least {min_len}"),
            got: sizes.len(),
        });
    }
    if sizes.contains(&0) {
        return Err(FusionError::ZeroSize);
    }
    Ok(())
}

/// Equal superposition of single-V kets over `modes`; the empty list gives
/// the vacuum.
pub fn w_state_on<S: Scalar>(modes: &[Mode]) -> PhotonicState<S> {
    if modes.is_empty() {
        return PhotonicState::vacuum();
    }
    let amp = S::sqrt_ratio(1, modes.len() as u64);
    let terms = (0..modes.len()).map(|v| {
        let labels = modes.iter().enumerate().map(|(i, m)| {
            ModeLabel::new(m.clone(), if i == v { Pol::V } else { Pol::H })
        });
        (Occupation::from_labels(labels), amp.clone())
    });
    PhotonicState::from_terms(terms).expect("one photon per mode")
}

/// Product of H photons, one per mode.
pub fn all_h_on<S: Scalar>(modes: &[Mode]) -> PhotonicState<S> {
    PhotonicState::basis(modes.iter().map(|m| ModeLabel::h(m.clone())))
}

/// `|W_n⟩` on modes `"1" … "n"`.
pub fn build_w(n: usize) -> Result<PhotonicState, FusionError> {
    build_w_bounded(n, DENSE_BOUND)
}

pub fn build_w_bounded(n: usize, bound: usize) -> Result<PhotonicState, FusionError> {
    if n == 0 {
        return Err(FusionError::ZeroSize);
    }
    if n > bound {
        return Err(FusionError::ResourceBound {
            photons: n,
            bound,
            analytic_success: Rational::one(),
        });
    }
    let modes: Vec<Mode> = (1..=n).map(Mode::from).collect();
    Ok(w_state_on(&modes))
}

/// Amplitudes of the V and H branches of the extraction photon of `|W_n⟩`:
/// `(1/√n, √((n−1)/n))`.
pub fn w_branch(n: usize) -> (Amplitude, Amplitude) {
    assert!(n >= 1, "W register size must be at least 1");
    let n = n as u64;
    (Amplitude::sqrt_ratio(1, n), Amplitude::sqrt_ratio(n - 1, n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WRegister {
    pub size: usize,
    pub owner: String,
    pub namespace: String,
    pub extraction: Mode,
}

impl WRegister {
    /// The `index`-th party of a fusion: owner "A", namespace "a", extraction
    /// mode `index + 1`.
    pub fn party(index: usize, size: usize) -> Self {
        let (owner, namespace) = if index < 26 {
            let c = (b'a' + index as u8) as char;
            (c.to_ascii_uppercase().to_string(), c.to_string())
        } else {
            (format!("R{index}"), format!("r{index}"))
        };
        WRegister {
            size,
            owner,
            namespace,
            extraction: Mode::from(index + 1),
        }
    }

    pub fn local_modes(&self) -> Vec<Mode> {
        (1..self.size)
            .map(|i| Mode::namespaced(&self.namespace, i))
            .collect()
    }

    pub fn state<S: Scalar>(&self) -> PhotonicState<S> {
        let mut modes = self.local_modes();
        modes.push(self.extraction.clone());
        w_state_on(&modes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutcomeClass {
    Success,
    Recycle,
    PartialRecycle,
    PartialSuccess,
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeClass::Success => "Success",
            OutcomeClass::Recycle => "Recycle",
            OutcomeClass::PartialRecycle => "PartialRecycle",
            OutcomeClass::PartialSuccess => "PartialSuccess",
        })
    }
}

/// What is left after one fusion attempt.
///
/// `fused` is the size of the W state shared by the first `fused_parties`
/// registers (for a single party this is just its own shrunken register).
/// `others[j]` is the W size left with register `fused_parties + j`, where
/// 0 means the register was consumed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residual {
    pub fused: usize,
    pub fused_parties: usize,
    pub others: Vec<usize>,
}

impl Residual {
    /// Every usable W size in the residual, fused register first.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.fused)
            .chain(self.others.iter().copied())
            .filter(|&s| s > 0)
            .collect()
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fused == 0 {
            f.write_str("consumed")?;
        } else {
            write!(f, "W{}", self.fused)?;
        }
        if self.fused_parties > 1 {
            write!(f, "[{} parties]", self.fused_parties)?;
        }
        for s in &self.others {
            if *s == 0 {
                f.write_str(" + consumed")?;
            } else {
                write!(f, " + W{s}")?;
            }
        }
        Ok(())
    }
}

/// Measured polarizations of extraction modes `1 … k−1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(pub Vec<Pol>);

impl Pattern {
    /// All `2^len` patterns, lexicographic with H before V.
    pub fn all(len: usize) -> Vec<Pattern> {
        (0..1usize << len)
            .map(|bits| {
                Pattern(
                    (0..len)
                        .map(|i| if bits >> (len - 1 - i) & 1 == 0 { Pol::H } else { Pol::V })
                        .collect(),
                )
            })
            .collect()
    }

    pub fn parse(s: &str) -> Option<Pattern> {
        s.chars()
            .map(|c| match c {
                'H' => Some(Pol::H),
                'V' => Some(Pol::V),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Pattern)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Pattern::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid pattern {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub pattern: Pattern,
    pub class: OutcomeClass,
    #[serde(with = "rational::frac")]
    pub prob: Rational,
    pub residual: Residual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub sizes: Vec<usize>,
    pub entries: Vec<OutcomeEntry>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> Rational {
        self.entries.iter().map(|e| e.prob.clone()).sum()
    }

    pub fn mass(&self, class: OutcomeClass) -> Rational {
        self.entries
            .iter()
            .filter(|e| e.class == class)
            .map(|e| e.prob.clone())
            .sum()
    }

    pub fn success(&self) -> Rational {
        self.mass(OutcomeClass::Success)
    }

    pub fn entry(&self, pattern: &str) -> Option<&OutcomeEntry> {
        let p = Pattern::parse(pattern)?;
        self.entries.iter().find(|e| e.pattern == p)
    }

    /// The success entry (all measured photons V).
    pub fn success_entry(&self) -> &OutcomeEntry {
        self.entries
            .iter()
            .find(|e| e.class == OutcomeClass::Success)
            .expect("every distribution has a success pattern")
    }
}

impl fmt::Display for OutcomeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        writeln!(f, "sizes {}", sizes.join(","))?;
        for e in &self.entries {
            writeln!(
                f,
                "  {:<width$}  {:<14}  {:<22}  {}",
                e.pattern.to_string(),
                e.class.to_string(),
                rational::describe(&e.prob),
                e.residual,
                width = self.sizes.len().saturating_sub(1).max(7),
            )?;
        }
        write!(f, "  total {}", self.total())
    }
}

pub fn classify_pattern(pattern: &Pattern) -> OutcomeClass {
    let ys = &pattern.0;
    match ys.iter().position(|&p| p == Pol::H) {
        None => OutcomeClass::Success,
        Some(_) if ys.iter().all(|&p| p == Pol::H) => OutcomeClass::Recycle,
        Some(0) => OutcomeClass::PartialRecycle,
        Some(_) => OutcomeClass::PartialSuccess,
    }
}

fn frac(num: usize, den: usize) -> Rational {
    rational::ratio(num as i64, den as i64)
}

fn product(sizes: &[usize]) -> usize {
    sizes.iter().product()
}

/// Two registers, one gate: success `(n+m−1)/(nm)`, recycle
/// `(n−1)(m−1)/(nm)`.
pub fn fuse2_analytic(n: usize, m: usize) -> Result<OutcomeDistribution, FusionError> {
    check_sizes(&[n, m], 2)?;
    let nm = n * m;
    Ok(OutcomeDistribution {
        sizes: vec![n, m],
        entries: vec![
            OutcomeEntry {
                pattern: Pattern(vec![Pol::H]),
                class: OutcomeClass::Recycle,
                prob: frac((n - 1) * (m - 1), nm),
                residual: Residual {
                    fused: n - 1,
                    fused_parties: 1,
                    others: vec![m - 1],
                },
            },
            OutcomeEntry {
                pattern: Pattern(vec![Pol::V]),
                class: OutcomeClass::Success,
                prob: frac(n + m - 1, nm),
                residual: Residual {
                    fused: n + m - 1,
                    fused_parties: 2,
                    others: vec![],
                },
            },
        ],
    })
}

/// Three registers, two gates: the four outcome classes with their closed
/// forms.
pub fn fuse3_analytic(n: usize, m: usize, t: usize) -> Result<OutcomeDistribution, FusionError> {
    check_sizes(&[n, m, t], 3)?;
    let nmt = n * m * t;
    let entry = |p: [Pol; 2], class, num, fused, fused_parties, others: Vec<usize>| OutcomeEntry {
        pattern: Pattern(p.to_vec()),
        class,
        prob: frac(num, nmt),
        residual: Residual {
            fused,
            fused_parties,
            others,
        },
    };
    use Pol::{H, V};
    Ok(OutcomeDistribution {
        sizes: vec![n, m, t],
        entries: vec![
            entry([H, H], OutcomeClass::Recycle, (n - 1) * (m - 1) * (t - 1), n - 1, 1, vec![m - 1, t - 1]),
            entry([H, V], OutcomeClass::PartialRecycle, (n - 1) * (m - 1), n - 1, 1, vec![m - 1, 0]),
            entry([V, H], OutcomeClass::PartialSuccess, (t - 1) * (n + m - 2), n + m - 2, 2, vec![t - 1]),
            entry([V, V], OutcomeClass::Success, n + m + t - 2, n + m + t - 2, 3, vec![]),
        ],
    })
}

/// Residual and probability numerator (over `Π sizes`) of one chain pattern.
///
/// With `p` the first H among the measured photons, registers `1..=p` end
/// up sharing a W state on their local modes, register `p+1` keeps its
/// local W, and each later register keeps its local W only if the photon
/// measured just before it was H.
pub fn chain_outcome(sizes: &[usize], pattern: &Pattern) -> (Residual, usize) {
    let k = sizes.len();
    debug_assert_eq!(pattern.0.len(), k - 1);
    let Some(p) = pattern.0.iter().position(|&y| y == Pol::H) else {
        let fused = sizes.iter().sum::<usize>() - (k - 1);
        return (
            Residual {
                fused,
                fused_parties: k,
                others: vec![],
            },
            fused,
        );
    };
    // p is 0-based: registers 0..=p fuse.
    let fused: usize = sizes[..=p].iter().map(|n| n - 1).sum();
    let mut numerator = fused;
    let mut others = Vec::with_capacity(k - p - 1);
    for i in p + 1..k {
        let keeps = i == p + 1 || pattern.0[i - 1] == Pol::H;
        if keeps {
            others.push(sizes[i] - 1);
            numerator *= sizes[i] - 1;
        } else {
            others.push(0);
        }
    }
    (
        Residual {
            fused,
            fused_parties: p + 1,
            others,
        },
        numerator,
    )
}

/// Closed-form distribution of a `k`-register chain.
pub fn fuse_chain_analytic(sizes: &[usize]) -> Result<OutcomeDistribution, FusionError> {
    check_sizes(sizes, 2)?;
    let den = product(sizes);
    let entries = Pattern::all(sizes.len() - 1)
        .into_iter()
        .map(|pattern| {
            let (residual, num) = chain_outcome(sizes, &pattern);
            OutcomeEntry {
                class: classify_pattern(&pattern),
                prob: frac(num, den),
                pattern,
                residual,
            }
        })
        .collect();
    Ok(OutcomeDistribution {
        sizes: sizes.to_vec(),
        entries,
    })
}

/// `|⟨s|r⟩|² / (‖s‖² ‖r‖²)`.
pub fn fidelity<S: Scalar>(state: &PhotonicState<S>, reference: &PhotonicState<S>) -> Result<S, FusionError> {
    let inner = state.inner(reference).map_err(|_| FusionError::ZeroNorm)?;
    let denom = (state.norm_sq() * reference.norm_sq())
        .inv()
        .ok_or(FusionError::ZeroNorm)?;
    Ok(inner.abs_sq() * denom)
}

fn to_rational(a: &Amplitude) -> Result<Rational, FusionError> {
    a.as_rational().ok_or_else(|| FusionError::Irrational(a.to_string()))
}

/// Ideal state predicted for `residual` after measuring `pattern`.
pub fn predicted_residual_state(registers: &[WRegister], pattern: &Pattern) -> PhotonicState {
    let k = registers.len();
    let last = &registers[k - 1].extraction;
    let (residual, _) = chain_outcome(&registers.iter().map(|r| r.size).collect::<Vec<_>>(), pattern);
    if classify_pattern(pattern) == OutcomeClass::Success {
        let mut modes: Vec<Mode> = registers.iter().flat_map(WRegister::local_modes).collect();
        modes.push(last.clone());
        return w_state_on(&modes);
    }
    let p = residual.fused_parties;
    let fused_modes: Vec<Mode> = registers[..p].iter().flat_map(WRegister::local_modes).collect();
    let mut state = w_state_on::<Amplitude>(&fused_modes);
    for (reg, &size) in registers[p..].iter().zip(&residual.others) {
        let local = reg.local_modes();
        let part = if size > 0 { w_state_on(&local) } else { all_h_on(&local) };
        state = state.tensor(&part).expect("registers are disjoint");
    }
    state
        .tensor(&PhotonicState::basis([ModeLabel::h(last.clone())]))
        .expect("extraction mode is fresh")
}

/// Dense simulation result.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseFusion {
    pub distribution: OutcomeDistribution,
    /// Fidelity of each entry's post-measurement state with the predicted
    /// residual; `None` for zero-probability patterns.
    pub fidelities: Vec<Option<Rational>>,
    /// Probability that every gate heralded (1 under ideal accounting).
    pub herald_probability: Rational,
    pub accounting: GateAccounting,
}

impl DenseFusion {
    pub fn success_fidelity(&self) -> Option<&Rational> {
        let idx = self
            .distribution
            .entries
            .iter()
            .position(|e| e.class == OutcomeClass::Success)?;
        self.fidelities[idx].as_ref()
    }

    pub fn all_fidelities_one(&self) -> bool {
        self.fidelities.iter().flatten().all(One::is_one)
    }
}

fn heralded_maps() -> &'static Vec<TwoQubitMap> {
    static MAPS: OnceLock<Vec<TwoQubitMap>> = OnceLock::new();
    MAPS.get_or_init(|| {
        let circuit = build_pswap_circuit();
        circuit
            .heralding
            .iter()
            .map(|p| postselected_map(&circuit, p).expect("reference circuit heralds two qubits"))
            .collect()
    })
}

/// Simulates the gate chain on the full Fock state.
///
/// Under physical accounting each gate is the heralded optical map, summed
/// incoherently over the coincidence pattern that fired.
pub fn fuse_dense(
    sizes: &[usize],
    accounting: GateAccounting,
    bound: usize,
) -> Result<DenseFusion, FusionError> {
    check_sizes(sizes, 2)?;
    let photons: usize = sizes.iter().sum();
    let analytic = fuse_chain_analytic(sizes)?;
    if photons > bound {
        return Err(FusionError::ResourceBound {
            photons,
            bound,
            analytic_success: analytic.success(),
        });
    }
    let k = sizes.len();
    let registers: Vec<WRegister> = sizes.iter().enumerate().map(|(i, &n)| WRegister::party(i, n)).collect();
    let mut input = PhotonicState::<Amplitude>::vacuum();
    for r in &registers {
        input = input.tensor(&r.state()).expect("registers are disjoint");
    }

    let gate_choices: Vec<&TwoQubitMap> = match accounting {
        GateAccounting::Ideal => vec![],
        GateAccounting::Physical => heralded_maps().iter().collect(),
    };
    let ideal = n_pswap::<Amplitude>();
    let branch_count = match accounting {
        GateAccounting::Ideal => 1,
        GateAccounting::Physical => gate_choices.len().pow((k - 1) as u32),
    };

    // Every branch: the state after all gates fired with a given herald choice.
    let mut branches = Vec::with_capacity(branch_count);
    for b in 0..branch_count {
        let mut state = input.clone();
        let mut code = b;
        for g in 0..k - 1 {
            let map = match accounting {
                GateAccounting::Ideal => &ideal,
                GateAccounting::Physical => {
                    let m = gate_choices[code % gate_choices.len()];
                    code /= gate_choices.len();
                    m
                }
            };
            state = apply_two_qubit_map(&state, map, &registers[g].extraction, &registers[g + 1].extraction)?;
        }
        branches.push(state);
    }
    let input_norm = input.norm_sq();
    let heralded: Amplitude = branches.iter().map(|s| s.norm_sq()).sum();
    let herald_probability = to_rational(&(heralded.clone() * input_norm.inv().ok_or(FusionError::ZeroNorm)?))?;
    let heralded_inv = heralded.inv().ok_or(FusionError::ZeroNorm)?;

    let mut entries = Vec::new();
    let mut fidelities = Vec::new();
    for entry in &analytic.entries {
        let mut weights = Vec::with_capacity(branch_count);
        let mut fids = Vec::with_capacity(branch_count);
        let predicted = predicted_residual_state(&registers, &entry.pattern);
        for state in &branches {
            let mut residual = state.clone();
            for (g, &pol) in entry.pattern.0.iter().enumerate() {
                residual = residual.measure(&registers[g].extraction, pol).0;
            }
            let w = residual.norm_sq();
            if !w.is_zero() {
                fids.push((w.clone(), fidelity(&residual, &predicted)?));
            }
            weights.push(w);
        }
        let mass: Amplitude = weights.into_iter().sum();
        let prob = to_rational(&(mass.clone() * heralded_inv.clone()))?;
        let fid = if mass.is_zero() {
            None
        } else {
            let mass_inv = mass.inv().ok_or(FusionError::ZeroNorm)?;
            let mixed: Amplitude = fids.into_iter().map(|(w, f)| w * f).sum();
            Some(to_rational(&(mixed * mass_inv))?)
        };
        entries.push(OutcomeEntry {
            pattern: entry.pattern.clone(),
            class: classify_pattern(&entry.pattern),
            prob,
            residual: entry.residual.clone(),
        });
        fidelities.push(fid);
    }

    Ok(DenseFusion {
        distribution: OutcomeDistribution {
            sizes: sizes.to_vec(),
            entries,
        },
        fidelities,
        herald_probability,
        accounting,
    })
}

pub fn fuse2_dense(n: usize, m: usize) -> Result<DenseFusion, FusionError> {
    fuse_dense(&[n, m], GateAccounting::Ideal, DENSE_BOUND)
}

pub fn fuse3_dense(n: usize, m: usize, t: usize) -> Result<DenseFusion, FusionError> {
    fuse_dense(&[n, m, t], GateAccounting::Ideal, DENSE_BOUND)
}

/// Chain fusion with the dense path when within `bound`; on overflow the
/// error still carries the analytic success probability.
pub fn fuse_chain(sizes: &[usize], bound: usize) -> Result<DenseFusion, FusionError> {
    fuse_dense(sizes, GateAccounting::Ideal, bound)
}

/// Fused size of `count` equal registers of size `m`.
pub fn chain_fused_size(m: usize, count: usize) -> usize {
    count * m - count + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn small_w_states() {
        let w1 = build_w(1).unwrap();
        assert_eq!(w1, PhotonicState::basis([ModeLabel::v("1")]));
        let w2 = build_w(2).unwrap();
        assert_eq!(w2.len(), 2);
        assert!(w2.terms().all(|(_, a)| *a == Amplitude::sqrt_ratio(1, 2)));
        let w3 = build_w(3).unwrap();
        assert_eq!(w3.inner(&w3).unwrap(), Amplitude::one());
        let hhh = PhotonicState::basis([ModeLabel::h("1"), ModeLabel::h("2"), ModeLabel::h("3")]);
        assert_eq!(w3.inner(&hhh).unwrap(), Amplitude::zero());
        assert_eq!(build_w(0), Err(FusionError::ZeroSize));
        assert!(matches!(build_w(15), Err(FusionError::ResourceBound { .. })));
    }

    #[test]
    fn branch_amplitudes() {
        assert_eq!(w_branch(1), (Amplitude::one(), Amplitude::zero()));
        let (v, h) = w_branch(5);
        assert_eq!(v, Amplitude::sqrt_ratio(1, 5));
        assert_eq!(h, Amplitude::sqrt_ratio(4, 5));
        assert_eq!(v.clone() * v + h.clone() * h, Amplitude::one());
    }

    #[test]
    fn two_register_numbers() {
        let d = fuse2_analytic(3, 3).unwrap();
        assert_eq!(d.success(), ratio(5, 9));
        assert_eq!(d.mass(OutcomeClass::Recycle), ratio(4, 9));
        assert_eq!(d.entry("H").unwrap().residual.sizes(), vec![2, 2]);
        assert_eq!(d.success_entry().residual.fused, 5);
        assert_eq!(fuse2_analytic(1, 4).unwrap().success(), ratio(1, 1));
        let d = fuse2_analytic(2, 2).unwrap();
        assert_eq!(d.success(), ratio(3, 4));
        assert_eq!(d.entry("H").unwrap().residual.sizes(), vec![1, 1]);
    }

    #[test]
    fn three_register_numbers() {
        let d = fuse3_analytic(2, 2, 2).unwrap();
        assert_eq!(d.entry("VV").unwrap().prob, ratio(1, 2));
        assert_eq!(d.entry("HH").unwrap().prob, ratio(1, 8));
        assert_eq!(d.entry("HV").unwrap().prob, ratio(1, 8));
        assert_eq!(d.entry("VH").unwrap().prob, ratio(1, 4));
        assert_eq!(fuse3_analytic(1, 1, 1).unwrap().success(), ratio(1, 1));
    }

    #[test]
    fn chain_matches_closed_forms() {
        for n in 1..=6 {
            for m in 1..=6 {
                assert_eq!(fuse_chain_analytic(&[n, m]).unwrap(), fuse2_analytic(n, m).unwrap());
                for t in 1..=5 {
                    assert_eq!(
                        fuse_chain_analytic(&[n, m, t]).unwrap(),
                        fuse3_analytic(n, m, t).unwrap()
                    );
                }
            }
        }
        assert_eq!(fuse_chain_analytic(&[3, 3, 3]).unwrap().success(), ratio(7, 27));
        assert_eq!(fuse_chain_analytic(&[2, 2, 2, 2]).unwrap().success(), ratio(5, 16));
    }

    #[test]
    fn classification() {
        let c = |s: &str| classify_pattern(&Pattern::parse(s).unwrap());
        assert_eq!(c("VVV"), OutcomeClass::Success);
        assert_eq!(c("HHH"), OutcomeClass::Recycle);
        assert_eq!(c("HVH"), OutcomeClass::PartialRecycle);
        assert_eq!(c("VHV"), OutcomeClass::PartialSuccess);
    }

    #[test]
    fn dense_two_register() {
        let d = fuse2_dense(3, 3).unwrap();
        assert_eq!(d.distribution, fuse2_analytic(3, 3).unwrap());
        assert_eq!(d.success_fidelity(), Some(&ratio(1, 1)));
        assert!(d.all_fidelities_one());
        let d = fuse2_dense(2, 2).unwrap();
        assert_eq!(d.distribution.entry("H").unwrap().prob, ratio(1, 4));
        assert_eq!(fuse2_dense(1, 2).unwrap().distribution.success(), ratio(1, 1));
    }

    #[test]
    fn dense_recycle_state_is_product() {
        let regs = [WRegister::party(0, 2), WRegister::party(1, 2)];
        let s = predicted_residual_state(&regs, &Pattern::parse("H").unwrap());
        assert_eq!(
            s,
            PhotonicState::basis([ModeLabel::v("a:1"), ModeLabel::v("b:1"), ModeLabel::h("2")])
        );
    }

    #[test]
    fn dense_physical_heralds_quarter_per_gate() {
        let d = fuse_dense(&[2, 3], GateAccounting::Physical, DENSE_BOUND).unwrap();
        assert_eq!(d.herald_probability, ratio(1, 4));
        assert_eq!(d.distribution, fuse2_analytic(2, 3).unwrap());
        assert!(d.all_fidelities_one());
        let d = fuse_dense(&[2, 2, 2], GateAccounting::Physical, DENSE_BOUND).unwrap();
        assert_eq!(d.herald_probability, ratio(1, 16));
        assert!(d.all_fidelities_one());
    }

    #[test]
    fn dense_bound_reports_analytic_success() {
        let err = fuse_chain(&[5, 5, 5], 14).unwrap_err();
        assert_eq!(
            err,
            FusionError::ResourceBound {
                photons: 15,
                bound: 14,
                analytic_success: ratio(13, 125)
            }
        );
    }

    #[test]
    fn four_register_chain_dense() {
        let d = fuse_chain(&[2, 2, 2, 2], DENSE_BOUND).unwrap();
        assert_eq!(d.distribution, fuse_chain_analytic(&[2, 2, 2, 2]).unwrap());
        assert!(d.all_fidelities_one());
        let d = fuse_chain(&[2, 3, 1, 2], DENSE_BOUND).unwrap();
        assert_eq!(d.distribution, fuse_chain_analytic(&[2, 3, 1, 2]).unwrap());
        assert!(d.all_fidelities_one());
    }

    #[test]
    fn w_permutation_symmetry() {
        for n in 1..=6 {
            let w = build_w(n).unwrap();
            let rotated = w.relabel(|m| {
                let i: usize = m.as_str().parse().unwrap();
                Mode::from(i % n + 1)
            });
            assert_eq!(rotated, w);
        }
    }

    #[test]
    fn json_shape() {
        let d = fuse2_analytic(3, 3).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["entries"][1]["pattern"], "V");
        assert_eq!(v["entries"][1]["class"], "Success");
        assert_eq!(v["entries"][1]["prob"]["num"], 5);
        let back: OutcomeDistribution = serde_json::from_value(v).unwrap();
        assert_eq!(back, d);
    }

    proptest! {
        #[test]
        fn chain_conserves_probability(sizes in prop::collection::vec(1usize..=8, 2..=5)) {
            let d = fuse_chain_analytic(&sizes).unwrap();
            prop_assert_eq!(d.total(), ratio(1, 1));
            let expected = sizes.iter().sum::<usize>() - (sizes.len() - 1);
            prop_assert_eq!(d.success_entry().residual.fused, expected);
        }

        #[test]
        fn fuse2_success_decreases_in_n(m in 2usize..=12, n in 1usize..=12) {
            let a = fuse2_analytic(n, m).unwrap().success();
            let b = fuse2_analytic(n + 1, m).unwrap().success();
            prop_assert!(b < a);
        }
    }
}
