//! The polarization partial-swap gate, as an abstract two-qubit map and as a
//! post-selected linear-optical network.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::fock::{Mode, ModeLabel, Occupation, PhotonicState, Pol};
use crate::optics::{herald_pattern, Angle, Circuit, CircuitError, Element};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PswapError {
    #[error("mode {0} does not hold exactly one photon in every term")]
    NotSingleOccupied(Mode),
    #[error("heralding pattern {0:?} is not declared by the circuit")]
    UnknownPattern(Vec<Mode>),
    #[error("pattern {0:?} does not read out two qubits")]
    NotTwoQubit(Vec<Mode>),
    #[error("circuit needs at least two input modes")]
    TooFewInputs,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Basis labels in matrix order.
pub const BASIS: [&str; 4] = ["HH", "HV", "VH", "VV"];

fn basis_pols(idx: usize) -> (Pol, Pol) {
    let p = |bit| if bit == 0 { Pol::H } else { Pol::V };
    (p(idx >> 1), p(idx & 1))
}

fn basis_index(p1: Pol, p2: Pol) -> usize {
    (p1.index() << 1) | p2.index()
}

/// 4×4 map on `(|HH⟩, |HV⟩, |VH⟩, |VV⟩)`, `m[row][col]` = ⟨row|M|col⟩.
#[derive(Clone, PartialEq)]
pub struct TwoQubitMap<S: Scalar = Amplitude> {
    m: [[S; 4]; 4],
}

impl<S: Scalar> TwoQubitMap<S> {
    pub fn from_rows(rows: [[S; 4]; 4]) -> Self {
        Self { m: rows }
    }

    pub fn zero() -> Self {
        Self::from_rows(std::array::from_fn(|_| std::array::from_fn(|_| S::zero())))
    }

    pub fn identity() -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            out.m[i][i] = S::one();
        }
        out
    }

    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.m[row][col]
    }

    pub fn rows(&self) -> &[[S; 4]; 4] {
        &self.m
    }

    pub fn apply(&self, v: &[S; 4]) -> [S; 4] {
        std::array::from_fn(|r| {
            (0..4).fold(S::zero(), |acc, c| acc + self.m[r][c].clone() * v[c].clone())
        })
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_rows(std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                (0..4).fold(S::zero(), |acc, k| {
                    acc + self.m[r][k].clone() * other.m[k][c].clone()
                })
            })
        }))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_rows(std::array::from_fn(|r| std::array::from_fn(|c| self.m[c][r].conj())))
    }

    pub fn scale(&self, k: &S) -> Self {
        Self::from_rows(std::array::from_fn(|r| {
            std::array::from_fn(|c| self.m[r][c].clone() * k.clone())
        }))
    }

    fn close(a: &S, b: &S) -> bool {
        if S::EXACT {
            a == b
        } else {
            a.approx_eq(b, 1e-9)
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        (0..4).all(|r| (0..4).all(|c| Self::close(&self.m[r][c], &other.m[r][c])))
    }

    /// The scalar `k ≠ 0` with `self = k · other`, if one exists.
    pub fn proportional_to(&self, other: &Self) -> Option<S> {
        let (r, c) = (0..16)
            .map(|i| (i / 4, i % 4))
            .find(|&(r, c)| !other.m[r][c].is_zero())?;
        let k = self.m[r][c].clone() * other.m[r][c].inv()?;
        if k.is_zero() {
            return None;
        }
        self.approx_eq(&other.scale(&k)).then_some(k)
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&Self::identity())
    }

    pub fn map_entries<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TwoQubitMap<T> {
        TwoQubitMap::from_rows(std::array::from_fn(|r| std::array::from_fn(|c| f(&self.m[r][c]))))
    }
}

impl<S: Scalar> fmt::Display for TwoQubitMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .m
            .iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect())
            .collect();
        let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
        for (i, row) in cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} [", BASIS[i])?;
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{cell:>width$}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for TwoQubitMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Swaps the two qubits when the first is H; identity when it is V.
pub fn n_pswap<S: Scalar>() -> TwoQubitMap<S> {
    let (o, z) = (S::one, S::zero);
    TwoQubitMap::from_rows([
        [o(), z(), z(), z()],
        [z(), z(), z(), z()],
        [z(), o(), o(), z()],
        [z(), z(), z(), o()],
    ])
}

/// `1/(2√2)`, the amplitude factor of the heralded optical gate.
pub fn herald_scalar<S: Scalar>() -> S {
    S::sqrt_ratio(1, 8)
}

/// Acts with `map` on the polarizations of the photons in `q1` and `q2`.
pub fn apply_two_qubit_map<S: Scalar>(
    state: &PhotonicState<S>,
    map: &TwoQubitMap<S>,
    q1: &Mode,
    q2: &Mode,
) -> Result<PhotonicState<S>, PswapError> {
    let mut out = Vec::new();
    for (occ, amp) in state.terms() {
        let p1 = occ
            .single_pol(q1)
            .ok_or_else(|| PswapError::NotSingleOccupied(q1.clone()))?;
        let p2 = occ
            .single_pol(q2)
            .ok_or_else(|| PswapError::NotSingleOccupied(q2.clone()))?;
        let col = basis_index(p1, p2);
        let rest = occ.without_mode(q1).without_mode(q2);
        for row in 0..4 {
            let u = map.entry(row, col);
            if u.is_zero() {
                continue;
            }
            let (r1, r2) = basis_pols(row);
            let mut o = rest.clone();
            o.add(ModeLabel::new(q1.clone(), r1), 1);
            o.add(ModeLabel::new(q2.clone(), r2), 1);
            out.push((o, amp.clone() * u.clone()));
        }
    }
    if out.is_empty() {
        return Ok(PhotonicState::zero(state.photon_number()));
    }
    Ok(PhotonicState::from_terms(out).expect("photon number preserved"))
}

pub fn apply_pswap<S: Scalar>(
    state: &PhotonicState<S>,
    q1: &Mode,
    q2: &Mode,
) -> Result<PhotonicState<S>, PswapError> {
    apply_two_qubit_map(state, &n_pswap(), q1, q2)
}

/// Whether fusion simulations include the optical herald amplitude.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateAccounting {
    /// The ideal map N; protocol-level probabilities.
    #[default]
    Ideal,
    /// N/(2√2) per gate, heralded by one of two coincidence patterns.
    Physical,
}

/// Six polarizing beam splitters and nine half-wave plates; logical inputs on
/// `in` and `in'`, coincidences read on 9 & 11 or 10 & 12.
pub fn build_pswap_circuit() -> Circuit {
    let a45 = || Angle::degrees(45, 1);
    let a22 = || Angle::degrees(45, 2);
    let a67 = || Angle::degrees(135, 2);
    let elements = vec![
        Element::pbs("PBS1", "in", "vac1", "1", "2"),
        Element::pbs("PBS2", "in'", "vac2", "4", "3"),
        Element::hwp("HWP1", "1", a45()),
        Element::hwp("HWP2", "3", a67()),
        Element::hwp("HWP3", "4", a22()),
        Element::pbs("PBS3", "2", "3", "6", "5"),
        Element::hwp("HWP4", "5", a67()),
        Element::hwp("HWP5", "6", a67()),
        Element::pbs("PBS4", "1", "4", "8", "7"),
        Element::hwp("HWP6", "7", a22()),
        Element::hwp("HWP7", "8", a22()),
        Element::pbs("PBS5", "8", "5", "9", "10"),
        Element::pbs("PBS6", "7", "6", "11", "12"),
        Element::hwp("HWP8", "10", a45()),
        Element::hwp("HWP9", "12", a45()),
        Element::detectors("D1", &["9", "11"]),
        Element::detectors("D2", &["10", "12"]),
    ];
    let modes = |xs: &[&str]| xs.iter().map(|&m| Mode::from(m)).collect::<Vec<_>>();
    Circuit::new(
        "partial-swap",
        modes(&["in", "in'", "vac1", "vac2"]),
        modes(&["9", "10", "11", "12"]),
        elements,
        vec![modes(&["9", "11"]), modes(&["10", "12"])],
    )
    .expect("reference circuit is well formed")
}

/// Element count after which the first evolution stage is complete.
pub const FIRST_STAGE_ELEMENTS: usize = 5;

fn logical_inputs(circuit: &Circuit) -> Result<(Mode, Mode), PswapError> {
    match circuit.inputs.as_slice() {
        [a, b, ..] => Ok((a.clone(), b.clone())),
        _ => Err(PswapError::TooFewInputs),
    }
}

/// `Σ amps[i] |i⟩` on the circuit's first two input modes.
pub fn two_qubit_input<S: Scalar>(
    circuit: &Circuit,
    amps: &[S; 4],
) -> Result<PhotonicState<S>, PswapError> {
    let (m1, m2) = logical_inputs(circuit)?;
    let terms = (0..4).filter(|&i| !amps[i].is_zero()).map(|i| {
        let (p1, p2) = basis_pols(i);
        (
            Occupation::from_labels([ModeLabel::new(m1.clone(), p1), ModeLabel::new(m2.clone(), p2)]),
            amps[i].clone(),
        )
    });
    let state = PhotonicState::from_terms(terms).expect("two photons each");
    Ok(if state.is_zero() {
        PhotonicState::zero(2)
    } else {
        state
    })
}

pub fn basis_vector<S: Scalar>(idx: usize) -> [S; 4] {
    std::array::from_fn(|i| if i == idx { S::one() } else { S::zero() })
}

fn check_pattern(circuit: &Circuit, pattern: &[Mode]) -> Result<(), PswapError> {
    if circuit.pattern_index(pattern).is_none() {
        return Err(PswapError::UnknownPattern(pattern.to_vec()));
    }
    if pattern.len() != 2 {
        return Err(PswapError::NotTwoQubit(pattern.to_vec()));
    }
    Ok(())
}

/// Heralded logical map for one coincidence pattern, read off by driving the
/// circuit with the four basis inputs.
pub fn postselected_map<S: Scalar>(
    circuit: &Circuit,
    pattern: &[Mode],
) -> Result<TwoQubitMap<S>, PswapError> {
    check_pattern(circuit, pattern)?;
    let mut m = TwoQubitMap::<S>::zero();
    for col in 0..4 {
        let out = circuit.run(&two_qubit_input(circuit, &basis_vector::<S>(col))?)?;
        let h = herald_pattern(&out, pattern);
        let logical = h.logical.unwrap_or_else(|| vec![S::zero(); 4]);
        for (row, amp) in logical.into_iter().enumerate() {
            m.m[row][col] = amp;
        }
    }
    Ok(m)
}

/// Heralded success probability `‖N ψ‖²/4` of the ideal gate on a
/// normalized input.
pub fn gate_success_probability<S: Scalar>(amps: &[S; 4]) -> S {
    let out = n_pswap::<S>().apply(amps);
    out.iter().fold(S::zero(), |acc, a| acc + a.abs_sq()) * S::from_ratio(1, 4)
}

/// The same probability measured on the optical network: the summed herald
/// probability over every declared pattern.
pub fn optical_success_probability<S: Scalar>(
    circuit: &Circuit,
    amps: &[S; 4],
) -> Result<S, PswapError> {
    let out = circuit.run(&two_qubit_input(circuit, amps)?)?;
    Ok(circuit
        .herald(&out)
        .into_iter()
        .fold(S::zero(), |acc, h| acc + h.probability))
}

/// Coincidence probabilities for one basis input and one pattern, columns
/// ordered HH, HV, VH, VV by (first, second) pattern mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceRow<S: Scalar> {
    pub basis_input: &'static str,
    pub pattern: Vec<Mode>,
    pub coincidence_probs: [S; 4],
}

pub fn table3<S: Scalar>(circuit: &Circuit) -> Result<Vec<CoincidenceRow<S>>, PswapError> {
    let mut rows = Vec::new();
    for (idx, label) in BASIS.iter().enumerate() {
        let out = circuit.run(&two_qubit_input(circuit, &basis_vector::<S>(idx))?)?;
        for pattern in &circuit.heralding {
            check_pattern(circuit, pattern)?;
            let h = herald_pattern(&out, pattern);
            let probs: [S; 4] = std::array::from_fn(|i| h.coincidences[i].clone());
            rows.push(CoincidenceRow {
                basis_input: label,
                pattern: pattern.clone(),
                coincidence_probs: probs,
            });
        }
    }
    Ok(rows)
}

/// Expected coincidences of the ideal heralded gate: the single nonzero
/// column is the truth-table output, with probability 1/8 per pattern.
pub fn expected_coincidences<S: Scalar>(basis_idx: usize) -> [S; 4] {
    let target = (0..4)
        .find(|&r| !n_pswap::<S>().entry(r, basis_idx).is_zero())
        .expect("every basis input has an image");
    std::array::from_fn(|c| if c == target { S::from_ratio(1, 8) } else { S::zero() })
}

#[derive(Clone, Debug)]
pub struct GateVerification<S: Scalar> {
    /// Proportionality scalar of each pattern's heralded map against N.
    pub scalars: Vec<(Vec<Mode>, Option<S>)>,
    pub table: Vec<CoincidenceRow<S>>,
    pub nonunitary: bool,
    pub mismatches: Vec<String>,
}

impl<S: Scalar> GateVerification<S> {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Cross-checks an optical network against the abstract gate.
pub fn verify_gate<S: Scalar>(circuit: &Circuit) -> Result<GateVerification<S>, PswapError> {
    let n = n_pswap::<S>();
    let expected_k = herald_scalar::<S>();
    let close = |a: &S, b: &S| if S::EXACT { a == b } else { a.approx_eq(b, 1e-9) };
    let mut mismatches = Vec::new();

    let nonunitary =
        !n.compose(&n.adjoint()).is_identity() && !n.adjoint().compose(&n).is_identity();
    if !nonunitary {
        mismatches.push("N is unitary".to_string());
    }
    if circuit.heralding.is_empty() {
        mismatches.push("circuit declares no heralding pattern".to_string());
    }

    let mut scalars = Vec::new();
    for pattern in &circuit.heralding {
        let m = postselected_map::<S>(circuit, pattern)?;
        let k = m.proportional_to(&n);
        match &k {
            Some(k) if close(k, &expected_k) => {}
            Some(k) => mismatches.push(format!(
                "pattern {}: heralded map is {k} · N, expected {expected_k} · N",
                pattern_name(pattern)
            )),
            None => {
                let want = n.scale(&expected_k);
                let col = (0..4)
                    .find(|&c| (0..4).any(|r| !close(m.entry(r, c), want.entry(r, c))))
                    .expect("maps differ somewhere");
                let show = |t: &TwoQubitMap<S>| {
                    (0..4).map(|r| t.entry(r, col).to_string()).collect::<Vec<_>>().join(", ")
                };
                mismatches.push(format!(
                    "pattern {}: heralded map is not proportional to N; input {} maps to [{}], expected [{}]",
                    pattern_name(pattern),
                    BASIS[col],
                    show(&m),
                    show(&want)
                ))
            }
        }
        scalars.push((pattern.clone(), k));
    }

    let table = table3::<S>(circuit)?;
    for row in &table {
        let idx = BASIS.iter().position(|b| *b == row.basis_input).expect("basis label");
        let want = expected_coincidences::<S>(idx);
        for c in 0..4 {
            if !close(&row.coincidence_probs[c], &want[c]) {
                mismatches.push(format!(
                    "input {} pattern {} column {}: got {}, expected {}",
                    row.basis_input,
                    pattern_name(&row.pattern),
                    BASIS[c],
                    row.coincidence_probs[c],
                    want[c]
                ));
            }
        }
    }

    Ok(GateVerification {
        scalars,
        table,
        nonunitary,
        mismatches,
    })
}

pub fn pattern_name(pattern: &[Mode]) -> String {
    pattern.iter().map(Mode::as_str).collect::<Vec<_>>().join("&")
}
