//! Passive polarization optics: polarizing beam splitters, half-wave plates
//! and detector groups wired over named spatial modes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fock::{FockError, Mode, ModeLabel, ModeMap, Occupation, PhotonicState, Pol};
use crate::rational::{self, Rational};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("element {element}: mode {mode} is not live at this point")]
    NotLive { element: String, mode: Mode },
    #[error("element {element}: ports must be four distinct modes")]
    PortCollision { element: String },
    #[error("element {element}: output mode {mode} was already used")]
    ModeReuse { element: String, mode: Mode },
    #[error("duplicate element id {0}")]
    DuplicateId(String),
    #[error("duplicate input mode {0}")]
    DuplicateInput(Mode),
    #[error("declared outputs {declared:?} differ from live modes {live:?}")]
    OutputMismatch { declared: Vec<Mode>, live: Vec<Mode> },
    #[error("heralding pattern {pattern:?}: {reason}")]
    BadPattern { pattern: Vec<Mode>, reason: String },
    #[error(
        "element {element}: no exact Jones matrix at {angle}°; only multiples of 22.5° are exact, use the float backend"
    )]
    InexactAngle { element: String, angle: String },
    #[error("input state occupies {0}, which is not a circuit input")]
    InputNotOnCircuit(Mode),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Plate angle in degrees, held exactly.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(pub Rational);

impl Angle {
    pub fn degrees(num: i64, den: i64) -> Self {
        Angle(rational::ratio(num, den))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rational::format_terminating(&self.0))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Int(n) => n.to_string(),
        };
        rational::parse(&text)
            .map(Angle)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid angle {text:?}")))
    }
}

/// PBS ports: H from `in_a` leaves at `out_t` and from `in_b` at `out_r`;
/// V takes the other exit in each case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    Pbs {
        in_a: Mode,
        in_b: Mode,
        out_t: Mode,
        out_r: Mode,
    },
    Hwp {
        mode: Mode,
        angle: Angle,
    },
    DetectorGroup {
        modes: Vec<Mode>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    #[serde(flatten)]
    pub kind: ElementKind,
}

impl Element {
    pub fn pbs(id: &str, in_a: &str, in_b: &str, out_t: &str, out_r: &str) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::Pbs {
                in_a: in_a.into(),
                in_b: in_b.into(),
                out_t: out_t.into(),
                out_r: out_r.into(),
            },
        }
    }

    pub fn hwp(id: &str, mode: &str, angle: Angle) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::Hwp {
                mode: mode.into(),
                angle,
            },
        }
    }

    pub fn detectors(id: &str, modes: &[&str]) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::DetectorGroup {
                modes: modes.iter().map(|&m| m.into()).collect(),
            },
        }
    }

    /// Mode map of this element on backend `S`.
    pub fn mode_map<S: Scalar>(&self) -> Result<ModeMap<S>, CircuitError> {
        match &self.kind {
            ElementKind::Pbs {
                in_a,
                in_b,
                out_t,
                out_r,
            } => Ok(pbs_map(in_a, in_b, out_t, out_r)?),
            ElementKind::Hwp { mode, angle } => {
                let m = hwp_matrix::<S>(angle).ok_or_else(|| CircuitError::InexactAngle {
                    element: self.id.clone(),
                    angle: angle.to_string(),
                })?;
                let labels = [ModeLabel::h(mode.clone()), ModeLabel::v(mode.clone())];
                Ok(ModeMap::from_matrix(&labels, &labels, &m)?)
            }
            ElementKind::DetectorGroup { .. } => Ok(ModeMap::identity()),
        }
    }
}

/// Jones matrix `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]` on `(H, V)`.
///
/// `None` when the backend cannot represent the entries exactly.
pub fn hwp_matrix<S: Scalar>(angle: &Angle) -> Option<Vec<Vec<S>>> {
    let twice = &angle.0 * rational::int(2);
    let (c, s) = S::cos_sin_degrees(&twice)?;
    Some(vec![vec![c.clone(), s.clone()], vec![s, -c]])
}

pub fn pbs_map<S: Scalar>(
    in_a: &Mode,
    in_b: &Mode,
    out_t: &Mode,
    out_r: &Mode,
) -> Result<ModeMap<S>, FockError> {
    ModeMap::routing([
        (ModeLabel::h(in_a.clone()), ModeLabel::h(out_t.clone())),
        (ModeLabel::v(in_a.clone()), ModeLabel::v(out_r.clone())),
        (ModeLabel::h(in_b.clone()), ModeLabel::h(out_r.clone())),
        (ModeLabel::v(in_b.clone()), ModeLabel::v(out_t.clone())),
    ])
}

/// A static optical network. Construction runs the wiring check, so every
/// `Circuit` value is well formed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    pub name: String,
    pub inputs: Vec<Mode>,
    pub outputs: Vec<Mode>,
    pub elements: Vec<Element>,
    /// Accepted coincidence patterns; the i-th mode of a pattern carries
    /// logical qubit i.
    pub heralding: Vec<Vec<Mode>>,
}

#[derive(Deserialize)]
struct RawCircuit {
    name: String,
    inputs: Vec<Mode>,
    outputs: Vec<Mode>,
    elements: Vec<Element>,
    #[serde(default)]
    heralding: Vec<Vec<Mode>>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = CircuitError;

    fn try_from(raw: RawCircuit) -> Result<Self, Self::Error> {
        Circuit::new(raw.name, raw.inputs, raw.outputs, raw.elements, raw.heralding)
    }
}

impl Circuit {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<Mode>,
        outputs: Vec<Mode>,
        elements: Vec<Element>,
        heralding: Vec<Vec<Mode>>,
    ) -> Result<Self, CircuitError> {
        let c = Circuit {
            name: name.into(),
            inputs,
            outputs,
            elements,
            heralding,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    /// Static wiring pass.
    fn validate(&self) -> Result<(), CircuitError> {
        let mut live: BTreeSet<Mode> = BTreeSet::new();
        let mut used: BTreeSet<Mode> = BTreeSet::new();
        let mut detected: BTreeSet<Mode> = BTreeSet::new();
        for m in &self.inputs {
            if !live.insert(m.clone()) {
                return Err(CircuitError::DuplicateInput(m.clone()));
            }
            used.insert(m.clone());
        }
        let mut ids = BTreeSet::new();
        let touch = |id: &str, m: &Mode, live: &BTreeSet<Mode>, detected: &BTreeSet<Mode>| {
            if live.contains(m) && !detected.contains(m) {
                Ok(())
            } else {
                Err(CircuitError::NotLive {
                    element: id.to_string(),
                    mode: m.clone(),
                })
            }
        };
        for el in &self.elements {
            if !ids.insert(el.id.as_str()) {
                return Err(CircuitError::DuplicateId(el.id.clone()));
            }
            match &el.kind {
                ElementKind::Pbs {
                    in_a,
                    in_b,
                    out_t,
                    out_r,
                } => {
                    if in_a == in_b || out_t == out_r {
                        return Err(CircuitError::PortCollision {
                            element: el.id.clone(),
                        });
                    }
                    touch(&el.id, in_a, &live, &detected)?;
                    touch(&el.id, in_b, &live, &detected)?;
                    live.remove(in_a);
                    live.remove(in_b);
                    for out in [out_t, out_r] {
                        let own_input = out == in_a || out == in_b;
                        if !own_input && used.contains(out) {
                            return Err(CircuitError::ModeReuse {
                                element: el.id.clone(),
                                mode: out.clone(),
                            });
                        }
                        used.insert(out.clone());
                        live.insert(out.clone());
                    }
                }
                ElementKind::Hwp { mode, .. } => touch(&el.id, mode, &live, &detected)?,
                ElementKind::DetectorGroup { modes } => {
                    for m in modes {
                        touch(&el.id, m, &live, &detected)?;
                    }
                    detected.extend(modes.iter().cloned());
                }
            }
        }
        let declared: BTreeSet<Mode> = self.outputs.iter().cloned().collect();
        if declared != live || declared.len() != self.outputs.len() {
            return Err(CircuitError::OutputMismatch {
                declared: self.outputs.clone(),
                live: live.into_iter().collect(),
            });
        }
        for pattern in &self.heralding {
            let bad = |reason: &str| CircuitError::BadPattern {
                pattern: pattern.clone(),
                reason: reason.to_string(),
            };
            if pattern.is_empty() {
                return Err(bad("empty pattern"));
            }
            let distinct: BTreeSet<&Mode> = pattern.iter().collect();
            if distinct.len() != pattern.len() {
                return Err(bad("repeated mode"));
            }
            if let Some(m) = pattern.iter().find(|m| !declared.contains(*m)) {
                return Err(bad(&format!("{m} is not an output mode")));
            }
        }
        Ok(())
    }

    /// Composite single-photon map from the input labels to the outputs.
    pub fn mode_map<S: Scalar>(&self) -> Result<ModeMap<S>, CircuitError> {
        let mut total = ModeMap::identity();
        for el in &self.elements {
            total = total.then(&el.mode_map()?);
        }
        let labels: Vec<ModeLabel> = self
            .inputs
            .iter()
            .flat_map(|m| Pol::BOTH.map(|p| ModeLabel::new(m.clone(), p)))
            .collect();
        Ok(total.restricted(&labels))
    }

    fn check_input<S: Scalar>(&self, input: &PhotonicState<S>) -> Result<(), CircuitError> {
        let inputs: BTreeSet<&Mode> = self.inputs.iter().collect();
        match input.modes().into_iter().find(|m| !inputs.contains(m)) {
            Some(m) => Err(CircuitError::InputNotOnCircuit(m)),
            None => Ok(()),
        }
    }

    /// Applies the elements one after another.
    pub fn run<S: Scalar>(&self, input: &PhotonicState<S>) -> Result<PhotonicState<S>, CircuitError> {
        Ok(self.run_trace(input)?.pop().expect("trace holds the input"))
    }

    /// The input followed by the state after each element.
    pub fn run_trace<S: Scalar>(
        &self,
        input: &PhotonicState<S>,
    ) -> Result<Vec<PhotonicState<S>>, CircuitError> {
        self.check_input(input)?;
        let maps = self
            .elements
            .iter()
            .map(Element::mode_map)
            .collect::<Result<Vec<ModeMap<S>>, _>>()?;
        let mut trace = vec![input.clone()];
        for map in &maps {
            let next = trace.last().expect("nonempty").apply_mode_map(map);
            trace.push(next);
        }
        Ok(trace)
    }

    /// Heralding results for each declared coincidence pattern.
    pub fn herald<S: Scalar>(&self, output: &PhotonicState<S>) -> Vec<HeraldOutcome<S>> {
        self.heralding
            .iter()
            .map(|p| herald_pattern(output, p))
            .collect()
    }

    pub fn pattern_index(&self, pattern: &[Mode]) -> Option<usize> {
        self.heralding.iter().position(|p| p == pattern)
    }
}

/// Result of conditioning on one coincidence pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldOutcome<S: Scalar> {
    pub pattern: Vec<Mode>,
    pub probability: S,
    /// Unnormalized logical amplitudes, index bit i (most significant first)
    /// set when the photon in `pattern[i]` is V. `None` when photons outside
    /// the pattern survive the projection.
    pub logical: Option<Vec<S>>,
    /// Probability of each polarization assignment on the pattern modes, in
    /// the same index order as `logical`.
    pub coincidences: Vec<S>,
}

impl<S: Scalar> HeraldOutcome<S> {
    /// Logical amplitudes scaled to unit norm, if the backend can take the
    /// square root of the heralded norm.
    pub fn renormalized(&self) -> Option<Vec<S>> {
        let logical = self.logical.as_ref()?;
        let norm: S = logical.iter().fold(S::zero(), |acc, a| acc + a.abs_sq());
        let inv = norm.sqrt_real()?.inv()?;
        Some(logical.iter().map(|a| a.clone() * inv.clone()).collect())
    }
}

fn pattern_index(occ: &Occupation, pattern: &[Mode]) -> Option<usize> {
    let mut idx = 0usize;
    for m in pattern {
        let pol = occ.single_pol(m)?;
        idx = (idx << 1) | pol.index();
    }
    Some(idx)
}

pub fn herald_pattern<S: Scalar>(output: &PhotonicState<S>, pattern: &[Mode]) -> HeraldOutcome<S> {
    let width = 1usize << pattern.len();
    let mut logical = vec![S::zero(); width];
    let mut coincidences = vec![S::zero(); width];
    let mut complete = true;
    let norm_inv = output.norm_sq().inv();
    let mut prob = S::zero();
    for (occ, amp) in output.terms() {
        let Some(idx) = pattern_index(occ, pattern) else {
            continue;
        };
        let p = amp.abs_sq();
        coincidences[idx] = coincidences[idx].clone() + p.clone();
        prob = prob + p;
        if occ.total() as usize == pattern.len() {
            logical[idx] = logical[idx].clone() + amp.clone();
        } else {
            complete = false;
        }
    }
    if let Some(inv) = norm_inv {
        prob = prob * inv.clone();
        coincidences = coincidences.into_iter().map(|c| c * inv.clone()).collect();
    }
    HeraldOutcome {
        pattern: pattern.to_vec(),
        probability: prob,
        logical: complete.then_some(logical),
        coincidences,
    }
}

/// Probability of each spatial detection pattern (photon count per mode,
/// polarization ignored). Sums to one for a normalized state.
pub fn detection_distribution<S: Scalar>(state: &PhotonicState<S>) -> BTreeMap<Vec<(Mode, u32)>, S> {
    let mut out: BTreeMap<Vec<(Mode, u32)>, S> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let key: Vec<(Mode, u32)> = occ
            .modes()
            .into_iter()
            .map(|m| {
                let n = occ.photons_in(&m);
                (m, n)
            })
            .collect();
        let p = amp.abs_sq();
        let entry = out.entry(key).or_insert_with(S::zero);
        *entry = entry.clone() + p;
    }
    out
}

/// Polarization label for a logical index bit.
pub fn pol_of_bit(bit: usize) -> Pol {
    if bit == 0 {
        Pol::H
    } else {
        Pol::V
    }
}
