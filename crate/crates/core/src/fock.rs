//! Few-photon multimode bosonic states.
//!
//! A [`PhotonicState`] is a superposition of occupation-number kets over
//! `(spatial mode, polarization)` labels. Each stored amplitude is the
//! coefficient of the *normalized* ket `|n₁, n₂, …⟩`, so for instance
//! `(a†)²|0⟩` is stored as `√2·|2⟩`. The `√(n!)` factors are introduced when
//! a [`ModeMap`] is expanded; every post-selected branch of the partial-swap
//! network has at most one photon per label, where the convention is moot.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("spatial mode {0} appears in both factors of a tensor product")]
    ModeCollision(Mode),
    #[error("photon numbers differ: {left} vs {right}")]
    PhotonNumberMismatch { left: u32, right: u32 },
    #[error("mode map has {rows}x{cols} matrix for {outputs} outputs and {inputs} inputs")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        outputs: usize,
        inputs: usize,
    },
    #[error("label {0} listed twice in a mode map")]
    DuplicateLabel(ModeLabel),
}

/// Spatial mode identifier.
///
/// Ordered "naturally": digit runs compare numerically, so `"9" < "10"` and
/// `"a:2" < "a:10"`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mode(Arc<str>);

impl Mode {
    pub fn new(name: impl AsRef<str>) -> Self {
        Mode(Arc::from(name.as_ref()))
    }

    /// `"{namespace}:{index}"`, the per-register local modes.
    pub fn namespaced(namespace: &str, index: usize) -> Self {
        Mode::new(format!("{namespace}:{index}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let run = |s: &[u8]| s.iter().take_while(|c| c.is_ascii_digit()).count();
                let (lx, ly) = (run(x), run(y));
                let strip = |s: &[u8]| {
                    let z = s.iter().take_while(|c| **c == b'0').count();
                    s[z..].to_vec()
                };
                let (dx, dy) = (strip(&x[..lx]), strip(&y[..ly]));
                let ord = dx.len().cmp(&dy.len()).then_with(|| dx.cmp(&dy));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[lx..];
                y = &y[ly..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(d);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

impl Ord for Mode {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.0, &other.0).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Mode {
    fn from(s: &str) -> Self {
        Mode::new(s)
    }
}

impl From<String> for Mode {
    fn from(s: String) -> Self {
        Mode::new(s)
    }
}

impl From<usize> for Mode {
    fn from(n: usize) -> Self {
        Mode::new(n.to_string())
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty mode name"));
        }
        Ok(Mode::new(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn flip(self) -> Pol {
        match self {
            Pol::H => Pol::V,
            Pol::V => Pol::H,
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pol::H => "H",
            Pol::V => "V",
        })
    }
}

/// A single bosonic mode: spatial path plus polarization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub mode: Mode,
    pub pol: Pol,
}

impl ModeLabel {
    pub fn new(mode: impl Into<Mode>, pol: Pol) -> Self {
        ModeLabel {
            mode: mode.into(),
            pol,
        }
    }

    pub fn h(mode: impl Into<Mode>) -> Self {
        Self::new(mode, Pol::H)
    }

    pub fn v(mode: impl Into<Mode>) -> Self {
        Self::new(mode, Pol::V)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.mode, self.pol)
    }
}

impl fmt::Debug for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical occupation map; zero counts are never stored.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(BTreeMap<ModeLabel, u32>);

impl Occupation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels(labels: impl IntoIterator<Item = ModeLabel>) -> Self {
        let mut occ = Self::new();
        for l in labels {
            occ.add(l, 1);
        }
        occ
    }

    pub fn add(&mut self, label: ModeLabel, n: u32) {
        if n > 0 {
            *self.0.entry(label).or_insert(0) += n;
        }
    }

    pub fn count(&self, label: &ModeLabel) -> u32 {
        self.0.get(label).copied().unwrap_or(0)
    }

    /// Photons in a spatial mode, both polarizations.
    pub fn photons_in(&self, mode: &Mode) -> u32 {
        Pol::BOTH
            .iter()
            .map(|&p| self.count(&ModeLabel::new(mode.clone(), p)))
            .sum()
    }

    /// Polarization of the single photon in `mode`, if it holds exactly one.
    pub fn single_pol(&self, mode: &Mode) -> Option<Pol> {
        let h = self.count(&ModeLabel::h(mode.clone()));
        let v = self.count(&ModeLabel::v(mode.clone()));
        match (h, v) {
            (1, 0) => Some(Pol::H),
            (0, 1) => Some(Pol::V),
            _ => None,
        }
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn modes(&self) -> BTreeSet<Mode> {
        self.0.keys().map(|l| l.mode.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeLabel, u32)> {
        self.0.iter().map(|(l, n)| (l, *n))
    }

    pub fn without_mode(&self, mode: &Mode) -> Self {
        Occupation(
            self.0
                .iter()
                .filter(|(l, _)| &l.mode != mode)
                .map(|(l, n)| (l.clone(), *n))
                .collect(),
        )
    }

    fn merged(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (l, n) in other.iter() {
            out.add(l.clone(), n);
        }
        out
    }

    fn factorial_product(&self) -> u64 {
        self.0.values().map(|&n| factorial(n)).product()
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, (l, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
            if n > 1 {
                write!(f, "^{n}")?;
            }
        }
        f.write_str("⟩")
    }
}

impl fmt::Debug for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Superposition of occupation kets with a fixed total photon number.
#[derive(Clone, PartialEq)]
pub struct PhotonicState<S: Scalar = Amplitude> {
    terms: BTreeMap<Occupation, S>,
    photons: u32,
}

impl<S: Scalar> PhotonicState<S> {
    /// The zero vector in the `photons`-photon sector.
    pub fn zero(photons: u32) -> Self {
        Self {
            terms: BTreeMap::new(),
            photons,
        }
    }

    pub fn vacuum() -> Self {
        Self::basis(std::iter::empty())
    }

    /// Product ket with one photon per listed label (repeats bunch).
    pub fn basis(labels: impl IntoIterator<Item = ModeLabel>) -> Self {
        Self::ket(Occupation::from_labels(labels), S::one())
    }

    pub fn ket(occ: Occupation, amp: S) -> Self {
        let photons = occ.total();
        let mut terms = BTreeMap::new();
        if !amp.is_zero() {
            terms.insert(occ, amp);
        }
        Self { terms, photons }
    }

    /// Sums the given terms; repeated occupations accumulate.
    pub fn from_terms(terms: impl IntoIterator<Item = (Occupation, S)>) -> Result<Self, FockError> {
        let mut state: Option<Self> = None;
        for (occ, amp) in terms {
            let s = state.get_or_insert_with(|| Self::zero(occ.total()));
            if occ.total() != s.photons {
                return Err(FockError::PhotonNumberMismatch {
                    left: s.photons,
                    right: occ.total(),
                });
            }
            s.accumulate(occ, amp);
        }
        Ok(state.unwrap_or_else(|| Self::zero(0)))
    }

    fn accumulate(&mut self, occ: Occupation, amp: S) {
        if amp.is_zero() {
            return;
        }
        match self.terms.remove(&occ) {
            Some(prev) => {
                let sum = prev + amp;
                if !sum.is_zero() {
                    self.terms.insert(occ, sum);
                }
            }
            None => {
                self.terms.insert(occ, amp);
            }
        }
    }

    pub fn photon_number(&self) -> u32 {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &S)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &Occupation) -> S {
        self.terms.get(occ).cloned().unwrap_or_else(S::zero)
    }

    /// Spatial modes holding a photon in at least one term.
    pub fn modes(&self) -> BTreeSet<Mode> {
        self.terms.keys().flat_map(|o| o.modes()).collect()
    }

    pub fn scale(&self, factor: &S) -> Self {
        let mut out = Self::zero(self.photons);
        for (occ, amp) in &self.terms {
            out.accumulate(occ.clone(), amp.clone() * factor.clone());
        }
        out
    }

    /// `self + other`.
    pub fn plus(&self, other: &Self) -> Result<Self, FockError> {
        self.check_photons(other)?;
        let mut out = self.clone();
        for (occ, amp) in &other.terms {
            out.accumulate(occ.clone(), amp.clone());
        }
        Ok(out)
    }

    fn check_photons(&self, other: &Self) -> Result<(), FockError> {
        if self.photons != other.photons {
            return Err(FockError::PhotonNumberMismatch {
                left: self.photons,
                right: other.photons,
            });
        }
        Ok(())
    }

    /// Tensor product of states on disjoint spatial modes.
    pub fn tensor(&self, other: &Self) -> Result<Self, FockError> {
        let mine = self.modes();
        if let Some(m) = other.modes().into_iter().find(|m| mine.contains(m)) {
            return Err(FockError::ModeCollision(m));
        }
        let mut out = Self::zero(self.photons + other.photons);
        for (o1, a1) in &self.terms {
            for (o2, a2) in &other.terms {
                out.accumulate(o1.merged(o2), a1.clone() * a2.clone());
            }
        }
        Ok(out)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<S, FockError> {
        self.check_photons(other)?;
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = S::zero();
        for (occ, a) in &small.terms {
            if let Some(b) = large.terms.get(occ) {
                let (bra, ket) = if flip { (b, a) } else { (a, b) };
                acc = acc + bra.conj() * ket.clone();
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> S {
        self.terms
            .values()
            .fold(S::zero(), |acc, a| acc + a.abs_sq())
    }

    /// Substitutes every creation operator by its image under `map` and
    /// re-collects the result in the normalized occupation basis.
    pub fn apply_mode_map(&self, map: &ModeMap<S>) -> Self {
        let mut out = Self::zero(self.photons);
        for (occ, amp) in &self.terms {
            let mut partial: BTreeMap<Occupation, S> = BTreeMap::new();
            partial.insert(Occupation::new(), amp.clone());
            for (label, n) in occ.iter() {
                let image = map.image(label);
                for _ in 0..n {
                    let mut next: BTreeMap<Occupation, S> = BTreeMap::new();
                    for (o, a) in &partial {
                        for (target, u) in image.iter() {
                            let mut o2 = o.clone();
                            o2.add(target.clone(), 1);
                            let contribution = a.clone() * u.clone();
                            match next.remove(&o2) {
                                Some(prev) => {
                                    next.insert(o2, prev + contribution);
                                }
                                None => {
                                    next.insert(o2, contribution);
                                }
                            }
                        }
                    }
                    partial = next;
                }
            }
            let in_fact = occ.factorial_product();
            for (o, a) in partial {
                let out_fact = o.factorial_product();
                let a = if in_fact == 1 && out_fact == 1 {
                    a
                } else {
                    a * S::sqrt_ratio(out_fact, in_fact)
                };
                out.accumulate(o, a);
            }
        }
        out
    }

    /// Keeps the terms accepted by `keep`; returns the unrenormalized
    /// sub-state and its probability `‖sub‖²/‖self‖²`.
    pub fn project(&self, keep: impl Fn(&Occupation) -> bool) -> (Self, S) {
        let mut sub = Self::zero(self.photons);
        for (occ, amp) in &self.terms {
            if keep(occ) {
                sub.terms.insert(occ.clone(), amp.clone());
            }
        }
        let prob = match self.norm_sq().inv() {
            Some(inv) if !sub.is_zero() => sub.norm_sq() * inv,
            _ => S::zero(),
        };
        (sub, prob)
    }

    /// Detects exactly one `pol` photon in `mode` and removes that mode from
    /// the state. The residual is unrenormalized.
    pub fn measure(&self, mode: &Mode, pol: Pol) -> (Self, S) {
        let (sub, prob) = self.project(|o| o.single_pol(mode) == Some(pol));
        let mut residual = Self::zero(self.photons.saturating_sub(1));
        for (occ, amp) in sub.terms {
            residual.accumulate(occ.without_mode(mode), amp);
        }
        (residual, prob)
    }

    /// Renames spatial modes; `rename` must be injective on the state's modes.
    pub fn relabel(&self, rename: impl Fn(&Mode) -> Mode) -> Self {
        let mut out = Self::zero(self.photons);
        for (occ, amp) in &self.terms {
            let mut o = Occupation::new();
            for (l, n) in occ.iter() {
                o.add(ModeLabel::new(rename(&l.mode), l.pol), n);
            }
            out.accumulate(o, amp.clone());
        }
        out
    }

    /// Converts amplitudes to another backend.
    pub fn map_amplitudes<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PhotonicState<T> {
        let mut out = PhotonicState::<T>::zero(self.photons);
        for (occ, amp) in &self.terms {
            out.accumulate(occ.clone(), f(amp));
        }
        out
    }

    /// Renormalized copy, when the backend can take the square root of the norm.
    pub fn normalized(&self) -> Option<Self> {
        let inv = self.norm_sq().sqrt_real()?.inv()?;
        Some(self.scale(&inv))
    }
}

impl<S: Scalar> fmt::Display for PhotonicState<S> {
    /// One term per line, `amplitude |labels⟩`, in canonical order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (occ, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{amp} {occ}")?;
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for PhotonicState<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhotonicState[{}]\n{self}", self.photons)
    }
}

/// Linear map on creation operators: each listed input label goes to a
/// linear combination of output labels; unlisted labels are untouched.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMap<S: Scalar = Amplitude> {
    images: BTreeMap<ModeLabel, Vec<(ModeLabel, S)>>,
}

impl<S: Scalar> Default for ModeMap<S> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<S: Scalar> ModeMap<S> {
    pub fn identity() -> Self {
        Self {
            images: BTreeMap::new(),
        }
    }

    /// `matrix[r][c]` is the amplitude of `outputs[r]` in the image of
    /// `inputs[c]`.
    pub fn from_matrix(
        inputs: &[ModeLabel],
        outputs: &[ModeLabel],
        matrix: &[Vec<S>],
    ) -> Result<Self, FockError> {
        let cols = matrix.first().map_or(0, Vec::len);
        if matrix.len() != outputs.len()
            || cols != inputs.len()
            || matrix.iter().any(|row| row.len() != cols)
        {
            return Err(FockError::DimensionMismatch {
                rows: matrix.len(),
                cols,
                outputs: outputs.len(),
                inputs: inputs.len(),
            });
        }
        for labels in [inputs, outputs] {
            let mut seen = BTreeSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(FockError::DuplicateLabel(l.clone()));
                }
            }
        }
        let images = inputs
            .iter()
            .enumerate()
            .map(|(c, input)| {
                let image = outputs
                    .iter()
                    .enumerate()
                    .filter(|(r, _)| !matrix[*r][c].is_zero())
                    .map(|(r, out)| (out.clone(), matrix[r][c].clone()))
                    .collect();
                (input.clone(), image)
            })
            .collect();
        Ok(Self { images })
    }

    /// Relabeling `from → to` for each pair, amplitude one.
    pub fn routing(pairs: impl IntoIterator<Item = (ModeLabel, ModeLabel)>) -> Result<Self, FockError> {
        let mut images = BTreeMap::new();
        for (from, to) in pairs {
            if images.insert(from.clone(), vec![(to, S::one())]).is_some() {
                return Err(FockError::DuplicateLabel(from));
            }
        }
        Ok(Self { images })
    }

    /// Keeps only the images of `labels` (each listed explicitly).
    pub fn restricted(&self, labels: &[ModeLabel]) -> Self {
        let images = labels.iter().map(|l| (l.clone(), self.image(l))).collect();
        Self { images }
    }

    pub fn image(&self, label: &ModeLabel) -> Vec<(ModeLabel, S)> {
        self.images
            .get(label)
            .cloned()
            .unwrap_or_else(|| vec![(label.clone(), S::one())])
    }

    /// Every label the map moves or writes to.
    pub fn support(&self) -> BTreeSet<ModeLabel> {
        self.images
            .iter()
            .flat_map(|(k, v)| std::iter::once(k.clone()).chain(v.iter().map(|(l, _)| l.clone())))
            .collect()
    }

    fn apply_to_combination(&self, combo: &[(ModeLabel, S)]) -> Vec<(ModeLabel, S)> {
        let mut acc: BTreeMap<ModeLabel, S> = BTreeMap::new();
        for (l, a) in combo {
            for (t, u) in self.image(l) {
                let v = a.clone() * u;
                let sum = match acc.remove(&t) {
                    Some(prev) => prev + v,
                    None => v,
                };
                acc.insert(t, sum);
            }
        }
        acc.into_iter().filter(|(_, a)| !a.is_zero()).collect()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ModeMap<S>) -> ModeMap<S> {
        let mut keys: BTreeSet<ModeLabel> = self.images.keys().cloned().collect();
        keys.extend(next.images.keys().cloned());
        let images = keys
            .into_iter()
            .map(|k| {
                let img = next.apply_to_combination(&self.image(&k));
                (k, img)
            })
            .collect();
        ModeMap { images }
    }

    /// Conjugate transpose over the map's support.
    pub fn adjoint(&self) -> ModeMap<S> {
        let support = self.support();
        let mut images: BTreeMap<ModeLabel, Vec<(ModeLabel, S)>> =
            support.iter().map(|l| (l.clone(), Vec::new())).collect();
        for input in &support {
            for (out, u) in self.image(input) {
                images
                    .get_mut(&out)
                    .expect("support is closed under images")
                    .push((input.clone(), u.conj()));
            }
        }
        ModeMap { images }
    }

    /// Matrix over `labels` (`[row = output][col = input]`).
    pub fn matrix_over(&self, labels: &[ModeLabel]) -> Vec<Vec<S>> {
        let mut m = vec![vec![S::zero(); labels.len()]; labels.len()];
        for (c, input) in labels.iter().enumerate() {
            for (out, u) in self.image(input) {
                if let Some(r) = labels.iter().position(|l| *l == out) {
                    m[r][c] = u;
                }
            }
        }
        m
    }

    /// Orthonormality of the images of the listed input labels (exact on the
    /// exact backend).
    pub fn is_unitary(&self) -> bool {
        let columns: Vec<&Vec<(ModeLabel, S)>> = self.images.values().collect();
        for (i, ci) in columns.iter().enumerate() {
            for (j, cj) in columns.iter().enumerate().skip(i) {
                let mut dot = S::zero();
                for (l, a) in ci.iter() {
                    if let Some((_, b)) = cj.iter().find(|(m, _)| m == l) {
                        dot = dot + a.conj() * b.clone();
                    }
                }
                let expected = if i == j { S::one() } else { S::zero() };
                let ok = if S::EXACT {
                    dot == expected
                } else {
                    dot.approx_eq(&expected, 1e-12)
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use num_complex::Complex64;

    fn h(m: &str) -> ModeLabel {
        ModeLabel::h(m)
    }
    fn v(m: &str) -> ModeLabel {
        ModeLabel::v(m)
    }

    fn w2() -> PhotonicState {
        let r = Amplitude::sqrt_ratio(1, 2);
        PhotonicState::from_terms([
            (Occupation::from_labels([h("1"), v("2")]), r.clone()),
            (Occupation::from_labels([v("1"), h("2")]), r),
        ])
        .unwrap()
    }

    #[test]
    fn natural_mode_order() {
        let mut modes: Vec<Mode> = ["10", "9", "a:10", "a:2", "in'", "in", "1"]
            .into_iter()
            .map(Mode::from)
            .collect();
        modes.sort();
        let names: Vec<&str> = modes.iter().map(Mode::as_str).collect();
        assert_eq!(names, ["1", "9", "10", "a:2", "a:10", "in", "in'"]);
        assert_ne!(Mode::from("01"), Mode::from("1"));
        assert_ne!(Mode::from("01").cmp(&Mode::from("1")), Ordering::Equal);
    }

    #[test]
    fn tensor_of_basis_kets() {
        let a = PhotonicState::<Amplitude>::basis([h("a")]);
        let b = PhotonicState::basis([v("b")]);
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.len(), 1);
        assert_eq!(ab.amplitude(&Occupation::from_labels([h("a"), v("b")])), Amplitude::one());
        assert_eq!(ab.photon_number(), 2);
    }

    #[test]
    fn tensor_rejects_shared_modes() {
        let a = PhotonicState::<Amplitude>::basis([h("a")]);
        let b = PhotonicState::basis([v("a")]);
        assert_eq!(a.tensor(&b), Err(FockError::ModeCollision(Mode::from("a"))));
    }

    #[test]
    fn tensor_of_two_w2() {
        let left = w2();
        let right = w2().relabel(|m| Mode::new(format!("b{m}")));
        let both = left.tensor(&right).unwrap();
        assert_eq!(both.len(), 4);
        assert!(both.terms().all(|(_, a)| *a == Amplitude::ratio(1, 2)));
    }

    #[test]
    fn inner_products() {
        let w = w2();
        assert_eq!(w.inner(&w).unwrap(), Amplitude::one());
        let hv = PhotonicState::basis([h("1"), v("2")]);
        let amp = w.inner(&hv).unwrap();
        assert_eq!(amp.a(), ratio(0, 1));
        assert_eq!(amp.b(), ratio(1, 2));
        let hh = PhotonicState::basis([h("1"), h("2")]);
        assert_eq!(w.inner(&hh).unwrap(), Amplitude::zero());
        let one = PhotonicState::basis([h("1")]);
        assert!(matches!(w.inner(&one), Err(FockError::PhotonNumberMismatch { .. })));
    }

    #[test]
    fn projection_onto_first_qubit_v() {
        let (sub, p) = w2().project(|o| o.single_pol(&Mode::from("1")) == Some(Pol::V));
        assert_eq!(p, Amplitude::ratio(1, 2));
        let expect = PhotonicState::basis([v("1"), h("2")]).scale(&Amplitude::sqrt_ratio(1, 2));
        assert_eq!(sub, expect);
        let (all, p) = w2().project(|_| true);
        assert_eq!((all, p), (w2(), Amplitude::one()));
        let (none, p) = w2().project(|_| false);
        assert!(none.is_zero());
        assert_eq!(p, Amplitude::zero());
    }

    #[test]
    fn measurement_removes_the_mode() {
        let (res, p) = w2().measure(&Mode::from("1"), Pol::H);
        assert_eq!(p, Amplitude::ratio(1, 2));
        assert_eq!(res.photon_number(), 1);
        assert_eq!(res, PhotonicState::basis([v("2")]).scale(&Amplitude::sqrt_ratio(1, 2)));
    }

    #[test]
    fn bunching_factor_on_merge() {
        // a†_x a†_y with both sent to z: (a†_z)²|0⟩ = √2 |2_z⟩
        let map = ModeMap::routing([(h("x"), h("z")), (h("y"), h("z"))]).unwrap();
        let out = PhotonicState::<Amplitude>::basis([h("x"), h("y")]).apply_mode_map(&map);
        let mut two = Occupation::new();
        two.add(h("z"), 2);
        assert_eq!(out.len(), 1);
        assert_eq!(out.amplitude(&two), Amplitude::sqrt2());
    }

    #[test]
    fn bunched_input_splits_with_binomial_weights() {
        // |2_x⟩ through a real 50:50 splitter x → (y + z)/√2 gives
        // (|2_y⟩ + √2|1_y 1_z⟩ + |2_z⟩)/2.
        let r = Amplitude::sqrt_ratio(1, 2);
        let map = ModeMap::from_matrix(&[h("x")], &[h("y"), h("z")], &[vec![r.clone()], vec![r]]).unwrap();
        let mut two = Occupation::new();
        two.add(h("x"), 2);
        let out = PhotonicState::ket(two, Amplitude::one()).apply_mode_map(&map);
        let mut yy = Occupation::new();
        yy.add(h("y"), 2);
        assert_eq!(out.amplitude(&yy), Amplitude::ratio(1, 2));
        assert_eq!(
            out.amplitude(&Occupation::from_labels([h("y"), h("z")])),
            Amplitude::sqrt_ratio(1, 2)
        );
        assert_eq!(out.norm_sq(), Amplitude::one());
    }

    #[test]
    fn mode_map_dimension_checks() {
        let err = ModeMap::<Amplitude>::from_matrix(&[h("a")], &[h("b"), v("b")], &[vec![Amplitude::one()]]);
        assert!(matches!(err, Err(FockError::DimensionMismatch { .. })));
        let err = ModeMap::<Amplitude>::from_matrix(
            &[h("a"), h("a")],
            &[h("b"), v("b")],
            &[vec![Amplitude::one(), Amplitude::zero()], vec![Amplitude::zero(), Amplitude::one()]],
        );
        assert_eq!(err, Err(FockError::DuplicateLabel(h("a"))));
    }

    #[test]
    fn adjoint_composition_is_identity() {
        let r = Amplitude::sqrt_ratio(1, 2);
        let map = ModeMap::from_matrix(
            &[h("a"), v("a")],
            &[h("a"), v("a")],
            &[vec![r.clone(), r.clone()], vec![r.clone(), -r]],
        )
        .unwrap();
        assert!(map.is_unitary());
        let id = map.then(&map.adjoint());
        for l in [h("a"), v("a")] {
            assert_eq!(id.image(&l), vec![(l.clone(), Amplitude::one())]);
        }
    }

    #[test]
    fn non_unitary_map_detected() {
        let map = ModeMap::<Amplitude>::routing([(h("x"), h("z")), (h("y"), h("z"))]).unwrap();
        assert!(!map.is_unitary());
    }

    #[test]
    fn float_backend_state() {
        let s = PhotonicState::<Complex64>::basis([h("a")]).scale(&Complex64::new(0.0, 1.0));
        assert!((s.norm_sq().re - 1.0).abs() < 1e-15);
        let i = s.inner(&PhotonicState::basis([h("a")])).unwrap();
        assert!((i - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn display_golden() {
        let s = w2();
        assert_eq!(s.to_string(), "1/2·√2 |1H,2V⟩\n1/2·√2 |1V,2H⟩");
        assert_eq!(PhotonicState::<Amplitude>::zero(2).to_string(), "0");
    }
}
