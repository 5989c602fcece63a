//! Finite-sample-space probability algebra.
//!
//! A [`SampleSpace`] is the system P-ket `|Ω)`: an ordered set of outcomes
//! `|x)` with masses `m(x) = P(x|Ω)`. An [`Event`] is a set of outcome labels,
//! so it survives reordering of the space. The P-bracket `P(A|B)` is a
//! conditional probability, and the P-identity `Σ_x |x)P(x|` lets every
//! bracket expand into sums over outcomes.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Input weights within this distance of 1 are rescaled to sum to 1.
pub const NORMALIZATION_SLACK: f64 = 1e-9;

/// A finite sample space with a probability mass per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct SampleSpace {
    labels: Vec<String>,
    masses: Vec<f64>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    labels: Vec<Label>,
    masses: Vec<f64>,
}

/// JSON labels may be written as strings or numbers (`[1, 2, 3]`).
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl From<Label> for String {
    fn from(label: Label) -> Self {
        match label {
            Label::Text(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

impl TryFrom<RawSpace> for SampleSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        SampleSpace::new(raw.labels.into_iter().map(String::from), raw.masses)
    }
}

impl From<SampleSpace> for RawSpace {
    fn from(space: SampleSpace) -> Self {
        RawSpace {
            labels: space.labels.into_iter().map(Label::Text).collect(),
            masses: space.masses,
        }
    }
}

impl SampleSpace {
    /// Builds a space from labels and weights.
    ///
    /// Weights must be finite and non-negative and sum to 1 within
    /// [`NORMALIZATION_SLACK`]; they are then rescaled so the stored masses
    /// sum to 1 up to rounding.
    pub fn new<L, I>(labels: I, weights: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != weights.len() {
            return Err(Error::Dimension {
                expected: labels.len(),
                got: weights.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument("sample space has no outcomes".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (sum - 1.0).abs() > NORMALIZATION_SLACK
        {
            return Err(Error::Normalization { sum });
        }
        let masses = weights.into_iter().map(|w| w / sum).collect();
        Self::from_parts(labels, masses)
    }

    /// Equal mass on every label.
    pub fn uniform<L, I>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("sample space has no outcomes".into()));
        }
        Self::from_parts(labels, vec![1.0 / n as f64; n])
    }

    /// A fair die with faces labelled `1`..=`6`.
    pub fn fair_die() -> Self {
        Self::uniform((1..=6).map(|i| i.to_string())).expect("six faces")
    }

    /// One occupation-number mode truncated to `0..=n_max`.
    ///
    /// `pmf(n)` gives the untruncated probability of occupation `n`. The
    /// retained masses are renormalised and the discarded tail mass
    /// `1 - Σ_{n ≤ n_max} pmf(n)` is returned alongside.
    pub fn truncated_occupation<F>(pmf: F, n_max: usize) -> Result<Truncated>
    where
        F: Fn(usize) -> f64,
    {
        let weights: Vec<f64> = (0..=n_max).map(pmf).collect();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "occupation pmf must be finite and non-negative".into(),
            ));
        }
        let kept: f64 = weights.iter().sum();
        if kept <= 0.0 {
            return Err(Error::NullCondition("truncated occupation range".into()));
        }
        let masses = weights.iter().map(|w| w / kept).collect();
        let space = Self::from_parts((0..=n_max).map(|n| n.to_string()).collect(), masses)?;
        Ok(Truncated {
            space,
            lost_mass: (1.0 - kept).max(0.0),
        })
    }

    fn from_parts(labels: Vec<String>, masses: Vec<f64>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate outcome label `{label}`")));
            }
        }
        Ok(Self {
            labels,
            masses,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `P(x|Ω)` for a single outcome.
    pub fn mass(&self, label: &str) -> Result<f64> {
        self.position(label).map(|i| self.masses[i])
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::Unknown {
            kind: "outcome",
            id: label.to_string(),
        })
    }

    /// The whole space `Ω` as an event.
    pub fn omega(&self) -> Event {
        Event::new(self.labels.iter().cloned())
    }

    /// Indicator of each outcome's membership in `event`, in space order.
    fn mask(&self, event: &Event) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.len()];
        for member in &event.members {
            mask[self.position(member)?] = true;
        }
        Ok(mask)
    }

    /// `P(A|Ω)`: the P-identity expansion `Σ_{x∈A} P(x|Ω)`.
    pub fn probability(&self, event: &Event) -> Result<f64> {
        let mask = self.mask(event)?;
        Ok(self
            .masses
            .iter()
            .zip(&mask)
            .filter(|(_, &inside)| inside)
            .map(|(m, _)| m)
            .sum())
    }

    fn evidence_mass(&self, evidence: &Event) -> Result<f64> {
        let mass = self.probability(evidence)?;
        if mass > 0.0 {
            Ok(mass)
        } else {
            Err(Error::NullCondition(evidence.to_string()))
        }
    }

    /// The P-bracket `P(A|B) = P(A∩B)/P(B)`.
    pub fn p_bracket(&self, a: &Event, b: &Event) -> Result<f64> {
        let pb = self.evidence_mass(b)?;
        let joint = self.probability(&a.intersection(b))?;
        Ok(joint / pb)
    }

    /// Bayes' rule `P(B|A)·P(A|Ω)/P(B|Ω)`, an independent route to `P(A|B)`.
    pub fn bayes(&self, a: &Event, b: &Event) -> Result<f64> {
        let pa = self.evidence_mass(a)?;
        let pb = self.evidence_mass(b)?;
        let b_given_a = self.p_bracket(b, a)?;
        Ok(b_given_a * pa / pb)
    }

    /// The space restricted to the members of `evidence`, with masses
    /// `P(x|B)`. Outcomes keep their original order.
    pub fn condition(&self, evidence: &Event) -> Result<SampleSpace> {
        let pb = self.evidence_mass(evidence)?;
        let mask = self.mask(evidence)?;
        if mask.iter().all(|&inside| inside) {
            return Ok(self.clone());
        }
        let (labels, masses) = self
            .labels
            .iter()
            .zip(&self.masses)
            .zip(&mask)
            .filter(|(_, &inside)| inside)
            .map(|((l, m), _)| (l.clone(), m / pb))
            .unzip();
        Self::from_parts(labels, masses)
    }

    /// `P(Ω|f(X)|Ω) = Σ f(x)·m(x)`.
    pub fn expectation(&self, f: &Observable) -> Result<f64> {
        f.check_len(self.len())?;
        Ok(f.values.iter().zip(&self.masses).map(|(v, m)| v * m).sum())
    }

    /// `P(Ω|f(X)|H) = Σ f(x)·P(x|H)`.
    pub fn conditional_expectation(&self, f: &Observable, given: &Event) -> Result<f64> {
        f.check_len(self.len())?;
        let ph = self.evidence_mass(given)?;
        let mask = self.mask(given)?;
        Ok(f.values
            .iter()
            .zip(&self.masses)
            .zip(&mask)
            .filter(|(_, &inside)| inside)
            .map(|((v, m), _)| v * (m / ph))
            .sum())
    }

    /// `E[f²] - E[f]²`.
    pub fn variance(&self, f: &Observable) -> Result<f64> {
        let mean = self.expectation(f)?;
        let second = self.expectation(&f.map(|v| v * v))?;
        Ok(second - mean * mean)
    }
}

/// A truncated occupation mode together with the probability mass that
/// fell outside the retained range.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated {
    pub space: SampleSpace,
    pub lost_mass: f64,
}

/// A subset of a sample space's outcome labels. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Event {
    members: BTreeSet<String>,
}

impl Event {
    pub fn new<L, I>(members: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        Self {
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.members.contains(label)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn intersection(&self, other: &Event) -> Event {
        Event {
            members: self.members.intersection(&other.members).cloned().collect(),
        }
    }

    pub fn union(&self, other: &Event) -> Event {
        Event {
            members: self.members.union(&other.members).cloned().collect(),
        }
    }

    pub fn is_superset(&self, other: &Event) -> bool {
        self.members.is_superset(&other.members)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// A real-valued random variable: one value per outcome, in space order.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    values: Vec<f64>,
}

impl Observable {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    /// Evaluates `f` on every label of `space`.
    pub fn from_labels<F>(space: &SampleSpace, f: F) -> Self
    where
        F: Fn(&str) -> f64,
    {
        Self {
            values: space.labels().iter().map(|l| f(l)).collect(),
        }
    }

    /// Parses each label as a number (`X|x) = x|x)`).
    pub fn label_values(space: &SampleSpace) -> Result<Self> {
        let values = space
            .labels()
            .iter()
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("label `{l}` is not numeric")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected,
                got: self.values.len(),
            })
        }
    }
}

/// Independent composition `|Ω₁ ⊗ … ⊗ Ωₙ)`. Joint masses factorise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    factors: Vec<SampleSpace>,
}

impl ProductSpace {
    pub fn new(factors: Vec<SampleSpace>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("product space needs at least one factor".into()));
        }
        Ok(Self { factors })
    }

    /// Multi-mode occupation basis, each mode truncated to `0..=n_max`.
    /// Returns the space and the total probability lost to truncation.
    pub fn fock<F>(mode_pmfs: &[F], n_max: usize) -> Result<(Self, f64)>
    where
        F: Fn(usize) -> f64,
    {
        let mut factors = Vec::with_capacity(mode_pmfs.len());
        let mut kept = 1.0;
        for pmf in mode_pmfs {
            let t = SampleSpace::truncated_occupation(pmf, n_max)?;
            kept *= 1.0 - t.lost_mass;
            factors.push(t.space);
        }
        Ok((Self::new(factors)?, 1.0 - kept))
    }

    pub fn factors(&self) -> &[SampleSpace] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    /// Mass of an outcome tuple given by per-factor indices.
    pub fn joint_mass(&self, tuple: &[usize]) -> Result<f64> {
        if tuple.len() != self.arity() {
            return Err(Error::Dimension {
                expected: self.arity(),
                got: tuple.len(),
            });
        }
        tuple
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| {
                f.masses().get(i).copied().ok_or_else(|| Error::Dimension {
                    expected: f.len(),
                    got: i + 1,
                })
            })
            .product()
    }

    /// `Π_i P(Ω_i|X_i|Ω_i)`.
    pub fn joint_expectation(&self, observables: &[Observable]) -> Result<f64> {
        if observables.len() != self.arity() {
            return Err(Error::Dimension {
                expected: self.arity(),
                got: observables.len(),
            });
        }
        self.factors
            .iter()
            .zip(observables)
            .map(|(space, f)| space.expectation(f))
            .product()
    }

    /// Label of a joint outcome, e.g. `(1,4)`.
    pub fn tuple_label(&self, tuple: &[usize]) -> String {
        let parts: Vec<&str> = tuple
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f.labels()[i].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    /// All outcome tuples in lexicographic order (last factor fastest).
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for f in &self.factors {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..f.len()).map(move |i| {
                        let mut t = prefix.clone();
                        t.push(i);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// The joint space as a flat [`SampleSpace`] with tuple labels.
    pub fn flatten(&self) -> Result<SampleSpace> {
        let tuples = self.tuples();
        let labels: Vec<String> = tuples.iter().map(|t| self.tuple_label(t)).collect();
        let weights = tuples
            .iter()
            .map(|t| self.joint_mass(t))
            .collect::<Result<Vec<_>>>()?;
        SampleSpace::new(labels, weights)
    }

    /// Lifts an event on one factor to the cylinder event on the flat space.
    pub fn cylinder(&self, factor: usize, event: &Event) -> Result<Event> {
        let space = self.factors.get(factor).ok_or(Error::Dimension {
            expected: self.arity(),
            got: factor + 1,
        })?;
        for m in event.members() {
            space.position(m)?;
        }
        Ok(Event::new(
            self.tuples()
                .into_iter()
                .filter(|t| event.contains(&space.labels()[t[factor]]))
                .map(|t| self.tuple_label(&t)),
        ))
    }
}
