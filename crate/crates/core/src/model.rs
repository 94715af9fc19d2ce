//! Domain types shared by the hidden-variable, quantum and simulation layers.
//!
//! A photon pair is measured on two sides. Side 1 is probed along the
//! directions `a`, `a'` and `b`; side 2 along `b`, `b'` and `a'`. Those six
//! (side, direction) slots are the only ones the extended functional reads.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A linear-polarizer direction in radians, canonicalized to `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::NonFiniteAngle(radians));
        }
        let mut r = radians.rem_euclid(PI);
        // rem_euclid can round up to exactly π for tiny negative inputs.
        if r >= PI {
            r = 0.0;
        }
        Ok(Angle(r))
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Direction difference `self - other`, again canonicalized.
    pub fn difference(self, other: Angle) -> Angle {
        Angle::new(self.0 - other.0).expect("difference of finite angles is finite")
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Angle::new(value)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Side1,
    Side2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    A,
    Aprime,
    B,
    Bprime,
}

impl Label {
    fn symbol(self) -> &'static str {
        match self {
            Label::A => "a",
            Label::Aprime => "a'",
            Label::B => "b",
            Label::Bprime => "b'",
        }
    }
}

/// One detector slot: a side together with the direction it is probed along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSetting")]
pub struct Setting {
    side: Side,
    label: Label,
}

#[derive(Deserialize)]
struct RawSetting {
    side: Side,
    label: Label,
}

impl TryFrom<RawSetting> for Setting {
    type Error = Error;
    fn try_from(raw: RawSetting) -> Result<Self> {
        Setting::new(raw.side, raw.label)
    }
}

impl Setting {
    pub const S1_A: Setting = Setting { side: Side::Side1, label: Label::A };
    pub const S1_APRIME: Setting = Setting { side: Side::Side1, label: Label::Aprime };
    pub const S1_B: Setting = Setting { side: Side::Side1, label: Label::B };
    pub const S2_B: Setting = Setting { side: Side::Side2, label: Label::B };
    pub const S2_BPRIME: Setting = Setting { side: Side::Side2, label: Label::Bprime };
    pub const S2_APRIME: Setting = Setting { side: Side::Side2, label: Label::Aprime };

    /// The six slots in storage order; `index()` is the position in this array.
    pub const ALL: [Setting; 6] = [
        Self::S1_A,
        Self::S1_APRIME,
        Self::S1_B,
        Self::S2_B,
        Self::S2_BPRIME,
        Self::S2_APRIME,
    ];

    pub fn new(side: Side, label: Label) -> Result<Self> {
        let ok = match side {
            Side::Side1 => matches!(label, Label::A | Label::Aprime | Label::B),
            Side::Side2 => matches!(label, Label::B | Label::Bprime | Label::Aprime),
        };
        if ok {
            Ok(Setting { side, label })
        } else {
            Err(Error::InvalidSetting { side, label })
        }
    }

    pub fn side(self) -> Side {
        self.side
    }

    pub fn label(self) -> Label {
        self.label
    }

    pub fn index(self) -> usize {
        match (self.side, self.label) {
            (Side::Side1, Label::A) => 0,
            (Side::Side1, Label::Aprime) => 1,
            (Side::Side1, Label::B) => 2,
            (Side::Side2, Label::B) => 3,
            (Side::Side2, Label::Bprime) => 4,
            (Side::Side2, Label::Aprime) => 5,
            _ => unreachable!("constructor rejects {:?}", self),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Side1 => 1,
            Side::Side2 => 2,
        };
        write!(f, "{}@{}", side, self.label.symbol())
    }
}

/// Per-photon measurement result. `NoDetect` is the missing-click outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
    NoDetect,
}

impl Outcome {
    /// Row/column order used by outcome tables and count matrices.
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::NoDetect];

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::NoDetect => 2,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Outcome> {
        match sign {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
            Outcome::NoDetect => "0",
        }
    }
}

/// The pair of registered results `(r, q)`, each `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSelector")]
pub struct OutcomeSelector {
    r: i8,
    q: i8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSelector {
    r: i8,
    q: i8,
}

impl TryFrom<RawSelector> for OutcomeSelector {
    type Error = Error;
    fn try_from(raw: RawSelector) -> Result<Self> {
        OutcomeSelector::new(raw.r, raw.q)
    }
}

impl Default for OutcomeSelector {
    fn default() -> Self {
        OutcomeSelector { r: 1, q: 1 }
    }
}

impl OutcomeSelector {
    pub const ALL: [OutcomeSelector; 4] = [
        OutcomeSelector { r: 1, q: 1 },
        OutcomeSelector { r: 1, q: -1 },
        OutcomeSelector { r: -1, q: 1 },
        OutcomeSelector { r: -1, q: -1 },
    ];

    pub fn new(r: i8, q: i8) -> Result<Self> {
        if (r == 1 || r == -1) && (q == 1 || q == -1) {
            Ok(OutcomeSelector { r, q })
        } else {
            Err(Error::InvalidSelector(r, q))
        }
    }

    pub fn r(self) -> i8 {
        self.r
    }

    pub fn q(self) -> i8 {
        self.q
    }

    pub fn r_outcome(self) -> Outcome {
        Outcome::from_sign(self.r).expect("validated sign")
    }

    pub fn q_outcome(self) -> Outcome {
        Outcome::from_sign(self.q).expect("validated sign")
    }
}

impl fmt::Display for OutcomeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: i8| if v > 0 { '+' } else { '-' };
        write!(f, "{}{}", s(self.r), s(self.q))
    }
}

/// Detection probabilities for one slot; the non-detection probability is
/// `1 - p_plus - p_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleProbs {
    pub p_plus: f64,
    pub p_minus: f64,
}

impl SingleProbs {
    pub const NONE: SingleProbs = SingleProbs { p_plus: 0.0, p_minus: 0.0 };

    fn is_valid(self) -> bool {
        self.p_plus.is_finite()
            && self.p_minus.is_finite()
            && self.p_plus >= 0.0
            && self.p_minus >= 0.0
            && self.p_plus + self.p_minus <= 1.0 + 1e-15
    }
}

/// Single-photon response probabilities at one value of the hidden variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglesAssignment {
    slots: [SingleProbs; 6],
}

impl SinglesAssignment {
    /// Every slot fails to detect.
    pub fn silent() -> Self {
        SinglesAssignment { slots: [SingleProbs::NONE; 6] }
    }

    /// Builds from `(p_plus, p_minus)` per slot, in [`Setting::ALL`] order.
    pub fn new(slots: [(f64, f64); 6]) -> Result<Self> {
        let mut out = Self::silent();
        for (setting, (p_plus, p_minus)) in Setting::ALL.into_iter().zip(slots) {
            out = out.with(setting, p_plus, p_minus)?;
        }
        Ok(out)
    }

    pub fn with(mut self, setting: Setting, p_plus: f64, p_minus: f64) -> Result<Self> {
        let probs = SingleProbs { p_plus, p_minus };
        if !probs.is_valid() {
            return Err(Error::InvalidProbabilities {
                setting: setting.to_string(),
                p_plus,
                p_minus,
            });
        }
        self.slots[setting.index()] = probs;
        Ok(self)
    }

    pub fn get(&self, setting: Setting) -> SingleProbs {
        self.slots[setting.index()]
    }

    /// Probability of `outcome` at `setting`; `NoDetect` yields `p0`.
    pub fn prob(&self, setting: Setting, outcome: Outcome) -> f64 {
        let s = self.get(setting);
        match outcome {
            Outcome::Plus => s.p_plus,
            Outcome::Minus => s.p_minus,
            Outcome::NoDetect => 1.0 - s.p_plus - s.p_minus,
        }
    }
}

/// Deterministic hidden-variable response: each slot definitely fires `+`,
/// fires `-`, or stays silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexStrategy {
    trits: [Outcome; 6],
}

impl VertexStrategy {
    pub fn new(trits: [Outcome; 6]) -> Self {
        VertexStrategy { trits }
    }

    pub fn trit(&self, setting: Setting) -> Outcome {
        self.trits[setting.index()]
    }

    pub fn trits(&self) -> [Outcome; 6] {
        self.trits
    }

    pub fn to_assignment(&self) -> SinglesAssignment {
        let mut slots = [SingleProbs::NONE; 6];
        for (slot, trit) in slots.iter_mut().zip(self.trits) {
            *slot = match trit {
                Outcome::Plus => SingleProbs { p_plus: 1.0, p_minus: 0.0 },
                Outcome::Minus => SingleProbs { p_plus: 0.0, p_minus: 1.0 },
                Outcome::NoDetect => SingleProbs::NONE,
            };
        }
        SinglesAssignment { slots }
    }
}

impl fmt::Display for VertexStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, setting) in Setting::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}={}", setting, self.trit(*setting).symbol())?;
        }
        Ok(())
    }
}

/// Weighted mixture of hidden-variable assignments; stands in for `ρ(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, SinglesAssignment)>,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-12;

impl Ensemble {
    pub fn new(members: Vec<(f64, SinglesAssignment)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidEnsemble("no members".into()));
        }
        if let Some((w, _)) = members.iter().find(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidEnsemble(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}, expected 1")));
        }
        Ok(Ensemble { members })
    }

    /// Rescales nonnegative weights so they sum to one.
    pub fn normalized(members: Vec<(f64, SinglesAssignment)>) -> Result<Self> {
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidEnsemble(format!("cannot normalize total weight {total}")));
        }
        Self::new(members.into_iter().map(|(w, a)| (w / total, a)).collect())
    }

    pub fn point_mass(assignment: SinglesAssignment) -> Self {
        Ensemble { members: vec![(1.0, assignment)] }
    }

    pub fn members(&self) -> &[(f64, SinglesAssignment)] {
        &self.members
    }
}

/// A (side-1 slot, side-2 slot) pair whose joint statistics are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SettingPair {
    s1: Setting,
    s2: Setting,
}

impl SettingPair {
    /// The six pairs of the extended functional, in term order.
    pub const AUDITED: [SettingPair; 6] = [
        SettingPair { s1: Setting::S1_A, s2: Setting::S2_B },
        SettingPair { s1: Setting::S1_A, s2: Setting::S2_BPRIME },
        SettingPair { s1: Setting::S1_APRIME, s2: Setting::S2_B },
        SettingPair { s1: Setting::S1_APRIME, s2: Setting::S2_BPRIME },
        SettingPair { s1: Setting::S1_APRIME, s2: Setting::S2_APRIME },
        SettingPair { s1: Setting::S1_B, s2: Setting::S2_B },
    ];

    pub fn new(s1: Setting, s2: Setting) -> Result<Self> {
        if s1.side() != Side::Side1 || s2.side() != Side::Side2 {
            return Err(Error::InvalidPair(s1.side(), s2.side()));
        }
        Ok(SettingPair { s1, s2 })
    }

    pub fn s1(self) -> Setting {
        self.s1
    }

    pub fn s2(self) -> Setting {
        self.s2
    }

    /// Short machine-friendly label, e.g. `a_bprime`.
    pub fn label(self) -> String {
        let name = |l: Label| match l {
            Label::A => "a",
            Label::Aprime => "aprime",
            Label::B => "b",
            Label::Bprime => "bprime",
        };
        format!("{}_{}", name(self.s1.label()), name(self.s2.label()))
    }
}

/// The four polarizer directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AngleConfig {
    pub a: Angle,
    pub b: Angle,
    pub a_prime: Angle,
    pub b_prime: Angle,
}

impl AngleConfig {
    /// Directions with `|a-b| = |a'-b| = |a'-b'| = φ/2` and `|a-b'| = 3φ/2`
    /// (modulo π): `a = 0`, `b = φ/2`, `a' = φ`, `b' = 3φ/2`.
    pub fn from_phi(phi: f64) -> Result<Self> {
        Ok(AngleConfig {
            a: Angle::new(0.0)?,
            b: Angle::new(0.5 * phi)?,
            a_prime: Angle::new(phi)?,
            b_prime: Angle::new(1.5 * phi)?,
        })
    }

    pub fn direction(&self, label: Label) -> Angle {
        match label {
            Label::A => self.a,
            Label::Aprime => self.a_prime,
            Label::B => self.b,
            Label::Bprime => self.b_prime,
        }
    }

    /// Direction difference `x̂₁ - x̂₂` for a measured pair.
    pub fn pair_difference(&self, pair: SettingPair) -> Angle {
        self.direction(pair.s1().label())
            .difference(self.direction(pair.s2().label()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_is_canonical_mod_pi() {
        let a = Angle::new(-0.25 * PI).unwrap();
        assert!((a.radians() - 0.75 * PI).abs() < 1e-15);
        assert_eq!(Angle::new(PI).unwrap().radians(), 0.0);
        assert_eq!(Angle::new(-1e-300).unwrap().radians(), 0.0);
        assert!(Angle::new(f64::NAN).is_err());
        assert!(Angle::new(f64::INFINITY).is_err());
        assert!((Angle::from_degrees(190.0).unwrap().radians() - 10f64.to_radians()).abs() < 1e-14);
    }

    #[test]
    fn settings_are_restricted_per_side() {
        assert!(Setting::new(Side::Side1, Label::Bprime).is_err());
        assert!(Setting::new(Side::Side2, Label::A).is_err());
        for (i, s) in Setting::ALL.iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(Setting::new(s.side(), s.label()).unwrap(), *s);
        }
    }

    #[test]
    fn pairs_must_go_side1_to_side2() {
        assert!(SettingPair::new(Setting::S2_B, Setting::S1_A).is_err());
        assert!(SettingPair::new(Setting::S1_A, Setting::S1_B).is_err());
        let p = SettingPair::new(Setting::S1_APRIME, Setting::S2_BPRIME).unwrap();
        assert_eq!(p, SettingPair::AUDITED[3]);
        assert_eq!(p.label(), "aprime_bprime");
    }

    #[test]
    fn selector_validation() {
        assert!(OutcomeSelector::new(0, 1).is_err());
        assert!(OutcomeSelector::new(1, 2).is_err());
        assert_eq!(OutcomeSelector::default().to_string(), "++");
        let sel = OutcomeSelector::new(-1, 1).unwrap();
        assert_eq!(sel.r_outcome(), Outcome::Minus);
        assert_eq!(sel.q_outcome(), Outcome::Plus);
    }

    #[test]
    fn assignment_rejects_overfull_slot() {
        let err = SinglesAssignment::silent().with(Setting::S1_A, 0.7, 0.4);
        assert!(matches!(err, Err(Error::InvalidProbabilities { .. })));
        assert!(SinglesAssignment::silent().with(Setting::S1_A, -0.1, 0.0).is_err());
        assert!(SinglesAssignment::silent().with(Setting::S1_A, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn ensemble_weights_validated() {
        let a = SinglesAssignment::silent();
        assert!(Ensemble::new(vec![]).is_err());
        assert!(Ensemble::new(vec![(0.5, a)]).is_err());
        assert!(Ensemble::new(vec![(1.5, a), (-0.5, a)]).is_err());
        assert!(Ensemble::new(vec![(0.5, a), (0.5, a)]).is_ok());
        let e = Ensemble::normalized(vec![(2.0, a), (6.0, a)]).unwrap();
        assert_eq!(e.members()[0].0, 0.25);
        assert!(Ensemble::normalized(vec![(0.0, a)]).is_err());
    }

    #[test]
    fn phi_configuration_differences() {
        let phi = 0.3;
        let cfg = AngleConfig::from_phi(phi).unwrap();
        let d = |p: SettingPair| {
            let r = cfg.pair_difference(p).radians();
            r.min(PI - r)
        };
        let [ab, abp, apb, apbp, apap, bb] = SettingPair::AUDITED;
        assert!((d(ab) - phi / 2.0).abs() < 1e-15);
        assert!((d(apb) - phi / 2.0).abs() < 1e-15);
        assert!((d(apbp) - phi / 2.0).abs() < 1e-15);
        assert!((d(abp) - 1.5 * phi).abs() < 1e-15);
        assert_eq!(d(apap), 0.0);
        assert_eq!(d(bb), 0.0);
    }
}
