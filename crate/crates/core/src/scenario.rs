//! Scenario definitions, validation, and the complete syntactic
//! classification of local-friendliness polytopes.
//!
//! A scenario fixes the number of parties, which of them host a friend,
//! the settings available to each party, and the outcome alphabet of each
//! setting. Setting `1` of a friend party is the query measurement: the
//! party reads its friend's record and reports it as its own outcome.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("non-triviality violation: {0}")]
    NonTrivialityViolation(String),
    #[error("friend index {index} outside 1..={parties}")]
    BadFriendIndex { index: usize, parties: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// A canonical scenario: `parties` space-like separated parties, the subset
/// `friends` of them hosting an observer, per-party setting counts and
/// per-setting outcome counts. Parties, settings and outcomes are 1-based.
#[derive(Clone, Serialize)]
pub struct Scenario {
    parties: usize,
    friends: BTreeSet<usize>,
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    /// Derived scenarios (setting restrictions) may carry single-setting
    /// parties, which user scenarios must not.
    #[serde(default, skip_serializing_if = "is_false")]
    derived: bool,
    /// For derived scenarios: per party, the original setting index each
    /// renumbered setting came from. Never serialized; lifting vertices back
    /// is an in-process operation.
    #[serde(skip)]
    setting_origin: Option<Vec<Vec<usize>>>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Deserialize)]
struct RawScenario {
    parties: usize,
    #[serde(default)]
    friends: Vec<usize>,
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    #[serde(default)]
    derived: bool,
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawScenario::deserialize(deserializer)?;
        Scenario::build(
            raw.parties,
            raw.friends,
            raw.settings,
            raw.outcomes,
            raw.derived,
        )
        .map_err(serde::de::Error::custom)
    }
}

// Mathematical identity of a scenario: the profile and the friend set.
// Provenance (the setting-origin map) does not participate.
impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.parties == other.parties
            && self.friends == other.friends
            && self.settings == other.settings
            && self.outcomes == other.outcomes
    }
}

impl Eq for Scenario {}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Scenario(N={}, friends={:?}, m={:?}, o={:?}{})",
            self.parties,
            self.friends,
            self.settings,
            self.outcomes,
            if self.derived { ", derived" } else { "" }
        )
    }
}

impl Scenario {
    /// Validates a raw description into a scenario, enforcing the
    /// non-triviality assumptions for user scenarios.
    pub fn new(
        parties: usize,
        friends: impl IntoIterator<Item = usize>,
        settings: Vec<usize>,
        outcomes: Vec<Vec<usize>>,
    ) -> Result<Self, ScenarioError> {
        Self::build(parties, friends.into_iter().collect(), settings, outcomes, false)
    }

    /// A scenario where every setting of every party has `o` outcomes.
    pub fn uniform(
        parties: usize,
        friends: impl IntoIterator<Item = usize>,
        settings: Vec<usize>,
        o: usize,
    ) -> Result<Self, ScenarioError> {
        let outcomes = settings.iter().map(|&m| vec![o; m]).collect();
        Self::new(parties, friends, settings, outcomes)
    }

    /// Constructs a derived scenario directly: single-setting parties are
    /// allowed and a lone party may remain after marginalization.
    pub(crate) fn derived(
        parties: usize,
        friends: Vec<usize>,
        settings: Vec<usize>,
        outcomes: Vec<Vec<usize>>,
    ) -> Result<Self, ScenarioError> {
        Self::build(parties, friends, settings, outcomes, true)
    }

    fn build(
        parties: usize,
        friends: Vec<usize>,
        settings: Vec<usize>,
        outcomes: Vec<Vec<usize>>,
        derived: bool,
    ) -> Result<Self, ScenarioError> {
        if settings.len() != parties {
            return Err(ScenarioError::ShapeMismatch(format!(
                "{} parties but {} setting counts",
                parties,
                settings.len()
            )));
        }
        if outcomes.len() != parties {
            return Err(ScenarioError::ShapeMismatch(format!(
                "{} parties but {} outcome lists",
                parties,
                outcomes.len()
            )));
        }
        for (i, (m, os)) in settings.iter().zip(&outcomes).enumerate() {
            if os.len() != *m {
                return Err(ScenarioError::ShapeMismatch(format!(
                    "party {} has {} settings but {} outcome counts",
                    i + 1,
                    m,
                    os.len()
                )));
            }
        }
        let min_parties = if derived { 1 } else { 2 };
        if parties < min_parties {
            return Err(ScenarioError::NonTrivialityViolation(format!(
                "need at least {min_parties} parties, got {parties}"
            )));
        }
        let min_settings = if derived { 1 } else { 2 };
        for (i, &m) in settings.iter().enumerate() {
            if m < min_settings {
                return Err(ScenarioError::NonTrivialityViolation(format!(
                    "party {} has {} settings (minimum {})",
                    i + 1,
                    m,
                    min_settings
                )));
            }
        }
        for (i, os) in outcomes.iter().enumerate() {
            for (x, &o) in os.iter().enumerate() {
                if o < 2 {
                    return Err(ScenarioError::NonTrivialityViolation(format!(
                        "party {} setting {} has {} outcomes (minimum 2)",
                        i + 1,
                        x + 1,
                        o
                    )));
                }
            }
        }
        for &i in &friends {
            if i < 1 || i > parties {
                return Err(ScenarioError::BadFriendIndex { index: i, parties });
            }
        }
        Ok(Scenario {
            parties,
            friends: friends.into_iter().collect(),
            settings,
            outcomes,
            derived,
            setting_origin: None,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn friends(&self) -> &BTreeSet<usize> {
        &self.friends
    }

    pub fn is_friend(&self, party: usize) -> bool {
        self.friends.contains(&party)
    }

    /// Number of settings of `party` (1-based).
    pub fn num_settings(&self, party: usize) -> usize {
        self.settings[party - 1]
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    /// Number of outcomes of `party` at `setting` (both 1-based).
    pub fn num_outcomes(&self, party: usize, setting: usize) -> usize {
        self.outcomes[party - 1][setting - 1]
    }

    pub fn is_derived(&self) -> bool {
        self.derived
    }

    /// For derived scenarios: the original setting a renumbered setting
    /// refers to. Identity on non-derived scenarios.
    pub fn original_setting(&self, party: usize, setting: usize) -> usize {
        match &self.setting_origin {
            Some(map) => map[party - 1][setting - 1],
            None => setting,
        }
    }

    /// All measurement contexts in lexicographic order (party 1 most
    /// significant), each a 1-based setting per party.
    pub fn contexts(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.settings
            .iter()
            .map(|&m| 1..=m)
            .multi_cartesian_product()
    }

    /// All outcome strings of a context in lexicographic order.
    pub fn outcome_strings<'a>(&'a self, context: &[usize]) -> impl Iterator<Item = Vec<usize>> + 'a {
        context
            .iter()
            .enumerate()
            .map(|(i, &x)| 1..=self.num_outcomes(i + 1, x))
            .collect::<Vec<_>>()
            .into_iter()
            .multi_cartesian_product()
    }

    /// Table dimension: the total number of probabilities over all contexts.
    pub fn table_len(&self) -> usize {
        self.contexts()
            .map(|x| {
                x.iter()
                    .enumerate()
                    .map(|(i, &xi)| self.num_outcomes(i + 1, xi))
                    .product::<usize>()
            })
            .sum()
    }

    /// Outcome alphabet sizes of the friends' query measurements, in friend
    /// order.
    pub fn friend_query_alphabets(&self) -> Vec<usize> {
        self.friends.iter().map(|&i| self.num_outcomes(i, 1)).collect()
    }

    /// The friendless public scenario obtained by deleting every friend's
    /// query measurement and renumbering the remaining settings. The result
    /// is flagged as derived (single-setting parties allowed) and records
    /// which original setting each new one refers to.
    pub fn restricted_public_scenario(&self) -> Scenario {
        let mut settings = Vec::with_capacity(self.parties);
        let mut outcomes = Vec::with_capacity(self.parties);
        let mut origin = Vec::with_capacity(self.parties);
        for i in 1..=self.parties {
            let kept: Vec<usize> = if self.is_friend(i) {
                (2..=self.num_settings(i)).collect()
            } else {
                (1..=self.num_settings(i)).collect()
            };
            settings.push(kept.len());
            outcomes.push(kept.iter().map(|&x| self.num_outcomes(i, x)).collect());
            origin.push(kept);
        }
        Scenario {
            parties: self.parties,
            friends: BTreeSet::new(),
            settings,
            outcomes,
            derived: true,
            setting_origin: Some(origin),
        }
    }

    /// Derived scenario keeping only the given settings per party (1-based,
    /// strictly increasing). Used by setting restrictions of behaviours.
    pub(crate) fn with_kept_settings(&self, kept: &[Vec<usize>]) -> Scenario {
        let settings = kept.iter().map(|k| k.len()).collect();
        let outcomes = kept
            .iter()
            .enumerate()
            .map(|(i, k)| k.iter().map(|&x| self.num_outcomes(i + 1, x)).collect())
            .collect();
        // Friend structure survives only if the query measurement does.
        let friends = self
            .friends
            .iter()
            .copied()
            .filter(|&i| kept[i - 1].contains(&1) && kept[i - 1][0] == 1)
            .collect();
        let origin = kept
            .iter()
            .enumerate()
            .map(|(i, k)| {
                k.iter()
                    .map(|&x| self.original_setting(i + 1, x))
                    .collect()
            })
            .collect();
        Scenario {
            parties: self.parties,
            friends,
            settings,
            outcomes,
            derived: true,
            setting_origin: Some(origin),
        }
    }

    /// Scenario with the same public profile but a different friend set.
    pub fn with_friends(
        &self,
        friends: impl IntoIterator<Item = usize>,
    ) -> Result<Scenario, ScenarioError> {
        let friends: Vec<usize> = friends.into_iter().collect();
        for &i in &friends {
            if i < 1 || i > self.parties {
                return Err(ScenarioError::BadFriendIndex {
                    index: i,
                    parties: self.parties,
                });
            }
        }
        let mut s = self.clone();
        s.friends = friends.into_iter().collect();
        Ok(s)
    }

    /// Complete classification of the scenario's polytope hierarchy.
    pub fn classify(&self) -> Classification {
        let n = self.parties;
        let nf = self.friends.len();
        if nf == 0 {
            return Classification::TrivialNoSignalling;
        }
        if nf == n - 1 && self.friends.iter().all(|&i| self.num_settings(i) == 2) {
            return Classification::EqualsBell(EqualsBellRule::SingleFriendlessParty);
        }
        let two_setting_parties = (1..=n).filter(|&i| self.num_settings(i) == 2).count();
        if nf == n && two_setting_parties >= n - 1 {
            return Classification::EqualsBell(EqualsBellRule::AllPartiesHaveFriends);
        }
        let case = if n - nf >= 2 {
            StrictCase::TwoFriendlessParties
        } else if (1..=n).filter(|&i| self.num_settings(i) >= 3).count() >= 2 {
            StrictCase::TwoManySettingParties
        } else {
            // Only leftover: one friendless party and the unique many-setting
            // party hosts a friend.
            StrictCase::ManySettingFriend
        };
        Classification::StrictIntermediate(case)
    }

    /// Relation between the quantum set and the LF polytope.
    pub fn quantum_relation(&self) -> QuantumRelation {
        match self.classify() {
            Classification::TrivialNoSignalling => QuantumRelation::QuantumInsideLF,
            Classification::EqualsBell(_) => QuantumRelation::LFInsideQuantum,
            Classification::StrictIntermediate(_) => QuantumRelation::MutuallyNoninclusive,
        }
    }
}

/// Which hull the LF polytope coincides with, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// No friends: LF equals the no-signalling polytope.
    TrivialNoSignalling,
    /// LF equals the Bell polytope, every LF behaviour has a local model.
    EqualsBell(EqualsBellRule),
    /// Bell strictly inside LF strictly inside no-signalling.
    StrictIntermediate(StrictCase),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EqualsBellRule {
    /// Exactly one party is friendless, every friend has two settings.
    SingleFriendlessParty,
    /// Every party has a friend and at most one has more than two settings.
    AllPartiesHaveFriends,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StrictCase {
    /// Two or more friendless parties.
    TwoFriendlessParties,
    /// Two or more parties with three or more settings.
    TwoManySettingParties,
    /// The unique many-setting party hosts a friend.
    ManySettingFriend,
}

impl Classification {
    pub fn is_equals_bell(&self) -> bool {
        matches!(self, Classification::EqualsBell(_))
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Classification::TrivialNoSignalling)
    }

    pub fn is_strict_intermediate(&self) -> bool {
        matches!(self, Classification::StrictIntermediate(_))
    }

    /// Tag name without the triggering rule.
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::TrivialNoSignalling => "TrivialNoSignalling",
            Classification::EqualsBell(_) => "EqualsBell",
            Classification::StrictIntermediate(_) => "StrictIntermediate",
        }
    }

    /// Human-readable statement of the rule that fired.
    pub fn rule_description(&self) -> &'static str {
        match self {
            Classification::TrivialNoSignalling => "no friends, LF coincides with no-signalling",
            Classification::EqualsBell(EqualsBellRule::SingleFriendlessParty) => {
                "single friendless party and every friend has two settings"
            }
            Classification::EqualsBell(EqualsBellRule::AllPartiesHaveFriends) => {
                "every party has a friend and at most one has more than two settings"
            }
            Classification::StrictIntermediate(StrictCase::TwoFriendlessParties) => {
                "two or more friendless parties"
            }
            Classification::StrictIntermediate(StrictCase::TwoManySettingParties) => {
                "two or more parties with three or more settings"
            }
            Classification::StrictIntermediate(StrictCase::ManySettingFriend) => {
                "the unique many-setting party hosts a friend"
            }
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.tag(), self.rule_description())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuantumRelation {
    /// Quantum strictly inside LF = NS.
    QuantumInsideLF,
    /// Bell = LF strictly inside quantum.
    LFInsideQuantum,
    /// Neither set contains the other.
    MutuallyNoninclusive,
}

/// Inclusion relation between the LF polytopes of two friend sets over the
/// same public scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SetRelation {
    pub tag: SetRelationTag,
    /// Whether both sides coincide with the Bell polytope.
    pub both_bell: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetRelationTag {
    Equal,
    /// LF with the first friend set is a strict subset of LF with the second.
    LeftStrictSubset,
    RightStrictSubset,
    Incomparable,
}

impl fmt::Display for SetRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            SetRelationTag::Equal if self.both_bell => write!(f, "Equal (both at the Bell polytope)"),
            SetRelationTag::Equal => write!(f, "Equal"),
            SetRelationTag::LeftStrictSubset => write!(f, "LeftStrictSubset (first is strictly smaller)"),
            SetRelationTag::RightStrictSubset => write!(f, "RightStrictSubset (second is strictly smaller)"),
            SetRelationTag::Incomparable => write!(f, "Incomparable (neither contains the other)"),
        }
    }
}

/// Compares the LF polytopes obtained from the same public scenario with
/// friend sets `f1` and `f2`. Friend information already present on
/// `public` is ignored.
pub fn compare_friend_sets(
    public: &Scenario,
    f1: impl IntoIterator<Item = usize>,
    f2: impl IntoIterator<Item = usize>,
) -> Result<SetRelation, ScenarioError> {
    let s1 = public.with_friends(f1)?;
    let s2 = public.with_friends(f2)?;
    let (c1, c2) = (s1.classify(), s2.classify());
    let both_bell = c1.is_equals_bell() && c2.is_equals_bell();
    let f1 = s1.friends();
    let f2 = s2.friends();

    let tag = if f1 == f2 {
        SetRelationTag::Equal
    } else if f2.is_subset(f1) {
        // More friends never enlarge the polytope; equality exactly when
        // both already sit at the Bell polytope.
        if both_bell {
            SetRelationTag::Equal
        } else {
            SetRelationTag::LeftStrictSubset
        }
    } else if f1.is_subset(f2) {
        if both_bell {
            SetRelationTag::Equal
        } else {
            SetRelationTag::RightStrictSubset
        }
    } else {
        // Partly disjoint friend sets.
        if both_bell {
            SetRelationTag::Equal
        } else if c1.is_equals_bell() {
            SetRelationTag::LeftStrictSubset
        } else if c2.is_equals_bell() {
            SetRelationTag::RightStrictSubset
        } else {
            SetRelationTag::Incomparable
        }
    };
    Ok(SetRelation { tag, both_bell })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal() -> Scenario {
        Scenario::uniform(2, [1], vec![2, 2], 2).unwrap()
    }

    #[test]
    fn validates_minimal_scenario() {
        let s = minimal();
        assert_eq!(s.parties(), 2);
        assert_eq!(s.table_len(), 16);
        assert!(s.is_friend(1));
        assert!(!s.is_friend(2));
    }

    #[test]
    fn rejects_bad_friend_index() {
        let err = Scenario::uniform(2, [3], vec![2, 2], 2).unwrap_err();
        assert_eq!(err, ScenarioError::BadFriendIndex { index: 3, parties: 2 });
    }

    #[test]
    fn rejects_trivial_parameters() {
        assert!(matches!(
            Scenario::uniform(1, [], vec![2], 2),
            Err(ScenarioError::NonTrivialityViolation(_))
        ));
        assert!(matches!(
            Scenario::uniform(2, [], vec![1, 2], 2),
            Err(ScenarioError::NonTrivialityViolation(_))
        ));
        assert!(matches!(
            Scenario::uniform(2, [], vec![2, 2], 1),
            Err(ScenarioError::NonTrivialityViolation(_))
        ));
    }

    #[test]
    fn restriction_deletes_query_measurements() {
        let s = minimal();
        let r = s.restricted_public_scenario();
        assert_eq!(r.settings(), &[1, 2]);
        assert!(r.friends().is_empty());
        assert!(r.is_derived());
        assert_eq!(r.original_setting(1, 1), 2);
        assert_eq!(r.original_setting(2, 1), 1);

        // Superobservers 1 and 2 have a friend; party 3 does not.
        let s = Scenario::uniform(3, [1, 2], vec![3, 4, 2], 2).unwrap();
        let r = s.restricted_public_scenario();
        assert_eq!(r.settings(), &[2, 3, 2]);
        assert_eq!(r.original_setting(1, 2), 3);
        assert_eq!(r.original_setting(3, 2), 2);

        // Nothing to delete without friends.
        let s = Scenario::uniform(2, [], vec![2, 3], 2).unwrap();
        let r = s.restricted_public_scenario();
        assert_eq!(r.settings(), s.settings());
        assert_eq!(r, s);
    }

    #[test]
    fn classification_matches_known_cases() {
        use Classification::*;
        for n in 2..=6 {
            let s = Scenario::uniform(2, [1], vec![2, n], 2).unwrap();
            assert_eq!(s.classify(), EqualsBell(EqualsBellRule::SingleFriendlessParty));
        }
        let s = Scenario::uniform(2, [1, 2], vec![3, 3], 2).unwrap();
        assert!(s.classify().is_strict_intermediate());
        let s = Scenario::uniform(3, [], vec![2, 2, 2], 2).unwrap();
        assert_eq!(s.classify(), TrivialNoSignalling);
        let s = Scenario::uniform(3, [1, 2, 3], vec![2, 2, 2], 2).unwrap();
        assert_eq!(s.classify(), EqualsBell(EqualsBellRule::AllPartiesHaveFriends));
        let s = Scenario::uniform(3, [1], vec![2, 2, 2], 2).unwrap();
        assert_eq!(
            s.classify(),
            StrictIntermediate(StrictCase::TwoFriendlessParties)
        );
        // The unique many-setting party hosting the friend spoils equality.
        let s = Scenario::uniform(2, [1], vec![3, 2], 2).unwrap();
        assert_eq!(
            s.classify(),
            StrictIntermediate(StrictCase::ManySettingFriend)
        );
    }

    #[test]
    fn quantum_relation_follows_classification() {
        let s = Scenario::uniform(3, [], vec![2, 2, 2], 2).unwrap();
        assert_eq!(s.quantum_relation(), QuantumRelation::QuantumInsideLF);
        assert_eq!(minimal().quantum_relation(), QuantumRelation::LFInsideQuantum);
        let s = Scenario::uniform(2, [1, 2], vec![3, 3], 2).unwrap();
        assert_eq!(s.quantum_relation(), QuantumRelation::MutuallyNoninclusive);
    }

    #[test]
    fn friend_set_comparison() {
        let tri = Scenario::uniform(3, [], vec![2, 2, 2], 2).unwrap();
        // Nested sets, both at Bell.
        let r = compare_friend_sets(&tri, [1, 2, 3], [1, 2]).unwrap();
        assert_eq!(r.tag, SetRelationTag::Equal);
        assert!(r.both_bell);
        // Disjoint friend sets in the two-setting bipartite scenario meet
        // at the Bell polytope.
        let bi = Scenario::uniform(2, [], vec![2, 2], 2).unwrap();
        let r = compare_friend_sets(&bi, [1], [2]).unwrap();
        assert_eq!(r.tag, SetRelationTag::Equal);
        assert!(r.both_bell);
        // With three settings everywhere the disjoint polytopes are
        // mutually non-inclusive.
        let tri3 = Scenario::uniform(3, [], vec![3, 3, 3], 2).unwrap();
        let r = compare_friend_sets(&tri3, [1], [2]).unwrap();
        assert_eq!(r.tag, SetRelationTag::Incomparable);
        // Dropping a friend can only grow the polytope.
        let r = compare_friend_sets(&tri3, [1, 2], [1]).unwrap();
        assert_eq!(r.tag, SetRelationTag::LeftStrictSubset);
        // Identical sets are always equal.
        let r = compare_friend_sets(&tri3, [2], [2]).unwrap();
        assert_eq!(r.tag, SetRelationTag::Equal);
        assert!(!r.both_bell);
    }

    #[test]
    fn monotonicity_never_reports_right_subset_for_nested_sets() {
        // Scan every scenario with up to 3 parties and up to 3 settings.
        for scenario in all_small_scenarios() {
            let public = scenario.with_friends([]).unwrap();
            let friends: Vec<usize> = scenario.friends().iter().copied().collect();
            for sub in friends.iter().copied().powerset() {
                let r = compare_friend_sets(&public, friends.clone(), sub).unwrap();
                assert!(
                    r.tag != SetRelationTag::RightStrictSubset
                        && r.tag != SetRelationTag::Incomparable,
                    "nested friend sets must not invert or diverge: {scenario:?}"
                );
            }
        }
    }

    #[test]
    fn adding_friends_preserves_equals_bell() {
        for scenario in all_small_scenarios() {
            if !scenario.classify().is_equals_bell() {
                continue;
            }
            let n = scenario.parties();
            let friends: Vec<usize> = scenario.friends().iter().copied().collect();
            for extra in 1..=n {
                if friends.contains(&extra) {
                    continue;
                }
                let mut grown = friends.clone();
                grown.push(extra);
                let bigger = scenario.with_friends(grown).unwrap();
                assert!(
                    bigger.classify().is_equals_bell(),
                    "adding a friend to {scenario:?} left EqualsBell"
                );
            }
        }
    }

    pub(crate) fn all_small_scenarios() -> Vec<Scenario> {
        let mut out = Vec::new();
        for n in 2..=3usize {
            let setting_choices = vec![vec![2usize, 3]; n];
            for m in setting_choices.into_iter().multi_cartesian_product() {
                for friends in (1..=n).powerset() {
                    out.push(Scenario::uniform(n, friends, m.clone(), 2).unwrap());
                }
            }
        }
        out
    }
}
