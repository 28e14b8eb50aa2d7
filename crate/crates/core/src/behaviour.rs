//! Exact-rational behaviour tables and the maps between them.
//!
//! A behaviour stores one conditional outcome distribution per measurement
//! context as a flat vector. The index order is fixed crate-wide: contexts
//! are ordered lexicographically by the setting string (party 1 most
//! significant), and within a context outcome strings are ordered
//! lexicographically the same way.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::polytopes::Inequality;
use crate::rational::Rat;
use crate::scenario::Scenario;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BehaviourError {
    #[error("entry {index} is negative")]
    NegativeEntry { index: usize },
    #[error("context {context:?} sums to {sum} instead of 1")]
    NormalizationFailure { context: Vec<usize>, sum: String },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input behaviour is signalling: {0}")]
    SignallingInput(NsViolation),
    #[error("empty setting restriction for party {party}")]
    EmptyRestriction { party: usize },
    #[error("party {party} has no setting {setting}")]
    InvalidSetting { party: usize, setting: usize },
    #[error("cannot exclude all parties")]
    NoPartiesLeft,
    #[error("relabeling breaks the friend structure: {0}")]
    FriendStructureViolation(String),
    #[error("invalid relabeling: {0}")]
    RelabelInvalid(String),
    #[error("inequality has dimension {expected}, behaviour has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad mixture weights: {0}")]
    BadWeights(String),
    #[error("bad deterministic strategy: {0}")]
    BadStrategy(String),
    #[error("behaviours live on different scenarios")]
    ScenarioMismatch,
    #[error("the PR box needs a bipartite scenario with 2 settings and 2 outcomes everywhere")]
    PrBoxShape,
}

/// Witness of a no-signalling violation: the marginal of `party` differs
/// between two contexts that agree everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NsViolation {
    pub party: usize,
    pub context_a: Vec<usize>,
    pub context_b: Vec<usize>,
}

impl fmt::Display for NsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "party {} marginal differs between contexts {:?} and {:?}",
            self.party, self.context_a, self.context_b
        )
    }
}

/// Flat-index bookkeeping for a scenario's behaviour table.
#[derive(Clone, Debug)]
pub(crate) struct Indexer {
    contexts: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    len: usize,
}

impl Indexer {
    pub fn new(scenario: &Scenario) -> Self {
        let contexts: Vec<Vec<usize>> = scenario.contexts().collect();
        let mut offsets = Vec::with_capacity(contexts.len());
        let mut len = 0;
        for x in &contexts {
            offsets.push(len);
            len += block_len(scenario, x);
        }
        Indexer {
            contexts,
            offsets,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn context_rank(&self, scenario: &Scenario, x: &[usize]) -> usize {
        let mut rank = 0;
        for (i, &xi) in x.iter().enumerate() {
            rank = rank * scenario.num_settings(i + 1) + (xi - 1);
        }
        rank
    }

    pub fn offset(&self, rank: usize) -> usize {
        self.offsets[rank]
    }

    pub fn entry_index(&self, scenario: &Scenario, x: &[usize], a: &[usize]) -> usize {
        let rank = self.context_rank(scenario, x);
        let mut inner = 0;
        for (i, (&xi, &ai)) in x.iter().zip(a).enumerate() {
            inner = inner * scenario.num_outcomes(i + 1, xi) + (ai - 1);
        }
        self.offsets[rank] + inner
    }
}

fn block_len(scenario: &Scenario, x: &[usize]) -> usize {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| scenario.num_outcomes(i + 1, xi))
        .product()
}

/// An exact-rational behaviour: one probability table per context.
#[derive(Clone, Serialize)]
pub struct Behaviour {
    scenario: Scenario,
    entries: Vec<Rat>,
    #[serde(skip)]
    index: IndexCell,
}

// Lazily rebuilt after deserialization; otherwise constructed with the table.
#[derive(Clone, Default)]
struct IndexCell(std::sync::OnceLock<Indexer>);

impl Behaviour {
    /// Validates a flat entry vector into a behaviour.
    pub fn new(scenario: Scenario, entries: Vec<Rat>) -> Result<Self, BehaviourError> {
        let index = Indexer::new(&scenario);
        if entries.len() != index.len() {
            return Err(BehaviourError::LengthMismatch {
                expected: index.len(),
                got: entries.len(),
            });
        }
        for (i, e) in entries.iter().enumerate() {
            if e.is_negative() {
                return Err(BehaviourError::NegativeEntry { index: i });
            }
        }
        for (rank, x) in index.contexts().iter().enumerate() {
            let start = index.offset(rank);
            let sum: Rat = entries[start..start + block_len(&scenario, x)].iter().sum();
            if sum != Rat::one() {
                return Err(BehaviourError::NormalizationFailure {
                    context: x.clone(),
                    sum: sum.to_string(),
                });
            }
        }
        let cell = IndexCell::default();
        let _ = cell.0.set(index);
        Ok(Behaviour {
            scenario,
            entries,
            index: cell,
        })
    }

    /// Builds a behaviour by evaluating `f` on every (context, outcome) pair
    /// in index order, then validating.
    pub fn from_fn(
        scenario: Scenario,
        mut f: impl FnMut(&[usize], &[usize]) -> Rat,
    ) -> Result<Self, BehaviourError> {
        let mut entries = Vec::new();
        for x in scenario.contexts() {
            for a in scenario.outcome_strings(&x) {
                entries.push(f(&x, &a));
            }
        }
        Behaviour::new(scenario, entries)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn indexer(&self) -> &Indexer {
        self.index.0.get_or_init(|| Indexer::new(&self.scenario))
    }

    /// Probability of outcome string `a` in context `x` (both 1-based).
    pub fn entry(&self, x: &[usize], a: &[usize]) -> &Rat {
        let idx = self.indexer().entry_index(&self.scenario, x, a);
        &self.entries[idx]
    }

    /// First no-signalling violation, if any.
    pub fn no_signalling_violation(&self) -> Option<NsViolation> {
        let n = self.scenario.parties();
        for party in 1..=n {
            // Group contexts by the other parties' settings; all groups share
            // the same reduced outcome shape, so marginals compare entrywise.
            let mut rest_settings: Vec<Vec<usize>> = Vec::new();
            for (i, m) in self.scenario.settings().iter().enumerate() {
                if i + 1 != party {
                    rest_settings.push((1..=*m).collect());
                }
            }
            use itertools::Itertools;
            for rest in rest_settings.into_iter().multi_cartesian_product() {
                let mut reference: Option<(Vec<usize>, Vec<Rat>)> = None;
                for xi in 1..=self.scenario.num_settings(party) {
                    let context = splice(&rest, party, xi);
                    let marg = self.marginal_over_party(&context, party);
                    match &reference {
                        None => reference = Some((context, marg)),
                        Some((ref_ctx, ref_marg)) => {
                            if *ref_marg != marg {
                                return Some(NsViolation {
                                    party,
                                    context_a: ref_ctx.clone(),
                                    context_b: context,
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_no_signalling(&self) -> bool {
        self.no_signalling_violation().is_none()
    }

    /// Marginal table over all parties except `party`, in lexicographic
    /// order of the remaining outcome string.
    fn marginal_over_party(&self, context: &[usize], party: usize) -> Vec<Rat> {
        let shape: Vec<usize> = context
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != party)
            .map(|(i, &x)| self.scenario.num_outcomes(i + 1, x))
            .collect();
        let mut marg = vec![Rat::zero(); shape.iter().product::<usize>().max(1)];
        for a in self.scenario.outcome_strings(context) {
            let mut rank = 0;
            let mut k = 0;
            for (i, &ai) in a.iter().enumerate() {
                if i + 1 != party {
                    rank = rank * shape[k] + (ai - 1);
                    k += 1;
                }
            }
            marg[rank] += self.entry(context, &a);
        }
        marg
    }

    /// Sums out the `excluded` parties, producing a behaviour on the reduced
    /// scenario. Requires no-signalling; the marginal is computed with the
    /// excluded parties' settings fixed to 1 and cross-checked against the
    /// highest settings.
    pub fn marginalize_parties(
        &self,
        excluded: &BTreeSet<usize>,
    ) -> Result<Behaviour, BehaviourError> {
        if let Some(v) = self.no_signalling_violation() {
            return Err(BehaviourError::SignallingInput(v));
        }
        let n = self.scenario.parties();
        let kept: Vec<usize> = (1..=n).filter(|i| !excluded.contains(i)).collect();
        if kept.is_empty() {
            return Err(BehaviourError::NoPartiesLeft);
        }
        let low = self.marginalized_table(&kept, |_| 1);
        let high = self.marginalized_table(&kept, |i| self.scenario.num_settings(i));
        assert_eq!(low, high, "no-signalling guarantees setting-independent marginals");

        let settings = kept.iter().map(|&i| self.scenario.num_settings(i)).collect();
        let outcomes = kept
            .iter()
            .map(|&i| {
                (1..=self.scenario.num_settings(i))
                    .map(|x| self.scenario.num_outcomes(i, x))
                    .collect()
            })
            .collect();
        let friends: Vec<usize> = kept
            .iter()
            .enumerate()
            .filter(|(_, &old)| self.scenario.is_friend(old))
            .map(|(new_idx, _)| new_idx + 1)
            .collect();
        let reduced = Scenario::derived(kept.len(), friends, settings, outcomes)
            .expect("reduced profile is valid");
        Behaviour::new(reduced, low)
    }

    fn marginalized_table(&self, kept: &[usize], fixed: impl Fn(usize) -> usize) -> Vec<Rat> {
        let n = self.scenario.parties();
        let mut out = Vec::new();
        use itertools::Itertools;
        let kept_contexts = kept
            .iter()
            .map(|&i| 1..=self.scenario.num_settings(i))
            .multi_cartesian_product();
        for kx in kept_contexts {
            // Full context: kept parties as chosen, excluded parties fixed.
            let mut full = vec![0usize; n];
            for (k, &i) in kept.iter().enumerate() {
                full[i - 1] = kx[k];
            }
            for i in 1..=n {
                if full[i - 1] == 0 {
                    full[i - 1] = fixed(i);
                }
            }
            let shape: Vec<usize> = kept
                .iter()
                .zip(&kx)
                .map(|(&i, &x)| self.scenario.num_outcomes(i, x))
                .collect();
            let mut block = vec![Rat::zero(); shape.iter().product()];
            for a in self.scenario.outcome_strings(&full) {
                let mut rank = 0;
                for (k, &i) in kept.iter().enumerate() {
                    rank = rank * shape[k] + (a[i - 1] - 1);
                }
                block[rank] += self.entry(&full, &a);
            }
            out.extend(block);
        }
        out
    }

    /// Keeps only the given settings per party (1-based, deduplicated,
    /// order-preserving) and renumbers. The identity on retained entries.
    pub fn restrict_settings(&self, kept: &[Vec<usize>]) -> Result<Behaviour, BehaviourError> {
        let n = self.scenario.parties();
        assert_eq!(kept.len(), n, "one kept-setting list per party");
        let mut cleaned: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, ks) in kept.iter().enumerate() {
            let party = i + 1;
            let mut sorted: Vec<usize> = ks.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.is_empty() {
                return Err(BehaviourError::EmptyRestriction { party });
            }
            for &x in &sorted {
                if x < 1 || x > self.scenario.num_settings(party) {
                    return Err(BehaviourError::InvalidSetting { party, setting: x });
                }
            }
            cleaned.push(sorted);
        }
        let reduced = self.scenario.with_kept_settings(&cleaned);
        let mut entries = Vec::new();
        for x in reduced.contexts() {
            let original: Vec<usize> = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| cleaned[i][xi - 1])
                .collect();
            for a in reduced.outcome_strings(&x) {
                entries.push(self.entry(&original, &a).clone());
            }
        }
        Behaviour::new(reduced, entries)
    }

    /// Applies a relabeling, producing a behaviour on the same scenario.
    pub fn relabel(&self, r: &Relabeling) -> Result<Behaviour, BehaviourError> {
        r.validate(&self.scenario)?;
        let mut entries = vec![Rat::zero(); self.entries.len()];
        let indexer = self.indexer();
        for x in self.scenario.contexts() {
            for a in self.scenario.outcome_strings(&x) {
                let (nx, na) = r.apply(&x, &a);
                let idx = indexer.entry_index(&self.scenario, &nx, &na);
                entries[idx] = self.entry(&x, &a).clone();
            }
        }
        Behaviour::new(self.scenario.clone(), entries)
    }

    /// Value of an inequality functional on this behaviour, and whether the
    /// bound is respected.
    pub fn evaluate_inequality(&self, ineq: &Inequality) -> Result<(Rat, bool), BehaviourError> {
        if ineq.coeffs.len() != self.entries.len() {
            return Err(BehaviourError::DimensionMismatch {
                expected: ineq.coeffs.len(),
                got: self.entries.len(),
            });
        }
        let value: Rat = ineq
            .coeffs
            .iter()
            .zip(&self.entries)
            .map(|(c, p)| Rat::from_bigint(c.clone()) * p)
            .sum();
        let bound = Rat::from_bigint(ineq.bound.clone());
        let satisfied = value <= bound;
        Ok((value, satisfied))
    }
}

impl PartialEq for Behaviour {
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario && self.entries == other.entries
    }
}

impl Eq for Behaviour {}

impl fmt::Debug for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Behaviour({:?}, {} entries)", self.scenario, self.entries.len())
    }
}

#[derive(Deserialize)]
struct RawBehaviour {
    scenario: Scenario,
    entries: Vec<Rat>,
}

impl<'de> Deserialize<'de> for Behaviour {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawBehaviour::deserialize(deserializer)?;
        Behaviour::new(raw.scenario, raw.entries).map_err(serde::de::Error::custom)
    }
}

fn splice(rest: &[usize], party: usize, xi: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.extend_from_slice(&rest[..party - 1]);
    out.push(xi);
    out.extend_from_slice(&rest[party - 1..]);
    out
}

// ---------------------------------------------------------------------------
// Relabeling
// ---------------------------------------------------------------------------

/// A relabeling of parties, settings and outcomes. Maps old labels to new
/// ones; all three layers are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    /// `party_perm[i-1]` is the new index of party `i`.
    pub party_perm: Vec<usize>,
    /// `setting_perms[i-1][x-1]` is the new label of party `i`'s setting `x`.
    pub setting_perms: Vec<Vec<usize>>,
    /// `outcome_perms[i-1][x-1][a-1]` is the new label of outcome `a` at
    /// party `i`, setting `x`.
    pub outcome_perms: Vec<Vec<Vec<usize>>>,
}

impl Relabeling {
    pub fn identity(s: &Scenario) -> Self {
        Relabeling {
            party_perm: (1..=s.parties()).collect(),
            setting_perms: (1..=s.parties())
                .map(|i| (1..=s.num_settings(i)).collect())
                .collect(),
            outcome_perms: (1..=s.parties())
                .map(|i| {
                    (1..=s.num_settings(i))
                        .map(|x| (1..=s.num_outcomes(i, x)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Swap two parties, keeping settings and outcomes in place.
    pub fn swap_parties(s: &Scenario, p: usize, q: usize) -> Self {
        let mut r = Self::identity(s);
        r.party_perm.swap(p - 1, q - 1);
        r
    }

    fn validate(&self, s: &Scenario) -> Result<(), BehaviourError> {
        let n = s.parties();
        let is_perm = |v: &[usize], len: usize| {
            v.len() == len && {
                let mut seen = vec![false; len];
                v.iter().all(|&x| {
                    x >= 1 && x <= len && !std::mem::replace(&mut seen[x - 1], true)
                })
            }
        };
        if !is_perm(&self.party_perm, n) {
            return Err(BehaviourError::RelabelInvalid(
                "party map is not a permutation".into(),
            ));
        }
        if self.setting_perms.len() != n || self.outcome_perms.len() != n {
            return Err(BehaviourError::RelabelInvalid(
                "need one setting and one outcome permutation per party".into(),
            ));
        }
        for i in 1..=n {
            let target = self.party_perm[i - 1];
            let m = s.num_settings(i);
            if s.num_settings(target) != m {
                return Err(BehaviourError::RelabelInvalid(format!(
                    "party {i} has {m} settings but its image {target} has {}",
                    s.num_settings(target)
                )));
            }
            if !is_perm(&self.setting_perms[i - 1], m) {
                return Err(BehaviourError::RelabelInvalid(format!(
                    "setting map of party {i} is not a permutation"
                )));
            }
            if s.is_friend(i) != s.is_friend(target) {
                return Err(BehaviourError::FriendStructureViolation(format!(
                    "party {i} and its image {target} disagree on hosting a friend"
                )));
            }
            if s.is_friend(i) && self.setting_perms[i - 1][0] != 1 {
                return Err(BehaviourError::FriendStructureViolation(format!(
                    "query measurement of friend party {i} must stay setting 1"
                )));
            }
            for x in 1..=m {
                let o = s.num_outcomes(i, x);
                let nx = self.setting_perms[i - 1][x - 1];
                if s.num_outcomes(target, nx) != o {
                    return Err(BehaviourError::RelabelInvalid(format!(
                        "outcome count mismatch mapping party {i} setting {x}"
                    )));
                }
                if self.outcome_perms[i - 1].len() != m
                    || !is_perm(&self.outcome_perms[i - 1][x - 1], o)
                {
                    return Err(BehaviourError::RelabelInvalid(format!(
                        "outcome map of party {i} setting {x} is not a permutation"
                    )));
                }
            }
        }
        Ok(())
    }

    fn apply(&self, x: &[usize], a: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = x.len();
        let mut nx = vec![0; n];
        let mut na = vec![0; n];
        for i in 0..n {
            let target = self.party_perm[i] - 1;
            nx[target] = self.setting_perms[i][x[i] - 1];
            na[target] = self.outcome_perms[i][x[i] - 1][a[i] - 1];
        }
        (nx, na)
    }

    pub fn inverse(&self) -> Relabeling {
        let n = self.party_perm.len();
        let mut party_perm = vec![0; n];
        for (i, &t) in self.party_perm.iter().enumerate() {
            party_perm[t - 1] = i + 1;
        }
        let mut setting_perms = vec![Vec::new(); n];
        let mut outcome_perms = vec![Vec::new(); n];
        for i in 0..n {
            let target = self.party_perm[i] - 1;
            let m = self.setting_perms[i].len();
            let mut sp = vec![0; m];
            let mut op = vec![Vec::new(); m];
            for x in 0..m {
                let tx = self.setting_perms[i][x] - 1;
                sp[tx] = x + 1;
                let o = self.outcome_perms[i][x].len();
                let mut inv = vec![0; o];
                for (a, &ta) in self.outcome_perms[i][x].iter().enumerate() {
                    inv[ta - 1] = a + 1;
                }
                op[tx] = inv;
            }
            setting_perms[target] = sp;
            outcome_perms[target] = op;
        }
        Relabeling {
            party_perm,
            setting_perms,
            outcome_perms,
        }
    }
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// A deterministic strategy: one outcome per party per setting.
pub type Strategy = Vec<Vec<usize>>;

/// The deterministic behaviour realizing `strategy`.
pub fn deterministic(s: &Scenario, strategy: &Strategy) -> Result<Behaviour, BehaviourError> {
    if strategy.len() != s.parties() {
        return Err(BehaviourError::BadStrategy(format!(
            "{} parties, {} strategy rows",
            s.parties(),
            strategy.len()
        )));
    }
    for (i, row) in strategy.iter().enumerate() {
        let party = i + 1;
        if row.len() != s.num_settings(party) {
            return Err(BehaviourError::BadStrategy(format!(
                "party {party} has {} settings, strategy assigns {}",
                s.num_settings(party),
                row.len()
            )));
        }
        for (x, &a) in row.iter().enumerate() {
            if a < 1 || a > s.num_outcomes(party, x + 1) {
                return Err(BehaviourError::BadStrategy(format!(
                    "party {party} setting {} outcome {a} out of range",
                    x + 1
                )));
            }
        }
    }
    Behaviour::from_fn(s.clone(), |x, a| {
        let matches = x
            .iter()
            .zip(a)
            .enumerate()
            .all(|(i, (&xi, &ai))| strategy[i][xi - 1] == ai);
        if matches {
            Rat::one()
        } else {
            Rat::zero()
        }
    })
}

/// The uniform behaviour.
pub fn uniform(s: &Scenario) -> Behaviour {
    Behaviour::from_fn(s.clone(), |x, _| {
        let block: usize = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| s.num_outcomes(i + 1, xi))
            .product();
        Rat::new(1, block as i64)
    })
    .expect("uniform table is valid")
}

/// The Popescu-Rohrlich box on a bipartite 2-setting 2-outcome scenario:
/// outcomes are perfectly correlated via `(a-1) xor (b-1) = (x-1)(y-1)`.
pub fn pr_box(s: &Scenario) -> Result<Behaviour, BehaviourError> {
    let square = s.parties() == 2
        && s.settings() == [2, 2]
        && (1..=2).all(|i| (1..=2).all(|x| s.num_outcomes(i, x) == 2));
    if !square {
        return Err(BehaviourError::PrBoxShape);
    }
    Behaviour::from_fn(s.clone(), |x, a| {
        let lhs = (a[0] - 1) ^ (a[1] - 1);
        let rhs = (x[0] - 1) * (x[1] - 1);
        if lhs == rhs {
            Rat::new(1, 2)
        } else {
            Rat::zero()
        }
    })
}

/// Convex mixture of behaviours on a common scenario.
pub fn mixture(weights: &[Rat], behaviours: &[Behaviour]) -> Result<Behaviour, BehaviourError> {
    if weights.len() != behaviours.len() || behaviours.is_empty() {
        return Err(BehaviourError::BadWeights(format!(
            "{} weights for {} behaviours",
            weights.len(),
            behaviours.len()
        )));
    }
    if weights.iter().any(Rat::is_negative) {
        return Err(BehaviourError::BadWeights("negative weight".into()));
    }
    let total: Rat = weights.iter().sum();
    if total != Rat::one() {
        return Err(BehaviourError::BadWeights(format!("weights sum to {total}")));
    }
    let scenario = behaviours[0].scenario().clone();
    if behaviours.iter().any(|b| *b.scenario() != scenario) {
        return Err(BehaviourError::ScenarioMismatch);
    }
    let mut entries = vec![Rat::zero(); behaviours[0].len()];
    for (w, b) in weights.iter().zip(behaviours) {
        for (acc, e) in entries.iter_mut().zip(b.entries()) {
            *acc += &(w * e);
        }
    }
    Behaviour::new(scenario, entries)
}
