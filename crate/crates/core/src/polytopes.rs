//! Scenario polytopes: Bell, no-signalling and local-friendliness vertex
//! generation, membership certification, and facet enumeration.
//!
//! The LF polytope of a scenario is spanned by pairs of a friend-outcome
//! assignment and an extreme point of the restricted public scenario's
//! no-signalling polytope. Membership is decided by a direct LP over
//! unnormalized conditional tables, which stays polynomial-size where
//! vertex enumeration would explode; the vertex route doubles as a
//! cross-check on small scenarios.

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behaviour::{Behaviour, BehaviourError, Indexer, Strategy};
use crate::geometry::{
    self, dd_v_to_h, in_convex_hull, GeometryError, HRep, HullMembership, VRep,
};
use crate::lhv::{LhvComponent, LhvModel};
use crate::rational::Rat;
use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("scenario too large: table dimension {dim} exceeds the guard {guard}")]
    ScenarioTooLarge { dim: usize, guard: usize },
    #[error("membership LP too large: {vars} variables exceed the guard {guard}")]
    LpTooLarge { vars: usize, guard: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Behaviour(#[from] BehaviourError),
}

/// Enumeration limits. `max_table_len` bounds the behaviour-space dimension
/// of any polytope whose vertices are enumerated; `max_lp_vars` separately
/// bounds the variable count of membership LPs, which scale much further.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeGuard {
    pub max_table_len: usize,
    pub max_lp_vars: usize,
}

impl Default for SizeGuard {
    fn default() -> Self {
        SizeGuard {
            max_table_len: 256,
            max_lp_vars: 4096,
        }
    }
}

impl SizeGuard {
    pub fn with_table_len(max_table_len: usize) -> Self {
        SizeGuard {
            max_table_len,
            ..Default::default()
        }
    }

    fn check_table(&self, dim: usize) -> Result<(), PolytopeError> {
        if dim > self.max_table_len {
            return Err(PolytopeError::ScenarioTooLarge {
                dim,
                guard: self.max_table_len,
            });
        }
        Ok(())
    }

    fn check_lp(&self, vars: usize) -> Result<(), PolytopeError> {
        if vars > self.max_lp_vars {
            return Err(PolytopeError::LpTooLarge {
                vars,
                guard: self.max_lp_vars,
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Inequalities
// ---------------------------------------------------------------------------

/// An integer-coefficient affine functional `coeffs . p <= bound` over
/// behaviour space, in canonical form: denominators cleared and the gcd of
/// all coefficients and the bound divided out.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Inequality {
    pub coeffs: Vec<BigInt>,
    pub bound: BigInt,
    pub label: Option<String>,
}

impl Inequality {
    pub fn from_rational(coeffs: &[Rat], bound: &Rat, label: Option<String>) -> Self {
        let (coeffs, bound) = geometry::canonical_inequality(coeffs, bound);
        Inequality {
            coeffs: coeffs.iter().map(rat_to_int).collect(),
            bound: rat_to_int(&bound),
            label,
        }
    }

    /// One-line text form: coefficients in table index order, then the bound.
    pub fn to_line(&self) -> String {
        let cs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("{} <= {}", cs.join(" "), self.bound)
    }

    /// Identity used for facet-set comparison; labels do not participate.
    fn key(&self) -> (&[BigInt], &BigInt) {
        (&self.coeffs, &self.bound)
    }
}

impl Serialize for Inequality {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Inequality", 3)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("bound", &self.bound.to_string())?;
        st.serialize_field("label", &self.label)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Inequality {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            coeffs: Vec<String>,
            bound: String,
            label: Option<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let parse = |s: &str| s.parse::<BigInt>().map_err(serde::de::Error::custom);
        Ok(Inequality {
            coeffs: raw.coeffs.iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
            bound: parse(&raw.bound)?,
            label: raw.label,
        })
    }
}

fn rat_to_int(r: &Rat) -> BigInt {
    debug_assert!(r.denom().is_one(), "canonical form has integer entries");
    r.numer().clone()
}

// ---------------------------------------------------------------------------
// Vertex generation
// ---------------------------------------------------------------------------

/// All deterministic strategies of the public scenario, in lexicographic
/// order (party-major, then setting).
pub fn bell_strategies(s: &Scenario) -> Vec<Strategy> {
    let mut per_party: Vec<Vec<Vec<usize>>> = Vec::new();
    for i in 1..=s.parties() {
        let outcome_ranges: Vec<Vec<usize>> = (1..=s.num_settings(i))
            .map(|x| (1..=s.num_outcomes(i, x)).collect())
            .collect();
        per_party.push(mixed_tuples_from(&outcome_ranges));
    }
    mixed_tuples_from(&per_party)
}

/// Vertices of the Bell polytope: one deterministic behaviour per strategy,
/// in strategy order. Friends never enter.
pub fn bell_vertices(s: &Scenario) -> VRep {
    let strategies = bell_strategies(s);
    let points = strategies
        .par_iter()
        .map(|st| {
            crate::behaviour::deterministic(s, st)
                .expect("enumerated strategies are valid")
                .entries()
                .to_vec()
        })
        .collect();
    VRep {
        dim: s.table_len(),
        points,
    }
}

/// The halfspace description of the no-signalling polytope: positivity,
/// per-context normalization, and the marginal equalities.
pub fn ns_hrep(s: &Scenario) -> HRep {
    let dim = s.table_len();
    let idx = Indexer::new(s);
    let mut h = HRep::new(dim);
    for i in 0..dim {
        let mut row = vec![Rat::zero(); dim];
        row[i] = -Rat::one();
        h.inequalities.push((row, Rat::zero()));
    }
    for x in s.contexts() {
        let mut row = vec![Rat::zero(); dim];
        for a in s.outcome_strings(&x) {
            row[idx.entry_index(s, &x, &a)] = Rat::one();
        }
        h.equalities.push((row, Rat::one()));
    }
    for (coeffs, _) in ns_equality_rows(s, &idx) {
        h.equalities.push((coeffs, Rat::zero()));
    }
    h
}

/// No-signalling marginal equality rows (rhs zero): for every party and
/// every pair of adjacent settings, the marginals over that party agree.
fn ns_equality_rows(s: &Scenario, idx: &Indexer) -> Vec<(Vec<Rat>, Rat)> {
    let dim = s.table_len();
    let n = s.parties();
    let mut rows = Vec::new();
    for party in 1..=n {
        let m = s.num_settings(party);
        if m < 2 {
            continue;
        }
        let rest_ranges: Vec<Vec<usize>> = (1..=n)
            .filter(|&j| j != party)
            .map(|j| (1..=s.num_settings(j)).collect())
            .collect();
        for rest in mixed_tuples_from(&rest_ranges) {
            for xi in 1..m {
                let ctx_a = splice_context(&rest, party, xi);
                let ctx_b = splice_context(&rest, party, xi + 1);
                // One row per joint outcome of the other parties.
                let other_outcomes: Vec<Vec<usize>> = ctx_a
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i + 1 != party)
                    .map(|(i, &x)| (1..=s.num_outcomes(i + 1, x)).collect())
                    .collect();
                for others in mixed_tuples_from(&other_outcomes) {
                    let mut row = vec![Rat::zero(); dim];
                    for ai in 1..=s.num_outcomes(party, xi) {
                        let a = splice_context(&others, party, ai);
                        row[idx.entry_index(s, &ctx_a, &a)] = Rat::one();
                    }
                    for ai in 1..=s.num_outcomes(party, xi + 1) {
                        let a = splice_context(&others, party, ai);
                        row[idx.entry_index(s, &ctx_b, &a)] -= &Rat::one();
                    }
                    rows.push((row, Rat::zero()));
                }
            }
        }
    }
    rows
}

/// Vertices of the no-signalling polytope via double description.
pub fn ns_vertices(s: &Scenario, guard: &SizeGuard) -> Result<VRep, PolytopeError> {
    guard.check_table(s.table_len())?;
    Ok(geometry::dd_h_to_v(&ns_hrep(s))?)
}

/// Friend-outcome strings: the product of the friends' query-measurement
/// alphabets, in friend order. Without friends the single empty string.
pub fn friend_outcome_strings(s: &Scenario) -> Vec<Vec<usize>> {
    let ranges: Vec<Vec<usize>> = s
        .friend_query_alphabets()
        .iter()
        .map(|&o| (1..=o).collect())
        .collect();
    mixed_tuples_from(&ranges)
}

/// Vertices of the LF polytope: for every friend-outcome string and every
/// no-signalling extreme point of the restricted public scenario, the
/// behaviour that pins queried friends to their recorded outcomes and
/// follows the extreme point's marginal elsewhere. Deduplicated; a count
/// disagreeing with the closed-form extreme-point count is reported on
/// stderr rather than silenced.
pub fn lf_vertices(s: &Scenario, guard: &SizeGuard) -> Result<VRep, PolytopeError> {
    guard.check_table(s.table_len())?;
    let restricted = s.restricted_public_scenario();
    let ext = ns_vertices(&restricted, guard)?;
    let ext_behaviours: Vec<Behaviour> = ext
        .points
        .iter()
        .map(|p| {
            let b = Behaviour::new(restricted.clone(), p.clone())
                .expect("no-signalling vertices are valid behaviours");
            assert!(
                b.is_no_signalling(),
                "enumerated extreme point violates no-signalling"
            );
            b
        })
        .collect();

    let c_strings = friend_outcome_strings(s);
    let mu: Vec<(usize, usize)> = c_strings
        .iter()
        .enumerate()
        .flat_map(|(ci, _)| (0..ext_behaviours.len()).map(move |l| (ci, l)))
        .collect();
    let points: Vec<Vec<Rat>> = mu
        .par_iter()
        .map(|&(ci, l)| lf_vertex_table(s, &restricted, &c_strings[ci], &ext_behaviours[l]))
        .collect();

    // Stable dedup in mu-lexicographic order.
    let mut seen = std::collections::BTreeSet::new();
    let mut unique = Vec::new();
    for p in points {
        if seen.insert(p.clone()) {
            unique.push(p);
        }
    }
    let expected = c_strings.len() * ext_behaviours.len();
    if unique.len() != expected {
        eprintln!(
            "warning: {} distinct LF vertices from {} generator pairs in {:?}",
            unique.len(),
            expected,
            s
        );
    }
    Ok(VRep {
        dim: s.table_len(),
        points: unique,
    })
}

/// The table of a single LF vertex.
fn lf_vertex_table(
    s: &Scenario,
    restricted: &Scenario,
    c: &[usize],
    ext: &Behaviour,
) -> Vec<Rat> {
    let friends: Vec<usize> = s.friends().iter().copied().collect();
    let mut entries = Vec::with_capacity(s.table_len());
    for x in s.contexts() {
        let queried: Vec<usize> = friends
            .iter()
            .copied()
            .filter(|&i| x[i - 1] == 1)
            .collect();
        let rctx = restricted_context(s, restricted, &x);
        for a in s.outcome_strings(&x) {
            let pinned = queried.iter().all(|&i| {
                let c_pos = friends.iter().position(|&f| f == i).unwrap();
                a[i - 1] == c[c_pos]
            });
            if !pinned {
                entries.push(Rat::zero());
                continue;
            }
            entries.push(marginal_over(ext, &rctx, &queried, &a));
        }
    }
    entries
}

/// Restricted-scenario context matching full context `x`: renumbered
/// settings for non-queried parties, the lowest retained setting for
/// queried friends.
fn restricted_context(s: &Scenario, restricted: &Scenario, x: &[usize]) -> Vec<usize> {
    (1..=s.parties())
        .map(|i| {
            if s.is_friend(i) && x[i - 1] == 1 {
                1
            } else {
                // Invert the recorded renumbering.
                (1..=restricted.num_settings(i))
                    .find(|&y| restricted.original_setting(i, y) == x[i - 1])
                    .expect("retained setting must be recorded")
            }
        })
        .collect()
}

/// Marginal of `ext` over the `queried` parties at restricted context
/// `rctx`, evaluated at the non-queried components of `a`.
fn marginal_over(ext: &Behaviour, rctx: &[usize], queried: &[usize], a: &[usize]) -> Rat {
    let ranges: Vec<Vec<usize>> = queried
        .iter()
        .map(|&i| (1..=ext.scenario().num_outcomes(i, rctx[i - 1])).collect())
        .collect();
    let mut total = Rat::zero();
    for sub in mixed_tuples_from(&ranges) {
        let mut full = a.to_vec();
        for (k, &i) in queried.iter().enumerate() {
            full[i - 1] = sub[k];
        }
        total += ext.entry(rctx, &full);
    }
    total
}

/// Closed-form extreme point count: the product of the friends' query
/// alphabets times the number of restricted no-signalling extreme points.
pub fn lf_extreme_count(s: &Scenario, guard: &SizeGuard) -> Result<usize, PolytopeError> {
    let restricted = s.restricted_public_scenario();
    let ext = ns_vertices(&restricted, guard)?;
    let c: usize = s.friend_query_alphabets().iter().product();
    Ok(c * ext.len())
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

/// Outcome of a membership test with certificates on both sides.
#[derive(Debug, Clone)]
pub enum Membership<M> {
    Member(M),
    /// A valid inequality of the target set strictly violated by the query.
    Separated(Inequality),
}

impl<M> Membership<M> {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

/// Decides Bell-polytope membership: convex weights over deterministic
/// strategies, or a separating inequality.
pub fn membership_bell(
    b: &Behaviour,
    guard: &SizeGuard,
) -> Result<Membership<LhvModel>, PolytopeError> {
    let s = b.scenario();
    let strategies = bell_strategies(s);
    guard.check_lp(strategies.len())?;
    let vertices = bell_vertices(s);
    match in_convex_hull(b.entries(), &vertices)? {
        HullMembership::Inside { weights } => {
            let components = weights
                .into_iter()
                .zip(strategies)
                .filter(|(w, _)| !w.is_zero())
                .map(|(weight, strategy)| LhvComponent { weight, strategy })
                .collect();
            Ok(Membership::Member(LhvModel { components }))
        }
        HullMembership::Outside { coeffs, rhs } => Ok(Membership::Separated(
            Inequality::from_rational(&coeffs, &rhs, Some("bell-separation".into())),
        )),
    }
}

/// A local-friendliness model: a distribution over friend-outcome strings
/// with one no-signalling conditional behaviour per positive-weight string,
/// defined on the restricted public scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfModel {
    pub branches: Vec<LfBranch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfBranch {
    pub friend_outcomes: Vec<usize>,
    pub weight: Rat,
    pub conditional: Behaviour,
}

impl LfModel {
    /// Invariant check: weights form a distribution and every conditional is
    /// a no-signalling behaviour.
    pub fn validate(&self) -> Result<(), BehaviourError> {
        let total: Rat = self.branches.iter().map(|br| br.weight.clone()).sum();
        if total != Rat::one() || self.branches.iter().any(|br| br.weight.is_negative()) {
            return Err(BehaviourError::BadWeights(format!(
                "branch weights sum to {total}"
            )));
        }
        for br in &self.branches {
            if let Some(v) = br.conditional.no_signalling_violation() {
                return Err(BehaviourError::SignallingInput(v));
            }
        }
        Ok(())
    }

    /// The behaviour this model decomposes, reassembled on scenario `s`.
    pub fn behaviour(&self, s: &Scenario) -> Result<Behaviour, BehaviourError> {
        let restricted = s.restricted_public_scenario();
        let friends: Vec<usize> = s.friends().iter().copied().collect();
        Behaviour::from_fn(s.clone(), |x, a| {
            let queried: Vec<usize> = friends
                .iter()
                .copied()
                .filter(|&i| x[i - 1] == 1)
                .collect();
            let rctx = restricted_context(s, &restricted, x);
            let mut p = Rat::zero();
            for br in &self.branches {
                if br.weight.is_zero() {
                    continue;
                }
                let pinned = queried.iter().all(|&i| {
                    let c_pos = friends.iter().position(|&f| f == i).unwrap();
                    a[i - 1] == br.friend_outcomes[c_pos]
                });
                if !pinned {
                    continue;
                }
                let marg = marginal_over(&br.conditional, &rctx, &queried, a);
                p += &(&br.weight * &marg);
            }
            p
        })
    }

    /// Exact reproduction check.
    pub fn reproduces(&self, b: &Behaviour) -> bool {
        match self.behaviour(b.scenario()) {
            Ok(rebuilt) => rebuilt == *b,
            Err(_) => false,
        }
    }
}

/// Decides LF membership by the direct decomposition LP: one unnormalized
/// conditional table per friend-outcome string, constrained to be
/// no-signalling, jointly normalized, and to reproduce the behaviour.
pub fn membership_lf(
    b: &Behaviour,
    guard: &SizeGuard,
) -> Result<Membership<LfModel>, PolytopeError> {
    let s = b.scenario();
    let restricted = s.restricted_public_scenario();
    let rdim = restricted.table_len();
    let c_strings = friend_outcome_strings(s);
    let nvars = c_strings.len() * rdim;
    guard.check_lp(nvars)?;

    let ridx = Indexer::new(&restricted);
    let friends: Vec<usize> = s.friends().iter().copied().collect();
    let mut h = HRep::new(nvars);

    for v in 0..nvars {
        let mut row = vec![Rat::zero(); nvars];
        row[v] = -Rat::one();
        h.inequalities.push((row, Rat::zero()));
    }

    // Per-branch no-signalling equalities; these also force every context
    // of a branch to share one total mass.
    let ns_rows = ns_equality_rows(&restricted, &ridx);
    for ci in 0..c_strings.len() {
        for (coeffs, _) in &ns_rows {
            let mut row = vec![Rat::zero(); nvars];
            for (j, v) in coeffs.iter().enumerate() {
                if !v.is_zero() {
                    row[ci * rdim + j] = v.clone();
                }
            }
            h.equalities.push((row, Rat::zero()));
        }
    }

    // Branch masses sum to one; measured on the first restricted context.
    let first_ctx: Vec<usize> = restricted.contexts().next().expect("nonempty context set");
    let mut norm = vec![Rat::zero(); nvars];
    for ci in 0..c_strings.len() {
        for a in restricted.outcome_strings(&first_ctx) {
            norm[ci * rdim + ridx.entry_index(&restricted, &first_ctx, &a)] = Rat::one();
        }
    }
    h.equalities.push((norm, Rat::one()));
    let reproduction_start = h.equalities.len();

    // Reproduction: each behaviour entry equals the delta-matched marginals
    // of the branch tables.
    let indexer = b.indexer();
    for x in s.contexts() {
        let queried: Vec<usize> = friends
            .iter()
            .copied()
            .filter(|&i| x[i - 1] == 1)
            .collect();
        let rctx = restricted_context(s, &restricted, &x);
        for a in s.outcome_strings(&x) {
            let mut row = vec![Rat::zero(); nvars];
            for (ci, c) in c_strings.iter().enumerate() {
                let pinned = queried.iter().all(|&i| {
                    let c_pos = friends.iter().position(|&f| f == i).unwrap();
                    a[i - 1] == c[c_pos]
                });
                if !pinned {
                    continue;
                }
                let ranges: Vec<Vec<usize>> = queried
                    .iter()
                    .map(|&i| (1..=restricted.num_outcomes(i, rctx[i - 1])).collect())
                    .collect();
                for sub in mixed_tuples_from(&ranges) {
                    let mut full = a.to_vec();
                    for (k, &i) in queried.iter().enumerate() {
                        full[i - 1] = sub[k];
                    }
                    row[ci * rdim + ridx.entry_index(&restricted, &rctx, &full)] += &Rat::one();
                }
            }
            let rhs = b
                .entries()
                .get(indexer.entry_index(s, &x, &a))
                .expect("index in range")
                .clone();
            h.equalities.push((row, rhs));
        }
    }

    match geometry::lp_feasible(&h)? {
        Ok(q) => {
            let mut branches = Vec::new();
            for (ci, c) in c_strings.iter().enumerate() {
                let mass: Rat = restricted
                    .outcome_strings(&first_ctx)
                    .map(|a| q[ci * rdim + ridx.entry_index(&restricted, &first_ctx, &a)].clone())
                    .sum();
                if mass.is_zero() {
                    continue;
                }
                let entries: Vec<Rat> = (0..rdim)
                    .map(|j| &q[ci * rdim + j] / &mass)
                    .collect();
                let conditional = Behaviour::new(restricted.clone(), entries)?;
                branches.push(LfBranch {
                    friend_outcomes: c.clone(),
                    weight: mass,
                    conditional,
                });
            }
            let model = LfModel { branches };
            model.validate()?;
            assert!(
                model.reproduces(b),
                "internal error: LF decomposition failed to reproduce the behaviour"
            );
            Ok(Membership::Member(model))
        }
        Err(witness) => {
            // The reproduction-row multipliers are a valid LF inequality in
            // disguise; the normalization multiplier is its bound.
            let z = &witness.eq_multipliers;
            let coeffs: Vec<Rat> = z[reproduction_start..].iter().map(|x| -x).collect();
            let bound = z[reproduction_start - 1].clone();
            let ineq = Inequality::from_rational(&coeffs, &bound, Some("lf-separation".into()));
            let (value, satisfied) = b.evaluate_inequality(&ineq)?;
            assert!(
                !satisfied,
                "internal error: separator not violated (value {value})"
            );
            Ok(Membership::Separated(ineq))
        }
    }
}

// ---------------------------------------------------------------------------
// Facets and dimension
// ---------------------------------------------------------------------------

/// Facet inequalities of the convex hull of `v`, canonical and sorted.
pub fn facets(v: &VRep) -> Result<Vec<Inequality>, PolytopeError> {
    let h = dd_v_to_h(v)?;
    Ok(h.inequalities
        .iter()
        .map(|(coeffs, rhs)| Inequality::from_rational(coeffs, rhs, None))
        .collect())
}

/// Facets of the LF polytope that are not facets of the Bell polytope.
pub fn genuine_lf_inequalities(
    s: &Scenario,
    guard: &SizeGuard,
) -> Result<Vec<Inequality>, PolytopeError> {
    let bell = facets(&bell_vertices(s))?;
    let lf = facets(&lf_vertices(s, guard)?)?;
    let bell_keys: std::collections::BTreeSet<_> = bell
        .iter()
        .map(|i| (i.coeffs.clone(), i.bound.clone()))
        .collect();
    Ok(lf
        .into_iter()
        .filter(|i| !bell_keys.contains(&(i.coeffs.clone(), i.bound.clone())))
        .map(|mut i| {
            i.label = Some("genuine-lf".into());
            i
        })
        .collect())
}

/// Common affine dimension of the Bell, LF and no-signalling polytopes.
/// The no-signalling dimension is derived from the rank of its equality
/// system, which sandwiches the LF dimension without any enumeration.
pub fn polytope_dimension(s: &Scenario, guard: &SizeGuard) -> Result<usize, PolytopeError> {
    guard.check_table(s.table_len())?;
    let bell_dim = geometry::affine_dimension(&bell_vertices(s))?;
    let dim = s.table_len();
    let idx = Indexer::new(s);
    let mut eq_rows: Vec<Vec<num_bigint::BigInt>> = Vec::new();
    for x in s.contexts() {
        let mut row = vec![Rat::zero(); dim];
        for a in s.outcome_strings(&x) {
            row[idx.entry_index(s, &x, &a)] = Rat::one();
        }
        eq_rows.push(crate::geometry::linalg::clear_denominators(&row));
    }
    for (row, _) in ns_equality_rows(s, &idx) {
        eq_rows.push(crate::geometry::linalg::clear_denominators(&row));
    }
    let ns_dim = dim - crate::geometry::linalg::int_rank(&eq_rows);
    assert_eq!(
        bell_dim, ns_dim,
        "Bell and no-signalling polytopes span the same affine subspace"
    );
    Ok(bell_dim)
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Cartesian product of the given ranges; the empty product is the single
/// empty tuple.
pub(crate) fn mixed_tuples_from<T: Clone>(ranges: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for prefix in &out {
            for item in r {
                let mut row = prefix.clone();
                row.push(item.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

fn splice_context(rest: &[usize], party: usize, value: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.extend_from_slice(&rest[..party - 1]);
    out.push(value);
    out.extend_from_slice(&rest[party - 1..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour::{deterministic, mixture, pr_box, uniform};

    fn chsh() -> Scenario {
        Scenario::uniform(2, [], vec![2, 2], 2).unwrap()
    }

    fn minimal() -> Scenario {
        Scenario::uniform(2, [1], vec![2, 2], 2).unwrap()
    }

    fn guard() -> SizeGuard {
        SizeGuard::default()
    }

    /// The CHSH functional in probability form: sum of E_xy with the sign
    /// pattern + + + - where E_xy correlates equal outcomes.
    pub(crate) fn chsh_inequality(s: &Scenario) -> Inequality {
        let idx = Indexer::new(s);
        let mut coeffs = vec![Rat::zero(); s.table_len()];
        for x in s.contexts() {
            let sign = if x == [2, 2] { -1 } else { 1 };
            for a in s.outcome_strings(&x) {
                let corr = if a[0] == a[1] { 1 } else { -1 };
                coeffs[idx.entry_index(s, &x, &a)] = Rat::from_int(sign * corr);
            }
        }
        Inequality::from_rational(&coeffs, &Rat::from_int(2), Some("chsh".into()))
    }

    #[test]
    fn bell_vertex_counts_are_products_of_strategy_counts() {
        assert_eq!(bell_vertices(&chsh()).len(), 16);
        let tri = Scenario::uniform(3, [], vec![2, 2, 2], 2).unwrap();
        assert_eq!(bell_vertices(&tri).len(), 64);
        // Friends do not enter the Bell polytope.
        assert_eq!(bell_vertices(&minimal()).len(), 16);
    }

    #[test]
    fn bell_vertices_are_no_signalling() {
        for p in &bell_vertices(&chsh()).points {
            let b = Behaviour::new(chsh(), p.clone()).unwrap();
            assert!(b.is_no_signalling());
        }
    }

    #[test]
    fn chsh_value_on_deterministic_strategies_never_exceeds_two() {
        let s = chsh();
        let ineq = chsh_inequality(&s);
        let mut attained = std::collections::BTreeSet::new();
        for st in bell_strategies(&s) {
            let b = deterministic(&s, &st).unwrap();
            let (value, satisfied) = b.evaluate_inequality(&ineq).unwrap();
            assert!(satisfied, "deterministic strategies respect the bound");
            attained.insert(value);
        }
        assert!(attained.contains(&Rat::from_int(2)), "the bound is tight");
        assert!(attained.iter().all(|v| v.abs() <= Rat::from_int(2)));
    }

    #[test]
    fn pr_box_violates_chsh_at_four() {
        let s = chsh();
        let pr = pr_box(&s).unwrap();
        let (value, satisfied) = pr.evaluate_inequality(&chsh_inequality(&s)).unwrap();
        assert_eq!(value, Rat::from_int(4));
        assert!(!satisfied);
    }

    #[test]
    fn chsh_ns_polytope_has_24_vertices_16_local() {
        let s = chsh();
        let v = ns_vertices(&s, &guard()).unwrap();
        assert_eq!(v.len(), 24);
        let bell = bell_vertices(&s);
        let mut local = 0;
        let mut nonlocal = 0;
        for p in &v.points {
            match in_convex_hull(p, &bell).unwrap() {
                HullMembership::Inside { .. } => local += 1,
                HullMembership::Outside { .. } => nonlocal += 1,
            }
        }
        assert_eq!((local, nonlocal), (16, 8));
    }

    #[test]
    fn chsh_ns_vertices_match_independent_generator() {
        // Oracle: the 16 deterministic points plus the 8 PR-box variants
        // p(ab|xy) = 1/2 iff a+b = xy + ax + by + g (mod 2).
        let s = chsh();
        let mut expected: Vec<Vec<Rat>> = bell_vertices(&s).points;
        for alpha in 0..2usize {
            for beta in 0..2usize {
                for gamma in 0..2usize {
                    let b = Behaviour::from_fn(s.clone(), |x, a| {
                        let lhs = (a[0] - 1) ^ (a[1] - 1);
                        let rhs = ((x[0] - 1) * (x[1] - 1)
                            + alpha * (x[0] - 1)
                            + beta * (x[1] - 1)
                            + gamma)
                            % 2;
                        if lhs == rhs {
                            Rat::new(1, 2)
                        } else {
                            Rat::zero()
                        }
                    })
                    .unwrap();
                    assert!(b.is_no_signalling());
                    expected.push(b.entries().to_vec());
                }
            }
        }
        let expected = VRep::new(s.table_len(), expected);
        let computed = ns_vertices(&s, &guard()).unwrap();
        assert_eq!(computed, expected);
    }

    #[test]
    fn restricted_single_setting_scenario_is_local() {
        // With one setting for a party no PR box fits; the NS polytope
        // collapses onto the Bell polytope.
        let s = minimal().restricted_public_scenario();
        let v = ns_vertices(&s, &guard()).unwrap();
        let bell = bell_vertices(&s);
        assert!(crate::geometry::hull_equal(&v, &bell).unwrap());
    }

    #[test]
    fn chsh_bell_facets_are_positivity_plus_chsh() {
        let s = chsh();
        let fs = facets(&bell_vertices(&s)).unwrap();
        assert_eq!(fs.len(), 24);
        // 16 positivity facets (single -1 coefficient) and 8 CHSH variants.
        let positivity = fs
            .iter()
            .filter(|i| {
                i.bound == BigInt::from(0)
                    && i.coeffs.iter().filter(|c| **c != BigInt::from(0)).count() == 1
            })
            .count();
        assert_eq!(positivity, 16);
        let chsh_like = fs
            .iter()
            .filter(|i| i.bound == BigInt::from(2))
            .count();
        assert_eq!(chsh_like, 8);
        // The canonical CHSH functional is among them.
        let target = chsh_inequality(&s);
        assert!(fs.iter().any(|i| i.key() == target.key()));
    }

    #[test]
    fn minimal_scenario_lf_matches_bell() {
        let s = minimal();
        let lf = lf_vertices(&s, &guard()).unwrap();
        assert_eq!(lf.len(), 16);
        assert_eq!(lf_extreme_count(&s, &guard()).unwrap(), 16);
        assert!(crate::geometry::hull_equal(&lf, &bell_vertices(&s)).unwrap());
    }

    #[test]
    fn friendless_lf_vertices_are_exactly_ns_vertices() {
        let s = chsh();
        let lf = lf_vertices(&s, &guard()).unwrap();
        let ns = ns_vertices(&s, &guard()).unwrap();
        let lf_sorted = VRep::new(lf.dim, lf.points.clone());
        assert_eq!(lf_sorted, ns);
        assert_eq!(lf_extreme_count(&s, &guard()).unwrap(), 24);
    }

    #[test]
    fn membership_bell_certificates() {
        let s = chsh();
        // Deterministic behaviours sit on themselves with weight one.
        let st = vec![vec![1, 1], vec![2, 1]];
        let d = deterministic(&s, &st).unwrap();
        match membership_bell(&d, &guard()).unwrap() {
            Membership::Member(m) => {
                assert_eq!(m.components.len(), 1);
                assert_eq!(m.components[0].weight, Rat::one());
                assert_eq!(m.components[0].strategy, st);
            }
            Membership::Separated(_) => panic!("deterministic is local"),
        }
        // Uniform is an even mixture.
        match membership_bell(&uniform(&s), &guard()).unwrap() {
            Membership::Member(m) => {
                let total: Rat = m.components.iter().map(|c| c.weight.clone()).sum();
                assert_eq!(total, Rat::one());
            }
            Membership::Separated(_) => panic!("uniform is local"),
        }
        // The PR box is separated by a CHSH-type facet.
        match membership_bell(&pr_box(&s).unwrap(), &guard()).unwrap() {
            Membership::Member(_) => panic!("PR box is nonlocal"),
            Membership::Separated(ineq) => {
                let (value, satisfied) =
                    pr_box(&s).unwrap().evaluate_inequality(&ineq).unwrap();
                assert!(!satisfied);
                assert!(value > Rat::from_bigint(ineq.bound.clone()));
            }
        }
    }

    #[test]
    fn membership_lf_in_the_minimal_scenario() {
        let s = minimal();
        // Mixtures of LF vertices are members and reproduce exactly.
        let lf = lf_vertices(&s, &guard()).unwrap();
        let b0 = Behaviour::new(s.clone(), lf.points[0].clone()).unwrap();
        let b1 = Behaviour::new(s.clone(), lf.points[5].clone()).unwrap();
        let mix = mixture(&[Rat::new(1, 3), Rat::new(2, 3)], &[b0, b1]).unwrap();
        match membership_lf(&mix, &guard()).unwrap() {
            Membership::Member(model) => assert!(model.reproduces(&mix)),
            Membership::Separated(_) => panic!("mixture of LF vertices is in LF"),
        }
        // The PR box lies outside LF here because LF equals Bell.
        let pr = Behaviour::from_fn(s.clone(), |x, a| {
            let lhs = (a[0] - 1) ^ (a[1] - 1);
            let rhs = (x[0] - 1) * (x[1] - 1);
            if lhs == rhs {
                Rat::new(1, 2)
            } else {
                Rat::zero()
            }
        })
        .unwrap();
        match membership_lf(&pr, &guard()).unwrap() {
            Membership::Member(_) => panic!("PR box violates LF in the minimal scenario"),
            Membership::Separated(ineq) => {
                let (_, satisfied) = pr.evaluate_inequality(&ineq).unwrap();
                assert!(!satisfied);
            }
        }
        // Without friends the PR box is an LF member.
        let pub_s = chsh();
        let pr_pub = pr_box(&pub_s).unwrap();
        assert!(membership_lf(&pr_pub, &guard()).unwrap().is_member());
    }

    #[test]
    fn membership_lf_agrees_with_vertex_hull_route() {
        let s = minimal();
        let lf = lf_vertices(&s, &guard()).unwrap();
        let ns = ns_vertices(&s, &guard()).unwrap();
        for p in ns.points.iter() {
            let b = Behaviour::new(s.clone(), p.clone()).unwrap();
            let direct = membership_lf(&b, &guard()).unwrap().is_member();
            let hull = matches!(
                in_convex_hull(p, &lf).unwrap(),
                HullMembership::Inside { .. }
            );
            assert_eq!(direct, hull, "routes disagree on {p:?}");
        }
    }

    #[test]
    fn genuine_inequalities_absent_when_lf_equals_bell() {
        let s = minimal();
        assert!(genuine_lf_inequalities(&s, &guard()).unwrap().is_empty());
    }

    #[test]
    fn polytope_dimension_chsh_is_eight() {
        assert_eq!(polytope_dimension(&chsh(), &guard()).unwrap(), 8);
        assert_eq!(polytope_dimension(&minimal(), &guard()).unwrap(), 8);
    }

    #[test]
    fn size_guard_rejects_oversized_enumeration() {
        let s = Scenario::uniform(3, [], vec![3, 3, 3], 2).unwrap();
        let tight = SizeGuard::with_table_len(64);
        assert!(matches!(
            ns_vertices(&s, &tight),
            Err(PolytopeError::ScenarioTooLarge { .. })
        ));
    }
}
