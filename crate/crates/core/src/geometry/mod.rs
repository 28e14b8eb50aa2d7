//! Exact-rational computational geometry.
//!
//! Polytopes appear in two interchangeable forms: an [`HRep`] (affine
//! inequalities and equalities) and a [`VRep`] (a finite point list).
//! Conversions run the double description method on the homogenized cone
//! after splitting off the affine hull, so both directions stay exact.
//! Linear programming with certificates lives in [`lp`].

mod dd;
pub(crate) mod linalg;
mod lp;

pub use lp::{lp_feasible, lp_solve, FarkasWitness, LpOutcome, Sense};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{dot, Rat};
use linalg::{clear_denominators, int_rank, rref, solve_affine};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("the constraint system has no solutions")]
    EmptyPolytope,
    #[error("the polyhedron is unbounded")]
    UnboundedInput,
}

/// Halfspace representation: `coeffs . x <= rhs` rows and `coeffs . x = rhs`
/// rows over a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HRep {
    pub dim: usize,
    pub inequalities: Vec<(Vec<Rat>, Rat)>,
    pub equalities: Vec<(Vec<Rat>, Rat)>,
}

impl HRep {
    pub fn new(dim: usize) -> Self {
        HRep {
            dim,
            inequalities: Vec::new(),
            equalities: Vec::new(),
        }
    }

    pub fn check_dims(&self) -> Result<(), GeometryError> {
        for (a, _) in self.inequalities.iter().chain(&self.equalities) {
            if a.len() != self.dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: self.dim,
                    got: a.len(),
                });
            }
        }
        Ok(())
    }

    /// Exact satisfaction check.
    pub fn contains(&self, x: &[Rat]) -> bool {
        x.len() == self.dim
            && self.inequalities.iter().all(|(a, b)| dot(a, x) <= *b)
            && self.equalities.iter().all(|(e, f)| dot(e, x) == *f)
    }
}

/// Vertex representation: a deduplicated, sorted list of rational points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VRep {
    pub dim: usize,
    pub points: Vec<Vec<Rat>>,
}

impl VRep {
    /// Deduplicates under exact equality and sorts for stable output.
    pub fn new(dim: usize, mut points: Vec<Vec<Rat>>) -> Self {
        points.sort();
        points.dedup();
        VRep { dim, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Dimension of the affine hull of the points.
pub fn affine_dimension(v: &VRep) -> Result<usize, GeometryError> {
    if v.points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let base = &v.points[0];
    let diffs: Vec<Vec<BigInt>> = v.points[1..]
        .iter()
        .map(|p| {
            let d: Vec<Rat> = p.iter().zip(base).map(|(a, b)| a - b).collect();
            clear_denominators(&d)
        })
        .collect();
    Ok(int_rank(&diffs))
}

/// Converts halfspaces to vertices. The system must describe a bounded,
/// nonempty polytope.
pub fn dd_h_to_v(h: &HRep) -> Result<VRep, GeometryError> {
    h.check_dims()?;
    let Some((origin, basis)) = solve_affine(&h.equalities, h.dim) else {
        return Err(GeometryError::EmptyPolytope);
    };
    let k = basis.len();

    // Substitute x = origin + basis . y and homogenize with t >= 0:
    // each row becomes (b - a.origin) t - (a.basis) y >= 0.
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(h.inequalities.len() + 1);
    let mut t_row = vec![Rat::zero(); k + 1];
    t_row[0] = Rat::one();
    rows.push(clear_denominators(&t_row));
    for (a, b) in &h.inequalities {
        let shift = b - &dot(a, &origin);
        let reduced: Vec<Rat> = basis.iter().map(|bv| -dot(a, bv)).collect();
        if reduced.iter().all(Rat::is_zero) {
            if shift.is_negative() {
                return Err(GeometryError::EmptyPolytope);
            }
            continue;
        }
        let mut row = Vec::with_capacity(k + 1);
        row.push(shift);
        row.extend(reduced);
        rows.push(clear_denominators(&row));
    }

    let cone = dd::extreme_rays(k + 1, &rows);
    if !cone.lineality.is_empty() {
        return Err(GeometryError::UnboundedInput);
    }
    let mut points = Vec::new();
    for ray in &cone.rays {
        let t = &ray[0];
        if t.is_zero() {
            return Err(GeometryError::UnboundedInput);
        }
        debug_assert!(t.is_positive());
        let tr = Rat::from_bigint(t.clone());
        let mut x = origin.clone();
        for (j, bv) in basis.iter().enumerate() {
            let yj = Rat::from_bigint(ray[j + 1].clone()) / &tr;
            for (xc, bc) in x.iter_mut().zip(bv) {
                *xc += &(&yj * bc);
            }
        }
        points.push(x);
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyPolytope);
    }
    Ok(VRep::new(h.dim, points))
}

/// Converts vertices to halfspaces: the affine hull becomes canonical
/// equalities and the facets come back as canonical integer inequalities,
/// sorted for diff-stable output.
pub fn dd_v_to_h(v: &VRep) -> Result<HRep, GeometryError> {
    if v.points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    for p in &v.points {
        if p.len() != v.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: v.dim,
                got: p.len(),
            });
        }
    }
    let base = &v.points[0];
    let mut diffs: Vec<Vec<Rat>> = v.points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let pivots = rref(&mut diffs);
    let hull_basis = diffs; // reduced rows spanning the difference space
    let k = pivots.len();

    // Equalities: the nullspace of the difference space, one canonical row
    // per free column.
    let pivot_flags = {
        let mut f = vec![false; v.dim];
        for &p in &pivots {
            f[p] = true;
        }
        f
    };
    let mut equalities: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for free in 0..v.dim {
        if pivot_flags[free] {
            continue;
        }
        let mut n = vec![Rat::zero(); v.dim];
        n[free] = Rat::one();
        for (j, &p) in pivots.iter().enumerate() {
            n[p] = -&hull_basis[j][free];
        }
        let rhs = dot(&n, base);
        equalities.push(canonical_equality(&n, &rhs));
    }
    equalities.sort();

    if k == 0 {
        return Ok(HRep {
            dim: v.dim,
            inequalities: Vec::new(),
            equalities,
        });
    }

    // Facets of the full-dimensional reduced polytope are the extreme rays
    // of its homogenization's dual cone; membership rows (1, y_i) are the
    // dual constraints.
    let mut rows = Vec::with_capacity(v.points.len());
    for p in &v.points {
        let mut row = Vec::with_capacity(k + 1);
        row.push(Rat::one());
        for &pc in &pivots {
            row.push(&p[pc] - &base[pc]);
        }
        rows.push(clear_denominators(&row));
    }
    let cone = dd::extreme_rays(k + 1, &rows);
    assert!(
        cone.lineality.is_empty(),
        "dual cone of a full-dimensional polytope is pointed"
    );

    let mut inequalities = Vec::new();
    for ray in &cone.rays {
        let bound = Rat::from_bigint(ray[0].clone());
        let g: Vec<Rat> = ray[1..]
            .iter()
            .map(|x| Rat::from_bigint(-x.clone()))
            .collect();
        debug_assert!(
            !g.iter().all(Rat::is_zero),
            "the homogenization direction is never a facet of a polytope"
        );
        // Lift through the pivot coordinates; the lift supported on pivot
        // columns is the canonical representative modulo the affine hull.
        let mut coeffs = vec![Rat::zero(); v.dim];
        for (j, &p) in pivots.iter().enumerate() {
            coeffs[p] = g[j].clone();
        }
        let rhs = bound + dot(&coeffs, base);
        inequalities.push(canonical_inequality(&coeffs, &rhs));
    }
    inequalities.sort();

    Ok(HRep {
        dim: v.dim,
        inequalities,
        equalities,
    })
}

/// Clears denominators and divides by the gcd, preserving the inequality
/// orientation.
pub fn canonical_inequality(coeffs: &[Rat], rhs: &Rat) -> (Vec<Rat>, Rat) {
    let mut joint = coeffs.to_vec();
    joint.push(rhs.clone());
    let ints = clear_denominators(&joint);
    let rhs = Rat::from_bigint(ints[ints.len() - 1].clone());
    let coeffs = ints[..ints.len() - 1]
        .iter()
        .map(|x| Rat::from_bigint(x.clone()))
        .collect();
    (coeffs, rhs)
}

/// Canonical equality: integer, gcd one, first nonzero coefficient positive.
pub fn canonical_equality(coeffs: &[Rat], rhs: &Rat) -> (Vec<Rat>, Rat) {
    let (mut coeffs, mut rhs) = canonical_inequality(coeffs, rhs);
    if let Some(first) = coeffs.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in &mut coeffs {
                *c = -&*c;
            }
            rhs = -rhs;
        }
    }
    (coeffs, rhs)
}

/// Certificate-carrying convex hull membership.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum HullMembership {
    /// Convex weights over the point list reproducing the query exactly.
    Inside { weights: Vec<Rat> },
    /// A functional `coeffs . x <= rhs` valid on the hull and strictly
    /// violated by the query.
    Outside { coeffs: Vec<Rat>, rhs: Rat },
}

/// Tests whether `p` lies in the convex hull of `v`, producing either exact
/// convex weights or a separating functional. Both certificates are
/// re-verified by direct arithmetic before being returned.
pub fn in_convex_hull(p: &[Rat], v: &VRep) -> Result<HullMembership, GeometryError> {
    if p.len() != v.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: v.dim,
            got: p.len(),
        });
    }
    if v.points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let m = v.points.len();
    let mut h = HRep::new(m);
    for kk in 0..m {
        let mut row = vec![Rat::zero(); m];
        row[kk] = -Rat::one();
        h.inequalities.push((row, Rat::zero()));
    }
    for d in 0..v.dim {
        let row: Vec<Rat> = v.points.iter().map(|pt| pt[d].clone()).collect();
        h.equalities.push((row, p[d].clone()));
    }
    h.equalities.push((vec![Rat::one(); m], Rat::one()));

    match lp_feasible(&h)? {
        Ok(weights) => {
            debug_assert!(verify_convex_combination(p, v, &weights));
            Ok(HullMembership::Inside { weights })
        }
        Err(witness) => {
            // The equality multipliers of the Farkas witness are the
            // separating functional in disguise.
            let z = &witness.eq_multipliers;
            let coeffs: Vec<Rat> = z[..v.dim].iter().map(|x| -x).collect();
            let rhs = z[v.dim].clone();
            let (coeffs, rhs) = canonical_inequality(&coeffs, &rhs);
            assert!(
                v.points.iter().all(|pt| dot(&coeffs, pt) <= rhs) && dot(&coeffs, p) > rhs,
                "internal error: separator failed direct verification"
            );
            Ok(HullMembership::Outside { coeffs, rhs })
        }
    }
}

/// Direct arithmetic check that `weights` are convex and reproduce `p`.
pub fn verify_convex_combination(p: &[Rat], v: &VRep, weights: &[Rat]) -> bool {
    if weights.len() != v.points.len() || weights.iter().any(Rat::is_negative) {
        return false;
    }
    if weights.iter().sum::<Rat>() != Rat::one() {
        return false;
    }
    let mut acc = vec![Rat::zero(); v.dim];
    for (w, pt) in weights.iter().zip(&v.points) {
        for (a, c) in acc.iter_mut().zip(pt) {
            *a += &(w * c);
        }
    }
    acc == p
}

/// Whether two point lists span the same convex hull.
pub fn hull_equal(v1: &VRep, v2: &VRep) -> Result<bool, GeometryError> {
    if v1.dim != v2.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: v1.dim,
            got: v2.dim,
        });
    }
    for p in &v1.points {
        if matches!(in_convex_hull(p, v2)?, HullMembership::Outside { .. }) {
            return Ok(false);
        }
    }
    for p in &v2.points {
        if matches!(in_convex_hull(p, v1)?, HullMembership::Outside { .. }) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn ri(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn cube_hrep() -> HRep {
        let mut h = HRep::new(3);
        for i in 0..3 {
            let mut le = vec![ri(0), ri(0), ri(0)];
            le[i] = ri(1);
            h.inequalities.push((le.clone(), ri(1)));
            let mut ge = vec![ri(0), ri(0), ri(0)];
            ge[i] = ri(-1);
            h.inequalities.push((ge, ri(0)));
        }
        h
    }

    #[test]
    fn cube_has_eight_vertices() {
        let v = dd_h_to_v(&cube_hrep()).unwrap();
        assert_eq!(v.len(), 8);
        for p in &v.points {
            assert!(p.iter().all(|c| *c == ri(0) || *c == ri(1)));
        }
        assert_eq!(affine_dimension(&v).unwrap(), 3);
    }

    #[test]
    fn square_round_trips_through_both_representations() {
        let square = VRep::new(
            2,
            vec![
                vec![ri(0), ri(0)],
                vec![ri(1), ri(0)],
                vec![ri(0), ri(1)],
                vec![ri(1), ri(1)],
            ],
        );
        let h = dd_v_to_h(&square).unwrap();
        assert_eq!(h.inequalities.len(), 4);
        assert!(h.equalities.is_empty());
        let back = dd_h_to_v(&h).unwrap();
        assert_eq!(back, square);
    }

    #[test]
    fn interior_points_are_not_vertices() {
        // Adding the centroid must not change the facet description.
        let tri = VRep::new(
            2,
            vec![vec![ri(0), ri(0)], vec![ri(1), ri(0)], vec![ri(0), ri(1)]],
        );
        let mut fat = tri.points.clone();
        fat.push(vec![r(1, 3), r(1, 3)]);
        let fat = VRep::new(2, fat);
        assert_eq!(dd_v_to_h(&tri).unwrap(), dd_v_to_h(&fat).unwrap());
        assert!(hull_equal(&tri, &fat).unwrap());
    }

    #[test]
    fn lower_dimensional_hulls_get_equalities() {
        // A segment embedded in the plane: one equality, two facets.
        let seg = VRep::new(2, vec![vec![ri(0), ri(0)], vec![ri(2), ri(2)]]);
        let h = dd_v_to_h(&seg).unwrap();
        assert_eq!(h.equalities.len(), 1);
        assert_eq!(h.inequalities.len(), 2);
        let back = dd_h_to_v(&h).unwrap();
        assert_eq!(back, seg);
        assert_eq!(affine_dimension(&seg).unwrap(), 1);
    }

    #[test]
    fn single_point_has_dimension_zero() {
        let pt = VRep::new(2, vec![vec![r(1, 2), r(3, 4)]]);
        assert_eq!(affine_dimension(&pt).unwrap(), 0);
        let h = dd_v_to_h(&pt).unwrap();
        assert_eq!(h.equalities.len(), 2);
        assert!(h.inequalities.is_empty());
        let back = dd_h_to_v(&h).unwrap();
        assert_eq!(back, pt);
    }

    #[test]
    fn unbounded_and_empty_inputs_are_reported() {
        let mut h = HRep::new(2);
        h.inequalities.push((vec![ri(1), ri(0)], ri(1)));
        assert_eq!(dd_h_to_v(&h), Err(GeometryError::UnboundedInput));

        let mut h = HRep::new(1);
        h.inequalities.push((vec![ri(1)], ri(0)));
        h.inequalities.push((vec![ri(-1)], ri(-1)));
        assert_eq!(dd_h_to_v(&h), Err(GeometryError::EmptyPolytope));
    }

    #[test]
    fn hull_membership_produces_verified_certificates() {
        let square = VRep::new(
            2,
            vec![
                vec![ri(0), ri(0)],
                vec![ri(1), ri(0)],
                vec![ri(0), ri(1)],
                vec![ri(1), ri(1)],
            ],
        );
        match in_convex_hull(&[r(1, 2), r(1, 2)], &square).unwrap() {
            HullMembership::Inside { weights } => {
                assert!(verify_convex_combination(
                    &[r(1, 2), r(1, 2)],
                    &square,
                    &weights
                ));
            }
            other => panic!("centre must be inside, got {other:?}"),
        }
        match in_convex_hull(&[ri(2), ri(0)], &square).unwrap() {
            HullMembership::Outside { coeffs, rhs } => {
                assert!(dot(&coeffs, &[ri(2), ri(0)]) > rhs);
            }
            other => panic!("(2,0) must be outside, got {other:?}"),
        }
        // A vertex is inside with a unit weight.
        match in_convex_hull(&[ri(1), ri(1)], &square).unwrap() {
            HullMembership::Inside { weights } => {
                assert_eq!(weights.iter().filter(|w| !w.is_zero()).count(), 1);
            }
            other => panic!("vertex must be inside, got {other:?}"),
        }
    }

    /// Exhaustive Caratheodory search: `p` is in the hull iff some affinely
    /// independent subset carries it with nonnegative unique weights.
    fn brute_force_membership(p: &[Rat], v: &VRep) -> bool {
        use itertools::Itertools;
        let m = v.points.len();
        for size in 1..=(v.dim + 1).min(m) {
            for subset in (0..m).combinations(size) {
                let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
                for d in 0..v.dim {
                    let row = subset.iter().map(|&k| v.points[k][d].clone()).collect();
                    rows.push((row, p[d].clone()));
                }
                rows.push((vec![Rat::one(); size], Rat::one()));
                if let Some((weights, basis)) = linalg::solve_affine(&rows, size) {
                    if basis.is_empty() && weights.iter().all(|w| !w.is_negative()) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn membership_agrees_with_caratheodory_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=4usize {
            for _ in 0..12 {
                let npts = rng.gen_range(3..=8);
                let pts: Vec<Vec<Rat>> = (0..npts)
                    .map(|_| (0..dim).map(|_| ri(rng.gen_range(-3..=3))).collect())
                    .collect();
                let v = VRep::new(dim, pts);
                let q: Vec<Rat> = (0..dim)
                    .map(|_| r(rng.gen_range(-6..=6), rng.gen_range(1..=2)))
                    .collect();
                let lp_says = matches!(
                    in_convex_hull(&q, &v).unwrap(),
                    HullMembership::Inside { .. }
                );
                assert_eq!(
                    lp_says,
                    brute_force_membership(&q, &v),
                    "disagreement at dim {dim}, points {v:?}, query {q:?}"
                );
            }
        }
    }
}
