//! Double description over integer cones.
//!
//! Generators are primitive integer vectors; a cone is maintained as a
//! lineality basis plus extreme rays modulo lineality. Constraints are
//! inserted one at a time, ordered by a fewest-satisfied-generators
//! heuristic to keep intermediate generator counts small. Pair adjacency
//! is prefiltered combinatorially and confirmed algebraically via an exact
//! rank computation on the common tight set.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::linalg::{int_dot, int_rank, reduce_int_vec};

/// Tight-row bookkeeping, indexed by original constraint position.
#[derive(Clone, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersect(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

#[derive(Clone)]
struct Ray {
    v: Vec<BigInt>,
    zero: Bits,
}

/// Generators of a polyhedral cone `{ z : rows . z >= 0 }`.
pub(crate) struct GeneratorCone {
    pub lineality: Vec<Vec<BigInt>>,
    pub rays: Vec<Vec<BigInt>>,
}

/// Computes the generator description of the cone cut out by
/// `rows . z >= 0`, starting from the full space.
pub(crate) fn extreme_rays(dim: usize, rows: &[Vec<BigInt>]) -> GeneratorCone {
    let nrows = rows.len();
    let mut lineality: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| {
            let mut e = vec![BigInt::zero(); dim];
            e[i] = BigInt::from(1);
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    let mut remaining: Vec<usize> = (0..nrows).collect();
    let mut inserted: Vec<usize> = Vec::new();

    while !remaining.is_empty() {
        // Fewest satisfied generators first; ties go to the earliest row.
        let mut best = 0;
        let mut best_count = usize::MAX;
        for (k, &c) in remaining.iter().enumerate() {
            let count = rays
                .iter()
                .filter(|r| !int_dot(&rows[c], &r.v).is_negative())
                .count();
            if count < best_count {
                best_count = count;
                best = k;
            }
        }
        let c_idx = remaining.remove(best);
        insert(dim, rows, c_idx, &inserted, &mut lineality, &mut rays, nrows);
        inserted.push(c_idx);
    }

    GeneratorCone {
        lineality,
        rays: rays.into_iter().map(|r| r.v).collect(),
    }
}

fn insert(
    dim: usize,
    rows: &[Vec<BigInt>],
    c_idx: usize,
    inserted: &[usize],
    lineality: &mut Vec<Vec<BigInt>>,
    rays: &mut Vec<Ray>,
    nrows: usize,
) {
    let c = &rows[c_idx];
    let lin_dots: Vec<BigInt> = lineality.iter().map(|l| int_dot(c, l)).collect();

    if let Some(k) = lin_dots.iter().position(|d| !d.is_zero()) {
        // The constraint cuts the lineality space: one lineality vector
        // becomes a ray, the rest are shifted into the hyperplane.
        let mut l0 = lineality.remove(k);
        let mut d0 = lin_dots[k].clone();
        if d0.is_negative() {
            for x in &mut l0 {
                *x = -&*x;
            }
            d0 = -d0;
        }
        for (j, l) in lineality.iter_mut().enumerate() {
            let dj = if j < k { &lin_dots[j] } else { &lin_dots[j + 1] };
            if dj.is_zero() {
                continue;
            }
            for (x, l0x) in l.iter_mut().zip(&l0) {
                *x = &*x * &d0 - dj * l0x;
            }
            reduce_int_vec(l);
        }
        for r in rays.iter_mut() {
            let t = int_dot(c, &r.v);
            if t.is_zero() {
                r.zero.set(c_idx);
                continue;
            }
            for (x, l0x) in r.v.iter_mut().zip(&l0) {
                *x = &*x * &d0 - &t * l0x;
            }
            reduce_int_vec(&mut r.v);
            r.zero.set(c_idx);
        }
        let mut zero = Bits::new(nrows);
        for &i in inserted {
            zero.set(i);
        }
        reduce_int_vec(&mut l0);
        rays.push(Ray { v: l0, zero });
        return;
    }

    // Lineality untouched: split rays on the sign of the new constraint.
    let dots: Vec<BigInt> = rays.iter().map(|r| int_dot(c, &r.v)).collect();
    if dots.iter().all(|d| !d.is_negative()) {
        for (r, d) in rays.iter_mut().zip(&dots) {
            if d.is_zero() {
                r.zero.set(c_idx);
            }
        }
        return;
    }

    let pos: Vec<usize> = (0..rays.len()).filter(|&i| dots[i].is_positive()).collect();
    let neg: Vec<usize> = (0..rays.len()).filter(|&i| dots[i].is_negative()).collect();
    let quotient_dim = dim - lineality.len();
    assert!(quotient_dim >= 2, "pointed quotient with opposing rays");
    let needed_rank = quotient_dim - 2;

    let pairs: Vec<(usize, usize)> = pos
        .iter()
        .flat_map(|&p| neg.iter().map(move |&n| (p, n)))
        .collect();
    let mut fresh: Vec<Ray> = pairs
        .par_iter()
        .filter_map(|&(p, n)| {
            let common = rays[p].zero.intersect(&rays[n].zero);
            if common.count() < needed_rank {
                return None;
            }
            let third = rays.iter().enumerate().any(|(k, r)| {
                k != p && k != n && common.is_subset_of(&r.zero)
            });
            if third {
                return None;
            }
            let tight: Vec<Vec<BigInt>> = common.ones().map(|i| rows[i].clone()).collect();
            if int_rank(&tight) != needed_rank {
                return None;
            }
            let tp = &dots[p];
            let tn = &dots[n];
            let mut v: Vec<BigInt> = rays[p]
                .v
                .iter()
                .zip(&rays[n].v)
                .map(|(pv, nv)| tp * nv - tn * pv)
                .collect();
            reduce_int_vec(&mut v);
            let mut zero = common;
            zero.set(c_idx);
            Some(Ray { v, zero })
        })
        .collect();

    let mut kept: Vec<Ray> = Vec::with_capacity(pos.len() + dots.len() + fresh.len());
    for (i, ray) in rays.drain(..).enumerate() {
        if dots[i].is_negative() {
            continue;
        }
        let mut ray = ray;
        if dots[i].is_zero() {
            ray.zero.set(c_idx);
        }
        kept.push(ray);
    }
    kept.append(&mut fresh);
    *rays = kept;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: Vec<i64>) -> Vec<BigInt> {
        v.into_iter().map(BigInt::from).collect()
    }

    #[test]
    fn quadrant_has_axis_rays() {
        // x >= 0, y >= 0 in the plane.
        let rows = vec![row(vec![1, 0]), row(vec![0, 1])];
        let cone = extreme_rays(2, &rows);
        assert!(cone.lineality.is_empty());
        let mut rays = cone.rays;
        rays.sort();
        assert_eq!(rays, vec![row(vec![0, 1]), row(vec![1, 0])]);
    }

    #[test]
    fn halfspace_keeps_lineality()
    {
        // Single constraint in 3 dimensions: 2-dimensional lineality plus
        // one ray.
        let rows = vec![row(vec![1, 0, 0])];
        let cone = extreme_rays(3, &rows);
        assert_eq!(cone.lineality.len(), 2);
        assert_eq!(cone.rays.len(), 1);
        assert!(cone.rays[0][0].is_positive());
    }

    #[test]
    fn cube_cone_has_eight_vertex_rays() {
        // Homogenized unit cube: t >= 0, 0 <= x_i <= t.
        let mut rows = vec![row(vec![1, 0, 0, 0])];
        for i in 0..3 {
            let mut le = vec![1i64, 0, 0, 0];
            le[i + 1] = -1;
            let mut ge = vec![0i64, 0, 0, 0];
            ge[i + 1] = 1;
            rows.push(row(le));
            rows.push(row(ge));
        }
        let cone = extreme_rays(4, &rows);
        assert!(cone.lineality.is_empty());
        assert_eq!(cone.rays.len(), 8);
        for r in &cone.rays {
            assert_eq!(r[0], BigInt::from(1));
            assert!(r[1..].iter().all(|x| x.is_zero() || *x == BigInt::from(1)));
        }
    }
}
