//! Exact linear algebra over rationals and integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::rational::Rat;

/// Reduced row echelon form in place. Returns the pivot column of every
/// nonzero row, in order.
pub fn rref(mat: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let rows = mat.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = mat[0].len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, p);
        let inv = mat[row][col].recip();
        for c in col..cols {
            let v = &mat[row][c] * &inv;
            mat[row][c] = v;
        }
        for r in 0..rows {
            if r != row && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for c in col..cols {
                    let delta = &factor * &mat[row][c];
                    mat[r][c] -= &delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    mat.truncate(row);
    pivots
}

/// Rank of an integer matrix via fraction-free (Bareiss) elimination.
pub fn int_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let num = &m[r][c] * &m[rank][col] - &m[r][col] * &m[rank][c];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                m[r][c] = num / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Solves the affine system given by `rows` (coefficients, rhs) over `dim`
/// unknowns. Returns a particular solution and a basis of the homogeneous
/// solution space, or `None` when inconsistent.
pub fn solve_affine(
    rows: &[(Vec<Rat>, Rat)],
    dim: usize,
) -> Option<(Vec<Rat>, Vec<Vec<Rat>>)> {
    let mut aug: Vec<Vec<Rat>> = rows
        .iter()
        .map(|(a, b)| {
            let mut row = a.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&dim) {
        return None; // a row reduced to 0 = nonzero
    }
    let mut particular = vec![Rat::zero(); dim];
    for (r, &p) in pivots.iter().enumerate() {
        particular[p] = aug[r][dim].clone();
    }
    let pivot_set: Vec<bool> = {
        let mut v = vec![false; dim];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..dim {
        if pivot_set[free] {
            continue;
        }
        let mut vec = vec![Rat::zero(); dim];
        vec[free] = Rat::one();
        for (r, &p) in pivots.iter().enumerate() {
            vec[p] = -&aug[r][free];
        }
        basis.push(vec);
    }
    Some((particular, basis))
}

/// Divides an integer vector by the gcd of its entries (result keeps the
/// original orientation). The zero vector is left unchanged.
pub fn reduce_int_vec(v: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in v.iter() {
        g = g.gcd(x);
    }
    if g.is_zero() || g == BigInt::from(1) {
        return;
    }
    for x in v.iter_mut() {
        *x = &*x / &g;
    }
}

/// Scales a rational vector to a primitive integer vector with the same
/// orientation.
pub fn clear_denominators(v: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::from(1);
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut out: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    reduce_int_vec(&mut out);
    out
}

/// Rational dot product of an integer row with a rational vector.
pub fn int_dot_rat(a: &[BigInt], x: &[Rat]) -> Rat {
    a.iter()
        .zip(x)
        .map(|(c, v)| Rat::from_bigint(c.clone()) * v)
        .sum()
}

/// Integer dot product.
pub fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn rref_identifies_rank_and_pivots() {
        let mut m = vec![
            vec![r(1, 1), r(2, 1), r(3, 1)],
            vec![r(2, 1), r(4, 1), r(6, 1)],
            vec![r(0, 1), r(1, 1), r(1, 1)],
        ];
        let pivots = rref(&mut m);
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn bareiss_rank_matches_rational_rank() {
        let int = |v: Vec<i64>| v.into_iter().map(BigInt::from).collect::<Vec<_>>();
        let m = vec![int(vec![2, 4, 1]), int(vec![1, 2, 0]), int(vec![3, 6, 1])];
        assert_eq!(int_rank(&m), 2);
        let id = vec![int(vec![1, 0]), int(vec![0, 1])];
        assert_eq!(int_rank(&id), 2);
        assert_eq!(int_rank(&[]), 0);
    }

    #[test]
    fn solve_affine_produces_particular_and_nullspace() {
        // x + y = 2 over two unknowns: one-dimensional solution space.
        let rows = vec![(vec![r(1, 1), r(1, 1)], r(2, 1))];
        let (part, basis) = solve_affine(&rows, 2).unwrap();
        assert_eq!(&part[0] + &part[1], r(2, 1));
        assert_eq!(basis.len(), 1);
        assert_eq!(&basis[0][0] + &basis[0][1], Rat::zero());
        // Inconsistent system.
        let rows = vec![
            (vec![r(1, 1), r(0, 1)], r(0, 1)),
            (vec![r(1, 1), r(0, 1)], r(1, 1)),
        ];
        assert!(solve_affine(&rows, 2).is_none());
    }

    #[test]
    fn clear_denominators_gives_primitive_vectors() {
        let v = vec![r(1, 2), r(-1, 3), r(0, 1)];
        let ints = clear_denominators(&v);
        assert_eq!(ints, vec![BigInt::from(3), BigInt::from(-2), BigInt::from(0)]);
    }
}
