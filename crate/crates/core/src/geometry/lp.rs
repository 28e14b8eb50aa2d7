//! Exact rational linear programming.
//!
//! Dense two-phase simplex with Bland's pivoting rule. Exact arithmetic
//! removes every numerical failure mode, leaving cycling as the only risk,
//! which Bland's rule eliminates. Infeasible systems come back with a
//! Farkas witness that is re-verified by direct arithmetic before being
//! returned; optimal solutions carry the optimal point.

use crate::rational::{dot, Rat};

use super::{GeometryError, HRep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Outcome of an exact LP solve.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Optimum attained at `point` (a basic solution).
    Optimal { value: Rat, point: Vec<Rat> },
    /// No feasible point; `witness` proves it.
    Infeasible { witness: FarkasWitness },
    Unbounded,
}

/// A nonnegative combination of the constraints that sums to the
/// contradiction `0 <= -1` (after scaling): multipliers for the inequality
/// rows are nonnegative, equality rows are unrestricted, the combined
/// coefficient vector vanishes and the combined right-hand side is negative.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FarkasWitness {
    pub ineq_multipliers: Vec<Rat>,
    pub eq_multipliers: Vec<Rat>,
}

impl FarkasWitness {
    /// Direct arithmetic verification against the system it claims to refute.
    pub fn verify(&self, h: &HRep) -> bool {
        if self.ineq_multipliers.len() != h.inequalities.len()
            || self.eq_multipliers.len() != h.equalities.len()
        {
            return false;
        }
        if self.ineq_multipliers.iter().any(Rat::is_negative) {
            return false;
        }
        let mut combined = vec![Rat::zero(); h.dim];
        let mut rhs = Rat::zero();
        for (y, (a, b)) in self.ineq_multipliers.iter().zip(&h.inequalities) {
            for (acc, c) in combined.iter_mut().zip(a) {
                *acc += &(y * c);
            }
            rhs += &(y * b);
        }
        for (z, (e, f)) in self.eq_multipliers.iter().zip(&h.equalities) {
            for (acc, c) in combined.iter_mut().zip(e) {
                *acc += &(z * c);
            }
            rhs += &(z * f);
        }
        combined.iter().all(Rat::is_zero) && rhs.is_negative()
    }
}

/// Solves `sense (objective . x)` subject to `h`. The objective length must
/// match the dimension of `h`.
pub fn lp_solve(h: &HRep, objective: &[Rat], sense: Sense) -> Result<LpOutcome, GeometryError> {
    if objective.len() != h.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: h.dim,
            got: objective.len(),
        });
    }
    h.check_dims()?;
    let mut tab = Tableau::build(h);
    match tab.phase_one() {
        PhaseOneResult::Feasible => {}
        PhaseOneResult::Infeasible => {
            let witness = tab.farkas_witness(h);
            assert!(
                witness.verify(h),
                "internal error: Farkas witness failed direct verification"
            );
            return Ok(LpOutcome::Infeasible { witness });
        }
    }
    let min_objective: Vec<Rat> = match sense {
        Sense::Minimize => objective.to_vec(),
        Sense::Maximize => objective.iter().map(|c| -c).collect(),
    };
    if !tab.phase_two(&min_objective) {
        return Ok(LpOutcome::Unbounded);
    }
    let point = tab.solution();
    debug_assert!(h.contains(&point), "optimal point must satisfy the system");
    let value = dot(objective, &point);
    Ok(LpOutcome::Optimal { value, point })
}

/// Feasibility check: a feasible point or a Farkas witness.
pub fn lp_feasible(h: &HRep) -> Result<Result<Vec<Rat>, FarkasWitness>, GeometryError> {
    match lp_solve(h, &vec![Rat::zero(); h.dim], Sense::Minimize)? {
        LpOutcome::Optimal { point, .. } => Ok(Ok(point)),
        LpOutcome::Infeasible { witness } => Ok(Err(witness)),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

enum PhaseOneResult {
    Feasible,
    Infeasible,
}

/// Column roles in the standard form tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Col {
    /// Positive part of original variable `j` (or the whole variable if it
    /// was detected as sign-restricted).
    Plus(usize),
    /// Negative part of original variable `j`.
    Minus(usize),
    /// Slack of standard row `i`.
    Slack(usize),
    /// Artificial of standard row `i`.
    Artificial(usize),
}

/// Origin of a standard-form row.
#[derive(Debug, Clone, Copy)]
enum RowOrigin {
    /// Inequality `r` of the input, possibly sign-flipped.
    Inequality(usize),
    /// Equality `q` of the input, possibly sign-flipped.
    Equality(usize),
}

struct Tableau {
    /// `rows x cols` coefficients, kept as `B^-1 [A | b]`.
    a: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    cols: Vec<Col>,
    origins: Vec<RowOrigin>,
    flipped: Vec<bool>,
    basis: Vec<usize>,
    /// For each original variable: the column of its positive part, and the
    /// column of its negative part unless it is sign-restricted.
    var_plus: Vec<usize>,
    var_minus: Vec<Option<usize>>,
    /// For each standard row, the column that started as its identity column.
    witness_col: Vec<usize>,
    /// Index of the input inequality row asserting `x_j >= 0`, if any.
    nonneg_row: Vec<Option<usize>>,
}

impl Tableau {
    fn build(h: &HRep) -> Tableau {
        let n = h.dim;
        // Rows of the form c*x_j <= 0 with c < 0 are variable sign
        // restrictions; fold them into the column layout instead of
        // materializing slack rows.
        let mut nonneg_row: Vec<Option<usize>> = vec![None; n];
        let mut ordinary: Vec<usize> = Vec::new();
        for (r, (a, b)) in h.inequalities.iter().enumerate() {
            let mut nonzero = a.iter().enumerate().filter(|(_, c)| !c.is_zero());
            let first = nonzero.next();
            let rest = nonzero.next();
            match (first, rest) {
                (Some((j, c)), None) if c.is_negative() && b.is_zero() && nonneg_row[j].is_none() => {
                    nonneg_row[j] = Some(r);
                }
                _ => ordinary.push(r),
            }
        }

        let mut cols: Vec<Col> = Vec::new();
        let mut var_plus = vec![usize::MAX; n];
        let mut var_minus: Vec<Option<usize>> = vec![None; n];
        for j in 0..n {
            var_plus[j] = cols.len();
            cols.push(Col::Plus(j));
            if nonneg_row[j].is_none() {
                var_minus[j] = Some(cols.len());
                cols.push(Col::Minus(j));
            }
        }

        let num_rows = ordinary.len() + h.equalities.len();
        let mut a = Vec::with_capacity(num_rows);
        let mut rhs = Vec::with_capacity(num_rows);
        let mut origins = Vec::with_capacity(num_rows);
        let mut flipped = Vec::with_capacity(num_rows);

        let mut push_row = |coeffs: &[Rat], b: &Rat, origin: RowOrigin| {
            let flip = b.is_negative();
            let sign = if flip { -Rat::one() } else { Rat::one() };
            let mut row: Vec<Rat> = Vec::with_capacity(cols.len());
            for col in &cols {
                let v = match col {
                    Col::Plus(j) => &coeffs[*j] * &sign,
                    Col::Minus(j) => -(&coeffs[*j] * &sign),
                    _ => unreachable!("slacks added later"),
                };
                row.push(v);
            }
            a.push(row);
            rhs.push(b * &sign);
            origins.push(origin);
            flipped.push(flip);
        };

        for &r in &ordinary {
            let (coeffs, b) = &h.inequalities[r];
            push_row(coeffs, b, RowOrigin::Inequality(r));
        }
        for (q, (coeffs, f)) in h.equalities.iter().enumerate() {
            push_row(coeffs, f, RowOrigin::Equality(q));
        }

        // Slack columns for inequality rows; identity columns and the
        // initial basis.
        let mut basis = vec![usize::MAX; num_rows];
        let mut witness_col = vec![usize::MAX; num_rows];
        for i in 0..num_rows {
            if let RowOrigin::Inequality(_) = origins[i] {
                let col = cols.len();
                cols.push(Col::Slack(i));
                let coef = if flipped[i] { -Rat::one() } else { Rat::one() };
                for (r, row) in a.iter_mut().enumerate() {
                    row.push(if r == i { coef.clone() } else { Rat::zero() });
                }
                witness_col[i] = col;
                if !flipped[i] {
                    basis[i] = col;
                }
            }
        }
        for i in 0..num_rows {
            if basis[i] == usize::MAX {
                let col = cols.len();
                cols.push(Col::Artificial(i));
                for (r, row) in a.iter_mut().enumerate() {
                    row.push(if r == i { Rat::one() } else { Rat::zero() });
                }
                basis[i] = col;
                if matches!(origins[i], RowOrigin::Equality(_)) {
                    witness_col[i] = col;
                }
            }
        }

        Tableau {
            a,
            rhs,
            cols,
            origins,
            flipped,
            basis,
            var_plus,
            var_minus,
            witness_col,
            nonneg_row,
        }
    }

    fn num_rows(&self) -> usize {
        self.a.len()
    }

    /// Reduced costs for cost vector `c` (per column), given the current
    /// basis, together with the objective value.
    fn reduced_costs(&self, c: &[Rat]) -> (Vec<Rat>, Rat) {
        // u = c_B B^-1 falls out of the tableau rows: row i of `a` is
        // B^-1 A restricted to row i.
        let mut reduced: Vec<Rat> = c.to_vec();
        let mut value = Rat::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in reduced.iter_mut().enumerate() {
                *r -= &(cb * &self.a[i][j]);
            }
            value += &(cb * &self.rhs[i]);
        }
        (reduced, value)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.a[row][col].recip();
        for j in 0..self.cols.len() {
            let v = &self.a[row][j] * &inv;
            self.a[row][j] = v;
        }
        let v = &self.rhs[row] * &inv;
        self.rhs[row] = v;
        for i in 0..self.num_rows() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let factor = self.a[i][col].clone();
            for j in 0..self.cols.len() {
                let delta = &factor * &self.a[row][j];
                self.a[i][j] -= &delta;
            }
            let delta = &factor * &self.rhs[row];
            self.rhs[i] -= &delta;
        }
        self.basis[row] = col;
    }

    /// Bland's rule iteration for minimizing `c`. `allowed` filters the
    /// entering columns. Returns false on unboundedness. The reduced-cost
    /// row is maintained incrementally across pivots.
    fn simplex(&mut self, c: &[Rat], allowed: impl Fn(&Col) -> bool) -> bool {
        let (mut reduced, _) = self.reduced_costs(c);
        loop {
            let entering = (0..self.cols.len())
                .find(|&j| allowed(&self.cols[j]) && reduced[j].is_negative());
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rat)> = None;
            for i in 0..self.num_rows() {
                if !self.a[i][col].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.a[i][col];
                let better = match &leaving {
                    None => true,
                    // Bland tie-break: smallest basic column index.
                    Some((best, r)) => {
                        ratio < *r || (ratio == *r && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(row, col);
            let factor = reduced[col].clone();
            if !factor.is_zero() {
                for (r, v) in reduced.iter_mut().zip(&self.a[row]) {
                    if !v.is_zero() {
                        *r -= &(&factor * v);
                    }
                }
            }
            debug_assert!(reduced[col].is_zero());
        }
    }

    fn phase_one(&mut self) -> PhaseOneResult {
        let c: Vec<Rat> = self
            .cols
            .iter()
            .map(|col| match col {
                Col::Artificial(_) => Rat::one(),
                _ => Rat::zero(),
            })
            .collect();
        let ok = self.simplex(&c, |_| true);
        assert!(ok, "phase one is bounded below by zero");
        let (_, value) = self.reduced_costs(&c);
        if value.is_positive() {
            return PhaseOneResult::Infeasible;
        }
        // Drive remaining artificials out of the basis where possible;
        // rows that resist are redundant and stay pinned at zero.
        for i in 0..self.num_rows() {
            if matches!(self.cols[self.basis[i]], Col::Artificial(_)) {
                let pivot_col = (0..self.cols.len()).find(|&j| {
                    !matches!(self.cols[j], Col::Artificial(_)) && !self.a[i][j].is_zero()
                });
                if let Some(col) = pivot_col {
                    self.pivot(i, col);
                }
            }
        }
        PhaseOneResult::Feasible
    }

    fn phase_two(&mut self, min_objective: &[Rat]) -> bool {
        let c: Vec<Rat> = self
            .cols
            .iter()
            .map(|col| match col {
                Col::Plus(j) => min_objective[*j].clone(),
                Col::Minus(j) => -&min_objective[*j],
                _ => Rat::zero(),
            })
            .collect();
        self.simplex(&c, |col| !matches!(col, Col::Artificial(_)))
    }

    fn solution(&self) -> Vec<Rat> {
        let n = self.var_plus.len();
        let mut value = vec![Rat::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            match self.cols[b] {
                Col::Plus(j) => value[j] += &self.rhs[i],
                Col::Minus(j) => value[j] -= &self.rhs[i],
                _ => {}
            }
        }
        value
    }

    /// Extracts the Farkas witness after an infeasible phase one: the duals
    /// read off the identity columns, mapped back through row sign flips and
    /// folded variable-bound rows.
    fn farkas_witness(&self, h: &HRep) -> FarkasWitness {
        let c: Vec<Rat> = self
            .cols
            .iter()
            .map(|col| match col {
                Col::Artificial(_) => Rat::one(),
                _ => Rat::zero(),
            })
            .collect();
        let (reduced, _) = self.reduced_costs(&c);
        // u_i is recovered from the reduced cost of row i's identity column:
        // slack s_i has cost 0 and reduced cost -u_i (times the flip sign on
        // its coefficient); an artificial has cost 1 and reduced cost 1 - u_i.
        let mut u = vec![Rat::zero(); self.num_rows()];
        for i in 0..self.num_rows() {
            let w = self.witness_col[i];
            u[i] = match self.cols[w] {
                Col::Artificial(_) => Rat::one() - &reduced[w],
                Col::Slack(_) => {
                    let coef = if self.flipped[i] { -Rat::one() } else { Rat::one() };
                    -(&reduced[w] / &coef)
                }
                _ => unreachable!("witness columns are identity columns"),
            };
        }
        let mut ineq = vec![Rat::zero(); h.inequalities.len()];
        let mut eq = vec![Rat::zero(); h.equalities.len()];
        for (i, origin) in self.origins.iter().enumerate() {
            let sign = if self.flipped[i] { -Rat::one() } else { Rat::one() };
            // The raw combination uses y = sign * u <= 0; negate for the
            // conventional nonnegative witness.
            let m = -(&sign * &u[i]);
            match origin {
                RowOrigin::Inequality(r) => ineq[*r] = m,
                RowOrigin::Equality(q) => eq[*q] = m,
            }
        }
        // Sign-restricted variables absorb the leftover coefficients; they
        // belong to the folded x_j >= 0 rows.
        let n = h.dim;
        let mut combined = vec![Rat::zero(); n];
        for (y, (a, _)) in ineq.iter().zip(&h.inequalities) {
            if y.is_zero() {
                continue;
            }
            for (acc, cval) in combined.iter_mut().zip(a) {
                *acc += &(y * cval);
            }
        }
        for (z, (e, _)) in eq.iter().zip(&h.equalities) {
            if z.is_zero() {
                continue;
            }
            for (acc, cval) in combined.iter_mut().zip(e) {
                *acc += &(z * cval);
            }
        }
        for j in 0..n {
            if let Some(r) = self.nonneg_row[j] {
                if !combined[j].is_zero() {
                    // combined[j] + mu * c = 0 with c the (negative) bound
                    // row coefficient.
                    let cval = &h.inequalities[r].0[j];
                    ineq[r] = -(&combined[j] / cval);
                }
            }
        }
        FarkasWitness {
            ineq_multipliers: ineq,
            eq_multipliers: eq,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HRep;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn unit_interval() -> HRep {
        // 0 <= x <= 1
        HRep {
            dim: 1,
            inequalities: vec![
                (vec![r(-1, 1)], r(0, 1)),
                (vec![r(1, 1)], r(1, 1)),
            ],
            equalities: vec![],
        }
    }

    #[test]
    fn maximizes_over_the_unit_interval() {
        let h = unit_interval();
        match lp_solve(&h, &[r(1, 1)], Sense::Maximize).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, r(1, 1));
                assert_eq!(point, vec![r(1, 1)]);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
        match lp_solve(&h, &[r(1, 1)], Sense::Minimize).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(0, 1)),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_pair_yields_verified_farkas_witness() {
        // x <= 0 and x >= 1.
        let h = HRep {
            dim: 1,
            inequalities: vec![
                (vec![r(1, 1)], r(0, 1)),
                (vec![r(-1, 1)], r(-1, 1)),
            ],
            equalities: vec![],
        };
        match lp_solve(&h, &[r(1, 1)], Sense::Maximize).unwrap() {
            LpOutcome::Infeasible { witness } => assert!(witness.verify(&h)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn detects_unboundedness() {
        // x >= 0, maximize x.
        let h = HRep {
            dim: 1,
            inequalities: vec![(vec![r(-1, 1)], r(0, 1))],
            equalities: vec![],
        };
        assert!(matches!(
            lp_solve(&h, &[r(1, 1)], Sense::Maximize).unwrap(),
            LpOutcome::Unbounded
        ));
    }

    #[test]
    fn equalities_and_bounds_interact() {
        // x + y = 1, x, y >= 0: maximize 2x + y gives 2 at (1, 0).
        let h = HRep {
            dim: 2,
            inequalities: vec![
                (vec![r(-1, 1), r(0, 1)], r(0, 1)),
                (vec![r(0, 1), r(-1, 1)], r(0, 1)),
            ],
            equalities: vec![(vec![r(1, 1), r(1, 1)], r(1, 1))],
        };
        match lp_solve(&h, &[r(2, 1), r(1, 1)], Sense::Maximize).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, r(2, 1));
                assert_eq!(point, vec![r(1, 1), r(0, 1)]);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_equalities_with_folded_bounds() {
        // x >= 0, y >= 0, x + y = -1.
        let h = HRep {
            dim: 2,
            inequalities: vec![
                (vec![r(-1, 1), r(0, 1)], r(0, 1)),
                (vec![r(0, 1), r(-1, 1)], r(0, 1)),
            ],
            equalities: vec![(vec![r(1, 1), r(1, 1)], r(-1, 1))],
        };
        match lp_feasible(&h).unwrap() {
            Err(witness) => assert!(witness.verify(&h)),
            Ok(p) => panic!("expected infeasible, got point {p:?}"),
        }
    }
}
