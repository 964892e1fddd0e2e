//! Exact two-phase simplex over rationals with Bland's pivoting rule.
//!
//! Sizes in this crate stay tiny (tens of variables, at most a few hundred
//! rows), so a dense tableau over [`Rational`] is the whole story.

use num_traits::{One, Signed, Zero};

use super::scalar::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective·x` subject to the constraints and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLp {
    pub objective: Vec<Rational>,
    pub constraints: Vec<LinearConstraint>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// A basic optimal solution when `status == Optimal`, empty otherwise.
    pub point: Vec<Rational>,
    pub value: Rational,
}

impl LpResult {
    fn without_point(status: LpStatus) -> Self {
        LpResult {
            status,
            point: Vec::new(),
            value: Rational::zero(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl RationalLp {
    /// Nonnegative variables, no constraints yet.
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        RationalLp {
            objective,
            constraints: Vec::new(),
            lower: vec![Rational::zero(); n],
            upper: vec![None; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        self.constraints.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_upper(&mut self, var: usize, bound: Rational) -> &mut Self {
        self.upper[var] = Some(bound);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::usage(format!(
                "bound vectors have lengths {}/{} but the LP has {n} variables",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::usage(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
        }
        Ok(())
    }

    /// Checks every constraint and bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.n_vars() {
            return false;
        }
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            *v >= self.lower[j] && self.upper[j].as_ref().is_none_or(|u| v <= u)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs = c
                    .coeffs
                    .iter()
                    .zip(x)
                    .fold(Rational::zero(), |acc, (a, v)| acc + a * v);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn solve(&self) -> Result<LpResult> {
        self.validate()?;
        Ok(Tableau::build(self).run(self))
    }
}

/// Solves `lp` exactly and returns a vertex optimum.
pub fn lp_solve(lp: &RationalLp) -> Result<LpResult> {
    lp.solve()
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n_struct: usize,
    first_artificial: usize,
    n_cols: usize,
}

impl Tableau {
    /// Standard form over shifted variables `y = x - lower >= 0`.
    fn build(lp: &RationalLp) -> Self {
        let n = lp.n_vars();
        let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
        for c in &lp.constraints {
            let shift = c
                .coeffs
                .iter()
                .zip(&lp.lower)
                .fold(Rational::zero(), |acc, (a, l)| acc + a * l);
            rows.push((c.coeffs.clone(), c.relation, &c.rhs - shift));
        }
        for (j, u) in lp.upper.iter().enumerate() {
            if let Some(u) = u {
                let mut coeffs = vec![Rational::zero(); n];
                coeffs[j] = Rational::one();
                rows.push((coeffs, Relation::Le, u - &lp.lower[j]));
            }
        }
        for (coeffs, rel, rhs) in rows.iter_mut() {
            if rhs.is_negative() {
                for a in coeffs.iter_mut() {
                    *a = -a.clone();
                }
                *rhs = -rhs.clone();
                *rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + n_slack;
        let n_cols = first_artificial + n_art;

        let mut table = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut next_slack, mut next_art) = (n, first_artificial);
        for (coeffs, rel, rhs) in rows {
            let mut row = vec![Rational::zero(); n_cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[n_cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            table.push(row);
        }
        Tableau {
            rows: table,
            basis,
            n_struct: n,
            first_artificial,
            n_cols,
        }
    }

    fn run(mut self, lp: &RationalLp) -> LpResult {
        if self.first_artificial < self.n_cols {
            let mut cost = vec![Rational::zero(); self.n_cols];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = -Rational::one();
            }
            let allowed = vec![true; self.n_cols];
            let mut obj = self.reduced_costs(&cost);
            // Phase one is bounded below by zero, it cannot be unbounded.
            let _ = self.iterate(&mut obj, &allowed);
            // obj[rhs] holds minus the phase-one value, i.e. the artificial sum.
            if !obj[self.n_cols].is_zero() {
                return LpResult::without_point(LpStatus::Infeasible);
            }
            self.expel_artificials();
        }

        let mut cost = vec![Rational::zero(); self.n_cols];
        cost[..self.n_struct].clone_from_slice(&lp.objective);
        let allowed: Vec<bool> = (0..self.n_cols).map(|j| j < self.first_artificial).collect();
        let mut obj = self.reduced_costs(&cost);
        if !self.iterate(&mut obj, &allowed) {
            return LpResult::without_point(LpStatus::Unbounded);
        }

        let mut point = lp.lower.clone();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_struct {
                point[b] = &point[b] + &row[self.n_cols];
            }
        }
        let value = lp
            .objective
            .iter()
            .zip(&point)
            .fold(Rational::zero(), |acc, (c, x)| acc + c * x);
        LpResult {
            status: LpStatus::Optimal,
            point,
            value,
        }
    }

    /// `cost - c_B^T T` over every column, the last entry being minus the objective value.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(row) {
                if !t.is_zero() {
                    *o = &*o - cb * t;
                }
            }
        }
        obj
    }

    /// Bland's rule iterations. Returns false when the problem is unbounded.
    fn iterate(&mut self, obj: &mut [Rational], allowed: &[bool]) -> bool {
        loop {
            let Some(enter) = (0..self.n_cols).find(|&j| allowed[j] && obj[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.n_cols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((leave, _)) = leave else {
                return false;
            };
            self.pivot(leave, enter, obj);
        }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational]) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Pivots zero-level artificials out of the basis; drops rows that are redundant.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                Some(j) => {
                    let mut scratch = vec![Rational::zero(); self.n_cols + 1];
                    self.pivot(r, j, &mut scratch);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn single_bound_optimum_is_exact() {
        let mut lp = RationalLp::new(vec![q(1, 1)]);
        lp.constrain(vec![q(1, 1)], Relation::Le, q(3, 7));
        let res = lp.solve().unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.value, q(3, 7));
        assert_eq!(res.point, vec![q(3, 7)]);
    }

    #[test]
    fn degenerate_tie_resolved_by_bland_order() {
        let mut lp = RationalLp::new(vec![q(1, 1), q(1, 1)]);
        lp.constrain(vec![q(1, 1), q(1, 1)], Relation::Le, q(1, 1));
        let res = lp.solve().unwrap();
        assert_eq!(res.value, q(1, 1));
        assert_eq!(res.point, vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = RationalLp::new(vec![q(1, 1)]);
        lp.constrain(vec![q(1, 1)], Relation::Ge, q(2, 1));
        lp.constrain(vec![q(1, 1)], Relation::Le, q(1, 1));
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);

        let mut lp = RationalLp::new(vec![q(1, 1), q(-1, 1)]);
        lp.constrain(vec![q(1, 1), q(-1, 1)], Relation::Ge, q(-5, 1));
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_lower_bounds() {
        // max -x - y, x + y = 3/2, x >= 1/2 (shifted), y >= 0
        let mut lp = RationalLp::new(vec![q(-1, 1), q(-2, 1)]);
        lp.constrain(vec![q(1, 1), q(1, 1)], Relation::Eq, q(3, 2));
        lp.lower[0] = q(1, 2);
        let res = lp.solve().unwrap();
        assert_eq!(res.point, vec![q(3, 2), q(0, 1)]);
        assert_eq!(res.value, q(-3, 2));
        assert!(lp.is_feasible(&res.point));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = RationalLp::new(vec![q(1, 1), q(0, 1)]);
        lp.constrain(vec![q(1, 1), q(1, 1)], Relation::Eq, q(1, 1));
        lp.constrain(vec![q(2, 1), q(2, 1)], Relation::Eq, q(2, 1));
        let res = lp.solve().unwrap();
        assert_eq!(res.value, q(1, 1));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Cycles under Dantzig's largest-coefficient rule without anti-cycling.
        let mut lp = RationalLp::new(vec![q(3, 4), q(-150, 1), q(1, 50), q(-6, 1)]);
        lp.constrain(vec![q(1, 4), q(-60, 1), q(-1, 25), q(9, 1)], Relation::Le, q(0, 1));
        lp.constrain(vec![q(1, 2), q(-90, 1), q(-1, 50), q(3, 1)], Relation::Le, q(0, 1));
        lp.constrain(vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)], Relation::Le, q(1, 1));
        let res = lp.solve().unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.value, q(1, 20));
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let mut lp = RationalLp::new(vec![q(1, 1)]);
        lp.constrain(vec![q(1, 1), q(1, 1)], Relation::Le, q(1, 1));
        assert!(matches!(lp.solve(), Err(Error::Usage(_))));
    }

    #[test]
    fn upper_bounds_are_respected() {
        let mut lp = RationalLp::new(vec![q(1, 1), q(1, 1)]);
        lp.set_upper(0, q(1, 3)).set_upper(1, q(2, 3));
        let res = lp.solve().unwrap();
        assert_eq!(res.value, q(1, 1));
        assert_eq!(res.point, vec![q(1, 3), q(2, 3)]);
    }
}
