//! Exact optimal contracts for finitely many types.
//!
//! Each assignment of actions to types (an action tuple) defines a polytope of
//! contracts making every assigned action incentive compatible; maximizing the
//! principal's expected utility over it is a linear program. The optimum over
//! all tuples is the optimal contract.
//!
//! For types `θ_i < θ_j` any contract incentivizing `a_i` at `θ_i` and `a_j` at
//! `θ_j` forces `c_{a_i} ≥ c_{a_j}` (add the two IC inequalities). Only tuples
//! with non-increasing cost are therefore enumerated; the rest are infeasible.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{best_response, expected_principal_utility, Contract, DiscreteTypeInstance, Instance};
use crate::numerics::linalg::solve_rational;
use crate::numerics::{LpResult, LpStatus, RationalLp, Rational, Relation};

/// Upper limit on the number of tuple LPs a single solve may run.
pub const TUPLE_GUARD: u128 = 10_000_000;

/// Upper limit on the number of hyperplane subsets examined for the candidate set.
pub const BASIS_GUARD: u128 = 20_000_000;

/// Largest outcome space accepted by [`candidate_contract_set`].
pub const MAX_CANDIDATE_OUTCOMES: usize = 4;

const BATCH: usize = 4096;

/// One action index per type, in the type order of the instance.
pub type ActionTuple = Vec<usize>;

#[derive(Debug, Clone, Serialize)]
pub struct TupleRecord {
    pub tuple: ActionTuple,
    pub status: LpStatus,
    pub value: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub best_contract: Contract<Rational>,
    /// Expected principal utility of `best_contract`, recomputed from best responses.
    pub value: Rational,
    /// Optimal value of the winning tuple's LP; never above `value`.
    pub lp_value: Rational,
    pub best_tuple: ActionTuple,
    pub tuples_solved: usize,
    pub per_tuple: Option<Vec<TupleRecord>>,
}

fn check_tuple(inst: &Instance<Rational>, dti: &DiscreteTypeInstance<Rational>, tuple: &[usize]) -> Result<()> {
    if tuple.len() != dti.len() {
        return Err(Error::usage(format!("tuple has {} entries for {} types", tuple.len(), dti.len())));
    }
    if let Some(&a) = tuple.iter().find(|&&a| a >= inst.n_actions()) {
        return Err(Error::usage(format!("action {a} out of range ({} actions)", inst.n_actions())));
    }
    Ok(())
}

/// The IC polytope LP for `tuple`; its objective omits the constant `Σ γ_i F_{a_i}·r`.
fn tuple_lp(
    inst: &Instance<Rational>,
    dti: &DiscreteTypeInstance<Rational>,
    tuple: &[usize],
    bounded: bool,
) -> (RationalLp, Rational) {
    let m = inst.n_outcomes();
    let mut objective = vec![Rational::zero(); m];
    let mut constant = Rational::zero();
    for (&a, g) in tuple.iter().zip(dti.weights()) {
        for (w, f) in inst.outcome_row(a).iter().enumerate() {
            objective[w] -= g * f;
        }
        constant += g * inst.expected_reward(a);
    }
    let mut lp = RationalLp::new(objective);
    // For a fixed pair (a, a') only the largest right-hand side binds.
    let n = inst.n_actions();
    let mut rhs: Vec<Option<Rational>> = vec![None; n * n];
    for (&a, theta) in tuple.iter().zip(dti.types()) {
        for b in (0..n).filter(|&b| b != a) {
            let value = theta * (&inst.costs()[a] - &inst.costs()[b]);
            let slot = &mut rhs[a * n + b];
            if slot.as_ref().map_or(true, |cur| value > *cur) {
                *slot = Some(value);
            }
        }
    }
    for (idx, value) in rhs.into_iter().enumerate() {
        if let Some(value) = value {
            let (a, b) = (idx / n, idx % n);
            let coeffs = inst
                .outcome_row(a)
                .iter()
                .zip(inst.outcome_row(b))
                .map(|(x, y)| x - y)
                .collect();
            lp.constrain(coeffs, Relation::Ge, value);
        }
    }
    if bounded {
        for w in 0..m {
            lp.set_upper(w, Rational::one());
        }
    }
    (lp, constant)
}

/// Best contract making `tuple[i]` incentive compatible for type `i`.
///
/// The returned value is the full expected principal utility under the tuple's
/// actions (constant term included).
pub fn contract_for_tuple(
    inst: &Instance<Rational>,
    dti: &DiscreteTypeInstance<Rational>,
    tuple: &[usize],
    bounded: bool,
) -> Result<LpResult> {
    check_tuple(inst, dti, tuple)?;
    let (lp, constant) = tuple_lp(inst, dti, tuple, bounded);
    let mut res = lp.solve()?;
    if res.is_optimal() {
        res.value += constant;
    }
    Ok(res)
}

/// Number of cost-non-increasing tuples of length `k`, saturating.
pub fn monotone_tuple_count(costs: &[Rational], k: usize) -> u128 {
    let n = costs.len();
    let mut count = vec![1u128; n];
    for _ in 1..k {
        count = (0..n)
            .map(|b| {
                (0..n)
                    .filter(|&a| costs[a] >= costs[b])
                    .fold(0u128, |s, a| s.saturating_add(count[a]))
            })
            .collect();
    }
    if k == 0 {
        1
    } else {
        count.iter().fold(0u128, |s, c| s.saturating_add(*c))
    }
}

/// Lexicographic enumeration of cost-non-increasing tuples.
struct MonotoneTuples<'a> {
    costs: &'a [Rational],
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl<'a> MonotoneTuples<'a> {
    fn new(costs: &'a [Rational], k: usize) -> Self {
        MonotoneTuples {
            costs,
            current: vec![0; k],
            started: false,
            done: k == 0,
        }
    }

    fn admissible(&self, pos: usize, a: usize) -> bool {
        pos == 0 || self.costs[a] <= self.costs[self.current[pos - 1]]
    }

    /// Fills positions `from..` with the smallest admissible choices.
    fn fill(&mut self, from: usize) -> bool {
        let n = self.costs.len();
        for pos in from..self.current.len() {
            match (0..n).find(|&a| self.admissible(pos, a)) {
                Some(a) => self.current[pos] = a,
                None => return false,
            }
        }
        true
    }
}

impl Iterator for MonotoneTuples<'_> {
    type Item = ActionTuple;

    fn next(&mut self) -> Option<ActionTuple> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.fill(0) {
                self.done = true;
                return None;
            }
            return Some(self.current.clone());
        }
        let n = self.costs.len();
        let k = self.current.len();
        for pos in (0..k).rev() {
            let next = (self.current[pos] + 1..n).find(|&a| self.admissible(pos, a));
            if let Some(a) = next {
                self.current[pos] = a;
                if self.fill(pos + 1) {
                    return Some(self.current.clone());
                }
            }
        }
        self.done = true;
        None
    }
}

/// Exact optimal contract over all action tuples.
///
/// Zero-weight types are dropped first; they constrain nothing the optimum
/// depends on. Ties between tuples go to the lexicographically first.
pub fn solve_discrete_optimal(
    inst: &Instance<Rational>,
    dti: &DiscreteTypeInstance<Rational>,
    bounded: bool,
) -> Result<SolveReport> {
    solve_discrete_optimal_logged(inst, dti, bounded, false)
}

pub fn solve_discrete_optimal_logged(
    inst: &Instance<Rational>,
    dti: &DiscreteTypeInstance<Rational>,
    bounded: bool,
    log_tuples: bool,
) -> Result<SolveReport> {
    let keep: Vec<usize> = (0..dti.len()).filter(|&i| !dti.weights()[i].is_zero()).collect();
    let reduced = DiscreteTypeInstance::new(
        keep.iter().map(|&i| dti.types()[i].clone()).collect(),
        keep.iter().map(|&i| dti.weights()[i].clone()).collect(),
    )?;
    let k = reduced.len();
    let count = monotone_tuple_count(inst.costs(), k);
    if count > TUPLE_GUARD {
        return Err(Error::resource(format!(
            "{count} action tuples for {} actions and {k} types (guard {TUPLE_GUARD}; n^k = {}^{k})",
            inst.n_actions(),
            inst.n_actions()
        )));
    }

    let mut best: Option<(Rational, ActionTuple, Vec<Rational>)> = None;
    let mut log: Vec<TupleRecord> = Vec::new();
    let mut solved = 0usize;
    let mut tuples = MonotoneTuples::new(inst.costs(), k);
    loop {
        let batch: Vec<ActionTuple> = tuples.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let results: Vec<LpResult> = batch
            .par_iter()
            .map(|t| contract_for_tuple(inst, &reduced, t, bounded))
            .collect::<Result<Vec<_>>>()?;
        solved += batch.len();
        for (t, res) in batch.into_iter().zip(results) {
            if log_tuples {
                log.push(TupleRecord {
                    tuple: t.clone(),
                    status: res.status,
                    value: res.is_optimal().then(|| res.value.to_string()),
                });
            }
            if res.is_optimal() && best.as_ref().map_or(true, |(v, _, _)| res.value > *v) {
                best = Some((res.value, t, res.point));
            }
        }
    }
    let (lp_value, best_tuple, point) = best.ok_or_else(|| {
        Error::usage("no action tuple is implementable; the instance lacks a usable zero-cost action")
    })?;
    let best_contract = Contract(point);
    let value = expected_principal_utility(inst, &reduced, &best_contract);
    debug_assert!(value >= lp_value);
    Ok(SolveReport {
        best_contract,
        value,
        lp_value,
        best_tuple,
        tuples_solved: solved,
        per_tuple: log_tuples.then_some(log),
    })
}

/// A hyperplane `coeffs·p = rhs` of the candidate-set arrangement.
#[derive(Debug, Clone)]
struct Hyperplane {
    coeffs: Vec<Rational>,
    rhs: Rational,
    /// `(type index, a, b)` for tie hyperplanes, `None` for box faces.
    tie: Option<(usize, usize, usize)>,
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// A finite set of bounded contracts containing an optimum for every weighting of `types`.
///
/// The set is the union, over all action tuples, of the vertices of the tuple's
/// IC polytope within `[0,1]^m`. A point is such a vertex exactly when `m`
/// independent hyperplanes among the box faces and the tie hyperplanes
/// `(F_a − F_b)·p = θ(c_a − c_b)` pass through it, and each chosen tie is
/// realized (`a, b ∈ B^θ(p)`). The arrangement is enumerated directly, which
/// avoids listing tuples. The result is sorted.
pub fn candidate_contract_set(
    inst: &Instance<Rational>,
    types: &[Rational],
    bounded: bool,
) -> Result<Vec<Contract<Rational>>> {
    if !bounded {
        return Err(Error::usage("the candidate set is defined for bounded contracts only"));
    }
    let m = inst.n_outcomes();
    if m > MAX_CANDIDATE_OUTCOMES {
        return Err(Error::resource(format!(
            "{m} outcomes; candidate enumeration supports at most {MAX_CANDIDATE_OUTCOMES}"
        )));
    }
    if let Some(t) = types.iter().find(|t| **t < Rational::zero() || **t > Rational::one()) {
        return Err(Error::usage(format!("type {t} outside [0,1]")));
    }
    let mut planes: Vec<Hyperplane> = Vec::new();
    for w in 0..m {
        let mut e = vec![Rational::zero(); m];
        e[w] = Rational::one();
        planes.push(Hyperplane { coeffs: e.clone(), rhs: Rational::zero(), tie: None });
        planes.push(Hyperplane { coeffs: e, rhs: Rational::one(), tie: None });
    }
    let n = inst.n_actions();
    for (i, theta) in types.iter().enumerate() {
        for a in 0..n {
            for b in a + 1..n {
                let coeffs: Vec<Rational> = inst
                    .outcome_row(a)
                    .iter()
                    .zip(inst.outcome_row(b))
                    .map(|(x, y)| x - y)
                    .collect();
                if coeffs.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let rhs = theta * (&inst.costs()[a] - &inst.costs()[b]);
                planes.push(Hyperplane { coeffs, rhs, tie: Some((i, a, b)) });
            }
        }
    }
    let combos = binomial(planes.len(), m);
    if combos > BASIS_GUARD {
        return Err(Error::resource(format!(
            "{combos} hyperplane subsets ({} hyperplanes, m = {m}); guard {BASIS_GUARD}",
            planes.len()
        )));
    }

    let subsets = Subsets::new(planes.len(), m);
    let found: BTreeSet<Vec<Rational>> = subsets
        .par_bridge()
        .filter_map(|subset| {
            let a: Vec<Vec<Rational>> = subset.iter().map(|&h| planes[h].coeffs.clone()).collect();
            let b: Vec<Rational> = subset.iter().map(|&h| planes[h].rhs.clone()).collect();
            let p = solve_rational(&a, &b)?;
            if p.iter().any(|x| *x < Rational::zero() || *x > Rational::one()) {
                return None;
            }
            let contract = Contract(p);
            let realized = subset.iter().all(|&h| match planes[h].tie {
                None => true,
                Some((i, a, b)) => {
                    let ic = best_response(inst, &contract, &types[i]).ic_set;
                    ic.contains(&a) && ic.contains(&b)
                }
            });
            realized.then_some(contract.0)
        })
        .collect();
    Ok(found.into_iter().map(Contract).collect())
}

/// All `r`-subsets of `0..n` in lexicographic order.
struct Subsets {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Subsets {
    fn new(n: usize, r: usize) -> Self {
        Subsets { n, current: (0..r).collect(), done: r > n }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let r = self.current.len();
        match (0..r).rev().find(|&i| self.current[i] < self.n - r + i) {
            Some(i) => {
                self.current[i] += 1;
                for j in i + 1..r {
                    self.current[j] = self.current[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// Best expected utility over a finite contract set; ties go to the first.
pub fn best_in_set(
    inst: &Instance<Rational>,
    dti: &DiscreteTypeInstance<Rational>,
    set: &[Contract<Rational>],
) -> Option<(usize, Rational)> {
    let values: Vec<Rational> = set
        .par_iter()
        .map(|p| expected_principal_utility(inst, dti, p))
        .collect();
    values
        .into_iter()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, ref bv)) if v <= *bv => best,
            _ => Some((i, v)),
        })
}
