//! The principal-agent model with single-dimensional types.
//!
//! An agent of type `θ ∈ [0,1]` playing action `a` under contract `p` earns
//! `F_a·p − θ c_a`; the principal earns `F_a·(r − p)`. The agent best-responds,
//! breaking ties in favor of the principal and then by lowest action index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{dot, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    outcome_probs: Vec<Vec<T>>,
    rewards: Vec<T>,
    costs: Vec<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> Instance<T> {
    /// Validates and builds an instance from the outcome matrix `F` (rows are
    /// actions), outcome rewards and unit costs.
    pub fn new(
        outcome_probs: Vec<Vec<T>>,
        rewards: Vec<T>,
        costs: Vec<T>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = outcome_probs.len();
        let m = rewards.len();
        if n == 0 {
            return Err(Error::invalid("F", "at least one action is required"));
        }
        if m == 0 {
            return Err(Error::invalid("r", "at least one outcome is required"));
        }
        if costs.len() != n {
            return Err(Error::invalid(
                "c",
                format!("{} costs given for {n} actions", costs.len()),
            ));
        }
        let (zero, one) = (T::zero(), T::one());
        for (a, row) in outcome_probs.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(
                    format!("F[{a}]"),
                    format!("row has {} entries, expected {m}", row.len()),
                ));
            }
            if let Some(w) = row.iter().position(|x| *x < zero || *x > one) {
                return Err(Error::invalid(format!("F[{a}][{w}]"), "probability outside [0,1]"));
            }
            let total = row.iter().cloned().fold(T::zero(), |s, x| s + x);
            if (total.clone() - one.clone()).abs() > T::sum_tol() {
                return Err(Error::invalid(format!("F[{a}]"), format!("row sums to {total}, expected 1")));
            }
        }
        if let Some(w) = rewards.iter().position(|x| *x < zero || *x > one) {
            return Err(Error::invalid(format!("r[{w}]"), "reward outside [0,1]; normalize rewards first"));
        }
        if let Some(a) = costs.iter().position(|x| *x < zero) {
            return Err(Error::invalid(format!("c[{a}]"), "negative cost"));
        }
        if !costs.iter().any(|c| c.is_zero()) {
            return Err(Error::invalid("c", "some action must have zero cost"));
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::invalid("labels", format!("{} labels for {n} actions", l.len())));
            }
        }
        Ok(Instance {
            outcome_probs,
            rewards,
            costs,
            labels,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.costs.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.rewards.len()
    }

    pub fn outcome_probs(&self) -> &[Vec<T>] {
        &self.outcome_probs
    }

    pub fn outcome_row(&self, a: usize) -> &[T] {
        &self.outcome_probs[a]
    }

    pub fn rewards(&self) -> &[T] {
        &self.rewards
    }

    pub fn costs(&self) -> &[T] {
        &self.costs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, a: usize) -> String {
        self.labels
            .as_ref()
            .map(|l| l[a].clone())
            .unwrap_or_else(|| format!("a{a}"))
    }

    /// `F_a·p`.
    pub fn expected_payment(&self, p: &Contract<T>, a: usize) -> T {
        dot(&self.outcome_probs[a], &p.0)
    }

    /// `F_a·r`.
    pub fn expected_reward(&self, a: usize) -> T {
        dot(&self.outcome_probs[a], &self.rewards)
    }

    pub(crate) fn agent_utility_raw(&self, p: &Contract<T>, a: usize, theta: &T) -> T {
        self.expected_payment(p, a) - theta.clone() * self.costs[a].clone()
    }

    pub(crate) fn principal_utility_raw(&self, p: &Contract<T>, a: usize) -> T {
        self.expected_reward(a) - self.expected_payment(p, a)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Instance<U> {
        Instance {
            outcome_probs: self
                .outcome_probs
                .iter()
                .map(|row| row.iter().map(&f).collect())
                .collect(),
            rewards: self.rewards.iter().map(&f).collect(),
            costs: self.costs.iter().map(&f).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn to_f64(&self) -> Instance<f64> {
        self.map(|x| x.as_f64())
    }

    pub(crate) fn check_contract(&self, p: &Contract<T>) -> Result<()> {
        if p.len() != self.n_outcomes() {
            return Err(Error::usage(format!(
                "contract has {} payments but the instance has {} outcomes",
                p.len(),
                self.n_outcomes()
            )));
        }
        Ok(())
    }

    fn check_action(&self, a: usize) -> Result<()> {
        if a >= self.n_actions() {
            return Err(Error::usage(format!(
                "action {a} out of range ({} actions)",
                self.n_actions()
            )));
        }
        Ok(())
    }
}

/// Nonnegative payment per outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Contract<T>(pub Vec<T>);

impl<T: Scalar> Contract<T> {
    pub fn new(payments: Vec<T>) -> Result<Self> {
        if let Some(w) = payments.iter().position(|x| *x < T::zero()) {
            return Err(Error::invalid(format!("p[{w}]"), "payments must be nonnegative"));
        }
        Ok(Contract(payments))
    }

    pub fn null(n_outcomes: usize) -> Self {
        Contract(vec![T::zero(); n_outcomes])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn payments(&self) -> &[T] {
        &self.0
    }

    /// Every payment lies in `[0,1]`.
    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(|x| *x >= T::zero() && *x <= T::one())
    }

    pub fn to_f64(&self) -> Contract<f64> {
        Contract(self.0.iter().map(|x| x.as_f64()).collect())
    }
}

impl Contract<Rational> {
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|x| x.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<T> {
    pub action: usize,
    pub agent_utility: T,
    pub principal_utility: T,
    /// Every action maximizing the agent's utility (up to the tie tolerance).
    pub ic_set: Vec<usize>,
}

fn check_type<T: Scalar>(theta: &T) -> Result<()> {
    if *theta < T::zero() || *theta > T::one() {
        return Err(Error::usage(format!("type {theta} outside [0,1]")));
    }
    Ok(())
}

/// `U^A_θ(p, a) = F_a·p − θ c_a`.
pub fn agent_utility<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, a: usize, theta: &T) -> Result<T> {
    inst.check_action(a)?;
    inst.check_contract(p)?;
    check_type(theta)?;
    Ok(inst.agent_utility_raw(p, a, theta))
}

/// `U^P(p, a) = F_a·(r − p)`.
pub fn principal_utility<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, a: usize) -> Result<T> {
    inst.check_action(a)?;
    inst.check_contract(p)?;
    Ok(inst.principal_utility_raw(p, a))
}

/// Actions within `eps` of the agent's best utility. `eps = 0` gives the IC set.
pub fn eps_best_responses<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, theta: &T, eps: &T) -> Result<Vec<usize>> {
    inst.check_contract(p)?;
    check_type(theta)?;
    if *eps < T::zero() {
        return Err(Error::usage("eps must be nonnegative"));
    }
    let utils: Vec<T> = (0..inst.n_actions())
        .map(|a| inst.agent_utility_raw(p, a, theta))
        .collect();
    let best = utils.iter().skip(1).fold(utils[0].clone(), |m, u| T::max_of(m, u.clone()));
    let floor = best - eps.clone();
    Ok((0..inst.n_actions()).filter(|&a| T::ge_tol(&utils[a], &floor)).collect())
}

/// The agent's best response with ties broken for the principal, then by index.
///
/// Panics if the contract length does not match the instance.
pub fn best_response<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, theta: &T) -> BestResponse<T> {
    assert_eq!(p.len(), inst.n_outcomes(), "contract/instance outcome mismatch");
    let utils: Vec<T> = (0..inst.n_actions())
        .map(|a| inst.agent_utility_raw(p, a, theta))
        .collect();
    let best = utils.iter().skip(1).fold(utils[0].clone(), |m, u| T::max_of(m, u.clone()));
    let ic_set: Vec<usize> = (0..inst.n_actions()).filter(|&a| T::ge_tol(&utils[a], &best)).collect();
    let principal: Vec<T> = ic_set.iter().map(|&a| inst.principal_utility_raw(p, a)).collect();
    let best_p = principal
        .iter()
        .skip(1)
        .fold(principal[0].clone(), |m, u| T::max_of(m, u.clone()));
    let pos = principal
        .iter()
        .position(|u| T::ge_tol(u, &best_p))
        .expect("maximum is attained");
    let action = ic_set[pos];
    BestResponse {
        action,
        agent_utility: utils[action].clone(),
        principal_utility: principal[pos].clone(),
        ic_set,
    }
}

/// Principal utility when a type-`θ` agent best-responds to `p`.
pub fn principal_utility_at_type<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, theta: &T) -> T {
    best_response(inst, p, theta).principal_utility
}

/// `p + α(r − p)`, clamped at zero, and at one when `bounded`.
pub fn robustify<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, alpha: &T, bounded: bool) -> Result<Contract<T>> {
    inst.check_contract(p)?;
    if *alpha < T::zero() || *alpha > T::one() {
        return Err(Error::usage(format!("alpha = {alpha} outside [0,1]")));
    }
    let out = p
        .0
        .iter()
        .zip(inst.rewards())
        .map(|(pw, rw)| {
            let v = pw.clone() + alpha.clone() * (rw.clone() - pw.clone());
            let v = T::max_of(v, T::zero());
            if bounded {
                T::min_of(v, T::one())
            } else {
                v
            }
        })
        .collect();
    Ok(Contract(out))
}

/// Finite type support with weights on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTypeInstance<T> {
    types: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteTypeInstance<T> {
    pub fn new(types: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::invalid("types", "at least one type is required"));
        }
        if types.len() != weights.len() {
            return Err(Error::invalid(
                "weights",
                format!("{} weights for {} types", weights.len(), types.len()),
            ));
        }
        if let Some(i) = types.iter().position(|t| *t < T::zero() || *t > T::one()) {
            return Err(Error::invalid(format!("types[{i}]"), "type outside [0,1]"));
        }
        if let Some(i) = types.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("types[{}]", i + 1), "types must be strictly increasing"));
        }
        if let Some(i) = weights.iter().position(|w| *w < T::zero()) {
            return Err(Error::invalid(format!("weights[{i}]"), "negative weight"));
        }
        let total = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
        if (total.clone() - T::one()).abs() > T::sum_tol() {
            return Err(Error::invalid("weights", format!("weights sum to {total}, expected 1")));
        }
        Ok(DiscreteTypeInstance { types, weights })
    }

    /// Same support, new weights (validated).
    pub fn reweighted(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.types.clone(), weights)
    }

    pub fn types(&self) -> &[T] {
        &self.types
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn to_f64(&self) -> DiscreteTypeInstance<f64> {
        DiscreteTypeInstance {
            types: self.types.iter().map(|x| x.as_f64()).collect(),
            weights: self.weights.iter().map(|x| x.as_f64()).collect(),
        }
    }
}

/// `Σ_i γ_i U^P(p, b^{θ_i}(p))`.
pub fn expected_principal_utility<T: Scalar>(
    inst: &Instance<T>,
    dti: &DiscreteTypeInstance<T>,
    p: &Contract<T>,
) -> T {
    dti.types
        .iter()
        .zip(&dti.weights)
        .fold(T::zero(), |acc, (theta, w)| {
            acc + w.clone() * principal_utility_at_type(inst, p, theta)
        })
}

/// Partition of `[0,1]` into maximal open intervals with a constant best response.
///
/// Returns `(lo, hi, action)` triples tiling `[0,1]`; the action is the best
/// response on the open interval `(lo, hi)`. Endpoints are the crossing points
/// of the agents' utility lines `θ ↦ F_a·p − θ c_a`.
pub fn best_response_segments<T: Scalar>(inst: &Instance<T>, p: &Contract<T>) -> Vec<(T, T, usize)> {
    let n = inst.n_actions();
    let pay: Vec<T> = (0..n).map(|a| inst.expected_payment(p, a)).collect();
    let mut cuts: Vec<T> = vec![T::zero(), T::one()];
    for a in 0..n {
        for b in a + 1..n {
            let dc = inst.costs[a].clone() - inst.costs[b].clone();
            if dc.is_zero() {
                continue;
            }
            let t = (pay[a].clone() - pay[b].clone()) / dc;
            if t > T::zero() && t < T::one() {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("comparable"));
    cuts.dedup_by(|x, y| T::tie(x, y));
    let two = T::one() + T::one();
    let mut segments: Vec<(T, T, usize)> = Vec::new();
    for w in cuts.windows(2) {
        let mid = (w[0].clone() + w[1].clone()) / two.clone();
        let a = best_response(inst, p, &mid).action;
        match segments.last_mut() {
            Some(last) if last.2 == a => last.1 = w[1].clone(),
            _ => segments.push((w[0].clone(), w[1].clone(), a)),
        }
    }
    segments
}
