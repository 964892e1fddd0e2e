//! Learning a contract from bandit feedback.
//!
//! Each round the principal posts a contract, a fresh type is drawn from `Γ`,
//! the agent best-responds and an outcome is drawn; the principal observes its
//! reward minus the payment. Restricting to the candidate set `P` for the grid
//! `Θ_ε`, the expected utility of `p` is within `2βnε` of `⟨ν_ε(p), γ⟩`, where
//! `γ` holds the grid cell masses. This is a misspecified linear bandit over
//! the arms `ν_ε(P)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::elimination::{pac_best_arm, phased_elimination, PacResult, Stop};
use super::{utility_map, ArmSet, Environment};
use crate::dist::{discretize, expected_utility, grid_size, grid_types, TypeDistribution};
use crate::error::{Error, Result};
use crate::model::{best_response, Contract, Instance};
use crate::numerics::{rng_new, rng_split, Rational, Scalar};
use crate::solver::{candidate_contract_set, BASIS_GUARD};

/// Largest grid size for which arm sets are built.
pub const MAX_GRID: usize = 4096;

#[derive(Debug, Clone)]
pub struct ContractEnvironment {
    inst: Instance<f64>,
    dist: TypeDistribution<f64>,
    pub eps: Rational,
    /// One contract per arm, in the order of the candidate set.
    pub contracts: Vec<Contract<Rational>>,
    pub arms: ArmSet,
    /// Exact expected utility of each arm's contract.
    pub means: Vec<f64>,
    /// Best exact expected utility over the whole candidate set.
    pub opt_ref: f64,
    pub candidates: usize,
    /// Cell masses of `Γ` on the grid.
    pub gamma: Vec<f64>,
    /// `2βnε`.
    pub misspecification_bound: f64,
}

impl ContractEnvironment {
    pub fn dim(&self) -> usize {
        self.arms.dim()
    }

    /// `max_x |E[reward of x] − ⟨x, γ⟩|`.
    pub fn misspecification(&self) -> f64 {
        self.arms
            .arms()
            .iter()
            .zip(&self.means)
            .map(|(x, m)| (m - crate::numerics::linalg::dot(x, &self.gamma)).abs())
            .fold(0.0, f64::max)
    }

    pub fn best_arm(&self) -> usize {
        (0..self.means.len()).fold(0, |b, i| if self.means[i] > self.means[b] { i } else { b })
    }
}

impl Environment for ContractEnvironment {
    fn n_arms(&self) -> usize {
        self.contracts.len()
    }

    fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        let p = self.arms.provenance().expect("contract arms carry provenance")[arm].clone();
        let theta: f64 = self.dist.sample(rng);
        let a = best_response(&self.inst, &p, &theta).action;
        let u: f64 = rng.gen();
        let row = self.inst.outcome_row(a);
        let mut acc = 0.0;
        let mut omega = row.iter().rposition(|f| *f > 0.0).unwrap_or(row.len() - 1);
        for (j, f) in row.iter().enumerate() {
            acc += f;
            if u < acc && *f > 0.0 {
                omega = j;
                break;
            }
        }
        self.inst.rewards()[omega] - p.0[omega]
    }

    fn true_mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }
}

fn binomial(n: usize, r: usize) -> u128 {
    (0..r).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

fn grid_guard(inst: &Instance<Rational>, eps: &Rational) -> Result<usize> {
    let d = grid_size(eps)?;
    let n = inst.n_actions();
    let m = inst.n_outcomes();
    let planes = 2 * m + d * n * (n - 1) / 2;
    let k_bound = if planes >= m { binomial(planes, m) } else { 0 };
    if d > MAX_GRID || k_bound > BASIS_GUARD {
        return Err(Error::resource(format!(
            "eps = {:.3e} gives d = {d} grid types and up to k = {k_bound} candidate contracts; \
             guards are d <= {MAX_GRID} and k <= {BASIS_GUARD}",
            eps.as_f64()
        )));
    }
    Ok(d)
}

/// Bandit over `ν_ε(P)`. Contracts with identical utility vectors share one
/// arm (the first in sorted order); `opt_ref` still ranges over all of `P`.
pub fn contract_environment(
    inst: &Instance<Rational>,
    dist: &TypeDistribution<Rational>,
    eps: &Rational,
) -> Result<ContractEnvironment> {
    let Some(beta) = dist.density_bound() else {
        return Err(Error::usage("the bandit reduction needs a bounded density, not a discrete distribution"));
    };
    grid_guard(inst, eps)?;
    let types = grid_types(eps)?;
    let set = candidate_contract_set(inst, &types, true)?;
    let rows: Vec<(Vec<Rational>, f64)> = set
        .par_iter()
        .map(|p| {
            let nu = utility_map(inst, p, eps).expect("candidate contracts fit the instance");
            (nu, expected_utility(inst, dist, p).as_f64())
        })
        .collect();
    let opt_ref = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let mut seen: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
    let mut contracts = Vec::new();
    let mut arms = Vec::new();
    let mut means = Vec::new();
    for (p, (nu, mean)) in set.iter().zip(rows) {
        if seen.contains_key(&nu) {
            continue;
        }
        seen.insert(nu.clone(), contracts.len());
        arms.push(nu.iter().map(Scalar::as_f64).collect::<Vec<f64>>());
        contracts.push(p.clone());
        means.push(mean);
    }
    let provenance = contracts.iter().map(Contract::to_f64).collect();
    let arms = ArmSet::new(arms)?.with_provenance(provenance)?;
    let gamma = discretize(dist, eps)?.weights().iter().map(Scalar::as_f64).collect();
    let n = inst.n_actions() as f64;
    Ok(ContractEnvironment {
        inst: inst.to_f64(),
        dist: dist.to_f64(),
        eps: eps.clone(),
        candidates: set.len(),
        contracts,
        arms,
        means,
        opt_ref,
        gamma,
        misspecification_bound: 2.0 * beta.as_f64() * n * eps.as_f64(),
    })
}

/// Environment and parameters for a regret run of horizon `T`:
/// `ε = 1/⌈√T⌉` and confidence `δ = 1/T`.
#[derive(Debug, Clone)]
pub struct RegretSetup {
    pub env: ContractEnvironment,
    pub horizon: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRun {
    pub replicate: u64,
    /// Cumulative pseudo-regret against `opt_ref` after each round.
    pub curve: Vec<f64>,
    pub blocks: usize,
    pub survivors: usize,
}

impl RegretRun {
    pub fn total(&self) -> f64 {
        self.curve.last().copied().unwrap_or(0.0)
    }
}

impl RegretSetup {
    pub fn new(inst: &Instance<Rational>, dist: &TypeDistribution<Rational>, horizon: u64) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::usage("horizon must be at least 1"));
        }
        let root = (horizon as f64).sqrt().ceil() as i64;
        let eps = Rational::one() / Rational::from_ratio(root, 1);
        debug_assert!(!eps.is_zero());
        Ok(RegretSetup {
            env: contract_environment(inst, dist, &eps)?,
            horizon,
            delta: 1.0 / horizon as f64,
        })
    }

    /// Replicate `r` draws from stream `r` of the generator seeded by `seed`.
    pub fn run(&self, seed: u64, replicate: u64) -> Result<RegretRun> {
        let mut rng = rng_split(&rng_new(seed), replicate);
        let delta = self.delta.min(0.5);
        let (history, state) = phased_elimination(&self.env, &self.env.arms, Stop::Horizon(self.horizon), delta, &mut rng)?;
        let mut acc = 0.0;
        let curve = history
            .iter()
            .map(|pull| {
                acc += self.env.opt_ref - self.env.means[pull.arm];
                acc
            })
            .collect();
        Ok(RegretRun {
            replicate,
            curve,
            blocks: state.blocks.len(),
            survivors: state.active.len(),
        })
    }

    pub fn run_many(&self, seed: u64, replicates: u64) -> Result<Vec<RegretRun>> {
        (0..replicates).into_par_iter().map(|r| self.run(seed, r)).collect()
    }

    /// `√(dT log(Tk)) + 2βnεT√d log T`.
    pub fn regret_bound(&self) -> f64 {
        let d = self.env.dim() as f64;
        let t = self.horizon as f64;
        let k = self.env.arms.len() as f64;
        (d * t * (t * k).ln()).sqrt() + self.env.misspecification_bound * t * d.sqrt() * t.ln()
    }
}

/// One regret run of horizon `T` (replicate 0 of `seed`).
pub fn algorithm1_regret(
    inst: &Instance<Rational>,
    dist: &TypeDistribution<Rational>,
    horizon: u64,
    seed: u64,
) -> Result<RegretRun> {
    RegretSetup::new(inst, dist, horizon)?.run(seed, 0)
}

/// `ε = (η / (24βn))²`, the grid that makes the misspecification small enough
/// for an `η`-optimal answer.
pub fn pac_epsilon(eta: f64, beta: f64, n_actions: usize) -> f64 {
    (eta / (24.0 * beta * n_actions as f64)).powi(2)
}

#[derive(Debug, Clone, Serialize)]
pub struct PacContract {
    pub contract: Vec<String>,
    pub eps: String,
    pub d: usize,
    pub k: usize,
    pub alpha: f64,
    pub value: f64,
    pub opt_ref: f64,
    pub result: PacResult,
}

/// Best-arm identification over `ν_ε(P)`. Without `eps_override` the grid
/// follows [`pac_epsilon`], which is usually far beyond the size guards.
/// The misspecification assumed by the stopping rule defaults to `2βnε`.
pub fn pac_best_contract(
    inst: &Instance<Rational>,
    dist: &TypeDistribution<Rational>,
    eta: f64,
    delta: f64,
    seed: u64,
    eps_override: Option<Rational>,
    alpha_override: Option<f64>,
) -> Result<PacContract> {
    let Some(beta) = dist.density_bound() else {
        return Err(Error::usage("the bandit reduction needs a bounded density, not a discrete distribution"));
    };
    if !(eta > 0.0 && eta <= 2.0) {
        return Err(Error::usage(format!("eta = {eta} outside (0,2]")));
    }
    let eps = match eps_override {
        Some(e) => e,
        None => {
            let eta_q = crate::numerics::parse_rational(&eta.to_string()).unwrap_or_else(|| Rational::from_f64(eta));
            let scaled = eta_q / (Rational::from_ratio(24 * inst.n_actions() as i64, 1) * beta);
            &scaled * &scaled
        }
    };
    let env = contract_environment(inst, dist, &eps)?;
    let alpha = alpha_override.unwrap_or(env.misspecification_bound);
    let mut rng = rng_new(seed);
    let result = pac_best_arm(&env, &env.arms, eta, delta, alpha, &mut rng)?;
    Ok(PacContract {
        contract: env.contracts[result.arm].to_strings(),
        eps: eps.to_string(),
        d: env.dim(),
        k: env.arms.len(),
        alpha,
        value: env.means[result.arm],
        opt_ref: env.opt_ref,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ratio;

    fn two_action() -> Instance<Rational> {
        Instance::new(
            vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]],
            vec![ratio(0, 1), ratio(1, 1)],
            vec![ratio(0, 1), ratio(1, 1)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn discrete_distribution_rejected() {
        let d = TypeDistribution::discrete(vec![ratio(1, 2)], vec![ratio(1, 1)]).unwrap();
        assert!(matches!(contract_environment(&two_action(), &d, &ratio(1, 4)), Err(Error::Usage(_))));
    }

    #[test]
    fn misspecification_within_bound() {
        let env = contract_environment(&two_action(), &TypeDistribution::uniform(), &ratio(1, 10)).unwrap();
        assert_eq!(env.dim(), 10);
        assert!(env.misspecification() <= env.misspecification_bound + 1e-12);
        assert!(env.opt_ref >= env.means[env.best_arm()] - 1e-12);
    }

    #[test]
    fn sampled_rewards_match_means() {
        let env = contract_environment(&two_action(), &TypeDistribution::uniform(), &ratio(1, 4)).unwrap();
        let mut rng = rng_new(3);
        for arm in 0..env.n_arms() {
            let n = 20_000;
            let avg: f64 = (0..n).map(|_| env.pull(arm, &mut rng)).sum::<f64>() / n as f64;
            assert!((avg - env.true_mean(arm)).abs() < 0.03, "arm {arm}: {avg} vs {}", env.true_mean(arm));
        }
    }

    #[test]
    fn default_pac_grid_hits_guard() {
        let err = pac_best_contract(&two_action(), &TypeDistribution::uniform(), 0.2, 0.1, 0, None, None).unwrap_err();
        match err {
            Error::Resource(msg) => assert!(msg.contains("d = 57600"), "{msg}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn coarse_grid_with_assumed_alpha() {
        let inst = two_action();
        let uni = TypeDistribution::uniform();
        assert!(pac_best_contract(&inst, &uni, 0.2, 0.1, 0, Some(ratio(1, 10)), None).is_err());
        let r = pac_best_contract(&inst, &uni, 0.2, 0.1, 0, Some(ratio(1, 10)), Some(0.0)).unwrap();
        assert_eq!(r.d, 10);
        assert!(r.opt_ref - r.value <= 0.2 + 2.0 * 2.0 / 10.0);
    }
}
