//! Misspecified linear bandits and their use for learning contracts.
//!
//! [`phased_elimination`] runs the phased elimination algorithm on a finite arm
//! set in `R^d` with a G-optimal design per block. [`contract_env`] turns an
//! instance and a type distribution into such a bandit, where each arm is a
//! bounded contract observed through its utility vector on a type grid.

pub mod contract_env;
pub mod design;
pub mod elimination;
pub mod synthetic;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{best_response, Contract, Instance};
use crate::numerics::Scalar;

pub use contract_env::{
    algorithm1_regret, contract_environment, pac_best_contract, pac_epsilon, ContractEnvironment, PacContract,
    RegretRun, RegretSetup,
};
pub use design::{g_optimal_design, DesignWeights};
pub use elimination::{
    pac_best_arm, pac_horizon_blocks, phased_elimination, BlockRecord, EliminationState, PacResult, Pull, Stop,
};
pub use synthetic::SyntheticLinear;

/// A stochastic bandit with rewards in `[−1, 1]`.
pub trait Environment {
    fn n_arms(&self) -> usize;
    fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64;
    fn true_mean(&self, arm: usize) -> f64;
}

/// Finite arm set with coordinates in `[−1, 1]`, optionally tagged by the
/// contract each arm came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSet {
    arms: Vec<Vec<f64>>,
    provenance: Option<Vec<Contract<f64>>>,
}

impl ArmSet {
    pub fn new(arms: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = arms.first() else {
            return Err(Error::usage("arm set is empty"));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::usage("arms must have at least one coordinate"));
        }
        for (i, x) in arms.iter().enumerate() {
            if x.len() != d {
                return Err(Error::invalid(format!("arms[{i}]"), format!("length {} differs from {d}", x.len())));
            }
            if let Some(v) = x.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
                return Err(Error::invalid(format!("arms[{i}]"), format!("coordinate {v} outside [-1,1]")));
            }
        }
        Ok(ArmSet { arms, provenance: None })
    }

    pub fn with_provenance(mut self, contracts: Vec<Contract<f64>>) -> Result<Self> {
        if contracts.len() != self.arms.len() {
            return Err(Error::usage("one contract per arm is required"));
        }
        self.provenance = Some(contracts);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.arms[0].len()
    }

    pub fn arm(&self, i: usize) -> &[f64] {
        &self.arms[i]
    }

    pub fn arms(&self) -> &[Vec<f64>] {
        &self.arms
    }

    pub fn provenance(&self) -> Option<&[Contract<f64>]> {
        self.provenance.as_deref()
    }
}

/// `max(0, log₂ log₂ max(d, 2))`.
pub fn log_log(d: usize) -> f64 {
    (d.max(2) as f64).log2().log2().max(0.0)
}

/// `⌈4d·log log d + 16⌉`, the length of the first block.
pub fn block_constant(d: usize) -> u64 {
    (4.0 * d as f64 * log_log(d) + 16.0).ceil() as u64
}

/// Support size the pruned design aims for.
pub fn support_cap(d: usize) -> usize {
    block_constant(d) as usize
}

/// `T_ℓ = 2^{ℓ−1}·⌈4d·log log d + 16⌉` for `ℓ ≥ 1`.
pub fn block_length(d: usize, ell: u32) -> Result<u64> {
    if ell == 0 {
        return Err(Error::usage("blocks are numbered from 1"));
    }
    1u64.checked_shl(ell - 1)
        .and_then(|s| s.checked_mul(block_constant(d)))
        .filter(|_| ell <= 63)
        .ok_or_else(|| Error::resource(format!("block {ell} overflows the sample counter")))
}

/// `δ_ℓ = 6δ / (π² ℓ²)`; these sum to `δ` over all blocks.
pub fn block_confidence(delta: f64, ell: u32) -> f64 {
    6.0 * delta / (std::f64::consts::PI.powi(2) * (ell as f64).powi(2))
}

/// `ν_ε(p)`: the principal's utility at every grid type `(i − ½)ε`.
pub fn utility_map<T: Scalar>(inst: &Instance<T>, p: &Contract<T>, eps: &T) -> Result<Vec<T>> {
    inst.check_contract(p)?;
    Ok(crate::dist::grid_types(eps)?
        .iter()
        .map(|theta| best_response(inst, p, theta).principal_utility)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ratio, Rational};

    #[test]
    fn block_lengths() {
        assert_eq!(block_length(2, 1).unwrap(), 16);
        assert_eq!(block_length(2, 3).unwrap(), 64);
        assert_eq!(block_constant(1), 16);
        // log₂ log₂ 16 = 2.
        assert_eq!(block_constant(16), 4 * 16 * 2 + 16);
        assert!(block_length(2, 0).is_err());
    }

    #[test]
    fn confidences_sum_to_delta() {
        let s: f64 = (1..200_000).map(|l| block_confidence(0.1, l)).sum();
        assert!((s - 0.1).abs() < 1e-5);
    }

    #[test]
    fn arm_set_validation() {
        assert!(ArmSet::new(vec![]).is_err());
        assert!(ArmSet::new(vec![vec![0.5], vec![0.5, 0.1]]).is_err());
        assert!(ArmSet::new(vec![vec![1.5]]).is_err());
        assert!(ArmSet::new(vec![vec![-1.0, 0.3]]).is_ok());
    }

    #[test]
    fn utility_map_on_grid() {
        let inst = Instance::new(
            vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]],
            vec![ratio(0, 1), ratio(1, 1)],
            vec![ratio(0, 1), ratio(1, 1)],
            None,
        )
        .unwrap();
        let p = Contract(vec![ratio(0, 1), ratio(1, 2)]);
        // Types 1/4 and 3/4: the first works, the second shirks.
        let v: Vec<Rational> = utility_map(&inst, &p, &ratio(1, 2)).unwrap();
        assert_eq!(v, vec![ratio(1, 2), ratio(0, 1)]);
    }
}
