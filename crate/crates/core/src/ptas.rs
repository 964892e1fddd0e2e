//! Additive approximation for continuous type distributions.
//!
//! Discretize the types on a grid of width `δ`, solve the finite problem
//! exactly, then move the contract a fraction `α` toward the reward vector so
//! that near-IC actions of nearby types become exactly IC. The loss is at most
//! `2(δ/α + α)`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::dist::{discretize, grid_cells, grid_size, TypeDistribution};
use crate::error::{Error, Result};
use crate::model::{robustify, Contract, Instance};
use crate::numerics::{Rational, Scalar};
use crate::solver::solve_discrete_optimal;

#[derive(Debug, Clone, PartialEq)]
pub struct PtasConfig {
    pub eps: Rational,
    pub delta: Rational,
    pub alpha: Rational,
    /// Restrict the discrete solve and the robustified contract to `[0,1]^m`.
    pub bounded: bool,
}

impl PtasConfig {
    /// `δ = ε²/16` and `α = √δ = ε/4`, so that the bound `2(δ/α + α)` equals `ε`.
    pub fn from_eps(eps: Rational) -> Result<Self> {
        if eps <= Rational::zero() || eps > Rational::one() {
            return Err(Error::usage(format!("eps = {eps} outside (0,1]")));
        }
        let delta = &eps * &eps / Rational::from_ratio(16, 1);
        let alpha = &eps / Rational::from_ratio(4, 1);
        Ok(PtasConfig { eps, delta, alpha, bounded: false })
    }

    pub fn with_delta(mut self, delta: Rational) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_alpha(mut self, alpha: Rational) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta <= Rational::zero() || self.delta > Rational::one() {
            return Err(Error::usage(format!("delta = {} outside (0,1]", self.delta)));
        }
        if self.alpha <= Rational::zero() || self.alpha > Rational::one() {
            return Err(Error::usage(format!("alpha = {} outside (0,1]", self.alpha)));
        }
        Ok(())
    }

    /// `2(δ/α + α)`.
    pub fn error_bound(&self) -> Rational {
        Rational::from_ratio(2, 1) * (&self.delta / &self.alpha + &self.alpha)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PtasDiagnostics {
    pub delta: String,
    pub alpha: String,
    pub k: usize,
    pub discrete_value: String,
    pub bound: String,
    pub tuples_solved: usize,
}

#[derive(Debug, Clone)]
pub struct PtasOutcome {
    pub contract: Contract<Rational>,
    /// Optimal contract of the grid instance, before robustification.
    pub discrete_contract: Contract<Rational>,
    pub discrete_value: Rational,
    pub k: usize,
    pub bound: Rational,
    pub tuples_solved: usize,
}

impl PtasOutcome {
    pub fn diagnostics(&self, cfg: &PtasConfig) -> PtasDiagnostics {
        PtasDiagnostics {
            delta: cfg.delta.to_string(),
            alpha: cfg.alpha.to_string(),
            k: self.k,
            discrete_value: self.discrete_value.to_string(),
            bound: self.bound.to_string(),
            tuples_solved: self.tuples_solved,
        }
    }
}

pub fn ptas_contract(
    inst: &Instance<Rational>,
    dist: &TypeDistribution<Rational>,
    cfg: &PtasConfig,
) -> Result<PtasOutcome> {
    cfg.validate()?;
    let grid = discretize(dist, &cfg.delta)?;
    let report = solve_discrete_optimal(inst, &grid, cfg.bounded)?;
    let contract = robustify(inst, &report.best_contract, &cfg.alpha, cfg.bounded)?;
    Ok(PtasOutcome {
        contract,
        discrete_contract: report.best_contract,
        discrete_value: report.value,
        k: grid_size(&cfg.delta)?,
        bound: cfg.error_bound(),
        tuples_solved: report.tuples_solved,
    })
}

/// A partition of `[0,1]` into cells `(lo, hi]` (the first closed at 0), each
/// with a representative type inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub cells: Vec<(T, T)>,
    pub representatives: Vec<T>,
}

impl<T: Scalar> Partition<T> {
    pub fn new(cells: Vec<(T, T)>, representatives: Vec<T>) -> Result<Self> {
        if cells.is_empty() || cells.len() != representatives.len() {
            return Err(Error::usage("partition needs one representative per cell"));
        }
        if !cells[0].0.is_zero() || !(cells[cells.len() - 1].1.clone() - T::one()).is_zero() {
            return Err(Error::usage("cells must cover [0,1]"));
        }
        for (i, (lo, hi)) in cells.iter().enumerate() {
            if lo >= hi {
                return Err(Error::usage(format!("cell {i} is empty")));
            }
            if i > 0 && cells[i - 1].1 != *lo {
                return Err(Error::usage(format!("cells {} and {i} are not contiguous", i - 1)));
            }
            let rep = &representatives[i];
            let inside = rep <= hi && (rep > lo || (i == 0 && rep == lo));
            if !inside {
                return Err(Error::usage(format!("representative {rep} lies outside cell {i}")));
            }
        }
        Ok(Partition { cells, representatives })
    }

    /// The uniform grid of width `δ` with midpoints (clamped to 1).
    pub fn grid(delta: &T) -> Result<Self> {
        Self::new(grid_cells(delta)?, crate::dist::grid_types(delta)?)
    }
}

/// A piecewise-constant map from types to actions: `actions[j]` on
/// `(breaks[j−1], breaks[j]]`, the first piece closed at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMap<T> {
    pub breaks: Vec<T>,
    pub actions: Vec<usize>,
}

impl<T: Scalar> StepMap<T> {
    pub fn new(breaks: Vec<T>, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != breaks.len() + 1 {
            return Err(Error::usage("a step map with b breaks needs b + 1 actions"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks.iter().any(|b| *b <= T::zero() || *b >= T::one()) {
            return Err(Error::usage("breaks must be strictly increasing inside (0,1)"));
        }
        Ok(StepMap { breaks, actions })
    }

    pub fn constant(action: usize) -> Self {
        StepMap { breaks: Vec::new(), actions: vec![action] }
    }

    pub fn at(&self, theta: &T) -> usize {
        self.actions[self.breaks.iter().filter(|b| *b < theta).count()]
    }

    fn pieces(&self) -> Vec<(T, T, usize)> {
        let mut edges = vec![T::zero()];
        edges.extend(self.breaks.iter().cloned());
        edges.push(T::one());
        edges
            .windows(2)
            .zip(&self.actions)
            .map(|(w, &a)| (w[0].clone(), w[1].clone(), a))
            .collect()
    }
}

/// Both sides of `E_Γ[U^P(p, ρ(θ))] = Σ_i γ_i U^P(p, ρ(θ_i))`.
///
/// The left side integrates `ρ` piece by piece; the right side weights each
/// cell's mass by the utility of `ρ` at its representative. `ρ` must not switch
/// inside a cell.
pub fn verify_discretization_identity<T: Scalar>(
    inst: &Instance<T>,
    dist: &TypeDistribution<T>,
    partition: &Partition<T>,
    rho: &StepMap<T>,
    p: &Contract<T>,
) -> Result<(T, T)> {
    inst.check_contract(p)?;
    if let Some(a) = rho.actions.iter().find(|&&a| a >= inst.n_actions()) {
        return Err(Error::usage(format!("action {a} out of range")));
    }
    for b in &rho.breaks {
        if partition.cells.iter().any(|(lo, hi)| b > lo && b < hi) {
            return Err(Error::usage(format!("map switches at {b}, inside a cell")));
        }
    }
    let mut lhs = T::zero();
    for (i, (lo, hi, a)) in rho.pieces().into_iter().enumerate() {
        let mass = dist.interval_mass(&lo, &hi, i == 0)?;
        lhs = lhs + mass * inst.principal_utility_raw(p, a);
    }
    let mut rhs = T::zero();
    for (i, ((lo, hi), rep)) in partition.cells.iter().zip(&partition.representatives).enumerate() {
        let mass = dist.interval_mass(lo, hi, i == 0)?;
        rhs = rhs + mass * inst.principal_utility_raw(p, rho.at(rep));
    }
    Ok((lhs, rhs))
}
