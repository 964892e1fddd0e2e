//! Phased elimination with G-optimal designs.
//!
//! Block `ℓ` computes a design `ρ` on the surviving arms, pulls each arm
//! `⌈T_ℓ ρ(x)⌉` times, fits `φ̂` by least squares and drops every arm whose
//! estimate trails the best by more than `2√((4d/T_ℓ) ln(k/δ_ℓ))`.

use rand::Rng;
use serde::Serialize;

use super::design::{g_optimal_design, Projection};
use super::{block_confidence, block_constant, block_length, ArmSet, Environment};
use crate::error::{Error, Result};
use crate::numerics::linalg::{dot, solve_linear_system};

/// Tolerance on the design's maximum leverage, relative to the rank.
pub const DESIGN_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Stop after exactly this many pulls, possibly inside a block.
    Horizon(u64),
    /// Stop after this many complete blocks, or after block 1 if one arm is left.
    Blocks(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pull {
    pub arm: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRecord {
    pub ell: u32,
    /// Nominal length `T_ℓ`.
    pub length: u64,
    /// Pulls actually made in this block.
    pub pulls: u64,
    pub complete: bool,
    pub active_before: Vec<usize>,
    pub active_after: Vec<usize>,
    pub design_support: usize,
    pub max_leverage: f64,
    /// `φ̂` in the ambient space; empty when the block was cut short.
    pub phi_hat: Vec<f64>,
    /// `⟨x, φ̂⟩` for each arm in `active_before`.
    pub estimates: Vec<f64>,
    /// `√((4d/T_ℓ) ln(k/δ_ℓ))`.
    pub width: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationState {
    pub active: Vec<usize>,
    pub blocks: Vec<BlockRecord>,
    pub pulls: u64,
}

impl EliminationState {
    /// Surviving arm with the largest estimate in the last complete block.
    pub fn leader(&self) -> usize {
        let Some(last) = self.blocks.iter().rev().find(|b| b.complete) else {
            return self.active[0];
        };
        let mut best = (self.active[0], f64::NEG_INFINITY);
        for (&arm, &v) in last.active_before.iter().zip(&last.estimates) {
            if self.active.contains(&arm) && v > best.1 {
                best = (arm, v);
            }
        }
        best.0
    }
}

/// `√((4d/T) ln(k/δ_ℓ))`.
pub fn confidence_width(d: usize, length: u64, k: usize, delta_ell: f64) -> f64 {
    (4.0 * d as f64 / length as f64 * (k as f64 / delta_ell).ln()).sqrt()
}

pub fn phased_elimination<E: Environment, R: Rng + ?Sized>(
    env: &E,
    arms: &ArmSet,
    stop: Stop,
    delta: f64,
    rng: &mut R,
) -> Result<(Vec<Pull>, EliminationState)> {
    if env.n_arms() != arms.len() {
        return Err(Error::usage(format!(
            "environment has {} arms but the arm set has {}",
            env.n_arms(),
            arms.len()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::usage(format!("delta = {delta} outside (0,1)")));
    }
    let d = arms.dim();
    let k = arms.len();
    let mut history = Vec::new();
    let mut state = EliminationState {
        active: (0..k).collect(),
        blocks: Vec::new(),
        pulls: 0,
    };
    if let Stop::Horizon(0) = stop {
        return Ok((history, state));
    }
    let mut ell = 1u32;
    loop {
        if let Stop::Blocks(max) = stop {
            if ell > max || (ell > 1 && state.active.len() == 1) {
                break;
            }
        }
        let length = block_length(d, ell)?;
        let active_arms: Vec<Vec<f64>> = state.active.iter().map(|&i| arms.arm(i).to_vec()).collect();
        let design = g_optimal_design(&active_arms, DESIGN_TOL)?;
        let proj = Projection::new(&active_arms);
        let r = proj.rank();
        let mut gram = vec![vec![0.0; r]; r];
        let mut moment = vec![0.0; r];
        let mut pulls = 0u64;
        let mut complete = true;
        'pulling: for (j, &w) in design.weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let count = (length as f64 * w).ceil() as u64;
            let z = &proj.coords[j];
            for _ in 0..count {
                if let Stop::Horizon(t) = stop {
                    if state.pulls >= t {
                        complete = false;
                        break 'pulling;
                    }
                }
                let arm = state.active[j];
                let reward = env.pull(arm, rng);
                history.push(Pull { arm, reward });
                state.pulls += 1;
                pulls += 1;
                for a in 0..r {
                    moment[a] += reward * z[a];
                    for b in 0..r {
                        gram[a][b] += z[a] * z[b];
                    }
                }
            }
        }
        let delta_ell = block_confidence(delta, ell);
        let width = confidence_width(d, length, k, delta_ell);
        let threshold = 2.0 * width;
        let mut record = BlockRecord {
            ell,
            length,
            pulls,
            complete,
            active_before: state.active.clone(),
            active_after: state.active.clone(),
            design_support: design.support_size(),
            max_leverage: design.max_leverage,
            phi_hat: Vec::new(),
            estimates: Vec::new(),
            width,
            threshold,
        };
        if !complete {
            state.blocks.push(record);
            break;
        }
        let coef = solve_linear_system(&gram, &moment)
            .map_err(|_| Error::usage("design support does not span the active arms"))?;
        let phi = proj.lift(&coef);
        let estimates: Vec<f64> = state.active.iter().map(|&i| dot(arms.arm(i), &phi)).collect();
        let best = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        state.active = state
            .active
            .iter()
            .zip(&estimates)
            .filter(|(_, &v)| best - v <= threshold)
            .map(|(&i, _)| i)
            .collect();
        record.active_after = state.active.clone();
        record.phi_hat = phi;
        record.estimates = estimates;
        state.blocks.push(record);
        if let Stop::Horizon(t) = stop {
            if state.pulls >= t {
                break;
            }
        }
        ell += 1;
    }
    Ok((history, state))
}

/// `ℓ★` and the number of blocks `max(1, ⌈ℓ★⌉)` after which every surviving
/// arm is `η`-optimal with probability `1 − δ`, for misspecification `α`.
pub fn pac_horizon_blocks(d: usize, k: usize, eta: f64, delta: f64, alpha: f64) -> Result<(f64, u32)> {
    if !(eta > 0.0) || !(delta > 0.0 && delta < 1.0) || !(alpha >= 0.0) {
        return Err(Error::usage("need eta > 0, delta in (0,1) and alpha >= 0"));
    }
    let z = eta - 6.0 * alpha * (d as f64).sqrt();
    if z <= 0.0 {
        return Err(Error::usage(format!(
            "eta = {eta} does not exceed 6·alpha·√d = {}",
            6.0 * alpha * (d as f64).sqrt()
        )));
    }
    let pi2 = std::f64::consts::PI.powi(2);
    let inner = (8.0 * k as f64 * pi2 / (3.0 * delta * z * z)).ln();
    let ell_star = (32.0 / (z * z) * inner).log2();
    let blocks = ell_star.ceil().max(1.0);
    if blocks > 62.0 {
        return Err(Error::resource(format!("{blocks} blocks overflow the sample counter")));
    }
    Ok((ell_star, blocks as u32))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacResult {
    pub arm: usize,
    pub ell_star: f64,
    pub blocks: u32,
    pub samples: u64,
    /// `⌈4d log log d + 16⌉ · 2^{⌈ℓ★⌉}`.
    pub sample_bound: u64,
    pub state: EliminationState,
}

impl PacResult {
    pub fn within_bound(&self) -> bool {
        self.samples <= self.sample_bound
    }
}

pub fn pac_best_arm<E: Environment, R: Rng + ?Sized>(
    env: &E,
    arms: &ArmSet,
    eta: f64,
    delta: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<PacResult> {
    let (ell_star, blocks) = pac_horizon_blocks(arms.dim(), arms.len(), eta, delta, alpha)?;
    let (_, state) = phased_elimination(env, arms, Stop::Blocks(blocks), delta, rng)?;
    Ok(PacResult {
        arm: state.leader(),
        ell_star,
        blocks,
        samples: state.pulls,
        sample_bound: block_constant(arms.dim()).saturating_mul(1u64 << blocks),
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng_new;

    struct Fixed {
        arms: Vec<Vec<f64>>,
        phi: Vec<f64>,
        noise: f64,
    }

    impl Environment for Fixed {
        fn n_arms(&self) -> usize {
            self.arms.len()
        }
        fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
            self.true_mean(arm) + rng.gen_range(-self.noise..=self.noise)
        }
        fn true_mean(&self, arm: usize) -> f64 {
            dot(&self.arms[arm], &self.phi)
        }
    }

    #[test]
    fn one_dimensional_gap_is_eliminated() {
        let env = Fixed { arms: vec![vec![1.0], vec![0.5]], phi: vec![1.0], noise: 0.1 * 3f64.sqrt() };
        let arms = ArmSet::new(env.arms.clone()).unwrap();
        let mut hits = 0;
        for seed in 0..100 {
            let mut rng = rng_new(seed);
            let (_, st) = phased_elimination(&env, &arms, Stop::Blocks(6), 0.1, &mut rng).unwrap();
            if st.active == vec![0] {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{hits}");
    }

    #[test]
    fn horizon_is_exact() {
        let env = Fixed { arms: vec![vec![1.0, 0.0], vec![0.0, 1.0]], phi: vec![0.3, 0.2], noise: 0.1 };
        let arms = ArmSet::new(env.arms.clone()).unwrap();
        let (h, st) = phased_elimination(&env, &arms, Stop::Horizon(100), 0.1, &mut rng_new(1)).unwrap();
        assert_eq!(h.len(), 100);
        assert_eq!(st.pulls, 100);
        assert!(!st.blocks.last().unwrap().complete);
        assert_eq!(st.blocks[0].length, 16);
    }

    #[test]
    fn single_arm_stops_after_first_block() {
        let env = Fixed { arms: vec![vec![0.4, 0.1]], phi: vec![1.0, 0.0], noise: 0.0 };
        let arms = ArmSet::new(env.arms.clone()).unwrap();
        let r = pac_best_arm(&env, &arms, 0.2, 0.1, 0.0, &mut rng_new(0)).unwrap();
        assert_eq!(r.arm, 0);
        assert_eq!(r.state.blocks.len(), 1);
        assert_eq!(r.samples, 16);
    }

    #[test]
    fn ell_star_needs_room_for_misspecification() {
        assert!(pac_horizon_blocks(4, 10, 0.1, 0.1, 0.01).is_err());
        let (l, b) = pac_horizon_blocks(2, 10, 0.2, 0.1, 0.0).unwrap();
        assert!(l > 13.0 && l < 14.0);
        assert_eq!(b, 14);
    }
}
