//! A well-specified linear bandit with bounded uniform noise.

use rand::Rng;

use super::{ArmSet, Environment};
use crate::error::{Error, Result};
use crate::numerics::linalg::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLinear {
    pub arms: ArmSet,
    pub phi: Vec<f64>,
    /// Standard deviation of the uniform noise.
    pub sigma: f64,
    means: Vec<f64>,
}

impl SyntheticLinear {
    pub fn new(arms: ArmSet, phi: Vec<f64>, sigma: f64) -> Result<Self> {
        if phi.len() != arms.dim() {
            return Err(Error::usage("phi length differs from the arm dimension"));
        }
        let half = sigma * 3f64.sqrt();
        let means: Vec<f64> = arms.arms().iter().map(|x| dot(x, &phi)).collect();
        if let Some(m) = means.iter().find(|m| m.abs() + half > 1.0) {
            return Err(Error::usage(format!("mean {m} plus noise leaves [-1,1]")));
        }
        Ok(SyntheticLinear { arms, phi, sigma, means })
    }

    /// Ten arms in `[0,1]²`, `φ = (0.8, −0.8)`, best mean 0.8 and every other
    /// mean at most 0.5, noise `σ = 0.1`.
    pub fn standard() -> Self {
        let arms = vec![
            vec![1.0, 0.0],
            vec![0.6, 0.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
            vec![1.0, 0.5],
            vec![0.2, 0.9],
            vec![0.9, 0.3],
            vec![0.3, 0.1],
            vec![0.7, 0.8],
            vec![0.4, 0.6],
        ];
        SyntheticLinear::new(ArmSet::new(arms).expect("valid arms"), vec![0.8, -0.8], 0.1).expect("valid env")
    }

    pub fn best_arm(&self) -> usize {
        (0..self.means.len())
            .fold(0, |b, i| if self.means[i] > self.means[b] { i } else { b })
    }

    pub fn gap(&self, arm: usize) -> f64 {
        self.means[self.best_arm()] - self.means[arm]
    }
}

impl Environment for SyntheticLinear {
    fn n_arms(&self) -> usize {
        self.means.len()
    }

    fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        let half = self.sigma * 3f64.sqrt();
        let noise = if half > 0.0 { rng.gen_range(-half..=half) } else { 0.0 };
        self.means[arm] + noise
    }

    fn true_mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }
}
