//! Type distributions on `[0,1]`: finite atoms or a piecewise-constant density.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{best_response, best_response_segments, Contract, DiscreteTypeInstance, Instance};
use crate::numerics::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum TypeDistribution<T> {
    Discrete { points: Vec<T>, weights: Vec<T> },
    PiecewiseConstant { breakpoints: Vec<T>, densities: Vec<T> },
}

impl<T: Scalar> TypeDistribution<T> {
    pub fn discrete(points: Vec<T>, weights: Vec<T>) -> Result<Self> {
        // Same validation as a discrete type instance.
        DiscreteTypeInstance::new(points.clone(), weights.clone())?;
        Ok(TypeDistribution::Discrete { points, weights })
    }

    pub fn piecewise(breakpoints: Vec<T>, densities: Vec<T>) -> Result<Self> {
        if breakpoints.len() < 2 || densities.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(
                "densities",
                format!(
                    "{} breakpoints need {} densities, got {}",
                    breakpoints.len(),
                    breakpoints.len().saturating_sub(1),
                    densities.len()
                ),
            ));
        }
        if !breakpoints[0].is_zero() || !(breakpoints[breakpoints.len() - 1].clone() - T::one()).is_zero() {
            return Err(Error::invalid("breakpoints", "must start at 0 and end at 1"));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("breakpoints[{}]", i + 1), "must be strictly increasing"));
        }
        if let Some(i) = densities.iter().position(|f| *f < T::zero()) {
            return Err(Error::invalid(format!("densities[{i}]"), "negative density"));
        }
        let total = breakpoints
            .windows(2)
            .zip(&densities)
            .fold(T::zero(), |s, (w, f)| s + f.clone() * (w[1].clone() - w[0].clone()));
        if (total.clone() - T::one()).abs() > T::sum_tol() {
            return Err(Error::invalid("densities", format!("density integrates to {total}, expected 1")));
        }
        Ok(TypeDistribution::PiecewiseConstant { breakpoints, densities })
    }

    pub fn uniform() -> Self {
        TypeDistribution::PiecewiseConstant {
            breakpoints: vec![T::zero(), T::one()],
            densities: vec![T::one()],
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, TypeDistribution::Discrete { .. })
    }

    /// Supremum of the density; `None` for distributions with atoms.
    pub fn density_bound(&self) -> Option<T> {
        match self {
            TypeDistribution::Discrete { .. } => None,
            TypeDistribution::PiecewiseConstant { densities, .. } => Some(
                densities
                    .iter()
                    .cloned()
                    .fold(T::zero(), |m, f| T::max_of(m, f)),
            ),
        }
    }

    /// Breakpoints at which the density (or atom set) changes.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            TypeDistribution::Discrete { points, .. } => points.clone(),
            TypeDistribution::PiecewiseConstant { breakpoints, .. } => breakpoints.clone(),
        }
    }

    /// `P[θ ∈ (lo, hi]]`, or `P[θ ∈ [lo, hi]]` when `closed_lo`.
    pub fn interval_mass(&self, lo: &T, hi: &T, closed_lo: bool) -> Result<T> {
        if lo > hi {
            return Err(Error::usage(format!("interval ({lo}, {hi}] has lo > hi")));
        }
        Ok(match self {
            TypeDistribution::Discrete { points, weights } => points
                .iter()
                .zip(weights)
                .filter(|(x, _)| *x <= hi && (*x > lo || (closed_lo && *x == lo)))
                .fold(T::zero(), |s, (_, w)| s + w.clone()),
            TypeDistribution::PiecewiseConstant { breakpoints, densities } => breakpoints
                .windows(2)
                .zip(densities)
                .fold(T::zero(), |s, (w, f)| {
                    let a = T::max_of(w[0].clone(), lo.clone());
                    let b = T::min_of(w[1].clone(), hi.clone());
                    if b > a {
                        s + f.clone() * (b - a)
                    } else {
                        s
                    }
                }),
        })
    }

    pub fn cdf(&self, x: &T) -> T {
        self.interval_mass(&T::zero(), x, true).unwrap_or_else(|_| T::zero())
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u = T::from_f64(rng.gen::<f64>());
        match self {
            TypeDistribution::Discrete { points, weights } => {
                let mut acc = T::zero();
                for (x, w) in points.iter().zip(weights) {
                    acc = acc + w.clone();
                    if u < acc {
                        return x.clone();
                    }
                }
                points
                    .iter()
                    .zip(weights)
                    .rev()
                    .find(|(_, w)| !w.is_zero())
                    .map(|(x, _)| x.clone())
                    .unwrap_or_else(|| points[points.len() - 1].clone())
            }
            TypeDistribution::PiecewiseConstant { breakpoints, densities } => {
                let mut acc = T::zero();
                for (w, f) in breakpoints.windows(2).zip(densities) {
                    if f.is_zero() {
                        continue;
                    }
                    let mass = f.clone() * (w[1].clone() - w[0].clone());
                    if u < acc.clone() + mass.clone() {
                        let x = w[0].clone() + (u - acc) / f.clone();
                        return T::min_of(x, w[1].clone());
                    }
                    acc = acc + mass;
                }
                T::one()
            }
        }
    }

    pub fn to_f64(&self) -> TypeDistribution<f64> {
        let conv = |v: &Vec<T>| v.iter().map(|x| x.as_f64()).collect();
        match self {
            TypeDistribution::Discrete { points, weights } => TypeDistribution::Discrete {
                points: conv(points),
                weights: conv(weights),
            },
            TypeDistribution::PiecewiseConstant { breakpoints, densities } => TypeDistribution::PiecewiseConstant {
                breakpoints: conv(breakpoints),
                densities: conv(densities),
            },
        }
    }
}

/// Smallest integer `k ≥ 1` with `k δ ≥ 1`.
pub fn grid_size<T: Scalar>(delta: &T) -> Result<usize> {
    if *delta <= T::zero() || *delta > T::one() {
        return Err(Error::usage(format!("grid width {delta} outside (0,1]")));
    }
    let approx = (1.0 / delta.as_f64()).ceil();
    if !approx.is_finite() || approx > 1e9 {
        return Err(Error::resource(format!("grid width {delta} gives more than 1e9 cells")));
    }
    let mut k = (approx as usize).max(1);
    while k > 1 && T::from_usize(k - 1) * delta.clone() >= T::one() {
        k -= 1;
    }
    while T::from_usize(k) * delta.clone() < T::one() {
        k += 1;
    }
    Ok(k)
}

/// Grid points `(i − ½)δ`, `i = 1..⌈1/δ⌉`, clamped to 1.
pub fn grid_types<T: Scalar>(delta: &T) -> Result<Vec<T>> {
    let k = grid_size(delta)?;
    let half = T::from_ratio(1, 2);
    Ok((1..=k)
        .map(|i| T::min_of((T::from_usize(i) - half.clone()) * delta.clone(), T::one()))
        .collect())
}

/// Cells `((i−1)δ, min(iδ, 1)]` tiling `[0,1]`, the first closed at 0.
pub fn grid_cells<T: Scalar>(delta: &T) -> Result<Vec<(T, T)>> {
    let k = grid_size(delta)?;
    Ok((1..=k)
        .map(|i| {
            (
                T::from_usize(i - 1) * delta.clone(),
                T::min_of(T::from_usize(i) * delta.clone(), T::one()),
            )
        })
        .collect())
}

/// The grid instance: one type per cell carrying the cell's mass.
pub fn discretize<T: Scalar>(dist: &TypeDistribution<T>, delta: &T) -> Result<DiscreteTypeInstance<T>> {
    let types = grid_types(delta)?;
    let weights = grid_cells(delta)?
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| dist.interval_mass(lo, hi, i == 0))
        .collect::<Result<Vec<T>>>()?;
    DiscreteTypeInstance::new(types, weights)
}

/// `E_{θ∼Γ}[U^P(p, θ)]`, exact for both variants.
///
/// On each interval between consecutive best-response switch points and
/// density breakpoints the best response is constant, so the expectation is a
/// finite sum of `mass × utility`.
pub fn expected_utility<T: Scalar>(inst: &Instance<T>, dist: &TypeDistribution<T>, p: &Contract<T>) -> T {
    match dist {
        TypeDistribution::Discrete { points, weights } => points
            .iter()
            .zip(weights)
            .fold(T::zero(), |s, (x, w)| s + w.clone() * best_response(inst, p, x).principal_utility),
        TypeDistribution::PiecewiseConstant { breakpoints, .. } => {
            let mut total = T::zero();
            for (lo, hi, a) in best_response_segments(inst, p) {
                let mut cuts = vec![lo.clone()];
                cuts.extend(breakpoints.iter().filter(|b| **b > lo && **b < hi).cloned());
                cuts.push(hi);
                let value = inst.principal_utility_raw(p, a);
                for w in cuts.windows(2) {
                    let mass = dist
                        .interval_mass(&w[0], &w[1], true)
                        .expect("ordered cut points");
                    total = total + mass * value.clone();
                }
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ratio, rng_new, Rational};

    fn skewed() -> TypeDistribution<Rational> {
        TypeDistribution::piecewise(
            vec![ratio(0, 1), ratio(1, 2), ratio(1, 1)],
            vec![ratio(3, 2), ratio(1, 2)],
        )
        .unwrap()
    }

    #[test]
    fn uniform_masses() {
        let u = TypeDistribution::<Rational>::uniform();
        assert_eq!(u.interval_mass(&ratio(1, 4), &ratio(3, 4), false).unwrap(), ratio(1, 2));
        assert_eq!(u.interval_mass(&ratio(0, 1), &ratio(1, 1), true).unwrap(), ratio(1, 1));
        assert!(u.interval_mass(&ratio(3, 4), &ratio(1, 4), false).is_err());
    }

    #[test]
    fn piecewise_mass_straddling_breakpoint() {
        let d = skewed();
        assert_eq!(d.interval_mass(&ratio(2, 5), &ratio(3, 5), false).unwrap(), ratio(1, 5));
        assert_eq!(d.density_bound(), Some(ratio(3, 2)));
    }

    #[test]
    fn discrete_mass_respects_closedness() {
        let d = TypeDistribution::discrete(vec![ratio(0, 1), ratio(1, 2)], vec![ratio(1, 4), ratio(3, 4)]).unwrap();
        assert_eq!(d.interval_mass(&ratio(0, 1), &ratio(1, 2), false).unwrap(), ratio(3, 4));
        assert_eq!(d.interval_mass(&ratio(0, 1), &ratio(1, 2), true).unwrap(), ratio(1, 1));
        assert_eq!(d.density_bound(), None);
    }

    #[test]
    fn validation() {
        assert!(TypeDistribution::piecewise(vec![0.0, 1.0], vec![0.9]).is_err());
        assert!(TypeDistribution::piecewise(vec![0.0, 0.6, 0.5, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(TypeDistribution::piecewise(vec![0.1, 1.0], vec![1.0 / 0.9]).is_err());
        assert!(TypeDistribution::discrete(vec![0.2], vec![0.5]).is_err());
    }

    #[test]
    fn discretize_examples() {
        let u = TypeDistribution::<Rational>::uniform();
        let g = discretize(&u, &ratio(1, 2)).unwrap();
        assert_eq!(g.types(), &[ratio(1, 4), ratio(3, 4)]);
        assert_eq!(g.weights(), &[ratio(1, 2), ratio(1, 2)]);
        let one = discretize(&u, &ratio(1, 1)).unwrap();
        assert_eq!(one.types(), &[ratio(1, 2)]);
        assert_eq!(one.weights(), &[ratio(1, 1)]);
        let s = discretize(&skewed(), &ratio(1, 2)).unwrap();
        assert_eq!(s.weights(), &[ratio(3, 4), ratio(1, 4)]);
        assert!(discretize(&u, &ratio(0, 1)).is_err());
    }

    #[test]
    fn discretize_ragged_last_cell() {
        // δ = 2/5: cells (0,2/5], (2/5,4/5], (4/5,1]; last point 1 clamped.
        let g = discretize(&TypeDistribution::<Rational>::uniform(), &ratio(2, 5)).unwrap();
        assert_eq!(g.types(), &[ratio(1, 5), ratio(3, 5), ratio(1, 1)]);
        assert_eq!(g.weights(), &[ratio(2, 5), ratio(2, 5), ratio(1, 5)]);
        assert_eq!(grid_size(&ratio(1, 3)).unwrap(), 3);
        assert_eq!(grid_size(&0.01).unwrap(), 100);
    }

    #[test]
    fn discrete_point_sampling() {
        let d = TypeDistribution::discrete(vec![0.3], vec![1.0]).unwrap();
        let mut rng = rng_new(1);
        assert!((0..100).all(|_| d.sample(&mut rng) == 0.3));
    }

    #[test]
    fn uniform_sample_mean() {
        let d = TypeDistribution::<f64>::uniform();
        let mut rng = rng_new(5);
        let n = 100_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn piecewise_sampling_ks() {
        let d = skewed().to_f64();
        let mut rng = rng_new(8);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cdf = |x: f64| if x < 0.5 { 1.5 * x } else { 0.75 + 0.5 * (x - 0.5) };
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "ks = {ks}");
    }

    #[test]
    fn exact_expectation_two_action() {
        let inst = Instance::new(
            vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]],
            vec![ratio(0, 1), ratio(1, 1)],
            vec![ratio(0, 1), ratio(1, 1)],
            None,
        )
        .unwrap();
        // p = (0, 1/2): types below 1/2 work and leave the principal 1/2.
        let p = Contract(vec![ratio(0, 1), ratio(1, 2)]);
        assert_eq!(expected_utility(&inst, &TypeDistribution::uniform(), &p), ratio(1, 4));
        assert_eq!(expected_utility(&inst, &skewed(), &p), ratio(3, 8));
    }
}
