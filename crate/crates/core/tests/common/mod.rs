//! Shared generators and float oracles written without the library's solvers.
#![allow(dead_code)]

use contractlab::dist::TypeDistribution;
use contractlab::model::Instance;
use contractlab::numerics::{ratio, Rational};
use rand::Rng;

pub fn q(a: i64, b: i64) -> Rational {
    ratio(a, b)
}

/// Random instance with `n` actions and `m` outcomes; probabilities have denominator 12,
/// rewards and costs are multiples of 1/10 and action 0 costs nothing.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize) -> Instance<Rational> {
    let f = (0..n)
        .map(|_| {
            let mut parts: Vec<i64> = (0..m - 1).map(|_| rng.gen_range(0..=12)).collect();
            parts.push(0);
            parts.push(12);
            parts.sort_unstable();
            parts.windows(2).map(|w| q(w[1] - w[0], 12)).collect()
        })
        .collect();
    let r = (0..m).map(|_| q(rng.gen_range(0..=10), 10)).collect();
    // action 0 is the free outside option
    let c = (0..n).map(|a| if a == 0 { q(0, 1) } else { q(rng.gen_range(0..=10), 10) }).collect();
    Instance::new(f, r, c, None).expect("generated instance is valid")
}

/// Strictly increasing types with denominator 20 and positive weights summing to one.
pub fn random_types<R: Rng>(rng: &mut R, k: usize) -> (Vec<Rational>, Vec<Rational>) {
    let mut pts: Vec<i64> = Vec::new();
    while pts.len() < k {
        let t = rng.gen_range(0..=20);
        if !pts.contains(&t) {
            pts.push(t);
        }
    }
    pts.sort_unstable();
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    (pts.into_iter().map(|t| q(t, 20)).collect(), raw.into_iter().map(|w| q(w, total)).collect())
}

/// Piecewise-constant density with breakpoints on a grid of 1/8.
pub fn random_piecewise<R: Rng>(rng: &mut R) -> TypeDistribution<Rational> {
    let mut cuts: Vec<i64> = (1..8).filter(|_| rng.gen_bool(0.3)).collect();
    cuts.insert(0, 0);
    cuts.push(8);
    let heights: Vec<i64> = (0..cuts.len() - 1).map(|_| rng.gen_range(1..=4)).collect();
    let mass: i64 = cuts.windows(2).zip(&heights).map(|(w, h)| (w[1] - w[0]) * h).sum();
    // density h·8/mass integrates to 1
    TypeDistribution::piecewise(
        cuts.iter().map(|&c| q(c, 8)).collect(),
        heights.iter().map(|&h| q(8 * h, mass)).collect(),
    )
    .expect("valid density")
}

/// Plain float copy of an instance.
pub struct Plain {
    pub f: Vec<Vec<f64>>,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
}

impl Plain {
    pub fn of(inst: &Instance<Rational>) -> Self {
        let g = |x: &Rational| contractlab::numerics::Scalar::as_f64(x);
        Plain {
            f: inst.outcome_probs().iter().map(|row| row.iter().map(g).collect()).collect(),
            r: inst.rewards().iter().map(g).collect(),
            c: inst.costs().iter().map(g).collect(),
        }
    }

    pub fn agent(&self, p: &[f64], a: usize, theta: f64) -> f64 {
        self.f[a].iter().zip(p).map(|(x, y)| x * y).sum::<f64>() - theta * self.c[a]
    }

    pub fn principal(&self, p: &[f64], a: usize) -> f64 {
        self.f[a].iter().zip(&self.r).zip(p).map(|((x, r), y)| x * (r - y)).sum()
    }

    /// Agent maximizer, ties (within 1e-9) resolved for the principal.
    pub fn respond(&self, p: &[f64], theta: f64) -> usize {
        let utils: Vec<f64> = (0..self.f.len()).map(|a| self.agent(p, a, theta)).collect();
        let best = utils.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut pick = usize::MAX;
        for a in 0..utils.len() {
            if utils[a] >= best - 1e-9 && (pick == usize::MAX || self.principal(p, a) > self.principal(p, pick) + 1e-12) {
                pick = a;
            }
        }
        pick
    }

    pub fn value_at(&self, p: &[f64], theta: f64) -> f64 {
        self.principal(p, self.respond(p, theta))
    }
}

/// Every point of `{0, h, 2h, …, 1}^m`.
pub fn grid_points(m: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * (steps + 1));
        for v in &out {
            for s in 0..=steps {
                let mut w = v.clone();
                w.push(s as f64 / steps as f64);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Best value of `Σ γ_i U^P(p, θ_i)` over the grid of step `1/steps`.
pub fn grid_opt_discrete(inst: &Plain, types: &[f64], weights: &[f64], steps: usize) -> f64 {
    grid_points(inst.r.len(), steps)
        .iter()
        .map(|p| types.iter().zip(weights).map(|(t, w)| w * inst.value_at(p, *t)).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Midpoint rule with `cells` cells for `∫ g(θ) U^P(p, θ) dθ`.
pub fn quadrature(inst: &Plain, density: &TypeDistribution<f64>, p: &[f64], cells: usize) -> f64 {
    let h = 1.0 / cells as f64;
    (0..cells)
        .map(|i| {
            let theta = (i as f64 + 0.5) * h;
            density_at(density, theta) * inst.value_at(p, theta) * h
        })
        .sum()
}

pub fn density_at(d: &TypeDistribution<f64>, theta: f64) -> f64 {
    match d {
        TypeDistribution::PiecewiseConstant { breakpoints, densities } => {
            for (w, g) in breakpoints.windows(2).zip(densities) {
                if theta >= w[0] && theta < w[1] {
                    return *g;
                }
            }
            *densities.last().expect("nonempty")
        }
        TypeDistribution::Discrete { .. } => panic!("no density"),
    }
}

pub fn to_f64s(xs: &[Rational]) -> Vec<f64> {
    xs.iter().map(contractlab::numerics::Scalar::as_f64).collect()
}
