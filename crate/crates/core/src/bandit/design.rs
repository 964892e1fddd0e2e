//! G-optimal experimental design by Frank-Wolfe with away steps.
//!
//! For weights `ρ` on arms `x`, the leverage of arm `x` is `xᵀ G(ρ)⁻¹ x` with
//! `G(ρ) = Σ ρ(x) x xᵀ`. The maximum leverage is at least `d` and equals `d`
//! exactly at the optimum (Kiefer-Wolfowitz). Arms are first expressed in an
//! orthonormal basis of their span, so rank-deficient sets work in dimension
//! `d' = rank`.

use crate::error::{Error, Result};
use crate::numerics::linalg::{dot, invert, mat_vec, span_basis, Matrix};

use super::support_cap;

/// Relative norm below which a residual direction counts as absent.
pub const RANK_TOL: f64 = 1e-10;

const MAX_ITERS: usize = 200_000;
const REFRESH_EVERY: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignWeights {
    /// One weight per input arm, summing to 1.
    pub weights: Vec<f64>,
    /// Dimension of the span of the arms.
    pub rank: usize,
    /// `max_x xᵀ G(ρ)⁻¹ x` at the returned weights.
    pub max_leverage: f64,
    pub iterations: usize,
}

impl DesignWeights {
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }
}

/// Arms in coordinates of an orthonormal basis of their span.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Basis vectors as rows (`rank × d`).
    pub basis: Vec<Vec<f64>>,
    pub coords: Vec<Vec<f64>>,
}

impl Projection {
    pub fn new(arms: &[Vec<f64>]) -> Self {
        let basis = span_basis(arms, RANK_TOL);
        let coords = arms.iter().map(|x| mat_vec(&basis, x)).collect();
        Projection { basis, coords }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Maps span coordinates back to the ambient space.
    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        let d = self.basis.first().map_or(0, |b| b.len());
        let mut out = vec![0.0; d];
        for (coef, row) in z.iter().zip(&self.basis) {
            for (o, b) in out.iter_mut().zip(row) {
                *o += coef * b;
            }
        }
        out
    }
}

fn gram(coords: &[Vec<f64>], w: &[f64]) -> Matrix {
    let r = coords[0].len();
    let mut g = vec![vec![0.0; r]; r];
    for (z, &wi) in coords.iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        for a in 0..r {
            for b in 0..r {
                g[a][b] += wi * z[a] * z[b];
            }
        }
    }
    g
}

fn leverages(coords: &[Vec<f64>], ginv: &Matrix) -> Vec<f64> {
    coords.iter().map(|z| dot(z, &mat_vec(ginv, z))).collect()
}

/// Maximum leverage of `weights` over `coords`, `∞` when the design is singular.
pub fn max_leverage(coords: &[Vec<f64>], weights: &[f64]) -> f64 {
    match invert(&gram(coords, weights)) {
        Ok(ginv) => leverages(coords, &ginv).into_iter().fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

/// Weights on `arms` with maximum leverage at most `(1 + tol)·rank`.
pub fn g_optimal_design(arms: &[Vec<f64>], tol: f64) -> Result<DesignWeights> {
    if arms.is_empty() {
        return Err(Error::usage("design needs at least one arm"));
    }
    if !(tol > 0.0) {
        return Err(Error::usage(format!("design tolerance {tol} must be positive")));
    }
    let proj = Projection::new(arms);
    let r = proj.rank();
    if r == 0 {
        return Err(Error::usage("all arms are zero; no design exists"));
    }
    let z = &proj.coords;
    let k = arms.len();
    let target = (1.0 + tol) * r as f64;
    let rf = r as f64;

    let mut w = vec![1.0 / k as f64; k];
    let mut ginv = invert(&gram(z, &w)).map_err(|_| Error::usage("arms do not span their own span"))?;
    let mut lev = leverages(z, &ginv);
    let mut iters = 0;
    while iters < MAX_ITERS {
        let (jmax, &wmax) = lev
            .iter()
            .enumerate()
            .fold((0, &f64::MIN), |b, c| if c.1 > b.1 { c } else { b });
        if wmax <= target {
            break;
        }
        iters += 1;
        // Away candidate: smallest leverage on the support.
        let (jmin, lmin) = (0..k)
            .filter(|&i| w[i] > 0.0)
            .map(|i| (i, lev[i]))
            .fold((usize::MAX, f64::MAX), |b, c| if c.1 < b.1 { c } else { b });
        let (j, tau) = if jmin != usize::MAX && rf - lmin > wmax - rf && w[jmin] < 1.0 {
            let raw = (lmin - rf) / (rf * (lmin - 1.0));
            let floor = -w[jmin] / (1.0 - w[jmin]);
            // Below leverage 1 the line search improves all the way to the drop step.
            (jmin, if lmin > 1.0 { raw.max(floor) } else { floor })
        } else {
            (jmax, (wmax - rf) / (rf * (wmax - 1.0)))
        };
        if tau == 0.0 || !tau.is_finite() {
            break;
        }
        // G' = (1−τ)G + τ z_j z_jᵀ; update G⁻¹ and all leverages by Sherman-Morrison.
        let u = mat_vec(&ginv, &z[j]);
        let lj = lev[j];
        let denom = (1.0 - tau) + tau * lj;
        let scale = 1.0 / (1.0 - tau);
        let cross: Vec<f64> = z.iter().map(|zi| dot(zi, &u)).collect();
        for i in 0..k {
            lev[i] = scale * (lev[i] - tau * cross[i] * cross[i] / denom);
        }
        for a in 0..r {
            for b in 0..r {
                ginv[a][b] = scale * (ginv[a][b] - tau * u[a] * u[b] / denom);
            }
        }
        for (i, wi) in w.iter_mut().enumerate() {
            *wi *= 1.0 - tau;
            if i == j {
                *wi += tau;
            }
        }
        if w[j] < 1e-15 {
            w[j] = 0.0;
        }
        if iters % REFRESH_EVERY == 0 {
            normalize(&mut w);
            match invert(&gram(z, &w)) {
                Ok(g) => {
                    ginv = g;
                    lev = leverages(z, &ginv);
                }
                Err(_) => break,
            }
        }
    }
    normalize(&mut w);
    prune(z, &mut w, target, support_cap(r));
    let max_lev = max_leverage(z, &w);
    Ok(DesignWeights {
        weights: w,
        rank: r,
        max_leverage: max_lev,
        iterations: iters,
    })
}

fn normalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= s;
    }
}

/// Drops the lightest support points while the leverage bound survives.
fn prune(z: &[Vec<f64>], w: &mut Vec<f64>, target: f64, cap: usize) {
    loop {
        let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        if support.len() <= cap {
            return;
        }
        let lightest = *support
            .iter()
            .min_by(|&&a, &&b| w[a].partial_cmp(&w[b]).expect("finite weights"))
            .expect("nonempty support");
        let mut trial = w.clone();
        trial[lightest] = 0.0;
        normalize(&mut trial);
        if max_leverage(z, &trial) > target {
            return;
        }
        *w = trial;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_basis_is_uniform() {
        let arms: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let d = g_optimal_design(&arms, 0.01).unwrap();
        for w in &d.weights {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!((d.max_leverage - 4.0).abs() < 1e-9);
    }

    #[test]
    fn single_arm() {
        let d = g_optimal_design(&[vec![0.3, 0.4]], 0.01).unwrap();
        assert_eq!(d.weights, vec![1.0]);
        assert_eq!(d.rank, 1);
        assert!((d.max_leverage - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_arms_rejected() {
        assert!(g_optimal_design(&[vec![0.0, 0.0]], 0.01).is_err());
    }

    #[test]
    fn three_arms_match_simplex_grid() {
        let arms = vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.2, 0.3]];
        let tol = 0.01;
        let d = g_optimal_design(&arms, tol).unwrap();
        let z = Projection::new(&arms).coords;
        let mut best = f64::INFINITY;
        for a in 0..=100 {
            for b in 0..=(100 - a) {
                let w = [a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0];
                best = best.min(max_leverage(&z, &w));
            }
        }
        assert!(d.max_leverage <= (1.0 + tol) * best + 1e-9, "{} vs {best}", d.max_leverage);
        assert!(d.max_leverage <= 2.0 * (1.0 + tol));
    }

    #[test]
    fn rank_deficient_arms_are_projected() {
        let arms = vec![vec![1.0, 1.0, 0.0], vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0]];
        let d = g_optimal_design(&arms, 0.01).unwrap();
        assert_eq!(d.rank, 2);
        assert!(d.max_leverage <= 2.02);
    }

    #[test]
    fn many_arms_converge() {
        let mut rng = crate::numerics::rng_new(17);
        use rand::Rng;
        let arms: Vec<Vec<f64>> = (0..200).map(|_| (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let d = g_optimal_design(&arms, 0.05).unwrap();
        assert!(d.max_leverage <= 20.0 * 1.05 + 1e-9);
        assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
