//! Small dense linear algebra: float LU with partial pivoting, an orthonormal
//! span basis, and exact Gaussian elimination over rationals.

use num_traits::Zero;

use super::scalar::Rational;

/// Pivots with magnitude below this are treated as zero.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Row-major square matrix.
pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

impl std::fmt::Display for Singular {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "matrix is singular to working precision")
    }
}

impl std::error::Error for Singular {}

/// `PA = LU` packed into one matrix (unit lower triangle implicit).
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self, Singular> {
        let n = a.len();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i][k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot < SINGULAR_PIVOT {
                return Err(Singular);
            }
            lu.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let f = lu[i][k] / lu[k][k];
                lu[i][k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i][j] -= f * lu[k][j];
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i][j] * x[j];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }
}

pub fn solve_linear_system(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, Singular> {
    Ok(Lu::factor(a)?.solve(b))
}

pub fn invert(a: &Matrix) -> Result<Matrix, Singular> {
    let n = a.len();
    let lu = Lu::factor(a)?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(lu.solve(&e));
    }
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Orthonormal basis of `span(vectors)` by pivoted modified Gram-Schmidt.
///
/// A residual is kept only when its norm exceeds `rel_tol` times the largest
/// input norm. The basis is returned as rows.
pub fn span_basis(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let scale = vectors
        .iter()
        .map(|v| dot(v, v).sqrt())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut residuals: Vec<Vec<f64>> = vectors.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let dim = vectors[0].len();
    while basis.len() < dim {
        let (idx, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, dot(r, r).sqrt()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if norm <= rel_tol * scale {
            break;
        }
        let q: Vec<f64> = residuals[idx].iter().map(|v| v / norm).collect();
        for r in residuals.iter_mut() {
            let c = dot(r, &q);
            for (x, qi) in r.iter_mut().zip(&q) {
                *x -= c * qi;
            }
        }
        basis.push(q);
    }
    basis
}

/// Exact solution of a square rational system, `None` when singular.
pub fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let pivot = m[k][k].clone();
        for v in m[k].iter_mut().skip(k) {
            *v = &*v / &pivot;
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == k || row[k].is_zero() {
                continue;
            }
            let f = row[k].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(k) {
                *v = &*v - &f * pv;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_returns_input() {
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(solve_linear_system(&a, &[3.0, -1.0, 2.5]).unwrap(), vec![3.0, -1.0, 2.5]);
    }

    #[test]
    fn diagonal_system() {
        let a = vec![vec![2.0, 0.0], vec![0.0, 4.0]];
        assert_eq!(solve_linear_system(&a, &[1.0, 1.0]).unwrap(), vec![0.5, 0.25]);
    }

    #[test]
    fn singular_matrix_is_flagged() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve_linear_system(&a, &[1.0, 1.0]), Err(Singular));
        assert!(invert(&a).is_err());
    }

    #[test]
    fn random_spd_inverse_multiplies_back() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b: Matrix = (0..5).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let mut a: Matrix = vec![vec![0.0; 5]; 5];
            for i in 0..5 {
                for j in 0..5 {
                    a[i][j] = (0..5).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
                }
            }
            let inv = invert(&a).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let v: f64 = (0..5).map(|k| a[i][k] * inv[k][j]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((v - target).abs() <= 1e-8, "entry ({i},{j}) = {v}");
                }
            }
            let rhs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = solve_linear_system(&a, &rhs).unwrap();
            let resid = mat_vec(&a, &x)
                .iter()
                .zip(&rhs)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            let bnorm = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(resid <= 1e-8 * bnorm);
        }
    }

    #[test]
    fn span_basis_detects_rank() {
        let v = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 0.0]];
        let q = span_basis(&v, 1e-10);
        assert_eq!(q.len(), 2);
        for a in &q {
            assert!((dot(a, a) - 1.0).abs() < 1e-12);
            assert!(a[2].abs() < 1e-12);
        }
        assert!(dot(&q[0], &q[1]).abs() < 1e-12);
        assert!(span_basis(&[vec![0.0, 0.0]], 1e-10).is_empty());
    }

    #[test]
    fn rational_solve_is_exact() {
        let a = vec![vec![ratio(1, 3), ratio(1, 1)], vec![ratio(2, 1), ratio(-1, 7)]];
        let b = vec![ratio(1, 1), ratio(0, 1)];
        let x = solve_rational(&a, &b).unwrap();
        for (row, rhs) in a.iter().zip(&b) {
            let lhs = &row[0] * &x[0] + &row[1] * &x[1];
            assert_eq!(&lhs, rhs);
        }
        let singular = vec![vec![ratio(1, 1), ratio(2, 1)], vec![ratio(1, 2), ratio(1, 1)]];
        assert!(solve_rational(&singular, &b).is_none());
    }
}
