//! Lawson–Hanson active-set solver for `min |A x - b|` subject to `x >= 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `b - A x`.
    pub residual: DVector<f64>,
    pub iterations: usize,
}

/// Relative optimality tolerance on the dual vector `A^T (b - A x)`.
pub const NNLS_TOL: f64 = 1e-12;

/// Solves the nonnegative least-squares problem.
///
/// `warm` lists columns expected to be positive at the optimum; they seed
/// the passive set. The outer loop runs at most `max_iter` times.
pub fn nnls(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    max_iter: usize,
    warm: &[usize],
) -> Result<NnlsSolution> {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "nnls: dimension mismatch");
    let mut x = DVector::zeros(n);
    if n == 0 {
        return Ok(NnlsSolution {
            x,
            residual: b.clone(),
            iterations: 0,
        });
    }
    let tol = NNLS_TOL * (1.0 + a.norm() * b.norm());
    let mut passive = vec![false; n];

    if !warm.is_empty() {
        for &j in warm.iter().filter(|&&j| j < n) {
            passive[j] = true;
        }
        // Shrink the seed until its least-squares solution is positive.
        for _ in 0..=warm.len() {
            if !passive.iter().any(|&p| p) {
                break;
            }
            let z = solve_passive(a, b, &passive);
            let mut changed = false;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    passive[j] = false;
                    changed = true;
                }
            }
            if !changed {
                x = z;
                break;
            }
        }
        for j in 0..n {
            if !passive[j] {
                x[j] = 0.0;
            }
        }
    }

    let mut rejected = vec![false; n];
    let mut iterations = 0;
    loop {
        let resid = b - a * &x;
        let w = a.tr_mul(&resid);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !rejected[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let t = match candidate {
            Some(t) if w[t] > tol => t,
            _ => {
                return Ok(NnlsSolution {
                    x,
                    residual: resid,
                    iterations,
                })
            }
        };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::Convergence {
                what: "nnls",
                iterations,
                residual: w[t],
            });
        }

        passive[t] = true;
        let mut z = solve_passive(a, b, &passive);
        if z[t] <= 0.0 {
            // Numerically dependent column: skip it until the iterate moves.
            passive[t] = false;
            rejected[t] = true;
            continue;
        }
        loop {
            if (0..n).all(|j| !passive[j] || z[j] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for j in 0..n {
                if passive[j] && z[j] <= 0.0 {
                    let denom = x[j] - z[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            x += (&z - &x) * alpha;
            let floor = 1e-15 * (1.0 + x.amax());
            for j in 0..n {
                if passive[j] && x[j] <= floor {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            z = solve_passive(a, b, &passive);
        }
        rejected.iter_mut().for_each(|r| *r = false);
    }
}

/// Least-squares solution restricted to passive columns, zero elsewhere.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let n = a.ncols();
    let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
    let mut z = DVector::zeros(n);
    if cols.is_empty() {
        return z;
    }
    let sub = a.select_columns(&cols);
    let sol = if cols.len() <= a.nrows() {
        let qr = sub.clone().qr();
        let r = qr.r();
        let rmax = r.diagonal().amax();
        if r.diagonal().iter().all(|d| d.abs() > 1e-12 * rmax) {
            r.solve_upper_triangular(&qr.q().tr_mul(b))
        } else {
            None
        }
    } else {
        None
    };
    // Rank deficient: minimum-norm solution, refined once since the SVD
    // alone can leave residuals well above rounding.
    let sol = sol.or_else(|| {
        let svd = sub.clone().svd(true, true);
        let eps = 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let x = svd.solve(b, eps).ok()?;
        let dx = svd.solve(&(b - &sub * &x), eps).ok()?;
        Some(x + dx)
    });
    if let Some(sol) = sol {
        for (k, &j) in cols.iter().enumerate() {
            z[j] = sol[k];
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use nalgebra::dvector;

    #[test]
    fn unconstrained_solution_when_positive() {
        let a = dmatrix![1.0, 0.0; 0.0, 2.0];
        let b = dvector![3.0, 4.0];
        let s = nnls(&a, &b, 100, &[]).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-14);
        assert!((s.x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clamps_negative_component() {
        let a = dmatrix![1.0, 0.0; 0.0, 1.0];
        let b = dvector![-1.0, 2.0];
        let s = nnls(&a, &b, 100, &[]).unwrap();
        assert_eq!(s.x[0], 0.0);
        assert!((s.x[1] - 2.0).abs() < 1e-14);
        assert!((s.residual[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let a = dmatrix![1.0, 2.0, 0.5; 0.3, -1.0, 1.0; 2.0, 0.1, -0.4];
        let b = dvector![1.0, -2.0, 0.7];
        let cold = nnls(&a, &b, 100, &[]).unwrap();
        let warm = nnls(&a, &b, 100, &[0, 1, 2]).unwrap();
        assert!((cold.x - warm.x).norm() < 1e-12);
    }

    #[test]
    fn dependent_columns() {
        // third column duplicates the first
        let a = dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 0.0];
        let b = dvector![2.0, 1.0];
        let s = nnls(&a, &b, 100, &[]).unwrap();
        assert!(s.residual.norm() < 1e-12);
        assert!(s.x.iter().all(|&v| v >= 0.0));
    }
}
