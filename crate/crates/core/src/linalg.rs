//! Dense complex solves with row equilibration and a 1-norm condition
//! estimate, plus a tiny real polynomial type for contour construction.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat};
use num_complex::Complex64;

/// LU factorization of a row-equilibrated matrix `S A`.
pub(crate) struct EquilibratedLu {
    lu: PartialPivLu<c64>,
    row_scale: Vec<f64>,
    scaled_norm1: f64,
}

impl EquilibratedLu {
    pub fn new(a: &Mat<c64>) -> Self {
        let n = a.nrows();
        let row_scale: Vec<f64> = (0..n)
            .map(|i| {
                let s: f64 = (0..n).map(|j| a[(i, j)].norm()).sum();
                if s > 0.0 {
                    1.0 / s
                } else {
                    1.0
                }
            })
            .collect();
        let scaled = Mat::<c64>::from_fn(n, n, |i, j| a[(i, j)] * row_scale[i]);
        let scaled_norm1 = (0..n)
            .map(|j| (0..n).map(|i| scaled[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        EquilibratedLu {
            lu: scaled.partial_piv_lu(),
            row_scale,
            scaled_norm1,
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = rhs.len();
        let b = Mat::<c64>::from_fn(n, 1, |i, _| rhs[i] * self.row_scale[i]);
        let x = self.lu.solve(&b);
        (0..n).map(|i| x[(i, 0)]).collect()
    }

    fn solve_scaled(&self, rhs: &Mat<c64>) -> Mat<c64> {
        self.lu.solve(rhs)
    }

    fn solve_scaled_adjoint(&self, rhs: &Mat<c64>) -> Mat<c64> {
        self.lu.solve_adjoint(rhs)
    }

    /// Estimate of the 1-norm condition number of the equilibrated matrix
    /// (Hager's iteration with Higham's alternating test vector).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.row_scale.len();
        let norm1 = |m: &Mat<c64>| (0..n).map(|i| m[(i, 0)].norm()).sum::<f64>();
        let mut x = Mat::<c64>::from_fn(n, 1, |_, _| c64::new(1.0 / n as f64, 0.0));
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_scaled(&x);
            est = norm1(&y);
            let xi = Mat::<c64>::from_fn(n, 1, |i, _| {
                let v = y[(i, 0)];
                if v.norm() > 0.0 {
                    v / v.norm()
                } else {
                    c64::new(1.0, 0.0)
                }
            });
            let z = self.solve_scaled_adjoint(&xi);
            let (mut jmax, mut zmax) = (0, 0.0);
            for i in 0..n {
                if z[(i, 0)].norm() > zmax {
                    zmax = z[(i, 0)].norm();
                    jmax = i;
                }
            }
            let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[(i, 0)]).re).sum();
            if zmax <= ztx {
                break;
            }
            x = Mat::<c64>::zeros(n, 1);
            x[(jmax, 0)] = c64::new(1.0, 0.0);
        }
        let alt = Mat::<c64>::from_fn(n, 1, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            c64::new(sign * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
        });
        let alt_est = 2.0 * norm1(&self.solve_scaled(&alt)) / (3.0 * n as f64);
        est.max(alt_est) * self.scaled_norm1
    }
}

/// Real polynomial in monomial form, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Lagrange interpolant through `(xs[j], ys[j])`.
    pub fn lagrange(xs: &[f64], ys: &[f64]) -> Poly {
        let mut total = Poly(vec![0.0]);
        for (j, (&xj, &yj)) in xs.iter().zip(ys).enumerate() {
            let mut basis = Poly::constant(yj);
            for (k, &xk) in xs.iter().enumerate() {
                if k != j {
                    basis = basis.mul(&Poly(vec![-xk, 1.0])).scale(1.0 / (xj - xk));
                }
            }
            total = total.add(&basis);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_estimate_of_diagonal() {
        let n = 6;
        let a = Mat::<c64>::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(10f64.powi(i as i32), 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        // Row equilibration makes a diagonal matrix perfectly conditioned.
        let lu = EquilibratedLu::new(&a);
        assert!((lu.condition_estimate() - 1.0).abs() < 1e-12);
        let x = lu.solve(&[c64::new(1.0, 0.0); 6]);
        assert!((x[3] - c64::new(1e-3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn condition_estimate_of_bidiagonal() {
        // Exact inverse 1-norm of [[1, -k], [0, 1]] after equilibration.
        let k = 1e6;
        let a = Mat::<c64>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c64::new(1.0, 0.0),
            (0, 1) => c64::new(-k, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let lu = EquilibratedLu::new(&a);
        let s = 1.0 / (1.0 + k);
        let exact = (k * s + 1.0) * (1.0 + k);
        assert!((lu.condition_estimate() / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lagrange_interpolates() {
        let xs = [-0.5, 0.1, 0.7];
        let ys = [1.0, -2.0, 0.25];
        let p = Poly::lagrange(&xs, &ys);
        for (x, y) in xs.iter().zip(ys) {
            assert!((p.eval(*x) - y).abs() < 1e-14);
        }
        let d = Poly(vec![1.0, 2.0, 3.0]).derivative();
        assert_eq!(d, Poly(vec![2.0, 6.0]));
    }
}
