//! Chebyshev–Gauss–Lobatto collocation on `[y1, y2]`: differentiation,
//! Clenshaw–Curtis quadrature, the Dirichlet Helmholtz inverse
//! `psi = -(d_yy - alpha^2)^{-1} omega`, boundary harmonics and the norm
//! scale `||.||_{-2} .. ||.||_2`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Collocation grid with `n + 1` nodes, increasing from `y1` to `y2`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n: usize,
    pub y1: f64,
    pub y2: f64,
    pub nodes: Vec<f64>,
    /// First-derivative matrix, `(n+1) x (n+1)`.
    pub d: Mat<f64>,
    /// Second-derivative matrix `d * d`.
    pub d2: Mat<f64>,
    pub weights: Vec<f64>,
}

/// Builds the grid; shared by reference between every field defined on it.
pub fn chebyshev_grid(n: usize, y1: f64, y2: f64) -> Result<Arc<Grid>> {
    if !(y1 < y2) || !y1.is_finite() || !y2.is_finite() {
        return Err(Error::DegenerateDomain(y1, y2));
    }
    if n < 2 {
        return Err(Error::Precondition(format!("grid needs n >= 2, got {n}")));
    }
    let len = y2 - y1;
    let nf = n as f64;
    // Symmetric form of -cos(j pi / n), exact at the centre.
    let t: Vec<f64> = (0..=n)
        .map(|j| (PI * (2.0 * j as f64 - nf) / (2.0 * nf)).sin())
        .collect();
    let mut nodes: Vec<f64> = t.iter().map(|&tj| y1 + 0.5 * (tj + 1.0) * len).collect();
    nodes[0] = y1;
    nodes[n] = y2;

    let scale = 2.0 / len;
    let cw = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = Mat::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i == j {
                continue;
            }
            // t_i - t_j via a product of sines avoids cancellation.
            let diff = 2.0
                * ((i + j) as f64 * PI / (2.0 * nf)).sin()
                * ((i as f64 - j as f64) * PI / (2.0 * nf)).sin();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let v = cw(i) / cw(j) * sign / diff * scale;
            d[(i, j)] = v;
            row_sum += v;
        }
        d[(i, i)] = -row_sum;
    }
    let d2 = &d * &d;
    let weights = clenshaw_curtis(n).into_iter().map(|w| w * 0.5 * len).collect();
    Ok(Arc::new(Grid {
        n,
        y1,
        y2,
        nodes,
        d,
        d2,
        weights,
    }))
}

fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let mut v = vec![1.0; n + 1];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for (j, vj) in v.iter_mut().enumerate().take(n).skip(1) {
            let theta = j as f64 * PI / nf;
            for k in 1..n / 2 {
                let kf = k as f64;
                *vj -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            *vj -= (nf * theta).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for (j, vj) in v.iter_mut().enumerate().take(n).skip(1) {
            let theta = j as f64 * PI / nf;
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                *vj -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for j in 1..n {
        w[j] = 2.0 * v[j] / nf;
    }
    w
}

impl Grid {
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.y2 - self.y1
    }

    fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.y1 == other.y1 && self.y2 == other.y2
    }

    /// Integral of real nodal values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Applies the first-derivative matrix to real nodal values.
    pub fn diff_real(&self, f: &[f64]) -> Vec<f64> {
        apply_real(&self.d, f)
    }

    /// Maps a node coordinate to the reference interval `[-1, 1]`.
    pub fn to_reference(&self, y: Complex64) -> Complex64 {
        (y - self.y1) * (2.0 / self.length()) - 1.0
    }

    /// Chebyshev coefficients `a_k` with `f(y) = sum a_k T_k(t(y))`.
    pub fn chebyshev_coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let nf = n as f64;
        // Standard nodes x_j = cos(j pi / n) sit at index n - j here.
        (0..=n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=n {
                    let half = if j == 0 || j == n { 0.5 } else { 1.0 };
                    let c = ((k * j % (2 * n)) as f64 * PI / nf).cos();
                    acc += f[n - j] * (half * c);
                }
                let ck = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
                acc * ck
            })
            .collect()
    }

    /// Barycentric interpolation of nodal values at a real point.
    pub fn interpolate(&self, f: &[Complex64], y: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, (&yj, &fj)) in self.nodes.iter().zip(f).enumerate() {
            let diff = y - yj;
            if diff == 0.0 {
                return fj;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == self.n {
                w *= 0.5;
            }
            num += fj * (w / diff);
            den += w / diff;
        }
        num / den
    }
}

/// Evaluates a Chebyshev series at a complex reference coordinate.
pub fn clenshaw(coeffs: &[Complex64], t: Complex64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().skip(1).rev() {
        let b0 = a + t * b1 * 2.0 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - b2
}

pub(crate) fn apply_real(m: &Mat<f64>, f: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * f[j]).sum())
        .collect()
}

pub(crate) fn apply_complex(m: &Mat<f64>, f: &[Complex64]) -> Vec<Complex64> {
    let n = m.ncols();
    let mut rhs = Mat::<f64>::zeros(n, 2);
    for (j, v) in f.iter().enumerate() {
        rhs[(j, 0)] = v.re;
        rhs[(j, 1)] = v.im;
    }
    let out = m * &rhs;
    (0..m.nrows())
        .map(|i| Complex64::new(out[(i, 0)], out[(i, 1)]))
        .collect()
}

/// Complex nodal values on a grid.
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        ComplexField { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&y| f(y)).collect();
        ComplexField { grid, values }
    }

    pub fn from_real_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |y| Complex64::new(f(y), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn derivative(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: apply_complex(&self.grid.d, &self.values),
        }
    }

    pub fn second_derivative(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: apply_complex(&self.grid.d2, &self.values),
        }
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> ComplexField {
        let values = self
            .grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&y, &v)| f(y, v))
            .collect();
        ComplexField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale(&self, s: Complex64) -> ComplexField {
        self.map(|_, v| v * s)
    }

    pub fn axpy(&self, a: Complex64, other: &ComplexField) -> Result<ComplexField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(ComplexField {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn conj(&self) -> ComplexField {
        self.map(|_, v| v.conj())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &ComplexField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `||f||_{L^2}` by quadrature.
    pub fn l2_norm(&self) -> f64 {
        self.grid
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// Value at an arbitrary point of the domain.
    pub fn interpolate(&self, y: f64) -> Complex64 {
        self.grid.interpolate(&self.values, y)
    }

    /// CSV with header `y,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,re,im\n");
        for (y, v) in self.grid.nodes.iter().zip(&self.values) {
            let _ = writeln!(s, "{y:e},{:e},{:e}", v.re, v.im);
        }
        s
    }

    /// Reads `y,re,im` rows; the `y` column must match the grid nodes.
    pub fn from_csv(grid: Arc<Grid>, text: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.starts_with('y')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Precondition(format!("malformed CSV row {}", k + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Precondition(format!("bad number `{s}` in row {}", k + 1)))
            };
            let (y, re, im) = (parse(cols[0])?, parse(cols[1])?, parse(cols[2])?);
            let idx = values.len();
            if idx >= grid.len() || (grid.nodes[idx] - y).abs() > 1e-12 * (1.0 + y.abs()) {
                return Err(Error::GridMismatch);
            }
            values.push(Complex64::new(re, im));
        }
        ComplexField::new(grid, values)
    }
}

/// `<f, g> = int f conj(g)`.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    f.check_same_grid(g)?;
    Ok(f
        .grid
        .weights
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(w, (a, b))| a * b.conj() * *w)
        .sum())
}

/// Dirichlet inverse of `-(D^2 - alpha^2)` restricted to interior nodes,
/// factored once per `(grid, alpha)`.
#[derive(Debug, Clone)]
pub struct HelmholtzSolver {
    pub grid: Arc<Grid>,
    pub alpha: f64,
    /// `(-D2_int + alpha^2 I)^{-1}`, `(n-1) x (n-1)`.
    pub green: Mat<f64>,
}

impl HelmholtzSolver {
    pub fn new(grid: Arc<Grid>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveWavenumber(alpha));
        }
        let m = grid.n - 1;
        let mut a = Mat::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] = -grid.d2[(i + 1, j + 1)];
            }
            a[(i, i)] += alpha * alpha;
        }
        let green = a.partial_piv_lu().inverse();
        if green.as_ref().norm_max().is_nan() || !green.as_ref().norm_max().is_finite() {
            return Err(Error::Singular("Helmholtz operator".into()));
        }
        Ok(HelmholtzSolver { grid, alpha, green })
    }

    /// Interior values of `psi` from interior values of `omega`.
    pub fn solve_interior(&self, omega_int: &[Complex64]) -> Vec<Complex64> {
        apply_complex(&self.green, omega_int)
    }

    pub fn solve(&self, omega: &ComplexField) -> Result<ComplexField> {
        if !self.grid.same_as(&omega.grid) {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.n;
        let inner = self.solve_interior(&omega.values[1..n]);
        let mut values = Vec::with_capacity(n + 1);
        values.push(Complex64::new(0.0, 0.0));
        values.extend(inner);
        values.push(Complex64::new(0.0, 0.0));
        Ok(ComplexField {
            grid: omega.grid.clone(),
            values,
        })
    }

    /// `||omega||_k` for `k` in `-2..=2`.
    pub fn sobolev_norm(&self, omega: &ComplexField, k: i32) -> Result<f64> {
        let a2 = self.alpha * self.alpha;
        match k {
            -2 => Ok(self.solve(omega)?.l2_norm()),
            -1 => {
                let psi = self.solve(omega)?;
                Ok(inner_product(&psi, omega)?.re.max(0.0).sqrt())
            }
            0 => Ok(omega.l2_norm()),
            1 => {
                let d1 = omega.derivative().l2_norm();
                Ok((d1 * d1 + a2 * omega.l2_norm().powi(2)).sqrt())
            }
            2 => {
                let d1 = omega.derivative();
                let d2 = d1.derivative().l2_norm();
                let d1 = d1.l2_norm();
                let d0 = omega.l2_norm();
                Ok((d2 * d2 + 2.0 * a2 * d1 * d1 + a2 * a2 * d0 * d0).sqrt())
            }
            other => Err(Error::SobolevOrder(other)),
        }
    }
}

pub fn helmholtz_solve(omega: &ComplexField, alpha: f64) -> Result<ComplexField> {
    HelmholtzSolver::new(omega.grid.clone(), alpha)?.solve(omega)
}

pub fn sobolev_norm(omega: &ComplexField, k: i32, alpha: f64) -> Result<f64> {
    if !(-2..=2).contains(&k) {
        return Err(Error::SobolevOrder(k));
    }
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveWavenumber(alpha));
    }
    if k >= 0 {
        // No solve needed; avoid factoring the operator.
        let solver = HelmholtzSolver {
            grid: omega.grid.clone(),
            alpha,
            green: Mat::zeros(0, 0),
        };
        return solver.sobolev_norm(omega, k);
    }
    HelmholtzSolver::new(omega.grid.clone(), alpha)?.sobolev_norm(omega, k)
}

/// `sinh(a) / sinh(b)` for `0 <= a <= b`, safe for large arguments.
fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1())
}

/// `(gamma_0, gamma_1)`: `(d_yy - alpha^2) gamma_j = 0`, `gamma_0(y1) = 1`,
/// `gamma_0(y2) = 0`, and symmetrically for `gamma_1`.
pub fn boundary_harmonics(grid: &Arc<Grid>, alpha: f64) -> Result<(ComplexField, ComplexField)> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveWavenumber(alpha));
    }
    let (y1, y2) = (grid.y1, grid.y2);
    let b = alpha * (y2 - y1);
    let g0 = ComplexField::from_real_fn(grid.clone(), |y| sinh_ratio(alpha * (y2 - y), b));
    let g1 = ComplexField::from_real_fn(grid.clone(), |y| sinh_ratio(alpha * (y - y1), b));
    Ok((g0, g1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(grid: &Arc<Grid>, k: f64) -> ComplexField {
        let (y1, l) = (grid.y1, grid.length());
        ComplexField::from_real_fn(grid.clone(), |y| (k * PI * (y - y1) / l).sin())
    }

    #[test]
    fn grid_basics() {
        for n in [2, 7, 32, 65] {
            let g = chebyshev_grid(n, -0.5, 2.0).unwrap();
            assert_eq!(g.nodes[0], -0.5);
            assert_eq!(g.nodes[n], 2.0);
            assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
            let one = vec![1.0; n + 1];
            assert!((g.integrate(&one) - 2.5).abs() < 1e-13 * 2.5);
            let dy = g.diff_real(&g.nodes);
            assert!(dy.iter().all(|v| (v - 1.0).abs() < 1e-10), "{n}");
        }
        assert!(chebyshev_grid(16, 1.0, 1.0).is_err());
    }

    #[test]
    fn quadrature_and_derivative_accuracy() {
        let g = chebyshev_grid(40, 0.0, 2.0).unwrap();
        let f: Vec<f64> = g.nodes.iter().map(|y| y.exp()).collect();
        assert!((g.integrate(&f) - (2f64.exp() - 1.0)).abs() < 1e-13);
        let df = g.diff_real(&f);
        let err = df.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn helmholtz_sine_eigenfunctions() {
        for (y1, y2, alpha) in [(0.0, 1.0, 1.0), (-1.0, 1.0, 2.0)] {
            let g = chebyshev_grid(64, y1, y2).unwrap();
            let w = ComplexField::from_real_fn(g.clone(), |y| (PI * y).sin());
            let psi = helmholtz_solve(&w, alpha).unwrap();
            // On [-1, 1] sin(pi y) is the k = 2 mode of the length-2 interval.
            let exact = w.scale(Complex64::new(1.0 / (PI * PI + alpha * alpha), 0.0));
            assert!(psi.sup_distance(&exact).unwrap() < 1e-10);
        }
        let g = chebyshev_grid(16, 0.0, 1.0).unwrap();
        let psi = helmholtz_solve(&ComplexField::zeros(g), 1.0).unwrap();
        assert_eq!(psi.sup_norm(), 0.0);
    }

    #[test]
    fn helmholtz_spectral_convergence() {
        let err = |n| {
            let g = chebyshev_grid(n, 0.0, 1.0).unwrap();
            // psi = sin(pi y) e^y is an exact solution for this forcing.
            let alpha = 1.3;
            let w = ComplexField::from_real_fn(g.clone(), |y| {
                let (s, c, e) = ((PI * y).sin(), (PI * y).cos(), y.exp());
                -(e * ((1.0 - PI * PI) * s + 2.0 * PI * c) - alpha * alpha * s * e)
            });
            let psi = helmholtz_solve(&w, alpha).unwrap();
            let exact = ComplexField::from_real_fn(g, |y| (PI * y).sin() * y.exp());
            psi.sup_distance(&exact).unwrap()
        };
        let (e8, e16, e32) = (err(8), err(16), err(32));
        assert!(e8 > 1e3 * e16, "{e8} {e16}");
        assert!(e32 < 1e-12, "{e32}");
    }

    #[test]
    fn negative_norm_identity() {
        let g = chebyshev_grid(64, 0.0, 1.0).unwrap();
        for k in 1..=4 {
            let kf = k as f64;
            let w = sine(&g, kf);
            let n = sobolev_norm(&w, -1, 1.5).unwrap();
            let want = 0.5 / ((kf * PI).powi(2) + 2.25);
            assert!((n * n - want).abs() < 1e-10);
            let n2 = sobolev_norm(&w, -2, 1.5).unwrap();
            assert!((n2 - 0.5f64.sqrt() / ((kf * PI).powi(2) + 2.25)).abs() < 1e-10);
        }
        assert!(sobolev_norm(&sine(&g, 1.0), 3, 1.0).is_err());
        for k in -2..=2 {
            assert_eq!(sobolev_norm(&ComplexField::zeros(g.clone()), k, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn inner_products_and_boundary_pairing() {
        let g = chebyshev_grid(48, 0.0, 1.0).unwrap();
        let s1 = sine(&g, 1.0);
        let s2 = sine(&g, 2.0);
        assert!((inner_product(&s1, &s1).unwrap() - 0.5).norm() < 1e-12);
        assert!(inner_product(&s1, &s2).unwrap().norm() < 1e-12);

        let alpha = 1.7;
        let w = ComplexField::from_fn(g.clone(), |y| Complex64::new(y.exp(), (3.0 * y).cos()));
        let psi = helmholtz_solve(&w, alpha).unwrap();
        let dpsi = psi.derivative();
        let (g0, g1) = boundary_harmonics(&g, alpha).unwrap();
        assert!((inner_product(&w, &g0).unwrap() - dpsi.values[0]).norm() < 1e-8);
        assert!((inner_product(&w, &g1).unwrap() + dpsi.values[48]).norm() < 1e-8);

        let other = chebyshev_grid(32, 0.0, 1.0).unwrap();
        assert!(inner_product(&s1, &ComplexField::zeros(other)).is_err());
    }

    #[test]
    fn harmonics() {
        let g = chebyshev_grid(32, 0.0, 1.0).unwrap();
        let (g0, g1) = boundary_harmonics(&g, 1.0).unwrap();
        for (y, v) in g.nodes.iter().zip(&g1.values) {
            assert!((v.re - y.sinh() / 1f64.sinh()).abs() < 1e-15);
        }
        assert!((g0.values[0].re - 1.0).abs() < 1e-15 && g0.values[32].re.abs() < 1e-15);
        let slope = g1.derivative().values[32].re;
        assert!((slope - 1.0 / 1f64.tanh()).abs() < 1e-12);
        // Large alpha must not overflow.
        let (h0, _) = boundary_harmonics(&g, 800.0).unwrap();
        assert!(h0.values.iter().all(|v| v.re.is_finite()));
        let lap = g0.second_derivative().axpy(Complex64::new(-1.0, 0.0), &g0).unwrap();
        assert!(lap.sup_norm() < 1e-9);
    }

    #[test]
    fn chebyshev_series_roundtrip() {
        let g = chebyshev_grid(30, -1.0, 3.0).unwrap();
        let f = ComplexField::from_fn(g.clone(), |y| Complex64::new((0.7 * y).sin(), y * y));
        let a = g.chebyshev_coefficients(&f.values);
        for (&y, v) in g.nodes.iter().zip(&f.values) {
            let t = g.to_reference(Complex64::new(y, 0.0));
            assert!((clenshaw(&a, t) - v).norm() < 1e-13);
        }
        let z = Complex64::new(0.4, 0.2);
        let want = (z * 0.7).sin() + z * z * Complex64::new(0.0, 1.0);
        assert!((clenshaw(&a, g.to_reference(z)) - want).norm() < 1e-12);
        assert!((f.interpolate(0.123) - Complex64::new((0.0861f64).sin(), 0.123 * 0.123)).norm() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let g = chebyshev_grid(8, 0.0, 1.0).unwrap();
        let f = ComplexField::from_fn(g.clone(), |y| Complex64::new(y, -y * y));
        let text = f.to_csv();
        assert!(text.starts_with("y,re,im\n"));
        let back = ComplexField::from_csv(g, &text).unwrap();
        assert_eq!(back.values, f.values);
    }
}
