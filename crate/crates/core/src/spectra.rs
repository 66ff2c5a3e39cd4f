//! Discrete spectrum of the linearized operator, a Sturm–Liouville
//! sub-solver, embedding-eigenvalue candidate residuals, semicircle
//! screening and removal of the discrete-mode projection from data.

use std::sync::Arc;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldops::{chebyshev_grid, ComplexField, Grid, HelmholtzSolver};
use crate::profiles::{pedlosky_semicircle, ShearProfile};

/// Eigenvalues must reappear within this distance at double resolution.
pub const REFINEMENT_TOL: f64 = 1e-6;
/// Modes this far off the real axis are never treated as spurious.
pub const IMAG_TOL: f64 = 1e-6;
const GRAM_GUARD: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    /// Stream functions `phi`, `||phi||_0 = 1`, zero at the walls.
    pub right_modes: Vec<ComplexField>,
    /// Dual vectors with `sum_i l_i phi_i = 1` over interior nodes; the
    /// coefficient of a stream function `psi` along a mode is `sum_i l_i psi_i`.
    pub left_modes: Vec<ComplexField>,
    pub accepted: Vec<bool>,
    pub refinement_gap: Vec<f64>,
}

impl SpectrumResult {
    pub fn accepted_eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .zip(&self.accepted)
            .filter(|(_, a)| **a)
            .map(|(c, _)| *c)
            .collect()
    }
}

/// Interior generator `M = diag(u) + diag(u'' - beta) G` acting on vorticity,
/// with `G` the Dirichlet Helmholtz inverse.
fn generator_matrix(profile: &ShearProfile, beta: f64, solver: &HelmholtzSolver) -> Mat<f64> {
    let grid = &solver.grid;
    let m = grid.n - 1;
    Mat::<f64>::from_fn(m, m, |i, j| {
        let y = grid.nodes[i + 1];
        let mut v = (profile.eval(y, 2) - beta) * solver.green[(i, j)];
        if i == j {
            v += profile.eval(y, 0);
        }
        v
    })
}

fn real_eigenvalues(m: &Mat<f64>) -> Result<(Vec<Complex64>, Mat<c64>)> {
    let e = m
        .eigen()
        .map_err(|err| Error::Eigensolver(format!("{err:?}")))?;
    let s = e.S();
    let vals = (0..m.nrows()).map(|k| s[k]).collect();
    Ok((vals, e.U().to_owned()))
}

fn distance_to_range(c: Complex64, lo: f64, hi: f64) -> f64 {
    let dx = if c.re < lo {
        lo - c.re
    } else if c.re > hi {
        c.re - hi
    } else {
        0.0
    };
    dx.hypot(c.im)
}

/// Eigenvalues `c` of `R psi = c psi` by the interior vorticity generator,
/// with a spurious-mode filter based on distance to `Ran u` and stability
/// under doubling of the grid.
pub fn discrete_spectrum(
    profile: &ShearProfile,
    alpha: f64,
    beta: f64,
    grid: &Arc<Grid>,
) -> Result<SpectrumResult> {
    let solver = HelmholtzSolver::new(grid.clone(), alpha)?;
    let m = generator_matrix(profile, beta, &solver);
    let (vals, vecs) = real_eigenvalues(&m)?;
    let fine_grid = chebyshev_grid(2 * grid.n, grid.y1, grid.y2)?;
    let fine_solver = HelmholtzSolver::new(fine_grid, alpha)?;
    let (fine_vals, _) = real_eigenvalues(&generator_matrix(profile, beta, &fine_solver))?;

    let (lo, hi) = profile.range();
    let delta_spur = 5.0 * grid.length() * profile.max_abs_derivative(1) / grid.n as f64;
    let n_int = grid.n - 1;
    let mut result = SpectrumResult {
        eigenvalues: Vec::new(),
        right_modes: Vec::new(),
        left_modes: Vec::new(),
        accepted: Vec::new(),
        refinement_gap: Vec::new(),
    };
    let lhs = Mat::<f64>::from_fn(n_int, n_int, |i, j| {
        let mut v = -grid.d2[(i + 1, j + 1)];
        if i == j {
            v += alpha * alpha;
        }
        v
    });
    let mt = m.transpose().to_owned();
    for (k, &c) in vals.iter().enumerate() {
        let gap = fine_vals
            .iter()
            .map(|f| (f - c).norm())
            .fold(f64::INFINITY, f64::min);
        let off_range = distance_to_range(c, lo, hi) > delta_spur || c.im.abs() > IMAG_TOL;
        let accepted = off_range && gap < REFINEMENT_TOL;
        // Right mode in stream-function form.
        let v: Vec<Complex64> = (0..n_int).map(|i| vecs[(i, k)]).collect();
        let psi_int = solver.solve_interior(&v);
        let mut phi = ComplexField::new(grid.clone(), with_walls(&psi_int))?;
        let norm = phi.l2_norm();
        if norm > 0.0 {
            phi = phi.scale(Complex64::new(1.0 / norm, 0.0));
        }
        let left = if accepted {
            left_mode(&mt, c, &lhs, &phi, grid)?
        } else {
            ComplexField::zeros(grid.clone())
        };
        result.eigenvalues.push(c);
        result.right_modes.push(phi);
        result.left_modes.push(left);
        result.accepted.push(accepted);
        result.refinement_gap.push(gap);
    }
    Ok(result)
}

fn with_walls(inner: &[Complex64]) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(inner.len() + 2);
    v.push(Complex64::new(0.0, 0.0));
    v.extend_from_slice(inner);
    v.push(Complex64::new(0.0, 0.0));
    v
}

/// Left eigenvector by inverse iteration on `M^T - c`, mapped to the
/// stream-function dual `l = A^T m` with `A = -D2 + alpha^2`, normalized
/// against the right mode.
fn left_mode(
    mt: &Mat<f64>,
    c: Complex64,
    lhs: &Mat<f64>,
    phi: &ComplexField,
    grid: &Arc<Grid>,
) -> Result<ComplexField> {
    let n = mt.nrows();
    let shift = c + Complex64::new(1e-12, 1e-12) * (1.0 + c.norm());
    let shifted = Mat::<c64>::from_fn(n, n, |i, j| {
        let mut v = c64::new(mt[(i, j)], 0.0);
        if i == j {
            v -= shift;
        }
        v
    });
    let lu = shifted.partial_piv_lu();
    let mut x = Mat::<c64>::from_fn(n, 1, |i, _| c64::new(1.0 + 0.1 * i as f64, 0.3));
    for _ in 0..3 {
        x = lu.solve(&x);
        let s = (0..n).map(|i| x[(i, 0)].norm()).fold(0.0, f64::max);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::DefectiveModes(f64::INFINITY));
        }
        for i in 0..n {
            x[(i, 0)] /= s;
        }
    }
    let l: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|j| lhs[(j, i)] * x[(j, 0)]).sum())
        .collect();
    let pairing: Complex64 = l.iter().zip(&phi.values[1..=n]).map(|(a, b)| a * b).sum();
    if pairing.norm() == 0.0 {
        return Err(Error::DefectiveModes(f64::INFINITY));
    }
    let l: Vec<Complex64> = l.iter().map(|v| v / pairing).collect();
    ComplexField::new(grid.clone(), with_walls(&l))
}

/// Accepted eigenvalues with `Im c > threshold`.
pub fn unstable_modes(spec: &SpectrumResult, threshold: f64) -> Vec<Complex64> {
    spec.accepted_eigenvalues()
        .into_iter()
        .filter(|c| c.im > threshold)
        .collect()
}

/// Every accepted unstable eigenvalue lies in the Pedlosky disk (+1e-6).
pub fn semicircle_check(spec: &SpectrumResult, profile: &ShearProfile, alpha: f64, beta: f64) -> bool {
    let Ok((centre, radius)) = pedlosky_semicircle(profile, alpha, beta) else {
        return false;
    };
    unstable_modes(spec, 0.0)
        .iter()
        .all(|c| (c - Complex64::new(centre, 0.0)).norm() <= radius + 1e-6)
}

/// `-phi'' + q phi = lambda phi` on `(y1, y2)`, `phi` vanishing at both ends.
///
/// `endpoint_exponents = (s1, s2)` selects the principal behaviour
/// `phi ~ (y - y1)^s1`, `phi ~ (y2 - y)^s2` at ends where `q ~ s (s - 1) / d^2`;
/// zero marks a regular end. The solver works with `g = phi / ((y - y1)^s1
/// (y2 - y)^s2)`, which is smooth up to singular ends of this pure
/// inverse-square type and satisfies `g' = 0` there.
#[derive(Clone)]
pub struct SlProblem {
    pub potential: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub y1: f64,
    pub y2: f64,
    pub count: usize,
    pub endpoint_exponents: (f64, f64),
}

impl SlProblem {
    pub fn regular(potential: impl Fn(f64) -> f64 + Send + Sync + 'static, y1: f64, y2: f64, count: usize) -> Self {
        SlProblem {
            potential: Arc::new(potential),
            y1,
            y2,
            count,
            endpoint_exponents: (0.0, 0.0),
        }
    }
}

impl std::fmt::Debug for SlProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SlProblem")
            .field("y1", &self.y1)
            .field("y2", &self.y2)
            .field("count", &self.count)
            .field("endpoint_exponents", &self.endpoint_exponents)
            .finish()
    }
}

/// Reduced interior matrix for `g` and the map from interior values of `g`
/// to its wall values.
fn sl_matrix(problem: &SlProblem, grid: &Grid) -> (Mat<f64>, Mat<f64>) {
    let n = grid.n;
    let (s1, s2) = problem.endpoint_exponents;
    let (y1, y2) = (grid.y1, grid.y2);
    let full = Mat::<f64>::from_fn(n - 1, n + 1, |i, j| {
        let y = grid.nodes[i + 1];
        let (d1, d2) = (y - y1, y2 - y);
        let hp = s1 / d1 - s2 / d2;
        let curv = s1 * (s1 - 1.0) / (d1 * d1) + s2 * (s2 - 1.0) / (d2 * d2) - 2.0 * s1 * s2 / (d1 * d2);
        let mut v = -grid.d2[(i + 1, j)] - 2.0 * hp * grid.d[(i + 1, j)];
        if j == i + 1 {
            v += (problem.potential)(y) - curv;
        }
        v
    });
    // Wall values: zero at regular ends, g' = 0 at singular ends.
    let mut wall = Mat::<f64>::zeros(2, n - 1);
    let singular = [s1 > 0.0, s2 > 0.0];
    let rows = [0usize, n];
    let mut bb = [[0.0; 2]; 2];
    let mut rhs = [vec![0.0; n - 1], vec![0.0; n - 1]];
    for (r, &row) in rows.iter().enumerate() {
        if singular[r] {
            bb[r] = [grid.d[(row, 0)], grid.d[(row, n)]];
            for j in 0..n - 1 {
                rhs[r][j] = -grid.d[(row, j + 1)];
            }
        } else {
            bb[r] = if r == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        }
    }
    let det = bb[0][0] * bb[1][1] - bb[0][1] * bb[1][0];
    for j in 0..n - 1 {
        wall[(0, j)] = (rhs[0][j] * bb[1][1] - bb[0][1] * rhs[1][j]) / det;
        wall[(1, j)] = (bb[0][0] * rhs[1][j] - rhs[0][j] * bb[1][0]) / det;
    }
    let reduced = Mat::<f64>::from_fn(n - 1, n - 1, |i, j| {
        full[(i, j + 1)] + full[(i, 0)] * wall[(0, j)] + full[(i, n)] * wall[(1, j)]
    });
    (reduced, wall)
}

fn sl_eigenvalues(problem: &SlProblem, n: usize) -> Result<Vec<Complex64>> {
    let grid = chebyshev_grid(n, problem.y1, problem.y2)?;
    let (a, _) = sl_matrix(problem, &grid);
    let (mut vals, _) = real_eigenvalues(&a)?;
    vals.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
    Ok(vals)
}

/// Lowest `count` eigenvalues, ascending. The collocated operator is not
/// symmetric; eigenvalues are accepted when real and reproduced on a grid
/// of half the size.
pub fn sl_spectrum(problem: &SlProblem, grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.n;
    let fine = sl_eigenvalues(problem, n)?;
    let coarse = sl_eigenvalues(problem, (n / 2).max(4))?;
    let mut out = Vec::with_capacity(problem.count);
    for (k, lam) in fine.iter().enumerate().take(problem.count) {
        let scale = lam.norm().max(1.0);
        let real = lam.im.abs() <= 1e-6 * scale;
        let stable = coarse.get(k).is_some_and(|c| (c - lam).norm() <= 1e-3 * scale);
        if !(real && stable) {
            return Err(Error::Unresolved {
                requested: problem.count,
                resolved: k,
            });
        }
        out.push(lam.re);
    }
    if out.len() < problem.count {
        return Err(Error::Unresolved {
            requested: problem.count,
            resolved: out.len(),
        });
    }
    Ok(out)
}

/// Eigenfunction `phi` of the `k`-th (0-based) eigenvalue, real-valued.
pub fn sl_eigenfunction(problem: &SlProblem, grid: &Arc<Grid>, k: usize) -> Result<ComplexField> {
    let n = grid.n;
    let (a, wall) = sl_matrix(problem, grid);
    let (vals, vecs) = real_eigenvalues(&a)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|x, y| vals[*x].re.partial_cmp(&vals[*y].re).unwrap());
    let idx = *order.get(k).ok_or(Error::Unresolved {
        requested: k + 1,
        resolved: vals.len(),
    })?;
    let g: Vec<Complex64> = (0..n - 1).map(|i| vecs[(i, idx)]).collect();
    let pivot = g.iter().cloned().fold(Complex64::new(0.0, 0.0), |acc, x| {
        if x.norm() > acc.norm() {
            x
        } else {
            acc
        }
    });
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let (s1, s2) = problem.endpoint_exponents;
    let mut values = Vec::with_capacity(n + 1);
    for (i, &y) in grid.nodes.iter().enumerate() {
        let gi = if i == 0 || i == n {
            let r = if i == 0 { 0 } else { 1 };
            (0..n - 1).map(|j| wall[(r, j)] * g[j]).sum::<Complex64>()
        } else {
            g[i - 1]
        };
        let factor = (y - grid.y1).max(0.0).powf(s1) * (grid.y2 - y).max(0.0).powf(s2);
        values.push(Complex64::new((gi * phase).re * factor, 0.0));
    }
    ComplexField::new(grid.clone(), values)
}

/// Number of sign changes of the real part over interior nodes, ignoring
/// values below `tol` relative to the sup norm.
pub fn sign_changes(f: &ComplexField, tol: f64) -> usize {
    let sup = f.sup_norm();
    let mut last = 0.0;
    let mut count = 0;
    for v in &f.values {
        if v.re.abs() <= tol * sup {
            continue;
        }
        if last != 0.0 && v.re.signum() != last {
            count += 1;
        }
        last = v.re.signum();
    }
    count
}

/// `sup |(u - c)(phi'' - alpha^2 phi) - (u'' - beta) phi| / ||phi||_inf`
/// over grid nodes strictly inside `validity`, with spectral derivatives.
pub fn embedding_candidate_residual(
    profile: &ShearProfile,
    alpha: f64,
    beta: f64,
    c: f64,
    phi: &ComplexField,
    validity: (f64, f64),
) -> Result<f64> {
    let d2 = phi.second_derivative();
    let inside: Vec<usize> = (0..phi.len())
        .filter(|&i| {
            let y = phi.grid.nodes[i];
            y > validity.0 && y < validity.1
        })
        .collect();
    let sup = inside.iter().map(|&i| phi.values[i].norm()).fold(0.0, f64::max);
    if sup == 0.0 {
        return Err(Error::ZeroField);
    }
    let a2 = alpha * alpha;
    let worst = inside
        .iter()
        .map(|&i| {
            let y = phi.grid.nodes[i];
            let v = phi.values[i];
            ((profile.eval(y, 0) - c) * (d2.values[i] - v * a2) - (profile.eval(y, 2) - beta) * v).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst / sup)
}

/// Same residual with exact `(phi, phi'')` supplied by the caller, sampled
/// at `samples` interior points of `validity`.
pub fn embedding_candidate_residual_exact(
    profile: &ShearProfile,
    alpha: f64,
    beta: f64,
    c: f64,
    phi: impl Fn(f64) -> (f64, f64),
    validity: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let (a, b) = validity;
    let ys: Vec<f64> = (1..=samples)
        .map(|k| a + (b - a) * k as f64 / (samples + 1) as f64)
        .collect();
    let sup = ys.iter().map(|&y| phi(y).0.abs()).fold(0.0, f64::max);
    if sup == 0.0 {
        return Err(Error::ZeroField);
    }
    let a2 = alpha * alpha;
    let worst = ys
        .iter()
        .map(|&y| {
            let (v, d2) = phi(y);
            ((profile.eval(y, 0) - c) * (d2 - a2 * v) - (profile.eval(y, 2) - beta) * v).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst / sup)
}

/// Removes the biorthogonal projection of `psi_0 = G omega_0` onto the
/// accepted modes and returns the vorticity of the remainder.
pub fn remove_discrete_projection(
    omega0: &ComplexField,
    spec: &SpectrumResult,
    alpha: f64,
) -> Result<ComplexField> {
    let idx: Vec<usize> = (0..spec.eigenvalues.len()).filter(|&k| spec.accepted[k]).collect();
    if idx.is_empty() {
        return Ok(omega0.clone());
    }
    let grid = omega0.grid.clone();
    let n = grid.n;
    let solver = HelmholtzSolver::new(grid.clone(), alpha)?;
    let psi0 = solver.solve(omega0)?;
    let k = idx.len();
    let pair = |l: &ComplexField, f: &ComplexField| -> Complex64 {
        (1..n).map(|i| l.values[i] * f.values[i]).sum()
    };
    let gram = Mat::<c64>::from_fn(k, k, |a, b| pair(&spec.left_modes[idx[a]], &spec.right_modes[idx[b]]));
    let cond = gram_condition(&gram);
    if !(cond <= GRAM_GUARD) {
        return Err(Error::DefectiveModes(cond));
    }
    let rhs = Mat::<c64>::from_fn(k, 1, |a, _| pair(&spec.left_modes[idx[a]], &psi0));
    let coef = gram.partial_piv_lu().solve(&rhs);
    let mut psi = psi0;
    for (a, &m) in idx.iter().enumerate() {
        psi = psi.axpy(-coef[(a, 0)], &spec.right_modes[m])?;
    }
    // Modes carry no wall vorticity, so the wall values of omega0 stay.
    let lap = psi.second_derivative();
    let mut values = omega0.values.clone();
    for i in 1..n {
        values[i] = -(lap.values[i] - psi.values[i] * (alpha * alpha));
    }
    ComplexField::new(grid, values)
}

fn gram_condition(g: &Mat<c64>) -> f64 {
    let k = g.nrows();
    let inv = g.partial_piv_lu().inverse();
    let norm1 = |m: &Mat<c64>| {
        (0..k)
            .map(|j| (0..k).map(|i| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let c = norm1(g) * norm1(&inv);
    if c.is_finite() {
        c
    } else {
        f64::INFINITY
    }
}

/// Coefficients of a stream function along the accepted modes.
pub fn projection_coefficients(psi: &ComplexField, spec: &SpectrumResult) -> Vec<Complex64> {
    let n = psi.grid.n;
    (0..spec.eigenvalues.len())
        .filter(|&k| spec.accepted[k])
        .map(|k| (1..n).map(|i| spec.left_modes[k].values[i] * psi.values[i]).sum())
        .collect()
}
