//! The inhomogeneous Rayleigh–Kuo problem
//! `(u - c)(phi'' - alpha^2 phi) - (u'' - beta) phi = omega`,
//! `phi(y1) = phi(y2) = 0`, for complex `c`, its limiting-absorption
//! boundary values on the essential spectrum, resolvent scans and a
//! critical-layer scaling probe.

use std::sync::Arc;

use faer::{c64, Mat};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldops::{clenshaw, ComplexField, Grid};
use crate::linalg::{EquilibratedLu, Poly};
use crate::profiles::{CriticalData, ProfileKind, ShearProfile};

/// Solves whose estimated condition number exceeds this are rejected.
pub const CONDITION_GUARD: f64 = 1e13;
const RANGE_TOL: f64 = 1e-14;
/// Relative size of the contour excursion at each critical level.
const CONTOUR_DEPTH: f64 = 0.3;
/// Real-axis marching stops this close (relative to `L`) to a critical level.
const LEVEL_STOP: f64 = 1e-10;
const MARCH_FACTOR: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct BvpProblem {
    pub profile: ShearProfile,
    pub alpha: f64,
    pub beta: f64,
    pub c: Complex64,
    pub forcing: ComplexField,
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub phi: ComplexField,
    /// Sup of the collocated residual over interior nodes.
    pub residual_sup: f64,
    /// `(phi'(y1), phi'(y2))`.
    pub boundary_derivatives: (Complex64, Complex64),
    /// `alpha (||phi'|| + alpha ||phi||) / (||omega'|| + alpha ||omega||)`.
    pub h1_ratio: f64,
    pub condition_estimate: f64,
}

/// `alpha (||phi'|| + alpha ||phi||) / (||omega'|| + alpha ||omega||)`;
/// zero when both sides vanish.
pub fn h1_ratio(phi: &ComplexField, omega: &ComplexField, alpha: f64) -> f64 {
    let num = alpha * (phi.derivative().l2_norm() + alpha * phi.l2_norm());
    let den = omega.derivative().l2_norm() + alpha * omega.l2_norm();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// `sqrt(||f'||^2 + ||f||^2)`.
pub fn h1_norm(f: &ComplexField) -> f64 {
    f.derivative().l2_norm().hypot(f.l2_norm())
}

struct Collocated {
    values: Vec<Complex64>,
    residual_sup: f64,
    condition: f64,
}

/// Collocates `a (Dzz - alpha^2) - b` on interior rows with Dirichlet rows.
fn solve_collocated(
    dzz: &Mat<c64>,
    a: &[Complex64],
    b: &[Complex64],
    rhs: &[Complex64],
    alpha: f64,
) -> Collocated {
    let n = a.len() - 1;
    let a2 = alpha * alpha;
    let mat = Mat::<c64>::from_fn(n + 1, n + 1, |i, j| {
        if i == 0 || i == n {
            return if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
        }
        let mut v = a[i] * dzz[(i, j)];
        if i == j {
            v -= a[i] * a2 + b[i];
        }
        v
    });
    let mut full_rhs = rhs.to_vec();
    full_rhs[0] = Complex64::new(0.0, 0.0);
    full_rhs[n] = Complex64::new(0.0, 0.0);
    let lu = EquilibratedLu::new(&mat);
    let values = lu.solve(&full_rhs);
    let residual_sup = (1..n)
        .map(|i| {
            let row: Complex64 = (0..=n).map(|j| mat[(i, j)] * values[j]).sum();
            (row - full_rhs[i]).norm()
        })
        .fold(0.0, f64::max);
    Collocated {
        values,
        residual_sup,
        condition: lu.condition_estimate(),
    }
}

fn real_dzz(grid: &Grid) -> Mat<c64> {
    Mat::<c64>::from_fn(grid.len(), grid.len(), |i, j| c64::new(grid.d2[(i, j)], 0.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveWavenumber(alpha))
    }
}

/// Direct dense solve of the collocated boundary-value problem.
pub fn solve_bvp(problem: &BvpProblem, grid: &Arc<Grid>) -> Result<BvpSolution> {
    check_alpha(problem.alpha)?;
    let omega = &problem.forcing;
    if omega.values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let c = problem.c;
    let (lo, hi) = problem.profile.range();
    if c.im == 0.0 && c.re >= lo - RANGE_TOL && c.re <= hi + RANGE_TOL {
        return Err(Error::RealSpectralParameter(c.re));
    }
    let p = &problem.profile;
    let a: Vec<Complex64> = grid.nodes.iter().map(|&y| p.eval(y, 0) - c).collect();
    let b: Vec<Complex64> = grid
        .nodes
        .iter()
        .map(|&y| Complex64::new(p.eval(y, 2) - problem.beta, 0.0))
        .collect();
    let sol = solve_collocated(&real_dzz(grid), &a, &b, &omega.values, problem.alpha);
    if !(sol.condition <= CONDITION_GUARD) {
        return Err(Error::IllConditioned(sol.condition));
    }
    let phi = ComplexField::new(grid.clone(), sol.values)?;
    let dphi = phi.derivative();
    Ok(BvpSolution {
        residual_sup: sol.residual_sup,
        boundary_derivatives: (dphi.values[0], dphi.values[grid.n]),
        h1_ratio: h1_ratio(&phi, omega, problem.alpha),
        condition_estimate: sol.condition,
        phi,
    })
}

/// Approach direction of the spectral parameter: `c + i0` or `c - i0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionConfig {
    pub eps_schedule: Vec<f64>,
    /// 0: plain limit of the schedule; 1: linear Richardson in `eps`.
    pub extrapolation_order: u8,
    pub convergence_tol: f64,
    /// Width of the strip above and below the essential spectrum in which
    /// the schedule lives; recorded, not derived.
    pub strip: f64,
}

impl Default for AbsorptionConfig {
    fn default() -> Self {
        AbsorptionConfig {
            eps_schedule: (0..=10).map(|k| 1e-2 * 0.5f64.powi(k)).collect(),
            extrapolation_order: 1,
            convergence_tol: 1e-7,
            strip: 1e-2,
        }
    }
}

impl AbsorptionConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.eps_schedule;
        if s.len() < 3 {
            return Err(Error::InvalidSchedule("need at least three levels".into()));
        }
        if s.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidSchedule("levels must be positive".into()));
        }
        if s.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidSchedule("levels must strictly decrease".into()));
        }
        if self.extrapolation_order > 1 {
            return Err(Error::InvalidSchedule(format!(
                "extrapolation order {} not supported",
                self.extrapolation_order
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidSchedule("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LimitSolution {
    pub phi: ComplexField,
    /// Sup-norm change between the last two extrapolants (0 off the range).
    pub last_change: f64,
    /// Successive extrapolant changes, one per level after the first usable.
    pub changes: Vec<f64>,
    pub levels_used: usize,
    /// Largest imaginary excursion of the integration contour.
    pub contour_depth: f64,
}

/// Integration path `z(s) = s + i q(s)` through the grid nodes, pushed off
/// the real axis at each critical level to the side the resolvent approaches.
struct Contour {
    z: Vec<Complex64>,
    zp: Vec<Complex64>,
    zpp: Vec<Complex64>,
    /// Points where the path touches the real axis: walls and the zeros of
    /// the excursion between consecutive levels.
    anchors: Vec<f64>,
    depth: f64,
}

impl Contour {
    fn build(profile: &ShearProfile, grid: &Grid, c: f64, roots: &[(f64, f64)], side: Side) -> Result<Self> {
        let (y1, y2) = (grid.y1, grid.y2);
        let half = 0.5 * grid.length();
        let mid = 0.5 * (y1 + y2);
        let to_x = |s: f64| (s - mid) / half;
        let xr: Vec<f64> = roots.iter().map(|(r, _)| to_x(*r)).collect();
        let mut depth: Vec<f64> = roots
            .iter()
            .enumerate()
            .map(|(j, (r, _))| {
                let mut d = (r - y1).min(y2 - r).min(half);
                if j > 0 {
                    d = d.min(r - roots[j - 1].0);
                }
                if j + 1 < roots.len() {
                    d = d.min(roots[j + 1].0 - r);
                }
                CONTOUR_DEPTH * d
            })
            .collect();
        let hidden = complex_level_roots(profile, c);
        for _ in 0..40 {
            let targets: Vec<f64> = roots
                .iter()
                .zip(&depth)
                .zip(&xr)
                .map(|(((_, du), d), x)| -side.sign() * du.signum() * d / (1.0 - x * x))
                .collect();
            let lag = Poly::lagrange(&xr, &targets);
            let q = Poly(vec![1.0, 0.0, -1.0]).mul(&lag);
            let q_at = |s: f64| q.eval(to_x(s));
            let blocked = hidden.iter().any(|zeta| {
                if zeta.re <= y1 || zeta.re >= y2 || zeta.im.abs() < 1e-12 {
                    return false;
                }
                let qs = q_at(zeta.re);
                qs * zeta.im > 0.0 && zeta.im.abs() < 1.5 * qs.abs() + 1e-3
            });
            if blocked {
                depth.iter_mut().for_each(|d| *d *= 0.5);
                continue;
            }
            let dq = q.derivative();
            let ddq = dq.derivative();
            let i = Complex64::new(0.0, 1.0);
            let z = grid.nodes.iter().map(|&s| s + i * q_at(s)).collect();
            let zp = grid
                .nodes
                .iter()
                .map(|&s| 1.0 + i * dq.eval(to_x(s)) / half)
                .collect();
            let zpp = grid
                .nodes
                .iter()
                .map(|&s| i * ddq.eval(to_x(s)) / (half * half))
                .collect();
            let mut anchors = vec![y1];
            for w in xr.windows(2) {
                anchors.push(mid + half * bisect_poly(&lag, w[0], w[1]));
            }
            anchors.push(y2);
            let depth = grid.nodes.iter().map(|&s| q_at(s).abs()).fold(0.0, f64::max);
            return Ok(Contour {
                z,
                zp,
                zpp,
                anchors,
                depth,
            });
        }
        Err(Error::DegenerateCriticalLevel(c))
    }

    fn second_derivative(&self, grid: &Grid) -> Mat<c64> {
        let n = grid.len();
        Mat::<c64>::from_fn(n, n, |i, j| {
            let zp = self.zp[i];
            grid.d2[(i, j)] / (zp * zp) - self.zpp[i] * grid.d[(i, j)] / (zp * zp * zp)
        })
    }
}

fn bisect_poly(p: &Poly, mut a: f64, mut b: f64) -> f64 {
    let mut fa = p.eval(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = p.eval(m);
        if fm == 0.0 || b - a < 1e-15 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Non-real roots of `u(z) = c` for polynomial profiles. The built-in
/// trigonometric profiles take real values in `[0, 1]` only on the axis.
fn complex_level_roots(profile: &ShearProfile, c: f64) -> Vec<Complex64> {
    let ProfileKind::Poly { coeffs } = &profile.kind else {
        return Vec::new();
    };
    let mut co = coeffs.clone();
    co[0] -= c;
    while co.len() > 1 && co.last() == Some(&0.0) {
        co.pop();
    }
    let deg = co.len() - 1;
    if deg < 2 {
        return Vec::new();
    }
    let lead = co[deg];
    let companion = Mat::<f64>::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -co[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    match companion.eigen() {
        Ok(e) => {
            let s = e.S();
            (0..deg).map(|k| s[k]).filter(|z: &c64| z.im.abs() > 1e-12).collect()
        }
        Err(_) => Vec::new(),
    }
}

/// Chebyshev coefficients of nodal values with the noise tail removed.
fn chopped_coefficients(grid: &Grid, f: &[Complex64]) -> Vec<Complex64> {
    let mut a = grid.chebyshev_coefficients(f);
    let max = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-14 * max;
    while a.len() > 1 && a.last().is_some_and(|v| v.norm() <= floor) {
        a.pop();
    }
    a
}

/// The collocated problem on a contour, for one real level `c` and side.
struct PathSystem {
    contour: Contour,
    omega_coeffs: Vec<Complex64>,
    omega_path: Vec<Complex64>,
    u_path: Vec<Complex64>,
    b_path: Vec<Complex64>,
    dzz: Mat<c64>,
    alpha: f64,
}

impl PathSystem {
    #[allow(clippy::too_many_arguments)]
    fn new(
        profile: &ShearProfile,
        alpha: f64,
        beta: f64,
        c: f64,
        omega: &ComplexField,
        roots: &[(f64, f64)],
        side: Side,
        grid: &Grid,
    ) -> Result<Self> {
        let contour = Contour::build(profile, grid, c, roots, side)?;
        let omega_coeffs = chopped_coefficients(grid, &omega.values);
        let omega_path = contour
            .z
            .iter()
            .map(|&z| clenshaw(&omega_coeffs, grid.to_reference(z)))
            .collect();
        let u_path = contour.z.iter().map(|&z| profile.eval_complex(z, 0)).collect();
        let b_path = contour
            .z
            .iter()
            .map(|&z| profile.eval_complex(z, 2) - beta)
            .collect();
        let dzz = contour.second_derivative(grid);
        Ok(PathSystem {
            contour,
            omega_coeffs,
            omega_path,
            u_path,
            b_path,
            dzz,
            alpha,
        })
    }

    /// Nodal values of `Phi(z(s))` for spectral parameter `c`.
    fn solve(&self, c: Complex64) -> Result<Vec<Complex64>> {
        let a: Vec<Complex64> = self.u_path.iter().map(|u| u - c).collect();
        let sol = solve_collocated(&self.dzz, &a, &self.b_path, &self.omega_path, self.alpha);
        if !(sol.condition <= CONDITION_GUARD) {
            return Err(Error::IllConditioned(sol.condition));
        }
        Ok(sol.values)
    }
}

type State = (Complex64, Complex64);

/// Marches the real-axis ODE from `start` toward `level`, recording the
/// solution at each of `targets` (ordered by distance from the start).
#[allow(clippy::too_many_arguments)]
fn march(
    profile: &ShearProfile,
    beta: f64,
    alpha: f64,
    c: f64,
    omega: &dyn Fn(f64) -> Complex64,
    start: f64,
    init: State,
    level: f64,
    targets: &[f64],
    length: f64,
) -> (Vec<State>, State) {
    let a2 = alpha * alpha;
    let rhs = |y: f64, s: State| -> State {
        let coef = (profile.eval(y, 2) - beta) / (profile.eval(y, 0) - c);
        let forcing = omega(y) / (profile.eval(y, 0) - c);
        (s.1, s.0 * a2 + s.0 * coef + forcing)
    };
    let dir = (level - start).signum();
    let stop = level - dir * LEVEL_STOP * length;
    let hmax = length / 400.0;
    let mut y = start;
    let mut s = init;
    let mut out = Vec::with_capacity(targets.len());
    let mut goals: Vec<f64> = targets.to_vec();
    goals.push(stop);
    for &goal in &goals {
        while (goal - y) * dir > 0.0 {
            let dist = (level - y).abs();
            let h = (MARCH_FACTOR * dist).min(hmax).min((goal - y).abs());
            let h = h * dir;
            let k1 = rhs(y, s);
            let k2 = rhs(y + 0.5 * h, (s.0 + k1.0 * (0.5 * h), s.1 + k1.1 * (0.5 * h)));
            let k3 = rhs(y + 0.5 * h, (s.0 + k2.0 * (0.5 * h), s.1 + k2.1 * (0.5 * h)));
            let k4 = rhs(y + h, (s.0 + k3.0 * h, s.1 + k3.1 * h));
            s.0 += (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * (h / 6.0);
            s.1 += (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * (h / 6.0);
            y = if ((goal - y) * dir - h.abs()).abs() < 1e-15 * length { goal } else { y + h };
        }
        out.push(s);
    }
    let last = out.pop().unwrap_or(s);
    (out, last)
}

/// Boundary value `Phi_{+/-}(., c) = lim Phi(., c +/- i eps)` for real `c`.
///
/// Each level of the schedule is solved on a contour pushed into the half
/// plane the resolvent extends to, so the critical layer is never on the
/// path; the extrapolated limit is carried back to the real nodes by
/// marching the ODE from the points where the contour touches the axis.
#[allow(clippy::too_many_arguments)]
pub fn limiting_absorption(
    profile: &ShearProfile,
    alpha: f64,
    beta: f64,
    c: f64,
    omega: &ComplexField,
    side: Side,
    cfg: &AbsorptionConfig,
    grid: &Arc<Grid>,
) -> Result<LimitSolution> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if omega.values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let (lo, hi) = profile.range();
    if c < lo - RANGE_TOL || c > hi + RANGE_TOL {
        let sol = solve_bvp(
            &BvpProblem {
                profile: profile.clone(),
                alpha,
                beta,
                c: Complex64::new(c, 0.0),
                forcing: omega.clone(),
            },
            grid,
        )?;
        return Ok(LimitSolution {
            phi: sol.phi,
            last_change: 0.0,
            changes: Vec::new(),
            levels_used: 0,
            contour_depth: 0.0,
        });
    }
    let length = grid.length();
    let slope_scale = profile.max_abs_derivative(1).max(1.0);
    let roots = profile.level_crossings(c);
    if roots.is_empty()
        || roots.iter().any(|(r, du)| {
            du.abs() < 1e-8 * slope_scale
                || (r - grid.y1).abs() < 1e-9 * length
                || (grid.y2 - r).abs() < 1e-9 * length
        })
    {
        return Err(Error::DegenerateCriticalLevel(c));
    }
    let system = PathSystem::new(profile, alpha, beta, c, omega, &roots, side, grid)?;
    let contour = &system.contour;
    let omega_at = |z: Complex64| clenshaw(&system.omega_coeffs, grid.to_reference(z));

    let eps = &cfg.eps_schedule;
    let mut prev_phi: Option<Vec<Complex64>> = None;
    let mut prev_extrap: Option<Vec<Complex64>> = None;
    let mut changes = Vec::new();
    let mut converged: Option<(Vec<Complex64>, usize)> = None;
    for (k, &e) in eps.iter().enumerate() {
        let phi_k = system.solve(Complex64::new(c, side.sign() * e))?;
        let extrap = match (cfg.extrapolation_order, &prev_phi) {
            (0, _) => Some(phi_k.clone()),
            (_, Some(prev)) => {
                let e0 = eps[k - 1];
                Some(
                    phi_k
                        .iter()
                        .zip(prev)
                        .map(|(p1, p0)| (p1 * e0 - p0 * e) / (e0 - e))
                        .collect::<Vec<_>>(),
                )
            }
            _ => None,
        };
        if let (Some(cur), Some(old)) = (&extrap, &prev_extrap) {
            let change = cur
                .iter()
                .zip(old)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            changes.push(change);
            if !change.is_finite() {
                break;
            }
            if change < cfg.convergence_tol {
                converged = Some((cur.clone(), k + 1));
                break;
            }
        }
        prev_phi = Some(phi_k);
        if extrap.is_some() {
            prev_extrap = extrap;
        }
    }
    let Some((limit, levels_used)) = converged else {
        return Err(Error::NoConvergence {
            last_change: changes.last().copied().unwrap_or(f64::INFINITY),
        });
    };

    // Carry the path solution back to the real nodes.
    let path_field = ComplexField::new(grid.clone(), limit)?;
    let dpath = path_field.derivative();
    let n = grid.n;
    let anchor_state: Vec<State> = contour
        .anchors
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            if j == 0 {
                (Complex64::new(0.0, 0.0), dpath.values[0] / contour.zp[0])
            } else if j + 1 == contour.anchors.len() {
                (Complex64::new(0.0, 0.0), dpath.values[n] / contour.zp[n])
            } else {
                let zp_m = grid.interpolate(&contour.zp, m);
                (path_field.interpolate(m), grid.interpolate(&dpath.values, m) / zp_m)
            }
        })
        .collect();
    let omega_real = |y: f64| omega_at(Complex64::new(y, 0.0));
    let mut phi = vec![Complex64::new(0.0, 0.0); n + 1];
    for (j, &(r, _)) in roots.iter().enumerate() {
        let (left, right) = (contour.anchors[j], contour.anchors[j + 1]);
        let stop = LEVEL_STOP * length;
        let mut left_idx: Vec<usize> = Vec::new();
        let mut right_idx: Vec<usize> = Vec::new();
        let mut centre_idx: Vec<usize> = Vec::new();
        for (i, &y) in grid.nodes.iter().enumerate() {
            if y < left || y > right || i == 0 || i == n {
                continue;
            }
            if y == left {
                phi[i] = anchor_state[j].0;
            } else if y == right {
                phi[i] = anchor_state[j + 1].0;
            } else if (y - r).abs() < stop {
                centre_idx.push(i);
            } else if y < r {
                left_idx.push(i);
            } else {
                right_idx.push(i);
            }
        }
        right_idx.reverse();
        let targets_l: Vec<f64> = left_idx.iter().map(|&i| grid.nodes[i]).collect();
        let targets_r: Vec<f64> = right_idx.iter().map(|&i| grid.nodes[i]).collect();
        let (vl, end_l) = march(
            profile, beta, alpha, c, &omega_real, left, anchor_state[j], r, &targets_l, length,
        );
        let (vr, end_r) = march(
            profile, beta, alpha, c, &omega_real, right, anchor_state[j + 1], r, &targets_r, length,
        );
        for (&i, s) in left_idx.iter().zip(&vl) {
            phi[i] = s.0;
        }
        for (&i, s) in right_idx.iter().zip(&vr) {
            phi[i] = s.0;
        }
        for &i in &centre_idx {
            phi[i] = 0.5 * (end_l.0 + end_r.0);
        }
    }
    Ok(LimitSolution {
        phi: ComplexField::new(grid.clone(), phi)?,
        last_change: changes.last().copied().unwrap_or(0.0),
        changes,
        levels_used,
        contour_depth: contour.depth,
    })
}

/// `omega / p` with `p` the depletion weight. At a root `a` of `p` the
/// quotient is replaced by `omega'(a) / p'(a)`, which is its limit only if
/// `omega(a) = 0`; callers must certify that.
pub fn weight_quotient(
    omega: &ComplexField,
    data: &CriticalData,
    certified_vanishing: bool,
) -> Result<ComplexField> {
    if data.weight_roots.is_empty() {
        return Ok(omega.clone());
    }
    let grid = omega.grid.clone();
    let scale = grid.length().max(1.0).powi(data.weight_roots.len() as i32);
    let domega = omega.derivative();
    let mut values = Vec::with_capacity(grid.len());
    for (i, &y) in grid.nodes.iter().enumerate() {
        let p = data.weight(y);
        if p.abs() <= 1e-12 * scale {
            if !certified_vanishing {
                return Err(Error::WeightQuotient(y));
            }
            values.push(domega.values[i] / data.weight_derivative(y));
        } else {
            values.push(omega.values[i] / p);
        }
    }
    ComplexField::new(grid, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub c: (f64, f64),
    pub h1_ratio: Option<f64>,
    /// `||phi||_{H^1} / ||omega / p||_{H^1}`, when the quotient exists.
    pub weighted_ratio: Option<f64>,
    pub error: Option<String>,
}

/// Solves at every `c` of the list, in parallel, keeping input order.
/// Failures are recorded per point.
pub fn resolvent_norm_scan(
    profile: &ShearProfile,
    alpha: f64,
    beta: f64,
    omega: &ComplexField,
    c_grid: &[Complex64],
    grid: &Arc<Grid>,
) -> Vec<ScanPoint> {
    let data = crate::profiles::critical_points(profile, beta);
    let quotient = weight_quotient(omega, &data, false).ok();
    let quotient_norm = quotient.as_ref().map(h1_norm);
    c_grid
        .par_iter()
        .map(|&c| {
            let problem = BvpProblem {
                profile: profile.clone(),
                alpha,
                beta,
                c,
                forcing: omega.clone(),
            };
            match solve_bvp(&problem, grid) {
                Ok(sol) => {
                    let phi_norm = h1_norm(&sol.phi);
                    let weighted = quotient_norm.map(|q| if q == 0.0 { 0.0 } else { phi_norm / q });
                    ScanPoint {
                        c: (c.re, c.im),
                        h1_ratio: Some(sol.h1_ratio),
                        weighted_ratio: weighted,
                        error: None,
                    }
                }
                Err(e) => ScanPoint {
                    c: (c.re, c.im),
                    h1_ratio: None,
                    weighted_ratio: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Largest finite `h1_ratio` of a scan.
pub fn max_h1_ratio(points: &[ScanPoint]) -> Option<f64> {
    points
        .iter()
        .filter_map(|p| p.h1_ratio)
        .fold(None, |m, r| Some(m.map_or(r, |v: f64| v.max(r))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub eps: f64,
    /// `|Phi(y0) + omega(y0) / (u''(y0) - beta)|`.
    pub phi_shifted: f64,
    /// `|(Phi'' - alpha^2 Phi)(y0)|`.
    pub w_layer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub exponent_phi: f64,
    pub exponent_wlayer: f64,
    /// Set when the forcing vanishes and no scaling can be measured.
    pub degenerate: bool,
    pub samples: Vec<ProbeSample>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Scaling of the solution at a critical point `y0` as `c = u(y0) + i eps`
/// approaches the critical value.
///
/// At `y0` the equation forces `Phi(y0) -> -omega(y0) / (u''(y0) - beta)`,
/// so the power law is measured on the shifted value, which reduces to
/// `Phi(y0)` itself for forcing that vanishes at `y0`. The layer quantity
/// `Phi'' - alpha^2 Phi` is measured directly.
#[allow(clippy::too_many_arguments)]
pub fn critical_layer_probe(
    profile: &ShearProfile,
    alpha: f64,
    beta: f64,
    y0: f64,
    eps_list: &[f64],
    omega: &ComplexField,
    grid: &Arc<Grid>,
) -> Result<ProbeResult> {
    check_alpha(alpha)?;
    if eps_list.len() < 2 || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidSchedule("probe needs two or more positive eps".into()));
    }
    let slope_scale = profile.max_abs_derivative(1).max(1.0);
    if profile.eval(y0, 1).abs() > 1e-8 * slope_scale {
        return Err(Error::Precondition(format!("u'({y0}) does not vanish")));
    }
    let b0 = beta - profile.eval(y0, 2);
    let radius = 1.2 * eps_list.iter().cloned().fold(0.0, f64::max).sqrt();
    for k in 0..=100 {
        let y = (y0 - radius + 2.0 * radius * k as f64 / 100.0).clamp(profile.y1, profile.y2);
        if (beta - profile.eval(y, 2)) * b0 <= 0.0 {
            return Err(Error::Precondition(format!(
                "beta - u'' changes sign within {radius} of {y0}"
            )));
        }
    }
    if omega.sup_norm() == 0.0 {
        return Ok(ProbeResult {
            exponent_phi: f64::NAN,
            exponent_wlayer: f64::NAN,
            degenerate: true,
            samples: Vec::new(),
        });
    }
    let shift = omega.interpolate(y0) / (profile.eval(y0, 2) - beta);
    let uy0 = profile.eval(y0, 0);
    let samples: Vec<ProbeSample> = eps_list
        .par_iter()
        .map(|&eps| -> Result<ProbeSample> {
            let sol = solve_bvp(
                &BvpProblem {
                    profile: profile.clone(),
                    alpha,
                    beta,
                    c: Complex64::new(uy0, eps),
                    forcing: omega.clone(),
                },
                grid,
            )?;
            let lap = sol
                .phi
                .second_derivative()
                .axpy(Complex64::new(-alpha * alpha, 0.0), &sol.phi)?;
            Ok(ProbeSample {
                eps,
                phi_shifted: (sol.phi.interpolate(y0) + shift).norm(),
                w_layer: lap.interpolate(y0).norm(),
            })
        })
        .collect::<Result<_>>()?;
    let eps: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let phis: Vec<f64> = samples.iter().map(|s| s.phi_shifted).collect();
    let ws: Vec<f64> = samples.iter().map(|s| s.w_layer).collect();
    Ok(ProbeResult {
        exponent_phi: log_log_slope(&eps, &phis),
        exponent_wlayer: log_log_slope(&eps, &ws),
        degenerate: false,
        samples,
    })
}
