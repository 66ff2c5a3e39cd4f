//! Time evolution of one wavenumber, `d_t omega = -i alpha (u omega + (u'' - beta) psi)`,
//! and the diagnostics extracted from a run.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldops::{ComplexField, Grid, HelmholtzSolver};
use crate::profiles::ShearProfile;

/// RK4 is stable on the imaginary axis up to about 2.83; this keeps a margin.
pub const STABILITY_CONSTANT: f64 = 2.5;
/// Default steps per stability bound when no `dt` is given.
pub const DEFAULT_DT_FRACTION: f64 = 0.05;
pub const MAX_SCATTERING_SAMPLES: usize = 64;

/// `dt <= 2.5 / (alpha (max|u| + s_nl))` with `s_nl` bounding the nonlocal
/// term by the lowest Dirichlet Helmholtz eigenvalue.
pub fn stability_bound(profile: &ShearProfile, alpha: f64, beta: f64) -> f64 {
    let l = profile.length();
    let umax = sample_max(profile, |y| profile.eval(y, 0).abs());
    let s_nl = sample_max(profile, |y| (profile.eval(y, 2) - beta).abs()) / (alpha * alpha + PI * PI / (l * l));
    STABILITY_CONSTANT / (alpha * (umax + s_nl))
}

fn sample_max(profile: &ShearProfile, f: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = profile.domain();
    (0..=4096)
        .map(|k| f(a + (b - a) * k as f64 / 4096.0))
        .fold(0.0, f64::max)
}

#[derive(Clone)]
pub struct SimSetup {
    pub profile: ShearProfile,
    pub alpha: f64,
    pub beta: f64,
    pub grid: Arc<Grid>,
    /// Step actually used: `t_final / steps`.
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
    pub sample_stride: usize,
    /// Exponential filter strength on Chebyshev modes (order 8); `None` is off.
    pub filter: Option<f64>,
    /// Test hook: drop the `(u'' - beta) psi` term.
    pub nonlocal: bool,
    solver: Arc<HelmholtzSolver>,
    u: Vec<f64>,
    coupling: Vec<f64>,
}

impl std::fmt::Debug for SimSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimSetup")
            .field("profile", &self.profile.name)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("n", &self.grid.n)
            .field("dt", &self.dt)
            .field("t_final", &self.t_final)
            .field("sample_stride", &self.sample_stride)
            .finish()
    }
}

impl SimSetup {
    /// `dt = None` picks a twentieth of the stability bound.
    pub fn new(
        profile: ShearProfile,
        alpha: f64,
        beta: f64,
        grid: Arc<Grid>,
        dt: Option<f64>,
        t_final: f64,
        sample_stride: usize,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveWavenumber(alpha));
        }
        let (y1, y2) = profile.domain();
        if (grid.y1 - y1).abs() > 1e-12 || (grid.y2 - y2).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "grid [{}, {}] does not match the profile domain [{y1}, {y2}]",
                grid.y1, grid.y2
            )));
        }
        if sample_stride == 0 {
            return Err(Error::Precondition("sample_stride must be positive".into()));
        }
        let bound = stability_bound(&profile, alpha, beta);
        let dt = dt.unwrap_or(DEFAULT_DT_FRACTION * bound);
        if !(dt > 0.0) || dt > bound {
            return Err(Error::UnstableTimeStep { dt, bound });
        }
        if !(t_final >= dt) {
            return Err(Error::Precondition(format!("final time {t_final} is shorter than dt = {dt}")));
        }
        // Round steps to absorb float noise in T / dt before taking the ceiling.
        let ratio = t_final / dt;
        let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        };
        let solver = Arc::new(HelmholtzSolver::new(grid.clone(), alpha)?);
        let u = grid.nodes.iter().map(|&y| profile.eval(y, 0)).collect();
        let coupling = grid.nodes.iter().map(|&y| profile.eval(y, 2) - beta).collect();
        Ok(SimSetup {
            profile,
            alpha,
            beta,
            grid,
            dt: t_final / steps as f64,
            t_final,
            steps,
            sample_stride,
            filter: None,
            nonlocal: true,
            solver,
            u,
            coupling,
        })
    }

    pub fn solver(&self) -> &HelmholtzSolver {
        &self.solver
    }
}

/// `-i alpha (u omega + (u'' - beta) psi)` with `psi` the Dirichlet Helmholtz
/// solution; wall nodes carry `psi = 0`.
pub fn rhs(omega: &ComplexField, setup: &SimSetup) -> ComplexField {
    let n = setup.grid.n;
    let minus_i_alpha = Complex64::new(0.0, -setup.alpha);
    let mut out: Vec<Complex64> = omega
        .values
        .iter()
        .zip(&setup.u)
        .map(|(w, u)| w * *u)
        .collect();
    if setup.nonlocal {
        let psi = setup.solver.solve_interior(&omega.values[1..n]);
        for i in 1..n {
            out[i] += psi[i - 1] * setup.coupling[i];
        }
    }
    for v in out.iter_mut() {
        *v *= minus_i_alpha;
    }
    ComplexField {
        grid: omega.grid.clone(),
        values: out,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub enstrophy: f64,
    pub v_norm: f64,
    pub v2_norm: f64,
    /// `d_y psi` at `y1` and `y2`.
    pub boundary_traces: [(f64, f64); 2],
    /// `(y0, |omega(t, y0)|)` at each zero of `u'`.
    pub critical_values: Vec<(f64, f64)>,
    pub omega1_norm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
    pub final_field: ComplexField,
    /// Rounding carry of the compensated update: `final_field - final_carry`
    /// is the state to roughly twice working precision.
    pub final_carry: Vec<Complex64>,
    /// `(t, e^{i alpha t u} omega(t))`, at most 64 samples.
    pub scattering_fields: Vec<(f64, ComplexField)>,
}

pub fn diagnostics(omega: &ComplexField, t: f64, setup: &SimSetup, critical: &[f64]) -> DiagnosticsRecord {
    let psi = setup.solver.solve(omega).expect("grid checked at setup");
    let dpsi = psi.derivative();
    let n = setup.grid.n;
    let v_sq = crate::fieldops::inner_product(&psi, omega)
        .map(|z| z.re)
        .unwrap_or(0.0);
    let omega1_norm = setup.profile.monotone_floor.map(|_| {
        let d = omega.derivative();
        let shear_t = Complex64::new(0.0, setup.alpha * t);
        let x_omega: Vec<Complex64> = d
            .values
            .iter()
            .zip(&omega.values)
            .zip(&setup.grid.nodes)
            .map(|((dw, w), &y)| dw / setup.profile.eval(y, 1) + shear_t * w)
            .collect();
        ComplexField {
            grid: omega.grid.clone(),
            values: x_omega,
        }
        .l2_norm()
    });
    DiagnosticsRecord {
        t,
        enstrophy: omega.l2_norm(),
        v_norm: v_sq.max(0.0).sqrt(),
        v2_norm: setup.alpha * psi.l2_norm(),
        boundary_traces: [
            (dpsi.values[0].re, dpsi.values[0].im),
            (dpsi.values[n].re, dpsi.values[n].im),
        ],
        critical_values: critical.iter().map(|&y| (y, omega.interpolate(y).norm())).collect(),
        omega1_norm,
    }
}

fn filter_field(omega: &ComplexField, strength: f64) -> ComplexField {
    let grid = &omega.grid;
    let n = grid.n;
    let mut a = grid.chebyshev_coefficients(&omega.values);
    for (k, c) in a.iter_mut().enumerate() {
        *c *= (-strength * (k as f64 / n as f64).powi(8)).exp();
    }
    let values = (0..=n)
        .map(|i| {
            // Node i sits at reference angle (n - i) pi / n.
            let j = n - i;
            a.iter()
                .enumerate()
                .map(|(k, c)| c * ((k * j % (2 * n)) as f64 * PI / n as f64).cos())
                .sum()
        })
        .collect();
    ComplexField {
        grid: omega.grid.clone(),
        values,
    }
}

/// RK4 increment `dt/6 (k1 + 2 k2 + 2 k3 + k4)`.
fn rk4_increment(w: &ComplexField, setup: &SimSetup) -> Vec<Complex64> {
    let dt = setup.dt;
    let h = |a: f64| Complex64::new(a, 0.0);
    let k1 = rhs(w, setup);
    let k2 = rhs(&w.axpy(h(dt / 2.0), &k1).unwrap(), setup);
    let k3 = rhs(&w.axpy(h(dt / 2.0), &k2).unwrap(), setup);
    let k4 = rhs(&w.axpy(h(dt), &k3).unwrap(), setup);
    (0..w.values.len())
        .map(|i| (k1.values[i] + (k2.values[i] + k3.values[i]) * 2.0 + k4.values[i]) * (dt / 6.0))
        .collect()
}

/// State with a Kahan compensation term, so that rounding of the update
/// does not accumulate over many small steps.
struct CompensatedState {
    w: ComplexField,
    carry: Vec<Complex64>,
}

impl CompensatedState {
    fn step(&mut self, setup: &SimSetup) {
        let inc = rk4_increment(&self.w, setup);
        for (i, d) in inc.into_iter().enumerate() {
            let y = d - self.carry[i];
            let t = self.w.values[i] + y;
            self.carry[i] = (t - self.w.values[i]) - y;
            self.w.values[i] = t;
        }
        if let Some(s) = setup.filter {
            self.w = filter_field(&self.w, s);
            self.carry.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        }
    }
}

fn scattered(omega: &ComplexField, t: f64, setup: &SimSetup) -> ComplexField {
    let values = omega
        .values
        .iter()
        .zip(&setup.u)
        .map(|(w, u)| w * Complex64::from_polar(1.0, setup.alpha * t * u))
        .collect();
    ComplexField {
        grid: omega.grid.clone(),
        values,
    }
}

/// Classical RK4 from `t = 0` to `t_final`, sampling diagnostics every
/// `sample_stride` steps (and always at the final time).
pub fn integrate(omega0: &ComplexField, setup: &SimSetup) -> Result<Trajectory> {
    omega0.check_same_grid(&ComplexField::zeros(setup.grid.clone()))?;
    let critical = setup.profile.critical_point_locations();
    let mut sample_steps: Vec<usize> = (0..=setup.steps).step_by(setup.sample_stride).collect();
    if *sample_steps.last().unwrap() != setup.steps {
        sample_steps.push(setup.steps);
    }
    let scatter_every = sample_steps.len().div_ceil(MAX_SCATTERING_SAMPLES).max(1);
    let mut traj = Trajectory {
        times: Vec::with_capacity(sample_steps.len()),
        records: Vec::with_capacity(sample_steps.len()),
        final_field: omega0.clone(),
        final_carry: Vec::new(),
        scattering_fields: Vec::new(),
    };
    let mut state = CompensatedState {
        w: omega0.clone(),
        carry: vec![Complex64::new(0.0, 0.0); omega0.len()],
    };
    let mut next_sample = 0;
    for step in 0..=setup.steps {
        if step > 0 {
            state.step(setup);
            if state.w.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Diverged {
                    last_valid_sample: traj.records.len().saturating_sub(1),
                });
            }
        }
        if next_sample < sample_steps.len() && sample_steps[next_sample] == step {
            let t = step as f64 * setup.dt;
            traj.times.push(t);
            let w = &state.w;
            traj.records.push(diagnostics(w, t, setup, &critical));
            let last = next_sample + 1 == sample_steps.len();
            if (next_sample % scatter_every == 0 || last) && traj.scattering_fields.len() < MAX_SCATTERING_SAMPLES {
                traj.scattering_fields.push((t, scattered(w, t, setup)));
            } else if last {
                // Keep the final time as the limit candidate.
                traj.scattering_fields.pop();
                traj.scattering_fields.push((t, scattered(w, t, setup)));
            }
            next_sample += 1;
        }
    }
    traj.final_field = state.w;
    traj.final_carry = state.carry;
    Ok(traj)
}

/// `e^{-i alpha t u(y)} omega_0(y)`.
pub fn free_stream_oracle(omega0: &ComplexField, setup: &SimSetup, t: f64) -> ComplexField {
    scattered(omega0, -t, setup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least squares of `log value` against `log(1 + t)` over the window.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .cloned()
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!("window holds {} samples, need at least 10", pts.len())));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Fit(format!("nonpositive value {v} at t = {t}")));
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| (1.0 + t).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("window spans a single time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
    })
}

/// Limit candidate (the last scattered sample) and successive `L^2` increments.
pub fn scattering_profile(traj: &Trajectory) -> Result<(ComplexField, Vec<f64>)> {
    let s = &traj.scattering_fields;
    if s.len() < 3 {
        return Err(Error::Precondition(format!("{} scattering samples, need at least 3", s.len())));
    }
    let inc = s
        .windows(2)
        .map(|w| w[1].1.axpy(Complex64::new(-1.0, 0.0), &w[0].1).unwrap().l2_norm())
        .collect();
    Ok((s.last().unwrap().1.clone(), inc))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTime {
    /// `int_0^T ||v||^2 dt`.
    pub velocity_integral: f64,
    /// `int_0^T (|psi'(y1)|^2 + |psi'(y2)|^2) dt`.
    pub boundary_integral: f64,
    /// `alpha^2 velocity_integral / ||omega_0||^2` and
    /// `alpha boundary_integral / ||omega_0||^2`.
    pub ratios: (f64, f64),
    /// Running ratios `(t, velocity, boundary)` at every sample.
    pub cumulative: Vec<(f64, f64, f64)>,
}

/// Trapezoid-rule space-time integrals over the sampled diagnostics.
pub fn spacetime_accumulator(traj: &Trajectory, alpha: f64) -> SpaceTime {
    let e0 = traj.records.first().map_or(0.0, |r| r.enstrophy.powi(2));
    let scale = |x: f64| if e0 > 0.0 { x / e0 } else { 0.0 };
    let bnd = |r: &DiagnosticsRecord| {
        r.boundary_traces
            .iter()
            .map(|(re, im)| re * re + im * im)
            .sum::<f64>()
    };
    let (mut vel, mut wall) = (0.0, 0.0);
    let mut cumulative = Vec::with_capacity(traj.records.len());
    if let Some(first) = traj.records.first() {
        cumulative.push((first.t, 0.0, 0.0));
    }
    for w in traj.records.windows(2) {
        let h = w[1].t - w[0].t;
        vel += 0.5 * h * (w[0].v_norm.powi(2) + w[1].v_norm.powi(2));
        wall += 0.5 * h * (bnd(&w[0]) + bnd(&w[1]));
        cumulative.push((w[1].t, scale(alpha * alpha * vel), scale(alpha * wall)));
    }
    SpaceTime {
        velocity_integral: vel,
        boundary_integral: wall,
        ratios: (scale(alpha * alpha * vel), scale(alpha * wall)),
        cumulative,
    }
}

/// `(y0, [(t, |omega(t, y0)|)])` for each critical point of `u`.
pub fn depletion_series(traj: &Trajectory) -> Vec<(f64, Vec<(f64, f64)>)> {
    let Some(first) = traj.records.first() else {
        return Vec::new();
    };
    (0..first.critical_values.len())
        .map(|k| {
            let y0 = first.critical_values[k].0;
            (y0, traj.records.iter().map(|r| (r.t, r.critical_values[k].1)).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldops::chebyshev_grid;
    use crate::profiles::make_profile;
    use std::collections::BTreeMap;

    fn profile(name: &str) -> ShearProfile {
        make_profile(name, &BTreeMap::new()).unwrap()
    }

    fn couette_setup(n: usize, beta: f64, dt: f64, t: f64) -> (SimSetup, ComplexField) {
        let g = chebyshev_grid(n, 0.0, 1.0).unwrap();
        let w0 = ComplexField::from_real_fn(g.clone(), |y| (PI * y).sin());
        (SimSetup::new(profile("couette"), 1.0, beta, g, Some(dt), t, 10).unwrap(), w0)
    }

    #[test]
    fn couette_rhs_is_pure_transport() {
        let (s, w0) = couette_setup(32, 0.0, 1e-2, 1.0);
        let r = rhs(&w0, &s);
        for (i, &y) in s.grid.nodes.iter().enumerate() {
            let expect = Complex64::new(0.0, -y * (PI * y).sin());
            assert!((r.values[i] - expect).norm() < 1e-15);
        }
        let z = rhs(&ComplexField::zeros(s.grid.clone()), &s);
        assert!(z.sup_norm() == 0.0);
    }

    #[test]
    fn resonant_mode_is_an_eigenvector_of_the_generator() {
        let g = chebyshev_grid(64, -1.0, 1.0).unwrap();
        let alpha = 3f64.sqrt() * PI / 2.0;
        let w0 = ComplexField::from_real_fn(g.clone(), |y| PI * PI * (PI * y / 2.0).cos());
        let s = SimSetup::new(profile("sinus"), alpha, 0.0, g, Some(1e-2), 10.0, 50).unwrap();
        let expect = w0.scale(Complex64::new(0.0, -alpha * 0.5));
        assert!(rhs(&w0, &s).sup_distance(&expect).unwrap() < 1e-10);
        let traj = integrate(&w0, &s).unwrap();
        let v0 = traj.records[0].v_norm;
        assert!(traj.records.iter().all(|r| (r.v_norm / v0 - 1.0).abs() < 1e-6));
        let (_, inc) = scattering_profile(&traj).unwrap();
        assert!(inc.iter().all(|&d| d > 1e-2));
    }

    #[test]
    fn transport_matches_free_streaming() {
        let (s, w0) = couette_setup(64, 0.0, 1e-3, 2.0);
        let traj = integrate(&w0, &s).unwrap();
        let exact = free_stream_oracle(&w0, &s, 2.0);
        assert!(traj.final_field.sup_distance(&exact).unwrap() < 1e-8);
        let e0 = traj.records[0].enstrophy;
        assert!(traj.records.iter().all(|r| (r.enstrophy - e0).abs() < 1e-9));
        let (_, inc) = scattering_profile(&traj).unwrap();
        assert!(inc.iter().all(|&d| d < 1e-9));
        assert!(depletion_series(&traj).is_empty());
    }

    #[test]
    fn fourth_order_without_nonlocal_term() {
        // Large steps keep the truncation error far above rounding.
        let g = chebyshev_grid(48, -1.0, 1.0).unwrap();
        let w0 = ComplexField::from_real_fn(g.clone(), |y| 1.0 - y * y);
        let err = |dt: f64| {
            let mut s = SimSetup::new(profile("sinus"), 2.0, 1.0, g.clone(), Some(dt), 4.0, 1000).unwrap();
            s.nonlocal = false;
            let traj = integrate(&w0, &s).unwrap();
            traj.final_field.sup_distance(&free_stream_oracle(&w0, &s, 4.0)).unwrap()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn reversibility_and_phase_equivariance() {
        let g = chebyshev_grid(64, -1.0, 1.0).unwrap();
        let w0 = ComplexField::from_fn(g.clone(), |y| Complex64::new(1.0 - y * y, 0.3 * y * (1.0 - y * y)));
        let s = SimSetup::new(profile("sinus"), 1.0, 0.5, g.clone(), Some(0.02), 3.0, 10).unwrap();
        let fwd = integrate(&w0, &s).unwrap();
        let back = integrate(&fwd.final_field.conj(), &s).unwrap().final_field.conj();
        let mut half = s.clone();
        half.dt /= 2.0;
        half.steps *= 2;
        let fine = integrate(&w0, &half).unwrap().final_field;
        let forward_error = fwd.final_field.sup_distance(&fine).unwrap() * 16.0 / 15.0;
        assert!(back.sup_distance(&w0).unwrap() <= 10.0 * forward_error.max(1e-14));

        let phase = Complex64::from_polar(1.0, PI / 3.0);
        let rotated = integrate(&w0.scale(phase), &s).unwrap();
        assert!(rotated.final_field.sup_distance(&fwd.final_field.scale(phase)).unwrap() < 1e-13);
        for (a, b) in rotated.records.iter().zip(&fwd.records) {
            assert!((a.enstrophy - b.enstrophy).abs() < 1e-13);
            assert!((a.v_norm - b.v_norm).abs() < 1e-13);
            assert!((a.v2_norm - b.v2_norm).abs() < 1e-13);
        }
    }

    #[test]
    fn free_stream_oracle_properties() {
        let (s, w0) = couette_setup(16, 0.0, 1e-2, 1.0);
        assert_eq!(free_stream_oracle(&w0, &s, 0.0).values, w0.values);
        let a = free_stream_oracle(&w0, &s, 0.7);
        for (x, y) in a.values.iter().zip(&w0.values) {
            assert!((x.norm() - y.norm()).abs() < 1e-15);
        }
        let twice = free_stream_oracle(&free_stream_oracle(&w0, &s, 0.3), &s, 0.4);
        assert!(twice.sup_distance(&a).unwrap() < 1e-15);
    }

    #[test]
    fn time_step_rules() {
        let g = chebyshev_grid(16, 0.0, 1.0).unwrap();
        let p = profile("couette");
        let bound = stability_bound(&p, 1.0, 0.5);
        let expect = 2.5 / (1.0 + 0.5 / (1.0 + PI * PI));
        assert!((bound - expect).abs() < 1e-12);
        assert!(matches!(
            SimSetup::new(p.clone(), 1.0, 0.5, g.clone(), Some(1.01 * bound), 10.0, 1),
            Err(Error::UnstableTimeStep { .. })
        ));
        let s = SimSetup::new(p.clone(), 1.0, 0.5, g.clone(), None, 10.0, 1).unwrap();
        assert!(s.dt <= DEFAULT_DT_FRACTION * bound + 1e-15);
        assert!((s.dt * s.steps as f64 - 10.0).abs() < 1e-12);
        assert!(SimSetup::new(p.clone(), 1.0, 0.5, g.clone(), Some(0.1), 0.05, 1).is_err());
        assert!(SimSetup::new(p, 0.0, 0.5, g, Some(0.1), 1.0, 1).is_err());
    }

    #[test]
    fn non_finite_state_aborts() {
        let (s, mut w0) = couette_setup(16, 0.5, 1e-2, 1.0);
        w0.values[5] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(integrate(&w0, &s), Err(Error::Diverged { last_valid_sample: 0 })));
    }

    #[test]
    fn fit_decay_recovers_power_laws() {
        let ts: Vec<f64> = (0..200).map(|k| k as f64 * 0.25).collect();
        let s: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 3.0 * (1.0 + t).powf(-2.0))).collect();
        let f = fit_decay(&s, (5.0, 40.0)).unwrap();
        assert!((f.exponent + 2.0).abs() < 0.01 && (f.prefactor - 3.0).abs() < 1e-9);
        let c: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 0.4)).collect();
        assert!(fit_decay(&c, (5.0, 40.0)).unwrap().exponent.abs() < 0.01);
        let mut bad = c.clone();
        bad[30].1 = 0.0;
        assert!(matches!(fit_decay(&bad, (5.0, 40.0)), Err(Error::Fit(_))));
        assert!(matches!(fit_decay(&c, (5.0, 6.0)), Err(Error::Fit(_))));
    }

    #[test]
    fn spacetime_of_zero_data() {
        let (s, _) = couette_setup(16, 0.5, 1e-2, 1.0);
        let traj = integrate(&ComplexField::zeros(s.grid.clone()), &s).unwrap();
        let st = spacetime_accumulator(&traj, 1.0);
        assert_eq!((st.velocity_integral, st.boundary_integral, st.ratios), (0.0, 0.0, (0.0, 0.0)));
    }

    #[test]
    fn spacetime_trapezoid_matches_direct_sum() {
        let (s, w0) = couette_setup(32, 0.5, 1e-2, 2.0);
        let traj = integrate(&w0, &s).unwrap();
        let st = spacetime_accumulator(&traj, 1.0);
        let r = &traj.records;
        let direct: f64 = (1..r.len())
            .map(|k| (r[k].t - r[k - 1].t) * (r[k].v_norm.powi(2) + r[k - 1].v_norm.powi(2)) / 2.0)
            .sum();
        assert!((st.velocity_integral - direct).abs() < 1e-14);
        assert!(st.cumulative.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn wall_critical_points_stay_empty() {
        let g = chebyshev_grid(64, -1.0, 1.0).unwrap();
        let w0 = ComplexField::from_real_fn(g.clone(), |y| (1.0 - y * y) * (1.0 + 0.5 * y));
        let s = SimSetup::new(profile("sinus"), PI, PI * PI / 4.0, g, Some(0.01), 2.0, 10).unwrap();
        let traj = integrate(&w0, &s).unwrap();
        let series = depletion_series(&traj);
        assert_eq!(series.len(), 3);
        for (y0, ser) in &series {
            if y0.abs() == 1.0 {
                assert!(ser.iter().all(|(_, v)| *v < 1e-10));
            }
        }
        assert!(traj.scattering_fields.len() <= MAX_SCATTERING_SAMPLES);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]) && traj.times[0] == 0.0);
    }

    #[test]
    fn filter_damps_only_high_modes() {
        let g = chebyshev_grid(32, -1.0, 1.0).unwrap();
        // 1 - y^2 = (T0 - T2) / 2; only the T2 part is damped.
        let smooth = ComplexField::from_real_fn(g.clone(), |y| 1.0 - y * y);
        let f = filter_field(&smooth, 36.0);
        let damp = (-36.0 * (2.0f64 / 32.0).powi(8)).exp();
        let exact = ComplexField::from_real_fn(g.clone(), |y| 0.5 - 0.5 * damp * (2.0 * y * y - 1.0));
        assert!(f.sup_distance(&exact).unwrap() < 1e-14);
        let rough = ComplexField::from_fn(g.clone(), |y| Complex64::new((30.0 * (y.acos())).cos(), 0.0));
        assert!(filter_field(&rough, 36.0).sup_norm() < 0.5 * rough.sup_norm());
    }
}
