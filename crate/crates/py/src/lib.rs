//! Python module `betaplane_py`. Fields cross the boundary as lists of
//! complex nodal values on a Chebyshev grid given by `(n, y1, y2)`; use
//! `grid_nodes` to get the matching abscissae.

use std::collections::BTreeMap;
use std::sync::Arc;

use betaplane::atlas::{self, Curve};
use betaplane::evolution::{self, SimSetup};
use betaplane::rayleighkuo::{self, AbsorptionConfig, BvpProblem, Side};
use betaplane::{chebyshev_grid, fieldops, spectra, ComplexField, Grid, ShearProfile};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: betaplane::Error) -> PyErr {
    match e {
        betaplane::Error::UnknownProfile(_)
        | betaplane::Error::InvalidProfile(_)
        | betaplane::Error::NonPositiveWavenumber(_)
        | betaplane::Error::GridMismatch
        | betaplane::Error::UnstableTimeStep { .. }
        | betaplane::Error::Precondition(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn grid(n: usize, y1: f64, y2: f64) -> PyResult<Arc<Grid>> {
    chebyshev_grid(n, y1, y2).map_err(err)
}

fn field(g: &Arc<Grid>, values: Vec<Complex64>) -> PyResult<ComplexField> {
    ComplexField::new(g.clone(), values).map_err(err)
}

/// Mean shear flow `u(y)`: `couette`, `sinus` or `poly`.
#[pyclass(name = "Profile", frozen)]
struct Profile {
    inner: ShearProfile,
}

#[pymethods]
impl Profile {
    #[new]
    #[pyo3(signature = (name, params = None))]
    fn new(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let inner = betaplane::make_profile(name, &params.unwrap_or_default()).map_err(err)?;
        Ok(Profile { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }

    fn range(&self) -> (f64, f64) {
        self.inner.range()
    }

    #[pyo3(signature = (y, order = 0))]
    fn eval(&self, y: f64, order: usize) -> f64 {
        self.inner.eval(y, order)
    }

    fn critical_points(&self) -> Vec<f64> {
        self.inner.critical_point_locations()
    }

    fn is_monotone(&self) -> bool {
        self.inner.monotone_floor.is_some()
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.inner.domain();
        format!("Profile('{}', domain=({a}, {b}))", self.inner.name)
    }
}

#[pyfunction]
fn grid_nodes(n: usize, y1: f64, y2: f64) -> PyResult<Vec<f64>> {
    Ok(grid(n, y1, y2)?.nodes.clone())
}

/// `psi` with `-psi'' + alpha^2 psi = omega`, `psi = 0` at the walls.
#[pyfunction]
fn helmholtz_solve(omega: Vec<Complex64>, y1: f64, y2: f64, alpha: f64) -> PyResult<Vec<Complex64>> {
    let g = grid(omega.len().saturating_sub(1), y1, y2)?;
    Ok(fieldops::helmholtz_solve(&field(&g, omega)?, alpha).map_err(err)?.values)
}

#[pyfunction]
fn sobolev_norm(omega: Vec<Complex64>, y1: f64, y2: f64, k: i32, alpha: f64) -> PyResult<f64> {
    let g = grid(omega.len().saturating_sub(1), y1, y2)?;
    fieldops::sobolev_norm(&field(&g, omega)?, k, alpha).map_err(err)
}

/// Accepted discrete eigenvalues `c`.
#[pyfunction]
fn discrete_spectrum(profile: &Profile, alpha: f64, beta: f64, n: usize) -> PyResult<Vec<Complex64>> {
    let (y1, y2) = profile.inner.domain();
    let spec = spectra::discrete_spectrum(&profile.inner, alpha, beta, &grid(n, y1, y2)?).map_err(err)?;
    Ok(spec.accepted_eigenvalues())
}

/// Forced Rayleigh-Kuo solve at complex `c`; returns nodal `Phi`.
#[pyfunction]
fn solve_bvp(profile: &Profile, alpha: f64, beta: f64, c: Complex64, forcing: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let (y1, y2) = profile.inner.domain();
    let g = grid(forcing.len().saturating_sub(1), y1, y2)?;
    let problem = BvpProblem {
        profile: profile.inner.clone(),
        alpha,
        beta,
        c,
        forcing: field(&g, forcing)?,
    };
    Ok(rayleighkuo::solve_bvp(&problem, &g).map_err(err)?.phi.values)
}

/// Boundary value at real `c` from above (`side = "plus"`) or below.
#[pyfunction]
#[pyo3(signature = (profile, alpha, beta, c, forcing, side = "plus"))]
fn limiting_absorption(
    profile: &Profile,
    alpha: f64,
    beta: f64,
    c: f64,
    forcing: Vec<Complex64>,
    side: &str,
) -> PyResult<Vec<Complex64>> {
    let side = match side {
        "plus" => Side::Plus,
        "minus" => Side::Minus,
        other => return Err(PyValueError::new_err(format!("side must be 'plus' or 'minus', got '{other}'"))),
    };
    let (y1, y2) = profile.inner.domain();
    let g = grid(forcing.len().saturating_sub(1), y1, y2)?;
    let w = field(&g, forcing)?;
    let sol = rayleighkuo::limiting_absorption(&profile.inner, alpha, beta, c, &w, side, &AbsorptionConfig::default(), &g)
        .map_err(err)?;
    Ok(sol.phi.values)
}

fn parse_curve(name: &str) -> PyResult<Curve> {
    Curve::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown curve '{name}'")))
}

/// `(alpha, beta)` on a sinus embedding curve.
#[pyfunction]
fn gamma_point(curve: &str, parameter: f64) -> PyResult<(f64, f64)> {
    let p = atlas::gamma_point(parse_curve(curve)?, parameter).map_err(err)?;
    Ok((p.alpha, p.beta))
}

/// Region tag and embedding speed of `(alpha, beta)` for the sinus flow.
#[pyfunction]
#[pyo3(signature = (alpha, beta, tol = atlas::DEFAULT_TOL))]
fn classify(alpha: f64, beta: f64, tol: f64) -> PyResult<(&'static str, Option<f64>)> {
    let r = atlas::classify(alpha, beta, tol).map_err(err)?;
    Ok((r.tag.name(), r.embedding_c))
}

/// Integrates from `omega0` and returns the sampled diagnostics as a dict
/// of lists plus the final field.
#[pyfunction]
#[pyo3(signature = (profile, alpha, beta, omega0, t_final, dt = None, sample_stride = 10))]
#[allow(clippy::too_many_arguments)]
fn evolve<'py>(
    py: Python<'py>,
    profile: &Profile,
    alpha: f64,
    beta: f64,
    omega0: Vec<Complex64>,
    t_final: f64,
    dt: Option<f64>,
    sample_stride: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let (y1, y2) = profile.inner.domain();
    let g = grid(omega0.len().saturating_sub(1), y1, y2)?;
    let w0 = field(&g, omega0)?;
    let setup = SimSetup::new(profile.inner.clone(), alpha, beta, g, dt, t_final, sample_stride).map_err(err)?;
    let traj = py.detach(|| evolution::integrate(&w0, &setup)).map_err(err)?;
    let d = PyDict::new(py);
    let col = |f: &dyn Fn(&evolution::DiagnosticsRecord) -> f64| traj.records.iter().map(f).collect::<Vec<f64>>();
    d.set_item("t", col(&|r| r.t))?;
    d.set_item("enstrophy", col(&|r| r.enstrophy))?;
    d.set_item("v_norm", col(&|r| r.v_norm))?;
    d.set_item("v2_norm", col(&|r| r.v2_norm))?;
    d.set_item("dt", setup.dt)?;
    d.set_item("final_field", traj.final_field.values)?;
    Ok(d)
}

/// Power-law fit `c t^p` of `values(times)` on `[t0, t1]`; returns `(p, c, r2)`.
#[pyfunction]
fn fit_decay(times: Vec<f64>, values: Vec<f64>, t0: f64, t1: f64) -> PyResult<(f64, f64, f64)> {
    if times.len() != values.len() {
        return Err(PyValueError::new_err("times and values differ in length"));
    }
    let series: Vec<(f64, f64)> = times.into_iter().zip(values).collect();
    let f = evolution::fit_decay(&series, (t0, t1)).map_err(err)?;
    Ok((f.exponent, f.prefactor, f.r_squared))
}

#[pymodule]
fn betaplane_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Profile>()?;
    m.add_function(wrap_pyfunction!(grid_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(helmholtz_solve, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_norm, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bvp, m)?)?;
    m.add_function(wrap_pyfunction!(limiting_absorption, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_point, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    Ok(())
}
