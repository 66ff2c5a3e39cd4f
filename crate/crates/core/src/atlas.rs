//! Embedding-eigenvalue atlas of the sinus flow `u = cos^2(pi y / 2)` on
//! `[-1, 1]`: the curves gamma_1..gamma_4, region classification and the
//! closed-form eigenpairs.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldops::{chebyshev_grid, ComplexField, Grid};
use crate::profiles::{make_profile, ShearProfile};
use crate::spectra::{discrete_spectrum, unstable_modes};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curve {
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
}

impl Curve {
    pub const ALL: [Curve; 4] = [Curve::Gamma1, Curve::Gamma2, Curve::Gamma3, Curve::Gamma4];

    pub fn name(self) -> &'static str {
        match self {
            Curve::Gamma1 => "gamma1",
            Curve::Gamma2 => "gamma2",
            Curve::Gamma3 => "gamma3",
            Curve::Gamma4 => "gamma4",
        }
    }

    /// Open parameter range: `beta` for gamma_1, `r` otherwise.
    pub fn parameter_range(self) -> (f64, f64) {
        match self {
            Curve::Gamma1 => (-PI * PI / 2.0, PI * PI / 2.0),
            Curve::Gamma2 => (0.25, 1.0),
            Curve::Gamma3 | Curve::Gamma4 => (0.25, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub curve: Curve,
    pub parameter: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    Gamma,
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Corner,
}

impl RegionTag {
    pub fn name(self) -> &'static str {
        match self {
            RegionTag::Gamma => "Gamma",
            RegionTag::Gamma1 => "gamma1",
            RegionTag::Gamma2 => "gamma2",
            RegionTag::Gamma3 => "gamma3",
            RegionTag::Gamma4 => "gamma4",
            RegionTag::Corner => "corner",
        }
    }

    pub fn curve(self) -> Option<Curve> {
        match self {
            RegionTag::Gamma1 => Some(Curve::Gamma1),
            RegionTag::Gamma2 => Some(Curve::Gamma2),
            RegionTag::Gamma3 => Some(Curve::Gamma3),
            RegionTag::Gamma4 => Some(Curve::Gamma4),
            _ => None,
        }
    }
}

impl From<Curve> for RegionTag {
    fn from(c: Curve) -> Self {
        match c {
            Curve::Gamma1 => RegionTag::Gamma1,
            Curve::Gamma2 => RegionTag::Gamma2,
            Curve::Gamma3 => RegionTag::Gamma3,
            Curve::Gamma4 => RegionTag::Gamma4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtlasRegion {
    pub tag: RegionTag,
    pub embedding_c: Option<f64>,
    /// Curve parameter recovered by the inversion, when on a curve.
    pub parameter: Option<f64>,
}

fn resonant_alpha() -> f64 {
    3f64.sqrt() * PI / 2.0
}

fn alpha_of(curve: Curve, r: f64) -> f64 {
    match curve {
        Curve::Gamma1 => resonant_alpha(),
        Curve::Gamma2 => PI * (1.0 - r * r).sqrt(),
        Curve::Gamma3 | Curve::Gamma4 => PI * (0.75 - r * r - r).sqrt(),
    }
}

fn beta_of(curve: Curve, p: f64) -> f64 {
    let pi2 = PI * PI;
    match curve {
        Curve::Gamma1 => p,
        Curve::Gamma2 | Curve::Gamma3 => pi2 * (-p * p + p / 2.0 + 0.5),
        Curve::Gamma4 => pi2 * (p * p - p / 2.0 - 0.5),
    }
}

pub fn gamma_point(curve: Curve, parameter: f64) -> Result<CurvePoint> {
    let (lo, hi) = curve.parameter_range();
    if !(parameter > lo && parameter < hi) {
        return Err(Error::CurveParameter {
            curve: curve.name(),
            value: parameter,
        });
    }
    Ok(CurvePoint {
        curve,
        parameter,
        alpha: alpha_of(curve, parameter),
        beta: beta_of(curve, parameter),
    })
}

/// Embedding wave speed attached to a curve at a parameter.
pub fn embedding_speed(curve: Curve, parameter: f64) -> f64 {
    match curve {
        Curve::Gamma1 => 0.5 - parameter / (PI * PI),
        Curve::Gamma2 | Curve::Gamma3 => 0.0,
        Curve::Gamma4 => 1.0,
    }
}

/// The admissible band `|beta| < 9 pi^2 / 16` where every critical point
/// of the sinus flow is nondegenerate.
pub fn admissible_beta(beta: f64) -> bool {
    beta.abs() < 9.0 * PI * PI / 16.0
}

/// Region of `(alpha, beta)`: each curve is inverted for its parameter from
/// `beta`, then range and `alpha` residual are checked against `tol`.
/// Off the curves the tag is `Gamma` with no embedding speed; other embedded
/// eigenvalues are assumed absent, not searched for.
pub fn classify(alpha: f64, beta: f64, tol: f64) -> Result<AtlasRegion> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveWavenumber(alpha));
    }
    if !admissible_beta(beta) {
        return Err(Error::InadmissibleBeta(beta));
    }
    let pi2 = PI * PI;
    let on = |tag: RegionTag, c: f64, p: f64| AtlasRegion {
        tag,
        embedding_c: Some(c),
        parameter: Some(p),
    };
    if (alpha - resonant_alpha()).abs() <= tol && (beta + pi2 / 2.0).abs() <= tol {
        return Ok(AtlasRegion {
            tag: RegionTag::Corner,
            embedding_c: Some(1.0),
            parameter: None,
        });
    }
    let inside = |curve: Curve, p: f64| {
        let (lo, hi) = curve.parameter_range();
        p > lo && p < hi
    };
    if (alpha - resonant_alpha()).abs() <= tol && inside(Curve::Gamma1, beta) {
        return Ok(on(RegionTag::Gamma1, embedding_speed(Curve::Gamma1, beta), beta));
    }
    // beta = pi^2 (-r^2 + r/2 + 1/2) on gamma_2 and gamma_3.
    let disc = 9.0 / 16.0 - beta / pi2;
    if disc >= 0.0 {
        let r = 0.25 + disc.sqrt();
        for curve in [Curve::Gamma2, Curve::Gamma3] {
            if inside(curve, r) && (alpha - alpha_of(curve, r)).abs() <= tol {
                return Ok(on(curve.into(), 0.0, r));
            }
        }
    }
    // beta = pi^2 (r^2 - r/2 - 1/2) on gamma_4.
    let disc = 9.0 / 16.0 + beta / pi2;
    if disc >= 0.0 {
        let r = 0.25 + disc.sqrt();
        if inside(Curve::Gamma4, r) && (alpha - alpha_of(Curve::Gamma4, r)).abs() <= tol {
            return Ok(on(RegionTag::Gamma4, 1.0, r));
        }
    }
    Ok(AtlasRegion {
        tag: RegionTag::Gamma,
        embedding_c: None,
        parameter: None,
    })
}

/// `C^a S^b` with `C = cos(pi y / 2)`, `S = sin(pi y / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMonomial {
    pub a: f64,
    pub b: f64,
}

fn signed_pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p.fract() == 0.0 && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

impl TrigMonomial {
    /// `(phi, phi'')` at `y`.
    pub fn eval(&self, y: f64) -> (f64, f64) {
        let (s, c) = (PI * y / 2.0).sin_cos();
        let (a, b) = (self.a, self.b);
        let term = |pa: f64, pb: f64, k: f64| {
            if k == 0.0 {
                0.0
            } else {
                k * signed_pow(c, pa) * signed_pow(s, pb)
            }
        };
        let phi = signed_pow(c, a) * signed_pow(s, b);
        let d2 = (PI / 2.0).powi(2)
            * (term(a - 2.0, b + 2.0, a * (a - 1.0)) - term(a, b, a * (b + 1.0) + b * (a + 1.0))
                + term(a + 2.0, b - 2.0, b * (b - 1.0)));
        (phi, d2)
    }
}

#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub c: f64,
    pub phi: ComplexField,
    pub monomial: TrigMonomial,
    pub validity: (f64, f64),
}

/// Closed-form embedding eigenfunction sampled on `grid`. Nodes outside the
/// validity interval carry zero.
pub fn closed_form_eigenpair(curve: Curve, parameter: f64, grid: &Arc<Grid>) -> Result<ClosedForm> {
    gamma_point(curve, parameter)?;
    let (monomial, validity) = match curve {
        Curve::Gamma1 => (TrigMonomial { a: 1.0, b: 0.0 }, (-1.0, 1.0)),
        Curve::Gamma2 => (TrigMonomial { a: 2.0 * parameter, b: 0.0 }, (-1.0, 1.0)),
        Curve::Gamma3 => (TrigMonomial { a: 2.0 * parameter, b: 1.0 }, (-1.0, 1.0)),
        Curve::Gamma4 => (TrigMonomial { a: 1.0, b: 2.0 * parameter }, (0.0, 1.0)),
    };
    let phi = ComplexField::from_real_fn(grid.clone(), |y| {
        if y >= validity.0 && y <= validity.1 {
            // Clamp tiny negative C at the walls from rounding of cos.
            let (s, c) = (PI * y / 2.0).sin_cos();
            signed_pow(c.max(0.0), monomial.a) * signed_pow(if monomial.b.fract() == 0.0 { s } else { s.max(0.0) }, monomial.b)
        } else {
            0.0
        }
    });
    Ok(ClosedForm {
        c: embedding_speed(curve, parameter),
        phi,
        monomial,
        validity,
    })
}

pub fn sinus_profile() -> ShearProfile {
    make_profile("sinus", &Default::default()).expect("built-in profile")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasCell {
    pub alpha: f64,
    pub beta: f64,
    pub tag: RegionTag,
    /// `alpha max Im c` over accepted unstable modes, zero if none.
    pub growth_rate: f64,
    pub error: Option<String>,
}

/// Classification and growth rate on a tensor grid, `alpha` outermost.
/// `n_grid` is the collocation size used for each spectrum.
pub fn scan_atlas(
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    n_alpha: usize,
    n_beta: usize,
    n_grid: usize,
) -> Result<Vec<AtlasCell>> {
    let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
        if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    };
    let alphas = axis(alpha_range, n_alpha);
    let betas = axis(beta_range, n_beta);
    if let Some(b) = betas.iter().find(|b| !admissible_beta(**b)) {
        return Err(Error::InadmissibleBeta(*b));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::NonPositiveWavenumber(*a));
    }
    let grid = chebyshev_grid(n_grid, -1.0, 1.0)?;
    let profile = sinus_profile();
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(alpha, beta)| {
            let tag = classify(alpha, beta, DEFAULT_TOL).map(|r| r.tag).unwrap_or(RegionTag::Gamma);
            let (growth_rate, error) = match discrete_spectrum(&profile, alpha, beta, &grid) {
                Ok(spec) => (
                    unstable_modes(&spec, 0.0)
                        .iter()
                        .map(|c| alpha * c.im)
                        .fold(0.0, f64::max),
                    None,
                ),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            AtlasCell {
                alpha,
                beta,
                tag,
                growth_rate,
                error,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::embedding_candidate_residual_exact;

    const PI2: f64 = PI * PI;

    #[test]
    fn curve_parametrizations() {
        let p = gamma_point(Curve::Gamma2, 0.5).unwrap();
        assert!((p.alpha - resonant_alpha()).abs() < 1e-15 && (p.beta - PI2 / 2.0).abs() < 1e-13);
        let p = gamma_point(Curve::Gamma4, 0.25 + 1e-12).unwrap();
        assert!((p.alpha - PI * 7f64.sqrt() / 4.0).abs() < 1e-10);
        let p = gamma_point(Curve::Gamma1, 0.0).unwrap();
        assert_eq!((p.alpha, p.beta), (resonant_alpha(), 0.0));
        assert!(matches!(gamma_point(Curve::Gamma3, 0.5), Err(Error::CurveParameter { .. })));
        assert!(gamma_point(Curve::Gamma1, PI2 / 2.0).is_err());

        // gamma_2 and gamma_3 share beta; their alphas part ways at r = 1/2.
        for r in [0.3, 0.4, 0.49] {
            assert_eq!(gamma_point(Curve::Gamma2, r).unwrap().beta, gamma_point(Curve::Gamma3, r).unwrap().beta);
        }
        let near = 0.5 - 1e-10;
        assert!(gamma_point(Curve::Gamma3, near).unwrap().alpha < 1e-4);
        assert!((gamma_point(Curve::Gamma2, near).unwrap().alpha - resonant_alpha()).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_curve_identities() {
        for r in [0.3, 0.4, 0.45] {
            let a2 = gamma_point(Curve::Gamma2, r).unwrap().alpha.powi(2);
            assert!((-a2 + PI2 * (1.0 - r * r)).abs() < 1e-12);
            for c in [Curve::Gamma3, Curve::Gamma4] {
                let a2 = gamma_point(c, r).unwrap().alpha.powi(2);
                assert!((-a2 - PI2 * (r * r + r - 0.75)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn named_points() {
        let r = classify(resonant_alpha(), 0.0, DEFAULT_TOL).unwrap();
        assert_eq!((r.tag, r.embedding_c), (RegionTag::Gamma1, Some(0.5)));
        let r = classify(resonant_alpha(), -PI2 / 2.0, DEFAULT_TOL).unwrap();
        assert_eq!((r.tag, r.embedding_c), (RegionTag::Corner, Some(1.0)));
        let r = classify(PI, 0.0, DEFAULT_TOL).unwrap();
        assert_eq!((r.tag, r.embedding_c), (RegionTag::Gamma, None));
        assert!(matches!(classify(1.0, 9.0 * PI2 / 16.0, DEFAULT_TOL), Err(Error::InadmissibleBeta(_))));
        // Float noise above the tolerance falls off the curve.
        let p = gamma_point(Curve::Gamma2, 0.6).unwrap();
        assert_eq!(classify(p.alpha + 1e-7, p.beta, DEFAULT_TOL).unwrap().tag, RegionTag::Gamma);
    }

    #[test]
    fn round_trip_on_a_parameter_sweep() {
        for curve in Curve::ALL {
            let (lo, hi) = curve.parameter_range();
            for k in 1..50 {
                let p = lo + (hi - lo) * k as f64 / 50.0;
                let pt = gamma_point(curve, p).unwrap();
                let reg = classify(pt.alpha, pt.beta, DEFAULT_TOL).unwrap();
                assert_eq!(reg.tag, curve.into(), "{curve:?} at {p}");
                assert!((reg.embedding_c.unwrap() - embedding_speed(curve, p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monomial_second_derivative_matches_finite_differences() {
        let m = TrigMonomial { a: 0.8, b: 1.0 };
        for y in [-0.7, -0.1, 0.3, 0.85] {
            let h = 1e-4;
            let fd = (m.eval(y + h).0 - 2.0 * m.eval(y).0 + m.eval(y - h).0) / (h * h);
            assert!((fd - m.eval(y).1).abs() < 1e-6);
        }
    }

    #[test]
    fn closed_forms_solve_the_rayleigh_kuo_equation() {
        let g = chebyshev_grid(32, -1.0, 1.0).unwrap();
        let u = sinus_profile();
        let cases = [
            (Curve::Gamma1, -1.3),
            (Curve::Gamma1, 2.0),
            (Curve::Gamma2, 0.3),
            (Curve::Gamma2, 0.7),
            (Curve::Gamma3, 0.3),
            (Curve::Gamma3, 0.45),
            (Curve::Gamma4, 0.3),
            (Curve::Gamma4, 0.375),
        ];
        for (curve, p) in cases {
            let pt = gamma_point(curve, p).unwrap();
            let cf = closed_form_eigenpair(curve, p, &g).unwrap();
            let m = cf.monomial;
            let res = embedding_candidate_residual_exact(&u, pt.alpha, pt.beta, cf.c, |y| m.eval(y), cf.validity, 500).unwrap();
            assert!(res < 1e-10, "{curve:?} {p}: {res}");
        }
        let cf = closed_form_eigenpair(Curve::Gamma2, 0.5, &g).unwrap();
        for (i, &y) in g.nodes.iter().enumerate() {
            assert!((cf.phi.values[i].re - (PI * y / 2.0).cos()).abs() < 1e-15);
        }
        let cf = closed_form_eigenpair(Curve::Gamma4, 0.375, &g).unwrap();
        assert_eq!((cf.c, cf.validity), (1.0, (0.0, 1.0)));
    }

    #[test]
    fn scan_tags_and_ordering() {
        let one = scan_atlas((PI, PI), (0.0, 0.0), 1, 1, 32).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].tag, RegionTag::Gamma);
        let a = resonant_alpha();
        let row = scan_atlas((a, a), (-PI2 / 2.0 + 0.5, PI2 / 2.0 - 0.5), 1, 5, 32).unwrap();
        assert!(row.iter().all(|c| c.tag == RegionTag::Gamma1));
        let grid = scan_atlas((0.5, 1.0), (-1.0, 0.0), 2, 2, 64).unwrap();
        let order: Vec<(f64, f64)> = grid.iter().map(|c| (c.alpha, c.beta)).collect();
        assert_eq!(order, vec![(0.5, -1.0), (0.5, 0.0), (1.0, -1.0), (1.0, 0.0)]);
        assert!(grid[1].growth_rate > 0.0);
    }
}
