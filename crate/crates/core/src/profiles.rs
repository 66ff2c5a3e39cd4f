//! Channel shear profiles `u(y)` with exact derivatives, plus the
//! profile-level predicates used throughout the crate: critical points,
//! the depletion set, Kuo's sign condition, the Pedlosky semicircle and
//! the nondegeneracy condition at critical points.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sub-intervals used to bracket sign changes of `u'`.
const ROOT_SCAN: usize = 2048;
/// Absolute tolerance in `y` for refined critical points.
const ROOT_TOL: f64 = 1e-12;
/// Sample count for dense checks (Kuo condition, monotone floor).
const DENSE_SAMPLE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `u(y) = y`.
    Couette,
    /// `u(y) = (1 + cos(pi y)) / 2`.
    Sinus,
    /// `u(y) = sum_k coeffs[k] y^k`.
    Poly { coeffs: Vec<f64> },
    /// `k (u(y + shift) - u(shift))` for a base profile.
    Rescaled {
        base: Box<ProfileKind>,
        k: f64,
        shift: f64,
    },
}

/// An analytic base flow `(u(y), 0)` on the channel `[y1, y2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile {
    pub name: String,
    pub kind: ProfileKind,
    pub y1: f64,
    pub y2: f64,
    /// `c0 > 0` with `u' >= c0`, present only for monotone profiles.
    pub monotone_floor: Option<f64>,
    /// Length `L` of the x-period `2 pi / L`.
    pub period_scale: Option<f64>,
}

fn take_param(params: &mut BTreeMap<String, f64>, key: &str) -> Option<f64> {
    params.remove(key)
}

/// Builds a named profile. `params` holds reals only; polynomial
/// coefficients are passed as `c0, c1, ...` together with `y1`, `y2`.
pub fn make_profile(name: &str, params: &BTreeMap<String, f64>) -> Result<ShearProfile> {
    let mut params = params.clone();
    let period_scale = take_param(&mut params, "period");
    if let Some(l) = period_scale {
        if !(l > 0.0) {
            return Err(Error::InvalidProfile(format!("period must be positive, got {l}")));
        }
    }
    let profile = match name {
        "couette" => ShearProfile {
            name: "couette".into(),
            kind: ProfileKind::Couette,
            y1: 0.0,
            y2: 1.0,
            monotone_floor: Some(1.0),
            period_scale,
        },
        "sinus" => ShearProfile {
            name: "sinus".into(),
            kind: ProfileKind::Sinus,
            y1: -1.0,
            y2: 1.0,
            monotone_floor: None,
            period_scale,
        },
        "poly" => {
            let y1 = take_param(&mut params, "y1")
                .ok_or_else(|| Error::InvalidProfile("poly requires y1".into()))?;
            let y2 = take_param(&mut params, "y2")
                .ok_or_else(|| Error::InvalidProfile("poly requires y2".into()))?;
            if !(y1 < y2) || !y1.is_finite() || !y2.is_finite() {
                return Err(Error::DegenerateDomain(y1, y2));
            }
            let mut coeffs = Vec::new();
            while let Some(c) = take_param(&mut params, &format!("c{}", coeffs.len())) {
                coeffs.push(c);
            }
            if coeffs.is_empty() {
                return Err(Error::InvalidProfile("poly requires coefficients c0, c1, ...".into()));
            }
            let mut p = ShearProfile {
                name: "poly".into(),
                kind: ProfileKind::Poly { coeffs },
                y1,
                y2,
                monotone_floor: None,
                period_scale,
            };
            p.monotone_floor = p.sampled_monotone_floor();
            p
        }
        other => return Err(Error::UnknownProfile(other.to_string())),
    };
    if let Some(key) = params.keys().next() {
        return Err(Error::InvalidProfile(format!(
            "unknown parameter `{key}` for profile {name}"
        )));
    }
    Ok(profile)
}

fn poly_eval(coeffs: &[f64], z: Complex64, order: usize) -> Complex64 {
    // Horner on the `order`-th derivative.
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if k < order {
            break;
        }
        let mut falling = 1.0;
        for j in 0..order {
            falling *= (k - j) as f64;
        }
        acc = acc * z + c * falling;
    }
    acc
}

fn kind_eval(kind: &ProfileKind, z: Complex64, order: usize) -> Complex64 {
    match kind {
        ProfileKind::Couette => match order {
            0 => z,
            1 => Complex64::new(1.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        },
        ProfileKind::Sinus => {
            let arg = z * PI;
            let p = PI.powi(order as i32) / 2.0;
            match order % 4 {
                0 if order == 0 => (Complex64::new(1.0, 0.0) + arg.cos()) / 2.0,
                0 => arg.cos() * p,
                1 => -arg.sin() * p,
                2 => -arg.cos() * p,
                _ => arg.sin() * p,
            }
        }
        ProfileKind::Poly { coeffs } => poly_eval(coeffs, z, order),
        ProfileKind::Rescaled { base, k, shift } => {
            let shifted = z + *shift;
            if order == 0 {
                (kind_eval(base, shifted, 0) - kind_eval(base, Complex64::new(*shift, 0.0), 0)) * *k
            } else {
                kind_eval(base, shifted, order) * *k
            }
        }
    }
}

impl ShearProfile {
    /// `u^(order)(y)` for `order` in `0..=4`.
    pub fn eval(&self, y: f64, order: usize) -> f64 {
        debug_assert!(order <= 4);
        kind_eval(&self.kind, Complex64::new(y, 0.0), order).re
    }

    /// Analytic continuation of `u^(order)` to complex `z`.
    pub fn eval_complex(&self, z: Complex64, order: usize) -> Complex64 {
        kind_eval(&self.kind, z, order)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.y1, self.y2)
    }

    pub fn length(&self) -> f64 {
        self.y2 - self.y1
    }

    fn sample_points(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let h = self.length() / n as f64;
        (0..=n).map(move |i| if i == n { self.y2 } else { self.y1 + h * i as f64 })
    }

    fn sampled_monotone_floor(&self) -> Option<f64> {
        let min = self
            .sample_points(DENSE_SAMPLE)
            .map(|y| self.eval(y, 1))
            .fold(f64::INFINITY, f64::min);
        (min > 0.0).then_some(min)
    }

    /// `max |u'|` over a dense sample.
    pub fn max_abs_derivative(&self, order: usize) -> f64 {
        self.sample_points(DENSE_SAMPLE)
            .map(|y| self.eval(y, order).abs())
            .fold(0.0, f64::max)
    }

    /// The profile `k (u(y + y0) - u(y0))` on the shifted domain
    /// `[y1 - y0, y2 - y0]`.
    pub fn rescaled(&self, k: f64, y0: f64) -> ShearProfile {
        ShearProfile {
            name: format!("{}-rescaled", self.name),
            kind: ProfileKind::Rescaled {
                base: Box::new(self.kind.clone()),
                k,
                shift: y0,
            },
            y1: self.y1 - y0,
            y2: self.y2 - y0,
            monotone_floor: self.monotone_floor.map(|c| c * k).filter(|c| *c > 0.0),
            period_scale: self.period_scale,
        }
    }

    /// `(min u, max u)` over the closed domain. Extrema sit at walls or at
    /// critical points, so this is exact up to root-finding accuracy.
    pub fn range(&self) -> (f64, f64) {
        let mut lo = self.eval(self.y1, 0).min(self.eval(self.y2, 0));
        let mut hi = self.eval(self.y1, 0).max(self.eval(self.y2, 0));
        for y in self.critical_point_locations() {
            let v = self.eval(y, 0);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Real roots of `u(y) = c` in the closed domain, with `u'` at each.
    pub fn level_crossings(&self, c: f64) -> Vec<(f64, f64)> {
        let f = |y: f64| self.eval(y, 0) - c;
        let df = |y: f64| self.eval(y, 1);
        refine_roots(self.y1, self.y2, f, df, true)
            .into_iter()
            .map(|y| (y, df(y)))
            .collect()
    }

    /// Zeros of `u'` in the closed domain, walls included.
    pub fn critical_point_locations(&self) -> Vec<f64> {
        let f = |y: f64| self.eval(y, 1);
        let df = |y: f64| self.eval(y, 2);
        let scale = self.max_abs_derivative(1).max(1.0);
        let mut roots = refine_roots(self.y1, self.y2, f, df, false);
        for wall in [self.y1, self.y2] {
            if f(wall).abs() <= 1e-10 * scale && !roots.iter().any(|r| (r - wall).abs() < 1e-9) {
                roots.push(wall);
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }
}

/// Sign-change roots of `f` on `[a, b]`, bracketed on a uniform scan and
/// refined by bisection then safeguarded Newton. With `include_touching`
/// exact zeros at sample points count even without a sign change.
fn refine_roots(
    a: f64,
    b: f64,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    include_touching: bool,
) -> Vec<f64> {
    let h = (b - a) / ROOT_SCAN as f64;
    let ys: Vec<f64> = (0..=ROOT_SCAN)
        .map(|i| if i == ROOT_SCAN { b } else { a + h * i as f64 })
        .collect();
    let fs: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|x| (x - r).abs() < 1e-9) {
            roots.push(r);
        }
    };
    for i in 0..ROOT_SCAN {
        let (ya, yb) = (ys[i], ys[i + 1]);
        let (fa, fb) = (fs[i], fs[i + 1]);
        if fa == 0.0 {
            let left = if i == 0 { None } else { Some(fs[i - 1]) };
            let sign_change = left.is_some_and(|fl| fl * fb < 0.0);
            if sign_change || include_touching && (i == 0 || left.is_some()) {
                push(ya, &mut roots);
            }
            continue;
        }
        if i + 1 == ROOT_SCAN && fb == 0.0 && include_touching {
            push(yb, &mut roots);
            continue;
        }
        if fa * fb < 0.0 {
            push(bracketed_root(ya, yb, fa, &f, &df), &mut roots);
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

fn bracketed_root(
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
) -> f64 {
    while hi - lo > 1e-6 * (1.0 + lo.abs()) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..50 {
        let fy = f(y);
        let d = df(y);
        if fy == 0.0 {
            break;
        }
        let mut next = if d != 0.0 { y - fy / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if f(next) * flo < 0.0 {
            hi = next;
        } else {
            lo = next;
            flo = f(next);
        }
        let step = (next - y).abs();
        y = next;
        if step < ROOT_TOL {
            break;
        }
    }
    y
}

/// Critical points `u'(y) = 0` and the depletion set
/// `A = { y : u'(y) = 0, u''(y) = beta }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub critical_points: Vec<f64>,
    pub depletion_set: Vec<f64>,
    /// Roots of the weight `p(z) = prod_{y in A} (z - y)`.
    pub weight_roots: Vec<f64>,
}

impl CriticalData {
    /// `p(z)`; identically one when the depletion set is empty.
    pub fn weight(&self, z: f64) -> f64 {
        self.weight_roots.iter().map(|r| z - r).product()
    }

    pub fn weight_derivative(&self, z: f64) -> f64 {
        (0..self.weight_roots.len())
            .map(|skip| {
                self.weight_roots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, r)| z - r)
                    .product::<f64>()
            })
            .sum()
    }
}

pub fn critical_points(profile: &ShearProfile, beta: f64) -> CriticalData {
    let critical_points = profile.critical_point_locations();
    let tol_match = 1e-9 * beta.abs().max(1.0);
    let depletion_set: Vec<f64> = critical_points
        .iter()
        .copied()
        .filter(|&y| (profile.eval(y, 2) - beta).abs() <= tol_match)
        .collect();
    CriticalData {
        weight_roots: depletion_set.clone(),
        critical_points,
        depletion_set,
    }
}

/// Kuo's necessary condition for instability: `beta - u''` changes sign.
pub fn kuo_necessary(profile: &ShearProfile, beta: f64) -> bool {
    let scale = beta.abs().max(profile.max_abs_derivative(2)).max(1.0);
    let tol = 1e-12 * scale;
    let (mut pos, mut neg) = (false, false);
    for y in profile.sample_points(DENSE_SAMPLE) {
        let v = beta - profile.eval(y, 2);
        pos |= v > tol;
        neg |= v < -tol;
        if pos && neg {
            return true;
        }
    }
    false
}

/// Center and radius of the disk that contains every unstable wave speed.
pub fn pedlosky_semicircle(profile: &ShearProfile, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveWavenumber(alpha));
    }
    let (lo, hi) = profile.range();
    Ok((0.5 * (lo + hi), 0.5 * (hi - lo) + beta.abs() / (2.0 * alpha * alpha)))
}

/// Nondegeneracy at critical points: at every one `u'' != 0` and `beta / u'' < 9/8`.
/// The comparison keeps a 1e-12 margin so the closed end of the band fails.
pub fn h1_hypothesis_check(profile: &ShearProfile, beta: f64) -> bool {
    profile.critical_point_locations().into_iter().all(|yc| {
        let upp = profile.eval(yc, 2);
        upp.abs() > 1e-12 && beta / upp < 9.0 / 8.0 - 1e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(name: &str) -> ShearProfile {
        make_profile(name, &BTreeMap::new()).unwrap()
    }

    fn poly(coeffs: &[f64], y1: f64, y2: f64) -> ShearProfile {
        let mut p: BTreeMap<String, f64> =
            coeffs.iter().enumerate().map(|(k, c)| (format!("c{k}"), *c)).collect();
        p.insert("y1".into(), y1);
        p.insert("y2".into(), y2);
        make_profile("poly", &p).unwrap()
    }

    #[test]
    fn builtin_values() {
        let s = named("sinus");
        assert_eq!(s.eval(0.0, 0), 1.0);
        assert!((s.eval(0.0, 2) + PI * PI / 2.0).abs() < 1e-14);
        let c = named("couette");
        assert_eq!(c.eval(0.3, 1), 1.0);
        assert_eq!(c.monotone_floor, Some(1.0));
    }

    #[test]
    fn sinus_identities() {
        let s = named("sinus");
        let beta = 1.7;
        let mut worst_u: f64 = 0.0;
        let mut worst_kuo: f64 = 0.0;
        for i in 0..=10_000 {
            let y = -1.0 + 2.0 * i as f64 / 10_000.0;
            let u = s.eval(y, 0);
            worst_u = worst_u.max((u - (PI * y / 2.0).cos().powi(2)).abs());
            let lhs = beta - s.eval(y, 2);
            let rhs = PI * PI * (u - 0.5 + beta / (PI * PI));
            worst_kuo = worst_kuo.max((lhs - rhs).abs());
        }
        assert!(worst_u < 1e-14, "{worst_u}");
        assert!(worst_kuo < 1e-12, "{worst_kuo}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = named("sinus");
        let p = poly(&[0.3, 1.0, -0.2, 0.5, 0.1], -0.5, 1.5);
        let h = 1e-4;
        for prof in [&s, &p] {
            for &y in &[-0.3, 0.2, 0.77] {
                for k in 0..4 {
                    let fd = (prof.eval(y + h, k) - prof.eval(y - h, k)) / (2.0 * h);
                    let exact = prof.eval(y, k + 1);
                    assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{k} {fd} {exact}");
                }
            }
        }
    }

    #[test]
    fn complex_continuation_agrees_on_the_axis() {
        let s = named("sinus");
        let z = Complex64::new(0.3, 0.0);
        for k in 0..=4 {
            assert!((s.eval_complex(z, k).re - s.eval(0.3, k)).abs() < 1e-15);
        }
        // Cauchy-Riemann: d/dz u along the imaginary direction.
        let h = 1e-6;
        let z = Complex64::new(0.2, 0.1);
        let fd = (s.eval_complex(z + Complex64::new(0.0, h), 0)
            - s.eval_complex(z - Complex64::new(0.0, h), 0))
            / Complex64::new(0.0, 2.0 * h);
        assert!((fd - s.eval_complex(z, 1)).norm() < 1e-8);
    }

    #[test]
    fn profile_errors() {
        assert!(matches!(
            make_profile("jet", &BTreeMap::new()),
            Err(Error::UnknownProfile(_))
        ));
        let mut p = BTreeMap::new();
        p.insert("c0".to_string(), 1.0);
        p.insert("y1".to_string(), 1.0);
        p.insert("y2".to_string(), 1.0);
        assert!(matches!(make_profile("poly", &p), Err(Error::DegenerateDomain(..))));
        let mut q = BTreeMap::new();
        q.insert("width".to_string(), 1.0);
        assert!(matches!(make_profile("sinus", &q), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn sinus_critical_data() {
        let s = named("sinus");
        let d = critical_points(&s, PI * PI / 2.0);
        assert_eq!(d.critical_points.len(), 3);
        for (got, want) in d.critical_points.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(d.depletion_set.len(), 2);
        assert!((d.weight(0.5) - (0.25 - 1.0)).abs() < 1e-12);

        let d = critical_points(&s, -PI * PI / 2.0);
        assert_eq!(d.depletion_set.len(), 1);
        assert!(d.depletion_set[0].abs() < 1e-12);
        assert!((d.weight(0.3) - 0.3).abs() < 1e-12);

        assert!(critical_points(&named("couette"), 3.0).critical_points.is_empty());
    }

    #[test]
    fn critical_points_of_polynomials() {
        // u' = (y - 0.2)(y + 0.4) * 3 has two simple roots.
        let p = poly(&[0.0, -0.24, 0.3, 1.0], -1.0, 1.0);
        let d = critical_points(&p, 0.0);
        assert_eq!(d.critical_points.len(), 2);
        assert!((d.critical_points[0] + 0.4).abs() < 1e-12);
        assert!((d.critical_points[1] - 0.2).abs() < 1e-12);
        for &y in &d.critical_points {
            assert!(p.eval(y, 1).abs() < 1e-10);
        }
        assert!(p.monotone_floor.is_none());
        let m = poly(&[0.0, 1.0, 0.25], 0.0, 1.0);
        assert!((m.monotone_floor.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kuo_condition() {
        assert!(!kuo_necessary(&named("couette"), 1.0));
        assert!(kuo_necessary(&named("sinus"), 0.0));
        assert!(!kuo_necessary(&named("sinus"), PI * PI));
    }

    #[test]
    fn semicircle() {
        let (c, r) = pedlosky_semicircle(&named("couette"), 1.0, 0.0).unwrap();
        assert!((c - 0.5).abs() < 1e-15 && (r - 0.5).abs() < 1e-15);
        let (c, r) = pedlosky_semicircle(&named("sinus"), 1.0, 2.0).unwrap();
        assert!((c - 0.5).abs() < 1e-12 && (r - 1.5).abs() < 1e-12);
        let (c, r) = pedlosky_semicircle(&named("sinus"), 2.0, -4.0).unwrap();
        assert!((c - 0.5).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        assert!(pedlosky_semicircle(&named("sinus"), 0.0, 1.0).is_err());
    }

    #[test]
    fn h1() {
        let s = named("sinus");
        assert!(h1_hypothesis_check(&s, 0.0));
        assert!(!h1_hypothesis_check(&s, PI * PI * 9.0 / 16.0));
        assert!(!h1_hypothesis_check(&s, -PI * PI * 9.0 / 16.0));
        assert!(h1_hypothesis_check(&s, PI * PI * 0.55));
        assert!(h1_hypothesis_check(&named("couette"), 42.0));
    }

    #[test]
    fn rescaled_profile() {
        let s = named("sinus");
        let k = 2.0 / (s.eval(0.0, 2) - 0.5);
        let r = s.rescaled(k, 0.0);
        assert_eq!(r.eval(0.0, 0), 0.0);
        assert!((r.eval(0.3, 2) - k * s.eval(0.3, 2)).abs() < 1e-12);
        assert!((r.eval(0.3, 0) - k * (s.eval(0.3, 0) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn level_crossings() {
        let s = named("sinus");
        let roots = s.level_crossings(0.5);
        assert_eq!(roots.len(), 2);
        assert!((roots[0].0 + 0.5).abs() < 1e-12 && roots[0].1 > 0.0);
        assert!((roots[1].0 - 0.5).abs() < 1e-12 && roots[1].1 < 0.0);
    }
}
