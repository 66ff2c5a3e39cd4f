use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use betaplane::atlas::{classify, gamma_point, Curve, DEFAULT_TOL};
use betaplane::fieldops::{inner_product, sobolev_norm};
use betaplane::rayleighkuo::{solve_bvp, BvpProblem};
use betaplane::spectra::{sl_spectrum, SlProblem};
use betaplane::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn sine_series(grid: &Arc<Grid>, coeffs: &[(f64, f64)]) -> ComplexField {
    let (a, l) = (grid.y1, grid.length());
    ComplexField::from_fn(grid.clone(), |y| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &(re, im))| Complex64::new(re, im) * (((k + 1) as f64) * PI * (y - a) / l).sin())
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn norm_chain(c in coeffs(), alpha in 0.2..4.0f64) {
        let g = chebyshev_grid(64, 0.0, 1.0).unwrap();
        let w = sine_series(&g, &c);
        let norms: Vec<f64> = (-2..=2).map(|k| sobolev_norm(&w, k, alpha).unwrap()).collect();
        for j in 0..5 {
            for k in j + 1..5 {
                let lhs = alpha.powi((k - j) as i32) * norms[j];
                prop_assert!(lhs <= norms[k] * (1.0 + 1e-10), "j={} k={}: {} > {}", j, k, lhs, norms[k]);
            }
        }
    }

    #[test]
    fn helmholtz_inverse_is_self_adjoint(c1 in coeffs(), c2 in coeffs(), alpha in 0.2..4.0f64) {
        let g = chebyshev_grid(64, -1.0, 1.0).unwrap();
        let (f, h) = (sine_series(&g, &c1), sine_series(&g, &c2));
        let s = HelmholtzSolver::new(g.clone(), alpha).unwrap();
        let lhs = inner_product(&s.solve(&f).unwrap(), &h).unwrap();
        let rhs = inner_product(&f, &s.solve(&h).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn bvp_residual_is_small_off_the_axis(
        c in coeffs(),
        cre in -0.5..1.5f64,
        cim in 0.05..1.0f64,
        beta in -2.0..2.0f64,
        alpha in 0.5..3.0f64,
        n in 24usize..=64,
    ) {
        let p = make_profile("sinus", &BTreeMap::new()).unwrap();
        let g = chebyshev_grid(n, -1.0, 1.0).unwrap();
        let w = sine_series(&g, &c);
        let prob = BvpProblem { profile: p, alpha, beta, c: Complex64::new(cre, cim), forcing: w.clone() };
        let sol = solve_bvp(&prob, &g).unwrap();
        prop_assert!(sol.residual_sup < 1e-9 * (1.0 + w.sup_norm()));
        prop_assert!(sol.phi.values[0].norm() == 0.0 && sol.phi.values[n].norm() == 0.0);
    }

    #[test]
    fn curve_round_trip(t in 0.001..0.999f64, k in 0usize..4) {
        let curve = Curve::ALL[k];
        let (lo, hi) = curve.parameter_range();
        let pt = gamma_point(curve, lo + (hi - lo) * t).unwrap();
        prop_assert_eq!(classify(pt.alpha, pt.beta, DEFAULT_TOL).unwrap().tag, curve.into());
    }

    #[test]
    fn potential_shift_shifts_eigenvalues(kappa in -5.0..5.0f64) {
        let g = chebyshev_grid(40, 0.0, 1.0).unwrap();
        let base = sl_spectrum(&SlProblem::regular(|y: f64| 4.0 * y * y, 0.0, 1.0, 3), &g).unwrap();
        let moved = sl_spectrum(&SlProblem::regular(move |y: f64| 4.0 * y * y + kappa, 0.0, 1.0, 3), &g).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!((b - a - kappa).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }
}
