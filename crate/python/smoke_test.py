"""Smoke test for the betaplane_py extension module.

Build and install first:
    pip install --no-build-isolation ./crates/py
"""

import math

import betaplane_py as bp


def close(a, b, tol):
    assert abs(a - b) < tol, (a, b)


def main():
    n = 64
    ys = bp.grid_nodes(n, 0.0, 1.0)
    assert len(ys) == n + 1 and ys[0] == 0.0 and ys[-1] == 1.0

    # -psi'' + psi = sin(pi y) has psi = sin(pi y) / (pi^2 + 1).
    omega = [complex(math.sin(math.pi * y), 0.0) for y in ys]
    psi = bp.helmholtz_solve(omega, 0.0, 1.0, 1.0)
    lam = math.pi ** 2 + 1.0
    worst = max(abs(p - w / lam) for p, w in zip(psi, omega))
    assert worst < 1e-10, worst
    close(bp.sobolev_norm(omega, 0.0, 1.0, 0, 1.0), math.sqrt(0.5), 1e-10)

    couette = bp.Profile("couette")
    assert couette.is_monotone() and couette.range() == (0.0, 1.0)
    assert bp.discrete_spectrum(couette, 1.0, 0.5, 64) == []

    forcing = [complex((y - 1j) * (-2.0 - y * (1.0 - y))) for y in ys]
    phi = bp.solve_bvp(couette, 1.0, 0.0, 1j, forcing)
    assert max(abs(p - y * (1.0 - y)) for p, y in zip(phi, ys)) < 1e-10

    plus = bp.limiting_absorption(couette, 1.0, 0.0, 0.5, omega, "plus")
    minus = bp.limiting_absorption(couette, 1.0, 0.0, 0.5, omega, "minus")
    assert len(plus) == n + 1 and max(abs(a - b) for a, b in zip(plus, minus)) > 0.0

    alpha, beta = bp.gamma_point("gamma2", 0.3)
    assert bp.classify(alpha, beta)[0] == "gamma2"
    assert bp.classify(math.pi, 0.0) == ("Gamma", None)

    run = bp.evolve(couette, 1.0, 0.0, omega, 2.0, dt=1e-2, sample_stride=20)
    assert len(run["t"]) == 11 and run["t"][-1] == 2.0
    exact = [w * complex(math.cos(2.0 * y), -math.sin(2.0 * y)) for w, y in zip(omega, ys)]
    assert max(abs(a - b) for a, b in zip(run["final_field"], exact)) < 1e-8

    sinus = bp.Profile("sinus")
    unstable = [c for c in bp.discrete_spectrum(sinus, 0.5, 0.0, 64) if c.imag > 0]
    assert len(unstable) == 1, unstable
    print("betaplane_py smoke test: ok")


if __name__ == "__main__":
    main()
