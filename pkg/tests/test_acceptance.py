"""The eleven acceptance criteria, each at its stated tolerance and time budget.

Every test appends one PASS/FAIL line that is echoed in the terminal summary.
"""
import itertools
import json
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, catalog
import oracles
from lanemden.cli import main
from lanemden.criteria import BOUNDED, DIVERGENT, check_c114, check_con2, check_limc, check_radialcond
from lanemden.exponents import derive_exponents
from lanemden.grid import RadialGrid
from lanemden.measures import lacunary, power, scale_measure, shell
from lanemden.potentials import riesz_comparable, riesz_exact, weighted_potential, wolff
from lanemden.solver import SolveConfig, monotone_solve, monotone_solve_inhom
from lanemden.verify import energy_test, growth_test, kappa_lowerbound_test, verify_profile, verify_sandwich

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
GRID = RadialGrid.logspace(1e-2, 1e2, 33)


@contextmanager
def criterion(number: int, title: str, budget: float):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.2f} s, budget {budget} s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        line = f"[{status}] criterion {number:2d}: {title} ({elapsed:.2f} s of {budget:g} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def test_exponent_algebra():
    with criterion(1, "exponent algebra", 1.0):
        qs = np.linspace(0.1, 0.9, 5)
        for q1, q2 in itertools.product(qs, qs):
            e = derive_exponents(3, 0.5, q1, q2)
            assert abs(e.gamma1 - (q1 * e.gamma2 + 1)) <= 1e-12 * e.gamma1
            assert abs(e.gamma2 - (q2 * e.gamma1 + 1)) <= 1e-12 * e.gamma2
        e = derive_exponents(3, 0.5, 0.5, 0.5)
        assert (e.gamma1, e.gamma2, e.r1, e.r2) == (2.0, 2.0, 0.5, 0.5)
        e = derive_exponents(3, 0.5, 0.5, 1 / 3)
        np.testing.assert_allclose([e.gamma1, e.gamma2, e.r1, e.r2], [9 / 5, 8 / 5, 4 / 9, 3 / 8], rtol=4e-16)


def test_shell_theorem():
    with criterion(2, "shell theorem", 5.0):
        e = derive_exponents(3, 1.0, 0.5, 0.5)
        rho = 1.0
        x = np.geomspace(1e-2, 1e2, 64)
        got = np.array([riesz_exact(shell(rho, 1.0), e, v) for v in x])
        np.testing.assert_allclose(got, np.minimum(1 / x, 1 / rho), rtol=1e-6)


def test_riesz_wolff_identity():
    with criterion(3, "Riesz potential equals d times the p = 2 Wolff potential", 10.0):
        e = derive_exponents(3, 0.5, 0.5, 0.5)
        x = np.geomspace(0.03, 30.0, 16)
        for name, sigma in catalog().items():
            riesz = np.array([riesz_exact(sigma, e, v) for v in x])
            w = np.array([wolff(sigma, e.alpha, 2.0, v, e.n) for v in x])
            np.testing.assert_allclose(riesz, e.d * w, rtol=1e-4, err_msg=name)


def test_comparability():
    with criterion(4, "exact and comparable Riesz forms within one constant", 10.0):
        x = np.geomspace(1e-2, 1e2, 64)
        for n, alpha in [(3, 0.5), (3, 1.0), (4, 1.0)]:
            e = derive_exponents(n, alpha, 0.5, 0.5)
            measures = [shell(1.0, 1.0), power(1.0, 0.0, 0.0, 1.0), power(1.0, alpha + n / 2)]
            ratios = np.concatenate([
                np.array([riesz_exact(s, e, v) for v in x]) / riesz_comparable(s, e, x) for s in measures
            ])
            assert np.all(np.isfinite(ratios)) and ratios.min() > 0
            assert max(ratios.max(), 1 / ratios.min()) < 100, (n, alpha)


def _power_cases():
    """(exponents, beta, truncated) on both sides of the band and inside it."""
    cases = []
    for n, alpha, q1, q2 in [(3, 0.5, 0.5, 0.5), (3, 0.5, 0.5, 1 / 3), (4, 1.0, 0.5, 0.5), (3, 1.0, 0.3, 0.6)]:
        e = derive_exponents(n, alpha, q1, q2)
        lo_edge, hi_edge = sorted(2 * alpha + e.d / e.gamma(i) for i in (1, 2))
        betas = [alpha, 2 * alpha + 0.4 * (lo_edge - 2 * alpha), 0.5 * (hi_edge + min(hi_edge + 0.3, n))]
        if hi_edge - lo_edge > 0.05:
            betas.append(0.5 * (lo_edge + hi_edge))
        for beta, truncated in itertools.product(betas, (False, True)):
            cases.append((e, beta, truncated))
    return cases


def test_criteria_oracle_agreement():
    with criterion(5, "criteria agree with closed-form oracles", 30.0):
        cases = _power_cases()
        assert len(cases) >= 20
        for e, beta, truncated in cases:
            sigma = power(1.0, beta, 0.0, 1.0) if truncated else power(1.0, beta)
            local = [oracles.power_local_finite(e.n, e.alpha, beta, e.gamma(i)) for i in (1, 2)]
            tail = oracles.power_tail_finite(e.n, e.alpha, beta, truncated)
            rc = check_radialcond(sigma, e)
            assert [rc.local_r1_ok, rc.local_r2_ok, rc.tail_ok] == local + [tail], (e, beta, truncated)
            limc = [s.classification for s in check_limc(sigma, e)]
            assert limc == [BOUNDED if ok else DIVERGENT for ok in local], (e, beta, truncated)
            limc_plus_tail = tail and all(local)
            c2 = all(b.holds for b in check_con2(sigma, e, GRID))
            c4 = all(b.holds for b in check_c114(sigma, e, GRID))
            assert c2 == c4 == limc_plus_tail, (e, beta, truncated, c2, c4)
        e = derive_exponents(3, 0.5, 0.5, 0.5)
        lac = lacunary(e.d * e.r1, 200)
        assert check_radialcond(lac, e).holds
        series = check_limc(lac, e)
        for K in (10, 30):
            k = series[0].radii.index(2.0**-K)
            assert series[0].ratios[k] == pytest.approx(oracles.lacunary_ratio_bruteforce(e.d, e.gamma1, K, 200), rel=1e-10)
        assert series[0].classification == DIVERGENT
        assert not any(b.holds for b in check_con2(lac, e, GRID))
        assert not any(b.holds for b in check_c114(lac, e, GRID))


def test_solver_exactness():
    with criterion(6, "single-shell solve matches the algebraic fixed point", 10.0):
        e = derive_exponents(3, 0.5, 0.5, 1 / 3)
        cfg = SolveConfig(GRID, tol=1e-10)
        for m, rho in [(1.0, 1.0), (2.0, 1.0), (0.5, 2.0), (3.0, 0.3)]:
            sigma = shell(rho, m)
            r = monotone_solve(sigma, e, cfg)
            a = m * rho**-e.d
            assert r.u(rho) == pytest.approx(a**e.gamma1, rel=1e-6)
            assert r.v(rho) == pytest.approx(a**e.gamma2, rel=1e-6)
            assert r.monotone_violation <= 1e-12
            x = r.grid.radii
            u_next = weighted_potential(sigma, r.v, e.q1, e, x)
            v_next = weighted_potential(sigma, r.u, e.q2, e, x)
            res = max(np.max(np.abs(u_next - r.u.values) / r.u.values), np.max(np.abs(v_next - r.v.values) / r.v.values))
            assert res <= 1e-7


def test_scaling_covariance():
    with criterion(7, "solutions scale with t^gamma", 20.0):
        e = derive_exponents(3, 0.5, 0.5, 1 / 3)
        for name, sigma in catalog().items():
            base = monotone_solve(sigma, e, SolveConfig(GRID))
            for t in (0.5, 2.0):
                r = monotone_solve(scale_measure(sigma, t), e, SolveConfig(GRID))
                np.testing.assert_allclose(r.u.values, t**e.gamma1 * base.u.values, rtol=1e-6, err_msg=name)
                np.testing.assert_allclose(r.v.values, t**e.gamma2 * base.v.values, rtol=1e-6, err_msg=name)


def test_sandwich_bounds():
    with criterion(8, "sandwich and profile constants finite and grid-stable", 30.0):
        e = derive_exponents(3, 0.5, 0.5, 0.5)
        cfg = SolveConfig(GRID)
        for name, sigma in catalog().items():
            rc = check_radialcond(sigma, e)
            bounded = rc.tail_ok and all(s.classification == BOUNDED for s in check_limc(sigma, e))
            r = monotone_solve(sigma, e, cfg)
            assert r.converged
            sand = verify_sandwich(r, sigma, e, GRID, cfg)
            assert sand.lower_finite, name
            if bounded:
                prof = verify_profile(r, sigma, e, GRID, cfg)
                assert sand.finite and sand.stable, name
                assert prof.finite and prof.stable, name
            for mu in (shell(1.0, 1.0), scale_measure(sigma, 0.5)):
                ri = monotone_solve_inhom(sigma, mu, mu, e, cfg)
                assert ri.converged
                assert verify_sandwich(ri, sigma, e, GRID, cfg, mu, mu).lower_finite, name


def test_inhomogeneous_oracle():
    with criterion(9, "inhomogeneous shell matches the scalar system", 5.0):
        e = derive_exponents(3, 0.5, 0.5, 0.5)
        s = shell(1.0, 1.0)
        r = monotone_solve_inhom(s, s, s, e, SolveConfig(GRID))
        U, V = oracles.inhomogeneous_shell_fixed_point()
        assert r.u(1.0) == pytest.approx(U, rel=1e-6) and r.v(1.0) == pytest.approx(V, rel=1e-6)


def test_kappa_and_capacity_screens():
    with criterion(10, "kappa bound and capacity screens", 30.0):
        e = derive_exponents(3, 0.5, 0.5, 0.5)
        assert kappa_lowerbound_test(shell(1.0, 1.0), e, 0.5, GRID).kappa >= 0.9
        for sigma in (power(1.0, 1.5), power(1.0, 1.2, 0.0, 1.0), power(1.0, 0.0, 0.0, 1.0)):
            k = kappa_lowerbound_test(sigma, e, 0.8, GRID)
            assert k.kappa > 0 and k.stable
        radii = np.geomspace(1e-3, 10.0, 9)
        for beta in (e.alpha, 2 * e.alpha, 2 * e.alpha + 0.2):
            sigma = power(1.0, beta, 0.0, 1.0)
            energy = energy_test(sigma, e, 1.0, radii).bounded
            growth = growth_test(sigma, e, [0.0, 0.5, 1.0], radii).bounded
            assert energy == growth == (beta <= 2 * e.alpha), beta


def test_cli_determinism_and_exit_codes(tmp_path):
    with criterion(11, "CLI exit codes and byte-identical reports", 10.0):
        canned = [
            ("verify", "shell_verify.json", 0, "json"),
            ("check", "origin_atom_check.json", 2, "json"),
            ("sweep", "beta_sweep.json", 2, "csv"),
        ]
        for command, name, code, fmt in canned:
            outs = []
            for k in range(2):
                out = tmp_path / f"{name}.{k}"
                assert main([command, "--config", str(SCENARIOS / name), "--format", fmt, "--output", str(out)]) == code
                outs.append(out.read_bytes())
            assert outs[0] == outs[1], name
        report = json.loads((tmp_path / "shell_verify.json.0").read_text())
        assert report["verify"]["sandwich"]["c_low"] == pytest.approx([1.0, 1.0], rel=1e-6)
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"exponents": {"n": 3, "alpha": 0.5, "q1": 1.0, "q2": 0.5},
                                   "sigma": [{"shell": {"rho": 1.0, "m": 1.0}}]}))
        assert main(["check", "--config", str(bad)]) == 1
