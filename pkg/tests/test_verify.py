import math

import numpy as np
import pytest

from lanemden.measures import ZERO, RadialMeasure, power, shell
from lanemden.solver import SolveConfig, monotone_solve, monotone_solve_inhom
from lanemden.verify import (
    domination_check,
    energy_test,
    growth_test,
    kappa_lowerbound_test,
    verify_profile,
    verify_sandwich,
)

RADII = np.geomspace(1e-3, 10, 9)


def solved(sigma, exps, grid):
    cfg = SolveConfig(grid)
    return monotone_solve(sigma, exps, cfg), cfg


class TestSandwich:
    def test_single_shell(self, e_half, grid):
        s = shell(1.0, 1.0)
        r, cfg = solved(s, e_half, grid)
        rep = verify_sandwich(r, s, e_half, grid, cfg)
        assert rep.c_low == pytest.approx((1.0, 1.0), rel=1e-6)
        assert rep.finite and rep.stable

    def test_zero_measure(self, e_half, grid):
        r, cfg = solved(ZERO, e_half, grid)
        rep = verify_sandwich(r, ZERO, e_half, grid, cfg)
        assert rep.trivial and rep.stable

    def test_global_power(self, e_half, grid):
        s = power(1.0, 1.5)
        r, cfg = solved(s, e_half, grid)
        rep = verify_sandwich(r, s, e_half, grid, cfg)
        # u = 64 pi^2/x and A = (32 pi/3) x^-1/2
        assert rep.c_low[0] == pytest.approx((32 * math.pi / 3) ** 2 / (64 * math.pi**2), rel=1e-6)
        assert rep.finite and rep.stable

    def test_inhomogeneous_lower_bound(self, e_half, grid):
        s = shell(1.0, 1.0)
        cfg = SolveConfig(grid)
        r = monotone_solve_inhom(s, s, s, e_half, cfg)
        rep = verify_sandwich(r, s, e_half, grid, cfg, s, s)
        assert rep.lower_finite and rep.stable


class TestProfile:
    def test_single_shell(self, e_half, grid):
        s = shell(1.0, 1.0)
        r, cfg = solved(s, e_half, grid)
        rep = verify_profile(r, s, e_half, grid, cfg)
        assert rep.profile_low == pytest.approx((1.0, 1.0), rel=1e-6)
        assert rep.profile_up == pytest.approx((1.0, 1.0), rel=1e-6)

    def test_compact_support_tail_constant(self, e_mixed, grid):
        s = power(1.0, 1.0, 0.0, 1.0)
        r, cfg = solved(s, e_mixed, grid)
        rep = verify_profile(r, s, e_mixed, grid, cfg)
        assert rep.finite and rep.stable
        x = r.grid.radii
        outside = x > 2.0
        from lanemden.potentials import k_potential

        ratio = r.u.values[outside] / k_potential(s, e_mixed, 1, x[outside])
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)


class TestKappa:
    def test_single_shell_is_one(self, e_half, grid):
        k = kappa_lowerbound_test(shell(1.0, 1.0), e_half, 0.5, grid)
        assert k.kappa == pytest.approx(1.0, rel=1e-9) and k.stable

    def test_degenerate_exponent_skipped(self, e_half, grid):
        assert kappa_lowerbound_test(shell(1.0, 1.0), e_half, 1e-4, grid).skipped

    @pytest.mark.parametrize("sigma", [power(1.0, 1.5), power(1.0, 1.2, 0.0, 1.0), power(1.0, 0.0, 0.0, 1.0)])
    def test_powers_positive_and_stable(self, e_mixed, grid, sigma):
        k = kappa_lowerbound_test(sigma, e_mixed, 0.8, grid)
        assert k.kappa > 0 and k.stable


class TestCapacityScreens:
    def test_critical_power_energy_bounded(self, e_half):
        assert energy_test(power(1.0, 1.0, 0.0, 1.0), e_half, 1.0, RADII).bounded

    def test_supercritical_power_energy_unbounded(self, e_half):
        assert not energy_test(power(1.0, 1.3, 0.0, 1.0), e_half, 1.0, RADII).bounded

    def test_shell_energy_constant_beyond_shell(self, e_half):
        t = energy_test(shell(1.0, 1.0), e_half, 2.0, [1.5, 3.0, 8.0])
        values = [q for _, q in t.samples]
        assert values == pytest.approx([values[0]] * 3, rel=1e-12)

    def test_critical_power_growth_constant(self, e_half):
        t = growth_test(power(1.0, 1.0, 0.0, 1.0), e_half, [0.0], np.geomspace(1e-3, 0.5, 6))
        assert t.sup == pytest.approx(2 * math.pi, rel=1e-12) and t.bounded

    def test_shell_growth_finite(self, e_half):
        assert growth_test(shell(1.0, 1.0), e_half, [0.0, 0.5, 1.0], RADII).bounded

    def test_origin_atom_fails(self, e_half):
        assert not growth_test(RadialMeasure(origin_mass=1.0), e_half, [0.0], RADII).bounded

    @pytest.mark.parametrize("beta,expected", [(0.5, True), (1.0, True), (1.2, False)])
    def test_screens_agree(self, e_half, beta, expected):
        s = power(1.0, beta, 0.0, 1.0)
        assert energy_test(s, e_half, 1.0, RADII).bounded is expected
        assert growth_test(s, e_half, [0.0, 0.5, 1.0], RADII).bounded is expected


class TestDomination:
    def test_self(self, e_half, grid):
        ok, c, _, _ = domination_check(power(1.0, 1.5), power(1.0, 1.5), e_half, grid)
        assert ok and c == pytest.approx(1.0)

    def test_shell_against_ball(self, e_half, grid):
        ok, c, _, _ = domination_check(shell(1.0, 1.0), power(1.0, 0.0, 0.0, 1.0), e_half, grid)
        assert ok and c == pytest.approx(3 / (4 * math.pi), rel=1e-9)

    def test_heavier_tail(self, e_half, grid):
        ok, c, _, _ = domination_check(power(1.0, 2.5, 1.0), shell(1.0, 1.0), e_half, grid)
        assert not ok and c == math.inf
