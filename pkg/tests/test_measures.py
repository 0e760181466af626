import math

import numpy as np
import pytest

from lanemden.measures import (
    INF,
    RadialMeasure,
    ball_mass,
    ball_mass_offcenter,
    cap_fraction,
    cap_fraction_quadrature,
    from_components,
    lacunary,
    moment,
    power,
    scale_measure,
    shell,
    sphere_area,
)
from conftest import catalog


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)


class TestBallMass:
    def test_shell_inside(self):
        assert ball_mass(shell(1.0, 2.0), 2.0, 3) == 2.0

    def test_open_ball_excludes_boundary_atom(self):
        assert ball_mass(shell(1.0, 2.0), 1.0, 3) == 0.0

    def test_power_piece(self):
        assert ball_mass(power(1.0, 1.0, 0.0, 1.0), 0.5, 3) == pytest.approx(math.pi / 2, rel=1e-14)

    def test_log_case_beta_equals_n(self):
        # c |y|^-3 on [1, e) in three dimensions: 4 pi log(t)
        sigma = power(1.0, 3.0, 1.0, math.e**2)
        assert ball_mass(sigma, math.e, 3) == pytest.approx(4 * math.pi, rel=1e-14)

    def test_origin_atom_conventions(self):
        sigma = RadialMeasure(origin_mass=1.5)
        assert ball_mass(sigma, 0.0, 3) == 0.0
        assert ball_mass(sigma, 1e-9, 3) == 1.5

    def test_unbounded_total_mass(self):
        assert ball_mass(power(1.0, 1.0), INF, 3) == INF

    @pytest.mark.parametrize("name", ["shell", "ball", "global_power"])
    def test_monotone(self, name):
        t = np.geomspace(1e-3, 1e3, 64)
        m = ball_mass(catalog()[name], t, 3)
        assert np.all(np.diff(m) >= 0)

    def test_additive(self):
        a, b = shell(0.7, 1.3), power(2.0, 0.5, 0.1, 3.0)
        t = np.geomspace(1e-2, 10, 40)
        np.testing.assert_allclose(ball_mass(a + b, t, 3), ball_mass(a, t, 3) + ball_mass(b, t, 3), rtol=1e-12)


class TestMoment:
    def test_shell(self):
        assert moment(shell(2.0, 3.0), 1.0, 1.0, 3.0, 3) == pytest.approx(1.5)

    def test_log_antiderivative(self):
        sigma = power(1.0, 1.0, math.exp(-1), 1.0)
        assert moment(sigma, 2.0, 0.0, 1.0, 3) == pytest.approx(4 * math.pi, rel=1e-14)

    def test_origin_atom_diverges(self):
        assert moment(RadialMeasure(origin_mass=1.0), 1.0, 0.0, 1.0, 3) == INF

    def test_tail_of_power(self):
        # 4 pi int_1^inf r^2 r^-2 r^-2 dr
        assert moment(power(1.0, 2.0, 1.0), 2.0, 1.0, INF, 3) == pytest.approx(4 * math.pi)

    def test_log_divergent_tail(self):
        assert moment(power(1.0, 1.0, 1.0), 2.0, 1.0, INF, 3) == INF

    @pytest.mark.parametrize("name", ["shell", "ball", "global_power"])
    def test_zero_order_moment_is_ball_mass(self, name):
        sigma = catalog()[name]
        for t in (0.3, 1.0, 2.5):
            assert moment(sigma, 0.0, 0.0, t, 3) == pytest.approx(ball_mass(sigma, t, 3), rel=1e-13)


class TestOffCenter:
    def test_cap_example(self):
        assert ball_mass_offcenter(shell(1.0, 1.0), 1.0, 1.0, 3) == pytest.approx(0.25, rel=1e-12)

    @pytest.mark.parametrize("name", ["shell", "ball", "global_power"])
    def test_centered_reduces(self, name):
        sigma = catalog()[name]
        t = np.geomspace(0.05, 5, 9)
        np.testing.assert_allclose(ball_mass_offcenter(sigma, 0.0, t, 3), ball_mass(sigma, t, 3), rtol=1e-10)

    def test_full_containment(self):
        sigma = power(1.0, 0.5, 0.0, 1.0) + shell(0.5, 2.0)
        total = ball_mass(sigma, 2.0, 3)
        assert ball_mass_offcenter(sigma, 0.7, 1.8, 3) == pytest.approx(total, rel=1e-12)

    def test_nondecreasing_in_t(self):
        sigma = power(1.0, 1.2, 0.0, 2.0) + shell(1.0, 1.0)
        t = np.linspace(0.05, 3.5, 40)
        m = np.asarray(ball_mass_offcenter(sigma, 0.9, t, 3))
        assert np.all(np.diff(m) >= -1e-12 * m[1:])

    def test_uniform_ball_lens_volume(self):
        # intersection of two unit balls at distance 1: 5 pi / 12
        v = ball_mass_offcenter(power(1.0, 0.0, 0.0, 1.0), 1.0, 1.0, 3)
        assert v == pytest.approx(5 * math.pi / 12, rel=1e-8)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("c", [-0.9, -0.3, 0.0, 0.4, 0.95])
    def test_cap_fraction_matches_quadrature(self, n, c):
        assert cap_fraction(c, n) == pytest.approx(cap_fraction_quadrature(c, n), rel=1e-9, abs=1e-14)


class TestScaling:
    def test_identity_and_linearity(self):
        s = shell(1.0, 2.0)
        assert scale_measure(s, 1.0) == s
        assert scale_measure(s, 3.0).atoms[0].mass == 6.0

    def test_ball_mass_homogeneous(self):
        sigma = power(1.0, 1.5) + shell(0.4, 0.3)
        t = np.geomspace(0.1, 10, 12)
        np.testing.assert_allclose(ball_mass(scale_measure(sigma, 2.5), t, 3), 2.5 * ball_mass(sigma, t, 3), rtol=1e-14)


class TestConstruction:
    def test_from_components(self):
        sigma = from_components([
            {"power": {"c": 1, "beta": 1.5, "a": 0, "b": "inf"}},
            {"shell": {"rho": 1, "m": 2}},
            {"origin": {"m0": 0.5}},
        ])
        assert sigma.pieces[0].outer == INF
        assert sigma.atoms[0].mass == 2 and sigma.origin_mass == 0.5

    def test_unknown_component(self):
        with pytest.raises(ValueError):
            from_components([{"cloud": {}}])

    def test_local_finiteness(self):
        with pytest.raises(ValueError):
            power(1.0, 3.0).check_dimension(3)

    def test_lacunary_weights(self):
        lac = lacunary(1.0, 10)
        assert len(lac.atoms) == 10
        assert moment(lac, 1.0, 0.0, 1.0, 3) == pytest.approx(sum(1 / k**2 for k in range(1, 11)))

    def test_restrict(self):
        sigma = power(1.0, 0.0) + shell(2.0, 1.0)
        part = sigma.restrict(1.5)
        assert ball_mass(part, 10.0, 3) == pytest.approx(4 * math.pi * 1.5**3 / 3)


def test_power_integral_tiny_lower_end():
    from lanemden.measures import power_integral

    assert power_integral(2.0, 1e-220, 0.5) == pytest.approx(0.5**3 / 3, rel=1e-14)
    assert ball_mass(power(1.0, 0.0, 1e-220, 0.5), 1.0, 3) == pytest.approx(4 * math.pi * 0.5**3 / 3, rel=1e-14)
