import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import hankel1

from elastocorner.fourier_green import (PeriodicField, SpectralMultiplier, admissible_xi,
                                        apply_P, build_lattice, eval_h_xi, fit_slope,
                                        operator_norm_ladder, resolving_order)


def _random_field(lat, seed=0, comps=()):
    rng = np.random.default_rng(seed)
    shape = comps + (lat.M, lat.M)
    return PeriodicField(lat, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


class TestLattice:
    def test_small_lattice_points(self):
        lat = build_lattice(math.pi, 1)
        pts = {tuple(p) for p in lat.points.round(12)}
        assert pts == {(0.5, 0.0), (-0.5, 0.0), (0.5, -1.0), (-0.5, -1.0)}

    @pytest.mark.parametrize("N", [1, 4, 17])
    def test_half_shift_floor(self, N):
        lat = build_lattice(math.pi, N)
        assert np.abs(lat.alpha1).min() == pytest.approx(0.5, abs=1e-15)

    def test_counting(self):
        lat = build_lattice(2.0, 8)
        assert lat.spacing == pytest.approx(math.pi / 2)
        assert len(lat.points) == 256
        assert np.diff(np.sort(lat.alpha1)) == pytest.approx(np.full(15, math.pi / 2))

    def test_symmetric_under_negation(self):
        lat = build_lattice(2.0, 8)
        a1 = np.sort(lat.alpha1)
        assert a1 == pytest.approx(-a1[::-1])

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            build_lattice(2.0, 0)


class TestMultiplier:
    @given(st.floats(1.0, 500.0), st.floats(0.0, 20.0))
    @settings(max_examples=30, deadline=None)
    def test_denominator_floor(self, tau, k):
        lat = build_lattice(2.0, 16)
        m = SpectralMultiplier.build(admissible_xi(tau, k), lat)
        assert np.abs(1 / m.coefficients).min() >= math.pi * tau / lat.R_prime * (1 - 1e-12)

    def test_xi_is_null(self):
        xi = admissible_xi(30.0, 2.5)
        assert abs(np.sum(xi * xi) + 2.5 ** 2) < 1e-10

    def test_single_mode(self):
        lat = build_lattice(2.0, 16)
        xi = admissible_xi(20.0, 2 * math.pi)
        coeffs = np.zeros((lat.M, lat.M), complex)
        coeffs[3, 5] = 1.0
        f = PeriodicField.from_coefficients(lat, coeffs)
        out = apply_P(f, xi).coefficients()
        c = SpectralMultiplier.build(xi, lat).coefficients[3, 5]
        expect = np.zeros_like(coeffs)
        expect[3, 5] = c
        assert np.abs(out - expect).max() < 1e-14

    @pytest.mark.parametrize("tau", [5.0, 20.0, 80.0])
    def test_P_bound(self, tau):
        lat = build_lattice(2.0, 32)
        f = _random_field(lat, seed=int(tau))
        Pf = apply_P(f, admissible_xi(tau, 2 * math.pi))
        assert Pf.l2_norm() <= lat.R_prime / (math.pi * tau) * f.l2_norm()

    def test_ladder_slopes(self):
        lad = operator_norm_ladder([20, 40, 80, 160], 2 * math.pi)
        sP, sG, sH = lad["slopes"]
        assert sP == pytest.approx(-1.0, abs=0.1)
        assert sG == pytest.approx(0.0, abs=0.15)
        assert sH == pytest.approx(1.0, abs=0.15)
        assert np.all(lad["P"] <= lad["bound_P"] * (1 + 1e-12))

    def test_resolving_order(self):
        assert resolving_order(160.0, 2.0) == 256
        assert resolving_order(1.0, 2.0) == 2

    def test_hessian_growth_at_most_linear(self):
        lat = build_lattice(2.0, 32)
        f = _random_field(lat, seed=3)
        taus = [20.0, 40.0, 80.0, 160.0]
        ratios = [np.linalg.norm(apply_P(f, admissible_xi(t, 2 * math.pi), order=2).samples)
                  / np.linalg.norm(f.samples) for t in taus]
        assert fit_slope(taus, ratios) <= 1.0 + 0.05


class TestPeriodicField:
    def test_transform_roundtrip(self):
        lat = build_lattice(2.0, 16)
        f = _random_field(lat, comps=(2,))
        g = PeriodicField.from_coefficients(lat, f.coefficients())
        assert np.abs(g.samples - f.samples).max() < 1e-13

    def test_evaluate_matches_samples(self):
        lat = build_lattice(2.0, 16)
        f = _random_field(lat)
        pts = lat.grid_points().reshape(-1, 2)[::37]
        assert np.abs(f.evaluate(pts) - f.samples.reshape(-1)[::37]).max() < 1e-11

    def test_evaluate_derivative(self):
        lat = build_lattice(2.0, 16)
        coeffs = np.zeros((lat.M, lat.M), complex)
        coeffs[2, 1] = 1.0
        f = PeriodicField.from_coefficients(lat, coeffs)
        x = np.array([[0.3, -0.7]])
        a = np.array([lat.alpha1[2], lat.alpha2[1]])
        assert f.evaluate(x, (1, 0))[0] == pytest.approx(1j * a[0] * np.exp(1j * x[0] @ a))

    def test_csv_and_binary_roundtrip(self, tmp_path):
        lat = build_lattice(2.0, 4)
        f = _random_field(lat, comps=(2,))
        f.shift = np.array([0.0, 0.25])
        f.to_csv(tmp_path / "f.csv")
        g = PeriodicField.from_csv(tmp_path / "f.csv")
        assert np.array_equal(g.samples, f.samples) and np.array_equal(g.shift, f.shift)
        f.to_binary(tmp_path / "f.bin")
        h = PeriodicField.from_binary(tmp_path / "f.bin", lat, (2,), f.shift)
        assert np.array_equal(h.samples, f.samples)


class TestGreen:
    def test_singular_at_origin(self):
        with pytest.raises(ValueError):
            eval_h_xi(np.zeros((1, 2)), admissible_xi(5.0, 1.0), build_lattice(2.0, 8))

    def test_difference_with_hankel_is_a_helmholtz_solution(self):
        # h_xi - (i/4) H0(k|x|) is smooth, so the 5-point residual is pure stencil error
        k, lat = 2 * math.pi, build_lattice(2.0, 64)
        xi = admissible_xi(2.0, k)
        rng = np.random.default_rng(1)
        r, th = rng.uniform(0.5, 1.5, 40), rng.uniform(0, 2 * math.pi, 40)
        x = np.stack([r * np.cos(th), r * np.sin(th)], -1)
        worst = []
        for s in (0.01, 0.005):
            offs = np.array([[0, 0], [s, 0], [-s, 0], [0, s], [0, -s]])
            pts = x[:, None] + offs[None]
            v = eval_h_xi(pts, xi, lat) - 0.25j * hankel1(0, k * np.linalg.norm(pts, axis=-1))
            res = (v[:, 1:].sum(1) - 4 * v[:, 0]) / s ** 2 + k * k * v[:, 0]
            worst.append(float(np.max(np.abs(res) / np.exp((x @ xi).real))))
        assert worst[1] < 1e-2
        assert worst[1] < 0.5 * worst[0]

    def test_g_decays_at_least_like_inverse_tau(self):
        lat = build_lattice(2.0, 64)
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, (200, 2))
        x = x[np.linalg.norm(x, axis=1) > 0.5]
        taus = [20.0, 40.0, 80.0]
        g = [np.sqrt(np.mean(np.abs(eval_h_xi(x, admissible_xi(t, 1.0), lat)
                                    * np.exp(-(x @ admissible_xi(t, 1.0)))) ** 2)) for t in taus]
        assert fit_slope(taus, g) <= -0.9


def test_fit_slope_exact_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert fit_slope(x, 3 * x ** -2.5) == pytest.approx(-2.5, abs=1e-12)
