import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elastocorner.domain import (ConvexPolygon, DensityProfile, ElasticMedium, GeometryError,
                                 MediumError, ProbeDirection, Sector, SourceModel,
                                 choose_probe_direction, far_field_split, unit, wavenumbers)


@pytest.mark.parametrize("lam, mu, omega, kp, ks", [
    (0.0, 1.0, 2.0, math.sqrt(2.0), 2.0),
    (2.0, 1.0, 2.0, 1.0, 2.0),
    (-0.5, 1.0, 1.0, 1 / math.sqrt(1.5), 1.0),
])
def test_wavenumbers(lam, mu, omega, kp, ks):
    m = ElasticMedium(lam, mu, omega, DensityProfile.constant())
    assert wavenumbers(m) == pytest.approx((kp, ks), rel=1e-15)


@pytest.mark.parametrize("lam, mu", [(0.0, 0.0), (1.0, -1.0), (-1.0, 1.0), (-2.0, 1.0)])
def test_strong_convexity_rejected(lam, mu):
    with pytest.raises(MediumError):
        ElasticMedium(lam, mu, 1.0)


@given(mu=st.floats(0.01, 10), excess=st.floats(1e-3, 10), omega=st.floats(0.1, 50))
def test_kp_below_ks(mu, excess, omega):
    kp, ks = wavenumbers(ElasticMedium(excess - mu, mu, omega))
    assert 0 < kp < ks and math.isfinite(ks)


def test_medium_roundtrip():
    m = ElasticMedium(0.5, 2.0, 3.0, DensityProfile.bump(0.2, 0.9))
    assert ElasticMedium.from_dict(m.to_dict()) == m


class TestDensity:
    def test_bump_reaches_one_with_two_derivatives(self):
        rho = DensityProfile.bump(0.3, 1.0)
        r = np.array([0.999999, 1.0, 1.5])
        x = np.stack([r, 0 * r], -1)
        assert rho.value(x)[1:] == pytest.approx([1.0, 1.0], abs=0)
        assert rho.value(x)[0] - 1 < 1e-15
        assert np.abs(rho.gradient(x)).max() < 1e-10
        # the second derivative also vanishes at r = 1, linearly in the offset
        g = lambda r: rho.gradient(np.array([[r, 0.0]]))[0, 0]
        d2 = [abs((g(1 - h) - g(1 - 2 * h)) / h) for h in (1e-3, 1e-4)]
        assert d2[1] < 0.2 * d2[0]

    @given(st.floats(-0.99, 5.0), st.floats(-2, 2), st.floats(-2, 2))
    def test_positive(self, a, x, y):
        assert DensityProfile.bump(a).value(np.array([x, y])) > 0

    def test_gradient_matches_finite_difference(self):
        rho = DensityProfile.bump(0.3, 1.0)
        x = np.array([0.3, -0.4])
        h = 1e-6
        fd = [(rho.value(x + h * e) - rho.value(x - h * e)) / (2 * h) for e in np.eye(2)]
        assert rho.gradient(x) == pytest.approx(fd, abs=1e-8)

    def test_grid_sampled_forced_to_one_outside(self):
        ax = np.linspace(-1, 1, 33)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        s = 1 + 0.2 * np.clip(1 - X ** 2 - Y ** 2, 0, None) ** 3
        rho = DensityProfile("grid-sampled", 1.0, samples=s)
        assert rho.value(np.array([1.2, 0.0])) == 1.0
        assert rho.value(np.array([0.0, 0.0])) == pytest.approx(1.2, rel=1e-3)

    def test_from_dict_defaults(self):
        assert DensityProfile.from_dict({"kind": "radial-bump"}) == DensityProfile()
        assert DensityProfile.from_dict({"kind": "constant-one"}).is_homogeneous

    def test_bad_amplitude(self):
        with pytest.raises(MediumError):
            DensityProfile.bump(-1.0)


class TestGeometry:
    @pytest.mark.parametrize("tm, tM", [(0, math.pi), (0, 0), (1.0, 0.5), (0, 4.0)])
    def test_degenerate_sector(self, tm, tM):
        with pytest.raises(GeometryError):
            Sector([0, 0], tm, tM, 1.0)

    def test_sector_contains(self):
        s = Sector([0.1, 0.1], 0.0, math.pi / 2, 0.5)
        assert s.contains(np.array([[0.3, 0.3], [0.0, 0.3], [0.6, 0.6]])).tolist() == \
            [True, False, False]

    def test_polygon_convexity_and_sectors(self):
        tri = ConvexPolygon(np.array([[-0.5, -0.4], [0.6, -0.3], [0.0, 0.6]]))
        assert tri.area() > 0
        for i in range(3):
            s = tri.sector_at(i, 0.1)
            assert 0 < s.opening < math.pi
        # interior angles of a triangle sum to pi
        assert sum(tri.sector_at(i, 0.1).opening for i in range(3)) == pytest.approx(math.pi)
        with pytest.raises(GeometryError):
            ConvexPolygon(np.array([[0, 0], [1, 0], [2, 0]]))
        with pytest.raises(GeometryError):
            ConvexPolygon(np.array([[0, 0], [2, 0], [1, 0.2], [1, 2]]))


class TestProbe:
    @pytest.mark.parametrize("tm, tM, d, delta", [
        (0, math.pi / 2, (-math.sqrt(0.5), -math.sqrt(0.5)), math.sqrt(0.5)),
        (-math.pi / 6, math.pi / 6, (-1.0, 0.0), math.sqrt(3) / 2),
    ])
    def test_bisector_choice(self, tm, tM, d, delta):
        p = choose_probe_direction(Sector([0, 0], tm, tM, 1.0))
        assert p.d == pytest.approx(d, abs=1e-15)
        assert p.delta == pytest.approx(delta, rel=1e-15)

    @given(st.floats(-math.pi, math.pi), st.floats(0.05, math.pi - 0.05))
    def test_margin_holds(self, tm, opening):
        s = Sector([0, 0], tm, tm + opening, 1.0)
        p = choose_probe_direction(s)
        th = np.linspace(s.theta_m, s.theta_M, 101)
        proj = unit(th) @ p.d
        assert np.all(proj <= -p.delta + 1e-12) and np.all(proj >= -1 - 1e-12)
        assert abs(p.d @ p.d_perp) < 1e-15

    def test_probe_delta_range(self):
        ProbeDirection(0.0, 0.0)
        with pytest.raises(GeometryError):
            ProbeDirection(0.0, 1.0)


class TestSource:
    def test_vanishes_outside(self):
        s = Sector([0, 0], 0, math.pi / 2, 0.5)
        f = SourceModel(s, value=[1, 2], gradient=[[1, 0], [0, 1]])
        assert f.value_at(np.array([-0.1, 0.1])) == pytest.approx([0, 0])
        assert f.value_at(np.array([0.1, 0.1])) == pytest.approx([1.1, 2.1])

    def test_holder_remainder(self):
        rng = np.random.default_rng(0)
        s = Sector([0, 0], 0.2, 1.4, 0.5)
        H = rng.standard_normal((2, 2, 2))
        H = 0.5 * (H + H.transpose(0, 2, 1))
        f = SourceModel(s, value=[1, 0], gradient=rng.standard_normal((2, 2)), hessian=H)
        r = 0.5 * np.sqrt(rng.random(500))
        th = rng.uniform(0.2, 1.4, 500)
        y = r[:, None] * unit(th)
        rem = np.linalg.norm(f.remainder(y), axis=1)
        assert np.all(rem <= f.holder_constant * r ** 2 * (1 + 1e-12))


@pytest.mark.parametrize("u, xh, up, us", [
    ((1, 0), (1, 0), (1, 0), (0, 0)),
    ((0, 1), (1, 0), (0, 0), (0, 1)),
    ((1, 1), (math.sqrt(0.5), math.sqrt(0.5)), (1, 1), (0, 0)),
])
def test_far_field_split(u, xh, up, us):
    p, s = far_field_split(np.array(u, float), np.array(xh))
    assert p.real == pytest.approx(up, abs=1e-15)
    assert s.real == pytest.approx(us, abs=1e-15)
