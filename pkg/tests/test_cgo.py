import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastocorner.cgo import (CgoOperators, CgoThresholdError, ModifiedFundamentalSolution,
                              bilinear, make_cgo_params, solve_cgo, xi_gap)
from elastocorner.domain import DensityProfile, ElasticMedium, ProbeDirection
from elastocorner.elastic_forward import KupradzeMatrix
from elastocorner.fourier_green import build_lattice, fit_slope

BUMP = ElasticMedium()
FLAT = ElasticMedium(rho=DensityProfile.constant())
LAT = build_lattice(2.0, 64)


@pytest.fixture(scope="module")
def bump_solutions():
    probe = ProbeDirection(0.4, 0.5)
    return {t: solve_cgo(make_cgo_params(BUMP, probe, t), BUMP, LAT, radius=1.5)
            for t in (20.0, 40.0, 80.0, 160.0)}


class TestPhase:
    def test_worked_example(self):
        # mu = 1, omega = 2 gives k_s = 2
        med = ElasticMedium(1.0, 1.0, 2.0)
        p = make_cgo_params(med, ProbeDirection(0.0), 10.0)
        assert p.zeta == pytest.approx([10, 1j * math.sqrt(104)], rel=1e-15)
        assert bilinear(p.zeta, p.zeta) == pytest.approx(-4.0, abs=1e-12)
        assert p.eta == pytest.approx([-1j * math.sqrt(1.04), 1.0], rel=1e-15)
        assert abs(bilinear(p.zeta, p.eta)) < 1e-13

    def test_xi_gap_value(self):
        gap = xi_gap(1.0, 2.0, 100.0)
        assert gap == pytest.approx(3 / (math.sqrt(10001) + math.sqrt(10004)), rel=1e-15)
        assert gap == pytest.approx(0.0150, abs=5e-5)
        p = make_cgo_params(ElasticMedium(2.0, 1.0, 2.0), ProbeDirection(0.3), 100.0)
        assert abs(p.xi_t[1] - p.xi[1]) == pytest.approx(gap, rel=1e-12)
        assert gap <= 3 / 200

    @given(tau=st.floats(10, 200), theta=st.floats(-math.pi, math.pi))
    @settings(max_examples=200)
    def test_identities(self, tau, theta):
        p = make_cgo_params(BUMP, ProbeDirection(theta), tau)
        err = p.identity_errors()
        assert err["zeta.zeta+ks^2"] < 1e-12 and err["zeta.eta"] < 1e-12
        assert err["zeta~.zeta~+kp^2"] < 1e-12
        assert err["QtQ-I"] < 1e-13
        assert abs(np.linalg.det(p.Q) + 1) < 1e-13

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            make_cgo_params(BUMP, ProbeDirection(0.0), 0.0)


class TestOperators:
    def test_homogeneous_operators_vanish(self):
        ops = CgoOperators(make_cgo_params(FLAT, ProbeDirection(0.2), 20.0), FLAT, LAT)
        R, v = ops.source()
        assert not np.any(R) and not np.any(v)
        rng = np.random.default_rng(0)
        Rr = rng.standard_normal((2, LAT.M, LAT.M)) + 0j
        vr = rng.standard_normal((LAT.M, LAT.M)) + 0j
        R2, v2 = ops.apply(Rr, vr, with_eta=False)
        assert not np.any(R2) and not np.any(v2)

    @pytest.mark.parametrize("op", ["T1", "T2", "T3"])
    def test_scalar_operators_decay(self, op):
        taus = [20.0, 40.0, 80.0, 160.0]
        norms = [CgoOperators(make_cgo_params(BUMP, ProbeDirection(0.0), t), BUMP, LAT)
                 .operator_norm(1.5, op=op) for t in taus]
        assert fit_slope(taus, norms) <= -0.9

    def test_contraction_envelope(self):
        # tau ||T|| stays in a narrow band; the pointwise ratio oscillates with the lattice
        lat = build_lattice(2.0, 256)
        taus = [20.0, 40.0, 70.0, 100.0, 140.0]
        scaled = [t * CgoOperators(make_cgo_params(BUMP, ProbeDirection(0.7), t), BUMP, lat)
                  .operator_norm(1.5) for t in taus]
        assert max(scaled) < 2 * min(scaled)

    def test_adjoint(self):
        ops = CgoOperators(make_cgo_params(BUMP, ProbeDirection(0.3), 20.0), BUMP,
                           build_lattice(2.0, 16))
        rng = np.random.default_rng(5)
        M = ops.lattice.M
        c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
        R, v, Y, y = c(2, M, M), c(M, M), c(2, M, M), c(M, M)
        TR, Tv = ops.apply(R, v, with_eta=False)
        AR, Av = ops.apply_adjoint(Y, y)
        lhs = np.vdot(Y, TR) + np.vdot(y, Tv)
        assert lhs == pytest.approx(np.vdot(AR, R) + np.vdot(Av, v), rel=1e-12)

    @pytest.mark.parametrize("tau", [1.0, 2.0])
    def test_no_contraction_at_small_tau(self, tau):
        ops = CgoOperators(make_cgo_params(BUMP, ProbeDirection(0.0), tau), BUMP, LAT)
        assert ops.operator_norm(1.5) > 0.5


class TestSolve:
    def test_homogeneous_is_plane_wave(self):
        sol = solve_cgo(make_cgo_params(FLAT, ProbeDirection(1.0), 30.0), FLAT, LAT)
        assert not np.any(sol.R_samples) and not np.any(sol.v_field.samples)
        x = np.array([[0.2, -0.1], [0.5, 0.3]])
        p = sol.params
        assert np.array_equal(sol.u0(x), np.exp(x @ p.zeta)[:, None] * p.eta[None])
        assert sol.navier_residual(1.5) <= 1e-10

    def test_threshold(self):
        with pytest.raises(CgoThresholdError) as exc:
            solve_cgo(make_cgo_params(BUMP, ProbeDirection(0.0), 0.05), BUMP, LAT)
        assert exc.value.tau == 0.05

    def test_fixed_point_converged(self, bump_solutions):
        for sol in bump_solutions.values():
            assert sol.fixed_point_residual <= 1e-10
            assert sol.T_norm < 0.5

    def test_R_decays_like_inverse_tau(self, bump_solutions):
        taus = sorted(bump_solutions)
        n = [bump_solutions[t].norms(1.5) for t in taus]
        assert fit_slope(taus, [x["R"] for x in n]) == pytest.approx(-1.0, abs=0.1)
        # gradient bounded and Hessian at most linear: upper-bound form of the ladder
        assert fit_slope(taus, [x["gradR"] for x in n]) <= 0.15
        assert fit_slope(taus, [x["hessR"] for x in n]) <= 1.15

    def test_navier_residual_and_divergence(self, bump_solutions):
        for sol in bump_solutions.values():
            assert sol.navier_residual(1.5) < 1e-4
            assert sol.divergence_mismatch(1.5) < 1e-3

    def test_residual_without_R_is_the_density_term(self, bump_solutions):
        sol = bump_solutions[40.0]
        mask = LAT.disc_mask(1.5)
        res = sol.stripped_navier(include_R=False)
        eta = sol.params.eta_canonical[:, None, None]
        ops = CgoOperators(sol.params, BUMP, LAT)
        expect = BUMP.omega ** 2 * (ops.rho - 1) * eta
        assert np.abs(res - expect)[:, mask].max() < 1e-9 * np.abs(expect).max()
        assert sol.navier_residual(1.5, include_R=False) > 100 * sol.navier_residual(1.5)

    def test_point_evaluation_matches_grid(self, bump_solutions):
        sol = bump_solutions[20.0]
        idx = (slice(None), 70, 50)
        xc = LAT.grid_points()[70, 50]
        x = sol.params.Q.T @ xc
        R = sol.evaluate_R(x[None])[0]
        assert sol.params.Q @ R == pytest.approx(sol.R_samples[idx], abs=1e-12)

    def test_jacobian_matches_finite_difference(self, bump_solutions):
        sol = bump_solutions[20.0]
        x = np.array([[0.3, -0.2]])
        _, G = sol.u0(x, gradient=True)
        h = 1e-6
        for j, e in enumerate(np.eye(2)):
            fd = (sol.u0(x + h * e) - sol.u0(x - h * e)) / (2 * h)
            assert G[0, :, j] == pytest.approx(fd[0], rel=1e-6)

    def test_export(self, bump_solutions, tmp_path):
        bump_solutions[20.0].export(tmp_path / "cgo")
        assert (tmp_path / "cgo.json").exists() and (tmp_path / "cgo_R0.bin").exists()


def _navier_stencil(F, x, s, med):
    """9-point ``mu Lap + (lam+mu) grad div + omega^2`` applied to each column of ``F``."""
    o = {(a, b): F(x + s * np.array([a, b])) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    d11 = (o[1, 0] - 2 * o[0, 0] + o[-1, 0]) / s ** 2
    d22 = (o[0, 1] - 2 * o[0, 0] + o[0, -1]) / s ** 2
    d12 = (o[1, 1] - o[1, -1] - o[-1, 1] + o[-1, -1]) / (4 * s * s)
    gd = np.stack([d11[:, 0] + d12[:, 1], d12[:, 0] + d22[:, 1]], axis=1)
    return med.mu * (d11 + d22) + (med.lam + med.mu) * gd + med.omega ** 2 * o[0, 0]


def test_modified_fundamental_solution_cancels_singularity():
    # on shrinking annuli the stencil residual of Psi + Gamma stays bounded, while
    # Psi - Gamma keeps a doubled log singularity and its residual grows
    med = ElasticMedium(rho=DensityProfile.constant())
    p = make_cgo_params(med, ProbeDirection(0.3), 3.0)
    psi = ModifiedFundamentalSolution(p, med, build_lattice(2.0, 256))
    gam = KupradzeMatrix(med)
    th = np.linspace(0, 2 * math.pi, 12, endpoint=False)
    res_sum, res_diff = [], []
    for r in (0.4, 0.2):
        x = r * np.stack([np.cos(th), np.sin(th)], -1)
        res_sum.append(np.abs(_navier_stencil(lambda q: psi(q) + gam(q), x, r / 4, med)).max())
        res_diff.append(np.abs(_navier_stencil(lambda q: psi(q) - gam(q), x, r / 4, med)).max())
    assert res_sum[1] <= res_sum[0]
    assert res_diff[1] > 1.8 * res_diff[0]
    assert res_sum[1] < 0.1 * res_diff[1]
