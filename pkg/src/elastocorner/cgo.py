"""Complex geometrical optics (CGO) solutions of the Navier equation.

Mathematical formulation
------------------------
For ``tau > 0`` and a probe direction ``d`` (with ``d_perp`` its
counter-clockwise normal) set

    zeta  = tau d + i sqrt(tau^2 + k_s^2) d_perp,    zeta . zeta = -k_s^2,
    zeta~ = tau d + i sqrt(tau^2 + k_p^2) d_perp,    zeta~ . zeta~ = -k_p^2,
    eta   = -i sqrt(1 + k_s^2/tau^2) d + d_perp,     zeta . eta = 0,

(bilinear dot products). We look for ``u0 = e^{zeta.x} (eta + R(x))`` with
``L u0 + omega^2 rho u0 = 0``. With ``v = e^{-zeta.x} div u0`` the pair
``(R, v)`` solves the fixed-point system

    R = -k_s^2 P[(1-rho)(eta+R)] - (zeta + grad) D[phi],
    v = -k_p^2 P~'[phi],
    phi = (1-rho) v - grad rho . (eta + R),

where ``P`` is convolution with ``g_zeta``, ``P~'`` is convolution with
``e^{(zeta~-zeta).y} g_zeta~(y)`` and ``D = P - P~'``. The terms carrying
``eta`` form the source ``S(eta)``; the rest is the linear operator ``T``.

All computation happens in the frame ``x' = Q x`` where ``Q`` has rows
``(-d, d_perp)``. There ``zeta`` becomes ``xi = (-tau, i s)`` and
``zeta~ - zeta = (0, i beta)`` with ``beta = s~ - s`` real, so the
modulation ``e^{(zeta~-zeta).x}`` has unit modulus and the whole system is
a composition of pointwise products and Fourier multipliers.
Fields are stored phase-stripped (the factor ``e^{zeta.x}`` is never formed).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domain import ElasticMedium, ProbeDirection
from .fourier_green import (HalfShiftLattice, PeriodicField, SpectralMultiplier,
                            eval_h_xi)

logger = logging.getLogger(__name__)

CONTRACTION_LIMIT = 0.5


class CgoThresholdError(RuntimeError):
    """The CGO fixed-point map is not a contraction at this tau."""

    def __init__(self, tau: float, norm: float):
        super().__init__(f"below CGO threshold: tau={tau:g}, measured ||T|| = {norm:.4g} "
                         f"> {CONTRACTION_LIMIT}")
        self.tau = tau
        self.norm = norm


def bilinear(a, b) -> complex:
    """Complex bilinear dot product (no conjugation)."""
    return complex(np.sum(np.asarray(a) * np.asarray(b)))


@dataclass(frozen=True)
class CgoParams:
    """Phase vectors of a CGO solution.

    ``Q`` is orthogonal with ``zeta = Q^T xi`` and ``zeta~ = Q^T xi~``.
    With ``d_perp`` the counter-clockwise normal of ``d`` this forces
    ``det Q = -1``.
    """

    tau: float
    probe: ProbeDirection
    k_p: float
    k_s: float
    zeta: np.ndarray = field(init=False, repr=False)
    zeta_t: np.ndarray = field(init=False, repr=False)
    eta: np.ndarray = field(init=False, repr=False)
    xi: np.ndarray = field(init=False, repr=False)
    xi_t: np.ndarray = field(init=False, repr=False)
    Q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        t = self.tau
        s = math.sqrt(t * t + self.k_s ** 2)
        st = math.sqrt(t * t + self.k_p ** 2)
        d, dp = self.probe.d, self.probe.d_perp
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("zeta", t * d + 1j * s * dp)
        set_("zeta_t", t * d + 1j * st * dp)
        set_("eta", -1j * math.sqrt(1 + (self.k_s / t) ** 2) * d + dp)
        set_("xi", np.array([-t, 1j * s]))
        set_("xi_t", np.array([-t, 1j * st]))
        set_("Q", np.array([-d, dp]))

    @property
    def s(self) -> float:
        return float(self.xi[1].imag)

    @property
    def beta(self) -> float:
        """``s~ - s``; the canonical-frame modulation is ``exp(i beta x2')``."""
        return float(self.xi_t[1].imag - self.xi[1].imag)

    @property
    def eta_canonical(self) -> np.ndarray:
        return self.Q @ self.eta

    def identity_errors(self) -> dict:
        """Relative errors of the algebraic identities."""
        scale = self.tau ** 2
        return {
            "zeta.zeta+ks^2": abs(bilinear(self.zeta, self.zeta) + self.k_s ** 2) / scale,
            "zeta~.zeta~+kp^2": abs(bilinear(self.zeta_t, self.zeta_t) + self.k_p ** 2) / scale,
            "zeta.eta": abs(bilinear(self.zeta, self.eta)) / self.tau,
            "QtQ-I": float(np.abs(self.Q.T @ self.Q - np.eye(2)).max()),
            "zeta-Qt.xi": float(np.abs(self.zeta - self.Q.T @ self.xi).max()) / self.tau,
        }

    def to_dict(self) -> dict:
        cplx = lambda v: [[float(z.real), float(z.imag)] for z in v]
        return {"tau": self.tau, "probe": self.probe.to_dict(), "k_p": self.k_p,
                "k_s": self.k_s, "zeta": cplx(self.zeta), "zeta_tilde": cplx(self.zeta_t),
                "eta": cplx(self.eta), "Q": self.Q.tolist()}


def make_cgo_params(medium: ElasticMedium, probe: ProbeDirection, tau: float) -> CgoParams:
    """Build and sanity-check the CGO phase vectors."""
    p = CgoParams(float(tau), probe, medium.k_p, medium.k_s)
    err = p.identity_errors()
    if max(err.values()) > 1e-10:
        raise AssertionError(f"CGO identities violated: {err}")
    return p


def xi_gap(k_p: float, k_s: float, tau: float) -> float:
    """``|xi~ - xi| = |k_s^2 - k_p^2| / (sqrt(tau^2+k_p^2) + sqrt(tau^2+k_s^2))``."""
    return abs(k_s ** 2 - k_p ** 2) / (math.sqrt(tau ** 2 + k_p ** 2) + math.sqrt(tau ** 2 + k_s ** 2))


class CgoOperators:
    """Operator bundle for the fixed-point system in the canonical frame.

    Attributes
    ----------
    one_minus_rho : ndarray (M, M)
    grad_rho : ndarray (2, M, M)
        Canonical-frame gradient of the density.
    """

    def __init__(self, params: CgoParams, medium: ElasticMedium, lattice: HalfShiftLattice):
        self.params, self.medium, self.lattice = params, medium, lattice
        Q = params.Q
        xc = lattice.grid_points()
        x = xc @ Q  # x = Q^T x'
        rho = medium.rho
        self.rho = rho.value(x)
        self.one_minus_rho = 1.0 - self.rho
        self.grad_rho = np.moveaxis(rho.gradient(x) @ Q.T, -1, 0)
        self.homogeneous = not (np.any(self.one_minus_rho) or np.any(self.grad_rho))
        self.mult = SpectralMultiplier.build(params.xi, lattice)
        self.mult_t = SpectralMultiplier.build(params.xi_t, lattice)
        self.shift_t = np.array([0.0, params.beta])
        a1, a2 = lattice.alpha_mesh()
        self.ia = (1j * a1, 1j * a2)
        self.ia_t = (1j * a1, 1j * (a2 + params.beta))
        self.zeta_c = params.xi
        self.eta_c = params.eta_canonical
        self.ks2 = medium.k_s ** 2
        self.kp2 = medium.k_p ** 2

    # ------------------------------------------------------------------
    def _phi(self, R, v, with_eta: bool) -> np.ndarray:
        w = R + self.eta_c[:, None, None] if with_eta else R
        return self.one_minus_rho * v - np.sum(self.grad_rho * w, axis=0)

    def apply_parts(self, R, v, with_eta: bool = True):
        """Right-hand side split by modulation.

        Returns spectral arrays ``(A_hat, B_hat, v_hat)``: ``A`` is the
        unmodulated part of the new ``R``, ``B`` its ``exp(i beta x2')``
        part and ``v_hat`` the new ``v`` (also modulated).
        """
        lat = self.lattice
        w = R + self.eta_c[:, None, None] if with_eta else R
        F_hat = lat.to_periodic_space(self.one_minus_rho * w)
        phi = self._phi(R, v, with_eta)
        phi0 = lat.to_periodic_space(phi)
        phib = lat.to_periodic_space(phi, self.shift_t)
        c, ct = self.mult.coefficients, self.mult_t.coefficients
        A = np.stack([-self.ks2 * c * F_hat[i] - (self.zeta_c[i] + self.ia[i]) * c * phi0
                      for i in range(2)])
        B = np.stack([(self.zeta_c[i] + self.ia_t[i]) * ct * phib for i in range(2)])
        V = -self.kp2 * ct * phib
        return A, B, V

    def apply(self, R, v, with_eta: bool = True):
        """``S(eta) + T(R, v)`` (or ``T(R, v)`` alone) on grid samples."""
        lat = self.lattice
        A, B, V = self.apply_parts(R, v, with_eta)
        Rn = lat.from_periodic_space(A) + lat.from_periodic_space(B, self.shift_t)
        vn = lat.from_periodic_space(V, self.shift_t)
        return Rn, vn

    def apply_adjoint(self, Rn, vn):
        """L2-adjoint of the linear map ``(R, v) -> T(R, v)``.

        Every factor is a pointwise multiplication or a Fourier multiplier
        conjugated by unimodular phases, so the adjoint conjugates the
        multipliers and the pointwise factors and reverses the order.
        """
        lat = self.lattice
        c, ct = self.mult.coefficients, self.mult_t.coefficients
        y0 = lat.to_periodic_space(Rn)
        yb = lat.to_periodic_space(Rn, self.shift_t)
        Fs = lat.from_periodic_space(np.conj(-self.ks2 * c) * y0)
        phi0 = sum(np.conj(-(self.zeta_c[i] + self.ia[i]) * c) * y0[i] for i in range(2))
        phib = sum(np.conj((self.zeta_c[i] + self.ia_t[i]) * ct) * yb[i] for i in range(2))
        phib = phib + np.conj(-self.kp2 * ct) * lat.to_periodic_space(vn, self.shift_t)
        phi = lat.from_periodic_space(phi0) + lat.from_periodic_space(phib, self.shift_t)
        R = self.one_minus_rho * Fs - self.grad_rho * phi
        return R, self.one_minus_rho * phi

    def source(self):
        z = np.zeros((2, self.lattice.M, self.lattice.M), complex)
        return self.apply(z, z[0], with_eta=True)

    # individual operators ----------------------------------------------
    def _D_hat(self, phi):
        lat = self.lattice
        return (self.mult.coefficients * lat.to_periodic_space(phi),
                self.mult_t.coefficients * lat.to_periodic_space(phi, self.shift_t))

    def T1(self, phi) -> np.ndarray:
        lat = self.lattice
        a, b = self._D_hat(phi)
        D = lat.from_periodic_space(a) - lat.from_periodic_space(b, self.shift_t)
        return -self.zeta_c[:, None, None] * D

    def T2(self, phi) -> np.ndarray:
        lat = self.lattice
        a, b = self._D_hat(phi)
        return -np.stack([lat.from_periodic_space(self.ia[i] * a)
                          - lat.from_periodic_space(self.ia_t[i] * b, self.shift_t)
                          for i in range(2)])

    def T3(self, phi) -> np.ndarray:
        lat = self.lattice
        b = self.mult_t.coefficients * lat.to_periodic_space(phi, self.shift_t)
        return -self.kp2 * lat.from_periodic_space(b, self.shift_t)

    def P(self, F) -> np.ndarray:
        lat = self.lattice
        return lat.from_periodic_space(self.mult.coefficients * lat.to_periodic_space(F))

    # norms ----------------------------------------------------------------
    def _l2(self, arr, mask) -> float:
        return math.sqrt(self.lattice.h ** 2 * float(np.sum(np.abs(arr) ** 2 * mask)))

    def operator_norm(self, radius: float, iters: int = 12, seed: int = 0,
                      op: Optional[str] = None) -> float:
        """Operator norm estimate on L2(D_radius).

        ``op=None`` measures the full linear map ``T`` by power iteration on
        ``T* T`` (restricted to the disc), which converges to the norm from
        below. ``"T1"``, ``"T2"``, ``"T3"`` measure the scalar-to-field
        operators by the gain of iterated application, a lower bound.
        """
        if self.homogeneous and op is None:
            return 0.0
        rng = np.random.default_rng(seed)
        M = self.lattice.M
        mask = self.lattice.disc_mask(radius)
        rnd = lambda *s: (rng.standard_normal(s) + 1j * rng.standard_normal(s)) * mask
        if op is None:
            R, v = rnd(2, M, M), rnd(M, M)
            nrm = lambda R, v: math.hypot(self._l2(R, mask), self._l2(v, mask))
            est = 0.0
            for _ in range(iters):
                n0 = nrm(R, v)
                if n0 == 0.0:
                    return 0.0
                R, v = R / n0, v / n0
                TR, Tv = self.apply(R, v, with_eta=False)
                est = nrm(TR, Tv)
                R, v = self.apply_adjoint(TR * mask, Tv * mask)
                R, v = R * mask, v * mask
            return est
        fn = {"T1": self.T1, "T2": self.T2, "T3": self.T3}[op]
        phi = rnd(M, M)
        est = 0.0
        for _ in range(iters):
            phi = phi / self._l2(phi, mask)
            out = fn(phi) * mask
            est = self._l2(out, mask)
            # feed back a scalar proxy to stay in the dominant subspace
            phi = out if out.ndim == 2 else np.sum(out, axis=0)
        return est


@dataclass
class CgoSolution:
    """Converged CGO residual ``R`` and scalar field ``v`` (canonical frame).

    ``R_parts`` holds two :class:`PeriodicField` objects with samples of
    shape (2, M, M): the unmodulated part and the part modulated by
    ``exp(i beta x2')``. ``v_field`` is modulated.
    """

    params: CgoParams
    medium: ElasticMedium
    lattice: HalfShiftLattice
    R_parts: list
    v_field: PeriodicField
    iterations: int
    fixed_point_residual: float
    T_norm: float
    trace: list = field(default_factory=list)

    # grid quantities (canonical frame) ---------------------------------
    @property
    def R_samples(self) -> np.ndarray:
        return sum(p.samples for p in self.R_parts)

    def _derivative_samples(self, order: int) -> np.ndarray:
        """Canonical-frame derivatives of R on the grid.

        order 1 -> (2, 2, M, M) with [i, j] = d_j R_i;
        order 2 -> (2, 2, 2, M, M) with [i, j, k] = d_j d_k R_i.
        """
        lat = self.lattice
        a1, a2 = lat.alpha_mesh()
        out = 0
        for part in self.R_parts:
            spec = lat.to_periodic_space(part.samples, part.shift)
            k = (1j * (a1 + part.shift[0]), 1j * (a2 + part.shift[1]))
            if order == 1:
                arr = np.stack([np.stack([k[j] * spec[i] for j in range(2)]) for i in range(2)])
            else:
                arr = np.stack([np.stack([np.stack([k[j] * k[l] * spec[i] for l in range(2)])
                                          for j in range(2)]) for i in range(2)])
            out = out + lat.from_periodic_space(arr, part.shift)
        return out

    def norms(self, radius: Optional[float] = None) -> dict:
        """L2(D_radius) norms of R, grad R, Hess R (frame invariant)."""
        radius = radius if radius is not None else self.default_radius
        mask = self.lattice.disc_mask(radius)
        w = self.lattice.h ** 2
        n = lambda a: math.sqrt(w * float(np.sum(np.abs(a) ** 2 * mask)))
        return {"R": n(self.R_samples), "gradR": n(self._derivative_samples(1)),
                "hessR": n(self._derivative_samples(2)), "v": n(self.v_field.samples)}

    @property
    def default_radius(self) -> float:
        return getattr(self, "_radius", 0.5 * (self.medium.rho.R + self.lattice.R_prime))

    # point evaluation (original frame) -----------------------------------
    def evaluate_R(self, points, jacobian: bool = False):
        """R(x) at arbitrary points of the original frame.

        Returns ``R`` of shape (P, 2) and, if requested, the Jacobian
        ``J[p, i, j] = d R_i / d x_j`` of shape (P, 2, 2).
        """
        Q = self.params.Q
        pts = np.asarray(points, float).reshape(-1, 2)
        if not any(np.any(p.samples) for p in self.R_parts):
            zero = np.zeros((len(pts), 2), complex)
            return (zero, np.zeros((len(pts), 2, 2), complex)) if jacobian else zero
        xc = pts @ Q.T
        Rc = sum(p.evaluate(xc) for p in self.R_parts)  # (2, P)
        R = (Q.T @ Rc).T
        if not jacobian:
            return R
        Jc = np.empty((len(pts), 2, 2), complex)
        for j, der in enumerate([(1, 0), (0, 1)]):
            Jc[:, :, j] = sum(p.evaluate(xc, der) for p in self.R_parts).T
        J = np.einsum("ki,pkl,lj->pij", Q, Jc, Q)
        return R, J

    def u0(self, points, x0=None, gradient: bool = False):
        """CGO field ``e^{zeta.(x-x0)} (eta + R(x))`` and optionally its Jacobian."""
        pts = np.asarray(points, float).reshape(-1, 2)
        x0 = np.zeros(2) if x0 is None else np.asarray(x0, float)
        ph = np.exp((pts - x0) @ self.params.zeta)
        if gradient:
            R, J = self.evaluate_R(pts, jacobian=True)
            w = self.params.eta + R
            G = ph[:, None, None] * (w[:, :, None] * self.params.zeta[None, None, :] + J)
            return ph[:, None] * w, G
        return ph[:, None] * (self.params.eta + self.evaluate_R(pts))

    # diagnostics ----------------------------------------------------------
    def stripped_navier(self, include_R: bool = True) -> np.ndarray:
        """``e^{-zeta.x} (L u0 + omega^2 rho u0)`` on the canonical grid, shape (2, M, M)."""
        med = self.medium
        lat = self.lattice
        lam, mu = med.lam, med.mu
        z = self.params.xi
        eta = self.params.eta_canonical
        ops = CgoOperators(self.params, med, lat)
        w = eta[:, None, None] + (self.R_samples if include_R else 0)
        # constant eta: mu (z.z) eta + (lam+mu) z (z.eta) = -mu k_s^2 eta
        out = (-mu * med.k_s ** 2 * eta)[:, None, None] + med.omega ** 2 * ops.rho * w
        if include_R:
            a1, a2 = lat.alpha_mesh()
            for part in self.R_parts:
                spec = lat.to_periodic_space(part.samples, part.shift)
                K = (z[0] + 1j * (a1 + part.shift[0]), z[1] + 1j * (a2 + part.shift[1]))
                KK = K[0] * K[0] + K[1] * K[1]
                div = K[0] * spec[0] + K[1] * spec[1]
                term = np.stack([mu * KK * spec[i] + (lam + mu) * K[i] * div for i in range(2)])
                out = out + lat.from_periodic_space(term, part.shift)
        return out

    def navier_residual(self, radius: Optional[float] = None, include_R: bool = True) -> float:
        """Relative L2 residual ``||L u0 + w^2 rho u0|| / ||w^2 rho u0||`` over a disc."""
        radius = radius if radius is not None else self.default_radius
        mask = self.lattice.disc_mask(radius)
        res = self.stripped_navier(include_R)
        w = self.params.eta_canonical[:, None, None] + (self.R_samples if include_R else 0)
        ops = CgoOperators(self.params, self.medium, self.lattice)
        ref = self.medium.omega ** 2 * ops.rho * w
        num = float(np.sum(np.abs(res) ** 2 * mask))
        den = float(np.sum(np.abs(ref) ** 2 * mask))
        return math.sqrt(num / den)

    def divergence_mismatch(self, radius: Optional[float] = None) -> float:
        """``||(zeta + grad).(eta + R) - v|| / ||v||`` over a disc (canonical frame)."""
        radius = radius if radius is not None else self.default_radius
        mask = self.lattice.disc_mask(radius)
        J = self._derivative_samples(1)
        div = J[0, 0] + J[1, 1] + np.sum(self.params.xi[:, None, None] * self.R_samples, axis=0)
        v = self.v_field.samples
        den = float(np.sum(np.abs(v) ** 2 * mask))
        num = float(np.sum(np.abs(div - v) ** 2 * mask))
        return math.sqrt(num / den) if den > 0 else math.sqrt(num)

    # export ---------------------------------------------------------------
    def metadata(self) -> dict:
        nr = self.norms()
        return {"params": self.params.to_dict(), "medium": self.medium.to_dict(),
                "lattice": {"R_prime": self.lattice.R_prime, "N": self.lattice.N},
                "iterations": self.iterations, "fixed_point_residual": self.fixed_point_residual,
                "T_norm": self.T_norm, "norms": nr, "trace": list(self.trace),
                "beta": self.params.beta}

    def export(self, stem) -> None:
        """Write ``stem.json`` plus binary dumps of the field parts."""
        with open(f"{stem}.json", "w") as fh:
            json.dump(self.metadata(), fh, indent=2)
        for i, part in enumerate(self.R_parts):
            part.to_binary(f"{stem}_R{i}.bin")
        self.v_field.to_binary(f"{stem}_v.bin")


def assemble_operators(params: CgoParams, medium: ElasticMedium,
                       lattice: HalfShiftLattice) -> CgoOperators:
    """Build the fixed-point operator bundle for ``(R, v) = S(eta) + T(R, v)``."""
    return CgoOperators(params, medium, lattice)


def solve_cgo(params: CgoParams, medium: ElasticMedium, lattice: HalfShiftLattice,
              tol: float = 1e-10, max_iter: int = 100, radius: Optional[float] = None,
              check_contraction: bool = True, seed: int = 0) -> CgoSolution:
    """Fixed-point iteration ``(R, v) <- S(eta) + T(R, v)``.

    Parameters
    ----------
    radius : float, optional
        Disc on which norms are measured; defaults to the midpoint between
        the density support radius and R'.
    seed : int
        Start vector of the power iteration that estimates ``||T||``.

    Raises
    ------
    CgoThresholdError
        If the measured ``||T||`` exceeds 0.5 or the iteration diverges.
    """
    rho_R = medium.rho.R
    if rho_R >= lattice.R_prime:
        raise ValueError("density support must lie inside the periodic square")
    radius = radius if radius is not None else 0.5 * (rho_R + lattice.R_prime)
    ops = CgoOperators(params, medium, lattice)
    M = lattice.M
    mask = lattice.disc_mask(radius)
    tnorm = ops.operator_norm(radius, seed=seed) if check_contraction else float("nan")
    if check_contraction and tnorm > CONTRACTION_LIMIT:
        raise CgoThresholdError(params.tau, tnorm)
    R = np.zeros((2, M, M), complex)
    v = np.zeros((M, M), complex)
    trace = []
    res = 0.0
    it = 0
    if not ops.homogeneous:
        nrm = lambda R, v: math.sqrt(lattice.h ** 2 * float(
            np.sum((np.sum(np.abs(R) ** 2, axis=0) + np.abs(v) ** 2) * mask)))
        for it in range(1, max_iter + 1):
            Rn, vn = ops.apply(R, v)
            res = nrm(Rn - R, vn - v) / max(nrm(Rn, vn), 1e-300)
            trace.append(res)
            R, v = Rn, vn
            if res <= tol:
                break
            if it > 3 and trace[-1] > trace[-2] > trace[-3]:
                raise CgoThresholdError(params.tau, trace[-1] / trace[-2])
        else:
            logger.warning("CGO iteration hit max_iter=%d with residual %.3g", max_iter, res)
    A, B, V = ops.apply_parts(R, v)
    shift = ops.shift_t
    R_parts = [PeriodicField(lattice, lattice.from_periodic_space(A)),
               PeriodicField(lattice, lattice.from_periodic_space(B, shift), shift)]
    v_field = PeriodicField(lattice, lattice.from_periodic_space(V, shift), shift)
    sol = CgoSolution(params, medium, lattice, R_parts, v_field, it, res, tnorm, trace)
    sol._radius = radius
    return sol


def navier_residual(solution: CgoSolution, radius: Optional[float] = None,
                    include_R: bool = True) -> float:
    """Relative Navier residual of ``u0`` (see :meth:`CgoSolution.navier_residual`)."""
    return solution.navier_residual(radius, include_R)


# ---------------------------------------------------------------------------
# Modified fundamental solution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModifiedFundamentalSolution:
    """``Psi_ij = delta_ij h_zeta / mu + d_i d_j (h_zeta - h_zeta~) / omega^2``.

    ``h_zeta(x) = h_xi(Q x)`` is evaluated through the canonical-frame
    series. With ``(Lap + k^2) h = -delta`` this gives
    ``(L + omega^2) Psi = -delta I``; it therefore differs from the Kupradze
    matrix (which has ``+delta``) by a sign, and ``Psi + Gamma`` is smooth.
    """

    params: CgoParams
    medium: ElasticMedium
    lattice: HalfShiftLattice

    def __call__(self, x) -> np.ndarray:
        pts = np.asarray(x, float).reshape(-1, 2)
        Q = self.params.Q
        xc = pts @ Q.T
        lat = self.lattice
        hs = eval_h_xi(xc, self.params.xi, lat)
        hess = np.empty((len(pts), 2, 2), complex)
        for (i, j), der in {(0, 0): (2, 0), (0, 1): (1, 1), (1, 1): (0, 2)}.items():
            d = (eval_h_xi(xc, self.params.xi, lat, deriv=der)
                 - eval_h_xi(xc, self.params.xi_t, lat, deriv=der))
            hess[:, i, j] = d
            hess[:, j, i] = d
        hess = np.einsum("ki,pkl,lj->pij", Q, hess, Q)
        out = hs[:, None, None] * np.eye(2) / self.medium.mu + hess / self.medium.omega ** 2
        return out.reshape(np.asarray(x).shape[:-1] + (2, 2))
