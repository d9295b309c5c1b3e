"""Corner identities, CGO sector moments and the corner scan.

Gradient relations
------------------
Near a convex corner with apex ``x0`` and edge angles ``theta_m < theta_M``,
a linear source ``f(x0 + y) = grad f(x0) y`` tested against a CGO field
produces, to leading order in ``1/tau``,

    int_{S_h} f . u0 = (2 e^{2 i theta_d} / (-tau^3)) int e^{-3 i theta} g(theta) dtheta,

    g(theta) = -i (a cos theta + b sin theta) + (c cos theta + d sin theta),

with ``(a, b, c, d) = (d1 f1, d2 f1, d1 f2, d2 f2)``. The real and imaginary
parts of the angular moment are the two gradient relations

    L1 = A a + B b - C c - D d,      L2 = C a + D b + A c + B d,

whose coefficients are closed-form trigonometric functions of the angles.

Radial integrals
----------------
For ``Re mu > 0``, ``int_0^eps r^alpha e^{-mu r} dr = Gamma(alpha+1)/mu^{alpha+1} - I_R``
with ``|I_R| <= (2/Re mu) e^{-(eps/2) Re mu}`` once ``Re mu >= 2 alpha / e``.

Quadrature
----------
Moments over sectors and polygons use polar coordinates about the probe
point: geometric radial panels toward the inner radius (ratio 1/2, 12
panels), subdivided so every panel spans at most ``PANEL_PHASE`` radians
of the CGO phase, and angular Gauss-Legendre panels sized the same way.
Radial integration stops once ``|e^{zeta.(x-x0)}|`` has decayed by
``e^{-DECAY_CUTOFF}``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.linalg import null_space, subspace_angles
from scipy.special import gamma as gamma_fn

from .cgo import CgoSolution, make_cgo_params, solve_cgo
from .domain import (ConvexPolygon, ElasticMedium, GeometryError, ProbeDirection, Sector,
                     SourceModel, choose_probe_direction, unit)
from .elastic_forward import traction
from .fourier_green import HalfShiftLattice, build_lattice, fit_slope

logger = logging.getLogger(__name__)

PANEL_PHASE = 8.0
GL_ORDER = 16
DECAY_CUTOFF = 40.0
DEFAULT_TAU_SWEEP = (20.0, 40.0, 80.0, 160.0)
ALGEBRAIC_SLOPE_SPLIT = -3.5


class RefinementError(RuntimeError):
    """Quadrature result changed by more than the tolerance under refinement."""


# ---------------------------------------------------------------------------
# Corner coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CornerCoefficients:
    """Coefficients of the two gradient relations at a corner."""

    A: float
    B: float
    C: float
    D: float
    theta_m: float
    theta_M: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.A, self.B, self.C, self.D)

    def relation_matrix(self) -> np.ndarray:
        """Rows map ``(a, b, c, d)`` to ``(L1, L2)``."""
        A, B, C, D = self.as_tuple()
        return np.array([[A, B, -C, -D], [C, D, A, B]])

    def residuals(self, grad) -> tuple[float, float]:
        """``(L1, L2)`` for a Jacobian ``grad[i, j] = d f_i / d x_j``."""
        g = np.asarray(grad, float).reshape(2, 2)
        L = self.relation_matrix() @ g.ravel()
        return float(L[0]), float(L[1])


def abcd(theta_m: float, theta_M: float) -> CornerCoefficients:
    """Closed-form corner coefficients.

    Raises
    ------
    GeometryError
        Unless ``0 < theta_M - theta_m < pi``.
    """
    opening = theta_M - theta_m
    if not (0.0 < opening < math.pi):
        raise GeometryError(f"opening {opening} not in (0, pi)")
    sp, sd = math.sin(theta_M + theta_m), math.sin(opening)
    cp, cd = math.cos(theta_M + theta_m), math.cos(opening)
    A = sp * sd * (1 + 2 * cp * cd)
    B = sd * (-2 * cd * cp ** 2 + cd + cp)
    C = sd * (2 * cd * cp ** 2 - cd + cp)
    D = sp * sd * (-1 + 2 * cp * cd)
    return CornerCoefficients(A, B, C, D, theta_m, theta_M)


def relation_matrix(theta_m: float, theta_M: float) -> np.ndarray:
    return abcd(theta_m, theta_M).relation_matrix()


def _g_columns(theta):
    """``g(theta)`` for the unit vectors a, b, c, d."""
    c, s = math.cos(theta), math.sin(theta)
    return (-1j * c, -1j * s, c, s)


def moment_matrix(theta_m: float, theta_M: float, tol: float = 1e-12) -> np.ndarray:
    """2x4 real matrix of ``(Re, Im) int e^{-3 i theta} g(theta) dtheta`` by adaptive quadrature."""
    if not (0.0 < theta_M - theta_m < math.pi):
        raise GeometryError("opening must lie in (0, pi)")
    out = np.empty((2, 4))
    for j in range(4):
        fn = lambda t, j=j: np.exp(-3j * t) * _g_columns(t)[j]
        out[0, j] = quad(lambda t: fn(t).real, theta_m, theta_M, epsabs=tol, epsrel=tol)[0]
        out[1, j] = quad(lambda t: fn(t).imag, theta_m, theta_M, epsabs=tol, epsrel=tol)[0]
    return out


def moment_integral(grad, theta_m: float, theta_M: float) -> complex:
    """``int e^{-3 i theta} g(theta) dtheta`` for a Jacobian ``grad``."""
    re, im = moment_matrix(theta_m, theta_M) @ np.asarray(grad, float).ravel()
    return complex(re, im)


def null_space_distance(M1, M2) -> float:
    """Largest principal angle between the null spaces of two matrices."""
    N1, N2 = null_space(np.atleast_2d(M1)), null_space(np.atleast_2d(M2))
    if N1.shape[1] != N2.shape[1]:
        return math.pi / 2
    if N1.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(N1, N2)))


# ---------------------------------------------------------------------------
# Laplace tail
# ---------------------------------------------------------------------------

def laplace_tail(alpha: float, mu: complex, eps: float = math.inf) -> tuple[complex, float]:
    """``(Gamma(alpha+1)/mu^{alpha+1}, (2/Re mu) e^{-(eps/2) Re mu})``.

    Raises
    ------
    ValueError
        If ``alpha <= 0`` or ``Re mu < 2 alpha / e``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    mu = complex(mu)
    if mu.real < 2 * alpha / math.e:
        raise ValueError(f"Re mu = {mu.real:g} below 2 alpha / e = {2 * alpha / math.e:g}")
    main = gamma_fn(alpha + 1) / mu ** (alpha + 1)
    bound = 0.0 if math.isinf(eps) else 2.0 / mu.real * math.exp(-0.5 * eps * mu.real)
    return complex(main), bound


def laplace_integral(alpha: float, mu: complex, eps: float) -> complex:
    """``int_0^eps r^alpha e^{-mu r} dr`` by algebraic-weight adaptive quadrature."""
    mu = complex(mu)
    kw = dict(weight="alg", wvar=(alpha, 0.0), epsabs=1e-14, epsrel=1e-13, limit=200)
    re = quad(lambda r: math.exp(-mu.real * r) * math.cos(mu.imag * r), 0.0, eps, **kw)[0]
    im = quad(lambda r: -math.exp(-mu.real * r) * math.sin(mu.imag * r), 0.0, eps, **kw)[0]
    return complex(re, im)


def validate_laplace_tail(alpha: float, mu: complex, eps: float) -> dict:
    """Compare the closed form with quadrature; ``ok`` iff the gap respects the bound."""
    main, bound = laplace_tail(alpha, mu, eps)
    integral = laplace_integral(alpha, mu, eps)
    gap = abs(main - integral)
    return {"main": main, "integral": integral, "gap": gap, "bound": bound, "ok": gap <= bound}


# ---------------------------------------------------------------------------
# Polar quadrature
# ---------------------------------------------------------------------------

@dataclass
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * values))


def _composite_gl(breaks, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = np.asarray(breaks[:-1]), np.asarray(breaks[1:])
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None]
    return nodes.ravel(), (half[:, None] * w[None]).ravel()


def _subdivide(breaks, max_len):
    out = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(math.ceil((b - a) / max_len))) if max_len > 0 else 1
        out.extend(a + (b - a) * np.arange(1, n + 1) / n)
    return np.array(out)


def _wedge_rule(x0, th_breaks, r_in: Callable, r_out: Callable, zeta, bandwidth: float = 0.0,
                order: int = GL_ORDER, phase: float = PANEL_PHASE, graded: int = 12) -> QuadratureRule:
    """Polar rule over ``{x0 + r x_hat(th): th in breaks range, r_in(th) < r < r_out(th)}``.

    ``r_in`` and ``r_out`` must be smooth between consecutive angular breaks.
    """
    zeta = np.asarray(zeta, complex)
    kappa = float(np.hypot(*np.abs(zeta))) + bandwidth
    pts, wts = [], []
    t_graded = np.concatenate([[0.0], 0.5 ** np.arange(graded - 1, -1, -1)])
    for t0, t1 in zip(th_breaks[:-1], th_breaks[1:]):
        if t1 - t0 <= 1e-14:
            continue
        ts = np.linspace(t0, t1, 33)
        decay = -(unit(ts) @ zeta.real)
        lo, hi = r_in(ts), r_out(ts)
        reach = np.where(decay > 0, DECAY_CUTOFF / np.maximum(decay, 1e-300), np.inf)
        span = np.minimum(hi, lo + reach) - lo
        if np.all(span <= 0):
            continue
        rmax = float(np.max(lo + np.maximum(span, 0)))
        n_ang = max(1, int(math.ceil(kappa * rmax * (t1 - t0) / phase)))
        th, wth = _composite_gl(np.linspace(t0, t1, n_ang + 1), order)
        lo, hi = r_in(th), r_out(th)
        decay = -(unit(th) @ zeta.real)
        reach = np.where(decay > 0, DECAY_CUTOFF / np.maximum(decay, 1e-300), np.inf)
        end = np.minimum(hi, lo + reach)
        length = np.maximum(end - lo, 0.0)
        tb = _subdivide(t_graded, phase / (kappa * max(float(length.max()), 1e-300)))
        t, wt = _composite_gl(tb, order)
        r = lo[:, None] + length[:, None] * t[None]
        w = wth[:, None] * wt[None] * length[:, None] * r
        xh = unit(th)
        pts.append(np.asarray(x0)[None, None] + r[..., None] * xh[:, None, :])
        wts.append(w)
    if not pts:
        return QuadratureRule(np.zeros((0, 2)), np.zeros(0))
    return QuadratureRule(np.concatenate([p.reshape(-1, 2) for p in pts]),
                          np.concatenate([w.ravel() for w in wts]))


def sector_rule(sector: Sector, zeta, bandwidth: float = 0.0, order: int = GL_ORDER,
                phase: float = PANEL_PHASE) -> QuadratureRule:
    """Graded polar rule on a sector, centred at its apex."""
    h = sector.h
    const = lambda th: np.full(np.shape(th), h)
    zero = lambda th: np.zeros(np.shape(th))
    return _wedge_rule(sector.apex, [sector.theta_m, sector.theta_M], zero, const, zeta,
                       bandwidth, order, phase)


def _ray_bounds(polygon: ConvexPolygon, x0, th):
    """Entry and exit distances of rays ``x0 + r x_hat(th)`` through the polygon."""
    xh = unit(th)
    lo = np.zeros(len(th))
    hi = np.full(len(th), np.inf)
    scale = max(1.0, float(np.abs(polygon.vertices).max()))
    for (a, _), n in zip(polygon.edges(), polygon.outward_normals()):
        b = float(n @ (a - x0))
        if abs(b) < 1e-12 * scale:
            b = 0.0
        s = xh @ n
        with np.errstate(divide="ignore", invalid="ignore"):
            q = b / s
        hi = np.where(s > 0, np.minimum(hi, q), hi)
        lo = np.where(s < 0, np.maximum(lo, q), lo)
        if b < 0:
            lo = np.where(s == 0, np.inf, lo)
    return lo, np.maximum(hi, lo)


def polygon_rule(polygon: ConvexPolygon, x0, zeta, bandwidth: float = 0.0,
                 order: int = GL_ORDER, phase: float = PANEL_PHASE) -> QuadratureRule:
    """Polar rule over a convex polygon about an arbitrary point ``x0``.

    Works for ``x0`` outside, on the boundary of, or inside the polygon;
    angular panels break at the vertex directions.
    """
    x0 = np.asarray(x0, float)
    rel = polygon.vertices - x0
    far = np.linalg.norm(rel, axis=1) > 1e-12
    ang = np.arctan2(rel[far, 1], rel[far, 0])
    if polygon.contains(x0):
        breaks = np.sort(np.mod(ang, 2 * math.pi))
        breaks = np.concatenate([breaks, [breaks[0] + 2 * math.pi]])
    else:
        c = polygon.centroid() - x0
        ref = math.atan2(c[1], c[0])
        phi = np.sort(np.angle(np.exp(1j * (ang - ref))))
        breaks = ref + phi
    lo = lambda th: _ray_bounds(polygon, x0, th)[0]
    hi = lambda th: _ray_bounds(polygon, x0, th)[1]
    return _wedge_rule(x0, breaks, lo, hi, zeta, bandwidth, order, phase)


def _bandwidth(cgo: Optional[CgoSolution]) -> float:
    if cgo is None or not any(np.any(p.samples) for p in cgo.R_parts):
        return 0.0
    lat = cgo.lattice
    return float(np.hypot(np.abs(lat.alpha1).max(), np.abs(lat.alpha2).max()))


# ---------------------------------------------------------------------------
# Sector moments
# ---------------------------------------------------------------------------

def _exp_radial(beta, h):
    """``int_0^h r e^{r beta} dr`` stable for small ``h beta``."""
    z = np.asarray(beta * h, complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    big = (np.exp(zs) * (zs - 1) + 1) / zs ** 2
    ser = 0.5 + z / 3 + z ** 2 / 8 + z ** 3 / 30
    return h * h * np.where(small, ser, big)


def sector_exponential_integral(zeta, sector: Sector) -> complex:
    """``int_{S_h} e^{zeta.(x - apex)} dx`` via the closed-form radial integral per angle."""
    zeta = np.asarray(zeta, complex)
    fn = lambda t: complex(_exp_radial(zeta @ unit(t), sector.h))
    # the integral is O(|zeta|^-2); an absolute floor avoids chasing roundoff
    kw = dict(epsabs=1e-16 / max(1.0, float(np.sum(np.abs(zeta) ** 2))), epsrel=1e-13, limit=400)
    with warnings.catch_warnings():
        # near-cancelling parts trip the roundoff detector at full accuracy
        warnings.simplefilter("ignore", IntegrationWarning)
        re = quad(lambda t: fn(t).real, sector.theta_m, sector.theta_M, **kw)[0]
        im = quad(lambda t: fn(t).imag, sector.theta_m, sector.theta_M, **kw)[0]
    return complex(re, im)


def _check_refinement(rule_fn, integrand, rtol):
    base = rule_fn(1.0)
    fine = rule_fn(0.5)
    a, b = base.integrate(integrand(base.points)), fine.integrate(integrand(fine.points))
    if abs(a - b) > rtol * max(abs(b), 1e-300):
        raise RefinementError(f"quadrature changed by {abs(a - b) / abs(b):.2e} under refinement")


def sector_moments(sources: Sequence[SourceModel], cgo: CgoSolution, sector: Sector,
                   check: bool = True, rtol: float = 1e-9) -> np.ndarray:
    """``J = int_{S_h} f . u0`` for several sources sharing one CGO field.

    ``u0 = e^{zeta.(x - x0)} (eta + R(x))`` with ``x0`` the sector apex; the
    exponential is evaluated phase-stripped so it never exceeds one on an
    admissible sector.

    Raises
    ------
    RefinementError
        If halving the panel phase changes the explicit part ``f . eta e^{zeta.y}``
        by more than ``rtol`` (the smooth ``R`` part shares the same panels).
    """
    p = cgo.params
    bw = _bandwidth(cgo)
    rule_fn = lambda scale: sector_rule(sector, p.zeta, bw, phase=PANEL_PHASE * scale)
    rule = rule_fn(1.0)
    if check:
        for f in sources:
            ff = lambda x, f=f: (f.evaluate(x) @ p.eta) * np.exp((x - sector.apex) @ p.zeta)
            if np.any(f.evaluate(rule.points[:1])):
                _check_refinement(rule_fn, ff, rtol)
    u0 = cgo.u0(rule.points, sector.apex)
    return np.array([rule.integrate(np.sum(f.evaluate(rule.points) * u0, axis=1))
                     for f in sources])


def sector_moment(f: SourceModel, cgo: CgoSolution, sector: Sector, check: bool = True,
                  rtol: float = 1e-9) -> complex:
    """``J(tau) = int_{S_h} f . u0 dx`` (see :func:`sector_moments`)."""
    return complex(sector_moments([f], cgo, sector, check, rtol)[0])


def default_lattice(R_prime: float = 2.0, N: int = 64) -> HalfShiftLattice:
    return build_lattice(R_prime, N)


def cgo_for(medium: ElasticMedium, probe: ProbeDirection, tau: float,
            lattice: Optional[HalfShiftLattice] = None) -> CgoSolution:
    lattice = lattice or default_lattice()
    return solve_cgo(make_cgo_params(medium, probe, tau), medium, lattice)


def moment_sweep(sources: Sequence[SourceModel], sector: Sector, medium: ElasticMedium,
                 tau_sweep=DEFAULT_TAU_SWEEP, lattice=None,
                 probe: Optional[ProbeDirection] = None) -> dict:
    """Sector moments over a tau sweep. Returns ``{"tau", "J" (n_tau, n_src), "E"}``.

    ``E`` is the pure exponential integral ``int_{S_h} e^{zeta.y}``.
    """
    probe = probe or choose_probe_direction(sector)
    J, E = [], []
    for tau in tau_sweep:
        cgo = cgo_for(medium, probe, tau, lattice)
        J.append(sector_moments(sources, cgo, sector))
        E.append(sector_exponential_integral(cgo.params.zeta, sector))
    return {"tau": np.asarray(tau_sweep, float), "J": np.array(J), "E": np.array(E),
            "probe": probe}


# ---------------------------------------------------------------------------
# Betti identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticField:
    """``v(x) = c + B y + 0.5 H[y, y]`` with ``y = x - center``."""

    c: np.ndarray
    B: np.ndarray
    H: np.ndarray
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        H = np.asarray(self.H, float).reshape(2, 2, 2)
        object.__setattr__(self, "c", np.asarray(self.c, float).reshape(2))
        object.__setattr__(self, "B", np.asarray(self.B, float).reshape(2, 2))
        object.__setattr__(self, "H", 0.5 * (H + H.transpose(0, 2, 1)))
        object.__setattr__(self, "center", np.asarray(self.center, float).reshape(2))

    @classmethod
    def random(cls, rng, center=(0.0, 0.0)) -> "QuadraticField":
        return cls(rng.standard_normal(2), rng.standard_normal((2, 2)),
                   rng.standard_normal((2, 2, 2)), np.asarray(center, float))

    def value(self, x) -> np.ndarray:
        y = np.asarray(x, float) - self.center
        return self.c + y @ self.B.T + 0.5 * np.einsum("ijk,...j,...k->...i", self.H, y, y)

    def jacobian(self, x) -> np.ndarray:
        y = np.asarray(x, float) - self.center
        return self.B + np.einsum("ijk,...k->...ij", self.H, y)

    def lame(self, medium: ElasticMedium) -> np.ndarray:
        """Constant ``mu Lap v + (lambda + mu) grad div v``."""
        lap = np.einsum("ijj->i", self.H)
        grad_div = np.einsum("jji->i", self.H)
        return medium.mu * lap + (medium.lam + medium.mu) * grad_div

    def source(self, x, medium: ElasticMedium) -> np.ndarray:
        """``f = L v + omega^2 rho v``."""
        x = np.asarray(x, float)
        return self.lame(medium) + medium.omega ** 2 * medium.rho.value(x)[..., None] * self.value(x)


@dataclass
class BettiResult:
    volume: complex
    boundary: complex
    scale: float

    @property
    def gap(self) -> float:
        return abs(self.volume - self.boundary) / self.scale


def _uniform_sector_rule(sector: Sector, n: int, order: int):
    r, wr = _composite_gl(np.linspace(0, sector.h, n + 1), order)
    t, wt = _composite_gl(np.linspace(sector.theta_m, sector.theta_M, n + 1), order)
    R, T = np.meshgrid(r, t, indexing="ij")
    pts = sector.apex + R[..., None] * unit(T)
    return pts.reshape(-1, 2), (wr[:, None] * wt[None] * R).ravel()


def _sector_boundary(sector: Sector, n: int, order: int):
    """Nodes, weights and outward normals on ``Gamma_-``, ``Gamma_+`` and the arc."""
    s, ws = _composite_gl(np.linspace(0, sector.h, n + 1), order)
    t, wt = _composite_gl(np.linspace(sector.theta_m, sector.theta_M, n + 1), order)
    tm, tM = sector.theta_m, sector.theta_M
    parts = [
        (sector.apex + s[:, None] * unit(tm), ws, np.tile(unit(tm - math.pi / 2), (len(s), 1))),
        (sector.apex + s[:, None] * unit(tM), ws, np.tile(unit(tM + math.pi / 2), (len(s), 1))),
        (sector.arc(t), sector.h * wt, unit(t)),
    ]
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]))


def betti_check(v: QuadraticField, sector: Sector, medium: ElasticMedium,
                cgo: Optional[CgoSolution] = None, tau: float = 10.0, lattice=None,
                n_panels: int = 8, order: int = 6) -> BettiResult:
    """Compare ``int_S f . u0`` with ``int_{dS} (u0 . T v - v . T u0)``.

    ``f = L v + omega^2 rho v``; ``u0`` is the CGO field with apex-centred
    phase. Uniform Gauss-Legendre panels (``n_panels`` per side) are used
    on both sides so the gap measures the joint quadrature and traction
    error.
    """
    if cgo is None:
        cgo = cgo_for(medium, choose_probe_direction(sector), tau, lattice)
    x0 = sector.apex
    pts, w = _uniform_sector_rule(sector, n_panels, order)
    vol_vals = np.sum(v.source(pts, medium) * cgo.u0(pts, x0), axis=1)
    bp, bw, nu = _sector_boundary(sector, n_panels, order)
    u0, G0 = cgo.u0(bp, x0, gradient=True)
    vv = v.value(bp)
    Tv = traction(v.jacobian(bp), nu, medium)
    Tu0 = traction(G0, nu, medium)
    bvals = np.sum(u0 * Tv, axis=1) - np.sum(vv * Tu0, axis=1)
    vol = complex(np.sum(w * vol_vals))
    bnd = complex(np.sum(bw * bvals))
    scale = max(float(np.sum(w * np.abs(vol_vals))), float(np.sum(bw * np.abs(bvals))), 1e-300)
    return BettiResult(vol, bnd, scale)


def betti_convergence(v: QuadraticField, sector: Sector, medium: ElasticMedium,
                      cgo: Optional[CgoSolution] = None, tau: float = 10.0,
                      levels=(1, 2, 4, 8, 16), order: int = 3,
                      floor: Optional[float] = None) -> dict:
    """Gap under panel doubling and the observed orders between resolved levels.

    Levels whose gap sits below ``floor`` (default: ten times the finest
    gap, i.e. the CGO residual level) are excluded from the order estimate.
    """
    if cgo is None:
        cgo = cgo_for(medium, choose_probe_direction(sector), tau)
    gaps = np.array([betti_check(v, sector, medium, cgo, n_panels=n, order=order).gap
                     for n in levels])
    floor = 10 * gaps[-1] if floor is None else floor
    orders = []
    for g0, g1, n0, n1 in zip(gaps[:-1], gaps[1:], levels[:-1], levels[1:]):
        if g1 > floor:
            orders.append(math.log(g0 / g1) / math.log(n1 / n0))
    return {"levels": list(levels), "gaps": gaps, "orders": np.array(orders)}


# ---------------------------------------------------------------------------
# Corner value extraction
# ---------------------------------------------------------------------------

@dataclass
class CornerValueEstimate:
    value: np.ndarray
    tau: np.ndarray
    raw: np.ndarray
    monotone: bool

    @property
    def flag(self) -> str:
        return "ok" if self.monotone else "inconclusive"

    def series(self) -> list[dict]:
        return [{"tau": float(t), "f1": float(r[0]), "f2": float(r[1])}
                for t, r in zip(self.tau, self.raw)]


def leading_order_value(ratio, theta_d: float) -> np.ndarray:
    """Real ``f`` from ``f . eta`` using ``eta ~ e^{-i theta_d} (-i, 1)``."""
    z = np.exp(1j * theta_d) * np.asarray(ratio)
    return np.stack([-z.imag, z.real], axis=-1)


def richardson(tau, values, degree: int = 2) -> np.ndarray:
    """Least-squares polynomial extrapolation in ``1/tau`` to ``1/tau = 0``."""
    x = 1.0 / np.asarray(tau, float)
    V = np.asarray(values)
    deg = min(degree, len(x) - 1)
    A = np.vander(x, deg + 1, increasing=True)
    coef = np.linalg.lstsq(A, V.reshape(len(x), -1), rcond=None)[0]
    return coef[0].reshape(V.shape[1:])


def extract_corner_value(f: SourceModel, sector: Sector, medium: ElasticMedium,
                         tau_sweep=DEFAULT_TAU_SWEEP, lattice=None, sweep: Optional[dict] = None,
                         source_index: int = 0) -> CornerValueEstimate:
    """Estimate ``f(x0)`` from ``J(tau) / int_{S_h} e^{zeta.y}`` across a tau sweep.

    The O(tau^-2) correction of ``eta`` is ignored per tau and removed by
    Richardson extrapolation in ``1/tau``.
    """
    sweep = sweep or moment_sweep([f], sector, medium, tau_sweep, lattice)
    ratio = sweep["J"][:, source_index] / sweep["E"]
    raw = leading_order_value(ratio, sweep["probe"].theta_d)
    est = richardson(sweep["tau"], raw)
    steps = np.linalg.norm(np.diff(raw, axis=0), axis=1)
    scale = max(float(np.linalg.norm(est)), 1e-12)
    monotone = bool(np.all(steps[1:] <= steps[:-1] + 1e-9 * scale)) if len(steps) > 1 else True
    return CornerValueEstimate(est, sweep["tau"], raw, monotone)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class Classification(str, Enum):
    RADIATING = "radiating-certified"
    SATISFIED = "relations-satisfied"
    INCONCLUSIVE = "inconclusive"


@dataclass
class CornerReport:
    apex: np.ndarray
    theta_m: float
    theta_M: float
    f_value: np.ndarray
    grad: np.ndarray
    L1: float
    L2: float
    tol0: float
    tol1: float
    classification: Classification
    diagnostics: dict = field(default_factory=dict)

    def recompute(self) -> tuple[float, float]:
        return abcd(self.theta_m, self.theta_M).residuals(self.grad)

    def to_dict(self) -> dict:
        return {"apex": np.asarray(self.apex).tolist(), "theta_m": self.theta_m,
                "theta_M": self.theta_M, "f_value": np.asarray(self.f_value).tolist(),
                "grad": np.asarray(self.grad).tolist(), "L1": self.L1, "L2": self.L2,
                "tol0": self.tol0, "tol1": self.tol1,
                "classification": self.classification.value, "diagnostics": self.diagnostics}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def to_csv(self, path) -> None:
        d = self.to_dict()
        row = {"apex_x": d["apex"][0], "apex_y": d["apex"][1], "theta_m": d["theta_m"],
               "theta_M": d["theta_M"], "f1": d["f_value"][0], "f2": d["f_value"][1],
               "L1": d["L1"], "L2": d["L2"], "classification": d["classification"]}
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(row))
            w.writeheader()
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})


def classify_corner(f_value, grad, theta_m: float, theta_M: float, apex=(0.0, 0.0),
                    f_scale: float = 1.0, grad_scale: float = 1.0, rel_tol: float = 1e-3,
                    tol0: Optional[float] = None, tol1: Optional[float] = None,
                    diagnostics: Optional[dict] = None) -> CornerReport:
    """Certify radiation from corner data.

    ``radiating-certified`` iff ``|f(x0)| > tol0`` or ``|L1|, |L2| > tol1``;
    ``relations-satisfied`` iff all three sit below ``tol/10``; otherwise
    ``inconclusive``. Defaults: ``tol0 = rel_tol * f_scale``,
    ``tol1 = rel_tol * grad_scale``.
    """
    f_value = np.asarray(f_value, float).reshape(2)
    grad = np.asarray(grad, float).reshape(2, 2)
    tol0 = rel_tol * f_scale if tol0 is None else tol0
    tol1 = rel_tol * grad_scale if tol1 is None else tol1
    if not (tol0 > 0 and tol1 > 0):
        raise ValueError("tolerances must be positive")
    L1, L2 = abcd(theta_m, theta_M).residuals(grad)
    fn = float(np.linalg.norm(f_value))
    if fn > tol0 or abs(L1) > tol1 or abs(L2) > tol1:
        cls = Classification.RADIATING
    elif fn <= 0.1 * tol0 and abs(L1) <= 0.1 * tol1 and abs(L2) <= 0.1 * tol1:
        cls = Classification.SATISFIED
    else:
        cls = Classification.INCONCLUSIVE
    return CornerReport(np.asarray(apex, float), theta_m, theta_M, f_value, grad, L1, L2,
                        tol0, tol1, cls, diagnostics or {})


# ---------------------------------------------------------------------------
# Corner scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanCandidate:
    point: np.ndarray
    probe: ProbeDirection
    label: str
    kind: str = "probe"


def polygon_candidates(polygon: ConvexPolygon, exterior_offset: float = 0.3) -> list[ScanCandidate]:
    """Vertices (bisector probes), edge midpoints and exterior points (outward normal probes).

    Every probe points away from the polygon, so the polygon lies in
    ``d . (x - x0) <= 0``.
    """
    out = []
    for i in range(polygon.n):
        probe = choose_probe_direction(polygon.sector_at(i, 1.0))
        out.append(ScanCandidate(polygon.vertices[i].copy(), probe, f"vertex{i}", "vertex"))
    for i, (m, n) in enumerate(zip(polygon.edge_midpoints(), polygon.outward_normals())):
        probe = ProbeDirection.from_vector(n, 0.0)
        out.append(ScanCandidate(m.copy(), probe, f"edge{i}", "edge"))
        out.append(ScanCandidate(m + exterior_offset * n, probe, f"exterior{i}", "exterior"))
    return out


def polygon_exponential_integral(polygon: ConvexPolygon, x0, W) -> np.ndarray:
    """``int_Omega e^{w.(x - x0)} dx`` for every row ``w`` of ``W`` (shape (K, 2)).

    By the divergence theorem with ``d_j e^{w.y} = w_j e^{w.y}``,

        int_Omega e^{w.y} = (1/w_j) sum_edges n_j L (e^{w.(b-x0)} - e^{w.(a-x0)}) / (w.(b-a)),

    with ``j`` the component of largest ``|Re w_j|`` to keep ``1/w_j`` tame.
    """
    W = np.atleast_2d(np.asarray(W, complex))
    x0 = np.asarray(x0, float)
    j = np.argmax(np.abs(W.real), axis=1)
    wj = W[np.arange(len(W)), j]
    total = np.zeros(len(W), complex)
    for (a, b), n in zip(polygon.edges(), polygon.outward_normals()):
        L = float(np.linalg.norm(b - a))
        ea = W @ (a - x0)
        z = W @ (b - a)
        small = np.abs(z) < 1e-6
        zs = np.where(small, 1.0, z)
        phi = np.where(small, 1 + z / 2 + z * z / 6, np.expm1(zs) / zs)
        total += n[j] * L * np.exp(ea) * phi
    return total / wj


def _constant_indicator(source: SourceModel, cgo: CgoSolution, x0) -> complex:
    p = cgo.params
    poly, f = source.support, source.value
    x0 = np.asarray(x0, float)
    out = (f @ p.eta) * polygon_exponential_integral(poly, x0, p.zeta[None])[0]
    Qf, Qx0 = p.Q @ f, p.Q @ x0
    lat = cgo.lattice
    for part in cgo.R_parts:
        a = part.coefficients()
        if not np.any(a):
            continue
        b1, b2 = np.meshgrid(lat.alpha1 + part.shift[0], lat.alpha2 + part.shift[1],
                             indexing="ij")
        bq = np.stack([b1.ravel(), b2.ravel()], axis=1)
        W = p.zeta[None] + 1j * bq @ p.Q
        E = polygon_exponential_integral(poly, x0, W) * np.exp(1j * bq @ Qx0)
        out += np.sum((Qf[0] * a[0].ravel() + Qf[1] * a[1].ravel()) * E)
    return complex(out)


def volume_indicator(source: SourceModel, cgo: CgoSolution, x0, method: str = "auto") -> complex:
    """``int_Omega f . e^{zeta.(x-x0)} (eta + R)`` over a polygonal support.

    ``method="exact"`` (the default for constant sources) expands ``R`` in
    its Fourier modes and integrates each exponential in closed form;
    ``"quadrature"`` uses the polar rule about ``x0``.
    """
    poly = source.support
    if not isinstance(poly, ConvexPolygon):
        raise GeometryError("volume route needs a polygonal support")
    constant = (source.sampler is None and not np.any(source.gradient)
                and (source.hessian is None or not np.any(source.hessian)))
    if method == "auto":
        method = "exact" if constant else "quadrature"
    if method == "exact":
        if not constant:
            raise ValueError("closed-form route needs a constant source")
        return _constant_indicator(source, cgo, x0)
    rule = polygon_rule(poly, x0, cgo.params.zeta, _bandwidth(cgo))
    if len(rule) == 0:
        return 0j
    u0 = cgo.u0(rule.points, x0)
    return rule.integrate(np.sum(source.evaluate(rule.points) * u0, axis=1))


def boundary_indicator(cauchy, cgo: CgoSolution, x0, medium: ElasticMedium) -> complex:
    """``int_{|x|=R1} (u0 . T u - u . T u0) ds`` from measured Cauchy data.

    ``cauchy = (angles, points, u, Tu)`` with uniformly spaced angles.
    Equal to the volume indicator by Betti's formula, but the circle sees
    ``|e^{zeta.(x-x0)}|`` up to ``e^{tau (R1 + |x0|)}`` so cancellation limits
    it to small ``tau``.
    """
    th, pts, u, Tu = cauchy
    R1 = float(np.linalg.norm(pts[0]))
    u0, G0 = cgo.u0(pts, x0, gradient=True)
    Tu0 = traction(G0, unit(th), medium)
    vals = np.sum(u0 * Tu, axis=1) - np.sum(u * Tu0, axis=1)
    return complex(np.sum(vals) * 2 * math.pi * R1 / len(th))


@dataclass
class ScanRow:
    label: str
    kind: str
    point: np.ndarray
    theta_d: float
    tau: np.ndarray
    indicator: np.ndarray
    slope: float
    loglinear_rate: float
    loglinear_r2: float

    @property
    def decay(self) -> str:
        return "algebraic" if self.slope >= ALGEBRAIC_SLOPE_SPLIT else "exponential"

    def at(self, tau: float) -> float:
        i = int(np.argmin(np.abs(self.tau - tau)))
        return float(self.indicator[i])


def _loglinear(tau, values):
    y = np.log(np.maximum(values, 1e-300))
    A = np.vstack([tau, np.ones_like(tau)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    return float(coef[0]), (1.0 - float(np.sum(resid ** 2)) / ss) if ss > 0 else 1.0


@dataclass
class ScanTable:
    rows: list
    reference_tau: float

    def ranked(self) -> list:
        return sorted(self.rows, key=lambda r: (-r.at(self.reference_tau), r.label))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            taus = self.rows[0].tau if self.rows else []
            w.writerow(["rank", "label", "kind", "x", "y", "theta_d"]
                       + [f"I_tau{t:g}" for t in taus] + ["slope", "loglinear_rate",
                                                          "loglinear_r2", "decay"])
            for k, r in enumerate(self.ranked()):
                w.writerow([k, r.label, r.kind] + [f"{v:.17g}" for v in (*r.point, r.theta_d)]
                           + [f"{v:.17g}" for v in r.indicator]
                           + [f"{v:.17g}" for v in (r.slope, r.loglinear_rate, r.loglinear_r2)]
                           + [r.decay])

    def to_dict(self) -> dict:
        return {"reference_tau": self.reference_tau,
                "rows": [{"label": r.label, "kind": r.kind, "point": r.point.tolist(),
                          "theta_d": r.theta_d, "tau": r.tau.tolist(),
                          "indicator": r.indicator.tolist(), "slope": r.slope,
                          "loglinear_rate": r.loglinear_rate, "loglinear_r2": r.loglinear_r2,
                          "decay": r.decay} for r in self.ranked()]}


def corner_scan(candidates: Sequence[ScanCandidate], medium: ElasticMedium,
                tau_sweep=DEFAULT_TAU_SWEEP, source: Optional[SourceModel] = None,
                cauchy=None, lattice=None, reference_tau: float = 80.0) -> ScanTable:
    """Indicator ``|I(x0, d, tau)|`` per candidate and its decay fits.

    With ``source`` the indicator is evaluated through the volume form;
    otherwise ``cauchy`` data are required and the boundary functional is
    used (reliable only at small ``tau``).

    Raises
    ------
    GeometryError
        If the data circle meets the source support.
    """
    if source is None and cauchy is None:
        raise ValueError("need either a source or Cauchy data")
    if cauchy is not None and source is not None and isinstance(source.support, ConvexPolygon):
        R1 = float(np.linalg.norm(cauchy[1][0]))
        if source.support.max_radius() >= R1:
            raise GeometryError("data circle intersects the source support")
    lattice = lattice or default_lattice()
    taus = np.asarray(tau_sweep, float)
    rows = []
    for cand in candidates:
        vals = []
        for tau in taus:
            cgo = cgo_for(medium, cand.probe, tau, lattice)
            if source is not None:
                vals.append(abs(volume_indicator(source, cgo, cand.point)))
            else:
                vals.append(abs(boundary_indicator(cauchy, cgo, cand.point, medium)))
        vals = np.array(vals)
        slope = fit_slope(taus, np.maximum(vals, 1e-300)) if len(taus) > 1 else float("nan")
        rate, r2 = _loglinear(taus, vals) if len(taus) > 1 else (float("nan"), float("nan"))
        rows.append(ScanRow(cand.label, cand.kind, np.asarray(cand.point, float),
                            cand.probe.theta_d, taus, vals, slope, rate, r2))
    return ScanTable(rows, reference_tau)
