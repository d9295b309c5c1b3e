"""Physical and geometric domain types.

Material parameters, density profiles, corner sectors, convex polygons,
probe directions and vector source models. Everything here is immutable
after construction and serializes to plain JSON-compatible dictionaries.

Conventions
-----------
Points are arrays of shape ``(..., 2)``. Angles are absolute radians
measured from the positive x1-axis at the relevant apex. The Navier
operator is ``L = mu*Lap + (lambda+mu)*grad div``, with wavenumbers

    k_p = omega / sqrt(lambda + 2 mu),    k_s = omega / sqrt(mu).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator


class GeometryError(ValueError):
    """Raised for infeasible or degenerate geometric input."""


class MediumError(ValueError):
    """Raised when material parameters violate strong convexity."""


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError(f"points must have a trailing axis of length 2, got {x.shape}")
    return x


def unit(theta) -> np.ndarray:
    """Unit vector(s) ``(cos theta, sin theta)``."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def perp(v) -> np.ndarray:
    """Counter-clockwise rotation by a right angle: ``(v1, v2) -> (-v2, v1)``."""
    v = np.asarray(v)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


# ---------------------------------------------------------------------------
# Density profiles
# ---------------------------------------------------------------------------

DENSITY_KINDS = ("constant-one", "radial-bump", "grid-sampled")


@dataclass(frozen=True)
class DensityProfile:
    """Density rho(x) with rho - 1 supported in the closed disc of radius R.

    Parameters
    ----------
    kind : {"constant-one", "radial-bump", "grid-sampled"}
        ``radial-bump`` is ``1 + a (1 - (|x|/R)^2)^3`` inside the disc, which
        meets 1 at ``|x| = R`` with two continuous derivatives.
        ``grid-sampled`` interpolates ``samples`` given on a uniform grid
        over ``[-R, R]^2`` (bicubic), and is forced to 1 outside the disc.
    R : float
        Support radius of ``rho - 1``.
    amplitude : float
        Contrast ``a`` for the radial bump; must exceed -1.
    samples : ndarray, optional
        Square array of density samples for ``grid-sampled``.
    """

    kind: str = "radial-bump"
    R: float = 1.0
    amplitude: float = 0.3
    samples: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise MediumError(f"unknown density kind {self.kind!r}")
        if not self.R > 0:
            raise MediumError("density support radius must be positive")
        if self.kind == "radial-bump" and not self.amplitude > -1:
            raise MediumError("radial bump needs amplitude > -1 to keep rho positive")
        if self.kind == "grid-sampled":
            if self.samples is None:
                raise MediumError("grid-sampled density needs samples")
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 4:
                raise MediumError("grid samples must be a square array of side >= 4")
            if np.any(s <= 0):
                raise MediumError("density samples must be positive")
            object.__setattr__(self, "samples", s)
            axis = np.linspace(-self.R, self.R, s.shape[0])
            gx, gy = np.gradient(s, axis, axis, edge_order=2)
            mk = lambda a: RegularGridInterpolator((axis, axis), a, method="cubic",
                                                   bounds_error=False, fill_value=None)
            object.__setattr__(self, "_interp", (mk(s), mk(gx), mk(gy)))

    @classmethod
    def constant(cls) -> "DensityProfile":
        return cls(kind="constant-one", R=1.0, amplitude=0.0)

    @classmethod
    def bump(cls, amplitude: float = 0.3, R: float = 1.0) -> "DensityProfile":
        return cls(kind="radial-bump", R=R, amplitude=amplitude)

    @property
    def is_homogeneous(self) -> bool:
        return self.kind == "constant-one" or (self.kind == "radial-bump" and self.amplitude == 0.0)

    def value(self, x) -> np.ndarray:
        """rho at points ``x`` of shape (..., 2)."""
        x = _as_points(x)
        r2 = np.sum(x * x, axis=-1)
        if self.is_homogeneous:
            return np.ones(x.shape[:-1])
        inside = r2 < self.R ** 2
        if self.kind == "radial-bump":
            s = np.where(inside, 1.0 - r2 / self.R ** 2, 0.0)
            return 1.0 + self.amplitude * s ** 3
        out = np.ones(x.shape[:-1])
        if np.any(inside):
            out[inside] = self._interp[0](x[inside])
        return out

    def gradient(self, x) -> np.ndarray:
        """grad rho at points ``x``; shape (..., 2)."""
        x = _as_points(x)
        r2 = np.sum(x * x, axis=-1)
        if self.is_homogeneous:
            return np.zeros(x.shape)
        inside = r2 < self.R ** 2
        if self.kind == "radial-bump":
            s = np.where(inside, 1.0 - r2 / self.R ** 2, 0.0)
            # d/dx (1 - r^2/R^2)^3 = -6 x (1 - r^2/R^2)^2 / R^2
            return (-6.0 * self.amplitude / self.R ** 2) * (s ** 2)[..., None] * x
        out = np.zeros(x.shape)
        if np.any(inside):
            pts = x[inside]
            out[inside] = np.stack([self._interp[1](pts), self._interp[2](pts)], axis=-1)
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "R": self.R, "amplitude": self.amplitude}
        if self.kind == "grid-sampled":
            d["samples"] = self.samples.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DensityProfile":
        samples = d.get("samples")
        kind = d.get("kind", "radial-bump")
        default_amp = cls.amplitude if kind == "radial-bump" else 0.0
        return cls(kind=kind, R=float(d.get("R", 1.0)),
                   amplitude=float(d.get("amplitude", default_amp)),
                   samples=None if samples is None else np.asarray(samples, float))


# ---------------------------------------------------------------------------
# Elastic medium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElasticMedium:
    """Isotropic elastic medium with variable density.

    Attributes
    ----------
    lam, mu : float
        Lame constants. Strong convexity requires ``mu > 0`` and ``lam + mu > 0``.
    omega : float
        Angular frequency, positive.
    rho : DensityProfile
    """

    lam: float = 1.0
    mu: float = 1.0
    omega: float = 2 * math.pi
    rho: DensityProfile = field(default_factory=DensityProfile)

    def __post_init__(self):
        if not self.mu > 0 or not self.lam + self.mu > 0:
            raise MediumError(
                f"strong convexity violated: mu={self.mu}, lambda+mu={self.lam + self.mu}")
        if not self.omega > 0:
            raise MediumError("omega must be positive")

    @property
    def k_p(self) -> float:
        return self.omega / math.sqrt(self.lam + 2 * self.mu)

    @property
    def k_s(self) -> float:
        return self.omega / math.sqrt(self.mu)

    def with_density(self, rho: DensityProfile) -> "ElasticMedium":
        return ElasticMedium(self.lam, self.mu, self.omega, rho)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "omega": self.omega,
                "rho": self.rho.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ElasticMedium":
        rho = DensityProfile.from_dict(d["rho"]) if "rho" in d else DensityProfile()
        return cls(lam=float(d.get("lambda", 1.0)), mu=float(d.get("mu", 1.0)),
                   omega=float(d.get("omega", 2 * math.pi)), rho=rho)


def wavenumbers(medium: ElasticMedium) -> tuple[float, float]:
    """Compressional and shear wavenumbers ``(k_p, k_s)``."""
    return medium.k_p, medium.k_s


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sector:
    """Truncated corner sector ``{apex + r x_hat(theta): 0<r<h, theta_m<theta<theta_M}``.

    The two straight sides are ``gamma_minus`` (angle ``theta_m``) and
    ``gamma_plus`` (angle ``theta_M``); the circular side is ``arc``.
    """

    apex: np.ndarray
    theta_m: float
    theta_M: float
    h: float

    def __post_init__(self):
        object.__setattr__(self, "apex", np.asarray(self.apex, dtype=float).reshape(2))
        opening = self.theta_M - self.theta_m
        if not (0.0 < opening < math.pi):
            raise GeometryError(f"sector opening {opening} not in (0, pi)")
        if not self.h > 0:
            raise GeometryError("sector radius h must be positive")

    @property
    def opening(self) -> float:
        return self.theta_M - self.theta_m

    @property
    def bisector(self) -> float:
        return 0.5 * (self.theta_m + self.theta_M)

    def gamma_minus(self, s) -> np.ndarray:
        """Points on the side at angle theta_m, ``s`` in [0, 1]."""
        s = np.asarray(s, dtype=float)
        return self.apex + (self.h * s)[..., None] * unit(self.theta_m)

    def gamma_plus(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.apex + (self.h * s)[..., None] * unit(self.theta_M)

    def arc(self, theta) -> np.ndarray:
        return self.apex + self.h * unit(theta)

    def contains(self, x) -> np.ndarray:
        x = _as_points(x) - self.apex
        r = np.hypot(x[..., 0], x[..., 1])
        th = np.arctan2(x[..., 1], x[..., 0])
        rel = np.mod(th - self.theta_m, 2 * math.pi)
        return (r < self.h) & (r > 0) & (rel < self.opening)

    def to_dict(self) -> dict:
        return {"apex": self.apex.tolist(), "theta_m": self.theta_m,
                "theta_M": self.theta_M, "h": self.h}

    @classmethod
    def from_dict(cls, d: dict) -> "Sector":
        return cls(np.asarray(d["apex"], float), float(d["theta_m"]),
                   float(d["theta_M"]), float(d["h"]))


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("polygon needs at least three 2D vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if not np.all(cross > 0):
            raise GeometryError("vertices must be strictly convex and counter-clockwise")
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % self.n]) for i in range(self.n)]

    def edge_midpoints(self) -> np.ndarray:
        v = self.vertices
        return 0.5 * (v + np.roll(v, -1, axis=0))

    def outward_normals(self) -> np.ndarray:
        e = np.roll(self.vertices, -1, axis=0) - self.vertices
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=-1)
        return nrm / np.linalg.norm(nrm, axis=1, keepdims=True)

    def area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def contains(self, x) -> np.ndarray:
        x = _as_points(x)
        inside = np.ones(x.shape[:-1], dtype=bool)
        for a, b in self.edges():
            e = b - a
            inside &= (e[0] * (x[..., 1] - a[1]) - e[1] * (x[..., 0] - a[0])) > 0
        return inside

    def vertex_angles(self, i: int) -> tuple[float, float]:
        """Absolute angles ``(theta_m, theta_M)`` of the corner at vertex ``i``."""
        v = self.vertices
        a = v[(i + 1) % self.n] - v[i]
        b = v[(i - 1) % self.n] - v[i]
        tm = math.atan2(a[1], a[0])
        opening = math.acos(np.clip(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)), -1, 1))
        return tm, tm + opening

    def sector_at(self, i: int, h: float) -> Sector:
        tm, tM = self.vertex_angles(i)
        return Sector(self.vertices[i].copy(), tm, tM, h)

    def max_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def to_dict(self) -> dict:
        return {"vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvexPolygon":
        return cls(np.asarray(d["vertices"], float))


# ---------------------------------------------------------------------------
# Probe direction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeDirection:
    """Unit direction ``d`` with ``d_perp = (-sin theta_d, cos theta_d)``.

    ``delta`` is the guaranteed margin ``-d . x_hat(theta) >= delta`` over the
    associated sector.
    """

    theta_d: float
    delta: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.delta < 1.0):
            raise GeometryError("delta must lie in [0, 1)")

    @property
    def d(self) -> np.ndarray:
        return unit(self.theta_d)

    @property
    def d_perp(self) -> np.ndarray:
        return perp(self.d)

    @classmethod
    def from_vector(cls, d, delta: float = 0.5) -> "ProbeDirection":
        d = np.asarray(d, dtype=float)
        return cls(math.atan2(d[1], d[0]), delta)

    def to_dict(self) -> dict:
        return {"theta_d": self.theta_d, "delta": self.delta}

    @classmethod
    def from_dict(cls, d: dict) -> "ProbeDirection":
        return cls(float(d["theta_d"]), float(d.get("delta", 0.5)))


def choose_probe_direction(sector: Sector, margin: float = 0.0) -> ProbeDirection:
    """Bisector probe: ``d = -x_hat(bisector)``, ``delta = cos(opening/2)(1 - margin)``.

    The bisector maximizes ``min_theta -d . x_hat(theta)`` over unit ``d``.
    ``margin = 0`` returns the optimal delta itself.
    """
    if not (0.0 <= margin < 1.0):
        raise ValueError("margin must lie in [0, 1)")
    opening = sector.theta_M - sector.theta_m
    if not (0.0 < opening < math.pi):
        raise GeometryError("no admissible probe direction: opening must lie in (0, pi)")
    delta = math.cos(0.5 * opening) * (1.0 - margin)
    return ProbeDirection(sector.bisector + math.pi, delta)


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------

Support = Union[ConvexPolygon, Sector]


@dataclass(frozen=True)
class SourceModel:
    """Vector source ``f`` supported on a polygon or sector.

    The default construction is polynomial around ``anchor``:

        f(x) = value + gradient (x - anchor) + 0.5 * hessian[(x-anchor), (x-anchor)]

    so value and gradient at the anchor are known exactly. ``hessian`` has
    shape (2, 2, 2) with ``f_i`` quadratic part ``0.5 * H[i] : y y``.

    Attributes
    ----------
    regularity : {"C1a", "Ca"}
    holder_exponent, holder_constant : float
        For ``C1a`` sources the remainder ``f - f(x0) - grad f(x0) y`` is
        bounded by ``holder_constant * |y|^(1 + holder_exponent)``.
    """

    support: Support
    value: np.ndarray = field(default_factory=lambda: np.zeros(2))
    gradient: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    hessian: Optional[np.ndarray] = None
    anchor: Optional[np.ndarray] = None
    regularity: str = "C1a"
    holder_exponent: float = 1.0
    holder_constant: float = 0.0
    sampler: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "value", np.asarray(self.value, float).reshape(2))
        object.__setattr__(self, "gradient", np.asarray(self.gradient, float).reshape(2, 2))
        if self.hessian is not None:
            object.__setattr__(self, "hessian", np.asarray(self.hessian, float).reshape(2, 2, 2))
        if self.anchor is None:
            anchor = self.support.apex if isinstance(self.support, Sector) \
                else self.support.vertices[0]
            object.__setattr__(self, "anchor", np.array(anchor, float))
        else:
            object.__setattr__(self, "anchor", np.asarray(self.anchor, float).reshape(2))
        if self.regularity not in ("C1a", "Ca"):
            raise ValueError("regularity must be 'C1a' or 'Ca'")
        if self.hessian is not None and self.holder_constant == 0.0:
            # |0.5 H[y, y]| <= 0.5 sqrt(sum_i ||H_i||_2^2) |y|^2
            hc = 0.5 * math.sqrt(sum(np.linalg.norm(Hi, 2) ** 2 for Hi in self.hessian))
            object.__setattr__(self, "holder_constant", hc)

    @classmethod
    def constant(cls, support: Support, value) -> "SourceModel":
        return cls(support, value=value)

    @classmethod
    def from_callable(cls, support: Support, fn: Callable, regularity: str = "Ca",
                      holder_exponent: float = 1.0) -> "SourceModel":
        """Wrap an arbitrary vector field ``fn(points) -> (..., 2)`` (masked to the support)."""
        return cls(support, regularity=regularity, holder_exponent=holder_exponent, sampler=fn)

    def _raw(self, x: np.ndarray) -> np.ndarray:
        if self.sampler is not None:
            return np.asarray(self.sampler(x))
        y = x - self.anchor
        out = self.value + y @ self.gradient.T
        if self.hessian is not None:
            out = out + 0.5 * np.einsum("ijk,...j,...k->...i", self.hessian, y, y)
        return out

    def evaluate(self, x) -> np.ndarray:
        """f(x) without the support mask (for quadrature nodes already inside)."""
        return self._raw(_as_points(x))

    def value_at(self, x) -> np.ndarray:
        """f(x), zero outside the support."""
        x = _as_points(x)
        mask = self.support.contains(x)
        return np.where(mask[..., None], self._raw(x), 0.0)

    def gradient_at(self, x) -> np.ndarray:
        """Jacobian ``J[..., i, j] = d f_i / d x_j`` inside the support."""
        x = _as_points(x)
        if self.sampler is not None:
            eps = 1e-6
            cols = [(self._raw(x + eps * e) - self._raw(x - eps * e)) / (2 * eps)
                    for e in np.eye(2)]
            jac = np.stack(cols, axis=-1)
        else:
            jac = np.broadcast_to(self.gradient, x.shape[:-1] + (2, 2)).copy()
            if self.hessian is not None:
                jac = jac + np.einsum("ijk,...k->...ij", self.hessian, x - self.anchor)
        mask = self.support.contains(x)
        return np.where(mask[..., None, None], jac, 0.0)

    def remainder(self, x) -> np.ndarray:
        """``f(x) - f(x0) - grad f(x0) (x - x0)`` at the anchor, unmasked."""
        x = _as_points(x)
        x0 = self.anchor[None]
        f0 = self._raw(x0)[0]
        g0 = self.gradient if self.sampler is None else self.gradient_at(x0)[0]
        return self._raw(x) - f0 - (x - self.anchor) @ np.asarray(g0).T

    def to_dict(self) -> dict:
        if self.sampler is not None:
            raise ValueError("callable-backed sources are not serializable")
        sup = self.support
        d = {"support": ({"polygon": sup.to_dict()} if isinstance(sup, ConvexPolygon)
                         else {"sector": sup.to_dict()}),
             "value": self.value.tolist(), "gradient": self.gradient.tolist(),
             "anchor": self.anchor.tolist(), "regularity": self.regularity,
             "holder_exponent": self.holder_exponent}
        if self.hessian is not None:
            d["hessian"] = self.hessian.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SourceModel":
        sup = d["support"]
        support = (ConvexPolygon.from_dict(sup["polygon"]) if "polygon" in sup
                   else Sector.from_dict(sup["sector"]))
        return cls(support, value=d.get("value", [0, 0]),
                   gradient=d.get("gradient", [[0, 0], [0, 0]]),
                   hessian=d.get("hessian"), anchor=d.get("anchor"),
                   regularity=d.get("regularity", "C1a"),
                   holder_exponent=float(d.get("holder_exponent", 1.0)))


# ---------------------------------------------------------------------------
# Far field split
# ---------------------------------------------------------------------------

def far_field_split(u_inf, x_hat) -> tuple[np.ndarray, np.ndarray]:
    """Split a far-field vector into radial (p) and tangential (s) parts.

    ``u_p = (u . x_hat) x_hat`` and ``u_s = (x_hat_perp . u) x_hat_perp``.
    Works on stacked inputs of shape (..., 2).
    """
    u_inf = np.asarray(u_inf, dtype=complex)
    x_hat = np.asarray(x_hat, dtype=float)
    if not np.allclose(np.linalg.norm(x_hat, axis=-1), 1.0, atol=1e-12):
        raise GeometryError("x_hat must be a unit vector")
    xp = perp(x_hat)
    up = np.sum(u_inf * x_hat, axis=-1)[..., None] * x_hat
    us = np.sum(u_inf * xp, axis=-1)[..., None] * xp
    return up, us
