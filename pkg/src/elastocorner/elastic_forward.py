"""Forward source problem for the Navier equation with variable density.

Mathematical formulation
------------------------
The Kupradze matrix

    Gamma_ij(x) = -(i/4mu) delta_ij H0(k_s|x|)
                  - (i/4 omega^2) d_i d_j [H0(k_s|x|) - H0(k_p|x|)]

satisfies ``(L + omega^2) Gamma = delta I`` and the radiation condition.
Writing ``G_k = (i/4) H0(k|x|)`` (so ``(Lap + k^2) G_k = -delta``),

    Gamma = -(1/mu) G_s I - (1/omega^2) grad grad (G_s - G_p).

The radiating solution of ``L u + omega^2 rho u = f`` solves the
Lippmann-Schwinger equation

    u = W[f] + omega^2 W[(1 - rho) u],      W[g] = Gamma * g.

Volume potential
----------------
``W`` is discretized as a Nystrom convolution on a uniform grid. The
weights are those of the trapezoidal rule applied to the kernel cut off
at radius ``L`` (larger than any source-target distance), with the
singular near-diagonal weights obtained exactly from the closed-form
Fourier transform of the truncated Hankel kernel

    G_L^(s) = [1 + (i pi L / 2)(s J1(sL) H0(kL) - k J0(sL) H1(kL))] / (s^2 - k^2),

and its removable value ``(i pi L^2 / 4)(J0 H0 + J1 H1)(kL)`` at ``s = k``.
The convolution is carried out by zero-padded FFTs. For smooth densities
the rule is spectrally accurate.

Far field
---------
From ``H0(z) ~ sqrt(2/(pi z)) e^{i(z - pi/4)}`` and ``F = f + omega^2 (1-rho) u``,

    u_p^inf(x^) = c_p x^ x^T  int e^{-i k_p x^.y} F(y) dy,
    u_s^inf(x^) = c_s x^p x^p^T int e^{-i k_s x^.y} F(y) dy,

    c_p = e^{-3 i pi/4} / (2 (lambda + 2 mu) sqrt(2 pi k_p)),
    c_s = e^{-3 i pi/4} / (2 mu sqrt(2 pi k_s)),

so that ``u ~ r^{-1/2} (e^{i k_p r} u_p^inf + e^{i k_s r} u_s^inf)``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.fft import fft2, ifft2, next_fast_len
from scipy.sparse.linalg import LinearOperator, gmres
from scipy.special import hankel1, jv

from .domain import ConvexPolygon, ElasticMedium, SourceModel, far_field_split, perp, unit

logger = logging.getLogger(__name__)

MIN_POINTS_PER_WAVELENGTH = 6.0


class ResolutionError(ValueError):
    """Grid too coarse for the shear wavelength."""


class ContrastError(RuntimeError):
    """Lippmann-Schwinger solve failed to converge."""


# ---------------------------------------------------------------------------
# Kupradze matrix
# ---------------------------------------------------------------------------

def _radial_parts(r, medium: ElasticMedium, order: int = 0):
    """Coefficients of ``Gamma = a(r) I + b(r) x^ x^T`` and their r-derivatives."""
    ks, kp, w2, mu = medium.k_s, medium.k_p, medium.omega ** 2, medium.mu
    zs, zp = ks * r, kp * r
    H0s, H1s, H0p, H1p = hankel1(0, zs), hankel1(1, zs), hankel1(0, zp), hankel1(1, zp)
    d1 = lambda H0, H1, z: H0 - H1 / z                 # H1'
    d2 = lambda H0, H1, z: -H1 - H0 / z + 2 * H1 / z ** 2  # H1''
    F1 = -ks * H1s + kp * H1p
    F2 = -ks ** 2 * d1(H0s, H1s, zs) + kp ** 2 * d1(H0p, H1p, zp)
    a = -0.25j / mu * H0s - 0.25j / w2 * F1 / r
    b = -0.25j / w2 * (F2 - F1 / r)
    if order == 0:
        return a, b
    F3 = -ks ** 3 * d2(H0s, H1s, zs) + kp ** 3 * d2(H0p, H1p, zp)
    da = 0.25j / mu * ks * H1s - 0.25j / w2 * (F2 / r - F1 / r ** 2)
    db = -0.25j / w2 * (F3 - F2 / r + F1 / r ** 2)
    return a, b, da, db


@dataclass(frozen=True)
class KupradzeMatrix:
    """Evaluator of the Kupradze matrix and its gradient at nonzero points."""

    medium: ElasticMedium

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        r = np.hypot(x[..., 0], x[..., 1])
        if np.any(r == 0):
            raise ValueError("Kupradze matrix is singular at the origin")
        xh = x / r[..., None]
        a, b = _radial_parts(r, self.medium)
        return a[..., None, None] * np.eye(2) + b[..., None, None] * xh[..., :, None] * xh[..., None, :]

    def gradient(self, x) -> np.ndarray:
        """``D[..., i, j, k] = d Gamma_ij / d x_k``."""
        x = np.asarray(x, float)
        r = np.hypot(x[..., 0], x[..., 1])
        xh = x / r[..., None]
        a, b, da, db = _radial_parts(r, self.medium, order=1)
        I = np.eye(2)
        xx = xh[..., :, None] * xh[..., None, :]
        out = (da[..., None, None, None] * I[:, :, None] * xh[..., None, None, :]
               + db[..., None, None, None] * xx[..., :, :, None] * xh[..., None, None, :])
        # d_k (x_i x_j) = [(d_ik - x_i x_k) x_j + x_i (d_jk - x_j x_k)] / r
        P = I - xx
        dxx = (P[..., :, None, :] * xh[..., None, :, None]
               + xh[..., :, None, None] * P[..., None, :, :]) / r[..., None, None, None]
        return out + b[..., None, None, None] * dxx


# ---------------------------------------------------------------------------
# Grid and volume potential
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForwardGrid:
    """Uniform cell-centred grid on the box ``[-B, B]^2`` with M points per side."""

    B: float
    M: int

    @property
    def h(self) -> float:
        return 2.0 * self.B / self.M

    @property
    def axis(self) -> np.ndarray:
        return -self.B + self.h * (np.arange(self.M) + 0.5)

    def points(self) -> np.ndarray:
        x1, x2 = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    def to_dict(self) -> dict:
        return {"B": self.B, "M": self.M}


def truncated_helmholtz_symbol(s, k: float, L: float) -> np.ndarray:
    """Fourier transform of ``(i/4) H0(k|x|)`` restricted to ``|x| < L``."""
    s = np.asarray(s, float)
    kL = k * L
    H0, H1 = hankel1(0, kL), hankel1(1, kL)
    num = 1 + 0.5j * math.pi * L * (s * jv(1, s * L) * H0 - k * jv(0, s * L) * H1)
    den = s * s - k * k
    near = np.abs(den) < 1e-9 * k * k
    out = np.where(near, 0.0, num / np.where(near, 1.0, den))
    if np.any(near):
        lim = 0.25j * math.pi * L * L * (jv(0, kL) * H0 + jv(1, kL) * H1)
        out = np.where(near, lim, out)
    return out


class VolumePotential:
    """``W[g] = int Gamma(x - y) g(y) dy`` on a :class:`ForwardGrid`.

    Raises
    ------
    ResolutionError
        Fewer than six grid points per shear wavelength.
    """

    def __init__(self, grid: ForwardGrid, medium: ElasticMedium):
        ppw = (2 * math.pi / medium.k_s) / grid.h
        if ppw < MIN_POINTS_PER_WAVELENGTH:
            raise ResolutionError(f"{ppw:.2f} points per shear wavelength (< 6)")
        self.grid, self.medium = grid, medium
        B, h = grid.B, grid.h
        L = 2 * math.sqrt(2) * B * 1.02
        n = next_fast_len(int(math.ceil((2 * B + L) / h)) + 4)
        self.n_pad, self.L = n, L
        xi = 2 * math.pi * np.fft.fftfreq(n, h)
        x1, x2 = np.meshgrid(xi, xi, indexing="ij")
        s = np.hypot(x1, x2)
        Gs = truncated_helmholtz_symbol(s, medium.k_s, L)
        Gp = truncated_helmholtz_symbol(s, medium.k_p, L)
        w2, mu = medium.omega ** 2, medium.mu
        diff = (Gs - Gp) / w2
        # Gamma^ = -(1/mu) Gs I + (xi xi^T / omega^2)(Gs - Gp)
        self.symbol = np.empty((2, 2, n, n), complex)
        self.symbol[0, 0] = -Gs / mu + x1 * x1 * diff
        self.symbol[1, 1] = -Gs / mu + x2 * x2 * diff
        self.symbol[0, 1] = self.symbol[1, 0] = x1 * x2 * diff

    def __call__(self, g) -> np.ndarray:
        g = np.asarray(g, complex)
        M, n = self.grid.M, self.n_pad
        pad = np.zeros((2, n, n), complex)
        pad[:, :M, :M] = g
        gh = fft2(pad, axes=(-2, -1))
        out = np.einsum("ijab,jab->iab", self.symbol, gh)
        return ifft2(out, axes=(-2, -1))[:, :M, :M]


def volume_potential(g, medium: ElasticMedium, grid: ForwardGrid) -> np.ndarray:
    """Convenience wrapper around :class:`VolumePotential`."""
    return VolumePotential(grid, medium)(g)


def spectral_navier(u, medium: ElasticMedium, grid: ForwardGrid, rho=None) -> np.ndarray:
    """``L u + omega^2 rho u`` by FFT differentiation (u must vanish near the box edge)."""
    u = np.asarray(u, complex)
    k = 2 * math.pi * np.fft.fftfreq(grid.M, grid.h)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    uh = np.fft.fft2(u, axes=(-2, -1))
    div = 1j * k1 * uh[0] + 1j * k2 * uh[1]
    lap = -(k1 ** 2 + k2 ** 2)
    Lu = np.stack([medium.mu * lap * uh[0] + (medium.lam + medium.mu) * 1j * k1 * div,
                   medium.mu * lap * uh[1] + (medium.lam + medium.mu) * 1j * k2 * div])
    Lu = np.fft.ifft2(Lu, axes=(-2, -1))
    if rho is None:
        rho = medium.rho.value(grid.points())
    return Lu + medium.omega ** 2 * rho * u


def stencil_navier(u, medium: ElasticMedium, grid: ForwardGrid, rho=None) -> np.ndarray:
    """Second-order finite-difference ``L u + omega^2 rho u`` on interior nodes (edges set to 0)."""
    u = np.asarray(u, complex)
    h = grid.h
    out = np.zeros_like(u)
    c = (slice(1, -1), slice(1, -1))
    d11 = lambda f: (f[2:, 1:-1] - 2 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / h ** 2
    d22 = lambda f: (f[1:-1, 2:] - 2 * f[1:-1, 1:-1] + f[1:-1, :-2]) / h ** 2
    d12 = lambda f: (f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]) / (4 * h * h)
    lam, mu = medium.lam, medium.mu
    u1, u2 = u
    out[0][c] = mu * (d11(u1) + d22(u1)) + (lam + mu) * (d11(u1) + d12(u2))
    out[1][c] = mu * (d11(u2) + d22(u2)) + (lam + mu) * (d12(u1) + d22(u2))
    if rho is None:
        rho = medium.rho.value(grid.points())
    out[:, 1:-1, 1:-1] += medium.omega ** 2 * (rho * u)[:, 1:-1, 1:-1]
    return out


# ---------------------------------------------------------------------------
# Forward solve
# ---------------------------------------------------------------------------

@dataclass
class FarFieldPattern:
    """Far-field amplitudes sampled at uniform directions on the unit circle."""

    angles: np.ndarray
    u_p: np.ndarray
    u_s: np.ndarray

    @property
    def directions(self) -> np.ndarray:
        return unit(self.angles)

    @property
    def u_inf(self) -> np.ndarray:
        return self.u_p + self.u_s

    def max_amplitude(self) -> float:
        return float(np.max(np.linalg.norm(self.u_inf, axis=1)))

    def energies(self) -> tuple[float, float]:
        """``(int |u_p|^2, int |u_s|^2)`` over the unit circle (trapezoid)."""
        w = 2 * math.pi / len(self.angles)
        return (w * float(np.sum(np.abs(self.u_p) ** 2)), w * float(np.sum(np.abs(self.u_s) ** 2)))

    def split_error(self) -> float:
        xh = self.directions
        return float(max(np.abs(np.sum(self.u_p * perp(xh), axis=1)).max(),
                         np.abs(np.sum(self.u_s * xh, axis=1)).max()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["angle", "up1_re", "up1_im", "up2_re", "up2_im",
                        "us1_re", "us1_im", "us2_re", "us2_im"])
            for a, p, s in zip(self.angles, self.u_p, self.u_s):
                w.writerow([f"{v:.17g}" for v in (a, p[0].real, p[0].imag, p[1].real, p[1].imag,
                                                  s[0].real, s[0].imag, s[1].real, s[1].imag)])

    def summary(self) -> dict:
        ep, es = self.energies()
        return {"max_amplitude": self.max_amplitude(), "energy_p": ep, "energy_s": es,
                "n_directions": int(len(self.angles))}


@dataclass
class ForwardSolution:
    """Radiating solution on the grid together with its effective source ``F``."""

    medium: ElasticMedium
    grid: ForwardGrid
    u: np.ndarray
    f: np.ndarray
    iterations: int = 0
    method: str = "direct"

    @property
    def F(self) -> np.ndarray:
        rho = self.medium.rho.value(self.grid.points())
        return self.f + self.medium.omega ** 2 * (1 - rho) * self.u

    def _sources(self):
        F = self.F.reshape(2, -1)
        keep = np.any(F != 0, axis=0)
        return self.grid.points().reshape(-1, 2)[keep], F[:, keep]

    def field_at(self, points, chunk: int = 512) -> np.ndarray:
        """``u(x) = h^2 sum_j Gamma(x - y_j) F_j`` for points away from the sources."""
        pts = np.asarray(points, float).reshape(-1, 2)
        y, F = self._sources()
        K = KupradzeMatrix(self.medium)
        out = np.empty((len(pts), 2), complex)
        for s in range(0, len(pts), chunk):
            G = K(pts[s:s + chunk, None, :] - y[None])  # (p, n, 2, 2)
            out[s:s + chunk] = np.einsum("pnij,jn->pi", G, F)
        return out * self.grid.h ** 2

    def gradient_at(self, points, chunk: int = 256) -> np.ndarray:
        """Jacobian ``d u_i / d x_k`` at points away from the sources."""
        pts = np.asarray(points, float).reshape(-1, 2)
        y, F = self._sources()
        K = KupradzeMatrix(self.medium)
        out = np.empty((len(pts), 2, 2), complex)
        for s in range(0, len(pts), chunk):
            D = K.gradient(pts[s:s + chunk, None, :] - y[None])  # (p, n, i, j, k)
            out[s:s + chunk] = np.einsum("pnijk,jn->pik", D, F)
        return out * self.grid.h ** 2

    def cauchy_data(self, R1: float, n: int = 256):
        """Displacement and traction on the circle ``|x| = R1``.

        Returns ``(angles, points, u, T_nu u)``.
        """
        th = 2 * math.pi * np.arange(n) / n
        pts = R1 * unit(th)
        u = self.field_at(pts)
        J = self.gradient_at(pts)
        return th, pts, u, traction(J, unit(th), self.medium)

    def far_field(self, n_dirs: int = 128) -> FarFieldPattern:
        return far_field(self, n_dirs)


def traction(J, normal, medium: ElasticMedium) -> np.ndarray:
    """``T_nu u = lambda (div u) nu + mu (grad u + grad u^T) nu`` from Jacobians ``J[.., i, k]``."""
    J = np.asarray(J)
    nu = np.asarray(normal)
    div = J[..., 0, 0] + J[..., 1, 1]
    sym = J + np.swapaxes(J, -1, -2)
    return medium.lam * div[..., None] * nu + medium.mu * np.einsum("...ik,...k->...i", sym, nu)


def _grid_source(f, grid: ForwardGrid) -> np.ndarray:
    if isinstance(f, SourceModel):
        return np.moveaxis(f.value_at(grid.points()), -1, 0).astype(complex)
    if callable(f):
        return np.moveaxis(np.asarray(f(grid.points())), -1, 0).astype(complex)
    return np.asarray(f, complex)


def solve_forward(f, medium: ElasticMedium, grid: ForwardGrid, tol: float = 1e-10,
                  max_iter: int = 60, potential: Optional[VolumePotential] = None) -> ForwardSolution:
    """Solve ``u = W[f] + omega^2 W[(1 - rho) u]``.

    Born (fixed-point) iteration is tried first; if it stalls, GMRES is
    used on the same operator.

    Parameters
    ----------
    f : SourceModel, callable or array (2, M, M)

    Raises
    ------
    ContrastError
        If GMRES fails to reach the tolerance.
    """
    W = potential or VolumePotential(grid, medium)
    fg = _grid_source(f, grid)
    outside = np.linalg.norm(grid.points(), axis=-1) > medium.rho.R * (1 + 1e-12)
    amp = np.abs(fg).max(initial=0.0)
    if amp > 0 and np.abs(fg[:, outside]).max(initial=0.0) > 1e-8 * amp:
        raise ValueError("source support is not contained in D_R")
    rhs = W(fg)
    rho = medium.rho.value(grid.points())
    q = medium.omega ** 2 * (1 - rho)
    if not np.any(q):
        return ForwardSolution(medium, grid, rhs, fg, 1, "direct")
    u = rhs.copy()
    nrm = lambda a: float(np.linalg.norm(a))
    prev = np.inf
    for it in range(1, max_iter + 1):
        un = rhs + W(q * u)
        res = nrm(un - u) / max(nrm(un), 1e-300)
        u = un
        if res < tol:
            return ForwardSolution(medium, grid, u, fg, it, "fixed-point")
        if it > 3 and res > 0.9 * prev:
            break
        prev = res
    logger.info("Born iteration not contracting; switching to GMRES")
    shape = (2, grid.M, grid.M)

    def mv(x):
        x = x.reshape(shape)
        return (x - W(q * x)).ravel()

    A = LinearOperator((2 * grid.M ** 2,) * 2, matvec=mv, dtype=complex)
    count = [0]
    sol, info = gmres(A, rhs.ravel(), x0=u.ravel(), rtol=tol, atol=0.0, restart=80,
                      maxiter=20, callback=lambda _: count.__setitem__(0, count[0] + 1),
                      callback_type="pr_norm")
    if info != 0:
        raise ContrastError(f"GMRES did not converge (info={info})")
    return ForwardSolution(medium, grid, sol.reshape(shape), fg, count[0], "gmres")


def far_field(solution: ForwardSolution, n_dirs: int = 128) -> FarFieldPattern:
    """Far-field pattern from the effective source ``F = f + omega^2 (1-rho) u``."""
    med = solution.medium
    th = 2 * math.pi * np.arange(n_dirs) / n_dirs
    xh = unit(th)
    y, F = solution._sources()
    h2 = solution.grid.h ** 2
    cp = np.exp(-0.75j * math.pi) / (2 * (med.lam + 2 * med.mu) * math.sqrt(2 * math.pi * med.k_p))
    cs = np.exp(-0.75j * math.pi) / (2 * med.mu * math.sqrt(2 * math.pi * med.k_s))
    Fp = h2 * np.exp(-1j * med.k_p * (xh @ y.T)) @ F.T   # (n_dirs, 2)
    Fs = h2 * np.exp(-1j * med.k_s * (xh @ y.T)) @ F.T
    up, _ = far_field_split(cp * Fp, xh)
    _, us = far_field_split(cs * Fs, xh)
    return FarFieldPattern(th, up, us)


def farfield_crosscheck(solution: ForwardSolution, radii, n_dirs: int = 32) -> np.ndarray:
    """Max over directions of ``|r^{1/2} u(r x^) - e^{i k_p r} u_p - e^{i k_s r} u_s|`` per radius."""
    ff = far_field(solution, n_dirs)
    med = solution.medium
    out = []
    for r in radii:
        u = solution.field_at(r * ff.directions)
        pred = np.exp(1j * med.k_p * r) * ff.u_p + np.exp(1j * med.k_s * r) * ff.u_s
        out.append(float(np.max(np.linalg.norm(math.sqrt(r) * u - pred, axis=1))))
    return np.array(out)


# ---------------------------------------------------------------------------
# Non-radiating sources
# ---------------------------------------------------------------------------

def smooth_bump(x, center, radius: float, power: int = 8) -> np.ndarray:
    """Polynomial bump ``(1 - s^2)^power`` with ``s = |x - c| / radius`` (peak 1).

    The bump is only ``C^(power-1)``, but its spectrum decays algebraically
    from the first wavenumber on; the ``C^inf`` bump ``exp(1 - 1/(1 - s^2))``
    decays root-exponentially and leaves about ``1e-4`` of its energy at the
    Nyquist frequency of a 128-point grid, which the solver then reproduces
    as grid-scale noise.
    """
    x = np.asarray(x, float)
    s2 = np.sum((x - np.asarray(center)) ** 2, axis=-1) / radius ** 2
    return np.clip(1.0 - s2, 0.0, None) ** power


def bump_field(support_radius: float = 0.7, center=(0.0, 0.0)) -> Callable:
    """Smooth test field ``g`` supported in the disc ``|x - center| < support_radius``.

    Two off-centre bumps, the second modulated by ``cos(3 x1)`` so that the
    field has no symmetry the solver could exploit.
    """
    c = np.asarray(center, float)
    s = support_radius / 0.7

    def g(x):
        x = np.asarray(x, float)
        return np.stack([smooth_bump(x, c + s * np.array([0.1, 0.0]), 0.6 * s),
                         0.5 * smooth_bump(x, c + s * np.array([0.0, 0.1]), 0.5 * s)
                         * np.cos(3 * x[..., 0])], -1)
    return g


@dataclass
class NonRadiatingSource:
    """``f0 = (L + omega^2 rho) g`` sampled on a grid, with the generating ``g``."""

    grid: ForwardGrid
    g: np.ndarray
    f0: np.ndarray
    support_radius: float
    support_center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def as_source(self) -> SourceModel:
        """Wrap as a :class:`SourceModel` with a disc-shaped support polygon (64-gon)."""
        th = 2 * math.pi * np.arange(64) / 64
        rad = self.support_radius / math.cos(math.pi / 64)
        poly = ConvexPolygon(self.support_center + rad * unit(th))
        k = 2 * math.pi * np.fft.fftfreq(self.grid.M, self.grid.h)
        coeffs = np.fft.fft2(self.f0, axes=(-2, -1)) / self.grid.M ** 2
        x0 = self.grid.axis[0]

        def sample(x):
            x = np.asarray(x, float)
            flat = x.reshape(-1, 2)
            e1 = np.exp(1j * np.outer(flat[:, 0] - x0, k))
            e2 = np.exp(1j * np.outer(flat[:, 1] - x0, k))
            vals = np.stack([np.einsum("pm,pm->p", e1 @ coeffs[c], e2) for c in range(2)], -1)
            return vals.reshape(x.shape).real
        return SourceModel.from_callable(poly, sample, regularity="C1a")


def make_nonradiating(g: Callable, medium: ElasticMedium, grid: ForwardGrid,
                      support_radius: float, center=(0.0, 0.0)) -> NonRadiatingSource:
    """Manufacture ``f0 = (L + omega^2 rho) g`` spectrally on the grid.

    Parameters
    ----------
    g : callable
        Smooth vector field ``g(points) -> (..., 2)`` supported in the disc
        of radius ``support_radius`` around ``center``.

    Raises
    ------
    ValueError
        If that disc is not strictly inside the density support disc.
    """
    center = np.asarray(center, float)
    if np.linalg.norm(center) + support_radius >= medium.rho.R:
        raise ValueError("g must be supported strictly inside D_R")
    gv = np.moveaxis(np.asarray(g(grid.points()), float), -1, 0).astype(complex)
    f0 = spectral_navier(gv, medium, grid).real
    # spectral differentiation leaks roundoff outside supp g
    f0[:, np.linalg.norm(grid.points() - center, axis=-1) >= support_radius] = 0.0
    return NonRadiatingSource(grid, gv, f0.astype(complex), support_radius, center)
