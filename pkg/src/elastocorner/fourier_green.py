"""Periodic Faddeev-type Green functions on the square S = (-R', R')^2.

Mathematical formulation
------------------------
The half-shift lattice is

    G = { alpha = (pi/R') (m + 1/2, n) : m, n integers },

so every ``e^{i alpha . x}`` is anti-periodic in x1 and periodic in x2 with
period 2R'. For a complex phase vector ``xi = (-tau, i sqrt(tau^2 + k^2))``
(so ``xi . xi = -k^2``) the multiplier

    c(alpha) = 1 / (alpha . alpha - 2 i xi . alpha)

never vanishes on G: its imaginary part is ``2 tau alpha_1`` and
``|alpha_1| >= pi / (2R')``, hence ``|1/c| >= pi tau / R'``.

We normalize

    g_xi(x) = (2R')^{-2} sum_alpha c(alpha) e^{i alpha . x},

which makes ``(Lap + 2 xi . grad) g_xi = -delta`` on S, and therefore
``h_xi = e^{xi . x} g_xi`` a fundamental solution of ``Lap + k^2`` in the disc
of radius 2R' (``(Lap + k^2) h_xi = -delta``, like ``(i/4) H_0(k|x|)``).
With this normalization the periodic convolution ``P f = g_xi * f`` acts on
the ordinary Fourier coefficients of ``f`` by plain multiplication with
``c(alpha)``, so ``||P|| = sup |c| <= R'/(pi tau)``.

Discretization
--------------
Samples live on the uniform grid ``x_j = -R' + j h``, ``h = 2R'/M``, with
``M = 2N``. The half shift is removed by multiplying with
``exp(-i pi x1 / (2R'))`` and then a standard FFT is used. A
:class:`PeriodicField` may also carry a modulation wavevector ``shift``
(``kappa``): its samples are ``e^{i kappa . x}`` times a half-shift series,
which keeps products like ``e^{(xi~ - xi) . x} P~ psi`` exact.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

_EVAL_CHUNK = 4096


@dataclass(frozen=True)
class HalfShiftLattice:
    """Half-shift lattice and the matching sample grid.

    Attributes
    ----------
    R_prime : float
        Half width of the periodic square S.
    N : int
        Truncation order; alpha1 indices are ``m + 1/2`` and alpha2 indices
        ``n`` with ``m, n`` in ``{-N, ..., N-1}``. The sample grid is M x M
        with ``M = 2N``.
    """

    R_prime: float
    N: int

    def __post_init__(self):
        if not self.R_prime > 0:
            raise ValueError("R' must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")

    @property
    def M(self) -> int:
        return 2 * self.N

    @property
    def spacing(self) -> float:
        """Lattice spacing pi/R'."""
        return math.pi / self.R_prime

    @property
    def h(self) -> float:
        """Grid spacing 2R'/M."""
        return 2.0 * self.R_prime / self.M

    @property
    def axis(self) -> np.ndarray:
        return -self.R_prime + self.h * np.arange(self.M)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Grid coordinates; axis 0 is x1, axis 1 is x2."""
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    def grid_points(self) -> np.ndarray:
        x1, x2 = self.mesh()
        return np.stack([x1, x2], axis=-1)

    @property
    def _k(self) -> np.ndarray:
        return np.fft.fftfreq(self.M, 1.0 / self.M)

    @property
    def alpha1(self) -> np.ndarray:
        """alpha1 values in FFT order."""
        return self.spacing * (self._k + 0.5)

    @property
    def alpha2(self) -> np.ndarray:
        return self.spacing * self._k

    def alpha_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.alpha1, self.alpha2, indexing="ij")

    @property
    def points(self) -> np.ndarray:
        """All (2N)^2 lattice points, shape (M*M, 2)."""
        a1, a2 = self.alpha_mesh()
        return np.stack([a1.ravel(), a2.ravel()], axis=-1)

    def disc_mask(self, radius: float) -> np.ndarray:
        x1, x2 = self.mesh()
        return x1 ** 2 + x2 ** 2 < radius ** 2

    # transform plumbing -------------------------------------------------
    def _half_phase(self) -> np.ndarray:
        return np.exp(1j * math.pi * self.axis / (2 * self.R_prime))[:, None]

    def _sign(self) -> np.ndarray:
        k = self._k.astype(int)
        return ((-1.0) ** k)[:, None] * ((-1.0) ** k)[None, :]

    def modulation(self, shift) -> np.ndarray:
        shift = np.asarray(shift, dtype=float)
        if not np.any(shift):
            return np.ones((self.M, self.M))
        x1, x2 = self.mesh()
        return np.exp(1j * (shift[0] * x1 + shift[1] * x2))

    def to_periodic_space(self, samples, shift=(0.0, 0.0)) -> np.ndarray:
        """FFT of de-modulated samples (unnormalized, grid-origin phases)."""
        s = np.asarray(samples, dtype=complex) / self.modulation(shift)
        return np.fft.fft2(s / self._half_phase(), axes=(-2, -1))

    def from_periodic_space(self, spec, shift=(0.0, 0.0)) -> np.ndarray:
        s = np.fft.ifft2(spec, axes=(-2, -1)) * self._half_phase()
        return s * self.modulation(shift)


def build_lattice(R_prime: float, N: int) -> HalfShiftLattice:
    """Construct the half-shift lattice of truncation order ``N``."""
    return HalfShiftLattice(float(R_prime), int(N))


@dataclass
class PeriodicField:
    """Complex samples on the lattice grid, possibly with several components.

    ``samples`` has shape ``(..., M, M)``. The represented function is
    ``exp(i shift . x) * sum_alpha a_alpha exp(i alpha . x)``.
    """

    lattice: HalfShiftLattice
    samples: np.ndarray
    shift: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        self.shift = np.asarray(self.shift, dtype=float).reshape(2)
        M = self.lattice.M
        if self.samples.shape[-2:] != (M, M):
            raise ValueError(f"samples must end with ({M}, {M}), got {self.samples.shape}")

    @property
    def components(self) -> tuple:
        return self.samples.shape[:-2]

    def coefficients(self) -> np.ndarray:
        """Fourier coefficients ``a_alpha`` (FFT order, true normalization)."""
        lat = self.lattice
        spec = lat.to_periodic_space(self.samples, self.shift)
        return spec * lat._sign() / lat.M ** 2

    @classmethod
    def from_coefficients(cls, lattice: HalfShiftLattice, coeffs,
                          shift=(0.0, 0.0)) -> "PeriodicField":
        spec = np.asarray(coeffs) * lattice._sign() * lattice.M ** 2
        return cls(lattice, lattice.from_periodic_space(spec, shift), np.asarray(shift, float))

    def apply_multiplier(self, mult) -> "PeriodicField":
        """Multiply Fourier coefficients by ``mult`` (broadcast over components)."""
        lat = self.lattice
        spec = lat.to_periodic_space(self.samples, self.shift)
        return PeriodicField(lat, lat.from_periodic_space(spec * mult, self.shift), self.shift)

    def gradient(self) -> "PeriodicField":
        """Spectral gradient; adds a trailing component axis of length 2 before the grid."""
        a1, a2 = self.lattice.alpha_mesh()
        k1 = 1j * (a1 + self.shift[0])
        k2 = 1j * (a2 + self.shift[1])
        lat = self.lattice
        spec = lat.to_periodic_space(self.samples, self.shift)
        out = np.stack([lat.from_periodic_space(spec * k1, self.shift),
                        lat.from_periodic_space(spec * k2, self.shift)], axis=-3)
        return PeriodicField(lat, out, self.shift)

    def evaluate(self, points, deriv: tuple[int, int] = (0, 0)) -> np.ndarray:
        """Exact evaluation of the trigonometric series at arbitrary points.

        Parameters
        ----------
        points : array_like, shape (P, 2)
        deriv : (p, q)
            Evaluate ``d^p/dx1^p d^q/dx2^q`` of the field.

        Returns
        -------
        ndarray, shape ``components + (P,)``
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        a = self.coefficients()
        lat = self.lattice
        b1 = lat.alpha1 + self.shift[0]
        b2 = lat.alpha2 + self.shift[1]
        p, q = deriv
        if p or q:
            a = a * ((1j * b1)[:, None] ** p) * ((1j * b2)[None, :] ** q)
        comp = a.shape[:-2]
        flat = a.reshape((-1,) + a.shape[-2:])
        out = np.empty((flat.shape[0], len(pts)), dtype=complex)
        for s in range(0, len(pts), _EVAL_CHUNK):
            chunk = pts[s:s + _EVAL_CHUNK]
            e1 = np.exp(1j * np.outer(chunk[:, 0], b1))
            e2 = np.exp(1j * np.outer(chunk[:, 1], b2))
            for c in range(flat.shape[0]):
                out[c, s:s + _EVAL_CHUNK] = np.einsum("pm,pm->p", e1 @ flat[c], e2)
        return out.reshape(comp + (len(pts),))

    def l2_norm(self, radius: Optional[float] = None) -> float:
        """Grid L2 norm over S, or over the disc of given radius."""
        w = self.lattice.h ** 2
        s = np.abs(self.samples) ** 2
        if radius is not None:
            s = s * self.lattice.disc_mask(radius)
        return math.sqrt(w * float(np.sum(s)))

    # dumps ---------------------------------------------------------------
    def to_csv(self, path) -> None:
        """Row-major CSV dump: one grid row per line, Re/Im interleaved.

        Components are written one after another; a ``#`` header line stores
        the metadata needed by :meth:`from_csv`.
        """
        flat = self.samples.reshape((-1,) + self.samples.shape[-2:])
        hdr = (f"# R_prime={float(self.lattice.R_prime)!r} N={self.lattice.N} "
               f"shift={float(self.shift[0])!r},{float(self.shift[1])!r} "
               f"components={','.join(map(str, self.components)) or '-'}")
        with open(path, "w") as fh:
            fh.write(hdr + "\n")
            for comp in flat:
                inter = np.empty(comp.shape[:-1] + (2 * comp.shape[-1],))
                inter[:, 0::2] = comp.real
                inter[:, 1::2] = comp.imag
                for row in inter:
                    fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "PeriodicField":
        with open(path) as fh:
            hdr = fh.readline().lstrip("#").split()
            meta = dict(item.split("=", 1) for item in hdr)
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        lat = HalfShiftLattice(float(meta["R_prime"]), int(meta["N"]))
        shift = np.array([float(s) for s in meta["shift"].split(",")])
        comps = () if meta["components"] == "-" else tuple(int(c) for c in meta["components"].split(","))
        vals = (data[:, 0::2] + 1j * data[:, 1::2]).reshape(comps + (lat.M, lat.M))
        return cls(lat, vals, shift)

    def to_binary(self, path) -> None:
        """Raw little-endian float64 dump, row-major, Re/Im interleaved."""
        np.ascontiguousarray(self.samples).view(np.float64).astype("<f8").tofile(path)

    @classmethod
    def from_binary(cls, path, lattice: HalfShiftLattice, components: tuple = (),
                    shift=(0.0, 0.0)) -> "PeriodicField":
        raw = np.fromfile(path, dtype="<f8")
        vals = raw.view(np.complex128).reshape(tuple(components) + (lattice.M, lattice.M))
        return cls(lattice, vals, np.asarray(shift, float))


def admissible_xi(tau: float, k: float) -> np.ndarray:
    """``xi = (-tau, i sqrt(tau^2 + k^2))``, so that ``xi . xi = -k^2``."""
    return np.array([-tau, 1j * math.sqrt(tau * tau + k * k)], dtype=complex)


@dataclass(frozen=True)
class SpectralMultiplier:
    """Coefficients ``c(alpha) = 1/(alpha.alpha - 2i xi.alpha)`` on a lattice."""

    xi: np.ndarray
    lattice: HalfShiftLattice
    coefficients: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, xi, lattice: HalfShiftLattice) -> "SpectralMultiplier":
        xi = np.asarray(xi, dtype=complex)
        a1, a2 = lattice.alpha_mesh()
        den = a1 * a1 + a2 * a2 - 2j * (xi[0] * a1 + xi[1] * a2)
        tau = -xi[0].real
        if tau > 0 and abs(xi[0].imag) < 1e-14 and abs(xi[1].real) < 1e-14:
            floor = math.pi * tau / lattice.R_prime
            worst = float(np.min(np.abs(den)))
            if worst < floor * (1 - 1e-12):
                raise AssertionError(f"multiplier denominator {worst} below pi tau/R' = {floor}")
        elif np.min(np.abs(den)) == 0:
            raise ZeroDivisionError("multiplier denominator vanishes on the lattice")
        return cls(xi, lattice, 1.0 / den)

    @property
    def tau(self) -> float:
        return float(-self.xi[0].real)

    def norms(self) -> tuple[float, float, float]:
        """Exact discrete operator norms of P, grad P and Hess P on L2(S)."""
        a1, a2 = self.lattice.alpha_mesh()
        amag2 = a1 * a1 + a2 * a2
        c = np.abs(self.coefficients)
        return float(c.max()), float((np.sqrt(amag2) * c).max()), float((amag2 * c).max())


def apply_P(f: PeriodicField, xi, lattice: Optional[HalfShiftLattice] = None,
            order: int = 0, multiplier: Optional[SpectralMultiplier] = None) -> PeriodicField:
    """Periodic convolution ``P f = g_xi * f`` realized spectrally.

    Parameters
    ----------
    f : PeriodicField
    xi : complex 2-vector
    order : {0, 1, 2}
        0 gives ``P f``; 1 gives ``grad P f`` (new component axis of size 2);
        2 gives the Hessian (two new axes).
    multiplier : SpectralMultiplier, optional
        Reuse a precomputed multiplier.
    """
    lattice = lattice or f.lattice
    if multiplier is None:
        multiplier = SpectralMultiplier.build(xi, lattice)
    if multiplier.tau > 0:
        k2 = -complex(np.dot(multiplier.xi, multiplier.xi)).real
        if multiplier.tau < max(1.0, math.sqrt(max(k2, 0.0))):
            logger.warning("tau=%.3g is small relative to k; P estimates are not in the "
                           "contraction regime", multiplier.tau)
    out = f.apply_multiplier(multiplier.coefficients)
    for _ in range(order):
        out = out.gradient()
    return out


def eval_h_xi(x, xi, lattice: HalfShiftLattice, smooth: bool = True,
              deriv: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Evaluate ``h_xi(x) = e^{xi.x} g_xi(x)`` (or a derivative) by the truncated series.

    The series converges slowly (the kernel is log-singular at 0), so by
    default the coefficients are tapered by the exponential filter
    ``exp(-36 (|alpha|/alpha_max)^8)``. The filter only alters the behaviour
    within about ten grid cells of the origin. ``deriv = (p, q)`` returns
    ``d^p/dx1^p d^q/dx2^q h_xi``; each term ``e^{(xi + i alpha).x}`` simply
    picks up ``(xi + i alpha)`` factors.

    Raises
    ------
    ValueError
        If any evaluation point is the origin.
    """
    pts = np.asarray(x, dtype=float).reshape(-1, 2)
    if np.any(np.hypot(pts[:, 0], pts[:, 1]) == 0):
        raise ValueError("h_xi is singular at x = 0")
    xi = np.asarray(xi, dtype=complex)
    mult = SpectralMultiplier.build(xi, lattice)
    coeffs = mult.coefficients / (2 * lattice.R_prime) ** 2
    if smooth:
        a1, a2 = lattice.alpha_mesh()
        amax = lattice.spacing * lattice.N
        coeffs = coeffs * np.exp(-36.0 * (np.sqrt(a1 ** 2 + a2 ** 2) / amax) ** 8)
    p, q = deriv
    if p or q:
        b1 = xi[0] + 1j * lattice.alpha1
        b2 = xi[1] + 1j * lattice.alpha2
        coeffs = coeffs * (b1[:, None] ** p) * (b2[None, :] ** q)
    g = PeriodicField.from_coefficients(lattice, coeffs).evaluate(pts)
    out = np.exp(pts @ xi) * g
    return out.reshape(np.asarray(x).shape[:-1])


def fit_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def resolving_order(tau: float, R_prime: float, k: float = 0.0) -> int:
    """Smallest power-of-two ``N`` whose lattice reaches ``|alpha| = 2.5 sqrt(tau^2 + k^2)``.

    The multiplier denominator is smallest near the circle
    ``|alpha + (0, s)| = s`` of radius about ``tau``; the sup norms of
    ``grad P`` and ``Hess P`` are attained on it, so the lattice must cover it.
    """
    need = 2.5 * math.hypot(tau, k) * R_prime / math.pi
    return 1 << max(0, math.ceil(math.log2(need)))


def operator_norm_ladder(taus: Sequence[float], k: float,
                         lattice: Optional[HalfShiftLattice] = None,
                         R_prime: float = 2.0) -> dict:
    """Measured norms of P, grad P, Hess P over a tau sweep, with log-log slopes.

    Without ``lattice`` one resolving the largest ``tau`` is built.
    """
    if lattice is None:
        lattice = build_lattice(R_prime, resolving_order(max(taus), R_prime, k))
    elif lattice.N * lattice.spacing < 2 * max(taus):
        logger.warning("lattice N=%d does not reach |alpha| = 2 tau; gradient and Hessian "
                       "norms of P are truncated", lattice.N)
    rows = [SpectralMultiplier.build(admissible_xi(t, k), lattice).norms() for t in taus]
    p, gp, hp = map(np.array, zip(*rows))
    return {"tau": np.asarray(taus, float), "P": p, "gradP": gp, "hessP": hp,
            "slopes": (fit_slope(taus, p), fit_slope(taus, gp), fit_slope(taus, hp)),
            "bound_P": lattice.R_prime / (math.pi * np.asarray(taus, float))}
