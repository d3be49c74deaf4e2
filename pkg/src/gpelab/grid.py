"""Periodic square grid with spectral differentiation and quadrature.

The computational domain is the square [-L, L]^2 with N points per side and
periodic boundary conditions; all fields handled here decay far below
quadrature tolerance at the boundary, so the periodic trapezoid rule
(h^2 * sum) is spectrally accurate and the FFT Laplacian is exact for the
resolved modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.fft import irfft2, rfft2

from .errors import GridMismatch, ZeroField


@dataclass(frozen=True)
class Grid2D:
    """Uniform N x N grid on [-L, L]^2, periodic, N even."""

    half_width: float
    n: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.n % 2 != 0 or self.n < 32:
            raise ValueError("n must be an even integer >= 32")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X, Y) with values[i, j] = f(axis[i], axis[j])."""
        return tuple(np.meshgrid(self.axis, self.axis, indexing="ij"))

    @cached_property
    def k_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def k2_rfft(self) -> np.ndarray:
        """|k|^2 table matching rfft2 layout."""
        kx = self.k_axis
        ky = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.h)
        return kx[:, None] ** 2 + ky[None, :] ** 2

    @cached_property
    def _rfft_weights(self) -> np.ndarray:
        # Parseval weights: interior rfft columns represent two fft columns.
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    def radius_from(self, center: tuple[float, float]) -> np.ndarray:
        x, y = self.coords
        return np.hypot(x - center[0], y - center[1])

    def spectral_sq_integral(self, fhat: np.ndarray, weight: np.ndarray | float = 1.0) -> float:
        """h^2/N^2 * sum(weight * |fhat|^2) over the rfft2 layout."""
        power = (fhat.real**2 + fhat.imag**2) * self._rfft_weights[None, :]
        return float(self.h**2 / self.n**2 * np.sum(weight * power))


@dataclass
class ScalarField:
    """Real field sampled on a Grid2D."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError("values shape does not match grid")

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "ScalarField":
        x, y = grid.coords
        return cls(grid, fn(x, y))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")


def _same_grid(*fields: ScalarField) -> Grid2D:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid is not grid and f.grid != grid:
            raise GridMismatch("fields live on different grids")
    return grid


def integrate(f: ScalarField) -> float:
    """Periodic-trapezoid quadrature h^2 * sum(values)."""
    return float(f.grid.h**2 * np.sum(f.values))


def integrate_values(grid: Grid2D, values: np.ndarray) -> float:
    return float(grid.h**2 * np.sum(values))


def gradient_sq_integral(f: ScalarField) -> float:
    """Spectral evaluation of the Dirichlet energy, always >= 0."""
    grid = f.grid
    fhat = rfft2(f.values)
    return grid.spectral_sq_integral(fhat, grid.k2_rfft)


def apply_laplacian(f: ScalarField) -> ScalarField:
    grid = f.grid
    fhat = rfft2(f.values)
    lap = irfft2(-grid.k2_rfft * fhat, s=f.values.shape)
    return ScalarField(grid, lap)


def gn_quotient(f: ScalarField) -> float:
    """J(u) = int|grad u|^2 * int u^2 / int u^4; scale invariant, minimized by
    the ground-state radial profile where it equals half its squared mass."""
    vals = f.values
    h2 = f.grid.h**2
    quartic = float(h2 * np.sum(vals**4))
    if quartic < 1e-300:
        raise ZeroField("int u^4 vanishes")
    mass = float(h2 * np.sum(vals**2))
    return gradient_sq_integral(f) * mass / quartic


def normalize(f: ScalarField) -> ScalarField:
    mass = integrate_values(f.grid, f.values**2)
    if mass < 1e-300:
        raise ZeroField("cannot normalize a zero field")
    return ScalarField(f.grid, f.values / np.sqrt(mass))
