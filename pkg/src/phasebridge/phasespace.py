"""The transform bridge between phase-space densities and amplitudes.

Conventions, fixed once for the whole package:

* quasi-density of an amplitude:
      Q(x, p) = (1 / pi alpha) Int dy conj(Psi)(x - y) Psi(x + y) e^{-2 i p y / alpha}
  with y running over the x-lattice offsets, windowed to |y| < L/4 (larger
  offsets wrap around the periodic domain and would alias a ghost copy of
  the state into the far half; the window is exact for states supported in
  the central half). The factor 2 in the kernel makes the natural output
  momentum spacing pi*alpha/L -- HALF the conjugate spacing 2*pi*alpha/L of
  the amplitude itself. The output grid carries that fine spacing
  explicitly; ``resample_momentum`` aligns it onto other lattices.
* transform of a density:
      Wt(x, y) = Int dp W(x, p) e^{+2 i p y / alpha}
  whose y -> 0 column is the position marginal.

Psi(x +/- y) is evaluated by periodic index arithmetic (no interpolation),
so the on-lattice correlation is exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .numerics import Grid1D, PhaseSpaceGrid, UnitSystem, integrate_2d, trig_resample
from .wavefunction import Potential, WaveFunction

_FFT_WORKERS = 2


class NormalizationError(RuntimeError):
    """A transform post-check (mass, reality) failed."""


class DegenerateInputError(ValueError):
    """Operation received an all-zero field."""


@dataclass(frozen=True)
class PhaseSpaceDensity:
    """Real samples W(x_i, p_j) on a rectangular lattice, x along axis 0."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    time: float = 0.0
    units: UnitSystem = UnitSystem()

    def mass(self) -> float:
        return integrate_2d(self.values, self.grid)

    def min_value(self) -> float:
        return float(self.values.min())


@dataclass(frozen=True)
class TransformedDensity:
    """Complex Wt(x_i, y_k) with y on the x-lattice offsets (k - n/2) * dx."""

    x_grid: Grid1D
    y_values: np.ndarray
    values: np.ndarray
    alpha: float
    time: float = 0.0


def gaussian_density(grid: PhaseSpaceGrid, x0: float, p0: float,
                     var_x: float, var_p: float,
                     units: UnitSystem = UnitSystem()) -> PhaseSpaceDensity:
    """Normalized product Gaussian on the lattice (classical initial data)."""
    if var_x <= 0 or var_p <= 0:
        raise ValueError("variances must be positive")
    x = grid.x_grid.points[:, None]
    p = grid.p_grid.points[None, :]
    w = np.exp(-0.5 * (x - x0) ** 2 / var_x - 0.5 * (p - p0) ** 2 / var_p)
    w /= integrate_2d(w, grid)
    return PhaseSpaceDensity(grid=grid, values=w, units=units)


def wigner_of(psi: WaveFunction, alpha: float | None = None) -> PhaseSpaceDensity:
    """Quasi-density of an amplitude on the fine momentum lattice.

    ``alpha`` defaults to the amplitude's own action constant; passing a
    different value probes transform/dynamics mismatch.
    """
    if alpha is None:
        alpha = psi.units.alpha
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if abs(psi.norm() - 1.0) > 1e-8:
        raise NormalizationError(f"input amplitude norm {psi.norm()} != 1")
    n = psi.grid.n_points
    dx = psi.grid.spacing

    # warn when momentum content reaches outside the representable half-band
    spec = np.abs(sfft.fft(psi.values, workers=_FFT_WORKERS))
    band = np.abs(sfft.fftfreq(n)) > 0.25
    if spec[band].max() > 1e-8 * spec.max():
        warnings.warn("amplitude has momentum content beyond half the Nyquist "
                      "band; the quasi-density will alias in p", RuntimeWarning)

    idx = np.arange(n)
    j = idx[None, :]
    i = idx[:, None]
    corr = np.conj(psi.values[(i - j) % n]) * psi.values[(i + j) % n]
    # Correlation window |y| < L/4: offsets beyond a quarter domain wrap the
    # periodic indices through the far edge and would paint a ghost copy of
    # the state at x +- L/2. Zeroing them is exact for states supported in
    # the central half of the domain.
    offsets = (idx + n // 2) % n - n // 2
    corr[:, np.abs(offsets) >= n // 4] = 0.0
    q = sfft.fft(corr, axis=1, workers=_FFT_WORKERS) * (dx / (np.pi * alpha))
    q = sfft.fftshift(q, axes=1)

    imag_peak = float(np.abs(q.imag).max())
    if imag_peak > 1e-12 * max(1.0, float(np.abs(q.real).max())):
        raise NormalizationError(f"imaginary residue {imag_peak:.3e} exceeds 1e-12")
    q = np.ascontiguousarray(q.real)

    p_grid = Grid1D(n, n * np.pi * alpha / psi.grid.length)
    grid = PhaseSpaceGrid(x_grid=psi.grid, p_grid=p_grid)
    mass = integrate_2d(q, grid)
    if abs(mass - 1.0) > 1e-8:
        raise NormalizationError(f"quasi-density mass {mass} deviates from 1")
    return PhaseSpaceDensity(grid=grid, values=q, time=psi.time, units=psi.units)


def transform_of_density(w: PhaseSpaceDensity, alpha: float | None = None) -> TransformedDensity:
    """Wt(x, y) = Int dp W(x, p) e^{2 i p y / alpha} by direct quadrature."""
    if alpha is None:
        alpha = w.units.alpha
    n_x = w.grid.x_grid.n_points
    dx = w.grid.x_grid.spacing
    y = (np.arange(n_x) - n_x // 2) * dx
    p = w.grid.p_grid.points
    kernel = np.exp(2j * np.outer(p, y) / alpha)
    values = w.grid.p_grid.spacing * (w.values @ kernel)
    return TransformedDensity(x_grid=w.grid.x_grid, y_values=y, values=values,
                              alpha=alpha, time=w.time)


def position_marginal(q: PhaseSpaceDensity) -> np.ndarray:
    """P(x) = Int Q dp."""
    return q.grid.p_grid.spacing * q.values.sum(axis=1)


def momentum_marginal(q: PhaseSpaceDensity) -> np.ndarray:
    """Int Q dx, on the density's own p lattice."""
    return q.grid.x_grid.spacing * q.values.sum(axis=0)


def resample_momentum(q: PhaseSpaceDensity, p_grid: Grid1D) -> PhaseSpaceDensity:
    """Band-limited interpolation of W onto a different momentum lattice.

    Exact for densities whose conjugate-domain support fits both lattices;
    in practice good to ~1e-8 for well-resolved states.
    """
    values = trig_resample(q.values, q.grid.p_grid, p_grid.points)
    grid = PhaseSpaceGrid(x_grid=q.grid.x_grid, p_grid=p_grid)
    return PhaseSpaceDensity(grid=grid, values=np.real(values), time=q.time, units=q.units)


def _parity_blocks(wt: TransformedDensity) -> tuple[np.ndarray, np.ndarray]:
    """Rotate Wt(x, y) to the (r, s) = (x + y, x - y) lattice.

    On a shared lattice the rotation fills only cells with r + s of even
    index parity; those split exactly into an (even r, even s) block and an
    (odd r, odd s) block. The two (x, y) preimages of each (r, s) cell are
    averaged (they coincide for any density assembled from amplitudes).
    """
    n = wt.x_grid.n_points
    vals = wt.values
    if vals.shape != (n, n):
        raise ValueError("transformed density must be square on the shared lattice")
    i = np.arange(n)[:, None]
    j_off = np.arange(n)[None, :] - n // 2
    r_idx = (i + j_off) % n
    s_idx = (i - j_off) % n
    acc = np.zeros((n, n), dtype=complex)
    np.add.at(acc, (r_idx.ravel(), s_idx.ravel()), vals.ravel())
    acc *= 0.5
    return acc[0::2, 0::2], acc[1::2, 1::2]


def factorization_residual(wt: TransformedDensity) -> float:
    """Relative L2 distance of Wt from its best product form conj(Psi)(s) Psi(r).

    Zero means the transform separates exactly (pure amplitude); mixtures
    give an order-one residual. Scale invariant.
    """
    total = float(np.linalg.norm(wt.values))
    if total == 0.0:
        raise DegenerateInputError("transformed density is identically zero")
    block_ee, block_oo = _parity_blocks(wt)
    sq_total = 0.0
    sq_resid = 0.0
    for block in (block_ee, block_oo):
        sv = np.linalg.svd(block, compute_uv=False)
        sq = float(np.sum(sv**2))
        sq_total += sq
        if len(sv) > 1:
            sq_resid += sq - float(sv[0] ** 2)
    if sq_total == 0.0:
        raise DegenerateInputError("rotated lattice carries no weight")
    return float(np.sqrt(sq_resid / sq_total))


def mvt_residual(potential: Potential, r: float, s: float) -> float:
    """|(r - s) V'((r + s)/2) - (V(r) - V(s))|.

    Zero for quadratic potentials (midpoint slope is exact); scales as
    (r - s)^3 V'''(midpoint) / 24 for smooth anharmonic ones.
    """
    mid = 0.5 * (r + s)
    lhs = -(r - s) * float(potential.force(mid))
    rhs = float(potential.value(r)) - float(potential.value(s))
    return abs(lhs - rhs)
