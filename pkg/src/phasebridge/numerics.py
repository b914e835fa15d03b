"""Periodic grids, spectral primitives, and quadrature shared by every solver.

All domains are uniform periodic lattices [-L/2, L/2) with power-of-two
point counts, so that FFT-based derivative/shift/advection sub-steps are
exact for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

_FFT_WORKERS = 2


class SizingError(ValueError):
    """Grid construction rejected (size, length, or resolution)."""


class ShapeMismatchError(ValueError):
    """Array shape does not match the grid it claims to live on."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic lattice x_i = -L/2 + i*dx, i = 0..n-1."""

    n_points: int
    length: float

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points < 8:
            raise SizingError(f"n_points must be an integer >= 8, got {self.n_points!r}")
        if not _is_power_of_two(int(self.n_points)):
            raise SizingError(f"n_points must be a power of two, got {self.n_points}")
        if not (self.length > 0.0) or not np.isfinite(self.length):
            raise SizingError(f"length must be a positive finite real, got {self.length!r}")

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def points(self) -> np.ndarray:
        return -0.5 * self.length + self.spacing * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers 2*pi*n/L in FFT order."""
        return 2.0 * np.pi * sfft.fftfreq(self.n_points, d=self.spacing)


def make_grid(n_points: int, length: float) -> Grid1D:
    """Build a periodic grid; rejects non-power-of-two sizes and bad lengths."""
    return Grid1D(int(n_points), float(length))


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Rectangular (x, p) lattice: outer product of two periodic 1D grids.

    Densities are stored as 2D arrays with x along axis 0 and p along axis 1.
    """

    x_grid: Grid1D
    p_grid: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_grid.n_points, self.p_grid.n_points)

    @property
    def cell_area(self) -> float:
        return self.x_grid.spacing * self.p_grid.spacing


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants of a run.

    ``alpha`` is the action constant entering the transform kernel and the
    amplitude dynamics; ``gamma`` is always derived from (charge, mass,
    light_speed) in the Gaussian-units convention and is never stored.
    Defaults are the dimensionless choice alpha = mass = 1.
    """

    alpha: float = 1.0
    mass: float = 1.0
    light_speed: float = 1.0
    charge: float = 1.0
    boltzmann: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not (self.mass > 0):
            raise ValueError(f"mass must be > 0, got {self.mass}")
        if not (self.light_speed > 0):
            raise ValueError(f"light_speed must be > 0, got {self.light_speed}")
        if not (self.boltzmann > 0):
            raise ValueError(f"boltzmann must be > 0, got {self.boltzmann}")

    @property
    def gamma(self) -> float:
        """Radiative self-force timescale (2/3) e^2 / (M c^3), Gaussian units."""
        return (2.0 / 3.0) * self.charge**2 / (self.mass * self.light_speed**3)

    @staticmethod
    def electron_cgs() -> "UnitSystem":
        """Electron constants in Gaussian (cgs) units; alpha set to hbar [erg s]."""
        return UnitSystem(
            alpha=1.054571817e-27,
            mass=9.1093837015e-28,
            light_speed=2.99792458e10,
            charge=4.80320425e-10,
            boltzmann=1.380649e-16,
        )

    @staticmethod
    def electron_si() -> "UnitSystem":
        """Electron constants in SI units; alpha set to hbar [J s].

        The derived ``gamma`` keeps the Gaussian-units formula and is not
        meaningful for this object; SI runs use it only for kinematics.
        """
        return UnitSystem(
            alpha=1.054571817e-34,
            mass=9.1093837015e-31,
            light_speed=2.99792458e8,
            charge=1.602176634e-19,
            boltzmann=1.380649e-23,
        )


def integrate(samples: np.ndarray, grid: Grid1D, axis: int = -1):
    """Periodic rectangle rule dx * sum(samples) along ``axis``.

    Spectrally accurate for smooth periodic integrands.
    """
    samples = np.asarray(samples)
    if samples.shape[axis] != grid.n_points:
        raise ShapeMismatchError(
            f"samples length {samples.shape[axis]} != grid n_points {grid.n_points}"
        )
    return grid.spacing * samples.sum(axis=axis)


def integrate_2d(values: np.ndarray, grid: PhaseSpaceGrid) -> float:
    """Double rectangle rule over an (x, p) lattice."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ShapeMismatchError(f"values shape {values.shape} != grid shape {grid.shape}")
    return float(grid.cell_area * values.sum())


def spectral_shift(samples: np.ndarray, grid: Grid1D, shift, axis: int = -1) -> np.ndarray:
    """Evaluate f(x - shift) by phase multiplication in the conjugate domain.

    ``shift`` may be a scalar or, for 2D input, one value per line transverse
    to ``axis`` (each row advected by its own amount). Exact for band-limited
    periodic data; wraps around the domain. Real input returns real output.
    """
    samples = np.asarray(samples)
    if samples.ndim not in (1, 2):
        raise ShapeMismatchError("spectral_shift supports 1D and 2D arrays only")
    axis = axis % samples.ndim
    if samples.shape[axis] != grid.n_points:
        raise ShapeMismatchError(
            f"samples length {samples.shape[axis]} != grid n_points {grid.n_points}"
        )
    shift = np.asarray(shift, dtype=float)
    if samples.ndim == 2 and shift.ndim == 1:
        other = 1 - axis
        if shift.shape[0] != samples.shape[other]:
            raise ShapeMismatchError(
                f"per-line shift length {shift.shape[0]} != {samples.shape[other]}"
            )
        new_shape = [1, 1]
        new_shape[other] = shift.shape[0]
        shift = shift.reshape(new_shape)

    real_in = not np.iscomplexobj(samples)
    if real_in:
        k = 2.0 * np.pi * sfft.rfftfreq(grid.n_points, d=grid.spacing)
    else:
        k = grid.wavenumbers
    k = k.reshape([-1 if a == axis else 1 for a in range(samples.ndim)])

    if real_in:
        spec = sfft.rfft(samples, axis=axis, workers=_FFT_WORKERS)
        spec *= np.exp(-1j * k * shift)
        return sfft.irfft(spec, n=grid.n_points, axis=axis, workers=_FFT_WORKERS)
    spec = sfft.fft(samples, axis=axis, workers=_FFT_WORKERS)
    spec *= np.exp(-1j * k * shift)
    return sfft.ifft(spec, axis=axis, workers=_FFT_WORKERS)


def spectral_derivative(samples: np.ndarray, grid: Grid1D, order: int = 1) -> np.ndarray:
    """FFT derivative of periodic samples. Odd-order derivatives zero the
    Nyquist mode so real input stays real."""
    samples = np.asarray(samples)
    if samples.shape[-1] != grid.n_points:
        raise ShapeMismatchError("samples length does not match grid")
    k = grid.wavenumbers
    mult = (1j * k) ** order
    if order % 2 == 1:
        mult[grid.n_points // 2] = 0.0
    spec = sfft.fft(samples, axis=-1, workers=_FFT_WORKERS) * mult
    out = sfft.ifft(spec, axis=-1, workers=_FFT_WORKERS)
    if not np.iscomplexobj(samples):
        return out.real
    return out


def trig_resample(samples: np.ndarray, grid: Grid1D, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at arbitrary
    points (band-limited interpolation). O(n * m) dense evaluation."""
    samples = np.asarray(samples)
    if samples.shape[-1] != grid.n_points:
        raise ShapeMismatchError("samples length does not match grid")
    spec = sfft.fft(samples, axis=-1, workers=_FFT_WORKERS) / grid.n_points
    k = grid.wavenumbers
    nyq = grid.n_points // 2
    points = np.asarray(points, dtype=float)
    rel = points - (-0.5 * grid.length)
    kernel = np.exp(1j * np.outer(rel, k))
    # treat the Nyquist mode symmetrically so real data interpolates to real values
    kernel[:, nyq] = np.cos(k[nyq] * rel)
    out = spec @ kernel.T if spec.ndim > 1 else kernel @ spec
    if not np.iscomplexobj(samples):
        return out.real
    return out
