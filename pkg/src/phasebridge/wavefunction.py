"""Configuration-space dynamics: amplitude evolution, stationary states,
and the free-particle propagator.

The amplitude Psi obeys  i*alpha dPsi/dt = [-(alpha^2/2M) d2/dx2 + V(x)] Psi
on a periodic grid; ``alpha`` is the action constant carried by UnitSystem.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft
import scipy.linalg

from .numerics import Grid1D, UnitSystem, integrate

_FFT_WORKERS = 2


class UnderResolvedError(ValueError):
    """Requested structure is too fine for the grid."""


class DomainFitError(ValueError):
    """State does not fit inside the periodic domain."""


class StabilityError(RuntimeError):
    """Evolution produced NaN/overflow or violated its norm bound."""


class EigensolverError(RuntimeError):
    """Eigenproblem failed to converge or failed the residual check."""


# ---------------------------------------------------------------------------
# model potentials


@dataclass(frozen=True)
class Potential:
    """Analytic model potential with closed-form V, V', V'''.

    ``kind`` is one of free | harmonic | quartic | finite_well | table.
    """

    kind: str
    params: tuple = ()

    @staticmethod
    def free() -> "Potential":
        return Potential("free")

    @staticmethod
    def harmonic(omega0: float, mass: float = 1.0) -> "Potential":
        """V(x) = (1/2) * mass * omega0^2 * x^2."""
        return Potential("harmonic", (float(omega0), float(mass)))

    @staticmethod
    def quartic(coefficient: float = 1.0) -> "Potential":
        """V(x) = coefficient * x^4."""
        return Potential("quartic", (float(coefficient),))

    @staticmethod
    def finite_well(depth: float, width: float) -> "Potential":
        """V(x) = -depth for |x| < width/2, else 0."""
        if depth <= 0 or width <= 0:
            raise ValueError("finite_well needs positive depth and width")
        return Potential("finite_well", (float(depth), float(width)))

    @staticmethod
    def from_table(x: np.ndarray, v: np.ndarray) -> "Potential":
        """Periodic cubic-spline potential through tabulated samples."""
        from scipy.interpolate import CubicSpline

        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        spline = CubicSpline(np.append(x, x[0] + (x[1] - x[0]) * len(x)),
                             np.append(v, v[0]), bc_type="periodic")
        return Potential("table", (spline,))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            omega0, mass = self.params
            return 0.5 * mass * omega0**2 * x**2
        if self.kind == "quartic":
            (lam,) = self.params
            return lam * x**4
        if self.kind == "finite_well":
            depth, width = self.params
            return np.where(np.abs(x) < 0.5 * width, -depth, 0.0)
        if self.kind == "table":
            (spline,) = self.params
            return spline(x)
        raise ValueError(f"unknown potential kind {self.kind!r}")

    def force(self, x):
        """F(x) = -V'(x). The well's edge jumps contribute zero almost
        everywhere and are returned as zero."""
        x = np.asarray(x, dtype=float)
        if self.kind == "free" or self.kind == "finite_well":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            omega0, mass = self.params
            return -mass * omega0**2 * x
        if self.kind == "quartic":
            (lam,) = self.params
            return -4.0 * lam * x**3
        if self.kind == "table":
            (spline,) = self.params
            return -spline(x, 1)
        raise ValueError(f"unknown potential kind {self.kind!r}")

    def force_derivative(self, x):
        """F'(x) = -V''(x)."""
        x = np.asarray(x, dtype=float)
        if self.kind in ("free", "finite_well"):
            return np.zeros_like(x)
        if self.kind == "harmonic":
            omega0, mass = self.params
            return np.full_like(x, -mass * omega0**2)
        if self.kind == "quartic":
            (lam,) = self.params
            return -12.0 * lam * x**2
        if self.kind == "table":
            (spline,) = self.params
            return -spline(x, 2)
        raise ValueError(f"unknown potential kind {self.kind!r}")

    def third_derivative(self, x):
        """V'''(x)."""
        x = np.asarray(x, dtype=float)
        if self.kind in ("free", "finite_well"):
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return np.zeros_like(x)
        if self.kind == "quartic":
            (lam,) = self.params
            return 24.0 * lam * x
        if self.kind == "table":
            (spline,) = self.params
            return spline(x, 3)
        raise ValueError(f"unknown potential kind {self.kind!r}")


# ---------------------------------------------------------------------------
# wavefunction container and diagnostics


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    units: UnitSystem = UnitSystem()

    def norm(self) -> float:
        return float(np.sqrt(integrate(np.abs(self.values) ** 2, self.grid).real))


def position_density(psi: WaveFunction) -> np.ndarray:
    return np.abs(psi.values) ** 2


def position_mean(psi: WaveFunction) -> float:
    return float(integrate(psi.grid.points * position_density(psi), psi.grid))


def position_variance(psi: WaveFunction) -> float:
    mean = position_mean(psi)
    return float(integrate((psi.grid.points - mean) ** 2 * position_density(psi), psi.grid))


def momentum_density(psi: WaveFunction, p_values: np.ndarray) -> np.ndarray:
    """|Phi(p)|^2 with Phi(p) = (2*pi*alpha)^{-1/2} Int dx Psi(x) e^{-i p x / alpha},
    evaluated by direct quadrature at arbitrary p points."""
    p_values = np.atleast_1d(np.asarray(p_values, dtype=float))
    alpha = psi.units.alpha
    x = psi.grid.points
    kernel = np.exp(-1j * np.outer(p_values, x) / alpha)
    phi = psi.grid.spacing / np.sqrt(2.0 * np.pi * alpha) * (kernel @ psi.values)
    return np.abs(phi) ** 2


def momentum_mean(psi: WaveFunction) -> float:
    """<p> via the spectral derivative: p = -i alpha d/dx."""
    alpha = psi.units.alpha
    k = psi.grid.wavenumbers
    spec = sfft.fft(psi.values, workers=_FFT_WORKERS)
    dpsi = sfft.ifft(1j * k * spec, workers=_FFT_WORKERS)
    val = integrate(np.conj(psi.values) * (-1j * alpha) * dpsi, psi.grid)
    return float(val.real)


def energy_expectation(psi: WaveFunction, potential: Potential) -> float:
    """<H> = Int (alpha^2/2M)|dPsi/dx|^2 + V |Psi|^2 dx."""
    alpha, mass = psi.units.alpha, psi.units.mass
    k = psi.grid.wavenumbers
    spec = sfft.fft(psi.values, workers=_FFT_WORKERS)
    dpsi = sfft.ifft(1j * k * spec, workers=_FFT_WORKERS)
    kin = (alpha**2 / (2.0 * mass)) * integrate(np.abs(dpsi) ** 2, psi.grid)
    pot = integrate(potential.value(psi.grid.points) * np.abs(psi.values) ** 2, psi.grid)
    return float((kin + pot).real)


def gaussian_packet(grid: Grid1D, center: float, width: float, momentum: float = 0.0,
                    units: UnitSystem = UnitSystem()) -> WaveFunction:
    """Normalized Gaussian with position variance width^2 and momentum mean
    ``momentum``. Width must exceed 4 grid spacings and the 6-sigma support
    must fit inside the domain."""
    if width <= 4.0 * grid.spacing:
        raise UnderResolvedError(
            f"packet width {width} must exceed 4*dx = {4.0 * grid.spacing}"
        )
    if abs(center) + 6.0 * width > 0.5 * grid.length:
        raise DomainFitError(
            f"packet at {center} with width {width} does not fit in [-L/2, L/2)"
        )
    x = grid.points
    phase = momentum * (x - center) / units.alpha
    values = np.exp(-((x - center) ** 2) / (4.0 * width**2) + 1j * phase)
    values = values / np.sqrt(integrate(np.abs(values) ** 2, grid).real)
    return WaveFunction(grid=grid, values=values, time=0.0, units=units)


# ---------------------------------------------------------------------------
# split-step evolution


def evolve_split_step(psi: WaveFunction, potential: Potential, dt: float,
                      steps: int) -> WaveFunction:
    """Advance by ``steps`` symmetric (half-potential / kinetic / half-potential)
    splitting steps of size dt. Interior half-potential factors are fused."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return psi
    alpha, mass = psi.units.alpha, psi.units.mass
    v = potential.value(psi.grid.points)
    if not np.all(np.isfinite(v)):
        raise StabilityError("potential is not finite on the grid")
    k = psi.grid.wavenumbers
    half_v = np.exp(-0.5j * v * dt / alpha)
    full_v = half_v * half_v
    kinetic = np.exp(-0.5j * alpha * k**2 * dt / mass)

    values = psi.values * half_v
    for _ in range(steps - 1):
        values = sfft.ifft(kinetic * sfft.fft(values, workers=_FFT_WORKERS),
                           workers=_FFT_WORKERS)
        values *= full_v
    values = sfft.ifft(kinetic * sfft.fft(values, workers=_FFT_WORKERS),
                       workers=_FFT_WORKERS)
    values *= half_v

    if not np.all(np.isfinite(values)):
        raise StabilityError("evolution produced non-finite amplitudes")
    out = WaveFunction(grid=psi.grid, values=values, time=psi.time + steps * dt,
                       units=psi.units)
    drift = abs(out.norm() - psi.norm())
    if drift > max(1e-10, steps * 1e-13):
        raise StabilityError(f"norm drifted by {drift:.3e} over {steps} steps")
    return out


# ---------------------------------------------------------------------------
# stationary states


@dataclass(frozen=True)
class EigenSolution:
    energies: np.ndarray
    states: np.ndarray  # row n = phi_n on the grid, real, dx-orthonormal


def hamiltonian_matrix(potential: Potential, grid: Grid1D,
                       units: UnitSystem = UnitSystem()) -> np.ndarray:
    """Dense real-symmetric H = kinetic circulant (spectral Laplacian) + diag(V)."""
    n = grid.n_points
    k = grid.wavenumbers
    kin_symbol = (units.alpha**2 / (2.0 * units.mass)) * k**2
    first_row = sfft.ifft(kin_symbol).real
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    h = first_row[idx]
    h = 0.5 * (h + h.T)
    h[np.arange(n), np.arange(n)] += potential.value(grid.points)
    return h


def solve_eigenstates(potential: Potential, grid: Grid1D,
                      units: UnitSystem = UnitSystem(), count: int = 8) -> EigenSolution:
    """Lowest ``count`` eigenpairs of the discretized Hamiltonian.

    Uses the dense spectral-Laplacian Hamiltonian (exact free spectrum on the
    ring, spectral accuracy for smooth bound states); the finite-difference
    variant below serves as an independent cross-check.
    """
    if count < 1 or count > grid.n_points // 2:
        raise ValueError(f"count must be in [1, n_points/2], got {count}")
    v = potential.value(grid.points)
    if not np.all(np.isfinite(v)):
        raise EigensolverError("potential is not finite on the grid")
    h = hamiltonian_matrix(potential, grid, units)
    try:
        energies, vectors = scipy.linalg.eigh(h, subset_by_index=[0, count - 1])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigensolverError(f"eigh failed to converge: {exc}") from exc
    states = (vectors / np.sqrt(grid.spacing)).T
    # deterministic sign: largest-magnitude sample positive
    for row in states:
        peak = np.argmax(np.abs(row))
        if row[peak] < 0:
            row *= -1.0
    residual = np.linalg.norm(h @ vectors - vectors * energies[None, :], axis=0)
    scale = np.linalg.norm(vectors, axis=0)
    bad = residual > 1e-8 * scale
    if np.any(bad):
        raise EigensolverError(
            f"eigenpair residuals too large: {residual[bad]} for levels {np.where(bad)[0]}"
        )
    return EigenSolution(energies=energies, states=states)


def solve_eigenstates_fd(potential: Potential, grid: Grid1D,
                         units: UnitSystem = UnitSystem(), count: int = 8) -> EigenSolution:
    """Three-point finite-difference cross-check eigensolver (tridiagonal,
    hard-wall ends). Second-order accurate only; used to validate the spectral
    solver, not for production numbers."""
    n, dx = grid.n_points, grid.spacing
    coeff = units.alpha**2 / (2.0 * units.mass * dx**2)
    diag = 2.0 * coeff + potential.value(grid.points)
    off = np.full(n - 1, -coeff)
    energies, vectors = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, count - 1))
    states = (vectors / np.sqrt(dx)).T
    for row in states:
        peak = np.argmax(np.abs(row))
        if row[peak] < 0:
            row *= -1.0
    return EigenSolution(energies=energies, states=states)


# ---------------------------------------------------------------------------
# free propagator


def free_kernel(x, t: float, x0, t0: float, units: UnitSystem = UnitSystem()):
    """Free-particle kernel sqrt(M / (2 pi i alpha (t-t0))) *
    exp(i M (x-x0)^2 / (2 alpha (t-t0))), principal branch sqrt(1/i) = e^{-i pi/4}."""
    if t <= t0:
        raise ValueError(f"free_kernel requires t > t0, got t={t}, t0={t0}")
    alpha, mass = units.alpha, units.mass
    tau = t - t0
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    pref = np.sqrt(mass / (2.0 * np.pi * alpha * tau)) * np.exp(-0.25j * np.pi)
    return pref * np.exp(0.5j * mass * (x - x0) ** 2 / (alpha * tau))


def _boundary_tail(psi: WaveFunction) -> float:
    edge = max(2, psi.grid.n_points // 64)
    mags = np.abs(psi.values)
    return float(max(mags[:edge].max(), mags[-edge:].max()))


def propagate_free(psi: WaveFunction, t: float) -> WaveFunction:
    """Free evolution by time t via the momentum-space phase
    exp(-i alpha k^2 t / 2M); warns if packet tails reach the boundary."""
    if t == 0.0:
        return psi
    alpha, mass = psi.units.alpha, psi.units.mass
    k = psi.grid.wavenumbers
    spec = sfft.fft(psi.values, workers=_FFT_WORKERS)
    spec *= np.exp(-0.5j * alpha * k**2 * t / mass)
    values = sfft.ifft(spec, workers=_FFT_WORKERS)
    out = WaveFunction(grid=psi.grid, values=values, time=psi.time + t, units=psi.units)
    if _boundary_tail(out) > 1e-10 or _boundary_tail(psi) > 1e-10:
        warnings.warn("packet tails exceed 1e-10 at the domain boundary; "
                      "free propagation is wrapping around", RuntimeWarning)
    return out


def propagate_free_quadrature(psi: WaveFunction, t: float) -> WaveFunction:
    """Direct kernel quadrature Psi(x,t) = Int dx0 Psi(x0) K(x,t|x0,0).

    O(n^2) cross-check route for propagate_free; kept independent of the
    spectral path.
    """
    if t == 0.0:
        return psi
    x = psi.grid.points
    kern = free_kernel(x[:, None], psi.time + t, x[None, :], psi.time, psi.units)
    values = psi.grid.spacing * (kern @ psi.values)
    return WaveFunction(grid=psi.grid, values=values, time=psi.time + t, units=psi.units)


def boost(psi: WaveFunction, momentum: float) -> WaveFunction:
    """Multiply by the plane-wave factor e^{i p x / alpha}."""
    values = psi.values * np.exp(1j * momentum * psi.grid.points / psi.units.alpha)
    return replace(psi, values=values)
