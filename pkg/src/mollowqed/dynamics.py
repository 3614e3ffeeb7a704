"""Time-domain route: Mollow generator, evolution, regression and spectrum.

All quantities live in the frame rotating at the laser frequency; spectra
are mapped back to absolute frequency only at the output.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import simpson

from .core import NoSteadyStateError, ParameterError, StateVector, SystemParams
from .mollow import A2_VARIANTS, SpectrumResult, incoherent_density

__all__ = [
    "Generator",
    "CorrelationSeries",
    "A2Verdict",
    "UnderResolvedError",
    "mollow_generator",
    "expm",
    "evolve",
    "steady_state_solve",
    "regression_liouvillian",
    "correlation",
    "spectrum_numeric",
    "adjudicate_a2_variant",
]

#: eigenvector condition number above which diagonalisation is abandoned
EIG_COND_MAX = 1e8


class UnderResolvedError(ParameterError):
    """Time sampling too coarse for the requested frequency span."""


@dataclass(frozen=True, eq=False)
class Generator:
    """Affine generator ``d rho / dt = m @ rho + b`` on ``(beta, gamma, gamma*)``."""

    m: np.ndarray
    b: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.m)

    def max_abs_diff(self, other: "Generator") -> float:
        return float(max(np.abs(self.m - other.m).max(), np.abs(self.b - other.b).max()))


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    """Samples of ``C(tau) = <sigma_+(0) sigma_-(tau)>`` in the rotating frame."""

    tau: np.ndarray
    value: np.ndarray
    c_inf: complex = 0.0
    modes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))


def mollow_generator(params: SystemParams) -> Generator:
    """Optical Bloch generator of the driven, damped two-level atom."""
    g, d, om = params.gamma, params.detuning, params.rabi
    omc = om.conjugate()
    m = np.array(
        [
            [-g, 0.5j * omc, -0.5j * om],
            [1j * om, -1j * d - 0.5 * g, 0.0],
            [-1j * omc, 0.0, 1j * d - 0.5 * g],
        ],
        dtype=complex,
    )
    b = np.array([0.0, -0.5j * om, 0.5j * omc], dtype=complex)
    return Generator(m, b)


def expm(a: np.ndarray, t=1.0) -> np.ndarray:
    """``exp(a t)`` for a small dense matrix; ``t`` may be an array of times.

    Uses diagonalisation, falling back to scaling-and-squaring when the
    eigenvector matrix is ill-conditioned (near exceptional points).
    Returns shape ``a.shape`` for scalar ``t``, else ``t.shape + a.shape``.
    """
    a = np.asarray(a, dtype=complex)
    tt = np.asarray(t, dtype=float)
    lam, vec = np.linalg.eig(a)
    if np.linalg.cond(vec) < EIG_COND_MAX:
        inv = np.linalg.inv(vec)
        ex = np.exp(np.multiply.outer(tt, lam))
        return np.einsum("ij,...j,jk->...ik", vec, ex, inv)
    if tt.ndim == 0:
        return scipy.linalg.expm(a * float(tt))
    return np.stack([scipy.linalg.expm(a * s) for s in tt.ravel()]).reshape(tt.shape + a.shape)


def _augmented(gen: Generator) -> np.ndarray:
    aug = np.zeros((4, 4), dtype=complex)
    aug[:3, :3] = gen.m
    aug[:3, 3] = gen.b
    return aug


def _is_singular(m: np.ndarray) -> bool:
    return np.linalg.cond(m) > 1e12


def evolve(gen: Generator, rho0: StateVector, t: float) -> StateVector:
    """Solve ``d rho/dt = m rho + b`` exactly from ``rho0`` over time ``t``.

    For invertible ``m`` the affine solution
    ``exp(m t) (rho0 - rho_ss) + rho_ss`` is used; otherwise the system is
    embedded in a 4x4 linear one whose exponential is exact as well.
    """
    if t < 0:
        raise ParameterError(f"t must be non-negative, got {t}")
    x0 = rho0.as_array()
    if t == 0:
        return StateVector.from_array(x0)
    if _is_singular(gen.m):
        return StateVector.from_array(expm(_augmented(gen), t)[:3] @ np.append(x0, 1.0))
    rss = -np.linalg.solve(gen.m, gen.b)
    return StateVector.from_array(expm(gen.m, t) @ (x0 - rss) + rss)


def steady_state_solve(gen: Generator) -> StateVector:
    """Steady state ``-m^{-1} b`` by linear solve."""
    if _is_singular(gen.m):
        raise NoSteadyStateError("generator is singular: no unique steady state")
    return StateVector.from_array(-np.linalg.solve(gen.m, gen.b))


def regression_liouvillian(gen: Generator) -> np.ndarray:
    """Trace-preserving linear extension of the affine generator.

    Basis ``(|a><a|, |b><b|, |a><b|, |b><a|)``. Substituting
    ``alpha = 1 - beta`` into the result recovers ``(m, b)``; the ``|b><a|``
    slot is an independent component, so non-Hermitian operators such as
    ``rho_ss sigma_+`` can be propagated.
    """
    m, b = gen.m, gen.b
    lin = np.zeros((4, 4), dtype=complex)
    rows = (1, 2, 3)  # beta, gamma, gamma* -> bb, ab, ba
    cols = (1, 2, 3)
    for i, r in enumerate(rows):
        lin[r, 0] = b[i]
        for j, c in enumerate(cols):
            lin[r, c] = m[i, j] + (b[i] if j == 0 else 0.0)
    lin[0] = -lin[1]
    return lin


def correlation(params: SystemParams, tau_max: float, n_samples: int) -> CorrelationSeries:
    """Two-time correlation ``<sigma_+(0) sigma_-(tau)>`` by quantum regression.

    ``Lambda(0) = rho_ss sigma_+`` is propagated with the 4x4 Liouvillian of
    :func:`regression_liouvillian` and ``C(tau)`` is its ``|b><a|`` component.
    """
    if not tau_max > 0:
        raise ParameterError(f"tau_max must be positive, got {tau_max}")
    if int(n_samples) < 2:
        raise ParameterError(f"need at least two samples, got {n_samples}")
    gen = mollow_generator(params)
    ss = steady_state_solve(gen)
    lin = regression_liouvillian(gen)
    lam0 = np.array([ss.coh, 0.0, 0.0, ss.beta], dtype=complex)
    tau = np.linspace(0.0, float(tau_max), int(n_samples))

    lam, vec = np.linalg.eig(lin)
    if np.linalg.cond(vec) < EIG_COND_MAX:
        amp = np.linalg.solve(vec, lam0) * vec[3]
        value = np.exp(np.multiply.outer(tau, lam)) @ amp
    else:
        step = scipy.linalg.expm(lin * (tau[1] - tau[0]))
        value = np.empty(len(tau), dtype=complex)
        x = lam0.copy()
        for k in range(len(tau)):
            value[k] = x[3]
            x = step @ x
    c_inf = ss.coh * ss.coh_conj
    return CorrelationSeries(tau=tau, value=value, c_inf=complex(c_inf), modes=gen.eigenvalues())


def _tail_amplitudes(series: CorrelationSeries) -> np.ndarray:
    """Least-squares amplitudes of the decaying modes over the last 10% of samples."""
    n = len(series.tau)
    k0 = min(n - 2, int(0.9 * n))
    tau = series.tau[k0:]
    t_end = series.tau[-1]
    basis = np.exp(np.multiply.outer(tau - t_end, series.modes))
    amp, *_ = np.linalg.lstsq(basis, series.value[k0:] - series.c_inf, rcond=None)
    return amp


def spectrum_numeric(params: SystemParams, omega_grid, tau_max: float,
                     n_samples: int | None = None) -> SpectrumResult:
    """Spectrum from the Fourier-Laplace transform of the regression correlation.

    ``density(w) = 2 Re int_0^inf exp(i (w - wL) tau) [C(tau) - C_inf] dtau``,
    Simpson quadrature on the sampled series up to ``tau_max`` plus the
    analytic integral of the exponential modes fitted to the last 10% of
    samples. ``n_samples=None`` picks a sampling with ``dt * f_max <= 0.15``.

    Raises
    ------
    UnderResolvedError
        If the sampling step violates Nyquist for the frequency span.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    nu = omega_grid - params.omega_l
    if params.gamma > 0 and tau_max < 20.0 / params.gamma:
        warnings.warn(f"tau_max = {tau_max:g} is shorter than 20/gamma; truncation error likely",
                      RuntimeWarning, stacklevel=2)
    modes = mollow_generator(params).eigenvalues()
    f_max = (np.abs(nu).max() if nu.size else 0.0) + np.abs(modes.imag).max()
    if n_samples is None:
        n_samples = int(math.ceil(tau_max * max(f_max, 1.0 / tau_max) / 0.15)) + 1
        n_samples += 1 - n_samples % 2
    dt = tau_max / (int(n_samples) - 1)
    if dt * f_max >= math.pi:
        raise UnderResolvedError(
            f"sampling step {dt:g} is above the Nyquist limit {math.pi / f_max:g} "
            f"for frequencies up to {f_max:g}")

    series = correlation(params, tau_max, n_samples)
    inc = series.value - series.c_inf
    tau = series.tau
    amp = _tail_amplitudes(series)

    density = np.empty(len(nu))
    for lo in range(0, len(nu), 64):
        chunk = nu[lo:lo + 64]
        phase = np.exp(1j * np.multiply.outer(chunk, tau))
        body = simpson(phase * inc, x=tau, axis=-1)
        rate = 1j * chunk[:, None] + series.modes[None, :]
        tail = (np.exp(1j * chunk * tau[-1])[:, None] * amp[None, :] / -rate).sum(axis=-1)
        density[lo:lo + 64] = 2.0 * (body + tail).real
    return SpectrumResult(coherent_weight=2.0 * np.pi * abs(series.c_inf),
                          omega=omega_grid, density=density)


@dataclass(frozen=True, eq=False)
class A2Verdict:
    """Outcome of comparing both ``a2`` readings with the time-domain spectrum."""

    selected: str
    errors: dict
    numeric: SpectrumResult


def adjudicate_a2_variant(params: SystemParams, omega_grid, tau_max: float,
                          n_samples: int | None = None) -> A2Verdict:
    """Pick the closed-form variant closest (relative L-infinity) to the numeric spectrum."""
    num = spectrum_numeric(params, omega_grid, tau_max, n_samples)
    ref = np.abs(num.density).max()
    errors = {}
    for v in A2_VARIANTS:
        ana = incoherent_density(params, num.omega, v)
        errors[v] = float(np.abs(num.density - ana).max() / ref) if ref > 0 else 0.0
    return A2Verdict(selected=min(errors, key=errors.get), errors=errors, numeric=num)
