"""Closed-form steady state and Mollow spectrum of the driven two-level atom."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NoSteadyStateError, ParameterError, SystemParams

__all__ = [
    "A2_QUARTIC",
    "A2_QUADRATIC",
    "A2_VARIANTS",
    "DEFAULT_A2_VARIANT",
    "SteadyState",
    "SpectrumResult",
    "steady_state",
    "incoherent_density",
    "spectrum_scan",
    "local_maxima",
]

#: ``a2`` polynomial with the leading term ``6 (w - wL)**4``; the time-domain
#: transform agrees with this one (see ``dynamics.adjudicate_a2_variant``).
A2_QUARTIC = "quartic"
#: ``a2`` with the leading term ``6 (w - wL)**2``, a common transcription.
#: It is not homogeneous in frequency and does not integrate to the
#: excited-state population.
A2_QUADRATIC = "quadratic"
A2_VARIANTS = (A2_QUARTIC, A2_QUADRATIC)
DEFAULT_A2_VARIANT = A2_QUARTIC


@dataclass(frozen=True)
class SteadyState:
    alpha: float
    beta: float
    coh: complex

    @property
    def coh_conj(self) -> complex:
        return self.coh.conjugate()


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Scattered spectrum split into its coherent and incoherent parts.

    Attributes
    ----------
    coherent_weight : float
        Weight of the ``delta(omega - omega_l)`` term, ``2 pi |coh_ss|**2``.
    omega : ndarray
        Absolute frequencies of the incoherent samples.
    density : ndarray
        Incoherent spectral density at ``omega``.
    """

    coherent_weight: float
    omega: np.ndarray
    density: np.ndarray

    def __len__(self):
        return len(self.omega)


def steady_state(params: SystemParams) -> SteadyState:
    r"""Steady state of the Mollow master equation.

    .. math::

        \beta = \frac{|\Omega|^2}{4\Delta^2 + \Gamma^2 + 2|\Omega|^2},\qquad
        \gamma = -\frac{\Omega(2\Delta + i\Gamma)}{4\Delta^2 + \Gamma^2 + 2|\Omega|^2}

    The coherence carries the phase of ``rabi`` so that it annihilates the
    generator returned by :func:`mollowqed.dynamics.mollow_generator`; its
    modulus is the textbook ``|Omega| sqrt(4 Delta^2 + Gamma^2) / D``.

    Raises
    ------
    NoSteadyStateError
        For ``gamma == 0`` (no relaxation; the Bloch vector precesses forever).
    """
    g, d, om = params.gamma, params.detuning, params.rabi
    if g == 0.0:
        raise NoSteadyStateError("no unique steady state without relaxation (gamma = 0)")
    w = abs(om) ** 2
    den = 4.0 * d * d + g * g + 2.0 * w
    beta = w / den
    return SteadyState(alpha=1.0 - beta, beta=beta, coh=-om * (2.0 * d + 1j * g) / den)


def _a_coefficients(params: SystemParams, nu, variant):
    d2 = params.detuning ** 2
    w = abs(params.rabi) ** 2
    nu2 = nu * nu
    lead = nu2 * nu2 if variant == A2_QUARTIC else nu2
    a0 = 16.0 * (d2 + w - nu2) ** 2 * nu2
    a2 = 4.0 * (6.0 * lead - 2.0 * (3.0 * d2 - w) * nu2 + (2.0 * d2 + w) ** 2)
    a4 = 8.0 * d2 + 4.0 * w + 9.0 * nu2
    return a0, a2, a4


def incoherent_density(params: SystemParams, omega, variant: str = DEFAULT_A2_VARIANT):
    """Incoherent part of the Mollow spectrum at absolute frequency ``omega``.

    ``omega`` may be a scalar or an array; the return has the same shape.
    ``variant`` selects the reading of the ``a2`` polynomial, one of
    :data:`A2_VARIANTS`.
    """
    if variant not in A2_VARIANTS:
        raise ParameterError(f"unknown a2 variant {variant!r}; expected one of {A2_VARIANTS}")
    g = params.gamma
    w = abs(params.rabi) ** 2
    nu = np.asarray(omega, dtype=float) - params.omega_l
    if g == 0.0 or w == 0.0:
        return np.zeros_like(nu)[()]
    beta = steady_state(params).beta
    a0, a2, a4 = _a_coefficients(params, nu, variant)
    g2 = g * g
    den = a0 + g2 * (a2 + g2 * (a4 + g2))
    num = 16.0 * beta * g * w * (nu * nu + (w / 2.0 + g2))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0.0, num / den, 0.0)
    return out[()]


def spectrum_scan(params: SystemParams, omega_min: float, omega_max: float, n_points: int,
                  variant: str = DEFAULT_A2_VARIANT) -> SpectrumResult:
    """Sample the closed-form spectrum on a uniform grid of absolute frequencies."""
    if not omega_min < omega_max:
        raise ParameterError(f"empty or inverted range [{omega_min}, {omega_max}]")
    if int(n_points) < 2:
        raise ParameterError(f"need at least two grid points, got {n_points}")
    omega = np.linspace(omega_min, omega_max, int(n_points))
    if params.gamma == 0.0:
        raise NoSteadyStateError("no unique steady state without relaxation (gamma = 0)")
    coh = steady_state(params).coh
    return SpectrumResult(
        coherent_weight=2.0 * np.pi * abs(coh) ** 2,
        omega=omega,
        density=np.asarray(incoherent_density(params, omega, variant), dtype=float),
    )


def local_maxima(x, y, rel_height: float = 1e-3):
    """Interior local maxima of sampled ``y(x)``, refined by a three-point parabola.

    Maxima lower than ``rel_height * max(y)`` are discarded.

    Returns
    -------
    positions, heights : ndarray
        Sorted by position.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        return np.empty(0), np.empty(0)
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    idx = idx[y[idx] >= rel_height * y.max()]
    pos, hgt = [], []
    h = x[1] - x[0]
    for i in idx:
        ym, y0, yp = y[i - 1], y[i], y[i + 1]
        curv = ym - 2.0 * y0 + yp
        shift = 0.5 * (ym - yp) / curv if curv != 0.0 else 0.0
        pos.append(x[i] + shift * h)
        hgt.append(y0 - 0.25 * (ym - yp) * shift)
    return np.array(pos), np.array(hgt)
