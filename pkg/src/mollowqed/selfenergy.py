"""Self-energy of the excited dressed state and the resulting decay widths.

The photon coupling enters only through an on-shell spectral density
``g(omega) >= 0`` normalised so that ``g(omega0)`` is the natural linewidth.
Energies ``z`` are measured from ``E_a + N omega_L`` with the physical level
ordering, so the reference energy is ``z0 = -detuning / 2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .core import ConvergenceError, ParameterError, SystemParams
from .resolvent import LevelShifts

__all__ = [
    "COUPLING_KINDS",
    "CouplingModel",
    "WidthReport",
    "natural_linewidth",
    "reference_energies",
    "loop_poles",
    "shift_kernel",
    "rabi_series_kernel",
    "resummed_shift",
    "gamma_zero",
    "gamma_pm",
    "width_report",
]

COUPLING_KINDS = ("flat", "linear", "powerLaw")


@dataclass(frozen=True)
class CouplingModel:
    """On-shell coupling spectral density.

    ``flat``: ``g = gamma_ref``; ``linear``: ``g = gamma_ref * w / omega0``;
    ``powerLaw``: ``g = gamma_ref * (w / omega0)**exponent * exp(-(w - omega0) / cutoff)``
    (no cutoff factor when ``cutoff`` is None). ``g`` vanishes for ``w <= 0``.
    """

    kind: str
    gamma_ref: float
    omega0: float
    exponent: float | None = None
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in COUPLING_KINDS:
            raise ParameterError(f"unknown coupling kind {self.kind!r}; expected one of {COUPLING_KINDS}")
        if self.gamma_ref < 0 or self.omega0 <= 0:
            raise ParameterError("need gamma_ref >= 0 and omega0 > 0")
        if self.kind == "powerLaw" and self.exponent is None:
            raise ParameterError("powerLaw coupling needs an exponent")
        if self.kind != "powerLaw" and (self.exponent is not None or self.cutoff is not None):
            raise ParameterError(f"{self.kind} coupling takes no exponent or cutoff")
        if self.cutoff is not None and self.cutoff <= 0:
            raise ParameterError("cutoff must be positive")

    @classmethod
    def flat(cls, gamma, omega0):
        return cls("flat", float(gamma), float(omega0))

    @classmethod
    def linear(cls, gamma, omega0):
        return cls("linear", float(gamma), float(omega0))

    @classmethod
    def power_law(cls, gamma, omega0, exponent, cutoff=None):
        return cls("powerLaw", float(gamma), float(omega0), float(exponent),
                   None if cutoff is None else float(cutoff))

    @classmethod
    def for_params(cls, kind, params: SystemParams, exponent=None, cutoff=None):
        """Model of the given kind with ``g(omega0) = params.gamma``."""
        if kind == "powerLaw":
            return cls.power_law(params.gamma, params.omega0, exponent, cutoff)
        return cls(kind, params.gamma, params.omega0)

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        pos = w > 0
        x = np.where(pos, w, 1.0) / self.omega0
        if self.kind == "flat":
            g = np.full_like(x, self.gamma_ref)
        elif self.kind == "linear":
            g = self.gamma_ref * x
        else:
            g = self.gamma_ref * x ** self.exponent
            if self.cutoff is not None:
                g = g * np.exp(-(np.where(pos, w, self.omega0) - self.omega0) / self.cutoff)
        return np.where(pos, g, 0.0)[()]


def natural_linewidth(model: CouplingModel, omega0: float) -> float:
    """``Gamma = g(omega0)``."""
    if omega0 <= 0:
        raise ParameterError("omega0 must be positive")
    return float(model(omega0))


def _loop_energies(params: SystemParams):
    # loop states |a; N-1, q> and |b; N-2, q> without the photon energy
    e_a = -params.omega_l
    e_b = params.omega0 - 2.0 * params.omega_l
    kappa2 = (params.n_photons - 1) * abs(params.v_coupling) ** 2
    return e_a, e_b, kappa2


def reference_energies(params: SystemParams) -> tuple[float, float, float]:
    """``(z0, z+, z-)`` with shifts neglected: ``z0 -+ sqrt(D^2 + 4 N |V|^2) / 2``."""
    z0 = -0.5 * params.detuning
    half = 0.5 * math.sqrt(params.detuning ** 2 + 4 * params.n_photons * abs(params.v_coupling) ** 2)
    return z0, z0 + half, z0 - half


def loop_poles(z, params: SystemParams):
    """Photon frequencies at which the resummed loop kernel is singular.

    Returns a list of ``(omega_s, weight_s)`` with
    ``kernel(w) = sum_s weight_s / (omega_s - w)``.
    """
    e_a, e_b, kappa2 = _loop_energies(params)
    if kappa2 == 0.0:
        return [(z - e_a, 1.0)]
    root = math.sqrt((e_a - e_b) ** 2 + 4.0 * kappa2)
    out = []
    for s in (1.0, -1.0):
        x_s = 0.5 * (e_a + e_b) + 0.5 * s * root
        out.append((z - x_s, (x_s - e_b) / (s * root)))
    return out


def shift_kernel(z, params: SystemParams, omega):
    """Resummed loop kernel (numerator over the dressed two-state denominator)."""
    e_a, e_b, kappa2 = _loop_energies(params)
    w = np.asarray(omega)
    da = z - e_a - w
    db = z - e_b - w
    return db / (da * db - kappa2)


def rabi_series_kernel(z, params: SystemParams, omega, n_terms: int):
    """Loop kernel truncated after ``n_terms`` terms of the Rabi-insertion series."""
    e_a, e_b, kappa2 = _loop_energies(params)
    w = np.asarray(omega)
    da = z - e_a - w
    ratio = kappa2 / (da * (z - e_b - w))
    total = np.zeros(np.broadcast(ratio).shape, dtype=complex)
    term = np.ones_like(total)
    for _ in range(int(n_terms)):
        total = total + term
        term = term * ratio
    return (total / da)[()]


def resummed_shift(z, params: SystemParams, model: CouplingModel, omega_max: float | None = None,
                   quadrature_points: int = 200, tol: float = 1e-10) -> complex:
    """Resummed self-energy of ``|b; N-1>`` at energy ``z``.

    ``(1 / 2 pi) int_0^omega_max g(w) kernel(z, w) dw``. For real ``z`` the
    kernel poles sit on the integration path and the ``z + i0`` limit is
    taken: principal value by subtracting ``g(omega_s)`` at each pole (the
    logarithm is added back analytically) plus ``-i pi`` times the residue.
    For complex ``z`` the integral is evaluated directly.

    Parameters
    ----------
    omega_max : float, optional
        Upper frequency limit; defaults to ``10 * max(omega0, omega_l)``.
    quadrature_points : int
        Subinterval limit handed to adaptive quadrature.

    Raises
    ------
    ParameterError
        If ``omega_max`` does not exceed every pole frequency.
    ConvergenceError
        If the quadrature error estimate exceeds ``tol`` relative to
        ``max(|shift|, gamma_ref)``.
    """
    z = complex(z)
    big = omega_max if omega_max is not None else 10.0 * max(params.omega0, params.omega_l)
    pl = loop_poles(z, params)
    if any(w.real >= big for w, _ in pl):
        raise ParameterError(f"omega_max = {big:g} is below a kernel pole at "
                             f"{max(w.real for w, _ in pl):g}")
    limit = int(quadrature_points)
    if limit < 4:
        raise ParameterError(f"quadrature_points must be at least 4, got {quadrature_points}")
    err_tot = 0.0

    def integrate(f, pts):
        nonlocal err_tot
        pts = sorted(p for p in pts if 0.0 < p < big)
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            try:
                val, err = quad(f, 0.0, big, points=pts or None, limit=max(limit, len(pts) + 2),
                                epsabs=0.0, epsrel=1e-12)
            except IntegrationWarning as exc:
                raise ConvergenceError(f"self-energy quadrature failed: {exc}") from None
        err_tot += err
        return val

    if z.imag != 0.0:
        poles_re = [w.real for w, _ in pl]

        def re(w):
            return (model(w) * shift_kernel(z, params, w)).real

        def im(w):
            return (model(w) * shift_kernel(z, params, w)).imag

        total = complex(integrate(re, poles_re), integrate(im, poles_re))
    else:
        total = 0j
        for w_s, a_s in pl:
            w_s = w_s.real
            if 0.0 < w_s:
                g_s = float(model(w_s))

                def reg(w, w_s=w_s, g_s=g_s):
                    return (model(w) - g_s) / (w_s - w)

                pv = integrate(reg, [w_s]) + g_s * math.log(w_s / (big - w_s))
                total += a_s * complex(pv, -math.pi * g_s)
            else:
                total += a_s * integrate(lambda w, w_s=w_s: model(w) / (w_s - w), [])
    shift = total / (2.0 * math.pi)
    if err_tot / (2.0 * math.pi) > tol * max(abs(shift), model.gamma_ref, 1e-300):
        raise ConvergenceError(f"self-energy quadrature error estimate {err_tot:.3e} too large")
    return shift


def _branch_sum(model: CouplingModel, params: SystemParams, offset: float) -> float:
    d = params.detuning
    rp = math.sqrt(d * d + 4 * (params.n_photons - 1) * abs(params.v_coupling) ** 2)
    g_hi = float(model(params.omega_l + 0.5 * rp + offset))
    g_lo = float(model(params.omega_l - 0.5 * rp + offset))
    # 1/2 sum_s g_s (1 - s d / rp), arranged so that a flat g is reproduced exactly
    tilt = d / rp if rp > 0 else 0.0
    return 0.5 * (g_hi + g_lo) - 0.5 * (g_hi - g_lo) * tilt


def gamma_zero(model: CouplingModel, params: SystemParams) -> float:
    """Decay width of the excited level at the reference energy ``z0``."""
    return _branch_sum(model, params, 0.0)


def gamma_pm(model: CouplingModel, params: SystemParams, branch: int) -> float:
    """Decay width at the dressed pole ``z0 + branch * R / 2``, ``branch`` = +1 or -1."""
    if branch not in (1, -1):
        raise ParameterError(f"branch must be +1 or -1, got {branch}")
    d = params.detuning
    r = math.sqrt(d * d + 4 * params.n_photons * abs(params.v_coupling) ** 2)
    return _branch_sum(model, params, 0.5 * branch * r)


@dataclass(frozen=True)
class WidthReport:
    gamma_natural: float
    gamma0: float
    gamma_plus: float
    gamma_minus: float
    lamb_residual: float

    def level_shifts(self) -> LevelShifts:
        """Shifts for :mod:`mollowqed.resolvent`, labelled by its poles.

        The resolvent orders the bare levels in mirror image, so its upper
        pole ``z+`` is the lower (``-``) branch here and vice versa. Real
        parts are dropped: they renormalise the excited-level energy.
        """
        return LevelShifts(0j, 0j, 0j, -0.5j * self.gamma0,
                           -0.5j * self.gamma_minus, -0.5j * self.gamma_plus)


def width_report(model: CouplingModel, params: SystemParams, omega_max: float | None = None) -> WidthReport:
    """Natural, reference and dressed-pole widths, plus the real part of the shift at ``z0``."""
    z0 = reference_energies(params)[0]
    lamb = resummed_shift(z0, params, model, omega_max).real
    return WidthReport(
        gamma_natural=natural_linewidth(model, params.omega0),
        gamma0=gamma_zero(model, params),
        gamma_plus=gamma_pm(model, params, 1),
        gamma_minus=gamma_pm(model, params, -1),
        lamb_residual=lamb,
    )
