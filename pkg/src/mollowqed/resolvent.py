"""Resolvent of the two-state subspace {|a; N>, |b; N-1>} and the master
equation extracted from it.

Energy origin: ``E_aN = 0``. The excited dressed level is placed at
``E_b(N-1) = +detuning``. The transfer map is assembled with the
adjoint-ordered bilinear forms (it propagates ``U^dagger rho U``); that
ordering reproduces the Mollow generator only with this sign of the level
spacing. Pole and evolution formulas are written in terms of the spacing
``E_aN - E_b(N-1)`` and are insensitive to the choice otherwise.
"""
from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, ParameterError, SystemParams
from .dynamics import Generator

__all__ = [
    "PoleError",
    "LevelShifts",
    "PolePair",
    "EvolutionElements",
    "TransferMatrix",
    "level_energies",
    "resolvent_matrix",
    "determinant",
    "poles",
    "evolution_elements",
    "transfer",
    "extract_generator",
]


class PoleError(ParameterError):
    """Resolvent evaluated at one of its poles."""

    def __init__(self, msg, det):
        super().__init__(msg)
        self.det = det


@dataclass(frozen=True)
class LevelShifts:
    """Diagonal level shifts ``R_aN`` and ``R_b(N-1)`` at ``z0`` and ``z+-``."""

    r_a0: complex = 0j
    r_aplus: complex = 0j
    r_aminus: complex = 0j
    r_b0: complex = 0j
    r_bplus: complex = 0j
    r_bminus: complex = 0j

    @classmethod
    def constant(cls, r_a=0j, r_b=0j) -> "LevelShifts":
        return cls(r_a, r_a, r_a, r_b, r_b, r_b)

    @classmethod
    def mollow(cls, gamma: float) -> "LevelShifts":
        """Ground level unshifted, excited level damped at ``gamma / 2``."""
        return cls.constant(0j, -0.5j * gamma)

    def is_constant(self, tol: float = 0.0) -> bool:
        a = max(abs(self.r_aplus - self.r_a0), abs(self.r_aminus - self.r_a0))
        b = max(abs(self.r_bplus - self.r_b0), abs(self.r_bminus - self.r_b0))
        return max(a, b) <= tol

    def max_abs(self) -> float:
        return max(abs(x) for x in (self.r_a0, self.r_aplus, self.r_aminus,
                                    self.r_b0, self.r_bplus, self.r_bminus))


@dataclass(frozen=True)
class PolePair:
    z_plus: complex
    z_minus: complex
    z0: complex

    @property
    def splitting(self) -> complex:
        return self.z_plus - self.z_minus


@dataclass(frozen=True, eq=False)
class EvolutionElements:
    """Matrix elements of the evolution operator in the two-state subspace.

    ``u_ab = <a;N|U|b;N-1>`` and ``u_ba = <b;N-1|U|a;N>``.
    """

    u_a: complex
    u_b: complex
    u_ab: complex
    u_ba: complex

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.u_a, self.u_ab], [self.u_ba, self.u_b]])


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """``rho(t0 + t) = u @ rho(t0) + v`` on ``(B, C, C*)``."""

    u: np.ndarray
    v: np.ndarray


def level_energies(params: SystemParams) -> tuple[float, float]:
    """``(E_aN, E_b(N-1))`` in the module's energy origin."""
    return 0.0, params.detuning


def _off_diagonal(params: SystemParams) -> tuple[complex, complex]:
    # sqrt(N) V = rabi / 2 in the rotating-wave approximation
    r_ab = params.coupling()
    return r_ab, r_ab.conjugate()


def determinant(z, params: SystemParams, r_a=0j, r_b=0j):
    """Determinant ``D_N(z)`` of ``z - H_eff``; ``r_a``, ``r_b`` are the shifts at ``z``."""
    e_a, e_b = level_energies(params)
    r_ab, r_ba = _off_diagonal(params)
    return (z - e_b - r_b) * (z - e_a - r_a) - r_ab * r_ba


def resolvent_matrix(z, params: SystemParams, r_a=0j, r_b=0j) -> np.ndarray:
    """2x2 resolvent in the basis ``(|a;N>, |b;N-1>)``.

    Raises
    ------
    PoleError
        If ``z`` is (numerically) a zero of the determinant.
    """
    e_a, e_b = level_energies(params)
    r_ab, r_ba = _off_diagonal(params)
    det = determinant(z, params, r_a, r_b)
    scale = max(params.scale, abs(z), 1.0)
    if abs(det) <= 1e-14 * scale * scale:
        raise PoleError(f"z = {z} is a pole of the resolvent (D = {det:.3e})", det)
    return np.array([[z - e_b - r_b, r_ab], [r_ba, z - e_a - r_a]], dtype=complex) / det


def poles(params: SystemParams, shifts: LevelShifts) -> PolePair:
    """Poles of the resolvent with the shifts frozen at ``z0``."""
    if shifts.max_abs() > 0.1 * params.omega0:
        warnings.warn("level shifts are not small compared with the atomic energy scale; "
                      "frozen-shift poles are unreliable", RuntimeWarning, stacklevel=2)
    e_a, e_b = level_energies(params)
    z0 = 0.5 * (e_a + e_b)
    spacing = e_a - e_b + shifts.r_a0 - shifts.r_b0
    root = cmath.sqrt(spacing * spacing + abs(params.rabi) ** 2)
    centre = z0 + 0.5 * (shifts.r_a0 + shifts.r_b0)
    return PolePair(z_plus=centre + 0.5 * root, z_minus=centre - 0.5 * root, z0=complex(z0))


def _sinc(x):
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def evolution_elements(params: SystemParams, shifts: LevelShifts, t) -> EvolutionElements:
    """Evolution operator elements from the residues at ``z+`` and ``z-``.

    Each residue uses the shift evaluated at its own pole. The pair of
    exponentials is recombined as ``cos(R t / 2)`` and ``t sinc(R t / 2)``,
    with ``R = z+ - z-``, which stays finite through coalescing poles. When
    the shifts differ between ``z+`` and ``z-`` the elements are not the
    identity at ``t = 0``; this is inherent to frozen shifts.

    ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be non-negative")
    e_a, e_b = level_energies(params)
    pp = poles(params, shifts)
    split = pp.splitting
    mid = 0.5 * (pp.z_plus + pp.z_minus)
    d_a = 0.5 * (shifts.r_aplus - shifts.r_aminus)
    d_b = 0.5 * (shifts.r_bplus - shifts.r_bminus)
    if split == 0 and (d_a != 0 or d_b != 0):
        raise ParameterError("coalescing poles with pole-dependent shifts: residues diverge")
    ratio_a = 2.0 * d_a / split if d_a != 0 else 0.0
    ratio_b = 2.0 * d_b / split if d_b != 0 else 0.0

    half = 0.5 * split * t
    cos = np.cos(half)
    tsinc = t * _sinc(half)
    env = np.exp(-1j * mid * t)
    r_ab, r_ba = _off_diagonal(params)
    mean_ra = 0.5 * (shifts.r_aplus + shifts.r_aminus)
    mean_rb = 0.5 * (shifts.r_bplus + shifts.r_bminus)

    u_a = env * (cos * (1.0 - ratio_b) - 1j * tsinc * (mid - e_b - mean_rb))
    u_b = env * (cos * (1.0 - ratio_a) - 1j * tsinc * (mid - e_a - mean_ra))
    u_ab = -1j * r_ab * tsinc * env
    u_ba = -1j * r_ba * tsinc * env
    return EvolutionElements(u_a[()], u_b[()], u_ab[()], u_ba[()])


def transfer(params: SystemParams, shifts: LevelShifts, t) -> TransferMatrix:
    """Affine transfer map of the atom-field density vector ``(B, C, C*)``."""
    el = evolution_elements(params, shifts, float(t))
    ua, ub, uab, uba = el.u_a, el.u_b, el.u_ab, el.u_ba
    c = np.conj
    u = np.array(
        [
            [-c(uab) * uab + c(ub) * ub, c(uab) * ub, c(ub) * uab],
            [-c(ua) * uab + c(uba) * ub, c(ua) * ub, c(uba) * uab],
            [-c(uab) * ua + c(ub) * uba, c(uab) * uba, c(ub) * ua],
        ],
        dtype=complex,
    )
    v = np.array([c(uab) * uab, c(ua) * uab, c(uab) * ua], dtype=complex)
    return TransferMatrix(u, v)


def extract_generator(params: SystemParams, shifts: LevelShifts,
                      eps0: float | None = None, rtol: float = 1e-6) -> Generator:
    """First-order generator of the transfer map, by Richardson extrapolation.

    Forward differences ``(U(eps) - 1) / eps`` and ``V(eps) / eps`` at
    ``eps0 / 2**k``, ``k = 0..3``, with ``eps0 = 1e-3 / scale`` by default,
    are combined in a Neville tableau.

    Raises
    ------
    ConvergenceError
        If the transfer map is not the identity at ``t = 0`` (the limit does
        not exist) or the last two extrapolants differ by more than
        ``rtol`` relative to the generator scale.
    """
    scale = params.scale
    if scale == 0:
        raise ParameterError("all rates vanish; generator is identically zero")
    eye = np.eye(3)
    t0 = transfer(params, shifts, 0.0)
    off = max(np.abs(t0.u - eye).max(), np.abs(t0.v).max())
    if off > 1e-12:
        raise ConvergenceError(
            f"transfer map differs from the identity by {off:.3e} at t = 0 "
            "(shifts differ between z+ and z-); no first-order generator exists")
    eps0 = 1e-3 / scale if eps0 is None else eps0
    table = []
    for k in range(4):
        eps = eps0 / 2 ** k
        tm = transfer(params, shifts, eps)
        row = [np.concatenate([((tm.u - eye) / eps).ravel(), tm.v / eps])]
        for j in range(1, k + 1):
            f = 2.0 ** j
            row.append((f * row[j - 1] - table[-1][j - 1]) / (f - 1.0))
        table.append(row)
    best, prev = table[-1][-1], table[-1][-2]
    gap = np.abs(best - prev).max()
    if gap > rtol * max(scale, np.abs(best).max()):
        raise ConvergenceError(f"Richardson extrapolation did not settle (gap {gap:.3e})")
    return Generator(best[:9].reshape(3, 3), best[9:])
