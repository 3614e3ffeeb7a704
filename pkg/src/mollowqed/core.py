"""Physical parameters and state containers shared by every route.

Units: hbar = c = 1, so every energy is an angular frequency. Nothing here
fixes an absolute scale; expressing frequencies in units of the natural
linewidth ``gamma`` is the recommended convention.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParameterError",
    "NoSteadyStateError",
    "ConvergenceError",
    "RWAValidityWarning",
    "SystemParams",
    "StateVector",
    "make_params",
]


class ParameterError(ValueError):
    """Input outside the physical or numerical domain of an operation."""


class NoSteadyStateError(ParameterError):
    """The relaxation generator is singular, so no unique steady state exists."""


class ConvergenceError(RuntimeError):
    """A numerical procedure (quadrature, extrapolation) did not converge."""


class RWAValidityWarning(UserWarning):
    """Drive strong enough to question the two-level / rotating-wave picture."""


@dataclass(frozen=True)
class SystemParams:
    """Driven two-level atom.

    Attributes
    ----------
    omega0 : float
        Atomic resonance frequency.
    omega_l : float
        Laser frequency.
    gamma : float
        Natural linewidth of the excited level.
    rabi : complex
        Rabi frequency, modulus and phase.
    n_photons : int
        Number of laser photons in the Fock-state description of the drive.
    """

    omega0: float
    omega_l: float
    gamma: float
    rabi: complex
    n_photons: int

    @property
    def detuning(self) -> float:
        """Laser-atom detuning ``omega_l - omega0``."""
        return self.omega_l - self.omega0

    @property
    def v_coupling(self) -> complex:
        """Single-photon coupling ``V`` with ``rabi = 2 sqrt(N) V``."""
        return self.rabi / (2.0 * math.sqrt(self.n_photons))

    @property
    def rabi_abs(self) -> float:
        return abs(self.rabi)

    def coupling(self, n: int | None = None) -> complex:
        """Return ``sqrt(n) V``; ``n`` defaults to the photon number."""
        n = self.n_photons if n is None else n
        return math.sqrt(n) * self.v_coupling

    @property
    def scale(self) -> float:
        """``max(|rabi|, |detuning|, gamma)``, the frequency scale of the dynamics."""
        return max(abs(self.rabi), abs(self.detuning), self.gamma)


def make_params(omega0, omega_l, gamma, rabi, n_photons=10**6) -> SystemParams:
    """Validate inputs and build a :class:`SystemParams`.

    A :class:`RWAValidityWarning` is emitted (not raised) when
    ``|rabi| > omega0 / 10``.
    """
    omega0 = float(omega0)
    omega_l = float(omega_l)
    gamma = float(gamma)
    rabi = complex(rabi)
    if not all(math.isfinite(x) for x in (omega0, omega_l, gamma)) or not cmath.isfinite(rabi):
        raise ParameterError("parameters must be finite")
    if omega0 <= 0.0:
        raise ParameterError(f"omega0 must be positive, got {omega0}")
    if omega_l < 0.0:
        raise ParameterError(f"omega_l must be non-negative, got {omega_l}")
    if gamma < 0.0:
        raise ParameterError(f"gamma must be non-negative, got {gamma}")
    if isinstance(n_photons, float):
        if not n_photons.is_integer():
            raise ParameterError(f"n_photons must be an integer, got {n_photons}")
        n_photons = int(n_photons)
    if int(n_photons) != n_photons or n_photons < 1:
        raise ParameterError(f"n_photons must be an integer >= 1, got {n_photons}")
    if abs(rabi) > omega0 / 10.0:
        warnings.warn(
            f"|rabi| = {abs(rabi):g} exceeds omega0/10 = {omega0 / 10:g}; "
            "two-level rotating-wave treatment is questionable",
            RWAValidityWarning,
            stacklevel=2,
        )
    return SystemParams(omega0, omega_l, gamma, rabi, int(n_photons))


@dataclass(frozen=True)
class StateVector:
    """Affine coordinates ``(beta, gamma, gamma*)`` of a two-level density matrix.

    ``beta`` is the excited population, ``coh`` the coherence
    ``<a|rho|b>`` and ``coh_conj`` the slot that holds its conjugate for
    physical states. The regression computation uses the same layout with
    the conjugacy relaxed, so it is not enforced here.
    """

    beta: complex
    coh: complex
    coh_conj: complex

    @property
    def alpha(self) -> complex:
        return 1.0 - self.beta

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.coh, self.coh_conj], dtype=complex)

    @classmethod
    def from_array(cls, x) -> "StateVector":
        x = np.asarray(x, dtype=complex)
        return cls(complex(x[0]), complex(x[1]), complex(x[2]))

    @classmethod
    def ground(cls) -> "StateVector":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def excited(cls) -> "StateVector":
        return cls(1.0, 0.0, 0.0)

    def is_physical(self, tol: float = 1e-9) -> bool:
        """Hermiticity and positivity of the 2x2 density matrix, within ``tol``."""
        beta = self.beta
        if abs(beta.imag if isinstance(beta, complex) else 0.0) > tol:
            return False
        b = complex(beta).real
        if abs(self.coh_conj - np.conj(self.coh)) > tol:
            return False
        if b < -tol or b > 1.0 + tol:
            return False
        return abs(self.coh) ** 2 <= b * (1.0 - b) + tol
