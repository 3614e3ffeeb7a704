"""Independent reference computations used by the tests.

Nothing here calls the package's solvers; only parameter containers are
shared.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

# ---------------------------------------------------------------- Lindblad


def hamiltonian(params):
    """Rotating-frame Hamiltonian in the basis (|a> ground, |b> excited)."""
    om = params.rabi
    return np.array([[0.0, -0.5 * om], [-0.5 * np.conj(om), -params.detuning]], dtype=complex)


def jump(params):
    return np.sqrt(params.gamma) * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def lindblad_rhs(params, rho):
    h, l = hamiltonian(params), jump(params)
    ld = l.conj().T
    return -1j * (h @ rho - rho @ h) + l @ rho @ ld - 0.5 * (ld @ l @ rho + rho @ ld @ l)


def liouvillian(params):
    """4x4 superoperator on the row-major vectorisation (aa, ab, ba, bb)."""
    cols = []
    for k in range(4):
        e = np.zeros(4, dtype=complex)
        e[k] = 1.0
        cols.append(lindblad_rhs(params, e.reshape(2, 2)).ravel())
    return np.array(cols).T


def affine_from_lindblad(params):
    """``(m, b)`` on (beta, gamma, gamma*) read off the Lindbladian with alpha = 1 - beta."""
    lv = liouvillian(params)
    # state coordinates: rho_bb = beta, rho_ab = gamma, rho_ba = gamma*; rho_aa = 1 - beta
    rows = (3, 1, 2)
    m = np.empty((3, 3), dtype=complex)
    b = np.empty(3, dtype=complex)
    for i, r in enumerate(rows):
        b[i] = lv[r, 0]
        m[i, 0] = lv[r, 3] - lv[r, 0]
        m[i, 1] = lv[r, 1]
        m[i, 2] = lv[r, 2]
    return m, b


def brute_force_populations(params, rho0, times, rtol=1e-11, atol=1e-13):
    """Integrate the 2x2 Lindblad equation with an adaptive RK solver."""

    def f(_, y):
        return lindblad_rhs(params, y.reshape(2, 2)).ravel()

    sol = solve_ivp(f, (0.0, float(times[-1])), np.asarray(rho0, dtype=complex).ravel(),
                    t_eval=times, method="DOP853", rtol=rtol, atol=atol)
    return sol.y.T.reshape(-1, 2, 2)


def correlation_direct(params, rho_ss, times):
    """<sigma_+(0) sigma_-(tau)> by propagating rho_ss sigma_+ with expm of the Liouvillian."""
    sp = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |b><a|
    sm = sp.T.copy()
    lam0 = (rho_ss @ sp).ravel()
    lv = liouvillian(params)
    out = []
    for t in times:
        lam = (scipy.linalg.expm(lv * t) @ lam0).reshape(2, 2)
        out.append(np.trace(sm @ lam))
    return np.array(out)


# ---------------------------------------------------------------- resolvent


def effective_hamiltonian(params, r_a=0j, r_b=0j):
    """Non-Hermitian 2x2 Hamiltonian of the (|a;N>, |b;N-1>) subspace, E_aN = 0."""
    v = params.rabi / 2.0
    return np.array([[r_a, v], [np.conj(v), params.detuning + r_b]], dtype=complex)


def contour_evolution(params, t, r_a=0j, r_b=0j, n_nodes=2000, pad=1.0):
    """``(1 / 2 pi i) oint e^{-izt} (z - H)^{-1} dz`` on a rectangle around the spectrum.

    Gauss-Legendre on each side, counter-clockwise. The padding is kept at
    order one so that ``e^{-izt}`` does not blow up on the lower side.
    """
    h = effective_hamiltonian(params, r_a, r_b)
    ev = np.linalg.eigvals(h)
    x0, x1 = ev.real.min() - pad, ev.real.max() + pad
    y0, y1 = ev.imag.min() - pad, ev.imag.max() + pad
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    xi, wi = np.polynomial.legendre.leggauss(n_nodes)
    total = np.zeros((2, 2), dtype=complex)
    for k in range(4):
        za, zb = corners[k], corners[(k + 1) % 4]
        half = 0.5 * (zb - za)
        z = za + half * (xi + 1.0)
        # closed-form inverse of the 2x2 matrix z - h
        a, b, c, d = z - h[0, 0], -h[0, 1], -h[1, 0], z - h[1, 1]
        det = a * d - b * c
        wgt = wi * half * np.exp(-1j * z * t) / det
        total += np.array([[np.sum(wgt * d), -np.sum(wgt * b)],
                           [-np.sum(wgt * c), np.sum(wgt * a)]])
    return total / (2j * np.pi)


def heff_evolution(params, t, r_a=0j, r_b=0j):
    return scipy.linalg.expm(-1j * effective_hamiltonian(params, r_a, r_b) * t)


# ---------------------------------------------------------------- spectra


def trapezoid(y, x):
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))
