"""Fundamental solutions of -y'' + q y = lam y on a single edge.

C(x, lam) and S(x, lam) satisfy C(0) = S'(0) = 1, C'(0) = S(0) = 0.  Closed-form
potentials (zero, const, pw) propagate through exact 2x2 transfer matrices; poly
and grid potentials go through an adaptive high-order integrator.  Everything is
vectorized over the spectral parameter where possible; numeric integrations are
memoized per (edge length, potential, x, lam).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError
from .potentials import Potential

DEFAULT_TOL = 1e-11


def principal_sqrt(lam):
    """Square root with Re >= 0; on the cut Re = 0 take Im >= 0."""
    lam = np.asarray(lam, dtype=complex)
    r = np.sqrt(lam)
    flip = (r.real < 0) | ((r.real == 0) & (r.imag < 0))
    return np.where(flip, -r, r)


@dataclass(frozen=True)
class SpectralParameter:
    lam: complex

    @property
    def rho(self):
        return complex(principal_sqrt(np.array([self.lam]))[0])


@dataclass(frozen=True)
class FundamentalPair:
    C: complex
    S: complex
    Cp: complex
    Sp: complex

    @property
    def wronskian_defect(self):
        return abs(self.C*self.Sp - self.Cp*self.S - 1.0)


def _sinc(z):
    """sin(z)/z, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    return np.where(small, 1 - z*z/6 + z**4/120, np.sin(zs)/zs)


def _const_matrix(d, c, lam):
    """Transfer matrix over a piece of length d with constant potential c."""
    mu = principal_sqrt(np.asarray(lam, dtype=complex) - c)
    z = mu*d
    cz = np.cos(z)
    n = z.shape[0] if z.ndim else 1
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = cz
    out[:, 0, 1] = d*_sinc(z)
    out[:, 1, 0] = -mu*np.sin(z)
    out[:, 1, 1] = cz
    return out


def _closed_form_values(length, pot, x, lam):
    """(C, S, C', S') arrays at position x for zero/const/pw potentials."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if pot.kind == "zero":
        m = _const_matrix(x, 0.0, lam)
    elif pot.kind == "const":
        m = _const_matrix(x, pot.params[0], lam)
    else:  # pw on uniform pieces of [0, length]
        k = len(pot.params)
        d = length/k
        full = int(np.floor(x/d + 1e-12))
        full = min(full, k)
        m = np.tile(np.eye(2, dtype=complex), (lam.shape[0], 1, 1))
        for i in range(full):
            m = _const_matrix(d, pot.params[i], lam) @ m
        rem = x - full*d
        if rem > 1e-12*length and full < k:
            m = _const_matrix(rem, pot.params[full], lam) @ m
    return m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]


def _integrate_values(length, pot, x, lam_scalar, tol):
    """Numeric (C, S, C', S') at x for one lam; DOP853 on the coupled 4-system."""
    lam = complex(lam_scalar)
    rho = abs(complex(principal_sqrt(np.array([lam]))[0]))

    def rhs(t, y):
        qv = complex(pot(np.array([t]), length)[0])
        return [y[1], (qv - lam)*y[0], y[3], (qv - lam)*y[2]]

    try:
        sol = solve_ivp(rhs, (0.0, x), np.array([1, 0, 0, 1], dtype=complex),
                        method="DOP853", rtol=tol, atol=tol*1e-2,
                        max_step=max(min(x/8, 0.5/max(1.0, rho)), 1e-6))
    except Exception as exc:  # pragma: no cover - integrator internals
        raise IntegrationError(str(exc), lam=lam, x=x) from exc
    if not sol.success:
        raise IntegrationError(f"integrator failed: {sol.message}",
                               lam=lam, x=float(sol.t[-1]))
    C, Cp, S, Sp = sol.y[:, -1]
    return C, S, Cp, Sp


@lru_cache(maxsize=200_000)
def _cached_numeric(length, pot, x, lam_key, tol):
    return _integrate_values(length, pot, x, complex(*lam_key), tol)


def edge_values(length, pot, lam, x=None, tol=DEFAULT_TOL):
    """(C, S, C', S') arrays at x (default: the far end) for a lam array."""
    if x is None:
        x = length
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if x == 0.0:
        n = lam.shape[0]
        one, zero = np.ones(n, complex), np.zeros(n, complex)
        return one, zero.copy(), zero.copy(), one.copy()
    if pot.closed_form:
        return _closed_form_values(length, pot, x, lam)
    vals = [_cached_numeric(length, pot, float(x), (z.real, z.imag), tol) for z in lam]
    arr = np.array(vals, dtype=complex)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def fundamental_pair(edge, pot: Potential, x, sp, tol=DEFAULT_TOL) -> FundamentalPair:
    """Fundamental pair at position x on the edge for one spectral parameter."""
    if not 0 <= x <= edge.length*(1 + 1e-12):
        raise ValueError(f"x={x} outside [0, {edge.length}]")
    lam = sp.lam if isinstance(sp, SpectralParameter) else complex(sp)
    C, S, Cp, Sp = edge_values(edge.length, pot, np.array([lam]), x=float(x), tol=tol)
    return FundamentalPair(complex(C[0]), complex(S[0]), complex(Cp[0]), complex(Sp[0]))


def fundamental_pair_grid(edge, pot: Potential, sps, tol=DEFAULT_TOL):
    """Pairs at x = T for a batch of spectral parameters; order preserved."""
    return [fundamental_pair(edge, pot, edge.length, sp, tol=tol) for sp in sps]
