"""Planar N-point-vortex model: equations of motion, Hamiltonian, invariants.

Positions are stored as ``(N, 2)`` float arrays of ``(x, y)`` pairs; the
flat integrator layout is ``positions.ravel()``, i.e. ``[x1, y1, x2, y2, ...]``.
The strength-weighted Hermitian form ``<U, V> = sum_k G_k u_k conj(v_k)``
supplies both the metric (real part) and the symplectic form (minus the
imaginary part).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateInputError, UnsupportedConfigurationError

COLLISION_EPS = 1e-10
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Strengths:
    """Vortex circulations ``Gamma_1..Gamma_N``."""

    gamma: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in np.ravel(self.gamma))
        if len(g) < 2:
            raise UnsupportedConfigurationError("need at least two vortices")
        if any(v == 0.0 or not np.isfinite(v) for v in g):
            raise UnsupportedConfigurationError(f"strengths must be finite and nonzero: {g}")
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return len(self.gamma)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.gamma)

    @property
    def gamma_tot(self) -> float:
        return float(sum(self.gamma))

    @property
    def virial(self) -> float:
        """``V0 = sum_{n<k} G_n G_k``; depends on the strengths only."""
        return float(sum(a * b for a, b in combinations(self.gamma, 2)))

    @property
    def w0(self) -> float:
        """Three-vortex classification parameter ``1/G1G2 + 1/G2G3 + 1/G3G1``."""
        if self.n != 3:
            raise UnsupportedConfigurationError("W0 is defined for three vortices only")
        g1, g2, g3 = self.gamma
        return 1.0 / (g1 * g2) + 1.0 / (g2 * g3) + 1.0 / (g3 * g1)

    def identical(self, rtol: float = 0.0) -> bool:
        g = self.array
        return bool(np.all(np.abs(g - g[0]) <= rtol * abs(g[0])))


@dataclass(frozen=True, eq=False)
class PlanarState:
    """Positions of N vortices plus their strengths."""

    positions: np.ndarray
    strengths: Strengths

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if np.iscomplexobj(self.positions):
            z = np.asarray(self.positions, dtype=complex).ravel()
            pos = np.column_stack([z.real, z.imag])
        pos = pos.reshape(-1, 2)
        if pos.shape[0] != self.strengths.n:
            raise ValueError(
                f"{pos.shape[0]} positions for {self.strengths.n} strengths"
            )
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions contain non-finite values")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_complex(cls, z, strengths) -> PlanarState:
        if not isinstance(strengths, Strengths):
            strengths = Strengths(tuple(strengths))
        z = np.asarray(z, dtype=complex).ravel()
        return cls(np.column_stack([z.real, z.imag]), strengths)

    @classmethod
    def from_flat(cls, y, strengths: Strengths) -> PlanarState:
        return cls(np.asarray(y, dtype=float).reshape(-1, 2), strengths)

    @property
    def z(self) -> np.ndarray:
        return self.positions[:, 0] + 1j * self.positions[:, 1]

    @property
    def flat(self) -> np.ndarray:
        return self.positions.ravel().copy()

    def __repr__(self):
        return f"PlanarState(z={self.z!r}, gamma={self.strengths.gamma!r})"


@dataclass(frozen=True)
class ConservedSet:
    """Conserved quantities of one planar configuration.

    ``H`` is the Hamiltonian; the "finite part of kinetic energy" is
    ``Psi0 = 2*pi*H`` and is exposed as a property rather than a field.
    """

    Z0: complex
    Theta0: float
    H: float
    V0: float
    M: float
    W0: float | None = None

    @property
    def Psi0(self) -> float:
        return TWO_PI * self.H


def _pair_deltas(z: np.ndarray, min_sep: float) -> np.ndarray:
    dz = z[:, None] - z[None, :]
    d2 = dz.real**2 + dz.imag**2
    np.fill_diagonal(d2, np.inf)
    if d2.min() < min_sep**2:
        a, b = np.unravel_index(np.argmin(d2), d2.shape)
        raise DegenerateInputError(
            f"vortices {a + 1} and {b + 1} collide (separation {np.sqrt(d2[a, b]):.3e})"
        )
    return dz, d2


def _velocities(z: np.ndarray, gamma: np.ndarray, min_sep: float) -> np.ndarray:
    dz, d2 = _pair_deltas(z, min_sep)
    return (1j / TWO_PI) * np.sum(gamma[None, :] * dz / d2, axis=1)


def eom_rhs(state: PlanarState, min_sep: float = COLLISION_EPS) -> np.ndarray:
    """Velocities ``dz_a/dt = (i/2pi) sum_b G_b (z_a - z_b)/|z_a - z_b|^2``.

    Returns an ``(N, 2)`` array of velocity vectors.
    """
    w = _velocities(state.z, state.strengths.array, min_sep)
    return np.column_stack([w.real, w.imag])


def planar_rhs(strengths: Strengths, min_sep: float = COLLISION_EPS):
    """Right-hand side ``f(t, y)`` in the flat ``[x1, y1, x2, y2, ...]`` layout."""
    gamma = strengths.array

    def rhs(t, y):
        z = y[0::2] + 1j * y[1::2]
        w = _velocities(z, gamma, min_sep)
        out = np.empty_like(y)
        out[0::2] = w.real
        out[1::2] = w.imag
        return out

    return rhs


def hamiltonian(state: PlanarState, min_sep: float = COLLISION_EPS) -> float:
    """``h = -(1/2pi) sum_{a<b} G_a G_b ln|z_a - z_b|``."""
    g = state.strengths.array
    _, d2 = _pair_deltas(state.z, min_sep)
    iu = np.triu_indices(len(g), 1)
    return float(-np.sum(np.outer(g, g)[iu] * np.log(d2[iu])) / (4.0 * np.pi))


def hamiltonian_flat(strengths: Strengths):
    g = strengths.array
    iu = np.triu_indices(len(g), 1)
    gg = np.outer(g, g)[iu]

    def h(y):
        z = y[0::2] + 1j * y[1::2]
        dz = (z[:, None] - z[None, :])[iu]
        return float(-np.sum(gg * np.log(dz.real**2 + dz.imag**2)) / (4.0 * np.pi))

    return h


def center_of_circulation(state: PlanarState) -> complex:
    gt = state.strengths.gamma_tot
    if gt == 0.0:
        raise UnsupportedConfigurationError("total strength is zero; Z0 undefined")
    return complex(np.sum(state.strengths.array * state.z) / gt)


def conserved_set(state: PlanarState) -> ConservedSet:
    s = state.strengths
    if s.gamma_tot == 0.0:
        raise UnsupportedConfigurationError(
            "total strength is zero (non-Abelian isotropy case is not supported)"
        )
    g = s.array
    z = state.z
    Z0 = center_of_circulation(state)
    theta0 = float(np.sum(g * np.abs(z) ** 2))
    _, d2 = _pair_deltas(z, COLLISION_EPS)
    iu = np.triu_indices(len(g), 1)
    M = float(np.sum(np.outer(g, g)[iu] * d2[iu]))
    return ConservedSet(
        Z0=Z0,
        Theta0=theta0,
        H=hamiltonian(state),
        V0=s.virial,
        M=M,
        W0=s.w0 if s.n == 3 else None,
    )


def _as_complex_vector(u, n: int) -> np.ndarray:
    u = np.asarray(u)
    if np.iscomplexobj(u):
        out = u.ravel()
    else:
        out = u.reshape(-1, 2) @ np.array([1.0, 1j])
    if out.shape != (n,):
        raise ValueError(f"tangent vector has {out.shape[0]} components, expected {n}")
    return out


def hermitian(strengths: Strengths, u, v) -> complex:
    n = strengths.n
    return complex(np.sum(strengths.array * _as_complex_vector(u, n) * np.conj(_as_complex_vector(v, n))))


def pairing(state: PlanarState, u, v) -> tuple[float, float]:
    """Return ``(metric, symplectic)`` = ``(Re<u,v>, -Im<u,v>)``.

    Tangent vectors may be ``(N, 2)`` real arrays or length-N complex arrays.
    """
    hv = hermitian(state.strengths, u, v)
    return hv.real, -hv.imag


def rotation_generator(state: PlanarState) -> np.ndarray:
    """Infinitesimal generator of rigid rotation about the center of circulation."""
    w = 1j * (state.z - center_of_circulation(state))
    return np.column_stack([w.real, w.imag])


def rotation_connection(state: PlanarState, v) -> float:
    """Metric-orthogonal connection for the rotation action, evaluated on ``v``.

    ``alpha(v) = <<v, iz>> / <<iz, iz>>`` with ``z`` measured from the center
    of circulation. This is chart free and holds for any N.
    """
    gen = rotation_generator(state)
    num, _ = pairing(state, v, gen)
    den, _ = pairing(state, gen, gen)
    if den == 0.0:
        raise UnsupportedConfigurationError("angular impulse vanishes; vertical space degenerate")
    return num / den
