"""Canonical coordinate pipeline for three vortices.

The pipeline ``psi = t3 . t2 . t1`` sends planar positions to reduced
action-angle variables ``(I1, I2, phi1, phi2)``:

* ``t1``: Jacobi-type relative coordinates ``(Z0, r, s)`` for a chart ``(i, j, k)``;
* ``t2``: polar actions ``j = A|r|^2/2``, ``B|s|^2/2`` with their angles;
* ``t3``: difference and sum combinations, ``I1 = j2 - j1``, ``I2 = j1 + j2``.

Charts use cyclic ordering ``(i, j, k)`` in ``{(1,2,3), (2,3,1), (3,1,2)}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PlanarState, Strengths
from .errors import ChartSingularityError, OutOfDomainError, UnsupportedConfigurationError

_CYCLIC = {3: (1, 2, 3), 1: (2, 3, 1), 2: (3, 1, 2)}


def wrap_angle(a):
    """Map angles into ``(-pi, pi]``."""
    w = np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class JBHChart:
    """One of the three relative-coordinate charts, labelled by ``last_vortex``.

    Indices are one-based, matching vortex labels.
    """

    last_vortex: int
    i: int
    j: int
    A: float
    B: float

    @classmethod
    def build(cls, strengths: Strengths, k: int = 3) -> JBHChart:
        if strengths.n != 3:
            raise UnsupportedConfigurationError("charts are defined for three vortices")
        if k not in _CYCLIC:
            raise ValueError(f"chart index must be 1, 2 or 3, got {k}")
        i, j, _ = _CYCLIC[k]
        g = strengths.gamma
        gi, gj, gk = g[i - 1], g[j - 1], g[k - 1]
        gt = strengths.gamma_tot
        if gt == 0.0:
            raise UnsupportedConfigurationError("total strength is zero")
        if gi + gj == 0.0:
            raise UnsupportedConfigurationError(
                f"strengths of vortices {i} and {j} cancel; chart {k} is undefined"
            )
        return cls(k, i, j, gi * gj / (gi + gj), (gi + gj) * gk / gt)

    @property
    def indices(self) -> tuple[int, int, int]:
        """Zero-based ``(i, j, k)``."""
        return self.i - 1, self.j - 1, self.last_vortex - 1

    def weights(self, strengths: Strengths) -> tuple[float, float]:
        """Return ``(a_i, a_j)``, the fractional strengths within the ``(i, j)`` pair."""
        g = strengths.gamma
        gi, gj = g[self.i - 1], g[self.j - 1]
        return gi / (gi + gj), gj / (gi + gj)

    def matrix(self, strengths: Strengths) -> np.ndarray:
        """Complex-linear map ``(z1, z2, z3) -> (Z0, r, s)`` as a 3x3 matrix."""
        ii, jj, kk = self.indices
        g = strengths.array
        gt = strengths.gamma_tot
        ai, aj = self.weights(strengths)
        m = np.zeros((3, 3))
        m[0] = g / gt
        m[1, jj], m[1, ii] = 1.0, -1.0
        m[2, kk], m[2, ii], m[2, jj] = 1.0, -ai, -aj
        return m


@dataclass(frozen=True)
class JBHCoords:
    Z0: complex
    r: complex
    s: complex


@dataclass(frozen=True)
class ActionAngle3:
    j1: float
    j2: float
    theta1: float
    theta2: float
    K: complex


@dataclass(frozen=True)
class Reduced3:
    """Reduced coordinates; ``mu = -I2`` labels the reduced space."""

    I1: float
    I2: float
    phi1: float
    phi2: float
    mu: float

    @classmethod
    def make(cls, I1: float, I2: float, phi1: float, phi2: float = 0.0) -> Reduced3:
        return cls(float(I1), float(I2), float(phi1), float(phi2), -float(I2))


@dataclass(frozen=True)
class SquaredSides:
    """``b_m = |z_p - z_q|^2`` with ``{m, p, q} = {1, 2, 3}``."""

    b1: float
    b2: float
    b3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.b3])


def t1_forward(state: PlanarState, chart: JBHChart) -> JBHCoords:
    Z0, r, s = chart.matrix(state.strengths) @ state.z
    return JBHCoords(complex(Z0), complex(r), complex(s))


def t1_inverse(jbh: JBHCoords, chart: JBHChart, strengths: Strengths) -> PlanarState:
    ii, jj, kk = chart.indices
    ai, aj = chart.weights(strengths)
    g = strengths.gamma
    gt = strengths.gamma_tot
    gk = g[kk]
    pair_center = jbh.Z0 - gk * jbh.s / gt
    z = np.empty(3, dtype=complex)
    z[kk] = jbh.Z0 + (gt - gk) * jbh.s / gt
    z[ii] = pair_center - aj * jbh.r
    z[jj] = pair_center + ai * jbh.r
    return PlanarState.from_complex(z, strengths)


def _circulation_scale(strengths: Strengths) -> float:
    # sqrt(|G_tot|) keeps K real-scaled when the total strength is negative
    return float(np.sqrt(abs(strengths.gamma_tot)))


def t2_forward(jbh: JBHCoords, chart: JBHChart, strengths: Strengths) -> ActionAngle3:
    if jbh.r == 0:
        raise ChartSingularityError(
            f"vortices {chart.i} and {chart.j} coincide; angle of r undefined"
        )
    if jbh.s == 0:
        raise ChartSingularityError(
            f"vortex {chart.last_vortex} sits at the pair center; angle of s undefined"
        )
    return ActionAngle3(
        j1=0.5 * chart.A * abs(jbh.r) ** 2,
        j2=0.5 * chart.B * abs(jbh.s) ** 2,
        theta1=float(np.angle(jbh.r)),
        theta2=float(np.angle(jbh.s)),
        K=_circulation_scale(strengths) * jbh.Z0,
    )


def _signed_radius(j: float, coef: float, name: str) -> float:
    q = 2.0 * j / coef
    if q < 0.0:
        raise OutOfDomainError(f"{name}: action sign disagrees with its chart coefficient")
    return float(np.sqrt(q))


def t2_inverse(aa: ActionAngle3, chart: JBHChart, strengths: Strengths) -> JBHCoords:
    r = _signed_radius(aa.j1, chart.A, "j1") * np.exp(1j * aa.theta1)
    s = _signed_radius(aa.j2, chart.B, "j2") * np.exp(1j * aa.theta2)
    return JBHCoords(complex(aa.K / _circulation_scale(strengths)), complex(r), complex(s))


def fold_angles(phi1, phi2):
    """Fold ``phi1`` into ``[0, pi)``, compensating ``phi2`` so ``theta`` is unchanged."""
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    turns = np.floor(phi1 / np.pi)
    f1 = phi1 - turns * np.pi
    # tiny negative phi1 rounds up to pi; count it as one more turn
    edge = f1 >= np.pi
    turns = turns + edge
    f1 = np.where(edge, 0.0, f1)
    # a shift of phi1 by pi, together with phi2 by pi, moves theta2 by a full turn
    f2 = wrap_angle(phi2 + turns * np.pi)
    if f1.ndim == 0:
        return float(f1), float(f2)
    return f1, f2


def t3_forward(aa: ActionAngle3) -> Reduced3:
    phi1, phi2 = fold_angles(0.5 * (aa.theta2 - aa.theta1), 0.5 * (aa.theta1 + aa.theta2))
    I2 = aa.j1 + aa.j2
    return Reduced3(aa.j2 - aa.j1, I2, phi1, phi2, -I2)


def t3_inverse(red: Reduced3, K: complex = 0j) -> ActionAngle3:
    return ActionAngle3(
        j1=0.5 * (red.I2 - red.I1),
        j2=0.5 * (red.I1 + red.I2),
        theta1=wrap_angle(red.phi2 - red.phi1),
        theta2=wrap_angle(red.phi1 + red.phi2),
        K=K,
    )


def psi(state: PlanarState, chart: JBHChart | None = None) -> Reduced3:
    """Full map from planar positions to reduced coordinates."""
    chart = chart or JBHChart.build(state.strengths)
    return t3_forward(t2_forward(t1_forward(state, chart), chart, state.strengths))


def psi_inverse(
    red: Reduced3, chart: JBHChart, strengths: Strengths, center: complex = 0j
) -> PlanarState:
    """Rebuild positions with center of circulation ``center``."""
    K = _circulation_scale(strengths) * complex(center)
    return t1_inverse(t2_inverse(t3_inverse(red, K), chart, strengths), chart, strengths)


def squared_sides(red: Reduced3, chart: JBHChart, strengths: Strengths) -> SquaredSides:
    """Squared side lengths of the triangle encoded by ``(I1, I2, phi1)``.

    The fiber angle is pinned at ``phi2 = 0`` and the center at the origin.
    """
    pinned = Reduced3(red.I1, red.I2, red.phi1, 0.0, red.mu)
    z = psi_inverse(pinned, chart, strengths).z
    return SquaredSides(
        b1=float(abs(z[1] - z[2]) ** 2),
        b2=float(abs(z[2] - z[0]) ** 2),
        b3=float(abs(z[0] - z[1]) ** 2),
    )
