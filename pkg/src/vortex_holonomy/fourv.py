"""Four identical vortices: Fourier-mode coordinates, reduction and phases.

Modes are the unitary discrete Fourier transform of the positions,
``r_n = (1/2) sum_a z_a exp(i 2 pi n (a-1) / 4)``. With the center of
circulation at the origin ``r_0 = 0`` and the three remaining modes give
actions ``j_n = |r_n|^2 / 2`` and angles ``theta_n``. The linear change
``j = A I``, ``theta = B phi`` (with ``A^T B = 1``) isolates the rotation
angle ``phi3``; ``I3 = j1 + j2 + j3`` is conserved and ``mu = -gamma I3``.

The reduced angles ``phi1, phi2`` live on a torus of period ``2 pi / 3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import PlanarState, Strengths, center_of_circulation, hamiltonian, planar_rhs
from .errors import (
    ChartSingularityError,
    OutOfDomainError,
    UnsupportedConfigurationError,
)
from .jacobi3 import wrap_angle
from .integrator import IntegratorConfig, PeriodicOrbit, find_periodic_orbit, integrate
from .phases import _trajectory_integral, common_rotation, mod_2pi
from .quadrature import gauss_legendre

TORUS_PERIOD = 2.0 * np.pi / 3.0
A_MATRIX = np.array([[-1.0, 0.0, 1.0], [1.0, -1.0, 1.0], [0.0, 1.0, 1.0]]) / 3.0
B_MATRIX = np.array([[-2.0, -1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 2.0, 1.0]])
PAIRS = list(combinations(range(4), 2))
# Fourier kernel e^{i 2 pi n (a-1)/4} = i^{n (a-1)}
_KERNEL = np.array([[1j ** (n * a) for a in range(4)] for n in range(4)])
# modes (r1, r2, r3, 0) from the differences (d12, d13, d24, d34)
DELTA_MATRIX = 0.5 * np.array([
    [0, 1, 1j, 0],
    [1, 0, 0, 1],
    [0, 1, -1j, 0],
    [1, -1, 1, -1],
], dtype=complex)


@dataclass(frozen=True)
class TorusAngle:
    """Angle on the circle of length ``2 pi / 3``; stored in ``[0, 2 pi / 3)``."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(np.mod(self.value, TORUS_PERIOD)))

    def distance(self, other: TorusAngle | float) -> float:
        d = np.mod(float(self) - float(other), TORUS_PERIOD)
        return float(min(d, TORUS_PERIOD - d))

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class Mode4:
    r: np.ndarray  # complex modes r0..r3
    gamma: float


@dataclass(frozen=True)
class Reduced4:
    I1: float
    I2: float
    I3: float
    phi1: float
    phi2: float
    phi3: float
    mu: float

    @property
    def torus(self) -> tuple[TorusAngle, TorusAngle]:
        return TorusAngle(self.phi1), TorusAngle(self.phi2)


@dataclass(frozen=True)
class FourVStructure:
    """Matrices of the action-angle change and the angle metric block."""

    A: np.ndarray = A_MATRIX
    B: np.ndarray = B_MATRIX

    def angle_metric(self, I1: float, I2: float, I3: float) -> np.ndarray:
        """``B^T J B`` where ``J = 2 diag(j1, j2, j3)``."""
        j = self.A @ np.array([I1, I2, I3])
        return self.B.T @ np.diag(2.0 * j) @ self.B

    def action_metric(self, I1: float, I2: float, I3: float) -> np.ndarray:
        j = self.A @ np.array([I1, I2, I3])
        return self.A.T @ np.diag(1.0 / (2.0 * j)) @ self.A


def _require_identical4(strengths: Strengths) -> float:
    if strengths.n != 4 or not strengths.identical():
        raise UnsupportedConfigurationError("four identical strengths are required")
    return strengths.gamma[0]


def dft_forward(state: PlanarState) -> Mode4:
    g = _require_identical4(state.strengths)
    return Mode4(0.5 * _KERNEL @ state.z, g)


def dft_inverse(m: Mode4) -> PlanarState:
    z = 0.5 * np.conj(_KERNEL).T @ m.r
    return PlanarState.from_complex(z, Strengths((m.gamma,) * 4))


def modes_from_differences(z) -> np.ndarray:
    """``(r1, r2, r3, 0)`` from pairwise differences via the fixed linear relation."""
    z = np.asarray(z, dtype=complex)
    d = np.array([z[0] - z[1], z[0] - z[2], z[1] - z[3], z[2] - z[3]])
    return DELTA_MATRIX @ d


def aa4_forward(m: Mode4, center_tol: float = 1e-12) -> Reduced4:
    r = m.r
    scale = max(np.max(np.abs(r)), 1.0)
    if abs(r[0]) > center_tol * scale:
        raise OutOfDomainError("center of circulation is not at the origin (r0 != 0)")
    if np.any(np.abs(r[1:]) == 0.0):
        raise ChartSingularityError("a Fourier mode vanishes; its angle is undefined")
    j = 0.5 * np.abs(r[1:]) ** 2
    theta = np.angle(r[1:])
    I = B_MATRIX.T @ j
    phi = np.linalg.solve(B_MATRIX, theta)
    # wrapping phi1, phi2 by (m1, m2) torus periods leaves theta fixed mod 2 pi
    # only if phi3 moves by -(2 m1 + m2) periods
    m1, m2 = np.floor(phi[:2] / TORUS_PERIOD)
    phi3 = wrap_angle(phi[2] - (2 * m1 + m2) * TORUS_PERIOD)
    return Reduced4(
        float(I[0]), float(I[1]), float(I[2]),
        float(phi[0] - m1 * TORUS_PERIOD), float(phi[1] - m2 * TORUS_PERIOD),
        float(phi3), float(-m.gamma * I[2]),
    )


def aa4_inverse(red: Reduced4, gamma: float) -> Mode4:
    j = A_MATRIX @ np.array([red.I1, red.I2, red.I3])
    if np.any(j < 0):
        raise OutOfDomainError("actions outside the chart domain")
    theta = B_MATRIX @ np.array([red.phi1, red.phi2, red.phi3])
    r = np.concatenate([[0.0], np.sqrt(2.0 * j) * np.exp(1j * theta)])
    return Mode4(r, float(gamma))


def reduce4(state: PlanarState) -> Reduced4:
    return aa4_forward(dft_forward(state))


def lift4(red: Reduced4, gamma: float) -> PlanarState:
    return dft_inverse(aa4_inverse(red, gamma))


@dataclass(frozen=True)
class FourVContext:
    """Reduced space of four identical vortices of strength ``gamma`` at ``mu``."""

    gamma: float
    mu: float

    def __post_init__(self):
        if self.gamma == 0.0 or self.mu == 0.0:
            raise OutOfDomainError("gamma and mu must be nonzero")
        if -self.mu / self.gamma <= 0:
            raise OutOfDomainError("mu must have the sign opposite to gamma (I3 > 0)")

    @property
    def I3(self) -> float:
        return -self.mu / self.gamma

    @property
    def strengths(self) -> Strengths:
        return Strengths((self.gamma,) * 4)

    @property
    def dynamic_density(self) -> float:
        return -3.0 * self.gamma**2 / (2.0 * np.pi * self.mu)

    def in_domain(self, I1, I2, margin: float = 0.0):
        I3 = self.I3
        j = np.stack([-np.asarray(I1) + I3, np.asarray(I1) - I2 + I3, np.asarray(I2) + I3]) / 3.0
        return np.all(j > margin * I3, axis=0)

    def _modes(self, I, phi):
        """Modes ``r1..r3`` and their action/angle derivatives; ``I``, ``phi`` have shape (..., 3)."""
        j = I @ A_MATRIX.T
        theta = phi @ B_MATRIX.T
        r = np.sqrt(2.0 * j) * np.exp(1j * theta)
        dr_dj = r / (2.0 * j)
        return r, dr_dj

    def positions(self, I, phi):
        r, _ = self._modes(I, phi)
        return 0.5 * r @ np.conj(_KERNEL[1:])

    def h_full(self, I, phi):
        z = self.positions(I, phi)
        val = 0.0
        for a, b in PAIRS:
            d = z[..., a] - z[..., b]
            val = val + np.log(d.real**2 + d.imag**2)
        return -(self.gamma**2) / (4.0 * np.pi) * val

    def h(self, I1, I2, phi1, phi2):
        I = np.stack(np.broadcast_arrays(I1, I2, np.full(np.shape(I1), self.I3)), axis=-1)
        phi = np.stack(np.broadcast_arrays(phi1, phi2, np.zeros(np.shape(phi1))), axis=-1)
        return self.h_full(I, phi)

    def gradient_full(self, I, phi):
        """Gradients of ``h`` with respect to ``I`` and ``phi`` (each shape (..., 3))."""
        I = np.asarray(I, float)
        phi = np.asarray(phi, float)
        r, dr_dj = self._modes(I, phi)
        conjk = 0.5 * np.conj(_KERNEL[1:])  # (3 modes, 4 vortices)
        z = r @ conjk
        gI = np.zeros(I.shape)
        gP = np.zeros(phi.shape)
        for a, b in PAIRS:
            d = z[..., a] - z[..., b]
            dd = conjk[:, a] - conjk[:, b]  # dz-difference per unit mode
            w = np.conj(d)[..., None] / (d.real**2 + d.imag**2)[..., None]
            # d ln|d|^2 / d(mode parameter) = 2 Re(conj(d) dd_n dr_n) / |d|^2
            gj = 2.0 * np.real(w * dd * dr_dj)
            gt = 2.0 * np.real(w * dd * 1j * r)
            gI += gj @ A_MATRIX
            gP += gt @ B_MATRIX
        c = -(self.gamma**2) / (4.0 * np.pi)
        return c * gI, c * gP

    def rhs(self):
        """Reduced field on ``[I1, I2, phi1, phi2]``."""
        g = self.gamma
        I3 = self.I3

        def f(t, y):
            gI, gP = self.gradient_full(np.array([y[0], y[1], I3]), np.array([y[2], y[3], 0.0]))
            if not self.in_domain(y[0], y[1]):
                raise ChartSingularityError("left the chart domain")
            return np.array([gP[0] / g, gP[1] / g, -gI[0] / g, -gI[1] / g])

        return f

    def embed(self, y) -> np.ndarray:
        """Point of a Euclidean space representing ``(I1, I2, phi1, phi2)`` on the torus."""
        s = self.I3
        a1, a2 = 3.0 * y[2], 3.0 * y[3]
        return np.array([y[0], y[1], s * np.cos(a1), s * np.sin(a1), s * np.cos(a2), s * np.sin(a2)])


def reduced_hamiltonian4(red: Reduced4, gamma: float) -> float:
    ctx = FourVContext(gamma, -gamma * red.I3)
    return float(ctx.h_full(np.array([red.I1, red.I2, red.I3]), np.array([red.phi1, red.phi2, red.phi3])))


def connection_eval4(I1: float, I2: float, I3: float, d_phi1: float, d_phi2: float,
                     d_phi3: float, d_I1: float = 0.0, d_I2: float = 0.0) -> float:
    """``(I1/I3) dphi1 + (I2/I3) dphi2 + dphi3`` on a tangent vector."""
    if I3 == 0.0:
        raise OutOfDomainError("I3 must be nonzero")
    return (I1 * d_phi1 + I2 * d_phi2) / I3 + d_phi3


def section_pullback4(I1, I2, I3):
    """Coefficients of ``(dphi1, dphi2)`` under the section ``theta2 = const``."""
    return np.asarray(I1) / I3 - 1.0, np.asarray(I2) / I3 + 1.0


def xi4_pointwise(state: PlanarState) -> float:
    """Connection evaluated on the Hamiltonian vector field at ``state``."""
    g = _require_identical4(state.strengths)
    red = reduce4(state)
    ctx = FourVContext(g, red.mu)
    gI, _ = ctx.gradient_full(np.array([red.I1, red.I2, red.I3]), np.array([red.phi1, red.phi2, red.phi3]))
    dphi = -gI / g
    return connection_eval4(red.I1, red.I2, red.I3, dphi[0], dphi[1], dphi[2])


def parallelogram_state(a: complex, b: complex, gamma: float = 1.0) -> PlanarState:
    """Centered configuration ``(a, -a, b, -b)``, invariant under ``z -> -z``."""
    return PlanarState.from_complex([a, -a, b, -b], Strengths((gamma,) * 4))


def periodic_orbit4(state: PlanarState, cfg: IntegratorConfig | None = None) -> tuple[PeriodicOrbit, FourVContext]:
    """Closed reduced orbit through a centered four-vortex configuration."""
    g = _require_identical4(state.strengths)
    red = reduce4(state)
    ctx = FourVContext(g, red.mu)
    p0 = np.array([red.I1, red.I2, red.phi1, red.phi2])
    h0 = float(ctx.h(red.I1, red.I2, red.phi1, red.phi2))
    orb = find_periodic_orbit(ctx.rhs(), p0, cfg, embed=ctx.embed, scale=abs(ctx.I3), energy=h0)
    return orb, ctx


def geometric_phase4(orbit: PeriodicOrbit, ctx: FourVContext) -> float:
    """``-oint (I1/I3 - 1) dphi1 + (I2/I3 + 1) dphi2`` along the orbit."""
    f = ctx.rhs()

    def integrand(ys):
        out = np.empty(len(ys))
        for n, y in enumerate(ys):
            v = f(0.0, y)
            c1, c2 = section_pullback4(y[0], y[1], ctx.I3)
            out[n] = -(c1 * v[2] + c2 * v[3])
        return out

    return _trajectory_integral(orbit.trajectory, integrand, orbit.period)


def geometric_phase4_surface(orbit: PeriodicOrbit, ctx: FourVContext, n_time: int = 2048,
                             n_radial: int = 8) -> float:
    """Curvature integral over the cone from the loop's chart centroid.

    Valid for loops contractible in the chart (angles return unwrapped).
    """
    ts = np.linspace(0.0, orbit.period, n_time, endpoint=False)
    ys = orbit(ts)
    f = ctx.rhs()
    vel = np.array([f(0.0, y) for y in ys])
    c = ys.mean(axis=0)
    s_nodes, s_w = gauss_legendre(n_radial)
    s = 0.5 * (s_nodes + 1.0)
    sw = 0.5 * s_w
    du = ys - c  # d/ds of the cone point
    total = 0.0
    for si, wi in zip(s, sw):
        dv = si * vel  # d/dt of the cone point
        curv = (du[:, 0] * dv[:, 2] - du[:, 2] * dv[:, 0]) + (du[:, 1] * dv[:, 3] - du[:, 3] * dv[:, 1])
        total += wi * np.sum(curv) * (orbit.period / n_time)
    return float(-total / ctx.I3)


def dynamic_phase4_integral(state: PlanarState, T: float, cfg: IntegratorConfig | None = None) -> float:
    """``int_0^T xi dt`` along the unreduced trajectory from ``state``."""
    if T == 0.0:
        return 0.0
    s = state.strengths
    traj = integrate(planar_rhs(s), state.flat, (0.0, T), cfg)

    def integrand(ys):
        return np.array([xi4_pointwise(PlanarState.from_flat(y, s)) for y in ys])

    return _trajectory_integral(traj, integrand, T)


def total_phase4(state: PlanarState, T: float, cfg: IntegratorConfig | None = None) -> float:
    Z0 = center_of_circulation(state)
    if abs(Z0) > 1e-12 * max(1.0, np.max(np.abs(state.z))):
        raise OutOfDomainError("center of circulation must be at the origin")
    traj = integrate(planar_rhs(state.strengths), state.flat, (0.0, T), cfg)
    y = traj.y_final
    return common_rotation(state.z, y[0::2] + 1j * y[1::2])


def theta2_advance(orbit: PeriodicOrbit, ctx: FourVContext) -> float:
    """Total phase via the change of ``theta2`` along the lifted orbit, mod ``2 pi``."""
    # dtheta2/dt = dphi1 - dphi2 + dphi3 with dphi3 = -(1/gamma) dh/dI3
    g = ctx.gamma

    def integrand(ys):
        out = np.empty(len(ys))
        for n, y in enumerate(ys):
            gI, _ = ctx.gradient_full(np.array([y[0], y[1], ctx.I3]), np.array([y[2], y[3], 0.0]))
            dphi = -gI / g
            out[n] = dphi[0] - dphi[1] + dphi[2]
        return out

    return float(mod_2pi(_trajectory_integral(orbit.trajectory, integrand, orbit.period)))
