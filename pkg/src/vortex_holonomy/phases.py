"""Reconstruction phases of periodic reduced orbits.

For a loop in the reduced space the rotation accumulated by the full
configuration splits as ``theta_tot = theta_g + theta_d (mod 2 pi)``:

* ``theta_g``, the geometric part, is minus the integral of the section
  pullback ``(1 - I1/mu) dphi1`` around the loop, or equivalently minus
  ``sign(mu)`` times half the enclosed area on the normalized surface;
* ``theta_d``, the dynamic part, integrates the connection on the
  Hamiltonian vector field, which is constant, so ``theta_d`` is linear in
  the period;
* ``theta_tot`` is read off the unreduced motion after one period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    PlanarState,
    Strengths,
    center_of_circulation,
    eom_rhs,
    planar_rhs,
    rotation_connection,
)
from .errors import (
    ChartSingularityError,
    IntegrationError,
    NotPeriodicError,
    NotRelativelyPeriodicError,
    OutOfDomainError,
    UnsupportedConfigurationError,
)
from .integrator import IntegratorConfig, PeriodicOrbit, Trajectory, integrate
from .jacobi3 import JBHChart, Reduced3, psi, psi_inverse
from .quadrature import integrate_gk15
from .reduced3 import ReducedContext

TWO_PI = 2.0 * np.pi


def mod_2pi(x):
    return np.mod(x, TWO_PI)


def angle_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    return float(abs(np.angle(np.exp(1j * (a - b)))))


@dataclass
class PhaseReport:
    """Phases of one periodic orbit.

    ``theta_g`` is the raw line-integral value along the flow direction;
    ``method`` names the route used for each field and ``checks`` keeps
    values from the alternative routes.
    """

    theta_g: float
    theta_d: float
    theta_tot_mod: float
    T: float
    energy: float
    method: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def theta_g_mod(self) -> float:
        return float(mod_2pi(self.theta_g))

    @property
    def theta_sum_mod(self) -> float:
        return float(mod_2pi(self.theta_g + self.theta_d))

    def as_row(self) -> dict:
        return {
            "energy": self.energy,
            "theta_g": self.theta_g,
            "period": self.T,
            "theta_d": self.theta_d,
            "theta_tot": self.theta_tot_mod,
        }


def _trajectory_integral(traj: Trajectory, integrand, t_end: float) -> float:
    bp = traj.breakpoints
    bp = bp[bp * traj.direction < t_end * traj.direction]
    bp = np.append(bp, t_end)

    def f(ts):
        return integrand(traj(ts))

    val, _ = integrate_gk15(f, bp, abs_tol=1e-12, rel_tol=1e-12)
    return val


def geometric_phase_line(orbit: PeriodicOrbit, ctx: ReducedContext) -> float:
    """``-int_0^T (1 - I1/mu) dphi1/dt dt`` along the orbit (``phi1`` unwrapped)."""
    if orbit.period == 0.0:
        return 0.0
    ctx.check(orbit.samples[:, 0])

    def integrand(y):
        dI1, dphi, _ = ctx.gradient(y[:, 0], y[:, 1])
        phi_dot = -dI1
        return -(1.0 - y[:, 0] / ctx.mu) * phi_dot

    return _trajectory_integral(orbit.trajectory, integrand, orbit.period)


def _triangle_fan_area(points: np.ndarray, lorentzian: bool) -> float:
    """Signed area of a closed polyline on the unit sphere or unit hyperboloid.

    Triangles ``(p0, p_i, p_{i+1})`` are summed with the closed-form solid
    angle (or its Lorentzian counterpart). Counterclockwise loops seen from
    outside the surface (from ``+z`` at the pole) count as positive.
    """
    a = points[0]
    b = points[1:-1]
    c = points[2:]
    det = np.einsum("ij,ij->i", np.cross(b, c), np.broadcast_to(a, b.shape))
    if lorentzian:
        def dot(u, v):
            return u[..., 2] * v[..., 2] - u[..., 0] * v[..., 0] - u[..., 1] * v[..., 1]
    else:
        def dot(u, v):
            return np.sum(u * v, axis=-1)
    den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a)
    return float(2.0 * np.sum(np.arctan2(det, den)))


def enclosed_area(loop_xyz: np.ndarray, surface: str) -> float:
    """Signed area (mod ``4 pi``) enclosed by a loop on the normalized surface.

    Both surfaces use the sign of ``-dz ^ dpsi`` with ``psi`` the azimuth:
    positive for counterclockwise loops on the sphere seen from ``+z``, and
    negative for counterclockwise loops on the upper hyperboloid sheet.
    """
    pts = np.asarray(loop_xyz, dtype=float)
    if surface == "sphere":
        pts = pts / np.linalg.norm(pts, axis=1)[:, None]
        return _triangle_fan_area(pts, lorentzian=False)
    # mirror the lower sheet onto the upper one; reflection reverses orientation
    flip = np.sign(pts[0, 2])
    pts = pts * flip
    norm = np.sqrt(pts[:, 2] ** 2 - pts[:, 0] ** 2 - pts[:, 1] ** 2)
    pts = pts / norm[:, None]
    pts[:, 1] *= flip
    # hyperbolic area is +dz ^ dpsi, so flip it to the sphere's sign convention
    return -_triangle_fan_area(pts, lorentzian=True)


def geometric_phase_area(orbit: PeriodicOrbit, ctx: ReducedContext, n_points: int = 8192) -> float:
    """Geometric phase (mod ``2 pi``) from half the enclosed area.

    The polyline is sampled from the dense orbit, projected to the unit
    sphere or unit hyperboloid, and its area computed by a triangle fan.
    Using the fan's signed area (defined mod ``4 pi``) removes the need to
    pick a side of the loop; loops around a pole need no special case.
    """
    if orbit.period == 0.0:
        return 0.0
    ts = np.linspace(0.0, orbit.period, n_points + 1)
    y = orbit(ts)
    xyz = ctx.embed_xyz(y[:, 0], y[:, 1])
    xyz[-1] = xyz[0]
    area = enclosed_area(xyz, ctx.surface)
    return float(mod_2pi(-np.sign(ctx.mu) * 0.5 * area))


def dynamic_phase_closed_form(strengths: Strengths, mu: float, T: float) -> float:
    """Dynamic phase of a loop of period ``T``.

    Three vortices: ``-V0 T / (4 pi mu)``. Four identical vortices of
    strength ``g``: ``-3 g^2 T / (2 pi mu)``.
    """
    if mu == 0.0:
        raise OutOfDomainError("mu must be nonzero")
    if strengths.n == 3:
        return -strengths.virial * T / (4.0 * np.pi * mu)
    if strengths.n == 4 and strengths.identical():
        g = strengths.gamma[0]
        return -3.0 * g * g * T / (2.0 * np.pi * mu)
    raise UnsupportedConfigurationError("closed form is available for 3 vortices or 4 identical ones")


def dynamic_phase_integral(orbit: PeriodicOrbit, ctx: ReducedContext) -> float:
    """``int_0^T alpha(X_h) dt`` with ``alpha = -(I1/mu) dphi1 + dphi2``."""
    if orbit.period == 0.0:
        return 0.0

    def integrand(y):
        dI1, _, dI2 = ctx.gradient(y[:, 0], y[:, 1])
        return -(y[:, 0] / ctx.mu) * (-dI1) + (-dI2)

    return _trajectory_integral(orbit.trajectory, integrand, orbit.period)


def dynamic_phase_planar(state: PlanarState, T: float, cfg: IntegratorConfig | None = None) -> float:
    """Dynamic phase from the unreduced motion, using the chart-free connection."""
    if T == 0.0:
        return 0.0
    s = state.strengths
    traj = integrate(planar_rhs(s), state.flat, (0.0, T), cfg)

    def integrand(ys):
        return np.array([
            rotation_connection(PlanarState.from_flat(y, s), eom_rhs(PlanarState.from_flat(y, s)))
            for y in ys
        ])

    return _trajectory_integral(traj, integrand, T)


def common_rotation(z0: np.ndarray, z1: np.ndarray, tol: float = 1e-6) -> float:
    """Angle ``theta`` in ``[0, 2 pi)`` with ``z1 = e^{i theta} z0``.

    Raises
    ------
    NotRelativelyPeriodicError
        If the per-vortex angles (or moduli) disagree by more than ``tol``.
    """
    z0 = np.asarray(z0, dtype=complex)
    z1 = np.asarray(z1, dtype=complex)
    ratio = z1 / z0
    scale = np.max(np.abs(z0))
    if np.max(np.abs(np.abs(z1) - np.abs(z0))) > tol * max(scale, 1.0):
        raise NotRelativelyPeriodicError("moduli changed; configuration is not a rotated copy")
    angles = np.angle(ratio)
    ref = angles[np.argmax(np.abs(z0))]
    spread = np.abs(np.angle(np.exp(1j * (angles - ref))))
    if np.max(spread) > tol:
        raise NotRelativelyPeriodicError(
            f"per-vortex rotation angles disagree by up to {np.max(spread):.3e}"
        )
    # weight by |z0|^2 to damp vortices near the origin
    w = np.abs(z0) ** 2
    mean = np.angle(np.sum(w * np.exp(1j * angles)))
    return float(mod_2pi(mean))


def total_phase_reconstruction(
    state: PlanarState, T: float, cfg: IntegratorConfig | None = None, tol: float = 1e-6
) -> float:
    """Integrate the unreduced system for ``T`` and return the common rotation angle."""
    Z0 = center_of_circulation(state)
    centered = PlanarState.from_complex(state.z - Z0, state.strengths)
    if T == 0.0:
        return 0.0
    try:
        traj = integrate(planar_rhs(state.strengths), centered.flat, (0.0, T), cfg)
    except IntegrationError:
        raise
    y = traj.y_final
    z1 = y[0::2] + 1j * y[1::2]
    return common_rotation(centered.z, z1, tol)


def lift(ctx: ReducedContext, I1: float, phi1: float, phi2: float = 0.0) -> PlanarState:
    """Planar configuration (center at the origin) over a reduced point."""
    red = Reduced3(float(I1), ctx.I2, float(phi1), float(phi2), ctx.mu)
    return psi_inverse(red, ctx.chart, ctx.strengths)


@dataclass
class ChartCheck:
    values: dict
    skipped: dict
    spread_mod_2pi: float

    @property
    def consistent(self) -> bool:
        return len(self.values) >= 2


def chart_independence_check(orbit: PeriodicOrbit, ctx: ReducedContext,
                             cfg: IntegratorConfig | None = None) -> ChartCheck:
    """Geometric phase of the same physical loop in each of the three charts.

    The starting configuration is re-expressed in chart ``k``, the reduced
    flow of that chart is integrated for one period and its line integral
    taken. Charts whose singular points the loop meets are skipped.
    """
    from .integrator import find_periodic_orbit

    values: dict[int, float] = {}
    skipped: dict[int, str] = {}
    if orbit.period == 0.0:
        return ChartCheck({k: 0.0 for k in (1, 2, 3)}, {}, 0.0)
    state = lift(ctx, orbit.p0[0], orbit.p0[1])
    cfg = cfg or IntegratorConfig()
    for k in (1, 2, 3):
        try:
            chart = JBHChart.build(ctx.strengths, k)
            red = psi(state, chart)
            ctx_k = ReducedContext(ctx.strengths, red.mu, chart)
            p0 = np.array([red.I1, red.phi1])
            orb = find_periodic_orbit(
                ctx_k.rhs(), p0, cfg,
                embed=lambda y, c=ctx_k: c.embed_xyz(y[0], y[1]),
                scale=abs(ctx_k.mu), energy=orbit.energy,
            )
            if abs(orb.period - orbit.period) > 1e-6 * orbit.period:
                skipped[k] = f"period mismatch {orb.period:.12g} vs {orbit.period:.12g}"
                continue
            values[k] = geometric_phase_line(orb, ctx_k)
        except (ChartSingularityError, OutOfDomainError, NotPeriodicError,
                UnsupportedConfigurationError, IntegrationError) as exc:
            skipped[k] = str(exc)
    vals = list(values.values())
    spread = max((angle_distance(a, b) for a in vals for b in vals), default=0.0)
    return ChartCheck(values, skipped, spread)


def phase_report(orbit: PeriodicOrbit, ctx: ReducedContext, cfg: IntegratorConfig | None = None,
                 with_checks: bool = True) -> PhaseReport:
    """All phases of a reduced three-vortex orbit.

    The primary values use the line integral, the closed-form dynamic phase
    and the unreduced reconstruction; alternative routes are stored in
    ``checks``.
    """
    theta_g = geometric_phase_line(orbit, ctx)
    theta_d = dynamic_phase_closed_form(ctx.strengths, ctx.mu, orbit.period)
    state = lift(ctx, orbit.p0[0], orbit.p0[1])
    theta_tot = total_phase_reconstruction(state, orbit.period, cfg)
    rep = PhaseReport(
        theta_g=theta_g,
        theta_d=theta_d,
        theta_tot_mod=theta_tot,
        T=orbit.period,
        energy=orbit.energy,
        method={
            "theta_g": "line_integral",
            "theta_d": "closed_form",
            "theta_tot": "unreduced_reconstruction",
            "period": "section_return",
        },
    )
    if with_checks:
        rep.checks["theta_g_area"] = geometric_phase_area(orbit, ctx)
        rep.checks["theta_d_integral"] = dynamic_phase_integral(orbit, ctx)
    return rep
