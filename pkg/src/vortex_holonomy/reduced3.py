"""Reduced three-vortex dynamics on the sphere or hyperboloid ``P_mu``.

A :class:`ReducedContext` bundles strengths, chart and the momentum value
``mu``; every numerical routine here is vectorized over ``(I1, phi1)``.
The reduced flow uses ``dI1/dt = dh/dphi1`` and ``dphi1/dt = -dh/dI1``
(so that ``(I, phi)`` are canonical with ``dI ^ dphi``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Strengths
from .errors import ChartSingularityError, OutOfDomainError, UnsupportedConfigurationError
from .jacobi3 import JBHChart

FOUR_PI = 4.0 * np.pi
DOMAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class ReducedContext:
    """Fixed data of one reduced space: strengths, chart and ``mu = -I2``."""

    strengths: Strengths
    mu: float
    chart: JBHChart = field(default=None)

    def __post_init__(self):
        if self.strengths.n != 3:
            raise UnsupportedConfigurationError("reduced context needs three vortices")
        if self.mu == 0.0 or not np.isfinite(self.mu):
            raise OutOfDomainError("mu must be finite and nonzero")
        if self.chart is None:
            object.__setattr__(self, "chart", JBHChart.build(self.strengths))
        A, B = self.chart.A, self.chart.B
        if A * B > 0 and np.sign(self.mu) != -np.sign(A):
            raise OutOfDomainError(
                f"on the sphere the sign of mu must be opposite to the chart coefficients "
                f"(A={A:.6g}, B={B:.6g}, mu={self.mu:.6g})"
            )

    @classmethod
    def build(cls, strengths, mu: float, k: int = 3) -> ReducedContext:
        if not isinstance(strengths, Strengths):
            strengths = Strengths(tuple(strengths))
        return cls(strengths, float(mu), JBHChart.build(strengths, k))

    @property
    def compact(self) -> bool:
        return self.chart.A * self.chart.B > 0

    @property
    def surface(self) -> str:
        return "sphere" if self.compact else "hyperboloid"

    @property
    def I2(self) -> float:
        return -self.mu

    @property
    def margin(self) -> float:
        return DOMAIN_MARGIN * abs(self.mu)

    @property
    def I1_range(self) -> tuple[float, float]:
        """Open interval of admissible ``I1`` (may be half-infinite)."""
        m = abs(self.mu)
        if self.compact:
            return -m, m
        return (m, np.inf) if self.chart.A < 0 else (-np.inf, -m)

    @property
    def dynamic_density(self) -> float:
        """Constant value of the connection on the Hamiltonian vector field."""
        return -self.strengths.virial / (FOUR_PI * self.mu)

    # squared sides ---------------------------------------------------------

    def _radii(self, I1, I2):
        r2 = (I2 - I1) / self.chart.A
        s2 = (I1 + I2) / self.chart.B
        return r2, s2

    def in_domain(self, I1, margin: float | None = None):
        lo, hi = self.I1_range
        d = self.margin if margin is None else margin
        I1 = np.asarray(I1, dtype=float)
        return (I1 > lo + d) & (I1 < hi - d)

    def check(self, I1) -> None:
        if not np.all(self.in_domain(I1)):
            lo, hi = self.I1_range
            bad = np.asarray(I1)[~self.in_domain(I1)].ravel()[0]
            if self.in_domain(bad, margin=0.0):
                raise ChartSingularityError(f"I1={bad:.12g} is within the margin of a pole")
            raise OutOfDomainError(f"I1={bad:.12g} outside ({lo:.6g}, {hi:.6g})")

    def sides(self, I1, phi1, I2=None):
        """Squared side lengths ``(b1, b2, b3)``, vectorized."""
        I2 = self.I2 if I2 is None else I2
        r2, s2 = self._radii(np.asarray(I1, float), I2)
        with np.errstate(invalid="ignore"):
            rs = np.sqrt(r2 * s2)
        c = np.cos(2.0 * np.asarray(phi1, float))
        ai, aj = self.chart.weights(self.strengths)
        b_k = r2 + 0.0 * c
        b_j = s2 + aj**2 * r2 + 2.0 * aj * rs * c
        b_i = s2 + ai**2 * r2 - 2.0 * ai * rs * c
        out = [None, None, None]
        ii, jj, kk = self.chart.indices
        out[ii], out[jj], out[kk] = b_i, b_j, b_k
        return tuple(out)

    def _weights_per_side(self):
        g = self.strengths.gamma
        # weight of ln b_m is the product of the two strengths not labelled m
        return g[1] * g[2], g[2] * g[0], g[0] * g[1]

    # Hamiltonian and gradient --------------------------------------------

    def h(self, I1, phi1, I2=None):
        b = self.sides(I1, phi1, I2)
        w = self._weights_per_side()
        with np.errstate(invalid="ignore", divide="ignore"):
            val = -(w[0] * np.log(b[0]) + w[1] * np.log(b[1]) + w[2] * np.log(b[2])) / FOUR_PI
        return float(val) if np.ndim(val) == 0 else val

    def gradient(self, I1, phi1, I2=None):
        """Return ``(dh/dI1, dh/dphi1, dh/dI2)`` by the chain rule."""
        I2 = self.I2 if I2 is None else I2
        I1 = np.asarray(I1, float)
        phi1 = np.asarray(phi1, float)
        A, B = self.chart.A, self.chart.B
        ai, aj = self.chart.weights(self.strengths)
        r2, s2 = self._radii(I1, I2)
        with np.errstate(invalid="ignore", divide="ignore"):
            rs = np.sqrt(r2 * s2)
            c, sn = np.cos(2.0 * phi1), np.sin(2.0 * phi1)
            b_k = r2 + 0.0 * c
            b_j = s2 + aj**2 * r2 + 2.0 * aj * rs * c
            b_i = s2 + ai**2 * r2 - 2.0 * ai * rs * c
            g = self.strengths.gamma
            ii, jj, kk = self.chart.indices
            wk = g[ii] * g[jj]
            wj = g[kk] * g[ii]
            wi = g[jj] * g[kk]

            def dlog(dr2, ds2, dc):
                drs = (dr2 * s2 + r2 * ds2) / (2.0 * rs)
                d_k = dr2
                d_j = ds2 + aj**2 * dr2 + 2.0 * aj * (drs * c + rs * dc)
                d_i = ds2 + ai**2 * dr2 - 2.0 * ai * (drs * c + rs * dc)
                return -(wk * d_k / b_k + wj * d_j / b_j + wi * d_i / b_i) / FOUR_PI

            zero = np.zeros_like(c)
            dI1 = dlog(-1.0 / A, 1.0 / B, zero)
            dI2 = dlog(1.0 / A, 1.0 / B, zero)
            dphi = -(wj * 2.0 * aj * rs * (-2.0 * sn) / b_j
                     - wi * 2.0 * ai * rs * (-2.0 * sn) / b_i) / FOUR_PI
        return dI1, dphi, dI2

    def hessian(self, I1: float, phi1: float, step: float = 1e-6) -> np.ndarray:
        """Hessian of ``h`` in ``(I1, phi1)`` by central differences of the gradient."""
        hI = step * max(1.0, abs(self.mu))
        gp = self.gradient(I1 + hI, phi1)
        gm = self.gradient(I1 - hI, phi1)
        fp = self.gradient(I1, phi1 + step)
        fm = self.gradient(I1, phi1 - step)
        H = np.array([
            [(gp[0] - gm[0]) / (2 * hI), (gp[1] - gm[1]) / (2 * hI)],
            [(fp[0] - fm[0]) / (2 * step), (fp[1] - fm[1]) / (2 * step)],
        ], dtype=float)
        return 0.5 * (H + H.T)

    def vector_field(self, I1, phi1):
        """``(dI1/dt, dphi1/dt, dphi2/dt)`` of the reduced flow."""
        dI1, dphi, dI2 = self.gradient(I1, phi1)
        return dphi, -dI1, -dI2

    def rhs(self):
        """Planar reduced field ``f(t, [I1, phi1])`` (``phi1`` unwrapped)."""

        def f(t, y):
            dI1, dphi, _ = self.gradient(y[0], y[1])
            return np.array([float(dphi), -float(dI1)])

        return f

    def rhs_with_fiber(self):
        """Field on ``[I1, phi1, phi2]``, lifting the reduced flow to ``J^{-1}(mu)``."""

        def f(t, y):
            dI1, dphi, dI2 = self.gradient(y[0], y[1])
            return np.array([float(dphi), -float(dI1), -float(dI2)])

        return f

    def embed_xyz(self, I1, phi1) -> np.ndarray:
        """Vectorized embedding; returns an array with trailing axis ``(x, y, z)``."""
        I1 = np.asarray(I1, float)
        phi1 = np.asarray(phi1, float)
        rad = np.sqrt(np.abs(self.mu**2 - I1**2))
        return np.stack([rad * np.cos(2 * phi1), rad * np.sin(2 * phi1), I1], axis=-1)


@dataclass(frozen=True)
class ReducedPoint:
    I1: float
    phi1: float
    context: ReducedContext


@dataclass(frozen=True)
class EmbeddedPoint:
    x: float
    y: float
    z: float
    surface: str

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def embed(p: ReducedPoint) -> EmbeddedPoint:
    ctx = p.context
    lo, hi = ctx.I1_range
    if not lo <= p.I1 <= hi:
        raise OutOfDomainError(f"I1={p.I1:.12g} outside [{lo:.6g}, {hi:.6g}]")
    x, y, z = ctx.embed_xyz(p.I1, p.phi1)
    return EmbeddedPoint(float(x), float(y), float(z), ctx.surface)


def reduced_hamiltonian(p: ReducedPoint) -> float:
    p.context.check(p.I1)
    return p.context.h(p.I1, p.phi1)


def reduced_vector_field(p: ReducedPoint) -> tuple[float, float]:
    p.context.check(p.I1)
    dI, dphi, _ = p.context.vector_field(p.I1, p.phi1)
    return float(dI), float(dphi)


def connection_eval(I1: float, mu: float, d_phi1: float, d_phi2: float, d_I1: float = 0.0) -> float:
    """Connection ``-(I1/mu) dphi1 + dphi2`` applied to a tangent vector.

    The ``dI1`` component does not enter; it is accepted for a uniform signature.
    """
    if mu == 0.0:
        raise OutOfDomainError("mu must be nonzero")
    return -(I1 / mu) * d_phi1 + d_phi2


def section_pullback(p: ReducedPoint) -> float:
    """Coefficient of ``dphi1`` in the pulled-back connection, ``1 - I1/mu``."""
    return 1.0 - p.I1 / p.context.mu


def section_pullback_value(I1, mu):
    return 1.0 - np.asarray(I1, float) / mu


@dataclass(frozen=True)
class FixedPoint:
    I1: float
    phi1: float
    energy: float
    kind: str  # "center" or "saddle"
    omega: float  # linear frequency for centers, growth rate for saddles


def refine_fixed_point(ctx: ReducedContext, I1: float, phi1: float, tol: float = 1e-13,
                       max_iter: int = 60) -> FixedPoint:
    """Newton iteration on ``grad h = 0`` starting from ``(I1, phi1)``."""
    x = np.array([I1, phi1], dtype=float)
    for _ in range(max_iter):
        ctx.check(x[0])
        g = np.array(ctx.gradient(x[0], x[1])[:2], dtype=float)
        H = ctx.hessian(x[0], x[1])
        dx = np.linalg.solve(H, -g)
        x = x + dx
        if np.all(np.abs(dx) < tol * np.maximum(1.0, np.abs(x))):
            break
    else:
        raise OutOfDomainError("fixed-point Newton iteration did not converge")
    ctx.check(x[0])
    H = ctx.hessian(x[0], x[1])
    det = float(np.linalg.det(H))
    kind = "center" if det > 0 else "saddle"
    return FixedPoint(float(x[0]), float(x[1]), ctx.h(x[0], x[1]), kind, float(np.sqrt(abs(det))))


def find_fixed_points(ctx: ReducedContext, n_I: int = 81, n_phi: int = 64) -> list[FixedPoint]:
    """Locate interior critical points of ``h`` from a coarse grid of seeds."""
    lo, hi = ctx.I1_range
    if not ctx.compact:
        hi = lo + 10 * abs(ctx.mu) if np.isinf(hi) else hi
        lo = hi - 10 * abs(ctx.mu) if np.isinf(lo) else lo
    pad = 1e-3 * abs(ctx.mu)
    Is = np.linspace(lo + pad, hi - pad, n_I)
    ps = np.linspace(0.0, np.pi, n_phi, endpoint=False)
    II, PP = np.meshgrid(Is, ps, indexing="ij")
    gI, gP, _ = ctx.gradient(II, PP)
    norm = np.hypot(gI, gP)
    found: list[FixedPoint] = []
    for a in range(1, n_I - 1):
        for b in range(n_phi):
            window = norm[a - 1:a + 2, [(b - 1) % n_phi, b, (b + 1) % n_phi]]
            if not np.isfinite(norm[a, b]) or norm[a, b] > np.nanmin(window):
                continue
            try:
                fp = refine_fixed_point(ctx, II[a, b], PP[a, b])
            except (OutOfDomainError, ChartSingularityError, np.linalg.LinAlgError):
                continue
            phi = float(np.mod(fp.phi1, np.pi))
            fp = FixedPoint(fp.I1, phi, fp.energy, fp.kind, fp.omega)
            tol = 1e-7 * max(abs(ctx.mu), abs(fp.I1))
            if any(abs(fp.I1 - q.I1) < tol and abs(np.angle(np.exp(2j * (fp.phi1 - q.phi1)))) < 1e-6
                   for q in found):
                continue
            found.append(fp)
    found.sort(key=lambda q: (q.I1, q.phi1))
    return found
