"""Adaptive Dormand-Prince 5(4) integration, periodic-orbit detection and
an independent contour-quadrature period.

The stepper follows the classic ``DOPRI5`` design: seven stages with the
first-same-as-last property, a proportional-integral step-size controller
and a fourth-order continuous extension used for dense output and event
location.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ChartSingularityError,
    DegenerateInputError,
    EquilibriumError,
    IntegrationError,
    NotPeriodicError,
    OutOfDomainError,
)
from .quadrature import gauss_legendre

# Butcher tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
# difference between fifth- and fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense-output coefficients
_D = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423,
])

_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2  # largest shrink factor is 1/0.2 = 5
_FAC_MAX = 10.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits.

    ``drift_budget`` is the allowed relative drift of monitored invariants;
    trajectories exceeding it are flagged, not rejected.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    drift_budget: float = 1e-8
    max_steps: int = 2_000_000
    t_max: float = 1e3
    return_tol: float = 1e-8
    fixed_point_tol: float = 1e-12

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")

    def scaled(self, factor: float) -> IntegratorConfig:
        """Copy with both tolerances multiplied by ``factor``."""
        from dataclasses import replace

        return replace(self, rel_tol=self.rel_tol * factor, abs_tol=self.abs_tol * factor)


@dataclass
class Event:
    """Zero-crossing of ``g(t, y)``.

    ``direction`` > 0 selects upward crossings, < 0 downward, 0 both.
    ``accept(t, y)`` may veto a located crossing.
    """

    g: Callable[[float, np.ndarray], float]
    direction: int = 0
    terminal: bool = False
    accept: Callable[[float, np.ndarray], bool] | None = None


@dataclass
class Trajectory:
    """Accepted steps plus their continuous extensions."""

    t: np.ndarray
    y: np.ndarray
    coeffs: np.ndarray  # (n_steps, 5, dim)
    direction: float
    event_t: list = field(default_factory=list)
    event_y: list = field(default_factory=list)
    drift: dict = field(default_factory=dict)
    flagged: bool = False
    n_rhs: int = 0

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]

    @property
    def breakpoints(self) -> np.ndarray:
        return self.t

    def __call__(self, t):
        """Dense interpolant; ``t`` may be a scalar or array inside the span."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        key = self.direction * self.t
        idx = np.searchsorted(key, self.direction * tt, side="right") - 1
        idx = np.clip(idx, 0, len(self.t) - 2)
        t0 = self.t[idx]
        h = self.t[idx + 1] - t0
        theta = ((tt - t0) / h)[:, None]
        th1 = 1.0 - theta
        c = self.coeffs[idx]
        out = c[:, 0] + theta * (c[:, 1] + th1 * (c[:, 2] + theta * (c[:, 3] + th1 * c[:, 4])))
        return out[0] if scalar else out


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(f, t0, y0, f0, direction, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cfg.max_step)
    f1 = np.asarray(f(t0 + direction * h0, y0 + direction * h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, cfg.max_step)


def _safe_rhs(f, t, y):
    try:
        v = np.asarray(f(t, y), dtype=float)
    except (DegenerateInputError, ChartSingularityError, OutOfDomainError, FloatingPointError):
        return None
    if not np.all(np.isfinite(v)):
        return None
    return v


def integrate(
    rhs: Callable,
    y0,
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    events: Sequence[Event] = (),
    invariants: dict[str, Callable[[np.ndarray], float]] | None = None,
) -> Trajectory:
    """Integrate ``dy/dt = rhs(t, y)`` over ``t_span`` (either direction).

    Raises
    ------
    IntegrationError
        When the step size underflows or the step budget is exhausted; the
        exception carries the last accepted state.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = np.array(y0, dtype=float).ravel()
    direction = 1.0 if t1 >= t0 else -1.0
    ts, ys, coeffs = [t0], [y.copy()], []
    n_rhs = 1
    f0 = _safe_rhs(rhs, t0, y)
    if f0 is None:
        raise IntegrationError("vector field undefined at the initial state", t0, y)
    if t1 == t0:
        return Trajectory(np.array([t0, t0]), np.array([y, y]),
                          np.zeros((1, 5, y.size)), direction, n_rhs=n_rhs)
    h = _initial_step(rhs, t0, y, f0, direction, cfg)
    n_rhs += 1
    fac_old = 1e-4
    t = t0
    k = np.empty((7, y.size))
    k[0] = f0
    ev_prev = [ev.g(t, y) for ev in events]
    stop = False
    rejected_last = False
    hits: list = []
    for _ in range(cfg.max_steps):
        if abs(h) < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.16g}", t, y)
        h = min(h, cfg.max_step)
        last = direction * (t + direction * h - t1) >= 0
        hs = (t1 - t) if last else direction * h
        ok = True
        for s in range(1, 7):
            ys_ = y + hs * (np.dot(_A[s], k[:s]))
            v = _safe_rhs(rhs, t + _C[s] * hs, ys_)
            if v is None:
                ok = False
                break
            k[s] = v
        n_rhs += 6
        if not ok:
            h = 0.25 * abs(hs)
            rejected_last = True
            continue
        y_new = y + hs * np.dot(_A[6], k[:6])
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(hs * np.dot(_E, k) / scale)
        fac11 = err ** _EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / fac_old**_BETA
            fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFETY))
            h_new = abs(hs) / fac
            if rejected_last:
                h_new = min(h_new, abs(hs))
            fac_old = max(err, 1e-4)
            ydiff = y_new - y
            bspl = hs * k[0] - ydiff
            coef = np.stack([
                y, ydiff, bspl, ydiff - hs * k[6] - bspl, hs * np.dot(_D, k),
            ])
            t_new = t1 if last else t + hs
            ts.append(t_new)
            ys.append(y_new.copy())
            coeffs.append(coef)
            # events on the fresh step
            for idx, ev in enumerate(events):
                g_new = ev.g(t_new, y_new)
                g_old = ev_prev[idx]
                ev_prev[idx] = g_new
                up = g_old < 0 <= g_new
                down = g_old > 0 >= g_new
                if not ((up and ev.direction >= 0) or (down and ev.direction <= 0)):
                    continue
                step = Trajectory(np.array([t, t_new]), np.array([y, y_new]),
                                  coef[None], direction)
                te = brentq(lambda s_: ev.g(s_, step(s_)), min(t, t_new), max(t, t_new),
                            xtol=4 * np.finfo(float).eps * max(1.0, abs(t_new)), rtol=1e-15)
                ye = step(te)
                if ev.accept is not None and not ev.accept(te, ye):
                    continue
                hits.append((te, ye))
                if ev.terminal:
                    ts[-1] = te
                    ys[-1] = ye
                    coeffs[-1] = _restrict(coef, t, t_new, te)
                    stop = True
                    break
            if stop:
                break
            t, y = t_new, y_new
            k[0] = k[6]
            h = h_new
            rejected_last = False
            if last:
                break
        else:
            h = abs(hs) / min(1.0 / _FAC_MIN, fac11 / _SAFETY)
            rejected_last = True
    else:
        raise IntegrationError("step budget exhausted", t, y)

    traj = Trajectory(np.array(ts), np.array(ys), np.array(coeffs), direction, n_rhs=n_rhs)
    traj.event_t = [h_[0] for h_ in hits]
    traj.event_y = [h_[1] for h_ in hits]
    if invariants:
        for name, fn in invariants.items():
            v0 = fn(traj.y[0])
            vals = np.array([fn(yy) for yy in traj.y])
            drift = float(np.max(np.abs(vals - v0)) / max(abs(v0), 1e-300))
            traj.drift[name] = drift
            if drift > cfg.drift_budget:
                traj.flagged = True
    return traj


def _restrict(coef: np.ndarray, ta: float, tb: float, te: float) -> np.ndarray:
    """Re-express a step polynomial on ``[ta, te]`` instead of ``[ta, tb]``."""
    lam = (te - ta) / (tb - ta)
    # sample the original polynomial at five points and refit in the new variable
    s = np.linspace(0.0, 1.0, 5)
    th = lam * s
    vals = np.array([_poly(coef, x) for x in th])
    basis = np.array([[1.0, x, x * (1 - x), x * x * (1 - x), x * x * (1 - x) ** 2] for x in s])
    return np.linalg.solve(basis, vals)


def _poly(c, theta):
    th1 = 1.0 - theta
    return c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4])))


# periodic orbits ----------------------------------------------------------


@dataclass
class PeriodicOrbit:
    """A closed reduced trajectory.

    ``trajectory`` gives dense access over ``[0, period]``; ``samples`` are
    evenly spaced in time (first point repeated at the end).
    """

    period: float
    energy: float
    p0: np.ndarray
    trajectory: Trajectory
    samples: np.ndarray
    return_distance: float
    meta: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.trajectory(t)


def _embedded_velocity(embed, y, v, eps=1e-7):
    return (np.asarray(embed(y + eps * v)) - np.asarray(embed(y - eps * v))) / (2 * eps)


def find_periodic_orbit(
    rhs: Callable,
    p0,
    cfg: IntegratorConfig | None = None,
    embed: Callable | None = None,
    scale: float = 1.0,
    energy: float = float("nan"),
    n_samples: int = 256,
) -> PeriodicOrbit:
    """Integrate from ``p0`` until the first return to ``p0``.

    Returns are detected on the hyperplane through ``embed(p0)`` normal to
    the embedded velocity and accepted when the embedded distance is below
    ``cfg.return_tol * scale``.

    Raises
    ------
    EquilibriumError
        If ``|rhs(p0)|`` is below ``cfg.fixed_point_tol * scale``.
    NotPeriodicError
        If no return is found before ``cfg.t_max``.
    """
    cfg = cfg or IntegratorConfig()
    embed = embed or (lambda y: y)
    p0 = np.array(p0, dtype=float)
    v0 = np.asarray(rhs(0.0, p0), dtype=float)
    if not np.all(np.isfinite(v0)):
        raise IntegrationError("vector field undefined at the initial point", 0.0, p0)
    if np.linalg.norm(v0) < cfg.fixed_point_tol * max(scale, 1.0):
        raise EquilibriumError(f"|X| = {np.linalg.norm(v0):.3e} at the initial point")
    e0 = np.asarray(embed(p0), dtype=float)
    n = _embedded_velocity(embed, p0, v0 / np.linalg.norm(v0))
    n = n / np.linalg.norm(n)
    tol = cfg.return_tol * scale
    # crossings are only candidates when reasonably close; the final check is strict
    near = 1e-3 * scale

    def g(t, y):
        return float(np.dot(np.asarray(embed(y)) - e0, n))

    def accept(t, y):
        return t > 0 and np.linalg.norm(np.asarray(embed(y)) - e0) < near

    ev = Event(g, direction=1, terminal=True, accept=accept)
    try:
        traj = integrate(rhs, p0, (0.0, cfg.t_max), cfg, events=[ev])
    except IntegrationError as exc:
        raise NotPeriodicError(f"integration failed before returning: {exc}") from exc
    if not traj.event_t:
        raise NotPeriodicError(f"no return to the initial point within t_max={cfg.t_max:g}")
    T = traj.event_t[-1]
    dist = float(np.linalg.norm(np.asarray(embed(traj.event_y[-1])) - e0))
    if dist > tol:
        raise NotPeriodicError(
            f"closest section return at t={T:.10g} misses the start by {dist:.3e} > {tol:.3e}"
        )
    ts = np.linspace(0.0, T, n_samples + 1)
    return PeriodicOrbit(T, energy, p0, traj, traj(ts), dist)


# contour quadrature --------------------------------------------------------


def period_by_quadrature(ctx, I1_0: float, phi1_0: float, energy: float | None = None,
                         reverse: bool = False, ds0: float | None = None,
                         n_gauss: int = 10, max_segments: int = 200_000) -> float:
    """Period of the level set of the reduced Hamiltonian through ``(I1_0, phi1_0)``.

    The contour is traced by predictor-corrector continuation. On every
    segment the time is integrated with Gauss-Legendre nodes as
    ``dphi1 / (dphi1/dt)`` or ``dI1 / (dI1/dt)``, whichever parameter keeps
    its rate away from zero. Each node is projected back onto the level set
    by Newton iteration.

    Parameters
    ----------
    ctx : ReducedContext
    reverse : bool
        Trace against the flow; the returned period is still positive.
    """
    mu = abs(ctx.mu)
    E = ctx.h(I1_0, phi1_0) if energy is None else energy
    ctx.check(I1_0)
    xg, wg = gauss_legendre(n_gauss)
    sign = -1.0 if reverse else 1.0

    def field_(p):
        dI1, dphi, _ = ctx.gradient(p[0], p[1])
        return np.array([float(dphi), -float(dI1)])  # (dI1/dt, dphi1/dt)

    def metric_dir(p):
        v = field_(p) * sign
        w = np.array([v[0] / mu, v[1]])
        return v / np.linalg.norm(w)

    def correct(p):
        # Newton along the gradient direction in scaled coordinates
        for _ in range(30):
            dI1, dphi, _ = ctx.gradient(p[0], p[1])
            gI, gP = float(dI1), float(dphi)
            r = ctx.h(p[0], p[1]) - E
            denom = gI * gI * mu * mu + gP * gP
            step = r / denom
            p = p - step * np.array([gI * mu * mu, gP])
            if not ctx.in_domain(p[0]):
                raise ChartSingularityError("level set leaves the chart")
            if abs(r) < 1e-14 * max(1.0, abs(E)):
                return p
        return p

    def solve_on_line(fixed_phi, value, guess):
        x = guess
        for _ in range(40):
            if fixed_phi:
                dI1, _, _ = ctx.gradient(x, value)
                r = ctx.h(x, value) - E
                dx = -r / float(dI1)
            else:
                _, dphi, _ = ctx.gradient(value, x)
                r = ctx.h(value, x) - E
                dx = -r / float(dphi)
            x += dx
            if abs(dx) < 1e-15 * max(1.0, abs(x)):
                break
        return x

    def segment_time(p, q):
        vm = field_(0.5 * (p + q))
        by_phi = abs(vm[1]) * mu >= abs(vm[0])
        if by_phi:
            a, b = p[1], q[1]
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * xg
            Is = np.interp(nodes, [a, b], [p[0], q[0]]) if a != b else np.full_like(nodes, p[0])
            Is = np.array([solve_on_line(True, s, g0) for s, g0 in zip(nodes, Is)])
            rates = -ctx.gradient(Is, nodes)[0]
        else:
            a, b = p[0], q[0]
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * xg
            Ps = np.interp(nodes, [a, b], [p[1], q[1]]) if a != b else np.full_like(nodes, p[1])
            Ps = np.array([solve_on_line(False, s, g0) for s, g0 in zip(nodes, Ps)])
            rates = ctx.gradient(nodes, Ps)[1]
        return float(0.5 * (b - a) * np.dot(wg, 1.0 / rates))

    start = np.array([I1_0, phi1_0], dtype=float)
    ds = ds0 if ds0 is not None else 2e-3
    p = start.copy()
    total = 0.0
    travelled = 0.0
    for _ in range(max_segments):
        d = metric_dir(p)
        # close the loop once the start is within one step ahead
        q_end = start.copy()
        q_end[1] += np.pi * np.round((p[1] - start[1]) / np.pi)
        gap = np.array([(q_end[0] - p[0]) / mu, q_end[1] - p[1]])
        if travelled > 4 * ds and np.hypot(*gap) < 1.5 * ds and np.dot(gap, d * [1 / mu, 1]) > 0:
            return abs(total + segment_time(p, q_end))
        for _try in range(40):
            q_pred = p + ds * d
            try:
                q = correct(q_pred)
            except ChartSingularityError:
                ds *= 0.5
                continue
            dev = np.hypot((q - q_pred)[0] / mu, (q - q_pred)[1])
            # keep the corrector displacement small relative to the step
            if dev > 0.05 * ds:
                ds *= 0.5
                continue
            break
        else:
            raise ChartSingularityError("contour continuation failed")
        total += segment_time(p, q)
        travelled += ds
        p = q
        if dev < 0.005 * ds:
            ds = min(ds * 1.5, 0.05)
    raise NotPeriodicError("contour did not close")
