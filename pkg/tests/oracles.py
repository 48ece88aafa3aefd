"""Independent reference computations shared by the test modules."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from vortex_holonomy.core import PlanarState, Strengths, planar_rhs
from vortex_holonomy.elliptic import ap_params_from_state, shape_variable
from vortex_holonomy.errors import OutOfDomainError
from vortex_holonomy.fourv import B_MATRIX
from vortex_holonomy.integrator import IntegratorConfig, integrate

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def fd_derivative(f, x: float, h: float) -> float:
    """Fourth-order central difference."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def fd_gradient(F, y: np.ndarray, h: float = 1e-4) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = 1.0
        out[i] = fd_derivative(lambda t: F(y + t * e), 0.0, h)
    return out


def unwrap_around(value: float, base: float, period: float) -> float:
    """Representative of ``value`` mod ``period`` closest to ``base``."""
    return base + (value - base + 0.5 * period) % period - 0.5 * period


def vortex_bracket(F, G, state: PlanarState, h: float = 1e-4) -> float:
    """``{F, G} = sum_a (F_x G_y - F_y G_x) / Gamma_a`` by finite differences."""
    s = state.strengths

    def lifted(fun):
        return lambda y: fun(PlanarState.from_flat(y, s))

    a = fd_gradient(lifted(F), state.flat, h)
    b = fd_gradient(lifted(G), state.flat, h)
    return float(np.sum((a[0::2] * b[1::2] - a[1::2] * b[0::2]) / s.array))


def reduced3_differential(state: PlanarState, chart, v: np.ndarray):
    """Exact ``(dI1, dphi1, dphi2)`` of a planar tangent ``v`` (complex, length 3)."""
    M = chart.matrix(state.strengths)
    _, r, s = M @ state.z
    _, dr, ds = M @ v
    dth1 = np.imag(dr / r)
    dth2 = np.imag(ds / s)
    dj1 = chart.A * np.real(np.conj(r) * dr)
    dj2 = chart.B * np.real(np.conj(s) * ds)
    return dj2 - dj1, 0.5 * (dth2 - dth1), 0.5 * (dth1 + dth2)


def fourv_differential(state: PlanarState, v: np.ndarray):
    """Exact ``(dI, dphi)`` of a planar tangent for four identical vortices."""
    kernel = np.array([[1j ** (n * a) for a in range(4)] for n in range(1, 4)])
    r = 0.5 * kernel @ state.z
    dr = 0.5 * kernel @ v
    dtheta = np.imag(dr / r)
    dj = np.real(np.conj(r) * dr)
    return B_MATRIX.T @ dj, np.linalg.solve(B_MATRIX, dtheta)


def random_centered(rng, n: int) -> np.ndarray:
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z - z.mean()


def random_identical_three(rng, per_branch: int, gap: float = 0.03, cap: float = 0.97):
    """Random identical-vortex triangles, ``per_branch`` on each elliptic branch."""
    s = Strengths((1.0, 1.0, 1.0))
    want = {"a": per_branch, "b": per_branch}
    out = []
    while want["a"] or want["b"]:
        st = PlanarState.from_complex(random_centered(rng, 3), s)
        try:
            p = ap_params_from_state(st)
        except OutOfDomainError:
            continue
        if abs(p.lambda2 - 0.5) < gap or p.lambda2 > cap or not want[p.branch]:
            continue
        want[p.branch] -= 1
        out.append((st, p))
    return out


def shape_maxima(state: PlanarState, t_end: float, cfg: IntegratorConfig = TIGHT, n_grid: int = 6001):
    """Integrate the full dynamics and locate the maxima of the shape variable.

    Returns ``(trajectory, grid times, shape samples, maxima times)``.
    """
    s = state.strengths
    rhs = planar_rhs(s)
    traj = integrate(rhs, state.flat, (0.0, t_end), cfg)
    ts = np.linspace(0.0, t_end, n_grid)
    shape = np.array([shape_variable(PlanarState.from_flat(y, s)) for y in traj(ts)])

    def rate(t):
        y = traj(np.array([t]))[0]
        v = rhs(t, y)
        e = 1e-6
        return (shape_variable(PlanarState.from_flat(y + e * v, s))
                - shape_variable(PlanarState.from_flat(y - e * v, s))) / (2 * e)

    peaks = []
    for k in range(1, n_grid - 1):
        if shape[k] >= shape[k - 1] and shape[k] >= shape[k + 1]:
            a, b = ts[k - 1], ts[k + 1]
            if rate(a) > 0 > rate(b):
                peaks.append(brentq(rate, a, b, xtol=1e-14))
    return traj, ts, shape, np.array(peaks)
