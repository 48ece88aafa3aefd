"""Enumeration of the closed level-set components of the reduced Hamiltonian.

Seeds are roots of ``h(I1, phi1) = E`` along a set of meridians
``phi1 = const``; each seed not already lying on a known orbit is turned
into a :class:`PeriodicOrbit`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ChartSingularityError,
    EquilibriumError,
    IntegrationError,
    NotPeriodicError,
    OutOfDomainError,
)
from .integrator import IntegratorConfig, PeriodicOrbit, find_periodic_orbit
from .reduced3 import ReducedContext, find_fixed_points


@dataclass
class LevelSetOrbit:
    """A periodic orbit found at a target energy, with its seed."""

    orbit: PeriodicOrbit
    seed: tuple[float, float]


def level_set_seeds(ctx: ReducedContext, energy: float, n_meridians: int = 24,
                    n_grid: int = 4001) -> list[tuple[float, float]]:
    """Points of the level set ``h = energy`` on a fan of meridians."""
    lo, hi = ctx.I1_range
    if not ctx.compact:
        span = 20.0 * abs(ctx.mu)
        lo, hi = (lo, lo + span) if np.isinf(hi) else (hi - span, hi)
    pad = 1e-6 * abs(ctx.mu)
    Is = np.linspace(lo + pad, hi - pad, n_grid)
    meridians = list(np.linspace(0.0, np.pi, n_meridians, endpoint=False))
    for fp in find_fixed_points(ctx):
        meridians.append(fp.phi1)
    seeds = []
    for phi in sorted(set(np.round(meridians, 14))):
        vals = ctx.h(Is, phi) - energy
        ok = np.isfinite(vals)
        change = np.where(ok[:-1] & ok[1:] & (np.sign(vals[:-1]) != np.sign(vals[1:])))[0]
        for i in change:
            root = brentq(lambda x: ctx.h(x, phi) - energy, Is[i], Is[i + 1], xtol=1e-15, rtol=1e-15)
            seeds.append((float(root), float(phi)))
    return seeds


def _on_orbit(orbit: PeriodicOrbit, ctx: ReducedContext, point, n: int = 4096) -> bool:
    ts = np.linspace(0.0, orbit.period, n + 1)
    y = orbit(ts)
    xyz = ctx.embed_xyz(y[:, 0], y[:, 1])
    spacing = np.max(np.linalg.norm(np.diff(xyz, axis=0), axis=1))
    d = np.linalg.norm(xyz - ctx.embed_xyz(*point), axis=1)
    return bool(d.min() < max(spacing, 1e-9 * abs(ctx.mu)))


def orbits_at_energy(ctx: ReducedContext, energy: float, cfg: IntegratorConfig | None = None,
                     n_meridians: int = 24) -> list[LevelSetOrbit]:
    """All closed components of ``h = energy`` reachable from the meridian seeds.

    Returned orbits are sorted by period.
    """
    cfg = cfg or IntegratorConfig()
    found: list[LevelSetOrbit] = []
    for seed in level_set_seeds(ctx, energy, n_meridians):
        if any(_on_orbit(f.orbit, ctx, seed) for f in found):
            continue
        try:
            orb = find_periodic_orbit(
                ctx.rhs(), np.array(seed), cfg,
                embed=lambda y: ctx.embed_xyz(y[0], y[1]),
                scale=abs(ctx.mu), energy=energy,
            )
        except (NotPeriodicError, EquilibriumError, IntegrationError,
                ChartSingularityError, OutOfDomainError):
            continue
        found.append(LevelSetOrbit(orb, seed))
    found.sort(key=lambda f: f.orbit.period)
    return found
