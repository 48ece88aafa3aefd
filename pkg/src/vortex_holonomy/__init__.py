"""Reduced dynamics and reconstruction phases of planar point-vortex systems."""

from __future__ import annotations

from .core import ConservedSet, PlanarState, Strengths, conserved_set, hamiltonian
from .errors import VortexError
from .integrator import IntegratorConfig, find_periodic_orbit, integrate
from .phases import PhaseReport, phase_report
from .reduced3 import ReducedContext

__version__ = "0.1.0"

__all__ = [
    "ConservedSet",
    "IntegratorConfig",
    "PhaseReport",
    "PlanarState",
    "ReducedContext",
    "Strengths",
    "VortexError",
    "conserved_set",
    "find_periodic_orbit",
    "hamiltonian",
    "integrate",
    "phase_report",
]
