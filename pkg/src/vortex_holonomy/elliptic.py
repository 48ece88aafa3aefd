"""Closed-form periods for three identical vortices via Jacobi elliptic functions.

The shape variable is the squared normalized oriented area

    I = (4 * area / (sqrt(3) * sum |z - Z0|^2))^2,

which equals 1 for an equilateral triangle and 0 for a collinear one. It
obeys ``(dI/dtau)^2 = -I * P(I)`` with the cubic

    P(I) = I^3 + 6 I^2 + (9 - 24 lam2) I + 8 lam2 (2 lam2 - 1),

where ``lam2 = |g|^3 exp(-4 pi H / g^2) / (8 |I2|^3)``, ``I2`` is half the
angular impulse and ``tau = 3 g^2 t / (4 pi lam2 |I2|)``.

Modulus convention: :func:`elliptic_K` and :func:`jacobi_sn` take the
modulus ``k``; the parameter used by some libraries is ``k**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PlanarState, center_of_circulation, hamiltonian
from .errors import InconsistencyError, OutOfDomainError, UnsupportedConfigurationError

SEPARATRIX_LAMBDA2 = 0.5


def _check_modulus(k) -> None:
    k = np.asarray(k, dtype=float)
    if np.any(k < 0) or np.any(k >= 1) or not np.all(np.isfinite(k)):
        raise OutOfDomainError("elliptic modulus must lie in [0, 1)")


def _agm(a: float, b: float, tol: float = 1e-16) -> float:
    for _ in range(64):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if abs(a - b) <= tol * a:
            break
    return 0.5 * (a + b)


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, ``K(k) = pi / (2 agm(1, sqrt(1 - k^2)))``."""
    _check_modulus(k)
    return float(np.pi / (2.0 * _agm(1.0, np.sqrt((1.0 - k) * (1.0 + k)))))


def jacobi_sn(u, k: float):
    """Jacobi ``sn(u, k)`` by the descending Landen (AGM) scheme.

    Accepts scalar or array ``u``.
    """
    _check_modulus(k)
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        out = np.sin(u)
        return float(out) if out.ndim == 0 else out
    a, b, c = [1.0], [np.sqrt((1.0 - k) * (1.0 + k))], [k]
    while abs(c[-1]) > 1e-16 * a[-1] and len(a) < 64:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(np.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    for m in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(c[m] / a[m] * np.sin(phi), -1.0, 1.0)))
    out = np.sin(phi)
    return float(out) if out.ndim == 0 else out


def cubic_coefficients(lambda2: float) -> np.ndarray:
    return np.array([1.0, 6.0, 9.0 - 24.0 * lambda2, 8.0 * lambda2 * (2.0 * lambda2 - 1.0)])


def cubic_roots(lambda2: float) -> np.ndarray:
    """Real roots of the cubic in ascending order (trigonometric formula)."""
    _, a, b, c = cubic_coefficients(lambda2)
    # depressed cubic t^3 + p t + q with I = t - a/3
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    if p >= 0:
        raise OutOfDomainError("cubic does not have three real roots")
    r = 2.0 * np.sqrt(-p / 3.0)
    arg = np.clip(3.0 * q / (p * r), -1.0, 1.0)
    base = np.arccos(arg) / 3.0
    t = r * np.cos(base - 2.0 * np.pi * np.arange(3) / 3.0)
    roots = np.sort(t - a / 3.0)
    # one Newton polish per root
    coef = cubic_coefficients(lambda2)
    d = np.polyder(coef)
    roots = roots - np.polyval(coef, roots) / np.polyval(d, roots)
    return np.sort(roots)


@dataclass(frozen=True)
class APParams:
    """Elliptic data of one identical-vortex trajectory.

    ``roots`` holds ``(R0, R1, R2)`` = (largest, smallest, middle) root.
    ``modulus`` is ``k`` (not ``k**2``); ``omega`` is the frequency in the
    rescaled time ``tau``; ``tau_rate`` is ``dtau/dt``.
    """

    lambda2: float
    roots: tuple[float, float, float]
    branch: str
    kappa: float
    omega: float
    modulus: float
    tau_rate: float

    @property
    def modulus_a_squared(self) -> float:
        r0, r1, r2 = self.roots
        return r0 * (r2 - r1) / (r1 * (r2 - r0))

    @property
    def modulus_b_squared(self) -> float:
        r0, r1, r2 = self.roots
        return r1 * (r2 - r0) / (r0 * (r2 - r1))

    @property
    def motion_interval(self) -> tuple[float, float]:
        r0, r1, r2 = self.roots
        return (0.0, r0) if self.branch == "a" else (r2, r0)


def lambda_squared(H: float, I2: float, gamma: float) -> float:
    g = abs(gamma)
    return float(g**3 * np.exp(-4.0 * np.pi * H / gamma**2) / (8.0 * abs(I2) ** 3))


def ap_params(H: float, I2: float, gamma: float, branch_tol: float = 1e-12) -> APParams:
    """Assemble roots, branch, and elliptic constants for given ``(H, I2, gamma)``.

    Raises
    ------
    OutOfDomainError
        If ``lam2`` is outside ``(0, 1)`` or on the separatrix ``lam2 = 1/2``.
    """
    lam2 = lambda_squared(H, I2, gamma)
    if not 0.0 < lam2 < 1.0 - branch_tol:
        raise OutOfDomainError(f"lambda^2 = {lam2:.15g} outside (0, 1); relative equilibrium or invalid data")
    if abs(lam2 - SEPARATRIX_LAMBDA2) < branch_tol:
        raise OutOfDomainError("lambda^2 = 1/2 is the separatrix between branches")
    small, middle, large = cubic_roots(lam2)
    r0, r1, r2 = large, small, middle
    if lam2 < SEPARATRIX_LAMBDA2:
        branch = "a"
        kappa = r0 / r1
        omega = 0.5 * np.sqrt((r2 - r0) * r1)
        m2 = r0 * (r2 - r1) / (r1 * (r2 - r0))
    else:
        branch = "b"
        kappa = (r2 - r0) / (r2 - r1)
        omega = 0.5 * np.sqrt(r0 * (r2 - r1))
        m2 = r1 * (r2 - r0) / (r0 * (r2 - r1))
    tau_rate = 3.0 * gamma**2 / (4.0 * np.pi * lam2 * abs(I2))
    return APParams(lam2, (r0, r1, r2), branch, float(kappa), float(omega),
                    float(np.sqrt(m2)), float(tau_rate))


def ap_tau_period(params: APParams) -> float:
    return 2.0 * elliptic_K(params.modulus) / params.omega


def ap_period(params: APParams) -> float:
    """Period in physical time of the shape variable."""
    return ap_tau_period(params) / params.tau_rate


def ap_solution(params: APParams, tau):
    """Shape variable at rescaled time ``tau`` measured from a maximum."""
    r0, r1, _ = params.roots
    s2 = jacobi_sn(params.omega * np.asarray(tau, dtype=float), params.modulus) ** 2
    return (r0 - r1 * params.kappa * s2) / (1.0 - params.kappa * s2)


def ode_residual(params: APParams, I, dI_dtau):
    """``(dI/dtau)^2 + I P(I)``; vanishes along exact solutions."""
    I = np.asarray(I, dtype=float)
    return np.asarray(dI_dtau) ** 2 + I * np.polyval(cubic_coefficients(params.lambda2), I)


def _require_identical3(state: PlanarState) -> float:
    s = state.strengths
    if s.n != 3 or not s.identical():
        raise UnsupportedConfigurationError("three identical strengths are required")
    return s.gamma[0]


def shape_variable(state: PlanarState) -> float:
    """Squared normalized oriented area (1 equilateral, 0 collinear)."""
    _require_identical3(state)
    z = state.z - center_of_circulation(state)
    area = 0.5 * np.imag(np.conj(z[1] - z[0]) * (z[2] - z[0]))
    return float((4.0 * area / (np.sqrt(3.0) * np.sum(np.abs(z) ** 2))) ** 2)


def ap_params_from_state(state: PlanarState) -> APParams:
    g = _require_identical3(state)
    z = state.z - center_of_circulation(state)
    I2 = 0.5 * g * float(np.sum(np.abs(z) ** 2))
    return ap_params(hamiltonian(state), I2, g)


def ap_reduced_period_multiple(T_I: float, T_orbit: float, rel_tol: float = 1e-4) -> int:
    """Integer ``n`` with ``T_orbit = n T_I``.

    Raises
    ------
    InconsistencyError
        If the ratio is not an integer within ``rel_tol`` or rounds to zero.
    """
    if not (np.isfinite(T_I) and T_I > 0 and np.isfinite(T_orbit) and T_orbit > 0):
        raise InconsistencyError("periods must be positive and finite")
    n = int(round(T_orbit / T_I))
    if n < 1 or abs(T_orbit - n * T_I) > rel_tol * T_orbit:
        raise InconsistencyError(f"orbit period {T_orbit:.12g} is not a multiple of {T_I:.12g}")
    return n
