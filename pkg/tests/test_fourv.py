from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import TIGHT, fourv_differential, random_centered
from vortex_holonomy.core import (
    PlanarState,
    Strengths,
    conserved_set,
    eom_rhs,
    hamiltonian,
    rotation_connection,
)
from vortex_holonomy.errors import OutOfDomainError, UnsupportedConfigurationError
from vortex_holonomy.fourv import (
    A_MATRIX,
    B_MATRIX,
    TORUS_PERIOD,
    FourVContext,
    FourVStructure,
    Reduced4,
    TorusAngle,
    connection_eval4,
    dft_forward,
    dft_inverse,
    geometric_phase4,
    geometric_phase4_surface,
    lift4,
    modes_from_differences,
    parallelogram_state,
    periodic_orbit4,
    reduce4,
    reduced_hamiltonian4,
    section_pullback4,
    theta2_advance,
    total_phase4,
    xi4_pointwise,
)
from vortex_holonomy.phases import angle_distance, dynamic_phase_closed_form, mod_2pi

UNIT4 = Strengths((1.0,) * 4)


def centered(rng, gamma=1.0):
    return PlanarState.from_complex(random_centered(rng, 4), Strengths((gamma,) * 4))


def test_matrices_are_dual():
    assert A_MATRIX.T @ B_MATRIX == pytest.approx(np.eye(3), abs=1e-15)
    # the rotation direction theta_n -> theta_n + d is phi3 -> phi3 + d
    assert B_MATRIX @ [0, 0, 1] == pytest.approx([1, 1, 1])


def test_square_has_single_mode():
    r = dft_forward(PlanarState.from_complex([1, 1j, -1, -1j], UNIT4)).r
    assert r == pytest.approx([0, 0, 0, 2], abs=1e-15)


def test_centrally_symmetric_kills_even_modes():
    a, b = 0.8 + 0.1j, -0.2 + 0.9j
    r = dft_forward(PlanarState.from_complex([a, b, -a, -b], UNIT4)).r
    assert abs(r[0]) < 1e-15 and abs(r[2]) < 1e-15
    assert abs(dft_forward(parallelogram_state(a, b)).r[0]) < 1e-15


def test_dft_round_trip_and_parseval(rng):
    for _ in range(20):
        s = PlanarState.from_complex(rng.normal(size=4) + 1j * rng.normal(size=4), UNIT4)
        m = dft_forward(s)
        assert np.sum(np.abs(m.r) ** 2) == pytest.approx(np.sum(np.abs(s.z) ** 2), rel=1e-13)
        assert np.max(np.abs(dft_inverse(m).z - s.z)) < 1e-14


def test_modes_from_differences(rng):
    s = centered(rng)
    assert modes_from_differences(s.z)[:3] == pytest.approx(dft_forward(s).r[1:], abs=1e-13)


def test_third_action_is_scaled_moment(rng):
    for g in (1.0, -2.5):
        s = centered(rng, g)
        red = reduce4(s)
        assert red.I3 == pytest.approx(conserved_set(s).Theta0 / (2 * g), rel=1e-13)
        assert red.mu == pytest.approx(-g * red.I3, rel=1e-14)


def test_reduction_round_trip(rng):
    for _ in range(30):
        s = centered(rng, 1.7)
        red = reduce4(s)
        assert 0 <= red.phi1 < TORUS_PERIOD and 0 <= red.phi2 < TORUS_PERIOD
        assert np.max(np.abs(lift4(red, 1.7).z - s.z)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-np.pi, np.pi))
def test_rotation_moves_only_the_fiber_angle(delta):
    s = centered(np.random.default_rng(7))
    a = reduce4(s)
    b = reduce4(PlanarState.from_complex(np.exp(1j * delta) * s.z, UNIT4))
    assert (b.I1, b.I2, b.I3) == pytest.approx((a.I1, a.I2, a.I3), rel=1e-12)
    assert TorusAngle(b.phi1).distance(a.phi1) < 1e-12
    assert TorusAngle(b.phi2).distance(a.phi2) < 1e-12
    assert angle_distance(b.phi3, a.phi3 + delta) < 1e-12


def test_torus_angle():
    assert float(TorusAngle(TORUS_PERIOD + 0.1)) == pytest.approx(0.1)
    assert TorusAngle(0.05).distance(TORUS_PERIOD - 0.05) == pytest.approx(0.1)


def test_reduced_energy_matches_planar(rng):
    for _ in range(100):
        s = centered(rng, 1.3)
        red = reduce4(s)
        assert reduced_hamiltonian4(red, 1.3) == pytest.approx(hamiltonian(s), rel=1e-11, abs=1e-11)
        turned = Reduced4(red.I1, red.I2, red.I3, red.phi1, red.phi2, red.phi3 + 1.234, red.mu)
        assert reduced_hamiltonian4(turned, 1.3) == pytest.approx(reduced_hamiltonian4(red, 1.3), abs=1e-12)


def test_reduced_field_matches_planar_motion(rng):
    s = centered(rng)
    red = reduce4(s)
    ctx = FourVContext(1.0, red.mu)
    dI, dphi = fourv_differential(s, eom_rhs(s) @ np.array([1.0, 1j]))
    field = ctx.rhs()(0.0, np.array([red.I1, red.I2, red.phi1, red.phi2]))
    assert field == pytest.approx([dI[0], dI[1], dphi[0], dphi[1]], rel=1e-9, abs=1e-12)
    assert abs(dI[2]) < 1e-12


def test_connection_on_generators():
    I1, I2, I3 = 0.2, -0.1, 0.9
    assert connection_eval4(I1, I2, I3, 0, 0, 1) == 1.0
    assert connection_eval4(I1, I2, I3, I3, 0, -I1) == pytest.approx(0.0, abs=1e-16)
    assert connection_eval4(I1, I2, I3, 0, I3, -I2) == pytest.approx(0.0, abs=1e-16)
    with pytest.raises(OutOfDomainError):
        connection_eval4(I1, I2, 0.0, 0, 0, 1)


def test_connection_is_metric_dual_of_rotation():
    g = FourVStructure().angle_metric(0.2, -0.1, 0.9)
    assert g[:, 2] / g[2, 2] == pytest.approx([0.2 / 0.9, -0.1 / 0.9, 1.0], rel=1e-13)


def test_section_pullback_restricts_connection():
    # theta2 = phi1 - phi2 + phi3, so holding it fixed means dphi3 = -dphi1 + dphi2
    assert B_MATRIX[1] == pytest.approx([1, -1, 1])
    I1, I2, I3 = 0.3, 0.1, 0.8
    c1, c2 = section_pullback4(I1, I2, I3)
    for d1, d2 in ((1.0, 0.0), (0.0, 1.0), (0.4, -0.7)):
        assert c1 * d1 + c2 * d2 == pytest.approx(connection_eval4(I1, I2, I3, d1, d2, -d1 + d2))


def test_dynamic_density_is_constant(rng):
    for g in (1.0, 2.0):
        s = centered(rng, g)
        mu = reduce4(s).mu
        density = -3 * g * g / (2 * np.pi * mu)
        assert xi4_pointwise(s) == pytest.approx(density, rel=1e-10)
        assert rotation_connection(s, eom_rhs(s)) == pytest.approx(density, rel=1e-10)
        assert FourVContext(g, mu).dynamic_density == pytest.approx(density)


def test_density_formula_example():
    # formal evaluation: unit strength and mu = 1 lies outside the physical domain
    assert dynamic_phase_closed_form(UNIT4, 1.0, 1.0) == pytest.approx(-3 / (2 * np.pi))
    with pytest.raises(OutOfDomainError):
        FourVContext(1.0, 1.0)


def test_input_validation():
    with pytest.raises(UnsupportedConfigurationError):
        dft_forward(PlanarState.from_complex([1, 1j, -1, -1j], Strengths((1.0, 1.0, 1.0, 2.0))))
    with pytest.raises(OutOfDomainError):
        reduce4(PlanarState.from_complex([1.1, 1j, -1, -1j], UNIT4))


@pytest.fixture(scope="module")
def parallelogram():
    s = PlanarState.from_complex([1, -1, 0.3 + 0.8j, -0.3 - 0.8j], UNIT4)
    orbit, ctx = periodic_orbit4(s, TIGHT)
    return s, orbit, ctx


def test_parallelogram_phases_add_up(parallelogram):
    s, orbit, ctx = parallelogram
    theta_g = geometric_phase4(orbit, ctx)
    theta_d = dynamic_phase_closed_form(UNIT4, ctx.mu, orbit.period)
    theta_tot = total_phase4(s, orbit.period, TIGHT)
    assert angle_distance(theta_tot, mod_2pi(theta_g + theta_d)) < 1e-7
    assert angle_distance(theta_tot, theta2_advance(orbit, ctx)) < 1e-7


def test_parallelogram_surface_matches_line(parallelogram):
    _, orbit, ctx = parallelogram
    assert angle_distance(geometric_phase4_surface(orbit, ctx), geometric_phase4(orbit, ctx)) < 1e-5


def test_parallelogram_stays_symmetric(parallelogram):
    _, orbit, ctx = parallelogram
    y = orbit.samples[97]
    z = lift4(Reduced4(y[0], y[1], ctx.I3, y[2], y[3], 0.0, ctx.mu), 1.0).z
    assert abs(z[0] + z[1]) < 1e-9 and abs(z[2] + z[3]) < 1e-9
