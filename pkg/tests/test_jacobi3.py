from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortex_holonomy.core import PlanarState, Strengths, hamiltonian
from vortex_holonomy.errors import ChartSingularityError, OutOfDomainError
from vortex_holonomy.jacobi3 import (
    ActionAngle3,
    JBHChart,
    JBHCoords,
    Reduced3,
    fold_angles,
    psi,
    psi_inverse,
    squared_sides,
    t1_forward,
    t1_inverse,
    t2_forward,
    t2_inverse,
    t3_forward,
    t3_inverse,
)
from vortex_holonomy.reduced3 import ReducedContext

TABLE = Strengths((7.615, -3.46, -3.155))
UNIT = Strengths((1.0, 1.0, 1.0))


def test_chart_coefficients_table_case():
    chart = JBHChart.build(TABLE, 3)
    # direct arithmetic: G1 G2 / (G1 + G2) and (G1 + G2) G3 / Gtot
    assert chart.A == pytest.approx(7.615 * -3.46 / (7.615 - 3.46), rel=1e-14)
    assert chart.A == pytest.approx(-6.341251504, abs=1e-9)
    assert chart.B == pytest.approx(-13.109025, abs=1e-9)
    assert chart.A * chart.B > 0 and TABLE.w0 > 0


def test_t1_unit_example():
    s = PlanarState.from_complex([0, 1, 1j], UNIT)
    jbh = t1_forward(s, JBHChart.build(UNIT, 3))
    assert jbh.Z0 == pytest.approx((1 + 1j) / 3)
    assert jbh.r == pytest.approx(1.0)
    assert jbh.s == pytest.approx(1j - 0.5)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_chart_ordering_is_cyclic(k):
    chart = JBHChart.build(TABLE, k)
    assert chart.last_vortex == k
    assert (chart.i, chart.j, k) in {(1, 2, 3), (2, 3, 1), (3, 1, 2)}


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
       st.sampled_from([1, 2, 3]))
def test_t1_round_trip(z, k):
    s = PlanarState.from_complex(z, TABLE)
    chart = JBHChart.build(TABLE, k)
    back = t1_inverse(t1_forward(s, chart), chart, TABLE)
    assert np.max(np.abs(back.z - s.z)) < 1e-12 * (1 + np.max(np.abs(s.z)))


def test_t2_positive_coefficient_example():
    chart = JBHChart.build(UNIT, 3)
    aa = t2_forward(JBHCoords(0j, np.sqrt(2) + 0j, 1j), chart, UNIT)
    assert aa.j1 == pytest.approx(chart.A)
    assert aa.theta1 == pytest.approx(0.0)


def test_t2_negative_coefficient_sign_convention():
    chart = JBHChart.build(TABLE, 3)
    aa = t2_forward(JBHCoords(0j, 1.3 + 0.2j, 0.4 - 1j), chart, TABLE)
    assert aa.j1 < 0 and 2 * aa.j1 / chart.A > 0
    back = t2_inverse(aa, chart, TABLE)
    assert back.r == pytest.approx(1.3 + 0.2j) and back.s == pytest.approx(0.4 - 1j)


def test_t2_pullback_of_area_form(rng):
    """``dj1 ^ dtheta1`` pulled back to the ``r`` plane is ``A dx ^ dy``."""
    chart = JBHChart.build(TABLE, 3)
    for _ in range(10):
        r0 = complex(*rng.normal(size=2))
        s0 = complex(*rng.normal(size=2))

        def f(x, y):
            aa = t2_forward(JBHCoords(0j, x + 1j * y, s0), chart, TABLE)
            return np.array([aa.j1, aa.theta1])

        h = 1e-5
        dx = (f(r0.real + h, r0.imag) - f(r0.real - h, r0.imag)) / (2 * h)
        dy = (f(r0.real, r0.imag + h) - f(r0.real, r0.imag - h)) / (2 * h)
        assert dx[0] * dy[1] - dx[1] * dy[0] == pytest.approx(chart.A, rel=1e-8)


def test_t2_singularities():
    chart = JBHChart.build(TABLE, 3)
    with pytest.raises(ChartSingularityError):
        t2_forward(JBHCoords(0j, 0j, 1 + 0j), chart, TABLE)
    with pytest.raises(ChartSingularityError):
        t2_forward(JBHCoords(0j, 1 + 0j, 0j), chart, TABLE)
    with pytest.raises(OutOfDomainError):
        t2_inverse(ActionAngle3(1.0, -1.0, 0.0, 0.0, 0j), chart, TABLE)


def test_t3_examples():
    red = t3_forward(ActionAngle3(0.7, 0.7, 0.4, 0.4, 0j))
    assert red.I1 == pytest.approx(0.0)
    assert red.phi1 == pytest.approx(0.0)
    assert red.mu == pytest.approx(-1.4)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_t3_round_trip(j1, j2, th1, th2):
    aa = ActionAngle3(j1, j2, th1, th2, 0j)
    back = t3_inverse(t3_forward(aa))
    assert back.j1 == pytest.approx(j1, abs=1e-12) and back.j2 == pytest.approx(j2, abs=1e-12)
    assert abs(np.exp(1j * back.theta1) - np.exp(1j * th1)) < 1e-12
    assert abs(np.exp(1j * back.theta2) - np.exp(1j * th2)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_fold_angles_preserves_both_angles(p1, p2):
    f1, f2 = fold_angles(p1, p2)
    assert 0 <= f1 < np.pi
    for a, b in ((f2 - f1, p2 - p1), (f1 + f2, p1 + p2)):
        assert abs(np.exp(1j * a) - np.exp(1j * b)) < 1e-9


@pytest.mark.parametrize("k", [1, 2, 3])
def test_psi_round_trip_and_energy(rng, k):
    chart = JBHChart.build(TABLE, k)
    for _ in range(30):
        s = PlanarState.from_complex(rng.normal(size=3) + 1j * rng.normal(size=3), TABLE)
        red = psi(s, chart)
        Z0 = complex(np.sum(TABLE.array * s.z) / TABLE.gamma_tot)
        assert np.max(np.abs(psi_inverse(red, chart, TABLE, Z0).z - s.z)) < 1e-11
        ctx = ReducedContext(TABLE, red.mu, chart)
        assert ctx.h(red.I1, red.phi1) == pytest.approx(hamiltonian(s), rel=1e-11, abs=1e-11)


def test_squared_sides_scale_with_actions(rng):
    chart = JBHChart.build(TABLE, 3)
    s = PlanarState.from_complex(rng.normal(size=3) + 1j * rng.normal(size=3), TABLE)
    red = psi(s, chart)
    b = squared_sides(red, chart, TABLE).as_array()
    z = s.z
    assert b == pytest.approx([abs(z[1] - z[2]) ** 2, abs(z[2] - z[0]) ** 2, abs(z[0] - z[1]) ** 2], rel=1e-12)
    lam = 2.7
    scaled = squared_sides(Reduced3.make(lam * red.I1, lam * red.I2, red.phi1), chart, TABLE).as_array()
    assert scaled == pytest.approx(lam * b, rel=1e-12)
    turned = squared_sides(Reduced3(red.I1, red.I2, red.phi1, red.phi2 + 0.9, red.mu), chart, TABLE).as_array()
    assert turned == pytest.approx(b, rel=1e-12)


def test_equilateral_identical_reduced_point():
    z = np.exp(2j * np.pi * np.arange(3) / 3)
    chart = JBHChart.build(UNIT, 3)
    red = psi(PlanarState.from_complex(z, UNIT), chart)
    assert red.I1 == pytest.approx(0.0, abs=1e-14)
    b = squared_sides(red, chart, UNIT).as_array()
    assert b == pytest.approx([3.0, 3.0, 3.0], rel=1e-13)
    # s is perpendicular to r, so phi1 sits at pi/4 or 3pi/4 depending on orientation
    assert min(abs(red.phi1 - np.pi / 4), abs(red.phi1 - 3 * np.pi / 4)) < 1e-14
    ctx = ReducedContext(UNIT, red.mu, chart)
    assert np.ptp(ctx.sides(0.0, red.phi1)) < 1e-13
