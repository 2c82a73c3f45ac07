import math

import pytest
from hypothesis import given, strategies as st

from cptsim.analytic import EPS0, analytic_sweep, ideal_pi, main_capacitance
from cptsim.errors import NonPositiveCapacitance, NonPositiveDimension
from cptsim.materials import Material

A = 0.09
pos = st.floats(min_value=1e-4, max_value=10.0, allow_nan=False)


def test_air_10mm(air):
    assert main_capacitance(air, A, 0.01) == pytest.approx(80.16e-12, abs=0.01e-12)
    assert main_capacitance(air, A, 0.01) == EPS0 * 1.0058986 * A / 0.01


def test_water_10mm(water):
    assert main_capacitance(water, A, 0.01) == pytest.approx(6.3829e-9, abs=0.001e-9)


@given(d=pos, eps=st.floats(min_value=1.0, max_value=200.0))
def test_inverse_distance(d, eps):
    m = Material("x", eps)
    assert main_capacitance(m, A, 2 * d) == pytest.approx(main_capacitance(m, A, d) / 2, rel=1e-14)


@given(c=st.floats(min_value=1e-15, max_value=1e-6))
def test_ideal_pi_halves(c):
    p = ideal_pi(c)
    assert p.c_p == p.c_s == p.c_m == c / 2


def test_ideal_pi_examples(air):
    p = ideal_pi(100e-12)
    assert (p.c_p, p.c_s, p.c_m) == pytest.approx((50e-12,) * 3, rel=1e-15)
    assert ideal_pi(main_capacitance(air, A, 0.01)).c_m == pytest.approx(40.08e-12, abs=0.005e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_ideal_pi_rejects(bad):
    with pytest.raises(NonPositiveCapacitance):
        ideal_pi(bad)


@pytest.mark.parametrize("area,d", [(0, 0.01), (A, 0), (A, -0.01), (A, math.nan)])
def test_main_capacitance_rejects(air, area, d):
    with pytest.raises(NonPositiveDimension):
        main_capacitance(air, area, d)


def test_sweep_ratios(air, water, glass):
    ds = [0.001, 0.01, 0.05, 0.2]
    w = analytic_sweep(water, 0.3, ds)
    a = analytic_sweep(air, 0.3, ds)
    for (dw, cw), (da, ca) in zip(w, a):
        assert dw == da
        assert cw / ca == pytest.approx(79.633, abs=1e-3)
    g = analytic_sweep(glass, 0.3, [0.01])[0][1]
    assert g / a[1][1] == pytest.approx(7.555, abs=0.01)


def test_sweep_single_and_errors(air):
    assert analytic_sweep(air, 0.3, [0.01]) == [(0.01, ideal_pi(main_capacitance(air, A, 0.01)).c_m)]
    with pytest.raises(NonPositiveDimension):
        analytic_sweep(air, 0.3, [])
    with pytest.raises(NonPositiveDimension):
        analytic_sweep(air, 0.3, [0.01, -0.01])
