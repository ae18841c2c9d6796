from fractions import Fraction

import gmpy2
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specbox.potential import (
    Potential,
    evaluate,
    minimum_value,
    outer_turning_point,
    reduce,
    reduced_potential,
    stationary_points,
)
from specbox.precision import make_context

CTX = make_context(40)


def test_quartic_coefficients():
    p = Potential.quartic(1, "0.01")
    assert p.coeffs == ((2, Fraction(-1)), (4, Fraction(1, 100)))


def test_parse_general_polynomial():
    p = Potential.parse("2:-1, 4:0.01, 6:1/1000")
    assert p.coefficient(6) == Fraction(1, 1000)
    assert p.degree == 6


@pytest.mark.parametrize("bad", ["1:1,4:1", "0:1,2:1", "2:1,4:-1", "", "2:x"])
def test_rejects_invalid_potentials(bad):
    with pytest.raises(ValueError):
        Potential.parse(bad)


def test_evaluate_examples():
    assert evaluate(Potential.quartic(1, "0.01"), 0, CTX) == 0
    assert evaluate(Potential.quartic(1, 1), 1, CTX) == 0
    with CTX.local():
        xmin = gmpy2.sqrt(gmpy2.mpfr(50))
        v = evaluate(Potential.quartic(1, "0.01"), xmin, CTX)
        assert abs(v + 25) < gmpy2.mpfr("1e-36")


@given(st.floats(-30, 30, allow_nan=False), st.integers(1, 5), st.integers(1, 200))
def test_evaluate_is_exactly_even(x, k, inv_lam):
    p = Potential.from_coeffs({2: -k, 4: Fraction(1, inv_lam)})
    assert evaluate(p, x, CTX) == evaluate(p, -x, CTX)


def test_stationary_points_of_double_well():
    pts = stationary_points(Potential.quartic(1, "0.01"), CTX)
    assert pts[0] == 0
    with CTX.local():
        assert abs(pts[1] - gmpy2.sqrt(gmpy2.mpfr(50))) < gmpy2.mpfr("1e-35")
    assert minimum_value(Potential.quartic(1, "0.01"), CTX) == pytest.approx(-25)


def test_turning_point_examples():
    assert outer_turning_point(Potential.quartic(1, 1), 0, CTX) == 1
    assert abs(outer_turning_point(Potential.quartic(1, "0.01"), 0, CTX) - 10) < gmpy2.mpfr("1e-35")


def test_turning_point_at_table2_ground_state():
    # closed form: x^2 = (1 + sqrt(1 + 4 lam E)) / (2 lam)
    e = "-6.95073188927955191828148104931"
    with mpmath.workdps(50):
        lam = mpmath.mpf("0.03")
        expected = mpmath.sqrt((1 + mpmath.sqrt(1 + 4 * lam * mpmath.mpf(e))) / (2 * lam))
        expected = mpmath.nstr(expected, 30)
    x = outer_turning_point(Potential.quartic(1, "0.03"), CTX.mpf(e), CTX)
    assert abs(x - CTX.mpf(expected)) < gmpy2.mpfr("1e-28")
    assert str(float(x))[:6] == "4.8430"


def test_turning_point_residual_within_tolerance():
    p = Potential.parse("2:-3,4:0.2,6:0.001")
    e = CTX.mpf("-4.5")
    x = outer_turning_point(p, e, CTX)
    assert abs(evaluate(p, x, CTX) - e) <= CTX.tolerance() * 5


def test_turning_point_at_well_bottom():
    x = outer_turning_point(Potential.quartic(1, "0.01"), -25, CTX)
    assert float(x) == pytest.approx(50**0.5)


def test_turning_point_for_harmonic_well():
    assert outer_turning_point(Potential.from_coeffs({2: 1}), 0, CTX) == 0
    assert abs(outer_turning_point(Potential.from_coeffs({2: 1}), 4, CTX) - 2) < gmpy2.mpfr("1e-35")


def test_turning_point_below_minimum_fails():
    with pytest.raises(ValueError):
        outer_turning_point(Potential.quartic(1, "0.01"), -26, CTX)


@settings(max_examples=40, deadline=None)
@given(st.floats(-24.9, 100), st.floats(0.0, 20))
def test_turning_point_monotone_in_energy(e, de):
    p = Potential.quartic(1, "0.01")
    assert outer_turning_point(p, e, CTX) <= outer_turning_point(p, e + de, CTX)


def test_reduce_identity():
    sm = reduce(1, "0.03", CTX)
    assert sm.beta == CTX.mpf("0.03")
    assert sm.energy_factor == 1 and sm.length_factor == 1


def test_reduce_k4():
    sm = reduce(4, "0.08", CTX)
    with CTX.local():
        assert abs(sm.beta - CTX.mpf("0.01")) < gmpy2.mpfr("1e-40")
        assert sm.energy_factor == 2
        assert abs(sm.length_factor - gmpy2.root(gmpy2.mpfr(4), 4) ** -1) < gmpy2.mpfr("1e-40")
    assert reduced_potential(sm) == Potential.quartic(1, "0.01")


@pytest.mark.parametrize("k, lam", [(0, 1), (-1, 1), (1, 0), (1, "-0.1")])
def test_reduce_rejects_nonpositive(k, lam):
    with pytest.raises(ValueError):
        reduce(k, lam, CTX)


@given(st.integers(1, 400).map(lambda i: Fraction(i, 37)),
       st.integers(1, 400).map(lambda i: Fraction(i, 1000)))
def test_scaling_round_trip(k, lam):
    with CTX.local():
        sm = reduce(k, lam, CTX)
        assert sm.energy_factor**2 * sm.length_factor**4 == pytest.approx(1, abs=1e-35) or \
            abs(sm.energy_factor**2 * sm.length_factor**4 - 1) < gmpy2.mpfr("1e-35")
        k_back = sm.energy_factor**2
        lam_back = sm.beta * k_back * sm.energy_factor
        assert abs(k_back - CTX.mpf(k)) <= abs(CTX.mpf(k)) * gmpy2.mpfr("1e-38")
        assert abs(lam_back - CTX.mpf(lam)) <= abs(CTX.mpf(lam)) * gmpy2.mpfr("1e-38")
