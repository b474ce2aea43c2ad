from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qorbit.exactmath import (CharElement, LaurentPoly, PolarRational, QMono, char_div, char_mul, exact_root,
                              fmt_frac, laurent_div, laurent_eval, parse_frac)

rats = st.fractions(min_value=-20, max_value=20, max_denominator=12)
nonzero = rats.filter(lambda x: x != 0)
phases = st.fractions(min_value=0, max_value=1, max_denominator=8)
exps = st.integers(-4, 4).map(Fraction) | st.sampled_from([Fraction(1, 2), Fraction(-3, 2)])
polys = st.dictionaries(exps, st.integers(-5, 5), max_size=4).map(LaurentPoly)


def test_fmt_and_parse_roundtrip():
    assert fmt_frac(Fraction(3)) == "3/1"
    assert fmt_frac(Fraction(-2, 6)) == "-1/3"
    assert parse_frac(" -1 / 3 ".replace(" ", "")) == Fraction(-1, 3)


def test_exact_root():
    assert exact_root(Fraction(9, 4), 2) == Fraction(3, 2)
    assert exact_root(Fraction(8, 27), 3) == Fraction(2, 3)
    assert exact_root(Fraction(-1), 2) is None
    assert exact_root(Fraction(2), 2) is None


def test_polar_rational_normalisation():
    assert PolarRational(-2) == PolarRational(2, Fraction(1, 2))
    assert PolarRational(0, Fraction(1, 3)) == PolarRational(0)
    assert PolarRational(1, Fraction(5, 4)).phase == Fraction(1, 4)
    assert PolarRational(-3).to_real() == -3
    with pytest.raises(ValueError):
        PolarRational(1, Fraction(1, 4)).to_real()


@given(nonzero, phases, nonzero, phases)
def test_polar_multiplication_matches_complex(m1, p1, m2, p2):
    a, b = PolarRational(m1, p1), PolarRational(m2, p2)
    assert abs((a * b).to_complex() - a.to_complex() * b.to_complex()) < 1e-9 * (1 + abs(m1 * m2))
    assert a * a.inverse() == PolarRational(1)
    assert (a * b).conj() == a.conj() * b.conj()


@given(polys, polys, polys)
def test_laurent_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a - a == LaurentPoly()


@given(polys, polys, st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)]))
def test_laurent_eval_is_a_ring_map(a, b, q):
    # q = 1/4-power grids keep half-integer exponents exact
    q = q * q
    assert laurent_eval(a * b, q) == laurent_eval(a, q) * laurent_eval(b, q)
    assert laurent_eval(a + b, q) == laurent_eval(a, q) + laurent_eval(b, q)


@given(polys, polys.filter(lambda p: not p.is_zero()))
def test_laurent_division_roundtrip(a, b):
    assert laurent_div(a * b, b) == a


def test_laurent_division_rejects_remainder():
    with pytest.raises(ArithmeticError):
        laurent_div(LaurentPoly({0: 1}), LaurentPoly({0: 1, 1: 1}))


def test_qmono_json_roundtrip():
    m = QMono(PolarRational(Fraction(3, 2), Fraction(1, 2)), Fraction(-5, 2))
    assert QMono.from_json(m.to_json()) == m
    assert (m * m.inverse()) == QMono(1)


weights2 = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
chars2 = st.dictionaries(weights2, st.integers(-3, 3).map(LaurentPoly.const), max_size=4).map(
    lambda d: CharElement(2, d))


@given(chars2, chars2.filter(lambda c: not c.is_zero()))
def test_char_division_roundtrip(a, b):
    key = lambda w: (w[0] + w[1], w[0])
    assert char_div(char_mul(a, b), b, key) == a
