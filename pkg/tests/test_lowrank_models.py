import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qorbit.lowrank_models import (CASES, QVal, classify_hw, disjointness, dot_image, exact_inertia,
                                   family_gamma, family_member, fusion_check, gram_oracle_inertia,
                                   gram_recursion_inertia, h2_model, h2_stratify, in_family,
                                   invariance_residual, relation_residuals, s_n, stratum_minus,
                                   stratum_plus, stratum_zero, verma_gram)

Q = Fraction(1, 2)


def test_qval_exact_comparison():
    assert QVal(Fraction(4), Fraction(2)).cmp_one(Q) == 0
    assert QVal(Fraction(4), Fraction(3)).cmp_one(Q) == -1
    assert QVal(Fraction(9, 8), Fraction(0)).cmp_one(Q) == 1
    # 2^{1/3} q^{1/3} with q = 1/2 is exactly one
    assert QVal(Fraction(2), Fraction(1, 3)).cmp_one(Q) == 1
    assert QVal(Fraction(1, 2), Fraction(-1)).cmp_one(Q) == 0


@given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=10).filter(lambda c: c != 0),
       st.integers(0, 12), st.sampled_from([1, -1]))
def test_stratify_grid_roundtrip(c, n, sgn):
    c = sgn * c
    st_ = h2_stratify(c * c, c * s_n(n, Q), Q)
    assert st_.kind == "S_plus" and st_.n == n and st_.c == c
    assert h2_stratify(c * c, c * s_n(n, Q) * Fraction(101, 100), Q) == "not admissible"


def test_stratify_other_kinds():
    assert h2_stratify(0, 3, Q).kind == "S_zero"
    m = h2_stratify(-4, 3, Q)
    assert m.kind == "S_minus" and m.c == 2 and m.a == 2
    assert stratum_minus(m.c, m.a).t == m.t
    assert h2_stratify(1, 0, Q) == "not admissible"
    with pytest.raises(ValueError):
        h2_stratify(1, 1, Fraction(3, 2))


STRATA = [stratum_plus(Fraction(1), 0, Q), stratum_plus(Fraction(-1, 2), 3, Q), stratum_plus(Fraction(2), 5, Q),
          stratum_zero(Fraction(1)), stratum_zero(Fraction(-3, 2)), stratum_minus(Fraction(1), Fraction(2)),
          stratum_minus(Fraction(1, 3), Fraction(3, 4))]


@pytest.mark.parametrize("s", STRATA, ids=lambda s: s.kind)
def test_model_relations(s):
    blocks = ["+", "-"] if s.kind == "S_minus" else [None]
    for b in blocks:
        ops = h2_model(s, b, 60, Q)
        assert max(relation_residuals(ops, s, Q).values()) < 1e-10
        z = np.diag(ops["z"].matrix)
        assert np.all(np.isfinite(z))


def test_s_plus_spectrum_is_q_string():
    ops = h2_model(stratum_plus(Fraction(1), 3, Q), None, 40, Q)
    z = sorted(np.diag(ops["z"].matrix))
    assert np.allclose(z, sorted(float(Q) ** (2 * j - 3) for j in range(4)))


@pytest.mark.parametrize("s", STRATA, ids=lambda s: s.kind)
def test_invariance_residual(s):
    assert invariance_residual(s, 80, Q, degree=2)["max"] <= 1e-10


@pytest.mark.parametrize("s", STRATA[1:], ids=lambda s: s.kind)
def test_invariance_control(s):
    # the wrong inner action must be visibly non-invariant; S_plus(c, 0) is one-dimensional, hence skipped
    assert invariance_residual(s, 80, Q, degree=2, weight_power=2)["max"] > 1e-3


@pytest.mark.parametrize("s", [STRATA[1], STRATA[3], STRATA[5]], ids=lambda s: s.kind)
def test_fusion_spectra(s):
    for b in (["+", "-"] if s.kind == "S_minus" else [None]):
        r = fusion_check(s, b, 24, 24, Q)
        assert r["max_error"] < 1e-9 and r["kept"] > 0


def test_exact_inertia():
    m = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]]
    assert exact_inertia(m) == (1, 0, 1)
    assert exact_inertia([[Fraction(0), Fraction(0)], [Fraction(0), Fraction(3)]]) == (1, 1, 0)
    assert exact_inertia([]) == (0, 0, 0)


ORACLE_LAMBDAS = st.fractions(min_value=Fraction(1, 16), max_value=16, max_denominator=16).filter(lambda x: x > 0)


@settings(max_examples=30)
@given(st.sampled_from([("A1_H2", 1), ("A1_H2", -1), ("A1xA1", 1), ("A2_twisted", 1), ("A1xA1", Fraction(1, 4))]),
       ORACLE_LAMBDAS | st.sampled_from([Fraction(4), Fraction(16), Fraction(1, 4), Fraction(64)]),
       st.integers(0, 3))
def test_gram_recursion_against_relations(case_eps, lam, level):
    # q = s^2 = 1/4 keeps half-integer exponents rational
    case, eps = case_eps
    s = Fraction(1, 2)
    assert gram_recursion_inertia(case, QVal(lam), eps, s * s, level) == \
        gram_oracle_inertia(case, lam, eps, s, level)


@pytest.mark.parametrize("case", CASES)
def test_family_members_truncate(case):
    for n in range(6):
        rec = verma_gram(case, family_member(case, 1, n), 1, n + 6, Q)
        assert rec.unitarizable and rec.truncation == n + 1


@pytest.mark.parametrize("case", CASES)
def test_off_family_rejected(case):
    for lam in (QVal(Fraction(3)), QVal(Fraction(1, 3), Fraction(1, 5)), QVal(Fraction(7, 5), Fraction(-9, 4))):
        assert in_family(case, 1, lam, Q) is None
        assert not verma_gram(case, lam, 1, 400, Q).unitarizable


def test_classification_kinds():
    assert classify_hw("A1_H2", -1, Q).kind == "all_nonzero"
    assert classify_hw("A1xA1", 0, Q).kind == "all_positive"
    cl = classify_hw("A2_twisted", 1, Q, n_max=4)
    assert cl.kind == "discrete" and cl.verified and len(cl.family) == 5


@pytest.mark.parametrize("case", CASES)
def test_dot_images_leave_family(case):
    assert all(hit is None for _, hit in disjointness(case, 1, Q, 20))


def test_dot_image_closed_forms():
    lam = QVal(Fraction(1), Fraction(-3))
    assert dot_image("A1_H2", 1, lam) == QVal(Fraction(1), Fraction(5))
    assert dot_image("A1xA1", 1, lam) == QVal(Fraction(1), Fraction(5))
    assert dot_image("A2_twisted", 1, lam) == QVal(Fraction(1), Fraction(7))


@pytest.mark.parametrize("case", CASES)
def test_family_gamma_reproduces_member(case):
    from qorbit.lowrank_models import case_datum
    from qorbit.twistdata import WeightFunction
    nu = case_datum(case, 1)
    for n in range(8):
        lam = WeightFunction.q_power(family_gamma(case, n), nu.rs).values[0]
        assert QVal(lam.coef.modulus, lam.exp) == family_member(case, 1, n)
