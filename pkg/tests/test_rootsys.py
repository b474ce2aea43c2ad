from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from qorbit.rootsys import GuardError, Involution, build_root_system, fold, weyl_enumerate

# Classical orders and positive-root counts, written from the standard closed forms.
ORDERS = {
    "A1": 2, "A2": 6, "A3": 24, "A4": 120, "B2": 8, "B3": 48, "C3": 48, "B4": 384, "C4": 384,
    "D4": 2 ** 3 * factorial(4), "G2": 12, "F4": 1152, "A1xA1": 4,
}
POSITIVE = {"A3": 6, "B3": 9, "C3": 9, "D4": 12, "G2": 6, "F4": 24, "E6": 36, "E7": 63, "E8": 120}


@pytest.mark.parametrize("label,order", sorted(ORDERS.items()))
def test_weyl_group_orders(label, order):
    rs = build_root_system(label)
    W = weyl_enumerate(rs)
    assert len(W) == order
    assert len(set(W)) == order
    # longest element length equals the number of positive roots
    assert max(len(w.word) for w in W) == len(rs.positive_roots)


@pytest.mark.parametrize("label,count", sorted(POSITIVE.items()))
def test_positive_root_counts(label, count):
    assert len(build_root_system(label).positive_roots) == count


def test_weyl_guard():
    with pytest.raises(GuardError):
        weyl_enumerate(build_root_system("E8"), guard=1000)


def test_cartan_validation():
    with pytest.raises(ValueError):
        build_root_system([[2, -1], [-1]])
    with pytest.raises(ValueError):
        build_root_system([[2, -2], [-2, 2]])  # affine A1, not finite type


def test_involution_must_be_automorphism():
    rs = build_root_system("B3")
    with pytest.raises(ValueError):
        Involution.from_one_based([3, 2, 1]).check_automorphism(rs)
    with pytest.raises(ValueError):
        Involution.from_one_based([2, 3, 1])


FOLDS = [
    ("A3", [3, 2, 1], "C2", False), ("A5", [5, 4, 3, 2, 1], "C3", False),
    ("A2", [2, 1], "BC1", True), ("A4", [4, 3, 2, 1], "BC2", True), ("A6", [6, 5, 4, 3, 2, 1], "BC3", True),
    ("D4", [1, 2, 4, 3], "B3", False), ("D5", [1, 2, 3, 5, 4], "B4", False), ("D6", [1, 2, 3, 4, 6, 5], "B5", False),
    ("E6", [6, 2, 5, 4, 3, 1], "F4", False), ("A1xA1", [2, 1], "A1", False),
]


@pytest.mark.parametrize("label,tau,target,nonred", FOLDS)
def test_folding_table(label, tau, target, nonred):
    fs = fold(build_root_system(label), Involution.from_one_based(tau))
    assert fs.folded_type == target
    assert fs.non_reduced is nonred


def test_trivial_fold_is_identity():
    rs = build_root_system("G2")
    fs = fold(rs, Involution.identity(2))
    assert fs.folded_type == "G2" and not fs.non_reduced and len(fs.group) == 12


LABELS = st.sampled_from(["A3", "B3", "C3", "G2", "D4", "F4"])
small = st.integers(-3, 3).map(Fraction)


@given(LABELS, st.data())
def test_reflections_are_isometries(label, data):
    rs = build_root_system(label)
    x = data.draw(st.tuples(*[small] * rs.rank))
    y = data.draw(st.tuples(*[small] * rs.rank))
    r = data.draw(st.integers(0, rs.rank - 1))
    assert rs.pair(rs.reflect(r, x), rs.reflect(r, y)) == rs.pair(x, y)
    assert rs.reflect(r, rs.reflect(r, x)) == tuple(x)


@given(LABELS, st.data())
def test_group_elements_invert(label, data):
    rs = build_root_system(label)
    W = weyl_enumerate(rs)
    w = data.draw(st.sampled_from(W))
    assert (w * w.inverse()) == rs.identity()
    assert rs.element(w.word) == w


@given(LABELS, st.data())
def test_dominant_conjugate(label, data):
    rs = build_root_system(label)
    x = data.draw(st.tuples(*[small] * rs.rank))
    dom, word = rs.dominant_conjugate(x)
    assert rs.is_dominant(dom)
    assert rs.element(word).act(x) == dom
    assert rs.pair(dom, dom) == rs.pair(x, x)


@given(LABELS)
def test_roots_closed_under_weyl_group(label):
    rs = build_root_system(label)
    roots = set(rs.roots)
    for r in range(rs.rank):
        assert {rs.reflect(r, b) for b in roots} == roots
