from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qorbit.charring import (q_dim, twining_classical, twining_mults, weight_mults, weyl_character_check,
                             weyl_dimension)
from qorbit.rootsys import Involution, build_root_system

# Dimensions of the fundamental representations, as unordered multisets.
FUNDAMENTAL_DIMS = {
    "A3": [4, 6, 4], "B3": [7, 21, 8], "C3": [6, 14, 14], "G2": [7, 14],
    "F4": [26, 52, 273, 1274], "E6": [27, 27, 78, 351, 351, 2925], "D4": [8, 8, 8, 28],
}


@pytest.mark.parametrize("label", sorted(FUNDAMENTAL_DIMS))
def test_fundamental_dimensions(label):
    rs = build_root_system(label)
    dims = [weyl_dimension(rs, rs.varpi(r)) for r in range(rs.rank)]
    assert sorted(dims) == sorted(FUNDAMENTAL_DIMS[label])


def test_adjoint_of_a2():
    rs = build_root_system("A2")
    t = weight_mults(rs, (1, 1))
    assert t.dim() == 8 and t.get((0, 0)) == 2


HW = st.sampled_from(["A2", "B2", "G2", "A3", "C3"]).flatmap(
    lambda lab: st.tuples(st.just(lab), st.lists(st.integers(0, 2), min_size=build_root_system(lab).rank,
                                                 max_size=build_root_system(lab).rank)))


@given(HW)
def test_freudenthal_against_weyl(pair):
    label, hw = pair
    rs = build_root_system(label)
    t = weight_mults(rs, hw)
    assert t.dim() == weyl_dimension(rs, hw)
    assert sum(q_dim(rs, hw, t).terms.values()) == t.dim()  # value at q = 1
    assert weyl_character_check(rs, t)
    for w, m in t.mults.items():
        for r in range(rs.rank):
            assert t.get(rs.reflect(r, w)) == m


@settings(max_examples=15)
@given(HW)
def test_trivial_tau_twining_is_multiplicity(pair):
    label, hw = pair
    rs = build_root_system(label)
    j = twining_mults(rs, Involution.identity(rs.rank), hw)
    m = weight_mults(rs, hw)
    assert {w: v for w, v in j.jvals.items() if v} == m.mults


@pytest.mark.parametrize("a", range(5))
def test_swap_twining_on_a_square(a):
    # trace of the flip on V(a) (x) V(a) at weight (mu, mu) is the multiplicity of mu in V(a), i.e. 1
    rs = build_root_system("A1xA1")
    j = twining_mults(rs, Involution.from_one_based([2, 1]), (a, a))
    expect = {(Fraction(m), Fraction(m)): 1 for m in range(-a, a + 1, 2)}
    assert {w: v for w, v in j.jvals.items() if v} == expect


@pytest.mark.parametrize("label,tau,hw", [
    ("A2", [2, 1], (1, 1)), ("A2", [2, 1], (2, 2)), ("A3", [3, 2, 1], (1, 0, 1)), ("A3", [3, 2, 1], (0, 2, 0)),
    ("A4", [4, 3, 2, 1], (1, 0, 0, 1)), ("A4", [4, 3, 2, 1], (0, 1, 1, 0)),
    ("D4", [1, 2, 4, 3], (1, 0, 0, 0)), ("D4", [1, 2, 4, 3], (0, 0, 1, 1)),
])
def test_division_formula_matches_trace(label, tau, hw):
    rs = build_root_system(label)
    t = Involution.from_one_based(tau)
    a = {w: v for w, v in twining_mults(rs, t, hw).jvals.items() if v}
    b = {w: v for w, v in twining_classical(rs, t, hw).jvals.items() if v}
    assert a == b


def test_twining_needs_fixed_weight():
    rs = build_root_system("A2")
    with pytest.raises(ValueError):
        twining_mults(rs, Involution.from_one_based([2, 1]), (1, 0))
