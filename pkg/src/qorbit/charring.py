"""Weight multiplicities, q-dimensions, Weyl characters and twining multiplicities."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exactmath import CharElement, LaurentPoly, char_div, char_mul
from .rootsys import GuardError, Involution, RootSystem, Weight, fold, vadd, vec, vscale, vsub
from .twistdata import NuGroup

DIM_GUARD = 10 ** 6


@dataclass
class MultTable:
    highest: Weight
    mults: Dict[Weight, int]

    def dim(self) -> int:
        return sum(self.mults.values())

    def get(self, w) -> int:
        return self.mults.get(vec(w), 0)


@dataclass
class TwiningTable:
    highest: Weight
    jvals: Dict[Weight, int]

    def get(self, w) -> int:
        return self.jvals.get(vec(w), 0)


def weyl_dimension(rs: RootSystem, hw: Sequence) -> int:
    lr = vadd(vec(hw), rs.rho)
    num, den = Fraction(1), Fraction(1)
    for a in rs.positive_roots:
        num *= rs.pair(lr, a)
        den *= rs.pair(rs.rho, a)
    d = num / den
    assert d.denominator == 1
    return int(d)


def _check_dominant(rs: RootSystem, hw: Sequence) -> Weight:
    hw = vec(hw)
    if len(hw) != rs.rank:
        raise ValueError("weight has the wrong length")
    if not rs.in_P(hw) or not rs.is_dominant(hw):
        raise ValueError("highest weight must be dominant integral")
    return hw


def weight_mults(rs: RootSystem, hw: Sequence, guard: int = DIM_GUARD) -> MultTable:
    """Freudenthal recursion over dominant weights, extended by W-invariance."""
    hw = _check_dominant(rs, hw)
    if weyl_dimension(rs, hw) > guard:
        raise GuardError(f"dimension exceeds guard {guard}")
    # the weight set is saturated, so simple-root steps from hw reach all of it
    seen = {hw}
    stack = [hw]
    while stack:
        mu = stack.pop()
        for r in range(rs.rank):
            nu = vsub(mu, rs.alpha(r))
            if nu in seen:
                continue
            d, _ = rs.dominant_conjugate(nu)
            diff = rs.to_alpha(vsub(hw, d))
            if all(x >= 0 for x in diff):
                seen.add(nu)
                stack.append(nu)
    dom = {m for m in seen if rs.is_dominant(m)}
    order = sorted(dom, key=lambda m: rs.height(vsub(hw, m)))
    lr = vadd(hw, rs.rho)
    norm_top = rs.pair(lr, lr)
    dm: Dict[Weight, int] = {}

    def m_of(w: Weight) -> int:
        d, _ = rs.dominant_conjugate(w)
        return dm.get(d, 0)

    for mu in order:
        if mu == hw:
            dm[mu] = 1
            continue
        acc = Fraction(0)
        for a in rs.positive_roots:
            k = 1
            while True:
                nu = vadd(mu, vscale(k, a))
                diff = rs.to_alpha(vsub(hw, nu))
                if any(x < 0 for x in diff):
                    break
                mv = m_of(nu)
                if mv:
                    acc += mv * rs.pair(nu, a)
                k += 1
        mr = vadd(mu, rs.rho)
        den = norm_top - rs.pair(mr, mr)
        val = 2 * acc / den
        assert val.denominator == 1 and val >= 0
        dm[mu] = int(val)
    mults: Dict[Weight, int] = {}
    W = rs.weyl_group()
    for mu, m in dm.items():
        if m == 0:
            continue
        for w in W:
            mults[w.act(mu)] = m
    return MultTable(hw, mults)


def q_dim(rs: RootSystem, hw: Sequence, table: Optional[MultTable] = None) -> LaurentPoly:
    table = table or weight_mults(rs, hw)
    two_rho = vscale(2, rs.rho)
    terms: Dict[Fraction, Fraction] = defaultdict(Fraction)
    for w, m in table.mults.items():
        terms[rs.pair(two_rho, w)] += m
    return LaurentPoly(terms)


def character(table: MultTable) -> CharElement:
    return CharElement(len(table.highest), {w: m for w, m in table.mults.items()})


def weyl_numerator(rs: RootSystem, hw: Sequence) -> CharElement:
    lr = vadd(vec(hw), rs.rho)
    terms: Dict[Weight, int] = defaultdict(int)
    for w in rs.weyl_group():
        terms[w.act(lr)] += 1 if len(w.word) % 2 == 0 else -1
    return CharElement(rs.rank, terms)


def weyl_character_check(rs: RootSystem, table: MultTable) -> bool:
    return char_mul(character(table), weyl_numerator(rs, [0] * rs.rank)) == weyl_numerator(rs, table.highest)


# ---------------------------------------------------------------- twining: division side

def tau_fixed_group(rs: RootSystem, tau: Involution) -> NuGroup:
    fs = fold(rs, tau)
    return NuGroup.generate(rs, list(enumerate(fs.generators)))


def _class_coords(fs, w: Weight) -> Weight:
    return tuple(w[c[0]] for c in fs.classes)


def _from_class_coords(fs, rank: int, c: Sequence) -> Weight:
    out = [Fraction(0)] * rank
    for i, cl in enumerate(fs.classes):
        for s in cl:
            out[s] = Fraction(c[i])
    return tuple(out)


def twining_mults(rs: RootSystem, tau: Involution, hw: Sequence) -> TwiningTable:
    """sum_{W^tau} hsgn e^{w(hw+rho)} / sum_{W^tau} hsgn e^{w rho}, over the tau-fixed lattice."""
    hw = _check_dominant(rs, hw)
    if not tau.is_fixed_weight(hw):
        raise ValueError("highest weight is not tau-fixed")
    fs = fold(rs, tau)
    G = tau_fixed_group(rs, tau)
    k = len(fs.classes)
    two_rho = vscale(2, rs.rho)

    def alt(v: Weight) -> CharElement:
        t: Dict[Weight, int] = defaultdict(int)
        for w in G:
            t[_class_coords(fs, w.act(v))] += G.hsgn(w)
        return CharElement(k, t)

    def key(c: Weight) -> tuple:
        return (rs.pair(two_rho, _from_class_coords(fs, rs.rank, c)), c)

    num = alt(vadd(hw, rs.rho))
    den = alt(rs.rho)
    floor = (-rs.pair(two_rho, hw),)
    quot = char_div(num, den, key, floor)
    jv: Dict[Weight, int] = {}
    for c, p in quot.terms.items():
        if len(p.terms) != 1 or 0 not in p.terms or p.terms[0].denominator != 1:
            raise ArithmeticError("twining quotient has non-integer coefficients")
        jv[_from_class_coords(fs, rs.rank, c)] = int(p.terms[0])
    return TwiningTable(hw, jv)


# ---------------------------------------------------------------- twining: classical oracle

def _rank_and_reduce(vectors: List[List[Fraction]]) -> List[int]:
    """Indices of a maximal independent subset (greedy, in order)."""
    basis: List[Tuple[int, List[Fraction]]] = []  # (pivot, reduced row)
    chosen = []
    for idx, v in enumerate(vectors):
        v = list(v)
        for piv, row in basis:
            if v[piv] != 0:
                f = v[piv] / row[piv]
                v = [x - f * y for x, y in zip(v, row)]
        piv = next((i for i, x in enumerate(v) if x != 0), None)
        if piv is not None:
            basis.append((piv, v))
            chosen.append(idx)
    return chosen


def _solve_columns(cols: List[List[Fraction]], target: List[Fraction]) -> List[Fraction]:
    from .rootsys import solve_exact
    n = len(cols)
    if n == 0:
        if any(x != 0 for x in target):
            raise ArithmeticError("vector outside span")
        return []
    rows = [[cols[j][i] for j in range(n)] for i in range(len(target))]
    sol = solve_exact(rows, target)
    if sol is None:
        raise ArithmeticError("vector outside span")
    return sol


class ClassicalModule:
    """V_hw at q = 1 built from a highest weight vector by lowering operators.

    A vector of weight mu != hw is identified by its images under all e_s; the
    irreducible module has no other singular vectors, so this identification is faithful.
    """

    def __init__(self, rs: RootSystem, hw: Sequence):
        self.rs = rs
        self.hw = _check_dominant(rs, hw)
        table = weight_mults(rs, self.hw)
        self.mults = table.mults
        n = rs.rank
        self.basis_src: Dict[Weight, List[Tuple[int, int]]] = {}  # b = f_r (basis vector idx of mu+alpha_r)
        self.F: Dict[Tuple[Weight, int], List[List[Fraction]]] = {}  # F[(nu, r)]: columns per basis vec of nu
        self.E: Dict[Tuple[Weight, int], List[List[Fraction]]] = {}  # E[(mu, s)]: columns per basis vec of mu
        order = sorted(self.mults, key=lambda m: rs.height(vsub(self.hw, m)))
        self.order = order
        self.basis_src[self.hw] = [(-1, -1)]
        for s in range(n):
            self.E[(self.hw, s)] = [[]]
        for mu in order[1:]:
            cands: List[Tuple[int, int]] = []
            images: List[List[Fraction]] = []
            for r in range(n):
                up = vadd(mu, rs.alpha(r))
                if up not in self.mults:
                    continue
                for b in range(self.mults[up]):
                    cands.append((r, b))
                    images.append(self._e_image_of_fr(mu, r, up, b))
            chosen = _rank_and_reduce(images)
            if len(chosen) != self.mults[mu]:
                raise ArithmeticError(f"weight space {mu} has dimension {len(chosen)}, expected {self.mults[mu]}")
            self.basis_src[mu] = [cands[i] for i in chosen]
            basis_imgs = [images[i] for i in chosen]
            # split images per s into E matrices
            for s in range(n):
                tgt = vadd(mu, rs.alpha(s))
                dim_t = self.mults.get(tgt, 0)
                off = self._offset(mu, s)
                self.E[(mu, s)] = [img[off:off + dim_t] for img in basis_imgs]
            # F columns: coordinates of f_r b in basis of mu
            for r in range(n):
                up = vadd(mu, rs.alpha(r))
                if up not in self.mults:
                    continue
                cols = []
                for b in range(self.mults[up]):
                    i = cands.index((r, b))
                    cols.append(_solve_columns(basis_imgs, images[i]))
                self.F[(up, r)] = cols

    def _offset(self, mu: Weight, s: int) -> int:
        off = 0
        for t in range(s):
            off += self.mults.get(vadd(mu, self.rs.alpha(t)), 0)
        return off

    def _apply_F(self, nu: Weight, r: int, v: List[Fraction]) -> List[Fraction]:
        tgt = vsub(nu, self.rs.alpha(r))
        dim_t = self.mults.get(tgt, 0)
        if dim_t == 0:
            return []
        cols = self.F[(nu, r)]
        return [sum((cols[j][i] * v[j] for j in range(len(v))), Fraction(0)) for i in range(dim_t)]

    def _apply_E(self, mu: Weight, s: int, v: List[Fraction]) -> List[Fraction]:
        tgt = vadd(mu, self.rs.alpha(s))
        dim_t = self.mults.get(tgt, 0)
        if dim_t == 0:
            return []
        cols = self.E[(mu, s)]
        return [sum((cols[j][i] * v[j] for j in range(len(v))), Fraction(0)) for i in range(dim_t)]

    def _e_image_of_fr(self, mu: Weight, r: int, up: Weight, b: int) -> List[Fraction]:
        """(e_s (f_r b))_s for b the b-th basis vector of weight up = mu + alpha_r."""
        rs = self.rs
        unit = [Fraction(int(i == b)) for i in range(self.mults[up])]
        out: List[Fraction] = []
        for s in range(rs.rank):
            tgt = vadd(mu, rs.alpha(s))
            dim_t = self.mults.get(tgt, 0)
            if dim_t == 0:
                continue
            # e_s f_r b = f_r e_s b + delta_rs <up, alpha_r^vee> b
            es_b = self._apply_E(up, s, unit)
            v = self._apply_F(vadd(up, rs.alpha(s)), r, es_b) if es_b else [Fraction(0)] * dim_t
            if not v:
                v = [Fraction(0)] * dim_t
            if r == s:
                v = [x + up[r] * y for x, y in zip(v, unit)]
            out.extend(v)
        return out

    def twining(self, tau: Involution) -> Dict[Weight, int]:
        """Trace of J (J xi = xi, J f_r = f_{tau r} J) on each tau-fixed weight space."""
        if not tau.is_fixed_weight(self.hw):
            raise ValueError("highest weight is not tau-fixed")
        Jm: Dict[Weight, List[List[Fraction]]] = {self.hw: [[Fraction(1)]]}
        for mu in self.order[1:]:
            tmu = tau.act(mu)
            cols = []
            for r, b in self.basis_src[mu]:
                up = vadd(mu, self.rs.alpha(r))
                jb = Jm[up][b]  # J(b) in basis of tau(up)
                cols.append(self._apply_F(tau.act(up), tau(r), jb))
            Jm[mu] = cols
        out = {}
        for mu in self.order:
            if tau.is_fixed_weight(mu):
                cols = Jm[mu]
                tr = sum((cols[i][i] for i in range(len(cols))), Fraction(0))
                out[mu] = int(tr)
        return out


def twining_classical(rs: RootSystem, tau: Involution, hw: Sequence) -> TwiningTable:
    mod = ClassicalModule(rs, hw)
    return TwiningTable(vec(hw), {w: j for w, j in mod.twining(tau).items() if j != 0})


def tau_fixed_dominant(rs: RootSystem, tau: Involution, bound: int) -> List[Weight]:
    """tau-fixed dominant weights with (varpi, theta^vee) <= bound, per connected component."""
    from itertools import product
    from .rootsys import components
    comps = components(rs.cartan)
    thetas = []
    for comp in comps:
        best = max((b for b in rs.positive_roots_alpha if all(b[s] == 0 for s in range(rs.rank) if s not in comp)),
                   key=sum)
        thetas.append(rs.from_alpha(best))
    out = []
    ranges = [range(bound + 1) for _ in range(rs.rank)]
    for c in product(*ranges):
        w = vec(c)
        if not tau.is_fixed_weight(w):
            continue
        if all(rs.coroot_pairing(w, th) <= bound for th in thetas):
            out.append(w)
    return out
