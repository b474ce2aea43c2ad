"""Twisting data (tau, eps), their flags, Weyl actions, compact roots and W_nu^-/W_nu^+."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .exactmath import ONE, PolarRational, QMono, exact_root
from .rootsys import (FoldedSystem, GuardError, Involution, RootSystem, Weight, WeylElement,
                      WEYL_GUARD, fold, generate_group, identity, matmul, plus_part, vadd, vec, vscale, vsub)

Number = Union[int, Fraction, str]


def _polar(x) -> PolarRational:
    if isinstance(x, PolarRational):
        return x
    if isinstance(x, dict):
        return PolarRational.from_json(x)
    return PolarRational(Fraction(x))


@dataclass(frozen=True)
class DatumFlags:
    regular: bool
    positive: bool
    strongly_positive: bool
    symmetric_pair: bool
    gauge: bool
    ungauged: bool
    reduced: bool
    strongly_reduced: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


class TwistingDatum:
    """nu = (tau, eps) on a root system; eps_{tau r} = conj(eps_r)."""

    def __init__(self, rs: RootSystem, tau: Optional[Involution], eps: Sequence):
        tau = Involution.identity(rs.rank) if tau is None else tau
        tau.check_automorphism(rs)
        e = tuple(_polar(x) for x in eps)
        if len(e) != rs.rank:
            raise ValueError("eps must have one entry per node")
        for r in range(rs.rank):
            if e[tau(r)] != e[r].conj():
                raise ValueError(f"eps is not tau-conjugate symmetric at node {r + 1}")
        self.rs = rs
        self.tau = tau
        self.eps: Tuple[PolarRational, ...] = e
        self.J: Tuple[int, ...] = tuple(r for r in range(rs.rank) if not e[r].is_zero())

    def __eq__(self, other) -> bool:
        return (isinstance(other, TwistingDatum) and self.rs.cartan == other.rs.cartan
                and self.tau == other.tau and self.eps == other.eps)

    def __hash__(self) -> int:
        return hash((self.rs.cartan, self.tau, self.eps))

    def __repr__(self) -> str:
        return f"TwistingDatum({self.rs.label}, tau={self.tau.perm}, eps={list(self.eps)})"

    def with_eps(self, eps: Sequence) -> "TwistingDatum":
        return TwistingDatum(self.rs, self.tau, eps)

    def is_ungauged(self) -> bool:
        return all(self.eps[r].sign() >= 0 and self.eps[r].is_real() for r in self.tau.star)

    def require_ungauged(self) -> None:
        if not self.is_ungauged():
            raise ValueError("gauged input: eps must be real and >= 0 on I^*")

    @property
    def real_eps(self) -> Tuple[Fraction, ...]:
        self.require_ungauged()
        return tuple(x.to_real() for x in self.eps)

    @property
    def J_fixed(self) -> Tuple[int, ...]:
        return tuple(r for r in self.J if self.tau(r) == r)

    def to_json(self) -> dict:
        return {"type": self.rs.label, "tau": [p + 1 for p in self.tau.perm],
                "eps": [x.to_json() for x in self.eps]}

    # ------------------------------------------------------------ derived data

    @cached_property
    def folded(self) -> FoldedSystem:
        return fold(self.rs, self.tau)

    @cached_property
    def J_classes(self) -> Tuple[int, ...]:
        """Indices of folded classes contained in J."""
        fs = self.folded
        return tuple(i for i, c in enumerate(fs.classes) if all(s in self.J for s in c))

    @cached_property
    def weyl(self) -> "NuGroup":
        # W_nu only depends on (A, tau, J), so data differing in eps values share it
        key = (self.rs.cartan, self.tau.perm, self.J_classes)
        if key not in _NU_GROUPS:
            fs = self.folded
            gens = [(i, fs.generators[i]) for i in self.J_classes]
            _NU_GROUPS[key] = NuGroup.generate(self.rs, gens)
        return _NU_GROUPS[key]


_NU_GROUPS: Dict[tuple, "NuGroup"] = {}


def make_datum(rs: RootSystem, tau: Optional[Involution], eps: Sequence) -> TwistingDatum:
    return TwistingDatum(rs, tau, eps)


# ---------------------------------------------------------------- W_nu

class NuGroup:
    """A subgroup of W^tau given by lifted folded generators, with folded word lengths."""

    def __init__(self, rs: RootSystem, elements: List[WeylElement], fwords: Dict, gens):
        self.rs = rs
        self.elements = elements
        self.fwords = fwords
        self.gens = gens
        self._index = {w.matrix: w for w in elements}

    @classmethod
    def generate(cls, rs: RootSystem, gens: Sequence[Tuple[int, WeylElement]],
                 guard: int = WEYL_GUARD) -> "NuGroup":
        e = WeylElement((), identity(rs.rank))
        fwords = {e.matrix: ()}
        order = [e]
        queue = deque([e])
        while queue:
            w = queue.popleft()
            for i, g in gens:
                m = matmul(g.matrix, w.matrix)
                if m not in fwords:
                    x = WeylElement(g.word + w.word, m)
                    fwords[m] = (i,) + fwords[w.matrix]
                    order.append(x)
                    if len(order) > guard:
                        raise GuardError(f"|W_nu| exceeds guard {guard}")
                    queue.append(x)
        return cls(rs, order, fwords, list(gens))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, w: WeylElement) -> bool:
        return w.matrix in self._index

    def lookup(self, matrix) -> Optional[WeylElement]:
        return self._index.get(matrix)

    def hsgn(self, w: WeylElement) -> int:
        """Sign character of the folded Weyl group: -1 on every folded generator."""
        return -1 if len(self.fwords[w.matrix]) % 2 else 1


# ---------------------------------------------------------------- eps extensions

def eps_eval(nu: TwistingDatum, omega: Sequence, lattice: str = "Q") -> PolarRational:
    """eps_Q (lattice 'Q') or eps_P (lattice 'P') on the monoid with off-support coordinates >= 0."""
    rs = nu.rs
    omega = vec(omega)
    if lattice.upper() == "Q":
        coords = rs.to_alpha(omega)
    elif lattice.upper() == "P":
        coords = omega
    else:
        raise ValueError("lattice must be 'Q' or 'P'")
    if any(c.denominator != 1 for c in coords):
        raise ValueError(f"weight not in {lattice.upper()}")
    out = ONE
    zero = False
    for r, c in enumerate(coords):
        c = int(c)
        if nu.eps[r].is_zero():
            if c < 0:
                raise ValueError("weight outside the allowed monoid: negative coordinate off the support")
            if c > 0:
                zero = True
        elif c:
            out = out * nu.eps[r] ** c
    return PolarRational(0) if zero else out


def eps_Q(nu: TwistingDatum, omega: Sequence) -> PolarRational:
    return eps_eval(nu, omega, "Q")


def act_on_eps(nu: TwistingDatum, w: WeylElement) -> TwistingDatum:
    """(w eps)_r = eps_Q(w^{-1} alpha_r)."""
    winv = w.inverse()
    return nu.with_eps([eps_Q(nu, winv.act(nu.rs.alpha(r))) for r in range(nu.rs.rank)])


# ---------------------------------------------------------------- flags

def tau_components(nu: TwistingDatum, nodes: Sequence[int]) -> List[List[int]]:
    nodes = set(nodes)
    out = []
    while nodes:
        start = min(nodes)
        comp, todo = [], [start]
        nodes.discard(start)
        while todo:
            r = todo.pop()
            comp.append(r)
            for s in list(nodes):
                if nu.rs.cartan[r][s] != 0 or nu.tau(r) == s:
                    nodes.discard(s)
                    todo.append(s)
        out.append(sorted(comp))
    return out


def classify(nu: TwistingDatum) -> DatumFlags:
    eps, tau, n = nu.eps, nu.tau, nu.rs.rank
    fixed, star = tau.fixed, tau.star
    regular = len(nu.J) == n
    positive = regular and all(eps[r].sign() == 1 for r in fixed)
    strongly_positive = all(eps[r].sign() == 1 for r in range(n))
    symmetric_pair = all(eps[r].modulus == 1 for r in range(n))
    gauge = all(eps[r] == ONE for r in fixed) and all(eps[r].modulus == 1 for r in star)
    ungauged = nu.is_ungauged()
    reduced = (all(eps[r] in (ONE, PolarRational(0), PolarRational(-1)) for r in fixed)
               and all(eps[r] in (ONE, PolarRational(0)) for r in star))
    strongly_reduced = reduced and all(
        sum(1 for r in comp if tau(r) == r and eps[r] == PolarRational(-1)) <= 1
        for comp in tau_components(nu, nu.J))
    return DatumFlags(regular, positive, strongly_positive, symmetric_pair, gauge, ungauged,
                      reduced, strongly_reduced)


# ---------------------------------------------------------------- weight functions

class WeightFunction:
    """lambda in H_tau^x: per-node value u_r * q^{c_r} (u_r a PolarRational)."""

    def __init__(self, values: Sequence):
        vals = []
        for v in values:
            if isinstance(v, QMono):
                vals.append(v)
            elif isinstance(v, PolarRational):
                vals.append(QMono(v, 0))
            elif isinstance(v, dict):
                vals.append(QMono.from_json(v))
            else:
                vals.append(QMono(PolarRational(Fraction(v)), 0))
        if any(v.is_zero() for v in vals):
            raise ValueError("weight function values must be nonzero")
        self.values: Tuple[QMono, ...] = tuple(vals)

    @classmethod
    def q_power(cls, gamma: Sequence, rs: RootSystem) -> "WeightFunction":
        """lambda = q^{2 gamma}: lambda_r = q^{2 (gamma, varpi_r)}."""
        g = vec(gamma)
        return cls([QMono(1, 2 * rs.pair(g, rs.varpi(r))) for r in range(rs.rank)])

    def check_tau(self, tau: Involution) -> None:
        for r in range(len(self.values)):
            if self.values[tau(r)] != self.values[r].conj():
                raise ValueError("weight function is not tau-conjugate symmetric")

    def at(self, omega: Sequence) -> QMono:
        """lambda_P(omega) for omega in P."""
        out = QMono(1, 0)
        for r, c in enumerate(vec(omega)):
            if c.denominator != 1:
                raise ValueError("weight not in P")
            if c:
                out = out * self.values[r] ** int(c)
        return out

    def is_positive(self) -> bool:
        return all(v.coef.phase == 0 for v in self.values)

    def __mul__(self, other: "WeightFunction") -> "WeightFunction":
        return WeightFunction([a * b for a, b in zip(self.values, other.values)])

    def __truediv__(self, other: "WeightFunction") -> "WeightFunction":
        return WeightFunction([a / b for a, b in zip(self.values, other.values)])

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightFunction) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"WeightFunction({list(self.values)})"

    def to_json(self) -> list:
        return [v.to_json() for v in self.values]


def dot(w: WeylElement, nu: TwistingDatum, lam: WeightFunction, deformed: bool = False,
        q=None) -> WeightFunction:
    """(w . lam)_P(omega) = eps_Q(omega - w^{-1} omega) lam_P(w^{-1} omega), times q^{(2 rho, ...)} if deformed.

    q stays symbolic in the returned exponents; the argument is accepted for interface symmetry.
    """
    nu.require_ungauged()
    if w not in nu.weyl:
        raise ValueError("w is not in W_nu")
    rs = nu.rs
    winv = w.inverse()
    vals = []
    for r in range(rs.rank):
        v = rs.varpi(r)
        wv = winv.act(v)
        diff = vsub(v, wv)
        e = eps_Q(nu, diff)
        if e.is_zero():
            raise ValueError("dot action hits a zero eps value")
        val = QMono(e, 0) * lam.at(wv)
        if deformed:
            val = val * QMono(1, rs.pair(vscale(2, rs.rho), diff))
        vals.append(val)
    return WeightFunction(vals)


# ---------------------------------------------------------------- sign characters

def sign_character(nu: TwistingDatum, w: WeylElement) -> Tuple[int, ...]:
    """Per folded class: sgn eps_Q(varpi_r - w^{-1} varpi_r) at the class representative r."""
    nu.require_ungauged()
    rs = nu.rs
    winv = w.inverse()
    out = []
    for c in nu.folded.classes:
        r = c[0]
        v = rs.varpi(r)
        s = eps_Q(nu, vsub(v, winv.act(v))).sign()
        if s == 0:
            raise ValueError("sign character undefined: zero eps value")
        out.append(s)
    return tuple(out)


def enumerate_w_minus(nu: TwistingDatum, guard: int = WEYL_GUARD) -> List[Tuple[WeylElement, Tuple[int, ...]]]:
    """W_nu^-: words in tau-fixed simple reflections of J, each step changing the sign character."""
    nu.require_ungauged()
    if not classify(nu).reduced:
        raise ValueError("W_nu^- requires a reduced twisting datum")
    rs = nu.rs
    e = rs.identity()
    found = {e.matrix: (e, sign_character(nu, e))}
    order = [e.matrix]
    queue = deque([e])
    gens = [rs.simple_reflection(r) for r in nu.J_fixed]
    while queue:
        w = queue.popleft()
        sw = found[w.matrix][1]
        for g in gens:
            x = g * w
            if x.matrix in found:
                continue
            sx = sign_character(nu, x)
            if sx != sw:
                found[x.matrix] = (x, sx)
                order.append(x.matrix)
                if len(order) > guard:
                    raise GuardError("W_nu^- enumeration exceeds guard")
                queue.append(x)
    return [found[m] for m in order]


# ---------------------------------------------------------------- compact roots

@dataclass
class CompactData:
    roots: List[Weight]            # all compact folded roots (both signs)
    positive: List[Weight]
    positive_coords: List[Tuple[int, ...]]
    simple: List[Weight]
    reflections: List[WeylElement]  # lifts of the simple compact reflections
    group: List[WeylElement]        # W_nu^+


def _restricted_basis(nu: TwistingDatum) -> List[Weight]:
    rs = nu.rs
    return [plus_part(nu.tau, rs.varpi(c[0])) for c in nu.folded.classes]


def lift_reflection(nu: TwistingDatum, beta: Weight) -> WeylElement:
    """The element of W_nu restricting on V^tau to the reflection in beta."""
    rs = nu.rs
    basis = _restricted_basis(nu)
    bb = rs.pair(beta, beta)
    target = tuple(vsub(b, vscale(2 * rs.pair(b, beta) / bb, beta)) for b in basis)
    for w in nu.weyl:
        if all(w.act(b) == t for b, t in zip(basis, target)):
            return w
    raise ValueError("reflection does not lift to W_nu")


def is_compact(nu: TwistingDatum, coords: Sequence[int]) -> bool:
    """coords: folded root coordinates m_rhat (all >= 0 or all <= 0)."""
    fs = nu.folded
    eps = nu.real_eps
    if any(m != 0 and i not in nu.J_classes for i, m in enumerate(coords)):
        return False
    sign = 1
    for i, c in enumerate(fs.classes):
        m = coords[i]
        if len(c) == 1:
            if eps[c[0]] < 0 and m % 2:
                sign = -sign
        elif m % 2:
            return True
    return sign > 0


def compact_roots(nu: TwistingDatum) -> CompactData:
    nu.require_ungauged()
    fs = nu.folded
    rs = nu.rs
    pos, pcoords = [], []
    for beta, m in zip(fs.roots, fs.roots_coords):
        if is_compact(nu, m):
            pos.append(beta)
            pcoords.append(m)
    pset = set(pos)
    simple = [b for b in pos if not any(vsub(b, a) in pset for a in pos)]
    refl = [lift_reflection(nu, b) for b in simple]
    group = generate_group(refl, rs.rank)
    allroots = pos + [vscale(-1, b) for b in pos]
    return CompactData(allroots, pos, pcoords, simple, refl, group)


def w_plus(nu: TwistingDatum) -> List[WeylElement]:
    return compact_roots(nu).group


# ---------------------------------------------------------------- strong reduction

def _reduce_scaling(nu: TwistingDatum) -> Tuple[TwistingDatum, Tuple[Fraction, ...]]:
    eps = nu.real_eps
    f = tuple(Fraction(1) if e == 0 else 1 / abs(e) for e in eps)
    return nu.with_eps([e * s for e, s in zip(eps, f)]), f


def strongly_reduce(nu: TwistingDatum) -> Tuple[TwistingDatum, WeylElement, Tuple[Fraction, ...]]:
    """Return (nu', w, f) with nu' strongly reduced and eps' = f * (w eps), f > 0, w in W_nu^-."""
    nu.require_ungauged()
    wminus = [w for w, _ in enumerate_w_minus(_reduce_scaling(nu)[0])]
    # length-lex order over W_nu^-: shortest words first, ties by word
    for w in sorted(wminus, key=lambda x: (len(x.word), x.word)):
        moved = act_on_eps(nu, w)
        red, f = _reduce_scaling(moved)
        if classify(red).strongly_reduced:
            return red, w, f
    # W_nu^- always suffices in the cases we know; fall back to all of W_nu regardless
    for w in sorted(nu.weyl, key=lambda x: (len(x.word), x.word)):
        red, f = _reduce_scaling(act_on_eps(nu, w))
        if classify(red).strongly_reduced:
            return red, w, f
    raise RuntimeError("no strongly reduced representative found in W_nu")


# ---------------------------------------------------------------- gauge transport

def lattice_exponent(rs: RootSystem) -> int:
    """Smallest N with N P contained in Q."""
    n = 1
    for r in range(rs.rank):
        for x in rs.to_alpha(rs.varpi(r)):
            n = n * x.denominator // math.gcd(n, x.denominator)
    return n


def gauge_transport(nu: TwistingDatum, nu2: TwistingDatum, w: WeylElement) -> List[Union[Fraction, float]]:
    """Real character f on P (values f_P(varpi_r)) with eps'_r = f_P(alpha_r) eps_r and
    f_P(omega) eps_Q(omega - w^{-1} omega) > 0 on P."""
    nu.require_ungauged()
    nu2.require_ungauged()
    if w not in nu.weyl:
        raise ValueError("w is not in W_nu")
    rs = nu.rs
    moved = act_on_eps(nu, w).real_eps
    e2 = nu2.real_eps
    lam = []
    for r in range(rs.rank):
        if moved[r] == 0 and e2[r] == 0:
            lam.append(Fraction(1))
            continue
        if moved[r] == 0 or e2[r] == 0:
            raise ValueError("data are not related by w and a positive scaling")
        x = e2[r] / moved[r]
        if x <= 0:
            raise ValueError("data are not related by w and a positive scaling")
        lam.append(x)
    for r in range(rs.rank):
        if lam[nu.tau(r)] != lam[r]:
            raise ValueError("scaling is not tau-symmetric")
    N = lattice_exponent(rs)
    chi = []
    for x in lam:
        root = exact_root(x, N)
        chi.append(root if root is not None else float(x) ** (1.0 / N))
    winv = w.inverse()
    out = []
    for r in range(rs.rank):
        v = rs.varpi(r)
        k = [int(N * c) for c in rs.to_alpha(v)]
        val = 1
        for s, ks in enumerate(k):
            val = val * chi[s] ** ks
        sgn = eps_Q(nu, vsub(v, winv.act(v))).to_real()
        out.append(val / sgn)
    return out


def character_on(f: Sequence, omega: Sequence):
    """Multiplicative extension of a real character given on fundamental weights."""
    out = 1
    for r, c in enumerate(vec(omega)):
        if c.denominator != 1:
            raise ValueError("weight not in P")
        out = out * f[r] ** int(c)
    return out
