"""Harish-Chandra images of the central elements z_varpi, central characters,
the invariant integral and the cell decomposition of the invariant state."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

from .charring import TwiningTable, q_dim, twining_mults, weight_mults
from .exactmath import LaurentPoly, PolarRational, QMono, fmt_frac, laurent_div, laurent_eval
from .rootsys import RootSystem, Weight, WeylElement, vadd, vec, vscale, vsub
from .twistdata import (TwistingDatum, WeightFunction, classify, compact_roots, dot,
                        enumerate_w_minus, eps_Q)

Real = Union[Fraction, float]


class HCartanElement:
    """Finite sum of LaurentPoly(q) * T_omega over weights omega."""

    def __init__(self, rank: int, terms: Optional[Dict] = None, lattice: str = "P^tau"):
        t: Dict[Weight, LaurentPoly] = {}
        for w, c in (terms or {}).items():
            w = vec(w)
            c = c if isinstance(c, LaurentPoly) else LaurentPoly.const(c)
            v = t.get(w, LaurentPoly()) + c
            if v.is_zero():
                t.pop(w, None)
            else:
                t[w] = v
        self.rank = rank
        self.terms = t
        self.lattice = lattice

    @classmethod
    def unit(cls, rank: int) -> "HCartanElement":
        return cls(rank, {tuple([0] * rank): 1})

    def __eq__(self, other) -> bool:
        return isinstance(other, HCartanElement) and self.rank == other.rank and self.terms == other.terms

    def __repr__(self) -> str:
        body = " + ".join(f"({c})T{tuple(str(x) for x in w)}" for w, c in sorted(self.terms.items()))
        return f"HCartanElement({body})"

    def to_json(self) -> list:
        return [{"weight": [fmt_frac(x) for x in w], "coeff": c.to_json()} for w, c in sorted(self.terms.items())]


def _require_datum(nu: TwistingDatum, hw: Sequence) -> Weight:
    nu.require_ungauged()
    hw = vec(hw)
    if not nu.tau.is_fixed_weight(hw):
        raise ValueError("highest weight is not tau-fixed")
    if not nu.rs.in_P(hw) or not nu.rs.is_dominant(hw):
        raise ValueError("highest weight must be dominant integral")
    return hw


_TWINING_CACHE: Dict[tuple, TwiningTable] = {}


def _twining(rs, tau, hw: Weight) -> TwiningTable:
    """twining_mults, memoised: the table depends on (A, tau, hw) only, not on eps."""
    k = (tuple(map(tuple, rs.cartan)), tau.perm, hw)
    if k not in _TWINING_CACHE:
        _TWINING_CACHE[k] = twining_mults(rs, tau, hw)
    return _TWINING_CACHE[k]


def hc_image(nu: TwistingDatum, hw: Sequence, j: Optional[TwiningTable] = None) -> HCartanElement:
    """sum over tau-fixed omega <= hw of j(omega) eps_Q(hw - omega) q^{-2(rho, omega)} T_omega."""
    hw = _require_datum(nu, hw)
    rs = nu.rs
    j = j or _twining(rs, nu.tau, hw)
    two_rho = vscale(2, rs.rho)
    terms: Dict[Weight, LaurentPoly] = {}
    for w, jv in j.jvals.items():
        if jv == 0:
            continue
        e = eps_Q(nu, vsub(hw, w))
        if e.is_zero():
            continue
        terms[w] = LaurentPoly.mono(jv * e.to_real(), -rs.pair(two_rho, w))
    return HCartanElement(rs.rank, terms)


def hc_image_grouped(nu: TwistingDatum, hw: Sequence, j: Optional[TwiningTable] = None) -> HCartanElement:
    """The same element assembled orbit by orbit under W_nu, each orbit weighted by 1/|Stab|."""
    hw = _require_datum(nu, hw)
    rs = nu.rs
    j = j or _twining(rs, nu.tau, hw)
    two_rho = vscale(2, rs.rho)
    W = nu.weyl
    done = set()
    terms: Dict[Weight, LaurentPoly] = defaultdict(LaurentPoly)
    for w0 in sorted(j.jvals, key=lambda v: (-rs.pair(two_rho, v), v)):
        if w0 in done or j.jvals[w0] == 0:
            continue
        orbit = [w.act(w0) for w in W]
        done.update(orbit)
        rep = max(orbit, key=lambda v: (rs.pair(two_rho, v), v))
        e0 = eps_Q(nu, vsub(hw, rep))
        if e0.is_zero():
            continue
        stab = sum(1 for v in orbit if v == rep)
        for w in W:
            x = w.act(rep)
            c = Fraction(j.jvals[rep]) * e0.to_real() * eps_Q(nu, vsub(rep, x)).to_real() / stab
            terms[x] = terms[x] + LaurentPoly.mono(c, -rs.pair(two_rho, x))
    return HCartanElement(rs.rank, dict(terms))


def _fast_terms(el: HCartanElement) -> list:
    ft = getattr(el, "_fast", None)
    if ft is None:
        ft = []
        for w, c in el.terms.items():
            if any(x.denominator != 1 for x in w):
                raise ValueError("weight not in P")
            ft.append((tuple(int(x) for x in w), [(mpq(e), mpq(a)) for e, a in c.terms.items()]))
        el._fast = ft
    return ft


def eval_point(el: HCartanElement, lam: WeightFunction, q=None, cache: Optional[Dict] = None):
    """sum_omega coeff_omega(q) lam_P(omega); a LaurentPoly in q, or its value when q is given.

    cache, if given, memoises lam_P across calls with the same lam.  The inner loop runs on
    gmpy2 rationals; the result is converted back to Fractions.
    """
    acc: Dict = defaultdict(mpq)
    cache = {} if cache is None else cache
    mods = [mpq(v.coef.modulus) for v in lam.values]
    phases = [mpq(v.coef.phase) for v in lam.values]
    exps = [mpq(v.exp) for v in lam.values]
    half = mpq(1, 2)
    for w, cterms in _fast_terms(el):
        hit = cache.get(w)
        if hit is None:
            x, ph, ex = mpq(1), mpq(0), mpq(0)
            for r, k in enumerate(w):
                if k:
                    x *= mods[r] ** k
                    ph += phases[r] * k
                    ex += exps[r] * k
            ph -= (ph.numerator // ph.denominator)
            if ph == half:
                x = -x
            elif ph != 0:
                raise ValueError("lambda_P is not real on a tau-fixed weight: lambda is not tau-symmetric")
            hit = cache[w] = (x, ex)
        x, ex = hit
        for e, a in cterms:
            acc[e + ex] += a * x
    out = LaurentPoly({Fraction(int(e.numerator), int(e.denominator)): Fraction(int(a.numerator), int(a.denominator))
                       for e, a in acc.items() if a})
    return out if q is None else laurent_eval(out, q)


# ---------------------------------------------------------------- central characters

@dataclass
class CentralCharResult:
    same: bool
    by_evaluation: bool
    witness: Optional[Tuple[str, List[Fraction]]]  # (w name, gauge phases per node)
    consistent: bool
    inconclusive: bool = False

    def to_json(self) -> dict:
        wit = None
        if self.witness is not None:
            wit = {"w": self.witness[0], "gauge_phases": [p if isinstance(p, float) else fmt_frac(p) for p in self.witness[1]]}
        return {"same": self.same, "by_evaluation": self.by_evaluation, "witness": wit,
                "consistent": self.consistent, "inconclusive": self.inconclusive}


def dominant_tau_fixed_up_to_height(nu: TwistingDatum, bound: int) -> List[Weight]:
    from itertools import product
    rs = nu.rs
    out = []
    for c in product(range(bound + 1), repeat=rs.rank):
        w = vec(c)
        if nu.tau.is_fixed_weight(w) and sum(c) <= bound:
            out.append(w)
    return out


def gauge_witness(nu: TwistingDatum, lam: WeightFunction, lam2: WeightFunction) -> Optional[Tuple[WeylElement, List[Fraction]]]:
    """Search w in W_nu and a gauge g with lam2 = g (w ._{eps,q} lam)."""
    for w in sorted(nu.weyl, key=lambda x: (len(x.word), x.word)):
        mu = dot(w, nu, lam, deformed=True)
        phases = []
        ok = True
        for r, (a, b) in enumerate(zip(lam2.values, mu.values)):
            ratio = a / b
            if ratio.exp != 0 or ratio.coef.modulus != 1:
                ok = False
                break
            if nu.tau(r) == r and ratio.coef.phase != 0:
                ok = False
                break
            phases.append(ratio.coef.phase)
        if ok:
            return w, phases
    return None


def same_central_character(nu: TwistingDatum, lam: WeightFunction, lam2: WeightFunction,
                           q=None, bound: int = 4) -> CentralCharResult:
    """Compare HC evaluations (symbolically in q) and search for a dot-orbit/gauge witness.

    With exact rational phases the witness search is complete, so the result is never inconclusive.
    """
    lam.check_tau(nu.tau)
    lam2.check_tau(nu.tau)
    by_eval = True
    for hw in dominant_tau_fixed_up_to_height(nu, bound):
        el = hc_image(nu, hw)
        if eval_point(el, lam) != eval_point(el, lam2):
            by_eval = False
            break
    wit = gauge_witness(nu, lam, lam2)
    w_json = None if wit is None else (wit[0].name(), wit[1])
    same = wit is not None
    return CentralCharResult(same, by_eval, w_json, consistent=(same == by_eval))


# ---------------------------------------------------------------- invariant integral

def _alt_sum(nu: TwistingDatum, v: Weight, gamma: Weight) -> LaurentPoly:
    rs = nu.rs
    W = nu.weyl
    gr = vsub(gamma, rs.rho)
    out = LaurentPoly()
    for w in W:
        wv = w.act(v)
        e = eps_Q(nu, vsub(v, wv))
        if e.is_zero():
            continue
        out = out + LaurentPoly.mono(W.hsgn(w) * e.to_real(), 2 * rs.pair(gr, wv))
    return out


@dataclass
class IntegralValue:
    quotient: LaurentPoly   # numerator / denominator, exact
    dim_q: LaurentPoly
    value: Optional[Real]

    def to_json(self) -> dict:
        from .exactmath import fmt_frac
        v = self.value
        return {"quotient": self.quotient.to_json(), "dim_q": self.dim_q.to_json(),
                "value": None if v is None else (fmt_frac(v) if isinstance(v, Fraction) else f"{v:.17g}")}


def invariant_integral(nu: TwistingDatum, gamma: Sequence, hw: Sequence, q=None) -> IntegralValue:
    hw = _require_datum(nu, hw)
    if not classify(nu).reduced:
        raise ValueError("the invariant integral formula needs a reduced twisting datum")
    rs = nu.rs
    gamma = vec(gamma)
    num = _alt_sum(nu, vadd(hw, rs.rho), gamma)
    den = _alt_sum(nu, rs.rho, gamma)
    quot = laurent_div(num, den)
    dq = q_dim(rs, hw)
    value = None
    if q is not None:
        d = laurent_eval(dq, q)
        if d == 0:
            raise ZeroDivisionError("dim_q vanishes")
        value = laurent_eval(quot, q) / d
    return IntegralValue(quot, dq, value)


def integral_via_hc(nu: TwistingDatum, gamma: Sequence, hw: Sequence, q) -> Real:
    """The same integral read off from the raw HC image at lambda = q^{2 gamma}."""
    rs = nu.rs
    lam = WeightFunction.q_power(gamma, rs)
    return eval_point(hc_image(nu, hw), lam, q) / laurent_eval(q_dim(rs, hw), q)


# ---------------------------------------------------------------- cells

def e_gamma(nu: TwistingDatum, gamma: Sequence, q) -> Real:
    rs = nu.rs
    top = LaurentPoly()
    two_rho = vscale(2, rs.rho)
    for w in rs.weyl_group():
        top = top + LaurentPoly.mono(1 if len(w.word) % 2 == 0 else -1, -rs.pair(two_rho, w.act(rs.rho)))
    den = _alt_sum(nu, rs.rho, vec(gamma))
    d = laurent_eval(den, q)
    if d == 0:
        raise ZeroDivisionError("e_gamma denominator vanishes")
    return laurent_eval(top, q) / d


# a provider maps a cell element to {alpha_plus (weight): multiplicity}
MultProvider = Callable[[WeylElement, int], Dict[Weight, int]]


@dataclass
class CellData:
    w: str
    highest: WeightFunction
    trace: float
    tail_bound: float
    depth: int
    weight: float = 0.0
    cw: float = 0.0

    def to_json(self) -> dict:
        return {"w": self.w, "highest_weight": self.highest.to_json(), "trace_A": f"{self.trace:.17g}",
                "tail_bound": f"{self.tail_bound:.17g}", "depth": self.depth,
                "state_weight": f"{self.weight:.17g}", "c_w": f"{self.cw:.17g}"}


def _qf(q) -> float:
    return float(q)


def _cell_terms(nu: TwistingDatum, gamma: Weight, w: WeylElement, mults: Dict[Weight, int], hw: Weight,
                q: float) -> float:
    rs = nu.rs
    shift = vadd(rs.rho, w.act(vsub(gamma, rs.rho)))
    winv = w.inverse()
    sgn = eps_Q(nu, vsub(hw, winv.act(hw))).to_real() if any(hw) else 1
    v = vadd(hw, rs.rho)
    total = 0.0
    for a, m in mults.items():
        total += m * q ** float(2 * rs.pair(v, vadd(a, shift)))
    return float(sgn) * total


def _tail_bound(nu: TwistingDatum, gamma: Weight, w: WeylElement, mults: Dict[Weight, int], q: float) -> float:
    """Bound for the truncated part, assuming mult(level m) <= C (m + 1) in the folded height."""
    rs = nu.rs
    if not mults:
        return 0.0
    levels: Dict[Fraction, int] = defaultdict(int)
    for a, m in mults.items():
        levels[rs.pair(vscale(2, rs.rho), a)] += m
    steps = sorted(levels)
    if len(steps) < 2:
        return 0.0
    step = min(b - a for a, b in zip(steps, steps[1:]))
    if step <= 0:
        return 0.0
    idx = {e: int((e - steps[0]) / step) for e in steps}
    C = max(levels[e] / (idx[e] + 1) for e in steps)
    top = max(idx.values())
    r = q ** float(step)
    shift = vadd(rs.rho, w.act(vsub(gamma, rs.rho)))
    pre = q ** float(rs.pair(vscale(2, rs.rho), shift) + steps[0])
    # sum_{m > top} (m+1) r^m
    tail = r ** (top + 1) * ((top + 2) - (top + 1) * r) / (1 - r) ** 2
    return pre * C * tail


def cell_state(nu: TwistingDatum, gamma: Sequence, provider: MultProvider, depth: int, q) -> List[CellData]:
    """Cells of the invariant state: one per element of W_nu^-, with weights |e_gamma| Tr(A_w)."""
    if not classify(nu).reduced:
        raise ValueError("cell_state needs a reduced twisting datum")
    if provider is None:
        raise ValueError("a multiplicity provider is required")
    rs = nu.rs
    gamma = vec(gamma)
    lam = WeightFunction.q_power(gamma, rs)
    qf = _qf(q)
    cells = []
    zero = tuple(Fraction(0) for _ in range(rs.rank))
    for w, _ in enumerate_w_minus(nu):
        mults = provider(w, depth)
        tr = _cell_terms(nu, gamma, w, mults, zero, qf)
        cells.append(CellData(w.name(), dot(w, nu, lam, deformed=True), tr,
                              _tail_bound(nu, gamma, w, mults, qf), depth))
    cw = abs(float(e_gamma(nu, gamma, q)))
    total = sum(c.trace for c in cells)
    for c in cells:
        c.cw = cw
        c.weight = c.trace / total
    return cells


def state_value(nu: TwistingDatum, gamma: Sequence, provider: MultProvider, depth: int, q, hw: Sequence,
                normalized: bool = True) -> float:
    """sum_w c Tr(a_hw A_w); normalized uses c = 1 / sum_w Tr(A_w), otherwise c = |e_gamma|."""
    rs = nu.rs
    gamma = vec(gamma)
    hw = vec(hw)
    qf = _qf(q)
    zero = tuple(Fraction(0) for _ in range(rs.rank))
    num, tot = 0.0, 0.0
    for w, _ in enumerate_w_minus(nu):
        mults = provider(w, depth)
        num += _cell_terms(nu, gamma, w, mults, hw, qf)
        tot += _cell_terms(nu, gamma, w, mults, zero, qf)
    c = 1.0 / tot if normalized else abs(float(e_gamma(nu, gamma, q)))
    return c * num


def limit_identity(nu: TwistingDatum, gamma: Sequence, provider: MultProvider, depth: int, q, n: int
                   ) -> List[Dict[str, float]]:
    """Both sides of the c_w identity at omega = (n-1) rho, for each cell."""
    rs = nu.rs
    gamma = vec(gamma)
    qf = _qf(q)
    zero = tuple(Fraction(0) for _ in range(rs.rank))
    cells = enumerate_w_minus(nu)
    tot = sum(_cell_terms(nu, gamma, w, provider(w, depth), zero, qf) for w, _ in cells)
    cw = 1.0 / tot
    eg = abs(float(e_gamma(nu, gamma, q)))
    wplus = compact_roots(nu).group
    W = nu.weyl
    rmg = vsub(rs.rho, gamma)
    den = 0.0
    for x in rs.weyl_group():
        sg = 1 if len(x.word) % 2 == 0 else -1
        den += sg * qf ** float(2 * n * rs.pair(rs.rho, vsub(rs.rho, x.inverse().act(rs.rho))))
    out = []
    for w, _ in cells:
        mults = provider(w, depth)
        lhs = cw * sum(m * qf ** float(2 * n * rs.pair(rs.rho, a)) for a, m in mults.items())
        winv_rho = w.inverse().act(rs.rho)
        s = 0.0
        for v in wplus:
            vv = W.lookup(v.matrix)
            s += W.hsgn(vv) * qf ** float(2 * n * rs.pair(rmg, vsub(winv_rho, v.inverse().act(winv_rho))))
        rhs = eg * abs(s) / abs(den)
        out.append({"w": w.name(), "lhs": lhs, "rhs": rhs, "c_w": cw, "e_gamma": eg})
    return out


def positivity_margin(nu: TwistingDatum, gamma: Sequence) -> Optional[Fraction]:
    """min over positive compact folded roots beta of (rho - gamma, beta); None if there are none."""
    rs = nu.rs
    rmg = vsub(rs.rho, vec(gamma))
    pos = compact_roots(nu).positive
    if not pos:
        return None
    return min(rs.pair(rmg, b) for b in pos)
