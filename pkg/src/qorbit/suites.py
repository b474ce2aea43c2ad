"""Named verification suites, one per acceptance criterion; run by `qorbit check <suite>`."""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from .charring import tau_fixed_dominant, twining_classical, twining_mults, weight_mults
from .exactmath import PolarRational, QMono, laurent_eval
from .hc_integral import (eval_point, hc_image, invariant_integral,
                          limit_identity, positivity_margin)
from .lowrank_models import (CASES, QVal, case_datum, classify_hw, disjointness, dot_image,
                             family_gamma, family_member, h2_stratify, in_family, invariance_residual,
                             make_provider, s_n, stratum_minus, stratum_plus, stratum_state,
                             stratum_zero, verma_gram)
from .rootsys import Involution, build_root_system, fold
from .twistdata import (TwistingDatum, WeightFunction, classify, compact_roots, dot,
                        enumerate_w_minus, w_plus)


@dataclass
class SuiteResult:
    name: str
    ok: bool = True
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    seconds: float = 0.0
    notes: List[str] = field(default_factory=list)

    def check(self, cond: bool, ident: str) -> None:
        self.checks += 1
        if not cond:
            self.ok = False
            if len(self.failures) < 20:
                self.failures.append(ident)

    def to_json(self) -> dict:
        # wall-clock time is left out so that the document is byte-for-byte reproducible
        return {"suite": self.name, "ok": self.ok, "checks": self.checks, "failures": self.failures,
                "notes": self.notes}


def _reversal(n: int) -> List[int]:
    return list(range(n, 0, -1))


def _d_swap(n: int) -> List[int]:
    return list(range(1, n - 1)) + [n, n - 1]


E6_TAU = [6, 2, 5, 4, 3, 1]


# ---------------------------------------------------------------- 1

def suite_fold(**_) -> SuiteResult:
    res = SuiteResult("fold")
    t0 = time.perf_counter()
    table = [("A3", _reversal(3), "C2", False), ("A5", _reversal(5), "C3", False),
             ("A2", _reversal(2), "BC1", True), ("A4", _reversal(4), "BC2", True),
             ("A6", _reversal(6), "BC3", True),
             ("D4", _d_swap(4), "B3", False), ("D5", _d_swap(5), "B4", False),
             ("D6", _d_swap(6), "B5", False), ("E6", E6_TAU, "F4", False)]
    for label, tau, want, nonred in table:
        fs = fold(build_root_system(label), Involution.from_one_based(tau))
        res.check(fs.folded_type == want and fs.non_reduced == nonred,
                  f"{label}: got {fs.folded_type} non_reduced={fs.non_reduced}")
    res.seconds = time.perf_counter() - t0
    res.check(res.seconds < 1.0, f"runtime {res.seconds:.2f}s >= 1s")
    return res


# ---------------------------------------------------------------- 2

def _types_up_to(max_rank: int) -> List[str]:
    out = [f"A{n}" for n in range(1, max_rank + 1)]
    out += [f"B{n}" for n in range(2, max_rank + 1)]
    out += [f"C{n}" for n in range(3, max_rank + 1)]
    out += [f"D{n}" for n in range(4, max_rank + 1)]
    if max_rank >= 2:
        out.append("G2")
    if max_rank >= 4:
        out.append("F4")
    return out


def diagram_involutions(label: str) -> List[List[int]]:
    n = int(label[1:])
    out = [list(range(1, n + 1))]
    if label[0] == "A" and n >= 2:
        out.append(_reversal(n))
    if label[0] == "D":
        out.append(_d_swap(n))
        if n == 4:
            out += [[3, 2, 1, 4], [4, 2, 3, 1]]
    if label == "E6":
        out.append(E6_TAU)
    return out


def regular_reduced_data(rs, tau: Involution) -> List[TwistingDatum]:
    fixed = tau.fixed
    out = []
    for signs in itertools.product((1, -1), repeat=len(fixed)):
        eps = [1] * rs.rank
        for r, s in zip(fixed, signs):
            eps[r] = s
        nu = TwistingDatum(rs, tau, eps)
        f = classify(nu)
        if f.regular and f.reduced:
            out.append(nu)
    return out


def suite_theosec(max_rank: int = 4, **_) -> SuiteResult:
    res = SuiteResult("theosec")
    t0 = time.perf_counter()
    count = 0
    for label in _types_up_to(max_rank):
        rs = build_root_system(label)
        for tau in diagram_involutions(label):
            t = Involution.from_one_based(tau)
            for nu in regular_reduced_data(rs, t):
                count += 1
                tag = f"{label} tau={tau} eps={[str(e.to_real()) for e in nu.eps]}"
                wm = enumerate_w_minus(nu)
                wp = w_plus(nu)
                W = nu.weyl
                res.check(len(wm) * len(wp) == len(W), f"{tag}: |W-||W+| != |W_nu|")
                prods = {(a * b).matrix for a, _ in wm for b in wp}
                res.check(len(prods) == len(wm) * len(wp), f"{tag}: product map not injective")
                res.check(prods <= {w.matrix for w in W}, f"{tag}: product leaves W_nu")
                sig = [s for _, s in wm]
                res.check(len(set(sig)) == len(sig), f"{tag}: repeated sign character")
    res.notes.append(f"{count} data")
    res.seconds = time.perf_counter() - t0
    res.check(res.seconds < 30.0 or max_rank < 4, f"runtime {res.seconds:.1f}s >= 30s")
    return res


# ---------------------------------------------------------------- 3

def suite_twining(level: int = 3, **_) -> SuiteResult:
    res = SuiteResult("twining")
    t0 = time.perf_counter()
    cases = [("A2", _reversal(2)), ("A3", _reversal(3)), ("A1xA1", [2, 1]), ("D4", _d_swap(4)),
             ("A2", [1, 2]), ("A3", [1, 2, 3]), ("A1xA1", [1, 2])]
    for label, tau in cases:
        rs = build_root_system(label)
        t = Involution.from_one_based(tau)
        for hw in tau_fixed_dominant(rs, t, level):
            a = twining_mults(rs, t, hw).jvals
            b = twining_classical(rs, t, hw).jvals
            tag = f"{label} tau={tau} hw={[int(x) for x in hw]}"
            res.check({k: v for k, v in a.items() if v} == {k: v for k, v in b.items() if v},
                      f"{tag}: division vs classical trace")
            if t.is_trivial():
                m = {k: v for k, v in weight_mults(rs, hw).mults.items() if v}
                res.check({k: v for k, v in a.items() if v} == m, f"{tag}: tau = id vs multiplicities")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 4

def _hc_data() -> List[TwistingDatum]:
    out = []
    for label, tau in [("A1", [1]), ("A2", [1, 2]), ("B2", [1, 2]), ("G2", [1, 2]), ("A2", [2, 1]),
                       ("A1xA1", [2, 1]), ("A3", [3, 2, 1]), ("B3", [1, 2, 3])]:
        rs = build_root_system(label)
        t = Involution.from_one_based(tau)
        choices = []
        for r in range(rs.rank):
            if t(r) == r:
                choices.append((Fraction(-1), Fraction(0), Fraction(1), Fraction(2)))
            elif t(r) > r:
                choices.append((Fraction(0), Fraction(1), Fraction(1, 3)))
            else:
                choices.append((None,))
        picks = list(itertools.product(*choices))
        for p in picks[:: max(1, len(picks) // 4)]:
            eps = [p[r] if p[r] is not None else p[t(r)] for r in range(rs.rank)]
            out.append(TwistingDatum(rs, t, eps))
    return out


def _random_lambda(nu: TwistingDatum, rng: random.Random) -> WeightFunction:
    vals: List[Optional[QMono]] = [None] * nu.rs.rank
    for r in range(nu.rs.rank):
        if vals[r] is not None:
            continue
        x = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        if nu.tau(r) == r and rng.random() < 0.5:
            x = -x
        m = QMono(PolarRational(x), Fraction(rng.randint(-4, 4), rng.choice((1, 2))))
        vals[r] = m
        vals[nu.tau(r)] = m.conj()
    return WeightFunction(vals)


def _gauges(nu: TwistingDatum, grid: int = 4):
    star = nu.tau.star
    for ph in itertools.product(range(grid), repeat=len(star)):
        vals = [QMono(PolarRational(1), 0)] * nu.rs.rank
        for r, k in zip(star, ph):
            vals[r] = QMono(PolarRational(1, Fraction(k, grid)), 0)
            vals[nu.tau(r)] = vals[r].conj()
        yield WeightFunction(vals)


def dominant_by_height(nu: TwistingDatum, bound) -> List[tuple]:
    """tau-fixed dominant weights with height (varpi, rho^vee) <= bound."""
    rs = nu.rs
    cap = [int(bound / rs.height(rs.varpi(r))) for r in range(rs.rank)]
    out = []
    for c in itertools.product(*(range(k + 1) for k in cap)):
        w = tuple(Fraction(x) for x in c)
        if rs.height(w) <= bound and nu.tau.is_fixed_weight(w):
            out.append(w)
    return out


def suite_hc(samples: int = 100, height: int = 6, seed: int = 7, **_) -> SuiteResult:
    res = SuiteResult("hc")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    for nu in _hc_data():
        tag0 = f"{nu.rs.label} tau={[p + 1 for p in nu.tau.perm]} eps={[str(e.to_real()) for e in nu.eps]}"
        els = [(hw, hc_image(nu, hw)) for hw in dominant_by_height(nu, height)]
        W = list(nu.weyl)
        gauges = list(_gauges(nu))
        for _ in range(samples):
            lam = _random_lambda(nu, rng)
            memo: Dict = {}
            base = [eval_point(el, lam, cache=memo) for _, el in els]
            for w in W:
                try:
                    mu = dot(w, nu, lam, deformed=True)
                except ValueError:
                    continue  # dot action undefined where eps vanishes on the moved weight
                memo = {}
                ok = all(eval_point(el, mu, cache=memo) == b for (_, el), b in zip(els, base))
                res.check(ok, f"{tag0}: dot-q invariance fails for {w.name()}")
            for g in gauges:
                mu = lam * g
                memo = {}
                ok = all(eval_point(el, mu, cache=memo) == b for (_, el), b in zip(els, base))
                res.check(ok, f"{tag0}: gauge invariance fails")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 5

def suite_rank1(N: int = 400, **_) -> SuiteResult:
    res = SuiteResult("rank1")
    t0 = time.perf_counter()
    q = Fraction(1, 2)
    rs = build_root_system("A1")
    nu1 = TwistingDatum(rs, None, [1])
    for n in range(6):
        st = stratum_plus(Fraction(1), n, q)
        zs = [st.c * q ** (-n + 2 * k) for k in range(n + 1)]
        for k in range(4):
            lhs = invariant_integral(nu1, [-n], [k], q).value
            rhs = sum(z ** (k + 1) for z in zs) / sum(zs)
            res.check(lhs == rhs, f"S_plus n={n} k={k}: {lhs} != {rhs}")
    # S_zero and S_minus: lambda(varpi) = L = q^g
    nu0 = TwistingDatum(rs, None, [0])
    num = TwistingDatum(rs, None, [-1])
    for g in (Fraction(-1), Fraction(-3), Fraction(1, 3), Fraction(2)):
        L = 0.5 ** float(g)
        for k in range(1, 4):
            a = float(invariant_integral(nu0, [g], [k], q).value)
            b = stratum_state(stratum_zero(L / 0.5), ["z"] * k, N, 0.5)
            res.check(abs(a - b) <= 1e-10 * abs(a), f"S_zero L={L} k={k}: {a} vs {b}")
            a = float(invariant_integral(num, [g], [k], q).value)
            b = stratum_state(stratum_minus(1.0, L / 0.5), ["z"] * k, N, 0.5)
            res.check(abs(a - b) <= 1e-10 * abs(a), f"S_minus L={L} k={k}: {a} vs {b}")
        # closed forms at k = 1
        a = float(invariant_integral(nu0, [g], [1], q).value)
        res.check(abs(a - L / 1.25) <= 1e-12 * abs(a), f"S_zero closed form L={L}")
        a = float(invariant_integral(num, [g], [1], q).value)
        res.check(abs(a - (2 * L - 0.5 / L) / 2.5) <= 1e-12 * abs(a), f"S_minus closed form L={L}")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 6

def suite_classify(n_max: int = 20, samples: int = 200, seed: int = 11, **_) -> SuiteResult:
    res = SuiteResult("classify")
    t0 = time.perf_counter()
    q = Fraction(1, 2)
    rng = random.Random(seed)
    # strata: d > 0 admissible exactly on the grid t = c s_n
    for c in (Fraction(1), Fraction(-2), Fraction(3, 5)):
        for n in range(n_max + 1):
            st = h2_stratify(c * c, c * s_n(n, q), q)
            res.check(not isinstance(st, str) and st.kind == "S_plus" and st.n == n and st.c == c,
                      f"grid point c={c} n={n}")
            off = h2_stratify(c * c, c * (s_n(n, q) + Fraction(1, 7)), q)
            res.check(off == "not admissible", f"off-grid c={c} n={n}")
    expected = {"A1_H2": lambda n: QVal(Fraction(1), Fraction(-n)),
                "A1xA1": lambda n: QVal(Fraction(1), Fraction(1 - n, 2)),
                "A2_twisted": lambda n: QVal(Fraction(1), Fraction(3 - n, 2))}
    for case in CASES:
        cl = classify_hw(case, 1, q, n_max)
        res.check(cl.kind == "discrete" and cl.verified, f"{case}: classification not verified")
        for n, lam in enumerate(cl.family):
            res.check(lam == expected[case](n), f"{case} n={n}: family member {lam}")
            rec = verma_gram(case, lam, 1, n + 10, q)
            res.check(rec.unitarizable and rec.truncation == n + 1, f"{case} n={n}: sign scan")
        for _ in range(samples):
            lam = QVal(Fraction(rng.randint(1, 200), rng.randint(1, 200)), Fraction(rng.randint(-40, 8), 4))
            if in_family(case, 1, lam, q) is not None:
                continue
            rec = verma_gram(case, lam, 1, 400, q)
            res.check(not rec.unitarizable, f"{case}: off-family {lam} accepted")
    for case, e in (("A1xA1", 0), ("A2_twisted", 0), ("A1_H2", 0)):
        res.check(classify_hw(case, e, q).kind == "all_positive", f"{case} eps=0")
    res.check(classify_hw("A1_H2", -1, q).kind == "all_nonzero", "A1_H2 eps<0")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 7

def suite_limit(n: int = 60, **_) -> SuiteResult:
    res = SuiteResult("limit")
    t0 = time.perf_counter()
    q = Fraction(1, 2)
    nu = case_datum("A1_H2", -1)
    for g in (Fraction(1, 3), Fraction(-1, 2), Fraction(0), Fraction(3, 2)):
        prov = make_provider("A1_H2", -1, [g], q)
        for row in limit_identity(nu, [g], prov, 400, q, n):
            rel = abs(row["lhs"] / row["rhs"] - 1)
            res.check(rel <= 1e-8, f"gamma={g} w={row['w']}: relative gap {rel:.3g}")
            res.check(abs(row["lhs"] / row["c_w"] - 1) <= 1e-8, f"gamma={g} w={row['w']}: lhs/c_w")
            res.check(abs(row["rhs"] / row["e_gamma"] - 1) <= 1e-8, f"gamma={g} w={row['w']}: rhs/|e|")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 8

def suite_positivity(n_max: int = 20, **_) -> SuiteResult:
    res = SuiteResult("positivity")
    t0 = time.perf_counter()
    for case in CASES:
        nu = case_datum(case, 1)
        for n in range(n_max + 1):
            m = positivity_margin(nu, family_gamma(case, n))
            res.check(m is not None and m > 0, f"{case} n={n}: margin {m}")
    nu = case_datum("A1_H2", -1)
    res.check(positivity_margin(nu, [Fraction(1, 3)]) is None, "A1 eps=-1 has compact roots")
    res.notes.append("A1 with eps = -1 has no compact roots, so the condition is vacuous there")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 9

def suite_invariance(N: int = 400, **_) -> SuiteResult:
    res = SuiteResult("invariance")
    t0 = time.perf_counter()
    for st in (stratum_plus(1.0, 3, 0.5), stratum_plus(-2.0, 0, 0.5), stratum_zero(1.0), stratum_zero(-0.7),
               stratum_minus(1.0, 1.7), stratum_minus(0.5, 0.4)):
        r = invariance_residual(st, N, 0.5)
        res.check(r["max"] <= 1e-10, f"{st.kind} {st.to_json()}: residual {r['max']:.3g}")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 10

def _perm_of(word, N: int) -> tuple:
    """Images (w(1), ..., w(N)) of w = s_{word[0]} s_{word[1]} ..., s_r swapping r+1 and r+2."""
    out = []
    for x in range(1, N + 1):
        for r in reversed(word):
            if x == r + 1:
                x = r + 2
            elif x == r + 2:
                x = r + 1
        out.append(x)
    return tuple(out)


def suite_grassmannian(max_N: int = 6, **_) -> SuiteResult:
    res = SuiteResult("grassmannian")
    t0 = time.perf_counter()
    for N in range(2, max_N + 1):
        rs = build_root_system(f"A{N - 1}")
        for m in range(1, N):
            eps = [-1 if r == m - 1 else 1 for r in range(N - 1)]
            nu = TwistingDatum(rs, None, eps)
            got = {_perm_of(w.word, N) for w, _ in enumerate_w_minus(nu)}
            want = set()
            for p in itertools.permutations(range(1, N + 1)):
                if all(p[i] < p[i + 1] for i in range(m - 1)) and all(p[i] < p[i + 1] for i in range(m, N - 1)):
                    want.add(p)
            res.check(got == want, f"N={N} m={m}: W^- differs from the shuffles")
            res.check(len(got) == math.comb(N, m), f"N={N} m={m}: count {len(got)}")
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------- 11

def suite_disjoint(n_max: int = 20, **_) -> SuiteResult:
    res = SuiteResult("disjoint")
    t0 = time.perf_counter()
    q = Fraction(1, 2)
    for case in ("A1xA1", "A2_twisted"):
        for eps in (1, 4, Fraction(9, 4)):
            for n, hit in disjointness(case, eps, q, n_max):
                res.check(hit is None, f"{case} eps={eps} n={n}: image equals member {hit}")
            for n in range(min(n_max, 8) + 1):
                img = dot_image(case, eps, family_member(case, eps, n))
                res.check(not verma_gram(case, img, eps, 60, q).unitarizable,
                          f"{case} eps={eps} n={n}: image passes the sign scan")
    res.seconds = time.perf_counter() - t0
    return res


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "fold": suite_fold, "theosec": suite_theosec, "twining": suite_twining, "hc": suite_hc,
    "rank1": suite_rank1, "classify": suite_classify, "limit": suite_limit,
    "positivity": suite_positivity, "invariance": suite_invariance,
    "grassmannian": suite_grassmannian, "disjoint": suite_disjoint,
}
CRITERIA = {1: "fold", 2: "theosec", 3: "twining", 4: "hc", 5: "rank1", 6: "classify", 7: "limit",
            8: "positivity", 9: "invariance", 10: "grassmannian", 11: "disjoint"}


def run_suite(name: str, **kwargs) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    t0 = time.perf_counter()
    res = SUITES[name](**kwargs)
    if not res.seconds:
        res.seconds = time.perf_counter() - t0
    return res
