"""Rank-one operator models of O_q(H_2), Verma-module Gram recursions in rank <= 2,
admissible highest weights and truncated invariance checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exactmath import FLOAT_TOL, exact_root, fmt_frac

Real = Union[Fraction, float]
CASES = ("A1_H2", "A1xA1", "A2_twisted")


def _case(case: str) -> str:
    c = case.replace("-", "_").lower()
    table = {"a1_h2": "A1_H2", "a1": "A1_H2", "h2": "A1_H2", "a1xa1": "A1xA1", "a1_a1": "A1xA1",
             "a2_twisted": "A2_twisted", "a2_tw": "A2_twisted", "a2": "A2_twisted"}
    if c not in table:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    return table[c]


# ---------------------------------------------------------------- q-monomials K q^e

@dataclass(frozen=True)
class QVal:
    """Positive real K * q^e, exact when K, e, q are rational; K may be a float."""

    K: Union[Fraction, float]
    e: Fraction = Fraction(0)

    def value(self, q) -> float:
        return float(self.K) * float(q) ** float(self.e)

    def log(self, q) -> float:
        return math.log(float(self.K)) + float(self.e) * math.log(float(q))

    def exact(self) -> bool:
        return isinstance(self.K, Fraction)

    def __mul__(self, other: "QVal") -> "QVal":
        if self.exact() and other.exact():
            return QVal(self.K * other.K, self.e + other.e)
        return QVal(float(self.K) * float(other.K), self.e + other.e)

    def __pow__(self, k: int) -> "QVal":
        K = self.K ** k if self.exact() else float(self.K) ** k
        return QVal(K, self.e * k)

    def cmp_one(self, q) -> int:
        """Sign of (K q^e - 1), exact in exact mode; tolerance FLOAT_TOL otherwise."""
        lg = self.log(q)
        if not self.exact() or not isinstance(q, Fraction):
            if abs(lg) <= FLOAT_TOL:
                return 0
            return 1 if lg > 0 else -1
        if abs(lg) > 1e-6:
            return 1 if lg > 0 else -1
        a, b = self.e.numerator, self.e.denominator
        lhs = self.K ** b * q ** a
        return (lhs > 1) - (lhs < 1)

    def to_json(self) -> dict:
        K = fmt_frac(self.K) if self.exact() else f"{self.K:.17g}"
        return {"coef": K, "qexp": fmt_frac(self.e)}


def as_qval(x) -> QVal:
    if isinstance(x, QVal):
        return x
    if isinstance(x, float):
        return QVal(x)
    if isinstance(x, tuple):
        return QVal(Fraction(x[0]), Fraction(x[1]))
    return QVal(Fraction(x))


def _frac_or_float(x):
    return x if isinstance(x, (Fraction, int)) else float(x)


# ---------------------------------------------------------------- strata

@dataclass
class Stratum:
    kind: str          # "S_plus" | "S_zero" | "S_minus"
    d: Real
    t: Real
    c: Real = 0
    n: int = 0
    a: Real = 1

    def to_json(self) -> dict:
        def f(x):
            return fmt_frac(x) if isinstance(x, (Fraction, int)) else f"{float(x):.17g}"
        out = {"kind": self.kind, "d": f(self.d), "t": f(self.t)}
        if self.kind == "S_plus":
            out.update(c=f(self.c), n=self.n)
        elif self.kind == "S_minus":
            out.update(c=f(self.c), a=f(self.a))
        return out


def s_n(n: int, q) -> Real:
    return q ** (-n - 1) + q ** (n + 1)


def h2_stratify(d, t, q) -> Union[Stratum, str]:
    """Locate (d, t) in S_+ u S_0 u S_-; returns "not admissible" off the S_+ grid."""
    exact = all(isinstance(x, (int, Fraction)) for x in (d, t, q))
    if exact:
        d, t, q = Fraction(d), Fraction(t), Fraction(q)
    else:
        d, t, q = float(d), float(t), float(q)
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if d == 0:
        return Stratum("S_zero", d, t)
    if d < 0:
        c = exact_root(-d, 2) if exact else None
        if c is None:
            c = math.sqrt(float(-d))
        x = t / c
        disc = x * x + 4
        r = exact_root(disc, 2) if isinstance(disc, Fraction) else None
        a = (x + r) / 2 if r is not None else (float(x) + math.sqrt(float(disc))) / 2
        return Stratum("S_minus", d, t, c=c, a=a)
    c = exact_root(d, 2) if exact else None
    if t == 0:
        return "not admissible"
    sgn = 1 if t > 0 else -1
    if c is not None:
        c = sgn * c
        ratio = t / c
        n = 0
        while True:
            s = s_n(n, q)
            if s == ratio:
                return Stratum("S_plus", d, t, c=c, n=n)
            if s > ratio:
                return "not admissible"
            n += 1
    cf = sgn * math.sqrt(float(d))
    ratio = float(t) / cf
    n = 0
    while True:
        s = s_n(n, float(q))
        if abs(s - ratio) <= FLOAT_TOL * abs(s):
            return Stratum("S_plus", d, t, c=cf, n=n)
        if s > ratio * (1 + FLOAT_TOL):
            return "not admissible"
        n += 1


def stratum_plus(c, n: int, q) -> Stratum:
    return Stratum("S_plus", c * c, c * s_n(n, q), c=c, n=n)


def stratum_zero(t) -> Stratum:
    return Stratum("S_zero", 0, t)


def stratum_minus(c, a) -> Stratum:
    return Stratum("S_minus", -c * c, (a - 1 / a) * c, c=c, a=a)


# ---------------------------------------------------------------- operator models

@dataclass
class TruncatedOperator:
    name: str
    matrix: np.ndarray
    cutoff: int
    basis: str


def _spectrum(s: Stratum, which: str, N: int, q: float) -> np.ndarray:
    if s.kind == "S_plus":
        if which not in ("", "main", None):
            raise ValueError("S_plus has a single block")
        n = s.n
        return np.array([float(s.c) * q ** (-n + 2 * k) for k in range(n + 1)])
    if s.kind == "S_zero":
        if which not in ("", "main", None):
            raise ValueError("S_zero has a single block")
        if s.t == 0:
            raise ValueError("S_zero with t = 0 only has the zero character")
        return np.array([q ** (2 * k + 1) * float(s.t) for k in range(N)])
    if which == "+":
        return np.array([float(s.c) * float(s.a) * q ** (2 * k + 1) for k in range(N)])
    if which == "-":
        return np.array([-float(s.c) / float(s.a) * q ** (2 * k + 1) for k in range(N)])
    raise ValueError("S_minus needs the block selector '+' or '-'")


def h2_model(s: Stratum, which: Optional[str], N: int, q) -> Dict[str, TruncatedOperator]:
    """z diagonal with the stratum spectrum; w raises (z w = q^2 w z), v = w^*, u = q T - q^2 z."""
    if N < 2:
        raise ValueError("cutoff must be at least 2")
    qf = float(q)
    zs = _spectrum(s, which or "", N, qf)
    dim = len(zs)
    D, T = float(s.d), float(s.t)
    z = np.diag(zs)
    w = np.zeros((dim, dim))
    for k in range(dim - 1):
        b2 = qf ** 2 * (-D + qf * T * zs[k] - qf ** 2 * zs[k] ** 2)
        if b2 < -1e-9 * max(1.0, abs(D)):
            raise ArithmeticError(f"negative norm in the model at k={k}")
        w[k + 1, k] = math.sqrt(max(b2, 0.0))
    v = w.T.copy()
    u = qf * T * np.eye(dim) - qf ** 2 * z
    label = f"{s.kind}{which or ''}"
    return {name: TruncatedOperator(name, m, dim, label) for name, m in
            (("z", z), ("v", v), ("w", w), ("u", u))}


def relation_residuals(ops: Dict[str, TruncatedOperator], s: Stratum, q, band: int = 2) -> Dict[str, float]:
    """Residuals of the defining relations on the first dim - band basis vectors."""
    qf = float(q)
    z, v, w, u = (ops[k].matrix for k in "zvwu")
    dim = z.shape[0]
    keep = dim if s.kind == "S_plus" else dim - band
    D, T = float(s.d), float(s.t)
    I = np.eye(dim)
    rels = {
        "zw=q2wz": z @ w - qf ** 2 * w @ z,
        "vz=q2zv": v @ z - qf ** 2 * z @ v,
        "vw": qf ** -2 * v @ w - (-D * I + qf * T * z - qf ** 2 * z @ z),
        "wv": qf ** -2 * w @ v - (-D * I + T / qf * z - qf ** -2 * z @ z),
        "T": (u / qf + qf * z) - T * I,
        "D": (u @ z - qf ** -2 * v @ w) - D * I,
    }
    out = {}
    for k, m in rels.items():
        scale = max(1.0, np.abs(z).max() ** 2, abs(D), abs(T))
        out[k] = float(np.abs(m[:keep, :keep]).max()) / scale
    return out


def _blocks(s: Stratum) -> List[Tuple[str, float]]:
    if s.kind == "S_minus":
        return [("+", 1.0), ("-", -1.0)]
    return [("", 1.0)]


def monomials(letters: Sequence[str] = ("z", "v", "w", "u"), degree: int = 3) -> List[Tuple[str, ...]]:
    out: List[Tuple[str, ...]] = [()]
    for d in range(1, degree + 1):
        out.extend(itertools.product(letters, repeat=d))
    return out


def invariance_residual(s: Stratum, N: int, q, degree: int = 3, pad: int = 6,
                        weight_power: int = 1) -> Dict[str, float]:
    """Max over monomials X of |omega(E > X)|, |omega(E^* > X)| and |omega(K > X) - omega(X)|,
    omega the (signed) trace state X -> Tr(zX)/Tr(z) of the stratum, inner action via a = z and
    x = q^{1/2} v a^{-1} / (q^{-1} - q).  weight_power != 1 swaps z for z^p in omega (a control)."""
    qf = float(q)
    size = N + pad
    data = []
    for which, sign in _blocks(s):
        ops = h2_model(s, which or None, size, q)
        z = ops["z"].matrix
        dim = z.shape[0]
        keep = dim if s.kind == "S_plus" else N
        zinv = np.diag(1.0 / np.diag(z))
        x = math.sqrt(qf) * ops["v"].matrix @ zinv / (1 / qf - qf)
        mats = {k: ops[k].matrix for k in "zvwu"}
        data.append((sign, z, zinv, x, mats, keep, np.linalg.matrix_power(z, weight_power)))

    def tr(sign, m, keep):
        return sign * float(np.trace(m[:keep, :keep]))

    norm = sum(tr(sg, zp, keep) for sg, _, _, _, _, keep, zp in data)
    worst = {"E": 0.0, "E*": 0.0, "K": 0.0}
    for mono in monomials(degree=degree):
        e_res = es_res = k_res = 0.0
        for sign, z, zinv, x, mats, keep, zp in data:
            X = np.eye(z.shape[0])
            for letter in mono:
                X = X @ mats[letter]
            # omega(E > X) ~ Tr(zp (xX - a^{-1} X a x))
            e_res += tr(sign, zp @ x @ X, keep) - tr(sign, zp @ zinv @ X @ z @ x, keep)
            es_res += tr(sign, zp @ x.T @ X, keep) - tr(sign, zp @ zinv @ X @ z @ x.T, keep)
            k_res += tr(sign, zp @ zinv @ X @ z, keep) - tr(sign, zp @ X, keep)
        worst["E"] = max(worst["E"], abs(e_res / norm))
        worst["E*"] = max(worst["E*"], abs(es_res / norm))
        worst["K"] = max(worst["K"], abs(k_res / norm))
    worst["max"] = max(worst.values())
    return worst


def stratum_state(s: Stratum, X_word: Sequence[str], N: int, q) -> float:
    """omega(X) for a word in z, v, w, u."""
    num = den = 0.0
    for which, sign in _blocks(s):
        ops = h2_model(s, which or None, N, q)
        z = ops["z"].matrix
        X = np.eye(z.shape[0])
        for letter in X_word:
            X = X @ ops[letter].matrix
        num += sign * float(np.trace(z @ X))
        den += sign * float(np.trace(z))
    return num / den


def fusion_spectrum(s: Stratum, which: Optional[str], N_model: int, N_s: int, q,
                    band: int = 8, leak: float = 1e-10) -> np.ndarray:
    """Spectrum of z' = a^*a z + a^*c w + c^*a v + c^*c u on model (x) l^2(N), the
    (1,1)-entry of U^* Z U for the SU_q(2) representation a e_n = (1-q^{2n})^{1/2} e_{n-1},
    b e_n = q^n e_n and c = -b^* (so that a^*a + c^*c = 1).

    Eigenvectors with more than `leak` of their mass within `band` sites of a truncation
    edge are discarded as edge artefacts."""
    qf = float(q)
    ops = h2_model(s, which, N_model, q)
    dm = ops["z"].matrix.shape[0]
    A = np.zeros((N_s, N_s))
    for n in range(1, N_s):
        A[n - 1, n] = math.sqrt(1 - qf ** (2 * n))
    B = np.diag([qf ** n for n in range(N_s)])
    C = -B.T
    Zp = (np.kron(ops["z"].matrix, A.T @ A) + np.kron(ops["w"].matrix, A.T @ C)
          + np.kron(ops["v"].matrix, C.T @ A) + np.kron(ops["u"].matrix, C.T @ C))
    ev, vecs = np.linalg.eigh((Zp + Zp.T) / 2)
    edge = np.zeros((dm, N_s), dtype=bool)
    if s.kind != "S_plus":
        edge[max(dm - band, 0):, :] = True
    edge[:, max(N_s - band, 0):] = True
    mass = (vecs ** 2)[edge.ravel()].sum(axis=0)
    return ev[mass < leak]


def fusion_check(s: Stratum, which: Optional[str], N_model: int, N_s: int, q) -> Dict[str, float]:
    """Distance (relative to the spectral radius) from each kept eigenvalue of z' to the
    predicted fused spectrum, and the fraction of predicted values above 1e-6 * radius that
    are hit within that distance."""
    ev = fusion_spectrum(s, which, N_model, N_s, q)
    exp = np.array(fused_expected(s, q, N_model + N_s))
    scale = float(np.abs(exp).max())
    err = max((float(np.min(np.abs(exp - x))) for x in ev), default=math.inf) / scale
    big = exp[np.abs(exp) > 1e-6 * scale]
    hit = sum(1 for y in big if ev.size and float(np.min(np.abs(ev - y))) <= 1e-8 * scale)
    return {"max_error": err, "coverage": hit / len(big), "kept": int(ev.size)}


def fused_expected(s: Stratum, q, count: int) -> List[float]:
    qf = float(q)
    if s.kind == "S_plus":
        return [float(s.c) * qf ** (-s.n + 2 * k) for k in range(s.n + 1)]
    if s.kind == "S_zero":
        return [qf ** (2 * k + 1) * float(s.t) for k in range(count)]
    return ([float(s.c) * float(s.a) * qf ** (2 * k + 1) for k in range(count)]
            + [-float(s.c) / float(s.a) * qf ** (2 * k + 1) for k in range(count)])


# ---------------------------------------------------------------- Verma Gram recursions

@dataclass
class VermaRecord:
    case: str
    lam: QVal
    eps: Real
    q: Real
    signs: List[int]
    log10_norms: List[float]
    unitarizable: bool
    truncation: Optional[int]

    @property
    def norms(self) -> List[float]:
        out = []
        for s, lg in zip(self.signs, self.log10_norms):
            if s == 0:
                out.append(0.0)
            else:
                out.append(s * 10 ** lg if lg < 300 else s * math.inf)
        return out

    def to_json(self) -> dict:
        return {"case": self.case, "lambda": self.lam.to_json(),
                "eps": fmt_frac(self.eps) if isinstance(self.eps, Fraction) else f"{self.eps:.17g}",
                "q": fmt_frac(self.q) if isinstance(self.q, Fraction) else f"{self.q:.17g}",
                "signs": self.signs, "log10_abs_norms": [None if s == 0 else f"{lg:.17g}" for s, lg in
                                                          zip(self.signs, self.log10_norms)],
                "norms": [f"{x:.17g}" for x in self.norms],
                "unitarizable": self.unitarizable, "truncation": self.truncation}


def _eps_abs(eps) -> Union[Fraction, float]:
    return abs(Fraction(eps)) if isinstance(eps, (int, Fraction)) else abs(float(eps))


def gram_factors(case: str, lam: QVal, eps, t: int, q) -> Tuple[float, int]:
    """(log10 |factor|, sign) for c_t / c_{t-1}."""
    case = _case(case)
    qf = float(q)
    pos = math.log10(qf) * (-t + 1) + math.log10(qf ** -t - qf ** t) - 2 * math.log10(1 / qf - qf)
    e = _eps_abs(eps)
    if e == 0:
        return pos, 1
    e2 = e * e
    if case == "A1_H2":
        # 1 - eps lam^{-2} q^{-2t+2}; the sign of eps matters here
        eps_r = Fraction(eps) if isinstance(eps, (int, Fraction)) else float(eps)
        if eps_r < 0:
            y = QVal(abs(eps_r)) * lam ** -2 * QVal(Fraction(1), Fraction(-2 * t + 2))
            return pos + math.log10(1 + y.value(q)), 1
        y = QVal(eps_r) * lam ** -2 * QVal(Fraction(1), Fraction(-2 * t + 2))
    elif case == "A1xA1":
        y = QVal(e2) * lam ** -4 * QVal(Fraction(1), Fraction(-2 * t + 4))
    else:
        y = QVal(e2) * lam ** -2 * QVal(Fraction(1), Fraction(-t + 4))
        y1 = (QVal(e2) * lam ** -2 * QVal(Fraction(1), Fraction(-t + 4))).value(q)
        y2 = (QVal(e2) * lam ** -2 * QVal(Fraction(1), Fraction(-2 * t + 5))).value(q)
        pos += math.log10(1 + y1) - math.log10(1 + y2)
    c = y.cmp_one(q)
    if c == 0:
        return -math.inf, 0
    val = abs(1 - y.value(q))
    if val == 0.0:
        val = abs(y.log(q))  # 1 - e^x ~ -x near the crossing
    return pos + math.log10(val), (1 if c < 0 else -1)


def verma_gram(case: str, lam, eps, t_max: int, q) -> VermaRecord:
    case = _case(case)
    lam = as_qval(lam)
    if float(lam.K) <= 0:
        raise ValueError("lambda must be positive")
    if t_max > 10 ** 4:
        raise ValueError("t_max above 10^4")
    signs = [1]
    logs = [0.0]
    trunc = None
    for t in range(1, t_max + 1):
        if signs[-1] == 0:
            signs.append(0)
            logs.append(-math.inf)
            continue
        lg, sg = gram_factors(case, lam, eps, t, q)
        signs.append(signs[-1] * sg)
        logs.append(logs[-1] + lg if sg != 0 else -math.inf)
        if sg == 0 and trunc is None:
            trunc = t
    unit = all(s >= 0 for s in signs)
    return VermaRecord(case, lam, eps, q, signs, logs, unit, trunc)


# ---------------------------------------------------------------- classification

@dataclass
class Classification:
    case: str
    eps: Real
    kind: str                      # "discrete" | "all_positive" | "all_nonzero"
    family: List[QVal] = field(default_factory=list)
    verified: bool = True
    note: str = ""

    def to_json(self) -> dict:
        return {"case": self.case, "kind": self.kind, "family": [f.to_json() for f in self.family],
                "verified": self.verified, "note": self.note}


def family_member(case: str, eps, n: int) -> QVal:
    case = _case(case)
    e = _eps_abs(eps)
    if case == "A1_H2":
        r = exact_root(Fraction(e), 2) if isinstance(e, Fraction) else None
        return QVal(r if r is not None else math.sqrt(float(e)), Fraction(-n))
    if case == "A1xA1":
        r = exact_root(Fraction(e), 2) if isinstance(e, Fraction) else None
        return QVal(r if r is not None else math.sqrt(float(e)), Fraction(1 - n, 2))
    return QVal(e, Fraction(3 - n, 2))


def classify_hw(case: str, eps, q, n_max: int = 20, t_max: Optional[int] = None) -> Classification:
    """Moduli of admissible highest weights; each listed member re-checked by verma_gram."""
    case = _case(case)
    e = Fraction(eps) if isinstance(eps, (int, Fraction)) else float(eps)
    if e == 0:
        return Classification(case, e, "all_positive", note="eps = 0: every modulus > 0 is admissible")
    if case == "A1_H2" and e < 0:
        return Classification(case, e, "all_nonzero",
                              note="eps < 0: all of R^x, the half-lines lambda > 0 and lambda < 0 "
                                   "exchanged by the dot action of s")
    fam = [family_member(case, e, n) for n in range(n_max + 1)]
    ok = True
    for n, lam in enumerate(fam):
        rec = verma_gram(case, lam, e, t_max or (n + 8), q)
        ok = ok and rec.unitarizable and rec.truncation == n + 1
    return Classification(case, e, "discrete", fam, ok)


def is_admissible(case: str, lam, eps, q, t_max: int = 400) -> bool:
    return verma_gram(case, lam, eps, t_max, q).unitarizable


# ---------------------------------------------------------------- module multiplicities

def module_weight_mults(case: str, lam, eps, depth: int, q, t_max: int = 200) -> Dict[int, int]:
    """Multiplicity per level m (a-eigenvalue lam q^m) of the irreducible quotient."""
    case = _case(case)
    lam = as_qval(lam)
    rec = verma_gram(case, lam, eps, max(t_max, depth + 2), q)
    if not rec.unitarizable:
        raise ValueError("lambda is not an admissible highest weight")
    live = [t for t, s in enumerate(rec.signs) if s > 0]
    n = rec.truncation - 1 if rec.truncation is not None else None
    out: Dict[int, int] = {}
    if case == "A1_H2":
        for k in range(depth + 1):
            if n is not None and k > n:
                break
            out[2 * k] = 1
        return out
    for m in range(depth + 1):
        top = m if n is None else min(m, n)
        if case == "A1xA1":
            out[m] = top + 1
        else:
            out[m] = sum((m - t) // 2 + 1 for t in range(top + 1))
    assert all(t in live for t in range(min(depth, n if n is not None else depth) + 1))
    return out


# ---------------------------------------------------------------- slow Gram oracle

class _VermaEngine:
    """Normal ordering in a Verma module from the generator relations, exact in Fractions.

    Vectors are dicts word -> coefficient, a word being a PBW-ordered tuple of lowering
    letters applied to the highest weight vector.  s is q^{1/2}.
    """

    def __init__(self, case: str, lam: Fraction, eps: Fraction, s: Fraction):
        self.case = _case(case)
        self.lam, self.eps, self.s = Fraction(lam), Fraction(eps), Fraction(s)
        self.q = self.s ** 2
        q = self.q
        if self.case == "A1_H2":
            self.order = {"x*": 0}
            self.level = {"x*": 2}
        elif self.case == "A1xA1":
            self.order = {"x2*": 0, "x1*": 1}
            self.level = {"x2*": 1, "x1*": 1}
        else:
            self.order = {"x2*": 0, "x12*": 1, "x1*": 2}
            self.level = {"x2*": 1, "x12*": 2, "x1*": 1}
        self.adjoint = {"x*": ["x"], "x1*": ["x1"], "x2*": ["x2"], "x12*": ["x12"]}

    def wlevel(self, word) -> int:
        return sum(self.level[l] for l in word)

    def a_val(self, word) -> Fraction:
        """a-eigenvalue of a word vector: lam q^level."""
        return self.lam * self.q ** self.wlevel(word)

    @staticmethod
    def add(acc: Dict, vec: Dict, c=1) -> Dict:
        for k, v in vec.items():
            nv = acc.get(k, 0) + c * v
            if nv == 0:
                acc.pop(k, None)
            else:
                acc[k] = nv
        return acc

    # left multiplication by a lowering letter, with reordering
    def lmul(self, l: str, vec: Dict) -> Dict:
        out: Dict = {}
        for word, c in vec.items():
            self.add(out, self._lmul_word(l, word), c)
        return out

    def _lmul_word(self, l: str, word: Tuple[str, ...]) -> Dict:
        if not word or self.order[l] <= self.order[word[0]]:
            return {(l,) + word: Fraction(1)}
        first, rest = word[0], word[1:]
        q = self.q
        if self.case == "A1xA1":
            # x1*, x2* commute
            return self.lmul(first, self.lmul(l, {rest: Fraction(1)}))
        # A2 ordering rules
        if l == "x1*" and first == "x2*":
            out = self.add({}, self.lmul("x2*", self.lmul("x1*", {rest: Fraction(1)})), 1 / q)
            return self.add(out, self.lmul("x12*", {rest: Fraction(1)}), -1 / q)
        if l == "x1*" and first == "x12*":
            return self.add({}, self.lmul("x12*", self.lmul("x1*", {rest: Fraction(1)})), q)
        if l == "x12*" and first == "x2*":
            return self.add({}, self.lmul("x2*", self.lmul("x12*", {rest: Fraction(1)})), q)
        raise AssertionError((l, first))

    def scale_by_a_power(self, vec: Dict, k: int) -> Dict:
        return {w: c * self.a_val(w) ** k for w, c in vec.items()}

    # raising letters
    def raise_(self, x: str, vec: Dict) -> Dict:
        if x == "x12":
            out = self.raise_("x1", self.raise_("x2", vec))
            return self.add(out, self.raise_("x2", self.raise_("x1", vec)), -self.q)
        out: Dict = {}
        for word, c in vec.items():
            self.add(out, self._raise_word(x, word), c)
        return out

    def _raise_word(self, x: str, word) -> Dict:
        if not word:
            return {}
        q, s, eps = self.q, self.s, self.eps
        l, rest = word[0], word[1:]
        rv = {rest: Fraction(1)}
        out: Dict = {}
        if self.case == "A1_H2":
            # x x* = q^{-2} x* x + (D a^{-2} - 1)/(q - q^{-1}),  D = eps
            self.add(out, self.lmul("x*", self.raise_("x", rv)), q ** -2)
            return self.add(out, {rest: (eps * self.a_val(rest) ** -2 - 1) / (q - 1 / q)})
        if self.case == "A1xA1":
            own = {"x1": "x1*", "x2": "x2*"}[x]
            if l == own:
                self.add(out, self.lmul(l, self.raise_(x, rv)), q ** -2)
                return self.add(out, rv, 1 / (1 / q - q))
            self.add(out, self.lmul(l, self.raise_(x, rv)), 1)
            return self.add(out, self.scale_by_a_power(rv, -2), eps * q / (q - 1 / q))
        # A2
        if x == "x1":
            if l == "x1*":
                self.add(out, self.lmul(l, self.raise_(x, rv)), q ** -2)
                return self.add(out, rv, 1 / (1 / q - q))
            if l == "x2*":
                self.add(out, self.lmul(l, self.raise_(x, rv)), q)
                return self.add(out, self.scale_by_a_power(rv, -1), eps * q * s / (q - 1 / q))
            if l == "x12*":
                return self.add(out, self.lmul(l, self.raise_(x, rv)), 1 / q)
        if x == "x2":
            if l == "x2*":
                self.add(out, self.lmul(l, self.raise_(x, rv)), q ** -2)
                return self.add(out, rv, 1 / (1 / q - q))
            if l == "x1*":
                self.add(out, self.lmul(l, self.raise_(x, rv)), q)
                return self.add(out, self.scale_by_a_power(rv, -1), eps * q * s / (q - 1 / q))
            if l == "x12*":
                self.add(out, self.lmul(l, self.raise_(x, rv)), 1 / q)
                self.add(out, self.lmul("x1*", rv), q)
                return self.add(out, self.lmul("x2*", self.scale_by_a_power(rv, -1)), -s * eps)
        raise AssertionError((x, l))

    def basis(self, level: int) -> List[Tuple[str, ...]]:
        letters = sorted(self.order, key=self.order.get)
        out = []

        def rec(prefix, start, lev):
            if lev == level:
                out.append(tuple(prefix))
                return
            for i in range(start, len(letters)):
                l = letters[i]
                if lev + self.level[l] <= level:
                    rec(prefix + [l], i, lev + self.level[l])
        rec([], 0, 0)
        return out

    def gram(self, level: int) -> List[List[Fraction]]:
        B = self.basis(level)
        rows = []
        for u in B:
            row = []
            for v in B:
                vec = {v: Fraction(1)}
                for l in u:  # <u, v> = coeff of xi in l_k^* ... l_1^* v for u = l_1 ... l_k xi
                    for y in self.adjoint[l]:
                        vec = self.raise_(y, vec)
                row.append(vec.get((), Fraction(0)))
            rows.append(row)
        return rows


def exact_inertia(m: List[List[Fraction]]) -> Tuple[int, int, int]:
    """(positive, zero, negative) counts of a rational symmetric matrix by congruence."""
    M = [list(r) for r in m]
    pos = neg = 0
    while M:
        n = len(M)
        p = next((i for i in range(n) if M[i][i] != 0), None)
        if p is None:
            off = next(((i, j) for i in range(n) for j in range(n) if M[i][j] != 0), None)
            if off is None:
                return pos, n, neg
            i, j = off
            # row_i += row_j, col_i += col_j makes M[i][i] = 2 M[i][j] != 0
            M[i] = [a + b for a, b in zip(M[i], M[j])]
            for r in M:
                r[i] += r[j]
            p = i
        d = M[p][p]
        if d > 0:
            pos += 1
        else:
            neg += 1
        rest = [k for k in range(n) if k != p]
        M = [[M[a][b] - M[a][p] * M[p][b] / d for b in rest] for a in rest]
    return pos, 0, neg


def gram_oracle_inertia(case: str, lam: Fraction, eps: Fraction, s: Fraction, level: int) -> Tuple[int, int, int]:
    """(positive, zero, negative) counts of the Verma Gram matrix at one level, built from
    the generator relations; q = s^2."""
    eng = _VermaEngine(case, lam, eps, s)
    return exact_inertia(eng.gram(level))


def gram_recursion_inertia(case: str, lam: QVal, eps, q, level: int) -> Tuple[int, int, int]:
    """The inertia predicted by the closed-form recursion at one level."""
    case = _case(case)
    rec = verma_gram(case, lam, eps, level + 1, q)
    sg = rec.signs
    if case == "A1_H2":
        if level % 2:
            return 0, 0, 0
        s = sg[level // 2]
        return (int(s > 0), int(s == 0), int(s < 0))
    pos = zero = neg = 0
    for t in range(level + 1):
        mult = 1 if case == "A1xA1" else (level - t) // 2 + 1
        if sg[t] > 0:
            pos += mult
        elif sg[t] == 0:
            zero += mult
        else:
            neg += mult
    return pos, zero, neg


# ---------------------------------------------------------------- dot images and disjointness

def case_datum(case: str, eps):
    """The twisting datum behind a rank <= 2 case: A1 (tau = id), A1xA1 or A2 with the swap."""
    from .rootsys import Involution, build_root_system
    from .twistdata import TwistingDatum
    case = _case(case)
    if case == "A1_H2":
        return TwistingDatum(build_root_system("A1"), None, [eps])
    rs = build_root_system("A1xA1" if case == "A1xA1" else "A2")
    e = _eps_abs(eps)
    return TwistingDatum(rs, Involution((1, 0)), [e, e])


def dot_image(case: str, eps, lam: QVal) -> QVal:
    """Modulus of (s_hat ._{eps,q} lambda)(varpi_1), s_hat the folded simple reflection."""
    from .exactmath import PolarRational, QMono
    from .twistdata import WeightFunction, dot
    if not lam.exact():
        raise ValueError("dot_image needs an exact modulus")
    nu = case_datum(case, eps)
    gen = nu.folded.generators[0]
    vals = [QMono(PolarRational(lam.K), lam.e)] * nu.rs.rank
    img = dot(gen, nu, WeightFunction(vals), deformed=True).values[0]
    c = img.coef
    if c.phase != 0:
        raise ValueError("dot image left the positive half-line")
    return QVal(Fraction(c.modulus) if not isinstance(c.modulus, Fraction) else c.modulus, Fraction(img.exp))


def in_family(case: str, eps, m: QVal, q) -> Optional[int]:
    """The family index n with family_member(n) == m exactly, if any."""
    case = _case(case)
    base = family_member(case, eps, 0)
    step = family_member(case, eps, 1).e - base.e      # exponent drop per n (negative)
    ratio = m * QVal(1 / base.K if base.exact() else 1 / float(base.K), -base.e)
    guess = ratio.log(q) / (float(step) * math.log(float(q)))
    for n in {math.floor(guess), math.ceil(guess)}:
        if n < 0:
            continue
        fm = family_member(case, eps, n)
        inv = QVal(1 / fm.K if fm.exact() else 1 / float(fm.K), -fm.e)
        if (m * inv).cmp_one(q) == 0:
            return n
    return None


def disjointness(case: str, eps, q, n_max: int = 20) -> List[Tuple[int, Optional[int]]]:
    """For each family member n <= n_max: (n, index of its dot image inside the family or None)."""
    out = []
    for n in range(n_max + 1):
        img = dot_image(case, eps, family_member(case, eps, n))
        out.append((n, in_family(case, eps, img, q)))
    return out


def level_weight(case: str, level: int) -> Tuple[Fraction, ...]:
    """alpha_+ (fundamental-weight coordinates) of the level-m weight space."""
    case = _case(case)
    if case == "A1_H2":
        if level % 2:
            raise ValueError("odd level in rank one")
        return (Fraction(level),)          # (level / 2) * alpha, alpha = 2 varpi
    half = Fraction(1) if case == "A1xA1" else Fraction(1, 2)
    return (level * half, level * half)     # level * (alpha_1 + alpha_2) / 2


def make_provider(case: str, eps, gamma: Sequence, q):
    """MultProvider for cell_state: each cell w gets the weight multiplicities of the
    irreducible quotient with highest weight |(w . q^{2 gamma})(varpi_1)|."""
    from .twistdata import WeightFunction, dot
    nu = case_datum(case, eps)
    lam = WeightFunction.q_power(gamma, nu.rs)

    def provider(w, depth: int):
        hw = dot(w, nu, lam, deformed=True).values[0]
        mod = QVal(Fraction(hw.coef.modulus), Fraction(hw.exp))
        levels = module_weight_mults(case, mod, eps, depth, q)
        return {level_weight(case, m): k for m, k in levels.items()}
    return provider


def family_gamma(case: str, n: int) -> Tuple[Fraction, ...]:
    """gamma with q^{2 gamma} equal to family member n at eps = 1 (a tau-fixed weight)."""
    case = _case(case)
    if case == "A1_H2":
        return (Fraction(-n),)
    # lambda(varpi_1) = q^{2 (gamma, varpi_1)} with gamma = g (varpi_1 + varpi_2)
    g = Fraction(1 - n, 2) if case == "A1xA1" else Fraction(3 - n, 4)
    return (g, g)
