"""Exact scalars: polar rationals, Laurent polynomials in q with rational
exponents, q-monomials and group-algebra elements over a weight lattice."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

Number = Union[int, Fraction]
Weight = Tuple[Fraction, ...]

FLOAT_TOL = 1e-10
DEFAULT_GRID = 4


def frac(x: Union[int, str, Fraction]) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def fmt_frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: Union[str, int, Fraction]) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s).strip())


def exact_root(x: Fraction, n: int) -> Optional[Fraction]:
    """Positive rational n-th root of x > 0, or None if irrational."""
    x = Fraction(x)
    if x <= 0:
        return None if x < 0 else Fraction(0)
    out = []
    for part in (x.numerator, x.denominator):
        r = _int_root(part, n)
        if r ** n != part:
            return None
        out.append(r)
    return Fraction(out[0], out[1])


def _int_root(m: int, n: int) -> int:
    if m < 2:
        return m
    x = 1 << ((m.bit_length() + n - 1) // n)
    while True:
        y = ((n - 1) * x + m // x ** (n - 1)) // n
        if y >= x:
            return x
        x = y


class PolarRational:
    """modulus * exp(2 pi i * phase), phase in turns reduced mod 1."""

    __slots__ = ("modulus", "phase")

    def __init__(self, modulus: Number, phase: Number = 0):
        m = Fraction(modulus)
        if m < 0:
            m = -m
            phase = Fraction(phase) + Fraction(1, 2)
        p = Fraction(phase) % 1
        if m == 0:
            p = Fraction(0)
        object.__setattr__(self, "modulus", m)
        object.__setattr__(self, "phase", p)

    def __setattr__(self, key, value):
        raise AttributeError("PolarRational is immutable")

    @classmethod
    def real(cls, x: Number) -> "PolarRational":
        return cls(x, 0)

    def __mul__(self, other: "PolarRational") -> "PolarRational":
        if not isinstance(other, PolarRational):
            other = PolarRational(other)
        return PolarRational(self.modulus * other.modulus, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other: "PolarRational") -> "PolarRational":
        if not isinstance(other, PolarRational):
            other = PolarRational(other)
        return self * other.inverse()

    def inverse(self) -> "PolarRational":
        if self.modulus == 0:
            raise ZeroDivisionError("inverse of zero")
        return PolarRational(1 / self.modulus, -self.phase)

    def conj(self) -> "PolarRational":
        return PolarRational(self.modulus, -self.phase)

    def __pow__(self, k: int) -> "PolarRational":
        if k < 0:
            return self.inverse() ** (-k)
        return PolarRational(self.modulus ** k, self.phase * k)

    def is_zero(self) -> bool:
        return self.modulus == 0

    def is_real(self) -> bool:
        return self.phase in (0, Fraction(1, 2))

    def to_real(self) -> Fraction:
        if self.phase == 0:
            return self.modulus
        if self.phase == Fraction(1, 2):
            return -self.modulus
        raise ValueError(f"not real: phase {self.phase}")

    def sign(self) -> int:
        if self.modulus == 0:
            return 0
        return 1 if self.phase == 0 else (-1 if self.phase == Fraction(1, 2) else 0)

    def to_complex(self) -> complex:
        return float(self.modulus) * complex(math.cos(2 * math.pi * self.phase),
                                             math.sin(2 * math.pi * self.phase))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = PolarRational(other)
        if not isinstance(other, PolarRational):
            return NotImplemented
        return self.modulus == other.modulus and self.phase == other.phase

    def __hash__(self) -> int:
        return hash((self.modulus, self.phase))

    def __repr__(self) -> str:
        if self.is_real():
            return f"PolarRational({self.to_real()})"
        return f"PolarRational({self.modulus}, phase={self.phase})"

    def to_json(self) -> dict:
        return {"mod": fmt_frac(self.modulus), "phase": fmt_frac(self.phase)}

    @classmethod
    def from_json(cls, d) -> "PolarRational":
        if isinstance(d, dict):
            return cls(parse_frac(d.get("mod", 1)), parse_frac(d.get("phase", 0)))
        return cls(parse_frac(d))


ONE = PolarRational(1)
ZERO = PolarRational(0)


class LaurentPoly:
    """Finite sum of c * q^e with rational c and rational e."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Number, Number]] = None):
        t: Dict[Fraction, Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = Fraction(c)
                if c:
                    e = Fraction(e)
                    v = t.get(e, 0) + c
                    if v:
                        t[e] = v
                    else:
                        t.pop(e, None)
        object.__setattr__(self, "terms", t)

    def __setattr__(self, key, value):
        raise AttributeError("LaurentPoly is immutable")

    @classmethod
    def const(cls, c: Number) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def mono(cls, c: Number, e: Number) -> "LaurentPoly":
        return cls({e: c})

    @classmethod
    def q(cls, e: Number = 1) -> "LaurentPoly":
        return cls({e: 1})

    def is_zero(self) -> bool:
        return not self.terms

    def exponents(self) -> list:
        return sorted(self.terms)

    def top(self) -> Fraction:
        return max(self.terms)

    def bottom(self) -> Fraction:
        return min(self.terms)

    def grid(self) -> int:
        d = 1
        for e in self.terms:
            d = d * e.denominator // math.gcd(d, e.denominator)
        return d

    def _lift(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(other)
        return NotImplemented

    def __add__(self, other) -> "LaurentPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return LaurentPoly(t)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "LaurentPoly":
        return (-self) + other

    def __mul__(self, other) -> "LaurentPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        t: Dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                t[e] = t.get(e, 0) + c1 * c2
        return LaurentPoly(t)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if len(self.terms) != 1:
                raise ValueError("negative power of a non-monomial")
            (e, c), = self.terms.items()
            return LaurentPoly({e * k: Fraction(c) ** k})
        out = LaurentPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, e: Number) -> "LaurentPoly":
        e = Fraction(e)
        return LaurentPoly({x + e: c for x, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            if e == 0:
                parts.append(str(c))
            else:
                parts.append(f"{c}*q^{{{e}}}")
        return " + ".join(parts)

    def to_json(self) -> Dict[str, str]:
        return {f"q^{{{fmt_frac(e)}}}": fmt_frac(self.terms[e]) for e in sorted(self.terms)}

    def eval(self, q: Union[Fraction, float]) -> Union[Fraction, float]:
        return laurent_eval(self, q)


def _check_q(q) -> None:
    if not (0 < q < 1):
        raise ValueError(f"q must lie in (0,1), got {q}")


def laurent_eval(p: LaurentPoly, q: Union[Number, float]) -> Union[Fraction, float]:
    """Value of p at q; exact whenever q has the needed rational root."""
    _check_q(q)
    if not p.terms:
        return Fraction(0)
    if isinstance(q, float):
        return math.fsum(float(c) * q ** float(e) for e, c in p.terms.items())
    q = Fraction(q)
    d = p.grid()
    root = q if d == 1 else exact_root(q, d)
    if root is None:
        qf = float(q)
        return math.fsum(float(c) * qf ** float(e) for e, c in p.terms.items())
    return sum((c * root ** int(e * d) for e, c in p.terms.items()), Fraction(0))


def laurent_div(num: LaurentPoly, den: LaurentPoly) -> LaurentPoly:
    """Exact quotient num/den in the Laurent ring, working from the top exponent down."""
    if den.is_zero():
        raise ZeroDivisionError("division by the zero Laurent polynomial")
    if num.is_zero():
        return LaurentPoly()
    dtop, dbot = den.top(), den.bottom()
    lead = den.terms[dtop]
    floor = num.bottom() - dbot
    rem = num
    quot: Dict[Fraction, Fraction] = {}
    while not rem.is_zero():
        e = rem.top()
        shift = e - dtop
        if shift < floor:
            raise ArithmeticError(f"non-exact division: remainder term {rem.terms[e]}*q^{{{e}}}")
        c = rem.terms[e] / lead
        quot[shift] = quot.get(shift, 0) + c
        rem = rem - den.shift(shift) * c
    return LaurentPoly(quot)


class QMono:
    """c * q^e with c a PolarRational: a scalar that may carry a symbolic q-power."""

    __slots__ = ("coef", "exp")

    def __init__(self, coef: Union[PolarRational, Number] = 1, exp: Number = 0):
        if not isinstance(coef, PolarRational):
            coef = PolarRational(coef)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "exp", Fraction(exp))

    def __setattr__(self, key, value):
        raise AttributeError("QMono is immutable")

    def __mul__(self, other) -> "QMono":
        if isinstance(other, QMono):
            return QMono(self.coef * other.coef, self.exp + other.exp)
        return QMono(self.coef * other, self.exp)

    __rmul__ = __mul__

    def __truediv__(self, other: "QMono") -> "QMono":
        return self * other.inverse()

    def inverse(self) -> "QMono":
        return QMono(self.coef.inverse(), -self.exp)

    def conj(self) -> "QMono":
        return QMono(self.coef.conj(), self.exp)

    def __pow__(self, k: int) -> "QMono":
        return QMono(self.coef ** k, self.exp * k)

    def is_zero(self) -> bool:
        return self.coef.is_zero()

    def to_laurent(self) -> LaurentPoly:
        return LaurentPoly.mono(self.coef.to_real(), self.exp)

    def modulus_at(self, q) -> Union[Fraction, float]:
        return laurent_eval(LaurentPoly.mono(self.coef.modulus, self.exp), q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMono):
            return NotImplemented
        if self.coef.is_zero() and other.coef.is_zero():
            return True
        return self.coef == other.coef and self.exp == other.exp

    def __hash__(self) -> int:
        return hash((self.coef, self.exp))

    def __repr__(self) -> str:
        return f"QMono({self.coef!r}, q^{self.exp})"

    def to_json(self) -> dict:
        d = self.coef.to_json()
        d["qexp"] = fmt_frac(self.exp)
        return d

    @classmethod
    def from_json(cls, d) -> "QMono":
        if isinstance(d, dict):
            return cls(PolarRational.from_json(d), parse_frac(d.get("qexp", 0)))
        return cls(PolarRational(parse_frac(d)))


class CharElement:
    """Element sum c_w(q) e^w of the group algebra over a weight lattice of given rank."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Optional[Mapping[Iterable, LaurentPoly]] = None):
        t: Dict[Weight, LaurentPoly] = {}
        if terms:
            for w, c in terms.items():
                w = tuple(Fraction(x) for x in w)
                if len(w) != rank:
                    raise ValueError("weight length does not match lattice rank")
                if not isinstance(c, LaurentPoly):
                    c = LaurentPoly.const(c)
                v = t.get(w, LaurentPoly()) + c
                if v.is_zero():
                    t.pop(w, None)
                else:
                    t[w] = v
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "terms", t)

    def __setattr__(self, key, value):
        raise AttributeError("CharElement is immutable")

    @classmethod
    def e(cls, w: Iterable, c: Union[LaurentPoly, Number] = 1) -> "CharElement":
        w = tuple(w)
        return cls(len(w), {w: c})

    def _check(self, other: "CharElement") -> None:
        if not isinstance(other, CharElement) or other.rank != self.rank:
            raise ValueError("lattice mismatch")

    def __add__(self, other: "CharElement") -> "CharElement":
        self._check(other)
        t = dict(self.terms)
        for w, c in other.terms.items():
            t[w] = t.get(w, LaurentPoly()) + c
        return CharElement(self.rank, t)

    def __neg__(self) -> "CharElement":
        return CharElement(self.rank, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "CharElement") -> "CharElement":
        return self + (-other)

    def __mul__(self, other) -> "CharElement":
        if isinstance(other, (LaurentPoly, int, Fraction)):
            return CharElement(self.rank, {w: c * other for w, c in self.terms.items()})
        return char_mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CharElement):
            return NotImplemented
        return self.rank == other.rank and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.rank, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self) -> Iterator[Tuple[Weight, LaurentPoly]]:
        return iter(sorted(self.terms.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"e^{tuple(str(x) for x in w)}: {c}" for w, c in sorted(self.terms.items()))
        return f"CharElement({body})"


def char_mul(a: CharElement, b: CharElement) -> CharElement:
    a._check(b)
    t: Dict[Weight, LaurentPoly] = {}
    for w1, c1 in a.terms.items():
        for w2, c2 in b.terms.items():
            w = tuple(x + y for x, y in zip(w1, w2))
            t[w] = t.get(w, LaurentPoly()) + c1 * c2
    return CharElement(a.rank, t)


def char_div(num: CharElement, den: CharElement, key: Callable[[Weight], tuple],
             floor: Optional[tuple] = None) -> CharElement:
    """Exact quotient by leading-term division; key orders weights, largest first.

    den's leading coefficient must be a unit monomial in q.  floor bounds the
    quotient support from below; leaving it raises ArithmeticError.
    """
    num._check(den)
    if den.is_zero():
        raise ZeroDivisionError("division by zero character")
    lw = max(den.terms, key=key)
    lc = den.terms[lw]
    if len(lc.terms) != 1:
        raise ValueError("leading coefficient of the divisor must be a monomial")
    (le, lcoef), = lc.terms.items()
    inv = LaurentPoly.mono(1 / lcoef, -le)
    keys: Dict[Weight, tuple] = {}

    def k(w: Weight) -> tuple:
        v = keys.get(w)
        if v is None:
            v = keys[w] = key(w)
        return v

    rem = {w: p for w, p in num.terms.items() if not p.is_zero()}
    den_terms = list(den.terms.items())
    quot: Dict[Weight, LaurentPoly] = {}
    while rem:
        w = max(rem, key=k)
        qw = tuple(x - y for x, y in zip(w, lw))
        if floor is not None and k(qw) < floor:
            raise ArithmeticError(f"non-exact division: remainder at e^{w}")
        c = rem[w] * inv
        quot[qw] = quot.get(qw, LaurentPoly()) + c
        for v, p in den_terms:
            t = tuple(x + y for x, y in zip(qw, v))
            nv = rem.get(t, LaurentPoly()) - c * p
            if nv.is_zero():
                rem.pop(t, None)
            else:
                rem[t] = nv
    return CharElement(num.rank, quot)
