"""Root systems, weight lattices, Weyl groups, diagram involutions and folding.

Weights are stored as tuples of Fractions in the fundamental-weight basis.
Cartan convention: a_rs = (alpha_r^vee, alpha_s), so alpha_s has
fundamental-weight coordinates given by column s of A.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

Weight = Tuple[Fraction, ...]
Matrix = Tuple[Tuple[int, ...], ...]

WEYL_GUARD = 100_000
MAX_RANK = 9


class GuardError(RuntimeError):
    """A size guard (Weyl group order, dimension, rank) was exceeded."""


# ---------------------------------------------------------------- vectors

def vec(xs: Iterable) -> Weight:
    return tuple(Fraction(x) for x in xs)


def vadd(a: Sequence, b: Sequence) -> Weight:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence, b: Sequence) -> Weight:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Sequence) -> Weight:
    c = Fraction(c)
    return tuple(c * x for x in a)


def is_zero(a: Sequence) -> bool:
    return all(x == 0 for x in a)


def solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    """Solve a consistent (possibly overdetermined) system exactly; None if inconsistent."""
    m, n = len(rows), len(rows[0]) if rows else 0
    aug = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    if len(piv_cols) < n:
        return None
    sol = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][n]
    return sol


def mat_inverse(a: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(a[i], bt[j])) for j in range(n)) for i in range(n))


def matvec(a: Matrix, v: Sequence) -> Weight:
    return tuple(sum((Fraction(x) * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


# ---------------------------------------------------------------- Cartan data

def _simple_cartan(kind: str, n: int) -> List[List[int]]:
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def link(i, j, aij=-1, aji=-1):
        a[i][j], a[j][i] = aij, aji

    if kind == "A":
        if n < 1:
            raise ValueError("A_n needs n >= 1")
        for i in range(n - 1):
            link(i, i + 1)
    elif kind == "B":
        if n < 2:
            raise ValueError("B_n needs n >= 2")
        for i in range(n - 2):
            link(i, i + 1)
        # alpha_n short
        link(n - 2, n - 1, -1, -2)
    elif kind == "C":
        if n < 2:
            raise ValueError("C_n needs n >= 2")
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 2, n - 1, -2, -1)
    elif kind == "D":
        if n < 3:
            raise ValueError("D_n needs n >= 3")
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 3, n - 1)
    elif kind == "E":
        if n not in (6, 7, 8):
            raise ValueError("E_n needs n in 6..8")
        # Bourbaki: 1-3-4-5-..., 2 attached to 4
        link(0, 2)
        link(1, 3)
        for i in range(2, n - 1):
            link(i, i + 1)
    elif kind == "F":
        if n != 4:
            raise ValueError("F_n needs n = 4")
        link(0, 1)
        link(1, 2, -2, -1)
        link(2, 3)
    elif kind == "G":
        if n != 2:
            raise ValueError("G_n needs n = 2")
        # alpha_1 short
        link(0, 1, -1, -3)
    else:
        raise ValueError(f"unknown type {kind}")
    return a


_LABEL = re.compile(r"^([A-G])(\d+)$")


def cartan_from_label(label: str) -> List[List[int]]:
    parts = [p.strip() for p in label.replace("×", "x").split("x") if p.strip()]
    if not parts:
        raise ValueError("empty type label")
    blocks = []
    for p in parts:
        m = _LABEL.match(p.upper())
        if not m:
            raise ValueError(f"unrecognized type label {p!r}")
        blocks.append(_simple_cartan(m.group(1), int(m.group(2))))
    n = sum(len(b) for b in blocks)
    a = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                a[off + i][off + j] = x
        off += len(b)
    return a


def components(cartan: Sequence[Sequence[int]], nodes: Optional[Iterable[int]] = None) -> List[List[int]]:
    nodes = list(range(len(cartan))) if nodes is None else sorted(nodes)
    left = set(nodes)
    out = []
    while left:
        start = min(left)
        comp, todo = [], [start]
        left.discard(start)
        while todo:
            r = todo.pop()
            comp.append(r)
            for s in list(left):
                if cartan[r][s] != 0:
                    left.discard(s)
                    todo.append(s)
        out.append(sorted(comp))
    return out


def symmetrizer(cartan: Sequence[Sequence[int]]) -> List[Fraction]:
    """d_r with d_r a_rs = d_s a_sr, smallest value 1 in each component."""
    n = len(cartan)
    for r in range(n):
        if cartan[r][r] != 2:
            raise ValueError("diagonal entries of a Cartan matrix must be 2")
        for s in range(n):
            if r != s:
                if cartan[r][s] > 0:
                    raise ValueError("off-diagonal Cartan entries must be <= 0")
                if (cartan[r][s] == 0) != (cartan[s][r] == 0):
                    raise ValueError("a_rs = 0 must imply a_sr = 0")
    d: List[Optional[Fraction]] = [None] * n
    for comp in components(cartan):
        d[comp[0]] = Fraction(1)
        todo = [comp[0]]
        while todo:
            r = todo.pop()
            for s in comp:
                if s != r and cartan[r][s] != 0:
                    val = d[r] * cartan[r][s] / cartan[s][r]
                    if d[s] is None:
                        d[s] = val
                        todo.append(s)
                    elif d[s] != val:
                        raise ValueError("Cartan matrix is not symmetrizable")
        mn = min(d[s] for s in comp)
        for s in comp:
            d[s] = d[s] / mn
    return d  # type: ignore[return-value]


def recognize(cartan: Sequence[Sequence[int]], d: Optional[Sequence[Fraction]] = None) -> str:
    """Bourbaki-style label of a finite-type Cartan matrix, components joined by 'x'."""
    d = symmetrizer(cartan) if d is None else d
    labels = []
    for comp in components(cartan):
        labels.append(_recognize_connected(cartan, d, comp))
    return "x".join(labels)


def _recognize_connected(cartan, d, comp: List[int]) -> str:
    n = len(comp)
    if n == 1:
        return "A1"
    adj = {r: [s for s in comp if s != r and cartan[r][s] != 0] for r in comp}
    mult = {(r, s): cartan[r][s] * cartan[s][r] for r in comp for s in adj[r]}
    nedges = sum(len(v) for v in adj.values()) // 2
    if nedges != n - 1:
        raise ValueError("Dynkin diagram is not a tree: not of finite type")
    mx = max(mult.values())
    if mx >= 4:
        raise ValueError("not of finite type")
    if mx == 3:
        if n != 2:
            raise ValueError("not of finite type")
        return "G2"
    degs = {r: len(adj[r]) for r in comp}
    if mx == 2:
        if max(degs.values()) > 2:
            raise ValueError("not of finite type")
        doubles = [(r, s) for (r, s), m in mult.items() if m == 2 and r < s]
        if len(doubles) != 1:
            raise ValueError("not of finite type")
        r, s = doubles[0]
        ends = [x for x in comp if degs[x] == 1]
        if n == 2:
            # the second listed node decides: short -> B2, long -> C2
            last = comp[-1]
            other = comp[0]
            return "B2" if d[last] < d[other] else "C2"
        if r in ends or s in ends:
            end = r if r in ends else s
            other = s if end == r else r
            return f"B{n}" if d[end] < d[other] else f"C{n}"
        if n == 4:
            return "F4"
        raise ValueError("not of finite type")
    # simply laced
    branch = [r for r in comp if degs[r] >= 3]
    if not branch:
        return f"A{n}"
    if len(branch) > 1 or degs[branch[0]] > 3:
        raise ValueError("not of finite type")
    b = branch[0]
    arms = []
    for start in adj[b]:
        length, prev, cur = 1, b, start
        while True:
            nxt = [x for x in adj[cur] if x != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            length += 1
        arms.append(length)
    arms.sort()
    if arms[0] == 1 and arms[1] == 1:
        return f"D{n}"
    if arms[:2] == [1, 2] and arms[2] in (2, 3, 4):
        return f"E{n}"
    raise ValueError("not of finite type")


# ---------------------------------------------------------------- Weyl group

@dataclass(frozen=True)
class WeylElement:
    """w = s_{word[0]} s_{word[1]} ... ; matrix acts on fundamental-weight coordinates."""

    word: Tuple[int, ...]
    matrix: Matrix

    def act(self, w: Sequence) -> Weight:
        if len(w) != len(self.matrix):
            raise ValueError("rank mismatch")
        return matvec(self.matrix, w)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(self.word + other.word, matmul(self.matrix, other.matrix))

    def inverse(self) -> "WeylElement":
        n = len(self.matrix)
        inv = mat_inverse(self.matrix)
        return WeylElement(tuple(reversed(self.word)), tuple(tuple(int(x) for x in row) for row in inv))

    @property
    def length(self) -> int:
        return len(self.word)

    def name(self) -> str:
        return "e" if not self.word else "".join(f"s{r + 1}" for r in self.word)

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylElement) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)


def generate_group(gens: Sequence[WeylElement], n: int, guard: int = WEYL_GUARD) -> List[WeylElement]:
    """BFS closure under left multiplication by the generators; shortest words first."""
    e = WeylElement((), identity(n))
    seen = {e.matrix: e}
    order = [e]
    queue = deque([e])
    while queue:
        w = queue.popleft()
        for g in gens:
            m = matmul(g.matrix, w.matrix)
            if m not in seen:
                x = WeylElement(g.word + w.word, m)
                seen[m] = x
                order.append(x)
                if len(order) > guard:
                    raise GuardError(f"group order exceeds guard {guard}")
                queue.append(x)
    return order


# ---------------------------------------------------------------- root systems

class RootSystem:
    def __init__(self, cartan: Sequence[Sequence[int]], label: Optional[str] = None):
        a = [list(map(int, row)) for row in cartan]
        n = len(a)
        if n == 0 or any(len(row) != n for row in a):
            raise ValueError("Cartan matrix must be square and nonempty")
        self.d: Tuple[Fraction, ...] = tuple(symmetrizer(a))
        self.cartan: Matrix = tuple(tuple(row) for row in a)
        self.rank = n
        self.label = label if label is not None else recognize(a, self.d)
        inv = mat_inverse(a)
        self._ainv = inv
        # (varpi_r, varpi_s) = (A^{-1})_{rs} d_r
        self.gram: Tuple[Weight, ...] = tuple(
            tuple(inv[r][s] * self.d[r] for s in range(n)) for r in range(n))
        self.rho: Weight = tuple(Fraction(1) for _ in range(n))
        self._roots()

    # basic vectors
    def varpi(self, r: int) -> Weight:
        return tuple(Fraction(int(i == r)) for i in range(self.rank))

    def alpha(self, r: int) -> Weight:
        return tuple(Fraction(self.cartan[i][r]) for i in range(self.rank))

    def from_alpha(self, k: Sequence) -> Weight:
        """Weight sum_s k_s alpha_s in fundamental-weight coordinates."""
        return tuple(sum((Fraction(self.cartan[i][s]) * k[s] for s in range(self.rank)), Fraction(0))
                     for i in range(self.rank))

    def to_alpha(self, w: Sequence) -> Weight:
        """Coordinates in the simple-root basis."""
        return tuple(sum((self._ainv[i][j] * Fraction(w[j]) for j in range(self.rank)), Fraction(0))
                     for i in range(self.rank))

    def pair(self, a: Sequence, b: Sequence) -> Fraction:
        return sum((Fraction(a[r]) * self.gram[r][s] * b[s] for r in range(self.rank) for s in range(self.rank)
                    if a[r] and b[s]), Fraction(0))

    def in_P(self, w: Sequence) -> bool:
        return all(Fraction(x).denominator == 1 for x in w)

    def in_Q(self, w: Sequence) -> bool:
        return self.in_P(w) and all(x.denominator == 1 for x in self.to_alpha(w))

    def is_dominant(self, w: Sequence) -> bool:
        return all(x >= 0 for x in w)

    def height(self, w: Sequence) -> Fraction:
        return sum(self.to_alpha(w), Fraction(0))

    # roots
    def _roots(self) -> None:
        n = self.rank
        bound = 4 * n * n + 300
        start = [tuple(int(i == r) for i in range(n)) for r in range(n)]
        seen = set(start)
        queue = deque(start)
        while queue:
            b = queue.popleft()
            for r in range(n):
                c = sum(b[s] * self.cartan[r][s] for s in range(n))
                if c == 0:
                    continue
                nb = tuple(b[s] - (c if s == r else 0) for s in range(n))
                if nb not in seen:
                    seen.add(nb)
                    if len(seen) > bound:
                        raise ValueError("root generation does not terminate: not of finite type")
                    queue.append(nb)
        pos = sorted((b for b in seen if all(x >= 0 for x in b)), key=lambda b: (sum(b), b))
        neg = [b for b in seen if all(x <= 0 for x in b)]
        if len(pos) + len(neg) != len(seen):
            raise ValueError("root generation produced a mixed-sign vector: not of finite type")
        self.positive_roots_alpha: Tuple[Tuple[int, ...], ...] = tuple(pos)
        self.positive_roots: Tuple[Weight, ...] = tuple(self.from_alpha(b) for b in pos)
        self.roots: Tuple[Weight, ...] = self.positive_roots + tuple(vscale(-1, b) for b in self.positive_roots)

    def highest_root(self) -> Weight:
        comps = components(self.cartan)
        if len(comps) != 1:
            raise ValueError("highest root needs a connected diagram")
        best = max(self.positive_roots_alpha, key=sum)
        return self.from_alpha(best)

    def coroot_pairing(self, w: Sequence, beta: Sequence) -> Fraction:
        return 2 * self.pair(w, beta) / self.pair(beta, beta)

    # Weyl group
    def simple_reflection(self, r: int) -> WeylElement:
        n = self.rank
        m = tuple(tuple(int(i == j) - (self.cartan[i][r] if j == r else 0) for j in range(n)) for i in range(n))
        return WeylElement((r,), m)

    def identity(self) -> WeylElement:
        return WeylElement((), identity(self.rank))

    def reflect(self, r: int, w: Sequence) -> Weight:
        c = Fraction(w[r])
        return tuple(Fraction(w[i]) - c * self.cartan[i][r] for i in range(self.rank))

    def element(self, word: Sequence[int]) -> WeylElement:
        out = self.identity()
        for r in word:
            out = out * self.simple_reflection(r)
        return out

    def weyl_group(self, guard: int = WEYL_GUARD) -> List[WeylElement]:
        key = ("_W", guard)
        if not hasattr(self, "_wcache"):
            self._wcache: Dict = {}
        if key not in self._wcache:
            if self.rank > MAX_RANK:
                raise GuardError(f"rank {self.rank} above {MAX_RANK}")
            gens = [self.simple_reflection(r) for r in range(self.rank)]
            self._wcache[key] = generate_group(gens, self.rank, guard)
        return self._wcache[key]

    def dominant_conjugate(self, w: Sequence) -> Tuple[Weight, Tuple[int, ...]]:
        """Dominant W-conjugate of w and the word applied (leftmost last)."""
        w = vec(w)
        word: List[int] = []
        while True:
            r = next((i for i in range(self.rank) if w[i] < 0), None)
            if r is None:
                return w, tuple(reversed(word))
            w = self.reflect(r, w)
            word.append(r)

    def __repr__(self) -> str:
        return f"RootSystem({self.label})"


def build_root_system(spec: Union[str, Sequence[Sequence[int]]]) -> RootSystem:
    if isinstance(spec, str):
        a = cartan_from_label(spec)
        rs = RootSystem(a, label=spec.replace("×", "x"))
        if rs.rank > MAX_RANK:
            raise GuardError(f"rank {rs.rank} above {MAX_RANK}")
        return rs
    return RootSystem(spec)


def weyl_enumerate(rs: RootSystem, guard: int = WEYL_GUARD) -> List[WeylElement]:
    return rs.weyl_group(guard)


def act(w: WeylElement, omega: Sequence) -> Weight:
    return w.act(omega)


# ---------------------------------------------------------------- involutions

@dataclass(frozen=True)
class Involution:
    perm: Tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.perm)
        object.__setattr__(self, "perm", p)
        n = len(p)
        if sorted(p) != list(range(n)):
            raise ValueError("tau must be a permutation")
        if any(p[p[i]] != i for i in range(n)):
            raise ValueError("tau must be an involution")

    @classmethod
    def identity(cls, n: int) -> "Involution":
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, images: Sequence[int]) -> "Involution":
        return cls(tuple(int(x) - 1 for x in images))

    def __call__(self, r: int) -> int:
        return self.perm[r]

    @property
    def n(self) -> int:
        return len(self.perm)

    def is_trivial(self) -> bool:
        return all(i == p for i, p in enumerate(self.perm))

    @property
    def fixed(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.perm[i] == i)

    @property
    def star(self) -> Tuple[int, ...]:
        """Fundamental domain I^*: the lower index of each 2-cycle."""
        return tuple(i for i in range(self.n) if self.perm[i] > i)

    def classes(self) -> List[Tuple[int, ...]]:
        return [tuple(sorted({i, self.perm[i]})) for i in range(self.n) if self.perm[i] >= i]

    def act(self, w: Sequence) -> Weight:
        # tau(varpi_r) = varpi_{tau(r)}
        return tuple(Fraction(w[self.perm[s]]) for s in range(self.n))

    def is_fixed_weight(self, w: Sequence) -> bool:
        return all(Fraction(w[i]) == Fraction(w[self.perm[i]]) for i in range(self.n))

    def check_automorphism(self, rs: RootSystem) -> None:
        if self.n != rs.rank:
            raise ValueError("tau has the wrong length for this root system")
        a = rs.cartan
        for r in range(self.n):
            for s in range(self.n):
                if a[self.perm[r]][self.perm[s]] != a[r][s]:
                    raise ValueError("tau is not a diagram automorphism")

    def act_on_element(self, rs: RootSystem, w: WeylElement) -> WeylElement:
        return rs.element(tuple(self.perm[r] for r in w.word))


def plus_part(tau: Involution, w: Sequence) -> Weight:
    return vscale(Fraction(1, 2), vadd(w, tau.act(w)))


# ---------------------------------------------------------------- folding

@dataclass
class FoldedSystem:
    base: RootSystem
    tau: Involution
    classes: List[Tuple[int, ...]]
    cartan: Matrix
    non_reduced: bool
    varpi_hat: List[Weight]
    alpha_hat: List[Weight]
    generators: List[WeylElement]
    label: str
    folded_type: str
    roots: List[Weight] = field(default_factory=list)
    roots_coords: List[Tuple[int, ...]] = field(default_factory=list)

    def class_of(self, r: int) -> int:
        for i, c in enumerate(self.classes):
            if r in c:
                return i
        raise KeyError(r)

    def folded_coords(self, alpha_coords: Sequence[int]) -> Tuple[int, ...]:
        """m_rhat = sum over s in rhat of k_s."""
        return tuple(sum(int(alpha_coords[s]) for s in c) for c in self.classes)

    def restricted_reflection(self, i: int, v: Sequence) -> Weight:
        """Simple folded reflection s_rhat on a tau-fixed vector."""
        a = self.alpha_hat[i]
        c = 2 * self.base.pair(v, a) / self.base.pair(a, a)
        return vsub(v, vscale(c, a))

    @cached_property
    def group(self) -> List[WeylElement]:
        return generate_group(self.generators, self.base.rank)


def fold(rs: RootSystem, tau: Involution) -> FoldedSystem:
    tau.check_automorphism(rs)
    classes = tau.classes()
    a = rs.cartan
    alpha_hat = [plus_part(tau, rs.alpha(c[0])) for c in classes]
    k = len(classes)
    cart = []
    for i in range(k):
        row = []
        for j in range(k):
            val = 2 * rs.pair(alpha_hat[i], alpha_hat[j]) / rs.pair(alpha_hat[i], alpha_hat[i])
            if val.denominator != 1:
                raise ValueError("folded Cartan matrix is not integral")
            row.append(int(val))
        cart.append(tuple(row))
    varpi_hat = []
    gens = []
    non_reduced = False
    for c in classes:
        r = c[0]
        t = tau(r)
        p = a[r][t]
        w = tuple(Fraction(0) for _ in range(rs.rank))
        for s in c:
            lam = Fraction(1, 2) + Fraction(a[s][tau(s)], 4)
            w = vadd(w, vscale(lam, rs.varpi(s)))
        varpi_hat.append(w)
        if p == 2:
            gens.append(rs.element((r,)))
        elif p == 0:
            gens.append(rs.element((r, t)))
        elif p == -1:
            gens.append(rs.element((r, t, r)))
            non_reduced = True
        else:
            raise ValueError("unexpected pairing between tau-paired nodes")
    cartan_hat = tuple(cart)
    base_label = recognize(cartan_hat)
    if non_reduced:
        folded_type = "x".join(("BC" + re.sub(r"^[A-G]", "", lab)) if lab[0] in "AB" else lab
                               for lab in base_label.split("x"))
    else:
        folded_type = base_label
    fs = FoldedSystem(rs, tau, classes, cartan_hat, non_reduced, varpi_hat, alpha_hat, gens,
                      base_label, folded_type)
    seen = {}
    for b in rs.positive_roots_alpha:
        v = plus_part(tau, rs.from_alpha(b))
        if v not in seen:
            seen[v] = fs.folded_coords(b)
    fs.roots = list(seen)
    fs.roots_coords = [seen[v] for v in fs.roots]
    return fs


def parse_type_and_tau(label: Optional[str] = None, tau: Optional[Sequence[int]] = None,
                       cartan: Optional[Sequence[Sequence[int]]] = None) -> Tuple[RootSystem, Involution]:
    rs = build_root_system(cartan if cartan is not None else label)  # type: ignore[arg-type]
    t = Involution.identity(rs.rank) if tau is None else Involution.from_one_based(tau)
    t.check_automorphism(rs)
    return rs, t
