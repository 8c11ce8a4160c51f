"""Congruence lattices and lattice-level conditions (modularity, Shifting Lemma, span condition)."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product as iproduct
from typing import Iterable, Sequence

import numpy as np

from .algebra import FiniteAlgebra, Homomorphism, product
from .errors import CapExceeded, CongruenceError, SpanError, ValidationError

__all__ = [
    "Congruence",
    "all_congruences",
    "principal_congruence",
    "lattice_ops",
    "meet",
    "join",
    "kernel_congruence",
    "check_lattice_laws",
    "check_shifting_lemma",
    "PunctualSpan",
    "product_span",
    "check_chyper_span",
    "brute_force_congruences",
    "LawReport",
]

PRINCIPAL_CAP = 20_000


class Congruence:
    """Equivalence relation stored as the vector of least block representatives."""

    __slots__ = ("rep",)

    def __init__(self, rep: Sequence[int]):
        rep = tuple(int(r) for r in rep)
        for i, r in enumerate(rep):
            if not 0 <= r <= i or rep[r] != r:
                raise CongruenceError(f"not a least-representative vector at {i}")
        self.rep = rep

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Congruence":
        first: dict = {}
        return cls([first.setdefault(lab, i) for i, lab in enumerate(labels)])

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Congruence":
        labels = list(range(n))
        seen = set()
        for b in blocks:
            b = sorted(b)
            for x in b:
                if x in seen or not 0 <= x < n:
                    raise CongruenceError(f"element {x} repeated or out of range")
                seen.add(x)
                labels[x] = b[0]
        return cls.from_labels(labels)

    @classmethod
    def discrete(cls, n: int) -> "Congruence":
        return cls(range(n))

    @classmethod
    def indiscrete(cls, n: int) -> "Congruence":
        return cls([0] * n)

    @property
    def size(self) -> int:
        return len(self.rep)

    def related(self, x: int, y: int) -> bool:
        return self.rep[x] == self.rep[y]

    def blocks(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i, r in enumerate(self.rep):
            out.setdefault(r, []).append(i)
        return [out[r] for r in sorted(out)]

    @property
    def nblocks(self) -> int:
        return sum(1 for i, r in enumerate(self.rep) if i == r)

    def is_discrete(self) -> bool:
        return self.nblocks == self.size

    def __le__(self, other: "Congruence") -> bool:
        return all(other.rep[i] == other.rep[r] for i, r in enumerate(self.rep))

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.rep == other.rep

    def __hash__(self):
        return hash(self.rep)

    def __repr__(self):
        return f"Congruence({self.blocks()})"

    def matrix(self) -> np.ndarray:
        r = np.asarray(self.rep)
        return r[:, None] == r[None, :]

    def to_json(self):
        return self.blocks()

    def sort_key(self):
        return (-self.nblocks, self.rep)


def is_compatible(a: FiniteAlgebra, c: Congruence) -> bool:
    if c.size != a.size:
        return False
    rep = np.asarray(c.rep)
    for op, arity in a.signature.ops:
        t = a.np_table(op)
        # compare each table to the table with one argument replaced by its representative
        for i in range(arity):
            idx = [slice(None)] * arity
            idx[i] = rep
            if not np.array_equal(rep[t], rep[t[tuple(idx)]]):
                return False
    return True


def validated(a: FiniteAlgebra, c: Congruence) -> Congruence:
    if not is_compatible(a, c):
        raise CongruenceError(f"{c.blocks()} is not compatible with the operations of {a.name}")
    return c


# ----------------------------------------------------------- union-find core


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if rx < ry:
            self.parent[ry] = rx
        else:
            self.parent[rx] = ry
        return True

    def rep(self):
        return [self.find(x) for x in range(len(self.parent))]


def _translations(a: FiniteAlgebra):
    """Basic translations x -> op(c_1..x..c_k), as index arrays, deduplicated."""
    n = a.size
    seen = set()
    out = []
    for op, arity in a.signature.ops:
        t = a.np_table(op)
        for i in range(arity):
            moved = np.moveaxis(t, i, -1).reshape(-1, n)
            for row in moved:
                key = row.tobytes()
                if key not in seen:
                    seen.add(key)
                    out.append(row.tolist())
    return out


def _close(a_size: int, translations, pairs: Iterable[tuple[int, int]], uf: _UnionFind | None = None) -> Congruence:
    uf = uf or _UnionFind(a_size)
    queue = [(x, y) for x, y in pairs if uf.union(x, y)]
    while queue:
        x, y = queue.pop()
        for t in translations:
            u, v = t[x], t[y]
            if u != v and uf.union(u, v):
                queue.append((u, v))
    return Congruence(uf.rep())


def principal_congruence(a: FiniteAlgebra, x: int, y: int) -> Congruence:
    """Cg(x, y): least congruence relating ``x`` and ``y``."""
    return _close(a.size, _translations(a), [(x, y)])


def join(c1: Congruence, c2: Congruence) -> Congruence:
    if c1.size != c2.size:
        raise ValidationError("carrier mismatch")
    uf = _UnionFind(c1.size)
    for c in (c1, c2):
        for i, r in enumerate(c.rep):
            uf.union(i, r)
    return Congruence(uf.rep())


def meet(c1: Congruence, c2: Congruence) -> Congruence:
    if c1.size != c2.size:
        raise ValidationError("carrier mismatch")
    return Congruence.from_labels(list(zip(c1.rep, c2.rep)))


def lattice_ops(c1: Congruence, c2: Congruence) -> tuple[Congruence, Congruence]:
    return meet(c1, c2), join(c1, c2)


def all_congruences(a: FiniteAlgebra, cap: int = PRINCIPAL_CAP) -> list[Congruence]:
    """Whole lattice: principal congruences closed under joins.

    Sorted by (number of blocks descending, rep vector).
    """
    if a.size < 1:
        raise ValidationError("congruence lattice needs a non-empty carrier")
    n = a.size
    trans = _translations(a)
    principal = {}
    for x, y in combinations(range(n), 2):
        c = _close(n, trans, [(x, y)])
        principal[c.rep] = c
        if len(principal) > cap:
            raise CapExceeded(f"more than {cap} principal congruences")
    lattice = {Congruence.discrete(n).rep: Congruence.discrete(n)}
    lattice.update(principal)
    frontier = list(principal.values())
    while frontier:
        fresh = []
        for c in frontier:
            for p in principal.values():
                j = join(c, p)
                if j.rep not in lattice:
                    lattice[j.rep] = j
                    fresh.append(j)
        frontier = fresh
    return sorted(lattice.values(), key=Congruence.sort_key)


def _partitions(n: int):
    """Set partitions of range(n) as label lists in restricted-growth form."""
    if n == 0:
        yield []
        return

    def rec(i, labels, m):
        if i == n:
            yield list(labels)
            return
        for lab in range(m + 1):
            labels.append(lab)
            yield from rec(i + 1, labels, max(m, lab + 1))
            labels.pop()

    yield from rec(1, [0], 1)


def brute_force_congruences(a: FiniteAlgebra) -> list[Congruence]:
    """Filter every partition by compatibility; an oracle for small carriers."""
    out = [Congruence.from_labels(p) for p in _partitions(a.size)]
    return sorted((c for c in out if is_compatible(a, c)), key=Congruence.sort_key)


def kernel_congruence(f: Homomorphism) -> Congruence:
    return Congruence.from_labels(f.map)


# ------------------------------------------------------------- law checking


@dataclass
class LawReport:
    law: str
    holds: bool
    witness: dict | None = None
    checked: int = 0

    @property
    def verdict(self) -> str:
        return "HOLDS" if self.holds else "FAILS"

    def to_json(self):
        return {"law": self.law, "verdict": self.verdict, "counterexample": self.witness, "checked": self.checked}


def _lattice(a, lattice):
    return lattice if lattice is not None else all_congruences(a)


def check_lattice_laws(a: FiniteAlgebra, law: str, lattice: list[Congruence] | None = None) -> LawReport:
    """Scan triples (T, S, R) of the lattice in index order.

    * ``modular``: for T <= R, (T v S) ^ R == T v (S ^ R)
    * ``distributive``: T ^ (R v S) == (T ^ R) v (T ^ S)
    * ``weakly-distributive``: T ^ R == T ^ S == Delta implies T ^ (R v S) == Delta
    """
    cs = _lattice(a, lattice)
    m = len(cs)
    index = {c.rep: i for i, c in enumerate(cs)}
    J = [[index[join(x, y).rep] for y in cs] for x in cs]
    M = [[index[meet(x, y).rep] for y in cs] for x in cs]
    delta = index[Congruence.discrete(a.size).rep]
    leq = [[M[i][j] == i for j in range(m)] for i in range(m)]
    checked = 0
    for t, s, r in iproduct(range(m), repeat=3):
        if law == "modular":
            if not leq[t][r]:
                continue
            lhs, rhs = M[J[t][s]][r], J[t][M[s][r]]
        elif law == "distributive":
            lhs, rhs = M[t][J[r][s]], J[M[t][r]][M[t][s]]
        elif law == "weakly-distributive":
            if M[t][r] != delta or M[t][s] != delta:
                continue
            lhs, rhs = M[t][J[r][s]], delta
        else:
            raise ValidationError(f"unknown law {law!r}")
        checked += 1
        if lhs != rhs:
            witness = {
                "T": cs[t].to_json(),
                "S": cs[s].to_json(),
                "R": cs[r].to_json(),
                "lhs": cs[lhs].to_json(),
                "rhs": cs[rhs].to_json(),
            }
            return LawReport(law, False, witness, checked)
    return LawReport(law, True, None, checked)


def check_shifting_lemma(a: FiniteAlgebra, lattice: list[Congruence] | None = None) -> LawReport:
    """For R ^ S <= T: x S y, x' S y', x R x', y R y', x T x' imply y T y'.

    The premise set is the relation S.(R^T).S ^ R on (y, y') pairs, computed
    with boolean matrix products.
    """
    cs = _lattice(a, lattice)
    mats = [c.matrix().astype(np.int32) for c in cs]
    checked = 0
    for ti, si, ri in iproduct(range(len(cs)), repeat=3):
        T, S, R = cs[ti], cs[si], cs[ri]
        if not meet(R, S) <= T:
            continue
        checked += 1
        mt, ms, mr = mats[ti], mats[si], mats[ri]
        reach = (ms @ (mr & mt) @ ms > 0) & (mr > 0)
        if np.any(reach & (mt == 0)):
            n = a.size
            for x, y, x2, y2 in iproduct(range(n), repeat=4):
                if (
                    S.related(x, y) and S.related(x2, y2) and R.related(x, x2)
                    and R.related(y, y2) and T.related(x, x2) and not T.related(y, y2)
                ):
                    witness = {
                        "T": T.to_json(), "S": S.to_json(), "R": R.to_json(),
                        "x": x, "y": y, "x'": x2, "y'": y2,
                    }
                    return LawReport("shifting", False, witness, checked)
            raise AssertionError("matrix scan and element scan disagree")
    return LawReport("shifting", True, None, checked)


# ------------------------------------------------------------ punctual spans


def _zero(a: FiniteAlgebra) -> int:
    if not a.signature.is_pointed:
        raise SpanError("punctual spans need a pointed signature (exactly one constant named 0)")
    return a.consts["0"]


@dataclass(frozen=True)
class PunctualSpan:
    """Split epis f: W -> X, g: W -> Y with sections s, t and f.t, g.s zero."""

    W: FiniteAlgebra
    X: FiniteAlgebra
    Y: FiniteAlgebra
    f: Homomorphism
    s: Homomorphism
    g: Homomorphism
    t: Homomorphism

    def __post_init__(self):
        zx, zy = _zero(self.X), _zero(self.Y)
        for h, d, c, label in (
            (self.f, self.W, self.X, "f"),
            (self.s, self.X, self.W, "s"),
            (self.g, self.W, self.Y, "g"),
            (self.t, self.Y, self.W, "t"),
        ):
            if h.dom != d or h.cod != c:
                raise SpanError(f"{label} has the wrong domain or codomain")
        if any(self.f(self.s(x)) != x for x in self.X.elements):
            raise SpanError("f.s is not the identity")
        if any(self.g(self.t(y)) != y for y in self.Y.elements):
            raise SpanError("g.t is not the identity")
        if any(self.f(self.t(y)) != zx for y in self.Y.elements):
            raise SpanError("f.t is not the zero map")
        if any(self.g(self.s(x)) != zy for x in self.X.elements):
            raise SpanError("g.s is not the zero map")


def product_span(x: FiniteAlgebra, y: FiniteAlgebra) -> PunctualSpan:
    """W = X x Y with the projections and the canonical injections."""
    zx, zy = _zero(x), _zero(y)
    w, (f, g) = product([x, y])
    s = Homomorphism(x, w, tuple(a * y.size + zy for a in x.elements))
    t = Homomorphism(y, w, tuple(zx * y.size + b for b in y.elements))
    return PunctualSpan(w, x, y, f, s, g, t)


def check_chyper_span(span: PunctualSpan, lattice: list[Congruence] | None = None) -> LawReport:
    """For every T >= R[f] ^ R[g]: R[f] ^ (t.g)^-1(T) <= T."""
    W = span.W
    cs = _lattice(W, lattice)
    rf, rg = kernel_congruence(span.f), kernel_congruence(span.g)
    base = meet(rf, rg)
    tg = [span.t(span.g(w)) for w in W.elements]
    checked = 0
    for T in cs:
        if not base <= T:
            continue
        checked += 1
        for w, w2 in iproduct(W.elements, repeat=2):
            if rf.related(w, w2) and T.related(tg[w], tg[w2]) and not T.related(w, w2):
                return LawReport("chyper-span", False, {"T": T.to_json(), "w": w, "w'": w2}, checked)
    return LawReport("chyper-span", True, None, checked)
