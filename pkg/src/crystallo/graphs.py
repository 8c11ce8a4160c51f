"""Internal reflexive graphs and the category / groupoid structures they carry.

Arrow conventions: ``d0`` is the domain, ``d1`` the codomain and ``s0`` the
identity.  A pair ``(f, g)`` is composable when ``d0(f) == d1(g)``, and
``m(f, g)`` is "f after g".
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable

import numpy as np

from .algebra import FiniteAlgebra, Homomorphism, product, subalgebra, subalgebra_closure
from .congruences import Congruence, validated
from .errors import BudgetExhausted, ValidationError
from .search import DEFAULT_BUDGET, HomLaw, MapSpec, Search

__all__ = [
    "ReflexiveGraph",
    "CategoryStructure",
    "discrete_graph",
    "indiscrete_graph",
    "relation_graph",
    "congruence_graph",
    "composable_pairs",
    "enumerate_category_structures",
    "classify_structure",
    "is_affine_groupoid",
    "composition_oracle",
]


@dataclass(frozen=True, eq=False)
class ReflexiveGraph:
    X1: FiniteAlgebra
    X0: FiniteAlgebra
    d0: Homomorphism
    d1: Homomorphism
    s0: Homomorphism
    name: str = "G"

    def __post_init__(self):
        for h, dom, cod, label in (
            (self.d0, self.X1, self.X0, "d0"),
            (self.d1, self.X1, self.X0, "d1"),
            (self.s0, self.X0, self.X1, "s0"),
        ):
            if h.dom != dom or h.cod != cod:
                raise ValidationError(f"{label} has the wrong domain or codomain")
        for x in self.X0.elements:
            if self.d0(self.s0(x)) != x or self.d1(self.s0(x)) != x:
                raise ValidationError("d0.s0 and d1.s0 must be the identity")

    def to_json(self):
        return {
            "name": self.name,
            "X1": self.X1.name,
            "X0": self.X0.name,
            "d0": list(self.d0.map),
            "d1": list(self.d1.map),
            "s0": list(self.s0.map),
        }


def discrete_graph(x: FiniteAlgebra) -> ReflexiveGraph:
    ident = Homomorphism.identity(x)
    return ReflexiveGraph(x, x, ident, ident, ident, name=f"Delta({x.name})")


def relation_graph(x: FiniteAlgebra, pairs: Iterable[tuple[int, int]], name: str | None = None) -> ReflexiveGraph:
    """A reflexive compatible relation, arrows ``(a, b)`` from ``a`` to ``b``."""
    xx, (p0, p1) = product([x, x])
    elems = {a * x.size + b for a, b in pairs} | {a * x.size + a for a in x.elements}
    if tuple(sorted(elems)) != subalgebra_closure(xx, elems):
        raise ValidationError("relation is not a subalgebra of the square")
    r, inc = subalgebra(xx, elems, name=name or f"R({x.name})")
    d0 = inc.then(p0)
    d1 = inc.then(p1)
    index = {e: i for i, e in enumerate(inc.map)}
    s0 = Homomorphism(x, r, tuple(index[a * x.size + a] for a in x.elements))
    return ReflexiveGraph(r, x, d0, d1, s0, name=name or f"R({x.name})")


def indiscrete_graph(x: FiniteAlgebra) -> ReflexiveGraph:
    return relation_graph(x, iproduct(x.elements, repeat=2), name=f"Nabla({x.name})")


def congruence_graph(x: FiniteAlgebra, c: Congruence) -> ReflexiveGraph:
    validated(x, c)
    pairs = [(a, b) for a in x.elements for b in x.elements if c.related(a, b)]
    return relation_graph(x, pairs, name=f"Eq({x.name},{c.blocks()})")


# ----------------------------------------------------------- composition


def composable_pairs(g: ReflexiveGraph) -> tuple[FiniteAlgebra, list[tuple[int, int]]]:
    """Subalgebra of X1 x X1 on pairs (f, h) with d0(f) = d1(h), with its index map.

    Built directly on the pairs (lexicographic order) rather than inside the
    full square, which can be much larger.
    """
    x1 = g.X1
    n = x1.size
    pairs = [(f, h) for f in x1.elements for h in x1.elements if g.d0(f) == g.d1(h)]
    F = np.array([f for f, _ in pairs], dtype=np.int64)
    H = np.array([h for _, h in pairs], dtype=np.int64)
    lookup = np.full(n * n, -1, dtype=np.int64)
    lookup[F * n + H] = np.arange(len(pairs))
    tables = {}
    for op, r in x1.signature.ops:
        t = x1.np_table(op)
        f_out = t[np.ix_(*([F] * r))]
        h_out = t[np.ix_(*([H] * r))]
        idx = lookup[f_out * n + h_out]
        if np.any(idx < 0):
            raise ValidationError("composable pairs are not closed; d0 or d1 is not a homomorphism")
        tables[op] = idx.reshape(-1).tolist()
    consts = {c: int(lookup[v * n + v]) for c, v in x1.consts.items()}
    return FiniteAlgebra(x1.signature, len(pairs), tables, consts, name=f"P({g.name})"), pairs


@dataclass(frozen=True, eq=False)
class CategoryStructure:
    graph: ReflexiveGraph
    pairs: tuple[tuple[int, int], ...]
    m: tuple[int, ...]

    def compose(self, f: int, h: int) -> int:
        return self.m[self._index[(f, h)]]

    @property
    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {p: i for i, p in enumerate(self.pairs)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def __eq__(self, other):
        return isinstance(other, CategoryStructure) and self.pairs == other.pairs and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def to_json(self):
        return {"m": [[f, h, v] for (f, h), v in zip(self.pairs, self.m)]}

    def validate(self) -> "CategoryStructure":
        g = self.graph
        for (f, h), v in zip(self.pairs, self.m):
            if g.d1(v) != g.d1(f) or g.d0(v) != g.d0(h):
                raise ValidationError(f"boundary law fails at ({f}, {h})")
        for f in g.X1.elements:
            if self.compose(f, g.s0(g.d0(f))) != f or self.compose(g.s0(g.d1(f)), f) != f:
                raise ValidationError(f"unit law fails at {f}")
        if _first_nonassociative(self) is not None:
            raise ValidationError("composition is not associative")
        return self


def _first_nonassociative(c: CategoryStructure):
    g = c.graph
    for f, h in c.pairs:
        for k in g.X1.elements:
            if g.d0(h) != g.d1(k):
                continue
            if c.compose(c.compose(f, h), k) != c.compose(f, c.compose(h, k)):
                return f, h, k
    return None


@dataclass
class CategoryResult:
    structures: list[CategoryStructure]
    truncated: bool = False
    rejected: int = 0  # candidates that failed associativity

    def __len__(self):
        return len(self.structures)

    def __iter__(self):
        return iter(self.structures)

    def __getitem__(self, i):
        return self.structures[i]


def enumerate_category_structures(g: ReflexiveGraph, budget: int = DEFAULT_BUDGET, strict: bool = False) -> CategoryResult:
    """All compositions m: P -> X1 that are homomorphisms and satisfy boundary, unit and associativity laws.

    Boundary and unit laws become per-cell domains; associativity is checked
    on ground triples after each candidate completes.
    """
    p, pairs = composable_pairs(g)
    x1 = g.X1
    by_bounds: dict[tuple[int, int], list[int]] = {}
    for a in x1.elements:
        by_bounds.setdefault((g.d0(a), g.d1(a)), []).append(a)
    index = {pr: i for i, pr in enumerate(pairs)}
    domains: dict[int, tuple[int, ...]] = {}
    for i, (f, h) in enumerate(pairs):
        domains[i] = tuple(by_bounds.get((g.d0(h), g.d1(f)), ()))

    def pin(i, value):
        allowed = domains[i]
        domains[i] = (value,) if value in allowed else ()

    for f in x1.elements:
        pin(index[(f, g.s0(g.d0(f)))], f)
        pin(index[(g.s0(g.d1(f)), f)], f)
    spec = MapSpec("m", 1, p.size, x1.size, domains)
    laws = [HomLaw(0, r, p.tables[op], x1.tables[op]) for op, r in p.signature.ops]
    forced = [(0, p.consts[c], x1.consts[c]) for c in p.signature.consts]
    search = Search([spec], laws, (), forced, budget=budget)
    found, rejected = [], 0
    for sol in search.solutions():
        c = CategoryStructure(g, tuple(pairs), tuple(sol[0]))
        if _first_nonassociative(c) is None:
            found.append(c)
        else:
            rejected += 1
    if search.truncated and strict:
        raise BudgetExhausted("category structure search exceeded its budget", partial=found)
    return CategoryResult(found, search.truncated, rejected)


# ---------------------------------------------------------- classification


@dataclass
class StructureClass:
    is_groupoid: bool
    graph_is_equivalence_relation: bool
    is_affine: bool | None = None

    def to_json(self):
        return {
            "is_groupoid": self.is_groupoid,
            "graph_is_equivalence_relation": self.graph_is_equivalence_relation,
            "is_affine": self.is_affine,
        }


def _inverse(c: CategoryStructure, f: int) -> int | None:
    g = c.graph
    for h in g.X1.elements:
        if g.d0(h) != g.d1(f) or g.d1(h) != g.d0(f):
            continue
        if c.compose(f, h) == g.s0(g.d1(f)) and c.compose(h, f) == g.s0(g.d0(f)):
            return h
    return None


def _is_equivalence(g: ReflexiveGraph) -> bool:
    pairs = [(g.d0(a), g.d1(a)) for a in g.X1.elements]
    rel = set(pairs)
    if len(rel) != len(pairs):
        return False
    elems = g.X0.elements
    if any((x, x) not in rel for x in elems):
        return False
    if any((b, a) not in rel for a, b in rel):
        return False
    return all((a, d) in rel for a, b in rel for c, d in rel if b == c)


def is_affine_groupoid(c: CategoryStructure) -> bool:
    """p(phi, chi, psi) = phi . chi^-1 . psi is symmetric in phi and psi on every hom-set."""
    g = c.graph
    inv = {f: _inverse(c, f) for f in g.X1.elements}
    if any(v is None for v in inv.values()):
        raise ValidationError("not a groupoid")
    homs: dict[tuple[int, int], list[int]] = {}
    for a in g.X1.elements:
        homs.setdefault((g.d0(a), g.d1(a)), []).append(a)
    for arrows in homs.values():
        for phi, chi, psi in iproduct(arrows, repeat=3):
            left = c.compose(c.compose(phi, inv[chi]), psi)
            right = c.compose(c.compose(psi, inv[chi]), phi)
            if left != right:
                return False
    return True


def classify_structure(c: CategoryStructure) -> StructureClass:
    groupoid = all(_inverse(c, f) is not None for f in c.graph.X1.elements)
    affine = is_affine_groupoid(c) if groupoid else None
    return StructureClass(groupoid, _is_equivalence(c.graph), affine)


def composition_oracle(g: ReflexiveGraph) -> tuple[int, ...] | None:
    """Relation composition, if the graph is a transitive relation; else None."""
    arrow = {(g.d0(a), g.d1(a)): a for a in g.X1.elements}
    if len(arrow) != g.X1.size:
        return None
    _, pairs = composable_pairs(g)
    out = []
    for f, h in pairs:
        key = (g.d0(h), g.d1(f))
        if key not in arrow:
            return None
        out.append(arrow[key])
    return tuple(out)
