"""Finite algebras on ``{0..n-1}`` and their homomorphisms.

Tables are flat row-major tuples: the entry for ``(x_1, ..., x_k)`` sits at
index ``x_1*n**(k-1) + ... + x_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product as iproduct
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import CapExceeded, CongruenceError, NotAHomomorphism, TableError, ValidationError
from .search import DEFAULT_BUDGET, EquationLaw, HomLaw, MapSpec, Search, compile_node
from .specs import Signature, VarietyPresentation

__all__ = [
    "FiniteAlgebra",
    "Homomorphism",
    "product",
    "subalgebra_closure",
    "subalgebra",
    "quotient",
    "enumerate_homs",
    "enumerate_models",
    "ModelStream",
    "canonical_form",
    "one_element",
]


class FiniteAlgebra:
    """An algebra on ``{0..size-1}``; immutable once built."""

    def __init__(
        self,
        signature: Signature,
        size: int,
        tables: Mapping[str, Sequence[int]],
        consts: Mapping[str, int] | None = None,
        name: str = "A",
    ):
        consts = dict(consts or {})
        if size < 0:
            raise ValidationError("size must be non-negative")
        if size == 0 and signature.consts:
            raise ValidationError("the empty algebra needs a constant-free signature")
        self.signature = signature
        self.size = size
        self.name = name
        self.tables: dict[str, tuple[int, ...]] = {}
        for op, arity in signature.ops:
            if op not in tables:
                raise TableError(f"missing table for {op!r}")
            t = tuple(int(x) for x in tables[op])
            if len(t) != size**arity:
                raise TableError(f"table {op!r} has length {len(t)}, expected {size}^{arity} = {size**arity}")
            for x in t:
                if not 0 <= x < size:
                    raise TableError(f"table {op!r} entry {x} out of range for size {size}")
            self.tables[op] = t
        extra = set(tables) - set(signature.op_names)
        if extra:
            raise TableError(f"tables for unknown operations {sorted(extra)}")
        self.consts: dict[str, int] = {}
        for c in signature.consts:
            if c not in consts:
                raise TableError(f"missing value for constant {c!r}")
            if not 0 <= consts[c] < size:
                raise TableError(f"constant {c!r} = {consts[c]} out of range for size {size}")
            self.consts[c] = int(consts[c])
        extra = set(consts) - set(signature.consts)
        if extra:
            raise TableError(f"values for unknown constants {sorted(extra)}")

    # identity ignores the display name
    def _key(self):
        return (self.signature, self.size, tuple(self.tables[o] for o in self.signature.op_names),
                tuple(self.consts[c] for c in self.signature.consts))

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, size={self.size}, ops={list(self.signature.op_names)})"

    def renamed(self, name: str) -> "FiniteAlgebra":
        return FiniteAlgebra(self.signature, self.size, self.tables, self.consts, name=name)

    def op(self, name: str, *args: int) -> int:
        idx = 0
        for x in args:
            idx = idx * self.size + x
        return self.tables[name][idx]

    @cached_property
    def offsets(self) -> dict[str, int]:
        out, pos = {}, 0
        for op, arity in self.signature.ops:
            out[op] = pos
            pos += self.size**arity
        return out

    @cached_property
    def flat_tables(self):
        buf = kernels.int_buffer()
        for op in self.signature.op_names:
            buf.extend(self.tables[op])
        return buf

    @cached_property
    def buffers(self) -> dict:
        return {op: kernels.int_buffer(self.tables[op]) for op in self.signature.op_names}

    def np_table(self, op: str) -> np.ndarray:
        arity = self.signature.arity(op)
        return np.asarray(self.tables[op], dtype=np.int64).reshape((self.size,) * arity)

    @property
    def elements(self) -> range:
        return range(self.size)


def one_element(signature: Signature, name: str = "1") -> FiniteAlgebra:
    return FiniteAlgebra(
        signature, 1, {op: (0,) for op in signature.op_names}, {c: 0 for c in signature.consts}, name=name
    )


# ------------------------------------------------------------- homomorphisms


def _check_compatible(dom: FiniteAlgebra, cod: FiniteAlgebra, mapping: Sequence[int]) -> str | None:
    if dom.signature != cod.signature:
        return "signature mismatch"
    if len(mapping) != dom.size:
        return f"map has length {len(mapping)}, expected {dom.size}"
    for x in mapping:
        if not 0 <= x < cod.size:
            return f"map value {x} out of range"
    for c in dom.signature.consts:
        if mapping[dom.consts[c]] != cod.consts[c]:
            return f"constant {c!r} not preserved"
    vals = kernels.int_buffer(mapping)
    coords = kernels.row_coords(dom.size, 1)
    for op, arity in dom.signature.ops:
        code = kernels.hom_check_full(
            vals, dom.size, 1, cod.size, dom.buffers[op], cod.buffers[op], arity, coords
        )
        if code >= 0:
            args = []
            for _ in range(arity):
                args.append(code % dom.size)
                code //= dom.size
            return f"operation {op!r} not preserved at {tuple(reversed(args))}"
    return None


@dataclass(frozen=True, eq=False)
class Homomorphism:
    dom: FiniteAlgebra
    cod: FiniteAlgebra
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(x) for x in self.map))
        problem = _check_compatible(self.dom, self.cod, self.map)
        if problem:
            raise NotAHomomorphism(problem)

    def __call__(self, x: int) -> int:
        return self.map[x]

    def __eq__(self, other):
        return (
            isinstance(other, Homomorphism)
            and self.map == other.map
            and self.dom == other.dom
            and self.cod == other.cod
        )

    def __hash__(self):
        return hash(self.map)

    def __repr__(self):
        return f"Homomorphism({self.dom.name} -> {self.cod.name}, {list(self.map)})"

    def then(self, g: "Homomorphism") -> "Homomorphism":
        """``g . self``."""
        if g.dom != self.cod:
            raise ValidationError("maps are not composable")
        return Homomorphism(self.dom, g.cod, tuple(g.map[x] for x in self.map))

    @classmethod
    def identity(cls, a: FiniteAlgebra) -> "Homomorphism":
        return cls(a, a, tuple(range(a.size)))

    @property
    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    @property
    def is_surjective(self) -> bool:
        return set(self.map) == set(range(self.cod.size))

    def image(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.map)))

    def to_json(self):
        return list(self.map)


def is_homomorphism(dom: FiniteAlgebra, cod: FiniteAlgebra, mapping: Sequence[int]) -> bool:
    return _check_compatible(dom, cod, mapping) is None


# ------------------------------------------------------------------ products


def _pair_table(ta: np.ndarray, tb: np.ndarray, na: int, nb: int, arity: int) -> np.ndarray:
    n = na * nb
    grids = np.meshgrid(*([np.arange(n)] * arity), indexing="ij")
    ia = np.zeros(grids[0].shape, dtype=np.int64)
    ib = np.zeros(grids[0].shape, dtype=np.int64)
    for g in grids:
        ia = ia * na + g // nb
        ib = ib * nb + g % nb
    return ta.reshape(-1)[ia] * nb + tb.reshape(-1)[ib]


def product(factors: Sequence[FiniteAlgebra], name: str | None = None) -> tuple[FiniteAlgebra, list[Homomorphism]]:
    """Direct product with mixed-radix encoding (first factor most significant)."""
    if not factors:
        raise ValidationError("product of an empty family")
    sig = factors[0].signature
    for f in factors:
        if f.signature != sig:
            raise ValidationError(f"signature mismatch between {factors[0].name!r} and {f.name!r}")
    sizes = [f.size for f in factors]
    total = int(np.prod(sizes)) if sizes else 1
    tables = {}
    for op, arity in sig.ops:
        acc = np.asarray(factors[0].tables[op], dtype=np.int64)
        n_acc = factors[0].size
        for f in factors[1:]:
            acc = _pair_table(acc, np.asarray(f.tables[op], dtype=np.int64), n_acc, f.size, arity)
            n_acc *= f.size
        tables[op] = tuple(int(x) for x in acc.reshape(-1))
    consts = {}
    for c in sig.consts:
        v = 0
        for f in factors:
            v = v * f.size + f.consts[c]
        consts[c] = v
    label = name or "x".join(f.name for f in factors)
    p = FiniteAlgebra(sig, total, tables, consts, name=label)
    projections = []
    stride = total
    for f in factors:
        stride //= f.size
        projections.append(Homomorphism(p, f, tuple((x // stride) % f.size for x in range(total))))
    return p, projections


def encode(coords: Sequence[int], sizes: Sequence[int]) -> int:
    v = 0
    for x, n in zip(coords, sizes):
        v = v * n + x
    return v


def decode(x: int, sizes: Sequence[int]) -> tuple[int, ...]:
    out = []
    for n in reversed(sizes):
        out.append(x % n)
        x //= n
    return tuple(reversed(out))


# --------------------------------------------------------------- subalgebras


def subalgebra_closure(a: FiniteAlgebra, seed: Iterable[int]) -> tuple[int, ...]:
    """Least subset containing ``seed`` and the constants, closed under every operation."""
    current = set(int(x) for x in seed) | set(a.consts.values())
    for x in current:
        if not 0 <= x < a.size:
            raise ValidationError(f"seed element {x} out of range")
    frontier = set(current)
    while frontier:
        found = set()
        elems = sorted(current)
        for op, arity in a.signature.ops:
            table = a.tables[op]
            for args in iproduct(elems, repeat=arity):
                if frontier.isdisjoint(args):
                    continue
                idx = 0
                for x in args:
                    idx = idx * a.size + x
                y = table[idx]
                if y not in current:
                    found.add(y)
        current |= found
        frontier = found
    return tuple(sorted(current))


def subalgebra(a: FiniteAlgebra, elements: Iterable[int], name: str | None = None) -> tuple[FiniteAlgebra, Homomorphism]:
    """The subalgebra on a closed subset, relabeled in increasing order, with its inclusion."""
    elems = sorted(set(elements))
    if tuple(elems) != subalgebra_closure(a, elems):
        raise ValidationError("subset is not closed under the operations")
    index = {x: i for i, x in enumerate(elems)}
    m = len(elems)
    tables = {}
    for op, arity in a.signature.ops:
        tables[op] = tuple(index[a.op(op, *(elems[i] for i in args))] for args in iproduct(range(m), repeat=arity))
    consts = {c: index[v] for c, v in a.consts.items()}
    sub = FiniteAlgebra(a.signature, m, tables, consts, name=name or f"{a.name}|{len(elems)}")
    return sub, Homomorphism(sub, a, tuple(elems))


def quotient(a: FiniteAlgebra, c) -> tuple[FiniteAlgebra, Homomorphism]:
    """Quotient by a congruence; classes labeled by order of least representative."""
    rep = tuple(c.rep)
    if len(rep) != a.size:
        raise CongruenceError("congruence carrier does not match the algebra")
    reps = sorted(set(rep))
    label = {r: i for i, r in enumerate(reps)}
    proj = tuple(label[rep[x]] for x in range(a.size))
    k = len(reps)
    tables = {}
    for op, arity in a.signature.ops:
        t = [-1] * (k**arity)
        for args in iproduct(range(a.size), repeat=arity):
            idx = 0
            for x in args:
                idx = idx * k + proj[x]
            y = proj[a.op(op, *args)]
            if t[idx] < 0:
                t[idx] = y
            elif t[idx] != y:
                raise CongruenceError(f"partition is not compatible with {op!r}")
        tables[op] = tuple(t)
    consts = {name: proj[v] for name, v in a.consts.items()}
    q = FiniteAlgebra(a.signature, k, tables, consts, name=f"{a.name}/~")
    return q, Homomorphism(a, q, proj)


# ----------------------------------------------------------- hom enumeration


def hom_search(
    dom: FiniteAlgebra,
    cod: FiniteAlgebra,
    only_bijective: bool = False,
    domains: dict[int, tuple[int, ...]] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Search:
    """A search for maps ``dom -> cod`` commuting with every operation."""
    if dom.signature != cod.signature:
        raise ValidationError("signature mismatch")
    spec = MapSpec("h", 1, dom.size, cod.size, dict(domains or {}), injective=only_bijective)
    laws = [HomLaw(0, arity, dom.tables[op], cod.tables[op]) for op, arity in dom.signature.ops]
    forced = [(0, dom.consts[c], cod.consts[c]) for c in dom.signature.consts]
    return Search([spec], laws, (), forced, budget=budget)


def enumerate_homs(
    a: FiniteAlgebra, b: FiniteAlgebra, only_bijective: bool = False, budget: int = DEFAULT_BUDGET
) -> list[Homomorphism]:
    """All homomorphisms ``a -> b`` in lexicographic order of their map arrays."""
    if only_bijective and a.size != b.size:
        if a.signature != b.signature:
            raise ValidationError("signature mismatch")
        return []
    s = hom_search(a, b, only_bijective, budget=budget)
    out = [Homomorphism(a, b, sol[0]) for sol in s.solutions()]
    if s.truncated:
        from .errors import BudgetExhausted

        raise BudgetExhausted(f"homomorphism search exceeded {budget} nodes", partial=out)
    return out


def brute_force_homs(a: FiniteAlgebra, b: FiniteAlgebra) -> list[tuple[int, ...]]:
    """Filter of all ``b.size**a.size`` maps; test oracle."""
    return [m for m in iproduct(range(b.size), repeat=a.size) if is_homomorphism(a, b, m)]


# --------------------------------------------------------- model enumeration


class ModelStream:
    """Iterator over models; ``truncated`` is set once the budget stops it."""

    def __init__(self, v: VarietyPresentation, n: int, budget: int, pins: Mapping[str, int] | None, canonical: bool):
        if n < 0:
            raise ValidationError("size must be non-negative")
        if budget <= 0:
            raise ValidationError("budget must be positive")
        self.variety = v
        self.size = n
        self.budget = budget
        self.pins = dict(v.pins)
        self.pins.update(pins or {})
        self.canonical = canonical
        self.truncated = False
        self.nodes = 0
        self.count = 0

    def __iter__(self) -> Iterator[FiniteAlgebra]:
        v, n = self.variety, self.size
        sig = v.signature
        if n == 0 and sig.consts:
            return
        maps, index = [], {}
        for c in sig.consts:
            index[c] = len(maps)
            dom = {0: (self.pins[c],)} if c in self.pins else {}
            maps.append(MapSpec(c, 0, n, n, dom))
        for op, arity in sig.ops:
            index[op] = len(maps)
            maps.append(MapSpec(op, arity, n, n))
        laws = []
        for eq in v.equations:
            names = eq.variables
            slots = {x: i for i, x in enumerate(names)}
            laws.append(EquationLaw(compile_node(eq.lhs, index, slots), compile_node(eq.rhs, index, slots), len(names), n))
        search = Search(maps, (), laws, (), budget=self.budget)
        seen = set()
        for sol in search.solutions():
            consts = {c: sol[index[c]][0] for c in sig.consts}
            tables = {op: sol[index[op]] for op in sig.op_names}
            alg = FiniteAlgebra(sig, n, tables, consts, name=f"{v.name}#{self.count}")
            if self.canonical:
                key = canonical_form(alg)._key()
                if key in seen:
                    continue
                seen.add(key)
            self.count += 1
            yield alg
        self.nodes = search.nodes
        self.truncated = search.truncated


def enumerate_models(
    v: VarietyPresentation,
    n: int,
    budget: int = DEFAULT_BUDGET,
    pins: Mapping[str, int] | None = None,
    canonical: bool = False,
) -> ModelStream:
    """Every algebra of size ``n`` satisfying ``v``, in lexicographic table order.

    The order key is: constants (declaration order), then operation tables by
    increasing arity.  ``pins`` fixes constants (on top of pins declared in the
    presentation).  With ``canonical`` only the first model of each
    isomorphism class is kept.
    """
    return ModelStream(v, n, budget, pins, canonical)


def relabel(a: FiniteAlgebra, perm: Sequence[int]) -> FiniteAlgebra:
    """Image of ``a`` under the bijection ``x -> perm[x]``."""
    inv = [0] * a.size
    for x, y in enumerate(perm):
        inv[y] = x
    tables = {}
    for op, arity in a.signature.ops:
        tables[op] = tuple(perm[a.op(op, *(inv[y] for y in args))] for args in iproduct(range(a.size), repeat=arity))
    return FiniteAlgebra(a.signature, a.size, tables, {c: perm[v] for c, v in a.consts.items()}, name=a.name)


def canonical_form(a: FiniteAlgebra, max_size: int = 6) -> FiniteAlgebra:
    """Lexicographically least relabeling (brute force over all permutations)."""
    if a.size > max_size:
        raise CapExceeded(f"canonical form is brute force; size {a.size} > {max_size}")
    best = None
    for perm in permutations(range(a.size)):
        b = relabel(a, perm)
        key = b._key()
        if best is None or key < best[0]:
            best = (key, b)
    return best[1] if best else a
