"""Internal algebraic structures on finite algebras and crystallography verdicts.

An internal S-structure on ``A`` is a family of operations ``A^k -> A`` that
are homomorphisms for every ambient operation and satisfy the equations of
S.  A constant of S is an element idempotent under every ambient operation
and equal to every ambient constant (a map from the terminal algebra).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from . import kernels
from .algebra import FiniteAlgebra, Homomorphism, hom_search, product, subalgebra
from .errors import (
    BudgetExhausted,
    CapExceeded,
    MultipleCooperators,
    NotAHomomorphism,
    ValidationError,
)
from .search import DEFAULT_BUDGET, EquationLaw, HomLaw, MapSpec, Search, compile_node
from .specs import App, Const, Equation, Signature, Var, VarietyPresentation, check_identities, parse_variety

__all__ = [
    "StructureSpec",
    "InternalStructure",
    "InternalResult",
    "STRUCTURE_NAMES",
    "builtin_structure",
    "unit_candidates",
    "enumerate_internal",
    "brute_force_internal",
    "cooperator",
    "classify_object",
    "subtraction_to_group",
    "dual_structure",
    "crystallography_report",
    "Verdict",
]

BRUTE_FORCE_CAP = 2_000_000


@dataclass(frozen=True)
class StructureSpec:
    name: str
    signature: Signature
    equations: tuple[Equation, ...]
    duality: str | None = None  # "swap" binary args, or "reverse" ternary args

    @classmethod
    def from_presentation(cls, v: VarietyPresentation, name: str | None = None, duality=None) -> "StructureSpec":
        return cls(name or v.name, v.signature, tuple(v.equations), duality)

    @property
    def order(self) -> list[str]:
        """Symbols in search order: constants, then operations by arity."""
        ops = sorted(range(len(self.signature.ops)), key=lambda i: (self.signature.ops[i][1], i))
        return list(self.signature.consts) + [self.signature.ops[i][0] for i in ops]

    def arity(self, name: str) -> int:
        return self.signature.arity(name)


_MAGMA = "op add/2; const 0; eq add(x, 0) = x; eq add(0, x) = x;"
_GROUP = (
    "op mul/2; op inv/1; const e; eq mul(mul(x, y), z) = mul(x, mul(y, z)); eq mul(e, x) = x; "
    "eq mul(x, e) = x; eq mul(inv(x), x) = e; eq mul(x, inv(x)) = e;"
)
_MALTSEV = "op p/3; eq p(x, y, y) = x; eq p(y, y, x) = x;"
_ASSOC3 = "eq p(x, y, p(z, u, v)) = p(p(x, y, z), u, v);"

_BUILTIN_TEXT = {
    "unitary-magma": (_MAGMA, "swap"),
    "idempotent-unitary-magma": (_MAGMA + " eq add(x, x) = x;", "swap"),
    "commutative-monoid": (_MAGMA + " eq add(add(x, y), z) = add(x, add(y, z)); eq add(x, y) = add(y, x);", "swap"),
    "group": (_GROUP, "swap"),
    "abelian-group": (_GROUP + " eq mul(x, y) = mul(y, x);", "swap"),
    "subtraction": ("op s/2; const 0; eq s(x, x) = 0; eq s(x, 0) = x;", None),
    "opimplicative-subtraction": ("op s/2; const 0; eq s(x, x) = 0; eq s(x, 0) = x; eq s(0, x) = 0;", None),
    "implicative-opsubtraction": ("op s/2; const 0; eq s(x, x) = 0; eq s(0, x) = x; eq s(x, 0) = 0;", None),
    "implication-algebra": (
        "op i/2; const 1; eq i(x, x) = 1; eq i(i(x, y), x) = x; eq i(i(x, y), y) = i(i(y, x), x); "
        "eq i(x, i(y, z)) = i(y, i(x, z));",
        None,
    ),
    "maltsev": (_MALTSEV, "reverse"),
    "associative-maltsev": (_MALTSEV + " " + _ASSOC3, "reverse"),
    "affine": (_MALTSEV + " " + _ASSOC3 + " eq p(x, y, z) = p(z, y, x);", "reverse"),
    "pixley-maltsev": (_MALTSEV + " eq p(x, y, x) = x;", "reverse"),
}

STRUCTURE_NAMES = tuple(_BUILTIN_TEXT)


@lru_cache(maxsize=None)
def builtin_structure(name: str) -> StructureSpec:
    try:
        body, duality = _BUILTIN_TEXT[name]
    except KeyError:
        raise ValidationError(f"unknown structure {name!r}; known: {', '.join(STRUCTURE_NAMES)}") from None
    v = parse_variety(f"variety S {{ {body} }}")
    return StructureSpec(name, v.signature, tuple(v.equations), duality)


# ------------------------------------------------------------------ results


@dataclass(frozen=True, eq=False)
class InternalStructure:
    base: FiniteAlgebra
    spec: StructureSpec
    tables: dict
    consts: dict

    def key(self) -> tuple:
        out = []
        for sym in self.spec.order:
            out.extend((self.consts[sym],) if sym in self.consts else self.tables[sym])
        return tuple(out)

    def __eq__(self, other):
        return (
            isinstance(other, InternalStructure)
            and self.spec.name == other.spec.name
            and self.base == other.base
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash((self.spec.name, self.key()))

    def __repr__(self):
        return f"InternalStructure({self.spec.name} on {self.base.name}, {self.to_json()})"

    def op(self, name: str, *args: int) -> int:
        idx = 0
        for x in args:
            idx = idx * self.base.size + x
        return self.tables[name][idx]

    def as_algebra(self) -> FiniteAlgebra:
        return FiniteAlgebra(self.spec.signature, self.base.size, self.tables, self.consts, name=self.spec.name)

    def to_json(self):
        out = {op: list(self.tables[op]) for op in self.spec.signature.op_names}
        out.update({c: self.consts[c] for c in self.spec.signature.consts})
        return out

    def validate(self) -> "InternalStructure":
        """Full re-check: unit constants, homomorphism property, equations."""
        a = self.base
        units = unit_candidates(a)
        for c in self.spec.signature.consts:
            if self.consts.get(c) not in units:
                raise NotAHomomorphism(f"constant {c!r} = {self.consts.get(c)} is not a unit candidate")
        n = a.size
        for op, k in self.spec.signature.ops:
            vals = kernels.int_buffer(self.tables[op])
            if len(vals) != n**k:
                raise ValidationError(f"table {op!r} has the wrong length")
            coords = kernels.row_coords(n, k)
            for w, r in a.signature.ops:
                code = kernels.hom_check_full(vals, n, k, n, a.buffers[w], a.buffers[w], r, coords)
                if code >= 0:
                    raise NotAHomomorphism(f"{op!r} does not commute with ambient {w!r}")
            for c in a.signature.consts:
                e = a.consts[c]
                row = sum(e * n**i for i in range(k))
                if vals[row] != e:
                    raise NotAHomomorphism(f"{op!r} does not preserve ambient constant {c!r}")
        report = check_identities(self.as_algebra(), self.spec.equations, limit=1)
        if not report.satisfied:
            raise ValidationError(f"equation {report.violations[0].equation} fails")
        return self


@dataclass
class InternalResult:
    structures: list[InternalStructure]
    truncated: bool = False
    nodes: int = 0

    def __len__(self):
        return len(self.structures)

    def __iter__(self):
        return iter(self.structures)

    def __getitem__(self, i):
        return self.structures[i]


def unit_candidates(a: FiniteAlgebra) -> tuple[int, ...]:
    """Elements idempotent under every operation and equal to every constant."""
    out = []
    for e in range(a.size):
        if any(v != e for v in a.consts.values()):
            continue
        if all(a.op(op, *([e] * k)) == e for op, k in a.signature.ops):
            out.append(e)
    return tuple(out)


# ------------------------------------------------------------- enumeration


def _is_projection(table: Sequence[int], n: int, r: int) -> bool:
    """True when the r-ary table returns one fixed argument.

    Every map commutes with a projection, so such a law never prunes.
    """
    for i in range(r):
        place = n ** (r - 1 - i)
        if all(v == (row // place) % n for row, v in enumerate(table)):
            return True
    return False


def _search(a: FiniteAlgebra, s: StructureSpec, budget: int) -> tuple[Search, list[str]]:
    n = a.size
    order = s.order
    index = {sym: i for i, sym in enumerate(order)}
    units = unit_candidates(a)
    maps, laws, forced = [], [], []
    for sym in order:
        k = s.arity(sym)
        i = len(maps)
        if k == 0:
            maps.append(MapSpec(sym, 0, n, n, {0: units}))
            continue
        maps.append(MapSpec(sym, k, n, n))
        for w, r in a.signature.ops:
            if not _is_projection(a.tables[w], n, r):
                laws.append(HomLaw(i, r, a.tables[w], a.tables[w]))
        for c in a.signature.consts:
            e = a.consts[c]
            forced.append((i, sum(e * n**j for j in range(k)), e))
    eqs = []
    for eq in s.equations:
        names = eq.variables
        slots = {x: j for j, x in enumerate(names)}
        eqs.append(EquationLaw(compile_node(eq.lhs, index, slots), compile_node(eq.rhs, index, slots), len(names), n))
    return Search(maps, laws, eqs, forced, budget=budget), order


def _structure(a, s, order, sol) -> InternalStructure:
    tables, consts = {}, {}
    for sym, cells in zip(order, sol):
        if s.arity(sym) == 0:
            consts[sym] = cells[0]
        else:
            tables[sym] = tuple(cells)
    return InternalStructure(a, s, tables, consts)


def enumerate_internal(
    a: FiniteAlgebra, s: StructureSpec | str, budget: int = DEFAULT_BUDGET, strict: bool = False
) -> InternalResult:
    """All internal ``s``-structures on ``a``, sorted by concatenated tables.

    Constants come first in the order key, then operations by arity.  When
    the node budget runs out the partial list is returned with ``truncated``
    set; with ``strict`` a :class:`BudgetExhausted` is raised instead.
    """
    if isinstance(s, str):
        s = builtin_structure(s)
    if budget <= 0:
        raise ValidationError("budget must be positive")
    search, order = _search(a, s, budget)
    found = [_structure(a, s, order, sol) for sol in search.solutions()]
    if search.truncated and strict:
        raise BudgetExhausted(f"internal {s.name} search on {a.name} exceeded {budget} nodes", partial=found)
    return InternalResult(found, search.truncated, search.nodes)


# ------------------------------------------------------------ brute force


def _simple_pins(s: StructureSpec, n: int, consts: dict) -> dict | None:
    """Cells forced by equations of the form op(vars/consts) = var/const.

    Returns ``{(op, row): value}`` or ``None`` on a conflict.
    """
    pins: dict = {}

    def atom(t, env):
        return env[t.name] if isinstance(t, Var) else consts[t.name]

    for eq in s.equations:
        for app, other in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
            if not isinstance(app, App) or isinstance(other, App):
                continue
            if any(isinstance(x, App) for x in app.args):
                continue
            names = eq.variables
            for values in iproduct(range(n), repeat=len(names)):
                env = dict(zip(names, values))
                row = 0
                for x in app.args:
                    row = row * n + atom(x, env)
                val = atom(other, env)
                if pins.setdefault((app.op, row), val) != val:
                    return None
            break
    return pins


def _eval_batch(t, cand, layout, n, grids):
    if isinstance(t, Var):
        return grids[t.name]
    off, k = layout[t.name if isinstance(t, Const) else t.op]
    if isinstance(t, Const):
        return np.broadcast_to(cand[:, off][:, None], (cand.shape[0], grids["#"]))
    row = 0
    for x in t.args:
        row = row * n + _eval_batch(x, cand, layout, n, grids)
    row = np.broadcast_to(row, (cand.shape[0], grids["#"]))
    return np.take_along_axis(cand[:, off : off + n**k], row, axis=1)


def _hom_instances(n: int, k: int, w: Sequence[int], r: int):
    """(rows, lhs_row) for every r-tuple of rows of A^k; shuffled for early rejection."""
    rows = np.array(list(iproduct(range(n**k), repeat=r)), dtype=np.int64).reshape(-1, r)
    if rows.size == 0:
        return rows, np.zeros(0, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    lhs = np.zeros(len(rows), dtype=np.int64)
    for i in range(k):
        place = n ** (k - 1 - i)
        idx = np.zeros(len(rows), dtype=np.int64)
        for j in range(r):
            idx = idx * n + (rows[:, j] // place) % n
        lhs = lhs * n + w[idx]
    perm = np.random.default_rng(0).permutation(len(rows))
    return rows[perm], lhs[perm]


def brute_force_internal(a: FiniteAlgebra, s: StructureSpec | str, cap: int = BRUTE_FORCE_CAP) -> list[InternalStructure]:
    """Exhaustive filter over every table completion; an oracle for small inputs.

    Cells forced by simple identities (such as ``p(x, y, y) = x``) are fixed
    first; everything else is enumerated and filtered with numpy.
    """
    if isinstance(s, str):
        s = builtin_structure(s)
    n = a.size
    order = s.order
    layout, pos = {}, 0
    for sym in order:
        k = s.arity(sym)
        layout[sym] = (pos, k)
        pos += 1 if k == 0 else n**k
    width = pos
    units = unit_candidates(a)
    const_syms = [c for c in order if s.arity(c) == 0]
    homs = [
        (layout[op][0], k, np.asarray(a.tables[w], dtype=np.int64), r, *_hom_instances(n, k, a.tables[w], r))
        for op, k in s.signature.ops
        for w, r in a.signature.ops
        if not _is_projection(a.tables[w], n, r)
    ]
    ambient_consts = [(layout[op][0] + sum(a.consts[c] * n**j for j in range(k)), a.consts[c])
                      for op, k in s.signature.ops for c in a.signature.consts]
    eq_grids = []
    for eq in s.equations:
        names = eq.variables
        m = n ** len(names)
        codes = np.arange(m, dtype=np.int64)
        grids = {"#": m}
        for i, name in enumerate(names):
            grids[name] = ((codes // n ** (len(names) - 1 - i)) % n)[None, :]
        eq_grids.append(grids)

    found = []
    for choice in iproduct(units, repeat=len(const_syms)):
        consts = dict(zip(const_syms, choice))
        pins = _simple_pins(s, n, consts)
        if pins is None:
            continue
        fixed = np.full(width, -1, dtype=np.int32)
        for c, v in consts.items():
            fixed[layout[c][0]] = v
        for (op, row), v in pins.items():
            fixed[layout[op][0] + row] = v
        free = np.flatnonzero(fixed < 0)
        total = n ** len(free)
        if total > cap:
            raise CapExceeded(f"{total} completions exceed the brute-force cap of {cap}")
        block = 1 << 16
        for start in range(0, total, block):
            codes = np.arange(start, min(total, start + block), dtype=np.int64)
            cand = np.repeat(fixed[None, :], len(codes), axis=0)
            for i, col in enumerate(free):
                cand[:, col] = (codes // n ** (len(free) - 1 - i)) % n
            for cell, v in ambient_consts:
                cand = cand[cand[:, cell] == v]
            for off, k, w, r, rows, lhs_rows in homs:
                step = 8
                i = 0
                while i < len(rows) and len(cand):
                    rr, ll = rows[i : i + step], lhs_rows[i : i + step]
                    idx = np.zeros((len(cand), len(rr)), dtype=np.int32)
                    for j in range(r):
                        idx = idx * n + cand[:, off + rr[:, j]]
                    cand = cand[np.all(cand[:, off + ll] == w[idx], axis=1)]
                    i += step
                    step = min(step * 2, max(64, 4_000_000 // max(1, len(cand))))
            for eq, grids in zip(s.equations, eq_grids):
                if len(cand) == 0:
                    break
                lhs = _eval_batch(eq.lhs, cand, layout, n, grids)
                rhs = _eval_batch(eq.rhs, cand, layout, n, grids)
                cand = cand[np.all(lhs == rhs, axis=1)]
            for row in cand:
                sol = []
                for sym in order:
                    off, k = layout[sym]
                    sol.append(tuple(int(x) for x in row[off : off + (1 if k == 0 else n**k)]))
                found.append(_structure(a, s, order, sol))
    found.sort(key=InternalStructure.key)
    return found


# ------------------------------------------------------------- cooperators


def _inclusion(a: FiniteAlgebra, u) -> Homomorphism:
    if isinstance(u, Homomorphism):
        if u.cod != a:
            raise ValidationError("inclusion does not land in the algebra")
        if not u.is_injective:
            raise ValidationError("subobject map is not injective")
        return u
    return subalgebra(a, u)[1]


def cooperator(a: FiniteAlgebra, u, v, budget: int = DEFAULT_BUDGET) -> Homomorphism | None:
    """The homomorphism ``phi: U x V -> A`` with ``phi(x, 0) = u(x)`` and ``phi(0, y) = v(y)``.

    ``u`` and ``v`` are inclusions or closed element sets.  Returns ``None``
    when no such map exists; two or more raise :class:`MultipleCooperators`.
    """
    if not a.signature.is_pointed:
        raise ValidationError("cooperators need a pointed signature (exactly one constant named 0)")
    iu, iv = _inclusion(a, u), _inclusion(a, v)
    U, V = iu.dom, iv.dom
    p, _ = product([U, V])
    zu, zv = U.consts["0"], V.consts["0"]
    domains = {}
    for x in U.elements:
        domains[x * V.size + zv] = (iu(x),)
    for y in V.elements:
        domains[zu * V.size + y] = (iv(y),)
    search = hom_search(p, a, domains=domains, budget=budget)
    found = []
    for sol in search.solutions():
        found.append(Homomorphism(p, a, sol[0]))
        if len(found) > 1:
            raise MultipleCooperators(found)
    if search.truncated:
        raise BudgetExhausted("cooperator search exceeded its budget", partial=found)
    return found[0] if found else None


@dataclass
class ObjectClass:
    commutative: bool
    abelian: bool
    monoid: InternalStructure | None = None
    group: InternalStructure | None = None

    def to_json(self):
        return {
            "commutative": self.commutative,
            "abelian": self.abelian,
            "monoid": self.monoid.to_json() if self.monoid else None,
            "group": self.group.to_json() if self.group else None,
        }


def classify_object(a: FiniteAlgebra, budget: int = DEFAULT_BUDGET) -> ObjectClass:
    """Commutative iff the identity has a cooperator with itself; abelian if that monoid is a group."""
    ident = Homomorphism.identity(a)
    phi = cooperator(a, ident, ident, budget)
    if phi is None:
        return ObjectClass(False, False)
    zero = a.consts["0"]
    monoid = InternalStructure(a, builtin_structure("commutative-monoid"), {"add": phi.map}, {"0": zero}).validate()
    inverse = []
    for x in a.elements:
        ys = [y for y in a.elements if phi.map[x * a.size + y] == zero]
        if not ys:
            return ObjectClass(True, False, monoid)
        inverse.append(ys[0])
    group = InternalStructure(
        a, builtin_structure("abelian-group"), {"mul": phi.map, "inv": tuple(inverse)}, {"e": zero}
    ).validate()
    return ObjectClass(True, True, monoid, group)


@dataclass
class GroupRecovery:
    group: InternalStructure | None
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.group is not None


def subtraction_to_group(a: FiniteAlgebra, st: InternalStructure) -> GroupRecovery:
    """x + y := s(x, s(0, y)), -y := s(0, y); checked to be an abelian group with s(x, y) = x + (-y)."""
    if st.spec.signature.op_names != ("s",) or st.spec.signature.consts != ("0",):
        raise ValidationError("expected a structure with one binary s and constant 0")
    n = a.size
    zero = st.consts["0"]
    neg = tuple(st.op("s", zero, y) for y in range(n))
    add = tuple(st.op("s", x, neg[y]) for x in range(n) for y in range(n))
    g = InternalStructure(a, builtin_structure("abelian-group"), {"mul": add, "inv": neg}, {"e": zero})
    try:
        g.validate()
    except ValidationError as exc:
        return GroupRecovery(None, str(exc))
    for x in range(n):
        for y in range(n):
            if st.op("s", x, y) != add[x * n + neg[y]]:
                return GroupRecovery(None, f"s({x}, {y}) differs from x + (-y)")
    return GroupRecovery(g)


def dual_structure(st: InternalStructure) -> InternalStructure:
    """Argument-reversed structure (binary swap or ternary reversal)."""
    mode = st.spec.duality
    if mode is None:
        raise ValidationError(f"structure {st.spec.name!r} is not closed under duality")
    n = st.base.size
    tables = {}
    for op, k in st.spec.signature.ops:
        if k == 1:
            tables[op] = st.tables[op]
            continue
        if (mode == "swap" and k != 2) or (mode == "reverse" and k != 3):
            raise ValidationError(f"duality {mode!r} does not apply to arity {k}")
        tables[op] = tuple(st.op(op, *reversed(args)) for args in iproduct(range(n), repeat=k))
    return InternalStructure(st.base, st.spec, tables, dict(st.consts)).validate()


# ---------------------------------------------------------------- verdicts


class Verdict:
    REFUTED = "REFUTED"
    INCONCLUSIVE = "INCONCLUSIVE"
    INTENSIVELY = "INTENSIVELY"
    STRONGLY_TRIVIALIZES = "STRONGLY_TRIVIALIZES"
    TRIVIALIZES = "TRIVIALIZES"
    WEAKLY_TRIVIALIZES = "WEAKLY_TRIVIALIZES"
    CRYSTALLOGRAPHIC = "CRYSTALLOGRAPHIC"


@dataclass
class SampleResult:
    name: str
    size: int
    structures: list[InternalStructure]
    truncated: bool = False

    @property
    def count(self) -> int:
        return len(self.structures)

    def to_json(self):
        return {
            "name": self.name,
            "size": self.size,
            "count": self.count,
            "structures": [st.to_json() for st in self.structures],
            "truncated": self.truncated,
        }


@dataclass
class Report:
    spec: str
    samples: list[SampleResult]
    verdict: str
    witness: dict | None = field(default=None)

    def to_json(self):
        out = {"spec": self.spec, "samples": [r.to_json() for r in self.samples], "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def decide(results: Sequence[SampleResult]) -> tuple[str, dict | None]:
    """Strongest sample-relative verdict.  Order matters: refutation, then truncation."""
    for r in results:
        if r.count >= 2:
            return Verdict.REFUTED, {
                "sample": r.name,
                "structures": [r.structures[0].to_json(), r.structures[1].to_json()],
            }
    if any(r.truncated for r in results):
        return Verdict.INCONCLUSIVE, None
    if all(r.count == 1 for r in results):
        return Verdict.INTENSIVELY, None
    carrying = [r for r in results if r.count == 1]
    if all(r.size == 1 for r in carrying):
        return Verdict.STRONGLY_TRIVIALIZES, None
    if all(r.size <= 1 for r in carrying):
        lacking = [r for r in results if r.size <= 1 and r.count == 0]
        return (Verdict.WEAKLY_TRIVIALIZES if lacking else Verdict.TRIVIALIZES), None
    return Verdict.CRYSTALLOGRAPHIC, None


def _job(args):
    a, s, budget = args
    res = enumerate_internal(a, s, budget)
    return SampleResult(a.name, a.size, res.structures, res.truncated)


def crystallography_report(
    samples: Sequence[FiniteAlgebra], s: StructureSpec | str, budget: int = DEFAULT_BUDGET, jobs: int = 1
) -> Report:
    if isinstance(s, str):
        s = builtin_structure(s)
    if not samples:
        raise ValidationError("need at least one sample")
    sig = samples[0].signature
    if any(a.signature != sig for a in samples):
        raise ValidationError("samples do not share a signature")
    tasks = [(a, s, budget) for a in samples]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    verdict, witness = decide(results)
    return Report(s.name, results, verdict, witness)
