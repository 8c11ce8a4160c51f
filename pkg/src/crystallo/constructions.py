"""Built-in presentations, the h / w / m / a functors, schema padding and sample factories."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product as iproduct
from typing import Callable, Sequence

from .algebra import FiniteAlgebra, one_element, product
from .errors import SchemaMismatch, ValidationError
from .specs import App, Const, Equation, Signature, Term, Var, VarietyPresentation, check_identities, parse_variety

__all__ = [
    "VARIETY_NAMES",
    "builtin_variety",
    "chyper_presentation",
    "apply_functor",
    "h_functor",
    "w_functor",
    "m_functor",
    "a_functor",
    "pad_chyper",
    "PadResult",
    "sample_factory",
    "sample_set",
    "SAMPLE_SETS",
    "small_builtin_algebras",
    "jt_term_search",
    "builtin_algebra",
    "is_prime",
    "inverse_mod",
]

# ------------------------------------------------------------------ catalog

_GRP = """
op mul/2; op inv/1; const e = 0;
eq mul(mul(x, y), z) = mul(x, mul(y, z));
eq mul(e, x) = x; eq mul(x, e) = x;
eq mul(inv(x), x) = e; eq mul(x, inv(x)) = e;
"""

_CATALOG_TEXT = {
    "Grp": _GRP,
    "AbGrp": _GRP + "eq mul(x, y) = mul(y, x);",
    "ComMon": "op m/2; const 0; eq m(m(x, y), z) = m(x, m(y, z)); eq m(x, y) = m(y, x); eq m(x, 0) = x;",
    "Mag": "op m/2; const 0; eq m(x, 0) = x; eq m(0, x) = x;",
    "PMag": "op m/2; const 0; eq m(0, 0) = 0;",
    "Imp": "op i/2; const 1; eq i(x, x) = 1; eq i(i(x, y), x) = x; "
    "eq i(i(x, y), y) = i(i(y, x), x); eq i(x, i(y, z)) = i(y, i(x, z));",
    "Disc": "op t/3; eq t(x, y, y) = x; eq t(y, y, x) = x; eq t(x, y, x) = x;",
    "Mal": "op p/3; eq p(x, y, y) = x; eq p(y, y, x) = x;",
    "Proj": "op t/3;",
    "CM3": """
op p1/3; op p2/3; op p3/3;
eq p1(a, b, b) = a; eq p2(a, b, a) = a; eq p3(b, b, a) = a;
eq p1(a, a, b) = p2(a, a, b); eq p2(a, b, b) = p3(a, b, b);
""",
}

VARIETY_NAMES = ("Hex3", "CHyper") + tuple(_CATALOG_TEXT)


def chyper_presentation(k: int, name: str | None = None) -> VarietyPresentation:
    """Pointed presentation with 2k+1 ternary operations (type 2k+1 schema)."""
    if not isinstance(k, int) or k < 1:
        raise ValidationError("CHyper needs an integer k >= 1")
    top = 2 * k + 1
    ops = [f"p{i}" for i in range(1, top + 1)]
    a, b, zero = Var("a"), Var("b"), Const("0")

    def p(i, *args):
        return App(f"p{i}", args)

    eqs = [Equation(p(1, a, zero, zero), a)]
    eqs += [Equation(p(i, a, zero, a), a) for i in range(2, 2 * k + 1)]
    eqs.append(Equation(p(top, zero, zero, a), a))
    eqs += [Equation(p(2 * i - 1, a, a, b), p(2 * i, a, a, b)) for i in range(1, k + 1)]
    eqs += [Equation(p(2 * i, a, b, b), p(2 * i + 1, a, b, b)) for i in range(1, k + 1)]
    eqs += [Equation(p(i, b, b, b), b) for i in range(1, top + 1)]
    sig = Signature(tuple((o, 3) for o in ops), ("0",))
    return VarietyPresentation(name or ("Hex3" if k == 1 else f"CHyper{top}"), sig, tuple(eqs))


@lru_cache(maxsize=None)
def builtin_variety(name: str, k: int | None = None) -> VarietyPresentation:
    """Catalog lookup (case-insensitive).  ``CHyper`` takes ``k``; ``CHyper5`` style names work too."""
    key = name.strip()
    low = key.lower()
    if low == "hex3":
        return chyper_presentation(1)
    if low.startswith("chyper"):
        tail = low[len("chyper"):]
        if tail:
            if not tail.isdigit() or int(tail) % 2 == 0 or int(tail) < 3:
                raise ValidationError(f"bad CHyper type {tail!r}: expected an odd number >= 3")
            return chyper_presentation((int(tail) - 1) // 2)
        if k is None:
            raise ValidationError("CHyper needs the parameter k")
        return chyper_presentation(k)
    for cname, body in _CATALOG_TEXT.items():
        if cname.lower() == low or (low in ("discriminator", "disc") and cname == "Disc"):
            return parse_variety(f"variety {cname} {{ {body} }}")
    raise ValidationError(f"unknown variety {name!r}; known: {', '.join(VARIETY_NAMES)}")


# ------------------------------------------------------------- arithmetic


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def inverse_mod(a: int, p: int) -> int:
    """Extended Euclid; raises when ``a`` is not invertible."""
    r0, r1, s0, s1 = p, a % p, 0, 1
    while r1:
        q = r0 // r1
        r0, r1, s0, s1 = r1, r0 - q * r1, s1, s0 - q * s1
    if r0 != 1:
        raise ValidationError(f"{a} is not invertible modulo {p}")
    return s0 % p


def _field_params(p: int, d: int):
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    if p == 2:
        raise ValidationError("characteristic 2 is not allowed: 2 must be invertible")
    if d < 1:
        raise ValidationError("dimension must be at least 1")
    return inverse_mod(2, p)


def _vectors(p: int, d: int):
    """Elements of F_p^d in mixed-radix order (first coordinate most significant)."""
    return [tuple(v) for v in iproduct(range(p), repeat=d)]


def _encode(v, p):
    x = 0
    for c in v:
        x = x * p + c
    return x


def _ternary(n: int, f: Callable[[int, int, int], int]) -> tuple[int, ...]:
    return tuple(f(x, y, z) for x in range(n) for y in range(n) for z in range(n))


def _gate(a: FiniteAlgebra, v: VarietyPresentation) -> FiniteAlgebra:
    report = check_identities(a, v.equations, limit=1)
    if not report.satisfied:
        bad = report.violations[0]
        raise ValidationError(f"{a.name} violates {bad.equation} at {bad.assignment}")
    return a


def _w_tables(p: int, d: int):
    inv2 = _field_params(p, d)
    vecs = _vectors(p, d)
    n = len(vecs)

    def lift(f):
        return lambda x, y, z: _encode(
            tuple(f(a, b, c) % p for a, b, c in zip(vecs[x], vecs[y], vecs[z])), p
        )

    p1 = lift(lambda x, y, z: x + (z - y) * inv2)
    p2 = lift(lambda x, y, z: (x + z) * inv2)
    p3 = lift(lambda x, y, z: (x - y) * inv2 + z)
    return n, {"p1": _ternary(n, p1), "p2": _ternary(n, p2), "p3": _ternary(n, p3)}


# ----------------------------------------------------------------- functors


def h_functor(g: FiniteAlgebra, name: str | None = None) -> FiniteAlgebra:
    """p1 = x.y^-1.z, p2 = p3 = z, 0 = unit."""
    _gate(g, builtin_variety("Grp"))
    n = g.size
    p1 = _ternary(n, lambda x, y, z: g.op("mul", g.op("mul", x, g.op("inv", y)), z))
    p3 = _ternary(n, lambda x, y, z: z)
    hex3 = builtin_variety("Hex3")
    out = FiniteAlgebra(hex3.signature, n, {"p1": p1, "p2": p3, "p3": p3}, {"0": g.consts["e"]}, name=name or f"h({g.name})")
    return _gate(out, hex3)


def w_functor(p: int, d: int = 1, name: str | None = None) -> FiniteAlgebra:
    n, tables = _w_tables(p, d)
    hex3 = builtin_variety("Hex3")
    out = FiniteAlgebra(hex3.signature, n, tables, {"0": 0}, name=name or f"w(F{p},{d})")
    return _gate(out, hex3)


def m_functor(x: FiniteAlgebra, name: str | None = None) -> FiniteAlgebra:
    """p1 = p, p2 = p3 = z, for a Mal'tsev algebra (one ternary p)."""
    if x.signature.op_names != ("p",) or x.signature.consts:
        raise ValidationError("m expects an algebra with a single ternary operation p")
    _gate(x, builtin_variety("Mal"))
    n = x.size
    p3 = _ternary(n, lambda a, b, c: c)
    cm3 = builtin_variety("CM3")
    out = FiniteAlgebra(cm3.signature, n, {"p1": x.tables["p"], "p2": p3, "p3": p3}, {}, name=name or f"m({x.name})")
    return _gate(out, cm3)


def a_functor(p: int, d: int = 1, name: str | None = None) -> FiniteAlgebra:
    n, tables = _w_tables(p, d)
    cm3 = builtin_variety("CM3")
    out = FiniteAlgebra(cm3.signature, n, tables, {}, name=name or f"a(F{p},{d})")
    return _gate(out, cm3)


def apply_functor(which: str, arg, *params) -> FiniteAlgebra:
    """``h`` and ``m`` take an algebra; ``w`` and ``a`` take (p, d)."""
    if which == "h":
        return h_functor(arg)
    if which == "m":
        return m_functor(arg)
    if which == "w":
        return w_functor(arg, *params)
    if which == "a":
        return a_functor(arg, *params)
    raise ValidationError(f"unknown functor {which!r}")


# ------------------------------------------------------------------ padding


def _canon(eq: Equation):
    """Equation up to variable renaming, as two candidate orientations."""

    def rename(t, names):
        if isinstance(t, Var):
            return Var(names.setdefault(t.name, f"v{len(names)}"))
        if isinstance(t, App):
            return App(t.op, tuple(rename(a, names) for a in t.args))
        return t

    out = []
    for l, r in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
        names: dict = {}
        out.append((rename(l, names), rename(r, names)))
    return out


def _substitute(t: Term, defs: dict[str, str]) -> Term:
    if isinstance(t, App):
        return App(defs.get(t.op, t.op), tuple(_substitute(a, defs) for a in t.args))
    return t


def _chyper_k(v: VarietyPresentation) -> int:
    ops = v.signature.ops
    m = len(ops)
    if not v.signature.is_pointed or m < 3 or m % 2 == 0:
        raise SchemaMismatch("expected a pointed presentation with an odd number (>= 3) of ternary operations")
    if ops != tuple((f"p{i}", 3) for i in range(1, m + 1)):
        raise SchemaMismatch("operations must be p1..pN, all ternary")
    k = (m - 1) // 2
    axioms = {c for eq in v.equations for c in _canon(eq)[:1]}
    for eq in chyper_presentation(k).equations:
        if not any(c in axioms for c in _canon(eq)):
            raise SchemaMismatch(f"schema equation {eq} is not an axiom")
    return k


@dataclass
class PadResult:
    source: VarietyPresentation
    presentation: VarietyPresentation
    definitions: dict[str, str]
    justifications: list[tuple[Equation, str]] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(how != "unverified" for _, how in self.justifications)

    @property
    def type(self) -> int:
        return len(self.presentation.signature.ops)

    def to_json(self):
        return {
            "type": self.type,
            "verified": self.verified,
            "definitions": dict(self.definitions),
            "equations": [{"equation": str(eq), "justification": how} for eq, how in self.justifications],
        }


def pad_chyper(v: VarietyPresentation, models: Sequence[FiniteAlgebra] = ()) -> PadResult:
    """Type 2k+1 -> 2k+3 by duplicating p_2k at the tail; every new schema equation is justified.

    Justifications: ``syntactic`` (identical after substitution), ``axiom``
    (an axiom of ``v`` up to renaming and orientation), ``semantic`` (holds
    on every supplied model of ``v``), else ``unverified``.
    """
    k = _chyper_k(v)
    defs = {f"p{i}": f"p{i}" for i in range(1, 2 * k + 1)}
    defs[f"p{2 * k + 1}"] = f"p{2 * k}"
    defs[f"p{2 * k + 2}"] = f"p{2 * k}"
    defs[f"p{2 * k + 3}"] = f"p{2 * k + 1}"
    target = chyper_presentation(k + 1)
    axioms = {c for eq in v.equations for c in _canon(eq)}
    for mdl in models:
        _gate(mdl, v)
    result = []
    for eq in target.equations:
        inst = Equation(_substitute(eq.lhs, defs), _substitute(eq.rhs, defs))
        if inst.lhs == inst.rhs:
            how = "syntactic"
        elif any(c in axioms for c in _canon(inst)):
            how = "axiom"
        elif models and all(check_identities(mdl, [inst], limit=1).satisfied for mdl in models):
            how = "semantic"
        else:
            how = "unverified"
        result.append((eq, how))
    name = f"CHyper{2 * k + 3}"
    pres = VarietyPresentation(name, target.signature, target.equations)
    return PadResult(v, pres, defs, result)


# --------------------------------------------------------- sample factory


def cyclic_group(n: int) -> FiniteAlgebra:
    if n < 1:
        raise ValidationError("cyclic group order must be positive")
    tables = {"mul": [(x + y) % n for x in range(n) for y in range(n)], "inv": [(-x) % n for x in range(n)]}
    return _gate(FiniteAlgebra(builtin_variety("Grp").signature, n, tables, {"e": 0}, name=f"Z{n}"), builtin_variety("Grp"))


def klein_group() -> FiniteAlgebra:
    z2 = cyclic_group(2)
    return product([z2, z2], name="Klein")[0]


def fp_vector_space(p: int, d: int = 1) -> FiniteAlgebra:
    """Additive group of F_p^d in the group signature."""
    if not is_prime(p) or d < 1:
        raise ValidationError("need a prime p and d >= 1")
    vecs = _vectors(p, d)
    n = len(vecs)
    add = [_encode(tuple((a + b) % p for a, b in zip(vecs[x], vecs[y])), p) for x in range(n) for y in range(n)]
    neg = [_encode(tuple((-a) % p for a in vecs[x]), p) for x in range(n)]
    return _gate(
        FiniteAlgebra(builtin_variety("Grp").signature, n, {"mul": add, "inv": neg}, {"e": 0}, name=f"F{p}^{d}"),
        builtin_variety("Grp"),
    )


def discriminator(n: int) -> FiniteAlgebra:
    if n < 1:
        raise ValidationError("discriminator needs n >= 1")
    v = builtin_variety("Disc")
    t = _ternary(n, lambda x, y, z: z if x == y else x)
    return _gate(FiniteAlgebra(v.signature, n, {"t": t}, name=f"D{n}"), v)


def boolean_implication(m: int) -> FiniteAlgebra:
    """x -> y on subsets of m atoms (bit masks), top = all atoms."""
    if m < 0:
        raise ValidationError("number of atoms must be non-negative")
    n = 1 << m
    top = n - 1
    v = builtin_variety("Imp")
    table = [((~x) | y) & top for x in range(n) for y in range(n)]
    return _gate(FiniteAlgebra(v.signature, n, {"i": table}, {"1": top}, name=f"B{m}"), v)


def cyclic_monoid(n: int) -> FiniteAlgebra:
    """(Z_n, +, 0) as a commutative monoid."""
    v = builtin_variety("ComMon")
    return _gate(FiniteAlgebra(v.signature, n, {"m": [(x + y) % n for x in range(n) for y in range(n)]}, {"0": 0}, name=f"Z{n}+"), v)


def max_monoid(n: int = 2) -> FiniteAlgebra:
    """({0..n-1}, max, 0): commutative monoid without inverses."""
    v = builtin_variety("ComMon")
    return _gate(FiniteAlgebra(v.signature, n, {"m": [max(x, y) for x in range(n) for y in range(n)]}, {"0": 0}, name=f"max{n}"), v)


def group_maltsev(g: FiniteAlgebra) -> FiniteAlgebra:
    """The Mal'tsev algebra (G, x.y^-1.z)."""
    _gate(g, builtin_variety("Grp"))
    v = builtin_variety("Mal")
    p = _ternary(g.size, lambda x, y, z: g.op("mul", g.op("mul", x, g.op("inv", y)), z))
    return _gate(FiniteAlgebra(v.signature, g.size, {"p": p}, name=f"{g.name}-affine"), v)


def projection_algebra(n: int = 3) -> FiniteAlgebra:
    """({0..n-1}, t(x, y, z) = x): every reflexive relation is a subalgebra."""
    v = builtin_variety("Proj")
    return FiniteAlgebra(v.signature, n, {"t": _ternary(n, lambda x, y, z: x)}, name=f"P{n}")


# Pinned fixtures, found by exhaustive search over small tables (see tests).
# Pointed meet-magma on {0, 1}: its product span violates the span condition.
PMAG_FIXTURE = {"size": 2, "m": (0, 0, 0, 1)}
# Least unitary magma on {0, 1, 2} whose subalgebras {0, 1} and {0, 2} have no cooperator.
JT_FIXTURE = {"size": 3, "m": (0, 1, 2, 1, 0, 0, 2, 0, 0)}
# No unary algebra on 3 elements violates the Shifting Lemma; the identity on 4 does.
SHIFTING_FIXTURE = {"size": 4, "f": (0, 1, 2, 3)}


def pointed_magma_fixture() -> FiniteAlgebra:
    v = builtin_variety("PMag")
    a = FiniteAlgebra(v.signature, PMAG_FIXTURE["size"], {"m": PMAG_FIXTURE["m"]}, {"0": 0}, name="pmag")
    return _gate(a, v)


def jt_magma_fixture() -> FiniteAlgebra:
    v = builtin_variety("Mag")
    a = FiniteAlgebra(v.signature, JT_FIXTURE["size"], {"m": JT_FIXTURE["m"]}, {"0": 0}, name="jt3")
    return _gate(a, v)


def shifting_fixture() -> FiniteAlgebra:
    sig = Signature((("f", 1),))
    return FiniteAlgebra(sig, SHIFTING_FIXTURE["size"], {"f": SHIFTING_FIXTURE["f"]}, name="unary4")


def _one(name: str) -> FiniteAlgebra:
    return one_element(builtin_variety(name).signature, name=f"1_{name}")


_FACTORIES: dict[str, Callable[..., FiniteAlgebra]] = {
    "cyclic_group": cyclic_group,
    "klein_group": klein_group,
    "fp_vector_space": fp_vector_space,
    "discriminator": discriminator,
    "boolean_implication": boolean_implication,
    "cyclic_monoid": cyclic_monoid,
    "max_monoid": max_monoid,
    "group_maltsev": lambda n: group_maltsev(cyclic_group(n)),
    "projection_algebra": projection_algebra,
    "one_element": _one,
    "pointed_magma_fixture": pointed_magma_fixture,
    "jt_magma_fixture": jt_magma_fixture,
    "shifting_fixture": shifting_fixture,
    "h": lambda group: h_functor(_group_by_name(group)),
    "w": w_functor,
    "m": lambda n: m_functor(group_maltsev(cyclic_group(n))),
    "a": a_functor,
}


def _group_by_name(name: str) -> FiniteAlgebra:
    if name == "Klein":
        return klein_group()
    if name.startswith("Z") and name[1:].isdigit():
        return cyclic_group(int(name[1:]))
    if name.startswith("F") and "^" in name:
        p, d = name[1:].split("^")
        return fp_vector_space(int(p), int(d))
    raise ValidationError(f"unknown group {name!r}")


def sample_factory(kind: str, *params) -> FiniteAlgebra:
    try:
        f = _FACTORIES[kind]
    except KeyError:
        raise ValidationError(f"unknown sample kind {kind!r}; known: {', '.join(sorted(_FACTORIES))}") from None
    try:
        return f(*params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind}: {exc}") from None


# ------------------------------------------------------------- sample sets

PRODUCT_SIZE_LIMIT = 27


def _hex3_base() -> list[FiniteAlgebra]:
    return [
        h_functor(cyclic_group(2)),
        h_functor(cyclic_group(3)),
        h_functor(cyclic_group(4)),
        h_functor(klein_group()),
        w_functor(3, 1),
        w_functor(5, 1),
        w_functor(3, 2),
    ]


def _with_products(base: list[FiniteAlgebra], limit: int = PRODUCT_SIZE_LIMIT) -> list[FiniteAlgebra]:
    out = list(base)
    for a, b in combinations(base, 2):
        if a.size * b.size <= limit:
            out.append(product([a, b])[0])
    return out


def _hex3_small() -> list[FiniteAlgebra]:
    base = [h_functor(cyclic_group(2)), h_functor(cyclic_group(3))]
    return base + [product([x, y])[0] for x, y in iproduct(base, repeat=2)]


def _cm3() -> list[FiniteAlgebra]:
    return [m_functor(group_maltsev(cyclic_group(3))), a_functor(3, 1), m_functor(group_maltsev(cyclic_group(5))), a_functor(5, 1)]


def _groups() -> list[FiniteAlgebra]:
    return [cyclic_group(2), cyclic_group(3), cyclic_group(4), klein_group()]


def _disc() -> list[FiniteAlgebra]:
    d2, d3 = discriminator(2), discriminator(3)
    return [d2, d3, product([d2, d3])[0]]


SAMPLE_SETS: dict[str, Callable[[], list[FiniteAlgebra]]] = {
    "paper7.1": lambda: _with_products(_hex3_base()),
    "paper7.1-base": _hex3_base,
    "hex3-small": _hex3_small,
    "paper7.2": _cm3,
    "groups": _groups,
    "discriminators": _disc,
    "implication": lambda: [boolean_implication(0), boolean_implication(1), boolean_implication(2)],
}


def sample_set(name: str) -> list[FiniteAlgebra]:
    try:
        return SAMPLE_SETS[name]()
    except KeyError:
        raise ValidationError(f"unknown sample set {name!r}; known: {', '.join(SAMPLE_SETS)}") from None


def small_builtin_algebras(max_size: int = 3) -> list[FiniteAlgebra]:
    """Every catalog sample up to ``max_size`` elements (with 1-element algebras)."""
    candidates = [
        cyclic_group(1), cyclic_group(2), cyclic_group(3),
        h_functor(cyclic_group(2)), h_functor(cyclic_group(3)), w_functor(3, 1),
        discriminator(1), discriminator(2), discriminator(3),
        boolean_implication(0), boolean_implication(1),
        cyclic_monoid(2), cyclic_monoid(3), max_monoid(2),
        group_maltsev(cyclic_group(2)), group_maltsev(cyclic_group(3)),
        m_functor(group_maltsev(cyclic_group(3))), a_functor(3, 1),
        projection_algebra(3), pointed_magma_fixture(), jt_magma_fixture(),
    ]
    for name in ("Hex3", "CM3", "Mag"):
        candidates.append(_one(name))
    return [a for a in candidates if a.size <= max_size]


# ------------------------------------------------------------ JT diagnostic


@dataclass
class JTSearch:
    found: tuple[int, ...] | None
    exhausted: bool
    generated: int

    @property
    def message(self) -> str:
        if self.found is not None:
            return "JT term operation found"
        if self.exhausted:
            return "no binary term operation of this algebra satisfies x+0 = x = 0+x"
        return "no JT term within budget"

    def to_json(self):
        return {"found": list(self.found) if self.found else None, "exhausted": self.exhausted,
                "generated": self.generated, "message": self.message}


def jt_term_search(a: FiniteAlgebra, budget: int = 10_000) -> JTSearch:
    """Close the binary term operations of a pointed algebra, looking for t(x, 0) = x = t(0, x).

    This examines one finite algebra only.  A negative answer says nothing
    about the variety beyond this algebra.
    """
    if not a.signature.is_pointed:
        raise ValidationError("JT search needs a pointed signature")
    n = a.size
    zero = a.consts["0"]
    proj_x = tuple(x for x in range(n) for _ in range(n))
    proj_y = tuple(y for _ in range(n) for y in range(n))
    const0 = tuple(zero for _ in range(n * n))
    known = {proj_x, proj_y, const0}
    order = [proj_x, proj_y, const0]

    def is_jt(t):
        return all(t[x * n + zero] == x and t[zero * n + x] == x for x in range(n))

    for t in order:
        if is_jt(t):
            return JTSearch(t, False, len(order))
    frontier = list(order)
    while frontier:
        fresh = []
        for op, arity in a.signature.ops:
            table = a.tables[op]
            for args in iproduct(order, repeat=arity):
                if not any(t in frontier for t in args):
                    continue
                new = []
                for cell in range(n * n):
                    idx = 0
                    for t in args:
                        idx = idx * n + t[cell]
                    new.append(table[idx])
                new = tuple(new)
                if new in known:
                    continue
                known.add(new)
                fresh.append(new)
                if is_jt(new):
                    return JTSearch(new, False, len(known))
                if len(known) >= budget:
                    return JTSearch(None, False, len(known))
        order.extend(fresh)
        frontier = fresh
    return JTSearch(None, True, len(known))


# ------------------------------------------------------------ name lookup

_FUNCTOR_NAME = re.compile(r"^([hwam])\((.*)\)$")


def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        depth += (ch == "(") - (ch == ")")
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def builtin_algebra(name: str) -> FiniteAlgebra:
    """Algebras by catalog name: ``Z3``, ``Klein``, ``F3^2``, ``D3``, ``B2``, ``Z2+``, ``max2``, ``P3``,
    ``h(Z4)``, ``w(F3,1)``, ``m(Z3)``, ``a(F5,1)``, ``1_Hex3``, the fixtures, and products ``A*B``."""
    name = name.strip()
    parts = _split_top(name, "*")
    if len(parts) > 1:
        factors = [builtin_algebra(part) for part in parts]
        return product(factors, name="x".join(f.name for f in factors))[0]
    m = _FUNCTOR_NAME.match(name)
    if m:
        which, arg = m.groups()
        if which in ("h", "m"):
            if "*" in arg:
                raise ValidationError("functor arguments must be single groups")
            g = _group_by_name(arg)
            return h_functor(g) if which == "h" else m_functor(group_maltsev(g), name=f"m({g.name})")
        field_m = re.match(r"^F(\d+)(?:,(\d+))?$", arg.replace(" ", ""))
        if not field_m:
            raise ValidationError(f"expected {which}(Fp,d), got {name!r}")
        p, d = int(field_m.group(1)), int(field_m.group(2) or 1)
        return w_functor(p, d) if which == "w" else a_functor(p, d)
    fixtures = {"pmag": pointed_magma_fixture, "jt3": jt_magma_fixture, "unary4": shifting_fixture}
    if name in fixtures:
        return fixtures[name]()
    if name.startswith("1_"):
        return _one(name[2:])
    simple = [
        (r"^Z(\d+)\+$", lambda n: cyclic_monoid(int(n))),
        (r"^max(\d+)$", lambda n: max_monoid(int(n))),
        (r"^D(\d+)$", lambda n: discriminator(int(n))),
        (r"^B(\d+)$", lambda n: boolean_implication(int(n))),
        (r"^P(\d+)$", lambda n: projection_algebra(int(n))),
        (r"^Z(\d+)-affine$", lambda n: group_maltsev(cyclic_group(int(n)))),
    ]
    for pattern, make in simple:
        hit = re.match(pattern, name)
        if hit:
            return make(hit.group(1))
    try:
        return _group_by_name(name)
    except ValidationError:
        raise ValidationError(f"unknown built-in algebra {name!r}") from None
