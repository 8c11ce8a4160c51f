"""Hypothesis strategies shared by the test modules."""

import hypothesis.strategies as st

from crystallo.algebra import FiniteAlgebra
from crystallo.specs import App, Const, Signature, Var


@st.composite
def signatures(draw, max_ops=3, max_arity=3, consts=None):
    nops = draw(st.integers(1, max_ops))
    ops = tuple((f"f{i}", draw(st.integers(1, max_arity))) for i in range(nops))
    if consts is None:
        consts = draw(st.sampled_from([(), ("0",)]))
    return Signature(ops, tuple(consts))


@st.composite
def algebras(draw, sig=None, min_size=1, max_size=3):
    if sig is None:
        sig = draw(signatures())
    elif isinstance(sig, st.SearchStrategy):
        sig = draw(sig)
    n = draw(st.integers(min_size, max_size))
    tables = {
        op: tuple(draw(st.lists(st.integers(0, n - 1), min_size=n**k, max_size=n**k)))
        for op, k in sig.ops
    }
    consts = {c: draw(st.integers(0, n - 1)) for c in sig.consts}
    return FiniteAlgebra(sig, n, tables, consts, name="rand")


def terms(sig, variables=("x", "y", "z"), max_leaves=6):
    leaves = st.sampled_from([Var(v) for v in variables] + [Const(c) for c in sig.consts])

    def extend(children):
        return st.sampled_from(sig.ops).flatmap(
            lambda op: st.lists(children, min_size=op[1], max_size=op[1]).map(
                lambda args, name=op[0]: App(name, tuple(args))
            )
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def partitions(draw, n):
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return labels
