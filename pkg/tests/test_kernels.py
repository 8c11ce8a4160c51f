"""The compiled kernels and their pure-Python twins must agree bit for bit."""

import os
import subprocess
import sys
from array import array

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crystallo import _kernels_py, kernels
from crystallo.specs import compile_term

from strategies import algebras, signatures, terms

try:
    from crystallo import _kernels as compiled
except ImportError:  # pragma: no cover - only without a build
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")


def test_env_var_forces_python():
    env = dict(os.environ, CRYSTALLO_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from crystallo import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_row_coords():
    assert list(kernels.row_coords(2, 2)) == [0, 0, 0, 1, 1, 0, 1, 1]


@st.composite
def hom_case(draw):
    nD = draw(st.integers(1, 3))
    nC = draw(st.integers(1, 3))
    k = draw(st.integers(1, 2))
    r = draw(st.integers(1, 3))
    omD = array("i", draw(st.lists(st.integers(0, nD - 1), min_size=nD**r, max_size=nD**r)))
    omC = array("i", draw(st.lists(st.integers(0, nC - 1), min_size=nC**r, max_size=nC**r)))
    vals = draw(st.lists(st.integers(0, nC - 1), min_size=nD**k, max_size=nD**k))
    return nD, nC, k, r, omD, omC, vals


@needs_compiled
@given(hom_case())
def test_hom_check_full_parity(case):
    nD, nC, k, r, omD, omC, vals = case
    coords = kernels.row_coords(nD, k)
    args = (array("i", vals), nD, k, nC, omD, omC, r, coords)
    assert compiled.hom_check_full(*args) == _kernels_py.hom_check_full(*args)


@needs_compiled
@given(hom_case(), st.data())
def test_hom_trigger_parity(case, data):
    nD, nC, k, r, omD, omC, vals = case
    nrows = nD**k
    coords = kernels.row_coords(nD, k)
    # a partial map: a prefix of rows assigned, the rest -1
    assigned = data.draw(st.integers(1, nrows))
    rows = data.draw(st.permutations(range(nrows)))[:assigned]
    out = []
    for impl in (compiled, _kernels_py):
        v = array("i", [-1] * nrows)
        order = array("i", [0] * nrows)
        for i, row in enumerate(rows):
            v[row] = vals[row]
            order[i] = row
        count, ok = len(rows), True
        for pos in range(len(rows)):
            if pos >= count:
                break
            count, ok = impl.hom_trigger(v, order, pos, count, nD, k, nC, omD, omC, r, coords)
            if not ok:
                break
        out.append((list(v), list(order[:count]), count, ok))
    assert out[0] == out[1]


@needs_compiled
@given(st.data())
def test_find_violations_parity(data):
    sig = data.draw(signatures(max_arity=2))
    a = data.draw(algebras(sig))
    lhs = data.draw(terms(sig, max_leaves=5))
    rhs = data.draw(terms(sig, max_leaves=5))
    names = ["x", "y", "z"]
    left = array("i", compile_term(lhs, a, names))
    right = array("i", compile_term(rhs, a, names))
    limit = data.draw(st.integers(-1, 5))
    got = compiled.find_violations(left, right, 3, a.size, a.flat_tables, limit)
    want = _kernels_py.find_violations(left, right, 3, a.size, a.flat_tables, limit)
    assert list(got) == list(want)


_PROBE = """
import json
from crystallo.algebra import enumerate_homs, enumerate_models
from crystallo.constructions import builtin_algebra, builtin_variety
from crystallo.internal import enumerate_internal
out = {
    "homs": [h.map for h in enumerate_homs(builtin_algebra("h(Z4)"), builtin_algebra("h(Klein)"))],
    "models": [m.tables["mul"] for m in enumerate_models(builtin_variety("Grp"), 4)],
    "internal": [s.to_json() for s in enumerate_internal(builtin_algebra("Z2*Z3"), "group")],
    "subtraction": [s.to_json() for s in enumerate_internal(builtin_algebra("w(F3,1)"), "subtraction")],
}
print(json.dumps(out, sort_keys=True))
"""


def test_search_results_do_not_depend_on_backend():
    runs = []
    for flag in ("", "1"):
        env = dict(os.environ)
        env.pop("CRYSTALLO_PURE_PYTHON", None)
        if flag:
            env["CRYSTALLO_PURE_PYTHON"] = flag
        runs.append(subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True).stdout)
    assert runs[0] == runs[1]
