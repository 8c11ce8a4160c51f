"""Compiled kernels versus their pure-Python twins.

Two levels: the raw kernels called directly from both modules, then whole
searches run in subprocesses with and without ``CRYSTALLO_PURE_PYTHON``.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import timeit
from array import array

from crystallo import _kernels_py, kernels
from crystallo.constructions import builtin_algebra, h_functor, klein_group
from crystallo.specs import compile_term, parse_term

try:
    from crystallo import _kernels as compiled
except ImportError:
    compiled = None

END_TO_END = {
    "internal abelian-group on h(Z3)*w(F3,1)": (
        "from crystallo.constructions import builtin_algebra\n"
        "from crystallo.internal import enumerate_internal\n"
        "enumerate_internal(builtin_algebra('h(Z3)*w(F3,1)'), 'abelian-group')"
    ),
    "homs h(Z4) -> h(Klein)": (
        "from crystallo.constructions import builtin_algebra\n"
        "from crystallo.algebra import enumerate_homs\n"
        "enumerate_homs(builtin_algebra('h(Z4)'), builtin_algebra('h(Klein)'))"
    ),
    "Hex3 models of size 2": (
        "from crystallo.algebra import enumerate_models\n"
        "from crystallo.constructions import builtin_variety\n"
        "list(enumerate_models(builtin_variety('Hex3'), 2))"
    ),
}


def kernel_cases():
    a = h_functor(klein_group())
    n = a.size
    table = a.buffers["p1"]
    vals = array("i", a.tables["p1"])
    coords = kernels.row_coords(n, 3)
    yield "hom_check_full (ternary on h(Klein))", lambda m: m.hom_check_full(vals, n, 3, n, table, table, 3, coords)

    x = builtin_algebra("Z3")
    lhs = array("i", compile_term(parse_term("mul(mul(x, y), z)", x.signature), x, ["x", "y", "z"]))
    rhs = array("i", compile_term(parse_term("mul(x, mul(y, z))", x.signature), x, ["x", "y", "z"]))
    yield "find_violations (associativity on Z3)", lambda m: m.find_violations(lhs, rhs, 3, x.size, x.flat_tables, -1)


def timed_subprocess(code: str, pure: bool) -> float:
    env = dict(os.environ)
    env.pop("CRYSTALLO_PURE_PYTHON", None)
    if pure:
        env["CRYSTALLO_PURE_PYTHON"] = "1"
    wrapper = f"import time\nt = time.perf_counter()\n{code}\nprint(time.perf_counter() - t)"
    out = subprocess.run([sys.executable, "-c", wrapper], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if compiled is None:
        print("compiled extension not built; only the Python backend is available")
        return
    print(f"{'kernel':45} {'compiled':>12} {'python':>12} {'speedup':>8}")
    for label, call in kernel_cases():
        assert call(compiled) == call(_kernels_py)
        number = 200
        tc = min(timeit.repeat(lambda: call(compiled), number=number, repeat=args.repeat)) / number
        tp = min(timeit.repeat(lambda: call(_kernels_py), number=number, repeat=args.repeat)) / number
        print(f"{label:45} {tc * 1e6:10.1f}us {tp * 1e6:10.1f}us {tp / tc:7.1f}x")

    print()
    print(f"{'end to end':45} {'compiled':>12} {'python':>12} {'speedup':>8}")
    for label, code in END_TO_END.items():
        tc = min(timed_subprocess(code, False) for _ in range(args.repeat))
        tp = min(timed_subprocess(code, True) for _ in range(args.repeat))
        print(f"{label:45} {tc:11.3f}s {tp:11.3f}s {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
