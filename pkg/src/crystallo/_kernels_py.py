"""Pure-Python implementations of the search and evaluation kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension.  Integer buffers are ``array.array('i')`` objects
(or anything else exposing a writable int buffer).
"""

from itertools import product

__all__ = ["hom_trigger", "hom_check_full", "find_violations"]

# instruction opcodes for compiled term programs (triples: opcode, a, b)
OP_VAR = 0
OP_LIT = 1
OP_APP = 2


def hom_trigger(vals, order, pos, count, nD, k, nC, omD, omC, r, coords):
    """Propagate the homomorphism law for the row ``order[pos]``.

    ``vals`` holds a partial map from ``nD**k`` rows to ``[0, nC)`` (``-1``
    marks an unassigned row).  For every instance of

        f(w(a_1), ..., w(a_k)) = w(f(row_1), ..., f(row_r))

    whose rows are ``order[pos]`` plus rows taken from ``order[:pos + 1]``,
    the left cell is checked or, when unassigned, set and appended to
    ``order``.  Returns ``(new_count, ok)``.
    """
    new = order[pos]
    prefix = [order[i] for i in range(pos + 1)]
    for j in range(r):
        for others in product(prefix, repeat=r - 1):
            rows = others[:j] + (new,) + others[j:]
            ridx = 0
            for row in rows:
                ridx = ridx * nC + vals[row]
            rhs = omC[ridx]
            lhs_row = 0
            for i in range(k):
                s = 0
                for row in rows:
                    s = s * nD + coords[row * k + i]
                lhs_row = lhs_row * nD + omD[s]
            v = vals[lhs_row]
            if v < 0:
                vals[lhs_row] = rhs
                order[count] = lhs_row
                count += 1
            elif v != rhs:
                return count, False
    return count, True


def hom_check_full(vals, nD, k, nC, omD, omC, r, coords):
    """Return ``-1`` if the complete map ``vals`` commutes with ``w``.

    Otherwise the index (mixed radix over rows, first row most
    significant) of the first violating r-tuple of rows.
    """
    nrows = nD ** k
    for code, rows in enumerate(product(range(nrows), repeat=r)):
        ridx = 0
        for row in rows:
            ridx = ridx * nC + vals[row]
        lhs_row = 0
        for i in range(k):
            s = 0
            for row in rows:
                s = s * nD + coords[row * k + i]
            lhs_row = lhs_row * nD + omD[s]
        if vals[lhs_row] != omC[ridx]:
            return code
    return -1


def _run(prog, env, tables, n):
    stack = []
    for p in range(0, len(prog), 3):
        op, a, b = prog[p], prog[p + 1], prog[p + 2]
        if op == OP_VAR:
            stack.append(env[a])
        elif op == OP_LIT:
            stack.append(a)
        else:
            idx = 0
            if b:
                args = stack[-b:]
                del stack[-b:]
                for x in args:
                    idx = idx * n + x
            stack.append(tables[a + idx])
    return stack[0]


def find_violations(lhs, rhs, nvars, n, tables, limit):
    """Assignments (as mixed-radix codes) where two term programs differ.

    Programs are flat int triples: ``(0, var, 0)`` pushes a variable,
    ``(1, value, 0)`` a literal and ``(2, offset, arity)`` pops ``arity``
    values and pushes ``tables[offset + index]``.  Assignments are scanned in
    lexicographic order; at most ``limit`` codes are returned (``limit < 0``
    means no limit).
    """
    out = []
    if nvars and n == 0:
        return out
    for code, env in enumerate(product(range(n), repeat=nvars)):
        if _run(lhs, env, tables, n) != _run(rhs, env, tables, n):
            out.append(code)
            if 0 <= limit <= len(out):
                break
    return out
