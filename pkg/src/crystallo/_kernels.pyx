# Compiled twins of the kernels in _kernels_py.py; same signatures, same results.

from libc.stdlib cimport malloc, free


def hom_trigger(int[::1] vals, int[::1] order, Py_ssize_t pos, Py_ssize_t count,
                int nD, int k, int nC, const int[::1] omD, const int[::1] omC,
                int r, const int[::1] coords):
    cdef int new = order[pos]
    cdef Py_ssize_t m = pos + 1
    cdef Py_ssize_t *idx = <Py_ssize_t *> malloc((r + 1) * sizeof(Py_ssize_t))
    cdef int *rows = <int *> malloc((r + 1) * sizeof(int))
    cdef int j, q, t, i, s, ridx, lhs_row, rhs, v
    cdef bint ok = True
    try:
        for j in range(r):
            for q in range(r):
                idx[q] = 0
            while True:
                t = 0
                for q in range(r):
                    if q == j:
                        rows[q] = new
                    else:
                        rows[q] = order[idx[t]]
                        t += 1
                ridx = 0
                for q in range(r):
                    ridx = ridx * nC + vals[rows[q]]
                rhs = omC[ridx]
                lhs_row = 0
                for i in range(k):
                    s = 0
                    for q in range(r):
                        s = s * nD + coords[rows[q] * k + i]
                    lhs_row = lhs_row * nD + omD[s]
                v = vals[lhs_row]
                if v < 0:
                    vals[lhs_row] = rhs
                    order[count] = lhs_row
                    count += 1
                elif v != rhs:
                    ok = False
                    break
                t = r - 2
                while t >= 0:
                    idx[t] += 1
                    if idx[t] < m:
                        break
                    idx[t] = 0
                    t -= 1
                if t < 0:
                    break
            if not ok:
                break
    finally:
        free(idx)
        free(rows)
    return count, ok


def hom_check_full(const int[::1] vals, int nD, int k, int nC,
                   const int[::1] omD, const int[::1] omC, int r,
                   const int[::1] coords):
    cdef Py_ssize_t nrows = 1
    cdef int q, i, s, ridx, lhs_row
    cdef Py_ssize_t code = 0
    for q in range(k):
        nrows *= nD
    if nrows == 0:
        return -1
    cdef Py_ssize_t *rows = <Py_ssize_t *> malloc((r + 1) * sizeof(Py_ssize_t))
    try:
        for q in range(r):
            rows[q] = 0
        while True:
            ridx = 0
            for q in range(r):
                ridx = ridx * nC + vals[rows[q]]
            lhs_row = 0
            for i in range(k):
                s = 0
                for q in range(r):
                    s = s * nD + coords[rows[q] * k + i]
                lhs_row = lhs_row * nD + omD[s]
            if vals[lhs_row] != omC[ridx]:
                return code
            code += 1
            q = r - 1
            while q >= 0:
                rows[q] += 1
                if rows[q] < nrows:
                    break
                rows[q] = 0
                q -= 1
            if q < 0:
                return -1
    finally:
        free(rows)


cdef inline int _run(const int[::1] prog, int *env, const int[::1] tables,
                     int n, int *stack) nogil:
    cdef Py_ssize_t p
    cdef int sp = 0, op, a, b, idx, x
    for p in range(0, prog.shape[0], 3):
        op = prog[p]
        a = prog[p + 1]
        b = prog[p + 2]
        if op == 0:
            stack[sp] = env[a]
            sp += 1
        elif op == 1:
            stack[sp] = a
            sp += 1
        else:
            idx = 0
            for x in range(sp - b, sp):
                idx = idx * n + stack[x]
            sp -= b
            stack[sp] = tables[a + idx]
            sp += 1
    return stack[0]


def find_violations(const int[::1] lhs, const int[::1] rhs, int nvars, int n,
                    const int[::1] tables, Py_ssize_t limit):
    out = []
    if nvars and n == 0:
        return out
    cdef int depth = (lhs.shape[0] + rhs.shape[0]) // 3 + 1
    cdef int *env = <int *> malloc((nvars + 1) * sizeof(int))
    cdef int *stack = <int *> malloc(depth * sizeof(int))
    cdef Py_ssize_t code = 0
    cdef int q
    try:
        for q in range(nvars):
            env[q] = 0
        while True:
            if _run(lhs, env, tables, n, stack) != _run(rhs, env, tables, n, stack):
                out.append(code)
                if 0 <= limit <= len(out):
                    break
            code += 1
            q = nvars - 1
            while q >= 0:
                env[q] += 1
                if env[q] < n:
                    break
                env[q] = 0
                q -= 1
            if q < 0:
                break
    finally:
        free(env)
        free(stack)
    return out
