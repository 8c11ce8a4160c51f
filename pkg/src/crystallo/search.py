"""Backtracking over operation-table cells with propagation.

A search problem is a list of partial maps ``f_i : D_i^k -> C_i`` (one cell
per row of ``D_i^k``).  Three kinds of law restrict them:

* homomorphism laws ``f(w(...)) = w(f(...), ...)`` for an operation ``w``
  given on both carriers, propagated by the kernel in ``kernels.hom_trigger``;
* equations whose ground instances are re-examined when the cell they are
  blocked on gets a value (deducing the outermost cell when possible);
* per-cell domains and, optionally, injectivity.

Decisions follow a fixed cell order (lower arity first, then rows in
lexicographic order) with ascending values, so solutions come out in
lexicographic order of that cell sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Sequence

from . import kernels
from .errors import CapExceeded
from .specs import App, Const, Term, Var

DEFAULT_BUDGET = 10**7
INSTANCE_CAP = 5_000_000

_VAR, _LIT, _APP = 0, 1, 2


@dataclass
class MapSpec:
    name: str
    k: int
    dom_size: int
    cod_size: int
    domains: dict[int, tuple[int, ...]] = field(default_factory=dict)
    injective: bool = False

    @property
    def rows(self) -> int:
        return self.dom_size**self.k


@dataclass
class HomLaw:
    map_index: int
    arity: int
    dom_table: Sequence[int]
    cod_table: Sequence[int]


@dataclass
class EquationLaw:
    lhs: tuple
    rhs: tuple
    nvars: int
    var_size: int


def compile_node(t: Term, maps: dict[str, int], slots: dict[str, int]) -> tuple:
    """Term -> nested tuple node over map indices (constants are 0-ary maps)."""
    if isinstance(t, Var):
        return (_VAR, slots[t.name])
    if isinstance(t, Const):
        return (_APP, maps[t.name], ())
    return (_APP, maps[t.op], tuple(compile_node(a, maps, slots) for a in t.args))


def literal(value: int) -> tuple:
    return (_LIT, value)


class Search:
    def __init__(
        self,
        maps: Sequence[MapSpec],
        homs: Sequence[HomLaw] = (),
        equations: Sequence[EquationLaw] = (),
        forced: Sequence[tuple[int, int, int]] = (),
        budget: int = DEFAULT_BUDGET,
    ):
        self.maps = list(maps)
        self.budget = budget
        self.nodes = 0
        self.truncated = False
        self.unsat = False
        M = len(self.maps)
        self.vals = [kernels.int_buffer(size=m.rows) for m in self.maps]
        self.order = [kernels.int_buffer(size=m.rows, fill=0) for m in self.maps]
        self.count = [0] * M
        self.offset = []
        total = 0
        for m in self.maps:
            self.offset.append(total)
            total += m.rows
        self.cell_map = [i for i, m in enumerate(self.maps) for _ in range(m.rows)]
        self.watch: list[list[int]] = [[] for _ in range(total)]
        self.used = [[0] * m.cod_size if m.injective else None for m in self.maps]
        self.homs_of: list[list[HomLaw]] = [[] for _ in range(M)]
        self.coords = [None] * M
        for law in homs:
            if law.arity == 0:
                continue
            self.homs_of[law.map_index].append(law)
            m = self.maps[law.map_index]
            if self.coords[law.map_index] is None:
                self.coords[law.map_index] = kernels.row_coords(m.dom_size, m.k)
        self.homs_of = [
            [HomLaw(h.map_index, h.arity, kernels.int_buffer(h.dom_table), kernels.int_buffer(h.cod_table)) for h in hs]
            for hs in self.homs_of
        ]
        self.equations = list(equations)
        self.forced = list(forced)
        self.trail: list[tuple[int, int]] = []
        self.qhead = 0
        self.log: list[tuple] = []
        order = sorted(range(M), key=lambda i: (self.maps[i].k, i))
        self.decisions = [self.offset[i] + row for i in order for row in range(self.maps[i].rows)]

    # ----------------------------------------------------------- state

    def _push(self, m: int, row: int, value: int) -> bool:
        self.vals[m][row] = value
        pos = self.count[m]
        self.order[m][pos] = row
        self.count[m] = pos + 1
        self.trail.append((m, pos))
        return self._admissible(m, row, value)

    def _admissible(self, m: int, row: int, value: int) -> bool:
        spec = self.maps[m]
        if not 0 <= value < spec.cod_size:
            return False
        ok = True
        used = self.used[m]
        if used is not None:
            used[value] += 1
            ok = used[value] == 1
        if spec.domains:
            allowed = spec.domains.get(row)
            if allowed is not None and value not in allowed:
                ok = False
        return ok

    def _undo(self, mark: int, logmark: int) -> None:
        trail, vals, order = self.trail, self.vals, self.order
        while len(trail) > mark:
            m, pos = trail.pop()
            row = order[m][pos]
            used = self.used[m]
            if used is not None and 0 <= vals[m][row] < len(used):
                used[vals[m][row]] -= 1
            vals[m][row] = -1
            self.count[m] = pos
        log, watch = self.log, self.watch
        while len(log) > logmark:
            entry = log.pop()
            if len(entry) == 2:
                watch[entry[0]] = entry[1]
            else:
                watch[entry[0]].pop()
        self.qhead = min(self.qhead, len(trail))

    # ------------------------------------------------------ equations

    def _eval(self, node, sigma) -> int:
        tag = node[0]
        if tag == _VAR:
            return sigma[node[1]]
        if tag == _LIT:
            return node[1]
        m = node[1]
        dom = self.maps[m].dom_size
        row = 0
        for arg in node[2]:
            v = self._eval(arg, sigma)
            if v < 0:
                return v
            row = row * dom + v
        val = self.vals[m][row]
        if val < 0:
            return -(self.offset[m] + row) - 1
        return val

    def _side(self, node, sigma):
        """(value, blocked_cell, blocked_at_top) for one side of an instance."""
        if node[0] != _APP:
            return self._eval(node, sigma), -1, False
        m = node[1]
        dom = self.maps[m].dom_size
        row = 0
        for arg in node[2]:
            v = self._eval(arg, sigma)
            if v < 0:
                return -1, -v - 1, False
            row = row * dom + v
        val = self.vals[m][row]
        if val < 0:
            return -1, self.offset[m] + row, True
        return val, -1, False

    def _examine(self, iid: int) -> bool:
        """Check one instance; deduce, re-watch or report a conflict."""
        e, sigma = self._instances[iid]
        eq = self.equations[e]
        lv, lc, ltop = self._side(eq.lhs, sigma)
        rv, rc, rtop = self._side(eq.rhs, sigma)
        if lv >= 0 and rv >= 0:
            return lv == rv
        if lv >= 0 and rtop:
            m = self.cell_map[rc]
            return self._push(m, rc - self.offset[m], lv)
        if rv >= 0 and ltop:
            m = self.cell_map[lc]
            return self._push(m, lc - self.offset[m], rv)
        cell = lc if lv < 0 else rc
        self.watch[cell].append(iid)
        self.log.append((cell,))
        return True

    # ---------------------------------------------------- propagation

    def _propagate(self) -> bool:
        trail = self.trail
        while self.qhead < len(trail):
            m, pos = trail[self.qhead]
            self.qhead += 1
            row = self.order[m][pos]
            spec = self.maps[m]
            for law in self.homs_of[m]:
                old = self.count[m]
                new, ok = kernels.hom_trigger(
                    self.vals[m],
                    self.order[m],
                    pos,
                    old,
                    spec.dom_size,
                    spec.k,
                    spec.cod_size,
                    law.dom_table,
                    law.cod_table,
                    law.arity,
                    self.coords[m],
                )
                for q in range(old, new):
                    trail.append((m, q))
                self.count[m] = new
                if (spec.domains or self.used[m] is not None) and new > old:
                    vals, order = self.vals[m], self.order[m]
                    for q in range(old, new):
                        r = order[q]
                        if not self._admissible(m, r, vals[r]):
                            ok = False
                if not ok:
                    return False
            cell = self.offset[m] + row
            waiting = self.watch[cell]
            if waiting:
                self.watch[cell] = []
                self.log.append((cell, waiting))
                for iid in waiting:
                    if not self._examine(iid):
                        return False
        return True

    # ----------------------------------------------------------- root

    def _root(self) -> bool:
        for m, row, value in self.forced:
            cur = self.vals[m][row]
            if cur >= 0:
                if cur != value:
                    return False
                continue
            if not self._push(m, row, value):
                return False
        for m, spec in enumerate(self.maps):
            for row, allowed in spec.domains.items():
                if len(allowed) == 0:
                    return False
                if len(allowed) == 1 and self.vals[m][row] < 0:
                    if not self._push(m, row, allowed[0]):
                        return False
        if not self._propagate():
            return False
        total = sum(eq.var_size**eq.nvars for eq in self.equations)
        if total > INSTANCE_CAP:
            raise CapExceeded(f"{total} equation instances exceed the cap of {INSTANCE_CAP}")
        self._instances = [
            (e, sigma)
            for e, eq in enumerate(self.equations)
            for sigma in product(range(eq.var_size), repeat=eq.nvars)
        ]
        for iid in range(len(self._instances)):
            if not self._examine(iid):
                return False
        return self._propagate()

    # ------------------------------------------------------------ DFS

    def _candidates(self, cell: int) -> Sequence[int]:
        m = self.cell_map[cell]
        spec = self.maps[m]
        allowed = spec.domains.get(cell - self.offset[m]) if spec.domains else None
        return allowed if allowed is not None else range(spec.cod_size)

    def _next(self, start: int) -> int:
        vals, cell_map, offset = self.vals, self.cell_map, self.offset
        decisions = self.decisions
        for i in range(start, len(decisions)):
            cell = decisions[i]
            m = cell_map[cell]
            if vals[m][cell - offset[m]] < 0:
                return i
        return -1

    def _solution(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(v) for v in self.vals)

    def solutions(self) -> Iterator[tuple[tuple[int, ...], ...]]:
        """Yield complete assignments in lexicographic decision order."""
        self._instances = []
        if not self._root():
            self.unsat = True
            return
        i = self._next(0)
        if i < 0:
            yield self._solution()
            return
        frames = [[i, iter(self._candidates(self.decisions[i])), len(self.trail), len(self.log)]]
        while frames:
            frame = frames[-1]
            i, values, mark, logmark = frame
            self._undo(mark, logmark)
            value = next(values, None)
            if value is None:
                frames.pop()
                continue
            self.nodes += 1
            if self.nodes > self.budget:
                self.truncated = True
                self._undo(mark, logmark)
                return
            cell = self.decisions[i]
            m = self.cell_map[cell]
            if not (self._push(m, cell - self.offset[m], value) and self._propagate()):
                continue
            j = self._next(i + 1)
            if j < 0:
                yield self._solution()
                continue
            frames.append([j, iter(self._candidates(self.decisions[j])), len(self.trail), len(self.log)])
