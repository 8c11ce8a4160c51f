"""End-to-end acceptance checks, each under its wall-clock limit.

Every criterion is a function returning a JSON-able payload; the last
criterion re-runs them all and compares the serialized bytes.  The
terminal-summary hook in conftest prints one line per criterion.
"""

import io
import json
import time

import pytest

from crystallo.algebra import enumerate_homs, one_element
from crystallo.cli import run
from crystallo.congruences import all_congruences, check_chyper_span, check_lattice_laws, check_shifting_lemma, product_span
from crystallo.constructions import (
    a_functor,
    boolean_implication,
    builtin_variety,
    cyclic_group,
    cyclic_monoid,
    discriminator,
    group_maltsev,
    h_functor,
    klein_group,
    m_functor,
    pad_chyper,
    pointed_magma_fixture,
    sample_set,
    shifting_fixture,
    small_builtin_algebras,
    w_functor,
)
from crystallo.graphs import (
    classify_structure,
    congruence_graph,
    enumerate_category_structures,
    indiscrete_graph,
)
from crystallo.internal import STRUCTURE_NAMES, brute_force_internal, builtin_structure, enumerate_internal
from crystallo.specs import check_identities

GROUPS = (("Z2", lambda: cyclic_group(2)), ("Z3", lambda: cyclic_group(3)), ("Z4", lambda: cyclic_group(4)), ("Klein", klein_group))


def _structures(res):
    return [s.to_json() for s in res]


def oracle_equivalence():
    out = []
    for a in small_builtin_algebras(3):
        for name in STRUCTURE_NAMES:
            fast = enumerate_internal(a, name)
            assert not fast.truncated, (a.name, name)
            slow = brute_force_internal(a, name)
            assert fast.structures == slow, (a.name, name)
            out.append([a.name, name, len(slow)])
    return out


def hex3_crystallography():
    out = {}
    for spec in ("abelian-group", "subtraction"):
        buf, err = io.StringIO(), io.StringIO()
        code = run(["report", "--variety", "hex3", "--structure", spec, "--samples", "builtin:paper7.1", "--sweep", "2"],
                   stdout=buf, stderr=err)
        assert code == 0, err.getvalue()
        data = json.loads(buf.getvalue())
        assert data["verdict"] == "CRYSTALLOGRAPHIC"
        assert all(s["count"] <= 1 for s in data["samples"])
        # the sweep really covered the size-2 models
        assert any(s["name"].startswith("Hex3[2]") for s in data["samples"])
        out[spec] = buf.getvalue()
    return out


def multiplication_phenomenon():
    out = []
    for p in (3, 5):
        h, w = h_functor(cyclic_group(p)), w_functor(p, 1)
        assert h.size == w.size
        assert enumerate_homs(h, w, only_bijective=True) == []
        assert enumerate_homs(w, h, only_bijective=True) == []
        counts = [len(enumerate_internal(x, "abelian-group")) for x in (h, w)]
        assert counts == [1, 1]
        out.append([p, counts])
    return out


def h_full_faithfulness():
    out = []
    for gn, g in GROUPS:
        for hn, hh in GROUPS:
            G, H = g(), hh()
            grp = [f.map for f in enumerate_homs(G, H)]
            hex3 = [f.map for f in enumerate_homs(h_functor(G), h_functor(H))]
            assert set(grp) == set(hex3) and len(grp) == len(hex3)
            out.append([gn, hn, len(grp)])
    assert len(out) == 16
    return out


def maltsev_uniqueness():
    affine = builtin_structure("affine").equations
    out = []
    for name, g in GROUPS:
        G = g()
        res = enumerate_internal(G, "maltsev")
        assert len(res) == 1
        st = res[0]
        assert st.tables["p"] == group_maltsev(G).tables["p"]
        assert check_identities(st.as_algebra(), affine).satisfied
        out.append([name, st.to_json()])
    return out


def pixley_trivialization():
    out = []
    for x in sample_set("discriminators"):
        assert len(enumerate_internal(x, "group")) == 0
        assert len(enumerate_internal(x, "associative-maltsev")) == 0
        assert check_lattice_laws(x, "distributive").holds
        out.append([x.name, len(all_congruences(x))])
    return out


def shifting_lemma():
    samples = sample_set("paper7.1") + [m_functor(group_maltsev(cyclic_group(3))), a_functor(3, 1)]
    out = []
    for x in samples:
        rep = check_shifting_lemma(x)
        assert rep.holds, x.name
        out.append([x.name, rep.verdict, rep.checked])
    bad = check_shifting_lemma(shifting_fixture())
    assert not bad.holds
    out.append(["fixture", bad.to_json()])
    return out


def chyper_spans():
    base = [h_functor(cyclic_group(2)), h_functor(cyclic_group(3))]
    out = []
    for x in base:
        for y in base:
            rep = check_chyper_span(product_span(x, y))
            assert rep.holds, (x.name, y.name)
            out.append([x.name, y.name, rep.checked])
    pm = pointed_magma_fixture()
    bad = check_chyper_span(product_span(pm, pm))
    assert not bad.holds
    out.append(["fixture", bad.to_json()])
    return out


def padding():
    five = pad_chyper(builtin_variety("Hex3"))
    seven = pad_chyper(five.presentation)
    for res, t in ((five, 5), (seven, 7)):
        assert res.type == t and res.verified
        assert all(how != "unverified" for _, how in res.justifications)
    return [five.to_json(), seven.to_json()]


def self_trivialization():
    cases = [("idempotent-unitary-magma", [g() for _, g in GROUPS], 0)]
    cases.append(("implication-algebra", [boolean_implication(1), boolean_implication(2)], 0))
    cases.append(("opimplicative-subtraction", [cyclic_monoid(2), cyclic_monoid(3)], 0))
    ones = [
        one_element(cyclic_group(1).signature, "1_Grp"),
        one_element(boolean_implication(1).signature, "1_Imp"),
        one_element(cyclic_monoid(2).signature, "1_Mon"),
    ]
    for spec in ("idempotent-unitary-magma", "implication-algebra", "opimplicative-subtraction"):
        cases.append((spec, ones, 1))
    out = []
    for spec, algebras, want in cases:
        for x in algebras:
            got = len(enumerate_internal(x, spec))
            assert got == want, (spec, x.name, got)
            out.append([spec, x.name, got])
    return out


def groupoid_uniqueness():
    out = []
    eq_graphs = 0
    for x in sample_set("groups") + [h_functor(cyclic_group(2))]:
        graphs = [indiscrete_graph(x)] + [congruence_graph(x, c) for c in all_congruences(x)[:-1]]
        for g in graphs:
            res = enumerate_category_structures(g)
            assert len(res) == 1, x.name
            cls = classify_structure(res[0])
            assert cls.is_groupoid and cls.graph_is_equivalence_relation
            eq_graphs += 1
            out.append([x.name, res[0].to_json()])
    assert eq_graphs >= 4
    for x in sample_set("discriminators"):
        for c in all_congruences(x):
            for st in enumerate_category_structures(congruence_graph(x, c)):
                assert classify_structure(st).graph_is_equivalence_relation
                out.append([x.name, st.to_json()])
    return out


CRITERIA = {
    1: ("oracle equivalence", oracle_equivalence, 60),
    2: ("Hex3 crystallography", hex3_crystallography, 300),
    3: ("multiplication phenomenon", multiplication_phenomenon, 10),
    4: ("full faithfulness of h", h_full_faithfulness, 30),
    5: ("Mal'tsev uniqueness and affinity", maltsev_uniqueness, 30),
    6: ("trivialization by Pixley", pixley_trivialization, 60),
    7: ("Shifting Lemma", shifting_lemma, 120),
    8: ("span condition", chyper_spans, 120),
    9: ("padding self-certification", padding, 5),
    10: ("self and mutual trivialization", self_trivialization, 60),
    11: ("groupoid uniqueness", groupoid_uniqueness, 120),
}

_PAYLOADS: dict[int, str] = {}


def _serialize(payload) -> str:
    return json.dumps(payload, sort_keys=True)


def _timed(num: int) -> tuple[str, float]:
    _, fn, _ = CRITERIA[num]
    t0 = time.perf_counter()
    payload = _serialize(fn())
    return payload, time.perf_counter() - t0


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, record_property):
    title, _, limit = CRITERIA[num]
    payload, elapsed = _timed(num)
    _PAYLOADS[num] = payload
    record_property("criterion", f"{num:>2}. {title} ({elapsed:.1f}s, limit {limit}s)")
    assert elapsed < limit, f"{title} took {elapsed:.1f}s"


def test_criterion_12_determinism(record_property):
    record_property("criterion", "12. determinism of every run")
    for num in sorted(CRITERIA):
        first = _PAYLOADS.get(num) or _timed(num)[0]
        second, _ = _timed(num)
        assert first == second, CRITERIA[num][0]
