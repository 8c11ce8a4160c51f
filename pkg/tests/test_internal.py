from itertools import product as iproduct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crystallo.algebra import FiniteAlgebra, enumerate_homs, one_element
from crystallo.congruences import check_lattice_laws
from crystallo.constructions import (
    boolean_implication,
    cyclic_group,
    cyclic_monoid,
    discriminator,
    group_maltsev,
    h_functor,
    jt_magma_fixture,
    klein_group,
    max_monoid,
    sample_set,
    small_builtin_algebras,
)
from crystallo.errors import BudgetExhausted, MultipleCooperators, NotAHomomorphism, ValidationError
from crystallo.internal import (
    STRUCTURE_NAMES,
    InternalStructure,
    SampleResult,
    Verdict,
    brute_force_internal,
    builtin_structure,
    classify_object,
    cooperator,
    crystallography_report,
    decide,
    dual_structure,
    enumerate_internal,
    subtraction_to_group,
    unit_candidates,
)
from crystallo.specs import Signature, check_identities

from strategies import algebras, signatures

Z2, Z3, Z4 = cyclic_group(2), cyclic_group(3), cyclic_group(4)


def test_builtin_names():
    assert "abelian-group" in STRUCTURE_NAMES and "pixley-maltsev" in STRUCTURE_NAMES
    with pytest.raises(ValidationError):
        builtin_structure("ring")


def test_spec_order_is_consts_then_arity():
    assert builtin_structure("group").order == ["e", "inv", "mul"]


def test_abelian_group_on_hz2():
    res = enumerate_internal(h_functor(Z2), "abelian-group")
    assert len(res) == 1
    st_ = res[0]
    assert st_.tables["mul"] == (0, 1, 1, 0) and st_.consts["e"] == 0


def test_maltsev_on_z2():
    res = enumerate_internal(Z2, "maltsev")
    assert len(res) == 1
    assert res[0].tables["p"] == tuple((x + y + z) % 2 for x, y, z in iproduct(range(2), repeat=3))


def test_no_group_on_discriminator():
    assert len(enumerate_internal(discriminator(3), "group")) == 0


def test_one_element_carries_everything_once():
    for name in STRUCTURE_NAMES:
        for a in (one_element(Z2.signature), one_element(discriminator(2).signature)):
            assert len(enumerate_internal(a, name)) == 1
            assert len(brute_force_internal(a, name)) == 1


def test_no_implication_structure_on_b1():
    assert brute_force_internal(boolean_implication(1), "implication-algebra") == []
    assert len(enumerate_internal(boolean_implication(1), "implication-algebra")) == 0


def test_unit_candidates():
    assert unit_candidates(Z3) == (0,)
    assert unit_candidates(discriminator(3)) == (0, 1, 2)
    assert unit_candidates(h_functor(Z3)) == (0,)


def test_budget_truncation():
    res = enumerate_internal(klein_group(), "group", budget=3)
    assert res.truncated
    with pytest.raises(BudgetExhausted):
        enumerate_internal(klein_group(), "group", budget=3, strict=True)


def test_found_structures_validate():
    for a in (Z2, Z3, klein_group(), h_functor(Z3)):
        for name in ("group", "maltsev", "subtraction"):
            for s in enumerate_internal(a, name):
                assert s.validate() is s


def test_validate_rejects_non_homomorphism():
    bad = InternalStructure(Z3, builtin_structure("unitary-magma"), {"add": (0, 1, 2, 1, 0, 2, 2, 2, 0)}, {"0": 0})
    with pytest.raises(NotAHomomorphism):
        bad.validate()


# ------------------------------------------------------------- cooperators


def test_cooperator_on_z2_monoid():
    phi = cooperator(cyclic_monoid(2), [0, 1], [0, 1])
    assert phi.map == (0, 1, 1, 0)


def test_cooperator_with_zero_subalgebra():
    a = cyclic_monoid(3)
    phi = cooperator(a, [0], [0, 1, 2])
    assert phi.map == (0, 1, 2)


def test_jt_fixture_has_no_cooperator():
    assert cooperator(jt_magma_fixture(), [0, 1], [0, 2]) is None


def test_multiple_cooperators():
    # with only a unary operation, (1, 1) is not generated by the two axes
    sig = Signature((("f", 1),), ("0",))
    a = FiniteAlgebra(sig, 2, {"f": (0, 1)}, {"0": 0})
    with pytest.raises(MultipleCooperators) as info:
        cooperator(a, [0, 1], [0, 1])
    assert [h.map for h in info.value.maps] == [(0, 1, 1, 0), (0, 1, 1, 1)]


def test_classify_objects():
    c = classify_object(h_functor(Z3))
    assert c.commutative and c.abelian
    assert c.group.tables["mul"] == tuple((x + y) % 3 for x in range(3) for y in range(3))
    one = classify_object(one_element(h_functor(Z2).signature))
    assert one.commutative and one.abelian
    m = classify_object(max_monoid(2))
    assert m.commutative and not m.abelian
    assert m.monoid.tables["add"] == (0, 1, 1, 1)


# ------------------------------------------------------------- subtraction


def test_subtraction_recovers_z3():
    a = h_functor(Z3)
    s = InternalStructure(
        a, builtin_structure("subtraction"), {"s": tuple(a.op("p1", x, y, 0) for x in range(3) for y in range(3))}, {"0": 0}
    ).validate()
    rec = subtraction_to_group(a, s)
    assert rec.ok
    assert rec.group.tables["mul"] == tuple((x + y) % 3 for x in range(3) for y in range(3))


def test_subtraction_on_one_element():
    a = one_element(Z2.signature)
    (s,) = enumerate_internal(a, "subtraction")
    assert subtraction_to_group(a, s).group.tables["mul"] == (0,)


def test_every_hex3_subtraction_gives_a_unique_group():
    for a in sample_set("hex3-small"):
        subs = enumerate_internal(a, "subtraction")
        groups = enumerate_internal(a, "abelian-group")
        assert len(subs) <= 1 and len(groups) <= 1
        for s in subs:
            rec = subtraction_to_group(a, s)
            assert rec.ok and rec.group.key() == groups[0].key()


# ------------------------------------------------------------------ duality


def test_dual_examples():
    (g,) = enumerate_internal(Z3, "abelian-group")
    assert dual_structure(g) == g
    (p,) = enumerate_internal(Z3, "maltsev")
    assert dual_structure(p) == p
    (s,) = enumerate_internal(Z3, "subtraction")
    with pytest.raises(ValidationError):
        dual_structure(s)


def test_duals_stay_in_emitted_set():
    for a in (Z2, Z3, klein_group(), group_maltsev(Z3)):
        for name in ("group", "unitary-magma", "maltsev"):
            found = enumerate_internal(a, name).structures
            for s in found:
                assert dual_structure(s) in found


# ----------------------------------------------------------------- verdicts


def _res(name, size, count, truncated=False):
    return SampleResult(name, size, [object()] * count, truncated)


def test_decide_orders():
    assert decide([_res("a", 2, 1), _res("b", 3, 1)])[0] == Verdict.INTENSIVELY
    assert decide([_res("a", 2, 1), _res("b", 3, 0)])[0] == Verdict.CRYSTALLOGRAPHIC
    assert decide([_res("a", 1, 1), _res("b", 3, 0)])[0] == Verdict.STRONGLY_TRIVIALIZES
    assert decide([_res("a", 0, 1), _res("c", 1, 1), _res("b", 3, 0)])[0] == Verdict.TRIVIALIZES
    assert decide([_res("a", 0, 1), _res("c", 1, 0), _res("b", 3, 0)])[0] == Verdict.WEAKLY_TRIVIALIZES
    assert decide([_res("a", 2, 1), _res("b", 3, 0, truncated=True)])[0] == Verdict.INCONCLUSIVE


def test_refuted_carries_two_witnesses():
    a = FiniteAlgebra(Signature((("f", 1),)), 2, {"f": (0, 1)}, name="set2")
    rep = crystallography_report([a], "maltsev")
    assert rep.verdict == Verdict.REFUTED
    assert rep.witness["sample"] == "set2" and len(rep.witness["structures"]) == 2


def test_report_examples():
    groups = [Z2, Z3, Z4, klein_group()]
    assert crystallography_report(groups, "idempotent-unitary-magma").verdict == Verdict.STRONGLY_TRIVIALIZES
    ones = [one_element(Z2.signature)]
    assert crystallography_report(ones, "group").verdict == Verdict.INTENSIVELY
    rep = crystallography_report(sample_set("hex3-small"), "abelian-group")
    assert rep.verdict == Verdict.INTENSIVELY


def test_report_jobs_do_not_change_output():
    samples = sample_set("hex3-small")
    one = crystallography_report(samples, "subtraction", jobs=1).to_json()
    two = crystallography_report(samples, "subtraction", jobs=2).to_json()
    assert one == two


# ------------------------------------------------------------- invariants


def test_oracle_equivalence_on_fixtures():
    for a in (Z2, Z3, discriminator(2), discriminator(3), h_functor(Z2), boolean_implication(1)):
        for name in ("unitary-magma", "group", "subtraction", "maltsev"):
            assert enumerate_internal(a, name).structures == brute_force_internal(a, name)


def test_maltsev_structures_are_affine():
    affine = builtin_structure("affine")
    for a in [Z2, Z3, Z4, klein_group(), group_maltsev(Z3)]:
        for s in enumerate_internal(a, "maltsev"):
            assert check_identities(s.as_algebra(), affine.equations).satisfied


def test_homs_preserve_unique_structures():
    samples = [h_functor(Z2), h_functor(Z4), h_functor(klein_group())]
    found = {a.name: enumerate_internal(a, "subtraction")[0] for a in samples}
    for a, b in iproduct(samples, repeat=2):
        sa, sb = found[a.name], found[b.name]
        for f in enumerate_homs(a, b):
            for x, y in iproduct(a.elements, repeat=2):
                assert f(sa.op("s", x, y)) == sb.op("s", f(x), f(y))


def test_weakly_distributive_samples_have_no_associative_maltsev():
    for a in sample_set("discriminators") + [one_element(discriminator(2).signature)]:
        if check_lattice_laws(a, "weakly-distributive").holds:
            found = enumerate_internal(a, "associative-maltsev")
            assert all(s.base.size <= 1 for s in found)


@settings(max_examples=25)
@given(algebras(sig=signatures(max_ops=1, max_arity=2, consts=("0",)), max_size=3),
       st.sampled_from(["unitary-magma", "subtraction", "commutative-monoid", "group"]))
def test_search_matches_brute_force_on_random_pointed(a, name):
    assert enumerate_internal(a, name).structures == brute_force_internal(a, name)


@settings(max_examples=25)
@given(algebras(sig=signatures(max_ops=1, max_arity=2, consts=()), max_size=3),
       st.sampled_from(["maltsev", "pixley-maltsev", "affine"]))
def test_search_matches_brute_force_on_random_plain(a, name):
    assert enumerate_internal(a, name).structures == brute_force_internal(a, name)


def test_small_builtins_cover_sizes():
    sizes = {a.size for a in small_builtin_algebras(3)}
    assert sizes == {1, 2, 3}
