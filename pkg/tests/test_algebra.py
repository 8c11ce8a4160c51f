from itertools import permutations, product as iproduct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crystallo.algebra import (
    FiniteAlgebra,
    Homomorphism,
    brute_force_homs,
    canonical_form,
    decode,
    encode,
    enumerate_homs,
    enumerate_models,
    is_homomorphism,
    one_element,
    product,
    quotient,
    relabel,
    subalgebra,
    subalgebra_closure,
)
from crystallo.congruences import Congruence, kernel_congruence
from crystallo.constructions import (
    builtin_algebra,
    builtin_variety,
    cyclic_group,
    h_functor,
    klein_group,
    w_functor,
)
from crystallo.errors import BudgetExhausted, CapExceeded, CongruenceError, NotAHomomorphism, TableError
from crystallo.specs import Signature, check_identities, parse_variety

from strategies import algebras, signatures

Z2, Z3, Z4 = cyclic_group(2), cyclic_group(3), cyclic_group(4)


def test_table_validation():
    sig = Signature((("m", 2),))
    with pytest.raises(TableError):
        FiniteAlgebra(sig, 2, {"m": (0, 1, 1)})
    with pytest.raises(TableError):
        FiniteAlgebra(sig, 2, {"m": (0, 1, 1, 2)})
    with pytest.raises(TableError):
        FiniteAlgebra(sig, 2, {})


def test_equality_ignores_name():
    assert Z2.renamed("other") == Z2
    assert hash(Z2.renamed("other")) == hash(Z2)


def test_product_of_z2_z2():
    p, (p0, p1) = product([Z2, Z2])
    assert p.size == 4
    for x, y in iproduct(range(2), repeat=2):
        e = 2 * x + y
        assert (p0(e), p1(e)) == (x, y)
    assert p == klein_group()


def test_unary_product_is_identity_encoding():
    p, (proj,) = product([Z3])
    assert p == Z3 and proj.map == (0, 1, 2)


def test_product_stays_in_hex3():
    p, _ = product([h_functor(Z2), h_functor(Z3)])
    assert check_identities(p, builtin_variety("Hex3").equations).satisfied


def test_mixed_radix_encoding():
    sizes = (2, 3, 4)
    codes = [encode(c, sizes) for c in iproduct(*(range(s) for s in sizes))]
    assert codes == list(range(24))
    assert decode(17, sizes) == (1, 1, 1)


def test_subalgebra_closure_examples():
    hz4 = h_functor(Z4)
    assert subalgebra_closure(hz4, []) == (0,)
    assert subalgebra_closure(hz4, range(4)) == (0, 1, 2, 3)
    assert subalgebra_closure(Z4, [2]) == (0, 2)


def test_subalgebra_inclusion_is_homomorphism():
    sub, inc = subalgebra(Z4, [0, 2])
    assert sub == Z2
    assert inc.map == (0, 2) and inc.is_injective


def test_quotient_examples():
    q, proj = quotient(Z4, Congruence.from_blocks(4, [[0, 2], [1, 3]]))
    assert q == Z2 and proj.map == (0, 1, 0, 1)
    q, _ = quotient(Z3, Congruence.discrete(3))
    assert q == Z3
    q, _ = quotient(Z3, Congruence.indiscrete(3))
    assert q.size == 1
    with pytest.raises(CongruenceError):
        quotient(Z4, Congruence.from_blocks(4, [[0, 1], [2, 3]]))


def test_hom_examples():
    hz2 = h_functor(Z2)
    assert [h.map for h in enumerate_homs(hz2, hz2)] == [(0, 0), (0, 1)]
    one = one_element(hz2.signature)
    assert len(enumerate_homs(one, hz2)) == 1
    assert enumerate_homs(h_functor(Z3), w_functor(3, 1), only_bijective=True) == []


def test_hom_budget():
    with pytest.raises(BudgetExhausted):
        enumerate_homs(klein_group(), klein_group(), budget=1)


def test_not_a_homomorphism():
    with pytest.raises(NotAHomomorphism):
        Homomorphism(Z2, Z2, (1, 0))
    assert not is_homomorphism(Z3, Z3, (0, 2, 2))


def test_composition_and_identity():
    f = Homomorphism(Z4, Z2, (0, 1, 0, 1))
    g = Homomorphism(Z2, Z4, (0, 2))
    assert f.then(g).map == (0, 2, 0, 2)
    assert Homomorphism.identity(Z4).then(f) == f


def test_model_counts():
    grp = builtin_variety("Grp")
    assert len(list(enumerate_models(grp, 1))) == 1
    assert len(list(enumerate_models(grp, 3))) == 1
    assert len(list(enumerate_models(grp, 4))) == 4
    imp = builtin_variety("Imp")
    models = list(enumerate_models(imp, 2, pins={"1": 1}))
    assert len(models) == 1
    assert models[0].tables["i"] == (1, 1, 0, 1)


def test_model_count_oracle_for_pinned_groups():
    # brute force over all 3^9 tables with unit 0 and the forced inverse
    grp = builtin_variety("Grp")
    count = 0
    for mul in iproduct(range(3), repeat=9):
        inv = []
        for x in range(3):
            ys = [y for y in range(3) if mul[3 * x + y] == 0]
            if not ys:
                break
            inv.append(ys[0])
        else:
            a = FiniteAlgebra(grp.signature, 3, {"mul": mul, "inv": tuple(inv)}, {"e": 0})
            count += check_identities(a, grp.equations, limit=1).satisfied
    assert count == len(list(enumerate_models(grp, 3)))


def test_models_without_pin_are_all_labelings():
    v = parse_variety("""variety G { op mul/2; op inv/1; const e;
      eq mul(mul(x, y), z) = mul(x, mul(y, z)); eq mul(e, x) = x; eq mul(x, e) = x;
      eq mul(inv(x), x) = e; eq mul(x, inv(x)) = e; }""")
    assert [len(list(enumerate_models(v, n))) for n in range(1, 5)] == [1, 2, 3, 16]
    assert len(list(enumerate_models(v, 4, canonical=True))) == 2


def test_model_stream_truncation():
    stream = enumerate_models(builtin_variety("Grp"), 4, budget=5)
    assert list(stream) == [] and stream.truncated


def test_models_come_in_lexicographic_order():
    models = list(enumerate_models(builtin_variety("Mag"), 2))
    keys = [(m.consts["0"], m.tables["m"]) for m in models]
    assert keys == sorted(keys)


def test_canonical_form():
    for perm in permutations(range(3)):
        assert canonical_form(relabel(Z3, perm)) == canonical_form(Z3)
    with pytest.raises(CapExceeded):
        canonical_form(builtin_algebra("Z2*Z2*Z2"), max_size=6)


@st.composite
def algebra_pairs(draw):
    sig = draw(signatures(max_ops=2, max_arity=2))
    return draw(algebras(sig, max_size=3)), draw(algebras(sig, max_size=3))


@given(algebra_pairs())
def test_homs_match_brute_force(pair):
    a, b = pair
    assert [h.map for h in enumerate_homs(a, b)] == brute_force_homs(a, b)


@given(algebra_pairs())
def test_bijective_homs_are_bijective_homs(pair):
    a, b = pair
    expected = [m for m in brute_force_homs(a, b) if len(set(m)) == a.size == b.size]
    assert [h.map for h in enumerate_homs(a, b, only_bijective=True)] == expected


@given(algebra_pairs())
def test_projections_are_jointly_injective(pair):
    a, b = pair
    p, projs = product([a, b])
    images = {tuple(pr(x) for pr in projs) for x in p.elements}
    assert len(images) == p.size


@given(algebras(max_size=3))
def test_homs_compose(a):
    homs = enumerate_homs(a, a)
    for f in homs[:4]:
        for g in homs[:4]:
            assert f.then(g) in homs


@given(algebras(max_size=3))
def test_first_isomorphism(a):
    for f in enumerate_homs(a, a)[:3]:
        q, _ = quotient(a, kernel_congruence(f))
        img, _ = subalgebra(a, f.image())
        assert q.size == img.size
        assert enumerate_homs(q, img, only_bijective=True)
