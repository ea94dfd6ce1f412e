from fractions import Fraction

import pytest

from cbtool.bundle import build_chain_bundle
from cbtool.bundle import ChainBundle
from cbtool.bundle import CochainBundle
from cbtool.bundle import compose_maps
from cbtool.bundle import dualize
from cbtool.bundle import dualize_map
from cbtool.bundle import factorize_map
from cbtool.bundle import FamilyMap
from cbtool.bundle import functor_equals
from cbtool.bundle import identity_map
from cbtool.bundle import is_full
from cbtool.bundle import is_subchain_bundle
from cbtool.bundle import make_map
from cbtool.bundle import map_equals
from cbtool.bundle import MixedBackends
from cbtool.bundle import NotFull
from cbtool.bundle import NotInvertible
from cbtool.bundle import product_bundle
from cbtool.bundle import ShapeMismatch
from cbtool.bundle import TableMap
from cbtool.bundle import validate_chain_bundle_map
from cbtool.category import Morphism
from cbtool.category import ProductsUnsupported
from cbtool.category import SubobjectChoice
from cbtool.fingrp import FinGrp
from cbtool.subz import SubZ

Z = SubZ()


def bundle(*keys):
    return build_chain_bundle(Z, [Z.obj(k) for k in keys])


def scalar_map(source, target, scalars, generators, scales=None):
    """Vertex scalars top first and one family map per consecutive homset."""
    vertices = [Morphism(a, b, Fraction(q)) for a, b, q in zip(source.levels, target.levels, scalars)]
    scales = scales or [1] * len(generators)
    maps = {}
    for (i, j), g, c in zip(source.arrow_keys(), generators, scales):
        maps[(i, j)] = FamilyMap(Fraction(c), Fraction(g))
    return make_map(source, target, vertices, maps)


def map_f(first=Fraction(2), last=Fraction(1, 5)):
    return scalar_map(bundle(3, 2, 5), bundle(6, 4, 1), [first, 2, last], ["2/3", "1/4", 0], [1, 1, 0])


def map_g():
    return scalar_map(bundle(3, 2, 5), bundle(6, 4, 1), [4, 4, "2/5"], ["2/3", "1/4", 0], [1, 1, 0])


def test_bundle_shape():
    c = bundle(3, 2, 5)
    assert c.levels[-1] == Z.zero()
    assert c.height == 3
    assert c.level(3) == Z.obj(3)
    assert c.level(0) == Z.zero()
    assert c.arrow_keys() == [(3, 2), (2, 1), (1, 0)]
    assert c.path(3, 0) == [(3, 2), (2, 1), (1, 0)]
    assert c.homset(3, 2).generator == Fraction(2, 3)
    assert str(c) == "3ℤ ⇛ 2ℤ ⇛ 5ℤ ⇛ 0"
    assert c.padded(6).levels[:2] == (Z.zero(), Z.zero())

    with pytest.raises(ShapeMismatch):
        c.level(4)
    with pytest.raises(ShapeMismatch):
        build_chain_bundle(Z, [])
    with pytest.raises(MixedBackends):
        build_chain_bundle(Z, [FinGrp().zero()])


def test_scalar_maps_validate():
    assert validate_chain_bundle_map(map_f()).valid
    assert validate_chain_bundle_map(map_g()).valid
    assert validate_chain_bundle_map(map_f(), symbolic=False, scope=6).valid


def test_tampered_vertex_reports_square():
    report = validate_chain_bundle_map(map_f(last=Fraction(3, 5)))
    assert not report.valid
    assert report.first("square").witness == (2, 1, 1)

    brute = validate_chain_bundle_map(map_f(last=Fraction(3, 5)), symbolic=False, scope=4)
    assert "square" in brute.rules()


def test_vertex_outside_homset():
    F = map_f(first=Fraction(1))
    assert validate_chain_bundle_map(F).first("vertex.type").witness == (3,)


def test_missing_and_partial_homset_maps():
    F = map_f()
    missing = make_map(F.source, F.target, F.vertex_maps, {(3, 2): F.homset_maps[(3, 2)]})
    assert validate_chain_bundle_map(missing).first("homset_map.missing").witness == (2, 1)

    table = dict(F.homset_maps)
    table[(3, 2)] = TableMap.of({Fraction(2, 3): Fraction(2, 3)})
    report = validate_chain_bundle_map(make_map(F.source, F.target, F.vertex_maps, table))
    assert report.first("homset_map.total").witness[:2] == (3, 2)

    with pytest.raises(ShapeMismatch):
        make_map(F.source, F.target, F.vertex_maps, {(3, 1): F.homset_maps[(3, 2)]})


def test_homset_map_range():
    F = scalar_map(bundle(3, 2, 5), bundle(6, 4, 1), [2, 2, "1/5"], ["2/3", "1/4", 0], ["1/2", 1, 0])
    assert validate_chain_bundle_map(F).first("homset_map.range").witness == (3, 2, 1)


def test_endomorphism_maps():
    F = map_f()
    maps = dict(F.homset_maps)
    maps[(2, 2)] = FamilyMap(Fraction(1), Fraction(1))
    assert validate_chain_bundle_map(make_map(F.source, F.target, F.vertex_maps, maps)).valid

    maps[(2, 2)] = FamilyMap(Fraction(-1), Fraction(1))
    report = validate_chain_bundle_map(make_map(F.source, F.target, F.vertex_maps, maps))
    assert report.first("functor.identity").witness == (2,)


def test_map_versus_functor_equality():
    F, G = map_f(), map_g()
    assert map_equals(F, G) == (False, True)
    assert functor_equals(F, G)
    assert map_equals(F, map_f()) == (True, True)


def test_identity_and_composition():
    F = map_f()
    assert validate_chain_bundle_map(identity_map(F.source)).valid
    assert map_equals(compose_maps(identity_map(F.source), F), F)[0]
    assert map_equals(compose_maps(F, identity_map(F.target)), F)[0]


def test_subchain_bundles():
    c = bundle(3, 2, 8)
    verdict = is_subchain_bundle(bundle(6, 4, 16), c)
    assert verdict.holds
    assert validate_chain_bundle_map(verdict.witness).valid
    assert all(Z.is_inclusion(f) for f in verdict.witness.vertex_maps)

    verdict = is_subchain_bundle(bundle(9, 4, 16), c)
    assert not verdict.holds
    assert verdict.pair == ("9ℤ", "4ℤ")
    assert verdict.message() == "level (9ℤ, 4ℤ): 4/9 not in family 2/3·k"

    assert is_subchain_bundle(c, c).holds


def test_subchain_needs_levelwise_inclusions():
    verdict = is_subchain_bundle(bundle(3, 2, 8), bundle(6, 4, 16))
    assert not verdict.holds
    assert verdict.level == 3


def test_strict_corestriction():
    c = bundle(3, 2, 8)
    assert not is_subchain_bundle(bundle(6, 4, 16), c, strict=True).holds
    assert is_subchain_bundle(c, c, strict=False).holds


def test_fingrp_subchain():
    G = FinGrp()
    s3 = G.objects()[5]
    a3 = G.objects()[4]
    big = build_chain_bundle(G, [s3, s3])
    small = build_chain_bundle(G, [a3, a3])
    verdict = is_subchain_bundle(small, big)
    assert verdict.holds
    assert validate_chain_bundle_map(verdict.witness).valid


def test_is_full():
    assert is_full(map_g()) == (True, None)
    F = scalar_map(bundle(3, 2, 5), bundle(6, 4, 1), [4, 4, "2/5"], ["2/3", "1/4", 0], [2, 1, 0])
    assert is_full(F) == (False, (3, 2))
    with pytest.raises(NotFull):
        factorize_map(F)


def test_factorize_through_images():
    G = map_g()
    fact = factorize_map(G)
    assert [o.key for o in fact.middle.levels] == [12, 8, 2, 0]
    assert str(fact.middle) == "12ℤ ⇛ 8ℤ ⇛ 2ℤ ⇛ 0"
    assert all(Z.is_epi(f) for f in fact.epi.vertex_maps)
    assert all(Z.is_inclusion(f) for f in fact.inclusion.vertex_maps)
    assert validate_chain_bundle_map(fact.epi).valid
    assert validate_chain_bundle_map(fact.inclusion).valid
    assert map_equals(compose_maps(fact.epi, fact.inclusion), G)[0]
    assert is_full(fact.epi)[0]


def assert_factorization(F, fact):
    cat = F.backend
    assert all(cat.is_epi(f) for f in fact.epi.vertex_maps)
    assert all(SubobjectChoice.of_inclusions(cat).contains(f) for f in fact.inclusion.vertex_maps)
    assert validate_chain_bundle_map(fact.epi).valid
    assert validate_chain_bundle_map(fact.inclusion).valid
    assert map_equals(compose_maps(fact.epi, fact.inclusion), F)[0]


def test_factorize_group_map():
    G = FinGrp()
    s3, a3 = G.objects()[5], G.objects()[4]
    c = build_chain_bundle(G, [s3, a3])
    onto_order_two = [f for f in G.homset(s3, s3).members() if len(set(f.payload)) == 2][0]
    maps = {key: TableMap.of({f.payload: f.payload for f in c.homset(*key).members()}) for key in c.arrow_keys()}
    F = make_map(c, c, [onto_order_two, G.zero_morphism(a3, a3)], maps)
    assert validate_chain_bundle_map(F).valid

    fact = factorize_map(F)
    assert [len(G.elements(o)) for o in fact.middle.levels] == [2, 1, 1]
    assert_factorization(F, fact)


def test_factorize_identity_maps():
    G = FinGrp()
    for c in (bundle(3, 2, 5), build_chain_bundle(G, [G.objects()[5], G.objects()[4]])):
        F = identity_map(c)
        fact = factorize_map(F)
        assert fact.middle == c
        assert all(c.backend.is_inclusion(f) for f in fact.inclusion.vertex_maps)
        assert_factorization(F, fact)


def test_products_refused_over_subgroups_of_integers():
    with pytest.raises(ProductsUnsupported):
        product_bundle(bundle(2), bundle(3))


def test_dualize():
    c = bundle(3, 2, 5)
    d = dualize(c)
    assert isinstance(d, CochainBundle)
    assert d.backend.id == "op(subz)"
    assert d.level(0).key == 0 and d.level(3).key == 3
    assert d.arrow_keys() == [(0, 1), (1, 2), (2, 3)]
    assert d.homset(2, 3).generator == Fraction(2, 3)

    back = dualize(d)
    assert isinstance(back, ChainBundle) and not isinstance(back, CochainBundle)
    assert back == c
    assert back.backend is Z


def test_dualize_map():
    F = map_f()
    D = dualize_map(F)
    assert D.source == dualize(F.target)
    assert D.target == dualize(F.source)
    assert validate_chain_bundle_map(D).valid
    assert validate_chain_bundle_map(D, symbolic=False, scope=3).valid

    twice = dualize_map(D)
    assert map_equals(twice, F)[0]


def test_dualize_map_needs_bijective_homset_maps():
    G = FinGrp()
    s3, a3 = G.objects()[5], G.objects()[4]
    verdict = is_subchain_bundle(build_chain_bundle(G, [a3, a3]), build_chain_bundle(G, [s3, s3]))
    assert verdict.holds
    with pytest.raises(NotInvertible):
        dualize_map(verdict.witness)
