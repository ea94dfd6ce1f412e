import itertools
import json
import logging
import os
from fractions import Fraction

import pytest

from cbtool.bundle import build_chain_bundle
from cbtool.category import InfiniteHomset
from cbtool.category import SearchSpaceTooLarge
from cbtool.chains import AmbiguousChoice
from cbtool.chains import BoundaryCondition
from cbtool.chains import build_gamma
from cbtool.chains import ChainMap
from cbtool.chains import ExplicitChoice
from cbtool.chains import extract_chains
from cbtool.chains import extract_complexes
from cbtool.chains import InclusionsOnly
from cbtool.chains import is_subchain
from cbtool.chains import lcm_fraction
from cbtool.chains import validate_chain_map
from cbtool.document import load_file
from cbtool.fingrp import FinGrp
from cbtool.presented import PresentedCategory
from cbtool.presented import validate_category_axioms
from cbtool.subz import SubZ

DATA = os.path.join(os.path.dirname(__file__), "data")
Z = SubZ()
G = FinGrp()
S3, A3 = G.objects()[5], G.objects()[4]


def data(name):
    return os.path.join(DATA, name)


def keys(chain):
    return [v.key for v in chain.vertices]


def runs():
    return load_file(data("bundle_inclusion_runs.json"))


def test_inclusion_runs():
    chains = extract_chains(runs(), InclusionsOnly())
    assert [keys(c) for c in chains] == [[18, 9, 3, 0], [8, 4, 2, 0], [5, 0]]
    assert str(chains[0]) == "18ℤ → 9ℤ → 3ℤ → 0"
    assert [f.payload for f in chains[0].arrows] == [1, 1, 0]


def test_explicit_choice():
    selector = load_file(data("selector_explicit.json"))
    chains = extract_chains(runs(), selector)
    assert [keys(c) for c in chains] == [[18, 9, 3, 0], [8, 0], [4, 0], [2, 0], [5, 0]]
    assert [f.payload for f in chains[0].arrows] == [2, 3, 0]

    assert extract_chains(runs(), ExplicitChoice()) == extract_chains(runs(), ExplicitChoice({3: None}))


def test_ambiguous_inclusions():
    with open(data("category_zero_arrow.json")) as f:
        doc = json.load(f)
    doc["inclusions"] = ["from_zero", "zero_a"]
    cat = PresentedCategory.from_document(doc)
    bundle = build_chain_bundle(cat, [cat.obj("a"), cat.obj("a")])
    with pytest.raises(AmbiguousChoice):
        extract_chains(bundle, InclusionsOnly())


def test_complexes():
    assert len(extract_complexes(build_chain_bundle(G, [S3, A3]))) == 1
    complexes = extract_complexes(build_chain_bundle(G, [S3, S3, A3]))
    assert len(complexes) == 10
    for chain in complexes:
        for d, e in zip(chain.arrows, chain.arrows[1:]):
            assert G.is_zero_morphism(G.compose(d, e))

    with pytest.raises(SearchSpaceTooLarge):
        extract_complexes(build_chain_bundle(G, [S3, S3, A3]), bound=5)

    assert extract_chains(build_chain_bundle(G, [S3, A3]), BoundaryCondition()) == extract_complexes(
        build_chain_bundle(G, [S3, A3])
    )


def test_padding():
    chain = extract_chains(runs(), InclusionsOnly())[2]
    padded = chain.padded(4)
    assert keys(padded) == [0, 0, 5, 0]
    assert len(padded.arrows) == 3
    assert chain.padded(2) is chain


def test_subchains():
    big = extract_chains(build_chain_bundle(Z, [Z.obj(18), Z.obj(9), Z.obj(3)]), InclusionsOnly())[0]
    small = extract_chains(build_chain_bundle(Z, [Z.obj(36), Z.obj(18), Z.obj(6)]), InclusionsOnly())[0]
    inclusion = is_subchain(small, big)
    assert inclusion is not None
    assert all(Z.is_inclusion(f) for f in inclusion.maps)
    assert is_subchain(big, small) is None


def test_lcm_fraction():
    assert lcm_fraction(Fraction(4, 9), Fraction(2, 3)) == Fraction(4, 3)
    assert lcm_fraction(Fraction(1, 2), Fraction(1, 3)) == 1
    assert lcm_fraction(Fraction(6), Fraction(4)) == 12


def test_gamma_over_scalars():
    gamma = build_gamma([runs()], InclusionsOnly())
    assert len(gamma.chains) == 3
    assert all(c.length == 4 for c in gamma.chains)
    assert not gamma.is_finite

    space = gamma.homset(0, 1)
    assert len(space.free_blocks) == 1
    assert space.free_blocks[0].generator == Fraction(4, 3)
    assert space.describe() == "4/3ℤ@[0, 1, 2]"

    F = space.member([1])
    assert [f.payload for f in F.maps] == [Fraction(4, 3)] * 3 + [0]
    assert validate_chain_map(F, gamma.chains[0], gamma.chains[1]).valid
    assert space.contains(F)
    assert space.contains(space.member([-2]))

    assert gamma.homset(0, 2).describe() == "{0}"
    assert gamma.homset(0, 0).contains(gamma.identity(0))

    with pytest.raises(InfiniteHomset):
        gamma.to_presented()


def test_broken_chain_map():
    gamma = build_gamma([runs()], InclusionsOnly())
    source, target = gamma.chains[0], gamma.chains[1]
    maps = [Fraction(4, 3), Fraction(8, 3), Fraction(4, 3), Fraction(0)]
    F = ChainMap(tuple(Z.morphism(a, b, q) for a, b, q in zip(source.vertices, target.vertices, maps)))

    report = validate_chain_map(F, source, target)
    assert report.first("square").witness == (3,)
    assert not gamma.homset(0, 1).contains(F)


def test_gamma_over_groups():
    bundle = build_chain_bundle(G, [S3, A3])
    gamma = build_gamma([bundle], BoundaryCondition())
    assert len(gamma.chains) == 1
    assert gamma.is_finite
    assert len(gamma.homset(0, 0)) == 30

    cat = gamma.to_presented()
    assert validate_category_axioms(cat).valid
    assert cat.identity(cat.obj("C0")).payload == "C0->C0#" + str(gamma.homset(0, 0).index(gamma.identity(0)))

    with pytest.raises(SearchSpaceTooLarge):
        build_gamma([bundle], BoundaryCondition(), candidate_bound=5)


def complexes_by_nested_loops(bundle):
    homs = [bundle.homset(i, i - 1).members() for i in range(bundle.height, 0, -1)]
    return [
        arrows
        for arrows in itertools.product(*homs)
        if all(G.is_zero_morphism(G.compose(d, e)) for d, e in zip(arrows, arrows[1:]))
    ]


def test_complexes_match_nested_loops():
    for size in (1, 2, 3):
        for levels in itertools.product(G.objects(), repeat=size):
            bundle = build_chain_bundle(G, list(levels))
            found = [c.arrows for c in extract_complexes(bundle)]
            assert found == complexes_by_nested_loops(bundle), levels


def test_complex_search_is_logged(caplog):
    caplog.set_level(logging.DEBUG)
    extract_complexes(build_chain_bundle(G, [S3, S3, A3]))
    assert "scanned 10 selections, 10 are complexes" in caplog.text

    caplog.clear()
    with pytest.raises(SearchSpaceTooLarge):
        extract_complexes(build_chain_bundle(G, [S3, S3, A3]), bound=5)
    assert [r.levelname for r in caplog.records if r.levelno >= logging.INFO] == ["INFO"]
    assert "10 selections exceed the bound 5" in caplog.text
