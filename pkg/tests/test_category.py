from fractions import Fraction

import pytest

from cbtool.category import BackendMismatch
from cbtool.category import CategoryError
from cbtool.category import ExplicitList
from cbtool.category import family_order
from cbtool.category import InfiniteHomset
from cbtool.category import is_groupoid
from cbtool.category import Morphism
from cbtool.category import NonComposable
from cbtool.category import NotAMember
from cbtool.category import ObjectRef
from cbtool.category import OppositeCategory
from cbtool.category import SubobjectChoice
from cbtool.category import validate_subobject_choice
from cbtool.category import ValidationReport
from cbtool.fingrp import FinGrp
from cbtool.subz import SubZ

Z = SubZ()


def test_family_order():
    assert family_order(2) == [0, 1, -1, 2, -2]
    assert family_order(0) == [0]


def test_homset_family_members():
    hom = Z.homset(Z.obj(3), Z.obj(2))
    assert hom.generator == Fraction(2, 3)
    assert hom.member(3).payload == 2
    assert hom.index_of(Morphism(Z.obj(3), Z.obj(2), Fraction(-4, 3))) == -2
    assert hom.index_of(Morphism(Z.obj(3), Z.obj(2), Fraction(1, 3))) is None
    assert [f.payload for f in hom.sample(1)] == [0, Fraction(2, 3), Fraction(-2, 3)]

    with pytest.raises(InfiniteHomset):
        hom.members()


def test_zero_family_is_finite():
    hom = Z.homset(Z.obj(5), Z.zero())
    assert hom.is_finite
    assert [f.payload for f in hom.members()] == [0]


def test_explicit_list_rejects_duplicates():
    a = ObjectRef("x", "a")
    f = Morphism(a, a, "f")
    with pytest.raises(CategoryError):
        ExplicitList((f, f))


def test_report():
    report = ValidationReport()
    assert report.valid

    report.add("square", 2, 1, 1)
    inner = ValidationReport()
    inner.add("cat1.assoc", "f", "g", "h")
    report.extend(inner, "arrow")

    assert not report.valid
    assert report.rules() == ["cat1.assoc", "square"]
    assert report.first("cat1.assoc").witness == ("arrow", "f", "g", "h")
    assert report.first("cat2.unit") is None


def test_compose_checks_endpoints():
    f = Z.morphism(Z.obj(3), Z.obj(2), Fraction(2, 3))
    g = Z.morphism(Z.obj(2), Z.obj(5), Fraction(5, 2))
    assert Z.compose(f, g).payload == Fraction(5, 3)
    assert Z.compose_all(Z.identity(Z.obj(3)), f, g) == Z.compose(f, g)

    with pytest.raises(NonComposable):
        Z.compose(g, f)

    G = FinGrp()
    with pytest.raises(BackendMismatch):
        Z.compose(f, G.identity(G.zero()))


def test_morphism_membership():
    with pytest.raises(NotAMember):
        Z.morphism(Z.obj(9), Z.obj(4), Fraction(2, 3))
    with pytest.raises(CategoryError):
        Z.obj(-1)


def test_opposite():
    op = Z.opposite()
    assert isinstance(op, OppositeCategory)
    assert op.id == "op(subz)"
    assert op.opposite() is Z

    a, b = op.obj(2), op.obj(3)
    hom = op.homset(a, b)
    assert hom.generator == Fraction(2, 3)

    f = op.morphism(a, b, Fraction(2, 3))
    g = op.morphism(op.obj(5), a, Fraction(5, 2))
    assert op.compose(g, f).payload == Fraction(5, 3)
    assert op.compose(g, f).source == op.obj(5)

    # 5ℤ → ℤ by 1/5 is epi in the base
    h = Morphism(op.obj(1), op.obj(5), Fraction(1, 5))
    assert op.is_mono(h)
    assert op.is_inclusion(op.identity(a))
    assert not op.is_subobject(op.obj(4), op.obj(2))


def test_subobject_choice_of_inclusions():
    G = FinGrp()
    report = validate_subobject_choice(SubobjectChoice.of_inclusions(G), G.objects())
    assert report.valid


def test_subobject_choice_rejects_zero_arrow():
    two, zero = Z.obj(2), Z.zero()
    choice = SubobjectChoice.from_morphisms(
        Z, [Z.identity(two), Z.identity(zero), Z.zero_morphism(two, zero)]
    )
    report = validate_subobject_choice(choice, [zero, two])
    assert "subobject.mono" in report.rules()


def test_subobject_choice_rejects_cycles():
    G = FinGrp()
    c2a, c2b = G.objects()[1], G.objects()[2]
    iso = [f for f in G.homset(c2a, c2b).members() if G.is_isomorphism(f)][0]
    back = G.inverse(iso)
    choice = SubobjectChoice.from_morphisms(G, [G.identity(c2a), G.identity(c2b)] + [iso, back])
    report = validate_subobject_choice(choice, [c2a, c2b])
    assert "subobject.antisymmetry" in report.rules()


def test_groupoid_verdicts():
    verdict = is_groupoid(FinGrp())
    assert not verdict.groupoid
    assert verdict.witness is not None
