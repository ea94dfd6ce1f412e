import logging
from fractions import Fraction
from typing import Any
from typing import Hashable
from typing import Optional
from typing import Tuple

from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import Factorization
from cbtool.category import Homset
from cbtool.category import Morphism
from cbtool.category import NotSubobjectPair
from cbtool.category import ObjectRef
from cbtool.category import ProductCone
from cbtool.category import ProductsUnsupported
from cbtool.category import ScalarFamily


def format_scalar(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_scalar(doc: Any) -> Fraction:
    if isinstance(doc, bool) or not isinstance(doc, (int, str)):
        raise CategoryError(f"scalar {doc!r} must be an integer or a 'p/q' string")
    try:
        return Fraction(doc)
    except (ValueError, ZeroDivisionError) as e:
        raise CategoryError(f"scalar {doc!r} is not a rational number") from e


class SubZ(Category):
    """Subgroups nℤ of the integers; n = 0 is the zero object.

    A morphism nℤ → mℤ is multiplication by a rational q with q·n ∈ mℤ.
    """

    id = "subz"
    scalar = True

    def zero(self) -> ObjectRef:
        return ObjectRef(self.id, 0)

    def has_object(self, obj: ObjectRef) -> bool:
        return obj.backend == self.id and isinstance(obj.key, int) and not isinstance(obj.key, bool) and obj.key >= 0

    def homset(self, a: ObjectRef, b: ObjectRef) -> Homset:
        self.check_backend(a, b)
        if a.key == 0 or b.key == 0:
            return Homset(a, b, ScalarFamily(Fraction(0)))
        return Homset(a, b, ScalarFamily(Fraction(b.key, a.key)))

    def identity(self, a: ObjectRef) -> Morphism:
        return Morphism(a, a, Fraction(1 if a.key else 0))

    def _compose(self, f: Morphism, g: Morphism) -> Morphism:
        return Morphism(f.source, g.target, Fraction(f.payload) * Fraction(g.payload))

    def zero_morphism(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        return Morphism(a, b, Fraction(0))

    def is_zero_morphism(self, f: Morphism) -> bool:
        return f.payload == 0

    def is_subobject(self, a: ObjectRef, b: ObjectRef) -> bool:
        return a.key == 0 or (b.key != 0 and a.key % b.key == 0)

    def inclusion(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        if not self.is_subobject(a, b):
            raise NotSubobjectPair(f"{self.format_object(a)} is not contained in {self.format_object(b)}")
        return Morphism(a, b, Fraction(1 if a.key else 0))

    def is_inclusion(self, f: Morphism) -> bool:
        return self.is_subobject(f.source, f.target) and f == self.inclusion(f.source, f.target)

    def left_divisors(self, f: Morphism, g: Morphism) -> Tuple[Morphism, ...]:
        hom = self.homset(f.source, g.source)
        if g.payload != 0:
            h = Morphism(f.source, g.source, Fraction(f.payload) / Fraction(g.payload))
            return (h,) if h in hom else ()
        if f.payload != 0:
            return ()
        return hom.members()

    def is_mono(self, f: Morphism) -> bool:
        return f.source.key == 0 or f.payload != 0

    def is_epi(self, f: Morphism) -> bool:
        """Surjective; right cancellation inside SubZ alone would accept every nonzero map."""
        if f.target.key == 0:
            return True
        return f.source.key != 0 and abs(f.payload) * f.source.key == f.target.key

    def is_isomorphism(self, f: Morphism) -> bool:
        return self.is_mono(f) and self.is_epi(f)

    def is_split_mono(self, f: Morphism) -> bool:
        return f.source.key == 0 or self.is_isomorphism(f)

    def is_split_epi(self, f: Morphism) -> bool:
        return f.target.key == 0 or self.is_isomorphism(f)

    def inverse(self, f: Morphism) -> Optional[Morphism]:
        if not self.is_isomorphism(f):
            return None
        if f.source.key == 0:
            return Morphism(f.target, f.source, Fraction(0))
        return Morphism(f.target, f.source, 1 / Fraction(f.payload))

    def canonical_factorize(self, f: Morphism) -> Factorization:
        self.check_backend(f)
        q = Fraction(f.payload)
        if q == 0 or f.source.key == 0:
            image = self.zero()
            return Factorization(Morphism(f.source, image, Fraction(0)), self.inclusion(image, f.target), image)

        image = ObjectRef(self.id, abs(int(q * f.source.key)))
        return Factorization(Morphism(f.source, image, q), self.inclusion(image, f.target), image)

    def corestriction_of(
        self, f_small: Morphism, big_source: ObjectRef, big_target: ObjectRef, strict: bool = False
    ) -> Optional[Morphism]:
        if not self.is_subobject(f_small.source, big_source) or not self.is_subobject(f_small.target, big_target):
            raise NotSubobjectPair(
                f"{self.format_morphism(f_small)} does not sit inside "
                f"{self.format_object(big_source)} → {self.format_object(big_target)}"
            )
        if strict and not self.is_epi(f_small):
            return None

        # scalars restrict to themselves; the zero source restricts anything
        q = Fraction(f_small.payload) if f_small.source.key != 0 else Fraction(0)
        g = Morphism(big_source, big_target, q)
        return g if g in self.homset(big_source, big_target) else None

    def restriction_of(self, g: Morphism, small_source: ObjectRef, small_target: ObjectRef) -> Optional[Morphism]:
        q = Fraction(g.payload) if small_source.key != 0 else Fraction(0)
        m = Morphism(small_source, small_target, q)
        return m if m in self.homset(small_source, small_target) else None

    def product(self, a: ObjectRef, b: ObjectRef) -> ProductCone:
        message = "subgroups of ℤ are not closed under products"
        logging.info(message)
        raise ProductsUnsupported(message)

    def format_object(self, obj: ObjectRef) -> str:
        if obj.key == 0:
            return "0"
        return "ℤ" if obj.key == 1 else f"{obj.key}ℤ"

    def format_payload(self, f: Morphism) -> str:
        return format_scalar(f.payload)

    def describe_homset(self, hom: Homset) -> str:
        return f"{format_scalar(hom.generator)}·k"

    def load_object(self, doc: Any) -> ObjectRef:
        if isinstance(doc, bool) or not isinstance(doc, int) or doc < 0:
            raise CategoryError(f"subgroup key {doc!r} must be a non-negative integer")
        return ObjectRef(self.id, doc)

    def dump_object(self, obj: ObjectRef) -> Any:
        return obj.key

    def load_payload(self, a: ObjectRef, b: ObjectRef, doc: Any) -> Hashable:
        return parse_scalar(doc)

    def dump_payload(self, f: Morphism) -> Any:
        q = Fraction(f.payload)
        return q.numerator if q.denominator == 1 else format_scalar(q)

    def spec(self) -> Any:
        return "subz"


def subz_corestricts(small: Homset, big: Homset, strict: bool = False) -> Tuple[Optional[Fraction], Optional[Morphism]]:
    """Decide family inclusion symbolically.

    Returns (index_scale, None) when every member of `small` is a corestriction of a
    member of `big`, otherwise (None, first failing member).
    """
    if small.generator == 0:
        if strict and small.target.key != 0:
            return None, small.member(0)
        return Fraction(0), None
    if big.generator == 0:
        return None, small.member(1)

    ratio = small.generator / big.generator
    if ratio.denominator != 1:
        return None, small.member(1)
    if strict:
        # only k = ±1 can be epi, so a nonzero family always has a non-epi member
        return None, small.member(0)
    return ratio, None
