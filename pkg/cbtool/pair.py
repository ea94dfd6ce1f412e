from itertools import product
from typing import Any
from typing import Hashable
from typing import List
from typing import Optional
from typing import Tuple

from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import ExplicitList
from cbtool.category import Factorization
from cbtool.category import Homset
from cbtool.category import Morphism
from cbtool.category import ObjectRef
from cbtool.category import ProductCone


def component_product(cat: Category, a: ObjectRef, b: ObjectRef) -> ProductCone:
    if cat.is_zero(b):
        return ProductCone(a, cat.identity(a), cat.zero_morphism(a, b))
    if cat.is_zero(a):
        return ProductCone(b, cat.zero_morphism(b, a), cat.identity(b))
    return cat.product(a, b)


class PairCategory(Category):
    """Formal pairs (a, b) of objects from two finite backends, composed componentwise."""

    finite = True

    def __init__(self, left: Category, right: Category):
        if not left.finite or not right.finite:
            raise CategoryError("pair backends need finite components")
        self.left = left
        self.right = right
        self.id = f"pair({left.id},{right.id})"

    def split(self, obj: ObjectRef) -> Tuple[ObjectRef, ObjectRef]:
        lkey, rkey = obj.key
        return ObjectRef(self.left.id, lkey), ObjectRef(self.right.id, rkey)

    def join(self, a: ObjectRef, b: ObjectRef) -> ObjectRef:
        return ObjectRef(self.id, (a.key, b.key))

    def split_morphism(self, f: Morphism) -> Tuple[Morphism, Morphism]:
        (sa, sb), (ta, tb) = self.split(f.source), self.split(f.target)
        return Morphism(sa, ta, f.payload[0]), Morphism(sb, tb, f.payload[1])

    def join_morphism(self, f: Morphism, g: Morphism) -> Morphism:
        return Morphism(self.join(f.source, g.source), self.join(f.target, g.target), (f.payload, g.payload))

    def zero(self) -> ObjectRef:
        return self.join(self.left.zero(), self.right.zero())

    def has_object(self, obj: ObjectRef) -> bool:
        if obj.backend != self.id or not isinstance(obj.key, tuple) or len(obj.key) != 2:
            return False
        a, b = self.split(obj)
        return self.left.has_object(a) and self.right.has_object(b)

    def objects(self) -> List[ObjectRef]:
        return [self.join(a, b) for a in self.left.objects() for b in self.right.objects()]

    def homset(self, a: ObjectRef, b: ObjectRef) -> Homset:
        self.check_backend(a, b)
        (a1, a2), (b1, b2) = self.split(a), self.split(b)
        pairs = product(self.left.homset(a1, b1).members(), self.right.homset(a2, b2).members())
        return Homset(a, b, ExplicitList(tuple(self.join_morphism(f, g) for f, g in pairs)))

    def identity(self, a: ObjectRef) -> Morphism:
        a1, a2 = self.split(a)
        return self.join_morphism(self.left.identity(a1), self.right.identity(a2))

    def _compose(self, f: Morphism, g: Morphism) -> Morphism:
        (f1, f2), (g1, g2) = self.split_morphism(f), self.split_morphism(g)
        return self.join_morphism(self.left.compose(f1, g1), self.right.compose(f2, g2))

    def is_inclusion(self, f: Morphism) -> bool:
        f1, f2 = self.split_morphism(f)
        return self.left.is_inclusion(f1) and self.right.is_inclusion(f2)

    def is_subobject(self, a: ObjectRef, b: ObjectRef) -> bool:
        (a1, a2), (b1, b2) = self.split(a), self.split(b)
        return self.left.is_subobject(a1, b1) and self.right.is_subobject(a2, b2)

    def inclusion(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        (a1, a2), (b1, b2) = self.split(a), self.split(b)
        return self.join_morphism(self.left.inclusion(a1, b1), self.right.inclusion(a2, b2))

    def is_mono(self, f: Morphism) -> bool:
        f1, f2 = self.split_morphism(f)
        return self.left.is_mono(f1) and self.right.is_mono(f2)

    def is_epi(self, f: Morphism) -> bool:
        f1, f2 = self.split_morphism(f)
        return self.left.is_epi(f1) and self.right.is_epi(f2)

    def inverse(self, f: Morphism) -> Optional[Morphism]:
        f1, f2 = self.split_morphism(f)
        g1, g2 = self.left.inverse(f1), self.right.inverse(f2)
        if g1 is None or g2 is None:
            return None
        return self.join_morphism(g1, g2)

    def canonical_factorize(self, f: Morphism) -> Factorization:
        f1, f2 = self.split_morphism(f)
        x, y = self.left.canonical_factorize(f1), self.right.canonical_factorize(f2)
        return Factorization(
            self.join_morphism(x.epi, y.epi), self.join_morphism(x.inclusion, y.inclusion), self.join(x.image, y.image)
        )

    def product(self, a: ObjectRef, b: ObjectRef) -> ProductCone:
        (a1, a2), (b1, b2) = self.split(a), self.split(b)
        x = component_product(self.left, a1, b1)
        y = component_product(self.right, a2, b2)
        return ProductCone(self.join(x.obj, y.obj), self.join_morphism(x.left, y.left), self.join_morphism(x.right, y.right))

    def sort_key(self, obj: ObjectRef) -> Any:
        a, b = self.split(obj)
        return (self.left.sort_key(a), self.right.sort_key(b))

    def format_object(self, obj: ObjectRef) -> str:
        if self.is_zero(obj):
            return "0"
        a, b = self.split(obj)
        return f"({self.left.format_object(a)}, {self.right.format_object(b)})"

    def format_payload(self, f: Morphism) -> str:
        f1, f2 = self.split_morphism(f)
        return f"({self.left.format_payload(f1)}, {self.right.format_payload(f2)})"

    def load_object(self, doc: Any) -> ObjectRef:
        if not isinstance(doc, list) or len(doc) != 2:
            raise CategoryError(f"pair object {doc!r} must be a two-element list")
        return self.join(self.left.load_object(doc[0]), self.right.load_object(doc[1]))

    def dump_object(self, obj: ObjectRef) -> Any:
        a, b = self.split(obj)
        return [self.left.dump_object(a), self.right.dump_object(b)]

    def load_payload(self, a: ObjectRef, b: ObjectRef, doc: Any) -> Hashable:
        if not isinstance(doc, list) or len(doc) != 2:
            raise CategoryError(f"pair morphism {doc!r} must be a two-element list")
        (a1, a2), (b1, b2) = self.split(a), self.split(b)
        return (self.left.load_payload(a1, b1, doc[0]), self.right.load_payload(a2, b2, doc[1]))

    def dump_payload(self, f: Morphism) -> Any:
        f1, f2 = self.split_morphism(f)
        return [self.left.dump_payload(f1), self.right.dump_payload(f2)]

    def spec(self) -> Any:
        return {"name": "pair", "left": self.left.spec(), "right": self.right.spec()}
