import logging
from dataclasses import dataclass
from typing import Any
from typing import Dict
from typing import Hashable
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import ExplicitList
from cbtool.category import Homset
from cbtool.category import Morphism
from cbtool.category import ObjectRef
from cbtool.category import ProductCone
from cbtool.category import ProductsUnsupported
from cbtool.category import to_presented_tables
from cbtool.category import ValidationReport


class PresentationError(CategoryError):
    pass


@dataclass(frozen=True)
class Arrow:
    label: str
    src: str
    dst: str


@dataclass(frozen=True)
class DeclaredProduct:
    left: str
    right: str
    product: str
    proj_left: str
    proj_right: str


class PresentedCategory(Category):
    """A finite category given by explicit labels and a composition table."""

    finite = True

    def __init__(
        self,
        name: str,
        objects: Sequence[str],
        arrows: Sequence[Arrow],
        compose: Dict[Tuple[str, str], str],
        identities: Dict[str, str],
        zero: Optional[str] = None,
        inclusions: Iterable[str] = (),
        products: Iterable[DeclaredProduct] = (),
        is_opposite: bool = False,
    ):
        self.name = name
        self.object_labels = tuple(objects)
        self.arrows = tuple(arrows)
        self.table = dict(compose)
        self.identities = dict(identities)
        self.zero_label = zero
        self.inclusions = tuple(inclusions)
        self.products = tuple(products)
        self.is_opposite = is_opposite
        self.id = f"presented:{name}" + ("^op" if is_opposite else "")

        self._by_label: Dict[str, Arrow] = {}
        for arrow in self.arrows:
            if arrow.src not in self.object_labels or arrow.dst not in self.object_labels:
                raise PresentationError(f"arrow {arrow.label} refers to an undeclared object")
            self._by_label.setdefault(arrow.label, arrow)

        if zero is not None and zero not in self.object_labels:
            raise PresentationError(f"zero object {zero} is not declared")

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, PresentedCategory):
            return NotImplemented
        return (
            self.name == other.name
            and self.object_labels == other.object_labels
            and self.arrows == other.arrows
            and self.table == other.table
            and self.identities == other.identities
            and self.zero_label == other.zero_label
            and set(self.inclusions) == set(other.inclusions)
            and set(self.products) == set(other.products)
            and self.is_opposite == other.is_opposite
        )

    def __hash__(self) -> int:
        return hash(self.id)

    def arrow(self, label: str) -> Morphism:
        if label not in self._by_label:
            raise PresentationError(f"unknown arrow {label}")
        a = self._by_label[label]
        return Morphism(ObjectRef(self.id, a.src), ObjectRef(self.id, a.dst), label)

    def zero(self) -> ObjectRef:
        if self.zero_label is None:
            raise CategoryError(f"{self.id} declares no zero object")
        return ObjectRef(self.id, self.zero_label)

    def has_object(self, obj: ObjectRef) -> bool:
        return obj.backend == self.id and obj.key in self.object_labels

    def objects(self) -> List[ObjectRef]:
        return [ObjectRef(self.id, label) for label in self.object_labels]

    def homset(self, a: ObjectRef, b: ObjectRef) -> Homset:
        self.check_backend(a, b)
        morphisms = tuple(self.arrow(label) for label, x in self._by_label.items() if x.src == a.key and x.dst == b.key)
        return Homset(a, b, ExplicitList(morphisms))

    def identity(self, a: ObjectRef) -> Morphism:
        if a.key not in self.identities:
            raise PresentationError(f"object {a.key} has no identity")
        return self.arrow(self.identities[a.key])

    def _compose(self, f: Morphism, g: Morphism) -> Morphism:
        result = self.table.get((f.payload, g.payload))
        if result is None:
            raise PresentationError(f"composition table has no entry for {f.payload} then {g.payload}")
        h = self.arrow(result)
        if h.source != f.source or h.target != g.target:
            raise PresentationError(f"{f.payload} then {g.payload} = {result} has the wrong endpoints")
        return h

    def is_inclusion(self, f: Morphism) -> bool:
        if f.payload == self.identities.get(f.source.key):
            return True
        return not self.is_opposite and f.payload in self.inclusions

    def is_subobject(self, a: ObjectRef, b: ObjectRef) -> bool:
        return a == b or super().is_subobject(a, b)

    def product(self, a: ObjectRef, b: ObjectRef) -> ProductCone:
        if self.is_opposite:
            raise ProductsUnsupported(f"{self.id} is an opposite category; declared products do not carry over")
        for p in self.products:
            if (p.left, p.right) == (a.key, b.key):
                return ProductCone(ObjectRef(self.id, p.product), self.arrow(p.proj_left), self.arrow(p.proj_right))
        return super().product(a, b)

    def sort_key(self, obj: ObjectRef) -> Any:
        return self.object_labels.index(obj.key)

    def load_object(self, doc: Any) -> ObjectRef:
        if doc not in self.object_labels:
            raise PresentationError(f"unknown object {doc!r}")
        return ObjectRef(self.id, doc)

    def dump_object(self, obj: ObjectRef) -> Any:
        return obj.key

    def load_payload(self, a: ObjectRef, b: ObjectRef, doc: Any) -> Hashable:
        f = self.arrow(doc)
        if f.source != a or f.target != b:
            raise PresentationError(f"arrow {doc} does not go {a.key} -> {b.key}")
        return doc

    def dump_payload(self, f: Morphism) -> Any:
        return f.payload

    def spec(self) -> Any:
        return {"name": "presented", "category": self.to_document()}

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "kind": "category",
            "name": self.name,
            "objects": list(self.object_labels),
            "arrows": [{"label": a.label, "src": a.src, "dst": a.dst} for a in self.arrows],
            "compose": [{"left": left, "right": right, "result": res} for (left, right), res in sorted(self.table.items())],
            "identities": dict(sorted(self.identities.items())),
            "inclusions": list(self.inclusions),
            "products": [
                {"left": p.left, "right": p.right, "product": p.product, "proj_left": p.proj_left, "proj_right": p.proj_right}
                for p in self.products
            ],
        }
        if self.zero_label is not None:
            doc["zero"] = self.zero_label
        if self.is_opposite:
            doc["opposite"] = True
        return doc

    @classmethod
    def from_document(cls, doc: Dict[str, Any], name: Optional[str] = None) -> "PresentedCategory":
        return cls(
            doc.get("name", name or "anonymous"),
            doc["objects"],
            [Arrow(a["label"], a["src"], a["dst"]) for a in doc["arrows"]],
            {(c["left"], c["right"]): c["result"] for c in doc["compose"]},
            doc["identities"],
            doc.get("zero"),
            doc.get("inclusions", ()),
            [DeclaredProduct(**p) for p in doc.get("products", ())],
            doc.get("opposite", False),
        )


def validate_category_axioms(cat: PresentedCategory) -> ValidationReport:
    """Check the raw tables: labels, identities, typing, units, associativity and the zero object."""
    report = ValidationReport()

    seen = set()
    for label in list(cat.object_labels) + [a.label for a in cat.arrows]:
        if label in seen:
            report.add("disjoint", label)
        seen.add(label)

    arrows = {a.label: a for a in cat.arrows}

    for obj in cat.object_labels:
        label = cat.identities.get(obj)
        if label is None or label not in arrows or (arrows[label].src, arrows[label].dst) != (obj, obj):
            report.add("identity.missing", obj)

    for (left, right), result in cat.table.items():
        if left not in arrows or right not in arrows or result not in arrows:
            report.add("compose.type", left, right)
            continue
        if arrows[left].dst != arrows[right].src:
            report.add("compose.type", left, right)
        elif (arrows[result].src, arrows[result].dst) != (arrows[left].src, arrows[right].dst):
            report.add("compose.type", left, right)

    for f in arrows.values():
        for g in arrows.values():
            if f.dst == g.src and (f.label, g.label) not in cat.table:
                report.add("compose.missing", f.label, g.label)

    def then(left: Optional[str], right: Optional[str]) -> Optional[str]:
        if left is None or right is None:
            return None
        return cat.table.get((left, right))

    for f in arrows.values():
        unit_src = cat.identities.get(f.src)
        unit_dst = cat.identities.get(f.dst)
        if unit_src in arrows and then(unit_src, f.label) not in (None, f.label):
            report.add("cat2.unit", unit_src, f.label)
        if unit_dst in arrows and then(f.label, unit_dst) not in (None, f.label):
            report.add("cat2.unit", f.label, unit_dst)

        for g in arrows.values():
            if f.dst != g.src:
                continue
            for h in arrows.values():
                if g.dst != h.src:
                    continue
                lhs = then(then(f.label, g.label), h.label)
                rhs = then(f.label, then(g.label, h.label))
                if lhs is not None and rhs is not None and lhs != rhs:
                    report.add("cat1.assoc", f.label, g.label, h.label)

    if cat.zero_label is not None:
        for obj in cat.object_labels:
            into = [a for a in cat.arrows if (a.src, a.dst) == (obj, cat.zero_label)]
            out = [a for a in cat.arrows if (a.src, a.dst) == (cat.zero_label, obj)]
            if len(into) != 1:
                report.add("zero.in", obj, len(into))
            if len(out) != 1:
                report.add("zero.out", obj, len(out))

    for label in cat.inclusions:
        if label not in arrows:
            report.add("inclusion.unknown", label)

    for p in () if cat.is_opposite else cat.products:
        known = all(x in arrows for x in (p.proj_left, p.proj_right))
        if not known or (arrows[p.proj_left].src, arrows[p.proj_left].dst) != (p.product, p.left):
            report.add("product.type", p.left, p.right)
        elif (arrows[p.proj_right].src, arrows[p.proj_right].dst) != (p.product, p.right):
            report.add("product.type", p.left, p.right)

    if report.valid:
        logging.debug(f"{cat.id} satisfies the category axioms")
    return report


def opposite_category(cat: PresentedCategory) -> PresentedCategory:
    """Swap every arrow and compose table entry.

    Declared inclusions and products are kept as labels so the swap is an involution, but the
    opposite only treats identities as inclusions and refuses products.
    """
    return PresentedCategory(
        cat.name,
        cat.object_labels,
        [Arrow(a.label, a.dst, a.src) for a in cat.arrows],
        {(right, left): result for (left, right), result in cat.table.items()},
        cat.identities,
        cat.zero_label,
        cat.inclusions,
        cat.products,
        not cat.is_opposite,
    )


def present(cat: Category, objects: Sequence[ObjectRef], name: str) -> PresentedCategory:
    """Tabulate a finite part of any backend as a presented category."""
    tables = to_presented_tables(cat, objects)
    doc = dict(tables, name=name)
    zero = [cat.format_object(o) for o in objects if cat.is_zero(o)]
    if zero:
        doc["zero"] = zero[0]
    return PresentedCategory.from_document(doc)


@dataclass
class PresentedFunctor:
    """Object and arrow tables between two presented categories.

    A contravariant functor sends an arrow a -> b to one going F(b) -> F(a).
    """

    source: PresentedCategory
    target: PresentedCategory
    objects: Dict[str, str]
    arrows: Dict[str, str]
    contravariant: bool = False


def validate_functor(F: PresentedFunctor) -> ValidationReport:
    src, tgt = F.source, F.target
    report = ValidationReport()
    target_arrows = {a.label: a for a in tgt.arrows}

    for obj in src.object_labels:
        if F.objects.get(obj) not in tgt.object_labels:
            report.add("functor.object", obj)

    for a in src.arrows:
        image = target_arrows.get(F.arrows.get(a.label))
        ends = (F.objects.get(a.dst), F.objects.get(a.src)) if F.contravariant else (F.objects.get(a.src), F.objects.get(a.dst))
        if image is None or (image.src, image.dst) != ends:
            report.add("functor.arrow", a.label)
    if not report.valid:
        return report

    for obj in src.object_labels:
        if obj in src.identities and F.arrows[src.identities[obj]] != tgt.identities.get(F.objects[obj]):
            report.add("functor.identity", obj)

    for (left, right), result in sorted(src.table.items()):
        first, second = F.arrows[left], F.arrows[right]
        if F.contravariant:
            first, second = second, first
        if tgt.table.get((first, second)) != F.arrows[result]:
            report.add("functor.composite", left, right)

    return report
