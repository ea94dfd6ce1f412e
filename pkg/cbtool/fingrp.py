import logging
import re
from itertools import product
from typing import Any
from typing import Dict
from typing import FrozenSet
from typing import Hashable
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from sympy.combinatorics import Permutation
from sympy.combinatorics import PermutationGroup

from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import ExplicitList
from cbtool.category import Factorization
from cbtool.category import Homset
from cbtool.category import Morphism
from cbtool.category import NotSubobjectPair
from cbtool.category import ObjectRef
from cbtool.category import ProductCone
from cbtool.category import ProductsUnsupported
from cbtool.presented import Arrow
from cbtool.presented import PresentedCategory

S3_GENERATORS = ("(1 2)", "(1 2 3)")

CYCLE_RE = re.compile(r"\(([^()]*)\)")


class AmbientTooLarge(CategoryError):
    pass


def parse_cycles(text: str) -> List[List[int]]:
    """Parse 1-based cycle notation like "(1 2)(3 4)" into 0-based cycles."""
    stripped = text.replace(" ", "").replace(",", "")
    if not stripped or CYCLE_RE.sub("", text).strip():
        raise CategoryError(f"{text!r} is not in cycle notation")

    cycles = []
    for body in CYCLE_RE.findall(text):
        points = [int(p) - 1 for p in body.replace(",", " ").split()]
        if any(p < 0 for p in points) or len(set(points)) != len(points):
            raise CategoryError(f"{text!r} is not a valid cycle")
        if len(points) > 1:
            cycles.append(points)
    return cycles


def make_permutation(cycles: List[List[int]], degree: int) -> Permutation:
    if any(p >= degree for cycle in cycles for p in cycle):
        raise CategoryError(f"cycles {cycles} move points outside 1..{degree}")
    return Permutation(cycles, size=degree) if cycles else Permutation(list(range(degree)))


def format_cycles(array_form: Sequence[int]) -> str:
    cycles = Permutation(list(array_form)).cyclic_form
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(p + 1) for p in cycle) + ")" for cycle in cycles)


class PermutationAmbient:
    """A small permutation group with its elements indexed in lexicographic order."""

    def __init__(self, generators: Sequence[str] = S3_GENERATORS, bound: int = 24):
        cycles = [parse_cycles(g) for g in generators]
        self.degree = max([p + 1 for c in cycles for cycle in c for p in cycle] + [1])

        perms = [make_permutation(c, self.degree) for c in cycles] or [make_permutation([], self.degree)]
        group = PermutationGroup(perms)
        if group.order() > bound:
            message = f"ambient group has order {group.order()}, above the limit {bound}"
            logging.info(message)
            raise AmbientTooLarge(message)

        self.generators = tuple(format_cycles(p.array_form) for p in perms)
        self.elements: Tuple[Tuple[int, ...], ...] = tuple(sorted(tuple(p.array_form) for p in group.generate()))
        self.index = {x: i for i, x in enumerate(self.elements)}

        # (x then y)(p) = y(x(p))
        self.table = [[self.index[tuple(y[p] for p in x)] for y in self.elements] for x in self.elements]
        self.inverses = [row.index(0) for row in self.table]
        logging.debug(f"ambient group {self.generators} of order {len(self.elements)}")

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, x: int, y: int) -> int:
        return self.table[x][y]

    def element(self, text: str) -> int:
        array = tuple(make_permutation(parse_cycles(text), self.degree).array_form)
        if array not in self.index:
            raise CategoryError(f"{text!r} is not an element of the ambient group")
        return self.index[array]

    def format_element(self, x: int) -> str:
        return format_cycles(self.elements[x])

    def closure(self, generators: Iterable[int]) -> FrozenSet[int]:
        gens = list(generators)
        found = {0}
        boundary = [0]
        while boundary:
            fresh = []
            for a in gens:
                for b in boundary:
                    c = self.mul(b, a)
                    if c not in found:
                        found.add(c)
                        fresh.append(c)
            boundary = fresh
        return frozenset(found)

    def subgroups(self) -> List[Tuple[int, ...]]:
        trivial = frozenset([0])
        seen = {trivial}
        frontier = [trivial]
        while frontier:
            fresh = []
            for h in frontier:
                for g in range(self.order):
                    if g in h:
                        continue
                    k = self.closure(set(h) | {g})
                    if k not in seen:
                        seen.add(k)
                        fresh.append(k)
            frontier = fresh
        return sorted((tuple(sorted(h)) for h in seen), key=lambda h: (len(h), h))

    def generating_set(self, elements: Sequence[int]) -> Tuple[int, ...]:
        gens: List[int] = []
        span = frozenset([0])
        for x in elements:
            if x not in span:
                gens.append(x)
                span = self.closure(gens)
        return tuple(gens)


class FinGrp(Category):
    """Subgroups of a fixed permutation group; the trivial subgroup is the zero object.

    Objects are keyed by their position in the canonical subgroup order, a morphism
    payload lists the image of each source element in sorted element order.
    """

    finite = True

    def __init__(self, generators: Sequence[str] = S3_GENERATORS, bound: int = 24):
        self.ambient = PermutationAmbient(generators, bound)
        self.id = "fingrp:" + ",".join(self.ambient.generators)
        self.subgroups = self.ambient.subgroups()
        logging.debug(f"found {len(self.subgroups)} subgroups")
        self._by_elements = {frozenset(h): i for i, h in enumerate(self.subgroups)}
        self._positions = [{x: n for n, x in enumerate(h)} for h in self.subgroups]
        self._homs: Dict[Tuple[int, int], Tuple[Tuple[int, ...], ...]] = {}

    def elements(self, obj: ObjectRef) -> Tuple[int, ...]:
        return self.subgroups[obj.key]

    def subgroup(self, elements: Iterable[int]) -> ObjectRef:
        key = self._by_elements.get(frozenset(elements))
        if key is None:
            raise CategoryError("element set is not a subgroup")
        return ObjectRef(self.id, key)

    def zero(self) -> ObjectRef:
        return ObjectRef(self.id, 0)

    def has_object(self, obj: ObjectRef) -> bool:
        return obj.backend == self.id and isinstance(obj.key, int) and 0 <= obj.key < len(self.subgroups)

    def objects(self) -> List[ObjectRef]:
        return [ObjectRef(self.id, i) for i in range(len(self.subgroups))]

    def _extend(self, source: Tuple[int, ...], gens: Sequence[int], images: Sequence[int]) -> Optional[Dict[int, int]]:
        image = {0: 0}
        queue = [0]
        for x in queue:
            for g, t in zip(gens, images):
                y = self.ambient.mul(x, g)
                v = self.ambient.mul(image[x], t)
                if y not in image:
                    image[y] = v
                    queue.append(y)
                elif image[y] != v:
                    return None
        return image if len(image) == len(source) else None

    def homomorphisms(self, a: ObjectRef, b: ObjectRef) -> Tuple[Tuple[int, ...], ...]:
        key = (a.key, b.key)
        if key not in self._homs:
            source = self.elements(a)
            gens = self.ambient.generating_set(source)
            found = set()
            for images in product(self.elements(b), repeat=len(gens)):
                image = self._extend(source, gens, images)
                if image is not None:
                    found.add(tuple(image[x] for x in source))
            self._homs[key] = tuple(sorted(found))
            logging.debug(f"{len(found)} homomorphisms from subgroup {a.key} to subgroup {b.key}")
        return self._homs[key]

    def homset(self, a: ObjectRef, b: ObjectRef) -> Homset:
        self.check_backend(a, b)
        return Homset(a, b, ExplicitList(tuple(Morphism(a, b, p) for p in self.homomorphisms(a, b))))

    def identity(self, a: ObjectRef) -> Morphism:
        return Morphism(a, a, self.elements(a))

    def _compose(self, f: Morphism, g: Morphism) -> Morphism:
        positions = self._positions[g.source.key]
        return Morphism(f.source, g.target, tuple(g.payload[positions[y]] for y in f.payload))

    def is_subobject(self, a: ObjectRef, b: ObjectRef) -> bool:
        return set(self.elements(a)) <= set(self.elements(b))

    def inclusion(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        if not self.is_subobject(a, b):
            raise NotSubobjectPair(f"{self.format_object(a)} is not a subgroup of {self.format_object(b)}")
        return Morphism(a, b, self.elements(a))

    def is_inclusion(self, f: Morphism) -> bool:
        return f.payload == self.elements(f.source) and self.is_subobject(f.source, f.target)

    def zero_morphism(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        return Morphism(a, b, (0,) * len(self.elements(a)))

    def is_zero_morphism(self, f: Morphism) -> bool:
        return set(f.payload) == {0}

    def is_mono(self, f: Morphism) -> bool:
        return len(set(f.payload)) == len(f.payload)

    def is_epi(self, f: Morphism) -> bool:
        return set(f.payload) == set(self.elements(f.target))

    def inverse(self, f: Morphism) -> Optional[Morphism]:
        if not (self.is_mono(f) and self.is_epi(f)):
            return None
        back = dict(zip(f.payload, self.elements(f.source)))
        return Morphism(f.target, f.source, tuple(back[y] for y in self.elements(f.target)))

    def canonical_factorize(self, f: Morphism) -> Factorization:
        image = self.subgroup(f.payload)
        return Factorization(Morphism(f.source, image, f.payload), self.inclusion(image, f.target), image)

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

        positions = self._positions[big_source.key]
        pairs = list(zip(self.elements(f_small.source), f_small.payload))
        for g in self.homomorphisms(big_source, big_target):
            if all(g[positions[x]] == y for x, y in pairs):
                return Morphism(big_source, big_target, g)
        return None

    def restriction_of(self, g: Morphism, small_source: ObjectRef, small_target: ObjectRef) -> Optional[Morphism]:
        positions = self._positions[g.source.key]
        payload = tuple(g.payload[positions[x]] for x in self.elements(small_source))
        if not set(payload) <= set(self.elements(small_target)):
            return None
        return Morphism(small_source, small_target, payload)

    def product(self, a: ObjectRef, b: ObjectRef) -> ProductCone:
        message = "subgroups of a fixed group are not closed under products"
        logging.info(message)
        raise ProductsUnsupported(message)

    def format_object(self, obj: ObjectRef) -> str:
        if obj.key == 0:
            return "0"
        gens = self.ambient.generating_set(self.elements(obj))
        return "<" + ",".join(self.ambient.format_element(g) for g in gens) + ">"

    def format_payload(self, f: Morphism) -> str:
        doc = self.dump_payload(f)
        return "{" + ", ".join(f"{k}↦{v}" for k, v in doc.items()) + "}"

    def load_object(self, doc: Any) -> ObjectRef:
        if not isinstance(doc, list) or not all(isinstance(g, str) for g in doc):
            raise CategoryError(f"subgroup {doc!r} must be a list of generators in cycle notation")
        return self.subgroup(self.ambient.closure(self.ambient.element(g) for g in doc))

    def dump_object(self, obj: ObjectRef) -> Any:
        return [self.ambient.format_element(g) for g in self.ambient.generating_set(self.elements(obj))]

    def load_payload(self, a: ObjectRef, b: ObjectRef, doc: Any) -> Hashable:
        if not isinstance(doc, dict):
            raise CategoryError(f"homomorphism {doc!r} must map generators to images")
        gens = [self.ambient.element(k) for k in doc]
        images = [self.ambient.element(v) for v in doc.values()]
        source = self.elements(a)
        if not set(gens) <= set(source) or self.ambient.closure(gens) != frozenset(source):
            raise CategoryError(f"{sorted(doc)} does not generate {self.format_object(a)}")

        image = self._extend(source, gens, images)
        if image is None:
            raise CategoryError(f"{doc} does not extend to a homomorphism")
        return tuple(image[x] for x in source)

    def dump_payload(self, f: Morphism) -> Any:
        source = self.elements(f.source)
        positions = self._positions[f.source.key]
        return {
            self.ambient.format_element(g): self.ambient.format_element(f.payload[positions[g]])
            for g in self.ambient.generating_set(source)
        }

    def spec(self) -> Any:
        return {"name": "fingrp", "ambient": list(self.ambient.generators)}


def group_category(generators: Sequence[str] = S3_GENERATORS, with_zero: bool = False) -> PresentedCategory:
    """One-object category of a permutation group, optionally with a formal zero object.

    With the zero object the single object "*" also gains an absorbing endomorphism "zero".
    """
    ambient = PermutationAmbient(generators)
    labels = [ambient.format_element(x) for x in range(ambient.order)]
    arrows = [Arrow(label, "*", "*") for label in labels]
    compose = {(labels[x], labels[y]): labels[ambient.mul(x, y)] for x in range(ambient.order) for y in range(ambient.order)}

    if not with_zero:
        return PresentedCategory("group", ["*"], arrows, compose, {"*": labels[0]})

    arrows += [Arrow("zero", "*", "*"), Arrow("to_zero", "*", "0"), Arrow("from_zero", "0", "*"), Arrow("id_zero", "0", "0")]
    for label in labels + ["zero"]:
        compose[(label, "zero")] = "zero"
        compose[("zero", label)] = "zero"
        compose[(label, "to_zero")] = "to_zero"
        compose[("from_zero", label)] = "from_zero"
    compose[("to_zero", "from_zero")] = "zero"
    compose[("to_zero", "id_zero")] = "to_zero"
    compose[("from_zero", "to_zero")] = "id_zero"
    compose[("id_zero", "from_zero")] = "from_zero"
    compose[("id_zero", "id_zero")] = "id_zero"

    return PresentedCategory(
        "group+0", ["*", "0"], arrows, compose, {"*": labels[0], "0": "id_zero"}, zero="0", inclusions=["from_zero"]
    )
