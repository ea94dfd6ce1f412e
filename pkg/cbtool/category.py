import logging
from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from functools import reduce
from typing import Any
from typing import Callable
from typing import Dict
from typing import Hashable
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import networkx as nx


class CategoryError(Exception):
    pass


class NonComposable(CategoryError):
    pass


class BackendMismatch(CategoryError):
    pass


class NoFactorization(CategoryError):
    pass


class NotSubobjectPair(CategoryError):
    pass


class InfiniteHomset(CategoryError):
    pass


class NotAMember(CategoryError):
    pass


class ProductsUnsupported(CategoryError):
    pass


class SearchSpaceTooLarge(CategoryError):
    pass


class NotAGroupoid(CategoryError):
    pass


@dataclass(frozen=True)
class ObjectRef:
    backend: str
    key: Hashable


@dataclass(frozen=True)
class Morphism:
    source: ObjectRef
    target: ObjectRef
    payload: Hashable


@dataclass(frozen=True)
class ExplicitList:
    morphisms: Tuple[Morphism, ...]

    def __post_init__(self) -> None:
        payloads = [f.payload for f in self.morphisms]
        if len(set(payloads)) != len(payloads):
            raise CategoryError("explicit homset lists a morphism twice")


@dataclass(frozen=True)
class ScalarFamily:
    generator: Fraction


def family_order(bound: int) -> List[int]:
    """Family indices 0, 1, -1, 2, -2, ... up to |k| <= bound."""
    ks = [0]
    for k in range(1, bound + 1):
        ks += [k, -k]
    return ks


@dataclass(frozen=True)
class Homset:
    source: ObjectRef
    target: ObjectRef
    body: Union[ExplicitList, ScalarFamily]

    @property
    def is_family(self) -> bool:
        return isinstance(self.body, ScalarFamily)

    @property
    def is_finite(self) -> bool:
        return not self.is_family or self.body.generator == 0

    @property
    def generator(self) -> Fraction:
        if not self.is_family:
            raise CategoryError("explicit homsets have no generator")
        return self.body.generator

    def member(self, k: int) -> Morphism:
        return Morphism(self.source, self.target, self.generator * k)

    def index_of(self, f: Morphism) -> Optional[int]:
        if f.source != self.source or f.target != self.target or not isinstance(f.payload, (int, Fraction)):
            return None

        q = Fraction(f.payload)
        if self.generator == 0:
            return 0 if q == 0 else None

        ratio = q / self.generator
        return int(ratio) if ratio.denominator == 1 else None

    def members(self) -> Tuple[Morphism, ...]:
        if not self.is_family:
            return self.body.morphisms
        if self.generator == 0:
            return (self.member(0),)
        raise InfiniteHomset(f"homset {self.source.key} -> {self.target.key} is the infinite family {self.generator}·k")

    def sample(self, bound: int) -> Tuple[Morphism, ...]:
        if self.is_finite:
            return self.members()
        return tuple(self.member(k) for k in family_order(bound))

    def __contains__(self, f: Any) -> bool:
        if not isinstance(f, Morphism) or f.source != self.source or f.target != self.target:
            return False
        if self.is_family:
            return self.index_of(f) is not None
        return f in self.body.morphisms


@dataclass(frozen=True)
class Violation:
    rule: str
    witness: Tuple[Any, ...]


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    def add(self, rule: str, *witness: Any) -> None:
        logging.debug(f"violation {rule}: {witness}")
        self.violations.append(Violation(rule, tuple(witness)))

    def extend(self, other: "ValidationReport", prefix: Optional[str] = None) -> None:
        for v in other.violations:
            self.violations.append(Violation(v.rule, ((prefix,) if prefix else ()) + v.witness))

    @property
    def valid(self) -> bool:
        return not self.violations

    def rules(self) -> List[str]:
        return sorted({v.rule for v in self.violations})

    def first(self, rule: str) -> Optional[Violation]:
        return next((v for v in self.violations if v.rule == rule), None)


@dataclass(frozen=True)
class Factorization:
    epi: Morphism
    inclusion: Morphism
    image: ObjectRef


@dataclass(frozen=True)
class ProductCone:
    obj: ObjectRef
    left: Morphism
    right: Morphism


class Category(ABC):
    """A backend with a distinguished zero object and a choice of inclusions.

    Composition is diagrammatic: compose(f, g) is "f then g".
    """

    id: str
    finite: bool = False
    scalar: bool = False

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.id})"

    @abstractmethod
    def zero(self) -> ObjectRef:
        pass

    @abstractmethod
    def has_object(self, obj: ObjectRef) -> bool:
        pass

    @abstractmethod
    def homset(self, a: ObjectRef, b: ObjectRef) -> Homset:
        pass

    @abstractmethod
    def identity(self, a: ObjectRef) -> Morphism:
        pass

    @abstractmethod
    def _compose(self, f: Morphism, g: Morphism) -> Morphism:
        pass

    @abstractmethod
    def is_inclusion(self, f: Morphism) -> bool:
        pass

    @abstractmethod
    def load_object(self, doc: Any) -> ObjectRef:
        pass

    @abstractmethod
    def dump_object(self, obj: ObjectRef) -> Any:
        pass

    @abstractmethod
    def load_payload(self, a: ObjectRef, b: ObjectRef, doc: Any) -> Hashable:
        pass

    @abstractmethod
    def dump_payload(self, f: Morphism) -> Any:
        pass

    @abstractmethod
    def spec(self) -> Any:
        pass

    def objects(self) -> List[ObjectRef]:
        raise InfiniteHomset(f"{self.id} has infinitely many objects")

    def sort_key(self, obj: ObjectRef) -> Any:
        return obj.key

    def format_object(self, obj: ObjectRef) -> str:
        return str(obj.key)

    def format_payload(self, f: Morphism) -> str:
        return str(f.payload)

    def format_morphism(self, f: Morphism) -> str:
        return f"{self.format_payload(f)}: {self.format_object(f.source)} → {self.format_object(f.target)}"

    def describe_homset(self, hom: Homset) -> str:
        return f"Hom({self.format_object(hom.source)}, {self.format_object(hom.target)})"

    def obj(self, key: Hashable) -> ObjectRef:
        ref = ObjectRef(self.id, key)
        if not self.has_object(ref):
            raise CategoryError(f"{key!r} is not an object of {self.id}")
        return ref

    def morphism(self, a: ObjectRef, b: ObjectRef, payload: Hashable) -> Morphism:
        f = Morphism(a, b, payload)
        if f not in self.homset(a, b):
            raise NotAMember(f"{self.format_payload(f)} is not in {self.describe_homset(self.homset(a, b))}")
        return f

    def contains(self, f: Morphism) -> bool:
        if f.source.backend != self.id or f.target.backend != self.id:
            return False
        if not self.has_object(f.source) or not self.has_object(f.target):
            return False
        return f in self.homset(f.source, f.target)

    def check_backend(self, *items: Union[Morphism, ObjectRef]) -> None:
        for item in items:
            refs = (item.source, item.target) if isinstance(item, Morphism) else (item,)
            for ref in refs:
                if ref.backend != self.id:
                    raise BackendMismatch(f"{ref.key!r} belongs to {ref.backend}, not {self.id}")

    def compose(self, f: Morphism, g: Morphism) -> Morphism:
        self.check_backend(f, g)
        if f.target != g.source:
            raise NonComposable(f"{self.format_morphism(f)} cannot be followed by {self.format_morphism(g)}")
        return self._compose(f, g)

    def compose_all(self, first: Morphism, *rest: Morphism) -> Morphism:
        return reduce(self.compose, rest, first)

    @property
    def has_zero(self) -> bool:
        try:
            self.zero()
        except CategoryError:
            return False
        return True

    def is_zero(self, obj: ObjectRef) -> bool:
        return self.has_zero and obj == self.zero()

    def zero_morphism(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        z = self.zero()
        to_zero = self.homset(a, z).members()
        from_zero = self.homset(z, b).members()
        if len(to_zero) != 1 or len(from_zero) != 1:
            raise CategoryError(f"{self.format_object(z)} is not a zero object")
        return self.compose(to_zero[0], from_zero[0])

    def is_zero_morphism(self, f: Morphism) -> bool:
        return self.has_zero and f == self.zero_morphism(f.source, f.target)

    def is_subobject(self, a: ObjectRef, b: ObjectRef) -> bool:
        return any(self.is_inclusion(f) for f in self.homset(a, b).members())

    def inclusion(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        for f in self.homset(a, b).members():
            if self.is_inclusion(f):
                return f
        raise NotSubobjectPair(f"{self.format_object(a)} is not a subobject of {self.format_object(b)}")

    def left_divisors(self, f: Morphism, g: Morphism) -> Tuple[Morphism, ...]:
        """All h with h then g == f."""
        return tuple(h for h in self.homset(f.source, g.source).members() if self.compose(h, g) == f)

    def is_mono(self, f: Morphism) -> bool:
        # x then f == y then f must force x == y
        for c in self.objects():
            seen: Dict[Morphism, Morphism] = {}
            for x in self.homset(c, f.source).members():
                composite = self.compose(x, f)
                if seen.setdefault(composite, x) != x:
                    return False
        return True

    def is_epi(self, f: Morphism) -> bool:
        for c in self.objects():
            seen: Dict[Morphism, Morphism] = {}
            for y in self.homset(f.target, c).members():
                composite = self.compose(f, y)
                if seen.setdefault(composite, y) != y:
                    return False
        return True

    def is_split_mono(self, f: Morphism) -> bool:
        unit = self.identity(f.source)
        return any(self.compose(f, r) == unit for r in self.homset(f.target, f.source).members())

    def is_split_epi(self, f: Morphism) -> bool:
        unit = self.identity(f.target)
        return any(self.compose(s, f) == unit for s in self.homset(f.target, f.source).members())

    def inverse(self, f: Morphism) -> Optional[Morphism]:
        unit_source = self.identity(f.source)
        unit_target = self.identity(f.target)
        for g in self.homset(f.target, f.source).members():
            if self.compose(f, g) == unit_source and self.compose(g, f) == unit_target:
                return g
        return None

    def is_isomorphism(self, f: Morphism) -> bool:
        return self.inverse(f) is not None

    def canonical_factorize(self, f: Morphism) -> Factorization:
        found = []
        for s in self.objects():
            if not self.is_subobject(s, f.target):
                continue
            j = self.inclusion(s, f.target)
            for e in self.left_divisors(f, j):
                if self.is_epi(e):
                    found.append(Factorization(e, j, s))

        if not found:
            raise NoFactorization(f"{self.format_morphism(f)} has no epi-inclusion factorization")

        for candidate in found:
            if all(self.is_subobject(candidate.image, other.image) for other in found):
                return candidate

        logging.debug(f"no smallest image for {self.format_morphism(f)}, using the first factorization")
        return found[0]

    def corestriction_of(
        self, f_small: Morphism, big_source: ObjectRef, big_target: ObjectRef, strict: bool = False
    ) -> Optional[Morphism]:
        """A morphism big_source -> big_target restricting to f_small, if any."""
        if not self.is_subobject(f_small.source, big_source) or not self.is_subobject(f_small.target, big_target):
            raise NotSubobjectPair(
                f"{self.format_morphism(f_small)} does not sit inside "
                f"{self.format_object(big_source)} → {self.format_object(big_target)}"
            )
        if strict and not self.is_epi(f_small):
            return None

        i = self.inclusion(f_small.source, big_source)
        restricted = self.compose(f_small, self.inclusion(f_small.target, big_target))
        for g in self.homset(big_source, big_target).members():
            if self.compose(i, g) == restricted:
                return g
        return None

    def restriction_of(self, g: Morphism, small_source: ObjectRef, small_target: ObjectRef) -> Optional[Morphism]:
        """A morphism small_source -> small_target that g restricts to, if any."""
        restricted = self.compose(self.inclusion(small_source, g.source), g)
        j = self.inclusion(small_target, g.target)
        for m in self.homset(small_source, small_target).members():
            if self.compose(m, j) == restricted:
                return m
        return None

    def product(self, a: ObjectRef, b: ObjectRef) -> ProductCone:
        if self.is_zero(b):
            return ProductCone(a, self.identity(a), self.zero_morphism(a, b))
        if self.is_zero(a):
            return ProductCone(b, self.zero_morphism(b, a), self.identity(b))
        raise ProductsUnsupported(f"{self.id} has no product for {self.format_object(a)} and {self.format_object(b)}")

    def opposite(self) -> "Category":
        return OppositeCategory(self)


class OppositeCategory(Category):
    """Arrows reversed; only identities are inclusions."""

    def __init__(self, base: Category):
        self.base = base
        self.id = f"op({base.id})"
        self.finite = base.finite
        self.scalar = base.scalar

    def opposite(self) -> Category:
        return self.base

    def down(self, obj: ObjectRef) -> ObjectRef:
        return ObjectRef(self.base.id, obj.key)

    def up(self, obj: ObjectRef) -> ObjectRef:
        return ObjectRef(self.id, obj.key)

    def drop(self, f: Morphism) -> Morphism:
        return Morphism(self.down(f.target), self.down(f.source), f.payload)

    def lift(self, f: Morphism) -> Morphism:
        return Morphism(self.up(f.target), self.up(f.source), f.payload)

    def zero(self) -> ObjectRef:
        return self.up(self.base.zero())

    def has_object(self, obj: ObjectRef) -> bool:
        return obj.backend == self.id and self.base.has_object(self.down(obj))

    def objects(self) -> List[ObjectRef]:
        return [self.up(o) for o in self.base.objects()]

    def homset(self, a: ObjectRef, b: ObjectRef) -> Homset:
        hom = self.base.homset(self.down(b), self.down(a))
        if hom.is_family:
            return Homset(a, b, hom.body)
        return Homset(a, b, ExplicitList(tuple(self.lift(f) for f in hom.members())))

    def identity(self, a: ObjectRef) -> Morphism:
        return self.lift(self.base.identity(self.down(a)))

    def _compose(self, f: Morphism, g: Morphism) -> Morphism:
        return self.lift(self.base.compose(self.drop(g), self.drop(f)))

    def is_inclusion(self, f: Morphism) -> bool:
        return f.source == f.target and f == self.identity(f.source)

    def is_subobject(self, a: ObjectRef, b: ObjectRef) -> bool:
        return a == b

    def inclusion(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        if a != b:
            raise NotSubobjectPair(f"{self.format_object(a)} is not a subobject of {self.format_object(b)}")
        return self.identity(a)

    def is_mono(self, f: Morphism) -> bool:
        return self.base.is_epi(self.drop(f))

    def is_epi(self, f: Morphism) -> bool:
        return self.base.is_mono(self.drop(f))

    def is_split_mono(self, f: Morphism) -> bool:
        return self.base.is_split_epi(self.drop(f))

    def is_split_epi(self, f: Morphism) -> bool:
        return self.base.is_split_mono(self.drop(f))

    def inverse(self, f: Morphism) -> Optional[Morphism]:
        g = self.base.inverse(self.drop(f))
        return self.lift(g) if g is not None else None

    def zero_morphism(self, a: ObjectRef, b: ObjectRef) -> Morphism:
        return self.lift(self.base.zero_morphism(self.down(b), self.down(a)))

    def canonical_factorize(self, f: Morphism) -> Factorization:
        if not self.is_epi(f):
            raise NoFactorization(f"{self.format_morphism(f)} is not epi and only identities are inclusions")
        return Factorization(f, self.identity(f.target), f.target)

    def corestriction_of(
        self, f_small: Morphism, big_source: ObjectRef, big_target: ObjectRef, strict: bool = False
    ) -> Optional[Morphism]:
        if f_small.source != big_source or f_small.target != big_target:
            raise NotSubobjectPair(f"{self.format_morphism(f_small)} does not sit inside the requested pair")
        if strict and not self.is_epi(f_small):
            return None
        return f_small

    def restriction_of(self, g: Morphism, small_source: ObjectRef, small_target: ObjectRef) -> Optional[Morphism]:
        if g.source != small_source or g.target != small_target:
            return None
        return g

    def product(self, a: ObjectRef, b: ObjectRef) -> ProductCone:
        raise ProductsUnsupported(f"{self.id}: products of opposites are coproducts, which are not supported")

    def sort_key(self, obj: ObjectRef) -> Any:
        return self.base.sort_key(self.down(obj))

    def format_object(self, obj: ObjectRef) -> str:
        return self.base.format_object(self.down(obj))

    def format_payload(self, f: Morphism) -> str:
        return self.base.format_payload(self.drop(f))

    def describe_homset(self, hom: Homset) -> str:
        return "op " + self.base.describe_homset(self.base.homset(self.down(hom.target), self.down(hom.source)))

    def load_object(self, doc: Any) -> ObjectRef:
        return self.up(self.base.load_object(doc))

    def dump_object(self, obj: ObjectRef) -> Any:
        return self.base.dump_object(self.down(obj))

    def load_payload(self, a: ObjectRef, b: ObjectRef, doc: Any) -> Hashable:
        return self.base.load_payload(self.down(b), self.down(a), doc)

    def dump_payload(self, f: Morphism) -> Any:
        return self.base.dump_payload(self.drop(f))

    def spec(self) -> Any:
        return {"name": "opposite", "base": self.base.spec()}


@dataclass(frozen=True)
class SubobjectChoice:
    """A candidate class of inclusions, enumerated per ordered pair of objects."""

    category: Category
    members: Callable[[ObjectRef, ObjectRef], Tuple[Morphism, ...]]

    def contains(self, f: Morphism) -> bool:
        return f in self.members(f.source, f.target)

    @classmethod
    def of_inclusions(cls, category: Category) -> "SubobjectChoice":
        def members(a: ObjectRef, b: ObjectRef) -> Tuple[Morphism, ...]:
            return (category.inclusion(a, b),) if category.is_subobject(a, b) else ()

        return cls(category, members)

    @classmethod
    def from_morphisms(cls, category: Category, morphisms: Iterable[Morphism]) -> "SubobjectChoice":
        table: Dict[Tuple[ObjectRef, ObjectRef], List[Morphism]] = {}
        for f in morphisms:
            table.setdefault((f.source, f.target), []).append(f)

        def members(a: ObjectRef, b: ObjectRef) -> Tuple[Morphism, ...]:
            return tuple(table.get((a, b), ()))

        return cls(category, members)


def validate_subobject_choice(choice: SubobjectChoice, scope: Sequence[ObjectRef]) -> ValidationReport:
    cat = choice.category
    report = ValidationReport()
    members = {(a, b): tuple(choice.members(a, b)) for a in scope for b in scope}

    preorder = nx.DiGraph()
    preorder.add_nodes_from(scope)

    for (a, b), fs in members.items():
        if len(fs) > 1:
            report.add("subobject.unique", cat.format_object(a), cat.format_object(b))
        if fs and a != b:
            preorder.add_edge(a, b)
        for f in fs:
            if not cat.is_mono(f):
                report.add("subobject.mono", cat.format_morphism(f))

    for a in scope:
        if cat.identity(a) not in members[(a, a)]:
            report.add("subobject.identity", cat.format_object(a))

    for component in nx.strongly_connected_components(preorder):
        if len(component) > 1:
            report.add("subobject.antisymmetry", *sorted(cat.format_object(o) for o in component))

    for (a, b), fs in members.items():
        for c in scope:
            for f in fs:
                for g in members[(b, c)]:
                    if cat.compose(f, g) not in members[(a, c)]:
                        report.add("subobject.composition", cat.format_morphism(f), cat.format_morphism(g))

    for (p, r), fs in members.items():
        for q in scope:
            for f in fs:
                for g in members[(q, r)]:
                    try:
                        divisors = cat.left_divisors(f, g)
                    except InfiniteHomset:
                        report.add("subobject.divisor", cat.format_morphism(f), cat.format_morphism(g), "infinitely many")
                        continue
                    for h in divisors:
                        if not choice.contains(h):
                            report.add("subobject.divisor", cat.format_morphism(f), cat.format_morphism(g), cat.format_morphism(h))

    return report


@dataclass(frozen=True)
class GroupoidVerdict:
    groupoid: bool
    connected: bool
    hom_connected: bool
    witness: Optional[str] = None


def is_groupoid(cat: Category, modulo_zero: bool = False) -> GroupoidVerdict:
    """Check invertibility of every arrow, optionally ignoring the zero object and zero arrows.

    `connected` is the literal reading (every endomorphism set is nonempty),
    `hom_connected` the usual one (every homset is nonempty).
    """
    objects = [a for a in cat.objects() if not (modulo_zero and cat.is_zero(a))]

    witness = None
    for a in objects:
        for b in objects:
            for f in cat.homset(a, b).members():
                if modulo_zero and cat.is_zero_morphism(f):
                    continue
                if witness is None and cat.inverse(f) is None:
                    witness = cat.format_morphism(f)

    connected = all(cat.homset(a, a).members() for a in objects)
    hom_connected = all(cat.homset(a, b).members() for a in objects for b in objects)
    return GroupoidVerdict(witness is None, connected, hom_connected, witness)


def to_presented_tables(cat: Category, objects: Sequence[ObjectRef]) -> Dict[str, Any]:
    """Label every morphism among `objects` and tabulate composition."""
    labels: Dict[Morphism, str] = {}
    arrows = []
    for a in objects:
        for b in objects:
            for n, f in enumerate(cat.homset(a, b).members()):
                label = f"{cat.format_object(a)}->{cat.format_object(b)}#{n}"
                labels[f] = label
                arrows.append({"label": label, "src": cat.format_object(a), "dst": cat.format_object(b)})

    compose = []
    for f, left in labels.items():
        for g, right in labels.items():
            if f.target == g.source:
                compose.append({"left": left, "right": right, "result": labels[cat.compose(f, g)]})

    return {
        "objects": [cat.format_object(a) for a in objects],
        "arrows": arrows,
        "compose": compose,
        "identities": {cat.format_object(a): labels[cat.identity(a)] for a in objects},
        "inclusions": [label for f, label in labels.items() if cat.is_inclusion(f)],
    }
