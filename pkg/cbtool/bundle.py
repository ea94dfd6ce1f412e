import logging
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import ClassVar
from typing import Dict
from typing import FrozenSet
from typing import Hashable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

from cbtool.category import BackendMismatch
from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import Homset
from cbtool.category import Morphism
from cbtool.category import NonComposable
from cbtool.category import NotAGroupoid
from cbtool.category import ObjectRef
from cbtool.category import ProductsUnsupported
from cbtool.category import SearchSpaceTooLarge
from cbtool.category import ValidationReport
from cbtool.pair import PairCategory
from cbtool.subz import subz_corestricts

Key = Tuple[int, int]


class MixedBackends(CategoryError):
    pass


class ShapeMismatch(CategoryError):
    pass


class NotFull(CategoryError):
    pass


class VertexNotFactorizable(CategoryError):
    pass


class NotInvertible(CategoryError):
    pass


@dataclass(frozen=True)
class ChainBundle:
    """Objects M_L ⇛ ... ⇛ M_1 ⇛ 0 joined by whole homsets.

    `levels` lists the objects top first; level i counts from the zero end.
    """

    backend: Category = field(compare=False, repr=False)
    levels: Tuple[ObjectRef, ...]

    step: ClassVar[int] = -1

    @property
    def length(self) -> int:
        return len(self.levels)

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    def position(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise ShapeMismatch(f"level {i} is outside a bundle of length {self.length}")
        return self.length - 1 - i

    def level(self, i: int) -> ObjectRef:
        return self.levels[self.position(i)]

    def arrow_keys(self) -> List[Key]:
        return [(i, i - 1) for i in range(self.height, 0, -1)]

    def endo_keys(self) -> List[Key]:
        return [(i, i) for i in range(self.height, -1, -1)]

    def path(self, i: int, j: int) -> List[Key]:
        return [(k, k + self.step) for k in range(i, j, self.step)]

    def homset(self, i: int, j: int) -> Homset:
        return self.backend.homset(self.level(i), self.level(j))

    def padded(self, length: int) -> "ChainBundle":
        if length <= self.length:
            return self
        zeros = (self.backend.zero(),) * (length - self.length)
        return type(self)(self.backend, zeros + self.levels)

    def format(self) -> str:
        return " ⇛ ".join(self.backend.format_object(o) for o in self.levels)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class CochainBundle(ChainBundle):
    """Dual shape 0 ⇛ M_1 ⇛ ... ⇛ M_L; `levels` lists the zero end first."""

    step: ClassVar[int] = 1

    def position(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise ShapeMismatch(f"level {i} is outside a bundle of length {self.length}")
        return i

    def arrow_keys(self) -> List[Key]:
        return [(i, i + 1) for i in range(self.height)]

    def endo_keys(self) -> List[Key]:
        return [(i, i) for i in range(self.length)]

    def padded(self, length: int) -> "CochainBundle":
        if length <= self.length:
            return self
        return CochainBundle(self.backend, self.levels + (self.backend.zero(),) * (length - self.length))


def build_chain_bundle(backend: Category, levels: Sequence[ObjectRef]) -> ChainBundle:
    if not levels:
        raise ShapeMismatch("a chain bundle needs at least one level")
    for obj in levels:
        if obj.backend != backend.id:
            raise MixedBackends(f"level {obj.key!r} belongs to {obj.backend}, not {backend.id}")
        if not backend.has_object(obj):
            raise CategoryError(f"{obj.key!r} is not an object of {backend.id}")

    levels = tuple(levels)
    if not backend.is_zero(levels[-1]):
        levels += (backend.zero(),)
    return ChainBundle(backend, levels)


@dataclass(frozen=True)
class TableMap:
    table: FrozenSet[Tuple[Hashable, Hashable]]

    @classmethod
    def of(cls, mapping: Dict[Hashable, Hashable]) -> "TableMap":
        return cls(frozenset(mapping.items()))

    @cached_property
    def lookup(self) -> Dict[Hashable, Hashable]:
        return dict(self.table)

    def image(self, f: Morphism, source: Homset, target: Homset) -> Optional[Morphism]:
        if f.payload not in self.lookup:
            return None
        return Morphism(target.source, target.target, self.lookup[f.payload])


@dataclass(frozen=True)
class FamilyMap:
    """Sends the member g·k of a family to target_generator·index_scale·k."""

    index_scale: Fraction
    target_generator: Fraction

    def image(self, f: Morphism, source: Homset, target: Homset) -> Optional[Morphism]:
        k = source.index_of(f)
        if k is None:
            return None
        return Morphism(target.source, target.target, self.target_generator * self.index_scale * k)


HomsetMap = Union[TableMap, FamilyMap]


def family_map_with_unit(unit: Morphism, target: Homset) -> FamilyMap:
    """The family map sending the first member of a family to `unit`."""
    t = target.generator
    if t == 0:
        return FamilyMap(Fraction(0), Fraction(0))
    return FamilyMap(Fraction(unit.payload) / t, t)


@dataclass(frozen=True)
class ChainBundleMap:
    source: ChainBundle
    target: ChainBundle
    vertex_maps: Tuple[Morphism, ...]
    homset_maps: Dict[Key, HomsetMap] = field(default_factory=dict)

    @property
    def backend(self) -> Category:
        return self.source.backend

    def vertex(self, i: int) -> Morphism:
        return self.vertex_maps[self.source.position(i)]

    def apply(self, key: Key, f: Morphism) -> Optional[Morphism]:
        return self.homset_maps[key].image(f, self.source.homset(*key), self.target.homset(*key))


def vertices_by_level(bundle: ChainBundle, by_level: Dict[int, Morphism]) -> Tuple[Morphism, ...]:
    ordered = [None] * bundle.length
    for i, f in by_level.items():
        ordered[bundle.position(i)] = f
    return tuple(ordered)


def make_map(
    source: ChainBundle,
    target: ChainBundle,
    vertex_maps: Sequence[Morphism],
    homset_maps: Optional[Dict[Key, HomsetMap]] = None,
) -> ChainBundleMap:
    """Pad both bundles to a common length and fill in the forced map at the zero level."""
    if source.backend.id != target.backend.id:
        raise BackendMismatch(f"{source.backend.id} and {target.backend.id} differ")

    length = max(source.length, target.length)
    source, target = source.padded(length), target.padded(length)
    cat = source.backend

    vertex_maps = list(vertex_maps)
    if len(vertex_maps) == length - 1:
        forced = cat.identity(cat.zero())
        vertex_maps = vertex_maps + [forced] if source.step < 0 else [forced] + vertex_maps
    if len(vertex_maps) != length:
        raise ShapeMismatch(f"{len(vertex_maps)} vertex maps for bundles of length {length}")

    homset_maps = dict(homset_maps or {})
    valid_keys = set(source.arrow_keys()) | set(source.endo_keys())
    for key in homset_maps:
        if key not in valid_keys:
            raise ShapeMismatch(f"{key} is not a homset of the bundle")

    return ChainBundleMap(source, target, tuple(vertex_maps), homset_maps)


def _elements(hom: Homset, symbolic: bool, scope: int) -> Tuple[Morphism, ...]:
    if hom.is_finite:
        return hom.members()
    if symbolic:
        # images of a family map are linear in k, so k = 1 decides every law
        return (hom.member(1),)
    return hom.sample(scope)


def _witness(cat: Category, hom: Homset, f: Morphism) -> Hashable:
    return hom.index_of(f) if hom.is_family else cat.format_payload(f)


def validate_chain_bundle_map(F: ChainBundleMap, symbolic: bool = True, scope: int = 20) -> ValidationReport:
    """Check typing, totality, the square law, functoriality and composite homsets."""
    src, tgt = F.source, F.target
    cat = src.backend
    if cat.id != tgt.backend.id:
        raise BackendMismatch(f"{cat.id} and {tgt.backend.id} differ")
    if src.length != tgt.length or len(F.vertex_maps) != src.length:
        raise ShapeMismatch(f"bundles of length {src.length} and {tgt.length} with {len(F.vertex_maps)} vertex maps")

    report = ValidationReport()
    for i in range(src.length):
        f = F.vertex(i)
        if f is None or not cat.contains(f) or (f.source, f.target) != (src.level(i), tgt.level(i)):
            report.add("vertex.type", i)
    if not report.valid:
        return report

    for key in src.arrow_keys():
        if key not in F.homset_maps:
            report.add("homset_map.missing", *key)

    for key in sorted(F.homset_maps):
        _check_homset(F, key, symbolic, scope, report)

    _check_functoriality(F, symbolic, scope, report)
    _check_composites(F, symbolic, scope, report)

    logging.debug(f"validated map {src} → {tgt}: {len(report.violations)} violations")
    return report


def _check_homset(F: ChainBundleMap, key: Key, symbolic: bool, scope: int, report: ValidationReport) -> None:
    cat = F.backend
    i, j = key
    source, target = F.source.homset(i, j), F.target.homset(i, j)
    fmap = F.homset_maps[key]

    if not source.is_finite and isinstance(fmap, TableMap):
        report.add("homset_map.total", i, j, "table on an infinite family")
        return

    fi, fj = F.vertex(i), F.vertex(j)
    for f in _elements(source, symbolic, scope):
        image = F.apply(key, f)
        w = _witness(cat, source, f)
        if image is None:
            report.add("homset_map.total", i, j, w)
            break
        if image not in target:
            report.add("homset_map.range", i, j, w)
            break
        if cat.compose(f, fj) != cat.compose(fi, image):
            report.add("square", i, j, w)
            break

    if i == j and F.apply(key, cat.identity(F.source.level(i))) != cat.identity(F.target.level(i)):
        report.add("functor.identity", i)


def _check_functoriality(F: ChainBundleMap, symbolic: bool, scope: int, report: ValidationReport) -> None:
    cat = F.backend
    for first in sorted(F.homset_maps):
        for second in sorted(F.homset_maps):
            through = (first[0], second[1])
            if first[1] != second[0] or through not in F.homset_maps:
                continue

            done = False
            for f in _elements(F.source.homset(*first), symbolic, scope):
                for g in _elements(F.source.homset(*second), symbolic, scope):
                    images = F.apply(first, f), F.apply(second, g), F.apply(through, cat.compose(f, g))
                    if None in images:
                        continue
                    if images[2] != cat.compose(images[0], images[1]):
                        report.add("functor.composite", first[0], first[1], second[1])
                        done = True
                        break
                if done:
                    break


def _check_composites(F: ChainBundleMap, symbolic: bool, scope: int, report: ValidationReport) -> None:
    cat = F.backend
    src = F.source
    keys = src.arrow_keys()
    if any(key not in F.homset_maps for key in keys):
        return

    for start in range(src.length):
        current: Dict[Morphism, Morphism] = {}
        families = True
        reported = set()
        fi = F.vertex(start)
        for step, key in enumerate(src.path(start, 0 if src.step < 0 else src.height)):
            hom = src.homset(*key)
            families = families and not hom.is_finite

            if step == 0:
                current = {f: F.apply(key, f) for f in _elements(hom, symbolic and families, scope)}
                continue

            fresh: Dict[Morphism, Morphism] = {}
            for c, d in current.items():
                for g in _elements(hom, symbolic and families, scope):
                    composite = cat.compose(c, g)
                    derived = cat.compose(d, F.apply(key, g))
                    if fresh.setdefault(composite, derived) != derived and "functor" not in reported:
                        report.add("functor.composite", start, key[1], cat.format_payload(composite))
                        reported.add("functor")
            current = fresh

            end = key[1]
            fj = F.vertex(end)
            for c, d in current.items():
                if cat.compose(c, fj) != cat.compose(fi, d):
                    report.add("square", start, end, cat.format_payload(c))
                    break


def identity_map(bundle: ChainBundle) -> ChainBundleMap:
    cat = bundle.backend
    maps: Dict[Key, HomsetMap] = {}
    for key in bundle.arrow_keys() + bundle.endo_keys():
        hom = bundle.homset(*key)
        if hom.is_finite:
            maps[key] = TableMap.of({f.payload: f.payload for f in hom.members()})
        else:
            maps[key] = FamilyMap(Fraction(1), hom.generator)
    return ChainBundleMap(bundle, bundle, tuple(cat.identity(o) for o in bundle.levels), maps)


def compose_maps(F: ChainBundleMap, G: ChainBundleMap) -> ChainBundleMap:
    """F then G."""
    if F.target != G.source:
        raise NonComposable(f"map into {F.target} cannot be followed by a map out of {G.source}")
    cat = F.backend

    maps: Dict[Key, HomsetMap] = {}
    for key in sorted(set(F.homset_maps) & set(G.homset_maps)):
        hom = F.source.homset(*key)
        if hom.is_finite:
            table = {}
            for f in hom.members():
                middle = F.apply(key, f)
                image = G.apply(key, middle) if middle is not None else None
                if image is None:
                    raise CategoryError(f"homset map at {key} is not total")
                table[f.payload] = image.payload
            maps[key] = TableMap.of(table)
        else:
            unit = G.apply(key, F.apply(key, hom.member(1)))
            maps[key] = family_map_with_unit(unit, G.target.homset(*key))

    vertex_maps = tuple(cat.compose(f, g) for f, g in zip(F.vertex_maps, G.vertex_maps))
    return ChainBundleMap(F.source, G.target, vertex_maps, maps)


def _same_action(F: ChainBundleMap, G: ChainBundleMap, key: Key) -> bool:
    hom = F.source.homset(*key)
    samples = hom.members() if hom.is_finite else (hom.member(1),)
    return all(F.apply(key, f) == G.apply(key, f) for f in samples)


def map_equals(F: ChainBundleMap, G: ChainBundleMap) -> Tuple[bool, bool]:
    """(map_equal, functor_equal): functor equality ignores the vertex maps."""
    functor_equal = (
        F.source == G.source
        and F.target == G.target
        and set(F.homset_maps) == set(G.homset_maps)
        and all(_same_action(F, G, key) for key in F.homset_maps)
    )
    return functor_equal and F.vertex_maps == G.vertex_maps, functor_equal


def functor_equals(F: ChainBundleMap, G: ChainBundleMap) -> bool:
    return map_equals(F, G)[1]


@dataclass(frozen=True)
class SubchainVerdict:
    holds: bool
    witness: Optional[ChainBundleMap] = None
    level: Optional[int] = None
    pair: Optional[Tuple[str, str]] = None
    morphism: Optional[str] = None
    reason: Optional[str] = None

    def message(self) -> str:
        if self.holds:
            return "subchain"
        if self.pair is None:
            return f"level {self.level}: {self.reason}"
        return f"level ({self.pair[0]}, {self.pair[1]}): {self.reason}"


def is_subchain_bundle(small: ChainBundle, big: ChainBundle, strict: bool = False) -> SubchainVerdict:
    """Decide whether `small` sits levelwise inside `big` with homsets corestricting."""
    cat = small.backend
    if cat.id != big.backend.id:
        raise BackendMismatch(f"{cat.id} and {big.backend.id} differ")
    length = max(small.length, big.length)
    small, big = small.padded(length), big.padded(length)

    for i in range(length - 1, -1, -1):
        if not cat.is_subobject(small.level(i), big.level(i)):
            return SubchainVerdict(
                False,
                level=i,
                reason=f"{cat.format_object(small.level(i))} is not a subobject of {cat.format_object(big.level(i))}",
            )

    maps: Dict[Key, HomsetMap] = {}
    for i, j in small.arrow_keys():
        hom_small, hom_big = small.homset(i, j), big.homset(i, j)
        failing = None

        if cat.scalar and hom_small.is_family:
            scale, failing = subz_corestricts(hom_small, hom_big, strict)
            if failing is None:
                maps[(i, j)] = FamilyMap(scale, hom_big.generator)
        else:
            table = {}
            for f in hom_small.members():
                g = cat.corestriction_of(f, big.level(i), big.level(j), strict)
                if g is None:
                    failing = f
                    break
                table[f.payload] = g.payload
            maps[(i, j)] = TableMap.of(table)

        if failing is not None:
            if strict and not cat.is_epi(failing):
                reason = f"{cat.format_payload(failing)} is not epi"
            elif hom_big.is_family:
                reason = f"{cat.format_payload(failing)} not in family {cat.describe_homset(hom_big)}"
            else:
                reason = f"{cat.format_payload(failing)} has no corestriction in {cat.describe_homset(hom_big)}"
            return SubchainVerdict(
                False,
                level=i,
                pair=(cat.format_object(small.level(i)), cat.format_object(small.level(j))),
                morphism=cat.format_payload(failing),
                reason=reason,
            )

    inclusions = tuple(cat.inclusion(a, b) for a, b in zip(small.levels, big.levels))
    return SubchainVerdict(True, witness=ChainBundleMap(small, big, inclusions, maps))


def is_full(F: ChainBundleMap) -> Tuple[bool, Optional[Key]]:
    """Whether every given homset map is surjective; otherwise the first key that is not."""
    for key in sorted(F.homset_maps):
        source, target = F.source.homset(*key), F.target.homset(*key)
        if target.is_finite:
            if source.is_finite:
                images = {F.apply(key, f) for f in source.members()}
            else:
                images = {F.apply(key, source.member(0))}
            if images != set(target.members()):
                return False, key
        elif source.is_finite:
            return False, key
        elif abs(F.apply(key, source.member(1)).payload) != abs(target.generator):
            return False, key
    return True, None


@dataclass(frozen=True)
class MapFactorization:
    epi: ChainBundleMap
    inclusion: ChainBundleMap
    middle: ChainBundle


def factorize_map(F: ChainBundleMap) -> MapFactorization:
    """Split a full map into an epi part onto the levelwise images followed by inclusions."""
    full, key = is_full(F)
    if not full:
        raise NotFull(f"homset map at {key} is not surjective")

    cat = F.backend
    factorizations = []
    for i in range(F.source.length - 1, -1, -1):
        try:
            factorizations.append(cat.canonical_factorize(F.vertex(i)))
        except CategoryError as e:
            raise VertexNotFactorizable(f"level {i}: {e}") from e

    middle = type(F.source)(F.source.backend, tuple(x.image for x in factorizations))
    if F.source.step > 0:
        middle = type(F.source)(F.source.backend, tuple(reversed(middle.levels)))
    epi_vertices = {i: x.epi for i, x in zip(range(F.source.length - 1, -1, -1), factorizations)}
    incl_vertices = {i: x.inclusion for i, x in zip(range(F.source.length - 1, -1, -1), factorizations)}

    epi_maps: Dict[Key, HomsetMap] = {}
    incl_maps: Dict[Key, HomsetMap] = {}
    for key in sorted(F.homset_maps):
        i, j = key
        source, mid = F.source.homset(i, j), middle.homset(i, j)

        if source.is_finite:
            table = {}
            for f in source.members():
                m = cat.restriction_of(F.apply(key, f), middle.level(i), middle.level(j))
                if m is None:
                    raise VertexNotFactorizable(f"image of {cat.format_payload(f)} leaves the image at {key}")
                table[f.payload] = m.payload
            epi_maps[key] = TableMap.of(table)
        else:
            m = cat.restriction_of(F.apply(key, source.member(1)), middle.level(i), middle.level(j))
            if m is None:
                raise VertexNotFactorizable(f"image of the family at {key} leaves the image")
            epi_maps[key] = family_map_with_unit(m, mid)

        def extend(m: Morphism) -> Morphism:
            g = cat.corestriction_of(m, F.target.level(i), F.target.level(j))
            if g is None:
                raise VertexNotFactorizable(f"{cat.format_payload(m)} at {key} extends to no target morphism")
            return g

        if mid.is_finite:
            preferred = {}
            if source.is_finite:
                for f in source.members():
                    preferred.setdefault(epi_maps[key].image(f, source, mid).payload, F.apply(key, f).payload)
            incl_maps[key] = TableMap.of({m.payload: preferred.get(m.payload, extend(m).payload) for m in mid.members()})
        else:
            incl_maps[key] = family_map_with_unit(extend(mid.member(1)), F.target.homset(i, j))

    epi = ChainBundleMap(F.source, middle, vertices_by_level(F.source, epi_vertices), epi_maps)
    inclusion = ChainBundleMap(middle, F.target, vertices_by_level(middle, incl_vertices), incl_maps)

    if not map_equals(compose_maps(epi, inclusion), F)[0]:
        raise VertexNotFactorizable("epi part followed by inclusion part does not recompose the map")

    logging.debug(f"factorized through {middle}")
    return MapFactorization(epi, inclusion, middle)


def _solve_square(cat: Category, u: Morphism, top: Morphism, bottom: Morphism, candidates: Homset) -> List[Morphism]:
    """All w in `candidates` with u then bottom == top then w."""
    lhs = cat.compose(u, bottom)
    return [w for w in candidates.members() if cat.compose(top, w) == lhs]


@dataclass(frozen=True)
class ProductBundle:
    bundle: ChainBundle
    left: ChainBundleMap
    right: ChainBundleMap


def product_bundle(c: ChainBundle, d: ChainBundle) -> ProductBundle:
    """Levelwise products with projection maps solved from the square law."""
    cat = c.backend
    if cat.id != d.backend.id:
        raise BackendMismatch(f"{cat.id} and {d.backend.id} differ")
    length = max(c.length, d.length)
    c, d = c.padded(length), d.padded(length)

    cones = {i: cat.product(c.level(i), d.level(i)) for i in range(length)}
    bundle = type(c)(cat, tuple(cones[i].obj for i in sorted(cones, key=c.position)))

    legs = []
    for side, leg in ((c, "left"), (d, "right")):
        maps: Dict[Key, HomsetMap] = {}
        for i, j in bundle.arrow_keys():
            top, bottom = getattr(cones[i], leg), getattr(cones[j], leg)
            table = {}
            for u in bundle.homset(i, j).members():
                solutions = _solve_square(cat, u, top, bottom, side.homset(i, j))
                if not solutions:
                    raise ProductsUnsupported(f"{leg} projection square has no solution at level {i}")
                table[u.payload] = solutions[0].payload
            maps[(i, j)] = TableMap.of(table)
        vertices = vertices_by_level(bundle, {i: getattr(cone, leg) for i, cone in cones.items()})
        legs.append(ChainBundleMap(bundle, side, vertices, maps))

    return ProductBundle(bundle, legs[0], legs[1])


@dataclass(frozen=True)
class ProductVerdict:
    exists: bool
    unique: bool
    count: int
    witness: Optional[str] = None
    mediating: Optional[ChainBundleMap] = None


def verify_product(candidate: ProductBundle, F: ChainBundleMap, G: ChainBundleMap, bound: int = 4096) -> ProductVerdict:
    """Count mediating maps from the common source of F and G into the candidate."""
    cat = candidate.bundle.backend
    apex, P = F.source, candidate.bundle
    if G.source != apex:
        raise ShapeMismatch("both legs must start at the same bundle")
    if not (apex.length == P.length == F.target.length == G.target.length):
        raise ShapeMismatch("legs and candidate must have the same length")
    left, right = candidate.left, candidate.right

    choices = {}
    space = 1
    for i in range(P.length):
        choices[i] = [
            v
            for v in cat.homset(apex.level(i), P.level(i)).members()
            if cat.compose(v, left.vertex(i)) == F.vertex(i) and cat.compose(v, right.vertex(i)) == G.vertex(i)
        ]
        if not choices[i]:
            return ProductVerdict(False, False, 0, f"level {i}: no vertex morphism into {cat.format_object(P.level(i))}")
        space *= len(choices[i])
    if space > bound:
        message = f"{space} vertex combinations exceed the bound {bound}"
        logging.info(message)
        raise SearchSpaceTooLarge(message)

    levels = sorted(choices)
    total = 0
    witness = None
    mediating = None
    for combo in product(*(choices[i] for i in levels)):
        v = dict(zip(levels, combo))
        count = 1
        tables: Dict[Key, Dict[Hashable, Hashable]] = {}
        for key in P.arrow_keys():
            i, j = key
            tables[key] = {}
            for k in apex.homset(i, j).members():
                lhs = cat.compose(k, v[j])
                found = [
                    u
                    for u in P.homset(i, j).members()
                    if (
                        cat.compose(v[i], u) == lhs
                        and left.apply(key, u) == F.apply(key, k)
                        and right.apply(key, u) == G.apply(key, k)
                    )
                ]
                if not found:
                    witness = witness or f"homset {key}: no image for {cat.format_payload(k)}"
                    count = 0
                    break
                count *= len(found)
                tables[key][k.payload] = found[0].payload
            if count == 0:
                break

        total += count
        if count and mediating is None:
            maps = {key: TableMap.of(t) for key, t in tables.items()}
            mediating = ChainBundleMap(apex, P, vertices_by_level(apex, v), maps)

    return ProductVerdict(total >= 1, total == 1, total, None if total else witness, mediating)


def embed_left(bundle: ChainBundle, pair: PairCategory) -> ChainBundle:
    zero = pair.right.zero()
    return type(bundle)(pair, tuple(pair.join(o, zero) for o in bundle.levels))


def embed_right(bundle: ChainBundle, pair: PairCategory) -> ChainBundle:
    zero = pair.left.zero()
    return type(bundle)(pair, tuple(pair.join(zero, o) for o in bundle.levels))


def embed_left_map(F: ChainBundleMap, pair: PairCategory) -> ChainBundleMap:
    """The map F acting on first components, identity on the zero second component."""
    source, target = embed_left(F.source, pair), embed_left(F.target, pair)
    unit = pair.right.identity(pair.right.zero())
    vertices = tuple(pair.join_morphism(f, unit) for f in F.vertex_maps)

    maps: Dict[Key, HomsetMap] = {}
    for key in F.homset_maps:
        table = {}
        for f in F.source.homset(*key).members():
            table[(f.payload, unit.payload)] = (F.apply(key, f).payload, unit.payload)
        maps[key] = TableMap.of(table)
    return ChainBundleMap(source, target, vertices, maps)


def induce_groupoid_map(source: ChainBundle, target: ChainBundle, vertex_maps: Sequence[Morphism]) -> ChainBundleMap:
    """Build the unique homset maps forced by invertible vertex maps: f ↦ f_i⁻¹ then f then f_j."""
    F = make_map(source, target, vertex_maps)
    cat = F.backend

    inverses = {}
    for i in range(F.source.length):
        inverse = cat.inverse(F.vertex(i))
        if inverse is None:
            raise NotAGroupoid(f"vertex map at level {i} is not invertible")
        inverses[i] = inverse

    maps: Dict[Key, HomsetMap] = {}
    for key in F.source.arrow_keys() + F.source.endo_keys():
        i, j = key
        table = {}
        for f in F.source.homset(i, j).members():
            if not cat.is_zero_morphism(f) and cat.inverse(f) is None:
                raise NotAGroupoid(f"{cat.format_morphism(f)} is neither zero nor invertible")
            table[f.payload] = cat.compose_all(inverses[i], f, F.vertex(j)).payload
        maps[key] = TableMap.of(table)

    induced = ChainBundleMap(F.source, F.target, F.vertex_maps, maps)
    assert validate_chain_bundle_map(induced).valid
    return induced


def dualize(bundle: ChainBundle) -> ChainBundle:
    """Reverse the bundle over the opposite backend; applying it twice gives the bundle back."""
    op = bundle.backend.opposite()
    levels = tuple(ObjectRef(op.id, o.key) for o in reversed(bundle.levels))
    if isinstance(bundle, CochainBundle):
        return ChainBundle(op, levels)
    return CochainBundle(op, levels)


def invert_homset_map(fmap: HomsetMap, source: Homset, target: Homset) -> HomsetMap:
    if not source.is_finite and not target.is_finite:
        unit = fmap.image(source.member(1), source, target)
        sign = Fraction(unit.payload) / target.generator
        if abs(sign) != 1:
            raise NotInvertible(f"family map with unit {unit.payload} is not onto {target.generator}·k")
        return FamilyMap(sign, source.generator)

    if source.is_finite and target.is_finite:
        table = {f.payload: fmap.image(f, source, target) for f in source.members()}
        images = {g.payload for g in table.values() if g is not None}
        if None in table.values() or len(images) != len(table) or images != {g.payload for g in target.members()}:
            raise NotInvertible("homset map is not a bijection")
        return TableMap.of({g.payload: f for f, g in table.items()})

    raise NotInvertible("a finite homset cannot correspond to an infinite family")


def dualize_map(F: ChainBundleMap) -> ChainBundleMap:
    """Dual of F: dual(target) → dual(source), with every homset map inverted.

    Raises NotInvertible unless every homset map is a bijection; a family map must send
    the generator to plus or minus the target generator.
    """
    op = F.backend.opposite()
    source, target = dualize(F.target), dualize(F.source)

    vertices = {}
    for i in range(F.source.length):
        f = F.vertex(i)
        vertices[i] = Morphism(ObjectRef(op.id, f.target.key), ObjectRef(op.id, f.source.key), f.payload)

    maps: Dict[Key, HomsetMap] = {}
    for (i, j), fmap in F.homset_maps.items():
        maps[(j, i)] = invert_homset_map(fmap, F.source.homset(i, j), F.target.homset(i, j))

    return ChainBundleMap(source, target, vertices_by_level(source, vertices), maps)


