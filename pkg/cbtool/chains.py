import logging
import math
from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Dict
from typing import Hashable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

from cbtool.bundle import ChainBundle
from cbtool.bundle import MixedBackends
from cbtool.bundle import ShapeMismatch
from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import InfiniteHomset
from cbtool.category import Morphism
from cbtool.category import ObjectRef
from cbtool.category import SearchSpaceTooLarge
from cbtool.category import ValidationReport
from cbtool.presented import Arrow
from cbtool.presented import PresentedCategory


class AmbiguousChoice(CategoryError):
    pass


@dataclass(frozen=True)
class Chain:
    """Objects joined by single arrows; arrows[p] goes vertices[p] → vertices[p + 1]."""

    backend: Category = field(compare=False, repr=False)
    vertices: Tuple[ObjectRef, ...]
    arrows: Tuple[Morphism, ...]

    @property
    def length(self) -> int:
        return len(self.vertices)

    def padded(self, length: int) -> "Chain":
        if length <= self.length:
            return self
        cat = self.backend
        zero = cat.zero()
        extra = length - self.length
        arrows = (cat.identity(zero),) * (extra - 1) + (cat.zero_morphism(zero, self.vertices[0]),)
        return Chain(cat, (zero,) * extra + self.vertices, arrows + self.arrows)

    def format(self) -> str:
        return " → ".join(self.backend.format_object(v) for v in self.vertices)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class ChainMap:
    maps: Tuple[Morphism, ...]


class Selector(ABC):
    @abstractmethod
    def choose(self, bundle: ChainBundle, i: int) -> Optional[Morphism]:
        """The selected arrow of Hom(M_i, M_{i-1}), if any."""


class InclusionsOnly(Selector):
    def choose(self, bundle: ChainBundle, i: int) -> Optional[Morphism]:
        cat = bundle.backend
        hom = bundle.homset(i, i - 1)
        if not hom.is_finite:
            a, b = bundle.level(i), bundle.level(i - 1)
            return cat.inclusion(a, b) if cat.is_subobject(a, b) else None

        found = [f for f in hom.members() if cat.is_inclusion(f)]
        if len(found) > 1:
            raise AmbiguousChoice(f"level {i} has {len(found)} inclusions")
        return found[0] if found else None


@dataclass(frozen=True)
class ExplicitChoice(Selector):
    """Payloads keyed by the source level of Hom(M_i, M_{i-1}); None selects nothing.

    With `documents` set the payloads are still in document form.
    """

    choices: Dict[int, Optional[Hashable]] = field(default_factory=dict)
    documents: bool = False

    def choose(self, bundle: ChainBundle, i: int) -> Optional[Morphism]:
        payload = self.choices.get(i)
        if payload is None:
            return None
        cat = bundle.backend
        a, b = bundle.level(i), bundle.level(i - 1)
        if self.documents:
            payload = cat.load_payload(a, b, payload)
        return cat.morphism(a, b, payload)


class BoundaryCondition(Selector):
    """Every selection whose consecutive arrows compose to zero."""

    def choose(self, bundle: ChainBundle, i: int) -> Optional[Morphism]:
        raise CategoryError("boundary selections are enumerated with extract_complexes")


def extract_chains(bundle: ChainBundle, selector: Selector, bound: int = 4096) -> List[Chain]:
    """Split a bundle into maximal runs of nonzero levels joined by selected arrows.

    Zero levels are skipped and each run ends with the zero arrow into 0.
    """
    if isinstance(selector, BoundaryCondition):
        return extract_complexes(bundle, bound)

    cat = bundle.backend
    zero = cat.zero()
    chains = []
    vertices: List[ObjectRef] = []
    arrows: List[Morphism] = []

    for i in range(bundle.height, 0, -1):
        m = bundle.level(i)
        if cat.is_zero(m):
            continue
        vertices.append(m)

        arrow = selector.choose(bundle, i)
        if arrow is not None and not cat.is_zero(bundle.level(i - 1)):
            arrows.append(arrow)
            continue

        arrows.append(cat.zero_morphism(m, zero))
        chains.append(Chain(cat, tuple(vertices) + (zero,), tuple(arrows)))
        vertices, arrows = [], []

    logging.debug(f"{bundle} splits into {len(chains)} chains")
    return chains


def extract_complexes(bundle: ChainBundle, bound: int = 4096) -> List[Chain]:
    """All selections of one arrow per consecutive homset with zero consecutive composites."""
    cat = bundle.backend
    homs = [bundle.homset(i, i - 1).members() for i in range(bundle.height, 0, -1)]

    space = math.prod(len(h) for h in homs)
    if space > bound:
        message = f"{space} selections exceed the bound {bound}"
        logging.info(message)
        raise SearchSpaceTooLarge(message)

    found: List[Tuple[Morphism, ...]] = []

    def extend(prefix: Tuple[Morphism, ...]) -> None:
        if len(prefix) == len(homs):
            found.append(prefix)
            return
        for d in homs[len(prefix)]:
            if prefix and not cat.is_zero_morphism(cat.compose(prefix[-1], d)):
                continue
            extend(prefix + (d,))

    extend(())
    logging.debug(f"scanned {space} selections, {len(found)} are complexes")
    return [Chain(cat, bundle.levels, arrows) for arrows in found]


def validate_chain_map(F: ChainMap, source: Chain, target: Chain) -> ValidationReport:
    cat = source.backend
    length = max(source.length, target.length)
    source, target = source.padded(length), target.padded(length)
    if len(F.maps) != length:
        raise ShapeMismatch(f"{len(F.maps)} maps for chains of length {length}")

    report = ValidationReport()
    for p, f in enumerate(F.maps):
        if (f.source, f.target) != (source.vertices[p], target.vertices[p]) or not cat.contains(f):
            report.add("vertex.type", length - 1 - p)
    if not report.valid:
        return report

    for p in range(length - 1):
        if cat.compose(source.arrows[p], F.maps[p + 1]) != cat.compose(F.maps[p], target.arrows[p]):
            report.add("square", length - 1 - p)
    return report


def is_subchain(small: Chain, big: Chain) -> Optional[ChainMap]:
    """The levelwise inclusion map when it is a chain map, else None."""
    cat = small.backend
    length = max(small.length, big.length)
    small, big = small.padded(length), big.padded(length)
    if not all(cat.is_subobject(a, b) for a, b in zip(small.vertices, big.vertices)):
        return None
    inclusion = ChainMap(tuple(cat.inclusion(a, b) for a, b in zip(small.vertices, big.vertices)))
    return inclusion if validate_chain_map(inclusion, small, big).valid else None


def lcm_fraction(x: Fraction, y: Fraction) -> Fraction:
    return Fraction(math.lcm(x.numerator, y.numerator), math.gcd(x.denominator, y.denominator))


@dataclass(frozen=True)
class LadderBlock:
    positions: Tuple[int, ...]
    ratios: Tuple[Fraction, ...]
    generator: Fraction


@dataclass(frozen=True)
class LadderSpace:
    """All chain maps between two scalar chains: one free integer per block.

    A block is a run of positions whose squares tie each scalar to the previous one.
    """

    source: Chain
    target: Chain
    blocks: Tuple[LadderBlock, ...]

    @property
    def free_blocks(self) -> Tuple[LadderBlock, ...]:
        return tuple(b for b in self.blocks if b.generator != 0)

    def member(self, params: Sequence[int]) -> ChainMap:
        if len(params) != len(self.free_blocks):
            raise ShapeMismatch(f"{len(params)} parameters for {len(self.free_blocks)} free blocks")

        scalars = [Fraction(0)] * self.source.length
        for block, t in zip(self.free_blocks, params):
            for p, r in zip(block.positions, block.ratios):
                scalars[p] = block.generator * t * r
        return ChainMap(
            tuple(Morphism(a, b, q) for a, b, q in zip(self.source.vertices, self.target.vertices, scalars))
        )

    def contains(self, F: ChainMap) -> bool:
        if len(F.maps) != self.source.length:
            return False
        for block in self.blocks:
            t = Fraction(F.maps[block.positions[0]].payload)
            if any(Fraction(F.maps[p].payload) != t * r for p, r in zip(block.positions, block.ratios)):
                return False
            if block.generator == 0 and t != 0:
                return False
            if block.generator != 0 and (t / block.generator).denominator != 1:
                return False
        return True

    def describe(self) -> str:
        if not self.free_blocks:
            return "{0}"
        return " ⊕ ".join(f"{b.generator}ℤ@{list(b.positions)}" for b in self.free_blocks)


def solve_ladder(cat: Category, source: Chain, target: Chain) -> LadderSpace:
    """Solve the squares a_p·s_{p+1} = s_p·b_p symbolically over scalar homsets."""
    n = source.length
    lattice = [cat.homset(a, b).generator for a, b in zip(source.vertices, target.vertices)]
    a = [Fraction(f.payload) for f in source.arrows]
    b = [Fraction(f.payload) for f in target.arrows]

    forced = [h == 0 for h in lattice]
    linked = [False] * (n - 1)
    for p in range(n - 1):
        if a[p] != 0 and b[p] != 0:
            linked[p] = True
        elif b[p] != 0:
            forced[p] = True
        elif a[p] != 0:
            forced[p + 1] = True

    blocks = []
    p = 0
    while p < n:
        positions, ratios = [p], [Fraction(1)]
        while p < n - 1 and linked[p]:
            ratios.append(ratios[-1] * b[p] / a[p])
            p += 1
            positions.append(p)
        p += 1

        if any(forced[q] for q in positions):
            generator = Fraction(0)
        else:
            generator = abs(lattice[positions[0]])
            for q, r in zip(positions[1:], ratios[1:]):
                generator = lcm_fraction(generator, abs(lattice[q] / r))
        blocks.append(LadderBlock(tuple(positions), tuple(ratios), generator))

    return LadderSpace(source, target, tuple(blocks))


def enumerate_chain_maps(cat: Category, source: Chain, target: Chain, candidate_bound: int = 64) -> Tuple[ChainMap, ...]:
    """Backtrack level by level through finite homsets, keeping only commuting squares."""
    candidates = []
    for a, b in zip(source.vertices, target.vertices):
        members = cat.homset(a, b).members()
        if len(members) > candidate_bound:
            message = f"{len(members)} candidates at one level exceed the bound {candidate_bound}"
            logging.info(message)
            raise SearchSpaceTooLarge(message)
        candidates.append(members)

    found: List[ChainMap] = []

    def extend(prefix: Tuple[Morphism, ...]) -> None:
        p = len(prefix)
        if p == len(candidates):
            found.append(ChainMap(prefix))
            return
        for s in candidates[p]:
            if p and cat.compose(source.arrows[p - 1], s) != cat.compose(prefix[-1], target.arrows[p - 1]):
                continue
            extend(prefix + (s,))

    extend(())
    return tuple(found)


GammaHomset = Union[Tuple[ChainMap, ...], LadderSpace]


class ChainCategory:
    """Extracted chains with chain maps between them."""

    def __init__(self, backend: Category, chains: Sequence[Chain], homsets: Dict[Tuple[int, int], GammaHomset]):
        self.backend = backend
        self.chains = tuple(chains)
        self.homsets = homsets

    @property
    def is_finite(self) -> bool:
        return all(isinstance(h, tuple) for h in self.homsets.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChainCategory):
            return NotImplemented
        return self.backend.id == other.backend.id and self.chains == other.chains and self.homsets == other.homsets

    def homset(self, a: int, b: int) -> GammaHomset:
        return self.homsets[(a, b)]

    def identity(self, a: int) -> ChainMap:
        return ChainMap(tuple(self.backend.identity(v) for v in self.chains[a].vertices))

    def compose(self, f: ChainMap, g: ChainMap) -> ChainMap:
        return ChainMap(tuple(self.backend.compose(x, y) for x, y in zip(f.maps, g.maps)))

    def to_presented(self, name: str = "gamma") -> PresentedCategory:
        if not self.is_finite:
            message = "chain maps over scalar families cannot be tabulated"
            logging.info(message)
            raise InfiniteHomset(message)

        objects = [f"C{a}" for a in range(len(self.chains))]
        labels: Dict[Tuple[int, int], Dict[ChainMap, str]] = {}
        arrows = []
        for (a, b), maps in sorted(self.homsets.items()):
            labels[(a, b)] = {}
            for n, f in enumerate(maps):
                label = f"C{a}->C{b}#{n}"
                labels[(a, b)][f] = label
                arrows.append(Arrow(label, objects[a], objects[b]))

        compose = {}
        for (a, b), left in labels.items():
            for c in range(len(self.chains)):
                for f, lf in left.items():
                    for g, lg in labels[(b, c)].items():
                        compose[(lf, lg)] = labels[(a, c)][self.compose(f, g)]

        identities = {objects[a]: labels[(a, a)][self.identity(a)] for a in range(len(self.chains))}
        return PresentedCategory(name, objects, arrows, compose, identities)


def build_gamma(
    bundles: Sequence[ChainBundle], selector: Selector, candidate_bound: int = 64, bound: int = 4096
) -> ChainCategory:
    """Extract chains from every bundle and collect all chain maps between them."""
    if not bundles:
        raise ShapeMismatch("no bundles given")
    cat = bundles[0].backend
    for bundle in bundles:
        if bundle.backend.id != cat.id:
            raise MixedBackends(f"{bundle.backend.id} differs from {cat.id}")

    extracted: List[Chain] = []
    for bundle in bundles:
        for chain in extract_chains(bundle, selector, bound):
            if chain not in extracted:
                extracted.append(chain)

    length = max((c.length for c in extracted), default=1)
    chains = []
    for chain in extracted:
        padded = chain.padded(length)
        if padded not in chains:
            chains.append(padded)

    homsets: Dict[Tuple[int, int], GammaHomset] = {}
    for a, source in enumerate(chains):
        for b, target in enumerate(chains):
            if cat.scalar:
                homsets[(a, b)] = solve_ladder(cat, source, target)
            else:
                homsets[(a, b)] = enumerate_chain_maps(cat, source, target, candidate_bound)
                logging.debug(f"C{a} → C{b}: {len(homsets[(a, b)])} chain maps")

    logging.info(f"chain category with {len(chains)} objects")
    return ChainCategory(cat, chains, homsets)
