from typing import List

from cbtool.bundle import ChainBundleMap
from cbtool.bundle import FamilyMap
from cbtool.bundle import MapFactorization
from cbtool.bundle import ProductBundle
from cbtool.bundle import SubchainVerdict
from cbtool.category import ValidationReport
from cbtool.category import Violation
from cbtool.chains import Chain
from cbtool.chains import ChainCategory
from cbtool.chains import LadderSpace
from cbtool.subz import format_scalar

ORDER_NOTE = "composition order: diagrammatic (compose(f, g) is f then g)"

# rules whose witness ends in (level i, level j, sample)
PAIR_RULES = {"square", "homset_map.total", "homset_map.range"}


def format_witness(v: Violation) -> str:
    head, tail = v.witness[:-3], v.witness[-3:]
    if v.rule in PAIR_RULES and len(tail) == 3 and all(isinstance(x, int) for x in tail[:2]):
        i, j, sample = tail
        sample = f"k = {sample}" if isinstance(sample, int) else str(sample)
        return ", ".join([str(x) for x in head] + [f"level ({i}, {j})", sample])
    return ", ".join(format_scalar(w) if not isinstance(w, (str, bool)) else str(w) for w in v.witness)


def format_report(report: ValidationReport, title: str = "") -> str:
    lines = [ORDER_NOTE]
    prefix = f"{title}: " if title else ""
    if report.valid:
        lines.append(f"{prefix}valid")
    for v in report.violations:
        lines.append(f"{prefix}{v.rule}: {format_witness(v)}")
    return "\n".join(lines)


def format_map(F: ChainBundleMap) -> List[str]:
    cat = F.backend
    lines = [f"{F.source} → {F.target}"]
    for i in range(F.source.height, -1, -1):
        lines.append(f"  level {i}: {cat.format_morphism(F.vertex(i))}")
    for (i, j), fmap in sorted(F.homset_maps.items()):
        if isinstance(fmap, FamilyMap):
            desc = f"k ↦ {format_scalar(fmap.target_generator)}·{format_scalar(fmap.index_scale)}·k"
        else:
            desc = f"table of {len(fmap.table)}"
        lines.append(f"  homset ({i}, {j}): {desc}")
    return lines


def format_subchain(verdict: SubchainVerdict) -> str:
    if not verdict.holds:
        return verdict.message()
    return "\n".join(["subchain"] + format_map(verdict.witness))


def format_factorization(fact: MapFactorization) -> str:
    lines = [f"middle: {fact.middle}", "epi part:"]
    lines += format_map(fact.epi)
    lines.append("inclusion part:")
    lines += format_map(fact.inclusion)
    return "\n".join(lines)


def format_chains(chains: List[Chain]) -> str:
    if not chains:
        return "no chains"
    return "\n".join(str(c) for c in chains)


def format_product(prod: ProductBundle) -> str:
    lines = [f"product: {prod.bundle}", "left projection:"] + format_map(prod.left)
    lines += ["right projection:"] + format_map(prod.right)
    return "\n".join(lines)


def format_gamma(gamma: ChainCategory) -> str:
    lines = [f"C{a}: {c}" for a, c in enumerate(gamma.chains)]
    for (a, b), hom in sorted(gamma.homsets.items()):
        if isinstance(hom, LadderSpace):
            lines.append(f"C{a} → C{b}: {hom.describe()}")
        else:
            lines.append(f"C{a} → C{b}: {len(hom)} chain maps")
    return "\n".join(lines)
