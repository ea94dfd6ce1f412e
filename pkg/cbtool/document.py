import json
import logging
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Set
from typing import Tuple
from typing import Union

import jsonschema

from cbtool.bundle import build_chain_bundle
from cbtool.bundle import ChainBundle
from cbtool.bundle import ChainBundleMap
from cbtool.bundle import FamilyMap
from cbtool.bundle import make_map
from cbtool.bundle import MapFactorization
from cbtool.bundle import ProductBundle
from cbtool.bundle import SubchainVerdict
from cbtool.bundle import TableMap
from cbtool.category import Category
from cbtool.category import CategoryError
from cbtool.category import Morphism
from cbtool.category import ValidationReport
from cbtool.category import Violation
from cbtool.chains import BoundaryCondition
from cbtool.chains import Chain
from cbtool.chains import ChainCategory
from cbtool.chains import ChainMap
from cbtool.chains import ExplicitChoice
from cbtool.chains import GammaHomset
from cbtool.chains import InclusionsOnly
from cbtool.chains import LadderBlock
from cbtool.chains import LadderSpace
from cbtool.chains import Selector
from cbtool.fingrp import AmbientTooLarge
from cbtool.fingrp import FinGrp
from cbtool.fingrp import S3_GENERATORS
from cbtool.pair import PairCategory
from cbtool.presented import PresentedCategory
from cbtool.subz import format_scalar
from cbtool.subz import parse_scalar
from cbtool.subz import SubZ


class DocumentError(Exception):
    pass


SCALAR = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}]}

BACKEND = {
    "oneOf": [
        {"enum": ["subz", "fingrp"]},
        {
            "type": "object",
            "properties": {
                "name": {"enum": ["subz", "fingrp", "presented", "pair", "opposite"]},
                "ambient": {"type": "array", "items": {"type": "string"}},
                "category": {"type": ["object", "string"]},
                "left": {},
                "right": {},
                "base": {},
            },
            "required": ["name"],
            "additionalProperties": False,
        },
    ]
}

CATEGORY = {
    "type": "object",
    "properties": {
        "kind": {"const": "category"},
        "name": {"type": "string"},
        "objects": {"type": "array", "items": {"type": "string"}},
        "arrows": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"label": {"type": "string"}, "src": {"type": "string"}, "dst": {"type": "string"}},
                "required": ["label", "src", "dst"],
                "additionalProperties": False,
            },
        },
        "compose": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"left": {"type": "string"}, "right": {"type": "string"}, "result": {"type": "string"}},
                "required": ["left", "right", "result"],
                "additionalProperties": False,
            },
        },
        "identities": {"type": "object", "additionalProperties": {"type": "string"}},
        "zero": {"type": "string"},
        "inclusions": {"type": "array", "items": {"type": "string"}},
        "products": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {k: {"type": "string"} for k in ("left", "right", "product", "proj_left", "proj_right")},
                "required": ["left", "right", "product", "proj_left", "proj_right"],
                "additionalProperties": False,
            },
        },
        "opposite": {"type": "boolean"},
    },
    "required": ["kind", "objects", "arrows", "compose", "identities"],
    "additionalProperties": False,
}

BUNDLE = {
    "type": "object",
    "properties": {
        "kind": {"const": "bundle"},
        "name": {"type": "string"},
        "backend": BACKEND,
        "levels": {"type": "array", "minItems": 1},
    },
    "required": ["kind", "backend", "levels"],
    "additionalProperties": False,
}

BUNDLE_REF = {"oneOf": [{"type": "string"}, BUNDLE]}

HOMSET_MAP = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "from": {"type": "integer", "minimum": 0},
                "to": {"type": "integer", "minimum": 0},
                "index_scale": SCALAR,
                "target_generator": SCALAR,
            },
            "required": ["from", "to", "index_scale", "target_generator"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "from": {"type": "integer", "minimum": 0},
                "to": {"type": "integer", "minimum": 0},
                "table": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
            },
            "required": ["from", "to", "table"],
            "additionalProperties": False,
        },
    ]
}

MAP = {
    "type": "object",
    "properties": {
        "kind": {"const": "map"},
        "name": {"type": "string"},
        "source": BUNDLE_REF,
        "target": BUNDLE_REF,
        "vertex_maps": {"type": "array"},
        "homset_maps": {"type": "array", "items": HOMSET_MAP},
    },
    "required": ["kind", "source", "target", "vertex_maps"],
    "additionalProperties": False,
}

SELECTOR = {
    "type": "object",
    "properties": {
        "kind": {"const": "selector"},
        "name": {"type": "string"},
        "rule": {"enum": ["inclusions", "boundary", "explicit"]},
        "choices": {"type": "object", "patternProperties": {"^[0-9]+$": {}}, "additionalProperties": False},
    },
    "required": ["kind", "rule"],
    "additionalProperties": False,
}

CHAIN = {
    "type": "object",
    "properties": {"vertices": {"type": "array", "minItems": 1}, "arrows": {"type": "array"}},
    "required": ["vertices", "arrows"],
    "additionalProperties": False,
}

CHAINS = {
    "type": "object",
    "properties": {"kind": {"const": "chains"}, "backend": BACKEND, "chains": {"type": "array", "items": CHAIN}},
    "required": ["kind", "backend", "chains"],
    "additionalProperties": False,
}

FACTORIZATION = {
    "type": "object",
    "properties": {"kind": {"const": "factorization"}, "middle": BUNDLE, "epi": MAP, "inclusion": MAP},
    "required": ["kind", "middle", "epi", "inclusion"],
    "additionalProperties": False,
}

PRODUCT = {
    "type": "object",
    "properties": {"kind": {"const": "product"}, "bundle": BUNDLE, "left": MAP, "right": MAP},
    "required": ["kind", "bundle", "left", "right"],
    "additionalProperties": False,
}

REPORT = {
    "type": "object",
    "properties": {
        "kind": {"const": "report"},
        "valid": {"type": "boolean"},
        "violations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"rule": {"type": "string"}, "witness": {"type": "array"}},
                "required": ["rule", "witness"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["kind", "valid", "violations"],
    "additionalProperties": False,
}

SUBCHAIN = {
    "type": "object",
    "properties": {
        "kind": {"const": "subchain"},
        "holds": {"type": "boolean"},
        "message": {"type": "string"},
        "witness": MAP,
        "level": {"type": "integer", "minimum": 0},
        "pair": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        "morphism": {"type": "string"},
        "reason": {"type": "string"},
    },
    "required": ["kind", "holds", "message"],
    "additionalProperties": False,
}

LADDER_BLOCK = {
    "type": "object",
    "properties": {
        "positions": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "ratios": {"type": "array", "items": SCALAR, "minItems": 1},
        "generator": SCALAR,
    },
    "required": ["positions", "ratios", "generator"],
    "additionalProperties": False,
}

GAMMA_HOMSET = {
    "type": "object",
    "properties": {
        "from": {"type": "integer", "minimum": 0},
        "to": {"type": "integer", "minimum": 0},
        "blocks": {"type": "array", "items": LADDER_BLOCK},
        "maps": {"type": "array", "items": {"type": "array"}},
    },
    "required": ["from", "to"],
    "oneOf": [{"required": ["blocks"]}, {"required": ["maps"]}],
    "additionalProperties": False,
}

GAMMA = {
    "type": "object",
    "properties": {
        "kind": {"const": "gamma"},
        "backend": BACKEND,
        "objects": {"type": "array", "items": CHAIN},
        "homsets": {"type": "array", "items": GAMMA_HOMSET},
    },
    "required": ["kind", "backend", "objects", "homsets"],
    "additionalProperties": False,
}

WORKSPACE = {
    "type": "object",
    "properties": {
        "kind": {"const": "workspace"},
        "documents": {"type": "object", "additionalProperties": {"type": "object"}},
    },
    "required": ["kind", "documents"],
    "additionalProperties": False,
}

SCHEMAS = {
    "category": CATEGORY,
    "bundle": BUNDLE,
    "map": MAP,
    "selector": SELECTOR,
    "chains": CHAINS,
    "factorization": FACTORIZATION,
    "product": PRODUCT,
    "report": REPORT,
    "subchain": SUBCHAIN,
    "gamma": GAMMA,
    "workspace": WORKSPACE,
}


def check_schema(doc: Any) -> str:
    """Validate a document against the schema of its kind and return the kind."""
    if not isinstance(doc, dict) or doc.get("kind") not in SCHEMAS:
        raise DocumentError(f"document kind must be one of {', '.join(sorted(SCHEMAS))}")

    errors = sorted(jsonschema.Draft7Validator(SCHEMAS[doc["kind"]]).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        path = "/".join(str(p) for p in errors[0].path) or "(root)"
        raise DocumentError(f"{doc['kind']} document invalid at {path}: {errors[0].message}")
    return doc["kind"]


def read_document(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path} is not JSON: {e}") from e


def render(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


class Workspace:
    """Named documents that refer to each other by name; inline documents work too."""

    def __init__(self, documents: Optional[Dict[str, Any]] = None, ambient_order: int = 24):
        self.documents = dict(documents or {})
        self.ambient_order = ambient_order
        self._backends: Dict[str, Category] = {}
        self._loaded: Dict[str, Any] = {}
        self._loading: Set[str] = set()

    def named(self, name: str) -> Any:
        if name in self._loaded:
            return self._loaded[name]
        if name not in self.documents:
            raise DocumentError(f"reference to unknown document {name!r}")
        if name in self._loading:
            raise DocumentError(f"reference cycle through {name!r}")

        self._loading.add(name)
        try:
            self._loaded[name] = self.load(self.documents[name], name)
        finally:
            self._loading.discard(name)
        return self._loaded[name]

    def resolve(self, ref: Union[str, Dict[str, Any]]) -> Any:
        return self.named(ref) if isinstance(ref, str) else self.load(ref)

    def load_all(self) -> Dict[str, Any]:
        return {name: self.named(name) for name in sorted(self.documents)}

    def load(self, doc: Any, name: Optional[str] = None) -> Any:
        kind = check_schema(doc)
        try:
            return getattr(self, f"load_{kind}")(doc, name)
        except AmbientTooLarge:
            raise
        except CategoryError as e:
            raise DocumentError(f"{kind} document{' ' + name if name else ''}: {e}") from e

    def backend(self, spec: Any) -> Category:
        key = json.dumps(spec, sort_keys=True)
        if key not in self._backends:
            self._backends[key] = self._make_backend(spec)
        return self._backends[key]

    def _make_backend(self, spec: Any) -> Category:
        name = spec if isinstance(spec, str) else spec["name"]
        if name == "subz":
            return SubZ()
        if name == "fingrp":
            ambient = S3_GENERATORS if isinstance(spec, str) else spec.get("ambient", S3_GENERATORS)
            return FinGrp(ambient, self.ambient_order)
        if name == "presented":
            category = spec.get("category")
            if category is None:
                raise DocumentError("presented backend needs a category")
            loaded = self.resolve(category)
            if not isinstance(loaded, PresentedCategory):
                raise DocumentError("presented backend must refer to a category document")
            return loaded
        if name == "pair":
            if "left" not in spec or "right" not in spec:
                raise DocumentError("pair backend needs left and right")
            return PairCategory(self.backend(spec["left"]), self.backend(spec["right"]))
        if "base" not in spec:
            raise DocumentError("opposite backend needs a base")
        return self.backend(spec["base"]).opposite()

    def load_workspace(self, doc: Dict[str, Any], name: Optional[str]) -> "Workspace":
        inner = Workspace(doc["documents"], self.ambient_order)
        inner.load_all()
        return inner

    def load_category(self, doc: Dict[str, Any], name: Optional[str]) -> PresentedCategory:
        return PresentedCategory.from_document(doc, name)

    def load_bundle(self, doc: Dict[str, Any], name: Optional[str]) -> ChainBundle:
        backend = self.backend(doc["backend"])
        return build_chain_bundle(backend, [backend.load_object(x) for x in doc["levels"]])

    def _bundle(self, ref: Any) -> ChainBundle:
        bundle = self.resolve(ref)
        if not isinstance(bundle, ChainBundle):
            raise DocumentError("map endpoints must be bundles")
        return bundle

    def load_map(self, doc: Dict[str, Any], name: Optional[str]) -> ChainBundleMap:
        source, target = self._bundle(doc["source"]), self._bundle(doc["target"])
        length = max(source.length, target.length)
        source, target = source.padded(length), target.padded(length)
        cat = source.backend

        vertex_maps = []
        for p, payload in enumerate(doc["vertex_maps"][:length]):
            a, b = source.levels[p], target.levels[p]
            vertex_maps.append(Morphism(a, b, cat.load_payload(a, b, payload)))
        if len(doc["vertex_maps"]) > length:
            raise DocumentError(f"{len(doc['vertex_maps'])} vertex maps for bundles of length {length}")

        homset_maps = {}
        for entry in doc.get("homset_maps", ()):
            key = (entry["from"], entry["to"])
            if key in homset_maps:
                raise DocumentError(f"homset {key} is mapped twice")
            if "table" in entry:
                a, b = source.level(key[0]), source.level(key[1])
                c, d = target.level(key[0]), target.level(key[1])
                table = {}
                for x, y in entry["table"]:
                    x = cat.load_payload(a, b, x)
                    if x in table:
                        raise DocumentError(f"homset {key} maps {x!r} twice")
                    table[x] = cat.load_payload(c, d, y)
                homset_maps[key] = TableMap.of(table)
            else:
                homset_maps[key] = FamilyMap(parse_scalar(entry["index_scale"]), parse_scalar(entry["target_generator"]))

        return make_map(source, target, vertex_maps, homset_maps)

    def load_selector(self, doc: Dict[str, Any], name: Optional[str]) -> Selector:
        if doc["rule"] == "inclusions":
            return InclusionsOnly()
        if doc["rule"] == "boundary":
            return BoundaryCondition()
        return ExplicitChoice({int(k): v for k, v in doc.get("choices", {}).items()}, documents=True)

    def load_chain(self, cat: Category, doc: Dict[str, Any]) -> Chain:
        vertices = tuple(cat.load_object(v) for v in doc["vertices"])
        if len(doc["arrows"]) != len(vertices) - 1:
            raise DocumentError("a chain needs one arrow between consecutive vertices")
        arrows = tuple(
            Morphism(a, b, cat.load_payload(a, b, x)) for a, b, x in zip(vertices, vertices[1:], doc["arrows"])
        )
        return Chain(cat, vertices, arrows)

    def load_chains(self, doc: Dict[str, Any], name: Optional[str]) -> List[Chain]:
        cat = self.backend(doc["backend"])
        return [self.load_chain(cat, c) for c in doc["chains"]]

    def load_factorization(self, doc: Dict[str, Any], name: Optional[str]) -> MapFactorization:
        return MapFactorization(
            self.load_map(doc["epi"], None), self.load_map(doc["inclusion"], None), self.load_bundle(doc["middle"], None)
        )

    def load_product(self, doc: Dict[str, Any], name: Optional[str]) -> ProductBundle:
        return ProductBundle(
            self.load_bundle(doc["bundle"], None), self.load_map(doc["left"], None), self.load_map(doc["right"], None)
        )

    def load_report(self, doc: Dict[str, Any], name: Optional[str]) -> ValidationReport:
        return ValidationReport([Violation(v["rule"], tupled(v["witness"])) for v in doc["violations"]])

    def load_subchain(self, doc: Dict[str, Any], name: Optional[str]) -> SubchainVerdict:
        witness = self.load_map(doc["witness"], None) if "witness" in doc else None
        pair = tuple(doc["pair"]) if "pair" in doc else None
        return SubchainVerdict(doc["holds"], witness, doc.get("level"), pair, doc.get("morphism"), doc.get("reason"))

    def load_gamma(self, doc: Dict[str, Any], name: Optional[str]) -> ChainCategory:
        cat = self.backend(doc["backend"])
        chains = [self.load_chain(cat, c) for c in doc["objects"]]

        homsets: Dict[Tuple[int, int], GammaHomset] = {}
        for entry in doc["homsets"]:
            a, b = entry["from"], entry["to"]
            if a >= len(chains) or b >= len(chains):
                raise DocumentError(f"homset ({a}, {b}) names a missing chain")
            source, target = chains[a], chains[b]
            if "blocks" in entry:
                blocks = tuple(
                    LadderBlock(
                        tuple(blk["positions"]),
                        tuple(parse_scalar(r) for r in blk["ratios"]),
                        parse_scalar(blk["generator"]),
                    )
                    for blk in entry["blocks"]
                )
                homsets[(a, b)] = LadderSpace(source, target, blocks)
            else:
                homsets[(a, b)] = tuple(self._chain_map(source, target, payloads) for payloads in entry["maps"])
        return ChainCategory(cat, chains, homsets)

    def _chain_map(self, source: Chain, target: Chain, payloads: List[Any]) -> ChainMap:
        if len(payloads) != source.length:
            raise DocumentError(f"{len(payloads)} components for a chain of length {source.length}")
        cat = source.backend
        return ChainMap(
            tuple(Morphism(a, b, cat.load_payload(a, b, x)) for a, b, x in zip(source.vertices, target.vertices, payloads))
        )


def load_file(path: str, ambient_order: int = 24) -> Any:
    doc = read_document(path)
    logging.debug(f"loading {doc.get('kind') if isinstance(doc, dict) else '?'} document from {path}")
    return Workspace(ambient_order=ambient_order).load(doc)


def dump_scalar(q: Fraction) -> Any:
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else format_scalar(q)


def jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return dump_scalar(value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def tupled(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(tupled(v) for v in value)
    return value


def dump_bundle(bundle: ChainBundle) -> Dict[str, Any]:
    cat = bundle.backend
    return {"kind": "bundle", "backend": cat.spec(), "levels": [cat.dump_object(o) for o in bundle.levels]}


def dump_map(F: ChainBundleMap) -> Dict[str, Any]:
    cat = F.backend
    homset_maps = []
    for (i, j), fmap in sorted(F.homset_maps.items()):
        if isinstance(fmap, FamilyMap):
            homset_maps.append(
                {
                    "from": i,
                    "to": j,
                    "index_scale": dump_scalar(fmap.index_scale),
                    "target_generator": dump_scalar(fmap.target_generator),
                }
            )
            continue
        a, b = F.source.level(i), F.source.level(j)
        c, d = F.target.level(i), F.target.level(j)
        rows = [[cat.dump_payload(Morphism(a, b, x)), cat.dump_payload(Morphism(c, d, y))] for x, y in fmap.table]
        homset_maps.append({"from": i, "to": j, "table": sorted(rows, key=lambda r: json.dumps(r, sort_keys=True))})

    return {
        "kind": "map",
        "source": dump_bundle(F.source),
        "target": dump_bundle(F.target),
        "vertex_maps": [cat.dump_payload(f) for f in F.vertex_maps],
        "homset_maps": homset_maps,
    }


def dump_chain(chain: Chain) -> Dict[str, Any]:
    cat = chain.backend
    return {"vertices": [cat.dump_object(v) for v in chain.vertices], "arrows": [cat.dump_payload(f) for f in chain.arrows]}


def dump_chains(cat: Category, chains: List[Chain]) -> Dict[str, Any]:
    return {"kind": "chains", "backend": cat.spec(), "chains": [dump_chain(c) for c in chains]}


def dump_factorization(fact: MapFactorization) -> Dict[str, Any]:
    return {
        "kind": "factorization",
        "middle": dump_bundle(fact.middle),
        "epi": dump_map(fact.epi),
        "inclusion": dump_map(fact.inclusion),
    }


def dump_product(prod: ProductBundle) -> Dict[str, Any]:
    return {"kind": "product", "bundle": dump_bundle(prod.bundle), "left": dump_map(prod.left), "right": dump_map(prod.right)}


def dump_report(report: ValidationReport) -> Dict[str, Any]:
    return {
        "kind": "report",
        "valid": report.valid,
        "violations": [{"rule": v.rule, "witness": jsonable(v.witness)} for v in report.violations],
    }


def dump_subchain(verdict: SubchainVerdict) -> Dict[str, Any]:
    doc = {"kind": "subchain", "holds": verdict.holds, "message": verdict.message()}
    if verdict.witness is not None:
        doc["witness"] = dump_map(verdict.witness)
    for attr in ("level", "morphism", "reason"):
        if getattr(verdict, attr) is not None:
            doc[attr] = getattr(verdict, attr)
    if verdict.pair is not None:
        doc["pair"] = list(verdict.pair)
    return doc


def dump_gamma(gamma: ChainCategory) -> Dict[str, Any]:
    cat = gamma.backend
    homsets = []
    for (a, b), hom in sorted(gamma.homsets.items()):
        if isinstance(hom, LadderSpace):
            blocks = [
                {"positions": list(blk.positions), "ratios": jsonable(blk.ratios), "generator": dump_scalar(blk.generator)}
                for blk in hom.blocks
            ]
            homsets.append({"from": a, "to": b, "blocks": blocks})
        else:
            homsets.append({"from": a, "to": b, "maps": [[cat.dump_payload(f) for f in F.maps] for F in hom]})
    return {
        "kind": "gamma",
        "backend": cat.spec(),
        "objects": [dump_chain(c) for c in gamma.chains],
        "homsets": homsets,
    }
