import argparse
import logging
import sys
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

from cbtool import __version__
from cbtool.bundle import ChainBundle
from cbtool.bundle import ChainBundleMap
from cbtool.bundle import factorize_map
from cbtool.bundle import identity_map
from cbtool.bundle import is_subchain_bundle
from cbtool.bundle import MapFactorization
from cbtool.bundle import NotFull
from cbtool.bundle import product_bundle
from cbtool.bundle import ProductBundle
from cbtool.bundle import validate_chain_bundle_map
from cbtool.bundle import VertexNotFactorizable
from cbtool.category import CategoryError
from cbtool.category import InfiniteHomset
from cbtool.category import ProductsUnsupported
from cbtool.category import SearchSpaceTooLarge
from cbtool.category import ValidationReport
from cbtool.chains import AmbiguousChoice
from cbtool.chains import BoundaryCondition
from cbtool.chains import build_gamma
from cbtool.chains import extract_chains
from cbtool.chains import extract_complexes
from cbtool.chains import InclusionsOnly
from cbtool.chains import Selector
from cbtool.command_parse import CommandParser
from cbtool.command_parse import CommandParserError
from cbtool.command_parse import CommandParserHelp
from cbtool.config import ConfigError
from cbtool.config import load_config
from cbtool.config import resolve_bound
from cbtool.document import DocumentError
from cbtool.document import dump_chains
from cbtool.document import dump_factorization
from cbtool.document import dump_gamma
from cbtool.document import dump_product
from cbtool.document import dump_report
from cbtool.document import dump_subchain
from cbtool.document import load_file
from cbtool.document import render
from cbtool.document import Workspace
from cbtool.fingrp import AmbientTooLarge
from cbtool.presented import PresentedCategory
from cbtool.presented import validate_category_axioms
from cbtool.report import format_chains
from cbtool.report import format_factorization
from cbtool.report import format_gamma
from cbtool.report import format_product
from cbtool.report import format_report
from cbtool.report import format_subchain

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_UNSUPPORTED = 3

UNSUPPORTED = (
    ProductsUnsupported,
    InfiniteHomset,
    SearchSpaceTooLarge,
    AmbientTooLarge,
    NotFull,
    VertexNotFactorizable,
)

Outcome = Tuple[int, str]


class Context:
    def __init__(self, args: argparse.Namespace, config: Dict[str, Any], bound: int):
        self.args = args
        self.config = config
        self.bound = bound

    @property
    def machine(self) -> bool:
        return self.args.format == "machine"

    def load(self, path: str) -> Any:
        return load_file(path, self.config["ambient_order"])

    def bundle(self, path: str) -> ChainBundle:
        bundle = self.load(path)
        if not isinstance(bundle, ChainBundle):
            raise DocumentError(f"{path} is not a bundle document")
        return bundle

    def selector(self, spec: str) -> Selector:
        if spec == "inclusions":
            return InclusionsOnly()
        if spec == "boundary":
            return BoundaryCondition()
        selector = self.load(spec)
        if not isinstance(selector, Selector):
            raise DocumentError(f"{spec} is not a selector document")
        return selector


def cmd_check(ctx: Context) -> Outcome:
    entity = ctx.load(ctx.args.document)
    report = ValidationReport()
    scope = ctx.config["family_scope"]

    def check_one(item: Any, prefix: Optional[str] = None) -> bool:
        if isinstance(item, PresentedCategory):
            report.extend(validate_category_axioms(item), prefix)
        elif isinstance(item, ChainBundleMap):
            report.extend(validate_chain_bundle_map(item, scope=scope), prefix)
        elif isinstance(item, ChainBundle):
            report.extend(validate_chain_bundle_map(identity_map(item), scope=scope), prefix)
        elif isinstance(item, MapFactorization):
            for part in (item.epi, item.inclusion):
                report.extend(validate_chain_bundle_map(part, scope=scope), prefix)
        elif isinstance(item, ProductBundle):
            for part in (item.left, item.right):
                report.extend(validate_chain_bundle_map(part, scope=scope), prefix)
        else:
            return False
        return True

    if isinstance(entity, Workspace):
        for name, item in entity.load_all().items():
            check_one(item, name)
    elif not check_one(entity):
        raise DocumentError(f"{ctx.args.document}: this document kind cannot be checked")

    text = render(dump_report(report)) if ctx.machine else format_report(report)
    return (EXIT_OK if report.valid else EXIT_FAILED), text


def cmd_subchain(ctx: Context) -> Outcome:
    verdict = is_subchain_bundle(ctx.bundle(ctx.args.small), ctx.bundle(ctx.args.big), ctx.args.strict_corestriction)
    text = render(dump_subchain(verdict)) if ctx.machine else format_subchain(verdict)
    return (EXIT_OK if verdict.holds else EXIT_FAILED), text


def cmd_factorize(ctx: Context) -> Outcome:
    F = ctx.load(ctx.args.map)
    if not isinstance(F, ChainBundleMap):
        raise DocumentError(f"{ctx.args.map} is not a map document")
    fact = factorize_map(F)
    return EXIT_OK, render(dump_factorization(fact)) if ctx.machine else format_factorization(fact)


def cmd_chains(ctx: Context) -> Outcome:
    bundle = ctx.bundle(ctx.args.bundle)
    try:
        chains = extract_chains(bundle, ctx.selector(ctx.args.selector), ctx.bound)
    except AmbiguousChoice as e:
        return EXIT_FAILED, str(e)
    return EXIT_OK, render(dump_chains(bundle.backend, chains)) if ctx.machine else format_chains(chains)


def cmd_product(ctx: Context) -> Outcome:
    prod = product_bundle(ctx.bundle(ctx.args.left), ctx.bundle(ctx.args.right))
    return EXIT_OK, render(dump_product(prod)) if ctx.machine else format_product(prod)


def cmd_complexes(ctx: Context) -> Outcome:
    bundle = ctx.bundle(ctx.args.bundle)
    complexes = extract_complexes(bundle, ctx.bound)
    return EXIT_OK, render(dump_chains(bundle.backend, complexes)) if ctx.machine else format_chains(complexes)


def cmd_gamma(ctx: Context) -> Outcome:
    bundles = [ctx.bundle(path) for path in ctx.args.bundles]
    try:
        gamma = build_gamma(bundles, ctx.selector(ctx.args.selector), ctx.config["candidate_bound"], ctx.bound)
    except AmbiguousChoice as e:
        return EXIT_FAILED, str(e)
    return EXIT_OK, render(dump_gamma(gamma)) if ctx.machine else format_gamma(gamma)


COMMANDS: Dict[str, Callable[[Context], Outcome]] = {
    "check": cmd_check,
    "subchain": cmd_subchain,
    "factorize": cmd_factorize,
    "chains": cmd_chains,
    "product": cmd_product,
    "complexes": cmd_complexes,
    "gamma": cmd_gamma,
}


def build_parser() -> CommandParser:
    parser = CommandParser(prog="cbtool", description=f"chain bundle toolkit (v{__version__})")
    parser.add_argument(
        "-v", "--verbose", help="logging verbosity level: once is info, twice is debug", action="count", default=0
    )
    parser.add_argument("-c", "--config", help="YAML file with enumeration limits")
    parser.add_argument("--format", choices=["human", "machine"], default="human", help="output format")
    parser.add_argument(
        "--strict-corestriction", action="store_true", help="also require every restricted morphism to be epi"
    )
    parser.add_argument("--bound", type=int, help="enumeration bound (default: $CBTOOL_BOUND, config, 4096)")
    parser.add_argument("--version", action="store_true", help="show version", default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command")

    cmd = sub.add_parser("check", help="validate a category, bundle, map, factorization, product or workspace document")
    cmd.add_argument("document", help="document path")

    cmd = sub.add_parser("subchain", help="decide whether SMALL is a subchain bundle of BIG")
    cmd.add_argument("small", help="bundle document path")
    cmd.add_argument("big", help="bundle document path")

    cmd = sub.add_parser("factorize", help="factorize a full map through its levelwise images")
    cmd.add_argument("map", help="map document path")

    cmd = sub.add_parser("chains", help="split a bundle into chains")
    cmd.add_argument("bundle", help="bundle document path")
    cmd.add_argument("selector", nargs="?", default="inclusions", help="inclusions, boundary or a selector document path")

    cmd = sub.add_parser("product", help="levelwise product of two bundles")
    cmd.add_argument("left", help="bundle document path")
    cmd.add_argument("right", help="bundle document path")

    cmd = sub.add_parser("complexes", help="enumerate selections whose consecutive composites vanish")
    cmd.add_argument("bundle", help="bundle document path")

    cmd = sub.add_parser("gamma", help="chains of several bundles with all chain maps between them")
    cmd.add_argument("bundles", nargs="+", help="bundle document paths")
    cmd.add_argument("--selector", default="inclusions", help="inclusions, boundary or a selector document path")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CommandParserHelp as e:
        print(str(e))
        return EXIT_OK
    except CommandParserError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID

    logging_level = logging.WARNING
    if args.verbose > 0:
        logging_level = logging.INFO
        if args.verbose > 1:
            logging_level = logging.DEBUG

    logging.basicConfig(stream=sys.stderr, level=logging_level)
    logging.getLogger().setLevel(logging_level)

    if "version" in args:
        print(__version__)
        return EXIT_OK

    if args.command is None:
        print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_INVALID

    try:
        config = load_config(args.config)
        ctx = Context(args, config, resolve_bound(args.bound, config))
        code, text = COMMANDS[args.command](ctx)
    except (DocumentError, ConfigError) as e:
        logging.error(str(e))
        return EXIT_INVALID
    except UNSUPPORTED as e:
        logging.error(f"unsupported: {e}")
        return EXIT_UNSUPPORTED
    except CategoryError as e:
        logging.error(str(e))
        return EXIT_INVALID

    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
