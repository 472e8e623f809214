import argparse
import logging

from app.cli.common import EXIT_FAILED, EXIT_OK, add_common_flags, emit, parse_bool, run_settings
from app.dsl.parser import canonical
from app.models.enums import IdealProperty
from app.services.ideal_service import evaluate_property
from app.storage.file_storage import get_storage

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("check", help="decide an ideal property on one ring")
    p.add_argument("expr", help='ring expression, e.g. "Z3[C6]"')
    p.add_argument("--property", required=True, choices=[v.value for v in IdealProperty])
    p.add_argument("--ideal", help="comma-separated generator labels or #ids (default: the zero ideal)")
    p.add_argument("--expect", type=parse_bool, help="exit 1 unless the value equals this")
    p.add_argument("--oracle", action="store_true", help="cross-check against the all-ideals oracle")
    add_common_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_settings(args)
    expr = canonical(args.expr)
    prop = IdealProperty(args.property)

    payload = None
    storage = get_storage(args.cache) if args.cache else None
    key = None
    if storage is not None and not args.timing:
        item = f"{prop.value}|{args.ideal or ''}|oracle={args.oracle}"
        key = storage.make_key("property", expr, item, cfg)
        payload = storage.load("property", key, cfg)
        if payload is not None:
            logger.info("Cache hit for %s %s", expr, prop.value)

    if payload is None:
        report = evaluate_property(expr, prop, args.ideal, cfg, oracle=args.oracle, timing=args.timing)
        payload = report.model_dump(mode="json", exclude_none=True)
        if storage is not None and key is not None:
            storage.store("property", key, payload, cfg)

    emit(payload, args.out)
    if args.expect is not None and payload["value"] != args.expect:
        logger.error("%s on %s is %s, expected %s", prop.value, expr, payload["value"], args.expect)
        return EXIT_FAILED
    return EXIT_OK
