import argparse

from app.cli.common import EXIT_OK, add_common_flags, emit, run_settings
from app.models.schemas import RingDump, RingInfo
from app.rings.builder import make_ring
from app.rings.finite_ring import dump_ring
from app.services.group_ring_service import ring_info


def register(subparsers) -> None:
    p = subparsers.add_parser("info", help="sizes, characteristic, radicals and Δ-ideals of a ring")
    p.add_argument("expr")
    p.add_argument("--dump", action="store_true", help="print the canonical ring document (with tables) instead")
    add_common_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_settings(args)
    R = make_ring(args.expr, cfg)
    if args.dump:
        doc = RingDump(**dump_ring(R, cfg))
    else:
        doc = RingInfo(**ring_info(R, cfg))
    emit(doc.model_dump(mode="json", exclude_none=True), args.out)
    return EXIT_OK
