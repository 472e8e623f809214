import argparse

from app.cli.common import EXIT_FAILED, EXIT_OK, add_common_flags, emit, run_settings
from app.models.enums import SearchTarget
from app.services.grid_service import load_grid, search_counterexample


def register(subparsers) -> None:
    p = subparsers.add_parser("search", help="look for a counterexample to an open question")
    p.add_argument("target", choices=[t.value for t in SearchTarget])
    p.add_argument("--grid", required=True, help="grid file (JSON GridSpec)")
    add_common_flags(p)
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_settings(args)
    result = search_counterexample(SearchTarget(args.target), load_grid(args.grid), cfg)
    emit(result.model_dump(mode="json", exclude_none=True), args.out)
    # 找到反例視同失敗，方便腳本判斷
    return EXIT_FAILED if result.status == "counterexample" else EXIT_OK
