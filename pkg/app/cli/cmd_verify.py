import argparse
import hashlib
import json
import logging
import sys

from app.cli.common import EXIT_CAP, EXIT_FAILED, EXIT_OK, add_common_flags, emit, run_settings
from app.models.enums import Verdict
from app.models.schemas import GridResult, GridSpec
from app.services.grid_service import grid_settings, load_grid, resolve_ids, run_grid, summarize, summary_table
from app.services.theorem_service import run_check
from app.storage.file_storage import get_storage

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("verify", help="run registered theorem checks over a grid")
    p.add_argument("ids", nargs="*", help="check ids (comma-separated allowed); default: the grid's list or all")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", help="grid file (JSON GridSpec)")
    src.add_argument("--instance", action="append", help="a single ring expression (repeatable)")
    p.add_argument("--subgroup", help="restrict subgroup-quantified checks to the subgroup generated by these labels")
    p.add_argument("--ideal", help="restrict ideal-quantified checks to this ideal")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--keep-going", action="store_true", help="do not stop at the first refutation")
    p.add_argument("--table", action="store_true", help="print the per-check summary table on stderr")
    add_common_flags(p)
    p.set_defaults(handler=run)


def _split_ids(raw):
    return [part.strip() for item in raw for part in item.split(",") if part.strip()]


def run(args: argparse.Namespace) -> int:
    cfg = run_settings(args)
    grid = load_grid(args.grid) if args.grid else GridSpec(exprs=args.instance)
    ids = resolve_ids(_split_ids(args.ids), grid)

    if args.subgroup or args.ideal:
        # 指定子群 / 理想時逐一執行，不經 worker pool
        cfg = grid_settings(grid, cfg)
        reports = [
            run_check(check_id, expr, args.subgroup, args.ideal, cfg, timing=args.timing)
            for expr in grid.exprs
            for check_id in ids
        ]
        summary, per_check = summarize(reports)
        result = GridResult(reports=reports, summary=summary, per_check=per_check)
        payload = result.model_dump(mode="json", exclude_none=True)
    else:
        payload = _cached_grid(args, grid, ids, cfg)

    emit(payload, args.out)
    result = GridResult.model_validate(payload)
    if args.table:
        sys.stderr.write(summary_table(result) + "\n")

    if result.summary.refuted:
        return EXIT_FAILED
    if result.summary.undecided:
        return EXIT_CAP
    return EXIT_OK


def _cached_grid(args, grid: GridSpec, ids, cfg):
    storage = get_storage(args.cache) if args.cache and not args.timing else None
    key = None
    if storage is not None:
        digest = hashlib.sha256(grid.model_dump_json().encode("utf-8")).hexdigest()
        key = storage.make_key("grid", digest, json.dumps(ids) + f"|keep_going={args.keep_going}", cfg)
        hit = storage.load("grid", key, cfg)
        if hit is not None:
            logger.info("Cache hit for grid %s", digest[:12])
            return hit

    result = run_grid(ids, grid, cfg, jobs=args.jobs, keep_going=args.keep_going, timing=args.timing)
    payload = result.model_dump(mode="json", exclude_none=True)
    if storage is not None and key is not None and not any(
        r.verdict == Verdict.undecided_cap for r in result.reports
    ):
        storage.store("grid", key, payload, cfg)
    return payload
