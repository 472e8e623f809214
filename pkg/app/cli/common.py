import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional

from app.core.config import Settings, get_settings

# 退出碼
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CAP = 3


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the JSON result to this file instead of stdout")
    parser.add_argument("--cache", metavar="DIR", help="reuse / store results in this cache directory")
    parser.add_argument("--seed", type=int, help="seed for sampled validation above the exhaustive cap")
    parser.add_argument("--timing", action="store_true", help="include runtime_ms in the output")


def run_settings(args: argparse.Namespace) -> Settings:
    cfg = get_settings()
    update = {}
    if getattr(args, "seed", None) is not None:
        update["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        update["jobs"] = args.jobs
    return cfg.model_copy(update=update) if update else cfg


def emit(payload: Any, out: Optional[str] = None) -> None:
    """結果一律是 JSON；沒有 --out 時寫到 stdout。"""
    text = json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=False)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")
