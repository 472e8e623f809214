import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli import cmd_check, cmd_info, cmd_registry, cmd_search, cmd_verify
from app.cli.common import EXIT_CAP, EXIT_FAILED, EXIT_USAGE
from app.core.config import settings
from app.core.errors import AlgebraError, CapExceededError, ExprSyntaxError, UnknownCheckError
from app.core.logging import setup_logging

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """建立並回傳 CLI 主 parser。"""
    parser = argparse.ArgumentParser(
        prog="nilary",
        description="有限群環理想性質的驗證引擎",
    )
    parser.add_argument("--log-level", default=None, help="override NILARY_LOG_LEVEL")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.engine_version}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    cmd_check.register(subparsers)
    cmd_verify.register(subparsers)
    cmd_search.register(subparsers)
    cmd_info.register(subparsers)
    cmd_registry.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except ExprSyntaxError as e:
        logger.error("Parse error: %s", e)
        return EXIT_USAGE
    except (ValidationError, UnknownCheckError, FileNotFoundError, KeyError, ValueError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE
    except CapExceededError as e:
        logger.error("Cap exceeded: %s", e)
        return EXIT_CAP
    except AlgebraError as e:
        logger.error("Engine error: %s", e, exc_info=True)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
