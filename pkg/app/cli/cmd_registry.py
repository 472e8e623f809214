import argparse

from app.cli.common import EXIT_OK, emit
from app.services.theorem_service import list_registry


def register(subparsers) -> None:
    p = subparsers.add_parser("registry", help="list the registered theorem checks")
    p.add_argument("--out")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    emit([entry.model_dump(mode="json") for entry in list_registry()], args.out)
    return EXIT_OK
