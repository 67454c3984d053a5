import argparse

from src.cli.commands import acquire, classify, phantom, pipeline, reconstruct, sweep
from src.cli.context import parse_cutoff, parse_factors
from src.core.config import settings

COMMANDS = (phantom, acquire, reconstruct, sweep, classify, pipeline)


def common_options() -> argparse.ArgumentParser:
    """Flags every subcommand accepts; they override the JSON config."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="Pipeline config JSON")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--seed", type=int, help="Global seed")
    parser.add_argument("--factors", type=parse_factors, help="Sweep factors, e.g. 2,10,40")
    parser.add_argument("--reference-wavenumber", type=float, help="Full-resolution band in cm-1")
    parser.add_argument("--cutoff", type=parse_cutoff, help="Fusion cutoff scale: auto or an integer")
    parser.add_argument("--log-level", help="Logger level override")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsrecon", description=f"{settings.PROJECT_NAME} {settings.VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [common_options()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser
