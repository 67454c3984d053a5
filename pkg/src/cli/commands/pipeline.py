from src.cli.commands import acquire, classify, phantom, reconstruct, sweep
from src.cli.context import RunContext


async def run(ctx: RunContext) -> None:
    """phantom -> acquire -> reconstruct -> sweep -> classify into one output tree."""
    if ctx.config.input is None:
        await phantom.run(ctx)
    for stage in (acquire, reconstruct, sweep, classify):
        await stage.run(ctx)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("pipeline", parents=parents, help="Run every stage")
    parser.set_defaults(handler=run)
