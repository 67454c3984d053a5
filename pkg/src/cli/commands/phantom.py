from src.cli.context import RunContext
from src.core.logging import logger
from src.services.phantom_service import generate_phantom


async def run(ctx: RunContext) -> None:
    """Generate the configured phantom and write cube + label map."""
    spec = ctx.phantom_spec()
    cube, labels = generate_phantom(spec)
    ctx.save_phantom(cube, labels, spec)
    logger.info(f"Phantom written to {ctx.layout.cubes}")
    print(
        f"phantom: {cube.width}x{cube.height} px, {cube.n_bands} bands "
        f"({cube.wavenumbers[0]:g}-{cube.wavenumbers[-1]:g} cm-1), classes {list(labels.classes_present())}"
    )


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("phantom", parents=parents, help="Generate a labeled synthetic cube")
    parser.set_defaults(handler=run)
