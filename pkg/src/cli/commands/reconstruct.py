from src.cli.context import RunContext
from src.models.image_model import HyperCube
from src.services.acquisition_service import build_acquisition_set
from src.services.export_service import export_triptych_png
from src.services.reconstruction_service import ReconstructionService


async def run(ctx: RunContext) -> None:
    """
    Decimate the source cube at the configured factor, reconstruct every sparse
    band and emit one interpolated | fused | truth triptych per band.
    """
    cfg = ctx.config
    truth, _ = ctx.load_source()
    acq = build_acquisition_set(truth, cfg.reference_wavenumber_cm1, cfg.factor)

    results = await ReconstructionService().reconstruct_bands(acq, cfg.fusion)
    cube = HyperCube(tuple(sorted([acq.reference] + [r.fused for r in results], key=lambda b: b.wavenumber_cm1)))
    ctx.save_reconstruction(cube, truth)

    for result in results:
        wavenumber = result.fused.wavenumber_cm1
        path = ctx.layout.plots / f"triptych_{wavenumber:g}.png"
        export_triptych_png(result.interpolated, result.fused, truth.band_at(wavenumber), path)
    print(f"reconstruct: {len(results)} bands fused into a {cube.n_bands}-band {cube.width}x{cube.height} cube")


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("reconstruct", parents=parents, help="Interpolate and fuse sparse bands")
    parser.set_defaults(handler=run)
