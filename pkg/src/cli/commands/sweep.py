from src.cli.context import RunContext
from src.services.evaluation_service import SweepService
from src.services.export_service import sweep_svg
from src.services.phantom_service import generate_phantom


async def run(ctx: RunContext) -> None:
    """Score reconstructions across the configured factors and plot mean +/- std."""
    cfg = ctx.config
    source, _ = ctx.load_source()
    cubes = [source]
    if cfg.input is None:
        cubes += [generate_phantom(ctx.phantom_spec(core))[0] for core in range(1, cfg.n_cores)]

    report = await SweepService().spacing_sweep(
        cubes, cfg.reference_wavenumber_cm1, cfg.factors, cfg.fusion, cfg.ssim
    )
    ctx.reports.write_sweep_csv(report, ctx.layout.reports / "sweep.csv")
    ctx.reports.write_json(report, ctx.layout.reports / "sweep.json")
    sweep_svg(report, ctx.layout.plots / "sweep.svg")
    for agg in report.aggregates:
        print(
            f"sweep: r={agg.r:<3d} dy={agg.dy_um:g} um  mse {agg.mse_mean:.4g} +/- {agg.mse_std:.2g}  "
            f"ssim {agg.ssim_mean:.4f} +/- {agg.ssim_std:.4f}"
        )


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("sweep", parents=parents, help="Reconstruction accuracy vs row spacing")
    parser.set_defaults(handler=run)
