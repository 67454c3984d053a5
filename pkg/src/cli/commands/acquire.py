from src.cli.context import RunContext
from src.services.acquisition_service import acquisition_time, build_acquisition_set, protocol_time


async def run(ctx: RunContext) -> None:
    """Split the source cube into a full-resolution reference and r-decimated bands."""
    cfg = ctx.config
    cube, _ = ctx.load_source()
    acq = build_acquisition_set(cube, cfg.reference_wavenumber_cm1, cfg.factor)
    ctx.save_acquisition(acq, cube)

    full_spec = cfg.sampling.model_copy(update={"dy_um": cfg.sampling.dx_um})
    protocol = protocol_time(cfg.sampling, cfg.time_model, n_bands=cube.n_bands)
    ctx.reports.write_json(
        {
            "factor": cfg.factor,
            "reference_wavenumber_cm1": acq.reference.wavenumber_cm1,
            "sparse_wavenumbers_cm1": [b.wavenumber_cm1 for b in acq.sparse_bands],
            "minutes_per_band_full": acquisition_time(full_spec, cfg.time_model),
            "minutes_per_band_sparse": acquisition_time(cfg.sampling, cfg.time_model),
            "protocol": protocol.model_dump(),
        },
        ctx.layout.reports / "acquisition.json",
    )
    print(
        f"acquire: r={cfg.factor}, {len(acq.sparse_bands)} sparse bands, "
        f"{acquisition_time(full_spec, cfg.time_model):g} min full vs "
        f"{acquisition_time(cfg.sampling, cfg.time_model):g} min sparse per band, "
        f"data fraction {protocol.data_fraction:.1%}"
    )
    print(
        f"acquire: {protocol.n_bands}-band protocol {protocol.full_minutes:g} min full vs "
        f"{protocol.sparse_minutes:g} min sparse ({protocol.speedup:.2f}x)"
    )


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("acquire", parents=parents, help="Simulate interleaved-row acquisition")
    parser.set_defaults(handler=run)
