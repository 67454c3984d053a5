import numpy as np

from src.cli.context import RunContext
from src.core.exceptions import ConfigError
from src.core.logging import logger
from src.models.forest_model import ForestModel
from src.models.image_model import HyperCube
from src.services.acquisition_service import build_acquisition_set
from src.services.classifier_service import ClassifierService, classify_cube, evaluate, summarize_split
from src.services.export_service import CLASS_NAMES, confusion_rows, export_class_map_png, roc_svg
from src.services.reconstruction_service import ReconstructionService


def check_model_fits(model: ForestModel, cube: HyperCube) -> None:
    """
    Raises:
        ConfigError: The forest was trained on a different band layout.
    """
    if model.n_features != cube.n_bands:
        raise ConfigError(f"Saved forest expects {model.n_features} bands, the cube has {cube.n_bands}")
    if model.wavenumbers and not np.allclose(model.wavenumbers, cube.wavenumbers):
        raise ConfigError("Saved forest was trained on different wavenumbers than the cube")


async def run(ctx: RunContext) -> None:
    """
    Train on the left half, test on the right half with ground-truth spectra and
    with spectra reconstructed at the configured factor.

    The reconstructed cube written by ``reconstruct`` is reused when it was
    derived from the same source and config. With ``model_path`` set, the saved
    forest is evaluated instead of training a new one.
    """
    cfg = ctx.config
    cube, labels = ctx.load_source()
    if labels is None:
        raise ConfigError("classify needs a label map: set input.labels or use a phantom")

    service = ClassifierService()
    if cfg.model_path is not None:
        model = ctx.models.load_model(cfg.model_path)
        check_model_fits(model, cube)
        logger.info(f"Evaluating saved forest {cfg.model_path} ({model.n_trees} trees)")
    else:
        model = await service.train_on_half(cube, labels, cfg.train)
        ctx.models.save_model(model, ctx.layout.models / "forest.json")

    reconstructed = ctx.load_reconstruction(cube)
    if reconstructed is None:
        acq = build_acquisition_set(cube, cfg.reference_wavenumber_cm1, cfg.factor)
        fused = await ReconstructionService().reconstruct_set(acq, cfg.fusion)
        # same float32 values a stored reconstruction carries
        reconstructed = HyperCube.from_array(fused.to_array(np.float32), fused.wavenumbers, fused.dx_um, fused.dy_um)

    truth_report = evaluate(model, service.test_dataset(cube, labels))
    recon_report = evaluate(model, service.test_dataset(reconstructed, labels))
    metrics = {
        "split": summarize_split(labels).model_dump(),
        "ground_truth": truth_report.model_dump(),
        "reconstructed": recon_report.model_dump(),
        "accuracy_gap": truth_report.overall_accuracy - recon_report.overall_accuracy,
    }
    if cfg.repeats > 1:
        repeated = await service.repeated_evaluation(cube, labels, cfg.train, cfg.repeats)
        metrics["repeated"] = repeated.model_dump(exclude={"reports"})
    ctx.reports.write_json(metrics, ctx.layout.reports / "metrics.json")

    for name, report in (("truth", truth_report), ("reconstructed", recon_report)):
        header, rows = confusion_rows(report.classes, report.confusion)
        ctx.reports.write_table_csv(header, rows, ctx.layout.reports / f"confusion_{name}.csv")
    for curve in truth_report.roc:
        roc_svg(curve, ctx.layout.plots / f"roc_{CLASS_NAMES[curve.class_code]}.svg")
    for curve in recon_report.roc:
        roc_svg(curve, ctx.layout.plots / f"roc_{CLASS_NAMES[curve.class_code]}_reconstructed.svg")

    export_class_map_png(labels, ctx.layout.plots / "class_map_labels.png")
    export_class_map_png(classify_cube(model, cube), ctx.layout.plots / "class_map_truth.png")
    export_class_map_png(classify_cube(model, reconstructed), ctx.layout.plots / "class_map_reconstructed.png")

    logger.info(f"Classification outputs written under {ctx.layout.root}")
    print(
        f"classify: overall accuracy {truth_report.overall_accuracy:.4f} on ground truth, "
        f"{recon_report.overall_accuracy:.4f} on r={cfg.factor} reconstruction"
    )


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("classify", parents=parents, help="Random forest train/test on label halves")
    parser.add_argument("--model", dest="model_path", help="Evaluate this saved forest JSON instead of training")
    parser.set_defaults(handler=run)
