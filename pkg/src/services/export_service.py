from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from PIL import Image  # noqa: E402

from src.core.logging import logger  # noqa: E402
from src.models.image_model import BandImage, LabelMap, TissueClass  # noqa: E402
from src.schemas.classifier_schema import RocCurve  # noqa: E402
from src.schemas.evaluation_schema import SweepReport  # noqa: E402

PathLike = Union[str, Path]

CLASS_PALETTE: Dict[int, Tuple[int, int, int]] = {
    int(TissueClass.UNLABELED): (0, 0, 0),
    int(TissueClass.EPITHELIUM): (255, 0, 0),
    int(TissueClass.STROMA): (0, 255, 0),
    int(TissueClass.NECROSIS): (0, 0, 255),
}

CLASS_NAMES: Dict[int, str] = {int(c): c.name.lower() for c in TissueClass}

# reproducible SVG ids and no timestamp
plt.rcParams["svg.hashsalt"] = "hsrecon"
_SVG_METADATA = {"Date": None}


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def to_uint8(pixels: np.ndarray, value_range: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """
    Linear map of [low, high] onto [0, 255], clipped.

    A degenerate range (low == high) gives mid-gray everywhere.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    low, high = value_range if value_range is not None else (float(pixels.min()), float(pixels.max()))
    if high <= low:
        return np.full(pixels.shape, 128, dtype=np.uint8)
    scaled = (pixels - low) / (high - low) * 255.0
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def export_png(band: BandImage, path: PathLike, value_range: Optional[Tuple[float, float]] = None) -> Path:
    """Write a band as an 8-bit grayscale PNG with the same dimensions."""
    path = _prepare(path)
    Image.fromarray(to_uint8(band.pixels, value_range)).save(path, format="PNG")
    return path


def class_map_rgb(labels: LabelMap) -> np.ndarray:
    palette = np.zeros((256, 3), dtype=np.uint8)
    for code, color in CLASS_PALETTE.items():
        palette[code] = color
    return palette[labels.labels]


def export_class_map_png(labels: LabelMap, path: PathLike) -> Path:
    """RGB composite: epithelium red, stroma green, necrosis blue, unlabeled black."""
    path = _prepare(path)
    Image.fromarray(class_map_rgb(labels)).save(path, format="PNG")
    return path


def export_triptych_png(
    interpolated: BandImage,
    fused: BandImage,
    truth: Optional[BandImage],
    path: PathLike,
    gap: int = 4,
) -> Path:
    """
    Side-by-side grayscale panels (interpolated | fused | truth) sharing one
    intensity range, separated by black gaps.
    """
    panels = [interpolated.pixels, fused.pixels] + ([truth.pixels] if truth is not None else [])
    low = float(min(p.min() for p in panels))
    high = float(max(p.max() for p in panels))
    height, width = fused.shape
    canvas = np.zeros((height, len(panels) * width + (len(panels) - 1) * gap), dtype=np.uint8)
    for i, pixels in enumerate(panels):
        x0 = i * (width + gap)
        canvas[:, x0:x0 + width] = to_uint8(pixels, (low, high))
    path = _prepare(path)
    Image.fromarray(canvas).save(path, format="PNG")
    return path


def sweep_svg(report: SweepReport, path: PathLike) -> Path:
    """MSE and SSIM means versus r with population-std error bars, one panel each."""
    r = [agg.r for agg in report.aggregates]
    figure, (ax_mse, ax_ssim) = plt.subplots(1, 2, figsize=(9, 3.5))
    try:
        ax_mse.errorbar(r, [a.mse_mean for a in report.aggregates], yerr=[a.mse_std for a in report.aggregates],
                        marker="o", capsize=3)
        ax_mse.set_xlabel("undersampling factor r (dy / dx)")
        ax_mse.set_ylabel("MSE")
        ax_ssim.errorbar(r, [a.ssim_mean for a in report.aggregates], yerr=[a.ssim_std for a in report.aggregates],
                         marker="o", capsize=3, color="tab:green")
        ax_ssim.set_xlabel("undersampling factor r (dy / dx)")
        ax_ssim.set_ylabel("SSIM")
        figure.suptitle(f"Reconstruction accuracy vs row spacing (reference {report.reference_wavenumber_cm1:g} cm-1)")
        figure.tight_layout()
        path = _prepare(path)
        figure.savefig(path, format="svg", metadata=_SVG_METADATA)
    finally:
        plt.close(figure)
    logger.debug(f"Wrote sweep plot to {path}")
    return path


def roc_svg(curve: RocCurve, path: PathLike) -> Path:
    """One-vs-rest ROC curve with its AUC in the legend."""
    figure, ax = plt.subplots(figsize=(4, 4))
    try:
        name = CLASS_NAMES.get(curve.class_code, str(curve.class_code))
        ax.plot(curve.fpr, curve.tpr, label=f"{name} (AUC = {curve.auc:.4f})")
        ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=0.8)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        ax.legend(loc="lower right")
        figure.tight_layout()
        path = _prepare(path)
        figure.savefig(path, format="svg", metadata=_SVG_METADATA)
    finally:
        plt.close(figure)
    return path


def confusion_rows(classes: Sequence[int], confusion: Sequence[Sequence[int]]):
    """Header and rows of a confusion matrix table, true classes down, predictions across."""
    header = ["true\\predicted"] + [CLASS_NAMES.get(c, str(c)) for c in classes]
    rows = [[CLASS_NAMES.get(c, str(c))] + list(counts) for c, counts in zip(classes, confusion)]
    return header, rows
