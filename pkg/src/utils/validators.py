from pathlib import Path
from typing import Tuple, Union

from src.core.exceptions import CubeFormatError, ShapeMismatchError
from src.core.logging import logger

# Sidecar layout: <stem>.json header next to <stem>.raw raster
HEADER_SUFFIX = ".json"
RASTER_SUFFIX = ".raw"

def resolve_stem(path: Union[str, Path]) -> Path:
    """
    Normalize a cube location to its extension-less stem.

    Args:
        path: Header path, raster path, or bare stem.

    Returns:
        The stem shared by the ``.json`` header and ``.raw`` raster.

    Raises:
        CubeFormatError: If the path carries an unrelated extension.
    """
    path = Path(path)
    if path.suffix in (HEADER_SUFFIX, RASTER_SUFFIX):
        return path.with_suffix("")
    if path.suffix:
        logger.warning(f"Unsupported cube file extension: {path.suffix} for {path}")
        raise CubeFormatError(f"Unsupported cube file extension: {path.suffix}")
    return path

def sidecar_paths(path: Union[str, Path]) -> Tuple[Path, Path]:
    """Return the (header, raster) pair for a cube location."""
    stem = resolve_stem(path)
    return stem.with_suffix(HEADER_SUFFIX), stem.with_suffix(RASTER_SUFFIX)

def validate_same_shape(a, b, what: str = "images") -> None:
    """
    Ensure two rasters share dimensions.

    Raises:
        ShapeMismatchError: If the (height, width) pairs differ.
    """
    if a.shape != b.shape:
        logger.warning(f"Shape mismatch between {what}: {a.shape} vs {b.shape}")
        raise ShapeMismatchError(f"Shape mismatch between {what}: {a.shape} vs {b.shape}")

def validate_factor(r: int, height: int) -> int:
    """
    Validate an undersampling factor against an image height.

    Raises:
        ValueError: If r < 1 or r exceeds the height.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"Undersampling factor must be a positive integer, got {r}")
    if r > height:
        raise ValueError(f"Undersampling factor {r} exceeds image height {height}")
    return int(r)
