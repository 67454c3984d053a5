import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from src.core.exceptions import CubeFormatError, InvalidImageError
from src.core.logging import logger
from src.models.image_model import HyperCube, LabelMap
from src.schemas.cube_schema import CubeHeader
from src.utils.validators import sidecar_paths

PathLike = Union[str, Path]

class CubeRepository:
    """File persistence for cubes and label maps (JSON header + raw BSQ raster)."""

    def load_cube(self, path: PathLike) -> HyperCube:
        """
        Read a float32 band-sequential cube.

        Args:
            path: Header path, raster path or shared stem.

        Returns:
            The cube, with float32 pixels exactly as stored.

        Raises:
            CubeFormatError: Missing files, header/raster size mismatch,
                non-finite values, or unsupported dtype/interleave.
        """
        header, raster = self._read(path, expected_dtype="f32le")
        data = np.frombuffer(raster, dtype="<f4").reshape(header.bands, header.height, header.width)
        if not np.all(np.isfinite(data)):
            logger.warning(f"Non-finite values in raster {path}")
            raise CubeFormatError(f"Raster {path} contains NaN or Inf values")
        cube = HyperCube.from_array(
            data.astype(np.float32),
            wavenumbers=header.wavenumbers_cm1,
            dx_um=header.pixel_dx_um,
            dy_um=header.pixel_dy_um,
        )
        logger.info(f"Loaded cube {path}: {header.bands} bands of {header.width}x{header.height}")
        return cube

    def save_cube(self, cube: HyperCube, path: PathLike, provenance: Optional[Dict[str, Any]] = None) -> None:
        """
        Write a cube as ``<stem>.json`` + ``<stem>.raw`` (little-endian float32, BSQ).

        Values are stored as float32; a float32 cube round-trips bit-exactly.
        ``provenance`` is stored in the header for ``read_provenance``.
        """
        if not isinstance(cube, HyperCube):
            raise InvalidImageError("save_cube expects a HyperCube")
        header = CubeHeader(
            width=cube.width,
            height=cube.height,
            bands=cube.n_bands,
            dtype="f32le",
            interleave="bsq",
            pixel_dx_um=cube.dx_um,
            pixel_dy_um=cube.dy_um,
            wavenumbers_cm1=list(cube.wavenumbers),
            provenance=provenance,
        )
        self._write(path, header, cube.to_array().astype("<f4").tobytes())
        logger.info(f"Saved cube {path}: {cube.n_bands} bands of {cube.width}x{cube.height}")

    def load_labels(self, path: PathLike) -> LabelMap:
        """Read a uint8 label map written by ``save_labels``."""
        header, raster = self._read(path, expected_dtype="u8")
        if header.bands != 1:
            raise CubeFormatError(f"Label map {path} must have exactly one band, header says {header.bands}")
        data = np.frombuffer(raster, dtype=np.uint8).reshape(header.height, header.width)
        try:
            return LabelMap(labels=data, dx_um=header.pixel_dx_um, dy_um=header.pixel_dy_um)
        except InvalidImageError as e:
            raise CubeFormatError(f"Label map {path}: {e}") from e

    def save_labels(self, labels: LabelMap, path: PathLike, provenance: Optional[Dict[str, Any]] = None) -> None:
        header = CubeHeader(
            width=labels.width,
            height=labels.height,
            bands=1,
            dtype="u8",
            interleave="bsq",
            pixel_dx_um=labels.dx_um,
            pixel_dy_um=labels.dy_um,
            provenance=provenance,
        )
        self._write(path, header, labels.labels.astype(np.uint8).tobytes())

    def read_provenance(self, path: PathLike) -> Optional[Dict[str, Any]]:
        """Provenance stored with a cube or label map; None when absent or unreadable."""
        header_path, _ = sidecar_paths(path)
        if not header_path.exists():
            return None
        try:
            return CubeHeader.model_validate(json.loads(header_path.read_text())).provenance
        except (json.JSONDecodeError, ValidationError) as e:
            logger.warning(f"Ignoring unreadable header {header_path}: {e}")
            return None

    def delete(self, path: PathLike) -> None:
        for sidecar in sidecar_paths(path):
            sidecar.unlink(missing_ok=True)

    def _read(self, path: PathLike, expected_dtype: str):
        header_path, raster_path = sidecar_paths(path)
        for required in (header_path, raster_path):
            if not required.exists():
                logger.warning(f"Missing cube file: {required}")
                raise CubeFormatError(f"Missing file: {required}")
        try:
            header = CubeHeader.model_validate(json.loads(header_path.read_text()))
        except (json.JSONDecodeError, ValidationError) as e:
            logger.warning(f"Invalid header {header_path}: {e}")
            raise CubeFormatError(f"Invalid header {header_path}: {e}") from e
        if header.dtype != expected_dtype:
            raise CubeFormatError(f"Unsupported dtype {header.dtype!r} in {header_path}, expected {expected_dtype!r}")
        raster = raster_path.read_bytes()
        if len(raster) != header.expected_bytes:
            logger.warning(
                f"Header/raster size mismatch for {raster_path}: {len(raster)} bytes, header implies {header.expected_bytes}"
            )
            raise CubeFormatError(
                f"Raster {raster_path} holds {len(raster)} bytes but the header declares {header.expected_bytes}"
            )
        return header, raster

    def _write(self, path: PathLike, header: CubeHeader, payload: bytes) -> None:
        header_path, raster_path = sidecar_paths(path)
        try:
            header_path.parent.mkdir(parents=True, exist_ok=True)
            header_path.write_text(header.model_dump_json(indent=2, exclude_none=True))
            raster_path.write_bytes(payload)
        except OSError as e:
            logger.error(f"Failed to write {header_path}: {e}", exc_info=True)
            raise
