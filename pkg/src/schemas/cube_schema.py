from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Any, Dict, List, Literal, Optional

class CubeHeader(BaseModel):
    """JSON sidecar header describing a band-sequential raw raster."""
    width: int = Field(..., ge=1, description="Pixels per row")
    height: int = Field(..., ge=1, description="Rows per band")
    bands: int = Field(..., ge=1, description="Number of bands in the raster")
    dtype: Literal["f32le", "u8"] = Field(..., description="Little-endian float32 cube or uint8 label map")
    interleave: Literal["bsq"] = Field(default="bsq", description="Band-sequential layout")
    pixel_dx_um: float = Field(..., gt=0, description="x pixel spacing in micrometers")
    pixel_dy_um: float = Field(..., gt=0, description="y pixel spacing in micrometers")
    wavenumbers_cm1: Optional[List[float]] = Field(default=None, description="Band positions, cubes only")
    provenance: Optional[Dict[str, Any]] = Field(default=None, description="Config the raster was derived from")

    model_config = ConfigDict(extra="ignore")

    @model_validator(mode="after")
    def _check_wavenumbers(self) -> "CubeHeader":
        if self.dtype == "f32le":
            if self.wavenumbers_cm1 is None or len(self.wavenumbers_cm1) != self.bands:
                raise ValueError("f32le headers must list one wavenumber per band")
        return self

    @property
    def item_size(self) -> int:
        return 4 if self.dtype == "f32le" else 1

    @property
    def expected_bytes(self) -> int:
        return self.width * self.height * self.bands * self.item_size
