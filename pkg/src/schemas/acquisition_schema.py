import math
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Optional, Tuple

class SamplingSpec(BaseModel):
    """Interleaved-row sampling pattern over a rectangular scan region."""
    dx_um: float = Field(default=0.5, gt=0, description="x pixel spacing (fast axis)")
    dy_um: float = Field(default=5.0, gt=0, description="y row spacing (slow axis)")
    region_width_um: float = Field(default=1500.0, gt=0)
    region_height_um: float = Field(default=1500.0, gt=0)

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_ratio(self) -> "SamplingSpec":
        if self.dy_um < self.dx_um:
            raise ValueError(f"dy_um ({self.dy_um}) must be >= dx_um ({self.dx_um})")
        ratio = self.dy_um / self.dx_um
        if not math.isclose(ratio, round(ratio), rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError(f"dy_um must be an integer multiple of dx_um, got ratio {ratio:g}")
        return self

    @property
    def factor(self) -> int:
        return int(round(self.dy_um / self.dx_um))

class TimeModel(BaseModel):
    """Row-dominated raster scan timing."""
    seconds_per_row: float = Field(default=1.8, gt=0)
    fixed_overhead_s: float = Field(default=0.0, ge=0)

    model_config = ConfigDict(extra="forbid")

class ProtocolTime(BaseModel):
    """Modeled minutes for a full-resolution versus a sparse multi-band protocol."""
    n_bands: int
    n_reference_bands: int
    full_minutes: float
    sparse_minutes: float
    speedup: float
    data_fraction: float

class GaussianPeak(BaseModel):
    """One Gaussian absorbance peak of a class signature."""
    center_cm1: float = Field(..., gt=0)
    width_cm1: float = Field(..., gt=0)
    amplitude: float

    model_config = ConfigDict(extra="forbid")

class ClassSignature(BaseModel):
    """Spectral signature and spatial layout of one tissue class in a phantom."""
    code: int = Field(..., ge=1, le=3, description="TissueClass code")
    peaks: List[GaussianPeak] = Field(..., min_length=1)
    blob_count: int = Field(default=6, ge=1)
    radius_range_px: Tuple[float, float] = Field(default=(12.0, 28.0))

    model_config = ConfigDict(extra="forbid")

    @field_validator("radius_range_px")
    @classmethod
    def _check_radius(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        low, high = value
        if not (0 < low <= high):
            raise ValueError(f"radius_range_px must satisfy 0 < min <= max, got {value}")
        return value

class PhantomSpec(BaseModel):
    """Labeled synthetic hyperspectral phantom."""
    seed: int = Field(default=0, ge=0)
    width: int = Field(default=256, ge=1)
    height: int = Field(default=256, ge=1)
    dx_um: float = Field(default=0.5, gt=0)
    wavenumbers: List[float] = Field(..., min_length=1)
    classes: List[ClassSignature] = Field(default_factory=list)
    background_level: float = Field(default=0.02, ge=0, description="Constant unlabeled absorbance")
    noise_sigma: float = Field(default=0.0, ge=0)
    texture_scale: Optional[float] = Field(default=8.0, description="Texture correlation length in pixels; None disables")
    texture_strength: float = Field(default=0.15, ge=0, lt=1)

    model_config = ConfigDict(extra="forbid")

    @field_validator("wavenumbers")
    @classmethod
    def _check_wavenumbers(cls, value: List[float]) -> List[float]:
        if any(w <= 0 for w in value):
            raise ValueError("wavenumbers must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("wavenumbers must be strictly increasing")
        return value

    @field_validator("texture_scale")
    @classmethod
    def _check_texture(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and value <= 0:
            raise ValueError("texture_scale must be positive or null")
        return value

    @model_validator(mode="after")
    def _check_classes(self) -> "PhantomSpec":
        codes = [c.code for c in self.classes]
        if len(set(codes)) != len(codes):
            raise ValueError(f"Duplicate class codes in phantom spec: {codes}")
        return self
