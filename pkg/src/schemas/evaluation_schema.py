from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Literal, Optional, Union

class SsimParams(BaseModel):
    """Structural similarity parameters (canonical Gaussian-window form)."""
    window_size: int = Field(default=11, ge=1)
    window_sigma: float = Field(default=1.5, gt=0)
    k1: float = Field(default=0.01, gt=0)
    k2: float = Field(default=0.03, gt=0)
    dynamic_range: Union[Literal["auto"], float] = "auto"

    model_config = ConfigDict(extra="forbid")

    @field_validator("window_size")
    @classmethod
    def _odd_window(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"window_size must be odd, got {value}")
        return value

    @field_validator("dynamic_range")
    @classmethod
    def _positive_range(cls, value):
        if value != "auto" and value <= 0:
            raise ValueError("dynamic_range must be 'auto' or positive")
        return value

class SweepRow(BaseModel):
    """Score of one band of one core at one undersampling factor."""
    r: int
    dy_um: float
    wavenumber_cm1: float
    mse: float = Field(..., ge=0)
    ssim: float = Field(..., ge=-1, le=1)
    core: int = 0
    dynamic_range: Optional[float] = None

class SweepAggregate(BaseModel):
    """Mean and population standard deviation across bands and cores for one r."""
    r: int
    dy_um: float
    n: int
    mse_mean: float
    mse_std: float
    ssim_mean: float
    ssim_std: float

class SweepReport(BaseModel):
    """Per-band rows sorted by (r, core, wavenumber) plus per-r aggregates."""
    reference_wavenumber_cm1: float
    rows: List[SweepRow]
    aggregates: List[SweepAggregate]

    def aggregate_for(self, r: int) -> SweepAggregate:
        for agg in self.aggregates:
            if agg.r == r:
                return agg
        raise KeyError(r)
