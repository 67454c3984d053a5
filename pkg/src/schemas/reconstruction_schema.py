from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Literal, Optional, Union

class FusionConfig(BaseModel):
    """Knobs of the interpolation + curvelet fusion pipeline."""
    cutoff_scale: Union[Literal["auto"], int] = Field(
        default="auto", description="Last scale index taken from the interpolated band"
    )
    gaussian_sigma_frac: Optional[float] = Field(
        default=0.5, description="Window sigma as a fraction of the low-resolution vertical Nyquist; null disables"
    )
    equalization: bool = Field(default=True, description="Map the reference onto each band before fusion")

    model_config = ConfigDict(extra="forbid")

    @field_validator("cutoff_scale")
    @classmethod
    def _check_cutoff(cls, value):
        if value != "auto" and value < 0:
            raise ValueError(f"cutoff_scale must be 'auto' or >= 0, got {value}")
        return value

    @field_validator("gaussian_sigma_frac")
    @classmethod
    def _check_sigma(cls, value):
        if value is not None and value <= 0:
            raise ValueError("gaussian_sigma_frac must be positive or null")
        return value
