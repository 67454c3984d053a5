from pathlib import Path
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Optional

from src.core.config import settings
from src.schemas.acquisition_schema import PhantomSpec, SamplingSpec, TimeModel
from src.schemas.classifier_schema import TrainConfig
from src.schemas.evaluation_schema import SsimParams
from src.schemas.reconstruction_schema import FusionConfig

class InputSpec(BaseModel):
    """On-disk cube (and optional label map) replacing the phantom."""
    cube: str = Field(..., description="Cube header path (.json) or stem")
    labels: Optional[str] = Field(default=None, description="Label map header path (.json) or stem")

    model_config = ConfigDict(extra="forbid")

    @field_validator("cube", "labels")
    @classmethod
    def _must_exist(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        stem = Path(value)
        header = stem if stem.suffix == ".json" else stem.with_suffix(".json")
        if not header.exists():
            raise ValueError(f"Referenced file does not exist: {header}")
        return value

class PipelineConfig(BaseModel):
    """Everything one CLI invocation needs; echoed to <out>/config.json."""
    seed: int = Field(..., ge=0, description="Global seed, propagated to the phantom and the forest")
    input: Optional[InputSpec] = None
    phantom: Optional[PhantomSpec] = None
    phantom_width: int = Field(default=256, ge=32)
    phantom_height: int = Field(default=256, ge=32)
    n_cores: int = Field(default=1, ge=1, description="Phantom cores scored by the sweep")
    reference_wavenumber_cm1: float = Field(default=settings.REFERENCE_WAVENUMBER_CM1, gt=0)
    sampling: SamplingSpec = Field(default_factory=SamplingSpec)
    time_model: TimeModel = Field(default_factory=lambda: TimeModel(seconds_per_row=settings.SECONDS_PER_ROW))
    factors: List[int] = Field(default_factory=lambda: [1, 2, 4, 6, 10, 20, 40], min_length=1)
    fusion: FusionConfig = Field(default_factory=FusionConfig)
    ssim: SsimParams = Field(default_factory=SsimParams)
    train: TrainConfig = Field(default_factory=TrainConfig)
    repeats: int = Field(default=1, ge=1, description="Training repetitions with derived seeds")
    model_path: Optional[str] = Field(default=None, description="Saved forest JSON that classify evaluates instead of training")
    output_dir: str = settings.OUTPUT_DIR

    model_config = ConfigDict(extra="forbid")

    @field_validator("model_path")
    @classmethod
    def _model_exists(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and not Path(value).exists():
            raise ValueError(f"Referenced file does not exist: {value}")
        return value

    @field_validator("factors")
    @classmethod
    def _positive_factors(cls, value: List[int]) -> List[int]:
        if any(r < 1 for r in value):
            raise ValueError(f"Sampling factors must be >= 1, got {value}")
        return sorted(set(value))

    @model_validator(mode="after")
    def _propagate_seed(self) -> "PipelineConfig":
        if self.phantom is not None and self.phantom.seed != self.seed:
            self.phantom = self.phantom.model_copy(update={"seed": self.seed})
        if self.train.seed != self.seed:
            self.train = self.train.model_copy(update={"seed": self.seed})
        return self

    @property
    def factor(self) -> int:
        """Undersampling factor of the acquire/reconstruct stages."""
        return self.sampling.factor
