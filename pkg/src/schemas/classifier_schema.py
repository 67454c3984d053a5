from pydantic import BaseModel, ConfigDict, Field
from typing import Dict, List, Optional

class TrainConfig(BaseModel):
    """Random forest hyperparameters (Breiman defaults)."""
    n_trees: int = Field(default=100, ge=1)
    max_depth: Optional[int] = Field(default=None, ge=0, description="None grows until pure")
    min_samples_split: int = Field(default=2, ge=2)
    min_samples_leaf: int = Field(default=1, ge=1)
    features_per_split: Optional[int] = Field(default=None, ge=1, description="None means floor(sqrt(n_bands))")
    per_class_cap: int = Field(default=10_000, ge=1)
    bootstrap: bool = True
    seed: int = Field(default=0, ge=0)

    model_config = ConfigDict(extra="forbid")

class RocCurve(BaseModel):
    """One-vs-rest ROC curve of a class."""
    class_code: int
    fpr: List[float]
    tpr: List[float]
    auc: float

class EvaluationReport(BaseModel):
    """Classifier scores on a held-out dataset."""
    classes: List[int]
    support: Dict[int, int]
    per_class_accuracy: Dict[int, float]
    overall_accuracy: float
    confusion: List[List[int]] = Field(..., description="Rows are true classes, columns predictions, in `classes` order")
    roc: List[RocCurve]
    excluded_classes: List[int] = Field(default_factory=list)

class RepeatedEvaluation(BaseModel):
    """Mean and standard deviation of accuracies over repeated training seeds."""
    repeats: int
    per_class_mean: Dict[int, float]
    per_class_std: Dict[int, float]
    overall_mean: float
    overall_std: float
    reports: List[EvaluationReport]

class SplitSummary(BaseModel):
    """Pixel counts of a left/right label split."""
    train_pixels: Dict[int, int]
    test_pixels: Dict[int, int]
    split_column: int = Field(..., ge=0)
