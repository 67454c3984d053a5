import argparse
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.core.exceptions import ConfigError
from src.core.logging import logger
from src.models.image_model import AcquisitionSet, HyperCube, LabelMap
from src.repositories.cube_repository import CubeRepository
from src.repositories.model_repository import ModelRepository
from src.repositories.report_repository import ReportRepository
from src.schemas.acquisition_schema import PhantomSpec
from src.schemas.pipeline_schema import PipelineConfig
from src.services.phantom_service import default_phantom_spec, generate_phantom

PHANTOM_STEM = "phantom"
PHANTOM_LABELS_STEM = "phantom_labels"
REFERENCE_STEM = "reference"
SPARSE_STEM = "sparse"
RECONSTRUCTED_STEM = "reconstructed"


@dataclass(frozen=True)
class OutputLayout:
    """``<out>/{cubes,plots,reports,models}``."""
    root: Path

    @property
    def cubes(self) -> Path:
        return self.root / "cubes"

    @property
    def plots(self) -> Path:
        return self.root / "plots"

    @property
    def reports(self) -> Path:
        return self.root / "reports"

    @property
    def models(self) -> Path:
        return self.root / "models"

    def prepare(self) -> "OutputLayout":
        for directory in (self.cubes, self.plots, self.reports, self.models):
            directory.mkdir(parents=True, exist_ok=True)
        return self

    def has_cube(self, stem: str) -> bool:
        return (self.cubes / f"{stem}.json").exists()


@dataclass
class RunContext:
    """Validated config plus the repositories every command writes through."""
    config: PipelineConfig
    layout: OutputLayout
    cubes: CubeRepository = field(default_factory=CubeRepository)
    reports: ReportRepository = field(default_factory=ReportRepository)
    models: ModelRepository = field(default_factory=ModelRepository)

    def phantom_spec(self, core: int = 0) -> PhantomSpec:
        """Configured phantom, or the default one; core k uses seed + k."""
        cfg = self.config
        spec = cfg.phantom or default_phantom_spec(cfg.seed, cfg.phantom_width, cfg.phantom_height)
        return spec.model_copy(update={"seed": cfg.seed + core}) if core else spec

    def load_source(self) -> Tuple[HyperCube, Optional[LabelMap]]:
        """
        Full-resolution cube (and labels) the stages start from.

        Order: configured input files, a phantom in ``<out>/cubes`` generated
        from the current phantom spec, else a freshly generated phantom that is
        saved for later stages.
        """
        cfg = self.config
        if cfg.input is not None:
            cube = self.cubes.load_cube(cfg.input.cube)
            labels = self.cubes.load_labels(cfg.input.labels) if cfg.input.labels else None
            return cube, labels
        spec = self.phantom_spec()
        provenance = phantom_provenance(spec)
        if self.is_current(PHANTOM_STEM, provenance) and self.is_current(PHANTOM_LABELS_STEM, provenance):
            return (
                self.cubes.load_cube(self.layout.cubes / PHANTOM_STEM),
                self.cubes.load_labels(self.layout.cubes / PHANTOM_LABELS_STEM),
            )
        cube, labels = generate_phantom(spec)
        self.save_phantom(cube, labels, spec)
        return cube, labels

    def is_current(self, stem: str, provenance: Dict[str, Any]) -> bool:
        """True when ``<out>/cubes/<stem>`` exists and was derived from ``provenance``."""
        if not self.layout.has_cube(stem):
            return False
        if self.cubes.read_provenance(self.layout.cubes / stem) != provenance:
            logger.info(f"Ignoring {stem} in {self.layout.cubes}: written for a different config")
            return False
        return True

    def save_phantom(self, cube: HyperCube, labels: LabelMap, spec: PhantomSpec) -> None:
        provenance = phantom_provenance(spec)
        self.cubes.save_cube(cube, self.layout.cubes / PHANTOM_STEM, provenance)
        self.cubes.save_labels(labels, self.layout.cubes / PHANTOM_LABELS_STEM, provenance)

    def reconstruction_provenance(self, source: HyperCube) -> Dict[str, Any]:
        cfg = self.config
        return _normalized({
            "source_sha256": cube_digest(source),
            "reference_wavenumber_cm1": cfg.reference_wavenumber_cm1,
            "factor": cfg.factor,
            "fusion": cfg.fusion.model_dump(mode="json"),
        })

    def save_acquisition(self, acq: AcquisitionSet, source: HyperCube) -> None:
        provenance = _normalized({
            "source_sha256": cube_digest(source),
            "reference_wavenumber_cm1": self.config.reference_wavenumber_cm1,
            "factor": self.config.factor,
        })
        self.cubes.save_cube(HyperCube((acq.reference,)), self.layout.cubes / REFERENCE_STEM, provenance)
        if acq.sparse_bands:
            self.cubes.save_cube(HyperCube(acq.sparse_bands), self.layout.cubes / SPARSE_STEM, provenance)
        else:
            self.cubes.delete(self.layout.cubes / SPARSE_STEM)

    def save_reconstruction(self, cube: HyperCube, source: HyperCube) -> None:
        self.cubes.save_cube(cube, self.layout.cubes / RECONSTRUCTED_STEM, self.reconstruction_provenance(source))

    def load_reconstruction(self, source: HyperCube) -> Optional[HyperCube]:
        """Cube written by ``reconstruct`` from this source and config, else None."""
        if not self.is_current(RECONSTRUCTED_STEM, self.reconstruction_provenance(source)):
            return None
        return self.cubes.load_cube(self.layout.cubes / RECONSTRUCTED_STEM)

    def echo_config(self) -> Path:
        return self.reports.write_json(self.config, self.layout.root / "config.json")


def _normalized(provenance: Dict[str, Any]) -> Dict[str, Any]:
    # the JSON form is what a header read back compares against
    return json.loads(json.dumps(provenance))


def phantom_provenance(spec: PhantomSpec) -> Dict[str, Any]:
    return _normalized({"phantom": spec.model_dump(mode="json")})


def cube_digest(cube: HyperCube) -> str:
    """SHA-256 of the float32 raster, band positions and pixel size."""
    digest = hashlib.sha256(cube.to_array().astype("<f4").tobytes())
    digest.update(json.dumps([list(cube.wavenumbers), cube.dx_um, cube.dy_um]).encode())
    return digest.hexdigest()


def parse_cutoff(value: str):
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--cutoff must be 'auto' or an integer, got {value!r}")


def parse_factors(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--factors must be comma-separated integers, got {value!r}")


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}")


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Merge the JSON config with CLI flag overrides and validate the result.

    Raises:
        ConfigError: Unreadable config file.
        pydantic.ValidationError: Invalid merged config (including a missing seed).
    """
    raw = read_config_file(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    if args.factors is not None:
        raw["factors"] = args.factors
    if args.reference_wavenumber is not None:
        raw["reference_wavenumber_cm1"] = args.reference_wavenumber
    if args.cutoff is not None:
        raw.setdefault("fusion", {})["cutoff_scale"] = args.cutoff
    if getattr(args, "model_path", None) is not None:
        raw["model_path"] = args.model_path
    config = PipelineConfig.model_validate(raw)
    logger.debug(f"Effective config: {config.model_dump_json()}")
    return config


def build_context(args: argparse.Namespace) -> RunContext:
    config = load_config(args)
    context = RunContext(config=config, layout=OutputLayout(Path(config.output_dir)).prepare())
    context.echo_config()
    return context
