"""ispkit: multi-frequency far-field simulation and truncated-Fourier source
reconstruction for 2D acoustic inverse source problems.

The toolkit covers the full experimental loop: synthesizing far-field data
from raster sources, perturbing it with multiplicative measurement noise,
recovering Fourier coefficients through the explicit inversion formulas,
evaluating the band-limited reconstruction, generating paired training
datasets, and scoring reconstructions with NMSE / global SSIM.
"""

__version__ = "0.1.0"

from .domain import (
    DEFAULT_A,
    DEFAULT_LAMBDA,
    DEFAULT_N_PIXELS,
    CoefficientSet,
    FarFieldSet,
    GridSpec,
    MeasurementPlan,
    MultiIndex,
    PlanEntry,
    ReconstructionRaster,
    SourceRaster,
    build_measurement_plan,
)
from .errors import FormatError, ISPKitError, ValidationError
from .forward import (
    DiskSpec,
    add_noise,
    analytic_disk_far_field,
    bessel_j1,
    far_field,
    gamma,
    synthesize,
)
from .inversion import basis_inner_product, evaluate_series, recover_coefficients
from .datagen import (
    DiskSceneConfig,
    PairSample,
    build_dataset,
    build_pair,
    derive_seed,
    ingest_idx_images,
    prepare_raster,
    rasterize_disks,
    sample_disk_scene,
    split_counts,
)
from .metrics import evaluate_batch, nmse, ssim_global
from .storage import export_pgm, read_manifest, read_tensor, write_manifest, write_tensor

__all__ = [
    "DEFAULT_A",
    "DEFAULT_LAMBDA",
    "DEFAULT_N_PIXELS",
    "CoefficientSet",
    "DiskSceneConfig",
    "DiskSpec",
    "FarFieldSet",
    "FormatError",
    "GridSpec",
    "ISPKitError",
    "MeasurementPlan",
    "MultiIndex",
    "PairSample",
    "PlanEntry",
    "ReconstructionRaster",
    "SourceRaster",
    "ValidationError",
    "add_noise",
    "analytic_disk_far_field",
    "basis_inner_product",
    "bessel_j1",
    "build_dataset",
    "build_measurement_plan",
    "build_pair",
    "derive_seed",
    "evaluate_batch",
    "evaluate_series",
    "export_pgm",
    "far_field",
    "gamma",
    "ingest_idx_images",
    "nmse",
    "prepare_raster",
    "rasterize_disks",
    "read_manifest",
    "read_tensor",
    "recover_coefficients",
    "sample_disk_scene",
    "split_counts",
    "ssim_global",
    "synthesize",
    "write_manifest",
    "write_tensor",
]
