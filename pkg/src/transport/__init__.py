"""Monte-Carlo multiple-scattering transport."""

from .rng import path_generator, validate_seed
from .kernels import (
    AtomicKernel,
    IsotropicKernel,
    KernelRegistry,
    ScatteringKernel,
    VertexSample,
    Emission,
)
from .diffuse_mc import (
    DelayStatistics,
    DiffusionSettings,
    OrderAccumulator,
    OrderStatistics,
    PathChain,
    StorageGate,
    delay_statistics,
    passivity_holds,
    run_diffusion,
    sample_entry,
    sample_free_path,
    slab_order_oracle,
)

__all__ = [
    "path_generator",
    "validate_seed",
    "AtomicKernel",
    "IsotropicKernel",
    "KernelRegistry",
    "ScatteringKernel",
    "VertexSample",
    "Emission",
    "DelayStatistics",
    "DiffusionSettings",
    "OrderAccumulator",
    "OrderStatistics",
    "PathChain",
    "StorageGate",
    "delay_statistics",
    "passivity_holds",
    "run_diffusion",
    "sample_entry",
    "sample_free_path",
    "slab_order_oracle",
]
