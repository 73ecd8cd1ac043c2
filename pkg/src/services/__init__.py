"""Services built on the simulator physics."""

from .memory_channel import (
    CLASSICAL_BENCHMARK,
    CLONING_BENCHMARK,
    ChannelAnalysisConfig,
    ChannelReport,
    MemoryChannelAnalyzer,
    PhotonNumberDistribution,
    benchmark_comparison,
    fidelity_sweep,
    gaussian_wavepacket,
    hom_coincidence,
    photon_number_by_quadrature,
    photon_number_distribution,
    signal_noise_split,
    stretch,
    werner_density_matrix,
    werner_fidelity,
    werner_from_channel,
    wigner_channel,
    wigner_single_photon,
)

__all__ = [
    "CLASSICAL_BENCHMARK",
    "CLONING_BENCHMARK",
    "ChannelAnalysisConfig",
    "ChannelReport",
    "MemoryChannelAnalyzer",
    "PhotonNumberDistribution",
    "benchmark_comparison",
    "fidelity_sweep",
    "gaussian_wavepacket",
    "hom_coincidence",
    "photon_number_by_quadrature",
    "photon_number_distribution",
    "signal_noise_split",
    "stretch",
    "werner_density_matrix",
    "werner_fidelity",
    "werner_from_channel",
    "wigner_channel",
    "wigner_single_photon",
]
