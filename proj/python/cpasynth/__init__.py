"""Clustered linear array synthesis by power-pattern matching."""

from ._core import (
    ArgumentError,
    DegenerateSample,
    EnumerationCapExceeded,
    ParseError,
    SynthesisFailed,
    UnsupportedConfiguration,
    cpa_power_pattern,
    dolph_chebyshev,
    emm_synthesize,
    ep_matrix,
    epm_enumerate,
    fpa_power_pattern,
    grid_nodes,
    invert_af,
    ipm_weighting,
    kmeans,
    load_reference,
    matching_improvement,
    pm_metric,
    pmm_synthesize,
    run_synth_config,
    stirling2,
    taylor_nbar,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "DegenerateSample",
    "EnumerationCapExceeded",
    "ParseError",
    "SynthesisFailed",
    "UnsupportedConfiguration",
    "cpa_power_pattern",
    "dolph_chebyshev",
    "emm_synthesize",
    "ep_matrix",
    "epm_enumerate",
    "fpa_power_pattern",
    "grid_nodes",
    "invert_af",
    "ipm_weighting",
    "kmeans",
    "load_reference",
    "matching_improvement",
    "pm_metric",
    "pmm_synthesize",
    "run_synth_config",
    "stirling2",
    "taylor_nbar",
]
