"""Joint waveform and reflecting-surface optimization for wireless power.

The package models a multisine transmitter, a passive reflecting surface,
and users with nonlinear energy-harvesting rectifiers. It provides the
harvested-current model (`rectenna`), frequency-selective channel synthesis
(`channel`), the quartic-objective surrogate machinery (`quartic`), eigen
and semidefinite solvers (`solvers`), surface phase updates (`beamform`),
waveform updates (`waveform`), end-to-end alternating optimizers and
baselines (`optimize`), and a seeded experiment harness with a CLI
(`harness`, `cli`).
"""

from .beamform import BeamformStepState, ff_step, fs_ewu_step, su_fs_phases
from .channel import (
    ChannelRealization,
    Layout,
    PowerDelayProfile,
    generate_realization,
)
from .harness import (
    AGGREGATE,
    CSV_COLUMNS,
    ConfigError,
    ExperimentResult,
    ExperimentSpec,
    ResultRow,
    default_spec,
    load_config,
    parse_config_text,
    render_spec,
    run_experiment,
    write_results,
)
from .optimize import (
    OptimizationResult,
    QuantizationScheme,
    large_scale_idc,
    quantize_phases,
    refit_waveform,
    run_ass,
    run_mu_ff,
    run_mu_fs,
    run_no_irs,
    run_rand_phase,
    run_su_fs,
)
from .rectenna import (
    PhaseConfig,
    RectennaParams,
    SystemConfig,
    Waveform,
    composite_channel,
    idc_coefficients,
    idc_compact,
    idc_direct,
    idc_time_oracle,
    weighted_sum_idc,
)
from .solvers import SdpSolution, gaussian_randomization, smallest_eigenpair, solve_unit_diag_sdp
from .waveform import assemble_su_waveform, su_power_allocation, waveform_step

__version__ = "0.1.0"

__all__ = [
    "AGGREGATE",
    "BeamformStepState",
    "CSV_COLUMNS",
    "ChannelRealization",
    "ConfigError",
    "ExperimentResult",
    "ExperimentSpec",
    "Layout",
    "OptimizationResult",
    "PhaseConfig",
    "PowerDelayProfile",
    "QuantizationScheme",
    "RectennaParams",
    "ResultRow",
    "SdpSolution",
    "SystemConfig",
    "Waveform",
    "assemble_su_waveform",
    "composite_channel",
    "default_spec",
    "ff_step",
    "fs_ewu_step",
    "gaussian_randomization",
    "generate_realization",
    "idc_coefficients",
    "idc_compact",
    "idc_direct",
    "idc_time_oracle",
    "large_scale_idc",
    "load_config",
    "parse_config_text",
    "quantize_phases",
    "refit_waveform",
    "render_spec",
    "run_ass",
    "run_experiment",
    "run_mu_ff",
    "run_mu_fs",
    "run_no_irs",
    "run_rand_phase",
    "run_su_fs",
    "smallest_eigenpair",
    "solve_unit_diag_sdp",
    "su_fs_phases",
    "su_power_allocation",
    "waveform_step",
    "weighted_sum_idc",
    "write_results",
    "__version__",
]
