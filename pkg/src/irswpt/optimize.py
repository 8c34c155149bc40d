"""Alternating-ascent drivers, baselines, phase quantization, and the
closed-form large-array approximation.

The two multi-user drivers share one loop shape: take a phase step, take a
waveform step, evaluate the weighted-sum current, and stop when its relative
change falls below the configured threshold. The single-user route needs no
alternation (phases align in closed form; only the per-tone amplitude
allocation iterates), and the baselines either skip the surface or skip the
optimization entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamform import BeamformStepState, ff_step, fs_ewu_step, su_fs_phases
from .quartic import surrogate_dc
from .rectenna import (
    PhaseConfig,
    RectennaParams,
    SystemConfig,
    Waveform,
    composite_channel,
    idc_coefficients,
    idc_compact,
)
from .solvers import RANK1_THRESHOLD
from .waveform import assemble_su_waveform, su_power_allocation, waveform_step

__all__ = [
    "OptimizationResult",
    "QuantizationScheme",
    "run_mu_ff",
    "run_mu_fs",
    "run_su_fs",
    "run_no_irs",
    "run_rand_phase",
    "run_ass",
    "refit_waveform",
    "quantize_phases",
    "large_scale_idc",
]

# Below this current the relative-change stopping statistic is meaningless
# (division by ~0); such runs are declared converged where they stand.
CURRENT_FLOOR = 1e-30

_DEFAULT_PARAMS = RectennaParams()


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of one driver run.

    trace[0] is the weighted-sum current of the initial configuration and
    trace[i] the current after iteration i; surrogate_trace[i] is the
    minorant value of iterate i linearized at iterate i-1 (index 0 repeats
    the true initial current, where the tangent touches).
    randomized_iterations lists the 1-based iterations whose phase
    extraction fell back to Gaussian randomization; those entries are the
    only places the trace is not guaranteed non-decreasing a priori.
    """

    waveform: Waveform
    phases: PhaseConfig
    trace: np.ndarray
    surrogate_trace: np.ndarray
    iterations: int
    converged: bool
    per_user_currents: np.ndarray
    randomized_iterations: tuple = ()


def _uniform_waveform(config: SystemConfig) -> Waveform:
    n = config.n_subcarriers
    return Waveform(np.full(n, np.sqrt(2.0 * config.power_w / n),
                            dtype=np.complex128))


def _composite_coefficients(realization, phases: PhaseConfig,
                            waveform: Waveform) -> np.ndarray:
    rows = [
        idc_coefficients(waveform, composite_channel(realization, phases, q))
        for q in range(realization.n_users)
    ]
    return np.stack(rows)


def _static_coefficients(channels: np.ndarray, waveform: Waveform) -> np.ndarray:
    return np.stack([idc_coefficients(waveform, ch) for ch in channels])


def _per_user_currents(coeffs: np.ndarray, params: RectennaParams) -> np.ndarray:
    return np.array([idc_compact(b, params) for b in coeffs])


def _weighted_current(coeffs: np.ndarray, weights: np.ndarray,
                      params: RectennaParams) -> float:
    total = 0.0
    for xi, b in zip(weights, coeffs):
        if xi != 0.0:
            total += xi * idc_compact(b, params)
    return total


def _weighted_surrogate(new: np.ndarray, prev: np.ndarray, weights: np.ndarray,
                        params: RectennaParams) -> float:
    total = 0.0
    for xi, b_new, b_prev in zip(weights, new, prev):
        if xi != 0.0:
            total += xi * surrogate_dc(b_new, b_prev, params)
    return total


def _stopped(current: float, previous: float, epsilon: float) -> bool:
    if abs(current) <= CURRENT_FLOOR:
        return True
    return abs(current - previous) <= epsilon * abs(current)


def _random_ff_phases(config: SystemConfig, rng: np.random.Generator) -> PhaseConfig:
    angles = rng.uniform(0.0, 2.0 * np.pi, config.n_elements)
    return PhaseConfig.ff(np.exp(1j * angles))


def _alternating_run(realization, config: SystemConfig, params: RectennaParams,
                     state: BeamformStepState, phase_step) -> OptimizationResult:
    weights = config.weights
    s = _uniform_waveform(config)
    coeffs = _composite_coefficients(realization, state.phases, s)
    current = _weighted_current(coeffs, weights, params)
    trace = [current]
    surrogates = [current]
    randomized = []
    converged = False
    iterations = 0
    for iteration in range(1, config.i_max + 1):
        iterations = iteration
        phase_step(s, state)
        if state.aux is not None:
            # Per-tone auxiliaries rotate the effective channel; folding them
            # into the waveform (power-invariant) keeps the sweep's objective.
            s = Waveform(s.s * state.aux)
            state.aux = None
        channels = np.stack([
            composite_channel(realization, state.phases, q)
            for q in range(realization.n_users)
        ])
        s, _ = waveform_step(channels, s, weights, config.power_w, params)
        new_coeffs = _static_coefficients(channels, s)
        current = _weighted_current(new_coeffs, weights, params)
        trace.append(current)
        surrogates.append(_weighted_surrogate(new_coeffs, coeffs, weights, params))
        if (state.last_sdp is not None
                and state.last_sdp.rank1_ratio > RANK1_THRESHOLD):
            randomized.append(iteration)
        coeffs = new_coeffs
        if _stopped(trace[-1], trace[-2], config.epsilon):
            converged = True
            break
    return OptimizationResult(
        waveform=s,
        phases=state.phases,
        trace=np.asarray(trace),
        surrogate_trace=np.asarray(surrogates),
        iterations=iterations,
        converged=converged,
        per_user_currents=_per_user_currents(coeffs, params),
        randomized_iterations=tuple(randomized),
    )


def run_mu_ff(realization, config: SystemConfig, rng: np.random.Generator, *,
              params: RectennaParams = _DEFAULT_PARAMS,
              init_phases: PhaseConfig | None = None) -> OptimizationResult:
    """Alternate the SDP phase update with the waveform eigen-step.

    Phases start uniform-random on the circle and the waveform at uniform
    power unless overridden.
    """
    phases = init_phases if init_phases is not None else _random_ff_phases(config, rng)
    if phases.mode != "ff":
        raise ValueError("run_mu_ff needs flat-surface initial phases")
    state = BeamformStepState(phases=phases)

    def step(s: Waveform, st: BeamformStepState) -> None:
        ff_step(realization, s, st, config.weights, params, rng,
                gr_candidates=config.gr_candidates)

    return _alternating_run(realization, config, params, state, step)


def run_mu_fs(realization, config: SystemConfig, rng: np.random.Generator, *,
              params: RectennaParams = _DEFAULT_PARAMS,
              init_phases: PhaseConfig | None = None) -> OptimizationResult:
    """Alternate the per-tone coordinate sweep with the waveform eigen-step."""
    if init_phases is not None:
        phases = init_phases
    else:
        angles = rng.uniform(0.0, 2.0 * np.pi,
                             (config.n_subcarriers, config.n_elements))
        phases = PhaseConfig.fs(np.exp(1j * angles))
    if phases.mode != "fs":
        raise ValueError("run_mu_fs needs per-tone initial phases")
    state = BeamformStepState(phases=phases)

    def step(s: Waveform, st: BeamformStepState) -> None:
        fs_ewu_step(realization, s, st, config.weights, params)

    return _alternating_run(realization, config, params, state, step)


def run_su_fs(realization, config: SystemConfig, *,
              params: RectennaParams = _DEFAULT_PARAMS) -> OptimizationResult:
    """Closed-form phase alignment followed by the amplitude allocation loop.

    Deterministic: consumes no randomness. Single user only.
    """
    if realization.n_users != 1:
        raise ValueError("run_su_fs is a single-user routine")
    _, phases = su_fs_phases(realization)
    channel = composite_channel(realization, phases, 0)
    allocation = su_power_allocation(np.abs(channel), config.power_w, params,
                                     epsilon=config.epsilon, i_max=config.i_max)
    s = assemble_su_waveform(allocation, channel)
    coeffs = idc_coefficients(s, channel)
    return OptimizationResult(
        waveform=s,
        phases=phases,
        trace=np.asarray(allocation.trace),
        surrogate_trace=np.asarray(allocation.surrogate_trace),
        iterations=allocation.iterations,
        converged=allocation.converged,
        per_user_currents=np.array([idc_compact(coeffs, params)]),
    )


def _waveform_only_run(channels: np.ndarray, phases: PhaseConfig,
                       config: SystemConfig,
                       params: RectennaParams) -> OptimizationResult:
    weights = config.weights
    s = _uniform_waveform(config)
    coeffs = _static_coefficients(channels, s)
    trace = [_weighted_current(coeffs, weights, params)]
    surrogates = [trace[0]]
    converged = False
    iterations = 0
    for iteration in range(1, config.i_max + 1):
        iterations = iteration
        s, _ = waveform_step(channels, s, weights, config.power_w, params)
        new_coeffs = _static_coefficients(channels, s)
        trace.append(_weighted_current(new_coeffs, weights, params))
        surrogates.append(_weighted_surrogate(new_coeffs, coeffs, weights, params))
        coeffs = new_coeffs
        if _stopped(trace[-1], trace[-2], config.epsilon):
            converged = True
            break
    return OptimizationResult(
        waveform=s,
        phases=phases,
        trace=np.asarray(trace),
        surrogate_trace=np.asarray(surrogates),
        iterations=iterations,
        converged=converged,
        per_user_currents=_per_user_currents(coeffs, params),
    )


def refit_waveform(realization, phases: PhaseConfig, config: SystemConfig, *,
                   params: RectennaParams = _DEFAULT_PARAMS) -> OptimizationResult:
    """Re-optimize the waveform for a fixed surface configuration.

    Single-user realizations take the closed-form route (per-tone phase
    cancellation plus the amplitude allocation loop); multi-user ones run
    the waveform-only ascent. Used to evaluate quantized or otherwise
    externally fixed phase configurations on a level footing.
    """
    channels = np.stack([
        composite_channel(realization, phases, q)
        for q in range(realization.n_users)
    ])
    if realization.n_users == 1:
        allocation = su_power_allocation(np.abs(channels[0]), config.power_w,
                                         params, epsilon=config.epsilon,
                                         i_max=config.i_max)
        s = assemble_su_waveform(allocation, channels[0])
        coeffs = idc_coefficients(s, channels[0])
        return OptimizationResult(
            waveform=s,
            phases=phases,
            trace=np.asarray(allocation.trace),
            surrogate_trace=np.asarray(allocation.surrogate_trace),
            iterations=allocation.iterations,
            converged=allocation.converged,
            per_user_currents=np.array([idc_compact(coeffs, params)]),
        )
    return _waveform_only_run(channels, phases, config, params)


def run_no_irs(realization, config: SystemConfig, *,
               params: RectennaParams = _DEFAULT_PARAMS) -> OptimizationResult:
    """Waveform-only ascent over the direct links; the surface plays no part.

    The returned phases are an all-ones placeholder never applied to the
    evaluation channel.
    """
    phases = PhaseConfig.ff(np.ones(realization.n_elements, dtype=np.complex128))
    return _waveform_only_run(realization.h_d, phases, config, params)


def run_rand_phase(realization, config: SystemConfig,
                   rng: np.random.Generator, *,
                   params: RectennaParams = _DEFAULT_PARAMS) -> OptimizationResult:
    """Waveform-only ascent behind one fixed uniform-random phase draw."""
    phases = _random_ff_phases(config, rng)
    channels = np.stack([
        composite_channel(realization, phases, q)
        for q in range(realization.n_users)
    ])
    return _waveform_only_run(channels, phases, config, params)


def run_ass(realization, config: SystemConfig, mode: str = "aligned", *,
            params: RectennaParams = _DEFAULT_PARAMS) -> OptimizationResult:
    """All transmit power on the strongest tone of the composite channel.

    mode 'aligned' applies the closed-form per-tone phase alignment first;
    'unaligned' leaves the surface at unit phases. Tone choice uses channel
    magnitude only (a linear-model rule); the reported current is still the
    nonlinear rectenna model so comparisons share one metric. Single user.
    """
    if realization.n_users != 1:
        raise ValueError("run_ass is a single-user baseline")
    if mode == "aligned":
        _, phases = su_fs_phases(realization)
    elif mode == "unaligned":
        shape = (realization.n_subcarriers, realization.n_elements)
        phases = PhaseConfig.fs(np.ones(shape, dtype=np.complex128))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    channel = composite_channel(realization, phases, 0)
    strongest = int(np.argmax(np.abs(channel)))
    s = np.zeros(channel.size, dtype=np.complex128)
    amp = np.sqrt(2.0 * config.power_w)
    pivot = channel[strongest]
    s[strongest] = amp * np.conj(pivot) / abs(pivot) if abs(pivot) > 0.0 else amp
    waveform = Waveform(s)
    coeffs = idc_coefficients(waveform, channel)
    current = idc_compact(coeffs, params)
    return OptimizationResult(
        waveform=waveform,
        phases=phases,
        trace=np.array([current]),
        surrogate_trace=np.array([current]),
        iterations=0,
        converged=True,
        per_user_currents=np.array([current]),
    )


@dataclass(frozen=True)
class QuantizationScheme:
    """Equally spaced discrete phase set of 2**bits values starting at 0."""

    bits: int

    def __post_init__(self) -> None:
        if self.bits < 1:
            raise ValueError("resolution must be at least one bit")

    @property
    def step(self) -> float:
        return 2.0 * np.pi / (2 ** self.bits)

    @property
    def levels(self) -> np.ndarray:
        return np.arange(2 ** self.bits) * self.step


def quantize_phases(phases: PhaseConfig, scheme: QuantizationScheme) -> PhaseConfig:
    """Snap each phase to the nearest discrete level on the circle.

    Exact midpoints round down (toward the lower level of the straddled
    pair), so e.g. an angle halfway between 0 and the first level maps to 0.
    """
    angles = np.mod(np.angle(phases.theta), 2.0 * np.pi)
    steps = angles / scheme.step
    lower = np.floor(steps)
    index = np.where(steps - lower > 0.5, lower + 1.0, lower)
    index = index.astype(np.int64) % (2 ** scheme.bits)
    return PhaseConfig(phases.mode, np.exp(1j * index * scheme.step))


def large_scale_idc(gain_direct: float, gain_incident: float,
                    gain_reflected: float, n_elements: int, n_subcarriers: int,
                    power_w: float,
                    params: RectennaParams = _DEFAULT_PARAMS) -> float:
    """Closed-form current approximation for large arrays and many elements.

    With the combined linear gain G = gain_direct + gain_incident *
    gain_reflected * n_elements**2, evaluates
    k2 P G + (3/2) k4 P^2 G^2 + 3 k4 P^2 G^2 N.
    """
    if min(gain_direct, gain_incident, gain_reflected) < 0:
        raise ValueError("pathloss gains must be non-negative")
    combined = gain_direct + gain_incident * gain_reflected * n_elements ** 2
    quad = params.k2 * power_w * combined
    quart = params.k4 * power_w ** 2 * combined ** 2
    return quad + 1.5 * quart + 3.0 * quart * n_subcarriers
