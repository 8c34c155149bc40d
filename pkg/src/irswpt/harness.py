"""Experiment configuration, seeded Monte-Carlo execution, and persistence.

Experiments are described by a flat key = value text format with one
[scenario] section; `load_config` fills unset keys from the baseline values
(36 dBm budget, 5.18 GHz carrier, 10 MHz bandwidth, -35 dB reference gain
at 1 m, the 2 m / 2 m / 15 m desk geometry) and validates everything up
front. `run_experiment` fans trials out over processes and assembles rows
in a fixed order, so a (spec, seed) pair produces byte-identical files at
any parallelism. Wall-clock timing is opt-in precisely because it is the
one column that cannot be deterministic.

Row layout notes. The convergence scenario reuses one optimization run per
trial and reports the trace value at each requested iteration checkpoint;
checkpoints past convergence repeat the final value. current_region emits
one row per user with ":u0" / ":u1" suffixed to the algorithm name.
discrete_bits quantizes the optimized phases at each bit width, refits the
waveform, and adds an ":cont" row carrying the unquantized reference.
Aggregate rows hold per-column arithmetic means over their trial rows
(the converged column becomes the converged fraction).
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .channel import Layout, PowerDelayProfile, generate_realization
from .optimize import (
    QuantizationScheme,
    quantize_phases,
    refit_waveform,
    run_ass,
    run_mu_ff,
    run_mu_fs,
    run_no_irs,
    run_rand_phase,
    run_su_fs,
)
from .rectenna import SystemConfig

__all__ = [
    "AGGREGATE",
    "CSV_COLUMNS",
    "TOOL_VERSION",
    "ConfigError",
    "ExperimentSpec",
    "ExperimentResult",
    "ResultRow",
    "algorithm_names",
    "default_spec",
    "load_config",
    "parse_config_text",
    "render_spec",
    "run_experiment",
    "write_results",
]

TOOL_VERSION = "0.1.0"

AGGREGATE = "AGGREGATE"

CSV_COLUMNS = (
    "scenario",
    "algorithm",
    "sweep_name",
    "sweep_value",
    "trial",
    "current_amps",
    "iterations",
    "converged",
    "wall_ms",
)

SWEEP_NAMES = {
    "idc_vs_N": "n_subcarriers",
    "idc_vs_L": "n_elements",
    "convergence": "iteration",
    "bandwidth_sweep": "bandwidth_hz",
    "current_region": "weight_fraction",
    "discrete_bits": "bits",
    "layout_sweep": "d_direct_m",
    "scaling_check": "n_elements",
}

DEFAULT_SWEEPS = {
    "idc_vs_N": (1.0, 2.0, 4.0, 8.0, 16.0),
    "idc_vs_L": (10.0, 20.0, 40.0),
    "convergence": tuple(float(i) for i in range(31)),
    "bandwidth_sweep": (1e6, 2e6, 5e6, 10e6, 20e6),
    "current_region": tuple(round(0.1 * i, 1) for i in range(11)),
    "discrete_bits": (1.0, 2.0, 3.0),
    "layout_sweep": (5.0, 10.0, 15.0, 20.0, 25.0),
    "scaling_check": (10.0, 20.0, 40.0),
}

_INT_SWEEPS = {"idc_vs_N", "idc_vs_L", "convergence", "discrete_bits",
               "scaling_check"}

_ALGORITHMS: dict[str, Callable] = {
    "ff": lambda real, cfg, rng: run_mu_ff(real, cfg, rng),
    "fs": lambda real, cfg, rng: run_mu_fs(real, cfg, rng),
    "su_fs": lambda real, cfg, rng: run_su_fs(real, cfg),
    "no_irs": lambda real, cfg, rng: run_no_irs(real, cfg),
    "rand_phase": lambda real, cfg, rng: run_rand_phase(real, cfg, rng),
    "ass_aligned": lambda real, cfg, rng: run_ass(real, cfg, "aligned"),
    "ass_unaligned": lambda real, cfg, rng: run_ass(real, cfg, "unaligned"),
}

_SINGLE_USER_ONLY = {"su_fs", "ass_aligned", "ass_unaligned"}

_PDP_CACHE: PowerDelayProfile | None = None


def algorithm_names() -> tuple:
    return tuple(_ALGORITHMS)


class ConfigError(ValueError):
    """Configuration file or experiment specification rejected."""


class ResultRow(NamedTuple):
    scenario: str
    algorithm: str
    sweep_name: str
    sweep_value: float
    trial: object          # int trial index or the AGGREGATE literal
    current_amps: float
    iterations: float
    converged: object      # bool per trial, converged fraction on aggregates
    wall_ms: float


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully-resolved description of one Monte-Carlo experiment."""

    scenario: str = "convergence"
    algorithms: tuple = ("fs", "ff")
    sweep_values: tuple = ()
    trials: int = 100
    master_seed: int = 0
    config: SystemConfig = field(default_factory=SystemConfig)
    layout: Layout = field(default_factory=Layout)

    def __post_init__(self) -> None:
        if self.scenario not in SWEEP_NAMES:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; expected one of "
                f"{', '.join(sorted(SWEEP_NAMES))}"
            )
        if not self.sweep_values:
            object.__setattr__(self, "sweep_values",
                               DEFAULT_SWEEPS[self.scenario])
        object.__setattr__(self, "sweep_values",
                           tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for name in self.algorithms:
            if name not in _ALGORITHMS:
                raise ConfigError(
                    f"unknown algorithm {name!r}; expected one of "
                    f"{', '.join(_ALGORITHMS)}"
                )
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("algorithm list contains duplicates")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        self._check_sweep()
        self._check_users()

    def _check_sweep(self) -> None:
        values = self.sweep_values
        if self.scenario in _INT_SWEEPS:
            bad = [v for v in values if v != int(v)]
            if bad:
                raise ConfigError(
                    f"{self.scenario} sweep values must be integers, got {bad[0]!r}"
                )
        if self.scenario == "convergence":
            if any(v < 0 for v in values):
                raise ConfigError("iteration checkpoints must be >= 0")
        elif self.scenario == "current_region":
            if any(not 0.0 <= v <= 1.0 for v in values):
                raise ConfigError("weight fractions must lie in [0, 1]")
        elif self.scenario == "discrete_bits":
            if any(v < 1 for v in values):
                raise ConfigError("bit widths must be >= 1")
        elif any(v <= 0 for v in values):
            raise ConfigError(f"{self.scenario} sweep values must be positive")

    def _check_users(self) -> None:
        n_users = self.config.n_users
        if self.scenario == "current_region" and n_users != 2:
            raise ConfigError("current_region requires n_users = 2")
        needs_su = [a for a in self.algorithms if a in _SINGLE_USER_ONLY]
        if needs_su and n_users != 1:
            raise ConfigError(
                f"algorithm {needs_su[0]!r} requires n_users = 1, "
                f"got {n_users}"
            )


@dataclass(frozen=True)
class ExperimentResult:
    """Ordered result rows (trials first, then aggregates) plus metadata."""

    rows: tuple
    metadata: dict

    def trial_rows(self) -> tuple:
        return tuple(r for r in self.rows if r.trial != AGGREGATE)

    def aggregate_rows(self) -> tuple:
        return tuple(r for r in self.rows if r.trial == AGGREGATE)


# --------------------------------------------------------------------------
# configuration parsing

_GLOBAL_INT_KEYS = {"trials", "seed", "n_subcarriers", "n_elements", "n_users",
                    "i_max", "gr_candidates"}
_GLOBAL_FLOAT_KEYS = {"power_dbm", "f0_hz", "bandwidth_hz", "epsilon", "d_h",
                      "d_v", "d_d", "d0", "nu_direct", "nu_incident",
                      "nu_reflected", "r0_db"}
_GLOBAL_LIST_KEYS = {"algorithms", "sweep", "weights"}

_KNOWN_KEYS = _GLOBAL_INT_KEYS | _GLOBAL_FLOAT_KEYS | _GLOBAL_LIST_KEYS


def _parse_scalar(key: str, raw: str, lineno: int):
    try:
        if key in _GLOBAL_INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        kind = "an integer" if key in _GLOBAL_INT_KEYS else "a number"
        raise ConfigError(
            f"line {lineno}: key {key!r} expects {kind}, got {raw!r}"
        ) from None


def _parse_list(key: str, raw: str, lineno: int):
    items = [part.strip() for part in raw.split(",") if part.strip()]
    if not items:
        raise ConfigError(f"line {lineno}: key {key!r} expects a non-empty list")
    if key == "algorithms":
        return tuple(items)
    try:
        return tuple(float(part) for part in items)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: key {key!r} expects comma-separated numbers, "
            f"got {raw!r}"
        ) from None


def parse_config_text(text: str) -> ExperimentSpec:
    """Parse a flat key = value config with one [scenario] section.

    Keys may appear before the section header (shared) or inside it; a key
    repeated in the same region is an error, a section key overrides a
    shared one. An empty document yields the full baseline spec.
    """
    scenario: str | None = None
    seen_regions: list[set] = [set()]
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {raw!r}")
            if scenario is not None:
                raise ConfigError(
                    f"line {lineno}: multiple scenario sections; one experiment "
                    f"per file"
                )
            scenario = line[1:-1].strip()
            if scenario not in SWEEP_NAMES:
                raise ConfigError(
                    f"line {lineno}: unknown scenario {scenario!r}; expected one "
                    f"of {', '.join(sorted(SWEEP_NAMES))}"
                )
            seen_regions.append(set())
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, rawval = line.partition("=")
        key = key.strip()
        rawval = rawval.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen_regions[-1]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen_regions[-1].add(key)
        if key in _GLOBAL_LIST_KEYS:
            values[key] = _parse_list(key, rawval, lineno)
        else:
            values[key] = _parse_scalar(key, rawval, lineno)

    spec_kwargs: dict = {}
    if scenario is not None:
        spec_kwargs["scenario"] = scenario
    if "algorithms" in values:
        spec_kwargs["algorithms"] = values["algorithms"]
    if "sweep" in values:
        spec_kwargs["sweep_values"] = values["sweep"]
    if "trials" in values:
        spec_kwargs["trials"] = values["trials"]
    if "seed" in values:
        spec_kwargs["master_seed"] = values["seed"]

    cfg_kwargs: dict = {}
    for key in ("n_subcarriers", "n_elements", "n_users", "epsilon", "i_max",
                "gr_candidates"):
        if key in values:
            cfg_kwargs[key] = values[key]
    if "power_dbm" in values:
        cfg_kwargs["power_w"] = 10 ** (values["power_dbm"] / 10) * 1e-3
    if "f0_hz" in values:
        cfg_kwargs["f0_hz"] = values["f0_hz"]
    if "bandwidth_hz" in values:
        cfg_kwargs["bandwidth_hz"] = values["bandwidth_hz"]
    if "weights" in values:
        cfg_kwargs["user_weights"] = values["weights"]

    lay_kwargs: dict = {}
    for key in ("d_h", "d_v", "d_d", "d0", "nu_direct", "nu_incident",
                "nu_reflected"):
        if key in values:
            lay_kwargs[key] = values[key]
    if "r0_db" in values:
        lay_kwargs["r0"] = 10 ** (values["r0_db"] / 10)

    try:
        config = SystemConfig(**cfg_kwargs)
        layout = Layout(**lay_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentSpec(config=config, layout=layout, **spec_kwargs)


def load_config(path) -> ExperimentSpec:
    """Read and validate an experiment config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def default_spec(scenario: str = "convergence") -> ExperimentSpec:
    if scenario == "current_region":
        # the weight sweep is defined over a two-user system
        return ExperimentSpec(scenario=scenario,
                              config=SystemConfig(n_users=2))
    return ExperimentSpec(scenario=scenario)


def render_spec(spec: ExperimentSpec) -> str:
    """Canonical config text for a spec; round-trips through the parser."""

    def num(v: float) -> str:
        return f"{v:.12g}"

    cfg = spec.config
    lay = spec.layout
    lines = [
        f"[{spec.scenario}]",
        f"algorithms = {', '.join(spec.algorithms)}",
        f"sweep = {', '.join(num(v) for v in spec.sweep_values)}",
        f"trials = {spec.trials}",
        f"seed = {spec.master_seed}",
        f"n_subcarriers = {cfg.n_subcarriers}",
        f"n_elements = {cfg.n_elements}",
        f"n_users = {cfg.n_users}",
        f"power_dbm = {num(10 * math.log10(cfg.power_w * 1e3))}",
        f"f0_hz = {num(cfg.f0_hz)}",
        f"bandwidth_hz = {num(cfg.bandwidth_hz)}",
        f"epsilon = {num(cfg.epsilon)}",
        f"i_max = {cfg.i_max}",
        f"gr_candidates = {cfg.gr_candidates}",
        f"d_h = {num(lay.d_h)}",
        f"d_v = {num(lay.d_v)}",
        f"d_d = {num(lay.d_d)}",
        f"d0 = {num(lay.d0)}",
        f"nu_direct = {num(lay.nu_direct)}",
        f"nu_incident = {num(lay.nu_incident)}",
        f"nu_reflected = {num(lay.nu_reflected)}",
        f"r0_db = {num(10 * math.log10(lay.r0))}",
    ]
    if cfg.user_weights is not None:
        lines.insert(14, f"weights = {', '.join(num(w) for w in cfg.user_weights)}")
    return "\n".join(lines) + "\n"


def _config_hash(spec: ExperimentSpec) -> str:
    return hashlib.sha256(render_spec(spec).encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# execution

def _default_pdp() -> PowerDelayProfile:
    global _PDP_CACHE
    if _PDP_CACHE is None:
        _PDP_CACHE = PowerDelayProfile.default()
    return _PDP_CACHE


def _sweep_apply(spec: ExperimentSpec, value: float) -> tuple:
    """(SystemConfig, Layout) effective at one sweep value."""
    cfg, lay = spec.config, spec.layout
    s = spec.scenario
    if s in ("idc_vs_N",):
        cfg = replace(cfg, n_subcarriers=int(value))
    elif s in ("idc_vs_L", "scaling_check"):
        cfg = replace(cfg, n_elements=int(value))
    elif s == "bandwidth_sweep":
        cfg = replace(cfg, bandwidth_hz=value)
    elif s == "current_region":
        cfg = replace(cfg, user_weights=(value, 1.0 - value))
    elif s == "layout_sweep":
        lay = replace(lay, d_d=value)
    # convergence and discrete_bits leave the baseline untouched
    return cfg, lay


def _failed_rows(spec: ExperimentSpec, name: str, value: float,
                 trial: int) -> list:
    sweep_name = SWEEP_NAMES[spec.scenario]
    labels = [name]
    if spec.scenario == "current_region":
        labels = [f"{name}:u0", f"{name}:u1"]
    elif spec.scenario == "discrete_bits":
        labels = [name, f"{name}:cont"]
    return [
        ResultRow(spec.scenario, label, sweep_name, value, trial,
                  float("nan"), 0.0, False, 0.0)
        for label in labels
    ]


def _run_cell(spec: ExperimentSpec, sweep_index: int, trial: int,
              include_timing: bool) -> list:
    """All rows for one (sweep value, trial) pair, in algorithm order."""
    value = spec.sweep_values[sweep_index]
    sweep_name = SWEEP_NAMES[spec.scenario]
    cfg, lay = _sweep_apply(spec, value)
    rng_channel = np.random.default_rng(
        np.random.SeedSequence([spec.master_seed, sweep_index, trial]))
    realization = generate_realization(cfg, lay, rng_channel, _default_pdp())

    rows: list = []
    for alg_index, name in enumerate(spec.algorithms):
        runner = _ALGORITHMS[name]
        rng = np.random.default_rng(
            np.random.SeedSequence([spec.master_seed, sweep_index, trial,
                                    alg_index]))
        started = time.perf_counter()
        try:
            result = runner(realization, cfg, rng)
        except Exception:
            rows.extend(_failed_rows(spec, name, value, trial))
            continue
        wall = (time.perf_counter() - started) * 1e3 if include_timing else 0.0
        rows.append(ResultRow(
            spec.scenario, name, sweep_name, value, trial,
            float(result.trace[-1]), float(result.iterations),
            bool(result.converged), wall))
    return rows


def _run_discrete_cell(spec: ExperimentSpec, trial: int,
                       include_timing: bool) -> list:
    """One continuous run per algorithm, quantized at every bit width.

    Sharing the realization and the unquantized solution across bit widths
    makes each width's row a paired comparison; the ":cont" reference row is
    duplicated at every width so the grid stays rectangular.
    """
    cfg, lay = spec.config, spec.layout
    rng_channel = np.random.default_rng(
        np.random.SeedSequence([spec.master_seed, 0, trial]))
    realization = generate_realization(cfg, lay, rng_channel, _default_pdp())
    rows: list = []
    for alg_index, name in enumerate(spec.algorithms):
        runner = _ALGORITHMS[name]
        rng = np.random.default_rng(
            np.random.SeedSequence([spec.master_seed, 0, trial, alg_index]))
        started = time.perf_counter()
        try:
            result = runner(realization, cfg, rng)
        except Exception:
            for value in spec.sweep_values:
                rows.extend(_failed_rows(spec, name, value, trial))
            continue
        wall = (time.perf_counter() - started) * 1e3 if include_timing else 0.0
        for value in spec.sweep_values:
            started = time.perf_counter()
            try:
                snapped = quantize_phases(result.phases,
                                          QuantizationScheme(int(value)))
                refit = refit_waveform(realization, snapped, cfg)
            except Exception:
                rows.extend(_failed_rows(spec, name, value, trial))
                continue
            q_wall = ((time.perf_counter() - started) * 1e3
                      if include_timing else 0.0)
            rows.append(ResultRow(
                spec.scenario, name, "bits", value, trial,
                float(refit.trace[-1]), float(refit.iterations),
                bool(refit.converged), q_wall))
            rows.append(ResultRow(
                spec.scenario, f"{name}:cont", "bits", value, trial,
                float(result.trace[-1]), float(result.iterations),
                bool(result.converged), wall))
    return rows


def _run_region_cell(spec: ExperimentSpec, trial: int,
                     include_timing: bool) -> list:
    """Trace the two-user weight sweep over a single realization.

    Sharing the channel across weight fractions is what makes the per-user
    rows of one trial a boundary in the (user 0, user 1) current plane;
    each fraction still gets an independent optimizer seed.
    """
    rng_channel = np.random.default_rng(
        np.random.SeedSequence([spec.master_seed, 0, trial]))
    realization = generate_realization(spec.config, spec.layout, rng_channel,
                                       _default_pdp())
    rows: list = []
    for si, value in enumerate(spec.sweep_values):
        cfg, _ = _sweep_apply(spec, value)
        for alg_index, name in enumerate(spec.algorithms):
            runner = _ALGORITHMS[name]
            rng = np.random.default_rng(
                np.random.SeedSequence([spec.master_seed, si, trial,
                                        alg_index]))
            started = time.perf_counter()
            try:
                result = runner(realization, cfg, rng)
            except Exception:
                rows.extend(_failed_rows(spec, name, value, trial))
                continue
            wall = ((time.perf_counter() - started) * 1e3
                    if include_timing else 0.0)
            for user in range(cfg.n_users):
                rows.append(ResultRow(
                    spec.scenario, f"{name}:u{user}", "weight_fraction",
                    value, trial, float(result.per_user_currents[user]),
                    float(result.iterations), bool(result.converged), wall))
    return rows


def _run_convergence_cell(spec: ExperimentSpec, trial: int,
                          include_timing: bool) -> list:
    """One optimization per algorithm; a row per iteration checkpoint."""
    cfg, lay = spec.config, spec.layout
    rng_channel = np.random.default_rng(
        np.random.SeedSequence([spec.master_seed, 0, trial]))
    realization = generate_realization(cfg, lay, rng_channel, _default_pdp())
    rows: list = []
    for alg_index, name in enumerate(spec.algorithms):
        runner = _ALGORITHMS[name]
        rng = np.random.default_rng(
            np.random.SeedSequence([spec.master_seed, 0, trial, alg_index]))
        started = time.perf_counter()
        try:
            result = runner(realization, cfg, rng)
        except Exception:
            for value in spec.sweep_values:
                rows.append(ResultRow(spec.scenario, name, "iteration", value,
                                      trial, float("nan"), 0.0, False, 0.0))
            continue
        wall = (time.perf_counter() - started) * 1e3 if include_timing else 0.0
        trace = result.trace
        for value in spec.sweep_values:
            idx = min(int(value), trace.size - 1)
            rows.append(ResultRow(
                spec.scenario, name, "iteration", value, trial,
                float(trace[idx]), float(result.iterations),
                bool(result.converged), wall))
    return rows


def _aggregate(rows: list) -> list:
    """Mean rows per (sweep value, algorithm label), first-appearance order."""
    groups: dict = {}
    order: list = []
    for row in rows:
        key = (row.sweep_value, row.algorithm)
        if key not in groups:
            groups[key] = []
            order.append((key, row))
        groups[key].append(row)
    out = []
    for key, proto in order:
        members = groups[key]
        current = float(np.mean([r.current_amps for r in members]))
        iters = float(np.mean([r.iterations for r in members]))
        conv = float(np.mean([1.0 if r.converged else 0.0 for r in members]))
        wall = float(np.mean([r.wall_ms for r in members]))
        out.append(ResultRow(proto.scenario, proto.algorithm, proto.sweep_name,
                             proto.sweep_value, AGGREGATE, current, iters,
                             conv, wall))
    return out


def _scaling_metadata(aggregates: list) -> dict:
    """Log-log slope of aggregate current against the element sweep."""
    slopes: dict = {}
    fits: dict = {}
    by_alg: dict = {}
    for row in aggregates:
        by_alg.setdefault(row.algorithm, []).append(row)
    for name, rows in by_alg.items():
        pts = [(r.sweep_value, r.current_amps) for r in rows
               if r.current_amps > 0 and np.isfinite(r.current_amps)]
        if len(pts) < 2:
            continue
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
        ss_res = float(np.sum((y - pred) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        slopes[name] = float(slope)
        fits[name] = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"loglog_slope": slopes, "loglog_r_squared": fits}


def run_experiment(spec: ExperimentSpec, parallelism: int = 1, *,
                   include_timing: bool = False) -> ExperimentResult:
    """Execute every (sweep value, trial) cell and aggregate the rows.

    Cells fan out over a process pool when parallelism > 1; rows are
    assembled in (sweep index, trial) order either way, and all randomness
    derives from (master seed, sweep index, trial, algorithm index), so the
    output is identical at any worker count.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    # convergence, discrete_bits, and current_region share one realization
    # per trial across the whole sweep, so their unit of work is the trial
    per_trial = {"convergence": _run_convergence_cell,
                 "discrete_bits": _run_discrete_cell,
                 "current_region": _run_region_cell}.get(spec.scenario)
    if per_trial is not None:
        tasks = [(0, trial) for trial in range(spec.trials)]
        args = [(spec, ti, include_timing) for _, ti in tasks]
        worker = per_trial
    else:
        args = [(spec, si, ti, include_timing)
                for si in range(len(spec.sweep_values))
                for ti in range(spec.trials)]
        worker = _run_cell

    if parallelism == 1:
        blocks = [worker(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(worker, *a) for a in args]
            blocks = [f.result() for f in futures]

    trial_rows: list = []
    for block in blocks:
        trial_rows.extend(block)
    # order rows sweep-major; the generic path already is, the per-trial
    # scenarios interleave sweep values inside each cell
    if per_trial is not None:
        position = {v: i for i, v in enumerate(spec.sweep_values)}
        trial_rows.sort(key=lambda r: (position[r.sweep_value], r.trial))
    aggregates = _aggregate(trial_rows)
    metadata = {
        "master_seed": spec.master_seed,
        "config_hash": _config_hash(spec),
        "tool_version": TOOL_VERSION,
        "scenario": spec.scenario,
        "trials": spec.trials,
    }
    if spec.scenario == "scaling_check":
        metadata.update(_scaling_metadata(aggregates))
    return ExperimentResult(rows=tuple(trial_rows + aggregates),
                            metadata=metadata)


# --------------------------------------------------------------------------
# persistence

def _fmt(value: float) -> str:
    return f"{float(value):.12g}"


def _csv_cell(column: str, row: ResultRow) -> str:
    value = getattr(row, column)
    if column in ("scenario", "algorithm", "sweep_name"):
        return str(value)
    if column == "trial":
        return AGGREGATE if value == AGGREGATE else str(int(value))
    if column == "converged":
        if isinstance(value, bool):
            return "true" if value else "false"
        return _fmt(value)
    if column == "iterations":
        return _fmt(value)
    return _fmt(value)


def _json_value(column: str, row: ResultRow):
    value = getattr(row, column)
    if column in ("scenario", "algorithm", "sweep_name"):
        return str(value)
    if column == "trial":
        return AGGREGATE if value == AGGREGATE else int(value)
    if column == "converged" and isinstance(value, bool):
        return bool(value)
    num = float(value)
    if math.isnan(num) or math.isinf(num):
        return None
    return float(_fmt(num))


def write_results(result: ExperimentResult, path, fmt: str = "csv") -> None:
    """Persist rows (and, for JSON, metadata) to path; '-' writes stdout."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}; expected csv or json")
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in result.rows:
            lines.append(",".join(_csv_cell(c, row) for c in CSV_COLUMNS))
        payload = "\n".join(lines) + "\n"
    else:
        doc = {
            "metadata": result.metadata,
            "rows": [
                {c: _json_value(c, row) for c in CSV_COLUMNS}
                for row in result.rows
            ],
        }
        payload = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path == "-":
        sys.stdout.write(payload)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
