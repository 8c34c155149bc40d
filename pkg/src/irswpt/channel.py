"""Frequency-selective Rayleigh channel generation over the simulation layout.

Each link (direct, incident on the surface, reflected off the surface) is an
independent tapped delay line whose taps are i.i.d. circularly-symmetric
complex Gaussians with mean powers following a configurable power delay
profile. Frequency responses are evaluated at baseband subcarrier offsets
n * delta_f; the carrier only enters through the distance-dependent pathloss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .rectenna import SystemConfig

__all__ = [
    "Layout",
    "PowerDelayProfile",
    "ChannelRealization",
    "pathloss",
    "layout_distances",
    "generate_taps",
    "frequency_response",
    "generate_realization",
]

DEFAULT_PDP_RESOURCE = "office_18tap_pdp.txt"


@dataclass(frozen=True)
class Layout:
    """Geometry and pathloss model of the transmitter / surface / user setup.

    d_h and d_v place the reflecting surface relative to the transmitter
    (horizontal and vertical offsets); d_d is the transmitter-user distance,
    with the user on the horizontal axis. r0 is the linear reference power
    gain at distance d0.
    """

    d_h: float = 2.0
    d_v: float = 2.0
    d_d: float = 15.0
    nu_direct: float = 2.0
    nu_incident: float = 2.0
    nu_reflected: float = 2.0
    r0: float = 10 ** (-35 / 10)
    d0: float = 1.0

    def __post_init__(self) -> None:
        if min(self.d_h, self.d_v, self.d_d, self.d0) <= 0:
            raise ValueError("all distances must be positive")
        if min(self.nu_direct, self.nu_incident, self.nu_reflected) < 0:
            raise ValueError("pathloss exponents must be non-negative")
        if self.r0 <= 0:
            raise ValueError("reference gain r0 must be positive")


def pathloss(distance: float, exponent: float, layout: Layout) -> float:
    """Linear power gain r0 * (distance/d0)^(-exponent)."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return layout.r0 * (distance / layout.d0) ** (-exponent)


def layout_distances(layout: Layout) -> tuple[float, float]:
    """(incident, reflected) link distances implied by the geometry."""
    d_i = math.hypot(layout.d_h, layout.d_v)
    d_r = math.hypot(layout.d_v, layout.d_d - layout.d_h)
    return d_i, d_r


@dataclass(frozen=True)
class PowerDelayProfile:
    """Tap delays (s) and mean linear tap powers, normalized to sum to 1."""

    tap_delays: np.ndarray
    tap_powers: np.ndarray

    def __post_init__(self) -> None:
        delays = np.asarray(self.tap_delays, dtype=float)
        powers = np.asarray(self.tap_powers, dtype=float)
        object.__setattr__(self, "tap_delays", delays)
        object.__setattr__(self, "tap_powers", powers)
        if delays.shape != powers.shape or delays.ndim != 1 or delays.size == 0:
            raise ValueError("delays and powers must be equal-length non-empty vectors")
        if np.any(delays < 0) or np.any(np.diff(delays) <= 0):
            raise ValueError("delays must be non-negative and strictly increasing")
        if np.any(powers < 0):
            raise ValueError("tap powers must be non-negative")
        if abs(powers.sum() - 1.0) > 1e-12:
            raise ValueError("tap powers must sum to 1 (use the constructors to renormalize)")

    def __len__(self) -> int:
        return self.tap_delays.size

    @classmethod
    def from_arrays(cls, delays_s, powers_linear) -> "PowerDelayProfile":
        powers = np.asarray(powers_linear, dtype=float)
        total = powers.sum()
        if total <= 0:
            raise ValueError("profile has no power")
        return cls(np.asarray(delays_s, dtype=float), powers / total)

    @classmethod
    def from_file(cls, path) -> "PowerDelayProfile":
        """Load a two-column text profile: delay_ns power_db, '#' comments."""
        delays = []
        powers_db = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'delay_ns power_db', got {raw!r}")
                delays.append(float(parts[0]) * 1e-9)
                powers_db.append(float(parts[1]))
        powers = 10 ** (np.asarray(powers_db) / 10)
        return cls.from_arrays(np.asarray(delays), powers)

    @classmethod
    def default(cls) -> "PowerDelayProfile":
        """Bundled 18-tap indoor office profile."""
        ref = resources.files("irswpt.data").joinpath(DEFAULT_PDP_RESOURCE)
        with resources.as_file(ref) as path:
            return cls.from_file(path)

    @classmethod
    def exponential(cls, n_taps: int = 18, tap_spacing_s: float = 10e-9,
                    decay_s: float = 50e-9) -> "PowerDelayProfile":
        """Fallback profile: uniformly spaced taps with exponential decay."""
        if n_taps < 1:
            raise ValueError("n_taps must be >= 1")
        delays = np.arange(n_taps) * tap_spacing_s
        powers = np.exp(-delays / decay_s)
        return cls.from_arrays(delays, powers)

    @classmethod
    def single_tap(cls) -> "PowerDelayProfile":
        return cls(np.zeros(1), np.ones(1))


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all links.

    h_d: (K, N) direct responses; h_i: (N, L) incident responses;
    h_r: (K, N, L) reflected responses. Pathloss is already applied.
    """

    h_d: np.ndarray
    h_i: np.ndarray
    h_r: np.ndarray

    def __post_init__(self) -> None:
        h_d = np.asarray(self.h_d, dtype=np.complex128)
        h_i = np.asarray(self.h_i, dtype=np.complex128)
        h_r = np.asarray(self.h_r, dtype=np.complex128)
        object.__setattr__(self, "h_d", h_d)
        object.__setattr__(self, "h_i", h_i)
        object.__setattr__(self, "h_r", h_r)
        if h_d.ndim != 2 or h_i.ndim != 2 or h_r.ndim != 3:
            raise ValueError("h_d must be (K,N), h_i (N,L), h_r (K,N,L)")
        k, n = h_d.shape
        if h_i.shape[0] != n or h_r.shape != (k, n, h_i.shape[1]):
            raise ValueError("channel dimensions are inconsistent")
        for arr in (h_d, h_i, h_r):
            if not np.all(np.isfinite(arr.view(float))):
                raise ValueError("channel entries must be finite")

    @property
    def n_users(self) -> int:
        return self.h_d.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.h_d.shape[1]

    @property
    def n_elements(self) -> int:
        return self.h_i.shape[1]


def generate_taps(pdp: PowerDelayProfile, rng: np.random.Generator) -> np.ndarray:
    """One tapped-delay-line draw: tap t ~ CSCG with variance tap_powers[t]."""
    scale = np.sqrt(pdp.tap_powers / 2.0)
    re = rng.standard_normal(len(pdp))
    im = rng.standard_normal(len(pdp))
    return scale * (re + 1j * im)


def frequency_response(taps: np.ndarray, pdp: PowerDelayProfile,
                       n_subcarriers: int, spacing_hz: float) -> np.ndarray:
    """Baseband response H[n] = sum_t taps[t] exp(-j 2pi n spacing delay[t])."""
    if n_subcarriers < 1:
        raise ValueError("n_subcarriers must be >= 1")
    if spacing_hz <= 0:
        raise ValueError("spacing must be positive")
    taps = np.asarray(taps, dtype=np.complex128)
    offsets = np.arange(n_subcarriers) * spacing_hz
    phase = np.exp(-2j * np.pi * np.outer(offsets, pdp.tap_delays))
    return phase @ taps


def generate_realization(config: SystemConfig, layout: Layout, rng: np.random.Generator,
                         pdp: PowerDelayProfile | None = None) -> ChannelRealization:
    """Draw all links independently and apply sqrt pathloss per link.

    Draw order is fixed (direct per user, incident per element, reflected per
    user nested over elements) so a given stream is reproducible.
    """
    if pdp is None:
        pdp = PowerDelayProfile.default()
    n = config.n_subcarriers
    l = config.n_elements
    k = config.n_users
    df = config.delta_f_hz
    d_i, d_r = layout_distances(layout)
    g_d = math.sqrt(pathloss(layout.d_d, layout.nu_direct, layout))
    g_i = math.sqrt(pathloss(d_i, layout.nu_incident, layout))
    g_r = math.sqrt(pathloss(d_r, layout.nu_reflected, layout))

    h_d = np.empty((k, n), dtype=np.complex128)
    for q in range(k):
        h_d[q] = g_d * frequency_response(generate_taps(pdp, rng), pdp, n, df)
    h_i = np.empty((n, l), dtype=np.complex128)
    for el in range(l):
        h_i[:, el] = g_i * frequency_response(generate_taps(pdp, rng), pdp, n, df)
    h_r = np.empty((k, n, l), dtype=np.complex128)
    for q in range(k):
        for el in range(l):
            h_r[q, :, el] = g_r * frequency_response(generate_taps(pdp, rng), pdp, n, df)
    return ChannelRealization(h_d, h_i, h_r)
