"""Waveform ascent steps: eigenvector update and single-user power allocation.

The waveform subproblem after linearization is a Hermitian form minimized
over the transmit-power ball, whose exact solution is the scaled minimum
eigenvector. The single-user route reduces further: once phases align every
tone, amplitudes are real and the same eigenvector iteration runs on a real
symmetric surrogate until the surrogate value stalls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quartic import (
    build_amplitude_surrogate,
    build_diagonal_bank,
    build_waveform_surrogate,
    compute_coefficients,
    surrogate_dc,
)
from .rectenna import RectennaParams, Waveform, idc_compact
from .solvers import smallest_eigenpair

__all__ = [
    "PowerAllocation",
    "waveform_step",
    "su_power_allocation",
    "assemble_su_waveform",
]

POWER_SLACK = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Non-negative per-tone amplitudes within the transmit-power budget.

    trace holds the DC current of each allocation iterate in order (entry 0
    is the starting allocation) and surrogate_trace the matching minorant
    value of each iterate linearized at its predecessor, so drivers can
    report the ascent without replaying the loop.
    """

    p: np.ndarray
    power_w: float
    iterations: int = 0
    converged: bool = True
    trace: tuple = ()
    surrogate_trace: tuple = ()

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("allocation must be a non-empty vector")
        if np.any(p < 0):
            raise ValueError("allocation amplitudes must be non-negative")
        if float(p @ p) > 2.0 * self.power_w + POWER_SLACK:
            raise ValueError("allocation exceeds the transmit-power budget")


def waveform_step(channels, prev_waveform: Waveform, weights, power_w: float,
                  params: RectennaParams) -> tuple:
    """One multi-user waveform update; returns (waveform, degenerate).

    Linearizes at prev_waveform against the given per-user composite
    channels, then takes the full-power minimum eigenvector of the surrogate.
    A non-negative minimum eigenvalue means the surrogate offers no descent
    direction (impossible with any nonzero channel, since the second-order
    term always pays); the previous waveform is returned with the flag set.
    """
    ch = np.atleast_2d(np.asarray(channels, dtype=np.complex128))
    weights = np.asarray(weights, dtype=float)
    if ch.shape[0] != weights.size:
        raise ValueError("channels and weights must align per user")
    banks = [build_diagonal_bank(ch[q]) for q in range(ch.shape[0])]
    prev = np.stack([compute_coefficients(bank, prev_waveform) for bank in banks])
    cost = build_waveform_surrogate(banks, prev, weights, params)
    lam, vec = smallest_eigenpair(cost)
    if lam >= 0.0:
        return prev_waveform, True
    return Waveform(np.sqrt(2.0 * power_w) * vec), False


def su_power_allocation(amplitudes, power_w: float, params: RectennaParams,
                        epsilon: float = 1e-4, i_max: int = 200, *,
                        init: str = "uniform",
                        rng: np.random.Generator | None = None) -> PowerAllocation:
    """Iterated amplitude allocation over an aligned real channel.

    Repeats surrogate build / minimum-eigenvector update, taking entrywise
    magnitudes (the surrogate matrix is entrywise non-positive, so the
    magnitude vector scores no worse than the raw eigenvector), until the
    relative surrogate change falls below epsilon or i_max is hit.
    """
    a = np.asarray(amplitudes, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("amplitudes must be a non-empty vector")
    if np.any(a < 0):
        raise ValueError("aligned amplitudes must be non-negative")
    if not np.any(a > 0):
        raise ValueError("at least one amplitude must be positive")
    if epsilon <= 0 or i_max < 1:
        raise ValueError("epsilon must be positive and i_max >= 1")
    n = a.size
    scale = np.sqrt(2.0 * power_w)
    if init == "uniform":
        p = np.full(n, scale / np.sqrt(n))
    elif init == "random":
        if rng is None:
            raise ValueError("random initialization needs an rng")
        draw = np.abs(rng.standard_normal(n)) + 1e-12
        p = scale * draw / np.linalg.norm(draw)
    else:
        raise ValueError(f"unknown init {init!r}")

    bank = build_diagonal_bank(a)
    b = compute_coefficients(bank, p.astype(np.complex128)).real
    surrogate_prev = None
    converged = False
    iterations = 0
    currents = [idc_compact(b, params)]
    minorants = [currents[0]]
    for iterations in range(1, i_max + 1):
        cost = build_amplitude_surrogate(bank, b, params)
        _, vec = smallest_eigenpair(cost)
        p = scale * np.abs(vec)
        b_prev = b
        b = compute_coefficients(bank, p.astype(np.complex128)).real
        currents.append(idc_compact(b, params))
        minorants.append(surrogate_dc(b, b_prev, params))
        surrogate = float(p @ cost @ p)
        if surrogate_prev is not None:
            if abs(surrogate - surrogate_prev) <= epsilon * max(abs(surrogate), 1e-300):
                converged = True
                break
        surrogate_prev = surrogate
    return PowerAllocation(p=p, power_w=power_w, iterations=iterations,
                           converged=converged, trace=tuple(currents),
                           surrogate_trace=tuple(minorants))


def assemble_su_waveform(allocation: PowerAllocation, h) -> Waveform:
    """Counter-rotate each tone so the channel-weighted waveform is real.

    s_n = p_n * conj(h_n)/|h_n|; tones with zero allocated power stay zero
    even on a dead channel, but positive power on a zero channel is a
    contract violation upstream.
    """
    hv = np.asarray(h, dtype=np.complex128)
    p = allocation.p
    if hv.shape != p.shape:
        raise ValueError("allocation and channel lengths differ")
    mags = np.abs(hv)
    dead = (mags == 0.0) & (p > 0.0)
    if np.any(dead):
        raise ValueError("positive power allocated to a zero channel tone")
    safe = np.where(mags > 0.0, mags, 1.0)
    return Waveform(p * np.conj(hv) / safe)
