"""Single passive-beamforming ascent steps for the three surface modes.

Each step linearizes the DC objective at the current (waveform, phases)
iterate, solves the resulting phase subproblem, and returns a strictly
feasible unit-modulus configuration:

* frequency-flat surfaces: unit-diagonal SDP over the phase outer product,
  followed by rank-one extraction and auxiliary normalization;
* per-subcarrier surfaces: one deterministic coordinate-ascent sweep over
  all phase entries plus the per-tone auxiliaries;
* single-user per-subcarrier surfaces: closed-form phase alignment that
  turns the composite channel real non-negative tone by tone.

The per-tone sweep optimizes the auxiliary entries like any other
coordinate. Dividing each block by its auxiliary afterwards preserves
per-tone amplitudes but rotates tones against each other, so the sweep's
exact final objective is recovered by also rotating waveform entry n by the
auxiliary phase; the auxiliaries are stored on the step state for the caller
to apply (drivers in the optimize module do).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quartic import (
    aug_channel_blocks,
    build_block_bank,
    build_ff_surrogate,
    build_fs_surrogate,
    build_weighted_blocks,
    compute_coefficients,
)
from .rectenna import PhaseConfig, RectennaParams, Waveform, weighted_sum_idc
from .solvers import (
    SdpSolution,
    gaussian_randomization,
    normalize_by_auxiliary,
    solve_unit_diag_sdp,
)

__all__ = ["BeamformStepState", "ff_step", "fs_ewu_step", "su_fs_phases"]

# Below this coupling magnitude a coordinate has no phase preference and the
# sweep keeps its current value (determinism over noise-driven flips).
EWU_SKIP_TOL = 1e-14


@dataclass
class BeamformStepState:
    """Mutable carrier of the phase iterate between ascent steps.

    coefficients holds the per-user lag vectors consistent with (phases,
    waveform) as of the last step; aux holds the per-tone auxiliary phasors
    of the last per-tone sweep (to be folded into the waveform); sdp_warm
    and last_sdp carry solver state and diagnostics for the flat-surface path.
    """

    phases: PhaseConfig
    coefficients: np.ndarray | None = None
    aux: np.ndarray | None = None
    sdp_warm: np.ndarray | None = field(default=None, repr=False)
    last_sdp: SdpSolution | None = field(default=None, repr=False)


def _user_banks(realization, waveform: Waveform):
    n = realization.n_subcarriers
    return [
        build_block_bank(
            build_weighted_blocks(aug_channel_blocks(realization, q), waveform), n
        )
        for q in range(realization.n_users)
    ]


def ff_step(realization, waveform: Waveform, state: BeamformStepState, weights,
            params: RectennaParams, rng: np.random.Generator, *,
            gr_candidates: int = 1000, sdp_tol: float = 1e-7,
            sdp_max_iter: int = 5000) -> PhaseConfig:
    """One flat-surface phase update via the unit-diagonal SDP.

    Linearizes at the current iterate, solves for the phase outer product,
    extracts a unit-modulus vector (exactly when the relaxation is tight,
    by randomization otherwise, scoring candidates with the true
    weighted-sum current), and keeps the previous phases if extraction ever
    scores below them, so the step never decreases the objective.
    """
    if state.phases.mode != "ff":
        raise ValueError("ff_step requires flat-surface phases")
    weights = np.asarray(weights, dtype=float)
    banks = _user_banks(realization, waveform)
    theta_aug = np.concatenate([state.phases.theta, [1.0 + 0.0j]])
    prev = np.stack([compute_coefficients(bank, theta_aug) for bank in banks])
    cost = build_ff_surrogate(banks, prev, weights, params)
    sol = solve_unit_diag_sdp(cost, tol=sdp_tol, max_iter=sdp_max_iter,
                              warm=state.sdp_warm)

    def score(candidate: np.ndarray) -> float:
        phases = PhaseConfig.ff(normalize_by_auxiliary(candidate))
        return weighted_sum_idc(waveform, phases, realization, params, weights)

    extracted = gaussian_randomization(sol, score, gr_candidates, rng)
    new_phases = PhaseConfig.ff(normalize_by_auxiliary(extracted))
    before = weighted_sum_idc(waveform, state.phases, realization, params, weights)
    after = weighted_sum_idc(waveform, new_phases, realization, params, weights)
    if after < before:
        new_phases = state.phases
    state.phases = new_phases
    final_aug = np.concatenate([new_phases.theta, [1.0 + 0.0j]])
    state.coefficients = np.stack(
        [compute_coefficients(bank, final_aug) for bank in banks]
    )
    state.aux = None
    state.sdp_warm = sol.warm
    state.last_sdp = sol
    return new_phases


def fs_ewu_step(realization, waveform: Waveform, state: BeamformStepState, weights,
                params: RectennaParams) -> PhaseConfig:
    """One ascending-index coordinate sweep over all per-tone phase entries.

    Works on the negated surrogate so each coordinate move is a closed-form
    ascent: with coupling u_m = -sum_{j != m} k_mj theta_j, the best
    unit-modulus value is u_m/|u_m|; couplings below EWU_SKIP_TOL keep the
    current value. Auxiliaries are swept like regular entries, divided out
    of each block at the end, and stored in state.aux.
    """
    if state.phases.mode != "fs":
        raise ValueError("fs_ewu_step requires per-subcarrier phases")
    weights = np.asarray(weights, dtype=float)
    banks = _user_banks(realization, waveform)
    n = realization.n_subcarriers
    block = realization.n_elements + 1
    theta = np.concatenate(
        [state.phases.theta, np.ones((n, 1), dtype=np.complex128)], axis=1
    ).ravel()
    prev = np.stack([compute_coefficients(bank, theta) for bank in banks])
    op = build_fs_surrogate(banks, prev, weights, params)

    # w tracks (-K) @ theta; each accepted move costs one row build.
    w = -op.matvec(theta)
    for m in range(n * block):
        row = -op.row(m)
        coupling = w[m] - row[m] * theta[m]
        if abs(coupling) < EWU_SKIP_TOL:
            continue
        new_val = coupling / abs(coupling)
        delta = new_val - theta[m]
        w += np.conj(row) * delta
        theta[m] = new_val

    grid = theta.reshape(n, block)
    aux = grid[:, -1].copy()
    blocks = grid[:, :-1] / aux[:, np.newaxis]
    blocks /= np.abs(blocks)
    new_phases = PhaseConfig.fs(blocks)
    state.phases = new_phases
    state.aux = aux
    state.coefficients = np.stack(
        [compute_coefficients(bank, theta) for bank in banks]
    )
    state.sdp_warm = None
    state.last_sdp = None
    return new_phases


def su_fs_phases(realization) -> tuple:
    """Closed-form single-user alignment: waveform phases and surface phases.

    Returns (gamma, phases) with gamma the per-tone waveform phase angles
    and phases the per-tone surface configuration; applying both makes each
    composite tone amplitude the plain sum of its path amplitudes.
    """
    if realization.n_users != 1:
        raise ValueError("closed-form alignment is defined for a single user")
    gamma = -np.angle(realization.h_d[0])
    psi = -(
        gamma[:, np.newaxis]
        + np.angle(realization.h_i)
        + np.angle(realization.h_r[0])
    )
    return gamma, PhaseConfig.fs(np.exp(1j * psi))
