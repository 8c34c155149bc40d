"""Nonlinear rectenna model: harvested DC current from a multisine input.

The rectifier diode is expanded to 4th order, so the DC output for a received
multisine y(t) = Re{sum_n h_n s_n e^{j2pi f_n t}} is

    i_dc = k2 * E{y^2} + k4 * E{y^4}
         = (1/2) k2 sum_n |c_n|^2
           + (3/8) k4 sum_{n1+n3=n2+n4} c_{n1}* c_{n2} c_{n3}* c_{n4}

with c_n = h_n s_n. Only frequency quadruples whose indices satisfy
n1 + n3 = n2 + n4 contribute a DC component; everything else mixes to a
nonzero frequency and is rejected by the harvester's low-pass output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RectennaParams",
    "SystemConfig",
    "Waveform",
    "PhaseConfig",
    "composite_channel",
    "idc_direct",
    "idc_compact",
    "idc_time_oracle",
    "weighted_sum_idc",
    "idc_coefficients",
]

# Relative imaginary residue above this in any i_dc evaluation indicates a
# matrix-construction bug upstream and raises instead of silently truncating.
IMAG_RESIDUE_TOL = 1e-8

# Quadruple enumeration is an O(N^3) correctness oracle, not a production path.
DIRECT_MAX_N = 16


@dataclass(frozen=True)
class RectennaParams:
    """Diode model coefficients for the truncated nonlinear rectifier.

    k2 and k4 are the effective 2nd/4th-order coefficients. The diode
    parameters (i_s, n_prime, v_t, r_ant) are retained for documentation and
    for deriving k2/k4 via from_diode; the defaults store the coefficient
    values directly since the antenna resistance behind them is not pinned
    down by the coefficient pair alone.
    """

    k2: float = 0.17
    k4: float = 957.25
    i_s: float = 5e-6
    n_prime: float = 1.05
    v_t: float = 25.86e-3
    r_ant: float | None = None
    truncation_order: int = 4

    def __post_init__(self) -> None:
        if self.k2 <= 0 or self.k4 <= 0:
            raise ValueError("k2 and k4 must be positive")
        if self.truncation_order != 4:
            raise ValueError("truncation order is fixed at 4")

    @classmethod
    def from_diode(cls, i_s: float, n_prime: float, v_t: float, r_ant: float) -> "RectennaParams":
        """Derive k_i = beta_i * r_ant^(i/2) with beta_i = i_s / (i! (n' v_t)^i)."""
        vd = n_prime * v_t
        beta2 = i_s / (2.0 * vd**2)
        beta4 = i_s / (24.0 * vd**4)
        return cls(k2=beta2 * r_ant, k4=beta4 * r_ant**2,
                   i_s=i_s, n_prime=n_prime, v_t=v_t, r_ant=r_ant)


@dataclass(frozen=True)
class SystemConfig:
    """Static system dimensions and optimization settings.

    Subcarriers are equally spaced: f_n = f0 + n * delta_f with
    delta_f = bandwidth / n_subcarriers. The transmit power constraint is
    (1/2)||s||^2 <= power_w.
    """

    n_subcarriers: int = 16
    n_elements: int = 20
    n_users: int = 1
    power_w: float = 10 ** (36 / 10) * 1e-3
    f0_hz: float = 5.18e9
    bandwidth_hz: float = 10e6
    user_weights: tuple[float, ...] | None = None
    epsilon: float = 1e-4
    i_max: int = 200
    gr_candidates: int = 1000

    def __post_init__(self) -> None:
        if self.n_subcarriers < 1 or self.n_elements < 1 or self.n_users < 1:
            raise ValueError("n_subcarriers, n_elements, n_users must be >= 1")
        if self.power_w <= 0:
            raise ValueError("power_w must be positive")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.i_max < 1:
            raise ValueError("i_max must be >= 1")
        if self.gr_candidates < 1:
            raise ValueError("gr_candidates must be >= 1")
        w = self.weights
        if len(w) != self.n_users:
            raise ValueError("user_weights length must equal n_users")
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("user_weights must be non-negative with at least one positive")

    @property
    def delta_f_hz(self) -> float:
        return self.bandwidth_hz / self.n_subcarriers

    @property
    def weights(self) -> np.ndarray:
        if self.user_weights is None:
            return np.ones(self.n_users)
        return np.asarray(self.user_weights, dtype=float)


@dataclass(frozen=True)
class Waveform:
    """Complex multisine weights s_n = w_n e^{j gamma_n}, one per subcarrier."""

    s: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=np.complex128)
        object.__setattr__(self, "s", s)
        if s.ndim != 1 or s.size < 1:
            raise ValueError("waveform must be a non-empty 1-D complex vector")
        if not np.all(np.isfinite(s.view(float))):
            raise ValueError("waveform entries must be finite")

    @property
    def power(self) -> float:
        """Transmit power (1/2)||s||^2 in watts."""
        return 0.5 * float(np.vdot(self.s, self.s).real)

    def check_budget(self, power_w: float, slack: float = 1e-9) -> None:
        if self.power > power_w + slack:
            raise ValueError(f"waveform power {self.power:.6e} exceeds budget {power_w:.6e}")


@dataclass(frozen=True)
class PhaseConfig:
    """Reflection phases: one phasor per element (mode 'ff', shape (L,)) or
    one per element per subcarrier (mode 'fs', shape (N, L))."""

    mode: str
    theta: np.ndarray

    def __post_init__(self) -> None:
        if self.mode not in ("ff", "fs"):
            raise ValueError("mode must be 'ff' or 'fs'")
        th = np.asarray(self.theta, dtype=np.complex128)
        object.__setattr__(self, "theta", th)
        if self.mode == "ff" and th.ndim != 1:
            raise ValueError("ff phases must be a 1-D vector of length L")
        if self.mode == "fs" and th.ndim != 2:
            raise ValueError("fs phases must be an (N, L) matrix")
        if th.size and np.max(np.abs(np.abs(th) - 1.0)) > 1e-12:
            raise ValueError("phase entries must be unit modulus within 1e-12")

    @classmethod
    def ff(cls, theta: np.ndarray) -> "PhaseConfig":
        return cls("ff", theta)

    @classmethod
    def fs(cls, theta: np.ndarray) -> "PhaseConfig":
        return cls("fs", theta)

    def as_matrix(self, n_subcarriers: int) -> np.ndarray:
        """Phases as an (N, L) matrix; FF rows are identical."""
        if self.mode == "fs":
            if self.theta.shape[0] != n_subcarriers:
                raise ValueError("fs phase matrix does not match subcarrier count")
            return self.theta
        return np.broadcast_to(self.theta, (n_subcarriers, self.theta.shape[0]))


def composite_channel(realization, phases: PhaseConfig, user: int) -> np.ndarray:
    """Direct path plus the per-element reflected cascade for one user.

    h_{q,n} = h_d[q,n] + sum_l h_r[q,n,l] * theta[n,l] * h_i[n,l]
    """
    h_d = realization.h_d
    if not 0 <= user < h_d.shape[0]:
        raise ValueError(f"user index {user} out of range")
    n = h_d.shape[1]
    theta = phases.as_matrix(n)
    if theta.shape[1] != realization.h_i.shape[1]:
        raise ValueError("phase element count does not match channel")
    reflected = np.einsum("nl,nl,nl->n", realization.h_r[user], theta, realization.h_i)
    return h_d[user] + reflected


def _real_with_residue_check(value: complex, context: str) -> float:
    scale = max(abs(value), 1e-300)
    if abs(value.imag) / scale > IMAG_RESIDUE_TOL:
        raise ArithmeticError(
            f"{context}: imaginary residue {value.imag:.3e} exceeds "
            f"{IMAG_RESIDUE_TOL:g} relative (value {value!r})")
    return float(value.real)


_QUAD_INDEX_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}


def _quadruple_indices(n: int):
    """All (n1, n2, n3, n4) in [0, N)^4 with n1 + n3 = n2 + n4."""
    cached = _QUAD_INDEX_CACHE.get(n)
    if cached is None:
        n1, n2, n3 = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        n4 = n1 + n3 - n2
        valid = (n4 >= 0) & (n4 < n)
        cached = (n1[valid], n2[valid], n3[valid], n4[valid])
        _QUAD_INDEX_CACHE[n] = cached
    return cached


def idc_direct(s: Waveform | np.ndarray, h: np.ndarray, params: RectennaParams) -> float:
    """DC current by exhaustive enumeration of the frequency quadruples.

    Exact evaluation of the 4th-order term over every index tuple with
    n1 + n3 = n2 + n4. Gated to N <= 16; beyond that use the compact path.
    """
    sv = s.s if isinstance(s, Waveform) else np.asarray(s, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if sv.shape != h.shape:
        raise ValueError("waveform and channel lengths differ")
    n = sv.size
    if n > DIRECT_MAX_N:
        raise ValueError(f"idc_direct is gated to N <= {DIRECT_MAX_N}; use the compact path")
    c = h * sv
    second = 0.5 * params.k2 * float(np.sum(np.abs(c) ** 2))
    n1, n2, n3, n4 = _quadruple_indices(n)
    quad = np.sum(np.conj(c[n1]) * c[n2] * np.conj(c[n3]) * c[n4])
    fourth = (3.0 / 8.0) * params.k4 * _real_with_residue_check(complex(quad), "idc_direct")
    return second + fourth


def idc_coefficients(s: Waveform | np.ndarray, h: np.ndarray) -> np.ndarray:
    """Correlation coefficients b_k = sum_n c_n* c_{n+k} with c = h*s, k = 0..N-1."""
    sv = s.s if isinstance(s, Waveform) else np.asarray(s, dtype=np.complex128)
    c = np.asarray(h, dtype=np.complex128) * sv
    n = c.size
    return np.array([np.vdot(c[: n - k], c[k:]) for k in range(n)], dtype=np.complex128)


def idc_compact(b: np.ndarray, params: RectennaParams) -> float:
    """DC current from correlation coefficients: the quadruple sum collapses to
    b0^2 + 2 sum_{k>=1} |b_k|^2."""
    b = np.asarray(b, dtype=np.complex128)
    b0 = _real_with_residue_check(complex(b[0]), "idc_compact b[0]")
    if b0 < -1e-12:
        raise ValueError("b[0] must be real non-negative")
    tail = float(np.sum(np.abs(b[1:]) ** 2))
    return 0.5 * params.k2 * b0 + (3.0 / 8.0) * params.k4 * b0**2 + (3.0 / 4.0) * params.k4 * tail


def idc_time_oracle(s: Waveform | np.ndarray, h: np.ndarray, params: RectennaParams,
                    n_samples: int = 10**5) -> float:
    """Independent oracle: sample the received waveform in time and average the
    pointwise diode polynomial k2 y^2 + k4 y^4.

    The tones are placed at (kappa + n) * delta_f with kappa = 2N so that no
    odd-order mixing product lands on DC; uniform sampling over one fundamental
    period then rejects every non-DC term exactly (discrete orthogonality),
    making the oracle exact up to float rounding.
    """
    if n_samples < 10**4:
        raise ValueError("n_samples must be at least 1e4")
    sv = s.s if isinstance(s, Waveform) else np.asarray(s, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    c = h * sv
    n = c.size
    kappa = 2 * n
    if n_samples <= 4 * (kappa + n):
        raise ValueError("n_samples too small for exact tone rejection")
    k = np.arange(n_samples)
    tones = kappa + 1 + np.arange(n)
    y = np.real(np.exp(2j * np.pi * np.outer(k, tones) / n_samples) @ c)
    return float(np.mean(params.k2 * y**2 + params.k4 * y**4))


def weighted_sum_idc(s: Waveform | np.ndarray, phases: PhaseConfig, realization,
                     params: RectennaParams, weights: np.ndarray) -> float:
    """Weighted sum of per-user DC currents: sum_q xi_q i_dc,q.

    Uses the direct quadruple enumeration at small N and the algebraically
    identical compact form above the enumeration gate.
    """
    weights = np.asarray(weights, dtype=float)
    sv = s.s if isinstance(s, Waveform) else np.asarray(s, dtype=np.complex128)
    total = 0.0
    for q, xi in enumerate(weights):
        if xi == 0.0:
            continue
        h_q = composite_channel(realization, phases, q)
        if sv.size <= DIRECT_MAX_N:
            total += xi * idc_direct(sv, h_q, params)
        else:
            total += xi * idc_compact(idc_coefficients(sv, h_q), params)
    return total
