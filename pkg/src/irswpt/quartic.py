"""Difference-index matrix structure behind the fourth-order DC objective.

The rectified DC current depends on the channel-weighted waveform c only
through lag coefficients x_k built from products of entries k subcarriers
apart. Every subproblem solved here is therefore a bilinear form: a bank of
structured matrices produces the lag coefficients for one decision variable
(waveform entries or surface phases), and a Hermitian surrogate matrix is
assembled by linearizing the convex quadratic part of the DC expression at
the previous iterate. Minimizing the surrogate form maximizes a global
under-estimator that touches the true objective at the iterate, which is
what makes the outer ascent monotone.

All four surrogates share the same skeleton: the block coupling tones n and
n' carries a factor gamma[n' - n] where gamma collects the linearization
coefficients (gamma_0 = -k2/2 - (3/4) k4 x_0, gamma_k = -(3/4) k4 conj(x_k)).

Lag conventions differ by bank family and are fixed here once:
tone banks pair conj(earlier) with later (x_k = sum conj(c_n) c_{n+k});
block banks pair earlier with conj(later) (x_k = sum c_n conj(c_{n+k})).
The DC value only sees x_0 and |x_k|, so the two families never mix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rectenna import RectennaParams, idc_compact

__all__ = [
    "DENSE_SIZE_LIMIT",
    "DiagonalBank",
    "BlockBank",
    "BlockSurrogateOperator",
    "CoefficientState",
    "build_aug_channel",
    "aug_channel_blocks",
    "build_weighted_blocks",
    "build_diagonal_bank",
    "build_block_bank",
    "compute_coefficients",
    "quadratic_weights",
    "surrogate_dc",
    "build_ff_surrogate",
    "build_fs_surrogate",
    "build_waveform_surrogate",
    "build_amplitude_surrogate",
]

# Above this matrix side length the per-tone-block operators stay implicit.
DENSE_SIZE_LIMIT = 1024

# Lag-0 coefficients are real by construction; larger residue means the
# caller fed inconsistent banks/vectors.
ENTRY0_IMAG_TOL = 1e-10


def _checked_real(value: complex) -> float:
    v = complex(value)
    if abs(v.imag) > ENTRY0_IMAG_TOL * max(abs(v.real), 1.0):
        raise ArithmeticError(
            f"lag-0 coefficient must be real; imaginary residue {v.imag:.3e} "
            f"against real part {v.real:.3e}"
        )
    return v.real


def _as_vector(x) -> np.ndarray:
    return np.asarray(getattr(x, "s", x), dtype=np.complex128)


@dataclass(frozen=True)
class DiagonalBank:
    """Superdiagonal slices of outer(conj(h), h) for a composite channel h.

    Slice k is nonzero only at (n, n+k) with value conj(h_n) h_{n+k}; the
    bilinear form conj(s) . slice_k . s yields the waveform lag coefficients.
    """

    channel: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.channel, dtype=np.complex128)
        if h.ndim != 1 or h.size == 0:
            raise ValueError("channel must be a non-empty vector")
        object.__setattr__(self, "channel", h)

    @property
    def n(self) -> int:
        return self.channel.size

    def matrix(self, k: int) -> np.ndarray:
        if not 0 <= k < self.n:
            raise ValueError(f"lag {k} out of range for {self.n} tones")
        h = self.channel
        return np.diag(np.conj(h[: self.n - k]) * h[k:], k)

    def full(self) -> np.ndarray:
        return np.outer(np.conj(self.channel), self.channel)


@dataclass(frozen=True)
class BlockBank:
    """Per-tone channel blocks z_n (rows) feeding the block-lag matrices.

    summed(k) collapses lag k across tones into one block-size matrix
    (common-phase subproblem); retained_dense(k) keeps each tone's
    contribution in its own block position (per-tone phase subproblem).
    """

    blocks: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.blocks, dtype=np.complex128)
        if z.ndim != 2 or z.size == 0:
            raise ValueError("blocks must be a (n_tones, block_size) array")
        object.__setattr__(self, "blocks", z)

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def block_size(self) -> int:
        return self.blocks.shape[1]

    def summed(self, k: int) -> np.ndarray:
        n = self.n_blocks
        if not 0 <= k < n:
            raise ValueError(f"lag {k} out of range for {n} tone blocks")
        z = self.blocks
        return np.einsum("ni,nj->ij", z[: n - k], np.conj(z[k:]))

    def retained_dense(self, k: int) -> np.ndarray:
        n, b = self.blocks.shape
        m = n * b
        if m > DENSE_SIZE_LIMIT:
            raise ValueError(
                f"dense retained-lag matrix of side {m} exceeds the "
                f"{DENSE_SIZE_LIMIT} limit; use the implicit operator"
            )
        if not 0 <= k < n:
            raise ValueError(f"lag {k} out of range for {n} tone blocks")
        out = np.zeros((m, m), dtype=np.complex128)
        z = self.blocks
        for i in range(n - k):
            j = i + k
            out[i * b:(i + 1) * b, j * b:(j + 1) * b] = np.outer(z[i], np.conj(z[j]))
        return out


def build_aug_channel(realization, user: int, subcarrier: int) -> np.ndarray:
    """Per-tone augmented channel: reflected path products then direct tap."""
    via_surface = realization.h_r[user, subcarrier] * realization.h_i[subcarrier]
    return np.concatenate([via_surface, [realization.h_d[user, subcarrier]]])


def aug_channel_blocks(realization, user: int) -> np.ndarray:
    """All tones at once: (n_tones, n_elements + 1)."""
    via_surface = realization.h_r[user] * realization.h_i
    direct = realization.h_d[user][:, np.newaxis]
    return np.concatenate([via_surface, direct], axis=1)


def build_weighted_blocks(aug_channel: np.ndarray, s) -> np.ndarray:
    """Stack of per-tone blocks aug_channel[n] * s_n, flattened."""
    aug = np.asarray(aug_channel, dtype=np.complex128)
    sv = _as_vector(s)
    if aug.ndim != 2 or aug.shape[0] != sv.size:
        raise ValueError("augmented channel must be (n_tones, block_size)")
    return (aug * sv[:, np.newaxis]).ravel()


def build_diagonal_bank(h) -> DiagonalBank:
    return DiagonalBank(np.asarray(h, dtype=np.complex128))


def build_block_bank(z_stacked, n_blocks: int) -> BlockBank:
    z = np.asarray(z_stacked, dtype=np.complex128).ravel()
    if n_blocks < 1 or z.size % n_blocks:
        raise ValueError("stacked length must be a multiple of n_blocks")
    return BlockBank(z.reshape(n_blocks, -1))


def _lag_left(c: np.ndarray) -> np.ndarray:
    # out[k] = sum_n conj(c_n) c_{n+k}
    return np.correlate(c, c, mode="full")[c.size - 1:]


def compute_coefficients(bank, vector) -> np.ndarray:
    """Lag coefficients of the bank contracted with a waveform or phase vector.

    DiagonalBank expects the waveform (length n); BlockBank expects either a
    single block-size phase vector applied to every tone, or a per-tone
    stack (n_tones x block_size, flat or 2-D). Entry 0 is checked real and
    stored with zero imaginary part.
    """
    vec = _as_vector(vector)
    if isinstance(bank, DiagonalBank):
        if vec.shape != (bank.n,):
            raise ValueError(f"expected waveform of length {bank.n}, got {vec.shape}")
        out = _lag_left(bank.channel * vec)
    elif isinstance(bank, BlockBank):
        n, b = bank.blocks.shape
        if vec.shape == (b,):
            c = bank.blocks @ vec
        elif vec.size == n * b:
            c = (bank.blocks * vec.reshape(n, b)).sum(axis=1)
        else:
            raise ValueError(
                f"expected a phase vector of length {b} or {n * b}, got {vec.shape}"
            )
        out = np.conj(_lag_left(c))
    else:
        raise TypeError(f"unsupported bank type {type(bank).__name__}")
    out[0] = _checked_real(out[0])
    return out


def quadratic_weights(n: int, params: RectennaParams) -> np.ndarray:
    """Diagonal of the PSD form mapping lag coefficients to the quartic DC term."""
    w = np.full(n, 0.75 * params.k4)
    w[0] = 0.375 * params.k4
    return w


def surrogate_dc(new, prev, params: RectennaParams) -> float:
    """Linearized DC value: tangent to the true DC at prev, below it elsewhere."""
    new = np.asarray(new, dtype=np.complex128)
    prev = np.asarray(prev, dtype=np.complex128)
    if new.shape != prev.shape:
        raise ValueError("coefficient vectors must have matching shapes")
    w = quadratic_weights(new.size, params)
    linear = 2.0 * float(np.sum(w * (np.conj(prev) * new).real))
    anchor = float(np.sum(w * np.abs(prev) ** 2))
    return 0.5 * params.k2 * new[0].real + linear - anchor


@dataclass
class CoefficientState:
    """Per-user lag coefficients at the current iterate, (n_users, n_tones)."""

    per_user: np.ndarray

    def __post_init__(self) -> None:
        arr = np.atleast_2d(np.asarray(self.per_user, dtype=np.complex128))
        self.per_user = arr

    def weighted_dc(self, params: RectennaParams, weights=None) -> float:
        k = self.per_user.shape[0]
        w = np.ones(k) if weights is None else np.asarray(weights, dtype=float)
        return float(sum(w[q] * idc_compact(self.per_user[q], params) for q in range(k)))


def _gamma_matrix(prev, params: RectennaParams) -> np.ndarray:
    """Hermitian Toeplitz coupling matrix G with G[i, j] = gamma[j - i]."""
    prev = np.asarray(prev, dtype=np.complex128).ravel()
    n = prev.size
    gam = np.empty(n, dtype=np.complex128)
    gam[0] = -0.5 * params.k2 - 0.75 * params.k4 * prev[0].real
    if n > 1:
        gam[1:] = -0.75 * params.k4 * np.conj(prev[1:])
    full = np.concatenate([np.conj(gam[:0:-1]), gam])
    i = np.arange(n)
    return full[(i[np.newaxis, :] - i[:, np.newaxis]) + n - 1]


def _check_users(banks, prev, weights):
    k = len(banks)
    prev = np.atleast_2d(np.asarray(prev, dtype=np.complex128))
    w = np.asarray(weights, dtype=float).ravel()
    if prev.shape[0] != k or w.size != k:
        raise ValueError("banks, previous coefficients and weights must align per user")
    return prev, w


def build_ff_surrogate(banks, prev, weights, params: RectennaParams) -> np.ndarray:
    """Hermitian block-size matrix to minimize over the common phase vector."""
    prev, w = _check_users(banks, prev, weights)
    b = banks[0].block_size
    out = np.zeros((b, b), dtype=np.complex128)
    for q, bank in enumerate(banks):
        # Block banks store lags conjugate to the tone convention the gamma
        # coefficients expect, hence the conjugated linearization point.
        g = _gamma_matrix(np.conj(prev[q]), params)
        z = bank.blocks
        out += w[q] * np.einsum("ab,ai,bj->ij", g, np.conj(z), z)
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class BlockSurrogateOperator:
    """Implicit Hermitian surrogate over all per-tone phase blocks.

    Entry (m, m') with m = (tone i, offset r), m' = (tone j, offset t) is
    sum_q w_q gamma_q[j - i] conj(z_q[i, r]) z_q[j, t]; rows and matvecs are
    computed from the factors so the full matrix is never required.
    """

    z_blocks: tuple
    gammas: tuple
    weights: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.z_blocks[0].shape[0]

    @property
    def block_size(self) -> int:
        return self.z_blocks[0].shape[1]

    @property
    def shape(self) -> tuple:
        m = self.n_blocks * self.block_size
        return (m, m)

    def row(self, m: int) -> np.ndarray:
        size = self.shape[0]
        if not 0 <= m < size:
            raise ValueError(f"row {m} out of range for size {size}")
        i, r = divmod(m, self.block_size)
        out = np.zeros((self.n_blocks, self.block_size), dtype=np.complex128)
        for z, g, w in zip(self.z_blocks, self.gammas, self.weights):
            out += (w * np.conj(z[i, r])) * (g[i][:, np.newaxis] * z)
        return out.ravel()

    def matvec(self, x) -> np.ndarray:
        xv = np.asarray(x, dtype=np.complex128).ravel()
        if xv.size != self.shape[0]:
            raise ValueError("vector length does not match operator size")
        x2 = xv.reshape(self.n_blocks, self.block_size)
        out = np.zeros_like(x2)
        for z, g, w in zip(self.z_blocks, self.gammas, self.weights):
            u = (z * x2).sum(axis=1)
            out += w * np.conj(z) * (g @ u)[:, np.newaxis]
        return out.ravel()

    def quad(self, theta) -> float:
        """Real value of the Hermitian form at a stacked phase vector."""
        tv = np.asarray(theta, dtype=np.complex128)
        t2 = tv.reshape(self.n_blocks, self.block_size)
        val = 0.0 + 0.0j
        for z, g, w in zip(self.z_blocks, self.gammas, self.weights):
            c = (z * t2).sum(axis=1)
            val += w * (np.conj(c) @ (g @ c))
        return _checked_real(val)

    def dense(self) -> np.ndarray:
        m = self.shape[0]
        if m > DENSE_SIZE_LIMIT:
            raise ValueError(
                f"dense surrogate of side {m} exceeds the {DENSE_SIZE_LIMIT} "
                f"limit; use row/matvec access"
            )
        out = np.zeros((m, m), dtype=np.complex128)
        for z, g, w in zip(self.z_blocks, self.gammas, self.weights):
            out += w * np.einsum("ab,ai,bj->aibj", g, np.conj(z), z).reshape(m, m)
        return 0.5 * (out + out.conj().T)


def build_fs_surrogate(banks, prev, weights, params: RectennaParams) -> BlockSurrogateOperator:
    """Implicit Hermitian operator to minimize over per-tone phase blocks."""
    prev, w = _check_users(banks, prev, weights)
    shapes = {b.blocks.shape for b in banks}
    if len(shapes) != 1:
        raise ValueError("all user banks must share (n_tones, block_size)")
    # Same conjugation as the common-phase builder: block-bank lags are the
    # conjugates of what the tone-convention gammas linearize against.
    gammas = tuple(_gamma_matrix(np.conj(prev[q]), params) for q in range(len(banks)))
    return BlockSurrogateOperator(
        z_blocks=tuple(b.blocks for b in banks), gammas=gammas, weights=w
    )


def build_waveform_surrogate(banks, prev, weights, params: RectennaParams) -> np.ndarray:
    """Hermitian n_tones matrix to minimize over the waveform vector."""
    prev, w = _check_users(banks, prev, weights)
    n = banks[0].n
    out = np.zeros((n, n), dtype=np.complex128)
    for q, bank in enumerate(banks):
        # Superdiagonal slice k of the channel outer product scaled by
        # gamma_k is exactly the Hadamard product with the coupling matrix.
        out += w[q] * bank.full() * _gamma_matrix(prev[q], params)
    return 0.5 * (out + out.conj().T)


def build_amplitude_surrogate(bank: DiagonalBank, prev, params: RectennaParams) -> np.ndarray:
    """Real symmetric surrogate over non-negative per-tone amplitudes."""
    if np.any(np.abs(bank.channel.imag) > 0):
        raise ValueError("amplitude surrogate expects a real amplitude bank")
    prev = np.asarray(prev)
    if np.iscomplexobj(prev) and np.any(np.abs(prev.imag) > 0):
        raise ValueError("amplitude surrogate expects real lag coefficients")
    out = build_waveform_surrogate([bank], prev.real[np.newaxis, :], [1.0], params)
    return out.real.copy()
