"""Dependency-free numerical kernels: eigenpairs, unit-diagonal SDP, extraction.

Three solvers the optimization layers delegate to:

* extreme Hermitian eigenpairs via a cyclic Jacobi iteration (JIT-compiled
  when numba is installed, plain Python otherwise), with a fixed phase
  convention so repeated calls are bit-stable;
* the unit-diagonal semidefinite program min Tr(K X), solved by row-coordinate
  descent on the full-rank factorization X = Y Yᴴ (every iterate exactly
  feasible), certified through the diagonal dual multipliers, with an
  over-relaxed operator-splitting fallback for the rare instances the
  factorized phase cannot certify;
* Gaussian-randomization extraction of a unit-modulus vector from an SDP
  solution, exact when the solution is numerically rank one.

The SDP certificate convention used throughout: given diagonal multipliers
tau, the dual slack is Upsilon = K - diag(tau). A solution is accepted when
Upsilon is PSD within tol and the duality gap |Tr(K X) - sum(tau)| (equal to
Tr(Upsilon X) on unit-diagonal X) is below tol, both relative to ||K||_F.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def deco(fn):
            return fn

        return deco

__all__ = [
    "KktResiduals",
    "SdpSolution",
    "smallest_eigenpair",
    "solve_unit_diag_sdp",
    "gaussian_randomization",
    "normalize_by_auxiliary",
]

HERMITIAN_TOL = 1e-10
# Jacobi is quadratically convergent and deterministic but O(n^3) per sweep;
# above this size fall back to LAPACK, which no workload here reaches anyway.
JACOBI_MAX_SIZE = 256
RANK1_THRESHOLD = 1e-6
SAMPLING_EIG_FLOOR = -1e-8
SDP_SWEEP_LIMIT = 2000
SDP_ESCAPE_LIMIT = 8
SDP_CERT_EVERY = 5
SDP_RHO = 0.3
SDP_OVER_RELAX = 1.6
SDP_FALLBACK_CHECK_EVERY = 10


def _require_hermitian(a, what: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{what} must be a square matrix")
    deviation = np.linalg.norm(arr - arr.conj().T)
    if deviation > HERMITIAN_TOL * max(np.linalg.norm(arr), 1.0):
        raise ValueError(
            f"{what} is not Hermitian: asymmetry {deviation:.3e} exceeds tolerance"
        )
    return 0.5 * (arr + arr.conj().T)


@njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):  # pragma: no cover - timing-critical loop
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if np.sqrt(2.0 * off) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                m = abs(b)
                if m == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                ph = b / m
                theta = 0.5 * np.arctan2(2.0 * m, app - aqq)
                c = np.cos(theta)
                s = np.sin(theta)
                se_m = s * np.conj(ph)
                se_p = s * ph
                ce_m = c * np.conj(ph)
                ce_p = c * ph
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip + se_m * aiq
                    a[i, q] = -s * aip + ce_m * aiq
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = c * api + se_p * aqi
                    a[q, i] = -s * api + ce_p * aqi
                # Rotation zeroes (p, q) exactly in exact arithmetic; pin the
                # Hermitian structure so rounding cannot accumulate.
                a[p, q] = 0.5 * (a[p, q] + np.conj(a[q, p]))
                a[q, p] = np.conj(a[p, q])
                a[p, p] = complex(a[p, p].real, 0.0)
                a[q, q] = complex(a[q, q].real, 0.0)
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip + se_m * viq
                    v[i, q] = -s * vip + ce_m * viq
    return max_sweeps


def _jacobi_eigh(h: np.ndarray) -> tuple:
    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    tol = 1e-14 * max(np.linalg.norm(a), 1e-300)
    _jacobi_sweeps(a, v, tol, 60)
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _eigh(h: np.ndarray) -> tuple:
    if h.shape[0] <= JACOBI_MAX_SIZE:
        return _jacobi_eigh(h)
    return np.linalg.eigh(h)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real positive; unit norm."""
    out = np.array(v, dtype=np.complex128)
    pivot = out[int(np.argmax(np.abs(out)))]
    mag = abs(pivot)
    if mag > 0.0:
        out *= np.conj(pivot) / mag
    nrm = np.linalg.norm(out)
    if nrm > 0.0:
        out /= nrm
    return out


def smallest_eigenpair(h) -> tuple:
    """Minimum eigenvalue and a deterministically phased unit eigenvector."""
    a = _require_hermitian(h, "eigenpair input")
    w, v = _eigh(a)
    return float(w[0]), _fix_phase(v[:, 0])


class KktResiduals(NamedTuple):
    primal: float
    dual: float
    complementarity: float


@dataclass(frozen=True)
class SdpSolution:
    """Feasible point of the unit-diagonal SDP plus optimality diagnostics.

    X has an exactly unit diagonal and is exactly PSD (both held by
    construction of the factorized iterate, or enforced by a final diagonal
    congruence on the fallback path); rank1_ratio is the second-to-first
    eigenvalue ratio used to decide whether extraction can bypass
    randomization. dual_diag holds the diagonal multipliers tau; residuals
    are relative to the Frobenius norm of the cost matrix. warm is an opaque
    factor of X that a follow-up solve on a nearby cost matrix can reuse.
    """

    X: np.ndarray
    objective: float
    kkt_residuals: KktResiduals
    rank1_ratio: float
    converged: bool
    iterations: int
    dual_diag: np.ndarray = field(repr=False, default=None)
    warm: np.ndarray = field(repr=False, default=None, compare=False)


def _certificate(kn: np.ndarray, tau: np.ndarray, obj: float) -> tuple:
    """Dual PSD residual and duality gap for multipliers tau at objective obj."""
    slack = kn - np.diag(tau)
    dual = max(0.0, -float(np.linalg.eigvalsh(slack)[0]))
    gap = abs(obj - float(tau.sum()))
    return dual, gap


def _factor_phase(kn: np.ndarray, tol: float, sweep_limit: int,
                  y0: np.ndarray | None) -> tuple:
    """Row-coordinate descent on X = Y Yᴴ with unit-norm rows.

    Each row update y_m <- -g_m/|g_m| (g_m the off-diagonal gradient) is the
    exact minimizer of the objective in that row, so the objective never
    increases within a sweep. When progress stalls short of the certificate,
    blends the most negative dual-slack eigendirection into the iterate and
    resumes; such escapes may transiently raise the objective, so the best
    certified-checkpoint iterate is tracked and returned.
    """
    m = kn.shape[0]
    y = np.eye(m, dtype=np.complex128) if y0 is None else y0.copy()
    g_all = kn @ y
    kdiag = np.real(np.diag(kn))
    obj = float(np.vdot(y, g_all).real)
    best = (np.inf, y, kdiag.copy())
    escapes = 0
    sweeps = 0
    while sweeps < sweep_limit:
        sweeps += 1
        for row in range(m):
            g = g_all[row] - kdiag[row] * y[row]
            norm_g = np.linalg.norm(g)
            if norm_g < 1e-15:
                continue
            y_new = -g / norm_g
            g_all += np.outer(kn[:, row], y_new - y[row])
            y[row] = y_new
        obj_new = float(np.vdot(y, kn @ y).real)
        stalled = abs(obj_new - obj) <= 1e-3 * tol
        if sweeps % SDP_CERT_EVERY == 0 or stalled or sweeps == sweep_limit:
            ky = kn @ y
            lam = np.real(np.einsum("mr,mr->m", np.conj(y), ky))
            # Row criticality makes the duality gap vanish identically here;
            # the dual PSD residual is the only quantity left to certify.
            dual, gap = _certificate(kn, lam, float(lam.sum()))
            if obj_new < best[0]:
                best = (obj_new, y.copy(), lam)
            if dual <= tol and gap <= tol:
                return y, lam, sweeps, True
            if stalled:
                if escapes >= SDP_ESCAPE_LIMIT:
                    break
                escapes += 1
                slack = kn - np.diag(lam)
                descent = np.linalg.eigh(slack)[1][:, 0]
                blended = y @ y.conj().T + 0.5 * np.outer(descent, descent.conj())
                d = 1.0 / np.sqrt(np.real(np.diag(blended)))
                blended = (d[:, np.newaxis] * blended) * d[np.newaxis, :]
                w, q = np.linalg.eigh(0.5 * (blended + blended.conj().T))
                y = q * np.sqrt(np.maximum(w, 0.0))
                rows = np.linalg.norm(y, axis=1, keepdims=True)
                y = y / np.maximum(rows, 1e-15)
                g_all = kn @ y
                obj_new = float(np.vdot(y, kn @ y).real)
        obj = obj_new
    _, y_best, lam_best = best
    return y_best, lam_best, sweeps, False


def _splitting_phase(kn: np.ndarray, tol: float, iter_limit: int,
                     z0: np.ndarray, u0: np.ndarray) -> tuple:
    """Over-relaxed splitting between the unit-diagonal affine set and the
    PSD cone, certified through the same diagonal-dual test as the
    factorized phase."""
    m = kn.shape[0]
    z = z0.copy()
    u = u0.copy()
    x_pol = z0.copy()
    tau = np.real(np.diag(kn)).copy()
    iterations = 0
    for iterations in range(1, iter_limit + 1):
        x = z - u - kn / SDP_RHO
        np.fill_diagonal(x, 1.0)
        x_relaxed = SDP_OVER_RELAX * x + (1.0 - SDP_OVER_RELAX) * z
        vmat = x_relaxed + u
        vmat = 0.5 * (vmat + vmat.conj().T)
        w, q = np.linalg.eigh(vmat)
        z_new = (q * np.maximum(w, 0.0)) @ q.conj().T
        u = u + x_relaxed - z_new
        z = z_new
        if iterations % SDP_FALLBACK_CHECK_EVERY == 0 or iterations == iter_limit:
            d = 1.0 / np.sqrt(np.maximum(np.real(np.diag(z)), 1e-12))
            x_pol = (d[:, np.newaxis] * z) * d[np.newaxis, :]
            x_pol = 0.5 * (x_pol + x_pol.conj().T)
            np.fill_diagonal(x_pol, 1.0)
            tau = np.real(np.diag(kn)) + SDP_RHO * np.real(np.diag(u))
            obj = float(np.vdot(kn, x_pol).real)
            dual, gap = _certificate(kn, tau, obj)
            if dual <= tol and gap <= tol:
                return x_pol, tau, iterations, True
    return x_pol, tau, iterations, False


def solve_unit_diag_sdp(k, tol: float = 1e-7, max_iter: int = 5000,
                        warm: np.ndarray | None = None) -> SdpSolution:
    """Minimize Tr(K X) over Hermitian X with unit diagonal and X PSD.

    Runs row-coordinate descent on the full-rank factorization X = Y Yᴴ,
    whose iterates are feasible by construction, then certifies optimality
    through the diagonal dual multipliers (dual slack PSD within tol,
    duality gap below tol, both relative to ||K||_F). Instances the
    factorized phase cannot certify - in practice degenerate cost matrices
    where complementarity is not strict - fall through to an over-relaxed
    splitting iteration warm-started from the factorized iterate. `warm`
    accepts the `warm` field of a previous solution on a nearby cost matrix.
    Hits of the combined iteration cap return the best iterate flagged
    non-converged.
    """
    kh = _require_hermitian(k, "SDP cost matrix")
    m = kh.shape[0]
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    sigma = np.linalg.norm(kh) or 1.0
    kn = kh / sigma
    y0 = None
    if warm is not None:
        y0 = np.array(warm, dtype=np.complex128)
        if y0.shape != (m, m):
            raise ValueError("warm-start factor does not match the problem size")
        rows = np.linalg.norm(y0, axis=1, keepdims=True)
        y0 = y0 / np.maximum(rows, 1e-15)
    y, tau, sweeps, converged = _factor_phase(
        kn, tol, min(max_iter, SDP_SWEEP_LIMIT), y0)
    iterations = sweeps
    x_final = y @ y.conj().T
    x_final = 0.5 * (x_final + x_final.conj().T)
    np.fill_diagonal(x_final, 1.0)
    if not converged and iterations < max_iter:
        slack = kn - np.diag(tau)
        x_fb, tau_fb, fb_iters, converged = _splitting_phase(
            kn, tol, max_iter - iterations, x_final, -slack / SDP_RHO)
        iterations += fb_iters
        # On a non-converged fallback keep whichever candidate is better.
        if converged or (np.vdot(kn, x_fb).real < np.vdot(kn, x_final).real):
            x_final = x_fb
            tau = tau_fb
            w, q = np.linalg.eigh(x_final)
            y = q * np.sqrt(np.maximum(w, 0.0))
            rows = np.linalg.norm(y, axis=1, keepdims=True)
            y = y / np.maximum(rows, 1e-15)

    objective = float(np.vdot(kh, x_final).real)
    dual, gap = _certificate(kn, tau, objective / sigma)
    x_eigs = np.linalg.eigvalsh(x_final)
    primal = max(
        float(np.abs(np.real(np.diag(x_final)) - 1.0).max()),
        max(0.0, -float(x_eigs[0])),
    )
    lam1 = float(x_eigs[-1])
    lam2 = float(x_eigs[-2]) if m > 1 else 0.0
    ratio = max(lam2, 0.0) / lam1 if lam1 > 0.0 else 0.0
    return SdpSolution(
        X=x_final,
        objective=objective,
        kkt_residuals=KktResiduals(
            primal=primal,
            dual=float(dual),
            complementarity=float(gap),
        ),
        rank1_ratio=float(ratio),
        converged=converged,
        iterations=iterations,
        dual_diag=tau * sigma,
        warm=y,
    )


def _unit_modulus(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    return np.where(mags > 0.0, vec / np.where(mags > 0.0, mags, 1.0), 1.0 + 0.0j)


def gaussian_randomization(solution: SdpSolution, objective: Callable[[np.ndarray], float],
                           n_candidates: int, rng: np.random.Generator) -> np.ndarray:
    """Best unit-modulus vector explaining an SDP solution.

    Numerically rank-one solutions short-circuit to the dominant eigenvector
    projected entrywise to unit modulus. Otherwise draws candidates from the
    zero-mean complex Gaussian with covariance X, projects each entrywise,
    and returns the candidate the callback scores highest (first on ties).
    """
    if n_candidates < 1:
        raise ValueError("n_candidates must be at least 1")
    w, q = _eigh(_require_hermitian(solution.X, "SDP solution"))
    if solution.rank1_ratio <= RANK1_THRESHOLD:
        return _unit_modulus(_fix_phase(q[:, -1]))
    if w[0] < SAMPLING_EIG_FLOOR:
        raise ValueError(
            f"solution matrix has eigenvalue {w[0]:.3e} below the PSD floor"
        )
    root = q * np.sqrt(np.maximum(w, 0.0))
    m = solution.X.shape[0]
    draws = (rng.standard_normal((m, n_candidates))
             + 1j * rng.standard_normal((m, n_candidates))) / np.sqrt(2.0)
    candidates = _unit_modulus(root @ draws)
    best_idx = 0
    best_val = -np.inf
    for j in range(n_candidates):
        val = float(objective(candidates[:, j]))
        if val > best_val:
            best_val = val
            best_idx = j
    return candidates[:, best_idx].copy()


def normalize_by_auxiliary(theta_prime) -> np.ndarray:
    """Divide out the trailing auxiliary entry and drop it."""
    vec = np.asarray(theta_prime, dtype=np.complex128).ravel()
    if vec.size < 2:
        raise ValueError("need at least one phase entry plus the auxiliary")
    pivot = vec[-1]
    if abs(pivot) == 0.0:
        raise ValueError("auxiliary entry must be nonzero")
    out = vec[:-1] / pivot
    return out / np.abs(out)
