"""Eigenpair, unit-diagonal SDP, and extraction kernel tests."""

import numpy as np
import pytest

from irswpt.solvers import (
    SdpSolution,
    gaussian_randomization,
    normalize_by_auxiliary,
    smallest_eigenpair,
    solve_unit_diag_sdp,
)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(rng, m):
    a = crandn(rng, m, m)
    return 0.5 * (a + a.conj().T)


# ------------------------------------------------------------- eigenpairs

def test_smallest_eigenpair_diagonal():
    val, vec = smallest_eigenpair(np.diag([1.0, -2.0, 3.0]))
    assert val == pytest.approx(-2.0, abs=1e-12)
    np.testing.assert_allclose(vec, [0.0, 1.0, 0.0], atol=1e-12)


def test_smallest_eigenpair_identity():
    val, vec = smallest_eigenpair(np.eye(4))
    assert val == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_smallest_eigenpair_residual():
    rng = np.random.default_rng(20)
    for m in (1, 2, 3, 5, 8, 17):
        h = random_hermitian(rng, m)
        val, vec = smallest_eigenpair(h)
        residual = np.linalg.norm(h @ vec - val * vec)
        assert residual <= 1e-8 * max(np.linalg.norm(h), 1.0)
        assert val <= np.linalg.eigvalsh(h)[0] + 1e-8 * np.linalg.norm(h)


def test_smallest_eigenpair_phase_is_bit_stable():
    rng = np.random.default_rng(21)
    h = random_hermitian(rng, 6)
    val1, vec1 = smallest_eigenpair(h)
    val2, vec2 = smallest_eigenpair(h.copy())
    assert val1 == val2
    assert vec1.tobytes() == vec2.tobytes()
    # largest-magnitude entry rotated onto the positive real axis
    pivot = vec1[int(np.argmax(np.abs(vec1)))]
    assert pivot.imag == pytest.approx(0.0, abs=1e-14)
    assert pivot.real > 0


def test_smallest_eigenpair_rejects_bad_input():
    with pytest.raises(ValueError):
        smallest_eigenpair(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        smallest_eigenpair(np.ones((2, 3)))


# ---------------------------------------------------------------- the SDP

def test_sdp_two_by_two_analytic():
    # optimum is k11 + k22 - 2|k12|, attained by x12 = -k12*/|k12|
    rng = np.random.default_rng(22)
    for _ in range(50):
        k = random_hermitian(rng, 2)
        sol = solve_unit_diag_sdp(k, tol=1e-10)
        expect = k[0, 0].real + k[1, 1].real - 2.0 * abs(k[0, 1])
        assert sol.converged
        assert sol.objective == pytest.approx(expect, abs=1e-6 * max(1.0, abs(expect)))
        if abs(k[0, 1]) > 0.1:
            # minimizing 2 Re(conj(k12) x12) drives x12 opposite k12's phase;
            # accuracy degrades like sqrt(obj_err / |k12|)
            target = -k[0, 1] / abs(k[0, 1])
            assert sol.X[0, 1] == pytest.approx(target, abs=1e-3)


def test_sdp_single_variable():
    sol = solve_unit_diag_sdp(np.array([[3.5]]))
    assert sol.objective == pytest.approx(3.5)
    assert sol.X[0, 0] == pytest.approx(1.0)
    assert sol.converged


def test_sdp_rank_one_negative_cost():
    # K = -zz^H: the optimum aligns every entry with z's phases
    rng = np.random.default_rng(23)
    for _ in range(20):
        m = int(rng.integers(2, 7))
        z = crandn(rng, m)
        sol = solve_unit_diag_sdp(-np.outer(z, np.conj(z)))
        u = z / np.abs(z)
        np.testing.assert_allclose(sol.X, np.outer(u, np.conj(u)), atol=1e-5)
        assert sol.objective == pytest.approx(-float(np.sum(np.abs(z))) ** 2,
                                              rel=1e-6)
        assert sol.rank1_ratio <= 1e-5


def test_sdp_feasibility_and_kkt_fields():
    rng = np.random.default_rng(24)
    for _ in range(40):
        m = int(rng.integers(1, 9))
        k = random_hermitian(rng, m)
        sol = solve_unit_diag_sdp(k)
        assert sol.converged
        np.testing.assert_allclose(np.diag(sol.X).real, 1.0, atol=1e-8)
        assert np.linalg.eigvalsh(sol.X)[0] >= -1e-8
        assert sol.kkt_residuals.primal <= 1e-8
        assert sol.kkt_residuals.dual <= 1e-6
        assert sol.kkt_residuals.complementarity <= 1e-6
        # recompute the certificate from the returned multipliers
        slack = k - np.diag(sol.dual_diag)
        scale = np.linalg.norm(k) or 1.0
        assert np.linalg.eigvalsh(slack)[0] >= -1e-6 * scale
        gap = abs(sol.objective - float(sol.dual_diag.sum()))
        assert gap <= 1e-6 * scale


def test_sdp_weak_duality_against_identity():
    rng = np.random.default_rng(25)
    for _ in range(20):
        k = random_hermitian(rng, int(rng.integers(2, 7)))
        sol = solve_unit_diag_sdp(k)
        assert sol.objective <= float(np.trace(k).real) + 1e-7 * np.linalg.norm(k)


def test_sdp_warm_start_reuses_factor():
    rng = np.random.default_rng(26)
    k = random_hermitian(rng, 5)
    cold = solve_unit_diag_sdp(k)
    warm = solve_unit_diag_sdp(k, warm=cold.warm)
    assert warm.converged
    # both certified within tol * ||K||_F of the optimum
    assert warm.objective == pytest.approx(cold.objective,
                                           abs=3e-7 * np.linalg.norm(k))
    assert warm.iterations <= cold.iterations


def test_sdp_input_validation():
    with pytest.raises(ValueError):
        solve_unit_diag_sdp(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        solve_unit_diag_sdp(np.eye(2), max_iter=0)
    with pytest.raises(ValueError):
        solve_unit_diag_sdp(np.eye(3), warm=np.eye(2))


# -------------------------------------------------------------- extraction

def rank1_solution(u):
    x = np.outer(u, np.conj(u))
    return SdpSolution(
        X=x, objective=0.0,
        kkt_residuals=(0.0, 0.0, 0.0), rank1_ratio=0.0,
        converged=True, iterations=1,
    )


def test_randomization_rank_one_short_circuit():
    rng = np.random.default_rng(27)
    u = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    calls = []
    out = gaussian_randomization(rank1_solution(u), lambda v: calls.append(v) or 0.0,
                                 16, np.random.default_rng(0))
    assert not calls  # no sampling on a rank-one solution
    np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-12)
    # recovered up to a global phase
    assert abs(np.vdot(u, out)) == pytest.approx(5.0, abs=1e-9)


def test_randomization_returns_best_scored_candidate():
    rng = np.random.default_rng(28)
    x = np.eye(4, dtype=complex)  # full-rank, forces the sampling path
    sol = SdpSolution(X=x, objective=0.0, kkt_residuals=(0.0, 0.0, 0.0),
                      rank1_ratio=1.0, converged=True, iterations=1)
    seen = []

    def score(v):
        seen.append(v.copy())
        return float(v[0].real)

    out = gaussian_randomization(sol, score, 12, rng)
    vals = [float(v[0].real) for v in seen]
    assert len(seen) == 12
    np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-12)
    assert float(out[0].real) == max(vals)


def test_randomization_deterministic_under_seed():
    rng_h = np.random.default_rng(29)
    x = np.eye(3, dtype=complex)
    sol = SdpSolution(X=x, objective=0.0, kkt_residuals=(0.0, 0.0, 0.0),
                      rank1_ratio=1.0, converged=True, iterations=1)
    score = lambda v: float(np.sum(v.real))
    a = gaussian_randomization(sol, score, 8, np.random.default_rng(77))
    b = gaussian_randomization(sol, score, 8, np.random.default_rng(77))
    assert a.tobytes() == b.tobytes()
    assert rng_h is not None


def test_randomization_candidate_count_guard():
    with pytest.raises(ValueError):
        gaussian_randomization(rank1_solution(np.ones(2)), lambda v: 0.0, 0,
                               np.random.default_rng(0))


# ------------------------------------------------------------- auxiliary

def test_normalize_by_auxiliary_examples():
    out = normalize_by_auxiliary(np.array([1j, -1j, 1.0]))
    np.testing.assert_allclose(out, [1j, -1j], atol=1e-15)
    out = normalize_by_auxiliary(np.array([1.0, 1j]))
    np.testing.assert_allclose(out, [-1j], atol=1e-15)


def test_normalize_by_auxiliary_unit_modulus_output():
    rng = np.random.default_rng(30)
    vec = crandn(rng, 6)
    out = normalize_by_auxiliary(vec)
    assert out.shape == (5,)
    np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-12)
    # relative phases against the auxiliary entry survive normalization
    expect = np.exp(1j * (np.angle(vec[:-1]) - np.angle(vec[-1])))
    np.testing.assert_allclose(out, expect, atol=1e-12)


def test_normalize_by_auxiliary_guards():
    with pytest.raises(ValueError):
        normalize_by_auxiliary(np.array([1.0]))
    with pytest.raises(ValueError):
        normalize_by_auxiliary(np.array([1.0, 0.0]))
