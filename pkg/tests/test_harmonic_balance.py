import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perorbit import harmonic_balance as hb
from perorbit.model import (
    FejerForcing,
    FourierForcing,
    build_counterexample1,
    build_duffing,
    build_linear_example,
)
from perorbit.reproduce import linear_complex_solve, linear_exact


def test_default_samples_power_of_two():
    for K in (1, 5, 7, 20, 50):
        M = hb.default_samples(K)
        assert M >= 8 * K + 8 and M & (M - 1) == 0


def test_project_recovers_coefficients():
    rng = np.random.default_rng(0)
    a = hb.FourierAnsatz(1.3, rng.normal(size=(2, 11)))
    t, q = a.reconstruct(64)
    assert np.allclose(hb.project(q, 5), a.coeffs, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
def test_projection_is_alias_free_above_2k(K, seed):
    # x^3 of a K-harmonic signal has 3K harmonics; 8K+8 samples resolve the first K exactly
    rng = np.random.default_rng(seed)
    a = hb.FourierAnsatz(1.0, rng.normal(size=(1, 2 * K + 1)))
    lo = hb.project(a.reconstruct(hb.default_samples(K))[1] ** 3, K)
    hi = hb.project(a.reconstruct(4096)[1] ** 3, K)
    assert np.allclose(lo, hi, atol=1e-10 * (1 + np.abs(hi).max()))


def test_ansatz_amplitude_single_sine():
    a = hb.FourierAnsatz.from_harmonics(1.0, [0.0], [[1.0]], [[0.0]])
    assert a.amplitude()[0] == pytest.approx(1.0, abs=1e-12)


def test_ansatz_mean_and_velocity():
    a = hb.FourierAnsatz.from_harmonics(2.0, [3.0], [[0.5]], [[0.2]])
    t = np.linspace(0, 3, 7)
    assert a.mean()[0] == 1.5
    assert np.allclose(a.velocity(t)[:, 0], 2.0 * (0.5 * np.cos(2 * t) - 0.2 * np.sin(2 * t)))


def test_linear_operator_matches_time_derivatives():
    rng = np.random.default_rng(1)
    M = np.array([[2.0, 0.1], [0.1, 1.0]])
    C = np.array([[0.3, -0.1], [-0.1, 0.2]])
    a = hb.FourierAnsatz(1.7, rng.normal(size=(2, 9)))
    d1 = hb.FourierAnsatz(1.7, a.derivative_coeffs())
    d2 = hb.FourierAnsatz(1.7, d1.derivative_coeffs())
    expect = (d2.coeffs.T @ M.T + d1.coeffs.T @ C.T).T.ravel()
    assert np.allclose(hb.linear_operator(M, C, 1.7, 4) @ a.vector, expect, atol=1e-12)


def test_aft_jacobian_matches_finite_differences():
    s = build_counterexample1()
    rng = np.random.default_rng(2)
    a = hb.FourierAnsatz(1.0, 0.1 * rng.normal(size=(2, 7)))
    J = hb.aft_jacobian(s, a)
    x = a.vector
    h = 1e-7
    fd = np.empty_like(J)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd[:, i] = (hb.aft_residual(s, hb.FourierAnsatz.from_vector(x + e, 2, 1.0))
                    - hb.aft_residual(s, hb.FourierAnsatz.from_vector(x - e, 2, 1.0))) / (2 * h)
    assert np.allclose(J, fd, atol=1e-6)


def test_newton_on_scalar_problem():
    x, rn, it, status = hb.newton(lambda x: x**2 - 2.0, lambda x: np.diag(2 * x), np.array([1.0]))
    assert status == "converged" and abs(x[0] ** 2 - 2.0) < 1e-10


def test_linear_example_truncation():
    s = build_linear_example()
    for K in (5, 10, 15):
        assert hb.hb_solve(s, K=K).ansatz.amplitude()[0] == pytest.approx(0.0025, abs=1e-4)
    sol = hb.hb_solve(s, K=20)
    t = np.linspace(0, 2 * np.pi, 2001)
    assert np.abs(sol.ansatz(t)[:, 0] - linear_exact(t)).max() < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.01, 1.0), st.floats(0.5, 2.0),
       st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_linear_hb_equals_complex_solve(k, c, omega, f):
    from perorbit.model import MechanicalSystem, PolynomialNonlinearity

    forcing = FourierForcing(2 * np.pi / omega, [f[0]], [[f[1]], [f[2]], [0.0]], [[f[3]], [f[4]], [f[5]]])
    s = MechanicalSystem(np.eye(1), np.array([[c]]),
                         PolynomialNonlinearity(1, ((0, (1,), k),), declared_potential=True), forcing)
    sol = hb.hb_solve(s, K=3)
    assert np.allclose(sol.ansatz.coeffs, linear_complex_solve(s, 3), atol=1e-10)


def test_duffing_first_point_of_reference_branch():
    # first point of the f = 1 reference branch (the table's damping is 0.02)
    sol = hb.hb_solve(build_duffing(c=0.02, f=1.0, Omega=0.6), K=7)
    assert sol.converged
    assert sol.ansatz.amplitude()[0] == pytest.approx(0.9384967793951, abs=1e-3)


def test_duffing_small_forcing_is_nearly_linear():
    f = 1e-4
    for W in (0.5, 1.5, 2.5):
        sol = hb.hb_solve(build_duffing(c=0.01, f=f, Omega=W), K=5)
        lin = f / abs(complex(1 - W**2, 0.01 * W))
        assert sol.ansatz.amplitude()[0] == pytest.approx(lin, rel=1e-6)


def test_convergence_study_flags_and_k2_value():
    rows = hb.hb_convergence_study(build_counterexample1(), [2])
    assert rows[0].amplitude == pytest.approx(0.001195, abs=1e-4)
    assert not rows[0].apparently_converged


def test_convergence_study_requires_ascending():
    with pytest.raises(ValueError):
        hb.hb_convergence_study(build_duffing(), [4, 2])


def test_solution_serialization_roundtrip():
    sol = hb.hb_solve(build_duffing(f=0.1), K=5)
    back = hb.HBSolution.from_dict(sol.to_dict())
    assert np.array_equal(back.ansatz.coeffs, sol.ansatz.coeffs)
    lines = sol.to_csv(16).splitlines()
    assert lines[0] == "t,q1" and len(lines) == 17


def test_too_few_samples_rejected():
    with pytest.raises(ValueError):
        hb.hb_solve(build_duffing(), K=7, n_samples=20)


def test_fejer_demo_exact_zero_and_growth():
    tab = hb.fejer_partial_sum_demo(2)
    assert tab.full_sum == 0.0
    assert tab.partial_sums[-1] == 0.0
    H = sum(1.0 / l for l in range(1, 257))
    # block one sums back to zero, so the peak is the second block's half-sum (1/4) H_256
    assert tab.max_partial == pytest.approx(0.25 * H, abs=1e-12)


def test_fejer_partial_sums_match_quadrature():
    ff = FejerForcing(1)
    tab = hb.fejer_partial_sum_demo(1)
    t = np.arange(256) * 2 * np.pi / 256
    v = ff(t)[:, 0]
    a = np.array([np.mean(v * np.cos(n * t)) * (2 if n else 1) for n in range(tab.n.size)])
    assert np.allclose(np.cumsum(a), tab.partial_sums, atol=1e-13)


def test_fejer_sup_norm_matches_dense_evaluation():
    ff = FejerForcing(1)
    t = np.linspace(0, 2 * np.pi, 200001)
    assert hb.fejer_sup_norm(ff) == pytest.approx(np.abs(ff(t)).max(), abs=1e-6)
