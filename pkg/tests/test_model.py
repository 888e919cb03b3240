import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perorbit.model import (
    BUILTINS,
    ChainNonlinearity,
    CubicSpring,
    FejerForcing,
    FourierForcing,
    MechanicalSystem,
    PendulumNonlinearity,
    TriangularForcing,
    build_chain,
    build_counterexample1,
    build_duffing,
    build_linear_example,
    fd_jacobian,
    linear_stiffness,
    load_system,
    save_system,
)

finite = st.floats(-5, 5, allow_nan=False)


def trapezoid_l2(forcing, n=1 << 16):
    t = np.arange(n) * forcing.period / n
    v = np.atleast_2d(forcing(t).reshape(n, -1))
    return np.sqrt(np.sum(v**2) * forcing.period / n)


def test_fourier_forcing_evaluates_series():
    f = FourierForcing(2 * np.pi, [1.0], [[0.5], [0.0]], [[0.0], [2.0]])
    t = np.linspace(0, 7, 11)
    expected = 0.5 + 0.5 * np.sin(t) + 2.0 * np.cos(2 * t)
    assert np.allclose(f(t)[:, 0], expected, atol=1e-14)


def test_forcing_mean_is_half_c0():
    f = FourierForcing(3.0, [0.4, -2.0], np.zeros((1, 2)), np.ones((1, 2)))
    assert np.allclose(f.mean(), [0.2, -1.0])


def test_triangular_mean_is_zero_and_peak_matches_amplitude():
    tri = TriangularForcing(0.01178, 1.0, 200, (1.0, -1.0))
    assert np.all(tri.mean() == 0)
    t = np.linspace(0, 2 * np.pi, 4001)
    v = tri(t)
    # the dropped odd harmonics sum to at most f_m 8/pi^2 / (2 (2n - 1))
    tail = 0.01178 * 8 / np.pi**2 / (2 * (2 * 200 - 1))
    assert abs(np.abs(v[:, 0]).max() - 0.01178) <= tail
    assert np.allclose(v[:, 0], -v[:, 1])


def test_triangular_l2_parseval_matches_trapezoid():
    tri = TriangularForcing(0.01178, 1.0, 100)
    assert abs(tri.l2_norm() - trapezoid_l2(tri)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.lists(finite, min_size=7, max_size=7), st.floats(0.3, 5.0))
def test_parseval_equals_trapezoid(coeffs, period):
    c0, s1, c1, s2, c2, s3, c3 = coeffs
    f = FourierForcing(period, [c0], [[s1], [s2], [s3]], [[c1], [c2], [c3]])
    assert abs(f.l2_norm() - trapezoid_l2(f, 256)) < 1e-9 * (1 + f.l2_norm())


@settings(max_examples=25, deadline=None)
@given(st.lists(finite, min_size=5, max_size=5), st.floats(0.3, 5.0), st.floats(-10, 10))
def test_forcing_is_periodic(coeffs, period, t0):
    c0, s1, c1, s2, c2 = coeffs
    f = FourierForcing(period, [c0], [[s1], [s2]], [[c1], [c2]])
    assert abs(f(t0)[0] - f(t0 + period)[0]) < 1e-9 * (1 + abs(f(t0)[0]))


def test_fejer_is_zero_at_origin_and_has_zero_mean():
    ff = FejerForcing(1)
    assert abs(ff(0.0)[0]) < 1e-15
    assert ff.mean()[0] == 0.0


def test_fejer_block_one_closed_form():
    ff = FejerForcing(1)
    t = np.linspace(0, 2 * np.pi, 101)
    expected = 2 * np.sin(4 * t) * (np.sin(t) + np.sin(2 * t) / 2)
    assert np.allclose(ff(t)[:, 0], expected, atol=1e-13)


def test_fejer_rejects_too_many_blocks():
    with pytest.raises(ValueError):
        FejerForcing(3)


def test_cubic_spring_flags():
    assert CubicSpring(1.0, 0.5).hardening
    assert not CubicSpring(1.0, -0.5).hardening
    assert CubicSpring(0.0, 0.0).absent


def test_chain_linear_springs_give_tridiagonal_stiffness():
    k = [1.0, 2.0, 3.0, 4.0]
    nl = ChainNonlinearity(tuple(CubicSpring(v, 0.0) for v in k))
    K = nl.jacobian(np.zeros(3))
    expected = np.array([[3.0, -2.0, 0.0], [-2.0, 5.0, -3.0], [0.0, -3.0, 7.0]])
    assert np.array_equal(K, expected)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_chain_jacobian_is_symmetric_and_matches_differences(q):
    nl = ChainNonlinearity(tuple(CubicSpring(k, kap) for k, kap in [(1, 0.3), (2, 0), (0.5, 1), (1, 0.2)]))
    q = np.array(q)
    J = nl.jacobian(q)
    assert np.allclose(J, J.T, atol=1e-14)
    assert np.allclose(J, fd_jacobian(nl.force, q), atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_counterexample1_force_has_asymmetric_jacobian(q):
    nl = build_counterexample1().nonlinearity
    J = nl.jacobian(np.array(q))
    assert np.allclose(J, fd_jacobian(nl.force, np.array(q)), atol=1e-5)
    # d/dq2 of the first force and d/dq1 of the second differ off the diagonal
    lin = nl.jacobian(np.zeros(2))
    assert np.allclose(lin, [[5.0, -4.0], [-4.0, 5.0]])


def test_pendulum_bounds():
    assert PendulumNonlinearity(1.5).bounds() == (-1.5, 1.5)


def test_rhs_matches_equation_of_motion():
    s = build_duffing(c=0.1, kappa=2.0, f=0.5, Omega=1.3)
    x = np.array([0.7, -0.2])
    t = 0.4
    acc = 0.5 * np.cos(1.3 * t) - 0.1 * (-0.2) - 0.7 - 2.0 * 0.7**3
    assert np.allclose(s.rhs(t, x), [-0.2, acc])


def test_json_roundtrip_preserves_dynamics(tmp_path):
    for name, builder in BUILTINS.items():
        s = builder()
        path = tmp_path / f"{name}.json"
        save_system(s, path)
        r = load_system(path)
        x = np.linspace(-0.5, 0.5, 2 * s.dim)
        assert np.allclose(s.rhs(0.3, x), r.rhs(0.3, x), rtol=1e-13, atol=1e-15), name


def test_json_roundtrip_chain():
    s = build_chain([1.0, 2.0], [0.1, 0.2, 0.3], [(1.0, 0.5), (2.0, 0.0), (1.5, 1.0)])
    r = MechanicalSystem.from_json(s.to_json())
    assert np.array_equal(r.damping, s.damping)
    x = np.array([0.1, -0.3, 0.2, 0.0])
    assert np.allclose(r.rhs(1.0, x), s.rhs(1.0, x))


def test_json_field_names():
    d = json.loads(build_duffing().to_json())
    for key in ("dim", "mass", "damping", "nonlinearity", "forcing"):
        assert key in d
    assert d["forcing"]["type"] == "fourier"
    assert "period" in d["forcing"]


def test_linear_stiffness_detection():
    assert np.allclose(linear_stiffness(build_linear_example()), [[400.0]])
    assert linear_stiffness(build_duffing()) is None


def test_linear_example_forcing_reproduces_closed_form():
    s = build_linear_example()
    t = np.linspace(0, 2 * np.pi, 201)
    q = 0.0025 * (np.sin(t) + np.sin(20 * t))
    qd = 0.0025 * (np.cos(t) + 20 * np.cos(20 * t))
    qdd = -0.0025 * (np.sin(t) + 400 * np.sin(20 * t))
    lhs = qdd + 0.01 * qd + 400 * q
    assert np.allclose(lhs, s.forcing(t)[:, 0], atol=1e-12)
