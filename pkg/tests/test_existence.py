import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perorbit import existence
from perorbit.model import (
    CallbackNonlinearity,
    build_chain,
    build_counter3,
    build_counterexample1,
    build_duffing,
    build_linear_example,
    build_pendulum,
    build_quadratic_oscillator,
)
from perorbit.reproduce import random_chain


def test_damping_positive_definite():
    rep = existence.check_damping([[2.0, -1.0], [-1.0, 2.0]])
    assert rep["verdict"] == "pass" and rep["sign"] == "positive"
    assert rep["C0"] == pytest.approx(1.0)


def test_damping_negative_definite_is_accepted():
    rep = existence.check_damping([[-0.3]])
    assert rep["verdict"] == "pass" and rep["sign"] == "negative"
    assert rep["C0"] == pytest.approx(0.3)


def test_damping_singular_and_indefinite_fail():
    assert existence.check_damping([[1.0, 0.0], [0.0, 0.0]])["verdict"] == "fail"
    assert existence.check_damping([[1.0, 0.0], [0.0, -1.0]])["verdict"] == "fail"


def test_damping_uses_symmetric_part():
    # the skew part carries no dissipation
    rep = existence.check_damping([[1.0, 5.0], [-5.0, 1.0]])
    assert rep["verdict"] == "pass" and rep["C0"] == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(0.1, 10.0))
def test_amplitude_bound_scales_inversely_with_damping(c, scale):
    a = existence.amplitude_bound(build_duffing(c=c), 0.0)
    b = existence.amplitude_bound(build_duffing(c=c * scale), 0.0)
    assert b == pytest.approx(a / scale, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.01, 2.0))
def test_amplitude_bound_monotone_in_radius_and_forcing(r1, dr, f):
    s = build_duffing(f=f)
    assert existence.amplitude_bound(s, r1 + dr) >= existence.amplitude_bound(s, r1)
    assert existence.amplitude_bound(build_duffing(f=2 * f), r1) > existence.amplitude_bound(s, r1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.01, 1.0), st.floats(0.05, 3.0))
def test_classical_bound_exceeds_ours_by_t_cf_over_c0(r, c, f):
    s = build_duffing(c=c, f=f)
    gap = s.period * s.forcing.l2_norm() / c
    ours = existence.amplitude_bound(s, r)
    assert existence.rouche_mawhin_bound(s, r) == pytest.approx(ours + gap, rel=1e-15)


def test_potential_check_flags_non_gradient_force():
    rep = existence.check_potential(build_counterexample1().nonlinearity)
    assert rep["verdict"] == "fail"
    assert rep["max_asymmetry"] > 0


def test_potential_check_declared_and_sampled():
    assert existence.check_potential(build_duffing().nonlinearity)["verdict"] == "declared"
    def grad(q):
        return np.stack([q[..., 0] ** 3 + q[..., 1], q[..., 0] + q[..., 1]], axis=-1)

    cb = CallbackNonlinearity(2, grad)
    assert existence.check_potential(cb)["verdict"] == "pass"


def test_sign_condition_duffing():
    hard = existence.check_sign_condition(build_duffing(kappa=1.0))
    soft = existence.check_sign_condition(build_duffing(kappa=-1.0))
    assert hard["verdict"] == "pass" and hard["r"] == 0.0
    assert soft["verdict"] == "pass" and soft["r"] == pytest.approx(1.0, abs=1e-12)


def test_sign_condition_fails_for_even_degree():
    assert existence.check_sign_condition(build_quadratic_oscillator())["verdict"] == "fail"


def test_sign_condition_counter3_radius():
    s = build_counter3(omega1_sq=2.0, omega2_sq=0.5, f1=None)
    rep = existence.check_sign_condition(s)
    assert rep["verdict"] == "pass"


def test_hessian_duffing_softening():
    rep = existence.check_hessian_definiteness(build_duffing(kappa=-1.0))
    assert rep["verdict"] == "pass"
    assert rep["r_star"] == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_hessian_pendulum_fails():
    assert existence.check_hessian_definiteness(build_pendulum())["verdict"] == "fail"


def test_chain_recursion_agrees_with_cholesky():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = rng.uniform(0.1, 3.0, int(rng.integers(2, 8)))
        n = k.size - 1
        H = np.diag(k[:-1] + k[1:])
        idx = np.arange(n - 1)
        H[idx, idx + 1] = H[idx + 1, idx] = -k[1:-1]
        assert existence.chain_hessian_is_pd(k) == existence.is_positive_definite(H)


def test_chain_recursion_edge_cases():
    assert existence.chain_hessian_is_pd([1.0, 1.0, 0.0])
    assert existence.chain_hessian_is_pd([0.0, 1.0, 1.0])
    assert not existence.chain_hessian_is_pd([0.0, 1.0, 0.0])


def test_is_positive_definite_rejects_singular():
    assert not existence.is_positive_definite([[2.0, -2.0], [-2.0, 2.0]])
    assert existence.is_positive_definite([[2.0, -1.0], [-1.0, 2.0]])


def test_global_extremum_pendulum():
    assert existence.certify(build_pendulum(cp=1.0, fbar=2.0)).overall == "no-periodic-orbit"
    assert existence.check_global_extremum_nonexistence(build_pendulum(cp=1.0, fbar=0.5)) is None


def test_quadratic_threshold_hand_values():
    assert existence.quadratic_forcing_threshold(1.0, 0.0, 1.0, 1.0) == 1.25
    assert existence.quadratic_forcing_threshold(1.0, 2.0, 1.0, 1.0) == 2.25


def test_quadratic_certificate_above_threshold():
    assert existence.certify(build_quadratic_oscillator(c=0.1, f=3.0)).overall == "no-periodic-orbit"


def test_counterexample1_threshold_series_converges():
    partial, m = existence.counterexample1_series(1.0, 4.0, 0.001, 1.0)
    assert np.all(np.diff(partial) >= 0)
    # the m = 3 term sits on the 9 = 3^2 resonance and carries almost all of c_inf
    assert partial[1] - partial[0] == pytest.approx(1 / (81 * 0.003**2), rel=1e-12)
    th = existence.counterexample1_threshold()
    assert th["c_inf"] == pytest.approx(partial[-1], rel=1e-14)
    # the first term dominates: 1 / ((9 - 1)^2 + 1e-6)
    assert partial[0] == pytest.approx(1 / (64 + 1e-6), rel=1e-15)


def test_certify_outcomes():
    assert existence.certify(build_duffing(kappa=1.0)).overall == "exists"
    assert existence.certify(build_duffing(kappa=-1.0)).overall == "exists"
    assert existence.certify(build_linear_example()).overall == "exists"
    assert existence.certify(build_counterexample1()).overall == "no-periodic-orbit"


def test_certify_doubly_free_chain_fails_damping():
    s = random_chain(np.random.default_rng(1), n=3, free="both")
    rep = existence.certify(s)
    assert rep.c1["verdict"] == "fail"
    assert rep.overall != "exists"


def test_certify_chain_and_report_roundtrip():
    s = build_chain([1.0, 2.0], [0.1, 0.2, 0.3], [(1.0, 0.5), (2.0, 0.0), (1.5, 1.0)])
    rep = existence.certify(s)
    assert rep.overall == "exists"
    d = rep.to_dict()
    assert d["overall"] == "exists" and d["c1"]["verdict"] == "pass"


def test_mean_forcing_is_absorbed():
    s = build_pendulum(cp=1.0, fbar=0.5)
    form = existence.rouche_mawhin_form(s)
    q = np.array([0.3])
    assert form["gradient"](q) == pytest.approx(np.sin(0.3) - 0.5)
