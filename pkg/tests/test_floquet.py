import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perorbit import floquet
from perorbit.harmonic_balance import hb_solve
from perorbit.model import build_duffing, build_quadratic_oscillator


def test_linear_frf_closed_form():
    A, psi = floquet.linear_frf(1.0, 0.01, 0.02, 1.0)
    assert A == pytest.approx(2.0) and psi == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        floquet.linear_frf(1.0, 0.0, 1.0, 1.0)


def test_constant_coefficient_monodromy_is_matrix_exponential():
    from scipy.linalg import expm

    ltp = floquet.mathieu_ltp(1.3, 0.05, 1.0, 0.0, 0.0)
    mono = floquet.monodromy(ltp)
    A = np.array([[0.0, 1.0], [-1.3, -0.05]])
    assert np.allclose(mono.Phi, expm(A * math.pi), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.05), st.floats(0.2, 2.0), st.floats(0.001, 0.1))
def test_liouville_identity(a, omega1, c1):
    p = floquet.MapParams(c1=c1)
    m = p.cell(a, omega1)
    assert abs(np.prod(m.multipliers) - math.exp(-c1 * math.pi)) < 1e-8


def test_monodromy_rejects_fractional_period():
    ltp = floquet.mathieu_ltp(1.0, 0.01, 1.0, 0.1, 0.0)
    with pytest.raises(ValueError):
        floquet.monodromy(ltp, period=1.5 * ltp.period)


def test_full_period_multipliers_are_squares_of_half_period_ones():
    ltp = floquet.mathieu_ltp(0.9, 0.01, 1.0, 1.2, 0.3)
    half = floquet.monodromy(ltp)
    full = floquet.monodromy(ltp, period=2 * ltp.period)
    assert np.allclose(np.sort_complex(half.multipliers**2), np.sort_complex(full.multipliers), atol=1e-8)


def test_small_map_has_stable_zero_column_and_tongue():
    m = floquet.stability_map(np.linspace(0.0, 0.02, 9), np.linspace(0.8, 1.2, 9))
    assert m.stable[0].all()
    assert (~m.stable).any()
    for b in m.boundary:
        assert abs(b.max_modulus - 1.0) < 1e-8
    assert m.liouville_defect.max() < 1e-8


def test_map_csv_is_deterministic_and_parallel_safe():
    a = np.linspace(0.0, 0.02, 4)
    w = np.linspace(0.9, 1.1, 3)
    m1 = floquet.stability_map(a, w, jobs=1)
    m2 = floquet.stability_map(a, w, jobs=2)
    assert m1.grid_csv() == m2.grid_csv()
    assert m1.boundary_csv() == m2.boundary_csv()


def test_resolve_jobs_reads_environment(monkeypatch):
    monkeypatch.setenv("PERORBIT_JOBS", "3")
    assert floquet.resolve_jobs() == 3
    assert floquet.resolve_jobs(2) == 2


def boundary_point():
    m = floquet.stability_map(np.linspace(0.0, 0.02, 5), np.linspace(0.95, 1.05, 3))
    assert m.boundary
    return m.params, m.boundary[0]


def test_adjoint_is_periodic_and_dual_to_the_flow():
    params, b = boundary_point()
    ltp = params.ltp(b.a, b.omega1)
    adj = floquet.adjoint_periodic_solution(ltp)
    assert adj.periodicity_defect < 1e-6
    # y(t) . x(t) is constant along any solution x of the direct system
    x = floquet.integrate(ltp.rhs, [0.3, -0.7], (0.0, 2 * ltp.period), t_eval=adj.t)
    dots = np.sum(adj.y * x.x, axis=1)
    assert np.ptp(dots) < 1e-7 * np.abs(dots).max()


def test_orthogonality_forcing_properties():
    params, b = boundary_point()
    adj = floquet.adjoint_periodic_solution(params.ltp(b.a, b.omega1))
    f = floquet.orthogonality_violating_forcing(adj)
    assert abs(f.integral) > 1e-6
    assert f.mean <= 0
    four = f.as_fourier(40)
    assert four.period == pytest.approx(adj.t[-1])


def test_escape_detection():
    s = build_quadratic_oscillator(c=0.1, f=2.6)
    r = floquet.escape_test(s, [0.0, 0.0], 50)
    assert r["escaped"] and r["periods"] < 50


def test_hb_monodromy_of_linear_orbit():
    s = build_duffing(c=0.05, kappa=0.0, f=0.1, Omega=1.3)
    sol = hb_solve(s, K=3)
    mono = floquet.hb_monodromy(s, sol.ansatz)
    lam = np.roots([1.0, 0.05, 1.0])
    expected = np.exp(lam * 2 * math.pi / 1.3)
    assert np.allclose(np.sort_complex(mono.multipliers), np.sort_complex(expected), atol=1e-8)


def test_shadowing_of_stable_duffing_orbit():
    s = build_duffing(c=0.05, f=0.05, Omega=1.5)
    sol = hb_solve(s, K=9)
    assert floquet.hb_monodromy(s, sol.ansatz).stable
    assert floquet.shadowing_defect(s, sol.ansatz, n_periods=50) < 1e-6
