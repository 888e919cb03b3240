import numpy as np
import pytest

from perorbit import continuation as cont
from perorbit.harmonic_balance import hb_solve
from perorbit.model import build_duffing


@pytest.fixture(scope="module")
def branch_f01():
    return cont.duffing_frequency_sweep(0.1, Omega_range=(0.6, 3.0), c=0.02, ds=0.02, ds_max=0.1)


def test_natural_sweep_low_forcing_start_value():
    br = cont.sweep_natural(build_duffing(c=0.02, f=0.01), "Omega", 0.6, 3.0)
    assert br.status == "complete"
    assert br.points[0].amplitude[0] == pytest.approx(0.0156173964103936, abs=1e-4)
    assert br.params[-1] == pytest.approx(3.0)


def test_natural_sweep_stalls_at_a_fold():
    br = cont.sweep_natural(build_duffing(c=0.02, f=1.0), "Omega", 0.6, 8.0, step=0.05)
    # a warm-started Newton cannot pass the upper fold; the sweep stops at its tip
    assert br.status == "fold-suspected"
    assert br.params[-1] == pytest.approx(6.6385, rel=1e-3)
    assert br.amplitudes()[-1] == pytest.approx(7.7422, rel=1e-3)


def test_arclength_tangent_is_null_vector():
    s = build_duffing(c=0.02, f=0.1)
    prob = cont.ParamProblem(s, "Omega", 5)
    x = hb_solve(s, omega=1.2, K=5).ansatz.vector
    t = cont._tangent(prob, x, 1.2)
    J = np.hstack([prob.jacobian_x(x, 1.2), prob.jacobian_p(x, 1.2)[:, None]])
    assert np.linalg.norm(J @ t) < 1e-8
    assert np.linalg.norm(t) == pytest.approx(1.0)


def test_domega_operator_matches_finite_difference():
    s = build_duffing(c=0.02, f=0.1)
    prob = cont.ParamProblem(s, "Omega", 4)
    x = np.random.default_rng(0).normal(size=9) * 0.1
    h = 1e-6
    fd = (prob.residual(x, 1.3 + h) - prob.residual(x, 1.3 - h)) / (2 * h)
    assert np.allclose(prob.jacobian_p(x, 1.3), fd, atol=1e-6)


def test_arclength_finds_the_fold(branch_f01):
    folds = branch_f01.folds
    assert folds
    top = max(folds, key=lambda p: p.param)
    assert top.param == pytest.approx(2.2115, rel=1e-2)
    assert top.amplitude[0] == pytest.approx(2.3173, rel=1e-2)


def test_branch_is_stable_far_from_resonance(branch_f01):
    assert branch_f01.points[0].stable
    assert branch_f01.points[-1].stable


def test_branch_between_folds_is_unstable(branch_f01):
    folds = sorted(branch_f01.folds, key=lambda p: p.arclength)
    i0 = branch_f01.points.index(folds[0])
    i1 = branch_f01.points.index(folds[-1])
    middle = branch_f01.points[(i0 + i1) // 2]
    assert middle.stable is False


def test_branch_roundtrip_verifies(branch_f01):
    back = cont.Branch.from_json(branch_f01.to_json())
    assert back.verify() < 1e-9
    assert back.to_csv() == branch_f01.to_csv()


def test_tampered_branch_fails_verification(branch_f01):
    d = branch_f01.to_dict()
    d["points"][3]["param"] += 0.01
    with pytest.raises(ValueError):
        cont.Branch.from_dict(d).verify()


def test_amplitude_sweep_starts_at_the_equilibria():
    out = cont.duffing_amplitude_sweep(stability=False)
    means = sorted(float(br.points[0].mean[0]) for br in out.values())
    assert means == pytest.approx([-1.0, 0.0, 1.0], abs=1e-12)
    for br in out.values():
        assert br.verify() < 1e-9


def test_amplitude_sweep_stability_of_equilibria():
    out = cont.duffing_amplitude_sweep(f_max=0.05, stability=True)
    assert out[0.0].points[0].stable
    assert out[1.0].points[0].stable is False


def test_polyline_distance_and_locate():
    br = cont.Branch("Omega")
    br.points = []
    s = build_duffing(f=0.01)
    for W in (0.5, 0.7, 0.9):
        br.points.append(cont.BranchPoint(W, hb_solve(s, omega=W, K=3)))
    P, A = br.params, br.amplitudes()
    assert cont.polyline_distance(P, A, P[1], A[1]) == 0.0
    i, err = cont.locate(br, 0.6, 0.5 * (A[0] + A[1]))
    assert i == 0 and err < 1e-12
    assert cont.locate(br, 2.0, 1.0) == (None, np.inf)
