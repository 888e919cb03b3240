"""Continuation of harmonic-balance branches in frequency or forcing level.

Two drivers are provided: a natural-parameter sweep with adaptive steps,
and a pseudo-arclength predictor-corrector that passes folds. Branch points
can be tagged stable or unstable from the monodromy of the variational
equation along each orbit.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import floquet
from .harmonic_balance import (
    DEFAULT_TOL,
    FourierAnsatz,
    HBSolution,
    aft_jacobian,
    aft_residual,
    default_samples,
    forcing_vector,
    hb_solve,
    linear_operator,
    newton,
)
from .model import MechanicalSystem

log = logging.getLogger(__name__)

PARAMS = ("Omega", "f")
GROW = 1.3
GROW_AFTER = 3
MAX_HALVINGS = 12
NATURAL_MIN_STEP = 1e-6
ENERGY_TOL = 1e-8


def _domega_operator(mass, damping, omega: float, K: int) -> np.ndarray:
    """Derivative of :func:`linear_operator` with respect to ``omega``."""
    N = mass.shape[0]
    H = 2 * K + 1
    L = np.zeros((N, H, N, H))
    for k in range(1, K + 1):
        si, ci = 2 * k - 1, 2 * k
        L[:, si, :, si] = -2 * k * k * omega * mass
        L[:, ci, :, ci] = -2 * k * k * omega * mass
        L[:, si, :, ci] = -k * damping
        L[:, ci, :, si] = k * damping
    return L.reshape(N * H, N * H)


class ParamProblem:
    """HB residual as a function of coefficients and one parameter.

    ``Omega`` is the response frequency (forcing harmonics follow it);
    ``f`` multiplies the system's forcing, so a system built with unit
    forcing amplitude has ``f`` equal to the physical amplitude.
    """

    def __init__(self, system: MechanicalSystem, param: str, K: int, n_samples: Optional[int] = None,
                 omega: Optional[float] = None):
        if param not in PARAMS:
            raise ValueError(f"param must be one of {PARAMS}")
        self.system = system
        self.param = param
        self.K = K
        self.N = system.dim
        self.n_samples = n_samples or default_samples(K)
        self.F = forcing_vector(system, K)
        self.omega = system.omega if omega is None else float(omega)

    def ansatz(self, x, p) -> FourierAnsatz:
        om = p if self.param == "Omega" else self.omega
        return FourierAnsatz.from_vector(x, self.N, om)

    def forcing(self, p):
        return self.F * p if self.param == "f" else self.F

    def residual(self, x, p):
        return aft_residual(self.system, self.ansatz(x, p), self.n_samples, self.forcing(p))

    def jacobian_x(self, x, p):
        return aft_jacobian(self.system, self.ansatz(x, p), self.n_samples)

    def jacobian_p(self, x, p):
        if self.param == "f":
            return -self.F
        return _domega_operator(self.system.mass, self.system.damping, p, self.K) @ x

    def solve(self, x0, p, tol=DEFAULT_TOL, max_iter=20):
        x, rn, it, status = newton(lambda v: self.residual(v, p), lambda v: self.jacobian_x(v, p),
                                   x0, tol, max_iter)
        return x, rn, status

    def solution(self, x, p, rn=None, it=0, status="converged", tol=DEFAULT_TOL) -> HBSolution:
        rn = float(np.linalg.norm(self.residual(x, p))) if rn is None else float(rn)
        return HBSolution(self.ansatz(x, p), rn, it, self.n_samples, rn < tol, status, tol)


# ---------------------------------------------------------------------------
# Branch
# ---------------------------------------------------------------------------


@dataclass
class BranchPoint:
    param: float
    solution: HBSolution
    arclength: float = 0.0
    stable: Optional[bool] = None
    fold: bool = False
    max_multiplier: Optional[float] = None

    @property
    def amplitude(self) -> np.ndarray:
        return self.solution.ansatz.amplitude()

    @property
    def mean(self) -> np.ndarray:
        return self.solution.ansatz.mean()


@dataclass
class Branch:
    param: str
    points: list = field(default_factory=list)
    status: str = "complete"
    system: Optional[dict] = None
    fixed_omega: Optional[float] = None

    @property
    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    def amplitudes(self, dof: int = 0) -> np.ndarray:
        return np.array([p.amplitude[dof] for p in self.points])

    def means(self, dof: int = 0) -> np.ndarray:
        return np.array([p.mean[dof] for p in self.points])

    @property
    def folds(self) -> list:
        return [p for p in self.points if p.fold]

    def stable_flags(self) -> np.ndarray:
        return np.array([p.stable for p in self.points], dtype=object)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        N = self.points[0].solution.ansatz.dim if self.points else 0
        w.writerow([self.param] + [f"amp{j + 1}" for j in range(N)] + [f"mean{j + 1}" for j in range(N)]
                   + ["stable", "fold"])
        for p in self.points:
            st = "" if p.stable is None else int(p.stable)
            w.writerow([_g(p.param)] + [_g(v) for v in p.amplitude] + [_g(v) for v in p.mean]
                       + [st, int(p.fold)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "param": self.param,
            "status": self.status,
            "system": self.system,
            "fixed_omega": self.fixed_omega,
            "points": [
                {"param": p.param, "arclength": p.arclength, "stable": p.stable, "fold": p.fold,
                 "max_multiplier": p.max_multiplier, "solution": p.solution.to_dict()}
                for p in self.points
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d) -> "Branch":
        pts = [BranchPoint(p["param"], HBSolution.from_dict(p["solution"]), p["arclength"], p["stable"],
                           p["fold"], p.get("max_multiplier")) for p in d["points"]]
        return cls(d["param"], pts, d.get("status", "complete"), d.get("system"), d.get("fixed_omega"))

    @classmethod
    def from_json(cls, text: str) -> "Branch":
        return cls.from_dict(json.loads(text))

    def verify(self, system: Optional[MechanicalSystem] = None, tol: float = 1e-9) -> float:
        """Largest HB residual over the branch, each at its own parameter."""
        if system is None:
            system = MechanicalSystem.from_dict(self.system)
        worst = 0.0
        for p in self.points:
            K = p.solution.ansatz.K
            prob = ParamProblem(system, self.param, K, p.solution.n_samples, omega=self.fixed_omega)
            r = np.linalg.norm(prob.residual(p.solution.ansatz.vector, p.param))
            worst = max(worst, float(r))
        if worst >= tol:
            raise ValueError(f"branch residual {worst:.3e} exceeds {tol:.1e}")
        return worst


def _g(x) -> str:
    return f"{float(x):.17g}"


def _discarded_energy_fraction(ansatz: FourierAnsatz) -> float:
    e = ansatz.harmonic_energy()
    total = e.sum()
    return float(e[-1] / total) if total > 0 else 0.0


# ---------------------------------------------------------------------------
# Natural-parameter sweep
# ---------------------------------------------------------------------------


def sweep_natural(system: MechanicalSystem, param: str, start: float, stop: float, K: int = 7,
                  step: Optional[float] = None, min_step: Optional[float] = None,
                  max_step: Optional[float] = None, initial: Optional[FourierAnsatz] = None,
                  tol: float = DEFAULT_TOL, omega: Optional[float] = None) -> Branch:
    """Step the parameter from ``start`` to ``stop`` with warm starts.

    The step halves on a failed solve and grows by 1.3 after three
    successes in a row. Twelve consecutive halvings, or a step below
    ``min_step`` (default ``1e-6`` of the span), end the sweep with
    ``status='fold-suspected'``. The step floor matters near a fold, where
    alternating failures and successes would otherwise creep towards the
    turning point forever.
    """
    prob = ParamProblem(system, param, K, omega=omega)
    span = stop - start
    direction = math.copysign(1.0, span)
    step = abs(step) if step else abs(span) / 100
    max_step = abs(max_step) if max_step else abs(span) / 10
    min_step = abs(min_step) if min_step else abs(span) * NATURAL_MIN_STEP
    x0 = np.zeros(prob.N * (2 * K + 1)) if initial is None else initial.resized(K).vector
    x, rn, status = prob.solve(x0, start, tol, 50)
    if status != "converged":
        raise RuntimeError(f"initial solve failed at {param}={start}: {status}")
    branch = Branch(param, system=system.to_dict(), fixed_omega=prob.omega if param == "f" else None)
    branch.points.append(BranchPoint(start, prob.solution(x, start, rn)))
    p = start
    streak = halvings = 0
    while direction * (stop - p) > 1e-14 * max(1.0, abs(stop)):
        h = min(step, abs(stop - p))
        p_new = p + direction * h
        x_new, rn, status = prob.solve(x, p_new, tol)
        if status == "converged":
            p, x = p_new, x_new
            branch.points.append(BranchPoint(p, prob.solution(x, p, rn)))
            halvings = 0
            streak += 1
            if streak >= GROW_AFTER:
                step = min(step * GROW, max_step)
                streak = 0
        else:
            step *= 0.5
            streak = 0
            halvings += 1
            if halvings >= MAX_HALVINGS or step < min_step:
                branch.status = "fold-suspected"
                break
    return branch


# ---------------------------------------------------------------------------
# Pseudo-arclength continuation
# ---------------------------------------------------------------------------


def _tangent(prob: ParamProblem, x, p, prev=None):
    """Unit null vector of ``[R_x R_p]``, oriented along ``prev``."""
    Jx = prob.jacobian_x(x, p)
    Jp = prob.jacobian_p(x, p)
    A = np.hstack([Jx, Jp[:, None]])
    # append a row that fixes orientation and scale
    c = prev if prev is not None else np.r_[np.zeros(x.size), 1.0]
    B = np.vstack([A, c])
    try:
        t = scipy.linalg.solve(B, np.r_[np.zeros(x.size), 1.0])
    except (np.linalg.LinAlgError, ValueError):
        t = scipy.linalg.null_space(A)[:, 0]
    t /= np.linalg.norm(t)
    if prev is not None and t @ prev < 0:
        t = -t
    return t


def sweep_arclength(system: MechanicalSystem, param: str, start: float, stop: float, K: int = 7,
                    ds: float = 0.05, ds_min: float = 1e-6, ds_max: float = 0.25,
                    initial: Optional[FourierAnsatz] = None, tol: float = DEFAULT_TOL,
                    max_points: int = 5000, omega: Optional[float] = None,
                    bounds: Optional[tuple] = None) -> Branch:
    """Pseudo-arclength continuation from ``start`` until the parameter leaves
    the interval spanned by ``start`` and ``stop`` (or ``bounds``).

    Folds are marked where the parameter component of the tangent changes
    sign; the marked point is the one with the parameter extremum.
    """
    prob = ParamProblem(system, param, K, omega=omega)
    n = prob.N * (2 * K + 1)
    lo, hi = bounds if bounds is not None else (min(start, stop), max(start, stop))
    x0 = np.zeros(n) if initial is None else initial.resized(K).vector
    x, rn, status = prob.solve(x0, start, tol, 50)
    if status != "converged":
        raise RuntimeError(f"initial solve failed at {param}={start}: {status}")
    branch = Branch(param, system=system.to_dict(), fixed_omega=prob.omega if param == "f" else None)
    branch.points.append(BranchPoint(start, prob.solution(x, start, rn)))
    orient = np.r_[np.zeros(n), math.copysign(1.0, stop - start)]
    tan = _tangent(prob, x, start, orient)
    z = np.r_[x, start]
    s = 0.0
    streak = 0
    while len(branch.points) < max_points:
        z_pred = z + ds * tan
        zc, ok = _correct(prob, z_pred, tan, ds, z, tol)
        if not ok:
            ds *= 0.5
            streak = 0
            if ds < ds_min:
                branch.status = "corrector-failed"
                break
            continue
        new_tan = _tangent(prob, zc[:-1], zc[-1], tan)
        if new_tan @ tan < 0.8 and ds > ds_min * 4:
            # the branch turns sharply within one step: retry shorter
            ds *= 0.5
            streak = 0
            continue
        s += float(np.linalg.norm(zc - z))
        pnew = float(zc[-1])
        if np.sign(new_tan[-1]) != np.sign(tan[-1]) and tan[-1] != 0:
            # parameter extremum between z and zc: keep the closer to the turn
            prev_pt = branch.points[-1]
            if direction_of_extremum(tan[-1], prev_pt.param, pnew):
                prev_pt.fold = True
                fold_here = False
            else:
                fold_here = True
        else:
            fold_here = False
        branch.points.append(BranchPoint(pnew, prob.solution(zc[:-1], pnew), s, fold=fold_here))
        z, tan = zc, new_tan
        if not lo <= pnew <= hi:
            break
        streak += 1
        if streak >= GROW_AFTER:
            ds = min(ds * GROW, ds_max)
            streak = 0
    else:
        branch.status = "max-points"
    return branch


def direction_of_extremum(tan_p: float, p_prev: float, p_new: float) -> bool:
    """True when the previous point lies further along the old direction."""
    return (p_prev - p_new) * tan_p > 0


def _correct(prob: ParamProblem, z_pred, tan, ds, z_prev, tol, max_iter: int = 12):
    z = z_pred.copy()
    n = z.size - 1
    for _ in range(max_iter):
        x, p = z[:-1], z[-1]
        R = prob.residual(x, p)
        g = tan @ (z - z_prev) - ds
        rn = math.hypot(np.linalg.norm(R), g)
        if not np.isfinite(rn):
            return z, False
        if np.linalg.norm(R) < tol and abs(g) < tol:
            return z, True
        A = np.zeros((n + 1, n + 1))
        A[:n, :n] = prob.jacobian_x(x, p)
        A[:n, n] = prob.jacobian_p(x, p)
        A[n] = tan
        try:
            dz = scipy.linalg.solve(A, np.r_[R, g])
        except (np.linalg.LinAlgError, ValueError):
            return z, False
        z = z - dz
    x, p = z[:-1], z[-1]
    ok = np.linalg.norm(prob.residual(x, p)) < tol
    return z, bool(ok)


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------


def point_stability(system: MechanicalSystem, solution: HBSolution, param: str = "Omega",
                    value: Optional[float] = None, rtol: float = 1e-10, atol: float = 1e-12):
    """``(stable, max |rho|)`` of the orbit from the variational monodromy."""
    sys_p = system
    if param == "f" and value is not None:
        sys_p = _scaled_forcing(system, value)
    mono = floquet.hb_monodromy(sys_p, solution.ansatz, rtol=rtol, atol=atol)
    return mono.stable, mono.max_modulus


def _scaled_forcing(system: MechanicalSystem, scale: float) -> MechanicalSystem:
    from .model import FourierForcing

    c0, s, c = system.forcing.fourier_coefficients()
    return system.with_forcing(FourierForcing(system.period, c0 * scale, s * scale, c * scale))


def tag_stability(branch: Branch, system: Optional[MechanicalSystem] = None, every: int = 1,
                  rtol: float = 1e-10, atol: float = 1e-12) -> Branch:
    """Tag each point (or every ``every``-th) stable iff all ``|rho| < 1``."""
    if system is None:
        system = MechanicalSystem.from_dict(branch.system)
    for i, p in enumerate(branch.points):
        if i % every:
            continue
        st, mm = point_stability(system, p.solution, branch.param, p.param, rtol, atol)
        p.stable, p.max_multiplier = st, mm
    return branch


# ---------------------------------------------------------------------------
# Duffing helpers
# ---------------------------------------------------------------------------


def duffing_frequency_sweep(f: float, Omega_range=(0.6, 8.0), K: int = 7, c: float = 0.01,
                            omega2: float = 1.0, kappa: float = 1.0, ds: float = 0.05,
                            ds_max: float = 0.25, stability: bool = True) -> Branch:
    """Arclength sweep of the forced Duffing response over ``Omega``.

    ``K`` is raised by 2 (up to 21) when the last harmonic carries more
    than a ``1e-8`` energy fraction at any point.
    """
    from .model import build_duffing

    system = build_duffing(c=c, omega2=omega2, kappa=kappa, f=f, Omega=1.0)
    while True:
        br = sweep_arclength(system, "Omega", Omega_range[0], Omega_range[1], K=K, ds=ds, ds_max=ds_max)
        frac = max(_discarded_energy_fraction(p.solution.ansatz) for p in br.points)
        if frac <= ENERGY_TOL or K >= 21:
            break
        K += 2
    if stability:
        tag_stability(br, system)
    return br


def duffing_amplitude_sweep(c: float = 0.01, omega2: float = 1.0, kappa: float = -1.0,
                            Omega: float = 1.0, f_max: float = 1.0, K: int = 7, ds: float = 0.01,
                            ds_max: float = 0.05, stability: bool = True) -> dict:
    """Continue the orbits born at the three equilibria in the forcing level.

    Returns a dict keyed by the equilibrium (``0``, ``+r0``, ``-r0``) with
    one :class:`Branch` each; a branch that stops early keeps its status.
    """
    from .model import build_duffing

    if kappa >= 0:
        raise ValueError("kappa must be negative")
    r0 = math.sqrt(-omega2 / kappa)
    system = build_duffing(c=c, omega2=omega2, kappa=kappa, f=1.0, Omega=Omega)
    out = {}
    for q0 in (0.0, r0, -r0):
        init = FourierAnsatz.from_harmonics(Omega, np.array([2 * q0]), np.zeros((K, 1)), np.zeros((K, 1)))
        try:
            br = sweep_arclength(system, "f", 0.0, f_max, K=K, ds=ds, ds_max=ds_max, initial=init,
                                 bounds=(-1e-12, f_max))
        except RuntimeError as exc:
            br = Branch("f", status=f"failed: {exc}", system=system.to_dict(), fixed_omega=Omega)
        if stability and br.points:
            tag_stability(br, system)
        out[q0] = br
    return out


# ---------------------------------------------------------------------------
# Anchor comparison
# ---------------------------------------------------------------------------


def polyline_distance(params, amps, anchor_param: float, anchor_amp: float, n_sub: int = 64) -> float:
    """Smallest ``max(|dp|/p_a, |da|/a_a)`` from an anchor to a branch polyline."""
    P = np.asarray(params, dtype=float)
    A = np.asarray(amps, dtype=float)
    s = np.linspace(0.0, 1.0, n_sub)
    pp = (P[:-1, None] + s * (P[1:] - P[:-1])[:, None]).ravel()
    aa = (A[:-1, None] + s * (A[1:] - A[:-1])[:, None]).ravel()
    d = np.maximum(np.abs(pp - anchor_param) / abs(anchor_param), np.abs(aa - anchor_amp) / abs(anchor_amp))
    return float(d.min())


def nearest_point(branch: Branch, anchor_param: float, anchor_amp: float, dof: int = 0) -> int:
    P = branch.params
    A = branch.amplitudes(dof)
    d = np.maximum(np.abs(P - anchor_param) / abs(anchor_param), np.abs(A - anchor_amp) / abs(anchor_amp))
    return int(np.argmin(d))


def locate(branch: Branch, anchor_param: float, anchor_amp: float, dof: int = 0):
    """Branch segment that passes closest to an anchor at the anchor's parameter.

    Among segments whose parameter interval contains ``anchor_param``, the
    one with the closest interpolated amplitude wins. Returns
    ``(index, relative amplitude error)``, where ``index`` is the segment's
    left point, or ``(None, inf)`` when no segment spans the parameter.
    """
    P = branch.params
    A = branch.amplitudes(dof)
    best, err = None, math.inf
    for i in range(len(P) - 1):
        p0, p1 = P[i], P[i + 1]
        if min(p0, p1) <= anchor_param <= max(p0, p1) and p0 != p1:
            s = (anchor_param - p0) / (p1 - p0)
            a = A[i] + s * (A[i + 1] - A[i])
            e = abs(a - anchor_amp) / abs(anchor_amp)
            if e < err:
                best, err = i, e
    return best, err


def stability_near(branch: Branch, anchor_param: float, anchor_amp: float, dof: int = 0):
    """Stability tag of the located segment, ``None`` when its ends disagree."""
    i, _ = locate(branch, anchor_param, anchor_amp, dof)
    if i is None:
        return None
    a, b = branch.points[i].stable, branch.points[i + 1].stable
    return a if a == b else None
