"""Time integration, monodromy matrices and Floquet multipliers.

Also hosts the Mathieu-type stability map of the two-oscillator example,
the adjoint periodic solutions on its stability boundary and the forcing
built from them that rules out a periodic response.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp

from .model import FourierForcing, MechanicalSystem

log = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
ESCAPE_THRESHOLD = 1e8
MAX_BISECTIONS = 60
BOUNDARY_TOL = 1e-8
UNIT_MULTIPLIER_TOL = 1e-6


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # shape (len(t), n)
    success: bool
    escaped: bool
    message: str
    sol: object = field(default=None, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]


def integrate(rhs: Callable, x0, t_span, rtol: float = RTOL, atol: float = ATOL,
              t_eval=None, dense: bool = False, escape: float = ESCAPE_THRESHOLD,
              max_step: float = np.inf) -> Trajectory:
    """Adaptive DOP853 integration with finite-escape detection.

    The run stops as soon as ``max |x| > escape`` and is flagged ``escaped``.
    """
    x0 = np.asarray(x0, dtype=float)

    def blowup(t, x):
        return escape - np.abs(x).max()

    blowup.terminal = True
    blowup.direction = -1
    res = solve_ivp(rhs, t_span, x0, method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval,
                    dense_output=dense, events=blowup, max_step=max_step)
    escaped = res.status == 1 and len(res.t_events[0]) > 0
    return Trajectory(res.t, res.y.T, res.success, escaped, res.message, res.sol)


def escape_test(system: MechanicalSystem, x0, n_periods: int, rtol: float = 1e-8,
                atol: float = 1e-10) -> dict:
    """Integrate the forced system for ``n_periods`` and report escape."""
    T = system.period
    tr = integrate(system.rhs, x0, (0.0, n_periods * T), rtol=rtol, atol=atol)
    return {"escaped": tr.escaped, "t_end": float(tr.t[-1]), "periods": float(tr.t[-1] / T),
            "max_abs": float(np.abs(tr.x).max()), "success": tr.success}


# ---------------------------------------------------------------------------
# Linear steady state
# ---------------------------------------------------------------------------


def linear_frf(omega2: float, c: float, a: float, Omega: float):
    """Amplitude and phase of the steady state of ``q'' + c q' + w^2 q = a sin(W t)``.

    Returns ``(A, psi)`` with ``q = A sin(W t - psi)``.
    """
    den = math.hypot(omega2 - Omega**2, c * Omega)
    if den == 0:
        raise ValueError("undamped exact resonance: no steady state")
    return a / den, math.atan2(c * Omega, omega2 - Omega**2)


# ---------------------------------------------------------------------------
# Linear time-periodic systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LTPSystem:
    """``x' = A(t) x`` with ``A`` periodic of period ``period``."""

    A: Callable
    period: float
    dim: int
    trace: Optional[Callable] = None  # optional closed form of tr A(t)

    def rhs(self, t, x):
        return self.A(t) @ x

    def matrix_rhs(self, t, y):
        n = self.dim
        return (self.A(t) @ y.reshape(n, n)).ravel()

    def adjoint_rhs(self, t, y):
        return -self.A(t).T @ y

    def trace_integral(self, t_end: float) -> float:
        if self.trace is not None:
            f = self.trace
        else:
            def f(t):
                return float(np.trace(self.A(t)))
        val, _ = quad(f, 0.0, t_end, limit=200, epsabs=1e-14, epsrel=1e-13)
        return float(val)


def mathieu_ltp(omega1_sq: float, c1: float, kappa: float, A: float, psi: float,
                Omega: float = 1.0) -> LTPSystem:
    """Damped Mathieu-type system of the first oscillator about ``q1 = 0``.

    Stiffness ``w1^2 + kappa A^2/2 - (kappa A^2/2) cos(2 W t - 2 psi)``;
    the coefficient matrix has period ``pi / W``.
    """
    mod = 0.5 * kappa * A**2

    def Amat(t):
        return np.array([[0.0, 1.0], [-omega1_sq - mod + mod * math.cos(2 * Omega * t - 2 * psi), -c1]])

    return LTPSystem(Amat, math.pi / Omega, 2, trace=lambda t: -c1)


@dataclass
class MonodromyResult:
    Phi: np.ndarray
    multipliers: np.ndarray
    period: float
    trace_integral: float
    liouville_defect: float

    @property
    def max_modulus(self) -> float:
        return float(np.abs(self.multipliers).max())

    @property
    def stable(self) -> bool:
        return bool(self.max_modulus < 1.0)

    def to_dict(self) -> dict:
        return {"period": self.period, "Phi": self.Phi.tolist(),
                "multipliers": [[float(z.real), float(z.imag)] for z in self.multipliers],
                "max_modulus": self.max_modulus, "stable": self.stable,
                "trace_integral": self.trace_integral, "liouville_defect": self.liouville_defect}


def monodromy(ltp: LTPSystem, period: Optional[float] = None, rtol: float = RTOL,
              atol: float = ATOL) -> MonodromyResult:
    """Fundamental matrix at ``period`` (default: one period of ``A``)."""
    period = ltp.period if period is None else float(period)
    ratio = period / ltp.period
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ValueError("period must be a positive integer multiple of the LTP period")
    n = ltp.dim
    res = solve_ivp(ltp.matrix_rhs, (0.0, period), np.eye(n).ravel(), method="DOP853",
                    rtol=rtol, atol=atol)
    if not res.success:
        raise RuntimeError(f"monodromy integration failed: {res.message}")
    Phi = res.y[:, -1].reshape(n, n)
    rho = np.linalg.eigvals(Phi)
    tr = ltp.trace_integral(period)
    defect = abs(np.prod(rho) - math.exp(tr))
    return MonodromyResult(Phi, rho, period, tr, float(defect))


# ---------------------------------------------------------------------------
# Stability map
# ---------------------------------------------------------------------------


@dataclass
class MapParams:
    omega2: float = 1.0
    c1: float = 0.01
    c2: float = 0.01
    kappa: float = 1.0
    Omega: float = 1.0
    rtol: float = RTOL
    atol: float = ATOL

    def ltp(self, a: float, omega1: float) -> LTPSystem:
        A, psi = linear_frf(self.omega2, self.c2, a, self.Omega)
        return mathieu_ltp(omega1**2, self.c1, self.kappa, A, psi, self.Omega)

    def cell(self, a: float, omega1: float) -> MonodromyResult:
        return monodromy(self.ltp(a, omega1), rtol=self.rtol, atol=self.atol)


@dataclass
class BoundaryPoint:
    a: float
    omega1: float
    max_modulus: float
    multiplier: float  # the real multiplier on the unit circle (sign tells +1 / -1)
    iterations: int

    @property
    def defect(self) -> float:
        return abs(self.max_modulus - 1.0)


@dataclass
class StabilityMap:
    a: np.ndarray
    omega1: np.ndarray
    max_modulus: np.ndarray  # (len(a), len(omega1))
    liouville_defect: np.ndarray
    boundary: list
    params: MapParams

    @property
    def stable(self) -> np.ndarray:
        return self.max_modulus < 1.0

    def grid_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "omega1", "max_abs_rho", "stable"])
        for i, a in enumerate(self.a):
            for j, om in enumerate(self.omega1):
                w.writerow([_g(a), _g(om), _g(self.max_modulus[i, j]), int(self.stable[i, j])])
        return buf.getvalue()

    def boundary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "omega1", "max_abs_rho", "multiplier"])
        for b in self.boundary:
            w.writerow([_g(b.a), _g(b.omega1), _g(b.max_modulus), _g(b.multiplier)])
        return buf.getvalue()


def _g(x) -> str:
    return f"{float(x):.17g}"


def _column(args):
    params, a_grid, omega1 = args
    out = [params.cell(a, omega1) for a in a_grid]
    return [m.max_modulus for m in out], [m.liouville_defect for m in out]


def _bisect_boundary(params: MapParams, omega1: float, a_lo: float, a_hi: float) -> BoundaryPoint:
    """Bisection in ``a`` on ``max|rho| - 1`` between a stable and an unstable cell."""
    g_lo = params.cell(a_lo, omega1).max_modulus - 1.0
    m = params.cell(a_hi, omega1)
    for it in range(1, MAX_BISECTIONS + 1):
        a_mid = 0.5 * (a_lo + a_hi)
        m = params.cell(a_mid, omega1)
        g = m.max_modulus - 1.0
        if abs(g) < BOUNDARY_TOL:
            break
        if (g < 0) == (g_lo < 0):
            a_lo, g_lo = a_mid, g
        else:
            a_hi = a_mid
    rho = m.multipliers[np.argmax(np.abs(m.multipliers))]
    return BoundaryPoint(a_mid, omega1, m.max_modulus, float(rho.real), it)


def resolve_jobs(jobs: Optional[int] = None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("PERORBIT_JOBS", "1") or 1)
    return max(1, int(jobs))


def stability_map(a_grid: Sequence[float], omega1_grid: Sequence[float],
                  params: Optional[MapParams] = None, jobs: Optional[int] = None,
                  boundaries: bool = True) -> StabilityMap:
    """Classify the trivial solution on an ``(a, omega1)`` grid.

    Each cell uses the monodromy over the coefficient period ``pi / W``;
    its multipliers are the square roots of the full-period ones, so the
    stable/unstable verdict is the same. Boundary points are refined by
    bisection in ``a`` wherever neighbouring cells of a column disagree.
    """
    params = params or MapParams()
    a_grid = np.asarray(a_grid, dtype=float)
    omega1_grid = np.asarray(omega1_grid, dtype=float)
    jobs = resolve_jobs(jobs)
    tasks = [(params, a_grid, om) for om in omega1_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            cols = list(ex.map(_column, tasks))
    else:
        cols = [_column(t) for t in tasks]
    mm = np.array([c[0] for c in cols]).T
    ld = np.array([c[1] for c in cols]).T
    found = []
    if boundaries:
        for j, om in enumerate(omega1_grid):
            s = mm[:, j] < 1.0
            for i in np.flatnonzero(s[:-1] != s[1:]):
                found.append(_bisect_boundary(params, om, a_grid[i], a_grid[i + 1]))
    return StabilityMap(a_grid, omega1_grid, mm, ld, found, params)


# ---------------------------------------------------------------------------
# Adjoint periodic solutions and the nonexistence forcing
# ---------------------------------------------------------------------------


@dataclass
class AdjointSolution:
    t: np.ndarray
    y: np.ndarray  # (len(t), n), covers [0, 2 * ltp.period]
    rho: int  # +1 or -1
    multiplier: complex
    natural_period: float
    periodicity_defect: float
    sol: object = field(default=None, repr=False)

    def __call__(self, t):
        return self.sol(t).T * self._scale

    _scale: float = 1.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"y{i + 1}" for i in range(self.y.shape[1])])
        for ti, yi in zip(self.t, self.y):
            w.writerow([_g(ti)] + [_g(v) for v in yi])
        return buf.getvalue()


def _integral(t, y) -> float:
    from scipy.integrate import simpson

    return float(simpson(y, x=t, axis=0))


def adjoint_periodic_solution(ltp: LTPSystem, which: Optional[int] = None, rtol: float = RTOL,
                              atol: float = ATOL, n_samples: int = 4001) -> AdjointSolution:
    """Periodic solution of ``y' = -A(t)^T y``.

    The adjoint monodromy is ``Phi^{-T}``; its eigenvector for the
    multiplier at ``+1`` (``ltp.period``-periodic solution) or ``-1``
    (``2 ltp.period``-periodic) is integrated over ``2 ltp.period`` and
    scaled to unit L2 norm over that window.
    """
    mono = monodromy(ltp, rtol=rtol, atol=atol)
    psi = np.linalg.inv(mono.Phi).T
    mu, vecs = np.linalg.eig(psi)
    if which is None:
        k = int(np.argmin(np.minimum(np.abs(mu - 1), np.abs(mu + 1))))
        which = 1 if abs(mu[k] - 1) <= abs(mu[k] + 1) else -1
    else:
        which = 1 if which > 0 else -1
        k = int(np.argmin(np.abs(mu - which)))
    if abs(mu[k] - which) > UNIT_MULTIPLIER_TOL:
        raise ValueError(f"no adjoint multiplier within {UNIT_MULTIPLIER_TOL} of {which}: {mu}")
    y0 = np.real_if_close(vecs[:, k], tol=1e6).real
    y0 = y0 / np.linalg.norm(y0)
    T = 2 * ltp.period
    t = np.linspace(0.0, T, n_samples)
    res = solve_ivp(ltp.adjoint_rhs, (0.0, T), y0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=t, dense_output=True)
    if not res.success:
        raise RuntimeError(res.message)
    y = res.y.T
    scale = 1.0 / math.sqrt(_integral(t, np.sum(y**2, axis=1)))
    y = y * scale
    natural = ltp.period if which == 1 else T
    y_nat = res.sol(ltp.period).T * scale
    defect = float(np.linalg.norm(y_nat - which * y[0]))
    out = AdjointSolution(t, y, which, complex(mu[k]), natural, defect, res.sol)
    out._scale = scale
    return out


@dataclass
class OrthogonalityForcing:
    t: np.ndarray
    f1: np.ndarray
    integral: float
    mean: float
    sign: int

    def as_fourier(self, K: int) -> FourierForcing:
        """Truncated Fourier series of ``f1`` over the sampled window."""
        T = self.t[-1] - self.t[0]
        M = self.t.size - 1
        spec = np.fft.rfft(self.f1[:-1]) * (2.0 / M)
        c0 = np.array([spec[0].real])
        s = -spec[1:K + 1].imag[:, None]
        c = spec[1:K + 1].real[:, None]
        return FourierForcing(T, c0, s, c)


def orthogonality_violating_forcing(adj: AdjointSolution) -> OrthogonalityForcing:
    """Forcing ``f1 = -sign(int y2) y2`` on the first oscillator.

    The sign makes the mean of ``f1`` nonpositive, and the orthogonality
    integral ``int y^T (0, f1) dt = -sign(int y2) int y2^2 dt`` is nonzero.
    """
    y2 = adj.y[:, 1]
    m = _integral(adj.t, y2)
    sign = 1 if m < 0 else -1
    f1 = sign * y2
    sq = _integral(adj.t, y2**2)
    if sq < 1e-10:
        raise ValueError("degenerate adjoint solution: int y2^2 is below 1e-10")
    integral = _integral(adj.t, y2 * f1)
    T = adj.t[-1] - adj.t[0]
    return OrthogonalityForcing(adj.t, f1, integral, _integral(adj.t, f1) / T, sign)


# ---------------------------------------------------------------------------
# Variational monodromy of harmonic-balance orbits
# ---------------------------------------------------------------------------


def variational_ltp(system: MechanicalSystem, ansatz) -> LTPSystem:
    """Linearisation ``[[0, I], [-M^-1 J(q(t)), -M^-1 C]]`` along an HB orbit."""
    n = system.dim
    Minv = np.linalg.inv(system.mass)
    MC = Minv @ system.damping
    nl = system.nonlinearity

    def Amat(t):
        q = ansatz(t)[0]
        out = np.zeros((2 * n, 2 * n))
        out[:n, n:] = np.eye(n)
        out[n:, :n] = -Minv @ np.atleast_2d(nl.jacobian(q))
        out[n:, n:] = -MC
        return out

    tr = -float(np.trace(MC))
    return LTPSystem(Amat, ansatz.period, 2 * n, trace=lambda t: tr)


def hb_monodromy(system: MechanicalSystem, ansatz, rtol: float = RTOL, atol: float = ATOL) -> MonodromyResult:
    return monodromy(variational_ltp(system, ansatz), rtol=rtol, atol=atol)


def shadowing_defect(system: MechanicalSystem, ansatz, n_periods: int = 200, samples_per_period: int = 64,
                     rtol: float = RTOL, atol: float = ATOL) -> float:
    """Largest position gap between an HB orbit and the integrated flow.

    The flow starts on the orbit at ``t = 0`` and runs for ``n_periods``;
    a stable orbit keeps the gap at the level of the truncation error.
    """
    T = ansatz.period
    x0 = np.concatenate([ansatz(np.array([0.0]))[0], ansatz.velocity(np.array([0.0]))[0]])
    t_eval = np.arange(n_periods * samples_per_period + 1) * (T / samples_per_period)
    tr = integrate(system.rhs, x0, (0.0, t_eval[-1]), rtol=rtol, atol=atol, t_eval=t_eval)
    if not tr.success or tr.escaped:
        return float("inf")
    n = system.dim
    return float(np.abs(tr.x[:, :n] - ansatz(tr.t)).max())
