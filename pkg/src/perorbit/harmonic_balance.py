"""Harmonic balance with alternating frequency-time (AFT) evaluation.

Coefficient layout, per DOF and DOF-major across DOFs::

    [c0, s1, c1, s2, c2, ..., sK, cK]

for ``q(t) = c0/2 + sum_k s_k sin(k W t) + c_k cos(k W t)``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from fractions import Fraction
from itertools import accumulate
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .model import FejerForcing, MechanicalSystem, fejer_blocks

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
MAX_HALVINGS = 10
RECONSTRUCT_SAMPLES = 2048
CONVERGED_AMPLITUDE_DELTA = 1e-6


def default_samples(K: int) -> int:
    """Next power of two >= 8K + 8."""
    return 1 << int(np.ceil(np.log2(8 * K + 8)))


def basis(omega: float, K: int, t) -> np.ndarray:
    """Rows ``[1/2, sin W t, cos W t, ..., sin K W t, cos K W t]``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    E = np.empty((t.size, 2 * K + 1))
    E[:, 0] = 0.5
    arg = np.outer(t, np.arange(1, K + 1)) * omega
    E[:, 1::2] = np.sin(arg)
    E[:, 2::2] = np.cos(arg)
    return E


@dataclass(frozen=True, eq=False)
class FourierAnsatz:
    """Truncated Fourier representation of a periodic orbit.

    ``coeffs`` has shape ``(N, 2K+1)``.
    """

    omega: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if c.shape[1] % 2 != 1:
            raise ValueError("each DOF needs 2K+1 coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, dim: int, K: int, omega: float) -> "FourierAnsatz":
        return cls(omega, np.zeros((dim, 2 * K + 1)))

    @classmethod
    def from_vector(cls, x, dim: int, omega: float) -> "FourierAnsatz":
        return cls(omega, np.asarray(x, dtype=float).reshape(dim, -1))

    @classmethod
    def from_harmonics(cls, omega, c0, s, c) -> "FourierAnsatz":
        """Build from ``c0 (N,)``, ``s (K, N)``, ``c (K, N)`` tables."""
        c0 = np.atleast_1d(c0)
        s = np.asarray(s, dtype=float).reshape(-1, c0.size)
        c = np.asarray(c, dtype=float).reshape(-1, c0.size)
        coeffs = np.empty((c0.size, 2 * s.shape[0] + 1))
        coeffs[:, 0] = c0
        coeffs[:, 1::2] = s.T
        coeffs[:, 2::2] = c.T
        return cls(omega, coeffs)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def K(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def vector(self) -> np.ndarray:
        return self.coeffs.ravel().copy()

    @property
    def c0(self):
        return self.coeffs[:, 0]

    @property
    def s(self):
        return self.coeffs[:, 1::2].T

    @property
    def c(self):
        return self.coeffs[:, 2::2].T

    def resized(self, K: int) -> "FourierAnsatz":
        """Truncate or zero-pad to ``K`` harmonics."""
        out = np.zeros((self.dim, 2 * K + 1))
        n = min(self.coeffs.shape[1], out.shape[1])
        out[:, :n] = self.coeffs[:, :n]
        return FourierAnsatz(self.omega, out)

    def with_omega(self, omega: float) -> "FourierAnsatz":
        return FourierAnsatz(omega, self.coeffs.copy())

    def __call__(self, t) -> np.ndarray:
        """Positions at times ``t``; shape ``(len(t), N)``."""
        return basis(self.omega, self.K, t) @ self.coeffs.T

    def velocity(self, t) -> np.ndarray:
        return basis(self.omega, self.K, t) @ self.derivative_coeffs().T

    def derivative_coeffs(self) -> np.ndarray:
        d = np.zeros_like(self.coeffs)
        k = np.arange(1, self.K + 1) * self.omega
        d[:, 1::2] = -k * self.coeffs[:, 2::2]
        d[:, 2::2] = k * self.coeffs[:, 1::2]
        return d

    def mean(self) -> np.ndarray:
        return 0.5 * self.coeffs[:, 0]

    def reconstruct(self, n_samples: int = RECONSTRUCT_SAMPLES):
        """Uniform samples over one period, endpoint excluded."""
        t = np.arange(n_samples) * (self.period / n_samples)
        return t, self(t)

    def amplitude(self, n_samples: int = RECONSTRUCT_SAMPLES) -> np.ndarray:
        """Per-DOF ``max_t |q_j(t)|``."""
        _, q = self.reconstruct(n_samples)
        return np.abs(q).max(axis=0)

    def max_value(self, n_samples: int = RECONSTRUCT_SAMPLES) -> np.ndarray:
        """Per-DOF ``max_t q_j(t)``."""
        _, q = self.reconstruct(n_samples)
        return q.max(axis=0)

    def harmonic_energy(self) -> np.ndarray:
        """Per-harmonic squared amplitude summed over DOFs (index 0 = mean)."""
        e = np.empty(self.K + 1)
        e[0] = np.sum((0.5 * self.coeffs[:, 0]) ** 2)
        e[1:] = 0.5 * np.sum(self.coeffs[:, 1::2] ** 2 + self.coeffs[:, 2::2] ** 2, axis=0)
        return e

    def to_dict(self) -> dict:
        return {"omega": self.omega, "K": self.K, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d) -> "FourierAnsatz":
        return cls(float(d["omega"]), np.asarray(d["coeffs"], dtype=float))


def reconstruct(ansatz: FourierAnsatz, n_samples: int = RECONSTRUCT_SAMPLES):
    return ansatz.reconstruct(n_samples)


def amplitude(ansatz: FourierAnsatz, n_samples: int = RECONSTRUCT_SAMPLES) -> np.ndarray:
    return ansatz.amplitude(n_samples)


# ---------------------------------------------------------------------------
# Residual and Jacobian
# ---------------------------------------------------------------------------


def linear_operator(mass, damping, omega: float, K: int) -> np.ndarray:
    """Frequency-domain matrix of ``M q'' + C q'`` on the coefficient vector."""
    N = mass.shape[0]
    H = 2 * K + 1
    L = np.zeros((N, H, N, H))
    for k in range(1, K + 1):
        w = k * omega
        si, ci = 2 * k - 1, 2 * k
        L[:, si, :, si] = -(w**2) * mass
        L[:, ci, :, ci] = -(w**2) * mass
        # C d/dt (s sin + c cos) = C w (s cos - c sin)
        L[:, si, :, ci] = -w * damping
        L[:, ci, :, si] = w * damping
    return L.reshape(N * H, N * H)


def project(samples: np.ndarray, K: int) -> np.ndarray:
    """Fourier coefficients ``(N, 2K+1)`` of uniformly sampled ``(M, N)`` data."""
    M = samples.shape[0]
    X = np.fft.rfft(samples, axis=0) * (2.0 / M)
    out = np.empty((samples.shape[1], 2 * K + 1))
    out[:, 0] = X[0].real
    out[:, 1::2] = -X[1 : K + 1].imag.T
    out[:, 2::2] = X[1 : K + 1].real.T
    return out


def forcing_vector(system: MechanicalSystem, K: int) -> np.ndarray:
    c0, s, c = system.forcing.fourier_coefficients(K)
    return FourierAnsatz.from_harmonics(1.0, c0, s, c).vector


def _check_samples(K: int, n_samples: int):
    if n_samples < 4 * K + 2 or n_samples % 2:
        raise ValueError(f"n_samples={n_samples} must be even and >= 4K+2 = {4 * K + 2}")


def aft_residual(system: MechanicalSystem, ansatz: FourierAnsatz, n_samples: Optional[int] = None,
                 forcing: Optional[np.ndarray] = None) -> np.ndarray:
    """Projected equation-of-motion defect, length ``N (2K+1)``.

    The forcing enters through its exact Fourier coefficients up to ``K``,
    applied at the ansatz frequency.
    """
    K = ansatz.K
    n_samples = n_samples or default_samples(K)
    _check_samples(K, n_samples)
    L = linear_operator(system.mass, system.damping, ansatz.omega, K)
    t = np.arange(n_samples) * (ansatz.period / n_samples)
    q = ansatz(t)
    S = project(system.nonlinearity.force(q), K)
    F = forcing_vector(system, K) if forcing is None else forcing
    return L @ ansatz.vector + S.ravel() - F


def aft_jacobian(system: MechanicalSystem, ansatz: FourierAnsatz, n_samples: Optional[int] = None) -> np.ndarray:
    """Derivative of :func:`aft_residual` with respect to the coefficients."""
    K, N = ansatz.K, ansatz.dim
    H = 2 * K + 1
    n_samples = n_samples or default_samples(K)
    L = linear_operator(system.mass, system.damping, ansatz.omega, K)
    nl = system.nonlinearity
    if not nl.analytic_jacobian:
        return L + _fd_coefficient_jacobian(system, ansatz, n_samples)
    t = np.arange(n_samples) * (ansatz.period / n_samples)
    E = basis(ansatz.omega, K, t)
    J = nl.jacobian(E @ ansatz.coeffs.T)
    B = E.copy()
    B[:, 0] = 1.0
    G = np.einsum("mh,mij,mg->ihjg", B, J, E, optimize=True) * (2.0 / n_samples)
    return L + G.reshape(N * H, N * H)


def _fd_coefficient_jacobian(system, ansatz, n_samples):
    x = ansatz.vector
    n = x.size
    t = np.arange(n_samples) * (ansatz.period / n_samples)

    def nl_part(v):
        a = FourierAnsatz.from_vector(v, ansatz.dim, ansatz.omega)
        return project(system.nonlinearity.force(a(t)), ansatz.K).ravel()

    G = np.empty((n, n))
    for i in range(n):
        h = max(1e-7, 1e-7 * abs(x[i]))
        e = np.zeros(n)
        e[i] = h
        G[:, i] = (nl_part(x + e) - nl_part(x - e)) / (2 * h)
    return G


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------


@dataclass
class HBSolution:
    ansatz: FourierAnsatz
    residual_norm: float
    iterations: int
    n_samples: int
    converged: bool
    status: str = "converged"
    tol: float = DEFAULT_TOL

    @property
    def amplitude(self) -> np.ndarray:
        return self.ansatz.amplitude()

    @property
    def omega(self) -> float:
        return self.ansatz.omega

    def to_dict(self) -> dict:
        return {
            "ansatz": self.ansatz.to_dict(),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "n_samples": self.n_samples,
            "converged": self.converged,
            "status": self.status,
            "amplitude": self.amplitude.tolist(),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d) -> "HBSolution":
        return cls(FourierAnsatz.from_dict(d["ansatz"]), float(d["residual_norm"]), int(d["iterations"]),
                   int(d["n_samples"]), bool(d["converged"]), d.get("status", "converged"))

    def to_csv(self, n_samples: int = RECONSTRUCT_SAMPLES) -> str:
        t, q = self.ansatz.reconstruct(n_samples)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"q{j + 1}" for j in range(q.shape[1])])
        for ti, qi in zip(t, q):
            w.writerow([repr(float(ti))] + [repr(float(v)) for v in qi])
        return buf.getvalue()


def newton(residual, jacobian, x0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Damped Newton with step halving on residual increase.

    Returns ``(x, residual_norm, iterations, status)``.
    """
    x = np.array(x0, dtype=float)
    r = residual(x)
    rn = np.linalg.norm(r)
    for it in range(max_iter + 1):
        if not np.isfinite(rn):
            return x, rn, it, "diverged"
        if rn < tol:
            return x, rn, it, "converged"
        if it == max_iter:
            break
        J = jacobian(x)
        try:
            lu = scipy.linalg.lu_factor(J, check_finite=True)
            if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.abs(J).max():
                return x, rn, it, "singular-jacobian"
            dx = scipy.linalg.lu_solve(lu, r)
        except (np.linalg.LinAlgError, ValueError):
            return x, rn, it, "singular-jacobian"
        step = 1.0
        for _ in range(MAX_HALVINGS + 1):
            x_new = x - step * dx
            r_new = residual(x_new)
            rn_new = np.linalg.norm(r_new)
            if rn_new < rn:
                break
            step *= 0.5
        else:
            # no decrease: take the shortest step anyway and let the budget decide
            pass
        x, r, rn = x_new, r_new, rn_new
    return x, rn, max_iter, "max-iter"


def hb_solve(system: MechanicalSystem, omega: Optional[float] = None, K: int = 7,
             initial: Optional[FourierAnsatz] = None, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, n_samples: Optional[int] = None) -> HBSolution:
    """Solve the harmonic-balance equations at frequency ``omega``.

    ``omega`` defaults to the forcing frequency; a different value rescales
    time in the forcing, keeping its harmonic content. ``initial`` is resized
    to ``K`` harmonics; the default is the zero ansatz.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    omega = system.omega if omega is None else float(omega)
    n_samples = n_samples or default_samples(K)
    _check_samples(K, n_samples)
    N = system.dim
    a0 = FourierAnsatz.zeros(N, K, omega) if initial is None else initial.resized(K).with_omega(omega)
    F = forcing_vector(system, K)

    def res(x):
        return aft_residual(system, FourierAnsatz.from_vector(x, N, omega), n_samples, F)

    def jac(x):
        return aft_jacobian(system, FourierAnsatz.from_vector(x, N, omega), n_samples)

    x, rn, it, status = newton(res, jac, a0.vector, tol, max_iter)
    sol = HBSolution(FourierAnsatz.from_vector(x, N, omega), float(rn), it, n_samples,
                     status == "converged", status, tol)
    if not sol.converged:
        log.debug("hb_solve at omega=%g K=%d: %s (|R|=%.3e)", omega, K, status, rn)
    return sol


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------


@dataclass
class ConvergenceRow:
    K: int
    amplitude: float
    residual_norm: float
    converged: bool
    apparently_converged: bool
    solution: HBSolution = field(repr=False)


def hb_convergence_study(system: MechanicalSystem, K_list: Sequence[int], dof: int = 0,
                         tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                         n_samples: Optional[int] = None, initial: Optional[FourierAnsatz] = None):
    """Raise ``K`` step by step, warm-starting each solve from the previous one.

    The amplitude is ``max_t |q_dof(t)|``. A row is flagged *apparently
    converged* once its amplitude differs from the previous row by less
    than 1e-6. That is the usual stopping heuristic and it can be fooled.
    """
    K_list = list(K_list)
    if K_list != sorted(K_list):
        raise ValueError("K_list must be ascending")
    rows = []
    prev = initial
    prev_amp = None
    for K in K_list:
        samples = n_samples if n_samples and n_samples >= 4 * K + 2 else None
        sol = hb_solve(system, K=K, initial=prev, tol=tol, max_iter=max_iter, n_samples=samples)
        amp = float(sol.ansatz.amplitude()[dof])
        flag = prev_amp is not None and abs(amp - prev_amp) < CONVERGED_AMPLITUDE_DELTA
        rows.append(ConvergenceRow(K, amp, sol.residual_norm, sol.converged, flag, sol))
        prev, prev_amp = sol.ansatz, amp
    return rows


# ---------------------------------------------------------------------------
# Fejer partial sums
# ---------------------------------------------------------------------------


@dataclass
class FejerTable:
    n: np.ndarray
    partial_sums: np.ndarray
    sup_norm: float
    full_sum: float

    @property
    def max_partial(self) -> float:
        return float(np.abs(self.partial_sums).max())

    @property
    def ratio(self) -> float:
        return self.max_partial / self.sup_norm


def fejer_sup_norm(forcing: FejerForcing, n_samples: int = 1 << 16) -> float:
    """Dense-sampling estimate of ``max_t |f_f(t)|``."""
    table = forcing.cosine_table()
    spec = np.zeros(n_samples // 2 + 1)
    spec[: table.size] = table
    spec[0] *= 2
    # irfft of a pure cosine table: f(t_m) = sum_n a_n cos(n t_m)
    vals = np.fft.irfft(spec * (n_samples / 2), n_samples)
    return float(np.abs(vals).max())


def fejer_partial_sum_demo(n_blocks: int = 2, n_list: Optional[Sequence[int]] = None,
                           n_samples: int = 1 << 16) -> FejerTable:
    """Partial sums ``S_n(f_f)(0)`` of the Fejer function.

    ``f_f`` is a cosine polynomial, so ``S_n(0)`` is the running sum of its
    cosine amplitudes up to harmonic ``n``. The full sum is ``f_f(0) = 0``;
    the sums are accumulated in rational arithmetic, so it is exactly zero.
    """
    ff = FejerForcing(n_blocks)
    # exact rational coefficients, so the running sums carry no round-off
    exact = [Fraction(0)] * (ff.max_harmonic + 1)
    for k, (p, q) in enumerate(fejer_blocks(n_blocks), start=1):
        for l in range(1, q + 1):
            w = Fraction(ff.scale) * Fraction(1, k * k * l)
            exact[p - l] += w
            exact[p + l] -= w
    running = np.array([float(v) for v in accumulate(exact)])
    if n_list is None:
        n = np.arange(running.size)
    else:
        n = np.clip(np.asarray(n_list, dtype=int), 0, running.size - 1)
    return FejerTable(n, running[n], fejer_sup_norm(ff, n_samples), float(running[-1]))
