"""System and forcing data model.

A system has the form ``M q'' + C q' + S(q) = f(t)`` with ``f`` periodic.
``S`` collects every position-dependent force, linear stiffness included.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

FD_REL_STEP = 1e-6


def _as_times(t):
    t = np.asarray(t, dtype=float)
    return t, t.ndim == 0


# ---------------------------------------------------------------------------
# Forcing signals
# ---------------------------------------------------------------------------


class ForcingSignal:
    """Base class for T-periodic excitations.

    Every signal reduces to a truncated real Fourier series through
    :meth:`fourier_coefficients`, with the convention

        f(t) = c0/2 + sum_k [ s_k sin(k W t) + c_k cos(k W t) ],  W = 2 pi / T.
    """

    period: float
    dim: int

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period

    @property
    def max_harmonic(self) -> int:
        raise NotImplementedError

    def fourier_coefficients(self, K: Optional[int] = None):
        """Return ``(c0, s, c)`` with shapes ``(N,)``, ``(K, N)``, ``(K, N)``.

        Harmonics above ``K`` are dropped; missing ones are zero-padded.
        """
        raise NotImplementedError

    def __call__(self, t):
        t, scalar = _as_times(t)
        c0, s, c = self.fourier_coefficients()
        k = np.arange(1, s.shape[0] + 1)
        arg = np.multiply.outer(t.ravel(), k) * self.omega
        out = 0.5 * c0 + np.sin(arg) @ s + np.cos(arg) @ c
        return out[0] if scalar else out.reshape(t.shape + (self.dim,))

    def mean(self) -> np.ndarray:
        c0, _, _ = self.fourier_coefficients(0)
        return 0.5 * c0

    def l2_norm(self) -> float:
        """``C_f = (int_0^T f.f dt)^(1/2)`` via Parseval."""
        c0, s, c = self.fourier_coefficients()
        energy = np.sum((0.5 * c0) ** 2) + 0.5 * (np.sum(s**2) + np.sum(c**2))
        return float(np.sqrt(self.period * energy))

    def to_fourier(self) -> "FourierForcing":
        c0, s, c = self.fourier_coefficients()
        return FourierForcing(self.period, c0, s, c)

    def to_dict(self) -> dict:
        raise NotImplementedError


def _pad(s: np.ndarray, c: np.ndarray, K: Optional[int]):
    if K is None:
        return s, c
    n = s.shape[0]
    if K <= n:
        return s[:K], c[:K]
    pad = np.zeros((K - n, s.shape[1]))
    return np.vstack([s, pad]), np.vstack([c, pad])


@dataclass(frozen=True, eq=False)
class FourierForcing(ForcingSignal):
    """Truncated Fourier series given per harmonic and per DOF."""

    period: float
    c0: np.ndarray
    s: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        c0 = np.atleast_1d(np.asarray(self.c0, dtype=float))
        s = np.asarray(self.s, dtype=float).reshape(-1, c0.size)
        c = np.asarray(self.c, dtype=float).reshape(-1, c0.size)
        if s.shape != c.shape:
            raise ValueError("sine and cosine coefficient tables differ in shape")
        if not self.period > 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.c0.size

    @property
    def max_harmonic(self) -> int:
        return self.s.shape[0]

    def fourier_coefficients(self, K=None):
        s, c = _pad(self.s, self.c, K)
        return self.c0.copy(), s.copy(), c.copy()

    @classmethod
    def harmonic(cls, amplitude, omega, dim=1, dof=0, kind="cos", order=1):
        """Single harmonic ``amplitude * cos(order W t)`` (or sin) on one DOF."""
        s = np.zeros((order, dim))
        c = np.zeros((order, dim))
        (c if kind == "cos" else s)[order - 1, dof] = amplitude
        return cls(2 * np.pi / omega, np.zeros(dim), s, c)

    @classmethod
    def constant(cls, value, period=2 * np.pi):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(period, 2 * value, np.zeros((0, value.size)), np.zeros((0, value.size)))

    def to_dict(self):
        return {
            "type": "fourier",
            "period": self.period,
            "c0": self.c0.tolist(),
            "s": self.s.tolist(),
            "c": self.c.tolist(),
        }


@dataclass(frozen=True, eq=False)
class TriangularForcing(ForcingSignal):
    """Triangular wave of amplitude ``f_m``, distributed on DOFs by ``direction``.

    Odd sine series ``f_m 8/pi^2 sum_k (-1)^k sin((2k+1) W t)/(2k+1)^2``,
    truncated after ``n_terms`` odd harmonics.
    """

    amplitude: float
    frequency: float
    n_terms: int = 200
    direction: Sequence[float] = (1.0,)

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "direction", d)
        if self.n_terms < 1:
            raise ValueError("n_terms must be at least 1")
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.frequency

    @property
    def dim(self) -> int:
        return self.direction.size

    @property
    def max_harmonic(self) -> int:
        return 2 * self.n_terms - 1

    def odd_amplitudes(self) -> np.ndarray:
        k = np.arange(self.n_terms)
        return self.amplitude * 8 / np.pi**2 * (-1.0) ** k / (2 * k + 1) ** 2

    def fourier_coefficients(self, K=None):
        Kmax = self.max_harmonic if K is None else K
        s = np.zeros((Kmax, self.dim))
        amps = self.odd_amplitudes()
        orders = 2 * np.arange(self.n_terms) + 1
        keep = orders <= Kmax
        s[orders[keep] - 1] = np.outer(amps[keep], self.direction)
        return np.zeros(self.dim), s, np.zeros_like(s)

    def mean(self):
        return np.zeros(self.dim)

    def to_dict(self):
        return {
            "type": "triangular",
            "period": self.period,
            "amplitude": self.amplitude,
            "n_terms": self.n_terms,
            "direction": self.direction.tolist(),
        }


def fejer_blocks(n_blocks: int):
    """Block frequencies ``(p_k, q_k) = (2^(k^3+1), 2^(k^3))``, k = 1..n_blocks."""
    return [(2 ** (k**3 + 1), 2 ** (k**3)) for k in range(1, n_blocks + 1)]


MAX_FEJER_BLOCKS = 2


@dataclass(frozen=True, eq=False)
class FejerForcing(ForcingSignal):
    """Truncated Fejer function

        f_f(t) = sum_k (2/k^2) sin(p_k t) sum_{l=1}^{q_k} sin(l t)/l

    on the 2 pi-periodic time axis. ``stiffness``/``damping`` turn it into
    ``f_f'' + c f_f' + k f_f``, whose steady response on
    ``q'' + c q' + k q = f`` is ``f_f`` itself.
    """

    n_blocks: int
    scale: float = 1.0
    direction: Sequence[float] = (1.0,)
    stiffness: Optional[float] = None
    damping: float = 0.0

    def __post_init__(self):
        if not 1 <= self.n_blocks <= MAX_FEJER_BLOCKS:
            raise ValueError(
                f"n_blocks must be in 1..{MAX_FEJER_BLOCKS}; block frequencies grow like 2^(k^3)"
            )
        object.__setattr__(self, "direction", np.atleast_1d(np.asarray(self.direction, dtype=float)))

    period = 2 * np.pi

    @property
    def dim(self) -> int:
        return self.direction.size

    @property
    def max_harmonic(self) -> int:
        p, q = fejer_blocks(self.n_blocks)[-1]
        return p + q

    def cosine_table(self) -> np.ndarray:
        """Cosine amplitudes of ``f_f`` by harmonic (index 0 is the mean)."""
        table = np.zeros(self.max_harmonic + 1)
        for k, (p, q) in enumerate(fejer_blocks(self.n_blocks), start=1):
            l = np.arange(1, q + 1)
            w = self.scale * (2.0 / k**2) / l
            # sin a sin b = (cos(a-b) - cos(a+b)) / 2
            np.add.at(table, p - l, 0.5 * w)
            np.add.at(table, p + l, -0.5 * w)
        return table

    def fourier_coefficients(self, K=None):
        table = self.cosine_table()
        n = np.arange(table.size)
        if self.stiffness is not None:
            # cos coefficient a_n -> (k - n^2) a_n cos, and c*n*(-a_n) sin
            sin_part = -self.damping * n * table
            table = (self.stiffness - n**2) * table
        else:
            sin_part = np.zeros_like(table)
        c = np.outer(table[1:], self.direction)
        s = np.outer(sin_part[1:], self.direction)
        s, c = _pad(s, c, K)
        return 2 * table[0] * self.direction, s, c

    def to_dict(self):
        out = {
            "type": "fejer",
            "period": self.period,
            "n_blocks": self.n_blocks,
            "scale": self.scale,
            "direction": self.direction.tolist(),
        }
        if self.stiffness is not None:
            out.update(stiffness=self.stiffness, damping=self.damping)
        return out


def forcing_from_dict(d: dict) -> ForcingSignal:
    kind = d["type"]
    if kind == "fourier":
        c0 = np.atleast_1d(np.asarray(d.get("c0", [0.0]), dtype=float))
        n = c0.size
        s = np.asarray(d.get("s", []), dtype=float).reshape(-1, n)
        c = np.asarray(d.get("c", []), dtype=float).reshape(-1, n)
        if s.shape[0] != c.shape[0]:
            K = max(s.shape[0], c.shape[0])
            s, c = _pad(s, np.zeros((0, n)), K)[0], _pad(c, np.zeros((0, n)), K)[0]
        return FourierForcing(float(d["period"]), c0, s, c)
    if kind == "triangular":
        if "frequency" in d:
            freq = float(d["frequency"])
        else:
            freq = 2 * np.pi / float(d["period"])
        return TriangularForcing(
            float(d["amplitude"]), freq, int(d.get("n_terms", 200)), d.get("direction", [1.0])
        )
    if kind == "fejer":
        return FejerForcing(
            int(d["n_blocks"]),
            float(d.get("scale", 1.0)),
            d.get("direction", [1.0]),
            d.get("stiffness"),
            float(d.get("damping", 0.0)),
        )
    raise ValueError(f"unknown forcing type {kind!r}")


# ---------------------------------------------------------------------------
# Nonlinearities
# ---------------------------------------------------------------------------


class Nonlinearity:
    """Position-dependent force ``S(q)``.

    ``force`` and ``jacobian`` accept a single point ``(N,)`` or a stack of
    points ``(M, N)`` and return ``(…, N)`` and ``(…, N, N)`` respectively.
    """

    kind: str = "custom"
    dim: int
    has_potential: bool = False

    def force(self, q):
        raise NotImplementedError

    def jacobian(self, q):
        return fd_jacobian(self.force, q)

    @property
    def analytic_jacobian(self) -> bool:
        return True

    def potential(self, q):
        raise NotImplementedError(f"{type(self).__name__} declares no potential")

    def hessian(self, q):
        """Hessian of the potential; equals the Jacobian of ``S``."""
        if not self.has_potential:
            raise NotImplementedError(f"{type(self).__name__} declares no potential")
        return self.jacobian(q)

    def bounds(self):
        """Global ``(inf, sup)`` of each component when known in closed form."""
        return None

    def __call__(self, q):
        return self.force(q)

    def to_dict(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no JSON form")


def fd_jacobian(func, q):
    """Central differences with step ``max(1e-6, 1e-6 |q_i|)``."""
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    Q = np.atleast_2d(q)
    n = Q.shape[1]
    J = np.empty(Q.shape + (n,))
    for i in range(n):
        h = np.maximum(FD_REL_STEP, FD_REL_STEP * np.abs(Q[:, i]))
        dq = np.zeros_like(Q)
        dq[:, i] = h
        J[:, :, i] = (np.atleast_2d(func(Q + dq)) - np.atleast_2d(func(Q - dq))) / (2 * h)[:, None]
    return J[0] if single else J


@dataclass(frozen=True, eq=False)
class PolynomialNonlinearity(Nonlinearity):
    """Sum of monomials; each term is ``(target_dof, exponents, coefficient)``.

    The Duffing term ``kappa q^3`` on a single DOF is ``(0, (3,), kappa)``.
    When ``declared_potential`` is set the Jacobian must be symmetric; the
    potential is then ``V(q) = int_0^1 q.S(s q) ds``, exact term by term.
    """

    dim: int
    terms: tuple
    declared_potential: bool = False
    kind = "polynomial"

    def __post_init__(self):
        clean = []
        for target, exps, coeff in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dim or not 0 <= target < self.dim or min(exps) < 0:
                raise ValueError(f"bad polynomial term {(target, exps, coeff)}")
            clean.append((int(target), exps, float(coeff)))
        object.__setattr__(self, "terms", tuple(clean))
        if self.declared_potential:
            rng = np.random.default_rng(0)
            pts = rng.uniform(-2, 2, size=(20, self.dim))
            J = self.jacobian(pts)
            scale = 1.0 + np.abs(J).max()
            if np.abs(J - np.swapaxes(J, -1, -2)).max() > 1e-10 * scale:
                raise ValueError("declared potential but the Jacobian is not symmetric")

    @property
    def has_potential(self):
        return self.declared_potential

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e, _ in self.terms), default=0)

    def force(self, q):
        q = np.asarray(q, dtype=float)
        out = np.zeros(q.shape)
        for target, exps, coeff in self.terms:
            out[..., target] += coeff * np.prod(q**np.array(exps), axis=-1)
        return out

    def jacobian(self, q):
        q = np.asarray(q, dtype=float)
        J = np.zeros(q.shape + (self.dim,))
        for target, exps, coeff in self.terms:
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                d = list(exps)
                d[i] -= 1
                J[..., target, i] += coeff * e * np.prod(q ** np.array(d), axis=-1)
        return J

    def potential(self, q):
        if not self.declared_potential:
            return super().potential(q)
        q = np.asarray(q, dtype=float)
        V = np.zeros(q.shape[:-1])
        for target, exps, coeff in self.terms:
            deg = sum(exps)
            V += coeff * q[..., target] * np.prod(q ** np.array(exps), axis=-1) / (deg + 1)
        return V

    def depends_only_on_own_dof(self) -> bool:
        return all(
            all(e == 0 for i, e in enumerate(exps) if i != target) for target, exps, _ in self.terms
        )

    def univariate_coeffs(self, j: int) -> np.ndarray:
        """Coefficients (ascending powers) of ``S_j`` for a decoupled term set."""
        deg = max((exps[j] for t, exps, _ in self.terms if t == j), default=0)
        p = np.zeros(deg + 1)
        for target, exps, coeff in self.terms:
            if target == j:
                p[exps[j]] += coeff
        return p

    def bounds(self):
        # Closed form only for decoupled polynomials; an unbounded side is +-inf.
        if not self.depends_only_on_own_dof():
            return None
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for j in range(self.dim):
            lo[j], hi[j] = _poly_range(self.univariate_coeffs(j))
        return lo, hi

    def to_dict(self):
        return {
            "type": "polynomial",
            "terms": [[t, list(e), c] for t, e, c in self.terms],
            "declared_potential": self.declared_potential,
        }


def _poly_range(p: np.ndarray):
    """Range of the real polynomial with ascending coefficients ``p``."""
    p = np.trim_zeros(np.asarray(p, dtype=float), "b")
    if p.size == 0:
        return 0.0, 0.0
    deg = p.size - 1
    if deg == 0:
        return float(p[0]), float(p[0])
    lead = p[-1]
    if deg % 2 == 1:
        return -math.inf, math.inf
    crit = np.polynomial.polynomial.polyroots(np.polynomial.polynomial.polyder(p))
    crit = crit[np.abs(crit.imag) < 1e-12].real
    vals = np.polynomial.polynomial.polyval(crit, p)
    if lead > 0:
        return float(vals.min()), math.inf
    return -math.inf, float(vals.max())


@dataclass(frozen=True)
class CubicSpring:
    """Spring law ``S(d) = k d + kappa d^3``."""

    k: float
    kappa: float = 0.0

    def force(self, d):
        return self.k * d + self.kappa * d**3

    def stiffness(self, d):
        return self.k + 3 * self.kappa * d**2

    def energy(self, d):
        return 0.5 * self.k * d**2 + 0.25 * self.kappa * d**4

    @property
    def hardening(self) -> bool:
        """``dS/dd > 0`` everywhere."""
        return self.k > 0 and self.kappa >= 0

    @property
    def min_stiffness(self) -> float:
        return self.k if self.kappa >= 0 else -math.inf

    @property
    def absent(self) -> bool:
        return self.k == 0 and self.kappa == 0


@dataclass(frozen=True, eq=False)
class ChainNonlinearity(Nonlinearity):
    """Springs of a wall-to-wall chain of ``N`` masses.

    Spring ``j`` (0-based, ``j = 0..N``) stretches by ``q_{j-1} - q_j`` with
    ``q_{-1} = q_N = 0`` (the walls).
    """

    springs: tuple
    kind = "chain"
    has_potential = True

    def __post_init__(self):
        object.__setattr__(self, "springs", tuple(self.springs))
        if len(self.springs) < 2:
            raise ValueError("a chain needs at least two springs")

    @property
    def dim(self) -> int:
        return len(self.springs) - 1

    def _elongations(self, q):
        q = np.asarray(q, dtype=float)
        pad = [(0, 0)] * (q.ndim - 1) + [(1, 1)]
        qp = np.pad(q, pad)
        return qp[..., :-1] - qp[..., 1:]

    def force(self, q):
        d = self._elongations(q)
        s = np.stack([sp.force(d[..., j]) for j, sp in enumerate(self.springs)], axis=-1)
        # mass j feels -S_j(d_j) + S_{j+1}(d_{j+1})
        return s[..., 1:] - s[..., :-1]

    def jacobian(self, q):
        q = np.asarray(q, dtype=float)
        d = self._elongations(q)
        k = np.stack([sp.stiffness(d[..., j]) for j, sp in enumerate(self.springs)], axis=-1)
        n = self.dim
        J = np.zeros(q.shape + (n,))
        idx = np.arange(n)
        J[..., idx, idx] = k[..., :-1] + k[..., 1:]
        J[..., idx[:-1], idx[:-1] + 1] = -k[..., 1:-1]
        J[..., idx[1:], idx[1:] - 1] = -k[..., 1:-1]
        return J

    def potential(self, q):
        d = self._elongations(q)
        return sum(sp.energy(d[..., j]) for j, sp in enumerate(self.springs))

    def to_dict(self):
        return {"type": "chain", "springs": [[sp.k, sp.kappa] for sp in self.springs]}


@dataclass(frozen=True, eq=False)
class PendulumNonlinearity(Nonlinearity):
    """``S(q) = c_p sin(q)`` on a single DOF."""

    cp: float
    kind = "pendulum"
    dim = 1
    has_potential = True

    def force(self, q):
        return self.cp * np.sin(np.asarray(q, dtype=float))

    def jacobian(self, q):
        q = np.asarray(q, dtype=float)
        return (self.cp * np.cos(q))[..., None]

    def potential(self, q):
        return -self.cp * np.cos(np.asarray(q, dtype=float))[..., 0]

    def bounds(self):
        a = abs(self.cp)
        return np.array([-a]), np.array([a])

    def to_dict(self):
        return {"type": "pendulum", "cp": self.cp}


@dataclass(frozen=True, eq=False)
class CallbackNonlinearity(Nonlinearity):
    """User-supplied ``S(q)``, optionally with Jacobian and potential.

    ``func`` must accept ``(N,)`` and ``(M, N)`` inputs. Without ``jac`` the
    Jacobian comes from central finite differences.
    """

    dim: int
    func: Callable
    jac: Optional[Callable] = None
    potential_func: Optional[Callable] = None
    kind = "custom"

    @property
    def has_potential(self):
        return self.potential_func is not None

    @property
    def analytic_jacobian(self):
        return self.jac is not None

    def force(self, q):
        return np.asarray(self.func(np.asarray(q, dtype=float)), dtype=float)

    def jacobian(self, q):
        if self.jac is None:
            return fd_jacobian(self.force, q)
        return np.asarray(self.jac(np.asarray(q, dtype=float)), dtype=float)

    def potential(self, q):
        if self.potential_func is None:
            return super().potential(q)
        return self.potential_func(np.asarray(q, dtype=float))


def nonlinearity_from_dict(d: dict, dim: int) -> Nonlinearity:
    kind = d["type"]
    if kind == "polynomial":
        terms = tuple((int(t), tuple(e), float(c)) for t, e, c in d["terms"])
        return PolynomialNonlinearity(dim, terms, bool(d.get("declared_potential", False)))
    if kind == "chain":
        springs = []
        for sp in d["springs"]:
            if isinstance(sp, dict):
                springs.append(CubicSpring(float(sp["k"]), float(sp.get("kappa", 0.0))))
            else:
                springs.append(CubicSpring(*map(float, sp)))
        return ChainNonlinearity(tuple(springs))
    if kind == "pendulum":
        return PendulumNonlinearity(float(d["cp"]))
    raise ValueError(f"unknown nonlinearity type {kind!r}")


# ---------------------------------------------------------------------------
# Mechanical system
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MechanicalSystem:
    """``M q'' + C q' + S(q) = f(t)``.

    ``family`` and ``params`` record which built-in constructor produced the
    system; the certifier uses them to pick closed-form arguments.
    """

    mass: np.ndarray
    damping: np.ndarray
    nonlinearity: Nonlinearity
    forcing: ForcingSignal
    family: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.mass, dtype=float))
        C = np.atleast_2d(np.asarray(self.damping, dtype=float))
        n = M.shape[0]
        if M.shape != (n, n) or C.shape != (n, n):
            raise ValueError("mass and damping must be square matrices of equal size")
        if self.nonlinearity.dim != n or self.forcing.dim != n:
            raise ValueError(
                f"dimension mismatch: M is {n}x{n}, S has {self.nonlinearity.dim}, "
                f"forcing has {self.forcing.dim} components"
            )
        if np.linalg.eigvalsh(0.5 * (M + M.T)).min() <= 0:
            raise ValueError("mass matrix must be positive definite")
        M.flags.writeable = False
        C.flags.writeable = False
        object.__setattr__(self, "mass", M)
        object.__setattr__(self, "damping", C)

    @property
    def dim(self) -> int:
        return self.mass.shape[0]

    @property
    def period(self) -> float:
        return self.forcing.period

    @property
    def omega(self) -> float:
        return self.forcing.omega

    def with_forcing(self, forcing: ForcingSignal, **params) -> "MechanicalSystem":
        return MechanicalSystem(
            self.mass, self.damping, self.nonlinearity, forcing, self.family, {**self.params, **params}
        )

    def rhs(self, t, x):
        """First-order vector field on ``x = (q, q')``."""
        n = self.dim
        q, v = x[:n], x[n:]
        acc = np.linalg.solve(self.mass, self.forcing(t) - self.damping @ v - self.nonlinearity.force(q))
        return np.concatenate([v, acc])

    def to_dict(self) -> dict:
        out = {
            "dim": self.dim,
            "mass": self.mass.tolist(),
            "damping": self.damping.tolist(),
            "nonlinearity": self.nonlinearity.to_dict(),
            "forcing": self.forcing.to_dict(),
        }
        if self.family:
            out["family"] = {"name": self.family, "params": self.params}
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "MechanicalSystem":
        dim = int(d["dim"])
        fam = d.get("family") or {}
        return cls(
            np.asarray(d["mass"], dtype=float).reshape(dim, dim),
            np.asarray(d["damping"], dtype=float).reshape(dim, dim),
            nonlinearity_from_dict(d["nonlinearity"], dim),
            forcing_from_dict(d["forcing"]),
            fam.get("name"),
            dict(fam.get("params", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "MechanicalSystem":
        return cls.from_dict(json.loads(text))


def load_system(path) -> MechanicalSystem:
    with open(path) as fh:
        return MechanicalSystem.from_json(fh.read())


def save_system(system: MechanicalSystem, path):
    with open(path, "w") as fh:
        json.dump(system.to_dict(), fh, indent=2)


# ---------------------------------------------------------------------------
# Built-in systems
# ---------------------------------------------------------------------------


def build_counterexample1(
    m1=1.0, m2=1.0, k1=1.0, k2=4.0, c1=0.001, c2=0.0, kappa=1.0, f_m=0.01178, omega=1.0, n_terms=200
) -> MechanicalSystem:
    """Two masses with a non-potential quadratic force ``kappa (q1^2 + q2^2)``
    on both, driven by opposite triangular waves."""
    terms = []
    for target in (0, 1):
        terms += [
            (target, (1, 0), k1 + k2 if target == 0 else -k2),
            (target, (0, 1), -k2 if target == 0 else k1 + k2),
            (target, (2, 0), kappa),
            (target, (0, 2), kappa),
        ]
    nl = PolynomialNonlinearity(2, tuple(terms))
    return MechanicalSystem(
        np.diag([m1, m2]),
        np.array([[c1 + c2, -c2], [-c2, c1 + c2]]),
        nl,
        TriangularForcing(f_m, omega, n_terms, (1.0, -1.0)),
        "counterexample1",
        dict(m1=m1, m2=m2, k1=k1, k2=k2, c1=c1, c2=c2, kappa=kappa, f_m=f_m, omega=omega),
    )


def build_duffing(c=0.01, omega2=1.0, kappa=1.0, f=1.0, Omega=1.0) -> MechanicalSystem:
    """``q'' + c q' + omega2 q + kappa q^3 = f cos(Omega t)``."""
    nl = PolynomialNonlinearity(1, ((0, (1,), omega2), (0, (3,), kappa)), declared_potential=True)
    return MechanicalSystem(
        np.eye(1),
        np.array([[c]]),
        nl,
        FourierForcing.harmonic(f, Omega),
        "duffing",
        dict(c=c, omega2=omega2, kappa=kappa, f=f, Omega=Omega),
    )


def build_quadratic_oscillator(c=0.1, omega2=1.0, kappa=1.0, f=1.0, Omega=1.0) -> MechanicalSystem:
    """``q'' + c q' + omega2 q + kappa q^2 = f cos(Omega t)``."""
    nl = PolynomialNonlinearity(1, ((0, (1,), omega2), (0, (2,), kappa)), declared_potential=True)
    return MechanicalSystem(
        np.eye(1),
        np.array([[c]]),
        nl,
        FourierForcing.harmonic(f, Omega),
        "quadratic",
        dict(c=c, omega2=omega2, kappa=kappa, f=f, Omega=Omega),
    )


def build_pendulum(c=0.1, cp=1.0, forcing: Optional[ForcingSignal] = None, fbar=None, Omega=1.0):
    """Damped pendulum ``q'' + c q' + c_p sin q = f(t)``.

    Without explicit ``forcing`` the excitation is the constant ``fbar``
    (default 0) on the ``2 pi / Omega`` time axis.
    """
    if forcing is None:
        forcing = FourierForcing.constant(0.0 if fbar is None else fbar, 2 * np.pi / Omega)
    return MechanicalSystem(
        np.eye(1), np.array([[c]]), PendulumNonlinearity(cp), forcing, "pendulum", dict(c=c, cp=cp)
    )


def build_counter3(
    c1=0.01, c2=0.01, omega1_sq=1.0, omega2_sq=1.0, kappa=1.0, a=0.01, Omega=1.0, f1=None
) -> MechanicalSystem:
    """Two oscillators coupled by ``kappa q1 q2^2`` acting on the first only.

    ``f1`` is the excitation of the first DOF as a 1-component signal with
    period ``2 pi / Omega`` (zero when omitted); the second DOF is driven by
    ``a sin(Omega t)``.
    """
    T = 2 * np.pi / Omega
    if f1 is None:
        c0_1, s1, cc1 = np.zeros(1), np.zeros((1, 1)), np.zeros((1, 1))
    else:
        if not np.isclose(f1.period, T):
            raise ValueError("f1 must share the period 2 pi / Omega")
        c0_1, s1, cc1 = f1.fourier_coefficients()
    K = max(1, s1.shape[0])
    s1, cc1 = _pad(s1, cc1, K)
    s = np.zeros((K, 2))
    c = np.zeros((K, 2))
    s[:, 0], c[:, 0] = s1[:, 0], cc1[:, 0]
    s[0, 1] = a
    forcing = FourierForcing(T, np.array([c0_1[0], 0.0]), s, c)
    nl = PolynomialNonlinearity(
        2, ((0, (1, 0), omega1_sq), (0, (1, 2), kappa), (1, (0, 1), omega2_sq))
    )
    return MechanicalSystem(
        np.eye(2),
        np.diag([c1, c2]),
        nl,
        forcing,
        "counter3",
        dict(c1=c1, c2=c2, omega1_sq=omega1_sq, omega2_sq=omega2_sq, kappa=kappa, a=a, Omega=Omega),
    )


def build_chain(masses, dampers, springs, forcing: Optional[ForcingSignal] = None) -> MechanicalSystem:
    """Wall-to-wall chain: ``N`` masses, ``N+1`` dampers and ``N+1`` springs.

    ``springs`` holds :class:`CubicSpring` objects or ``(k, kappa)`` pairs.
    """
    masses = np.asarray(masses, dtype=float)
    dampers = np.asarray(dampers, dtype=float)
    n = masses.size
    if dampers.size != n + 1 or len(springs) != n + 1:
        raise ValueError(f"a chain of {n} masses needs {n + 1} dampers and {n + 1} springs")
    springs = tuple(sp if isinstance(sp, CubicSpring) else CubicSpring(*sp) for sp in springs)
    C = np.diag(dampers[:-1] + dampers[1:])
    idx = np.arange(n - 1)
    C[idx, idx + 1] = -dampers[1:-1]
    C[idx + 1, idx] = -dampers[1:-1]
    if forcing is None:
        forcing = FourierForcing.harmonic(1.0, 1.0, dim=n, dof=0)
    return MechanicalSystem(
        np.diag(masses),
        C,
        ChainNonlinearity(springs),
        forcing,
        "chain",
        dict(masses=masses.tolist(), dampers=dampers.tolist(), springs=[[s.k, s.kappa] for s in springs]),
    )


LINEAR_EXAMPLE_FORCING = FourierForcing(
    2 * np.pi,
    np.zeros(1),
    np.r_[399 / 400, np.zeros(19)][:, None],
    np.r_[0.01 / 400, np.zeros(18), 0.2 / 400][:, None],
)


def build_linear_example(k=400.0, c=0.01) -> MechanicalSystem:
    """Lightly damped linear oscillator whose exact response is
    ``0.0025 (sin t + sin 20 t)`` (the 20th harmonic sits at resonance)."""
    return MechanicalSystem(
        np.eye(1),
        np.array([[c]]),
        PolynomialNonlinearity(1, ((0, (1,), k),), declared_potential=True),
        LINEAR_EXAMPLE_FORCING,
        "linear",
        dict(k=k, c=c),
    )


def linear_stiffness(system: MechanicalSystem) -> Optional[np.ndarray]:
    """Stiffness matrix when ``S`` is exactly linear, else ``None``."""
    nl = system.nonlinearity
    if isinstance(nl, PolynomialNonlinearity) and nl.degree <= 1:
        return nl.jacobian(np.zeros(system.dim))
    if isinstance(nl, ChainNonlinearity) and all(sp.kappa == 0 for sp in nl.springs):
        return nl.jacobian(np.zeros(system.dim))
    return None


BUILTINS = {
    "counterexample1": build_counterexample1,
    "duffing": build_duffing,
    "quadratic": build_quadratic_oscillator,
    "pendulum": build_pendulum,
    "counter3": build_counter3,
    "lin_sys": build_linear_example,
}
