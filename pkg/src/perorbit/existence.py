"""A priori existence and nonexistence checks for periodic responses.

The checks follow the damping / potential / sign-condition criteria for

    M q'' + C q' + S(q) = f(t),

plus a Hessian-definiteness criterion that implies the sign condition, an
amplitude bound, and detectors for the known nonexistence regimes.

Verdict modes
-------------
``analytic``
    Proved in closed form for a built-in family.
``declared``
    The nonlinearity carries an analytic potential.
``evidence-only``
    Only a finite scan supports the claim. A scan cannot prove a statement
    about all of R^N, so such a verdict never yields ``exists``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .model import (
    ChainNonlinearity,
    MechanicalSystem,
    Nonlinearity,
    PendulumNonlinearity,
    PolynomialNonlinearity,
    _poly_range,
)

DEFINITENESS_RTOL = 1e-12
POTENTIAL_TOL = 1e-6
POTENTIAL_TOL_FD = 1e-4
GRID_POINTS = 33
GRID_MAX_DIM = 4
RANDOM_PER_SLAB = 10_000
DEFAULT_SEED = 0


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    """Per-condition verdicts, constants and the overall conclusion."""

    c1: dict
    c2: dict
    c3: dict
    c3star: dict
    r: Optional[float]
    amplitude_bound: Optional[float]
    rm_bound: Optional[float]
    mean_forcing: list
    forcing_l2: float
    nonexistence: Optional[dict]
    overall: str
    thresholds: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, **kw) -> str:
        kw.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# C1: damping
# ---------------------------------------------------------------------------


def check_damping(C) -> dict:
    """Definiteness of the symmetric part of the damping matrix.

    Returns a dict with ``verdict`` (pass/fail), ``C0`` (smallest eigenvalue
    magnitude of ``(C + C^T)/2``), ``sign`` and the eigenvalues.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[0] != C.shape[1]:
        raise ValueError("damping matrix must be square")
    sym = 0.5 * (C + C.T)
    eig = np.linalg.eigvalsh(sym)
    scale = np.linalg.norm(C, 2)
    zero_tol = DEFINITENESS_RTOL * scale
    out = {"eigenvalues": eig.tolist(), "C0": float(np.abs(eig).min()), "sign": None,
           "verdict": "fail", "mode": "analytic"}
    if scale == 0 or np.any(np.abs(eig) <= zero_tol):
        out["C0"] = 0.0
        out["offending_eigenvalue"] = float(eig[np.argmin(np.abs(eig))])
        out["reason"] = "singular symmetric part"
    elif np.all(eig > 0):
        out.update(verdict="pass", sign="positive")
    elif np.all(eig < 0):
        out.update(verdict="pass", sign="negative")
        out["note"] = "negative-definite damping accepted as the criterion allows"
    else:
        out["offending_eigenvalue"] = float(eig[0] if eig[-1] > 0 else eig[-1])
        out["reason"] = "indefinite symmetric part"
    return out


# ---------------------------------------------------------------------------
# C2: potential
# ---------------------------------------------------------------------------


def check_potential(nl: Nonlinearity, box: float = 5.0, n_samples: int = 100,
                    tol: Optional[float] = None, seed: int = DEFAULT_SEED) -> dict:
    """Jacobian symmetry of ``S`` over random points in ``[-box, box]^N``.

    Nonlinearities with an analytic potential report ``declared``; the
    asymmetry is still measured and returned.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-box, box, size=(n_samples, nl.dim))
    J = nl.jacobian(pts)
    asym = np.abs(J - np.swapaxes(J, -1, -2)).max(axis=(-1, -2))
    worst = int(np.argmax(asym))
    if tol is None:
        tol = POTENTIAL_TOL if nl.analytic_jacobian else POTENTIAL_TOL_FD
    out = {"max_asymmetry": float(asym[worst]), "tol": tol, "n_samples": n_samples}
    if nl.has_potential and nl.analytic_jacobian:
        out.update(verdict="declared", mode="declared")
    elif asym[worst] < tol:
        out.update(verdict="pass", mode="evidence-only")
    else:
        out.update(verdict="fail", mode="analytic", witness=pts[worst].tolist())
    return out


# ---------------------------------------------------------------------------
# Scanning helpers
# ---------------------------------------------------------------------------


def _default_rmax(r: float) -> float:
    return max(10.0 * r, 10.0)


def _slab_points(dim: int, j: int, r: float, R_max: float, n_grid: int, rng) -> tuple:
    """Points with ``r < |q_j| <= R_max`` and ``|q_i| <= R_max``."""
    if dim <= GRID_MAX_DIM:
        axis = np.linspace(-R_max, R_max, n_grid)
        axes = [axis] * dim
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        pts = pts[np.abs(pts[:, j]) > r]
        return pts, "grid"
    pts = rng.uniform(-R_max, R_max, size=(RANDOM_PER_SLAB, dim))
    mag = rng.uniform(r, R_max, size=RANDOM_PER_SLAB)
    mag[mag <= r] = np.nextafter(r, np.inf)
    pts[:, j] = np.where(rng.random(RANDOM_PER_SLAB) < 0.5, -mag, mag)
    return pts, "random"


def _univariate_family(system: MechanicalSystem):
    """Per-DOF ascending coefficient arrays when ``S`` is decoupled polynomial."""
    nl = system.nonlinearity
    if isinstance(nl, PolynomialNonlinearity) and nl.depends_only_on_own_dof:
        return [np.asarray(nl.univariate_coeffs(j), dtype=float) for j in range(nl.dim)]
    return None


def _real_roots(p) -> np.ndarray:
    p = np.trim_zeros(np.asarray(p, dtype=float), "b")
    if p.size <= 1:
        return np.zeros(0)
    roots = np.polynomial.polynomial.polyroots(p)
    return roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots))].real


# ---------------------------------------------------------------------------
# C3: sign condition
# ---------------------------------------------------------------------------


def _sign_univariate(p, fbar: float) -> dict:
    """Closed-form sign analysis of ``q (p(q) - fbar)``."""
    p = np.array(p, dtype=float)
    p = np.trim_zeros(p, "b") if np.any(p) else np.zeros(1)
    p[0] -= fbar
    deg = np.trim_zeros(p, "b").size - 1
    if deg < 1:
        return {"ok": False, "reason": "S_j - fbar_j is constant", "witness_q": [1.0, -1.0]}
    lead = p[deg]
    if deg % 2 == 0:
        # q (S - fbar) ~ lead q^(deg+1): opposite signs at +/- infinity
        R = 1.0 + max(1.0, float(np.abs(_real_roots(p)).max(initial=0.0)))
        return {"ok": False, "reason": "even-degree S_j: sign flips across q_j = 0",
                "witness_q": [R, -R]}
    roots = _real_roots(p)
    return {"ok": True, "sign": "+" if lead > 0 else "-",
            "r": float(np.abs(roots).max(initial=0.0))}


def check_sign_condition(system: MechanicalSystem, r: Optional[float] = None,
                         R_max: Optional[float] = None, n_grid: int = GRID_POINTS,
                         seed: int = DEFAULT_SEED) -> dict:
    """Check that ``q_j (S_j(q) - fbar_j)`` keeps one sign for ``|q_j| > r``.

    Closed-form families (decoupled polynomial springs including Duffing,
    the two-oscillator system with ``kappa >= 0``) get an analytic verdict
    and the smallest valid radius. Anything else is scanned on the slabs
    ``r < |q_j| <= R_max``; with ``r=None`` the scan also estimates the
    radius from the outermost shell inward.
    """
    fbar = np.asarray(system.forcing.mean(), dtype=float)
    N = system.dim
    polys = _univariate_family(system)
    if polys is not None:
        pattern, rs = [], []
        for j, p in enumerate(polys):
            res = _sign_univariate(p, fbar[j])
            if not res["ok"]:
                w = np.zeros(N)
                wq = res["witness_q"]
                pts = []
                for v in wq:
                    w = np.zeros(N)
                    w[j] = v
                    pts.append(w.tolist())
                return {"verdict": "fail", "mode": "analytic", "dof": j, "reason": res["reason"],
                        "witness": pts, "r": None, "sign_pattern": None, "n": None}
            pattern.append(res["sign"])
            rs.append(res["r"])
        r_min = max(rs)
        if r is not None and r < r_min:
            return {"verdict": "fail", "mode": "analytic", "r": float(r), "r_required": r_min,
                    "reason": "S_j - fbar_j has a root beyond r", "sign_pattern": pattern,
                    "n": pattern.count("+")}
        return {"verdict": "pass", "mode": "analytic", "r": float(r_min if r is None else r),
                "sign_pattern": pattern, "n": pattern.count("+")}

    if system.family == "counter3":
        p = system.params
        if p.get("kappa", 0) >= 0 and p.get("omega1_sq", 0) > 0 and p.get("omega2_sq", 0) > 0:
            # q1 (q1 (w1^2 + kappa q2^2) - fbar1) > 0 once |q1| > |fbar1| / w1^2
            r_min = max(abs(fbar[0]) / p["omega1_sq"], abs(fbar[1]) / p["omega2_sq"])
            rr = r_min if r is None else max(float(r), r_min)
            return {"verdict": "pass", "mode": "analytic", "r": rr, "sign_pattern": ["+", "+"],
                    "n": 2, "fbar1_nonpositive": bool(fbar[0] <= 0)}

    return _scan_sign(system, fbar, r, R_max, n_grid, seed)


def _scan_sign(system, fbar, r, R_max, n_grid, seed) -> dict:
    nl = system.nonlinearity
    N = system.dim
    estimate = r is None
    r0 = 0.0 if estimate else float(r)
    R_max = _default_rmax(r0) if R_max is None else float(R_max)
    rng = np.random.default_rng(seed)
    pattern, r_est, method = [], [], None
    for j in range(N):
        pts, method = _slab_points(N, j, r0, R_max, n_grid, rng)
        g = pts[:, j] * (nl.force(pts)[:, j] - fbar[j])
        shell = np.abs(pts[:, j]) >= np.abs(pts[:, j]).max() * (1 - 1e-12)
        far = np.sign(g[shell])
        if np.any(far != far[0]) or far[0] == 0:
            k = np.flatnonzero(shell)
            pos, neg = k[far > 0], k[far <= 0]
            wit = [pts[pos[0]].tolist() if pos.size else None, pts[neg[0]].tolist() if neg.size else None]
            return {"verdict": "fail", "mode": "evidence-only", "dof": j, "witness": wit,
                    "reason": "sign of q_j (S_j - fbar_j) differs on the outer shell",
                    "R_max": R_max, "scan": method, "r": None, "sign_pattern": None, "n": None}
        s = far[0]
        bad = np.sign(g) != s
        if estimate:
            rj = float(np.abs(pts[bad, j]).max(initial=0.0))
            spacing = 2 * R_max / (n_grid - 1)
            if rj >= R_max - spacing:
                return {"verdict": "fail", "mode": "evidence-only", "dof": j,
                        "witness": pts[np.flatnonzero(bad)[0]].tolist(), "R_max": R_max,
                        "reason": "no radius inside the scan box", "scan": method,
                        "r": None, "sign_pattern": None, "n": None}
            r_est.append(rj)
        elif np.any(bad):
            return {"verdict": "fail", "mode": "evidence-only", "dof": j,
                    "witness": pts[np.flatnonzero(bad)[0]].tolist(), "R_max": R_max,
                    "reason": "sign violation inside the slab", "scan": method,
                    "r": r0, "sign_pattern": None, "n": None}
        pattern.append("+" if s > 0 else "-")
    rr = max(r_est) if estimate else r0
    return {"verdict": "evidence-only", "mode": "evidence-only", "r": rr, "sign_pattern": pattern,
            "n": pattern.count("+"), "R_max": R_max, "scan": method,
            "note": "finite scan; the sign condition is not proved"}


# ---------------------------------------------------------------------------
# C3*: Hessian definiteness
# ---------------------------------------------------------------------------


def chain_hessian_is_pd(stiffness) -> bool:
    """Positive definiteness of a wall-to-wall chain Laplacian.

    ``stiffness`` holds the ``N+1`` local stiffnesses (spring slopes or
    damper constants). The leading blocks ``H^j`` are built recursively
    with the connection to the next mass left out, and each one is checked
    by Cholesky. The full matrix adds the last wall connection.
    """
    k = np.asarray(stiffness, dtype=float)
    n = k.size - 1
    H = np.array([[k[0]]])
    blocks = [H]
    for j in range(1, n):
        Hn = np.zeros((j + 1, j + 1))
        Hn[:j, :j] = H
        Hn[j - 1:, j - 1:] += k[j] * np.array([[1.0, -1.0], [-1.0, 1.0]])
        H = Hn
        blocks.append(H)
    full = H.copy()
    full[-1, -1] += k[n]
    if k[0] == 0:
        # mirrored case: grow from the opposite wall
        return chain_hessian_is_pd(k[::-1]) if k[n] != 0 else _is_pd(full)
    return all(_is_pd(B) for B in blocks) and _is_pd(full)


def _is_pd(A) -> bool:
    """Cholesky test with pivots bounded away from zero relative to ``A``."""
    A = np.asarray(A, dtype=float)
    scale = np.abs(A).max()
    if not np.isfinite(scale) or scale == 0:
        return False
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.diag(L) ** 2 > DEFINITENESS_RTOL * scale))


def is_positive_definite(A) -> bool:
    """Public form of the Cholesky definiteness test used by the checks."""
    return _is_pd(0.5 * (np.asarray(A, dtype=float) + np.asarray(A, dtype=float).T))


def _hessian_univariate(polys) -> dict:
    """Analytic C3* for decoupled polynomial potentials (diagonal Hessian)."""
    rstar, cv, signs = 0.0, math.inf, set()
    boundary = False
    for p in polys:
        h = np.polynomial.polynomial.polyder(np.trim_zeros(p, "b") if np.any(p) else np.zeros(1))
        h = np.trim_zeros(h, "b")
        if h.size == 0:
            return {"ok": False, "reason": "vanishing Hessian"}
        deg = h.size - 1
        if deg % 2 == 1:
            return {"ok": False, "reason": "Hessian changes sign at large |q|"}
        roots = _real_roots(h)
        rj = float(np.abs(roots).max(initial=0.0))
        signs.add(np.sign(h[-1]))
        rstar = max(rstar, rj)
        if roots.size:
            boundary = True
    if len(signs) != 1:
        return {"ok": False, "reason": "Hessian entries of opposite sign"}
    for p in polys:
        h = np.polynomial.polynomial.polyder(np.trim_zeros(p, "b"))
        crit = _real_roots(np.polynomial.polynomial.polyder(h)) if h.size > 1 else np.zeros(0)
        cand = [rstar, -rstar] + [c for c in crit if abs(c) >= rstar]
        cv = min(cv, float(np.abs(np.polynomial.polynomial.polyval(np.array(cand), h)).min()))
    return {"ok": True, "r_star": rstar, "C_v": cv, "sign": "positive" if signs.pop() > 0 else "negative",
            "boundary_root": boundary}


def check_hessian_definiteness(system: MechanicalSystem, r_star: Optional[float] = None,
                               R_max: Optional[float] = None, n_samples: int = RANDOM_PER_SLAB,
                               seed: int = DEFAULT_SEED) -> dict:
    """Definiteness of the potential Hessian outside the ball ``|q| >= r*``.

    ``C_v`` is the infimum of the smallest Hessian eigenvalue magnitude over
    that region. Built-in families return analytic verdicts; other
    potentials are sampled (``evidence-only``).
    """
    nl = system.nonlinearity
    out = {"r_star": None, "C_v": None, "sign": None}
    if not nl.has_potential:
        out.update(verdict="fail", mode="analytic", reason="no potential: the Hessian is undefined")
        return out

    polys = _univariate_family(system)
    if polys is not None:
        res = _hessian_univariate(polys)
        if not res["ok"]:
            out.update(verdict="fail", mode="analytic", reason=res["reason"])
            return out
        rs = res["r_star"] if r_star is None else max(float(r_star), res["r_star"])
        out.update(verdict="pass", mode="analytic", r_star=rs, C_v=res["C_v"], sign=res["sign"])
        if res["boundary_root"] and rs == res["r_star"]:
            out["C_v"] = 0.0
            out["note"] = ("the Hessian vanishes on |q| = r*; it is strictly definite outside "
                           "but the infimum C_v = 0 is not attained")
        return out

    if isinstance(nl, ChainNonlinearity):
        kmin = [sp.min_stiffness for sp in nl.springs]
        monotone = all(sp.hardening or sp.absent for sp in nl.springs)
        if monotone and chain_hessian_is_pd(kmin):
            # H(q) >= H(linear part) in the Loewner order when every kappa_j >= 0
            Hlin = nl.jacobian(np.zeros(nl.dim))
            cv = float(np.linalg.eigvalsh(Hlin).min())
            out.update(verdict="pass", mode="analytic", r_star=0.0, C_v=cv, sign="positive")
            return out
        if monotone:
            out.update(verdict="fail", mode="analytic",
                       reason="linearised chain stiffness is singular (no wall connection)")
            return out

    if isinstance(nl, PendulumNonlinearity):
        out.update(verdict="fail", mode="analytic", reason="c_p cos q changes sign periodically")
        return out

    # evidence-only sampling
    rs = 0.0 if r_star is None else float(r_star)
    R = _default_rmax(rs) if R_max is None else float(R_max)
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n_samples, nl.dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rad = rng.uniform(rs, R, size=n_samples)
    pts = d * rad[:, None]
    eig = np.linalg.eigvalsh(nl.hessian(pts))
    lo, hi = eig[:, 0], eig[:, -1]
    if np.all(lo > 0):
        out.update(verdict="evidence-only", mode="evidence-only", sign="positive", C_v=float(lo.min()))
    elif np.all(hi < 0):
        out.update(verdict="evidence-only", mode="evidence-only", sign="negative", C_v=float(np.abs(hi).min()))
    else:
        k = int(np.flatnonzero(lo <= 0)[0]) if np.any(hi > 0) else int(np.argmax(hi))
        out.update(verdict="fail", mode="evidence-only", witness=pts[k].tolist(),
                   reason="Hessian definiteness not uniform over samples")
        return out
    out.update(r_star=rs, R_max=R, n_samples=n_samples,
               note="sampled; definiteness is not proved")
    return out


def radius_from_hessian(r_star: float, C_v: float, S_min, S_max, fbar) -> float:
    """Radius beyond which the sign condition follows from C3*.

    ``r_j = r* + max(0, (fbar_j - S_min_j)/C_v, (S_max_j - fbar_j)/C_v)``;
    the result is ``max_j r_j``.
    """
    if not C_v > 0:
        raise ValueError("C_v must be positive")
    S_min, S_max, fbar = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (S_min, S_max, fbar))
    rj = r_star + np.maximum(0.0, np.maximum((fbar - S_min) / C_v, (S_max - fbar) / C_v))
    return float(rj.max())


def ball_extrema(nl: Nonlinearity, r_star: float, n_samples: int = 4001, seed: int = DEFAULT_SEED):
    """Per-DOF min/max of ``S_j`` over ``|q| <= r*`` (scan)."""
    if r_star == 0:
        s0 = np.asarray(nl.force(np.zeros(nl.dim)), dtype=float)
        return s0, s0
    rng = np.random.default_rng(seed)
    if nl.dim == 1:
        pts = np.linspace(-r_star, r_star, n_samples)[:, None]
    else:
        d = rng.normal(size=(n_samples, nl.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        pts = d * (r_star * rng.random(n_samples) ** (1 / nl.dim))[:, None]
    S = nl.force(pts)
    return S.min(axis=0), S.max(axis=0)


# ---------------------------------------------------------------------------
# Amplitude bounds
# ---------------------------------------------------------------------------


def amplitude_bound(system: MechanicalSystem, r: float, C0: Optional[float] = None) -> float:
    """``sqrt(N) (r + sqrt(T) C_f / C0)``, an a priori bound on ``max_t |q(t)|``."""
    if C0 is None:
        C0 = check_damping(system.damping)["C0"]
    if not C0 > 0:
        raise ValueError("C0 must be positive (damping condition fails)")
    T = system.period
    Cf = system.forcing.l2_norm()
    return float(math.sqrt(system.dim) * (r + math.sqrt(T) * Cf / C0))


def rouche_mawhin_bound(system: MechanicalSystem, r: float, C0: Optional[float] = None) -> float:
    """The classical bound, larger than :func:`amplitude_bound` by ``T C_f / C0``."""
    if C0 is None:
        C0 = check_damping(system.damping)["C0"]
    return amplitude_bound(system, r, C0) + system.period * system.forcing.l2_norm() / C0


def rouche_mawhin_form(system: MechanicalSystem) -> dict:
    """Map the system to the unit-mass, zero-mean-forcing form.

    The mean forcing moves into the potential (``V - q^T fbar``) and the
    equation is premultiplied by ``M^-1``. The input system is untouched.
    """
    Minv = np.linalg.inv(system.mass)
    fbar = np.asarray(system.forcing.mean(), dtype=float)
    nl = system.nonlinearity

    def grad(q):
        return (np.asarray(nl.force(q)) - fbar) @ Minv.T

    def forcing(t):
        return (np.atleast_2d(system.forcing(t)) - fbar) @ Minv.T

    return {"damping": Minv @ system.damping, "gradient": grad, "forcing": forcing, "fbar": fbar}


# ---------------------------------------------------------------------------
# Nonexistence
# ---------------------------------------------------------------------------


def _global_bounds(system: MechanicalSystem):
    """Closed-form ``(inf, sup)`` per component, or ``None``."""
    nl = system.nonlinearity
    b = nl.bounds()
    if b is not None:
        return np.asarray(b[0], dtype=float), np.asarray(b[1], dtype=float)
    return None


def check_global_extremum_nonexistence(system: MechanicalSystem) -> Optional[dict]:
    """Nonexistence when some mean forcing lies outside the range of ``S``.

    Averaging the l-th equation over a period leaves ``mean S_l(q) = fbar_l``,
    impossible if ``S_l > fbar_l`` everywhere (or ``S_l < fbar_l``). Only
    closed-form bounds are used; scans never trigger this flag.
    """
    bounds = _global_bounds(system)
    if bounds is None:
        return None
    lo, hi = bounds
    fbar = np.asarray(system.forcing.mean(), dtype=float)
    for l in range(system.dim):
        if lo[l] > fbar[l]:
            return {"reason": "global-extremum",
                    "detail": f"S_{l + 1} >= {lo[l]:.17g} > mean forcing {fbar[l]:.17g}", "dof": l}
        if hi[l] < fbar[l]:
            return {"reason": "global-extremum",
                    "detail": f"S_{l + 1} <= {hi[l]:.17g} < mean forcing {fbar[l]:.17g}", "dof": l}
    return None


def quadratic_forcing_threshold(omega2: float, c: float, kappa: float, Omega: float) -> float:
    """Forcing amplitude above which ``q'' + c q' + w^2 q + kappa q^2 = f cos(W t)``
    has no periodic orbit."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    lin = abs(complex(omega2 - Omega**2, c * Omega))
    return omega2 / (2 * abs(kappa)) * (lin + 2 * omega2) + abs(kappa) * omega2**2 / (4 * kappa**2)


def counterexample1_series(k1: float, k2: float, c1: float, Omega: float, tail_tol: float = 1e-12):
    """Partial sums of ``c_inf`` and the summation length.

    Terms are ``1 / (m^4 ((k1 + 2 k2 - m^2 W^2)^2 + (m c1 W)^2))`` over odd
    ``m``. Summation stops once the majorant tail
    ``(1/(c1 W)^2) sum_{m > M} m^-6`` drops below ``tail_tol``.
    """
    if c1 <= 0 or Omega <= 0:
        raise ValueError("c1 and Omega must be positive")
    scale = 1.0 / (c1 * Omega) ** 2
    # sum_{m > M} m^-6 <= M^-5 / 5
    M = int(math.ceil((scale / (5 * tail_tol)) ** 0.2)) + 1
    m = np.arange(1, M + 1, 2, dtype=float)
    terms = 1.0 / (m**4 * ((k1 + 2 * k2 - m**2 * Omega**2) ** 2 + (m * c1 * Omega) ** 2))
    return np.cumsum(terms), m


def counterexample1_threshold(k1=1.0, k2=4.0, c1=0.001, Omega=1.0, kappa=1.0) -> dict:
    """``c_inf`` and the forcing threshold ``sqrt(k1^2 pi^4 / (512 kappa^2 c_inf))``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    partial, m = counterexample1_series(k1, k2, c1, Omega)
    c_inf = float(math.fsum(np.diff(np.r_[0.0, partial])))
    f_thr = math.sqrt(k1**2 * math.pi**4 / (512 * kappa**2 * c_inf))
    return {"c_inf": c_inf, "f_threshold": f_thr, "n_terms": int(m.size)}


def _family_nonexistence(system: MechanicalSystem, thresholds: dict) -> Optional[dict]:
    p = system.params
    if system.family == "counterexample1":
        th = counterexample1_threshold(p["k1"], p["k2"], p["c1"], p["omega"], p["kappa"])
        thresholds.update(th)
        if p.get("c2", 0) == 0 and p["m1"] == p["m2"] and abs(p["f_m"]) >= th["f_threshold"]:
            return {"reason": "counterexample1-threshold",
                    "detail": f"|f_m| = {abs(p['f_m']):.17g} >= {th['f_threshold']:.17g}"}
    if system.family == "quadratic":
        thr = quadratic_forcing_threshold(p["omega2"], p["c"], p["kappa"], p["Omega"])
        thresholds["f_threshold"] = thr
        if abs(p["f"]) > thr:
            return {"reason": "quadratic-threshold", "detail": f"|f| = {abs(p['f']):.17g} > {thr:.17g}"}
    return None


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def certify(system: MechanicalSystem, seed: int = DEFAULT_SEED) -> CertificateReport:
    """Run every check and compose the overall verdict."""
    notes = []
    thresholds = {}
    fbar = np.asarray(system.forcing.mean(), dtype=float)
    Cf = system.forcing.l2_norm()
    c1 = check_damping(system.damping)
    c2 = check_potential(system.nonlinearity, seed=seed)
    c3s = check_hessian_definiteness(system, seed=seed)

    r_hess = None
    if c3s["verdict"] in ("pass", "evidence-only") and c3s["C_v"] and c3s["C_v"] > 0:
        smin, smax = ball_extrema(system.nonlinearity, c3s["r_star"], seed=seed)
        r_hess = radius_from_hessian(c3s["r_star"], c3s["C_v"], smin, smax, fbar)
        c3s["r"] = r_hess

    if isinstance(system.nonlinearity, ChainNonlinearity) and c3s["verdict"] == "pass":
        c3 = {"verdict": "pass", "mode": "analytic", "r": r_hess, "sign_pattern": ["+"] * system.dim,
              "n": system.dim, "note": "implied by the Hessian criterion"}
    else:
        c3 = check_sign_condition(system, seed=seed)
    r = c3.get("r") if c3["verdict"] in ("pass", "evidence-only") else r_hess

    nonex = check_global_extremum_nonexistence(system) or _family_nonexistence(system, thresholds)

    bound = rm = None
    if c1["verdict"] == "pass" and r is not None:
        bound = amplitude_bound(system, r, c1["C0"])
        rm = rouche_mawhin_bound(system, r, c1["C0"])

    if nonex is not None:
        overall = "no-periodic-orbit"
    elif (c1["verdict"] == "pass" and c2["verdict"] in ("pass", "declared")
          and (c3["verdict"] == "pass" or c3s["verdict"] == "pass")):
        overall = "exists"
    else:
        overall = "inconclusive"
        if "evidence-only" in (c3["verdict"], c3s["verdict"], c2.get("mode")):
            notes.append("some conditions hold only on a finite scan; no existence claim is made")
    if c1.get("sign") == "negative":
        notes.append("negative-definite damping")
    if np.any(fbar != 0):
        notes.append("mean forcing absorbed into the potential for the classical form")
    return CertificateReport(c1, c2, c3, c3s, r, bound, rm, fbar.tolist(), float(Cf), nonex, overall,
                             thresholds, notes)
