"""Rank-one perturbation A + alpha <., v> v of a diagonal self-adjoint operator.

Everything is expressed in the eigenbasis of the unperturbed operator: ``z``
holds its (simple, sorted) eigenvalues and ``v`` the coefficients of the
potential in that basis. Points z_n with v_n = 0 (the sigma0 part) stay in
the spectrum untouched; the others (sigma1) are replaced by the roots of the
secular function

    Q(zeta) = 1 + alpha G(zeta),   G(zeta) = sum_{sigma1} |v_n|^2 / (z_n - zeta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .spectral_l0 import PoleError

__all__ = [
    "RankOneSystem",
    "SecularRoot",
    "secular_Q",
    "secular_G",
    "secular_G_prime",
    "secular_roots",
    "perturbed_spectrum",
    "perturbed_eigvec",
    "dense_oracle",
    "rankone_resolvent",
]

DOUBLED_TOL = 1e-9
_POLE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class RankOneSystem:
    z: np.ndarray
    v: np.ndarray
    alpha: float
    zero_tol: float | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.v, dtype=complex)
        if z.ndim != 1 or z.shape != v.shape or z.size == 0:
            raise ValueError("z and v must be non-empty 1-d arrays of equal length")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(v)) and math.isfinite(self.alpha)):
            raise ValueError("non-finite system data")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z must be strictly increasing")
        tol = self.zero_tol
        if tol is None:
            tol = 1e-12 * float(np.max(np.abs(v)))
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "zero_tol", float(tol))

    def __len__(self):
        return self.z.size

    @property
    def sigma1(self) -> np.ndarray:
        """Boolean mask of levels moved by the perturbation."""
        return np.abs(self.v) > self.zero_tol

    @property
    def sigma0(self) -> np.ndarray:
        return ~self.sigma1

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.v) ** 2

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.z))))

    def truncated(self, n: int) -> "RankOneSystem":
        return RankOneSystem(self.z[:n], self.v[:n], self.alpha, self.zero_tol)

    def matrix(self) -> np.ndarray:
        return np.diag(self.z).astype(complex) + self.alpha * np.outer(self.v, self.v.conj())


@dataclass(frozen=True)
class SecularRoot:
    index: int
    mu: float
    bracket: tuple[float, float]
    multiplicity_flag: Literal["simple", "doubled"] = "simple"


def _check_pole(sys: RankOneSystem, zeta):
    z1 = sys.z[sys.sigma1]
    if z1.size and np.min(np.abs(z1 - zeta)) <= _POLE_TOL * sys.scale:
        raise PoleError(f"{zeta} is a pole of the secular function")


def _ordered_sum(terms: np.ndarray, dist: np.ndarray) -> complex:
    order = np.argsort(dist)
    t = terms[order]
    if np.iscomplexobj(t):
        return complex(math.fsum(t.real), math.fsum(t.imag))
    return math.fsum(t)


def secular_G(sys: RankOneSystem, zeta) -> complex:
    """G(zeta) = sum over sigma1 of |v_n|^2 / (z_n - zeta)."""
    _check_pole(sys, zeta)
    m = sys.sigma1
    diff = sys.z[m] - zeta
    val = _ordered_sum(sys.weights[m] / diff, np.abs(diff))
    return val if isinstance(zeta, complex) else (val.real if isinstance(val, complex) else val)


def secular_Q(sys: RankOneSystem, zeta):
    """Q(zeta) = 1 + alpha G(zeta); raises PoleError on sigma1."""
    if sys.alpha == 0:
        return 1.0 if not isinstance(zeta, complex) else 1.0 + 0j
    return 1.0 + sys.alpha * secular_G(sys, zeta)


def secular_G_prime(sys: RankOneSystem, zeta) -> float:
    _check_pole(sys, zeta)
    m = sys.sigma1
    return float(np.sum(sys.weights[m] / (sys.z[m] - zeta) ** 2).real)


# ---------------------------------------------------------------- roots

def _solve_near_pole(alpha, w, d, b, t_end):
    """Root of Q in the half-gap between pole b and offset t_end from it.

    Works with h(t) = -t Q(z_b + t), which is finite at t = 0, and with
    differences d_k = z_k - z_b formed once so no precision is lost near
    the pole.
    """
    others = np.ones(d.size, dtype=bool)
    others[b] = False
    wo, do = w[others], d[others]
    wb = w[b]

    def h(t):
        return -t * (1.0 + alpha * np.sum(wo / (do - t))) + alpha * wb

    lo, hi = (0.0, t_end) if t_end > 0 else (t_end, 0.0)
    t = brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return t


def _doubled(sys: RankOneSystem, mu: float) -> bool:
    z0 = sys.z[sys.sigma0]
    if z0.size == 0:
        return False
    i = np.argmin(np.abs(z0 - mu))
    return abs(z0[i] - mu) < DOUBLED_TOL * (1 + abs(z0[i]))


def secular_roots(sys: RankOneSystem, window: tuple[float, float] | None = None) -> list[SecularRoot]:
    """Roots of Q: one in each gap between consecutive sigma1 points plus one
    exterior root (right of the last point for alpha > 0, left of the first
    for alpha < 0). With alpha = 0 the sigma1 points themselves are returned.
    """
    z1 = sys.z[sys.sigma1]
    w = sys.weights[sys.sigma1]
    alpha = sys.alpha
    roots: list[SecularRoot] = []
    if z1.size == 0:
        return roots
    if alpha == 0:
        roots = [SecularRoot(i, float(zz), (float(zz), float(zz))) for i, zz in enumerate(z1)]
    else:
        n = z1.size
        for i in range(n - 1):
            a, b = z1[i], z1[i + 1]
            mid = 0.5 * (a + b)
            qmid = 1.0 + alpha * np.sum(w / (z1 - mid))
            if qmid == 0:
                mu = mid
            elif np.sign(qmid) == np.sign(alpha):
                d = z1 - a
                mu = a + _solve_near_pole(alpha, w, d, i, mid - a)
            else:
                d = z1 - b
                mu = b + _solve_near_pole(alpha, w, d, i + 1, mid - b)
            roots.append(SecularRoot(i, float(mu), (float(a), float(b))))
        # exterior root, bracket grown geometrically
        edge = n - 1 if alpha > 0 else 0
        side = 1.0 if alpha > 0 else -1.0
        d = z1 - z1[edge]
        step = max(abs(alpha) * float(np.sum(w)), 1e-300)
        t_end = side * step
        for _ in range(2000):
            q = 1.0 + alpha * np.sum(w / (d - t_end))
            # Q runs from -inf at the pole up to 1 at infinity on this side
            if q > 0:
                break
            t_end *= 2
        mu = z1[edge] + _solve_near_pole(alpha, w, d, edge, t_end)
        br = (float(z1[edge]), math.inf) if alpha > 0 else (-math.inf, float(z1[edge]))
        ext = SecularRoot(n - 1 if alpha > 0 else 0, float(mu), br)
        if alpha > 0:
            roots.append(ext)
        else:
            roots = [ext] + [SecularRoot(r.index + 1, r.mu, r.bracket) for r in roots]

    out = []
    for r in roots:
        flag = "doubled" if _doubled(sys, r.mu) else "simple"
        if window is None or window[0] <= r.mu <= window[1]:
            out.append(SecularRoot(r.index, r.mu, r.bracket, flag))
    return out


def perturbed_spectrum(sys: RankOneSystem) -> tuple[np.ndarray, np.ndarray]:
    """Full truncated spectrum: sigma0 points and secular roots.

    A secular root coinciding with a sigma0 point is reported once with
    multiplicity 2.
    """
    z0 = sys.z[sys.sigma0]
    vals = {float(x): 1 for x in z0}
    for r in secular_roots(sys):
        if r.multiplicity_flag == "doubled":
            key = float(z0[np.argmin(np.abs(z0 - r.mu))])
            vals[key] = 2
        else:
            vals[r.mu] = vals.get(r.mu, 0) + 1
    ev = np.array(sorted(vals))
    return ev, np.array([vals[x] for x in ev], dtype=int)


def perturbed_eigvec(sys: RankOneSystem, root: SecularRoot | float) -> np.ndarray:
    """Unit eigenvector v_n / ((z_n - mu) sqrt(G'(mu))) in the unperturbed basis."""
    mu = root.mu if isinstance(root, SecularRoot) else float(root)
    m = sys.sigma1
    out = np.zeros(len(sys), dtype=complex)
    if sys.alpha == 0:
        out[np.argmin(np.abs(sys.z - mu))] = 1.0
        return out
    diff = sys.z[m] - mu
    gp = float(np.sum(sys.weights[m] / diff**2))
    out[m] = sys.v[m] / (diff * math.sqrt(gp))
    return out


def dense_oracle(sys: RankOneSystem, N: int | None = None) -> np.ndarray:
    """Sorted eigenvalues of diag(z_1..z_N) + alpha v v* by a dense solve."""
    N = len(sys) if N is None else int(N)
    if N > len(sys):
        raise ValueError("N exceeds the system size")
    return np.linalg.eigvalsh(sys.truncated(N).matrix())


def rankone_resolvent(sys: RankOneSystem, zeta: complex, f,
                      route: Literal["formula", "expansion"] = "formula") -> np.ndarray:
    """(A + alpha v v* - zeta)^{-1} f in the unperturbed basis.

    ``formula``:   R0 f - alpha <R0 f, v> / Q(zeta) * R0 v
    ``expansion``: sum over sigma0 of f_n/(z_n - zeta) e_n plus
                   sum over roots of <f, u_p> u_p / (mu_p - zeta)
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != sys.z.shape:
        raise ValueError("f has the wrong length")
    zeta = complex(zeta)
    if np.min(np.abs(sys.z - zeta)) <= _POLE_TOL * sys.scale and (
            route == "formula" or np.any(np.abs(sys.z[sys.sigma0] - zeta) <= _POLE_TOL * sys.scale)):
        raise PoleError(f"{zeta} is on a pole of the resolvent")
    if route == "expansion":
        roots = secular_roots(sys)
        if roots and min(abs(r.mu - zeta) for r in roots) <= _POLE_TOL * sys.scale:
            raise PoleError(f"{zeta} is a perturbed eigenvalue")
        out = np.zeros_like(f)
        m0 = sys.sigma0
        out[m0] = f[m0] / (sys.z[m0] - zeta)
        for r in roots:
            u = perturbed_eigvec(sys, r)
            out += np.vdot(u, f) * u / (r.mu - zeta)
        return out
    r0 = 1.0 / (sys.z - zeta)
    q = secular_Q(sys, zeta)
    if abs(q) <= _POLE_TOL * (1 + abs(sys.alpha) * float(np.sum(sys.weights * np.abs(r0)))):
        raise PoleError(f"{zeta} is a root of the secular function")
    r0f = r0 * f
    r0v = r0 * sys.v
    return r0f - sys.alpha * np.vdot(sys.v, r0f) / q * r0v
