"""Potential-dependent entire functions for L_alpha = L0 + alpha <., v> v.

Conventions: <f, g> = int_0^l f conj(g) dx and f*(lam) = conj(f(conj lam)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .gtrig import ZETA, eval_gtrig
from .parallel import pmap
from .quadrature import Grid, GridFunction, adapted_grid, make_grid
from .spectral_l0 import L0Config, L0Eigenpair, char0, l0_eigenfunction, l0_spectrum

__all__ = [
    "Potential",
    "TransformBundle",
    "DegenerateEigenfunctionError",
    "fourier_csd",
    "m_fn",
    "F_fn",
    "char_alpha",
    "perturbed_eigenfunction",
    "l0_coefficients",
]

_SMALL_LAM = 1e-2
_CONTOUR_POINTS = 30


class DegenerateEigenfunctionError(ArithmeticError):
    pass


@dataclass
class Potential:
    """Potential v on [0, l], sampled on a quadrature grid.

    ``func`` (optional) evaluates v anywhere; it is used when the potential
    has to be moved to a finer grid.
    """

    v: GridFunction
    func: Callable | None = None
    normalized: bool = False
    #: exact L0 expansion {(k, eps): coefficient} when v was built from one
    l0_expansion: dict | None = None

    def __post_init__(self):
        if self.normalized and abs(self.v.norm() - 1) > 1e-10:
            raise ValueError("potential flagged normalized but ||v|| != 1")

    @property
    def grid(self) -> Grid:
        return self.v.grid

    @property
    def l(self) -> float:
        return self.v.grid.l

    @property
    def samples(self) -> np.ndarray:
        return self.v.samples

    def __call__(self, x):
        if self.func is not None:
            return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)
        return self.v(x)

    def norm(self) -> float:
        return self.v.norm()

    def on(self, grid: Grid) -> "Potential":
        if grid is self.grid:
            return self
        return Potential(GridFunction(grid, self(grid.nodes)), self.func, self.normalized,
                         self.l0_expansion)

    def scaled(self, k: complex) -> "Potential":
        f = None if self.func is None else (lambda x, f=self.func: k * f(x))
        return Potential(self.v * k, f, False, _scale_expansion(self.l0_expansion, k))

    def plus(self, other: "Potential") -> "Potential":
        if self.func is not None and other.func is not None:
            f = lambda x, a=self.func, b=other.func: a(x) + b(x)
        else:
            f = None
        exp = None
        if self.l0_expansion is not None and other.l0_expansion is not None:
            exp = dict(self.l0_expansion)
            for key, c in other.l0_expansion.items():
                exp[key] = exp.get(key, 0) + c
        return Potential(self.v + other.v, f, False, exp)

    def normalize(self) -> "Potential":
        n = self.norm()
        if n == 0:
            raise ValueError("zero potential cannot be normalized")
        f = None if self.func is None else (lambda x, f=self.func: f(x) / n)
        return Potential(self.v * (1 / n), f, True, _scale_expansion(self.l0_expansion, 1 / n))

    # constructors ----------------------------------------------------
    @classmethod
    def from_function(cls, func, l: float = 1.0, grid: Grid | None = None,
                      normalize: bool = True) -> "Potential":
        grid = grid or make_grid(l)
        p = cls(GridFunction(grid, np.asarray(func(grid.nodes), dtype=complex)), func)
        return p.normalize() if normalize else p

    @classmethod
    def from_samples(cls, x, values, l: float | None = None, grid: Grid | None = None,
                     normalize: bool = True) -> "Potential":
        """Cubic-spline resampling of (x, values) onto the quadrature grid."""
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=complex)
        if x.ndim != 1 or x.size < 4 or x.shape != values.shape:
            raise ValueError("need matching 1-d arrays with at least 4 samples")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        l = float(x[-1]) if l is None else float(l)
        re = CubicSpline(x, values.real)
        im = CubicSpline(x, values.imag)
        func = lambda t: re(t) + 1j * im(t)
        return cls.from_function(func, l, grid, normalize)

    @classmethod
    def from_coeffs(cls, cfg: L0Config, entries, grid: Grid | None = None,
                    normalize: bool = True) -> "Potential":
        """v = sum over entries (k, eps, coef) of coef * u(0, eps lambda_k, x)."""
        entries = list(entries)
        kmax = max(int(e[0]) for e in entries)
        spec = l0_spectrum(L0Config(cfg.l, kmax, cfg.root_tol, cfg.quad_panels, cfg.quad_order))
        lookup = {(p.k, p.eps): p for p in spec}
        terms = [(lookup[(int(k), int(eps))], complex(cf)) for k, eps, cf in entries]

        def func(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros(x.shape, dtype=complex)
            for pair, cf in terms:
                out += cf * l0_eigenfunction(cfg, pair, x)
            return out

        exp = {}
        for pair, cf in terms:
            exp[(pair.k, pair.eps)] = exp.get((pair.k, pair.eps), 0) + cf
        p = cls(GridFunction(grid or cfg.grid, func((grid or cfg.grid).nodes)), func,
                l0_expansion=exp)
        return p.normalize() if normalize else p


def _scale_expansion(exp, k):
    return None if exp is None else {key: k * c for key, c in exp.items()}


@dataclass(frozen=True)
class TransformBundle:
    lam: complex
    vc: complex
    vs: complex
    vd: complex
    vc_star: complex
    vs_star: complex
    vd_star: complex
    vk: tuple
    m: complex
    m_star: complex
    wd: complex
    wd_star: complex


def _transforms(v: Potential, lam: complex):
    """(v~_c, v~_s, v~_d, (v~_1, v~_2, v~_3)) at lam."""
    g = v.grid
    t = eval_gtrig(-1j * lam * g.nodes)
    vv = v.samples
    vc, vs, vd = (g.integrate(f * vv) for f in (t.c, t.s, t.d))
    vk = tuple(g.integrate(np.exp(-1j * lam * zk * g.nodes) * vv) for zk in ZETA)
    return vc, vs, vd, vk


def _wd(v: Potential, lam: complex) -> complex:
    # w(x) = v(l - x); the Gauss grid is symmetric so reversing samples is exact
    g = v.grid
    return g.integrate(eval_gtrig(-1j * lam * g.nodes).d * v.samples[::-1])


def m_fn(v: Potential, lam) -> complex:
    """m(lam) = < int_0^x d(i lam (x - t)) v(t) dt, v(x) >."""
    lam = complex(lam)
    g = v.grid
    inner = sum(zk * g.exp_convolution(v.samples, 1j * lam * zk) for zk in ZETA) / 3
    # 1/zeta^2 = zeta for cube roots of unity
    return g.inner(inner, v.samples)


def fourier_csd(v: Potential, lam) -> TransformBundle:
    lam = complex(lam)
    vc, vs, vd, vk = _transforms(v, lam)
    cvc, cvs, cvd, _ = _transforms(v, lam.conjugate())
    return TransformBundle(
        lam=lam, vc=vc, vs=vs, vd=vd,
        vc_star=cvc.conjugate(), vs_star=cvs.conjugate(), vd_star=cvd.conjugate(),
        vk=vk,
        m=m_fn(v, lam), m_star=m_fn(v, lam.conjugate()).conjugate(),
        wd=_wd(v, lam), wd_star=_wd(v, lam.conjugate()).conjugate(),
    )


def F_fn(v: Potential, lam) -> complex:
    """F(lam) = m(lam) d(i lam l) + v~_d(lam) w~_d*(-lam)."""
    lam = complex(lam)
    l = v.l
    vd = _transforms(v, lam)[2]
    wd_star_neg = _wd(v, -lam.conjugate()).conjugate()
    return m_fn(v, lam) * eval_gtrig(1j * lam * l).d + vd * wd_star_neg


def _char_alpha_direct(v: Potential, alpha: float, lam: complex) -> complex:
    F = F_fn(v, lam)
    Fs = F_fn(v, lam.conjugate()).conjugate()
    return char0(v.l, lam) + 1j * alpha / lam**4 * (F - Fs)


def char_alpha(v: Potential, alpha: float, lam, scaled: bool = False):
    """Delta(alpha, lam) = Delta(0, lam) + (i alpha / lam^4)(F(lam) - F*(lam)).

    Near lam = 0 the removable singularity is evaluated by Cauchy's formula on
    a circle of radius 1/(2l). Accuracy degrades like eps * exp(sqrt(3)|lam| l)
    for large real lam because F and F* cancel to leading order.
    """
    lam = complex(lam)
    l = v.l
    if alpha == 0:
        return char0(l, lam, scaled=scaled)
    if abs(lam) * l < _SMALL_LAM:
        r = 0.5 / l
        w = r * np.exp(2j * np.pi * (np.arange(_CONTOUR_POINTS) + 0.5) / _CONTOUR_POINTS)
        vals = np.array([_char_alpha_direct(v, alpha, wj) for wj in w])
        val = complex(np.mean(vals * w / (w - lam)))
    else:
        val = _char_alpha_direct(v, alpha, lam)
    if scaled:
        e = float(max(0.0, math.sqrt(3) * abs(lam) * l / 2))
        return val * math.exp(-e), e
    return val


def perturbed_eigenfunction(v: Potential, lam, x=None, normalize: bool = True):
    """Eigenfunction of L_alpha at a root lam of Delta(alpha, .).

    Values at ``x`` (default: v's grid nodes), scaled to unit L2 norm.
    """
    lam = complex(lam)
    g = v.grid
    l = v.l
    vv = v.samples
    t = eval_gtrig(-1j * lam * g.nodes)
    vc, vs, vd = (g.integrate(f * vv) for f in (t.c, t.s, t.d))
    wd_neg = g.integrate(eval_gtrig(1j * lam * (l - g.nodes)).d * vv)
    dl = eval_gtrig(1j * lam * l).d
    dml = eval_gtrig(-1j * lam * l).d

    def raw(xs):
        # each term picks up a factor zeta_2 under lam -> zeta_2 lam; the 1/lam
        # makes the result invariant
        gx = eval_gtrig(1j * lam * xs)
        gxl = eval_gtrig(1j * lam * (xs - l))
        part = sum(zk * g.exp_convolution(vv, 1j * lam * zk, xs) for zk in ZETA) / 3
        full = gx.c * vd + gx.s * vs + gx.d * vc
        terms = (gxl.d * vd, -gx.d * wd_neg, dl * part, -dml * (full - part))
        return sum(terms) / lam, sum(np.abs(tm) for tm in terms) / abs(lam)

    on_grid, mag = raw(g.nodes)
    nrm = g.norm(on_grid)
    if normalize and nrm < 1e-12 * max(g.norm(mag), 1e-300):
        raise DegenerateEigenfunctionError("eigenfunction formula vanishes identically at this lam")
    scale = nrm if normalize else 1.0
    if x is None:
        return GridFunction(g, on_grid / scale)
    return raw(np.atleast_1d(np.asarray(x, dtype=float)))[0] / scale


def l0_coefficients(v: Potential, pairs: list[L0Eigenpair]) -> np.ndarray:
    """v_n = <v, u_n> for each eigenpair.

    Each inner product uses a grid fine enough for that eigenfunction, so v
    is re-evaluated there (exactly through ``v.func`` when available). A
    potential built from an L0 expansion returns its stored coefficients.
    """
    l = v.l
    if v.l0_expansion is not None:
        return np.array([v.l0_expansion.get((p.k, p.eps), 0) for p in pairs], dtype=complex)

    def one(pair):
        g = adapted_grid(l, pair.lambda_k, v.grid.panels, v.grid.order)
        vals = v.samples if g is v.grid else v(g.nodes)
        return g.inner(vals, l0_eigenfunction(None, pair, g.nodes))

    return np.array(pmap(one, pairs), dtype=complex)
