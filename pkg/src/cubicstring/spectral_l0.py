"""Spectrum, eigenfunctions and resolvent of L0 = i D^3 on [0, l] with
y(0) = 0, y'(0) = y'(l), y(l) = 0."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .gtrig import SQRT3, ZETA, eval_gtrig
from .quadrature import Grid, GridFunction, adapted_grid, make_grid

__all__ = [
    "L0Config",
    "L0Eigenpair",
    "BracketError",
    "PoleError",
    "char0",
    "char0_real_reduced",
    "l0_spectrum",
    "l0_levels",
    "l0_eigenfunction",
    "l0_eigenfunction_grid",
    "l0_resolvent",
]

_SERIES_RADIUS = 1.0  # |lam l| below this: power series (direct form loses eps / |lam l|^2)


class BracketError(RuntimeError):
    """A root bracket did not show a sign change."""


class PoleError(ZeroDivisionError):
    """Evaluation point sits on (or numerically at) a pole."""


@dataclass(frozen=True)
class L0Config:
    l: float = 1.0
    k_max: int = 10
    root_tol: float = 1e-13
    quad_panels: int = 64
    quad_order: int = 10

    def __post_init__(self):
        if not (self.l > 0 and math.isfinite(self.l)):
            raise ValueError("l must be a positive finite number")
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise ValueError("k_max must be a positive integer")
        if self.quad_panels < 1 or self.quad_order < 2:
            raise ValueError("bad quadrature parameters")

    @property
    def grid(self) -> Grid:
        return make_grid(self.l, self.quad_panels, self.quad_order)


@dataclass(frozen=True)
class L0Eigenpair:
    """One eigenvalue z = eps * lambda_k**3 of L0.

    ``norm_u`` is the L2 norm of the raw eigenfunction divided by
    exp(scale_exp); scale_exp = sqrt(3) lambda_k l / 2.
    """

    k: int
    lambda_k: float
    eps: int
    norm_u: float
    delta_k: float
    l: float
    scale_exp: float = field(default=0.0)

    @property
    def z(self) -> float:
        return self.eps * self.lambda_k**3

    @property
    def lam(self) -> float:
        """Signed root used inside the eigenfunction formula."""
        return self.eps * self.lambda_k


def _lval(cfg) -> float:
    return float(getattr(cfg, "l", cfg))


# ---------------------------------------------------------------- char0

def _char0_series(lam, l):
    # Delta(0, lam) = l^2 sum_j 2 (-1)^{j+1} (lam l)^{6j} / (6j+2)!
    w = (lam * l) ** 6
    total = -1.0 + 0 * w
    term_w = 1.0 + 0 * w
    for j in range(1, 7):
        term_w = term_w * w
        total = total + 2 * (-1) ** (j + 1) * term_w / math.factorial(6 * j + 2)
    return l * l * total


def char0(cfg, lam, scaled: bool = False):
    """Characteristic function Delta(0, lam) = (d(i lam l) + d(-i lam l)) / lam^2.

    With ``scaled=True`` returns (mantissa, exponent) with
    Delta = mantissa * exp(exponent).
    """
    l = _lval(cfg)
    lam = np.asarray(lam, dtype=complex)
    tp = eval_gtrig(1j * lam * l, scaled=True)
    tm = eval_gtrig(-1j * lam * l, scaled=True)
    e = np.maximum(tp.scale_exp, tm.scale_exp)
    small = np.abs(lam * l) < _SERIES_RADIUS
    safe = np.where(small, 1.0, lam)
    mant = (tp.d * np.exp(tp.scale_exp - e) + tm.d * np.exp(tm.scale_exp - e)) / safe**2
    if np.any(small):
        mant = np.where(small, _char0_series(lam, l) * np.exp(-e), mant)
    if lam.ndim == 0:
        mant, e = complex(mant), float(e)
    if scaled:
        return mant, e
    if np.any(np.asarray(e) > 709.0):
        raise OverflowError("Delta(0, lam) overflows; use scaled=True")
    return mant * np.exp(e)


def char0_real_reduced(mu):
    """Bounded form of the L0 characteristic equation for real mu = lam*l:

        cos(mu)/cosh(b) - cos(mu/2) - sqrt(3) sin(mu/2) tanh(b),  b = sqrt(3) mu / 2,

    which equals (3/2) lam^2 Delta(0, lam) / cosh(b).
    """
    mu = np.asarray(mu, dtype=float)
    b = SQRT3 * np.abs(mu) / 2
    eb = np.exp(-2 * b)
    sech = 2 * np.exp(-b) / (1 + eb)
    tanh = np.sign(mu) * (1 - eb) / (1 + eb)
    return np.cos(mu) * sech - np.cos(mu / 2) - SQRT3 * np.sin(mu / 2) * tanh


# ----------------------------------------------------------- spectrum

def _delta_parts(delta, k):
    # Root equation for delta in mu = 2 pi k - pi/3 + delta, written as
    # sin(delta/2) A = B so that no O(1) quantities cancel; delta ~ (-1)^k exp(-b).
    mu = 2 * math.pi * k - math.pi / 3 + delta
    b = SQRT3 * mu / 2
    eb = math.exp(-b)
    a = SQRT3 * (math.sin(mu / 2) * eb + SQRT3 * (1 - eb * eb) / 2)
    rhs = (SQRT3 / 2) * math.cos(delta / 2 - math.pi / 6) * (
        2 * (-1) ** k * math.sin(math.pi / 6 + delta / 2) - SQRT3 * eb) * eb
    return a, rhs


def _delta_equation(delta, k):
    a, rhs = _delta_parts(delta, k)
    return math.sin(delta / 2) * a - rhs


def _refine_delta(delta, k):
    # fixed point delta = 2 asin(B/A); A and B depend on delta only through
    # O(exp(-b)) terms, so the map contracts fast and keeps full relative
    # precision even when delta is far below machine epsilon
    for _ in range(100):
        a, rhs = _delta_parts(delta, k)
        new = 2 * math.asin(max(-1.0, min(1.0, rhs / a)))
        if new == delta or abs(new - delta) <= 1e-16 * abs(new):
            return new
        delta = new
    return delta


def _root_mu(k: int, root_tol: float) -> tuple[float, float]:
    lo, hi = math.pi * (2 * k - 1), math.pi * (2 * k + 1)
    flo, fhi = char0_real_reduced(lo), char0_real_reduced(hi)
    if not flo * fhi < 0:
        raise BracketError(f"no sign change of Delta(0, .) in bracket k={k}")
    mu = brentq(lambda m: float(char0_real_reduced(m)), lo, hi,
                xtol=min(root_tol, 1e-12), rtol=4 * np.finfo(float).eps, maxiter=200)
    mu0 = 2 * math.pi * k - math.pi / 3
    delta = _refine_delta(mu - mu0, k)
    if abs(delta - (mu - mu0)) > 1e-9 * mu:
        raise BracketError(f"asymptotic refinement drifted at k={k}")
    return mu0 + delta, delta


def _eigen_norm(lam, l, grid=None):
    grid = grid or adapted_grid(l, lam)
    vals = _eigen_scaled(lam, l, grid.nodes)
    return grid.norm(vals)


def l0_spectrum(cfg: L0Config) -> list[L0Eigenpair]:
    """Eigenpairs for k = 1..k_max, each k giving eps = +1 then eps = -1."""
    l = cfg.l
    out = []
    for k in range(1, cfg.k_max + 1):
        mu, delta = _root_mu(k, cfg.root_tol)
        lam = mu / l
        scale = SQRT3 * mu / 2
        norm = _eigen_norm(lam, l, _norm_grid(cfg, lam))
        # the eps = -1 eigenfunction is the complex conjugate: same norm
        for eps in (1, -1):
            out.append(L0Eigenpair(k, lam, eps, norm, delta / l, l, scale))
    return out


def _norm_grid(cfg, lam):
    return adapted_grid(cfg.l, lam, cfg.quad_panels, cfg.quad_order)


def l0_levels(cfg: L0Config) -> list[L0Eigenpair]:
    """Same eigenpairs ordered by eigenvalue z."""
    return sorted(l0_spectrum(cfg), key=lambda p: p.z)


# ------------------------------------------------------- eigenfunctions

def _eigen_modes(lam, l):
    """Mode exponents a_j and amplitudes B_j, shifts sig_j with

        exp(-M) [s(i lam x) s(i lam l) + d(i lam x)(1 - c(i lam l))]
            = sum_j B_j exp(a_j x - sig_j),   M = max_m Re(a_m l).

    The amplitude of mode j never contains exp(a_j l) (those terms cancel
    exactly), which removes the cancellation between the two products of
    large numbers in the raw formula.
    """
    a = 1j * lam * ZETA
    M = float(np.max((a * l).real))
    sig = np.maximum((a * l).real, 0.0)
    zi = 1.0 / ZETA
    B = np.empty(3, dtype=complex)
    for j in range(3):
        acc = zi[j] ** 2 * np.exp(sig[j] - M)
        for m in range(3):
            if m != j:
                acc += (zi[j] * zi[m] - zi[j] ** 2) / 3 * np.exp(a[m] * l - M + sig[j])
        B[j] = acc / 3
    return a, B, sig


def _eigen_scaled(lam, l, x):
    x = np.asarray(x, dtype=float)
    a, B, sig = _eigen_modes(lam, l)
    return sum(B[j] * np.exp(a[j] * x - sig[j]) for j in range(3))


def l0_eigenfunction(cfg, pair: L0Eigenpair, x):
    """Normalized eigenfunction u(0, eps lambda_k, x)."""
    return _eigen_scaled(pair.lam, pair.l, x) / pair.norm_u


def l0_eigenfunction_grid(cfg, pair: L0Eigenpair, grid: Grid | None = None) -> GridFunction:
    grid = grid or cfg.grid
    return GridFunction(grid, l0_eigenfunction(cfg, pair, grid.nodes))


# ------------------------------------------------------------ resolvent

def l0_resolvent(cfg, lam, f: GridFunction, x=None, derivative: bool = False,
                 pole_tol: float = 1e-8):
    """y = (L0 - lam^3)^{-1} f.

    Returns a GridFunction on f's grid, or values at the points ``x``. With
    ``derivative=True`` returns (y, y') as arrays.
    """
    l = _lval(cfg)
    lam = complex(lam)
    if lam == 0:
        raise PoleError("lam = 0 not supported")
    grid = f.grid
    fv = f.samples
    t = grid.nodes
    xs = grid.nodes if x is None else np.atleast_1d(np.asarray(x, dtype=float))

    g_l = eval_gtrig(1j * lam * l)
    g_ml = eval_gtrig(-1j * lam * l)
    lam2_delta = g_l.d + g_ml.d
    if abs(lam2_delta) < pole_tol * (abs(g_l.d) + abs(g_ml.d)):
        raise PoleError(f"lam^3 = {lam**3} is numerically an eigenvalue of L0")
    delta0 = lam2_delta / lam**2

    g_mt = eval_gtrig(-1j * lam * t)
    A = grid.integrate(g_mt.d * fv)
    S = grid.integrate(g_mt.s * fv)
    C = grid.integrate(g_mt.c * fv)
    B = grid.integrate(eval_gtrig(1j * lam * (l - t)).d * fv)

    gx = eval_gtrig(1j * lam * xs)
    gxl = eval_gtrig(1j * lam * (xs - l))
    phi = [grid.exp_convolution(fv, 1j * lam * zk, xs) for zk in ZETA]
    zi = 1.0 / ZETA

    full = gx.c * A + gx.s * S + gx.d * C  # int_0^l d(i lam (x - t)) f dt
    part = sum(zi[j] ** 2 * phi[j] for j in range(3)) / 3
    pref = 1j / (lam**4 * delta0)
    y = pref * (gxl.d * A - g_ml.d * full - gx.d * B) + 1j / lam**2 * part
    if derivative:
        il = 1j * lam
        dfull = il * (gx.d * A + gx.c * S + gx.s * C)
        dpart = il * sum(zi[j] * phi[j] for j in range(3)) / 3
        dy = pref * (il * gxl.s * A - g_ml.d * dfull - il * gx.s * B) + 1j / lam**2 * dpart
        return y, dy
    if x is None:
        return GridFunction(grid, y)
    return y
