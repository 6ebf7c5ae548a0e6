"""Third-order trigonometric functions c, s, d.

    c(z) = 1/3 sum_k exp(z zeta_k)
    s(z) = 1/3 sum_k exp(z zeta_k) / zeta_k
    d(z) = 1/3 sum_k exp(z zeta_k) / zeta_k**2

with zeta_k the cube roots of unity. They solve D^3 y = y with the unit
initial data c(0) = s'(0) = d''(0) = 1 and play the role cos/sin play for
second-order problems.

All evaluators accept scalars or numpy arrays. With ``scaled=True`` the
values are divided by exp(max_k Re(z zeta_k)) so arguments far beyond the
exp() overflow threshold stay representable.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ZETA",
    "GTrigTriple",
    "Sector",
    "eval_gtrig",
    "c",
    "s",
    "d",
    "euler_exp",
    "gtrig_zero",
    "gtrig_zeros",
    "sector_of",
    "identity_residuals",
    "kernel_identity_residuals",
]

SQRT3 = math.sqrt(3.0)

#: (zeta_1, zeta_2, zeta_3) = (1, e^{2 pi i/3}, e^{-2 pi i/3})
ZETA = np.array([1.0 + 0.0j, complex(-0.5, SQRT3 / 2), complex(-0.5, -SQRT3 / 2)])

# coefficient of exp(z zeta_k) in c, s, d respectively
_COEF = np.array([np.ones(3), 1.0 / ZETA, 1.0 / ZETA**2]) / 3.0

# below this |z| the exponential sums lose digits to cancellation
_TAYLOR_RADIUS = 1e-2
_EXP_MAX = math.log(np.finfo(float).max)


class GTrigTriple(NamedTuple):
    """(c, s, d) at one argument; true values are these times exp(scale_exp)."""

    c: complex | np.ndarray
    s: complex | np.ndarray
    d: complex | np.ndarray
    scale_exp: float | np.ndarray

    def unscaled(self) -> "GTrigTriple":
        f = np.exp(self.scale_exp)
        return GTrigTriple(self.c * f, self.s * f, self.d * f, 0.0 * self.scale_exp)


class Sector(NamedTuple):
    """Open sector 2 pi (p-1)/3 < arg z < 2 pi p/3."""

    p: int

    @property
    def bounds(self) -> tuple[float, float]:
        return 2 * math.pi * (self.p - 1) / 3, 2 * math.pi * self.p / 3

    @property
    def bisector(self) -> complex:
        return complex(np.exp(1j * math.pi * (2 * self.p - 1) / 3))


def sector_of(z: complex) -> Sector:
    arg = math.atan2(z.imag, z.real) % (2 * math.pi)
    return Sector(min(int(arg // (2 * math.pi / 3)) + 1, 3))


def _taylor(z: np.ndarray) -> np.ndarray:
    # terms up to z^8; the first omitted term is below 1e-23 for |z| < 1e-2
    z2 = z * z
    z3 = z2 * z
    cv = 1 + z3 / 6 + z3 * z3 / 720
    sv = z * (1 + z3 / 24 + z3 * z3 / 5040)
    dv = z2 * (0.5 + z3 / 120 + z3 * z3 / 40320)
    return np.array([cv, sv, dv])


def eval_gtrig(z, scaled: bool = False) -> GTrigTriple:
    """Evaluate (c(z), s(z), d(z)).

    Raises OverflowError when ``scaled`` is false and the result would not
    fit in a double.
    """
    zarr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(zarr)):
        raise ValueError("argument must be finite")
    expo = zarr[..., None] * ZETA  # (..., 3)
    scale = expo.real.max(axis=-1)
    if not scaled and np.any(scale > _EXP_MAX):
        raise OverflowError(
            f"c, s, d overflow at max Re(z zeta) = {float(np.max(scale)):.1f}; use scaled=True"
        )
    shift = scale if scaled else np.zeros_like(scale)
    e = np.exp(expo - shift[..., None])
    vals = np.einsum("fk,...k->f...", _COEF, e)

    small = np.abs(zarr) < _TAYLOR_RADIUS
    if np.any(small):
        tv = _taylor(zarr[small])
        if scaled:
            tv = tv * np.exp(-scale[small])
        vals[:, small] = tv

    if np.ndim(z) == 0:
        return GTrigTriple(complex(vals[0]), complex(vals[1]), complex(vals[2]),
                           float(shift))
    return GTrigTriple(vals[0], vals[1], vals[2], shift)


def c(z):
    return eval_gtrig(z).c


def s(z):
    return eval_gtrig(z).s


def d(z):
    return eval_gtrig(z).d


def euler_exp(z, p: int):
    """c(z) + zeta_p s(z) + zeta_p^2 d(z), which equals exp(z zeta_p)."""
    if p not in (1, 2, 3):
        raise ValueError("p must be 1, 2 or 3")
    zp = ZETA[p - 1]
    t = eval_gtrig(z)
    return t.c + zp * t.s + zp * zp * t.d


# Zeros. On the negative real axis
#   3 c(-x) = e^{-x} + 2 e^{x/2} cos(theta)
#   3 s(-x) = e^{-x} - 2 e^{x/2} sin(theta + pi/6)
#   3 d(-x) = e^{-x} + 2 e^{x/2} sin(theta - pi/6),   theta = sqrt(3) x / 2,
# so dividing by 2 e^{x/2} gives bounded equations with one root per
# half-period of theta.

def _zero_eq(family: str):
    if family == "c":
        return lambda x: math.cos(SQRT3 * x / 2) + 0.5 * math.exp(-1.5 * x)
    if family == "s":
        return lambda x: math.sin(SQRT3 * x / 2 + math.pi / 6) - 0.5 * math.exp(-1.5 * x)
    if family == "d":
        return lambda x: math.sin(SQRT3 * x / 2 - math.pi / 6) + 0.5 * math.exp(-1.5 * x)
    raise ValueError(f"unknown family {family!r}; expected 'c', 's' or 'd'")


def _theta_bracket(family: str, k: int) -> tuple[float, float]:
    # theta-interval of length pi holding the k-th root
    if family == "c":
        return (k - 1) * math.pi, k * math.pi
    if family == "s":
        mid = (k - 1) * math.pi - math.pi / 6
    else:
        mid = (k - 1) * math.pi + math.pi / 6
    return mid - math.pi / 2, mid + math.pi / 2


def gtrig_zero(family: str, k: int) -> float:
    """k-th nonnegative root x_family(k); the zeros of family are -zeta_2^j x.

    x_s(1) = x_d(1) = 0 exactly.
    """
    f = _zero_eq(family)
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    if family in ("s", "d") and k == 1:
        return 0.0
    lo, hi = (2 * t / SQRT3 for t in _theta_bracket(family, k))
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def gtrig_zeros(family: str, count: int) -> np.ndarray:
    return np.array([gtrig_zero(family, k) for k in range(1, count + 1)])


# Identities. Each residual is |lhs - rhs| divided by the sum of the moduli
# of the terms involved, maximized over the sample.

def _rel(lhs, rhs, *terms):
    mag = sum(np.abs(t) for t in terms) + np.abs(lhs) + np.abs(rhs)
    return float(np.max(np.abs(lhs - rhs) / np.where(mag == 0, 1.0, mag)))


def _fd6(f, z, h):
    # sixth-order central difference
    w = (1 / 60, -3 / 20, 3 / 4)
    return sum(wk * (f(z + (k + 1) * h) - f(z - (k + 1) * h)) for k, wk in zip(range(2, -1, -1), w)) / h


def _taylor_terms(z, start, terms=40):
    out = np.zeros_like(z)
    mag = np.zeros(z.shape)
    for n in range(start, start + 3 * terms, 3):
        t = z**n / math.factorial(n)
        out = out + t
        mag = mag + np.abs(t)
    return out, mag


def identity_residuals(z, w, h: float = 1e-2) -> dict[str, float]:
    """Residuals of the algebraic and differential identities of c, s, d at
    the sample points z and pairs (z, w), keyed (i) ... (x)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    C, S, D, _ = eval_gtrig(z)
    Cw, Sw, Dw, _ = eval_gtrig(w)
    res = {}

    def fdmag(f):
        return sum(np.abs(f(z + k * h)) for k in (-3, -2, -1, 1, 2, 3))

    fc, fs, fd = c, s, d
    res["(i)"] = max(
        _rel(_fd6(fs, z, h), C, fdmag(fs)),
        _rel(_fd6(fd, z, h), S, fdmag(fd)),
        _rel(_fd6(fc, z, h), D, fdmag(fc)))
    cc, cs, cd, _ = eval_gtrig(np.conj(z))
    res["(ii)"] = max(_rel(np.conj(C), cc), _rel(np.conj(S), cs), _rel(np.conj(D), cd))
    z2 = ZETA[1]
    rc_, rs_, rd_, _ = eval_gtrig(z * z2)
    res["(iii)"] = max(_rel(rc_, C), _rel(rs_, z2 * S), _rel(rd_, z2**2 * D))
    res["(iv)"] = max(
        _rel(np.exp(z * ZETA[p]), C + ZETA[p] * S + ZETA[p] ** 2 * D, C, S, D) for p in range(3))
    t0 = eval_gtrig(np.zeros(3))
    derivs0 = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    # values, first and second derivatives at 0 via (i): (c, c', c'') = (c, d, s)
    got = np.array([[t0.c[0], t0.d[0], t0.s[0]], [t0.s[0], t0.c[0], t0.d[0]], [t0.d[0], t0.s[0], t0.c[0]]])
    res["(v)"] = float(np.max(np.abs(got - derivs0)))
    res["(vi)"] = _rel(C**3 + S**3 + D**3 - 3 * C * S * D, 1.0, C**3, S**3, D**3, 3 * C * S * D)
    sc, ss, sd, _ = eval_gtrig(z + w)
    res["(vii)"] = max(
        _rel(sc, C * Cw + S * Dw + D * Sw, C * Cw, S * Dw, D * Sw),
        _rel(ss, C * Sw + S * Cw + D * Dw, C * Sw, S * Cw, D * Dw),
        _rel(sd, C * Dw + S * Sw + D * Cw, C * Dw, S * Sw, D * Cw))
    dc, ds, dd, _ = eval_gtrig(2 * z)
    mc, ms, md, _ = eval_gtrig(-z)
    res["(viii)"] = max(
        _rel(3 * C**2, dc + 2 * mc, dc, 2 * mc),
        _rel(3 * S**2, dd + 2 * md, dd, 2 * md),
        _rel(3 * D**2, ds + 2 * ms, ds, 2 * ms))
    res["(ix)"] = max(
        _rel(S**2 - D * C, md, S**2, D * C),
        _rel(D**2 - S * C, ms, D**2, S * C),
        _rel(C**2 - S * D, mc, C**2, S * D))
    tx = [_taylor_terms(z, k) for k in (0, 1, 2)]
    res["(x)"] = max(_rel(v, tv, tm) for v, (tv, tm) in zip((C, S, D), tx))
    return res


def kernel_identity_residuals(z, l, t, x) -> dict[str, float]:
    """Residuals of the three kernel identities used to simplify the L0
    resolvent, keyed (a), (b), (c)."""
    z = np.asarray(z, dtype=complex)
    zl, zlt = eval_gtrig(z * l), eval_gtrig(z * (l - t))
    mzl, mzt = eval_gtrig(-z * l), eval_gtrig(-z * t)
    zx, zxl, zxt = eval_gtrig(z * x), eval_gtrig(z * (x - l)), eval_gtrig(z * (x - t))
    a_l = zl.d * zlt.s - zl.s * zlt.d
    a_r = mzl.s * mzt.d - mzl.d * mzt.s
    b_l = (zl.c - 1) * zlt.d - zl.s * zlt.s
    b_r = -(zl.d + mzl.d) * mzt.c - zl.s * mzt.s - (zl.c - mzl.c) * mzt.d
    c_l = zx.s * a_l + zx.d * b_l
    c_r = zxl.d * mzt.d - zx.d * zlt.d - zxt.d * mzl.d
    return {
        "(a)": _rel(a_l, a_r, zl.d * zlt.s, zl.s * zlt.d, mzl.s * mzt.d, mzl.d * mzt.s),
        "(b)": _rel(b_l, b_r, (zl.c - 1) * zlt.d, zl.s * zlt.s, (zl.d + mzl.d) * mzt.c,
                    zl.s * mzt.s, (zl.c - mzl.c) * mzt.d),
        "(c)": _rel(c_l, c_r, zx.s * zl.d * zlt.s, zx.s * zl.s * zlt.d, zx.d * (zl.c - 1) * zlt.d,
                    zx.d * zl.s * zlt.s, zxl.d * mzt.d, zx.d * zlt.d, zxt.d * mzl.d),
    }
