"""Acceptance criteria 1-10, each at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""
import math
import time

import numpy as np
import pytest

from conftest import record
from cubicstring.gtrig import eval_gtrig, gtrig_zero, identity_residuals, kernel_identity_residuals
from cubicstring.inverse import (
    SpectrumFile,
    check_admissibility,
    forward_spectra,
    four_spectra,
    partition_spectra,
    recover_masses,
    recover_potential,
    window_spectra,
)
from cubicstring.quadrature import GridFunction, make_grid
from cubicstring.rankone import RankOneSystem, dense_oracle, secular_roots
from cubicstring.spectral_l0 import L0Config, char0, l0_levels, l0_resolvent, l0_spectrum
from cubicstring.transforms import Potential, char_alpha, fourier_csd, l0_coefficients, m_fn

# independent bisection on the real form of the L0 characteristic equation
LAMBDA_1 = 5.225154248768964


def _disk(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


@pytest.fixture(scope="module")
def reference_levels():
    """2000 L0 levels (k <= 1000), the truth for truncation studies."""
    return l0_levels(L0Config(k_max=1000))


# ------------------------------------------------------------------ 1

def test_criterion_1_identities():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    res = identity_residuals(_disk(rng, 1000, 5), _disk(rng, 1000, 5))
    ker = kernel_identity_residuals(_disk(rng, 1000, 5), *rng.uniform(0, 3, (3, 1000)))
    elapsed = time.perf_counter() - t0
    worst = max(list(res.values()) + list(ker.values()))
    ok = worst <= 1e-10 and elapsed < 5 and len(res) == 10 and len(ker) == 3
    record(1, ok, f"max relative residual {worst:.2e} over 13 identities, {elapsed:.2f} s")
    assert ok


# ------------------------------------------------------------------ 2

def test_criterion_2_zeros_vanish():
    worst = 0.0
    for fam in "csd":
        for k in range(1, 21):
            x = gtrig_zero(fam, k)
            worst = max(worst, abs(getattr(eval_gtrig(-x), fam)) / math.exp(x / 2))
    record(2, worst <= 1e-10, f"|f(-x)| e^(-x/2) <= {worst:.2e} at 60 roots")
    assert worst <= 1e-10


@pytest.mark.xfail(strict=True, reason="the per-index order x_d <= x_s <= x_c does not hold for "
                   "the true roots when k >= 2 (x_s(2) = 3.0167 < x_d(2) = 4.2332); see "
                   "test_gtrig.py::test_zero_families_alternate for the order that does hold")
def test_criterion_2_literal_ordering():
    bad = [k for k in range(1, 21)
           if not gtrig_zero("d", k) <= gtrig_zero("s", k) <= gtrig_zero("c", k)]
    record(2, not bad, f"x_d(k) <= x_s(k) <= x_c(k) violated for k in {bad[:3]}...{bad[-1:]}"
           if bad else "x_d(k) <= x_s(k) <= x_c(k) for k <= 20")
    assert not bad


# ------------------------------------------------------------------ 3

def test_criterion_3_l0_spectrum():
    spec = [p for p in l0_spectrum(L0Config(l=1.0, k_max=50)) if p.eps == 1]
    inside = all(math.pi * (2 * p.k - 1) < p.lambda_k < math.pi * (2 * p.k + 1) for p in spec)
    dev = [abs(p.delta_k) for p in spec]
    mono = all(dev[i + 1] < dev[i] for i in range(2, 49))
    lam1 = spec[0].lambda_k
    ok = inside and mono and dev[49] < 1e-4 and abs(lam1 - 5.2252) <= 5e-4 \
        and abs(lam1 - LAMBDA_1) < 1e-12
    record(3, ok, f"brackets ok={inside}, |delta_k| decreasing k>=3: {mono}, "
           f"|delta_50|={dev[49]:.1e}, lambda_1={lam1:.10f}")
    assert ok


# ------------------------------------------------------------------ 4

def _fd_residual(cfg, lam, f_func, h):
    grid = make_grid(cfg.l, 64, 16)
    f = GridFunction(grid, f_func(grid.nodes))
    x = np.arange(0.1, 0.9 + h / 2, h)
    pts = np.concatenate([x - 2 * h, x - h, x + h, x + 2 * h])
    y = l0_resolvent(cfg, lam, f, x=pts)
    ym2, ym1, yp1, yp2 = np.split(y, 4)
    d3 = (yp2 - 2 * yp1 + 2 * ym1 - ym2) / (2 * h**3)
    yx = l0_resolvent(cfg, lam, f, x=x)
    return float(np.max(np.abs(1j * d3 - lam**3 * yx - f_func(x))))


RESOLVENT_INPUTS = [
    (lambda x: x * (1 - x) + 0j, 1 + 0.5j),
    (lambda x: np.exp(2j * x), 2.3 - 0.4j),
    (lambda x: np.cos(3 * x) + 1j * x**2, 0.7 + 1.1j),
    (lambda x: 1 / (1 + x**2) + 0j, 3.1 + 0.2j),
    (lambda x: np.sin(5 * x) * np.exp(-x) + 0j, 1.5 + 1.5j),
]


def test_criterion_4_resolvent():
    cfg = L0Config(l=1.0)
    orders, bcs = [], []
    for f_func, lam in RESOLVENT_INPUTS:
        r = [_fd_residual(cfg, lam, f_func, h) for h in (0.02, 0.01, 0.005)]
        orders.append(min(math.log2(r[0] / r[1]), math.log2(r[1] / r[2])))
        grid = make_grid(cfg.l, 64, 16)
        y, dy = l0_resolvent(cfg, lam, GridFunction(grid, f_func(grid.nodes)),
                             x=np.array([0.0, cfg.l]), derivative=True)
        bcs.append(max(abs(y[0]), abs(y[1]), abs(dy[0] - dy[1])))
    ok = min(orders) >= 1.9 and max(bcs) <= 1e-8
    record(4, ok, f"min observed order {min(orders):.2f}, max BC defect {max(bcs):.1e}")
    assert ok


# ------------------------------------------------------------------ 5

def test_criterion_5_rankone_oracle():
    rng = np.random.default_rng(5)
    worst, interlaced = 0.0, True
    for _ in range(20):
        z = np.sort(rng.normal(size=50) * 30)
        v = rng.normal(size=50) + 1j * rng.normal(size=50)
        alpha = rng.choice([-1, 1]) * rng.uniform(0.05, 5)
        sys = RankOneSystem(z, v / np.linalg.norm(v), alpha)
        mu = np.array([r.mu for r in secular_roots(sys)])
        worst = max(worst, float(np.max(np.abs(mu - dense_oracle(sys, 50)))))
        if alpha > 0:
            interlaced &= bool(np.all(z < mu) and np.all(mu[:-1] < z[1:]))
        else:
            interlaced &= bool(np.all(mu < z) and np.all(z[:-1] < mu[1:]))
    ok = worst <= 1e-8 and interlaced
    record(5, ok, f"max |secular - dense| {worst:.1e}, interlacing {interlaced}")
    assert ok


# ------------------------------------------------------------------ 6

def test_criterion_6_lemma35_bridge(reference_levels):
    v = Potential.from_function(lambda x: (1 + x - 2 * x**2) + 1j * np.sin(3 * x))
    alpha = 0.7
    coef = l0_coefficients(v, reference_levels)
    z = np.array([p.z for p in reference_levels])
    k = np.array([p.k for p in reference_levels])
    lams = np.linspace(0.6, 11.7, 10)
    ratio = np.array([(char_alpha(v, alpha, lam) / char0(1.0, lam)).real for lam in lams])
    errs = []
    for N in (250, 500, 1000, 2000):
        m = k <= N // 2
        q = np.array([1 + alpha * np.sum(np.abs(coef[m]) ** 2 / (z[m] - lam**3)) for lam in lams])
        errs.append(float(np.max(np.abs(q - ratio))))
    ok = all(errs[i + 1] < errs[i] for i in range(3)) and errs[-1] < 1e-3
    record(6, ok, "max error at N=250,500,1000,2000: " + ", ".join(f"{e:.1e}" for e in errs))
    assert ok


# ------------------------------------------------------------------ 7

def _coeff_potential(n_levels, seed):
    rng = np.random.default_rng(seed)
    ks = range(1, n_levels // 2 + 1)
    entries = [(k, e, complex(*rng.normal(size=2))) for k in ks for e in (1, -1)]
    return Potential.from_coeffs(L0Config(k_max=max(ks)), entries)


def test_criterion_7_two_spectra(reference_levels):
    alpha = 0.7
    v = _coeff_potential(10, 7)
    s0, sa = forward_spectra(v, alpha, L0Config(k_max=1000), reference_levels)
    w0, wa = window_spectra(s0, sa, 200)  # N = 400 levels
    res = recover_masses(w0, wa)
    lv = l0_levels(L0Config(k_max=200))
    truth = alpha * np.abs(l0_coefficients(v, lv)) ** 2
    err = float(np.max(np.abs(res.masses - truth)))
    nz = res.masses[res.masses != 0]
    same_sign = bool(np.all(nz > 0) or np.all(nz < 0))
    ok = err <= 1e-5 and same_sign and w0.N == 400
    record(7, ok, f"max mass error {err:.1e} at N={w0.N}, common sign {same_sign}")
    assert ok


# ------------------------------------------------------------------ 8

def test_criterion_8_four_spectra(reference_levels):
    alpha = 0.5
    v = _coeff_potential(8, 8)
    full = four_spectra(v, alpha, L0Config(k_max=1000), reference_levels)
    errs, alphas = [], []
    for k_max in (200, 400):
        win = [window_spectra(full[0], s, k_max) for s in full[1:]]
        cfg = L0Config(k_max=k_max)
        res = recover_potential(win[0][0], win[0][1], win[1][1], win[2][1], cfg)
        g = res.v_reconstructed.grid
        truth = v.on(g).samples
        errs.append(g.norm(res.v_reconstructed.samples - truth) / g.norm(truth))
        alphas.append(res.alpha)
    ok = errs[0] <= 1e-3 and errs[1] <= errs[0] and abs(alphas[0] - alpha) <= 1e-4
    record(8, ok, f"relative L2 error {errs[0]:.1e} (N=400), {errs[1]:.1e} (N=800); "
           f"|alpha error| {abs(alphas[0] - alpha):.1e}")
    assert ok


# ------------------------------------------------------------------ 9

def test_criterion_9_convolution_identity():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(5):
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        b = rng.normal(size=3) + 1j * rng.normal(size=3)
        fr = rng.uniform(1, 6, size=3)
        func = (lambda x, a=a, b=b, fr=fr: np.polyval(a, x)
                + sum(bj * np.exp(1j * fj * x) for bj, fj in zip(b, fr)))
        v = Potential.from_function(func, 1.0)
        for lam in _disk(rng, 20, 10):
            t = fourier_csd(v, lam)
            lhs = t.m + t.m_star
            parts = (t.vd * t.vc_star, t.vs * t.vs_star, t.vc * t.vd_star)
            mag = abs(t.m) + abs(t.m_star) + sum(abs(p) for p in parts)
            worst = max(worst, abs(lhs - sum(parts)) / mag)
    record(9, worst <= 1e-8, f"max relative error {worst:.1e} (100 evaluations)")
    assert worst <= 1e-8


# ----------------------------------------------------------------- 10

def test_criterion_10_admissibility():
    cfg = L0Config(k_max=100)
    lv = l0_levels(cfg)
    v = Potential.from_function(lambda x: np.exp(-((x - 0.4) / 0.2) ** 2) + 0.3j * x)
    s0, sa = forward_spectra(v, 0.5, cfg, lv)
    verdicts = {"forward": check_admissibility(s0, sa).verdict}

    ev = sa.expanded.copy()
    i = int(np.searchsorted(ev, 0.0))
    z = s0.expanded
    ev[i] = 0.5 * (z[i + 1] + z[i + 2])  # two perturbed values in one gap
    verdicts["interlacing"] = check_admissibility(
        s0, SpectrumFile.from_values(np.sort(ev), cfg.l)).reason

    ev = sa.expanded.copy()
    ev[np.argmin(np.abs(ev))] = 0.0
    verdicts["zero_eigenvalue"] = check_admissibility(
        s0, SpectrumFile.from_values(np.sort(ev), cfg.l)).reason

    # v orthogonal to every other level, and every perturbed value placed on
    # the sigma0 level inside its gap: coincidences all the way out
    coef = np.array([0.0 if n % 2 else 1.0 / (1 + abs(n - 100)) for n in range(z.size)], complex)
    coef /= np.linalg.norm(coef)
    _, sb = forward_spectra(v, 0.5, cfg, lv, coef)
    p = partition_spectra(s0, sb)
    z1, zs0 = z[p.sigma1], z[~p.sigma1]
    vals = list(zs0)
    for j, mu in enumerate(p.mu):
        nxt = zs0[zs0 > z1[j]]
        vals.append(nxt[0] if nxt.size and (j + 1 == z1.size or nxt[0] < z1[j + 1]) else mu)
    verdicts["sigma0_overlap"] = check_admissibility(
        s0, SpectrumFile.from_values(np.sort(vals), cfg.l)).reason

    ok = (verdicts["forward"] == "accept" and verdicts["interlacing"] == "interlacing"
          and verdicts["zero_eigenvalue"] == "zero_eigenvalue"
          and verdicts["sigma0_overlap"] == "sigma0_overlap")
    record(10, ok, ", ".join(f"{k}->{v}" for k, v in verdicts.items()))
    assert ok
