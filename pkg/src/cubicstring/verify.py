"""Self-check suites run by ``cubicstring verify``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .gtrig import eval_gtrig, gtrig_zero, identity_residuals, kernel_identity_residuals
from .inverse import (
    SpectrumFile,
    check_admissibility,
    forward_spectra,
    fourier_g,
    fourier_g_quadrature,
    recover_masses,
)
from .quadrature import GridFunction
from .rankone import RankOneSystem, dense_oracle, secular_roots
from .spectral_l0 import L0Config, char0, l0_eigenfunction, l0_levels, l0_resolvent, l0_spectrum
from .transforms import Potential, l0_coefficients

SUITES = ("gtrig", "l0", "rankone", "inverse")


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _disk(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def suite_gtrig(rng) -> list[Check]:
    out = []
    res = identity_residuals(_disk(rng, 200, 5), _disk(rng, 200, 5))
    out += [Check("gtrig", f"identity {k}", v, 1e-10) for k, v in res.items()]
    res = kernel_identity_residuals(_disk(rng, 200, 3), *rng.uniform(0, 3, (3, 200)))
    out += [Check("gtrig", f"kernel identity {k}", v, 1e-10) for k, v in res.items()]
    worst = 0.0
    for fam in "csd":
        for k in range(1, 21):
            x = gtrig_zero(fam, k)
            val = getattr(eval_gtrig(-x), fam)
            worst = max(worst, abs(val) / math.exp(x / 2))
    out.append(Check("gtrig", "zeros vanish (scaled by exp(x/2))", worst, 1e-10))
    return out


def suite_l0(rng) -> list[Check]:
    cfg = L0Config(k_max=50)
    spec = l0_spectrum(cfg)
    pos = [p for p in spec if p.eps == 1]
    out = [Check("l0", "lambda_1 = 5.2252", abs(pos[0].lambda_k - 5.2252), 5e-4)]
    out.append(Check("l0", "roots inside (pi(2k-1), pi(2k+1))", float(sum(
        not (math.pi * (2 * p.k - 1) < p.lambda_k < math.pi * (2 * p.k + 1)) for p in pos)), 0))
    out.append(Check("l0", "char0 at roots", max(
        abs(char0(cfg, p.lambda_k, scaled=True)[0]) for p in pos[:10]), 1e-10))
    g = cfg.grid
    U = np.array([l0_eigenfunction(cfg, p, g.nodes) for p in spec[:20]])
    gram = (U * g.weights) @ U.conj().T
    out.append(Check("l0", "orthonormality of first 20 eigenfunctions",
                     float(np.max(np.abs(gram - np.eye(20)))), 1e-8))
    f = GridFunction(g, np.exp(1j * g.nodes) * g.nodes * (1 - g.nodes))
    lam = complex(*rng.uniform(0.5, 3, 2))
    y, dy = l0_resolvent(cfg, lam, f, x=np.array([0.0, cfg.l]), derivative=True)
    out.append(Check("l0", "resolvent boundary conditions",
                     float(max(abs(y[0]), abs(y[1]), abs(dy[0] - dy[1]))), 1e-8))
    return out


def suite_rankone(rng) -> list[Check]:
    worst = 0.0
    for _ in range(5):
        z = np.sort(rng.normal(size=50) * 40)
        v = rng.normal(size=50) + 1j * rng.normal(size=50)
        sys = RankOneSystem(z, v / np.linalg.norm(v), rng.choice([-1, 1]) * rng.uniform(0.1, 3))
        mu = np.array([r.mu for r in secular_roots(sys)])
        worst = max(worst, float(np.max(np.abs(mu - dense_oracle(sys)))))
    out = [Check("rankone", "secular roots vs dense oracle, N=50", worst, 1e-8)]
    two = RankOneSystem([-1.0, 1.0], [2**-0.5, 2**-0.5], 1.0)
    mu = [r.mu for r in secular_roots(two)]
    gold = [(1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2]
    out.append(Check("rankone", "two-level golden ratio roots",
                     float(np.max(np.abs(np.subtract(mu, gold)))), 1e-12))
    return out


def suite_inverse(rng) -> list[Check]:
    cfg = L0Config(k_max=50)
    lv = l0_levels(cfg)
    coef = {(k, e): complex(*rng.normal(size=2)) for k in range(1, 4) for e in (1, -1)}
    v = Potential.from_coeffs(cfg, [(k, e, c) for (k, e), c in coef.items()])
    alpha = 0.7
    s0, sa = forward_spectra(v, alpha, cfg, lv)
    res = recover_masses(s0, sa)
    truth = alpha * np.abs(l0_coefficients(v, lv)) ** 2
    out = [Check("inverse", "two-spectra masses", float(np.max(np.abs(res.masses - truth))), 1e-5)]
    out.append(Check("inverse", "alpha from masses", abs(res.alpha - alpha), 1e-6))
    gq = max(abs(fourier_g(cfg, p) - fourier_g_quadrature(cfg, p)) for p in lv[::7])
    out.append(Check("inverse", "probe coefficients closed form vs quadrature", gq, 1e-8))
    out.append(Check("inverse", "forward data admissible",
                     float(not check_admissibility(s0, sa).accepted), 0))
    bad = sa.expanded.copy()
    bad[np.argmin(np.abs(bad))] = 0.0
    rep = check_admissibility(s0, SpectrumFile.from_values(np.sort(bad), cfg.l))
    out.append(Check("inverse", "zero eigenvalue rejected",
                     float(rep.reason != "zero_eigenvalue"), 0))
    return out


_RUNNERS = {"gtrig": suite_gtrig, "l0": suite_l0, "rankone": suite_rankone, "inverse": suite_inverse}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    if name == "all":
        names = SUITES
    elif name in _RUNNERS:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    rng = np.random.default_rng(seed)
    checks = []
    for n in names:
        checks += _RUNNERS[n](rng)
    return checks
