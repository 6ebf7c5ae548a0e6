"""Inverse problem: recover alpha and v from spectra of L0 and L_alpha.

Spectra enter as SpectrumFile objects. Levels of L0 that reappear unchanged
in the perturbed spectrum form sigma0; the remaining levels (sigma1) are
paired one-to-one with the leftover perturbed eigenvalues mu by interlacing.
On such data the secular function is the rational function

    Q(z) = prod_{sigma1} (mu_n - z) / (z_n - z),

so that Delta(alpha, 0) = -l^2 Q(0) and alpha |v_p|^2 is the residue of Q
at z_p with the sign flipped.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .gtrig import eval_gtrig
from .quadrature import GridFunction, adapted_grid
from .rankone import RankOneSystem, perturbed_spectrum
from .spectral_l0 import L0Config, L0Eigenpair, l0_eigenfunction, l0_levels
from .transforms import Potential, l0_coefficients

__all__ = [
    "SpectrumFile",
    "InverseResult",
    "AdmissibilityReport",
    "SpectralDataError",
    "SignInconsistencyError",
    "NormalizationDefectError",
    "Partition",
    "partition_spectra",
    "hadamard_char0",
    "recover_c",
    "recover_masses",
    "fourier_g",
    "fourier_g_quadrature",
    "recover_potential",
    "check_admissibility",
    "forward_system",
    "forward_spectra",
    "four_spectra",
    "window_spectra",
]

MATCH_RTOL = 1e-13
NORMALIZATION_LIMIT = 0.05


class SpectralDataError(ValueError):
    """Spectra cannot be paired (counts differ or interlacing fails)."""


class SignInconsistencyError(SpectralDataError):
    """Recovered masses do not share one sign."""


class NormalizationDefectError(ArithmeticError):
    pass


# ---------------------------------------------------------------- files

@dataclass
class SpectrumFile:
    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    l: float
    N: int
    provenance: Literal["computed", "external"] = "computed"

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        mult = np.asarray(self.multiplicities, dtype=int)
        if ev.ndim != 1 or ev.shape != mult.shape:
            raise ValueError("eigenvalues and multiplicities must be equal-length lists")
        if not np.all(np.isfinite(ev)):
            raise ValueError("eigenvalues must be finite")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted")
        if np.any((mult < 1) | (mult > 2)):
            raise ValueError("multiplicities must be 1 or 2")
        if not self.l > 0:
            raise ValueError("l must be positive")
        if self.provenance not in ("computed", "external"):
            raise ValueError("provenance must be 'computed' or 'external'")
        self.eigenvalues, self.multiplicities = ev, mult
        self.l, self.N = float(self.l), int(self.N)

    @property
    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(self.eigenvalues, self.multiplicities)

    @classmethod
    def from_values(cls, values, l, N=None, provenance="computed") -> "SpectrumFile":
        """Build from a list where doubled eigenvalues appear twice."""
        vals, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
        return cls(vals, counts, l, len(values) if N is None else N, provenance)

    @classmethod
    def from_levels(cls, levels: list[L0Eigenpair], l: float) -> "SpectrumFile":
        z = np.array([p.z for p in levels])
        return cls(z, np.ones(z.size, dtype=int), l, z.size)

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "N": self.N,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "multiplicities": [int(m) for m in self.multiplicities],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumFile":
        try:
            ev = d["eigenvalues"]
            mult = d.get("multiplicities", [1] * len(ev))
            return cls(ev, mult, d["l"], d.get("N", int(np.sum(mult))),
                       d.get("provenance", "external"))
        except KeyError as e:
            raise ValueError(f"spectrum file lacks field {e}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SpectrumFile":
        return cls.from_dict(json.loads(text))


@dataclass
class AdmissibilityReport:
    interlaces: bool
    sigma0_overlap_count: int
    log_series_partial: float
    mass_series_partial: float
    verdict: Literal["accept", "reject"]
    reason: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class InverseResult:
    c_const: float
    masses: np.ndarray
    alpha: float | None = None
    v_coeffs: np.ndarray | None = None
    v_reconstructed: GridFunction | None = None
    residuals: dict = field(default_factory=dict)


# -------------------------------------------------------------- pairing

@dataclass
class Partition:
    """L0 levels z split into sigma0/sigma1, with mu paired to sigma1."""

    z: np.ndarray
    sigma1: np.ndarray            # boolean mask over z
    mu: np.ndarray                # one per sigma1 level, same order
    overlap: np.ndarray           # indices n in sigma0 with a mu equal to z_n
    sign: int                     # +1: mu_n > z_n, -1: mu_n < z_n, 0: no sigma1


def partition_spectra(sigma0: SpectrumFile, sigma_alpha: SpectrumFile,
                      rtol: float = MATCH_RTOL) -> Partition:
    z = sigma0.expanded
    if np.any(np.diff(z) <= 0):
        raise SpectralDataError("L0 spectrum must be simple")
    cand = sigma_alpha.expanded
    if cand.size != z.size:
        raise SpectralDataError(f"{cand.size} perturbed eigenvalues for {z.size} levels")
    used = np.zeros(cand.size, dtype=bool)
    s0 = np.zeros(z.size, dtype=bool)
    j = 0
    for n, zn in enumerate(z):
        tol = rtol * max(1.0, abs(zn))
        while j < cand.size and cand[j] < zn - tol:
            j += 1
        k = j
        while k < cand.size and cand[k] <= zn + tol:
            if not used[k]:
                used[k] = s0[n] = True
                break
            k += 1
    mu = cand[~used]
    z1 = z[~s0]
    sign = 0
    if z1.size:
        sign = 1 if mu[0] > z1[0] else -1
        lo = np.concatenate([[-np.inf], z1[:-1]]) if sign < 0 else z1
        hi = z1 if sign < 0 else np.concatenate([z1[1:], [np.inf]])
        if not np.all((mu > lo) & (mu < hi)):
            raise SpectralDataError("perturbed eigenvalues do not interlace with sigma1")
    overlap = [n for n in np.flatnonzero(s0)
               if np.any(np.abs(mu - z[n]) <= rtol * max(1.0, abs(z[n])))]
    return Partition(z, ~s0, mu, np.array(overlap, dtype=int), sign)


# -------------------------------------------------------------- products

def hadamard_char0(l: float, roots, lam) -> complex:
    """-l^2 prod_n (1 - lam^6 / lambda_n^6), roots = positive lambda_n ascending.

    The neglected tail is about sum_{n>N} |lam|^6 / lambda_n^6, roughly
    |lam l|^6 / (5 (2 pi)^6 N^5).
    """
    r = np.asarray(roots, dtype=float)
    lam = complex(lam)
    return complex(-l * l * np.prod(1 - lam**6 / r**6))


def _log_factors(p: Partition):
    z1 = p.z[p.sigma1]
    return np.log1p((p.mu - z1) / z1)


def _outer_tail(z, terms) -> float:
    """Sum of the terms attached to the outer half of the levels (by |z|)."""
    z = np.asarray(z)
    if z.size < 2:
        return 0.0
    cut = np.quantile(np.abs(z), 0.5)
    return float(abs(math.fsum(np.asarray(terms)[np.abs(z) > cut])))


def recover_c(sigma0: SpectrumFile, sigma_alpha: SpectrumFile,
              partition: Partition | None = None) -> tuple[float, float]:
    """c = Delta(alpha, 0) = -l^2 prod_{sigma1} mu_n / z_n and a tail estimate."""
    p = partition or partition_spectra(sigma0, sigma_alpha)
    if np.any(p.z == 0):
        raise SpectralDataError("zero in the L0 spectrum")
    logs = _log_factors(p)
    c = -sigma0.l ** 2 * math.exp(math.fsum(logs))
    return c, _outer_tail(p.z[p.sigma1], logs)


def _masses(p: Partition) -> np.ndarray:
    """alpha |v_p|^2 = (mu_p - z_p) prod_{n != p} (mu_n - z_p) / (z_n - z_p)."""
    z1 = p.z[p.sigma1]
    shift = p.mu - z1
    out = np.empty(z1.size)
    for i in range(z1.size):
        dz = z1 - z1[i]
        dz[i] = 1.0
        f = shift / dz
        f[i] = 0.0
        out[i] = shift[i] * math.exp(math.fsum(np.log1p(f)))
    masses = np.zeros(p.z.size)
    masses[p.sigma1] = out
    return masses


def recover_masses(sigma0: SpectrumFile, sigma_alpha: SpectrumFile) -> InverseResult:
    """alpha |v_p|^2 for every L0 level (zero on sigma0) and the constant c."""
    p = partition_spectra(sigma0, sigma_alpha)
    c, c_tail = recover_c(sigma0, sigma_alpha, p)
    if p.sign == 0:
        return InverseResult(c, np.zeros(p.z.size), 0.0,
                             residuals={"c_log_outer_half": c_tail, "mass_outer_half": 0.0})
    masses = _masses(p)
    nz = masses[p.sigma1]
    if not (np.all(nz > 0) or np.all(nz < 0)):
        raise SignInconsistencyError("recovered masses change sign")
    return InverseResult(
        c, masses, float(math.fsum(masses)),
        residuals={"c_log_outer_half": c_tail,
                   "mass_outer_half": _outer_tail(p.z[p.sigma1], nz),
                   "sigma1_count": int(p.sigma1.sum()),
                   "overlap": p.overlap.tolist()})


# ------------------------------------------------------------- probe g

def fourier_g(cfg: L0Config, pair: L0Eigenpair) -> complex:
    """<l - x, u_p> in closed form: (i l / lam)(c(-i lam l) - 1) / ||u_p||."""
    l = cfg.l
    lam = pair.lam
    t = eval_gtrig(-1j * lam * l, scaled=True)
    M = pair.scale_exp
    return complex((1j * l / lam) * (t.c * math.exp(t.scale_exp - M) - math.exp(-M)) / pair.norm_u)


def fourier_g_quadrature(cfg: L0Config, pair: L0Eigenpair) -> complex:
    l = cfg.l
    g = adapted_grid(l, pair.lambda_k, cfg.quad_panels, cfg.quad_order)
    return complex(g.inner(l - g.nodes, l0_eigenfunction(cfg, pair, g.nodes)))


def probe_potential(l: float) -> Potential:
    return Potential.from_function(lambda x: (l - np.asarray(x)) + 0j, l, normalize=False)


# ------------------------------------------------------- four spectra

def recover_potential(sigma0: SpectrumFile, sigma_v: SpectrumFile, sigma_vg: SpectrumFile,
                      sigma_vig: SpectrumFile, cfg: L0Config,
                      levels: list[L0Eigenpair] | None = None) -> InverseResult:
    """alpha and v from the spectra of L0 and of L_alpha with v, v + g, v + i g,
    where g(x) = l - x.

    ``levels`` are the L0 eigenpairs matching sigma0 (computed from cfg when
    omitted).
    """
    levels = levels or _levels_for(sigma0, cfg)
    rv = recover_masses(sigma0, sigma_v)
    rg = recover_masses(sigma0, sigma_vg)
    rig = recover_masses(sigma0, sigma_vig)
    alpha = float(math.fsum(rv.masses))
    if alpha == 0:
        raise SpectralDataError("sigma(L_alpha) equals sigma(L0): alpha or v vanishes")
    g = np.array([fourier_g(cfg, p) for p in levels])
    pv = partition_spectra(sigma0, sigma_v)
    excluded = set()
    for spec in (sigma_v, sigma_vg, sigma_vig):
        excluded.update(int(n) for n in partition_spectra(sigma0, spec).overlap)
    v = np.zeros(len(levels), dtype=complex)
    for n in np.flatnonzero(pv.sigma1):
        if n in excluded:
            continue
        if abs(g[n]) == 0:
            raise ZeroDivisionError(f"probe coefficient g_{n} vanishes")
        base = rv.masses[n] + alpha * abs(g[n]) ** 2
        re = 0.5 * (rg.masses[n] - base)
        im = 0.5 * (rig.masses[n] - base)
        v[n] = complex(re, im) / (alpha * np.conj(g[n]))
    defect = float(abs(np.sum(np.abs(v) ** 2) - 1))
    if defect > NORMALIZATION_LIMIT:
        raise NormalizationDefectError(
            f"sum |v_p|^2 differs from 1 by {defect:.3g}; truncation too small or inconsistent spectra")
    grid = cfg.grid
    samples = np.zeros(grid.nodes.shape, dtype=complex)
    for n in np.flatnonzero(v):
        samples += v[n] * l0_eigenfunction(cfg, levels[n], grid.nodes)
    return InverseResult(
        rv.c_const, rv.masses, alpha, v, GridFunction(grid, samples),
        residuals={"normalization_defect": defect,
                   "c_log_outer_half": rv.residuals["c_log_outer_half"],
                   "mass_outer_half": rv.residuals["mass_outer_half"],
                   "excluded_doubled": sorted(excluded)})


def _levels_for(sigma0: SpectrumFile, cfg: L0Config) -> list[L0Eigenpair]:
    n = sigma0.expanded.size
    if n % 2:
        raise SpectralDataError("L0 spectrum must hold both signs of every level")
    lv = l0_levels(L0Config(sigma0.l, n // 2, cfg.root_tol, cfg.quad_panels, cfg.quad_order))
    z = np.array([p.z for p in lv])
    if not np.allclose(z, sigma0.expanded, rtol=1e-10, atol=0):
        raise SpectralDataError("sigma0 file does not match the computed L0 spectrum")
    return lv


# -------------------------------------------------------- admissibility

def _block_ratio(z, terms, min_terms: int = 8) -> float:
    """sum |terms| over rank block [n/2, n) / same over [n/4, n/2), ranks by |z|.

    Dyadic blocks of a convergent series with terms ~ k^-(1+s) shrink by about
    2^-s; a ratio near or above one means the partial sums are not settling.
    NaN when the blocks hold too few terms to judge.
    """
    z = np.asarray(z)
    n = z.size
    rank = np.argsort(np.argsort(np.abs(z)))
    a = (rank >= n // 4) & (rank < n // 2)
    b = rank >= n // 2
    if a.sum() < min_terms or b.sum() < min_terms:
        return math.nan
    t = np.abs(np.asarray(terms))
    sa, sb = math.fsum(t[a]), math.fsum(t[b])
    return math.inf if sa == 0 and sb > 0 else (sb / sa if sa else 0.0)


def check_admissibility(sigma0: SpectrumFile, candidate: SpectrumFile,
                        max_block_ratio: float = 0.9) -> AdmissibilityReport:
    """Screen candidate perturbed spectral data against L0's spectrum.

    Rejections, in the order tested: zero_eigenvalue, interlacing,
    sigma0_overlap, mass_sign, log_series, mass_series.
    """
    ev = candidate.expanded
    scale = max(1.0, float(np.max(np.abs(sigma0.eigenvalues))))

    def reject(reason, interlaces=False, overlap=0, logp=math.nan, massp=math.nan, **details):
        return AdmissibilityReport(interlaces, overlap, logp, massp, "reject", reason, details)

    if np.any(np.abs(ev) <= 1e-14 * scale):
        return reject("zero_eigenvalue")
    try:
        p = partition_spectra(sigma0, candidate)
    except SpectralDataError as e:
        return reject("interlacing", message=str(e))

    # overlap of sigma(mu) with sigma0 must not persist out to the edge of
    # the window; with finitely many coincidences the outer levels are free
    ov = p.overlap
    n_lv = p.z.size
    rank = np.argsort(np.argsort(np.abs(p.z)))
    outer = [int(n) for n in ov if rank[n] >= 0.75 * n_lv]
    if len(ov) > max(2, n_lv // 8) or outer:
        return reject("sigma0_overlap", True, len(ov), outer_indices=outer)

    logs = _log_factors(p)
    logp = float(math.fsum(logs))
    if p.sign == 0:
        return AdmissibilityReport(True, len(ov), logp, 0.0, "accept")
    masses = _masses(p)[p.sigma1]
    massp = float(math.fsum(masses))
    if not (np.all(masses > 0) or np.all(masses < 0)):
        return reject("mass_sign", True, len(ov), logp, massp)
    z1 = p.z[p.sigma1]
    log_ratio = _block_ratio(z1, logs)
    mass_ratio = _block_ratio(z1, masses)
    if log_ratio > max_block_ratio:
        return reject("log_series", True, len(ov), logp, massp, block_ratio=log_ratio)
    if mass_ratio > max_block_ratio:
        return reject("mass_series", True, len(ov), logp, massp, block_ratio=mass_ratio)
    return AdmissibilityReport(True, len(ov), logp, massp, "accept", None,
                               {"log_block_ratio": log_ratio, "mass_block_ratio": mass_ratio})


# --------------------------------------------------------------- forward

def forward_system(v: Potential, alpha: float, levels: list[L0Eigenpair],
                   coeffs: np.ndarray | None = None) -> RankOneSystem:
    z = np.array([p.z for p in levels])
    c = l0_coefficients(v, levels) if coeffs is None else np.asarray(coeffs, dtype=complex)
    return RankOneSystem(z, c, alpha)


def forward_spectra(v: Potential, alpha: float, cfg: L0Config,
                    levels: list[L0Eigenpair] | None = None,
                    coeffs: np.ndarray | None = None) -> tuple[SpectrumFile, SpectrumFile]:
    """(sigma(L0), sigma(L_alpha)) truncated to the 2 k_max levels of cfg."""
    levels = levels or l0_levels(cfg)
    sys = forward_system(v, alpha, levels, coeffs)
    s0 = SpectrumFile.from_levels(levels, cfg.l)
    if alpha == 0:
        return s0, SpectrumFile(s0.eigenvalues.copy(), s0.multiplicities.copy(), cfg.l, s0.N)
    ev, mult = perturbed_spectrum(sys)
    return s0, SpectrumFile(ev, mult, cfg.l, s0.N)


def four_spectra(v: Potential, alpha: float, cfg: L0Config,
                 levels: list[L0Eigenpair] | None = None):
    """Spectra of L0 and of L_alpha for v, v + g and v + i g (g = l - x)."""
    levels = levels or l0_levels(cfg)
    cv = l0_coefficients(v, levels)
    cg = np.array([fourier_g(cfg, p) for p in levels])
    out = [forward_spectra(v, alpha, cfg, levels, cv)[0]]
    for c in (cv, cv + cg, cv + 1j * cg):
        out.append(forward_spectra(v, alpha, cfg, levels, c)[1])
    return tuple(out)


def window_spectra(sigma0: SpectrumFile, sigma_alpha: SpectrumFile, k_max: int):
    """Restrict spectra to the 2 k_max innermost L0 levels and the perturbed
    eigenvalues of the same rank, mimicking a finite measurement window."""
    z = sigma0.expanded
    ev = sigma_alpha.expanded
    if z.size != ev.size:
        raise SpectralDataError("spectra of different length")
    keep = np.argsort(np.abs(z))[: 2 * k_max]
    lo, hi = int(keep.min()), int(keep.max()) + 1
    n = hi - lo
    return (SpectrumFile.from_values(z[lo:hi], sigma0.l, n, sigma0.provenance),
            SpectrumFile.from_values(ev[lo:hi], sigma_alpha.l, n, sigma_alpha.provenance))
