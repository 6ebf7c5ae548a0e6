"""Command-line front end.

    cubicstring spectrum-l0 --config job.json [--out FILE]
    cubicstring forward     --config job.json [--out FILE] [--plot-data FILE] [--four]
    cubicstring inverse {two,four} SPECTRA... [--config job.json] [--out FILE] [--force]
    cubicstring verify      [--suite NAME] [--seed INT]

Exit codes: 0 ok, 1 verification failure, 2 malformed input, 3 forward routes
disagree, 4 spectral data rejected as inadmissible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .inverse import (
    NormalizationDefectError,
    SpectralDataError,
    SpectrumFile,
    check_admissibility,
    forward_system,
    fourier_g,
    recover_masses,
    recover_potential,
)
from .parallel import worker_count
from .rankone import perturbed_spectrum, secular_Q
from .spectral_l0 import L0Config, char0, l0_levels
from .transforms import Potential, char_alpha, l0_coefficients
from .verify import run_suite

EXIT_OK, EXIT_SUITE, EXIT_CONFIG, EXIT_DISAGREE, EXIT_REJECT = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------- JSON

def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "null" if not math.isfinite(x) else format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: insertion-ordered keys, floats with 17 significant digits."""
    return _fmt(obj) + "\n"


# --------------------------------------------------------------- config

_TOP_KEYS = {"l", "alpha", "k_max", "quadrature", "tolerances", "potential", "seed"}
_TOL_KEYS = {"root", "agreement"}


@dataclass
class JobConfig:
    l: float = 1.0
    alpha: float = 0.0
    k_max: int = 10
    panels: int = 64
    order: int = 10
    root_tol: float = 1e-13
    agreement_tol: float = 1e-6
    potential: dict | None = None
    extra: dict = field(default_factory=dict)

    @property
    def l0(self) -> L0Config:
        return L0Config(self.l, self.k_max, self.root_tol, self.panels, self.order)


def _num(d, key, kind, default, positive=True):
    if key not in d:
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if kind is int:
        if int(val) != val:
            raise ConfigError(f"{key} must be an integer")
        val = int(val)
    else:
        val = float(val)
    if not math.isfinite(val) or (positive and val <= 0):
        raise ConfigError(f"{key} must be {'positive and ' if positive else ''}finite")
    return val


def parse_config(d: dict, need_potential: bool) -> JobConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    q = d.get("quadrature", {})
    t = d.get("tolerances", {})
    if not isinstance(q, dict) or not isinstance(t, dict):
        raise ConfigError("quadrature and tolerances must be objects")
    if set(t) - _TOL_KEYS:
        raise ConfigError(f"unknown tolerances: {sorted(set(t) - _TOL_KEYS)}")
    if set(q) - {"panels", "order"}:
        raise ConfigError(f"unknown quadrature keys: {sorted(set(q) - {'panels', 'order'})}")
    cfg = JobConfig(
        l=_num(d, "l", float, 1.0),
        alpha=_num(d, "alpha", float, 0.0, positive=False),
        k_max=_num(d, "k_max", int, 10),
        panels=_num(q, "panels", int, 64),
        order=_num(q, "order", int, 10),
        root_tol=_num(t, "root", float, 1e-13),
        agreement_tol=_num(t, "agreement", float, 1e-6),
        potential=d.get("potential"),
    )
    if cfg.order < 2:
        raise ConfigError("quadrature order must be at least 2")
    if need_potential and cfg.potential is None:
        raise ConfigError("config needs exactly one potential specification")
    if cfg.potential is not None:
        build_potential(cfg)  # validate early
    return cfg


def _floats(d, key):
    v = d.get(key)
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                          for x in v):
        raise ConfigError(f"potential field {key!r} must be a list of numbers")
    return np.asarray(v, dtype=float)


def build_potential(cfg: JobConfig) -> Potential:
    """Normalized potential from the config's potential specification."""
    p = cfg.potential
    if not isinstance(p, dict) or "type" not in p:
        raise ConfigError("potential must be an object with a 'type'")
    kind = p["type"]
    l = cfg.l
    grid = cfg.l0.grid
    try:
        if kind == "grid":
            x = _floats(p, "x")
            re = _floats(p, "re")
            im = _floats(p, "im") if "im" in p else np.zeros_like(re)
            if not (x.size == re.size == im.size):
                raise ConfigError("grid potential: x, re, im lengths differ")
            if abs(x[0]) > 1e-12 * l or abs(x[-1] - l) > 1e-12 * l:
                raise ConfigError("grid potential must span [0, l]")
            return Potential.from_samples(x, re + 1j * im, l, grid)
        if kind == "coeffs":
            entries = p.get("entries")
            if not isinstance(entries, list) or not entries:
                raise ConfigError("coeffs potential needs a non-empty 'entries' list")
            parsed = []
            for e in entries:
                k, eps = e.get("k"), e.get("eps")
                if not isinstance(k, int) or k < 1 or eps not in (1, -1):
                    raise ConfigError("each entry needs integer k >= 1 and eps = +1 or -1")
                parsed.append((k, eps, complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))))
            return Potential.from_coeffs(cfg.l0, parsed, grid)
        if kind == "constant":
            return Potential.from_function(lambda x: np.ones_like(x, dtype=complex), l, grid)
        if kind == "bump":
            c = float(p.get("center", 0.5)) * l
            w = float(p.get("width", 0.15)) * l
            if w <= 0:
                raise ConfigError("bump width must be positive")
            return Potential.from_function(lambda x: np.exp(-(((x - c) / w) ** 2)) + 0j, l, grid)
        if kind == "polynomial":
            re = _floats(p, "re")
            im = _floats(p, "im") if "im" in p else np.zeros_like(re)
            n = max(re.size, im.size)
            coef = np.pad(re, (0, n - re.size)) + 1j * np.pad(im, (0, n - im.size))
            return Potential.from_function(lambda x: np.polyval(coef[::-1], x / l), l, grid)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as e:
        raise ConfigError(f"bad potential: {e}") from None
    raise ConfigError(f"unknown potential type {kind!r}")


# ------------------------------------------------------------- commands

def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_spectrum_l0(cfg: JobConfig) -> dict:
    lv = l0_levels(cfg.l0)
    pos = sorted((p for p in lv if p.eps == 1), key=lambda p: p.k)
    s0 = SpectrumFile.from_levels(lv, cfg.l)
    out = s0.to_dict()
    out["k_max"] = cfg.k_max
    out["lambda"] = [p.lambda_k for p in pos]
    out["delta"] = [p.delta_k for p in pos]
    return out


def _test_lambdas(cfg: JobConfig, lv) -> np.ndarray:
    # real test points away from the poles lambda_k and within the range
    # where Delta(alpha, .) is evaluated without severe cancellation
    roots = np.array(sorted({p.lambda_k for p in lv}))
    top = min(roots[-1], 20.0 / cfg.l)
    cand = np.linspace(0.3 / cfg.l, top, 12)
    keep = [x for x in cand if np.min(np.abs(roots - x)) > 0.05 / cfg.l]
    return np.array(keep[:10])


def cmd_forward(cfg: JobConfig, plot_path: str | None = None, four: bool = False):
    v = build_potential(cfg)
    lv = l0_levels(cfg.l0)
    coeffs = l0_coefficients(v, lv)
    sys0 = forward_system(v, cfg.alpha, lv, coeffs)
    s0 = SpectrumFile.from_levels(lv, cfg.l)
    if cfg.alpha == 0:
        sa = SpectrumFile(s0.eigenvalues.copy(), s0.multiplicities.copy(), cfg.l, s0.N)
    else:
        ev, mult = perturbed_spectrum(sys0)
        sa = SpectrumFile(ev, mult, cfg.l, s0.N)
    lams = _test_lambdas(cfg, lv)
    diffs = []
    for lam in lams:
        q = secular_Q(sys0, float(lam**3))
        r = char_alpha(v, cfg.alpha, lam) / char0(cfg.l, lam)
        diffs.append(abs(q - r) / max(1.0, abs(r)))
    agreement = float(max(diffs)) if diffs else 0.0
    out = {
        "l": cfg.l,
        "alpha": cfg.alpha,
        "N": s0.N,
        "sigma0": s0.to_dict(),
        "sigma_alpha": sa.to_dict(),
        "agreement": {"metric": agreement, "tolerance": cfg.agreement_tol,
                      "test_lambdas": lams.tolist()},
        "coefficient_mass": float(np.sum(np.abs(coeffs) ** 2)),
    }
    if four:
        g = np.array([fourier_g(cfg.l0, p) for p in lv])
        for key, c in (("sigma_v_plus_g", coeffs + g), ("sigma_v_plus_ig", coeffs + 1j * g)):
            ev, mult = perturbed_spectrum(forward_system(v, cfg.alpha, lv, c))
            out[key] = SpectrumFile(ev, mult, cfg.l, s0.N).to_dict()
    plot = None
    if plot_path:
        top = min(max(p.lambda_k for p in lv) + math.pi / cfg.l, 20.0 / cfg.l)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "delta0", "delta_alpha"])
        for lam in np.linspace(0.0, top, 201):
            w.writerow([format(lam, ".17g"), format(char0(cfg.l, lam).real, ".17g"),
                        format(char_alpha(v, cfg.alpha, lam).real, ".17g")])
        plot = buf.getvalue()
    return out, agreement <= cfg.agreement_tol, plot


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from None


def _spectra_from_files(mode: str, paths: list[str]) -> list[SpectrumFile]:
    """Spectrum files in order sigma0, sigma_v[, sigma_v+g, sigma_v+ig]; a
    single forward output file holding all of them is accepted too."""
    need = 2 if mode == "two" else 4
    keys = ["sigma0", "sigma_alpha", "sigma_v_plus_g", "sigma_v_plus_ig"][:need]
    try:
        if len(paths) == 1:
            d = _load_json(paths[0])
            missing = [k for k in keys if k not in d]
            if missing:
                raise ConfigError(f"{paths[0]} lacks {missing}")
            return [SpectrumFile.from_dict(d[k]) for k in keys]
        if len(paths) != need:
            raise ConfigError(f"{mode}-spectra mode needs {need} spectrum files (or one forward file)")
        return [SpectrumFile.from_dict(_load_json(p)) for p in paths]
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None


def cmd_inverse(mode: str, spectra: list[SpectrumFile], cfg: JobConfig, force: bool):
    s0 = spectra[0]
    if any(abs(s.l - s0.l) > 1e-12 * s0.l for s in spectra):
        raise ConfigError("spectrum files disagree on l")
    reports = [check_admissibility(s0, s) for s in spectra[1:]]
    out = {"mode": mode, "l": s0.l, "N": s0.N,
           "admissibility": [_report_dict(r) for r in reports]}
    rejected = [r for r in reports if not r.accepted]
    if rejected and not force:
        out["error"] = f"inadmissible spectral data: {rejected[0].reason}"
        return out, EXIT_REJECT
    try:
        if mode == "two":
            res = recover_masses(s0, spectra[1])
            out.update(alpha=res.alpha, c_const=res.c_const, masses=res.masses.tolist(),
                       residuals=res.residuals)
            return out, EXIT_OK
        l0cfg = L0Config(s0.l, max(1, s0.expanded.size // 2), cfg.root_tol, cfg.panels, cfg.order)
        lv = l0_levels(l0cfg)
        res = recover_potential(*spectra, l0cfg, lv)
    except (SpectralDataError, NormalizationDefectError) as e:
        out["error"] = str(e)
        return out, EXIT_REJECT
    g = res.v_reconstructed.grid
    out.update(
        alpha=res.alpha, c_const=res.c_const, masses=res.masses.tolist(),
        v_coeffs=[{"k": p.k, "eps": p.eps, "re": c.real, "im": c.imag}
                  for p, c in zip(lv, res.v_coeffs) if c != 0],
        v_samples={"x": g.nodes.tolist(), "re": res.v_reconstructed.samples.real.tolist(),
                   "im": res.v_reconstructed.samples.imag.tolist()},
        residuals=res.residuals)
    if cfg.potential is not None:
        truth = build_potential(JobConfig(**{**cfg.__dict__, "l": s0.l})).on(g).samples
        out["l2_error"] = g.norm(res.v_reconstructed.samples - truth) / g.norm(truth)
    return out, EXIT_OK


def _report_dict(r) -> dict:
    return {"verdict": r.verdict, "reason": r.reason, "interlaces": r.interlaces,
            "sigma0_overlap_count": r.sigma0_overlap_count,
            "log_series_partial": r.log_series_partial,
            "mass_series_partial": r.mass_series_partial,
            "details": {k: (v if not isinstance(v, np.ndarray) else v.tolist())
                        for k, v in r.details.items()}}


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicstring", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required, help="job configuration (JSON)")
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized steps")

    common(sub.add_parser("spectrum-l0", help="spectrum of the unperturbed operator"), True)
    fw = sub.add_parser("forward", help="spectra of L0 and L_alpha for a potential")
    common(fw, True)
    fw.add_argument("--plot-data", help="CSV of Delta(0, lam) and Delta(alpha, lam)")
    fw.add_argument("--four", action="store_true",
                    help="also emit spectra for v + g and v + i g (g = l - x)")
    inv = sub.add_parser("inverse", help="recover alpha and v from spectra")
    common(inv, False)
    inv.add_argument("mode", choices=("two", "four"))
    inv.add_argument("spectra", nargs="+", help="spectrum files, or one forward output file")
    inv.add_argument("--force", action="store_true", help="invert even if data look inadmissible")
    ver = sub.add_parser("verify", help="run self-check suites")
    ver.add_argument("--suite", default="all", choices=("gtrig", "l0", "rankone", "inverse", "all"))
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        worker_count()
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "verify":
            checks = run_suite(args.suite, args.seed)
            ok = all(c.passed for c in checks)
            _emit(dumps({"suite": args.suite, "seed": args.seed, "passed": ok,
                         "checks": [c.to_dict() for c in checks]}), args.out)
            return EXIT_OK if ok else EXIT_SUITE

        raw = _load_json(args.config) if args.config else {}
        cfg = parse_config(raw, need_potential=args.command == "forward")
        if args.command == "spectrum-l0":
            _emit(dumps(cmd_spectrum_l0(cfg)), args.out)
            return EXIT_OK
        if args.command == "forward":
            out, agree, plot = cmd_forward(cfg, args.plot_data, args.four)
            _emit(dumps(out), args.out)
            if plot is not None:
                with open(args.plot_data, "w") as fh:
                    fh.write(plot)
            if not agree:
                print(f"error: secular and characteristic-function routes disagree "
                      f"({out['agreement']['metric']:.3g} > {cfg.agreement_tol:.3g})", file=sys.stderr)
                return EXIT_DISAGREE
            return EXIT_OK
        if args.command == "inverse":
            spectra = _spectra_from_files(args.mode, args.spectra)
            out, code = cmd_inverse(args.mode, spectra, cfg, args.force)
            _emit(dumps(out), args.out)
            if code != EXIT_OK:
                print(f"error: {out.get('error')}", file=sys.stderr)
            return code
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
