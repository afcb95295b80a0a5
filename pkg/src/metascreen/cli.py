"""Command-line driver: parse a key-value configuration, run one job, persist results.

Usage::

    python3 -m metascreen SUBCOMMAND --config run.cfg [--out DIR] [--svg FILE]

Subcommands are ``band``, ``spectrum``, ``resonances``, ``capacitance``,
``bic-check`` and ``green-check``.  Every run writes ``manifest.json`` into
the output directory next to its data files.  Exit codes: 0 ok, 1
configuration error, 2 numerical failure, 3 partial (see manifest).

Configuration files hold one ``key = value`` per line; ``#`` starts a
comment.  Angles accept a multiple of pi such as ``0.05pi``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import re
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from .geometry import Incidence, MetascreenConfig, validate

WORKERS_ENV = "METASCREEN_WORKERS"
SUBCOMMANDS = ("band", "spectrum", "resonances", "capacitance", "bic-check", "green-check")

REQUIRED = ("L", "R_D", "d", "theta", "delta", "v_b")
SCHEMA = {
    # metascreen
    "L": float, "R_D": float, "d": float, "theta": float, "delta": float, "v_b": float, "v": float,
    # incidence
    "alpha0": float,
    # numerics
    "N": int, "Q": int, "E": float, "tol": float,
    # job
    "omega_min": float, "omega_max": float, "n_omega": int, "refine": int,
    "alpha_min": float, "alpha_max": float, "n_alpha": int,
    "green_points": int, "seed": int, "output": str,
}
DEFAULTS = {
    "v": 1.0, "alpha0": 0.0, "N": 6, "Q": 60, "E": 5.0, "tol": 1e-10,
    "omega_min": 0.01, "omega_max": 1.2, "n_omega": 200, "refine": 40,
    "alpha_min": 0.1, "alpha_max": math.pi, "n_alpha": 60,
    "green_points": 100, "seed": 0, "output": "results",
}

_PI = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    metascreen: MetascreenConfig
    incidence: Incidence
    numerics: dict = field(default_factory=dict)
    job: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {"metascreen": asdict(self.metascreen), "alpha0": self.incidence.alpha0,
                "numerics": dict(self.numerics), "job": dict(self.job)}


def parse_number(text: str) -> float:
    """Float literal or a multiple of pi (``pi``, ``0.05pi``, ``2*pi/3``)."""
    m = _PI.match(text)
    if m:
        coef = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    return float(text)


def parse_text(text: str, overrides: dict | None = None) -> RunConfig:
    values, problems, seen = {}, [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            problems.append(f"line {lineno}: unknown key '{key}'")
            continue
        if key in seen:
            problems.append(f"line {lineno}: duplicate key '{key}' (first on line {seen[key]})")
            continue
        seen[key] = lineno
        try:
            kind = SCHEMA[key]
            values[key] = val if kind is str else (int(val) if kind is int else parse_number(val))
        except ValueError:
            problems.append(f"line {lineno}: cannot parse {key} = {val!r}")
    for key, val in (overrides or {}).items():
        if key not in SCHEMA:
            problems.append(f"unknown key '{key}'")
        else:
            values[key] = val
    for key in REQUIRED:
        if key not in values:
            problems.append(f"missing required key '{key}'")
    if problems:
        raise ConfigError(problems)
    merged = {**DEFAULTS, **values}
    cfg = MetascreenConfig(L=merged["L"], R_D=merged["R_D"], d=merged["d"], theta=merged["theta"],
                           delta=merged["delta"], v_b=merged["v_b"], v=merged["v"])
    problems = validate(cfg)
    try:
        inc = Incidence(merged["alpha0"])
    except ValueError as exc:
        problems.append(str(exc))
        inc = None
    if merged["N"] < 1:
        problems.append("N must be >= 1")
    if not 2 / cfg.L <= merged["E"] <= 8 / cfg.L:
        problems.append("E must lie in [2/L, 8/L]")
    if not 0 < merged["omega_min"] < merged["omega_max"]:
        problems.append("need 0 < omega_min < omega_max")
    if not merged["alpha_min"] < merged["alpha_max"]:
        problems.append("need alpha_min < alpha_max")
    for key in ("n_omega", "n_alpha", "green_points"):
        if merged[key] < 1:
            problems.append(f"{key} must be positive")
    if problems:
        raise ConfigError(problems)
    numerics = {k: merged[k] for k in ("N", "Q", "E", "tol")}
    job = {k: merged[k] for k in ("omega_min", "omega_max", "n_omega", "refine", "alpha_min",
                                  "alpha_max", "n_alpha", "green_points", "seed", "output")}
    return RunConfig(cfg, inc, numerics, job)


def parse_config(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    return parse_text(path.read_text(), overrides)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------
def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    v = float(v)
    return "nan" if not math.isfinite(v) else f"{v:.17g}"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_json(path: Path, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _cpair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def versions() -> dict:
    from . import __version__

    return {"metascreen": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


# ---------------------------------------------------------------------------
# jobs
# ---------------------------------------------------------------------------
def job_band(rc, out, svg):
    from .resonance import band_sweep

    j = rc.job
    grid = np.linspace(j["alpha_min"], j["alpha_max"], j["n_alpha"])
    pts = band_sweep(rc.metascreen, rc.metascreen.delta, grid, rc.numerics["N"], workers())
    rows = [(p.alpha, p.omega1, p.omega2, p.continuum_boundary) for p in pts]
    write_atomic(out / "band.csv", csv_text(("alpha", "omega1", "omega2", "continuum_boundary"), rows))
    status = [{"index": i, "alpha": p.alpha, "ok": p.ok, "regime": p.regime, "message": p.message}
              for i, p in enumerate(pts)]
    if svg:
        from .svg import line_plot

        a = [p.alpha for p in pts]
        write_atomic(Path(svg), line_plot([{"title": "band structure (real part)", "x": a, "series": [
            ("omega1", [p.omega1 for p in pts], False), ("omega2", [p.omega2 for p in pts], False),
            ("omega = |alpha|", [abs(x) for x in a], True)]}]))
    return ["band.csv"], status


def job_spectrum(rc, out, svg):
    from .scattering import spectrum_sweep

    j = rc.job
    grid = np.linspace(j["omega_min"], j["omega_max"], j["n_omega"])
    spec = spectrum_sweep(rc.metascreen, rc.incidence, rc.metascreen.delta, grid,
                          rc.numerics["N"], refine=j["refine"], workers=workers())
    header = ("omega", "T_num", "R_num", "T_asym", "R_asym", "re_t", "im_t", "re_r", "im_r", "residual")
    rows = [(r.omega, r.T_num, r.R_num, r.T_asym, r.R_asym, complex(r.t).real, complex(r.t).imag,
             complex(r.r).real, complex(r.r).imag, r.residual) for r in spec.rows]
    write_atomic(out / "spectrum.csv", csv_text(header, rows))
    status = [{"index": i, "omega": r.omega, "ok": r.ok, "message": r.message} for i, r in enumerate(spec.rows)]
    if svg:
        from .svg import line_plot

        w = spec.column("omega")
        write_atomic(Path(svg), line_plot([
            {"title": "transmittance", "x": w, "series": [("T numeric", spec.column("T_num"), True),
                                                          ("T asymptotic", spec.column("T_asym"), False)]},
            {"title": "reflectance", "x": w, "series": [("R numeric", spec.column("R_num"), True),
                                                        ("R asymptotic", spec.column("R_asym"), False)]},
        ]))
    return ["spectrum.csv"], status


def job_resonances(rc, out, svg):
    from .resonance import res0_asymptotic, resonances_slaved

    cfg, inc, N = rc.metascreen, rc.incidence, rc.numerics["N"]
    asym = res0_asymptotic(cfg, inc, cfg.delta)
    pair = resonances_slaved(cfg, inc, cfg.delta, N, tol=rc.numerics["tol"])
    report = {"omega1": _cpair(pair.omega1), "omega2": _cpair(pair.omega2), "method": pair.method,
              "iterations": list(pair.iterations),
              "residual": [None if math.isnan(r) else r for r in pair.residual],
              "notes": list(pair.notes),
              "asymptotic": {"omega1": _cpair(asym.omega1), "omega2": _cpair(asym.omega2)}}
    write_json(out / "resonances.json", report)
    return ["resonances.json"], []


def job_capacitance(rc, out, svg):
    from .capacitance import c1_matrix, periodic_data

    cfg, N = rc.metascreen, rc.numerics["N"]
    data = periodic_data(cfg, N)
    finer = periodic_data(cfg, N + 4)
    C1 = c1_matrix(cfg, rc.incidence, data=data)
    report = {"C11_0": data.C11_0, "c_par": data.c_par, "c_perp": data.c_perp,
              "C1_matrix": {"re": C1.real.tolist(), "im": C1.imag.tolist()}, "N": N,
              "convergence": {"N_ref": N + 4, "C11_0_diff": abs(finer.C11_0 - data.C11_0),
                              "c_par_diff": abs(finer.c_par - data.c_par),
                              "c_perp_diff": abs(finer.c_perp - data.c_perp)}}
    write_json(out / "capacitance.json", report)
    return ["capacitance.json"], []


def job_bic(rc, out, svg):
    from .scattering import bic_check

    rep = bic_check(rc.metascreen, rc.metascreen.delta, rc.numerics["N"])
    report = {"omega2": _cpair(rep.omega2),
              "checks": {"real_frequency": {"imag": rep.omega2.imag, "pass": bool(rep.imag_ok)},
                         "non_radiation": {"far_field": rep.far_field, "pass": bool(rep.far_field_ok)},
                         "non_excitation": {"max_deviation": rep.max_deviation,
                                            "bound": 5 * math.sqrt(rc.metascreen.delta),
                                            "pass": bool(rep.deviation_ok)},
                         "parity": {"error": rep.parity_error, "pass": bool(rep.parity_ok)}},
              "symmetry_breaking": {"theta": rep.scan_theta, "far_field": rep.scan_amplitude,
                                    "r2": rep.scan_r2, "pass": bool(rep.scan_ok)},
              "pass": bool(rep.passed)}
    write_json(out / "bic_check.json", report)
    if not rep.passed:
        raise NumericalFailure("bic-check: at least one check failed")
    return ["bic_check.json"], []


def job_green(rc, out, svg):
    from .lattice_green import green_cross_check

    res = green_cross_check(rc.job["green_points"], rc.job["seed"], rc.metascreen.L, rc.numerics["Q"])
    report = {"n_points": res.n_points, "max_rel_spectral_vs_ewald": res.max_rel_spectral_vs_ewald,
              "max_rel_quasiperiodicity": res.max_rel_quasiperiodicity, "pass": res.passed()}
    header = ("x1", "x2", "alpha", "k", "rel_spectral_vs_ewald", "rel_quasiperiodicity")
    write_atomic(out / "green_check.csv", csv_text(header, res.table))
    write_json(out / "green_check.json", report)
    if not res.passed():
        raise NumericalFailure("green-check: representations disagree")
    return ["green_check.csv", "green_check.json"], []


JOBS = {"band": job_band, "spectrum": job_spectrum, "resonances": job_resonances,
        "capacitance": job_capacitance, "bic-check": job_bic, "green-check": job_green}


class NumericalFailure(RuntimeError):
    pass


def run(subcommand: str, rc: RunConfig, out: Path | None = None, svg: str | None = None) -> int:
    """Run one job and write its manifest; returns the exit code."""
    out = Path(out if out is not None else rc.job["output"])
    manifest = {"subcommand": subcommand, "config": rc.echo(), "versions": versions(),
                "outputs": [], "points": [], "errors": []}
    code = 0
    try:
        files, status = JOBS[subcommand](rc, out, svg)
        manifest["outputs"] = files + ([str(svg)] if svg else [])
        manifest["points"] = status
        if any(not s["ok"] for s in status):
            code = 3
    except NumericalFailure as exc:
        manifest["errors"].append({"type": "NumericalFailure", "message": str(exc)})
        code = 2
    except Exception as exc:  # any other solver error is a numerical failure
        manifest["errors"].append({"type": type(exc).__name__, "message": str(exc)})
        code = 2
    manifest["status"] = {0: "ok", 2: "failed", 3: "partial"}[code]
    write_json(out / "manifest.json", manifest)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metascreen", description=__doc__.split("\n")[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--out", help="output directory (overrides the 'output' key)")
    p.add_argument("--svg", help="also render an SVG plot (band, spectrum)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = parse_config(args.config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 1
    code = run(args.subcommand, rc, args.out, args.svg)
    if code:
        print(f"{args.subcommand}: exit {code}, see manifest.json", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
