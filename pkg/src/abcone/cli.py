"""Command-line front end.

Every run emits one record per row, either as newline-delimited JSON
objects ``{"inputs": ..., "outputs": ..., "warnings": [...]}`` or as CSV
with the input columns first, then the output columns, then ``warnings``.
Floats are written with 17 significant digits so identical runs give
byte-identical output.  Non-finite values become null plus a warning.

Exit codes: 0 ok, 1 computation error in at least one row, 2 malformed
arguments, 3 physically invalid parameter values.
"""
from __future__ import annotations

import argparse
import cmath
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bound import ExtensionParam, energy_bg, energy_ks, energy_ks_oracle, extension_param
from .channel import ChannelParams, bound_existence, classify, effective_channel, modified_channels
from .errors import AbconeError, NoBoundState
from .oscillator import (HoParams, extension_param_ho, ho_limit_spectrum, lambda_ratio, solve_ho_bg,
                         solve_ho_ks)
from .scatter import (AmplitudeRequest, ab_phase, amplitude, physical_extension_map, scatter_record)

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
COMMANDS = ("channels", "bound", "scatter", "amplitude", "ho", "verify")
SWEEP_VARS = ("alpha", "phi", "mass", "r0", "omega", "k", "theta")

INPUT_COLUMNS = {
    "channels": ("alpha", "phi", "spin"),
    "bound": ("alpha", "phi", "spin", "m", "mass", "r0", "lambda_mode"),
    "scatter": ("alpha", "phi", "spin", "m", "k", "r0", "lambda_mode"),
    "amplitude": ("alpha", "phi", "spin", "k", "theta", "r0", "lambda_mode", "m_max", "smoothing"),
    "ho": ("alpha", "phi", "spin", "m", "mass", "r0", "omega", "lambda_mode"),
    "verify": (),
}
OUTPUT_COLUMNS = {
    "channels": ("m", "j", "nu", "g", "scenario", "bound_state"),
    "bound": ("j", "nu", "g", "lambda", "energy_ks", "energy_bg", "energy_oracle", "agreement"),
    "scatter": ("j", "nu", "lambda", "mu", "delta", "delta_ab", "s_re", "s_im", "pole_at_k"),
    "amplitude": ("re_f", "im_f", "dsigma"),
    "ho": ("n", "energy", "energy_over_omega", "branch", "regular_limit", "irregular_limit",
           "lambda_ho", "lambda_ratio", "energy_pure_ab"),
    "verify": ("number", "name", "passed", "detail", "elapsed"),
}

EPILOG = "CSV column order (inputs, outputs, warnings):\n" + "\n".join(
    f"  {c}: {', '.join(INPUT_COLUMNS[c] + OUTPUT_COLUMNS[c] + ('warnings',))}" for c in COMMANDS)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Sweep:
    var: str
    lo: float
    hi: float
    points: int
    scale: str

    def values(self) -> list[float]:
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.lo, self.hi, self.points)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.points)]


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float = 1.0
    phi: float = 0.0
    spin: int = 1
    m: Optional[int] = None
    mass: float = 1.0
    r0: float = 1.0
    omega: float = 1.0
    k: float = 1.0
    theta: Optional[float] = None
    lambda_mode: str = "physical"
    sweep: Optional[Sweep] = None
    fmt: str = "json"
    out: Optional[str] = None
    levels: int = 5
    m_max: int = 2000
    smoothing: float = 1.0 - 1e-4


# --- parsing -----------------------------------------------------------------

def _parse_sweep(text: str) -> Sweep:
    parts = text.split(":")
    if len(parts) != 5:
        raise CliError(f"--sweep wants var:min:max:points:lin|log, got {text!r}", EXIT_USAGE)
    var, lo, hi, pts, scale = parts
    if var not in SWEEP_VARS:
        raise CliError(f"cannot sweep {var!r}; choose from {', '.join(SWEEP_VARS)}", EXIT_USAGE)
    if scale not in ("lin", "log"):
        raise CliError(f"sweep scale must be lin or log, got {scale!r}", EXIT_USAGE)
    try:
        lo_f, hi_f, n = float(lo), float(hi), int(pts)
    except ValueError:
        raise CliError(f"malformed sweep numbers in {text!r}", EXIT_USAGE) from None
    if n < 2:
        raise CliError("a sweep needs at least 2 points", EXIT_USAGE)
    if not (math.isfinite(lo_f) and math.isfinite(hi_f)):
        raise CliError("sweep bounds must be finite", EXIT_USAGE)
    if scale == "log" and (lo_f <= 0.0 or hi_f <= 0.0):
        raise CliError("log sweeps need positive bounds", EXIT_USAGE)
    return Sweep(var, lo_f, hi_f, n, scale)


def _parse_lambda_mode(text: str) -> str:
    if text in ("physical", "dirichlet", "infinite"):
        return text
    if text.startswith("manual:"):
        try:
            v = float(text[len("manual:"):])
        except ValueError:
            raise CliError(f"malformed manual lambda {text!r}", EXIT_USAGE) from None
        if not math.isfinite(v):
            raise CliError("manual lambda must be finite; use --lambda-mode infinite", EXIT_DOMAIN)
        return text
    raise CliError(f"unknown --lambda-mode {text!r}", EXIT_USAGE)


def _check_domain(cfg: RunConfig):
    def bad(msg):
        raise CliError(msg, EXIT_DOMAIN)

    if not (0.0 < cfg.alpha <= 1.0):
        bad(f"alpha must lie in (0, 1], got {cfg.alpha!r}")
    if cfg.spin not in (-1, 1):
        bad(f"spin must be +1 or -1, got {cfg.spin!r}")
    for name in ("mass", "r0", "omega", "k"):
        v = getattr(cfg, name)
        if not (v > 0.0 and math.isfinite(v)):
            bad(f"{name} must be positive and finite, got {v!r}")
    if not math.isfinite(cfg.phi):
        bad("phi must be finite")
    if not (0.0 < cfg.smoothing <= 1.0):
        bad(f"smoothing must lie in (0, 1], got {cfg.smoothing!r}")
    if cfg.levels < 1:
        bad("levels must be at least 1")
    if cfg.m_max < 1:
        bad("m-max must be at least 1")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abcone", description=__doc__.split("\n")[0], epilog=EPILOG,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--alpha", type=float, default=1.0, help="cone parameter in (0, 1]")
    ap.add_argument("--phi", type=float, default=0.0, help="flux in units of the flux quantum")
    ap.add_argument("--spin", type=float, default=1.0, help="twice the spin projection, +1 or -1")
    ap.add_argument("--m", type=int, default=None, help="orbital index")
    ap.add_argument("--mass", type=float, default=1.0)
    ap.add_argument("--r0", type=float, default=1.0, help="flux tube radius")
    ap.add_argument("--omega", type=float, default=1.0, help="oscillator frequency")
    ap.add_argument("--k", type=float, default=1.0, help="wavenumber")
    ap.add_argument("--theta", type=float, default=None, help="scattering angle in radians")
    ap.add_argument("--lambda-mode", default="physical",
                    help="physical | manual:<value> | dirichlet | infinite")
    ap.add_argument("--sweep", default=None, help="var:min:max:points:lin|log")
    ap.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    ap.add_argument("--out", default=None, help="output file (default stdout)")
    ap.add_argument("--levels", type=int, default=5, help="oscillator levels")
    ap.add_argument("--m-max", type=int, default=2000, help="partial-wave truncation")
    ap.add_argument("--smoothing", type=float, default=1.0 - 1e-4, help="Abel factor t")
    return ap


def parse_args(argv: list[str]) -> RunConfig:
    """Parse and validate; raises CliError carrying the exit code."""
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise CliError("malformed arguments", EXIT_USAGE) from None
    if ns.spin not in (-1.0, 1.0):
        raise CliError(f"spin must be +1 or -1, got {ns.spin!r}", EXIT_DOMAIN)
    cfg = RunConfig(command=ns.command, alpha=ns.alpha, phi=ns.phi, spin=int(ns.spin), m=ns.m,
                    mass=ns.mass, r0=ns.r0, omega=ns.omega, k=ns.k, theta=ns.theta,
                    lambda_mode=_parse_lambda_mode(ns.lambda_mode),
                    sweep=_parse_sweep(ns.sweep) if ns.sweep else None,
                    fmt=ns.fmt, out=ns.out, levels=ns.levels, m_max=ns.m_max, smoothing=ns.smoothing)
    if cfg.command in ("bound", "scatter", "ho") and cfg.m is None:
        raise CliError(f"{cfg.command} needs --m", EXIT_USAGE)
    _check_domain(cfg)
    if cfg.sweep is not None:
        for edge in (cfg.sweep.lo, cfg.sweep.hi):
            if cfg.sweep.var != "theta":
                _check_domain(replace(cfg, **{cfg.sweep.var: edge}))
    return cfg


# --- evaluation --------------------------------------------------------------

def _ext_for(cfg: RunConfig, p: ChannelParams) -> ExtensionParam:
    nu = effective_channel(p).nu
    mode = cfg.lambda_mode
    if mode == "physical":
        return extension_param(cfg.r0, p)
    if mode == "dirichlet":
        return ExtensionParam.dirichlet(nu)
    if mode == "infinite":
        return ExtensionParam.at_infinity(nu)
    return ExtensionParam.user(float(mode.split(":", 1)[1]), nu)


def _lam(ext: ExtensionParam) -> Optional[float]:
    return None if ext.infinite else ext.lam


def _inputs(cfg: RunConfig) -> dict:
    return {c: getattr(cfg, "spin" if c == "spin" else c) for c in INPUT_COLUMNS[cfg.command]}


def _record(cfg: RunConfig, outputs: dict, warnings: list[str]) -> dict:
    cols = OUTPUT_COLUMNS[cfg.command]
    return {"inputs": _inputs(cfg), "outputs": {c: outputs.get(c) for c in cols},
            "warnings": list(warnings)}


def _error_record(cfg: RunConfig, exc: Exception) -> dict:
    return _record(cfg, {}, [f"error: {type(exc).__name__}: {exc}"])


def _eval_channels(cfg: RunConfig) -> list[dict]:
    rows = []
    for m in modified_channels(cfg.alpha, cfg.phi):
        p = ChannelParams(cfg.alpha, cfg.phi, cfg.spin, m)
        ch = effective_channel(p)
        rows.append(_record(cfg, {"m": m, "j": ch.j, "nu": ch.nu, "g": ch.g,
                                  "scenario": classify(p).value, "bound_state": bound_existence(p)}, []))
    if not rows:
        rows.append(_record(cfg, {}, ["no modified channels"]))
    return rows


def _eval_bound(cfg: RunConfig) -> list[dict]:
    p = ChannelParams(cfg.alpha, cfg.phi, cfg.spin, cfg.m)
    ch = effective_channel(p)
    out = {"j": ch.j, "nu": ch.nu, "g": ch.g}
    warnings = []
    if not ch.modified:
        return [_record(cfg, out, ["regular channel: no extension parameter and no bound state"])]
    ext = _ext_for(cfg, p)
    out["lambda"] = _lam(ext)
    if ext.infinite:
        warnings.append("lambda is the infinite flag value")
    energies = []
    for key, fn in (("energy_ks", lambda: energy_ks(cfg.mass, cfg.r0, p)),
                    ("energy_bg", lambda: energy_bg(cfg.mass, ext, ch)),
                    ("energy_oracle", lambda: energy_ks_oracle(cfg.mass, cfg.r0, p))):
        if key == "energy_oracle" and "energy_ks" not in out:
            continue
        try:
            out[key] = fn().energy
            energies.append(out[key])
        except NoBoundState as exc:
            warnings.append(f"no-bound-state ({key}): {exc}")
    if "energy_ks" in out and "energy_oracle" in out:
        out["agreement"] = abs(out["energy_oracle"] - out["energy_ks"]) / abs(out["energy_ks"])
    return [_record(cfg, out, warnings)]


def _eval_scatter(cfg: RunConfig) -> list[dict]:
    p = ChannelParams(cfg.alpha, cfg.phi, cfg.spin, cfg.m)
    ch = effective_channel(p)
    d_ab = ab_phase(cfg.m, cfg.phi)
    if not ch.modified:
        s = cmath.exp(2j * d_ab)
        return [_record(cfg, {"j": ch.j, "nu": ch.nu, "mu": 0.0, "delta": d_ab, "delta_ab": d_ab,
                              "s_re": s.real, "s_im": s.imag, "pole_at_k": False},
                        ["regular channel: pure flux phase"])]
    ext = _ext_for(cfg, p)
    rec = scatter_record(ext, p, cfg.k)
    warnings = ["pole-at-k: mu diverges, delta continued"] if rec.pole_at_k else []
    return [_record(cfg, {"j": ch.j, "nu": ch.nu, "lambda": _lam(ext), "mu": rec.mu,
                          "delta": rec.delta, "delta_ab": d_ab, "s_re": rec.s_element.real,
                          "s_im": rec.s_element.imag, "pole_at_k": rec.pole_at_k}, warnings)]


def _eval_amplitude(cfg: RunConfig) -> list[dict]:
    if cfg.lambda_mode == "physical":
        ext_map = physical_extension_map(cfg.alpha, cfg.phi, cfg.spin, cfg.r0)
    else:
        ext_map = {m: _ext_for(cfg, ChannelParams(cfg.alpha, cfg.phi, cfg.spin, m))
                   for m in modified_channels(cfg.alpha, cfg.phi)}
    req = AmplitudeRequest(cfg.k, cfg.theta, m_max=cfg.m_max, smoothing=cfg.smoothing)
    res = amplitude(req, cfg.alpha, cfg.phi, cfg.spin, ext_map)
    f = res.value
    return [_record(cfg, {"re_f": f.real, "im_f": f.imag, "dsigma": abs(f) ** 2}, list(res.warnings))]


def _eval_ho(cfg: RunConfig) -> list[dict]:
    p = ChannelParams(cfg.alpha, cfg.phi, cfg.spin, cfg.m)
    h = HoParams(cfg.omega, cfg.mass, cfg.r0, p)
    nu = effective_channel(p).nu
    if cfg.lambda_mode == "physical":
        levels = solve_ho_ks(h, cfg.levels)
    else:
        levels = solve_ho_bg(h, _ext_for(cfg, p), cfg.levels)
    common, warnings = {}, []
    ho_ext = extension_param_ho(cfg.r0, p)
    common["lambda_ho"] = _lam(ho_ext)
    common["lambda_ratio"] = lambda_ratio(cfg.r0, p)
    try:
        common["energy_pure_ab"] = energy_ks(cfg.mass, cfg.r0, p).energy
    except NoBoundState:
        warnings.append("no pure flux-cone bound state in this channel")
    rows = []
    for lv in levels:
        out = dict(common, n=lv.n, energy=lv.energy, energy_over_omega=lv.energy_over_omega,
                   branch=lv.branch.value,
                   regular_limit=ho_limit_spectrum(lv.n, nu, cfg.omega, "+"),
                   irregular_limit=ho_limit_spectrum(lv.n, nu, cfg.omega, "-"))
        rows.append(_record(cfg, out, warnings))
    return rows


_EVALUATORS = {"channels": _eval_channels, "bound": _eval_bound, "scatter": _eval_scatter,
               "amplitude": _eval_amplitude, "ho": _eval_ho}


def evaluate_point(cfg: RunConfig) -> list[dict]:
    """Rows for one concrete configuration; errors become a nulled row."""
    try:
        rows = _EVALUATORS[cfg.command](cfg)
    except (AbconeError, ValueError, ArithmeticError) as exc:
        rows = [_error_record(cfg, exc)]
    for row in rows:
        for key, val in row["outputs"].items():
            if isinstance(val, float) and not math.isfinite(val):
                row["outputs"][key] = None
                row["warnings"].append(f"non-finite {key} reported as null")
    return rows


def expand_points(cfg: RunConfig) -> list[RunConfig]:
    if cfg.sweep is not None:
        return [replace(cfg, **{cfg.sweep.var: v}) for v in cfg.sweep.values()]
    if cfg.command == "amplitude" and cfg.theta is None:
        return [replace(cfg, theta=float(t)) for t in np.linspace(-math.pi, math.pi, 37)[1:]]
    return [cfg]


def _workers() -> int:
    env = os.environ.get("ABCONE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def evaluate_all(points: list[RunConfig]) -> list[list[dict]]:
    """Evaluate points, in parallel when allowed; results keep sweep order."""
    n = min(_workers(), len(points))
    if n <= 1:
        return [evaluate_point(p) for p in points]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(evaluate_point, points, chunksize=max(1, len(points) // (4 * n))))


def _run_verify(cfg: RunConfig) -> tuple[list[dict], bool]:
    from .verify import run_all
    rows, ok = [], True
    for r in run_all():
        ok &= r.passed
        rows.append(_record(cfg, {"number": r.number, "name": r.name, "passed": r.passed,
                                  "detail": r.detail, "elapsed": r.elapsed}, []))
        print(r.line(), file=sys.stderr)
    return rows, ok


# --- output ------------------------------------------------------------------

def fmt_float(x: float) -> str:
    return "%.17g" % x


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return json.dumps(str(v))


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else ""
    s = str(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def render(rows: list[dict], command: str, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "json":
        for r in rows:
            buf.write(_json_value(r) + "\n")
        return buf.getvalue()
    header = INPUT_COLUMNS[command] + OUTPUT_COLUMNS[command] + ("warnings",)
    buf.write(",".join(header) + "\n")
    for r in rows:
        vals = [r["inputs"][c] for c in INPUT_COLUMNS[command]]
        vals += [r["outputs"][c] for c in OUTPUT_COLUMNS[command]]
        vals.append("; ".join(r["warnings"]))
        buf.write(",".join(_csv_value(v) for v in vals) + "\n")
    return buf.getvalue()


def run(cfg: RunConfig) -> int:
    if cfg.command == "verify":
        rows, ok = _run_verify(cfg)
        code = EXIT_OK if ok else EXIT_COMPUTE
    else:
        rows = [row for chunk in evaluate_all(expand_points(cfg)) for row in chunk]
        failed = any(w.startswith("error:") for r in rows for w in r["warnings"])
        code = EXIT_COMPUTE if failed else EXIT_OK
    text = render(rows, cfg.command, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in rows:
        for w in r["warnings"]:
            if w.startswith("error:"):
                print(w, file=sys.stderr)
    return code


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except CliError as exc:
        print(f"abcone: {exc}", file=sys.stderr)
        return exc.code
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
