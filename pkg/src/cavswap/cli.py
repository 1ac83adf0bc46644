"""Command-line front end.

Every subcommand takes an optional JSON config and flag overrides; flags win.
Rates are plain numbers in the unit where ``kappa = 1`` unless ``kappa`` is
given explicitly.

Exit codes: 0 success, 2 configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import ParameterError, SystemParams
from .oracle import (
    DEFAULT_KAPPA_IN,
    DEFAULT_TAIL,
    GridRecurrenceError,
    OracleError,
    OracleGrid,
    ScatteringIncompleteError,
    oracle_packet,
    oracle_phase,
    oracle_transfer_check,
)
from .protocols import (
    bell_probability,
    entangle_frequencies,
    min_swap_fidelity,
    sweep_fig2,
    swap_frequencies,
)
from .scattering import phase_factor
from .spectra import QuadratureError, gaussian_spectrum

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3

PARAM_KEYS = ("k_c", "delta_e", "kappa", "gamma", "lambda_L", "lambda_R", "theta_L", "theta_R")
SHORTHAND_KEYS = ("lambda", "gamma", "delta_e", "kappa", "k_c")

DEFAULTS = {
    "phase": {"lambda": 10.0, "kin": 0.1},
    "swap": {"lambda": 10.0, "kin": 0.1},
    "entangle": {"lambda": 10.0, "kin": 0.1},
    "fig2": {"gamma": 0.5, "kin": 0.1},
    "oracle": {"lambda": 3.0, "kin": DEFAULT_KAPPA_IN},
}


class ConfigError(Exception):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(message)


@dataclass
class RunConfig:
    command: str
    params: SystemParams
    kappa_in: float
    x_0: float = 0.0
    options: dict = field(default_factory=dict)
    output: str | None = None
    fmt: str = "csv"


def _num(key: str, value: Any) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"{key} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(key, f"{key} must be finite")
    return out


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "config must be a JSON object")
    return data


def _params_from(cfg: dict, defaults: dict) -> SystemParams:
    explicit = cfg.get("params")
    if explicit is not None:
        if not isinstance(explicit, dict):
            raise ConfigError("params", "params must be an object")
        return SystemParams.from_dict(explicit)
    full = {k: cfg[k] for k in PARAM_KEYS if k in cfg}
    if any(k in full for k in ("lambda_L", "lambda_R", "theta_L", "theta_R")):
        if "lambda" in cfg:
            raise ConfigError("lambda", "give either lambda or lambda_L/lambda_R, not both")
        return SystemParams.from_dict(full)
    lam = _num("lambda", cfg.get("lambda", defaults.get("lambda", 0.0)))
    if lam < 0:
        raise ConfigError("lambda", "lambda must be non-negative")
    values = {k: _num(k, cfg[k]) for k in ("gamma", "delta_e", "kappa", "k_c") if k in cfg}
    # swap configuration: equal strengths, opposite dipole phases
    return SystemParams(lambda_L=lam, lambda_R=lam, theta_L=math.pi, theta_R=0.0, **values)


def build_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = _load_config(args.config)
    defaults = DEFAULTS[args.command]
    flag_map = {
        "lambda": args.lam,
        "gamma": args.gamma,
        "delta_e": args.delta_e,
        "kappa": args.kappa,
        "k_c": args.k_c,
    }
    for key, value in flag_map.items():
        if value is not None:
            cfg[key] = value
    if args.command == "fig2" and "gamma" not in cfg:
        cfg["gamma"] = defaults["gamma"]
    packet = cfg.get("packet", {})
    if not isinstance(packet, dict):
        raise ConfigError("packet", "packet must be an object")
    kin = args.kin if args.kin is not None else packet.get("kappa_in", cfg.get("kin", defaults["kin"]))
    kin = _num("kin", kin)
    if kin <= 0:
        raise ConfigError("kin", "kin must be positive")
    x_0 = _num("x_0", packet.get("x_0", 0.0))
    params = _params_from(cfg, defaults)
    fmt = args.format or cfg.get("format", "csv" if args.command in ("phase", "fig2", "oracle") else "json")
    if fmt not in ("csv", "json"):
        raise ConfigError("format", "format must be csv or json")
    options = {k: v for k, v in cfg.items() if k not in PARAM_KEYS + SHORTHAND_KEYS + ("params", "packet")}
    return RunConfig(args.command, params, kin, x_0, options, args.output or cfg.get("output"), fmt)


def _fmt(x: float) -> str:
    # + 0.0 turns -0.0 into 0.0
    return f"{x + 0.0:.17g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cx(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def cmd_phase(rc: RunConfig) -> int:
    p = rc.params
    kap = p.kappa
    k_min = _num("k_min", rc.options.get("k_min", p.k_c - 20 * kap))
    k_max = _num("k_max", rc.options.get("k_max", p.k_c + 20 * kap))
    n = int(_num("n_points", rc.options.get("n_points", 401)))
    if not k_max > k_min or n < 2:
        raise ConfigError("k_min", "phase grid needs k_min < k_max and n_points >= 2")
    k = np.linspace(k_min, k_max, n)
    e = np.asarray(phase_factor(k, p), dtype=complex)
    rows = [(kj, ej.real, ej.imag, abs(ej)) for kj, ej in zip(k, e)]
    if rc.fmt == "json":
        _emit(_json_text({"rows": [dict(zip(("k", "re", "im", "abs"), r)) for r in rows]}), rc.output)
    else:
        _emit(_csv_text(["k", "re_phase", "im_phase", "abs_phase"], rows), rc.output)
    return EXIT_OK


def cmd_swap(rc: RunConfig) -> int:
    p = rc.params
    roots = swap_frequencies(p)
    packet = gaussian_spectrum(p.k_c, rc.kappa_in, rc.x_0)
    fm = min_swap_fidelity(packet, p)
    warnings = []
    if roots.complex_pair_omitted:
        warnings.append("complex pair of roots omitted: 2 lambda^2 < kappa^2")
    report = {
        "roots": roots.roots,
        "roots_method": roots.method,
        "F_min": fm.value,
        "xi": _cx(fm.xi),
        "packet": {"k_peak": packet.k_peak, "kappa_in": packet.kappa_in, "x_0": packet.x_0},
        "params": p.to_dict(),
        "warnings": warnings,
    }
    _emit(_json_text(report), rc.output)
    return EXIT_OK


def cmd_entangle(rc: RunConfig) -> int:
    p = rc.params
    points = entangle_frequencies(p)
    packet = gaussian_spectrum(p.k_c + p.kappa, rc.kappa_in, rc.x_0)
    pb = bell_probability(packet, p)
    warnings = [] if len(points) == 2 else ["no balanced point in at least one bracket"]
    report = {
        "points": [
            {"k": pt.k, "theta": pt.theta, "detuning": pt.detuning, "balance_residual": pt.balance_residual}
            for pt in points
        ],
        "P": pb.value,
        "xi": _cx(pb.xi),
        "packet": {"k_peak": packet.k_peak, "kappa_in": packet.kappa_in, "x_0": packet.x_0},
        "params": p.to_dict(),
        "warnings": warnings,
    }
    _emit(_json_text(report), rc.output)
    return EXIT_OK


def _ratio_list(value) -> list:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if not isinstance(value, (list, tuple)):
        raise ConfigError("lambda_over_kappa", "lambda_over_kappa must be a list")
    return [_num("lambda_over_kappa", v) for v in value]


def cmd_fig2(rc: RunConfig) -> int:
    p = rc.params
    ratios = _ratio_list(rc.options.get("lambda_over_kappa", list(range(1, 11))))
    base = SystemParams(k_c=p.k_c, kappa=p.kappa)
    rows = sweep_fig2(ratios, p.gamma / p.kappa, rc.kappa_in / p.kappa, base)
    table = [(r.lambda_over_kappa, r.F_min, r.P) for r in rows]
    if rc.fmt == "json":
        _emit(_json_text({"rows": [dict(zip(("lambda_over_kappa", "F_min", "P"), t)) for t in table]}), rc.output)
    else:
        _emit(_csv_text(["lambda_over_kappa", "F_min", "P"], table), rc.output)
    return EXIT_OK


def cmd_oracle(rc: RunConfig) -> int:
    p = rc.params
    packet = oracle_packet(p.k_c, rc.kappa_in)
    grid_cfg = rc.options.get("grid", {})
    if not isinstance(grid_cfg, dict):
        raise ConfigError("grid", "grid must be an object")
    for key in ("half_span", "n_modes", "dt", "t_final"):
        if key in rc.options:
            grid_cfg = {**grid_cfg, key: rc.options[key]}
    half_span = _num("half_span", grid_cfg.get("half_span", 40.0))
    n_modes = int(_num("n_modes", grid_cfg.get("n_modes", 4001)))
    if half_span <= 0:
        raise ConfigError("half_span", "half_span must be positive")
    t_final = _num("t_final", grid_cfg.get("t_final", 2 * packet.x_0 + DEFAULT_TAIL / p.kappa))
    dt = _num("dt", grid_cfg["dt"]) if "dt" in grid_cfg else None
    grid = OracleGrid.centered(p.k_c, half_span * p.kappa, n_modes, t_final, dt)
    tol = _num("tolerance", rc.options.get("tolerance", 1e-3))
    phase = oracle_phase(p, grid, packet)
    transfer = oracle_transfer_check(p, grid, packet)
    max_err = max(phase.max_abs_error, transfer.max_deviation)
    summary = {
        "max_abs_error": max_err,
        "phase_max_abs_error": phase.max_abs_error,
        "transfer_max_deviation": transfer.max_deviation,
        "tolerance": tol,
        "passed": max_err <= tol,
        "grid": {"k_min": grid.k_min, "k_max": grid.k_max, "n_modes": grid.n_modes, "dt": grid.step,
                 "t_final": grid.t_final},
    }
    if rc.output:
        _emit(phase.to_csv(), rc.output)
        sys.stdout.write(_json_text(summary))
    else:
        sys.stdout.write(phase.to_csv())
        sys.stderr.write(_json_text(summary))
    if max_err > tol:
        sys.stderr.write(f"verification failed: max_abs_error {max_err:.3e} > tolerance {tol:.3e}\n")
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "phase": cmd_phase,
    "swap": cmd_swap,
    "entangle": cmd_entangle,
    "fig2": cmd_fig2,
    "oracle": cmd_oracle,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--lambda", dest="lam", type=float, help="coupling strength of both transitions")
    common.add_argument("--gamma", type=float, help="spontaneous decay rate")
    common.add_argument("--delta-e", dest="delta_e", type=float, help="atom-cavity detuning")
    common.add_argument("--kappa", type=float, help="cavity leakage rate (default 1)")
    common.add_argument("--k-c", dest="k_c", type=float, help="cavity resonance (default 0)")
    common.add_argument("--kin", type=float, help="spectral width of the photon packet")
    common.add_argument("--output", help="write the main output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="cavswap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    ph = sub.add_parser("phase", parents=[common], help="bright-state phase factor over a k grid")
    ph.add_argument("--k-min", dest="k_min", type=float)
    ph.add_argument("--k-max", dest="k_max", type=float)
    ph.add_argument("--n-points", dest="n_points", type=int)
    sub.add_parser("swap", parents=[common], help="swap frequencies and minimum swap fidelity")
    sub.add_parser("entangle", parents=[common], help="entangling frequencies and Bell probability")
    f2 = sub.add_parser("fig2", parents=[common], help="F_min and P against lambda/kappa")
    f2.add_argument("--lambda-over-kappa", dest="lambda_over_kappa", help="comma-separated ascending list")
    orc = sub.add_parser("oracle", parents=[common], help="time-domain check of the closed forms")
    orc.add_argument("--half-span", dest="half_span", type=float, help="grid half-width in units of kappa")
    orc.add_argument("--n-modes", dest="n_modes", type=int)
    orc.add_argument("--dt", type=float)
    orc.add_argument("--t-final", dest="t_final", type=float)
    orc.add_argument("--tolerance", type=float)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        rc = build_run_config(args)
        for key in ("k_min", "k_max", "n_points", "lambda_over_kappa", "half_span", "n_modes", "dt",
                    "t_final", "tolerance"):
            value = getattr(args, key, None)
            if value is not None:
                rc.options[key] = value
        return COMMANDS[rc.command](rc)
    except (ScatteringIncompleteError, GridRecurrenceError) as exc:
        sys.stderr.write(f"verification failed: {exc}\n")
        return EXIT_VERIFY
    except (ConfigError, ParameterError) as exc:
        sys.stderr.write(f"error: {exc.field}: {exc}\n")
        return EXIT_CONFIG
    except OracleError as exc:
        sys.stderr.write(f"error: grid: {exc}\n")
        return EXIT_CONFIG
    except QuadratureError as exc:
        sys.stderr.write(f"verification failed: {exc}\n")
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
