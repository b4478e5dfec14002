"""Command-line interface.

Four subcommands:

* ``estimate`` -- run the slow-time certified estimator, write the
  trajectory table and a JSON sidecar;
* ``direct``   -- run the fast-time comparison integration;
* ``compare``  -- run both, write the merged envelope table, the bound
  report and the timing ratio;
* ``verify``   -- run the validation suite for an example.

Runs are selected either by a figure preset (``--figure 1a``), by explicit
parameters (``--example vdp --i0 4 --eps 1e-2 --u 10``), or by a config file
(``--config run.cfg``).  Exit codes: 0 ok, 1 usage/config error, 2 domain
violation, 3 time budget exceeded.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from . import export
from .direct import DirectTrajectory, envelope, run_direct
from .estimator import (ContractionWindow, EstimatorStatus, EstimatorTrajectory,
                        analytic_crosscheck, run_averaged, run_estimator)
from .examples import ExampleDefinition, figure_ids, figure_preset, make_example
from .model import SystemSpec
from .ode import Status
from .validation import (verify_bound_domination, verify_headline_bound,
                         verify_identities, verify_integral_identity)

__all__ = ["main", "load_user_system", "ConfigError"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DOMAIN = 2
EXIT_BUDGET = 3

_PARAM_KEYS = {"kappa": "kappa", "mu": "mu", "l1": "lambda1", "l2": "lambda2",
               "lambda1": "lambda1", "lambda2": "lambda2"}


class ConfigError(ValueError):
    """A configuration file or flag combination is invalid."""


@dataclass
class RunConfig:
    """A fully resolved run: system definition plus numeric settings."""

    example: ExampleDefinition
    label: str
    i0: np.ndarray
    eps: float
    u: float
    theta0: float = 0.0
    rtol: float = 1e-9
    atol: float = 1e-12
    budget: Optional[float] = 240.0
    window: Optional[ContractionWindow] = None
    env_window: Optional[float] = None
    out: Optional[str] = None
    fmt: str = "csv"

    def system(self) -> SystemSpec:
        return self.example.make_system(self.i0, self.eps, self.theta0)


# ---------------------------------------------------------------------------
# Config resolution


def _parse_i0(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise ConfigError(f"cannot parse i0 {text!r}: {exc}") from None


def _parse_window(text: str) -> ContractionWindow:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError('--window expects "lstar,sigma,M"')
    try:
        lstar, sigma, m = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"cannot parse window {text!r}: {exc}") from None
    return ContractionWindow(ell_star=lstar, sigma=sigma, slope_bound=m)


def load_user_system(path) -> RunConfig:
    """Resolve a ``key = value`` config file into a run configuration.

    The file selects either a built-in figure preset (``figure = 2d``) or a
    registered system by name (``system = vdp``) with explicit parameters.
    Lines starting with ``#`` are comments.  Unknown keys, missing required
    values and invalid parameters raise :class:`ConfigError` with the
    offending line.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None

    values: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        val = val.strip()
        if not key or not val:
            raise ConfigError(f"{path}:{no}: empty key or value")
        if key in values:
            raise ConfigError(f"{path}:{no}: duplicate key {key!r}")
        values[key] = val
        lines[key] = no
    if not values:
        raise ConfigError(f"{path}: empty config file")

    known = {"figure", "system", "example", "i0", "theta0", "eps", "u",
             "rtol", "atol", "budget", "out", "format", "window",
             "env_window"} | set(_PARAM_KEYS)
    for key in values:
        if key not in known:
            raise ConfigError(f"{path}:{lines[key]}: unknown key {key!r}")

    def fval(key, default=None):
        if key not in values:
            return default
        try:
            return float(values[key])
        except ValueError:
            raise ConfigError(
                f"{path}:{lines[key]}: {key} must be a number, "
                f"got {values[key]!r}") from None

    if "figure" in values:
        clash = {"system", "example", "i0", "eps", "u"} & set(values)
        if clash:
            raise ConfigError(f"{path}: figure preset conflicts with keys {sorted(clash)}")
        example, preset = _resolve_figure(values["figure"])
        cfg = RunConfig(example=example, label=f"figure-{preset.figure}",
                        i0=np.array(preset.i0), eps=preset.eps, u=preset.u,
                        theta0=preset.theta0)
    else:
        name = values.get("system") or values.get("example")
        if not name:
            raise ConfigError(f"{path}: config must set 'figure' or 'system'")
        params = {_PARAM_KEYS[k]: fval(k) for k in values if k in _PARAM_KEYS}
        try:
            example = make_example(name, params)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for key in ("i0", "eps", "u"):
            if key not in values:
                raise ConfigError(f"{path}: missing required key {key!r}")
        cfg = RunConfig(example=example, label=name, i0=_parse_i0(values["i0"]),
                        eps=fval("eps"), u=fval("u"), theta0=fval("theta0", 0.0))

    _apply_numeric(cfg, fval)
    if "window" in values:
        cfg.window = _parse_window(values["window"])
    if "out" in values:
        cfg.out = values["out"]
    if "format" in values:
        cfg.fmt = values["format"]
    _validate(cfg, where=str(path))
    return cfg


def _apply_numeric(cfg: RunConfig, fval) -> None:
    cfg.rtol = fval("rtol", cfg.rtol)
    cfg.atol = fval("atol", cfg.atol)
    cfg.budget = fval("budget", cfg.budget)
    cfg.env_window = fval("env_window", cfg.env_window)


def _validate(cfg: RunConfig, where: str = "arguments") -> None:
    if not cfg.eps > 0:
        raise ConfigError(f"{where}: eps must be positive")
    if not cfg.u > 0:
        raise ConfigError(f"{where}: U must be positive")
    if not (cfg.rtol > 0 and cfg.atol > 0):
        raise ConfigError(f"{where}: tolerances must be positive")
    if cfg.i0.shape != (cfg.example.d,):
        raise ConfigError(
            f"{where}: i0 must have {cfg.example.d} component(s), "
            f"got {cfg.i0.size}")
    if cfg.fmt not in ("csv", "json"):
        raise ConfigError(f"{where}: format must be csv or json")


def _resolve_figure(figure: str):
    try:
        return figure_preset(figure)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Build a :class:`RunConfig` from parsed command-line flags."""
    if args.config:
        if args.figure or args.example:
            raise ConfigError("--config excludes --figure/--example")
        cfg = load_user_system(args.config)
    elif args.figure:
        explicit = [n for n in ("i0", "theta0", "eps", "u", "kappa", "mu",
                                "l1", "l2")
                    if getattr(args, n, None) is not None]
        if args.example or explicit:
            raise ConfigError(
                f"--figure is a complete preset; drop --example/{explicit}")
        example, preset = _resolve_figure(args.figure)
        cfg = RunConfig(example=example, label=f"figure-{preset.figure}",
                        i0=np.array(preset.i0), eps=preset.eps, u=preset.u,
                        theta0=preset.theta0)
    elif args.example:
        params = {}
        for flag in ("kappa", "mu", "l1", "l2"):
            val = getattr(args, flag, None)
            if val is not None:
                params[_PARAM_KEYS[flag]] = val
        if args.example == "action-freq" and "kappa" in params:
            params["kappa"] = int(params["kappa"])
        try:
            example = make_example(args.example, params)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        defaults = _verify_defaults(example) if args.command == "verify" else {}
        i0 = args.i0 if args.i0 is not None else defaults.get("i0")
        eps = args.eps if args.eps is not None else defaults.get("eps")
        u = args.u if args.u is not None else defaults.get("u")
        missing = [n for n, v in (("--i0", i0), ("--eps", eps), ("--u", u))
                   if v is None]
        if missing:
            raise ConfigError(f"missing {' '.join(missing)} for --example runs")
        cfg = RunConfig(example=example, label=args.example,
                        i0=_parse_i0(i0) if isinstance(i0, str) else np.asarray(i0, float),
                        eps=float(eps), u=float(u),
                        theta0=args.theta0 or 0.0)
    else:
        raise ConfigError("select a run with --figure, --example or --config")

    if args.rtol is not None:
        cfg.rtol = args.rtol
    if args.atol is not None:
        cfg.atol = args.atol
    if args.budget is not None:
        cfg.budget = args.budget
    if getattr(args, "env_window", None) is not None:
        cfg.env_window = args.env_window
    if args.window:
        cfg.window = _parse_window(args.window)
    if args.out:
        cfg.out = args.out
    if args.format:
        cfg.fmt = args.format
    _validate(cfg)
    return cfg


def _verify_defaults(example: ExampleDefinition) -> Dict:
    presets = example.presets()
    i0 = presets[0].i0 if presets else tuple(example.sample_box[1] * 0.5)
    return {"i0": np.array(i0), "eps": 1e-2, "u": 1.0}


# ---------------------------------------------------------------------------
# Table builders


def _estimate_columns(d: int):
    cols = ["tau"]
    cols += [f"J_{i + 1}" for i in range(d)]
    cols += [f"R_{i + 1}{j + 1}" for i in range(d) for j in range(d)]
    cols += [f"K_{i + 1}" for i in range(d)]
    cols += ["m", "n"]
    return cols


def _estimator_table(est: EstimatorTrajectory) -> np.ndarray:
    return est.report_grid()


def _direct_table(dtraj: DirectTrajectory) -> np.ndarray:
    t = dtraj.t
    l = dtraj.l
    table = np.column_stack([
        t,
        dtraj.eps * t,
        l,
        dtraj.abs_l,
        np.mod(dtraj.theta, 2 * np.pi),
    ])
    return table


def _out_path(cfg: RunConfig, command: str) -> Path:
    if cfg.out:
        return Path(cfg.out)
    suffix = "json" if command == "verify" else cfg.fmt
    return Path(f"averbound_{command}_{cfg.label}.{suffix}")


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".meta.json") if path.suffix == ".json" \
        else path.with_suffix(".json")


def _estimator_exit(est: EstimatorTrajectory) -> int:
    if est.status is EstimatorStatus.COMPLETED:
        return EXIT_OK
    if est.status is EstimatorStatus.DOMAIN_VIOLATION:
        return EXIT_DOMAIN
    return EXIT_ERROR


def _direct_exit(dtraj: DirectTrajectory) -> int:
    if dtraj.budget_exceeded:
        return EXIT_BUDGET
    if dtraj.status is Status.COMPLETED:
        return EXIT_OK
    if dtraj.status is Status.STOPPED:
        return EXIT_DOMAIN
    return EXIT_ERROR


# ---------------------------------------------------------------------------
# Commands


def cmd_estimate(cfg: RunConfig) -> int:
    spec = cfg.system()
    est = run_estimator(spec, cfg.example.aux, cfg.example.bounds, cfg.u,
                        window=cfg.window, rtol=cfg.rtol, atol=cfg.atol)
    out = _out_path(cfg, "estimate")
    export.write_table(out, _estimate_columns(spec.d), _estimator_table(est),
                       cfg.fmt)
    export.write_json(_sidecar_path(out), {
        "ell0": est.ell0,
        "status": est.status.value,
        "violation_kind": est.violation_kind.value if est.violation_kind else None,
        "wall_time_s": est.wall_time_s,
        "window_mode": est.window_mode,
        "tau_final": est.tau_final,
    })
    print(f"estimate [{cfg.label}] status={est.status.value} "
          f"ell0={est.ell0:.9g} tau_final={est.tau_final:.6g} -> {out}")
    return _estimator_exit(est)


def _run_direct_pipeline(cfg: RunConfig):
    """Slow averaged solve (tolerances tightened tenfold) plus the fast run."""
    spec = cfg.system()
    start = time.perf_counter()
    avg = run_averaged(spec, cfg.example.aux, cfg.u,
                       rtol=cfg.rtol / 10.0, atol=cfg.atol / 10.0)
    if avg.status is not Status.COMPLETED:
        raise RuntimeError("averaged actions left the domain before U")
    dtraj = run_direct(spec, cfg.example.aux, avg, cfg.u, rtol=cfg.rtol,
                       atol=cfg.atol, time_budget=cfg.budget)
    return spec, dtraj, time.perf_counter() - start


def cmd_direct(cfg: RunConfig) -> int:
    spec, dtraj, elapsed = _run_direct_pipeline(cfg)
    out = _out_path(cfg, "direct")
    cols = (["t", "tau"] + [f"L_{i + 1}" for i in range(spec.d)]
            + ["absL", "theta_mod_2pi"])
    export.write_table(out, cols, _direct_table(dtraj), cfg.fmt)
    export.write_json(_sidecar_path(out), {
        "status": dtraj.status.value,
        "budget_exceeded": dtraj.budget_exceeded,
        "wall_time_s": elapsed,
        "t_final": float(dtraj.t[-1]),
    })
    print(f"direct [{cfg.label}] status={dtraj.status.value} "
          f"budget_exceeded={dtraj.budget_exceeded} "
          f"t_final={dtraj.t[-1]:.6g} -> {out}")
    return _direct_exit(dtraj)


def cmd_compare(cfg: RunConfig) -> int:
    spec = cfg.system()
    t0 = time.perf_counter()
    est = run_estimator(spec, cfg.example.aux, cfg.example.bounds, cfg.u,
                        window=cfg.window, rtol=cfg.rtol, atol=cfg.atol)
    t_estimate = time.perf_counter() - t0
    if est.status is not EstimatorStatus.COMPLETED:
        print(f"compare [{cfg.label}] estimator stopped early: "
              f"{est.status.value} ({est.violation_kind})")
        return _estimator_exit(est)

    _, dtraj, t_direct = _run_direct_pipeline(cfg)

    win = cfg.env_window if cfg.env_window else cfg.u / 50.0
    report = verify_headline_bound(est, dtraj, window=win)
    env = envelope(dtraj, win)
    rows = np.array([[tau, est.sample_n(tau), peak] for tau, peak in env])

    out = _out_path(cfg, "compare")
    export.write_table(out, ["tau", "n", "envelope_absL"], rows, cfg.fmt)
    export.write_json(_sidecar_path(out), {
        "headline": report.to_dict(),
        "ell0": est.ell0,
        "estimator_status": est.status.value,
        "direct_status": dtraj.status.value,
        "budget_exceeded": dtraj.budget_exceeded,
        "wall_time_estimate_s": t_estimate,
        "wall_time_direct_s": t_direct,
        "time_ratio": t_estimate / t_direct if t_direct > 0 else None,
    })
    tight = report.details["tightness"]
    print(f"compare [{cfg.label}] violations={report.violations} "
          f"tightness={tight:.3f} T_estimate={t_estimate:.3g}s "
          f"T_direct={t_direct:.3g}s ratio={t_estimate / t_direct:.3g} -> {out}")
    if dtraj.budget_exceeded:
        return EXIT_BUDGET
    return EXIT_OK if report.passed else EXIT_ERROR


def cmd_verify(cfg: RunConfig) -> int:
    spec = cfg.system()
    example = cfg.example
    reports = []

    reports.append(verify_identities(spec, example.aux, example.sample_box))

    est = run_estimator(spec, example.aux, example.bounds, cfg.u,
                        window=cfg.window, rtol=cfg.rtol, atol=cfg.atol)
    reports.append(verify_bound_domination(spec, example.aux, example.bounds, est))

    crosscheck = None
    if example.closed_j is not None:
        res = analytic_crosscheck(example, est)
        crosscheck = {
            "name": "analytic-crosscheck",
            "max_j": res.max_j, "max_r": res.max_r, "max_k": res.max_k,
            "tolerance": 1e-8,
            "passed": bool(res.max_residual < 1e-8),
        }

    _, dtraj, _ = _run_direct_pipeline(cfg)
    base = verify_integral_identity(spec, example.aux, est, dtraj)
    fine = verify_integral_identity(spec, example.aux, est, dtraj,
                                    n_quad=2 * base.details["n_quad"])
    base.details["refined_residual"] = fine.max_residual
    base.details["refinement_ratio"] = (
        base.max_residual / fine.max_residual if fine.max_residual else None)
    reports.append(base)

    payload = {"example": example.id, "params": dict(example.params),
               "i0": cfg.i0.tolist(), "eps": cfg.eps, "u": cfg.u,
               "estimator_status": est.status.value,
               "checks": [r.to_dict() for r in reports]}
    if crosscheck:
        payload["checks"].append(crosscheck)

    out = _out_path(cfg, "verify")
    export.write_json(out, payload)
    ok = all(c["passed"] for c in payload["checks"])
    for c in payload["checks"]:
        print(f"verify [{cfg.label}] {c['name']}: "
              f"{'pass' if c['passed'] else 'FAIL'}")
    print(f"verify [{cfg.label}] -> {out}")
    return EXIT_OK if ok else EXIT_ERROR


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="averbound",
        description="Certified error bounds for one-frequency averaging.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("estimate", "run the slow-time certified estimator"),
                      ("direct", "run the fast-time comparison integration"),
                      ("compare", "run both and compare bound vs envelope"),
                      ("verify", "run the validation suite for an example")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--figure", help=f"preset label ({', '.join(figure_ids())})")
        p.add_argument("--example", help="system name (vdp, action-freq, "
                                         "resonant, euler-top, or registered)")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--i0", help="initial actions, comma-separated")
        p.add_argument("--theta0", type=float, help="initial angle (default 0)")
        p.add_argument("--eps", type=float, help="perturbation size")
        p.add_argument("--u", type=float, help="slow-time horizon U")
        p.add_argument("--kappa", type=float, help="action-freq sign (+1/-1)")
        p.add_argument("--mu", type=float, help="euler-top damping asymmetry")
        p.add_argument("--l1", type=float, help="euler-top first decay rate")
        p.add_argument("--l2", type=float, help="euler-top second decay rate")
        p.add_argument("--rtol", type=float, help="relative tolerance (1e-9)")
        p.add_argument("--atol", type=float, help="absolute tolerance (1e-12)")
        p.add_argument("--budget", type=float, help="direct-run wall budget, s")
        p.add_argument("--window", help='fixed-point window "lstar,sigma,M"')
        p.add_argument("--env-window", dest="env_window", type=float,
                       help="envelope window width in slow time (U/50)")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=("csv", "json"),
                       help="table format (csv)")
    return parser


_COMMANDS = {"estimate": cmd_estimate, "direct": cmd_direct,
             "compare": cmd_compare, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
