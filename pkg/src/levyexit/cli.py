"""Configuration-driven experiment runner.

Subcommands: theory | simulate | sweep | deviation | validate. Configs are
flat ``key = value`` text files (grammar in the README); every run writes a
manifest.json from which the run can be replayed byte for byte. Floats in
CSV output carry 17 significant digits, so records round-trip exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .engine import ExitRecord, PathParams, gamma_default, tube_deviation_prob
from .lab import (
    ExperimentConfig,
    StatsSummary,
    SweepResult,
    TheoryPrediction,
    _predict,
    run_experiment,
    sweep,
)
from .noise import RngStream, sample_stable_increment
from .potential import validate_potential
from .split import rho_gamma_feasible, split_characteristic_check

__all__ = [
    "ConfigError",
    "RunManifest",
    "parse_config",
    "cmd_theory",
    "cmd_simulate",
    "cmd_sweep",
    "cmd_deviation",
    "cmd_validate",
    "main",
]

CSV_COLUMNS = (
    "path_id",
    "stream_id",
    "exit_time",
    "exit_position",
    "pre_jump_position",
    "n_large_jumps",
    "exited_at_large_jump",
    "censored",
)


class ConfigError(Exception):
    """Invalid configuration; carries every violation found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_eps(s: str) -> tuple:
    return tuple(float(part) for part in s.split(",") if part.strip())


# key -> (caster, required, default); defaults of None mean "left unset"
CONFIG_KEYS = {
    "alpha": (float, True, None),
    "potential": (str, True, None),
    "domain": (str, True, None),
    "a": (float, True, None),
    "b": (float, False, None),
    "eps": (_parse_eps, True, None),
    "n_paths": (int, True, None),
    "seed": (int, True, None),
    "d": (float, False, 1.0),
    "stable": (_parse_bool, False, True),
    "rho": (float, False, 0.5),
    "scheme": (str, False, "euler"),
    "t_max_multiplier": (float, False, 20.0),
    "x0": (float, False, 0.0),
    "h": (float, False, None),
    "workers": (int, False, 0),
    "m": (float, False, 1.0),
    "kappa": (float, False, 1.0),
    "c": (float, False, 1.0),
    "gamma": (float, False, None),
}


def _config_from_dict(raw: dict) -> ExperimentConfig:
    errors = []
    values = {}
    constructible = True
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            errors.append(f"unknown key {key!r}")
            continue
        caster = CONFIG_KEYS[key][0]
        try:
            values[key] = caster(value) if isinstance(value, str) else value
        except (ValueError, TypeError) as exc:
            errors.append(f"bad value for {key!r}: {exc}")
            constructible = False
    for key, (_, required, default) in CONFIG_KEYS.items():
        if key in values:
            continue
        if required:
            errors.append(f"missing required key {key!r}")
            constructible = False
        else:
            values[key] = default
    # with every typed value in hand, still collect the semantic violations
    # so one failed run reports everything wrong with the file
    if constructible:
        kwargs = dict(values)
        kwargs["eps_list"] = tuple(kwargs.pop("eps"))
        try:
            cfg = ExperimentConfig(**kwargs)
        except ValueError as exc:
            errors.extend(str(exc).removeprefix("invalid config: ").split("; "))
        else:
            if errors:
                raise ConfigError(errors)
            return cfg
    raise ConfigError(errors)


def parse_config(path: str) -> ExperimentConfig:
    """Parse and validate a config file, reporting every violation at once.

    Accepts the flat key=value text format, or a manifest.json written by a
    previous run (its config echo is replayed verbatim).
    """
    if not os.path.exists(path):
        raise ConfigError([f"config file not found: {path}"])
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
        raw = data.get("config", data)
        return _config_from_dict({k: v for k, v in raw.items()})
    raw = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
            continue
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        raw[key] = value
    if errors:
        raise ConfigError(errors)
    return _config_from_dict(raw)


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to re-run a command bit for bit (same build)."""

    command: str
    config: dict
    version: str
    seed: int
    outputs: dict
    wall_clock_seconds: float
    workers: int

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2) + "\n"


def _config_echo(cfg: ExperimentConfig) -> dict:
    echo = dataclasses.asdict(cfg)
    echo["eps"] = list(echo.pop("eps_list"))
    return echo


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def write_records_csv(path: str, records: list[ExitRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for i, r in enumerate(records):
            fh.write(
                ",".join(
                    (
                        str(i),
                        str(r.stream_id),
                        _fmt(r.exit_time),
                        _fmt(r.exit_position),
                        _fmt(r.pre_jump_position),
                        str(r.n_large_jumps),
                        _fmt(r.exited_at_large_jump),
                        _fmt(r.censored),
                    )
                )
                + "\n"
            )


def _prediction_dict(pred: TheoryPrediction) -> dict:
    return {
        "theta": pred.theta,
        "rate": pred.rate,
        "mean": pred.mean,
        "delta": pred.delta,
    }


def _summary_dict(s: StatsSummary) -> dict:
    return dataclasses.asdict(s)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")


def _finish(command, cfg, out_dir, outputs, t0, workers) -> None:
    manifest = RunManifest(
        command=command,
        config=_config_echo(cfg),
        version=__version__,
        seed=cfg.seed,
        outputs=outputs,
        wall_clock_seconds=time.time() - t0,
        workers=workers,
    )
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest.to_json())


def cmd_theory(cfg: ExperimentConfig, out_dir: str) -> int:
    """Write the closed-form predictions for every eps; no simulation."""
    t0 = time.time()
    os.makedirs(out_dir, exist_ok=True)
    p = cfg.build_potential()
    dom = cfg.build_domain()
    preds = {}
    for eps in cfg.eps_list:
        preds["%.17g" % eps] = _prediction_dict(_predict(cfg, eps, p, dom))
    path = os.path.join(out_dir, "theory.json")
    _write_json(path, {"config": _config_echo(cfg), "theory": preds})
    _finish("theory", cfg, out_dir, {"theory": path}, t0, 0)
    return 0


def cmd_simulate(cfg: ExperimentConfig, out_dir: str, workers: int | None = None) -> int:
    """Run one ensemble (single eps) and write records.csv + summary.json."""
    if len(cfg.eps_list) != 1:
        raise ConfigError(
            ["simulate needs exactly one eps value; use the sweep command for several"]
        )
    t0 = time.time()
    os.makedirs(out_dir, exist_ok=True)
    w = workers if workers is not None else cfg.effective_workers()
    records, summary, pred = run_experiment(cfg, workers=w)
    rec_path = os.path.join(out_dir, "records.csv")
    sum_path = os.path.join(out_dir, "summary.json")
    write_records_csv(rec_path, records)
    _write_json(
        sum_path,
        {
            "config": _config_echo(cfg),
            "eps": cfg.eps_list[0],
            "empirical": _summary_dict(summary),
            "theory": _prediction_dict(pred),
        },
    )
    _finish("simulate", cfg, out_dir, {"records": rec_path, "summary": sum_path}, t0, w)
    return 0


def cmd_sweep(cfg: ExperimentConfig, out_dir: str, workers: int | None = None) -> int:
    """Run the eps sweep; write sweep.csv, per-eps records files, summary.json."""
    t0 = time.time()
    os.makedirs(out_dir, exist_ok=True)
    w = workers if workers is not None else cfg.effective_workers()
    result = sweep(cfg, workers=w)
    sweep_path = os.path.join(out_dir, "sweep.csv")
    _write_sweep_csv(sweep_path, result)
    outputs = {"sweep": sweep_path}
    for eps, records in result.records_by_eps.items():
        rec_path = os.path.join(out_dir, f"records_eps{eps:g}.csv")
        write_records_csv(rec_path, records)
        outputs[f"records_eps{eps:g}"] = rec_path
    sum_path = os.path.join(out_dir, "summary.json")
    _write_json(
        sum_path,
        {
            "config": _config_echo(cfg),
            "mean_scaling_slope": result.mean_scaling_slope,
            "gaussian_log_slope": result.gaussian_log_slope,
            "rows": [dataclasses.asdict(r) for r in result.rows],
        },
    )
    outputs["summary"] = sum_path
    _finish("sweep", cfg, out_dir, outputs, t0, w)
    return 0


def _write_sweep_csv(path: str, result: SweepResult) -> None:
    cols = (
        "eps", "n_paths", "mean", "ci_low", "ci_high", "ks_statistic",
        "big_jump_exit_fraction", "censored_count", "theory_mean", "ratio",
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for r in result.rows:
            fh.write(
                ",".join(
                    (
                        _fmt(r.eps), str(r.n_paths), _fmt(r.mean), _fmt(r.ci_low),
                        _fmt(r.ci_high), _fmt(r.ks_statistic),
                        _fmt(r.big_jump_exit_fraction), str(r.censored_count),
                        _fmt(r.theory_mean), _fmt(r.ratio),
                    )
                )
                + "\n"
            )


def cmd_deviation(cfg: ExperimentConfig, out_dir: str, workers: int | None = None) -> int:
    """Estimate the tube-deviation probability across the eps grid."""
    t0 = time.time()
    os.makedirs(out_dir, exist_ok=True)
    w = workers if workers is not None else cfg.effective_workers()
    p = cfg.build_potential()
    gamma = cfg.gamma if cfg.gamma is not None else gamma_default(cfg.alpha)
    rows = []
    for i, eps in enumerate(sorted(cfg.eps_list, reverse=True)):
        split = cfg.build_split(eps)
        pp = PathParams(eps=eps, h=cfg.effective_h(), t_max=1.0, split=split, x0=cfg.x0)
        est = tube_deviation_prob(
            p, cfg.x0, split, cfg.d, cfg.c, pp, cfg.n_paths,
            RngStream(cfg.seed, i * max(cfg.n_paths, 1)),
            gamma=gamma, workers=w,
        )
        rows.append((eps, est))
    dev_path = os.path.join(out_dir, "deviation.csv")
    cols = ("eps", "level", "estimate", "ci_low", "ci_high", "n_paths", "n_exceed")
    with open(dev_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for eps, est in rows:
            fh.write(
                ",".join(
                    (
                        _fmt(eps), _fmt(est.level), _fmt(est.estimate),
                        _fmt(est.ci_low), _fmt(est.ci_high),
                        str(est.n_paths), str(est.n_exceed),
                    )
                )
                + "\n"
            )
    sum_path = os.path.join(out_dir, "summary.json")
    _write_json(
        sum_path,
        {
            "config": _config_echo(cfg),
            "gamma": gamma,
            "c": cfg.c,
            "rows": [
                {
                    "eps": eps, "level": est.level, "estimate": est.estimate,
                    "ci_low": est.ci_low, "ci_high": est.ci_high,
                    "n_paths": est.n_paths, "n_exceed": est.n_exceed,
                }
                for eps, est in rows
            ],
        },
    )
    _finish("deviation", cfg, out_dir, {"deviation": dev_path, "summary": sum_path}, t0, w)
    return 0


def cmd_validate(cfg: ExperimentConfig, out_dir: str) -> int:
    """Run potential, noise and split property checks; nonzero on any failure."""
    t0 = time.time()
    os.makedirs(out_dir, exist_ok=True)
    p = cfg.build_potential()
    dom = cfg.build_domain()
    rows = []

    report = validate_potential(p, dom)
    for name, passed, detail in report.checks:
        rows.append({"check": f"potential.{name}", "passed": bool(passed), "detail": detail})

    for eps in cfg.eps_list:
        if cfg.stable:
            split = cfg.build_split(eps)
            ident = abs(split.beta * split.threshold**cfg.alpha - 2.0 / cfg.alpha)
            rows.append(
                {
                    "check": f"split.intensity_identity_eps{eps:g}",
                    "passed": ident < 1e-12,
                    "detail": f"|beta*threshold^alpha - 2/alpha| = {ident:.2e}",
                }
            )
            check = split_characteristic_check(split, cfg.d, (0.5, 1.0, 2.0, 5.0))
            rows.append(
                {
                    "check": f"split.characteristic_identity_eps{eps:g}",
                    "passed": bool(check.passed),
                    "detail": f"max abs err {check.max_abs_err:.2e} (tol {check.tol:g})",
                }
            )
    gamma = cfg.gamma if cfg.gamma is not None else gamma_default(cfg.alpha)
    feas = rho_gamma_feasible(cfg.alpha, cfg.rho, gamma)
    rows.append(
        {
            "check": "split.rho_gamma_feasible",
            "passed": bool(feas),
            "detail": "; ".join(feas.violations) or f"rho={cfg.rho:g}, gamma={gamma:g}",
        }
    )
    if cfg.stable:
        a1 = sample_stable_increment(cfg.alpha, 1.0, RngStream(cfg.seed, 0))
        a2 = sample_stable_increment(cfg.alpha, 1.0, RngStream(cfg.seed, 0))
        rows.append(
            {
                "check": "noise.stream_determinism",
                "passed": a1 == a2,
                "detail": f"repeat draw gap {abs(a1 - a2):g}",
            }
        )

    passed = all(r["passed"] for r in rows)
    path = os.path.join(out_dir, "validation.json")
    _write_json(path, {"config": _config_echo(cfg), "passed": passed, "checks": rows})
    _finish("validate", cfg, out_dir, {"validation": path}, t0, 0)
    return 0 if passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyexit",
        description="First-exit-time experiments for heavy-tailed SDEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("theory", "write closed-form predictions only"),
        ("simulate", "run one ensemble and write records + summary"),
        ("sweep", "run an eps sweep and write the scaling table"),
        ("deviation", "estimate tube-deviation probabilities"),
        ("validate", "run potential/noise/split property checks"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="config file (or manifest.json)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--workers", type=int, default=None, help="worker thread count")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.command == "theory":
            return cmd_theory(cfg, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, workers=args.workers)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out, workers=args.workers)
        if args.command == "deviation":
            return cmd_deviation(cfg, args.out, workers=args.workers)
        return cmd_validate(cfg, args.out)
    except ConfigError as exc:
        json.dump({"error": "ConfigError", "messages": exc.errors}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except Exception as exc:  # keep the error channel machine readable
        json.dump({"error": type(exc).__name__, "messages": [str(exc)]}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
