"""Command-line frontend: scenario configs in, reports and CSV data out.

Subcommands: simulate, compare, reconstruct, determinability, certify,
cluster, sweep, probe.  Exit codes: 0 verdict pass, 1 verdict fail,
2 usage/config error, 3 numerical failure.  All errors print one
machine-parsable line `error: <kind>: <detail>` on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    ConfigError,
    ExperimentReport,
    ScenarioConfig,
    probe_conjecture_r,
    run_cluster_experiment,
    run_determinability_demo,
    run_identical_comparison,
    run_reconstruction_demo,
    run_single_simulation,
    run_sync_certification,
    run_tikhonov_sweep,
)
from .integrate import IntegrationError, Trajectory
from .reconstruct import determinability_threshold

__all__ = ["main", "parse_and_dispatch", "load_config", "write_trajectory_csv", "validate_report"]

SUBCOMMANDS = (
    "simulate",
    "compare",
    "reconstruct",
    "determinability",
    "certify",
    "cluster",
    "sweep",
    "probe",
)

_LIST_FIELDS = {"nat_freq", "theta0", "omega0", "m_list", "cluster_indices"}
_INT_FIELDS = {"seed", "n", "n_max", "n1", "n2", "seeds"}
_BOOL_FIELDS = {"strict"}
_STR_FIELDS = {"init_mode"}


def _coerce(key: str, value):
    if key in _LIST_FIELDS:
        if value is None:
            return None
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"field '{key}' must be a list")
        return tuple(float(v) if key != "cluster_indices" else int(v) for v in value)
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"field '{key}' must be an integer")
        return int(value)
    if key in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise ConfigError(f"field '{key}' must be a boolean")
        return value
    if key in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"field '{key}' must be a string")
        return value
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{key}' must be a number")
    return float(value)


def load_config(path: str | None, overrides: dict[str, str]) -> ScenarioConfig:
    """Strict-schema config load: unknown keys are errors, angles in radians,
    times in seconds, kappa in 1/s.  Overrides apply after the file."""
    valid = set(ScenarioConfig.__dataclass_fields__.keys())
    data: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        for key, value in raw.items():
            if key not in valid:
                raise ConfigError(f"unknown config key '{key}'")
            data[key] = _coerce(key, value)

    for key, text in overrides.items():
        if key not in valid:
            raise ConfigError(f"unknown override key '{key}'")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        data[key] = _coerce(key, value)

    try:
        config = ScenarioConfig(**data)
        config.validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))
    return config


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    """Grid samples as CSV: t, theta_1..N, omega_1..N, R, D_theta, D_omega.

    Values are written with 17 significant digits so a read-back reproduces
    them bit-exactly.
    """
    n = traj.params.n
    header = (
        ["t"]
        + [f"theta_{i}" for i in range(1, n + 1)]
        + [f"omega_{i}" for i in range(1, n + 1)]
        + ["R", "D_theta", "D_omega"]
    )
    th, om = traj.theta_grid, traj.omega_grid
    r = np.abs(np.exp(1j * th).mean(axis=1))
    d_th = th.max(axis=1) - th.min(axis=1)
    d_om = om.max(axis=1) - om.min(axis=1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k, t in enumerate(traj.grid):
            row = [t, *th[k], *om[k], r[k], d_th[k], d_om[k]]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def validate_report(payload: dict) -> None:
    """Structural check of a report payload; raises ValueError on violation."""
    for key in ("experiment", "config", "checks", "summaries", "verdict"):
        if key not in payload:
            raise ValueError(f"report missing key '{key}'")
    if payload["verdict"] not in ("pass", "fail"):
        raise ValueError("verdict must be 'pass' or 'fail'")
    if not isinstance(payload["checks"], list):
        raise ValueError("checks must be a list")
    for c in payload["checks"]:
        if "name" not in c or "passed" not in c or not isinstance(c["passed"], bool):
            raise ValueError("each check needs 'name' and boolean 'passed'")
    expect = all(c["passed"] for c in payload["checks"])
    if (payload["verdict"] == "pass") != expect:
        raise ValueError("verdict does not equal the conjunction of checks")


def _sweep_threads() -> int:
    raw = os.environ.get("SYNC_LAB_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError("SYNC_LAB_THREADS must be an integer")
    return os.cpu_count() or 1


_RUNNERS = {
    "certify": run_sync_certification,
    "sweep": run_tikhonov_sweep,
    "compare": run_identical_comparison,
    "cluster": run_cluster_experiment,
    "reconstruct": run_reconstruction_demo,
    "determinability": run_determinability_demo,
    "probe": probe_conjecture_r,
}


def _build_parser(subcommand: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=f"synclab {subcommand}", add_help=True)
    parser.add_argument("--config", type=str, default=None, help="scenario JSON path")
    parser.add_argument("--out", type=str, default=".", help="output directory")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field (repeatable)",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--strict", action="store_true", help="enable strict bound modes")
    # frequently used direct knobs (sugar for --set)
    parser.add_argument("--m", type=float, default=None, help="inertia override")
    parser.add_argument("--kappa", type=float, default=None, help="coupling override")
    parser.add_argument("--seed", type=int, default=None)
    return parser


def _collect_overrides(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not KEY=VALUE")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if args.m is not None:
        overrides["inertia_m"] = repr(args.m)
    if args.kappa is not None:
        overrides["coupling_kappa"] = repr(args.kappa)
    if args.seed is not None:
        overrides["seed"] = repr(args.seed)
    if args.strict:
        overrides["strict"] = "true"
    return overrides


def _emit_report(report: ExperimentReport, out_dir: Path, verbose: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = report.to_payload()
    validate_report(payload)
    with open(out_dir / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if verbose:
        for c in report.checks:
            print(f"[{'pass' if c['passed'] else 'FAIL'}] {c['name']}")
    print(f"verdict: {'pass' if report.verdict else 'fail'}")


def parse_and_dispatch(argv: list[str]) -> int:
    """Run one subcommand; returns the process exit code."""
    if not argv:
        print("error: usage: synclab <subcommand> [options]", file=sys.stderr)
        return 2
    sub = argv[0]
    if sub in ("-h", "--help"):
        print("subcommands: " + ", ".join(SUBCOMMANDS))
        return 0
    if sub not in SUBCOMMANDS:
        print(f"error: usage: unknown subcommand '{sub}'", file=sys.stderr)
        return 2

    parser = _build_parser(sub)
    try:
        args = parser.parse_args(argv[1:])
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2

    try:
        overrides = _collect_overrides(args)
        # determinability with no config is a pure threshold query
        if sub == "determinability" and args.config is None and args.m is not None:
            kappa = args.kappa if args.kappa is not None else 1.0
            value = determinability_threshold(kappa, args.m)
            print("inf" if value == float("inf") else f"{value:.9g}")
            return 0
        config = load_config(args.config, overrides)
        out_dir = Path(args.out)

        if sub == "simulate":
            report, traj = run_single_simulation(config)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_trajectory_csv(traj, out_dir / "trajectory.csv")
            _emit_report(report, out_dir, args.verbose)
        elif sub == "sweep":
            report = _run_sweep(config)
            _emit_report(report, out_dir, args.verbose)
        else:
            report = _RUNNERS[sub](config)
            _emit_report(report, out_dir, args.verbose)
        return 0 if report.verdict else 1
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2


def _run_sweep(config: ScenarioConfig) -> ExperimentReport:
    """Fan the independent per-m integrations over SYNC_LAB_THREADS threads."""
    return run_tikhonov_sweep(config, workers=_sweep_threads())


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
