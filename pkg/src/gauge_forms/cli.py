"""``gauge-forms``: run verification scenarios and write JSON reports plus CSV series.

    gauge-forms run <scenario> [--param value]... [--out DIR] [--seed N] [--config FILE]
    gauge-forms verify-all [--seed N] [--out DIR] [--config FILE] [--jobs N] [--inject-fault monopole]
    gauge-forms list

Exit codes: 0 when every check passes, 1 when a check fails, 2 for a
configuration error.  A JSON config file may hold ``out``, ``seed``,
``params`` (for ``run``) and ``scenarios`` (a mapping from scenario name to
parameters); command-line flags override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .scenarios import SCENARIOS, ConfigError, ScenarioResult

__all__ = ["ScenarioConfig", "Report", "run", "verify_all", "main", "EXIT_PASS", "EXIT_FAIL", "EXIT_CONFIG"]

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
FAULTS = ("monopole",)

log = logging.getLogger("gauge_forms")


@dataclass
class ScenarioConfig:
    """A validated scenario name with its full parameter set."""

    scenario: str
    params: dict = field(default_factory=dict)
    out: Path = Path("gauge-forms-out")
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; known: {', '.join(SCENARIOS)}")
        defaults = SCENARIOS[self.scenario].defaults
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown parameter(s) for {self.scenario}: {', '.join(sorted(unknown))}")
        merged = dict(defaults)
        for key, value in self.params.items():
            merged[key] = _coerce(key, value, defaults[key])
        for key, value in merged.items():
            if key.startswith("tol") and not value > 0:
                raise ConfigError(f"tolerance {key} must be positive, got {value}")
        self.params = merged
        self.out = Path(self.out)
        self.seed = int(self.seed)


def _coerce(key: str, value, default):
    """Convert a flag or config value to the type of the parameter's default."""
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError(value)
                return value.lower() in ("true", "1")
            return bool(value)
        if isinstance(default, int):
            f = float(value)
            if f != int(f):
                raise ValueError(value)
            return int(f)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value {value!r} for parameter {key}") from None


@dataclass
class Report:
    scenario: str
    params: dict
    seed: int
    result: ScenarioResult
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.result.checks)

    def to_dict(self) -> dict:
        """Everything except wall time, so reruns produce identical files."""
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "seed": self.seed,
            "params": self.params,
            "checks": [c.to_dict() for c in self.result.checks],
            "observations": self.result.observations,
            "artifacts": sorted(self.result.artifacts),
        }

    def write(self, directory: Path) -> Path:
        path = directory / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


def run(config: ScenarioConfig) -> Report:
    """Run one scenario into ``<out>/<scenario>/`` and write its report."""
    directory = config.out / config.scenario
    directory.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = SCENARIOS[config.scenario].run(config.params, config.seed, directory)
    report = Report(config.scenario, config.params, config.seed, result, time.perf_counter() - start)
    report.write(directory)
    return report


def verify_all(
    seed: int = 0,
    out: Path = Path("gauge-forms-out"),
    overrides: dict | None = None,
    jobs: int = 1,
) -> list[Report]:
    """Run every scenario with its defaults (plus ``overrides``) and write a summary."""
    overrides = overrides or {}
    configs = [ScenarioConfig(name, overrides.get(name, {}), out, seed) for name in SCENARIOS]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            reports = list(pool.map(run, configs))
    else:
        reports = [run(c) for c in configs]
    summary = {
        "passed": all(r.passed for r in reports),
        "seed": seed,
        "scenarios": {r.scenario: r.passed for r in reports},
    }
    Path(out).mkdir(parents=True, exist_ok=True)
    (Path(out) / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return reports


def _param_flags(tokens: list[str]) -> dict:
    """Turn ``--name value`` / ``--name=value`` pairs into a dict with snake_case keys."""
    params, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"expected --name value, got {tok!r}")
        if "=" in tok:
            name, value = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {tok}")
            name, value = tok[2:], tokens[i + 1]
            i += 2
        params[name.replace("-", "_")] = value
    return params


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _print_report(report: Report, stream) -> None:
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {report.scenario} ({report.wall_time:.2f} s)", file=stream)
    for c in report.result.checks:
        mark = "ok " if c.passed else "BAD"
        print(f"  {mark} {c.name}: measured {c.measured!r} expected {c.expected!r} tol {c.tolerance:g} ({c.mode})", file=stream)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gauge-forms", description="Gauge-theory verification scenarios.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario; extra --name value pairs set its parameters")
    r.add_argument("scenario")
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--config")
    v = sub.add_parser("verify-all", help="run every scenario with default parameters")
    v.add_argument("--out")
    v.add_argument("--seed", type=int)
    v.add_argument("--config")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--inject-fault", choices=FAULTS)
    sub.add_parser("list", help="list scenarios and their default parameters")
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = _parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with exit status 2
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        if args.command == "list":
            for name, s in SCENARIOS.items():
                print(f"{name}: {s.summary}")
                print("    " + " ".join(f"--{k.replace('_', '-')} {v}" for k, v in s.defaults.items()))
            return EXIT_PASS
        cfg = _load_config(args.config)
        out = Path(args.out or cfg.get("out", "gauge-forms-out"))
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        per_scenario = cfg.get("scenarios", {})
        if args.command == "run":
            params = {**per_scenario.get(args.scenario, {}), **cfg.get("params", {}), **_param_flags(extra)}
            report = run(ScenarioConfig(args.scenario, params, out, seed))
            _print_report(report, sys.stdout)
            return EXIT_PASS if report.passed else EXIT_FAIL
        if extra:
            raise ConfigError(f"unexpected arguments: {' '.join(extra)}")
        overrides = {k: dict(v) for k, v in per_scenario.items()}
        if args.inject_fault == "monopole":
            overrides.setdefault("maxwell-vacuum", {})["field"] = "monopole"
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        reports = verify_all(seed, out, overrides, args.jobs)
        for rep in reports:
            _print_report(rep, sys.stdout)
        ok = all(r.passed for r in reports)
        print(f"{'ALL PASS' if ok else 'FAILURES'}: {sum(r.passed for r in reports)}/{len(reports)} scenarios")
        return EXIT_PASS if ok else EXIT_FAIL
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
