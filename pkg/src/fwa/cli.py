"""Command-line harness: single runs, campaigns and report tables.

Config files are INI.  Recognised sections::

    [campaign]            dim, evals, runs, seed, suite_seed, jobs, out,
                          algorithms, functions, plots
    [algorithm]           any AlgorithmConfig field, applied to every algorithm
    [algorithm.<name>]    AlgorithmConfig overrides for one algorithm
    [function.<name>]     shift, rotation: paths to whitespace-separated files
    [external.<label>]    path: comparator results CSV (function_id,final_fitness)

Unknown sections or keys are rejected.  Output directory precedence is
``--out``, then ``$FWA_OUT_DIR``, then ``[campaign] out``, then ``results``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys
import typing
from pathlib import Path

from .algorithms import algorithm_names, run_algorithm
from .core import AlgorithmConfig
from .objectives import SUITE_NAMES, load_rotation, load_shift, make_suite, with_transform
from .reports import run_campaign, write_reports, write_run
from .stats import load_external_results

__all__ = ["ConfigError", "load_config", "main"]

OUT_ENV = "FWA_OUT_DIR"
DEFAULT_SUITE_SEED = 2024
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

_CAMPAIGN_KEYS = {
    "dim": int,
    "evals": int,
    "runs": int,
    "seed": int,
    "suite_seed": int,
    "jobs": int,
    "out": str,
    "algorithms": str,
    "functions": str,
    "plots": str,
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_fields():
    hints = typing.get_type_hints(AlgorithmConfig)
    out = {}
    for f in dataclasses.fields(AlgorithmConfig):
        t = hints[f.name]
        args = [a for a in typing.get_args(t) if a is not type(None)]
        out[f.name] = args[0] if args else t
    return out


def _parse_value(section, key, raw, kind):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "yes", "true", "on"):
                return True
            if lowered in ("0", "no", "false", "off"):
                return False
            raise ValueError(raw)
        if raw.strip().lower() == "none":
            return None
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind.__name__}") from None


def _csv_list(raw):
    return [x.strip() for x in raw.split(",") if x.strip()] if raw else []


@dataclasses.dataclass
class Settings:
    dim: int = 10
    evals: typing.Optional[int] = None
    runs: int = 51
    seed: int = 1
    suite_seed: int = DEFAULT_SUITE_SEED
    jobs: int = 1
    out: typing.Optional[str] = None
    algorithms: typing.List[str] = dataclasses.field(default_factory=list)
    functions: typing.List[str] = dataclasses.field(default_factory=list)
    plots: bool = True
    shared: dict = dataclasses.field(default_factory=dict)
    per_algorithm: dict = dataclasses.field(default_factory=dict)
    transforms: dict = dataclasses.field(default_factory=dict)
    external: dict = dataclasses.field(default_factory=dict)

    def algorithm_config(self, name: str) -> AlgorithmConfig:
        values = dict(self.shared)
        values.update(self.per_algorithm.get(name, {}))
        if self.evals is not None:
            values["e_max"] = self.evals
        try:
            cfg = AlgorithmConfig(**values)
            cfg.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cfg


def load_config(path) -> Settings:
    """Parse an INI config into :class:`Settings`; raises :class:`ConfigError`."""
    cp = configparser.ConfigParser(default_section="__none__", interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    fields = _config_fields()
    s = Settings()
    for section in cp.sections():
        items = dict(cp.items(section))
        if section == "campaign":
            for key, raw in items.items():
                if key not in _CAMPAIGN_KEYS:
                    raise ConfigError(f"[campaign] unknown key {key!r}; allowed: {sorted(_CAMPAIGN_KEYS)}")
                if key in ("algorithms", "functions"):
                    setattr(s, key, _csv_list(raw))
                elif key == "plots":
                    s.plots = _parse_value(section, key, raw, bool)
                else:
                    setattr(s, key, _parse_value(section, key, raw, _CAMPAIGN_KEYS[key]))
        elif section == "algorithm" or section.startswith("algorithm."):
            target = s.shared
            if section != "algorithm":
                name = section.split(".", 1)[1]
                if name not in algorithm_names():
                    raise ConfigError(f"[{section}] unknown algorithm {name!r}; choose from {algorithm_names()}")
                target = s.per_algorithm.setdefault(name, {})
            for key, raw in items.items():
                if key not in fields:
                    raise ConfigError(f"[{section}] unknown key {key!r}; allowed: {sorted(fields)}")
                target[key] = _parse_value(section, key, raw, fields[key])
        elif section.startswith("function."):
            name = section.split(".", 1)[1]
            if name not in SUITE_NAMES:
                raise ConfigError(f"[{section}] unknown function {name!r}; choose from {list(SUITE_NAMES)}")
            for key in items:
                if key not in ("shift", "rotation"):
                    raise ConfigError(f"[{section}] unknown key {key!r}; allowed: ['rotation', 'shift']")
            s.transforms[name] = items
        elif section.startswith("external."):
            if set(items) != {"path"}:
                raise ConfigError(f"[{section}] needs exactly one key 'path'")
            s.external[section.split(".", 1)[1]] = items["path"]
        else:
            raise ConfigError(f"unknown section [{section}]")
    return s


def _build_specs(settings: Settings, functions):
    suite = {spec.name: spec for spec in make_suite(settings.dim, settings.suite_seed)}
    specs = []
    for name in functions:
        spec = suite[name]
        tf = settings.transforms.get(name)
        if tf:
            try:
                shift = load_shift(tf["shift"], settings.dim) if "shift" in tf else None
                rotation = load_rotation(tf["rotation"], settings.dim) if "rotation" in tf else None
                spec = with_transform(spec, shift=shift, rotation=rotation)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"[function.{name}] {exc}") from None
        specs.append(spec)
    return specs


def _check_names(kind, names, valid):
    bad = [n for n in names if n not in valid]
    if bad:
        raise ConfigError(f"unknown {kind} {', '.join(map(repr, bad))}; valid choices: {', '.join(valid)}")


def _settings(args) -> Settings:
    s = load_config(args.config) if args.config else Settings()
    for key in ("dim", "evals", "seed", "suite_seed"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(s, key, value)
    for key in ("runs", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(s, key, value)
    if args.out:
        s.out = args.out
    elif os.environ.get(OUT_ENV):
        s.out = os.environ[OUT_ENV]
    elif not s.out:
        s.out = "results"
    if s.dim < 2:
        raise ConfigError("dim must be at least 2")
    if s.evals is not None and s.evals < 1:
        raise ConfigError("evals must be positive")
    return s


def cmd_run(args) -> int:
    s = _settings(args)
    _check_names("algorithm", [args.algo], algorithm_names())
    _check_names("function", [args.function], list(SUITE_NAMES))
    cfg = s.algorithm_config(args.algo)
    (spec,) = _build_specs(s, [args.function])
    result = run_algorithm(args.algo, cfg, spec, s.seed)
    directory = Path(s.out) / args.algo / spec.name
    try:
        write_run(result, directory, run=0)
    except OSError as exc:
        print(f"error: cannot write results to {directory}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{args.algo} {spec.name} D={spec.dim} seed={s.seed}: best={result.best_fitness:.6e} "
          f"evals={result.evals_used}/{result.e_max} time={result.wall_time:.2f}s -> {directory}")
    return EXIT_OK


def cmd_campaign(args) -> int:
    s = _settings(args)
    algos = _csv_list(args.algo) if args.algo else (s.algorithms or algorithm_names())
    functions = _csv_list(args.function) if args.function else (s.functions or list(SUITE_NAMES))
    _check_names("algorithm", algos, algorithm_names())
    _check_names("function", functions, list(SUITE_NAMES))
    if s.runs < 1 or s.jobs < 1:
        raise ConfigError("runs and jobs must be positive")
    configs = {a: s.algorithm_config(a) for a in algos}
    specs = _build_specs(s, functions)
    external = {}
    for label, path in s.external.items():
        try:
            external[label] = load_external_results(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"[external.{label}] {exc}") from None
    try:
        Path(s.out).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {s.out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    def progress(done, total):
        if not args.quiet and (done == total or done % max(1, total // 20) == 0):
            print(f"  {done}/{total} runs", file=sys.stderr)

    summaries, failures = run_campaign(algos, specs, configs, s.runs, s.seed, s.out, s.jobs, progress)
    try:
        paths = write_reports(summaries, s.out, algos, failures, external or None, plots=s.plots and not args.no_plots)
    except OSError as exc:
        print(f"error: cannot write reports: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{len(summaries)} runs written to {s.out}; reports in {Path(s.out) / 'reports'} ({len(paths)} files)")
    for f in failures:
        print(f"failed: {f.algorithm} {f.function} run {f.run}: {f.error.splitlines()[0]}", file=sys.stderr)
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_list(args) -> int:
    print("algorithms: " + ", ".join(algorithm_names()))
    print("functions:  " + ", ".join(SUITE_NAMES))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fwa", description="Fireworks-algorithm runs and benchmark campaigns.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--dim", type=int, help="problem dimension (default 10)")
        sp.add_argument("--evals", type=int, help="evaluation budget (default 10000 * dim)")
        sp.add_argument("--seed", type=int, help="run seed, or seed base for campaigns (default 1)")
        sp.add_argument("--suite-seed", type=int, help=f"seed of the shift/rotation draw (default {DEFAULT_SUITE_SEED})")
        sp.add_argument("--out", help=f"output directory (env {OUT_ENV}, default ./results)")

    r = sub.add_parser("run", help="one optimization run")
    common(r)
    r.add_argument("--algo", required=True, help="algorithm name")
    r.add_argument("--function", required=True, help="suite function name")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("campaign", help="algorithms x functions x runs, then report tables")
    common(c)
    c.add_argument("--algo", help="comma-separated algorithms (default: all)")
    c.add_argument("--function", help="comma-separated functions (default: whole suite)")
    c.add_argument("--runs", type=int, help="runs per cell (default 51)")
    c.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
    c.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    c.add_argument("--quiet", action="store_true", help="no progress output")
    c.set_defaults(func=cmd_campaign)

    ls = sub.add_parser("list", help="show algorithm and function names")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
