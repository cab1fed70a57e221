"""Command-line entry point: ``dmtlab {curve,compare,simulate,validate,replay}``.

Every output file starts with ``#`` lines carrying the tool version and
the full run configuration, so ``dmtlab replay FILE`` regenerates it
byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .closedform import applicable_forms
from .curves import evaluate, ptp_dmt
from .errors import DMTError, InvalidConfigError
from .exponents import AntennaConfig
from .optimizer import ddf_curve, ddf_dmt
from .simulator import diversity_slope

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SIG_DIGITS = 12


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce one CLI run."""

    command: str
    antennas: tuple[int, int, int] = (1, 1, 1)
    r_step: float = 0.05
    r: float | None = None
    snr_db_grid: list[float] = field(default_factory=list)
    trials: int = 100_000
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    suite: str | None = None
    snr_db: float | None = None

    def validate(self) -> None:
        if self.command not in ("curve", "compare", "simulate", "validate"):
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        AntennaConfig(*self.antennas)
        if self.command in ("curve", "compare") and not self.r_step > 0:
            raise UsageError("--r-step must be positive")
        if self.command == "simulate":
            if self.r is None or self.r < 0:
                raise UsageError("simulate needs --r >= 0")
            if not self.snr_db_grid:
                raise UsageError("simulate needs --snr start:stop:step")
            if self.trials < 1:
                raise UsageError("--trials must be positive")

    @property
    def cfg(self) -> AntennaConfig:
        return AntennaConfig(*self.antennas)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        obj = json.loads(text)
        obj["antennas"] = tuple(obj["antennas"])
        return cls(**obj)


# -- formatting ----------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, f".{SIG_DIGITS}g")


def _round_json(obj):
    if isinstance(obj, float):
        return float(format(obj, f".{SIG_DIGITS}g")) if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    return obj


def _header(rc: RunConfig, notes=()) -> list[str]:
    lines = [f"# dmtlab {__version__}", f"# run_config: {rc.to_json()}"]
    lines += [f"# note: {n}" for n in notes]
    return lines


def _table(rc: RunConfig, columns: list[str], rows: list[list], notes=(), extra: dict | None = None) -> str:
    if rc.format == "json":
        doc = {
            "version": __version__,
            "run_config": asdict(rc),
            "notes": list(notes),
            "columns": columns,
            "rows": [[_round_json(float(v)) if v is not None else None for v in row] for row in rows],
        }
        if extra:
            doc.update(extra)
        return json.dumps(_round_json(doc), indent=2) + "\n"
    lines = _header(rc, notes)
    if extra:
        lines.append(f"# summary: {json.dumps(_round_json(extra), sort_keys=True)}")
    lines.append(",".join(columns))
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------


def cmd_curve(rc: RunConfig) -> tuple[str, int]:
    cfg = rc.cfg
    curve = ddf_curve(cfg, rc.r_step)
    ptp = ptp_dmt(cfg.m, cfg.n)
    rows = [[r, d, evaluate(ptp, r)] for r, d in curve.breakpoints]
    return _table(rc, ["r", "d", "ptp"], rows), EXIT_OK


def cmd_compare(rc: RunConfig) -> tuple[str, int]:
    cfg = rc.cfg
    curve = ddf_curve(cfg, rc.r_step)
    forms = applicable_forms(cfg.m, cfg.k, cfg.n)
    order = ["ddf_closed", "ddf_upper", "scf", "fddf", "fundamental", "ptp"]
    cols = [c for c in order if c in forms]
    notes = [f"{c} not available for {cfg}" for c in order if c not in forms]
    if cols == ["ptp"]:
        msg = f"no closed-form comparison is available for {cfg}; emitting ddf_numeric and ptp only"
        print(f"warning: {msg}", file=sys.stderr)
        notes = [msg]
    rows = []
    for r, d in curve.breakpoints:
        row = [r, d]
        for c in cols:
            form = forms[c]
            row.append(form(r) if r <= form.r_max + 1e-12 else None)
        rows.append(row)
    return _table(rc, ["r", "ddf_numeric"] + cols, rows, notes), EXIT_OK


def cmd_simulate(rc: RunConfig) -> tuple[str, int]:
    cfg = rc.cfg
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = diversity_slope(cfg, rc.r, rc.snr_db_grid, rc.trials, rc.seed, strict=False)
    reference = ddf_dmt(cfg, rc.r) if rc.r <= cfg.p else None
    summary = {**est.summary(), "d_reference": reference}
    rows = [
        [s, p, t, c] for s, p, t, c in zip(est.snr_db_grid, est.p_out, est.trials, est.wilson_radius)
    ]
    if rc.format == "json":
        summary["events"] = list(est.events)
    return _table(rc, ["snr_db", "p_out", "trials", "ci_radius"], rows, extra=summary), EXIT_OK


def cmd_validate(rc: RunConfig) -> tuple[str, int]:
    from .validation import SUITES, run_suite

    if rc.suite not in SUITES:
        raise UsageError(f"unknown suite {rc.suite!r}; choose from {', '.join(sorted(SUITES))}")
    try:
        results = run_suite(rc.suite, snr_db=rc.snr_db)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    ok = all(c.passed for c in results)
    if rc.format == "json":
        doc = {"version": __version__, "suite": rc.suite, "passed": ok,
               "checks": [c.to_dict() for c in results]}
        text = json.dumps(_round_json(doc), indent=2) + "\n"
    else:
        lines = [f"suite {rc.suite}"] + [c.row() for c in results]
        lines.append("ALL PASSED" if ok else "FAILURES")
        text = "\n".join(lines) + "\n"
    return text, (EXIT_OK if ok else EXIT_FAIL)


COMMANDS = {"curve": cmd_curve, "compare": cmd_compare, "simulate": cmd_simulate, "validate": cmd_validate}


# -- argument parsing ----------------------------------------------------


def parse_snr(text: str) -> list[float]:
    """``start:stop:step`` in dB, stop inclusive."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    count = int(round((stop - start) / step))
    return [round(start + i * step, 9) for i in range(count + 1)]


def parse_antennas(text: str) -> tuple[int, int, int]:
    try:
        cfg = AntennaConfig.parse(text)
    except InvalidConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return (cfg.m, cfg.k, cfg.n)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dmtlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"dmtlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="csv"):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    p = sub.add_parser("curve", help="sampled DDF DMT curve with the point-to-point baseline")
    p.add_argument("--antennas", type=parse_antennas, required=True, metavar="m,k,n")
    p.add_argument("--r-step", type=float, default=0.05)
    common(p)

    p = sub.add_parser("compare", help="DDF curve next to the applicable closed forms")
    p.add_argument("--antennas", type=parse_antennas, required=True, metavar="m,k,n")
    p.add_argument("--r-step", type=float, default=0.05)
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo outage probabilities and diversity slope")
    p.add_argument("--antennas", type=parse_antennas, required=True, metavar="m,k,n")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--snr", type=parse_snr, required=True, metavar="start:stop:step")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("validate", help="run a self-check suite")
    p.add_argument("suite", help="closedform, properties, montecarlo or support")
    p.add_argument("--snr-db", type=float, help="single SNR point for the support suite")
    common(p)

    p = sub.add_parser("replay", help="re-run the configuration embedded in an output file")
    p.add_argument("file")
    p.add_argument("--out", help="output file (default: the embedded path, else stdout)")
    return ap


def _config_from_args(args) -> RunConfig:
    rc = RunConfig(command=args.command, output_path=args.out, format=args.format)
    if args.command in ("curve", "compare", "simulate"):
        rc.antennas = args.antennas
    if args.command in ("curve", "compare"):
        rc.r_step = args.r_step
    if args.command == "simulate":
        rc.r, rc.snr_db_grid, rc.trials, rc.seed = args.r, args.snr, args.trials, args.seed
    if args.command == "validate":
        rc.suite, rc.snr_db = args.suite, args.snr_db
    return rc


def _read_embedded(path: str) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    for line in text.splitlines():
        if line.startswith("# run_config: "):
            return RunConfig.from_json(line[len("# run_config: "):])
    try:
        return RunConfig.from_json(json.dumps(json.loads(text)["run_config"]))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{path} has no embedded run configuration") from exc


def run(rc: RunConfig) -> int:
    rc.validate()
    text, code = COMMANDS[rc.command](rc)
    if rc.output_path:
        with open(rc.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            rc = _read_embedded(args.file)
            if args.out:
                rc.output_path = args.out
        else:
            rc = _config_from_args(args)
        return run(rc)
    except (UsageError, DMTError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
