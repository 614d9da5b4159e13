"""Command-line experiment runner: lattice, predict, simulate, verify, probe.

Exit status is 0 on success, 1 when a numeric invariant fails, 2 on bad
arguments. Every report embeds the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Any, Optional

import numpy as np

from . import __version__
from .curve import parse_curve
from .errors import NodalError
from .invariants import run_all
from .kacrice import detsigma_scaling_probe, variance_prediction
from .lattice import divisor_diagnostic, enumerate_lattice_points, quadruple_diagnostics, riesz_energy
from .montecarlo import run_experiment

COMMANDS = ("lattice", "predict", "simulate", "verify", "probe")
DEFAULT_CURVE = "circle:r=0.2,arc=1.0"


@dataclass
class ExperimentConfig:
    command: str
    m: int = 25
    curve: str = DEFAULT_CURVE
    trials: int = 1000
    seed: int = 0
    oversample: float = 8.0
    quad_order: Optional[int] = None
    format: str = "json"
    output: Optional[str] = None
    trials_csv: Optional[str] = None
    threads: int = 0  # 0: machine parallelism
    m_max: int = 200
    t1: float = 0.1
    z_min: float = 1e-3  # in units of 1/sqrt(m)
    z_max: float = 1e-2
    z_count: int = 9
    cap: Optional[float] = None
    no_meta: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for name in ("m", "trials", "oversample", "m_max", "z_min", "z_max", "z_count"):
            if not getattr(self, name) > 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.quad_order is not None and self.quad_order <= 0:
            raise ValueError("--quad-order must be positive")
        if self.cap is not None and self.cap <= 0:
            raise ValueError("--cap must be positive")
        if self.threads < 0:
            raise ValueError("--threads must be >= 0")
        if self.seed < 0:
            raise ValueError("--seed must be >= 0")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        parse_curve(self.curve)

    @property
    def worker_threads(self) -> int:
        return self.threads or os.cpu_count() or 1

    def resolved(self) -> dict:
        """Everything that can change the numbers; thread count cannot, so it lives in meta."""
        d = asdict(self)
        d.pop("threads")
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


class InvariantFailure(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nodal-torus", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        # defaults of None mark "not given", so --config values can fill them
        s.add_argument("--config", default=None, help="JSON file whose keys mirror the flag names")
        s.add_argument("--m", type=int, default=None)
        s.add_argument("--curve", default=None, help="circle:r=<r>,arc=<angle>[,cx=..,cy=..,phase=..]")
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--oversample", type=float, default=None)
        s.add_argument("--quad-order", type=int, default=None)
        s.add_argument("--format", choices=("json", "csv"), default=None)
        s.add_argument("--output", default=None)
        s.add_argument("--trials-csv", default=None, help="per-trial dump for simulate")
        s.add_argument("--threads", type=int, default=None)
        s.add_argument("--m-max", type=int, default=None)
        s.add_argument("--t1", type=float, default=None)
        s.add_argument("--z-min", type=float, default=None, help="smallest z, in units of 1/sqrt(m)")
        s.add_argument("--z-max", type=float, default=None)
        s.add_argument("--z-count", type=int, default=None)
        s.add_argument("--cap", type=float, default=None, help="divisor cap; defaults to n")
        s.add_argument("--no-meta", action="store_true", default=None)
    return p


def resolve_config(argv: list[str]) -> ExperimentConfig:
    ns = build_parser().parse_args(argv)
    values: dict[str, Any] = {}
    names = {f.name for f in fields(ExperimentConfig)}
    if ns.config:
        try:
            with open(ns.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"cannot read config {ns.config}: {exc}")
        if not isinstance(loaded, dict):
            raise _UsageError("config must be a JSON object")
        for key, val in loaded.items():
            key = key.replace("-", "_")
            if key not in names or key == "command":
                raise _UsageError(f"unknown config key {key!r}")
            values[key] = val
    for key, val in vars(ns).items():
        if key in names and key != "command" and val is not None:
            values[key] = val
    try:
        cfg = ExperimentConfig(command=ns.command, **values)
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise _UsageError(str(exc))
    return cfg


# ----------------------------------------------------------------------------
# serialization


def _fmt(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return json.dumps(str(x))
        s = format(x, ".17g")
        # keep floats recognisable as floats on re-parse
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: Any) -> str:
    """JSON with every float at 17 significant digits."""
    return _fmt(obj) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _meta(cfg: ExperimentConfig) -> dict:
    return {
        "threads": cfg.worker_threads,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "host": platform.node(),
    }


# ----------------------------------------------------------------------------
# commands


def _lattice(cfg: ExperimentConfig) -> tuple[dict, str]:
    lset = enumerate_lattice_points(cfg.m)
    out = lset.to_dict()
    if lset.n >= 2:
        re = riesz_energy(lset)
        out["riesz_energy"] = re.energy
        out["riesz_ratio"] = re.ratio
    qd = quadruple_diagnostics(lset)
    out["zero_sum_count"] = qd.zero_sum_count
    out["inverse_norm_sum"] = qd.inverse_norm_sum
    cap = cfg.cap if cfg.cap is not None else float(max(lset.n, 1))
    out["divisor_cap"] = cap
    out["divisor_diagnostic"] = divisor_diagnostic(cfg.m, cap)
    text = _csv_text(["x", "y", "angle"], [(x, y, float(a)) for (x, y), a in zip(lset.points, lset.angles)])
    return out, text


def _predict(cfg: ExperimentConfig) -> tuple[dict, str]:
    rep = variance_prediction(enumerate_lattice_points(cfg.m), parse_curve(cfg.curve), cfg.quad_order)
    out = rep.to_dict()
    return out, _csv_text(["field", "value"], out.items())


def _simulate(cfg: ExperimentConfig, threads: int) -> tuple[dict, str]:
    rep = run_experiment(enumerate_lattice_points(cfg.m), parse_curve(cfg.curve), cfg.trials, cfg.seed,
                         cfg.oversample, threads, keep_counts=True, quad_order=cfg.quad_order)
    if cfg.trials_csv:
        rep.write_trials_csv(cfg.trials_csv)
    text = _csv_text(["trial", "count", "warn_flags"],
                     [(i, c, f) for i, (c, f) in enumerate(zip(rep.counts, rep.warn_flags))])
    return rep.to_dict(), text


def _verify(cfg: ExperimentConfig) -> tuple[dict, str]:
    results = run_all(cfg.m_max)
    out = {"m_max": cfg.m_max, "checks": [asdict(r) for r in results],
           "passed": all(r.passed for r in results)}
    text = _csv_text(["check", "passed", "detail"], [(r.name, r.passed, r.detail) for r in results])
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise InvariantFailure("; ".join(failed), out, text)
    return out, text


def _probe(cfg: ExperimentConfig) -> tuple[dict, str]:
    lset = enumerate_lattice_points(cfg.m)
    s = math.sqrt(cfg.m)
    zs = np.geomspace(cfg.z_min / s, cfg.z_max / s, cfg.z_count)
    res = detsigma_scaling_probe(lset, parse_curve(cfg.curve), cfg.t1, zs)
    out = {"exponent_fit": res.exponent_fit, "coeff_ratio": res.coeff_ratio,
           "coeff_ratio_moments": res.coeff_ratio_moments, "a_of_t": res.a_of_t,
           "z": list(res.z), "p": list(res.p)}
    return out, _csv_text(["z", "p"], zip(res.z, res.p))


def run(cfg: ExperimentConfig) -> tuple[int, str]:
    """Execute one command; returns (exit status, serialized report)."""
    resolved = cfg.resolved()
    status = 0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if cfg.command == "lattice":
                body, text = _lattice(cfg)
            elif cfg.command == "predict":
                body, text = _predict(cfg)
            elif cfg.command == "simulate":
                body, text = _simulate(cfg, cfg.worker_threads)
            elif cfg.command == "verify":
                body, text = _verify(cfg)
            else:
                body, text = _probe(cfg)
    except InvariantFailure as exc:
        status = 1
        failed, body, text = exc.args
        body = dict(body, failed=failed)
        print(f"nodal-torus: invariant failed: {failed}", file=sys.stderr)
    if cfg.format == "csv":
        return status, text
    report = dict(body)
    report["config"] = resolved
    if not cfg.no_meta:
        report["meta"] = _meta(cfg)
    return status, dumps(report)


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
    except _UsageError as exc:
        print(f"nodal-torus: error: {exc}", file=sys.stderr)
        return 2
    try:
        status, text = run(cfg)
    except NodalError as exc:
        print(f"nodal-torus: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
