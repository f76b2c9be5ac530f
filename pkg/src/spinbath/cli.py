"""Command line entry point: ``spinbath run CONFIG`` and ``spinbath trace ...``.

Exit codes: 0 confirmed or inconclusive, 1 refuted, 2 invalid config or
arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import regimes, spectrum
from .couplings import CouplingScheme
from .decoherence import LIMIT, sample_trace
from .errors import (
    EnergyOverflowError,
    InvalidParameterError,
    NoDominantRootError,
    NonMonicError,
    PrecisionExceededError,
    RegimeMismatchError,
    RepeatedRootError,
    SizeLimitError,
    UnsupportedSchemeError,
    VerdictWithheldError,
)
from .pisot import classify_pisot, distance_to_integers, isolate_dominant_root

EXIT_OK, EXIT_REFUTED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

NUMERICAL_ERRORS = (
    PrecisionExceededError,
    RegimeMismatchError,
    UnsupportedSchemeError,
    EnergyOverflowError,
    ArithmeticError,
)

TABLE_NAMES = {
    "trace": "trace.csv",
    "spectrum": "spectrum.csv",
    "cantor": "cantor.csv",
    "clt": "clt.csv",
    "probe": "probe.csv",
    "decay": "decay.csv",
    "lyapunov": "lyapunov.csv",
    "discrepancy": "discrepancy.csv",
    "pisot_classify": "pisot.csv",
}


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    experiment: str
    scheme: str | None = None
    N: int | str | None = None
    N_list: list | None = None
    n: int | None = None
    n_max: int | None = None
    depth: int | None = None
    eps: float | None = None
    guard_bits: int | None = None
    p: int | None = None
    q: int | None = None
    poly: list | None = None
    theta: int | float | str | None = None
    t: float | list | dict | None = None
    windows: list | dict | None = None
    samples_per_window: int | None = None
    tolerance: float | None = None
    floor: float | None = None
    output_dir: str | None = None
    seed: int | None = None

    @classmethod
    def from_dict(cls, data) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a single JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        if "experiment" not in data:
            raise ConfigError("experiment", "missing")
        return cls(**data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def loads(cls, text: str) -> ExperimentConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"not valid JSON ({exc.msg})") from None
        return cls.from_dict(data)


# -- value validation -------------------------------------------------------------


def _int(cfg, name, minimum=None, default=None):
    v = getattr(cfg, name)
    if v is None:
        if default is None:
            raise ConfigError(name, "missing")
        v = default
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(name, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(name, f"must be >= {minimum}")
    setattr(cfg, name, v)
    return v


def _real(cfg, name, default=None, positive=True):
    v = getattr(cfg, name)
    if v is None:
        if default is None:
            raise ConfigError(name, "missing")
        v = default
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(name, f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(name, "must be positive")
    setattr(cfg, name, v)
    return float(v)


def _scheme(cfg):
    if cfg.scheme is None:
        raise ConfigError("scheme", "missing")
    if not isinstance(cfg.scheme, str):
        raise ConfigError("scheme", "expected a string such as 'geomdec:3'")
    try:
        s = CouplingScheme.parse(cfg.scheme)
    except InvalidParameterError as exc:
        raise ConfigError("scheme", str(exc)) from None
    cfg.scheme = s.to_text()
    return s


def _grid(spec, name) -> list[float]:
    if isinstance(spec, dict):
        if set(spec) != {"min", "max", "count"}:
            raise ConfigError(name, "grid needs exactly the keys min, max, count")
        lo, hi, count = spec["min"], spec["max"], spec["count"]
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError(name, "count must be a positive integer")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in (lo, hi)):
            raise ConfigError(name, "min and max must be finite numbers")
        return [float(x) for x in np.linspace(lo, hi, count)]
    if isinstance(spec, list) and spec:
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in spec):
            raise ConfigError(name, "grid entries must be finite numbers")
        return [float(v) for v in spec]
    raise ConfigError(name, "expected {min, max, count} or a nonempty list")


def _int_range(spec, name) -> list[int]:
    if isinstance(spec, dict):
        if set(spec) != {"min", "max"}:
            raise ConfigError(name, "range needs exactly the keys min, max")
        lo, hi = spec["min"], spec["max"]
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (lo, hi)):
            raise ConfigError(name, "min and max must be integers")
        return list(range(lo, hi + 1))
    if isinstance(spec, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in spec):
        return list(spec)
    raise ConfigError(name, "expected {min, max} or a list of integers")


def _poly(cfg):
    if not isinstance(cfg.poly, list) or not cfg.poly:
        raise ConfigError("poly", "expected a list of integer coefficients, constant term first")
    if not all(isinstance(c, int) and not isinstance(c, bool) for c in cfg.poly):
        raise ConfigError("poly", "coefficients must be integers")
    return cfg.poly


def _theta(cfg):
    if cfg.poly is not None:
        try:
            return isolate_dominant_root(_poly(cfg))
        except (NonMonicError, NoDominantRootError, InvalidParameterError) as exc:
            raise ConfigError("poly", str(exc)) from None
    v = cfg.theta
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            pass
    raise ConfigError("theta", "expected an integer, a 'p/q' string, or give 'poly'")


# -- experiments --------------------------------------------------------------------


def _trace(cfg):
    scheme = _scheme(cfg)
    if cfg.N == LIMIT:
        N = LIMIT
    else:
        N = _int(cfg, "N", minimum=1)
    eps = _real(cfg, "eps", default=1e-12)
    times = _grid(cfg.t, "t")
    tr = sample_trace(scheme, N, times, eps)
    ok = all(abs(v) <= 1 for v in tr.values) and all(v == 1.0 for t, v in zip(tr.times, tr.values) if t == 0)
    return regimes.ExperimentReport(
        "trace",
        {},
        {"points": float(len(times))},
        regimes.CONFIRMED if ok else regimes.REFUTED,
        {},
        ("t", "r", "log_abs_r", "sign"),
        list(tr.rows()),
    )


def _spectrum(cfg):
    scheme = _scheme(cfg)
    N = _int(cfg, "N", minimum=1)
    tol = _real(cfg, "tolerance", default=0.05)
    try:
        sample = spectrum.enumerate_spectrum(scheme, N)
    except SizeLimitError as exc:
        raise ConfigError("N", str(exc)) from None
    E, m = sample.energies, sample.multiplicities
    symmetric = bool(np.array_equal(E, -E[::-1]) and np.array_equal(m, m[::-1]))
    total = int(m.sum())
    scalars = {"distinct": float(E.size), "multiplicity_sum": float(total), "max_energy": float(E[-1])}
    ok = symmetric and total == 2**N
    if scheme.kind == "geometric_decaying" and scheme.theta > 2 and N >= 4:
        theta = scheme.theta
        depth = _int(cfg, "depth", minimum=0, default=min(N, 10))
        check = spectrum.spectrum_in_cantor_check(theta, min(N, 20), min(depth, N)) if N <= 20 else None
        fit = spectrum.box_counting_dimension(E, spectrum.natural_scales(theta, 2, N // 2))
        target = math.log(2) / math.log(theta)
        scalars.update({"dimension_estimate": fit.estimate, "dimension_target": target, "fit_residual": fit.residual})
        if check is not None:
            scalars["cantor_contained"] = float(check.contained)
            ok = ok and check.contained
        ok = ok and abs(fit.estimate - target) <= tol
    rows = list(zip(E.tolist(), m.tolist()))
    return regimes.ExperimentReport(
        "spectrum", {}, scalars, regimes.CONFIRMED if ok else regimes.REFUTED, {"symmetric": str(symmetric).lower()}, ("energy", "multiplicity"), rows
    )


def _cantor(cfg):
    theta = _real(cfg, "theta")
    depth = _int(cfg, "depth", minimum=0)
    if depth > 20:
        raise ConfigError("depth", "cantor output is limited to depth 20")
    try:
        models = [spectrum.cantor_intervals(theta, d) for d in range(depth + 1)]
    except InvalidParameterError as exc:
        raise ConfigError("theta", str(exc)) from None
    nested = True
    for coarse, fine in zip(models, models[1:]):
        parent = np.arange(fine.lo.size) // 2
        nested &= bool(np.all(coarse.lo[parent] <= fine.lo) and np.all(fine.hi <= coarse.hi[parent]))
    scalars = {"total_length": float(np.sum(models[-1].hi - models[-1].lo)), "nested": float(nested)}
    if float(theta).is_integer() and depth >= 1:
        mids = models[-1].midpoints()
        scales = spectrum.natural_scales(theta, 0, depth)
        fit = spectrum.box_counting_dimension(mids, scales, anchor=models[0].lo[0])
        scalars.update({"dimension_estimate": fit.estimate, "fit_residual": fit.residual})
    rows = [(d, lo, hi) for d, mdl in enumerate(models) for lo, hi in zip(mdl.lo.tolist(), mdl.hi.tolist())]
    return regimes.ExperimentReport(
        "cantor", {}, scalars, regimes.CONFIRMED if nested else regimes.REFUTED, {}, ("level", "lo", "hi"), rows
    )


def _clt(cfg):
    scheme = _scheme(cfg)
    if cfg.N_list is not None:
        if not isinstance(cfg.N_list, list) or not cfg.N_list or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in cfg.N_list):
            raise ConfigError("N_list", "expected a nonempty list of positive integers")
        N_list = cfg.N_list
    else:
        N_list = [_int(cfg, "N", minimum=1)]
    tol = _real(cfg, "tolerance", default=1e-4)
    return regimes.clt_rescaling_experiment(scheme, N_list, _grid(cfg.t, "t"), tol)


def _probe(cfg):
    theta = _theta(cfg)
    n_max = _int(cfg, "n_max", minimum=0, default=8)
    eps = _real(cfg, "eps", default=1e-12)
    floor = _real(cfg, "floor", default=1e-3)
    return regimes.pisot_probe(theta, n_max, eps, floor)


def _decay(cfg):
    p = _int(cfg, "p", minimum=2)
    q = _int(cfg, "q", minimum=1)
    if cfg.windows is None:
        raise ConfigError("windows", "missing")
    windows = _int_range(cfg.windows, "windows")
    spw = _int(cfg, "samples_per_window", minimum=1, default=2048)
    eps = _real(cfg, "eps", default=1e-9)
    try:
        return regimes.rational_decay_experiment(p, q, windows, spw, eps)
    except InvalidParameterError as exc:
        raise ConfigError("p", str(exc)) from None


def _scalar_t(cfg):
    v = cfg.t
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v == 0:
        raise ConfigError("t", "expected a finite nonzero number")
    return float(v)


def _lyapunov(cfg):
    scheme = _scheme(cfg)
    n = _int(cfg, "n", minimum=1)
    t = _scalar_t(cfg)
    tol = _real(cfg, "tolerance", default=0.05)
    gb = _int(cfg, "guard_bits", minimum=1, default=64)
    return regimes.lyapunov_experiment(scheme, n, t, tol, gb)


def _discrepancy(cfg):
    scheme = _scheme(cfg)
    n = _int(cfg, "n", minimum=1)
    t = _scalar_t(cfg)
    tol = _real(cfg, "tolerance", default=0.05)
    gb = _int(cfg, "guard_bits", minimum=1, default=64)
    return regimes.discrepancy_experiment(scheme, n=n, t=t, tolerance=tol, guard_bits=gb)


def _pisot_classify(cfg):
    try:
        alg = isolate_dominant_root(_poly(cfg))
    except (NonMonicError, NoDominantRootError, InvalidParameterError) as exc:
        raise ConfigError("poly", str(exc)) from None
    n_max = _int(cfg, "n_max", minimum=1, default=30)
    scalars = {"root": alg.root, "root_tolerance": alg.root_tolerance}
    labels = {}
    try:
        v = classify_pisot(alg)
    except VerdictWithheldError as exc:
        scalars["margin"] = exc.margin
        labels["is_pisot"] = "withheld"
        return regimes.ExperimentReport("pisot_classify", {}, scalars, regimes.INCONCLUSIVE, labels, ("n", "distance"), [])
    except RepeatedRootError as exc:
        raise ConfigError("poly", str(exc)) from None
    scalars.update({"is_pisot": float(v.is_pisot), "margin": v.margin, "max_conjugate_modulus": 1 - v.margin})
    labels["is_pisot"] = str(v.is_pisot).lower()
    dist = distance_to_integers(alg, n_max)
    scalars["sum_squares"] = dist.sum_squares
    if dist.decay_ratio is not None:
        scalars["decay_ratio"] = dist.decay_ratio
    rows = [(k, d) for k, d in enumerate(dist.distances, 1)]
    return regimes.ExperimentReport("pisot_classify", {}, scalars, regimes.CONFIRMED, labels, ("n", "distance"), rows)


EXPERIMENTS = {
    "trace": _trace,
    "spectrum": _spectrum,
    "cantor": _cantor,
    "clt": _clt,
    "probe": _probe,
    "decay": _decay,
    "lyapunov": _lyapunov,
    "discrepancy": _discrepancy,
    "pisot_classify": _pisot_classify,
}


# -- output ---------------------------------------------------------------------


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_report(out_dir: Path, cfg: ExperimentConfig, report: regimes.ExperimentReport) -> None:
    name = TABLE_NAMES[cfg.experiment]
    write_csv(out_dir / name, report.columns, report.rows)
    report.table = name
    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    with open(out_dir / "report.json", "w") as fh:
        json.dump(_json_safe(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")


def run(config_path) -> int:
    """Run the experiment described by a JSON config file; returns the exit code."""
    try:
        text = Path(config_path).read_text()
        cfg = ExperimentConfig.loads(text)
        if cfg.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {cfg.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if cfg.seed is not None:
            _int(cfg, "seed", minimum=0)
        out_dir = Path(cfg.output_dir if cfg.output_dir is not None else ".")
        if cfg.output_dir is not None and not isinstance(cfg.output_dir, str):
            raise ConfigError("output_dir", "expected a path string")
        report = EXPERIMENTS[cfg.experiment](cfg)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParameterError as exc:
        print(f"error: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report.parameters = cfg.to_dict() | report.parameters
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(out_dir, cfg, report)
    extra = "".join(f" {k}={v}" for k, v in sorted(report.labels.items()))
    print(f"{cfg.experiment}: {report.verdict}{extra}")
    return EXIT_REFUTED if report.verdict == regimes.REFUTED else EXIT_OK


def trace_command(args) -> int:
    try:
        scheme = CouplingScheme.parse(args.scheme)
    except InvalidParameterError as exc:
        print(f"error: --scheme: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.points < 1:
        print("error: --points must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if not args.eps > 0:
        print("error: --eps must be positive", file=sys.stderr)
        return EXIT_CONFIG
    N = LIMIT if args.limit else args.N
    if N != LIMIT and N < 1:
        print("error: --N must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    times = np.linspace(args.t_min, args.t_max, args.points)
    try:
        tr = sample_trace(scheme, N, times, args.eps)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, ("t", "r", "log_abs_r", "sign"), tr.rows())
    print(f"trace: wrote {len(times)} rows to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinbath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config", help="path to the JSON config file")

    p_tr = sub.add_parser("trace", help="sample r_N(t) or r(t) on a uniform grid")
    p_tr.add_argument("--scheme", required=True, help="e.g. constant:1, geomdec:3, ratdec:5/2, explicit:1,2")
    mode = p_tr.add_mutually_exclusive_group(required=True)
    mode.add_argument("--N", type=int, help="number of bath spins")
    mode.add_argument("--limit", action="store_true", help="infinite-bath limit (decaying schemes)")
    p_tr.add_argument("--t-min", type=float, required=True)
    p_tr.add_argument("--t-max", type=float, required=True)
    p_tr.add_argument("--points", type=int, required=True)
    p_tr.add_argument("--eps", type=float, default=1e-12, help="absolute accuracy in limit mode")
    p_tr.add_argument("--out", required=True, help="output CSV path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run(args.config)
    return trace_command(args)


if __name__ == "__main__":
    sys.exit(main())
