"""Experiment harness: synthetic data, configs, sweeps and reports."""

import csv
import dataclasses
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .costsim import MethodSpec, fit_scaling_exponent, run_phased
from .errors import InvalidInputError, ParseError
from .methods import MethodTag, PpcaMode, pca_cov_eig
from .mmio import load_matrix

AXES = ("N", "D", "d", "P")
DEFAULT_MAX_ELEMS = 10 ** 7
MAX_ELEMS_ENV = "PCA_COSTLAB_MAX_ELEMS"


class SweepPointError(RuntimeError):
    def __init__(self, axis, value, cause):
        where = f"sweep point {axis}={value}" if axis else "experiment"
        super().__init__(f"{where} failed: {type(cause).__name__}: {cause}")
        self.axis = axis
        self.value = value


def gen_synthetic(N, D, rank, noise_sigma=0.0, seed=0):
    """``G1 G2' + noise_sigma * E`` with standard-normal ``G1``, ``G2``, ``E``."""
    if N < 1 or D < 1:
        raise InvalidInputError(f"N and D must be positive, got N={N}, D={D}")
    if not 1 <= rank <= min(N, D):
        raise InvalidInputError(f"rank={rank} outside [1, min(N, D)={min(N, D)}]")
    if noise_sigma < 0:
        raise InvalidInputError("noise_sigma must be non-negative")
    rng = np.random.default_rng(seed)
    G1 = rng.standard_normal((N, rank))
    G2 = rng.standard_normal((D, rank))
    E = rng.standard_normal((N, D))
    return G1 @ G2.T + noise_sigma * E


def largest_principal_angle(U, V):
    """Largest principal angle (radians) between the column spans of U and V."""
    Qu, _ = np.linalg.qr(np.asarray(U, dtype=np.float64))
    Qv, _ = np.linalg.qr(np.asarray(V, dtype=np.float64))
    resid = Qv - Qu @ (Qu.T @ Qv)
    s = np.linalg.norm(resid, 2) if resid.size else 0.0
    return float(np.arcsin(min(1.0, s)))


def _int(text):
    return int(text)


def _values(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(",", " ").split())


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_str(text):
    return str(text) if text not in (None, "") else None


_FIELD_TYPES = {
    "n": _int, "d_dims": _int, "rank": _int, "noise": float, "seed": _int,
    "data": _opt_str, "method": str, "target_d": _int, "p": _int, "j": _int,
    "iters": _int, "tol": float, "mode": str, "workers": _int,
    "sweep_axis": _opt_str, "sweep_values": _values, "out": _opt_str,
    "format": str, "allow_large": _bool,
}


@dataclass
class ExperimentConfig:
    n: int = 256
    d_dims: int = 16
    rank: int = None
    noise: float = 0.0
    seed: int = 0
    data: str = None
    method: str = "coveig"
    target_d: int = 2
    p: int = 5
    j: int = 2
    iters: int = 100
    tol: float = 1e-6
    mode: str = "standard"
    workers: int = 2
    sweep_axis: str = None
    sweep_values: tuple = ()
    out: str = None
    format: str = "json"
    allow_large: bool = False

    def validate(self):
        try:
            MethodTag(self.method)
            PpcaMode(self.mode)
        except ValueError as exc:
            raise InvalidInputError(str(exc)) from None
        if self.format not in ("json", "csv"):
            raise InvalidInputError(f"format must be json or csv, got {self.format!r}")
        if self.sweep_axis is not None:
            if self.sweep_axis not in AXES:
                raise InvalidInputError(f"sweep axis must be one of {AXES}")
            vals = self.sweep_values
            if len(vals) < 3:
                raise InvalidInputError("a sweep needs at least 3 values")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise InvalidInputError("sweep values must be strictly increasing")
            if self.data and self.sweep_axis in ("N", "D"):
                raise InvalidInputError("cannot sweep N or D over a loaded data file")
        return self

    def at(self, axis, value):
        key = {"N": "n", "D": "d_dims", "d": "target_d", "P": "workers"}[axis]
        return dataclasses.replace(self, **{key: value})

    def method_spec(self):
        return MethodSpec(MethodTag(self.method), self.target_d, p=self.p, j=self.j,
                          max_iter=self.iters, tol=self.tol, mode=PpcaMode(self.mode),
                          seed=self.seed)

    def echo(self):
        out = dataclasses.asdict(self)
        out["sweep_values"] = list(self.sweep_values)
        out.pop("out")
        return out


def parse_config_text(text, path=None):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ParseError(f"unknown key {key!r}", lineno, path)
        try:
            values[key] = _FIELD_TYPES[key](val)
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", lineno, path) from None
    return values


def load_config(path=None, **overrides):
    values = {}
    if path is not None:
        with open(path) as fh:
            values = parse_config_text(fh.read(), path)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values).validate()


@dataclass
class SweepRow:
    value: object
    total_flops: int
    total_intermediate_elements: int
    subspace_error: float
    iterations_used: int
    converged: bool
    cost: object = field(repr=False, default=None)

    def to_dict(self):
        return {
            "value": self.value,
            "total_flops": self.total_flops,
            "total_intermediate_elements": self.total_intermediate_elements,
            "subspace_error": self.subspace_error,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
        }


@dataclass
class SweepReport:
    axis: str
    rows: list
    config: dict
    flop_exponent: float = None
    communication_exponent: float = None

    def fit(self):
        if self.axis is not None and len(self.rows) >= 3:
            self.flop_exponent = fit_scaling_exponent(
                [(r.value, r.total_flops) for r in self.rows])
            self.communication_exponent = fit_scaling_exponent(
                [(r.value, r.total_intermediate_elements) for r in self.rows])
        return self

    def to_dict(self):
        return {
            "axis": self.axis,
            "rows": [r.to_dict() for r in self.rows],
            "flop_exponent": self.flop_exponent,
            "communication_exponent": self.communication_exponent,
            "config": self.config,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["axis_value", "total_flops", "total_intermediate_elements",
                    "subspace_error"])
        for r in self.rows:
            err = "" if r.subspace_error is None else repr(r.subspace_error)
            w.writerow([r.value, r.total_flops, r.total_intermediate_elements, err])
        return buf.getvalue()

    def summary(self):
        lines = [f"method={self.config['method']} axis={self.axis or '-'}"]
        for r in self.rows:
            err = "skipped" if r.subspace_error is None else f"{r.subspace_error:.3e}"
            lines.append(f"  {self.axis or 'point'}={r.value}: flops={r.total_flops} "
                         f"intermediate={r.total_intermediate_elements} "
                         f"iters={r.iterations_used} subspace_err={err}")
        if self.flop_exponent is not None:
            lines.append(f"  flop exponent={self.flop_exponent:.3f} "
                         f"communication exponent={self.communication_exponent:.3f}")
        return "\n".join(lines)


def _max_elems():
    raw = os.environ.get(MAX_ELEMS_ENV)
    return int(raw) if raw else DEFAULT_MAX_ELEMS


def _dataset(cfg):
    if cfg.data:
        A = load_matrix(cfg.data)
    else:
        rank = cfg.rank if cfg.rank is not None else cfg.target_d
        N, D = cfg.n, cfg.d_dims
        if N * D > _max_elems() and not cfg.allow_large:
            raise InvalidInputError(
                f"N*D = {N * D} exceeds the {_max_elems()} element guardrail "
                f"(set {MAX_ELEMS_ENV} or allow_large)")
        A = gen_synthetic(N, D, rank, cfg.noise, cfg.seed)
    if A.size > _max_elems() and not cfg.allow_large:
        raise InvalidInputError(f"matrix with {A.size} elements exceeds the guardrail")
    return A


def run_point(cfg):
    """Run one configuration; returns ``(PCAResult, CostReport, subspace_error)``."""
    A = _dataset(cfg)
    spec = cfg.method_spec()
    result, report = run_phased(spec, A, cfg.workers)
    err = None
    if spec.tag is not MethodTag.COV_EIG:
        oracle = pca_cov_eig(A, spec.d)
        err = largest_principal_angle(result.components, oracle.components)
    return result, report, err


def run_experiment(config, stream=None):
    """Run every sweep point (or the single configured point) in order."""
    config.validate()
    axis = config.sweep_axis
    points = [(v, config.at(axis, v)) for v in config.sweep_values] if axis else [(None, config)]
    rows = []
    for value, cfg in points:
        try:
            result, report, err = run_point(cfg)
        except Exception as exc:
            raise SweepPointError(axis, value, exc) from exc
        rows.append(SweepRow(value, report.total_flops, report.total_intermediate_elements,
                             err, result.iterations_used, bool(result.converged), report))
    sweep = SweepReport(axis, rows, config.echo()).fit()
    if stream is not None:
        print(sweep.summary(), file=stream)
    return sweep


def write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)
