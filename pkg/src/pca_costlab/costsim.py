"""Phase-based simulator for distributed PCA execution.

The input rows are split across ``P`` logical workers. Each method is
described as an ordered list of synchronous phases; at every phase boundary
the ledger records the intermediate matrices that would be shipped, counted
in elements (8 bytes each). Worker 0 doubles as the driver for phases that
run on a single node.

Simulation never changes arithmetic: the method runs exactly once through its
direct implementation, with a flop counter that tags work by phase. The
ledger is then assembled from those tagged counts and from the emission
formulas of each phase plan.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .flops import FlopCounter
from .linalg import as_matrix
from .methods import (MethodTag, PpcaMode, PpcaParams, SsvdParams, pca_cov_eig,
                      pca_svd_bidiag, ppca_em, ssvd)

BYTES_PER_ELEMENT = 8


@dataclass(frozen=True)
class WorkerPartition:
    worker_id: int
    start: int
    stop: int

    @property
    def rows(self):
        return self.stop - self.start


def partition_rows(N, P):
    """Balanced, disjoint cover of ``range(N)`` by ``P`` half-open ranges."""
    if not 1 <= P <= N:
        raise InvalidInputError(f"need 1 <= P <= N, got N={N}, P={P}")
    base, extra = divmod(N, P)
    parts = []
    start = 0
    for w in range(P):
        stop = start + base + (1 if w < extra else 0)
        parts.append(WorkerPartition(w, start, stop))
        start = stop
    return parts


@dataclass
class Phase:
    """One synchronous phase.

    ``emitted`` lists matrices produced by the workers (or driver) at the end
    of the phase; ``broadcast`` lists matrices the driver sends to every
    worker before the phase runs. Both are ``(label, elements)`` pairs and
    both count towards the intermediate total.
    """

    name: str
    local_flops: list
    emitted: list = field(default_factory=list)
    broadcast: list = field(default_factory=list)
    distributed: bool = True

    def __post_init__(self):
        for label, n in list(self.emitted) + list(self.broadcast):
            if n < 0:
                raise InvalidInputError(f"negative element count for {label!r}")

    @property
    def flops(self):
        return sum(self.local_flops)

    @property
    def emitted_elements(self):
        return sum(n for _, n in self.emitted)

    @property
    def broadcast_elements(self):
        return sum(n for _, n in self.broadcast)

    @property
    def intermediate_elements(self):
        return self.emitted_elements + self.broadcast_elements

    def to_dict(self):
        return {
            "name": self.name,
            "distributed": self.distributed,
            "local_flops": list(self.local_flops),
            "emitted": [{"label": k, "elements": n} for k, n in self.emitted],
            "broadcast": [{"label": k, "elements": n} for k, n in self.broadcast],
            "emitted_elements": self.emitted_elements,
            "broadcast_elements": self.broadcast_elements,
        }


@dataclass
class CostReport:
    phases: list
    params_echo: dict
    total_flops: int = 0
    total_intermediate_elements: int = 0
    total_intermediate_bytes: int = 0

    def __post_init__(self):
        self.recompute_totals()

    def recompute_totals(self):
        self.total_flops = sum(p.flops for p in self.phases)
        self.total_intermediate_elements = sum(p.intermediate_elements for p in self.phases)
        self.total_intermediate_bytes = BYTES_PER_ELEMENT * self.total_intermediate_elements
        return self

    @property
    def workers(self):
        return self.params_echo["P"]

    def phase(self, name):
        for p in self.phases:
            if p.name == name:
                return p
        raise KeyError(name)

    def phases_matching(self, prefix):
        return [p for p in self.phases if p.name.startswith(prefix)]

    def fanout_elements(self):
        """Intermediate total if every broadcast is charged once per worker."""
        P = self.workers
        return sum(p.emitted_elements + P * p.broadcast_elements for p in self.phases)

    def to_dict(self):
        return {
            "phases": [p.to_dict() for p in self.phases],
            "totals": {
                "flops": self.total_flops,
                "intermediate_elements": self.total_intermediate_elements,
                "intermediate_bytes": self.total_intermediate_bytes,
                "fanout_elements": self.fanout_elements(),
            },
            "params_echo": dict(self.params_echo),
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent) + "\n"

    def to_csv(self, fanout=False):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["phase_name", "worker_flops_total", "emitted_elements", "broadcast_elements"]
        if fanout:
            header.append("fanout_elements")
        writer.writerow(header)
        for p in self.phases:
            row = [p.name, p.flops, p.emitted_elements, p.broadcast_elements]
            if fanout:
                row.append(p.emitted_elements + self.workers * p.broadcast_elements)
            writer.writerow(row)
        return buf.getvalue()


@dataclass(frozen=True)
class MethodSpec:
    """Method selection plus every tunable a method may need."""

    tag: MethodTag
    d: int
    p: int = 5
    j: int = 2
    max_iter: int = 100
    tol: float = 1e-6
    mode: PpcaMode = PpcaMode.STANDARD
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.tag, MethodTag):
            object.__setattr__(self, "tag", MethodTag(self.tag))
        if not isinstance(self.mode, PpcaMode):
            object.__setattr__(self, "mode", PpcaMode(self.mode))

    def ssvd_params(self):
        return SsvdParams(self.d, self.p, self.j, self.seed)

    def ppca_params(self):
        return PpcaParams(self.d, self.max_iter, self.tol, self.mode, self.seed)

    def run(self, A, counter=None):
        """Run the direct, in-memory implementation."""
        if self.tag is MethodTag.COV_EIG:
            return pca_cov_eig(A, self.d, counter=counter)
        if self.tag is MethodTag.SVD_BIDIAG:
            return pca_svd_bidiag(A, self.d, counter=counter)
        if self.tag is MethodTag.SSVD:
            return ssvd(A, self.ssvd_params(), counter=counter)
        return ppca_em(A, self.ppca_params(), counter=counter)

    def echo(self):
        out = {"method": self.tag.value, "d": self.d}
        if self.tag is MethodTag.SSVD:
            out.update(p=self.p, j=self.j, seed=self.seed)
        elif self.tag is MethodTag.PPCA:
            out.update(max_iter=self.max_iter, tol=self.tol, mode=self.mode.value,
                       seed=self.seed)
        return out


def _split(total, parts):
    # Largest-remainder apportionment of `total` flops by partition row share.
    N = sum(p.rows for p in parts)
    exact = [total * p.rows / N for p in parts]
    shares = [math.floor(x) for x in exact]
    short = total - sum(shares)
    order = sorted(range(len(parts)), key=lambda w: (shares[w] - exact[w], w))
    for w in order[:short]:
        shares[w] += 1
    return shares


def _driver(total, P):
    return [total] + [0] * (P - 1)


def _coveig_plan(N, D, d, P, result):
    return [
        ("column_sums", True, [("column_sums", P * D)], []),
        ("partial_gram", True, [("partial_gram", P * D * D)], [("mean", D)]),
        ("eigensolve", False, [("components", D * d)], []),
    ]


def _svd_plan(N, D, d, P, result):
    return [
        ("column_sums", True, [("column_sums", P * D)], []),
        ("qr", True, [("local_R", P * D * D), ("Q", N * d)], [("mean", D)]),
        ("bidiagonalize", False, [("U1", d * d), ("B", D * d), ("V1", D * D)], []),
        ("bidiag_svd", False, [("U2", d * d), ("Sigma", D * d), ("V2", D * D)], []),
        ("assemble", True, [("components", D * d)], []),
    ]


def _ssvd_plan(N, D, d, P, result, l, j):
    plan = [
        ("column_sums", True, [("column_sums", P * D)], []),
        ("sample", True, [("Z", N * l)], [("mean", D), ("Omega", D * l)]),
    ]
    for t in range(1, j + 1):
        plan.append((f"power_{t}", True, [("AtZ", D * l), ("Z", N * l)], []))
    plan += [
        ("qr", True, [("local_R", P * l * l), ("Q", N * l)], []),
        ("project", True, [("B_partial", P * l * D)], []),
        ("small_eig", False, [("components", D * d)], []),
    ]
    return plan


def _ppca_plan(N, D, d, P, result, mode):
    plan = [("column_sums", True, [("column_sums", P * D)], [])]
    stats = ("stats", P * (d * d + D * d))
    for t in range(1, result.iterations_used + 1):
        broadcast = [("C", D * d), ("sigma2", 1)]
        if t == 1:
            broadcast.insert(0, ("mean", D))
        if mode is PpcaMode.STANDARD:
            emitted = [("X", N * d), stats]
        else:
            emitted = [stats, ("C_update", D * d)]
        plan.append((f"em_{t}", True, emitted, broadcast))
    plan.append(("orthonormalize", True,
                 [("partial_proj_cov", P * d * d), ("components", D * d)], []))
    return plan


def run_phased(method, A, P):
    """Run ``method`` on ``A`` over ``P`` simulated workers.

    Returns ``(PCAResult, CostReport)``. The result is bit-identical to
    ``method.run(A)``.
    """
    A = as_matrix(A)
    N, D = A.shape
    parts = partition_rows(N, P)
    counter = FlopCounter()
    result = method.run(A, counter=counter)
    d = method.d

    if method.tag is MethodTag.COV_EIG:
        plan = _coveig_plan(N, D, d, P, result)
    elif method.tag is MethodTag.SVD_BIDIAG:
        plan = _svd_plan(N, D, d, P, result)
    elif method.tag is MethodTag.SSVD:
        plan = _ssvd_plan(N, D, d, P, result, method.d + method.p, method.j)
    else:
        plan = _ppca_plan(N, D, d, P, result, method.mode)

    # Recompute mode redoes X = Y C M^-1 in both data passes instead of shipping it.
    recompute_extra = 0
    if method.tag is MethodTag.PPCA and method.mode is PpcaMode.RECOMPUTE:
        recompute_extra = 2 * (2 * N * D * d)

    known = {name for name, *_ in plan}
    stray = [k for k, v in counter.by_phase.items() if k not in known and v]
    if stray:
        raise RuntimeError(f"untracked flops in phases {stray}")

    phases = []
    for name, distributed, emitted, broadcast in plan:
        flops = counter.by_phase.get(name, 0)
        if name.startswith("em_"):
            flops += recompute_extra
        local = _split(flops, parts) if distributed else _driver(flops, P)
        phases.append(Phase(name, local, emitted, broadcast, distributed))

    echo = {"N": N, "D": D, "P": P}
    echo.update(method.echo())
    echo["iterations_used"] = result.iterations_used
    return result, CostReport(phases, echo)


def fit_scaling_exponent(series):
    """Least-squares slope of ``log(measure)`` against ``log(scale)``."""
    pts = [(float(x), float(y)) for x, y in series]
    if len(pts) < 3:
        raise InvalidInputError("need at least 3 points to fit an exponent")
    if any(not (x > 0 and y > 0) for x, y in pts):
        raise InvalidInputError("scales and measures must be positive")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
