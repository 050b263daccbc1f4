"""Parameter-family sweeps: atlases of dimension reports, a continuity
statistic along segments and a sub-mean-value check on circles."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

from . import dimension, maps, orbits, oracle
from .errors import HenonDimError
from .pressure import format_number

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex
    count: int

    def params(self):
        if self.count == 1:
            return [complex(self.start)]
        return [complex(self.start) + (complex(self.end) - complex(self.start)) * k / (self.count - 1)
                for k in range(self.count)]


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float
    count: int

    def params(self):
        return [complex(self.center) + self.radius * complex(math.cos(2 * math.pi * k / self.count),
                                                              math.sin(2 * math.pi * k / self.count))
                for k in range(self.count)]


@dataclass(frozen=True)
class Slot:
    """Which parameter varies.

    ``kind`` is ``"coeff"`` (coefficient ``index`` of factor ``factor``),
    ``"a"`` (jacobian parameter of factor ``factor``), ``"branch_log"``
    (entry ``index`` of a linear model) or ``"log_a"`` (linear model).
    Linear-model slots use the real part of the parameter.
    """

    kind: str
    factor: int = 0
    index: int = 0


def horseshoe_guard(g: maps.HenonMap) -> bool:
    """``|c| > 2 (1 + |a|)^2`` for a single monic quadratic factor ``w**2 + c``."""
    (f,) = g.factors
    return abs(f.coeffs[0]) > 2 * (1 + abs(f.a)) ** 2


def _default_guard_applies(template, slot) -> bool:
    if not isinstance(template, maps.HenonMap) or len(template.factors) != 1:
        return False
    f = template.factors[0]
    quad_monic = f.degree == 2 and f.coeffs[2] == 1 and f.coeffs[1] == 0
    return quad_monic and slot.kind in ("coeff", "a") and (slot.kind == "a" or slot.index == 0)


@dataclass(frozen=True)
class FamilySpec:
    template: Union[maps.HenonMap, oracle.LinearModel]
    slot: Slot
    samples: Union[Segment, Circle]
    guard: Optional[Callable] = None

    def params(self):
        return self.samples.params()

    def member(self, param: complex):
        s, t = self.slot, self.template
        if isinstance(t, oracle.LinearModel):
            if s.kind == "branch_log":
                logs = list(t.branch_logs)
                logs[s.index] = param.real
                return oracle.LinearModel(logs, t.log_a)
            if s.kind == "log_a":
                return oracle.LinearModel(t.branch_logs, param.real)
            raise ValueError(f"slot {s.kind!r} does not apply to a linear model")
        factors = list(t.factors)
        f = factors[s.factor]
        if s.kind == "coeff":
            coeffs = list(f.coeffs)
            coeffs[s.index] = param
            factors[s.factor] = maps.HenonFactor(tuple(coeffs), f.a)
        elif s.kind == "a":
            factors[s.factor] = maps.HenonFactor(f.coeffs, param)
        else:
            raise ValueError(f"slot {s.kind!r} does not apply to a Hénon map")
        return maps.HenonMap(tuple(factors))

    def validate(self):
        """Reject families with a sample outside the configured horseshoe guard."""
        if isinstance(self.template, oracle.LinearModel):
            for p in self.params():
                self.member(p)
            return
        guard = self.guard
        if guard is None:
            if not _default_guard_applies(self.template, self.slot):
                raise ValueError("this template needs an explicit horseshoe guard")
            guard = horseshoe_guard
        for p in self.params():
            if not guard(self.member(p)):
                raise ValueError(f"parameter {p} violates the horseshoe guard")


@dataclass(frozen=True)
class SweepRecord:
    param: complex
    t_u: float
    t_s: float
    dim_J: float
    d_g: float
    gap: float
    n_max: int
    status: str
    err_est: float = math.nan


SWEEP_COLUMNS = ("param_re", "param_im", "t_u", "t_s", "dim_J", "d_g", "gap", "n_max", "status")


@dataclass
class SweepResult:
    records: list
    continuity: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in self.records:
            w.writerow(
                [format_number(r.param.real), format_number(r.param.imag)]
                + [format_number(x) for x in (r.t_u, r.t_s, r.dim_J, r.d_g, r.gap)]
                + [str(r.n_max), r.status]
            )
        return buf.getvalue()


def cache_path(cache_dir, member, n_max) -> str:
    return os.path.join(cache_dir, f"orbits_{member.fingerprint()}_n{n_max}.csv")


def library_for(member, n_max: int, cache_dir=None, jobs: int = 1, refresh: bool = False):
    """Orbit library for a map (cached when ``cache_dir`` is set) or a linear model.

    An unreadable or mismatched cache file is logged and rebuilt.
    """
    if isinstance(member, oracle.LinearModel):
        return oracle.synthetic_library(member, n_max)
    path = None
    if cache_dir:
        path = cache_path(cache_dir, member, n_max)
        if os.path.exists(path) and not refresh:
            try:
                return orbits.cache_load(path, member)
            except HenonDimError as exc:
                log.warning("ignoring cache %s: %s", path, exc)
    lib = orbits.enumerate_orbits(member, n_max, jobs=jobs)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        orbits.cache_store(lib, path)
    return lib


def _evaluate(args):
    member, param, n_max, tol, cache_dir = args
    try:
        lib = library_for(member, n_max, cache_dir)
        rep = dimension.dimension_report(lib, n_max, tol)
    except HenonDimError as exc:
        nan = math.nan
        return SweepRecord(param, nan, nan, nan, nan, nan, n_max, exc.tag)
    return SweepRecord(param, rep.t_u, rep.t_s, rep.dim_J, rep.d_g, rep.gap, n_max, "ok", rep.err_est)


def _continuity(records, closed=False):
    vals = [r.d_g for r in records]
    pairs = list(zip(vals, vals[1:]))
    if closed and len(vals) > 2:
        pairs.append((vals[-1], vals[0]))
    diffs = [abs(b - a) for a, b in pairs if not (math.isnan(a) or math.isnan(b))]
    return max(diffs) if diffs else 0.0


def sweep(family: FamilySpec, n_max: int, tol: float = 1e-9, jobs: int = 1, cache_dir=None) -> SweepResult:
    """One dimension report per family sample, in sample order.

    Failures are recorded in ``status`` and never abort the sweep.
    """
    family.validate()
    tasks = [(family.member(p), p, n_max, tol, cache_dir) for p in family.params()]
    workers = jobs if jobs > 0 else (os.cpu_count() or 1)
    if workers == 1 or len(tasks) == 1:
        records = [_evaluate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            records = list(pool.map(_evaluate, tasks))
    return SweepResult(records, _continuity(records, closed=isinstance(family.samples, Circle)))


@dataclass
class SubmeanResult:
    center_value: float
    circle_mean: float
    margin: float
    err_budget: float
    violation: bool
    status: str

    def to_text(self) -> str:
        f = format_number
        return (
            f"center_value={f(self.center_value)}\ncircle_mean={f(self.circle_mean)}\n"
            f"margin={f(self.margin)}\nerr_budget={f(self.err_budget)}\n"
            f"violation={str(self.violation).lower()}\nstatus={self.status}\n"
        )


def submean_check(family: FamilySpec, n_max: int, tol: float = 1e-9, jobs: int = 1, cache_dir=None) -> SubmeanResult:
    """Compare ``d(g)`` at the circle's centre with its mean over the circle.

    A violation is flagged only when the mean falls below the centre value by
    more than twice the largest estimator error among the samples.
    """
    if not isinstance(family.samples, Circle) or family.samples.count < 8:
        raise ValueError("submean_check needs a circle family with at least 8 samples")
    center = replace(family, samples=Segment(family.samples.center, family.samples.center, 1))
    around = sweep(family, n_max, tol, jobs, cache_dir).records
    mid = sweep(center, n_max, tol, 1, cache_dir).records[0]
    everything = around + [mid]
    bad = [r.status for r in everything if r.status != "ok"]
    if bad:
        nan = math.nan
        return SubmeanResult(nan, nan, nan, nan, False, bad[0])
    mean = math.fsum(r.d_g for r in around) / len(around)
    budget = 2 * max(r.err_est for r in everything)
    margin = mean - mid.d_g
    return SubmeanResult(mid.d_g, mean, margin, budget, margin < -budget, "ok")

