"""Exactly solvable reference models.

A :class:`LinearModel` is a full shift on ``d`` symbols whose unstable
log-multiplier is locally constant: symbol ``i`` contributes ``branch_logs[i]``
and the jacobian modulus is ``exp(log_a)``.  The pressure is then
``log sum_i exp(-t * l_i)`` exactly, and periodic-orbit sums reproduce it at
every period, which makes the model a reference for the whole pipeline.

The closed-form report is computed with scipy root finders and a bounded
scalar minimizer, independently of :mod:`henondim.dimension`'s own solvers.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import dimension, pressure
from .errors import BudgetExceededError
from .orbits import OrbitLibrary, PeriodicOrbit, necklace_count, primitive_words

WORD_BUDGET = 2**22
EXACT_N = math.inf


@dataclass(frozen=True)
class LinearModel:
    branch_logs: tuple
    log_a: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "branch_logs", tuple(float(x) for x in self.branch_logs))
        object.__setattr__(self, "log_a", float(self.log_a))
        if len(self.branch_logs) < 2:
            raise ValueError("a linear model needs at least two branches")
        if not all(x > 0 for x in self.branch_logs):
            raise ValueError("branch log-multipliers must be positive")
        if self.log_a > 0:
            raise ValueError("log_a must be <= 0")

    @property
    def degree(self) -> int:
        return len(self.branch_logs)

    n_max = EXACT_N

    def fingerprint(self) -> str:
        text = json.dumps({"branch_logs": list(self.branch_logs), "log_a": self.log_a})
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def _moments(self, t):
        ell = np.array(self.branch_logs)
        x = -t * ell
        top = float(np.max(x))
        e = np.exp(x - top)
        s = math.fsum(e)
        w = e / s
        mean = math.fsum(w * ell)
        var = math.fsum(w * (ell - mean) ** 2)
        return top + math.log(s), mean, var

    def sample(self, t: float) -> pressure.PressureSample:
        return exact_sample(self, t)


def exact_sample(model: LinearModel, t: float) -> pressure.PressureSample:
    """Closed-form pressure sample; ``n_used`` is ``inf`` and ``err_est`` zero."""
    p, mean, var = model._moments(t)
    return pressure.make_sample(t, p, mean, -var, model.log_a, EXACT_N, 0.0, P_u_avg=p)


def _closed_pressure(model, t, side):
    p = model._moments(t)[0]
    return p if side == "u" else p + t * model.log_a


def _root(model, side):
    f = lambda t: _closed_pressure(model, t, side)
    hi = 1.0
    while f(hi) > 0:
        hi *= 2
    return optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def exact_report(model: LinearModel) -> dimension.DimensionReport:
    """Dimension report computed from the closed forms."""
    ell = model.branch_logs
    d = model.degree
    affine = max(ell) == min(ell)
    if affine:
        t_u = math.log(d) / ell[0]
        t_s = math.log(d) / (ell[0] - model.log_a)
    else:
        t_u = _root(model, "u")
        t_s = _root(model, "s")
    delta = lambda t: exact_sample(model, t).Delta
    ddelta = lambda t: exact_sample(model, t).dDelta
    if affine or t_u - t_s <= 1e-15:
        t_star, d_g = t_u, (t_u + t_s if affine else delta(t_u))
    else:
        res = optimize.minimize_scalar(
            lambda t: -delta(t), bounds=(t_s, t_u), method="bounded", options={"xatol": 1e-10}
        )
        lo, hi = res.x - 1e-6, res.x + 1e-6
        while ddelta(lo) <= 0:
            lo -= 1e-6
        while ddelta(hi) >= 0:
            hi += 1e-6
        t_star = optimize.brentq(ddelta, lo, hi, xtol=1e-15)
        d_g = delta(t_star)
    s = exact_sample(model, t_star)
    resid = abs(s.Delta - dimension.corollary_value(t_star, s.P_u, s.Lambda, model.log_a))
    curve = pressure.build_curve(model, [float(t) for t in np.linspace(0.0, t_u, 201)])
    diag = dimension.full_dimension_diagnostics(model, curve, t_u)
    return dimension.DimensionReport(
        t_u=t_u,
        t_s=t_s,
        dim_J=t_u + t_s,
        maximizers=[(t_star, d_g)],
        d_g=d_g,
        gap=t_u + t_s - d_g,
        formula_residual=resid,
        diagnostics=diag,
        err_est=0.0,
        n_max=EXACT_N,
    )


def synthetic_library(model: LinearModel, n_max: int) -> OrbitLibrary:
    """All primitive cycles of the shift up to ``n_max`` with exact log-multipliers.

    Points are zeros and the library is flagged synthetic, so geometric
    closure checks do not apply.
    """
    d = model.degree
    total = sum(d**n for n in range(1, n_max + 1))
    if total > WORD_BUDGET:
        raise BudgetExceededError(f"{total} words exceed the budget of {WORD_BUDGET}", n_max=n_max)
    orbits = {}
    for n in range(1, n_max + 1):
        row = []
        for it in primitive_words(d, n):
            lu = math.fsum(model.branch_logs[s] for s in it.word)
            row.append(
                PeriodicOrbit(
                    period=n, itinerary=it, z0=0j, w0=0j, log_mult_u=lu, mult_u_arg=0.0,
                    residual=0.0, log_mult_s=n * model.log_a - lu,
                    points=((0j, 0j),) * n, synthetic=True,
                )
            )
        assert len(row) == necklace_count(d, n)
        orbits[n] = row
    return OrbitLibrary(
        map_fingerprint=model.fingerprint(),
        degree=d,
        log_a=model.log_a,
        n_max=n_max,
        orbits=orbits,
        complete={n: True for n in range(1, n_max + 1)},
        synthetic=True,
    )


REFERENCE_MODELS = {
    "symmetric-4-volume-preserving": LinearModel((math.log(4), math.log(4)), 0.0),
    "asymmetric-2-8-volume-preserving": LinearModel((math.log(2), math.log(8)), 0.0),
    "asymmetric-2-8-a-0.25": LinearModel((math.log(2), math.log(8)), math.log(0.25)),
}


def selftest(models=None, n_max: int = 10, tol: float = 1e-9) -> list:
    """Run the pipeline against the closed forms.

    Returns ``(name, passed, detail)`` triples.
    """
    models = REFERENCE_MODELS if models is None else models
    out = []
    for name, model in models.items():
        lib = synthetic_library(model, n_max)
        ev = pressure.LibraryPressure(lib, n_max)
        worst = 0.0
        for t in (0.0, 0.5, 1.0, 2.0):
            a, b = ev.sample(t), exact_sample(model, t)
            worst = max(worst, *(abs(getattr(a, k) - getattr(b, k)) for k in ("P_u", "P_s", "Lambda", "h", "Delta")))
        out.append((f"{name}:samples", worst <= 1e-12, f"max deviation {worst:.3g}"))

        rep = dimension.dimension_report(lib, n_max, tol)
        ref = exact_report(model)
        dev = max(abs(getattr(rep, k) - getattr(ref, k)) for k in ("t_u", "t_s", "dim_J", "d_g", "gap"))
        out.append((f"{name}:report", dev <= 1e-8, f"max field deviation {dev:.3g}"))

        eps = 1e-4
        fd = 0.0
        for t in (0.25, 0.5, 1.0):
            lo, mid, hi = exact_sample(model, t - eps), exact_sample(model, t), exact_sample(model, t + eps)
            fd = max(fd, abs((hi.P_u - lo.P_u) / (2 * eps) + mid.Lambda), abs((hi.Delta - lo.Delta) / (2 * eps) - mid.dDelta))
        out.append((f"{name}:derivatives", fd <= 1e-6, f"max finite-difference error {fd:.3g}"))

        ident = 0.0
        for t in (0.0, 0.5, 1.0, 2.0):
            s = ev.sample(t)
            ident = max(ident, abs(s.P_s - (s.P_u + t * model.log_a)), abs(s.h - (s.P_u + t * s.Lambda)))
        out.append((f"{name}:identities", ident == 0.0, f"max identity defect {ident:.3g}"))
    return out
