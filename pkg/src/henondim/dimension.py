"""Slice dimensions, dimension of the Julia set, maximal-dimension equilibrium
states and full-dimension diagnostics.

Every routine here works on an *evaluator*: any object with a
``sample(t) -> PressureSample`` method and ``log_a`` / ``degree`` attributes.
:class:`henondim.pressure.LibraryPressure` and
:class:`henondim.oracle.LinearModel` both qualify.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import pressure
from .errors import NoBracketError, NoInteriorMaxError
from .orbits import OrbitLibrary

log = logging.getLogger(__name__)

MAX_ROOT_ITER = 200
TIE_TOL = 1e-9
VOLUME_TOL = 1e-12

VERDICTS = ("full-dimension-volume-preserving", "full-dimension-affine", "no-full-dimension")


@dataclass
class FullDimDiagnostics:
    volume_preserving: bool
    affinity_deviation: float
    multiplier_rigidity: float
    lambda0_vs_logd: float
    verdict: str
    connectivity_hint: str


@dataclass
class DimensionReport:
    t_u: float
    t_s: float
    dim_J: float
    maximizers: list
    d_g: float
    gap: float
    formula_residual: float
    diagnostics: FullDimDiagnostics
    err_est: float = 0.0
    n_max: object = None
    notes: list = field(default_factory=list)

    @property
    def t_star(self) -> float:
        return self.maximizers[0][0]

    def to_text(self) -> str:
        f = pressure.format_number
        dg = self.diagnostics
        lines = [
            f"t_u={f(self.t_u)}",
            f"t_s={f(self.t_s)}",
            f"dim_J={f(self.dim_J)}",
            f"d_g={f(self.d_g)}",
            f"gap={f(self.gap)}",
            f"t_star={f(self.t_star)}",
            "maximizers=" + ";".join(f"{f(t)}:{f(d)}" for t, d in self.maximizers),
            f"formula_residual={f(self.formula_residual)}",
            f"err_est={f(self.err_est)}",
            f"volume_preserving={str(dg.volume_preserving).lower()}",
            f"affinity_deviation={f(dg.affinity_deviation)}",
            f"multiplier_rigidity={f(dg.multiplier_rigidity)}",
            f"lambda0_vs_logd={f(dg.lambda0_vs_logd)}",
            f"verdict={dg.verdict}",
            f"connectivity_hint={dg.connectivity_hint}",
        ]
        return "\n".join(lines) + "\n"

    CSV_HEADER = "t_u,t_s,dim_J,d_g,gap,t_star,formula_residual,verdict"

    def to_csv_row(self) -> str:
        f = pressure.format_number
        vals = [self.t_u, self.t_s, self.dim_J, self.d_g, self.gap, self.t_star, self.formula_residual]
        return ",".join([f(v) for v in vals] + [self.diagnostics.verdict])


def _side_value(evaluator, side):
    if side == "u":
        return lambda t: evaluator.sample(t).P_u
    if side == "s":
        return lambda t: evaluator.sample(t).P_s
    raise ValueError(f"side must be 'u' or 's', got {side!r}")


def solve_bowen(evaluator, side: str = "u", tol: float = 1e-9, t_cap: float = 4.0, bracket=None) -> float:
    """Root of the unstable (``side='u'``) or stable pressure.

    Bracketed regula falsi with the Illinois modification; stops once
    ``|P(t)| <= tol`` or the bracket reaches machine resolution.

    Raises
    ------
    NoBracketError
        If the pressure is still positive at the right end of the bracket.
    """
    fn = _side_value(evaluator, side)
    lo, hi = bracket if bracket is not None else (0.0, t_cap)
    f_lo, f_hi = fn(lo), fn(hi)
    if abs(f_lo) <= tol:
        return lo
    if f_hi > 0:
        raise NoBracketError(f"P^{side}({hi}) = {f_hi:.6g} > 0; raise t_cap", side=side, t_cap=hi)
    if abs(f_hi) <= tol:
        return hi
    if f_lo < 0:
        raise NoBracketError(f"P^{side}({lo}) = {f_lo:.6g} < 0", side=side)
    last = 0
    for _ in range(MAX_ROOT_ITER):
        x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        fx = fn(x)
        if abs(fx) <= tol:
            return x
        # Illinois: halve the stale endpoint when the same side is kept twice
        if fx > 0:
            lo, f_lo = x, fx
            if last > 0:
                f_hi *= 0.5
            last = 1
        else:
            hi, f_hi = x, fx
            if last < 0:
                f_lo *= 0.5
            last = -1
        if hi - lo <= 4 * np.spacing(hi):
            return x
    log.warning("solve_bowen hit the iteration cap; returning bracket midpoint")
    return 0.5 * (lo + hi)


@dataclass
class MaximizeResult:
    maximizers: list
    formula_residual: float
    samples: list


def corollary_value(t, P_u, Lambda, log_a):
    """Value of the dimension at a critical point, ``2t + P_u log|a| / Lambda^2``."""
    return 2 * t + P_u * log_a / Lambda**2


def maximize_delta(evaluator, t_s: float, t_u: float, tol: float = 1e-9, grid_points: int = 2000) -> MaximizeResult:
    """All maximizers of the dimension curve on ``[t_s, t_u]``.

    Scans ``dDelta`` on a uniform grid, polishes every ``+ -> -`` sign change
    by bisection to width ``tol`` and keeps the maxima within 1e-9 of the best.

    Raises
    ------
    NoInteriorMaxError
        If ``dDelta`` never changes sign on a non-degenerate interval.
    """
    if t_u - t_s <= tol:
        s = evaluator.sample(t_u)
        res = abs(s.Delta - corollary_value(t_u, s.P_u, s.Lambda, evaluator.log_a))
        return MaximizeResult([(t_u, s.Delta)], res, [s])
    grid = np.linspace(t_s, t_u, grid_points + 1)
    samples = [evaluator.sample(float(t)) for t in grid]
    dd = np.array([s.dDelta for s in samples])
    brackets = [k for k in range(grid_points) if dd[k] > 0 and dd[k + 1] <= 0]
    if not brackets:
        raise NoInteriorMaxError(
            f"dDelta has no sign change on [{t_s:.6g}, {t_u:.6g}]", t_s=t_s, t_u=t_u
        )
    found = []
    for k in brackets:
        lo, hi = float(grid[k]), float(grid[k + 1])
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if evaluator.sample(mid).dDelta > 0:
                lo = mid
            else:
                hi = mid
        s = evaluator.sample(0.5 * (lo + hi))
        found.append(s)
    top = max(s.Delta for s in found)
    chosen = [s for s in found if s.Delta >= top - TIE_TOL]
    resid = max(abs(s.Delta - corollary_value(s.t, s.P_u, s.Lambda, evaluator.log_a)) for s in chosen)
    return MaximizeResult([(s.t, s.Delta) for s in chosen], resid, chosen)


def orbit_rates(source) -> np.ndarray:
    """``log|lambda_u(p)| / n`` over all stored orbits (branch logs for a linear model)."""
    if isinstance(source, OrbitLibrary):
        return np.array([o.rate for o in source.all_orbits()])
    return np.asarray(source.branch_logs, dtype=float)


def full_dimension_diagnostics(
    source, curve, t_u: float, affine_tol: float = 1e-6, rigidity_tol: float = 1e-6
) -> FullDimDiagnostics:
    """Threshold diagnostics for the existence of a measure of full dimension.

    ``source`` is the orbit library (or linear model) the curve was built
    from; ``curve`` must contain the sample at ``t = 0``.
    """
    samples = curve.samples
    first = samples[0]
    if first.t != 0.0:
        raise ValueError("diagnostics need the curve sample at t = 0")
    p0, lambda0 = first.P_u, first.Lambda
    volume_preserving = abs(math.exp(source.log_a) - 1.0) < VOLUME_TOL
    dev = 0.0
    for s in samples:
        if s.t <= t_u:
            dev = max(dev, abs(s.P_u - p0 * (1.0 - s.t / t_u)))
    rigidity = float(np.max(np.abs(orbit_rates(source) - lambda0)))
    gap = lambda0 - math.log(source.degree)
    if volume_preserving:
        verdict = VERDICTS[0]
    elif dev <= affine_tol and rigidity <= rigidity_tol:
        verdict = VERDICTS[1]
    else:
        verdict = VERDICTS[2]
    hint = "connected-candidate" if abs(gap) <= 1e-6 else "cantor-candidate"
    return FullDimDiagnostics(volume_preserving, dev, rigidity, gap, verdict, hint)


def report_from_evaluator(
    evaluator,
    source,
    tol: float = 1e-9,
    t_cap: float = 4.0,
    grid_points: int = 2000,
    affine_tol: float = 1e-6,
    rigidity_tol: float = 1e-6,
) -> DimensionReport:
    t_u = solve_bowen(evaluator, "u", tol, t_cap)
    t_s = solve_bowen(evaluator, "s", tol, t_cap)
    curve = pressure.build_curve(evaluator, [float(t) for t in np.linspace(0.0, t_u, 201)], t_cap=t_cap)
    diag = full_dimension_diagnostics(source, curve, t_u, affine_tol, rigidity_tol)
    notes = []
    try:
        result = maximize_delta(evaluator, t_s, t_u, tol, grid_points)
    except NoInteriorMaxError:
        if diag.verdict == VERDICTS[2]:
            raise
        # affine pressure: every equilibrium state coincides with the measure of maximal entropy
        s = evaluator.sample(t_u)
        res = abs(s.Delta - corollary_value(t_u, s.P_u, s.Lambda, evaluator.log_a))
        result = MaximizeResult([(t_u, s.Delta)], res, [s])
        notes.append("dDelta vanishes identically; reporting t_u")
    d_g = max(d for _, d in result.maximizers)
    err = max(
        [evaluator.sample(t_u).err_est, evaluator.sample(t_s).err_est] + [s.err_est for s in result.samples]
    )
    return DimensionReport(
        t_u=t_u,
        t_s=t_s,
        dim_J=t_u + t_s,
        maximizers=result.maximizers,
        d_g=d_g,
        gap=t_u + t_s - d_g,
        formula_residual=result.formula_residual,
        diagnostics=diag,
        err_est=err,
        n_max=getattr(evaluator, "n_max", None),
        notes=notes,
    )


def dimension_report(library: OrbitLibrary, n_max: int | None = None, tol: float = 1e-9, **kwargs) -> DimensionReport:
    """End-to-end report from a complete orbit library."""
    evaluator = pressure.LibraryPressure(library, n_max)
    return report_from_evaluator(evaluator, library, tol, **kwargs)
