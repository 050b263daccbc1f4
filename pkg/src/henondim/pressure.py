"""Unstable/stable pressure, Lyapunov exponent, entropy and dimension curve
from periodic-orbit partition sums.

At period ``n`` the fixed points of ``g^n`` are weighted by
``|lambda_u(p)|^-t``.  A primitive orbit of period ``m | n`` contributes ``m``
fixed points, each with ``log|lambda_u(g^n)| = (n/m) log|lambda_u(orbit)|``.

The pressure estimate is the ratio form ``log Z_n - log Z_{n-1}``; the
Lyapunov exponent is the Gibbs-weighted mean of ``log|lambda_u| / n`` at
``n_max``, and its t-derivative is minus ``n`` times the weighted variance.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLambdaError
from .orbits import OrbitLibrary


@dataclass(frozen=True)
class PressureSample:
    t: float
    P_u: float
    P_s: float
    Lambda: float
    lambda_neg: float
    h: float
    Delta: float
    dDelta: float
    n_used: int
    err_est: float
    # diagnostics, not part of the CSV contract
    dLambda: float = 0.0
    P_u_avg: float = math.nan


CURVE_COLUMNS = ("t", "P_u", "P_s", "Lambda", "h", "Delta", "dDelta", "n_used", "err_est")


def dimension_value(t, P_u, Lambda, log_a):
    """Dimension of the equilibrium state at ``t`` in pressure form."""
    return 2 * t + P_u / Lambda + (P_u + t * log_a) / (Lambda - log_a)


def dimension_value_young(h, Lambda, log_a):
    """Same quantity written as entropy over the two Lyapunov exponents."""
    return h / Lambda + h / (Lambda - log_a)


def dimension_derivative(t, P_u, Lambda, dLambda, log_a):
    num = P_u * (Lambda - log_a) ** 2 + (P_u + t * log_a) * Lambda**2
    return -dLambda * num / (Lambda**2 * (Lambda - log_a) ** 2)


def make_sample(t, P_u, Lambda, dLambda, log_a, n_used, err_est, P_u_avg=math.nan) -> PressureSample:
    """Fill in every derived field from ``(P_u, Lambda, dLambda)``."""
    if not Lambda > 0:
        raise DegenerateLambdaError(f"Lambda = {Lambda!r} at t = {t!r}", t=t)
    return PressureSample(
        t=t,
        P_u=P_u,
        P_s=P_u + t * log_a,
        Lambda=Lambda,
        lambda_neg=-Lambda + log_a,
        h=P_u + t * Lambda,
        Delta=dimension_value(t, P_u, Lambda, log_a),
        dDelta=dimension_derivative(t, P_u, Lambda, dLambda, log_a),
        n_used=n_used,
        err_est=err_est,
        dLambda=dLambda,
        P_u_avg=P_u_avg,
    )


@dataclass(frozen=True)
class WeightedOrbitMeasure:
    """Gibbs weights on the fixed points of ``g^n``, keyed by ``(itinerary, phase)``."""

    n: int
    weights: dict

    def entropy(self) -> float:
        w = np.array(list(self.weights.values()))
        w = w[w > 0]
        return -math.fsum(w * np.log(w))


class _PeriodTerms:
    """Fixed points of ``g^n`` grouped by primitive orbit, in canonical order."""

    def __init__(self, library: OrbitLibrary, n: int):
        library.require(n)
        logs, mult, keys = [], [], []
        for m in range(1, n + 1):
            if n % m:
                continue
            for o in library.orbits[m]:
                logs.append(o.log_mult_u)
                mult.append(m)
                keys.append(o.itinerary)
        self.n = n
        self.log_u = np.array(logs, dtype=float)
        self.mult = np.array(mult, dtype=float)
        self.log_mult = np.log(self.mult)
        self.exponent = (n / self.mult) * self.log_u
        self.rate = self.log_u / self.mult
        self.keys = keys

    def sums(self, t):
        x = self.log_mult - t * self.exponent
        top = float(np.max(x))
        e = np.exp(x - top)
        s = math.fsum(e)
        log_z = top + math.log(s)
        mean = math.fsum(e * self.rate) / s
        var = math.fsum(e * (self.rate - mean) ** 2) / s
        return log_z, mean, var


def partition_sums(library: OrbitLibrary, n: int, t: float) -> tuple:
    """``(log Z_n(t), A, V)``: log partition sum, weighted mean and variance of ``log|lambda_u|/n``.

    Raises
    ------
    IncompleteLibraryError
        If some period dividing ``n`` is missing from the library.
    """
    return _PeriodTerms(library, n).sums(t)


def gibbs_weights(library: OrbitLibrary, n: int, t: float) -> WeightedOrbitMeasure:
    terms = _PeriodTerms(library, n)
    log_z = terms.sums(t)[0]
    weights = {}
    for key, m, ex in zip(terms.keys, terms.mult, terms.exponent):
        w = math.exp(-t * ex - log_z)
        for phase in range(int(m)):
            weights[(key, phase)] = w
    return WeightedOrbitMeasure(n, weights)


class LibraryPressure:
    """Pressure evaluator backed by a complete orbit library.

    Parameters
    ----------
    library : OrbitLibrary
        Must be complete up to ``n_max``.
    n_max : int, optional
        Period used for the estimates; defaults to ``library.n_max``.
    """

    def __init__(self, library: OrbitLibrary, n_max: int | None = None):
        n_max = library.n_max if n_max is None else n_max
        if n_max < 3:
            raise ValueError("pressure estimates need n_max >= 3")
        self.library = library
        self.n_max = n_max
        self.log_a = library.log_a
        self.degree = library.degree
        self.fingerprint = library.map_fingerprint
        self._terms = {n: _PeriodTerms(library, n) for n in (n_max - 2, n_max - 1, n_max)}

    def sample(self, t: float) -> PressureSample:
        n = self.n_max
        z2, _, _ = self._terms[n - 2].sums(t)
        z1, _, _ = self._terms[n - 1].sums(t)
        z0, mean, var = self._terms[n].sums(t)
        p_now, p_prev = z0 - z1, z1 - z2
        return make_sample(
            t, p_now, mean, -n * var, self.log_a, n, abs(p_now - p_prev), P_u_avg=z0 / n
        )

    def pressure(self, t: float, side: str = "u") -> float:
        s = self.sample(t)
        return s.P_u if side == "u" else s.P_s

    def rates(self) -> np.ndarray:
        """``log|lambda_u| / n`` for every stored orbit."""
        return np.array([o.rate for o in self.library.all_orbits()])


def sample_at(library: OrbitLibrary, t: float, n_max: int) -> PressureSample:
    return LibraryPressure(library, n_max).sample(t)


@dataclass
class PressureCurve:
    grid: list
    samples: list
    provenance: dict

    @property
    def strictly_decreasing(self) -> bool:
        p = [s.P_u for s in self.samples]
        return all(b < a for a, b in zip(p, p[1:]))

    @property
    def lambda_nonincreasing(self) -> bool:
        ok = True
        for a, b in zip(self.samples, self.samples[1:]):
            ok &= b.Lambda <= a.Lambda + 2 * max(a.err_est, b.err_est)
        return ok

    def to_csv(self) -> str:
        return curve_csv(self.samples)


def format_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(x)
    return f"{float(x):.17g}"


def curve_csv(samples) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for s in samples:
        writer.writerow([format_number(getattr(s, c)) for c in CURVE_COLUMNS])
    return buf.getvalue()


def t_grid(t_min: float, t_max: float, step: float) -> list:
    """Uniform grid; points are ``t_min + k * step`` rounded to kill drift."""
    count = int(math.floor((t_max - t_min) / step + 1e-9)) + 1
    return [round(t_min + k * step, 12) for k in range(count)]


def build_curve(source, grid, n_max: int | None = None, t_cap: float = 4.0) -> PressureCurve:
    """Sample the pressure at every grid point.

    ``source`` is an :class:`OrbitLibrary` or any evaluator with a ``sample``
    method (e.g. a linear model).
    """
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly ascending")
    if grid and (grid[0] < 0 or grid[-1] > t_cap):
        raise ValueError(f"grid must lie in [0, {t_cap}]")
    evaluator = LibraryPressure(source, n_max) if isinstance(source, OrbitLibrary) else source
    samples = [evaluator.sample(t) for t in grid]
    prov = {"fingerprint": getattr(evaluator, "fingerprint", ""), "n_max": getattr(evaluator, "n_max", None)}
    return PressureCurve(grid, samples, prov)
