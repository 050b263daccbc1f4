"""Periodic orbits of horseshoe-regime Hénon maps.

Orbits are found by anti-integrable continuation.  At ``a = 0`` every factor
degenerates to the 1D map ``w -> P(w)`` and a period-n orbit with a given
itinerary is obtained by backward iteration along the chosen inverse branches.
The cyclic system

    w[j+1] = P_j(w[j]) + a_j * w[j-1]        (indices mod n*m)

is then followed by Newton's method while every ``a_j`` is switched on along a
geometric schedule.  Here ``m`` is the number of factors; the sequence ``w``
lists the second coordinate after each factor step, so the g-orbit points are
``(w[k*m - 1], w[k*m])``.

Symbols of the composed map are mixed-radix numbers over the factor branches
with the first factor as the most significant digit.  Factor branches are
labelled by the roots of ``P_i(w) = 0`` sorted by decreasing real part, then
decreasing imaginary part; for ``w**2 - 6`` symbol 0 is the branch through
``+sqrt(6)``.
"""
from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import maps
from .errors import (
    CorruptCacheError,
    FingerprintMismatchError,
    IncompleteLibraryError,
    NewtonDivergedError,
    NonHyperbolicError,
    SeedingDivergedError,
)

log = logging.getLogger(__name__)

SEED_TOL = 1e-10
NEWTON_TOL = 1e-12
RESIDUAL_TOL = 1e-10
MAX_NEWTON = 50
CONTINUATION_STEPS = 16
# first continuation step switches on this fraction of the target jacobian
CONTINUATION_START = 1e-3
HYPERBOLIC_MARGIN = 1e-6
EIG_AGREEMENT = 1e-8
EIG_COND_MAX = 1e8
DISTINCT_RADIUS = 1e-7


# --------------------------------------------------------------------------
# symbolic words


@dataclass(frozen=True, order=True)
class Itinerary:
    word: tuple

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(s) for s in self.word))

    def __len__(self):
        return len(self.word)

    def canonical(self) -> "Itinerary":
        """Lexicographically minimal cyclic rotation."""
        n = len(self.word)
        return Itinerary(min(self.word[k:] + self.word[:k] for k in range(n)))

    @property
    def is_canonical(self) -> bool:
        return self.canonical() == self

    @property
    def is_primitive(self) -> bool:
        n = len(self.word)
        return all(self.word[k:] + self.word[:k] != self.word for k in range(1, n))

    def to_str(self, d: int) -> str:
        if d <= 10:
            return "".join(map(str, self.word))
        return ".".join(map(str, self.word))

    @classmethod
    def from_str(cls, text: str) -> "Itinerary":
        if "." in text:
            return cls(tuple(int(s) for s in text.split(".")))
        return cls(tuple(int(s) for s in text))


def primitive_words(d: int, n: int) -> list:
    """Canonical primitive words of length n in lexicographic order."""
    out = []
    for word in itertools.product(range(d), repeat=n):
        it = Itinerary(word)
        if it.is_primitive and it.is_canonical:
            out.append(it)
    return out


def necklace_count(d: int, n: int) -> int:
    """Number of primitive period-n orbits of the full d-shift (Möbius inversion)."""
    total = 0
    for k in range(1, n + 1):
        if n % k == 0:
            total += _mobius(n // k) * d**k
    return total // n


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


# --------------------------------------------------------------------------
# orbit records


@dataclass(frozen=True)
class PeriodicOrbit:
    """Primitive cycle of ``g`` with its unstable multiplier.

    ``points`` is the in-memory cycle and is not part of equality: the cache
    stores only the first point and the cycle is re-polished on load.
    """

    period: int
    itinerary: Itinerary
    z0: complex
    w0: complex
    log_mult_u: float
    mult_u_arg: float
    residual: float
    log_mult_s: float
    points: tuple = field(default=(), compare=False, repr=False)
    synthetic: bool = field(default=False, compare=False)

    @property
    def rate(self) -> float:
        """Per-step expansion rate ``log|lambda_u| / n``."""
        return self.log_mult_u / self.period


@dataclass
class OrbitLibrary:
    map_fingerprint: str
    degree: int
    log_a: float
    n_max: int
    orbits: dict
    complete: dict
    synthetic: bool = False
    errors: dict = field(default_factory=dict)

    @property
    def expected_counts(self) -> dict:
        return {n: self.degree**n for n in range(1, self.n_max + 1)}

    def fixed_point_count(self, n: int) -> int:
        return sum(m * len(self.orbits.get(m, ())) for m in range(1, n + 1) if n % m == 0)

    def is_complete(self, n: int) -> bool:
        return all(self.complete.get(m, False) for m in range(1, n + 1) if n % m == 0)

    def require(self, n: int):
        if n > self.n_max or not self.is_complete(n):
            raise IncompleteLibraryError(f"library is not complete at period {n}", period=n)

    def all_orbits(self) -> Iterable[PeriodicOrbit]:
        for n in sorted(self.orbits):
            yield from self.orbits[n]

    def log_multipliers(self, m: int) -> np.ndarray:
        return np.array([o.log_mult_u for o in self.orbits.get(m, ())], dtype=float)

    def __eq__(self, other):
        if not isinstance(other, OrbitLibrary):
            return NotImplemented
        return (
            self.map_fingerprint == other.map_fingerprint
            and self.degree == other.degree
            and self.log_a == other.log_a
            and self.n_max == other.n_max
            and self.complete == other.complete
            and {k: list(v) for k, v in self.orbits.items()} == {k: list(v) for k, v in other.orbits.items()}
        )


# --------------------------------------------------------------------------
# factor-step bookkeeping


def _steps(g: maps.HenonMap, n: int):
    """Per-step factors for a g-period n orbit (length n*m)."""
    return [g.factors[j % len(g.factors)] for j in range(n * len(g.factors))]


def _branch_refs(f: maps.HenonFactor) -> np.ndarray:
    roots = f.inverse_branches(0.0)
    order = sorted(range(len(roots)), key=lambda k: (-roots[k].real, -roots[k].imag))
    return roots[order]


def _factor_digits(g: maps.HenonMap, symbol: int) -> list:
    digits = []
    for f in reversed(g.factors):
        symbol, r = divmod(symbol, f.degree)
        digits.append(r)
    return digits[::-1]


def _step_symbols(g: maps.HenonMap, words: Sequence[Itinerary]) -> np.ndarray:
    rows = []
    for it in words:
        rows.append([b for s in it.word for b in _factor_digits(g, s)])
    return np.array(rows, dtype=int).reshape(len(words), -1)


def _inverse_branch(f: maps.HenonFactor, refs: np.ndarray, v: np.ndarray, b: np.ndarray):
    """Root of ``P(w) = v`` in the branch labelled ``b`` (vectorised), plus a consistency flag."""
    d = f.degree
    if d == 2:
        c2, c1, c0 = f.coeffs[2], f.coeffs[1], f.coeffs[0] - v
        disc = np.sqrt(c1 * c1 - 4 * c2 * c0)
        roots = np.stack([(-c1 + disc) / (2 * c2), (-c1 - disc) / (2 * c2)], axis=-1)
    else:
        comp = np.zeros(v.shape + (d, d), dtype=complex)
        lead = f.coeffs[-1]
        comp[..., 0, :] = -np.array(f.coeffs[-2::-1]) / lead
        comp[..., 0, -1] = -(f.coeffs[0] - v) / lead
        comp[..., np.arange(1, d), np.arange(d - 1)] = 1.0
        roots = np.linalg.eigvals(comp)
    # label each root by its nearest reference root
    dist = np.abs(roots[..., :, None] - refs)
    labels = np.argmin(dist, axis=-1)
    ok = np.all(np.sort(labels, axis=-1) == np.arange(d), axis=-1)
    pick = np.argmax(labels == b[..., None], axis=-1)
    return np.take_along_axis(roots, pick[..., None], axis=-1)[..., 0], ok


def _seed_sequences(g: maps.HenonMap, words: Sequence[Itinerary]) -> np.ndarray:
    """Backward-iteration seeds at a = 0, shape (len(words), n*m)."""
    n = len(words[0])
    steps = _steps(g, n)
    refs = [_branch_refs(f) for f in steps]
    sym = _step_symbols(g, words)
    N = sym.shape[1]
    W = np.stack([refs[j][sym[:, j]] for j in range(N)], axis=1).astype(complex)
    last = np.inf
    for sweep in range(500):
        prev = W.copy()
        consistent = np.ones(len(words), dtype=bool)
        for j in range(N - 1, -1, -1):
            W[:, j], ok = _inverse_branch(steps[j], refs[j], W[:, (j + 1) % N], sym[:, j])
            consistent &= ok
        change = np.max(np.abs(W - prev), axis=1)
        bad = ~consistent | ~np.isfinite(change)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise SeedingDivergedError(
                "inverse branches are not separated", word=words[k].to_str(g.degree), period=n
            )
        worst = float(np.max(change))
        # past the tolerance, keep sweeping while the contraction still makes progress
        if worst <= SEED_TOL and (worst == 0.0 or worst >= last):
            return W
        last = worst if worst <= SEED_TOL else np.inf
    k = int(np.argmax(change))
    raise SeedingDivergedError(
        "backward iteration failed to contract", word=words[k].to_str(g.degree), period=n
    )


def _points_from_sequence(W: np.ndarray, m: int) -> np.ndarray:
    """(K, n, 2) array of g-orbit points from step sequences (K, n*m)."""
    N = W.shape[-1]
    idx = np.arange(0, N, m)
    return np.stack([W[..., (idx - 1) % N], W[..., idx]], axis=-1)


def seed_itineraries(g: maps.HenonMap, n: int) -> list:
    """Return ``(Itinerary, points)`` for all ``d**n`` words of length n, at ``a = 0``."""
    words = [Itinerary(w) for w in itertools.product(range(g.degree), repeat=n)]
    W = _seed_sequences(g, words)
    pts = _points_from_sequence(W, len(g.factors))
    return [(it, [(complex(p[0]), complex(p[1])) for p in row]) for it, row in zip(words, pts)]


# --------------------------------------------------------------------------
# Newton on the cyclic system


def _residuals(steps, a_vals, W):
    N = W.shape[-1]
    F = np.empty_like(W)
    for j, f in enumerate(steps):
        F[:, j] = f.poly(W[:, j]) + a_vals[j] * W[:, (j - 1) % N] - W[:, (j + 1) % N]
    return F


def _newton_jacobian(steps, a_vals, W):
    K, N = W.shape
    Jm = np.zeros((K, N, N), dtype=complex)
    for j, f in enumerate(steps):
        Jm[:, j, j] += f.dpoly(W[:, j])
        Jm[:, j, (j - 1) % N] += a_vals[j]
        Jm[:, j, (j + 1) % N] -= 1.0
    return Jm


def _newton(steps, a_vals, W, stage, words, d):
    """Per-row Newton; rows freeze independently once converged."""
    W = W.copy()
    F = _residuals(steps, a_vals, W)
    res = np.max(np.abs(F), axis=1)
    active = res > NEWTON_TOL
    for _ in range(MAX_NEWTON):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        Wa = W[idx]
        delta = np.linalg.solve(_newton_jacobian(steps, a_vals, Wa), F[idx][..., None])[..., 0]
        Wa = Wa - delta
        Fa = _residuals(steps, a_vals, Wa)
        ra = np.max(np.abs(Fa), axis=1)
        W[idx], F[idx], res[idx] = Wa, Fa, ra
        scale = 1.0 + np.max(np.abs(Wa), axis=1)
        stalled = np.max(np.abs(delta), axis=1) <= 1e-15 * scale
        active[idx] = ~((ra <= NEWTON_TOL) | (stalled & (ra <= RESIDUAL_TOL)))
        bad = ~np.isfinite(ra) | (np.max(np.abs(Wa), axis=1) > maps.ESCAPE_RADIUS)
        if np.any(bad):
            k = idx[int(np.argmax(bad))]
            raise NewtonDivergedError(
                "Newton iterate escaped", step=stage, word=words[k].to_str(d), period=len(words[k])
            )
    if np.any(res > RESIDUAL_TOL):
        k = int(np.argmax(res))
        raise NewtonDivergedError(
            f"no convergence within {MAX_NEWTON} iterations (residual {res[k]:.3g})",
            step=stage,
            word=words[k].to_str(d),
            period=len(words[k]),
        )
    return W


def _continue(g, n, W0, words, continuation=True):
    steps = _steps(g, n)
    target = np.array([f.a for f in steps])
    W = W0
    if continuation:
        for s in range(1, CONTINUATION_STEPS + 1):
            frac = CONTINUATION_START ** ((CONTINUATION_STEPS - s) / (CONTINUATION_STEPS - 1))
            W = _newton(steps, target * frac, W, s, words, g.degree)
    else:
        W = _newton(steps, target, W, CONTINUATION_STEPS, words, g.degree)
    return W


# --------------------------------------------------------------------------
# multipliers


def _cocycle(steps, W, inverse=False):
    """Rescaled ordered product of step jacobians: returns (M, log_scale)."""
    K, N = W.shape
    m00 = np.ones(K, dtype=complex)
    m01 = np.zeros(K, dtype=complex)
    m10 = np.zeros(K, dtype=complex)
    m11 = np.ones(K, dtype=complex)
    logs = np.zeros(K)
    order = range(N - 1, -1, -1) if inverse else range(N)
    for j in order:
        f = steps[j]
        p = f.dpoly(W[:, j])
        if inverse:
            # right-multiply by [[-p/a, 1/a], [1, 0]]
            ia = 1.0 / f.a
            m00, m01, m10, m11 = (
                -m00 * p * ia + m01, m00 * ia,
                -m10 * p * ia + m11, m10 * ia,
            )
        else:
            # left-multiply by [[0, 1], [a, p]]
            m00, m01, m10, m11 = m10, m11, f.a * m00 + p * m10, f.a * m01 + p * m11
        s = np.maximum.reduce([np.abs(m00), np.abs(m01), np.abs(m10), np.abs(m11)])
        m00, m01, m10, m11 = m00 / s, m01 / s, m10 / s, m11 / s
        logs += np.log(s)
    return np.stack([np.stack([m00, m01], -1), np.stack([m10, m11], -1)], -2), logs


def _dominant(M, logs, log_det, det_phase):
    """Dominant eigenvalue of ``exp(logs) * M`` given the exact determinant."""
    tr = M[:, 0, 0] + M[:, 1, 1]
    dt = det_phase * np.exp(log_det - 2 * logs)
    disc = np.sqrt(tr * tr - 4 * dt)
    mu1, mu2 = (tr + disc) / 2, (tr - disc) / 2
    mu = np.where(np.abs(mu1) >= np.abs(mu2), mu1, mu2)
    return mu


def _multipliers(g, n, W, words):
    steps = _steps(g, n)
    M, logs = _cocycle(steps, W)
    log_det = n * g.log_jac_mod
    det_phase = np.exp(1j * n * np.angle(g.jac_det))
    mu = _dominant(M, logs, log_det, det_phase)
    log_u = logs + np.log(np.abs(mu))
    arg_u = np.angle(mu)
    # independent check of the closed-form eigenvalue
    ev, vecs = np.linalg.eig(M)
    direct = ev[np.arange(len(ev)), np.argmax(np.abs(ev), axis=1)]
    agree = np.abs(direct - mu) <= EIG_AGREEMENT * np.abs(mu)
    cond = np.linalg.cond(vecs)
    log_s = log_det - log_u
    hyper = (log_u > math.log1p(HYPERBOLIC_MARGIN)) & (log_s < math.log1p(-HYPERBOLIC_MARGIN))
    bad = ~(agree & hyper & (cond <= EIG_COND_MAX) & np.isfinite(log_u))
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NonHyperbolicError(
            f"orbit fails the hyperbolicity test (log|lambda_u| = {log_u[k]:.6g}, cond = {cond[k]:.3g})",
            word=words[k].to_str(g.degree),
            period=n,
        )
    return log_u, arg_u, log_s


def multipliers(g: maps.HenonMap, points) -> tuple:
    """``(log_mult_u, mult_u_arg, log_mult_s)`` of the cycle through ``points``.

    ``log_mult_s`` comes from the determinant identity
    ``log|lambda_s| = n log|a| - log|lambda_u|``.
    """
    W = _sequence_from_points(g, points)
    n = len(points)
    words = [Itinerary((0,) * n)]
    log_u, arg_u, log_s = _multipliers(g, n, W[None, :], words)
    return float(log_u[0]), float(arg_u[0]), float(log_s[0])


def stable_log_multiplier(g: maps.HenonMap, orbit: PeriodicOrbit) -> float:
    """``log|lambda_s|`` from the inverse cocycle, independent of the determinant identity."""
    W = _sequence_from_points(g, orbit.points)[None, :]
    steps = _steps(g, orbit.period)
    M, logs = _cocycle(steps, W, inverse=True)
    n = orbit.period
    mu = _dominant(M, logs, -n * g.log_jac_mod, np.exp(-1j * n * np.angle(g.jac_det)))
    return float(-(logs[0] + np.log(np.abs(mu[0]))))


def _sequence_from_points(g, points):
    """Step sequence of a cycle given its g-points (intermediate factor steps recomputed)."""
    m = len(g.factors)
    seq = []
    for z, w in points:
        seq.append(complex(w))
        for f in g.factors[:-1]:
            z, w = w, f.poly(w) + f.a * z
            seq.append(complex(w))
    return np.array(seq, dtype=complex)


# --------------------------------------------------------------------------
# assembly


def _orbits_from(g, n, words, W, residual_override=None):
    m = len(g.factors)
    pts = _points_from_sequence(W, m)
    log_u, arg_u, log_s = _multipliers(g, n, W, words)
    out = []
    for k, it in enumerate(words):
        cycle = tuple((complex(p[0]), complex(p[1])) for p in pts[k])
        res = _closure_residual(g, cycle) if residual_override is None else residual_override[k]
        out.append(
            PeriodicOrbit(
                period=n,
                itinerary=it,
                z0=cycle[0][0],
                w0=cycle[0][1],
                log_mult_u=float(log_u[k]),
                mult_u_arg=float(arg_u[k]),
                residual=float(res),
                log_mult_s=float(log_s[k]),
                points=cycle,
            )
        )
    return out


def _closure_residual(g, cycle):
    pts = np.array(cycle)
    img = np.array(maps.eval_map(g, (pts[:, 0], pts[:, 1]))).T
    return float(np.max(np.abs(img - np.roll(pts, -1, axis=0))))


def refine_orbit(g: maps.HenonMap, n: int, seed, itinerary=None, continuation=True) -> PeriodicOrbit:
    """Newton-refine a single seed into a verified periodic orbit.

    ``seed`` is either a list of ``n`` points ``(z, w)`` or the full step
    sequence of length ``n * m``.  With ``continuation`` the seed is taken to
    solve the ``a = 0`` system and the jacobians are switched on over 16
    geometric steps.
    """
    seed = np.asarray(seed, dtype=complex)
    if seed.ndim == 2:
        if len(g.factors) != 1:
            raise ValueError("multi-factor maps need the full step sequence as seed")
        seed = seed[:, 1]
    if seed.shape != (n * len(g.factors),):
        raise ValueError(f"seed has length {seed.shape[0]}, expected {n * len(g.factors)}")
    it = itinerary if itinerary is not None else Itinerary((0,) * n)
    W = _continue(g, n, seed[None, :], [it], continuation=continuation)
    orbit = _orbits_from(g, n, [it], W)[0]
    if orbit.residual > RESIDUAL_TOL:
        raise NewtonDivergedError(f"closure residual {orbit.residual:.3g}", step=CONTINUATION_STEPS)
    return orbit


def _check_distinct(orbits, n, d):
    pts = np.array([p for o in orbits for p in o.points])
    coords = np.column_stack([pts.real, pts.imag]).reshape(len(pts), -1)
    pairs = cKDTree(coords).query_pairs(DISTINCT_RADIUS)
    if pairs:
        i, j = min(pairs)
        raise NewtonDivergedError(
            "two itineraries converged to the same cycle",
            word=orbits[i // n].itinerary.to_str(d),
            other=orbits[j // n].itinerary.to_str(d),
            period=n,
        )


def orbits_of_period(g: maps.HenonMap, n: int) -> list:
    """All primitive period-n orbits in canonical itinerary order."""
    words = primitive_words(g.degree, n)
    if not words:
        return []
    W = _seed_sequences(g, words)
    W = _continue(g, n, W, words)
    orbits = _orbits_from(g, n, words, W)
    for o in orbits:
        if o.residual > RESIDUAL_TOL:
            raise NewtonDivergedError(
                f"closure residual {o.residual:.3g}", word=o.itinerary.to_str(g.degree), period=n
            )
    _check_distinct(orbits, n, g.degree)
    return orbits


def _period_job(args):
    g, n = args
    try:
        return n, orbits_of_period(g, n), None
    except Exception as exc:  # reported per period
        return n, [], exc


def enumerate_orbits(g: maps.HenonMap, n_max: int, jobs: int = 1, strict: bool = True) -> OrbitLibrary:
    """Build a complete library of primitive orbits for periods ``1..n_max``.

    Periods are independent jobs; results are assembled in period order so the
    library does not depend on ``jobs``.  With ``strict`` the first failing
    period re-raises its error; otherwise the period is marked incomplete.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    maps.characterize(g)
    tasks = [(g, n) for n in range(1, n_max + 1)]
    workers = jobs if jobs > 0 else (os.cpu_count() or 1)
    if workers == 1:
        results = [_period_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_period_job, tasks[::-1]))[::-1]
    lib = OrbitLibrary(
        map_fingerprint=g.fingerprint(),
        degree=g.degree,
        log_a=g.log_jac_mod,
        n_max=n_max,
        orbits={},
        complete={},
    )
    first_error = None
    for n, orbits, exc in results:
        lib.orbits[n] = orbits
        if exc is not None:
            lib.complete[n] = False
            lib.errors[n] = str(exc)
            first_error = first_error or exc
            log.warning("period %d incomplete: %s", n, exc)
        else:
            lib.complete[n] = len(orbits) == necklace_count(g.degree, n)
    for n in range(1, n_max + 1):
        if lib.complete[n] and lib.is_complete(n):
            lib.complete[n] = lib.fixed_point_count(n) == g.degree**n
    if strict and first_error is not None:
        raise first_error
    return lib


# --------------------------------------------------------------------------
# cache

CACHE_HEADER = "period,itinerary,z0_re,z0_im,w0_re,w0_im,log_mult_u,mult_u_arg,residual"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cache_store(library: OrbitLibrary, path) -> None:
    """Write the library as delimited text with 17 significant digits."""
    lines = [
        f"# fingerprint={library.map_fingerprint} degree={library.degree} "
        f"log_a={_fmt(library.log_a)} n_max={library.n_max} synthetic={int(library.synthetic)} "
        "complete=" + "".join("1" if library.complete.get(n) else "0" for n in range(1, library.n_max + 1)),
        CACHE_HEADER,
    ]
    for o in library.all_orbits():
        lines.append(
            ",".join(
                [
                    str(o.period),
                    o.itinerary.to_str(library.degree),
                    _fmt(o.z0.real), _fmt(o.z0.imag), _fmt(o.w0.real), _fmt(o.w0.imag),
                    _fmt(o.log_mult_u), _fmt(o.mult_u_arg), _fmt(o.residual),
                ]
            )
        )
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def cache_load(path, source) -> OrbitLibrary:
    """Read a cache written by :func:`cache_store`.

    ``source`` is the map (or linear model) the cache is expected to belong
    to; its fingerprint must match.
    """
    with open(path) as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("# "):
        raise CorruptCacheError("missing fingerprint line", row=1)
    try:
        meta = dict(item.split("=", 1) for item in lines[0][2:].split())
        fp, degree, log_a = meta["fingerprint"], int(meta["degree"]), float(meta["log_a"])
        n_max, synthetic, complete_flags = int(meta["n_max"]), meta["synthetic"] == "1", meta["complete"]
    except (KeyError, ValueError) as exc:
        raise CorruptCacheError(f"bad fingerprint line ({exc})", row=1) from None
    if fp != source.fingerprint():
        raise FingerprintMismatchError(f"cache belongs to map {fp}, not {source.fingerprint()}")
    if len(lines) < 2 or lines[1] != CACHE_HEADER:
        raise CorruptCacheError("missing or malformed header row", row=2)
    if lines[-1] == "":
        lines = lines[:-1]
    else:
        raise CorruptCacheError("file does not end with a newline (truncated)", row=len(lines))
    rows = {n: [] for n in range(1, n_max + 1)}
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split(",")
        try:
            if len(parts) != 9:
                raise ValueError(f"expected 9 fields, got {len(parts)}")
            n = int(parts[0])
            it = Itinerary.from_str(parts[1])
            if len(it) != n or n not in rows:
                raise ValueError("period and itinerary disagree")
            vals = [float(x) for x in parts[2:]]
        except ValueError as exc:
            raise CorruptCacheError(f"row {lineno}: {exc}", row=lineno) from None
        rows[n].append((it, vals))
    lib = OrbitLibrary(
        map_fingerprint=fp, degree=degree, log_a=log_a, n_max=n_max, orbits={}, complete={}, synthetic=synthetic
    )
    for n in range(1, n_max + 1):
        expected = necklace_count(degree, n)
        flagged = complete_flags[n - 1] == "1" if len(complete_flags) >= n else False
        if flagged and len(rows[n]) != expected:
            raise CorruptCacheError(
                f"period {n} has {len(rows[n])} orbits, expected {expected}", row=len(lines) + 1
            )
        lib.orbits[n] = _rebuild(source, n, rows[n], log_a, synthetic)
        lib.complete[n] = flagged
    return lib


def _rebuild(source, n, rows, log_a, synthetic):
    if not rows:
        return []
    out = []
    for it, (zr, zi, wr, wi, lu, arg, res) in rows:
        out.append(
            PeriodicOrbit(
                period=n, itinerary=it, z0=complex(zr, zi), w0=complex(wr, wi),
                log_mult_u=lu, mult_u_arg=arg, residual=res, log_mult_s=n * log_a - lu,
                synthetic=synthetic,
            )
        )
    if synthetic or not isinstance(source, maps.HenonMap):
        return out
    # re-polish the cycles: forward-iterate the stored point, then Newton at the target map
    g = source
    words = [o.itinerary for o in out]
    W0 = []
    for o in out:
        seq = [o.w0]
        z, w = o.z0, o.w0
        for j in range(1, n * len(g.factors)):
            f = g.factors[(j - 1) % len(g.factors)]
            z, w = w, f.poly(w) + f.a * z
            seq.append(w)
        W0.append(seq)
    W = _continue(g, n, np.array(W0, dtype=complex), words, continuation=False)
    pts = _points_from_sequence(W, len(g.factors))
    return [
        PeriodicOrbit(**{**o.__dict__, "points": tuple((complex(p[0]), complex(p[1])) for p in row)})
        for o, row in zip(out, pts)
    ]
