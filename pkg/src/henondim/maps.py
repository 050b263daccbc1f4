"""Compositions of generalized Hénon maps of C^2.

A factor is ``(z, w) -> (w, P(w) + a z)`` with ``deg P >= 2`` and ``a != 0``.
A :class:`HenonMap` is an ordered list of factors.  **Factors are applied in
list order**: ``factors[0]`` acts first, then ``factors[1]`` and so on.  Degree,
jacobian modulus and everything downstream of them do not depend on this
order, but orbit coordinates do.

Points are plain ``(z, w)`` pairs of complex numbers (or broadcastable numpy
arrays of them).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import EscapedError, OrientationError

ESCAPE_RADIUS = 1e8
VOLUME_TOL = 1e-12


def _horner(coeffs, x):
    out = np.zeros_like(x) + coeffs[-1]
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out


@dataclass(frozen=True)
class HenonFactor:
    """One factor ``(z, w) -> (w, P(w) + a z)``; ``coeffs`` in ascending degree."""

    coeffs: tuple
    a: complex

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        # trailing zeros do not count towards the degree
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "a", complex(self.a))
        if len(coeffs) - 1 < 2:
            raise ValueError(f"factor polynomial must have degree >= 2, got {len(coeffs) - 1}")
        if self.a == 0:
            raise ValueError("factor jacobian parameter a must be nonzero")
        if not all(map(np.isfinite, coeffs + (self.a,))):
            raise ValueError("factor coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @cached_property
    def dcoeffs(self) -> tuple:
        return tuple(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def poly(self, w):
        return _horner(self.coeffs, w)

    def dpoly(self, w):
        return _horner(self.dcoeffs, w)

    def inverse_branches(self, v) -> np.ndarray:
        """All ``degree`` roots of ``P(w) = v`` (unordered)."""
        c = np.array(self.coeffs[::-1])
        c[-1] -= v
        if self.degree == 2:
            a2, a1, a0 = c
            disc = np.sqrt(a1 * a1 - 4 * a2 * a0)
            return np.array([(-a1 + disc) / (2 * a2), (-a1 - disc) / (2 * a2)])
        return np.roots(c)


def quadratic(c: complex, a: complex) -> "HenonMap":
    """The single-factor map with ``P(w) = w**2 + c``."""
    return HenonMap((HenonFactor((c, 0, 1), a),))


@dataclass(frozen=True)
class HenonMap:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a HenonMap needs at least one factor")

    @property
    def degree(self) -> int:
        return math.prod(f.degree for f in self.factors)

    @property
    def jac_det(self) -> complex:
        # each factor contributes det [[0, 1], [a, P']] = -a
        return complex(np.prod([-f.a for f in self.factors]))

    @property
    def jac_mod(self) -> float:
        return math.prod(abs(f.a) for f in self.factors)

    @property
    def log_jac_mod(self) -> float:
        return math.fsum(math.log(abs(f.a)) for f in self.factors)

    @property
    def volume_class(self) -> str:
        return characterize(self)[2]

    def fingerprint(self) -> str:
        payload = [
            [[[c.real, c.imag] for c in f.coeffs], [f.a.real, f.a.imag]]
            for f in self.factors
        ]
        text = json.dumps(payload, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "factors": [
                {"coeffs": [[c.real, c.imag] for c in f.coeffs], "a": [f.a.real, f.a.imag]}
                for f in self.factors
            ]
        }


def _check(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    bad = ~(np.isfinite(z) & np.isfinite(w)) | (np.abs(z) > ESCAPE_RADIUS) | (np.abs(w) > ESCAPE_RADIUS)
    if np.any(bad):
        raise EscapedError("orbit left the region of interest (|coordinate| > 1e8 or non-finite)")
    return z, w


def _unwrap(z, w):
    if z.ndim == 0:
        return complex(z), complex(w)
    return z, w


def eval_map(g: HenonMap, p) -> tuple:
    """Image ``g(p)`` of ``p = (z, w)``.

    Raises
    ------
    EscapedError
        If any intermediate coordinate exceeds 1e8 in modulus or is not finite.
    """
    z, w = _check(*p)
    for f in g.factors:
        z, w = w, f.poly(w) + f.a * z
        z, w = _check(z, w)
    return _unwrap(z, w)


def eval_inverse(g: HenonMap, p) -> tuple:
    """Preimage ``g^{-1}(p)``; factors are undone in reverse list order."""
    z, w = _check(*p)
    for f in reversed(g.factors):
        z, w = (w - f.poly(z)) / f.a, z
        z, w = _check(z, w)
    return _unwrap(z, w)


def jacobian_at(g: HenonMap, p) -> np.ndarray:
    """Derivative ``Dg(p)`` as a 2x2 complex matrix (ordered factor product)."""
    z, w = complex(p[0]), complex(p[1])
    jac = np.eye(2, dtype=complex)
    for f in g.factors:
        step = np.array([[0.0, 1.0], [f.a, f.dpoly(w)]], dtype=complex)
        jac = step @ jac
        z, w = w, f.poly(w) + f.a * z
    return jac


def characterize(g: HenonMap) -> tuple:
    """Return ``(degree, jac_mod, volume_class)``.

    Raises
    ------
    OrientationError
        If ``|det Dg| > 1``; analyze the inverse map instead.
    """
    jac_mod = g.jac_mod
    if abs(jac_mod - 1.0) < VOLUME_TOL:
        cls = "preserving"
    elif jac_mod < 1.0:
        cls = "decreasing"
    else:
        raise OrientationError(
            f"|det Dg| = {jac_mod:.17g} > 1: volume-expanding maps are not supported, analyze g^-1 instead"
        )
    return g.degree, jac_mod, cls


def make_map(factors: Sequence) -> HenonMap:
    """Build a map from ``[(coeffs, a), ...]`` pairs."""
    return HenonMap(tuple(HenonFactor(tuple(c), a) for c, a in factors))
