import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henondim import maps, orbits
from henondim.errors import (
    CorruptCacheError,
    FingerprintMismatchError,
    HenonDimError,
    IncompleteLibraryError,
    SeedingDivergedError,
)
from henondim.orbits import Itinerary

EPS = np.finfo(float).eps
W_PLUS = (0.8 + math.sqrt(24.64)) / 2


# ---- symbolic bookkeeping


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(1, 8))
def test_necklace_counts_sum_to_full_shift(d, n):
    total = sum(m * orbits.necklace_count(d, m) for m in range(1, n + 1) if n % m == 0)
    assert total == d**n


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=9))
def test_itinerary_canonical(word):
    it = Itinerary(tuple(word))
    c = it.canonical()
    assert c.is_canonical and c.canonical() == c
    n = len(word)
    assert all(Itinerary(tuple(word[k:] + word[:k])).canonical() == c for k in range(n))
    assert Itinerary.from_str(it.to_str(3)) == it


def test_primitive_words_match_necklaces():
    for n in range(1, 9):
        assert len(orbits.primitive_words(2, n)) == orbits.necklace_count(2, n)


# ---- seeding


def test_seeds_period_one(g6):
    seeds = dict((it.word, pts) for it, pts in orbits.seed_itineraries(g6, 1))
    assert seeds[(0,)][0] == (3, 3)
    assert seeds[(1,)][0] == (-2, -2)


def test_seeds_period_two(g6):
    seeds = {it.word: pts for it, pts in orbits.seed_itineraries(g6, 2)}
    assert len(seeds) == 4
    assert all(abs(p[1] - 3) < 1e-12 for p in seeds[(0, 0)])
    assert all(abs(p[1] + 2) < 1e-12 for p in seeds[(1, 1)])
    for word in ((0, 1), (1, 0)):
        ws = [p[1] for p in seeds[word]]
        assert all(abs(w * w + w - 5) < 1e-12 for w in ws)
        assert abs(ws[0] - ws[1]) > 1


def test_seeds_period_twelve(g6):
    seeds = orbits.seed_itineraries(g6, 12)
    assert len(seeds) == 4096
    pts = np.array([p[1] for _, s in seeds for p in s])
    assert np.all(np.isfinite(pts))


def test_seeding_diverges_outside_horseshoe():
    with pytest.raises(SeedingDivergedError, match="seeding-diverged") as info:
        orbits.enumerate_orbits(maps.quadratic(-1, 0.2), 2)
    assert "word=" in str(info.value)


# ---- refinement


def test_refine_fixed_point(g6):
    o = orbits.refine_orbit(g6, 1, [(3, 3)])
    assert abs(o.w0 - W_PLUS) < 1e-12 and abs(o.z0 - W_PLUS) < 1e-12
    assert o.residual <= 1e-10


def test_degenerate_newton_keeps_seed(g6):
    # at a = 0 the seed already solves the cyclic system, so Newton must not move it
    for n in (1, 2, 5):
        words = orbits.primitive_words(2, n)
        W = orbits._seed_sequences(g6, words)
        out = orbits._newton(orbits._steps(g6, n), np.zeros(n), W, 0, words, 2)
        assert np.array_equal(out, W)


def test_refine_two_cycle(g6):
    (it, seed), = [(it, s) for it, s in orbits.seed_itineraries(g6, 2) if it.word == (0, 1)]
    o = orbits.refine_orbit(g6, 2, seed, it)
    assert o.residual <= 1e-10
    p = o.points[0]
    p1 = maps.eval_map(g6, p)
    assert abs(p1[0] - o.points[1][0]) < 1e-12
    p2 = maps.eval_map(g6, p1)
    assert max(abs(p2[0] - p[0]), abs(p2[1] - p[1])) < 1e-12


# ---- multipliers


def test_multiplier_one_dimensional_limit():
    g = maps.quadratic(-6, 1e-200)
    log_u, _, _ = orbits.multipliers(g, [(3, 3)])
    assert abs(log_u - math.log(6)) < 1e-14


def test_multiplier_fixed_point_eigenvalue(g6):
    o = orbits.refine_orbit(g6, 1, [(3, 3)])
    ev = np.linalg.eigvals(np.array([[0, 1], [0.2, 2 * W_PLUS]]))
    assert abs(o.log_mult_u - math.log(max(abs(ev)))) < 1e-13
    assert abs(o.log_mult_s - math.log(min(abs(ev)))) < 1e-13


def test_determinant_identity(lib6):
    for o in lib6.all_orbits():
        assert o.log_mult_s == o.period * lib6.log_a - o.log_mult_u


def test_stable_multiplier_independent(g6, lib6):
    for n in (1, 4, 9, 12):
        for o in lib6.orbits[n][:64]:
            direct = orbits.stable_log_multiplier(g6, o)
            assert abs(direct - o.log_mult_s) <= 1e-12 * max(1.0, abs(o.log_mult_s))


def test_cyclic_invariance(g6, lib6):
    for n in (2, 5, 8):
        for o in lib6.orbits[n][:10]:
            base = orbits.multipliers(g6, o.points)
            for k in range(1, n):
                rot = orbits.multipliers(g6, o.points[k:] + o.points[:k])
                assert abs(rot[0] - base[0]) <= 1e-12 * abs(base[0])


# ---- libraries


def test_small_library_counts(g6):
    lib = orbits.enumerate_orbits(g6, 3)
    assert [lib.fixed_point_count(n) for n in (1, 2, 3)] == [2, 4, 8]


def test_degenerate_library_multipliers():
    g = maps.quadratic(-6, 1e-200)
    lib = orbits.enumerate_orbits(g, 5)
    assert [lib.fixed_point_count(n) for n in range(1, 6)] == [2, 4, 8, 16, 32]
    for o in lib.all_orbits():
        prod = math.fsum(math.log(abs(2 * w)) for _, w in o.points)
        assert abs(o.log_mult_u - prod) < 1e-12


def test_library_invariants(g6, lib6):
    for n in range(1, 13):
        assert lib6.is_complete(n)
        assert lib6.fixed_point_count(n) == 2**n
        assert len(lib6.orbits[n]) == primitive_expected(n)
    for o in lib6.all_orbits():
        assert o.residual <= 1e-10
        assert o.log_mult_u > math.log1p(1e-6)
        assert o.log_mult_s < math.log1p(-1e-6)
        assert o.itinerary.is_canonical and o.itinerary.is_primitive


def primitive_expected(n):
    return orbits.necklace_count(2, n)


def test_closure(g6, lib6):
    # Errors grow like |lambda_u| under forward iteration, so the closure
    # tolerance is 1e-9 or the float64 amplification bound, whichever is larger.
    for o in lib6.all_orbits():
        z, w = o.points[0]
        for _ in range(o.period):
            z, w = maps.eval_map(g6, (z, w))
        tol = max(1e-9, 64 * EPS * math.exp(o.log_mult_u) * (1 + abs(o.w0)))
        assert max(abs(z - o.z0), abs(w - o.w0)) <= tol
        if o.period <= 6:
            assert max(abs(z - o.z0), abs(w - o.w0)) <= 1e-9


def test_points_distinct(lib6):
    for n in (8, 12):
        pts = np.array([o.points[0] for o in lib6.orbits[n]])
        diffs = np.max(np.abs(pts[:, None, :] - pts[None, :, :]), axis=-1)
        np.fill_diagonal(diffs, np.inf)
        assert diffs.min() > 1e-7


def test_multi_factor_library():
    g = maps.make_map([((-6, 0, 1), 0.5), ((-7, 0, 1), 0.4)])
    lib = orbits.enumerate_orbits(g, 3)
    assert [lib.fixed_point_count(n) for n in (1, 2, 3)] == [4, 16, 64]
    for o in lib.all_orbits():
        z, w = o.points[0]
        for _ in range(o.period):
            z, w = maps.eval_map(g, (z, w))
        assert max(abs(z - o.z0), abs(w - o.w0)) < 1e-9


def test_parallel_width_does_not_change_library(g6):
    a = orbits.enumerate_orbits(g6, 9, jobs=1)
    b = orbits.enumerate_orbits(g6, 9, jobs=4)
    assert a == b
    assert [o.points for o in a.all_orbits()] == [o.points for o in b.all_orbits()]


def test_incomplete_library_refused(g6):
    lib = orbits.enumerate_orbits(g6, 4)
    lib.complete[3] = False
    with pytest.raises(IncompleteLibraryError, match="incomplete-library"):
        lib.require(6)
    lib.require(4)


# ---- cache


def test_cache_round_trip(tmp_path, g6):
    lib = orbits.enumerate_orbits(g6, 8)
    path = tmp_path / "lib.csv"
    orbits.cache_store(lib, path)
    back = orbits.cache_load(path, g6)
    assert back == lib
    for a, b in zip(lib.all_orbits(), back.all_orbits()):
        assert a.log_mult_u == b.log_mult_u and a.z0 == b.z0
        assert np.allclose(a.points, b.points, rtol=0, atol=1e-12)
    # storing the loaded copy again reproduces the file byte for byte
    path2 = tmp_path / "again.csv"
    orbits.cache_store(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_cache_fingerprint_mismatch(tmp_path, g6):
    path = tmp_path / "lib.csv"
    orbits.cache_store(orbits.enumerate_orbits(g6, 3), path)
    with pytest.raises(FingerprintMismatchError, match="fingerprint-mismatch"):
        orbits.cache_load(path, maps.quadratic(-6.5, 0.2))


def test_cache_truncated(tmp_path, g6):
    path = tmp_path / "lib.csv"
    orbits.cache_store(orbits.enumerate_orbits(g6, 5), path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(CorruptCacheError, match=r"corrupt-cache.*row") as info:
        orbits.cache_load(path, g6)
    assert "row" in info.value.context


def test_cache_bad_row_is_named(tmp_path, g6):
    path = tmp_path / "lib.csv"
    orbits.cache_store(orbits.enumerate_orbits(g6, 4), path)
    lines = path.read_text().split("\n")
    lines[4] = lines[4].replace(",", ";", 1)
    path.write_text("\n".join(lines))
    with pytest.raises(CorruptCacheError, match="row 5"):
        orbits.cache_load(path, g6)


def test_cache_missing_rows(tmp_path, g6):
    path = tmp_path / "lib.csv"
    orbits.cache_store(orbits.enumerate_orbits(g6, 4), path)
    lines = path.read_text().split("\n")
    del lines[5]
    path.write_text("\n".join(lines))
    with pytest.raises(CorruptCacheError):
        orbits.cache_load(path, g6)


def test_cache_is_atomic(tmp_path, g6):
    path = tmp_path / "lib.csv"
    orbits.cache_store(orbits.enumerate_orbits(g6, 3), path)
    assert os.listdir(tmp_path) == ["lib.csv"]


def test_errors_are_tagged():
    exc = SeedingDivergedError("boom", word="01", period=2)
    assert isinstance(exc, HenonDimError)
    assert str(exc) == "[seeding-diverged] boom (word=01, period=2)"
    import pickle

    back = pickle.loads(pickle.dumps(exc))
    assert str(back) == str(exc)
