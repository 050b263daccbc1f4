import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henondim import maps
from henondim.errors import EscapedError, OrientationError

G = maps.quadratic(-6, 0.2)
G2 = maps.make_map([((-6, 0, 1), 0.5), ((-7, 0, 1), 0.4)])

coord = st.builds(
    lambda r, th: r * cmath.exp(1j * th),
    st.floats(0, 3, allow_nan=False),
    st.floats(0, 2 * math.pi, allow_nan=False),
)


def test_forward_examples():
    assert maps.eval_map(G, (0, 0)) == (0, -6)
    z, w = maps.eval_map(G, (1, 2))
    assert z == 2 and abs(w - (-1.8)) < 1e-15


def test_fixed_points():
    disc = math.sqrt(24.64)
    for w in ((0.8 + disc) / 2, (0.8 - disc) / 2):
        z1, w1 = maps.eval_map(G, (w, w))
        assert abs(z1 - w) < 1e-12 and abs(w1 - w) < 1e-12


def test_inverse_example():
    assert maps.eval_inverse(G, (0, -6)) == (0, 0)


@pytest.mark.parametrize("g", [G, G2], ids=["one-factor", "two-factor"])
def test_round_trip_random_bidisk(g):
    rng = np.random.default_rng(7)
    r = 3 * np.sqrt(rng.random((2, 100)))
    th = 2 * np.pi * rng.random((2, 100))
    z, w = r * np.exp(1j * th)
    fz, fw = maps.eval_map(g, (z, w))
    bz, bw = maps.eval_inverse(g, (fz, fw))
    scale = np.maximum(1, np.maximum(np.abs(fz), np.abs(fw)))
    assert np.all(np.abs(bz - z) <= 1e-12 * scale)
    assert np.all(np.abs(bw - w) <= 1e-12 * scale)
    iz, iw = maps.eval_inverse(g, (z, w))
    gz, gw = maps.eval_map(g, (iz, iw))
    scale = np.maximum(1, np.maximum(np.abs(iz), np.abs(iw)))
    assert np.all(np.abs(gz - z) <= 1e-12 * scale) and np.all(np.abs(gw - w) <= 1e-12 * scale)


@settings(max_examples=200, deadline=None)
@given(coord, coord)
def test_round_trip_property(z, w):
    fz, fw = maps.eval_map(G, (z, w))
    bz, bw = maps.eval_inverse(G, (fz, fw))
    scale = max(1, abs(fz), abs(fw))
    assert abs(bz - z) <= 1e-12 * scale and abs(bw - w) <= 1e-12 * scale


def test_jacobian_example():
    J = maps.jacobian_at(G, (0.3, 1.5 + 0.5j))
    assert np.allclose(J, [[0, 1], [0.2, 2 * (1.5 + 0.5j)]], atol=0)
    assert abs(np.linalg.det(J) - (-0.2)) < 1e-15
    assert G.jac_det == -0.2 and G.jac_mod == 0.2


def test_determinant_constant():
    rng = np.random.default_rng(3)
    for g in (G, G2):
        for _ in range(1000):
            p = 3 * (rng.random(2) - 0.5) + 3j * (rng.random(2) - 0.5)
            det = np.linalg.det(maps.jacobian_at(g, p))
            assert abs(det - g.jac_det) <= 1e-12 * max(1, np.abs(maps.jacobian_at(g, p)).max() ** 2)


def test_composed_jacobian_modulus():
    assert abs(abs(G2.jac_det) - 0.2) < 1e-15
    assert G2.jac_det == (-0.5) * (-0.4)


def test_characterize():
    g23 = maps.make_map([((1, 0, 1), 0.5), ((0, 0, 0, 1), 0.5)])
    assert maps.characterize(g23)[0] == 6
    assert maps.characterize(G) == (2, 0.2, "decreasing")
    deg, mod, cls = maps.characterize(maps.quadratic(-10, cmath.exp(0.7j)))
    assert cls == "preserving" and abs(mod - 1) < 1e-12
    with pytest.raises(OrientationError, match=r"\[orientation\]"):
        maps.characterize(maps.quadratic(-6, 1.5))


def test_degree_matches_word_count():
    from henondim.orbits import seed_itineraries

    for n in (1, 2, 3, 5):
        assert maps.characterize(G)[0] ** n == len(seed_itineraries(G, n))


def test_escape():
    with pytest.raises(EscapedError, match="escaped"):
        maps.eval_map(G, (0, 1e5))
    with pytest.raises(EscapedError):
        maps.eval_map(G, (float("nan"), 0))


def test_factor_validation():
    with pytest.raises(ValueError):
        maps.HenonFactor((1, 1), 0.2)
    with pytest.raises(ValueError):
        maps.HenonFactor((1, 0, 1), 0)
    # trailing zero coefficients do not raise the degree
    assert maps.HenonFactor((1, 0, 1, 0), 0.3).degree == 2


def test_factor_order_matters_for_points_only():
    a = maps.make_map([((-6, 0, 1), 0.5), ((-7, 0, 1), 0.4)])
    b = maps.make_map([((-7, 0, 1), 0.4), ((-6, 0, 1), 0.5)])
    assert a.degree == b.degree and a.jac_mod == b.jac_mod
    assert maps.eval_map(a, (0.1, 0.2)) != maps.eval_map(b, (0.1, 0.2))
    assert a.fingerprint() != b.fingerprint()
