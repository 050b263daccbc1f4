import math

import numpy as np
import pytest

from henondim import oracle, pressure
from henondim.errors import DegenerateLambdaError, IncompleteLibraryError

LOG2 = math.log(2)


def test_partition_sum_at_zero(lib6):
    for n in (1, 5, 12):
        log_z, _, _ = pressure.partition_sums(lib6, n, 0.0)
        assert abs(log_z / n - LOG2) < 1e-14


def test_partition_sum_constant_multiplier(symmetric):
    lib = oracle.synthetic_library(symmetric, 8)
    for n, t in ((3, 0.7), (8, 1.9)):
        log_z, mean, var = pressure.partition_sums(lib, n, t)
        assert abs(log_z - n * math.log(2 * 4.0**-t)) < 1e-12
        assert abs(mean - math.log(4)) < 1e-15 and var < 1e-28


def test_partition_sum_binomial(asym):
    lib = oracle.synthetic_library(asym, 4)
    log_z, _, _ = pressure.partition_sums(lib, 2, 1.0)
    assert abs(math.exp(log_z) - 0.390625) < 1e-15


def test_partition_sum_large_t_no_overflow(lib6):
    for t in (0.0, 4.0, 8.0):
        log_z, mean, var = pressure.partition_sums(lib6, 12, t)
        assert np.isfinite([log_z, mean, var]).all()


def test_incomplete_library(g6):
    from henondim.orbits import enumerate_orbits

    lib = enumerate_orbits(g6, 5)
    lib.complete[2] = False
    with pytest.raises(IncompleteLibraryError):
        pressure.partition_sums(lib, 4, 0.5)
    pressure.partition_sums(lib, 5, 0.5)


def test_sample_at_zero(lib6):
    s = pressure.sample_at(lib6, 0.0, 12)
    assert abs(s.P_u - LOG2) < 1e-9 and abs(s.h - LOG2) < 1e-9
    assert s.Lambda >= LOG2 - 1e-9
    # uniform weights: each of the m points of a period-m orbit carries log|lambda_u| / m
    logs = [o.log_mult_u for o in lib6.all_orbits() if 12 % o.period == 0]
    assert abs(s.Lambda - math.fsum(logs) / 2**12) < 1e-12


def test_symmetric_oracle_samples(symmetric):
    lib = oracle.synthetic_library(symmetric, 6)
    for t in (0, 0.3, 1.7):
        s = pressure.sample_at(lib, t, 6)
        assert abs(s.P_u - (LOG2 - t * math.log(4))) < 1e-13
        assert abs(s.Lambda - math.log(4)) < 1e-14 and abs(s.h - LOG2) < 1e-13


def test_asymmetric_oracle_sample(asym):
    s = pressure.sample_at(oracle.synthetic_library(asym, 6), 1.0, 6)
    assert abs(s.P_u - math.log(0.625)) < 1e-13
    # weights 0.8 / 0.2 on log 2 / log 8 give 1.4 log 2
    assert abs(s.Lambda - 1.4 * LOG2) < 1e-13


def test_stable_identity_exact(lib6):
    ev = pressure.LibraryPressure(lib6, 12)
    for t in np.linspace(0, 2, 21):
        s = ev.sample(float(t))
        assert s.P_s == s.P_u + float(t) * lib6.log_a


def test_gibbs_entropy_identity(lib6):
    for n, t in ((6, 0.4), (10, 1.1), (12, 0.0)):
        log_z, mean, _ = pressure.partition_sums(lib6, n, t)
        meas = pressure.gibbs_weights(lib6, n, t)
        assert len(meas.weights) == 2**n
        assert abs(math.fsum(meas.weights.values()) - 1) < 1e-12
        assert abs(meas.entropy() / n - (log_z / n + t * mean)) < 1e-10


def test_entropy_bounds(lib6):
    ev = pressure.LibraryPressure(lib6, 12)
    for t in np.linspace(0, 2, 41):
        h = ev.sample(float(t)).h
        assert -1e-12 <= h <= LOG2 + 1e-9


def test_variance_and_lambda_derivative(asym):
    ev = pressure.LibraryPressure(oracle.synthetic_library(asym, 10), 10)
    eps = 1e-4
    for t in (0.2, 0.5, 1.0):
        _, _, var = pressure.partition_sums(ev.library, 10, t)
        assert var >= 0
        fd = (ev.sample(t + eps).Lambda - ev.sample(t - eps).Lambda) / (2 * eps)
        assert abs(fd + 10 * var) <= 1e-6
        assert ev.sample(t).dLambda == -10 * var


def test_pressure_derivative_oracle(asym):
    eps = 1e-4
    for t in (0.1, 0.5, 1.3):
        fd = (oracle.exact_sample(asym, t + eps).P_u - oracle.exact_sample(asym, t - eps).P_u) / (2 * eps)
        assert abs(fd + oracle.exact_sample(asym, t).Lambda) <= 1e-6


def test_dimension_derivative_oracle(asym):
    eps = 1e-4
    for t in (0.1, 0.4, 0.9):
        fd = (oracle.exact_sample(asym, t + eps).Delta - oracle.exact_sample(asym, t - eps).Delta) / (2 * eps)
        assert abs(fd - oracle.exact_sample(asym, t).dDelta) <= 1e-6


def test_young_form_agrees(lib6):
    ev = pressure.LibraryPressure(lib6, 12)
    for t in np.linspace(0, 2, 11):
        s = ev.sample(float(t))
        alt = pressure.dimension_value_young(s.h, s.Lambda, lib6.log_a)
        assert abs(alt - s.Delta) <= 1e-12


def test_curve_monotone(lib6):
    curve = pressure.build_curve(lib6, pressure.t_grid(0, 2, 0.01), 12)
    assert len(curve.samples) == 201
    assert curve.strictly_decreasing and curve.lambda_nonincreasing


def test_curve_oracle_closed_form(asym):
    curve = pressure.build_curve(oracle.synthetic_library(asym, 8), [0.0, 0.5, 1.0], 8)
    for s in curve.samples:
        ref = oracle.exact_sample(asym, s.t)
        assert abs(s.P_u - ref.P_u) < 1e-12 and abs(s.Lambda - ref.Lambda) < 1e-12


def test_curve_csv(asym):
    text = pressure.build_curve(asym, [0.0, 0.5]).to_csv()
    lines = text.splitlines()
    assert lines[0] == "t,P_u,P_s,Lambda,h,Delta,dDelta,n_used,err_est"
    assert lines[1].split(",")[1] == f"{math.log(2):.17g}"
    assert float(lines[2].split(",")[1]) == oracle.exact_sample(asym, 0.5).P_u


def test_grid_validation(asym):
    with pytest.raises(ValueError):
        pressure.build_curve(asym, [0.5, 0.2])
    with pytest.raises(ValueError):
        pressure.build_curve(asym, [0.0, 4.5])
    assert pressure.build_curve(asym, [0.0, 4.5], t_cap=5.0).samples[-1].t == 4.5


def test_t_grid():
    g = pressure.t_grid(0, 2, 0.01)
    assert len(g) == 201 and g[-1] == 2.0 and g[37] == 0.37


def test_degenerate_lambda():
    with pytest.raises(DegenerateLambdaError, match="degenerate-Lambda"):
        pressure.make_sample(0.1, 0.5, 0.0, 0.0, 0.0, 5, 0.0)


def test_small_n_max_rejected(lib6):
    with pytest.raises(ValueError):
        pressure.LibraryPressure(lib6, 2)
