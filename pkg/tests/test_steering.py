from __future__ import annotations

import numpy as np
import pytest

from critsteer.chain import DecoherenceSample
from critsteer.channel import I2, SZ, pure_state
from critsteer.steering import (build_measurements, default_angles, s2_analytic, s3_analytic,
                                s_max, ts_parameter_numeric)


def test_invalid_n():
    with pytest.raises(ValueError):
        build_measurements(0.1, 0.2, 4)
    with pytest.raises(ValueError):
        s_max(1, 0.5)


@pytest.mark.parametrize("n", [2, 3])
def test_projector_pairs_and_orthogonal_axes(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        m = build_measurements(rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi), n)
        for plus, minus in m.projectors:
            assert np.abs(plus.matrix + minus.matrix - I2).max() <= 1e-12
            assert np.abs(plus.matrix @ plus.matrix - plus.matrix).max() <= 1e-12
        ax = m.axes
        gram = ax @ ax.T
        assert np.abs(gram - np.eye(n)).max() <= 1e-10


def test_axis_examples():
    ax = build_measurements(0.0, 0.0, 3).axes
    assert np.allclose(np.abs(ax), [[0, 0, 1], [0, 1, 0], [1, 0, 0]], atol=1e-12)
    ax = build_measurements(0.37, np.pi / 2, 2).axes
    assert np.abs(ax[:, 2]).max() <= 1e-12
    assert np.allclose(np.abs(build_measurements(*default_angles(2), 2).axes),
                       [[1, 0, 0], [0, 1, 0]], atol=1e-12)


def test_numeric_examples():
    m = build_measurements(0.4, 1.3, 2)
    assert ts_parameter_numeric(1.0, m) == pytest.approx(2.0, abs=1e-12)
    eq = build_measurements(0.4, np.pi / 2, 2)
    assert ts_parameter_numeric(0.0, eq) == pytest.approx(0.0, abs=1e-12)
    sample = DecoherenceSample(t=1.0, f=0.3 + 0.1j, abs_f=abs(0.3 + 0.1j), re_f=0.3)
    assert ts_parameter_numeric(sample, m) == ts_parameter_numeric(0.3 + 0.1j, m)


def test_analytic_examples():
    assert s2_analytic(0.3, 0.9, 1.0) == pytest.approx(2.0)
    assert s2_analytic(np.pi / 4, 0.0, 0.0) == pytest.approx(0.5)
    assert s2_analytic(0.0, 0.0, 0.6) == pytest.approx(1 + 0.36)
    assert s3_analytic(0.3, 0.9, 1.0) == pytest.approx(3.0)
    assert s3_analytic(0.0, 0.0, 0.6) == pytest.approx(1 + 2 * 0.36)
    assert s3_analytic(0.7, np.pi / 2, 0.0) == pytest.approx(1.0)
    assert s_max(2, 0.0) == 1 and s_max(3, 1.0) == 3


def test_numeric_equals_analytic():
    rng = np.random.default_rng(11)
    for _ in range(100):
        th, ph = rng.uniform(0, 2 * np.pi, 2)
        re = rng.uniform(-1, 1)
        f = re + 1j * rng.uniform(-1, 1) * np.sqrt(1 - re**2)
        assert ts_parameter_numeric(f, build_measurements(th, ph, 2)) == pytest.approx(
            s2_analytic(th, ph, re), abs=1e-10)
        assert ts_parameter_numeric(f, build_measurements(th, ph, 3)) == pytest.approx(
            s3_analytic(th, ph, re), abs=1e-10)


def test_z_rotation_invariance():
    rng = np.random.default_rng(12)
    for _ in range(30):
        m = build_measurements(*rng.uniform(0, np.pi, 2), 2)
        chi = rng.uniform(0, 2 * np.pi)
        U = np.cos(chi / 2) * I2 + 1j * np.sin(chi / 2) * SZ
        f = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        assert ts_parameter_numeric(f, m.conjugated(U)) == pytest.approx(
            ts_parameter_numeric(f, m), abs=1e-12)


def test_bounds():
    rng = np.random.default_rng(13)
    for _ in range(200):
        th, ph = rng.uniform(0, np.pi, 2)
        re = rng.uniform(-1, 1)
        for n, fn in ((2, s2_analytic), (3, s3_analytic)):
            s = fn(th, ph, re)
            assert -1e-12 <= s <= n + 1e-12
            assert s <= s_max(n, re) + 1e-12


def test_non_default_initial_state():
    rho0 = pure_state([1, 0])
    m = build_measurements(0.0, 0.0, 2)
    # |1> only has the +z outcome on the z axis; the zero branch is skipped
    val = ts_parameter_numeric(0.5, m, rho0)
    assert 0 <= val <= 2
