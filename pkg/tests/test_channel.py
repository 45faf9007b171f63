from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critsteer.channel import (NonPhysicalFactorError, ZeroProbabilityBranch, apply_dephasing,
                               bloch_projector, maximally_mixed, measure, pure_state,
                               validate_state)

PLUS = pure_state([1, 1])


def test_identity_and_full_dephasing():
    rho = pure_state([0.6, 0.8j])
    assert np.array_equal(apply_dephasing(rho, 1.0), rho)
    assert np.allclose(apply_dephasing(PLUS, 0.0), maximally_mixed())


def test_half_factor_example():
    assert np.allclose(apply_dephasing(PLUS, 0.5), [[0.5, 0.25], [0.25, 0.5]])


def test_coherence_convention():
    rho = pure_state([1, 1j])
    f = 0.3 + 0.4j
    out = apply_dephasing(rho, f)
    assert out[0, 1] == pytest.approx(rho[0, 1] * np.conj(f))
    assert out[1, 0] == pytest.approx(rho[1, 0] * f)


def test_rejects_nonphysical_factor():
    with pytest.raises(NonPhysicalFactorError):
        apply_dephasing(PLUS, 1.01)
    apply_dephasing(PLUS, 1 + 1e-10)


def _random_state(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_trace_and_positivity_preserving():
    rng = np.random.default_rng(3)
    for _ in range(200):
        rho = _random_state(rng)
        f = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        out = apply_dephasing(rho, f)
        validate_state(out)


@settings(max_examples=100, deadline=None)
@given(r1=st.floats(0, 1), r2=st.floats(0, 1), a1=st.floats(0, 6.3), a2=st.floats(0, 6.3))
def test_composition(r1, r2, a1, a2):
    f1, f2 = r1 * np.exp(1j * a1), r2 * np.exp(1j * a2)
    rho = pure_state([0.3, 0.7 + 0.2j])
    lhs = apply_dephasing(apply_dephasing(rho, f1), f2)
    assert np.allclose(lhs, apply_dephasing(rho, f1 * f2), atol=1e-14)


def test_measure_examples():
    p = bloch_projector([1, 1, 0])
    prob, post = measure(maximally_mixed(), p)
    assert prob == pytest.approx(0.5) and np.allclose(post, p.matrix)
    prob, post = measure(p.matrix, p)
    assert prob == pytest.approx(1.0) and np.allclose(post, p.matrix)
    with pytest.raises(ZeroProbabilityBranch):
        measure(bloch_projector([1, 1, 0], a=-1).matrix, p)


def test_outcome_probabilities_sum_to_one():
    rng = np.random.default_rng(5)
    for _ in range(100):
        rho = _random_state(rng)
        n = rng.normal(size=3)
        total = sum(measure(rho, bloch_projector(n, a=a))[0] for a in (1, -1))
        assert abs(total - 1) <= 1e-12


def test_projector_invariants_and_state_validation():
    p = bloch_projector([0.2, -0.5, 0.9])
    assert np.abs(p.matrix @ p.matrix - p.matrix).max() <= 1e-12
    assert np.trace(p.matrix).real == pytest.approx(1.0)
    assert np.allclose(p.bloch, np.array([0.2, -0.5, 0.9]) / np.linalg.norm([0.2, -0.5, 0.9]))
    for bad in (np.eye(2), np.array([[1, 1], [0, 0]]), np.diag([1.5, -0.5]), np.eye(3) / 3):
        with pytest.raises(ValueError):
            validate_state(bad)
