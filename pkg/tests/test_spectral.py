from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuramoto_eq import spectral
from kuramoto_eq.graphs import build_circulant, build_complete, build_ring
from kuramoto_eq.spectral import (
    ExpmOverflowError,
    Propagator,
    SpectralError,
    circulant_spectrum,
    eig,
    expm_action,
    normalize_eigenvector,
)


def series_oracle(K: np.ndarray, x: np.ndarray, t: float, dps: int = 40) -> np.ndarray:
    """exp(tK) x by Taylor series in extended precision."""
    with mpmath.workdps(dps):
        M = mpmath.matrix([[mpmath.mpc(complex(t * v)) for v in row] for row in K])
        term = mpmath.matrix([mpmath.mpc(complex(v)) for v in x])
        acc = term.copy()
        for m in range(1, 400):
            term = (M * term) / m
            acc += term
            if mpmath.norm(term) < mpmath.mpf(10) ** (-dps + 5):
                break
        return np.array([complex(acc[i]) for i in range(len(x))])


@pytest.mark.parametrize("N", [3, 10, 50])
def test_complete_graph_spectrum(N):
    pairs = circulant_spectrum(build_complete(N).entries[:, 0])
    vals = np.array([p.value for p in pairs])
    assert abs(vals[0] - (N - 1)) <= 1e-12
    assert np.max(np.abs(vals[1:] + 1)) <= 1e-12
    dense = np.sort(np.linalg.eigvalsh(build_complete(N).entries))
    assert np.allclose(np.sort(vals.real), dense, atol=1e-12)


def test_example1_eigenpair():
    A = build_circulant(4, [0, 0, 1, 1])
    p = circulant_spectrum(A.entries[:, 0])[1]
    assert abs(p.value - (-1 - 1j)) <= 1e-12
    v = p.vector / p.vector[0]
    assert np.allclose(v, [1, 1j, -1, -1j], atol=1e-15)
    assert not p.is_real_value
    assert np.linalg.norm(A.entries @ p.vector - p.value * p.vector) <= 1e-14


def test_single_node_spectrum():
    (p,) = circulant_spectrum([0.0])
    assert p.value == 0 and np.allclose(p.vector, [1.0])


def test_eig_small_cases():
    vals = [p.value for p in eig(build_complete(3))]
    assert np.allclose(vals, [-1, -1, 2], atol=1e-12)
    vals = [p.value.real for p in eig(build_ring(5, 1))]
    oracle = sorted(2 * math.cos(2 * math.pi * j / 5) for j in range(5))
    assert np.allclose(vals, oracle, atol=1e-12)
    assert all(p.value == 0 for p in eig(np.zeros((3, 3))))


def test_eig_sorted_normalized_and_residual_bounded():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(7, 7))
    pairs = eig(a)
    keys = [(p.value.real, p.value.imag) for p in pairs]
    assert keys == sorted(keys)
    for p in pairs:
        assert abs(np.linalg.norm(p.vector) - 1) < 1e-12
        k = int(np.argmax(np.abs(p.vector) > 1e-12))
        assert abs(p.vector[k].imag) < 1e-15 and p.vector[k].real > 0
        assert np.linalg.norm(a @ p.vector - p.value * p.vector) <= 1e-9 * np.linalg.norm(a)


def test_eig_failure_is_an_error(monkeypatch):
    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(spectral.np.linalg, "eig", boom)
    with pytest.raises(SpectralError, match="converge"):
        eig(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        eig(np.array([[np.inf]]))


def test_normalize_eigenvector():
    v = normalize_eigenvector(np.array([0.0, 3j, 4.0]))
    assert np.allclose(v, [0, 0.6, -0.8j])
    with pytest.raises(SpectralError):
        normalize_eigenvector(np.zeros(3))


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=9))
@settings(max_examples=50)
def test_circulant_spectrum_matches_dense_eig(vals):
    row = [0] + vals
    A = build_circulant(len(row), row)
    fft = np.array([p.value for p in circulant_spectrum(A.entries[:, 0])])
    dense = np.linalg.eigvals(A.entries)
    # multiset comparison via greedy matching
    remaining = list(dense)
    for lam in fft:
        k = int(np.argmin([abs(lam - d) for d in remaining]))
        assert abs(lam - remaining.pop(k)) < 1e-8
    for p in circulant_spectrum(A.entries[:, 0]):
        assert np.linalg.norm(A.entries @ p.vector - p.value * p.vector) < 1e-10


def test_expm_identity_at_zero_and_diagonal():
    x = np.array([1.0, 2j, -1.0])
    assert np.array_equal(expm_action(np.diag([1.0, 2.0, 3.0]), x, 0.0), x)
    got = expm_action(np.diag([1.0, -2.0, 0.5j]), x, 0.7)
    assert np.allclose(got, np.exp(0.7 * np.array([1.0, -2.0, 0.5j])) * x, rtol=1e-14)


@pytest.mark.parametrize("phi", [0.0, math.pi / 4, 1.0])
def test_expm_normal_path_against_series(phi):
    K = cmath.exp(-1j * phi) * build_ring(6, 1).entries
    assert Propagator(K).normal
    x = np.exp(1j * np.random.default_rng(0).uniform(-math.pi, math.pi, 6))
    got = expm_action(K, x, 0.3)
    ref = series_oracle(K, x, 0.3)
    assert np.linalg.norm(got - ref) <= 1e-10 * np.linalg.norm(ref)


def test_expm_non_normal_path_against_series():
    rng = np.random.default_rng(5)
    K = rng.normal(size=(6, 6)) * 0.5
    prop = Propagator(K)
    assert not prop.normal
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    for t in (0.1, 1.0, 2.0):
        ref = series_oracle(K, x, t)
        assert np.linalg.norm(prop.apply(x, t) - ref) <= 1e-10 * np.linalg.norm(ref)


def test_lemma1_eigenvector_stays_eigenvector():
    A = build_circulant(4, [0, 0, 1, 1])
    for p in circulant_spectrum(A.entries[:, 0]):
        for t in (0.1, 1.0, 3.0):
            got = expm_action(A.entries, p.vector, t)
            want = cmath.exp(p.value * t) * p.vector
            assert np.linalg.norm(got - want) <= 1e-12 * max(1.0, np.linalg.norm(want))


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=25)
def test_semigroup(s, t):
    K = build_ring(8, 2).entries * (0.5 - 0.3j)
    x = np.exp(1j * np.arange(8.0))
    prop = Propagator(K)
    a = prop.apply(prop.apply(x, s), t)
    b = prop.apply(x, s + t)
    assert np.linalg.norm(a - b) <= 1e-12 * max(1.0, np.linalg.norm(b))


def test_overflow_is_reported():
    K = 10.0 * build_complete(5).entries
    with pytest.raises(ExpmOverflowError):
        expm_action(K, np.ones(5), 100.0)
    rng = np.random.default_rng(1)
    with pytest.raises(ExpmOverflowError):
        expm_action(rng.normal(size=(4, 4)) + 50 * np.eye(4), np.ones(4), 100.0)
