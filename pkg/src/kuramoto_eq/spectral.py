"""Eigen-analysis and matrix-exponential action.

Circulant spectra come from the discrete Fourier transform in closed form;
everything else goes through LAPACK.  ``expm_action`` diagonalises normal
matrices with a complex Schur factorisation (exact unitary basis, robust to
repeated eigenvalues) and falls back to scaling-and-squaring Pade
(:func:`scipy.linalg.expm`) for non-normal ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .graphs import AdjacencyMatrix

__all__ = [
    "EigenPair",
    "ExpmOverflowError",
    "Propagator",
    "SpectralError",
    "TOL_EIG",
    "circulant_spectrum",
    "eig",
    "expm_action",
    "is_real_eigenvalue",
    "normalize_eigenvector",
]

TOL_EIG = 1e-9
# beyond this, exp(t * Re(mu)) overflows float64
_MAX_EXPONENT = 700.0


class SpectralError(RuntimeError):
    """Eigen-solver failure or an eigenpair that misses its residual bound."""


class ExpmOverflowError(OverflowError):
    """Raised when ``exp(tK) x`` leaves the float64 range."""


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: complex
    vector: np.ndarray
    is_real_value: bool
    residual: float = 0.0


def is_real_eigenvalue(value: complex, tol: float = TOL_EIG) -> bool:
    return abs(complex(value).imag) <= tol * (1.0 + abs(value))


def normalize_eigenvector(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit 2-norm, first non-negligible component rotated onto the positive real axis."""
    v = np.asarray(v, dtype=np.complex128)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise SpectralError("zero vector cannot be an eigenvector")
    v = v / nrm
    mags = np.abs(v)
    k = int(np.argmax(mags > tol * mags.max()))
    return v * (np.conj(v[k]) / mags[k])


def _as_array(A) -> np.ndarray:
    return A.entries if isinstance(A, AdjacencyMatrix) else np.asarray(A)


def circulant_spectrum(first_column: Sequence[float], tol: float = TOL_EIG) -> list[EigenPair]:
    """All eigenpairs of the circulant matrix with the given first column.

    Pair ``j`` has vector ``(1, w^j, ..., w^((n-1)j)) / sqrt(n)`` with
    ``w = exp(2 pi i / n)`` and value
    ``c_0 + c_{n-1} w^j + c_{n-2} w^(2j) + ... + c_1 w^((n-1)j)``,
    which is the DFT of the column.
    """
    c = np.asarray(first_column, dtype=np.float64)
    n = c.shape[0]
    if c.ndim != 1 or n < 1:
        raise ValueError("first_column must be a non-empty vector")
    values = np.fft.fft(c)
    m = np.arange(n)
    pairs = []
    for j in range(n):
        # integer reduction keeps the phases exact multiples of 2 pi / n
        vec = np.exp(2j * np.pi * ((j * m) % n) / n) / np.sqrt(n)
        lam = complex(values[j])
        pairs.append(EigenPair(lam, vec, is_real_eigenvalue(lam, tol)))
    return pairs


def _check_residual(a: np.ndarray, lam: complex, v: np.ndarray, bound: float) -> float:
    res = float(np.linalg.norm(a @ v - lam * v))
    if res > bound:
        raise SpectralError(f"eigenpair residual {res:.3e} exceeds bound {bound:.3e} (lambda={lam})")
    return res


def eig(A: AdjacencyMatrix | np.ndarray, tol: float = TOL_EIG, symmetric: bool | None = None) -> list[EigenPair]:
    """Numerical eigendecomposition, values sorted ascending by (Re, Im).

    Symmetric input uses ``eigh`` (real values, real orthonormal vectors).
    Every pair is checked against ``||Av - lambda v|| <= tol * ||A||_F``;
    a violation raises :class:`SpectralError` instead of being dropped.
    """
    a = np.asarray(_as_array(A), dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if symmetric is None:
        symmetric = A.flags.symmetric if isinstance(A, AdjacencyMatrix) else bool(np.array_equal(a, a.T))
    try:
        if symmetric:
            w, V = np.linalg.eigh(a)
            w = w.astype(np.complex128)
        else:
            w, V = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    bound = tol * max(np.linalg.norm(a), np.finfo(float).tiny)
    pairs = []
    for k in order:
        lam = complex(w[k])
        if symmetric:
            lam = complex(lam.real, 0.0)
        v = normalize_eigenvector(V[:, k])
        res = _check_residual(a, lam, v, bound)
        pairs.append(EigenPair(lam, v, is_real_eigenvalue(lam, tol), res))
    return pairs


class Propagator:
    """Applies ``exp(tK)`` to vectors for repeated ``t``.

    Normal ``K`` is factored once as ``Q diag(mu) Q^H``; otherwise each
    distinct ``t`` gets one cached Pade evaluation.
    """

    def __init__(self, K: np.ndarray, normal_tol: float = 1e-12):
        K = np.asarray(K, dtype=np.complex128)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"K must be square, got shape {K.shape}")
        if not np.all(np.isfinite(K)):
            raise ValueError("K must be finite")
        self.K = K
        scale = max(np.linalg.norm(K), 1.0)
        comm = K @ K.conj().T - K.conj().T @ K
        self.normal = bool(np.linalg.norm(comm) <= normal_tol * scale * scale)
        self._cache: dict[float, np.ndarray] = {}
        if self.normal:
            T, Q = scipy.linalg.schur(K, output="complex")
            self.mu = np.diag(T).copy()
            self.Q = Q
        else:
            self.growth = np.linalg.eigvals(K).real

    def apply(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if t == 0.0:
            return x.copy()
        if self.normal:
            expo = t * self.mu
            if np.max(expo.real) > _MAX_EXPONENT:
                raise ExpmOverflowError(f"exp(tK) overflows at t={t} (max Re(t mu) = {np.max(expo.real):.1f})")
            y = self.Q @ (np.exp(expo) * (self.Q.conj().T @ x))
        else:
            E = self._cache.get(t)
            if E is None:
                if np.max(t * self.growth) > _MAX_EXPONENT:
                    raise ExpmOverflowError(f"exp(tK) too large to evaluate at t={t}")
                E = scipy.linalg.expm(t * self.K)
                self._cache[t] = E
            y = E @ x
        if not np.all(np.isfinite(y)):
            raise ExpmOverflowError(f"non-finite result of exp(tK) x at t={t}")
        return y


def expm_action(K: np.ndarray, x0: np.ndarray, t: float) -> np.ndarray:
    """Return ``exp(tK) @ x0``."""
    return Propagator(K).apply(x0, float(t))
