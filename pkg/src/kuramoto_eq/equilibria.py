"""Equilibrium construction and certification.

A phase vector ``theta`` is an equilibrium of the (phase-lag) Kuramoto
model when every component of

    eps * sum_j a_ij sin(theta_j - theta_i - phi_i)

vanishes.  The constructors here generate candidates from spectral data
(unimodular eigenvectors, group characters, joins of circulant layers,
spectral surgery on random graphs), and every candidate is accepted only
after that sum has been evaluated directly.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Literal, Mapping, Sequence

import numpy as np

from .dynamics import wrap_phases
from .graphs import AdjacencyMatrix, GraphFlags, GroupSpec, build_g_circulant
from .spectral import TOL_EIG, circulant_spectrum, eig, is_real_eigenvalue

__all__ = [
    "CompleteClass",
    "DesignError",
    "DesignResult",
    "EquilibriumCertificate",
    "TOL_EQ_REL",
    "classify_complete",
    "design_random_equilibrium",
    "equilibria_from_eigenvectors",
    "equilibrium_tolerance",
    "g_circulant_equilibria",
    "multilayer_certificate",
    "multilayer_equilibrium",
    "per_node_phase_lags",
    "phase_lag_for_eigenvalue",
    "sine_residual",
    "twisted_state",
    "verify_equilibrium",
]

log = logging.getLogger(__name__)

TOL_EQ_REL = 1e-9
TOL_MODULUS = 1e-8

Source = Literal[
    "twisted", "complete_zero_sum", "complete_pi_multiples", "eigenvector",
    "character", "multilayer", "designed", "user",
]


class DesignError(RuntimeError):
    """Spectral surgery produced a matrix that fails the equilibrium gate."""


@dataclass
class EquilibriumCertificate:
    """A phase vector with the directly evaluated proof that it is stationary.

    ``residual`` is ``max_i |eps * sum_j a_ij sin(theta_j - theta_i - phi_i)|``;
    the certificate is accepted when it does not exceed ``tolerance``.
    """

    theta: np.ndarray
    residual: float
    tolerance: float
    lam: complex | None = None
    phi: float | np.ndarray = 0.0
    source: Source = "user"
    epsilon: float = 1.0
    phi_alternate: float | None = None
    zero_eigenvalue: bool = False
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        phi = self.phi.tolist() if isinstance(self.phi, np.ndarray) else float(self.phi)
        return {
            "theta": [float(v) for v in self.theta],
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "accepted": self.accepted,
            "lambda": None if self.lam is None else [float(self.lam.real), float(self.lam.imag)],
            "phi": phi,
            "phi_alternate": self.phi_alternate,
            "zero_eigenvalue": self.zero_eigenvalue,
            "epsilon": float(self.epsilon),
            "source": self.source,
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EquilibriumCertificate":
        lam = d.get("lambda")
        phi = d.get("phi", 0.0)
        return cls(
            theta=np.asarray(d["theta"], dtype=np.float64),
            residual=float(d["residual"]),
            tolerance=float(d["tolerance"]),
            lam=None if lam is None else complex(lam[0], lam[1]),
            phi=np.asarray(phi, dtype=np.float64) if isinstance(phi, list) else float(phi),
            source=d.get("source", "user"),
            epsilon=float(d.get("epsilon", 1.0)),
            phi_alternate=d.get("phi_alternate"),
            zero_eigenvalue=bool(d.get("zero_eigenvalue", False)),
            info=dict(d.get("info", {})),
        )


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, AdjacencyMatrix) else np.asarray(A, dtype=np.float64)


def equilibrium_tolerance(A, epsilon: float = 1.0, rel: float = TOL_EQ_REL) -> float:
    """Default acceptance threshold ``rel * |eps| * max_i sum_j |a_ij|``."""
    a = _entries(A)
    return rel * abs(epsilon) * float(np.max(np.sum(np.abs(a), axis=1)))


def sine_residual(A, theta, epsilon: float = 1.0, phi: float | Sequence[float] = 0.0) -> np.ndarray:
    """Right-hand side of the phase-lag model at ``theta``, evaluated term by term."""
    a = _entries(A)
    theta = np.asarray(theta, dtype=np.float64)
    n = a.shape[0]
    if theta.shape != (n,):
        raise ValueError(f"theta must have length {n}, got shape {theta.shape}")
    lag = np.broadcast_to(np.asarray(phi, dtype=np.float64), (n,))
    diff = theta[None, :] - theta[:, None] - lag[:, None]
    return epsilon * np.sum(a * np.sin(diff), axis=1)


def twisted_state(n: int, j: int) -> np.ndarray:
    """Phases ``2 pi j m / n`` for ``m = 0..n-1``, wrapped to ``[-pi, pi)``.

    The product ``j m`` is reduced mod ``n`` in integers first, so nodes
    ``m`` and ``n - m`` get exactly opposite phases.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= j <= n - 1:
        raise ValueError(f"winding number j must satisfy 0 <= j <= {n - 1}, got {j}")
    r = (j * np.arange(n)) % n
    r = np.where(2 * r >= n, r - n, r)
    return 2.0 * math.pi * r / n  # r in [-n/2, n/2), already in range


def phase_lag_for_eigenvalue(lam: complex, tol: float = TOL_EIG) -> tuple[float, float]:
    """Phase lag making ``lam * exp(-i phi)`` real.

    Returns ``(phi, alternate)`` with ``phi`` in ``(-pi/2, pi/2]`` and
    ``alternate = phi + pi`` wrapped into ``[-pi, pi)``.  Real (or zero)
    eigenvalues give ``phi = 0``.
    """
    lam = complex(lam)
    if lam == 0 or is_real_eigenvalue(lam, tol):
        phi = 0.0
    else:
        phi = math.atan2(lam.imag, lam.real)
        phi = phi - math.pi * round(phi / math.pi)  # now in [-pi/2, pi/2]
        if phi <= -math.pi / 2:
            phi += math.pi
    return phi, float(wrap_phases(phi + math.pi))


def _matched_eigenvalue(a: np.ndarray, theta: np.ndarray, tol_eig: float) -> complex | None:
    x = np.exp(1j * theta)
    n = theta.shape[0]
    lam = complex(np.vdot(x, a @ x) / n)
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return lam
    res = np.linalg.norm(a @ x - lam * x) / (fro * math.sqrt(n))
    return lam if res <= tol_eig else None


def verify_equilibrium(
    A,
    theta,
    epsilon: float = 1.0,
    phi: float | Sequence[float] = 0.0,
    tol: float | None = None,
    tol_eig: float = TOL_EIG,
    source: Source = "user",
) -> EquilibriumCertificate:
    """Certify ``theta`` by direct evaluation of the coupling sum.

    Never raises for a non-equilibrium; the returned certificate simply has
    a large residual and ``accepted == False``.  ``lam`` is filled in when
    ``exp(i theta)`` is numerically an eigenvector of ``A``.
    """
    a = _entries(A)
    theta = np.asarray(theta, dtype=np.float64)
    r = sine_residual(a, theta, epsilon, phi)
    if tol is None:
        tol = equilibrium_tolerance(a, epsilon)
    phi_val = np.asarray(phi, dtype=np.float64) if np.ndim(phi) else float(phi)
    return EquilibriumCertificate(
        theta=theta.copy(),
        residual=float(np.max(np.abs(r))),
        tolerance=float(tol),
        lam=_matched_eigenvalue(a, theta, tol_eig),
        phi=phi_val,
        source=source,
        epsilon=float(epsilon),
    )


def per_node_phase_lags(A, theta, tol: float = 1e-12) -> np.ndarray:
    """Per-node lags ``phi_i`` turning ``theta`` into an equilibrium.

    With ``lambda_i = (A x)_i / x_i`` for ``x = exp(i theta)``, choosing
    ``phi_i`` so that ``lambda_i exp(-i phi_i)`` is real zeroes row ``i`` of
    the coupling sum.  Rows with ``lambda_i = 0`` already vanish; they get 0.
    """
    a = _entries(A)
    x = np.exp(1j * np.asarray(theta, dtype=np.float64))
    lam_i = (a @ x) / x
    scale = max(float(np.max(np.abs(a))), 1.0) * tol
    return np.array([phase_lag_for_eigenvalue(l)[0] if abs(l) > scale else 0.0 for l in lam_i])


@dataclass(frozen=True)
class CompleteClass:
    kind: Literal["pi_multiples", "zero_sum", "not_equilibrium"]
    both: bool = False


def classify_complete(theta, tol: float = 1e-9) -> CompleteClass:
    """Classify ``theta`` as an equilibrium of the complete-graph model.

    On ``K_n`` the equilibria are exactly the phase vectors whose entries
    differ pairwise by multiples of pi, plus those with
    ``sum_k exp(i theta_k) = 0``.  When both hold the result is
    ``pi_multiples`` with ``both=True``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    n = theta.shape[0]
    if n < 2:
        raise ValueError("classification needs at least two phases")
    d = theta[:, None] - theta[None, :]
    pi_mult = bool(np.max(np.abs(d - math.pi * np.round(d / math.pi))) <= tol)
    zero_sum = bool(abs(np.sum(np.exp(1j * theta))) <= n * tol)
    if pi_mult:
        return CompleteClass("pi_multiples", both=zero_sum)
    if zero_sum:
        return CompleteClass("zero_sum")
    return CompleteClass("not_equilibrium")


def equilibria_from_eigenvectors(
    A: AdjacencyMatrix,
    tol_modulus: float = TOL_MODULUS,
    epsilon: float = 1.0,
    phase_lag: Literal["auto"] | float = "auto",
) -> list[EquilibriumCertificate]:
    """Equilibria read off eigenvectors with constant-modulus entries.

    Circulant matrices use the Fourier eigenbasis (the numerical solver
    would mix the degenerate pairs ``j, n-j`` into real vectors); other
    matrices use :func:`spectral.eig`.  Each basis vector is tested on its
    own, so unimodular combinations inside a degenerate eigenspace are not
    searched for.

    With ``phase_lag="auto"`` the lag is derived from the eigenvalue, ``0``
    for real ones.  A numeric ``phase_lag`` keeps only the vectors that are
    equilibria for that lag.  Only accepted certificates are returned.
    """
    if A.flags.circulant:
        pairs = circulant_spectrum(A.entries[:, 0])
    else:
        pairs = eig(A)
    tol = equilibrium_tolerance(A, epsilon)
    out = []
    for idx, pair in enumerate(pairs):
        v = pair.vector
        mags = np.abs(v)
        m = float(mags.mean())
        if m == 0.0 or mags.min() <= tol_modulus * m:
            continue
        if float(np.max(np.abs(mags - m))) > tol_modulus * m:
            continue
        theta = wrap_phases(np.angle(v / m))
        lam = complex(pair.value)
        if phase_lag == "auto":
            phi, alt = phase_lag_for_eigenvalue(lam)
        else:
            phi = float(phase_lag)
            alt = float(wrap_phases(phi + math.pi))
        cert = verify_equilibrium(A, theta, epsilon, phi, tol=tol, source="eigenvector")
        if not cert.accepted:
            log.debug("eigenvector %d rejected: residual %.3e > %.3e", idx, cert.residual, tol)
            continue
        cert.lam = lam
        cert.phi_alternate = alt
        cert.zero_eigenvalue = abs(lam) <= TOL_EIG * max(1.0, A.max_row_sum)
        cert.info.update({"index": idx, "real_eigenvalue": pair.is_real_value})
        out.append(cert)
    return out


def _character_phases(group: GroupSpec, exponents: Sequence[int]) -> np.ndarray:
    # chi_a(g) = exp(2 pi i sum_k a_k g_k / n_k), kept as integers mod |G|
    order = group.order
    weights = [order // f for f in group.factors]
    r = np.array(
        [sum(a * g * w for a, g, w in zip(exponents, elem, weights)) % order for elem in group.elements()]
    )
    r = np.where(2 * r >= order, r - order, r)
    return 2.0 * math.pi * r / order


def g_circulant_equilibria(
    group: GroupSpec,
    coeffs: Mapping[Any, float],
    epsilon: float = 1.0,
) -> list[EquilibriumCertificate]:
    """One certificate per character of ``group``.

    For the character ``chi`` with exponent tuple ``a`` the phases are
    ``arg chi(sigma)`` (multiples of ``2 pi / |G|``), the eigenvalue is
    ``Y = sum_sigma c_sigma chi(sigma)`` and the lag makes ``Y exp(-i phi)``
    real.  The literal ``arg Y`` is recorded in ``info["arg_Y"]``; it is an
    equally valid lag (it differs from ``phi`` by 0 or pi).  ``Y = 0`` gives
    ``phi = 0`` and ``zero_eigenvalue=True``.
    """
    A = build_g_circulant(group, coeffs)
    a = A.entries
    c = np.array([a[0, k] for k in range(group.order)])  # row of the identity: c_sigma in element order
    tol = equilibrium_tolerance(A, epsilon)
    zero_tol = 1e-12 * max(1.0, float(np.sum(np.abs(c))))
    out = []
    for exps in group.elements():
        theta = _character_phases(group, exps)
        v = np.exp(1j * theta)
        Y = complex(np.sum(c * v))
        zero = abs(Y) <= zero_tol
        if zero:
            phi, alt, arg_y = 0.0, math.pi, 0.0
        else:
            phi, alt = phase_lag_for_eigenvalue(Y)
            arg_y = math.atan2(Y.imag, Y.real)
        cert = verify_equilibrium(A, theta, epsilon, phi, tol=tol, source="character")
        if not cert.accepted:
            raise ArithmeticError(f"character {exps} failed certification: residual {cert.residual:.3e}")
        cert.lam = Y
        cert.phi_alternate = alt
        cert.zero_eigenvalue = zero
        cert.info.update(
            {
                "character": list(exps),
                "arg_Y": arg_y,
                "eigen_residual": float(np.linalg.norm(a @ v - Y * v)),
            }
        )
        out.append(cert)
    return out


def multilayer_equilibrium(k: int, j: int, phi_offset: float = 0.0) -> np.ndarray:
    """Twisted state on each of two ``k``-node layers, the second rotated by ``phi_offset``."""
    if k < 2:
        raise ValueError(f"layer size k must be >= 2, got {k}")
    if not 1 <= j <= k - 1:
        raise ValueError(f"j must satisfy 1 <= j <= {k - 1} so the cross-layer sums vanish, got {j}")
    if not 0.0 <= phi_offset < 2.0 * math.pi:
        raise ValueError(f"phi_offset must lie in [0, 2 pi), got {phi_offset}")
    base = twisted_state(k, j)
    return np.concatenate([base, wrap_phases(base + phi_offset)])


def multilayer_certificate(
    C: AdjacencyMatrix,
    join: AdjacencyMatrix,
    j: int,
    phi_offset: float = 0.0,
    epsilon: float = 1.0,
) -> EquilibriumCertificate:
    """Certify the two-layer twisted state on ``join = build_join(C, C, alpha, beta)``."""
    if not (C.flags.circulant and C.flags.symmetric):
        raise ValueError("layers must be a symmetric circulant matrix")
    k = C.n
    if join.n != 2 * k or not np.array_equal(join.entries[:k, :k], C.entries) or not np.array_equal(
        join.entries[k:, k:], C.entries
    ):
        raise ValueError("join does not have C on both diagonal blocks")
    theta = multilayer_equilibrium(k, j, phi_offset)
    cert = verify_equilibrium(join, theta, epsilon, 0.0, source="multilayer")
    cert.lam = complex(circulant_spectrum(C.entries[:, 0])[j].value.real, 0.0)
    cert.info.update({"k": k, "j": j, "phi_offset": phi_offset})
    return cert


@dataclass
class DesignResult:
    matrix: AdjacencyMatrix
    theta0: np.ndarray
    certificate: EquilibriumCertificate
    lam: float
    eigen_residual: float
    replaced: tuple[int, int]
    overlap: dict[str, float]


def _scale_factor(scale_policy) -> float:
    if scale_policy in (None, "keep"):
        return 1.0
    if isinstance(scale_policy, (int, float)):
        return float(scale_policy)
    kind, s = scale_policy
    if kind != "multiply":
        raise ValueError(f"unknown scale policy {scale_policy!r}")
    return float(s)


def design_random_equilibrium(
    A: AdjacencyMatrix,
    j: int = 1,
    scale_policy: Literal["keep"] | tuple[str, float] | float = "keep",
    repair: Literal["polar", "none"] = "polar",
    epsilon: float = 1.0,
    gate: float = 1e-6,
) -> DesignResult:
    """Implant the twisted state ``theta0 = twisted_state(n, j)`` into a symmetric matrix.

    The spectrum of ``A`` is sorted ascending; the second-to-last and
    third-to-last eigenvectors are replaced by ``sin(theta0)`` and
    ``cos(theta0)`` (normalised), both sharing the eigenvalue ``lam``: the
    second-to-last value, multiplied by ``s`` under ``("multiply", s)``.

    The two new columns are not orthogonal to the retained eigenvectors, so
    ``V D V^T`` alone does not have them as eigenvectors.  With
    ``repair="polar"`` the retained columns are projected off the new pair
    and replaced by the nearest orthonormal basis (polar factor), which
    keeps their eigenvalues.  ``repair="none"`` reconstructs from the raw
    columns and normally fails the gate.

    Raises:
        DesignError: the result misses ``||A' x - lam x|| <= gate ||x||`` or
            the sine-sum certificate; the message reports the overlaps.
    """
    if not A.flags.symmetric:
        raise ValueError("design needs a symmetric adjacency matrix")
    n = A.n
    if n < 4:
        raise ValueError(f"design needs n >= 4, got {n}")
    if not 1 <= j <= n - 1 or (2 * j) % n == 0:
        raise ValueError(f"j={j} makes sin(theta0) vanish or duplicates cos(theta0); need 2j != 0 mod n")
    theta0 = twisted_state(n, j)
    w, V = np.linalg.eigh(A.entries)  # ascending, ties in LAPACK order
    lam = float(w[-2]) * _scale_factor(scale_policy)

    c = np.cos(theta0)
    c /= np.linalg.norm(c)
    s = np.sin(theta0)
    s -= np.dot(s, c) * c
    s /= np.linalg.norm(s)
    replaced = (n - 2, n - 3)
    keep = np.r_[0 : n - 3, n - 1]
    U, d = V[:, keep], w[keep]
    Q = np.column_stack([c, s])
    overlap = {"max_abs_overlap": float(np.max(np.abs(Q.T @ U)))}

    if repair == "polar":
        PU = U - Q @ (Q.T @ U)
        W, sing, Zt = np.linalg.svd(PU, full_matrices=False)
        overlap["min_singular_value"] = float(sing.min())
        if sing.min() < 1e-8:
            raise DesignError(
                f"retained eigenvectors nearly inside span(cos, sin): min singular value {sing.min():.3e}, "
                f"max overlap {overlap['max_abs_overlap']:.3f}"
            )
        U = W @ Zt
        a_new = (U * d) @ U.T + lam * (np.outer(c, c) + np.outer(s, s))
    elif repair == "none":
        Vm = V.copy()
        Vm[:, n - 2] = s
        Vm[:, n - 3] = c
        wm = w.copy()
        wm[n - 2] = wm[n - 3] = lam
        a_new = (Vm * wm) @ Vm.T
    else:
        raise ValueError(f"unknown repair {repair!r}")
    a_new = 0.5 * (a_new + a_new.T)

    x = np.exp(1j * theta0)
    eig_res = float(np.linalg.norm(a_new @ x - lam * x) / np.linalg.norm(x))
    if eig_res > gate:
        raise DesignError(
            f"designed matrix misses the eigenvector gate: ||A'x - lam x|| / ||x|| = {eig_res:.3e} > {gate:g}; "
            f"max overlap of cos/sin with retained eigenvectors {overlap['max_abs_overlap']:.3f}"
        )
    flags = GraphFlags(symmetric=True, circulant=False, zero_diagonal=False)
    params = {
        "j": j,
        "lambda": lam,
        "scale": _scale_factor(scale_policy),
        "repair": repair,
        "replaced_indices": list(replaced),
        "base": {"generator": A.generator, "params": dict(A.params), "seed": A.seed},
    }
    designed = AdjacencyMatrix(a_new, flags=flags, generator="designed", params=params, seed=A.seed)
    cert = verify_equilibrium(designed, theta0, epsilon, 0.0, source="designed")
    if not cert.accepted:
        raise DesignError(f"designed state fails the sine-sum check: residual {cert.residual:.3e} > {cert.tolerance:.3e}")
    cert.lam = complex(lam)
    cert.info.update({"eigen_residual": eig_res, "replaced_indices": list(replaced), **overlap})
    return DesignResult(designed, theta0, cert, lam, eig_res, replaced, overlap)
