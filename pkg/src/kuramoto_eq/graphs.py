"""Network topologies for Kuramoto equilibrium studies.

All builders return an immutable :class:`AdjacencyMatrix`: a dense real
``n x n`` coupling matrix plus structural flags (symmetric, circulant,
zero diagonal) that the constructors guarantee exactly, not up to
floating-point accident.

Circulant convention: entry ``(i, j)`` equals ``first_row[(j - i) mod n]``,
so row ``i`` is the first row cyclically shifted right by ``i``.  The
G-circulant builder uses the same convention with group subtraction,
``entry(tau, sigma) = coeffs[sigma - tau]``, so over ``Z/n`` the coefficient
map *is* the first row.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "AdjacencyMatrix",
    "GraphFlags",
    "GroupSpec",
    "build_circulant",
    "build_complete",
    "build_erdos_renyi",
    "build_g_circulant",
    "build_join",
    "build_ring",
    "is_circulant",
]


@dataclass(frozen=True)
class GraphFlags:
    symmetric: bool = False
    circulant: bool = False
    zero_diagonal: bool = True


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Dense weighted coupling matrix with verified structural flags.

    ``entries`` is stored as a read-only float64 array.  ``generator`` and
    ``params`` record how the matrix was produced; they end up in the JSON
    sidecar written next to the CSV.
    """

    entries: np.ndarray
    flags: GraphFlags = field(default_factory=GraphFlags)
    generator: str = "user"
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("adjacency entries must be finite")
        f = self.flags
        if f.zero_diagonal and np.any(np.diag(a) != 0.0):
            raise ValueError("zero_diagonal flag set but diagonal has nonzero entries")
        if f.symmetric and not np.array_equal(a, a.T):
            raise ValueError("symmetric flag set but matrix is not exactly symmetric")
        if f.circulant and not is_circulant(a):
            raise ValueError("circulant flag set but matrix is not circulant")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def max_row_sum(self) -> float:
        """Largest absolute row sum (the infinity norm)."""
        return float(np.max(np.sum(np.abs(self.entries), axis=1)))

    def scaled(self, s: float) -> "AdjacencyMatrix":
        return AdjacencyMatrix(
            s * self.entries,
            flags=self.flags,
            generator=self.generator,
            params={**self.params, "scale": s},
            seed=self.seed,
        )

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self.flags == other.flags and np.array_equal(self.entries, other.entries)

    __hash__ = None  # type: ignore[assignment]


def is_circulant(a: np.ndarray) -> bool:
    """Exact test that ``a[i, j]`` depends only on ``(j - i) mod n``."""
    a = np.asarray(a)
    n = a.shape[0]
    first = a[0]
    return all(np.array_equal(a[i], np.roll(first, i)) for i in range(1, n))


def _circulant_from_row(row: np.ndarray) -> np.ndarray:
    n = row.shape[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def _is_palindromic(row: np.ndarray) -> bool:
    # symmetric circulant <=> row[k] == row[n - k] for k = 1..n-1
    return bool(np.array_equal(row[1:], row[1:][::-1]))


def build_circulant(n: int, first_row: Sequence[float], allow_self_loops: bool = False) -> AdjacencyMatrix:
    """Circulant matrix whose row ``i`` is ``first_row`` shifted right by ``i``.

    Args:
        n: Number of nodes.
        first_row: Length-``n`` coupling row; ``first_row[k]`` couples node
            ``i`` to node ``i + k``.
        allow_self_loops: Permit a nonzero ``first_row[0]``.

    The symmetric flag is set only when the row is palindromic on indices
    ``1..n-1``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    row = np.asarray(first_row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != n:
        raise ValueError(f"first_row must have length {n}, got shape {row.shape}")
    if not np.all(np.isfinite(row)):
        raise ValueError("first_row entries must be finite")
    if row[0] != 0.0 and not allow_self_loops:
        raise ValueError("first_row[0] is a self-loop weight; pass allow_self_loops=True to permit it")
    flags = GraphFlags(symmetric=_is_palindromic(row), circulant=True, zero_diagonal=row[0] == 0.0)
    return AdjacencyMatrix(
        _circulant_from_row(row), flags=flags, generator="circulant", params={"first_row": row.tolist()}
    )


def build_ring(n: int, k: int) -> AdjacencyMatrix:
    """Symmetric ring lattice: each node coupled to its ``k`` nearest neighbours on each side."""
    if not 1 <= k <= (n - 1) // 2:
        raise ValueError(f"k must satisfy 1 <= k <= floor((n-1)/2) = {(n - 1) // 2}, got k={k}")
    row = np.zeros(n)
    offsets = np.arange(1, k + 1)
    row[offsets] = 1.0
    row[(-offsets) % n] = 1.0
    m = build_circulant(n, row)
    return AdjacencyMatrix(m.entries, flags=m.flags, generator="ring", params={"n": n, "k": k})


def build_complete(n: int) -> AdjacencyMatrix:
    """Adjacency of the complete graph K_n."""
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    row = np.ones(n)
    row[0] = 0.0
    m = build_circulant(n, row)
    return AdjacencyMatrix(m.entries, flags=m.flags, generator="complete", params={"n": n})


def build_join(C: AdjacencyMatrix, D: AdjacencyMatrix, alpha: float, beta: float) -> AdjacencyMatrix:
    """Two circulant layers joined by constant blocks.

    Returns ``[[C, alpha * ones(k1, k2)], [beta * ones(k2, k1), D]]``.
    """
    if not (C.flags.circulant and D.flags.circulant):
        raise ValueError("both diagonal blocks of a join must be circulant")
    alpha, beta = float(alpha), float(beta)
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("alpha and beta must be finite")
    k1, k2 = C.n, D.n
    a = np.block([[C.entries, np.full((k1, k2), alpha)], [np.full((k2, k1), beta), D.entries]])
    flags = GraphFlags(
        symmetric=alpha == beta and C.flags.symmetric and D.flags.symmetric,
        circulant=False,
        zero_diagonal=C.flags.zero_diagonal and D.flags.zero_diagonal,
    )
    # a join can happen to be circulant (e.g. K_2 from two single nodes); the flag stays conservative
    return AdjacencyMatrix(
        a,
        flags=flags,
        generator="join",
        params={"alpha": alpha, "beta": beta, "k1": k1, "k2": k2, "C": C.params, "D": D.params},
    )


@dataclass(frozen=True)
class GroupSpec:
    """Finite abelian group ``Z/n_1 x ... x Z/n_k``.

    Elements are tuples of residues, enumerated in lexicographic order
    (last factor varies fastest).
    """

    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(f) for f in self.factors)
        if not factors or any(f < 1 for f in factors):
            raise ValueError(f"group factors must be positive integers, got {self.factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    def elements(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(f) for f in self.factors)))

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.elements())

    def index(self, g: Sequence[int]) -> int:
        idx = 0
        for r, f in zip(g, self.factors):
            idx = idx * f + (r % f)
        return idx

    def identity(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.factors)

    def add(self, g: Sequence[int], h: Sequence[int]) -> tuple[int, ...]:
        return tuple((a + b) % f for a, b, f in zip(g, h, self.factors))

    def inverse(self, g: Sequence[int]) -> tuple[int, ...]:
        return tuple((-a) % f for a, f in zip(g, self.factors))

    def normalize(self, g: int | Sequence[int]) -> tuple[int, ...]:
        if isinstance(g, (int, np.integer)):
            g = (int(g),)
        g = tuple(int(x) for x in g)
        if len(g) != len(self.factors):
            raise ValueError(f"element {g} does not match group factors {self.factors}")
        return tuple(a % f for a, f in zip(g, self.factors))

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"2x4"`` or ``"2,4"`` into ``Z/2 x Z/4``."""
        parts = [p for p in text.replace("x", ",").replace("X", ",").split(",") if p.strip()]
        return cls(tuple(int(p) for p in parts))


def build_g_circulant(
    group: GroupSpec,
    coeffs: Mapping[Any, float],
    allow_self_loops: bool = False,
) -> AdjacencyMatrix:
    """G-circulant matrix with entry ``(tau, sigma) = coeffs[tau^-1 sigma]``.

    ``coeffs`` maps group elements (tuples of residues, or bare ints for a
    cyclic group) to real weights; every element must be present.
    """
    elems = group.elements()
    table: dict[tuple[int, ...], float] = {}
    for key, val in coeffs.items():
        table[group.normalize(key)] = float(val)
    missing = [g for g in elems if g not in table]
    if missing:
        raise ValueError(f"missing coefficients for group elements {missing[:5]}")
    n = group.order
    a = np.empty((n, n))
    for t_idx, tau in enumerate(elems):
        tau_inv = group.inverse(tau)
        for s_idx, sigma in enumerate(elems):
            a[t_idx, s_idx] = table[group.add(tau_inv, sigma)]
    diag = table[group.identity()]
    if diag != 0.0 and not allow_self_loops:
        raise ValueError("coefficient at the identity is a self-loop weight; pass allow_self_loops=True")
    symmetric = all(table[g] == table[group.inverse(g)] for g in elems)
    circ = len(group.factors) == 1
    flags = GraphFlags(symmetric=symmetric, circulant=circ, zero_diagonal=diag == 0.0)
    params = {
        "factors": list(group.factors),
        "coeffs": [[list(g), table[g]] for g in elems],
    }
    return AdjacencyMatrix(a, flags=flags, generator="gcirc", params=params)


def build_erdos_renyi(n: int, p: float, seed: int) -> AdjacencyMatrix:
    """Seeded G(n, p) random graph.

    Stream order: one ``numpy`` PCG64 generator seeded with ``seed`` draws
    ``n*(n-1)/2`` uniforms in ``[0, 1)``, consumed by the upper-triangle pairs
    ``(i, j), i < j`` in row-major order; pair included iff its uniform is
    ``< p``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu = np.triu_indices(n, k=1)
    u = rng.random(iu[0].shape[0])
    a = np.zeros((n, n))
    a[iu] = (u < p).astype(np.float64)
    a = a + a.T
    flags = GraphFlags(symmetric=True, circulant=False, zero_diagonal=True)
    return AdjacencyMatrix(a, flags=flags, generator="er", params={"n": n, "p": p}, seed=seed)
