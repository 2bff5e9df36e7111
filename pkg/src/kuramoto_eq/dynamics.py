"""Time evolution of the nonlinear and the complex-valued Kuramoto models.

Everything runs in the co-rotating frame (common natural frequency 0).
The nonlinear model integrates

    d theta_i / dt = eps * sum_j a_ij sin(theta_j - theta_i - phi_i)

with fixed-step Euler or RK4.  The complex model is linear,
``dx/dt = eps * exp(-i phi) * A x``, and is propagated exactly with the
matrix exponential, one window at a time.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

from .graphs import AdjacencyMatrix
from .spectral import Propagator

__all__ = [
    "AmplitudeError",
    "IntegrationError",
    "Trajectory",
    "circular_distance",
    "integrate_km",
    "kuramoto_rhs",
    "order_parameter",
    "propagate_analytical",
    "wrap_phases",
]

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
AMPLITUDE_BOUNDS = (1e-12, 1e12)


class IntegrationError(RuntimeError):
    """The nonlinear integration produced a non-finite state."""


class AmplitudeError(ArithmeticError):
    """Complex amplitudes left the representable band during propagation."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


def wrap_phases(theta) -> np.ndarray:
    """Map phases into ``[-pi, pi)``.

    Float remainder is exact, so the only error is the rounding already
    present in ``theta``; at ``|theta| ~ 1e7`` that is about ``1e-9``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    w = np.mod(theta + math.pi, TWO_PI) - math.pi
    # mod can round up to exactly 2 pi for tiny negative inputs
    return np.where(w >= math.pi, w - TWO_PI, w)


def circular_distance(a, b) -> np.ndarray:
    """Elementwise ``|a - b|`` on the circle, in ``[0, pi]``."""
    return np.abs(wrap_phases(np.asarray(a) - np.asarray(b)))


def order_parameter(theta) -> float | np.ndarray:
    """Kuramoto order parameter ``R = |mean_j exp(i theta_j)|``.

    A 2-D input is treated as one phase vector per row.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[-1] < 1:
        raise ValueError("order parameter needs at least one phase")
    r = np.abs(np.mean(np.exp(1j * theta), axis=-1))
    return float(r) if r.ndim == 0 else r


def _as_matrix(A) -> np.ndarray:
    return A.entries if isinstance(A, AdjacencyMatrix) else np.asarray(A, dtype=np.float64)


def _lag_vector(phi, n: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim == 0:
        return np.full(n, float(phi))
    if phi.shape != (n,):
        raise ValueError(f"per-node phase lag must have length {n}, got shape {phi.shape}")
    return phi


def kuramoto_rhs(a: np.ndarray, theta: np.ndarray, epsilon: float, phi) -> np.ndarray:
    """Vector field of the (phase-lag) Kuramoto model.

    Uses ``sin(b - c) = sin b cos c - cos b sin c`` so each call costs two
    matrix-vector products instead of an ``n x n`` sine table.
    """
    shifted = theta + phi
    return epsilon * (np.cos(shifted) * (a @ np.sin(theta)) - np.sin(shifted) * (a @ np.cos(theta)))


@dataclass
class Trajectory:
    """Sampled solution of one model.

    ``phases`` has one row per sample, wrapped to ``[-pi, pi)``.  For the
    complex model ``amplitudes`` holds the raw states ``x(t)``; the phase is
    ``arg x`` and ``|x| = exp(-theta_im)``.
    """

    times: np.ndarray
    phases: np.ndarray
    model: Literal["original", "analytical"]
    params: dict[str, Any] = field(default_factory=dict)
    amplitudes: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.phases.shape[0] != self.times.shape[0]:
            raise ValueError("one state per sample time required")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.phases.shape[1]

    def drift(self) -> float:
        """Largest circular phase excursion from the initial state."""
        return float(np.max(circular_distance(self.phases, self.phases[0]))) if len(self.times) else 0.0

    def order_parameter(self) -> np.ndarray:
        return np.atleast_1d(order_parameter(self.phases))

    def displayed(self, omega: float) -> np.ndarray:
        """Phases in the lab frame, ``wrap(theta + omega t)``."""
        return wrap_phases(self.phases + omega * self.times[:, None])


def integrate_km(
    A: AdjacencyMatrix | np.ndarray,
    theta0: Sequence[float],
    epsilon: float = 1.0,
    phi: float | Sequence[float] = 0.0,
    dt: float = 1e-4,
    T: float = 1.0,
    method: Literal["euler", "rk4"] = "euler",
    stride: float = 1e-2,
) -> Trajectory:
    """Integrate the nonlinear Kuramoto model with a fixed step.

    Args:
        A: Coupling matrix.
        theta0: Initial phases.
        epsilon: Coupling strength.
        phi: Phase lag, a scalar for every coupling or one value per node
            (applied row-wise).
        dt: Step size.
        T: Final time; ``round(T / dt)`` steps are taken.
        method: ``"euler"`` or ``"rk4"``.
        stride: Sampling interval, rounded to a whole number of steps
            (at least one).  The final state is always sampled.

    Raises:
        IntegrationError: the state became non-finite.
    """
    a = _as_matrix(A)
    theta = np.array(theta0, dtype=np.float64)
    n = a.shape[0]
    if theta.shape != (n,):
        raise ValueError(f"theta0 must have length {n}, got shape {theta.shape}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not T >= 0:
        raise ValueError(f"T must be non-negative, got {T}")
    if method not in ("euler", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    lag = _lag_vector(phi, n)
    nsteps = int(round(T / dt))
    every = max(1, int(round(stride / dt)))
    sample_steps = list(range(0, nsteps + 1, every))
    if sample_steps[-1] != nsteps:
        sample_steps.append(nsteps)

    def f(th):
        return kuramoto_rhs(a, th, epsilon, lag)

    out = np.empty((len(sample_steps), n))
    out[0] = theta
    k = 1
    for step in range(1, nsteps + 1):
        if method == "euler":
            theta = theta + dt * f(theta)
        else:
            k1 = f(theta)
            k2 = f(theta + 0.5 * dt * k1)
            k3 = f(theta + 0.5 * dt * k2)
            k4 = f(theta + dt * k3)
            theta = theta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k < len(sample_steps) and step == sample_steps[k]:
            if not np.all(np.isfinite(theta)):
                raise IntegrationError(f"non-finite phases at t={step * dt:.6g}")
            out[k] = theta
            k += 1
    times = np.asarray(sample_steps, dtype=np.float64) * dt
    params = {"epsilon": epsilon, "phi": lag.tolist() if np.ndim(phi) else float(phi), "dt": dt, "T": T, "method": method}
    return Trajectory(times, wrap_phases(out), "original", params)


def propagate_analytical(
    A: AdjacencyMatrix | np.ndarray,
    theta0: Sequence[float],
    epsilon: float = 1.0,
    phi: float = 0.0,
    times: Sequence[float] | None = None,
    window: float = 0.1,
) -> Trajectory:
    """Exact solution ``x(t) = exp(t K) x0`` of the complex-valued model.

    ``K = epsilon * exp(-i phi) * A`` and ``x0 = exp(i theta0)``.  The
    solution is advanced window by window: the state at the end of one
    window seeds the next, and sample times split windows where needed.

    Args:
        times: Increasing sample times starting at 0 (default: 0..1 in
            steps of 0.01).
        window: Longest single exponential step.

    Raises:
        AmplitudeError: some ``|x_i|`` left ``[1e-12, 1e12]``; carries the
            time of failure.
    """
    a = _as_matrix(A)
    n = a.shape[0]
    theta0 = np.asarray(theta0, dtype=np.float64)
    if theta0.shape != (n,):
        raise ValueError(f"theta0 must have length {n}, got shape {theta0.shape}")
    if np.ndim(phi) != 0:
        raise ValueError("the complex model takes a scalar phase lag")
    if times is None:
        times = np.linspace(0.0, 1.0, 101)
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0 or times[0] != 0.0:
        raise ValueError("times must start at 0")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")
    if not window > 0:
        raise ValueError(f"window must be positive, got {window}")

    K = epsilon * np.exp(-1j * phi) * a
    prop = Propagator(K)
    lo, hi = AMPLITUDE_BOUNDS
    x = np.exp(1j * theta0)
    states = np.empty((times.size, n), dtype=np.complex128)
    states[0] = x
    t_cur = 0.0
    for idx in range(1, times.size):
        target = times[idx]
        while t_cur < target:
            h = min(window, target - t_cur)
            x = prop.apply(x, h)
            # land exactly on the sample time to avoid accumulating drift in t
            t_cur = target if target - t_cur <= window else t_cur + h
            mag = np.abs(x)
            if not (np.all(np.isfinite(x)) and mag.min() >= lo and mag.max() <= hi):
                raise AmplitudeError(
                    f"amplitude range [{mag.min():.3e}, {mag.max():.3e}] outside [{lo:g}, {hi:g}] at t={t_cur:.6g}",
                    t_cur,
                )
        states[idx] = x
    params = {"epsilon": epsilon, "phi": float(phi), "window": window}
    return Trajectory(times, wrap_phases(np.angle(states)), "analytical", params, amplitudes=states)
