"""Infinite-horizon LQR baseline with inverse-square (Bryson) weights.

Serves as the comparison controller: weights follow from the maximum
acceptable magnitude of each state and of the control force, and the gain
comes from the stabilizing solution of the continuous algebraic Riccati
equation, polished by Newton-Kleinman iterations until the residual is at
solver noise level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, NumericalError
from .structure import PlantStateSpace

__all__ = [
    "MaxValues",
    "LqrSpec",
    "LqrResult",
    "bryson_weights",
    "solve_riccati",
    "solve_lqr",
    "lqr_equivalent_polespec",
]

RESIDUAL_MAX = 1e-8


@dataclass(frozen=True)
class MaxValues:
    """Largest acceptable magnitudes: states in m and m/s, force in N."""

    z1: float
    z2: float
    z3: float
    z4: float
    u: float

    def __post_init__(self):
        for name in ("z1", "z2", "z3", "z4", "u"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"maximum for {name} must be positive")


@dataclass(frozen=True)
class LqrSpec:
    """Quadratic cost weights: diagonal Q and scalar control weight r."""

    max_values: MaxValues
    Q: np.ndarray
    r: float


@dataclass(frozen=True)
class LqrResult:
    P: np.ndarray                  # stabilizing Riccati solution
    k_gain: np.ndarray             # u = -k_gain . z
    closed_loop_eigs: np.ndarray
    residual: float                # max-abs Riccati residual


def bryson_weights(max_values: MaxValues) -> LqrSpec:
    """Q[i,i] = 1/max_i^2 and r = 1/u_max^2."""
    q = np.array([1.0 / max_values.z1 ** 2, 1.0 / max_values.z2 ** 2,
                  1.0 / max_values.z3 ** 2, 1.0 / max_values.z4 ** 2])
    return LqrSpec(max_values=max_values, Q=np.diag(q), r=1.0 / max_values.u ** 2)


def _riccati_residual(A, B, Q, r, P) -> float:
    res = A.T @ P + P @ A - np.outer(P @ B, B @ P) / r + Q
    return float(np.abs(res).max())


def solve_riccati(A, B, Q, r, max_iter: int = 30):
    """Stabilizing CARE solution for a single-input pair.

    scipy's direct solver provides the starting point; Newton-Kleinman
    iterations (one Lyapunov solve each) then drive the residual to rounding
    level. Returns (P, k_gain, closed_loop_eigs, residual).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(B, dtype=float).reshape(-1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    r = float(r)
    if r <= 0:
        raise ConfigError(f"control weight r must be positive, got {r}")

    try:
        P = scipy.linalg.solve_continuous_are(A, b.reshape(-1, 1), Q, np.array([[r]]))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Riccati solve failed: {exc}") from exc

    best_P = P
    best_res = _riccati_residual(A, b, Q, r, P)
    for _ in range(max_iter):
        k = (b @ P) / r
        A_cl = A - np.outer(b, k)
        if np.max(np.linalg.eigvals(A_cl).real) >= 0:
            break
        try:
            P = scipy.linalg.solve_continuous_lyapunov(A_cl.T, -(Q + r * np.outer(k, k)))
        except (np.linalg.LinAlgError, ValueError):
            break
        P = 0.5 * (P + P.T)
        res = _riccati_residual(A, b, Q, r, P)
        if res < best_res:
            best_P, best_res = P, res
        if res < 1e-13 * max(1.0, float(np.abs(Q).max())):
            break

    P = 0.5 * (best_P + best_P.T)
    k = (b @ P) / r
    eigs = np.linalg.eigvals(A - np.outer(b, k))
    residual = _riccati_residual(A, b, Q, r, P)
    if np.max(eigs.real) >= 0:
        raise NumericalError("Riccati iteration did not produce a stabilizing gain")
    try:
        np.linalg.cholesky(P + 1e-14 * np.eye(len(P)))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Riccati solution is not positive definite") from exc
    return P, k, np.sort_complex(eigs), residual


def solve_lqr(plant: PlantStateSpace, spec: LqrSpec) -> LqrResult:
    """LQR gain for the 4-state plant under the given weights."""
    P, k, eigs, residual = solve_riccati(plant.A, plant.B, spec.Q, spec.r)
    if residual > RESIDUAL_MAX:
        raise NumericalError(f"Riccati residual {residual:.3e} exceeds {RESIDUAL_MAX:.0e}")
    return LqrResult(P=P, k_gain=k, closed_loop_eigs=eigs, residual=residual)


def lqr_equivalent_polespec(result: LqrResult, omega0: float) -> dict[str, float]:
    """Damping ratio and natural frequency of the dominant complex pair.

    Dominance means the smallest |Re(lambda)| / |lambda| among complex pairs,
    i.e. the least-damped oscillatory mode. The frequency is reported both in
    rad/s and normalized by omega0.
    """
    eigs = result.closed_loop_eigs
    complex_eigs = eigs[np.abs(eigs.imag) > 1e-9 * np.abs(eigs)]
    if len(complex_eigs) == 0:
        raise ValueError("closed-loop spectrum has no complex pair")
    lam = min(complex_eigs, key=lambda v: abs(v.real) / abs(v))
    omega_n = abs(lam)
    return {
        "zeta": float(-lam.real / omega_n),
        "omega_n": float(omega_n),
        "omega_ratio": float(omega_n / omega0),
    }
