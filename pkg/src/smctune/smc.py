"""Sliding-mode controller synthesis for the 4-state building + damper plant.

The design places three of the four closed-loop poles through the sliding
vector eta and the fourth through the full-state gain, both obtained from the
last row of the inverse controllability matrix. On the plane sigma = eta.z = 0
the plant collapses to a third-order system (A1, B1) driven by the ground
acceleration.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericalError
from .structure import PlantStateSpace, controllability_matrix

__all__ = [
    "PoleSpec",
    "ReducedDynamics",
    "SlidingDesign",
    "ackermann_gain",
    "sliding_vector",
    "reduced_dynamics",
    "switching_gain",
    "control_force",
    "design_sliding_controller",
]

#: imaginary residue (relative) above which a "real" gain vector is rejected
IMAG_TOL = 1e-9
#: relative tolerance for verifying achieved pole locations
POLE_PLACEMENT_TOL = 1e-6


@dataclass(frozen=True)
class PoleSpec:
    """Closed-loop pole layout: a dominant conjugate pair plus two real poles.

    lambda1/lambda2 = -zeta*omega_n -/+ j*omega_d form the dominant pair.
    lambda3 defaults to -3*zeta*omega_n, far enough left to barely affect the
    dominant transient. lambda4 only shapes the reaching phase (the sliding
    dynamics are independent of it); the default keeps it well separated.
    """

    zeta: float
    omega_n: float          # rad/s
    lambda3: float = None   # filled from zeta/omega_n when omitted
    lambda4: float = None

    def __post_init__(self):
        if not 0.0 < self.zeta < 1.0:
            raise ConfigError(f"zeta must lie in (0, 1), got {self.zeta}")
        if self.omega_n <= 0.0:
            raise ConfigError(f"omega_n must be positive, got {self.omega_n}")
        if self.lambda3 is None:
            object.__setattr__(self, "lambda3", -3.0 * self.zeta * self.omega_n)
        if self.lambda4 is None:
            object.__setattr__(self, "lambda4", -10.0 * self.zeta * self.omega_n)
        if self.lambda3 >= 0.0 or self.lambda4 >= 0.0:
            raise ConfigError("lambda3 and lambda4 must be real and negative")

    @property
    def omega_d(self) -> float:
        return self.omega_n * np.sqrt(1.0 - self.zeta ** 2)

    @property
    def lambda1(self) -> complex:
        return complex(-self.zeta * self.omega_n, -self.omega_d)

    @property
    def lambda2(self) -> complex:
        return complex(-self.zeta * self.omega_n, +self.omega_d)

    def sliding_poles(self) -> tuple[complex, complex, float]:
        return (self.lambda1, self.lambda2, self.lambda3)

    def all_poles(self) -> tuple[complex, complex, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.lambda4)


@dataclass(frozen=True)
class ReducedDynamics:
    """Third-order sliding dynamics and the control-reconstruction vector."""

    A1: np.ndarray      # 3x3, eigenvalues lambda1..lambda3
    B1: np.ndarray      # 3-vector excitation gain
    T: np.ndarray       # 4x4 state transformation [z*; sigma] = T z
    alpha1: float       # excitation feedthrough onto sigma-dot
    alpha2: float       # excitation gain of the reduced third state
    nu1: np.ndarray     # 3-vector reconstructing u from z* in the sliding mode


@dataclass(frozen=True)
class SlidingDesign:
    """Everything the controller needs: sliding vector, gain, reduced model."""

    poles: PoleSpec
    eta: np.ndarray
    k_gain: np.ndarray
    alpha1: float
    alpha2: float
    A1: np.ndarray
    B1: np.ndarray
    T: np.ndarray
    nu1: np.ndarray
    epsilon: float = 0.05
    M0: float | None = None

    def sigma(self, z) -> float:
        """Sliding variable eta.z."""
        return float(self.eta @ np.asarray(z, dtype=float))

    def force(self, z) -> float:
        if self.M0 is None:
            raise ConfigError("design has no switching gain yet; set M0 first")
        return control_force(self.sigma(z), self.M0, self.epsilon)

    def with_switching_gain(self, M0: float) -> "SlidingDesign":
        return replace(self, M0=float(M0))

    def to_dict(self) -> dict:
        return {
            "poles": {
                "zeta": self.poles.zeta,
                "omega_n": self.poles.omega_n,
                "lambda3": self.poles.lambda3,
                "lambda4": self.poles.lambda4,
            },
            "eta": [float(x) for x in self.eta],
            "k_gain": [float(x) for x in self.k_gain],
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "M0": self.M0,
            "epsilon": self.epsilon,
        }


def _inverse_ctrb_row(plant: PlantStateSpace) -> np.ndarray:
    """Last row of the inverse controllability matrix."""
    Co = controllability_matrix(plant.A, plant.B)
    unit_last = np.zeros(len(plant.B))
    unit_last[-1] = 1.0
    try:
        return np.linalg.solve(Co.T, unit_last)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("controllability matrix is singular") from exc


def _poly_of_matrix(A: np.ndarray, roots) -> np.ndarray:
    """Evaluate prod_i (A - root_i I) keeping all arithmetic real.

    Complex roots must come in conjugate pairs; each pair is folded into the
    real quadratic A^2 - 2 Re(r) A + |r|^2 I.
    """
    A = np.asarray(A, dtype=float)
    eye = np.eye(A.shape[0])
    remaining = [complex(r) for r in roots]
    out = eye.copy()
    while remaining:
        r = remaining.pop(0)
        if abs(r.imag) <= IMAG_TOL * max(1.0, abs(r)):
            out = out @ (A - r.real * eye)
            continue
        conj = r.conjugate()
        for i, other in enumerate(remaining):
            if abs(other - conj) <= 1e-9 * max(1.0, abs(conj)):
                remaining.pop(i)
                break
        else:
            raise ConfigError(f"complex pole {r} has no conjugate partner; "
                              "pole set must be closed under conjugation")
        out = out @ (A @ A - 2.0 * r.real * A + (abs(r) ** 2) * eye)
    return out


def _check_pole_placement(A_closed: np.ndarray, poles) -> None:
    achieved = np.sort_complex(np.linalg.eigvals(A_closed))
    wanted = np.sort_complex(np.asarray([complex(p) for p in poles]))
    err = np.linalg.norm(achieved - wanted) / max(1.0, np.linalg.norm(wanted))
    if err > POLE_PLACEMENT_TOL:
        raise NumericalError(
            f"pole placement failed: requested {wanted}, achieved {achieved} "
            f"(relative error {err:.3e})")


def ackermann_gain(plant: PlantStateSpace, poles) -> np.ndarray:
    """Full-state feedback gain placing all four closed-loop poles.

    k = e.P(A) where e is the last row of the inverse controllability matrix
    and P the desired characteristic polynomial. The achieved spectrum is
    verified against the request before returning.
    """
    poles = list(poles)
    if len(poles) != len(plant.B):
        raise ConfigError(f"need {len(plant.B)} poles, got {len(poles)}")
    e_row = _inverse_ctrb_row(plant)
    k = e_row @ _poly_of_matrix(plant.A, poles)
    _check_pole_placement(plant.A - np.outer(plant.B, k), poles)
    return k


def sliding_vector(plant: PlantStateSpace, lambda1, lambda2, lambda3) -> np.ndarray:
    """Sliding vector eta = e.P1(A) for the three sliding-mode poles.

    By construction eta.B = 1; this identity is verified to 1e-9.
    """
    e_row = _inverse_ctrb_row(plant)
    eta = e_row @ _poly_of_matrix(plant.A, [lambda1, lambda2, lambda3])
    gain = float(eta @ plant.B)
    if abs(gain - 1.0) > 1e-9:
        raise NumericalError(f"eta.B = {gain!r} deviates from 1 beyond tolerance")
    return eta


def _transformation(eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """T = [[I3, 0], [eta]] and its closed-form inverse; det(T) = eta[3]."""
    if abs(eta[3]) <= 1e-12 * max(1.0, np.linalg.norm(eta)):
        raise NumericalError("transformation T is singular: last sliding weight is zero")
    T = np.eye(4)
    T[3, :] = eta
    Tinv = np.eye(4)
    Tinv[3, :3] = -eta[:3] / eta[3]
    Tinv[3, 3] = 1.0 / eta[3]
    return T, Tinv


def reduced_dynamics(plant: PlantStateSpace, eta: np.ndarray, k_gain: np.ndarray,
                     lambda4: float) -> ReducedDynamics:
    """Sliding-mode dynamics obtained by the transformation w = T z.

    In the transformed coordinates the closed loop is block triangular with
    the sliding poles in the upper-left block A1 and lambda4 alone in the
    bottom-right corner. alpha1 = -eta.D is the excitation feedthrough;
    B1 collects the excitation path of the reduced states (for this plant
    structure B1 = [0, 0, alpha2]). nu1 reconstructs the equivalent control
    from z* and is independent of lambda4.
    """
    eta = np.asarray(eta, dtype=float)
    T, Tinv = _transformation(eta)
    closed = plant.A - np.outer(plant.B, np.asarray(k_gain, dtype=float))
    W = T @ closed @ Tinv

    scale = max(1.0, np.abs(W).max())
    if np.abs(W[3, :3]).max() > 1e-6 * scale or abs(W[3, 3] - lambda4) > 1e-6 * scale:
        raise NumericalError("eta, k_gain, and lambda4 are mutually inconsistent; "
                             "transformed dynamics are not block triangular")

    A1 = W[:3, :3].copy()
    alpha1 = float(-(eta @ plant.D))
    B1 = plant.D[:3] + alpha1 * plant.B[:3]
    alpha2 = float(B1[2])
    nu = -(eta @ plant.A) @ Tinv
    nu1 = nu[:3].copy()
    return ReducedDynamics(A1=A1, B1=B1, T=T, alpha1=alpha1, alpha2=alpha2, nu1=nu1)


def switching_gain(chi: float, varpi: float, varsigma: float = 0.5) -> float:
    """Relay amplitude M0 = varpi + chi + varsigma.

    chi bounds the equivalent control over the excitation band, varpi the
    friction, and varsigma > 0 provides the strict margin that guarantees
    finite-time reaching.
    """
    if chi < 0 or varpi < 0:
        raise ConfigError("chi and varpi must be non-negative")
    if varsigma <= 0:
        raise ConfigError("varsigma must be positive")
    return varpi + chi + varsigma


def control_force(sigma: float, M0: float, epsilon: float = 0.05) -> float:
    """Saturated relay: -M0 sign(sigma) with a linear ramp of slope -M0/epsilon
    inside the boundary layer |sigma| <= epsilon."""
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    if sigma > epsilon:
        return -M0
    if sigma < -epsilon:
        return M0
    return -M0 * sigma / epsilon


def design_sliding_controller(plant: PlantStateSpace, poles: PoleSpec,
                              epsilon: float = 0.05) -> SlidingDesign:
    """Synthesize the complete sliding design for one pole layout.

    The switching gain is left unset; it depends on the excitation band
    analysis (see freqresp.band_peak and switching_gain).
    """
    eta = sliding_vector(plant, *poles.sliding_poles())
    k = ackermann_gain(plant, poles.all_poles())
    red = reduced_dynamics(plant, eta, k, poles.lambda4)
    return SlidingDesign(
        poles=poles,
        eta=eta,
        k_gain=k,
        alpha1=red.alpha1,
        alpha2=red.alpha2,
        A1=red.A1,
        B1=red.B1,
        T=red.T,
        nu1=red.nu1,
        epsilon=epsilon,
    )
