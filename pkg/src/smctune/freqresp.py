"""Frequency-domain view of the sliding-mode closed loop.

Four transfer functions map the ground acceleration to the damper stroke
(G1), top-floor displacement (G2), damper velocity (G3), and control force
(Gu). Scaling each by the acceleration bound delta gives the worst-case
sinusoidal response H_i; band-limited RMS values kappa_i and the peak chi of
|H_u| feed the tuning constraints and the switching gain.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InfeasibleDesignError
from .smc import SlidingDesign

__all__ = [
    "DEFAULT_BAND",
    "DEFAULT_SAMPLES",
    "RationalTf",
    "TransferFunctions",
    "BandMetrics",
    "transfer_zeros",
    "build_transfer_functions",
    "frequency_grid",
    "band_rms",
    "band_peak",
    "band_metrics",
    "dump_frequency_response",
]

#: earthquake excitation band, rad/s (1 to 20 Hz)
DEFAULT_BAND = (2.0 * np.pi, 40.0 * np.pi)
#: frequency samples used for band metrics
DEFAULT_SAMPLES = 2000


@dataclass(frozen=True)
class RationalTf:
    """gain * num(s) / den(s) with coefficients in descending powers of s."""

    num: np.ndarray
    den: np.ndarray
    gain: float = 1.0

    def __call__(self, s):
        return self.gain * np.polyval(self.num, s) / np.polyval(self.den, s)

    def magnitude(self, omega):
        return np.abs(self(1j * np.asarray(omega)))

    def zeros(self) -> np.ndarray:
        return np.roots(self.num)

    def poles(self) -> np.ndarray:
        return np.roots(self.den)


@dataclass(frozen=True)
class TransferFunctions:
    """Closed-loop responses to the ground acceleration in the sliding mode."""

    g1: RationalTf   # damper stroke, m per m/s^2
    g2: RationalTf   # top-floor displacement
    g3: RationalTf   # damper velocity
    gu: RationalTf   # control force, N per m/s^2
    psi1: float      # zero of g1 and g3
    psi2: float      # zero of g2

    def as_dict(self) -> dict[str, RationalTf]:
        return {"1": self.g1, "2": self.g2, "3": self.g3, "u": self.gu}


@dataclass(frozen=True)
class BandMetrics:
    """Band-limited RMS magnitudes and the control-force peak."""

    kappa1: float    # m
    kappa2: float    # m
    kappa3: float    # m/s
    kappa_u: float   # N
    chi: float       # N
    band: tuple[float, float]
    n_samples: int


def transfer_zeros(eta) -> tuple[float, float]:
    """Zeros psi1 = -eta2/eta4 and psi2 = -eta1/eta3 of the reduced responses.

    A vanishing eta3 or eta4 leaves the corresponding zero undefined and the
    candidate design is reported as infeasible.
    """
    eta = np.asarray(eta, dtype=float)
    tiny = 1e-12 * max(1.0, float(np.linalg.norm(eta)))
    if abs(eta[3]) <= tiny or abs(eta[2]) <= tiny:
        raise InfeasibleDesignError(
            "sliding vector has a vanishing third or fourth component; "
            "transfer-function zeros are undefined")
    return float(-eta[1] / eta[3]), float(-eta[0] / eta[2])


def _resolvent_numerator(A: np.ndarray, c_row: np.ndarray, b_col: np.ndarray,
                         den: np.ndarray) -> np.ndarray:
    """Coefficients of c_row adj(sI - A) b_col for a 3x3 A (Faddeev-LeVerrier).

    adj(sI - A) = I s^2 + M2 s + M3 with M2 = A + c2 I and M3 = A M2 + c1 I,
    where den = [1, c2, c1, c0] is the characteristic polynomial.
    """
    eye = np.eye(3)
    M2 = A + den[1] * eye
    M3 = A @ M2 + den[2] * eye
    return np.array([c_row @ b_col, c_row @ M2 @ b_col, c_row @ M3 @ b_col])


def build_transfer_functions(design: SlidingDesign) -> TransferFunctions:
    """Realize G1, G2, G3, Gu as rational functions of s.

    All four share the sliding characteristic polynomial
    (s - lambda3)(s^2 + 2 zeta omega_n s + omega_n^2) as denominator. The
    displacement/velocity responses come in closed form from alpha2 and the
    zeros psi1/psi2; the force response nu1 (sI - A1)^{-1} B1 + alpha1 is
    expanded through the adjugate of (sI - A1).
    """
    psi1, psi2 = transfer_zeros(design.eta)
    p = design.poles
    den = np.polymul([1.0, -p.lambda3],
                     [1.0, 2.0 * p.zeta * p.omega_n, p.omega_n ** 2]).astype(float)

    a2 = design.alpha2
    eta = design.eta
    g1 = RationalTf(num=np.array([1.0, -psi1]), den=den, gain=a2)
    g2 = RationalTf(num=np.array([1.0, -psi2]), den=den, gain=-a2 * eta[2] / eta[3])
    g3 = RationalTf(num=np.array([1.0, -psi1, 0.0]), den=den, gain=a2)

    num_u = _resolvent_numerator(design.A1, design.nu1, design.B1, den)
    gu = RationalTf(num=design.alpha1 * den + np.concatenate(([0.0], num_u)),
                    den=den, gain=1.0)
    return TransferFunctions(g1=g1, g2=g2, g3=g3, gu=gu, psi1=psi1, psi2=psi2)


def frequency_grid(band=DEFAULT_BAND, n_samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Uniform linear grid over the band, endpoints included."""
    lo, hi = band
    if not lo < hi:
        raise ConfigError(f"band must satisfy lower < upper, got {band}")
    if n_samples < 2:
        raise ConfigError(f"need at least 2 samples, got {n_samples}")
    return np.linspace(lo, hi, int(n_samples))


def band_rms(tf: RationalTf, delta: float, band=DEFAULT_BAND,
             n_samples: int = DEFAULT_SAMPLES) -> float:
    """RMS of |delta * tf(j omega)| over the sampling grid."""
    if delta <= 0:
        raise ConfigError(f"delta must be positive, got {delta}")
    mags = delta * tf.magnitude(frequency_grid(band, n_samples))
    return float(np.sqrt(np.mean(mags ** 2)))


def band_peak(tf: RationalTf, delta: float, band=DEFAULT_BAND,
              n_samples: int = DEFAULT_SAMPLES) -> float:
    """Maximum of |delta * tf(j omega)| over the same grid band_rms uses."""
    if delta <= 0:
        raise ConfigError(f"delta must be positive, got {delta}")
    mags = delta * tf.magnitude(frequency_grid(band, n_samples))
    return float(np.max(mags))


def band_metrics(tfs: TransferFunctions, delta: float, band=DEFAULT_BAND,
                 n_samples: int = DEFAULT_SAMPLES) -> BandMetrics:
    """kappa_i for all four responses plus the force peak chi, one shared grid."""
    return BandMetrics(
        kappa1=band_rms(tfs.g1, delta, band, n_samples),
        kappa2=band_rms(tfs.g2, delta, band, n_samples),
        kappa3=band_rms(tfs.g3, delta, band, n_samples),
        kappa_u=band_rms(tfs.gu, delta, band, n_samples),
        chi=band_peak(tfs.gu, delta, band, n_samples),
        band=(float(band[0]), float(band[1])),
        n_samples=int(n_samples),
    )


def dump_frequency_response(tfs: TransferFunctions, delta: float, path,
                            band=DEFAULT_BAND, n_samples: int = DEFAULT_SAMPLES) -> None:
    """CSV dump of the scaled magnitudes |H_i(j omega)| for plotting."""
    omega = frequency_grid(band, n_samples)
    columns = [delta * tf.magnitude(omega) for tf in
               (tfs.g1, tfs.g2, tfs.g3, tfs.gu)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["omega_rad_s", "H1", "H2", "H3", "Hu"])
        for i, w in enumerate(omega):
            writer.writerow([repr(float(w))] + [repr(float(col[i])) for col in columns])
