"""Exhaustive feasibility-filtered grid search over the pole layout.

The scan walks the (zeta, omega_n) rectangle with fixed increments, builds
the sliding design at every point, discards candidates whose transfer zeros
sit too close to the dominant pair or whose band-limited RMS responses exceed
the configured ceilings, and finally picks the survivor minimizing either the
top-floor displacement index (kappa2) or the control-effort index (kappa_u).
The switching gain follows from the force peak of the winning design.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InfeasibleDesignError, InfeasibleTuningError, NumericalError
from .freqresp import (DEFAULT_BAND, DEFAULT_SAMPLES, band_peak, band_rms,
                       build_transfer_functions, transfer_zeros)
from .smc import PoleSpec, SlidingDesign, design_sliding_controller, switching_gain
from .structure import ModalModel, PlantStateSpace

__all__ = [
    "KappaBounds",
    "TuningConfig",
    "TuningTuple",
    "TuningResult",
    "load_tuning_config",
    "tune",
    "feasible_region",
    "export_mesh",
    "result_from_dict",
]

INDEX_CHOICES = ("jz2", "ju")

INFEASIBLE_MESSAGE = ("no feasible sliding design for this initialization; "
                      "relax the kappa ceilings or widen the zeta/omega_n ranges")


@dataclass(frozen=True)
class KappaBounds:
    """Ceilings for the band-limited RMS responses (SI: m, m, m/s, N)."""

    kappa1: float
    kappa2: float
    kappa3: float
    kappa_u: float

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "kappa3", "kappa_u"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} ceiling must be positive")


@dataclass(frozen=True)
class TuningConfig:
    """Search ranges, zero-distance factors, response ceilings, and the index.

    omega_nl/omega_nu/delta_omega are expressed as multiples of the dominant
    structural frequency omega0; zeta is dimensionless. lambda4 only matters
    for the reaching analysis and is set to -lambda4_factor*zeta*omega_n.
    """

    kappa_bars: KappaBounds
    zeta_l: float = 0.5
    zeta_u: float = 0.9
    delta_zeta: float = 0.01
    omega_nl: float = 0.5
    omega_nu: float = 0.8
    delta_omega: float = 0.01
    gamma1: float = 5.0
    gamma2: float = 1.0
    index: str = "jz2"
    band: tuple[float, float] = DEFAULT_BAND
    n_samples: int = DEFAULT_SAMPLES
    varsigma: float = 0.5
    epsilon: float = 0.05
    lambda4_factor: float = 10.0

    def __post_init__(self):
        if not self.zeta_l < self.zeta_u:
            raise ConfigError("zeta_l must be smaller than zeta_u")
        if not self.omega_nl < self.omega_nu:
            raise ConfigError("omega_nl must be smaller than omega_nu")
        if self.delta_zeta <= 0 or self.delta_omega <= 0:
            raise ConfigError("grid increments must be positive")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ConfigError("gamma factors must be positive")
        if self.index not in INDEX_CHOICES:
            raise ConfigError(f"index must be one of {INDEX_CHOICES}, got {self.index!r}")
        if self.varsigma <= 0 or self.epsilon <= 0:
            raise ConfigError("varsigma and epsilon must be positive")
        if self.lambda4_factor <= 0:
            raise ConfigError("lambda4_factor must be positive")

    def zeta_values(self) -> np.ndarray:
        return _inclusive_grid(self.zeta_l, self.zeta_u, self.delta_zeta)

    def omega_ratios(self) -> np.ndarray:
        return _inclusive_grid(self.omega_nl, self.omega_nu, self.delta_omega)

    def to_dict(self) -> dict:
        return {
            "kappa_bars": {
                "kappa1": self.kappa_bars.kappa1,
                "kappa2": self.kappa_bars.kappa2,
                "kappa3": self.kappa_bars.kappa3,
                "kappa_u": self.kappa_bars.kappa_u,
            },
            "zeta_l": self.zeta_l, "zeta_u": self.zeta_u, "delta_zeta": self.delta_zeta,
            "omega_nl": self.omega_nl, "omega_nu": self.omega_nu,
            "delta_omega": self.delta_omega,
            "gamma1": self.gamma1, "gamma2": self.gamma2,
            "index": self.index,
            "band": [self.band[0], self.band[1]],
            "n_samples": self.n_samples,
            "varsigma": self.varsigma, "epsilon": self.epsilon,
            "lambda4_factor": self.lambda4_factor,
        }


def _inclusive_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """lo, lo+step, ... up to hi inclusive (tolerant of float step error)."""
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def load_tuning_config(source) -> TuningConfig:
    """Parse a TuningConfig from JSON (path, or dict already parsed)."""
    if isinstance(source, dict):
        cfg = dict(source)
    else:
        path = Path(source)
        try:
            cfg = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column "
                              f"{exc.colno}: {exc.msg}") from exc
    if "kappa_bars" not in cfg:
        raise ConfigError("tuning config needs a 'kappa_bars' object")
    bars = cfg.pop("kappa_bars")
    try:
        kappa_bars = KappaBounds(
            kappa1=float(bars["kappa1"]), kappa2=float(bars["kappa2"]),
            kappa3=float(bars["kappa3"]), kappa_u=float(bars["kappa_u"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError("kappa_bars needs numeric kappa1, kappa2, kappa3, kappa_u") from exc
    if "band" in cfg:
        cfg["band"] = tuple(float(x) for x in cfg["band"])
    known = set(TuningConfig.__dataclass_fields__)
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown tuning config keys: {sorted(unknown)}")
    return TuningConfig(kappa_bars=kappa_bars, **cfg)


@dataclass(frozen=True)
class TuningTuple:
    """One feasible grid point: pole layout, sliding vector, and its metrics."""

    zeta: float
    omega_n: float          # rad/s
    omega_ratio: float      # omega_n / omega0
    eta: np.ndarray
    kappa1: float
    kappa2: float
    kappa3: float
    kappa_u: float
    lambda1: complex
    lambda2: complex
    lambda3: float
    psi1: float
    psi2: float

    def index_value(self, index: str) -> float:
        return self.kappa2 if index == "jz2" else self.kappa_u

    def to_dict(self) -> dict:
        return {
            "zeta": self.zeta,
            "omega_n": self.omega_n,
            "omega_ratio": self.omega_ratio,
            "eta": [float(x) for x in self.eta],
            "kappa1": self.kappa1, "kappa2": self.kappa2,
            "kappa3": self.kappa3, "kappa_u": self.kappa_u,
            "lambda1": [self.lambda1.real, self.lambda1.imag],
            "lambda2": [self.lambda2.real, self.lambda2.imag],
            "lambda3": self.lambda3,
            "psi1": self.psi1, "psi2": self.psi2,
        }


@dataclass(frozen=True)
class TuningResult:
    """Outcome of the grid scan.

    ``tuples`` holds every feasible candidate in scan order (zeta-major).
    ``best_index`` points into it; an empty scan leaves it None together with
    an explanatory message. The winning design carries the switching gain M0
    derived from the force peak chi.
    """

    config: TuningConfig
    omega0: float
    tuples: tuple[TuningTuple, ...]
    best_index: int | None = None
    design: SlidingDesign | None = None
    chi: float | None = None
    M0: float | None = None
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.best_index is not None

    @property
    def feasible_count(self) -> int:
        return len(self.tuples)

    @property
    def best(self) -> TuningTuple | None:
        return None if self.best_index is None else self.tuples[self.best_index]

    def mesh(self) -> np.ndarray:
        """(n, 6) array of zeta, omega_ratio, kappa1..kappa_u per feasible point."""
        return np.array([[t.zeta, t.omega_ratio, t.kappa1, t.kappa2, t.kappa3, t.kappa_u]
                         for t in self.tuples])

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "omega0": self.omega0,
            "feasible": self.feasible,
            "feasible_count": self.feasible_count,
            "message": self.message,
            "best_index": self.best_index,
            "best": None if self.best is None else self.best.to_dict(),
            "design": None if self.design is None else self.design.to_dict(),
            "chi": self.chi,
            "M0": self.M0,
            "feasible_zeta_range": None if not self.feasible else list(_span(
                [t.zeta for t in self.tuples])),
            "feasible_omega_range": None if not self.feasible else list(_span(
                [t.omega_ratio for t in self.tuples])),
            "tuples": [t.to_dict() for t in self.tuples],
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def _span(values) -> tuple[float, float]:
    return float(min(values)), float(max(values))


def _evaluate_point(plant: PlantStateSpace, omega0: float, config: TuningConfig,
                    zeta: float, ratio: float) -> TuningTuple | None:
    """Build and screen one candidate; None when any feasibility check fails."""
    omega_n = ratio * omega0
    poles = PoleSpec(zeta=zeta, omega_n=omega_n,
                     lambda4=-config.lambda4_factor * zeta * omega_n)
    try:
        design = design_sliding_controller(plant, poles, epsilon=config.epsilon)
        psi1, psi2 = transfer_zeros(design.eta)
    except InfeasibleDesignError:
        return None
    except NumericalError:
        return None

    zw = zeta * omega_n
    if abs(psi1) / zw < config.gamma1 or abs(psi2) / zw < config.gamma2:
        return None

    tfs = build_transfer_functions(design)
    delta = plant.bounds.delta
    k1 = band_rms(tfs.g1, delta, config.band, config.n_samples)
    k2 = band_rms(tfs.g2, delta, config.band, config.n_samples)
    k3 = band_rms(tfs.g3, delta, config.band, config.n_samples)
    ku = band_rms(tfs.gu, delta, config.band, config.n_samples)
    bars = config.kappa_bars
    if (k1 > bars.kappa1 or k2 > bars.kappa2 or k3 > bars.kappa3
            or ku + plant.bounds.varpi > bars.kappa_u):
        return None

    return TuningTuple(
        zeta=float(zeta), omega_n=float(omega_n), omega_ratio=float(ratio),
        eta=design.eta, kappa1=k1, kappa2=k2, kappa3=k3, kappa_u=ku,
        lambda1=poles.lambda1, lambda2=poles.lambda2, lambda3=poles.lambda3,
        psi1=psi1, psi2=psi2)


def tune(plant: PlantStateSpace, modal: ModalModel, config: TuningConfig,
         workers: int = 1) -> TuningResult:
    """Run the full grid scan and pick the index-minimizing design.

    Grid points are independent; with workers > 1 they are evaluated in a
    thread pool and re-assembled in scan order, so the result is identical to
    a serial run. Ties on the index value break toward smaller omega_n, then
    smaller zeta.
    """
    omega0 = modal.omega0
    zetas = config.zeta_values()
    ratios = config.omega_ratios()
    grid = [(z, r) for z in zetas for r in ratios]

    if workers > 1:
        chunk = max(1, len(grid) // (8 * workers))
        pieces = [grid[i:i + chunk] for i in range(0, len(grid), chunk)]

        def run(piece):
            return [_evaluate_point(plant, omega0, config, z, r) for z, r in piece]

        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluated = [t for part in pool.map(run, pieces) for t in part]
    else:
        evaluated = [_evaluate_point(plant, omega0, config, z, r) for z, r in grid]

    tuples = tuple(t for t in evaluated if t is not None)
    if not tuples:
        return TuningResult(config=config, omega0=omega0, tuples=(),
                            message=INFEASIBLE_MESSAGE)

    best_index = min(range(len(tuples)),
                     key=lambda i: (tuples[i].index_value(config.index),
                                    tuples[i].omega_ratio, tuples[i].zeta))
    best = tuples[best_index]
    poles = PoleSpec(zeta=best.zeta, omega_n=best.omega_n,
                     lambda4=-config.lambda4_factor * best.zeta * best.omega_n)
    design = design_sliding_controller(plant, poles, epsilon=config.epsilon)
    chi = band_peak(build_transfer_functions(design).gu, plant.bounds.delta,
                    config.band, config.n_samples)
    M0 = switching_gain(chi, plant.bounds.varpi, config.varsigma)
    return TuningResult(config=config, omega0=omega0, tuples=tuples,
                        best_index=best_index,
                        design=design.with_switching_gain(M0), chi=chi, M0=M0)


def feasible_region(result: TuningResult) -> dict[str, tuple[float, float]]:
    """Min/max of zeta and omega_n/omega0 over the saved tuples."""
    if not result.feasible:
        raise InfeasibleTuningError(result.message or INFEASIBLE_MESSAGE)
    return {
        "zeta": _span([t.zeta for t in result.tuples]),
        "omega_ratio": _span([t.omega_ratio for t in result.tuples]),
    }


def export_mesh(result: TuningResult, path) -> None:
    """CSV of the feasible mesh, one row per tuple, argmin marked at the end.

    Data rows map one-to-one onto ``result.tuples``; the final comment line
    repeats the winning point so plotting scripts can highlight it.
    """
    if not result.feasible:
        raise InfeasibleTuningError(result.message or INFEASIBLE_MESSAGE)
    header = ["zeta", "omega_n_over_omega0", "kappa1", "kappa2", "kappa3", "kappa_u"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for t in result.tuples:
            fh.write(",".join(repr(v) for v in
                              (t.zeta, t.omega_ratio, t.kappa1, t.kappa2,
                               t.kappa3, t.kappa_u)) + "\n")
        b = result.best
        fh.write("# argmin," + ",".join(repr(v) for v in
                                        (b.zeta, b.omega_ratio, b.kappa1, b.kappa2,
                                         b.kappa3, b.kappa_u)) + "\n")


def _tuple_from_dict(d: dict) -> TuningTuple:
    return TuningTuple(
        zeta=float(d["zeta"]), omega_n=float(d["omega_n"]),
        omega_ratio=float(d["omega_ratio"]),
        eta=np.asarray(d["eta"], dtype=float),
        kappa1=float(d["kappa1"]), kappa2=float(d["kappa2"]),
        kappa3=float(d["kappa3"]), kappa_u=float(d["kappa_u"]),
        lambda1=complex(*d["lambda1"]), lambda2=complex(*d["lambda2"]),
        lambda3=float(d["lambda3"]),
        psi1=float(d["psi1"]), psi2=float(d["psi2"]))


def result_from_dict(d: dict, plant: PlantStateSpace) -> TuningResult:
    """Rebuild a TuningResult (including its design) from its JSON dict."""
    config = load_tuning_config(d["config"])
    tuples = tuple(_tuple_from_dict(td) for td in d["tuples"])
    best_index = d.get("best_index")
    design = None
    if best_index is not None:
        best = tuples[best_index]
        poles = PoleSpec(zeta=best.zeta, omega_n=best.omega_n,
                         lambda4=-config.lambda4_factor * best.zeta * best.omega_n)
        design = design_sliding_controller(plant, poles, epsilon=config.epsilon)
        if d.get("M0") is not None:
            design = design.with_switching_gain(d["M0"])
    return TuningResult(config=config, omega0=float(d["omega0"]), tuples=tuples,
                        best_index=best_index, design=design,
                        chi=d.get("chi"), M0=d.get("M0"),
                        message=d.get("message", ""))
