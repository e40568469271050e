"""Shear-building model, first-mode reduction, and the coupled damper plant.

All quantities are strict SI (kg, N/m, N*s/m, m, s). The 4-state plant uses
z = [x_d, x_N, dx_d/dt, dx_N/dt]: stroke of the rooftop damper relative to
the top floor, top-floor displacement relative to the ground, and their
velocities.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError

__all__ = [
    "RayleighSpec",
    "BuildingModel",
    "AtmdParams",
    "ExcitationBounds",
    "ModalModel",
    "PlantStateSpace",
    "BuildingSetup",
    "build_shear_building",
    "rayleigh_damping",
    "natural_modes",
    "modal_reduce",
    "assemble_plant",
    "controllability_matrix",
    "controllability_rcond",
    "load_building_config",
    "plant_from_setup",
]

#: reciprocal condition number below which the controllability matrix is
#: treated as singular
CTRB_RCOND_MIN = 1e-12


def _readonly(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RayleighSpec:
    """Proportional damping C = a0*M + a1*K calibrated at the given modes.

    ``pairs`` holds (mode_index, damping_ratio) with 1-based mode indices.
    A single pair selects mass-proportional damping (a1 = 0), which is the
    only option for a single-story model.
    """

    pairs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if len(self.pairs) not in (1, 2):
            raise ConfigError("Rayleigh damping needs one or two (mode, ratio) pairs")
        for mode, ratio in self.pairs:
            if int(mode) != mode or mode < 1:
                raise ConfigError(f"mode index must be a positive integer, got {mode}")
            if not 0.0 < ratio < 1.0:
                raise ConfigError(f"damping ratio must lie in (0, 1), got {ratio}")


@dataclass(frozen=True)
class BuildingModel:
    """N-story shear building: diagonal mass, tridiagonal stiffness/damping."""

    floor_masses: np.ndarray          # kg, one per story
    interstory_stiffnesses: np.ndarray  # N/m, one per story
    M: np.ndarray
    C: np.ndarray
    K: np.ndarray

    @property
    def n_stories(self) -> int:
        return len(self.floor_masses)


@dataclass(frozen=True)
class AtmdParams:
    """Physical parameters of the rooftop mass damper."""

    m_d: float   # moving mass, kg
    k_d: float   # spring stiffness, N/m
    c_d: float   # viscous damping, N*s/m
    mu_d: float = 0.0  # Coulomb friction level, N

    def __post_init__(self):
        if self.m_d <= 0:
            raise ConfigError(f"damper mass must be positive, got {self.m_d}")
        for name in ("k_d", "c_d", "mu_d"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass(frozen=True)
class ExcitationBounds:
    """Known magnitude bounds: peak ground acceleration and friction force."""

    delta: float   # max |ground acceleration|, m/s^2
    varpi: float   # max |friction force|, N

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if self.varpi < 0:
            raise ConfigError(f"varpi must be non-negative, got {self.varpi}")


@dataclass(frozen=True)
class ModalModel:
    """Dominant-mode reduction of the building."""

    phi0: np.ndarray   # first mode shape, scaled so the top entry is 1
    m0: float          # modal mass, kg
    c0: float          # modal damping, N*s/m
    k0: float          # modal stiffness, N/m
    beta0: float       # participation factor of the ground acceleration
    omega0: float      # first natural frequency, rad/s


@dataclass(frozen=True)
class PlantStateSpace:
    """4-state model dz/dt = A z + B (u - f(z3)) + D xg_dd."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    bounds: ExcitationBounds

    @property
    def participation(self) -> float:
        """Participation factor encoded in the excitation vector."""
        return -float(self.D[3])


@dataclass(frozen=True)
class BuildingSetup:
    """Parsed building configuration: structure, damper, and bounds."""

    building: BuildingModel
    atmd: AtmdParams
    bounds: ExcitationBounds
    participation: float | None = None  # optional override of beta0 in the plant
    label: str = ""


def build_shear_building(masses, stiffnesses, damping) -> BuildingModel:
    """Assemble M, C, K for an N-story shear building.

    ``damping`` is either a RayleighSpec or an explicit N x N symmetric
    tridiagonal matrix in N*s/m. Stiffness assembly follows the usual
    interstory convention: K[i,i] = k_i + k_{i+1} with k_{N+1} = 0 and
    off-diagonals -k_{i+1}.
    """
    m = np.asarray(masses, dtype=float)
    k = np.asarray(stiffnesses, dtype=float)
    if m.ndim != 1 or k.ndim != 1 or len(m) != len(k):
        raise ConfigError("masses and stiffnesses must be 1-D lists of equal length")
    n = len(m)
    if n < 1:
        raise ConfigError("need at least one story")
    if np.any(m <= 0) or np.any(k <= 0):
        raise ConfigError("all masses and stiffnesses must be positive")

    M = np.diag(m)
    K = np.zeros((n, n))
    for i in range(n):
        K[i, i] = k[i] + (k[i + 1] if i + 1 < n else 0.0)
        if i + 1 < n:
            K[i, i + 1] = K[i + 1, i] = -k[i + 1]

    if isinstance(damping, RayleighSpec):
        C = rayleigh_damping(M, K, damping.pairs)
    else:
        C = np.asarray(damping, dtype=float)
        if C.shape != (n, n):
            raise ConfigError(f"damping matrix must be {n}x{n}, got {C.shape}")
        scale = max(1.0, float(np.abs(C).max()))
        if np.abs(C - C.T).max() > 1e-9 * scale:
            raise ConfigError("damping matrix must be symmetric")
        off_band = C - np.tril(np.triu(C, -1), 1)
        if np.abs(off_band).max() > 1e-9 * scale:
            raise ConfigError("damping matrix must be tridiagonal")

    return BuildingModel(
        floor_masses=_readonly(m),
        interstory_stiffnesses=_readonly(k),
        M=_readonly(M),
        C=_readonly(C),
        K=_readonly(K),
    )


def natural_modes(M, K):
    """Undamped natural frequencies (rad/s, ascending) and mode shapes.

    Solves K v = lambda M v. A diagonal M makes the similarity transform
    S = M^{-1/2} K M^{-1/2} exact, so the symmetric solver applies and the
    spectrum is guaranteed real.
    """
    d = np.sqrt(np.diag(M))
    if np.any(d <= 0):
        raise NumericalError("mass matrix has non-positive diagonal entries")
    S = K / d[:, None] / d[None, :]
    try:
        eigvals, Y = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on symmetric rarely fails
        raise NumericalError(f"eigen-solver failed: {exc}") from exc
    if np.any(eigvals <= 0):
        raise NumericalError("stiffness matrix is not positive definite")
    return np.sqrt(eigvals), Y / d[:, None]


def rayleigh_damping(M, K, mode_pairs=((1, 0.01), (2, 0.01))) -> np.ndarray:
    """Proportional damping matrix matching the requested modal ratios.

    Solves zeta_i = (a0/w_i + a1*w_i)/2 at the two specified modal
    frequencies. With a single pair only the mass-proportional term is used:
    C = 2*zeta*w*M.
    """
    M = np.asarray(M, dtype=float)
    K = np.asarray(K, dtype=float)
    freqs, _ = natural_modes(M, K)
    n = len(freqs)

    pairs = tuple(mode_pairs)
    for mode, ratio in pairs:
        if not 1 <= mode <= n:
            raise ConfigError(f"mode index {mode} out of range 1..{n}")
        if not 0.0 < ratio < 1.0:
            raise ConfigError(f"damping ratio must lie in (0, 1), got {ratio}")

    if len(pairs) == 1:
        mode, ratio = pairs[0]
        a0, a1 = 2.0 * ratio * freqs[mode - 1], 0.0
    elif len(pairs) == 2:
        (m1, z1), (m2, z2) = pairs
        w1, w2 = freqs[m1 - 1], freqs[m2 - 1]
        if abs(w1 - w2) <= 1e-9 * max(w1, w2):
            raise NumericalError("coincident modal frequencies make the Rayleigh solve singular")
        A = np.array([[1.0 / (2.0 * w1), w1 / 2.0], [1.0 / (2.0 * w2), w2 / 2.0]])
        a0, a1 = np.linalg.solve(A, [z1, z2])
    else:
        raise ConfigError("Rayleigh damping needs one or two (mode, ratio) pairs")

    return a0 * M + a1 * K


def modal_reduce(building: BuildingModel) -> ModalModel:
    """Reduce the building to its dominant first mode.

    The mode shape is scaled so its top-floor entry equals 1; the modal mass,
    damping, stiffness, and participation factor follow from quadratic forms
    in M, C, K.
    """
    freqs, shapes = natural_modes(building.M, building.K)
    raw = shapes[:, 0]
    top = raw[-1]
    if abs(top) <= 1e-12 * np.linalg.norm(raw):
        raise NumericalError("first mode has (numerically) zero top-floor component; cannot scale")
    phi0 = raw / top

    M, C, K = building.M, building.C, building.K
    m0 = float(phi0 @ M @ phi0)
    c0 = float(phi0 @ C @ phi0)
    k0 = float(phi0 @ K @ phi0)
    beta0 = float(phi0 @ M @ np.ones(building.n_stories)) / m0
    return ModalModel(
        phi0=_readonly(phi0),
        m0=m0,
        c0=c0,
        k0=k0,
        beta0=beta0,
        omega0=float(np.sqrt(k0 / m0)),
    )


def controllability_matrix(A, B) -> np.ndarray:
    """[B, AB, A^2 B, ..., A^{n-1} B] for a single-input pair."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(B, dtype=float).reshape(-1)
    cols = [b]
    for _ in range(len(b) - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


def controllability_rcond(A, B) -> float:
    """Reciprocal 2-norm condition number of the controllability matrix."""
    s = np.linalg.svd(controllability_matrix(A, B), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def assemble_plant(modal: ModalModel, atmd: AtmdParams, bounds: ExcitationBounds,
                   participation: float | None = None) -> PlantStateSpace:
    """Couple the dominant mode with the damper into the 4-state plant.

    ``participation`` overrides the participation factor used in the
    excitation vector D (the A and B matrices never depend on it); by default
    the modal value is used.
    """
    m0, c0, k0 = modal.m0, modal.c0, modal.k0
    md, cd, kd = atmd.m_d, atmd.c_d, atmd.k_d
    beta0 = modal.beta0 if participation is None else float(participation)
    r = (m0 + md) / (m0 * md)

    A = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-kd * r, k0 / m0, -cd * r, c0 / m0],
        [kd / m0, -k0 / m0, cd / m0, -c0 / m0],
    ])
    B = np.array([0.0, 0.0, r, -1.0 / m0])
    D = np.array([0.0, 0.0, beta0 - 1.0, -beta0])

    rcond = controllability_rcond(A, B)
    if rcond <= CTRB_RCOND_MIN:
        raise NumericalError(
            f"(A, B) pair is numerically uncontrollable (rcond={rcond:.3e})")
    return PlantStateSpace(A=_readonly(A), B=_readonly(B), D=_readonly(D), bounds=bounds)


def _require(cfg: dict, key: str, context: str):
    if key not in cfg:
        raise ConfigError(f"missing key '{key}' in {context}")
    return cfg[key]


def load_building_config(source) -> BuildingSetup:
    """Parse a building description from JSON (path, file object, or dict).

    Schema::

        {
          "floors": [{"mass": .., "stiffness": ..}, ...],
          "damping": {"rayleigh": {"modes": [1, 2], "ratios": [0.01, 0.01]}}
                     | {"matrix": [[..], ..]},
          "atmd": {"mass": .., "stiffness": .., "damping": .., "coulomb": ..},
          "bounds": {"delta": .., "varpi": ..},
          "participation_factor": 1.0   # optional beta0 override
        }

    All numbers SI.
    """
    if isinstance(source, dict):
        cfg = source
        context = "building config"
    else:
        path = Path(source)
        context = str(path)
        try:
            cfg = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                              f"{exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{context}: top level must be an object")

    floors = _require(cfg, "floors", context)
    if not isinstance(floors, list) or not floors:
        raise ConfigError(f"{context}: 'floors' must be a non-empty list")
    try:
        masses = [float(f["mass"]) for f in floors]
        stiffnesses = [float(f["stiffness"]) for f in floors]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{context}: each floor needs numeric 'mass' and 'stiffness'") from exc

    damping_cfg = _require(cfg, "damping", context)
    if "rayleigh" in damping_cfg:
        ray = damping_cfg["rayleigh"]
        modes = _require(ray, "modes", f"{context} damping.rayleigh")
        ratios = _require(ray, "ratios", f"{context} damping.rayleigh")
        if len(modes) != len(ratios):
            raise ConfigError(f"{context}: rayleigh modes and ratios must pair up")
        damping = RayleighSpec(tuple((int(m), float(z)) for m, z in zip(modes, ratios)))
    elif "matrix" in damping_cfg:
        damping = np.asarray(damping_cfg["matrix"], dtype=float)
    else:
        raise ConfigError(f"{context}: damping needs either 'rayleigh' or 'matrix'")

    atmd_cfg = _require(cfg, "atmd", context)
    atmd = AtmdParams(
        m_d=float(_require(atmd_cfg, "mass", f"{context} atmd")),
        k_d=float(_require(atmd_cfg, "stiffness", f"{context} atmd")),
        c_d=float(_require(atmd_cfg, "damping", f"{context} atmd")),
        mu_d=float(atmd_cfg.get("coulomb", 0.0)),
    )
    bounds_cfg = _require(cfg, "bounds", context)
    bounds = ExcitationBounds(
        delta=float(_require(bounds_cfg, "delta", f"{context} bounds")),
        varpi=float(_require(bounds_cfg, "varpi", f"{context} bounds")),
    )
    participation = cfg.get("participation_factor")
    if participation is not None:
        participation = float(participation)

    building = build_shear_building(masses, stiffnesses, damping)
    return BuildingSetup(building=building, atmd=atmd, bounds=bounds,
                         participation=participation, label=str(cfg.get("label", "")))


def plant_from_setup(setup: BuildingSetup) -> tuple[ModalModel, PlantStateSpace]:
    """Convenience chain: modal reduction followed by plant assembly."""
    modal = modal_reduce(setup.building)
    plant = assemble_plant(modal, setup.atmd, setup.bounds, participation=setup.participation)
    return modal, plant
