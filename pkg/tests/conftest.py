"""Shared fixtures: bundled configurations, tuned designs, and random plants.

The tuning scans and simulations are session-scoped because several test
modules (and the acceptance suite) assert against the same results; timings
are captured alongside so runtime budgets can be checked where required.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pytest

import smctune as st
from smctune.fixtures import fixture_path


@dataclass(frozen=True)
class TimedResult:
    result: st.TuningResult
    seconds: float


def _timed_tune(plant, modal, config, **kw) -> TimedResult:
    tic = time.perf_counter()
    result = st.tune(plant, modal, config, **kw)
    return TimedResult(result=result, seconds=time.perf_counter() - tic)


@pytest.fixture(scope="session")
def five_story_setup() -> st.BuildingSetup:
    return st.load_building_config(fixture_path("five_story.json"))


@pytest.fixture(scope="session")
def five_story(five_story_setup):
    modal, plant = st.plant_from_setup(five_story_setup)
    return five_story_setup, modal, plant


@pytest.fixture(scope="session")
def quanser_setup() -> st.BuildingSetup:
    return st.load_building_config(fixture_path("quanser.json"))


@pytest.fixture(scope="session")
def quanser(quanser_setup):
    modal, plant = st.plant_from_setup(quanser_setup)
    return quanser_setup, modal, plant


@pytest.fixture(scope="session")
def five_story_tuning() -> st.TuningConfig:
    return st.load_tuning_config(fixture_path("five_story_tuning.json"))


@pytest.fixture(scope="session")
def quanser_tuning() -> st.TuningConfig:
    return st.load_tuning_config(fixture_path("quanser_tuning.json"))


@pytest.fixture(scope="session")
def tune_five_jz2(five_story, five_story_tuning) -> TimedResult:
    _, modal, plant = five_story
    return _timed_tune(plant, modal, five_story_tuning)


@pytest.fixture(scope="session")
def tune_five_ju(five_story, five_story_tuning) -> TimedResult:
    _, modal, plant = five_story
    config = st.load_tuning_config({**five_story_tuning.to_dict(), "index": "ju"})
    return _timed_tune(plant, modal, config)


@pytest.fixture(scope="session")
def tune_quanser_jz2(quanser, quanser_tuning) -> TimedResult:
    _, modal, plant = quanser
    return _timed_tune(plant, modal, quanser_tuning)


@pytest.fixture(scope="session")
def tune_quanser_ju(quanser, quanser_tuning) -> TimedResult:
    _, modal, plant = quanser
    config = st.load_tuning_config({**quanser_tuning.to_dict(), "index": "ju"})
    return _timed_tune(plant, modal, config)


@pytest.fixture(scope="session")
def quake() -> st.Accelerogram:
    """Bundled synthetic record rescaled to the 5-story excitation bound."""
    return st.load_accelerogram(fixture_path("synthetic_quake.csv"),
                                scale=0.5, scale_mode="pga")


@dataclass(frozen=True)
class SimRuns:
    passive: st.SimulationTrace
    smc_jz2: st.SimulationTrace
    smc_ju: st.SimulationTrace
    seconds_per_run: float


@pytest.fixture(scope="session")
def five_story_runs(five_story, tune_five_jz2, tune_five_ju, quake) -> SimRuns:
    setup, _, plant = five_story
    mu = setup.atmd.mu_d
    tic = time.perf_counter()
    passive = st.simulate(plant, st.PassiveControl(), quake, 30.0, mu_d=mu)
    smc_jz2 = st.simulate(plant, st.SmcControl(tune_five_jz2.result.design, label="smc-jz2"),
                          quake, 30.0, mu_d=mu)
    smc_ju = st.simulate(plant, st.SmcControl(tune_five_ju.result.design, label="smc-ju"),
                         quake, 30.0, mu_d=mu)
    elapsed = (time.perf_counter() - tic) / 3.0
    return SimRuns(passive=passive, smc_jz2=smc_jz2, smc_ju=smc_ju,
                   seconds_per_run=elapsed)


def make_random_plant(rng: np.random.Generator, ctrb_floor: float = 1e-6) -> st.PlantStateSpace:
    """Generic controllable 4-state single-input system for property tests."""
    while True:
        A = rng.normal(scale=2.0, size=(4, 4))
        B = rng.normal(size=4)
        if st.controllability_rcond(A, B) > ctrb_floor:
            break
    D = rng.normal(size=4)
    return st.PlantStateSpace(A=A, B=B, D=D, bounds=st.ExcitationBounds(1.0, 0.0))


def make_random_poles(rng: np.random.Generator) -> st.PoleSpec:
    return st.PoleSpec(zeta=rng.uniform(0.2, 0.95), omega_n=rng.uniform(1.0, 10.0),
                       lambda3=-rng.uniform(1.0, 8.0), lambda4=-rng.uniform(5.0, 30.0))
