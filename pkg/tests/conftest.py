"""Shared fixtures: bundled designs, reference table, one startup run."""

from __future__ import annotations

import pytest
from hypothesis import settings

from beamosc.config import BUILTIN_DESIGNS, ProjectConfig, load_builtin_design
from beamosc.explore import evaluate
from beamosc.pierce import PierceConfig
from beamosc.report import load_reference
from beamosc.simulate import SimConfig, simulate_startup

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def reference():
    """Bundled reference device table, keyed by design number as str."""
    return load_reference()["designs"]


@pytest.fixture(scope="session")
def design_points():
    """Evaluated bundled designs {1: DesignPoint, 2: ..., 3: ...}."""
    points = {}
    for n in BUILTIN_DESIGNS:
        cfg = ProjectConfig.from_raw(load_builtin_design(n))
        points[n] = evaluate(cfg.build_inputs())
    return points


def run_startup(point, gm=None, sim=None, x_max=float("inf")):
    """Simulate one evaluated design point's startup.

    The default window is 700 cycles: long enough for the loop to reach
    its saturated amplitude and sit there for the whole second half.
    """
    if sim is None:
        sim = SimConfig(noise_seed=7, duration=700.0 / point.circuit.f0)
    amplifier = PierceConfig(
        c1=point.inputs.c1, c2=point.inputs.c2, c0=point.inputs.c0,
        gm=point.gm if gm is None else gm, f0=point.circuit.f0,
    )
    return simulate_startup(
        point.circuit, amplifier, sim, point.eta, x_max=x_max,
    )


@pytest.fixture(scope="session")
def startup_trace(design_points):
    """Unguarded design-1 startup, seed 7, 700 cycles. Reused widely."""
    return run_startup(design_points[1])
