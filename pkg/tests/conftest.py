from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings as hyp_settings

from secuav.scenario import EveRegion, Scenario, Trajectory

hyp_settings.register_profile("det", derandomize=True)
hyp_settings.load_profile("det")

REPO_ROOT = Path(__file__).resolve().parent.parent
BENCHMARK_SCENARIO = REPO_ROOT / "scenarios" / "paper_fig2.json"

P_BAR_NEG5_DBM = 10.0 ** -3.5  # -5 dBm in watts


def make_scenario(**overrides) -> Scenario:
    """Small, fully-valid instance; fields can be overridden per test."""
    fields = dict(
        altitude=20.0,
        flight_duration=4.0,
        slot_len=0.5,
        n_slots=8,
        v_max=10.0,
        start_xy=(-15.0, -10.0),
        end_xy=(15.0, -10.0),
        avg_power=1e-3,
        peak_power=4e-3,
        gamma0=1e6,
        eves=(EveRegion(-10.0, 4.0, 2.0), EveRegion(10.0, 4.0, 3.0)),
        epsilon=1e-4,
        max_iters=50,
    )
    fields.update(overrides)
    return Scenario(**fields)


def benchmark_fields(flight_duration=160.0) -> dict:
    n = int(round(flight_duration / 0.5))
    return dict(
        altitude=100.0,
        flight_duration=flight_duration,
        slot_len=0.5,
        n_slots=n,
        v_max=10.0,
        start_xy=(-400.0, -200.0),
        end_xy=(400.0, -200.0),
        avg_power=P_BAR_NEG5_DBM,
        peak_power=4.0 * P_BAR_NEG5_DBM,
        gamma0=1e8,
        eves=(EveRegion(-200.0, 0.0, 20.0), EveRegion(200.0, 0.0, 80.0)),
        epsilon=1e-4,
        max_iters=200,
    )


@pytest.fixture()
def tiny_scenario() -> Scenario:
    return make_scenario()


def straight_line_trajectory(scenario: Scenario) -> Trajectory:
    n = scenario.n_slots
    f = np.linspace(0.0, 1.0, n + 2)
    xs = scenario.start_xy[0] + f * (scenario.end_xy[0] - scenario.start_xy[0])
    ys = scenario.start_xy[1] + f * (scenario.end_xy[1] - scenario.start_xy[1])
    return Trajectory(xs=xs, ys=ys)


def hover_trajectory(scenario: Scenario, xy=(0.0, 0.0)) -> Trajectory:
    """All in-flight slots at one point; valid only if pins are within reach."""
    n = scenario.n_slots
    xs = np.full(n + 2, float(xy[0]))
    ys = np.full(n + 2, float(xy[1]))
    xs[0], ys[0] = scenario.start_xy
    xs[-1], ys[-1] = scenario.end_xy
    return Trajectory(xs=xs, ys=ys)
