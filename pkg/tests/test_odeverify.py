import math

import numpy as np
import pytest

from axisorbits.configuration import MassSystem, circular_config
from axisorbits.jacobi import jacobi_frequency
from axisorbits.loopspace import LoopZ
from axisorbits.optimizer import MinimizeOptions, minimize
from axisorbits.odeverify import (crossing_times, integrate, shooting_orbit,
                                  verify_periodicity)
from axisorbits.rk4 import rk4, rk4_step

from conftest import TWO_PI


def launch_speed(system, config, fraction):
    escape = math.sqrt(2 * sum(m / r for m, r in zip(system.masses, config.radii)))
    return fraction * escape


def test_rk4_exponential_order():
    errs = []
    for n in (10, 20, 40):
        y = rk4(lambda t, y: y, np.array([1.0]), 1.0 / n, n, store=False)
        errs.append(abs(float(np.ravel(y)[-1]) - math.e))
    assert 14 < errs[0] / errs[1] < 18 and 14 < errs[1] / errs[2] < 18


def test_rk4_step_time_dependent():
    # y' = t^3 is integrated exactly by a fourth-order rule
    y = rk4_step(lambda t, y: np.array([t**3]), 1.0, np.array([0.0]), 0.5)
    assert y[0] == pytest.approx((1.5**4 - 1.0) / 4, rel=1e-15)


def test_equilibrium_stays_put(equal_two):
    system, config = equal_two
    traj = integrate(system, config, 0.0, 0.0, system.period)
    assert np.all(traj.z == 0.0) and np.all(traj.v == 0.0)


@pytest.mark.parametrize("masses", [(0.5, 0.5), (1.0, 2.0, 3.0)])
def test_linearised_half_period(masses):
    system = MassSystem(masses)
    config = circular_config(system)
    omega = jacobi_frequency(system, config)
    v0 = 1e-4 * config.min_radius * omega
    traj = integrate(system, config, 0.0, v0, system.period, dt=system.period / 8192)
    crossings = crossing_times(traj)
    spacing = np.diff(np.concatenate([[0.0], crossings]))
    assert spacing == pytest.approx(math.pi / omega, rel=1e-3)


@pytest.mark.parametrize("masses", [(0.5, 0.5), (0.2, 0.3, 0.5)])
def test_energy_drift_per_period(masses):
    system = MassSystem(masses)
    config = circular_config(system)
    traj = integrate(system, config, 0.0, launch_speed(system, config, 0.6), system.period)
    assert traj.energy_drift < 1e-9


def test_step_halving_fourth_order(equal_two):
    # differences between dt and dt/2 runs shrink by 16, within a factor of 4
    system, config = equal_two
    v0 = launch_speed(system, config, 0.6)
    T = system.period
    runs = [integrate(system, config, 0.0, v0, T, dt=T / n) for n in (256, 512, 1024, 2048)]
    diffs = [max(abs(a.z[-1] - b.z[-1]), abs(a.v[-1] - b.v[-1])) for a, b in zip(runs, runs[1:])]
    for coarse, fine in zip(diffs, diffs[1:]):
        assert 4.0 <= coarse / fine <= 64.0


def test_time_reversal(equal_three):
    system, config = equal_three
    fwd = integrate(system, config, 0.1, 0.3, system.period)
    back = integrate(system, config, fwd.z[-1], -fwd.v[-1], system.period)
    assert back.z[-1] == pytest.approx(0.1, abs=1e-9)
    assert -back.v[-1] == pytest.approx(0.3, abs=1e-9)


def test_last_step_lands_on_span(equal_two):
    system, config = equal_two
    traj = integrate(system, config, 0.0, 0.1, 1.0, dt=0.3)
    assert traj.times[-1] == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        integrate(system, config, 0.0, 0.1, -1.0)


@pytest.mark.parametrize("masses", [(0.5, 0.5), (1.0, 2.0), (1 / 3, 1 / 3, 1 / 3)])
def test_shooting_orbit_is_periodic(masses):
    system = MassSystem(masses)
    config = circular_config(system)
    v0, half = shooting_orbit(system, config)
    assert half == pytest.approx(system.period / 2)
    traj = integrate(system, config, 0.0, v0, system.period)
    assert abs(traj.z[-1]) < 1e-8 and abs(traj.v[-1] - v0) < 1e-8
    assert crossing_times(traj)[0] == pytest.approx(half, rel=1e-7)


def test_periodicity_flags_non_solution(equal_two):
    system, config = equal_two
    loop = LoopZ(TWO_PI, "odd", 1, [0.3])
    check = verify_periodicity(loop, system, config)
    assert not check.passed and check.endpoint_gap > 1e-3
    assert check.to_dict()["pass"] is False


def test_zero_loop_gap_is_zero(equal_three):
    system, config = equal_three
    check = verify_periodicity(LoopZ.zero(TWO_PI, "odd", 8), system, config)
    assert check.endpoint_gap == 0.0 and check.passed


def test_trajectory_rows_for_export(equal_two):
    system, config = equal_two
    check = verify_periodicity(LoopZ.zero(TWO_PI, "odd", 8), system, config)
    rows = list(check.trajectory.rows())
    assert len(rows) == 4097 and len(rows[0]) == len(check.trajectory.CSV_HEADER)
    assert np.all(np.diff(check.trajectory.times) > 0.0)


@pytest.mark.parametrize("cls", ["anti-half", "odd"])
def test_gap_improves_with_truncation(cls):
    # below K = 4 the truncation does not resolve the orbit and the gap is O(1) noise
    system = MassSystem((0.5, 0.5))
    config = circular_config(system)
    gaps = [verify_periodicity(minimize(system, cls, MinimizeOptions(K=K)).loop,
                               system, config).endpoint_gap for K in (4, 8, 16, 32, 64)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-5
