import math

import numpy as np
import pytest

from pendulum_control.control_framework.core.dynamics import State, Trajectory
from pendulum_control.control_framework.core.errors import (
    AlignmentError,
    ConfigError,
    DivergenceError,
    DomainError,
    InsufficientDataError,
    PreconditionError,
    RangeError,
)
from pendulum_control.control_framework.harness.closed_loop import RunSummary, run_lqr_noise_sim
from pendulum_control.control_framework.harness.comparison import compare
from pendulum_control.control_framework.harness.noise import (
    NoiseConfig,
    NoiseStream,
    SplitMix64,
    Xoshiro256StarStar,
    derive_seed,
    uniform_noise,
    zero_noise,
)
from pendulum_control.control_framework.harness.resample import resample_cubic
from pendulum_control.control_framework.harness.trajectory_gen import (
    generate_trajectory,
    static_hold_schedule,
)
from pendulum_control.control_framework.harness.virtual_plant import (
    Perturbation,
    PlantConfig,
    run_virtual_plant,
)

from conftest import UPRIGHT

DEFAULT_NOISE = NoiseConfig(lo=-2.5, hi=2.5, seed=0)


def _curve(t, theta):
    zeros = np.zeros_like(t)
    return Trajectory(t=t, theta=theta, omega=zeros, u_control=zeros, u_noise=zeros, dt=float(t[1] - t[0]))


# noise

def test_splitmix_reference_value():
    assert SplitMix64(0).next() == 0xE220A8397B1DCDAF


def test_degenerate_interval_is_constant():
    assert uniform_noise(NoiseConfig(lo=1.5, hi=1.5, seed=3), 10) == [1.5] * 10
    assert set(uniform_noise(zero_noise(9), 5)) == {0.0}


def test_uniform_noise_statistics():
    draws = np.array(uniform_noise(DEFAULT_NOISE, 100_000))
    assert draws.min() >= -2.5 and draws.max() <= 2.5
    assert abs(draws.mean()) <= 0.03
    assert draws.var() == pytest.approx(25.0 / 12.0, rel=0.05)


def test_noise_is_deterministic_per_seed():
    assert uniform_noise(DEFAULT_NOISE, 50) == uniform_noise(DEFAULT_NOISE, 50)
    assert uniform_noise(DEFAULT_NOISE, 50) != uniform_noise(NoiseConfig(-2.5, 2.5, seed=1), 50)
    stream = NoiseStream(DEFAULT_NOISE)
    assert [stream.draw() for _ in range(20)] == uniform_noise(DEFAULT_NOISE, 20)


def test_split_streams_are_independent():
    assert derive_seed(42, 1) != derive_seed(42, 2)
    assert derive_seed(42, 1) == derive_seed(42, 1)
    a, b = Xoshiro256StarStar(derive_seed(42, 1)), Xoshiro256StarStar(derive_seed(42, 2))
    assert [a.next() for _ in range(5)] != [b.next() for _ in range(5)]


def test_noise_config_validation():
    with pytest.raises(ConfigError):
        NoiseConfig(lo=1.0, hi=-1.0)
    with pytest.raises(ConfigError):
        NoiseConfig(lo=0.0, hi=1.0, seed=-1)
    with pytest.raises(ConfigError):
        uniform_noise(DEFAULT_NOISE, -1)
    assert uniform_noise(DEFAULT_NOISE, 0) == []


# command trajectories

def test_trajectory_to_same_position():
    cmd = generate_trajectory(0.3, 0.3)
    assert len(cmd) == 1
    assert cmd.position_cmd[0] == 0.3
    assert cmd.velocity_cmd[0] == 0.0


def test_ten_degree_ramp():
    end = math.radians(10.0)
    cmd = generate_trajectory(0.0, end)
    assert len(cmd) == 89
    assert cmd.position_cmd[-1] == end
    assert np.all(np.diff(cmd.position_cmd) > 0)
    assert np.max(np.abs(np.diff(cmd.position_cmd))) <= 0.002 + 1e-15
    assert np.max(cmd.velocity_cmd) == pytest.approx(0.3)
    assert cmd.velocity_cmd[0] == cmd.velocity_cmd[-1] == 0.0
    assert cmd.t[1] == pytest.approx(0.01)


def test_ramp_down_has_negative_velocity():
    cmd = generate_trajectory(math.radians(10.0), 0.0)
    assert cmd.position_cmd[-1] == 0.0
    assert np.all(cmd.velocity_cmd <= 0.0)


def test_trajectory_rejects_bad_arguments():
    with pytest.raises(DomainError):
        generate_trajectory(0.0, 1.0, pos_increment=0.0)
    with pytest.raises(DomainError):
        generate_trajectory(0.0, 1.0, rate=-100.0)


def test_static_hold_schedule():
    schedule = static_hold_schedule()
    assert len(schedule) == 37
    assert schedule[9] == pytest.approx(math.pi / 2)
    assert schedule[27] == pytest.approx(-math.pi / 2)
    assert math.copysign(1.0, schedule[-1]) == 1.0
    assert schedule[0] == schedule[-1] == 0.0


# closed loop

def test_regulation_without_noise_stays_at_setpoint(pendulum, upright_gain):
    traj = run_lqr_noise_sim(pendulum, upright_gain, zero_noise(), 0.002, 1.0, UPRIGHT)
    assert len(traj) == 501
    np.testing.assert_allclose(traj.theta, math.pi, atol=1e-9)
    np.testing.assert_allclose(traj.u_control, 0.0, atol=1e-9)
    assert np.all(traj.u_noise == 0.0)


def test_regulation_under_default_noise(pendulum, upright_gain):
    for seed in range(20):
        noise = NoiseConfig(lo=-2.5, hi=2.5, seed=seed)
        traj = run_lqr_noise_sim(pendulum, upright_gain, noise, 0.002, 5.0, UPRIGHT)
        assert len(traj) == 2501
        settled = traj.t >= 1.0
        assert np.max(np.abs(traj.theta[settled] - math.pi)) <= 0.05
        assert np.max(np.abs(traj.u_control)) <= 0.5
        np.testing.assert_array_equal(traj.u_noise, uniform_noise(noise, 2501))


def test_regulation_is_deterministic(pendulum, upright_gain):
    a = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 1.0, UPRIGHT)
    b = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 1.0, UPRIGHT)
    for name in ("t",) + Trajectory.channels:
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_run_summary(pendulum, upright_gain):
    traj = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 1.0, UPRIGHT)
    summary = RunSummary.of(traj, UPRIGHT)
    assert summary.samples == 501
    assert summary.max_abs_u_control == np.max(np.abs(traj.u_control))
    assert summary.final_theta == pytest.approx(math.pi, abs=0.05)


def test_run_summary_wraps_final_angle(pendulum, upright_gain):
    # the same regulation three turns further round
    setpoint = State(UPRIGHT.theta + 6 * math.pi, 0.0)
    traj = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 1.0, setpoint)
    summary = RunSummary.of(traj, setpoint)
    assert 0.0 <= summary.final_theta < 2 * math.pi
    assert summary.final_theta == pytest.approx(math.pi, abs=0.05)


def test_divergence_keeps_partial_trajectory(pendulum):
    # positive feedback pushes the pendulum off the top
    with pytest.raises(DivergenceError) as info:
        run_lqr_noise_sim(pendulum, [-50.0, 0.0], zero_noise(), 0.002, 5.0, UPRIGHT, s0=State(math.pi + 0.01, 0.0))
    partial = info.value.partial
    assert len(partial) == info.value.step + 1
    assert abs(partial.theta[-1] - math.pi) > math.pi / 2
    assert np.all(np.abs(partial.theta[:-1] - math.pi) <= math.pi / 2)


def test_regulation_requires_a_fixed_point(pendulum, upright_gain):
    with pytest.raises(PreconditionError):
        run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 1.0, State(1.0, 0.0))
    with pytest.raises(DomainError):
        run_lqr_noise_sim(pendulum, [1.0], DEFAULT_NOISE, 0.002, 1.0, UPRIGHT)


# virtual plant

def test_plant_at_physics_rate_reproduces_simulation(pendulum, upright_gain):
    sim = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 5.0, UPRIGHT)
    plant = run_virtual_plant(PlantConfig(pendulum, control_rate=500.0), upright_gain, DEFAULT_NOISE, 5.0, UPRIGHT)
    for name in ("t",) + Trajectory.channels:
        np.testing.assert_array_equal(getattr(sim, name), getattr(plant, name))
    assert plant.source == "virtual-plant"


def test_plant_records_once_per_control_period(pendulum, upright_gain):
    traj = run_virtual_plant(PlantConfig(pendulum), upright_gain, DEFAULT_NOISE, 5.0, UPRIGHT)
    assert len(traj) == 501
    assert traj.t[1] == pytest.approx(0.01)
    assert traj.t[-1] == pytest.approx(5.0)


def test_plant_quantizes_angle(pendulum, upright_gain):
    cfg = PlantConfig(pendulum, sensor_quantization=0.001)
    traj = run_virtual_plant(cfg, upright_gain, DEFAULT_NOISE, 1.0, UPRIGHT)
    steps = traj.theta / 0.001
    np.testing.assert_allclose(steps, np.round(steps), atol=1e-6)


def test_plant_hysteresis_changes_response(pendulum, upright_gain):
    base = run_virtual_plant(PlantConfig(pendulum), upright_gain, DEFAULT_NOISE, 1.0, UPRIGHT)
    lossy = run_virtual_plant(
        PlantConfig(pendulum, effort_hysteresis_offset=0.2), upright_gain, DEFAULT_NOISE, 1.0, UPRIGHT,
    )
    np.testing.assert_array_equal(base.u_noise, lossy.u_noise)
    assert not np.array_equal(base.theta, lossy.theta)


def test_plant_config_validation(pendulum):
    with pytest.raises(ConfigError):
        PlantConfig(pendulum, control_rate=300.0)
    with pytest.raises(ConfigError):
        PlantConfig(pendulum, sensor_quantization=-0.1)
    with pytest.raises(ConfigError):
        Perturbation(m_c=-1.0)
    cfg = PlantConfig(pendulum, param_perturbation=Perturbation(m_c=0.05))
    assert cfg.substeps == 5
    assert cfg.effective_params.m_c == pytest.approx(0.05775)


# resampling

def test_resample_at_knots_returns_knots():
    t = np.arange(0.0, 1.0, 0.01)
    traj = _curve(t, np.sin(5 * t))
    out = resample_cubic(traj, t)
    assert np.max(np.abs(out.theta - traj.theta)) <= 1e-12


def test_resample_reproduces_cubic_away_from_ends():
    t = np.arange(201) * 0.01
    traj = _curve(t, t ** 3 - 2 * t + 1)
    target = np.linspace(0.5, 1.5, 317)
    out = resample_cubic(traj, target)
    assert np.max(np.abs(out.theta - (target ** 3 - 2 * target + 1))) <= 1e-9


def test_resample_errors():
    t = np.arange(10) * 0.1
    traj = _curve(t, t)
    with pytest.raises(RangeError):
        resample_cubic(traj, [0.5, 1.5])
    with pytest.raises(InsufficientDataError):
        resample_cubic(traj.head(3), [0.1])


# comparison

def test_compare_identical_is_zero(pendulum, upright_gain):
    traj = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 1.0, UPRIGHT)
    stats = compare(traj, traj)
    assert (stats.mean_dpos, stats.std_dpos, stats.mean_dvel, stats.std_dvel) == (0.0, 0.0, 0.0, 0.0)
    assert stats.n == 501
    assert "mean_dpos = 0.0" in stats.to_report()


def test_compare_constant_offset():
    t = np.arange(50) * 0.01
    a = _curve(t, np.sin(t))
    b = _curve(t, np.sin(t) + 0.01)
    stats = compare(a, b)
    assert stats.mean_dpos == pytest.approx(-0.01)
    assert stats.std_dpos == pytest.approx(0.0, abs=1e-12)


def test_compare_requires_alignment():
    t = np.arange(50) * 0.01
    with pytest.raises(AlignmentError):
        compare(_curve(t, t), _curve(t[:40], t[:40]))
    with pytest.raises(AlignmentError):
        compare(_curve(t, t), _curve(t + 0.001, t))


# simulation against virtual plant

def test_matched_plant_shows_no_mismatch(pendulum, upright_gain):
    sim = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 5.0, UPRIGHT)
    plant = run_virtual_plant(PlantConfig(pendulum, control_rate=500.0), upright_gain, DEFAULT_NOISE, 5.0, UPRIGHT)
    stats = compare(sim, resample_cubic(plant, sim.t))
    for value in (stats.mean_dpos, stats.std_dpos, stats.mean_dvel, stats.std_dvel):
        assert abs(value) <= 1e-9


def test_perturbed_plant_shows_mismatch(pendulum, upright_gain):
    sim = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 5.0, UPRIGHT)
    cfg = PlantConfig(pendulum, control_rate=500.0, param_perturbation=Perturbation(m_c=0.05))
    plant = run_virtual_plant(cfg, upright_gain, DEFAULT_NOISE, 5.0, UPRIGHT)
    stats = compare(sim, resample_cubic(plant, sim.t))
    assert stats.std_dpos > 0
    assert stats.std_dvel > 0


def test_slower_plant_compares_after_resampling(pendulum, upright_gain):
    sim = run_lqr_noise_sim(pendulum, upright_gain, DEFAULT_NOISE, 0.002, 5.0, UPRIGHT)
    plant = run_virtual_plant(PlantConfig(pendulum), upright_gain, DEFAULT_NOISE, 5.0, UPRIGHT)
    stats = compare(sim, resample_cubic(plant, sim.t))
    assert stats.n == 2501
    assert abs(stats.mean_dpos) <= 0.05
