import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import click
import numpy as np

from pendulum_control.control_framework.core.dynamics import Trajectory
from pendulum_control.control_framework.core.errors import (
    ConfigError,
    DivergenceError,
    ExitStatus,
    PendulumControlError,
    RangeError,
)
from pendulum_control.control_framework.harness.closed_loop import RunSummary, run_lqr_noise_sim
from pendulum_control.control_framework.harness.comparison import compare
from pendulum_control.control_framework.harness.resample import RANGE_TOLERANCE, resample_cubic
from pendulum_control.control_framework.harness.trajectory_gen import generate_trajectory
from pendulum_control.control_framework.harness.virtual_plant import run_virtual_plant
from pendulum_control.control_framework.linear.linearization import linearize
from pendulum_control.control_framework.linear.report import stability_report
from pendulum_control.control_framework.linear.riccati import CostMatrices, lqr_gain
from pendulum_control.control_framework.linear.stability import eigenvalues_2x2, time_constant
from pendulum_control.control_framework.sysid.logs import read_log, write_log
from pendulum_control.control_framework.sysid.regression import (
    RegressionKind,
    average_trials,
    regress_gravity,
    regress_inertia_damping,
)
from pendulum_control.control_framework.sysid.segments import extract_static_segments
from pendulum_control.control_framework.sysid.synthetic import (
    synthesize_horizontal_log,
    synthesize_static_hold_log,
)
from pendulum_control.control_framework.utils.csv_io import (
    read_trajectory,
    write_command_trajectory,
    write_stability_report,
    write_text,
    write_trajectory,
)
from pendulum_control.launch_control.config.run_config import (
    RunConfig,
    load_run_config,
    parse_angle,
    parse_assignments,
)
from pendulum_control.launch_control.config.settings import (
    COMMAND_RATE,
    COST_PROFILES_DIR,
    DEFAULT_COST_PROFILE,
    LOG_FORMAT,
    PEAK_VELOCITY,
    POSITION_INCREMENT,
    STATIC_MIN_DURATION,
    STATIC_VELOCITY_THRESHOLD,
    SYNTH_EFFORT_NOISE_STD,
    SYNTH_TRIALS,
)

logger = logging.getLogger(__name__)


class PendulumControlGroup(click.Group):
    """Maps toolkit errors to their exit status and click usage errors to status 1."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = int(ExitStatus.USAGE)
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = int(ExitStatus.USAGE)
            raise
        except PendulumControlError as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(int(e.exit_status))


@dataclass
class CliState:
    config_path: Optional[str]
    out_path: Optional[str]
    seed: Optional[int]
    assignments: Sequence[str]

    def run_config(self) -> RunConfig:
        overrides = parse_assignments(list(self.assignments))
        if self.seed is not None:
            overrides["seed"] = self.seed
        return load_run_config(self.config_path, overrides)

    def require_out(self) -> Path:
        if self.out_path is None:
            raise click.UsageError("this command needs --out PATH")
        return Path(self.out_path)


def _close_handlers(handlers: List[logging.Handler]):
    root = logging.getLogger()
    for handler in handlers:
        root.removeHandler(handler)
        handler.close()


def _echo_header(cfg: RunConfig):
    _echo_header_lines(cfg.header_lines())


def _echo_header_lines(lines: List[str]):
    for line in lines:
        click.echo(line)


def _option_lines(options: Dict[str, object]) -> List[str]:
    """Options a command ran with, in the same '# key = value' form as the config header."""
    return [f"# {key} = {value!r}" for key, value in options.items()]


def _echo_pairs(pairs: Dict[str, object]):
    for key, value in pairs.items():
        click.echo(f"{key} = {value}")


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.6f}{z.imag:+.6f}j"


def _numbered(path: Path, tag: str, n: int) -> Path:
    return path.with_name(f"{path.stem}_{tag}{n}{path.suffix}")


@click.group(cls=PendulumControlGroup)
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
              help='Flat key = value configuration file')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='Output file')
@click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), help='Noise seed (unsigned 64-bit)')
@click.option('--set', 'assignments', multiple=True, metavar='KEY=VALUE',
              help='Override one configuration key; may be repeated')
@click.option('--debug', is_flag=True, default=False, help='Enable debug logging')
@click.option('--log-file', type=click.Path(dir_okay=False), help='Also write the log to this file')
@click.pass_context
def cli(ctx, config_path, out_path, seed, assignments, debug, log_file):
    """
    Pendulum Control CLI

    Identify pendulum constants from actuator logs, design an LQR regulator for the upright
    position, simulate it under torque noise and compare against a virtual plant.
    """
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    ctx.call_on_close(lambda: _close_handlers(handlers))
    ctx.obj = CliState(config_path=config_path, out_path=out_path, seed=seed, assignments=assignments)


@cli.command()
@click.argument('kind', type=click.Choice([k.value for k in RegressionKind]))
@click.argument('log_paths', nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option('--intercept', is_flag=True, default=False, help='Fit an intercept term as well')
@click.option('--velocity-threshold', type=float, default=STATIC_VELOCITY_THRESHOLD, show_default=True,
              help='Static-hold velocity threshold (rad/s), gravity only')
@click.option('--min-duration', type=float, default=STATIC_MIN_DURATION, show_default=True,
              help='Minimum static-hold duration (s), gravity only')
@click.pass_obj
def identify(state: CliState, kind, log_paths, intercept, velocity_threshold, min_duration):
    """Fit pendulum constants from one or more actuator logs and average the trials."""
    if not log_paths:
        raise click.UsageError("at least one log file is required")
    kind = RegressionKind(kind)
    _echo_header_lines(_option_lines({
        "kind": kind.value,
        "logs": list(log_paths),
        "intercept": intercept,
        "velocity_threshold": velocity_threshold,
        "min_duration": min_duration,
    }))

    results = []
    for path in log_paths:
        try:
            records = read_log(path)
            if kind is RegressionKind.INERTIA_DAMPING:
                result = regress_inertia_damping(records, intercept=intercept, source=path)
            else:
                segments = extract_static_segments(records, velocity_threshold, min_duration)
                result = regress_gravity(segments, intercept=intercept, source=path)
        except PendulumControlError as e:
            click.echo(f"Error: {path}: {e}", err=True)
            click.get_current_context().exit(int(e.exit_status))
        click.echo(f"## {path}")
        click.echo(json.dumps(result.to_report(), indent=2))
        results.append(result)

    fragment = average_trials(results, kind)
    constants = {n: getattr(fragment, n) for n in ("m_c", "b_c", "g_c") if getattr(fragment, n) is not None}
    click.echo(f"## averaged over {len(results)} trial(s)")
    _echo_pairs({name: repr(value) for name, value in constants.items()})

    if state.out_path:
        lines = [f"# {kind.value} constants averaged over {len(results)} trial(s)"]
        lines += [f"{name} = {value!r}" for name, value in constants.items()]
        write_text(state.out_path, "\n".join(lines) + "\n")


def load_cost_profile(profile_name: str):
    """
    Read a cost profile (list of diagonal cost combinations) from the cost_profiles directory.
    """
    profile_path = COST_PROFILES_DIR / f"{profile_name}.json"
    if not profile_path.is_file():
        available = sorted(p.stem for p in COST_PROFILES_DIR.glob("*.json"))
        raise ConfigError(f"Profile '{profile_name}' does not exist (available: {', '.join(available)})")
    try:
        data = json.loads(profile_path.read_text())
        combos = [
            CostMatrices.diagonal(c["q11"], c["q22"], c["r11"], label=str(c["label"]))
            for c in data["combinations"]
        ]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise ConfigError(f"Profile '{profile_name}' is malformed: {e}") from e
    return data.get("open_loop_label", "0"), combos


@cli.command()
@click.option('--table', is_flag=True, default=False, help='Emit the eigenvalue table for a cost profile')
@click.option('--profile', default=DEFAULT_COST_PROFILE, show_default=True, help='Cost profile for --table')
@click.pass_obj
def design(state: CliState, table, profile):
    """Linearize at the setpoint and design the LQR gain."""
    cfg = state.run_config()
    _echo_header(cfg)
    cost = cfg.cost()
    ss = linearize(cfg.params, cfg.setpoint)
    open_loop = eigenvalues_2x2(ss.a)
    solution = lqr_gain(ss, cost)

    _echo_pairs({
        "A": ss.a.tolist(),
        "B": ss.b.ravel().tolist(),
        "open_loop_eigenvalues": ", ".join(_fmt_complex(z) for z in open_loop),
        "K": solution.k.ravel().tolist(),
        "closed_loop_eigenvalues": ", ".join(_fmt_complex(z) for z in solution.closed_loop_eigs),
        "time_constant": repr(time_constant(solution.closed_loop_eigs)),
        "care_residual": f"{solution.residual:.3e}",
        "iterations": solution.iterations,
    })

    if table:
        open_loop_label, combos = load_cost_profile(profile)
        text = write_stability_report(stability_report(ss, combos, open_loop_label))
        if state.out_path:
            write_text(state.out_path, text)
        else:
            click.echo(text, nl=False)


@dataclass
class SeedOutcome:
    seed: int
    trajectory: Optional[Trajectory]
    partial: Optional[Trajectory] = None
    error: Optional[str] = None
    exit_status: int = int(ExitStatus.SUCCESS)


def _simulate_seed(cfg: RunConfig, mode: str, k: List[float], seed: int) -> SeedOutcome:
    """One independent run; errors are returned rather than raised so they cross process boundaries."""
    noise = cfg.noise(seed)
    try:
        if mode == "plant":
            traj = run_virtual_plant(cfg.plant_config(), k, noise, cfg.duration, cfg.setpoint)
        else:
            traj = run_lqr_noise_sim(cfg.params, k, noise, cfg.dt, cfg.duration, cfg.setpoint)
    except DivergenceError as e:
        return SeedOutcome(seed, None, partial=e.partial, error=str(e), exit_status=int(e.exit_status))
    except PendulumControlError as e:
        return SeedOutcome(seed, None, error=str(e), exit_status=int(e.exit_status))
    return SeedOutcome(seed, traj)


def _parse_seeds(text: str) -> List[int]:
    try:
        seeds = [int(s.strip(), 0) for s in text.split(",") if s.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}", param_hint="--seeds")
    if not seeds:
        raise click.BadParameter("no seeds given", param_hint="--seeds")
    return seeds


@cli.command()
@click.option('--mode', type=click.Choice(['ideal', 'plant']), default='ideal', show_default=True,
              help='ideal model at dt, or the virtual plant at control_rate')
@click.option('--seeds', help='Comma-separated seeds to run concurrently, one output file each')
@click.pass_obj
def simulate(state: CliState, mode, seeds):
    """Run the LQR regulator under torque noise and write the trajectory CSV."""
    out = state.require_out()
    cfg = state.run_config()
    _echo_header(cfg)
    solution = lqr_gain(linearize(cfg.params, cfg.setpoint), cfg.cost())
    k = solution.k.ravel().tolist()

    if seeds:
        seed_list = _parse_seeds(seeds)
        targets = [_numbered(out, "seed", s) for s in seed_list]
        workers = min(len(seed_list), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_simulate_seed, [cfg] * len(seed_list), [mode] * len(seed_list),
                                     [k] * len(seed_list), seed_list))
    else:
        targets = [out]
        outcomes = [_simulate_seed(cfg, mode, k, cfg.seed)]

    failed = None
    for target, outcome in zip(targets, outcomes):
        click.echo(f"## seed {outcome.seed} -> {target}")
        if outcome.error is not None:
            if outcome.partial is not None:
                partial_path = target.with_name(target.name + ".partial")
                write_text(partial_path, write_trajectory(outcome.partial))
                logger.warning(f"Seed {outcome.seed} diverged; partial trajectory written to {partial_path}")
            failed = failed or outcome
            continue
        write_text(target, write_trajectory(outcome.trajectory))
        summary = RunSummary.of(outcome.trajectory, cfg.setpoint)
        _echo_pairs({
            "samples": summary.samples,
            "max_abs_u_control": repr(summary.max_abs_u_control),
            "max_abs_theta_error": repr(summary.max_abs_deviation),
            "final_theta": repr(summary.final_theta),
        })

    if failed is not None:
        click.echo(f"Error: seed {failed.seed}: {failed.error}", err=True)
        click.get_current_context().exit(failed.exit_status)


@cli.command(name='compare')
@click.argument('sim_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('plant_path', type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def compare_cmd(state: CliState, sim_path, plant_path):
    """Resample the plant trajectory onto the simulation timestamps and report the differences."""
    header = _option_lines({"sim": sim_path, "plant": plant_path, "range_tolerance": RANGE_TOLERANCE})
    _echo_header_lines(header)
    sim = read_trajectory(sim_path)
    plant = read_trajectory(plant_path)

    lo = int(np.searchsorted(sim.t, plant.t[0] - RANGE_TOLERANCE, side="left"))
    hi = int(np.searchsorted(sim.t, plant.t[-1] + RANGE_TOLERANCE, side="right"))
    if hi <= lo:
        raise RangeError(f"{sim_path} and {plant_path} do not overlap in time")
    sim = sim.window(lo, hi)
    stats = compare(sim, resample_cubic(plant, sim.t))

    report = stats.to_report()
    click.echo(report, nl=False)
    if state.out_path:
        write_text(state.out_path, "\n".join(header) + "\n" + report)


@cli.command()
@click.option('--start', default='0', show_default=True, help="Start angle (rad, or e.g. '-10deg')")
@click.option('--end', required=True, help="End angle (rad, or e.g. '10deg')")
@click.option('--increment', type=float, default=POSITION_INCREMENT, show_default=True,
              help='Position increment per sample (rad)')
@click.option('--peak-velocity', type=float, default=PEAK_VELOCITY, show_default=True,
              help='Peak of the half-sine velocity command (rad/s)')
@click.option('--rate', type=float, default=COMMAND_RATE, show_default=True, help='Sample rate (Hz)')
@click.pass_obj
def trajgen(state: CliState, start, end, increment, peak_velocity, rate):
    """Write a commanded position ramp with a half-sine velocity profile."""
    out = state.require_out()
    options = {
        "start": parse_angle(start),
        "end": parse_angle(end),
        "pos_increment": increment,
        "peak_velocity": peak_velocity,
        "rate": rate,
    }
    _echo_header_lines(_option_lines(options))
    cmd = generate_trajectory(**options)
    write_text(out, write_command_trajectory(cmd))
    _echo_pairs({
        "samples": len(cmd),
        "final_position": repr(float(cmd.position_cmd[-1])),
        "max_abs_velocity": repr(float(np.max(np.abs(cmd.velocity_cmd)))),
    })


@cli.command(name='synth-logs')
@click.argument('kind', type=click.Choice(['horizontal', 'gravity']))
@click.option('--trials', type=click.IntRange(min=1), default=SYNTH_TRIALS, show_default=True)
@click.option('--effort-noise', type=click.FloatRange(min=0.0), default=SYNTH_EFFORT_NOISE_STD,
              show_default=True, help='Standard deviation of effort feedback noise (N m)')
@click.option('--hysteresis', type=click.FloatRange(min=0.0), default=0.0, show_default=True,
              help='Direction-dependent effort offset while holding (N m), gravity only')
@click.pass_obj
def synth_logs(state: CliState, kind, trials, effort_noise, hysteresis):
    """Write synthetic actuator logs from the configured constants, one file per trial."""
    out = state.require_out()
    cfg = state.run_config()
    _echo_header(cfg)
    for trial in range(1, trials + 1):
        if kind == "horizontal":
            records = synthesize_horizontal_log(cfg.params, effort_noise_std=effort_noise,
                                                seed=cfg.seed, trial=trial)
        else:
            records = synthesize_static_hold_log(cfg.params, hysteresis_offset=hysteresis,
                                                 effort_noise_std=effort_noise, seed=cfg.seed, trial=trial)
        path = _numbered(out, "trial", trial)
        write_text(path, write_log(records))
        click.echo(f"## trial {trial} -> {path} ({len(records)} records)")
