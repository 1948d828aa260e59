"""Synthetic trajectory corpora with closed-form ground truth.

Four families span trivially learnable to multi-modal motion:

* ``constant-velocity``      straight lines (a linear extrapolator is exact)
* ``constant-turn-rate``     circular arcs of radius speed / turn_rate
* ``sinusoidal-lane-change`` straight motion plus a lateral sinusoid
* ``piecewise-goal``         straight motion until a latent branch step,
                             then one of several goal headings

Each track follows its closed form exactly; optional process noise is off
unless requested. Generation is deterministic per (seed, agent index), so
growing the agent count never reshuffles earlier agents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Scene, Trajectory, TrajectorySample, Waypoint
from .rng import stream

__all__ = [
    "SynthSpec",
    "FAMILIES",
    "generate",
    "linear_extrapolation_oracle",
    "constant_velocity_track",
    "constant_turn_track",
    "sinusoidal_track",
    "piecewise_goal_track",
]

FAMILIES = (
    "constant-velocity",
    "constant-turn-rate",
    "sinusoidal-lane-change",
    "piecewise-goal",
)


@dataclass
class SynthSpec:
    family: str = "constant-velocity"
    agents: int = 32
    steps: int = 30
    dt: float = 0.4
    speed_range: tuple[float, float] = (0.5, 1.5)
    turn_rate_range: tuple[float, float] = (0.2, 1.2)
    amplitude_range: tuple[float, float] = (0.3, 1.5)
    period_range: tuple[float, float] = (3.2, 9.6)
    goal_count: int = 3
    noise_std: float = 0.0
    start_box: float = 10.0
    seed: int = 0
    scene_id: str | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.agents <= 0 or self.steps <= 0:
            raise ValueError("agents and steps must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for name in ("speed_range", "turn_rate_range", "amplitude_range", "period_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} is empty: ({lo}, {hi})")
        if self.goal_count < 2:
            raise ValueError("goal_count must be >= 2")


def constant_velocity_track(start, velocity, steps: int, dt: float) -> np.ndarray:
    t = np.arange(steps, dtype=np.float64) * dt
    return np.asarray(start, dtype=np.float64) + np.outer(t, np.asarray(velocity, dtype=np.float64))


def constant_turn_track(start, speed, heading, turn_rate, steps: int, dt: float) -> np.ndarray:
    """Arc of radius speed/turn_rate; turn_rate in rad/s, nonzero."""
    if turn_rate == 0.0:
        raise ValueError("turn_rate must be nonzero; use constant-velocity instead")
    t = np.arange(steps, dtype=np.float64) * dt
    r = speed / turn_rate
    ang = heading + turn_rate * t
    x = start[0] + r * (np.sin(ang) - math.sin(heading))
    y = start[1] - r * (np.cos(ang) - math.cos(heading))
    return np.stack([x, y], axis=1)


def sinusoidal_track(start, speed, heading, amplitude, period, steps: int, dt: float) -> np.ndarray:
    """Straight motion along the heading with a lateral sinusoidal sway."""
    t = np.arange(steps, dtype=np.float64) * dt
    u = np.array([math.cos(heading), math.sin(heading)])
    n = np.array([-math.sin(heading), math.cos(heading)])
    along = np.outer(speed * t, u)
    across = np.outer(amplitude * np.sin(2.0 * math.pi * t / period), n)
    return np.asarray(start, dtype=np.float64) + along + across


def piecewise_goal_track(
    start, speed, heading, branch_step: int, goal_heading, steps: int, dt: float
) -> np.ndarray:
    """Constant velocity until branch_step, then constant velocity toward the goal heading."""
    t = np.arange(steps, dtype=np.float64) * dt
    u0 = np.array([math.cos(heading), math.sin(heading)])
    u1 = np.array([math.cos(goal_heading), math.sin(goal_heading)])
    t_b = branch_step * dt
    pre = np.outer(np.minimum(t, t_b), u0)
    post = np.outer(np.maximum(t - t_b, 0.0), u1)
    return np.asarray(start, dtype=np.float64) + speed * (pre + post)


def _goal_offsets(count: int) -> np.ndarray:
    return np.linspace(-math.pi / 3.0, math.pi / 3.0, count)


def generate(spec: SynthSpec) -> Scene:
    """Deterministically generate a Scene following the spec's family."""
    trajectories = []
    for agent in range(spec.agents):
        rng = stream(spec.seed, "synth", spec.family, agent)
        start = rng.uniform(-spec.start_box, spec.start_box, size=2)
        heading = rng.uniform(0.0, 2.0 * math.pi)
        speed = rng.uniform(*spec.speed_range)
        if spec.family == "constant-velocity":
            velocity = speed * np.array([math.cos(heading), math.sin(heading)])
            track = constant_velocity_track(start, velocity, spec.steps, spec.dt)
        elif spec.family == "constant-turn-rate":
            rate = rng.uniform(*spec.turn_rate_range) * (1.0 if rng.uniform() < 0.5 else -1.0)
            track = constant_turn_track(start, speed, heading, rate, spec.steps, spec.dt)
        elif spec.family == "sinusoidal-lane-change":
            amplitude = rng.uniform(*spec.amplitude_range)
            period = rng.uniform(*spec.period_range)
            track = sinusoidal_track(start, speed, heading, amplitude, period, spec.steps, spec.dt)
        else:  # piecewise-goal
            branch = int(rng.integers(spec.steps // 3, 2 * spec.steps // 3 + 1))
            goal = heading + _goal_offsets(spec.goal_count)[int(rng.integers(spec.goal_count))]
            track = piecewise_goal_track(start, speed, heading, branch, goal, spec.steps, spec.dt)
        if spec.noise_std > 0.0:
            track = track + spec.noise_std * rng.standard_normal(track.shape)
        trajectories.append(
            Trajectory(
                agent_id=agent,
                frames=list(range(spec.steps)),
                waypoints=[Waypoint(float(x), float(y)) for x, y in track],
            )
        )
    return Scene(
        scene_id=spec.scene_id or spec.family,
        frame_interval_seconds=spec.dt,
        trajectories=trajectories,
    )


def linear_extrapolation_oracle(sample: TrajectorySample) -> list[Waypoint]:
    """Extend the last observed displacement for len(sample.future) steps."""
    if len(sample.observed) < 2:
        raise ValueError("need at least two observed waypoints")
    last, prev = sample.observed[-1], sample.observed[-2]
    dx, dy = last.x - prev.x, last.y - prev.y
    return [
        Waypoint(last.x + k * dx, last.y + k * dy)
        for k in range(1, len(sample.future) + 1)
    ]
