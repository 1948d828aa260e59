"""Trajectory corpora: parsing, windowing into samples, normalization.

Canonical corpus format: UTF-8 text, one waypoint per line as four
whitespace-separated fields ``frame agent_id x y`` (frame and agent_id
integer-valued, x/y meters). Lines starting with ``#`` are comments; the
header comment ``# dt=<seconds>`` carries the sampling interval (default
0.4 s) and ``# scene=<id>`` an optional scene identifier. Frames are
densely indexed: consecutive waypoints of one agent are one frame apart,
and any larger jump is a gap that splits the trajectory into independent
runs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "Waypoint",
    "Trajectory",
    "Scene",
    "TrajectorySample",
    "ParseError",
    "parse_corpus",
    "serialize_corpus",
    "window",
    "normalize",
    "denormalize",
    "observed_array",
    "future_array",
]

DEFAULT_DT = 0.4


class ParseError(ValueError):
    """Malformed corpus line; carries the 1-based line number and text."""

    def __init__(self, line_no: int, text: str, reason: str):
        super().__init__(f"line {line_no}: {reason}: {text!r}")
        self.line_no = line_no
        self.text = text
        self.reason = reason


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float


@dataclass
class Trajectory:
    agent_id: int
    frames: list[int]
    waypoints: list[Waypoint]

    def __post_init__(self) -> None:
        if len(self.frames) != len(self.waypoints):
            raise ValueError("frames and waypoints length differ")
        if any(b <= a for a, b in zip(self.frames, self.frames[1:])):
            raise ValueError("frames must be strictly increasing")


@dataclass
class Scene:
    scene_id: str
    frame_interval_seconds: float
    trajectories: list[Trajectory] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [t.agent_id for t in self.trajectories]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate agent_id in scene")


@dataclass
class TrajectorySample:
    """One (observed, future) training instance, plus its frame of reference."""

    observed: list[Waypoint]
    future: list[Waypoint]
    agent_id: int
    scene_id: str
    origin: Waypoint = Waypoint(0.0, 0.0)


def _parse_intlike(tok: str, what: str, line_no: int, text: str) -> int:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(line_no, text, f"{what} is not a number") from None
    if val != int(val):
        raise ParseError(line_no, text, f"{what} must be integer-valued")
    return int(val)


def parse_corpus(stream: io.TextIOBase | Iterable[str], scene_id: str = "scene") -> Scene:
    """Read the canonical text format into a Scene.

    Waypoints are grouped per agent and ordered by frame regardless of line
    order. Duplicate (frame, agent) pairs and malformed lines raise
    :class:`ParseError` with the offending line.
    """
    dt = DEFAULT_DT
    per_agent: dict[int, list[tuple[int, Waypoint]]] = {}
    seen: set[tuple[int, int]] = set()
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("dt="):
                try:
                    dt = float(body[3:])
                except ValueError:
                    raise ParseError(line_no, raw.rstrip("\n"), "bad dt header") from None
                if dt <= 0:
                    raise ParseError(line_no, raw.rstrip("\n"), "dt must be positive")
            elif body.startswith("scene="):
                scene_id = body[6:].strip()
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(line_no, raw.rstrip("\n"), f"expected 4 fields, got {len(fields)}")
        frame = _parse_intlike(fields[0], "frame", line_no, line)
        agent = _parse_intlike(fields[1], "agent_id", line_no, line)
        try:
            x, y = float(fields[2]), float(fields[3])
        except ValueError:
            raise ParseError(line_no, line, "bad coordinate") from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ParseError(line_no, line, "non-finite coordinate")
        if (frame, agent) in seen:
            raise ParseError(line_no, line, f"duplicate (frame={frame}, agent_id={agent})")
        seen.add((frame, agent))
        per_agent.setdefault(agent, []).append((frame, Waypoint(x, y)))

    trajectories = []
    for agent in sorted(per_agent):
        rows = sorted(per_agent[agent], key=lambda r: r[0])
        trajectories.append(
            Trajectory(
                agent_id=agent,
                frames=[f for f, _ in rows],
                waypoints=[w for _, w in rows],
            )
        )
    return Scene(scene_id=scene_id, frame_interval_seconds=dt, trajectories=trajectories)


def serialize_corpus(scene: Scene) -> str:
    """Inverse of :func:`parse_corpus` up to float formatting at 9 significant digits."""
    out = [f"# scene={scene.scene_id}", f"# dt={scene.frame_interval_seconds:.9g}"]
    for traj in scene.trajectories:
        for frame, wp in zip(traj.frames, traj.waypoints):
            out.append(f"{frame} {traj.agent_id} {wp.x:.9g} {wp.y:.9g}")
    return "\n".join(out) + "\n"


def _runs(frames: list[int]) -> Iterator[tuple[int, int]]:
    """Maximal [start, end) index ranges of consecutive frames."""
    start = 0
    for i in range(1, len(frames)):
        if frames[i] != frames[i - 1] + 1:
            yield start, i
            start = i
    if frames:
        yield start, len(frames)


def window(scene: Scene, t_obs: int, t_fut: int, stride: int = 1) -> list[TrajectorySample]:
    """Slide (t_obs + t_fut)-long windows over every gap-free run.

    A run of length L yields floor((L - (t_obs + t_fut)) / stride) + 1
    samples when L is long enough, otherwise none.
    """
    if t_obs < 2:
        raise ValueError("t_obs must be >= 2")
    if t_fut < 1:
        raise ValueError("t_fut must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    total = t_obs + t_fut
    samples = []
    for traj in scene.trajectories:
        for lo, hi in _runs(traj.frames):
            for start in range(lo, hi - total + 1, stride):
                wp = traj.waypoints[start : start + total]
                samples.append(
                    TrajectorySample(
                        observed=wp[:t_obs],
                        future=wp[t_obs:],
                        agent_id=traj.agent_id,
                        scene_id=scene.scene_id,
                    )
                )
    return samples


def normalize(sample: TrajectorySample) -> TrajectorySample:
    """Translate so the last observed waypoint sits at the origin.

    The subtracted waypoint is stored as ``origin``; :func:`denormalize`
    adds it back.
    """
    if not sample.observed:
        raise ValueError("observed window is empty")
    ox, oy = sample.observed[-1].x, sample.observed[-1].y
    shift = lambda w: Waypoint(w.x - ox, w.y - oy)
    return replace(
        sample,
        observed=[shift(w) for w in sample.observed],
        future=[shift(w) for w in sample.future],
        origin=Waypoint(ox, oy),
    )


def denormalize(sample: TrajectorySample) -> TrajectorySample:
    ox, oy = sample.origin.x, sample.origin.y
    shift = lambda w: Waypoint(w.x + ox, w.y + oy)
    return replace(
        sample,
        observed=[shift(w) for w in sample.observed],
        future=[shift(w) for w in sample.future],
        origin=Waypoint(0.0, 0.0),
    )


def observed_array(sample: TrajectorySample) -> np.ndarray:
    """Observed window as a (t_obs, 2) float64 array."""
    return np.array([[w.x, w.y] for w in sample.observed], dtype=np.float64)


def future_array(sample: TrajectorySample) -> np.ndarray:
    """Future window as a (t_fut, 2) float64 array."""
    return np.array([[w.x, w.y] for w in sample.future], dtype=np.float64)
