"""Clean and noise-augmented views of observed trajectory windows.

The augmented view spatially relocates each observed waypoint by additive
Gaussian noise: raw per-waypoint draws from N(0, 1) are scaled by the
noise factor omega, and the scaled field is added to the clean window.
Noise fields carry both the raw draw and the scaled field so the exact
ground-truth noise is always available to the pretext task.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NoiseField", "ViewPair", "sample_noise", "make_views", "zero_noise"]


@dataclass(frozen=True)
class NoiseField:
    """Raw standard-normal draws, the noise factor, and their product."""

    raw: np.ndarray
    omega: float
    scaled: np.ndarray

    def __post_init__(self) -> None:
        if self.raw.shape != self.scaled.shape:
            raise ValueError("raw and scaled shapes differ")


@dataclass(frozen=True)
class ViewPair:
    """The unmodified observed window and its noise-relocated counterpart."""

    clean: np.ndarray
    augmented: np.ndarray
    noise: NoiseField


def sample_noise(t_obs: int, omega: float, rng: np.random.Generator) -> NoiseField:
    """Draw a (t_obs, 2) standard-normal field and scale it by omega."""
    if t_obs < 1:
        raise ValueError("t_obs must be >= 1")
    if omega < 0.0:
        raise ValueError(f"noise factor must be non-negative, got {omega}")
    raw = rng.standard_normal((t_obs, 2))
    return NoiseField(raw=raw, omega=float(omega), scaled=omega * raw)


def zero_noise(t_obs: int) -> NoiseField:
    """The exact zero field (omega = 0)."""
    z = np.zeros((t_obs, 2))
    return NoiseField(raw=z, omega=0.0, scaled=z.copy())


def make_views(observed: np.ndarray, noise: NoiseField) -> ViewPair:
    """Pair the clean window with clean + noise.scaled."""
    observed = np.asarray(observed, dtype=np.float64)
    if observed.shape != noise.scaled.shape:
        raise ValueError(
            f"observed shape {observed.shape} != noise shape {noise.scaled.shape}"
        )
    return ViewPair(clean=observed, augmented=observed + noise.scaled, noise=noise)
