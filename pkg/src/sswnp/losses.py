"""Training objectives: trajectory, two-view supervised, noise pretext, total.

All mean-squared errors average over every scalar entry (time step times
coordinate); batch losses then average over agents. The supervised loss
sums the trajectory losses of the clean-view and augmented-view
predictions against the same ground truth, which pulls both predictions
toward it and thereby keeps them spatially consistent with each other.
The pretext loss targets the exact zero field for the clean view and the
true scaled noise for the augmented view. The total objective is
``l_sup + lambda * l_ss``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LossBreakdown",
    "traj_loss",
    "traj_loss_best_of_k",
    "supervised_loss",
    "self_supervised_loss",
    "total_loss",
    "breakdown",
]


@dataclass(frozen=True)
class LossBreakdown:
    """Per-step loss components; ``l_total == l_sup + lambda_ * l_ss``."""

    l_tp_clean: float
    l_tp_aug: float
    l_sup: float
    l_ss_clean: float
    l_ss_aug: float
    l_ss: float
    lambda_: float
    l_total: float


def _mse(a: np.ndarray, b: np.ndarray) -> float:
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.mean(d * d))


def traj_loss(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean squared coordinate error over all t_fut x 2 entries."""
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction shape {pred.shape} != ground truth {gt.shape}")
    return _mse(pred, gt)


def traj_loss_best_of_k(samples: np.ndarray, gt: np.ndarray) -> tuple[float, int]:
    """Best trajectory loss over a (k, t_fut, 2) sample stack, with its index."""
    values = [traj_loss(s, gt) for s in samples]
    best = int(np.argmin(values))
    return values[best], best


def supervised_loss(pred_clean: np.ndarray, pred_aug: np.ndarray, gt: np.ndarray) -> float:
    """Agent-mean of the clean-view plus augmented-view trajectory losses.

    Inputs are stacked per agent: (n, t_fut, 2).
    """
    pred_clean, pred_aug, gt = map(np.asarray, (pred_clean, pred_aug, gt))
    if not pred_clean.shape == pred_aug.shape == gt.shape:
        raise ValueError("per-agent prediction/ground-truth shapes disagree")
    if pred_clean.shape[0] == 0:
        raise ValueError("empty batch")
    per_agent = [
        traj_loss(pc, g) + traj_loss(pa, g)
        for pc, pa, g in zip(pred_clean, pred_aug, gt)
    ]
    return float(np.mean(per_agent))


def self_supervised_loss(
    pred_noise_clean: np.ndarray,
    pred_noise_aug: np.ndarray,
    true_noise: np.ndarray,
) -> float:
    """Agent-mean of MSE(clean estimate, 0) + MSE(augmented estimate, true noise).

    Inputs are stacked per agent: (n, t_obs, 2); the clean-view target is
    the zero field since no noise is present in the original window.
    """
    pred_noise_clean, pred_noise_aug, true_noise = map(
        np.asarray, (pred_noise_clean, pred_noise_aug, true_noise)
    )
    if not pred_noise_clean.shape == pred_noise_aug.shape == true_noise.shape:
        raise ValueError("noise field shapes disagree")
    if pred_noise_clean.shape[0] == 0:
        raise ValueError("empty batch")
    per_agent = [
        _mse(pc, np.zeros_like(pc)) + _mse(pa, tn)
        for pc, pa, tn in zip(pred_noise_clean, pred_noise_aug, true_noise)
    ]
    return float(np.mean(per_agent))


def total_loss(l_sup: float, l_ss: float, lambda_: float) -> float:
    """Weighted sum of the supervised and self-supervised objectives."""
    if lambda_ < 0:
        raise ValueError("lambda must be >= 0")
    return l_sup + lambda_ * l_ss


def breakdown(
    pred_clean: np.ndarray,
    pred_aug: np.ndarray,
    gt: np.ndarray,
    pred_noise_clean: np.ndarray,
    pred_noise_aug: np.ndarray,
    true_noise: np.ndarray,
    lambda_: float,
) -> LossBreakdown:
    """Full per-batch loss decomposition from stacked per-agent arrays."""
    l_tp_clean = float(np.mean([traj_loss(p, g) for p, g in zip(pred_clean, gt)]))
    l_tp_aug = float(np.mean([traj_loss(p, g) for p, g in zip(pred_aug, gt)]))
    l_ss_clean = float(np.mean([_mse(p, np.zeros_like(p)) for p in pred_noise_clean]))
    l_ss_aug = float(np.mean([_mse(p, t) for p, t in zip(pred_noise_aug, true_noise)]))
    l_sup = l_tp_clean + l_tp_aug
    l_ss = l_ss_clean + l_ss_aug
    return LossBreakdown(
        l_tp_clean=l_tp_clean,
        l_tp_aug=l_tp_aug,
        l_sup=l_sup,
        l_ss_clean=l_ss_clean,
        l_ss_aug=l_ss_aug,
        l_ss=l_ss,
        lambda_=lambda_,
        l_total=total_loss(l_sup, l_ss, lambda_),
    )
