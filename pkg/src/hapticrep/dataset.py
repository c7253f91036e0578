"""Haptic sequence records, line-delimited persistence, and normalization.

A sequence holds per-step 44-channel observations in [-1, 1], one-hot
phase-indicator action rows, per-step rewards in {-1, 0, +1} and a
success flag. Raw (unnormalized) sensor traces go through ``normalize``
before entering a dataset: channels are offset by their value at grasp
time and rescaled so the stationary window stays within +-0.05, then
clipped to [-1, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .genmodel import OBS_DIM

STATIONARY_CAP = 0.05
REWARD_VALUES = (-1.0, 0.0, 1.0)


@dataclass
class HapticSequence:
    id: str
    observations: np.ndarray   # T x 44
    actions: np.ndarray        # T x k, one-hot rows
    rewards: np.ndarray        # T, in {-1, 0, +1}
    success: bool

    def __post_init__(self):
        self.observations = np.asarray(self.observations, dtype=np.float64)
        self.actions = np.asarray(self.actions, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        t = len(self.observations)
        if t < 2:
            raise ValueError("sequence %r shorter than 2 steps" % self.id)
        if len(self.actions) != t or len(self.rewards) != t:
            raise ValueError("sequence %r has mismatched array lengths" % self.id)
        if self.observations.shape[1] != OBS_DIM:
            raise ValueError("sequence %r observations are not %d-channel"
                             % (self.id, OBS_DIM))
        if np.any(np.abs(self.observations) > 1.0 + 1e-12):
            raise ValueError("sequence %r observations exceed [-1, 1]" % self.id)
        if not np.allclose(self.actions.sum(axis=1), 1.0):
            raise ValueError("sequence %r action rows are not one-hot" % self.id)
        if not np.all(np.isin(self.rewards, REWARD_VALUES)):
            raise ValueError("sequence %r rewards outside {-1, 0, +1}" % self.id)

    def __len__(self):
        return len(self.observations)


@dataclass
class NormalizationProfile:
    offset: np.ndarray
    scale: np.ndarray
    flagged_channels: list = field(default_factory=list)

    def __post_init__(self):
        if np.any(np.asarray(self.scale) <= 0):
            raise ValueError("normalization scales must be positive")


def normalize(raw, grasp_index, stationary_window):
    """Offset by grasp-time values, rescale the stationary window, clip.

    Per channel: subtract the value at ``grasp_index``, then pick a scale
    so the largest magnitude inside the stationary window is exactly
    ``STATIONARY_CAP``. Channels that are flat over the window keep scale
    1 and are flagged. Output is clipped to [-1, 1].
    """
    raw = np.asarray(raw, dtype=np.float64)
    if grasp_index + stationary_window > len(raw):
        raise ValueError("stationary window extends past the sequence end")
    offset = raw[grasp_index].copy()
    shifted = raw - offset
    window = shifted[grasp_index:grasp_index + stationary_window]
    peak = np.max(np.abs(window), axis=0)
    scale = np.ones_like(peak)
    flagged = []
    for c in range(raw.shape[1]):
        if peak[c] > 0:
            scale[c] = STATIONARY_CAP / peak[c]
        else:
            flagged.append(c)
    normalized = np.clip(shifted * scale, -1.0, 1.0)
    return normalized, NormalizationProfile(offset, scale, flagged)


def save_dataset(sequences, path):
    """One JSON record per line; floats keep full 64-bit precision."""
    with open(path, "w") as fh:
        for seq in sequences:
            rec = {
                "id": seq.id,
                "observations": seq.observations.tolist(),
                "actions": seq.actions.tolist(),
                "rewards": seq.rewards.tolist(),
                "success": bool(seq.success),
            }
            fh.write(json.dumps(rec) + "\n")


def load_dataset(path):
    sequences = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                sequences.append(HapticSequence(
                    id=rec["id"],
                    observations=rec["observations"],
                    actions=rec["actions"],
                    rewards=rec["rewards"],
                    success=rec["success"],
                ))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError("%s line %d: %s" % (path, lineno, exc)) from exc
    return sequences
