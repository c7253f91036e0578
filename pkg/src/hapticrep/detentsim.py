"""Detent-knob simulator: tactile-like signals, phases, auto-labeled rewards.

The knob rotates at a fixed rate through a wall-bounded angle interval.
Crossing a detent center injects a short half-cosine "click" pulse into
the 44-channel contact signal; riding a wall adds a plateau. The plan
has three phases (before-rotation, rotation, stopped); the controllable
decision is when to advance. Advancing inside the post-click stoppable
window of the target detent succeeds (+1); advancing anywhere else, or
continuing to rotate after hitting a wall, fails (-1).

Episodes are recorded as HapticSequence objects: per-step observation,
one-hot phase row, reward, plus the final outcome as the success flag.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .dataset import HapticSequence
from .genmodel import OBS_DIM

PHASE_BEFORE = 0
PHASE_ROTATION = 1
PHASE_STOPPED = 2
N_PHASES = 3
PHASE_NAMES = ("before-rotation", "rotation", "stopped")

OUTCOME_ONGOING = "ongoing"
OUTCOME_SUCCESS = "success"
OUTCOME_FAILURE = "failure"

ACTION_STAY = 0
ACTION_ADVANCE = 1

FAILURE_SCRIPTS = ("insufficient", "overrotation", "wallgrind", "slip")


def default_contact_pattern(seed):
    """Smooth per-cell gains in [0.3, 1.0]."""
    rng = np.random.default_rng([seed, 101])
    raw = rng.uniform(size=OBS_DIM)
    smooth = np.convolve(np.concatenate([raw[-2:], raw, raw[:2]]),
                         np.ones(5) / 5.0, mode="valid")
    lo, hi = smooth.min(), smooth.max()
    return 0.3 + 0.7 * (smooth - lo) / (hi - lo)


@dataclass
class KnobConfig:
    detent_angles: tuple = (30.0,)
    detent_width: float = 12.0
    wall_angles: tuple = (-10.0, 60.0)
    click_pulse_amplitude: float = 0.8
    rotation_rate: float = 1.5
    noise_std: float = 0.01
    contact_pattern: np.ndarray = None
    seed: int = 0
    stop_window: float = 20.0
    target_detent: int = 0
    start_angle: float = 0.0
    pre_rotation_steps: int = 8
    max_steps: int = 70
    base_contact: float = 0.1
    wall_plateau: float = 0.5
    torsion_gain: float = 0.0

    def __post_init__(self):
        self.detent_angles = tuple(float(a) for a in self.detent_angles)
        self.wall_angles = tuple(float(a) for a in self.wall_angles)
        lo, hi = self.wall_angles
        if not self.detent_angles:
            raise ValueError("config has no detents")
        if not all(lo < a < hi for a in self.detent_angles):
            raise ValueError("detent angles must lie strictly inside the walls")
        if self.detent_width <= 0:
            raise ValueError("detent_width must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.torsion_gain < 0:
            raise ValueError("torsion_gain must be nonnegative")
        if not lo <= self.start_angle <= hi:
            raise ValueError("start angle outside the wall interval")
        if not 0 <= self.target_detent < len(self.detent_angles):
            raise ValueError("target_detent out of range")
        if self.contact_pattern is None:
            self.contact_pattern = default_contact_pattern(self.seed)
        self.contact_pattern = np.asarray(self.contact_pattern,
                                          dtype=np.float64)
        if self.contact_pattern.shape != (OBS_DIM,):
            raise ValueError("contact_pattern must have %d cells" % OBS_DIM)

    @property
    def target_angle(self):
        return self.detent_angles[self.target_detent]


@dataclass
class SimState:
    angle: float = 0.0
    phase: int = PHASE_BEFORE
    clicked: bool = False
    hit_wall: bool = False
    outcome: str = OUTCOME_ONGOING
    step_count: int = 0

    def phase_onehot(self):
        out = np.zeros(N_PHASES)
        out[self.phase] = 1.0
        return out


def initial_state(config):
    return SimState(angle=config.start_angle)


def observe(state, config, rng=None):
    """Tactile frame for the current state; noisy unless noise_std == 0."""
    lo, hi = config.wall_angles
    # Grip torsion builds smoothly as the knob turns, so the contact level
    # itself carries the rotation progress.
    level = config.base_contact + config.torsion_gain * (state.angle - lo) / (hi - lo)
    for center in config.detent_angles:
        dist = abs(state.angle - center)
        if dist <= config.detent_width / 2.0:
            level += config.click_pulse_amplitude * np.cos(
                np.pi * dist / config.detent_width)
    if state.hit_wall:
        level += config.wall_plateau
    obs = level * config.contact_pattern
    if config.noise_std > 0:
        if rng is None:
            raise ValueError("noise_std > 0 requires an rng")
        obs = obs + rng.normal(0.0, config.noise_std, OBS_DIM)
    return np.clip(obs, -1.0, 1.0)


def in_stop_window(state, config):
    target = config.target_angle
    return state.clicked and target <= state.angle <= target + config.stop_window


def step(state, action, config, rng=None):
    """Advance the simulator one tick; returns (state, observation, reward).

    Raises if the episode already ended. With noise_std == 0 the result
    is a pure function of (state, action).
    """
    if state.outcome != OUTCOME_ONGOING:
        raise ValueError("step after terminal outcome %r" % state.outcome)
    state = copy.copy(state)
    reward = 0.0
    if state.phase == PHASE_BEFORE:
        # Scripted pre-rotation segment of the nominal plan; the policy's
        # decision only matters once rotation starts.
        if state.step_count + 1 >= config.pre_rotation_steps:
            state.phase = PHASE_ROTATION
    elif state.phase == PHASE_ROTATION:
        if action == ACTION_ADVANCE:
            if in_stop_window(state, config):
                reward = 1.0
                state.outcome = OUTCOME_SUCCESS
            else:
                reward = -1.0
                state.outcome = OUTCOME_FAILURE
            state.phase = PHASE_STOPPED
        else:
            if state.hit_wall:
                reward = -1.0  # grinding against the wall
                state.outcome = OUTCOME_FAILURE
            else:
                new_angle = state.angle + config.rotation_rate
                if new_angle >= config.wall_angles[1]:
                    new_angle = config.wall_angles[1]
                    state.hit_wall = True
                if state.angle < config.target_angle <= new_angle:
                    state.clicked = True
                state.angle = new_angle
    else:
        raise ValueError("cannot step in phase %r" % PHASE_NAMES[state.phase])
    state.step_count += 1
    return state, observe(state, config, rng), reward


class ScriptedController:
    """Open-loop controllers producing the success and failure scripts."""

    def __init__(self, script, config, rng):
        self.script = script
        target = config.target_angle
        window = config.stop_window
        if script == "success":
            # Demonstrators advance promptly once the click is felt.
            self.advance_angle = target + rng.uniform(0.1, 0.4) * window
        elif script == "insufficient":
            self.advance_angle = target - rng.uniform(5.0, 15.0)
        elif script in ("overrotation", "slip"):
            self.advance_angle = target + window + rng.uniform(3.0, 10.0)
        elif script == "wallgrind":
            self.advance_angle = np.inf
        else:
            raise ValueError("unknown script %r" % script)

    def act(self, state):
        if state.phase == PHASE_ROTATION and state.angle >= self.advance_angle:
            return ACTION_ADVANCE
        return ACTION_STAY


def run_episode(config, controller, rng, seq_id):
    """Roll one episode to a terminal outcome (or the step cap)."""
    state = initial_state(config)
    observations = [observe(state, config, rng)]
    actions = [state.phase_onehot()]
    rewards = [0.0]
    while state.outcome == OUTCOME_ONGOING and state.step_count < config.max_steps:
        act = controller.act(state)
        state, obs, reward = step(state, act, config, rng)
        observations.append(obs)
        actions.append(state.phase_onehot())
        rewards.append(reward)
    seq = HapticSequence(
        id=seq_id,
        observations=np.stack(observations),
        actions=np.stack(actions),
        rewards=np.array(rewards),
        success=(state.outcome == OUTCOME_SUCCESS),
    )
    return seq, state


def generate_dataset(config, n_success, n_fail, seed):
    """Scripted mix of successes and the four failure modes.

    Failure scripts rotate in equal proportion. Deterministic per seed.
    """
    if n_success < 1 or n_fail < 1:
        raise ValueError("need at least one success and one failure")
    sequences = []
    for i in range(n_success):
        rng = np.random.default_rng([seed, 0, i])
        controller = ScriptedController("success", config, rng)
        seq, state = run_episode(config, controller, rng, "success-%03d" % i)
        if not seq.success:
            raise RuntimeError("success script failed; config infeasible")
        sequences.append(seq)
    for i in range(n_fail):
        script = FAILURE_SCRIPTS[i % len(FAILURE_SCRIPTS)]
        rng = np.random.default_rng([seed, 1, i])
        episode_config = config
        if script == "slip":
            # Lost grip: the click barely registers in the signal.
            episode_config = copy.copy(config)
            episode_config.click_pulse_amplitude = 0.05 * config.click_pulse_amplitude
        controller = ScriptedController(script, episode_config, rng)
        seq, state = run_episode(episode_config, controller, rng,
                                 "fail-%s-%03d" % (script, i))
        seq.success = False
        sequences.append(seq)
    return sequences


def rollout_policy(make_policy, config, n_episodes, seed):
    """Closed-loop evaluation; returns (success_rate, episode logs).

    ``make_policy(episode_rng)`` builds a fresh policy per episode; the
    policy's ``act(obs_history, action_history, state)`` returns a
    stay/advance decision each tick.
    """
    logs = []
    successes = 0
    for i in range(n_episodes):
        rng = np.random.default_rng([seed, 2, i])
        policy = make_policy(np.random.default_rng([seed, 3, i]))
        state = initial_state(config)
        obs_hist = [observe(state, config, rng)]
        act_hist = [state.phase_onehot()]
        stop_step = None
        while state.outcome == OUTCOME_ONGOING and state.step_count < config.max_steps:
            act = policy.act(obs_hist, act_hist, state)
            if act == ACTION_ADVANCE and state.phase == PHASE_ROTATION:
                stop_step = state.step_count
            state, obs, _ = step(state, act, config, rng)
            obs_hist.append(obs)
            act_hist.append(state.phase_onehot())
        ok = state.outcome == OUTCOME_SUCCESS
        successes += ok
        logs.append({"episode": i, "outcome": state.outcome,
                     "steps": state.step_count, "stop_step": stop_step})
    return successes / n_episodes, logs


# -- preset scenarios --

def _preset_configs():
    return {
        "stirrer": KnobConfig(detent_angles=(30.0,), detent_width=12.0,
                              wall_angles=(-10.0, 60.0),
                              click_pulse_amplitude=0.8, rotation_rate=1.5,
                              noise_std=0.03, stop_window=20.0, seed=11),
        "speaker": KnobConfig(detent_angles=(30.0,), detent_width=8.0,
                              wall_angles=(-10.0, 60.0),
                              click_pulse_amplitude=0.5, rotation_rate=1.5,
                              noise_std=0.02, stop_window=15.0, seed=22),
        "fan": KnobConfig(detent_angles=(45.0, 90.0), detent_width=16.0,
                          wall_angles=(-10.0, 120.0),
                          click_pulse_amplitude=0.7, rotation_rate=2.5,
                          noise_std=0.01, stop_window=20.0, target_detent=0,
                          max_steps=80, seed=33),
    }


PRESET_NAMES = ("stirrer", "speaker", "fan")


def scenario_config(name):
    presets = _preset_configs()
    if name not in presets:
        raise ValueError("unknown scenario %r (have %s)"
                         % (name, ", ".join(sorted(presets))))
    return presets[name]


_SCALAR_FIELDS = ("detent_width", "click_pulse_amplitude", "rotation_rate",
                  "noise_std", "stop_window", "start_angle", "base_contact",
                  "wall_plateau", "torsion_gain")
_INT_FIELDS = ("seed", "target_detent", "pre_rotation_steps", "max_steps")


def save_config(config, path):
    """Human-readable key=value scenario file."""
    with open(path, "w") as fh:
        fh.write("detent_angles = %s\n"
                 % ",".join(repr(a) for a in config.detent_angles))
        fh.write("wall_angles = %s\n"
                 % ",".join(repr(a) for a in config.wall_angles))
        for name in _SCALAR_FIELDS:
            fh.write("%s = %r\n" % (name, getattr(config, name)))
        for name in _INT_FIELDS:
            fh.write("%s = %d\n" % (name, getattr(config, name)))


def load_config(path):
    fields = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s line %d: expected key = value" % (path, lineno))
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in ("detent_angles", "wall_angles"):
                fields[key] = tuple(float(v) for v in value.split(","))
            elif key in _SCALAR_FIELDS:
                fields[key] = float(value)
            elif key in _INT_FIELDS:
                fields[key] = int(value)
            else:
                raise ValueError("%s line %d: unknown key %r" % (path, lineno, key))
    return KnobConfig(**fields)
