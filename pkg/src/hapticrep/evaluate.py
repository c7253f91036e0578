"""Evaluation harness: multi-horizon haptic prediction and task success.

Prediction protocol: for every timestep t (excluding the last
max-horizon frames), encode the prefix up to t, roll the learned
transition forward h steps with the recorded actions, decode the
observation mean, and record the L2 distance to the true frame. The
chance reference predicts the all-zero frame.

Task protocol: closed-loop rollouts in the detent simulator; at each
tick the policy encodes the observation/action history, takes the
greedy Q action, and the episode ends in success or failure.
"""

from __future__ import annotations

import numpy as np

from . import detentsim
from .qcontrol import ACTION_ADVANCE, ACTION_STAY, policy as greedy_action

DEFAULT_HORIZONS = (1, 5, 10)


class ModelPredictor:
    """Encode with any posterior encoder, roll the generative transition."""

    def __init__(self, gen, encoder):
        self.gen = gen
        self.encoder = encoder

    def predict(self, observations, actions, t, horizon):
        posterior = self.encoder.encode(observations[:t + 1], actions[:t + 1])
        future = actions[t + 1:t + 1 + horizon]
        return self.gen.rollout(posterior[t].mean, future, horizon)[-1]

    def predict_all(self, observations, actions, t_values, horizon):
        # Causality lets us encode the full sequence once.
        posterior = self.encoder.encode(observations, actions)
        out = []
        for t in t_values:
            future = actions[t + 1:t + 1 + horizon]
            out.append(self.gen.rollout(posterior[t].mean, future, horizon)[-1])
        return np.stack(out)


class ChancePredictor:
    """Predicts the all-zero frame at every horizon."""

    def predict_all(self, observations, actions, t_values, horizon):
        return np.zeros((len(t_values), observations.shape[1]))


class RnnPredictorAdapter:
    def __init__(self, predictor):
        self.predictor = predictor

    def predict_all(self, observations, actions, t_values, horizon):
        return np.stack([self.predictor.predict(observations, actions, t, horizon)
                         for t in t_values])


def eval_prediction(predictor, dataset, horizons=DEFAULT_HORIZONS):
    """Average L2 prediction error per horizon.

    Returns {horizon: (mean, stddev, count)}. Sequences shorter than
    max(horizons) + 2 are skipped.
    """
    horizons = tuple(horizons)
    h_max = max(horizons)
    errors = {h: [] for h in horizons}
    for seq in dataset:
        t_len = len(seq)
        if t_len < h_max + 2:
            continue
        t_values = list(range(0, t_len - h_max))
        for h in horizons:
            preds = predictor.predict_all(seq.observations, seq.actions,
                                          t_values, h)
            truth = np.stack([seq.observations[t + h] for t in t_values])
            errors[h].extend(np.linalg.norm(preds - truth, axis=1).tolist())
    out = {}
    for h in horizons:
        vals = np.array(errors[h])
        if len(vals) == 0:
            raise ValueError("no sequence long enough for horizon %d" % h)
        out[h] = (float(vals.mean()), float(vals.std()), len(vals))
    return out


def prediction_report_csv(named_results, path):
    """CSV of {predictor name: eval_prediction results}."""
    with open(path, "w") as fh:
        fh.write("predictor,horizon,mean_l2,std_l2,count\n")
        for name in named_results:
            results = named_results[name]
            for h in sorted(results):
                mean, std, n = results[h]
                fh.write("%s,%d,%r,%r,%d\n" % (name, h, mean, std, n))


# -- closed-loop policies --

class LearnedPolicy:
    """Streaming encoder -> latent mean -> greedy Q action."""

    def __init__(self, encoder, qnet, rng=None):
        self.stream = encoder.stream()
        self.qnet = qnet
        self.seen = 0
        self.last_post = None

    def act(self, obs_history, action_history, state):
        while self.seen < len(obs_history):
            self.last_post = self.stream.push(obs_history[self.seen],
                                              action_history[self.seen])
            self.seen += 1
        return greedy_action(self.qnet, self.last_post.mean)


class RnnPolicy:
    """RNN-predictor latent -> greedy Q action."""

    def __init__(self, predictor, qnet, rng=None):
        self.predictor = predictor
        self.qnet = qnet
        self.h, self.c = predictor.lstm.zero_state()
        self.seen = 0

    def act(self, obs_history, action_history, state):
        while self.seen < len(obs_history):
            self.h, self.c = self.predictor._step_t(
                obs_history[self.seen], action_history[self.seen],
                self.h, self.c)
            self.seen += 1
        latent = np.concatenate([np.asarray(self.h.value),
                                 np.asarray(self.c.value)])
        return greedy_action(self.qnet, latent)


class OraclePolicy:
    """Reads the simulator state directly; upper bound on success."""

    def __init__(self, config, rng=None):
        self.config = config

    def act(self, obs_history, action_history, state):
        if state.phase == detentsim.PHASE_ROTATION and \
                detentsim.in_stop_window(state, self.config):
            return ACTION_ADVANCE
        return ACTION_STAY


class ChancePolicy:
    """Rotates a randomly chosen amount, then advances."""

    def __init__(self, config, rng):
        grid = reachable_stop_angles(config)
        self.stop_angle = grid[rng.integers(len(grid))]

    def act(self, obs_history, action_history, state):
        if state.phase == detentsim.PHASE_ROTATION and \
                state.angle >= self.stop_angle - 1e-9:
            return ACTION_ADVANCE
        return ACTION_STAY


def reachable_stop_angles(config):
    """Angles at which a rotation can stop (multiples of the step rate)."""
    angles = []
    a = config.start_angle + config.rotation_rate
    while a < config.wall_angles[1]:
        angles.append(a)
        a += config.rotation_rate
    return np.array(angles)


def chance_success_fraction(config):
    """Exact success probability of the chance policy (noise-free geometry)."""
    grid = reachable_stop_angles(config)
    target = config.target_angle
    in_window = (grid >= target) & (grid <= target + config.stop_window)
    return float(np.mean(in_window))


def eval_task(make_policy, config, n_episodes, seed):
    """Closed-loop success rate; returns (rate, episode logs)."""
    return detentsim.rollout_policy(make_policy, config, n_episodes, seed)


def task_report_csv(rate, logs, path):
    with open(path, "w") as fh:
        fh.write("episode,outcome,steps,stop_step\n")
        for log in logs:
            stop = "" if log["stop_step"] is None else str(log["stop_step"])
            fh.write("%d,%s,%d,%s\n" % (log["episode"], log["outcome"],
                                        log["steps"], stop))
        fh.write("success_rate,%r,,\n" % rate)
