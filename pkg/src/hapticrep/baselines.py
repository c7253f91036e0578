"""Reference models: windowed non-recurrent encoder, direct RNN predictor.

Both reuse the shared machinery: the window encoder plugs into the same
ELBO training and Gaussian heads as the recurrent recognition network;
the RNN predictor is trained on squared prediction error and exposes its
recurrent state as a latent space for the shared Q-learning code.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .adadelta import Adadelta
from .gaussian import SIGMA_FLOOR, GaussianDiag
from .genmodel import OBS_DIM
from .layers import Dense, LstmCell, clip_global_norm, lstm_step
from .tensor import Graph, Tensor


class WindowEncoder:
    """Feed-forward posterior over a sliding window of observations.

    The last ``window`` frames (zero-padded on the left) are flattened
    and mapped to a per-step diagonal Gaussian; actions are ignored.
    Drop-in replacement for the recurrent recognition network in ELBO
    training and prediction evaluation.
    """

    def __init__(self, latent_dim=16, action_dim=3, window=5, hidden=64,
                 sigma_floor=SIGMA_FLOOR, seed=0):
        self.latent_dim = latent_dim
        self.action_dim = action_dim
        self.window = window
        self.hidden = hidden
        self.sigma_floor = sigma_floor
        rng = np.random.default_rng(seed)
        self.hidden_layer = Dense(window * OBS_DIM, hidden, "tanh", rng)
        self.mean_head = Dense(hidden, latent_dim, "identity", rng)
        self.stddev_head = Dense(hidden, latent_dim, "identity", rng)

    def _window_input(self, observations, t):
        lo = max(0, t - self.window + 1)
        frames = observations[lo:t + 1]
        if len(frames) < self.window:
            pad = np.zeros((self.window - len(frames), OBS_DIM))
            frames = np.concatenate([pad, frames])
        return frames.reshape(-1)

    def encode_stacked_t(self, observations, actions):
        observations = np.asarray(observations, dtype=np.float64)
        windows = np.stack([self._window_input(observations, t)
                            for t in range(len(observations))])
        h = self.hidden_layer.forward(Tensor(windows))
        means = self.mean_head.forward(h)
        stddevs = T.shift(T.softplus(self.stddev_head.forward(h)),
                          self.sigma_floor)
        return means, stddevs

    def encode_t(self, observations, actions):
        means, stddevs = self.encode_stacked_t(observations, actions)
        return [(T.row(means, t), T.row(stddevs, t))
                for t in range(len(observations))]

    def encode(self, observations, actions):
        means, stddevs = self.encode_stacked_t(observations, actions)
        m, s = np.asarray(means.value), np.asarray(stddevs.value)
        return [GaussianDiag(m[t], s[t]) for t in range(len(m))]

    def parameters(self):
        out = {}
        for tag, layer in (("hidden", self.hidden_layer),
                           ("mean", self.mean_head),
                           ("stddev", self.stddev_head)):
            for name, p in layer.parameters().items():
                out["%s.%s" % (tag, name)] = p
        return out

    def hyperparameters(self):
        return {"latent_dim": self.latent_dim, "action_dim": self.action_dim,
                "window": self.window, "hidden": self.hidden,
                "sigma_floor": self.sigma_floor}


class RnnPredictor:
    """LSTM that directly regresses the next observation.

    Input at step t is (o_t, a_t); the hidden state concatenated with
    a_{t+1} predicts o_{t+1}. Multi-step prediction feeds each output
    back in as the next observation input.
    """

    def __init__(self, action_dim=3, hidden=64, seed=0):
        self.action_dim = action_dim
        self.hidden = hidden
        rng = np.random.default_rng(seed)
        self.lstm = LstmCell(OBS_DIM + action_dim, hidden, rng)
        self.head = Dense(hidden + action_dim, OBS_DIM, "identity", rng)

    def parameters(self):
        out = {}
        for tag, part in (("lstm", self.lstm), ("head", self.head)):
            for name, p in part.parameters().items():
                out["%s.%s" % (tag, name)] = p
        return out

    def hyperparameters(self):
        return {"action_dim": self.action_dim, "hidden": self.hidden}

    def _step_t(self, obs_row, action_row, h, c):
        x = T.concat([obs_row if isinstance(obs_row, Tensor) else Tensor(obs_row),
                      Tensor(action_row)])
        return lstm_step(self.lstm, x, h, c)

    def _predict_t(self, h, next_action):
        return self.head.forward(T.concat([h, Tensor(next_action)]))

    def sequence_loss_t(self, seq):
        """Summed squared one-step prediction error over a sequence."""
        h, c = self.lstm.zero_state()
        loss = None
        for t in range(len(seq) - 1):
            h, c = self._step_t(seq.observations[t], seq.actions[t], h, c)
            pred = self._predict_t(h, seq.actions[t + 1])
            err = T.total(T.square(T.sub(pred, Tensor(seq.observations[t + 1]))))
            loss = err if loss is None else T.add(loss, err)
        return loss

    def predict(self, observations, actions, t, horizon, future_actions=None):
        """Predict the observation at step t + horizon from prefix 0..t.

        ``future_actions[i]`` is the action row at step t+1+i; defaults
        to the rows recorded in ``actions``.
        """
        h, c = self.lstm.zero_state()
        for i in range(t + 1):
            h, c = self._step_t(observations[i], actions[i], h, c)
        if future_actions is None:
            future_actions = actions[t + 1:t + 1 + horizon]
        obs = None
        for i in range(horizon):
            pred = self._predict_t(h, future_actions[i])
            obs = np.asarray(pred.value)
            if i + 1 < horizon:
                h, c = self._step_t(pred, future_actions[i], h, c)
        return obs

    def latent_states(self, observations, actions):
        """Recurrent state per step (h and c concatenated)."""
        h, c = self.lstm.zero_state()
        out = []
        for t in range(len(observations)):
            h, c = self._step_t(observations[t], actions[t], h, c)
            out.append(np.concatenate([np.asarray(h.value),
                                       np.asarray(c.value)]))
        return np.stack(out)


def train_rnn_predictor(dataset, predictor, epochs=100, minibatch=8, seed=0):
    """Minibatch Adadelta on summed squared prediction error."""
    if not dataset:
        raise ValueError("empty dataset")
    params = [p for _, p in sorted(predictor.parameters().items())]
    opt = Adadelta(params)
    losses = []
    for epoch in range(epochs):
        rng = np.random.default_rng([seed, epoch])
        order = rng.permutation(len(dataset))
        epoch_loss = 0.0
        for lo in range(0, len(order), minibatch):
            batch = [dataset[i] for i in order[lo:lo + minibatch]]
            with Graph() as graph:
                loss = None
                for seq in batch:
                    term = predictor.sequence_loss_t(seq)
                    loss = term if loss is None else T.add(loss, term)
                grads = graph.backward(loss, params)
            clip_global_norm(grads, 5.0)
            opt.step(grads)
            epoch_loss += float(loss.value)
        losses.append(epoch_loss / len(dataset))
    return losses


class RnnLatentSpace:
    """Adapter exposing the RNN predictor's recurrent state to Q-learning."""

    def __init__(self, predictor):
        self.predictor = predictor
        self.latent_dim = 2 * predictor.hidden

    def encode_states(self, seq, rng):
        return self.predictor.latent_states(seq.observations, seq.actions)

    def step(self, s, phase_row):
        single = np.ndim(s) == 1
        states = np.atleast_2d(s)
        phases = np.atleast_2d(phase_row)
        hid = self.predictor.hidden
        out = np.zeros_like(states)
        for i in range(len(states)):
            h = Tensor(states[i, :hid])
            c = Tensor(states[i, hid:])
            pred = self.predictor._predict_t(h, phases[i])
            h2, c2 = self.predictor._step_t(pred, phases[i], h, c)
            out[i] = np.concatenate([np.asarray(h2.value), np.asarray(c2.value)])
        return out[0] if single else out
