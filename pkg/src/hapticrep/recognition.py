"""Recurrent recognition network: approximate posterior over latent states.

Two stacked LSTM layers consume concatenated (observation, action) rows
and a linear head emits a per-step diagonal Gaussian. Rewards are never
part of the input, so the encoder works identically at test time. The
per-step output is causal: entry t only sees inputs 1..t.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .gaussian import SIGMA_FLOOR, GaussianDiag
from .genmodel import OBS_DIM
from .layers import Dense, LstmCell, lstm_step
from .tensor import ShapeError, Tensor


class RecognitionNetwork:
    """q(s_t | o_1..t, a_1..t) with two LSTM layers and a Gaussian head."""

    def __init__(self, latent_dim=16, action_dim=3, hidden1=64, hidden2=64,
                 sigma_floor=SIGMA_FLOOR, seed=0):
        self.latent_dim = latent_dim
        self.action_dim = action_dim
        self.hidden1 = hidden1
        self.hidden2 = hidden2
        self.sigma_floor = sigma_floor
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.lstm1 = LstmCell(OBS_DIM + action_dim, hidden1, rng)
        self.lstm2 = LstmCell(hidden1, hidden2, rng)
        self.mean_head = Dense(hidden2, latent_dim, "identity", rng)
        self.stddev_head = Dense(hidden2, latent_dim, "identity", rng)

    def encode_stacked_t(self, observations, actions):
        """Tape-level encode; returns (means, stddevs) as T x d Tensors."""
        observations = np.asarray(observations, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        if observations.ndim != 2 or observations.shape[1] != OBS_DIM:
            raise ShapeError("observations must be T x %d" % OBS_DIM)
        if len(actions) != len(observations):
            raise ShapeError("length mismatch: %d observations, %d actions"
                             % (len(observations), len(actions)))
        if actions.shape[1] != self.action_dim:
            raise ShapeError("actions must be T x %d" % self.action_dim)
        if np.any(np.abs(observations) > 1.0 + 1e-12):
            raise ValueError("observations must lie in [-1, 1]")
        h1, c1 = self.lstm1.zero_state()
        h2, c2 = self.lstm2.zero_state()
        top = []
        for t in range(len(observations)):
            x = Tensor(np.concatenate([observations[t], actions[t]]))
            h1, c1 = lstm_step(self.lstm1, x, h1, c1)
            h2, c2 = lstm_step(self.lstm2, h1, h2, c2)
            top.append(h2)
        stacked = T.stack(top)
        means = self.mean_head.forward(stacked)
        stddevs = T.shift(T.softplus(self.stddev_head.forward(stacked)),
                          self.sigma_floor)
        return means, stddevs

    def encode_t(self, observations, actions):
        """Per-step view of encode_stacked_t: list of (mean, stddev) pairs."""
        means, stddevs = self.encode_stacked_t(observations, actions)
        return [(T.row(means, t), T.row(stddevs, t))
                for t in range(len(observations))]

    def encode(self, observations, actions):
        """Posterior sequence as a list of GaussianDiag, one per timestep."""
        means, stddevs = self.encode_stacked_t(observations, actions)
        m, s = np.asarray(means.value), np.asarray(stddevs.value)
        return [GaussianDiag(m[t], s[t]) for t in range(len(m))]

    def stream(self):
        """Incremental encoder for closed-loop control.

        Produces the same posteriors as ``encode`` fed with the full
        history, one step at a time.
        """
        return _EncoderStream(self)

    def parameters(self):
        out = {}
        for tag, part in (("lstm1", self.lstm1), ("lstm2", self.lstm2),
                          ("mean", self.mean_head), ("stddev", self.stddev_head)):
            for name, p in part.parameters().items():
                out["%s.%s" % (tag, name)] = p
        return out

    def hyperparameters(self):
        return {
            "latent_dim": self.latent_dim,
            "action_dim": self.action_dim,
            "hidden1": self.hidden1,
            "hidden2": self.hidden2,
            "sigma_floor": self.sigma_floor,
        }


class _EncoderStream:
    def __init__(self, network):
        self.network = network
        self.h1, self.c1 = network.lstm1.zero_state()
        self.h2, self.c2 = network.lstm2.zero_state()

    def push(self, obs_row, action_row):
        net = self.network
        x = Tensor(np.concatenate([np.asarray(obs_row, dtype=np.float64),
                                   np.asarray(action_row, dtype=np.float64)]))
        self.h1, self.c1 = lstm_step(net.lstm1, x, self.h1, self.c1)
        self.h2, self.c2 = lstm_step(net.lstm2, self.h1, self.h2, self.c2)
        mean = net.mean_head.forward(self.h2)
        stddev = T.shift(T.softplus(net.stddev_head.forward(self.h2)),
                         net.sigma_floor)
        return GaussianDiag(np.asarray(mean.value), np.asarray(stddev.value))


def sample_posterior(posterior, noise):
    """Reparameterized samples s_t = mean_t + noise_t * stddev_t (numpy)."""
    noise = np.asarray(noise, dtype=np.float64)
    if len(noise) != len(posterior):
        raise ShapeError("noise length %d, posterior length %d"
                         % (len(noise), len(posterior)))
    return np.stack([p.sample(noise[t]) for t, p in enumerate(posterior)])


def sample_posterior_t(posterior_t, noise):
    """Tape version: list of sampled latent-state Tensors."""
    noise = np.asarray(noise, dtype=np.float64)
    out = []
    for t, (mean, stddev) in enumerate(posterior_t):
        out.append(T.add(mean, T.mul(Tensor(noise[t]), stddev)))
    return out


def export_embeddings(sequences, network, path):
    """Write per-step posterior means as CSV for external projection."""
    d = network.latent_dim
    with open(path, "w") as fh:
        fh.write("sequence_id,t," + ",".join("z%d" % i for i in range(d)) + "\n")
        for seq in sequences:
            for t, p in enumerate(network.encode(seq.observations, seq.actions)):
                fh.write("%s,%d,%s\n" % (seq.id, t,
                                         ",".join(repr(float(v)) for v in p.mean)))
