"""Generative POMDP model: prior, transition, observation/reward emissions.

All conditionals are diagonal Gaussians whose mean and stddev come from
small two-layer networks. Stddev heads go through softplus plus a fixed
floor so every emitted distribution stays strictly positive.

Convention: the transition is conditioned on the action executed between
step t-1 and step t, i.e. the action row recorded at step t.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .gaussian import SIGMA_FLOOR, GaussianDiag
from .layers import Dense
from .tensor import ShapeError, Tensor

OBS_DIM = 44


class GaussianHead:
    """Two-layer network mapping an input vector to (mean, stddev)."""

    def __init__(self, in_size, hidden, out_size, activation="tanh",
                 rng=None, sigma_floor=SIGMA_FLOOR):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.hidden_layer = Dense(in_size, hidden, activation, rng)
        self.mean_head = Dense(hidden, out_size, "identity", rng)
        self.stddev_head = Dense(hidden, out_size, "identity", rng)
        self.sigma_floor = sigma_floor
        self.in_size = in_size
        self.out_size = out_size

    def forward(self, x):
        h = self.hidden_layer.forward(x)
        mean = self.mean_head.forward(h)
        stddev = T.shift(T.softplus(self.stddev_head.forward(h)),
                         self.sigma_floor)
        return mean, stddev

    def parameters(self):
        out = {}
        for tag, layer in (("hidden", self.hidden_layer),
                           ("mean", self.mean_head),
                           ("stddev", self.stddev_head)):
            for name, p in layer.parameters().items():
                out["%s.%s" % (tag, name)] = p
        return out


class GenerativeModel:
    """Transition and emission networks over a d-dimensional latent state."""

    def __init__(self, latent_dim=16, action_dim=3, hidden=64,
                 activation="tanh", sigma_floor=SIGMA_FLOOR, seed=0):
        self.latent_dim = latent_dim
        self.action_dim = action_dim
        self.obs_dim = OBS_DIM
        self.hidden = hidden
        self.activation = activation
        self.sigma_floor = sigma_floor
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.trans_net = GaussianHead(latent_dim + action_dim, hidden,
                                      latent_dim, activation, rng, sigma_floor)
        self.obs_net = GaussianHead(latent_dim, hidden, OBS_DIM,
                                    activation, rng, sigma_floor)
        self.reward_net = GaussianHead(latent_dim, hidden, 1,
                                       activation, rng, sigma_floor)

    # -- distribution constructors (numpy surface) --

    def prior_initial(self):
        """Standard normal over the initial latent state."""
        d = self.latent_dim
        return GaussianDiag(np.zeros(d), np.ones(d))

    def transition(self, s_prev, action):
        mean, stddev = self.transition_t(s_prev, action)
        return GaussianDiag(np.asarray(mean.value), np.asarray(stddev.value))

    def emit_observation(self, s):
        mean, stddev = self.emit_observation_t(s)
        return GaussianDiag(np.asarray(mean.value), np.asarray(stddev.value))

    def emit_reward(self, s):
        mean, stddev = self.emit_reward_t(s)
        return GaussianDiag(np.asarray(mean.value), np.asarray(stddev.value))

    # -- tape-level forwards used during training --

    def transition_t(self, s_prev, action):
        s_prev = s_prev if isinstance(s_prev, T.Tensor) else Tensor(s_prev)
        action = action if isinstance(action, T.Tensor) else Tensor(action)
        if s_prev.value.shape[-1] != self.latent_dim:
            raise ShapeError("transition: latent dim %d, expected %d"
                             % (s_prev.value.shape[-1], self.latent_dim))
        if action.value.shape[-1] != self.action_dim:
            raise ShapeError("transition: action dim %d, expected %d"
                             % (action.value.shape[-1], self.action_dim))
        return self.trans_net.forward(T.concat([s_prev, action]))

    def emit_observation_t(self, s):
        return self.obs_net.forward(s)

    def emit_reward_t(self, s):
        return self.reward_net.forward(s)

    def rollout(self, s0, actions, horizon):
        """Noise-free rollout: iterate transition means, decode obs means.

        ``actions[i]`` conditions the i-th transition. Returns an array of
        shape (horizon, 44).
        """
        if horizon < 0:
            raise ValueError("horizon must be >= 0")
        if horizon > len(actions):
            raise ValueError("need %d actions, got %d" % (horizon, len(actions)))
        s = np.asarray(s0, dtype=np.float64)
        out = np.zeros((horizon, OBS_DIM))
        for i in range(horizon):
            s = self.transition(s, actions[i]).mean
            out[i] = self.emit_observation(s).mean
        return out

    # -- persistence --

    def parameters(self):
        out = {}
        for tag, net in (("trans", self.trans_net), ("obs", self.obs_net),
                         ("reward", self.reward_net)):
            for name, p in net.parameters().items():
                out["%s.%s" % (tag, name)] = p
        return out

    def hyperparameters(self):
        return {
            "latent_dim": self.latent_dim,
            "action_dim": self.action_dim,
            "obs_dim": self.obs_dim,
            "hidden": self.hidden,
            "activation": self.activation,
            "sigma_floor": self.sigma_floor,
        }
