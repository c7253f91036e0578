"""Offline Q-learning in the learned latent space.

Transition tuples come from the recognition network over the recorded
sequences. Each training iteration first explores offline: starting
from latent states of successful sequences, an epsilon-greedy action is
rolled through the learned transition model, and any deviation from the
recorded action is penalized with reward -1. The two-layer Q-network is
then fit by minibatch temporal-difference regression over the union of
recorded and explored tuples.

The discrete action space is the phase-advance decision: 0 = stay in
the current plan phase, 1 = advance to the next phase. Actions are fed
to the generative model as one-hot phase vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adadelta import Adadelta
from .layers import Dense, clip_global_norm
from .recognition import sample_posterior
from .tensor import Graph, Tensor
from . import tensor as T

N_ACTIONS = 2
ACTION_STAY = 0
ACTION_ADVANCE = 1
DEVIATION_REWARD = -1.0


def action_index(phase_row, phase_row_next):
    """Stay/advance decision implied by two consecutive one-hot phase rows."""
    return ACTION_ADVANCE if int(np.argmax(phase_row_next)) != int(np.argmax(phase_row)) \
        else ACTION_STAY


def next_phase_onehot(phase_row, action, n_phases=None):
    """Phase vector after taking a stay/advance decision."""
    phase_row = np.asarray(phase_row, dtype=np.float64)
    k = n_phases or len(phase_row)
    p = int(np.argmax(phase_row))
    if action == ACTION_ADVANCE:
        p = min(p + 1, k - 1)
    out = np.zeros(k)
    out[p] = 1.0
    return out


@dataclass
class TransitionTuple:
    s: np.ndarray
    a_next: int
    r_next: float
    s_next: np.ndarray
    terminal: bool = False

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=np.float64)
        self.s_next = np.asarray(self.s_next, dtype=np.float64)
        if self.s.shape != self.s_next.shape:
            raise ValueError("state dims differ: %s vs %s"
                             % (self.s.shape, self.s_next.shape))
        if self.r_next not in (-1.0, 0.0, 1.0):
            raise ValueError("reward %r outside {-1, 0, +1}" % self.r_next)


@dataclass
class ExploreSource:
    """A start state for offline exploration, from a successful sequence."""
    s: np.ndarray
    phase_row: np.ndarray
    gt_action: int
    gt_reward: float
    terminal: bool


@dataclass
class QConfig:
    gamma: float = 0.99
    eps_start: float = 0.1
    eps_end: float = 0.01
    iterations: int = 300
    minibatch: int = 32
    hidden: int = 64
    seed: int = 0
    explore: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        for e in (self.eps_start, self.eps_end):
            if not 0.0 <= e <= 1.0:
                raise ValueError("epsilon must be in [0, 1]")


class QNetwork:
    """Two fully connected layers mapping a latent state to action values."""

    def __init__(self, latent_dim, hidden=64, n_actions=N_ACTIONS, seed=0):
        rng = np.random.default_rng(seed)
        self.latent_dim = latent_dim
        self.hidden = hidden
        self.n_actions = n_actions
        self.layer1 = Dense(latent_dim, hidden, "tanh", rng)
        self.layer2 = Dense(hidden, n_actions, "identity", rng)

    def forward_t(self, s):
        return self.layer2.forward(self.layer1.forward(s))

    def values(self, s):
        """Action values for one state (1-D) or a batch (2-D), as numpy."""
        return np.asarray(self.forward_t(Tensor(s)).value)

    def parameters(self):
        out = {}
        for tag, layer in (("layer1", self.layer1), ("layer2", self.layer2)):
            for name, p in layer.parameters().items():
                out["%s.%s" % (tag, name)] = p
        return out

    def hyperparameters(self):
        return {"latent_dim": self.latent_dim, "hidden": self.hidden,
                "n_actions": self.n_actions}


class ModelLatentSpace:
    """Adapter: recognition posterior sampling + transition-mean dynamics."""

    def __init__(self, gen, encoder):
        self.gen = gen
        self.encoder = encoder
        self.latent_dim = encoder.latent_dim

    def encode_states(self, seq, rng):
        posterior = self.encoder.encode(seq.observations, seq.actions)
        noise = rng.standard_normal((len(posterior), self.latent_dim))
        return sample_posterior(posterior, noise)

    def encode_means(self, observations, actions):
        posterior = self.encoder.encode(observations, actions)
        return np.stack([p.mean for p in posterior])

    def step(self, s, phase_row):
        """Deterministic latent step: transition mean under a phase vector."""
        mean, _ = self.gen.transition_t(Tensor(np.atleast_2d(s)),
                                        Tensor(np.atleast_2d(phase_row)))
        out = np.asarray(mean.value)
        return out[0] if np.ndim(s) == 1 else out


def build_dgt(dataset, space, rng=None):
    """Recorded transitions: one tuple per consecutive timestep pair."""
    rng = rng if rng is not None else np.random.default_rng(0)
    tuples = []
    for seq in dataset:
        states = space.encode_states(seq, rng)
        t_len = len(seq)
        for t in range(t_len - 1):
            tuples.append(TransitionTuple(
                s=states[t],
                a_next=action_index(seq.actions[t], seq.actions[t + 1]),
                r_next=float(seq.rewards[t + 1]),
                s_next=states[t + 1],
                terminal=(t == t_len - 2),
            ))
    return tuples


def build_explore_sources(dataset, space, rng=None):
    """Latent start states from success-labeled sequences."""
    rng = rng if rng is not None else np.random.default_rng(0)
    sources = []
    for seq in dataset:
        if not seq.success:
            continue
        states = space.encode_states(seq, rng)
        for t in range(len(seq) - 1):
            sources.append(ExploreSource(
                s=states[t],
                phase_row=seq.actions[t],
                gt_action=action_index(seq.actions[t], seq.actions[t + 1]),
                gt_reward=float(seq.rewards[t + 1]),
                terminal=(t == len(seq) - 2),
            ))
    return sources


def _lands_in_final_phase(phase_next):
    return int(np.argmax(phase_next)) == len(phase_next) - 1


def explore(source, qnet, space, epsilon, rng):
    """One offline exploration step from a success state."""
    if rng.random() < epsilon:
        action = int(rng.integers(N_ACTIONS))
    else:
        action = policy(qnet, source.s)
    reward = source.gt_reward if action == source.gt_action else DEVIATION_REWARD
    phase_next = next_phase_onehot(source.phase_row, action)
    s_next = space.step(source.s, phase_next)
    # Reaching the final plan phase ends the episode: no bootstrap.
    terminal = source.terminal or _lands_in_final_phase(phase_next)
    return TransitionTuple(source.s, action, reward, s_next, terminal=terminal)


def _explore_all(sources, qnet, space, epsilon, rng):
    """Vectorized exploration over every source; same semantics as explore."""
    s_batch = np.stack([src.s for src in sources])
    greedy = np.argmax(qnet.values(s_batch), axis=1)
    randomize = rng.random(len(sources)) < epsilon
    random_actions = rng.integers(N_ACTIONS, size=len(sources))
    actions = np.where(randomize, random_actions, greedy)
    phases = np.stack([next_phase_onehot(src.phase_row, a)
                       for src, a in zip(sources, actions)])
    s_next = space.step(s_batch, phases)
    out = []
    for i, src in enumerate(sources):
        a = int(actions[i])
        reward = src.gt_reward if a == src.gt_action else DEVIATION_REWARD
        terminal = src.terminal or _lands_in_final_phase(phases[i])
        out.append(TransitionTuple(src.s, a, reward, s_next[i],
                                   terminal=terminal))
    return out


def q_target(tup, qnet, gamma):
    """TD target r + gamma * max_a Q(s', a); no bootstrap at terminals."""
    if tup.terminal:
        return tup.r_next
    return tup.r_next + gamma * float(np.max(qnet.values(tup.s_next)))


def policy(qnet, s):
    """Greedy action; ties break toward the lowest index."""
    return int(np.argmax(qnet.values(s)))


def train_q(dgt, dataset, space, config):
    """Algorithm: explore offline, then TD-regress the Q-network.

    Returns (qnet, curve) where curve rows are
    (iteration, mean TD loss, greedy-match rate against recorded actions).
    """
    if not dgt:
        raise ValueError("empty ground-truth transition set")
    rng = np.random.default_rng([config.seed, 17])
    qnet = QNetwork(space.latent_dim, config.hidden, N_ACTIONS,
                    seed=config.seed)
    params = [p for _, p in sorted(qnet.parameters().items())]
    opt = Adadelta(params)

    sources = []
    if config.explore:
        sources = build_explore_sources(dataset, space,
                                        np.random.default_rng([config.seed, 23]))
        if not sources:
            raise ValueError("no success sequences to explore from")

    curve = []
    for it in range(config.iterations):
        frac = it / max(config.iterations - 1, 1)
        epsilon = config.eps_start + (config.eps_end - config.eps_start) * frac
        pool = list(dgt)
        if config.explore:
            pool += _explore_all(sources, qnet, space, epsilon, rng)

        order = rng.permutation(len(pool))
        losses = []
        for lo in range(0, len(order), config.minibatch):
            batch = [pool[i] for i in order[lo:lo + config.minibatch]]
            s_batch = np.stack([t.s for t in batch])
            s_next = np.stack([t.s_next for t in batch])
            rewards = np.array([t.r_next for t in batch])
            terminal = np.array([t.terminal for t in batch])
            next_best = np.max(qnet.values(s_next), axis=1)
            targets = rewards + config.gamma * np.where(terminal, 0.0, next_best)

            mask = np.zeros((len(batch), N_ACTIONS))
            y_mat = np.zeros((len(batch), N_ACTIONS))
            for i, t in enumerate(batch):
                mask[i, t.a_next] = 1.0
                y_mat[i, t.a_next] = targets[i]
            with Graph() as graph:
                q_all = qnet.forward_t(Tensor(s_batch))
                diff = T.sub(T.mul(q_all, Tensor(mask)), Tensor(y_mat))
                loss = T.scale(T.total(T.square(diff)), 1.0 / len(batch))
                grads = graph.backward(loss, params)
            clip_global_norm(grads, 5.0)
            opt.step(grads)
            losses.append(float(loss.value))

        match_pool = sources if sources else [
            ExploreSource(t.s, None, t.a_next, t.r_next, t.terminal)
            for t in dgt]
        greedy = np.argmax(qnet.values(np.stack([m.s for m in match_pool])),
                           axis=1)
        match = float(np.mean(greedy == np.array([m.gt_action
                                                  for m in match_pool])))
        curve.append((it, float(np.mean(losses)), match))
    return qnet, curve
