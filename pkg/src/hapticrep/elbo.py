"""Variational training objective and the joint training loop.

The objective for one sequence is

    -KL(q(s_1) || N(0, I))
    - (1/L) sum_l sum_{t>=2} KL(q(s_t) || p(s_t | s_{t-1}^(l), a_t))
    + (1/L) sum_l sum_t [ log p(o_t | s_t^(l)) + log p(r_t | s_t^(l)) ]

with s^(l) drawn by reparameterization from the recognition posterior.
Both parameter sets are updated jointly by Adadelta on minibatches, with
a global-norm gradient clip of 5.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .adadelta import Adadelta
from .gaussian import kl_diag_t, log_likelihood_t
from .layers import clip_global_norm
from .tensor import Graph, NumericalError, Tensor

CLIP_NORM = 5.0


@dataclass
class ElboConfig:
    epochs: int = 200
    minibatch: int = 8
    sample_count: int = 1
    seed: int = 0
    kl_weight: float = 1.0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.minibatch < 1:
            raise ValueError("minibatch must be >= 1")


@dataclass
class TrainReport:
    """Per-epoch means of the objective and its components."""

    rows: list = field(default_factory=list)  # (epoch, elbo, kl, ll_obs, ll_r, secs)

    def append(self, epoch, elbo, kl, ll_obs, ll_reward, seconds):
        self.rows.append((int(epoch), float(elbo), float(kl), float(ll_obs),
                          float(ll_reward), float(seconds)))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("epoch,elbo,kl,ll_obs,ll_reward,seconds\n")
            for row in self.rows:
                fh.write("%d,%r,%r,%r,%r,%.3f\n" % row)

    def elbo_curve(self):
        return np.array([r[1] for r in self.rows])


def sequence_noise(seed, epoch, seq_id, L, t_len, d):
    """Per-sequence reparameterization noise, independent of batch order."""
    rng = np.random.default_rng([seed, epoch, zlib.crc32(seq_id.encode())])
    return rng.standard_normal((L, t_len, d))


def elbo_terms_t(seq, gen, encoder, noise, kl_weight=1.0):
    """Tape-level ELBO for one sequence; returns a dict of scalar Tensors.

    ``noise`` has shape (L, T, d). Components 'kl', 'll_obs', 'll_reward'
    are the unweighted decomposition; 'elbo' applies ``kl_weight``.
    """
    t_len = len(seq.observations)
    if t_len < 2:
        raise ValueError("sequence %r too short for transition terms" % seq.id)
    noise = np.asarray(noise, dtype=np.float64)
    n_samples = noise.shape[0]
    means, stddevs = encoder.encode_stacked_t(seq.observations, seq.actions)

    d = means.value.shape[-1]
    kl_first = kl_diag_t(T.row(means, 0), T.row(stddevs, 0),
                         Tensor(np.zeros(d)), Tensor(np.ones(d)))
    q_mean_rest = T.rows(means, 1, t_len - 1)
    q_std_rest = T.rows(stddevs, 1, t_len - 1)
    actions_rest = seq.actions[1:]
    rewards_col = seq.rewards.reshape(t_len, 1)

    kl_trans = None
    recon_obs = None
    recon_reward = None
    for l in range(n_samples):
        states = T.add(means, T.mul(Tensor(noise[l]), stddevs))
        p_mean, p_std = gen.transition_t(T.rows(states, 0, t_len - 1),
                                         actions_rest)
        term = kl_diag_t(q_mean_rest, q_std_rest, p_mean, p_std)
        kl_trans = term if kl_trans is None else T.add(kl_trans, term)
        o_mean, o_std = gen.emit_observation_t(states)
        r_mean, r_std = gen.emit_reward_t(states)
        ll_o = log_likelihood_t(seq.observations, o_mean, o_std)
        ll_r = log_likelihood_t(rewards_col, r_mean, r_std)
        recon_obs = ll_o if recon_obs is None else T.add(recon_obs, ll_o)
        recon_reward = ll_r if recon_reward is None else T.add(recon_reward, ll_r)

    inv_l = 1.0 / n_samples
    kl_trans = T.scale(kl_trans, inv_l)
    recon_obs = T.scale(recon_obs, inv_l)
    recon_reward = T.scale(recon_reward, inv_l)
    kl_total = T.add(kl_first, kl_trans)
    elbo = T.add(T.scale(kl_total, -kl_weight), T.add(recon_obs, recon_reward))
    return {"elbo": elbo, "kl": kl_total, "ll_obs": recon_obs,
            "ll_reward": recon_reward}


def elbo_value(seq, gen, encoder, sample_count=1, noise=None, seed=0,
               kl_weight=1.0):
    """ELBO estimate for one sequence; returns (value, components dict)."""
    t_len = len(seq.observations)
    d = encoder.latent_dim
    if noise is None:
        noise = sequence_noise(seed, 0, seq.id, sample_count, t_len, d)
    terms = elbo_terms_t(seq, gen, encoder, noise, kl_weight)
    comps = {k: float(v.value) for k, v in terms.items()}
    return comps["elbo"], comps


def _ordered_params(gen, encoder):
    named = [("genmodel.%s" % k, v) for k, v in sorted(gen.parameters().items())]
    named += [("encoder.%s" % k, v) for k, v in sorted(encoder.parameters().items())]
    return named


def train(dataset, gen, encoder, config, on_epoch=None):
    """Joint Adadelta ascent on the ELBO over a dataset of sequences.

    Deterministic for a fixed config seed. Returns a TrainReport; the
    models are updated in place. ``on_epoch(epoch, gen, encoder)`` runs
    after each epoch when given (checkpointing hook).
    """
    if not dataset:
        raise ValueError("empty dataset")
    for seq in dataset:
        if len(seq) < 2:
            raise ValueError("sequence %r shorter than 2 steps" % seq.id)
    named = _ordered_params(gen, encoder)
    params = [p for _, p in named]
    opt = Adadelta(params, maximize=True)
    report = TrainReport()
    n_samples = config.sample_count
    d = encoder.latent_dim

    for epoch in range(config.epochs):
        start = time.perf_counter()
        order_rng = np.random.default_rng([config.seed, epoch, 1])
        order = order_rng.permutation(len(dataset))
        sums = np.zeros(4)
        for lo in range(0, len(order), config.minibatch):
            batch = [dataset[i] for i in order[lo:lo + config.minibatch]]
            with Graph() as graph:
                batch_elbo = None
                batch_kl = 0.0
                for seq in batch:
                    noise = sequence_noise(config.seed, epoch, seq.id,
                                           n_samples, len(seq), d)
                    try:
                        terms = elbo_terms_t(seq, gen, encoder, noise,
                                             config.kl_weight)
                    except NumericalError as exc:
                        raise NumericalError(
                            "non-finite ELBO at epoch %d, sequence %r: %s"
                            % (epoch, seq.id, exc)) from exc
                    batch_elbo = (terms["elbo"] if batch_elbo is None
                                  else T.add(batch_elbo, terms["elbo"]))
                    batch_kl += float(terms["kl"].value)
                    t_len = len(seq)
                    sums += np.array([float(terms["elbo"].value),
                                      float(terms["kl"].value),
                                      float(terms["ll_obs"].value),
                                      float(terms["ll_reward"].value)]) / t_len
                if batch_kl < 0:
                    raise AssertionError("negative KL component in minibatch")
                grads = graph.backward(batch_elbo, params)
            clip_global_norm(grads, CLIP_NORM)
            opt.step(grads)
        means = sums / len(dataset)
        report.append(epoch, means[0], means[1], means[2], means[3],
                      time.perf_counter() - start)
        if on_epoch is not None:
            on_epoch(epoch, gen, encoder)
    return report
