"""Recognition network: causality, streaming equivalence, sampling."""

import numpy as np
import pytest

from hapticrep.gaussian import SIGMA_FLOOR
from hapticrep.genmodel import OBS_DIM
from hapticrep.recognition import (RecognitionNetwork, export_embeddings,
                                   sample_posterior)
from hapticrep.tensor import ShapeError

RNG = np.random.default_rng(42)


def make_inputs(t_len, action_dim=3):
    obs = np.clip(RNG.standard_normal((t_len, OBS_DIM)) * 0.2, -1, 1)
    actions = np.zeros((t_len, action_dim))
    actions[np.arange(t_len), RNG.integers(action_dim, size=t_len)] = 1.0
    return obs, actions


class TestEncode:
    def test_single_step_zero_weights(self):
        net = RecognitionNetwork(latent_dim=2, hidden1=3, hidden2=3)
        for p in net.parameters().values():
            p.value[...] = 0.0
        post = net.encode(np.zeros((1, OBS_DIM)), np.array([[1.0, 0, 0]]))
        assert len(post) == 1
        np.testing.assert_array_equal(post[0].mean, np.zeros(2))
        np.testing.assert_allclose(post[0].stddev,
                                   np.full(2, np.log(2.0) + SIGMA_FLOOR))

    def test_causality_prefix_equals_full(self):
        net = RecognitionNetwork(latent_dim=4, hidden1=8, hidden2=8, seed=1)
        obs, actions = make_inputs(12)
        full = net.encode(obs, actions)
        for t in (1, 5, 11):
            prefix = net.encode(obs[:t + 1], actions[:t + 1])
            for k in range(t + 1):
                np.testing.assert_array_equal(prefix[k].mean, full[k].mean)
                np.testing.assert_array_equal(prefix[k].stddev,
                                              full[k].stddev)

    def test_stddevs_above_floor(self):
        net = RecognitionNetwork(seed=3)
        obs, actions = make_inputs(20)
        for p in net.encode(obs, actions):
            assert np.all(p.stddev >= SIGMA_FLOOR)

    def test_length_mismatch(self):
        net = RecognitionNetwork()
        with pytest.raises(ShapeError):
            net.encode(np.zeros((3, OBS_DIM)), np.zeros((2, 3)))

    def test_observation_bounds_enforced(self):
        net = RecognitionNetwork()
        obs = np.zeros((2, OBS_DIM))
        obs[0, 0] = 1.5
        with pytest.raises(ValueError):
            net.encode(obs, np.tile([1.0, 0, 0], (2, 1)))

    def test_wrong_obs_width(self):
        net = RecognitionNetwork()
        with pytest.raises(ShapeError):
            net.encode(np.zeros((2, 10)), np.zeros((2, 3)))


class TestStream:
    def test_stream_matches_batch_encode(self):
        net = RecognitionNetwork(latent_dim=5, seed=7)
        obs, actions = make_inputs(15)
        batch = net.encode(obs, actions)
        stream = net.stream()
        for t in range(15):
            post = stream.push(obs[t], actions[t])
            np.testing.assert_allclose(post.mean, batch[t].mean, atol=1e-12)
            np.testing.assert_allclose(post.stddev, batch[t].stddev,
                                       atol=1e-12)


class TestSampling:
    def test_zero_noise_returns_means(self):
        net = RecognitionNetwork(latent_dim=3, seed=2)
        obs, actions = make_inputs(6)
        post = net.encode(obs, actions)
        states = sample_posterior(post, np.zeros((6, 3)))
        np.testing.assert_array_equal(states,
                                      np.stack([p.mean for p in post]))

    def test_unit_noise_one_sigma(self):
        net = RecognitionNetwork(latent_dim=3, seed=2)
        obs, actions = make_inputs(4)
        post = net.encode(obs, actions)
        states = sample_posterior(post, np.ones((4, 3)))
        np.testing.assert_array_equal(
            states, np.stack([p.mean + p.stddev for p in post]))

    def test_noise_length_mismatch(self):
        net = RecognitionNetwork(latent_dim=3, seed=2)
        obs, actions = make_inputs(4)
        post = net.encode(obs, actions)
        with pytest.raises(ShapeError):
            sample_posterior(post, np.zeros((3, 3)))

    def test_monte_carlo_mean(self):
        net = RecognitionNetwork(latent_dim=2, seed=4)
        obs, actions = make_inputs(3)
        post = net.encode(obs, actions)
        rng = np.random.default_rng(0)
        n = 50_000
        draws = np.stack([sample_posterior(post, rng.standard_normal((3, 2)))
                          for _ in range(n)])
        emp = draws.mean(axis=0)
        mu = np.stack([p.mean for p in post])
        sd = np.stack([p.stddev for p in post])
        assert np.all(np.abs(emp - mu) < 3 * sd / np.sqrt(n) + 1e-12)


class TestExport:
    def test_embedding_csv_layout(self, tmp_path):
        from hapticrep.dataset import HapticSequence
        net = RecognitionNetwork(latent_dim=3, seed=1)
        obs, actions = make_inputs(4)
        seq = HapticSequence("ep-0", obs, actions, np.zeros(4), True)
        out = tmp_path / "emb.csv"
        export_embeddings([seq], net, str(out))
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "sequence_id,t,z0,z1,z2"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert first[0] == "ep-0" and first[1] == "0"
        post = net.encode(obs, actions)
        np.testing.assert_allclose([float(v) for v in first[2:]],
                                   post[0].mean)
