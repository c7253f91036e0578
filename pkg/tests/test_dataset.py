"""Sequence validation, JSONL round-trip, and the normalization contract."""

import numpy as np
import pytest

from hapticrep.dataset import (STATIONARY_CAP, HapticSequence,
                               NormalizationProfile, load_dataset, normalize,
                               save_dataset)
from hapticrep.genmodel import OBS_DIM


def valid_seq(t_len=5, seed=0, seq_id="s0"):
    rng = np.random.default_rng(seed)
    obs = np.clip(rng.standard_normal((t_len, OBS_DIM)) * 0.3, -1, 1)
    actions = np.zeros((t_len, 3))
    actions[:, 0] = 1.0
    rewards = np.zeros(t_len)
    rewards[-1] = 1.0
    return HapticSequence(seq_id, obs, actions, rewards, True)


class TestValidation:
    def test_too_short(self):
        with pytest.raises(ValueError):
            HapticSequence("x", np.zeros((1, OBS_DIM)), np.ones((1, 1)),
                           np.zeros(1), False)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            HapticSequence("x", np.zeros((3, OBS_DIM)),
                           np.ones((2, 1)), np.zeros(3), False)

    def test_wrong_channel_count(self):
        with pytest.raises(ValueError):
            HapticSequence("x", np.zeros((3, 10)), np.ones((3, 1)),
                           np.zeros(3), False)

    def test_out_of_range_observation(self):
        obs = np.zeros((3, OBS_DIM))
        obs[1, 2] = 1.5
        with pytest.raises(ValueError):
            HapticSequence("x", obs, np.ones((3, 1)), np.zeros(3), False)

    def test_non_onehot_actions(self):
        with pytest.raises(ValueError):
            HapticSequence("x", np.zeros((3, OBS_DIM)),
                           np.full((3, 2), 0.4), np.zeros(3), False)

    def test_invalid_reward(self):
        rewards = np.array([0.0, 0.5, 0.0])
        with pytest.raises(ValueError):
            HapticSequence("x", np.zeros((3, OBS_DIM)),
                           np.tile([1.0, 0.0], (3, 1)), rewards, False)

    def test_len(self):
        assert len(valid_seq(7)) == 7


class TestRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        seqs = [valid_seq(5, seed=1, seq_id="a"),
                valid_seq(9, seed=2, seq_id="b")]
        path = tmp_path / "d.jsonl"
        save_dataset(seqs, str(path))
        loaded = load_dataset(str(path))
        assert [s.id for s in loaded] == ["a", "b"]
        for orig, back in zip(seqs, loaded):
            np.testing.assert_array_equal(orig.observations, back.observations)
            np.testing.assert_array_equal(orig.actions, back.actions)
            np.testing.assert_array_equal(orig.rewards, back.rewards)
            assert orig.success == back.success

    def test_save_is_deterministic_bytes(self, tmp_path):
        seqs = [valid_seq(6, seed=3)]
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_dataset(seqs, str(p1))
        save_dataset(seqs, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_file_empty_dataset(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_dataset(str(path)) == []

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        save_dataset([valid_seq()], str(path))
        with open(path, "a") as fh:
            fh.write("{not json}\n")
        with pytest.raises(ValueError, match="line 2"):
            load_dataset(str(path))

    def test_mismatched_record_reports_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "x", "observations": [[0.0]], '
                        '"actions": [[1.0]], "rewards": [0.0], '
                        '"success": false}\n')
        with pytest.raises(ValueError, match="line 1"):
            load_dataset(str(path))


class TestNormalize:
    def test_constant_channel_zeros_and_flagged(self):
        raw = np.full((20, OBS_DIM), 3.7)
        out, profile = normalize(raw, grasp_index=0, stationary_window=10)
        np.testing.assert_array_equal(out, np.zeros_like(raw))
        assert profile.flagged_channels == list(range(OBS_DIM))
        np.testing.assert_array_equal(profile.scale, np.ones(OBS_DIM))

    def test_direct_scale_solve(self):
        raw = np.zeros((10, OBS_DIM))
        raw[1, 0] = 0.5  # stationary-window peak of channel 0 after offset
        out, profile = normalize(raw, grasp_index=0, stationary_window=5)
        np.testing.assert_allclose(profile.scale[0], 0.1)
        np.testing.assert_allclose(out[1, 0], STATIONARY_CAP)

    def test_offset_uses_grasp_index(self):
        raw = np.outer(np.arange(8.0), np.ones(OBS_DIM))
        out, profile = normalize(raw, grasp_index=2, stationary_window=4)
        np.testing.assert_array_equal(profile.offset, np.full(OBS_DIM, 2.0))
        assert np.all(out[2] == 0.0)

    def test_window_bounds_checked(self):
        with pytest.raises(ValueError):
            normalize(np.zeros((5, OBS_DIM)), grasp_index=3,
                      stationary_window=4)

    def test_output_always_clipped(self):
        rng = np.random.default_rng(1)
        raw = rng.standard_normal((30, OBS_DIM)) * 100
        out, _ = normalize(raw, 0, 10)
        assert np.all(np.abs(out) <= 1.0)

    def test_stationary_cap_random(self):
        rng = np.random.default_rng(2)
        for _ in range(20)         :
            raw = rng.standard_normal((25, OBS_DIM)) * rng.uniform(0.1, 50)
            out, _ = normalize(raw, 0, 12)
            assert np.max(np.abs(out[0:12])) <= STATIONARY_CAP + 1e-12

    def test_profile_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            NormalizationProfile(np.zeros(2), np.array([1.0, 0.0]))
