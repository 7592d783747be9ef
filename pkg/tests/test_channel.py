import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from antsel.channel import (
    ChannelConfig,
    RealizationBatch,
    TapSet,
    frequency_response,
    generate_batch,
    generate_taps,
)
from antsel.errors import ConfigurationError


def brute_force_dft(taps, n_subcarriers):
    """Direct evaluation of sum_j c_j exp(-2j*pi*i*j/N), one entry at a time."""
    L, nr, nt = taps.shape
    out = np.zeros((n_subcarriers, nr, nt), dtype=complex)
    for i in range(n_subcarriers):
        for r in range(nr):
            for t in range(nt):
                acc = 0j
                for j in range(L):
                    acc += taps[j, r, t] * complex(np.cos(2 * np.pi * i * j / n_subcarriers),
                                                   -np.sin(2 * np.pi * i * j / n_subcarriers))
                out[i, r, t] = acc
    return out


@pytest.mark.parametrize("kwargs", [
    dict(n_tx=0, n_rx=2, n_subcarriers=4, n_taps=1),
    dict(n_tx=2, n_rx=0, n_subcarriers=4, n_taps=1),
    dict(n_tx=2, n_rx=2, n_subcarriers=0, n_taps=1),
    dict(n_tx=2, n_rx=2, n_subcarriers=4, n_taps=0),
    dict(n_tx=2, n_rx=2, n_subcarriers=2, n_taps=3),
    dict(n_tx=2.5, n_rx=2, n_subcarriers=4, n_taps=1),
])
def test_invalid_config(kwargs):
    with pytest.raises(ConfigurationError):
        ChannelConfig(**kwargs)


def test_config_from_json():
    cfg = ChannelConfig.from_json(
        '{"n_tx": 10, "n_rx": 8, "n_subcarriers": 16, "n_taps": 3, "seed": 42}'
    )
    assert cfg == ChannelConfig(10, 8, 16, 3, 42)
    assert ChannelConfig.from_json(json.dumps(cfg.to_dict())) == cfg
    with pytest.raises(ConfigurationError):
        ChannelConfig.from_json('{"n_tx": 10, "n_rx": 8, "n_subcarriers": 16}')
    with pytest.raises(ConfigurationError):
        ChannelConfig.from_json('{"n_tx": 1, "n_rx": 1, "n_subcarriers": 1, "n_taps": 1, "x": 1}')


def test_generate_taps_shape_and_single_tap_variance():
    cfg = ChannelConfig(n_tx=2, n_rx=2, n_subcarriers=4, n_taps=1)
    rng = np.random.default_rng(0)
    taps = generate_taps(cfg, rng)
    assert len(taps) == 1 and taps.shape == (2, 2)
    draws = np.concatenate([generate_taps(cfg, rng).taps.ravel() for _ in range(25_000)])
    assert draws.size == 100_000
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(1.0, rel=0.03)


def test_generate_taps_deterministic():
    cfg = ChannelConfig(n_tx=10, n_rx=10, n_subcarriers=16, n_taps=3)
    a = generate_taps(cfg, np.random.default_rng(42))
    b = generate_taps(cfg, np.random.default_rng(42))
    assert np.array_equal(a.taps, b.taps)


def test_generate_taps_variance_sums_to_one():
    cfg = ChannelConfig(n_tx=3, n_rx=4, n_subcarriers=8, n_taps=3)
    rng = np.random.default_rng(1)
    taps = np.stack([generate_taps(cfg, rng).taps for _ in range(10_000)])
    per_tap_var = np.mean(np.abs(taps) ** 2, axis=(0, 2, 3))
    assert taps[:, 0].size >= 100_000
    assert per_tap_var.sum() == pytest.approx(1.0, rel=0.03)
    assert per_tap_var == pytest.approx([1 / 3] * 3, rel=0.03)


def test_tap_entry_moments():
    cfg = ChannelConfig(n_tx=10, n_rx=10, n_subcarriers=8, n_taps=4)
    batch = generate_batch(cfg, 1000, seed=3)
    entries = batch.taps.reshape(len(batch), cfg.n_taps, -1)
    assert entries.size >= 100_000
    assert abs(entries.real.mean()) < 0.01
    assert abs(entries.imag.mean()) < 0.01
    assert np.sum(np.mean(np.abs(entries) ** 2, axis=(0, 2))) == pytest.approx(1.0, rel=0.03)
    # circular symmetry: real and imaginary halves share the power
    assert entries.real.var() == pytest.approx(entries.imag.var(), rel=0.03)


def test_generate_taps_rejects_non_generator():
    with pytest.raises(TypeError):
        generate_taps(ChannelConfig(2, 2, 4, 1), 42)


def test_single_tap_response_is_constant():
    c0 = np.array([[1 + 2j, -0.5j], [0.3, 4 - 1j]])
    real = frequency_response(TapSet(c0[None]), 4)
    assert real.freq_response.shape == (4, 2, 2)
    for i in range(4):
        assert np.array_equal(real.freq_response[i], c0)


def test_two_point_dft():
    rng = np.random.default_rng(5)
    c = rng.standard_normal((2, 3, 2)) + 1j * rng.standard_normal((2, 3, 2))
    real = frequency_response(TapSet(c), 2)
    np.testing.assert_allclose(real.freq_response[0], c[0] + c[1], atol=1e-15)
    np.testing.assert_allclose(real.freq_response[1], c[0] - c[1], atol=1e-15)


def test_dft_matches_brute_force():
    cfg = ChannelConfig(n_tx=3, n_rx=2, n_subcarriers=8, n_taps=3)
    taps = generate_taps(cfg, np.random.default_rng(9))
    real = frequency_response(taps, 8)
    assert np.max(np.abs(real.freq_response - brute_force_dft(taps.taps, 8))) <= 1e-12
    np.testing.assert_allclose(real.freq_response[0], taps.taps.sum(axis=0), atol=1e-12)


def test_frequency_response_rejects_too_few_subcarriers():
    taps = generate_taps(ChannelConfig(2, 2, 4, 3), np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        frequency_response(taps, 2)


def test_batch_basics():
    cfg = ChannelConfig(n_tx=2, n_rx=2, n_subcarriers=4, n_taps=2)
    one = generate_batch(cfg, 1, seed=0)
    assert len(one) == 1 and len(one.realizations) == 1
    a, b = generate_batch(cfg, 5, seed=11), generate_batch(cfg, 5, seed=11)
    assert np.array_equal(a.freq_response, b.freq_response)
    assert np.array_equal(a.taps, b.taps)
    assert not np.array_equal(a.taps, generate_batch(cfg, 5, seed=12).taps)
    with pytest.raises(ConfigurationError):
        generate_batch(cfg, 0, seed=0)


def test_batch_is_immutable():
    batch = generate_batch(ChannelConfig(2, 2, 4, 2), 3, seed=0)
    with pytest.raises(ValueError):
        batch.freq_response[0, 0, 0, 0] = 0
    with pytest.raises(ValueError):
        batch[0].freq_response[0, 0, 0] = 0


def test_batch_unit_channel_power():
    cfg = ChannelConfig(n_tx=2, n_rx=2, n_subcarriers=8, n_taps=3)
    batch = generate_batch(cfg, 200, seed=2)
    assert np.mean(np.abs(batch.freq_response) ** 2) == pytest.approx(1.0, rel=0.05)


def test_batch_realizations_agree_with_frequency_response():
    cfg = ChannelConfig(n_tx=4, n_rx=3, n_subcarriers=8, n_taps=3)
    batch = generate_batch(cfg, 4, seed=8)
    for real in batch:
        again = frequency_response(real.source_taps, cfg.n_subcarriers)
        assert np.max(np.abs(again.freq_response - real.freq_response)) <= 1e-12


def test_batch_gram():
    batch = generate_batch(ChannelConfig(4, 3, 8, 2), 3, seed=8)
    b, i = 2, 5
    c = batch.freq_response[b, i]
    np.testing.assert_allclose(batch.gram[b, i], c.conj().T @ c, atol=1e-12)


def test_batch_save_load_roundtrip(tmp_path):
    batch = generate_batch(ChannelConfig(5, 3, 8, 3, seed=4), 6, seed=2**63 + 5)
    path = tmp_path / "batch.npz"
    batch.save(path)
    back = RealizationBatch.load(path)
    assert back.config == batch.config
    assert back.seed == batch.seed
    assert back.taps.tobytes() == batch.taps.tobytes()
    assert back.freq_response.tobytes() == batch.freq_response.tobytes()


def test_from_realizations():
    cfg = ChannelConfig(3, 2, 4, 2)
    batch = generate_batch(cfg, 3, seed=1)
    rebuilt = RealizationBatch.from_realizations([batch[0], batch[0]], cfg)
    assert len(rebuilt) == 2
    assert np.array_equal(rebuilt.freq_response[1], batch.freq_response[0])
    with pytest.raises(ConfigurationError):
        RealizationBatch.from_realizations([], cfg)


@settings(max_examples=40, deadline=None)
@given(
    n_tx=st.integers(1, 6),
    n_rx=st.integers(1, 6),
    n_taps=st.integers(1, 5),
    extra=st.integers(0, 12),
    seed=st.integers(0, 2**32),
)
def test_parseval_and_dft_consistency(n_tx, n_rx, n_taps, extra, seed):
    cfg = ChannelConfig(n_tx, n_rx, n_taps + extra, n_taps)
    real = frequency_response(generate_taps(cfg, np.random.default_rng(seed)), cfg.n_subcarriers)
    c = real.source_taps.taps
    freq_energy = np.sum(np.abs(real.freq_response) ** 2) / cfg.n_subcarriers
    assert freq_energy == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-9)
    assert np.max(np.abs(real.freq_response - brute_force_dft(c, cfg.n_subcarriers))) <= 1e-12
