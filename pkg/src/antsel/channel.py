"""L-tap frequency-selective Rayleigh MIMO channels.

Every tap is an ``(n_rx, n_tx)`` matrix of IID circularly-symmetric complex
Gaussian entries with variance ``1 / n_taps``, so the total power per
transmit/receive pair is one. Subcarrier responses are the ``n_subcarriers``
point DFT of the tap sequence::

    C_i = sum_j c_j * exp(-2j * pi * i * j / n_subcarriers)

Columns index transmit antennas throughout, so antenna selection is column
selection.

Randomness comes from :func:`numpy.random.default_rng` (PCG64). Gaussian
entries are drawn with ``Generator.standard_normal`` (ziggurat), real part
first, then imaginary part, over the full ``(batch, n_taps, n_rx, n_tx)``
array in C order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

_INT_FIELDS = ("n_tx", "n_rx", "n_subcarriers", "n_taps", "seed")


@dataclass(frozen=True)
class ChannelConfig:
    n_tx: int
    n_rx: int
    n_subcarriers: int
    n_taps: int
    seed: int = 0

    def __post_init__(self):
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        for name in ("n_tx", "n_rx", "n_subcarriers", "n_taps"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_taps > self.n_subcarriers:
            raise ConfigurationError(
                f"n_taps ({self.n_taps}) must not exceed n_subcarriers ({self.n_subcarriers})"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> ChannelConfig:
        if not isinstance(data, dict):
            raise ConfigurationError("channel config must be a JSON object")
        unknown = set(data) - set(_INT_FIELDS)
        if unknown:
            raise ConfigurationError(f"unknown channel config keys: {sorted(unknown)}")
        missing = [k for k in _INT_FIELDS[:4] if k not in data]
        if missing:
            raise ConfigurationError(f"missing channel config keys: {missing}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> ChannelConfig:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class TapSet:
    """Time-domain taps, stacked as an ``(n_taps, n_rx, n_tx)`` complex array."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        if taps.ndim != 3 or taps.shape[0] < 1:
            raise ConfigurationError(f"taps must have shape (L, n_rx, n_tx), got {taps.shape}")
        if taps.flags.writeable:
            taps = taps.copy()
            taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    def __len__(self):
        return self.taps.shape[0]

    def __getitem__(self, j):
        return self.taps[j]

    @property
    def shape(self):
        return self.taps.shape[1:]


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Per-subcarrier responses ``(n_subcarriers, n_rx, n_tx)`` and their taps."""

    freq_response: np.ndarray
    source_taps: TapSet

    def __post_init__(self):
        fr = np.asarray(self.freq_response, dtype=np.complex128)
        if fr.ndim != 3 or fr.shape[1:] != self.source_taps.shape:
            raise ConfigurationError(
                f"freq_response shape {fr.shape} inconsistent with taps {self.source_taps.shape}"
            )
        if fr.flags.writeable:
            fr = fr.copy()
            fr.flags.writeable = False
        object.__setattr__(self, "freq_response", fr)

    @property
    def n_subcarriers(self):
        return self.freq_response.shape[0]

    @property
    def n_rx(self):
        return self.freq_response.shape[1]

    @property
    def n_tx(self):
        return self.freq_response.shape[2]


def _check_rng(rng):
    if not isinstance(rng, np.random.Generator):
        raise TypeError("rng must be a numpy.random.Generator")


def _draw_taps(config: ChannelConfig, rng: np.random.Generator, batch_shape=()):
    shape = tuple(batch_shape) + (config.n_taps, config.n_rx, config.n_tx)
    scale = np.sqrt(0.5 / config.n_taps)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def generate_taps(config: ChannelConfig, rng: np.random.Generator) -> TapSet:
    if not isinstance(config, ChannelConfig):
        raise ConfigurationError("config must be a ChannelConfig")
    _check_rng(rng)
    return TapSet(_draw_taps(config, rng))


def _dft(taps: np.ndarray, n_subcarriers: int) -> np.ndarray:
    # zero-padded FFT over the tap axis gives sum_j c_j exp(-2j*pi*i*j/N)
    return np.fft.fft(taps, n=n_subcarriers, axis=-3)


def frequency_response(taps: TapSet, n_subcarriers: int) -> ChannelRealization:
    if not isinstance(taps, TapSet):
        taps = TapSet(taps)
    if n_subcarriers < len(taps):
        raise ConfigurationError(
            f"n_subcarriers ({n_subcarriers}) must be >= number of taps ({len(taps)})"
        )
    return ChannelRealization(_dft(taps.taps, n_subcarriers), taps)


@dataclass(frozen=True, eq=False)
class RealizationBatch:
    """An immutable Monte-Carlo sample of channel realizations.

    ``taps`` is ``(batch, n_taps, n_rx, n_tx)`` and ``freq_response`` is
    ``(batch, n_subcarriers, n_rx, n_tx)``. Per-realization views are
    available through :attr:`realizations` and indexing.
    """

    config: ChannelConfig
    seed: int
    taps: np.ndarray
    freq_response: np.ndarray

    def __post_init__(self):
        c = self.config
        taps = np.array(self.taps, dtype=np.complex128)
        fr = np.array(self.freq_response, dtype=np.complex128)
        if taps.ndim != 4 or taps.shape[1:] != (c.n_taps, c.n_rx, c.n_tx):
            raise ConfigurationError(f"taps shape {taps.shape} does not match {c}")
        if fr.shape != (taps.shape[0], c.n_subcarriers, c.n_rx, c.n_tx):
            raise ConfigurationError(f"freq_response shape {fr.shape} does not match {c}")
        if taps.shape[0] < 1:
            raise ConfigurationError("a batch needs at least one realization")
        taps.flags.writeable = False
        fr.flags.writeable = False
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "freq_response", fr)

    def __len__(self):
        return self.taps.shape[0]

    def __getitem__(self, b) -> ChannelRealization:
        return ChannelRealization(self.freq_response[b], TapSet(self.taps[b]))

    def __iter__(self):
        return (self[b] for b in range(len(self)))

    @property
    def realizations(self) -> list[ChannelRealization]:
        return list(self)

    @property
    def n_tx(self):
        return self.config.n_tx

    @cached_property
    def gram(self) -> np.ndarray:
        """``C^H C`` for every realization and subcarrier, ``(batch, N_s, n_tx, n_tx)``."""
        fr = self.freq_response
        g = np.conj(np.swapaxes(fr, -1, -2)) @ fr
        g.flags.writeable = False
        return g

    @cached_property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.freq_response)))

    @classmethod
    def from_realizations(cls, realizations, config: ChannelConfig, seed: int = 0):
        realizations = list(realizations)
        if not realizations:
            raise ConfigurationError("a batch needs at least one realization")
        return cls(
            config=config,
            seed=seed,
            taps=np.stack([r.source_taps.taps for r in realizations]),
            freq_response=np.stack([r.freq_response for r in realizations]),
        )

    def save(self, path) -> None:
        """Write the batch to an ``.npz`` archive (bit-exact round trip)."""
        with open(path, "wb") as fh:
            np.savez(
                fh,
                config=np.array(json.dumps(self.config.to_dict())),
                seed=np.array(self.seed, dtype=np.uint64),
                taps=self.taps,
                freq_response=self.freq_response,
            )

    @classmethod
    def load(cls, path) -> RealizationBatch:
        with np.load(Path(path), allow_pickle=False) as data:
            return cls(
                config=ChannelConfig.from_json(str(data["config"])),
                seed=int(data["seed"]),
                taps=data["taps"],
                freq_response=data["freq_response"],
            )


def generate_batch(config: ChannelConfig, batch_size: int, seed: int) -> RealizationBatch:
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")
    rng = np.random.default_rng(seed)
    taps = _draw_taps(config, rng, batch_shape=(batch_size,))
    return RealizationBatch(config, seed, taps, _dft(taps, config.n_subcarriers))
