"""Ergodic capacity of a transmit-antenna subset.

For a subset of ``n_t`` columns ``H_i`` of each subcarrier response the
capacity of one realization is::

    (1 / N_s) * sum_i log2 det(I + (rho / n_t) * H_i H_i^H)

and the ergodic capacity is its mean over a :class:`RealizationBatch`.
Determinants are evaluated through a Cholesky factor (sum of the logs of
the diagonal), never as a raw product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelRealization, RealizationBatch
from .errors import ConfigurationError, DimensionError, NumericError


@dataclass(frozen=True)
class AntennaSubset:
    """``n_t`` active antennas out of ``n_tx``; ``positions`` is sorted."""

    positions: tuple[int, ...]
    n_tx: int

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if self.n_tx < 1:
            raise ConfigurationError(f"n_tx must be >= 1, got {self.n_tx}")
        if not pos:
            raise ConfigurationError("a subset needs at least one antenna")
        if len(set(pos)) != len(pos):
            raise ConfigurationError(f"repeated antenna index in {pos}")
        for p in pos:
            if not 0 <= p < self.n_tx:
                raise DimensionError(f"antenna index {p} outside [0, {self.n_tx - 1}]")
        object.__setattr__(self, "positions", tuple(sorted(pos)))

    @classmethod
    def from_positions(cls, positions: Iterable[int], n_tx: int) -> AntennaSubset:
        return cls(tuple(positions), n_tx)

    @classmethod
    def from_mask(cls, mask: Sequence) -> AntennaSubset:
        mask = np.asarray(mask)
        if mask.ndim != 1:
            raise ConfigurationError("mask must be one-dimensional")
        if not np.isin(mask, (0, 1)).all():
            raise ConfigurationError(f"mask must hold only 0/1 values, got {mask}")
        return cls(tuple(np.flatnonzero(mask)), mask.size)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_tx, dtype=bool)
        m[list(self.positions)] = True
        return m

    @property
    def n_t(self) -> int:
        return len(self.positions)

    def __len__(self):
        return len(self.positions)

    def __str__(self):
        return ";".join(map(str, self.positions))


@dataclass(frozen=True)
class Snr:
    db: float

    def __post_init__(self):
        if not math.isfinite(self.db):
            raise ConfigurationError(f"SNR must be finite, got {self.db}")
        object.__setattr__(self, "db", float(self.db))
        try:
            rho = self.linear
        except OverflowError:
            rho = math.inf
        if not 0 < rho < math.inf:
            raise ConfigurationError(f"SNR {self.db} dB is outside the representable range")

    @classmethod
    def from_linear(cls, rho: float) -> Snr:
        if not rho > 0 or not math.isfinite(rho):
            raise ConfigurationError(f"linear SNR must be positive and finite, got {rho}")
        return cls(10.0 * math.log10(rho))

    @property
    def linear(self) -> float:
        return 10.0 ** (self.db / 10.0)


@dataclass(frozen=True)
class CapacityEstimate:
    bits_per_s_per_hz: float
    n_realizations: int
    subset: AntennaSubset
    snr: Snr

    def to_dict(self) -> dict:
        return {
            "bits_per_s_per_hz": self.bits_per_s_per_hz,
            "n_realizations": self.n_realizations,
            "subset": list(self.subset.positions),
            "snr_db": self.snr.db,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def log2det_eye_plus(gram: np.ndarray, scale: float) -> np.ndarray:
    """``log2 det(I + scale * gram)`` over the trailing two axes.

    ``gram`` must be Hermitian positive semidefinite; only its lower
    triangle is read.
    """
    gram = np.asarray(gram)
    k = gram.shape[-1]
    if k == 0:
        return np.zeros(gram.shape[:-2])
    a = np.eye(k) + scale * gram
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Cholesky factorization failed: {exc}") from exc
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return np.maximum(2.0 * np.sum(np.log2(diag), axis=-1), 0.0)


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite entries in {what}")


def select_columns(response_matrix: np.ndarray, subset: AntennaSubset) -> np.ndarray:
    """Columns of ``response_matrix`` at ``subset.positions``.

    Leading axes are carried through, so a stack of subcarrier matrices can
    be restricted in one call.
    """
    m = np.asarray(response_matrix)
    if m.ndim < 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if m.shape[-1] != subset.n_tx:
        raise DimensionError(
            f"matrix has {m.shape[-1]} columns but subset is over {subset.n_tx} antennas"
        )
    return m[..., list(subset.positions)]


def subcarrier_capacity(h_sub: np.ndarray, snr: Snr, n_t: int | None = None) -> float:
    h = np.asarray(h_sub, dtype=np.complex128)
    if h.ndim != 2:
        raise DimensionError(f"h_sub must be a matrix, got shape {h.shape}")
    if n_t is None:
        n_t = h.shape[1]
    if n_t != h.shape[1] or n_t < 1:
        raise DimensionError(f"n_t={n_t} does not match {h.shape[1]} columns")
    _check_finite(h, "h_sub")
    return float(log2det_eye_plus(h @ h.conj().T, snr.linear / n_t))


def _per_subcarrier(gram_sub: np.ndarray, snr: Snr, n_t: int) -> np.ndarray:
    _check_finite(gram_sub, "channel")
    return log2det_eye_plus(gram_sub, snr.linear / n_t)


def realization_capacity(
    realization: ChannelRealization, subset: AntennaSubset, snr: Snr
) -> float:
    # Sylvester: det(I_nr + a H H^H) = det(I_nt + a H^H H)
    h = select_columns(realization.freq_response, subset)
    gram = np.conj(np.swapaxes(h, -1, -2)) @ h
    return float(np.mean(_per_subcarrier(gram, snr, subset.n_t)))


def ergodic_capacity(
    batch: RealizationBatch, subset: AntennaSubset, snr: Snr
) -> CapacityEstimate:
    if batch is None or len(batch) == 0:
        raise ConfigurationError("ergodic capacity needs a non-empty batch")
    if subset.n_tx != batch.n_tx:
        raise DimensionError(
            f"subset is over {subset.n_tx} antennas but the batch has {batch.n_tx}"
        )
    if not batch.is_finite:
        raise NumericError("non-finite entries in channel batch")
    idx = np.asarray(subset.positions)
    gram = batch.gram[:, :, idx[:, None], idx]
    per_realization = np.mean(log2det_eye_plus(gram, snr.linear / subset.n_t), axis=-1)
    return CapacityEstimate(float(np.mean(per_realization)), len(batch), subset, snr)
