"""Counter-based random streams with per-observation random access.

Every observation vector is addressed by (master_seed, trial, index): the
coordinates of observation ``i`` in trial ``t`` are a pure function of that
triple, independent of how the stream is chunked or of any draws made before.
This is what makes ensembles reproducible under any threading layout: workers
never share mutable generator state, they just compute at disjoint addresses.

Implementation: Philox4x64 keyed by (master_seed, trial). The Philox counter
advances one unit per 4 generated doubles, so observation ``i`` of dimension
``d`` owns the block range ``[i*B, (i+1)*B)`` with ``B = ceil(d/4)`` blocks,
and positioning is exact: seeking to observation ``i`` means constructing a
generator whose counter starts at block ``i*B``. Any unused doubles at the
tail of an observation's block budget are discarded, never carried over.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.random import Generator, Philox

_DOUBLES_PER_BLOCK = 4  # Philox4x64 emits 4 uint64 words per counter increment

_U64 = 1 << 64


def _check_u64(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if not 0 <= value < _U64:
        raise ValueError(f"{name} must lie in [0, 2**64), got {value}")
    return value


class ObservationStream:
    """Deterministic stream of iid Exponential(1) observation vectors.

    Parameters
    ----------
    master_seed : int
        Ensemble-level seed, in ``[0, 2**64)``.
    trial : int, optional
        Trial index within the ensemble.  Distinct trials give statistically
        independent streams under the same master seed.
    dim : int, optional
        Number of coordinates per observation (default 1).

    Notes
    -----
    ``take(k)`` returns the next ``k`` observations and advances the cursor;
    ``seek(i)`` repositions it.  The sequence of observations is a function of
    the address alone, so ``take(5)`` followed by ``take(3)`` yields bitwise
    the same 8 vectors as a single ``take(8)``.
    """

    def __init__(self, master_seed: int, trial: int = 0, dim: int = 1):
        self.master_seed = _check_u64(master_seed, "master_seed")
        self.trial = _check_u64(trial, "trial")
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        self._blocks_per_obs = -(-self.dim // _DOUBLES_PER_BLOCK)
        self._key = np.array([self.master_seed, self.trial], dtype=np.uint64)
        self.index = 0  # index of the next observation to be produced

    def _generator_at(self, obs_index: int) -> Generator:
        # Philox counter is 256-bit, little word first; block address fits the
        # low word for any realistic index (n_max * B << 2**64).
        block = obs_index * self._blocks_per_obs
        counter = np.array([block % _U64, block // _U64, 0, 0], dtype=np.uint64)
        return Generator(Philox(key=self._key, counter=counter))

    def seek(self, obs_index: int) -> None:
        """Position the cursor so the next ``take`` starts at ``obs_index``."""
        if not isinstance(obs_index, (int, np.integer)) or obs_index < 0:
            raise ValueError(f"obs_index must be a nonnegative integer, got {obs_index!r}")
        self.index = int(obs_index)

    def take_uniforms(self, count: int) -> np.ndarray:
        """Next ``count`` observation slots as raw U(0,1) matrices.

        Returns a ``(count, dim)`` array of uniforms on [0, 1) and advances
        the cursor by ``count``.  Each observation still consumes its full
        block budget, so uniform and exponential reads at the same address
        see the same underlying bits.
        """
        if not isinstance(count, (int, np.integer)) or count < 0:
            raise ValueError(f"count must be a nonnegative integer, got {count!r}")
        count = int(count)
        if count == 0:
            return np.empty((0, self.dim), dtype=np.float64)
        gen = self._generator_at(self.index)
        width = self._blocks_per_obs * _DOUBLES_PER_BLOCK
        raw = gen.random(count * width).reshape(count, width)
        self.index += count
        return raw[:, : self.dim]

    def take(self, count: int) -> np.ndarray:
        """Next ``count`` observations as a ``(count, dim)`` array.

        Coordinates are iid Exponential(1), obtained as -log1p(-U) so the
        value is finite and nonnegative for every U in [0, 1).
        """
        return -np.log1p(-self.take_uniforms(count))

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"ObservationStream(master_seed={self.master_seed}, trial={self.trial}, "
            f"dim={self.dim}, index={self.index})"
        )


def exponential_quantile(u):
    """Exponential(1) quantile function, stable near u=0 and u=1-eps."""
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0.0) | (u >= 1.0)):
        raise ValueError("u must lie in [0, 1)")
    return -np.log1p(-u)


def stream_checksum(master_seed: int, trial: int, dim: int, count: int) -> float:
    """Sum of the first ``count`` observation vectors, for regression pins."""
    stream = ObservationStream(master_seed, trial, dim)
    return float(math.fsum(stream.take(count).ravel().tolist()))
