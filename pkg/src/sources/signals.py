"""
Seeded random sources: stationary AR(1) sequences, block segmentation, and
synthetic frame sequences for the predictive-coding checks.

Generator: numpy PCG64 seeded with the 64-bit config seed, Gaussian draws via
numpy's ziggurat (Generator.standard_normal). Output is bit-identical for
the same seed within one numpy version; across implementations only the
statistics agree.

The AR(1) recursion x[n] = rho*x[n-1] + e[n] runs through scipy's lfilter.
The first sample is drawn from the stationary marginal N(0, sigma^2), so no
burn-in is needed, and a stream can be continued chunk by chunk by carrying
the last sample into the filter state.

THE DEFAULT SIGMA
-----------------
With unit innovation variance the stationary standard deviation is
1/sqrt(1 - rho^2): 1.0911 for rho = 0.4 and 2.2942 for rho = 0.9. Leaving
sigma unset gives exactly that.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.signal import lfilter

from coding.errors import BbqError

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


def stationary_sigma(rho: float, innovation_sigma: float = 1.0) -> float:
    if not -1.0 < rho < 1.0:
        raise BbqError(f"rho must be in (-1, 1), got {rho}")
    return innovation_sigma / math.sqrt(1.0 - rho * rho)


def _check_seed(seed: int) -> None:
    if not 0 <= int(seed) < SEED_LIMIT:
        raise BbqError(f"seed must be an unsigned 64-bit integer, got {seed}")


def make_rng(seed: int) -> np.random.Generator:
    _check_seed(seed)
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass
class Ar1Config:
    rho: float
    sigma: Optional[float] = None    # marginal std; None = unit innovation
    length: int = 1
    seed: int = 0

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise BbqError(f"rho must be in (-1, 1), got {self.rho}")
        if self.sigma is None:
            self.sigma = stationary_sigma(self.rho)
        if not self.sigma > 0:
            raise BbqError(f"sigma must be > 0, got {self.sigma}")
        if self.length < 1:
            raise BbqError(f"length must be >= 1, got {self.length}")
        _check_seed(self.seed)

    @property
    def innovation_sigma(self) -> float:
        return self.sigma * math.sqrt(1.0 - self.rho * self.rho)


@dataclass
class FrameSequenceConfig:
    frame_count: int
    pixels_per_frame: int
    spatial_rho: float = 0.9
    temporal_innovation_sigma: float = 1.0    # 0 is a static scene
    base_sigma: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.frame_count < 1:
            raise BbqError(f"frame_count must be >= 1, got {self.frame_count}")
        if self.pixels_per_frame < 1:
            raise BbqError(f"pixels_per_frame must be >= 1, got {self.pixels_per_frame}")
        if not -1.0 < self.spatial_rho < 1.0:
            raise BbqError(f"spatial_rho must be in (-1, 1), got {self.spatial_rho}")
        if self.temporal_innovation_sigma < 0:
            raise BbqError("temporal_innovation_sigma must be >= 0, "
                           f"got {self.temporal_innovation_sigma}")
        if not self.base_sigma > 0:
            raise BbqError(f"base_sigma must be > 0, got {self.base_sigma}")
        _check_seed(self.seed)


def _ar1(rng: np.random.Generator, n: int, rho: float, sigma: float,
         prev: Optional[float] = None) -> np.ndarray:
    z = rng.standard_normal(n)
    e = z * (sigma * math.sqrt(1.0 - rho * rho))
    if prev is None:
        e[0] = z[0] * sigma
        return lfilter([1.0], [1.0, -rho], e)
    y, _ = lfilter([1.0], [1.0, -rho], e, zi=[rho * prev])
    return y


class Ar1Stream:
    """One AR(1) realization handed out in consecutive chunks.

    take(a) followed by take(b) gives the same samples as a single take(a+b).
    """

    def __init__(self, cfg: Ar1Config):
        self.cfg = cfg
        self.rng = make_rng(cfg.seed)
        self._last: Optional[float] = None
        self.drawn = 0

    def take(self, n: int) -> np.ndarray:
        if n < 1:
            raise BbqError(f"chunk length must be >= 1, got {n}")
        y = _ar1(self.rng, n, self.cfg.rho, self.cfg.sigma, self._last)
        self._last = float(y[-1])
        self.drawn += n
        return y

    def take_blocks(self, n_blocks: int, block_len: int) -> np.ndarray:
        """The next n_blocks disjoint segments as a (n_blocks, block_len) array."""
        return self.take(n_blocks * block_len).reshape(n_blocks, block_len)


def gen_ar1(cfg: Ar1Config) -> np.ndarray:
    return Ar1Stream(cfg).take(cfg.length)


def blocks(x: np.ndarray, block_len: int) -> List[np.ndarray]:
    """Consecutive disjoint segments; the trailing remainder is dropped."""
    if block_len < 1:
        raise BbqError(f"block_len must be >= 1, got {block_len}")
    x = np.asarray(x, dtype=np.float64)
    count = len(x) // block_len
    return [x[i * block_len:(i + 1) * block_len] for i in range(count)]


def ar1_blocks(cfg: Ar1Config, block_len: int, n_blocks: int) -> np.ndarray:
    if block_len < 1 or n_blocks < 1:
        raise BbqError("block_len and n_blocks must be >= 1")
    return Ar1Stream(cfg).take_blocks(n_blocks, block_len)


def gen_frame_sequence(cfg: FrameSequenceConfig) -> List[np.ndarray]:
    """Frame 0 is a spatial AR(1) field; each later frame adds a fresh one.

    The scene drifts as a random walk in time, so the previous frame is a
    good but imperfect prediction of the next.
    """
    rng = make_rng(cfg.seed)
    n = cfg.pixels_per_frame
    frames = [_ar1(rng, n, cfg.spatial_rho, cfg.base_sigma)]
    for _ in range(1, cfg.frame_count):
        if cfg.temporal_innovation_sigma > 0:
            step = _ar1(rng, n, cfg.spatial_rho, cfg.temporal_innovation_sigma)
        else:
            step = np.zeros(n)
        frames.append(frames[-1] + step)
    logger.debug("generated %d frames of %d pixels", len(frames), n)
    return frames
