"""
Brute-force references for the closed forms in theory.py.

Nothing here shares code with the formulas it checks: cell MSE is integrated
on a dense midpoint grid, the centroid offset is averaged over every lattice
region in a box, and pipeline distortion is measured by coding AR(1) blocks.

All three work in fixed chunks so memory stays bounded and the sums are
always taken in the same order.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from analysis.theory import centroid_direct
from coding.errors import BbqError
from coding.pipeline import MIN_BLOCKS, PipelineConfig, code_blocks
from coding.transform import OrthogonalTransform
from sources.signals import Ar1Config, Ar1Stream

logger = logging.getLogger(__name__)

MAX_GRID_DIM = 3
ENUM_CHUNK = 65536


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 256
    # integration cell as multiples of the half-width a on every axis
    extent: Tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.resolution < 16:
            raise BbqError(f"grid resolution must be >= 16, got {self.resolution}")
        lo, hi = self.extent
        if not hi > lo:
            raise BbqError(f"empty extent {self.extent}")

    def axis(self, a: float) -> np.ndarray:
        lo, hi = self.extent
        h = (hi - lo) / self.resolution
        return a * (lo + h * (np.arange(self.resolution) + 0.5))


def cell_mse_numeric(n_dim: int, a: float, centroid: Sequence[float],
                     grid: GridSpec = GridSpec()) -> float:
    """Midpoint-rule mean of |x - centroid|^2 over the cube [-a, a]^N.

    Evaluated point by point on the full grid, one slice along the first
    axis at a time.
    """
    if not 1 <= n_dim <= MAX_GRID_DIM:
        raise BbqError(f"dense integration supports 1..{MAX_GRID_DIM} dims, got {n_dim}")
    if not a > 0:
        raise BbqError(f"half-width a must be > 0, got {a}")
    c = np.asarray(centroid, dtype=np.float64).reshape(-1)
    if c.size != n_dim:
        raise BbqError(f"centroid has {c.size} coordinates, expected {n_dim}")

    x = grid.axis(a)
    if n_dim == 1:
        return float(np.mean((x - c[0]) ** 2))
    rest = np.meshgrid(*([x] * (n_dim - 1)), indexing="ij")
    rest_sq = sum((r - ci) ** 2 for r, ci in zip(rest, c[1:]))
    total = 0.0
    for x0 in x:
        total += float(np.sum((x0 - c[0]) ** 2 + rest_sq))
    return total / grid.resolution ** n_dim


def cell_mse_convergence(n_dim: int, a: float, centroid: Sequence[float],
                         resolutions: Sequence[int], exact: float
                         ) -> List[Tuple[int, float]]:
    """(resolution, |numeric - exact|) for each resolution."""
    return [(r, abs(cell_mse_numeric(n_dim, a, centroid, GridSpec(r)) - exact))
            for r in resolutions]


def observed_order(errors: Sequence[Tuple[int, float]]) -> List[float]:
    """log(e_i / e_{i+1}) / log(r_{i+1} / r_i) between successive resolutions."""
    out = []
    for (r0, e0), (r1, e1) in zip(errors, errors[1:]):
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log(r1 / r0))
    return out


# ------------------------------------------------------- region enumeration

def _region_chunks(m_range: int, n_dim: int):
    side = 2 * m_range + 1
    total = side ** n_dim
    for start in range(0, total, ENUM_CHUNK):
        flat = np.arange(start, min(start + ENUM_CHUNK, total))
        yield np.stack(np.unravel_index(flat, (side,) * n_dim), axis=1) - m_range


def expected_d2_bruteforce(q1: float, q2: float, t: OrthogonalTransform,
                           m_range: int, weighting: str = "uniform",
                           sigma: Optional[float] = None) -> float:
    """Average |m - m_hat|^2 over every region index p in {-M..M}^N.

    weighting="uniform" counts every region once. weighting="gaussian" weighs
    region p by its probability under i.i.d. N(0, sigma^2) input samples, which
    departs from the uniform answer at low rate.
    """
    if not (q1 > 0 and q2 > 0) or q1 > q2:
        raise BbqError(f"need 0 < q1 <= q2, got q1={q1}, q2={q2}")
    if m_range < 1:
        raise BbqError(f"m_range must be >= 1, got {m_range}")
    if weighting not in ("uniform", "gaussian"):
        raise BbqError(f"unknown weighting {weighting!r}")
    if weighting == "gaussian" and not (sigma and sigma > 0):
        raise BbqError("gaussian weighting needs sigma > 0")
    if (2 * m_range + 1) ** t.size > 5e7:
        logger.warning("enumerating %d regions; this will be slow",
                       (2 * m_range + 1) ** t.size)

    num = 0.0
    den = 0.0
    for p in _region_chunks(m_range, t.size):
        pf = p.astype(np.float64)
        d = centroid_direct(pf, q1, q2, t) - q1 * pf
        d2 = np.sum(d * d, axis=1)
        if weighting == "uniform":
            num += float(np.sum(d2))
            den += float(len(d2))
        else:
            cell = norm.cdf(q1 * (pf + 0.5) / sigma) - norm.cdf(q1 * (pf - 0.5) / sigma)
            w = np.prod(cell, axis=1)
            num += float(np.sum(w * d2))
            den += float(np.sum(w))
    if den <= 0:
        raise BbqError("all region weights vanished; widen m_range")
    return num / den


# ----------------------------------------------------- pipeline distortion

def pipeline_mc_distortion(cfg: PipelineConfig, source: Optional[Ar1Config],
                           blocks: int, chunk_blocks: int = 4096) -> float:
    """Per-sample MSE of the main branch on `blocks` AR(1) blocks.

    source=None codes all-zero blocks, the zero-variance limit.
    """
    if blocks < 1:
        raise BbqError(f"blocks must be >= 1, got {blocks}")
    if blocks < MIN_BLOCKS:
        logger.warning("%d blocks is below %d; the estimate will be noisy",
                       blocks, MIN_BLOCKS)
    stream = Ar1Stream(source) if source is not None else None
    err = 0.0
    left = blocks
    while left > 0:
        n = min(chunk_blocks, left)
        if stream is None:
            x = np.zeros((n, cfg.block_len))
        else:
            x = stream.take_blocks(n, cfg.block_len)
        _, rec = code_blocks(x, cfg)
        err += float(np.sum((rec - x) ** 2))
        left -= n
    return err / (blocks * cfg.block_len)
