"""
Executable coding chains for a transform codec fed by a baseband quantizer.

MAIN BRANCH
-----------
    x -> Q1 -> T -> Q2 -> T^-1 -> Q1 -> x_hat

Q1 is the baseband quantizer (step q1), Q2 the codec quantizer acting on
transform coefficients (step q2 >= q1). The codec's output is rounded back
onto the baseband lattice, so the baseband quantizer acts twice. Dropping
the last Q1 gives the one-baseband chain.

PREDICTIVE LOOP
---------------
With a prediction J for frame I, the codec sees the residue Q1(I) - J and
adds J back before the final rounding:

    I_hat = Q1( T^-1 Q2( T [Q1(I) - J] ) + J )

Splitting J = J%q1 + Q1(J) and using the lattice shift property of Q1 gives
an equivalent residue-domain form (code_equivalent). When q1 is small next
to the residue spread the J%q1 terms hardly matter, and dropping them leaves
plain main-branch coding of the residue I - Q1(J)
(code_residue_nonpredictive). The check scripts hold these three against
each other.

Frames go through one at a time; the blocked simulator codes (B, L) arrays.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
from scipy.stats import entropy

from coding.errors import BbqError
from coding.quant import ScalarQuantizer, quantize_fast, round_half_away_float
from coding.transform import OrthogonalTransform
from sources.signals import Ar1Config, Ar1Stream

logger = logging.getLogger(__name__)

# q1 used for the "no baseband quantizer" reference, as a fraction of q2.
NEGLIGIBLE_Q1_FRACTION = 1e-4

# Below this many blocks per RD point the SNR is too noisy for dB-level gaps.
MIN_BLOCKS = 10_000

DEFAULT_CHUNK_BLOCKS = 4096

Predictor = Callable[[List[np.ndarray]], np.ndarray]


@dataclass
class PipelineConfig:
    q1: float
    q2: float
    transform: OrthogonalTransform
    block_len: Optional[int] = None

    def __post_init__(self):
        if self.block_len is None:
            self.block_len = self.transform.size
        if not (self.q1 > 0 and self.q2 > 0):
            raise BbqError(f"steps must be > 0, got q1={self.q1}, q2={self.q2}")
        if self.q1 > self.q2:
            raise BbqError(f"q1={self.q1} must not exceed q2={self.q2}")
        if self.block_len != self.transform.size:
            raise BbqError(f"block_len {self.block_len} must equal transform "
                           f"size {self.transform.size}")

    @property
    def baseband(self) -> ScalarQuantizer:
        return ScalarQuantizer(self.q1)

    @property
    def codec(self) -> ScalarQuantizer:
        return ScalarQuantizer(self.q2)

    @property
    def alpha(self) -> float:
        return self.q2 / self.q1


@dataclass
class CodedBlock:
    indices: np.ndarray          # Q2 output, int64, length L
    reconstruction: np.ndarray   # on the q1 lattice


@dataclass
class RDPoint:
    bits_per_sample: float
    mse: float
    snr_db: float
    q1: float = 0.0
    q2: float = 0.0
    blocks: int = 0


# ------------------------------------------------------------ main branch

def _rows(x: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != cfg.block_len:
        raise BbqError(f"block length {arr.shape[-1]} does not match "
                       f"configured {cfg.block_len}")
    if not np.all(np.isfinite(arr)):
        raise BbqError("input must be finite")
    return arr


def code_blocks(x: np.ndarray, cfg: PipelineConfig, final_quantizer: bool = True):
    """Code a (B, L) array of blocks. Returns (int64 indices, reconstruction).

    final_quantizer=False stops after T^-1: the one-baseband chain.
    """
    x = _rows(x, cfg)
    t = cfg.transform.matrix
    coeffs = quantize_fast(x, cfg.q1) @ t.T
    k = round_half_away_float(coeffs / cfg.q2)
    back = (cfg.q2 * k) @ t
    rec = quantize_fast(back, cfg.q1) if final_quantizer else back
    return k.astype(np.int64), rec


def code_main_branch(r: np.ndarray, cfg: PipelineConfig) -> CodedBlock:
    r = _rows(r, cfg)
    if r.ndim != 1:
        raise BbqError("code_main_branch takes one block; use code_blocks for batches")
    k, rec = code_blocks(r[None, :], cfg)
    return CodedBlock(indices=k[0], reconstruction=rec[0])


def code_one_baseband(r: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """Q1 -> T -> Q2 -> T^-1 with no output rounding; returns the reconstruction."""
    r = _rows(r, cfg)
    _, rec = code_blocks(np.atleast_2d(r), cfg, final_quantizer=False)
    return rec[0] if r.ndim == 1 else rec


# ------------------------------------------------------------- predictors

def zero_predictor(history: List[np.ndarray]) -> np.ndarray:
    return np.zeros_like(history[-1])


def previous_reconstruction(history: List[np.ndarray]) -> np.ndarray:
    """The last reconstructed frame as is. Always on the q1 lattice."""
    return history[-1].copy()


def previous_integer(history: List[np.ndarray]) -> np.ndarray:
    """The last reconstructed frame rounded to integers, as a codec stores it.

    Off the q1 lattice whenever q1 is not an integer, which is what gives the
    J%q1 branch something to do.
    """
    return round_half_away_float(history[-1])


def scaled_previous(weight: float) -> Predictor:
    """round(weight * previous frame): a leaky predictor, off-lattice even for integer q1."""
    def predict(history: List[np.ndarray]) -> np.ndarray:
        return round_half_away_float(weight * history[-1])
    return predict


def _frames(frames: Sequence[np.ndarray], cfg: PipelineConfig) -> List[np.ndarray]:
    if len(frames) == 0:
        raise BbqError("frame list is empty")
    out = [_rows(f, cfg) for f in frames]
    if any(f.ndim != 1 for f in out):
        raise BbqError("frames must be 1-D vectors of length L")
    return out


def _prediction(history: List[np.ndarray], predictor: Predictor, n: int) -> np.ndarray:
    # The first frame has nothing to predict from.
    if not history:
        return np.zeros(n)
    return np.asarray(predictor(history), dtype=np.float64)


def _codec(residue: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """T^-1 Q2 T, with no baseband rounding on either side."""
    t = cfg.transform.matrix
    return (cfg.q2 * round_half_away_float((residue @ t.T) / cfg.q2)) @ t


def _split_prediction(j: np.ndarray, q1: float):
    """J as lattice index k and remainder J%q1 = J - q1*k."""
    k = round_half_away_float(j / q1)
    return k, j - q1 * k


def _loop_step(frame: np.ndarray, j: np.ndarray, cfg: PipelineConfig):
    """One pass of the loop in lattice indices.

    Returns (k, n): the prediction's lattice index and the index of the
    reconstructed frame. Both chains go through here so that Q2 ties, which
    lattice predictions and rational transform rows hit exactly, break the
    same way in each.
    """
    q1 = cfg.q1
    k, j_mod = _split_prediction(j, q1)
    # Q1(I) - J == q1*(m - k) - J%q1
    m = round_half_away_float(frame / q1)
    coded = _codec(q1 * (m - k) - j_mod, cfg)
    # k stays inside the rounding so a tie takes the sign of the full value
    n = round_half_away_float((coded + j_mod) / q1 + k)
    return k, n


def code_predictive(frames: Sequence[np.ndarray], cfg: PipelineConfig,
                    predictor: Predictor = previous_integer) -> List[np.ndarray]:
    """Reconstructed frames of the predictive loop."""
    frames = _frames(frames, cfg)
    recon: List[np.ndarray] = []
    for frame in frames:
        j = _prediction(recon, predictor, cfg.block_len)
        _, n = _loop_step(frame, j, cfg)
        recon.append(cfg.q1 * n)
    return recon


def frame_errors(frames: Sequence[np.ndarray],
                 recon: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [np.asarray(r) - np.asarray(f) for f, r in zip(frames, recon)]


def code_equivalent(frames: Sequence[np.ndarray], cfg: PipelineConfig,
                    predictor: Predictor = previous_integer) -> List[np.ndarray]:
    """Per-frame reconstruction errors computed in the residue domain.

    The prediction is split into its lattice part Q1(J) = q1*k and remainder
    J%q1; only the remainder passes through the codec alongside the residue
    I - Q1(J). The error is measured against that residue, not the frame.
    """
    frames = _frames(frames, cfg)
    recon: List[np.ndarray] = []
    errors: List[np.ndarray] = []
    for frame in frames:
        j = _prediction(recon, predictor, cfg.block_len)
        k, n = _loop_step(frame, j, cfg)
        residue = frame - cfg.q1 * k
        errors.append(cfg.q1 * (n - k) - residue)
        recon.append(cfg.q1 * n)
    return errors


def code_residue_nonpredictive(frames: Sequence[np.ndarray], cfg: PipelineConfig,
                               predictor: Predictor = previous_integer
                               ) -> List[np.ndarray]:
    """code_equivalent with the J%q1 terms dropped: main-branch coding of I - Q1(J)."""
    frames = _frames(frames, cfg)
    recon: List[np.ndarray] = []
    errors: List[np.ndarray] = []
    for frame in frames:
        j = _prediction(recon, predictor, cfg.block_len)
        j_lattice = quantize_fast(j, cfg.q1)
        residue = frame - j_lattice
        _, coded = code_blocks(residue[None, :], cfg)
        errors.append(coded[0] - residue)
        recon.append(coded[0] + j_lattice)
    return errors


def mse_of(errors: Iterable[np.ndarray]) -> float:
    stacked = np.concatenate([np.ravel(e) for e in errors])
    return float(np.mean(stacked * stacked))


# --------------------------------------------------------------- bitrate

class IndexHistogram:
    """Pooled counts of codec indices across any number of chunks."""

    def __init__(self):
        self.counts: Counter = Counter()
        self.total = 0

    def add(self, indices: np.ndarray) -> None:
        values, counts = np.unique(np.asarray(indices, dtype=np.int64), return_counts=True)
        self.counts.update(dict(zip(values.tolist(), counts.tolist())))
        self.total += int(counts.sum())

    def entropy_bits(self) -> float:
        """Zeroth-order empirical entropy, bits per index."""
        if self.total == 0:
            raise BbqError("no indices to estimate a bitrate from")
        ordered = [self.counts[k] for k in sorted(self.counts)]
        return float(entropy(ordered, base=2))


def estimate_bitrate(coded: Sequence[CodedBlock]) -> float:
    if len(coded) == 0:
        raise BbqError("no coded blocks to estimate a bitrate from")
    hist = IndexHistogram()
    for block in coded:
        hist.add(block.indices)
    return hist.entropy_bits()


# -------------------------------------------------------------- RD sweep

def _sweep_point(source: Ar1Config, cfg: PipelineConfig, blocks: int,
                 chunk_blocks: int, final_quantizer: bool) -> RDPoint:
    stream = Ar1Stream(source)
    hist = IndexHistogram()
    err = power = 0.0
    left = blocks
    while left > 0:
        n = min(chunk_blocks, left)
        x = stream.take_blocks(n, cfg.block_len)
        k, rec = code_blocks(x, cfg, final_quantizer=final_quantizer)
        d = rec - x
        err += float(np.sum(d * d))
        power += float(np.sum(x * x))
        hist.add(k)
        left -= n
    samples = blocks * cfg.block_len
    mse = err / samples
    snr = 10.0 * math.log10((power / samples) / mse) if mse > 0 else math.inf
    return RDPoint(bits_per_sample=hist.entropy_bits(), mse=mse, snr_db=snr,
                   q1=cfg.q1, q2=cfg.q2, blocks=blocks)


def rd_sweep(source: Ar1Config, transform: OrthogonalTransform, q1: float,
             q2_list: Sequence[float], reference_mode: str = "coarse_q1",
             blocks: int = 50_000, chunk_blocks: int = DEFAULT_CHUNK_BLOCKS,
             scenario: str = "two_baseband") -> List[RDPoint]:
    """One RD point per q2, in the given order.

    coarse_q1 codes with the given q1; negligible_q1 replaces it by q2*1e-4.
    Every point replays the same source realization (same seed), so the two
    modes are compared on identical data.
    """
    if reference_mode not in ("coarse_q1", "negligible_q1"):
        raise BbqError(f"unknown reference mode {reference_mode!r}")
    if scenario not in ("two_baseband", "one_baseband"):
        raise BbqError(f"unknown scenario {scenario!r}")
    if not q2_list:
        raise BbqError("q2_list is empty")
    if blocks < 1 or chunk_blocks < 1:
        raise BbqError("blocks and chunk_blocks must be >= 1")
    if reference_mode == "coarse_q1" and q1 > min(q2_list):
        raise BbqError(f"q1={q1} exceeds the smallest q2={min(q2_list)}")
    if blocks < MIN_BLOCKS:
        logger.warning("%d blocks per RD point is below %d; SNR gaps will be noisy",
                       blocks, MIN_BLOCKS)

    points = []
    for q2 in q2_list:
        q1_point = q1 if reference_mode == "coarse_q1" else q2 * NEGLIGIBLE_Q1_FRACTION
        cfg = PipelineConfig(q1=q1_point, q2=q2, transform=transform)
        point = _sweep_point(source, cfg, blocks, chunk_blocks,
                             final_quantizer=(scenario == "two_baseband"))
        logger.info("%s q2=%.4g q1=%.4g: %.3f bits, SNR %.3f dB", reference_mode,
                    q2, q1_point, point.bits_per_sample, point.snr_db)
        points.append(point)
    return points


def snr_gaps(reference: Sequence[RDPoint], coarse: Sequence[RDPoint]) -> List[float]:
    """Per-q2 SNR lost to the baseband quantizer (reference minus coarse)."""
    if len(reference) != len(coarse):
        raise BbqError("point lists differ in length")
    return [r.snr_db - c.snr_db for r, c in zip(reference, coarse)]
