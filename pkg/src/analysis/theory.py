"""
Closed-form distortion and SNR-loss predictions for a baseband quantizer
placed in front of a transform codec, plus the Monte Carlo estimator for the
two coupling statistics the closed forms need when the steps are close.

THE CHAIN
---------
A region of the fine lattice q1*Z^N is represented by its centre m = q1*p.
The codec maps it through

    m_hat = Q1( T^-1 Q2( T m ) )

and the whole region lands on m_hat. Writing round(x) = x + g(x):

    Y     = g( (q1/q2) T p )            first-stage rounding error, in q2 units
    W     = g( (q2/q1) T^-1 Y )         second-stage rounding error, in q1 units
    m_hat = q1 p + q2 T^-1 Y + q1 W

so |m_hat - m|^2 = q2^2 |Y|^2 + q1^2 |W|^2 + 2 q1 q2 Y.T W'. Averaged over
regions, E|Y|^2 = N/12 and the other two terms define

    gamma1  = (12/N) E|W|^2          gamma12 = (12/N) E[Y' T W]

For alpha = q2/q1 >= 2 every coordinate of alpha*T^-1 Y spans more than one
integer, W is uniform and uncorrelated with Y, and gamma1 = 1, gamma12 = 0.
Below 2 they must be estimated. The estimator samples p uniformly from
{-M..M}^N.

DEGENERATE LATTICES
-------------------
A transform with rational entries (the DCT DC row 1/sqrt(N) for square N)
combined with a rational alpha can put (q1/q2) T p on an integer for many p.
Then Y is not spread out and the averages describe the lattice, not the
generic case. The estimator inspects the first chunk; if more than 1% of the
arguments are integers it perturbs q1/q2 by a relative 1e-7 and says so.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from coding.errors import BbqError
from coding.quant import round_half_away_float
from coding.transform import OrthogonalTransform

# |x - round(x)| below this counts as "exactly an integer".
INTEGER_TOL = 1e-9

DEFAULT_M_RANGE = 1000
DEFAULT_SAMPLES = 100_000
DEFAULT_CHUNK = 8192
DEFAULT_JITTER = 1e-7
DEFAULT_DEGENERATE_THRESHOLD = 0.01


class Regime(Enum):
    FINE = "fine"        # q1 <= q2/2
    COARSE = "coarse"    # q2/2 < q1 <= q2


@dataclass
class GammaEstimate:
    alpha: float
    gamma1: float
    gamma12: float
    samples: int
    se_gamma1: float
    se_gamma12: float
    m_range: int = DEFAULT_M_RANGE
    seed: int = 0
    transform: str = ""
    degenerate_fraction: float = 0.0
    jittered: bool = False

    def describe(self) -> str:
        text = (f"alpha {self.alpha:.4g}: gamma1 {self.gamma1:.4f} "
                f"(se {self.se_gamma1:.1e}), gamma12 {self.gamma12:+.4f} "
                f"(se {self.se_gamma12:.1e}), {self.samples} samples")
        if self.jittered:
            text += f", lattice-degenerate ({self.degenerate_fraction:.1%}) so jittered"
        return text


@dataclass
class DistortionPrediction:
    q1: float
    q2: float
    n_dim: int
    d_total: float
    e_d2: float
    regime: Regime

    @property
    def per_sample(self) -> float:
        return self.d_total / self.n_dim


def regime_of(q1: float, q2: float) -> Regime:
    return Regime.FINE if q1 <= q2 / 2.0 else Regime.COARSE


def _check_steps(q1: float, q2: float) -> None:
    if not (q1 > 0 and q2 > 0):
        raise BbqError(f"steps must be > 0, got q1={q1}, q2={q2}")
    if q1 > q2:
        raise BbqError(f"q1 must not exceed q2, got q1={q1} > q2={q2}")


def _check_alpha(alpha: float) -> None:
    if not alpha >= 1.0:
        raise BbqError(f"alpha must be >= 1, got {alpha}")


# ------------------------------------------------------------- cell error

def cell_mse(n_dim: int, a: float, d: float) -> float:
    """MSE of a uniform cube [-a, a]^N mapped to a point at distance d from its centre.

    d^2 + (N/3) a^2. The point may lie outside the cube.
    """
    if n_dim < 1:
        raise BbqError(f"n_dim must be >= 1, got {n_dim}")
    if not a > 0:
        raise BbqError(f"half-width a must be > 0, got {a}")
    if d < 0:
        raise BbqError(f"distance d must be >= 0, got {d}")
    return d * d + (n_dim / 3.0) * a * a


# -------------------------------------------------------------- centroids

def _index_batch(p: np.ndarray, t: OrthogonalTransform) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(p, dtype=np.float64)
    single = arr.ndim == 1
    batch = np.atleast_2d(arr)
    if batch.shape[-1] != t.size:
        raise BbqError(f"index vector length {batch.shape[-1]} does not match "
                       f"transform size {t.size}")
    return batch, single


def centroid_direct(p: np.ndarray, q1: float, q2: float,
                    t: OrthogonalTransform) -> np.ndarray:
    """q1 * round( (q2/q1) T^-1 round( (q1/q2) T p ) ), for one p or a (B, N) batch."""
    if not (q1 > 0 and q2 > 0):
        raise BbqError(f"steps must be > 0, got q1={q1}, q2={q2}")
    batch, single = _index_batch(p, t)
    inner = round_half_away_float((q1 / q2) * (batch @ t.matrix.T))
    m_hat = q1 * round_half_away_float((q2 / q1) * (inner @ t.matrix))
    return m_hat[0] if single else m_hat


def centroid_decomposed(p: np.ndarray, q1: float, q2: float,
                        t: OrthogonalTransform
                        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(m_hat, Y, W) with m_hat = q1 p + q2 T^-1 Y + q1 W."""
    if not (q1 > 0 and q2 > 0):
        raise BbqError(f"steps must be > 0, got q1={q1}, q2={q2}")
    batch, single = _index_batch(p, t)
    x = (q1 / q2) * (batch @ t.matrix.T)
    y = round_half_away_float(x) - x
    z = (q2 / q1) * (y @ t.matrix)
    w = round_half_away_float(z) - z
    m_hat = q1 * batch + q2 * (y @ t.matrix) + q1 * w
    if single:
        return m_hat[0], y[0], w[0]
    return m_hat, y, w


def reconstruction_centroid(p: np.ndarray, q1: float, q2: float,
                            t: OrthogonalTransform) -> np.ndarray:
    """Where the fine-lattice region centred on q1*p is reconstructed."""
    return centroid_direct(p, q1, q2, t)


# ------------------------------------------------------ gamma estimation

class GammaEstimator:
    """Monte Carlo estimate of gamma1 and gamma12 for one transform and alpha.

    Work is split into fixed chunks whose seeds are spawned from one
    SeedSequence. Chunks may run on a thread pool but are always reduced in
    chunk order, so the result does not depend on the worker count.
    """

    def __init__(self, m_range: int = DEFAULT_M_RANGE,
                 samples: int = DEFAULT_SAMPLES, seed: int = 0,
                 workers: int = 1, chunk: int = DEFAULT_CHUNK,
                 jitter: float = DEFAULT_JITTER,
                 degenerate_threshold: float = DEFAULT_DEGENERATE_THRESHOLD):
        if m_range < 1:
            raise BbqError(f"m_range must be >= 1, got {m_range}")
        if samples < 2:
            raise BbqError(f"samples must be >= 2, got {samples}")
        if workers < 1 or chunk < 1:
            raise BbqError("workers and chunk must be >= 1")
        self.m_range = int(m_range)
        self.samples = int(samples)
        self.seed = int(seed)
        self.workers = int(workers)
        self.chunk = int(chunk)
        self.jitter = float(jitter)
        self.degenerate_threshold = float(degenerate_threshold)
        self.logger = logging.getLogger(self.__class__.__name__)
        if self.samples < 10_000:
            self.logger.warning("only %d gamma samples; 10^4 or more recommended",
                                self.samples)

    def _chunk_sizes(self):
        full, rest = divmod(self.samples, self.chunk)
        return [self.chunk] * full + ([rest] if rest else [])

    def _draw(self, seq: np.random.SeedSequence, n: int, dim: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(seq))
        return rng.integers(-self.m_range, self.m_range, size=(n, dim),
                            endpoint=True).astype(np.float64)

    def degenerate_fraction(self, t: OrthogonalTransform, ratio: float,
                            p: np.ndarray) -> float:
        x = ratio * (p @ t.matrix.T)
        return float(np.mean(np.abs(x - round_half_away_float(x)) < INTEGER_TOL))

    def _run_chunk(self, t: OrthogonalTransform, ratio: float,
                   seq: np.random.SeedSequence, n: int):
        p = self._draw(seq, n, t.size)
        x = ratio * (p @ t.matrix.T)
        y = round_half_away_float(x) - x
        z = (y @ t.matrix) / ratio
        w = round_half_away_float(z) - z
        scale = 12.0 / t.size
        a = scale * np.sum(w * w, axis=1)
        b = scale * np.sum(y * (w @ t.matrix.T), axis=1)
        return n, a.sum(), (a * a).sum(), b.sum(), (b * b).sum()

    def estimate(self, t: OrthogonalTransform, alpha: float) -> GammaEstimate:
        _check_alpha(alpha)
        started = time.monotonic()
        sizes = self._chunk_sizes()
        seqs = np.random.SeedSequence(self.seed).spawn(len(sizes))
        ratio = 1.0 / alpha

        frac = self.degenerate_fraction(t, ratio, self._draw(seqs[0], sizes[0], t.size))
        jittered = False
        if frac > self.degenerate_threshold:
            self.logger.warning(
                "%s at alpha %.4g: %.1f%% of arguments sit on integers; "
                "perturbing q1/q2 by a relative %.0e",
                t.describe(), alpha, 100.0 * frac, self.jitter)
            ratio *= 1.0 + self.jitter
            jittered = True

        def job(i):
            return self._run_chunk(t, ratio, seqs[i], sizes[i])

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                parts = list(pool.map(job, range(len(sizes))))
        else:
            parts = [job(i) for i in range(len(sizes))]

        n = sum(part[0] for part in parts)
        sa, saa, sb, sbb = (math.fsum(part[k] for part in parts) for k in (1, 2, 3, 4))
        mean_a, mean_b = sa / n, sb / n
        var_a = max(saa - sa * sa / n, 0.0) / (n - 1)
        var_b = max(sbb - sb * sb / n, 0.0) / (n - 1)

        est = GammaEstimate(alpha=float(alpha), gamma1=mean_a, gamma12=mean_b,
                            samples=n, se_gamma1=math.sqrt(var_a / n),
                            se_gamma12=math.sqrt(var_b / n), m_range=self.m_range,
                            seed=self.seed, transform=t.fingerprint,
                            degenerate_fraction=frac, jittered=jittered)
        self.logger.info("%s: %s in %.2fs", t.describe(), est.describe(),
                         time.monotonic() - started)
        return est


def estimate_gammas(t: OrthogonalTransform, alpha: float,
                    m_range: int = DEFAULT_M_RANGE,
                    samples: int = DEFAULT_SAMPLES, seed: int = 0,
                    workers: int = 1) -> GammaEstimate:
    return GammaEstimator(m_range=m_range, samples=samples, seed=seed,
                          workers=workers).estimate(t, alpha)


# ------------------------------------------------------------ distortion

def expected_d2(q1: float, q2: float, n_dim: int,
                gammas: Optional[GammaEstimate] = None) -> float:
    """Mean squared centroid offset over regions.

    N(q2^2 + q1^2)/12 when q1 <= q2/2, which needs no gammas (pass None).
    N(q2^2 + gamma1 q1^2 + 2 gamma12 q2 q1)/12 otherwise.
    """
    _check_steps(q1, q2)
    if n_dim < 1:
        raise BbqError(f"n_dim must be >= 1, got {n_dim}")
    if regime_of(q1, q2) is Regime.FINE:
        return n_dim * (q2 * q2 + q1 * q1) / 12.0
    if gammas is None:
        raise BbqError(f"q1={q1} > q2/2={q2 / 2}: gamma estimates are required")
    return n_dim * (q2 * q2 + gammas.gamma1 * q1 * q1
                    + 2.0 * gammas.gamma12 * q2 * q1) / 12.0


def overall_distortion(q1: float, q2: float, n_dim: int,
                       gammas: Optional[GammaEstimate] = None) -> DistortionPrediction:
    """Expected block distortion with a baseband quantizer on both sides of the codec."""
    e_d2 = expected_d2(q1, q2, n_dim, gammas)
    return DistortionPrediction(q1=q1, q2=q2, n_dim=n_dim,
                                d_total=e_d2 + n_dim * q1 * q1 / 12.0,
                                e_d2=e_d2, regime=regime_of(q1, q2))


def one_baseband_distortion(q1: float, q2: float, n_dim: int) -> float:
    """Block distortion when only the input is baseband-quantized: N(q2^2 + q1^2)/12."""
    _check_steps(q1, q2)
    return n_dim * (q2 * q2 + q1 * q1) / 12.0


# -------------------------------------------------------------- SNR loss

def snr_loss_from_gammas(alpha: float, gamma1: float, gamma12: float) -> float:
    _check_alpha(alpha)
    return 10.0 * math.log10(1.0 + (1.0 + gamma1) / alpha ** 2 + 2.0 * gamma12 / alpha)


def snr_loss_two_baseband(alpha: float,
                          gammas: Optional[GammaEstimate] = None) -> float:
    """dB lost against q1 -> 0 when the baseband quantizer sits on both sides."""
    _check_alpha(alpha)
    if alpha >= 2.0:
        return 10.0 * math.log10(1.0 + 2.0 / alpha ** 2)
    if gammas is None:
        raise BbqError(f"alpha={alpha} < 2: gamma estimates are required")
    return snr_loss_from_gammas(alpha, gammas.gamma1, gammas.gamma12)


def snr_loss_one_baseband(alpha: float) -> float:
    _check_alpha(alpha)
    return 10.0 * math.log10(1.0 + 1.0 / alpha ** 2)


def theoretical_gap_db(alpha: float, gammas: Optional[GammaEstimate] = None,
                       scenario: str = "two_baseband") -> float:
    if scenario == "one_baseband":
        return snr_loss_one_baseband(alpha)
    if scenario == "two_baseband":
        return snr_loss_two_baseband(alpha, gammas)
    raise BbqError(f"unknown scenario {scenario!r}")
