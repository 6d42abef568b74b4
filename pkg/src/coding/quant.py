"""
Uniform scalar quantization with round-half-away-from-zero.

THE ROUNDING CONVENTION
-----------------------
Ties go away from zero: 0.5 -> 1, -0.5 -> -1. The residue g(x) = round(x) - x
then lies in (-1/2, 1/2] for x > 0 and in [-1/2, 1/2) for x < 0, and the
quantizer is odd-symmetric. numpy's own np.round is round-half-to-even and
must never be used here; it sends 0.5 to 0 and 2.5 to 2.

The tie test is done on the fractional part left by np.trunc, not with
floor(|x| + 0.5). The latter rounds 0.49999999999999994 up to 1 because the
addition itself rounds.

SHIFT INVARIANCE HAS ONE HOLE
-----------------------------
Q(x + n*q) = Q(x) + n*q for every x that is not an exact tie whose shifted
value changes sign. Q(-q/2) + q = 0 while Q(q/2) = q. Ties have measure zero
for continuous inputs, which is all the residue-domain algebra relies on.

Every function accepts a scalar or a numpy array and works coordinate-wise.
Scalars in give Python scalars out.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from coding.errors import BbqError

ArrayLike = Union[float, int, np.ndarray]

# Largest magnitude that still fits a signed 64-bit index.
INDEX_LIMIT = 2.0 ** 63


def _as_finite(x: ArrayLike, what: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise BbqError(f"{what} must be finite")
    return arr


def _unwrap(arr: np.ndarray, like: ArrayLike):
    if np.ndim(like) == 0:
        return arr.item()
    return arr


def round_half_away_float(x: np.ndarray) -> np.ndarray:
    """Round-half-away on float arrays, returning floats. No checks.

    The hot path for the batched coders and the gamma estimator, which have
    already validated their inputs.
    """
    whole = np.trunc(x)
    frac = x - whole
    return whole + np.where(np.abs(frac) >= 0.5, np.sign(x), 0.0)


def round_half_away(x: ArrayLike):
    """Nearest integer, ties away from zero. int or int64 array."""
    arr = _as_finite(x)
    r = round_half_away_float(arr)
    if np.any(np.abs(r) >= INDEX_LIMIT):
        raise BbqError("value out of the signed 64-bit index range")
    return _unwrap(r.astype(np.int64), x)


def residue_g(x: ArrayLike):
    """g(x) = round(x) - x, in [-1/2, 1/2]. g(0) = 0."""
    arr = _as_finite(x)
    return _unwrap(round_half_away_float(arr) - arr, x)


@dataclass(frozen=True)
class ScalarQuantizer:
    step: float

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise BbqError(f"step must be > 0, got {self.step}")

    def index(self, x: ArrayLike):
        return quantize_index(x, self)

    def reconstruct(self, k: ArrayLike):
        return dequantize(k, self)

    def compose(self, x: ArrayLike):
        """index then reconstruct: the value lands on the step lattice."""
        return quantize_reconstruct(x, self)

    def describe(self) -> str:
        return f"uniform quantizer, step {self.step:g}"


def quantize_index(x: ArrayLike, quantizer: ScalarQuantizer):
    return round_half_away(_as_finite(x) / quantizer.step)


def dequantize(k: ArrayLike, quantizer: ScalarQuantizer):
    arr = np.asarray(k, dtype=np.float64) * quantizer.step
    return _unwrap(arr, k)


def quantize_reconstruct(x: ArrayLike, quantizer: ScalarQuantizer):
    return dequantize(quantize_index(x, quantizer), quantizer)


def symmetric_mod(x: ArrayLike, quantizer: ScalarQuantizer):
    """x % q taken as x - Q(x): the remainder of smallest magnitude.

    Lies in [-q/2, q/2], so x = x%q + Q(x) splits a prediction into the part
    on the lattice and the part the lattice cannot hold.
    """
    arr = _as_finite(x)
    return _unwrap(arr - np.asarray(quantize_reconstruct(arr, quantizer)), x)


def quantize_fast(x: np.ndarray, step: float) -> np.ndarray:
    """Q(x) on trusted float arrays, returning lattice values as floats."""
    return step * round_half_away_float(x / step)


# ------------------------------------------------------------ bit budgets

def effective_bitdepth(value_range: float) -> float:
    """Bits carried by a baseband signal mapped onto the integers [0, range].

    300 -> 8.2, 500 -> 9.0, 700 -> 9.5, 900 -> 9.8.
    """
    if value_range <= 0:
        raise BbqError(f"value_range must be > 0, got {value_range}")
    return float(np.log2(value_range + 1.0))


def baseband_step(source_bits: int, value_range: float) -> float:
    """Baseband step q1 implied by a linear map of a full-scale source.

    A 16-bit source (0..65535) squeezed onto [0, 300] is quantized with a
    step of 65535/300 source codes.
    """
    if source_bits < 1:
        raise BbqError(f"source_bits must be >= 1, got {source_bits}")
    if value_range <= 0:
        raise BbqError(f"value_range must be > 0, got {value_range}")
    return (2.0 ** source_bits - 1.0) / float(value_range)
