"""
Orthogonal block transforms.

A transform is an N x N real orthogonal matrix T acting on length-N vectors.
Rows of T are the analysis vectors, columns the synthesis vectors. The
inverse is always applied as T transposed, never by numeric inversion.

Batches are (B, N) arrays with one vector per row, so apply() is x @ T.T.
2-D blocks of k x k pixels are flattened row-major to length k*k and coded
with an L x L matrix; make_dct_2d() builds the separable DCT in that form.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft
from scipy.stats import ortho_group

from coding.errors import BbqError

# Max elementwise deviation of T.T @ T from identity.
ORTHO_TOL = 1e-12


def is_orthogonal(matrix: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return float(np.max(np.abs(m.T @ m - np.eye(m.shape[0])))) <= tol


@dataclass(frozen=True, eq=False)
class OrthogonalTransform:
    matrix: np.ndarray
    name: str = "custom"
    _fingerprint: str = field(default="", repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise BbqError(f"transform must be a non-empty square matrix, got shape {m.shape}")
        if not is_orthogonal(m):
            raise BbqError(f"{self.name} matrix is not orthogonal within {ORTHO_TOL}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        digest = hashlib.sha1(np.round(m, 12).tobytes()).hexdigest()[:12]
        object.__setattr__(self, "_fingerprint", digest)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def fingerprint(self) -> str:
        """Stable key for caches: name, size and a hash of the entries."""
        return f"{self.name}-{self.size}-{self._fingerprint}"

    def describe(self) -> str:
        return f"{self.name} ({self.size}x{self.size})"


def _check_len(t: OrthogonalTransform, x: np.ndarray) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != t.size:
        raise BbqError(f"vector length {arr.shape[-1] if arr.ndim else 0} "
                       f"does not match transform size {t.size}")
    return arr


def apply(t: OrthogonalTransform, x: np.ndarray) -> np.ndarray:
    return _check_len(t, x) @ t.matrix.T


def apply_inverse(t: OrthogonalTransform, y: np.ndarray) -> np.ndarray:
    return _check_len(t, y) @ t.matrix


# ----------------------------------------------------------- constructors

def make_rotation_2x2() -> OrthogonalTransform:
    """(1/sqrt2) [[1, 1], [-1, 1]]: (1,0) -> (1/sqrt2, -1/sqrt2), (1,1) -> (sqrt2, 0)."""
    s = 1.0 / math.sqrt(2.0)
    return OrthogonalTransform(np.array([[s, s], [-s, s]]), name="rot2x2")


def make_dct(n: int) -> OrthogonalTransform:
    """Orthonormal DCT-II matrix; row 0 is the DC basis 1/sqrt(n)."""
    if n < 1:
        raise BbqError(f"DCT size must be >= 1, got {n}")
    return OrthogonalTransform(fft.dct(np.eye(n), norm="ortho", axis=0), name="dct")


def make_dct_2d(k: int) -> OrthogonalTransform:
    """Separable k x k DCT as one (k*k) x (k*k) matrix on row-major blocks."""
    if k < 1:
        raise BbqError(f"block side must be >= 1, got {k}")
    c = fft.dct(np.eye(k), norm="ortho", axis=0)
    return OrthogonalTransform(np.kron(c, c), name="dct2d")


def make_identity(n: int) -> OrthogonalTransform:
    if n < 1:
        raise BbqError(f"size must be >= 1, got {n}")
    return OrthogonalTransform(np.eye(n), name="identity")


def make_random_orthogonal(n: int, seed: int = 0) -> OrthogonalTransform:
    """Haar-distributed orthogonal matrix. Its columns have no lattice structure."""
    if n < 1:
        raise BbqError(f"size must be >= 1, got {n}")
    if n == 1:
        return OrthogonalTransform(np.eye(1), name=f"random{seed}")
    m = ortho_group.rvs(dim=n, random_state=np.random.default_rng(seed))
    return OrthogonalTransform(m, name=f"random{seed}")


def make_transform(spec: str, n: int) -> OrthogonalTransform:
    """Build a transform from a CLI string: rot2x2, dct, dct2d, identity, random[:seed]."""
    kind, _, arg = spec.partition(":")
    if kind == "rot2x2":
        if n != 2:
            raise BbqError(f"rot2x2 is a 2x2 transform, block length is {n}")
        return make_rotation_2x2()
    if kind == "dct":
        return make_dct(n)
    if kind == "dct2d":
        k = math.isqrt(n)
        if k * k != n:
            raise BbqError(f"dct2d needs a square block length, got {n}")
        return make_dct_2d(k)
    if kind == "identity":
        return make_identity(n)
    if kind == "random":
        try:
            seed = int(arg) if arg else 0
        except ValueError:
            raise BbqError(f"bad random transform seed {arg!r}") from None
        return make_random_orthogonal(n, seed)
    raise BbqError(f"unknown transform {spec!r}")
