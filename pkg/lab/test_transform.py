"""Check the orthogonal transforms: the 2x2 rotation's worked values, DCT
normalization, energy preservation and the string constructor."""
import math
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(os.path.dirname(HERE), "src"))
sys.path.insert(0, HERE)

import numpy as np  # noqa: E402

from checks import run_checks  # noqa: E402
from coding.errors import BbqError  # noqa: E402
from coding.transform import (OrthogonalTransform, apply, apply_inverse,  # noqa: E402
                              is_orthogonal, make_dct, make_dct_2d, make_identity,
                              make_random_orthogonal, make_rotation_2x2, make_transform)

R2 = math.sqrt(2.0)


def all_transforms():
    return [make_rotation_2x2(), make_dct(1), make_dct(8), make_dct(16),
            make_dct_2d(4), make_identity(5), make_random_orthogonal(16, 7)]


# 1. The 2x2 rotation sends (1,0) and (1,1) where expected.
def test_rotation_worked_values():
    """rot2x2: (1,0) -> (1/sqrt2, -1/sqrt2), (1,1) -> (sqrt2, 0)"""
    t = make_rotation_2x2()
    assert np.allclose(apply(t, [1.0, 0.0]), [1 / R2, -1 / R2], atol=1e-15)
    assert np.allclose(apply(t, [1.0, 1.0]), [R2, 0.0], atol=1e-15)
    back = apply_inverse(t, apply(t, [0.3, -0.7]))
    assert np.max(np.abs(back - [0.3, -0.7])) < 1e-12


# 2. DCT rows: DC basis first, constant input lands entirely on it.
def test_dct_normalization():
    """DCT: N=1 is [1], N=2 row 0 is (1/sqrt2, 1/sqrt2), ones(8) -> (sqrt8, 0...)"""
    assert np.allclose(make_dct(1).matrix, [[1.0]], atol=1e-15)
    assert np.allclose(make_dct(2).matrix[0], [1 / R2, 1 / R2], atol=1e-15)
    y = apply(make_dct(8), np.ones(8))
    assert abs(y[0] - math.sqrt(8.0)) < 1e-12
    assert np.max(np.abs(y[1:])) < 1e-12
    assert np.allclose(apply(make_dct(1), [5.0]), [5.0], atol=1e-14)


# 3. Every constructor yields an isometry with T^-1 = T.T.
def test_energy_preservation():
    """|Tx| = |x| and T^-1 T x = x to 1e-12 for every transform, single and batched"""
    rng = np.random.default_rng(0)
    for t in all_transforms():
        assert is_orthogonal(t.matrix), t.describe()
        x = rng.normal(0.0, 3.0, size=(200, t.size))
        y = apply(t, x)
        rel = np.abs(np.sum(y * y, axis=1) / np.sum(x * x, axis=1) - 1.0)
        assert np.max(rel) < 1e-10, t.describe()
        assert np.max(np.abs(apply_inverse(t, y) - x)) < 1e-12 * 50, t.describe()
        assert np.allclose(apply(t, x[0]), y[0], atol=1e-12)


# 4. The 2-D DCT is the separable transform on row-major blocks.
def test_dct_2d_is_separable():
    """make_dct_2d(k) x == C X C.T flattened row-major"""
    k = 4
    block = np.random.default_rng(1).normal(size=(k, k))
    c = make_dct(k).matrix
    expect = (c @ block @ c.T).reshape(-1)
    assert np.max(np.abs(apply(make_dct_2d(k), block.reshape(-1)) - expect)) < 1e-12


# 5. The string constructor used by the command line.
def test_make_transform_strings():
    """make_transform parses rot2x2, dct, dct2d, identity and random[:seed]"""
    assert make_transform("rot2x2", 2).name == "rot2x2"
    assert make_transform("dct", 16).size == 16
    assert make_transform("dct2d", 16).name == "dct2d"
    assert np.array_equal(make_transform("identity", 3).matrix, np.eye(3))
    a = make_transform("random:5", 6)
    b = make_random_orthogonal(6, 5)
    assert np.array_equal(a.matrix, b.matrix)
    assert a.fingerprint == b.fingerprint
    for spec, n in (("rot2x2", 3), ("dct2d", 10), ("wavelet", 4), ("random:x", 4)):
        try:
            make_transform(spec, n)
        except BbqError:
            continue
        raise AssertionError(f"{spec!r} at size {n} accepted")


# 6. Fingerprints tell transforms apart and are stable for equal ones.
def test_fingerprints():
    """fingerprint is stable for equal matrices and differs otherwise"""
    assert make_dct(8).fingerprint == make_dct(8).fingerprint
    assert make_dct(8).fingerprint != make_random_orthogonal(8, 0).fingerprint
    assert make_random_orthogonal(8, 0).fingerprint != make_random_orthogonal(8, 1).fingerprint


# 7. Matrices that are not orthogonal, or not square, are refused; the
#    stored matrix cannot be edited afterwards.
def test_rejections_and_immutability():
    """non-orthogonal / non-square / wrong-length input rejected; matrix read-only"""
    for bad in (np.array([[1.0, 0.1], [0.0, 1.0]]), np.ones((2, 3)), np.zeros((0, 0))):
        try:
            OrthogonalTransform(bad)
        except BbqError:
            continue
        raise AssertionError(f"accepted {bad.shape}")
    t = make_dct(4)
    try:
        apply(t, np.ones(5))
    except BbqError:
        pass
    else:
        raise AssertionError("length mismatch accepted")
    try:
        t.matrix[0, 0] = 2.0
    except ValueError:
        pass
    else:
        raise AssertionError("matrix is writable")


if __name__ == "__main__":
    run_checks(globals())
