"""Hot inner loops with a compiled implementation when available.

``BACKEND`` is ``"cython"`` when the extension module imported, otherwise
``"numpy"``.  Set ``RDOMTW_PURE=1`` to force the fallback.
"""

import os

import numpy as np


def conv_rows_numpy(a, b):
    """Row-wise full linear convolution of two int64 matrices.

    ``a`` is (rows, la), ``b`` is (rows, lb); the result is (rows, la+lb-1).
    """
    rows, la = a.shape
    lb = b.shape[1]
    out = np.zeros((rows, la + lb - 1), dtype=np.int64)
    for i in range(la):
        col = a[:, i : i + 1]
        nz = col[:, 0] != 0
        if not nz.any():
            continue
        out[:, i : i + lb] += col * b
    return out


def conv2_mod2_numpy(a, b):
    """Row-wise 2-D convolution over GF(2), truncated to the input shape.

    ``a`` and ``b`` are uint8 arrays of shape (rows, T, W) with 0/1 entries;
    ``out[x, t, w] = XOR over t1+t2=t, w1+w2=w of a[x,t1,w1] & b[x,t2,w2]``.
    """
    rows, T, W = a.shape
    out = np.zeros_like(a)
    for t1 in range(T):
        for w1 in range(W):
            col = a[:, t1, w1]
            if not col.any():
                continue
            sel = col.astype(bool)
            out[sel, t1:, w1:] ^= b[sel, : T - t1, : W - w1]
    return out


BACKEND = "numpy"
conv_rows = conv_rows_numpy
conv2_mod2 = conv2_mod2_numpy

if not os.environ.get("RDOMTW_PURE"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        _kernels = None
    if _kernels is not None:
        BACKEND = "cython"

        def conv_rows(a, b):
            return _kernels.conv_rows(np.ascontiguousarray(a, dtype=np.int64),
                                      np.ascontiguousarray(b, dtype=np.int64))

        def conv2_mod2(a, b):
            return _kernels.conv2_mod2(np.ascontiguousarray(a, dtype=np.uint8),
                                       np.ascontiguousarray(b, dtype=np.uint8))
