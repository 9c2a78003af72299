"""Pure NumPy implementations of the hot numeric kernels.

These mirror the compiled extension in ``_ckernels`` bit-for-bit at the
integer level (hash values are identical); floating-point results agree
to within a few ulps. The package falls back to this module whenever the
compiled extension is unavailable.
"""

from __future__ import annotations

import numpy as np

_MIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_M2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (modular arithmetic)."""
    z = (x + _MIX_GAMMA).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX_M1
    z = (z ^ (z >> np.uint64(27))) * _MIX_M2
    return z ^ (z >> np.uint64(31))


def hashed_uniform(key: int, shape: tuple[int, ...]) -> np.ndarray:
    """Seeded uniform values in [0, 1), one per cell of ``shape``.

    Cell (flattened index n) receives mix64(mix64(n + 1) ^ key), mapped to
    a float via the top 53 bits, so values depend only on (key, position).
    """
    n = 1
    for dim in shape:
        if dim < 0:
            raise ValueError(f"negative dimension in {shape!r}")
        n *= dim
    idx = np.arange(1, n + 1, dtype=np.uint64)
    v = _mix64(_mix64(idx) ^ np.uint64(key & _U64_MASK))
    return ((v >> np.uint64(11)).astype(np.float64) * _INV_2_53).reshape(shape)


def hashed_softmax_attention(key: int, heads: int, tokens: int) -> np.ndarray:
    """Seeded attention tensor of shape (heads, tokens, tokens).

    Rows (the trailing axis) are softmax-normalized, so every row sums
    to 1 and the tensor is row-stochastic.
    """
    if heads < 1 or tokens < 1:
        raise ValueError("heads and tokens must be positive")
    u = hashed_uniform(key, (heads, tokens, tokens))
    u -= u.max(axis=-1, keepdims=True)
    np.exp(u, out=u)
    u /= u.sum(axis=-1, keepdims=True)
    return u


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two integer sequences."""
    a = np.ascontiguousarray(a, dtype=np.int32)
    b = np.ascontiguousarray(b, dtype=np.int32)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("lcs_length expects 1-d sequences")
    if a.size == 0 or b.size == 0:
        return 0
    # Two-row DP; the serial dependency on row[j-1] reduces to a running
    # maximum because adjacent LCS cells differ by at most one.
    prev = np.zeros(b.size + 1, dtype=np.int32)
    curr = np.empty_like(prev)
    for x in a:
        curr[0] = 0
        np.maximum(prev[1:], prev[:-1] + (b == x), out=curr[1:])
        np.maximum.accumulate(curr, out=curr)
        prev, curr = curr, prev
    return int(prev[-1])
