"""Hot numeric kernels with a compiled fast path.

The Cython extension is preferred when importable; otherwise the pure
NumPy implementation is used. Set AGENTICSUM_KERNELS=c or =python to
force one side (useful for benchmarks and parity tests).
"""

from __future__ import annotations

import os

_choice = os.environ.get("AGENTICSUM_KERNELS", "").strip().lower()
if _choice not in ("", "c", "python"):
    raise ValueError(
        f"AGENTICSUM_KERNELS must be 'c' or 'python', got {_choice!r}"
    )

if _choice == "python":
    from agenticsum._kernels import _pykernels as _impl

    KERNEL_BACKEND = "python"
else:
    try:
        from agenticsum._kernels import _ckernels as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        from agenticsum._kernels import _pykernels as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "python"

hashed_uniform = _impl.hashed_uniform
hashed_softmax_attention = _impl.hashed_softmax_attention
lcs_length = _impl.lcs_length

__all__ = [
    "KERNEL_BACKEND",
    "hashed_uniform",
    "hashed_softmax_attention",
    "lcs_length",
]
