"""Backend selection for the dense Pauli kernels.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when the environment variable ``BBDFS_PURE_PYTHON`` is set to a
non-empty value other than ``0``.
"""

import os

from . import _pykernels

_force_py = os.environ.get("BBDFS_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

pauli_dense = _impl.pauli_dense
apply_pauli = _impl.apply_pauli
apply_1q = _impl.apply_1q

__all__ = ["BACKEND", "pauli_dense", "apply_pauli", "apply_1q"]
