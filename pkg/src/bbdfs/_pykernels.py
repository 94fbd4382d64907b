"""Vectorised numpy implementations of the dense Pauli kernels.

These mirror ``_ckernels.pyx`` exactly and are used whenever the compiled
module is unavailable (or ``BBDFS_PURE_PYTHON=1`` is set).

Bit convention: site ``k`` (0-based, site 0 most significant) of an
``n``-site register lives at bit ``n - 1 - k`` of the basis index.  A Pauli
string is described by an X mask, a Z mask (Y sets both) and a complex
prefactor that already contains ``i**(number of Y)``.
"""

import numpy as np


def _signs(dim, zmask):
    idx = np.arange(dim, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(zmask)) & 1
    return 1.0 - 2.0 * parity


def pauli_dense(xmasks, zmasks, coeffs, n):
    """Accumulate ``sum_k coeffs[k] * P_k`` into a dense ``2**n`` matrix."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim, dtype=np.int64)
    for x, z, c in zip(xmasks, zmasks, coeffs):
        rows = cols ^ int(x)
        out[rows, cols] += c * _signs(dim, z)
    return out


def apply_pauli(x, z, coeff, states):
    """Return ``coeff * P @ states`` for a 2-D column array ``states``."""
    dim = states.shape[0]
    src = np.arange(dim, dtype=np.int64)
    out = np.empty_like(states)
    out[src ^ int(x)] = (coeff * _signs(dim, z))[:, None] * states
    return out


def apply_1q(u, bit, states):
    """Apply a 2x2 unitary ``u`` on the qubit stored at ``bit``."""
    dim, m = states.shape
    high = dim >> (bit + 1)
    view = states.reshape(high, 2, 1 << bit, m)
    out = np.einsum("ab,hbLm->haLm", u, view)
    return np.ascontiguousarray(out).reshape(dim, m)
