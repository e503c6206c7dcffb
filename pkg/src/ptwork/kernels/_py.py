"""Numpy implementation of the truncation sweep."""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from ._common import BondCapExceeded


def sweep(
    tensors: List[np.ndarray],
    qr_lo: int,
    hi: int,
    svd_lo: int,
    threshold: float,
    max_bond: Optional[int],
) -> None:
    """Orthogonalise then truncate a stretch of an open-boundary chain.

    Tensors are (left, phys, right) complex arrays, modified in place.
    A left-to-right QR pass over [qr_lo, hi] moves the orthogonality
    centre to ``hi`` (everything left of qr_lo must already be
    left-orthogonal); a right-to-left SVD pass over [hi, svd_lo] drops
    singular values below ``threshold`` relative to each bond's largest
    and leaves the centre at ``svd_lo``.
    """
    for p in range(qr_lo, hi):
        a = tensors[p]
        l, d, r = a.shape
        q, rr = np.linalg.qr(a.reshape(l * d, r))
        tensors[p] = np.ascontiguousarray(q.reshape(l, d, q.shape[1]))
        tensors[p + 1] = np.tensordot(rr, tensors[p + 1], axes=(1, 0))

    for p in range(hi, svd_lo, -1):
        a = tensors[p]
        l, d, r = a.shape
        u, s, vh = np.linalg.svd(a.reshape(l, d * r), full_matrices=False)
        k = _rank(s, threshold)
        if max_bond is not None and k > max_bond:
            raise BondCapExceeded(p, k, max_bond)
        tensors[p] = np.ascontiguousarray(vh[:k].reshape(k, d, r))
        tensors[p - 1] = np.tensordot(tensors[p - 1], u[:, :k] * s[:k], axes=(2, 0))


def _rank(s: np.ndarray, threshold: float) -> int:
    if s.size == 0 or s[0] <= 0.0:
        return 1
    return max(1, int(np.searchsorted(-s, -threshold * s[0], side="left")))
