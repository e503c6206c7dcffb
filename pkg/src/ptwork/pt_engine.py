"""Compressed influence-functional tensor network.

The environment's path weights over N contour steps form a function
I(a_1..a_N) of the per-step Liouville indices.  It factorises into
pairwise terms coupling each step to at most ``memory_steps``
predecessors, which lets it be assembled site by site as a matrix
product with truncated-SVD recompression after every step.  Contracting
the result with any sequence of two-branch system propagators yields the
reduced dynamics along the contour; the environment tensors never depend
on the drive, so one build serves every protocol and every counting
length up to its own.

Prefix closures: because every pairwise factor is exactly 1 whenever its
later index is diagonal, terminating a contraction at step p < N only
requires the cap vector obtained by chaining the diagonal-averaged site
tensors from the right.  The caps are computed once per build and make
both the trace readout and intermediate reduced operators exact (up to
compression) at every step.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .contour import BranchStep, branch_propagators
from .kernels import BondCapExceeded
from .model import InfluenceCoefficients

__all__ = [
    "CompressionConfig",
    "ProcessTensor",
    "build_process_tensor",
    "contract",
    "save_process_tensor",
    "load_process_tensor",
    "ProcessTensorCacheError",
]

# per Liouville index (row-major vec): z+ - z-, z+ + z-, and the class of
# the transmitted value (0: diagonal, 1: z+ - z- = +2, 2: z+ - z- = -2)
_OM = np.array([0.0, 2.0, -2.0, 0.0])
_OP = np.array([2.0, 0.0, 0.0, -2.0])
_CLS = np.array([0, 1, 2, 0])
_OMC = np.array([0.0, 2.0, -2.0])

_MAGIC = b"PTWORKPT"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class CompressionConfig:
    """Truncation controls for the tensor-network build."""

    memory_steps: int
    svd_threshold: float = 1e-10
    max_bond: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.svd_threshold < 1.0:
            raise ValueError("svd_threshold must be in (0, 1)")
        if self.memory_steps < 1:
            raise ValueError("memory_steps must be at least 1")
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError("max_bond must be positive when set")


def _factor_matrix(eta_dk: complex) -> np.ndarray:
    """(3, 4) pairwise factor: rows = transmitted class, cols = earlier index."""
    mix = eta_dk.real * _OM + 1j * eta_dk.imag * _OP
    return np.exp(-np.outer(_OMC, mix))


def _self_factor(eta_0: complex) -> np.ndarray:
    """(4,) same-step factor."""
    return np.exp(-_OM * (eta_0.real * _OM + 1j * eta_0.imag * _OP))


class ProcessTensor:
    """Site tensors of the compressed influence functional.

    Each site tensor has shape (left bond, 4, right bond); the boundary
    bonds have dimension 1.  ``caps[p]`` closes the environment after p
    steps.  Instances are immutable in use and safe to share across
    concurrent contractions.
    """

    def __init__(self, tensors: List[np.ndarray], dtau: float, config: CompressionConfig):
        if not tensors:
            raise ValueError("a process tensor needs at least one site")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for a, b in zip(tensors, tensors[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("adjacent site tensors have mismatched bonds")
        self.tensors = tensors
        self.dtau = dtau
        self.config = config
        self._caps: Optional[List[np.ndarray]] = None

    @property
    def n_steps(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> List[int]:
        """Inner-bond dimensions (between consecutive sites)."""
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond_dim(self) -> int:
        return max(self.bond_dims, default=1)

    @property
    def caps(self) -> List[np.ndarray]:
        """Right-closure vectors; caps[p] terminates after p steps."""
        if self._caps is None:
            caps = [np.ones(1, dtype=complex)]
            for a in reversed(self.tensors):
                abar = 0.5 * (a[:, 0, :] + a[:, 3, :])
                caps.append(abar @ caps[-1])
            caps.reverse()
            self._caps = caps
        return self._caps

    def apply_step(self, state: np.ndarray, propagator: np.ndarray, index: int) -> np.ndarray:
        """Advance a (bond, 4) contraction state through step ``index``."""
        state = state @ propagator.T
        a = self.tensors[index]
        return np.einsum("lar,la->ra", a, state)

    def readout(self, state: np.ndarray, index: int) -> np.ndarray:
        """Reduced operator (as a length-4 vec) after ``index`` steps."""
        return self.caps[index] @ state

    def phi(self, state: np.ndarray, index: int) -> complex:
        """Trace readout after ``index`` steps."""
        rho = self.readout(state, index)
        return complex(rho[0] + rho[3])


def build_process_tensor(
    eta: InfluenceCoefficients,
    config: CompressionConfig,
    n_steps: int,
    kernel=None,
) -> ProcessTensor:
    """Assemble and compress the influence functional for n_steps steps.

    Site j is appended with its pairwise couplings to the previous
    min(memory_steps, j-1) sites (a bond-3 transmission of the new
    step's path class), then the affected stretch is re-orthogonalised
    and truncated.  Raises BondCapExceeded, annotated with the step, if
    a truncation cannot respect ``config.max_bond``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    K = config.memory_steps
    if eta.memory_steps < min(K, n_steps - 1):
        raise ValueError(
            f"influence coefficients cover {eta.memory_steps} steps but the "
            f"build needs {min(K, n_steps - 1)}"
        )
    sweep = kernel if kernel is not None else kernels.sweep

    self_f = _self_factor(complex(eta.kernel[0]))
    pair_f = [None] + [
        _factor_matrix(complex(eta.kernel[dk])) for dk in range(1, min(K, n_steps - 1) + 1)
    ]

    new_site = np.zeros((3, 4, 1), dtype=complex)
    for a in range(4):
        new_site[_CLS[a], a, 0] = self_f[a]

    tensors: List[np.ndarray] = [self_f.reshape(1, 4, 1).astype(complex)]
    prev_center = 0
    for j in range(2, n_steps + 1):
        w = min(K, j - 1)
        tensors.append(new_site.copy())
        term = j - 1 - w
        for p in range(term + 1, j - 1):
            tensors[p] = _grow_middle(tensors[p], pair_f[j - 1 - p])
        tensors[term] = _grow_terminal(tensors[term], pair_f[w])
        try:
            sweep(
                tensors,
                prev_center,
                j - 1,
                max(j - 1 - K, 0),
                config.svd_threshold,
                config.max_bond,
            )
        except BondCapExceeded as exc:
            raise BondCapExceeded(exc.bond_index, exc.requested, exc.cap) from None
        prev_center = max(j - 1 - K, 0)
    return ProcessTensor(tensors, eta.dtau, config)


def _grow_middle(a: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Pass the transmission bond through a site, applying its factor."""
    l, d, r = a.shape
    out = np.zeros((l, 3, d, r, 3), dtype=complex)
    for c in range(3):
        out[:, c, :, :, c] = a * factor[c][None, :, None]
    return out.reshape(l * 3, d, r * 3)


def _grow_terminal(a: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Absorb the transmission bond at the far end of the memory window."""
    l, d, r = a.shape
    out = np.einsum("ldr,cd->ldrc", a, factor)
    return np.ascontiguousarray(out.reshape(l, d, r * 3))


def contract(
    pt: ProcessTensor,
    steps: Sequence[BranchStep],
    rho0: np.ndarray,
    trajectory: bool = False,
) -> Tuple[complex, Optional[List[np.ndarray]]]:
    """Run a branch sequence through the process tensor.

    ``steps`` may be shorter than the build; the contraction is closed
    with the matching prefix cap.  With ``trajectory`` the (generally
    non-Hermitian, non-unit-trace) reduced operator after every step is
    returned alongside the final trace.
    """
    n = len(steps)
    if n > pt.n_steps:
        raise ValueError(f"{n} steps exceed the {pt.n_steps}-step process tensor")
    if n == 0:
        raise ValueError("need at least one step")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError("rho0 must be a 2x2 density matrix")
    if abs(np.trace(rho0) - 1.0) > 1e-12 or np.max(np.abs(rho0 - rho0.conj().T)) > 1e-12:
        raise ValueError("rho0 must be Hermitian with unit trace")

    props = branch_propagators(steps, pt.dtau)
    state = rho0.reshape(1, 4).copy()
    traj: Optional[List[np.ndarray]] = [] if trajectory else None
    for i in range(n):
        state = pt.apply_step(state, props[i], i)
        if trajectory:
            traj.append(pt.readout(state, i + 1).reshape(2, 2))
    return pt.phi(state, n), traj


class ProcessTensorCacheError(RuntimeError):
    """The cache file is unreadable or does not match the expected key."""


def save_process_tensor(
    pt: ProcessTensor, path: str, fingerprint: str, meta: Optional[dict] = None
) -> None:
    """Write the binary cache: versioned header plus raw tensor payload.

    Little-endian throughout; tensors stored row-major as (re, im)
    float64 pairs.  The write is atomic (temp file + rename).
    """
    meta_blob = json.dumps(meta or {}, sort_keys=True).encode()
    fp_blob = fingerprint.encode()
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _FORMAT_VERSION))
        fh.write(struct.pack("<I", len(fp_blob)))
        fh.write(fp_blob)
        fh.write(struct.pack("<I", len(meta_blob)))
        fh.write(meta_blob)
        fh.write(struct.pack("<Id", pt.n_steps, pt.dtau))
        fh.write(
            struct.pack(
                "<IdI",
                pt.config.memory_steps,
                pt.config.svd_threshold,
                0 if pt.config.max_bond is None else pt.config.max_bond,
            )
        )
        for t in pt.tensors:
            fh.write(struct.pack("<II", t.shape[0], t.shape[2]))
        for t in pt.tensors:
            fh.write(np.ascontiguousarray(t, dtype="<c16").tobytes())
    os.replace(tmp, path)


def load_process_tensor(
    path: str, expect_fingerprint: Optional[str] = None
) -> Tuple[ProcessTensor, dict]:
    """Read a cache file back; bit-identical to what was stored."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
        off = 0

        def take(n):
            nonlocal off
            if off + n > len(blob):
                raise ProcessTensorCacheError(f"truncated cache file {path}")
            out = blob[off : off + n]
            off += n
            return out

        if take(8) != _MAGIC:
            raise ProcessTensorCacheError(f"{path} is not a process-tensor cache")
        (version,) = struct.unpack("<I", take(4))
        if version != _FORMAT_VERSION:
            raise ProcessTensorCacheError(f"unsupported cache format version {version}")
        (fp_len,) = struct.unpack("<I", take(4))
        fingerprint = take(fp_len).decode()
        if expect_fingerprint is not None and fingerprint != expect_fingerprint:
            raise ProcessTensorCacheError(
                f"cache fingerprint {fingerprint[:12]} does not match "
                f"expected {expect_fingerprint[:12]}"
            )
        (meta_len,) = struct.unpack("<I", take(4))
        meta = json.loads(take(meta_len).decode())
        n, dtau = struct.unpack("<Id", take(12))
        memory_steps, threshold, max_bond = struct.unpack("<IdI", take(16))
        config = CompressionConfig(
            memory_steps=memory_steps,
            svd_threshold=threshold,
            max_bond=None if max_bond == 0 else max_bond,
        )
        dims = [struct.unpack("<II", take(8)) for _ in range(n)]
        tensors = []
        for l, r in dims:
            count = l * 4 * r
            arr = np.frombuffer(take(count * 16), dtype="<c16").reshape(l, 4, r)
            tensors.append(arr.astype(complex))
        if off != len(blob):
            raise ProcessTensorCacheError(f"trailing bytes in cache file {path}")
        pt = ProcessTensor(tensors, dtau, config)
        meta["fingerprint"] = fingerprint
        return pt, meta
    except (struct.error, ValueError, json.JSONDecodeError) as exc:
        raise ProcessTensorCacheError(f"corrupt cache file {path}: {exc}") from exc
