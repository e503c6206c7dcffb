"""Generalised-time contour.

Concatenates the equilibration, counting, and driving segments onto one
axis of N = s + m + f uniform steps, assigns each step its forward and
backward system Hamiltonian, and turns a step into the corresponding 4x4
two-branch propagator.

Vectorisation convention (fixed throughout the package): row-major,
vec(A X B) = (A kron B^T) vec(X), so vec(rho)[2a + b] = rho[a, b].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .model import DrivingProtocol

__all__ = [
    "GeneralizedTimeGrid",
    "BranchStep",
    "assign_branches",
    "step_propagator",
    "branch_propagators",
    "unitary_step",
]


@dataclass(frozen=True)
class GeneralizedTimeGrid:
    """Uniform discretisation of the concatenated contour.

    ``s`` equilibration steps (t_e = s*dtau), ``m`` counting steps
    (chi = m*dtau), ``f`` drive steps (t_f = f*dtau); N = s + m + f.
    """

    dtau: float
    s: int
    m: int
    f: int

    def __post_init__(self):
        if self.dtau <= 0:
            raise ValueError("dtau must be positive")
        if self.s < 1 or self.f < 1:
            raise ValueError("need at least one equilibration and one drive step")
        if self.m < 0:
            raise ValueError("counting step count m must be non-negative")

    @property
    def n_steps(self) -> int:
        return self.s + self.m + self.f

    @property
    def t_e(self) -> float:
        return self.s * self.dtau

    @property
    def chi(self) -> float:
        return self.m * self.dtau

    @property
    def t_f(self) -> float:
        return self.f * self.dtau

    @property
    def tau_f(self) -> float:
        return self.n_steps * self.dtau

    @staticmethod
    def from_durations(dtau: float, t_e: float, chi: float, t_f: float) -> "GeneralizedTimeGrid":
        """Build a grid from durations that must be exact multiples of dtau."""
        return GeneralizedTimeGrid(
            dtau,
            _exact_steps(t_e, dtau, "t_e"),
            _exact_steps(chi, dtau, "chi"),
            _exact_steps(t_f, dtau, "t_f"),
        )


def _exact_steps(duration: float, dtau: float, name: str) -> int:
    n = int(round(duration / dtau))
    if abs(n * dtau - duration) > 1e-9 * max(dtau, abs(duration)):
        raise ValueError(f"{name} = {duration} is not an integer multiple of dtau = {dtau}")
    return n


@dataclass(frozen=True)
class BranchStep:
    """Forward and backward system Hamiltonians for one contour step."""

    index: int
    h_forward: np.ndarray
    h_backward: np.ndarray

    def __post_init__(self):
        for h in (self.h_forward, self.h_backward):
            if h.shape != (2, 2) or np.max(np.abs(h - h.conj().T)) > 1e-12:
                raise ValueError("branch Hamiltonians must be 2x2 Hermitian")


def assign_branches(
    grid: GeneralizedTimeGrid,
    protocol: DrivingProtocol,
    counting_sign: int = +1,
) -> List[BranchStep]:
    """Per-step forward/backward Hamiltonians along the contour.

    Forward branch: s steps of H(0), m counting steps of H(0), then the
    drive sampled at step midpoints.  Backward branch: s steps of H(0),
    the drive at step midpoints, then m counting steps of H(t_f).  The
    drive (and so the counterdiabatic term, if enabled) enters only the
    drive segments; counting segments use the bare measured Hamiltonians.

    ``counting_sign=-1`` negates the counting-segment Hamiltonians on
    both branches, which evaluates the sweep at -chi.
    """
    if counting_sign not in (+1, -1):
        raise ValueError("counting_sign must be +1 or -1")
    if abs(grid.t_f - protocol.t_f) > 1e-9 * protocol.t_f:
        raise ValueError(
            f"grid drive duration {grid.t_f} does not match protocol t_f {protocol.t_f}"
        )
    s, m, f = grid.s, grid.m, grid.f
    dtau = grid.dtau
    h0 = protocol.hamiltonian(0.0)
    hf = protocol.hamiltonian(protocol.t_f)
    drive = [protocol.hamiltonian((j - 0.5) * dtau) for j in range(1, f + 1)]

    steps = []
    for j in range(1, grid.n_steps + 1):
        if j <= s:
            h_fwd = h0
        elif j <= s + m:
            h_fwd = counting_sign * h0
        else:
            h_fwd = drive[j - s - m - 1]
        if j <= s:
            h_bwd = h0
        elif j <= s + f:
            h_bwd = drive[j - s - 1]
        else:
            h_bwd = counting_sign * hf
        steps.append(BranchStep(j, h_fwd, h_bwd))
    return steps


def unitary_step(h: np.ndarray, dtau: float, sign: int = -1) -> np.ndarray:
    """exp(sign * 1j * dtau * h) for Hermitian h, by eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(sign * 1j * dtau * evals)) @ evecs.conj().T


def step_propagator(step: BranchStep, dtau: float) -> np.ndarray:
    """Two-branch propagator for one step.

    M = exp(dtau * (-i H_fwd kron 1 + i 1 kron H_bwd^T))
      = exp(-i dtau H_fwd) kron (exp(+i dtau H_bwd))^T,

    exact at the system level (no series truncation).
    """
    uf = unitary_step(step.h_forward, dtau, sign=-1)
    ub = unitary_step(step.h_backward, dtau, sign=+1)
    return np.kron(uf, ub.T)


def branch_propagators(steps: List[BranchStep], dtau: float) -> np.ndarray:
    """Stacked step propagators, shape (len(steps), 4, 4)."""
    return np.array([step_propagator(s, dtau) for s in steps])
