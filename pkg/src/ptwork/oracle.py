"""Brute-force reference implementations.

Everything here trades efficiency for directness: closed-system
enumeration of the two-measurement outcomes, exact diagonalisation of a
qubit coupled to a handful of discrete modes, and the exhaustive
path sum that the compressed tensor network must reproduce.  Used by the
test suite; never on the production path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .contour import BranchStep, step_propagator, unitary_step
from .model import ID2, SZ, DrivingProtocol, InfluenceCoefficients

__all__ = [
    "DiscreteBath",
    "closed_tpmp",
    "ed_wcf",
    "ed_tpmp_distribution",
    "path_sum_wcf",
]

# sigma_z eigenvalue pairs (forward, backward) per row-major Liouville index
_OM = np.array([0.0, 2.0, -2.0, 0.0])  # z+ - z-
_OP = np.array([2.0, 0.0, 0.0, -2.0])  # z+ + z-
_TRACE_MASK = np.array([True, False, False, True])


@dataclass(frozen=True)
class DiscreteBath:
    """A few harmonic modes with sigma_z coupling, for exact diagonalisation.

    ``modes`` is a sequence of (frequency, coupling) pairs; each mode is
    truncated at ``fock_cutoff`` Fock states.  The truncation must hold
    essentially all thermal weight: the occupation probability of the
    highest retained level must be below 1e-6.
    """

    modes: Tuple[Tuple[float, complex], ...]
    fock_cutoff: int
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple((float(w), complex(g)) for w, g in self.modes))
        if self.fock_cutoff < 2:
            raise ValueError("need at least two Fock states per mode")
        for w, _ in self.modes:
            if w <= 0:
                raise ValueError("mode frequencies must be positive")
            top = np.exp(-self.beta * w * (self.fock_cutoff - 1)) * (
                1.0 - np.exp(-self.beta * w)
            )
            if top >= 1e-6:
                raise ValueError(
                    f"thermal occupation {top:.2e} of the highest Fock level "
                    f"exceeds 1e-6; raise fock_cutoff"
                )

    @property
    def dim(self) -> int:
        return self.fock_cutoff ** len(self.modes)

    def operators(self):
        """(H_E, B) on the joint mode space, B = sum_k (g* b+ + g b)."""
        n = self.fock_cutoff
        a = np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)
        num = np.diag(np.arange(n)).astype(complex)
        h_e = np.zeros((self.dim, self.dim), dtype=complex)
        b = np.zeros_like(h_e)
        for k, (w, g) in enumerate(self.modes):
            left = np.eye(n ** k, dtype=complex)
            right = np.eye(n ** (len(self.modes) - k - 1), dtype=complex)
            h_e += w * np.kron(np.kron(left, num), right)
            ak = np.kron(np.kron(left, a), right)
            b += np.conj(g) * ak.conj().T + g * ak
        return h_e, b

    def gibbs_state(self) -> np.ndarray:
        h_e, _ = self.operators()
        pop = np.exp(-self.beta * np.diag(h_e).real)
        return np.diag(pop / pop.sum()).astype(complex)

    def correlation(self, t) -> np.ndarray:
        """C(t) = sum_k |g|^2 [coth(beta w/2) cos(wt) - i sin(wt)]."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for w, g in self.modes:
            out += abs(g) ** 2 * (
                np.cos(w * t) / np.tanh(0.5 * self.beta * w) - 1j * np.sin(w * t)
            )
        return out if out.ndim else complex(out)

    def influence_coefficients(self, dtau, n_steps, memory_steps) -> InfluenceCoefficients:
        """Cell integrals of the discrete-mode correlation, in closed form."""
        K = memory_steps
        ws = np.array([w for w, _ in self.modes])
        g2 = np.array([abs(g) ** 2 for _, g in self.modes])
        cth = 1.0 / np.tanh(0.5 * self.beta * ws)
        kernel = np.empty(K + 1, dtype=complex)
        kernel[0] = np.sum(
            g2 * (cth * 2.0 * np.sin(0.5 * ws * dtau) ** 2 - 1j * (ws * dtau - np.sin(ws * dtau)))
            / ws**2
        )
        box = 4.0 * np.sin(0.5 * ws * dtau) ** 2 / ws**2
        for dk in range(1, K + 1):
            kernel[dk] = np.sum(
                g2 * box * (cth * np.cos(ws * dk * dtau) - 1j * np.sin(ws * dk * dtau))
            )
        return InfluenceCoefficients(kernel, dtau, n_steps, K)


def _merge_outcomes(works, probs, drop=1e-14):
    order = np.argsort(works)
    works, probs = np.asarray(works)[order], np.asarray(probs)[order]
    merged_w: List[float] = []
    merged_p: List[float] = []
    for w, p in zip(works, probs):
        if merged_w and abs(w - merged_w[-1]) < 1e-10 * max(1.0, abs(w)):
            merged_p[-1] += p
        else:
            merged_w.append(float(w))
            merged_p.append(float(p))
    keep = [i for i, p in enumerate(merged_p) if p > drop]
    return [(merged_w[i], merged_p[i]) for i in keep]


def closed_tpmp(protocol: DrivingProtocol, dtau: float) -> List[Tuple[float, float]]:
    """Exact discrete work outcomes for the bare (uncoupled) qubit.

    Starts from the maximally mixed state, measures H(0), propagates with
    midpoint-sampled step exponentials, measures H(t_f), and enumerates
    the four outcome pairs.  Outcomes with equal work are merged and
    vanishing-probability entries dropped.
    """
    f = int(round(protocol.t_f / dtau))
    if abs(f * dtau - protocol.t_f) > 1e-9 * protocol.t_f or f < 1:
        raise ValueError("t_f must be a positive integer multiple of dtau")
    u = ID2.copy()
    for j in range(1, f + 1):
        u = unitary_step(protocol.hamiltonian((j - 0.5) * dtau), dtau, sign=-1) @ u
    e0, v0 = np.linalg.eigh(protocol.hamiltonian(0.0))
    ef, vf = np.linalg.eigh(protocol.hamiltonian(protocol.t_f))
    amp = vf.conj().T @ u @ v0
    prob = 0.5 * np.abs(amp) ** 2  # p_n = 1/2 from the maximally mixed state
    works = [ef[mm] - e0[nn] for mm in range(2) for nn in range(2)]
    probs = [prob[mm, nn] for mm in range(2) for nn in range(2)]
    return _merge_outcomes(works, probs)


def _ed_setup(db: DiscreteBath, protocol: DrivingProtocol, dtau: float):
    """Eigen-data of H(0), H(t_f) and the midpoint-product propagator."""
    h_e, b = db.operators()
    dim_e = db.dim
    id_e = np.eye(dim_e, dtype=complex)

    def h_total(hs):
        return np.kron(hs, id_e) + np.kron(SZ, b) + np.kron(ID2, h_e)

    f = int(round(protocol.t_f / dtau))
    if abs(f * dtau - protocol.t_f) > 1e-9 * protocol.t_f or f < 1:
        raise ValueError("t_f must be a positive integer multiple of dtau")
    u = np.eye(2 * dim_e, dtype=complex)
    for j in range(1, f + 1):
        h = h_total(protocol.hamiltonian((j - 0.5) * dtau))
        u = unitary_step(h, dtau, sign=-1) @ u
    e0, v0 = np.linalg.eigh(h_total(protocol.hamiltonian(0.0)))
    ef, vf = np.linalg.eigh(h_total(protocol.hamiltonian(protocol.t_f)))
    return e0, v0, ef, vf, u


def ed_wcf(
    db: DiscreteBath,
    protocol: DrivingProtocol,
    t_e: float,
    chi_grid: Sequence[float],
    dtau: float,
):
    """Characteristic function from exact diagonalisation.

    The initial state is (1/2) kron Gibbs(H_E); the first-measurement
    average is produced by evolving under H(0) for the equilibration time
    t_e (applied exactly, not step-split).  Returns (chi_grid, phi).
    """
    if db.dim * 2 > 4096:
        raise ValueError("joint dimension exceeds the 4096 exact-diagonalisation bound")
    e0, v0, ef, vf, u = _ed_setup(db, protocol, dtau)
    rho0 = np.kron(0.5 * ID2, db.gibbs_state())
    # in the H0 eigenbasis the equilibration is a pure phase sandwich
    r = v0.conj().T @ rho0 @ v0
    phases = np.exp(-1j * t_e * e0)
    r = (phases[:, None] * r) * phases.conj()[None, :]
    g = vf.conj().T @ u @ v0
    chi_grid = np.asarray(chi_grid, dtype=float)
    phi = np.empty(chi_grid.shape, dtype=complex)
    for i, chi in enumerate(chi_grid.ravel()):
        m = (g * np.exp(-1j * chi * e0)[None, :]) @ r @ g.conj().T
        phi.ravel()[i] = np.sum(np.exp(1j * chi * ef) * np.diag(m))
    return chi_grid, phi


def ed_tpmp_distribution(
    db: DiscreteBath,
    protocol: DrivingProtocol,
    dtau: float,
    initial: str = "mixed",
) -> List[Tuple[float, float]]:
    """Exact two-measurement work distribution on the truncated joint space.

    ``initial``: 'mixed' for (1/2) kron Gibbs(H_E), 'gibbs' for the joint
    Gibbs state of H(0).  The first measurement dephases exactly, so the
    outcome table only needs the diagonal of the initial state in the
    H(0) eigenbasis.
    """
    e0, v0, ef, vf, u = _ed_setup(db, protocol, dtau)
    if initial == "mixed":
        rho0 = np.kron(0.5 * ID2, db.gibbs_state())
        p_n = np.real(np.diag(v0.conj().T @ rho0 @ v0))
    elif initial == "gibbs":
        w = np.exp(-db.beta * (e0 - e0.min()))
        p_n = w / w.sum()
    else:
        raise ValueError("initial must be 'mixed' or 'gibbs'")
    g = vf.conj().T @ u @ v0
    trans = np.abs(g) ** 2
    works = (ef[:, None] - e0[None, :]).ravel()
    probs = (trans * p_n[None, :]).ravel()
    return _merge_outcomes(works, probs, drop=0.0)


def path_sum_wcf(
    eta: InfluenceCoefficients,
    branch_steps: Sequence[BranchStep],
    rho0: np.ndarray,
) -> complex:
    """Exhaustive sum over all 4^N Liouville paths.

    Weights each path by the bare two-branch propagator elements and the
    pairwise influence factors
    exp[-(z+_j - z-_j)(eta_jk z+_k - eta_jk* z-_k)], then closes with the
    trace.  Exponential cost; limited to N <= 10.
    """
    n = len(branch_steps)
    if n > 10:
        raise ValueError("path sum limited to N <= 10 steps (cost 4^N)")
    table = eta.lower_table(n)
    paths = np.indices((4,) * n).reshape(n, -1).T  # (4^n, n)
    om = _OM[paths]
    op = _OP[paths]
    expo = -(
        np.einsum("pj,jk,pk->p", om, table.real, om)
        + 1j * np.einsum("pj,jk,pk->p", om, table.imag, op)
    )
    weight = np.exp(expo)
    rvec = np.asarray(rho0, dtype=complex).reshape(4)
    amp = (step_propagator(branch_steps[0], eta.dtau) @ rvec)[paths[:, 0]]
    for j in range(1, n):
        m = step_propagator(branch_steps[j], eta.dtau)
        amp = amp * m[paths[:, j], paths[:, j - 1]]
    return complex(np.sum(weight * amp * _TRACE_MASK[paths[:, -1]]))
