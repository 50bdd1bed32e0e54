"""Entanglement, fidelity, purity, energy currents and the machines' target states."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from qtm import hilbert
from qtm.hilbert import as_matrix, dagger
from qtm.liouvillian import dissipator_superop, devectorize, vectorize
from qtm.machines import JumpProcess

DARK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TargetState:
    amplitudes: np.ndarray = field(repr=False)
    label: str

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(psi)
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"target state {self.label!r} has norm {norm}")
        nz = np.flatnonzero(np.abs(psi) > 1e-15)
        if nz.size:
            # global phase: the nonzero amplitude with the highest basis index
            # (the leading qubit's excitation) is real positive
            phase = psi[nz[-1]] / abs(psi[nz[-1]])
            psi = psi / phase
        object.__setattr__(self, "amplitudes", psi)

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.size)))

    def density_matrix(self) -> np.ndarray:
        return hilbert.ket_to_dm(self.amplitudes)


def psi_ss(theta: float) -> TargetState:
    """``(cos(theta)|10> - sin(theta)|01>) (x) |0>`` on three qubits."""
    psi = np.zeros(8, dtype=complex)
    psi[0b100] = math.cos(theta)
    psi[0b010] = -math.sin(theta)
    return TargetState(psi, f"psi_ss(theta={theta:.12g})")


def psi_ss_from_couplings(g13: float, g23: float) -> TargetState:
    return psi_ss(math.atan2(g13, g23))


def singlet() -> TargetState:
    """``|Psi^->  (x) |0>`` with ``|Psi^-> = (|10> - |01>)/sqrt(2)``."""
    t = psi_ss(math.pi / 4)
    return TargetState(t.amplitudes, "singlet")


def general_w(alphas: Sequence[float]) -> TargetState:
    """Partially entangled W-like state on 2n-1 qubits, n = len(alphas) + 1.

    Amplitude ``1/sqrt(beta)`` on an excitation of qubit 1 and
    ``-alpha_j/sqrt(beta)`` on qubit ``j+1``; sinks empty.
    """
    alphas = [float(a) for a in alphas]
    n = len(alphas) + 1
    N = 2 * n - 1
    beta = 1.0 + sum(a * a for a in alphas)
    psi = np.zeros(2**N, dtype=complex)
    psi[hilbert.excitation_index(0, N)] = 1.0
    for j, a in enumerate(alphas):
        psi[hilbert.excitation_index(j + 1, N)] = -a
    psi /= math.sqrt(beta)
    return TargetState(psi, f"general_W({', '.join(f'{a:.6g}' for a in alphas)})")


def w_state(n: int) -> TargetState:
    t = general_w([1.0] * (n - 1))
    return TargetState(t.amplitudes, f"W_{n}")


def general_w_from_couplings(couplings: Sequence[tuple[float, float]]) -> TargetState:
    return general_w([g_first / g_partner for g_first, g_partner in couplings])


def concurrence_paper(rho12) -> float:
    """``2 max(0, |c| - sqrt(p11 p00))`` with ``c = <01|rho|10>``.

    Exact for the X-shaped two-qubit states this machine produces (no
    ``|00><11|`` coherence); use :func:`concurrence_wootters` otherwise.
    """
    rho = as_matrix(rho12)
    c = rho[0b01, 0b10]
    p00 = max(rho[0, 0].real, 0.0)
    p11 = max(rho[3, 3].real, 0.0)
    return float(2 * max(0.0, abs(c) - math.sqrt(p11 * p00)))


_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def concurrence_wootters(rho12) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are the singular values of ``W^T (sy x sy) W`` with
    ``rho = W W^dag`` from the eigendecomposition. They equal the square roots
    of the eigenvalues of ``rho (sy x sy) rho* (sy x sy)``. Round-off in the
    null space then enters only at second order, which keeps near-pure states
    accurate to machine precision.
    """
    rho = as_matrix(rho12)
    p, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = v * np.sqrt(np.clip(p, 0.0, None))
    lam = np.linalg.svd(w.T @ _YY @ w, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def fidelity_pure(rho, target) -> float:
    """``<psi|rho|psi>`` for a pure target (TargetState or ket)."""
    psi = target.amplitudes if isinstance(target, TargetState) else np.asarray(target, dtype=complex)
    rho = as_matrix(rho)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"state is {rho.shape}, target has {psi.size} amplitudes")
    return float(np.real(psi.conj() @ rho @ psi))


def purity(rho) -> float:
    rho = as_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def trace_distance(a, b) -> float:
    return float(0.5 * np.abs(np.linalg.eigvalsh(as_matrix(a) - as_matrix(b))).sum())


@dataclass(frozen=True)
class EnergyCurrents:
    Q1: float
    Q3: float
    J: float


def reservoir_heat(rho, H, jumps: Sequence[JumpProcess], reservoir_prefix: str) -> float:
    """``Tr{H sum_k gamma_k D[L_k] rho}`` over jumps of the matching reservoir(s)."""
    rho = as_matrix(rho)
    H = as_matrix(H)
    selected = [jp for jp in jumps if jp.reservoir == reservoir_prefix or jp.reservoir.startswith(reservoir_prefix + "_")]
    if not selected:
        raise ValueError(f"no jump process couples to reservoir {reservoir_prefix!r}")
    total = np.zeros_like(rho)
    v = vectorize(rho)
    for jp in selected:
        total += devectorize(dissipator_superop(jp.operator, jp.rate) @ v)
    return float(np.real(np.trace(H @ total)))


def energy_currents(rho, H, jumps: Sequence[JumpProcess]) -> EnergyCurrents:
    """Energy flow into the system from the left reservoir (Q1) and from all
    sink reservoirs together (Q3); ``J = (Q1 - Q3)/2``.

    With no dissipation at all the currents are zero.
    """
    if not jumps:
        return EnergyCurrents(0.0, 0.0, 0.0)
    q1 = reservoir_heat(rho, H, jumps, "left") if any(jp.reservoir == "left" for jp in jumps) else 0.0
    q3 = reservoir_heat(rho, H, jumps, "right") if any(jp.reservoir.startswith("right") for jp in jumps) else 0.0
    return EnergyCurrents(q1, q3, 0.5 * (q1 - q3))


@dataclass
class JumpCheck:
    label: str
    norm: float
    residual: float
    classification: str  # "annihilate", "preserve" or "violate"


@dataclass
class DarkStateReport:
    jumps: list[JumpCheck]
    eigenvalue: complex
    h_eff_residual: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "h_eff_eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
            "h_eff_residual": self.h_eff_residual,
            "jumps": [
                {"label": j.label, "norm": j.norm, "residual": j.residual, "classification": j.classification}
                for j in self.jumps
            ],
        }


def effective_hamiltonian(H, jumps: Sequence[JumpProcess]) -> np.ndarray:
    H = as_matrix(H)
    out = H.astype(complex).copy()
    for jp in jumps:
        out -= 0.5j * jp.rate * dagger(jp.operator) @ jp.operator
    return out


def dark_state_check(psi, H, jumps: Sequence[JumpProcess], tol: float = DARK_TOL) -> DarkStateReport:
    """Is ``psi`` invariant under every jump and an eigenvector of ``H - i/2 sum gamma L^dag L``?

    ``psi`` must live in the same space as ``H`` (project full-space targets
    with :meth:`qtm.machines.Machine.project_ket` first).
    """
    psi = psi.amplitudes if isinstance(psi, TargetState) else np.asarray(psi, dtype=complex)
    H = as_matrix(H)
    if psi.shape != (H.shape[0],):
        raise ValueError(f"ket has {psi.size} amplitudes, Hamiltonian is {H.shape[0]}-dimensional")
    psi = psi / np.linalg.norm(psi)
    checks = []
    for jp in jumps:
        out = jp.operator @ psi
        norm = float(np.linalg.norm(out))
        res = float(np.linalg.norm(out - (psi.conj() @ out) * psi))
        if norm < tol:
            kind = "annihilate"
        elif res < tol:
            kind = "preserve"
        else:
            kind = "violate"
        checks.append(JumpCheck(jp.label, norm, res, kind))
    Heff = effective_hamiltonian(H, jumps)
    lam = complex(psi.conj() @ Heff @ psi)
    h_res = float(np.linalg.norm(Heff @ psi - lam * psi))
    passed = all(c.residual < tol for c in checks) and h_res < tol
    return DarkStateReport(checks, lam, h_res, passed)
