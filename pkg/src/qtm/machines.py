"""Hamiltonians, jump operators and rates for the three-qubit entanglement
engine and its (2n-1)-qubit W-state generalisation.

Units: hbar = k_B = 1 and energies, temperatures and rates are multiples of
the qubit gap epsilon. ``INFINITE`` marks the ideal limits U -> inf, mu -> inf
with U/mu -> inf; it is never substituted numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit

from qtm import hilbert
from qtm.hilbert import SIGMA_MINUS, SIGMA_PLUS, embed_site_operator

INFINITE = math.inf

Direction = Literal["excite", "relax"]


def is_infinite(x: float) -> bool:
    return math.isinf(x) and x > 0


@dataclass(frozen=True)
class MachineConfig:
    """Parameters of the three-qubit machine, in units of epsilon."""

    g13: float = 0.05
    g23: float = 0.05
    U: float = INFINITE
    mu1: float = INFINITE
    T1: float = 1.0
    T3: float = 1.0
    gamma1: float = 0.1
    gamma3: float = 0.1
    mu3: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        for name in ("g13", "g23", "gamma1", "gamma3", "T1", "T3"):
            value = getattr(self, name)
            if not value >= 0 or math.isnan(value):
                raise ValueError(f"{name} must be >= 0, got {value}")
        if is_infinite(self.U) and not is_infinite(self.mu1):
            raise ValueError("U = INFINITE requires mu1 = INFINITE (ideal limit U/mu -> inf)")
        if math.isinf(self.mu3) or math.isinf(self.epsilon):
            raise ValueError("mu3 and epsilon must be finite")

    @property
    def ideal(self) -> bool:
        return is_infinite(self.U) and is_infinite(self.mu1)


@dataclass(frozen=True)
class GeneralMachineConfig:
    """Parameters of the (2n-1)-qubit machine.

    ``couplings[j]`` is the pair ``(g_{1,n+j+1}, g_{j+2,n+j+1})`` in one-based
    qubit labels: qubit 1 and qubit j+2 both talk to sink qubit n+j+1.
    """

    n: int
    couplings: tuple[tuple[float, float], ...]
    U: float = INFINITE
    mu: float = INFINITE
    T: float = 1.0
    gamma1: float = 0.1
    gamma_sink: tuple[float, ...] = ()
    epsilon: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        couplings = tuple((float(a), float(b)) for a, b in self.couplings)
        if len(couplings) != self.n - 1:
            raise ValueError(f"need {self.n - 1} coupling pairs, got {len(couplings)}")
        if any(not (g >= 0) for pair in couplings for g in pair):
            raise ValueError("couplings must be >= 0")
        object.__setattr__(self, "couplings", couplings)
        sink = tuple(float(g) for g in self.gamma_sink) or (self.gamma1,) * (self.n - 1)
        if len(sink) != self.n - 1:
            raise ValueError(f"need {self.n - 1} sink rates, got {len(sink)}")
        if any(g < 0 for g in sink) or self.gamma1 < 0 or self.T < 0:
            raise ValueError("rates and temperature must be >= 0")
        object.__setattr__(self, "gamma_sink", sink)
        if is_infinite(self.U) and not is_infinite(self.mu):
            raise ValueError("U = INFINITE requires mu = INFINITE")

    @classmethod
    def uniform(cls, n: int, g: float = 0.05, **kwargs) -> GeneralMachineConfig:
        return cls(n=n, couplings=((g, g),) * (n - 1), **kwargs)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n - 1

    @property
    def ideal(self) -> bool:
        return is_infinite(self.U) and is_infinite(self.mu)

    def sink_site(self, j: int) -> int:
        """Zero-based site of the sink for coupling pair ``j`` (0-based)."""
        return self.n + j


@dataclass(frozen=True)
class JumpProcess:
    operator: np.ndarray = field(repr=False)
    rate: float
    reservoir: str
    direction: Direction
    label: str = ""

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        nz = np.flatnonzero(op)
        if len(nz) != 1 or op.flat[nz[0]] != 1:
            raise ValueError(f"jump operator {self.label!r} must be a single transition with unit amplitude")
        if not self.rate >= 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")
        object.__setattr__(self, "operator", op)

    def restricted(self, basis) -> JumpProcess:
        return JumpProcess(hilbert.restrict(self.operator, basis), self.rate, self.reservoir, self.direction, self.label)


def fermi_dirac(energy: float, mu: float, T: float) -> float:
    """Occupation ``1/(exp((energy - mu)/T) + 1)``; exactly 1 for ``mu = INFINITE``."""
    if is_infinite(mu):
        return 1.0
    if not T > 0:
        raise ValueError(f"temperature must be > 0 for finite mu, got T={T}")
    return float(expit(-(energy - mu) / T))


def _fermi_pair(energy: float, mu: float, T: float) -> tuple[float, float]:
    """(n_F, 1 - n_F) without cancellation in the tails."""
    if is_infinite(mu):
        return 1.0, 0.0
    if not T > 0:
        raise ValueError(f"temperature must be > 0 for finite mu, got T={T}")
    x = (energy - mu) / T
    return float(expit(-x)), float(expit(x))


def charging_energy(p: int, q: int, U: float) -> float:
    if p not in (0, 1) or q not in (0, 1):
        raise ValueError("p and q must be bits")
    k = p + q
    if k == 0:
        return 0.0
    return k * U


def _coulomb(k: int, U: float) -> float:
    # U * k(k-1)/2 pairs; gives 0, 0, U, 3U for k = 0..3
    return U * k * (k - 1) / 2


def build_hamiltonian_3q(config: MachineConfig) -> np.ndarray:
    if math.isinf(config.U):
        raise ValueError("U = INFINITE has no finite 8x8 Hamiltonian; use build_machine_3q for ideal mode")
    return _hamiltonian_3q(config, config.U)


def _hamiltonian_3q(config: MachineConfig, U: float) -> np.ndarray:
    n = 3
    H = np.zeros((8, 8), dtype=complex)
    for idx in range(8):
        k = hilbert.occupation(idx)
        H[idx, idx] = config.epsilon * k + _coulomb(k, U)
    for site, g in ((0, config.g13), (1, config.g23)):
        hop = embed_site_operator(SIGMA_PLUS, site, n) @ embed_site_operator(SIGMA_MINUS, 2, n)
        H += g * (hop + hop.conj().T)
    return H


def _transition(dim: int, to: int, frm: int) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=complex)
    op[to, frm] = 1.0
    return op


def _append(processes: list, op: np.ndarray, rate: float, reservoir: str, direction: Direction, label: str):
    if rate > 0:
        processes.append(JumpProcess(op, rate, reservoir, direction, label))


def build_jump_processes_3q(config: MachineConfig) -> list[JumpProcess]:
    """Local fermionic dissipation on qubits 1 and 3 as 8x8 jump operators.

    In ideal mode only ``L_100`` (rate gamma1), ``L_300`` and ``L_300^dagger``
    survive; finite mode yields up to 16 processes.
    """
    eps = config.epsilon
    processes: list[JumpProcess] = []
    if config.ideal:
        _append(processes, _transition(8, 0b100, 0b000), config.gamma1, "left", "excite", "L_100")
        n_up, n_down = _fermi_pair(eps, config.mu3, config.T3)
        _append(processes, _transition(8, 0b001, 0b000), config.gamma3 * n_up, "right_1", "excite", "L_300")
        _append(processes, _transition(8, 0b000, 0b001), config.gamma3 * n_down, "right_1", "relax", "L_300^dag")
        return processes

    for p in (0, 1):
        for q in (0, 1):
            n_up, n_down = _fermi_pair(eps + charging_energy(p, q, config.U), config.mu1, config.T1)
            lower, upper = hilbert.basis_index((0, p, q)), hilbert.basis_index((1, p, q))
            _append(processes, _transition(8, upper, lower), config.gamma1 * n_up, "left", "excite", f"L_1{p}{q}")
            _append(processes, _transition(8, lower, upper), config.gamma1 * n_down, "left", "relax", f"L_1{p}{q}^dag")
    for p in (0, 1):
        for q in (0, 1):
            n_up, n_down = _fermi_pair(eps + charging_energy(p, q, config.U), config.mu3, config.T3)
            lower, upper = hilbert.basis_index((p, q, 0)), hilbert.basis_index((p, q, 1))
            _append(processes, _transition(8, upper, lower), config.gamma3 * n_up, "right_1", "excite", f"L_3{p}{q}")
            _append(processes, _transition(8, lower, upper), config.gamma3 * n_down, "right_1", "relax", f"L_3{p}{q}^dag")
    return processes


def check_validity_regime(config: MachineConfig, ratio: float = 0.1) -> list[str]:
    """Warnings for violated weak-coupling / local-dissipation inequalities.

    ``a << b`` is read as ``a <= ratio * b``. Never raises.
    """
    eps = config.epsilon
    warnings: list[str] = []
    # reservoir j -> (gamma_j, T_j, mu_j, couplings of qubit j to its partners)
    reservoirs = {
        1: (config.gamma1, config.T1, config.mu1, {"g13": config.g13}),
        3: (config.gamma3, config.T3, config.mu3, {"g13": config.g13, "g23": config.g23}),
    }
    for j, (gamma, T, mu, gs) in reservoirs.items():
        for name, g in gs.items():
            for sign in (+1, -1):
                scale = max(T, abs(eps + sign * g - mu))
                if not gamma <= ratio * scale:
                    s = "+" if sign > 0 else "-"
                    warnings.append(
                        f"gamma{j}={gamma:g} not << max(T{j}, |eps{s}{name}-mu{j}|)={scale:g} (ratio {ratio:g})"
                    )
            scale = max(T, abs(eps - mu))
            if not g <= ratio * scale:
                warnings.append(f"{name}={g:g} not << max(T{j}, |eps-mu{j}|)={scale:g}: dissipation may not be local")
    return warnings


def build_hamiltonian_general(config: GeneralMachineConfig, subspace: str = "full") -> np.ndarray:
    """Bare energies + all-pairs Coulomb + flip-flops to the sink qubits.

    ``subspace="single_excitation"`` returns the 2n x 2n block on
    ``hilbert.single_excitation_basis`` (ground, then one excitation per site).
    """
    N = config.n_qubits
    eps = config.epsilon
    if subspace == "full":
        if N > 11:
            raise ValueError(f"full space of {N} qubits exceeds the 11-qubit guard")
        if math.isinf(config.U):
            raise ValueError("U = INFINITE has no finite full-space Hamiltonian; use subspace='single_excitation'")
        dim = 2**N
        H = np.zeros((dim, dim), dtype=complex)
        for idx in range(dim):
            k = hilbert.occupation(idx)
            H[idx, idx] = eps * k + _coulomb(k, config.U)
        for j, (g_first, g_partner) in enumerate(config.couplings):
            sink = config.sink_site(j)
            lower_sink = embed_site_operator(SIGMA_MINUS, sink, N)
            for site, g in ((0, g_first), (j + 1, g_partner)):
                hop = embed_site_operator(SIGMA_PLUS, site, N) @ lower_sink
                H += g * (hop + hop.conj().T)
        return H
    if subspace == "single_excitation":
        dim = N + 1
        H = np.zeros((dim, dim), dtype=complex)
        H[1:, 1:] = eps * np.eye(N)
        for j, (g_first, g_partner) in enumerate(config.couplings):
            s = 1 + config.sink_site(j)
            for site, g in ((0, g_first), (j + 1, g_partner)):
                H[1 + site, s] += g
                H[s, 1 + site] += g
        return H
    raise ValueError(f"unknown subspace {subspace!r}")


def build_jump_processes_general(config: GeneralMachineConfig, subspace: str = "single_excitation") -> list[JumpProcess]:
    """Ideal-limit dissipators of the general machine on the single-excitation block."""
    if subspace != "single_excitation":
        raise ValueError("general-machine dissipation is only available on the single-excitation subspace")
    if not config.ideal:
        raise ValueError("general-machine dissipation requires the ideal limits U = mu = INFINITE")
    N = config.n_qubits
    dim = N + 1
    n_up, n_down = _fermi_pair(config.epsilon, 0.0, config.T) if config.T > 0 else (0.0, 1.0)
    processes: list[JumpProcess] = []
    _append(processes, _transition(dim, 1, 0), config.gamma1, "left", "excite", "L_1,+")
    for j, gamma in enumerate(config.gamma_sink):
        s = 1 + config.sink_site(j)
        label = f"L_{config.sink_site(j) + 1}"
        _append(processes, _transition(dim, 0, s), gamma * n_down, f"right_{j + 1}", "relax", label + ",-")
        _append(processes, _transition(dim, s, 0), gamma * n_up, f"right_{j + 1}", "excite", label + ",+")
    return processes


@dataclass(frozen=True)
class Machine:
    """Hamiltonian and dissipators living on ``basis`` (indices into the full qubit space)."""

    hamiltonian: np.ndarray = field(repr=False)
    jumps: tuple[JumpProcess, ...] = field(repr=False)
    basis: tuple[int, ...]
    n_qubits: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def full_dim(self) -> int:
        return 2**self.n_qubits

    @property
    def is_full(self) -> bool:
        return self.dim == self.full_dim

    def lift(self, rho: np.ndarray) -> np.ndarray:
        if self.is_full:
            return np.asarray(rho, dtype=complex)
        return hilbert.lift(rho, self.basis, self.full_dim)

    def project_ket(self, psi: np.ndarray) -> np.ndarray:
        """Amplitudes of a full-space ket on the machine basis."""
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (self.full_dim,):
            raise ValueError(f"ket has shape {psi.shape}, expected ({self.full_dim},)")
        return psi[list(self.basis)]

    def basis_state(self, bits) -> np.ndarray:
        """Density matrix of a computational basis state, on the machine basis."""
        idx = hilbert.basis_index(bits)
        if idx not in self.basis:
            raise ValueError(f"state {tuple(bits)} is outside the machine subspace")
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        k = self.basis.index(idx)
        rho[k, k] = 1.0
        return rho


SINGLE_EXCITATION_3Q = tuple(hilbert.single_excitation_basis(3))  # |000>, |100>, |010>, |001>


def build_machine_3q(config: MachineConfig) -> Machine:
    """Full 8-dim machine in finite mode; 4-dim single-excitation block in ideal mode."""
    jumps = build_jump_processes_3q(config)
    if config.ideal:
        # U only shifts doubly occupied levels, which the ideal dynamics never reaches
        H = hilbert.restrict(_hamiltonian_3q(config, 0.0), SINGLE_EXCITATION_3Q)
        jumps = [jp.restricted(SINGLE_EXCITATION_3Q) for jp in jumps]
        return Machine(H, tuple(jumps), SINGLE_EXCITATION_3Q, 3)
    return Machine(build_hamiltonian_3q(config), tuple(jumps), tuple(range(8)), 3)


def build_machine_general(config: GeneralMachineConfig) -> Machine:
    H = build_hamiltonian_general(config, "single_excitation")
    jumps = build_jump_processes_general(config)
    basis = tuple(hilbert.single_excitation_basis(config.n_qubits))
    return Machine(H, tuple(jumps), basis, config.n_qubits)
