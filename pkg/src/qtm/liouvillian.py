"""Liouvillian assembly, steady states, spectra and propagation.

Vectorisation is column stacking throughout: ``vec(A rho B) = (B^T (x) A) vec(rho)``.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from qtm.hilbert import as_matrix, dagger, is_hermitian
from qtm.machines import JumpProcess

log = logging.getLogger(__name__)

ZERO_MODE_RTOL = 1e-9
PSD_TOL = 1e-9
EIGENBASIS_COND_MAX = 1e12


class DegenerateSteadyStateError(RuntimeError):
    def __init__(self, zero_mode_count: int):
        super().__init__(f"Liouvillian has {zero_mode_count} zero modes; steady state is not unique")
        self.zero_mode_count = zero_mode_count


class NotAStateError(ValueError):
    pass


def vectorize(rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got {rho.shape}")
    return rho.reshape(-1, order="F")


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorised square matrix")
    return v.reshape(d, d, order="F")


@dataclass(frozen=True)
class SpectralInfo:
    eigenvalues: np.ndarray = field(repr=False)
    zero_mode_count: int
    gap: float


@dataclass(frozen=True, eq=False)
class Superoperator:
    matrix: np.ndarray = field(repr=False)
    dim: int

    def __matmul__(self, rho):
        return devectorize(self.matrix @ vectorize(rho))

    def apply(self, rho) -> np.ndarray:
        return self @ rho


def dissipator_superop(L: np.ndarray, rate: float = 1.0) -> np.ndarray:
    """``rate * D[L]`` as a d^2 x d^2 matrix."""
    d = L.shape[0]
    eye = np.eye(d)
    LdL = dagger(L) @ L
    return rate * (np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye))


def hamiltonian_superop(H: np.ndarray) -> np.ndarray:
    d = H.shape[0]
    eye = np.eye(d)
    return -1j * (np.kron(eye, H) - np.kron(H.T, eye))


def build_liouvillian(H, jumps: Sequence[JumpProcess]) -> Superoperator:
    H = as_matrix(H)
    d = H.shape[0]
    if H.shape != (d, d):
        raise ValueError(f"Hamiltonian must be square, got {H.shape}")
    if not is_hermitian(H):
        raise ValueError("Hamiltonian is not Hermitian")
    L = hamiltonian_superop(H)
    for jp in jumps:
        if jp.operator.shape != (d, d):
            raise ValueError(f"jump {jp.label!r} has shape {jp.operator.shape}, Hamiltonian is {d}x{d}")
        L = L + dissipator_superop(jp.operator, jp.rate)
    return Superoperator(L, d)


def trace_row(d: int) -> np.ndarray:
    """Row vector <<I| with <<I|vec(rho) = tr(rho)."""
    return vectorize(np.eye(d)).real


def spectral_info(sup: Superoperator) -> SpectralInfo:
    ev = np.linalg.eigvals(sup.matrix)
    ev = ev[np.lexsort((ev.imag, -ev.real))]
    scale = np.max(np.abs(ev), initial=0.0)
    if scale == 0.0:
        return SpectralInfo(ev, len(ev), 0.0)
    zero = np.abs(ev) < ZERO_MODE_RTOL * scale
    count = int(zero.sum())
    rest = ev[~zero]
    gap = 0.0
    if rest.size:
        gap = float(-rest.real.max())
        if gap < ZERO_MODE_RTOL * scale:
            gap = 0.0
    return SpectralInfo(ev, count, gap)


def _solve_trace_replaced(sup: Superoperator) -> np.ndarray:
    d = sup.dim
    A = sup.matrix.copy()
    b = np.zeros(d * d, dtype=complex)
    # row 0 is the rho_00 population equation; it is redundant given trace preservation
    A[0, :] = trace_row(d)
    b[0] = 1.0
    return devectorize(np.linalg.solve(A, b))


def null_space_state(sup: Superoperator) -> np.ndarray:
    """Steady state from the eigenvector closest to eigenvalue zero (cross-check route)."""
    ev, vecs = np.linalg.eig(sup.matrix)
    k = int(np.argmin(np.abs(ev)))
    rho = devectorize(vecs[:, k])
    return rho / np.trace(rho)


def project_to_state(rho: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitise, clip eigenvalues in [-tol, 0) to zero and renormalise."""
    rho = 0.5 * (rho + dagger(rho))
    w, v = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise NotAStateError(f"matrix has eigenvalue {w.min():.3e} below -{tol:g}")
    if w.min() >= 0:
        return rho / np.trace(rho).real
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ dagger(v)
    return rho / np.trace(rho).real


def steady_state(sup: Superoperator, check_unique: bool = True) -> np.ndarray:
    if check_unique:
        info = spectral_info(sup)
        if info.zero_mode_count != 1:
            raise DegenerateSteadyStateError(info.zero_mode_count)
    return project_to_state(_solve_trace_replaced(sup))


def residual(sup: Superoperator, rho) -> float:
    return float(np.max(np.abs(sup.matrix @ vectorize(rho))))


def validate_state(rho, atol: float = 1e-9) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise NotAStateError(f"state must be square, got {rho.shape}")
    if not is_hermitian(rho, atol):
        raise NotAStateError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise NotAStateError(f"state has trace {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(0.5 * (rho + dagger(rho))).min() < -atol:
        raise NotAStateError("state is not positive semidefinite")
    return rho


class Propagator:
    """``exp(L t)`` for one Liouvillian, reusing a single eigendecomposition."""

    def __init__(self, sup: Superoperator, cond_max: float = EIGENBASIS_COND_MAX):
        self.sup = sup
        ev, V = np.linalg.eig(sup.matrix)
        cond = np.linalg.cond(V)
        self.use_eig = bool(np.isfinite(cond) and cond <= cond_max)
        if self.use_eig:
            self.eigenvalues = ev
            self.V = V
            self.V_inv = np.linalg.inv(V)
        else:
            log.debug("eigenbasis condition %.3e exceeds %.1e, using expm", cond, cond_max)

    def _step_eig(self, v0: np.ndarray, t: float) -> np.ndarray:
        return self.V @ (np.exp(self.eigenvalues * t) * (self.V_inv @ v0))

    def _step_expm(self, v0: np.ndarray, t: float) -> np.ndarray:
        return scipy.linalg.expm(self.sup.matrix * t) @ v0

    def __call__(self, rho0, t: float) -> np.ndarray:
        v0 = vectorize(rho0)
        if t == 0:
            return devectorize(v0.copy())
        if self.use_eig:
            rho = devectorize(self._step_eig(v0, t))
            if abs(np.trace(rho) - 1) < 1e-10 and is_hermitian(rho, 1e-10):
                return rho
        return devectorize(self._step_expm(v0, t))


def evolve(sup: Superoperator, rho0, times: Sequence[float]) -> list[np.ndarray]:
    rho0 = validate_state(rho0)
    if rho0.shape != (sup.dim, sup.dim):
        raise ValueError(f"state has shape {rho0.shape}, Liouvillian acts on {sup.dim}x{sup.dim}")
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("times must be nonnegative and ascending")
    prop = Propagator(sup)
    return [prop(rho0, float(t)) for t in times]
