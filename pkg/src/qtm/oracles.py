"""Independent references for the engine: the printed 10x10 reduced Liouvillian
of the ideal three-qubit machine, the finite-to-ideal convergence study and the
W-state steady-state check."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from qtm import hilbert
from qtm.liouvillian import (
    DegenerateSteadyStateError,
    build_liouvillian,
    residual,
    spectral_info,
    steady_state,
)
from qtm.machines import (
    GeneralMachineConfig,
    MachineConfig,
    SINGLE_EXCITATION_3Q,
    build_machine_3q,
    build_machine_general,
)
from qtm.observables import (
    concurrence_paper,
    energy_currents,
    fidelity_pure,
    general_w_from_couplings,
    psi_ss_from_couplings,
    w_state,
)

# Operator basis of the reduced matrix, as (row ket, column ket) of |a><b|.
SUPP_A_BASIS: tuple[tuple[str, str], ...] = (
    ("100", "100"), ("100", "010"), ("100", "001"),
    ("010", "100"), ("010", "010"), ("010", "001"),
    ("001", "100"), ("001", "010"), ("001", "001"),
    ("000", "000"),
)


def supp_a_matrix(g13: float, g23: float, rate_plus_100: float, rate_minus_300: float, rate_plus_300: float) -> np.ndarray:
    """Reduced ideal-limit Liouvillian transcribed entry by entry (no derivation)."""
    i = 1j
    a, b = g13, g23
    gp1, gm3, gp3 = rate_plus_100, rate_minus_300, rate_plus_300
    rows = [
        [0, 0, i * a, 0, 0, 0, -i * a, 0, 0, gp1],
        [0, 0, i * b, 0, 0, 0, 0, -i * a, 0, 0],
        [i * a, i * b, -gm3 / 2, 0, 0, 0, 0, 0, -i * a, 0],
        [0, 0, 0, 0, 0, i * a, -i * b, 0, 0, 0],
        [0, 0, 0, 0, 0, i * b, 0, -i * b, 0, 0],
        [0, 0, 0, i * a, i * b, -gm3 / 2, 0, 0, -i * b, 0],
        [-i * a, 0, 0, -i * b, 0, 0, -gm3 / 2, 0, i * a, 0],
        [0, -i * a, 0, 0, -i * b, 0, 0, -gm3 / 2, i * b, 0],
        [0, 0, -i * a, 0, 0, -i * b, i * a, i * b, -gm3, gp3],
        [0, 0, 0, 0, 0, 0, 0, 0, gm3, -gp1 - gp3],
    ]
    return np.array(rows, dtype=complex)


def supp_a_vectorize(rho3: np.ndarray) -> np.ndarray:
    """Coefficients of an 8x8 three-qubit state on the reduced operator basis."""
    out = np.empty(len(SUPP_A_BASIS), dtype=complex)
    for k, (a, b) in enumerate(SUPP_A_BASIS):
        out[k] = rho3[int(a, 2), int(b, 2)]
    return out


def supp_a_rates(config: MachineConfig) -> tuple[float, float, float]:
    """(gamma+_100, gamma-_300, gamma+_300) from the ideal-mode jump set."""
    rates = {"L_100": 0.0, "L_300^dag": 0.0, "L_300": 0.0}
    for jp in build_machine_3q(config).jumps:
        rates[jp.label] = jp.rate
    return rates["L_100"], rates["L_300^dag"], rates["L_300"]


def _engine_permutation() -> list[int]:
    """Column-stacked index in the 4-dim machine space of each reduced basis element."""
    pos = {idx: k for k, idx in enumerate(SINGLE_EXCITATION_3Q)}
    d = len(SINGLE_EXCITATION_3Q)
    return [pos[int(a, 2)] + d * pos[int(b, 2)] for a, b in SUPP_A_BASIS]


def engine_reduced_matrix(config: MachineConfig) -> np.ndarray:
    """Engine Liouvillian restricted to the reduced operator basis (in its order)."""
    if not config.ideal:
        raise ValueError("the reduced 10x10 form only exists in ideal mode")
    m = build_machine_3q(config)
    sup = build_liouvillian(m.hamiltonian, m.jumps)
    perm = _engine_permutation()
    return sup.matrix[np.ix_(perm, perm)]


def engine_deviation(config: MachineConfig) -> np.ndarray:
    """Entrywise |engine - transcription| on the reduced basis."""
    ref = supp_a_matrix(config.g13, config.g23, *supp_a_rates(config))
    return np.abs(engine_reduced_matrix(config) - ref)


def engine_vs_supp_a(config: MachineConfig) -> float:
    return float(engine_deviation(config).max())


def supp_a_kernel(matrix: np.ndarray) -> np.ndarray:
    """Unit-trace null vector of the reduced matrix (populations at 0, 4, 8, 9)."""
    _, s, vh = np.linalg.svd(matrix)
    v = vh[-1].conj()
    return v / (v[0] + v[4] + v[8] + v[9])


@dataclass
class LimitRow:
    scale: float
    mu: float
    U: float
    fidelity: float
    concurrence: float
    current: float
    residual: float


def limit_convergence_study(
    base: MachineConfig,
    scales: Sequence[float] = (1, 2, 4, 8, 16, 32),
    mu0: float | None = None,
    U0: float | None = None,
) -> list[LimitRow]:
    """Finite-mode steady states along mu = s*mu0, U = s^2*U0 (so U/mu grows with s).

    ``mu0``/``U0`` default to the base config's ``mu1``/``U``, which must then be finite.
    """
    mu0 = base.mu1 if mu0 is None else mu0
    U0 = base.U if U0 is None else U0
    if not (np.isfinite(mu0) and np.isfinite(U0)):
        raise ValueError("limit study needs finite mu0 and U0")
    target = psi_ss_from_couplings(base.g13, base.g23)
    rows = []
    for s in scales:
        cfg = replace(base, mu1=s * mu0, U=s * s * U0)
        m = build_machine_3q(cfg)
        sup = build_liouvillian(m.hamiltonian, m.jumps)
        rho = steady_state(sup)
        rows.append(
            LimitRow(
                scale=float(s),
                mu=cfg.mu1,
                U=cfg.U,
                fidelity=fidelity_pure(rho, target),
                concurrence=concurrence_paper(hilbert.partial_trace(rho, [0, 1], 3)),
                current=energy_currents(rho, m.hamiltonian, m.jumps).J,
                residual=residual(sup, rho),
            )
        )
    return rows


@dataclass
class WStateReport:
    n: int
    fidelity: float
    fidelity_w: float
    residual: float
    gap: float
    zero_mode_count: int
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def wstate_steady_check(config: GeneralMachineConfig, tol: float = 1e-10) -> WStateReport:
    """Numerical steady state of the reduced general machine vs the W-like closed form."""
    if not 2 <= config.n <= 6:
        raise ValueError(f"n must be in [2, 6], got {config.n}")
    m = build_machine_general(config)
    sup = build_liouvillian(m.hamiltonian, m.jumps)
    info = spectral_info(sup)
    try:
        rho = steady_state(sup)
    except DegenerateSteadyStateError:
        return WStateReport(config.n, float("nan"), float("nan"), float("nan"), info.gap, info.zero_mode_count, False)
    target = m.project_ket(general_w_from_couplings(config.couplings).amplitudes)
    w = m.project_ket(w_state(config.n).amplitudes)
    fid = fidelity_pure(rho, target)
    return WStateReport(
        n=config.n,
        fidelity=fid,
        fidelity_w=fidelity_pure(rho, w),
        residual=residual(sup, rho),
        gap=info.gap,
        zero_mode_count=info.zero_mode_count,
        passed=fid > 1 - tol,
    )


def supp_a_vector_of_target(g13: float, g23: float) -> np.ndarray:
    return supp_a_vectorize(psi_ss_from_couplings(g13, g23).density_matrix())

