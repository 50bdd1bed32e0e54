import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtm import hilbert
from qtm.hilbert import basis_ket, ket_to_dm, partial_trace
from qtm.liouvillian import build_liouvillian, evolve, steady_state
from qtm.machines import GeneralMachineConfig, MachineConfig, build_machine_3q, build_machine_general, fermi_dirac
from qtm.observables import (
    TargetState,
    concurrence_paper,
    concurrence_wootters,
    dark_state_check,
    energy_currents,
    fidelity_pure,
    general_w,
    general_w_from_couplings,
    psi_ss,
    psi_ss_from_couplings,
    purity,
    singlet,
    w_state,
)

PSI_MINUS = (basis_ket((1, 0)) - basis_ket((0, 1))) / np.sqrt(2)


def direct_dissipator(L, rho):
    LdL = L.conj().T @ L
    return L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)


def test_concurrence_examples():
    for f in (concurrence_paper, concurrence_wootters):
        assert f(ket_to_dm(PSI_MINUS)) == pytest.approx(1.0, abs=1e-12)
        assert f(np.eye(4) / 4) == pytest.approx(0.0, abs=1e-12)


def test_concurrence_of_reduced_ideal_steady_state():
    # amplitudes (2, -1)/sqrt(5) on |10>, |01>: C = 2 * 2/5 = 0.8
    m = build_machine_3q(MachineConfig(g13=1.0, g23=2.0))
    rho = m.lift(steady_state(build_liouvillian(m.hamiltonian, m.jumps)))
    rho12 = partial_trace(rho, [0, 1], 3)
    assert concurrence_paper(rho12) == pytest.approx(0.8, abs=1e-9)
    assert concurrence_wootters(rho12) == pytest.approx(0.8, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(a=st.tuples(*[st.floats(-1, 1)] * 4), b=st.tuples(*[st.floats(-1, 1)] * 4))
def test_wootters_vanishes_on_product_states(a, b):
    u = np.array([a[0] + 1j * a[1], a[2] + 1j * a[3]])
    v = np.array([b[0] + 1j * b[1], b[2] + 1j * b[3]])
    if np.linalg.norm(u) < 1e-3 or np.linalg.norm(v) < 1e-3:
        return
    psi = np.kron(u / np.linalg.norm(u), v / np.linalg.norm(v))
    assert concurrence_wootters(ket_to_dm(psi)) < 1e-12


def textbook_wootters(rho):
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(rho @ yy @ rho.conj() @ yy).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_wootters_matches_textbook_form_on_mixed_states(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    # full-rank states keep the textbook square roots well conditioned
    assert concurrence_wootters(rho) == pytest.approx(textbook_wootters(rho), abs=1e-9)


@pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 13))
def test_concurrence_of_dark_state_is_sin_two_theta(theta):
    rho12 = partial_trace(psi_ss(theta).density_matrix(), [0, 1], 3)
    assert concurrence_paper(rho12) == pytest.approx(math.sin(2 * theta), abs=1e-12)
    assert concurrence_wootters(rho12) == pytest.approx(math.sin(2 * theta), abs=1e-12)


def test_concurrence_maximal_at_equal_couplings():
    thetas = np.linspace(0, math.pi / 2, 101)
    values = [concurrence_paper(partial_trace(psi_ss(t).density_matrix(), [0, 1], 3)) for t in thetas]
    assert thetas[int(np.argmax(values))] == pytest.approx(math.pi / 4)


def test_target_state_amplitudes():
    t = psi_ss_from_couplings(0.3, 0.4)
    assert t.amplitudes[0b100].real == pytest.approx(0.8)
    assert t.amplitudes[0b010].real == pytest.approx(-0.6)
    assert np.count_nonzero(t.amplitudes) == 2
    np.testing.assert_allclose(singlet().amplitudes, np.kron(PSI_MINUS, basis_ket((0,))), atol=1e-15)


def test_target_state_phase_and_norm_conventions():
    flipped = TargetState(-singlet().amplitudes, "flipped")
    np.testing.assert_allclose(flipped.amplitudes, singlet().amplitudes)
    with pytest.raises(ValueError):
        TargetState(np.array([1.0, 1.0]), "unnormalised")


def test_w_state_amplitudes():
    w = w_state(3)
    N = 5
    expected = np.zeros(2**N)
    expected[hilbert.basis_index((1, 0, 0, 0, 0))] = 1
    expected[hilbert.basis_index((0, 1, 0, 0, 0))] = -1
    expected[hilbert.basis_index((0, 0, 1, 0, 0))] = -1
    np.testing.assert_allclose(w.amplitudes, expected / np.sqrt(3), atol=1e-15)


def test_general_w_n2_is_psi_ss():
    np.testing.assert_allclose(general_w_from_couplings([(0.3, 0.4)]).amplitudes, psi_ss_from_couplings(0.3, 0.4).amplitudes, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(pairs=st.lists(st.tuples(st.floats(0.01, 1), st.floats(0.01, 1)), min_size=1, max_size=4))
def test_general_w_reproduces_alpha_ratios(pairs):
    t = general_w_from_couplings(pairs)
    N = 2 * len(pairs) + 1
    lead = t.amplitudes[hilbert.excitation_index(0, N)]
    for j, (g1, gp) in enumerate(pairs):
        assert -t.amplitudes[hilbert.excitation_index(j + 1, N)] / lead == pytest.approx(g1 / gp, rel=1e-12)
    assert abs(np.linalg.norm(t.amplitudes) - 1) < 1e-12


def test_fidelity_examples():
    s = singlet()
    assert fidelity_pure(s.density_matrix(), s) == pytest.approx(1.0, abs=1e-15)
    assert fidelity_pure(ket_to_dm(basis_ket((0, 0, 0))), s) == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_fidelity_bounds(seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    phi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi, phi = psi / np.linalg.norm(psi), phi / np.linalg.norm(phi)
    f = fidelity_pure(ket_to_dm(psi), phi)
    assert -1e-12 <= f <= 1 + 1e-12
    assert fidelity_pure(ket_to_dm(psi), psi * np.exp(0.3j)) == pytest.approx(1.0, abs=1e-9)
    if np.linalg.norm(np.outer(psi, psi.conj()) - np.outer(phi, phi.conj())) > 1e-6:
        assert f < 1 - 1e-13


def test_purity_examples():
    assert purity(singlet().density_matrix()) == pytest.approx(1.0)
    for d in (2, 4, 8):
        assert purity(np.eye(d) / d) == pytest.approx(1 / d)


def test_energy_currents_from_ground_state():
    cfg = MachineConfig(gamma1=0.02, gamma3=0.03, T3=0.7)
    m = build_machine_3q(cfg)
    rho = m.basis_state((0, 0, 0))
    cur = energy_currents(rho, m.hamiltonian, m.jumps)
    assert cur.Q1 == pytest.approx(0.02, rel=1e-12)
    # direct trace with the ideal rates on the 4-state block
    q3 = sum(jp.rate * np.trace(m.hamiltonian @ direct_dissipator(jp.operator, rho)).real
             for jp in m.jumps if jp.reservoir == "right_1")
    assert cur.Q3 == pytest.approx(q3, rel=1e-12)
    assert cur.Q3 == pytest.approx(0.03 * fermi_dirac(1.0, 0.0, 0.7), rel=1e-12)
    assert cur.J == pytest.approx((cur.Q1 - cur.Q3) / 2)


def test_energy_currents_vanish_without_reservoirs():
    m = build_machine_3q(MachineConfig(gamma1=0.0, gamma3=0.0))
    cur = energy_currents(m.basis_state((0, 0, 0)), m.hamiltonian, m.jumps)
    assert (cur.Q1, cur.Q3, cur.J) == (0.0, 0.0, 0.0)


def test_ideal_steady_state_carries_no_current():
    for g13, g23 in ((0.05, 0.05), (0.1, 0.7)):
        cfg = MachineConfig(g13=g13, g23=g23, gamma1=0.1, gamma3=0.1)
        m = build_machine_3q(cfg)
        rho = steady_state(build_liouvillian(m.hamiltonian, m.jumps))
        assert abs(energy_currents(rho, m.hamiltonian, m.jumps).J) < 1e-9 * cfg.gamma1 * cfg.epsilon


def test_bright_steady_state_conducts():
    cfg = MachineConfig(U=15.0, mu1=15.0, gamma1=0.1, gamma3=0.1)
    m = build_machine_3q(cfg)
    rho = steady_state(build_liouvillian(m.hamiltonian, m.jumps))
    assert abs(energy_currents(rho, m.hamiltonian, m.jumps).J) > 1e-6 * cfg.gamma1


def test_dark_state_check_passes_for_matching_couplings():
    for theta in np.linspace(0.05, 1.5, 7):
        g13, g23 = math.sin(theta), math.cos(theta)
        m = build_machine_3q(MachineConfig(g13=g13, g23=g23))
        report = dark_state_check(m.project_ket(psi_ss(theta).amplitudes), m.hamiltonian, m.jumps)
        assert report.passed
        assert all(c.classification == "annihilate" for c in report.jumps)


def test_dark_state_check_fails_for_occupied_sink():
    m = build_machine_3q(MachineConfig())
    report = dark_state_check(m.project_ket(basis_ket((0, 0, 1))), m.hamiltonian, m.jumps)
    assert not report.passed
    kinds = {c.label: c.classification for c in report.jumps}
    assert kinds["L_300^dag"] == "violate"


def test_dark_state_check_fails_for_wrong_target():
    m = build_machine_3q(MachineConfig(g13=0.02, g23=0.05))
    report = dark_state_check(m.project_ket(singlet().amplitudes), m.hamiltonian, m.jumps)
    assert not report.passed
    assert report.h_eff_residual > 1e-3


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_dark_state_check_w_state_general_machine(n):
    m = build_machine_general(GeneralMachineConfig.uniform(n, g=0.07))
    assert dark_state_check(m.project_ket(w_state(n).amplitudes), m.hamiltonian, m.jumps).passed


def test_dark_state_check_rejects_dimension_mismatch():
    m = build_machine_3q(MachineConfig())
    with pytest.raises(ValueError):
        dark_state_check(singlet(), m.hamiltonian, m.jumps)


def test_purity_dips_during_ideal_transient():
    m = build_machine_3q(MachineConfig(gamma1=0.05, gamma3=0.05))
    sup = build_liouvillian(m.hamiltonian, m.jumps)
    pur = [purity(r) for r in evolve(sup, m.basis_state((0, 0, 0)), np.linspace(0, 3000, 301))]
    assert pur[0] == pytest.approx(1.0)
    assert min(pur) < 0.9
    assert pur[-1] > 1 - 1e-6
