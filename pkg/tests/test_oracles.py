import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtm.machines import GeneralMachineConfig, MachineConfig
from qtm.oracles import (
    SUPP_A_BASIS,
    engine_deviation,
    engine_reduced_matrix,
    engine_vs_supp_a,
    limit_convergence_study,
    supp_a_kernel,
    supp_a_matrix,
    supp_a_rates,
    supp_a_vector_of_target,
    wstate_steady_check,
)
from qtm.machines import fermi_dirac

POPULATIONS = [SUPP_A_BASIS.index(p) for p in (("100", "100"), ("010", "010"), ("001", "001"), ("000", "000"))]


def test_transcription_spot_entries():
    M = supp_a_matrix(0.3, 0.7, 0.1, 0.2, 0.05)
    assert M[0, 9] == 0.1  # gamma+_100 feeds |100><100| from |000><000|
    assert M[2, 2] == -0.1  # -gamma-_300 / 2
    assert M[8, 9] == 0.05
    assert M[9, 9] == pytest.approx(-0.15)
    assert M[1, 7] == pytest.approx(-0.3j)


def test_transcription_checksum():
    # hand count: twelve entries each of g13 and g23, rates on six diagonal/feed slots
    assert np.abs(supp_a_matrix(0.3, 0.7, 0.1, 0.2, 0.05)).sum() == pytest.approx(13.1, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(vals=st.tuples(*[st.floats(0, 2)] * 5))
def test_transcription_conserves_probability(vals):
    M = supp_a_matrix(*vals)
    np.testing.assert_allclose(M[POPULATIONS].sum(axis=0), 0, atol=1e-12)


def test_kernel_for_equal_couplings_is_the_singlet():
    k = supp_a_kernel(supp_a_matrix(0.5, 0.5, 0.1, 0.1, 0.05))
    expected = np.zeros(10)
    expected[[0, 4]] = 0.5
    expected[[1, 3]] = -0.5
    np.testing.assert_allclose(k, expected, atol=1e-12)


def test_kernel_is_one_dimensional():
    rng = np.random.default_rng(7)
    for _ in range(100):
        g13, g23 = rng.uniform(0.01, 1, 2)
        gp1, gm3 = rng.uniform(0.01, 1, 2)
        gp3 = rng.uniform(0, 0.5)
        s = np.linalg.svd(supp_a_matrix(g13, g23, gp1, gm3, gp3), compute_uv=False)
        assert s[-1] < 1e-12 * s[0]
        assert s[-2] > 1e-8 * s[0]


def test_kernel_matches_closed_form_target():
    for g13, g23 in [(0.1, 0.9), (0.4, 0.2), (1.0, 1.0)]:
        rates = supp_a_rates(MachineConfig(g13=g13, g23=g23))
        k = supp_a_kernel(supp_a_matrix(g13, g23, *rates))
        np.testing.assert_allclose(k, supp_a_vector_of_target(g13, g23), atol=1e-10)


def test_rates_from_machine():
    cfg = MachineConfig(gamma1=0.2, gamma3=0.3, T3=0.5)
    gp1, gm3, gp3 = supp_a_rates(cfg)
    nf = fermi_dirac(1.0, 0.0, 0.5)
    assert gp1 == 0.2
    assert gm3 == pytest.approx(0.3 * (1 - nf))
    assert gp3 == pytest.approx(0.3 * nf)


@pytest.mark.parametrize("g13", np.linspace(0.05, 1, 5))
@pytest.mark.parametrize("g23", np.linspace(0.05, 1, 5))
def test_engine_agrees_with_transcription(g13, g23):
    assert engine_vs_supp_a(MachineConfig(g13=g13, g23=g23)) < 1e-12


def test_engine_agrees_with_transcription_without_couplings():
    assert engine_vs_supp_a(MachineConfig(g13=0.0, g23=0.0)) < 1e-12


@pytest.mark.parametrize("gamma", [0.01, 0.1, 1.0])
def test_perturbed_engine_is_detected(gamma):
    base = MachineConfig(gamma1=gamma, gamma3=gamma)
    ref = supp_a_matrix(base.g13, base.g23, *supp_a_rates(base))
    shifted = engine_reduced_matrix(replace(base, gamma1=gamma + 1e-3))
    # the injected shift shows up in full in the gamma+_100 entries
    assert np.abs(shifted - ref).max() == pytest.approx(1e-3, rel=1e-9)


def test_deviation_requires_ideal_mode():
    with pytest.raises(ValueError):
        engine_deviation(MachineConfig(U=10.0, mu1=10.0))


def test_limit_study_converges():
    rows = limit_convergence_study(MachineConfig(), mu0=2.0, U0=4.0)
    fids = [r.fidelity for r in rows]
    assert all(b >= a for a, b in zip(fids[2:], fids[3:]))
    assert fids[-1] > 1 - 1e-3
    assert rows[-1].mu == 64.0 and rows[-1].U == 4096.0
    assert max(r.residual for r in rows) < 1e-9


def test_limit_study_needs_finite_start():
    with pytest.raises(ValueError):
        limit_convergence_study(MachineConfig())


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_wstate_equal_couplings(n):
    rep = wstate_steady_check(GeneralMachineConfig.uniform(n))
    assert rep.passed
    assert rep.fidelity_w > 1 - 1e-10
    assert rep.zero_mode_count == 1


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_wstate_random_couplings(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        couplings = tuple(tuple(rng.uniform(0.05, 1, 2)) for _ in range(n - 1))
        rep = wstate_steady_check(GeneralMachineConfig(n=n, couplings=couplings))
        assert rep.passed, rep


def test_wstate_unequal_example():
    # alpha = (1/2, 1): beta = 9/4, |W_3> overlap = (1 + 1/2 + 1)^2 / (3 beta)
    rep = wstate_steady_check(GeneralMachineConfig(n=3, couplings=((1.0, 2.0), (1.0, 1.0))))
    assert rep.fidelity > 1 - 1e-10
    assert rep.fidelity_w == pytest.approx(2.5**2 / (3 * 2.25), abs=1e-9)


def test_wstate_rejects_large_n():
    with pytest.raises(ValueError):
        wstate_steady_check(GeneralMachineConfig.uniform(7))
