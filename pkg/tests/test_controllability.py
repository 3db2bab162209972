import mpmath as mp
import numpy as np
import pytest

from backstep import ControlProfile, Spectrum, gram_matrix, ingham_gap_report
from backstep import minimal_norm_control, moment_residuals, verify_null_control
from backstep.controllability import biorthogonal_coefficients
from backstep.errors import IllConditionedError, SingularityError
from backstep.spectral import random_state


def test_gram_against_quadrature(water):
    sp = Spectrum.from_spec(water, 5)
    G = gram_matrix(sp, 0.7)
    w = sp.frequencies
    mp.mp.dps = 30
    for n in range(5):
        for m in range(5):
            want = mp.quad(lambda s: mp.exp(1j * (w[n] - w[m]) * s), [0, 0.7])
            assert abs(G[n, m] - complex(want)) < 1e-14


def test_gram_hermitian_positive(water):
    G = gram_matrix(Spectrum.from_spec(water, 16), 1.0)
    assert np.array_equal(G, G.conj().T)
    assert np.linalg.eigvalsh(G).min() > 0


def test_repeated_frequency():
    from backstep.controllability import _gram
    with pytest.raises(SingularityError):
        _gram(np.array([1.0, 2.0, 2.0]), 1.0, complex)


def test_biorthogonal(water):
    G = gram_matrix(Spectrum.from_spec(water, 6), 2.0)
    C = biorthogonal_coefficients(G)
    assert np.allclose(G @ C, np.eye(6), atol=1e-10)


def test_gap_report(water):
    rep = ingham_gap_report(Spectrum.from_spec(water, 64))
    assert rep.passed and rep.omega == pytest.approx(abs(2.8692913455907223 - 5.160081565410964))
    assert np.all(np.diff(rep.gamma) >= 0)
    assert list(rep.N0) == [1, 2, 4, 8, 16, 32]


def test_null_control(water):
    sp, B = Spectrum.from_spec(water, 16), ControlProfile.sinusoidal(16)
    u0 = random_state(16, np.random.default_rng(3))
    plan = minimal_norm_control(u0, B, sp, 1.0)
    rep = verify_null_control(u0, plan, B, sp)
    assert rep.final_relative_norm < 1e-6
    assert moment_residuals(plan).max() < 1e-10
    assert rep.quadrature_discrepancy < 1e-8


def test_long_horizon_well_conditioned(water):
    sp, B = Spectrum.from_spec(water, 16), ControlProfile.unit(16)
    plan = minimal_norm_control(random_state(16, np.random.default_rng(0)), B, sp, 4.0)
    short = minimal_norm_control(random_state(16, np.random.default_rng(0)), B, sp, 1.0)
    assert plan.gram_cond < short.gram_cond
    assert plan.control_norm < short.control_norm


def test_short_horizon_refused(water):
    sp, B = Spectrum.from_spec(water, 32), ControlProfile.unit(32)
    with pytest.raises(IllConditionedError) as exc:
        minimal_norm_control(random_state(32, np.random.default_rng(0)), B, sp, 0.05)
    assert exc.value.condition > 1e12


def test_gram_full_period():
    from backstep.controllability import _gram
    G = _gram(np.array([1.0, 1.0 + 2 * np.pi]), 1.0, complex)
    assert abs(G[0, 1]) < 1e-15 and G[0, 0] == 1.0
