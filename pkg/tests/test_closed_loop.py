import numpy as np
import pytest

from backstep import ControlProfile, Kind, NormKind, Spectrum, SystemSpec
from backstep import assemble_closed_loop, build_T, closed_loop_spectrum, d_norm, decay_rate
from backstep import pole_shift_mismatch, simulate, solve_feedback
from backstep.errors import InsufficientSampleError
from backstep.spectral import random_state


@pytest.fixture(scope="module")
def loop(water):
    sp, B = Spectrum.from_spec(water, 32), ControlProfile.sinusoidal(32)
    g = solve_feedback(B, sp, 1.0)
    return sp, B, g


def _char(mu, sp, B, g):
    # det(mu - A - b K^T) / det(mu - A) = 1 - sum b_n K_n / (mu - lambda_n)
    return 1 - np.sum(B.b * g.K / (mu - sp.values))


def test_shifted_poles_are_roots(loop):
    sp, B, g = loop
    for mu in sp.values[:8] - 1.0:
        assert abs(_char(mu, sp, B, g)) < 1e-12


def test_pole_shift(loop):
    sp, B, g = loop
    eigs = closed_loop_spectrum(assemble_closed_loop(sp, B, g, r=0.5))
    _, mis = pole_shift_mismatch(eigs, sp, 1.0)
    assert mis.max() < 1e-8 * (1 + np.abs(sp.values).max())


@pytest.mark.parametrize("alpha", [1.2, 2.0, 3.0])
def test_pole_shift_power(alpha):
    sp, B = Spectrum.from_spec(SystemSpec(Kind.GENERIC, alpha=alpha), 48), ControlProfile.unit(48)
    g = solve_feedback(B, sp, 2.0)
    _, mis = pole_shift_mismatch(closed_loop_spectrum(assemble_closed_loop(sp, B, g)), sp, 2.0)
    assert mis.max() < 1e-8 * (1 + np.abs(sp.values).max())


def test_even_sector(water):
    from backstep import Parity
    sp, B = Spectrum.from_spec(water, 20, Parity.EVEN), ControlProfile.unit(20, Parity.EVEN)
    g = solve_feedback(B, sp, 1.0)
    _, mis = pole_shift_mismatch(closed_loop_spectrum(assemble_closed_loop(sp, B, g)), sp, 1.0)
    assert mis.max() < 1e-10


def test_spectrum_sorted(loop):
    sp, B, g = loop
    eigs = closed_loop_spectrum(assemble_closed_loop(sp, B, g))
    assert np.all(np.diff(eigs.imag) >= 0)


def test_d_norm_decays_exactly(loop):
    sp, B, g = loop
    t = np.linspace(0, 6, 256)
    bundle = build_T(g, B, sp, 1.0)
    u0 = random_state(32, np.random.default_rng(1))
    tr = simulate(assemble_closed_loop(sp, B, g), u0, t, bundle)
    assert np.allclose(tr.norm_d, tr.norm_d[0] * np.exp(-t), rtol=1e-9)
    assert d_norm(u0, bundle) == pytest.approx(tr.norm_d[0])


def test_propagator_matches_expm(loop):
    from scipy.linalg import expm
    sp, B, g = loop
    mat = assemble_closed_loop(sp, B, g)
    u0 = random_state(32, np.random.default_rng(2))
    tr = simulate(mat, u0, np.linspace(0, 2, 9))
    assert np.allclose(tr.states[-1], expm(2 * mat.unweighted()) @ u0.coeffs, atol=1e-10)
    assert tr.propagator == "eigen"


def test_no_dnorm_without_transform(loop):
    sp, B, g = loop
    tr = simulate(assemble_closed_loop(sp, B, g), random_state(32, np.random.default_rng(0)),
                  np.linspace(0, 1, 10))
    with pytest.raises(ValueError):
        tr.norms(NormKind.DNORM)


def test_decay_fit_synthetic(loop):
    sp, B, g = loop
    tr = simulate(assemble_closed_loop(sp, B, g), random_state(32, np.random.default_rng(0)),
                  np.linspace(0, 6, 256), build_T(g, B, sp, 1.0))
    fit = decay_rate(tr, NormKind.DNORM, (1.0, 6.0))
    assert fit.rate == pytest.approx(-1.0, rel=1e-9) and fit.r2 == pytest.approx(1.0)
    with pytest.raises(InsufficientSampleError):
        decay_rate(tr, NormKind.L2, (1.0, 1.05))


def test_grid_must_start_at_zero(loop):
    sp, B, g = loop
    with pytest.raises(ValueError):
        simulate(assemble_closed_loop(sp, B, g), random_state(32, np.random.default_rng(0)), [0.5, 1.0])
