import mpmath as mp
import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings, strategies as st

from backstep import ControlProfile, Kind, Spectrum, SystemSpec
from backstep import asymptotic_refinement, build_T, kn_series, operator_equality_residual
from backstep import solve_feedback, tbb_residual
from backstep.errors import ShapeError, SynthesisError, UnsupportedNormalization
from backstep.feedback import gain_floor_index, refinement_schedule


def _mp_gains(sp, b, lam):
    mp.mp.dps = 50
    N = len(sp)
    vals = [mp.mpc(0, float(v.imag)) for v in sp.values]
    A = mp.matrix(N, N)
    for p in range(N):
        for n in range(N):
            A[p, n] = b[p] / (vals[n] - vals[p] + lam)
    x = mp.lu_solve(A, mp.matrix([complex(v) for v in b]))
    return np.array([complex(-x[n] / b[n]) for n in range(N)])


@pytest.mark.parametrize("profile", ["unit", "sinusoidal"])
def test_gains_match_extended_precision(water, profile):
    sp = Spectrum.from_spec(water, 12)
    B = getattr(ControlProfile, profile)(12)
    got = solve_feedback(B, sp, 1.5).K
    want = _mp_gains(sp, list(B.b), mp.mpf("1.5"))
    assert np.allclose(got, want, rtol=1e-12, atol=1e-13)


def test_gains_pinned(sp64, unit64):
    g = solve_feedback(unit64, sp64, 1.0)
    assert g.K[0] == pytest.approx(-0.1017095 + 1.13779685j, abs=1e-7)
    assert np.abs(g.K).max() == pytest.approx(1.2340347631051123, rel=1e-9)
    assert g.residual < 1e-14
    assert np.allclose(g.k, -(g.K + 1.0))


def test_kn_series_agrees(sp64):
    B = ControlProfile.sinusoidal(64)
    g = solve_feedback(B, sp64, 2.0)
    assert np.allclose(kn_series(g, B, sp64), g.k, atol=1e-12)


def test_tbb_holds(sp64, unit64):
    g = solve_feedback(unit64, sp64, 1.0)
    assert tbb_residual(g, unit64, sp64, 1.0) < 1e-12


def test_zero_profile_rejected(sp64):
    b = np.ones(64)
    b[7] = 0
    with pytest.raises(SynthesisError):
        solve_feedback(ControlProfile(b), sp64, 1.0)


def test_size_mismatch(sp64):
    with pytest.raises(ShapeError):
        solve_feedback(ControlProfile.unit(32), sp64, 1.0)


def test_transform_factorisation(sp64, unit64):
    g = solve_feedback(unit64, sp64, 1.0)
    t = build_T(g, unit64, sp64, 1.0, r=0.4)
    assert t.factorization_error < 1e-12
    assert t.sigma_min > 0
    assert np.allclose(t.T, t.tauK @ t.tau @ t.S)


def test_transform_independent_of_r(sp64, unit64):
    g = solve_feedback(unit64, sp64, 1.0)
    a = build_T(g, unit64, sp64, 1.0, r=0.0).unweighted()
    b = build_T(g, unit64, sp64, 1.0, r=-0.8).unweighted()
    assert np.allclose(a, b, atol=1e-12)


def test_transform_cond_pinned(sp64, unit64):
    t = build_T(solve_feedback(unit64, sp64, 1.0), unit64, sp64, 1.0)
    assert t.cond == pytest.approx(5.562714008801137, rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_operator_equality_any_gains(seed):
    rng = np.random.default_rng(seed)
    sp = Spectrum.from_spec(SystemSpec(), 8)
    B = ControlProfile(1 + 0.5 * rng.random(8))
    base = solve_feedback(B, sp, 1.0)
    K = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    g = replace(base, K=K)
    t = build_T(g, B, sp, 1.0)
    assert operator_equality_residual(t, g, B, sp, 1.0) <= 1e-10 * np.linalg.norm(t.T, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_transform_linear_in_gains(seed):
    rng = np.random.default_rng(seed)
    sp = Spectrum.from_spec(SystemSpec(), 8)
    B = ControlProfile.unit(8)
    base = solve_feedback(B, sp, 1.0)
    K1, K2 = (rng.standard_normal(8) + 1j * rng.standard_normal(8) for _ in range(2))
    a = rng.standard_normal()
    T = lambda K: build_T(replace(base, K=K), B, sp, 1.0).T
    assert np.allclose(T(a * K1 + K2), a * T(K1) + T(K2), atol=1e-12)


def test_gain_floor(sp64, unit64):
    g = solve_feedback(unit64, sp64, 1.0)
    n0 = gain_floor_index(g, unit64)
    assert n0 >= 1
    assert np.all(np.abs(g.K[sp64.modes >= n0]) >= 0.5)


@pytest.mark.parametrize("alpha, sched, M", [(1.2, (0.3, 0.1, -0.1), 2), (1.5, (0.0, -0.5), 1),
                                             (1.4, (0.1, -0.3), 1)])
def test_schedule(alpha, sched, M):
    s, m, term = refinement_schedule(alpha, 8)
    assert tuple(s) == pytest.approx(sched) and m == M and term


def test_layer_identity():
    sp = Spectrum.from_spec(SystemSpec(Kind.GENERIC, alpha=1.2), 128)
    B = ControlProfile.unit(128)
    lay = asymptotic_refinement(solve_feedback(B, sp, 1.0), sp, 1.0, B)
    assert lay.M == 2 and lay.terminated
    assert lay.identity_residual < 1e-12


def test_layers_need_unit_profile(sp64):
    B = ControlProfile.sinusoidal(64)
    with pytest.raises(UnsupportedNormalization):
        asymptotic_refinement(solve_feedback(B, sp64, 1.0), sp64, 1.0, B)
