import numpy as np
import pytest

from backstep import Kind, Spectrum, SystemSpec, build_S, compact_tail_diagnostic, q_vector
from backstep import riesz_bounds, riesz_family, sum_bound_check
from backstep.errors import HypothesisViolation, RangeError
from backstep.riesz import resolvent_kernel


def test_kernel_entries(sp64):
    M = resolvent_kernel(sp64.values, 1.0)
    assert np.allclose(np.diag(M), 1.0)
    p, n = 3, 10
    assert M[p, n] == 1 / (sp64.values[n] - sp64.values[p] + 1.0)
    assert np.all(np.abs(M) <= 1.0 + 1e-15)


def test_nonpositive_lambda(sp64):
    with pytest.raises(ValueError):
        resolvent_kernel(sp64.values, 0.0)


def test_q_vector_column(sp64):
    q = q_vector(5, sp64, 2.0)
    assert np.allclose(q.coeffs, resolvent_kernel(sp64.values, 2.0)[:, 4])
    with pytest.raises(ValueError):
        q_vector(0, sp64, 1.0)


def test_split_diagonal(sp64):
    split = build_S(sp64, 0.5, r=0.3)
    assert np.allclose(np.diag(split.S), 2.0)
    assert np.all(np.diag(split.Sc) == 0)
    assert np.allclose(split.S - split.Sc, np.eye(64) / 0.5)


def test_split_weighting(sp64):
    S0 = build_S(sp64, 1.0, 0.0).S
    Sr = build_S(sp64, 1.0, 0.6).S
    n = sp64.modes.astype(float)
    assert np.allclose(Sr, n[:, None] ** 0.6 * S0 / n[None, :] ** 0.6)


def test_r_outside_range(sp64):
    with pytest.raises(RangeError):
        build_S(sp64, 1.0, 1.0)


def test_bounds_pinned(water):
    sp = Spectrum.from_spec(water, 128)
    assert riesz_bounds(riesz_family(sp, 1.0, 0.0)).cond == pytest.approx(31.37504573122599, rel=1e-8)
    b = riesz_bounds(riesz_family(sp, 1.0, -0.9))
    assert b.cond == pytest.approx(99.58979528892483, rel=1e-8)
    assert b.C1 > 0 and not b.degenerate


def test_bounds_symmetric_in_r(water):
    sp = Spectrum.from_spec(water, 64)
    a = riesz_bounds(riesz_family(sp, 1.0, 0.7)).cond
    b = riesz_bounds(riesz_family(sp, 1.0, -0.7)).cond
    assert a == pytest.approx(b, rel=1e-10)


def test_degenerate_flag():
    Q = np.eye(4)
    Q[:, 3] = Q[:, 2]
    b = riesz_bounds(Q)
    assert b.degenerate and b.C1 == 0 and b.cond == np.inf


def test_compact_tail_saturates(water):
    vals = [compact_tail_diagnostic(build_S(Spectrum.from_spec(water, N), 1.0, 0.0), 0.1)
            for N in (32, 64, 128)]
    assert vals[2] == pytest.approx(vals[1], rel=0.05)
    assert vals[1] == pytest.approx(vals[0], rel=0.05)


def test_sum_bound_hypothesis(water):
    with pytest.raises(HypothesisViolation):
        sum_bound_check(0.5, water, 16)


def test_sum_bound_table(water):
    t = sum_bound_check(0.0, water, 64)
    assert t.sup_ratio == pytest.approx(2.559687507113511, rel=1e-8)
    assert len(list(t.rows())) == 64 and t.n_big == 1024


def test_sum_bound_generic():
    spec = SystemSpec(Kind.GENERIC, alpha=2.0)
    a = sum_bound_check(0.5, spec, 32).sup_ratio
    b = sum_bound_check(0.5, spec, 64).sup_ratio
    assert np.isfinite(a) and abs(b / a - 1) < 0.15
