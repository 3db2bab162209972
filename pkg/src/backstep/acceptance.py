"""Acceptance criteria as callable checks.

Each check returns a :class:`CriterionResult`; ``run_all`` is shared by the
``acceptance`` subcommand and ``tests/test_acceptance.py``.  Tolerances are
fixed constants below, never tuned at run time.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .closed_loop import (NormKind, assemble_closed_loop, closed_loop_spectrum, decay_rate,
                          pole_shift_mismatch, simulate)
from .controllability import minimal_norm_control, verify_null_control
from .feedback import (asymptotic_refinement, build_T, operator_equality_residual, solve_feedback)
from .profile import ControlProfile
from .riesz import riesz_bounds, riesz_family, sum_bound_check
from .spectral import Kind, Spectrum, SystemSpec, gap_constant, random_state

WATER = SystemSpec(Kind.WATER_WAVE, g=9.81, depth=1.0)

POLE_TOL = 1e-8
POLE_RUNTIME = 2.0
DNORM_TOL = 1e-6
RATE_TOL = 0.02
R2_MIN = 0.999
GAIN_GROWTH = 1.2
DECAY_FACTOR = 2.0
GAIN_AGREEMENT = 1e-4
RIESZ_DRIFT = 0.10
OPEQ_TOL = 1e-10
NULL_TOL = 1e-6
MOMENT_TOL = 1e-10
QUAD_TOL = 1e-8
GAP_DRIFT = 0.05
SUM_DRIFT = 0.15

LAMBDAS = (0.5, 1.0, 5.0)
N_SEEDS = 10
T_END = 6.0
GRID = 256


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d}. {self.title}: {self.detail} ({self.seconds:.2f}s)"


def _pole_shift(spec: SystemSpec, N: int, lam: float = 1.0):
    sp = Spectrum.from_spec(spec, N)
    B = ControlProfile.unit(N)
    gains = solve_feedback(B, sp, lam)
    eigs = closed_loop_spectrum(assemble_closed_loop(sp, B, gains, r=0.0))
    _, mismatch = pole_shift_mismatch(eigs, sp, lam)
    return float(mismatch.max() / (1.0 + np.abs(sp.values).max()))


def criterion_1(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rel = _pole_shift(WATER, 64)
    dt = time.perf_counter() - t0
    ok = rel <= POLE_TOL and dt < POLE_RUNTIME
    return CriterionResult(1, "pole shift, water waves N=64", ok,
                           f"max rel mismatch {rel:.2e} (tol {POLE_TOL:.0e}), runtime {dt:.3f}s")


def _closed_loop_runs(seed: int):
    """Yield ``(lam, trajectory)`` for the decay criteria."""
    N = 64
    sp = Spectrum.from_spec(WATER, N)
    B = ControlProfile.unit(N)
    t = np.linspace(0.0, T_END, GRID)
    rng = np.random.default_rng(seed)
    states = [random_state(N, rng) for _ in range(N_SEEDS)]
    for lam in LAMBDAS:
        gains = solve_feedback(B, sp, lam)
        bundle = build_T(gains, B, sp, lam, r=0.0)
        mat = assemble_closed_loop(sp, B, gains, r=0.0)
        for u0 in states:
            yield lam, simulate(mat, u0, t, bundle, r_norm=0.5)


def criterion_2(seed: int = 0) -> CriterionResult:
    worst = 0.0
    for lam, tr in _closed_loop_runs(seed):
        dev = np.abs(np.log(tr.norm_d) + lam * tr.times - np.log(tr.norm_d[0]))
        worst = max(worst, float(dev.max()))
    return CriterionResult(2, "exact d-norm decay", worst <= DNORM_TOL,
                           f"max |log d(t) + lam t - log d(0)| = {worst:.2e} (tol {DNORM_TOL:.0e})")


def criterion_3(seed: int = 0) -> CriterionResult:
    worst = {}
    for lam, tr in _closed_loop_runs(seed):
        for kind in (NormKind.L2, NormKind.HR):
            fit = decay_rate(tr, kind, (1.0 / lam, 6.0 / lam))
            err = abs(fit.rate + lam) / lam
            e0, r0 = worst.get((lam, kind), (0.0, 1.0))
            worst[(lam, kind)] = (max(e0, err), min(r0, fit.r2))
    ok = all(e <= RATE_TOL and r2 >= R2_MIN for e, r2 in worst.values())
    parts = [f"lam={lam:g} {kind.value}: rel err {e:.3f}, r2 {r2:.4f}"
             for (lam, kind), (e, r2) in worst.items()]
    return CriterionResult(3, "Sobolev decay rate fits", ok, "; ".join(parts))


def criterion_4(seed: int = 0) -> CriterionResult:
    sp256, sp512 = Spectrum.from_spec(WATER, 256), Spectrum.from_spec(WATER, 512)
    g256 = solve_feedback(ControlProfile.unit(256), sp256, 1.0)
    g512 = solve_feedback(ControlProfile.unit(512), sp512, 1.0)
    growth = np.abs(g512.K).max() / np.abs(g256.K).max()
    n = sp512.modes.astype(float)
    weighted = np.abs(g512.k) * n**0.4
    decay = weighted.max() / weighted[:16].max()
    a, b = g256.K[:128], g512.K[:128]
    agree = float(np.max(np.abs(a - b) / np.abs(b)))
    modulus = float(np.max(np.abs(np.abs(a) - np.abs(b)) / np.abs(b)))
    phase = float(np.max(np.abs(np.angle(a / b))))
    checks = (growth <= GAIN_GROWTH, decay <= DECAY_FACTOR, agree <= GAIN_AGREEMENT)
    detail = (f"max|K| ratio {growth:.4f} (<= {GAIN_GROWTH}), sup|k|n^0.4 / sup_(n<=16) {decay:.3f} "
              f"(<= {DECAY_FACTOR}), K(256) vs K(512) rel {agree:.2e} (<= {GAIN_AGREEMENT:.0e}) "
              f"[modulus {modulus:.1e}, phase {phase:.1e} rad]")
    return CriterionResult(4, "gain boundedness, decay and truncation convergence", all(checks), detail)


def criterion_5(seed: int = 0) -> CriterionResult:
    parts, ok = [], True
    for r in (-0.9, 0.0, 0.9):
        lo = riesz_bounds(riesz_family(Spectrum.from_spec(WATER, 128), 1.0, r))
        hi = riesz_bounds(riesz_family(Spectrum.from_spec(WATER, 256), 1.0, r))
        drift = abs(hi.cond / lo.cond - 1.0)
        ok &= drift <= RIESZ_DRIFT and lo.sigma_min > 0 and hi.sigma_min > 0
        parts.append(f"r={r:g}: cond {lo.cond:.3f} -> {hi.cond:.3f} ({100 * drift:.1f}%)")
    return CriterionResult(5, "Riesz frame stability", bool(ok), "; ".join(parts))


def criterion_6(seed: int = 0) -> CriterionResult:
    N = 256
    sp = Spectrum.from_spec(WATER, N)
    B = ControlProfile.unit(N)
    gains = solve_feedback(B, sp, 1.0)
    bundle = build_T(gains, B, sp, 1.0)
    res = operator_equality_residual(bundle, gains, B, sp, 1.0)
    bound = OPEQ_TOL * np.linalg.norm(bundle.T, 2)
    ok = res <= bound
    rng = np.random.default_rng(seed)
    sp8, B8 = Spectrum.from_spec(WATER, 8), ControlProfile.unit(8)
    base = solve_feedback(B8, sp8, 1.0)
    worst = 0.0
    for _ in range(100):
        K = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        g = replace(base, K=K, k=-(K + 1.0))
        bt = build_T(g, B8, sp8, 1.0)
        ratio = operator_equality_residual(bt, g, B8, sp8, 1.0) / np.linalg.norm(bt.T, 2)
        worst = max(worst, ratio)
    ok = ok and worst <= OPEQ_TOL
    return CriterionResult(6, "operator equality residual", bool(ok),
                           f"N=256 residual/||T|| {res / (bound / OPEQ_TOL):.2e}; "
                           f"random gains worst {worst:.2e} (tol {OPEQ_TOL:.0e})")


def criterion_7(seed: int = 0) -> CriterionResult:
    N, Th = 16, 1.0
    sp, B = Spectrum.from_spec(WATER, N), ControlProfile.unit(N)
    rng = np.random.default_rng(seed)
    fin = mom = quad = 0.0
    for _ in range(N_SEEDS):
        u0 = random_state(N, rng)
        plan = minimal_norm_control(u0, B, sp, Th)
        rep = verify_null_control(u0, plan, B, sp)
        fin = max(fin, rep.final_relative_norm)
        mom = max(mom, rep.max_moment_residual)
        quad = max(quad, rep.quadrature_discrepancy)
    ok = fin <= NULL_TOL and mom <= MOMENT_TOL and quad <= QUAD_TOL
    return CriterionResult(7, "null controllability", ok,
                           f"||u(T)||/||u0|| {fin:.2e}, moment residual {mom:.2e}, "
                           f"quadrature vs closed form {quad:.2e}")


def criterion_8(seed: int = 0) -> CriterionResult:
    c128 = gap_constant(Spectrum.from_spec(WATER, 128))
    c256 = gap_constant(Spectrum.from_spec(WATER, 256))
    gap_drift = abs(c256 / c128 - 1.0)
    ok = c256 > 0 and gap_drift <= GAP_DRIFT
    parts = [f"gap {c128:.4f} -> {c256:.4f} ({100 * gap_drift:.2f}%)"]
    for s in (-0.5, 0.0, 0.4):
        a = sum_bound_check(s, WATER, 64).sup_ratio
        b = sum_bound_check(s, WATER, 128).sup_ratio
        drift = abs(b / a - 1.0)
        ok &= bool(np.isfinite(a) and np.isfinite(b) and drift <= SUM_DRIFT)
        parts.append(f"s={s:g} sup ratio {a:.3f} -> {b:.3f} ({100 * drift:.1f}%)")
    return CriterionResult(8, "gap and sum estimates", bool(ok), "; ".join(parts))


def criterion_9(seed: int = 0) -> CriterionResult:
    spec = SystemSpec(Kind.GENERIC, alpha=1.2, multiplier="power")
    sp, B = Spectrum.from_spec(spec, 256), ControlProfile.unit(256)
    gains = solve_feedback(B, sp, 1.0)
    layers = asymptotic_refinement(gains, sp, 1.0, B)
    sched_ok = layers.M == 2 and np.allclose(layers.schedule, (0.3, 0.1, -0.1), atol=1e-12)
    sup = layers.sup_k[:3]
    mono = all(b <= a for a, b in zip(sup, sup[1:]))
    return CriterionResult(9, "layer schedule for alpha=1.2", bool(sched_ok and mono),
                           f"schedule {layers.schedule}, M={layers.M}, "
                           f"sup|k^i| = {', '.join(f'{x:.3f}' for x in sup)}")


def criterion_10(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    rels = {a: _pole_shift(SystemSpec(Kind.GENERIC, alpha=a, multiplier="power"), 64) for a in (1.2, 2.0)}
    dt = time.perf_counter() - t0
    ok = all(v <= POLE_TOL for v in rels.values()) and dt < 2 * POLE_RUNTIME
    detail = ", ".join(f"alpha={a:g}: {v:.2e}" for a, v in rels.items())
    return CriterionResult(10, "pole shift, power multipliers", ok, f"{detail} (runtime {dt:.3f}s)")


CRITERIA: dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[number](seed)
    return replace(res, seconds=time.perf_counter() - t0)


def run_all(seed: int = 0) -> list[CriterionResult]:
    return [run_criterion(i, seed) for i in sorted(CRITERIA)]
