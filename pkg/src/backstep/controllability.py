"""Null controllability by the moment method.

With ``f_n(s) = exp(-lambda_n s) = exp(i w_n s)`` the open-loop state at the
horizon vanishes iff ``int_0^T f_n(s) v(s) ds = -u0_n / b_n`` for every mode.
The minimal-L2 solution lies in the span of ``conj(f_m)``:
``v(s) = sum_m c_m exp(-i w_m s)`` with ``G c = d`` and ``G`` the Gram matrix
of the family.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numpy.polynomial.legendre import leggauss

from .errors import IllConditionedError, InsufficientSampleError, ShapeError, SingularityError
from .profile import CondBReport, ControlProfile, check_condB
from .spectral import CoeffVector, Spectrum

GRAM_CONDITION_LIMIT = 1e12
REFINEMENT_STEPS = 4
GAUSS_NODES = 8

__all__ = [
    "CondBReport", "check_condB", "GapReport", "ingham_gap_report", "gram_matrix",
    "ControlPlan", "minimal_norm_control", "moment_residuals", "NullControlReport",
    "verify_null_control", "biorthogonal_coefficients",
]


@dataclass(frozen=True)
class GapReport:
    omega: float
    N0: np.ndarray
    gamma: np.ndarray
    horizon: np.ndarray  # 2 pi / gamma
    passed: bool

    def rows(self):
        return zip(self.N0.tolist(), self.gamma.tolist(), self.horizon.tolist())


def ingham_gap_report(spectrum: Spectrum, N0=None) -> GapReport:
    """Uniform and asymptotic gaps of the frequencies ``|lambda_n|``.

    ``gamma(N0)`` is the smallest adjacent gap among modes ``n >= N0``; the
    exponential family is a Riesz sequence on any interval longer than
    ``2 pi / gamma``.
    """
    w = spectrum.frequencies
    if len(w) < 3:
        raise InsufficientSampleError("gap report needs at least three modes")
    gaps = np.abs(np.diff(w))
    modes = spectrum.modes[:-1]
    if N0 is None:
        N0 = [int(modes[0])]
        while 2 * N0[-1] <= modes[-1]:
            N0.append(2 * N0[-1])
    N0 = np.asarray(N0, dtype=int)
    gamma = np.array([gaps[modes >= n0].min() for n0 in N0])
    with np.errstate(divide="ignore"):
        horizon = np.where(gamma > 0, 2 * np.pi / np.where(gamma > 0, gamma, 1.0), np.inf)
    omega = float(gaps.min())
    return GapReport(omega, N0, gamma, horizon, omega > 0)


def _frequency_differences(w):
    return w[:, None] - w[None, :]


def gram_matrix(spectrum: Spectrum, T_horizon: float, dtype=complex) -> np.ndarray:
    """``G[n, m] = int_0^T exp(i (w_n - w_m) s) ds``, Hermitian by construction.

    Evaluated as ``2 sin(D T / 2) / D * exp(i D T / 2)`` which equals
    ``(exp(i D T) - 1) / (i D)`` without its cancellation at small ``D``.
    Pass ``dtype=np.clongdouble`` for extended precision.
    """
    return _gram(spectrum.frequencies, T_horizon, dtype)


def _gram(frequencies, T_horizon, dtype):
    if not T_horizon > 0:
        raise ValueError(f"horizon must be positive, got {T_horizon}")
    real = np.longdouble if np.dtype(dtype) == np.clongdouble else float
    w = np.asarray(frequencies).astype(real)
    D = _frequency_differences(w)
    off = ~np.eye(len(w), dtype=bool)
    if np.any(D[off] == 0):
        raise SingularityError("repeated frequencies make the Gram matrix singular")
    T = real(T_horizon)
    Dsafe = np.where(off, D, 1)
    half = D * T / 2
    G = np.where(off, 2 * np.sin(half) / Dsafe, T) * (np.cos(half) + 1j * np.sin(half))
    G = G.astype(dtype)
    upper = np.triu(G, 1)
    return upper + upper.conj().T + np.diag(np.diag(G).real).astype(dtype)


@dataclass(frozen=True)
class ControlPlan:
    """Minimal-norm open-loop control on ``[0, T_horizon]``.

    `c` is kept in extended precision: the coefficients are large (the
    family is far from orthogonal at short horizons) and their double
    rounding alone would exceed the moment tolerance.
    """

    T_horizon: float
    G: np.ndarray
    d: np.ndarray
    c: np.ndarray
    gram_cond: float
    frequencies: np.ndarray
    control_norm: float

    def control(self, t) -> np.ndarray:
        """Sample ``v(t) = sum_m c_m exp(-i w_m t)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(-1j * np.outer(t, self.frequencies)) @ self.c.astype(complex)


def biorthogonal_coefficients(G: np.ndarray) -> np.ndarray:
    """Columns give ``g_m = sum_j C[j, m] conj(f_j)`` with ``int f_n g_m = delta_nm``."""
    return np.linalg.inv(G)


def minimal_norm_control(u0: CoeffVector, B: ControlProfile, spectrum: Spectrum,
                         T_horizon: float = 1.0) -> ControlPlan:
    """Solve the moment problem ``G c = -u0 / b`` for the minimal-norm control.

    Cholesky in double precision followed by iterative refinement with
    residuals and coefficients in long double.
    """
    if len(u0.coeffs) != len(spectrum) or len(B) != len(spectrum):
        raise ShapeError("state, profile and spectrum must share the truncation")
    report = check_condB(B)
    if not report.passed:
        raise ValueError(f"control profile violates the controllability condition (c1 = {report.c1})")
    G = gram_matrix(spectrum, T_horizon)
    cond = float(np.linalg.cond(G))
    if cond > GRAM_CONDITION_LIMIT:
        raise IllConditionedError(
            f"Gram matrix condition {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:.0e}; "
            f"use a horizon longer than T = {T_horizon}", cond)
    d = -u0.coeffs / B.b
    factor = sla.cho_factor(G)
    Gl = _gram(spectrum.frequencies, T_horizon, np.clongdouble)
    dl = d.astype(np.clongdouble)
    c = sla.cho_solve(factor, d).astype(np.clongdouble)
    for _ in range(REFINEMENT_STEPS):
        r = dl - Gl @ c
        c = c + sla.cho_solve(factor, r.astype(complex))
    norm2 = np.real(np.conj(c) @ (Gl @ c))
    return ControlPlan(T_horizon, G, d, c, cond, spectrum.frequencies.copy(),
                       float(np.sqrt(max(norm2, 0.0))))


def moment_integrals(plan: ControlPlan) -> np.ndarray:
    """Closed-form ``int_0^T f_n(s) v(s) ds`` in extended precision."""
    return _gram(plan.frequencies, plan.T_horizon, np.clongdouble) @ plan.c


def moment_residuals(plan: ControlPlan) -> np.ndarray:
    return np.abs(moment_integrals(plan) - plan.d.astype(np.clongdouble)).astype(float)


def quadrature_moments(plan: ControlPlan, dt: float) -> np.ndarray:
    """Moments by composite Gauss-Legendre quadrature with panel width about `dt`."""
    panels = max(1, int(np.ceil(plan.T_horizon / dt)))
    h = plan.T_horizon / panels
    x, wq = leggauss(GAUSS_NODES)
    left = np.arange(panels) * h
    s = (left[:, None] + h * (x[None, :] + 1) / 2).ravel()
    weights = np.tile(wq * h / 2, panels)
    v = plan.control(s)
    return (np.exp(1j * np.outer(plan.frequencies, s)) * weights) @ v


@dataclass(frozen=True)
class NullControlReport:
    final_relative_norm: float
    final_state: np.ndarray
    max_moment_residual: float
    quadrature_discrepancy: float


def verify_null_control(u0: CoeffVector, plan: ControlPlan, B: ControlProfile, spectrum: Spectrum,
                        dt: float = None) -> NullControlReport:
    """Propagate ``u_n' = lambda_n u_n + b_n v`` to the horizon.

    Per mode, ``u_n(T) = exp(lambda_n T) (u0_n + b_n int_0^T exp(-lambda_n s) v(s) ds)``
    with the integral in closed form.  The same integrals are recomputed by
    quadrature as a cross-check.
    """
    dt = plan.T_horizon / 4096 if dt is None else dt
    moments = moment_integrals(plan)
    lam = spectrum.values.astype(np.clongdouble)
    T = np.longdouble(plan.T_horizon)
    u0l = u0.coeffs.astype(np.clongdouble)
    uT = np.exp(lam * T) * (u0l + B.b.astype(np.clongdouble) * moments)
    uT = uT.astype(complex)
    n0 = np.linalg.norm(u0.coeffs)
    rel = float(np.linalg.norm(uT) / n0) if n0 > 0 else float(np.linalg.norm(uT))
    quad = quadrature_moments(plan, dt)
    disc = float(np.max(np.abs(quad - moments.astype(complex))))
    resid = float(np.max(np.abs(moments - plan.d.astype(np.clongdouble))))
    return NullControlReport(rel, uT, resid, disc)
