"""Gain synthesis from the TB = B condition and the backstepping transform T.

Conventions: ``K`` is the feedback row, ``K(u) = sum K_n u_n`` on
phi-coordinates.  ``T`` maps ``n^{-r} phi_n`` to ``(-K_n) n^{-r} tau q_n``
and is stored on H^r-orthonormal coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ShapeError, SynthesisError, UnsupportedNormalization
from .profile import ControlProfile, check_condB
from .riesz import build_S, resolvent_kernel, weight_similarity
from .spectral import Spectrum, check_r, sobolev_weights

# working space of the TB = B solve
SOLVE_INDEX = -0.75
SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class FeedbackGains:
    """Gains ``K_n`` with the split ``b_n K_n = -(lam + k_n)``."""

    K: np.ndarray
    k: np.ndarray
    lam: float
    modes: np.ndarray
    residual: float = 0.0
    condition: float = 1.0

    @property
    def N(self) -> int:
        return len(self.K)


def _check_sizes(B: ControlProfile, spectrum: Spectrum, gains: FeedbackGains = None):
    if len(B) != len(spectrum) or B.parity is not spectrum.parity:
        raise ShapeError(f"profile has {len(B)} modes ({B.parity.value}), "
                         f"spectrum has {len(spectrum)} ({spectrum.parity.value})")
    if gains is not None and gains.N != len(spectrum):
        raise ShapeError(f"gains have {gains.N} modes, spectrum has {len(spectrum)}")


def tbb_matrix(B: ControlProfile, spectrum: Spectrum, lam: float) -> np.ndarray:
    """``M[p, n] = b_p / (lambda_n - lambda_p + lam)``; TB = B reads ``M x = b`` with ``x_n = -K_n b_n``."""
    return B.b[:, None] * resolvent_kernel(spectrum.values, lam)


def solve_feedback(B: ControlProfile, spectrum: Spectrum, lam: float) -> FeedbackGains:
    """Unique gains making the truncated transform satisfy TB = B.

    The system is solved by LU with partial pivoting after the diagonal
    similarity to H^{-3/4} coordinates, which leaves the gains unchanged.

    Raises
    ------
    SynthesisError
        If the weighted matrix has condition number above 1e12.
    """
    _check_sizes(B, spectrum)
    if not check_condB(B).passed:
        raise SynthesisError("control profile violates the controllability condition (some b_n = 0)")
    w = spectrum.weights(SOLVE_INDEX)
    Mw = weight_similarity(tbb_matrix(B, spectrum, lam), w)
    cond = float(np.linalg.cond(Mw))
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SynthesisError(f"TB = B system is numerically singular (cond = {cond:.3e})", cond)
    rhs = w * B.b
    y = sla.lu_solve(sla.lu_factor(Mw), rhs)
    x = y / w
    residual = float(np.linalg.norm(Mw @ y - rhs) / np.linalg.norm(rhs))
    K = -x / B.b
    k = x - lam  # k_n = -(b_n K_n + lam)
    return FeedbackGains(K, k, lam, spectrum.modes, residual, cond)


def kn_series(gains: FeedbackGains, B: ControlProfile, spectrum: Spectrum) -> np.ndarray:
    """Recompute ``k_n = lam * sum_{m != n} K_m b_m / (lambda_m - lambda_n + lam)``.

    Independent of the solve path; agrees with ``gains.k`` at the same
    truncation.
    """
    _check_sizes(B, spectrum, gains)
    R = resolvent_kernel(spectrum.values, gains.lam)  # R[n, m] = 1/(lambda_m - lambda_n + lam)
    np.fill_diagonal(R, 0.0)
    return gains.lam * (R @ (gains.K * B.b))


def gain_floor_index(gains: FeedbackGains, B: ControlProfile) -> int:
    """Smallest mode n0 with ``|b_n K_n| >= lam / 2`` for every n >= n0 (-1 if none)."""
    ok = np.abs(B.b * gains.K) >= gains.lam / 2
    if not ok[-1]:
        return -1
    bad = np.nonzero(~ok)[0]
    first = bad[-1] + 1 if len(bad) else 0
    return int(gains.modes[first])


@dataclass(frozen=True)
class TransformBundle:
    """T and its factors on H^r coordinates."""

    T: np.ndarray
    S: np.ndarray
    tau: np.ndarray
    tauK: np.ndarray
    r: float
    N: int
    sigma_min: float
    cond: float
    factorization_error: float
    modes: np.ndarray

    def unweighted(self) -> np.ndarray:
        """T on phi-coordinates."""
        w = sobolev_weights(self.modes, self.r)
        return self.T * w[None, :] / w[:, None]


def build_T(gains: FeedbackGains, B: ControlProfile, spectrum: Spectrum, lam: float,
            r: float = 0.0) -> TransformBundle:
    """Assemble ``T = tauK . tau . S`` and its singular-value diagnostics."""
    _check_sizes(B, spectrum, gains)
    check_r(r, spectrum.alpha)
    if gains.lam != lam:
        raise ShapeError(f"gains synthesised for lam={gains.lam}, transform requested for lam={lam}")
    S = build_S(spectrum, lam, r).S
    tau = np.diag(B.b)
    T = B.b[:, None] * S * (-gains.K)[None, :]
    # tauK acts on the basis (n^{-r} tau q_n) as multiplication by -K_n
    tS = B.b[:, None] * S
    tauK = np.linalg.solve(tS.T, (tS * (-gains.K)[None, :]).T).T
    err = np.max(np.abs(T - tauK @ tau @ S)) / max(1.0, np.max(np.abs(T)))
    sv = np.linalg.svd(T, compute_uv=False)
    smin = float(sv[-1])
    cond = float(sv[0] / smin) if smin > 0 else np.inf
    return TransformBundle(T, S, tau, tauK, r, len(spectrum), smin, cond, float(err), spectrum.modes)


def operator_equality_residual(bundle: TransformBundle, gains: FeedbackGains, B: ControlProfile,
                               spectrum: Spectrum, lam: float) -> float:
    """Largest column defect of ``T A + B K - (A - lam) T``, measured in H^{-3/4}.

    The identity holds column by column for any gain vector, so this is a
    wiring check rather than a property of the solve.
    """
    _check_sizes(B, spectrum, gains)
    T0 = bundle.unweighted()
    L = spectrum.values
    R = T0 * L[None, :] + B.b[:, None] * gains.K[None, :] - (L - lam)[:, None] * T0
    R *= spectrum.weights(SOLVE_INDEX)[:, None]
    return float(np.linalg.norm(R, axis=0).max())


def tbb_residual(gains: FeedbackGains, B: ControlProfile, spectrum: Spectrum, lam: float,
                 r_test: float = SOLVE_INDEX) -> float:
    """``||T b - b||`` in H^{r_test}."""
    _check_sizes(B, spectrum, gains)
    T0 = B.b[:, None] * resolvent_kernel(spectrum.values, lam) * (-gains.K)[None, :]
    return float(np.linalg.norm(spectrum.weights(r_test) * (T0 @ B.b - B.b)))


@dataclass(frozen=True)
class RefinementLayers:
    """Layers ``-K_n = sum_{j<=i} e^j_n + k^i_n`` with their regularity schedule."""

    schedule: tuple
    e: tuple
    k: tuple
    sup_k: tuple
    M: int
    terminated: bool
    identity_residual: float


def refinement_schedule(alpha: float, depth: int) -> tuple[list, int, bool]:
    """``s_i = (3/2 - alpha) + (1 - alpha) i`` up to the first negative entry."""
    s0 = 1.5 - alpha
    sched = []
    for i in range(depth + 1):
        s = round(s0 + (1 - alpha) * i, 12)
        sched.append(s)
        if s < 0:
            return sched, i, True
    return sched, depth, False


def asymptotic_refinement(gains: FeedbackGains, spectrum: Spectrum, lam: float, B: ControlProfile,
                          depth: int = 8) -> RefinementLayers:
    """Peel off the layers ``e^{i+1} = L e^i``, ``k^{i+1} = L k^i`` with
    ``(L f)_n = -lam * sum_{m != n} f_m / (lambda_m - lambda_n + lam)``.

    Starts from ``e^0 = lam`` and ``k^0 = k`` and stops at the first level M
    whose schedule entry is negative, or at `depth`.  Only the unit profile
    ``b_n = 1`` is supported.
    """
    _check_sizes(B, spectrum, gains)
    if not np.all(B.b == 1):
        raise UnsupportedNormalization("layer refinement is defined for b_n = 1 only")
    alpha = spectrum.alpha
    if not 1 < alpha <= 1.5:
        raise ValueError(f"refinement applies to 1 < alpha <= 3/2, got {alpha}")
    schedule, M, terminated = refinement_schedule(alpha, depth)
    L = -lam * resolvent_kernel(spectrum.values, lam)
    np.fill_diagonal(L, 0.0)
    e = [np.full(gains.N, lam, dtype=complex)]
    k = [gains.k.astype(complex)]
    for _ in range(M):
        e.append(L @ e[-1])
        k.append(L @ k[-1])
    partial = np.cumsum(e, axis=0)
    resid = max(float(np.max(np.abs(partial[i] + k[i] + gains.K))) for i in range(M + 1))
    sup_k = tuple(float(np.abs(ki).max()) for ki in k)
    return RefinementLayers(tuple(schedule), tuple(e), tuple(k), sup_k, M, terminated, resid)
