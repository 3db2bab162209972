"""The resolvent family q_n, the operator S and its frame diagnostics.

All matrices act on H^r-orthonormal coordinates: column n holds the
coefficients of the image of ``n^{-r} phi_n`` on the basis ``p^{-r} phi_p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import HypothesisViolation
from .spectral import CoeffVector, Spectrum, SystemSpec, check_r, sobolev_weights

DEGENERATE_CONDITION = 1e12


def resolvent_kernel(values: np.ndarray, lam: float) -> np.ndarray:
    """``M[p, n] = 1 / (lambda_n - lambda_p + lam)``.

    With purely imaginary eigenvalues and ``lam > 0`` every denominator has
    modulus at least ``lam``.
    """
    if not lam > 0:
        raise ValueError(f"decay rate must be positive, got {lam}")
    values = np.asarray(values)
    return 1.0 / (values[None, :] - values[:, None] + lam)


def weight_similarity(M: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``D M D^{-1}`` for ``D = diag(weights)``: phi-coordinates to H^r coordinates."""
    return weights[:, None] * M / weights[None, :]


def q_vector(n: int, spectrum: Spectrum, lam: float) -> CoeffVector:
    """Coefficients of ``q_n = sum_p phi_p / (lambda_n - lambda_p + lam)``, p-sum truncated at N."""
    idx = int(np.searchsorted(spectrum.modes, n))
    if idx >= len(spectrum) or spectrum.modes[idx] != n:
        raise ValueError(f"mode {n} not in the truncated sector")
    if not lam > 0:
        raise ValueError(f"decay rate must be positive, got {lam}")
    col = 1.0 / (spectrum.values[idx] - spectrum.values + lam)
    return CoeffVector(col, spectrum.parity, 0.0)


@dataclass(frozen=True)
class RieszFamily:
    """The weighted family ``(n^{-r} q_n)`` as a matrix in H^r coordinates."""

    spectrum: Spectrum
    lam: float
    r: float
    Q: np.ndarray

    @property
    def N(self) -> int:
        return len(self.spectrum)


def riesz_family(spectrum: Spectrum, lam: float, r: float = 0.0) -> RieszFamily:
    w = spectrum.weights(r)
    Q = weight_similarity(resolvent_kernel(spectrum.values, lam), w)
    return RieszFamily(spectrum, lam, r, Q)


@dataclass(frozen=True)
class FredholmSplit:
    """``S = Id / lam + Sc`` with ``Sc`` zero on the diagonal."""

    S: np.ndarray
    Sc: np.ndarray
    r: float
    lam: float
    modes: np.ndarray


def build_S(spectrum: Spectrum, lam: float, r: float = 0.0) -> FredholmSplit:
    check_r(r, spectrum.alpha)
    S = riesz_family(spectrum, lam, r).Q
    Sc = S.copy()
    np.fill_diagonal(Sc, 0.0)
    return FredholmSplit(S, Sc, r, lam, spectrum.modes)


@dataclass(frozen=True)
class RieszBounds:
    C1: float
    C2: float
    cond: float
    sigma_min: float
    sigma_max: float
    degenerate: bool


def riesz_bounds(family: Union[RieszFamily, np.ndarray]) -> RieszBounds:
    """Optimal frame bounds of the columns: ``C1 = sigma_min^2``, ``C2 = sigma_max^2``.

    Never raises on rank deficiency; a zero or tiny ``sigma_min`` sets the
    `degenerate` flag instead.
    """
    Q = family.Q if isinstance(family, RieszFamily) else np.asarray(family)
    sv = np.linalg.svd(Q, compute_uv=False)
    smax, smin = float(sv[0]), float(sv[-1])
    if smin <= smax * np.finfo(float).eps * max(Q.shape):
        smin = 0.0
    C1, C2 = smin**2, smax**2
    cond = C2 / C1 if C1 > 0 else np.inf
    degenerate = C1 == 0 or cond > DEGENERATE_CONDITION
    return RieszBounds(C1, C2, cond, smin, smax, degenerate)


def compact_tail_diagnostic(split: FredholmSplit, epsilon: float) -> float:
    """Operator norm of ``D^epsilon Sc``, a finite-N proxy for Sc mapping H^r into H^{r+epsilon}."""
    w = sobolev_weights(split.modes, epsilon)
    return float(np.linalg.norm(w[:, None] * split.Sc, 2))


@dataclass(frozen=True)
class SumBoundTable:
    s: float
    p: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray
    n_big: int

    @property
    def sup_ratio(self) -> float:
        return float(self.ratio.max())

    def rows(self):
        return zip(self.p.tolist(), self.lhs.tolist(), self.rhs.tolist(), self.ratio.tolist())


def sum_bound_check(s: float, spec: SystemSpec, p_max: int, oversample: int = 16) -> SumBoundTable:
    """Compare ``sum_{n != p} n^s / |lambda_n - lambda_p|`` with ``p^{1-alpha+s} log p + p^{-alpha}``.

    The left side is summed over ``n <= oversample * p_max``.  The ratio is
    reported with unit constant; only its boundedness in p is meaningful.
    """
    alpha = spec.growth_exponent
    if not s < alpha - 1:
        raise HypothesisViolation(f"sum estimate requires s < alpha - 1 = {alpha - 1:g}, got s = {s}")
    n_big = oversample * p_max
    spectrum = Spectrum.from_spec(spec, n_big)
    n = spectrum.modes.astype(float)
    lam = spectrum.values
    p = np.arange(1, p_max + 1)
    lhs = np.empty(p_max)
    ns = n**s
    for i, pi in enumerate(p):
        gaps = np.abs(lam - lam[pi - 1])
        gaps[pi - 1] = np.inf
        lhs[i] = np.sum(ns / gaps)
    pf = p.astype(float)
    rhs = pf ** (1 - alpha + s) * np.log(pf) + pf ** (-alpha)
    return SumBoundTable(s, p, lhs, rhs, lhs / rhs, n_big)
