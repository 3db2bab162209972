"""Truncated closed loop ``u' = A u + B K(u)``: spectrum, propagation and decay."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import InsufficientSampleError, NumericalError, ShapeError
from .feedback import FeedbackGains, TransformBundle
from .profile import ControlProfile
from .spectral import CoeffVector, Spectrum, sobolev_weights

EIGENBASIS_CONDITION_LIMIT = 1e10
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class ClosedLoopMatrix:
    """``diag(lambda) + b K^T`` on H^r coordinates."""

    A_cl: np.ndarray
    r: float
    lam: float
    modes: np.ndarray
    eigenvalues_open: np.ndarray

    @property
    def N(self) -> int:
        return self.A_cl.shape[0]

    def unweighted(self) -> np.ndarray:
        w = sobolev_weights(self.modes, self.r)
        return self.A_cl * w[None, :] / w[:, None]


def assemble_closed_loop(spectrum: Spectrum, B: ControlProfile, gains: FeedbackGains,
                         r: float = 0.0) -> ClosedLoopMatrix:
    if not (len(B) == len(spectrum) == gains.N):
        raise ShapeError("spectrum, profile and gains must share the truncation")
    A = np.diag(spectrum.values) + np.outer(B.b, gains.K)
    w = spectrum.weights(r)
    A_r = w[:, None] * A / w[None, :]
    return ClosedLoopMatrix(A_r, r, gains.lam, spectrum.modes, spectrum.values.copy())


def closed_loop_spectrum(mat: ClosedLoopMatrix) -> np.ndarray:
    """Eigenvalues sorted by imaginary part, then real part."""
    try:
        ev = np.linalg.eigvals(mat.unweighted())
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"closed-loop eigensolve failed (cond(A_cl) = "
                             f"{np.linalg.cond(mat.A_cl):.3e})") from exc
    return ev[np.lexsort((ev.real, ev.imag))]


def pole_shift_mismatch(eigs: np.ndarray, spectrum: Spectrum, lam: float):
    """Optimal one-to-one matching of `eigs` to the targets ``lambda_n - lam``.

    Returns ``(targets_matched, abs_mismatch)`` aligned with ``eigs``.
    """
    target = spectrum.values - lam
    cost = np.abs(eigs[:, None] - target[None, :])
    rows, cols = linear_sum_assignment(cost)
    matched = np.empty_like(eigs)
    matched[rows] = target[cols]
    return matched, np.abs(eigs - matched)


class NormKind(str, enum.Enum):
    L2 = "L2"
    HR = "Hr"
    DNORM = "Dnorm"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), N) phi-coordinates
    norm_L2: np.ndarray
    norm_Hr: np.ndarray
    norm_d: Optional[np.ndarray]
    r_norm: float
    propagator: str

    def state(self, i: int) -> CoeffVector:
        return CoeffVector(self.states[i], r=self.r_norm)

    def norms(self, kind: NormKind) -> np.ndarray:
        kind = NormKind(kind)
        if kind is NormKind.L2:
            return self.norm_L2
        if kind is NormKind.HR:
            return self.norm_Hr
        if self.norm_d is None:
            raise ValueError("trajectory was simulated without a transform; no d-norm")
        return self.norm_d


def simulate(mat: ClosedLoopMatrix, u0: CoeffVector, t_grid, bundle: TransformBundle = None,
             r_norm: Optional[float] = None) -> Trajectory:
    """``u(t) = exp(A_cl t) u0`` on the grid, with L2, H^{r_norm} and d-norms.

    Uses the eigendecomposition of the closed loop; when the eigenvector
    basis is worse conditioned than 1e10 it falls back to scaling and
    squaring at every grid time.
    """
    t = np.asarray(t_grid, dtype=float)
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must start at 0 and increase strictly")
    if len(u0.coeffs) != mat.N:
        raise ShapeError(f"state has {len(u0.coeffs)} modes, closed loop has {mat.N}")
    A = mat.unweighted()
    w_vals, V = np.linalg.eig(A)
    if np.linalg.cond(V) < EIGENBASIS_CONDITION_LIMIT:
        coef = np.linalg.solve(V, u0.coeffs)
        states = (np.exp(np.outer(t, w_vals)) * coef[None, :]) @ V.T
        how = "eigen"
    else:
        states = np.array([sla.expm(A * ti) @ u0.coeffs for ti in t])
        how = "expm"
    r_norm = mat.r if r_norm is None else r_norm
    n_l2 = np.linalg.norm(states, axis=1)
    n_hr = np.linalg.norm(states * sobolev_weights(mat.modes, r_norm)[None, :], axis=1)
    n_d = None
    if bundle is not None:
        n_d = np.array([_d_norm_array(s, bundle) for s in states])
    return Trajectory(t, states, n_l2, n_hr, n_d, r_norm, how)


def _d_norm_array(u: np.ndarray, bundle: TransformBundle) -> float:
    w = sobolev_weights(bundle.modes, bundle.r)
    return float(np.linalg.norm(bundle.T @ (w * u)))


def d_norm(u: CoeffVector, bundle: TransformBundle) -> float:
    """``||T u||`` in H^r, the norm in which the closed loop decays exactly."""
    if len(u.coeffs) != bundle.N:
        raise ShapeError(f"state has {len(u.coeffs)} modes, transform has {bundle.N}")
    return _d_norm_array(u.coeffs, bundle)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    r2: float
    samples: int
    window: tuple


def decay_rate(traj: Trajectory, norm_kind: NormKind, window: tuple) -> DecayFit:
    """Least-squares slope of ``log ||u(t)||`` over the window.

    Samples whose norm has underflowed below 1e-300 are dropped.
    """
    y = traj.norms(norm_kind)
    t0, t1 = window
    sel = (traj.times >= t0) & (traj.times <= t1) & (y > UNDERFLOW)
    if sel.sum() < 8:
        raise InsufficientSampleError(f"only {int(sel.sum())} usable samples in window {window}")
    t = traj.times[sel]
    logy = np.log(y[sel])
    slope, icpt = np.polyfit(t, logy, 1)
    fit = slope * t + icpt
    ss_tot = np.sum((logy - logy.mean()) ** 2)
    r2 = 1.0 - np.sum((logy - fit) ** 2) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(r2), int(sel.sum()), (float(t[0]), float(t[-1])))
