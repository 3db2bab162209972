"""Actuator profiles ``B = sum b_n phi_n`` and the controllability condition on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Parity, mode_indices


@dataclass(frozen=True)
class ControlProfile:
    """Coefficients ``b_n`` of the control operator on one sector."""

    b: np.ndarray
    parity: Parity = Parity.ODD

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex))
        object.__setattr__(self, "parity", Parity(self.parity))

    @classmethod
    def unit(cls, N: int, parity: Parity = Parity.ODD) -> "ControlProfile":
        return cls(np.ones(len(mode_indices(N, parity))), parity)

    @classmethod
    def sinusoidal(cls, N: int, amplitude: float = 0.5, parity: Parity = Parity.ODD):
        """``b_n = 1 + amplitude * sin(n)``."""
        n = mode_indices(N, parity)
        return cls(1.0 + amplitude * np.sin(n), parity)

    @property
    def c1(self) -> float:
        return float(np.abs(self.b).min())

    @property
    def c2(self) -> float:
        return float(np.abs(self.b).max())

    def __len__(self):
        return len(self.b)


@dataclass(frozen=True)
class CondBReport:
    passed: bool
    c1: float
    c2: float


def check_condB(B: ControlProfile) -> CondBReport:
    """Every ``b_n`` nonzero (including ``b_0`` on the even sector), with its modulus range."""
    mags = np.abs(B.b)
    c1, c2 = float(mags.min()), float(mags.max())
    passed = c1 > 0 and np.isfinite(c2)
    return CondBReport(bool(passed), c1, c2)
