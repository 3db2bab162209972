"""Spectra, parity sectors and Sobolev-weighted coefficient algebra.

States are stored as coefficients on the orthonormal eigenbasis
``sin(nx)/sqrt(pi)`` (odd sector, n >= 1) or ``cos(nx)/sqrt(pi)`` together
with the constant mode (even sector, n >= 0).  The H^r norm weights mode n
by ``n**r``; the constant mode is always weighted by 1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InsufficientSampleError, RangeError, ShapeError

# tanh(h n) == 1 to double precision well before this; avoids overflow warnings
TANH_SATURATION = 350.0


class Kind(str, enum.Enum):
    WATER_WAVE = "water_wave"
    GENERIC = "generic"


class Parity(str, enum.Enum):
    ODD = "odd"
    EVEN = "even"


@dataclass(frozen=True)
class SystemSpec:
    """Physical or multiplier parameters that fix the spectrum.

    Parameters
    ----------
    kind : Kind
        ``WATER_WAVE`` uses the capillary-gravity dispersion law.  ``GENERIC``
        uses the multiplier named by `multiplier`.
    g, depth : float
        Gravity and fluid depth (water-wave dispersion only).
    alpha : float
        Growth exponent of the multiplier, ``|h(s)| ~ s**alpha``.  Ignored for
        ``WATER_WAVE``, whose exponent is 3/2.
    multiplier : {"power", "water_wave", "table"}
        Built-in multiplier for ``GENERIC`` systems.
    table : sequence of float, optional
        Values ``h(1), h(2), ...`` when ``multiplier == "table"``.
    """

    kind: Kind = Kind.WATER_WAVE
    g: float = 9.81
    depth: float = 1.0
    alpha: float = 1.5
    multiplier: str = "power"
    table: Optional[tuple] = None
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not (np.isfinite(self.g) and self.g > 0):
            raise ConfigurationError(f"g must be positive, got {self.g}")
        if not (np.isfinite(self.depth) and self.depth > 0):
            raise ConfigurationError(f"depth must be positive, got {self.depth}")
        if self.sigma != 1.0:
            raise ConfigurationError("surface tension is fixed at sigma = 1")
        if self.kind is Kind.GENERIC:
            if not self.alpha > 1:
                raise ConfigurationError(f"alpha must exceed 1, got {self.alpha}")
            if self.multiplier not in ("power", "water_wave", "table"):
                raise ConfigurationError(f"unknown multiplier {self.multiplier!r}")
            if self.multiplier == "table":
                if not self.table:
                    raise ConfigurationError("multiplier 'table' needs table values")
                object.__setattr__(self, "table", tuple(float(x) for x in self.table))

    @property
    def growth_exponent(self) -> float:
        if self.kind is Kind.WATER_WAVE:
            return 1.5
        return float(self.alpha)

    @property
    def r_range(self) -> tuple[float, float]:
        """Open interval of Sobolev indices on which the transforms are isomorphisms."""
        a = self.growth_exponent
        return (0.5 - a, a - 0.5)


def water_wave_frequency(s, g: float = 9.81, depth: float = 1.0):
    """``(s (g + s^2) tanh(depth s))^(1/2)``, vectorised over `s`."""
    s = np.asarray(s, dtype=float)
    hs = depth * s
    th = np.where(hs > TANH_SATURATION, 1.0, np.tanh(np.minimum(hs, TANH_SATURATION)))
    return np.sqrt(s * (g + s**2) * th)


def multiplier_values(modes, spec: SystemSpec) -> np.ndarray:
    """Real frequencies ``h(n)`` for the given non-negative mode indices."""
    n = np.asarray(modes, dtype=float)
    if np.any(n < 0):
        raise ValueError("mode indices must be non-negative")
    if spec.kind is Kind.WATER_WAVE or spec.multiplier == "water_wave":
        return water_wave_frequency(n, spec.g, spec.depth)
    if spec.multiplier == "power":
        return n**spec.alpha
    table = np.asarray(spec.table)
    idx = np.asarray(modes, dtype=int)
    if np.any(idx > len(table)):
        raise ConfigurationError(
            f"multiplier table has {len(table)} entries, mode {idx.max()} requested")
    out = np.zeros(idx.shape)
    pos = idx > 0
    out[pos] = table[idx[pos] - 1]
    return out


def eigenvalue(n: int, spec: SystemSpec) -> complex:
    """Eigenvalue ``-i h(n)`` of mode `n` (``-i (n (g + n^2) tanh(h n))^(1/2)`` for water waves)."""
    if n < 0:
        raise ValueError("mode index must be non-negative")
    w = float(multiplier_values([n], spec)[0])
    return complex(0.0, -w)


def mode_indices(N: int, parity: Parity) -> np.ndarray:
    parity = Parity(parity)
    if N < 1:
        raise ValueError("truncation N must be positive")
    if parity is Parity.ODD:
        return np.arange(1, N + 1)
    return np.arange(0, N + 1)


def sobolev_weights(modes, r: float) -> np.ndarray:
    """``n**r`` with the constant mode weighted by 1."""
    n = np.asarray(modes, dtype=float)
    safe = np.where(n == 0, 1.0, n)
    return safe**r


@dataclass(frozen=True)
class Spectrum:
    """Purely imaginary eigenvalues of one parity sector, truncated at N."""

    values: np.ndarray
    parity: Parity = Parity.ODD
    alpha: float = 1.5
    modes: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "parity", Parity(self.parity))
        if self.modes is None:
            start = 1 if self.parity is Parity.ODD else 0
            object.__setattr__(self, "modes", np.arange(start, start + len(vals)))
        if len(self.modes) != len(vals):
            raise ShapeError("modes and values differ in length")

    @classmethod
    def from_spec(cls, spec: SystemSpec, N: int, parity: Parity = Parity.ODD) -> "Spectrum":
        modes = mode_indices(N, parity)
        w = multiplier_values(modes, spec)
        # built as 0 - i w so the real part is exactly zero
        vals = np.zeros(len(modes), dtype=complex)
        vals.imag = -w
        return cls(vals, Parity(parity), spec.growth_exponent, modes)

    @property
    def N(self) -> int:
        return int(self.modes[-1])

    @property
    def frequencies(self) -> np.ndarray:
        return np.abs(self.values)

    def __len__(self):
        return len(self.values)

    def weights(self, r: float) -> np.ndarray:
        return sobolev_weights(self.modes, r)

    def conjugate(self) -> "Spectrum":
        return Spectrum(np.conj(self.values), self.parity, self.alpha, self.modes)


@dataclass(frozen=True)
class CoeffVector:
    """Coefficients of a state on the orthonormal eigenbasis of one sector.

    `r` is the Sobolev index used by :meth:`norm`; the coefficients are
    never pre-weighted.
    """

    coeffs: np.ndarray
    parity: Parity = Parity.ODD
    r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "parity", Parity(self.parity))

    @property
    def modes(self) -> np.ndarray:
        start = 1 if self.parity is Parity.ODD else 0
        return np.arange(start, start + len(self.coeffs))

    def norm(self, r: Optional[float] = None) -> float:
        r = self.r if r is None else r
        return float(np.linalg.norm(sobolev_weights(self.modes, r) * self.coeffs))

    @classmethod
    def unit(cls, n: int, N: int, parity: Parity = Parity.ODD, r: float = 0.0):
        """Coordinate vector of mode `n` (the basis function phi_n)."""
        modes = mode_indices(N, parity)
        c = np.zeros(len(modes), dtype=complex)
        c[np.searchsorted(modes, n)] = 1.0
        return cls(c, parity, r)


def sobolev_inner(u: CoeffVector, v: CoeffVector, r: float) -> complex:
    """H^r inner product ``sum (n^r u_n)(n^r conj(v_n))``."""
    if u.parity is not v.parity or len(u.coeffs) != len(v.coeffs):
        raise ShapeError("inner product needs vectors of the same sector and length")
    w = sobolev_weights(u.modes, 2 * r)
    return complex(np.sum(w * u.coeffs * np.conj(v.coeffs)))


def parity_decompose(full) -> tuple[CoeffVector, CoeffVector]:
    """Split ``[c_0, s_1, c_1, s_2, c_2, ..., s_N, c_N]`` into sectors.

    Returns the sine (odd) vector over modes 1..N and the cosine (even)
    vector over modes 0..N.
    """
    full = np.asarray(full, dtype=complex)
    if full.ndim != 1 or len(full) % 2 != 1:
        raise ShapeError("interleaved coefficients must have odd length 2N+1")
    odd = full[1::2].copy()
    even = np.concatenate([full[:1], full[2::2]])
    return CoeffVector(odd, Parity.ODD), CoeffVector(even, Parity.EVEN)


def parity_combine(odd: CoeffVector, even: CoeffVector) -> np.ndarray:
    """Inverse of :func:`parity_decompose`."""
    if len(even.coeffs) != len(odd.coeffs) + 1:
        raise ShapeError("even sector must carry exactly one more mode than odd")
    full = np.empty(2 * len(odd.coeffs) + 1, dtype=complex)
    full[0] = even.coeffs[0]
    full[1::2] = odd.coeffs
    full[2::2] = even.coeffs[1:]
    return full


@dataclass(frozen=True)
class ValidationReport:
    alpha: float
    N: int
    gap_lower: float
    growth_lower: float
    growth_upper: float
    # the same constants on the half sample s <= N/2
    gap_lower_half: float
    growth_lower_half: float
    growth_upper_half: float
    drift_tolerance: float
    passed: bool
    reasons: tuple = ()


def _multiplier_constants(h: np.ndarray, s: np.ndarray, alpha: float):
    n1 = s[:, None]
    n2 = s[None, :]
    upper = n1 > n2
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.abs(h[:, None] - h[None, :]) / (np.abs(n1 - n2) * n1 ** (alpha - 1))
        growth = np.abs(h) / s**alpha
    return float(gap[upper].min()), float(growth.min()), float(growth.max())


def validate_multiplier(spec: SystemSpec, N: int, drift_tolerance: float = 0.1) -> ValidationReport:
    """Empirical check of the multiplier hypotheses on ``1 <= s <= N``.

    Computes the separation constant
    ``min |h(n1) - h(n2)| / (|n1 - n2| n1^(alpha-1))`` over pairs and the
    growth bounds ``min/max |h(s)| / s^alpha``.  A finite sample always gives
    positive numbers, so the report also recomputes them on ``s <= N/2`` and
    fails when any constant drifts by more than `drift_tolerance` (relative)
    on doubling the sample: that is the signature of a constant tending to 0
    or infinity.
    """
    if N < 2:
        raise InsufficientSampleError(f"need N >= 2 sample points, got {N}")
    alpha = spec.growth_exponent
    s = np.arange(1, N + 1, dtype=float)
    h = multiplier_values(s.astype(int), spec)
    full = _multiplier_constants(h, s, alpha)
    half_n = N // 2
    if half_n >= 2:
        half = _multiplier_constants(h[:half_n], s[:half_n], alpha)
    else:
        half = (np.nan, np.nan, np.nan)

    reasons = []
    names = ("gap_lower", "growth_lower", "growth_upper")
    for name, a, b in zip(names, full, half):
        if not (np.isfinite(a) and a > 0):
            reasons.append(f"{name} = {a} is not positive and finite")
        elif np.isfinite(b) and abs(a - b) > drift_tolerance * abs(b):
            reasons.append(f"{name} drifts from {b:.4g} to {a:.4g} between N={half_n} and N={N}")
    return ValidationReport(alpha, N, *full, *half, drift_tolerance, not reasons, tuple(reasons))


def gap_constant(spectrum: Spectrum) -> float:
    """``min |lambda_n - lambda_m| / ((n - m) n^(1/2))`` over positive modes n > m."""
    pos = spectrum.modes > 0
    n = spectrum.modes[pos].astype(float)
    lam = spectrum.values[pos]
    if len(n) < 2:
        raise InsufficientSampleError("gap constant needs at least two positive modes")
    i, j = np.triu_indices(len(n), k=1)  # j > i, so n[j] > n[i]
    ratio = np.abs(lam[j] - lam[i]) / ((n[j] - n[i]) * np.sqrt(n[j]))
    return float(ratio.min())


def scaling_bounds(spectrum: Spectrum) -> tuple[float, float]:
    """Range of ``|lambda_n| / n^alpha`` over positive modes."""
    pos = spectrum.modes > 0
    ratio = np.abs(spectrum.values[pos]) / spectrum.modes[pos].astype(float) ** spectrum.alpha
    return float(ratio.min()), float(ratio.max())


def admissible_r(alpha: float) -> tuple[float, float]:
    return (0.5 - alpha, alpha - 0.5)


def check_r(r: float, alpha: float) -> None:
    lo, hi = admissible_r(alpha)
    if not lo < r < hi:
        raise RangeError(
            f"Sobolev index r={r} outside the admissible interval ({lo:g}, {hi:g}) "
            f"for growth exponent alpha={alpha:g}")


def random_state(N: int, rng: np.random.Generator, parity: Parity = Parity.ODD,
                 r: float = 0.0) -> CoeffVector:
    """Unit-L2 complex state with i.i.d. Gaussian coefficients."""
    n = len(mode_indices(N, parity))
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return CoeffVector(c / np.linalg.norm(c), parity, r)


def as_array(u) -> np.ndarray:
    return u.coeffs if isinstance(u, CoeffVector) else np.asarray(u, dtype=complex)


__all__: Sequence[str] = [
    "Kind", "Parity", "SystemSpec", "Spectrum", "CoeffVector", "ValidationReport",
    "eigenvalue", "water_wave_frequency", "multiplier_values", "mode_indices",
    "sobolev_weights", "sobolev_inner", "parity_decompose", "parity_combine",
    "validate_multiplier", "gap_constant", "scaling_bounds", "admissible_r",
    "check_r", "random_state",
]
