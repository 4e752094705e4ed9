"""Model parameters, the closed-form energy ladder and recurrence coefficients.

The oscillator lives on the shifted line ``r = x - i*eps`` with potential

    ell*(ell+1)/r**2 + i*F/r + 2*i*b*r + r**2,      ell = (L - 1)/2,

and its polynomial solutions ``exp(-r**2/2 - i*b*r) * sum_n p_n (i r)**(n - ell)``
obey the three-term recurrence ``A_n p_{n-1} + (beta_n - F) p_n + C_n p_{n+1} = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from .errors import DomainError

EVEN = "even"
ODD = "odd"
PARITIES = (EVEN, ODD)


def _check_parity(parity: str) -> str:
    if parity not in PARITIES:
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    return parity


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of one partial wave.

    Parameters
    ----------
    L : int
        Partial-wave label, ``L = 2*ell + 1 >= 1``.
    b : float
        Real shift of the oscillator.
    eps : float
        Offset of the integration line below the real axis.
    """

    L: int
    b: float = 0.0
    eps: float = 0.1

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise DomainError(f"L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "eps", float(self.eps))
        if not math.isfinite(self.b):
            raise DomainError("b must be finite")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise DomainError(f"eps must be positive, got {self.eps!r}")

    @property
    def ell(self) -> Fraction:
        # exact half-integer; parity of 2*ell decides branch handling
        return Fraction(self.L - 1, 2)


@dataclass(frozen=True)
class QuantumNumbers:
    """Polynomial degree ``N`` and 1-based charge-branch index ``k``."""

    N: int
    k: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise DomainError(f"N must be a nonnegative integer, got {self.N!r}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")


class RecurrenceCoeffs(NamedTuple):
    """Row ``n`` of the recurrence: ``B_n = beta - F``."""

    A: float
    beta: float
    C: int


@dataclass
class SpectralResult:
    """Eigenvalues from a variational or finite-difference solve.

    ``right_vectors[:, i]`` and ``left_vectors[:, i]`` belong to
    ``eigenvalues[i]``; either may be ``None`` when the solver does not
    produce them.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray | None = None
    left_vectors: np.ndarray | None = None
    residuals: np.ndarray | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)


def partial_wave_index(D: int, m: int) -> int:
    """Collapse dimension ``D`` and wave number ``m`` into ``L = D - 2 + 2m``."""
    L = D - 2 + 2 * m
    if L < 1:
        raise DomainError(f"D - 2 + 2m must be >= 1, got {L} for D={D}, m={m}")
    return L


def energy(N: int, L: int, b: float) -> float:
    """Energy ``E_N = 2N + 2 - L + b**2``; independent of the charge."""
    # same association as in recurrence_coeffs so that A_{N+1} cancels exactly
    return b * b + (2 * N + 2 - L)


def recurrence_coeffs(n: int, L: int, b: float, E: float) -> RecurrenceCoeffs:
    """Coefficients of row ``n``: ``A = b^2 + 2n - L - E``, ``beta = -(2n+1-L) b``,
    ``C = (n+1)(n+1-L)``."""
    if n < 0:
        raise DomainError("row index n must be nonnegative")
    A = (b * b + (2 * n - L)) - E
    beta = -(2 * n + 1 - L) * b
    C = (n + 1) * (n + 1 - L)
    return RecurrenceCoeffs(A, beta + 0.0, C)
