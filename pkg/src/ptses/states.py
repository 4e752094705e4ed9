"""Polynomial SES/QES wavefunctions.

A state is ``psi(r) = exp(-r^2/2 - i b r) * sum_n p_n (i r)^(n - ell)`` with
coefficients normalized to ``p_N = 1``.  Quasi-even vectors come from the
backward recurrence, quasi-odd ones from the trailing-minor determinant
formula (evaluated in extended precision); both must satisfy every row of
the recurrence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import gmpy2
import numpy as np

from .charges import (
    _mp_number,
    extended_context,
    multiplet_charges,
    odd_tail_extended,
    polish_even_extended,
    polish_odd_extended,
)
from .core import EVEN, ODD, ModelParams, QuantumNumbers, _check_parity, energy, recurrence_coeffs
from .errors import ConvergenceError, DomainError

PARITY_TOL = 1e-12
_EXTENDED = (type(gmpy2.mpfr(0)), type(gmpy2.mpc(0)))
RIGHT = "right"
LEFT = "left"


@dataclass(frozen=True, eq=False)
class SesState:
    """One solved bound/Sturmian state.

    ``side="left"`` marks a reflected partner (see
    :func:`ptses.contour.left_state`): its ``params.b`` and ``F`` are the
    reflected values and it lives on the mirrored line ``r = x + i*eps``.
    """

    params: ModelParams
    qn: QuantumNumbers
    parity: str
    F: complex
    E: float
    coeffs: np.ndarray
    side: str = RIGHT
    # extended-precision charge; the float coefficients are rounded from it
    charge_ext: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        c = np.array(self.coeffs)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return self.qn.N

    @property
    def k(self) -> int:
        return self.qn.k


def _sub(n: int, N: int) -> float:
    # A_n at E = E_N
    return 2.0 * (n - N - 1)


def _beta(n: int, L: int, b: float) -> float:
    return -(2 * n + 1 - L) * b


def _dtype(F):
    return complex if np.iscomplexobj(F) and np.imag(F) != 0 else float


def quasi_even_coeffs(N: int, L: int, b: float, F) -> tuple[np.ndarray, float]:
    """Backward recurrence from ``p_N = 1`` down to ``p_0``.

    ``p_{n-1} = -[(beta_n - F) p_n + C_n p_{n+1}] / A_n`` for ``n = N..1``.
    The row-0 relation is never used to build the vector; its value,
    normalized like :func:`recurrence_residual`, is returned as the residual.

    Returns
    -------
    coeffs : ndarray, shape (N + 1,)
    residual : float
    """
    if N < 0 or L < 1:
        raise DomainError(f"need N >= 0 and L >= 1, got N={N}, L={L}")
    dt = _dtype(F)
    if dt is float:
        F = float(np.real(F))
    p = np.zeros(N + 2, dtype=dt)
    p[N] = 1.0
    for n in range(N, 0, -1):
        C = (n + 1) * (n + 1 - L)
        p[n - 1] = -((_beta(n, L, b) - F) * p[n] + C * p[n + 1]) / _sub(n, N)
    row0 = (_beta(0, L, b) - F) * p[0] + (1 - L) * p[1]
    p = p[: N + 1]
    return p, abs(row0) / (np.max(np.abs(p)) * _max_row_coeff(N, L, b, F))


def _trailing_minors(N, L, b, F):
    """``Delta_j = det(rows j..N)`` for ``j = L..N`` (index ``j - L``), with
    ``Delta_j = B_j Delta_{j+1} - C_j A_{j+1} Delta_{j+2}``; gmpy2 arithmetic."""
    size = N - L + 1
    d = [gmpy2.mpfr(0)] * (size + 2)
    d[size] = gmpy2.mpfr(1)
    for idx in range(size - 1, -1, -1):
        j = L + idx
        val = (-(2 * j + 1 - L) * b - F) * d[idx + 1]
        if j < N:
            val -= (j + 1) * (j + 1 - L) * _sub(j + 1, N) * d[idx + 2]
        d[idx] = val
    return d[:size]


def _to_array(values):
    out = np.array([complex(v) for v in values])
    if np.all(out.imag == 0):
        return out.real.copy()
    return out


def quasi_odd_coeffs(N: int, L: int, b: float, F, polish: bool = False) -> tuple[np.ndarray, float]:
    """Quasi-odd vector from the closed determinant formula.

    ``p_{j-1} = p_N det(rows j..N of the recurrence) / prod_{i=j..N} (-A_i)``
    for ``j = N..L``; ``p_0 .. p_{L-1}`` are zero.  The formula's value for
    ``p_{L-1}`` is proportional to the quasi-odd secular determinant, and its
    size (through row ``L``) is returned as the residual.

    The trailing block is strongly non-normal, so the arithmetic is done in
    extended precision.  With ``polish=True``, ``F`` is first Newton-refined
    to the nearby exact charge (it must already be close to one); without it
    the vector is built at ``F`` as given.  ``F`` may itself be a gmpy2 number.
    """
    if N < L or L < 1:
        raise DomainError(f"quasi-odd states need N >= L >= 1, got N={N}, L={L}")
    with extended_context(N):
        if isinstance(F, _EXTENDED):
            Fm = F
        elif polish:
            Fm = polish_odd_extended(N, L, b, F)
            if abs(complex(Fm) - complex(F)) > 1e-6 * (1 + abs(F)):
                raise ConvergenceError(f"F={F} is not close to a quasi-odd charge")
        else:
            Fm = _mp_number(F)
        d = _trailing_minors(N, L, gmpy2.mpfr(b), Fm)
        p = [gmpy2.mpfr(0)] * (N + 1)
        p[N] = gmpy2.mpfr(1)
        prod = gmpy2.mpfr(1)
        terminal = None
        for j in range(N, L - 1, -1):
            prod *= -_sub(j, N)
            val = d[j - L] / prod
            if j > L:
                p[j - 1] = val
            else:
                terminal = val
        scale = max(abs(x) for x in p)
        res = float(abs(_sub(L, N) * terminal) / (scale * _max_row_coeff(N, L, b, complex(Fm))))
    return _to_array(p), res


def coeffs_extended(state: SesState) -> list:
    """The right state's coefficients recomputed from its charge in the active
    gmpy2 precision (the caller sets the context)."""
    if state.side != RIGHT:
        raise DomainError("coeffs_extended expects a right state")
    P = state.params
    N, L = state.N, P.L
    F = state.charge_ext if state.charge_ext is not None else _mp_number(state.F)
    if state.parity == EVEN:
        return _even_extended(N, L, P.b, F)
    d = _trailing_minors(N, L, gmpy2.mpfr(P.b), F)
    p = [gmpy2.mpfr(0)] * (N + 1)
    p[N] = gmpy2.mpfr(1)
    prod = gmpy2.mpfr(1)
    for j in range(N, L, -1):
        prod *= -_sub(j, N)
        p[j - 1] = d[j - L] / prod
    return p


def _even_extended(N, L, b, F):
    b = gmpy2.mpfr(b)
    p = [gmpy2.mpfr(0)] * (N + 2)
    p[N] = gmpy2.mpfr(1)
    for n in range(N, 0, -1):
        C = (n + 1) * (n + 1 - L)
        p[n - 1] = -((-(2 * n + 1 - L) * b - F) * p[n] + C * p[n + 1]) / _sub(n, N)
    return p[: N + 1]


def backward_odd_coeffs(N: int, L: int, b: float, F) -> tuple[np.ndarray, complex]:
    """Backward substitution on rows ``N..L+1`` in extended precision; the
    cross-check for :func:`quasi_odd_coeffs`.  Also returns the would-be
    ``p_{L-1}``."""
    if N < L or L < 1:
        raise DomainError(f"quasi-odd states need N >= L >= 1, got N={N}, L={L}")
    with extended_context(N):
        t, _, p = odd_tail_extended(N, L, gmpy2.mpfr(b), _mp_number(F))
        return _to_array(p), complex(t)


def _max_row_coeff(N, L, b, F) -> float:
    m = 0.0
    for n in range(N + 1):
        m = max(m, abs(_sub(n, N)), abs(_beta(n, L, b) - F), abs((n + 1) * (n + 1 - L)))
    return m


def classify_quasi_parity(coeffs, L: int) -> str:
    """``"odd"`` when ``p_0 .. p_{L-1}`` vanish (relative to ``max|p|``) and
    ``p_L`` is nonzero; ``"even"`` otherwise.

    Quasi-odd coefficients can span many decades, so ``p_L`` is only required
    to be nonzero, not large.
    """
    p = np.asarray(coeffs)
    scale = np.max(np.abs(p)) if p.size else 0.0
    if scale == 0:
        raise DomainError("cannot classify an all-zero coefficient vector")
    tol = PARITY_TOL * scale
    head = np.abs(p[:L])
    if np.all(head <= tol) and len(p) > L and p[L] != 0:
        return ODD
    return EVEN


def recurrence_residual(state: SesState) -> float:
    """Worst row of the full recurrence, plus the energy row ``|A_{N+1} p_N|``,
    over ``max|p| * max|row coefficient|``."""
    P = state.params
    N, L, b, F, E = state.N, P.L, P.b, state.F, state.E
    p = np.concatenate([[0.0], np.asarray(state.coeffs), [0.0]])
    worst = 0.0
    coef = 0.0
    for n in range(N + 1):
        A, beta, C = recurrence_coeffs(n, L, b, E)
        row = A * p[n] + (beta - F) * p[n + 1] + C * p[n + 2]
        worst = max(worst, abs(row))
        coef = max(coef, abs(A), abs(beta - F), abs(C))
    final = abs(recurrence_coeffs(N + 1, L, b, E).A * p[N + 1])
    return (worst + final) / (np.max(np.abs(p)) * coef)


def make_state(params: ModelParams, N: int, k: int, parity: str = EVEN, charge=None) -> SesState:
    """Build the state ``|N, k>`` of the given quasi-parity.

    ``k`` counts the multiplet's charges in ascending order of real part.
    Passing ``charge`` skips the multiplet solve; it must be that eigencharge
    (quasi-odd charges are re-polished in extended precision either way).
    """
    _check_parity(parity)
    if charge is None:
        spec = multiplet_charges(N, params.L, params.b, parity)
        if not 1 <= k <= len(spec.charges):
            raise DomainError(f"k={k} outside 1..{len(spec.charges)} for N={N}, L={params.L}, {parity}")
        F = spec.charges[k - 1]
    else:
        if k < 1:
            raise DomainError(f"k must be >= 1, got {k}")
        F = charge
    if parity == EVEN:
        exact = polish_even_extended(N, params.L, params.b, F)
        if abs(complex(exact) - complex(F)) > 1e-6 * (1 + abs(F)):
            raise ConvergenceError(f"F={F} is not close to a quasi-even charge")
        with extended_context(N):
            coeffs = _to_array(_even_extended(N, params.L, params.b, exact))
        F = complex(exact)
    else:
        exact = polish_odd_extended(N, params.L, params.b, F)
        if abs(complex(exact) - complex(F)) > 1e-6 * (1 + abs(F)):
            raise ConvergenceError(f"F={F} is not close to a quasi-odd charge")
        coeffs, _ = quasi_odd_coeffs(N, params.L, params.b, exact)
        F = complex(exact)
    F = complex(F) if np.iscomplexobj(coeffs) else float(np.real(F))
    return SesState(params, QuantumNumbers(N, k), parity, F, energy(N, params.L, params.b), coeffs,
                    charge_ext=exact)


def _power_log(z, side: str):
    """``log(z)`` continuous along the state's line: principal for right
    states (``Re z > 0``), cut along the positive axis for left states."""
    if side == RIGHT:
        return np.log(z)
    return np.log(-z) + 1j * np.pi


def eval_wavefunction(state: SesState, x):
    """``psi(x)`` on the state's line ``r = x - i*eps`` (``x + i*eps`` for left
    partners).  ``(i r)^(n - ell)`` is evaluated as ``exp((n - ell) log(i r))``
    with the branch of :func:`_power_log`."""
    P = state.params
    x = np.asarray(x, dtype=float)
    sign = 1.0 if state.side == RIGHT else -1.0
    r = x - 1j * sign * P.eps
    z = 1j * r
    logz = _power_log(z, state.side)
    ell = float(P.ell)
    poly = np.polyval(np.asarray(state.coeffs)[::-1], z)
    return np.exp(-0.5 * r * r - 1j * P.b * r - ell * logz) * poly
