"""Eigencharges: roots of the secular determinants of the recurrence.

With ``E = E_N`` substituted, row ``n`` of the recurrence has sub-diagonal
``A_n = 2(n - N - 1)``, diagonal ``beta_n - F`` with ``beta_n = -(2n+1-L) b``
and super-diagonal ``C_n = (n+1)(n+1-L)``.  Because ``C_{L-1} = 0`` the system
splits into the leading ``L x L`` block (quasi-even charges, ``N`` enters only
as a parameter) and the trailing block on rows ``L..N`` (quasi-odd charges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import gmpy2
import numpy as np
import scipy.linalg

from .core import EVEN, ODD, ModelParams, _check_parity
from .errors import ConvergenceError, DomainError, NoRealBranchError, NumericalError

NEWTON_STEPS = 10
NEWTON_RTOL = 1e-14
DEGENERACY_TOL = 1e-10
# quasi-odd blocks this far above row L are polished in extended precision
EXTENDED_MIN_SPAN = 8


@dataclass
class ChargeSpectrum:
    """A multiplet of eigencharges at fixed ``(N, L, b)``.

    ``charges`` are sorted by real part (then imaginary part).  ``residuals``
    holds the secular determinant at each root divided by the product of the
    row max-norms of the block, so values near machine epsilon mean the root
    is exact to working precision.
    """

    params: ModelParams
    N: int
    parity: str
    charges: np.ndarray
    residuals: np.ndarray
    method: str = "eigensolve"
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __len__(self):
        return len(self.charges)


# --------------------------------------------------------------------------
# block assembly and determinant recurrences


def _block(N: int, L: int, b: float, lo: int, hi: int):
    """Rows ``lo..hi``: diagonal ``beta``, sub-diagonal ``A`` (rows lo+1..hi),
    super-diagonal ``C`` (rows lo..hi-1)."""
    n = np.arange(lo, hi + 1)
    beta = -(2 * n + 1 - L) * float(b) + 0.0
    A = 2.0 * (n[1:] - N - 1)
    C = ((n[:-1] + 1) * (n[:-1] + 1 - L)).astype(float)
    return beta, A, C


def _minor_recurrence(beta, prod, F):
    """Leading principal minors of ``T - F`` and their F-derivative.

    ``D_k = (beta_{k-1} - F) D_{k-1} - prod_{k-2} D_{k-2}``, with
    ``prod_j = A_{j+1} C_j``.
    """
    D_prev, D = 1.0, beta[0] - F
    dD_prev, dD = 0.0, -1.0
    for k in range(1, len(beta)):
        a = beta[k] - F
        p = prod[k - 1]
        D_prev, D = D, a * D - p * D_prev
        dD_prev, dD = dD, -D_prev + a * dD - p * dD_prev
    return D, dD


def _log_derivative(beta, prod, F):
    """Overflow-free ``(D'/D, log|D|)`` for the same minors via continued
    fraction ratios ``u_k = D_k / D_{k-1}``."""
    beta = [float(x) for x in beta]
    prod = [float(x) for x in prod]
    # exact zeros of a leading minor are nudged by a relative ulp
    tiny = 1e-16 * (1.0 + max(abs(x) for x in beta) + max((abs(x) for x in prod), default=0.0))
    u = beta[0] - F
    if abs(u) < tiny:
        u = tiny
    v_prev, v = 0.0, -1.0 / u
    logabs = math.log(abs(u))
    for k in range(1, len(beta)):
        a = beta[k] - F
        p = prod[k - 1]
        u_new = a - p / u
        if abs(u_new) < tiny:
            u_new = tiny
        v_new = (-1.0 + a * v - p * v_prev / u) / u_new
        v_prev, v, u = v, v_new, u_new
        logabs += math.log(abs(u))
    return v, logabs


def _row_scale(beta, A, C, F) -> float:
    """Log of the product of row max-norms of ``T - F``; the diagonal counts
    as ``|beta| + |F|`` so that an exact zero there does not shrink the scale."""
    m = len(beta)
    total = 0.0
    for k in range(m):
        row = [abs(beta[k]) + abs(F)]
        if k > 0:
            row.append(abs(A[k - 1]))
        if k < m - 1:
            row.append(abs(C[k]))
        total += math.log(max(max(row), 1.0))  # off-diagonals are integers
    return total


def _eigenvalues(beta, A, C):
    prod = A * C
    m = len(beta)
    try:
        if m == 1:
            return np.array([beta[0]]), True
        if np.all(prod > 0):
            # diagonal similarity turns the block into a symmetric one
            w = scipy.linalg.eigh_tridiagonal(beta, np.sqrt(prod), eigvals_only=True)
            return np.asarray(w, dtype=float), True
        T = np.diag(beta) + np.diag(A, -1) + np.diag(C, 1)
        return scipy.linalg.eigvals(T), False
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed on secular block: {exc}") from exc


def _polish(roots, beta, prod, use_ratio: bool):
    """Newton refinement; a step that increases |D| or jumps toward another
    root is rejected."""
    roots = np.array(roots)
    out = roots.copy()
    for i, F0 in enumerate(roots):
        others = np.delete(roots, i)
        gap = np.min(np.abs(others - F0)) if len(others) else np.inf
        F = F0
        D = None
        for _ in range(NEWTON_STEPS):
            if use_ratio:
                v, logabs = _log_derivative(beta, prod, F)
                if v == 0 or not np.isfinite(v):
                    break
                step = 1.0 / v
            else:
                D, dD = _minor_recurrence(beta, prod, F)
                if D == 0 or dD == 0:
                    break
                step = D / dD
            F_new = F - step
            if abs(F_new - F0) > 0.5 * gap:
                break
            if use_ratio:
                _, logabs_new = _log_derivative(beta, prod, F_new)
                if logabs_new > logabs:
                    break
            else:
                D_new, _ = _minor_recurrence(beta, prod, F_new)
                if abs(D_new) > abs(D):
                    break
            F = F_new
            if abs(step) <= NEWTON_RTOL * max(abs(F), 1e-300):
                break
        out[i] = F
    return out


def _sort(charges):
    charges = np.asarray(charges)
    order = np.lexsort((np.imag(charges), np.real(charges)))
    return charges[order]


def _relative_residuals(charges, beta, A, C, use_ratio):
    prod = A * C
    res = []
    for F in charges:
        scale = _row_scale(beta, A, C, F)
        if use_ratio:
            _, logabs = _log_derivative(beta, prod, F)
            res.append(math.exp(min(logabs - scale, 700.0)))
        else:
            D, _ = _minor_recurrence(beta, prod, F)
            res.append(abs(D) / math.exp(scale))
    return np.array(res)


def _extended_residuals(charges, N, L, b, beta, A, C):
    # |det| = |p_{L-1}| * prod |A_i| when the tail is normalized to p_N = 1
    log_a = sum(math.log(abs(a)) for a in A) + math.log(2.0 * (N - L + 1))
    res = []
    with extended_context(N):
        for F in charges:
            t, _, _ = odd_tail_extended(N, L, gmpy2.mpfr(b), _mp_number(F))
            if t == 0:
                res.append(0.0)
                continue
            logabs = float(gmpy2.log(abs(t))) + log_a
            res.append(math.exp(min(logabs - _row_scale(beta, A, C, F), 700.0)))
    return np.array(res)


def _snap_real(charges, rtol=1e-12):
    charges = np.asarray(charges, dtype=complex)
    small = np.abs(charges.imag) <= rtol * np.maximum(1.0, np.abs(charges.real))
    charges[small] = charges[small].real
    # roundoff real parts of roots on the imaginary axis (b = 0)
    axis = np.abs(charges.real) <= 1e-3 * rtol * np.abs(charges)
    charges[axis] = 1j * charges[axis].imag
    if np.all(charges.imag == 0):
        return charges.real.copy()
    return charges


# --------------------------------------------------------------------------
# secular values


def secular_value_even(F, N: int, L: int, b: float):
    """Determinant of the leading ``L x L`` block of ``T - F``.

    Computed by ``D_k = (beta_{k-1} - F) D_{k-1} - A_{k-1} C_{k-2} D_{k-2}``;
    this fixes the overall sign, e.g. ``F**2 - b**2 - 2N`` at ``L = 2``.
    """
    if L < 1 or N < L - 1:
        raise DomainError(f"need N >= L - 1 >= 0, got N={N}, L={L}")
    beta, A, C = _block(N, L, b, 0, L - 1)
    return _minor_recurrence(beta, A * C, F)[0]


def secular_value_odd(F, N: int, L: int, b: float):
    """Determinant of the trailing block (rows ``L..N``) of ``T - F``.

    Overflows for very large ``N``; the charge solver uses a scaled form.
    """
    if N < L:
        raise DomainError(f"need N >= L, got N={N}, L={L}")
    beta, A, C = _block(N, L, b, L, N)
    return _minor_recurrence(beta, A * C, F)[0]


def odd_root_distance(F, N: int, L: int, b: float) -> float:
    """Newton estimate ``|S_odd / S_odd'|`` of the distance from ``F`` to the
    nearest quasi-odd charge.  O(N) and overflow-free."""
    beta, A, C = _block(N, L, b, L, N)
    v, _ = _log_derivative(beta, A * C, F)
    return abs(1.0 / v) if v != 0 else math.inf


# --------------------------------------------------------------------------
# charge multiplets


def _even_spectrum(N, L, b, size, check_degenerate):
    beta, A, C = _block(N, L, b, 0, size - 1)
    roots, symmetric = _eigenvalues(beta, A, C)
    roots = _polish(roots, beta, A * C, use_ratio=not symmetric)
    if symmetric:
        roots = np.real(roots).astype(float)
    else:
        roots = _snap_real(roots)
    if not np.all(np.isfinite(roots)):
        raise NumericalError(f"non-finite eigencharge at N={N}, L={L}, b={b}")
    roots = _sort(roots)
    diagnostics: dict[str, Any] = {"symmetrized": symmetric, "degenerate": []}
    if check_degenerate and N >= L:
        dist = [odd_root_distance(F, N, L, b) for F in roots]
        diagnostics["odd_root_distance"] = dist
        diagnostics["degenerate"] = [
            int(i) for i, d in enumerate(dist) if d <= DEGENERACY_TOL * max(1.0, abs(roots[i]))
        ]
    res = _relative_residuals(roots, beta, A, C, use_ratio=False)
    return ChargeSpectrum(ModelParams(L, b), N, EVEN, roots, res, "eigensolve", diagnostics)


def quasi_even_charges(N: int, L: int, b: float, check_degenerate: bool = True) -> ChargeSpectrum:
    """All ``L`` roots of the leading ``L x L`` secular determinant.

    The block has diagonal ``(L-1-2n) b - F``, sub-diagonal ``2(n-N-1)`` and
    super-diagonal ``(n+1)(n+1-L)``.  Its off-diagonal products are positive
    for ``N >= L - 1``, so it is symmetrized and solved as a real symmetric
    tridiagonal problem, then each root gets up to ten Newton steps.

    With ``check_degenerate`` each root is tested against the quasi-odd
    secular determinant; roots within ``1e-10`` of a quasi-odd charge are
    listed in ``diagnostics["degenerate"]`` (this costs O(N) per root).
    """
    if int(L) != L or L < 1:
        raise DomainError(f"L must be a positive integer, got {L!r}")
    if int(N) != N or N < L - 1:
        raise DomainError(f"quasi-even charges need N >= L - 1, got N={N}, L={L}")
    return _even_spectrum(int(N), int(L), float(b), int(L), check_degenerate)


def low_degree_charges(N: int, L: int, b: float) -> ChargeSpectrum:
    """Charges of the ``N + 1`` quasi-even states that exist below ``N = L - 1``.

    For ``N < L - 1`` the row ``N + 1`` already carries ``A_{N+1} = 0`` so the
    whole recurrence is the leading ``(N+1) x (N+1)`` block.  For
    ``N >= L - 1`` this is :func:`quasi_even_charges`.
    """
    if int(N) != N or N < 0 or L < 1:
        raise DomainError(f"need N >= 0 and L >= 1, got N={N}, L={L}")
    if N >= L - 1:
        return quasi_even_charges(N, L, b)
    spec = _even_spectrum(int(N), int(L), float(b), int(N) + 1, False)
    spec.diagnostics["low_degree"] = True
    return spec


def quasi_odd_charges(N: int, L: int, b: float) -> ChargeSpectrum:
    """All ``N - L + 1`` roots of the trailing secular determinant (rows ``L..N``).

    The off-diagonal products are negative here, so a general eigensolver is
    used and complex roots are returned as such (``diagnostics["complex"]``
    counts them).
    """
    if int(L) != L or L < 1:
        raise DomainError(f"L must be a positive integer, got {L!r}")
    if int(N) != N or N < L:
        raise DomainError(f"quasi-odd charges need N >= L, got N={N}, L={L}")
    N, L, b = int(N), int(L), float(b)
    beta, A, C = _block(N, L, b, L, N)
    roots, symmetric = _eigenvalues(beta, A, C)
    roots = _polish(np.asarray(roots, dtype=complex), beta, A * C, use_ratio=True)
    roots = _snap_real(roots)
    extended = N - L >= EXTENDED_MIN_SPAN
    if extended:
        roots = np.array([complex(z) for z in aberth_odd_extended(N, L, b, roots)])
        roots = _snap_real(roots)
    roots = _sort(roots)
    if not np.all(np.isfinite(roots)):
        raise NumericalError(f"non-finite eigencharge at N={N}, L={L}, b={b}")
    if extended:
        res = _extended_residuals(roots, N, L, b, beta, A, C)
    else:
        res = _relative_residuals(roots, beta, A, C, use_ratio=True)
    n_complex = int(np.count_nonzero(np.imag(roots)))
    return ChargeSpectrum(
        ModelParams(L, b), N, ODD, roots, res, "eigensolve",
        {"complex": n_complex, "symmetrized": symmetric, "extended_precision": extended},
    )


def extended_bits(N: int) -> int:
    """Working precision (bits) for quasi-odd work at degree ``N``."""
    return 100 + 4 * int(N)


def extended_context(N: int):
    return gmpy2.context(gmpy2.get_context(), precision=extended_bits(N))


def _mp_number(x):
    """gmpy2 value of ``x``; gmpy2 inputs pass through at their precision."""
    if isinstance(x, (type(gmpy2.mpfr(0)), type(gmpy2.mpc(0)))):
        return x
    x = complex(x)
    return gmpy2.mpfr(x.real) if x.imag == 0 else gmpy2.mpc(x)


def odd_tail_extended(N: int, L: int, b, F):
    """Backward recurrence over rows ``N..L`` in the active gmpy2 precision.

    Returns ``(t, dt, p)`` where ``p[0..N]`` solves rows ``L+1..N`` with
    ``p_N = 1``, ``t`` is the would-be ``p_{L-1}`` (zero exactly at a
    quasi-odd charge) and ``dt = dt/dF``.
    """
    zero = gmpy2.mpfr(0)
    p = [zero] * (N + 2)
    dp = [zero] * (N + 2)
    p[N] = gmpy2.mpfr(1)
    for n in range(N, L - 1, -1):
        a = 2 * (n - N - 1)
        B = -(2 * n + 1 - L) * b - F
        c = (n + 1) * (n + 1 - L)
        p[n - 1] = -(B * p[n] + c * p[n + 1]) / a
        dp[n - 1] = -(B * dp[n] - p[n] + c * dp[n + 1]) / a
    t, dt = p[L - 1], dp[L - 1]
    for j in range(L):
        p[j] = zero
    return t, dt, p[: N + 1]


def aberth_odd_extended(N: int, L: int, b: float, guesses, max_steps: int = 200):
    """All quasi-odd charges by Aberth-Ehrlich iteration in extended precision.

    Double precision eigenvalues of the trailing block can sit on its
    pseudospectrum rather than near the true roots, so they are only used as
    starting points.  Every root is updated together, which avoids the
    collapse onto a shared root that independent Newton runs can suffer.
    """
    guesses = [complex(g) for g in guesses]
    m = N - L + 1
    if len(guesses) != m:
        raise DomainError(f"need {m} starting points, got {len(guesses)}")
    with extended_context(N):
        bb = gmpy2.mpfr(b)
        # nudge coincident starts apart
        z = [gmpy2.mpc(g) + gmpy2.mpc(0, 1e-9 * (1 + abs(g)) * (i + 1)) for i, g in enumerate(guesses)]
        tol = gmpy2.mpfr(2) ** (-(extended_bits(N) // 2))
        for _ in range(max_steps):
            done = True
            new = []
            for i in range(m):
                t, dt, _ = odd_tail_extended(N, L, bb, z[i])
                if t == 0:
                    new.append(z[i])
                    continue
                ratio = t / dt
                repel = sum(1 / (z[i] - z[j]) for j in range(m) if j != i)
                w = ratio / (1 - ratio * repel)
                new.append(z[i] - w)
                if abs(w) > tol * (1 + abs(z[i])):
                    done = False
            z = new
            if done:
                return z
    raise ConvergenceError(f"Aberth iteration did not converge at N={N}, L={L}, b={b}")


def polish_even_extended(N: int, L: int, b: float, F, max_steps: int = 60):
    """Newton-polish a quasi-even charge on the leading block in extended
    precision (the block is at most ``L x L``)."""
    size = min(L, N + 1)
    with extended_context(N):
        bb = gmpy2.mpfr(b)
        x = _mp_number(F)
        tol = gmpy2.mpfr(2) ** (-(extended_bits(N) // 2))
        for _ in range(max_steps):
            D_prev, D = gmpy2.mpfr(1), -(1 - L) * bb - x
            dD_prev, dD = gmpy2.mpfr(0), gmpy2.mpfr(-1)
            for k in range(1, size):
                a = -(2 * k + 1 - L) * bb - x
                p = 2 * (k - N - 1) * k * (k - L)
                D_prev, D = D, a * D - p * D_prev
                dD_prev, dD = dD, -D_prev + a * dD - p * dD_prev
            if D == 0:
                return x
            if dD == 0:
                raise ConvergenceError(f"zero derivative polishing quasi-even charge near {F}")
            step = D / dD
            x = x - step
            if abs(step) <= tol * (1 + abs(x)):
                return x
    raise ConvergenceError(f"quasi-even charge near {F} did not converge at N={N}, L={L}, b={b}")


def polish_odd_extended(N: int, L: int, b: float, F, max_steps: int = 60):
    """Newton-polish a quasi-odd charge in extended precision.

    The trailing block has negative off-diagonal products and is strongly
    non-normal, so double precision roots lose digits roughly exponentially
    in ``N - L``.  Returns a gmpy2 number at :func:`extended_bits` precision.
    """
    with extended_context(N):
        bb = gmpy2.mpfr(b)
        x = _mp_number(F)
        tol = gmpy2.mpfr(2) ** (-(extended_bits(N) // 2))
        for _ in range(max_steps):
            t, dt, _ = odd_tail_extended(N, L, bb, x)
            if dt == 0:
                raise ConvergenceError(f"zero derivative polishing quasi-odd charge near {F}")
            step = t / dt
            x = x - step
            if abs(step) <= tol * (1 + abs(x)):
                return x
    raise ConvergenceError(f"quasi-odd charge near {F} did not converge at N={N}, L={L}, b={b}")


def multiplet_charges(N: int, L: int, b: float, parity: str = EVEN) -> ChargeSpectrum:
    """Dispatch to the charge solver for ``parity``, including low degrees."""
    if _check_parity(parity) == EVEN:
        return low_degree_charges(N, L, b)
    return quasi_odd_charges(N, L, b)


# --------------------------------------------------------------------------
# closed forms and inversions


def closed_charges_L2(N: int, b: float) -> np.ndarray:
    """``-sqrt(b^2 + 2N), +sqrt(b^2 + 2N)`` (ascending)."""
    rad = b * b + 2 * N
    if rad < 0:
        raise DomainError("b^2 + 2N must be nonnegative")
    s = math.sqrt(rad)
    return np.array([-s, s])


def cardano_charges_L3(N: int, b: float) -> np.ndarray:
    """Closed-form roots of the ``L = 3`` secular cubic.

    Expanding the 3x3 determinant gives the depressed cubic
    ``F^3 - (4b^2 + 8N - 4) F - 8b = 0``.  Three real roots come from the
    trigonometric form; the smallest one is then recomputed from the root
    product ``8b`` to avoid cancellation.
    """
    if N < 2:
        raise DomainError(f"the L=3 triplet needs N >= 2, got {N}")
    p = -(4.0 * b * b + 8.0 * N - 4.0)
    q = -8.0 * b
    disc = -(4.0 * p**3 + 27.0 * q * q)
    if p == 0.0:
        r = np.cbrt(-q)
        roots = r * np.exp(2j * np.pi * np.arange(3) / 3)
        return _sort(_snap_real(roots))
    if disc >= 0.0 and p < 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = np.array([m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)])
        i = int(np.argmin(np.abs(roots)))
        big = np.delete(roots, i)
        roots[i] = -q / (big[0] * big[1])
        return np.sort(roots)
    s = math.sqrt(q * q / 4.0 + p**3 / 27.0)
    u = np.cbrt(-q / 2.0 + s)
    v = np.cbrt(-q / 2.0 - s)
    real = u + v
    pair = -real / 2.0 + 1j * (u - v) * math.sqrt(3.0) / 2.0
    return _sort(np.array([real, pair, np.conj(pair)]))


def leading_order_L3(N: int, b: float) -> np.ndarray:
    """Large-``N`` estimates ``-sqrt(8N), -b/N, sqrt(8N)`` of the L=3 triplet."""
    if N < 1:
        raise DomainError("N must be positive")
    s = math.sqrt(8.0 * N)
    return np.sort(np.array([-s, -b / N, s]))


def invert_N_L3(F: float, b: float) -> float:
    """Degree ``N`` at which ``F`` is an L=3 eigencharge (linear in N)."""
    if F == 0:
        raise DomainError("N-inversion is singular at F = 0")
    return -(4.0 * F * b * b + 8.0 * b - F**3 - 4.0 * F) / (8.0 * F)


def invert_N_L5(F: float, b: float) -> tuple[float, float]:
    """Both branches ``(N_plus, N_minus)`` of the L=5 secular quadratic in N.

    ``512 F N = -768 b - 256 F b^2 + 768 F + 40 F^3 +- 24 sqrt(R)`` with
    ``R = 1024 b^2 + 192 b F^3 + 512 F^2 + F^6``.  ``N_plus >= N_minus``
    exactly when ``F > 0``.
    """
    if F == 0:
        raise DomainError("N-inversion is singular at F = 0")
    rad = 1024.0 * b * b + 192.0 * b * F**3 + 512.0 * F * F + F**6
    if rad < 0:
        raise NoRealBranchError(f"negative radicand {rad:.6g} at F={F}, b={b}")
    base = -768.0 * b - 256.0 * F * b * b + 768.0 * F + 40.0 * F**3
    root = 24.0 * math.sqrt(rad)
    return (base + root) / (512.0 * F), (base - root) / (512.0 * F)


def series_coefficients(order: int) -> list[int]:
    """Coefficients of ``x = 1 + t x^3``: ``binom(3k, k) / (2k + 1)``."""
    return [math.comb(3 * k, k) // (2 * k + 1) for k in range(order + 1)]


def charge_series_L3(N: int, b: float, order: int = 2) -> float:
    """Smallest-magnitude L=3 charge from its large-``N`` series.

    Writing ``F = -bh * Fh / N`` with ``bh = b / (1 + (b^2 - 1)/(2N))`` turns
    the cubic into ``Fh = 1 + beta Fh^3 / N^3``, ``beta = bh^3 / (8b)``, whose
    solution is expanded in powers of ``beta / N^3`` and truncated after
    ``order`` corrections.
    """
    if N < 1:
        raise DomainError("N must be positive")
    if int(order) != order or order < 0:
        raise DomainError("order must be a nonnegative integer")
    s = 1.0 + (b * b - 1.0) / (2.0 * N)
    if s <= 0:
        raise DomainError(f"shift denominator vanishes at N={N}, b={b}")
    b_hat = b / s
    beta = b * b / (8.0 * s**3)  # = b_hat^3 / (8 b), finite at b = 0
    t = beta / float(N) ** 3
    if abs(t) >= 0.5:
        raise DomainError(f"|beta|/N^3 = {abs(t):.3g} too large for the series")
    F_hat = sum(c * t**k for k, c in enumerate(series_coefficients(order)))
    return -b_hat * F_hat / N


def charge_asymptotics_L4(N: int, b: float, iterations: int = 8) -> np.ndarray:
    """Four L=4 charges from the fixed-point form around ``F ~ rho M``.

    With ``M = sqrt(2N + b^2 - 2)`` the secular quartic reads
    ``(F^2 - M^2)(F^2 - 9M^2) = 36 + 48 b F``.  Setting
    ``F = rho M sqrt(1 + R)`` for ``rho`` in ``{-3, -1, 1, 3}`` gives

        R = 48 b sqrt(1+R) / (g rho M^3) + 36 / (g rho^2 M^4),
        g = 8|rho| - 16 + rho^2 R,

    iterated ``iterations`` times from ``R = 0``.
    """
    m2 = 2.0 * N + b * b - 2.0
    if m2 <= 0:
        raise DomainError(f"2N + b^2 - 2 must be positive, got {m2}")
    if int(iterations) != iterations or iterations < 0:
        raise DomainError("iterations must be a nonnegative integer")
    M = math.sqrt(m2)
    out = []
    for rho in (-3, -1, 1, 3):
        R = 0.0
        for _ in range(int(iterations)):
            g = 8 * abs(rho) - 16 + rho * rho * R
            if g == 0 or 1.0 + R <= 0:
                raise ConvergenceError(f"fixed point left its domain at rho={rho}")
            R = 48.0 * b * math.sqrt(1.0 + R) / (g * rho * M**3) + 36.0 / (g * rho * rho * M**4)
            if not (R > -1.0 and math.isfinite(R)):
                raise ConvergenceError(f"R = {R} left (-1, inf) at rho={rho}, N={N}, b={b}")
        out.append(rho * M * math.sqrt(1.0 + R))
    return np.array(out)
