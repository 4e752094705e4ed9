"""Contour integrals between left and right states.

Kets live on the line ``r = x - i*eps``.  The bra of a state is the complex
conjugate of its reflected partner (parameters ``(-F*, -b)``) taken on the
mirrored line ``x + i*eps``; conjugation maps that line back onto the ket's
line, so every pairing becomes

    <<A|B> = e^{i pi ell} (-1)^{N_A} * int exp(-r^2 - 2ibr) * P_A(ir) P_B(ir) (ir)^{1-L} dr

with integer powers of ``ir`` only.  The integrand is analytic away from the
pole at ``r = 0``, so the line is moved through the saddle ``r = -ib`` where
nothing oscillates; when that line lies above the pole, the residue picked up
on the way is added back.

Near the saddle the monomials ``(ir)^n`` cancel heavily, so the polynomials
are recomputed from their charges in extended precision and re-expanded
about the line's centre before rounding.  The integrand is then summed
pointwise with panel Gauss-Legendre weights.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from .core import ModelParams
from .errors import DomainError, NumericalError
from .charges import extended_context
from .states import LEFT, RIGHT, SesState, coeffs_extended, eval_wavefunction

SCHEMES = ("gauss_legendre_panels", "trapezoid", "analytic")
PATHS = ("saddle", "direct")
REFINE_RTOL = 1e-8
BIORTH_FLOOR = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature on ``[-X, X]``.

    ``path="saddle"`` integrates along the steepest line (the production
    choice); ``path="direct"`` samples the states literally on ``Im r = -eps``
    with panels graded towards ``x = 0``, which is only accurate for small
    ``|b|`` and is kept as a cross-check.  ``scheme="analytic"`` skips the
    nodes altogether and sums closed-form moments in extended precision.
    """

    half_width: float | None = None
    points: int = 1024
    scheme: str = "gauss_legendre_panels"
    order: int = 16
    path: str = "saddle"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.path not in PATHS:
            raise DomainError(f"path must be one of {PATHS}, got {self.path!r}")
        if self.half_width is not None and not self.half_width > 0:
            raise DomainError("half_width must be positive")
        if self.points < 2 or self.order < 1:
            raise DomainError("points and order must be positive")
        if self.scheme == "gauss_legendre_panels" and self.points % self.order:
            raise DomainError(f"points ({self.points}) must be a multiple of order ({self.order})")

    def width(self, b: float) -> float:
        return abs(b) + 10.0 if self.half_width is None else float(self.half_width)

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(self.half_width, 2 * self.points, self.scheme, self.order, self.path)


@dataclass
class OverlapData:
    """``Q[a, c] = <<bra_a|ket_c>``, ``W[a, c] = <<bra_a|i/r|ket_c>`` and the
    diagonal Coulomb elements ``w`` of every ket with its own partner."""

    Q: np.ndarray
    W: np.ndarray
    w: np.ndarray
    bra_index: list
    ket_index: list
    diagnostics: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# nodes


def _gauss_panels(edges, order):
    t, wt = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * wt[None, :]
    return x.ravel(), w.ravel()


def _graded_edges(X, panels, eps):
    """Uniform panels plus a geometric cluster of breakpoints around 0."""
    edges = set(np.linspace(-X, X, panels + 1).tolist())
    s = eps / 4
    while s < min(1.0, X):
        edges.update((s, -s))
        s *= 2
    edges.add(0.0)
    return np.array(sorted(edges))


def nodes(quad: QuadratureSpec, b: float, eps: float = 0.1):
    """Real abscissae and weights for the line integral."""
    X = quad.width(b)
    if quad.scheme == "trapezoid":
        x = np.linspace(-X, X, quad.points)
        w = np.full_like(x, x[1] - x[0])
        w[[0, -1]] *= 0.5
        return x, w
    panels = quad.points // quad.order
    if quad.path == "direct":
        edges = _graded_edges(X, panels, eps)
    else:
        edges = np.linspace(-X, X, panels + 1)
    return _gauss_panels(edges, quad.order)


# --------------------------------------------------------------------------
# moments


def line_offset(b: float, eps: float, path: str) -> float:
    """``Im r`` of the integration line."""
    if path == "direct":
        return -eps
    if b >= 0:
        return -max(b, 1.0)
    if b < -1:
        return -b
    return -1.0


def _gauss_taylor(b: float, order: int) -> np.ndarray:
    """Taylor coefficients of ``exp(-r^2 - 2ibr)`` up to ``r^order``."""
    n = np.arange(order + 1)
    lin = np.array([(-2j * b) ** k / math.factorial(k) for k in n])
    quad = np.zeros(order + 1, dtype=complex)
    for j in range(order // 2 + 1):
        quad[2 * j] = (-1) ** j / math.factorial(j)
    return np.convolve(lin, quad)[: order + 1]


def residue_terms(b: float, kmin: int) -> dict:
    """``Res_{r=0} exp(-r^2 - 2ibr) (ir)^k`` for ``k = kmin..-1``."""
    if kmin >= 0:
        return {}
    g = _gauss_taylor(b, -kmin - 1)
    return {k: (1j) ** k * g[-k - 1] for k in range(kmin, 0)}


def _raw_moments(b, kmin, kmax, quad, eps):
    c = line_offset(b, eps, quad.path)
    x, w = nodes(quad, b, eps)
    r = x + 1j * c
    g = w * np.exp(-r * r - 2j * b * r)
    z = 1j * r
    ks = np.arange(kmin, kmax + 1)
    powers = z[None, :] ** ks[:, None]
    terms = powers * g[None, :]
    mu = terms.sum(axis=1)
    scale = np.abs(terms).sum(axis=1)
    if quad.path == "saddle" and c > 0:
        for k, res in residue_terms(b, kmin).items():
            mu[k - kmin] += 2j * np.pi * res
            scale[k - kmin] += 2 * np.pi * abs(res)
    return mu, scale


@functools.lru_cache(maxsize=256)
def _moments_cached(b, kmin, kmax, quad, eps):
    mu, scale = _raw_moments(b, kmin, kmax, quad, eps)
    mu2, _ = _raw_moments(b, kmin, kmax, quad.refined(), eps)
    err = np.abs(mu2 - mu) / np.maximum(scale, np.finfo(float).tiny)
    if np.max(err) > REFINE_RTOL:
        k = kmin + int(np.argmax(err))
        raise NumericalError(
            f"quadrature not converged for moment k={k} at b={b}: "
            f"refinement changes it by {np.max(err):.2e} relative"
        )
    mu2.setflags(write=False)
    return mu2


def _extended_bits(nmax: int, b: float) -> int:
    # enough to absorb the monomial cancellation around the saddle
    return 160 + 8 * int(nmax) + int(4 * b * b)


def _exact_moments(b: float, kmin: int, kmax: int):
    """``mu_k`` for ``k = kmin..kmax`` in the active gmpy2 precision.

    ``m_k = int exp(-r^2 - 2ibr) r^k dr`` on a line below the pole obeys
    ``2 m_{k+1} = k m_{k-1} - 2ib m_k`` (integration by parts), seeded by
    ``m_0 = sqrt(pi) e^{-b^2}`` and ``m_{-1} = i pi erfc(b)``.
    """
    bb = gmpy2.mpfr(b)
    ib = gmpy2.mpc(0, bb)
    pi = gmpy2.const_pi()
    m = {0: gmpy2.mpc(gmpy2.sqrt(pi) * gmpy2.exp(-bb * bb)), -1: gmpy2.mpc(0, pi * gmpy2.erfc(bb))}
    for k in range(0, kmax):
        m[k + 1] = (k * m[k - 1] - 2 * ib * m[k]) / 2
    for k in range(-1, kmin, -1):
        m[k - 1] = (2 * m[k + 1] + 2 * ib * m[k]) / k
    unit = [gmpy2.mpc(1), gmpy2.mpc(0, 1), gmpy2.mpc(-1), gmpy2.mpc(0, -1)]
    return {k: unit[k % 4] * m[k] for k in range(kmin, kmax + 1)}


def exact_moments(b: float, kmin: int, kmax: int) -> np.ndarray:
    """Closed-form ``mu_k`` rounded to complex doubles."""
    with gmpy2.context(gmpy2.get_context(), precision=_extended_bits(abs(kmin) + abs(kmax), b)):
        mu = _exact_moments(b, kmin, kmax)
        return np.array([complex(mu[k]) for k in range(kmin, kmax + 1)])


def moments(b: float, kmin: int, kmax: int, quad: QuadratureSpec | None = None, eps: float = 0.1) -> np.ndarray:
    """``mu_k = int exp(-r^2 - 2ibr) (ir)^k dr`` for ``k = kmin..kmax`` along a
    line below the pole.  Refined once; raises ``NumericalError`` if the two
    levels disagree by more than ``1e-8`` of the absolute integrand mass."""
    quad = quad or QuadratureSpec()
    if kmax < kmin:
        raise DomainError("kmax < kmin")
    if quad.path != "direct":
        eps = 0.0  # path does not depend on it; share the cache
    return _moments_cached(float(b), int(kmin), int(kmax), quad, float(eps))


# --------------------------------------------------------------------------
# reflection and left states


def reflect_params(F, b: float, eps: float):
    """``(F, b, eps) -> (-F, -b, -eps)``; complex charges are conjugated too,
    which keeps the reflected coefficients a solution of the recurrence."""
    if np.iscomplexobj(F) and np.imag(F) != 0:
        return -np.conj(F), -b, -eps
    return -F, -b, -eps


def _reflect_ext(x):
    """``-conj(x)`` at the precision ``x`` carries (gmpy2 rounds every
    operation to the active context)."""
    if x is None:
        return None
    if isinstance(x, type(gmpy2.mpc(0))):
        with gmpy2.context(gmpy2.get_context(), precision=max(x.precision)):
            return gmpy2.mpc(-x.real, x.imag)
    with gmpy2.context(gmpy2.get_context(), precision=x.precision):
        return -x


def _reflect(state: SesState, side: str) -> SesState:
    P = state.params
    N = state.N
    F, b, _ = reflect_params(state.F, P.b, P.eps)
    sign = (-1.0) ** (N - np.arange(N + 1))
    coeffs = sign * np.conj(state.coeffs)
    if not np.iscomplexobj(state.coeffs):
        coeffs = coeffs.real
    return SesState(ModelParams(P.L, b + 0.0, P.eps), state.qn, state.parity, F, state.E, coeffs,
                    side=side, charge_ext=_reflect_ext(state.charge_ext))


def left_state(right: SesState) -> SesState:
    """Reflected partner of ``right``.

    Its coefficients are those built at ``(-F*, -b)``.  Flipping the sign of
    every other coefficient solves the reflected recurrence exactly, so
    ``p'_n = (-1)^(N-n) conj(p_n)`` is used rather than a fresh (and, for
    quasi-odd states, ill-conditioned) construction.
    """
    if right.side != RIGHT:
        raise DomainError("left_state expects a right state")
    return _reflect(right, LEFT)


def right_partner(left: SesState) -> SesState:
    """Inverse of :func:`left_state`."""
    if left.side != LEFT:
        raise DomainError("right_partner expects a left state")
    return _reflect(left, RIGHT)


def _bra_phase(left: SesState) -> complex:
    # bra = e^{i pi ell} (-1)^N psi_partner on the ket's line
    return complex(np.exp(1j * np.pi * float(left.params.ell)) * (-1.0) ** left.N)


def _check_pair(left: SesState, right: SesState):
    if left.side != LEFT or right.side != RIGHT:
        raise DomainError("pairings take (left state, right state)")
    pl, pr = left.params, right.params
    if pl.L != pr.L or pl.eps != pr.eps:
        raise DomainError("left and right states must share L and eps")
    if pl.b != -pr.b:
        raise DomainError("the bra must come from the reflected family (b -> -b)")


# --------------------------------------------------------------------------
# pointwise integration


def _recentred(states, z0: float):
    """Float coefficients of each state's polynomial in ``(ir - z0)`` plus its
    low-order plain coefficients, both rounded from extended precision."""
    nmax = max(s.N for s in states)
    out = []
    with extended_context(nmax + 8):
        c0 = gmpy2.mpfr(z0)
        for s in states:
            p = coeffs_extended(s)
            N = len(p) - 1
            shifted = []
            for n in range(N + 1):
                acc = gmpy2.mpfr(0)
                zp = gmpy2.mpfr(1)
                for m in range(n, N + 1):
                    acc += math.comb(m, n) * p[m] * zp
                    zp *= c0
                shifted.append(complex(acc))
            out.append((np.array(shifted), np.array([complex(v) for v in p])))
    return out


def _horner(coeffs, t):
    v = np.zeros_like(t, dtype=complex)
    for c in coeffs[::-1]:
        v = v * t + c
    return v


def _pair_weights(L, b, quad, coulomb):
    c = line_offset(b, 0.0, "saddle")
    x, w = nodes(quad, b)
    r = x + 1j * c
    z = 1j * r
    weight = w * np.exp(-r * r - 2j * b * r) * z ** (1 - L)
    if coulomb:
        weight = weight * (-1.0 / z)
    return c, x, weight


def _residue_matrix(bra_low, ket_low, L, b, coulomb):
    """``2 pi i`` times the residues at ``r = 0`` of every bra-ket product."""
    shift = -L if coulomb else 1 - L
    res = residue_terms(b, shift)
    out = np.zeros((len(bra_low), len(ket_low)), dtype=complex)
    if not res:
        return out
    for a, pa in enumerate(bra_low):
        for k, pk in enumerate(ket_low):
            conv = np.convolve(pa[: -shift], pk[: -shift])
            total = sum(conv[j] * res[j + shift] for j in range(len(conv)) if j + shift < 0)
            out[a, k] = 2j * np.pi * total
    return -out if coulomb else out


def _saddle_matrix(partners, kets, quad, coulomb):
    """``sum_nodes w f`` for every (partner of bra, ket) pair, without the bra
    phase, together with the absolute integrand mass."""
    L, b = kets[0].params.L, kets[0].params.b
    c, x, weight = _pair_weights(L, b, quad, coulomb)
    uniq = {}
    for s in list(partners) + list(kets):
        uniq.setdefault(id(s), s)
    order = list(uniq)
    rec = dict(zip(order, _recentred([uniq[i] for i in order], -c)))
    t = 1j * x
    vals = {i: _horner(rec[i][0], t) for i in order}
    Vb = np.array([vals[id(s)] for s in partners])
    Vk = np.array([vals[id(s)] for s in kets])
    M = (Vb * weight) @ Vk.T
    mass = (np.abs(Vb) * np.abs(weight)) @ np.abs(Vk).T
    if c > 0:
        R = _residue_matrix([rec[id(s)][1] for s in partners], [rec[id(s)][1] for s in kets], L, b, coulomb)
        M = M + R
        mass = mass + np.abs(R)
    return M, mass


def _analytic_matrix(partners, kets, coulomb):
    L, b = kets[0].params.L, kets[0].params.b
    nmax = max(s.N for s in list(partners) + list(kets))
    shift = -L if coulomb else 1 - L
    out = np.zeros((len(partners), len(kets)), dtype=complex)
    with gmpy2.context(gmpy2.get_context(), precision=_extended_bits(nmax, b)):
        mu = _exact_moments(b, min(shift, 0), 2 * nmax + shift)
        cache = {}
        for s in list(partners) + list(kets):
            if id(s) not in cache:
                cache[id(s)] = coeffs_extended(s)
        for a, pa_state in enumerate(partners):
            pa = cache[id(pa_state)]
            for k, pk_state in enumerate(kets):
                pk = cache[id(pk_state)]
                acc = gmpy2.mpc(0)
                for m, x in enumerate(pa):
                    for n, y in enumerate(pk):
                        acc += x * y * mu[m + n + shift]
                out[a, k] = complex(-acc if coulomb else acc)
    return out


def _checked_saddle(partners, kets, quad, coulomb):
    if quad.scheme == "analytic":
        return _analytic_matrix(partners, kets, coulomb)
    M, mass = _saddle_matrix(partners, kets, quad, coulomb)
    M2, _ = _saddle_matrix(partners, kets, quad.refined(), coulomb)
    err = np.abs(M2 - M) / np.maximum(mass, np.finfo(float).tiny)
    if np.max(err) > REFINE_RTOL:
        raise NumericalError(f"quadrature not converged: refinement changes an entry by {np.max(err):.2e} relative")
    return M2


def _direct_integral(left, right, quad, coulomb):
    P = right.params
    x, w = nodes(quad, P.b, P.eps)
    f = np.conj(eval_wavefunction(left, x)) * eval_wavefunction(right, x)
    if coulomb:
        f = f * (1j / (x - 1j * P.eps))
    val = np.sum(w * f)
    if not np.isfinite(val):
        raise NumericalError("non-finite contour integral")
    return complex(val)


def _pair_integral(left, right, quad, coulomb):
    _check_pair(left, right)
    quad = quad or QuadratureSpec()
    if quad.path == "direct":
        return _direct_integral(left, right, quad, coulomb)
    M = _checked_saddle([right_partner(left)], [right], quad, coulomb)
    return complex(_bra_phase(left) * M[0, 0])


def overlap(left: SesState, right: SesState, quad: QuadratureSpec | None = None) -> complex:
    """``<<left|right>``."""
    return _pair_integral(left, right, quad, coulomb=False)


def coulomb_element(left: SesState, right: SesState, quad: QuadratureSpec | None = None) -> complex:
    """``<<left| i/r |right>``."""
    return _pair_integral(left, right, quad, coulomb=True)


def biorthogonality_terms(left: SesState, right: SesState, quad: QuadratureSpec | None = None):
    """``((F_M - F_N) W, (E_M - E_N) Q)`` for the bra of ``|N, j>`` and the
    ket ``|M, k>``."""
    FN = right_partner(left).F
    t1 = (right.F - FN) * coulomb_element(left, right, quad)
    t2 = (right.E - left.E) * overlap(left, right, quad)
    return t1, t2


def biorthogonality_residual(
    left: SesState, right: SesState, quad: QuadratureSpec | None = None, floor: float = BIORTH_FLOOR
) -> float:
    """Relative mismatch of ``(F_M - F_N) W = (E_M - E_N) Q``.

    Normalized by the larger side, but never by less than ``floor`` times the
    natural size of either side, ``|dE| sqrt|Q_NN Q_MM| + |dF| sqrt|w_N w_M|``.
    Pairs that are orthogonal by symmetry have both sides at round-off, where
    the plain ratio is meaningless.  ``floor=0`` gives the plain ratio; 0/0 is
    reported as 0.
    """
    t1, t2 = biorthogonality_terms(left, right, quad)
    big = max(abs(t1), abs(t2))
    if floor > 0 and big > 0:
        own_bra = left_state(right)
        own_ket = right_partner(left)
        q = math.sqrt(abs(overlap(left, own_ket, quad) * overlap(own_bra, right, quad)))
        w = math.sqrt(abs(coulomb_element(left, own_ket, quad) * coulomb_element(own_bra, right, quad)))
        natural = abs(right.E - left.E) * q + abs(right.F - own_ket.F) * w
        big = max(big, floor * natural)
    return 0.0 if big == 0 else abs(t1 - t2) / big


def _label(s: SesState):
    return (s.N, s.k)


def overlap_matrices(kets, quad: QuadratureSpec | None = None, bras=None) -> OverlapData:
    """Assemble ``Q`` and ``W`` between ``bras`` (default: the partners of
    ``kets``) and ``kets``, plus each ket's own ``w = <<left(ket)|i/r|ket>``."""
    kets = list(kets)
    if not kets:
        raise DomainError("need at least one ket")
    bras = [left_state(k) for k in kets] if bras is None else list(bras)
    quad = quad or QuadratureSpec()
    if any(k.params != kets[0].params for k in kets):
        raise DomainError("all kets must share (L, b, eps)")
    for a in bras:
        _check_pair(a, kets[0])
    if quad.path == "direct":
        Q = np.array([[overlap(a, k, quad) for k in kets] for a in bras])
        W = np.array([[coulomb_element(a, k, quad) for k in kets] for a in bras])
        w = np.array([coulomb_element(left_state(k), k, quad) for k in kets])
    else:
        partners = [right_partner(a) for a in bras]
        phase = np.array([_bra_phase(a) for a in bras])[:, None]
        Q = phase * _checked_saddle(partners, kets, quad, coulomb=False)
        W = phase * _checked_saddle(partners, kets, quad, coulomb=True)
        own = [left_state(k) for k in kets]
        Wk = _checked_saddle(kets, kets, quad, coulomb=True)
        w = np.array([_bra_phase(a) for a in own]) * np.diag(Wk)
    return OverlapData(Q, W, w, [_label(a) for a in bras], [_label(k) for k in kets])
