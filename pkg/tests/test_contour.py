import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import moment_reference
from ptses.charges import multiplet_charges
from ptses.contour import (
    QuadratureSpec,
    biorthogonality_residual,
    biorthogonality_terms,
    coulomb_element,
    exact_moments,
    left_state,
    moments,
    overlap,
    overlap_matrices,
    reflect_params,
    right_partner,
)
from ptses.core import EVEN, ODD, ModelParams
from ptses.errors import DomainError
from ptses.states import eval_wavefunction, make_state


def family(L, b, N_max, parity=EVEN, eps=0.1):
    P = ModelParams(L, b, eps)
    N_min = 0 if parity == EVEN else L
    out = []
    for N in range(N_min, N_max + 1):
        for k in range(1, len(multiplet_charges(N, L, b, parity).charges) + 1):
            out.append(make_state(P, N, k, parity))
    return out


def relative_offdiag(Q, i, j):
    return abs(Q[i, j]) / math.sqrt(abs(Q[i, i] * Q[j, j]))


# --------------------------------------------------------------------------
# quadrature settings and moments


def test_quadrature_spec_defaults_and_validation():
    q = QuadratureSpec()
    for b in (0.0, 5.0, -7.0):
        assert math.exp(-((q.width(b) - abs(b)) ** 2)) < 1e-16
    with pytest.raises(DomainError):
        QuadratureSpec(points=1000, order=16)
    with pytest.raises(DomainError):
        QuadratureSpec(scheme="simpson")
    with pytest.raises(DomainError):
        QuadratureSpec(half_width=-1.0)


@pytest.mark.parametrize("b", [0.0, 0.4, 1.3, 5.0, -0.5, -3.0])
def test_moments_against_adaptive_quadrature(b):
    kmin, kmax = -3, 6
    ref = np.array([moment_reference(b, k) for k in range(kmin, kmax + 1)])
    exact = exact_moments(b, kmin, kmax)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(exact - ref)) <= 1e-13 * scale
    assert np.max(np.abs(moments(b, kmin, kmax) - ref)) <= 1e-12 * scale


def test_gaussian_moment_closed_form():
    mu = exact_moments(0.0, -1, 2)
    assert mu[1] == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert mu[0] == pytest.approx(math.pi, rel=1e-15)
    assert mu[3] == pytest.approx(-math.sqrt(math.pi) / 2, rel=1e-15)


# --------------------------------------------------------------------------
# reflection


def test_reflect_params():
    assert reflect_params(2, 5, 1e-2) == (-2, -5, -1e-2)
    assert reflect_params(*reflect_params(2.5, -1.0, 0.3)) == (2.5, -1.0, 0.3)
    assert reflect_params(1 + 2j, 1.0, 0.1)[0] == -1 + 2j


def test_left_state_examples():
    s = make_state(ModelParams(1, 0.0), 6, 1)
    assert np.array_equal(left_state(s).coeffs, s.coeffs)
    P = ModelParams(2, 5.0)
    for N in (2, 5):
        one, two = make_state(P, N, 1), make_state(P, N, 2)
        a = left_state(one)
        assert a.F == pytest.approx(two.F, rel=1e-15)
        assert a.E == one.E and a.params.b == -5.0
    odd = make_state(ModelParams(2, 1.0), 6, 2, ODD)
    back = right_partner(left_state(odd))
    assert np.array_equal(back.coeffs, odd.coeffs) and back.F == odd.F


# --------------------------------------------------------------------------
# pairings


def test_ground_state_norm():
    s = make_state(ModelParams(1, 0.0), 0, 1)
    assert overlap(left_state(s), s) == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_overlap_matches_literal_integral():
    P = ModelParams(3, 0.5, 0.1)
    a, c = make_state(P, 3, 1), make_state(P, 5, 2)
    la = left_state(a)

    def integrand(x, coulomb):
        x = float(x)
        r = x - 0.1j
        w = 1j / r if coulomb else 1.0
        return complex(np.conj(eval_wavefunction(la, x)) * w * eval_wavefunction(c, x))

    for coulomb, fn in ((False, overlap), (True, coulomb_element)):
        ref = complex(mpmath.quad(lambda x: integrand(x, coulomb), [-10.5, -1, 0, 1, 10.5]))
        for q in (QuadratureSpec(), QuadratureSpec(scheme="analytic"), QuadratureSpec(path="direct")):
            assert fn(la, c, q) == pytest.approx(ref, rel=1e-10)


def test_q_is_non_diagonal_and_asymmetric():
    P = ModelParams(2, 5.0)
    a, c = make_state(P, 2, 1), make_state(P, 3, 1)
    d = overlap_matrices([a, c])
    assert relative_offdiag(d.Q, 0, 1) > 1e-6
    assert abs(d.Q[0, 1] - d.Q[1, 0]) > 1e-6 * abs(d.Q[0, 1])


def test_overlap_data_shapes():
    kets = family(2, 1.0, 3)
    d = overlap_matrices(kets)
    assert d.Q.shape == d.W.shape == (len(kets), len(kets))
    assert d.ket_index == [(s.N, s.k) for s in kets] == d.bra_index
    d2 = overlap_matrices(kets, bras=[left_state(kets[0])])
    assert d2.Q.shape == (1, len(kets))
    assert np.allclose(d2.Q[0], d.Q[0], rtol=1e-12)
    with pytest.raises(DomainError):
        overlap_matrices([])


@pytest.mark.parametrize("L, parity", [(2, EVEN), (3, EVEN), (4, EVEN), (2, ODD), (3, ODD)])
def test_w_diagonal_within_multiplet(L, parity):
    N = L + 3
    kets = [make_state(ModelParams(L, 5.0), N, k, parity)
            for k in range(1, len(multiplet_charges(N, L, 5.0, parity).charges) + 1)]
    d = overlap_matrices(kets)
    for i, j in itertools.permutations(range(len(kets)), 2):
        assert abs(d.W[i, j]) <= 1e-6 * math.sqrt(abs(d.W[i, i] * d.W[j, j]))
    assert np.all(np.isfinite(d.w)) and np.all(d.w != 0)
    assert np.allclose(d.w, np.diag(d.W), rtol=1e-10)


def test_biorthogonality_examples():
    P = ModelParams(2, 5.0)
    s = make_state(P, 2, 1)
    assert biorthogonality_residual(left_state(s), s) == 0.0
    assert biorthogonality_residual(left_state(s), make_state(P, 3, 2)) <= 1e-6
    P = ModelParams(3, 5.0)
    a, c = make_state(P, 2, 1), make_state(P, 4, 3)
    t1, t2 = biorthogonality_terms(left_state(a), c)
    assert abs(t1) > 0 and abs(t2) > 0
    assert biorthogonality_residual(left_state(a), c) <= 1e-6
    assert biorthogonality_residual(left_state(a), c, floor=0.0) <= 1e-6


@pytest.mark.parametrize("L", [1, 2, 3])
def test_biorthogonality_family(L):
    kets = family(L, 5.0, 6)
    q = QuadratureSpec(scheme="analytic")
    worst = max(biorthogonality_residual(left_state(a), c, q) for a, c in itertools.product(kets, kets))
    assert worst <= 1e-6


# --------------------------------------------------------------------------
# quadrature stability


def test_truncation_and_refinement_stability():
    kets = family(3, 1.5, 5)
    base = overlap_matrices(kets)
    wide = overlap_matrices(kets, QuadratureSpec(half_width=2 * (1.5 + 10)))
    fine = overlap_matrices(kets, QuadratureSpec(points=2048))
    scale = np.max(np.abs(base.Q))
    assert np.max(np.abs(wide.Q - base.Q)) <= 1e-12 * scale
    assert np.max(np.abs(fine.Q - base.Q)) <= 1e-8 * scale
    wscale = np.max(np.abs(base.W))
    assert np.max(np.abs(wide.W - base.W)) <= 1e-12 * wscale


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([1, 3, 5]), st.floats(-0.8, 0.8), st.floats(0.05, 0.4), st.floats(0.05, 0.4))
def test_eps_independence_for_odd_L(L, b, eps1, eps2):
    q = QuadratureSpec(path="direct", points=2048)
    vals = []
    for eps in (eps1, eps2):
        P = ModelParams(L, b, eps)
        a, c = make_state(P, L, 1), make_state(P, L + 2, min(2, L))
        la = left_state(a)
        scale = math.sqrt(abs(overlap(la, a, q) * overlap(left_state(c), c, q)))
        vals.append(overlap(la, c, q) / scale)
    assert abs(vals[0] - vals[1]) <= 1e-8
