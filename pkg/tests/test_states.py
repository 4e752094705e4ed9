import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hermite_even_coefficients
from ptses.charges import multiplet_charges, polish_odd_extended, quasi_even_charges
from ptses.core import EVEN, ODD, ModelParams
from ptses.errors import ConvergenceError, DomainError
from ptses.states import (
    backward_odd_coeffs,
    classify_quasi_parity,
    eval_wavefunction,
    make_state,
    quasi_even_coeffs,
    quasi_odd_coeffs,
    recurrence_residual,
)


def test_ground_gaussian():
    p, res = quasi_even_coeffs(0, 1, 0.0, 0.0)
    assert list(p) == [1.0] and res == 0.0
    s = make_state(ModelParams(1, 0.0, 0.1), 0, 1)
    x = np.linspace(-3, 3, 7)
    r = x - 0.1j
    assert np.allclose(eval_wavefunction(s, x), np.exp(-r * r / 2), rtol=1e-15)


def test_printed_charge_residual_and_polish():
    _, res = quasi_even_coeffs(2, 3, 5.0, -0.35755)
    assert 1e-12 < res <= 1e-4
    F = quasi_even_charges(2, 3, 5.0).charges[1]
    _, res = quasi_even_coeffs(2, 3, 5.0, F)
    assert res <= 1e-12


def test_p_wave_explicit_relation():
    F = math.sqrt(31)
    p, res = quasi_even_coeffs(3, 2, 5.0, F)
    assert p[0] == pytest.approx(-(5.0 + F) * p[1] / 6, rel=1e-14)
    assert res <= 1e-14


def test_single_row_odd_state():
    p, res = quasi_odd_coeffs(1, 1, 5.0, -10.0)
    assert list(p) == [0.0, 1.0] and res == 0.0


@pytest.mark.parametrize("N, L, b", [(5, 1, 2.0), (9, 3, 0.7), (14, 2, 3.0), (30, 4, 1.0)])
def test_odd_boundary_and_two_constructions(N, L, b):
    for F in multiplet_charges(N, L, b, ODD).charges:
        exact = polish_odd_extended(N, L, b, F)
        p, _ = quasi_odd_coeffs(N, L, b, exact)
        assert np.all(p[:L] == 0) and p[L] != 0 and p[N] == 1
        q, _ = backward_odd_coeffs(N, L, b, exact)
        assert np.max(np.abs(p[L:] - q[L:])) <= 1e-12 * np.max(np.abs(p))


def test_classify_examples():
    assert classify_quasi_parity([0, 0, 0, 1], 3) == ODD
    assert classify_quasi_parity([1, 0.3], 2) == EVEN
    assert classify_quasi_parity([0, 0, 1], 3) == EVEN  # p_L missing
    with pytest.raises(DomainError):
        classify_quasi_parity([0, 0, 0], 2)


def test_residual_examples():
    s = make_state(ModelParams(3, 5.0), 4, 2)
    assert recurrence_residual(s) <= 1e-12
    assert recurrence_residual(dataclasses.replace(s, F=s.F + 0.1)) > 1e-3
    off = dataclasses.replace(s, E=s.E + 1e-3)
    assert recurrence_residual(off) > 0


@pytest.mark.parametrize("parity", [EVEN, ODD])
def test_residual_grows_linearly(parity):
    s = make_state(ModelParams(2, 1.5), 6, 2, parity)
    r = [recurrence_residual(dataclasses.replace(s, F=s.F + d)) for d in (1e-6, 1e-5, 1e-4)]
    assert r[1] >= 5 * r[0] and r[2] >= 5 * r[1]


def test_make_state_validation():
    P = ModelParams(3, 5.0)
    with pytest.raises(DomainError):
        make_state(P, 2, 4)
    with pytest.raises(ConvergenceError):
        make_state(P, 2, 1, charge=3.0)
    with pytest.raises(DomainError):
        make_state(P, 2, 1, parity="both")


def test_state_invariants():
    s = make_state(ModelParams(3, 2.0), 6, 2, ODD)
    assert s.E == 2 * 6 + 2 - 3 + 4.0
    assert s.coeffs[-1] == 1 and np.all(s.coeffs[:3] == 0)
    with pytest.raises(ValueError):
        s.coeffs[0] = 1.0


@pytest.mark.parametrize("N", range(11))
def test_hermite_limit(N):
    s = make_state(ModelParams(1, 0.0), N, 1)
    h = hermite_even_coefficients(N)
    scaled = s.coeffs * (1j) ** np.arange(N + 1)
    c = scaled[N] / h[N]
    assert np.allclose(scaled, c * h, atol=1e-12 * np.max(np.abs(scaled)))


def test_wavefunction_decay_and_pt_symmetry():
    s = make_state(ModelParams(3, 1.2, 0.1), 5, 2)
    x = np.linspace(0.3, 4.0, 12)
    assert np.allclose(eval_wavefunction(s, -x), np.conj(eval_wavefunction(s, x)), rtol=1e-12)
    far = abs(eval_wavefunction(s, 15.0))
    assert far <= 1e-30 * np.max(np.abs(eval_wavefunction(s, x)))


@pytest.mark.parametrize("parity, slope", [(EVEN, -1.0), (ODD, 2.0)])
def test_behaviour_near_singularity(parity, slope):
    vals = []
    for eps in (1e-4, 1e-5):
        s = make_state(ModelParams(3, 0.8, eps), 4, 1, parity)
        vals.append(abs(eval_wavefunction(s, 0.0)))
    assert math.log(vals[0] / vals[1]) / math.log(10) == pytest.approx(slope, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 30), st.sampled_from([0.0, 0.7, 3.0, -2.5]), st.data())
def test_round_trip_and_residual(L, extra, b, data):
    parity = data.draw(st.sampled_from([EVEN, ODD]))
    N = L - 1 + extra if parity == EVEN else L + extra
    spec = multiplet_charges(N, L, b, parity)
    k = data.draw(st.integers(1, len(spec.charges)))
    s = make_state(ModelParams(L, b), N, k, parity, charge=spec.charges[k - 1])
    assert recurrence_residual(s) <= 1e-12
    if k - 1 not in spec.diagnostics.get("degenerate", []):
        assert classify_quasi_parity(s.coeffs, L) == parity
