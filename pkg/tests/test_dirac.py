import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncsurface import (SurfaceElement, build_dirac, commutator_D, eigenbasis, fredholm_index, iterated_delta,
                       shift_power, spectrum, summability_scan, truncate)
from ncsurface.dirac import IndexFormulaError, dirac_pair_blocks, fedosov_index, represent, spectrum_csv_rows

import oracles
from strategies import elements


@pytest.mark.parametrize("n", [2, 3, 7, 16])
def test_dirac_matches_dense_oracle(n):
    t = build_dirac(n)
    assert np.array_equal(t.D.to_numpy().real, oracles.dense_dirac(n))
    D = t.D.to_numpy()
    assert np.allclose(D, D.conj().T)
    g = t.gamma.to_numpy()
    assert np.allclose(g @ D, -D @ g)


def test_absD_and_phase():
    t = build_dirac(6)
    assert np.array_equal(np.diag(t.absD.to_numpy()).real, list(range(1, 7)) + list(range(0, 6)))


@pytest.mark.parametrize("n", [2, 5, 12])
def test_eigenbasis_vectors(n):
    D = oracles.dense_dirac(n)
    pairs = eigenbasis(n)
    assert len(pairs) == 2 * n
    for p in pairs:
        v = np.asarray(p.vector, dtype=complex)
        assert np.allclose(D @ v, p.k * v, atol=1e-12)
    assert dirac_pair_blocks(n)


def test_small_spectrum_and_csv():
    rep = spectrum(3)
    assert sorted(rep.eigenvalues) == [-2, -1, 0, 0, 1, 2]
    assert rep.raw_multiplicities[0] == 2 and rep.multiplicities[0] == 1
    rows = spectrum_csv_rows(rep)
    assert sum(1 for r in rows if r[3]) == 1
    assert spectrum(4, exact=True).max_deviation == 0


@settings(max_examples=40, deadline=None)
@given(elements(3, 2), st.integers(8, 20))
def test_commutator_matches_dense(a, n):
    res = commutator_D(a, n)
    D = oracles.dense_dirac(n)
    A = truncate(a, n).to_numpy()
    Z = np.zeros_like(A)
    pa = np.block([[A, Z], [Z, A]])
    dense = D @ pa - pa @ D
    assert np.allclose(res.operator.to_numpy(), dense, atol=1e-12)
    m = res.interior
    assert np.allclose(res.operator[0, 1][:m, :m].to_numpy(), truncate(res.upper, n).to_numpy()[:m, :m])
    assert np.allclose(res.operator[1, 0][:m, :m].to_numpy(), truncate(res.lower, n).to_numpy()[:m, :m])


@settings(max_examples=25, deadline=None)
@given(elements(3, 2))
def test_delta_iterates_match_dense(a):
    n = 12
    res = iterated_delta(a, 3, n)
    N = np.diag(np.arange(n, dtype=float))
    X = truncate(a, n).to_numpy()
    for k in range(3):
        X = N @ X - X @ N
        assert np.allclose(res.iterates[k].to_numpy(), X)


def test_delta_on_graded_operator_uses_absD():
    n = 10
    a = SurfaceElement.toeplitz(__import__("ncsurface").trig({1: 1, -2: 3}))
    x = represent(a, n)
    res = iterated_delta(x, 2, n)
    absD = build_dirac(n).absD.to_numpy()
    X = x.to_numpy()
    for k in range(2):
        X = absD @ X - X @ absD
        assert np.allclose(res.iterates[k].to_numpy(), X)
    with pytest.raises(ValueError):
        iterated_delta(a, 0, n)
    with pytest.raises(TypeError):
        iterated_delta("x", 1, n)


def test_summability_scan_small():
    scan = summability_scan(2.0, 1000)
    assert scan.partial_sums[-1] == pytest.approx(oracles.basel_partial(2.0, 1000))
    assert scan.converges
    with pytest.raises(ValueError):
        summability_scan(0.0, 100)
    with pytest.raises(ValueError):
        summability_scan(2.0, 5)


@pytest.mark.parametrize("n", [2, 9, 40])
def test_indices_of_shifts(n):
    assert fredholm_index(shift_power(1, n)) == -1
    assert fredholm_index(shift_power(-1, n)) == 1
    if n > 2:
        assert fredholm_index(shift_power(-2, n), margin=2) == 2
        assert fredholm_index(shift_power(2, n), margin=2) == -2
    assert fredholm_index(truncate(SurfaceElement.identity(), n)) == 0


def test_index_formula_rejects_non_isometries():
    n = 6
    mask = np.ones(n, dtype=bool)
    with pytest.raises(IndexFormulaError):
        fedosov_index(2 * np.eye(n), mask)
    with pytest.raises(IndexFormulaError):
        fedosov_index(truncate(SurfaceElement.identity(), n).matrix.scale(2), mask)
