import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncsurface import (GaussianRational, HochschildChain, PairingInput, ParityObstruction, SurfaceElement,
                       finiteness_isometry_check, finiteness_phi, hochschild_boundary, k0_battery,
                       orientation_obstruction, pairing_index, pi_D_evaluate, trig, truncate)
from ncsurface.geometry import PairingError, ProjectionMatrix

from strategies import elements

U = SurfaceElement.toeplitz(trig({1: 1}))
UBAR = SurfaceElement.toeplitz(trig({-1: 1}))
ONE = SurfaceElement.identity()
P0 = SurfaceElement.projection(0)


def test_boundary_degree_one_example():
    # b(a0, b, a1) = (a0, b a1) - (a1 a0, b)
    chain = HochschildChain(1, [(U, ONE, UBAR)])
    expected = HochschildChain(0, [(U, UBAR), (-(UBAR * U), ONE)])
    assert (hochschild_boundary(chain) + HochschildChain(0, [(-U, UBAR), (UBAR * U, ONE)])).is_zero()
    assert hochschild_boundary(chain).expand() == expected.expand()


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(st.just(d), st.lists(elements(2, 2), min_size=d + 2,
                                                                             max_size=d + 2))))
def test_boundary_squares_to_zero(data):
    degree, slots = data
    omega = HochschildChain(degree, [tuple(slots)])
    if degree >= 2:
        assert hochschild_boundary(hochschild_boundary(omega)).is_zero()
    else:
        assert hochschild_boundary(omega).degree == 0


def test_chain_validation():
    with pytest.raises(ValueError):
        HochschildChain(1, [(U, ONE)])
    with pytest.raises(ValueError):
        HochschildChain(-1, [])
    with pytest.raises(ValueError):
        hochschild_boundary(HochschildChain(0, [(U, ONE)]))
    with pytest.raises(ValueError):
        HochschildChain(0, [(U, ONE)]) + HochschildChain(1, [])


@settings(max_examples=40, deadline=None)
@given(elements(4, 3))
def test_finiteness_isometry(a):
    n = a.corner_size + a.degree + 2
    chk = finiteness_isometry_check(a, n)
    assert chk.equal
    col = truncate(a, n + 4).to_numpy()[:, 0]
    assert float(chk.lhs.re) == pytest.approx(float(np.sum(np.abs(col) ** 2)))
    assert isinstance(chk.lhs, GaussianRational)


def test_phi_of_symmetric_symbol():
    phi = finiteness_phi(U + UBAR, 4)
    assert [complex(phi[i, 0]) for i in range(4)] == [0, 1, 0, 0]
    with pytest.raises(ValueError):
        finiteness_isometry_check(SurfaceElement.projection(3), 2)


def test_pi_D_exact_and_numeric_agree():
    omega = HochschildChain(2, [(ONE, ONE, U, UBAR), (P0, U, UBAR, U)])
    exact = pi_D_evaluate(omega, None, 12, exact=True)
    numeric = pi_D_evaluate(omega, None, 12, exact=False)
    assert np.allclose(exact.to_numpy(), numeric.to_numpy())


def test_orientation_examples():
    res = orientation_obstruction(HochschildChain(2, [(ONE, ONE, U, UBAR)]), None, 24)
    assert res.diagonals_agree and res.verdict == "obstructed"
    assert res.residual == pytest.approx(2.0)
    empty = orientation_obstruction(HochschildChain(0, []), None, 16)
    assert empty.residual == pytest.approx(1.0)
    with pytest.raises(ParityObstruction):
        orientation_obstruction(HochschildChain(1, [(ONE, U, UBAR)]), None, 16)


def test_pairing_battery_values():
    battery = {p.name: p for p in k0_battery()}
    assert [p.is_projection() for p in battery.values()] == [True] * len(battery)
    got = [pairing_index(PairingInput(battery["one"], q), None, 12) for q in battery.values()]
    assert got == [1, 0, 0, 1, 0, 1]
    assert pairing_index(PairingInput(battery["diag(1,p_e0)"], battery["one"]), None, 12) == 1
    assert battery["p_e0"].is_finite_corner() and not battery["one"].is_finite_corner()


def test_pairing_rejects_non_projections():
    bad = ProjectionMatrix("u", [[U]])
    with pytest.raises(ValueError):
        PairingInput(bad, k0_battery()[0])
    with pytest.raises(ValueError):
        ProjectionMatrix("ragged", [[ONE, ONE]])
    assert issubclass(PairingError, ValueError)
