"""One test per acceptance criterion; the terminal summary prints a PASS/FAIL line for each."""

import itertools
import time

import numpy as np
import pytest

from ncsurface import (ExactMatrix, GaussianRational, SurfaceElement, SurfacePreset, build_dirac,
                       build_J, commutant_dimension, commutator_D, conjugate_by_J, finiteness_isometry_check,
                       finiteness_phi, first_order_defect, fourier_constraints, fredholm_index,
                       is_member, iterated_delta, k0_battery, loop_generator, multiply, orientation_obstruction,
                       shift_power, shift_power_defect, spectrum, summability_scan, trig, truncate)
from ncsurface.algebra import TruncatedOperator, support_radius
from ncsurface.audit import DEFAULT_CHAINS, _check_orientation, parse_chain
from ncsurface.geometry import PairingInput, ParityObstruction, pairing_report

import oracles
from battery import TRIG_BATTERY, coeffs


def _exact_toeplitz(entry, n):
    """Exact n x n matrix with (r, c) entry ``entry(r - c)``."""
    cells = {}
    for r in range(n):
        for c in range(n):
            v = entry(r - c)
            if v:
                cells[(r, c)] = v
    return ExactMatrix.from_sparse((n, n), cells)


def _number(n):
    return ExactMatrix.from_sparse((n, n), {(k, k): k for k in range(1, n)})


def test_criterion_01_spectrum():
    """criterion 1: spectrum at n=128 is -127..127 simple plus one flagged 0, deviation < 1e-9, < 10 s"""
    t0 = time.perf_counter()
    rep = spectrum(128, tol=1e-9)
    elapsed = time.perf_counter() - t0
    reference = np.linalg.eigvalsh(oracles.dense_dirac(128))
    expected = sorted(list(range(-127, 128)) + [0])
    assert np.max(np.abs(np.array(rep.eigenvalues) - expected)) < 1e-9
    assert np.max(np.abs(reference - expected)) < 1e-9
    assert rep.multiplicities == {k: 1 for k in range(-127, 128)}
    assert len(rep.boundary_artifacts) == 1
    assert rep.boundary_artifacts[0].edge_weight > 0.99
    assert rep.max_deviation < 1e-9
    assert elapsed < 10.0


def test_criterion_02_commutator_identity():
    """criterion 2: [S*N, T_f] = -i T_(ubar f') and [NS, T_f] = -i T_(u f') exactly on interior blocks at n=64"""
    n, m = 64, 63
    S = shift_power(1, n).matrix
    N = _number(n)
    SstarN, NS = S.H @ N, N @ S
    for name, f in TRIG_BATTERY.items():
        T = truncate(SurfaceElement.toeplitz(f), n).matrix
        # -i ubar f' has coefficient (j+1) f_{j+1} at mode j; -i u f' has (j-1) f_{j-1}
        up_expected = _exact_toeplitz(lambda j: (j + 1) * f[j + 1], n)
        lo_expected = _exact_toeplitz(lambda j: (j - 1) * f[j - 1], n)
        up = SstarN @ T - T @ SstarN
        lo = NS @ T - T @ NS
        assert up[:m, :m] == up_expected[:m, :m], name
        assert lo[:m, :m] == lo_expected[:m, :m], name
        res = commutator_D(SurfaceElement.toeplitz(f), n)
        assert res.operator[0, 1][:m, :m] == up_expected[:m, :m], name
        assert res.operator[1, 0][:m, :m] == lo_expected[:m, :m], name


def test_criterion_03_regularity():
    """criterion 3: delta_N^m(T_f) = (-i)^m T_(f^(m)) exactly for m <= 5 on the battery"""
    n = 64
    N = _number(n)
    for name, f in TRIG_BATTERY.items():
        X = truncate(SurfaceElement.toeplitz(f), n).matrix
        res = iterated_delta(SurfaceElement.toeplitz(f), 5, n)
        for m in range(1, 6):
            X = N @ X - X @ N
            # (-i)^m (ik)^m f_k = k^m f_k
            expected = _exact_toeplitz(lambda k: k ** m * f[k], n)
            assert X == expected, (name, m)
            assert res.iterates[m - 1].matrix == expected, (name, m)
            assert truncate(res.symbolic[m - 1], n).matrix == expected, (name, m)


def test_criterion_04_product_defects():
    """criterion 4: shift-power defects match brute force for |m|,|k| <= 6; T_fg - T_f T_g support <= deg f + deg g"""
    for m, k in itertools.product(range(-6, 7), repeat=2):
        n = 2 * (abs(m) + abs(k)) + 4
        brute = oracles.brute_defect(m, k, n)
        ours = shift_power_defect(m, k)
        got = np.zeros((n, n))
        if ours.size:
            got[:ours.size, :ours.size] = ours.entries.to_numpy().real
        assert np.array_equal(got, brute), (m, k)
    for (nf, f), (ng, g) in itertools.product(TRIG_BATTERY.items(), repeat=2):
        prod = multiply(SurfaceElement.toeplitz(f), SurfaceElement.toeplitz(g))
        defect = -prod.compact.entries.to_numpy() if prod.corner_size else np.zeros((0, 0))
        assert prod.corner_size <= f.degree + g.degree, (nf, ng)
        n = f.degree + g.degree + 4
        fc, gc = coeffs(f), coeffs(g)
        fg = oracles.brute_convolve(fc, gc)
        pad = f.degree + g.degree + 2
        brute = (oracles.compressed_product([lambda N_: oracles.dense_toeplitz(fg, N_)], n, pad)
                 - oracles.compressed_product([lambda N_: oracles.dense_toeplitz(fc, N_),
                                               lambda N_: oracles.dense_toeplitz(gc, N_)], n, pad))
        assert support_radius(brute, 1e-12) <= f.degree + g.degree
        got = np.zeros((n, n), dtype=complex)
        got[:defect.shape[0], :defect.shape[1]] = defect
        assert np.allclose(got, brute, atol=1e-12), (nf, ng)


def test_criterion_05_summability():
    """criterion 5: s=2 within 1e-3 of pi^2/3 - 1; s=1 log slope 2 +- 0.05 on [1e3, 1e6]; s=1.5 tails decreasing below 4e-2"""
    s2 = summability_scan(2.0, 10 ** 6)
    assert abs(s2.partial_sums[-1] - oracles.BASEL_LIMIT) < 1e-3
    assert abs(s2.partial_sums[-1] - oracles.basel_partial(2.0, 10 ** 6)) < 1e-9
    s1 = summability_scan(1.0, 10 ** 6)
    assert s1.growth_fit["range"] == [1000, 10 ** 6]
    assert abs(s1.growth_fit["c"] - 2.0) <= 0.05
    assert not s1.converges
    s15 = summability_scan(1.5, 10 ** 6)
    tails = s15.growth_fit["decade_tails"]
    values = [t["tail"] for t in tails]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(t["tail"] < 4e-2 for t in tails if t["from"] >= 10 ** 4)
    assert any(t["from"] == 10 ** 4 and t["to"] == 10 ** 5 for t in tails)


def test_criterion_06_index():
    """criterion 6: the truncated S* has Fredholm index exactly 1 at every n >= 2"""
    for n in list(range(2, 65)) + [128, 200]:
        Sstar = shift_power(-1, n)
        assert fredholm_index(Sstar) == 1, n
        assert fredholm_index(TruncatedOperator(n, Sstar.to_numpy())) == 1, n


def test_criterion_07_real_structure():
    """criterion 7: J^2 = id, JD = -DJ and J pi(T_f) J^-1 = pi(T_(f hat)) exactly at n=32"""
    n = 32
    J = build_J(n)
    assert J.square() == ExactMatrix.identity(2 * n)
    D = build_dirac(n).D
    assert J.conjugate(D).equals(D.scale(-1))
    for name, f in TRIG_BATTERY.items():
        res = conjugate_by_J(SurfaceElement.toeplitz(f), n, J)
        fhat = {k: v.conjugate() for k, v in f.items()}
        expected = _exact_toeplitz(lambda j: fhat.get(j, 0), n)
        assert res.operator[0, 0] == expected, name
        assert res.operator[1, 1] == expected, name
        assert res.operator[0, 1].is_zero() and res.operator[1, 0].is_zero(), name
        assert res.symbolic.symbol == trig(fhat), name


def test_criterion_08_first_order():
    """criterion 8: first-order defects have corner support <= deg a + deg b + 1; defect0(T_u, T_ubar) = -pi(p_e0)"""
    elems = {k: SurfaceElement.toeplitz(f) for k, f in TRIG_BATTERY.items()}
    for (na, a), (nb, b) in itertools.product(elems.items(), repeat=2):
        bound = a.degree + b.degree + 1
        n = max(4 * (a.degree + b.degree), 8) + 4
        res = first_order_defect(a, b, n)
        assert res.support <= bound, (na, nb)
        assert res.agrees and res.report.verdict == "finite-support", (na, nb)
        # entry scan of the finite sections themselves
        m = res.interior
        for blk in (res.defect0[0, 0], res.defect1[0, 1], res.defect1[1, 0]):
            assert support_radius(np.asarray(blk)[:m, :m], 1e-12) <= bound, (na, nb)
    res = first_order_defect(elems["u"], elems["ubar"], 16)
    m = res.interior
    expected = np.zeros((m, m))
    expected[0, 0] = -1.0
    assert np.array_equal(np.asarray(res.defect0[0, 0])[:m, :m], expected)
    assert np.array_equal(np.asarray(res.defect0[1, 1])[:m, :m], expected)
    assert res.corners[0].entries == ExactMatrix.from_entries([[-1]])


def test_criterion_09_commutant():
    """criterion 9: commutant dimension is 4 at n in {4, 8, 16} for the generators p_e0, p_e1, T_u"""
    gens = [SurfaceElement.projection(0), SurfaceElement.projection(1), SurfaceElement.toeplitz(trig({1: 1}))]
    for n in (4, 8, 16):
        assert commutant_dimension(gens, n) == 4, n


def test_criterion_10_finiteness():
    """criterion 10: isometry lhs = rhs exactly; Phi(T_f (1 - SS*)) is the nonnegative-mode coefficient vector"""
    p0 = SurfaceElement.projection(0)
    elems = [SurfaceElement.toeplitz(f) for f in TRIG_BATTERY.values()]
    elems += [p0, SurfaceElement.projection(3),
              SurfaceElement.toeplitz(trig({2: 2})) + p0,
              SurfaceElement.corner([[1, GaussianRational(0, 2)], [3, -1]]) + SurfaceElement.toeplitz(trig({-1: 1, 4: 5}))]
    for a in elems:
        n = a.corner_size + a.degree + 2
        chk = finiteness_isometry_check(a, n)
        assert chk.equal and chk.lhs == chk.rhs
        col = truncate(a, n).to_numpy()[:, 0]
        assert abs(complex(chk.lhs) - np.sum(np.abs(col) ** 2)) < 1e-12
    for name, f in TRIG_BATTERY.items():
        n = f.degree + 3
        phi = finiteness_phi(multiply(SurfaceElement.toeplitz(f), p0), n)
        expected = ExactMatrix.from_entries([[f[k]] for k in range(n)])
        assert phi == expected, name


def test_criterion_11_orientation():
    """criterion 11: even chains have equal diagonals and residual >= 1 - 1e-9; odd chains report parity obstruction"""
    chain_texts = list(DEFAULT_CHAINS) + ["p_e1,T_u,T_u,T_ubar,T_ubar,T_u", "one,one,T_u,T_u,T_ubar", "T_u,p_e0,T_ubar,T_u"]
    seen_even = seen_odd = False
    for chain_text in chain_texts:
        chain = parse_chain(chain_text)
        if chain.degree % 2:
            seen_odd = True
            with pytest.raises(ParityObstruction):
                orientation_obstruction(chain, None, 24)
        else:
            seen_even = True
            res = orientation_obstruction(chain, None, 24)
            assert res.diag_top == res.diag_bottom, chain_text
            assert res.residual >= 1 - 1e-9, chain_text
        status, _ = _check_orientation(chain_text, chain, 24, 1e-9)
        assert status == "obstructed-as-predicted", chain_text
    assert seen_even and seen_odd


def test_criterion_12_pairing_degeneracy():
    """criterion 12: pairing(p_e0, Q) = 0 for every battery Q, pairing(1, 1) = 1, stable between n and 2n"""
    battery = {p.name: p for p in k0_battery()}
    for q in battery.values():
        res = pairing_report(PairingInput(battery["p_e0"], q), None, 16)
        assert res.index == 0, q.name
        assert res.indices[0] == res.indices[1], q.name
    res = pairing_report(PairingInput(battery["one"], battery["one"]), None, 16)
    assert res.index == 1 and res.indices == (1, 1)


def _random_polys(seed: int, count: int, structure: str):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        deg = int(rng.integers(0, 11))
        c = {}
        for k in range(-deg, deg + 1):
            v = int(rng.integers(-3, 4))
            if v:
                c[k] = GaussianRational(v, int(rng.integers(-2, 3)))
        if structure == "even":
            c = {k: c.get(abs(k), 0) for k in range(-deg, deg + 1)}
            c = {k: v for k, v in c.items() if v}
        elif structure == "even-modes":
            c = {k: v for k, v in c.items() if k % 2 == 0}
        out.append(trig(c))
    return out


def test_criterion_13_surface_membership():
    """criterion 13: Fourier constraints agree with sampled membership; loop generators are members with rapid decay"""
    sphere, rp2 = SurfacePreset.sphere(), SurfacePreset.nonorientable(1)
    cases = _random_polys(1, 40, "free") + _random_polys(2, 30, "even") + _random_polys(3, 30, "even-modes")
    agree = {sphere: [0, 0], rp2: [0, 0]}
    for f in cases:
        for preset in (sphere, rp2):
            closed = fourier_constraints(preset)(f)
            sampled = is_member(preset, f).member
            assert closed == sampled, (preset, f)
            agree[preset][int(closed)] += 1
    assert all(yes > 0 and no > 0 for no, yes in agree.values())
    presets = [(sphere, 1), (SurfacePreset.orientable(1), 2), (SurfacePreset.orientable(2), 3),
               (rp2, 1), (SurfacePreset.nonorientable(3), 2)]
    for preset, arc in presets:
        for winding in (1, -2):
            f, rep = loop_generator(preset, arc, winding)
            assert is_member(preset, f, tol=1e-8).member, (preset, arc)
            assert rep.verdict == "rapid", (preset, arc)
