import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncsurface import SurfacePreset, convolve, fourier_constraints, identify, is_member, loop_generator, trig
from ncsurface.surfaces import DomainError, arc_of, loop_function, smoothstep

PRESETS = [SurfacePreset.sphere(), SurfacePreset.orientable(1), SurfacePreset.orientable(2),
           SurfacePreset.orientable(3)]


@pytest.mark.parametrize("preset", PRESETS, ids=str)
def test_identify_is_an_involution(preset):
    for th in np.linspace(0, 2 * math.pi, 997, endpoint=False):
        back = identify(preset, identify(preset, th))
        assert abs(math.remainder(back - th, 2 * math.pi)) < 1e-12


def test_nonorientable_domain():
    rp2 = SurfacePreset.nonorientable(1)
    assert identify(rp2, 0.5) == pytest.approx(0.5 - math.pi + 2 * math.pi)
    with pytest.raises(DomainError):
        identify(rp2, 4.0)


def test_preset_validation():
    with pytest.raises(ValueError):
        SurfacePreset("torus", 1)
    with pytest.raises(ValueError):
        SurfacePreset.orientable(0)
    assert SurfacePreset.from_config({"kind": "orientable", "genus": 2}) == SurfacePreset.orientable(2)


def test_shared_endpoint_goes_to_lower_arc():
    t2 = SurfacePreset.orientable(2)
    assert arc_of(t2, math.pi / 4)[:2] == ("a", 1)


def test_constraints_availability():
    assert fourier_constraints(SurfacePreset.orientable(2)) is None
    assert fourier_constraints(SurfacePreset.sphere())(trig({2: 1, -2: 1}))
    assert not fourier_constraints(SurfacePreset.nonorientable(1))(trig({1: 1}))


def test_smoothstep_endpoints():
    t = np.array([0.0, 0.5, 1.0])
    assert np.allclose(smoothstep(t), [0, 0.5, 1])
    eps = np.array([1e-3, 1 - 1e-3])
    assert smoothstep(eps)[0] < 1e-100 and 1 - smoothstep(eps)[1] < 1e-15


def test_loop_winding_examples():
    t1 = SurfacePreset.orientable(1)
    theta = np.linspace(0, math.pi / 2, 4001)
    vals = loop_function(t1, 1, 1, theta)
    winding = np.sum(np.angle(vals[1:] / vals[:-1])) / (2 * math.pi)
    assert winding == pytest.approx(1.0, abs=1e-9)
    f, _ = loop_generator(SurfacePreset.sphere(), 1, 1)
    th = np.linspace(0.1, 3.0, 50)
    from ncsurface import evaluate
    assert np.allclose(evaluate(f, th), evaluate(f, -th), atol=1e-10)
    const, _ = loop_generator(t1, 2, 0)
    assert const.allclose(trig({0: 1}).to_numeric(), tol=1e-12)


def test_loop_errors():
    with pytest.raises(ValueError):
        loop_generator(SurfacePreset.sphere(), 2, 1)
    with pytest.raises(ValueError):
        is_member(SurfacePreset.sphere(), trig({0: 1}), grid_size=8)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 4), st.integers(-2, 2), st.integers(1, 4), st.integers(-2, 2))
def test_members_form_an_algebra(a1, w1, a2, w2):
    t2 = SurfacePreset.orientable(2)
    f, _ = loop_generator(t2, a1, w1)
    g, _ = loop_generator(t2, a2, w2)
    assert is_member(t2, convolve(f, g), tol=1e-8)
