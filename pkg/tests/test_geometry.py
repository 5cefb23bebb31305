import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dumbbell.errors import (InvalidEpsilon, InvalidParameters, NonPositiveProfile,
                             OutOfDomain)
from dumbbell.geometry import (DumbbellSpec, MaterialParams, ProfileSpec, channel_height,
                               validate_profile)


def test_material_params_bounds():
    MaterialParams(0.3, 0.0)
    for bad in (-1.0, 1.0, 1.5):
        with pytest.raises(InvalidParameters):
            MaterialParams(bad, 0.0)
    with pytest.raises(InvalidParameters):
        MaterialParams(0.0, -1e-12)


def test_profile_rejects_nonpositive():
    with pytest.raises(NonPositiveProfile):
        ProfileSpec.constant(0.0)
    with pytest.raises(NonPositiveProfile):
        ProfileSpec.polynomial([1.0, -2.0])        # g(1) = -1
    with pytest.raises(NonPositiveProfile):
        ProfileSpec.cosine_bump(0.5, -0.5)          # min g = -0.5


def test_profile_derivatives_match_finite_differences():
    h = 1e-5
    x = np.linspace(0.1, 0.9, 7)
    for prof in (ProfileSpec.polynomial([1.0, 0.5, -0.25, 0.1]), ProfileSpec.cosine_bump(1.0, 0.3)):
        g, g1, g2 = prof.derivatives(x)
        fd1 = (prof.value(x + h) - prof.value(x - h)) / (2 * h)
        fd2 = (prof.value(x + h) - 2 * g + prof.value(x - h)) / h ** 2
        np.testing.assert_allclose(g1, fd1, rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(g2, fd2, rtol=1e-4, atol=1e-4)


def test_profile_integral_exact():
    assert ProfileSpec.polynomial([1.0, 0.0, 4.0]).integral() == pytest.approx(1.0 + 4.0 / 3.0, rel=1e-15)
    assert ProfileSpec.cosine_bump(1.0, 0.5).integral() == pytest.approx(1.5, rel=1e-15)


def test_validate_profile_examples():
    assert validate_profile(ProfileSpec.constant(1.0)).holds
    bump = validate_profile(ProfileSpec.cosine_bump(1.0, 0.5))
    assert not bump.holds and bump.violations
    # g' = pi sin(2 pi x) > 0 just right of 0
    assert any(0.0 < x <= 0.25 and d > 0 for x, d in bump.violations)
    # g = 1 + 4 (x - 1/2)^2 = 2 - 4x + 4x^2
    assert validate_profile(ProfileSpec.polynomial([2.0, -4.0, 4.0])).holds


def test_validate_profile_report_consistency():
    rep = validate_profile(ProfileSpec.cosine_bump(1.0, 0.5), n_samples=1000)
    assert rep.holds == (len(rep.violations) == 0)
    assert rep.delta_used == 0.25


def test_channel_height_examples():
    assert channel_height(ProfileSpec.constant(1.0), 0.1, 0.5) == pytest.approx(0.1)
    assert channel_height(ProfileSpec.polynomial([2.0, -4.0, 4.0]), 0.1, 0.0) == pytest.approx(0.2)
    with pytest.raises((OutOfDomain, InvalidEpsilon)):
        channel_height(ProfileSpec.constant(), 0.0, 0.5)
    with pytest.raises(OutOfDomain):
        channel_height(ProfileSpec.constant(), 0.1, 1.5)


@given(eps=st.floats(1e-4, 0.4), x=st.floats(0.0, 1.0),
       a=st.floats(0.2, 2.0), b=st.floats(0.0, 1.0))
@settings(max_examples=60, deadline=None)
def test_channel_height_linear_in_epsilon(eps, x, a, b):
    prof = ProfileSpec.cosine_bump(a, b)
    assert channel_height(prof, 2 * eps, x) == 2 * channel_height(prof, eps, x)


@given(c=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_accepted_profiles_are_positive(c):
    coeffs = [1.5] + c
    try:
        prof = ProfileSpec.polynomial(coeffs)
    except NonPositiveProfile:
        return
    rep = validate_profile(prof)
    assert prof.min_value() > 0
    assert isinstance(rep.holds, bool)


def test_dumbbell_spec_epsilon_guard():
    prof = ProfileSpec.polynomial([2.0, -4.0, 4.0])   # max g = 2
    DumbbellSpec(1.0, 1.0, prof, 0.49)
    with pytest.raises(InvalidEpsilon):
        DumbbellSpec(1.0, 1.0, prof, 0.5)
    with pytest.raises(InvalidEpsilon):
        DumbbellSpec(1.0, 1.0, ProfileSpec.constant(), 0.0)


def test_dumbbell_areas():
    spec = DumbbellSpec(1.0, 2.0, ProfileSpec.constant(1.0), 0.5)
    assert spec.area() == pytest.approx(2 + 4 + 0.5)
