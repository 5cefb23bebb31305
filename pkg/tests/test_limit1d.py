import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dumbbell.errors import InvalidParameters
from dumbbell.geometry import MaterialParams, ProfileSpec
from dumbbell.limit1d import (LimitProblem, beam_eigenvalues, beam_roots, limit_functions,
                              sigma_distortion_ratio, solve_limit)

from oracles import beam_root_brentq, beam_theta


def test_beam_roots_examples():
    k = beam_roots(2)
    assert k[0] == pytest.approx(4.7300407449, abs=1e-9)
    assert k[1] == pytest.approx(7.8532046240, abs=1e-9)
    for x in beam_roots(6):
        assert abs(math.cos(x) * math.cosh(x) - 1.0) <= 1e-8 * math.cosh(x)


def test_bisection_agrees_with_brent():
    k = beam_roots(8)
    ref = np.array([beam_root_brentq(j) for j in range(1, 9)])
    np.testing.assert_allclose(k, ref, atol=2e-12)
    with pytest.raises(InvalidParameters):
        beam_roots(0)


def test_limit_problem_validation():
    with pytest.raises(InvalidParameters):
        LimitProblem(ProfileSpec.constant(), MaterialParams(), 3)


@pytest.mark.parametrize("sigma", [0.0, 0.3])
def test_golden_values(sigma):
    s = solve_limit(LimitProblem(ProfileSpec.constant(), MaterialParams(sigma, 0.0), 256), 2)
    assert s.eigenvalues[0] == pytest.approx(beam_theta(1, sigma), rel=1e-6)
    assert s.eigenvalues[1] == pytest.approx(beam_theta(2, sigma), rel=1e-5)
    np.testing.assert_allclose(beam_eigenvalues(2, sigma), [beam_theta(1, sigma), beam_theta(2, sigma)],
                               rtol=1e-12)
    if sigma == 0.3:
        assert s.eigenvalues[0] == pytest.approx(456.513, rel=1e-6)


def test_eigenvectors_mass_normalized_and_signed():
    prof = ProfileSpec.cosine_bump(1.0, 0.4)
    s = solve_limit(LimitProblem(prof, MaterialParams(0.3, 1.0), 64), 4)
    mesh, dm = s.meta["mesh"], s.meta["dofmap"]
    from dumbbell.femcore import WeightedMass, assemble
    M = assemble(mesh, dm, WeightedMass(prof))
    G = s.eigenvectors.T @ (M @ s.eigenvectors)
    assert np.abs(G - np.eye(4)).max() <= 1e-10
    for f in limit_functions(s):
        interior = f.values[1:-1]
        first = interior[np.flatnonzero(np.abs(interior) > 1e-12 * np.abs(interior).max())[0]]
        assert first > 0
        assert f.values[0] == f.values[-1] == f.slopes[0] == f.slopes[-1] == 0.0


@pytest.mark.parametrize("sigma", [-0.5, 0.3, 0.8])
def test_sigma_distortion_identity(sigma):
    r = sigma_distortion_ratio(sigma, 0.0, ProfileSpec.constant())
    np.testing.assert_allclose(r, 1 - sigma ** 2, rtol=0, atol=1e-8)
    assert len(r) == 5


def test_sigma_ratio_trivial_and_general():
    np.testing.assert_allclose(sigma_distortion_ratio(0.0, 0.0, ProfileSpec.constant(), 64), 1.0, atol=1e-12)
    r = sigma_distortion_ratio(0.3, 2.0, ProfileSpec.cosine_bump(1.0, 0.4), 64)
    # tension does not scale with sigma, so the ratio lies strictly between 1 - sigma^2 and 1
    assert np.all((r > 0.91) & (r < 1.0))


def test_convergence_order():
    p = LimitProblem(ProfileSpec.constant(), MaterialParams(0.0, 0.0))
    th = np.array([solve_limit(LimitProblem(p.profile, p.params, n), 1).eigenvalues[0]
                   for n in (32, 64, 128, 256)])
    ref = th[-1] + (th[-1] - th[-2]) / 15.0     # Richardson for order 4
    err = np.abs(th[:-1] - ref)
    order = np.log2(err[:-1] / err[1:])
    assert order.min() >= 3.5


@given(c=st.floats(0.0, 0.8), tau=st.floats(0.0, 5.0), sigma=st.floats(-0.9, 0.9))
@settings(max_examples=10, deadline=None)
def test_eigenvalues_at_least_one(c, tau, sigma):
    s = solve_limit(LimitProblem(ProfileSpec.cosine_bump(1.0, c), MaterialParams(sigma, tau), 32), 3)
    assert s.eigenvalues.min() >= 1.0


@pytest.mark.parametrize("prof", [ProfileSpec.cosine_bump(1.0, 0.5), ProfileSpec.polynomial([2.0, -4.0, 4.0])])
def test_even_profile_gives_alternating_parity(prof):
    s = solve_limit(LimitProblem(prof, MaterialParams(0.3, 0.5), 64), 4)
    from dumbbell.femcore import WeightedMass, assemble
    mesh, dm = s.meta["mesh"], s.meta["dofmap"]
    M = assemble(mesh, dm, WeightedMass(prof))
    for j, f in enumerate(limit_functions(s)):
        parity = 1.0 if j % 2 == 0 else -1.0
        # reflection x -> 1 - x maps (value, slope) at node i to (value, -slope) at node n - i
        refl = np.stack([f.values[::-1], -f.slopes[::-1]], 1).ravel()
        d = dm.restrict(refl) - parity * s.eigenvectors[:, j]
        assert math.sqrt(M.quad(d)) <= 1e-8
