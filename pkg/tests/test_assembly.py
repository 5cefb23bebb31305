import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dumbbell.eigensolve import dense_reference_solve
from dumbbell.errors import IncompatibleMesh, NoTaggedNodes
from dumbbell.femcore import (ALL_BOUNDARY, ChannelEpsForm, DofMap, Limit1DForm, Mass, PlateForm,
                              WeightedMass, apply_clamped_constraints, assemble, constant_vector,
                              energy)
from dumbbell.geometry import DumbbellSpec, MaterialParams, ProfileSpec
from dumbbell.meshgen import (build_channel_reference_mesh, build_dumbbell_mesh,
                              build_interval_mesh)


@pytest.fixture(scope="module")
def small_dumbbell():
    return build_dumbbell_mesh(DumbbellSpec(1.0, 1.0, ProfileSpec.constant(), 0.2), 0.1)


def test_global_symmetry_and_invariants(small_dumbbell):
    mesh = small_dumbbell
    dm = DofMap.for_mesh(mesh)
    K = assemble(mesh, dm, PlateForm(MaterialParams(0.3, 0.0)))
    M = assemble(mesh, dm, Mass())
    Kf = K.full
    assert abs(Kf - Kf.T).max() == 0.0
    one = constant_vector(dm)
    assert M.quad(one) == pytest.approx(mesh.area(), rel=1e-13)
    # a constant has no bending and no gradient energy when tau = 0
    np.testing.assert_allclose(K @ one, M @ one, atol=1e-12)


def test_tau_adds_gradient_energy(small_dumbbell):
    mesh = small_dumbbell
    dm = DofMap.for_mesh(mesh)
    full = np.zeros((mesh.n_nodes, 4))
    full[:, 0] = mesh.nodes[:, 0]
    full[:, 1] = 1.0
    x = full.ravel()
    # quadrature route: x^T K x cancels digits of order h^-4 here
    e0 = energy(mesh, dm, PlateForm(MaterialParams(0.3, 0.0)), x)
    e2 = energy(mesh, dm, PlateForm(MaterialParams(0.3, 2.0)), x)
    assert e2 - e0 == pytest.approx(2.0 * mesh.area(), rel=1e-12)
    K2 = assemble(mesh, dm, PlateForm(MaterialParams(0.3, 2.0)))
    assert K2.quad(x) == pytest.approx(e2, rel=1e-10)


def test_constraint_counts():
    m = build_channel_reference_mesh(4, 4)
    dm = apply_clamped_constraints(m, DofMap.for_mesh(m))
    assert int(dm.constrained.sum()) == 40
    iv = build_interval_mesh(8)
    dm1 = apply_clamped_constraints(iv, DofMap.for_mesh(iv))
    assert int(dm1.constrained.sum()) == 4
    K = assemble(m, dm, ChannelEpsForm(MaterialParams(), 0.1, ProfileSpec.constant()))
    assert K.n == 25 * 4 - 40


def test_no_clamped_nodes_raises(small_dumbbell):
    with pytest.raises(NoTaggedNodes):
        apply_clamped_constraints(small_dumbbell, DofMap.for_mesh(small_dumbbell))


def test_form_mesh_compatibility(small_dumbbell):
    prof = ProfileSpec.constant()
    dm = DofMap.for_mesh(small_dumbbell)
    with pytest.raises(IncompatibleMesh):
        assemble(small_dumbbell, dm, ChannelEpsForm(MaterialParams(), 0.1, prof))
    iv = build_interval_mesh(4)
    with pytest.raises(IncompatibleMesh):
        assemble(iv, DofMap.for_mesh(iv), PlateForm())
    with pytest.raises(IncompatibleMesh):
        assemble(small_dumbbell, dm, Limit1DForm(MaterialParams(), prof))


def test_coercive_after_clamping():
    m = build_channel_reference_mesh(6, 3, ProfileSpec.cosine_bump(1.0, 0.4))
    dm = apply_clamped_constraints(m, DofMap.for_mesh(m))
    K = assemble(m, dm, ChannelEpsForm(MaterialParams(0.3, 0.0), 0.2, ProfileSpec.cosine_bump(1.0, 0.4)))
    M = assemble(m, dm, WeightedMass(ProfileSpec.cosine_bump(1.0, 0.4)))
    assert np.linalg.eigvalsh(K.toarray()).min() > 0
    assert np.linalg.eigvalsh(M.toarray()).min() > 0


def test_unit_epsilon_flat_channel_is_plate():
    p = MaterialParams(0.3, 1.0)
    m = build_channel_reference_mesh(5, 3)
    dm = apply_clamped_constraints(m, DofMap.for_mesh(m))
    A = assemble(m, dm, ChannelEpsForm(p, 1.0, ProfileSpec.constant())).toarray()
    B = assemble(m, dm, PlateForm(p)).toarray()
    assert np.max(np.abs(A - B)) <= 1e-12 * np.max(np.abs(B))
    Mw = assemble(m, dm, WeightedMass(ProfileSpec.constant())).toarray()
    Mp = assemble(m, dm, Mass()).toarray()
    assert np.max(np.abs(Mw - Mp)) <= 1e-14 * np.max(np.abs(Mp))


@pytest.mark.parametrize("eps", [0.4, 0.1, 0.025])
def test_pulled_back_channel_matches_physical_strip(eps):
    """Eigenvalues of the pulled-back form on the unit square equal those of
    the plate form on the physical strip meshed with the stretched grid."""
    p = MaterialParams(0.3, 0.5)
    ref = build_channel_reference_mesh(6, 3)
    dm = apply_clamped_constraints(ref, DofMap.for_mesh(ref))
    A = assemble(ref, dm, ChannelEpsForm(p, eps, ProfileSpec.constant()))
    Mw = assemble(ref, dm, WeightedMass(ProfileSpec.constant()))
    strip = dataclasses.replace(ref, nodes=ref.nodes * [1.0, eps], elem_size=ref.elem_size * [1.0, eps],
                                ys=ref.ys * eps, kind="strip")
    dms = apply_clamped_constraints(strip, DofMap.for_mesh(strip))
    B = assemble(strip, dms, PlateForm(p))
    Ms = assemble(strip, dms, Mass())
    la = dense_reference_solve(A, Mw).eigenvalues[:8]
    lb = dense_reference_solve(B, Ms).eigenvalues[:8]
    np.testing.assert_allclose(la, lb, rtol=1e-9)


def test_assembly_is_deterministic(small_dumbbell):
    dm = DofMap.for_mesh(small_dumbbell)
    a = assemble(small_dumbbell, dm, PlateForm()).upper
    b = assemble(small_dumbbell, dm, PlateForm()).upper
    assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.data, b.data)


@given(seed=st.integers(0, 2 ** 31), clamp=st.booleans())
@settings(max_examples=15, deadline=None)
def test_quadrature_energy_matches_assembled(seed, clamp):
    prof = ProfileSpec.cosine_bump(1.0, 0.3)
    m = build_channel_reference_mesh(5, 3, prof)
    dm = DofMap.for_mesh(m)
    if clamp:
        dm = apply_clamped_constraints(m, dm)
    kind = ChannelEpsForm(MaterialParams(0.2, 1.0), 0.1, prof)
    K = assemble(m, dm, kind)
    X = np.random.default_rng(seed).standard_normal((dm.n_free, 3))
    np.testing.assert_allclose(energy(m, dm, kind, X), np.einsum("im,im->m", X, K @ X), rtol=1e-11)


def test_interval_energy_and_mass():
    prof = ProfileSpec.polynomial([2.0, -4.0, 4.0])
    iv = build_interval_mesh(16)
    dm = DofMap.for_mesh(iv)
    M = assemble(iv, dm, WeightedMass(prof))
    one = constant_vector(dm)
    assert M.quad(one) == pytest.approx(prof.integral(), rel=1e-13)
    K = assemble(iv, dm, Limit1DForm(MaterialParams(0.3, 1.0), prof))
    x = np.random.default_rng(0).standard_normal(dm.n_free)
    assert energy(iv, dm, Limit1DForm(MaterialParams(0.3, 1.0), prof), x) == pytest.approx(K.quad(x), rel=1e-12)


def test_all_boundary_clamps_every_edge(small_dumbbell):
    dm = apply_clamped_constraints(small_dumbbell, DofMap.for_mesh(small_dumbbell), ALL_BOUNDARY)
    per_node = dm.constrained.reshape(-1, 4)
    assert np.all(per_node.all(1) | ~per_node.any(1))
    assert per_node.all(1).sum() > 0


def test_matrix_market_roundtrip(tmp_path, small_dumbbell):
    import scipy.io
    dm = DofMap.for_mesh(small_dumbbell)
    K = assemble(small_dumbbell, dm, PlateForm())
    K.dump_matrix_market(tmp_path / "K.mtx")
    back = scipy.io.mmread(str(tmp_path / "K.mtx")).tocsr()
    assert abs(back - K.full).max() == 0.0
